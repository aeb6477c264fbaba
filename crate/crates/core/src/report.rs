//! CSV and JSON emitters with deterministic formatting.
//!
//! Floats in CSV output are printed with 17 significant digits, enough to
//! round-trip any f64, so identical configurations produce identical
//! bytes. JSON goes through serde with struct-ordered keys; infinities
//! are mapped to nulls through options.

use serde::Serialize;

use crate::effmass::{
    BottomBoundCheck, DosMass, EdgeBoundCheck, EffectiveForm, FormMethod, MassTensor,
    TraceBoundCheck,
};
use crate::graph::FundamentalGraph;
use crate::metric::{MetricBottomCheck, MetricSpectrum};
use crate::spectrum::{BandEdge, BandReport, BandStructure};

/// 17 significant digits, scientific notation.
pub fn format_float(x: f64) -> String {
    format!("{:.16e}", x)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// One row per grid point: the quasimomentum components, then the sorted
/// eigenvalues.
pub fn band_samples_csv(bs: &BandStructure) -> String {
    let d = bs.dimension();
    let bands = bs.band_count();
    let mut out = String::new();
    let mut header: Vec<String> = (1..=d).map(|a| format!("theta_{a}")).collect();
    header.extend((1..=bands).map(|b| format!("lambda_{b}")));
    out.push_str(&header.join(","));
    out.push('\n');
    for (point, sample) in bs.points().iter().zip(bs.samples()) {
        let mut row: Vec<String> = point.iter().map(|&x| format_float(x)).collect();
        row.extend(sample.iter().map(|&x| format_float(x)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct BandIntervalReport {
    pub band: usize,
    pub lower: f64,
    pub upper: f64,
    pub flat: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_value: Option<f64>,
}

#[derive(Serialize)]
pub struct BandEdgeReport {
    pub band: usize,
    pub end: String,
    pub location: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paired_location: Option<Vec<f64>>,
    pub value: f64,
    pub simple: bool,
    /// Distance to the rest of the fiber spectrum; absent means infinite.
    pub spectral_gap: Option<f64>,
}

impl BandEdgeReport {
    pub fn from_edge(edge: &BandEdge) -> Self {
        BandEdgeReport {
            band: edge.band,
            end: edge.end.to_string(),
            location: edge.location.components().to_vec(),
            paired_location: edge
                .paired_location
                .as_ref()
                .map(|p| p.components().to_vec()),
            value: edge.value,
            simple: edge.simple,
            spectral_gap: finite(edge.spectral_gap),
        }
    }
}

#[derive(Serialize)]
pub struct BandsJson {
    pub input: String,
    pub flavor: String,
    pub grid: usize,
    pub bands: Vec<BandIntervalReport>,
    pub gaps: Vec<(f64, f64)>,
    pub flat_bands: Vec<crate::spectrum::FlatBand>,
    pub edges: Vec<BandEdgeReport>,
}

pub fn bands_json(input: &str, report: &BandReport) -> BandsJson {
    BandsJson {
        input: input.to_string(),
        flavor: report.flavor.to_string(),
        grid: report.grid,
        bands: report
            .bands
            .iter()
            .map(|b| BandIntervalReport {
                band: b.band,
                lower: b.interval.0,
                upper: b.interval.1,
                flat: b.flat_value.is_some(),
                flat_value: b.flat_value,
            })
            .collect(),
        gaps: report.gaps.clone(),
        flat_bands: report.flat_bands(),
        edges: report
            .bands
            .iter()
            .flat_map(|b| b.edges.iter().map(BandEdgeReport::from_edge))
            .collect(),
    }
}

#[derive(Serialize)]
pub struct FormReport {
    pub method: String,
    pub matrix: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl FormReport {
    pub fn from_form(form: &EffectiveForm) -> Self {
        let d = form.dimension();
        FormReport {
            method: match form.method {
                FormMethod::Perturbative => "perturbative".into(),
                FormMethod::BottomExact => "bottom-exact".into(),
                FormMethod::FiniteDifference => "finite-difference".into(),
            },
            matrix: (0..d)
                .map(|i| (0..d).map(|j| form.matrix[(i, j)]).collect())
                .collect(),
            eigenvalues: form.eigenvalues(),
        }
    }
}

#[derive(Serialize)]
pub struct MassReport {
    pub matrix: Vec<Vec<f64>>,
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
}

impl MassReport {
    pub fn from_mass(mass: &MassTensor) -> Self {
        let d = mass.matrix.nrows();
        MassReport {
            matrix: (0..d)
                .map(|i| (0..d).map(|j| mass.matrix[(i, j)]).collect())
                .collect(),
            eigenvalues: mass.eigenvalues.clone(),
        }
    }
}

#[derive(Serialize)]
pub struct EdgeBoundReport {
    pub first_moment: f64,
    pub second_moment: f64,
    pub spectral_gap: Option<f64>,
    pub bound: f64,
    pub max_abs_form: f64,
    pub sweep: usize,
    pub margin: f64,
}

impl EdgeBoundReport {
    pub fn from_check(check: &EdgeBoundCheck) -> Self {
        EdgeBoundReport {
            first_moment: check.first_moment,
            second_moment: check.second_moment,
            spectral_gap: finite(check.spectral_gap),
            bound: check.bound,
            max_abs_form: check.max_abs_form,
            sweep: check.sweep,
            margin: check.margin,
        }
    }
}

#[derive(Serialize)]
pub struct BottomBoundReport {
    pub lower: f64,
    pub upper: f64,
    pub min_form: f64,
    pub max_form: f64,
    pub max_projected: f64,
    pub sweep: usize,
    pub lower_margin: f64,
    pub middle_margin: f64,
    pub upper_margin: f64,
    pub per_bridge_margin: f64,
}

impl BottomBoundReport {
    pub fn from_check(check: &BottomBoundCheck) -> Self {
        BottomBoundReport {
            lower: check.lower,
            upper: check.upper,
            min_form: check.min_form,
            max_form: check.max_form,
            max_projected: check.max_projected,
            sweep: check.sweep,
            lower_margin: check.lower_margin,
            middle_margin: check.middle_margin,
            upper_margin: check.upper_margin,
            per_bridge_margin: check.per_bridge_margin,
        }
    }
}

#[derive(Serialize)]
pub struct TraceBoundReport {
    pub trace_lower: f64,
    pub trace_upper: f64,
    pub trace: f64,
    pub mass_upper: f64,
    pub mass_lower: f64,
    pub mass_eigenvalues: Vec<f64>,
    pub margins: [f64; 4],
}

impl TraceBoundReport {
    pub fn from_check(check: &TraceBoundCheck) -> Self {
        TraceBoundReport {
            trace_lower: check.trace_lower,
            trace_upper: check.trace_upper,
            trace: check.trace,
            mass_upper: check.mass_upper,
            mass_lower: check.mass_lower,
            mass_eigenvalues: check.mass_eigenvalues.clone(),
            margins: [
                check.trace_lower_margin,
                check.trace_upper_margin,
                check.mass_upper_margin,
                check.mass_lower_margin,
            ],
        }
    }
}

#[derive(Serialize)]
pub struct DosMassReport {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl DosMassReport {
    pub fn from_dos(dos: &DosMass) -> Self {
        DosMassReport {
            value: dos.value,
            lower: dos.lower,
            upper: dos.upper,
        }
    }
}

/// Graph-level constants reused across reports: sizes, the total
/// degree, and the bridge Gram eigenvalue data.
#[derive(Serialize)]
pub struct GraphSummary {
    pub dimension: usize,
    pub vertices: usize,
    pub edges: usize,
    pub total_degree: usize,
    pub bridges: usize,
    pub basis_gram_min: f64,
    pub full_gram_max: f64,
}

pub fn graph_summary(g: &FundamentalGraph) -> GraphSummary {
    let bridges = g.bridges().expect("graph was validated at construction");
    GraphSummary {
        dimension: g.dimension(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        total_degree: g.total_degree(),
        bridges: bridges.bridge_count(),
        basis_gram_min: bridges.basis_gram_min,
        full_gram_max: bridges.full_gram_max,
    }
}

#[derive(Serialize)]
pub struct ValidateJson {
    pub input: String,
    pub dimension: usize,
    pub vertices: usize,
    pub edges: usize,
    pub degrees: Vec<usize>,
    pub total_degree: usize,
    pub bridges: usize,
    pub bridge_indices: Vec<Vec<i64>>,
    pub basis_indices: Vec<Vec<i64>>,
    pub basis_gram_min: f64,
    pub full_gram_max: f64,
    pub gram_bracket: (f64, f64),
}

pub fn validate_json(input: &str, g: &FundamentalGraph) -> ValidateJson {
    let bridges = g.bridges().expect("graph was validated at construction");
    ValidateJson {
        input: input.to_string(),
        dimension: g.dimension(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        degrees: g.degrees().to_vec(),
        total_degree: g.total_degree(),
        bridges: bridges.bridge_count(),
        bridge_indices: bridges
            .bridge_ids
            .iter()
            .map(|&e| g.edges()[e].index.clone())
            .collect(),
        basis_indices: bridges
            .basis_ids
            .iter()
            .map(|&e| g.edges()[e].index.clone())
            .collect(),
        basis_gram_min: bridges.basis_gram_min,
        full_gram_max: bridges.full_gram_max,
        gram_bracket: bridges.bracket,
    }
}

#[derive(Serialize)]
pub struct MetricBottomReport {
    pub lower: f64,
    pub upper: f64,
    pub min_form: f64,
    pub max_form: f64,
    pub sweep: usize,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub fd_max_deviation: f64,
}

impl MetricBottomReport {
    pub fn from_check(check: &MetricBottomCheck) -> Self {
        MetricBottomReport {
            lower: check.lower,
            upper: check.upper,
            min_form: check.min_form,
            max_form: check.max_form,
            sweep: check.sweep,
            lower_margin: check.lower_margin,
            upper_margin: check.upper_margin,
            fd_max_deviation: check.fd_max_deviation,
        }
    }
}

#[derive(Serialize)]
pub struct MetricJson {
    pub input: String,
    pub grid: usize,
    pub branch_max: usize,
    pub dirichlet_max: usize,
    pub spectrum: MetricSpectrum,
    pub bottom: MetricBottomReport,
    pub edge_forms: Vec<MetricEdgeFormReport>,
}

#[derive(Serialize)]
pub struct MetricEdgeFormReport {
    pub band: usize,
    pub end: String,
    pub branch: usize,
    pub edge_energy: f64,
    pub factor: f64,
    pub form: FormReport,
}

/// One row per absolutely continuous metric band, labeled by the discrete
/// band number and the branch index.
pub fn metric_bands_csv(spectrum: &MetricSpectrum) -> String {
    let mut out = String::from("band,branch,lower,upper\n");
    for band in &spectrum.ac_bands {
        out.push_str(&format!(
            "{},{},{},{}\n",
            band.band,
            band.branch,
            format_float(band.lower),
            format_float(band.upper)
        ));
    }
    out
}

/// Render any serializable report as pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}
