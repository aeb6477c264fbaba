//! Command-line front end: load graph files or built-in fixtures, run the
//! analyses, and emit deterministic CSV/JSON reports.
//!
//! Exit codes: 0 on success, 2 for validation or configuration failures,
//! 3 for numerical refusals (degenerate edge, resonant energy).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use perigraph::directions::default_sweep;
use perigraph::effmass::{
    bottom_bounds, density_of_states_mass, edge_bound, effective_matrix,
    effective_matrix_at_bottom, effective_matrix_finite_difference, mass_tensor, trace_bounds,
    EffectiveForm,
};
use perigraph::error::{ComputeError, GraphError};
use perigraph::fixtures;
use perigraph::floquet::{fiber_matrix, Flavor, Quasimomentum};
use perigraph::graph::{parse_graph, FundamentalGraph};
use perigraph::metric::{
    branch_interval, metric_bottom_bounds, metric_effective_form, metric_factor, metric_spectrum,
};
use perigraph::report::{
    band_samples_csv, bands_json, graph_summary, to_json_string, validate_json, BandEdgeReport,
    BottomBoundReport, DosMassReport, EdgeBoundReport, FormReport, GraphSummary, MassReport,
    MetricBottomReport, MetricEdgeFormReport, MetricJson, TraceBoundReport,
};
use perigraph::spectrum::{
    band_report, band_structure, default_grid, BandEdge, EdgeEnd, SIMPLE_TOL,
};

/// Default finite-difference step for the oracle matrices in reports.
const FD_STEP: f64 = 1e-3;

#[derive(Parser)]
#[command(
    name = "perigraph",
    version,
    about = "Band structures, effective masses and spectral bounds for Laplacians on periodic graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Graph file path, or a fixture name: graphene, stanene, kagome, lattice:D.
    input: String,

    /// Torus grid resolution per axis (defaults depend on dimension).
    #[arg(long)]
    grid: Option<usize>,

    /// Re-index edges so every spanning-tree edge gets a zero index.
    #[arg(long)]
    normalize_indices: bool,

    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a graph document and report its structural invariants.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Output format: text or json.
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// Sample band functions over the torus; emit CSV samples or a JSON
    /// interval report.
    Bands {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "normalized")]
        flavor: Flavor,
        /// Output format: csv (grid samples) or json (intervals, gaps,
        /// flat bands, edges).
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Effective forms, mass tensors, and every bound check at a band edge.
    Effmass {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "normalized")]
        flavor: Flavor,
        /// Edge selector: bottom, bandN-min or bandN-max (1-based).
        #[arg(long, default_value = "bottom")]
        edge: String,
        /// Direction-sweep size for bound verification.
        #[arg(long)]
        sweep: Option<usize>,
        /// Degeneracy factor for the density-of-states mass (3D bottom
        /// reports only).
        #[arg(long, default_value_t = 1.0)]
        degeneracy: f64,
    },
    /// Equilateral metric-graph spectrum and effective forms.
    Metric {
        #[command(flatten)]
        common: CommonArgs,
        /// Highest branch index to report.
        #[arg(long, default_value_t = 4)]
        jmax: usize,
        /// Number of Dirichlet points to list.
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long)]
        sweep: Option<usize>,
        /// Optional single-edge form request: bandN-min or bandN-max.
        #[arg(long)]
        edge: Option<String>,
        /// Branch index for --edge.
        #[arg(long, default_value_t = 0)]
        branch: usize,
        /// Output format: json (full report) or csv (band table).
        #[arg(long, default_value = "json")]
        format: String,
    },
}

enum CliError {
    Graph(GraphError),
    Compute(ComputeError),
    Io(String),
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Compute(
                ComputeError::DegenerateEdge { .. }
                | ComputeError::FlatBand(_)
                | ComputeError::SingularForm
                | ComputeError::ResonantEnergy(_)
                | ComputeError::NonPositiveMass,
            ) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Graph(e) => write!(f, "{e}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(e) => write!(f, "{e}"),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Graph(e)
    }
}

impl From<ComputeError> for CliError {
    fn from(e: ComputeError) -> Self {
        CliError::Compute(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { common, format } => cmd_validate(common, &format),
        Command::Bands {
            common,
            flavor,
            format,
        } => cmd_bands(common, flavor, &format),
        Command::Effmass {
            common,
            flavor,
            edge,
            sweep,
            degeneracy,
        } => cmd_effmass(common, flavor, &edge, sweep, degeneracy),
        Command::Metric {
            common,
            jmax,
            kmax,
            sweep,
            edge,
            branch,
            format,
        } => cmd_metric(common, jmax, kmax, sweep, edge.as_deref(), branch, &format),
    }
}

fn load_graph(common: &CommonArgs) -> Result<FundamentalGraph, CliError> {
    let graph = if fixtures::is_fixture_name(&common.input) {
        fixtures::load(&common.input)?
    } else {
        let text = std::fs::read_to_string(&common.input)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", common.input)))?;
        parse_graph(&text)?
    };
    Ok(if common.normalize_indices {
        graph.normalize_indices(&graph.tree_shifts())
    } else {
        graph
    })
}

fn emit(common: &CommonArgs, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn grid_for(common: &CommonArgs, g: &FundamentalGraph) -> usize {
    common.grid.unwrap_or_else(|| default_grid(g.dimension()))
}

fn cmd_validate(common: CommonArgs, format: &str) -> Result<(), CliError> {
    let g = load_graph(&common)?;
    let report = validate_json(&common.input, &g);
    let text = match format {
        "json" => to_json_string(&report),
        "text" => {
            let mut lines = Vec::new();
            lines.push(format!("input: {}", report.input));
            lines.push(format!("dimension: {}", report.dimension));
            lines.push(format!("vertices: {}", report.vertices));
            lines.push(format!("edges: {}", report.edges));
            let degrees: Vec<String> = g
                .labels()
                .iter()
                .zip(report.degrees.iter())
                .map(|(label, k)| format!("{label}={k}"))
                .collect();
            lines.push(format!(
                "degrees: {} (total {})",
                degrees.join(" "),
                report.total_degree
            ));
            lines.push(format!(
                "bridges: {} with indices {}",
                report.bridges,
                report
                    .bridge_indices
                    .iter()
                    .map(|v| format!("{v:?}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
            lines.push(format!("basis_gram_min: {}", report.basis_gram_min));
            lines.push(format!("full_gram_max: {}", report.full_gram_max));
            lines.push(format!(
                "gram_bracket: [{}, {}]",
                report.gram_bracket.0, report.gram_bracket.1
            ));
            lines.push("ok".to_string());
            lines.join("\n") + "\n"
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown format `{other}` (expected text or json)"
            )))
        }
    };
    emit(&common, &text)
}

fn cmd_bands(common: CommonArgs, flavor: Flavor, format: &str) -> Result<(), CliError> {
    let g = load_graph(&common)?;
    let bs = band_structure(&g, grid_for(&common, &g), flavor)?;
    let text = match format {
        "csv" => band_samples_csv(&bs),
        "json" => {
            let report = band_report(&g, &bs)?;
            to_json_string(&bands_json(&common.input, &report))
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown format `{other}` (expected csv or json)"
            )))
        }
    };
    emit(&common, &text)
}

#[derive(Serialize)]
struct EffmassJson {
    input: String,
    flavor: String,
    grid: usize,
    sweep: usize,
    graph: GraphSummary,
    edge: BandEdgeReport,
    /// Where the edge location came from: the prescribed zero point for
    /// the bottom of the spectrum, or the refined grid extremizer.
    edge_origin: String,
    forms: Vec<FormReport>,
    mass: MassReport,
    oracle_deltas: OracleDeltas,
    edge_bound: EdgeBoundReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    bottom_bounds: Option<BottomBoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_bounds: Option<TraceBoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dos_mass: Option<DosMassReport>,
}

#[derive(Serialize)]
struct OracleDeltas {
    perturbative_vs_finite_difference: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbative_vs_bottom_exact: Option<f64>,
}

fn matrix_delta(a: &EffectiveForm, b: &EffectiveForm) -> f64 {
    (&a.matrix - &b.matrix).abs().max()
}

/// Edge selector: `bottom`, `bandN-min` or `bandN-max`.
fn parse_edge_spec(spec: &str) -> Result<Option<(usize, EdgeEnd)>, CliError> {
    if spec == "bottom" {
        return Ok(None);
    }
    let rest = spec
        .strip_prefix("band")
        .ok_or_else(|| CliError::Usage(format!("bad edge selector `{spec}`")))?;
    let (number, end) = if let Some(n) = rest.strip_suffix("-min") {
        (n, EdgeEnd::Minimum)
    } else if let Some(n) = rest.strip_suffix("-max") {
        (n, EdgeEnd::Maximum)
    } else {
        return Err(CliError::Usage(format!("bad edge selector `{spec}`")));
    };
    let band: usize = number
        .parse()
        .map_err(|_| CliError::Usage(format!("bad band number in `{spec}`")))?;
    Ok(Some((band, end)))
}

/// Band-edge record for the beginning of the spectrum, where the location
/// is known to be the zero quasimomentum.
fn bottom_edge(g: &FundamentalGraph, flavor: Flavor) -> Result<BandEdge, CliError> {
    let zero = Quasimomentum::zero(g.dimension());
    let eigenvalues = fiber_matrix(g, &zero, flavor)?.eigenvalues();
    let gap = eigenvalues
        .iter()
        .skip(1)
        .map(|l| (l - eigenvalues[0]).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(BandEdge {
        band: 1,
        end: EdgeEnd::Minimum,
        location: zero,
        paired_location: None,
        value: eigenvalues[0],
        simple: gap >= SIMPLE_TOL,
        spectral_gap: gap,
    })
}

fn cmd_effmass(
    common: CommonArgs,
    flavor: Flavor,
    edge_spec: &str,
    sweep: Option<usize>,
    degeneracy: f64,
) -> Result<(), CliError> {
    let g = load_graph(&common)?;
    let grid = grid_for(&common, &g);
    let sweep = sweep.unwrap_or_else(|| default_sweep(g.dimension()));
    let selector = parse_edge_spec(edge_spec)?;

    let (edge, is_bottom) = match selector {
        None => (bottom_edge(&g, flavor)?, true),
        Some((band, end)) => {
            let bs = band_structure(&g, grid, flavor)?;
            let located = perigraph::spectrum::locate_band_edge(&g, &bs, band, end)?;
            let is_bottom = band == 1 && end == EdgeEnd::Minimum && located.location.is_zero();
            (located, is_bottom)
        }
    };
    if !edge.simple {
        return Err(CliError::Compute(ComputeError::DegenerateEdge {
            band: edge.band,
            gap: edge.spectral_gap,
        }));
    }

    let perturbative = effective_matrix(&g, &edge.location, edge.band, flavor)?;
    let finite =
        effective_matrix_finite_difference(&g, &edge.location, edge.band, FD_STEP, flavor)?;
    let mut forms = vec![
        FormReport::from_form(&perturbative),
        FormReport::from_form(&finite),
    ];
    let mut bottom_delta = None;
    if is_bottom {
        let exact = effective_matrix_at_bottom(&g, flavor)?;
        bottom_delta = Some(matrix_delta(&perturbative, &exact));
        forms.push(FormReport::from_form(&exact));
    }
    let mass = mass_tensor(&perturbative)?;
    let bound_check = edge_bound(&g, &edge, flavor, sweep)?;

    let (bottom_report, trace_report, dos_report) = if is_bottom {
        let bottom = bottom_bounds(&g, flavor, sweep)?;
        let trace = trace_bounds(&g, &perturbative, flavor)?;
        let dos = if g.dimension() == 3 {
            density_of_states_mass(&g, &mass, degeneracy, flavor)
                .ok()
                .map(|d| DosMassReport::from_dos(&d))
        } else {
            None
        };
        (
            Some(BottomBoundReport::from_check(&bottom)),
            Some(TraceBoundReport::from_check(&trace)),
            dos,
        )
    } else {
        (None, None, None)
    };

    let report = EffmassJson {
        input: common.input.clone(),
        flavor: flavor.to_string(),
        grid,
        sweep,
        graph: graph_summary(&g),
        edge: BandEdgeReport::from_edge(&edge),
        edge_origin: if selector.is_none() {
            "prescribed-zero".to_string()
        } else {
            "grid-refined".to_string()
        },
        forms,
        mass: MassReport::from_mass(&mass),
        oracle_deltas: OracleDeltas {
            perturbative_vs_finite_difference: matrix_delta(&perturbative, &finite),
            perturbative_vs_bottom_exact: bottom_delta,
        },
        edge_bound: EdgeBoundReport::from_check(&bound_check),
        bottom_bounds: bottom_report,
        trace_bounds: trace_report,
        dos_mass: dos_report,
    };
    emit(&common, &to_json_string(&report))
}

fn cmd_metric(
    common: CommonArgs,
    jmax: usize,
    kmax: usize,
    sweep: Option<usize>,
    edge_spec: Option<&str>,
    branch: usize,
    format: &str,
) -> Result<(), CliError> {
    let g = load_graph(&common)?;
    let grid = grid_for(&common, &g);
    let sweep = sweep.unwrap_or_else(|| default_sweep(g.dimension()));
    let bs = band_structure(&g, grid, Flavor::Normalized)?;
    let report = band_report(&g, &bs)?;

    // Explicit single-edge request: refuse degenerate or resonant edges.
    if let Some(spec) = edge_spec {
        let (band, end) = parse_edge_spec(spec)?
            .ok_or_else(|| CliError::Usage("use bandN-min or bandN-max with --edge".into()))?;
        let edge = perigraph::spectrum::locate_band_edge(&g, &bs, band, end)?;
        if !edge.simple {
            return Err(CliError::Compute(ComputeError::DegenerateEdge {
                band: edge.band,
                gap: edge.spectral_gap,
            }));
        }
        let (lower, upper) = branch_interval(edge.value, edge.value, branch);
        debug_assert!((lower - upper).abs() < 1e-9);
        let factor = metric_factor(lower)?;
        let discrete = effective_matrix(&g, &edge.location, edge.band, Flavor::Normalized)?;
        let metric_form = metric_effective_form(lower, &discrete)?;
        let entry = MetricEdgeFormReport {
            band: edge.band,
            end: edge.end.to_string(),
            branch,
            edge_energy: lower,
            factor,
            form: FormReport::from_form(&metric_form),
        };
        return emit(&common, &to_json_string(&entry));
    }

    let spectrum = metric_spectrum(&report, jmax, kmax)?;
    let bottom = metric_bottom_bounds(&g, sweep)?;

    let mut edge_forms = Vec::new();
    for summary in &report.bands {
        for edge in &summary.edges {
            if !edge.simple {
                continue;
            }
            let discrete = effective_matrix(&g, &edge.location, edge.band, Flavor::Normalized)?;
            for j in 0..=jmax {
                let (energy, _) = branch_interval(edge.value, edge.value, j);
                let Ok(factor) = metric_factor(energy) else {
                    continue; // resonant branch endpoint, no form there
                };
                let metric_form = metric_effective_form(energy, &discrete)?;
                edge_forms.push(MetricEdgeFormReport {
                    band: edge.band,
                    end: edge.end.to_string(),
                    branch: j,
                    edge_energy: energy,
                    factor,
                    form: FormReport::from_form(&metric_form),
                });
            }
        }
    }

    let text = match format {
        "csv" => perigraph::report::metric_bands_csv(&spectrum),
        "json" => {
            let report = MetricJson {
                input: common.input.clone(),
                grid,
                branch_max: jmax,
                dirichlet_max: kmax,
                spectrum,
                bottom: MetricBottomReport::from_check(&bottom),
                edge_forms,
            };
            to_json_string(&report)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown format `{other}` (expected csv or json)"
            )))
        }
    };
    emit(&common, &text)
}
