//! Spectrum and effective forms of the equilateral metric Laplacian,
//! derived entirely from the discrete band data.
//!
//! On a periodic graph with unit edge lengths, the metric Laplacian's
//! fiber eigenvalues are images of the discrete normalized eigenvalues
//! under `z = arccos(1 - lambda)` followed by branch shifts `z + pi j`
//! (even branches) and `pi (j + 1) - z` (odd branches), squared. No
//! differential equations are solved here; the conjugation is exact.

use rayon::prelude::*;
use serde::Serialize;

use crate::directions::sphere_directions;
use crate::effmass::{form_at_bottom, EffectiveForm};
use crate::error::ComputeError;
use crate::floquet::{fiber_matrix, Flavor, Quasimomentum};
use crate::graph::FundamentalGraph;
use crate::spectrum::BandReport;

/// Eigenvalues this close to the spectral endpoints 0 and 2 snap onto
/// them before conjugation, so exact branch endpoints stay exact.
const ENDPOINT_SNAP: f64 = 1e-10;
/// Guard width around the Dirichlet points `(pi k)^2` where the branch
/// factor blows up.
const RESONANCE_TOL: f64 = 1e-8;

/// Conjugated coordinate of a discrete eigenvalue, in [0, pi].
pub fn conjugated_coordinate(lambda: f64) -> f64 {
    let lambda = if lambda.abs() < ENDPOINT_SNAP {
        0.0
    } else if (lambda - 2.0).abs() < ENDPOINT_SNAP {
        2.0
    } else {
        lambda
    };
    (1.0 - lambda).clamp(-1.0, 1.0).acos()
}

/// Image of a discrete band interval under branch `j`. Odd branches
/// reverse orientation, which swaps the roles of the two endpoints.
pub fn branch_interval(lo: f64, hi: f64, branch: usize) -> (f64, f64) {
    let (z_lo, z_hi) = (conjugated_coordinate(lo), conjugated_coordinate(hi));
    let j = branch as f64;
    let (a, b) = if branch.is_multiple_of(2) {
        (
            z_lo + std::f64::consts::PI * j,
            z_hi + std::f64::consts::PI * j,
        )
    } else {
        (
            std::f64::consts::PI * (j + 1.0) - z_hi,
            std::f64::consts::PI * (j + 1.0) - z_lo,
        )
    };
    (a * a, b * b)
}

/// One absolutely continuous metric band.
#[derive(Debug, Clone, Serialize)]
pub struct MetricBand {
    /// 1-based discrete band number.
    pub band: usize,
    /// Branch index j >= 0.
    pub branch: usize,
    pub lower: f64,
    pub upper: f64,
}

/// Images of a discrete flat band: one point eigenvalue per branch.
#[derive(Debug, Clone, Serialize)]
pub struct MetricFlatFamily {
    pub band: usize,
    pub values: Vec<f64>,
}

/// Metric-graph spectrum up to the requested branch and Dirichlet counts.
#[derive(Debug, Clone, Serialize)]
pub struct MetricSpectrum {
    pub ac_bands: Vec<MetricBand>,
    /// Dirichlet point spectrum `(pi k)^2`, always present.
    pub flat_points: Vec<f64>,
    pub flat_band_families: Vec<MetricFlatFamily>,
}

/// Map a refined discrete band report to the metric spectrum.
pub fn metric_spectrum(
    report: &BandReport,
    branch_max: usize,
    dirichlet_max: usize,
) -> Result<MetricSpectrum, ComputeError> {
    if report.flavor != Flavor::Normalized {
        return Err(ComputeError::NotNormalized);
    }
    let mut ac_bands = Vec::new();
    let mut flat_band_families = Vec::new();
    for summary in &report.bands {
        if let Some(value) = summary.flat_value {
            let z = conjugated_coordinate(value);
            let values = (0..=branch_max)
                .map(|j| {
                    let (point, _) = branch_interval_from_z(z, z, j);
                    point
                })
                .collect();
            flat_band_families.push(MetricFlatFamily {
                band: summary.band,
                values,
            });
            continue;
        }
        for j in 0..=branch_max {
            let (lower, upper) = branch_interval(summary.interval.0, summary.interval.1, j);
            ac_bands.push(MetricBand {
                band: summary.band,
                branch: j,
                lower,
                upper,
            });
        }
    }
    let flat_points = (1..=dirichlet_max)
        .map(|k| {
            let zk = std::f64::consts::PI * k as f64;
            zk * zk
        })
        .collect();
    Ok(MetricSpectrum {
        ac_bands,
        flat_points,
        flat_band_families,
    })
}

fn branch_interval_from_z(z_lo: f64, z_hi: f64, branch: usize) -> (f64, f64) {
    let j = branch as f64;
    let (a, b) = if branch.is_multiple_of(2) {
        (
            z_lo + std::f64::consts::PI * j,
            z_hi + std::f64::consts::PI * j,
        )
    } else {
        (
            std::f64::consts::PI * (j + 1.0) - z_hi,
            std::f64::consts::PI * (j + 1.0) - z_lo,
        )
    };
    (a * a, b * b)
}

/// Conversion factor between a discrete effective form and the metric one
/// at edge energy E: `2 sqrt(E) / sin(sqrt(E))`, with limit 2 at the
/// bottom. Energies on the Dirichlet lattice are refused since the factor
/// has a pole there.
pub fn metric_factor(edge_energy: f64) -> Result<f64, ComputeError> {
    if edge_energy < 0.0 {
        return Err(ComputeError::ResonantEnergy(edge_energy));
    }
    let z = edge_energy.sqrt();
    if z < RESONANCE_TOL {
        return Ok(2.0);
    }
    let nearest = (z / std::f64::consts::PI).round();
    if nearest >= 1.0 && (z - std::f64::consts::PI * nearest).abs() < RESONANCE_TOL {
        return Err(ComputeError::ResonantEnergy(edge_energy));
    }
    Ok(2.0 * z / z.sin())
}

/// Scale a discrete effective form to the metric one at the given edge
/// energy. The factor is negative on orientation-reversing branches,
/// which is exactly how minima and maxima trade places there.
pub fn metric_effective_form(
    edge_energy: f64,
    form: &EffectiveForm,
) -> Result<EffectiveForm, ComputeError> {
    if form.flavor != Flavor::Normalized {
        return Err(ComputeError::NotNormalized);
    }
    let factor = metric_factor(edge_energy)?;
    Ok(EffectiveForm {
        matrix: &form.matrix * factor,
        band: form.band,
        location: form.location.clone(),
        flavor: form.flavor,
        method: form.method,
    })
}

/// Verification record for the metric bottom-of-spectrum bounds: the
/// doubled discrete bounds, the doubling identity checked through the
/// exact bottom form, and an independent finite-difference probe of the
/// lowest metric band function near zero.
#[derive(Debug, Clone)]
pub struct MetricBottomCheck {
    pub lower: f64,
    pub upper: f64,
    pub min_form: f64,
    pub max_form: f64,
    pub sweep: usize,
    pub lower_margin: f64,
    pub upper_margin: f64,
    /// Largest deviation of the finite-difference metric form from twice
    /// the discrete bottom form over the sweep.
    pub fd_max_deviation: f64,
}

/// Check the metric bottom bounds over a direction sweep.
pub fn metric_bottom_bounds(
    g: &FundamentalGraph,
    sweep: usize,
) -> Result<MetricBottomCheck, ComputeError> {
    let bridges = g.bridges().expect("graph was validated at construction");
    let scale = g.total_degree() as f64;
    let nu = g.vertex_count() as f64;
    let d = g.dimension() as f64;
    let lower = 2.0 * bridges.basis_gram_min / (scale * nu * d);
    let upper = 2.0 * bridges.full_gram_max / scale;

    let zero = Quasimomentum::zero(g.dimension());
    let step = 1e-3;
    let directions = sphere_directions(g.dimension(), sweep);
    let sweep = directions.len();
    let per_direction = directions
        .par_iter()
        .map(|direction| {
            let metric_form = 2.0 * form_at_bottom(g, direction, Flavor::Normalized)?;
            let energy = |epsilon: f64| -> Result<f64, ComputeError> {
                let lambda = fiber_matrix(g, &zero.offset(direction, epsilon), Flavor::Normalized)?
                    .eigenvalues()[0];
                let z = conjugated_coordinate(lambda.max(0.0));
                Ok(z * z)
            };
            let second =
                |h: f64| -> Result<f64, ComputeError> { Ok((energy(h)? + energy(-h)?) / (h * h)) };
            let fd = 0.5 * (4.0 * second(step / 2.0)? - second(step)?) / 3.0;
            Ok((metric_form, (fd - metric_form).abs()))
        })
        .collect::<Result<Vec<_>, ComputeError>>()?;

    let mut min_form = f64::INFINITY;
    let mut max_form = f64::NEG_INFINITY;
    let mut fd_max_deviation = 0.0f64;
    for (metric_form, deviation) in per_direction {
        min_form = min_form.min(metric_form);
        max_form = max_form.max(metric_form);
        fd_max_deviation = fd_max_deviation.max(deviation);
    }
    Ok(MetricBottomCheck {
        lower,
        upper,
        min_form,
        max_form,
        sweep,
        lower_margin: min_form - lower,
        upper_margin: upper - max_form,
        fd_max_deviation,
    })
}
