//! Effective forms and mass tensors at band edges, with every computable
//! two-sided bound.
//!
//! Three independent routes to the quadratic Taylor coefficient of a band
//! function are provided: second-order perturbation theory at any simple
//! edge, an exact projection formula at the bottom of the spectrum, and a
//! Richardson-extrapolated finite-difference oracle. The bound checks
//! cover the edge estimate through the index moments and the eigenvalue
//! isolation, the three-layer bottom estimate, the per-bridge lower
//! estimate, and the trace/mass chains, for both Laplacian flavors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::directions::sphere_directions;
use crate::error::ComputeError;
use crate::floquet::{derivative_matrices, fiber_matrix, gradient_matrix, Flavor, Quasimomentum};
use crate::graph::FundamentalGraph;
use crate::spectrum::{BandEdge, SIMPLE_TOL};

/// Singular values above `1e-9 * vertex_count` count toward the range of
/// the gradient factor when projecting onto its cokernel.
const PROJECTION_RANK_EPS: f64 = 1e-9;

/// How an effective form was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormMethod {
    Perturbative,
    BottomExact,
    FiniteDifference,
}

/// A band-edge effective form: the symmetric matrix M with
/// `mu(direction) = <M direction, direction>` for unit directions.
#[derive(Debug, Clone)]
pub struct EffectiveForm {
    pub matrix: DMatrix<f64>,
    /// 1-based band number.
    pub band: usize,
    pub location: Quasimomentum,
    pub flavor: Flavor,
    pub method: FormMethod,
}

impl EffectiveForm {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Evaluate the form on a direction (normalized internally).
    pub fn evaluate(&self, direction: &[f64]) -> f64 {
        let w = DVector::from_column_slice(direction);
        let w = &w / w.norm();
        (&self.matrix * &w).dot(&w)
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        v
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// The inverse of an effective form: mass eigenvalues are reciprocals of
/// the form eigenvalues, sorted descending.
#[derive(Debug, Clone)]
pub struct MassTensor {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

fn unit_direction(direction: &[f64]) -> Result<Vec<f64>, ComputeError> {
    if direction.is_empty() {
        return Err(ComputeError::ZeroDirection);
    }
    let norm: f64 = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(ComputeError::ZeroDirection);
    }
    Ok(direction.iter().map(|x| x / norm).collect())
}

fn band_index(g: &FundamentalGraph, band: usize) -> Result<usize, ComputeError> {
    if band == 0 || band > g.vertex_count() {
        return Err(ComputeError::BandOutOfRange {
            band,
            count: g.vertex_count(),
        });
    }
    Ok(band - 1)
}

/// The degree mass in the normalized flavor, the vertex count in the
/// combinatorial one. Every bottom-of-spectrum constant differs between
/// the two flavors by exactly this substitution.
fn mass_scale(g: &FundamentalGraph, flavor: Flavor) -> f64 {
    match flavor {
        Flavor::Normalized => g.total_degree() as f64,
        Flavor::Combinatorial => g.vertex_count() as f64,
    }
}

fn coupling(g: &FundamentalGraph, flavor: Flavor, u: usize, v: usize) -> f64 {
    match flavor {
        Flavor::Normalized => 1.0 / ((g.degree(u) * g.degree(v)) as f64).sqrt(),
        Flavor::Combinatorial => 1.0,
    }
}

/// Effective form by second-order perturbation of a simple fiber
/// eigenvalue: the curvature term of the second derivative matrix minus
/// the reduced-resolvent correction through the first derivative.
pub fn form_perturbative(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    band: usize,
    direction: &[f64],
    flavor: Flavor,
) -> Result<f64, ComputeError> {
    let idx = band_index(g, band)?;
    if direction.len() != g.dimension() {
        return Err(ComputeError::DimensionMismatch {
            expected: g.dimension(),
            found: direction.len(),
        });
    }
    let direction = unit_direction(direction)?;
    let fiber = fiber_matrix(g, theta, flavor)?;
    let (values, vectors) = fiber.eigenpairs();
    if values.len() > 1 {
        let gap = values
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != idx)
            .map(|(_, v)| (v - values[idx]).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < SIMPLE_TOL {
            return Err(ComputeError::DegenerateEdge { band, gap });
        }
    }
    let ders = derivative_matrices(g, theta, &direction, flavor)?;
    let ground = &vectors[idx];
    let curvature = ground.dotc(&(&ders.second * ground)).re;
    let slope = &ders.first * ground;
    let mut correction = 0.0;
    for (k, vector) in vectors.iter().enumerate() {
        if k == idx {
            continue;
        }
        let overlap = vector.dotc(&slope);
        correction += overlap.norm_sqr() / (values[k] - values[idx]);
    }
    Ok(curvature - correction)
}

/// Exact effective form at the beginning of the spectrum: the squared
/// norm of the orthogonal projection of the index-slope vector onto the
/// cokernel of the gradient factor at zero.
pub fn form_at_bottom(
    g: &FundamentalGraph,
    direction: &[f64],
    flavor: Flavor,
) -> Result<f64, ComputeError> {
    if direction.len() != g.dimension() {
        return Err(ComputeError::DimensionMismatch {
            expected: g.dimension(),
            found: direction.len(),
        });
    }
    let direction = unit_direction(direction)?;
    let grad = gradient_matrix(g, &Quasimomentum::zero(g.dimension()), flavor)?;
    let svd = grad.matrix().clone().svd(true, false);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let threshold = PROJECTION_RANK_EPS * g.vertex_count() as f64;

    let slopes = DVector::from_fn(g.edge_count(), |e, _| {
        Complex64::new(g.edges()[e].index_dot(&direction), 0.0)
    });
    let mut projected = slopes.clone();
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > threshold {
            let column = u.column(k);
            let coeff = column.dotc(&slopes);
            projected -= DVector::from(column) * coeff;
        }
    }
    Ok(projected.norm_squared() / mass_scale(g, flavor))
}

/// Finite-difference oracle for the effective form: central second
/// differences of the sorted band function, Richardson-extrapolated over
/// steps `h` and `h/2`.
///
/// Independent of the perturbative route; accuracy degrades near
/// degeneracies where the sorted eigenvalue is not twice differentiable.
pub fn form_finite_difference(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    band: usize,
    direction: &[f64],
    step: f64,
    flavor: Flavor,
) -> Result<f64, ComputeError> {
    let idx = band_index(g, band)?;
    if !(step > 0.0 && step <= 0.1) {
        return Err(ComputeError::InvalidStep(step));
    }
    if direction.len() != g.dimension() {
        return Err(ComputeError::DimensionMismatch {
            expected: g.dimension(),
            found: direction.len(),
        });
    }
    let direction = unit_direction(direction)?;
    let sample = |epsilon: f64| -> Result<f64, ComputeError> {
        Ok(fiber_matrix(g, &theta.offset(&direction, epsilon), flavor)?.eigenvalues()[idx])
    };
    let center = sample(0.0)?;
    let second = |h: f64| -> Result<f64, ComputeError> {
        Ok((sample(h)? - 2.0 * center + sample(-h)?) / (h * h))
    };
    let coarse = second(step)?;
    let fine = second(step / 2.0)?;
    Ok(0.5 * (4.0 * fine - coarse) / 3.0)
}

/// Assemble the form matrix by polarization from perturbative evaluations
/// along the axes and the axis bisectors.
pub fn effective_matrix(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    band: usize,
    flavor: Flavor,
) -> Result<EffectiveForm, ComputeError> {
    let evaluate = |direction: &[f64]| form_perturbative(g, theta, band, direction, flavor);
    let matrix = polarize(g.dimension(), evaluate)?;
    Ok(EffectiveForm {
        matrix,
        band,
        location: theta.clone(),
        flavor,
        method: FormMethod::Perturbative,
    })
}

/// Form matrix assembled from the finite-difference oracle.
pub fn effective_matrix_finite_difference(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    band: usize,
    step: f64,
    flavor: Flavor,
) -> Result<EffectiveForm, ComputeError> {
    let evaluate =
        |direction: &[f64]| form_finite_difference(g, theta, band, direction, step, flavor);
    let matrix = polarize(g.dimension(), evaluate)?;
    Ok(EffectiveForm {
        matrix,
        band,
        location: theta.clone(),
        flavor,
        method: FormMethod::FiniteDifference,
    })
}

/// Form matrix at the beginning of the spectrum through the exact
/// projection formula.
pub fn effective_matrix_at_bottom(
    g: &FundamentalGraph,
    flavor: Flavor,
) -> Result<EffectiveForm, ComputeError> {
    let evaluate = |direction: &[f64]| form_at_bottom(g, direction, flavor);
    let matrix = polarize(g.dimension(), evaluate)?;
    Ok(EffectiveForm {
        matrix,
        band: 1,
        location: Quasimomentum::zero(g.dimension()),
        flavor,
        method: FormMethod::BottomExact,
    })
}

fn polarize<F>(d: usize, evaluate: F) -> Result<DMatrix<f64>, ComputeError>
where
    F: Fn(&[f64]) -> Result<f64, ComputeError>,
{
    let mut matrix = DMatrix::zeros(d, d);
    for alpha in 0..d {
        let mut axis = vec![0.0; d];
        axis[alpha] = 1.0;
        matrix[(alpha, alpha)] = evaluate(&axis)?;
    }
    for alpha in 0..d {
        for beta in alpha + 1..d {
            let mut bisector = vec![0.0; d];
            bisector[alpha] = std::f64::consts::FRAC_1_SQRT_2;
            bisector[beta] = std::f64::consts::FRAC_1_SQRT_2;
            let value =
                evaluate(&bisector)? - 0.5 * (matrix[(alpha, alpha)] + matrix[(beta, beta)]);
            matrix[(alpha, beta)] = value;
            matrix[(beta, alpha)] = value;
        }
    }
    Ok(matrix)
}

/// Invert an effective form into a mass tensor. Refuses forms singular at
/// relative tolerance 1e-12.
pub fn mass_tensor(form: &EffectiveForm) -> Result<MassTensor, ComputeError> {
    let eigen = form.matrix.clone().symmetric_eigen();
    let max_abs = eigen
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max);
    let min_abs = eigen
        .eigenvalues
        .iter()
        .map(|v| v.abs())
        .fold(f64::INFINITY, f64::min);
    if max_abs == 0.0 || min_abs <= 1e-12 * max_abs {
        return Err(ComputeError::SingularForm);
    }
    let d = form.dimension();
    let mut matrix = DMatrix::zeros(d, d);
    for k in 0..d {
        let v = eigen.eigenvectors.column(k);
        matrix += (v * v.transpose()) / eigen.eigenvalues[k];
    }
    let mut eigenvalues: Vec<f64> = eigen.eigenvalues.iter().map(|l| 1.0 / l).collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok(MassTensor {
        matrix,
        eigenvalues,
    })
}

/// First and second index moments of the graph: the largest vertex sums
/// of coupling-weighted index norms and half squared norms over oriented
/// edges. Together with the eigenvalue isolation they bound any simple
/// band-edge form.
pub fn index_moments(g: &FundamentalGraph, flavor: Flavor) -> (f64, f64) {
    let n = g.vertex_count();
    let mut first = vec![0.0f64; n];
    let mut second = vec![0.0f64; n];
    for edge in g.edges() {
        let w = coupling(g, flavor, edge.tail, edge.head);
        let norm = edge.index_norm();
        let copies: &[usize] = if edge.is_loop() {
            &[edge.tail, edge.tail]
        } else {
            &[edge.tail, edge.head]
        };
        for &v in copies {
            first[v] += w * norm;
            second[v] += 0.5 * w * norm * norm;
        }
    }
    let max = |xs: &[f64]| xs.iter().cloned().fold(0.0f64, f64::max);
    (max(&first), max(&second))
}

/// Verification record for the band-edge bound
/// `|mu| <= first_moment^2 / spectral_gap + second_moment`.
#[derive(Debug, Clone)]
pub struct EdgeBoundCheck {
    pub band: usize,
    pub first_moment: f64,
    pub second_moment: f64,
    pub spectral_gap: f64,
    pub bound: f64,
    /// Largest |mu| observed over the direction sweep.
    pub max_abs_form: f64,
    /// Smallest signed form value over the sweep; nonnegative at minima,
    /// nonpositive maxima show up through `max_signed_form`.
    pub min_signed_form: f64,
    pub max_signed_form: f64,
    pub sweep: usize,
    pub margin: f64,
}

/// Check the band-edge estimate at a located simple edge over a direction
/// sweep.
pub fn edge_bound(
    g: &FundamentalGraph,
    edge: &BandEdge,
    flavor: Flavor,
    sweep: usize,
) -> Result<EdgeBoundCheck, ComputeError> {
    if !edge.simple {
        return Err(ComputeError::DegenerateEdge {
            band: edge.band,
            gap: edge.spectral_gap,
        });
    }
    let (first_moment, second_moment) = index_moments(g, flavor);
    let bound = if edge.spectral_gap.is_finite() {
        first_moment * first_moment / edge.spectral_gap + second_moment
    } else {
        second_moment
    };
    let directions = sphere_directions(g.dimension(), sweep);
    let sweep = directions.len();
    let values = directions
        .par_iter()
        .map(|direction| form_perturbative(g, &edge.location, edge.band, direction, flavor))
        .collect::<Result<Vec<_>, ComputeError>>()?;
    let mut max_abs = 0.0f64;
    let mut min_signed = f64::INFINITY;
    let mut max_signed = f64::NEG_INFINITY;
    for mu in values {
        max_abs = max_abs.max(mu.abs());
        min_signed = min_signed.min(mu);
        max_signed = max_signed.max(mu);
    }
    Ok(EdgeBoundCheck {
        band: edge.band,
        first_moment,
        second_moment,
        spectral_gap: edge.spectral_gap,
        bound,
        max_abs_form: max_abs,
        min_signed_form: min_signed,
        max_signed_form: max_signed,
        sweep,
        margin: bound - max_abs,
    })
}

/// Verification record for the three-layer bottom estimate
/// `lower <= mu(w) <= projected(w) <= upper` and the per-bridge lower
/// estimate `mu(w) >= per_bridge_scale * <index, w>^2`.
#[derive(Debug, Clone)]
pub struct BottomBoundCheck {
    pub flavor: Flavor,
    pub lower: f64,
    pub upper: f64,
    pub min_form: f64,
    pub max_form: f64,
    /// Largest value of the projected middle expression over the sweep.
    pub max_projected: f64,
    pub sweep: usize,
    /// Slack of `lower <= mu`.
    pub lower_margin: f64,
    /// Slack of `mu <= projected`.
    pub middle_margin: f64,
    /// Slack of `projected <= upper`.
    pub upper_margin: f64,
    /// Slack of the per-bridge estimate, over bridges and directions.
    pub per_bridge_margin: f64,
}

/// Check the bottom-of-spectrum bounds over a direction sweep, evaluating
/// the form through the exact projection formula.
pub fn bottom_bounds(
    g: &FundamentalGraph,
    flavor: Flavor,
    sweep: usize,
) -> Result<BottomBoundCheck, ComputeError> {
    let bridges = g.bridges().expect("graph was validated at construction");
    let scale = mass_scale(g, flavor);
    let nu = g.vertex_count() as f64;
    let d = g.dimension() as f64;
    let lower = bridges.basis_gram_min / (scale * nu * d);
    let upper = bridges.full_gram_max / scale;
    let per_bridge_scale = 1.0 / (scale * nu);

    // Min/max reductions are order-independent, so the parallel sweep
    // stays deterministic.
    let directions = sphere_directions(g.dimension(), sweep);
    let sweep = directions.len();
    let per_direction = directions
        .par_iter()
        .map(|direction| {
            let mu = form_at_bottom(g, direction, flavor)?;
            let projected: f64 = bridges
                .bridge_ids
                .iter()
                .map(|&e| {
                    let slope = g.edges()[e].index_dot(direction);
                    slope * slope
                })
                .sum::<f64>()
                / scale;
            let bridge_slack = bridges
                .bridge_ids
                .iter()
                .map(|&e| {
                    let slope = g.edges()[e].index_dot(direction);
                    mu - per_bridge_scale * slope * slope
                })
                .fold(f64::INFINITY, f64::min);
            Ok((mu, projected, bridge_slack))
        })
        .collect::<Result<Vec<_>, ComputeError>>()?;

    let mut min_form = f64::INFINITY;
    let mut max_form = f64::NEG_INFINITY;
    let mut max_projected = f64::NEG_INFINITY;
    let mut middle_margin = f64::INFINITY;
    let mut per_bridge_margin = f64::INFINITY;
    for (mu, projected, bridge_slack) in per_direction {
        min_form = min_form.min(mu);
        max_form = max_form.max(mu);
        max_projected = max_projected.max(projected);
        middle_margin = middle_margin.min(projected - mu);
        per_bridge_margin = per_bridge_margin.min(bridge_slack);
    }
    Ok(BottomBoundCheck {
        flavor,
        lower,
        upper,
        min_form,
        max_form,
        max_projected,
        sweep,
        lower_margin: min_form - lower,
        middle_margin,
        upper_margin: upper - max_projected,
        per_bridge_margin,
    })
}

/// Verification record for the trace and mass-eigenvalue chains at the
/// bottom of the spectrum.
#[derive(Debug, Clone)]
pub struct TraceBoundCheck {
    pub flavor: Flavor,
    /// `max-norm-bridge index norm squared / (scale * vertex_count)`.
    pub trace_lower: f64,
    /// Sum of squared bridge index norms over the scale.
    pub trace_upper: f64,
    pub trace: f64,
    /// Common upper bound on every mass eigenvalue.
    pub mass_upper: f64,
    /// Common lower bound on every mass eigenvalue.
    pub mass_lower: f64,
    /// Mass eigenvalues sorted descending.
    pub mass_eigenvalues: Vec<f64>,
    pub trace_lower_margin: f64,
    pub trace_upper_margin: f64,
    pub mass_upper_margin: f64,
    pub mass_lower_margin: f64,
}

/// Check the trace bracket and the two-sided mass-eigenvalue chain for a
/// bottom effective form.
pub fn trace_bounds(
    g: &FundamentalGraph,
    bottom_form: &EffectiveForm,
    flavor: Flavor,
) -> Result<TraceBoundCheck, ComputeError> {
    let bridges = g.bridges().expect("graph was validated at construction");
    let scale = mass_scale(g, flavor);
    let nu = g.vertex_count() as f64;
    let d = g.dimension() as f64;
    // The tightest available choice: the bridge with the largest index.
    let best_norm = bridges
        .bridge_ids
        .iter()
        .map(|&e| g.edges()[e].index_norm())
        .fold(0.0f64, f64::max);
    let trace_lower = best_norm * best_norm / (scale * nu);
    let trace_upper = bridges
        .bridge_ids
        .iter()
        .map(|&e| {
            let n = g.edges()[e].index_norm();
            n * n
        })
        .sum::<f64>()
        / scale;
    let trace = bottom_form.trace();
    let mass = mass_tensor(bottom_form)?;
    let mass_upper = scale * nu * d / bridges.basis_gram_min;
    let mass_lower = 1.0 / trace_upper;
    let first = mass.eigenvalues[0];
    let last = *mass.eigenvalues.last().expect("at least one eigenvalue");
    Ok(TraceBoundCheck {
        flavor,
        trace_lower,
        trace_upper,
        trace,
        mass_upper,
        mass_lower,
        mass_eigenvalues: mass.eigenvalues,
        trace_lower_margin: trace - trace_lower,
        trace_upper_margin: trace_upper - trace,
        mass_upper_margin: mass_upper - first,
        mass_lower_margin: last - mass_lower,
    })
}

/// Density-of-states effective mass for three-dimensional graphs:
/// the geometric mean of the mass eigenvalues weighted by a degeneracy
/// factor, with its bracket inherited from the mass chain.
#[derive(Debug, Clone)]
pub struct DosMass {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn density_of_states_mass(
    g: &FundamentalGraph,
    mass: &MassTensor,
    degeneracy: f64,
    flavor: Flavor,
) -> Result<DosMass, ComputeError> {
    if g.dimension() != 3 {
        return Err(ComputeError::DosDimension(g.dimension()));
    }
    if mass.eigenvalues.iter().any(|&m| m <= 0.0) || degeneracy <= 0.0 {
        return Err(ComputeError::NonPositiveMass);
    }
    let bridges = g.bridges().expect("graph was validated at construction");
    let scale = mass_scale(g, flavor);
    let trace_upper = bridges
        .bridge_ids
        .iter()
        .map(|&e| {
            let n = g.edges()[e].index_norm();
            n * n
        })
        .sum::<f64>()
        / scale;
    let product: f64 = mass.eigenvalues.iter().product();
    let value = (degeneracy * degeneracy * product).cbrt();
    let weight = degeneracy.powf(2.0 / 3.0);
    Ok(DosMass {
        value,
        lower: weight / trace_upper,
        upper: weight * scale * g.vertex_count() as f64 * 3.0 / bridges.basis_gram_min,
    })
}

/// Both evaluations of the gradient-space identity for the bottom form in
/// the normalized flavor: the squared norm of the combined first-order
/// edge field, and the difference of the two squared norms it splits
/// into. Each equals the bottom effective form.
pub fn bottom_identity_forms(
    g: &FundamentalGraph,
    direction: &[f64],
) -> Result<(f64, f64), ComputeError> {
    let flavor = Flavor::Normalized;
    let direction = unit_direction(direction)?;
    let zero = Quasimomentum::zero(g.dimension());
    let total = g.total_degree() as f64;
    let ground = DVector::from_fn(g.vertex_count(), |v, _| {
        Complex64::new((g.degree(v) as f64 / total).sqrt(), 0.0)
    });
    let fiber = fiber_matrix(g, &zero, flavor)?;
    let (values, vectors) = fiber.eigenpairs();
    let ders = derivative_matrices(g, &zero, &direction, flavor)?;
    let slope = &ders.first * &ground;
    // First-order eigenvector correction through the reduced resolvent.
    let mut correction = DVector::from_element(g.vertex_count(), Complex64::new(0.0, 0.0));
    for (k, vector) in vectors.iter().enumerate().skip(1) {
        let overlap = vector.dotc(&slope);
        correction -= DVector::from(vector.clone()) * (overlap / Complex64::new(values[k], 0.0));
    }
    let grad = gradient_matrix(g, &zero, flavor)?;
    let edge_slope = &ders.gradient_first * &ground;
    let edge_correction = grad.matrix() * &correction;
    let combined = &edge_slope + &edge_correction;
    let sum_form = combined.norm_squared();
    let difference_form = edge_slope.norm_squared() - edge_correction.norm_squared();
    Ok((sum_form, difference_form))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const AXIS: [f64; 2] = [1.0, 0.0];

    fn zero2() -> Quasimomentum {
        Quasimomentum::zero(2)
    }

    #[test]
    fn graphene_bottom_form_perturbative() {
        let g = fixtures::graphene();
        let mu = form_perturbative(&g, &zero2(), 1, &AXIS, Flavor::Normalized).unwrap();
        assert!((mu - 1.0 / 9.0).abs() < 1e-12, "mu = {mu}");
    }

    #[test]
    fn graphene_bottom_form_exact_projection() {
        let g = fixtures::graphene();
        let mu = form_at_bottom(&g, &AXIS, Flavor::Normalized).unwrap();
        assert!((mu - 1.0 / 9.0).abs() < 1e-12);
        // Closed form of the projected slope vector: the projection
        // subtracts the componentwise mean of (0, w1, w2).
        let w = [0.3f64, -0.95];
        let n = (w[0] * w[0] + w[1] * w[1]).sqrt();
        let (w1, w2) = (w[0] / n, w[1] / n);
        let mean = (w1 + w2) / 3.0;
        let expected = (mean * mean + (w1 - mean).powi(2) + (w2 - mean).powi(2)) / 6.0;
        let mu = form_at_bottom(&g, &w, Flavor::Normalized).unwrap();
        assert!((mu - expected).abs() < 1e-13);
    }

    #[test]
    fn lattice_forms_all_methods() {
        for d in [2usize, 3, 4] {
            let g = fixtures::lattice(d);
            let zero = Quasimomentum::zero(d);
            let mut w = vec![0.0; d];
            w[0] = 0.8;
            w[d - 1] += 0.6;
            let expected = 1.0 / (2.0 * d as f64);
            let pert = form_perturbative(&g, &zero, 1, &w, Flavor::Normalized).unwrap();
            let exact = form_at_bottom(&g, &w, Flavor::Normalized).unwrap();
            let fd = form_finite_difference(&g, &zero, 1, &w, 1e-3, Flavor::Normalized).unwrap();
            assert!((pert - expected).abs() < 1e-12);
            assert!((exact - expected).abs() < 1e-12);
            assert!((fd - expected).abs() < 1e-8);

            let comb = form_at_bottom(&g, &w, Flavor::Combinatorial).unwrap();
            assert!((comb - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stanene_band_two_maximum_form() {
        let g = fixtures::stanene();
        let mu = form_perturbative(&g, &zero2(), 2, &AXIS, Flavor::Normalized).unwrap();
        assert!((mu + 1.0 / 60.0).abs() < 1e-12, "mu = {mu}");
    }

    #[test]
    fn stanene_bottom_finite_difference() {
        let g = fixtures::stanene();
        let mu =
            form_finite_difference(&g, &zero2(), 1, &[0.0, 1.0], 1e-3, Flavor::Normalized).unwrap();
        assert!((mu - 1.0 / 15.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_edge_is_refused() {
        let g = fixtures::graphene();
        let corner = Quasimomentum::new(vec![
            2.0 * std::f64::consts::PI / 3.0,
            -2.0 * std::f64::consts::PI / 3.0,
        ]);
        assert!(matches!(
            form_perturbative(&g, &corner, 1, &AXIS, Flavor::Normalized),
            Err(ComputeError::DegenerateEdge { .. })
        ));
    }

    #[test]
    fn invalid_step_is_refused() {
        let g = fixtures::graphene();
        assert!(matches!(
            form_finite_difference(&g, &zero2(), 1, &AXIS, 0.5, Flavor::Normalized),
            Err(ComputeError::InvalidStep(_))
        ));
    }

    #[test]
    fn graphene_effective_matrix_and_masses() {
        let g = fixtures::graphene();
        let form = effective_matrix(&g, &zero2(), 1, Flavor::Normalized).unwrap();
        let expected =
            DMatrix::from_row_slice(2, 2, &[1.0 / 9.0, -1.0 / 18.0, -1.0 / 18.0, 1.0 / 9.0]);
        assert!((&form.matrix - expected).norm() < 1e-12);
        let eig = form.eigenvalues();
        assert!((eig[0] - 1.0 / 18.0).abs() < 1e-12);
        assert!((eig[1] - 1.0 / 6.0).abs() < 1e-12);
        let mass = mass_tensor(&form).unwrap();
        assert!((mass.eigenvalues[0] - 18.0).abs() < 1e-9);
        assert!((mass.eigenvalues[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn lattice_mass_is_isotropic() {
        let d = 3;
        let g = fixtures::lattice(d);
        let form = effective_matrix_at_bottom(&g, Flavor::Normalized).unwrap();
        let mass = mass_tensor(&form).unwrap();
        for m in &mass.eigenvalues {
            assert!((m - 2.0 * d as f64).abs() < 1e-9);
        }
        assert!((&mass.matrix - DMatrix::identity(d, d) * 2.0 * d as f64).norm() < 1e-9);
    }

    #[test]
    fn singular_form_is_refused() {
        let form = EffectiveForm {
            matrix: DMatrix::zeros(2, 2),
            band: 1,
            location: zero2(),
            flavor: Flavor::Normalized,
            method: FormMethod::Perturbative,
        };
        assert!(matches!(
            mass_tensor(&form),
            Err(ComputeError::SingularForm)
        ));
    }

    #[test]
    fn graphene_index_moments() {
        let g = fixtures::graphene();
        let (first, second) = index_moments(&g, Flavor::Normalized);
        assert!((first - 2.0 / 3.0).abs() < 1e-14);
        assert!((second - 1.0 / 3.0).abs() < 1e-14);
        let (first, second) = index_moments(&g, Flavor::Combinatorial);
        assert!((first - 2.0).abs() < 1e-14);
        assert!((second - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lattice_index_moments() {
        let d = 3;
        let g = fixtures::lattice(d);
        let (first, second) = index_moments(&g, Flavor::Normalized);
        assert!((first - 1.0).abs() < 1e-14);
        assert!((second - 0.5).abs() < 1e-14);
    }

    #[test]
    fn edge_bound_values_at_the_bottom() {
        let g = fixtures::graphene();
        let edge = BandEdge {
            band: 1,
            end: crate::spectrum::EdgeEnd::Minimum,
            location: zero2(),
            paired_location: None,
            value: 0.0,
            simple: true,
            spectral_gap: 2.0,
        };
        let check = edge_bound(&g, &edge, Flavor::Normalized, 360).unwrap();
        assert!((check.bound - 5.0 / 9.0).abs() < 1e-14);
        assert!((check.max_abs_form - 1.0 / 6.0).abs() < 1e-6);
        assert!(check.margin > 0.0);

        let d = 2;
        let g = fixtures::lattice(d);
        let edge = BandEdge {
            band: 1,
            end: crate::spectrum::EdgeEnd::Minimum,
            location: Quasimomentum::zero(d),
            paired_location: None,
            value: 0.0,
            simple: true,
            spectral_gap: f64::INFINITY,
        };
        let check = edge_bound(&g, &edge, Flavor::Normalized, 90).unwrap();
        // An isolated band drops the gap term from the bound.
        assert!((check.bound - 0.5).abs() < 1e-14);
        assert!((check.max_abs_form - 1.0 / (2.0 * d as f64)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_edge_bound_is_refused() {
        let g = fixtures::graphene();
        let edge = BandEdge {
            band: 1,
            end: crate::spectrum::EdgeEnd::Maximum,
            location: zero2(),
            paired_location: None,
            value: 1.0,
            simple: false,
            spectral_gap: 0.0,
        };
        assert!(matches!(
            edge_bound(&g, &edge, Flavor::Normalized, 8),
            Err(ComputeError::DegenerateEdge { .. })
        ));
    }

    #[test]
    fn graphene_bottom_bracket_values() {
        let g = fixtures::graphene();
        let check = bottom_bounds(&g, Flavor::Normalized, 360).unwrap();
        assert!((check.lower - 1.0 / 24.0).abs() < 1e-14);
        assert!((check.upper - 1.0 / 6.0).abs() < 1e-14);
        assert!(check.lower_margin >= 0.0);
        assert!(check.middle_margin >= -1e-12);
        assert!(check.upper_margin >= -1e-12);
        assert!(check.per_bridge_margin >= -1e-12);
        // Extremes of the form over the sweep are the matrix eigenvalues.
        assert!((check.min_form - 1.0 / 18.0).abs() < 1e-6);
        assert!((check.max_form - 1.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn lattice_upper_bound_is_attained() {
        let g = fixtures::lattice(2);
        let check = bottom_bounds(&g, Flavor::Normalized, 64).unwrap();
        assert!((check.lower - 1.0 / 8.0).abs() < 1e-14);
        assert!((check.upper - 0.25).abs() < 1e-14);
        assert!(
            (check.max_form - 0.25).abs() < 1e-12,
            "upper bound is sharp"
        );
        let comb = bottom_bounds(&g, Flavor::Combinatorial, 64).unwrap();
        assert!((comb.max_form - 1.0).abs() < 1e-12);
        assert!((comb.upper - 1.0).abs() < 1e-14);
    }

    #[test]
    fn graphene_trace_chain() {
        let g = fixtures::graphene();
        let form = effective_matrix_at_bottom(&g, Flavor::Normalized).unwrap();
        let check = trace_bounds(&g, &form, Flavor::Normalized).unwrap();
        assert!((check.trace_lower - 1.0 / 12.0).abs() < 1e-14);
        assert!((check.trace_upper - 1.0 / 3.0).abs() < 1e-14);
        assert!((check.trace - 2.0 / 9.0).abs() < 1e-12);
        assert!((check.mass_upper - 24.0).abs() < 1e-12);
        assert!((check.mass_lower - 3.0).abs() < 1e-12);
        for margin in [
            check.trace_lower_margin,
            check.trace_upper_margin,
            check.mass_upper_margin,
            check.mass_lower_margin,
        ] {
            assert!(margin >= -1e-12, "negative margin {margin}");
        }
    }

    #[test]
    fn lattice_trace_upper_is_attained() {
        let g = fixtures::lattice(3);
        let form = effective_matrix_at_bottom(&g, Flavor::Normalized).unwrap();
        let check = trace_bounds(&g, &form, Flavor::Normalized).unwrap();
        assert!((check.trace_lower - 1.0 / 6.0).abs() < 1e-14);
        assert!((check.trace_upper - 0.5).abs() < 1e-14);
        assert!((check.trace - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dos_mass_on_cubic_lattice() {
        let g = fixtures::lattice(3);
        let form = effective_matrix_at_bottom(&g, Flavor::Normalized).unwrap();
        let mass = mass_tensor(&form).unwrap();
        let dos = density_of_states_mass(&g, &mass, 1.0, Flavor::Normalized).unwrap();
        assert!((dos.value - 6.0).abs() < 1e-9);
        assert!(dos.lower <= dos.value && dos.value <= dos.upper);
    }

    #[test]
    fn dos_mass_identity_case() {
        let g = fixtures::lattice(3);
        let mass = MassTensor {
            matrix: DMatrix::identity(3, 3),
            eigenvalues: vec![1.0, 1.0, 1.0],
        };
        let dos = density_of_states_mass(&g, &mass, 1.0, Flavor::Normalized).unwrap();
        assert_eq!(dos.value, 1.0);
    }

    #[test]
    fn dos_mass_requires_dimension_three() {
        let g = fixtures::graphene();
        let form = effective_matrix_at_bottom(&g, Flavor::Normalized).unwrap();
        let mass = mass_tensor(&form).unwrap();
        assert!(matches!(
            density_of_states_mass(&g, &mass, 1.0, Flavor::Normalized),
            Err(ComputeError::DosDimension(2))
        ));
    }

    #[test]
    fn identity_forms_match_bottom_form() {
        for (_, g) in fixtures::standard_set() {
            let d = g.dimension();
            let mut w = vec![0.4; d];
            w[0] = -0.7;
            let mu = form_at_bottom(&g, &w, Flavor::Normalized).unwrap();
            let (sum_form, difference_form) = bottom_identity_forms(&g, &w).unwrap();
            assert!((sum_form - mu).abs() < 1e-10, "sum form");
            assert!((difference_form - mu).abs() < 1e-10, "difference form");
        }
    }

    #[test]
    fn form_is_even_in_direction() {
        let g = fixtures::stanene();
        for w in [[0.9, -0.1], [0.2, 0.5]] {
            let plus = form_at_bottom(&g, &w, Flavor::Normalized).unwrap();
            let minus = form_at_bottom(&g, &[-w[0], -w[1]], Flavor::Normalized).unwrap();
            assert_eq!(plus, minus);
        }
    }
}
