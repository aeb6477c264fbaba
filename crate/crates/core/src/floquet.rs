//! Fiber matrices of periodic graph Laplacians.
//!
//! For each quasimomentum on the torus the Laplacian restricts to a small
//! Hermitian matrix indexed by fundamental-graph vertices. This module
//! assembles those matrices for the normalized and combinatorial flavors,
//! the vertex-to-edge gradient factor whose adjoint product reproduces
//! them, and the exact first and second directional derivatives used by
//! perturbation theory.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::ComputeError;
use crate::graph::FundamentalGraph;
use crate::linalg;

/// Which Laplacian the fiber matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// Degree-normalized Laplacian; spectrum inside [0, 2].
    Normalized,
    /// Combinatorial Laplacian (degree matrix minus adjacency).
    Combinatorial,
}

impl std::fmt::Display for Flavor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Flavor::Normalized => write!(f, "normalized"),
            Flavor::Combinatorial => write!(f, "combinatorial"),
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normalized" => Ok(Flavor::Normalized),
            "combinatorial" => Ok(Flavor::Combinatorial),
            other => Err(format!(
                "unknown flavor `{other}` (expected `normalized` or `combinatorial`)"
            )),
        }
    }
}

/// A point of the quasimomentum torus, canonicalized componentwise to
/// [-pi, pi).
///
/// Canonicalization uses the exact floating-point remainder, so it adds no
/// rounding error of its own and is idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct Quasimomentum {
    components: Vec<f64>,
}

impl Quasimomentum {
    pub fn new(components: Vec<f64>) -> Self {
        Quasimomentum {
            components: components.into_iter().map(canonicalize).collect(),
        }
    }

    pub fn zero(dimension: usize) -> Self {
        Quasimomentum {
            components: vec![0.0; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Exact comparison against the canonical zero. The rank drop of the
    /// gradient factor happens only at the true zero, so no tolerance is
    /// applied here.
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|&x| x == 0.0)
    }

    pub fn negated(&self) -> Self {
        Quasimomentum::new(self.components.iter().map(|&x| -x).collect())
    }

    /// Offset by `epsilon * direction`, re-canonicalized.
    pub fn offset(&self, direction: &[f64], epsilon: f64) -> Self {
        assert_eq!(direction.len(), self.components.len());
        Quasimomentum::new(
            self.components
                .iter()
                .zip(direction)
                .map(|(&t, &w)| t + epsilon * w)
                .collect(),
        )
    }
}

fn canonicalize(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= PI {
        r - TAU
    } else {
        r
    }
}

/// Hermitian fiber matrix of a periodic Laplacian at one quasimomentum.
#[derive(Debug, Clone)]
pub struct FiberMatrix {
    matrix: DMatrix<Complex64>,
    flavor: Flavor,
}

impl FiberMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Band values at this fiber: eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn eigenpairs(&self) -> (Vec<f64>, Vec<DVector<Complex64>>) {
        linalg::hermitian_eigenpairs(&self.matrix)
    }
}

/// Rectangular gradient factor: rows indexed by undirected edges in input
/// order, columns by vertices. Its adjoint times itself reproduces the
/// fiber matrix of the same flavor.
#[derive(Debug, Clone)]
pub struct GradientMatrix {
    matrix: DMatrix<Complex64>,
    flavor: Flavor,
}

impl GradientMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    /// Numerical rank with the crate-wide threshold `1e-9 * vertex_count`.
    pub fn rank(&self) -> usize {
        let threshold = 1e-9 * self.matrix.ncols() as f64;
        linalg::numerical_rank(&self.matrix, threshold)
    }
}

fn check_dimension(g: &FundamentalGraph, theta: &Quasimomentum) -> Result<(), ComputeError> {
    if theta.dimension() != g.dimension() {
        return Err(ComputeError::DimensionMismatch {
            expected: g.dimension(),
            found: theta.dimension(),
        });
    }
    Ok(())
}

fn index_phase(index: &[i64], theta: &[f64]) -> f64 {
    index.iter().zip(theta).map(|(&c, &t)| c as f64 * t).sum()
}

fn index_dot(index: &[i64], direction: &[f64]) -> f64 {
    index
        .iter()
        .zip(direction)
        .map(|(&c, &w)| c as f64 * w)
        .sum()
}

/// Coupling weight between two vertices: inverse square-rooted degrees in
/// the normalized flavor, one in the combinatorial flavor.
fn coupling(g: &FundamentalGraph, flavor: Flavor, u: usize, v: usize) -> f64 {
    match flavor {
        Flavor::Normalized => 1.0 / ((g.degree(u) * g.degree(v)) as f64).sqrt(),
        Flavor::Combinatorial => 1.0,
    }
}

/// Assemble the fiber matrix at `theta`.
///
/// Entry (u, v) sums `-w(u,v) e^{i <tau, theta>}` over oriented edges from
/// u to v; the diagonal carries the degree term, with both oriented copies
/// of each loop contributing. Hermitian by construction.
pub fn fiber_matrix(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    flavor: Flavor,
) -> Result<FiberMatrix, ComputeError> {
    check_dimension(g, theta)?;
    let n = g.vertex_count();
    let mut m = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            match flavor {
                Flavor::Normalized => Complex64::new(1.0, 0.0),
                Flavor::Combinatorial => Complex64::new(g.degree(i) as f64, 0.0),
            }
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    for edge in g.edges() {
        let w = coupling(g, flavor, edge.tail, edge.head);
        let phase = index_phase(&edge.index, theta.components());
        if edge.is_loop() {
            // Both orientations together contribute 2 cos to the diagonal.
            m[(edge.tail, edge.tail)] -= Complex64::new(2.0 * w * phase.cos(), 0.0);
        } else {
            let z = Complex64::from_polar(w, phase);
            m[(edge.tail, edge.head)] -= z;
            m[(edge.head, edge.tail)] -= z.conj();
        }
    }
    Ok(FiberMatrix { matrix: m, flavor })
}

/// Gradient factor at `theta`: the entry for edge e and vertex v is
/// `s_v e^{i <tau, theta>}` at the terminal vertex, `-s_v` at the initial
/// vertex and `s_v (e^{i <tau, theta>} - 1)` for a loop, where `s_v` is
/// `1/sqrt(degree)` in the normalized flavor and 1 in the combinatorial
/// one.
pub fn gradient_matrix(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    flavor: Flavor,
) -> Result<GradientMatrix, ComputeError> {
    check_dimension(g, theta)?;
    let scale = |v: usize| match flavor {
        Flavor::Normalized => 1.0 / (g.degree(v) as f64).sqrt(),
        Flavor::Combinatorial => 1.0,
    };
    let mut m = DMatrix::zeros(g.edge_count(), g.vertex_count());
    for (e, edge) in g.edges().iter().enumerate() {
        let phase = index_phase(&edge.index, theta.components());
        if edge.is_loop() {
            m[(e, edge.tail)] = (Complex64::from_polar(1.0, phase) - Complex64::new(1.0, 0.0))
                * Complex64::new(scale(edge.tail), 0.0);
        } else {
            m[(e, edge.head)] = Complex64::from_polar(scale(edge.head), phase);
            m[(e, edge.tail)] = Complex64::new(-scale(edge.tail), 0.0);
        }
    }
    Ok(GradientMatrix { matrix: m, flavor })
}

/// Exact directional derivatives of the fiber and gradient matrices at a
/// reference quasimomentum: the first and halved second derivative of the
/// fiber along `direction`, and the first derivative of the gradient
/// factor.
#[derive(Debug, Clone)]
pub struct DerivativeMatrices {
    /// d/de of the fiber matrix at e = 0; Hermitian.
    pub first: DMatrix<Complex64>,
    /// (1/2) d^2/de^2 of the fiber matrix at e = 0; Hermitian.
    pub second: DMatrix<Complex64>,
    /// d/de of the gradient factor at e = 0.
    pub gradient_first: DMatrix<Complex64>,
}

pub fn derivative_matrices(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    direction: &[f64],
    flavor: Flavor,
) -> Result<DerivativeMatrices, ComputeError> {
    check_dimension(g, theta)?;
    if direction.len() != g.dimension() {
        return Err(ComputeError::DimensionMismatch {
            expected: g.dimension(),
            found: direction.len(),
        });
    }
    let n = g.vertex_count();
    let mut first = DMatrix::zeros(n, n);
    let mut second = DMatrix::zeros(n, n);
    let mut gradient_first = DMatrix::zeros(g.edge_count(), n);
    for (e, edge) in g.edges().iter().enumerate() {
        let w = coupling(g, flavor, edge.tail, edge.head);
        let phase = index_phase(&edge.index, theta.components());
        let slope = index_dot(&edge.index, direction);
        let grad_scale = match flavor {
            Flavor::Normalized => 1.0 / (g.degree(edge.head) as f64).sqrt(),
            Flavor::Combinatorial => 1.0,
        };
        if edge.is_loop() {
            // The two oriented copies combine to real diagonal terms.
            first[(edge.tail, edge.tail)] += Complex64::new(2.0 * w * slope * phase.sin(), 0.0);
            second[(edge.tail, edge.tail)] += Complex64::new(w * slope * slope * phase.cos(), 0.0);
            gradient_first[(e, edge.tail)] =
                Complex64::i() * slope * Complex64::from_polar(grad_scale, phase);
        } else {
            let z1 = -Complex64::i() * slope * Complex64::from_polar(w, phase);
            first[(edge.tail, edge.head)] += z1;
            first[(edge.head, edge.tail)] += z1.conj();
            let z2 = Complex64::from_polar(0.5 * w * slope * slope, phase);
            second[(edge.tail, edge.head)] += z2;
            second[(edge.head, edge.tail)] += z2.conj();
            gradient_first[(e, edge.head)] =
                Complex64::i() * slope * Complex64::from_polar(grad_scale, phase);
        }
    }
    Ok(DerivativeMatrices {
        first,
        second,
        gradient_first,
    })
}

/// Frobenius residual of the change-of-vertex-set identity: conjugating
/// the fiber matrix by the diagonal phase matrix of the shifts must
/// reproduce the fiber matrix of the re-indexed graph.
pub fn unitary_equivalence_residual(
    g: &FundamentalGraph,
    shifts: &[Vec<i64>],
    theta: &Quasimomentum,
    flavor: Flavor,
) -> Result<f64, ComputeError> {
    let original = fiber_matrix(g, theta, flavor)?;
    let shifted_graph = g.normalize_indices(shifts);
    let shifted = fiber_matrix(&shifted_graph, theta, flavor)?;
    let n = g.vertex_count();
    let phases: Vec<Complex64> = (0..n)
        .map(|v| Complex64::from_polar(1.0, index_phase(&shifts[v], theta.components())))
        .collect();
    let conjugated = DMatrix::from_fn(n, n, |i, j| {
        phases[i] * original.matrix()[(i, j)] * phases[j].conj()
    });
    Ok((conjugated - shifted.matrix()).norm())
}
