//! Band structures over the quasimomentum torus: grid sampling, band
//! intervals, flat bands, gaps and refined band edges.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::ComputeError;
use crate::floquet::{fiber_matrix, Flavor, Quasimomentum};
use crate::graph::FundamentalGraph;
use crate::optimize::nelder_mead;

/// Bands whose sampled spread stays below this are reported flat.
pub const FLAT_TOL: f64 = 1e-8;
/// Eigenvalue gap below which a located edge is considered degenerate.
pub const SIMPLE_TOL: f64 = 1e-8;
/// Refined intervals closer than this are merged when computing gaps, so
/// touching bands do not produce spurious gaps.
pub const GAP_MERGE_TOL: f64 = 1e-6;
/// Components of a refined extremizer this close to zero snap to exact
/// zero, where the bottom-of-spectrum formulas apply. The simplex stalls
/// against eigenvalue noise about 1e-8 away from a smooth extremum, so
/// the window is wider than that; the snap is only kept when it does not
/// worsen the objective.
const SNAP_TOL: f64 = 1e-6;
/// Simplex termination diameter for edge refinement.
const REFINE_TOL: f64 = 1e-10;

/// Default sampling resolution per torus axis.
pub fn default_grid(dimension: usize) -> usize {
    match dimension {
        0..=2 => 64,
        3 => 24,
        _ => 12,
    }
}

/// Eigenvalue samples of a fiber family over a uniform torus grid.
///
/// Points run in lexicographic order over the grid indices (first axis
/// slowest), and each sample holds the eigenvalues sorted ascending, so the
/// whole structure is deterministic for a fixed resolution.
#[derive(Debug, Clone)]
pub struct BandStructure {
    flavor: Flavor,
    dimension: usize,
    grid: usize,
    points: Vec<Vec<f64>>,
    samples: Vec<Vec<f64>>,
    intervals: Vec<(f64, f64)>,
}

impl BandStructure {
    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn band_count(&self) -> usize {
        self.intervals.len()
    }

    /// Sampled (unrefined) band intervals.
    pub fn sampled_intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Grid point with the smallest (or largest) sample of one band.
    fn best_point(&self, band: usize, end: EdgeEnd) -> &[f64] {
        let mut best = 0usize;
        for (i, sample) in self.samples.iter().enumerate() {
            let better = match end {
                EdgeEnd::Minimum => sample[band] < self.samples[best][band],
                EdgeEnd::Maximum => sample[band] > self.samples[best][band],
            };
            if better {
                best = i;
            }
        }
        &self.points[best]
    }
}

/// Sample all band functions of `g` on an `n`-per-axis torus grid.
pub fn band_structure(
    g: &FundamentalGraph,
    n: usize,
    flavor: Flavor,
) -> Result<BandStructure, ComputeError> {
    if n < 8 {
        return Err(ComputeError::GridTooCoarse(n));
    }
    let d = g.dimension();
    let total = n.pow(d as u32);
    let step = std::f64::consts::TAU / n as f64;
    let points: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            let mut coords = vec![0.0; d];
            for alpha in (0..d).rev() {
                let k = idx % n;
                idx /= n;
                coords[alpha] = -std::f64::consts::PI + step * k as f64;
            }
            coords
        })
        .collect();
    let samples: Vec<Vec<f64>> = points
        .par_iter()
        .map(|coords| {
            fiber_matrix(g, &Quasimomentum::new(coords.clone()), flavor)
                .expect("grid point has the graph dimension")
                .eigenvalues()
        })
        .collect();
    let bands = g.vertex_count();
    let intervals = (0..bands)
        .map(|b| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for sample in &samples {
                lo = lo.min(sample[b]);
                hi = hi.max(sample[b]);
            }
            (lo, hi)
        })
        .collect();
    Ok(BandStructure {
        flavor,
        dimension: d,
        grid: n,
        points,
        samples,
        intervals,
    })
}

/// A flat band: a band function constant over the torus.
#[derive(Debug, Clone, Serialize)]
pub struct FlatBand {
    /// 1-based band number.
    pub band: usize,
    pub value: f64,
}

/// Bands whose sampled spread is below `tol`.
pub fn flat_bands(bs: &BandStructure, tol: f64) -> Vec<FlatBand> {
    bs.sampled_intervals()
        .iter()
        .enumerate()
        .filter(|(_, (lo, hi))| hi - lo < tol)
        .map(|(b, (lo, hi))| FlatBand {
            band: b + 1,
            value: 0.5 * (lo + hi),
        })
        .collect()
}

/// Which end of a band an edge refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeEnd {
    Minimum,
    Maximum,
}

impl std::fmt::Display for EdgeEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdgeEnd::Minimum => write!(f, "min"),
            EdgeEnd::Maximum => write!(f, "max"),
        }
    }
}

/// A located band edge: the refined extremizer of one end of a band
/// function, with its eigenvalue isolation data.
#[derive(Debug, Clone)]
pub struct BandEdge {
    /// 1-based band number.
    pub band: usize,
    pub end: EdgeEnd,
    /// Refined extremizer, canonicalized, with near-zero components
    /// snapped to exact zero.
    pub location: Quasimomentum,
    /// The mirrored extremizer when it is a distinct torus point; band
    /// functions are even in the quasimomentum, so it always carries the
    /// same value.
    pub paired_location: Option<Quasimomentum>,
    pub value: f64,
    /// Whether the eigenvalue is simple at the located point.
    pub simple: bool,
    /// Distance from the edge eigenvalue to the rest of the fiber
    /// spectrum; infinite for one-band graphs.
    pub spectral_gap: f64,
}

/// Locate one end of a band by grid search plus simplex refinement.
///
/// `band` is 1-based. Flat bands are refused: they have no isolated
/// extremizer. Degenerate edges are still reported, flagged `simple:
/// false`, and downstream effective-mass operations refuse them.
pub fn locate_band_edge(
    g: &FundamentalGraph,
    bs: &BandStructure,
    band: usize,
    end: EdgeEnd,
) -> Result<BandEdge, ComputeError> {
    let count = bs.band_count();
    if band == 0 || band > count {
        return Err(ComputeError::BandOutOfRange { band, count });
    }
    let idx = band - 1;
    let (lo, hi) = bs.sampled_intervals()[idx];
    if hi - lo < FLAT_TOL {
        return Err(ComputeError::FlatBand(band));
    }
    let flavor = bs.flavor();
    let sign = match end {
        EdgeEnd::Minimum => 1.0,
        EdgeEnd::Maximum => -1.0,
    };
    let objective = |coords: &[f64]| {
        sign * fiber_matrix(g, &Quasimomentum::new(coords.to_vec()), flavor)
            .expect("matching dimension")
            .eigenvalues()[idx]
    };
    let start = bs.best_point(idx, end);
    let scale = std::f64::consts::PI / bs.grid() as f64;
    let (refined, refined_value) = nelder_mead(objective, start, scale, REFINE_TOL, 4000);
    let snapped: Vec<f64> = refined
        .iter()
        .map(|&x| if x.abs() < SNAP_TOL { 0.0 } else { x })
        .collect();
    let location = if snapped != refined && objective(&snapped) <= refined_value + 1e-12 {
        Quasimomentum::new(snapped)
    } else {
        Quasimomentum::new(refined)
    };

    let eigenvalues = fiber_matrix(g, &location, flavor)?.eigenvalues();
    let value = eigenvalues[idx];
    let gap = isolation(&eigenvalues, idx);
    let paired = {
        let mirrored = location.negated();
        // Distance on the torus: components at opposite boundary points
        // describe one and the same extremizer.
        let distinct = mirrored
            .components()
            .iter()
            .zip(location.components())
            .any(|(a, b)| {
                let diff = (a - b).rem_euclid(std::f64::consts::TAU);
                diff.min(std::f64::consts::TAU - diff) > SNAP_TOL
            });
        distinct.then_some(mirrored)
    };
    Ok(BandEdge {
        band,
        end,
        location,
        paired_location: paired,
        value,
        simple: gap >= SIMPLE_TOL,
        spectral_gap: gap,
    })
}

fn isolation(eigenvalues: &[f64], idx: usize) -> f64 {
    let mut gap = f64::INFINITY;
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        if k != idx {
            gap = gap.min((lambda - eigenvalues[idx]).abs());
        }
    }
    gap
}

/// Distance from the `band`-th eigenvalue of the fiber at `theta` to the
/// rest of its spectrum. Errors when that eigenvalue is degenerate;
/// returns infinity for one-band graphs.
pub fn spectral_distance(
    g: &FundamentalGraph,
    theta: &Quasimomentum,
    band: usize,
    flavor: Flavor,
) -> Result<f64, ComputeError> {
    let count = g.vertex_count();
    if band == 0 || band > count {
        return Err(ComputeError::BandOutOfRange { band, count });
    }
    let eigenvalues = fiber_matrix(g, theta, flavor)?.eigenvalues();
    let gap = isolation(&eigenvalues, band - 1);
    if gap < SIMPLE_TOL {
        return Err(ComputeError::DegenerateEdge { band, gap });
    }
    Ok(gap)
}

/// One band of a refined report: either a flat value or a polished
/// interval with both located edges.
#[derive(Debug, Clone)]
pub struct BandSummary {
    /// 1-based band number.
    pub band: usize,
    pub interval: (f64, f64),
    pub flat_value: Option<f64>,
    pub edges: Vec<BandEdge>,
}

/// Band intervals after edge refinement, plus flat bands and gaps.
#[derive(Debug, Clone)]
pub struct BandReport {
    pub flavor: Flavor,
    pub grid: usize,
    pub bands: Vec<BandSummary>,
    /// Open intervals between merged band clusters.
    pub gaps: Vec<(f64, f64)>,
}

impl BandReport {
    pub fn flat_bands(&self) -> Vec<FlatBand> {
        self.bands
            .iter()
            .filter_map(|b| {
                b.flat_value.map(|value| FlatBand {
                    band: b.band,
                    value,
                })
            })
            .collect()
    }

    pub fn edge(&self, band: usize, end: EdgeEnd) -> Option<&BandEdge> {
        self.bands
            .iter()
            .find(|b| b.band == band)?
            .edges
            .iter()
            .find(|e| e.end == end)
    }
}

/// Refine every non-flat band's two edges and derive gaps from the
/// polished intervals. Grid sampling alone overestimates touching-band
/// separations by the grid spacing, so gap detection works on refined
/// endpoints and merges intervals closer than `GAP_MERGE_TOL`.
pub fn band_report(g: &FundamentalGraph, bs: &BandStructure) -> Result<BandReport, ComputeError> {
    let mut bands = Vec::with_capacity(bs.band_count());
    for band in 1..=bs.band_count() {
        let (lo, hi) = bs.sampled_intervals()[band - 1];
        if hi - lo < FLAT_TOL {
            bands.push(BandSummary {
                band,
                interval: (0.5 * (lo + hi), 0.5 * (lo + hi)),
                flat_value: Some(0.5 * (lo + hi)),
                edges: Vec::new(),
            });
            continue;
        }
        let min_edge = locate_band_edge(g, bs, band, EdgeEnd::Minimum)?;
        let max_edge = locate_band_edge(g, bs, band, EdgeEnd::Maximum)?;
        bands.push(BandSummary {
            band,
            interval: (min_edge.value, max_edge.value),
            flat_value: None,
            edges: vec![min_edge, max_edge],
        });
    }

    let mut intervals: Vec<(f64, f64)> = bands.iter().map(|b| b.interval).collect();
    intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite endpoints"));
    let mut gaps = Vec::new();
    let mut current_hi = f64::NEG_INFINITY;
    for (lo, hi) in intervals {
        if current_hi.is_finite() && lo - current_hi > GAP_MERGE_TOL {
            gaps.push((current_hi, lo));
        }
        current_hi = current_hi.max(hi);
    }
    Ok(BandReport {
        flavor: bs.flavor(),
        grid: bs.grid(),
        bands,
        gaps,
    })
}
