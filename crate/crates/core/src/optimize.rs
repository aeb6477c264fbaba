//! Derivative-free local minimization used to polish band-edge locations.
//!
//! Sorted eigenvalue curves are continuous but only piecewise smooth
//! (band crossings introduce kinks and extrema can sit on conical points),
//! so a Nelder--Mead simplex is used instead of anything gradient-based.

/// Minimize `f` from `start`, with an initial simplex of the given scale.
/// Stops once the simplex diameter falls below `diameter_tol` or after
/// `max_iter` iterations. Returns the best point and value seen.
pub(crate) fn nelder_mead<F>(
    f: F,
    start: &[f64],
    scale: f64,
    diameter_tol: f64,
    max_iter: usize,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(start.to_vec());
    for j in 0..dim {
        let mut p = start.to_vec();
        p[j] += scale;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < diameter_tol {
            break;
        }

        // Centroid of all points but the worst.
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();

        let reflected = affine(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = affine(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let contracted = if fr < values[dim] {
                affine(&centroid, &worst, -0.5)
            } else {
                affine(&centroid, &worst, 0.5)
            };
            let fc = f(&contracted);
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                // Shrink toward the best point.
                let best = simplex[0].clone();
                for i in 1..=dim {
                    for j in 0..dim {
                        simplex[i][j] = best[j] + 0.5 * (simplex[i][j] - best[j]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=dim {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best].clone(), values[best])
}

/// Point `centroid + t * (worst - centroid)`.
fn affine(centroid: &[f64], worst: &[f64], t: f64) -> Vec<f64> {
    centroid
        .iter()
        .zip(worst)
        .map(|(&c, &w)| c + t * (w - c))
        .collect()
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut max = 0.0f64;
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            let dist = simplex[i]
                .iter()
                .zip(&simplex[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            max = max.max(dist);
        }
    }
    max
}
