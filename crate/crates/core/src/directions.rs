//! Deterministic direction sweeps on the unit sphere, used to verify the
//! effective-form bounds. Coverage matters more than optimization here, so
//! the sweeps are fixed quasi-uniform point sets.

/// Default sweep size per dimension: a full degree circle in the plane,
/// a low-discrepancy set above.
pub fn default_sweep(dimension: usize) -> usize {
    if dimension <= 2 {
        360
    } else {
        512
    }
}

/// `count` unit directions in dimension `d`.
///
/// In the plane these are uniformly spaced angles. For d >= 3 a Kronecker
/// low-discrepancy sequence is pushed through the inverse normal CDF and
/// normalized, which distributes points quasi-uniformly over the sphere.
pub fn sphere_directions(d: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(d >= 1);
    if d == 1 {
        return vec![vec![1.0]];
    }
    if d == 2 {
        return (0..count)
            .map(|k| {
                let angle = std::f64::consts::TAU * k as f64 / count as f64;
                vec![angle.cos(), angle.sin()]
            })
            .collect();
    }
    // Kronecker sequence with the generalized golden-ratio base.
    let mut phi = 1.0f64;
    for _ in 0..32 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=d)
        .map(|j| (1.0 / phi.powi(j as i32)).fract())
        .collect();
    (0..count)
        .map(|k| {
            let mut v: Vec<f64> = alphas
                .iter()
                .map(|&a| {
                    let u = (0.5 + a * (k as f64 + 1.0)).fract();
                    inverse_normal_cdf(u.clamp(1e-9, 1.0 - 1e-9))
                })
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for x in v.iter_mut() {
                *x /= norm;
            }
            v
        })
        .collect()
}

/// Acklam's rational approximation of the standard normal quantile,
/// accurate to about 1e-9 — far more than sweep coverage needs.
fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.50662827745924e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -inverse_normal_cdf(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_deterministic() {
        for d in [2usize, 3, 4] {
            let a = sphere_directions(d, 64);
            let b = sphere_directions(d, 64);
            assert_eq!(a, b);
            for v in &a {
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn planar_sweep_starts_on_first_axis() {
        let dirs = sphere_directions(2, 360);
        assert!((dirs[0][0] - 1.0).abs() < 1e-15);
        assert!(dirs[0][1].abs() < 1e-15);
    }

    #[test]
    fn quantile_matches_known_values() {
        assert!(inverse_normal_cdf(0.5).abs() < 1e-12);
        assert!((inverse_normal_cdf(0.975) - 1.959963984540054).abs() < 1e-7);
    }
}
