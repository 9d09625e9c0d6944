//! Quadrature, interpolation and difference helpers on uniform grids.

use crate::C64;

/// Trapezoid rule on uniformly spaced samples.
pub fn trapezoid_uniform(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

/// Discrete L² norm of complex samples on a uniform grid.
pub fn l2_norm(values: &[C64], h: f64) -> f64 {
    l2_norm_sq(values, h).sqrt()
}

pub fn l2_norm_sq(values: &[C64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
            h * (total - 0.5 * (values[0].norm_sqr() + values[n - 1].norm_sqr()))
        }
    }
}

/// `∫ conj(a) b` on a uniform grid.
pub fn inner(a: &[C64], b: &[C64], h: f64) -> C64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return C64::new(0.0, 0.0);
    }
    let total: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    (total - 0.5 * (a[0].conj() * b[0] + a[n - 1].conj() * b[n - 1])) * h
}

/// Integral over `[a, b]` of the piecewise-linear interpolant through
/// `(times[k], values[k])`. `times` must be increasing and cover `[a, b]`.
pub fn trapezoid_between(times: &[f64], values: &[f64], a: f64, b: f64) -> f64 {
    assert_eq!(times.len(), values.len());
    if b <= a || times.len() < 2 {
        return 0.0;
    }
    let interp = |k: usize, t: f64| {
        let w = (t - times[k]) / (times[k + 1] - times[k]);
        values[k] + w * (values[k + 1] - values[k])
    };
    let mut sum = 0.0;
    for k in 0..times.len() - 1 {
        let (lo, hi) = (times[k].max(a), times[k + 1].min(b));
        if hi <= lo {
            continue;
        }
        sum += 0.5 * (hi - lo) * (interp(k, lo) + interp(k, hi));
    }
    sum
}

/// Least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Four-point Lagrange interpolation of samples `values[i]` at `origin + i h`.
/// Zero outside `[origin, origin + (n - 1) h]`.
pub fn cubic_at(values: &[C64], origin: f64, h: f64, x: f64) -> C64 {
    let n = values.len();
    let u = (x - origin) / h;
    if n < 4 || !(u >= -1e-9 && u <= (n - 1) as f64 + 1e-9) {
        return C64::new(0.0, 0.0);
    }
    // stencil start k with k..k+3 inside the grid and u in [k+1, k+2] where possible
    let k = (u.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = u - k as f64;
    let w = [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ];
    values[k] * w[0] + values[k + 1] * w[1] + values[k + 2] * w[2] + values[k + 3] * w[3]
}

/// Second difference `f''` with central stencils inside and the one-sided
/// second-order stencil `(2, -5, 4, -1) / h²` at both ends. Needs four samples.
pub fn second_difference(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    assert!(n >= 4, "second difference needs at least four samples");
    let inv = 1.0 / (h * h);
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        out[i] = (values[i - 1] - values[i] * 2.0 + values[i + 1]) * inv;
    }
    out[0] = (values[0] * 2.0 - values[1] * 5.0 + values[2] * 4.0 - values[3]) * inv;
    out[n - 1] = (values[n - 1] * 2.0 - values[n - 2] * 5.0 + values[n - 3] * 4.0 - values[n - 4]) * inv;
    out
}

/// First difference with central stencils inside and second-order one-sided ends.
pub fn first_difference(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    assert!(n >= 3, "first difference needs at least three samples");
    let inv = 0.5 / h;
    let mut out = vec![C64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv;
    }
    out[0] = (values[0] * -3.0 + values[1] * 4.0 - values[2]) * inv;
    out[n - 1] = (values[n - 1] * 3.0 - values[n - 2] * 4.0 + values[n - 3]) * inv;
    out
}
