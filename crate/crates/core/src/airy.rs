//! Airy function Ai, its derivative, and the negative-axis zeros.
//!
//! Evaluation is split by argument:
//!
//! | range            | method                                                   |
//! |------------------|----------------------------------------------------------|
//! | `z < -8`         | modulus/phase asymptotic expansion                       |
//! | `-8 ≤ z ≤ 0`     | Taylor re-expansion about anchors spaced 1/4 apart       |
//! | `0 < z ≤ 2`      | Maclaurin series                                         |
//! | `2 < z ≤ 8`      | `K_{1/3}`, `K_{2/3}` integrals by the trapezoid rule     |
//! | `z > 8`          | exponentially scaled asymptotic expansion                |
//!
//! The anchors are produced once by stepping the Airy equation from `z = 0`
//! with local Taylor series, which is neutrally stable on the oscillatory
//! side. On the decaying side forward stepping would amplify the growing
//! solution, so the integral representation takes over instead.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ai(0) = 3^(-2/3) / Γ(2/3).
pub const AI_ZERO: f64 = 0.355_028_053_887_817_24;
/// Ai′(0) = -3^(-1/3) / Γ(1/3).
pub const AIP_ZERO: f64 = -0.258_819_403_792_806_8;

/// Largest mode index accepted by [`zero`] and [`mode`].
pub const MAX_ZERO_INDEX: usize = 50;

pub(crate) const SERIES_LIMIT: f64 = 2.0;
pub(crate) const ASYMPTOTIC_LIMIT: f64 = 8.0;
const ANCHOR_STEP: f64 = 0.25;
const ANCHOR_COUNT: usize = 32;
const OVERFLOW_LIMIT: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AirySample {
    pub z: f64,
    pub ai: f64,
    pub aip: f64,
}

/// One incoming whispering-gallery mode: index, Airy zero and the
/// normalization that makes the incoming wave unit-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryMode {
    pub j: usize,
    pub nu: f64,
    pub d: f64,
}

/// Evaluate Ai(z) and Ai′(z).
pub fn eval_ai(z: f64) -> Result<AirySample> {
    if !z.is_finite() {
        return Err(Error::NonFinite(z));
    }
    if z < OVERFLOW_LIMIT {
        return Err(Error::Overflow(z));
    }
    let (ai, aip) = airy_pair(z);
    Ok(AirySample { z, ai, aip })
}

/// Unchecked `(Ai(z), Ai′(z))`. Returns NaN for non-finite input.
pub fn airy_pair(z: f64) -> (f64, f64) {
    if !z.is_finite() {
        return (f64::NAN, f64::NAN);
    }
    if z < -ASYMPTOTIC_LIMIT {
        oscillatory_asymptotic(-z)
    } else if z <= 0.0 {
        let anchors = anchors();
        let k = ((-z / ANCHOR_STEP).round() as usize).min(ANCHOR_COUNT);
        let (y, yp) = anchors[k];
        taylor_step(-(k as f64) * ANCHOR_STEP, y, yp, z + k as f64 * ANCHOR_STEP)
    } else if z <= SERIES_LIMIT {
        taylor_step(0.0, AI_ZERO, AIP_ZERO, z)
    } else if z <= ASYMPTOTIC_LIMIT {
        bessel_integral(z)
    } else {
        decaying_asymptotic(z)
    }
}

/// Ai(z) alone; see [`airy_pair`].
pub fn ai(z: f64) -> f64 {
    airy_pair(z).0
}

/// The j-th positive number ν_j with Ai(-ν_j) = 0.
pub fn zero(j: usize) -> Result<f64> {
    if !(1..=MAX_ZERO_INDEX).contains(&j) {
        return Err(Error::OutOfRange { index: j, min: 1, max: MAX_ZERO_INDEX });
    }
    let mut z = -zero_estimate(j);
    for _ in 0..50 {
        let (y, yp) = airy_pair(z);
        let delta = y / yp;
        z -= delta;
        if delta.abs() <= 4.0 * f64::EPSILON * z.abs() {
            break;
        }
    }
    Ok(-z)
}

/// Standard large-index expansion of ν_j, used as the Newton starting point.
pub fn zero_estimate(j: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * j as f64 - 1.0) / 8.0;
    let t2 = t.powi(-2);
    t.powf(2.0 / 3.0)
        * (1.0 + t2 * (5.0 / 48.0 + t2 * (-5.0 / 36.0 + t2 * (77125.0 / 82944.0))))
}

/// Mode `j` with its zero and unit-norm normalization constant.
pub fn mode(j: usize) -> Result<AiryMode> {
    let nu = zero(j)?;
    let d = crate::modes::normalize(j)?;
    Ok(AiryMode { j, nu, d })
}

/// Taylor series of the Airy equation solution with data `(y0, yp0)` at
/// `z0`, evaluated at `z0 + h`.
fn taylor_step(z0: f64, y0: f64, yp0: f64, h: f64) -> (f64, f64) {
    if h == 0.0 {
        return (y0, yp0);
    }
    // a[k+2] = (z0 a[k] + a[k-1]) / ((k+2)(k+1))
    let mut a_prev2 = 0.0; // a[k-1]
    let mut a_prev = y0; // a[k]
    let mut a_cur = yp0; // a[k+1]
    let mut y = y0 + yp0 * h;
    let mut yp = yp0;
    let mut hk = h; // h^(k+1)
    let mut quiet = 0;
    for k in 0..200usize {
        let next = (z0 * a_prev + a_prev2) / (((k + 2) * (k + 1)) as f64);
        let term_y = next * hk * h;
        let term_yp = (k + 2) as f64 * next * hk;
        y += term_y;
        yp += term_yp;
        let scale = y.abs().max(yp.abs()).max(f64::MIN_POSITIVE);
        if term_y.abs().max(term_yp.abs()) < 1e-18 * scale {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        a_prev2 = a_prev;
        a_prev = a_cur;
        a_cur = next;
        hk *= h;
    }
    (y, yp)
}

fn anchors() -> &'static [(f64, f64)] {
    static ANCHORS: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    ANCHORS.get_or_init(|| {
        let mut out = Vec::with_capacity(ANCHOR_COUNT + 1);
        let mut state = (AI_ZERO, AIP_ZERO);
        out.push(state);
        // Four sub-steps per anchor interval keep every series short.
        let sub = ANCHOR_STEP / 4.0;
        for k in 0..ANCHOR_COUNT {
            for s in 0..4 {
                let z0 = -(k as f64) * ANCHOR_STEP - s as f64 * sub;
                state = taylor_step(z0, state.0, state.1, -sub);
            }
            out.push(state);
        }
        out
    })
}

/// `e^ζ K_ν(ζ) = ∫_0^∞ exp(-2ζ sinh²(u/2)) cosh(νu) du`, trapezoid rule.
fn scaled_bessel_k(nu: f64, zeta: f64) -> f64 {
    const H: f64 = 0.1;
    let mut sum = 0.5;
    for k in 1..2000 {
        let u = k as f64 * H;
        let s = (0.5 * u).sinh();
        let f = (-2.0 * zeta * s * s).exp() * (nu * u).cosh();
        sum += f;
        if f < 1e-18 * sum {
            break;
        }
    }
    sum * H
}

fn bessel_integral(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let decay = (-zeta).exp();
    let k13 = scaled_bessel_k(1.0 / 3.0, zeta);
    let k23 = scaled_bessel_k(2.0 / 3.0, zeta);
    let ai = (z / 3.0).sqrt() / PI * decay * k13;
    let aip = -z / (PI * 3f64.sqrt()) * decay * k23;
    (ai, aip)
}

/// Coefficients u_k, v_k of the Airy asymptotic expansions.
fn asymptotic_coefficients() -> &'static [(f64, f64)] {
    static COEFFS: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut out = vec![(1.0, 1.0)];
        let mut u = 1.0;
        for k in 1..=60 {
            let kf = k as f64;
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
            out.push((u, v));
        }
        out
    })
}

/// Sums `Σ sign_k c_k ζ^-k` over the selected indices until the terms stop
/// decreasing or fall below round-off.
fn asymptotic_sum(zeta: f64, indices: impl Iterator<Item = usize>, pick: impl Fn(usize) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for k in indices {
        let term = pick(k) / zeta.powi(k as i32);
        if term.abs() >= last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

fn decaying_asymptotic(z: f64) -> (f64, f64) {
    let c = asymptotic_coefficients();
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let su = asymptotic_sum(zeta, 0..c.len(), |k| sign(k) * c[k].0);
    let sv = asymptotic_sum(zeta, 0..c.len(), |k| sign(k) * c[k].1);
    let decay = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = z.powf(0.25);
    (decay / q * su, -decay * q * sv)
}

fn oscillatory_asymptotic(x: f64) -> (f64, f64) {
    let c = asymptotic_coefficients();
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let half = c.len() / 2;
    // Alternating sign over the pair index k in u_{2k}, u_{2k+1}.
    let sign = |k: usize| if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
    let p = asymptotic_sum(zeta, (0..half).map(|k| 2 * k), |k| sign(k) * c[k].0);
    let q = asymptotic_sum(zeta, (0..half).map(|k| 2 * k + 1), |k| sign(k) * c[k].0);
    let r = asymptotic_sum(zeta, (0..half).map(|k| 2 * k), |k| sign(k) * c[k].1);
    let s = asymptotic_sum(zeta, (0..half).map(|k| 2 * k + 1), |k| sign(k) * c[k].1);
    let phase = zeta - FRAC_PI_4;
    let (sn, cs) = phase.sin_cos();
    let q4 = x.powf(0.25);
    let norm = PI.sqrt().recip();
    let ai = norm / q4 * (cs * p + sn * q);
    let aip = norm * q4 * (sn * r - cs * s);
    (ai, aip)
}
