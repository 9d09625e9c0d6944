//! Frames adapted to the two asymptotic regimes and the late-time amplitude.
//!
//! For `t → -∞` the field is a whispering-gallery mode in the modal variables
//! `ξ = s^{1/3} x`, `τ = -(3/20) s^{5/3}`, `s = -2t`. For `t → +∞` it leaves
//! along the limit ray `x = t³/6` and is described in the searchlight variable
//! `η = x/t - t²/6` by
//!
//! ```text
//! G(η, t) = t^{1/2} exp{-i(7/120)t⁵ - (i/2)η t³ - (i/2)η² t} ψ(x, t),
//! i t² G_t + ½ G_ηη = 0,   G(-t²/6, t) = 0.
//! ```
//!
//! In `s = -1/t` the amplitude evolves by the free Schrödinger group, so
//! `G(·, t) = exp(-(i/2t) ∂²) G₀` up to the receding wall, which is what the
//! extraction below exploits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::airy::{self, AiryMode};
use crate::evolve::{Grid1D, WaveField};
use crate::quadrature::{self, cubic_at, second_difference};
use crate::{Error, Result, C64};

/// The searchlight transform degenerates as `t → 0`.
pub const MIN_SEARCHLIGHT_TIME: f64 = 0.5;
/// Latest time at which the modal frame is accepted.
pub const MAX_MODAL_TIME: f64 = -1.0;
pub const MAX_OUTGOING_ORDER: usize = 4;
/// Relative mass outside `[-Λ, Λ]` tolerated when reading off a support radius.
pub const SUPPORT_MASS_CUTOFF: f64 = 1e-8;
/// Largest relative change of a second difference under grid halving.
pub const HALVING_TOLERANCE: f64 = 0.05;
/// Highest power of `1/t` in the remainder fit for `G₁`.
pub const REMAINDER_FIT_ORDER: usize = 3;

/// `exp{-i(7/120)t⁵ - (i/2)η t³ - (i/2)η² t}`.
pub fn searchlight_phase(t: f64, eta: f64) -> C64 {
    let t2 = t * t;
    let theta = t2 * t * (7.0 / 120.0 * t2 + 0.5 * eta) + 0.5 * eta * eta * t;
    C64::from_polar(1.0, -theta)
}

/// `G(η_i, t)` on the η-grid induced by an x-grid. `g[0]` sits on the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchlightFrame {
    pub t: f64,
    pub grid: Grid1D,
    pub g: Vec<C64>,
}

impl SearchlightFrame {
    pub fn new(t: f64, grid: Grid1D, g: Vec<C64>) -> Result<Self> {
        if !(t >= MIN_SEARCHLIGHT_TIME) {
            return Err(Error::Domain(format!("searchlight frame needs t >= {MIN_SEARCHLIGHT_TIME}, got {t}")));
        }
        if g.len() != grid.points() {
            return Err(Error::GridMismatch(format!("{} samples for {} grid points", g.len(), grid.points())));
        }
        if g.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain("searchlight samples must be finite".into()));
        }
        Ok(SearchlightFrame { t, grid, g })
    }

    pub fn tau(&self) -> f64 {
        1.0 / self.t
    }

    /// Position of the wall, `-t²/6`.
    pub fn eta0(&self) -> f64 {
        -self.t * self.t / 6.0
    }

    pub fn d_eta(&self) -> f64 {
        self.grid.dx() / self.t
    }

    pub fn eta(&self, i: usize) -> f64 {
        self.grid.x(i) / self.t - self.t * self.t / 6.0
    }

    pub fn eta_max(&self) -> f64 {
        self.eta(self.grid.n())
    }

    pub fn norm(&self) -> f64 {
        quadrature::l2_norm(&self.g, self.d_eta())
    }

    /// Cubic interpolant; zero outside the frame.
    pub fn sample(&self, eta: f64) -> C64 {
        cubic_at(&self.g, self.eta0(), self.d_eta(), eta)
    }
}

pub fn to_searchlight(field: &WaveField) -> Result<SearchlightFrame> {
    let t = field.time;
    if !(t >= MIN_SEARCHLIGHT_TIME) {
        return Err(Error::Domain(format!("searchlight transform needs t >= {MIN_SEARCHLIGHT_TIME}, got {t}")));
    }
    let scale = t.sqrt();
    let g = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let eta = field.grid.x(i) / t - t * t / 6.0;
            v * searchlight_phase(t, eta) * scale
        })
        .collect();
    Ok(SearchlightFrame { t, grid: field.grid, g })
}

pub fn from_searchlight(frame: &SearchlightFrame) -> Result<WaveField> {
    let t = frame.t;
    let scale = 1.0 / t.sqrt();
    let mut values: Vec<C64> = frame
        .g
        .iter()
        .enumerate()
        .map(|(i, g)| g * searchlight_phase(t, frame.eta(i)).conj() * scale)
        .collect();
    values[0] = C64::new(0.0, 0.0);
    WaveField::new(frame.grid, t, values)
}

/// `ψ̃(ξ, τ)` with `ψ = s^{1/6} ψ̃`, `s = -2t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalFrame {
    pub t: f64,
    pub tau_modal: f64,
    pub d_xi: f64,
    pub psi_tilde: Vec<C64>,
}

impl ModalFrame {
    pub fn xi(&self, i: usize) -> f64 {
        i as f64 * self.d_xi
    }

    pub fn norm(&self) -> f64 {
        quadrature::l2_norm(&self.psi_tilde, self.d_xi)
    }

    /// `⟨D_j Ai(· - ν_j), ψ̃⟩` over `ξ`.
    pub fn projection(&self, mode: &AiryMode) -> C64 {
        let profile: Vec<C64> = (0..self.psi_tilde.len())
            .map(|i| C64::new(mode.d * airy::ai(self.xi(i) - mode.nu), 0.0))
            .collect();
        quadrature::inner(&profile, &self.psi_tilde, self.d_xi)
    }
}

pub fn to_modal_frame(field: &WaveField) -> Result<ModalFrame> {
    let t = field.time;
    if !(t <= MAX_MODAL_TIME) {
        return Err(Error::Domain(format!("modal frame needs t <= {MAX_MODAL_TIME}, got {t}")));
    }
    let s = -2.0 * t;
    let scale = s.powf(-1.0 / 6.0);
    Ok(ModalFrame {
        t,
        tau_modal: -0.15 * s.powf(5.0 / 3.0),
        d_xi: s.cbrt() * field.grid.dx(),
        psi_tilde: field.values.iter().map(|v| v * scale).collect(),
    })
}

/// `φ(ζ, t) = exp{-(i/2)ζ t² - i(7/120)t⁵} ψ` with `ζ = x - t³/6`; `φ` obeys the
/// free equation `i φ_t + ½ φ_ζζ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicFrame {
    pub t: f64,
    pub grid: Grid1D,
    pub phi: Vec<C64>,
}

impl ParabolicFrame {
    pub fn zeta0(&self) -> f64 {
        -self.t.powi(3) / 6.0
    }

    pub fn zeta(&self, i: usize) -> f64 {
        self.grid.x(i) + self.zeta0()
    }

    pub fn norm(&self) -> f64 {
        quadrature::l2_norm(&self.phi, self.grid.dx())
    }

    pub fn sample(&self, zeta: f64) -> C64 {
        cubic_at(&self.phi, self.zeta0(), self.grid.dx(), zeta)
    }
}

fn parabolic_phase(t: f64, zeta: f64) -> C64 {
    C64::from_polar(1.0, -(0.5 * zeta * t * t + 7.0 / 120.0 * t.powi(5)))
}

pub fn to_parabolic_frame(field: &WaveField) -> ParabolicFrame {
    let t = field.time;
    let zeta0 = -t.powi(3) / 6.0;
    let phi = field
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| v * parabolic_phase(t, field.grid.x(i) + zeta0))
        .collect();
    ParabolicFrame { t, grid: field.grid, phi }
}

/// Pseudoconformal step `G(η) = t^{1/2} exp(-(i/2)η² t) φ(η t)`.
pub fn parabolic_to_searchlight(frame: &ParabolicFrame) -> Result<SearchlightFrame> {
    let t = frame.t;
    if !(t >= MIN_SEARCHLIGHT_TIME) {
        return Err(Error::Domain(format!("searchlight transform needs t >= {MIN_SEARCHLIGHT_TIME}, got {t}")));
    }
    let scale = t.sqrt();
    let g = frame
        .phi
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let eta = frame.grid.x(i) / t - t * t / 6.0;
            p * C64::from_polar(scale, -0.5 * eta * eta * t)
        })
        .collect();
    Ok(SearchlightFrame { t, grid: frame.grid, g })
}

/// Plain polynomial fit `G(t_k) ≈ g0 + g1/t_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTermFit {
    pub g0: Vec<C64>,
    pub g1: Vec<C64>,
    /// `max_k ‖G(t_k) - g0 - g1/t_k‖`.
    pub residual: f64,
}

/// Late-time amplitudes on a common uniform η-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSeries {
    pub eta0: f64,
    pub d_eta: f64,
    pub extraction_times: Vec<f64>,
    /// Limit amplitude `G₀`: frames pulled back to `t = ∞` by the exact free
    /// group and averaged.
    pub g0: Vec<C64>,
    /// First correction `G₁`, fitted from `G(t_k) - G₀` in powers of `1/t`.
    pub g1: Option<Vec<C64>>,
    /// Residual of the two-term polynomial fit. Each frame enters the fits
    /// only above its own wall.
    pub fit_residual: f64,
    pub two_term: TwoTermFit,
    /// `max_k ‖pullback(G(t_k)) - G₀‖`; measures wall and discretization effects.
    pub limit_spread: f64,
    /// Residual of the remainder fit that produced `g1`.
    pub remainder_residual: f64,
    /// `‖G(t_k) - G(t_{k+1})‖`.
    pub pairwise_differences: Vec<f64>,
    /// `‖G(t_k) - G₀‖`.
    pub frame_errors: Vec<f64>,
    /// The last frame resampled to the common grid.
    pub last_frame: Vec<C64>,
}

impl AmplitudeSeries {
    pub fn len(&self) -> usize {
        self.g0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g0.is_empty()
    }

    pub fn eta(&self, i: usize) -> f64 {
        self.eta0 + i as f64 * self.d_eta
    }

    pub fn norm(&self) -> f64 {
        quadrature::l2_norm(&self.g0, self.d_eta)
    }

    /// CSV with header `eta,re_g0,im_g0,re_g1,im_g1`; missing `g1` is zero-filled.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.len() * 120 + 32);
        s.push_str("eta,re_g0,im_g0,re_g1,im_g1\n");
        let zero = C64::new(0.0, 0.0);
        for (i, g0) in self.g0.iter().enumerate() {
            let g1 = self.g1.as_ref().map_or(zero, |g| g[i]);
            let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", self.eta(i), g0.re, g0.im, g1.re, g1.im);
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Resample a frame onto this series' grid.
    pub fn resample(&self, frame: &SearchlightFrame) -> Vec<C64> {
        (0..self.len()).map(|i| frame.sample(self.eta(i))).collect()
    }
}

/// Extract `G₀` (and `G₁`) from frames at increasing times.
///
/// The common grid runs from the lowest wall to the smallest upper end at the
/// finest spacing; frames are zero below their own wall.
pub fn extract_g0(frames: &[SearchlightFrame]) -> Result<AmplitudeSeries> {
    if frames.len() < 3 {
        return Err(Error::InsufficientFrames { needed: 3, got: frames.len() });
    }
    if frames.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::Domain("extraction frames must have increasing times".into()));
    }
    let lo = frames.iter().map(|f| f.eta0()).fold(f64::INFINITY, f64::min);
    let hi = frames.iter().map(|f| f.eta_max()).fold(f64::INFINITY, f64::min);
    let h = frames.iter().map(|f| f.d_eta()).fold(f64::INFINITY, f64::min);
    if !(hi - lo > 8.0 * h) {
        return Err(Error::Interpolation(format!("common eta support [{lo}, {hi}] is empty")));
    }
    let n = ((hi - lo) / h * (1.0 + 1e-12)).floor() as usize + 1;
    let eta = |i: usize| lo + i as f64 * h;
    let resampled: Vec<Vec<C64>> = frames.iter().map(|f| (0..n).map(|i| f.sample(eta(i))).collect()).collect();
    let times: Vec<f64> = frames.iter().map(|f| f.t).collect();
    let norm = |v: &[C64]| quadrature::l2_norm(v, h);
    let diff_norm = |a: &[C64], b: &[C64]| {
        let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm(&d)
    };

    // Walls descend with t, so the frames valid at η form a suffix.
    let walls: Vec<f64> = frames.iter().map(|f| f.eta0()).collect();
    let first_active = |eta: f64| walls.iter().position(|&w| w < eta - 1e-9).unwrap_or(walls.len() - 1);
    let active: Vec<usize> = (0..n).map(|i| first_active(eta(i))).collect();

    let two_term = fit_powers(&resampled, &times, &active, None, 2, h);
    let two_term = TwoTermFit {
        g0: two_term.coeffs[0].clone(),
        g1: two_term.coeffs[1].clone(),
        residual: two_term.residual,
    };

    let pulled: Vec<Vec<C64>> = resampled.iter().zip(&times).map(|(g, &t)| free_pullback(g, h, t)).collect();
    let k = pulled.len() as f64;
    let g0: Vec<C64> = (0..n).map(|i| pulled.iter().map(|p| p[i]).sum::<C64>() / k).collect();
    let limit_spread = pulled.iter().map(|p| diff_norm(p, &g0)).fold(0.0, f64::max);

    let remainder = fit_powers(&resampled, &times, &active, Some(&g0), REMAINDER_FIT_ORDER, h);

    Ok(AmplitudeSeries {
        eta0: lo,
        d_eta: h,
        extraction_times: times,
        frame_errors: resampled.iter().map(|g| diff_norm(g, &g0)).collect(),
        pairwise_differences: resampled.windows(2).map(|w| diff_norm(&w[0], &w[1])).collect(),
        last_frame: resampled.last().cloned().unwrap_or_default(),
        g0,
        g1: Some(remainder.coeffs[0].clone()),
        fit_residual: two_term.residual,
        two_term,
        limit_spread,
        remainder_residual: remainder.residual,
    })
}

struct PowerFit {
    coeffs: Vec<Vec<C64>>,
    residual: f64,
}

/// Least squares `G(t_k) - base ≈ Σ_m c_m t_k^{-m}` per grid point, with
/// `m = 0..terms` when `base` is absent and `m = 1..=terms` otherwise. At point
/// `i` only frames `active[i]..` enter, and the number of terms shrinks so the
/// fit stays determined; missing coefficients are zero.
fn fit_powers(
    frames: &[Vec<C64>],
    times: &[f64],
    active: &[usize],
    base: Option<&[C64]>,
    terms: usize,
    h: f64,
) -> PowerFit {
    let first = usize::from(base.is_some());
    let k_all = times.len();
    // pseudo-inverses for every suffix of frames
    let designs: Vec<(DMatrix<f64>, DMatrix<f64>)> = (0..k_all)
        .map(|s| {
            let rows = k_all - s;
            let cols = if base.is_some() { terms.min(rows.saturating_sub(1)).max(1) } else { terms.min(rows) };
            let a = DMatrix::from_fn(rows, cols, |r, c| times[s + r].powi(-((c + first) as i32)));
            let pinv = a.clone().pseudo_inverse(1e-14).expect("distinct times give a full-rank design");
            (a, pinv)
        })
        .collect();
    let n = frames[0].len();
    let mut coeffs = vec![vec![C64::new(0.0, 0.0); n]; terms];
    let mut residual_sq = vec![0.0; k_all];
    let mut rhs = vec![C64::new(0.0, 0.0); k_all];
    for i in 0..n {
        let s = active[i];
        let (a, pinv) = &designs[s];
        for r in s..k_all {
            rhs[r] = frames[r][i] - base.map_or(C64::new(0.0, 0.0), |b| b[i]);
        }
        for c in 0..a.ncols() {
            coeffs[c][i] = (0..a.nrows()).map(|r| rhs[s + r] * pinv[(c, r)]).sum();
        }
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        for r in 0..a.nrows() {
            let model: C64 = (0..a.ncols()).map(|c| coeffs[c][i] * a[(r, c)]).sum();
            residual_sq[s + r] += w * (rhs[s + r] - model).norm_sqr();
        }
    }
    let residual = residual_sq.iter().map(|s| (s * h).sqrt()).fold(0.0, f64::max);
    PowerFit { coeffs, residual }
}

/// `exp((i/2t) ∂²) g` on the full line by FFT, with zero padding.
pub fn free_pullback(g: &[C64], h: f64, t: f64) -> Vec<C64> {
    free_evolve(g, h, 1.0 / t)
}

/// `exp((i s/2) ∂²) g`: the free group over "time" `s`, by FFT on a padded grid.
pub fn free_evolve(g: &[C64], h: f64, s: f64) -> Vec<C64> {
    let n = g.len();
    let len = (3 * n).next_power_of_two();
    let offset = (len - n) / 2;
    let mut buf = vec![C64::new(0.0, 0.0); len];
    buf[offset..offset + n].copy_from_slice(g);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let dk = std::f64::consts::TAU / (len as f64 * h);
    for (j, b) in buf.iter_mut().enumerate() {
        let k = if j <= len / 2 { j as f64 } else { j as f64 - len as f64 } * dk;
        *b *= C64::from_polar(1.0 / len as f64, -0.5 * s * k * k);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf[offset..offset + n].to_vec()
}

/// `G_{m+1} = -i/(2m+2) G_m''` on a uniform grid of spacing `h`.
///
/// Refuses grids on which the second difference changes by more than 5% when
/// every other sample is dropped.
pub fn recur_amplitude(gm: &[C64], h: f64, m: usize) -> Result<Vec<C64>> {
    if gm.len() < 9 {
        return Err(Error::GridTooCoarse(format!("{} samples are too few for the recurrence", gm.len())));
    }
    let d2 = second_difference(gm, h);
    let coarse: Vec<C64> = gm.iter().step_by(2).copied().collect();
    let d2_coarse = second_difference(&coarse, 2.0 * h);
    let inner = 2..coarse.len().saturating_sub(2);
    let scale: f64 = inner.clone().map(|k| d2[2 * k].norm_sqr()).sum::<f64>().sqrt();
    let change: f64 = inner.map(|k| (d2[2 * k] - d2_coarse[k]).norm_sqr()).sum::<f64>().sqrt();
    let g_scale = gm.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale > 1e-12 * g_scale / (h * h) && change > HALVING_TOLERANCE * scale {
        return Err(Error::GridTooCoarse(format!(
            "second difference changes by {:.1}% under grid halving",
            100.0 * change / scale
        )));
    }
    let factor = C64::new(0.0, -1.0 / (2.0 * m as f64 + 2.0));
    Ok(d2.into_iter().map(|v| v * factor).collect())
}

/// The constructive outgoing solution
/// `ψ^(N)(x, t) = t^{-1/2} e^{iΦ} Σ_{m ≤ N} t^{-m} G_m(η)` with `G_m` supported
/// in `[-Λ, Λ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutgoingAsymptotic {
    eta0: f64,
    d_eta: f64,
    order: usize,
    lambda: f64,
    /// `G_0 ..= G_{N+1}`; the last one only enters the residual.
    amplitudes: Vec<Vec<C64>>,
}

pub fn outgoing_asymptotic(g0: &[C64], eta0: f64, d_eta: f64, order: usize) -> Result<OutgoingAsymptotic> {
    if order > MAX_OUTGOING_ORDER {
        return Err(Error::OrderTooHigh { order, max: MAX_OUTGOING_ORDER });
    }
    let lambda = support_radius(g0, eta0, d_eta)?;
    let mut amplitudes = vec![g0.to_vec()];
    for m in 0..=order {
        let next = recur_amplitude(&amplitudes[m], d_eta, m)?;
        amplitudes.push(next);
    }
    Ok(OutgoingAsymptotic { eta0, d_eta, order, lambda, amplitudes })
}

/// Smallest symmetric radius with at most `1e-8` of the mass outside.
fn support_radius(g: &[C64], eta0: f64, h: f64) -> Result<f64> {
    let w: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain("amplitude vanishes identically".into()));
    }
    let budget = 0.5 * SUPPORT_MASS_CUTOFF * total;
    let mut acc = 0.0;
    let mut first = 0;
    while first < w.len() && acc + w[first] <= budget {
        acc += w[first];
        first += 1;
    }
    acc = 0.0;
    let mut last = w.len() - 1;
    while last > first && acc + w[last] <= budget {
        acc += w[last];
        last -= 1;
    }
    let a = eta0 + first as f64 * h;
    let b = eta0 + last as f64 * h;
    Ok(a.abs().max(b.abs()))
}

impl OutgoingAsymptotic {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `Λ`.
    pub fn support_radius(&self) -> f64 {
        self.lambda
    }

    /// `t_* = (6Λ)^{1/2} + 1`.
    pub fn t_star(&self) -> f64 {
        (6.0 * self.lambda).sqrt() + 1.0
    }

    /// Earliest admissible evaluation time `t_* + 1`.
    pub fn min_time(&self) -> f64 {
        self.t_star() + 1.0
    }

    pub fn amplitude(&self, m: usize) -> &[C64] {
        &self.amplitudes[m]
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= self.min_time()) {
            return Err(Error::Domain(format!("outgoing solution needs t >= {}, got {t}", self.min_time())));
        }
        Ok(())
    }

    /// `Σ_{m ≤ N} t^{-m} G_m(η)`; zero for `|η| > Λ`.
    pub fn profile(&self, eta: f64, t: f64) -> C64 {
        if eta.abs() > self.lambda {
            return C64::new(0.0, 0.0);
        }
        let mut sum = C64::new(0.0, 0.0);
        let mut w = 1.0;
        for g in &self.amplitudes[..=self.order] {
            sum += cubic_at(g, self.eta0, self.d_eta, eta) * w;
            w /= t;
        }
        sum
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<C64> {
        self.check_time(t)?;
        let eta = x / t - t * t / 6.0;
        Ok(self.profile(eta, t) * searchlight_phase(t, eta).conj() / t.sqrt())
    }

    /// `ψ^(N)(·, t)` on an x-grid.
    pub fn sample(&self, grid: Grid1D, t: f64) -> Result<WaveField> {
        self.check_time(t)?;
        let values = (0..grid.points()).map(|i| self.eval(grid.x(i), t)).collect::<Result<Vec<_>>>()?;
        WaveField::new(grid, t, values)
    }

    /// `‖L ψ^(N)(·, t)‖` over `x`, with `L = i∂_t + ½∂_x² + x t`.
    ///
    /// Evaluated in the searchlight frame, where `L ψ = t^{-1/2} e^{iΦ}
    /// (i G_t + G_ηη/(2t²))` and the x- and η-norms coincide: `∂_t` is exact
    /// and `∂_η²` is the grid second difference, restricted to `|η| < Λ`.
    pub fn residual_norm(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let n = self.amplitudes[0].len();
        let mut lg = vec![C64::new(0.0, 0.0); n];
        for (m, g) in self.amplitudes[..=self.order].iter().enumerate() {
            let d2 = second_difference(g, self.d_eta);
            let dt_coeff = -(m as f64) * t.powi(-(m as i32) - 1);
            let lap_coeff = 0.5 * t.powi(-(m as i32) - 2);
            for i in 0..n {
                lg[i] += C64::i() * g[i] * dt_coeff + d2[i] * lap_coeff;
            }
        }
        let sum: f64 = (0..n)
            .filter(|&i| (self.eta0 + i as f64 * self.d_eta).abs() < self.lambda)
            .map(|i| lg[i].norm_sqr())
            .sum();
        Ok((sum * self.d_eta).sqrt())
    }
}

#[cfg(test)]
mod tests;
