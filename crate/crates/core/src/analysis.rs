//! A priori functionals of the searchlight field, boundary-flux bookkeeping
//! and the modal-to-searchlight Gram matrix.
//!
//! All quadratures are trapezoidal on the native grids. Derivatives in η use
//! central differences inside and second-order one-sided stencils at the wall
//! `η = -t²/6` and at the window end.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::airy;
use crate::evolve::{self, FluxTrace, RunParams, WaveField};
use crate::quadrature::{self, cubic_at, first_difference, second_difference};
use crate::searchlight::{self, AmplitudeSeries, SearchlightFrame};
use crate::{Error, Result, C64};

/// Minimum number of frames for [`a_priori_scan`].
pub const MIN_SCAN_FRAMES: usize = 5;
/// Trend slopes are fitted on frames with `t >= TREND_START`.
pub const TREND_START: f64 = 3.0;
/// A flux integral counts as saturated when its last unit interval adds less
/// than this fraction of the total.
pub const SATURATION_FRACTION: f64 = 0.05;
/// Flux integrals start at `t = 1`.
pub const FLUX_INTEGRAL_START: f64 = 1.0;
/// Largest moment weight `x^{2α}` and derivative order in [`seminorm`].
pub const MAX_SEMINORM_ALPHA: usize = 3;
pub const MAX_SEMINORM_GAMMA: usize = 2;
/// Upper bound on the number of modes in one scattering batch.
pub const MAX_SCATTER_MODES: usize = 5;
/// Width of the Gaussian windows used for weak-limit functionals.
pub const WINDOW_WIDTH: f64 = 0.5;

/// Pretty JSON with keys sorted at every level.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // `serde_json::Value` keeps object keys in a BTreeMap.
    let v = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    serde_json::to_string_pretty(&v).map_err(|e| Error::Format(e.to_string()))
}

/// Norms of one searchlight frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameNorms {
    pub t: f64,
    /// `‖G‖`
    pub g: f64,
    /// `‖G_η‖`
    pub g_eta: f64,
    /// `‖ηG‖`
    pub eta_g: f64,
}

pub fn frame_norms(frame: &SearchlightFrame) -> FrameNorms {
    let h = frame.d_eta();
    let weighted: Vec<C64> = frame.g.iter().enumerate().map(|(i, g)| g * frame.eta(i)).collect();
    FrameNorms {
        t: frame.t,
        g: quadrature::l2_norm(&frame.g, h),
        g_eta: quadrature::l2_norm(&first_difference(&frame.g, h), h),
        eta_g: quadrature::l2_norm(&weighted, h),
    }
}

/// The bounded quantities `C₀ = ‖G‖`, `C₁ = sup ‖G_η‖`, `C₂ = sup ‖ηG‖`
/// sampled over a set of frames.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriScan {
    pub c0: f64,
    /// `max |‖G‖(t) / c0 - 1|`
    pub c0_spread: f64,
    pub c1: f64,
    pub c2: f64,
    /// Least-squares slopes of `‖G_η‖` and `‖ηG‖` against `t` for `t >= 3`.
    pub slope_g_eta: f64,
    pub slope_eta_g: f64,
    pub frames: Vec<FrameNorms>,
}

pub fn a_priori_scan(frames: &[SearchlightFrame]) -> Result<AprioriScan> {
    if frames.len() < MIN_SCAN_FRAMES {
        return Err(Error::InsufficientFrames { needed: MIN_SCAN_FRAMES, got: frames.len() });
    }
    let norms: Vec<FrameNorms> = frames.iter().map(frame_norms).collect();
    let c0 = norms.iter().map(|n| n.g).sum::<f64>() / norms.len() as f64;
    let c0_spread = norms.iter().map(|n| (n.g / c0 - 1.0).abs()).fold(0.0, f64::max);
    let c1 = norms.iter().map(|n| n.g_eta).fold(0.0, f64::max);
    let c2 = norms.iter().map(|n| n.eta_g).fold(0.0, f64::max);

    let mut late: Vec<&FrameNorms> = norms.iter().filter(|n| n.t >= TREND_START - 1e-12).collect();
    if late.len() < 2 {
        late = norms.iter().collect();
    }
    let ts: Vec<f64> = late.iter().map(|n| n.t).collect();
    let slope = |f: fn(&FrameNorms) -> f64| {
        let ys: Vec<f64> = late.iter().map(|n| f(n)).collect();
        quadrature::linear_slope(&ts, &ys)
    };
    let (slope_g_eta, slope_eta_g) = if ts.windows(2).any(|w| w[1] != w[0]) {
        (slope(|n| n.g_eta), slope(|n| n.eta_g))
    } else {
        (0.0, 0.0)
    };
    Ok(AprioriScan { c0, c0_spread, c1, c2, slope_g_eta, slope_eta_g, frames: norms })
}

/// Terms of the energy identity
/// `∫_{τa}^{τb} τ⁻³ |g|² dτ = 3‖G_η‖²(τb) - 3‖G_η‖²(τa)`, `τ = 1/t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxIdentity {
    pub t_early: f64,
    pub t_late: f64,
    /// Left side, computed as `∫ t⁴ |∂_xψ(0,t)|² dt` from the flux trace.
    pub integral: f64,
    pub energy_early: f64,
    pub energy_late: f64,
    /// `|integral + 3 E_late - 3 E_early| / (3 E_early)`
    pub defect: f64,
}

/// Check the flux identity between two frames. The wall derivative
/// `g = G_η(-t²/6)` equals `t^{3/2}` times the recorded flux in modulus.
pub fn flux_identity(early: &SearchlightFrame, late: &SearchlightFrame, trace: &FluxTrace) -> Result<FluxIdentity> {
    let (ta, tb) = (early.t, late.t);
    if !(ta >= 2.0 && tb > ta) {
        return Err(Error::Domain(format!("flux identity needs 2 <= t_early < t_late, got {ta}, {tb}")));
    }
    for f in [early, late] {
        if f.g.len() < 5 {
            return Err(Error::BoundaryExtraction(format!("frame at t = {} has fewer than 5 samples", f.t)));
        }
    }
    let covered = match (trace.times.first(), trace.times.last()) {
        (Some(&first), Some(&last)) => first <= ta + 1e-9 && last >= tb - 1e-9,
        _ => false,
    };
    if !covered {
        return Err(Error::BoundaryExtraction(format!("flux trace does not cover [{ta}, {tb}]")));
    }
    let weights: Vec<f64> = trace.times.iter().zip(&trace.flux).map(|(t, f)| t.powi(4) * f.norm_sqr()).collect();
    let integral = quadrature::trapezoid_between(&trace.times, &weights, ta, tb);
    let energy = |f: &SearchlightFrame| frame_norms(f).g_eta.powi(2);
    let (energy_early, energy_late) = (energy(early), energy(late));
    let defect = (integral + 3.0 * energy_late - 3.0 * energy_early).abs() / (3.0 * energy_early);
    Ok(FluxIdentity { t_early: ta, t_late: tb, integral, energy_early, energy_late, defect })
}

/// A running integral `∫₁^T` with its saturation flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaturatingIntegral {
    pub value: f64,
    /// Contribution of `[T - 1, T]`.
    pub last_unit: f64,
    pub saturated: bool,
}

impl SaturatingIntegral {
    fn over(times: &[f64], values: &[f64], t_final: f64) -> Self {
        let value = quadrature::trapezoid_between(times, values, FLUX_INTEGRAL_START, t_final);
        let last_unit = quadrature::trapezoid_between(times, values, t_final - 1.0, t_final);
        let saturated = last_unit <= SATURATION_FRACTION * value && (value > 0.0 || last_unit == 0.0);
        SaturatingIntegral { value, last_unit, saturated }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxIntegrals {
    pub t_final: f64,
    /// `∫₁^T |f|² t² dt`
    pub weighted_square: SaturatingIntegral,
    /// `∫₁^T |f| t^p dt` for `p = 1..=4`. Reported only.
    pub moments: Vec<SaturatingIntegral>,
}

/// Flux integrals up to the last recorded time.
pub fn flux_integrals(trace: &FluxTrace) -> Result<FluxIntegrals> {
    let t_final = trace.times.last().copied().ok_or_else(|| Error::Range("empty flux trace".into()))?;
    flux_integrals_to(trace, t_final)
}

/// Flux integrals over `[1, t_final]`.
pub fn flux_integrals_to(trace: &FluxTrace, t_final: f64) -> Result<FluxIntegrals> {
    if !(t_final >= 4.0) {
        return Err(Error::Range(format!("flux integrals need T >= 4, got {t_final}")));
    }
    let (first, last) = match (trace.times.first(), trace.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Range("empty flux trace".into())),
    };
    if first > FLUX_INTEGRAL_START + 1e-9 || last < t_final - 1e-9 {
        return Err(Error::Range(format!("flux trace [{first}, {last}] does not cover [1, {t_final}]")));
    }
    let t = &trace.times;
    let square: Vec<f64> = t.iter().zip(&trace.flux).map(|(t, f)| f.norm_sqr() * t * t).collect();
    let moments = (1..=4)
        .map(|p| {
            let v: Vec<f64> = t.iter().zip(&trace.flux).map(|(t, f)| f.norm() * t.powi(p)).collect();
            SaturatingIntegral::over(t, &v, t_final)
        })
        .collect();
    Ok(FluxIntegrals { t_final, weighted_square: SaturatingIntegral::over(t, &square, t_final), moments })
}

/// `(∫ x^{2α} |∂_x^γ ψ|² dx)^{1/2}`.
pub fn seminorm(field: &WaveField, alpha: usize, gamma: usize) -> Result<f64> {
    if alpha > MAX_SEMINORM_ALPHA {
        return Err(Error::OrderTooHigh { order: alpha, max: MAX_SEMINORM_ALPHA });
    }
    if gamma > MAX_SEMINORM_GAMMA {
        return Err(Error::OrderTooHigh { order: gamma, max: MAX_SEMINORM_GAMMA });
    }
    let h = field.grid.dx();
    let derivative = match gamma {
        0 => field.values.clone(),
        1 => first_difference(&field.values, h),
        _ => second_difference(&field.values, h),
    };
    let weighted: Vec<C64> = derivative
        .iter()
        .enumerate()
        .map(|(i, v)| v * field.grid.x(i).powi(alpha as i32))
        .collect();
    Ok(quadrature::l2_norm(&weighted, h))
}

/// `⟨G, w_c⟩` for the Gaussian window `w_c(η) = exp(-(η - c)² / (2 WINDOW_WIDTH²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowFunctional {
    pub centre: f64,
    pub value: C64,
    /// `‖w_c‖` on the whole line.
    pub window_norm: f64,
}

/// Ten window centres spanning the bulk of the outgoing beam.
pub fn standard_window_centres() -> Vec<f64> {
    (0..10).map(|k| -1.0 + 0.5 * k as f64).collect()
}

pub fn window_functionals(frame: &SearchlightFrame, centres: &[f64]) -> Vec<WindowFunctional> {
    let h = frame.d_eta();
    let window_norm = (WINDOW_WIDTH * std::f64::consts::PI.sqrt()).sqrt();
    centres
        .iter()
        .map(|&c| {
            let w: Vec<C64> = (0..frame.g.len())
                .map(|i| {
                    let d = (frame.eta(i) - c) / WINDOW_WIDTH;
                    C64::new((-0.5 * d * d).exp(), 0.0)
                })
                .collect();
            WindowFunctional { centre: c, value: quadrature::inner(&w, &frame.g, h), window_norm }
        })
        .collect()
}

/// Largest `|⟨G(t₁) - G(t₂), w⟩| / ‖w‖` over the windows.
pub fn window_cauchy_gap(a: &SearchlightFrame, b: &SearchlightFrame, centres: &[f64]) -> f64 {
    window_functionals(a, centres)
        .iter()
        .zip(window_functionals(b, centres))
        .map(|(x, y)| (x.value - y.value).norm() / x.window_norm)
        .fold(0.0, f64::max)
}

/// Relative L² mismatch between the fitted `G₁` and `-(i/2) G₀″` on the
/// central `fraction` of the amplitude grid.
pub fn recurrence_defect(series: &AmplitudeSeries, fraction: f64) -> Result<f64> {
    let g1 = series.g1.as_ref().ok_or_else(|| Error::Domain("amplitude series carries no G1".into()))?;
    let n = series.len();
    if n < 8 || !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Domain(format!("need >= 8 samples and fraction in (0, 1], got {n}, {fraction}")));
    }
    let predicted: Vec<C64> =
        second_difference(&series.g0, series.d_eta).iter().map(|v| v * C64::new(0.0, -0.5)).collect();
    let cut = ((1.0 - fraction) * 0.5 * (n - 1) as f64).round() as usize;
    let range = cut..n - cut;
    let diff: Vec<C64> = range.clone().map(|i| g1[i] - predicted[i]).collect();
    let reference = quadrature::l2_norm(&predicted[range], series.d_eta);
    Ok(quadrature::l2_norm(&diff, series.d_eta) / reference)
}

/// Everything `run` reports about one simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub c0: f64,
    pub c0_spread: f64,
    pub c1: f64,
    pub c2: f64,
    pub slope_g_eta: f64,
    pub slope_eta_g: f64,
    pub flux_identity_gap: Option<f64>,
    pub flux_weighted_square: Option<SaturatingIntegral>,
    pub flux_moments: Vec<SaturatingIntegral>,
    pub frames: Vec<FrameNorms>,
}

impl DiagnosticsReport {
    pub fn new(scan: AprioriScan, flux_identity_gap: Option<f64>, integrals: Option<FluxIntegrals>) -> Self {
        let (flux_weighted_square, flux_moments) = match integrals {
            Some(i) => (Some(i.weighted_square), i.moments),
            None => (None, Vec::new()),
        };
        DiagnosticsReport {
            c0: scan.c0,
            c0_spread: scan.c0_spread,
            c1: scan.c1,
            c2: scan.c2,
            slope_g_eta: scan.slope_g_eta,
            slope_eta_g: scan.slope_eta_g,
            flux_identity_gap,
            flux_weighted_square,
            flux_moments,
            frames: scan.frames,
        }
    }
}

/// Shared settings of a scattering batch. `params.snapshot_times` is
/// extended with the extraction times for each mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterConfig {
    pub params: RunParams,
    pub extraction_times: Vec<f64>,
}

/// Per-mode summary kept in the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub j: usize,
    pub g0_norm: f64,
    pub fit_residual: f64,
    pub limit_spread: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringReport {
    /// Modes that completed, in request order.
    pub modes: Vec<usize>,
    pub amplitudes: Vec<AmplitudeSeries>,
    pub summaries: Vec<ModeSummary>,
    /// Common η-grid of the Gram entries.
    pub eta0: f64,
    pub d_eta: f64,
    /// `gram[a][b] = ⟨G₀^(a), G₀^(b)⟩`; Hermitian by construction.
    pub gram: Vec<Vec<C64>>,
    /// `max |gram - I|`
    pub unitarity_defect: f64,
    /// `(j, message)` for modes that failed.
    pub failures: Vec<(usize, String)>,
}

#[derive(Serialize)]
struct ScatteringJson<'a> {
    modes: &'a [usize],
    summaries: &'a [ModeSummary],
    eta0: f64,
    d_eta: f64,
    gram: &'a [Vec<C64>],
    unitarity_defect: f64,
    failures: std::collections::BTreeMap<String, &'a str>,
}

impl ScatteringReport {
    pub fn to_json(&self) -> Result<String> {
        to_sorted_json(&ScatteringJson {
            modes: &self.modes,
            summaries: &self.summaries,
            eta0: self.eta0,
            d_eta: self.d_eta,
            gram: &self.gram,
            unitarity_defect: self.unitarity_defect,
            failures: self.failures.iter().map(|(j, m)| (j.to_string(), m.as_str())).collect(),
        })
    }

    /// `i,j,re,im` rows indexed by mode number.
    pub fn gram_csv(&self) -> String {
        let mut s = String::from("i,j,re,im\n");
        for (a, row) in self.gram.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                let _ = writeln!(s, "{},{},{:.16e},{:.16e}", self.modes[a], self.modes[b], v.re, v.im);
            }
        }
        s
    }

    pub fn write_gram_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.gram_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let n = self.gram.len();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                worst = worst.max((self.gram[a][b] - self.gram[b][a].conj()).norm());
            }
        }
        worst
    }
}

/// Run one mode and extract its searchlight amplitude.
pub fn mode_amplitude(j: usize, config: &ScatterConfig) -> Result<(AmplitudeSeries, f64)> {
    let mode = airy::mode(j)?;
    let mut params = config.params.clone();
    params.snapshot_times.extend_from_slice(&config.extraction_times);
    let out = evolve::run(&mode, &params)?;
    let frames = config
        .extraction_times
        .iter()
        .map(|&t| {
            let snap = out
                .snapshot_at(t)
                .ok_or_else(|| Error::Config(format!("extraction time {t} is not on the time grid")))?;
            searchlight::to_searchlight(snap)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((searchlight::extract_g0(&frames)?, out.norm_drift))
}

/// Gram matrix of the searchlight amplitudes of `modes`. Modes run in
/// parallel; a failing mode is recorded and left out of the matrix.
pub fn scattering_matrix(modes: &[usize], config: &ScatterConfig) -> Result<ScatteringReport> {
    if modes.is_empty() || modes.len() > MAX_SCATTER_MODES {
        return Err(Error::Config(format!("need 1..={MAX_SCATTER_MODES} modes, got {}", modes.len())));
    }
    let mut seen = modes.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("duplicate mode index".into()));
    }
    let results: Vec<Result<(AmplitudeSeries, f64)>> = modes.par_iter().map(|&j| mode_amplitude(j, config)).collect();

    let mut done = Vec::new();
    let mut failures = Vec::new();
    for (&j, r) in modes.iter().zip(results) {
        match r {
            Ok((series, drift)) => done.push((j, series, drift)),
            Err(e) => failures.push((j, Error::ModeFailure { j, message: e.to_string() }.to_string())),
        }
    }
    if done.is_empty() {
        return Ok(ScatteringReport {
            modes: vec![],
            amplitudes: vec![],
            summaries: vec![],
            eta0: 0.0,
            d_eta: 0.0,
            gram: vec![],
            unitarity_defect: f64::NAN,
            failures,
        });
    }

    // Common grid: intersection of supports at the finest spacing.
    let lo = done.iter().map(|(_, s, _)| s.eta0).fold(f64::NEG_INFINITY, f64::max);
    let hi = done.iter().map(|(_, s, _)| s.eta(s.len() - 1)).fold(f64::INFINITY, f64::min);
    let h = done.iter().map(|(_, s, _)| s.d_eta).fold(f64::INFINITY, f64::min);
    if !(hi - lo > 8.0 * h) {
        return Err(Error::Interpolation(format!("mode amplitudes share no grid: [{lo}, {hi}]")));
    }
    let n = ((hi - lo) / h * (1.0 + 1e-12)).floor() as usize + 1;
    let common: Vec<Vec<C64>> = done
        .iter()
        .map(|(_, s, _)| (0..n).map(|i| cubic_at(&s.g0, s.eta0, s.d_eta, lo + i as f64 * h)).collect())
        .collect();

    let m = done.len();
    let mut gram = vec![vec![C64::new(0.0, 0.0); m]; m];
    for a in 0..m {
        gram[a][a] = C64::new(quadrature::l2_norm_sq(&common[a], h), 0.0);
        for b in a + 1..m {
            let v = quadrature::inner(&common[a], &common[b], h);
            gram[a][b] = v;
            gram[b][a] = v.conj();
        }
    }
    let mut unitarity_defect: f64 = 0.0;
    for (a, row) in gram.iter().enumerate() {
        for (b, v) in row.iter().enumerate() {
            let target = if a == b { 1.0 } else { 0.0 };
            unitarity_defect = unitarity_defect.max((v - target).norm());
        }
    }
    let summaries = done
        .iter()
        .map(|(j, s, drift)| ModeSummary {
            j: *j,
            g0_norm: s.norm(),
            fit_residual: s.fit_residual,
            limit_spread: s.limit_spread,
            norm_drift: *drift,
        })
        .collect();
    let (modes, amplitudes): (Vec<usize>, Vec<AmplitudeSeries>) = done.into_iter().map(|(j, s, _)| (j, s)).unzip();
    Ok(ScatteringReport { modes, amplitudes, summaries, eta0: lo, d_eta: h, gram, unitarity_defect, failures })
}
