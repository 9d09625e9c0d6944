//! The four verbs. Each returns the process exit code: 0 success, 1 user or
//! I/O error, 2 violated invariant. Failed runs leave a `FAILED` marker next
//! to whatever was written.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use inflection_core::analysis::{self, ScatterConfig};
use inflection_core::evolve::{self, FluxTrace, Grid1D, Potential, Propagator, Run, WaveField};
use inflection_core::searchlight::{self, AmplitudeSeries, SearchlightFrame};
use inflection_core::{airy, modes, quadrature, Error, Result, C64};
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const MARKER: &str = "FAILED";

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Io { .. } | Error::Format(_) | Error::OutOfRange { .. } => 1,
        _ => 2,
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let marker = dir.join(MARKER);
    if marker.exists() {
        fs::remove_file(&marker).map_err(|e| Error::Config(format!("cannot remove {}: {e}", marker.display())))?;
    }
    Ok(())
}

fn fail(dir: &Path, message: &str) {
    let _ = fs::write(dir.join(MARKER), format!("{message}\n"));
}

fn json_text(v: &Value) -> String {
    // serde_json maps are ordered by key
    serde_json::to_string_pretty(v).expect("values built from finite data serialize") + "\n"
}

fn complex_csv<'a>(header: &str, rows: impl Iterator<Item = (f64, &'a C64)>) -> String {
    let mut s = format!("{header}\n");
    for (x, v) in rows {
        let _ = writeln!(s, "{x:.16e},{:.16e},{:.16e}", v.re, v.im);
    }
    s
}

pub fn field_csv(f: &WaveField) -> String {
    complex_csv("x,re,im", f.values.iter().enumerate().map(|(i, v)| (f.grid.x(i), v)))
}

pub fn searchlight_csv(f: &SearchlightFrame) -> String {
    complex_csv("eta,re,im", f.g.iter().enumerate().map(|(i, v)| (f.eta(i), v)))
}

pub fn flux_csv(trace: &FluxTrace) -> String {
    complex_csv("t,re,im", trace.times.iter().copied().zip(&trace.flux))
}

/// Times `2, 2.5, …` up to `t_end` used for the a priori scan.
fn scan_times(t_end: f64) -> Vec<f64> {
    (0..).map(|k| 2.0 + 0.5 * k as f64).take_while(|t| *t <= t_end + 1e-12).collect()
}

fn merged(lists: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    all
}

fn config_json(c: &RunConfig) -> Value {
    json!({
        "mode_j": c.mode_j,
        "n_expansion": c.n_expansion,
        "t_start": c.t_start,
        "t_end": c.t_end,
        "dx": c.dx,
        "dt": c.dt,
        "x_max": c.x_max,
        "snapshot_times": c.snapshot_times,
        "extraction_times": c.extraction_times,
        "tail_tol": c.tail_tol,
    })
}

fn series_json(s: &AmplitudeSeries) -> Value {
    json!({
        "g0_norm": s.norm(),
        "fit_residual": s.fit_residual,
        "limit_spread": s.limit_spread,
        "remainder_residual": s.remainder_residual,
        "pairwise_differences": s.pairwise_differences,
        "frame_errors": s.frame_errors,
        "extraction_times": s.extraction_times,
        "recurrence_defect": analysis::recurrence_defect(s, 0.8).ok(),
    })
}

/// Everything after propagation: extraction and the analysis suite.
fn analyse(cfg: &RunConfig, frames: &[SearchlightFrame], flux: &FluxTrace) -> (Value, Option<AmplitudeSeries>, Vec<String>) {
    let mut problems = Vec::new();
    let at = |t: f64| frames.iter().find(|f| (f.t - t).abs() < 1e-9);
    let extraction: Vec<SearchlightFrame> = cfg.extraction_times.iter().filter_map(|&t| at(t).cloned()).collect();
    let series = match searchlight::extract_g0(&extraction) {
        Ok(s) => Some(s),
        Err(e) => {
            problems.push(format!("extraction: {e}"));
            None
        }
    };
    let scan: Vec<SearchlightFrame> = scan_times(cfg.t_end).iter().filter_map(|&t| at(t).cloned()).collect();
    let scan = (scan.len() >= analysis::MIN_SCAN_FRAMES).then(|| analysis::a_priori_scan(&scan)).transpose();
    let scan = scan.unwrap_or_else(|e| {
        problems.push(format!("a priori scan: {e}"));
        None
    });
    let identity = match (at(2.0), at(5.0f64.min(cfg.t_end))) {
        (Some(a), Some(b)) if b.t > a.t => match analysis::flux_identity(a, b, flux) {
            Ok(id) => Some(id),
            Err(e) => {
                problems.push(format!("flux identity: {e}"));
                None
            }
        },
        _ => None,
    };
    let integrals = if cfg.t_end >= 4.0 && cfg.t_start <= 1.0 {
        analysis::flux_integrals(flux).map_err(|e| problems.push(format!("flux integrals: {e}"))).ok()
    } else {
        None
    };
    let windows = match (at(5.0), at(6.0)) {
        (Some(a), Some(b)) => Some(analysis::window_cauchy_gap(a, b, &analysis::standard_window_centres())),
        _ => None,
    };
    let report = scan.map(|s| analysis::DiagnosticsReport::new(s, identity.map(|i| i.defect), integrals.clone()));
    let value = json!({
        "amplitude": series.as_ref().map(series_json),
        "report": report.map(|r| serde_json::to_value(r).expect("report serializes")),
        "flux_identity": identity.map(|i| serde_json::to_value(i).expect("identity serializes")),
        "flux_integrals": integrals.map(|i| serde_json::to_value(i).expect("integrals serialize")),
        "window_gap_5_6": windows,
    });
    (value, series, problems)
}

pub fn cmd_run(cfg: &RunConfig) -> u8 {
    let dir = cfg.output_dir.clone();
    if let Err(e) = prepare(&dir) {
        eprintln!("{e}");
        return 1;
    }
    match run_inner(cfg, &dir) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            let code = exit_code(&e);
            if code == 2 {
                let mut diag = json!({ "config": config_json(cfg) });
                record_failure(&mut diag, &e);
                let _ = write(&dir.join("diagnostics.json"), &json_text(&diag));
                fail(&dir, &e.to_string());
            }
            code
        }
    }
}

fn record_failure(diag: &mut Value, e: &Error) {
    diag["status"] = json!("failed");
    diag["error"] = json!(e.to_string());
    if let Error::WindowBreach { time, fraction, tol } = *e {
        diag["window_breach"] = json!({ "time": time, "fraction": fraction, "tol": tol });
    }
}

fn run_inner(cfg: &RunConfig, dir: &Path) -> Result<u8> {
    let mode = airy::mode(cfg.mode_j)?;
    let snaps = merged(&[&cfg.snapshot_times, &cfg.extraction_times, &scan_times(cfg.t_end)]);
    let mut run = Run::new(&mode, &cfg.params(snaps)?)?;
    let status = run.execute();
    let out = run.output();

    for &t in &cfg.snapshot_times {
        let Some(snap) = out.snapshot_at(t) else { continue };
        write(&dir.join(format!("field_t{t}.csv")), &field_csv(snap))?;
        if t >= searchlight::MIN_SEARCHLIGHT_TIME {
            write(&dir.join(format!("searchlight_t{t}.csv")), &searchlight_csv(&searchlight::to_searchlight(snap)?))?;
        }
    }
    write(&dir.join("flux.csv"), &flux_csv(&out.flux))?;

    let mut diag = json!({
        "config": config_json(cfg),
        "norm_drift": out.norm_drift,
        "initial_norm": out.initial_norm,
        "max_tail_fraction": out.max_tail_fraction,
        "steps_recorded": out.flux.len(),
    });
    if let Err(e) = status {
        record_failure(&mut diag, &e);
        write(&dir.join("diagnostics.json"), &json_text(&diag))?;
        fail(dir, &e.to_string());
        eprintln!("{e}");
        return Ok(exit_code(&e));
    }

    let frames: Vec<SearchlightFrame> = out
        .snapshots
        .iter()
        .filter(|s| s.time >= searchlight::MIN_SEARCHLIGHT_TIME)
        .map(searchlight::to_searchlight)
        .collect::<Result<_>>()?;
    let (analysis_json, series, problems) = analyse(cfg, &frames, &out.flux);
    if let Some(s) = &series {
        s.write_csv(dir.join("g0.csv"))?;
    }
    diag["analysis"] = analysis_json;
    diag["status"] = json!(if problems.is_empty() { "ok" } else { "failed" });
    diag["problems"] = json!(problems);
    write(&dir.join("diagnostics.json"), &json_text(&diag))?;
    if problems.is_empty() {
        Ok(0)
    } else {
        let msg = problems.join("; ");
        eprintln!("{msg}");
        fail(dir, &msg);
        Ok(2)
    }
}

pub fn cmd_scatter(cfg: &RunConfig) -> u8 {
    let dir = cfg.output_dir.clone();
    let result = prepare(&dir).and_then(|_| {
        let config = ScatterConfig { params: cfg.params(Vec::new())?, extraction_times: cfg.extraction_times.clone() };
        let report = analysis::scattering_matrix(&cfg.modes, &config)?;
        report.write_gram_csv(dir.join("gram.csv"))?;
        write(&dir.join("scattering.json"), &(report.to_json()? + "\n"))?;
        for (j, s) in report.modes.iter().zip(&report.amplitudes) {
            s.write_csv(dir.join(format!("g0_j{j}.csv")))?;
        }
        Ok(report)
    });
    match result {
        Ok(report) if report.failures.is_empty() => {
            println!("gram unitarity defect {:.3e} over modes {:?}", report.unitarity_defect, report.modes);
            0
        }
        Ok(report) => {
            let msg: Vec<String> = report.failures.iter().map(|(_, m)| m.clone()).collect();
            let msg = msg.join("; ");
            eprintln!("{msg}");
            fail(&dir, &msg);
            2
        }
        Err(e) => {
            eprintln!("{e}");
            let code = exit_code(&e);
            if code == 2 {
                fail(&dir, &e.to_string());
            }
            code
        }
    }
}

/// One resolution level of the convergence study.
struct Level {
    dx: f64,
    dt: f64,
    norm_drift: f64,
    series: AmplitudeSeries,
    flux_identity: Option<f64>,
}

fn level(cfg: &RunConfig, dx: f64, dt: f64) -> Result<Level> {
    let mut c = cfg.clone();
    c.dx = dx;
    c.dt = dt;
    c.params(Vec::new())?.validate()?;
    let mode = airy::mode(c.mode_j)?;
    let identity_times: Vec<f64> = if c.t_end > 2.0 { vec![2.0, c.t_end.min(5.0)] } else { vec![] };
    let out = evolve::run(&mode, &c.params(merged(&[&c.extraction_times, &identity_times]))?)?;
    let frame = |t: f64| -> Result<SearchlightFrame> {
        let snap = out.snapshot_at(t).ok_or_else(|| Error::Config(format!("time {t} is not on the time grid")))?;
        searchlight::to_searchlight(snap)
    };
    let frames = c.extraction_times.iter().map(|&t| frame(t)).collect::<Result<Vec<_>>>()?;
    let flux_identity = match identity_times.as_slice() {
        [a, b] => Some(analysis::flux_identity(&frame(*a)?, &frame(*b)?, &out.flux)?.defect),
        _ => None,
    };
    Ok(Level { dx, dt, norm_drift: out.norm_drift, series: searchlight::extract_g0(&frames)?, flux_identity })
}

/// Grid-halving study: the configured resolution against one twice as coarse.
pub fn cmd_convergence(cfg: &RunConfig) -> u8 {
    let dir = cfg.output_dir.clone();
    let result = prepare(&dir).and_then(|_| {
        let coarse = level(cfg, 2.0 * cfg.dx, 2.0 * cfg.dt)?;
        let fine = level(cfg, cfg.dx, cfg.dt)?;
        let h = fine.series.d_eta;
        let diff: Vec<C64> = (0..fine.series.len())
            .map(|i| fine.series.g0[i] - quadrature::cubic_at(&coarse.series.g0, coarse.series.eta0, coarse.series.d_eta, fine.series.eta(i)))
            .collect();
        let levels: Vec<Value> = [&coarse, &fine]
            .iter()
            .map(|l| {
                json!({
                    "dx": l.dx,
                    "dt": l.dt,
                    "norm_drift": l.norm_drift,
                    "g0_norm": l.series.norm(),
                    "fit_residual": l.series.fit_residual,
                    "flux_identity_defect": l.flux_identity,
                })
            })
            .collect();
        let ratio = match (coarse.flux_identity, fine.flux_identity) {
            (Some(a), Some(b)) => Some(a / b),
            _ => None,
        };
        let report = json!({
            "config": config_json(cfg),
            "levels": levels,
            "g0_difference": quadrature::l2_norm(&diff, h),
            "flux_identity_ratio": ratio,
        });
        write(&dir.join("convergence.json"), &json_text(&report))?;
        println!("{}", json_text(&report));
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            let code = exit_code(&e);
            if code == 2 {
                fail(&dir, &e.to_string());
            }
            code
        }
    }
}

fn free_gaussian(x: f64, t: f64) -> C64 {
    let spread = C64::new(1.0, t / 2.0);
    let d = x - 8.0 - t;
    let envelope = (-(d * d) / (spread * 4.0)).exp() / spread.sqrt();
    envelope * C64::from_polar((2.0 * std::f64::consts::PI).powf(-0.25), (x - 8.0) - 0.5 * t)
}

fn free_gaussian_error() -> Result<f64> {
    let grid = Grid1D::with_spacing(20.0, 1e-3)?;
    let f0 = WaveField::from_fn(grid, 0.0, |x| free_gaussian(x, 0.0))?;
    let mut p = Propagator::new(&f0, 2.5e-4, Potential::Free)?;
    for _ in 0..2000 {
        p.advance()?;
    }
    let f = p.field();
    Ok((0..grid.points()).map(|i| (f.values[i] - free_gaussian(grid.x(i), 0.5)).norm()).fold(0.0, f64::max))
}

/// Airy, mode and free-propagation oracles with frozen reference values.
pub fn selftest_checks() -> Vec<(String, bool, String)> {
    const AI0: f64 = 0.355_028_053_887_817_24;
    const AIP0: f64 = -0.258_819_403_792_806_8;
    const D1: f64 = 1.426_104_628_733_495;
    const ZEROS: [f64; 5] =
        [2.338_107_410_459_767, 4.087_949_444_130_971, 5.520_559_828_095_551, 6.786_708_090_071_759, 7.944_133_587_120_853];
    let mut checks = Vec::new();
    let mut check = |name: &str, err: Result<f64>, tol: f64| {
        let (ok, detail) = match err {
            Ok(e) => (e <= tol, format!("error {e:.2e} (tol {tol:.0e})")),
            Err(e) => (false, e.to_string()),
        };
        checks.push((name.to_string(), ok, detail));
    };
    check("Ai(0), Ai'(0)", airy::eval_ai(0.0).map(|s| (s.ai - AI0).abs().max((s.aip - AIP0).abs())), 1e-12);
    check(
        "zeros nu_1..nu_5",
        ZEROS.iter().enumerate().try_fold(0.0f64, |m, (k, z)| Ok(m.max((airy::zero(k + 1)? - z).abs()))),
        1e-10,
    );
    check("normalization D_1", modes::normalize(1).map(|d| (d - D1).abs()), 1e-12);
    check("free Gaussian at t = 0.5", free_gaussian_error(), 1e-6);
    checks
}

pub fn cmd_selftest() -> u8 {
    let checks = selftest_checks();
    for (name, ok, detail) in &checks {
        println!("[{}] {name}: {detail}", if *ok { "PASS" } else { "FAIL" });
    }
    if checks.iter().all(|c| c.1) {
        0
    } else {
        2
    }
}

