//! Browser bindings: an incoming mode profile, a small propagation run and
//! its searchlight view. Every function returns flat `Float64Array`s so the
//! page can plot without further decoding.

use inflection_core::evolve::{self, Grid1D, RunParams, DEFAULT_TAIL_TOL};
use inflection_core::{airy, searchlight, Error};
use wasm_bindgen::prelude::*;

/// Demo runs start here; far enough out for the expansion, short enough for a page.
const DEMO_T_START: f64 = -3.0;
/// Longest run the page will request.
const DEMO_T_END_MAX: f64 = 3.0;
const DEMO_DT: f64 = 0.005;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[x_0, D_j Ai(x_0 - ν_j), x_1, …]` on `n + 1` points of `[0, x_max]`.
#[wasm_bindgen]
pub fn mode_profile(j: usize, x_max: f64, n: usize) -> Result<Vec<f64>, JsError> {
    let mode = airy::mode(j).map_err(js)?;
    let grid = Grid1D::new(x_max, n).map_err(js)?;
    let mut out = Vec::with_capacity(2 * grid.points());
    for i in 0..grid.points() {
        let x = grid.x(i);
        out.push(x);
        out.push(mode.d * airy::ai(x - mode.nu));
    }
    Ok(out)
}

fn demo_run(j: usize, times: Vec<f64>, t_end: f64) -> Result<evolve::RunOutput, Error> {
    if !(t_end > 0.0 && t_end <= DEMO_T_END_MAX) {
        return Err(Error::Config(format!("demo runs end in (0, {DEMO_T_END_MAX}], got {t_end}")));
    }
    let dx = RunParams::max_dx(DEMO_T_START, t_end);
    let params = RunParams {
        order: 2,
        t_start: DEMO_T_START,
        t_end,
        dt: DEMO_DT.min(0.25 * dx),
        grid: Grid1D::with_spacing(RunParams::auto_x_max(t_end), dx)?,
        snapshot_times: times,
        tail_tol: DEFAULT_TAIL_TOL,
    };
    evolve::run(&airy::mode(j)?, &params)
}

/// `|ψ(x, t)|` at `frames` equally spaced times in `[-3, t_end]`, row by row.
/// The first row holds the grid points.
#[wasm_bindgen]
pub fn simulate(j: usize, t_end: f64, frames: usize) -> Result<Vec<f64>, JsError> {
    let frames = frames.clamp(2, 64);
    let step = (t_end - DEMO_T_START) / (frames - 1) as f64;
    // snap requested times onto the time grid
    let times: Vec<f64> = (0..frames)
        .map(|k| {
            let t = DEMO_T_START + k as f64 * step;
            DEMO_T_START + ((t - DEMO_T_START) / DEMO_DT).round() * DEMO_DT
        })
        .collect();
    let out = demo_run(j, times, t_end).map_err(js)?;
    let grid = out.params.grid;
    let mut flat: Vec<f64> = (0..grid.points()).map(|i| grid.x(i)).collect();
    for snap in &out.snapshots {
        flat.extend(snap.values.iter().map(|v| v.norm()));
    }
    Ok(flat)
}

/// `[η_0, |G(η_0, t)|, η_1, …]` for the searchlight frame at `t`.
#[wasm_bindgen]
pub fn searchlight_view(j: usize, t: f64) -> Result<Vec<f64>, JsError> {
    if !(t >= searchlight::MIN_SEARCHLIGHT_TIME) {
        return Err(JsError::new("the searchlight frame needs t >= 0.5"));
    }
    let t = DEMO_T_START + ((t - DEMO_T_START) / DEMO_DT).round() * DEMO_DT;
    let out = demo_run(j, vec![t], t).map_err(js)?;
    let frame = searchlight::to_searchlight(&out.snapshots[0]).map_err(js)?;
    Ok(frame.g.iter().enumerate().flat_map(|(i, g)| [frame.eta(i), g.norm()]).collect())
}
