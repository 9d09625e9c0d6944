//! Time stepping of `i ψ_t = -½ ψ_xx - x t ψ` on `[0, x_max]` with
//! Dirichlet walls at both ends.
//!
//! Each step is the Cayley (trapezoidal) map
//! `(I + i dt/2 H) ψ⁺ = (I - i dt/2 H) ψ` with `H` frozen at the midpoint time,
//! which is exactly unitary for the Hermitian second-difference Hamiltonian.
//!
//! For `t > 0` the beam picks up the momentum `t²/2` from the linear force and
//! a lab-frame grid would pay for it with a large dispersive phase error. The
//! propagator therefore carries the gauge-transformed field
//!
//! ```text
//! χ = exp(-i a(t) x + i θ(t)) ψ,   a = t₊²/2,   θ = t₊⁵/40,
//! ```
//!
//! which obeys `i χ_t = -½ χ_xx - i a χ_x + (t₊ - t) x χ`. For `t ≤ 0` the gauge
//! is the identity and the step is the plain lab-frame scheme. The boundary
//! values and the modulus are unchanged, so Dirichlet data, norms and
//! tail masses can be read from `χ` directly.

pub mod checkpoint;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::airy::AiryMode;
use crate::modes::{derive_expansion, eval_expansion};
use crate::{quadrature, Error, Result, C64};

pub use checkpoint::{checkpoint, restore};
pub use tridiag::Tridiagonal;

pub const MIN_INTERVALS: usize = 16;
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Fraction of the window beyond which mass counts as tail.
pub const TAIL_START: f64 = 0.9;
/// Searchlight half-width in `η` that a default window must contain.
pub const WINDOW_ETA: f64 = 8.0;
/// Fixed spatial margin of a default window.
pub const WINDOW_MARGIN: f64 = 12.0;
/// Wavenumber margin added to `t_end²/2` when bounding the grid spacing.
pub const WAVENUMBER_MARGIN: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_max: f64,
    n: usize,
    dx: f64,
}

impl Grid1D {
    /// `n` intervals on `[0, x_max]`.
    pub fn new(x_max: f64, n: usize) -> Result<Self> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(Error::Config(format!("x_max must be positive, got {x_max}")));
        }
        if n < MIN_INTERVALS {
            return Err(Error::Config(format!("need at least {MIN_INTERVALS} intervals, got {n}")));
        }
        Ok(Grid1D { x_max, n, dx: x_max / n as f64 })
    }

    /// The coarsest grid on `[0, x_max]` whose spacing does not exceed `dx`.
    pub fn with_spacing(x_max: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::Config(format!("dx must be positive, got {dx}")));
        }
        let n = (x_max / dx * (1.0 - 1e-12)).ceil() as usize;
        Grid1D::new(x_max, n)
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of intervals; there are `n + 1` points.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn points(&self) -> usize {
        self.n + 1
    }
}

/// Complex field on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid1D,
    pub time: f64,
    pub values: Vec<C64>,
}

impl WaveField {
    pub fn new(grid: Grid1D, time: f64, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.points()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite(if v.re.is_finite() { v.im } else { v.re }));
        }
        if values[0] != C64::new(0.0, 0.0) {
            return Err(Error::Domain("field must vanish at x = 0".into()));
        }
        Ok(WaveField { grid, time, values })
    }

    /// Sample `f` on the grid; the boundary value at `x = 0` is set to zero.
    pub fn from_fn(grid: Grid1D, time: f64, f: impl Fn(f64) -> C64) -> Result<Self> {
        let mut values: Vec<C64> = (0..grid.points()).map(|i| f(grid.x(i))).collect();
        values[0] = C64::new(0.0, 0.0);
        WaveField::new(grid, time, values)
    }

    pub fn norm_sq(&self) -> f64 {
        quadrature::l2_norm_sq(&self.values, self.grid.dx)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Fraction of `‖ψ‖²` located beyond `0.9 x_max`.
    pub fn tail_fraction(&self) -> f64 {
        tail_fraction(&self.values, &self.grid)
    }
}

fn tail_fraction(values: &[C64], grid: &Grid1D) -> f64 {
    let start = (TAIL_START * grid.n as f64).ceil() as usize;
    let tail: f64 = values[start..].iter().map(|v| v.norm_sqr()).sum();
    let total: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Boundary Neumann data `f(t) = ∂_x ψ(0, t)` sampled along a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FluxTrace {
    pub times: Vec<f64>,
    pub flux: Vec<C64>,
}

impl FluxTrace {
    pub fn new(times: Vec<f64>, flux: Vec<C64>) -> Result<Self> {
        if times.len() != flux.len() {
            return Err(Error::GridMismatch("flux trace lengths differ".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("flux trace times must increase strictly".into()));
        }
        if flux.iter().any(|f| !(f.re.is_finite() && f.im.is_finite())) {
            return Err(Error::Domain("flux trace contains non-finite values".into()));
        }
        Ok(FluxTrace { times, flux })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, f: C64) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.flux.push(f);
    }
}

/// Which Hamiltonian a propagator advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Potential {
    /// `-½ ∂² - x t`, the inflection problem.
    Inflection,
    /// `-½ ∂²` only; a test hook.
    Free,
}

impl Potential {
    /// Gauge momentum `a(t)`.
    fn gauge_momentum(self, t: f64) -> f64 {
        match self {
            Potential::Inflection if t > 0.0 => 0.5 * t * t,
            _ => 0.0,
        }
    }

    /// Gauge phase `θ(t) = ∫_0^t a²/2`.
    fn gauge_phase(self, t: f64) -> f64 {
        match self {
            Potential::Inflection if t > 0.0 => t.powi(5) / 40.0,
            _ => 0.0,
        }
    }

    /// Coefficient of `x` left in the gauged Hamiltonian.
    fn linear_coefficient(self, t: f64) -> f64 {
        match self {
            Potential::Inflection if t < 0.0 => -t,
            _ => 0.0,
        }
    }

    fn gauge(self, t: f64, x: f64) -> C64 {
        C64::from_polar(1.0, self.gauge_momentum(t) * x - self.gauge_phase(t))
    }
}

/// Stateful stepper. Time is `t_origin + k dt`, never accumulated.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Grid1D,
    potential: Potential,
    t_origin: f64,
    dt: f64,
    steps: u64,
    chi: Vec<C64>,
    lower: Vec<C64>,
    diag: Vec<C64>,
    upper: Vec<C64>,
    rhs: Vec<C64>,
    out: Vec<C64>,
    solver: Tridiagonal,
}

impl Propagator {
    pub fn new(field: &WaveField, dt: f64, potential: Potential) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        if dt > 0.25 * field.grid.dx {
            return Err(Error::Domain(format!(
                "time step {dt} exceeds the accuracy guard 0.25 dx = {}",
                0.25 * field.grid.dx
            )));
        }
        let grid = field.grid;
        let t = field.time;
        let mut chi: Vec<C64> = field
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v * potential.gauge(t, grid.x(i)).conj())
            .collect();
        chi[0] = C64::new(0.0, 0.0);
        chi[grid.n] = C64::new(0.0, 0.0);
        let m = grid.n - 1;
        Ok(Propagator {
            grid,
            potential,
            t_origin: t,
            dt,
            steps: 0,
            chi,
            lower: vec![C64::default(); m],
            diag: vec![C64::default(); m],
            upper: vec![C64::default(); m],
            rhs: vec![C64::default(); m],
            out: vec![C64::default(); m],
            solver: Tridiagonal::new(m),
        })
    }

    pub fn time(&self) -> f64 {
        self.t_origin + self.steps as f64 * self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Advance one Cayley step.
    pub fn advance(&mut self) -> Result<()> {
        let t_mid = self.time() + 0.5 * self.dt;
        let a = self.potential.gauge_momentum(t_mid);
        let v = self.potential.linear_coefficient(t_mid);
        let dx = self.grid.dx;
        let inv_dx2 = 1.0 / (dx * dx);
        let half = 0.5 * self.dt;
        // Hermitian off-diagonals of H: -1/(2dx²) ± i a/(2dx).
        let h_lo = C64::new(-0.5 * inv_dx2, 0.5 * a / dx);
        let h_hi = C64::new(-0.5 * inv_dx2, -0.5 * a / dx);
        let i_half = C64::new(0.0, half);
        let lo = i_half * h_lo;
        let hi = i_half * h_hi;
        let chi = &self.chi;
        for r in 0..self.diag.len() {
            let i = r + 1;
            let d = inv_dx2 + v * self.grid.x(i);
            let h_chi = h_lo * chi[i - 1] + chi[i] * d + h_hi * chi[i + 1];
            self.rhs[r] = chi[i] - i_half * h_chi;
            self.diag[r] = C64::new(1.0, half * d);
            self.lower[r] = lo;
            self.upper[r] = hi;
        }
        self.solver.solve(&self.lower, &self.diag, &self.upper, &self.rhs, &mut self.out);
        self.steps += 1;
        let mut finite = true;
        for (dst, src) in self.chi[1..self.grid.n].iter_mut().zip(&self.out) {
            finite &= src.re.is_finite() && src.im.is_finite();
            *dst = *src;
        }
        if !finite {
            return Err(Error::SolverFailure(self.time()));
        }
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        quadrature::l2_norm_sq(&self.chi, self.grid.dx)
    }

    pub fn tail_fraction(&self) -> f64 {
        tail_fraction(&self.chi, &self.grid)
    }

    /// `∂_x ψ(0, t)` by the one-sided fourth-order stencil on `ψ[0..=4]`.
    pub fn boundary_flux(&self) -> C64 {
        let t = self.time();
        let psi = |i: usize| self.chi[i] * self.potential.gauge(t, self.grid.x(i));
        boundary_derivative([psi(0), psi(1), psi(2), psi(3), psi(4)], self.grid.dx)
    }

    /// The lab-frame field `ψ` at the current time.
    pub fn field(&self) -> WaveField {
        let t = self.time();
        let values = self
            .chi
            .iter()
            .enumerate()
            .map(|(i, c)| c * self.potential.gauge(t, self.grid.x(i)))
            .collect();
        WaveField { grid: self.grid, time: t, values }
    }
}

/// One-sided fourth-order first derivative at the left end.
pub fn boundary_derivative(v: [C64; 5], dx: f64) -> C64 {
    (v[0] * -25.0 + v[1] * 48.0 - v[2] * 36.0 + v[3] * 16.0 - v[4] * 3.0) / (12.0 * dx)
}

/// One Cayley step of the inflection problem.
pub fn step(field: &WaveField, dt: f64) -> Result<WaveField> {
    step_with(field, dt, Potential::Inflection)
}

/// One Cayley step with a chosen Hamiltonian.
pub fn step_with(field: &WaveField, dt: f64, potential: Potential) -> Result<WaveField> {
    let mut p = Propagator::new(field, dt, potential)?;
    p.advance()?;
    Ok(p.field())
}

/// Sample the incoming data at `t_start` from the modal expansion of order `order`.
pub fn init_incoming(mode: &AiryMode, order: usize, grid: Grid1D, t_start: f64) -> Result<WaveField> {
    if !(t_start <= -2.0) {
        return Err(Error::Domain(format!("t_start must be <= -2, got {t_start}")));
    }
    let limit = 0.05 * (-2.0 * t_start).powf(-1.0 / 3.0);
    if grid.dx > limit {
        return Err(Error::GridTooCoarse(format!(
            "dx = {} exceeds 0.05 (-2 t_start)^(-1/3) = {limit}",
            grid.dx
        )));
    }
    let exp = derive_expansion(mode, order)?;
    let mut values = Vec::with_capacity(grid.points());
    for i in 0..grid.points() {
        values.push(eval_expansion(&exp, grid.x(i), t_start)?);
    }
    values[0] = C64::new(0.0, 0.0);
    WaveField::new(grid, t_start, values)
}

/// Parameters of one propagation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub order: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub grid: Grid1D,
    pub snapshot_times: Vec<f64>,
    pub tail_tol: f64,
}

impl RunParams {
    /// Window length `t³/6 + 8t + 12` that keeps the outgoing beam, whose
    /// `η`-support extends to about 4.5 at the `1e-10` mass level, inside
    /// `0.9 x_max` up to `t = t_end`.
    pub fn auto_x_max(t_end: f64) -> f64 {
        let t = t_end.max(0.0);
        t.powi(3) / 6.0 + WINDOW_ETA * t + WINDOW_MARGIN
    }

    /// Largest admissible spacing for the given time range.
    pub fn max_dx(t_start: f64, t_end: f64) -> f64 {
        let mode_scale = 0.05 * (-2.0 * t_start).powf(-1.0 / 3.0);
        let wave = 0.2 * std::f64::consts::TAU / (0.5 * t_end * t_end + WAVENUMBER_MARGIN);
        mode_scale.min(wave)
    }

    /// The desk-scale reference configuration: `t ∈ [-6, 6]`, `dx = 0.01`,
    /// `dt = 5e-4`, `x_max = 96`, expansion order 2.
    pub fn reference(snapshot_times: Vec<f64>) -> Self {
        RunParams {
            order: 2,
            t_start: -6.0,
            t_end: 6.0,
            dt: 5e-4,
            grid: Grid1D::new(96.0, 9600).expect("valid reference grid"),
            snapshot_times,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }

    /// Number of steps from `t_start` to `t_end`.
    pub fn step_count(&self) -> Result<u64> {
        let exact = (self.t_end - self.t_start) / self.dt;
        let steps = exact.round();
        if (exact - steps).abs() > 1e-6 * exact.max(1.0) {
            return Err(Error::Config(format!(
                "t_end - t_start = {} is not a whole number of steps dt = {}",
                self.t_end - self.t_start,
                self.dt
            )));
        }
        Ok(steps as u64)
    }

    pub fn validate(&self) -> Result<u64> {
        if !(self.t_start <= -2.0) {
            return Err(Error::Config(format!("t_start must be <= -2, got {}", self.t_start)));
        }
        if !(self.t_end > 0.0 && self.t_end > self.t_start) {
            return Err(Error::Config(format!(
                "t_end must be positive and after t_start, got {}",
                self.t_end
            )));
        }
        if !(self.dt > 0.0 && self.dt <= 0.25 * self.grid.dx) {
            return Err(Error::Config(format!(
                "dt = {} must lie in (0, 0.25 dx = {}]",
                self.dt,
                0.25 * self.grid.dx
            )));
        }
        let max_dx = Self::max_dx(self.t_start, self.t_end);
        if self.grid.dx > max_dx * (1.0 + 1e-12) {
            return Err(Error::Config(format!("dx = {} exceeds the resolution bound {max_dx}", self.grid.dx)));
        }
        if !(self.tail_tol > 0.0) {
            return Err(Error::Config("tail_tol must be positive".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= self.t_start && **t <= self.t_end)) {
            return Err(Error::Config(format!("snapshot time {t} outside [t_start, t_end]")));
        }
        self.step_count()
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub mode: AiryMode,
    pub params: RunParams,
    /// Snapshots in increasing time order, one per distinct requested step.
    pub snapshots: Vec<WaveField>,
    pub flux: FluxTrace,
    pub initial_norm: f64,
    /// `max_t |‖ψ(t)‖ / ‖ψ(t_start)‖ - 1|`.
    pub norm_drift: f64,
    /// Largest tail fraction seen at any step.
    pub max_tail_fraction: f64,
}

impl RunOutput {
    /// Snapshot closest to time `t`.
    pub fn snapshot_at(&self, t: f64) -> Option<&WaveField> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
            .filter(|s| (s.time - t).abs() <= 0.5 * self.params.dt)
    }
}

/// A run in progress. Exposes partial results when a guard trips.
#[derive(Debug)]
pub struct Run {
    propagator: Propagator,
    total_steps: u64,
    snapshot_steps: Vec<u64>,
    output: RunOutput,
}

impl Run {
    pub fn new(mode: &AiryMode, params: &RunParams) -> Result<Self> {
        let total_steps = params.validate()?;
        let initial = init_incoming(mode, params.order, params.grid, params.t_start)?;
        let propagator = Propagator::new(&initial, params.dt, Potential::Inflection)?;
        let mut snapshot_steps: Vec<u64> = params
            .snapshot_times
            .iter()
            .map(|t| ((t - params.t_start) / params.dt).round() as u64)
            .collect();
        snapshot_steps.sort_unstable();
        snapshot_steps.dedup();
        let initial_norm = initial.norm();
        let output = RunOutput {
            mode: *mode,
            params: params.clone(),
            snapshots: Vec::with_capacity(snapshot_steps.len()),
            flux: FluxTrace::default(),
            initial_norm,
            norm_drift: 0.0,
            max_tail_fraction: initial.tail_fraction(),
        };
        let mut run = Run { propagator, total_steps, snapshot_steps, output };
        run.record()?;
        Ok(run)
    }

    fn record(&mut self) -> Result<()> {
        let p = &self.propagator;
        let t = p.time();
        let tail = p.tail_fraction();
        let out = &mut self.output;
        out.max_tail_fraction = out.max_tail_fraction.max(tail);
        let drift = (p.norm_sq().sqrt() / out.initial_norm - 1.0).abs();
        out.norm_drift = out.norm_drift.max(drift);
        out.flux.push(t, p.boundary_flux());
        if self.snapshot_steps.binary_search(&p.steps()).is_ok() {
            out.snapshots.push(p.field());
        }
        if tail > out.params.tail_tol {
            return Err(Error::WindowBreach { time: t, fraction: tail, tol: out.params.tail_tol });
        }
        Ok(())
    }

    /// Step to `t_end`, checking the window guard after every step.
    pub fn execute(&mut self) -> Result<()> {
        while self.propagator.steps() < self.total_steps {
            self.propagator.advance()?;
            self.record()?;
        }
        Ok(())
    }

    /// Results gathered so far (complete after a successful [`Run::execute`]).
    pub fn output(&self) -> &RunOutput {
        &self.output
    }

    pub fn into_output(self) -> RunOutput {
        self.output
    }
}

/// Propagate mode `mode` from `t_start` to `t_end`.
pub fn run(mode: &AiryMode, params: &RunParams) -> Result<RunOutput> {
    let mut r = Run::new(mode, params)?;
    r.execute()?;
    Ok(r.into_output())
}

/// Discrete `‖Lψ‖` at the middle of three equally spaced snapshots, with
/// `L = i∂_t + ½∂_x² + x t` and second-order central differences.
pub fn residual(prev: &WaveField, cur: &WaveField, next: &WaveField) -> Result<f64> {
    residual_with(prev, cur, next, Potential::Inflection)
}

pub fn residual_with(prev: &WaveField, cur: &WaveField, next: &WaveField, potential: Potential) -> Result<f64> {
    if prev.grid != cur.grid || next.grid != cur.grid {
        return Err(Error::GridMismatch("snapshots live on different grids".into()));
    }
    let h1 = cur.time - prev.time;
    let h2 = next.time - cur.time;
    if !(h1 > 0.0) || (h1 - h2).abs() > 1e-9 * h1.max(1e-300) {
        return Err(Error::GridMismatch(format!("snapshot spacing {h1} vs {h2}")));
    }
    let grid = cur.grid;
    let dx = grid.dx;
    let t = cur.time;
    let coupling = match potential {
        Potential::Inflection => t,
        Potential::Free => 0.0,
    };
    let u = &cur.values;
    let mut sum = 0.0;
    for i in 1..grid.n {
        let dt_term = (next.values[i] - prev.values[i]) / (2.0 * h1);
        let lap = (u[i + 1] - u[i] * 2.0 + u[i - 1]) / (dx * dx);
        let l = C64::i() * dt_term + lap * 0.5 + u[i] * (grid.x(i) * coupling);
        sum += l.norm_sqr();
    }
    Ok((sum * dx).sqrt())
}
