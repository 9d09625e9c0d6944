//! `key = value` run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use inflection_core::evolve::{Grid1D, RunParams, DEFAULT_TAIL_TOL};
use inflection_core::searchlight::MIN_SEARCHLIGHT_TIME;
use inflection_core::{Error, Result};

pub const MAX_EXPANSION_ORDER: usize = 6;

/// Keys, defaults and meaning, as printed by `--help`.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("mode_j", "1", "incoming mode index j >= 1"),
    ("n_expansion", "2", "order of the modal expansion for the initial data, 0..=6"),
    ("t_start", "-6", "initial time, <= -2"),
    ("t_end", "6", "final time, > 0"),
    ("dx", "0.01", "grid spacing"),
    ("dt", "5e-4", "time step, <= dx/4"),
    ("x_max", "0", "window length; 0 sizes it from t_end as t^3/6 + 8t + 12"),
    ("snapshot_times", "3,6", "times at which field and searchlight files are written"),
    ("extraction_times", "3,4,5,6", "times used to extract G0, each in (0.5, t_end]"),
    ("modes", "1,2,3", "mode list for `scatter`, at most 5, no duplicates"),
    ("output_dir", "out", "directory for all artifacts"),
    ("tail_tol", "1e-10", "largest tolerated mass fraction beyond 0.9 x_max"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode_j: usize,
    pub n_expansion: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub dx: f64,
    pub dt: f64,
    /// Resolved window; never 0 after parsing.
    pub x_max: f64,
    pub snapshot_times: Vec<f64>,
    pub extraction_times: Vec<f64>,
    pub modes: Vec<usize>,
    pub output_dir: PathBuf,
    pub tail_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode_j: 1,
            n_expansion: 2,
            t_start: -6.0,
            t_end: 6.0,
            dx: 0.01,
            dt: 5e-4,
            x_max: 0.0,
            snapshot_times: vec![3.0, 6.0],
            extraction_times: vec![3.0, 4.0, 5.0, 6.0],
            modes: vec![1, 2, 3],
            output_dir: PathBuf::from("out"),
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

fn err(line: usize, key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: `{key}`: {msg}"))
}

fn list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| format!("cannot parse list entry `{s}`")))
        .collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(a, b)| (a.trim(), b.trim()))
                .ok_or_else(|| err(line_no, line, "expected `key = value`"))?;
            let known = KEYS.iter().find(|(name, _, _)| *name == key).map(|(name, _, _)| *name);
            let Some(name) = known else {
                return Err(err(line_no, key, "unknown key"));
            };
            if seen.contains(&name) {
                return Err(err(line_no, key, "duplicate key"));
            }
            seen.push(name);
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(line_no, key, format!("not a number: `{v}`")));
            let int = |v: &str| v.parse::<usize>().map_err(|_| err(line_no, key, format!("not an integer: `{v}`")));
            match name {
                "mode_j" => c.mode_j = int(value)?,
                "n_expansion" => c.n_expansion = int(value)?,
                "t_start" => c.t_start = num(value)?,
                "t_end" => c.t_end = num(value)?,
                "dx" => c.dx = num(value)?,
                "dt" => c.dt = num(value)?,
                "x_max" => c.x_max = num(value)?,
                "snapshot_times" => c.snapshot_times = list(value).map_err(|e| err(line_no, key, e))?,
                "extraction_times" => c.extraction_times = list(value).map_err(|e| err(line_no, key, e))?,
                "modes" => c.modes = list(value).map_err(|e| err(line_no, key, e))?,
                "output_dir" => c.output_dir = PathBuf::from(value),
                "tail_tol" => c.tail_tol = num(value)?,
                _ => unreachable!("key table and match arms agree"),
            }
        }
        c.resolve()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fill the automatic window and check every invariant.
    pub fn resolve(&mut self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.mode_j == 0 {
            return bad("mode_j must be >= 1".into());
        }
        if self.n_expansion > MAX_EXPANSION_ORDER {
            return bad(format!("n_expansion must be <= {MAX_EXPANSION_ORDER}"));
        }
        if !(self.t_start <= -2.0) {
            return bad(format!("t_start must be <= -2, got {}", self.t_start));
        }
        if !(self.t_end > 0.0) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if !(self.dx > 0.0 && self.dt > 0.0 && self.tail_tol > 0.0) {
            return bad("dx, dt and tail_tol must be positive".into());
        }
        if !(self.x_max >= 0.0) {
            return bad("x_max must be >= 0".into());
        }
        if self.x_max == 0.0 {
            self.x_max = RunParams::auto_x_max(self.t_end);
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= self.t_start && **t <= self.t_end)) {
            return bad(format!("snapshot time {t} outside [t_start, t_end]"));
        }
        if let Some(t) = self.extraction_times.iter().find(|t| !(**t > MIN_SEARCHLIGHT_TIME && **t <= self.t_end)) {
            return bad(format!("extraction time {t} outside (0.5, t_end]"));
        }
        if self.extraction_times.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("extraction times must increase".into());
        }
        if self.modes.is_empty() || self.modes.len() > inflection_core::analysis::MAX_SCATTER_MODES || self.modes.contains(&0) {
            return bad("modes must list 1 to 5 indices >= 1".into());
        }
        let mut sorted = self.modes.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("duplicate entry in modes".into());
        }
        self.params(Vec::new())?.validate()?;
        Ok(())
    }

    /// Propagation parameters with the given snapshot times.
    pub fn params(&self, snapshot_times: Vec<f64>) -> Result<RunParams> {
        Ok(RunParams {
            order: self.n_expansion,
            t_start: self.t_start,
            t_end: self.t_end,
            dt: self.dt,
            grid: Grid1D::with_spacing(self.x_max, self.dx)?,
            snapshot_times,
            tail_tol: self.tail_tol,
        })
    }

    /// Help text listing every key with its default.
    pub fn help() -> String {
        let mut s = String::from("Configuration keys (`key = value`, `#` starts a comment):\n");
        for (k, d, m) in KEYS {
            s.push_str(&format!("  {k:<17} default {d:<8} {m}\n"));
        }
        s
    }
}
