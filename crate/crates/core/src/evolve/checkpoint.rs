//! Plain-text field checkpoints.
//!
//! ```text
//! inflection-field v1
//! t=<time>
//! n=<intervals>
//! x_max=<window>
//! <re> <im>        (n + 1 lines)
//! ```
//!
//! Floats use round-trip formatting, so `restore(checkpoint(ψ)) == ψ` bitwise.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{Grid1D, WaveField};
use crate::{Error, Result, C64};

const MAGIC: &str = "inflection-field v1";

/// Serialize `field` to the checkpoint format.
pub fn to_string(field: &WaveField) -> String {
    let mut s = String::with_capacity(48 * field.values.len() + 64);
    let _ = writeln!(s, "{MAGIC}");
    let _ = writeln!(s, "t={}", field.time);
    let _ = writeln!(s, "n={}", field.grid.n());
    let _ = writeln!(s, "x_max={}", field.grid.x_max());
    for v in &field.values {
        let _ = writeln!(s, "{:?} {:?}", v.re, v.im);
    }
    s
}

/// Parse the checkpoint format.
pub fn from_str(text: &str) -> Result<WaveField> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(MAGIC) {
        return Err(Error::Format(format!("missing `{MAGIC}` header")));
    }
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| Error::Format(format!("missing `{key}=` line")))?;
        line.trim()
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .map(str::to_owned)
            .ok_or_else(|| Error::Format(format!("expected `{key}=`, found `{line}`")))
    };
    let parse_f = |key: &str, v: String| -> Result<f64> {
        v.parse().map_err(|_| Error::Format(format!("bad {key} value `{v}`")))
    };
    let time = parse_f("t", header("t")?)?;
    let n_text = header("n")?;
    let n: usize = n_text.parse().map_err(|_| Error::Format(format!("bad n value `{n_text}`")))?;
    let x_max = parse_f("x_max", header("x_max")?)?;
    let grid = Grid1D::new(x_max, n).map_err(|e| Error::Format(e.to_string()))?;

    let mut values = Vec::with_capacity(n + 1);
    for (k, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<f64> {
            parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad value line {}: `{line}`", k + 5)))
        };
        let re = next()?;
        let im = next()?;
        if parts.next().is_some() {
            return Err(Error::Format(format!("extra tokens on line {}", k + 5)));
        }
        values.push(C64::new(re, im));
    }
    if values.len() != n + 1 {
        return Err(Error::Format(format!("expected {} values, found {}", n + 1, values.len())));
    }
    WaveField::new(grid, time, values).map_err(|e| Error::Format(e.to_string()))
}

/// Write `field` to `path`.
pub fn checkpoint(field: &WaveField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_string(field)).map_err(|e| Error::io(path, e))
}

/// Read a field written by [`checkpoint`].
pub fn restore(path: impl AsRef<Path>) -> Result<WaveField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}
