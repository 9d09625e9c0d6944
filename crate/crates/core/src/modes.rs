//! Incoming whispering-gallery data for `t → -∞`.
//!
//! In the modal variables
//!
//! ```text
//! ξ = (-2t)^(1/3) x,   τ = -(3/20) (-2t)^(5/3),   ψ = (-2t)^(1/6) ψ̃(ξ, τ)
//! ```
//!
//! the incoming mode `D_j e^{-iν_j τ} Ai(ξ - ν_j)` is an eigenfunction of the
//! unperturbed Airy operator and the exact solution admits the formal series
//!
//! ```text
//! ψ̃ ~ D_j e^{-iν_j τ} Σ_n τ^-n [P_2n(ξ) Ai(ξ - ν_j) + Q_2n-1(ξ) Ai′(ξ - ν_j)].
//! ```
//!
//! Substituting into the transformed equation and eliminating `Ai″` through
//! the Airy equation gives, order by order,
//!
//! ```text
//! -P″ - 2(ξ - ν)Q′ - Q = (1/5)(ξP_n′ + ξ(ξ - ν)Q_n + P_n/2) - nP_n
//!        -2P′ - Q″     = (1/5)(ξP_n + ξQ_n′ + Q_n/2) - nQ_n
//! ```
//!
//! for `(P, Q) = i^-(n+1) (P_2n+2, Q_2n+1)`. All polynomials are `i^n` times a
//! real polynomial, so only real coefficients are stored. The constant term of
//! `P_2n` is not fixed by its own order; it is the unknown that makes the
//! next order solvable (that order's Dirichlet condition `Q(0) = 0`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::airy::{airy_pair, AiryMode};
use crate::{Error, Result, C64};

/// Highest supported truncation order of the modal expansion.
pub const MAX_EXPANSION_ORDER: usize = 6;

/// `D_j = 1/|Ai′(-ν_j)|`, the normalization giving a unit-norm incoming mode.
pub fn normalize(j: usize) -> Result<f64> {
    let nu = crate::airy::zero(j)?;
    let (_, aip) = airy_pair(-nu);
    Ok(1.0 / aip.abs())
}

/// Modal-frame coordinates of a point `(x, t)` with `t < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalVariables {
    pub xi: f64,
    pub tau: f64,
    /// `(-2t)^(1/6)`
    pub amplitude: f64,
}

impl ModalVariables {
    pub fn new(x: f64, t: f64) -> Self {
        let s = -2.0 * t;
        ModalVariables {
            xi: s.cbrt() * x,
            tau: -0.15 * s.powf(5.0 / 3.0),
            amplitude: s.powf(1.0 / 6.0),
        }
    }
}

/// The incoming wave `D_j (-2t)^(1/6) exp(iν_j (3/20)(-2t)^(5/3)) Ai(x(-2t)^(1/3) - ν_j)`.
pub fn incoming(mode: &AiryMode, x: f64, t: f64) -> Result<C64> {
    if !(t < 0.0) {
        return Err(Error::Domain(format!("incoming wave needs t < 0, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("incoming wave needs x >= 0, got {x}")));
    }
    let v = ModalVariables::new(x, t);
    let (a, _) = airy_pair(v.xi - mode.nu);
    Ok(prefactor(mode, &v).scale(a))
}

fn prefactor(mode: &AiryMode, v: &ModalVariables) -> C64 {
    C64::from_polar(mode.d * v.amplitude, -mode.nu * v.tau)
}

/// Truncated modal expansion for one mode.
///
/// `p_coeffs[n]` and `q_coeffs[n]` hold ascending real coefficients of
/// `i^-n P_2n` and `i^-n Q_2n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalExpansion {
    pub mode: AiryMode,
    pub order: usize,
    pub p_coeffs: Vec<Vec<f64>>,
    pub q_coeffs: Vec<Vec<f64>>,
}

impl ModalExpansion {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("expansion serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// `(P_2n(ξ), Q_2n-1(ξ))` including the `i^n` factor.
    pub fn polynomials_at(&self, n: usize, xi: f64) -> (C64, C64) {
        let phase = i_pow(n);
        (phase.scale(horner(&self.p_coeffs[n], xi)), phase.scale(horner(&self.q_coeffs[n], xi)))
    }
}

/// Solve the recurrence up to `order` (inclusive).
pub fn derive_expansion(mode: &AiryMode, order: usize) -> Result<ModalExpansion> {
    if order > MAX_EXPANSION_ORDER {
        return Err(Error::OrderTooHigh { order, max: MAX_EXPANSION_ORDER });
    }
    let nu = mode.nu;
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    let mut q: Vec<Vec<f64>> = vec![vec![]];
    // One extra order fixes the constant term of the last kept P.
    for n in 0..=order {
        let (c_n, p_next, q_next) = next_order(nu, n, &p[n], &q[n])?;
        if n >= 1 {
            p[n][0] = c_n;
        }
        p.push(p_next);
        q.push(q_next);
    }
    p.truncate(order + 1);
    q.truncate(order + 1);
    Ok(ModalExpansion { mode: *mode, order, p_coeffs: p, q_coeffs: q })
}

/// Evaluate the truncated modal expansion at `(x, t)`, `t ≤ -1`.
pub fn eval_expansion(exp: &ModalExpansion, x: f64, t: f64) -> Result<C64> {
    if !(t <= -1.0) {
        return Err(Error::Domain(format!("modal expansion needs t <= -1, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("modal expansion needs x >= 0, got {x}")));
    }
    let v = ModalVariables::new(x, t);
    let (a, ap) = airy_pair(v.xi - exp.mode.nu);
    let mut sum = C64::new(0.0, 0.0);
    let mut tau_pow = 1.0;
    for n in 0..=exp.order {
        let (pn, qn) = exp.polynomials_at(n, v.xi);
        sum += (pn * a + qn * ap) * tau_pow;
        tau_pow /= v.tau;
    }
    Ok(prefactor(&exp.mode, &v) * sum)
}

fn i_pow(n: usize) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_add_into(acc: &mut Vec<f64>, other: &[f64], scale: f64) {
    if acc.len() < other.len() {
        acc.resize(other.len(), 0.0);
    }
    for (a, b) in acc.iter_mut().zip(other) {
        *a += scale * b;
    }
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

fn times_xi(c: &[f64]) -> Vec<f64> {
    if c.is_empty() {
        return vec![];
    }
    let mut out = vec![0.0];
    out.extend_from_slice(c);
    out
}

fn monomial(k: usize, coef: f64) -> Vec<f64> {
    let mut v = vec![0.0; k + 1];
    v[k] = coef;
    v
}

/// Left-hand sides of the two coefficient equations for `(P, Q)`.
fn operator(nu: f64, p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (p1, q1) = (derivative(p), derivative(q));
    let (p2, q2) = (derivative(&p1), derivative(&q1));
    let mut e1 = Vec::new();
    poly_add_into(&mut e1, &p2, -1.0);
    poly_add_into(&mut e1, &times_xi(&q1), -2.0);
    poly_add_into(&mut e1, &q1, 2.0 * nu);
    poly_add_into(&mut e1, q, -1.0);
    let mut e2 = Vec::new();
    poly_add_into(&mut e2, &p1, -2.0);
    poly_add_into(&mut e2, &q2, -1.0);
    (e1, e2)
}

/// Right-hand sides generated by order `n`.
fn source(nu: f64, n: usize, p: &[f64], q: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut ra = Vec::new();
    poly_add_into(&mut ra, &times_xi(&derivative(p)), 0.2);
    let xq = times_xi(q);
    poly_add_into(&mut ra, &times_xi(&xq), 0.2);
    poly_add_into(&mut ra, &xq, -0.2 * nu);
    poly_add_into(&mut ra, p, 0.1 - nf);
    let mut rb = Vec::new();
    poly_add_into(&mut rb, &times_xi(p), 0.2);
    poly_add_into(&mut rb, &times_xi(&derivative(q)), 0.2);
    poly_add_into(&mut rb, q, 0.1 - nf);
    (ra, rb)
}

/// Solve for the constant of `P_2n` (when `n ≥ 1`) and for order `n + 1`.
fn next_order(nu: f64, n: usize, p: &[f64], q: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let p_deg = 2 * n + 2;
    let q_deg = 2 * n + 1;
    let rows = 2 * (2 * n + 2);
    let with_const = n >= 1;
    let cols = usize::from(with_const) + p_deg + q_deg;

    let mut p_known = p.to_vec();
    if with_const {
        p_known[0] = 0.0;
    }
    let (ra, rb) = source(nu, n, &p_known, q);

    let mut mat = DMatrix::<f64>::zeros(rows, cols);
    let mut put = |col: usize, e1: &[f64], e2: &[f64]| {
        for (k, v) in e1.iter().enumerate() {
            mat[(k, col)] += v;
        }
        for (k, v) in e2.iter().enumerate() {
            mat[(rows / 2 + k, col)] += v;
        }
    };
    let mut col = 0;
    if with_const {
        // Moving the unknown constant's source contribution to the left.
        let (ca, cb) = source(nu, n, &[1.0], &[]);
        put(col, &ca.iter().map(|v| -v).collect::<Vec<_>>(), &cb.iter().map(|v| -v).collect::<Vec<_>>());
        col += 1;
    }
    for k in 1..=p_deg {
        let (e1, e2) = operator(nu, &monomial(k, 1.0), &[]);
        put(col, &e1, &e2);
        col += 1;
    }
    for k in 1..=q_deg {
        let (e1, e2) = operator(nu, &[], &monomial(k, 1.0));
        put(col, &e1, &e2);
        col += 1;
    }
    let mut rhs = DVector::<f64>::zeros(rows);
    for (k, v) in ra.iter().enumerate() {
        rhs[k] = *v;
    }
    for (k, v) in rb.iter().enumerate() {
        rhs[rows / 2 + k] = *v;
    }

    let svd = mat.clone().svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Domain(format!("modal recurrence solve failed: {e}")))?;
    let residual = (&mat * &sol - &rhs).norm();
    if residual > 1e-9 * (1.0 + rhs.norm()) {
        return Err(Error::Domain(format!(
            "modal recurrence inconsistent at order {}: residual {residual:e}",
            n + 1
        )));
    }

    let mut idx = 0;
    let c_n = if with_const {
        idx = 1;
        sol[0]
    } else {
        p[0]
    };
    let mut p_next = vec![0.0; p_deg + 1];
    for k in 1..=p_deg {
        p_next[k] = sol[idx];
        idx += 1;
    }
    let mut q_next = vec![0.0; q_deg + 1];
    for k in 1..=q_deg {
        q_next[k] = sol[idx];
        idx += 1;
    }
    Ok((c_n, p_next, q_next))
}
