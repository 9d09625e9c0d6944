//! Complex tridiagonal solve by forward elimination and back substitution.

use crate::C64;

/// Scratch space for repeated solves of the same size.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    c_prime: Vec<C64>,
    d_prime: Vec<C64>,
}

impl Tridiagonal {
    pub fn new(n: usize) -> Self {
        Tridiagonal { c_prime: vec![C64::default(); n], d_prime: vec![C64::default(); n] }
    }

    /// Solve `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
    /// (`lower[0]` and `upper[n-1]` are ignored). No pivoting: callers
    /// guarantee a matrix whose Hermitian part is positive definite.
    pub fn solve(&mut self, lower: &[C64], diag: &[C64], upper: &[C64], rhs: &[C64], out: &mut [C64]) {
        let n = diag.len();
        assert!(n > 0);
        assert!(lower.len() == n && upper.len() == n && rhs.len() == n && out.len() == n);
        if self.c_prime.len() != n {
            *self = Tridiagonal::new(n);
        }
        let (cp, dp) = (&mut self.c_prime, &mut self.d_prime);
        let inv = diag[0].inv();
        cp[0] = upper[0] * inv;
        dp[0] = rhs[0] * inv;
        for i in 1..n {
            let inv = (diag[i] - lower[i] * cp[i - 1]).inv();
            cp[i] = upper[i] * inv;
            dp[i] = (rhs[i] - lower[i] * dp[i - 1]) * inv;
        }
        out[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            out[i] = dp[i] - cp[i] * out[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn apply(lower: &[C64], diag: &[C64], upper: &[C64], x: &[C64]) -> Vec<C64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn identity_system() {
        let n = 5;
        let z = vec![C64::default(); n];
        let one = vec![C64::new(1.0, 0.0); n];
        let rhs: Vec<C64> = (0..n).map(|k| C64::new(k as f64, -(k as f64))).collect();
        let mut out = vec![C64::default(); n];
        Tridiagonal::new(n).solve(&z, &one, &z, &rhs, &mut out);
        assert_eq!(out, rhs);
    }

    proptest! {
        #[test]
        fn cayley_type_systems_solve_accurately(
            seed in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 3..60)
        ) {
            // I + i K with K Hermitian tridiagonal.
            let n = seed.len();
            let mut lower = vec![C64::default(); n];
            let mut upper = vec![C64::default(); n];
            let mut diag = vec![C64::default(); n];
            for i in 0..n {
                let (d, re, im) = seed[i];
                diag[i] = C64::new(1.0, d);
                if i + 1 < n {
                    let off = C64::new(re, im);
                    upper[i] = C64::i() * off;
                    lower[i + 1] = C64::i() * off.conj();
                }
            }
            let x: Vec<C64> = (0..n).map(|k| C64::new((k as f64).cos(), (k as f64 * 0.7).sin())).collect();
            let rhs = apply(&lower, &diag, &upper, &x);
            let mut out = vec![C64::default(); n];
            Tridiagonal::new(n).solve(&lower, &diag, &upper, &rhs, &mut out);
            for (a, b) in out.iter().zip(&x) {
                prop_assert!((a - b).norm() < 1e-9);
            }
        }
    }
}
