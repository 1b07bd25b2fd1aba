//! Small combinatorial helpers shared by the Fock-space code.

/// `ln k!` for k = 0..=n.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// `ln C(n, k)` from a precomputed factorial table.
#[inline]
pub(crate) fn ln_binomial(lf: &[f64], n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    lf[n] - lf[k] - lf[n - k]
}

/// `x^k` with the convention `0^0 = 1`.
#[inline]
pub(crate) fn pow_u(x: f64, k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        x.powi(k as i32)
    }
}
