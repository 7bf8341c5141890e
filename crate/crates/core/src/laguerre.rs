//! Generalized Laguerre polynomials and log-factorials for the analytic
//! displacement matrix elements.

/// `L_0^(k)(x) ..= L_n_max^(k)(x)` by the upward three-term recurrence in `n`.
pub fn laguerre_upto(order: usize, x: f64, n_max: usize) -> Vec<f64> {
    let k = order as f64;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + k - x);
    for n in 1..n_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + k - x) * out[n] - (nf + k) * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// `ln(n!)` for `n = 0..=n_max`, i.e. `lnΓ(n + 1)`.
///
/// Summed from `ln k` so small arguments are exact (`ln 0! = ln 1! = 0`).
pub fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0_f64;
    out.push(0.0);
    for k in 1..=n_max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}
