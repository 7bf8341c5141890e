//! Matrix exponential by scaling and squaring with a Taylor core.

use nalgebra::DMatrix;
use num_complex::Complex64;

const TARGET_NORM: f64 = 0.5;
const MAX_TERMS: usize = 64;

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a square complex matrix.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, the
/// Taylor series is summed until the next term is below machine precision
/// relative to the partial sum, and the result is squared `s` times.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    assert!(a.is_square(), "expm requires a square matrix");
    let n = a.nrows();
    let norm = norm1(a);
    let squarings = if norm > TARGET_NORM {
        (norm / TARGET_NORM).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * Complex64::new(2f64.powi(-squarings), 0.0);

    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=MAX_TERMS {
        term = (&term * &scaled) / Complex64::new(k as f64, 0.0);
        sum += &term;
        if norm1(&term) <= f64::EPSILON * 1e-2 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
