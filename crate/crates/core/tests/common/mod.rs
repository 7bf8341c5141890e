//! Reference computations that stay independent of the library paths they
//! check: dense matrices, raw power series, explicit index loops.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense `â` built entry by entry.
pub fn annihilation(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

/// `exp(λâ† − λ*â)` by the unscaled Taylor series, summed until terms stop
/// changing the sum.
pub fn displacement_power_series(lambda: Complex64, dim: usize) -> DMatrix<Complex64> {
    let a = annihilation(dim);
    let g = a.adjoint() * lambda - &a * lambda.conj();
    let mut sum = DMatrix::<Complex64>::identity(dim, dim);
    let mut term = DMatrix::<Complex64>::identity(dim, dim);
    for k in 1..400 {
        term = &term * &g / c(k as f64, 0.0);
        sum += &term;
        if term.iter().all(|z| z.norm() < 1e-30) {
            break;
        }
    }
    sum
}

/// `1 + ½(e^{iσ} D + e^{−iσ} D⁻)`.
pub fn fringe_dense(d: &DMatrix<Complex64>, d_neg: &DMatrix<Complex64>, sigma: f64) -> DMatrix<Complex64> {
    let n = d.nrows();
    DMatrix::identity(n, n) + d * Complex64::from_polar(0.5, sigma) + d_neg * Complex64::from_polar(0.5, -sigma)
}

/// `Tr[ρ M]` by dense multiplication.
pub fn dense_trace(rho: &DMatrix<Complex64>, m: &DMatrix<Complex64>) -> Complex64 {
    (rho * m).trace()
}

/// `ρ_A` by explicit contraction with `|m n⟩` at row `m * dim_b + n`.
pub fn reduce_to_a(rho: &DMatrix<Complex64>, dim_a: usize, dim_b: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(dim_a, dim_a);
    for m in 0..dim_a {
        for mp in 0..dim_a {
            for n in 0..dim_b {
                out[(m, mp)] += rho[(m * dim_b + n, mp * dim_b + n)];
            }
        }
    }
    out
}

pub fn max_gap(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// The 4×4 partial transpose of `|S⟩⟨S|` on `{|00⟩, |01⟩, |10⟩, |11⟩}` written
/// out by hand, for an eigenvalue oracle.
pub fn singlet_like_partial_transpose() -> DMatrix<Complex64> {
    // ρ_ent has ½ at (01,01), (10,10), (01,10), (10,01).
    // Transposing mode B maps (m n, m' n') → (m n', m' n):
    // (01,10) → (00,11), (10,01) → (11,00).
    let mut m = DMatrix::zeros(4, 4);
    m[(1, 1)] = c(0.5, 0.0);
    m[(2, 2)] = c(0.5, 0.0);
    m[(0, 3)] = c(0.5, 0.0);
    m[(3, 0)] = c(0.5, 0.0);
    m
}
