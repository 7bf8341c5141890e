//! Truncated single-mode Fock space: ladder operators, displacement
//! operators, Kronecker products and partial traces.
//!
//! Two-mode index convention: the basis vector `|m⟩⊗|n⟩` sits at row
//! `m * dim_b + n` (mode A slow, mode B fast). Everything else in the crate
//! goes through [`joint_index`] and [`split_index`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::laguerre::{laguerre_upto, ln_factorials};
use crate::states::TwoModeState;

/// Complex amplitude (λ, Weyl values, matrix entries).
pub type ComplexScalar = Complex64;

/// Which of the two field modes an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    A,
    B,
}

/// Row index of `|m⟩⊗|n⟩` in the two-mode basis.
#[inline]
pub fn joint_index(m: usize, n: usize, dim_b: usize) -> usize {
    m * dim_b + n
}

/// Inverse of [`joint_index`].
#[inline]
pub fn split_index(idx: usize, dim_b: usize) -> (usize, usize) {
    (idx / dim_b, idx % dim_b)
}

pub(crate) fn check_finite(z: ComplexScalar, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} is not finite: {z}")))
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "truncated Fock space needs at least |0⟩ and |1⟩",
        });
    }
    Ok(())
}

/// Square complex matrix over `{|0⟩, …, |N−1⟩}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    matrix: DMatrix<Complex64>,
}

impl FockOperator {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Shape(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_dim(matrix.nrows())?;
        if let Some(z) = matrix.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument(format!("non-finite entry {z}")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: DMatrix::identity(dim, dim),
        })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: DMatrix::zeros(dim, dim),
        })
    }

    /// `|n⟩⟨n|`.
    pub fn number_projector(dim: usize, n: usize) -> Result<Self> {
        if n >= dim {
            return Err(Error::Shape(format!("|{n}⟩ outside dimension {dim}")));
        }
        let mut op = Self::zeros(dim)?;
        op.matrix[(n, n)] = Complex64::new(1.0, 0.0);
        Ok(op)
    }

    /// Diagonal operator in the number basis, padded with zeros to `dim`.
    pub fn diagonal(weights: &[f64], dim: usize) -> Result<Self> {
        if weights.len() > dim {
            return Err(Error::Shape(format!(
                "{} weights do not fit dimension {dim}",
                weights.len()
            )));
        }
        let mut op = Self::zeros(dim)?;
        for (k, w) in weights.iter().enumerate() {
            op.matrix[(k, k)] = Complex64::new(*w, 0.0);
        }
        Ok(op)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// `⟨row|Op|col⟩`.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// Upper-left `n×n` block.
    pub fn block(&self, n: usize) -> Result<Self> {
        if n > self.dim() {
            return Err(Error::Shape(format!(
                "block {n} larger than dimension {}",
                self.dim()
            )));
        }
        Self::from_matrix(self.matrix.view((0, 0), (n, n)).into_owned())
    }

    /// Zero-padded copy in a larger space.
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::Shape(format!(
                "cannot embed dimension {} into {dim}",
                self.dim()
            )));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m.view_mut((0, 0), (self.dim(), self.dim()))
            .copy_from(&self.matrix);
        Ok(Self { matrix: m })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.matrix)
    }

    /// Checks Hermiticity, unit trace and positivity of a single-mode
    /// density matrix at the crate-wide tolerances.
    pub fn validate_density(&self) -> Result<()> {
        crate::states::validate_density_matrix(&self.matrix)
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

pub(crate) fn hermiticity_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Adaptive truncation: evaluate at `initial_dim`, double, accept once two
/// successive dimensions agree within `tol`, give up past `max_dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub initial_dim: usize,
    pub max_dim: usize,
    pub tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            initial_dim: 16,
            max_dim: 256,
            tol: 1e-12,
        }
    }
}

impl TruncationPolicy {
    pub fn new(initial_dim: usize, max_dim: usize, tol: f64) -> Result<Self> {
        let p = Self {
            initial_dim,
            max_dim,
            tol,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.initial_dim < 2 || self.initial_dim > self.max_dim {
            return Err(Error::Truncation(format!(
                "need 2 <= initial_dim <= max_dim, got {} and {}",
                self.initial_dim, self.max_dim
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Truncation(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Annihilation operator `â` with `⟨m|â|m+1⟩ = √(m+1)`.
pub fn make_annihilation(dim: usize) -> Result<FockOperator> {
    check_dim(dim)?;
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim - 1 {
        m[(k, k + 1)] = Complex64::new(((k + 1) as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { matrix: m })
}

pub fn make_creation(dim: usize) -> Result<FockOperator> {
    Ok(make_annihilation(dim)?.dagger())
}

/// `â†â`, diagonal with entries `0, 1, …, dim−1`.
pub fn make_number(dim: usize) -> Result<FockOperator> {
    let a = make_annihilation(dim)?;
    a.dagger().matmul(&a)
}

/// `D(λ) = exp(λâ† − λ*â)` by exponentiating the truncated generator.
///
/// Entries near the truncation edge carry truncation error; the upper-left
/// block converges as `dim` grows.
pub fn displacement_exp(lambda: ComplexScalar, dim: usize) -> Result<FockOperator> {
    check_finite(lambda, "lambda")?;
    let a = make_annihilation(dim)?;
    let generator = a.matrix.adjoint() * lambda - &a.matrix * lambda.conj();
    Ok(FockOperator {
        matrix: expm(&generator),
    })
}

/// `D(λ)` from its exact matrix elements,
/// `⟨m|D(λ)|n⟩ = √(n!/m!) λ^(m−n) e^(−|λ|²/2) L_n^(m−n)(|λ|²)` for `m ≥ n`
/// and `√(m!/n!) (−λ*)^(n−m) e^(−|λ|²/2) L_m^(n−m)(|λ|²)` for `m < n`.
pub fn displacement_analytic(lambda: ComplexScalar, dim: usize) -> Result<FockOperator> {
    check_finite(lambda, "lambda")?;
    check_dim(dim)?;
    let r = lambda.norm();
    let x = r * r;
    let ln_fact = ln_factorials(dim);
    let gauss = -0.5 * x;
    let ln_r = r.ln();
    let theta = lambda.arg();
    // (−λ*) = r e^{i(π − θ)}
    let theta_upper = std::f64::consts::PI - theta;

    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for k in 0..dim {
        // k = |m − n|; the lower index runs over 0..dim−k.
        let lag = laguerre_upto(k, x, dim - 1 - k);
        for (low, l) in lag.iter().enumerate() {
            let high = low + k;
            let magnitude = if k == 0 {
                gauss.exp() * l
            } else if r == 0.0 {
                0.0
            } else {
                (0.5 * (ln_fact[low] - ln_fact[high]) + k as f64 * ln_r + gauss).exp() * l
            };
            if k == 0 {
                m[(low, low)] = Complex64::new(magnitude, 0.0);
            } else {
                let kf = k as f64;
                m[(high, low)] = Complex64::from_polar(magnitude, kf * theta);
                m[(low, high)] = Complex64::from_polar(magnitude, kf * theta_upper);
            }
        }
    }
    Ok(FockOperator { matrix: m })
}

/// Kronecker product `a ⊗ b` (A slow, B fast).
pub fn tensor(a: &FockOperator, b: &FockOperator, policy: &TruncationPolicy) -> Result<FockOperator> {
    let dim = a.dim() * b.dim();
    if dim > policy.max_dim {
        return Err(Error::Truncation(format!(
            "tensor product dimension {dim} exceeds max_dim {}",
            policy.max_dim
        )));
    }
    Ok(FockOperator {
        matrix: a.matrix.kronecker(&b.matrix),
    })
}

/// Partial trace of a raw two-mode matrix, keeping `keep`.
pub fn partial_trace_matrix(
    rho: &DMatrix<Complex64>,
    dim_a: usize,
    dim_b: usize,
    keep: Mode,
) -> Result<DMatrix<Complex64>> {
    let n = dim_a * dim_b;
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::Shape(format!(
            "matrix is {}x{}, dims {dim_a}x{dim_b} need {n}x{n}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let out = match keep {
        Mode::A => DMatrix::from_fn(dim_a, dim_a, |m, mp| {
            (0..dim_b)
                .map(|k| rho[(joint_index(m, k, dim_b), joint_index(mp, k, dim_b))])
                .sum()
        }),
        Mode::B => DMatrix::from_fn(dim_b, dim_b, |n, np| {
            (0..dim_a)
                .map(|k| rho[(joint_index(k, n, dim_b), joint_index(k, np, dim_b))])
                .sum()
        }),
    };
    Ok(out)
}

/// Reduced density matrix of `keep`: `ρ_A = Tr_B ρ` or `ρ_B = Tr_A ρ`.
pub fn partial_trace(rho: &TwoModeState, keep: Mode) -> Result<FockOperator> {
    let m = partial_trace_matrix(rho.matrix(), rho.dim_a(), rho.dim_b(), keep)?;
    FockOperator::from_matrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn annihilation_dim2() {
        let a = make_annihilation(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0, 0.0));
        assert_eq!(a.get(0, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 0), c(0.0, 0.0));
        assert_eq!(a.get(1, 1), c(0.0, 0.0));
    }

    #[test]
    fn annihilation_lowers_one() {
        let a = make_annihilation(5).unwrap();
        let mut one = nalgebra::DVector::zeros(5);
        one[1] = c(1.0, 0.0);
        let out = a.matrix() * one;
        assert_eq!(out[0], c(1.0, 0.0));
        assert!(out.iter().skip(1).all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn number_operator_spectrum() {
        let n = make_number(9).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let want = if i == j { i as f64 } else { 0.0 };
                assert!((n.get(i, j) - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rejects_small_dim() {
        assert!(matches!(
            make_annihilation(1),
            Err(Error::InvalidDimension { dim: 1, .. })
        ));
        assert!(displacement_analytic(c(0.1, 0.0), 0).is_err());
    }

    #[test]
    fn rejects_non_finite_lambda() {
        assert!(matches!(
            displacement_exp(c(f64::NAN, 0.0), 4),
            Err(Error::InvalidArgument(_))
        ));
        assert!(displacement_analytic(c(0.0, f64::INFINITY), 4).is_err());
    }

    #[test]
    fn zero_displacement_is_identity() {
        let id = FockOperator::identity(12).unwrap();
        assert!(displacement_exp(c(0.0, 0.0), 12).unwrap().max_abs_diff(&id) == 0.0);
        assert!(displacement_analytic(c(0.0, 0.0), 12).unwrap().max_abs_diff(&id) == 0.0);
    }

    #[test]
    fn low_matrix_elements() {
        // ⟨1|D|1⟩ = e^{−|λ|²/2}(1 − |λ|²), |λ|² = 0.25
        let lam = Complex64::from_polar(0.5, 0.7);
        let d = displacement_analytic(lam, 8).unwrap();
        let want = (-0.125_f64).exp() * 0.75;
        assert!((d.get(1, 1) - c(want, 0.0)).norm() < 1e-15);
        // ⟨0|D|1⟩ = −λ* e^{−|λ|²/2}, λ = 0.2i
        let lam = c(0.0, 0.2);
        let d = displacement_analytic(lam, 8).unwrap();
        let want = -lam.conj() * (-0.02_f64).exp();
        assert!((d.get(0, 1) - want).norm() < 1e-15);
        assert!((d.get(1, 0) - lam * (-0.02_f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn analytic_is_truncation_free() {
        let lam = c(0.4, -0.3);
        let small = displacement_analytic(lam, 6).unwrap();
        let big = displacement_analytic(lam, 40).unwrap().block(6).unwrap();
        assert!(small.max_abs_diff(&big) < 1e-15);
    }

    #[test]
    fn tensor_identity_and_overflow() {
        let i2 = FockOperator::identity(2).unwrap();
        let i4 = tensor(&i2, &i2, &TruncationPolicy::default()).unwrap();
        assert_eq!(i4, FockOperator::identity(4).unwrap());

        let big = FockOperator::identity(17).unwrap();
        assert!(matches!(
            tensor(&big, &big, &TruncationPolicy::default()),
            Err(Error::Truncation(_))
        ));
    }

    #[test]
    fn partial_trace_shape_error() {
        let m = DMatrix::<Complex64>::identity(6, 6);
        assert!(matches!(
            partial_trace_matrix(&m, 2, 2, Mode::A),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn embed_and_block_roundtrip() {
        let d = displacement_analytic(c(0.3, 0.1), 4).unwrap();
        let e = d.embed(9).unwrap();
        assert_eq!(e.dim(), 9);
        assert_eq!(e.block(4).unwrap(), d);
        assert_eq!(e.get(8, 8), c(0.0, 0.0));
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::new(16, 256, 1e-12).is_ok());
        assert!(TruncationPolicy::new(1, 256, 1e-12).is_err());
        assert!(TruncationPolicy::new(32, 16, 1e-12).is_err());
        assert!(TruncationPolicy::new(16, 256, 0.0).is_err());
    }
}
