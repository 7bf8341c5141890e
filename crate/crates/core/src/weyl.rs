//! Weyl (characteristic) function `W̃(λ) = Tr[ρ D(λ)]` for one and two
//! modes. Its modulus is the fringe visibility, its argument the fringe
//! shift.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    check_finite, displacement_analytic, displacement_exp, ComplexScalar, FockOperator,
    TruncationPolicy,
};
use crate::states::{StateTerm, TwoModeState};

/// How displacement matrices are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DisplacementMethod {
    /// Exact matrix elements from Laguerre polynomials.
    #[default]
    Analytic,
    /// Matrix exponential of the truncated generator; kept for verification.
    Exponential,
}

/// A Weyl function value with its modulus and phase in `(−π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylValue {
    pub value: ComplexScalar,
    pub magnitude: f64,
    pub phase: f64,
}

impl WeylValue {
    pub fn new(value: ComplexScalar) -> Self {
        let magnitude = value.norm();
        let mut phase = value.im.atan2(value.re);
        if phase <= -std::f64::consts::PI {
            phase = std::f64::consts::PI;
        }
        Self {
            value,
            magnitude,
            phase,
        }
    }
}

/// Displacement block together with the truncation dimension it was
/// accepted at.
#[derive(Debug, Clone)]
pub struct ConvergedBlock {
    pub op: FockOperator,
    pub trunc_dim: usize,
}

/// Truncation policy plus displacement method.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Evaluator {
    pub policy: TruncationPolicy,
    pub method: DisplacementMethod,
}

impl Evaluator {
    pub fn new(policy: TruncationPolicy, method: DisplacementMethod) -> Result<Self> {
        policy.check()?;
        Ok(Self { policy, method })
    }

    /// Upper-left `block×block` corner of `D(λ)`.
    ///
    /// Analytic elements carry no truncation error, so the block is built
    /// directly. The exponential path starts at `max(initial_dim, block)`,
    /// doubles, and accepts once the corner moves by less than `tol`.
    pub fn displacement_block(&self, lambda: ComplexScalar, block: usize) -> Result<ConvergedBlock> {
        check_finite(lambda, "lambda")?;
        let block = block.max(2);
        if block > self.policy.max_dim {
            return Err(Error::Truncation(format!(
                "block {block} exceeds max_dim {}",
                self.policy.max_dim
            )));
        }
        match self.method {
            DisplacementMethod::Analytic => Ok(ConvergedBlock {
                op: displacement_analytic(lambda, block)?,
                trunc_dim: block,
            }),
            DisplacementMethod::Exponential => {
                let mut dim = self.policy.initial_dim.max(block);
                let mut current = displacement_exp(lambda, dim)?.block(block)?;
                let mut last_gap = f64::NAN;
                while dim * 2 <= self.policy.max_dim {
                    let next = displacement_exp(lambda, dim * 2)?.block(block)?;
                    last_gap = current.max_abs_diff(&next);
                    dim *= 2;
                    if last_gap < self.policy.tol {
                        return Ok(ConvergedBlock {
                            op: next,
                            trunc_dim: dim,
                        });
                    }
                    current = next;
                }
                Err(Error::Truncation(format!(
                    "D({lambda}) corner of size {block} not converged to {:e} by dim {dim} (last change {last_gap:e})",
                    self.policy.tol
                )))
            }
        }
    }

    /// `Tr[ρ D(λ)]` for a single-mode density matrix.
    pub fn weyl_single(&self, rho: &FockOperator, lambda: ComplexScalar) -> Result<WeylValue> {
        check_single_density(rho)?;
        let support = single_support(rho);
        let d = self.displacement_block(lambda, support)?;
        Ok(WeylValue::new(trace_product(rho, &d.op, support)))
    }

    /// `Tr[ρ (D(λ_A) ⊗ D(λ_B))]`.
    pub fn weyl_two(
        &self,
        rho: &TwoModeState,
        lambda_a: ComplexScalar,
        lambda_b: ComplexScalar,
    ) -> Result<WeylValue> {
        let (sa, sb) = rho.support();
        let da = self.displacement_block(lambda_a, sa)?;
        let db = self.displacement_block(lambda_b, sb)?;
        Ok(WeylValue::new(expectation_product(rho.terms(), &da.op, &db.op)))
    }
}

pub fn weyl_single(rho: &FockOperator, lambda: ComplexScalar) -> Result<WeylValue> {
    Evaluator::default().weyl_single(rho, lambda)
}

pub fn weyl_two(
    rho: &TwoModeState,
    lambda_a: ComplexScalar,
    lambda_b: ComplexScalar,
) -> Result<WeylValue> {
    Evaluator::default().weyl_two(rho, lambda_a, lambda_b)
}

fn check_single_density(rho: &FockOperator) -> Result<()> {
    let herm = rho.hermiticity_residual();
    if herm > crate::states::HERMITICITY_TOL {
        return Err(Error::Validation {
            invariant: "hermiticity",
            detail: format!("single-mode density residual {herm:e}"),
        });
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > crate::states::TRACE_TOL {
        return Err(Error::Validation {
            invariant: "trace",
            detail: format!("single-mode trace {tr}"),
        });
    }
    Ok(())
}

/// Smallest `s` with `ρ` vanishing outside the upper-left `s×s` block.
pub(crate) fn single_support(rho: &FockOperator) -> usize {
    let n = rho.dim();
    let zero = Complex64::new(0.0, 0.0);
    let mut s = 0;
    for i in 0..n {
        for j in 0..n {
            if rho.get(i, j) != zero {
                s = s.max(i + 1).max(j + 1);
            }
        }
    }
    s.max(2).min(n)
}

/// `Σ_{i,j<support} ρ_ij X_ji`.
pub(crate) fn trace_product(rho: &FockOperator, x: &FockOperator, support: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..support {
        for j in 0..support {
            acc += rho.get(i, j) * x.get(j, i);
        }
    }
    acc
}

/// `Tr[ρ (X ⊗ Y)] = Σ ⟨m n|ρ|p q⟩ X_pm Y_qn` over the nonzero terms of `ρ`.
///
/// `X` and `Y` must cover the per-mode support of the terms.
pub fn expectation_product(terms: &[StateTerm], x: &FockOperator, y: &FockOperator) -> Complex64 {
    terms
        .iter()
        .map(|t| t.value * x.get(t.ket.0, t.bra.0) * y.get(t.ket.1, t.bra.1))
        .sum()
}
