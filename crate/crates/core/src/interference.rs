//! Electron fringe intensities and their correlation ratio.
//!
//! Each device sees `1 + cos(σ + eφ̂)` with `exp(ieφ̂(t)) = D(iq e^{iωt})`.
//! Numeric results come from traces of the expanded operator
//! `1 + ½(e^{iσ} D(λ) + e^{−iσ} D(−λ))` against the field state; the closed
//! forms for the separable and entangled examples are checked against them.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{ComplexScalar, FockOperator, Mode};
use crate::states::{StateTerm, TwoModeState};
use crate::weyl::{expectation_product, Evaluator, WeylValue};

pub const DEFAULT_OMEGA_1: f64 = 1.2e-4;
pub const DEFAULT_OMEGA_2: f64 = 1e-4;
pub const DEFAULT_XI: f64 = 1.0;

/// Imaginary residue above which a joint intensity is rejected.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;
/// `|I_A · I_B|` below this makes a ratio undefined.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Physical parameters of one field mode in natural units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    omega: f64,
    xi: f64,
    charge: f64,
    q: f64,
}

impl ModeParams {
    /// `q = ξ e / √2`.
    pub fn new(omega: f64, xi: f64, charge: f64) -> Result<Self> {
        let q = xi * charge * FRAC_1_SQRT_2;
        Self::checked(omega, xi, charge, q)
    }

    /// Parameters with coupling `q` set directly and `ξ = 1`.
    pub fn with_q(omega: f64, q: f64) -> Result<Self> {
        Self::checked(omega, DEFAULT_XI, q * SQRT_2, q)
    }

    /// Coupling `q` with an explicit loop constant; the charge follows.
    pub fn with_q_xi(omega: f64, q: f64, xi: f64) -> Result<Self> {
        if !(xi > 0.0) {
            return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
        }
        Self::checked(omega, xi, q * SQRT_2 / xi, q)
    }

    fn checked(omega: f64, xi: f64, charge: f64, q: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidArgument(format!("xi must be positive, got {xi}")));
        }
        if !(q >= 0.0 && q.is_finite() && charge.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "coupling q = xi*charge/sqrt2 must be finite and >= 0, got {q}"
            )));
        }
        Ok(Self { omega, xi, charge, q })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn charge(&self) -> f64 {
        self.charge
    }
    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Phase difference between the two electron paths at a screen point,
/// in radians.
///
/// Parses plain radians (`"0.3"`) or multiples of π (`"-1.1pi"`, `"pi"`,
/// `"0.5π"`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ScreenPhase(pub f64);

impl ScreenPhase {
    pub fn from_pi_units(k: f64) -> Self {
        Self(k * PI)
    }

    pub fn radians(self) -> f64 {
        self.0
    }
}

impl From<f64> for ScreenPhase {
    fn from(r: f64) -> Self {
        Self(r)
    }
}

impl FromStr for ScreenPhase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_angle(s).map(ScreenPhase)
    }
}

/// Parses a real number with an optional `pi`/`π` suffix.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse angle {s:?}"));
    let stripped = t
        .strip_suffix("pi")
        .or_else(|| t.strip_suffix("PI"))
        .or_else(|| t.strip_suffix('π'));
    let value = match stripped {
        Some(coef) => {
            let coef = coef.trim().trim_end_matches('*');
            let k = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c.parse::<f64>().map_err(|_| bad())?,
            };
            k * PI
        }
        None => t.parse::<f64>().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// Both modes, the field state, and the observation time.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub mode_a: ModeParams,
    pub mode_b: ModeParams,
    pub state: TwoModeState,
    pub time: f64,
}

impl ExperimentConfig {
    pub fn new(mode_a: ModeParams, mode_b: ModeParams, state: TwoModeState, time: f64) -> Result<Self> {
        if !time.is_finite() {
            return Err(Error::InvalidArgument(format!("time must be finite, got {time}")));
        }
        Ok(Self {
            mode_a,
            mode_b,
            state,
            time,
        })
    }
}

/// `λ = iq e^{iωt}`.
pub fn lambda_of(params: &ModeParams, time: f64) -> ComplexScalar {
    let (s, c) = (params.omega * time).sin_cos();
    Complex64::new(-params.q * s, params.q * c)
}

fn intensity_from_weyl(w: &WeylValue, sigma: f64) -> f64 {
    1.0 + w.magnitude * (sigma + w.phase).cos()
}

/// `I(σ) = 1 + |W̃(λ)| cos(σ + arg W̃(λ))` for a single-mode state.
pub fn intensity_single(rho_mode: &FockOperator, sigma: f64, params: &ModeParams, time: f64) -> Result<f64> {
    intensity_single_with(&Evaluator::default(), rho_mode, sigma, params, time)
}

pub fn intensity_single_with(
    ev: &Evaluator,
    rho_mode: &FockOperator,
    sigma: f64,
    params: &ModeParams,
    time: f64,
) -> Result<f64> {
    let w = ev.weyl_single(rho_mode, lambda_of(params, time))?;
    Ok(intensity_from_weyl(&w, sigma))
}

/// Numeric-trace view of one configuration, with displacement blocks and
/// marginal Weyl values computed once for reuse across screen points.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    terms: Vec<StateTerm>,
    d_a: FockOperator,
    d_a_neg: FockOperator,
    d_b: FockOperator,
    d_b_neg: FockOperator,
    weyl_a: WeylValue,
    weyl_b: WeylValue,
    trunc_dim: usize,
}

impl PreparedExperiment {
    pub fn new(config: &ExperimentConfig, ev: &Evaluator) -> Result<Self> {
        Self::from_state(&config.state, &config.mode_a, &config.mode_b, config.time, ev)
    }

    /// Same as [`PreparedExperiment::new`] without owning the state.
    pub fn from_state(
        rho: &TwoModeState,
        mode_a: &ModeParams,
        mode_b: &ModeParams,
        time: f64,
        ev: &Evaluator,
    ) -> Result<Self> {
        if !time.is_finite() {
            return Err(Error::InvalidArgument(format!("time must be finite, got {time}")));
        }
        let (sa, sb) = rho.support();
        let sa = sa.max(2).min(rho.dim_a());
        let sb = sb.max(2).min(rho.dim_b());
        let la = lambda_of(mode_a, time);
        let lb = lambda_of(mode_b, time);
        let d_a = ev.displacement_block(la, sa)?;
        let d_a_neg = ev.displacement_block(-la, sa)?;
        let d_b = ev.displacement_block(lb, sb)?;
        let d_b_neg = ev.displacement_block(-lb, sb)?;
        let rho_a = rho.marginal(Mode::A)?;
        let rho_b = rho.marginal(Mode::B)?;
        let weyl_a = ev.weyl_single(&rho_a, la)?;
        let weyl_b = ev.weyl_single(&rho_b, lb)?;
        let trunc_dim = [d_a.trunc_dim, d_a_neg.trunc_dim, d_b.trunc_dim, d_b_neg.trunc_dim]
            .into_iter()
            .max()
            .unwrap_or(0)
            .max(rho.dim_a())
            .max(rho.dim_b());
        Ok(Self {
            terms: rho.terms().to_vec(),
            d_a: d_a.op,
            d_a_neg: d_a_neg.op,
            d_b: d_b.op,
            d_b_neg: d_b_neg.op,
            weyl_a,
            weyl_b,
            trunc_dim,
        })
    }

    /// Largest truncation dimension used by any displacement block or by
    /// the state embedding.
    pub fn trunc_dim(&self) -> usize {
        self.trunc_dim
    }

    pub fn weyl_a(&self) -> WeylValue {
        self.weyl_a
    }

    pub fn weyl_b(&self) -> WeylValue {
        self.weyl_b
    }

    /// `Tr[ρ_A D(λ_A)]`-based intensity in device A.
    pub fn single_a(&self, sigma_a: f64) -> f64 {
        intensity_from_weyl(&self.weyl_a, sigma_a)
    }

    pub fn single_b(&self, sigma_b: f64) -> f64 {
        intensity_from_weyl(&self.weyl_b, sigma_b)
    }

    /// `Tr{ρ [1 + cos(σ_A + eφ̂_A)] ⊗ [1 + cos(σ_B + eφ̂_B)]}`.
    pub fn joint(&self, sigma_a: f64, sigma_b: f64) -> Result<f64> {
        let ca = fringe_operator(&self.d_a, &self.d_a_neg, sigma_a);
        let cb = fringe_operator(&self.d_b, &self.d_b_neg, sigma_b);
        let z = expectation_product(&self.terms, &ca, &cb);
        if z.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::Consistency(format!(
                "joint intensity has imaginary residue {:e} at sigma_a={sigma_a}, sigma_b={sigma_b}",
                z.im
            )));
        }
        Ok(z.re)
    }

    /// `R = I(σ_A, σ_B) / (I_A(σ_A) I_B(σ_B))`.
    pub fn ratio(&self, sigma_a: f64, sigma_b: f64) -> Result<f64> {
        let den = self.single_a(sigma_a) * self.single_b(sigma_b);
        if den.abs() < DEGENERACY_TOL {
            return Err(Error::Degenerate {
                sigma_a,
                sigma_b,
                detail: format!("I_A * I_B = {den:e}"),
            });
        }
        Ok(self.joint(sigma_a, sigma_b)? / den)
    }
}

/// `1 + ½(e^{iσ} D(λ) + e^{−iσ} D(−λ))`, the operator `1 + cos(σ + eφ̂)`.
fn fringe_operator(d: &FockOperator, d_neg: &FockOperator, sigma: f64) -> FockOperator {
    let up = Complex64::from_polar(0.5, sigma);
    let down = Complex64::from_polar(0.5, -sigma);
    let n = d.dim();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        Complex64::new(id, 0.0) + up * d.get(i, j) + down * d_neg.get(i, j)
    });
    FockOperator::from_matrix(m).expect("fringe operator has the shape of its inputs")
}

/// Joint intensity by direct trace against the field state.
pub fn intensity_joint_numeric(config: &ExperimentConfig, sigma_a: f64, sigma_b: f64) -> Result<f64> {
    PreparedExperiment::new(config, &Evaluator::default())?.joint(sigma_a, sigma_b)
}

/// Correlation ratio from numeric traces on `ρ`, `ρ_A` and `ρ_B`.
pub fn ratio(config: &ExperimentConfig, sigma_a: f64, sigma_b: f64) -> Result<f64> {
    PreparedExperiment::new(config, &Evaluator::default())?.ratio(sigma_a, sigma_b)
}

/// `α = (2 − q²)/2 · e^{−q²/2}`, the single-device visibility for the
/// separable and entangled examples.
pub fn alpha(q: f64) -> f64 {
    let q2 = q * q;
    0.5 * (2.0 - q2) * (-0.5 * q2).exp()
}

/// `β = (1 − q²)/2 · e^{−q²}`.
pub fn beta(q: f64) -> f64 {
    let q2 = q * q;
    0.5 * (1.0 - q2) * (-q2).exp()
}

/// `1 + α cos σ`.
pub fn intensity_single_closed(sigma: f64, q: f64) -> f64 {
    1.0 + alpha(q) * sigma.cos()
}

/// `1 + α(cos σ_A + cos σ_B) + 2β cos σ_A cos σ_B`.
pub fn intensity_joint_sep_closed(sigma_a: f64, sigma_b: f64, q: f64) -> f64 {
    let (ca, cb) = (sigma_a.cos(), sigma_b.cos());
    1.0 + alpha(q) * (ca + cb) + 2.0 * beta(q) * ca * cb
}

/// Coherence contribution of the entangled state,
/// `q² e^{−q²} sin σ_A sin σ_B cos[(ω₁ − ω₂)t]`.
pub fn entangled_cross_term(sigma_a: f64, sigma_b: f64, q: f64, omega1: f64, omega2: f64, time: f64) -> f64 {
    let q2 = q * q;
    q2 * (-q2).exp() * sigma_a.sin() * sigma_b.sin() * ((omega1 - omega2) * time).cos()
}

/// `I_sep + q² e^{−q²} sin σ_A sin σ_B cos[(ω₁ − ω₂)t]`.
pub fn intensity_joint_ent_closed(
    sigma_a: f64,
    sigma_b: f64,
    q: f64,
    omega1: f64,
    omega2: f64,
    time: f64,
) -> f64 {
    intensity_joint_sep_closed(sigma_a, sigma_b, q)
        + entangled_cross_term(sigma_a, sigma_b, q, omega1, omega2, time)
}

fn closed_denominator(sigma_a: f64, sigma_b: f64, q: f64) -> Result<f64> {
    let den = intensity_single_closed(sigma_a, q) * intensity_single_closed(sigma_b, q);
    if den.abs() < DEGENERACY_TOL {
        return Err(Error::Degenerate {
            sigma_a,
            sigma_b,
            detail: format!("(1 + α cos σ_A)(1 + α cos σ_B) = {den:e}"),
        });
    }
    Ok(den)
}

pub fn ratio_sep_closed(sigma_a: f64, sigma_b: f64, q: f64) -> Result<f64> {
    let den = closed_denominator(sigma_a, sigma_b, q)?;
    Ok(intensity_joint_sep_closed(sigma_a, sigma_b, q) / den)
}

/// `R_sep + q² e^{−q²} sin σ_A sin σ_B cos[(ω₁ − ω₂)t] / [(1 + α cos σ_A)(1 + α cos σ_B)]`.
pub fn ratio_ent_closed(
    sigma_a: f64,
    sigma_b: f64,
    q: f64,
    omega1: f64,
    omega2: f64,
    time: f64,
) -> Result<f64> {
    let den = closed_denominator(sigma_a, sigma_b, q)?;
    Ok(ratio_sep_closed(sigma_a, sigma_b, q)?
        + entangled_cross_term(sigma_a, sigma_b, q, omega1, omega2, time) / den)
}

/// `((1 − 2α + 2β)/(1 − α)², (1 + 2α + 2β)/(1 + α)²)`, the values of
/// `R_sep` at `(π, π)` and `(0, 0)`.
///
/// Evaluated through the factorizations in `u = q²/2`, `E = e^{−u}`:
/// `1 − 2α + 2β = (1 − E)(1 − E + 2uE)`, `1 − α = (1 − E) + uE`,
/// `1 + 2α + 2β = (1 + E)(1 + E − 2uE)`, `1 + α = 1 + E − uE`,
/// so the lower value stays accurate as `q → 0⁺` where it tends to ¾.
pub fn rsep_bounds(q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::Degenerate {
            sigma_a: PI,
            sigma_b: PI,
            detail: format!("lower bound denominator (1 − α)² vanishes at q = {q}"),
        });
    }
    let u = 0.5 * q * q;
    let e = (-u).exp();
    let one_minus_e = -(-u).exp_m1();
    let lower = one_minus_e * (one_minus_e + 2.0 * u * e) / (one_minus_e + u * e).powi(2);
    let upper = (1.0 + e) * (1.0 + e - 2.0 * u * e) / (1.0 + e - u * e).powi(2);
    Ok((lower, upper))
}

/// A screen point with the value of the quantity there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub sigma_a: f64,
    pub sigma_b: f64,
    pub value: f64,
}

/// `R_sep` at its axis stationary points `(0,0)`, `(0,π)`, `(π,0)`, `(π,π)`.
pub fn rsep_stationary_values(q: f64) -> Result<[Extremum; 4]> {
    let pts = [(0.0, 0.0), (0.0, PI), (PI, 0.0), (PI, PI)];
    let mut out = [Extremum {
        sigma_a: 0.0,
        sigma_b: 0.0,
        value: 0.0,
    }; 4];
    for (slot, (a, b)) in out.iter_mut().zip(pts) {
        *slot = Extremum {
            sigma_a: a,
            sigma_b: b,
            value: ratio_sep_closed(a, b, q)?,
        };
    }
    Ok(out)
}

/// Global extrema of `R_sep` over `[−2π, 2π]²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsepExtrema {
    pub min: Extremum,
    pub max: Extremum,
}

/// `n` evenly spaced screen phases from `start_pi·π` to `end_pi·π`
/// inclusive. Positions are computed in units of π first so that integer
/// multiples of π land exactly on `k * PI`.
pub fn screen_axis(start_pi: f64, end_pi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start_pi * PI],
        _ => (0..n)
            .map(|k| (start_pi + (end_pi - start_pi) * k as f64 / (n - 1) as f64) * PI)
            .collect(),
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Minimizes a unimodal `f` on `[lo, hi]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, iters: usize) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn refine(start: Extremum, step: f64, sign: f64, q: f64) -> Extremum {
    let f = |a: f64, b: f64| sign * ratio_sep_closed(a, b, q).unwrap_or(f64::INFINITY);
    let mut best = start;
    let mut best_obj = sign * start.value;
    for _ in 0..4 {
        let b = best.sigma_b;
        let (a, fa) = golden_section(|x| f(x, b), best.sigma_a - step, best.sigma_a + step, 80);
        if fa < best_obj {
            best = Extremum { sigma_a: a, sigma_b: b, value: sign * fa };
            best_obj = fa;
        }
        let a = best.sigma_a;
        let (b, fb) = golden_section(|y| f(a, y), best.sigma_b - step, best.sigma_b + step, 80);
        if fb < best_obj {
            best = Extremum { sigma_a: a, sigma_b: b, value: sign * fb };
            best_obj = fb;
        }
    }
    best
}

/// Exhaustive `grid_n × grid_n` scan of `R_sep` over `[−2π, 2π]²`, then
/// coordinate-wise golden-section refinement around the best grid points.
///
/// With `grid_n − 1` divisible by 4 the grid contains `0, ±π, ±2π`.
/// Refinement only replaces a grid point when it strictly improves it.
pub fn rsep_extrema(q: f64, grid_n: usize) -> Result<RsepExtrema> {
    if grid_n < 2 {
        return Err(Error::InvalidArgument(format!("grid_n must be >= 2, got {grid_n}")));
    }
    let axis = screen_axis(-2.0, 2.0, grid_n);
    let mut min = Extremum { sigma_a: 0.0, sigma_b: 0.0, value: f64::INFINITY };
    let mut max = Extremum { sigma_a: 0.0, sigma_b: 0.0, value: f64::NEG_INFINITY };
    for &a in &axis {
        for &b in &axis {
            let v = ratio_sep_closed(a, b, q)?;
            if v < min.value {
                min = Extremum { sigma_a: a, sigma_b: b, value: v };
            }
            if v > max.value {
                max = Extremum { sigma_a: a, sigma_b: b, value: v };
            }
        }
    }
    let step = 4.0 * PI / (grid_n - 1) as f64;
    Ok(RsepExtrema {
        min: refine(min, step, 1.0, q),
        max: refine(max, step, -1.0, q),
    })
}

/// Which bound `calibrate_q` inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// `(1 − 2α + 2β)/(1 − α)²`, the value at `(π, π)`.
    Min,
    /// `(1 + 2α + 2β)/(1 + α)²`, the value at `(0, 0)`.
    Max,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Min => "min",
            Self::Max => "max",
        })
    }
}

impl FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Self::Min),
            "max" => Ok(Self::Max),
            other => Err(Error::InvalidArgument(format!(
                "bound must be 'min' or 'max', got {other:?}"
            ))),
        }
    }
}

/// Outcome of inverting one bound for `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub which: BoundKind,
    pub target: f64,
    pub q: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Calibration {
    /// The bound that was matched.
    pub fn matched(&self) -> f64 {
        match self.which {
            BoundKind::Min => self.lower,
            BoundKind::Max => self.upper,
        }
    }

    /// The bound that was not matched.
    pub fn other(&self) -> f64 {
        match self.which {
            BoundKind::Min => self.upper,
            BoundKind::Max => self.lower,
        }
    }
}

pub const CALIBRATION_Q_MAX: f64 = 2.0;
pub const CALIBRATION_TOL: f64 = 1e-9;
const CALIBRATION_SCAN: usize = 4000;

fn bound_value(q: f64, which: BoundKind) -> f64 {
    let (lo, hi) = rsep_bounds(q).expect("q > 0 on the calibration bracket");
    match which {
        BoundKind::Min => lo,
        BoundKind::Max => hi,
    }
}

/// Finds `q ∈ (0, 2]` with the chosen bound equal to `target`.
///
/// The bracket is scanned on `q_k = 2 (k/K)²` (dense near zero, where the
/// bounds approach their `q → 0⁺` limits ¾ and 1), the first sign change
/// is bisected to machine precision, and the result is accepted when the
/// bound matches `target` to 1e−9.
pub fn calibrate_q(target: f64, which: BoundKind) -> Result<Calibration> {
    if !target.is_finite() {
        return Err(Error::InvalidArgument(format!("target must be finite, got {target}")));
    }
    let qs: Vec<f64> = (1..=CALIBRATION_SCAN)
        .map(|k| {
            let s = k as f64 / CALIBRATION_SCAN as f64;
            CALIBRATION_Q_MAX * s * s
        })
        .collect();
    let vals: Vec<f64> = qs.iter().map(|&q| bound_value(q, which)).collect();
    let low = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let high = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let g = |v: f64| v - target;
    let bracket = (0..qs.len() - 1).find_map(|k| {
        let (ga, gb) = (g(vals[k]), g(vals[k + 1]));
        if ga == 0.0 {
            Some((qs[k], qs[k]))
        } else if ga.signum() != gb.signum() {
            Some((qs[k], qs[k + 1]))
        } else {
            None
        }
    });
    let (mut a, mut b) = bracket.ok_or(Error::NoRoot { target, low, high })?;
    let mut ga = g(bound_value(a, which));
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(bound_value(mid, which));
        if gm == 0.0 {
            a = mid;
            b = mid;
            break;
        }
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
        } else {
            b = mid;
        }
    }
    let q = if g(bound_value(a, which)).abs() <= g(bound_value(b, which)).abs() { a } else { b };
    let (lower, upper) = rsep_bounds(q)?;
    let cal = Calibration { which, target, q, lower, upper };
    if (cal.matched() - target).abs() > CALIBRATION_TOL {
        return Err(Error::NoRoot { target, low, high });
    }
    Ok(cal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_values() {
        let p = ModeParams::with_q(2.0, 0.7).unwrap();
        let l0 = lambda_of(&p, 0.0);
        assert_eq!(l0.re, 0.0);
        assert_eq!(l0.im, 0.7);
        let l = lambda_of(&p, PI / 4.0);
        assert!((l.re + 0.7).abs() < 1e-15);
        assert!(l.im.abs() < 1e-15);
    }

    #[test]
    fn mode_params_consistency() {
        let p = ModeParams::new(1e-4, 1.0, 0.5).unwrap();
        assert!((p.q() - 0.5 / SQRT_2).abs() < 1e-14);
        let p = ModeParams::with_q(1e-4, 0.3).unwrap();
        assert!((p.xi() * p.charge() * FRAC_1_SQRT_2 - p.q()).abs() < 1e-14);
        let p = ModeParams::with_q_xi(1e-4, 0.3, 2.5).unwrap();
        assert!((p.xi() * p.charge() * FRAC_1_SQRT_2 - p.q()).abs() < 1e-14);
        assert!(ModeParams::with_q(0.0, 0.3).is_err());
        assert!(ModeParams::with_q(1.0, -0.3).is_err());
        assert!(ModeParams::new(1.0, -1.0, 0.3).is_err());
    }

    #[test]
    fn angle_parsing() {
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!((parse_angle("-1.1pi").unwrap() + 1.1 * PI).abs() < 1e-15);
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("2π").unwrap(), 2.0 * PI);
        assert!(parse_angle("abc").is_err());
        assert!(parse_angle("1.2.3pi").is_err());
        assert!("0.98pi".parse::<ScreenPhase>().is_ok());
    }

    #[test]
    fn alpha_beta_values() {
        assert_eq!(alpha(0.0), 1.0);
        assert_eq!(beta(0.0), 0.5);
        assert_eq!(beta(1.0), 0.0);
        assert!((alpha(1.0) - 0.303_265_329_856_316_7).abs() < 1e-15);
        for q in [0.1, 0.5, 1.0, 1.9] {
            assert!(alpha(q) < 1.0);
        }
    }

    #[test]
    fn closed_form_specials() {
        let h = PI / 2.0;
        assert!((intensity_joint_sep_closed(h, h, 0.6) - 1.0).abs() < 1e-15);
        for &(a, b) in &[(0.3, -1.2), (2.0, 0.1)] {
            let want = (1.0 + f64::cos(a)) * (1.0 + f64::cos(b));
            assert!((intensity_joint_sep_closed(a, b, 0.0) - want).abs() < 1e-14);
        }
        // sin σ_A = 0 removes the cross term at every time.
        for t in [0.0, 1e3, 3.3e4] {
            let d = intensity_joint_ent_closed(0.0, 1.1, 0.5, 1.2e-4, 1e-4, t)
                - intensity_joint_sep_closed(0.0, 1.1, 0.5);
            assert_eq!(d, 0.0);
        }
        // Equal frequencies: constant offset.
        let a = intensity_joint_ent_closed(0.4, 1.1, 0.5, 1e-4, 1e-4, 0.0);
        let b = intensity_joint_ent_closed(0.4, 1.1, 0.5, 1e-4, 1e-4, 7.7e5);
        assert_eq!(a, b);
        let q2 = 0.25_f64;
        let offset = q2 * (-q2).exp() * 0.4_f64.sin() * 1.1_f64.sin();
        assert!((a - intensity_joint_sep_closed(0.4, 1.1, 0.5) - offset).abs() < 1e-15);
    }

    #[test]
    fn ratio_at_origin_is_upper_bound() {
        let q = 0.5;
        let (_, hi) = rsep_bounds(q).unwrap();
        let a = alpha(q);
        let b = beta(q);
        let naive = (1.0 + 2.0 * a + 2.0 * b) / (1.0 + a).powi(2);
        assert!((hi - naive).abs() < 1e-14);
        assert!((ratio_sep_closed(0.0, 0.0, q).unwrap() - hi).abs() < 1e-14);
        let e = ratio_ent_closed(0.0, 0.0, q, 1.2e-4, 1e-4, 123.0).unwrap();
        assert!((e - hi).abs() < 1e-14);
    }

    #[test]
    fn degenerate_denominator() {
        assert!(matches!(
            ratio_sep_closed(PI, 0.3, 0.0),
            Err(Error::Degenerate { .. })
        ));
        assert!(rsep_bounds(0.0).is_err());
    }

    #[test]
    fn stable_lower_bound_limit() {
        for q2 in [1e-4, 1e-6, 1e-10, 1e-16] {
            let (lo, hi) = rsep_bounds(f64::sqrt(q2)).unwrap();
            assert!((lo - 0.75).abs() < 0.1 * q2 + 1e-15, "{q2}: {lo}");
            assert!(hi <= 1.0);
        }
    }

    #[test]
    fn axis_hits_pi_multiples() {
        let ax = screen_axis(-2.0, 2.0, 101);
        assert_eq!(ax.len(), 101);
        assert_eq!(ax[0], -2.0 * PI);
        assert_eq!(ax[25], -PI);
        assert_eq!(ax[50], 0.0);
        assert_eq!(ax[75], PI);
        assert_eq!(ax[100], 2.0 * PI);
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3) + 1.0, -1.0, 2.0, 100);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn calibration_round_trip() {
        for (which, q) in [(BoundKind::Min, 0.4), (BoundKind::Max, 0.8)] {
            let (lo, hi) = rsep_bounds(q).unwrap();
            let target = if which == BoundKind::Min { lo } else { hi };
            let cal = calibrate_q(target, which).unwrap();
            assert!((cal.q - q).abs() < 1e-7, "{which}: {}", cal.q);
            assert!((cal.matched() - target).abs() <= CALIBRATION_TOL);
        }
    }

    #[test]
    fn calibration_no_root() {
        match calibrate_q(0.5, BoundKind::Min) {
            Err(Error::NoRoot { low, .. }) => assert!((low - 0.75).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
        assert!(calibrate_q(1.5, BoundKind::Max).is_err());
    }
}
