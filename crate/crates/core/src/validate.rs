//! Invariant suite behind the `validate` command.
//!
//! Each check reports its worst residual against a fixed tolerance. The
//! fault-injection option swaps the entangled state used by the numeric
//! traces for one with flipped coherences, which the closed-form comparison
//! must catch.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::fock::{displacement_analytic, displacement_exp, joint_index, FockOperator, Mode};
use crate::interference::{
    intensity_joint_ent_closed, intensity_joint_sep_closed, intensity_single_closed,
    lambda_of, ratio_ent_closed, ratio_sep_closed, rsep_bounds, rsep_stationary_values,
    screen_axis, ModeParams, PreparedExperiment, DEFAULT_OMEGA_1,
    DEFAULT_OMEGA_2,
};
use crate::states::{make_product, make_rho_ent, make_rho_sep, ppt_min_eigenvalue, TwoModeState};
use crate::weyl::{trace_product, Evaluator};

pub const ORACLE_QS: [f64; 4] = [0.1, 0.3, 0.7, 1.0];
pub const BOUND_QS: [f64; 3] = [0.2, 0.5, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    /// Truncation dimensions compared by the convergence check.
    pub dims: Vec<usize>,
    /// Flip the sign of the `ρ_ent` coherences seen by the numeric traces.
    pub perturb: bool,
    /// Per-mode dimension of the states used by the numeric traces.
    pub state_dim: usize,
    pub samples: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            dims: vec![16, 32, 64],
            perturb: false,
            state_dim: 16,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported but not gating.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
    pub note: String,
}

impl CheckOutcome {
    fn gate(name: &str, residual: f64, tolerance: f64, note: impl Into<String>) -> Self {
        let status = if residual <= tolerance && residual.is_finite() {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            name: name.into(),
            status,
            residual,
            tolerance,
            note: note.into(),
        }
    }

    fn error(name: &str, err: impl fmt::Display) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            residual: f64::NAN,
            tolerance: f64::NAN,
            note: format!("error: {err}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<6} {:<52} {:>12} {:>10}  note", "status", "check", "residual", "tol")?;
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "INFO",
            };
            writeln!(
                f,
                "{:<6} {:<52} {:>12.3e} {:>10.1e}  {}",
                tag, c.name, c.residual, c.tolerance, c.note
            )?;
        }
        let failed = self.failures().count();
        if failed == 0 {
            write!(f, "all {} checks passed", self.checks.len())
        } else {
            write!(f, "{failed} of {} checks FAILED", self.checks.len())
        }
    }
}

/// Deterministic points in `[0, 1)^3` (additive recurrence).
pub fn quasi_random_points(n: usize) -> Vec<[f64; 3]> {
    // Generalized golden ratio for three dimensions.
    let g = 1.220_744_084_605_759_5_f64;
    let a = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
    (1..=n)
        .map(|k| {
            let k = k as f64;
            [
                (0.5 + a[0] * k).fract(),
                (0.5 + a[1] * k).fract(),
                (0.5 + a[2] * k).fract(),
            ]
        })
        .collect()
}

/// `ρ_ent` with the coherences `⟨01|ρ|10⟩`, `⟨10|ρ|01⟩` negated.
pub fn flipped_coherence_state(dim: usize) -> Result<TwoModeState> {
    let ent = make_rho_ent(dim)?;
    let mut m: DMatrix<Complex64> = ent.matrix().clone();
    let i = joint_index(0, 1, dim);
    let j = joint_index(1, 0, dim);
    m[(i, j)] = -m[(i, j)];
    m[(j, i)] = -m[(j, i)];
    TwoModeState::new(dim, dim, m, "ent-perturbed")
}

fn modes(q: f64) -> Result<(ModeParams, ModeParams)> {
    Ok((
        ModeParams::with_q(DEFAULT_OMEGA_1, q)?,
        ModeParams::with_q(DEFAULT_OMEGA_2, q)?,
    ))
}

fn prepared(state: &TwoModeState, q: f64, t: f64) -> Result<PreparedExperiment> {
    let (a, b) = modes(q)?;
    PreparedExperiment::from_state(state, &a, &b, t, &Evaluator::default())
}

/// Sample `(σ_A, σ_B, t)` over `[−2π, 2π]² × [0, 2π/|ω₁ − ω₂|)`.
fn sample_point(p: [f64; 3]) -> (f64, f64, f64) {
    let period = TAU / (DEFAULT_OMEGA_1 - DEFAULT_OMEGA_2);
    ((p[0] * 4.0 - 2.0) * PI, (p[1] * 4.0 - 2.0) * PI, p[2] * period)
}

/// Closed forms for single intensity, `I_sep`, `R_sep`, `I_ent`, `R_ent`
/// against numeric traces; returns the worst absolute residual.
pub fn oracle_residual(qs: &[f64], samples: usize, state_dim: usize, perturb: bool) -> Result<f64> {
    let sep = make_rho_sep(state_dim)?;
    let ent = if perturb {
        flipped_coherence_state(state_dim)?
    } else {
        make_rho_ent(state_dim)?
    };
    let (w1, w2) = (DEFAULT_OMEGA_1, DEFAULT_OMEGA_2);
    let mut worst = 0.0_f64;
    for &q in qs {
        for p in quasi_random_points(samples) {
            let (a, b, t) = sample_point(p);
            let ps = prepared(&sep, q, t)?;
            let pe = prepared(&ent, q, t)?;
            let diffs = [
                ps.single_a(a) - intensity_single_closed(a, q),
                ps.single_b(b) - intensity_single_closed(b, q),
                pe.single_a(a) - intensity_single_closed(a, q),
                pe.single_b(b) - intensity_single_closed(b, q),
                ps.joint(a, b)? - intensity_joint_sep_closed(a, b, q),
                ps.ratio(a, b)? - ratio_sep_closed(a, b, q)?,
                pe.joint(a, b)? - intensity_joint_ent_closed(a, b, q, w1, w2, t),
                pe.ratio(a, b)? - ratio_ent_closed(a, b, q, w1, w2, t)?,
            ];
            worst = diffs.iter().fold(worst, |m, d| m.max(d.abs()));
        }
    }
    Ok(worst)
}

/// Product states used for the `R = 1` baseline.
pub fn product_fixtures(dim: usize) -> Result<Vec<TwoModeState>> {
    let vac = FockOperator::number_projector(dim, 0)?;
    let one = FockOperator::number_projector(dim, 1)?;
    let mix_a = FockOperator::diagonal(&[0.5, 0.3, 0.2], dim)?;
    let mix_b = FockOperator::diagonal(&[0.1, 0.6, 0.25, 0.05], dim)?;
    Ok(vec![
        make_product(&vac, &vac)?,
        make_product(&one, &vac)?,
        make_product(&mix_a, &mix_b)?,
    ])
}

fn factorizable_residual(samples: usize) -> Result<f64> {
    let mut worst = 0.0_f64;
    for state in product_fixtures(4)? {
        for q in ORACLE_QS {
            for p in quasi_random_points(samples) {
                let (a, b, t) = sample_point(p);
                let r = prepared(&state, q, t)?.ratio(a, b)?;
                worst = worst.max((r - 1.0).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest amount by which `R_sep` dips below the lower bound on the grid,
/// and the distance between the grid minimum and the value at `(π, π)`.
fn lower_bound_residual(q: f64, n: usize) -> Result<(f64, f64)> {
    let (lo, _) = rsep_bounds(q)?;
    let axis = screen_axis(-2.0, 2.0, n);
    let mut violation = 0.0_f64;
    let mut grid_min = f64::INFINITY;
    for &a in &axis {
        for &b in &axis {
            let r = ratio_sep_closed(a, b, q)?;
            violation = violation.max(lo - r);
            grid_min = grid_min.min(r);
        }
    }
    let at_pi = ratio_sep_closed(PI, PI, q)?;
    Ok((violation.max(0.0), (grid_min - at_pi).abs().max((at_pi - lo).abs())))
}

/// Grid maximum of `R_sep` and the largest amount it exceeds the
/// `(1 + 2α + 2β)/(1 + α)²` value.
pub fn rsep_grid_max(q: f64, n: usize) -> Result<(f64, f64)> {
    let (_, hi) = rsep_bounds(q)?;
    let axis = screen_axis(-2.0, 2.0, n);
    let mut grid_max = f64::NEG_INFINITY;
    for &a in &axis {
        for &b in &axis {
            grid_max = grid_max.max(ratio_sep_closed(a, b, q)?);
        }
    }
    Ok((grid_max, (grid_max - hi).max(0.0)))
}

fn periodicity_residual(state_dim: usize) -> Result<f64> {
    let (w1, w2) = (DEFAULT_OMEGA_1, DEFAULT_OMEGA_2);
    let ent = make_rho_ent(state_dim)?;
    let mut worst = 0.0_f64;
    for p in quasi_random_points(50) {
        let (a, b, t) = sample_point(p);
        let q = 0.5;
        let pe = prepared(&ent, q, t)?;
        for (da, db) in [(TAU, 0.0), (0.0, TAU)] {
            let pairs = [
                (intensity_joint_sep_closed(a, b, q), intensity_joint_sep_closed(a + da, b + db, q)),
                (
                    intensity_joint_ent_closed(a, b, q, w1, w2, t),
                    intensity_joint_ent_closed(a + da, b + db, q, w1, w2, t),
                ),
                (ratio_sep_closed(a, b, q)?, ratio_sep_closed(a + da, b + db, q)?),
                (
                    ratio_ent_closed(a, b, q, w1, w2, t)?,
                    ratio_ent_closed(a + da, b + db, q, w1, w2, t)?,
                ),
                (pe.joint(a, b)?, pe.joint(a + da, b + db)?),
                (pe.ratio(a, b)?, pe.ratio(a + da, b + db)?),
            ];
            worst = pairs.iter().fold(worst, |m, (x, y)| m.max((x - y).abs()));
        }
    }
    Ok(worst)
}

/// `(1/2π) ∫ I(σ_A, σ_B) dσ_B` by the periodic trapezoidal rule versus
/// `I_A(σ_A)`.
pub fn marginalization_residual(state: &TwoModeState, q: f64, t: f64, nodes: usize) -> Result<f64> {
    let pe = prepared(state, q, t)?;
    let mut worst = 0.0_f64;
    for sigma_a in screen_axis(-1.0, 1.0, 9) {
        let mut acc = 0.0;
        for k in 0..nodes {
            let sb = TAU * k as f64 / nodes as f64;
            acc += pe.joint(sigma_a, sb)?;
        }
        let mean = acc / nodes as f64;
        worst = worst.max((mean - pe.single_a(sigma_a)).abs());
    }
    Ok(worst)
}

fn time_independence_residual(state_dim: usize) -> Result<f64> {
    let sep = make_rho_sep(state_dim)?;
    let mut worst = 0.0_f64;
    for q in ORACLE_QS {
        let p1 = prepared(&sep, q, 0.0)?;
        let p2 = prepared(&sep, q, 7.3e4)?;
        for p in quasi_random_points(20) {
            let (a, b, _) = sample_point(p);
            worst = worst.max((p1.ratio(a, b)? - p2.ratio(a, b)?).abs());
        }
    }
    Ok(worst)
}

/// Fraction of spectral power of `series` outside the DC bin and the
/// `±bin` pair.
pub fn power_outside_bins(series: &[f64], bin: usize) -> f64 {
    let n = series.len();
    let mut buf: Vec<Complex64> = series.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf.iter().map(|z| z.norm_sqr()).collect();
    let total: f64 = power.iter().sum();
    let kept = power[0] + power[bin % n] + if bin % n != 0 { power[n - bin % n] } else { 0.0 };
    ((total - kept) / total).max(0.0)
}

fn spectral_residual() -> Result<f64> {
    let (w1, w2) = (DEFAULT_OMEGA_1, DEFAULT_OMEGA_2);
    let period = TAU / (w1 - w2).abs();
    let n = 1024;
    let (a, b) = (0.98 * PI, -1.1 * PI);
    let mut worst = 0.0_f64;
    for q in ORACLE_QS {
        let series: Vec<f64> = (0..n)
            .map(|k| ratio_ent_closed(a, b, q, w1, w2, period * k as f64 / n as f64))
            .collect::<Result<_>>()?;
        worst = worst.max(power_outside_bins(&series, 1));
    }
    Ok(worst)
}

/// Lambdas on a spiral inside the unit disc.
pub fn unit_disc_lambdas(n: usize) -> Vec<Complex64> {
    quasi_random_points(n)
        .into_iter()
        .map(|p| Complex64::from_polar(p[0].sqrt(), TAU * p[1]))
        .collect()
}

/// Worst entry-wise gap between the two displacement constructions on the
/// upper-left half block.
pub fn displacement_agreement(dim: usize, count: usize) -> Result<f64> {
    let half = dim / 2;
    let mut worst = 0.0_f64;
    for lam in unit_disc_lambdas(count) {
        let e = displacement_exp(lam, dim)?.block(half)?;
        let a = displacement_analytic(lam, dim)?.block(half)?;
        worst = worst.max(e.max_abs_diff(&a));
    }
    Ok(worst)
}

/// Weyl values of the `ρ_sep` marginal and the vacuum computed with the
/// exponential displacement at each truncation dimension; returns the
/// largest spread across dimensions and against the analytic path.
pub fn truncation_spread(dims: &[usize], qs: &[f64]) -> Result<f64> {
    let marg = make_rho_sep(2)?.marginal(Mode::A)?;
    let vac = FockOperator::number_projector(2, 0)?;
    let mut worst = 0.0_f64;
    for &q in qs {
        let params = ModeParams::with_q(DEFAULT_OMEGA_1, q)?;
        for t in [0.0, 1.1e4, 3.3e4] {
            let lam = lambda_of(&params, t);
            let analytic = displacement_analytic(lam, 2)?;
            for rho in [&marg, &vac] {
                let reference = trace_product(rho, &analytic, 2);
                for &d in dims {
                    let blk = displacement_exp(lam, d)?.block(2)?;
                    worst = worst.max((trace_product(rho, &blk, 2) - reference).norm());
                }
            }
        }
    }
    Ok(worst)
}

fn state_checks(out: &mut Vec<CheckOutcome>) -> Result<()> {
    let dim = 4;
    let sep = make_rho_sep(dim)?;
    let ent = make_rho_ent(dim)?;
    out.push(CheckOutcome::gate(
        "purity: Tr(rho_sep^2) = 1/2, Tr(rho_ent^2) = 1",
        (sep.purity() - 0.5).abs().max((ent.purity() - 1.0).abs()),
        1e-12,
        "",
    ));
    let sq = ent.matrix() * ent.matrix() - ent.matrix();
    out.push(CheckOutcome::gate(
        "rho_ent is a projector",
        sq.iter().map(|z| z.norm()).fold(0.0, f64::max),
        1e-12,
        "",
    ));
    let mut marg_gap = 0.0_f64;
    for m in [Mode::A, Mode::B] {
        marg_gap = marg_gap.max(sep.marginal(m)?.max_abs_diff(&ent.marginal(m)?));
    }
    out.push(CheckOutcome::gate("marginals of rho_sep and rho_ent agree", marg_gap, 1e-14, ""));
    let mut trace_gap = 0.0_f64;
    for s in [&sep, &ent] {
        for m in [Mode::A, Mode::B] {
            trace_gap = trace_gap.max((s.marginal(m)?.trace() - s.trace()).norm());
        }
    }
    out.push(CheckOutcome::gate("partial trace preserves trace", trace_gap, 1e-14, ""));
    let ppt_sep = ppt_min_eigenvalue(&sep)?;
    let mut ppt_prod = f64::INFINITY;
    for p in product_fixtures(4)? {
        ppt_prod = ppt_prod.min(ppt_min_eigenvalue(&p)?);
    }
    out.push(CheckOutcome::gate(
        "PPT witness >= -1e-10 for rho_sep and products",
        (-ppt_sep.min(ppt_prod)).max(0.0),
        1e-10,
        format!("min eig {:.3e}", ppt_sep.min(ppt_prod)),
    ));
    let ppt_ent = ppt_min_eigenvalue(&ent)?;
    out.push(CheckOutcome::gate(
        "PPT witness of rho_ent = -1/2",
        (ppt_ent + 0.5).abs(),
        1e-10,
        format!("min eig {ppt_ent:.12}"),
    ));
    Ok(())
}

fn weyl_checks(out: &mut Vec<CheckOutcome>) -> Result<()> {
    let ev = Evaluator::default();
    let marg = make_rho_sep(6)?.marginal(Mode::A)?;
    let thermal = FockOperator::diagonal(&[0.55, 0.25, 0.12, 0.08], 6)?;
    let mut excess = 0.0_f64;
    let mut conj_gap = 0.0_f64;
    for p in quasi_random_points(100) {
        let lam = Complex64::from_polar(2.0 * p[0], TAU * p[1]);
        for rho in [&marg, &thermal] {
            let w = ev.weyl_single(rho, lam)?;
            let wm = ev.weyl_single(rho, -lam)?;
            excess = excess.max(w.magnitude - 1.0);
            conj_gap = conj_gap.max((wm.value - w.value.conj()).norm());
        }
    }
    out.push(CheckOutcome::gate("|W(lambda)| <= 1 for |lambda| <= 2", excess.max(0.0), 1e-10, ""));
    out.push(CheckOutcome::gate("W(-lambda) = conj W(lambda)", conj_gap, 1e-14, ""));

    let prod = make_product(&marg.block(4)?, &thermal.block(4)?)?;
    let mut fact_gap = 0.0_f64;
    for p in quasi_random_points(50) {
        let la = Complex64::from_polar(p[0], TAU * p[1]);
        let lb = Complex64::from_polar(p[2], TAU * p[0]);
        let w2 = ev.weyl_two(&prod, la, lb)?;
        let wa = ev.weyl_single(&prod.marginal(Mode::A)?, la)?;
        let wb = ev.weyl_single(&prod.marginal(Mode::B)?, lb)?;
        fact_gap = fact_gap.max((w2.value - wa.value * wb.value).norm());
    }
    out.push(CheckOutcome::gate("weyl_two factorizes on products", fact_gap, 1e-12, ""));
    Ok(())
}

fn push_result(out: &mut Vec<CheckOutcome>, name: &str, tol: f64, r: Result<f64>) {
    out.push(match r {
        Ok(res) => CheckOutcome::gate(name, res, tol, ""),
        Err(e) => CheckOutcome::error(name, e),
    });
}

/// Runs every check.
pub fn run_validation(opts: &ValidateOptions) -> ValidationReport {
    let mut checks = Vec::new();
    let sd = opts.state_dim;

    let name = if opts.perturb {
        "closed forms vs numeric traces [perturbed rho_ent]"
    } else {
        "closed forms vs numeric traces"
    };
    push_result(&mut checks, name, 1e-10, oracle_residual(&ORACLE_QS, opts.samples, sd, opts.perturb));
    push_result(&mut checks, "R = 1 for factorizable states", 1e-10, factorizable_residual(50));

    for q in BOUND_QS {
        match lower_bound_residual(q, 101) {
            Ok((violation, min_gap)) => {
                checks.push(CheckOutcome::gate(
                    &format!("R_sep >= lower bound on grid (q={q})"),
                    violation,
                    1e-12,
                    "",
                ));
                checks.push(CheckOutcome::gate(
                    &format!("R_sep minimum at (pi,pi) (q={q})"),
                    min_gap,
                    1e-12,
                    "",
                ));
            }
            Err(e) => checks.push(CheckOutcome::error("R_sep lower bound", e)),
        }
        match (rsep_grid_max(q, 101), rsep_stationary_values(q)) {
            (Ok((grid_max, excess)), Ok(stat)) => {
                let best = stat.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max);
                checks.push(CheckOutcome::gate(
                    &format!("R_sep maximum at a stationary point (q={q})"),
                    (grid_max - best).abs(),
                    1e-12,
                    format!("max {grid_max:.6}"),
                ));
                checks.push(CheckOutcome {
                    name: format!("(1+2a+2b)/(1+a)^2 exceeded on grid (q={q})"),
                    status: Status::Info,
                    residual: excess,
                    tolerance: 0.0,
                    note: "value at (0,0) is not the global maximum".into(),
                });
            }
            (Err(e), _) | (_, Err(e)) => checks.push(CheckOutcome::error("R_sep maximum", e)),
        }
    }

    push_result(&mut checks, "2pi periodicity in each screen phase", 1e-12, periodicity_residual(sd));

    let marg = make_rho_sep(sd).and_then(|sep| {
        let ent = make_rho_ent(sd)?;
        let mut worst = 0.0_f64;
        for s in [&sep, &ent] {
            for q in [0.3, 0.7] {
                worst = worst.max(marginalization_residual(s, q, 2.1e4, 2048)?);
            }
        }
        Ok(worst)
    });
    push_result(&mut checks, "marginalization over sigma_B recovers I_A", 1e-8, marg);
    push_result(&mut checks, "R_sep independent of time", 1e-12, time_independence_residual(sd));
    push_result(&mut checks, "R_ent spectrum confined to DC and |w1-w2|", 1e-10, spectral_residual());
    push_result(&mut checks, "exp vs analytic displacement (dim 64, half block)", 1e-10, displacement_agreement(64, 20));

    let dims_name = format!(
        "Weyl values stable across dims {}",
        opts.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    );
    let spread = if opts.dims.iter().any(|&d| d < 2) {
        Err(crate::error::Error::InvalidArgument("dims must be >= 2".into()))
    } else {
        truncation_spread(&opts.dims, &ORACLE_QS)
    };
    push_result(&mut checks, &dims_name, 1e-12, spread);

    if let Err(e) = state_checks(&mut checks) {
        checks.push(CheckOutcome::error("state invariants", e));
    }
    if let Err(e) = weyl_checks(&mut checks) {
        checks.push(CheckOutcome::error("Weyl invariants", e));
    }
    ValidationReport { checks }
}
