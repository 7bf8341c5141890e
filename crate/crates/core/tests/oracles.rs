//! Frozen expected values for the per-operation examples, each computed by
//! an independent route.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::*;
use fringecorr::interference::{entangled_cross_term, rsep_stationary_values};
use fringecorr::*;
use num_complex::Complex64;

#[test]
fn vacuum_overlap_from_power_series() {
    let lam = Complex64::from_polar(0.3, 1.1);
    let reference = displacement_power_series(lam, 32);
    // ⟨0|D(λ)|0⟩ = e^{−|λ|²/2} = e^{−0.045}
    let want = (-0.045_f64).exp();
    assert!((reference[(0, 0)] - c(want, 0.0)).norm() < 1e-14);
    let via_expm = displacement_exp(lam, 32).unwrap();
    assert!((via_expm.get(0, 0) - c(want, 0.0)).norm() < 1e-12);
    let analytic = displacement_analytic(lam, 32).unwrap();
    assert!((analytic.get(0, 0) - c(want, 0.0)).norm() < 1e-15);
}

#[test]
fn expm_matches_power_series_everywhere() {
    for lam in [c(0.3, 0.0), c(-0.2, 0.9), c(0.0, 1.0)] {
        let reference = displacement_power_series(lam, 24);
        let e = displacement_exp(lam, 24).unwrap();
        assert!(max_gap(e.matrix(), &reference) < 1e-13);
    }
}

#[test]
fn displacement_inverse_on_half_block() {
    for lam in [c(1.0, 0.0), Complex64::from_polar(1.0, 2.4), c(0.3, -0.6)] {
        let dp = displacement_exp(lam, 64).unwrap();
        let dm = displacement_exp(-lam, 64).unwrap();
        let prod = dp.matmul(&dm).unwrap().block(32).unwrap();
        let id = FockOperator::identity(32).unwrap();
        assert!(prod.max_abs_diff(&id) < 1e-10);
        // Same statement for the analytic elements, doubled to dim 128 so
        // the 32-block of the product is fully converged.
        let ap = displacement_analytic(lam, 128).unwrap();
        let am = displacement_analytic(-lam, 128).unwrap();
        let prod = ap.matmul(&am).unwrap().block(32).unwrap();
        assert!(prod.max_abs_diff(&id) < 1e-10);
    }
}

#[test]
fn analytic_low_elements_against_expm_dim64() {
    // ⟨1|D|1⟩ = e^{−|λ|²/2}(1 − |λ|²) at |λ|² = 0.25
    let lam = Complex64::from_polar(0.5, -0.8);
    let e = displacement_exp(lam, 64).unwrap();
    let a = displacement_analytic(lam, 64).unwrap();
    let want = c((-0.125_f64).exp() * 0.75, 0.0);
    assert!((e.get(1, 1) - want).norm() < 1e-12);
    assert!((a.get(1, 1) - want).norm() < 1e-15);

    // ⟨0|D|1⟩ = −λ* e^{−|λ|²/2} at λ = 0.2i
    let lam = c(0.0, 0.2);
    let e = displacement_exp(lam, 64).unwrap();
    let a = displacement_analytic(lam, 64).unwrap();
    let want = -lam.conj() * (-0.02_f64).exp();
    assert!((e.get(0, 1) - want).norm() < 1e-12);
    assert!((a.get(0, 1) - want).norm() < 1e-15);
}

#[test]
fn analytic_and_exp_agree_on_half_block() {
    for dim in [32, 48, 64] {
        for k in 0..8 {
            let lam = Complex64::from_polar(0.125 * (k + 1) as f64, 0.77 * k as f64);
            let e = displacement_exp(lam, dim).unwrap().block(dim / 2).unwrap();
            let a = displacement_analytic(lam, dim).unwrap().block(dim / 2).unwrap();
            assert!(e.max_abs_diff(&a) < 1e-10, "dim {dim}, λ {lam}");
        }
    }
}

#[test]
fn analytic_survives_large_indices() {
    // Past n = 170 the factorials overflow; log-gamma differences do not.
    let lam = c(0.6, 0.2);
    let d = displacement_analytic(lam, 256).unwrap();
    assert!(d.matrix().iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    // Columns of a unitary have unit norm; the low columns are converged.
    for col in [0, 10, 100] {
        let norm: f64 = (0..256).map(|r| d.get(r, col).norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-10, "column {col}: {norm}");
    }
}

#[test]
fn marginal_of_sep_by_direct_contraction() {
    let rho = make_rho_sep(5).unwrap();
    let reference = reduce_to_a(rho.matrix(), 5, 5);
    let mut want = nalgebra::DMatrix::zeros(5, 5);
    want[(0, 0)] = c(0.5, 0.0);
    want[(1, 1)] = c(0.5, 0.0);
    assert!(max_gap(&reference, &want) == 0.0);
    let got = partial_trace(&rho, Mode::A).unwrap();
    assert!(max_gap(got.matrix(), &want) == 0.0);
    let got_b = partial_trace(&rho, Mode::B).unwrap();
    assert!(max_gap(got_b.matrix(), &want) == 0.0);
}

#[test]
fn ent_marginals_equal_sep_marginals() {
    let sep = make_rho_sep(4).unwrap();
    let ent = make_rho_ent(4).unwrap();
    for m in [Mode::A, Mode::B] {
        assert!(sep.marginal(m).unwrap().max_abs_diff(&ent.marginal(m).unwrap()) < 1e-14);
    }
}

#[test]
fn ppt_of_ent_from_hand_written_block() {
    let block = singlet_like_partial_transpose();
    let eig = nalgebra::SymmetricEigen::new(block);
    let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((lmin + 0.5).abs() < 1e-15);
    let got = ppt_min_eigenvalue(&make_rho_ent(2).unwrap()).unwrap();
    assert!((got - lmin).abs() < 1e-10);
    let got = ppt_min_eigenvalue(&make_rho_ent(5).unwrap()).unwrap();
    assert!((got - lmin).abs() < 1e-10);
}

#[test]
fn weyl_vacuum_from_expm_oracle() {
    let vac = FockOperator::number_projector(8, 0).unwrap();
    let lam = c(0.0, 0.3);
    let oracle = displacement_power_series(lam, 64)[(0, 0)];
    let w = weyl_single(&vac, lam).unwrap();
    assert!((w.value - oracle).norm() < 1e-14);
    assert!((w.value.re - (-0.045_f64).exp()).abs() < 1e-15);
}

#[test]
fn weyl_of_sep_marginal_is_alpha() {
    let marg = make_rho_sep(6).unwrap().marginal(Mode::A).unwrap();
    for q in [0.1, 0.5, 1.0, 1.3] {
        let params = ModeParams::with_q(1.2e-4, q).unwrap();
        for t in [0.0, 1e3, 4.4e4] {
            let w = weyl_single(&marg, lambda_of(&params, t)).unwrap();
            assert!((w.value - c(alpha(q), 0.0)).norm() < 1e-15);
        }
    }
    // α(1) = e^{−1/2}/2 against |W̃| at |λ| = 1.
    let w = weyl_single(&marg, c(0.0, 1.0)).unwrap();
    assert!((w.magnitude - 0.5 * (-0.5_f64).exp()).abs() < 1e-15);
}

#[test]
fn two_mode_cross_term_brute_force() {
    // Dense Tr[ρ_ent (C_A ⊗ C_B)] at dim 6 per mode with power-series
    // displacements, against sep + cross term.
    let dim = 6;
    let rho = make_rho_ent(dim).unwrap();
    let (w1, w2) = (1.2e-4, 1e-4);
    for (q, a, b, t) in [(0.7, 0.3, 1.1, 2e4), (0.3, FRAC_PI_2, FRAC_PI_2, 0.0), (1.0, -2.0, 0.9, 1.3e5)] {
        let la = c(0.0, q) * Complex64::from_polar(1.0, w1 * t);
        let lb = c(0.0, q) * Complex64::from_polar(1.0, w2 * t);
        let ca = fringe_dense(&displacement_power_series(la, 40), &displacement_power_series(-la, 40), a);
        let cb = fringe_dense(&displacement_power_series(lb, 40), &displacement_power_series(-lb, 40), b);
        let ca = ca.view((0, 0), (dim, dim)).into_owned();
        let cb = cb.view((0, 0), (dim, dim)).into_owned();
        let brute = dense_trace(rho.matrix(), &ca.kronecker(&cb));
        assert!(brute.im.abs() < 1e-14);
        let cross = q * q * (-q * q).exp() * a.sin() * b.sin() * ((w1 - w2) * t).cos();
        let want = intensity_joint_sep_closed(a, b, q) + cross;
        assert!((brute.re - want).abs() < 1e-12, "{brute} vs {want}");
        assert!((entangled_cross_term(a, b, q, w1, w2, t) - cross).abs() < 1e-16);

        let cfg = ExperimentConfig::new(
            ModeParams::with_q(w1, q).unwrap(),
            ModeParams::with_q(w2, q).unwrap(),
            rho.clone(),
            t,
        )
        .unwrap();
        let numeric = intensity_joint_numeric(&cfg, a, b).unwrap();
        assert!((numeric - brute.re).abs() < 1e-12);
    }
}

#[test]
fn ent_at_quarter_turns() {
    // σ_A = σ_B = π/2, t = 0: every cosine vanishes, the coherence term
    // survives with weight q² e^{−q²}.
    for q in [0.1, 0.5, 1.0] {
        let cfg = ExperimentConfig::new(
            ModeParams::with_q(1.2e-4, q).unwrap(),
            ModeParams::with_q(1e-4, q).unwrap(),
            make_rho_ent(4).unwrap(),
            0.0,
        )
        .unwrap();
        let got = intensity_joint_numeric(&cfg, FRAC_PI_2, FRAC_PI_2).unwrap();
        let want = 1.0 + q * q * (-q * q).exp();
        assert!((got - want).abs() < 1e-12, "q={q}: {got} vs {want}");
    }
}

#[test]
fn vacuum_single_intensity_at_pi() {
    let vac = FockOperator::number_projector(4, 0).unwrap();
    for q in [0.2, 0.9] {
        let p = ModeParams::with_q(1e-4, q).unwrap();
        let got = intensity_single(&vac, PI, &p, 3.0).unwrap();
        assert!((got - (1.0 - (-0.5 * q * q).exp())).abs() < 1e-15);
    }
    let p0 = ModeParams::with_q(1e-4, 0.0).unwrap();
    assert!((intensity_single(&vac, 0.0, &p0, 0.0).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn vacuum_product_full_visibility() {
    let vac = FockOperator::number_projector(3, 0).unwrap();
    let cfg = ExperimentConfig::new(
        ModeParams::with_q(1.2e-4, 0.0).unwrap(),
        ModeParams::with_q(1e-4, 0.0).unwrap(),
        make_product(&vac, &vac).unwrap(),
        5.0,
    )
    .unwrap();
    for (a, b) in [(0.0, 0.0), (0.4, -2.2), (3.0, 1.0)] {
        let got = intensity_joint_numeric(&cfg, a, b).unwrap();
        assert!((got - (1.0 + f64::cos(a)) * (1.0 + f64::cos(b))).abs() < 1e-14);
    }
    // q = 0 at σ = π makes the marginal intensity vanish.
    assert!(matches!(ratio(&cfg, PI, 0.3), Err(Error::Degenerate { .. })));
}

#[test]
fn lower_bound_limit_is_three_quarters() {
    // Series of the naive expression at small q² in extended precision is
    // replaced by the limit check at two scales.
    for q2 in [1e-4_f64, 1e-6] {
        let (lo, _) = rsep_bounds(q2.sqrt()).unwrap();
        assert!((lo - 0.75).abs() < 1e-4 * (q2 / 1e-4).max(1e-2), "{q2}: {lo}");
    }
    // At moderate q the stable form equals the naive one.
    for q in [0.3, 0.5, 1.2] {
        let (a, b) = (alpha(q), beta(q));
        let naive = (1.0 - 2.0 * a + 2.0 * b) / (1.0 - a).powi(2);
        assert!((rsep_bounds(q).unwrap().0 - naive).abs() < 1e-13);
    }
}

#[test]
fn stationary_values_closed_forms() {
    let q = 0.5;
    let (a, b) = (alpha(q), beta(q));
    let s = rsep_stationary_values(q).unwrap();
    assert!((s[0].value - (1.0 + 2.0 * a + 2.0 * b) / (1.0 + a).powi(2)).abs() < 1e-15);
    assert!((s[1].value - (1.0 - 2.0 * b) / (1.0 - a * a)).abs() < 1e-14);
    assert!((s[3].value - (1.0 - 2.0 * a + 2.0 * b) / (1.0 - a).powi(2)).abs() < 1e-13);
    // (0, π) beats (0, 0): α² − 2β = u² e^{−2u} > 0.
    assert!(s[1].value > 1.0);
    assert!(s[1].value > s[0].value);
}

#[test]
fn extrema_search_finds_stationary_points() {
    let q = 0.5;
    let ex = rsep_extrema(q, 101).unwrap();
    let (lo, _) = rsep_bounds(q).unwrap();
    assert!((ex.min.value - lo).abs() < 1e-12);
    assert!((ex.min.sigma_a.abs() - PI).abs() < 1e-6);
    assert!((ex.min.sigma_b.abs() - PI).abs() < 1e-6);
    let best = (1.0 - 2.0 * beta(q)) / (1.0 - alpha(q).powi(2));
    assert!((ex.max.value - best).abs() < 1e-12);
}

#[test]
fn fig3_calibration_report() {
    let min = calibrate_q(0.7557, BoundKind::Min).unwrap();
    let max = calibrate_q(0.995, BoundKind::Max).unwrap();
    assert!((min.lower - 0.7557).abs() <= 1e-9);
    assert!((max.upper - 0.995).abs() <= 1e-9);
    // Frozen from an independent scipy brentq on the naive formulas.
    assert!((min.q - 0.302_294_448_853_955_95).abs() < 1e-8);
    assert!((max.q - 0.533_237_442_842_075_2).abs() < 1e-8);
    assert!((min.upper - 0.999_478_636_632_291_8).abs() < 1e-9);
    assert!((max.lower - 0.767_651_079_684_669_5).abs() < 1e-9);
}

#[test]
fn calibration_near_limit_is_continuous() {
    let mut prev = 0.0;
    for eps in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        let cal = calibrate_q(0.75 + eps, BoundKind::Min).unwrap();
        assert!(cal.q > 0.0);
        if prev > 0.0 {
            assert!(cal.q < prev);
        }
        prev = cal.q;
    }
    assert!(prev < 0.01);
}
