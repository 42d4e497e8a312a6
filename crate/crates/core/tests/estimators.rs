mod common;

use apost_core::estimators::{
    asymptotic_euler_bounds, component_trace, data_oscillation, estimate_backward_euler,
    estimate_backward_euler_all, estimate_bdf2, estimate_crank_nicolson_all, estimate_dg1,
    estimate_extrapolated,
};
use apost_core::greens::{phi_star, psi_cap};
use apost_core::steppers::{
    run_backward_euler, run_bdf2, run_crank_nicolson, run_dg1, run_extrapolated_euler,
};
use apost_core::{
    BackwardEulerVariant as B, CrankNicolsonVariant as C, Discretisation, EstimatorContext,
    EstimatorOptions, GreenFunctionBounds, OscillationKind, ParabolicProblem, QuadRule, TimeMesh,
};
use common::{all_reports, rel, steady_problem, Surrogate, DEGREE};

fn tabulated() -> (ParabolicProblem, Discretisation) {
    let p = ParabolicProblem::tabulated_test_problem();
    let d = Discretisation::new(&p, DEGREE).unwrap();
    (p, d)
}

#[test]
fn bounds_hold_on_the_test_problem() {
    let (p, d) = tabulated();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let mesh = TimeMesh::pair_doubling(256, 1.0).unwrap();
    let reports = all_reports(&ctx, &mesh, true);
    assert_eq!(reports.len(), 13);
    for (r, err) in reports {
        let err = err.unwrap();
        assert!(r.total >= 0.999 * err, "{}: {:e} < {err:e}", r.estimator, r.total);
    }
}

#[test]
fn report_structure() {
    let (p, d) = tabulated();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let mesh = TimeMesh::pair_doubling(32, 1.0).unwrap();
    for (r, _) in all_reports(&ctx, &mesh, false) {
        assert_eq!(r.steps.len(), 32);
        let sum: f64 = r.steps.iter().map(|s| s.weight * s.value).sum::<f64>()
            + r.endpoint.iter().map(|e| e.1).sum::<f64>();
        assert!(rel(r.total, sum) < 1e-13, "{}", r.estimator);
        for s in &r.steps {
            let w = (-p.green().gamma * (1.0 - mesh.t(s.j))).exp();
            assert!((s.weight - w).abs() < 1e-15);
            assert!(s.components.iter().all(|c| c.1 >= 0.0), "{} step {}", r.estimator, s.j);
            assert!(s.value >= 0.0);
        }
    }
}

#[test]
fn minima_dominate() {
    let (p, d) = tabulated();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let mesh = TimeMesh::pair_doubling(128, 1.0).unwrap();
    let be = run_backward_euler(&p, &mesh, &d).unwrap();
    let r = estimate_backward_euler_all(&be, &[B::Dlm, B::Kl1, B::Dlmkl, B::Lr, B::Combined], &ctx)
        .unwrap();
    let (dlm, kl1, dlmkl, lr, comb) = (&r[0], &r[1], &r[2], &r[3], &r[4]);
    assert!(dlmkl.total <= dlm.total.min(kl1.total));
    assert!(comb.total <= dlmkl.total.min(lr.total));
    for i in 0..128 {
        assert!(dlmkl.steps[i].value <= dlm.steps[i].value.min(kl1.steps[i].value));
        assert!(comb.steps[i].value <= dlmkl.steps[i].value.min(lr.steps[i].value));
    }
    let cn = run_crank_nicolson(&p, &mesh, &d).unwrap();
    let r = estimate_crank_nicolson_all(&cn, &[C::Cn1, C::Cn2, C::CnComb], &ctx).unwrap();
    assert!(r[2].total <= r[0].total.min(r[1].total));
    for i in 0..128 {
        assert!(r[2].steps[i].value <= r[0].steps[i].value.min(r[1].steps[i].value));
    }
}

#[test]
fn kl2_with_last_j_is_dlmkl_plus_endpoint() {
    let (p, d) = tabulated();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let m = 64;
    let mesh = TimeMesh::pair_doubling(m, 1.0).unwrap();
    let be = run_backward_euler(&p, &mesh, &d).unwrap();
    let r = estimate_backward_euler_all(&be, &[B::Dlmkl, B::Kl2 { j: m }], &ctx).unwrap();
    let last = be.state(m) - be.state(m - 1);
    let du = ctx.norm(&last) / mesh.tau(m);
    // with J = M both exponentials are e^{−γ(T−t_{M−1})}
    let endpoint = mesh.tau(m) * (-p.green().gamma * mesh.tau(m)).exp() * du;
    assert!(rel(r[1].total, r[0].total + endpoint) < 1e-12);
    assert!(estimate_backward_euler(&be, B::Kl2 { j: 0 }, &ctx).is_err());
    assert!(estimate_backward_euler(&be, B::Kl2 { j: m + 1 }, &ctx).is_err());
}

#[test]
fn no_decay_means_unit_weights() {
    let p0 = ParabolicProblem::tabulated_test_problem();
    let green = GreenFunctionBounds { gamma: 0.0, ..*p0.green() };
    let p = p0.with_green(green);
    let d = Discretisation::new(&p, DEGREE).unwrap();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let mesh = TimeMesh::pair_doubling(16, 1.0).unwrap();
    for (r, _) in all_reports(&ctx, &mesh, false) {
        assert!(r.steps.iter().all(|s| s.weight == 1.0), "{}", r.estimator);
    }
}

#[test]
fn estimators_are_linear_in_the_data() {
    let (p, d) = tabulated();
    let scaled = p.scaled_data(3.5);
    let mesh = TimeMesh::pair_doubling(32, 1.0).unwrap();
    let base = all_reports(&EstimatorContext::new(&p, &d, EstimatorOptions::default()), &mesh, false);
    let big = all_reports(&EstimatorContext::new(&scaled, &d, EstimatorOptions::default()), &mesh, false);
    for ((a, _), (b, _)) in base.iter().zip(&big) {
        assert!(rel(b.total, 3.5 * a.total) < 1e-10, "{}", a.estimator);
        for (sa, sb) in a.steps.iter().zip(&b.steps) {
            for (ca, cb) in sa.components.iter().zip(&sb.components) {
                assert!((cb.1 - 3.5 * ca.1).abs() <= 1e-10 * (3.5 * ca.1).max(1e-300), "{} {}", a.estimator, ca.0);
            }
        }
    }
}

#[test]
fn zero_data_gives_zero() {
    let green = *ParabolicProblem::tabulated_test_problem().green();
    let p = ParabolicProblem::new(|x| 5.0 * x + 6.0, |_, _| 0.0, |_| 0.0, 1.0, green).unwrap();
    let d = Discretisation::new(&p, DEGREE).unwrap();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    for (r, _) in all_reports(&ctx, &TimeMesh::pair_doubling(16, 1.0).unwrap(), false) {
        assert_eq!(r.total, 0.0, "{}", r.estimator);
    }
}

#[test]
fn steady_state_gives_nothing() {
    let p = steady_problem(*ParabolicProblem::tabulated_test_problem().green());
    let d = Discretisation::new(&p, DEGREE).unwrap();
    for rule in [QuadRule::Trapezium, QuadRule::Simpson, QuadRule::SimpsonTwoPanel] {
        let ctx = EstimatorContext::new(&p, &d, EstimatorOptions { rule, ..Default::default() });
        for (r, _) in all_reports(&ctx, &TimeMesh::pair_doubling(16, 1.0).unwrap(), false) {
            assert!(r.total < 1e-9, "{} ({rule}): {:e}", r.estimator, r.total);
        }
    }
}

#[test]
fn second_difference_free_data_reduces_cn2_to_cn1() {
    // f linear in t: β = 0, q = 0 and both oscillation terms vanish
    let green = *ParabolicProblem::tabulated_test_problem().green();
    let p = ParabolicProblem::new(
        |x| 5.0 * x + 6.0,
        |x, t| (1.0 - x * x) * (1.0 + 2.0 * t),
        |x| (std::f64::consts::PI * (1.0 + x) / 2.0).sin(),
        1.0,
        green,
    )
    .unwrap();
    let d = Discretisation::new(&p, DEGREE).unwrap();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let cn = run_crank_nicolson(&p, &TimeMesh::uniform(16, 1.0).unwrap(), &d).unwrap();
    let r = estimate_crank_nicolson_all(&cn, &[C::Cn1, C::Cn2], &ctx).unwrap();
    for (a, b) in r[0].steps.iter().zip(&r[1].steps) {
        assert!((a.value - b.value).abs() <= 1e-9 * a.value, "step {}", a.j);
    }
}

#[test]
fn extrapolation_z_on_the_surrogate() {
    let s = Surrogate::new(0.5);
    let mesh = TimeMesh::uniform(1, s.problem.horizon()).unwrap();
    let ctx = EstimatorContext::new(&s.problem, &s.disc, EstimatorOptions::default());
    let run = run_extrapolated_euler(&s.problem, &mesh, &s.disc).unwrap();
    let r = estimate_extrapolated(&run, &ctx).unwrap();
    // Z¹ = 0.8 − 1 − (2/3 − 1)/2 = −1/30 along the mode; the final interval uses κ₀τ‖LZ‖
    let tau = mesh.tau(1);
    let expected = tau * s.lambda / 30.0 * ctx.norm(&s.mode);
    assert!(rel(r.steps[0].component("eta_Z").unwrap(), expected) < 1e-9);
    assert!(r.steps[0].component("eta_F_hat").unwrap() == 0.0);
}

#[test]
fn dg1_chi_on_the_surrogate() {
    let s = Surrogate::new(0.5);
    let mesh = TimeMesh::uniform(1, s.problem.horizon()).unwrap();
    let ctx = EstimatorContext::new(&s.problem, &s.disc, EstimatorOptions::default());
    let r = estimate_dg1(&run_dg1(&s.problem, &mesh, &s.disc).unwrap(), &ctx).unwrap();
    // ψ = −λU: ψ⁰ = −λ, ψ^{1/3} = −28λ/33, ψ¹ = −20λ/33, so |χ¹| = (2/33)λ/(2τ²)
    let tau = mesh.tau(1);
    let chi = 2.0 / 33.0 * s.lambda / (2.0 * tau * tau);
    let iv = mesh.interval(1);
    let expected = psi_cap(ctx.green(), 2, &iv).unwrap() * chi * ctx.norm(&s.mode);
    assert_eq!(psi_cap(ctx.green(), 2, &iv).unwrap(), phi_star(ctx.green(), 2, &iv).unwrap());
    assert!(rel(r.steps[0].component("eta_chi").unwrap(), expected) < 1e-9);
}

#[test]
fn bdf2_second_step_on_the_surrogate() {
    let s = Surrogate::new(1.5);
    let mesh = TimeMesh::uniform(3, s.problem.horizon()).unwrap();
    let ctx = EstimatorContext::new(&s.problem, &s.disc, EstimatorOptions::default());
    let r = estimate_bdf2(&run_bdf2(&s.problem, &mesh, &s.disc).unwrap(), &ctx).unwrap();
    // U¹ = 2/3, U² = 5/12 along the mode: δₜ²U² = (1/12)/(2τ²)
    let tau = mesh.tau(2);
    let d2 = 1.0 / (24.0 * tau * tau);
    let coeff = psi_cap(ctx.green(), 1, &mesh.interval(2)).unwrap() + tau * tau / 2.0;
    let expected = coeff * d2 * ctx.norm(&s.mode);
    assert!(rel(r.steps[1].component("eta_delta2_U").unwrap(), expected) < 1e-9);
    assert!(estimate_bdf2(
        &run_bdf2(&s.problem, &TimeMesh::uniform(2, s.problem.horizon()).unwrap(), &s.disc).unwrap(),
        &ctx
    )
    .is_err());
}

#[test]
fn wrong_trajectory_is_rejected() {
    let (p, d) = tabulated();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let mesh = TimeMesh::pair_doubling(8, 1.0).unwrap();
    let cn = run_crank_nicolson(&p, &mesh, &d).unwrap();
    assert!(estimate_backward_euler(&cn, B::Dlm, &ctx).is_err());
    assert!(estimate_dg1(&cn, &ctx).is_err());
    assert!(estimate_bdf2(&cn, &ctx).is_err());
}

#[test]
fn asymptotic_bounds_compose() {
    let (p, d) = tabulated();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let run = run_extrapolated_euler(&p, &TimeMesh::pair_doubling(64, 1.0).unwrap(), &d).unwrap();
    let r = estimate_extrapolated(&run, &ctx).unwrap();
    let b = asymptotic_euler_bounds(&run, &r, &ctx).unwrap();
    assert_eq!(b.bound_for_w, b.wv_gap + r.total);
    assert_eq!(b.bound_for_v, 2.0 * b.wv_gap + r.total);
    let other = estimate_dg1(&run_dg1(&p, &TimeMesh::pair_doubling(64, 1.0).unwrap(), &d).unwrap(), &ctx).unwrap();
    assert!(asymptotic_euler_bounds(&run, &other, &ctx).is_err());
}

#[test]
fn figure_one_traces() {
    let (p, d) = tabulated();
    let ctx = EstimatorContext::new(&p, &d, EstimatorOptions::default());
    let mesh = TimeMesh::uniform(256, 1.0).unwrap();
    let be = run_backward_euler(&p, &mesh, &d).unwrap();
    let r = estimate_backward_euler(&be, B::Combined, &ctx).unwrap();
    let rows = component_trace(&r);
    assert_eq!(rows.len(), 256 * 6);
    for s in &r.steps {
        assert!(s.component("eta_f_hat").unwrap() < s.component("eta_f_bar").unwrap());
    }
    // η_δU exceeds η_δLU only on a trailing window
    let flips: Vec<usize> = r
        .steps
        .iter()
        .filter(|s| s.component("eta_delta_U").unwrap() > s.component("eta_delta_LU").unwrap())
        .map(|s| s.j)
        .collect();
    assert!(!flips.is_empty());
    let first = flips[0];
    assert!(first > 240, "first reversal at step {first}");
    assert_eq!(flips, (first..=256).collect::<Vec<_>>());
}

#[test]
fn oscillation_rules_agree_for_smooth_data() {
    let (p, d) = tabulated();
    let mesh = TimeMesh::pair_doubling(64, 1.0).unwrap();
    let be = run_backward_euler(&p, &mesh, &d).unwrap();
    let opts = |rule| EstimatorOptions { rule, ..Default::default() };
    let step = be.step(20);
    let exact = data_oscillation(
        OscillationKind::FHat,
        &step,
        &EstimatorContext::new(&p, &d, opts(QuadRule::GaussAdaptive)),
    )
    .unwrap();
    let simpson = data_oscillation(
        OscillationKind::FHat,
        &step,
        &EstimatorContext::new(&p, &d, opts(QuadRule::Simpson)),
    )
    .unwrap();
    assert!(rel(simpson, exact) < 0.05, "{simpson:e} vs {exact:e}");
}
