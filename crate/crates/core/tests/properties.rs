use accretive_flows::harness::{Report, ReportRow, Status};
use accretive_flows::moduli::{
    full_quartic, full_strongly_accretive, simple_from_full, weak_from_full, weak_from_simple, RateFn,
};
use accretive_flows::operators::{
    dirichlet_laplacian, make_quartic, make_scaled_identity, make_spd_linear, AccretiveOperator,
};
use accretive_flows::rates::{chi, nr_threshold, omega_from_eta, omega_hilbert_exact, NrInputs};
use accretive_flows::semigroup::{
    cl_certificate, evaluate_oracle, evaluate_semigroup, exponential_formula, trajectory, FlowEvaluator,
};
use accretive_flows::space::{eta_hilbert, norm, pairing};
use accretive_flows::Point;
use proptest::prelude::*;
use std::sync::Arc;

fn point(dim: usize, radius: f64) -> impl Strategy<Value = Point> {
    prop::collection::vec(-radius..radius, dim).prop_map(|c| Point::new(c).unwrap())
}

fn instances() -> Vec<Box<dyn AccretiveOperator>> {
    vec![
        Box::new(make_scaled_identity(0.7, 3).unwrap()),
        Box::new(make_spd_linear(dirichlet_laplacian(4)).unwrap()),
        Box::new(make_quartic()),
    ]
}

fn dot(a: &Point, b: &Point) -> f64 {
    pairing(a, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pairing_with_itself_is_squared_norm(x in point(5, 100.0)) {
        let n = norm(&x);
        prop_assert!((pairing(&x, &x).unwrap() - n * n).abs() <= 1e-12 * (n * n).max(1e-300));
    }

    #[test]
    fn cauchy_schwarz(x in point(4, 50.0), y in point(4, 50.0)) {
        prop_assert!(pairing(&y, &x).unwrap().abs() <= norm(&y) * norm(&x) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn eta_is_monotone(a in 1e-6f64..2.0, b in 1e-6f64..2.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(eta_hilbert(lo).unwrap() <= eta_hilbert(hi).unwrap());
    }

    #[test]
    fn resolvent_is_firmly_nonexpansive(
        which in 0usize..3,
        seed_x in prop::collection::vec(-5.0f64..5.0, 4),
        seed_y in prop::collection::vec(-5.0f64..5.0, 4),
        gamma in 0.01f64..10.0,
    ) {
        let op = &instances()[which];
        let d = op.dim();
        let x = Point::new(seed_x[..d].to_vec()).unwrap();
        let y = Point::new(seed_y[..d].to_vec()).unwrap();
        let jx = op.resolvent(gamma, &x);
        let jy = op.resolvent(gamma, &y);
        let diff = &jx - &jy;
        let lhs = norm(&diff).powi(2);
        prop_assert!(lhs <= dot(&diff, &(&x - &y)) + 1e-9, "{} {lhs}", op.name());
        prop_assert!(norm(&diff) <= x.dist(&y) + 1e-9);
    }

    #[test]
    fn zero_projection_is_nonexpansive(
        which in 0usize..3,
        seed_x in prop::collection::vec(-8.0f64..8.0, 4),
        seed_y in prop::collection::vec(-8.0f64..8.0, 4),
    ) {
        let op = &instances()[which];
        let d = op.dim();
        let x = Point::new(seed_x[..d].to_vec()).unwrap();
        let y = Point::new(seed_y[..d].to_vec()).unwrap();
        prop_assert!(op.zero_projection(&x).dist(&op.zero_projection(&y)) <= x.dist(&y) + 1e-12);
    }

    #[test]
    fn semigroup_law_on_closed_forms(
        which in 0usize..3,
        seed in prop::collection::vec(-4.0f64..4.0, 4),
        t in 0.0f64..3.0,
        s in 0.0f64..3.0,
    ) {
        let op = &instances()[which];
        let x = Point::new(seed[..op.dim()].to_vec()).unwrap();
        let whole = evaluate_oracle(op.as_ref(), &x, t + s).unwrap();
        let split = evaluate_oracle(op.as_ref(), &evaluate_oracle(op.as_ref(), &x, s).unwrap(), t).unwrap();
        prop_assert!(whole.dist(&split) <= 1e-9, "{}: {:?} vs {:?}", op.name(), whole, split);
    }

    #[test]
    fn flow_is_nonexpansive(
        which in 0usize..3,
        seed_x in prop::collection::vec(-4.0f64..4.0, 4),
        seed_y in prop::collection::vec(-4.0f64..4.0, 4),
        t in 0.0f64..5.0,
    ) {
        let op = &instances()[which];
        let d = op.dim();
        let x = Point::new(seed_x[..d].to_vec()).unwrap();
        let y = Point::new(seed_y[..d].to_vec()).unwrap();
        let sx = evaluate_oracle(op.as_ref(), &x, t).unwrap();
        let sy = evaluate_oracle(op.as_ref(), &y, t).unwrap();
        prop_assert!(sx.dist(&sy) <= x.dist(&y) + 1e-9);
    }

    #[test]
    fn truncated_laws_never_wrap(a in 1u64..1000, k in 0u64..1000) {
        let v = full_strongly_accretive(a).unwrap().at(0, k);
        prop_assert_eq!(v, a * (k + 1) * (k + 1) - 1);
        prop_assert_eq!(full_quartic().at(0, k), (k + 1).pow(4) - 1);
    }

    #[test]
    fn conversions_are_consistent(a in 1u64..5, bound in 0u64..50, k in 0u64..30, m in 0u64..500, c in 0u64..20) {
        let full = full_strongly_accretive(a).unwrap();
        let phi = RateFn::affine(3, c);
        let simple = simple_from_full(full.clone()).apply(bound, &phi);
        let weak = weak_from_simple(simple_from_full(full.clone())).apply(bound, &phi);
        prop_assert!(simple.at(k, m) >= m);
        prop_assert_eq!(simple.at(k, m), m.max(phi.at(full.at(bound, k))));
        prop_assert_eq!(weak.at(k), simple.at(k, 0));
        prop_assert_eq!(weak_from_full(full).apply(bound, &phi).at(k), weak.at(k));
    }

    #[test]
    fn rate_combinators_are_pure_and_monotone(b in 0u64..100, k in 0u64..1000) {
        let c = chi(b);
        prop_assert_eq!(c.at(k), c.at(k));
        prop_assert!(c.at(k) <= c.at(k + 1));
        let weak = weak_from_full(full_strongly_accretive(1).unwrap());
        let th = nr_threshold(&NrInputs::new(weak, 4, b));
        prop_assert_eq!(th.at(k.min(50)), th.at(k.min(50)));
        prop_assert!(th.at(k.min(50)) <= th.at(k.min(50) + 1));
    }

    #[test]
    fn projection_moduli_dominate_k(r in 0u64..20, k in 0u64..20) {
        let eta = omega_from_eta(Arc::new(|e| eta_hilbert(e).unwrap()));
        prop_assert!(eta.at(r, k) >= k);
        prop_assert!(eta.at(r, k) <= eta.at(r + 1, k));
        prop_assert_eq!(omega_hilbert_exact().at(r, k), k);
    }

    #[test]
    fn status_matches_slack(observed in 0.0f64..2.0, target in 0.01f64..1.0, slack in 0.0f64..0.5) {
        let status = Status::classify(observed, target, slack);
        prop_assert_eq!(status == Status::Fail, observed > target + slack);
        prop_assert_eq!(status == Status::Pass, observed <= target);
    }

    #[test]
    fn report_json_round_trip(rows in prop::collection::vec((0u64..100, 0u64..1_000_000, 0.0f64..10.0), 0..8)) {
        let mut report = Report::new("nr", "prop", 1e-9);
        for (k, bound, worst) in rows {
            let target = 1.0 / (k as f64 + 1.0);
            report.rows.push(ReportRow {
                k,
                counterfunction: Some(format!("f{k}")),
                certified_bound: bound,
                target,
                worst_observed: worst,
                slack: target + 1e-9 - worst,
                status: Status::classify(worst, target, 1e-9),
                witness: Some(worst / 3.0),
            });
        }
        let text = serde_json::to_string(&report).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &report);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn crandall_liggett_certificate_is_sound(
        which in 0usize..3,
        seed in prop::collection::vec(-3.0f64..3.0, 4),
        t in 0.05f64..2.0,
        log_n in 2u32..11,
    ) {
        let op = &instances()[which];
        let x = Point::new(seed[..op.dim()].to_vec()).unwrap();
        let v = op.value(&x).unwrap().norm();
        let n = 1u64 << log_n;
        let approx = exponential_formula(op.as_ref(), &x, t, n);
        let exact = evaluate_oracle(op.as_ref(), &x, t).unwrap();
        prop_assert!(approx.dist(&exact) <= cl_certificate(t, v, n) + 1e-12);
    }

    #[test]
    fn fejer_monotone_along_trajectories(
        which in 0usize..3,
        seed in prop::collection::vec(-3.0f64..3.0, 4),
        cl in any::<bool>(),
    ) {
        let op = &instances()[which];
        let x = Point::new(seed[..op.dim()].to_vec()).unwrap();
        let grid: Vec<f64> = (1..=12).map(|i| i as f64 * 0.25).collect();
        let evaluator = if cl { FlowEvaluator::CrandallLiggett { tol: 0.05 } } else { FlowEvaluator::Oracle };
        let traj = trajectory(op.as_ref(), &x, &grid, evaluator).unwrap();
        let mut prev = (x.dist(&op.zero_projection(&x)), 0.0);
        for s in &traj.samples {
            let d = s.point.dist(&op.zero_projection(&s.point));
            prop_assert!(d <= prev.0 + 2.0 * (s.err_bound + prev.1) + 1e-12);
            prev = (d, s.err_bound);
        }
    }

    #[test]
    fn crandall_liggett_agrees_with_oracle(
        which in 0usize..3,
        seed in prop::collection::vec(-2.0f64..2.0, 4),
        t in 0.0f64..1.0,
    ) {
        let op = &instances()[which];
        let x = Point::new(seed[..op.dim()].to_vec()).unwrap();
        let e = evaluate_semigroup(op.as_ref(), &x, t, 0.1).unwrap();
        let exact = evaluate_oracle(op.as_ref(), &x, t).unwrap();
        prop_assert!(e.point.dist(&exact) <= e.err_bound + 1e-12);
    }
}

#[test]
fn resolvent_fixes_zero_witness() {
    for op in instances() {
        let p = op.zero_witness();
        for gamma in [0.1, 1.0, 10.0] {
            assert!(op.resolvent(gamma, &p).dist(&p) <= 1e-12, "{}", op.name());
        }
    }
}
