//! Property tests for the algebra, protocol, and DSL invariants.

use proptest::prelude::*;

use cvswitch::algebra::{
    beamsplit, covariance, two_mode_squeeze, variance, Basis,
    BsConvention, NoiseModel, QuadExpr,
};
use cvswitch::dsl;
use cvswitch::protocol::{
    build_switch, closed_form_variances, fidelity, output_variances, route, switch_report, Bob,
    Route, SwitchParams,
};

fn small_param() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

fn gain() -> impl Strategy<Value = f64> {
    0.0..2.0f64
}

/// Random expression over a fixed 4-mode basis.
fn quad_expr(basis: &Basis, coeffs: &[(f64, f64)], mean: f64) -> QuadExpr {
    let mut e = QuadExpr::zero();
    for (id, &(cx, cy)) in basis.ids().zip(coeffs) {
        e = e
            .add_scaled(&QuadExpr::basis_x(id), cx)
            .add_scaled(&QuadExpr::basis_y(id), cy);
    }
    e.set_mean(mean);
    e
}

fn four_mode_basis() -> Basis {
    let mut basis = Basis::new();
    for label in ["m0", "m1", "m2", "m3"] {
        basis.fresh_mode(label).unwrap();
    }
    basis
}

proptest! {
    #[test]
    fn variance_is_bilinear(
        c1 in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 4),
        c2 in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 4),
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
    ) {
        let basis = four_mode_basis();
        let n = NoiseModel::vacuum();
        let e1 = quad_expr(&basis, &c1, 0.0);
        let e2 = quad_expr(&basis, &c2, 0.0);
        let combo = e1.scale(a).add_scaled(&e2, b);
        let lhs = variance(&combo, &n);
        let rhs = a * a * variance(&e1, &n)
            + 2.0 * a * b * covariance(&e1, &e2, &n)
            + b * b * variance(&e2, &n);
        prop_assert!((lhs - rhs).abs() < 1e-12, "lhs={lhs} rhs={rhs}");
    }

    #[test]
    fn covariance_is_symmetric_and_consistent(
        c1 in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 4),
        c2 in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 4),
    ) {
        let basis = four_mode_basis();
        let n = NoiseModel::vacuum();
        let e1 = quad_expr(&basis, &c1, 0.0);
        let e2 = quad_expr(&basis, &c2, 0.0);
        prop_assert!((covariance(&e1, &e2, &n) - covariance(&e2, &e1, &n)).abs() < 1e-14);
        prop_assert!((covariance(&e1, &e1, &n) - variance(&e1, &n)).abs() < 1e-14);
    }

    #[test]
    fn beamsplit_conserves_total_variance(r1 in small_param(), r2 in small_param()) {
        let mut basis = Basis::new();
        let f1 = basis.fresh_mode("f1").unwrap();
        let f2 = basis.fresh_mode("f2").unwrap();
        let f3 = basis.fresh_mode("f3").unwrap();
        let f4 = basis.fresh_mode("f4").unwrap();
        let n = NoiseModel::vacuum();
        // squeeze so the inputs are not plain vacua
        let (in1, _) = two_mode_squeeze(&f1, &f2, r1).unwrap();
        let (in2, _) = two_mode_squeeze(&f3, &f4, r2).unwrap();
        for conv in [BsConvention::MinusFirst, BsConvention::PlusFirst] {
            let (o1, o2) = beamsplit(&in1, &in2, conv);
            let before = variance(&in1.x, &n) + variance(&in2.x, &n);
            let after = variance(&o1.x, &n) + variance(&o2.x, &n);
            prop_assert!((before - after).abs() < 1e-12);
        }
    }

    #[test]
    fn squeeze_sign_swaps_squeezed_combination(r in small_param()) {
        let n = NoiseModel::vacuum();
        let make = |r: f64| {
            let mut basis = Basis::new();
            let m1 = basis.fresh_mode("m1").unwrap();
            let m2 = basis.fresh_mode("m2").unwrap();
            two_mode_squeeze(&m1, &m2, r).unwrap()
        };
        let (p1, p2) = make(r);
        let (q1, q2) = make(-r);
        let v_minus = variance(&p1.x.sub(&p2.x), &n);
        let v_plus = variance(&q1.x.add(&q2.x), &n);
        prop_assert!((v_minus - v_plus).abs() < 1e-12);
    }

    #[test]
    fn network_variances_match_closed_form(
        r_a in small_param(),
        r_b in small_param(),
        g1 in gain(),
        g2 in gain(),
    ) {
        let p = SwitchParams::new(r_a, r_b, g1, g2);
        for which in [Bob::Bob1, Bob::Bob2] {
            let (vx, vy) = output_variances(&p, which).unwrap();
            let (cx, cy) = closed_form_variances(&p, which);
            prop_assert!((vx - cx).abs() <= 1e-10 * cx.max(1.0), "vx={vx} cx={cx}");
            prop_assert!((vy - cy).abs() <= 1e-10 * cy.max(1.0));
        }
    }

    #[test]
    fn switch_is_symmetric_under_rb_sign_flip(
        r_a in small_param(),
        r_b in small_param(),
        g in gain(),
    ) {
        let p1 = SwitchParams::new(r_a, r_b, g, g);
        let p2 = SwitchParams::new(r_a, -r_b, g, g);
        let f1 = fidelity(&p1, Bob::Bob1).unwrap();
        let f2 = fidelity(&p2, Bob::Bob2).unwrap();
        prop_assert!((f1 - f2).abs() < 1e-12, "f1={f1} f2={f2}");
    }

    #[test]
    fn unity_gain_fidelity_ignores_alpha(
        r_a in small_param(),
        r_b in small_param(),
        re in -3.0..3.0f64,
        im in -3.0..3.0f64,
    ) {
        let base = SwitchParams::new(r_a, r_b, 1.0, 1.0);
        let shifted = base.with_alpha(re, im);
        for which in [Bob::Bob1, Bob::Bob2] {
            let f0 = fidelity(&base, which).unwrap();
            let f1 = fidelity(&shifted, which).unwrap();
            prop_assert!((f0 - f1).abs() < 1e-12);
        }
    }

    #[test]
    fn one_squeezed_source_suffices(r_a in 0.01..3.0f64) {
        let p = SwitchParams::new(r_a, 0.0, 1.0, 1.0);
        prop_assert!(fidelity(&p, Bob::Bob1).unwrap() > 0.5);
    }

    #[test]
    fn route_agrees_with_witness_ordering(
        r_a in small_param(),
        r_b in small_param(),
        g in 0.5..1.5f64,
    ) {
        let p = SwitchParams::new(r_a, r_b, g, g);
        let rep = switch_report(&p).unwrap();
        match route(&p).unwrap() {
            Route::Bob1 => prop_assert!(rep.w35.total < rep.w36.total),
            Route::Bob2 => prop_assert!(rep.w36.total < rep.w35.total),
            Route::None => {}
        }
    }

    #[test]
    fn switch_outputs_preserve_commutation(
        r_a in small_param(),
        r_b in small_param(),
        g1 in gain(),
        g2 in gain(),
    ) {
        let net = build_switch(&SwitchParams::new(r_a, r_b, g1, g2)).unwrap();
        let (c5, c6) = cvswitch::protocol::output_commutation(&net);
        prop_assert!((c5 - 1.0).abs() < 1e-12);
        prop_assert!((c6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dsl_round_trip_on_generated_circuits(seed in any::<u64>()) {
        let ast = dsl::gen::random_circuit(seed);
        let printed = dsl::print(&ast);
        let reparsed = dsl::parse(&printed).map_err(|e| {
            TestCaseError::fail(format!("reparse failed: {e}\n{printed}"))
        })?;
        prop_assert_eq!(reparsed, ast);
    }
}

#[test]
fn fidelity_is_monotone_in_ra_on_the_switch_diagonal() {
    // g = 1, r_b = −r_a: fidelity toward Bob1 strictly increases with r_a
    let mut last = 0.0;
    for i in 0..60 {
        let r_a = i as f64 * 0.1;
        let p = SwitchParams::new(r_a, -r_a, 1.0, 1.0);
        let f = fidelity(&p, Bob::Bob1).unwrap();
        assert!(f > last, "not increasing at r_a={r_a}: {f} <= {last}");
        last = f;
    }
}

#[test]
fn permuting_independent_statements_is_coefficient_identical() {
    // the two EPR sources share no names; swapping them must not change
    // any output observable (comparison keyed by basis label)
    let a = "EPR a1 a2 0.8\nEPR b1 b2 -0.5\nBS u w a1 b1 minus\nOUTPUT u\nOUTPUT w\n";
    let b = "EPR b1 b2 -0.5\nEPR a1 a2 0.8\nBS u w a1 b1 minus\nOUTPUT u\nOUTPUT w\n";
    let ea = dsl::elaborate(&dsl::parse(a).unwrap());
    let eb = dsl::elaborate(&dsl::parse(b).unwrap());
    for name in ["u", "w"] {
        let ma = &ea.outputs[name];
        let mb = &eb.outputs[name];
        for (qa, qb) in [(&ma.x, &mb.x), (&ma.y, &mb.y)] {
            let by_label = |el: &dsl::Elaborated, q: &QuadExpr| {
                q.terms()
                    .map(|(id, c)| (el.basis.label(id).to_string(), (c.x, c.y)))
                    .collect::<std::collections::BTreeMap<_, _>>()
            };
            assert_eq!(by_label(&ea, qa), by_label(&eb, qb));
        }
    }
}
