use linni_core::ansatz::default_c1;
use linni_core::energy::k_eps4_h;
use linni_core::green::DomainSpec;
use linni_core::search::*;
use linni_core::{norm, Error};

fn slab() -> DomainSpec {
    DomainSpec::cuboid(4, &[2.5, 1.0, 1.0, 1.0]).unwrap()
}

#[test]
fn f_only_maximizer_is_exp_minus_half() {
    let d = DomainSpec::unit_ball(4).unwrap();
    let bx = SearchBox4::new(&d, 0.3, 0.1, 3, 4).unwrap();
    for eps in [1e-2, 1e-3, 1e-4] {
        let m = find_max4(eps, &d, &bx, default_c1(&d), false).unwrap();
        assert!((m.lambda / (-0.5f64).exp() - 1.0).abs() < 1e-6, "eps={eps} Λ*={}", m.lambda);
        assert!(m.gradient_norm < 1e-8);
    }
}

#[test]
fn full_maximizer_is_interior_and_follows_stationarity() {
    let d = slab();
    let c1 = default_c1(&d);
    let bx = SearchBox4::new(&d, 0.3, 0.1, 5, 0).unwrap();
    let mut prev = f64::NEG_INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        let m = find_max4(eps, &d, &bx, c1, true).unwrap();
        let pred = lambda_star4(m.robin, eps, &d, c1);
        // drift of ln Λ* away from −½ against the prediction
        let drift = m.lambda.ln() + 0.5;
        let pdrift = pred.ln() + 0.5;
        assert!(drift > 0.0 && (drift / pdrift - 1.0).abs() < 0.2, "eps={eps}");
        assert!(drift > prev);
        prev = drift;
        assert!(m.lambda_margin > 0.01 && m.q_margin > 0.01);
        assert!(m.gradient_norm < 1e-8, "{}", m.gradient_norm);
        // center of the slab maximizes the Robin function
        assert!((m.q[0] - 1.25).abs() < 1e-6 && (m.q[1] - 0.5).abs() < 1e-6);
    }
}

#[test]
fn unit_ball_drift_leaves_the_box() {
    let d = DomainSpec::unit_ball(4).unwrap();
    let bx = SearchBox4::new(&d, 0.3, 0.1, 3, 4).unwrap();
    match find_max4(1e-2, &d, &bx, default_c1(&d), true) {
        Err(Error::BoundaryHit { .. }) => {}
        other => panic!("expected a boundary hit, got {other:?}"),
    }
}

#[test]
fn boundary_rejection_holds() {
    let d = slab();
    let bx = SearchBox4::new(&d, 0.2, 0.1, 4, 0).unwrap();
    let r = boundary_rejection4(1e-3, &d, &bx, default_c1(&d), 64).unwrap();
    for i in &r.inequalities {
        assert!(i.pass, "{} {} {}", i.name, i.lhs, i.rhs);
    }
}

#[test]
fn rejection_limits_in_truncated_model() {
    let d = slab();
    let c1 = default_c1(&d);
    let c4 = d.cn;
    let beta = 0.2;
    let h = 0.01745;
    let e = std::f64::consts::E;
    // the Robin term decays like (−ln ε)^{-1/2}, so the approach is slow but monotone
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for k in [10, 30, 100, 300] {
        let eps = 10f64.powi(-k);
        let small = k_eps4_h(eps.powf(0.5 * beta), h, eps, &d, c1) / eps.powf(beta);
        let l41 = (-0.5f64).exp() * eps.powf(beta);
        let low = k_eps4_h(l41, h, eps, &d, c1) / eps.powf(2.0 * beta);
        let ds = (small / (beta * c4 * c4 / (4.0 * d.volume)) - 1.0).abs();
        let dl = (low / (beta * c4 * c4 / (2.0 * e * d.volume)) - 1.0).abs();
        assert!(ds < prev.0 && dl < prev.1, "k={k}");
        prev = (ds, dl);
    }
    assert!(prev.0 < 0.1 && prev.1 < 0.1, "{prev:?}");
}

#[test]
fn spec_default_constants_are_rejected() {
    let d = DomainSpec::unit_ball(6).unwrap();
    let loose = Consts6 { eta6: 0.1, lambda6: 0.1, c1_frac: 0.9, c2_frac: 0.8, c3: 0.01, c4: 0.05, c5: 0.07 };
    assert!(SearchBox6::new(&d, loose, 0.1, 9, 16).is_err());
    assert!(SearchBox6::new(&d, Consts6::default(), 0.1, 9, 16).is_ok());
}

#[test]
fn saddle_at_origin_and_center() {
    let d = DomainSpec::unit_ball(6).unwrap();
    let bx = SearchBox6::new(&d, Consts6::default(), 0.1, 9, 16).unwrap();
    // F(0) on the unit ball
    assert!((bx.c[0] / (5.0 * std::f64::consts::PI.powi(3) / 1769472.0) - 1.0).abs() < 1e-8);
    for eps in [0.05, 0.025, 0.0125] {
        let s = find_saddle6(eps, &d, &bx).unwrap();
        assert!(s.a.abs() < 1e-6 && s.b.abs() < 1e-6);
        assert!(norm(6, &s.q) < bx.spacing);
        assert!(s.gradient_norm < 1e-8);
        let scaled = (s.value - d.volume / 6912.0) / eps;
        assert!((scaled / bx.c[0] - 1.0).abs() < 0.05);
    }
}

#[test]
fn minmax_certificate_passes() {
    let d = DomainSpec::unit_ball(6).unwrap();
    let bx = SearchBox6::new(&d, Consts6::default(), 0.1, 9, 16).unwrap();
    for eps in [0.05, 0.025] {
        let c = minmax_certificate(eps, &d, &bx, 3, 11).unwrap();
        assert!(c.pass(), "{:?}", c.inequalities);
        assert_eq!(c.map_maxima.len(), 4);
        assert!(c.argmax_offset < bx.spacing);
        assert!(c.r1 < c.r2);
    }
}
