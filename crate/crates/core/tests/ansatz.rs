use linni_core::ansatz::*;
use linni_core::green::DomainSpec;
use linni_core::profiles::{gram_constants, solve_psi6, solve_psi_bar, RadialProfile};
use linni_core::{dist, pt, Pt};

fn field(n: usize, eps: f64, q: Pt, correction: bool) -> AnsatzField {
    let d = DomainSpec::unit_ball(n).unwrap();
    let (p, prof): (BlowupParams, RadialProfile) = if n == 4 {
        (BlowupParams::new4(&d, eps, (-0.5f64).exp(), q, None).unwrap(), solve_psi_bar().unwrap())
    } else {
        (BlowupParams::new6(&d, eps, lambda6_center(&d), 1.0 / 48.0, q).unwrap(), solve_psi6().unwrap())
    };
    AnsatzField::assemble(p, d, &prof, correction).unwrap()
}

fn random_points(f: &AnsatzField, count: usize, seed: u64) -> Vec<Pt> {
    let p = &f.params;
    let mut rng = Sampler::new(seed);
    let qb = p.qbar();
    let mut out = Vec::new();
    while out.len() < count {
        let d = rng.direction(p.n);
        let r = 0.9 / p.eps * rng.uniform().powi(2);
        let mut z = qb;
        for i in 0..p.n {
            z[i] += r * d[i];
        }
        if f.domain.contains(&linni_core::scale(p.eps, &z)) {
            out.push(z);
        }
    }
    out
}

fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.max(b.abs())
}

#[test]
fn parameter_derivatives_match_differences() {
    for n in [4, 6] {
        let f = field(n, 0.05, pt(&[0.3, 0.1]), true);
        let p = f.params;
        let pts = random_points(&f, 15, 7 + n as u64);
        let hl = 1e-5 * p.lambda;
        let lp = f.perturbed(p.lambda + hl, p.q, p.eta).unwrap();
        let lm = f.perturbed(p.lambda - hl, p.q, p.eta).unwrap();
        let hq = 1e-6;
        let mut qs = Vec::new();
        for i in 0..n {
            let mut a = p.q;
            a[i] += hq * p.eps;
            let mut b = p.q;
            b[i] -= hq * p.eps;
            qs.push((f.perturbed(p.lambda, a, p.eta).unwrap(), f.perturbed(p.lambda, b, p.eta).unwrap()));
        }
        for z in &pts {
            let s = f.eval(z).unwrap();
            let fd = (lp.w(z).unwrap() - lm.w(z).unwrap()) / (2.0 * hl);
            assert!(close(s.y_lambda, fd, 1e-3 * s.w.abs(), 1e-6), "n={n} ∂Λ {} vs {}", s.y_lambda, fd);
            let gscale = (0..n).map(|i| s.y_q[i].abs()).fold(0.0, f64::max);
            for (i, (a, b)) in qs.iter().enumerate() {
                let fd = (a.w(z).unwrap() - b.w(z).unwrap()) / (2.0 * hq);
                assert!(close(s.y_q[i], fd, gscale, 1e-6), "n={n} ∂Q{i} {} vs {}", s.y_q[i], fd);
            }
        }
        if n == 6 {
            let he = 1e-4;
            let ep = f.perturbed(p.lambda, p.q, p.eta + he).unwrap();
            let em = f.perturbed(p.lambda, p.q, p.eta - he).unwrap();
            let z = pts[3];
            let fd = (ep.w(&z).unwrap() - em.w(&z).unwrap()) / (2.0 * he);
            let s = f.eval(&z).unwrap();
            assert!(close(s.y_eta, fd, 0.0, 1e-8));
            assert!(close(s.y_eta, 0.05f64.powi(3), 0.0, 1e-14));
        }
    }
}

#[test]
fn kernel_elements_are_derivatives_of_the_operator() {
    for n in [4, 6] {
        let f = field(n, 0.05, pt(&[0.2, -0.1]), true);
        let p = f.params;
        let hl = 1e-5 * p.lambda;
        let lp = f.perturbed(p.lambda + hl, p.q, p.eta).unwrap();
        let lm = f.perturbed(p.lambda - hl, p.q, p.eta).unwrap();
        for z in random_points(&f, 5, 99) {
            let s = f.eval(&z).unwrap();
            let fd = (lp.eval(&z).unwrap().rhs - lm.eval(&z).unwrap().rhs) / (2.0 * hl);
            assert!(close(s.z_lambda, fd, 1e-3 * s.rhs.abs(), 1e-5), "n={n} Z_Λ {} vs {}", s.z_lambda, fd);
        }
    }
}

#[test]
fn neumann_condition_holds_on_the_boundary() {
    for n in [4, 6] {
        let f = field(n, 0.05, pt(&[0.3, 0.1]), true);
        let eps = f.params.eps;
        let mut rng = Sampler::new(3);
        let mut worst = 0.0f64;
        for _ in 0..30 {
            let d = rng.direction(n);
            let z = linni_core::scale((1.0 - 1e-12) / eps, &d);
            let dn = f.normal_derivative(&z).unwrap();
            assert!(dn.abs() < 1e-8, "n={n} ∂νW = {dn:e}");
            worst = worst.max(dn.abs());
        }
        // without the correction the flux is visibly nonzero
        let g = field(n, 0.05, pt(&[0.3, 0.1]), false);
        let z = linni_core::scale((1.0 - 1e-12) / eps, &pt(&[1.0]));
        let raw = g.normal_derivative(&z).unwrap().abs();
        assert!(raw > 1e3 * worst, "n={n} {raw:e} vs {worst:e}");
    }
}

#[test]
fn analytic_operator_matches_fourth_order_laplacian() {
    for n in [4, 6] {
        let f = field(n, 0.05, pt(&[0.25, 0.1]), true);
        let p = f.params;
        let me2 = p.mu * p.eps * p.eps;
        for z in random_points(&f, 12, 11) {
            let d = dist(n, &z, &p.qbar());
            if d < 0.5 {
                continue;
            }
            // step follows the local scale of the bubble
            let h = (2e-3 * d).min(1e-2);
            let w0 = f.w(&z).unwrap();
            let mut lap = -2.5 * n as f64 * w0;
            for i in 0..n {
                for (c, wt) in [(-2.0, -1.0 / 12.0), (-1.0, 4.0 / 3.0), (1.0, 4.0 / 3.0), (2.0, -1.0 / 12.0)] {
                    let mut y = z;
                    y[i] += c * h;
                    lap += wt * f.w(&y).unwrap();
                }
            }
            lap /= h * h;
            let s = f.eval(&z).unwrap();
            let fd = -lap + me2 * w0;
            assert!(close(s.rhs, fd, 1e-6 * s.u, 1e-4), "n={n} z={z:?}: {} vs {}", s.rhs, fd);
        }
    }
}

#[test]
fn n6_constant_part_vanishes_at_center_values() {
    let f = field(6, 0.05, pt(&[0.0]), true);
    let p = f.params;
    let tail = f.tail_constant();
    assert!((tail - p.eta * p.eps.powi(3)).abs() < 1e-18);
    // far field: S → rhs_constant − 24(ηε³)² = −ε⁶(24η² − η + c₆Λ²/|Ω|)
    let c = f.rhs_constant() - 24.0 * tail * tail;
    assert!(c.abs() < 1e-12 * p.eps.powi(6), "{c:e}");
    let g = f.perturbed(p.lambda, p.q, 0.03).unwrap();
    let c = g.rhs_constant() - 24.0 * g.tail_constant().powi(2);
    let poly = 24.0 * 0.03f64.powi(2) - 0.03 + 1.0 / 96.0;
    assert!((c + p.eps.powi(6) * poly).abs() < 1e-12 * p.eps.powi(6));
}

#[test]
fn centered_n6_field_is_radial() {
    let f = field(6, 0.05, pt(&[0.0]), true);
    let mut rng = Sampler::new(5);
    for r in [0.3, 2.0, 7.0, 15.0] {
        let w: Vec<f64> = (0..8).map(|_| f.w(&linni_core::scale(r, &rng.direction(6))).unwrap()).collect();
        for v in &w {
            assert!((v - w[0]).abs() < 1e-9 * w[0].abs());
        }
    }
    let s = f.eval(&pt(&[0.0])).unwrap();
    let p = f.params;
    let expect = p.lambda.powi(-2) + p.mu * p.eps * p.eps * s.uhat + p.eta * p.eps.powi(3);
    assert!((s.w - expect).abs() < 1e-14 * s.w);
}

#[test]
fn n4_tail_scale() {
    let f = field(4, 1e-3, pt(&[0.1]), false);
    let p = f.params;
    let expect = f.domain.cn * p.lambda * p.eps * p.eps * (-p.eps.ln() / p.c1).sqrt() / f.domain.volume;
    assert!((f.tail_constant() - expect).abs() < 1e-14 * expect);
    assert!((eps_from_mu4(p.mu, p.c1) - p.eps).abs() < 1e-15);
}

#[test]
fn boundary_correction_scales_like_eps_squared_in_n6() {
    let mut consts = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let f = field(6, eps, pt(&[0.2]), true);
        let mut sup = 0.0f64;
        for z in f.sample_points(16, 8, 100) {
            let x = linni_core::scale(eps, &z);
            let c = f.correction.as_ref().unwrap().sample(&x);
            sup = sup.max(c.r.abs() + c.dr.abs());
        }
        consts.push(sup / (eps * eps));
    }
    let spread = consts.iter().cloned().fold(0.0, f64::max) / consts.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1.5, "{consts:?}");
}

#[test]
fn weighted_norms() {
    let f = field(6, 0.05, pt(&[0.1]), false);
    let p = f.params;
    let qb = p.qbar();
    let pts = f.sample_points(64, 32, 500);
    let zero: Vec<(Pt, f64)> = pts.iter().map(|z| (*z, 0.0)).collect();
    assert_eq!(weighted_norm(NormKind::QuadStar, &p, &zero, 0.0).unwrap(), 0.0);
    assert_eq!(weighted_norm(NormKind::TriStar, &p, &zero, 0.0).unwrap(), 0.0);
    let bracket = |z: &Pt| (1.0 + dist(6, z, &qb).powi(2)).sqrt();
    let decay: Vec<(Pt, f64)> = pts.iter().map(|z| (*z, bracket(z).powi(-4))).collect();
    assert!((weighted_norm(NormKind::QuadStar, &p, &decay, 0.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(weighted_norm(NormKind::Star, &p, &decay, 0.0).is_err());
    assert!(weighted_norm(NormKind::QuadStar, &p, &[], 0.0).is_err());

    // n = 4, constant c on the unit ball: the sup of ⟨z−Q̄⟩³ sits at the far boundary point
    let g = field(4, 0.05, pt(&[0.2]), false);
    let p = g.params;
    let c = 0.37;
    let far = pt(&[-1.0 / p.eps]);
    let mut pts: Vec<(Pt, f64)> = g.sample_points(64, 32, 500).into_iter().map(|z| (z, c)).collect();
    pts.push((far, c));
    let expect = p.eps.powi(-3) * (-p.eps.ln()).sqrt() * c + c * (1.0 + (1.2 / p.eps).powi(2)).powf(1.5);
    let got = weighted_norm(NormKind::StarStar, &p, &pts, c).unwrap();
    assert!((got - expect).abs() < 1e-10 * expect);
}

#[test]
fn sample_density_is_converged() {
    let f = field(6, 0.05, pt(&[0.2]), true);
    let p = f.params;
    let norm_with = |sh: usize, dr: usize, b: usize| {
        let s: Vec<(Pt, f64)> = f.sample_points(sh, dr, b).into_iter().map(|z| (z, f.eval(&z).unwrap().residual)).collect();
        weighted_norm(NormKind::QuadStar, &p, &s, 0.0).unwrap()
    };
    let a = norm_with(64, 32, 500);
    let b = norm_with(128, 64, 1000);
    assert!((a - b).abs() < 0.01 * b, "{a} vs {b}");
}

#[test]
fn gram_matrix_structure() {
    for n in [4, 6] {
        let (g0, g1) = gram_constants(n).unwrap();
        let mut offdiag = Vec::new();
        for eps in [0.02, 0.01] {
            let f = field(n, eps, pt(&[0.2, 0.1]), true);
            let p = f.params;
            let nodes = f.axisym_nodes(24, 8, 8).unwrap();
            let g = f.gram_matrix(&nodes).unwrap();
            let l2 = p.lambda * p.lambda;
            if eps == 0.01 {
                assert!((l2 * g[0][0] / g0 - 1.0).abs() < 0.05, "n={n} {}", l2 * g[0][0] / g0);
                for i in 1..=n {
                    assert!((l2 * g[i][i] / g1 - 1.0).abs() < 0.05);
                }
            }
            if n == 6 {
                let g7 = g[7][7];
                assert!((g7 / (f.domain.volume * eps.powi(3)) - 1.0).abs() < 1e-6);
            }
            offdiag.push((g[0][1] / g[0][0]).abs());
        }
        if n == 4 {
            assert!(offdiag[1] < 0.5 * offdiag[0], "{offdiag:?}");
        } else {
            assert!(offdiag.iter().all(|v| *v < 1e-10));
        }
    }
}
