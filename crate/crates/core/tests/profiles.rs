use linni_core::profiles::*;
use linni_core::quad::{gauss_legendre, gk21, integrate};
use linni_core::special::{gegenbauer, gegenbauer_norm, screened_radial};
use linni_core::{pt, PI};

fn psi_bar_closed(r: f64) -> f64 {
    let l = (r * r).ln_1p();
    1.25 - l / (4.0 * r * r) - 0.25 * l
}

fn psi6_closed(r: f64) -> f64 {
    if r < 1e-2 {
        let x = r * r;
        return 0.125 - x / 12.0 + x * x / 16.0 - x * x * x / 20.0;
    }
    (r * r - (r * r).ln_1p()) / (4.0 * r.powi(4))
}

#[test]
fn gk21_is_exact_for_degree_31() {
    for k in 0..=31 {
        let mut f = |x: f64| x.powi(k);
        let (v, _) = gk21(&mut f, -1.0, 1.0);
        let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
        assert!((v - exact).abs() < 1e-14, "k={k} v={v}");
    }
}

#[test]
fn gauss_legendre_weights_and_moments() {
    let (x, w) = gauss_legendre(20);
    assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
    assert!((m - 2.0 / 39.0).abs() < 1e-14);
}

#[test]
fn adaptive_handles_peaked_integrand() {
    let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12, 1e-13);
    let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
    assert!((r.value - exact).abs() < 1e-9 * exact);
}

#[test]
fn gegenbauer_orthogonality_and_derivative() {
    for &alpha in &[1.0, 2.0] {
        let mut c = Vec::new();
        let mut dc = Vec::new();
        let (x, w) = gauss_legendre(200);
        let mut gram = [[0.0; 6]; 6];
        for (xi, wi) in x.iter().zip(&w) {
            // t = cos θ with weight sin^{2α}θ dθ on [0,π]
            let th = 0.5 * PI * (xi + 1.0);
            let t = th.cos();
            gegenbauer(alpha, 5, t, &mut c, &mut dc);
            let wt = wi * 0.5 * PI * th.sin().powi(2 * alpha as i32);
            for a in 0..6 {
                for b in 0..6 {
                    gram[a][b] += wt * c[a] * c[b];
                }
            }
        }
        for a in 0..6 {
            for b in 0..6 {
                let want = if a == b { gegenbauer_norm(alpha, a) } else { 0.0 };
                assert!((gram[a][b] - want).abs() < 1e-10, "alpha {alpha} {a} {b}");
            }
        }
        let t = 0.37;
        gegenbauer(alpha, 8, t, &mut c, &mut dc);
        let mut cp = Vec::new();
        let mut cm = Vec::new();
        let mut tmp = Vec::new();
        gegenbauer(alpha, 8, t + 1e-6, &mut cp, &mut tmp);
        gegenbauer(alpha, 8, t - 1e-6, &mut cm, &mut tmp);
        for l in 0..=8 {
            let fd = (cp[l] - cm[l]) / 2e-6;
            assert!((fd - dc[l]).abs() < 1e-6 * (1.0 + dc[l].abs()), "l={l}");
        }
    }
}

#[test]
fn screened_radial_solves_its_ode() {
    for n in [4usize, 6] {
        for l in 0..6 {
            for &r in &[0.1, 0.5, 1.0, 2.0] {
                let (f, fp, fpp) = screened_radial(n, l, r);
                let h = 1e-5;
                let fd = (screened_radial(n, l, r + h).0 - screened_radial(n, l, r - h).0) / (2.0 * h);
                assert!((fd - fp).abs() < 1e-8 * (1.0 + fp.abs()));
                let lf = l as f64;
                let res = fpp + (n as f64 - 1.0) * fp / r - lf * (lf + n as f64 - 2.0) * f / (r * r) - f;
                assert!(res.abs() < 1e-10 * (1.0 + f.abs()));
            }
        }
    }
}

#[test]
fn psi_bar_matches_closed_form_and_asymptotics() {
    let p = solve_psi_bar().unwrap();
    for &r in &[1e-7, 1e-3, 0.3, 1.0, 7.5, 120.0, 3e3, 9.9e3, 5e4] {
        let v = p.eval(r);
        assert!((v - psi_bar_closed(r)).abs() < 1e-11, "r={r} {v} {}", psi_bar_closed(r));
    }
    match p.asym {
        Asymptotics::Log { constant, slope } => {
            assert_eq!(slope, -0.5);
            assert!((constant - 1.25).abs() < 1e-10, "I = {constant}");
        }
        _ => panic!(),
    }
    let g = |r: f64| p.eval(r) + 0.5 * r.ln();
    assert!((g(1e4) - g(1e3)).abs() < 1e-4);
    assert!((p.deriv_at(1e3) * 2e3 + 1.0).abs() < 1e-3);
    assert_eq!(p.eval(0.0), 1.0);
}

#[test]
fn psi6_matches_closed_form() {
    let p = solve_psi6().unwrap();
    for &r in &[1e-7, 1e-3, 0.3, 1.0, 7.5, 120.0, 3e3, 9.9e3, 5e4] {
        let v = p.eval(r);
        let c = psi6_closed(r);
        assert!((v / c - 1.0).abs() < 1e-10, "r={r} {v} {c}");
    }
    let tail = 1.0 - 2.0 * 100f64.ln() / 1e4 - 1e-8;
    assert!((p.eval(100.0) * 4.0 * 1e4 - tail).abs() < 1e-6);
    assert!((p.eval(0.0) - 0.125).abs() < 1e-12);
    let cross = psi6_origin_crosscheck();
    assert!((cross - p.eval(0.0)).abs() < 1e-8 * 0.125, "{cross}");
}

#[test]
fn profile_derivatives_match_closed_forms() {
    let pb = solve_psi_bar().unwrap();
    let p6 = solve_psi6().unwrap();
    let mut r = 1e-7;
    while r < 1e5 {
        let (d4, d6) = (pb.deriv_at(r), p6.deriv_at(r));
        let (e4, e6) = (psi_bar_prime(r), psi6_prime(r));
        assert!((d4 - e4).abs() < 1e-10 * e4.abs(), "n=4 r={r} {d4} {e4}");
        assert!((d6 - e6).abs() < 1e-10 * e6.abs(), "n=6 r={r} {d6} {e6}");
        r *= 1.37;
    }
}

#[test]
fn bubble_integrals_match_beta_closed_forms() {
    let b4 = bubble_integrals(4).unwrap();
    assert!((b4.critical / (PI * PI / 6.0) - 1.0).abs() < 1e-10);
    // ∫U_Λ³ = Λ·π²/2 = c4Λ/8
    assert!((b4.source / (PI * PI / 2.0) - 1.0).abs() < 1e-10);
    let b6 = bubble_integrals(6).unwrap();
    assert!((b6.critical / (PI.powi(3) / 60.0) - 1.0).abs() < 1e-10, "{}", b6.critical);
    assert!((b6.square.unwrap() / (PI.powi(3) / 6.0) - 1.0).abs() < 1e-10);
    assert!((b4.dirichlet / (8.0 * b4.critical) - 1.0).abs() < 1e-10);
    assert!((b6.dirichlet / (24.0 * b6.critical) - 1.0).abs() < 1e-10);
}

#[test]
fn gram_constants_positive_and_orthogonal() {
    for n in [4, 6] {
        let (g0, g1) = gram_constants(n).unwrap();
        assert!(g0 > 0.0 && g1 > 0.0);
        assert!(gram_cross(n).abs() < 1e-10);
    }
}

#[test]
fn bubble_examples() {
    let b = Bubble::new(4, 1.0, pt(&[0.0; 4]));
    assert_eq!(b.eval(&pt(&[0.0; 4])).unwrap(), 1.0);
    let (dl, dq) = b.derivs(&pt(&[0.0; 4])).unwrap();
    assert_eq!(dl, -1.0);
    assert!(dq.iter().all(|v| *v == 0.0));
    let b6 = Bubble::new(6, 1.0, pt(&[0.0; 6]));
    assert!((b6.eval(&pt(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0])).unwrap() - 0.25).abs() < 1e-15);
    let b2 = Bubble::new(4, 2.0, pt(&[0.0; 4]));
    assert_eq!(b2.eval(&pt(&[0.0; 4])).unwrap(), 0.5);
    assert!(b.eval(&pt(&[f64::NAN, 0.0, 0.0, 0.0])).is_err());
}
