use linni_core::shooting::*;
use linni_core::Error;

fn plain(n: usize, mu: f64) -> ShootingProblem {
    ShootingProblem::new(n, mu, 1.0, Form::Plain).unwrap()
}

#[test]
fn constant_is_an_equilibrium() {
    for form in [Form::Plain, Form::Normalized] {
        for n in 3..=7 {
            let pr = ShootingProblem::new(n, 0.3, 1.0, form).unwrap();
            let c = pr.constant();
            assert!(pr.source(c).abs() < 1e-14 * pr.mu * c);
            assert!(shoot(&pr, c).unwrap().abs() < 1e-12, "n={n}");
        }
    }
}

#[test]
fn slope_is_continuous_in_u0() {
    let pr = plain(5, 0.2);
    let c = pr.constant();
    for f in [0.3, 0.8, 1.7, 4.0] {
        let u = f * c;
        let a = shoot(&pr, u).unwrap();
        let b = shoot(&pr, u * (1.0 + 1e-7)).unwrap();
        let d = shoot(&pr, u * (1.0 + 2e-7)).unwrap();
        // second difference tiny relative to the first
        assert!((d - 2.0 * b + a).abs() < 1e-3 * (b - a).abs() + 1e-13, "f={f}");
    }
}

// Pinned after the first verified run: 2× the constant bends down, 0.5× bends up.
#[test]
fn pinned_signs_n4_mu1() {
    let pr = ShootingProblem::new(4, 1.0, 1.0, Form::Normalized).unwrap();
    let c = pr.constant();
    let hi = shoot(&pr, 2.0 * c).unwrap();
    let lo = shoot(&pr, 0.5 * c).unwrap();
    assert!(hi < 0.0 && lo > 0.0);
    assert!((hi / -0.24276214018644077 - 1.0).abs() < 1e-8);
    assert!((lo / 0.03368941886138681 - 1.0).abs() < 1e-8);
}

#[test]
fn forms_are_related_by_scaling() {
    for n in [3, 4, 6] {
        let a = ShootingProblem::new(n, 0.4, 1.0, Form::Plain).unwrap();
        let b = ShootingProblem::new(n, 0.4, 1.0, Form::Normalized).unwrap();
        let k = b.ln_shift().exp();
        assert!((k / ((n * (n - 2)) as f64).powf((n as f64 - 2.0) / 4.0) - 1.0).abs() < 1e-14);
        assert!((a.constant() / (k * b.constant()) - 1.0).abs() < 1e-14);
        for f in [0.5, 2.0] {
            let u = f * b.constant();
            let sb = shoot(&b, u).unwrap();
            let sa = shoot(&a, k * u).unwrap();
            assert!((sa - k * sb).abs() < 1e-10 * sa.abs().max(1e-3), "n={n} f={f}");
        }
    }
}

#[test]
fn halving_tolerance_barely_moves_the_slope() {
    let tol = Tolerance::default();
    for (n, mu) in [(4, 1.0), (5, 0.1), (6, 0.05)] {
        let pr = plain(n, mu);
        for f in [0.1, 0.5, 3.0, 30.0] {
            let u = f * pr.constant();
            let a = shoot_with(&pr, u, tol).unwrap().slope;
            let b = shoot_with(&pr, u, tol.halved()).unwrap().slope;
            assert!((a - b).abs() < 1e-10, "n={n} f={f} {a} {b}");
        }
    }
}

#[test]
fn sentinel_on_sign_change() {
    // far above the constant in n=3 the profile dips through zero well inside the ball
    let pr = plain(3, 0.1);
    let s = shoot_with(&pr, 1e9 * pr.constant(), Tolerance::default()).unwrap();
    assert!(matches!(s.end, ShotEnd::Crossed(_)));
    assert_eq!(s.slope, -SENTINEL);
}

#[test]
fn backward_solutions_are_regular_and_consistent() {
    let tol = Tolerance::default();
    for (n, mu) in [(4, 0.1), (5, 0.1), (6, 0.1)] {
        let pr = plain(n, mu);
        let (r, roots) = find_nonconstant_back(&pr, BackBracket::default(), tol).unwrap();
        assert_eq!(r.classification, Classification::NonconstantFound);
        assert_eq!(roots, 1);
        assert!(r.weak_residual < 1e-8, "n={n} {}", r.weak_residual);
        assert_eq!(r.slope, 0.0);
        assert!(r.lambda < 0.0 && r.ln_u0 > r.ln_ur);
        // u > 0 throughout: samples are finite logarithms
        assert!(r.log_samples && r.samples.iter().all(|s| s.1.is_finite()));
        let fine = find_nonconstant_back(&pr, BackBracket::default(), tol.halved()).unwrap().0;
        assert!((fine.ln_u0 - r.ln_u0).abs() < 1e-6 * r.ln_u0.abs());
    }
}

#[test]
fn forward_polish_agrees_with_backward_root() {
    let tol = Tolerance::default();
    for n in [5, 6] {
        let pr = plain(n, 0.1);
        let (b, _) = find_nonconstant_back(&pr, BackBracket::default(), tol).unwrap();
        let u0 = b.ln_u0.exp();
        let f = find_nonconstant(&pr, (0.99 * u0, 1.01 * u0), tol).unwrap();
        assert_eq!(f.classification, Classification::NonconstantFound);
        assert!(f.slope.abs() < 1e-9);
        // forward shots through a tall core lose digits; the backward value is the reference
        assert!((f.ln_u0 - b.ln_u0).abs() < 2e-3, "n={n}");
        assert!(f.samples.iter().all(|s| s.1 > 0.0));
    }
}

#[test]
fn forward_bracket_without_sign_change_is_none_found() {
    let pr = plain(3, 0.1);
    let c = pr.constant();
    let r = find_nonconstant(&pr, (2.0 * c, 3.0 * c), Tolerance::default()).unwrap();
    assert_eq!(r.classification, Classification::NoneFound);
    assert!(find_nonconstant(&pr, (0.5 * c, 2.0 * c), Tolerance::default()).is_err());
}

#[test]
fn dichotomy_pattern() {
    let cells = dichotomy_scan(&[3, 4, 5, 6, 7], &[0.1, 0.05, 0.02], 1.0, Form::Plain, BackBracket::default(), Tolerance::default()).unwrap();
    for c in &cells {
        let want = if (4..=6).contains(&c.n) { Classification::NonconstantFound } else { Classification::NoneFound };
        assert_eq!(c.classification, want, "n={} mu={}", c.n, c.mu);
        assert!(c.stable, "n={} mu={}", c.n, c.mu);
    }
    // blow-up trend in n=4
    let r4: Vec<f64> = cells.iter().filter(|c| c.n == 4).map(|c| c.result.ln_ratio()).collect();
    assert!(r4[0] < r4[1] && r4[1] < r4[2], "{r4:?}");
}

#[test]
fn rejects_bad_inputs() {
    assert!(matches!(ShootingProblem::new(2, 0.1, 1.0, Form::Plain), Err(Error::Domain(_))));
    assert!(ShootingProblem::new(4, -0.1, 1.0, Form::Plain).is_err());
    assert!(ShootingProblem::new(4, 0.1, 0.0, Form::Plain).is_err());
    assert!(shoot(&plain(4, 0.1), 0.0).is_err());
}
