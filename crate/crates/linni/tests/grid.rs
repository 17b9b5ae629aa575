use linni::grid::{box_mean_k, compare_with_series, solve_h};
use linni::config::parse_domain;
use linni_core::pt;

#[test]
fn grid_mean_matches_mean_of_k() {
    let d = parse_domain("cube4").unwrap();
    let q = pt(&[0.3, 0.5, 0.6, 0.45]);
    let g = solve_h(&d, &q, 8).unwrap();
    let mean = g.values.iter().sum::<f64>() / g.values.len() as f64;
    let target = box_mean_k(&d, &q).unwrap();
    assert!((mean - target).abs() < 1e-12 * target.abs(), "{mean} vs {target}");
}

#[test]
fn grid_is_symmetric_about_a_centered_pole() {
    let d = parse_domain("cube4").unwrap();
    let g = solve_h(&d, &d.center(), 8).unwrap();
    let a = g.at(&[1, 2, 3, 4]);
    let b = g.at(&[6, 5, 4, 3]);
    assert!((a - b).abs() < 1e-12 * a.abs());
}

#[test]
fn extrapolated_grid_converges_to_series() {
    let d = parse_domain("cube4").unwrap();
    let q = pt(&[0.45, 0.5, 0.55, 0.5]);
    let coarse = compare_with_series(&d, &q, 8).unwrap();
    let fine = compare_with_series(&d, &q, 16).unwrap();
    assert!(fine.max_rel < coarse.max_rel);
    assert!(fine.max_rel < 1e-2, "{}", fine.max_rel);
}

#[test]
fn rejects_non_box_and_bad_sizes() {
    let ball = parse_domain("ball4").unwrap();
    assert!(solve_h(&ball, &ball.center(), 8).is_err());
    let cube = parse_domain("cube4").unwrap();
    assert!(compare_with_series(&cube, &cube.center(), 10).is_err());
    assert!(box_mean_k(&ball, &ball.center()).is_err());
}
