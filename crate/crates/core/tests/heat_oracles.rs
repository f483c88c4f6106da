//! Sharpness-table values against closed forms of the untruncated pieces.

use expint_core::heat::sharpness_demo;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// `(2/sqrt(2 pi)) int_0^R (1+u)^{-c} du`
fn inside(c: f64, r: f64) -> f64 {
    2.0 / SQRT_2PI * (1.0 - (1.0 + r).powf(1.0 - c)) / (c - 1.0)
}

#[test]
fn rhs_splits_into_closed_form_inside_part_and_small_tail() {
    let radii = [2.0, 5.0, 10.0];
    let (table, _) = sharpness_demo(1.5, &radii, 1e-3).unwrap();
    for row in &table.rows {
        let core = inside(1.5, row.radius);
        let extra = row.rhs - core;
        // beyond R the integrand is at most (1+u)^{-c}/sqrt(2 pi) on [R, R+1]
        // plus the Gaussian tail past R+1
        let cap = 2.0 / SQRT_2PI * (1.0 + row.radius).powf(-1.5) + 1e-3;
        assert!(extra > 0.0 && extra < cap, "R={} extra={extra} cap={cap}", row.radius);
    }
}

#[test]
fn lhs_exceeds_flat_part() {
    let (table, _) = sharpness_demo(2.0, &[1.0, 3.0, 6.0], 1e-3).unwrap();
    for row in &table.rows {
        // on [-R, R] the density of e^{f_R} against N(0,1) is 1/sqrt(2 pi)
        let flat = 2.0 * row.radius / SQRT_2PI;
        assert!(row.lhs > flat.ln());
        assert!(row.lhs < (flat + 2.0 * (row.radius * row.radius / 2.0 + 1.0).exp()).ln());
    }
}

#[test]
fn uncut_limit_for_c_two_within_two_percent() {
    let (table, _) = sharpness_demo(2.0, &[2.0, 4.0], 1e-3).unwrap();
    let expected = 2.0 / SQRT_2PI;
    assert!((table.rhs_uncut_quadrature / expected - 1.0).abs() < 0.02);
    assert!((inside(2.0, 1e12) / expected - 1.0).abs() < 1e-9);
}
