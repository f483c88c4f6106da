mod common;

use common::{f_oracle, g_oracle, golden};
use expint_core::special::{f_eval, g_eval, inv_k_prime, inv_mills, kernel_eval};

const GOLDEN: &str = include_str!("../golden/kernel.txt");

fn arg(name: &str) -> f64 {
    let open = name.find('(').unwrap();
    name[open + 1..name.len() - 1].parse().unwrap()
}

fn production(name: &str) -> f64 {
    let x = arg(name);
    match &name[..name.find('(').unwrap()] {
        "inv_mills" => inv_mills(x).unwrap(),
        "k" => kernel_eval(x).unwrap().k,
        "k''" => kernel_eval(x).unwrap().k_double_prime,
        "inv_k_prime" => inv_k_prime(x).unwrap(),
        "F" => f_eval(x).unwrap(),
        "G" => g_eval(x).unwrap(),
        other => panic!("unknown golden entry {other}"),
    }
}

#[test]
fn production_matches_golden_values() {
    for (name, value, tol) in golden(GOLDEN) {
        let got = production(&name);
        let rel = ((got - value) / value).abs();
        assert!(rel <= tol, "{name}: got {got:e}, golden {value:e}, rel {rel:e} > {tol:e}");
    }
}

#[test]
fn f_oracle_reproduces_golden_values() {
    for (name, value, _) in golden(GOLDEN).into_iter().filter(|e| e.0.starts_with("F(")) {
        let o = f_oracle(arg(&name));
        assert!(((o - value) / value).abs() < 1e-11, "{name}: oracle {o:e} golden {value:e}");
    }
}

#[test]
fn g_oracle_reproduces_golden_values() {
    for s in [0.01, 0.1, 1.0, 3.0, 10.0] {
        let name = format!("G({s})");
        let (_, value, _) = golden(GOLDEN).into_iter().find(|e| e.0 == name).unwrap();
        let o = g_oracle(s);
        assert!(((o - value) / value).abs() < 1e-8, "{name}: oracle {o:e} golden {value:e}");
    }
}

#[test]
fn f_two_lies_under_the_crude_bound() {
    let v = f_eval(2.0).unwrap();
    assert!(v >= 0.0 && v <= 10.0 * 2f64.exp() / 3.0);
}
