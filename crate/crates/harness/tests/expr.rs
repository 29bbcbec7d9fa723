use std::f64::consts::PI;

use approx::assert_relative_eq;
use gentau_harness::expr::{EvalError, Expr};

fn eval(src: &str, p: &[f64]) -> f64 {
    Expr::parse(src).unwrap().eval(p).unwrap()
}

#[test]
fn sine_quarter_period() {
    assert_relative_eq!(eval("sin(2*pi*x)", &[0.25]), 1.0, epsilon = 1e-15);
}

#[test]
fn poisson_forcing_value() {
    let (x, y) = (0.1f64, 0.2f64);
    let direct = -100.0 * x * (20.0 * PI * x * x * y).sin() * (4.0 * PI * (x + y)).cos();
    let by_hand = -100.0 * 0.1 * (0.04 * PI).sin() * (1.2 * PI).cos();
    let v = eval("-100*x*sin(20*pi*x^2*y)*cos(4*pi*(x+y))", &[x, y]);
    assert_relative_eq!(v, direct, max_relative = 1e-14);
    assert_relative_eq!(v, by_hand, max_relative = 1e-12);
}

#[test]
fn biharmonic_forcing_value() {
    let v = eval("-(2*pi)^4*sin(2*pi*x)*cos(2*pi*y)*(9*cos(2*pi*z) - 4)", &[0.25, 0.0, 0.25]);
    assert_relative_eq!(v, 4.0 * (2.0 * PI).powi(4), max_relative = 1e-14);
    assert!((v - 6234.18).abs() < 0.01);
}

#[test]
fn precedence_and_associativity() {
    assert_eq!(eval("-2^2", &[]), -4.0);
    assert_eq!(eval("2^3^2", &[]), 512.0);
    assert_eq!(eval("2^-1", &[]), 0.5);
    assert_eq!(eval("1 - 2 - 3", &[]), -4.0);
    assert_eq!(eval("8 / 4 / 2", &[]), 1.0);
    assert_eq!(eval("1 + 2 * 3", &[]), 7.0);
    assert_eq!(eval("(1 + 2) * 3", &[]), 9.0);
    assert_eq!(eval("1.5e2 + .5 + 2E-1", &[]), 150.7);
    assert_eq!(eval("exp(0) + cos(0) + --1", &[]), 3.0);
}

#[test]
fn parse_errors_carry_positions() {
    let cases = [("1 + ", 4), ("sin x", 4), ("2 * (x + 1", 10), ("3 $ 4", 2), ("foo(1)", 0), ("1 2", 2), ("x + )", 4)];
    for (src, pos) in cases {
        let err = Expr::parse(src).unwrap_err();
        assert_eq!(err.position, pos, "{src}: {err}");
        assert!(err.to_string().contains(&format!("column {}", pos + 1)));
    }
}

#[test]
fn evaluation_errors() {
    assert!(matches!(Expr::parse("1/x").unwrap().eval(&[0.0]), Err(EvalError::Domain { .. })));
    assert!(matches!(Expr::parse("exp(1000)").unwrap().eval(&[]), Err(EvalError::Domain { .. })));
    assert!(matches!(Expr::parse("y").unwrap().eval(&[1.0]), Err(EvalError::MissingCoordinate { name: 'y', .. })));
}

#[test]
fn arity_and_zero() {
    assert_eq!(Expr::parse("3").unwrap().arity(), 0);
    assert_eq!(Expr::parse("x*z").unwrap().arity(), 3);
    assert!(Expr::parse(" 0 ").unwrap().is_zero());
    assert!(!Expr::parse("0*x").unwrap().is_zero());
}
