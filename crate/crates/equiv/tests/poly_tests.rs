use gfcn_equiv::Polynomial;

#[test]
fn trailing_zeros_are_trimmed() {
    let p = Polynomial::new(vec![1.0, 2.0, 0.0, 0.0]);
    assert_eq!(p.degree(), Some(1));
    assert_eq!(p.coeffs(), &[1.0, 2.0]);
    assert_eq!(p.coeff(5), 0.0);
    assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    assert_eq!(Polynomial::zero().degree(), None);
}

#[test]
fn eval_uses_all_terms() {
    let p = Polynomial::new(vec![-6.0, 4.0, 0.0, 2.0]);
    assert_eq!(p.eval(2.0), 2.0 * 8.0 + 4.0 * 2.0 - 6.0);
    assert_eq!(p.eval(0.0), -6.0);
    assert_eq!(Polynomial::zero().eval(3.0), 0.0);
}

#[test]
fn nonzero_degrees_skip_the_constant_and_gaps() {
    let p = Polynomial::new(vec![-6.0, 4.0, 0.0, 2.0]);
    assert_eq!(p.nonzero_degrees_above_zero(), vec![1, 3]);
    let c = Polynomial::new(vec![9.0]);
    assert!(c.nonzero_degrees_above_zero().is_empty());
}

#[test]
fn display_is_readable() {
    assert_eq!(
        Polynomial::new(vec![-6.0, 4.0, 0.0, 2.0]).to_string(),
        "2 S^3 + 4 S - 6"
    );
    assert_eq!(Polynomial::new(vec![0.0, 1.0]).to_string(), "S");
    assert_eq!(Polynomial::new(vec![0.0, -1.0]).to_string(), "-S");
    assert_eq!(Polynomial::new(vec![0.5]).to_string(), "0.5");
    assert_eq!(Polynomial::zero().to_string(), "0");
    assert_eq!(
        Polynomial::new(vec![0.0, 0.0, 1.0]).to_string(),
        "S^2"
    );
}

#[test]
fn parsing_round_trips_coefficients() {
    let p: Polynomial = "1, 0, -2".parse().unwrap();
    assert_eq!(p.coeffs(), &[1.0, 0.0, -2.0]);
    let p: Polynomial = "0.5".parse().unwrap();
    assert_eq!(p.coeffs(), &[0.5]);
    assert!("1,x,3".parse::<Polynomial>().is_err());
    assert!("1,inf".parse::<Polynomial>().is_err());
    assert!("".parse::<Polynomial>().is_err());
}

#[test]
fn json_round_trip_is_transparent() {
    let p = Polynomial::new(vec![1.5, 0.0, -2.25]);
    let json = serde_json::to_string(&p).unwrap();
    assert_eq!(json, "[1.5,0.0,-2.25]");
    let back: Polynomial = serde_json::from_str(&json).unwrap();
    assert_eq!(back, p);
}
