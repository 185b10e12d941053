use mellin_pdo::dsl::{parse, to_symbol};
use mellin_pdo::fredholm::boundary_check;
use mellin_pdo::mellin::{apply_op, inverse_mellin, l2, log_sample, mellin_transform};
use mellin_pdo::regularizer::p_plus_symbol;
use mellin_pdo::symbol::{v_norm, NormConfig};
use mellin_pdo::{Cx, FredholmConfig, LogGrid32, Symbol32};

#[test]
fn transform_round_trip_in_f32() {
    let grid = LogGrid32::new(256, -10.0, 10.0).unwrap();
    let f = log_sample(|t: f32| Cx::new((-t.ln().powi(2)).exp(), 0.0), &grid);
    let back = inverse_mellin(&mellin_transform(&f, &grid).unwrap(), &grid).unwrap();
    let err: Vec<Cx<f32>> = back.iter().zip(&f).map(|(a, b)| a - b).collect();
    assert!(l2(&err) / l2(&f) < 1e-6);
    let one: Symbol32 = to_symbol(&parse("1").unwrap());
    let same = apply_op(&one, &f, &grid).unwrap();
    assert!(same.iter().zip(&f).all(|(a, b)| (a - b).norm() < 1e-5));
}

#[test]
fn v_norm_and_gate_in_f32() {
    let p: Symbol32 = p_plus_symbol();
    let v = v_norm(&p, 1.0, &NormConfig::with_tol(1e-5)).unwrap();
    assert!((v.v_norm - 2.0).abs() < 1e-4, "{}", v.v_norm);
    assert!(!boundary_check(&p, &FredholmConfig::default()).passed);
    let a: Symbol32 = to_symbol(&parse("2 + tanh(x)").unwrap());
    assert!(boundary_check(&a, &FredholmConfig::default()).passed);
}
