//! One PASS/FAIL line per acceptance criterion.
//!
//! Two criteria are known not to hold as stated and are expected to fail:
//! the tail claim for `p+-'` (the true two-sided tail is `1 - tanh(pi m)`,
//! twice the claimed closed form and above `e^{-2 pi m}`), and the seam
//! clause of the construction identities (the defect is first order in the
//! offset, so it sits above `1e-8` at offset `1e-6` for every symbol whose
//! t-derivative at the seam is not tiny). Everything else must pass.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use mellin_pdo::dsl::{derivative, eval_f64, parse, print_expr, to_symbol, BinOp, Const, Expr, Func, ParseErrorKind};
use mellin_pdo::error::XSide;
use mellin_pdo::fredholm::{fredholm_analyze, residual_sections, BoundaryPoint, FredholmConfig};
use mellin_pdo::lemmas::{
    inverse_closedness_suites, shift_bounds, suite_symbols, tail_bounds, transition_norms, LemmaConfig,
};
use mellin_pdo::linalg::{power_norm, PowerConfig};
use mellin_pdo::mellin::{
    apply_multiplier, inverse_mellin, l2, log_sample, mellin_transform, semi_commutator_residual, LogGrid,
};
use mellin_pdo::regularizer::{regularize, seam_defects, RegularizerConfig, VerifyConfig};
use mellin_pdo::symbol::{InverseConfig, TGrid, XGrid};
use mellin_pdo::{Cx, DecayProfile, Symbol64};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPECTED_FAILURES: [u32; 2] = [3, 4];

struct Outcome {
    criterion: u32,
    pass: bool,
    detail: String,
}

/// Straight to stdout, past the test harness capture, so the lines show in every run.
fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
}

fn report(criterion: u32, pass: bool, detail: impl Into<String>) -> Outcome {
    let o = Outcome {
        criterion,
        pass,
        detail: detail.into(),
    };
    emit(&format!(
        "criterion {:2}: {} - {}",
        o.criterion,
        if o.pass { "PASS" } else { "FAIL" },
        o.detail
    ));
    o
}

fn sym(src: &str) -> Symbol64 {
    to_symbol(&parse(src).unwrap())
}

fn transition_values() -> Outcome {
    let cfg = LemmaConfig::<f64>::default();
    let start = Instant::now();
    let checks = transition_norms(&cfg).unwrap();
    let elapsed = start.elapsed();
    let worst = checks.iter().map(|c| (c.measured - 2.0).abs()).fold(0.0, f64::max);
    report(
        1,
        worst <= 1e-8 && elapsed < Duration::from_secs(1),
        format!("max |V-norm - 2| = {worst:.2e}, runtime {elapsed:?}"),
    )
}

fn shift_bound() -> Outcome {
    let checks = shift_bounds(&LemmaConfig::<f64>::default()).unwrap();
    let mut ok = true;
    let mut ratios = Vec::new();
    for c in &checks {
        let h = c.parameter.unwrap();
        let bound = 2.5 * std::f64::consts::PI * h.abs();
        // Closed form of the left side: three times tanh(pi |h| / 2).
        let exact = 3.0 * (std::f64::consts::PI * h.abs() / 2.0).tanh();
        ok &= c.measured <= bound + 1e-9 && (c.measured - exact).abs() <= 1e-9;
        ratios.push(format!("{}:{:.4}", h, c.measured / bound));
    }
    report(2, ok, format!("measured/bound ratios {}", ratios.join(" ")))
}

fn tail_bound() -> Outcome {
    let checks = tail_bounds(&LemmaConfig::<f64>::default()).unwrap();
    let claims_hold = checks.iter().all(|c| c.holds);
    let at_one = checks.iter().find(|c| c.parameter == Some(1.0)).unwrap().measured;
    let quoted = (at_one - 1.8674e-3).abs() <= 1e-7;
    // Whatever the claims, the quadrature must reproduce the true tail.
    let exact_ok = checks.iter().all(|c| {
        let m = c.parameter.unwrap();
        (c.measured - (1.0 - (std::f64::consts::PI * m).tanh())).abs() <= 1e-10
    });
    assert!(exact_ok, "tail quadrature disagrees with 1 - tanh(pi m)");
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.holds)
        .map(|c| {
            format!(
                "{}[m={}] {:.4e} vs {:.4e}",
                c.name,
                c.parameter.unwrap(),
                c.measured,
                c.reference
            )
        })
        .collect();
    report(
        3,
        claims_hold && quoted,
        format!(
            "value at m=1 is {at_one:.4e} (= 1 - tanh(pi)); {} of {} claims fail, e.g. {}",
            failing.len(),
            checks.len(),
            failing.first().cloned().unwrap_or_default()
        ),
    )
}

fn construction_and_norm_bound() -> (Outcome, Outcome) {
    let rc = RegularizerConfig::<f64>::default();
    let vc = VerifyConfig {
        classify: None,
        ..VerifyConfig::default()
    };
    let xs = XGrid::<f64>::default();
    let (mut identities, mut seam_ok, mut inversion_ok, mut norm_ok) = (true, true, true, true);
    let (mut worst_identity, mut worst_seam, mut worst_inversion) = (0.0f64, 0.0f64, 0.0f64);
    let mut seam_failures = Vec::new();
    let mut ratios = Vec::new();
    for s in suite_symbols::<f64>() {
        let res = regularize(&s.symbol, &rc, &vc).unwrap();
        let (r, pack) = (res.r, &res.transition);
        for t in [r, r.recip()] {
            let (cm, cp) = pack.c_pm(t).unwrap();
            worst_identity = worst_identity.max(cm.norm()).max(cp.norm());
        }
        for t in TGrid::geometric(r.recip(), r, 101).points() {
            worst_identity = worst_identity.max((pack.ell_minus(*t) + pack.ell_plus(*t) - 1.0).abs());
        }
        identities &= worst_identity <= 1e-12;

        let seam = seam_defects(&s.symbol, &res, &[1e-6], xs.points());
        let d = seam.iter().map(|s| s.defect).fold(0.0, f64::max);
        worst_seam = worst_seam.max(d);
        if d >= 1e-8 {
            seam_ok = false;
            seam_failures.push(format!("{} ({d:.1e})", s.source));
        }

        // a(t, +-inf) b(t, +-inf) on the probe grid and across the middle zone.
        let probes = vc.tgrid.merged(&TGrid::geometric(r.recip(), r, 17));
        for &t in probes.points() {
            let (am, ap) = s.symbol.declared_xlim(t).unwrap();
            let (bm, bp) = res.b.declared_xlim(t).unwrap();
            let e = (am * bm - 1.0).norm().max((ap * bp - 1.0).norm());
            worst_inversion = worst_inversion.max(e);
        }
        inversion_ok &= worst_inversion <= 1e-12;

        let nb = res.certificates.as_ref().unwrap().check("norm bound").unwrap();
        norm_ok &= nb.holds;
        ratios.push(format!("{:.3}", nb.measured / nb.bound));
    }
    let c4 = report(
        4,
        identities && seam_ok && inversion_ok,
        format!(
            "identities {} ({worst_identity:.1e}), boundary inversion {} ({worst_inversion:.1e}), seam {} (worst {worst_seam:.2e} at eps=1e-6{})",
            ok(identities),
            ok(inversion_ok),
            ok(seam_ok),
            if seam_failures.is_empty() {
                String::new()
            } else {
                format!("; above 1e-8: {}", seam_failures.join(", "))
            }
        ),
    );
    // The identities and the boundary inversion hold even though the seam clause does not.
    assert!(identities && inversion_ok);
    let c5 = report(
        5,
        norm_ok,
        format!("measured/bound per suite symbol: {}", ratios.join(" ")),
    );
    (c4, c5)
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn inverse_closedness() -> Outcome {
    let reports = inverse_closedness_suites(&InverseConfig::<f64>::default()).unwrap();
    let mut pass = !reports.is_empty();
    let mut worst = f64::NEG_INFINITY;
    for r in &reports {
        let bound = r.inverse_sup * r.inverse_sup * r.a_cb_norm + 1e-6;
        pass &= r.inverse_cb_norm <= bound;
        worst = worst.max(r.inverse_cb_norm / bound);
    }
    report(
        6,
        pass,
        format!("{} symbols, max measured/bound {worst:.4}", reports.len()),
    )
}

fn transform() -> Outcome {
    // exp(-ln(t)^2 / 2) has Mellin transform sqrt(2 pi) exp(-x^2 / 2).
    let grid = LogGrid::new(4096, -20.0, 20.0).unwrap();
    let f = log_sample(|t: f64| Complex64::new((-t.ln().powi(2) / 2.0).exp(), 0.0), &grid);
    let fh = mellin_transform(&f, &grid).unwrap();
    let exact: Vec<Complex64> = grid
        .x_freqs()
        .iter()
        .map(|x| Complex64::new((2.0 * std::f64::consts::PI).sqrt() * (-x * x / 2.0).exp(), 0.0))
        .collect();
    let diff: Vec<Complex64> = fh.iter().zip(&exact).map(|(a, b)| a - b).collect();
    let gauss = l2(&diff) / l2(&exact);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = LogGrid::new(1024, -12.0, 9.0).unwrap();
    let v: Vec<Complex64> = (0..g.n())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let vh = mellin_transform(&v, &g).unwrap();
    let back = inverse_mellin(&vh, &g).unwrap();
    let rt: Vec<Complex64> = back.iter().zip(&v).map(|(a, b)| a - b).collect();
    let round_trip = l2(&rt) / l2(&v);
    let plancherel =
        ((l2(&vh).powi(2) * g.dx() / (2.0 * std::f64::consts::PI)) / (l2(&v).powi(2) * g.du()) - 1.0).abs();

    // With du = ln 2 / 8 the multiplier 2^{-ix} is a shift by 8 cells: (Tf)(t) = f(t/2).
    let d = LogGrid::new(256, -16.0 * std::f64::consts::LN_2, 16.0 * std::f64::consts::LN_2).unwrap();
    let w: Vec<Complex64> = (0..d.n())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let shifted = apply_multiplier(|x: f64| Cx::from_polar(1.0, -x * std::f64::consts::LN_2), &w, &d).unwrap();
    let dil = (0..d.n())
        .map(|k| (shifted[k] - w[(k + d.n() - 8) % d.n()]).norm())
        .fold(0.0, f64::max);

    report(
        7,
        gauss <= 1e-6 && round_trip <= 1e-12 && plancherel <= 1e-12 && dil <= 1e-12,
        format!("Gaussian rel. L2 {gauss:.2e}, round trip {round_trip:.2e}, Plancherel {plancherel:.2e}, dilation {dil:.2e}"),
    )
}

const FAMILY: [&str; 3] = [
    "2 + so(1)*pplus(x)*exp(-ln(t)^2/100)",
    "2 + so(2)*pplus(x)*exp(-ln(t)^2/100)",
    "2 + so(1)*pminus(x)*exp(-ln(t)^2/50)",
];

fn fredholm_pipeline() -> Outcome {
    let start = Instant::now();
    let cfg = FredholmConfig::<f64>::default();
    let mut pass = true;
    let mut lines = Vec::new();
    for src in FAMILY {
        let a = sym(src);
        let rep = fredholm_analyze(&a, &cfg).unwrap();
        let ladder_ok = rep.residual_right.len() == 3 && rep.residual_left.len() == 3;
        let proxy = |ps: &[DecayProfile<f64>]| ps.iter().all(|p| p.sigmas.iter().skip(31).all(|&s| s <= 0.1));
        let holds = ladder_ok && proxy(&rep.residual_right) && proxy(&rep.residual_left);
        // Largest singular value cross-checked by power iteration on the smallest section.
        let b = rep.b.as_ref().unwrap();
        let (_, right, _) = residual_sections(&a, b, &LogGrid::new(128, cfg.u_min, cfg.u_max).unwrap()).unwrap();
        let sigma1 = power_norm(&right.entries, &PowerConfig::default()).unwrap();
        let agree = (sigma1 - rep.residual_right[0].sigmas[0]).abs() <= 1e-6 * sigma1.max(1e-12);
        pass &= holds && agree && rep.outcome.is_positive();
        let worst32 = rep
            .residual_right
            .iter()
            .chain(&rep.residual_left)
            .map(|p| p.sigmas[31])
            .fold(0.0, f64::max);
        let above = rep
            .residual_right
            .iter()
            .chain(&rep.residual_left)
            .map(|p| p.count_above())
            .max()
            .unwrap_or(0);
        lines.push(format!("[{src}: sigma_32 <= {worst32:.1e}, at most {above} above 0.1]"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    report(8, pass, format!("{} runtime {elapsed:.1?}", lines.join(" ")))
}

fn semi_commutators() -> Outcome {
    let pairs = [
        ("2 + exp(-ln(t)^2/8)", "pplus(x)"),
        ("pplus(x)", "2 + exp(-ln(t)^2/8)"),
        ("tanh(ln(t))", "1/(1 + x^2)"),
        ("1/(1 + x^2)", "tanh(ln(t))"),
        ("so(1)", "atan(x)"),
        ("atan(x)", "so(1)"),
    ];
    let constants = [
        ("3", "pplus(x)*exp(-ln(t)^2)"),
        ("pplus(x)*exp(-ln(t)^2)", "3"),
        ("2", "so(1)*tanh(x)"),
    ];
    let mut pass = true;
    let mut most = 0;
    for (a, b) in pairs {
        for n in [128, 256, 512] {
            let grid = LogGrid::new(n, -32.0, 32.0).unwrap();
            let r = semi_commutator_residual(&sym(a), &sym(b), &grid).unwrap();
            let p = DecayProfile::from_section(&r, 32, 0.1);
            pass &= p.holds;
            most = most.max(p.count_above());
        }
    }
    let mut worst_const = 0.0f64;
    for (a, b) in constants {
        let grid = LogGrid::new(256, -32.0, 32.0).unwrap();
        let r = semi_commutator_residual(&sym(a), &sym(b), &grid).unwrap();
        worst_const = worst_const.max(r.entries.max_abs());
    }
    pass &= worst_const <= 1e-10;
    report(
        9,
        pass,
        format!("{} pairs in both orders: at most {most} singular values above 0.1; constant factor residual {worst_const:.1e}", pairs.len() / 2),
    )
}

fn negative_gate() -> Outcome {
    let rep = fredholm_analyze(&sym("pplus(x)"), &FredholmConfig::default()).unwrap();
    let names_minus_inf = matches!(
        rep.verdict.witness.map(|w| w.point),
        Some(BoundaryPoint::XLimit {
            side: XSide::MinusInf,
            ..
        })
    );
    let out = Command::new(env!("CARGO_BIN_EXE_mellin-pdo"))
        .args(["fredholm", "--symbol", "pplus(x)"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    let code = out.status.code();
    report(
        10,
        !rep.verdict.passed
            && names_minus_inf
            && rep.regularizer.is_none()
            && code == Some(1)
            && text.contains("x=-inf"),
        format!(
            "verdict passed={}, witness {:?}, exit code {:?}",
            rep.verdict.passed,
            rep.verdict.witness.map(|w| w.point.to_string()),
            code
        ),
    )
}

fn arb_number() -> impl Strategy<Value = f64> {
    prop_oneof![
        (0u32..100).prop_map(f64::from),
        (0.0f64..1e3),
        (1e-9f64..1e-3),
        (1.0f64..1e12),
    ]
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        arb_number().prop_map(Expr::Num),
        arb_number().prop_map(Expr::Imag),
        Just(Expr::t()),
        Just(Expr::x()),
        Just(Expr::Const(Const::Pi)),
        Just(Expr::Const(Const::E)),
        Just(Expr::Const(Const::I)),
    ];
    leaf.prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (0..Func::ALL.len(), inner.clone()).prop_map(|(k, e)| Expr::call(Func::ALL[k], e)),
            (0..4usize, inner.clone(), inner.clone()).prop_map(|(k, l, r)| {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][k];
                let r = if op == BinOp::Div && r.is_zero() {
                    Expr::Num(1.0)
                } else {
                    r
                };
                Expr::bin(op, l, r)
            }),
            (inner.clone(), -4i32..5, any::<bool>())
                .prop_map(|(b, k, half)| Expr::pow(b, f64::from(k) + if half { 0.5 } else { 0.0 })),
            (-5.0f64..5.0, 0.0f64..10.0, inner.clone(), inner).prop_map(|(lo, w, i, o)| Expr::band(lo, lo + w, i, o)),
        ]
    })
}

/// Five-point central difference in `x`.
fn fd(e: &Expr, t: f64, x: f64) -> Complex64 {
    let h = 1e-3;
    let f = |dx: f64| eval_f64(e, t, x + dx);
    (f(-2.0 * h) - f(-h) * 8.0 + f(h) * 8.0 - f(2.0 * h)) / (12.0 * h)
}

fn dsl() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    let round_trip = runner.run(&arb_expr(), |e| {
        let printed = print_expr(&e);
        let back = parse(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(&back, &e, "printed as {}", printed);
        prop_assert_eq!(print_expr(&back), printed);
        Ok(())
    });

    // Each built-in through a non-trivial inner map; ln gets a positive argument.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for f in Func::ALL {
        let src = match f {
            Func::Ln => "ln(1.5 + sin(x))".to_string(),
            _ => format!("{}(0.7*x + 0.3*ln(t))", f.name()),
        };
        let e = parse(&src).unwrap();
        let d = derivative(&e);
        for _ in 0..100 {
            let (t, x) = (rng.gen_range(0.1..10.0), rng.gen_range(-2.0..2.0));
            let exact = eval_f64(&d, t, x);
            let approx = fd(&e, t, x);
            worst = worst.max((exact - approx).norm() / exact.norm().max(1e-12));
        }
    }

    let cases = [
        ("2 + (", 5usize, "unbalanced"),
        ("2 + foo(x)", 4, "unknown identifier"),
        ("2 $ x", 2, "lexical"),
    ];
    let mut errors_ok = true;
    for (src, offset, kind) in cases {
        let err = parse(src).unwrap_err();
        let kind_ok = match kind {
            "unbalanced" => err.kind == ParseErrorKind::UnbalancedParenthesis,
            "unknown identifier" => matches!(err.kind, ParseErrorKind::UnknownIdentifier(_)),
            _ => err.kind == ParseErrorKind::Lexical,
        };
        let out = Command::new(env!("CARGO_BIN_EXE_mellin-pdo"))
            .args(["analyze", "--symbol", src])
            .output()
            .unwrap();
        let stderr = String::from_utf8_lossy(&out.stderr);
        errors_ok &= kind_ok
            && err.offset == offset
            && out.status.code() == Some(2)
            && stderr.contains(&format!("offset {offset}"))
            && stderr.contains("expected");
    }
    report(
        11,
        round_trip.is_ok() && worst <= 1e-6 && errors_ok,
        format!(
            "10^4 round trips {}, max derivative rel. error {worst:.1e}, parse errors {}",
            match &round_trip {
                Ok(()) => "ok".to_string(),
                Err(e) => format!("FAIL ({e})"),
            },
            ok(errors_ok)
        ),
    )
}

#[test]
fn acceptance_criteria() {
    let mut outcomes = vec![transition_values(), shift_bound(), tail_bound()];
    let (c4, c5) = construction_and_norm_bound();
    outcomes.extend([
        c4,
        c5,
        inverse_closedness(),
        transform(),
        fredholm_pipeline(),
        semi_commutators(),
        negative_gate(),
        dsl(),
    ]);

    let failed: BTreeSet<u32> = outcomes.iter().filter(|o| !o.pass).map(|o| o.criterion).collect();
    let expected: BTreeSet<u32> = EXPECTED_FAILURES.into_iter().collect();
    emit(&format!("failing criteria: {failed:?} (expected {expected:?})"));
    assert_eq!(failed, expected);
}
