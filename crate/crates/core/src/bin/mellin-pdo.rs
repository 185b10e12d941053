use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mellin_pdo::dsl::SymbolSpec;
use mellin_pdo::fredholm::{fredholm_analyze, strong_regularize, FredholmConfig, FredholmReport};
use mellin_pdo::lemmas::{elementary_suite, inverse_closedness_suites, suite_symbols, LemmaConfig};
use mellin_pdo::mellin::{apply_op, assemble_op_section, write_section, LogGrid};
use mellin_pdo::regularizer::{regularize, RegularizerConfig, RegularizerResult, VerifyConfig};
use mellin_pdo::report::{
    analyze, format_shortest, to_json, write_decay_csv, write_quantities_csv, AnalyzeConfig, Quantity,
};
use mellin_pdo::symbol::{InverseConfig, NormConfig, TGrid};
use mellin_pdo::{Cx, Error, Symbol};

/// Mellin pseudodifferential operators: norms, regularizers and Fredholm evidence.
///
/// Exit codes: 0 success, 1 negative verdict, 2 usage or parse error,
/// 3 numerical non-convergence.
#[derive(Parser)]
#[command(name = "mellin-pdo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// V-norms, C_b(V) norm and class-membership evidence of a symbol.
    Analyze(Common),
    /// Builds the regularizer symbol b and checks its certificates.
    Regularize {
        #[command(flatten)]
        common: Common,
        /// Writes b as a symbol spec file.
        #[arg(long)]
        b_spec: Option<PathBuf>,
    },
    /// Boundary gate, regularizer and singular-value decay of the residuals.
    Fredholm {
        #[command(flatten)]
        common: Common,
        /// Use b = 1/a directly; requires |a| bounded away from zero everywhere.
        #[arg(long)]
        strong: bool,
        #[arg(long, default_value_t = 32)]
        k0: usize,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
    },
    /// Applies Op(a) to samples read as CSV `t,re,im`.
    Apply {
        #[command(flatten)]
        common: Common,
        /// Input CSV; standard input when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output CSV; standard output when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also writes the dense section of Op(a) in binary form.
        #[arg(long)]
        export_section: Option<PathBuf>,
    },
    /// Checks the properties of p+- and the inverse-closedness inequalities.
    VerifyLemmas(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Symbol spec file or inline expression, e.g. "2 + pplus(x)".
    #[arg(long)]
    symbol: Option<String>,
    /// Quadrature tolerance of the norm computations.
    #[arg(long)]
    tol: Option<f64>,
    /// Probe points t = 2^k for k in kmin..=kmax.
    #[arg(long, value_name = "KMIN:KMAX", value_parser = parse_tgrid, allow_hyphen_values = true)]
    tgrid: Option<(i32, i32)>,
    /// Grid size; `fredholm` accepts a comma-separated ladder.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, allow_hyphen_values = true)]
    umin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    umax: Option<f64>,
    /// JSON report path; `-` prints it instead of the summary.
    #[arg(long)]
    json: Option<PathBuf>,
    /// CSV path: quantities, or singular values for `fredholm`.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Use extrapolated fibre values even when their profile did not converge.
    #[arg(long)]
    allow_nonconverged_fibers: bool,
}

fn parse_tgrid(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.split_once(':').ok_or("expected KMIN:KMAX")?;
    let kmin: i32 = a.trim().parse().map_err(|e| format!("kmin: {e}"))?;
    let kmax: i32 = b.trim().parse().map_err(|e| format!("kmax: {e}"))?;
    if kmin > kmax {
        return Err("kmin must not exceed kmax".into());
    }
    Ok((kmin, kmax))
}

/// Failures that end the run, with their exit code.
enum Failure {
    Negative(String),
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            e if e.is_numerical() => Failure::Numerical(msg),
            Error::NotInvertible { .. }
            | Error::DegenerateAtInfinity { .. }
            | Error::NoBoundedAwayRadius { .. }
            | Error::NotBoundedAway(_)
            | Error::BoundaryNotVerified(_) => Failure::Negative(msg),
            _ => Failure::Usage(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Run = Result<(), Failure>;

impl Common {
    fn symbol(&self) -> Result<Symbol<f64>, Failure> {
        let arg = self
            .symbol
            .as_deref()
            .ok_or_else(|| Failure::Usage("--symbol is required".into()))?;
        let spec = SymbolSpec::resolve(arg)?;
        spec.to_symbol().map_err(|e| match e {
            Error::Parse(p) => Failure::Usage(format!("parse error in {:?}: {p}", spec.expr)),
            other => other.into(),
        })
    }

    fn tgrid(&self) -> Option<TGrid<f64>> {
        self.tgrid.map(|(a, b)| TGrid::dyadic(a, b))
    }

    fn norm(&self) -> NormConfig<f64> {
        self.tol.map(NormConfig::with_tol).unwrap_or_default()
    }

    fn regularizer(&self) -> (RegularizerConfig<f64>, VerifyConfig<f64>) {
        let mut rc = RegularizerConfig {
            allow_nonconverged: self.allow_nonconverged_fibers,
            ..RegularizerConfig::default()
        };
        let mut vc = VerifyConfig {
            norm: self.norm(),
            ..VerifyConfig::default()
        };
        if let Some(g) = self.tgrid() {
            rc.tgrid = g.clone();
            vc.tgrid = g.clone();
            if let Some(c) = vc.classify.as_mut() {
                c.tgrid = g;
            }
        }
        (rc, vc)
    }

    fn json_to_stdout(&self) -> bool {
        self.json.as_deref() == Some(Path::new("-"))
    }

    fn emit_json<S: Serialize>(&self, value: &S) -> Run {
        if let Some(path) = &self.json {
            let text = to_json(value)?;
            if self.json_to_stdout() {
                print!("{text}");
            } else {
                std::fs::write(path, text)?;
            }
        }
        Ok(())
    }

    fn csv_writer(&self) -> Result<Option<BufWriter<File>>, Failure> {
        Ok(match &self.csv {
            Some(p) => Some(BufWriter::new(File::create(p)?)),
            None => None,
        })
    }
}

macro_rules! say {
    ($c:expr, $($arg:tt)*) => {
        if !$c.json_to_stdout() {
            println!($($arg)*);
        }
    };
}

fn run_analyze(c: &Common) -> Run {
    let sym = c.symbol()?;
    let mut cfg = AnalyzeConfig {
        norm: c.norm(),
        ..AnalyzeConfig::default()
    };
    if let Some(g) = c.tgrid() {
        cfg.tgrid = g;
    }
    let rep = analyze(&sym, &cfg)?;
    say!(c, "symbol      {}", rep.label);
    say!(c, "sup |a|     {}", format_shortest(rep.norms.sup_norm));
    say!(
        c,
        "C_b(V) norm {} (at t={})",
        format_shortest(rep.norms.v_norm),
        rep.norms.argmax_t
    );
    say!(c, "quadrature  error bound {:e}", rep.norms.quadrature_error_bound);
    let v = &rep.membership.verdict;
    say!(c, "membership  {v:?}");
    c.emit_json(&rep)?;
    if let Some(w) = c.csv_writer()? {
        write_quantities_csv(&rep.quantities(), w)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RegularizeOutput<'a> {
    #[serde(flatten)]
    result: &'a RegularizerResult<f64>,
    b: Option<SymbolSpec>,
}

fn run_regularize(c: &Common, b_spec: Option<&Path>) -> Run {
    let sym = c.symbol()?;
    let (rc, vc) = c.regularizer();
    let res = regularize(&sym, &rc, &vc)?;
    let spec = SymbolSpec::from_symbol(&res.b);
    say!(
        c,
        "r={} A_minus={} A_plus={} A(r)={} C={}",
        res.r,
        res.a_minus,
        res.a_plus,
        res.a_of_r,
        res.c
    );
    let mut rows = vec![
        Quantity::new("r", None, res.r, None),
        Quantity::new("A_minus", None, res.a_minus, None),
        Quantity::new("A_plus", None, res.a_plus, None),
        Quantity::new("A_of_r", None, res.a_of_r, None),
        Quantity::new("C", None, res.c, None),
    ];
    if let Some(cert) = &res.certificates {
        for ch in &cert.checks {
            let mark = if ch.holds { "ok  " } else { "FAIL" };
            say!(
                c,
                "{mark} {:28} {:e} <= {:e} {}",
                ch.name,
                ch.measured,
                ch.bound,
                ch.note.as_deref().unwrap_or("")
            );
            rows.push(Quantity::new(ch.name.as_str(), None, ch.measured, None));
        }
        for s in &cert.seam {
            rows.push(Quantity::new(
                format!("seam defect at t={}", s.seam),
                Some(s.eps),
                s.defect,
                None,
            ));
        }
    }
    match (&spec, b_spec) {
        (Some(s), Some(path)) => s.save(path)?,
        (None, Some(_)) => eprintln!("warning: the symbol carries no expression; b cannot be written as a spec"),
        _ => {}
    }
    c.emit_json(&RegularizeOutput { result: &res, b: spec })?;
    if let Some(w) = c.csv_writer()? {
        write_quantities_csv(&rows, w)?;
    }
    Ok(())
}

fn run_fredholm(c: &Common, strong: bool, k0: usize, tau: f64) -> Run {
    let sym = c.symbol()?;
    let (regularizer, verify) = c.regularizer();
    let mut cfg = FredholmConfig {
        regularizer,
        verify,
        k0,
        tau,
        ..FredholmConfig::default()
    };
    if !c.n.is_empty() {
        cfg.ladder = c.n.clone();
    }
    if let Some(u) = c.umin {
        cfg.u_min = u;
    }
    if let Some(u) = c.umax {
        cfg.u_max = u;
    }
    let rep: FredholmReport<f64> = if strong {
        strong_regularize(&sym, &cfg)?
    } else {
        fredholm_analyze(&sym, &cfg)?
    };
    let v = &rep.verdict;
    say!(c, "symbol    {}", rep.label);
    say!(
        c,
        "boundary  x-lines {} fibres {} min |a| {:e}",
        ok(v.xline_ok),
        ok(v.tfiber_ok),
        v.min_modulus
    );
    if let Some(w) = &v.witness {
        say!(c, "witness   {} (|a| = {:e})", w.point, w.modulus);
    }
    for cav in &v.caveats {
        say!(c, "caveat    {cav}");
    }
    if let Some(r) = &rep.regularizer {
        say!(c, "b         r={} A(r)={} C={}", r.r, r.a_of_r, r.c);
    }
    for (name, ps) in [
        ("Op(b)Op(a)-I", &rep.residual_left),
        ("Op(a)Op(b)-I", &rep.residual_right),
    ] {
        for p in ps {
            say!(
                c,
                "{name} n={:4} sigma_1={:.3e} sigma_{}={:.3e} above tau: {}",
                p.n,
                p.sigmas[0],
                p.k0,
                p.sigmas.get(p.k0 - 1).copied().unwrap_or(0.0),
                p.count_above()
            );
        }
    }
    say!(c, "outcome   {}", rep.outcome_text);
    c.emit_json(&rep)?;
    if let Some(w) = c.csv_writer()? {
        write_decay_csv(
            &[
                ("left", &rep.residual_left[..]),
                ("right", &rep.residual_right[..]),
                ("c", &rep.degenerate_product_check[..]),
            ],
            w,
        )?;
    }
    if rep.outcome.is_positive() {
        Ok(())
    } else {
        Err(Failure::Negative(rep.outcome_text.clone()))
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn read_samples<R: Read>(input: R, grid: &LogGrid<f64>) -> Result<Vec<Cx<f64>>, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Failure::Usage(format!("input: {e}")))?;
        if rec.len() != 3 {
            return Err(Failure::Usage(format!(
                "input: expected t,re,im, got {} fields",
                rec.len()
            )));
        }
        let nums: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let Ok(nums) = nums else {
            if out.is_empty() && rec.get(0) == Some("t") {
                continue;
            }
            return Err(Failure::Usage(format!("input: not a number in {:?}", rec)));
        };
        let k = out.len();
        if k >= grid.n() {
            return Err(Failure::Usage(format!("input: more than n={} samples", grid.n())));
        }
        let expected = grid.t(k);
        if ((nums[0] - expected) / expected).abs() > 1e-9 {
            return Err(Failure::Usage(format!(
                "input: sample {k} has t={} but the grid point is t={expected}",
                nums[0]
            )));
        }
        out.push(Cx::new(nums[1], nums[2]));
    }
    if out.len() != grid.n() {
        return Err(Failure::Usage(format!(
            "input: expected {} samples, got {}",
            grid.n(),
            out.len()
        )));
    }
    Ok(out)
}

fn run_apply(c: &Common, input: Option<&Path>, output: Option<&Path>, export: Option<&Path>) -> Run {
    let sym = c.symbol()?;
    let n = match c.n.as_slice() {
        [] => 256,
        [n] => *n,
        _ => return Err(Failure::Usage("apply takes a single --n".into())),
    };
    let grid = LogGrid::new(n, c.umin.unwrap_or(-16.0), c.umax.unwrap_or(16.0))?;
    let samples = match input {
        Some(p) => read_samples(BufReader::new(File::open(p)?), &grid)?,
        None => read_samples(io::stdin().lock(), &grid)?,
    };
    let result = apply_op(&sym, &samples, &grid)?;
    let sink: Box<dyn Write> = match output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let csv_err = |e: csv::Error| Failure::Usage(format!("output: {e}"));
    w.write_record(["t", "re", "im"]).map_err(csv_err)?;
    for (k, v) in result.iter().enumerate() {
        w.write_record([format_shortest(grid.t(k)), format_shortest(v.re), format_shortest(v.im)])
            .map_err(csv_err)?;
    }
    w.flush()?;
    if let Some(p) = export {
        let sec = assemble_op_section(&sym, &grid)?;
        write_section(&sec, BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct LemmaOutput<T> {
    elementary: Vec<mellin_pdo::lemmas::LemmaCheck<T>>,
    inverse_closedness: Vec<mellin_pdo::symbol::InverseClosednessReport<T>>,
    all_hold: bool,
}

fn run_verify_lemmas(c: &Common) -> Run {
    let mut cfg = LemmaConfig::default();
    if let Some(tol) = c.tol {
        cfg.norm = NormConfig::with_tol(tol);
    }
    let elementary = elementary_suite(&cfg)?;
    let mut icfg = InverseConfig::default();
    if let Some(g) = c.tgrid() {
        icfg.tgrid = g;
    }
    let inverse_closedness = inverse_closedness_suites(&icfg)?;
    let mut rows = Vec::new();
    for l in &elementary {
        let mark = if l.holds { "ok  " } else { "FAIL" };
        let param = l.parameter.map(|p| format!("[{p}]")).unwrap_or_default();
        say!(
            c,
            "{mark} {}{param}: measured {:e}, reference {:e}, ratio {:.6}",
            l.name,
            l.measured,
            l.reference,
            l.ratio
        );
        rows.push(Quantity::new(
            l.name.as_str(),
            l.parameter,
            l.measured,
            Some(l.error_bound),
        ));
    }
    let labels = suite_symbols::<f64>()
        .into_iter()
        .filter(|s| s.bounded_away)
        .map(|s| s.source);
    for (rep, label) in inverse_closedness.iter().zip(labels) {
        for ch in &rep.checks {
            let mark = if ch.holds { "ok  " } else { "FAIL" };
            say!(
                c,
                "{mark} {} on {}: {:e} <= {:e}",
                ch.name,
                label,
                ch.measured,
                ch.bound
            );
            rows.push(Quantity::new(
                format!("{} on {}", ch.name, label),
                ch.parameter,
                ch.measured,
                None,
            ));
        }
    }
    let all_hold =
        elementary.iter().all(|l| l.holds) && inverse_closedness.iter().all(|r| r.checks.iter().all(|c| c.holds));
    c.emit_json(&LemmaOutput {
        elementary,
        inverse_closedness,
        all_hold,
    })?;
    if let Some(w) = c.csv_writer()? {
        write_quantities_csv(&rows, w)?;
    }
    if all_hold {
        Ok(())
    } else {
        Err(Failure::Negative("some checks failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze(c) => run_analyze(c),
        Command::Regularize { common, b_spec } => run_regularize(common, b_spec.as_deref()),
        Command::Fredholm {
            common,
            strong,
            k0,
            tau,
        } => run_fredholm(common, *strong, *k0, *tau),
        Command::Apply {
            common,
            input,
            output,
            export_section,
        } => run_apply(common, input.as_deref(), output.as_deref(), export_section.as_deref()),
        Command::VerifyLemmas(c) => run_verify_lemmas(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Negative(m)) => {
            eprintln!("{m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
