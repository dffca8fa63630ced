//! Command-line driver: parses arguments, runs one command, prints one
//! report, and maps the outcome to an exit code.

pub mod literal;
pub mod report;
pub mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use markoff_core::farey::{circular_set, level_order, regions_at_level, Arc, SubtreeSpec, Triangle};
use markoff_core::identity::{
    asymptotic_scan, asymptotic_subsequence, bq_classify, circular_sum, mcshane_sum, psi_fan_period_sum,
    psi_reciprocity, quotient_sum, triple_psi, AsymptoticPoint, Classification, CHECK_TOL,
};
use markoff_core::markoff::{invariant_map, omega_leq, Matrix2};
use markoff_core::{Budget, Error, FareyFraction, MuMarkoffMap, SumReport};
use num_complex::Complex64;
use report::{finite, AveragePoint, CheckRow, RegionValue, Report, RunConfig};
use std::io::Write;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INAPPLICABLE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INVALID: i32 = 65;
pub const EXIT_IO: i32 = 66;

/// Caps the worker count of the parallel summations.
pub const THREADS_VAR: &str = "MARKOFF_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "markoff-lab",
    version,
    about = "Identities for Markoff maps on the Farey tree"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SeedArgs {
    /// Values x,y,z on 0/1, 1/1, 1/0 as complex literals a+bi.
    #[arg(long, value_parser = literal::triple, allow_hyphen_values = true,
          required_unless_present = "gen_a", conflicts_with = "gen_a")]
    pub seed: Option<[Complex64; 3]>,
    /// First generator, row by row: a,b,c,d.
    #[arg(long, value_parser = literal::matrix, allow_hyphen_values = true, requires = "gen_b")]
    pub gen_a: Option<Matrix2>,
    /// Second generator, row by row: a,b,c,d.
    #[arg(long, value_parser = literal::matrix, allow_hyphen_values = true, requires = "gen_a")]
    pub gen_b: Option<Matrix2>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BudgetArgs {
    /// Largest Fibonacci level a search may visit.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_fib: u64,
    /// Total regions a search may visit.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub node_cap: u64,
    /// Terms a single fan summation may take.
    #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub fan_cap: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            max_fib: self.max_fib,
            node_cap: self.node_cap,
            fan_cap: self.fan_cap,
        }
    }

    fn echo(&self, cfg: &mut RunConfig) {
        cfg.max_fib = Some(self.max_fib);
        cfg.node_cap = Some(self.node_cap);
        cfg.fan_cap = Some(self.fan_cap);
    }
}

#[derive(Args, Debug, Clone)]
pub struct FanArgs {
    /// Denominator p of the rotation angle qπ/p.
    #[arg(long)]
    pub p: i64,
    /// Numerator q of the rotation angle qπ/p.
    #[arg(long)]
    pub q: i64,
    /// Value on 0/1.
    #[arg(long, value_parser = literal::complex, allow_hyphen_values = true)]
    pub y0: Complex64,
    /// Sign of the rotation taking y0 to the value on 1/1.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub ratio_sign: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Value of the map on one region.
    Eval {
        #[command(flatten)]
        seed: SeedArgs,
        /// Region p/q.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Regions with |φ| ≤ k, or every region up to a level with --depth.
    Omega {
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, default_value_t = 2.0, value_parser = literal::positive)]
        k: f64,
        /// Dump every region with Fibonacci level at most this instead.
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// BQ classification from a scan of |φ| ≤ 2.
    Bq {
        #[command(flatten)]
        seed: SeedArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sum of the kernel over all regions against its target.
    Sum {
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, default_value_t = 1e-6, value_parser = literal::positive)]
        tol: f64,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Sum over the regions modulo the elliptic fan symmetry around 1/0.
    Quotient {
        #[command(flatten)]
        fan: FanArgs,
        #[arg(long, default_value_t = 1e-6, value_parser = literal::positive)]
        tol: f64,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Edge weights summed over one period of a periodic fan.
    FanPeriod {
        #[command(flatten)]
        fan: FanArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Running averages S_N for an irrational elliptic angle at 1/0.
    Asymptotic {
        #[command(flatten)]
        seed: SeedArgs,
        /// Values of N.
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        n: Vec<u64>,
        /// Also evaluate at this many continued fraction denominators of the angle.
        #[arg(long)]
        convergents: Option<usize>,
        /// Confirms the angle of φ(1/0) is not a rational multiple of π,
        /// which finite precision cannot decide.
        #[arg(long)]
        assume_irrational_angle: bool,
        #[arg(long, default_value_t = 1e-6, value_parser = literal::positive)]
        tol: f64,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Edge weight reciprocity, circular set sums and the vertex identity.
    Checks {
        #[command(flatten)]
        seed: SeedArgs,
        /// Subtree edges as a:b pairs separated by commas; defaults to the base vertex.
        #[arg(long, allow_hyphen_values = true)]
        subtree: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// SVG of the Farey tessellation colored by log⁺|φ|.
    Svg {
        #[command(flatten)]
        seed: SeedArgs,
        #[arg(long, default_value_t = 8)]
        depth: u64,
        /// Visible interval a,b of the real line.
        #[arg(long, value_parser = literal::window, default_value = "0,2", allow_hyphen_values = true)]
        window: (FareyFraction, FareyFraction),
        /// log⁺|φ| at which the color ramp saturates.
        #[arg(long, default_value_t = 10.0, value_parser = literal::positive)]
        cap: f64,
        #[arg(long)]
        out: Option<String>,
    },
}

/// A failed run: its exit code and the JSON it prints.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub body: serde_json::Value,
}

impl Failure {
    fn new(code: i32, kind: &str, message: String) -> Self {
        Failure {
            code,
            body: serde_json::json!({ "error": message, "kind": kind, "exit_code": code }),
        }
    }

    pub fn usage(message: String) -> Self {
        Failure::new(EXIT_USAGE, "usage", message)
    }

    fn io(message: String) -> Self {
        Failure::new(EXIT_IO, "io", message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Inapplicable { witness, .. } => {
                let mut f = Failure::new(EXIT_INAPPLICABLE, "inapplicable", message);
                if let Some((r, v)) = witness {
                    f.body["witness"] = serde_json::to_value(RegionValue::new(r, v)).unwrap();
                }
                f
            }
            Error::Inconclusive(_) => Failure::new(EXIT_INCONCLUSIVE, "inconclusive", message),
            _ => Failure::new(EXIT_INVALID, "invalid", message),
        }
    }
}

/// What a successful run prints, and where.
pub struct Output {
    pub code: i32,
    pub text: String,
    pub out: Option<String>,
}

fn json(r: &Report) -> String {
    serde_json::to_string(r).expect("reports serialize") + "\n"
}

fn emit(report: Report, code: i32, out: Option<String>) -> Output {
    Output {
        code,
        text: json(&report),
        out,
    }
}

fn build_map(seed: &SeedArgs, cfg: &mut RunConfig) -> Result<MuMarkoffMap, Failure> {
    let m = match (&seed.seed, &seed.gen_a, &seed.gen_b) {
        (Some(s), _, _) => {
            cfg.seed_source = Some("triple".into());
            MuMarkoffMap::from_triple(s[0], s[1], s[2])?
        }
        (None, Some(a), Some(b)) => {
            cfg.seed_source = Some("generators".into());
            MuMarkoffMap::from_generators(a, b)?
        }
        _ => return Err(Failure::usage("give --seed or both --gen-a and --gen-b".into())),
    };
    Ok(m)
}

fn base_report(command: &str, m: &MuMarkoffMap, config: RunConfig) -> Report {
    Report {
        command: command.into(),
        seed: Some(m.seed().map(literal::show)),
        mu: Some(literal::show(m.mu())),
        config,
        ..Report::default()
    }
}

fn with_sum(mut r: Report, s: &SumReport) -> Report {
    r.value_re = Some(s.value.re);
    r.value_im = Some(s.value.im);
    r.target_re = Some(s.target.re);
    r.target_im = Some(s.target.im);
    r.residual = finite(s.residual);
    r.tail_bound = finite(s.tail_bound);
    r.levels = Some(s.levels_used);
    r.regions = Some(s.regions_summed);
    r.converged = Some(s.converged);
    r
}

fn sum_code(s: &SumReport, tol: f64) -> i32 {
    if s.converged && s.residual <= tol {
        EXIT_OK
    } else {
        EXIT_INCONCLUSIVE
    }
}

fn fan_map(fan: &FanArgs, cfg: &mut RunConfig) -> Result<(MuMarkoffMap, markoff_core::InvariantMapSpec), Failure> {
    cfg.p = Some(fan.p);
    cfg.q = Some(fan.q);
    cfg.y0 = Some(literal::show(fan.y0));
    cfg.ratio_sign = Some(fan.ratio_sign);
    Ok(invariant_map(fan.p, fan.q, fan.y0, fan.ratio_sign)?)
}

fn point(p: &AsymptoticPoint) -> AveragePoint {
    AveragePoint {
        n: p.n,
        re: p.sum.re,
        im: p.sum.im,
        re_over_n: p.re_over_n,
        residue: p.residue,
        tail_bound: finite(p.tail_bound),
        converged: p.converged,
    }
}

fn parse_subtree(s: &str) -> Result<SubtreeSpec, Failure> {
    let mut edges = vec![];
    for pair in s.split(',') {
        let (a, b) = pair
            .split_once(':')
            .ok_or_else(|| Failure::usage(format!("expected a:b, got '{pair}'")))?;
        let a = literal::fraction(a).map_err(Failure::usage)?;
        let b = literal::fraction(b).map_err(Failure::usage)?;
        edges.push(markoff_core::TreeEdge::new(a, b)?);
    }
    Ok(SubtreeSpec::from_edges(edges)?)
}

fn check_row(name: String, c: &markoff_core::identity::CheckResult) -> CheckRow {
    CheckRow {
        name,
        ok: c.ok,
        value_re: c.value.re,
        value_im: c.value.im,
        target_re: c.target.re,
        target_im: c.target.im,
        residual: c.residual,
    }
}

fn csv_rows(rows: &[RegionValue]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(vec![]);
    for r in rows {
        w.serialize(r).map_err(|e| Failure::io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Runs one parsed command.
pub fn execute(cmd: Command, threads: Option<usize>) -> Result<Output, Failure> {
    let mut cfg = RunConfig {
        threads,
        ..RunConfig::default()
    };
    match cmd {
        Command::Eval { seed, at, out } => {
            let m = build_map(&seed, &mut cfg)?;
            let at = at.ok_or_else(|| Failure::usage("eval needs --at p/q".into()))?;
            let r = literal::fraction(&at).map_err(Failure::usage)?;
            cfg.at = Some(r.to_string());
            cfg.out = out.clone();
            let v = m.eval(r);
            let mut rep = base_report("eval", &m, cfg);
            rep.value_re = Some(v.re);
            rep.value_im = Some(v.im);
            rep.abs = Some(v.norm());
            rep.fib = Some(r.fib());
            Ok(emit(rep, EXIT_OK, out))
        }
        Command::Omega {
            seed,
            k,
            depth,
            format,
            budget,
            out,
        } => {
            let m = build_map(&seed, &mut cfg)?;
            budget.echo(&mut cfg);
            cfg.format = Some(format!("{format:?}").to_lowercase());
            cfg.out = out.clone();
            let (mut rows, complete) = match depth {
                Some(d) => {
                    cfg.depth = Some(d);
                    let all = Arc::new(FareyFraction::INFINITY, FareyFraction::INFINITY);
                    let mut regions = if d >= 1 { vec![FareyFraction::INFINITY] } else { vec![] };
                    for n in 1..=d {
                        regions.extend(regions_at_level(n, all));
                    }
                    (regions.into_iter().map(|r| (r, m.eval(r))).collect::<Vec<_>>(), true)
                }
                None => {
                    cfg.k = Some(k);
                    let scan = omega_leq(&m, k, budget.budget());
                    (scan.regions, scan.complete)
                }
            };
            rows.sort_by(|a, b| level_order(&a.0, &b.0));
            let rows: Vec<RegionValue> = rows.into_iter().map(|(r, v)| RegionValue::new(r, v)).collect();
            let code = if complete { EXIT_OK } else { EXIT_INCONCLUSIVE };
            if format == Format::Csv {
                return Ok(Output {
                    code,
                    text: csv_rows(&rows)?,
                    out,
                });
            }
            let mut rep = base_report("omega", &m, cfg);
            rep.regions = Some(rows.len() as u64);
            rep.complete = Some(complete);
            rep.region_values = Some(rows);
            Ok(emit(rep, code, out))
        }
        Command::Bq { seed, budget, out } => {
            let m = build_map(&seed, &mut cfg)?;
            budget.echo(&mut cfg);
            cfg.out = out.clone();
            let b = bq_classify(&m, budget.budget());
            let code = match b.classification {
                Classification::BQ | Classification::ExtendedBQ => EXIT_OK,
                Classification::ViolatesOpenInterval => EXIT_INAPPLICABLE,
                Classification::Inconclusive => EXIT_INCONCLUSIVE,
            };
            let mut rep = base_report("bq", &m, cfg);
            rep.classification = Some(format!("{:?}", b.classification));
            rep.witnesses = Some(b.witnesses.iter().map(|(r, v)| RegionValue::new(*r, *v)).collect());
            rep.region_values = Some(b.omega2.iter().map(|(r, v)| RegionValue::new(*r, *v)).collect());
            rep.complete = Some(b.complete);
            Ok(emit(rep, code, out))
        }
        Command::Sum { seed, tol, budget, out } => {
            let m = build_map(&seed, &mut cfg)?;
            budget.echo(&mut cfg);
            cfg.tol = Some(tol);
            cfg.out = out.clone();
            let s = mcshane_sum(&m, tol, budget.budget())?;
            Ok(emit(with_sum(base_report("sum", &m, cfg), &s), sum_code(&s, tol), out))
        }
        Command::Quotient { fan, tol, budget, out } => {
            let (m, spec) = fan_map(&fan, &mut cfg)?;
            budget.echo(&mut cfg);
            cfg.tol = Some(tol);
            cfg.out = out.clone();
            let s = quotient_sum(&spec, &m, tol, budget.budget())?;
            Ok(emit(
                with_sum(base_report("quotient", &m, cfg), &s),
                sum_code(&s, tol),
                out,
            ))
        }
        Command::FanPeriod { fan, out } => {
            let (m, spec) = fan_map(&fan, &mut cfg)?;
            cfg.out = out.clone();
            let v = psi_fan_period_sum(&spec, &m)?;
            let residual = m.kernels().distance(v.to_complex(), Complex64::new(0.0, 0.0));
            let mut rep = base_report("fan-period", &m, cfg);
            rep.value_re = Some(v.re);
            rep.value_im = Some(v.im);
            rep.target_re = Some(0.0);
            rep.target_im = Some(0.0);
            rep.residual = Some(residual);
            let code = if residual <= CHECK_TOL {
                EXIT_OK
            } else {
                EXIT_INCONCLUSIVE
            };
            Ok(emit(rep, code, out))
        }
        Command::Asymptotic {
            seed,
            n,
            convergents,
            assume_irrational_angle,
            tol,
            budget,
            out,
        } => {
            if !assume_irrational_angle {
                return Err(Failure::usage(
                    "asymptotic needs --assume-irrational-angle: whether the angle of φ(1/0) is a rational multiple of π cannot be decided numerically".into(),
                ));
            }
            let m = build_map(&seed, &mut cfg)?;
            budget.echo(&mut cfg);
            cfg.tol = Some(tol);
            cfg.ns = Some(n.clone());
            cfg.convergents = convergents;
            cfg.out = out.clone();
            let mut pts = asymptotic_scan(&m, &n, tol, budget.budget())?;
            if let Some(k) = convergents {
                pts.extend(asymptotic_subsequence(&m, k, tol, budget.budget())?);
            }
            let converged = pts.iter().all(|p| p.converged);
            let mut rep = base_report("asymptotic", &m, cfg);
            if let Some(last) = pts.last() {
                rep.value_re = Some(last.sum.re);
                rep.value_im = Some(last.sum.im);
                rep.target_re = Some(0.0);
                rep.target_im = Some(0.0);
                rep.residual = Some(last.residue);
            }
            rep.converged = Some(converged);
            rep.points = Some(pts.iter().map(point).collect());
            Ok(emit(rep, if converged { EXIT_OK } else { EXIT_INCONCLUSIVE }, out))
        }
        Command::Checks { seed, subtree, out } => {
            let m = build_map(&seed, &mut cfg)?;
            cfg.out = out.clone();
            let t = match &subtree {
                Some(s) => parse_subtree(s)?,
                None => SubtreeSpec::vertex(Triangle::base()),
            };
            let mut rows = vec![];
            for e in circular_set(&t)? {
                rows.push(check_row(format!("reciprocity {e}"), &psi_reciprocity(&m, e)?));
            }
            rows.push(check_row("circular sum".into(), &circular_sum(&m, &t)?));
            for v in t.vertices() {
                rows.push(check_row(format!("vertex {v}"), &triple_psi(&m, v)?));
            }
            let ok = rows.iter().all(|r| r.ok);
            let mut rep = base_report("checks", &m, cfg);
            rep.residual = rows.iter().map(|r| r.residual).reduce(f64::max);
            rep.checks = Some(rows);
            Ok(emit(rep, if ok { EXIT_OK } else { EXIT_INCONCLUSIVE }, out))
        }
        Command::Svg {
            seed,
            depth,
            window,
            cap,
            out,
        } => {
            let m = build_map(&seed, &mut cfg)?;
            cfg.depth = Some(depth);
            cfg.window = Some((window.0.to_string(), window.1.to_string()));
            cfg.cap = Some(cap);
            let pic = svg::render(&m, depth, window, cap);
            match out {
                None => Ok(Output {
                    code: EXIT_OK,
                    text: pic.svg,
                    out: None,
                }),
                Some(path) => {
                    write_file(&path, &pic.svg)?;
                    cfg.out = Some(path);
                    let mut rep = base_report("svg", &m, cfg);
                    rep.regions = Some(pic.regions);
                    Ok(emit(rep, EXIT_OK, None))
                }
            }
        }
    }
}

fn write_file(path: &str, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::io(format!("cannot write {path}: {e}")))
}

/// Reads the worker cap from the environment.
pub fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Failure::usage(format!(
                "{THREADS_VAR} must be a positive integer, got '{s}'"
            ))),
        },
    }
}

/// Parses `args`, runs the command and writes its output; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = Cli::try_parse_from(args)
        .map_err(|e| match e.kind() {
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Failure {
                code: EXIT_OK,
                body: serde_json::Value::String(e.to_string()),
            },
            _ => Failure::usage(e.to_string()),
        })
        .and_then(|cli| {
            let threads = threads_from_env()?;
            match threads {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Failure::usage(e.to_string()))?
                    .install(|| execute(cli.command, threads)),
                None => execute(cli.command, None),
            }
        })
        .and_then(|o| match &o.out {
            Some(path) => write_file(path, &o.text).map(|_| Output {
                text: String::new(),
                ..o
            }),
            None => Ok(o),
        });
    match result {
        Ok(o) => {
            let _ = stdout.write_all(o.text.as_bytes());
            o.code
        }
        Err(f) => {
            let text = match &f.body {
                serde_json::Value::String(s) => s.clone(),
                body => body.to_string() + "\n",
            };
            let _ = stdout.write_all(text.as_bytes());
            f.code
        }
    }
}
