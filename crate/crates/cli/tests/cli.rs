use markoff_core::farey::{level_order, regions_at_level, Arc};
use markoff_core::FareyFraction;
use markoff_lab::report::Report;
use std::process::Command;

struct Run {
    code: i32,
    stdout: String,
}

fn run_env(args: &[&str], threads: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_markoff-lab"));
    cmd.args(args).env_remove("MARKOFF_LAB_THREADS");
    if let Some(t) = threads {
        cmd.env("MARKOFF_LAB_THREADS", t);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, None)
}

fn report(r: &Run) -> Report {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout))
}

fn error_json(r: &Run) -> serde_json::Value {
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(v["error"].is_string(), "{}", r.stdout);
    v
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("markoff-lab-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn eval_examples() {
    let r = run(&["eval", "--seed", "3,3,3", "--at", "5/2"]);
    assert_eq!(r.code, 0);
    let rep = report(&r);
    assert_eq!((rep.value_re, rep.value_im, rep.fib), (Some(87.0), Some(0.0), Some(7)));

    let rep = report(&run(&["eval", "--seed", "0,2,2i", "--at", "1/0"]));
    assert_eq!((rep.value_re, rep.value_im), (Some(0.0), Some(2.0)));

    let r = run(&["eval", "--seed", "2,2,2"]);
    assert_eq!(r.code, 65);
    error_json(&r);

    let r = run(&["eval", "--seed", "3,3,3", "--at", "5/x"]);
    assert_eq!(r.code, 64);
    error_json(&r);
}

#[test]
fn negative_and_generator_seeds() {
    // φ(−1/1) = xz − y.
    let rep = report(&run(&["eval", "--seed", "-2,-2,-2", "--at", "-1/1"]));
    assert_eq!(rep.value_re, Some(6.0));
    // A = [[1,1],[1,2]] and B = [[1,-1],[-1,2]] give traces (3, 3, 3).
    let r = run(&["eval", "--gen-a", "1,1,1,2", "--gen-b", "1,-1,-1,2", "--at", "0/1"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(report(&r).config.seed_source.as_deref(), Some("generators"));
    let r = run(&[
        "eval", "--seed", "3,3,3", "--gen-a", "1,0,0,1", "--gen-b", "1,0,0,1", "--at", "0/1",
    ]);
    assert_eq!(r.code, 64);
}

#[test]
fn identity_commands() {
    let r = run(&["sum", "--seed", "3,3,3", "--tol", "1e-8"]);
    assert_eq!(r.code, 0);
    let rep = report(&r);
    assert!((rep.value_re.unwrap() - 0.5).abs() <= 1e-8);
    assert_eq!(rep.converged, Some(true));
    assert_eq!(rep.config.tol, Some(1e-8));

    let r = run(&["bq", "--seed", "1,1,1"]);
    assert_eq!(r.code, 2);
    let rep = report(&r);
    assert_eq!(rep.classification.as_deref(), Some("ViolatesOpenInterval"));
    assert!(!rep.witnesses.unwrap().is_empty());

    let r = run(&["quotient", "--p", "2", "--q", "1", "--y0", "2", "--tol", "1e-6"]);
    assert_eq!(r.code, 0);
    assert!(report(&r).residual.unwrap() <= 1e-6);

    let r = run(&["fan-period", "--p", "5", "--q", "1", "--y0", "3"]);
    assert_eq!(r.code, 0);
    assert!(report(&r).residual.unwrap() <= 1e-9);

    let r = run(&["checks", "--seed", "2,2-i,2-3i", "--subtree", "0/1:1/1,1/1:1/0"]);
    assert_eq!(r.code, 0);
    assert!(report(&r).checks.unwrap().iter().all(|c| c.ok));
}

#[test]
fn inapplicable_identities_carry_witnesses() {
    // |φ| ≤ 2 on more than 1/0, so the quotient identity does not apply.
    let r = run(&["quotient", "--p", "5", "--q", "1", "--y0", "1.5"]);
    assert_eq!(r.code, 2);
    let v = error_json(&r);
    assert_eq!(v["kind"], "inapplicable");
    assert!(v["witness"].is_object());
}

#[test]
fn asymptotic_needs_the_caller_to_vouch_for_the_angle() {
    let seed = "6,3.2415188533+3.5909575963i,1.0806046117";
    let r = run(&["asymptotic", "--seed", seed]);
    assert_eq!(r.code, 64);
    assert!(error_json(&r)["error"]
        .as_str()
        .unwrap()
        .contains("--assume-irrational-angle"));
    let r = run(&[
        "asymptotic",
        "--seed",
        seed,
        "--assume-irrational-angle",
        "--n",
        "10,100",
    ]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    let rep = report(&r);
    let pts = rep.points.unwrap();
    assert_eq!(pts.iter().map(|p| p.n).collect::<Vec<_>>(), vec![10, 100]);
    assert!(pts[1].re_over_n.abs() < pts[0].re_over_n.abs());
}

#[test]
fn reports_round_trip() {
    let runs = [
        vec!["eval", "--seed", "3,3,3", "--at", "5/2"],
        vec!["omega", "--seed", "2,2-i,2-3i"],
        vec!["omega", "--seed", "3,3,3", "--depth", "4"],
        vec!["bq", "--seed", "2,2-i,2-3i"],
        vec!["sum", "--seed", "2,2-i,2-3i", "--tol", "1e-5", "--max-fib", "60"],
        vec!["quotient", "--p", "2", "--q", "1", "--y0", "3"],
        vec!["fan-period", "--p", "2", "--q", "1", "--y0", "2"],
        vec![
            "asymptotic",
            "--seed",
            "6,3.2415188533+3.5909575963i,1.0806046117",
            "--assume-irrational-angle",
            "--convergents",
            "3",
        ],
        vec!["checks", "--seed", "-2,-2,-2"],
    ];
    for args in runs {
        let r = run(&args);
        let rep = report(&r);
        assert_eq!(rep.command, args[0]);
        assert!(rep.config.seed_source.is_some() || rep.config.p.is_some());
        let again: Report = serde_json::from_str(&serde_json::to_string(&rep).unwrap()).unwrap();
        assert_eq!(again, rep, "{args:?}");
        assert_eq!(serde_json::to_string(&rep).unwrap() + "\n", r.stdout);
    }
}

#[test]
fn exit_codes_are_total() {
    let cases: [&[&str]; 12] = [
        &[],
        &["frobnicate"],
        &["sum"],
        &["sum", "--seed", "1,2"],
        &["sum", "--seed", "1+2,3,3"],
        &["sum", "--seed", "3,3,3", "--tol", "-1"],
        &["sum", "--seed", "3,3,3", "--max-fib", "0"],
        &["sum", "--seed", "1,1,1"],
        &["sum", "--seed", "2,2,2"],
        &["svg", "--seed", "3,3,3", "--window", "2,0"],
        &["checks", "--seed", "3,3,3", "--subtree", "0/1:2/1"],
        &["quotient", "--p", "2", "--q", "3", "--y0", "2"],
    ];
    for args in cases {
        let r = run(args);
        assert!([0, 2, 3, 64, 65, 66].contains(&r.code), "{args:?}: {}", r.code);
        assert_ne!(r.code, 0, "{args:?}");
    }
    assert_eq!(run(&["sum", "--seed", "1,1,1"]).code, 2);
    assert_eq!(run(&["sum", "--seed", "3,3,3", "--max-fib", "3"]).code, 3);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn omega_csv_dump() {
    let r = run(&["omega", "--seed", "3,3,3", "--depth", "9", "--format", "csv"]);
    assert_eq!(r.code, 0);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("p,q,re,im,abs,fib"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    let all = Arc::new(FareyFraction::INFINITY, FareyFraction::INFINITY);
    let census = 1 + (1..=9).map(|n| regions_at_level(n, all).len()).sum::<usize>();
    assert_eq!(rows.len(), census);
    let fracs: Vec<FareyFraction> = rows
        .iter()
        .map(|r| FareyFraction::new(r[0].parse().unwrap(), r[1].parse().unwrap()).unwrap())
        .collect();
    assert!(fracs.windows(2).all(|w| level_order(&w[0], &w[1]).is_lt()));
    for (row, f) in rows.iter().zip(&fracs) {
        assert_eq!(row[5].parse::<u64>().unwrap(), f.fib());
        assert!(row[4].parse::<f64>().unwrap() >= 3.0);
    }
}

#[test]
fn svg_census_and_determinism() {
    let window = Arc::new(FareyFraction::ZERO, FareyFraction::integer(2));
    let census: usize = (1..=8).map(|n| regions_at_level(n, window).len()).sum();
    let (a, b) = (tmp("a.svg"), tmp("b.svg"));
    for p in [&a, &b] {
        let r = run(&[
            "svg",
            "--seed",
            "3,3,3",
            "--depth",
            "8",
            "--window",
            "0,2",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(r.code, 0);
        assert_eq!(report(&r).regions, Some(census as u64));
    }
    let text = std::fs::read(&a).unwrap();
    assert_eq!(text, std::fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert_eq!(text.matches("data-region=").count(), census);
    assert!(text.contains("data-region=\"5/3\""));
    assert!(text.starts_with("<?xml") && text.contains("version=\"1.1\""));

    let r = run(&["svg", "--seed", "3,3,3", "--depth", "0"]);
    assert_eq!(r.stdout.matches("<path").count(), 1);

    let r = run(&["svg", "--seed", "3,3,3", "--out", "/nonexistent-dir/x.svg"]);
    assert_eq!(r.code, 66);
    error_json(&r);
}

#[test]
fn thread_count_does_not_change_reports() {
    let args = ["sum", "--seed", "2,2-i,2-3i", "--tol", "1e-5", "--max-fib", "60"];
    let one = run_env(&args, Some("1"));
    let four = run_env(&args, Some("4"));
    assert_eq!(one.code, 0);
    let (mut r1, mut r4) = (report(&one), report(&four));
    assert_eq!((r1.config.threads, r4.config.threads), (Some(1), Some(4)));
    r1.config.threads = None;
    r4.config.threads = None;
    assert_eq!(serde_json::to_string(&r1).unwrap(), serde_json::to_string(&r4).unwrap());
    assert_eq!(run_env(&args, Some("zero")).code, 64);
}
