use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn picyc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_picyc"))
        .args(args)
        .env_remove("PICYC_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = picyc(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap() + &String::from_utf8(out.stderr).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn field(text: &str, key: &str) -> Option<usize> {
    text.split_whitespace()
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
}

struct Run {
    dir: tempfile::TempDir,
}

impl Run {
    fn p(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// synth + build + index with extra synth flags.
    fn prepare(extra: &[&str]) -> Run {
        let run = Run {
            dir: tempfile::tempdir().unwrap(),
        };
        let data = run.p("data");
        let mut args = vec!["synth", "--out", s(&data)];
        args.extend_from_slice(extra);
        ok(&args);
        ok(&[
            "build",
            "-k",
            "21",
            "--manifest",
            s(&data.join("manifest.tsv")),
            "--out",
            s(&run.p("g")),
            "--threads",
            "1",
        ]);
        ok(&["index", "--graph", s(&run.p("g")), "--out", s(&run.p("i"))]);
        run
    }

    fn search(&self, out: &str, extra: &[&str]) -> String {
        let (g, i, out) = (self.p("g"), self.p("i"), self.p(out));
        let mut args = vec!["search", "--graph", s(&g), "--index", s(&i), "--out"];
        args.push(s(&out));
        args.extend_from_slice(extra);
        ok(&args)
    }
}

#[test]
fn build_reports_colors_and_is_deterministic() {
    let run = Run::prepare(&["--length", "2000", "--snps", "5", "--depth", "5"]);
    let manifest = run.p("data").join("manifest.tsv");
    let log = ok(&[
        "build",
        "-k",
        "21",
        "--manifest",
        s(&manifest),
        "--out",
        s(&run.p("g2")),
        "--threads",
        "2",
    ]);
    assert!(log.contains("C=2"), "{log}");
    assert_eq!(
        std::fs::read(run.p("g")).unwrap(),
        std::fs::read(run.p("g2")).unwrap()
    );
}

#[test]
fn missing_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = picyc(&[
        "build",
        "-k",
        "21",
        "--manifest",
        "/no/such/manifest",
        "--out",
        s(&dir.path().join("g")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = picyc(&[
        "index",
        "--graph",
        "/no/such/graph",
        "--out",
        s(&dir.path().join("i")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let bad_k = picyc(&["synth", "-k", "20", "--out", s(&dir.path().join("d"))]);
    assert_eq!(bad_k.status.code(), Some(2));
}

#[test]
fn index_counts() {
    let plain = Run::prepare(&["--length", "2000", "--snps", "0", "--depth", "5"]);
    let log = ok(&[
        "index",
        "--graph",
        s(&plain.p("g")),
        "--out",
        s(&plain.p("i2")),
    ]);
    assert_eq!(field(&log, "entries"), Some(0));
    let one = Run::prepare(&["--length", "2000", "--snps", "1", "--depth", "5"]);
    let log = ok(&["index", "--graph", s(&one.p("g")), "--out", s(&one.p("i2"))]);
    assert_eq!(field(&log, "entries"), Some(2));
}

#[test]
fn search_shard_fraction_and_call_summary() {
    let run = Run::prepare(&["--length", "6000", "--snps", "30", "--depth", "10"]);
    let whole = run.search("whole", &["--threads", "1"]);
    let single = run.search("single", &["--shard", "0/1", "--threads", "3"]);
    assert_eq!(field(&whole, "cycles"), Some(30));
    assert_eq!(
        std::fs::read(run.p("whole")).unwrap(),
        std::fs::read(run.p("single")).unwrap()
    );
    assert!(single.contains("used_index=60"));

    let third = run.search("third", &["--fraction", "1/3"]);
    let used = field(&third, "used_index").unwrap();
    assert!((19..=21).contains(&used), "{used}");
    let csv = std::fs::read_to_string(run.p("third.stats.csv")).unwrap();
    assert!(csv.starts_with("entry_position,new_cycles,cumulative_cycles"));
    assert_eq!(csv.lines().count(), used + 1);

    let summary = ok(&[
        "call",
        "--graph",
        s(&run.p("g")),
        "--cycles",
        s(&run.p("whole")),
        "--out",
        s(&run.p("calls")),
    ]);
    for key in ["Cyc", "Fil", "Pred", "SubG", "Index"] {
        assert!(field(&summary, key).is_some(), "{key} missing in {summary}");
    }
    assert_eq!(field(&summary, "Pred"), Some(30));
    assert_eq!(field(&summary, "Index"), Some(60));
    let tsv = std::fs::read_to_string(run.p("calls.variants.tsv")).unwrap();
    let header: Vec<&str> = tsv.lines().next().unwrap().split('\t').collect();
    assert_eq!(header.len(), 5 + 2);
    let fa = std::fs::read_to_string(run.p("calls.fa")).unwrap();
    assert_eq!(fa.lines().filter(|l| l.starts_with('>')).count(), 60);
}

#[test]
fn identical_colors_predict_nothing() {
    let run = Run::prepare(&[
        "--length", "3000", "--snps", "0", "--depth", "5", "--colors", "3",
    ]);
    run.search("c", &[]);
    let summary = ok(&[
        "call",
        "--graph",
        s(&run.p("g")),
        "--cycles",
        s(&run.p("c")),
        "--out",
        s(&run.p("calls")),
    ]);
    assert_eq!(field(&summary, "Pred"), Some(0));
    let tsv = std::fs::read_to_string(run.p("calls.variants.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 1);
    assert!(std::fs::read(run.p("calls.fa")).unwrap().is_empty());
}

#[test]
fn mismatched_artifacts_exit_3() {
    let a = Run::prepare(&[
        "--length", "2000", "--snps", "3", "--depth", "5", "--seed", "1",
    ]);
    let b = Run::prepare(&[
        "--length", "2000", "--snps", "3", "--depth", "5", "--seed", "2",
    ]);
    let out = picyc(&[
        "search",
        "--graph",
        s(&a.p("g")),
        "--index",
        s(&b.p("i")),
        "--out",
        s(&a.p("x")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    a.search("ca", &[]);
    b.search("cb", &[]);
    let out = picyc(&[
        "call",
        "--graph",
        s(&a.p("g")),
        "--cycles",
        s(&b.p("cb")),
        "--out",
        s(&a.p("y")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = picyc(&[
        "merge-cycles",
        "--out",
        s(&a.p("m")),
        s(&a.p("ca")),
        s(&b.p("cb")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_rows() {
    let run = Run::prepare(&["--length", "2000", "--snps", "4", "--depth", "5"]);
    let out = picyc(&[
        "bench",
        "--graph",
        s(&run.p("g")),
        "--index",
        s(&run.p("i")),
        "--workers",
        "1",
        "--budget-seconds",
        "5",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], picyc_cli::BENCH_HEADER);
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,4,8,"), "{}", lines[1]);
}

#[test]
fn threads_from_environment() {
    let run = Run::prepare(&["--length", "2000", "--snps", "2", "--depth", "5"]);
    let out = Command::new(env!("CARGO_BIN_EXE_picyc"))
        .args([
            "search",
            "--graph",
            s(&run.p("g")),
            "--index",
            s(&run.p("i")),
            "--out",
            s(&run.p("c")),
        ])
        .env("PICYC_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("workers=3"));
}

#[test]
fn bad_flags_exit_2() {
    let run = Run::prepare(&["--length", "2000", "--snps", "2", "--depth", "5"]);
    let (g, i) = (run.p("g"), run.p("i"));
    for extra in [
        ["--shard", "5/5"],
        ["--fraction", "0"],
        ["--vmax", "10"],
        ["--nmax", "30"],
    ] {
        let mut args = vec![
            "search",
            "--graph",
            s(&g),
            "--index",
            s(&i),
            "--out",
            "/dev/null",
        ];
        args.extend_from_slice(&extra);
        assert_eq!(picyc(&args).status.code(), Some(2), "{extra:?}");
    }
}
