use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_genusforge"));
    c.current_dir(env!("CARGO_MANIFEST_DIR")).env_remove("GENUSFORGE_DATA");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn documented_examples() {
    assert_eq!(stdout(&["genus", "negate", "3^-1 7^-1"]), "3^+1 7^+1\n");
    assert_eq!(stdout(&["criteria", "legendre", "--orbits", "1,1,1,21", "--p", "5"]), "fail (21/5)=1\n");
    let r: Vec<u64> = stdout(&["mukai", "residues"]).split_whitespace().map(|x| x.parse().unwrap()).collect();
    let want: BTreeSet<u64> = [1u64, 11, 13, 17, 19, 23].iter().flat_map(|a| [a * a % 840, 840 - a * a % 840]).collect();
    assert_eq!(r.len(), 12);
    assert_eq!(r.into_iter().collect::<BTreeSet<_>>(), want);
}

#[test]
fn unicode_in_ascii_out() {
    assert_eq!(stdout(&["genus", "print", "4\u{2085}^{\u{2212}1} 8\u{2081}^{+1} 3^{+1}"]), "4_5^-1 8_1^+1 3^+1\n");
    assert_eq!(stdout(&["genus", "from-gram", "D4+"]), "II_{4,0} 2_II^-2\n");
}

#[test]
fn exit_codes() {
    let o = run(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&["genus", "parse", "2_3^+1"]), 2);
    assert_eq!(code(&["genus", "negate", "3^x"]), 2);
    assert_eq!(code(&["criteria", "tame", "102", "--p", "9"]), 2);
    assert_eq!(code(&["classify", "entry", "999", "--p", "5"]), 2);
    assert_eq!(code(&["classify", "entry", "165", "--p", "211"]), 2);
    assert_eq!(code(&["classify", "table", "3"]), 2);
    assert_eq!(code(&["lattice", "det", "1,2;3"]), 2);
    assert_eq!(code(&["classify", "table", "6"]), 0);
    // the one row the computation disagrees with
    let o = run(&["classify", "table", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("MISMATCH")).count(), 1);
}

#[test]
fn json_lines_parse() {
    for args in [
        &["--json", "classify", "entry", "102", "--p", "5"][..],
        &["--json", "criteria", "wild", "134", "--p", "3"],
        &["--json", "disc", "glue", "2_7^+1 3^+2 9^-1", "3^+2", "--p", "3"],
        &["--json", "classify", "entry", "165", "--congruence"],
        &["--json", "data", "load"],
    ] {
        let out = stdout(args);
        assert!(!out.is_empty(), "{args:?}");
        for l in out.lines() {
            serde_json::from_str::<Value>(l).unwrap_or_else(|e| panic!("{args:?}: {e}: {l}"));
        }
    }
    let v: Value = serde_json::from_str(stdout(&["--json", "classify", "entry", "102", "--p", "5"]).trim()).unwrap();
    assert_eq!(v["verdict"]["realized"], "no");
    assert_eq!(v["verdict"]["short"], "(21/5)=1");
}

#[test]
fn output_is_byte_stable_and_ascii() {
    for args in [
        &["--json", "classify", "all"][..],
        &["classify", "all", "--bound", "30"],
        &["disc", "embed", "2_II^-2", "2_II^+4"],
        &["criteria", "char2", "162"],
    ] {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(a.stdout.is_ascii(), "{args:?}");
    }
    let all = stdout(&["classify", "all"]);
    let keys: Vec<(String, u64)> = all
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(keys.len(), 33 * 46);
    let n = |s: &str| -> (u32, String) {
        let d: String = s.chars().take_while(|c| c.is_ascii_digit()).collect();
        (d.parse().unwrap(), s[d.len()..].to_string())
    };
    assert!(keys.windows(2).all(|w| (n(&w[0].0), w[0].1) < (n(&w[1].0), w[1].1)));
}

fn tmp(name: &str, body: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn external_entries() {
    let f = tmp("extra.tsv", "# hm group order rank genus orbits contains\n901\tsynthetic\t-\t3\t2_3^-3 3^+2\t-\t-\n");
    assert_eq!(code(&["classify", "entry", "901", "--p", "2"]), 2);
    let o = bin().env("GENUSFORGE_DATA", &f).args(["classify", "entry", "901", "--p", "2"]).output().unwrap();
    assert!(o.status.success());
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.starts_with("901\t2\tno\tlength"), "{line}");
    let by_flag = stdout(&["--data", f.to_str().unwrap(), "criteria", "length", "901"]);
    assert_eq!(by_flag, "{2,3}\n");
    assert_eq!(stdout(&["data", "load", f.to_str().unwrap()]).lines().count(), 1);
    assert_eq!(code(&["data", "validate", f.to_str().unwrap()]), 0);
    let bad = tmp("bad.tsv", "902\tx\t-\t3\t2_3^+1\t-\t-\n");
    let o = run(&["data", "validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let dup = tmp("dup.tsv", "165\tM22\t443520\t3\t4_5^-1 11^+1\t-\t-\n");
    assert_eq!(code(&["--data", dup.to_str().unwrap(), "data", "validate"]), 1);
}

/// Library operations; each must be reachable from some subcommand.
const LIBRARY_OPS: &[&str] = &[
    "determinant",
    "signature",
    "smith_normal_form",
    "discriminant_form",
    "direct_sum",
    "rescale",
    "parse_symbol",
    "print_symbol",
    "symbol_from_gram",
    "negate",
    "p_excess",
    "oddity",
    "exists",
    "canonicalize_2adic",
    "p_length",
    "from_genus",
    "glue",
    "embeddings",
    "orthogonal_complement",
    "witt_complement",
    "isometric",
    "enumerate_gluings",
    "length_criterion",
    "constituent_criterion",
    "determinant_condition",
    "tame_conditions",
    "legendre_orbit_condition",
    "rank3_glue_search",
    "rank3_char2_workflow",
    "wild_rank4_reasons",
    "classify_entry",
    "reproduce_table",
    "mukai_holds",
    "mukai_residues",
    "load_entries",
    "validate_entries",
    "run",
];

#[test]
fn every_operation_is_reachable() {
    let mut covered = BTreeSet::new();
    for l in stdout(&["--json", "ops"]).lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        let op = v["op"].as_str().unwrap().to_string();
        let argv: Vec<String> = v["argv"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
        let refs: Vec<&str> = argv.iter().map(String::as_str).collect();
        let o = run(&refs);
        assert!(o.status.success(), "{op} via {argv:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stdout.is_empty(), "{op} printed nothing");
        assert!(o.stdout.is_ascii(), "{op} emitted non-ASCII");
        covered.insert(op);
    }
    for op in LIBRARY_OPS {
        assert!(covered.contains(*op), "{op} has no subcommand");
    }
}
