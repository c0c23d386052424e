use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use infodiagram::shannon::{empirical_from_rows, shannon_instance};
use infodiagram::{mu_table, ChainRule, Joint, LogBase};
use infodiagram_cli::app::{failure_message, verify_document};
use infodiagram_cli::document::{parse_diagram, DiagramDocument, Metadata};
use infodiagram_cli::CliError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_infodiagram"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn doc_of(out: &Output) -> DiagramDocument {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    parse_diagram(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

fn eta(doc: &DiagramDocument, subset: &[usize]) -> f64 {
    doc.atoms.iter().find(|a| a.subset == subset).unwrap().eta
}

const XOR: &str = "X,Y,Z\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n";

#[test]
fn xor_diagram_has_negative_center() {
    let dir = TempDir::new().unwrap();
    let xor = write(&dir, "xor.csv", XOR);
    let out = run(&["diagram", s(&xor), "--instance", "shannon", "--base", "bits"]);
    assert!(out.stderr.is_empty());
    let doc = doc_of(&out);
    assert_eq!(eta(&doc, &[1, 2, 3]), -1.0);
    assert_eq!(doc.metadata.generators, ["X", "Y", "Z"]);
    assert_eq!(doc.metadata.base.as_deref(), Some("bits"));
    assert!(doc.verification.passed);
    assert_eq!(doc.verification.sweep, "exhaustive");
}

#[test]
fn duplicated_column_puts_everything_in_the_lens() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "dup.tsv", "A\tB\na\ta\na\ta\nb\tb\nc\tc\n");
    let doc = doc_of(&run(&["diagram", s(&table)]));
    // H of (1/2, 1/4, 1/4) in nats
    let h = -(0.5f64 * 0.5f64.ln() + 2.0 * 0.25 * 0.25f64.ln());
    assert!(eta(&doc, &[1]).abs() <= 1e-12);
    assert!(eta(&doc, &[2]).abs() <= 1e-12);
    assert!((eta(&doc, &[1, 2]) - h).abs() <= 1e-12);
}

#[test]
fn independent_columns_do_not_overlap() {
    let dir = TempDir::new().unwrap();
    let table = write(&dir, "ind.csv", "A,B,__weight\n0,0,1\n0,1,3\n1,0,2\n1,1,6\n");
    let doc = doc_of(&run(&["diagram", s(&table), "--base", "bits"]));
    assert!(eta(&doc, &[1, 2]).abs() <= 1e-12);
}

#[test]
fn json_round_trip_is_bit_exact() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<Vec<String>> = (0..40)
        .map(|_| (0..3).map(|_| rng.gen_range(0..3).to_string()).collect())
        .collect();
    let text = std::iter::once("a,b,c".to_owned())
        .chain(rows.iter().map(|r| r.join(",")))
        .collect::<Vec<_>>()
        .join("\n");
    let table = write(&dir, "r.csv", &text);
    let doc = doc_of(&run(&["diagram", s(&table)]));

    let (p, vars) = empirical_from_rows(&rows, None).unwrap();
    let measure = mu_table(&shannon_instance(&p, &vars, LogBase::Nats).unwrap()).unwrap();
    for (entry, (atom, value)) in doc.atoms.iter().zip(measure.iter()) {
        assert_eq!(entry.subset, atom.subset().indices());
        assert_eq!(entry.eta.to_bits(), value.to_bits());
    }
}

fn setfun_json(n: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<Value> = (0u32..1 << n)
        .map(|mask| {
            let subset: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            serde_json::json!({ "subset": subset, "value": rng.gen_range(0.0..4.0) })
        })
        .collect();
    serde_json::json!({ "n": n, "values": values }).to_string()
}

/// F_1(X_K) against the sum of atoms meeting K, recomputed from the raw JSON.
fn assert_consistent(stdout: &[u8], tol: f64) {
    let v: Value = serde_json::from_slice(stdout).unwrap();
    let mask = |xs: &Value| {
        xs.as_array()
            .unwrap()
            .iter()
            .fold(0u64, |m, i| m | 1 << (i.as_u64().unwrap() - 1))
    };
    let atoms: Vec<(u64, f64)> = v["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (mask(&a["subset"]), a["eta"].as_f64().unwrap()))
        .collect();
    for t in v["totals"].as_array().unwrap() {
        let k = mask(&t["K"]);
        let sum: f64 = atoms.iter().filter(|(s, _)| s & k != 0).map(|(_, e)| e).sum();
        assert!((t["f1"].as_f64().unwrap() - sum).abs() <= tol, "K={k:b}");
    }
}

#[test]
fn every_instance_emits_a_consistent_document() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "a,b,c\n0,0,1\n0,1,1\n1,1,0\n1,0,0\n0,0,0\n1,1,1\n");
    let q = write(
        &dir,
        "q.csv",
        "a,b,c\n0,0,1\n0,1,1\n1,1,0\n1,0,0\n0,0,0\n1,1,1\n1,0,1\n0,1,0\n",
    );
    let sf = write(&dir, "sf.json", &setfun_json(3, 1));
    let blobs: Vec<PathBuf> = ["alpha beta gamma", "alpha beta alpha beta", "zzzzzzzzzzzzzz"]
        .iter()
        .enumerate()
        .map(|(i, t)| write(&dir, &format!("blob{i}.txt"), t))
        .collect();
    let cases: Vec<Vec<&str>> = vec![
        vec![s(&p), "--instance", "shannon"],
        vec![s(&p), "--instance", "tsallis", "--alpha", "2"],
        vec![s(&p), "--instance", "tsallis", "--alpha", "-0.5"],
        vec![s(&p), "--instance", "kl", "--q", s(&q), "--base", "bits"],
        vec![s(&p), "--instance", "alpha-kl", "--q", s(&q), "--alpha", "0.5"],
        vec![s(&p), "--instance", "cross-entropy", "--q", s(&q)],
        vec![s(&sf), "--instance", "setfun"],
        vec![s(&sf), "--instance", "advantage"],
        vec![s(&p), "--instance", "advantage", "--target", "a"],
        vec![s(&blobs[0]), s(&blobs[1]), s(&blobs[2]), "--instance", "compressor"],
    ];
    for case in cases {
        let mut args = vec!["diagram"];
        args.extend(&case);
        let out = run(&args);
        assert!(
            out.status.success(),
            "{case:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_consistent(&out.stdout, 1e-9);
    }
}

#[test]
fn compressor_metadata_is_recorded() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.bin", "hello hello hello");
    let b = write(&dir, "b.bin", "hello hello hello");
    let first = run(&["diagram", s(&a), s(&b), "--instance", "compressor"]);
    let second = run(&["diagram", s(&a), s(&b), "--instance", "compressor"]);
    assert_eq!(first.stdout, second.stdout);
    let doc = doc_of(&first);
    assert!(doc.metadata.compressor.unwrap().contains("deflate"));
    assert_eq!(doc.metadata.label, "compression-based information function");
    assert_eq!(doc.metadata.generators, ["a.bin", "b.bin"]);
}

#[test]
fn verify_passes_on_exact_instances() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let text = std::iter::once("x,y,z".to_owned())
        .chain((0..30).map(|_| {
            format!(
                "{},{},{}",
                rng.gen_range(0..2),
                rng.gen_range(0..3),
                rng.gen_range(0..2)
            )
        }))
        .collect::<Vec<_>>()
        .join("\n");
    let table = write(&dir, "t.csv", &text);
    let out = run(&["verify", s(&table), "--qmax", "3"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verification"]["passed"], true);
    assert_eq!(v["residuals"].as_array().unwrap().len(), 64 + 512 + 4096);

    let sf = write(&dir, "sf.json", &setfun_json(4, 2));
    let out = run(&["verify", s(&sf), "--instance", "setfun", "--tol", "1e-12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["verification"]["max_residual"].as_f64().unwrap() <= 1e-12);

    let csv = run(&[
        "verify",
        s(&sf),
        "--instance",
        "setfun",
        "--format",
        "csv",
        "--qmax",
        "1",
    ]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert!(text.starts_with("q,terms,given,lhs,rhs,gap\n"));
    assert_eq!(text.lines().count(), 1 + 256);
}

/// `K_1(Y | Z) = |Y ∪ Z| - |Z|` with 0.1 added at `(X_1 | X_2)`.
struct Corrupted;

impl ChainRule for Corrupted {
    fn generators(&self) -> usize {
        3
    }

    fn conditional(&self, target: Joint, given: Joint) -> f64 {
        let base = (target.join(given).len() - given.len()) as f64;
        if target == Joint::of(&[1]) && given == Joint::of(&[2]) {
            base + 0.1
        } else {
            base
        }
    }
}

#[test]
fn corrupted_instance_names_the_failing_identity() {
    let metadata = Metadata {
        instance: "fixture".into(),
        label: "corrupted".into(),
        base: None,
        alpha: None,
        tolerance: 1e-9,
        q_max: 3,
        seed: 0,
        generators: vec!["A".into(), "B".into(), "C".into()],
        inputs: vec![],
        compressor: None,
    };
    let doc = verify_document(&Corrupted, &metadata).unwrap();
    assert!(!doc.verification.passed);
    assert!(doc.verification.chain_rule_violations > 0);
    let worst = doc.verification.worst.as_ref().unwrap();
    assert!((worst.gap - 0.1).abs() < 1e-12);
    let msg = failure_message(&doc.verification, &doc.chain_rule).unwrap();
    assert!(msg.contains("chain rule fails"), "{msg}");
    assert!(msg.contains(&format!("q={}", worst.q)), "{msg}");
    assert!(msg.contains("L=("), "{msg}");
    assert_eq!(CliError::Verification(msg).exit_code(), 4);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p.csv", "a,b\n0,0\n1,1\n0,1\n");
    let q = write(&dir, "q.csv", "a,b\n0,0\n1,1\n");
    let bad = write(&dir, "bad.csv", "a,b\n0\n");
    let other = write(&dir, "other.csv", "a,c\n0,0\n");

    let code = |args: &[&str]| run(args).status.code().unwrap();
    let stderr = |args: &[&str]| String::from_utf8(run(args).stderr).unwrap();

    assert_eq!(code(&["diagram", s(&bad)]), 2);
    assert!(stderr(&["diagram", s(&bad)]).contains("line 2"));
    assert_eq!(code(&["diagram", s(&p), "--instance", "kl", "--q", s(&q)]), 3);
    assert!(stderr(&["diagram", s(&p), "--instance", "kl", "--q", s(&q)]).contains("absolutely continuous"));
    assert_eq!(code(&["diagram", s(&p), "--instance", "kl", "--q", s(&other)]), 2);
    assert_eq!(code(&["diagram", s(&p), "--instance", "kl"]), 2);
    assert_eq!(code(&["diagram", s(&p), "--instance", "tsallis"]), 2);
    assert_eq!(code(&["diagram", s(&p), "--instance", "tsallis", "--alpha", "1"]), 3);
    assert_eq!(code(&["diagram", s(&p), "--instance", "tsallis", "--alpha", "-1"]), 0);
    assert_eq!(code(&["diagram", s(&p), "--alpha", "2"]), 2);
    assert_eq!(code(&["diagram", s(&dir.path().join("missing.csv"))]), 2);
    assert_eq!(code(&["examples", "nope"]), 2);
    assert!(stderr(&["examples", "nope"]).contains("xor-i3, bsc-d2, xor-advantage, fig2"));
}

fn example(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn built_in_examples() {
    let v = example(&["examples", "xor-i3"]);
    assert_eq!(v["value"], -1.0);
    assert_eq!(v["base"], "bits");

    let v = example(&["examples", "bsc-d2", "--epsilon", "0.25"]);
    assert!((v["value"].as_f64().unwrap() + 0.2075187496).abs() <= 1e-9);
    let v = example(&["examples", "bsc-d2", "--epsilon", "0.5"]);
    assert!(v["value"].as_f64().unwrap().abs() <= 1e-12);
    let v = example(&["examples", "bsc-d2", "--epsilon", "0.01"]);
    assert!(v["value"].as_f64().unwrap() < -1.0);

    let v = example(&["examples", "xor-advantage"]);
    assert_eq!(v["value"], -1.0);
    assert_eq!(v["details"]["E"], serde_json::json!([1.0, 1.0, 1.0, 0.0]));

    for seed in ["0", "1", "2"] {
        assert_eq!(example(&["examples", "fig2", "--seed", seed])["passed"], true);
    }
    assert_eq!(run(&["examples", "bsc-d2", "--epsilon", "0"]).status.code(), Some(2));
}

fn cells(svg: &str) -> usize {
    svg.matches("class=\"cell\"").count()
}

#[test]
fn rendering() {
    let dir = TempDir::new().unwrap();
    let two = write(&dir, "two.csv", "a,b\n0,0\n0,1\n1,1\n");
    let three = write(&dir, "three.csv", XOR);
    let four = write(&dir, "four.csv", "a,b,c,d\n0,0,0,0\n1,1,0,1\n");
    for (table, expect) in [(&two, Some(3)), (&three, Some(7)), (&four, None)] {
        let doc = dir.path().join("doc.json");
        let out = run(&["diagram", s(table), "--base", "bits", "--out", s(&doc)]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        let svg_path = dir.path().join("d.svg");
        let render = run(&["render", s(&doc), "--out", s(&svg_path)]);
        match expect {
            Some(k) => {
                assert!(render.status.success());
                let svg = fs::read_to_string(&svg_path).unwrap();
                assert_eq!(cells(&svg), k);
                let again = run(&["render", s(&doc)]);
                assert_eq!(again.stdout, svg.as_bytes());
            }
            None => {
                assert_eq!(render.status.code(), Some(2));
                assert!(String::from_utf8_lossy(&render.stderr).contains("rendering supports n=2,3 only"));
            }
        }
    }
    let doc = dir.path().join("xor.json");
    run(&["diagram", s(&three), "--base", "bits", "--out", s(&doc)]);
    let svg = String::from_utf8(run(&["render", s(&doc)]).stdout).unwrap();
    assert!(svg.contains(">-1</text>"));
}

#[test]
fn atom_csv_output() {
    let dir = TempDir::new().unwrap();
    let xor = write(&dir, "xor.csv", XOR);
    let out = run(&["diagram", s(&xor), "--base", "bits", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("subset,eta"));
    assert!(text.contains("1 2 3,-1\n"));
    assert_eq!(text.lines().count(), 8);
}
