mod common;

use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::Path;
use std::process::{Command, Output};

use common::*;
use embsimp::embedding::{read_embeddings, write_embeddings};
use embsimp::simplifier::{save_model, MlpModel};

fn embsimp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_embsimp"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_pairs(dir: &Path, n: usize) {
    let body: String = synthetic_corpus(n, 21)
        .pairs()
        .iter()
        .map(|p| format!("{}\t{}\n", p.complex.text(), p.simple.text()))
        .collect();
    fs::write(dir.join("pairs.tsv"), body).unwrap();
}

fn identity_model(dir: &Path, dim: usize) {
    let mut m = MlpModel::zeros(dim, 2 * dim);
    for i in 0..dim {
        m.params.w1[[i, i]] = 1.0;
        m.params.w1[[dim + i, i]] = -1.0;
        m.params.w2[[i, i]] = 1.0;
        m.params.w2[[i, dim + i]] = -1.0;
    }
    save_model(&m, &dir.join("id.mlp1")).unwrap();
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let help = embsimp(dir.path(), &["--help"]);
    assert_eq!(code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["encode", "decode", "train", "split", "run"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
    assert_eq!(code(&embsimp(dir.path(), &["frobnicate"])), 1);
    let o = embsimp(
        dir.path(),
        &[
            "train",
            "--train-src",
            "a",
            "--val-src",
            "b",
            "--val-tgt",
            "c",
            "--hidden",
            "4",
            "--out",
            "m",
        ],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--train-tgt"));
    assert_eq!(
        code(&embsimp(
            dir.path(),
            &["decode", "--in", "x.emb", "--out", "y.txt"]
        )),
        1
    );
    assert_eq!(
        code(&embsimp(
            dir.path(),
            &["encode", "--coder", "external", "--in", "a", "--out", "b"]
        )),
        1
    );
}

#[test]
fn encode_decode_round_trip_reproduces_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let lines: String = synthetic_corpus(30, 1)
        .complex()
        .iter()
        .map(|s| format!("{}\n", s.text()))
        .collect();
    fs::write(d.join("in.txt"), &lines).unwrap();
    assert_eq!(
        code(&embsimp(
            d,
            &["encode", "--in", "in.txt", "--out", "in.emb"]
        )),
        0
    );
    let m = read_embeddings(&d.join("in.emb")).unwrap();
    assert_eq!((m.rows(), m.dim()), (30, 1024));
    let o = embsimp(
        d,
        &[
            "decode", "--in", "in.emb", "--out", "out.txt", "--pool", "in.txt",
        ],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(d.join("out.txt")).unwrap(), lines);
}

#[test]
fn encode_header_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let body: String = (0..2000).map(|i| format!("Line number {i}.\n")).collect();
    fs::write(dir.path().join("big.txt"), body).unwrap();
    assert_eq!(
        code(&embsimp(
            dir.path(),
            &["encode", "--in", "big.txt", "--out", "big.emb", "--dim", "32"]
        )),
        0
    );
    let bytes = fs::read(dir.path().join("big.emb")).unwrap();
    assert_eq!(&bytes[..4], b"EMB1");
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2000);
    assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 32);
}

#[test]
fn runtime_errors_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("in.txt"), "One sentence.\nAnother one.\n").unwrap();
    assert_eq!(
        code(&embsimp(
            d,
            &[
                "encode",
                "--in",
                "in.txt",
                "--out",
                "small.emb",
                "--dim",
                "16"
            ]
        )),
        0
    );
    let o = embsimp(
        d,
        &[
            "decode",
            "--in",
            "small.emb",
            "--out",
            "out.txt",
            "--pool",
            "in.txt",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension mismatch"));
    assert!(!d.join("out.txt").exists());

    fs::write(d.join("empty.txt"), "").unwrap();
    assert_eq!(
        code(&embsimp(
            d,
            &["encode", "--in", "empty.txt", "--out", "e.emb"]
        )),
        2
    );
    assert!(!d.join("e.emb").exists());
    assert_eq!(
        code(&embsimp(
            d,
            &["encode", "--in", "absent.txt", "--out", "e.emb"]
        )),
        2
    );
}

#[test]
fn train_reports_table2_param_count() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_embeddings(&matrix(2, 1024, 1), &d.join("x.emb")).unwrap();
    let o = embsimp(
        d,
        &[
            "train",
            "--train-src",
            "x.emb",
            "--train-tgt",
            "x.emb",
            "--val-src",
            "x.emb",
            "--val-tgt",
            "x.emb",
            "--hidden",
            "4096",
            "--max-epochs",
            "1",
            "--out",
            "m.mlp1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("params: 8393728"));
    let log = fs::read_to_string(d.join("m.mlp1.log.jsonl")).unwrap();
    let summary: serde_json::Value = serde_json::from_str(log.lines().last().unwrap()).unwrap();
    assert_eq!(summary["param_count"], 8_393_728);
    assert_eq!(
        fs::metadata(d.join("m.mlp1")).unwrap().len(),
        16 + 4 * 8_393_728
    );
}

#[test]
fn split_writes_partition() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_pairs(d, 10);
    let o = embsimp(
        d,
        &[
            "split",
            "--in",
            "pairs.tsv",
            "--validation-size",
            "2",
            "--seed",
            "7",
            "--out-dir",
            "sp",
        ],
    );
    assert_eq!(code(&o), 0);
    let count = |f: &str| {
        fs::read_to_string(d.join("sp").join(f))
            .unwrap()
            .lines()
            .count()
    };
    assert_eq!((count("train.tsv"), count("val.tsv")), (8, 2));
    assert_eq!(
        (count("train.complex.txt"), count("val.simple.txt")),
        (8, 2)
    );
    assert!(String::from_utf8_lossy(&o.stdout).contains("split.seed: 7"));
}

#[test]
fn run_reconstruct_gives_zero_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_pairs(d, 20);
    let o = embsimp(
        d,
        &[
            "run",
            "reconstruct",
            "--pairs",
            "pairs.tsv",
            "--out-dir",
            "rec",
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.join("rec/report.csv")).unwrap();
    assert!(csv.starts_with("metric,C,C′,ΔC,S,S′,ΔS\n"));
    for line in csv
        .lines()
        .filter(|l| l.starts_with("FKGL,") || l.starts_with("ARI,"))
    {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!((cells[3], cells[6]), ("0.000", "0.000"), "{line}");
    }
    assert!(d.join("rec/complex_reconstructed.txt").exists());
}

fn bridge(d: &Path, dim: usize) -> String {
    let bin = env!("CARGO_BIN_EXE_embsimp");
    let path = d.join("bridge.sh");
    let pool = d.join("pool.txt");
    fs::write(
        &path,
        format!(
            "#!/bin/sh\nop=$1; shift\ncase $op in\n  encode) exec {bin} encode --dim {dim} \"$@\" ;;\n  \
             decode) exec {bin} decode --dim {dim} --pool {} \"$@\" ;;\nesac\nexit 64\n",
            pool.display()
        ),
    )
    .unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
    path.display().to_string()
}

#[test]
fn run_simplify_with_external_bridge() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_pairs(d, 15);
    let complex: String = synthetic_corpus(15, 21)
        .complex()
        .iter()
        .map(|s| format!("{}\n", s.text()))
        .collect();
    fs::write(d.join("pool.txt"), complex).unwrap();
    identity_model(d, 32);
    fs::write(
        d.join("scores.jsonl"),
        "{\"metric\":\"LENS\",\"value\":49.723}\n",
    )
    .unwrap();
    let cmd = bridge(d, 32);
    let o = embsimp(
        d,
        &[
            "run",
            "simplify",
            "--pairs",
            "pairs.tsv",
            "--model",
            "id.mlp1",
            "--coder",
            "external",
            "--coder-cmd",
            &cmd,
            "--out-dir",
            "out",
            "--scores",
            "scores.jsonl",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = fs::read_to_string(d.join("out/report.md")).unwrap();
    assert!(md.contains("| Metric | C | S | system |"));
    for row in [
        "| FKGL |",
        "| ARI |",
        "| SARI-Add |",
        "| SARI-Keep |",
        "| SARI-Del |",
        "| SARI |",
    ] {
        assert!(md.contains(row), "{row}");
    }
    assert!(md.contains("| LENS | 49.723 |"));
    assert!(md.contains("| coder.kind | external |"));
    assert_eq!(
        fs::read_to_string(d.join("out/outputs.txt")).unwrap(),
        fs::read_to_string(d.join("pool.txt")).unwrap()
    );
}

#[test]
fn run_multilingual_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_pairs(d, 10);
    identity_model(d, 64);
    let o = embsimp(
        d,
        &[
            "run",
            "multilingual",
            "--pairs",
            "pairs.tsv",
            "--model",
            "id.mlp1",
            "--dim",
            "64",
            "--lang",
            "spa_Latn",
            "--out-dir",
            "ml",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = fs::read_to_string(d.join("ml/report.md")).unwrap();
    assert!(!md.contains("| FKGL |") && !md.contains("| ARI |"));
    assert!(md.contains("| SARI |"));

    let simple: String = synthetic_corpus(10, 21)
        .simple()
        .iter()
        .map(|s| format!("{}\n", s.text()))
        .collect();
    fs::write(d.join("sys.txt"), simple).unwrap();
    let o = embsimp(
        d,
        &[
            "run",
            "evaluate",
            "--pairs",
            "pairs.tsv",
            "--outputs",
            "sys.txt",
            "--out-dir",
            "ev",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let md = fs::read_to_string(d.join("ev/report.md")).unwrap();
    assert!(md.contains("| SARI |  |  | 100.000 |"));
}

#[test]
fn failing_bridge_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_pairs(d, 5);
    let path = d.join("fail.sh");
    fs::write(&path, "#!/bin/sh\nexit 5\n").unwrap();
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).unwrap();
    let o = embsimp(
        d,
        &[
            "run",
            "reconstruct",
            "--pairs",
            "pairs.tsv",
            "--coder",
            "external",
            "--coder-cmd",
            path.to_str().unwrap(),
            "--out-dir",
            "out",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("coder failure"));
    assert!(!d.join("out").exists());
}
