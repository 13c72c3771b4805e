use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sdprel::corpus::{write_conll, write_semeval, AlignedInstance};
use sdprel::synthetic::DirectionalSpec;

fn sdprel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdprel")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_corpus(dir: &Path, name: &str, data: &[AlignedInstance]) -> (PathBuf, PathBuf) {
    let sem = dir.join(format!("{name}.sem"));
    let conll = dir.join(format!("{name}.conll"));
    let raws: Vec<_> = data.iter().map(|a| a.raw.clone()).collect();
    let parses: Vec<_> = data.iter().map(|a| a.parse.clone()).collect();
    std::fs::write(&sem, write_semeval(&raws)).unwrap();
    std::fs::write(&conll, write_conll(&parses)).unwrap();
    (sem, conll)
}

struct Workspace {
    dir: tempfile::TempDir,
    train: (PathBuf, PathBuf),
    dev: (PathBuf, PathBuf),
    config: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let spec = DirectionalSpec::default();
        let train = write_corpus(dir.path(), "train", &spec.generate(120, 1, 21));
        let dev = write_corpus(dir.path(), "dev", &spec.generate(40, 500, 22));
        let config = dir.path().join("train.cfg");
        std::fs::write(&config, "regime = sighted_ns\nd = 8\nn1 = 16\nn2 = 8\nmax_epochs = 4\nseed = 2\n").unwrap();
        Workspace { dir, train, dev, config }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn train(&self, out: &Path, extra: &[&str]) -> Output {
        let mut args = vec![
            "train".to_string(),
            "--config".into(),
            self.config.display().to_string(),
            "--train-sem".into(),
            self.train.0.display().to_string(),
            "--train-conll".into(),
            self.train.1.display().to_string(),
            "--dev-sem".into(),
            self.dev.0.display().to_string(),
            "--dev-conll".into(),
            self.dev.1.display().to_string(),
            "--out".into(),
            out.display().to_string(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        sdprel(&refs)
    }
}

fn value(report: &str, key: &str) -> String {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("{key} missing from {report}"))
        .trim()
        .to_string()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(sdprel(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(sdprel(&["predict", "--model"]).status.code(), Some(1));
    assert_eq!(sdprel(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_config_exits_with_one() {
    let ws = Workspace::new();
    let out = ws.path("m.model");
    let bad = ws.train(&out, &["--set", "n1=zero"]);
    assert_eq!(bad.status.code(), Some(1));
    let unknown = ws.train(&out, &["--set", "colour=blue"]);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn missing_file_exits_with_two() {
    let ws = Workspace::new();
    let out = sdprel(&["score", "--gold", "/no/such/gold", "--pred", "/no/such/pred"]);
    assert_eq!(out.status.code(), Some(2));
    let out = sdprel(&[
        "predict",
        "--model",
        ws.path("absent.model").to_str().unwrap(),
        "--sem",
        ws.train.0.to_str().unwrap(),
        "--conll",
        ws.train.1.to_str().unwrap(),
        "--out",
        ws.path("p.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gradcheck_passes() {
    let out = sdprel(&["gradcheck", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn score_prints_a_report() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let out = sdprel(&[
        "score",
        "--gold",
        fixtures.join("parity_gold.txt").to_str().unwrap(),
        "--pred",
        fixtures.join("parity_pred.txt").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("Cause-Effect"), "{text}");
    let f: f64 = value(&text, "macro_f1").parse().unwrap();
    assert!((f - 77.0 / 150.0).abs() < 1e-6, "{text}");
}

#[test]
fn extract_paths_writes_one_line_per_instance() {
    let ws = Workspace::new();
    let out = ws.path("train.paths");
    let status = sdprel(&[
        "extract-paths",
        "--sem",
        ws.train.0.to_str().unwrap(),
        "--conll",
        ws.train.1.to_str().unwrap(),
        "--mode",
        "dir_only",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0), "{}", String::from_utf8_lossy(&status.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 120);
    assert!(text.lines().all(|l| l.contains('\t') && !l.contains("nsubj")));
}

#[test]
fn predict_and_score_reproduce_training_accuracy() {
    let ws = Workspace::new();
    let model = ws.path("m.model");
    let trained = ws.train(&model, &[]);
    assert_eq!(trained.status.code(), Some(0), "{}", String::from_utf8_lossy(&trained.stderr));
    let report = stdout(&trained);
    assert!(ws.path("m.model.history").exists());

    let pred = ws.path("train.pred");
    let predicted = sdprel(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--sem",
        ws.train.0.to_str().unwrap(),
        "--conll",
        ws.train.1.to_str().unwrap(),
        "--out",
        pred.to_str().unwrap(),
    ]);
    assert_eq!(predicted.status.code(), Some(0));
    let scored = sdprel(&["score", "--gold", ws.train.0.to_str().unwrap(), "--pred", pred.to_str().unwrap()]);
    assert_eq!(scored.status.code(), Some(0));
    let a: f64 = value(&report, "train_accuracy").parse().unwrap();
    let b: f64 = value(&stdout(&scored), "accuracy").parse().unwrap();
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn set_overrides_apply_before_seed() {
    let ws = Workspace::new();
    let out = ws.train(&ws.path("a.model"), &["--set", "max_epochs=2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(value(&stdout(&out), "epochs"), "2");
    let seeded = ws.train(&ws.path("b.model"), &["--set", "seed=99", "--seed", "2"]);
    assert_eq!(seeded.status.code(), Some(0));
    let plain = ws.train(&ws.path("c.model"), &[]);
    assert_eq!(
        std::fs::read(ws.path("b.model")).unwrap(),
        std::fs::read(ws.path("c.model")).unwrap()
    );
    assert_eq!(stdout(&seeded), stdout(&plain));
}
