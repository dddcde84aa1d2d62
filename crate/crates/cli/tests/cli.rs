use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aigpt_cli::{EXIT_CONFIG, EXIT_DATA};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn aigpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aigpt")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A small version of the desk corpus written as tables, plus a run config
/// that reads them.
fn small_tables(root: &Path) -> PathBuf {
    let synth = fs::read_to_string(fixtures().join("desk.synth"))
        .unwrap()
        .replace("n0 = 892", "n0 = 120");
    let synth_path = root.join("small.synth");
    fs::write(&synth_path, synth).unwrap();
    let data = root.join("data");
    let out = aigpt(&["synth", "--config", synth_path.to_str().unwrap(), "--out", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let fx = fixtures();
    let config = format!(
        r#"window = "1990-2019"

[input]
dir = "data"

[keyword]
table = "{kw}"

[wipo]
rules = "{wipo}"

[uspto]
config = "{uspto}"

[benchmarks]
prefixes = ["G06", "H04W"]

[stats]
periods = ["1990-2019", "2000-2009"]
"#,
        kw = fx.join("keywords.tsv").display(),
        wipo = fx.join("wipo_rules.tsv").display(),
        uspto = fx.join("uspto.config").display(),
    );
    let path = root.join("run.toml");
    fs::write(&path, config).unwrap();
    path
}

fn read_tree(root: &Path, sub: &str) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(root.join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn missing_patents_table_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("data")).unwrap();
    let config = tmp.path().join("run.toml");
    fs::write(&config, "[input]\ndir = \"data\"\n").unwrap();
    let out = aigpt(&["classify", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(stderr(&out).contains("patents.tsv"), "{}", stderr(&out));
}

#[test]
fn report_without_metrics_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_tables(tmp.path());
    let empty = tmp.path().join("empty");
    let out = aigpt(&["report", "--config", config.to_str().unwrap(), "--out", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_DATA), "{}", stderr(&out));
}

#[test]
fn synth_writes_tables_and_truth() {
    let tmp = tempfile::tempdir().unwrap();
    small_tables(tmp.path());
    let data = tmp.path().join("data");
    for table in ["patents.tsv", "cpc.tsv", "citations.tsv", "science.tsv"] {
        assert!(data.join(table).is_file(), "{table} missing");
    }
    let truth: Vec<String> = read_tree(&data, "truth").into_iter().map(|(n, _)| n).collect();
    assert_eq!(truth, ["Keyword.ids", "Science.ids", "USPTO.ids", "WIPO.ids"]);
    let manifest = fs::read_to_string(data.join("manifest.tsv")).unwrap();
    assert!(manifest.contains("truth/Keyword.ids"));
}

#[test]
fn stagewise_classify_and_metrics_match_run() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_tables(tmp.path());
    let config = config.to_str().unwrap();
    let (full, staged) = (tmp.path().join("full"), tmp.path().join("staged"));

    let out = aigpt(&["run", "--config", config, "--out", full.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    for stage in ["classify", "metrics"] {
        let out = aigpt(&[stage, "--config", config, "--out", staged.to_str().unwrap()]);
        assert!(out.status.success(), "{stage}: {}", stderr(&out));
    }
    for sub in ["groups", "metrics", "tables"] {
        assert_eq!(read_tree(&full, sub), read_tree(&staged, sub), "{sub} differs");
    }
    assert!(!staged.join("stats").exists());
}

#[test]
fn metrics_before_classify_names_the_missing_file() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_tables(tmp.path());
    let out_dir = tmp.path().join("out");
    let out = aigpt(&["metrics", "--config", config.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert!(stderr(&out).contains("groups"), "{}", stderr(&out));
}

#[test]
fn seed_override_changes_synth_output() {
    let tmp = tempfile::tempdir().unwrap();
    let synth = fs::read_to_string(fixtures().join("desk.synth"))
        .unwrap()
        .replace("n0 = 892", "n0 = 60");
    let path = tmp.path().join("s.synth");
    fs::write(&path, synth).unwrap();
    let path = path.to_str().unwrap();
    let digest = |dir: &str, seed: &str| {
        let out_dir = tmp.path().join(dir);
        let out = aigpt(&["synth", "--config", path, "--seed", seed, "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read_to_string(out_dir.join("manifest.tsv")).unwrap()
    };
    assert_eq!(digest("a", "7"), digest("b", "7"));
    assert_ne!(digest("a2", "7"), digest("c", "8"));
}
