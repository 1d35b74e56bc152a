use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oslab::runner::{self, ExperimentConfig, ExperimentKind, RunManifest, RunOptions, MANIFEST_NAME};

fn oslab(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_oslab"));
    cmd.args(args).env_remove("OSLAB_OUT");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn sha256(bytes: &[u8]) -> String {
    use sha2::Digest;
    hex::encode(sha2::Sha256::digest(bytes))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const GAP: &str = "kind = \"gap-scan\"\nseed = 1\n\n[params]\nns = [27, 81]\ndelta = 1.0\n";

#[test]
fn gap_scan_writes_one_row_per_dimension() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gap.toml", GAP);
    let out = tmp.path().join("out");
    let o = oslab(&["gap-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("gap_report.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,h,N_of_h,power_norm,amp_sup");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("27,") && lines[2].starts_with("81,"));
    let manifest = RunManifest::load(out.join(MANIFEST_NAME)).unwrap();
    assert_eq!(manifest.kind, ExperimentKind::GapScan);
    assert_eq!(manifest.outputs.len(), 1);
    assert_eq!(manifest.outputs[0].sha256, sha256(csv.as_bytes()));
    // nothing but the outputs and the manifest
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["gap_report.csv", "manifest.json"]);
}

#[test]
fn baker_dimension_not_divisible_by_three_is_numeric_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "kind = \"gap-scan\"\n[params]\nns = [28]\n");
    let out = tmp.path().join("out");
    let o = oslab(&["gap-scan", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("N must be divisible by 3"), "{}", stderr(&o));
    assert!(!out.join(MANIFEST_NAME).exists());
}

#[test]
fn serial_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "orbit.toml",
        "kind = \"orbit\"\nseed = 3\n[params]\ndiscs = [[0.0, 0.0, 1.0], [6.0, 0.0, 1.0], [3.0, 5.196152422706632, 1.0]]\n",
    );
    let mut digests = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        let o = oslab(
            &["orbit", "--config", cfg.to_str().unwrap(), "--serial", "--out", out.to_str().unwrap()],
            &[],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let m = RunManifest::load(out.join(MANIFEST_NAME)).unwrap();
        assert_eq!(m.workers, 1);
        digests.push(m.outputs.iter().map(|f| (f.path.clone(), f.sha256.clone())).collect::<Vec<_>>());
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn config_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", "kind = \"gap-scan\"\n[params]\nns = [27]\ndelat = 1.0\n");
    let o = oslab(&["gap-scan", "--config", cfg.to_str().unwrap()], &[("OSLAB_OUT", tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("line 4") && msg.contains("delat"), "{msg}");

    let cfg = write_config(tmp.path(), "d.toml", "kind = \"gap-scan\"\n[params]\ndelta = -1.0\n");
    let o = oslab(&["gap-scan", "--config", cfg.to_str().unwrap()], &[("OSLAB_OUT", tmp.path())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let o = oslab(&["orbit", "--config", cfg.to_str().unwrap()], &[("OSLAB_OUT", tmp.path())]);
    assert_eq!(o.status.code(), Some(1), "kind mismatch");
    let o = oslab(&["no-such-kind", "--config", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_config_and_unwritable_output_are_io_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let o = oslab(&["gap-scan", "--config", tmp.path().join("nope.toml").to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3));
    let cfg = write_config(tmp.path(), "gap.toml", GAP);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = oslab(&["gap-scan", "--config", cfg.to_str().unwrap(), "--out", blocker.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn output_directory_precedence() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!("{GAP}").replace("seed = 1\n", "seed = 1\noutput_dir = \"from-config\"\n");
    let cfg = write_config(tmp.path(), "gap.toml", &text);
    let env_dir = tmp.path().join("from-env");
    let o = oslab(&["gap-scan", "--config", cfg.to_str().unwrap()], &[("OSLAB_OUT", &env_dir)]);
    assert!(o.status.success());
    assert!(env_dir.join(MANIFEST_NAME).exists());
    let flag_dir = tmp.path().join("from-flag");
    let o = oslab(
        &["gap-scan", "--config", cfg.to_str().unwrap(), "--out", flag_dir.to_str().unwrap()],
        &[("OSLAB_OUT", &env_dir)],
    );
    assert!(o.status.success());
    assert!(flag_dir.join(MANIFEST_NAME).exists());
    let o = oslab(&["gap-scan", "--config", cfg.to_str().unwrap()], &[]);
    assert!(o.status.success());
    assert!(tmp.path().join("from-config").join(MANIFEST_NAME).exists());
}

#[test]
fn plots_do_not_change_csv_content() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "gap.toml", GAP);
    let plain = tmp.path().join("plain");
    let plotted = tmp.path().join("plotted");
    for (dir, extra) in [(&plain, None), (&plotted, Some("--plot"))] {
        let mut args = vec!["gap-scan", "--config", cfg.to_str().unwrap(), "--serial", "--out", dir.to_str().unwrap()];
        args.extend(extra);
        assert!(oslab(&args, &[]).status.success());
    }
    assert_eq!(
        fs::read(plain.join("gap_report.csv")).unwrap(),
        fs::read(plotted.join("gap_report.csv")).unwrap()
    );
    let svgs: Vec<_> = fs::read_dir(&plotted)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.path().extension().is_some_and(|x| x == "svg"))
        .collect();
    assert!(!svgs.is_empty());
    let svg = fs::read_to_string(svgs[0].path()).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

/// Small parameter sets that exercise every experiment kind in-process.
const SMALL: &[(&str, &str)] = &[
    ("geometry-check", ""),
    ("orbit", "words = [[0, 1], [0, 1, 2]]\n"),
    ("trapped-set", "depth = 4\n"),
    ("quantize", "symbol = \"bump\"\nns = [16, 32]\n"),
    ("gap-scan", "ns = [27]\n"),
    ("resolvent-scan", "ns = [27]\ngamma = 0.1\nre_steps = 2\n"),
    ("spectrum", "n = 27\n"),
    ("wave", "extent = 24.0\nnx = 64\nt_final = 8.0\nr = 6.0\nwidth = 0.8\nabsorber_width = 8\n"),
    ("contour-test", "dim = 3\nmatrices = 1\nts = [0.0, 1.0]\n"),
];

#[test]
fn every_kind_runs_and_lists_its_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(SMALL.len(), ExperimentKind::ALL.len());
    for &(kind, params) in SMALL {
        let text = format!("kind = \"{kind}\"\nseed = 7\n[params]\n{params}");
        let cfg = ExperimentConfig::parse(&text, None).unwrap_or_else(|e| panic!("{kind}: {e}"));
        let dir = tmp.path().join(kind);
        let opts = RunOptions {
            plot: true,
            serial: true,
            workers: None,
            out_dir: Some(dir.clone()),
        };
        let m = runner::run(&cfg, &opts).unwrap_or_else(|e| panic!("{kind}: {e}"));
        assert_eq!(m.kind.as_str(), kind);
        assert_eq!(m.config_digest, cfg.digest());
        assert!(!m.outputs.is_empty() && !m.summary.is_empty(), "{kind}");
        for f in &m.outputs {
            let bytes = fs::read(dir.join(&f.path)).unwrap();
            assert_eq!(bytes.len() as u64, f.bytes);
            assert_eq!(sha256(&bytes), f.sha256);
            if f.path.ends_with(".csv") {
                let text = String::from_utf8(bytes).unwrap();
                let mut lines = text.lines();
                let header = lines.next().unwrap();
                let cols = header.split(',').count();
                assert!(lines.all(|l| l.split(',').count() == cols), "{kind}: {}", f.path);
            }
        }
        let back = RunManifest::load(dir.join(MANIFEST_NAME)).unwrap();
        assert_eq!(back.outputs, m.outputs);
        assert!(back.started_at <= back.finished_at);
    }
}
