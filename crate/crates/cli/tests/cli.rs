use std::path::{Path, PathBuf};
use std::process::Command;

use relbound_cli::{
    emit_plot_data, evaluate, parse_task_file, parse_task_str, task_from_flags, CliError, Overrides, PlotKind,
    Status, TaskKind,
};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn data_dir() -> PathBuf {
    data("")
}

fn summary(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn defaults_are_filled_in() {
    let text = "task = \"expand\"\nmodel = \"classical.json\"\nN = 4\n";
    let spec = parse_task_str(text, "inline", &data_dir(), &Overrides::default()).unwrap();
    assert_eq!(spec.t0, 1.0);
    assert_eq!(spec.max_support, 8);
    assert_eq!(spec.seed, 0);
    assert_eq!(spec.out, PathBuf::from("out"));
}

#[test]
fn missing_required_key_is_named() {
    let text = "task = \"expand\"\nmodel = \"two_site.json\"\n";
    let err = parse_task_str(text, "inline", &data_dir(), &Overrides::default()).unwrap_err();
    assert!(matches!(&err, CliError::MissingKeys { keys, .. } if keys == &vec!["N".to_string()]));
    assert!(err.to_string().contains("N"));
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn t0_precedence_is_flag_then_task_then_model() {
    let base = data_dir();
    let from_model = parse_task_str(
        "task = \"expand\"\nmodel = \"two_site_t0.json\"\nN = 4\n",
        "inline",
        &base,
        &Overrides::default(),
    )
    .unwrap();
    assert_eq!(from_model.t0, 0.75);

    let text = "task = \"expand\"\nmodel = \"two_site_t0.json\"\nN = 4\nt0 = 0.5\n";
    let from_task = parse_task_str(text, "inline", &base, &Overrides::default()).unwrap();
    assert_eq!(from_task.t0, 0.5);

    let overrides = Overrides { t0: Some(0.25), ..Overrides::default() };
    let from_flag = parse_task_str(text, "inline", &base, &overrides).unwrap();
    assert_eq!(from_flag.t0, 0.25);
    assert_eq!(from_flag.model.as_ref().unwrap().t0, 0.25);
}

#[test]
fn malformed_task_files_are_input_errors() {
    let base = data_dir();
    let none = Overrides::default();

    let err = parse_task_str("task = \"frobnicate\"\n", "inline", &base, &none).unwrap_err();
    assert!(matches!(err, CliError::UnknownTask(_)));
    assert_eq!(err.exit_code(), 4);

    let err = parse_task_str("task = \"expand\"\nN = = 3\n", "bad.toml", &base, &none).unwrap_err();
    assert!(matches!(err, CliError::Parse { .. }));
    assert!(err.to_string().contains("bad.toml"));
    assert!(err.to_string().contains("line 2"), "{err}");

    let err = parse_task_str("task = \"expand\"\nN = 3\nbogus = 1\n", "inline", &base, &none).unwrap_err();
    assert!(err.to_string().contains("bogus"), "{err}");

    let err = parse_task_str("task = \"expand\"\nmodel = \"two_site.json\"\nN = 0\n", "inline", &base, &none)
        .unwrap_err();
    assert!(matches!(err, CliError::InvalidValue { .. }));
}

#[test]
fn inline_model_table_is_accepted() {
    let text = r#"
task = "model-check"

[model]
dims = [2]
site_dim = 2
lambda0 = [0]
h = [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]
alpha = 0.0
beta = 0.0
"#;
    let spec = parse_task_str(text, "inline", &data_dir(), &Overrides::default()).unwrap();
    assert_eq!(spec.model_source.as_deref(), Some("inline"));
    let outcome = evaluate(&spec);
    assert_eq!(outcome.status, Status::Ok, "{:?}", outcome.failures);
}

#[test]
fn model_check_passes_and_fails_audits() {
    let overrides = Overrides { model: Some(data("two_site.json")), ..Overrides::default() };
    let ok = evaluate(&task_from_flags(TaskKind::ModelCheck, &overrides).unwrap());
    assert_eq!(ok.status, Status::Ok, "{:?}", ok.failures);
    assert_eq!(ok.exit_code(), 0);

    // h = 0 has a degenerate kernel, so the model cannot pass its audit.
    let text = r#"
task = "model-check"

[model]
dims = [2]
site_dim = 2
lambda0 = [0]
h = [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]
alpha = 0.0
beta = 0.0
"#;
    let spec = parse_task_str(text, "inline", &data_dir(), &Overrides::default()).unwrap();
    let bad = evaluate(&spec);
    assert_eq!(bad.status, Status::AuditFailure);
    assert_eq!(bad.exit_code(), 2);
    assert!(!bad.failures.is_empty());
}

#[test]
fn strong_perturbation_is_flagged_non_convergent() {
    let overrides = Overrides { model: Some(data("strong.json")), n: Some(4), ..Overrides::default() };
    let outcome = evaluate(&task_from_flags(TaskKind::Expand, &overrides).unwrap());
    assert_eq!(outcome.exit_code(), 3);
    assert!(outcome.flags.iter().any(|f| f == "non-convergent"), "{:?}", outcome.flags);
}

#[test]
fn plot_data_has_expected_columns_and_rejects_mismatches() {
    let spec = parse_task_file(&data("expand.toml"), &Overrides::default()).unwrap();
    let outcome = evaluate(&spec);
    assert_eq!(outcome.status, Status::Ok, "{:?}", outcome.failures);
    let report = outcome.report.as_ref().unwrap();

    let table = emit_plot_data(report, PlotKind::LnZVsN).unwrap();
    assert_eq!(table.headers, ["N", "lnZ", "fit", "bound"]);
    assert!(!table.rows.is_empty());
    let table = emit_plot_data(report, PlotKind::WeightVsSize).unwrap();
    assert_eq!(table.headers, ["size", "max_weight", "bound"]);

    let err = emit_plot_data(report, PlotKind::GramDecay).unwrap_err();
    assert!(matches!(err, CliError::MissingSeries { .. }));
    let err = "histogram".parse::<PlotKind>().unwrap_err();
    assert!(matches!(err, CliError::UnknownPlotKind(_)));
    assert_eq!("gap-vs-n".parse::<PlotKind>().unwrap(), PlotKind::GapVsN);
}

#[test]
fn evaluation_is_deterministic() {
    let spec = parse_task_file(&data("expand.toml"), &Overrides::default()).unwrap();
    let a = evaluate(&spec);
    let b = evaluate(&spec);
    assert_eq!(a.summary_json, b.summary_json);
    assert_eq!(a.tables, b.tables);
}

#[test]
fn correlate_reports_a_truncated_correlation() {
    let overrides = Overrides {
        model: Some(data("chain4.json")),
        a1: Some("Z@0".into()),
        a2: Some("Z@2".into()),
        ..Overrides::default()
    };
    let outcome = evaluate(&task_from_flags(TaskKind::Correlate, &overrides).unwrap());
    assert_eq!(outcome.status, Status::Ok, "{:?}", outcome.failures);
    assert!(outcome.summary_json.contains("\"correlation\""));

    let overrides = Overrides { a1: Some("Q@0".into()), ..overrides };
    let outcome = evaluate(&task_from_flags(TaskKind::Correlate, &overrides).unwrap());
    assert_eq!(outcome.status, Status::InputError);
}

fn relbound(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_relbound")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = |name: &str| tmp.path().join(name).to_str().unwrap().to_string();

    let two_site = data("two_site.json");
    let o = relbound(&["model-check", two_site.to_str().unwrap(), "--out", &out("ok")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(&tmp.path().join("ok"))["status"], "ok");

    let bad = tmp.path().join("bad.json");
    let text = std::fs::read_to_string(&two_site).unwrap().replace("[1, 0]]]", "[0, 0]]]");
    std::fs::write(&bad, text).unwrap();
    let o = relbound(&["model-check", bad.to_str().unwrap(), "--out", &out("bad")]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));

    let strong = data("strong.json");
    let o = relbound(&["expand", strong.to_str().unwrap(), "--N", "4", "--out", &out("strong")]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary(&tmp.path().join("strong"))["exit_code"], 3);

    let o = relbound(&["expand", two_site.to_str().unwrap(), "--out", &out("missing")]);
    assert_eq!(o.status.code(), Some(4));
    let o = relbound(&["model-check", "/nonexistent/model.json", "--out", &out("nofile")]);
    assert_eq!(o.status.code(), Some(4));
    let o = relbound(&["no-such-subcommand"]);
    assert_eq!(o.status.code(), Some(4));
    let o = relbound(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn binary_outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let task = data("expand.toml");
    let mut dirs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let o = relbound(&["run", task.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        dirs.push(dir);
    }
    let mut names: Vec<_> = std::fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.iter().any(|n| n == "summary.json"));
    assert!(names.iter().any(|n| n == "lnZ-vs-N.csv"));
    for name in names {
        let a = std::fs::read(dirs[0].join(&name)).unwrap();
        let b = std::fs::read(dirs[1].join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
    }
}
