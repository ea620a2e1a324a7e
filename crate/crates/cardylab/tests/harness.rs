use std::path::{Path, PathBuf};
use std::process::Command;

use cardylab::config::parse_scales;
use cardylab::report::file_name;
use cardylab::{
    emit, run, DomainFile, ExperimentConfig, ExperimentKind, Format, HarnessError, Parallel, SweepReport, Verdict,
};

fn domain(name: &str) -> DomainFile {
    DomainFile::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("domains").join(format!("{name}.json"))).unwrap()
}

fn domain_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("domains").join(format!("{name}.json"))
}

fn small(kind: ExperimentKind, name: &str) -> ExperimentConfig {
    ExperimentConfig::new(kind, domain(name), vec![1.0 / 8.0, 1.0 / 16.0], 400, 11)
}

#[test]
fn shipped_domains_parse_and_build() {
    for name in ["square", "triangle", "l_shape", "pentagon", "slit_square", "slit_from_a"] {
        let f = domain(name);
        f.build().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(DomainFile::parse(&f.to_json()).unwrap(), f);
    }
}

#[test]
fn domain_schema_rejects_bad_input() {
    let ok = r#"{"outer":[[0,0],[1,0],[1,1],[0,1]],"marks":{"a":{"point":[0,0]},"b":{"point":[1,0]},"c":{"point":[0,1]}},"z0":[0.5,0.5]}"#;
    DomainFile::parse(ok).unwrap().build().unwrap();

    let unknown = ok.replace("\"z0\"", "\"zz\":1,\"z0\"");
    let missing = ok.replace(r#""c":{"point":[0,1]}"#, r#""x":{"point":[0,1]}"#);
    for text in ["", "{", "[]", unknown.as_str(), missing.as_str()] {
        let e = DomainFile::parse(text).unwrap_err();
        assert_eq!(e.code(), "DOMAIN_PARSE", "{text}");
    }

    let attach = ok.replace(
        "\"marks\"",
        r#""slits":[{"points":[[0.5,1],[0.5,0.5]],"attach":{"slit":0,"side":"up"}}],"marks""#,
    );
    assert_eq!(DomainFile::parse(&attach).unwrap_err().code(), "DOMAIN_PARSE");
}

#[test]
fn config_validation() {
    let base = small(ExperimentKind::CardySweep, "square");
    base.validate().unwrap();

    let mut c = base.clone();
    c.record.scales = vec![1.0 / 16.0, 1.0 / 8.0];
    assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
    c.record.scales = vec![1.0 / 8.0, 1.0 / 8.0];
    assert!(c.validate().is_err());
    c.record.scales = vec![];
    assert!(c.validate().is_err());
    c.record.scales = vec![-0.1];
    assert!(c.validate().is_err());

    let mut c = base.clone();
    c.record.samples = 99;
    assert!(c.validate().is_err());
    c.record.samples = 100;
    c.validate().unwrap();

    let mut c = base;
    c.record.params.ring_ratio = 1.0;
    assert_eq!(c.validate().unwrap_err().code(), "CONFIG_INVALID");
}

#[test]
fn scale_lists() {
    assert_eq!(parse_scales("1/16, 1/32,0.01").unwrap(), vec![0.0625, 0.03125, 0.01]);
    assert!(parse_scales("1/x").is_err());
    assert!(parse_scales("").is_err());
}

#[test]
fn error_json_is_machine_readable() {
    let e = HarnessError::Config("bad".into());
    let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
    assert_eq!(v["error"]["code"], "CONFIG_INVALID");
    assert!(v["error"]["message"].as_str().unwrap().contains("bad"));
    assert_ne!(e.exit_code(), 0);
}

#[test]
fn empty_report_gives_headers_only_csv() {
    let cfg = small(ExperimentKind::CardySweep, "square");
    let report = SweepReport::empty(cfg.record.clone());
    let csv = report.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines.iter().all(|l| l.starts_with('#') || *l == SweepReport::CSV_COLUMNS));
    assert_eq!(lines.iter().filter(|l| !l.starts_with('#')).count(), 1);
    assert_eq!(*lines.last().unwrap(), SweepReport::CSV_COLUMNS);
}

#[test]
fn sweep_outputs_round_trip_and_embed_metadata() {
    let cfg = small(ExperimentKind::CardySweep, "square");
    let (report, timings) = run(&cfg, &Parallel::new(2)).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.audits.len(), 2);
    assert!(report.audits.iter().all(|a| a.passed));
    let c0 = report.oracle.as_ref().unwrap().value;
    assert!((c0 - 0.5).abs() < 1e-6, "{c0}");
    for r in &report.rows {
        assert!(r.ci_lo <= r.estimate.value && r.estimate.value <= r.ci_hi);
        assert!((r.estimate.value - 0.5).abs() < 0.15, "{}", r.estimate.value);
    }
    assert!(matches!(report.verdict, Some(Verdict::Envelope { .. })));
    assert_eq!(timings.config_hash, report.config_hash);
    assert_eq!(report.config_hash, cfg.record.hash());

    let json = report.to_json();
    let back = SweepReport::from_json(&json).unwrap();
    assert_eq!(back, report);
    assert_eq!(back.to_json(), json);

    for format in [Format::Csv, Format::Json, Format::Plotdata] {
        let text = report.render(format);
        assert!(text.contains(&report.config_hash), "{format:?}");
        assert!(text.contains(&report.seed.to_string()), "{format:?}");
        assert!(text.contains(env!("CARGO_PKG_VERSION")), "{format:?}");
    }

    let csv = report.to_csv();
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(data.len(), report.rows.len());
    let cols = SweepReport::CSV_COLUMNS.split(',').count();
    assert!(data.iter().all(|l| l.split(',').count() == cols));
}

#[test]
fn plotdata_columns_in_order() {
    let cfg = small(ExperimentKind::CardySweep, "square");
    let (report, _) = run(&cfg, &Parallel::new(1)).unwrap();
    let text = report.to_plotdata();
    assert!(text.lines().any(|l| l == "# log_eps abs_err ci_lo ci_hi"));
    let data: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(data.len(), report.rows.len());
    for (d, r) in data.iter().zip(&report.rows) {
        assert_eq!(d.len(), 4);
        assert!((d[0] - r.eps.ln()).abs() < 1e-9);
        assert!((d[1] - r.abs_err.unwrap()).abs() < 1e-9);
        assert!(d[2] <= d[1] && d[1] <= d[3]);
    }
}

#[test]
fn emit_writes_named_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(ExperimentKind::CardySweep, "square");
    let report = SweepReport::empty(cfg.record);
    for format in [Format::Csv, Format::Json, Format::Plotdata] {
        let path = emit(&report, format, dir.path()).unwrap();
        assert_eq!(path.file_name().unwrap().to_str().unwrap(), file_name(format));
        assert_eq!(std::fs::read_to_string(path).unwrap(), report.render(format));
    }
}

#[test]
fn output_does_not_depend_on_thread_count() {
    for kind in [ExperimentKind::CardySweep, ExperimentKind::HarrisRings] {
        let mut cfg = small(kind, "square");
        if kind == ExperimentKind::HarrisRings {
            cfg.record.scales = vec![1.0 / 32.0, 1.0 / 64.0];
        }
        let (one, _) = run(&cfg, &Parallel::new(1)).unwrap();
        let (many, _) = run(&cfg, &Parallel::new(8)).unwrap();
        assert_eq!(one.to_json(), many.to_json(), "{kind:?}");
        assert_eq!(one.to_csv(), many.to_csv(), "{kind:?}");
    }
}

#[test]
fn seed_changes_estimates() {
    let a = small(ExperimentKind::CardySweep, "square");
    let mut b = a.clone();
    b.record.seed += 1;
    let (ra, _) = run(&a, &Parallel::new(1)).unwrap();
    let (rb, _) = run(&b, &Parallel::new(1)).unwrap();
    assert_ne!(ra.config_hash, rb.config_hash);
    assert_ne!(
        ra.rows.iter().map(|r| r.estimate.successes).collect::<Vec<_>>(),
        rb.rows.iter().map(|r| r.estimate.successes).collect::<Vec<_>>()
    );
}

#[test]
fn audit_passes_on_convex_polygon() {
    let mut cfg = small(ExperimentKind::ApproxAudit, "pentagon");
    cfg.record.scales = vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
    let (report, _) = run(&cfg, &Parallel::new(1)).unwrap();
    assert_eq!(report.audits.len(), 3);
    assert!(report.audits.iter().all(|a| a.passed), "{:?}", report.audits);
    assert!(report.kernel.as_ref().unwrap().passed());
    assert!(matches!(report.verdict, Some(Verdict::AllPassed { passed: true, failures: 0 })));
    let m = report.minkowski.unwrap();
    assert!((m.fitted_dimension - 1.0).abs() < 0.2, "{}", m.fitted_dimension);
}

#[test]
fn decay_rows_follow_the_ray() {
    let mut cfg = small(ExperimentKind::BoundaryDecay, "slit_square");
    cfg.record.scales = vec![1.0 / 16.0];
    cfg.record.params.probes = 5;
    let (report, _) = run(&cfg, &Parallel::new(1)).unwrap();
    assert_eq!(report.rows.len(), 5);
    assert!(report.rows.windows(2).all(|w| w[0].param < w[1].param));
    assert!(report.rows.iter().all(|r| r.c0.is_some_and(|c| (0.0..=1.0).contains(&c))));
}

#[test]
fn exploration_traces_are_well_organized() {
    let mut cfg = small(ExperimentKind::Exploration, "square");
    cfg.record.scales = vec![1.0 / 16.0];
    cfg.record.params.traces = 10;
    cfg.record.params.max_steps = 150;
    let (report, _) = run(&cfg, &Parallel::new(1)).unwrap();
    assert_eq!(report.traces.len(), 10);
    assert!(report.traces.iter().all(|t| t.passed), "{:?}", report.traces);
}

#[test]
fn equicontinuity_needs_a_slit_ending_at_a() {
    let cfg = small(ExperimentKind::Equicontinuity, "square");
    assert_eq!(run(&cfg, &Parallel::new(1)).unwrap_err().code(), "CONFIG_INVALID");

    let mut cfg = small(ExperimentKind::Equicontinuity, "slit_from_a");
    cfg.record.domain.marks.a.point = [0.0, 0.0];
    assert_eq!(run(&cfg, &Parallel::new(1)).unwrap_err().code(), "CONFIG_INVALID");
}

#[test]
fn equicontinuity_rows_and_envelopes() {
    let mut cfg = small(ExperimentKind::Equicontinuity, "slit_from_a");
    cfg.record.scales = vec![1.0 / 16.0];
    cfg.record.samples = 200;
    cfg.record.params.perturbations = 3;
    let (report, _) = run(&cfg, &Parallel::new(1)).unwrap();
    assert_eq!(report.envelopes.len(), 3);
    let deltas: Vec<f64> = report.envelopes.iter().map(|e| e.delta).collect();
    assert_eq!(deltas, vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
    assert!(report.envelopes.iter().all(|e| e.perturbations == 3 && e.mc_max_diff >= 0.0));
    assert_eq!(report.rows.iter().filter(|r| r.probe == 0).count(), 1);
    assert_eq!(report.rows.len(), 1 + 3 * 3);
    assert!(matches!(report.verdict, Some(Verdict::Equicontinuity { .. })));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cardylab"))
}

#[test]
fn cli_malformed_domain_exits_with_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"outer\": [[0,0],[1,0]").unwrap();
    let out = cli()
        .args(["sweep", "--domain"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "DOMAIN_PARSE");
}

#[test]
fn cli_bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli()
        .args(["sweep", "--scales", "1/32,1/16", "--domain"])
        .arg(domain_path("square"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["code"], "CONFIG_INVALID");
}

#[test]
fn cli_runs_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out_dir = dir.path().join(threads);
        let out = cli()
            .env("CARDYLAB_THREADS", threads)
            .args(["sweep", "--scales", "1/8,1/16", "--samples", "300", "--seed", "5", "--format", "csv", "--domain"])
            .arg(domain_path("triangle"))
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), out_dir.join("report.csv").display().to_string());
        let timings: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("timings.json")).unwrap()).unwrap();
        assert_eq!(timings["threads"], threads.parse::<u64>().unwrap());
        outputs.push(std::fs::read(out_dir.join("report.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
