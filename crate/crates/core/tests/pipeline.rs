use anderson_spectra::experiments::{run, ExperimentConfig};

const SMALL: &str = r#"
name = "small"

[model]
dim = 1
side = 120
boundary = "periodic"
distribution = { kind = "uniform", lo = -1.0, hi = 1.0 }
coupling = 4.0

[ids]
side = 120
realizations = 20
method = "pooled"

[window]
kind = "count"
e0 = 0.0
expected = 20.0

[statistics]
compute = ["spectrum", "ids", "dls", "dls_macroscopic", "centers", "dcs", "independence", "two_scale", "bernoulli"]
independence_offset = 30
decay_xi = 1.0

[two_scale]
ell = 30
ell_prime = 5
# a five-site buffer at this coupling only reaches |dE| of order 1e-4
tol = 1e-2

[ensemble]
realizations = 50
master_seed = 3
workers = 2
"#;

#[test]
fn every_statistic_runs_and_writes_its_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    let rec = run(&cfg, dir.path()).unwrap();
    assert_eq!(rec.summaries.len(), cfg.statistics.compute.len());
    for f in &rec.files {
        assert!(rec.output_dir.join(f).exists(), "{f}");
    }
    for name in ["spectrum.csv", "ids.csv", "dls.csv", "centers.csv", "two_scale_pairs.csv", "result.json"] {
        assert!(rec.files.iter().any(|f| f == name), "{name} missing");
    }
    let dls = rec.summary("dls").unwrap();
    assert!(dls.sup_distance.unwrap() < 0.3);
    let two = &rec.summary("two_scale").unwrap().details;
    assert!(two["matched_fraction"].as_f64().unwrap() > 0.5);
}

#[test]
fn same_digest_same_outputs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.statistics.compute.retain(|s| s.name() == "dls" || s.name() == "dcs");
    let ra = run(&cfg, a.path()).unwrap();
    cfg.ensemble.workers = 1;
    let rb = run(&cfg, b.path()).unwrap();
    for f in ["dls.csv", "dcs.csv"] {
        assert_eq!(std::fs::read(ra.output_dir.join(f)).unwrap(), std::fs::read(rb.output_dir.join(f)).unwrap());
    }
}
