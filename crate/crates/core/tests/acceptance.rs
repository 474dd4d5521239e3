//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria marked known-red are printed as failures with the measured value
//! and do not change the exit status; every other failure does.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anderson_spectra::disorder::{DisorderConfig, SiteDistribution};
use anderson_spectra::eigensolve::{eigh, full_spectrum, Interval, SpectralData};
use anderson_spectra::experiments::{run, ExperimentConfig, Model, ResultRecord};
use anderson_spectra::hamiltonian::build_laplacian;
use anderson_spectra::ids::estimate_ids;
use anderson_spectra::lattice::{Boundary, LatticeCube};
use anderson_spectra::statistics::{poisson_count_test, CountRecord};
use serde_json::Value;

const C1_TOL: f64 = 1e-10;
const C2_TOL: f64 = 1e-8;
const C3_TOL: f64 = 0.01;
const C4_SUP: f64 = 0.04;
const C5_SUP: f64 = 0.04;
const C6_SUP: f64 = 0.06;
const C7_ALPHA: f64 = 0.01;
const C7_CONTROL: f64 = 1e-4;
const C8_R: f64 = 0.1;
const C9_FRACTION: f64 = 0.9;
const C9_MEDIAN: f64 = 1e-6;
const C10_ALLOWANCE: f64 = 0.2;
const C11_FRACTION: f64 = 0.05;
const C12_WEGNER_SPREAD: f64 = 2.0;
const C12_WEGNER_TRACK: f64 = 0.25;
const C12_MINAMI_SPREAD: f64 = 3.0;

/// Criteria whose failure is understood and documented in docs/CALIBRATION.md.
const KNOWN_RED: &[u32] = &[6];

struct Outcome {
    id: u32,
    pass: bool,
    line: String,
}

type Check = fn(&Path) -> Result<(bool, String), String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance")
}

fn run_config(name: &str, out: &Path) -> Result<ResultRecord, String> {
    let cfg = ExperimentConfig::load(&configs().join(format!("{name}.toml"))).map_err(|e| e.to_string())?;
    run(&cfg, out).map_err(|e| e.to_string())
}

fn details<'a>(rec: &'a ResultRecord, statistic: &str) -> Result<&'a Value, String> {
    rec.summary(statistic).map(|s| &s.details).ok_or_else(|| format!("no {statistic} summary"))
}

fn num(v: &Value, key: &str) -> Result<f64, String> {
    v[key].as_f64().ok_or_else(|| format!("missing {key}"))
}

fn c1(_: &Path) -> Result<(bool, String), String> {
    let chain = LatticeCube::new(1, 4, Boundary::Periodic).map_err(|e| e.to_string())?;
    let got = full_spectrum(&build_laplacian(&chain).map_err(|e| e.to_string())?, false).map_err(|e| e.to_string())?;
    let want = [-2.0, 0.0, 0.0, 2.0];
    let err1 = got.eigenvalues().iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    // tensor sum of two periodic rings of four sites
    let ring: Vec<f64> = (0..4).map(|k| 2.0 * (2.0 * PI * k as f64 / 4.0).cos()).collect();
    let mut oracle: Vec<f64> = ring.iter().flat_map(|a| ring.iter().map(move |b| a + b)).collect();
    oracle.sort_by(f64::total_cmp);
    let square = LatticeCube::new(2, 4, Boundary::Periodic).map_err(|e| e.to_string())?;
    let got = full_spectrum(&build_laplacian(&square).map_err(|e| e.to_string())?, false).map_err(|e| e.to_string())?;
    let err2 = got.eigenvalues().iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let pass = got.len() == 16 && err1 <= C1_TOL && err2 <= C1_TOL;
    Ok((pass, format!("max error chain {err1:.1e}, square {err2:.1e} (tol {C1_TOL:.0e})")))
}

fn c2(_: &Path) -> Result<(bool, String), String> {
    let cube = LatticeCube::new(1, 200, Boundary::Periodic).map_err(|e| e.to_string())?;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let coupling = 0.5 + (seed % 10) as f64;
        let disorder = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, coupling, seed)
            .map_err(|e| e.to_string())?;
        let h = Model::new(cube.clone(), disorder)
            .and_then(|m| m.hamiltonian(0))
            .map_err(|e| e.to_string())?;
        let (values, vectors) = eigh(&h.to_dense(), true).map_err(|e| e.to_string())?;
        let vectors = vectors.ok_or("no eigenvectors")?;
        let tr: f64 = values.iter().sum();
        let fro: f64 = values.iter().map(|e| e * e).sum();
        let tr_err = (tr - h.trace()).abs() / h.frobenius_sq().sqrt();
        let fro_err = (fro - h.frobenius_sq()).abs() / h.frobenius_sq();
        let mut orth = 0.0f64;
        for i in 0..vectors.len() {
            for j in i..vectors.len() {
                let dot: f64 = vectors[i].iter().zip(&vectors[j]).map(|(a, b)| a * b).sum();
                orth = orth.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst = (worst.0.max(tr_err), worst.1.max(fro_err), worst.2.max(orth));
    }
    let pass = worst.0 <= C2_TOL && worst.1 <= C2_TOL && worst.2 <= C2_TOL;
    Ok((pass, format!("trace {:.1e}, frobenius {:.1e}, orthonormality {:.1e} over 100 matrices", worst.0, worst.1, worst.2)))
}

fn c3(_: &Path) -> Result<(bool, String), String> {
    let free = DisorderConfig::new(SiteDistribution::Uniform { lo: -1.0, hi: 1.0 }, 0.0, 1).map_err(|e| e.to_string())?;
    let ids = estimate_ids(1, 500, Boundary::Periodic, &free, 100).map_err(|e| e.to_string())?;
    let (n0, n1) = (ids.evaluate(0.0), ids.evaluate(1.0));
    let want1 = 1.0 - (0.5f64).acos() / PI;
    let pass = (n0 - 0.5).abs() <= C3_TOL && (n1 - want1).abs() <= C3_TOL;
    Ok((pass, format!("N(0) = {n0:.4} (0.5), N(1) = {n1:.4} ({want1:.4})")))
}

fn c4(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c04_dls", out)?;
    let s = rec.summary("dls").ok_or("no dls summary")?;
    let d = s.sup_distance.ok_or("no sup distance")?;
    Ok((d <= C4_SUP, format!("sup |DLS - e^-x| = {d:.4} over {} spacings (tol {C4_SUP})", s.n)))
}

fn c5(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c05_dls_macroscopic", out)?;
    let s = rec.summary("dls_macroscopic").ok_or("no dls_macroscopic summary")?;
    let d = s.sup_distance.ok_or("no sup distance")?;
    let refine = num(&s.details, "limit_refinement_error")?;
    Ok((d <= C5_SUP, format!("sup |DLS' - g| = {d:.4} over {} spacings, limit refinement {refine:.1e} (tol {C5_SUP})", s.n)))
}

fn c6(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c06_dcs", out)?;
    let s = rec.summary("dcs").ok_or("no dcs summary")?;
    let d = s.sup_distance.ok_or("no sup distance")?;
    let ball = num(&s.details, "sup_distance_ball")?;
    Ok((d <= C6_SUP, format!("sup |DCS - e^-s| = {d:.4} (tol {C6_SUP}); against e^-2s: {ball:.4}; {} distances", s.n)))
}

fn c7(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c07_poisson", out)?;
    let s = rec.summary("poisson").ok_or("no poisson summary")?;
    let p = s.p_value.ok_or("no p-value")?;

    // evenly spaced levels with a random phase: one level per unfolded unit
    let cube = LatticeCube::new(1, 1000, Boundary::Periodic).map_err(|e| e.to_string())?;
    let mut records = Vec::new();
    for r in 0..500u64 {
        let phase = ((r * 7919) % 1000) as f64 / 1000.0;
        let levels: Vec<f64> = (0..1000).map(|k| (k as f64 + phase) / 1000.0).collect();
        let spec = SpectralData::new(cube.clone(), 0, levels, None).map_err(|e| e.to_string())?;
        let counts = [(0.5, 1.5), (2.5, 3.5), (4.5, 5.5)]
            .iter()
            .map(|&(a, b)| Interval::new(a / 1000.0, b / 1000.0).map(|i| spec.count_in(i)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        records.push(CountRecord { realization: r, counts });
    }
    let control = poisson_count_test(&records, &[1.0, 1.0, 1.0]).map_err(|e| e.to_string())?.min_p_value();
    let pass = p > C7_ALPHA && control < C7_CONTROL;
    Ok((pass, format!("min per-interval p = {p:.3} (> {C7_ALPHA}); evenly spaced control p = {control:.1e} (< {C7_CONTROL:.0e})")))
}

fn c8(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c08_independence", out)?;
    let d = details(&rec, "independence")?;
    let r = num(d, "pearson_r")?;
    let sep = num(d, "unfolded_separation")?;
    Ok((r.abs() <= C8_R && sep >= 50.0, format!("pearson r = {r:.4} (|r| <= {C8_R}), separation {sep:.1} levels")))
}

fn c9(out: &Path) -> Result<(bool, String), String> {
    let narrow = run_config("c09_two_scale_lp25", out)?;
    let wide = run_config("c09_two_scale_lp50", out)?;
    let (a, b) = (details(&narrow, "two_scale")?, details(&wide, "two_scale")?);
    let (f, m25, m50) = (num(a, "matched_fraction")?, num(a, "median_dE")?, num(b, "median_dE")?);
    let (q25, q50) = (num(a, "q90_dE")?, num(b, "q90_dE")?);
    let pass = f >= C9_FRACTION && num(b, "matched_fraction")? >= C9_FRACTION && m25 <= C9_MEDIAN && m50 < m25;
    Ok((
        pass,
        format!(
            "matched {f:.3} / {:.3}; median |dE| {m25:.2e} -> {m50:.2e}; 90% quantile {q25:.2e} -> {q50:.2e} (l' 25 -> 50)",
            num(b, "matched_fraction")?
        ),
    ))
}

fn c10(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c10_bernoulli", out)?;
    let d = details(&rec, "bernoulli")?;
    let (p, e) = (num(d, "p_hat")?, num(d, "expected")?);
    let ci = d["interval"].as_array().ok_or("no interval")?;
    let (lo, hi) = (ci[0].as_f64().unwrap_or(f64::NAN), ci[1].as_f64().unwrap_or(f64::NAN));
    let pass = e >= lo - C10_ALLOWANCE * e && e <= hi + C10_ALLOWANCE * e;
    Ok((pass, format!("p_hat = {p:.4}, 95% CI [{lo:.4}, {hi:.4}], N(I) l = {e:.4} over {} cubes", num(d, "cubes")?)))
}

fn c11(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c11_ldp", out)?;
    let s = rec.summary("large_deviation").ok_or("no large_deviation summary")?;
    let f = s.violation_fraction.ok_or("no violation fraction")?;
    Ok((f <= C11_FRACTION, format!("violation fraction {f:.3} at delta 0.3 over {} realizations (<= {C11_FRACTION})", s.n)))
}

fn c12(out: &Path) -> Result<(bool, String), String> {
    let rec = run_config("c12_wegner_minami", out)?;
    let rows = details(&rec, "wegner_minami")?["rows"].as_array().ok_or("no rows")?.clone();
    let col = |k: &str| rows.iter().map(|r| r[k].as_f64().unwrap_or(f64::NAN)).collect::<Vec<_>>();
    let (w, m, nu) = (col("wegner"), col("minami"), col("ids_density"));
    let spread = |v: &[f64]| v.iter().cloned().fold(f64::MIN, f64::max) / v.iter().cloned().fold(f64::MAX, f64::min);
    let track = w.iter().zip(&nu).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max);
    let pass = spread(&w) < C12_WEGNER_SPREAD && track <= C12_WEGNER_TRACK && spread(&m) < C12_MINAMI_SPREAD;
    Ok((
        pass,
        format!(
            "wegner spread {:.3}, worst deviation from IDS density {:.1}%, minami spread {:.3}",
            spread(&w),
            100.0 * track,
            spread(&m)
        ),
    ))
}

fn csv_bodies(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(name, std::fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

fn c13(out: &Path) -> Result<(bool, String), String> {
    let mut cfg = ExperimentConfig::load(&configs().join("c13_determinism.toml")).map_err(|e| e.to_string())?;
    let mut bodies = Vec::new();
    for workers in [1, 4] {
        cfg.ensemble.workers = workers;
        let root = out.join(format!("workers{workers}"));
        let rec = run(&cfg, &root).map_err(|e| e.to_string())?;
        bodies.push(csv_bodies(&rec.output_dir)?);
    }
    let same = bodies[0] == bodies[1];
    Ok((same && !bodies[0].is_empty(), format!("{} CSV files compared for 1 and 4 workers", bodies[0].len())))
}

fn main() -> ExitCode {
    let checks: [(u32, &str, Check); 13] = [
        (1, "exact spectra", c1),
        (2, "solver invariants", c2),
        (3, "IDS sanity", c3),
        (4, "level spacings", c4),
        (5, "macroscopic spacings", c5),
        (6, "center spacings", c6),
        (7, "Poisson counts", c7),
        (8, "independence", c8),
        (9, "two-scale matching", c9),
        (10, "Bernoulli probability", c10),
        (11, "large deviations", c11),
        (12, "Wegner/Minami", c12),
        (13, "determinism", c13),
    ];
    let only: Vec<u32> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect())
        .unwrap_or_default();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let mut outcomes = Vec::new();
    for (id, title, check) in checks {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = check(tmp.path()).unwrap_or_else(|e| (false, format!("error: {e}")));
        let status = match (pass, KNOWN_RED.contains(&id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known, see docs/CALIBRATION.md)",
            (false, false) => "FAIL",
        };
        let line = format!("criterion {id:>2} {title}: {status}: {detail} [{:.1} s]", start.elapsed().as_secs_f64());
        println!("{line}");
        outcomes.push(Outcome { id, pass, line });
    }
    let unexpected: Vec<&Outcome> = outcomes.iter().filter(|o| !o.pass && !KNOWN_RED.contains(&o.id)).collect();
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for o in unexpected {
            eprintln!("unexpected failure: {}", o.line);
        }
        ExitCode::FAILURE
    }
}
