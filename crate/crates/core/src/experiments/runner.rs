//! Config-driven pipeline: model, IDS, ensemble, statistics, files.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::eigensolve::Interval;
use crate::error::{Error, Result};
use crate::ids::IdsModel;
use crate::localization::write_centers_csv;
use crate::statistics::hypothesis::check_disjoint;
use crate::statistics::{
    independence_test, large_deviation_check, limit_g, linear_grid, minami_estimator, poisson_count_test,
    sup_distance, wegner_estimator, SpacingOptions, StepFunction,
};
use crate::two_scale::{bernoulli_stats, median, Decomposition};

use super::config::{ExperimentConfig, Statistic, TwoScaleConfig};
use super::ensemble::{
    bernoulli_ensemble, center_ensemble, count_ensemble, dcs_ensemble, ensemble_map, macroscopic_ensemble,
    model_ids, resolve_window, spacing_ensemble, two_scale_realization, unfolded_intervals, window_spectrum,
    Model,
};
use super::record::{write_json, ResultRecord, StatisticSummary};

/// Volume of the Euclidean unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    // ω_d = π^{d/2} / Γ(d/2 + 1), by the recursion ω_d = 2π/d ω_{d-2}
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

/// Scales of the decomposition described by a `[two_scale]` block.
pub fn decomposition(cfg: &TwoScaleConfig, dim: usize, side: usize) -> Result<Decomposition> {
    match (cfg.beta, cfg.beta_prime, cfg.ell, cfg.ell_prime) {
        (Some(b), Some(bp), _, _) => Decomposition::decompose(dim, side, b, bp),
        (_, _, Some(l), Some(lp)) => Decomposition::from_scales(dim, side, l, lp),
        _ => Err(Error::Config("[two_scale] needs exponents or explicit scales".into())),
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    model: Model,
    ids: IdsModel,
    window: Interval,
    e0: f64,
    dir: PathBuf,
    files: Vec<String>,
}

impl Context<'_> {
    fn workers(&self) -> usize {
        self.cfg.ensemble.workers
    }

    fn realizations(&self) -> usize {
        self.cfg.ensemble.realizations
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        self.files.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn json<T: serde::Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.files.push(name.to_string());
        write_json(&self.dir.join(name), value)
    }

    fn grid(&self) -> Vec<f64> {
        linear_grid(0.0, self.cfg.statistics.x_max, self.cfg.statistics.x_points)
    }

    /// Writes `(x, value, reference)` rows.
    fn curve(&mut self, name: &str, step: &StepFunction, reference: impl Fn(f64) -> f64) -> Result<()> {
        let xs = self.grid();
        let mut out = csv::Writer::from_writer(self.create(name)?);
        out.write_record(["x", "value", "reference"])?;
        for x in xs {
            out.write_record([format!("{x:e}"), format!("{:e}", step.evaluate(x)), format!("{:e}", reference(x))])?;
        }
        out.flush()?;
        Ok(())
    }

    fn opts(&self) -> SpacingOptions {
        SpacingOptions { drop_last: self.cfg.statistics.drop_last }
    }

    fn decomposition(&self) -> Result<Decomposition> {
        let t = self.cfg.two_scale.as_ref().ok_or_else(|| Error::Config("missing [two_scale]".into()))?;
        decomposition(t, self.model.cube().dim(), self.model.cube().side())
    }
}

/// Runs every statistic listed in `cfg` and writes its files under
/// `root/<output or name>`.
pub fn run(cfg: &ExperimentConfig, root: &Path) -> Result<ResultRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let dir = root.join(cfg.output.clone().unwrap_or_else(|| PathBuf::from(&cfg.name)));
    fs::create_dir_all(&dir)?;

    let model = Model::from_config(cfg)?;
    let ids = model_ids(&model, cfg.ids.side, cfg.ids.realizations, cfg.ids.method, cfg.ids.grid_points, cfg.ensemble.workers)?;
    let window = resolve_window(&ids, model.volume(), &cfg.window)?;
    let mut ctx = Context { cfg, model, ids, window, e0: cfg.window.e0(), dir: dir.clone(), files: Vec::new() };
    // geometry errors should surface before any ensemble work
    if cfg.two_scale.is_some() {
        ctx.decomposition()?;
    }

    let mut todo = cfg.statistics.compute.clone();
    todo.sort();
    todo.dedup();
    let mut summaries = Vec::new();
    for s in todo {
        summaries.push(match s {
            Statistic::Spectrum => spectrum(&mut ctx)?,
            Statistic::Ids => ids_summary(&mut ctx)?,
            Statistic::Dls => dls_summary(&mut ctx)?,
            Statistic::DlsMacroscopic => macroscopic_summary(&mut ctx)?,
            Statistic::Centers => centers_summary(&mut ctx)?,
            Statistic::Dcs => dcs_summary(&mut ctx)?,
            Statistic::Poisson => poisson_summary(&mut ctx)?,
            Statistic::Independence => independence_summary(&mut ctx)?,
            Statistic::LargeDeviation => ldp_summary(&mut ctx)?,
            Statistic::WegnerMinami => wegner_minami_summary(&mut ctx)?,
            Statistic::TwoScale => two_scale_summary(&mut ctx)?,
            Statistic::Bernoulli => bernoulli_summary(&mut ctx)?,
        });
    }
    ctx.json("summary.json", &summaries)?;
    let mut record = ResultRecord {
        name: cfg.name.clone(),
        config_digest: cfg.digest()?,
        version: env!("CARGO_PKG_VERSION").to_string(),
        output_dir: dir.clone(),
        summaries,
        files: ctx.files.clone(),
        wall_clock_seconds: 0.0,
    };
    record.files.push("result.json".into());
    record.wall_clock_seconds = start.elapsed().as_secs_f64();
    write_json(&dir.join("result.json"), &record)?;
    Ok(record)
}

fn spectrum(ctx: &mut Context) -> Result<StatisticSummary> {
    let spec = window_spectrum(&ctx.model.hamiltonian(0)?, ctx.window, false, false)?;
    spec.write_eigenvalues_csv(ctx.create("spectrum.csv")?)?;
    let mut s = StatisticSummary::new("spectrum", spec.len());
    s.window = Some(ctx.window);
    Ok(s)
}

fn ids_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let w = ctx.create("ids.csv")?;
    ctx.ids.write_csv(w)?;
    ctx.files.push("ids.json".into());
    ctx.ids.write_metadata_json(File::create(ctx.dir.join("ids.json"))?)?;
    let meta = ctx.ids.metadata();
    let mut s = StatisticSummary::new("ids", meta.pooled_sites);
    s.details = json!({ "knots": ctx.ids.knots().len(), "weak": meta.weak, "n_at_e0": ctx.ids.evaluate(ctx.e0) });
    Ok(s)
}

fn dls_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let parts = spacing_ensemble(&ctx.model, &ctx.ids, ctx.window, ctx.realizations(), ctx.workers(), ctx.opts())?;
    let pooled = StepFunction::pool(parts)?;
    let x_max = ctx.cfg.statistics.x_max;
    ctx.curve("dls.csv", &pooled, |x| (-x).exp())?;
    let mut s = StatisticSummary::new("dls", pooled.len());
    s.window = Some(ctx.window);
    s.scale = Some(ctx.model.volume() as f64);
    s.sup_distance = Some(sup_distance(&pooled, |x| (-x).exp(), 0.0, x_max));
    s.details = json!({ "denominator": pooled.denominator(), "ids_mass": ctx.ids.mass(ctx.window) });
    Ok(s)
}

fn macroscopic_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let j = ctx.ids.mass_window(ctx.e0, 0.5 * ctx.cfg.statistics.macro_mass);
    let parts = macroscopic_ensemble(&ctx.model, &ctx.ids, j, ctx.realizations(), ctx.workers(), ctx.opts())?;
    let pooled = StepFunction::pool(parts)?;
    let fine = linear_grid(0.0, ctx.cfg.statistics.x_max, 4 * ctx.cfg.statistics.x_points);
    let table = limit_g(&ctx.ids, j, &fine, ctx.ids.default_bandwidth())?;
    ctx.curve("dls_macroscopic.csv", &pooled, |x| table.evaluate(x))?;
    let mut s = StatisticSummary::new("dls_macroscopic", pooled.len());
    s.window = Some(j);
    s.scale = Some(ctx.ids.mass(j) / j.length() * ctx.model.volume() as f64);
    s.sup_distance = Some(sup_distance(&pooled, |x| table.evaluate(x), 0.0, ctx.cfg.statistics.x_max));
    s.details = json!({
        "ids_mass": ctx.ids.mass(j),
        "limit_refinement_error": table.refinement_error,
        "sup_distance_exponential": sup_distance(&pooled, |x| (-x).exp(), 0.0, ctx.cfg.statistics.x_max),
    });
    Ok(s)
}

fn centers_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let xi = ctx.cfg.statistics.decay_xi;
    let runs = center_ensemble(&ctx.model, ctx.window, 1, ctx.workers(), xi)?;
    let (_, recs) = &runs[0];
    write_centers_csv(recs, ctx.model.cube().dim(), ctx.create("centers.csv")?)?;
    let gammas: Vec<f64> = recs.iter().filter_map(|r| r.decay.map(|f| f.gamma)).collect();
    let mut s = StatisticSummary::new("centers", recs.len());
    s.window = Some(ctx.window);
    let mut sorted = gammas.clone();
    sorted.sort_by(f64::total_cmp);
    s.details = json!({
        "fitted": gammas.len(),
        "median_gamma": if sorted.is_empty() { None } else { Some(median(&sorted)) },
        "tied_centers": recs.iter().filter(|r| r.center_set.len() > 1).count(),
    });
    Ok(s)
}

fn dcs_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let mass = ctx.ids.mass(ctx.window);
    let parts = dcs_ensemble(&ctx.model, mass, ctx.window, ctx.realizations(), ctx.workers())?;
    let pooled = StepFunction::pool(parts)?;
    let d = ctx.model.cube().dim() as i32;
    let omega = unit_ball_volume(d as usize);
    ctx.curve("dcs.csv", &pooled, |s| (-s.powi(d)).exp())?;
    let x_max = ctx.cfg.statistics.x_max;
    let mut s = StatisticSummary::new("dcs", pooled.len());
    s.window = Some(ctx.window);
    s.scale = Some(mass.powf(1.0 / d as f64));
    s.sup_distance = Some(sup_distance(&pooled, |x| (-x.powi(d)).exp(), 0.0, x_max));
    s.details = json!({
        "ids_mass": mass,
        "unit_ball_volume": omega,
        "sup_distance_ball": sup_distance(&pooled, |x| (-omega * x.powi(d)).exp(), 0.0, x_max),
    });
    Ok(s)
}

fn poisson_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let spans = ctx.cfg.statistics.poisson_intervals.clone();
    let intervals = unfolded_intervals(&ctx.ids, ctx.e0, ctx.model.volume(), &spans)?;
    check_disjoint(&intervals)?;
    let records = count_ensemble(&ctx.model, &intervals, ctx.realizations(), ctx.workers())?;
    let lengths: Vec<f64> = spans.iter().map(|[a, b]| b - a).collect();
    let report = poisson_count_test(&records, &lengths)?;
    {
        let mut out = csv::Writer::from_writer(ctx.create("poisson_counts.csv")?);
        let mut header = vec!["realization".to_string()];
        header.extend((0..spans.len()).map(|i| format!("count{i}")));
        out.write_record(&header)?;
        for r in &records {
            let mut row = vec![r.realization.to_string()];
            row.extend(r.counts.iter().map(|c| c.to_string()));
            out.write_record(&row)?;
        }
        out.flush()?;
    }
    let mut s = StatisticSummary::new("poisson", records.len());
    s.window = Some(Interval::new(intervals[0].lo, intervals.iter().map(|i| i.hi).fold(f64::MIN, f64::max))?);
    s.scale = Some(ctx.model.volume() as f64);
    s.p_value = Some(report.min_p_value());
    s.details = serde_json::to_value(&report)?;
    Ok(s)
}

fn independence_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let st = &ctx.cfg.statistics;
    let v = ctx.model.volume();
    let e1 = ctx.ids.inverse(ctx.ids.evaluate(ctx.e0) + st.independence_offset / v as f64);
    let w = st.independence_width;
    let mut intervals = unfolded_intervals(&ctx.ids, ctx.e0, v, &[[0.0, w]])?;
    intervals.extend(unfolded_intervals(&ctx.ids, e1, v, &[[0.0, w]])?);
    check_disjoint(&intervals)?;
    let records = count_ensemble(&ctx.model, &intervals, ctx.realizations(), ctx.workers())?;
    let a: Vec<u64> = records.iter().map(|r| r.counts[0] as u64).collect();
    let b: Vec<u64> = records.iter().map(|r| r.counts[1] as u64).collect();
    let report = independence_test(&a, &b)?;
    let mut s = StatisticSummary::new("independence", records.len());
    s.scale = Some(v as f64);
    s.p_value = Some(report.chi_square.p_value);
    s.details = json!({
        "pearson_r": report.pearson_r,
        "e0": ctx.e0,
        "e0_prime": e1,
        "unfolded_separation": (ctx.ids.evaluate(e1) - ctx.ids.evaluate(ctx.e0)) * v as f64,
        "chi_square": report.chi_square,
    });
    Ok(s)
}

fn ldp_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let records = count_ensemble(&ctx.model, &[ctx.window], ctx.realizations(), ctx.workers())?;
    let counts: Vec<usize> = records.iter().map(|r| r.counts[0]).collect();
    let mass = ctx.ids.mass(ctx.window);
    let report = large_deviation_check(&counts, mass, ctx.model.volume(), ctx.cfg.statistics.ldp_delta)?;
    {
        let mut out = csv::Writer::from_writer(ctx.create("ldp_counts.csv")?);
        out.write_record(["realization", "count"])?;
        for r in &records {
            out.write_record([r.realization.to_string(), r.counts[0].to_string()])?;
        }
        out.flush()?;
    }
    let mut s = StatisticSummary::new("large_deviation", counts.len());
    s.window = Some(ctx.window);
    s.violation_fraction = Some(report.fraction);
    s.details = serde_json::to_value(&report)?;
    Ok(s)
}

fn wegner_minami_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let widths = ctx.cfg.statistics.wegner_widths.clone();
    let rho = ctx.cfg.statistics.minami_rho;
    let intervals: Vec<Interval> =
        widths.iter().map(|&w| Interval::new(ctx.e0 - 0.5 * w, ctx.e0 + 0.5 * w)).collect::<Result<_>>()?;
    let records = count_ensemble(&ctx.model, &intervals, ctx.realizations(), ctx.workers())?;
    let v = ctx.model.volume();
    let mut rows = Vec::new();
    for (i, (&w, j)) in widths.iter().zip(&intervals).enumerate() {
        let counts: Vec<usize> = records.iter().map(|r| r.counts[i]).collect();
        rows.push(json!({
            "width": w,
            "wegner": wegner_estimator(&counts, w, v)?,
            "minami": minami_estimator(&counts, w, v, rho)?,
            "ids_density": ctx.ids.mass(*j) / w,
        }));
    }
    {
        let mut out = csv::Writer::from_writer(ctx.create("wegner_minami.csv")?);
        out.write_record(["width", "wegner", "minami", "ids_density"])?;
        for r in &rows {
            out.write_record(["width", "wegner", "minami", "ids_density"].map(|k| format!("{:e}", r[k].as_f64().unwrap_or(f64::NAN))))?;
        }
        out.flush()?;
    }
    let mut s = StatisticSummary::new("wegner_minami", records.len());
    s.scale = Some(v as f64);
    s.details = json!({ "rho": rho, "rows": rows });
    Ok(s)
}

fn two_scale_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let decomp = ctx.decomposition()?;
    let t = ctx.cfg.two_scale.clone().unwrap();
    let (model, window) = (&ctx.model, ctx.window);
    let reports = ensemble_map(ctx.realizations(), ctx.workers(), |r| {
        two_scale_realization(model, &decomp, window, t.tol, t.boundary, r).map(|x| x.0)
    })?;
    {
        let mut out = csv::Writer::from_writer(ctx.create("two_scale_pairs.csv")?);
        out.write_record(["realization", "big_index", "energy", "cube", "cube_energy", "delta"])?;
        for (r, rep) in reports.iter().enumerate() {
            for p in &rep.pairs {
                out.write_record([
                    r.to_string(),
                    p.big_index.to_string(),
                    format!("{:e}", p.energy),
                    p.cube.to_string(),
                    format!("{:e}", p.cube_energy),
                    format!("{:e}", p.delta),
                ])?;
            }
        }
        out.flush()?;
    }
    let eligible: usize = reports.iter().map(|r| r.eligible()).sum();
    let matched: usize = reports.iter().map(|r| r.pairs.len()).sum();
    let mut deltas: Vec<f64> = reports.iter().flat_map(|r| r.deltas()).collect();
    deltas.sort_by(f64::total_cmp);
    let per_realization: Vec<_> = reports.iter().map(|r| r.summary()).collect();
    ctx.json("two_scale.json", &per_realization)?;
    let mut s = StatisticSummary::new("two_scale", eligible);
    s.window = Some(window);
    s.details = json!({
        "L": decomp.parent_side,
        "ell": decomp.side,
        "ell_prime": decomp.buffer,
        "cubes_per_realization": decomp.cube_count(),
        "matched_fraction": if eligible > 0 { matched as f64 / eligible as f64 } else { f64::NAN },
        "median_dE": median(&deltas),
        "q90_dE": deltas.get((deltas.len() * 9) / 10).copied().unwrap_or(f64::NAN),
        "max_dE": deltas.last().copied().unwrap_or(f64::NAN),
        "n_multi_cubes": reports.iter().map(|r| r.multi_cubes.len()).sum::<usize>(),
        "n_unmatched": reports.iter().map(|r| r.unmatched.len()).sum::<usize>(),
        "n_outside": reports.iter().map(|r| r.outside).sum::<usize>(),
        "n_borderline": reports.iter().map(|r| r.borderline).sum::<usize>(),
        "tol": t.tol,
        "asymptotic_bound": (-(decomp.buffer as f64)).exp(),
    });
    Ok(s)
}

fn bernoulli_summary(ctx: &mut Context) -> Result<StatisticSummary> {
    let decomp = ctx.decomposition()?;
    let t = ctx.cfg.two_scale.clone().unwrap();
    let cubes = bernoulli_ensemble(&ctx.model, &decomp, ctx.window, t.boundary, ctx.realizations(), ctx.workers())?;
    let mass = ctx.ids.mass(ctx.window);
    let report = bernoulli_stats(&cubes, mass, decomp.side, decomp.dim)?;
    let mut s = StatisticSummary::new("bernoulli", report.cubes);
    s.window = Some(ctx.window);
    s.details = serde_json::to_value(&report)?;
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1), 2.0);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }
}
