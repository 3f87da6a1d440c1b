use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;

use super::pose::{run_pose_optimization, PoseTaskConfig};
use super::records::RunRecord;
use super::shape::{run_shape_optimization, ShapeTaskConfig};
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::raster::RenderConfig;
use crate::tconorms::TConormSpec;

/// Which experiment a grid search runs.
#[derive(Debug, Clone, PartialEq)]
pub enum GridTask {
    /// Metric is the final loss; lower is better. Uses the task's lr and τ
    /// grids.
    Shape(ShapeTaskConfig),
    /// Metric is the success fraction; higher is better. Uses the task's
    /// lr grid; τ follows the σ schedule.
    Pose(PoseTaskConfig),
}

impl GridTask {
    pub fn higher_is_better(&self) -> bool {
        matches!(self, GridTask::Pose(_))
    }
}

/// Renderer axes of a grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub distributions: Vec<DistributionSpec>,
    pub tconorms: Vec<TConormSpec>,
}

/// Best run of one (distribution, T-conorm) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub distribution: String,
    pub tconorm: String,
    /// `NaN` when every run of the cell failed.
    pub best_metric: f64,
    pub best_tau: String,
    pub best_lr: f64,
    /// The best τ is the smallest or largest of the cell's grid.
    pub extreme_tau: bool,
    /// The best learning rate is the smallest or largest of the grid.
    pub extreme_lr: bool,
    pub runs: usize,
    pub failed_runs: usize,
}

struct Job {
    dist: DistributionSpec,
    tc: TConormSpec,
    tau: f64,
    lr: f64,
}

/// Runs every (distribution × T-conorm × lr × τ) combination on `jobs`
/// worker threads.
///
/// Output is sorted by distribution text, T-conorm text, τ, then lr, so it
/// does not depend on `jobs` or completion order. A run that fails
/// numerically is kept with metric `NaN`; configuration errors abort.
pub fn grid_search(
    task: &GridTask,
    grid: &GridSpec,
    jobs: usize,
) -> Result<(Vec<RunRecord>, Vec<CellSummary>)> {
    if grid.distributions.is_empty() || grid.tconorms.is_empty() {
        return Err(Error::config("grid needs at least one distribution and one t-conorm"));
    }
    let (lrs, taus): (&[f64], Vec<f64>) = match task {
        GridTask::Shape(c) => {
            c.validate()?;
            (&c.lr_grid, c.tau_grid.clone())
        }
        GridTask::Pose(c) => {
            c.validate()?;
            (&c.lr_grid, vec![c.sigma_start])
        }
    };
    let mut dists = grid.distributions.clone();
    dists.sort_by_key(|d| d.to_string());
    dists.dedup();
    let mut tcs = grid.tconorms.clone();
    tcs.sort_by_key(|t| t.to_string());
    tcs.dedup();
    let mut taus = taus;
    taus.sort_by(f64::total_cmp);
    let mut lrs = lrs.to_vec();
    lrs.sort_by(f64::total_cmp);

    let mut work = Vec::new();
    for d in &dists {
        for t in &tcs {
            for &tau in &taus {
                for &lr in &lrs {
                    work.push(Job {
                        dist: *d,
                        tc: *t,
                        tau,
                        lr,
                    });
                }
            }
        }
    }
    let run = |job: &Job| -> Result<RunRecord> {
        let rc = RenderConfig {
            distribution: job.dist,
            tconorm: job.tc,
            tau: job.tau,
            ..RenderConfig::default()
        };
        match task {
            GridTask::Shape(c) => Ok(run_shape_optimization(c, &rc, job.lr)?.record),
            GridTask::Pose(c) => Ok(run_pose_optimization(c, &rc, job.lr)?.record),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        work.par_iter()
            .map(run)
            .collect::<Result<Vec<RunRecord>>>()
    })?;
    let cells = best_per_cell(&records, task.higher_is_better());
    Ok((records, cells))
}

fn better(a: f64, b: f64, higher: bool) -> bool {
    match (a.is_nan(), b.is_nan()) {
        (true, _) => false,
        (false, true) => true,
        _ => {
            if higher {
                a > b
            } else {
                a < b
            }
        }
    }
}

/// Best run per cell. Ties keep the earlier record, so the input order
/// (canonical in [`grid_search`]) decides.
pub fn best_per_cell(records: &[RunRecord], higher_is_better: bool) -> Vec<CellSummary> {
    let mut groups: BTreeMap<(String, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.cell()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((distribution, tconorm), runs)| {
            let mut best = runs[0];
            for r in &runs[1..] {
                if better(r.metric, best.metric, higher_is_better) {
                    best = r;
                }
            }
            let tau_of = |r: &RunRecord| r.tau.parse::<f64>().ok();
            let taus: Vec<f64> = runs.iter().filter_map(|r| tau_of(r)).collect();
            let lrs: Vec<f64> = runs.iter().map(|r| r.lr).collect();
            let is_extreme = |vals: &[f64], v: f64| {
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                lo < hi && (v == lo || v == hi)
            };
            let failed = runs.iter().filter(|r| r.failed()).count();
            CellSummary {
                distribution,
                tconorm,
                best_metric: best.metric,
                best_tau: best.tau.clone(),
                best_lr: best.lr,
                extreme_tau: !best.failed()
                    && tau_of(best).is_some_and(|t| is_extreme(&taus, t)),
                extreme_lr: !best.failed() && is_extreme(&lrs, best.lr),
                runs: runs.len(),
                failed_runs: failed,
            }
        })
        .collect()
}

/// Heatmap of best metrics: one row per T-conorm, one column per
/// distribution, empty where a cell is missing.
pub fn heatmap_csv(cells: &[CellSummary]) -> Result<String> {
    let mut dists: Vec<&str> = Vec::new();
    let mut tcs: Vec<&str> = Vec::new();
    for c in cells {
        if !dists.contains(&c.distribution.as_str()) {
            dists.push(&c.distribution);
        }
        if !tcs.contains(&c.tconorm.as_str()) {
            tcs.push(&c.tconorm);
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["tconorm".to_string()];
    header.extend(dists.iter().map(|d| d.to_string()));
    w.write_record(&header)?;
    for t in &tcs {
        let mut row = vec![t.to_string()];
        for d in &dists {
            let v = cells
                .iter()
                .find(|c| c.distribution == *d && c.tconorm == *t)
                .map(|c| c.best_metric.to_string())
                .unwrap_or_default();
            row.push(v);
        }
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// How often each axis value appears among the best 10% of cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Histogram {
    /// Sorted by spec text; values with zero count are included.
    pub by_distribution: Vec<(String, usize)>,
    pub by_tconorm: Vec<(String, usize)>,
    /// Number of cells counted, `ceil(n / 10)`.
    pub top: usize,
}

/// Counts axis values among the top decile of `cells`. Equal metrics are
/// ordered by distribution text, then T-conorm text; failed cells rank
/// last.
pub fn top_decile_histogram(cells: &[CellSummary], higher_is_better: bool) -> Result<Histogram> {
    if cells.len() < 10 {
        return Err(Error::config(format!(
            "top-decile histogram needs at least 10 cells, got {}",
            cells.len()
        )));
    }
    let mut order: Vec<&CellSummary> = cells.iter().collect();
    order.sort_by(|a, b| {
        let by_metric = if better(a.best_metric, b.best_metric, higher_is_better) {
            Ordering::Less
        } else if better(b.best_metric, a.best_metric, higher_is_better) {
            Ordering::Greater
        } else {
            Ordering::Equal
        };
        by_metric
            .then_with(|| a.distribution.cmp(&b.distribution))
            .then_with(|| a.tconorm.cmp(&b.tconorm))
    });
    let top = cells.len().div_ceil(10);
    let mut dist: BTreeMap<String, usize> = BTreeMap::new();
    let mut tc: BTreeMap<String, usize> = BTreeMap::new();
    for c in cells {
        dist.entry(c.distribution.clone()).or_default();
        tc.entry(c.tconorm.clone()).or_default();
    }
    for c in &order[..top] {
        *dist.get_mut(&c.distribution).expect("present") += 1;
        *tc.get_mut(&c.tconorm).expect("present") += 1;
    }
    Ok(Histogram {
        by_distribution: dist.into_iter().collect(),
        by_tconorm: tc.into_iter().collect(),
        top,
    })
}
