//! Shape optimization, pose recovery, and the renderer grid search.

mod grid;
mod pose;
mod records;
mod shape;

pub use grid::{
    best_per_cell, grid_search, heatmap_csv, top_decile_histogram, CellSummary, GridSpec,
    GridTask, Histogram,
};
pub use pose::{
    geodesic_degrees, run_pose_optimization, sample_trial, PoseOutcome, PoseTaskConfig, PoseTrial,
};
pub use records::{
    fingerprint, read_records, records_to_string, write_records, RunRecord, CSV_HEADER,
};
pub use shape::{run_shape_optimization, ShapeOutcome, ShapeTaskConfig};

use crate::distributions::{DistributionSpec, Family};
use crate::tconorms::{TConormFamily, TConormSpec};

/// Distribution variants of the benchmark, without and then with squares
/// for each base in turn: every differentiable family, the reversed
/// one-sided families, Gamma at `p ∈ {0.5, 1, 2}`, and Levy shifted by 1.
pub fn benchmark_distributions() -> Vec<DistributionSpec> {
    use Family::*;
    let mut bases = Vec::new();
    for f in [
        Uniform,
        CubicHermite,
        WignerSemicircle,
        Gaussian,
        Laplace,
        Logistic,
        HyperbolicSecant,
        Cauchy,
        Reciprocal,
        GumbelMax,
        GumbelMin,
    ] {
        bases.push(DistributionSpec::of(f));
    }
    for rev in [false, true] {
        bases.push(DistributionSpec::of(Exponential).with_reversed(rev));
    }
    for rev in [false, true] {
        for p in [0.5, 1.0, 2.0] {
            bases.push(
                DistributionSpec::gamma(p)
                    .expect("valid shape")
                    .with_reversed(rev),
            );
        }
    }
    for shift in [0.0, 1.0] {
        for rev in [false, true] {
            bases.push(
                DistributionSpec::of(Levy)
                    .with_reversed(rev)
                    .with_shift(shift),
            );
        }
    }
    bases
        .into_iter()
        .flat_map(|d| [d, d.with_squares(true)])
        .collect()
}

/// T-conorm columns of the benchmark. Parameters that coincide with
/// another column (Hamacher 1 and Aczél-Alsina 1 are probabilistic,
/// Hamacher 2 is Einstein) are listed once.
pub fn benchmark_tconorms() -> Vec<TConormSpec> {
    use TConormFamily::*;
    let mut out = vec![
        TConormSpec::simple(Max),
        TConormSpec::simple(Average),
        TConormSpec::simple(Probabilistic),
        TConormSpec::simple(Einstein),
    ];
    let grids: [(TConormFamily, &[f64]); 6] = [
        (Hamacher, &[0.5, 4.0]),
        (Frank, &[0.5, 2.0, 4.0]),
        (Yager, &[0.5, 1.0, 2.0, 4.0]),
        (AczelAlsina, &[0.5, 2.0, 4.0]),
        (Dombi, &[0.5, 1.0, 2.0, 4.0]),
        (SchweizerSklar, &[-0.5, -1.0, -2.0, -4.0]),
    ];
    for (family, ps) in grids {
        for &p in ps {
            out.push(TConormSpec::with_parameter(family, p).expect("valid parameter"));
        }
    }
    out
}

/// Size of the benchmark space and its factors.
#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub renderers: Vec<(DistributionSpec, TConormSpec)>,
    pub distributions: usize,
    pub squares_variants: usize,
    pub tconorms: usize,
}

impl Enumeration {
    pub fn count(&self) -> usize {
        self.renderers.len()
    }

    /// One-line breakdown, e.g. `46 distributions (23 bases x 2) x 24 ...`.
    pub fn breakdown(&self) -> String {
        format!(
            "{} distributions ({} bases x plain/squares) x {} t-conorm columns = {} renderers",
            self.distributions,
            self.distributions - self.squares_variants,
            self.tconorms,
            self.count()
        )
    }
}

/// Every (distribution, T-conorm) pair of the benchmark, distribution-major.
pub fn enumerate_renderers() -> Enumeration {
    let dists = benchmark_distributions();
    let tcs = benchmark_tconorms();
    let renderers = dists
        .iter()
        .flat_map(|d| tcs.iter().map(move |t| (*d, *t)))
        .collect();
    Enumeration {
        renderers,
        distributions: dists.len(),
        squares_variants: dists.iter().filter(|d| d.squares()).count(),
        tconorms: tcs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn enumeration_is_unique_and_round_trips() {
        let e = enumerate_renderers();
        assert_eq!(e.count(), e.distributions * e.tconorms);
        let mut seen = HashSet::new();
        for (d, t) in &e.renderers {
            let key = (d.to_string(), t.to_string());
            assert!(seen.insert(key.clone()), "duplicate {key:?}");
            assert_eq!(key.0.parse::<DistributionSpec>().unwrap(), *d);
            assert_eq!(key.1.parse::<TConormSpec>().unwrap(), *t);
            assert!(d.is_differentiable());
        }
    }
}
