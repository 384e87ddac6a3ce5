//! Null distribution of the two-versus-one-QTL statistic by parametric
//! bootstrap or stratified permutation, and p-value computation.

use log::warn;
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cross::{CovariateSet, Genotype};
use crate::error::{Error, Result};
use crate::genoprob::{GenoProb, GenomeInterval};
use crate::mvdissect::{order_traits, seeded_rng, Dissector, FittedGrid, SearchMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NullMethod {
    Bootstrap,
    Permutation,
}

impl std::str::FromStr for NullMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bootstrap" => Ok(NullMethod::Bootstrap),
            "permutation" => Ok(NullMethod::Permutation),
            other => Err(Error::invalid(format!(
                "unknown significance method `{other}`"
            ))),
        }
    }
}

/// Null statistics from repeated analyses of simulated or permuted data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NullReplicateSet {
    pub method: NullMethod,
    pub stats: Vec<f64>,
    pub n_reps: usize,
    pub seed: u64,
}

/// Replicate-specific seed, so parallel replicates are reproducible.
fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// RNG stream reserved for replicate noise, clear of the streams used by the
/// trait ordering and the coordinate-ascent starts.
const NOISE_STREAM: u64 = 0x5EED_0001;

/// Full analysis of one replicate trait matrix: refit, re-sort traits by
/// their replicate univariate peaks, and run the two-versus-one test.
fn analyze_replicate(
    d: &Dissector,
    y: ArrayView2<f64>,
    mode: SearchMode,
    rep_seed: u64,
) -> Result<f64> {
    let fit = d.fit_traits(y)?;
    let order = order_traits(&fit.univariate_peak_cm(), rep_seed);
    let res = fit.test_2v1(&order, mode, rep_seed)?;
    Ok(res.lod_2v1)
}

/// Parametric bootstrap: simulate phenotypes from the estimated single-QTL
/// model (`Y* = X beta + E*`, rows of `E*` multivariate normal with the ML
/// residual covariance) and rerun the full analysis on each replicate.
pub fn parametric_bootstrap(
    d: &Dissector,
    observed: &FittedGrid,
    n_reps: usize,
    seed: u64,
    mode: SearchMode,
) -> Result<NullReplicateSet> {
    let model = observed.single_qtl_model()?;
    let mean = model.design.dot(&model.beta);
    let n = mean.nrows();
    let p = mean.ncols();
    let lt = model.sigma_chol.t().to_owned();

    let stats: Vec<f64> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed(seed, r as u64 + 1);
            let mut rng = seeded_rng(rep_seed, NOISE_STREAM);
            let z = Array2::from_shape_fn((n, p), |_| StandardNormal.sample(&mut rng));
            let y_star = &mean + &z.dot(&lt);
            analyze_replicate(d, y_star.view(), mode, rep_seed)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(NullReplicateSet {
        method: NullMethod::Bootstrap,
        stats,
        n_reps,
        seed,
    })
}

/// Row permutation that shuffles indices within each genotype stratum.
fn stratified_indices(strata: &[Vec<usize>], rng: &mut impl Rng) -> Vec<usize> {
    let n: usize = strata.iter().map(|s| s.len()).sum();
    let mut perm: Vec<usize> = (0..n).collect();
    for stratum in strata {
        let mut shuffled = stratum.clone();
        shuffled.shuffle(rng);
        for (slot, &src) in stratum.iter().zip(&shuffled) {
            perm[*slot] = src;
        }
    }
    perm
}

fn genotype_strata(d: &Dissector, lambda_idx: usize) -> Vec<Vec<usize>> {
    let imputed = d.imputed_at(lambda_idx);
    let mut strata = vec![Vec::new(), Vec::new(), Vec::new()];
    for (i, g) in imputed.iter().enumerate() {
        strata[g.index()].push(i);
    }
    for (k, s) in strata.iter().enumerate() {
        if s.len() < 2 {
            warn!(
                "genotype stratum {} has {} individuals and stays unpermuted",
                Genotype::from_index(k),
                s.len()
            );
        }
    }
    strata
}

fn permute_rows(y: ArrayView2<f64>, perm: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((y.nrows(), y.ncols()));
    for (i, &src) in perm.iter().enumerate() {
        out.row_mut(i).assign(&y.row(src));
    }
    out
}

/// Stratified permutation test: phenotype rows shuffle uniformly within each
/// imputed-genotype stratum at the estimated QTL; genotypes and covariates
/// stay attached to individuals.
pub fn stratified_permutation(
    d: &Dissector,
    y: ArrayView2<f64>,
    lambda_idx: usize,
    n_reps: usize,
    seed: u64,
    mode: SearchMode,
) -> Result<NullReplicateSet> {
    let strata = genotype_strata(d, lambda_idx);
    let stats: Vec<f64> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed(seed, r as u64 + 1);
            let mut rng = seeded_rng(rep_seed, NOISE_STREAM);
            let perm = stratified_indices(&strata, &mut rng);
            let y_perm = permute_rows(y, &perm);
            analyze_replicate(d, y_perm.view(), mode, rep_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NullReplicateSet {
        method: NullMethod::Permutation,
        stats,
        n_reps,
        seed,
    })
}

/// Stratified permutation with covariate rows travelling alongside the
/// phenotype rows; the per-position designs are rebuilt for each replicate.
#[allow(clippy::too_many_arguments)]
pub fn stratified_permutation_with_covariates(
    gp: &GenoProb,
    covars: &CovariateSet,
    rows: &[usize],
    interval: &GenomeInterval,
    y: ArrayView2<f64>,
    lambda_idx: usize,
    n_reps: usize,
    seed: u64,
    mode: SearchMode,
) -> Result<NullReplicateSet> {
    let base = Dissector::new(gp, covars, rows, interval)?;
    let strata = genotype_strata(&base, lambda_idx);
    let covars_sub = covars.select_rows(rows);
    let stats: Vec<f64> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed(seed, r as u64 + 1);
            let mut rng = seeded_rng(rep_seed, NOISE_STREAM);
            let perm = stratified_indices(&strata, &mut rng);
            let y_perm = permute_rows(y, &perm);
            let mut cv = covars_sub.clone();
            cv.additive = permute_rows(cv.additive.view(), &perm);
            cv.interactive = permute_rows(cv.interactive.view(), &perm);
            // rebuild the designs with permuted covariates on the same rows
            let d = Dissector::new(
                gp,
                &expand_to_full(&cv, rows, gp.n_individuals()),
                rows,
                interval,
            )?;
            analyze_replicate(&d, y_perm.view(), mode, rep_seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NullReplicateSet {
        method: NullMethod::Permutation,
        stats,
        n_reps,
        seed,
    })
}

/// Scatter a row-subset covariate set back onto the full individual index
/// space so `Dissector::new` can re-select it.
fn expand_to_full(cv: &CovariateSet, rows: &[usize], n_full: usize) -> CovariateSet {
    let scatter = |m: &Array2<f64>| {
        let mut out = Array2::zeros((n_full, m.ncols()));
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(r).assign(&m.row(i));
        }
        out
    };
    CovariateSet {
        additive: scatter(&cv.additive),
        additive_names: cv.additive_names.clone(),
        interactive: scatter(&cv.interactive),
        interactive_names: cv.interactive_names.clone(),
    }
}

/// Proportion of null statistics greater than or equal to the observed one.
/// With `plus_one`, uses the `(r+1)/(N+1)` convention instead.
pub fn pvalue(observed: f64, nulls: &NullReplicateSet, plus_one: bool) -> Result<f64> {
    if nulls.stats.is_empty() {
        return Err(Error::invalid("cannot compute a p-value from zero null replicates"));
    }
    let count = nulls.stats.iter().filter(|&&s| s >= observed).count();
    let n = nulls.stats.len();
    Ok(if plus_one {
        (count + 1) as f64 / (n + 1) as f64
    } else {
        count as f64 / n as f64
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genoprob::{calc_genoprob, HmmConfig, MapFunction};
    use crate::simcross;
    use ndarray::Array2;

    fn nulls(stats: Vec<f64>) -> NullReplicateSet {
        NullReplicateSet {
            method: NullMethod::Bootstrap,
            n_reps: stats.len(),
            stats,
            seed: 0,
        }
    }

    #[test]
    fn pvalue_counting_conventions() {
        let ns = nulls(vec![1.0, 2.0, 3.0]);
        assert_eq!(pvalue(2.0, &ns, false).unwrap(), 2.0 / 3.0);
        assert_eq!(pvalue(10.0, &ns, false).unwrap(), 0.0);
        assert_eq!(pvalue(f64::NEG_INFINITY, &ns, false).unwrap(), 1.0);
        assert_eq!(pvalue(10.0, &ns, true).unwrap(), 0.25);
        assert!(pvalue(1.0, &nulls(vec![]), false).is_err());
    }

    #[test]
    fn pvalue_non_increasing_in_observed() {
        let ns = nulls(vec![0.5, 1.5, 2.5, 3.5, 2.5]);
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let p = pvalue(k as f64 * 0.5, &ns, false).unwrap();
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn stratified_indices_identity_for_singletons() {
        let strata = vec![vec![0], vec![1], vec![2]];
        let mut rng = seeded_rng(1, 0);
        for _ in 0..5 {
            assert_eq!(stratified_indices(&strata, &mut rng), vec![0, 1, 2]);
        }
    }

    #[test]
    fn stratified_indices_stay_within_strata() {
        let strata = vec![vec![0, 2, 4], vec![1, 3], vec![5]];
        let mut rng = seeded_rng(2, 0);
        for _ in 0..20 {
            let perm = stratified_indices(&strata, &mut rng);
            for s in &strata {
                let mut image: Vec<usize> = s.iter().map(|&i| perm[i]).collect();
                image.sort();
                assert_eq!(&image, s);
            }
        }
    }

    fn small_context() -> (crate::cross::Cross, Array2<f64>) {
        let map = simcross::equally_spaced_map(6, 25.0, "1");
        let genotypes = simcross::sim_f2(120, &map, MapFunction::Haldane, 7);
        let mut rng = seeded_rng(8, 0);
        let mut y = Array2::zeros((120, 3));
        for j in 0..3 {
            for i in 0..120 {
                let g = genotypes[(i, 2)].unwrap().index() as f64 - 1.0;
                let e: f64 = StandardNormal.sample(&mut rng);
                y[(i, j)] = 0.5 * g + e;
            }
        }
        (simcross::cross_from_genotypes(genotypes, map), y)
    }

    #[test]
    fn bootstrap_reproducible_and_near_null() {
        let (cross, y) = small_context();
        let cfg = HmmConfig {
            error_rate: 0.0,
            map_function: MapFunction::Haldane,
            step: 1000.0,
        };
        let gp = calc_genoprob(&cross, &cfg).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 25.0).unwrap();
        let rows: Vec<usize> = (0..120).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let fit = d.fit_traits(y.view()).unwrap();
        let mode = SearchMode::Coordinate { starts: 3 };
        let a = parametric_bootstrap(&d, &fit, 8, 99, mode).unwrap();
        let b = parametric_bootstrap(&d, &fit, 8, 99, mode).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.stats.len(), 8);
        for &s in &a.stats {
            assert!(s.is_finite());
            assert!(s >= -1e-9);
        }
        // a single common QTL drives all traits, so the evidence for two QTL
        // should be modest in most replicates
        let median = {
            let mut v = a.stats.clone();
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v[v.len() / 2]
        };
        assert!(median < 6.0, "median null statistic {median}");
    }

    #[test]
    fn permutation_reproducible() {
        let (cross, y) = small_context();
        let cfg = HmmConfig {
            error_rate: 0.0,
            map_function: MapFunction::Haldane,
            step: 1000.0,
        };
        let gp = calc_genoprob(&cross, &cfg).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 25.0).unwrap();
        let rows: Vec<usize> = (0..120).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let fit = d.fit_traits(y.view()).unwrap();
        let mode = SearchMode::Coordinate { starts: 3 };
        let a = stratified_permutation(&d, y.view(), fit.lambda1_idx, 6, 5, mode).unwrap();
        let b = stratified_permutation(&d, y.view(), fit.lambda1_idx, 6, 5, mode).unwrap();
        assert_eq!(a.stats, b.stats);
        for &s in &a.stats {
            assert!(s >= -1e-9);
        }
    }
}
