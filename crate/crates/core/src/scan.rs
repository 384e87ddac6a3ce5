//! Single-trait Haley-Knott genome scans with additive and interactive
//! covariates, peak extraction, signed LODs, and additive/dominance effect
//! estimates at the peak.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cross::{CovariateSet, Cross, Genotype};
use crate::error::{Error, Result};
use crate::genoprob::{impute_genotype, GenoProb};
use crate::linalg::{FactoredDesign, COLLINEARITY_TOL};

/// Residual sums of squares are floored here to avoid infinite LODs on
/// degenerate perfect fits.
pub const RSS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
pub struct ScanOptions {
    /// Include interactive-covariate main effects in the null model. The
    /// default (false) matches the published test, which compares against a
    /// null of additive covariates only.
    pub null_includes_interactive: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectEstimate {
    pub mu_bb: f64,
    pub mu_br: f64,
    pub mu_rr: f64,
    /// Half the difference between the homozygote means.
    pub additive: f64,
    /// Heterozygote deviation from the homozygote midpoint.
    pub dominance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Peak {
    pub chr: String,
    pub pos: f64,
    pub lod: f64,
    /// Flat index into the genotype-probability grid.
    pub grid_index: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChrCurve {
    pub chr: String,
    pub positions: Vec<f64>,
    pub lod: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraitScan {
    pub trait_id: String,
    pub curves: Vec<ChrCurve>,
    pub peak: Peak,
    pub signed_lod: f64,
    pub effects: EffectEstimate,
}

/// Genotype codings at one grid position for a row subset:
/// additive `P(RR) - P(BB)` and dominance `P(BR)`.
pub(crate) fn geno_codings(gp: &GenoProb, position: usize, rows: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let mut ga = Vec::with_capacity(rows.len());
    let mut gd = Vec::with_capacity(rows.len());
    for &i in rows {
        ga.push(gp.probs[(i, position, 2)] - gp.probs[(i, position, 0)]);
        gd.push(gp.probs[(i, position, 1)]);
    }
    (ga, gd)
}

/// Null design: intercept and additive covariates (interactive main effects
/// only when requested).
pub(crate) fn build_null_design(covars: &CovariateSet, include_interactive: bool) -> Array2<f64> {
    let n = covars.n_rows();
    let k_int = if include_interactive {
        covars.interactive.ncols()
    } else {
        0
    };
    let q = 1 + covars.additive.ncols() + k_int;
    let mut x = Array2::zeros((n, q));
    x.column_mut(0).fill(1.0);
    let mut c = 1;
    for j in 0..covars.additive.ncols() {
        x.column_mut(c).assign(&covars.additive.column(j));
        c += 1;
    }
    for j in 0..k_int {
        x.column_mut(c).assign(&covars.interactive.column(j));
        c += 1;
    }
    x
}

/// Full design: intercept, additive covariates, interactive covariates,
/// genotype codings, and interactive × genotype products.
pub(crate) fn build_full_design(covars: &CovariateSet, ga: &[f64], gd: &[f64]) -> Array2<f64> {
    let n = covars.n_rows();
    debug_assert_eq!(n, ga.len());
    let k_add = covars.additive.ncols();
    let k_int = covars.interactive.ncols();
    let q = 1 + k_add + k_int + 2 + 2 * k_int;
    let mut x = Array2::zeros((n, q));
    x.column_mut(0).fill(1.0);
    let mut c = 1;
    for j in 0..k_add {
        x.column_mut(c).assign(&covars.additive.column(j));
        c += 1;
    }
    for j in 0..k_int {
        x.column_mut(c).assign(&covars.interactive.column(j));
        c += 1;
    }
    for i in 0..n {
        x[(i, c)] = ga[i];
        x[(i, c + 1)] = gd[i];
    }
    c += 2;
    for j in 0..k_int {
        for i in 0..n {
            x[(i, c)] = covars.interactive[(i, j)] * ga[i];
            x[(i, c + 1)] = covars.interactive[(i, j)] * gd[i];
        }
        c += 2;
    }
    x
}

fn rss_scalar(resid: &Array2<f64>) -> f64 {
    resid.iter().map(|r| r * r).sum::<f64>().max(RSS_FLOOR)
}

/// Haley-Knott scan of one trait over the whole grid.
pub fn scan1(
    trait_values: &[f64],
    trait_id: &str,
    gp: &GenoProb,
    covars: &CovariateSet,
    opts: &ScanOptions,
) -> Result<TraitScan> {
    let rows: Vec<usize> = (0..trait_values.len())
        .filter(|&i| !trait_values[i].is_nan())
        .collect();
    if rows.is_empty() {
        return Err(Error::invalid(format!("trait {trait_id} is all missing")));
    }
    if rows.len() < 10 {
        return Err(Error::invalid(format!(
            "trait {trait_id} has {} non-missing values; need at least 10",
            rows.len()
        )));
    }
    let n = rows.len();
    let covars_sub = covars.select_rows(&rows);
    let y = Array2::from_shape_fn((n, 1), |(i, _)| trait_values[rows[i]]);

    let x0 = build_null_design(&covars_sub, opts.null_includes_interactive);
    let fd0 = FactoredDesign::new(x0, COLLINEARITY_TOL);
    let (_, resid0) = fd0.fit(y.view());
    let rss0 = rss_scalar(&resid0);

    let half_n = n as f64 / 2.0;
    let mut curves = Vec::with_capacity(gp.grid.len());
    let mut peak: Option<Peak> = None;
    for chr_grid in &gp.grid {
        let mut lods = Vec::with_capacity(chr_grid.points.len());
        for (k, point) in chr_grid.points.iter().enumerate() {
            let flat = chr_grid.offset + k;
            let (ga, gd) = geno_codings(gp, flat, &rows);
            let x = build_full_design(&covars_sub, &ga, &gd);
            let fd = FactoredDesign::new(x, COLLINEARITY_TOL);
            let (_, resid) = fd.fit(y.view());
            let rss1 = rss_scalar(&resid);
            let lod = (half_n * (rss0 / rss1).log10()).max(0.0);
            lods.push(lod);
            let better = match &peak {
                None => true,
                Some(p) => lod > p.lod,
            };
            if better {
                peak = Some(Peak {
                    chr: chr_grid.chr.clone(),
                    pos: point.pos,
                    lod,
                    grid_index: flat,
                });
            }
        }
        curves.push(ChrCurve {
            chr: chr_grid.chr.clone(),
            positions: chr_grid.points.iter().map(|p| p.pos).collect(),
            lod: lods,
        });
    }
    let peak = peak.ok_or_else(|| Error::invalid("empty grid".to_string()))?;
    let effects = estimate_effects(trait_values, gp, peak.grid_index)?;
    let signed = signed_lod(peak.lod, effects.additive);
    Ok(TraitScan {
        trait_id: trait_id.to_string(),
        curves,
        peak,
        signed_lod: signed,
        effects,
    })
}

/// Genotype-class means at a grid position, over individuals with a
/// non-missing trait value; genotypes are taken as the most probable.
pub fn estimate_effects(
    trait_values: &[f64],
    gp: &GenoProb,
    position: usize,
) -> Result<EffectEstimate> {
    let imputed = impute_genotype(gp, position);
    let mut sums = [0.0_f64; 3];
    let mut counts = [0usize; 3];
    for (i, &v) in trait_values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        let k = imputed[i].index();
        sums[k] += v;
        counts[k] += 1;
    }
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            let (chr, pos) = gp.position(position);
            return Err(Error::EmptyGenotypeClass {
                class: Genotype::from_index(k).as_str().to_string(),
                position: format!("{chr}:{pos}"),
            });
        }
    }
    let mu_bb = sums[0] / counts[0] as f64;
    let mu_br = sums[1] / counts[1] as f64;
    let mu_rr = sums[2] / counts[2] as f64;
    Ok(EffectEstimate {
        mu_bb,
        mu_br,
        mu_rr,
        additive: (mu_rr - mu_bb) / 2.0,
        dominance: mu_br - (mu_bb + mu_rr) / 2.0,
    })
}

/// Peak LOD signed by the direction of the additive effect; a zero additive
/// effect keeps the positive sign.
pub fn signed_lod(peak_lod: f64, additive: f64) -> f64 {
    if additive < 0.0 {
        -peak_lod
    } else {
        peak_lod
    }
}

/// Scan every trait and keep those with peak LOD at or above `lod_min`,
/// ordered by trait id.
pub fn scan_all(
    cross: &Cross,
    gp: &GenoProb,
    lod_min: f64,
    opts: &ScanOptions,
) -> Result<Vec<TraitScan>> {
    let mut scans: Vec<TraitScan> = (0..cross.n_traits())
        .into_par_iter()
        .map(|j| {
            let col: Vec<f64> = cross.phenotypes.column(j).to_vec();
            scan1(&col, &cross.trait_ids[j], gp, &cross.covariates, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    scans.retain(|s| s.peak.lod >= lod_min);
    scans.sort_by(|a, b| a.trait_id.cmp(&b.trait_id));
    Ok(scans)
}
