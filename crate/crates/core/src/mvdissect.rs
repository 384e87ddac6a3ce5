//! One- versus two-QTL multivariate likelihood machinery: multivariate LOD
//! scans over an interval, cut-point search over position-sorted traits with
//! exhaustive and coordinate-ascent 2D maximization, profile curves, and the
//! per-cut-point diagnostic.

use log::info;
use ndarray::{Array2, Array3, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cross::{CovariateSet, Genotype};
use crate::error::{Error, Result};
use crate::genoprob::{GenoProb, GenomeInterval};
use crate::linalg::{log10_det_spd_inplace, FactoredDesign, COLLINEARITY_TOL};
use crate::scan::{build_full_design, build_null_design, geno_codings, RSS_FLOOR};

/// ChaCha generator for a derived stream, so parallel work is reproducible.
pub(crate) fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multivariate least-squares fit of `p` traits on one design.
#[derive(Debug, Clone)]
pub struct MvModelFit {
    pub n: usize,
    pub p: usize,
    /// Design columns, before any collinear drop.
    pub q: usize,
    /// Columns actually used.
    pub rank: usize,
    pub beta_hat: Array2<f64>,
    pub rss: Array2<f64>,
    pub log10_det_rss: f64,
}

/// Least squares of `y` (n×p, complete) on `x` (n×q), with the residual
/// cross-product matrix and its log10 determinant.
pub fn mv_fit(y: ArrayView2<f64>, x: ArrayView2<f64>) -> Result<MvModelFit> {
    let n = y.nrows();
    let p = y.ncols();
    if x.nrows() != n {
        return Err(Error::invalid(format!(
            "design has {} rows but phenotypes have {n}",
            x.nrows()
        )));
    }
    if y.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("phenotype matrix has missing values; drop incomplete individuals first"));
    }
    let fd = FactoredDesign::new(x.to_owned(), COLLINEARITY_TOL);
    let rank = fd.rank();
    if n <= rank + p {
        return Err(Error::invalid(format!(
            "{p} traits with {rank} design columns and {n} individuals leave no residual \
             degrees of freedom; reduce the number of traits"
        )));
    }
    let (beta_hat, resid) = fd.fit(y);
    let rss = resid.t().dot(&resid);
    let log10_det_rss = crate::linalg::log10_det_spd(
        rss.view(),
        "residual cross-product matrix",
        "reduce the number of traits",
    )?;
    Ok(MvModelFit {
        n,
        p,
        q: x.ncols(),
        rank,
        beta_hat,
        rss,
        log10_det_rss,
    })
}

/// `(n/2) log10(|RSS_null| / |RSS_alt|)`.
pub fn mv_lod(fit_null: &MvModelFit, fit_alt: &MvModelFit) -> Result<f64> {
    if fit_null.n != fit_alt.n || fit_null.p != fit_alt.p {
        return Err(Error::invalid(format!(
            "model dimensions differ: {}×{} vs {}×{}",
            fit_null.n, fit_null.p, fit_alt.n, fit_alt.p
        )));
    }
    Ok(fit_null.n as f64 / 2.0 * (fit_null.log10_det_rss - fit_alt.log10_det_rss))
}

/// Sort traits by estimated QTL position, randomly ordering ties with a
/// seeded generator. Returns a permutation of trait indices.
pub fn order_traits(peak_positions: &[f64], seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..peak_positions.len()).collect();
    order.sort_by(|&a, &b| peak_positions[a].partial_cmp(&peak_positions[b]).unwrap());
    let mut rng = seeded_rng(seed, 0);
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len()
            && peak_positions[order[j + 1]] == peak_positions[order[i]]
        {
            j += 1;
        }
        if j > i {
            order[i..=j].shuffle(&mut rng);
        }
        i = j + 1;
    }
    order
}

/// Search strategy for the two-dimensional scan at each cut-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Full 2D grid; both axes scanned over the whole interval.
    Exhaustive,
    /// Alternate argmax over each axis from several start points.
    Coordinate { starts: usize },
}

impl Default for SearchMode {
    fn default() -> Self {
        SearchMode::Coordinate { starts: 5 }
    }
}

const COORDINATE_MAX_SWEEPS: usize = 20;

/// Interval grid with per-position factored designs, reusable across many
/// trait matrices (bootstrap and permutation replicates fit against the same
/// designs).
///
/// Designs split into a fixed block (intercept and covariates, identical at
/// every position) and a genotype block (codings and their covariate
/// interactions). The cross-Gram between the genotype blocks of every pair
/// of positions is precomputed once, so the two-QTL scan can evaluate the
/// pooled residual cross-product of any `(λ1, λ2)` pair from projection
/// algebra instead of touching the n-row residual matrices.
pub struct Dissector {
    pub chr: String,
    pub positions: Vec<f64>,
    grid_flat: Vec<usize>,
    designs: Vec<FactoredDesign>,
    null_design: FactoredDesign,
    /// Genotype probabilities restricted to the row subset and interval grid.
    probs: Array3<f64>,
    n: usize,
    /// Fixed design columns (first `q_fixed` of every design).
    q_fixed: usize,
    /// Position-dependent design columns (the rest).
    q_geno: usize,
    /// Xf' Xf.
    fixed_gram: Array2<f64>,
    /// Per position: Xf' Xg(λ), q_fixed × q_geno.
    a_cross: Vec<Array2<f64>>,
    /// Xg(λ1)' Xg(λ2) for all pairs, as a (G·q_geno) × (G·q_geno) block grid.
    pair_gram: Array2<f64>,
}

impl Dissector {
    /// Build per-position designs for the grid inside `interval`, restricted
    /// to `rows` (indices into the genotype-probability individuals).
    pub fn new(
        gp: &GenoProb,
        covars: &CovariateSet,
        rows: &[usize],
        interval: &GenomeInterval,
    ) -> Result<Dissector> {
        let chr_grid = gp
            .chromosome(&interval.chr)
            .ok_or_else(|| Error::invalid(format!("unknown chromosome {}", interval.chr)))?;
        let grid_flat = chr_grid.indices_in(interval.lo, interval.hi);
        if grid_flat.is_empty() {
            return Err(Error::invalid(format!(
                "interval {interval} contains no grid positions"
            )));
        }
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("no individuals left after filtering"));
        }
        let covars_sub = covars.select_rows(rows);
        let positions: Vec<f64> = grid_flat
            .iter()
            .map(|&k| chr_grid.points[k - chr_grid.offset].pos)
            .collect();

        let mut probs = Array3::zeros((n, grid_flat.len(), 3));
        for (i, &r) in rows.iter().enumerate() {
            for (k, &flat) in grid_flat.iter().enumerate() {
                for s in 0..3 {
                    probs[(i, k, s)] = gp.probs[(r, flat, s)];
                }
            }
        }

        let designs: Vec<FactoredDesign> = grid_flat
            .iter()
            .map(|&flat| {
                let (ga, gd) = geno_codings(gp, flat, rows);
                FactoredDesign::new(build_full_design(&covars_sub, &ga, &gd), COLLINEARITY_TOL)
            })
            .collect();
        let null_design =
            FactoredDesign::new(build_null_design(&covars_sub, false), COLLINEARITY_TOL);

        let k_int = covars_sub.interactive.ncols();
        let q = designs[0].q();
        let q_geno = 2 + 2 * k_int;
        let q_fixed = q - q_geno;
        let g = grid_flat.len();

        // concatenate every position's genotype block for one big cross-Gram
        let mut xg_all = Array2::<f64>::zeros((n, g * q_geno));
        for (k, fd) in designs.iter().enumerate() {
            let x = fd.matrix();
            for c in 0..q_geno {
                xg_all
                    .column_mut(k * q_geno + c)
                    .assign(&x.column(q_fixed + c));
            }
        }
        let pair_gram = xg_all.t().dot(&xg_all);
        let xf = designs[0]
            .matrix()
            .slice(ndarray::s![.., 0..q_fixed])
            .to_owned();
        let fixed_gram = xf.t().dot(&xf);
        let af_all = xf.t().dot(&xg_all); // q_fixed × (G·q_geno)
        let a_cross: Vec<Array2<f64>> = (0..g)
            .map(|k| {
                af_all
                    .slice(ndarray::s![.., k * q_geno..(k + 1) * q_geno])
                    .to_owned()
            })
            .collect();

        Ok(Dissector {
            chr: interval.chr.clone(),
            positions,
            grid_flat,
            designs,
            null_design,
            probs,
            n,
            q_fixed,
            q_geno,
            fixed_gram,
            a_cross,
            pair_gram,
        })
    }

    pub fn n_individuals(&self) -> usize {
        self.n
    }

    pub fn n_positions(&self) -> usize {
        self.positions.len()
    }

    /// Flat index into the genotype-probability grid for interval position
    /// `k`, for looking positions back up in the full tensor.
    pub fn flat_grid_index(&self, k: usize) -> usize {
        self.grid_flat[k]
    }

    /// Most probable genotype per (row-subset) individual at a grid index.
    pub fn imputed_at(&self, k: usize) -> Vec<Genotype> {
        (0..self.n)
            .map(|i| {
                let mut best = 0;
                for s in 1..3 {
                    if self.probs[(i, k, s)] > self.probs[(i, k, best)] {
                        best = s;
                    }
                }
                Genotype::from_index(best)
            })
            .collect()
    }

    /// Fit `y` (rows already restricted and complete) at every grid position.
    pub fn fit_traits(&self, y: ArrayView2<f64>) -> Result<FittedGrid<'_>> {
        let n = self.n;
        if y.nrows() != n {
            return Err(Error::invalid(format!(
                "phenotype rows {} do not match dissector rows {n}",
                y.nrows()
            )));
        }
        if y.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("phenotype matrix has missing values; drop incomplete individuals first"));
        }
        let p = y.ncols();
        if p == 0 {
            return Err(Error::invalid("no traits to fit"));
        }
        let q = self.designs[0].q();
        if p + q + 2 > n {
            return Err(Error::invalid(format!(
                "{p} traits exceed the limit of {} for {n} individuals and {q} design columns",
                n.saturating_sub(q + 2)
            )));
        }
        let half_n = n as f64 / 2.0;

        let (_, null_resid) = self.null_design.fit(y);
        let null_cross = null_resid.t().dot(&null_resid);
        let mut work = null_cross.clone();
        let log10_det_rss0 = log10_det_spd_inplace(&mut work).ok_or_else(|| Error::Singular {
            context: "null residual cross-product matrix".into(),
            suggestion: "reduce the number of traits".into(),
        })?;
        let rss0_diag: Vec<f64> = (0..p).map(|j| null_cross[(j, j)].max(RSS_FLOOR)).collect();

        let t0 = y.t().dot(&y);
        let g = self.n_positions();
        let qf = self.q_fixed;
        let mut beta = Vec::with_capacity(g);
        let mut cross = Vec::with_capacity(g);
        let mut hat = Vec::with_capacity(g);
        let mut u_fixed = Vec::with_capacity(g);
        let mut lod1 = Vec::with_capacity(g);
        let mut uni_best_idx = vec![0usize; p];
        let mut uni_best_lod = vec![f64::NEG_INFINITY; p];
        for k in 0..g {
            let x = self.designs[k].matrix();
            let xty = x.t().dot(&y);
            let b = self.designs[k].solve_from_xty(&xty);
            let r = self.designs[k].residuals(y, &b);
            let c = r.t().dot(&r);
            let mut work = c.clone();
            let ld = log10_det_spd_inplace(&mut work).ok_or_else(|| Error::Singular {
                context: format!("residual cross-product matrix at {} cM", self.positions[k]),
                suggestion: "reduce the number of traits".into(),
            })?;
            lod1.push(half_n * (log10_det_rss0 - ld));
            for j in 0..p {
                let l = half_n * (rss0_diag[j] / c[(j, j)].max(RSS_FLOOR)).log10();
                if l > uni_best_lod[j] {
                    uni_best_lod[j] = l;
                    uni_best_idx[j] = k;
                }
            }
            // H(λ) = Y' P(λ) Y and the fixed-row part of K β for the pooled
            // cross-products of the two-QTL scan
            hat.push(xty.t().dot(&b));
            let bf = b.slice(ndarray::s![0..qf, ..]);
            let bg = b.slice(ndarray::s![qf.., ..]);
            u_fixed.push(self.fixed_gram.dot(&bf) + self.a_cross[k].dot(&bg));
            beta.push(b);
            cross.push(c);
        }
        let mut lambda1_idx = 0;
        for k in 1..g {
            if lod1[k] > lod1[lambda1_idx] {
                lambda1_idx = k;
            }
        }
        let m1 = lod1[lambda1_idx];

        Ok(FittedGrid {
            dissector: self,
            p,
            half_n,
            beta,
            cross,
            t0,
            hat,
            u_fixed,
            log10_det_rss0,
            lod1,
            m1,
            lambda1_idx,
            univariate_peak_idx: uni_best_idx,
            univariate_peak_lod: uni_best_lod,
        })
    }
}

/// All per-position fits for one trait matrix over the interval grid.
pub struct FittedGrid<'d> {
    pub dissector: &'d Dissector,
    pub p: usize,
    half_n: f64,
    beta: Vec<Array2<f64>>,
    cross: Vec<Array2<f64>>,
    /// Y' Y.
    t0: Array2<f64>,
    /// Per position: Y' P(λ) Y.
    hat: Vec<Array2<f64>>,
    /// Per position: (Xf'Xf) bf(λ) + (Xf'Xg(λ)) bg(λ), the fixed-row part of
    /// X(λ1)'X(λ2) β(λ2) for any λ1.
    u_fixed: Vec<Array2<f64>>,
    pub log10_det_rss0: f64,
    /// Single-QTL multivariate LOD at each grid position.
    pub lod1: Vec<f64>,
    pub m1: f64,
    pub lambda1_idx: usize,
    /// Per-trait argmax of the univariate LOD over the interval.
    pub univariate_peak_idx: Vec<usize>,
    pub univariate_peak_lod: Vec<f64>,
}

/// Estimated single-QTL model, for simulating bootstrap replicates.
pub struct SingleQtlModel<'d> {
    pub design: ArrayView2<'d, f64>,
    pub beta: Array2<f64>,
    /// Lower Cholesky factor of the ML residual covariance `rss / n`.
    pub sigma_chol: Array2<f64>,
}

impl<'d> FittedGrid<'d> {
    pub fn positions(&self) -> &[f64] {
        &self.dissector.positions
    }

    pub fn lambda1_cm(&self) -> f64 {
        self.dissector.positions[self.lambda1_idx]
    }

    /// Per-trait univariate peak positions in cM.
    pub fn univariate_peak_cm(&self) -> Vec<f64> {
        self.univariate_peak_idx
            .iter()
            .map(|&k| self.dissector.positions[k])
            .collect()
    }

    /// Fitted single-QTL model at the estimated position.
    pub fn single_qtl_model(&self) -> Result<SingleQtlModel<'d>> {
        let n = self.dissector.n as f64;
        let sigma = &self.cross[self.lambda1_idx] / n;
        let sigma_chol = crate::linalg::cholesky_lower(
            sigma.view(),
            "estimated residual covariance",
        )
        .map_err(|_| Error::Singular {
            context: "estimated residual covariance".into(),
            suggestion: "reduce the number of traits".into(),
        })?;
        Ok(SingleQtlModel {
            design: self.dissector.designs[self.lambda1_idx].matrix(),
            beta: self.beta[self.lambda1_idx].clone(),
            sigma_chol,
        })
    }

    fn scratch(&self) -> EvalScratch {
        EvalScratch {
            pooled: Array2::zeros((self.p, self.p)),
            kb: Array2::zeros((self.dissector.q_geno, self.p)),
        }
    }

    /// Two-QTL LOD for cut `c` of `order`-sorted traits, with the first block
    /// at grid index `i` and the second at `j`. The two blocks are fit
    /// separately; their pooled p×p residual cross-product has diagonal
    /// blocks taken from the per-position fits and the off-diagonal block
    /// `Y1' M(λ1) M(λ2) Y2` evaluated by projection algebra:
    /// `Y'Y - Y'P1Y - Y'P2Y + β1' (X1'X2) β2`.
    fn lod2_eval(
        &self,
        order: &[usize],
        c: usize,
        i: usize,
        j: usize,
        scratch: &mut EvalScratch,
    ) -> f64 {
        let p = self.p;
        let work = &mut scratch.pooled;
        if i == j {
            // identical positions collapse to the single-QTL fit
            for a in 0..p {
                let oa = order[a];
                for b in 0..p {
                    work[(a, b)] = self.cross[i][(oa, order[b])];
                }
            }
        } else {
            let d = self.dissector;
            let (qf, qg) = (d.q_fixed, d.q_geno);
            let ci = &self.cross[i];
            let cj = &self.cross[j];
            for a in 0..c {
                let oa = order[a];
                for b in 0..c {
                    work[(a, b)] = ci[(oa, order[b])];
                }
            }
            for a in c..p {
                let oa = order[a];
                for b in c..p {
                    work[(a, b)] = cj[(oa, order[b])];
                }
            }
            // kb = A(λ1)' bf(λ2) + B(λ1,λ2) bg(λ2), the geno-row part of
            // X(λ1)'X(λ2) β(λ2); the fixed-row part is precomputed
            let kb = &mut scratch.kb;
            let ai = &d.a_cross[i];
            let bj = &self.beta[j];
            for r in 0..qg {
                for t in 0..p {
                    let mut acc = 0.0;
                    for f in 0..qf {
                        acc += ai[(f, r)] * bj[(f, t)];
                    }
                    for s in 0..qg {
                        acc += d.pair_gram[(i * qg + r, j * qg + s)] * bj[(qf + s, t)];
                    }
                    kb[(r, t)] = acc;
                }
            }
            let bi = &self.beta[i];
            let uj = &self.u_fixed[j];
            let (t0, hi, hj) = (&self.t0, &self.hat[i], &self.hat[j]);
            for a in 0..c {
                let oa = order[a];
                for b in c..p {
                    let ob = order[b];
                    let mut v = t0[(oa, ob)] - hi[(oa, ob)] - hj[(oa, ob)];
                    for f in 0..qf {
                        v += bi[(f, oa)] * uj[(f, ob)];
                    }
                    for r in 0..qg {
                        v += bi[(qf + r, oa)] * kb[(r, ob)];
                    }
                    work[(a, b)] = v;
                    work[(b, a)] = v;
                }
            }
        }
        match log10_det_spd_inplace(work) {
            Some(ld) => self.half_n * (self.log10_det_rss0 - ld),
            None => f64::NEG_INFINITY,
        }
    }

    /// Maximize the two-QTL LOD over (λ1, λ2) for one cut-point.
    pub fn scan2_cut(
        &self,
        order: &[usize],
        c: usize,
        mode: SearchMode,
        seed: u64,
    ) -> Result<CutSearch> {
        let p = self.p;
        if c == 0 || c >= p {
            return Err(Error::invalid(format!(
                "cut-point {c} outside 1..{}",
                p - 1
            )));
        }
        if order.len() != p {
            return Err(Error::invalid(format!(
                "trait order has {} entries for {p} traits",
                order.len()
            )));
        }
        let g = self.dissector.n_positions();
        let mut scratch = self.scratch();
        let eval =
            |i: usize, j: usize, s: &mut EvalScratch| self.lod2_eval(order, c, i, j, s);

        let (mut best_i, mut best_j, mut best) = (0usize, 0usize, f64::NEG_INFINITY);
        let consider = |i: usize, j: usize, v: f64, bi: &mut usize, bj: &mut usize, bv: &mut f64| {
            if v > *bv || (v == *bv && (i, j) < (*bi, *bj)) {
                *bi = i;
                *bj = j;
                *bv = v;
            }
        };

        match mode {
            SearchMode::Exhaustive => {
                for i in 0..g {
                    for j in 0..g {
                        let v = eval(i, j, &mut scratch);
                        consider(i, j, v, &mut best_i, &mut best_j, &mut best);
                    }
                }
            }
            SearchMode::Coordinate { starts } => {
                let starts = starts.max(1);
                let mut rng = seeded_rng(seed, c as u64 + 1);
                let mut start_points = vec![(self.lambda1_idx, self.lambda1_idx)];
                for _ in 1..starts {
                    start_points.push((rng.gen_range(0..g), rng.gen_range(0..g)));
                }
                for (si, sj) in start_points {
                    let (mut i, mut j) = (si, sj);
                    let mut v = eval(i, j, &mut scratch);
                    for _sweep in 0..COORDINATE_MAX_SWEEPS {
                        let mut moved = false;
                        let (mut ni, mut nv) = (i, v);
                        for cand in 0..g {
                            let cv = eval(cand, j, &mut scratch);
                            if cv > nv {
                                ni = cand;
                                nv = cv;
                            }
                        }
                        if ni != i {
                            i = ni;
                            v = nv;
                            moved = true;
                        }
                        let (mut nj, mut nv) = (j, v);
                        for cand in 0..g {
                            let cv = eval(i, cand, &mut scratch);
                            if cv > nv {
                                nj = cand;
                                nv = cv;
                            }
                        }
                        if nj != j {
                            j = nj;
                            v = nv;
                            moved = true;
                        }
                        if !moved {
                            break;
                        }
                    }
                    consider(i, j, v, &mut best_i, &mut best_j, &mut best);
                }
            }
        }
        Ok(CutSearch {
            c,
            m2_c: best,
            lambda1_idx: best_i,
            lambda2_idx: best_j,
        })
    }

    /// Profile slices of the two-QTL LOD surface at the estimated positions.
    pub fn profiles(
        &self,
        order: &[usize],
        c: usize,
        lambda1_idx: usize,
        lambda2_idx: usize,
    ) -> (Vec<f64>, Vec<f64>) {
        let g = self.dissector.n_positions();
        let mut scratch = self.scratch();
        let left = (0..g)
            .map(|i| self.lod2_eval(order, c, i, lambda2_idx, &mut scratch))
            .collect();
        let right = (0..g)
            .map(|j| self.lod2_eval(order, c, lambda1_idx, j, &mut scratch))
            .collect();
        (left, right)
    }

    /// Run the cut-point search for every cut and assemble the full result.
    pub fn test_2v1(&self, order: &[usize], mode: SearchMode, seed: u64) -> Result<TwoVsOneResult> {
        let p = self.p;
        if p < 2 {
            return Err(Error::invalid("two-QTL test needs at least 2 traits"));
        }
        if order.len() != p {
            return Err(Error::invalid(format!(
                "trait order has {} entries for {p} traits",
                order.len()
            )));
        }
        let searches: Vec<CutSearch> = (1..p)
            .into_par_iter()
            .map(|c| self.scan2_cut(order, c, mode, seed))
            .collect::<Result<Vec<_>>>()?;
        let mut best = &searches[0];
        for s in &searches[1..] {
            if s.m2_c > best.m2_c {
                best = s;
            }
        }
        let (left, right) = self.profiles(order, best.c, best.lambda1_idx, best.lambda2_idx);
        let positions = self.dissector.positions.clone();
        info!(
            "two-vs-one test: M1={:.3} at {:.2} cM, M2={:.3} at ({:.2}, {:.2}) cM, cut {}",
            self.m1,
            positions[self.lambda1_idx],
            best.m2_c,
            positions[best.lambda1_idx],
            positions[best.lambda2_idx],
            best.c
        );
        Ok(TwoVsOneResult {
            m1: self.m1,
            lambda_1qtl: positions[self.lambda1_idx],
            lambda_1qtl_idx: self.lambda1_idx,
            m2: best.m2_c,
            c_hat: best.c,
            lambda1: positions[best.lambda1_idx],
            lambda2: positions[best.lambda2_idx],
            lambda1_idx: best.lambda1_idx,
            lambda2_idx: best.lambda2_idx,
            lod_2v1: best.m2_c - self.m1,
            per_cutpoint: searches.iter().map(|s| s.m2_c).collect(),
            profile_left: left,
            profile_right: right,
            lod1_curve: self.lod1.clone(),
            positions,
            trait_order: order.to_vec(),
            univariate_peak_pos: self.univariate_peak_cm(),
            univariate_peak_lod: self.univariate_peak_lod.clone(),
            seed,
            pvalue: None,
        })
    }
}

/// Reusable buffers for the two-QTL evaluations.
struct EvalScratch {
    pooled: Array2<f64>,
    kb: Array2<f64>,
}

/// Best two-QTL fit for one cut-point.
#[derive(Debug, Clone, Copy)]
pub struct CutSearch {
    pub c: usize,
    pub m2_c: f64,
    pub lambda1_idx: usize,
    pub lambda2_idx: usize,
}

/// Full result of the one- versus two-QTL test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoVsOneResult {
    pub m1: f64,
    pub lambda_1qtl: f64,
    pub lambda_1qtl_idx: usize,
    pub m2: f64,
    /// Traits in the first (left) block under the chosen cut.
    pub c_hat: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda1_idx: usize,
    pub lambda2_idx: usize,
    pub lod_2v1: f64,
    /// M2 for each cut-point c = 1..p-1.
    pub per_cutpoint: Vec<f64>,
    pub profile_left: Vec<f64>,
    pub profile_right: Vec<f64>,
    pub lod1_curve: Vec<f64>,
    /// Grid positions (cM) that the curves align to.
    pub positions: Vec<f64>,
    /// Position-sorted permutation of the original trait columns.
    pub trait_order: Vec<usize>,
    /// Per original trait column: univariate peak position and LOD.
    pub univariate_peak_pos: Vec<f64>,
    pub univariate_peak_lod: Vec<f64>,
    pub seed: u64,
    pub pvalue: Option<f64>,
}

/// Rows of `y` with no missing value across all columns.
pub fn complete_case_rows(y: ArrayView2<f64>) -> Vec<usize> {
    let rows: Vec<usize> = (0..y.nrows())
        .filter(|&i| y.row(i).iter().all(|v| !v.is_nan()))
        .collect();
    let dropped = y.nrows() - rows.len();
    if dropped > 0 {
        info!("dropped {dropped} individuals with incomplete trait data");
    }
    rows
}

fn select_rows(y: ArrayView2<f64>, rows: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), y.ncols()));
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(i).assign(&y.row(r));
    }
    out
}

/// Single-QTL multivariate scan over the interval: LOD curve, its maximum,
/// and the estimated position in cM. Incomplete individuals are dropped.
pub fn mv_scan1(
    y: ArrayView2<f64>,
    gp: &GenoProb,
    covars: &CovariateSet,
    interval: &GenomeInterval,
) -> Result<(Vec<f64>, f64, f64)> {
    let rows = complete_case_rows(y);
    let d = Dissector::new(gp, covars, &rows, interval)?;
    let fit = d.fit_traits(select_rows(y, &rows).view())?;
    Ok((fit.lod1.clone(), fit.m1, fit.lambda1_cm()))
}

/// One- versus two-QTL test over the interval for a given trait order.
pub fn test_2v1(
    y: ArrayView2<f64>,
    gp: &GenoProb,
    covars: &CovariateSet,
    interval: &GenomeInterval,
    order: &[usize],
    mode: SearchMode,
    seed: u64,
) -> Result<TwoVsOneResult> {
    let rows = complete_case_rows(y);
    let d = Dissector::new(gp, covars, &rows, interval)?;
    let fit = d.fit_traits(select_rows(y, &rows).view())?;
    fit.test_2v1(order, mode, seed)
}

/// Two-QTL scan for a single cut-point.
pub fn mv_scan2_cut(
    y: ArrayView2<f64>,
    gp: &GenoProb,
    covars: &CovariateSet,
    interval: &GenomeInterval,
    order: &[usize],
    c: usize,
    mode: SearchMode,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let rows = complete_case_rows(y);
    let d = Dissector::new(gp, covars, &rows, interval)?;
    let fit = d.fit_traits(select_rows(y, &rows).view())?;
    let s = fit.scan2_cut(order, c, mode, seed)?;
    Ok((
        s.m2_c,
        d.positions[s.lambda1_idx],
        d.positions[s.lambda2_idx],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cross::CovariateSet;
    use crate::genoprob::{calc_genoprob, HmmConfig, MapFunction};
    use crate::scan::{scan1, ScanOptions};
    use crate::simcross;
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn marker_cfg() -> HmmConfig {
        HmmConfig {
            error_rate: 0.0,
            map_function: MapFunction::Haldane,
            step: 1000.0,
        }
    }

    fn sim_two_qtl(
        n: usize,
        n_markers: usize,
        length: f64,
        qtl: &[(usize, f64)], // (marker index, additive effect) per trait
        seed: u64,
    ) -> (crate::cross::Cross, Array2<f64>) {
        let map = simcross::equally_spaced_map(n_markers, length, "1");
        let genotypes = simcross::sim_f2(n, &map, MapFunction::Haldane, seed);
        let mut rng = seeded_rng(seed, 99);
        let p = qtl.len();
        let mut y = Array2::zeros((n, p));
        for (j, &(m, a)) in qtl.iter().enumerate() {
            for i in 0..n {
                let g = genotypes[(i, m)].unwrap().index() as f64 - 1.0;
                let e: f64 = StandardNormal.sample(&mut rng);
                y[(i, j)] = a * g + e;
            }
        }
        let cross = simcross::cross_from_genotypes(genotypes, map);
        (cross, y)
    }

    #[test]
    fn mv_fit_reduces_to_univariate() {
        let (cross, y) = sim_two_qtl(80, 5, 40.0, &[(2, 0.6)], 1);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let rows: Vec<usize> = (0..80).collect();
        let (ga, gd) = crate::scan::geno_codings(&gp, 2, &rows);
        let x = build_full_design(&CovariateSet::empty(80), &ga, &gd);
        let fit = mv_fit(y.view(), x.view()).unwrap();
        assert_eq!(fit.rss.shape(), &[1, 1]);
        // matches a direct residual computation
        let fd = FactoredDesign::new(x.clone(), COLLINEARITY_TOL);
        let (_, r) = fd.fit(y.view());
        let rss: f64 = r.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(fit.rss[(0, 0)], rss, epsilon = 1e-10);
    }

    #[test]
    fn mv_fit_rejects_duplicate_trait() {
        let (_, y1) = sim_two_qtl(50, 3, 20.0, &[(1, 0.5)], 2);
        let mut y = Array2::zeros((50, 2));
        y.column_mut(0).assign(&y1.column(0));
        y.column_mut(1).assign(&y1.column(0));
        let x = Array2::from_shape_fn((50, 1), |_| 1.0);
        assert!(mv_fit(y.view(), x.view()).is_err());
    }

    #[test]
    fn mv_fit_rss_matches_direct_residual_oracle() {
        let mut rng = seeded_rng(3, 0);
        let n = 50;
        let p = 3;
        let x = Array2::from_shape_fn((n, 2), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let y = Array2::from_shape_fn((n, p), |_| rng.gen_range(-1.0..1.0));
        let fit = mv_fit(y.view(), x.view()).unwrap();
        let e = &y - &x.dot(&fit.beta_hat);
        let rss = e.t().dot(&e);
        for (a, b) in fit.rss.iter().zip(rss.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn mv_lod_zero_for_identical_fits() {
        let mut rng = seeded_rng(4, 0);
        let x = Array2::from_shape_fn((40, 2), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let y = Array2::from_shape_fn((40, 2), |_| rng.gen_range(-1.0..1.0));
        let f1 = mv_fit(y.view(), x.view()).unwrap();
        let f2 = mv_fit(y.view(), x.view()).unwrap();
        assert_abs_diff_eq!(mv_lod(&f1, &f2).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mv_lod_nonnegative_for_nested_designs() {
        let mut rng = seeded_rng(5, 0);
        for _ in 0..10 {
            let n = 60;
            let x_small = Array2::from_shape_fn((n, 2), |(_, j)| {
                if j == 0 {
                    1.0
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            });
            let mut x_big = Array2::zeros((n, 3));
            x_big.column_mut(0).assign(&x_small.column(0));
            x_big.column_mut(1).assign(&x_small.column(1));
            for i in 0..n {
                x_big[(i, 2)] = rng.gen_range(-1.0..1.0);
            }
            let y = Array2::from_shape_fn((n, 2), |_| rng.gen_range(-1.0..1.0));
            let f0 = mv_fit(y.view(), x_small.view()).unwrap();
            let f1 = mv_fit(y.view(), x_big.view()).unwrap();
            assert!(mv_lod(&f0, &f1).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn mv_lod_invariant_to_trait_reordering() {
        let (cross, y) = sim_two_qtl(100, 5, 40.0, &[(1, 0.5), (2, 0.4), (3, 0.3)], 6);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 40.0).unwrap();
        let (curve_a, _, _) =
            mv_scan1(y.view(), &gp, &cross.covariates, &interval).unwrap();
        let mut y2 = Array2::zeros(y.raw_dim());
        y2.column_mut(0).assign(&y.column(2));
        y2.column_mut(1).assign(&y.column(0));
        y2.column_mut(2).assign(&y.column(1));
        let (curve_b, _, _) =
            mv_scan1(y2.view(), &gp, &cross.covariates, &interval).unwrap();
        for (a, b) in curve_a.iter().zip(&curve_b) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn order_traits_sorts_and_handles_ties() {
        assert_eq!(order_traits(&[3.0, 1.0, 2.0], 1), vec![1, 2, 0]);
        // all equal: seeded shuffle is reproducible
        let a = order_traits(&[5.0; 6], 42);
        let b = order_traits(&[5.0; 6], 42);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4, 5]);
        // distinct positions: seed has no effect
        assert_eq!(
            order_traits(&[3.0, 1.0, 2.0], 7),
            order_traits(&[3.0, 1.0, 2.0], 8)
        );
    }

    #[test]
    fn lambda_equal_collapses_to_single_qtl() {
        let (cross, y) = sim_two_qtl(120, 11, 50.0, &[(3, 0.5), (3, 0.5), (7, 0.5), (7, 0.5)], 8);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 50.0).unwrap();
        let rows: Vec<usize> = (0..120).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let fit = d.fit_traits(y.view()).unwrap();
        let order: Vec<usize> = (0..4).collect();
        let mut scratch = fit.scratch();
        for k in [0usize, 5, 10] {
            let v = fit.lod2_eval(&order, 2, k, k, &mut scratch);
            assert_abs_diff_eq!(v, fit.lod1[k], epsilon = 1e-9);
        }
    }

    #[test]
    fn exhaustive_scan_symmetric_under_block_swap() {
        let (cross, y) = sim_two_qtl(100, 8, 35.0, &[(2, 0.6), (2, 0.6), (5, 0.6)], 12);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 35.0).unwrap();
        let rows: Vec<usize> = (0..100).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let fit = d.fit_traits(y.view()).unwrap();
        let p = 3;
        let order: Vec<usize> = (0..p).collect();
        let reversed: Vec<usize> = order.iter().rev().copied().collect();
        let mut scratch = fit.scratch();
        for c in 1..p {
            for i in 0..d.n_positions() {
                for j in 0..d.n_positions() {
                    let a = fit.lod2_eval(&order, c, i, j, &mut scratch);
                    let b = fit.lod2_eval(&reversed, p - c, j, i, &mut scratch);
                    assert!((a - b).abs() < 1e-9, "c={c} i={i} j={j}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn lod2_eval_matches_explicit_block_fit() {
        // pool residuals from two explicit block fits and compare with the
        // projection-algebra evaluation
        let (cross, y) = sim_two_qtl(90, 7, 30.0, &[(1, 0.6), (2, 0.4), (4, 0.5), (5, 0.3)], 63);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 30.0).unwrap();
        let rows: Vec<usize> = (0..90).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let fit = d.fit_traits(y.view()).unwrap();
        let order = vec![2usize, 0, 3, 1];
        let mut scratch = fit.scratch();
        for (c, i, j) in [(1usize, 0usize, 4usize), (2, 5, 1), (3, 2, 6)] {
            let got = fit.lod2_eval(&order, c, i, j, &mut scratch);

            let pick = |cols: &[usize]| {
                Array2::from_shape_fn((90, cols.len()), |(r, k)| y[(r, cols[k])])
            };
            let left_cols: Vec<usize> = order[..c].to_vec();
            let right_cols: Vec<usize> = order[c..].to_vec();
            let (ga_i, gd_i) = crate::scan::geno_codings(&gp, i, &rows);
            let (ga_j, gd_j) = crate::scan::geno_codings(&gp, j, &rows);
            let xi = FactoredDesign::new(
                build_full_design(&cross.covariates, &ga_i, &gd_i),
                COLLINEARITY_TOL,
            );
            let xj = FactoredDesign::new(
                build_full_design(&cross.covariates, &ga_j, &gd_j),
                COLLINEARITY_TOL,
            );
            let (_, r1) = xi.fit(pick(&left_cols).view());
            let (_, r2) = xj.fit(pick(&right_cols).view());
            let p = 4;
            let mut pooled = Array2::<f64>::zeros((p, p));
            let e1 = r1.t().dot(&r1);
            let e2 = r2.t().dot(&r2);
            let e12 = r1.t().dot(&r2);
            for a in 0..c {
                for b in 0..c {
                    pooled[(a, b)] = e1[(a, b)];
                }
                for b in c..p {
                    pooled[(a, b)] = e12[(a, b - c)];
                    pooled[(b, a)] = e12[(a, b - c)];
                }
            }
            for a in c..p {
                for b in c..p {
                    pooled[(a, b)] = e2[(a - c, b - c)];
                }
            }
            let ld = crate::linalg::log10_det_spd(pooled.view(), "oracle", "").unwrap();
            let expect = 45.0 * (fit.log10_det_rss0 - ld);
            assert!(
                (got - expect).abs() < 1e-8,
                "c={c} i={i} j={j}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn two_planted_qtl_recovered_with_correct_cut() {
        // 4 traits at 10 cM (marker 2), 4 traits at 30 cM (marker 6), a = 0.8
        let qtl: Vec<(usize, f64)> = (0..8)
            .map(|j| if j < 4 { (2, 0.8) } else { (6, 0.8) })
            .collect();
        let (cross, y) = sim_two_qtl(400, 9, 40.0, &qtl, 14);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 40.0).unwrap();
        let rows: Vec<usize> = (0..400).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let fit = d.fit_traits(y.view()).unwrap();
        let order = order_traits(&fit.univariate_peak_cm(), 3);
        let res = fit.test_2v1(&order, SearchMode::Exhaustive, 3).unwrap();
        assert_eq!(res.c_hat, 4);
        let (lo, hi) = if res.lambda1 <= res.lambda2 {
            (res.lambda1, res.lambda2)
        } else {
            (res.lambda2, res.lambda1)
        };
        assert!((lo - 10.0).abs() <= 5.0, "lambda near 10, got {lo}");
        assert!((hi - 30.0).abs() <= 5.0, "lambda near 30, got {hi}");
        assert!(res.lod_2v1 > 10.0);
        assert_abs_diff_eq!(res.lod_2v1, res.m2 - res.m1, epsilon = 1e-12);
        assert!(res.m2 >= res.m1 - 1e-9);
        let max_cut = res
            .per_cutpoint
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(res.m2, max_cut, epsilon = 0.0);
    }

    #[test]
    fn coordinate_matches_exhaustive_typically() {
        let mut agree = 0;
        let total = 20;
        for rep in 0..total {
            let qtl: Vec<(usize, f64)> = (0..6)
                .map(|j| if j < 3 { (3, 0.5) } else { (8, 0.5) })
                .collect();
            let (cross, y) = sim_two_qtl(150, 12, 55.0, &qtl, 100 + rep);
            let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
            let interval = GenomeInterval::new("1", 0.0, 55.0).unwrap();
            let rows: Vec<usize> = (0..150).collect();
            let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
            let fit = d.fit_traits(y.view()).unwrap();
            let order = order_traits(&fit.univariate_peak_cm(), rep);
            let ex = fit.test_2v1(&order, SearchMode::Exhaustive, rep).unwrap();
            let co = fit
                .test_2v1(&order, SearchMode::Coordinate { starts: 5 }, rep)
                .unwrap();
            assert!(co.m2 <= ex.m2 + 1e-9);
            if (co.m2 - ex.m2).abs() < 1e-6 {
                agree += 1;
            }
        }
        assert!(agree >= 18, "coordinate matched exhaustive in {agree}/{total}");
    }

    #[test]
    fn profiles_pass_through_maximum() {
        let qtl: Vec<(usize, f64)> = (0..5)
            .map(|j| if j < 2 { (2, 0.7) } else { (7, 0.7) })
            .collect();
        let (cross, y) = sim_two_qtl(200, 10, 45.0, &qtl, 21);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 45.0).unwrap();
        let rows: Vec<usize> = (0..200).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let fit = d.fit_traits(y.view()).unwrap();
        let order = order_traits(&fit.univariate_peak_cm(), 5);
        let res = fit.test_2v1(&order, SearchMode::Exhaustive, 5).unwrap();
        assert_abs_diff_eq!(res.profile_left[res.lambda1_idx], res.m2, epsilon = 1e-12);
        assert_abs_diff_eq!(res.profile_right[res.lambda2_idx], res.m2, epsilon = 1e-12);
        // the right profile peaks at the estimated second position
        let argmax = res
            .profile_right
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, res.lambda2_idx);
    }

    #[test]
    fn one_point_grid_degenerates_to_m1() {
        let (cross, y) = sim_two_qtl(80, 5, 40.0, &[(2, 0.5), (2, 0.5)], 31);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        // interval holding exactly one marker
        let interval = GenomeInterval::new("1", 19.0, 21.0).unwrap();
        let rows: Vec<usize> = (0..80).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        assert_eq!(d.n_positions(), 1);
        let fit = d.fit_traits(y.view()).unwrap();
        let res = fit.test_2v1(&[0, 1], SearchMode::Exhaustive, 0).unwrap();
        assert_abs_diff_eq!(res.m2, res.m1, epsilon = 1e-12);
        assert_eq!(res.profile_left, vec![res.m2]);
        assert_eq!(res.profile_right, vec![res.m2]);
    }

    #[test]
    fn cutpoint_search_matches_partition_oracle_small() {
        // p = 4, traits pre-sorted by true locus: compare the cut-point search
        // against an exhaustive search over all 2^(p-1) = 8 trait partitions
        let mut matches = 0;
        let total = 10;
        for rep in 0..total {
            let qtl: Vec<(usize, f64)> = (0..4)
                .map(|j| if j < 2 { (1, 0.9) } else { (4, 0.9) })
                .collect();
            let (cross, y) = sim_two_qtl(60, 6, 25.0, &qtl, 300 + rep);
            let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
            let interval = GenomeInterval::new("1", 0.0, 25.0).unwrap();
            let rows: Vec<usize> = (0..60).collect();
            let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
            let fit = d.fit_traits(y.view()).unwrap();
            let order = order_traits(&fit.univariate_peak_cm(), rep);
            let res = fit.test_2v1(&order, SearchMode::Exhaustive, rep).unwrap();

            // oracle: every bipartition with both sides non-empty, as an
            // ordered arrangement (subset first), scanned exhaustively
            let mut best_part = f64::NEG_INFINITY;
            for mask in 1u32..(1 << 4) - 1 {
                let left: Vec<usize> = (0..4).filter(|&j| mask & (1 << j) != 0).collect();
                let right: Vec<usize> = (0..4).filter(|&j| mask & (1 << j) == 0).collect();
                let arrangement: Vec<usize> =
                    left.iter().chain(right.iter()).copied().collect();
                let s = fit
                    .scan2_cut(&arrangement, left.len(), SearchMode::Exhaustive, 0)
                    .unwrap();
                if s.m2_c > best_part {
                    best_part = s.m2_c;
                }
            }
            assert!(res.m2 <= best_part + 1e-9);
            if (res.m2 - best_part).abs() < 1e-6 {
                matches += 1;
            }
        }
        assert!(matches >= 8, "cut-point search matched oracle in {matches}/{total}");
    }

    #[test]
    fn reduction_identity_p1_matches_univariate_scan() {
        let (cross, y) = sim_two_qtl(150, 10, 45.0, &[(4, 0.5)], 41);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 45.0).unwrap();
        let (curve, _, _) = mv_scan1(y.view(), &gp, &cross.covariates, &interval).unwrap();
        let vals: Vec<f64> = y.column(0).to_vec();
        let uni = scan1(&vals, "t", &gp, &cross.covariates, &ScanOptions::default()).unwrap();
        for (a, b) in curve.iter().zip(&uni.curves[0].lod) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn trait_cap_enforced() {
        let (cross, _) = sim_two_qtl(30, 5, 20.0, &[(1, 0.1)], 51);
        let gp = calc_genoprob(&cross, &marker_cfg()).unwrap();
        let interval = GenomeInterval::new("1", 0.0, 20.0).unwrap();
        let rows: Vec<usize> = (0..30).collect();
        let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).unwrap();
        let mut rng = seeded_rng(52, 0);
        let y = Array2::from_shape_fn((30, 28), |_| rng.gen_range(-1.0..1.0));
        assert!(d.fit_traits(y.view()).is_err());
    }
}
