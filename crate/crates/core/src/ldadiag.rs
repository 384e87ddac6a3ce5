//! Linear-discriminant diagnostic for hotspot dissection: fit discriminants
//! on the individuals with no recombination event in the interval, project
//! everyone (recombinants included), and report scatter data with optional
//! two-locus genotype labels.

use log::warn;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::cross::{Cross, Genotype};
use crate::error::{Error, Result};
use crate::genoprob::{classify_recombinants, impute_genotype, GenoProb, GenomeInterval, RecombinantClass};
use crate::linalg::{cholesky_lower, jacobi_eigh, solve_lower, solve_lower_transpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LdaClass {
    NonRecombinant(Genotype),
    Recombinant,
}

impl LdaClass {
    pub fn label(&self) -> String {
        match self {
            LdaClass::NonRecombinant(g) => g.as_str().to_string(),
            LdaClass::Recombinant => "recombinant".to_string(),
        }
    }
}

/// Discriminant coordinates for every complete-case individual, plus the
/// fitted basis and the class means in discriminant space.
#[derive(Debug, Clone)]
pub struct LdaProjection {
    /// Individual ids, in cross order, complete-case subset.
    pub ids: Vec<String>,
    /// Row indices into the cross for each projected individual.
    pub rows: Vec<usize>,
    pub coords: Vec<[f64; 2]>,
    pub class: Vec<LdaClass>,
    pub two_locus: Option<Vec<(Genotype, Genotype)>>,
    /// Traits used, in selection order.
    pub trait_ids: Vec<String>,
    /// p×2 discriminant directions (second column zero with two classes).
    pub basis: Array2<f64>,
    pub n_discriminants: usize,
    /// Genotype classes present among non-recombinants, with their means in
    /// discriminant space.
    pub class_means: Vec<(Genotype, [f64; 2])>,
}

/// Fit LDA on the non-recombinant individuals and project everyone.
///
/// `trait_ids` are the expression traits to use (typically the hotspot's top
/// 100 by LOD); rows missing any of them are dropped. `ridge` is added to the
/// diagonal of the pooled within-class covariance.
pub fn lda_fit_project(
    cross: &Cross,
    gp: &GenoProb,
    interval: &GenomeInterval,
    trait_ids: &[String],
    ridge: f64,
) -> Result<LdaProjection> {
    if trait_ids.is_empty() {
        return Err(Error::invalid("no traits selected for the diagnostic"));
    }
    let trait_cols: Vec<usize> = trait_ids
        .iter()
        .map(|id| {
            cross
                .trait_index(id)
                .ok_or_else(|| Error::invalid(format!("unknown trait {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let p = trait_cols.len();

    let classes_all = classify_recombinants(cross, gp, interval)?;

    // complete-case rows over the selected traits
    let rows: Vec<usize> = (0..cross.n_individuals())
        .filter(|&i| trait_cols.iter().all(|&j| !cross.phenotypes[(i, j)].is_nan()))
        .collect();
    if rows.is_empty() {
        return Err(Error::invalid("no individuals with complete data on the selected traits"));
    }
    let x = Array2::from_shape_fn((rows.len(), p), |(i, j)| {
        cross.phenotypes[(rows[i], trait_cols[j])]
    });

    // group the non-recombinants by genotype
    let mut members: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (i, &r) in rows.iter().enumerate() {
        if let RecombinantClass::NonRecombinant(g) = classes_all[r] {
            members[g.index()].push(i);
        }
    }
    let mut present: Vec<Genotype> = Vec::new();
    for g in Genotype::ALL {
        let size = members[g.index()].len();
        if size == 0 {
            warn!(
                "no non-recombinant individuals with genotype {g}; proceeding with fewer classes"
            );
        } else if size < 3 {
            return Err(Error::invalid(format!(
                "genotype class {g} has only {size} non-recombinant individuals; need at least 3"
            )));
        } else {
            present.push(g);
        }
    }
    if present.len() < 2 {
        return Err(Error::invalid("need at least two genotype classes among the non-recombinants"));
    }
    let n_disc = (present.len() - 1).min(2);

    // class means and the pooled within-class covariance
    let n_nr: usize = present.iter().map(|g| members[g.index()].len()).sum();
    let mut grand = Array1::<f64>::zeros(p);
    let mut means: Vec<Array1<f64>> = Vec::with_capacity(present.len());
    for &g in &present {
        let rows_g = &members[g.index()];
        let mut m = Array1::<f64>::zeros(p);
        for &i in rows_g {
            m += &x.row(i);
        }
        m /= rows_g.len() as f64;
        grand.scaled_add(rows_g.len() as f64, &m);
        means.push(m);
    }
    grand /= n_nr as f64;

    let mut within = Array2::<f64>::zeros((p, p));
    for (k, &g) in present.iter().enumerate() {
        for &i in &members[g.index()] {
            let d = &x.row(i) - &means[k];
            for a in 0..p {
                for b in a..p {
                    within[(a, b)] += d[a] * d[b];
                }
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            within[(a, b)] = within[(b, a)];
        }
    }
    let dof = (n_nr - present.len()).max(1) as f64;
    within /= dof;
    for a in 0..p {
        within[(a, a)] += ridge;
    }

    let l = cholesky_lower(within.view(), "within-class covariance").map_err(|_| {
        Error::Singular {
            context: "within-class covariance".into(),
            suggestion: "increase --ridge or reduce the number of traits".into(),
        }
    })?;

    // between-class structure: columns sqrt(n_k) (mean_k - grand mean),
    // whitened by the within factor; its top eigenvectors give the basis
    let k_classes = present.len();
    let mut h = Array2::<f64>::zeros((p, k_classes));
    for (k, &g) in present.iter().enumerate() {
        let w = (members[g.index()].len() as f64).sqrt();
        for a in 0..p {
            h[(a, k)] = w * (means[k][a] - grand[a]);
        }
    }
    let mut s = h.clone();
    solve_lower(&l, &mut s);
    let t = s.t().dot(&s);
    let (evals, evecs) = jacobi_eigh(t.view());

    let mut basis = Array2::<f64>::zeros((p, 2));
    for d in 0..n_disc {
        let lam = evals[d];
        if lam <= 1e-12 {
            break;
        }
        let u = evecs.column(d);
        let mut v = s.dot(&u); // eigenvector of the whitened between matrix
        let norm = v.dot(&v).sqrt();
        v /= norm;
        let mut a = Array2::from_shape_fn((p, 1), |(i, _)| v[i]);
        solve_lower_transpose(&l, &mut a);
        for i in 0..p {
            basis[(i, d)] = a[(i, 0)];
        }
    }

    // orient each discriminant so the highest-ordered class mean is at a
    // non-negative coordinate
    let orient_class = *present.last().unwrap();
    let orient_mean = &means[present.len() - 1];
    for d in 0..n_disc {
        let coord: f64 = (0..p)
            .map(|i| basis[(i, d)] * (orient_mean[i] - grand[i]))
            .sum();
        if coord < 0.0 {
            for i in 0..p {
                basis[(i, d)] = -basis[(i, d)];
            }
        }
    }
    let _ = orient_class;

    // project everyone, centered at the non-recombinant grand mean
    let mut coords = Vec::with_capacity(rows.len());
    for i in 0..rows.len() {
        let mut c = [0.0_f64; 2];
        for d in 0..n_disc {
            c[d] = (0..p)
                .map(|a| basis[(a, d)] * (x[(i, a)] - grand[a]))
                .sum();
        }
        coords.push(c);
    }
    let class: Vec<LdaClass> = rows
        .iter()
        .map(|&r| match classes_all[r] {
            RecombinantClass::NonRecombinant(g) => LdaClass::NonRecombinant(g),
            RecombinantClass::Recombinant => LdaClass::Recombinant,
        })
        .collect();

    let class_means: Vec<(Genotype, [f64; 2])> = present
        .iter()
        .enumerate()
        .map(|(k, &g)| {
            let mut c = [0.0_f64; 2];
            for d in 0..n_disc {
                c[d] = (0..p)
                    .map(|a| basis[(a, d)] * (means[k][a] - grand[a]))
                    .sum();
            }
            (g, c)
        })
        .collect();

    Ok(LdaProjection {
        ids: rows.iter().map(|&r| cross.individuals[r].clone()).collect(),
        rows,
        coords,
        class,
        two_locus: None,
        trait_ids: trait_ids.to_vec(),
        basis,
        n_discriminants: n_disc,
        class_means,
    })
}

/// Imputed genotypes at two grid positions, per individual.
pub fn two_locus_labels(
    gp: &GenoProb,
    lambda1_flat: usize,
    lambda2_flat: usize,
) -> Vec<(Genotype, Genotype)> {
    let g1 = impute_genotype(gp, lambda1_flat);
    let g2 = impute_genotype(gp, lambda2_flat);
    g1.into_iter().zip(g2).collect()
}

impl LdaProjection {
    /// Attach two-locus genotype labels (already aligned to the full cross
    /// individual order) to the projected subset.
    pub fn with_two_locus(mut self, labels: &[(Genotype, Genotype)]) -> Self {
        self.two_locus = Some(self.rows.iter().map(|&r| labels[r]).collect());
        self
    }

    /// Euclidean distance from each individual to the nearest class mean in
    /// discriminant space.
    pub fn distance_to_nearest_mean(&self) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| {
                self.class_means
                    .iter()
                    .map(|(_, m)| {
                        let dx = c[0] - m[0];
                        let dy = c[1] - m[1];
                        (dx * dx + dy * dy).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Euclidean distance to the mean of a given genotype class.
    pub fn distance_to_class_mean(&self, g: Genotype) -> Option<Vec<f64>> {
        let m = self.class_means.iter().find(|(c, _)| *c == g)?.1;
        Some(
            self.coords
                .iter()
                .map(|c| {
                    let dx = c[0] - m[0];
                    let dy = c[1] - m[1];
                    (dx * dx + dy * dy).sqrt()
                })
                .collect(),
        )
    }
}
