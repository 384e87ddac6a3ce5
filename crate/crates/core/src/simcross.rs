//! F2 intercross simulation and the power study for the two-versus-one-QTL
//! test: simulated genotypes under independent-gap meiosis, additive trait
//! models, and replicated dissection with bootstrap p-values.

use log::info;
use ndarray::Array2;
use rand::Rng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cross::{ChromosomeMap, CovariateSet, Cross, GeneticMap, Genotype, Marker};
use crate::error::{Error, Result};
use crate::genoprob::{calc_genoprob, GenomeInterval, HmmConfig, MapFunction};
use crate::mvdissect::{order_traits, seeded_rng, Dissector, SearchMode};
use crate::signif::{parametric_bootstrap, pvalue};

/// Equally spaced markers with endpoints at 0 and `length_cm`.
pub fn equally_spaced_map(n_markers: usize, length_cm: f64, chr: &str) -> GeneticMap {
    assert!(n_markers >= 2);
    let gap = length_cm / (n_markers - 1) as f64;
    GeneticMap::new(vec![ChromosomeMap {
        name: chr.to_string(),
        markers: (0..n_markers)
            .map(|i| Marker {
                id: format!("m{:04}", i + 1),
                pos: gap * i as f64,
            })
            .collect(),
    }])
    .expect("equally spaced map is valid")
}

/// Simulate F2 genotypes: two independent gametes per individual, each with a
/// uniform first allele and allele switches across adjacent markers with
/// probability equal to the gap's recombination fraction (no interference
/// between gaps).
pub fn sim_f2(
    n_ind: usize,
    map: &GeneticMap,
    map_function: MapFunction,
    seed: u64,
) -> Array2<Option<Genotype>> {
    let n_markers = map.total_markers();
    let mut recfracs: Vec<Option<f64>> = Vec::with_capacity(n_markers);
    for chr in &map.chromosomes {
        recfracs.push(None); // chromosome start: no linkage to the previous gamete segment
        for w in chr.markers.windows(2) {
            recfracs.push(Some(
                crate::genoprob::map_to_recfrac(w[1].pos - w[0].pos, map_function)
                    .expect("non-negative gap"),
            ));
        }
    }
    debug_assert_eq!(recfracs.len(), n_markers);

    let mut genotypes = Array2::from_elem((n_ind, n_markers), None);
    let mut rng = seeded_rng(seed, 0);
    let gamete = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<u8> {
        let mut alleles = Vec::with_capacity(n_markers);
        let mut current = 0u8;
        for r in &recfracs {
            match r {
                None => current = rng.gen_range(0..2),
                Some(r) => {
                    if rng.gen_bool(*r) {
                        current ^= 1;
                    }
                }
            }
            alleles.push(current);
        }
        alleles
    };
    for i in 0..n_ind {
        let g1 = gamete(&mut rng);
        let g2 = gamete(&mut rng);
        for m in 0..n_markers {
            let geno = match g1[m] + g2[m] {
                0 => Genotype::BB,
                1 => Genotype::BR,
                _ => Genotype::RR,
            };
            genotypes[(i, m)] = Some(geno);
        }
    }
    genotypes
}

/// Wrap simulated genotypes in a `Cross` with no phenotypes or covariates.
pub fn cross_from_genotypes(genotypes: Array2<Option<Genotype>>, map: GeneticMap) -> Cross {
    let n = genotypes.nrows();
    Cross {
        individuals: (1..=n).map(|i| format!("sim{i:04}")).collect(),
        genotypes,
        map,
        phenotypes: Array2::zeros((n, 0)),
        trait_ids: Vec::new(),
        trait_meta: Vec::new(),
        covariates: CovariateSet::empty(n),
    }
}

/// One cell of the power study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerScenario {
    pub n_ind: usize,
    pub n_markers: usize,
    pub chr_length: f64,
    /// Traits assigned to the left and right QTL; their sum is p.
    pub split: (usize, usize),
    /// Additive effect of each QTL.
    pub a: f64,
    /// Distance between the QTL in cM; 0 is the null of a single QTL.
    pub distance: f64,
    pub n_reps: usize,
    pub null_reps: usize,
    pub seed: u64,
}

impl Default for PowerScenario {
    fn default() -> Self {
        PowerScenario {
            n_ind: 500,
            n_markers: 100,
            chr_length: 100.0,
            split: (5, 5),
            a: 0.5,
            distance: 10.0,
            n_reps: 100,
            null_reps: 1000,
            seed: 1,
        }
    }
}

impl PowerScenario {
    pub fn p(&self) -> usize {
        self.split.0 + self.split.1
    }

    pub fn validate(&self) -> Result<()> {
        if self.split.1 == 0 || self.p() < 2 {
            return Err(Error::invalid("the trait split needs a non-empty right group and at least 2 traits"));
        }
        if self.distance < 0.0 {
            return Err(Error::invalid("QTL distance must be non-negative"));
        }
        if self.n_markers < 2 {
            return Err(Error::invalid("need at least 2 markers"));
        }
        Ok(())
    }

    fn map(&self) -> GeneticMap {
        equally_spaced_map(self.n_markers, self.chr_length, "1")
    }

    /// Marker indices nearest to the left QTL (at half the chromosome) and to
    /// the right QTL (`distance` further along).
    fn qtl_markers(&self) -> (usize, usize) {
        let gap = self.chr_length / (self.n_markers - 1) as f64;
        let snap = |pos: f64| -> usize {
            ((pos / gap).round() as usize).min(self.n_markers - 1)
        };
        let left = self.chr_length / 2.0;
        (snap(left), snap(left + self.distance))
    }
}

/// Additive trait matrix: trait j is `a * g + e` with `g` coded (-1, 0, +1)
/// at that trait's QTL and standard-normal residuals.
pub fn sim_traits(
    genotypes: &Array2<Option<Genotype>>,
    scenario: &PowerScenario,
    seed: u64,
) -> Array2<f64> {
    let (left_m, right_m) = scenario.qtl_markers();
    let n = genotypes.nrows();
    let p = scenario.p();
    let mut rng = seeded_rng(seed, 1);
    let mut y = Array2::zeros((n, p));
    for j in 0..p {
        let m = if j < scenario.split.0 { left_m } else { right_m };
        for i in 0..n {
            let g = genotypes[(i, m)].unwrap().index() as f64 - 1.0;
            let e: f64 = rand_distr::StandardNormal.sample(&mut rng);
            y[(i, j)] = scenario.a * g + e;
        }
    }
    y
}

/// Per-replicate record of one power-study analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerReplicate {
    pub rep: usize,
    pub lod_2v1: f64,
    pub pvalue: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub c_hat: usize,
    pub m1: f64,
    pub lambda_1qtl: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerResult {
    pub scenario: PowerScenario,
    /// Fraction of replicates with p <= 0.05.
    pub power: f64,
    pub replicates: Vec<PowerReplicate>,
}

/// Analysis settings for the power study: genotypes are simulated noise-free
/// at the markers, so the scan runs on the marker grid with a zero error
/// rate and the same no-interference map function as the simulator.
fn power_hmm_config(scenario: &PowerScenario) -> HmmConfig {
    HmmConfig {
        error_rate: 0.0,
        map_function: MapFunction::Haldane,
        // a step wider than the marker gap keeps the grid at the markers
        step: 2.0 * scenario.chr_length / (scenario.n_markers - 1) as f64,
    }
}

/// Run one scenario: simulate `n_reps` crosses, dissect each over the whole
/// chromosome, and compute bootstrap p-values with `null_reps` replicates.
pub fn run_power(scenario: &PowerScenario, mode: SearchMode) -> Result<PowerResult> {
    scenario.validate()?;
    let map = scenario.map();
    let interval = GenomeInterval::new("1", 0.0, scenario.chr_length)?;
    let hmm = power_hmm_config(scenario);

    let replicates: Vec<PowerReplicate> = (0..scenario.n_reps)
        .into_par_iter()
        .map(|rep| -> Result<PowerReplicate> {
            let rep_seed = scenario
                .seed
                .wrapping_mul(0x0100_0000_01B3)
                .wrapping_add(rep as u64 + 1);
            let genotypes = sim_f2(scenario.n_ind, &map, MapFunction::Haldane, rep_seed);
            let y = sim_traits(&genotypes, scenario, rep_seed);
            let cross = cross_from_genotypes(genotypes, map.clone());
            let gp = calc_genoprob(&cross, &hmm)?;
            let rows: Vec<usize> = (0..scenario.n_ind).collect();
            let d = Dissector::new(&gp, &cross.covariates, &rows, &interval)?;
            let fit = d.fit_traits(y.view())?;
            let order = order_traits(&fit.univariate_peak_cm(), rep_seed);
            let res = fit.test_2v1(&order, mode, rep_seed)?;
            let nulls = parametric_bootstrap(&d, &fit, scenario.null_reps, rep_seed, mode)?;
            let p = pvalue(res.lod_2v1, &nulls, false)?;
            info!(
                "power replicate {rep}: lod_2v1={:.2} p={:.3}",
                res.lod_2v1, p
            );
            Ok(PowerReplicate {
                rep,
                lod_2v1: res.lod_2v1,
                pvalue: p,
                lambda1: res.lambda1,
                lambda2: res.lambda2,
                c_hat: res.c_hat,
                m1: res.m1,
                lambda_1qtl: res.lambda_1qtl,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let power = replicates.iter().filter(|r| r.pvalue <= 0.05).count() as f64
        / replicates.len().max(1) as f64;
    Ok(PowerResult {
        scenario: scenario.clone(),
        power,
        replicates,
    })
}
