//! Dissection of trans-eQTL hotspots in an F2 intercross.
//!
//! The pipeline: load a cross ([`cross`]), compute conditional genotype
//! probabilities on a pseudomarker grid ([`genoprob`]), run single-trait
//! Haley-Knott genome scans ([`scan`]), find trans-eQTL hotspots
//! ([`hotspot`]), and then ask whether a hotspot harbors one or two causal
//! loci — with a formal multivariate likelihood test ([`mvdissect`]) whose
//! significance comes from a parametric bootstrap or stratified permutation
//! ([`signif`]), and with a linear-discriminant diagnostic comparing
//! recombinant to non-recombinant individuals ([`ldadiag`]). A simulation
//! harness ([`simcross`]) reproduces the test's power study.

pub mod cross;
pub mod error;
pub mod genoprob;
pub mod hotspot;
pub mod ldadiag;
pub mod linalg;
pub mod mvdissect;
pub mod scan;
pub mod signif;
pub mod simcross;

pub use cross::{load_cross, quantile_normalize, CovarSpec, CovariateSet, Cross, GeneticMap, Genotype};
pub use error::{Error, Result};
pub use genoprob::{
    calc_genoprob, classify_recombinants, impute_genotype, insert_pseudomarkers, map_to_recfrac,
    GenoProb, GenomeInterval, HmmConfig, MapFunction, RecombinantClass,
};
pub use hotspot::{count_trans_eqtl, define_hotspots, select_top_traits, HotspotConfig, HotspotInterval};
pub use ldadiag::{lda_fit_project, two_locus_labels, LdaClass, LdaProjection};
pub use mvdissect::{
    complete_case_rows, mv_fit, mv_lod, mv_scan1, mv_scan2_cut, order_traits, test_2v1, Dissector,
    FittedGrid, MvModelFit, SearchMode, TwoVsOneResult,
};
pub use scan::{estimate_effects, scan1, scan_all, signed_lod, ScanOptions, TraitScan};
pub use signif::{
    parametric_bootstrap, pvalue, stratified_permutation, stratified_permutation_with_covariates,
    NullMethod, NullReplicateSet,
};
pub use simcross::{run_power, sim_f2, sim_traits, PowerResult, PowerScenario};
