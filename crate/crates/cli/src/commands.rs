//! The five subcommands. Loading and validation errors exit 2; failures in
//! the analysis itself exit 1.

use std::path::Path;

use log::{info, warn};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use eqtl_dissect::cross::TraitMeta;
use eqtl_dissect::hotspot::{CountCurve, PeakRecord};
use eqtl_dissect::scan::TraitScan;
use eqtl_dissect::{
    calc_genoprob, count_trans_eqtl, define_hotspots, insert_pseudomarkers, lda_fit_project,
    load_cross, parametric_bootstrap, pvalue, run_power, scan_all, stratified_permutation,
    stratified_permutation_with_covariates, two_locus_labels, CovarSpec, Cross, Dissector, Error,
    GenoProb, GenomeInterval, HmmConfig, HotspotConfig, LdaClass, NullMethod, NullReplicateSet,
    PowerScenario, Result, ScanOptions, TwoVsOneResult,
};

use crate::output::{write_csv, write_json};
use crate::{Cli, CliError, CliResult, Command, DissectArgs, InputArgs, LdaArgs, PhaseExt};

pub fn run(cli: &Cli) -> CliResult<()> {
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| {
        CliError::Input(Error::Io {
            path: cli.out_dir.clone(),
            source: e,
        })
    })?;
    match &cli.command {
        Command::Scan(args) => cmd_scan(cli, args),
        Command::Hotspots(args) => cmd_hotspots(cli, args),
        Command::Dissect(args) => cmd_dissect(cli, args),
        Command::Lda(args) => cmd_lda(cli, args),
        Command::Power(args) => cmd_power(cli, args),
    }
}

fn hmm_config(input: &InputArgs) -> HmmConfig {
    HmmConfig {
        error_rate: input.error_rate,
        map_function: input.map_function,
        step: input.step,
    }
}

fn load_inputs(input: &InputArgs) -> CliResult<(Cross, GenoProb)> {
    let spec = CovarSpec {
        additive: input.additive.clone(),
        interactive: input.interactive.clone(),
    };
    let mut cross = load_cross(
        &input.geno,
        &input.map,
        &input.pheno,
        input.covar.as_deref(),
        &spec,
        input.trait_meta.as_deref(),
    )
    .input_err()?;
    if !input.no_normalize {
        cross.quantile_normalize_all().input_err()?;
    }
    let cfg = hmm_config(input);
    cfg.validate().input_err()?;
    let gp = match &input.genoprob_cache {
        Some(path) if path.exists() => {
            let cached = GenoProb::load_cache(path).input_err()?;
            if cached.matches(&cross, &cfg) {
                info!("loaded genotype probabilities from {}", path.display());
                cached
            } else {
                warn!(
                    "cache {} does not match the inputs; recomputing",
                    path.display()
                );
                let gp = calc_genoprob(&cross, &cfg).compute_err()?;
                gp.save_cache(path).compute_err()?;
                gp
            }
        }
        Some(path) => {
            let gp = calc_genoprob(&cross, &cfg).compute_err()?;
            gp.save_cache(path).compute_err()?;
            gp
        }
        None => calc_genoprob(&cross, &cfg).compute_err()?,
    };
    Ok((cross, gp))
}

fn parse_interval(s: &str) -> Result<GenomeInterval> {
    let (chr, range) = s
        .split_once(':')
        .ok_or_else(|| Error::Invalid(format!("interval `{s}` is not chr:lo-hi")))?;
    let (lo, hi) = range
        .split_once('-')
        .ok_or_else(|| Error::Invalid(format!("interval `{s}` is not chr:lo-hi")))?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| Error::Invalid(format!("bad interval bound `{lo}`")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| Error::Invalid(format!("bad interval bound `{hi}`")))?;
    GenomeInterval::new(chr, lo, hi)
}

// --- scan -------------------------------------------------------------------

fn cmd_scan(cli: &Cli, args: &crate::ScanArgs) -> CliResult<()> {
    let (cross, gp) = load_inputs(&args.input)?;
    let scans = scan_all(&cross, &gp, args.lod_min, &ScanOptions::default()).compute_err()?;
    let peaks: Vec<PeakRecord> = scans.iter().map(PeakRecord::from_scan).collect();
    write_json(&cli.out_dir.join("scan_peaks.json"), cli, "peaks", &peaks).compute_err()?;
    info!("{} peaks with LOD >= {}", peaks.len(), args.lod_min);
    if args.curves {
        let mut rows = Vec::new();
        for s in &scans {
            for curve in &s.curves {
                for (pos, lod) in curve.positions.iter().zip(&curve.lod) {
                    rows.push(format!("{},{},{},{}", s.trait_id, curve.chr, pos, lod));
                }
            }
        }
        write_csv(
            &cli.out_dir.join("scan_curves.csv"),
            cli,
            "trait,chr,pos,lod",
            &rows,
        )
        .compute_err()?;
    }
    Ok(())
}

// --- hotspots -----------------------------------------------------------------

#[derive(Deserialize)]
struct PeaksFile {
    peaks: Vec<PeakRecord>,
}

#[derive(Serialize)]
struct HotspotReport {
    chr: String,
    lo: f64,
    hi: f64,
    peak_pos: f64,
    peak_count: u32,
    traits: Vec<eqtl_dissect::hotspot::HotspotTrait>,
}

fn cmd_hotspots(cli: &Cli, args: &crate::HotspotsArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.peaks)
        .map_err(|e| {
            CliError::Input(Error::Io {
                path: args.peaks.clone(),
                source: e,
            })
        })?;
    let peaks: PeaksFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(Error::Invalid(format!("bad peaks file: {e}"))))?;
    let map = load_map_only(&args.map).input_err()?;
    let trait_meta = match &args.trait_meta {
        None => Vec::new(),
        Some(p) => load_trait_meta(p).input_err()?,
    };
    let grid = insert_pseudomarkers(&map, args.step).input_err()?;
    let cfg = HotspotConfig {
        lod_min: args.lod_min,
        window: args.window,
        count_min: args.count_min,
        pad: args.pad,
        local_exclusion: args.local_exclusion,
    };
    let counts = count_trans_eqtl(&peaks.peaks, &trait_meta, &grid, &cfg);
    let hotspots = define_hotspots(&counts, &peaks.peaks, &trait_meta, &cfg);
    let report: Vec<HotspotReport> = hotspots
        .iter()
        .map(|h| HotspotReport {
            chr: h.chr.clone(),
            lo: h.lo,
            hi: h.hi,
            peak_pos: h.center,
            peak_count: h.peak_count,
            traits: h.traits.clone(),
        })
        .collect();
    if report.is_empty() {
        info!("no hotspot exceeds count {}", args.count_min);
    }
    write_json(&cli.out_dir.join("hotspots.json"), cli, "hotspots", &report).compute_err()?;
    let rows: Vec<String> = counts
        .iter()
        .flat_map(|c: &CountCurve| {
            c.positions
                .iter()
                .zip(&c.counts)
                .map(|(pos, count)| format!("{},{},{}", c.chr, pos, count))
                .collect::<Vec<_>>()
        })
        .collect();
    write_csv(
        &cli.out_dir.join("hotspot_counts.csv"),
        cli,
        "chr,pos,count",
        &rows,
    )
    .compute_err()?;
    Ok(())
}

fn load_map_only(path: &Path) -> Result<eqtl_dissect::GeneticMap> {
    // reuse the cross loader's map parser through a tiny shim
    eqtl_dissect::cross::load_map_csv(path)
}

fn load_trait_meta(path: &Path) -> Result<Vec<TraitMeta>> {
    eqtl_dissect::cross::load_trait_meta_csv(path)
}

// --- dissect ------------------------------------------------------------------

/// Trait columns qualifying for dissection of `interval`: peak inside the
/// interval with LOD at or above the threshold, not classifiable as local,
/// and (by default) not annotated to the hotspot chromosome; ordered by
/// descending LOD, capped at `top`.
fn interval_trait_columns(
    cross: &Cross,
    scans: &[TraitScan],
    interval: &GenomeInterval,
    lod_min: f64,
    local_exclusion: f64,
    keep_same_chr: bool,
    top: usize,
) -> Vec<usize> {
    let mut cands: Vec<(&TraitScan, usize)> = scans
        .iter()
        .filter_map(|s| cross.trait_index(&s.trait_id).map(|col| (s, col)))
        .filter(|(s, col)| {
            if s.peak.chr != interval.chr
                || s.peak.pos < interval.lo
                || s.peak.pos > interval.hi
                || s.peak.lod < lod_min
            {
                return false;
            }
            let meta = &cross.trait_meta[*col];
            match (&meta.chr, meta.pos) {
                (Some(chr), Some(pos)) => {
                    if chr == &interval.chr && (pos - s.peak.pos).abs() < local_exclusion {
                        return false; // local eQTL
                    }
                    if !keep_same_chr && chr == &interval.chr {
                        return false;
                    }
                    true
                }
                (Some(chr), None) => keep_same_chr || chr != &interval.chr,
                _ => true,
            }
        })
        .collect();
    cands.sort_by(|a, b| {
        b.0.peak
            .lod
            .partial_cmp(&a.0.peak.lod)
            .unwrap()
            .then_with(|| a.0.trait_id.cmp(&b.0.trait_id))
    });
    cands.into_iter().take(top).map(|(_, col)| col).collect()
}

#[derive(Serialize)]
struct DissectTraitReport {
    id: String,
    side: &'static str,
    univariate_pos: f64,
    univariate_lod: f64,
}

#[derive(Serialize)]
struct DissectReport {
    #[serde(rename = "M1")]
    m1: f64,
    lambda_1qtl: f64,
    #[serde(rename = "M2")]
    m2: f64,
    c_hat: usize,
    lambda1: f64,
    lambda2: f64,
    lod_2v1: f64,
    seed: u64,
    per_cutpoint: Vec<f64>,
    profiles: ProfilesReport,
    traits: Vec<DissectTraitReport>,
    pvalue: Option<f64>,
}

#[derive(Serialize)]
struct ProfilesReport {
    positions: Vec<f64>,
    lod1: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

#[derive(Serialize)]
struct SignificanceReport {
    method: NullMethod,
    n_reps: usize,
    seed: u64,
    observed: f64,
    pvalue: f64,
    null_stats: Vec<f64>,
}

fn dissect_report(
    trait_ids: &[String],
    res: &TwoVsOneResult,
    pval: Option<f64>,
    seed: u64,
) -> DissectReport {
    let traits = res
        .trait_order
        .iter()
        .enumerate()
        .map(|(rank, &col)| DissectTraitReport {
            id: trait_ids[col].clone(),
            side: if rank < res.c_hat { "left" } else { "right" },
            univariate_pos: res.univariate_peak_pos[col],
            univariate_lod: res.univariate_peak_lod[col],
        })
        .collect();
    DissectReport {
        m1: res.m1,
        lambda_1qtl: res.lambda_1qtl,
        m2: res.m2,
        c_hat: res.c_hat,
        lambda1: res.lambda1,
        lambda2: res.lambda2,
        lod_2v1: res.lod_2v1,
        seed,
        per_cutpoint: res.per_cutpoint.clone(),
        profiles: ProfilesReport {
            positions: res.positions.clone(),
            lod1: res.lod1_curve.clone(),
            left: res.profile_left.clone(),
            right: res.profile_right.clone(),
        },
        traits,
        pvalue: pval,
    }
}

fn cmd_dissect(cli: &Cli, args: &DissectArgs) -> CliResult<()> {
    let interval = parse_interval(&args.interval).input_err()?;
    let mode = crate::parse_search_mode(&args.mode, args.starts).input_err()?;
    let method: Option<NullMethod> = match &args.significance {
        None => None,
        Some(s) => Some(s.parse().input_err()?),
    };
    let (cross, gp) = load_inputs(&args.input)?;

    let scans = scan_all(&cross, &gp, args.lod_min, &ScanOptions::default()).compute_err()?;
    let cols = interval_trait_columns(
        &cross,
        &scans,
        &interval,
        args.lod_min,
        args.local_exclusion,
        args.keep_same_chr,
        args.top,
    );
    if cols.len() < 2 {
        return Err(CliError::Compute(Error::Invalid(format!(
            "only {} traits qualify in {interval}; need at least 2",
            cols.len()
        ))));
    }
    info!("dissecting {} traits in {interval}", cols.len());

    let y_full = Array2::from_shape_fn((cross.n_individuals(), cols.len()), |(i, j)| {
        cross.phenotypes[(i, cols[j])]
    });
    let rows = eqtl_dissect::complete_case_rows(y_full.view());
    let y = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| y_full[(rows[i], j)]);

    let d = Dissector::new(&gp, &cross.covariates, &rows, &interval).compute_err()?;
    let fit = d.fit_traits(y.view()).compute_err()?;
    let order = eqtl_dissect::order_traits(&fit.univariate_peak_cm(), cli.seed);
    let mut res = fit.test_2v1(&order, mode, cli.seed).compute_err()?;

    let mut signif_report = None;
    if let Some(method) = method {
        let nulls: NullReplicateSet = match method {
            NullMethod::Bootstrap => {
                parametric_bootstrap(&d, &fit, args.n_reps, cli.seed, mode).compute_err()?
            }
            NullMethod::Permutation => {
                if args.permute_covariates {
                    stratified_permutation_with_covariates(
                        &gp,
                        &cross.covariates,
                        &rows,
                        &interval,
                        y.view(),
                        res.lambda_1qtl_idx,
                        args.n_reps,
                        cli.seed,
                        mode,
                    )
                    .compute_err()?
                } else {
                    stratified_permutation(
                        &d,
                        y.view(),
                        res.lambda_1qtl_idx,
                        args.n_reps,
                        cli.seed,
                        mode,
                    )
                    .compute_err()?
                }
            }
        };
        let p = pvalue(res.lod_2v1, &nulls, args.plus_one).compute_err()?;
        res.pvalue = Some(p);
        signif_report = Some(SignificanceReport {
            method,
            n_reps: nulls.n_reps,
            seed: nulls.seed,
            observed: res.lod_2v1,
            pvalue: p,
            null_stats: nulls.stats,
        });
    }

    let trait_ids: Vec<String> = cols.iter().map(|&c| cross.trait_ids[c].clone()).collect();
    let report = dissect_report(&trait_ids, &res, res.pvalue, cli.seed);
    write_json(&cli.out_dir.join("dissect.json"), cli, "dissection", &report).compute_err()?;
    if let Some(s) = signif_report {
        write_json(&cli.out_dir.join("significance.json"), cli, "significance", &s)
            .compute_err()?;
    }
    Ok(())
}

// --- lda ------------------------------------------------------------------------

fn cmd_lda(cli: &Cli, args: &LdaArgs) -> CliResult<()> {
    let interval = parse_interval(&args.interval).input_err()?;
    let (cross, gp) = load_inputs(&args.input)?;
    let scans = scan_all(&cross, &gp, args.lod_min, &ScanOptions::default()).compute_err()?;
    let cols = interval_trait_columns(
        &cross,
        &scans,
        &interval,
        args.lod_min,
        args.local_exclusion,
        args.keep_same_chr,
        args.top,
    );
    if cols.is_empty() {
        return Err(CliError::Compute(Error::Invalid(format!(
            "no traits qualify in {interval}"
        ))));
    }
    let trait_ids: Vec<String> = cols.iter().map(|&c| cross.trait_ids[c].clone()).collect();
    let mut proj =
        lda_fit_project(&cross, &gp, &interval, &trait_ids, args.ridge).compute_err()?;

    if let (Some(l1), Some(l2)) = (args.lambda1, args.lambda2) {
        let chr_grid = gp
            .chromosome(&interval.chr)
            .ok_or_else(|| CliError::Input(Error::Invalid(format!(
                "no grid for chromosome {}",
                interval.chr
            ))))?;
        let nearest = |target: f64| -> usize {
            let mut best = 0;
            for (k, p) in chr_grid.points.iter().enumerate() {
                if (p.pos - target).abs() < (chr_grid.points[best].pos - target).abs() {
                    best = k;
                }
            }
            chr_grid.offset + best
        };
        let labels = two_locus_labels(&gp, nearest(l1), nearest(l2));
        proj = proj.with_two_locus(&labels);
    }

    let rows: Vec<String> = proj
        .ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let class = match proj.class[k] {
                LdaClass::NonRecombinant(g) => g.as_str().to_string(),
                LdaClass::Recombinant => "recombinant".to_string(),
            };
            let (g1, g2) = match &proj.two_locus {
                Some(labels) => (
                    labels[k].0.as_str().to_string(),
                    labels[k].1.as_str().to_string(),
                ),
                None => ("NA".to_string(), "NA".to_string()),
            };
            format!(
                "{},{},{},{},{},{}",
                id, proj.coords[k][0], proj.coords[k][1], class, g1, g2
            )
        })
        .collect();
    write_csv(
        &cli.out_dir.join("lda.csv"),
        cli,
        "id,ld1,ld2,class,geno_l1,geno_l2",
        &rows,
    )
    .compute_err()?;
    Ok(())
}

// --- power -----------------------------------------------------------------------

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("bad {what} value `{t}`")))
        })
        .collect()
}

fn parse_split(s: &str) -> Result<(usize, usize)> {
    let (l, r) = s
        .split_once(',')
        .ok_or_else(|| Error::Invalid(format!("split `{s}` is not left,right")))?;
    let l = l
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("bad split `{s}`")))?;
    let r = r
        .trim()
        .parse()
        .map_err(|_| Error::Invalid(format!("bad split `{s}`")))?;
    Ok((l, r))
}

fn cmd_power(cli: &Cli, args: &crate::PowerArgs) -> CliResult<()> {
    let a_values = parse_list(&args.a, "effect").input_err()?;
    let distances = parse_list(&args.distance, "distance").input_err()?;
    let split = parse_split(&args.split).input_err()?;
    let mode = crate::parse_search_mode(&args.mode, args.starts).input_err()?;

    let mut rep_rows = Vec::new();
    let mut summary_rows = Vec::new();
    for &a in &a_values {
        for &distance in &distances {
            let scenario = PowerScenario {
                n_ind: args.n_ind,
                n_markers: args.n_markers,
                chr_length: args.chr_length,
                split,
                a,
                distance,
                n_reps: args.n_reps,
                null_reps: args.null_reps,
                seed: cli.seed,
            };
            scenario.validate().input_err()?;
            let id = format!("a{a}_d{distance}");
            info!("power cell {id}: {} replicates", scenario.n_reps);
            let result = run_power(&scenario, mode).compute_err()?;
            for r in &result.replicates {
                rep_rows.push(format!(
                    "{},{},{},{},{}/{},{},{},{},{},{},{}",
                    id,
                    a,
                    distance,
                    scenario.p(),
                    split.0,
                    split.1,
                    r.rep,
                    r.lod_2v1,
                    r.pvalue,
                    r.lambda1,
                    r.lambda2,
                    r.c_hat
                ));
            }
            let null_note = if distance == 0.0 { "null" } else { "alt" };
            summary_rows.push(format!(
                "{},{},{},{},{}/{},{},{},{},{}",
                id,
                a,
                distance,
                scenario.p(),
                split.0,
                split.1,
                result.power,
                scenario.n_reps,
                scenario.null_reps,
                null_note
            ));
        }
    }
    write_csv(
        &cli.out_dir.join("power_replicates.csv"),
        cli,
        "scenario_id,a,distance,p,split,rep,lod_2v1,pvalue,lambda1,lambda2,c_hat",
        &rep_rows,
    )
    .compute_err()?;
    write_csv(
        &cli.out_dir.join("power_summary.csv"),
        cli,
        "scenario_id,a,distance,p,split,power,n_reps,null_reps,hypothesis",
        &summary_rows,
    )
    .compute_err()?;
    Ok(())
}
