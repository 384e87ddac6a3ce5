//! Conditional genotype probabilities on a pseudomarker grid, computed with a
//! three-state hidden Markov model over observed marker genotypes, plus
//! genotype imputation and recombinant classification within an interval.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use log::warn;
use ndarray::Array3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cross::{Cross, GeneticMap, Genotype};
use crate::error::{Error, Result};

/// Map-function choice for converting genetic distance to recombination
/// fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapFunction {
    Haldane,
    CarterFalconer,
}

impl std::str::FromStr for MapFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haldane" => Ok(MapFunction::Haldane),
            "carter-falconer" | "carter_falconer" => Ok(MapFunction::CarterFalconer),
            other => Err(Error::invalid(format!("unknown map function `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HmmConfig {
    /// Genotyping error rate.
    pub error_rate: f64,
    pub map_function: MapFunction,
    /// Maximum spacing between adjacent grid positions, in cM.
    pub step: f64,
}

impl Default for HmmConfig {
    fn default() -> Self {
        HmmConfig {
            error_rate: 0.002,
            map_function: MapFunction::CarterFalconer,
            step: 0.5,
        }
    }
}

impl HmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.error_rate) {
            return Err(Error::invalid(format!(
                "error rate {} outside [0, 0.5)",
                self.error_rate
            )));
        }
        if !(self.step > 0.0) {
            return Err(Error::invalid(format!("step {} must be > 0", self.step)));
        }
        Ok(())
    }
}

/// Convert a distance in cM to a recombination fraction.
pub fn map_to_recfrac(d_cm: f64, f: MapFunction) -> Result<f64> {
    if !(d_cm >= 0.0) {
        return Err(Error::invalid(format!("distance {d_cm} cM is negative")));
    }
    let morgans = d_cm / 100.0;
    let r = match f {
        MapFunction::Haldane => 0.5 * (1.0 - (-2.0 * morgans).exp()),
        MapFunction::CarterFalconer => {
            // invert m(r) = [atanh(2r) + atan(2r)]/4 by bisection on [0, 0.5)
            let target = morgans;
            if target == 0.0 {
                return Ok(0.0);
            }
            let m_of = |r: f64| 0.25 * ((2.0 * r).atanh() + (2.0 * r).atan());
            let mut lo = 0.0_f64;
            let mut hi = 0.5 - 1e-16;
            if m_of(hi) < target {
                return Ok(0.5 - 1e-16);
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let v = m_of(mid);
                if (v - target).abs() < 1e-12 {
                    return Ok(mid);
                }
                if v < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    Ok(r)
}

/// One position on the genotype-probability grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPoint {
    pub id: String,
    /// Position in cM.
    pub pos: f64,
    /// Flat column into the cross genotype matrix when this point is a
    /// genotyped marker.
    pub marker: Option<usize>,
}

/// Grid for one chromosome. `offset` is the flat index of the first point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChrGrid {
    pub chr: String,
    pub offset: usize,
    pub points: Vec<GridPoint>,
}

impl ChrGrid {
    /// Flat indices of grid points with position inside `[lo, hi]`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> Vec<usize> {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.pos >= lo && p.pos <= hi)
            .map(|(i, _)| self.offset + i)
            .collect()
    }
}

/// Markers plus inserted pseudomarkers so adjacent positions are at most
/// `step` cM apart. Pseudomarkers are named `c<chr>.loc<pos>`.
pub fn insert_pseudomarkers(map: &GeneticMap, step: f64) -> Result<Vec<ChrGrid>> {
    if !(step > 0.0) {
        return Err(Error::invalid(format!("step {step} must be > 0")));
    }
    let mut grids = Vec::new();
    let mut offset = 0;
    let mut marker_col = 0;
    for chr in &map.chromosomes {
        let mut points = Vec::new();
        for (k, m) in chr.markers.iter().enumerate() {
            points.push(GridPoint {
                id: m.id.clone(),
                pos: m.pos,
                marker: Some(marker_col),
            });
            marker_col += 1;
            if k + 1 < chr.markers.len() {
                let next = chr.markers[k + 1].pos;
                let gap = next - m.pos;
                if gap > step {
                    let n_sub = (gap / step).ceil() as usize;
                    let sub = gap / n_sub as f64;
                    for t in 1..n_sub {
                        let pos = m.pos + sub * t as f64;
                        points.push(GridPoint {
                            id: format!("c{}.loc{}", chr.name, pos),
                            pos,
                            marker: None,
                        });
                    }
                }
            }
        }
        let len = points.len();
        grids.push(ChrGrid {
            chr: chr.name.clone(),
            offset,
            points,
        });
        offset += len;
    }
    Ok(grids)
}

/// Conditional genotype probabilities for every individual at every grid
/// position. `probs` is individuals × positions × 3 (BB, BR, RR).
#[derive(Debug, Clone)]
pub struct GenoProb {
    pub individuals: Vec<String>,
    pub grid: Vec<ChrGrid>,
    pub probs: Array3<f64>,
    pub cfg: HmmConfig,
}

impl GenoProb {
    pub fn n_individuals(&self) -> usize {
        self.probs.shape()[0]
    }

    pub fn n_positions(&self) -> usize {
        self.probs.shape()[1]
    }

    pub fn chromosome(&self, name: &str) -> Option<&ChrGrid> {
        self.grid.iter().find(|g| g.chr == name)
    }

    /// `(chromosome name, position in cM)` for a flat grid index.
    pub fn position(&self, flat: usize) -> (&str, f64) {
        for g in &self.grid {
            if flat >= g.offset && flat < g.offset + g.points.len() {
                return (&g.chr, g.points[flat - g.offset].pos);
            }
        }
        panic!("grid index {flat} out of range");
    }
}

const STATES: usize = 3;

/// F2 transition matrix across a gap with recombination fraction `r`.
/// Rows are the source state (BB, BR, RR), columns the destination.
fn transition(r: f64) -> [[f64; STATES]; STATES] {
    let s = 1.0 - r;
    [
        [s * s, 2.0 * r * s, r * r],
        [r * s, s * s + r * r, r * s],
        [r * r, 2.0 * r * s, s * s],
    ]
}

const INIT: [f64; STATES] = [0.25, 0.5, 0.25];

fn emission(obs: Option<Genotype>, error_rate: f64) -> [f64; STATES] {
    match obs {
        None => [1.0, 1.0, 1.0],
        Some(g) => {
            let mut e = [error_rate / 2.0; STATES];
            e[g.index()] = 1.0 - error_rate;
            e
        }
    }
}

/// Forward-backward smoothing for all individuals over the pseudomarker grid.
pub fn calc_genoprob(cross: &Cross, cfg: &HmmConfig) -> Result<GenoProb> {
    cfg.validate()?;
    let grid = insert_pseudomarkers(&cross.map, cfg.step)?;
    let n = cross.n_individuals();
    let total: usize = grid.iter().map(|g| g.points.len()).sum();

    // Per-chromosome transition matrices, shared across individuals.
    let mut chr_trans: Vec<Vec<[[f64; STATES]; STATES]>> = Vec::with_capacity(grid.len());
    for g in &grid {
        let mut t = Vec::with_capacity(g.points.len().saturating_sub(1));
        for w in g.points.windows(2) {
            let r = map_to_recfrac(w[1].pos - w[0].pos, cfg.map_function)?;
            t.push(transition(r));
        }
        chr_trans.push(t);
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|ind| {
            let mut row = vec![0.0_f64; total * STATES];
            for (g, trans) in grid.iter().zip(&chr_trans) {
                smooth_individual(cross, cfg, ind, g, trans, &mut row);
            }
            row
        })
        .collect();

    let mut probs = Array3::zeros((n, total, STATES));
    for (ind, row) in rows.into_iter().enumerate() {
        for k in 0..total {
            for s in 0..STATES {
                probs[(ind, k, s)] = row[k * STATES + s];
            }
        }
    }

    Ok(GenoProb {
        individuals: cross.individuals.clone(),
        grid,
        probs,
        cfg: *cfg,
    })
}

fn smooth_individual(
    cross: &Cross,
    cfg: &HmmConfig,
    ind: usize,
    grid: &ChrGrid,
    trans: &[[[f64; STATES]; STATES]],
    out: &mut [f64],
) {
    let m = grid.points.len();
    let obs_at = |k: usize| -> Option<Genotype> {
        grid.points[k]
            .marker
            .and_then(|col| cross.genotypes[(ind, col)])
    };

    // scaled forward pass
    let mut fwd = vec![[0.0_f64; STATES]; m];
    let e0 = emission(obs_at(0), cfg.error_rate);
    for s in 0..STATES {
        fwd[0][s] = INIT[s] * e0[s];
    }
    normalize(&mut fwd[0]);
    for k in 1..m {
        let e = emission(obs_at(k), cfg.error_rate);
        let t = &trans[k - 1];
        let prev = fwd[k - 1];
        let cur = &mut fwd[k];
        for s in 0..STATES {
            let mut acc = 0.0;
            for sp in 0..STATES {
                acc += prev[sp] * t[sp][s];
            }
            cur[s] = acc * e[s];
        }
        normalize(cur);
    }

    // scaled backward pass
    let mut bwd = vec![[1.0_f64; STATES]; m];
    for k in (0..m.saturating_sub(1)).rev() {
        let e = emission(obs_at(k + 1), cfg.error_rate);
        let t = &trans[k];
        let next = bwd[k + 1];
        let cur = &mut bwd[k];
        for s in 0..STATES {
            let mut acc = 0.0;
            for sn in 0..STATES {
                acc += t[s][sn] * e[sn] * next[sn];
            }
            cur[s] = acc;
        }
        normalize(cur);
    }

    for k in 0..m {
        let mut p = [0.0_f64; STATES];
        for s in 0..STATES {
            p[s] = fwd[k][s] * bwd[k][s];
        }
        normalize(&mut p);
        let base = (grid.offset + k) * STATES;
        out[base..base + STATES].copy_from_slice(&p);
    }
}

/// Normalize a state vector in place; contradictory observations under a zero
/// error rate would produce an all-zero vector, which falls back to uniform.
fn normalize(v: &mut [f64; STATES]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        for x in v.iter_mut() {
            *x /= s;
        }
    } else {
        warn!("zero-probability genotype configuration; falling back to uniform");
        for x in v.iter_mut() {
            *x = 1.0 / STATES as f64;
        }
    }
}

/// Most probable genotype per individual at one grid position; ties resolve
/// in BB < BR < RR order.
pub fn impute_genotype(gp: &GenoProb, position: usize) -> Vec<Genotype> {
    (0..gp.n_individuals())
        .map(|i| {
            let mut best = 0;
            for s in 1..STATES {
                if gp.probs[(i, position, s)] > gp.probs[(i, position, best)] {
                    best = s;
                }
            }
            Genotype::from_index(best)
        })
        .collect()
}

/// Recombination status of an individual within an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecombinantClass {
    NonRecombinant(Genotype),
    Recombinant,
}

/// An interval on one chromosome, in cM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeInterval {
    pub chr: String,
    pub lo: f64,
    pub hi: f64,
}

impl GenomeInterval {
    pub fn new(chr: impl Into<String>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::invalid(format!("interval [{lo}, {hi}] is empty")));
        }
        Ok(GenomeInterval {
            chr: chr.into(),
            lo,
            hi,
        })
    }
}

impl std::fmt::Display for GenomeInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}-{}", self.chr, self.lo, self.hi)
    }
}

/// Classify each individual as recombinant or non-recombinant within the
/// interval, using observed marker genotypes; individuals with fewer than two
/// observed markers fall back to the imputations at the interval ends.
pub fn classify_recombinants(
    cross: &Cross,
    gp: &GenoProb,
    interval: &GenomeInterval,
) -> Result<Vec<RecombinantClass>> {
    let chr = cross
        .map
        .chromosome(&interval.chr)
        .ok_or_else(|| Error::invalid(format!("unknown chromosome {}", interval.chr)))?;
    let grid = gp
        .chromosome(&interval.chr)
        .ok_or_else(|| Error::invalid(format!("no grid for chromosome {}", interval.chr)))?;

    // flat genotype columns of markers inside the interval
    let mut marker_cols = Vec::new();
    {
        let mut col = 0;
        for c in &cross.map.chromosomes {
            for m in &c.markers {
                if c.name == chr.name && m.pos >= interval.lo && m.pos <= interval.hi {
                    marker_cols.push(col);
                }
                col += 1;
            }
        }
    }
    if marker_cols.is_empty() {
        return Err(Error::invalid(format!(
            "interval {interval} contains no genotyped markers"
        )));
    }

    let grid_in = grid.indices_in(interval.lo, interval.hi);
    let (first, last) = (grid_in[0], *grid_in.last().unwrap());
    let imputed_lo = impute_genotype(gp, first);
    let imputed_hi = impute_genotype(gp, last);

    let mut out = Vec::with_capacity(cross.n_individuals());
    for i in 0..cross.n_individuals() {
        let obs: Vec<Genotype> = marker_cols
            .iter()
            .filter_map(|&c| cross.genotypes[(i, c)])
            .collect();
        let class = if obs.len() >= 2 {
            if obs.iter().all(|g| *g == obs[0]) {
                RecombinantClass::NonRecombinant(obs[0])
            } else {
                RecombinantClass::Recombinant
            }
        } else if imputed_lo[i] == imputed_hi[i] {
            RecombinantClass::NonRecombinant(imputed_lo[i])
        } else {
            RecombinantClass::Recombinant
        };
        out.push(class);
    }
    Ok(out)
}

// --- binary cache -----------------------------------------------------------

const MAGIC: &[u8; 5] = b"GPRB1";

#[derive(Serialize, Deserialize)]
struct CacheSidecar {
    individuals: Vec<String>,
    cfg: HmmConfig,
    grid: Vec<ChrGrid>,
}

impl GenoProb {
    /// Write the probability tensor to `path` (magic bytes, little-endian
    /// dimensions, row-major f64) with a JSON sidecar at `<path>.json`.
    pub fn save_cache(&self, path: &Path) -> Result<()> {
        let io_err = |e: std::io::Error| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
        f.write_all(MAGIC).map_err(io_err)?;
        let shape = self.probs.shape();
        for &d in shape {
            f.write_u64::<LittleEndian>(d as u64).map_err(io_err)?;
        }
        for v in self.probs.iter() {
            f.write_f64::<LittleEndian>(*v).map_err(io_err)?;
        }
        f.flush().map_err(io_err)?;
        let sidecar = CacheSidecar {
            individuals: self.individuals.clone(),
            cfg: self.cfg,
            grid: self.grid.clone(),
        };
        let json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::Numeric(e.to_string()))?;
        std::fs::write(sidecar_path(path), json).map_err(io_err)?;
        Ok(())
    }

    /// Load a cached tensor; returns an error when the magic bytes,
    /// dimensions, or sidecar are inconsistent.
    pub fn load_cache(path: &Path) -> Result<GenoProb> {
        let io_err = |e: std::io::Error| Error::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut f = std::io::BufReader::new(std::fs::File::open(path).map_err(io_err)?);
        let mut magic = [0u8; 5];
        f.read_exact(&mut magic).map_err(io_err)?;
        if &magic != MAGIC {
            return Err(Error::invalid(format!(
                "{} is not a genotype-probability cache",
                path.display()
            )));
        }
        let n = f.read_u64::<LittleEndian>().map_err(io_err)? as usize;
        let m = f.read_u64::<LittleEndian>().map_err(io_err)? as usize;
        let s = f.read_u64::<LittleEndian>().map_err(io_err)? as usize;
        if s != STATES {
            return Err(Error::invalid(format!(
                "cache has {s} states, expected {STATES}"
            )));
        }
        let mut data = vec![0.0_f64; n * m * s];
        for v in data.iter_mut() {
            *v = f.read_f64::<LittleEndian>().map_err(io_err)?;
        }
        let probs = Array3::from_shape_vec((n, m, s), data)
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let sidecar: CacheSidecar = serde_json::from_str(
            &std::fs::read_to_string(sidecar_path(path)).map_err(io_err)?,
        )
        .map_err(|e| Error::invalid(format!("bad cache sidecar: {e}")))?;
        if sidecar.individuals.len() != n
            || sidecar.grid.iter().map(|g| g.points.len()).sum::<usize>() != m
        {
            return Err(Error::invalid(
                "cache sidecar does not match tensor dimensions".to_string(),
            ));
        }
        Ok(GenoProb {
            individuals: sidecar.individuals,
            grid: sidecar.grid,
            probs,
            cfg: sidecar.cfg,
        })
    }

    /// True when this cache matches the cross and configuration.
    pub fn matches(&self, cross: &Cross, cfg: &HmmConfig) -> bool {
        self.cfg == *cfg
            && self.individuals == cross.individuals
            && self
                .grid
                .iter()
                .map(|g| (g.chr.as_str(), g.points.iter().filter(|p| p.marker.is_some()).count()))
                .eq(cross
                    .map
                    .chromosomes
                    .iter()
                    .map(|c| (c.name.as_str(), c.markers.len())))
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    std::path::PathBuf::from(s)
}

/// Genotype frequencies pooled over individuals at one position.
pub fn genotype_frequencies(gp: &GenoProb, position: usize) -> [f64; STATES] {
    let n = gp.n_individuals() as f64;
    let mut freq = [0.0; STATES];
    for i in 0..gp.n_individuals() {
        for s in 0..STATES {
            freq[s] += gp.probs[(i, position, s)] / n;
        }
    }
    freq
}
