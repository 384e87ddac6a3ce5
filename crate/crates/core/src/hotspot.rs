//! Trans-eQTL hotspot detection: sliding-window counts of trait peaks over
//! the grid, contiguous super-threshold regions widened into analysis
//! intervals, and selection of the top traits for dissection.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::cross::TraitMeta;
use crate::error::{Error, Result};
use crate::genoprob::ChrGrid;
use crate::scan::TraitScan;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HotspotConfig {
    /// Minimum peak LOD for a trait to count.
    pub lod_min: f64,
    /// Sliding window length in cM.
    pub window: f64,
    /// Minimum count for a hotspot region.
    pub count_min: u32,
    /// Widening added to each side of the super-threshold region, in cM.
    pub pad: f64,
    /// Traits whose genomic position is within this distance of their peak
    /// (on the same chromosome) are treated as local and excluded.
    pub local_exclusion: f64,
}

impl Default for HotspotConfig {
    fn default() -> Self {
        HotspotConfig {
            lod_min: 10.0,
            window: 10.0,
            count_min: 50,
            pad: 5.0,
            local_exclusion: 10.0,
        }
    }
}

/// A trait peak reduced to what hotspot counting needs. Serializes with the
/// scan-output field names (`trait`, `a`, `d`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeakRecord {
    #[serde(rename = "trait")]
    pub trait_id: String,
    pub chr: String,
    pub pos: f64,
    pub lod: f64,
    pub signed_lod: f64,
    #[serde(rename = "a")]
    pub additive: f64,
    #[serde(rename = "d")]
    pub dominance: f64,
}

impl PeakRecord {
    pub fn from_scan(s: &TraitScan) -> Self {
        PeakRecord {
            trait_id: s.trait_id.clone(),
            chr: s.peak.chr.clone(),
            pos: s.peak.pos,
            lod: s.peak.lod,
            signed_lod: s.signed_lod,
            additive: s.effects.additive,
            dominance: s.effects.dominance,
        }
    }
}

/// Trans-eQTL counts along one chromosome's grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CountCurve {
    pub chr: String,
    pub positions: Vec<f64>,
    pub counts: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HotspotTrait {
    pub id: String,
    pub lod: f64,
    pub pos: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HotspotInterval {
    pub chr: String,
    /// Grid position with the highest count inside the region.
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
    pub peak_count: u32,
    /// Qualifying trans traits with peaks inside `[lo, hi]`, by descending
    /// LOD (ties by trait id).
    pub traits: Vec<HotspotTrait>,
    /// The chromosome's count curve.
    pub counts: CountCurve,
}

/// True when the trait cannot be ruled local: unknown positions are retained.
fn is_trans(peak: &PeakRecord, meta: Option<&TraitMeta>, local_exclusion: f64) -> bool {
    match meta {
        Some(m) => match (&m.chr, m.pos) {
            (Some(chr), Some(pos)) => {
                !(chr == &peak.chr && (pos - peak.pos).abs() < local_exclusion)
            }
            _ => {
                warn!(
                    "trait {} has no genomic annotation; treated as trans",
                    peak.trait_id
                );
                true
            }
        },
        None => true,
    }
}

/// Count, at every grid position, the trans traits whose peak falls within
/// half a window of that position.
pub fn count_trans_eqtl(
    peaks: &[PeakRecord],
    trait_meta: &[TraitMeta],
    grid: &[ChrGrid],
    cfg: &HotspotConfig,
) -> Vec<CountCurve> {
    let meta_of = |id: &str| trait_meta.iter().find(|m| m.id == id);
    let qualifying: Vec<&PeakRecord> = peaks
        .iter()
        .filter(|p| p.lod >= cfg.lod_min && is_trans(p, meta_of(&p.trait_id), cfg.local_exclusion))
        .collect();
    let half = cfg.window / 2.0;
    grid.iter()
        .map(|g| {
            let positions: Vec<f64> = g.points.iter().map(|p| p.pos).collect();
            let counts = positions
                .iter()
                .map(|&x| {
                    qualifying
                        .iter()
                        .filter(|p| p.chr == g.chr && (p.pos - x).abs() <= half)
                        .count() as u32
                })
                .collect();
            CountCurve {
                chr: g.chr.clone(),
                positions,
                counts,
            }
        })
        .collect()
}

/// Contiguous regions with counts above `count_min`, padded and clipped to
/// the chromosome ends, ordered by chromosome then position. An empty result
/// means no hotspot.
pub fn define_hotspots(
    counts: &[CountCurve],
    peaks: &[PeakRecord],
    trait_meta: &[TraitMeta],
    cfg: &HotspotConfig,
) -> Vec<HotspotInterval> {
    let meta_of = |id: &str| trait_meta.iter().find(|m| m.id == id);
    let mut hotspots = Vec::new();
    for curve in counts {
        let n = curve.positions.len();
        let chr_lo = *curve.positions.first().unwrap_or(&0.0);
        let chr_hi = *curve.positions.last().unwrap_or(&0.0);
        let mut k = 0;
        while k < n {
            if curve.counts[k] <= cfg.count_min {
                k += 1;
                continue;
            }
            let start = k;
            while k < n && curve.counts[k] > cfg.count_min {
                k += 1;
            }
            let end = k - 1; // inclusive
            let lo = (curve.positions[start] - cfg.pad).max(chr_lo);
            let hi = (curve.positions[end] + cfg.pad).min(chr_hi);
            let mut center_idx = start;
            for j in start..=end {
                if curve.counts[j] > curve.counts[center_idx] {
                    center_idx = j;
                }
            }
            let mut traits: Vec<HotspotTrait> = peaks
                .iter()
                .filter(|p| {
                    p.chr == curve.chr
                        && p.lod >= cfg.lod_min
                        && p.pos >= lo
                        && p.pos <= hi
                        && is_trans(p, meta_of(&p.trait_id), cfg.local_exclusion)
                })
                .map(|p| HotspotTrait {
                    id: p.trait_id.clone(),
                    lod: p.lod,
                    pos: p.pos,
                })
                .collect();
            traits.sort_by(|a, b| {
                b.lod
                    .partial_cmp(&a.lod)
                    .unwrap()
                    .then_with(|| a.id.cmp(&b.id))
            });
            hotspots.push(HotspotInterval {
                chr: curve.chr.clone(),
                center: curve.positions[center_idx],
                lo,
                hi,
                peak_count: curve.counts[center_idx],
                traits,
                counts: curve.clone(),
            });
        }
    }
    hotspots
}

/// The first `min(k, |traits|)` trait ids from the hotspot's LOD-ordered
/// list.
pub fn select_top_traits(hotspot: &HotspotInterval, k: usize) -> Result<Vec<String>> {
    if hotspot.traits.is_empty() {
        return Err(Error::invalid(format!(
            "hotspot {}:{}-{} has no qualifying traits",
            hotspot.chr, hotspot.lo, hotspot.hi
        )));
    }
    if k == 0 {
        return Err(Error::invalid("top-trait count must be at least 1"));
    }
    Ok(hotspot
        .traits
        .iter()
        .take(k)
        .map(|t| t.id.clone())
        .collect())
}
