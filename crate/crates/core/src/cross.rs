//! Data model for an F2 intercross: genetic map, genotypes, expression
//! phenotypes, and covariates, plus CSV ingestion and the normal-quantile
//! transform applied to each expression trait.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use log::warn;
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// F2 genotype at one locus. `B` is the first parental strain allele,
/// `R` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Genotype {
    BB,
    BR,
    RR,
}

impl Genotype {
    pub const ALL: [Genotype; 3] = [Genotype::BB, Genotype::BR, Genotype::RR];

    pub fn index(self) -> usize {
        match self {
            Genotype::BB => 0,
            Genotype::BR => 1,
            Genotype::RR => 2,
        }
    }

    pub fn from_index(i: usize) -> Genotype {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Genotype::BB => "BB",
            Genotype::BR => "BR",
            Genotype::RR => "RR",
        }
    }
}

impl std::fmt::Display for Genotype {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Marker {
    pub id: String,
    /// Position in centimorgans.
    pub pos: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChromosomeMap {
    pub name: String,
    pub markers: Vec<Marker>,
}

impl ChromosomeMap {
    pub fn start(&self) -> f64 {
        self.markers.first().map(|m| m.pos).unwrap_or(0.0)
    }

    pub fn end(&self) -> f64 {
        self.markers.last().map(|m| m.pos).unwrap_or(0.0)
    }
}

/// Ordered chromosomes, each with position-ordered markers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneticMap {
    pub chromosomes: Vec<ChromosomeMap>,
}

impl GeneticMap {
    pub fn new(chromosomes: Vec<ChromosomeMap>) -> Result<Self> {
        let map = GeneticMap { chromosomes };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for chr in &self.chromosomes {
            if chr.markers.is_empty() {
                return Err(Error::invalid(format!(
                    "chromosome {} has no markers",
                    chr.name
                )));
            }
            let mut last = f64::NEG_INFINITY;
            for m in &chr.markers {
                if !m.pos.is_finite() {
                    return Err(Error::invalid(format!(
                        "marker {} has non-finite position",
                        m.id
                    )));
                }
                if m.pos < last {
                    return Err(Error::invalid(format!(
                        "marker positions on chromosome {} are not monotone at {}",
                        chr.name, m.id
                    )));
                }
                last = m.pos;
                if !seen.insert(m.id.clone()) {
                    return Err(Error::invalid(format!("duplicate marker id {}", m.id)));
                }
            }
        }
        Ok(())
    }

    pub fn total_markers(&self) -> usize {
        self.chromosomes.iter().map(|c| c.markers.len()).sum()
    }

    /// Flat column index of every marker, keyed by id.
    pub fn marker_index(&self) -> HashMap<String, usize> {
        let mut idx = HashMap::new();
        let mut k = 0;
        for chr in &self.chromosomes {
            for m in &chr.markers {
                idx.insert(m.id.clone(), k);
                k += 1;
            }
        }
        idx
    }

    pub fn chromosome(&self, name: &str) -> Option<&ChromosomeMap> {
        self.chromosomes.iter().find(|c| c.name == name)
    }
}

/// Genomic annotation for an expression trait; unknown when the probe has no
/// assigned position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraitMeta {
    pub id: String,
    pub chr: Option<String>,
    pub pos: Option<f64>,
}

/// Additive and interactive covariate matrices, aligned to the cross
/// individuals. Categorical columns have already been expanded to indicators
/// with the first level dropped.
#[derive(Debug, Clone, Default)]
pub struct CovariateSet {
    pub additive: Array2<f64>,
    pub additive_names: Vec<String>,
    pub interactive: Array2<f64>,
    pub interactive_names: Vec<String>,
}

impl CovariateSet {
    pub fn empty(n: usize) -> Self {
        CovariateSet {
            additive: Array2::zeros((n, 0)),
            additive_names: Vec::new(),
            interactive: Array2::zeros((n, 0)),
            interactive_names: Vec::new(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.additive.nrows()
    }

    /// Row subset, preserving order.
    pub fn select_rows(&self, rows: &[usize]) -> CovariateSet {
        let take = |m: &Array2<f64>| {
            let mut out = Array2::zeros((rows.len(), m.ncols()));
            for (i, &r) in rows.iter().enumerate() {
                out.row_mut(i).assign(&m.row(r));
            }
            out
        };
        CovariateSet {
            additive: take(&self.additive),
            additive_names: self.additive_names.clone(),
            interactive: take(&self.interactive),
            interactive_names: self.interactive_names.clone(),
        }
    }
}

/// Which covariate columns enter additively and which interactively.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct CovarSpec {
    pub additive: Vec<String>,
    pub interactive: Vec<String>,
}

/// One mapping population: individuals, genotypes, map, expression traits,
/// and covariates. Immutable after load.
#[derive(Debug, Clone)]
pub struct Cross {
    pub individuals: Vec<String>,
    /// individuals × markers, map order; `None` is a missing call.
    pub genotypes: Array2<Option<Genotype>>,
    pub map: GeneticMap,
    /// individuals × traits; missing values are NaN.
    pub phenotypes: Array2<f64>,
    pub trait_ids: Vec<String>,
    pub trait_meta: Vec<TraitMeta>,
    pub covariates: CovariateSet,
}

impl Cross {
    pub fn n_individuals(&self) -> usize {
        self.individuals.len()
    }

    pub fn n_traits(&self) -> usize {
        self.trait_ids.len()
    }

    pub fn trait_index(&self, id: &str) -> Option<usize> {
        self.trait_ids.iter().position(|t| t == id)
    }

    /// Replace every trait column with its normal-quantile transform.
    /// Traits with fewer than 2 non-missing values are an error.
    pub fn quantile_normalize_all(&mut self) -> Result<()> {
        for j in 0..self.n_traits() {
            let col: Vec<f64> = self.phenotypes.column(j).to_vec();
            let transformed = quantile_normalize(&col).map_err(|e| {
                Error::invalid(format!("trait {}: {}", self.trait_ids[j], e))
            })?;
            for (i, v) in transformed.into_iter().enumerate() {
                self.phenotypes[(i, j)] = v;
            }
        }
        Ok(())
    }
}

/// Normal-quantile transform: each non-missing value is replaced by
/// `Phi^-1((rank - 0.5)/n)` where ranks are computed among non-missing values
/// with ties sharing their average rank. Missing (NaN) entries are preserved.
pub fn quantile_normalize(values: &[f64]) -> Result<Vec<f64>> {
    let present: Vec<usize> = (0..values.len()).filter(|&i| !values[i].is_nan()).collect();
    let n = present.len();
    if n < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 non-missing values, got {n}"
        )));
    }
    let mut order = present.clone();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    // average ranks across tied runs
    let mut ranks = vec![0.0_f64; values.len()];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut out = vec![f64::NAN; values.len()];
    for &i in &present {
        out[i] = normal.inverse_cdf((ranks[i] - 0.5) / n as f64);
    }
    Ok(out)
}

// --- CSV loading -----------------------------------------------------------

fn open_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => Error::load(path.display().to_string(), 0, e.to_string()),
        })
}

fn record_line(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

/// `id,<marker>,...` with genotype cells in {BB,BR,RR,NA}.
fn load_geno_csv(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<Option<Genotype>>>)> {
    let file = path.display().to_string();
    let mut rdr = open_reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::load(&file, 1, e.to_string()))?
        .clone();
    if headers.len() < 2 || headers.get(0) != Some("id") {
        return Err(Error::load(&file, 1, "expected header starting with `id`"));
    }
    let markers: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::load(&file, 0, e.to_string()))?;
        let line = record_line(&rec);
        if rec.len() != markers.len() + 1 {
            return Err(Error::load(
                &file,
                line,
                format!("expected {} fields, got {}", markers.len() + 1, rec.len()),
            ));
        }
        let id = rec[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::load(&file, line, format!("duplicate id {id}")));
        }
        let mut row = Vec::with_capacity(markers.len());
        for cell in rec.iter().skip(1) {
            row.push(match cell {
                "BB" => Some(Genotype::BB),
                "BR" => Some(Genotype::BR),
                "RR" => Some(Genotype::RR),
                "NA" => None,
                other => {
                    return Err(Error::load(
                        &file,
                        line,
                        format!("genotype code `{other}` is not one of BB/BR/RR/NA"),
                    ))
                }
            });
        }
        ids.push(id);
        rows.push(row);
    }
    Ok((ids, markers, rows))
}

/// `marker,chr,pos_cM`, positions non-decreasing within a chromosome.
pub fn load_map_csv(path: &Path) -> Result<GeneticMap> {
    let file = path.display().to_string();
    let mut rdr = open_reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::load(&file, 1, e.to_string()))?
        .clone();
    let expect = ["marker", "chr", "pos_cM"];
    if headers.iter().collect::<Vec<_>>() != expect {
        return Err(Error::load(&file, 1, "expected header `marker,chr,pos_cM`"));
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_chr: BTreeMap<String, Vec<Marker>> = BTreeMap::new();
    let mut last_pos: HashMap<String, (f64, usize)> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::load(&file, 0, e.to_string()))?;
        let line = record_line(&rec);
        if rec.len() != 3 {
            return Err(Error::load(&file, line, "expected 3 fields"));
        }
        let marker = rec[0].to_string();
        let chr = rec[1].to_string();
        let pos: f64 = rec[2]
            .parse()
            .map_err(|_| Error::load(&file, line, format!("bad position `{}`", &rec[2])))?;
        if let Some(&(prev, prev_line)) = last_pos.get(&chr) {
            if pos < prev {
                return Err(Error::load(
                    &file,
                    line,
                    format!(
                        "position {pos} on chromosome {chr} is before {prev} (line {prev_line})"
                    ),
                ));
            }
        }
        last_pos.insert(chr.clone(), (pos, line));
        if !by_chr.contains_key(&chr) {
            order.push(chr.clone());
        }
        by_chr
            .entry(chr)
            .or_default()
            .push(Marker { id: marker, pos });
    }
    let chromosomes = order
        .into_iter()
        .map(|name| {
            let markers = by_chr.remove(&name).unwrap();
            ChromosomeMap { name, markers }
        })
        .collect();
    GeneticMap::new(chromosomes).map_err(|e| Error::load(&file, 0, e.to_string()))
}

/// `id,<trait>,...` with real or NA cells.
fn load_numeric_table(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<f64>>)> {
    let file = path.display().to_string();
    let mut rdr = open_reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::load(&file, 1, e.to_string()))?
        .clone();
    if headers.len() < 2 || headers.get(0) != Some("id") {
        return Err(Error::load(&file, 1, "expected header starting with `id`"));
    }
    let cols: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::load(&file, 0, e.to_string()))?;
        let line = record_line(&rec);
        if rec.len() != cols.len() + 1 {
            return Err(Error::load(
                &file,
                line,
                format!("expected {} fields, got {}", cols.len() + 1, rec.len()),
            ));
        }
        let id = rec[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::load(&file, line, format!("duplicate id {id}")));
        }
        let mut row = Vec::with_capacity(cols.len());
        for cell in rec.iter().skip(1) {
            if cell == "NA" {
                row.push(f64::NAN);
            } else {
                row.push(cell.parse().map_err(|_| {
                    Error::load(&file, line, format!("bad numeric value `{cell}`"))
                })?);
            }
        }
        ids.push(id);
        rows.push(row);
    }
    Ok((ids, cols, rows))
}

/// `trait,chr,pos_cM` with NA allowed for chr and pos.
pub fn load_trait_meta_csv(path: &Path) -> Result<Vec<TraitMeta>> {
    let file = path.display().to_string();
    let mut rdr = open_reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::load(&file, 1, e.to_string()))?
        .clone();
    let expect = ["trait", "chr", "pos_cM"];
    if headers.iter().collect::<Vec<_>>() != expect {
        return Err(Error::load(&file, 1, "expected header `trait,chr,pos_cM`"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::load(&file, 0, e.to_string()))?;
        let line = record_line(&rec);
        let chr = if &rec[1] == "NA" {
            None
        } else {
            Some(rec[1].to_string())
        };
        let pos = if &rec[2] == "NA" {
            None
        } else {
            Some(rec[2].parse().map_err(|_| {
                Error::load(&file, line, format!("bad position `{}`", &rec[2]))
            })?)
        };
        out.push(TraitMeta {
            id: rec[0].to_string(),
            chr,
            pos,
        });
    }
    Ok(out)
}

/// Raw covariate table: cells kept as strings until column types are known.
fn load_string_table(path: &Path) -> Result<(Vec<String>, Vec<String>, Vec<Vec<String>>)> {
    let file = path.display().to_string();
    let mut rdr = open_reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| Error::load(&file, 1, e.to_string()))?
        .clone();
    if headers.len() < 2 || headers.get(0) != Some("id") {
        return Err(Error::load(&file, 1, "expected header starting with `id`"));
    }
    let cols: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::load(&file, 0, e.to_string()))?;
        let line = record_line(&rec);
        if rec.len() != cols.len() + 1 {
            return Err(Error::load(
                &file,
                line,
                format!("expected {} fields, got {}", cols.len() + 1, rec.len()),
            ));
        }
        let id = rec[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::load(&file, line, format!("duplicate id {id}")));
        }
        ids.push(id);
        rows.push(rec.iter().skip(1).map(|s| s.to_string()).collect());
    }
    Ok((ids, cols, rows))
}

/// Expand one covariate column to numeric columns. Numeric columns pass
/// through; categorical columns become one-hot indicators with the
/// lexicographically first level dropped.
fn expand_column(name: &str, cells: &[&str]) -> Result<Vec<(String, Vec<f64>)>> {
    let numeric: Option<Vec<f64>> = cells
        .iter()
        .map(|c| {
            if *c == "NA" {
                Some(f64::NAN)
            } else {
                c.parse().ok()
            }
        })
        .collect();
    if let Some(values) = numeric {
        return Ok(vec![(name.to_string(), values)]);
    }
    let mut levels: Vec<&str> = cells
        .iter()
        .filter(|c| **c != "NA")
        .copied()
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    levels.sort();
    if levels.len() < 2 {
        return Err(Error::invalid(format!(
            "categorical covariate {name} has a single level"
        )));
    }
    let mut out = Vec::new();
    for level in levels.iter().skip(1) {
        let col = cells
            .iter()
            .map(|c| {
                if *c == "NA" {
                    f64::NAN
                } else if c == level {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        out.push((format!("{name}:{level}"), col));
    }
    Ok(out)
}

/// Load and validate a cross from CSV files.
///
/// Individuals present in all provided files are intersected, keeping the
/// genotype-file order; individuals with a missing covariate value are
/// dropped with a warning.
pub fn load_cross(
    geno_path: &Path,
    map_path: &Path,
    pheno_path: &Path,
    covar_path: Option<&Path>,
    covar_spec: &CovarSpec,
    trait_meta_path: Option<&Path>,
) -> Result<Cross> {
    let map = load_map_csv(map_path)?;
    let (geno_ids, geno_markers, geno_rows) = load_geno_csv(geno_path)?;
    let (pheno_ids, trait_ids, pheno_rows) = load_numeric_table(pheno_path)?;

    {
        let mut seen = HashSet::new();
        for t in &trait_ids {
            if !seen.insert(t) {
                return Err(Error::invalid(format!("duplicate trait id {t}")));
            }
        }
    }

    // Genotype columns must match the map marker set exactly.
    let marker_index = map.marker_index();
    let mut geno_col_for_marker = vec![usize::MAX; map.total_markers()];
    for (col, m) in geno_markers.iter().enumerate() {
        match marker_index.get(m) {
            Some(&k) => geno_col_for_marker[k] = col,
            None => {
                return Err(Error::invalid(format!(
                    "genotype file marker {m} is absent from the map"
                )))
            }
        }
    }
    if let Some(k) = geno_col_for_marker.iter().position(|&c| c == usize::MAX) {
        let mut flat = map.chromosomes.iter().flat_map(|c| &c.markers);
        let missing = flat.nth(k).map(|m| m.id.clone()).unwrap_or_default();
        return Err(Error::invalid(format!(
            "map marker {missing} is absent from the genotype file"
        )));
    }

    let pheno_index: HashMap<&str, usize> = pheno_ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    for id in &pheno_ids {
        if !geno_ids.contains(id) {
            warn!("phenotype id {id} absent from genotype file; dropped");
        }
    }

    // Optional covariates: parse, expand, and note rows with missing values.
    let covar = match covar_path {
        Some(p) => {
            let (ids, cols, rows) = load_string_table(p)?;
            let index: HashMap<String, usize> = ids
                .into_iter()
                .enumerate()
                .map(|(i, s)| (s, i))
                .collect();
            let mut expanded: HashMap<String, Vec<(String, Vec<f64>)>> = HashMap::new();
            for (j, name) in cols.iter().enumerate() {
                let cells: Vec<&str> = rows.iter().map(|r| r[j].as_str()).collect();
                expanded.insert(name.clone(), expand_column(name, &cells)?);
            }
            Some((index, expanded))
        }
        None => None,
    };
    for name in covar_spec.additive.iter().chain(&covar_spec.interactive) {
        let known = covar
            .as_ref()
            .map(|(_, e)| e.contains_key(name))
            .unwrap_or(false);
        if !known {
            return Err(Error::invalid(format!(
                "covariate column {name} not found in covariate file"
            )));
        }
    }

    // Intersect individuals in genotype-file order.
    let mut individuals = Vec::new();
    let mut geno_sel = Vec::new();
    for (gi, id) in geno_ids.iter().enumerate() {
        if !pheno_index.contains_key(id.as_str()) {
            warn!("genotype id {id} absent from phenotype file; dropped");
            continue;
        }
        if let Some((index, expanded)) = &covar {
            match index.get(id.as_str()) {
                None => {
                    warn!("genotype id {id} absent from covariate file; dropped");
                    continue;
                }
                Some(&r) => {
                    let missing = covar_spec
                        .additive
                        .iter()
                        .chain(&covar_spec.interactive)
                        .any(|name| expanded[name].iter().any(|(_, col)| col[r].is_nan()));
                    if missing {
                        warn!("individual {id} has a missing covariate value; dropped");
                        continue;
                    }
                }
            }
        }
        individuals.push(id.clone());
        geno_sel.push(gi);
    }
    if individuals.is_empty() {
        return Err(Error::invalid(
            "no individuals shared across input files".to_string(),
        ));
    }

    let n = individuals.len();
    let n_markers = map.total_markers();
    let mut genotypes = Array2::from_elem((n, n_markers), None);
    for (i, &gi) in geno_sel.iter().enumerate() {
        for (k, &col) in geno_col_for_marker.iter().enumerate() {
            genotypes[(i, k)] = geno_rows[gi][col];
        }
    }

    let mut phenotypes = Array2::from_elem((n, trait_ids.len()), f64::NAN);
    for (i, id) in individuals.iter().enumerate() {
        let pi = pheno_index[id.as_str()];
        for (j, v) in pheno_rows[pi].iter().enumerate() {
            phenotypes[(i, j)] = *v;
        }
    }

    let covariates = match &covar {
        None => CovariateSet::empty(n),
        Some((index, expanded)) => {
            let gather = |names: &[String]| {
                let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
                for name in names {
                    for (cname, col) in &expanded[name] {
                        let vals = individuals
                            .iter()
                            .map(|id| col[index[id.as_str()]])
                            .collect();
                        cols.push((cname.clone(), vals));
                    }
                }
                let mut m = Array2::zeros((n, cols.len()));
                let mut names_out = Vec::new();
                for (j, (cname, vals)) in cols.into_iter().enumerate() {
                    for (i, v) in vals.into_iter().enumerate() {
                        m[(i, j)] = v;
                    }
                    names_out.push(cname);
                }
                (m, names_out)
            };
            let (additive, additive_names) = gather(&covar_spec.additive);
            let (interactive, interactive_names) = gather(&covar_spec.interactive);
            CovariateSet {
                additive,
                additive_names,
                interactive,
                interactive_names,
            }
        }
    };

    let trait_meta = match trait_meta_path {
        None => trait_ids
            .iter()
            .map(|id| TraitMeta {
                id: id.clone(),
                chr: None,
                pos: None,
            })
            .collect(),
        Some(p) => {
            let metas = load_trait_meta_csv(p)?;
            let by_id: HashMap<&str, &TraitMeta> =
                metas.iter().map(|m| (m.id.as_str(), m)).collect();
            trait_ids
                .iter()
                .map(|id| match by_id.get(id.as_str()) {
                    Some(m) => (*m).clone(),
                    None => TraitMeta {
                        id: id.clone(),
                        chr: None,
                        pos: None,
                    },
                })
                .collect()
        }
    };

    Ok(Cross {
        individuals,
        genotypes,
        map,
        phenotypes,
        trait_ids,
        trait_meta,
        covariates,
    })
}
