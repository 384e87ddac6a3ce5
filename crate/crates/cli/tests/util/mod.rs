//! Shared helpers for the CLI tests: a deterministic synthetic dataset in
//! the input CSV formats, and a runner for the compiled binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Output;

use eqtl_dissect::{sim_f2, simcross, Genotype, MapFunction};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_eqtl-dissect")
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    std::process::Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Two-QTL synthetic dataset: 6 traits at 40 cM and 6 at 60 cM on a 21-marker
/// chromosome, one numeric and one categorical covariate, trait annotations
/// placing every trait on another chromosome.
pub fn write_dataset(dir: &Path) -> Dataset {
    let n = 200;
    let map = simcross::equally_spaced_map(21, 100.0, "1");
    let geno = sim_f2(n, &map, MapFunction::Haldane, 424242);

    let mut geno_csv = String::from("id");
    for chr in &map.chromosomes {
        for m in &chr.markers {
            write!(geno_csv, ",{}", m.id).unwrap();
        }
    }
    geno_csv.push('\n');
    for i in 0..n {
        write!(geno_csv, "ind{i:03}").unwrap();
        for k in 0..map.total_markers() {
            write!(geno_csv, ",{}", geno[(i, k)].unwrap().as_str()).unwrap();
        }
        geno_csv.push('\n');
    }

    let mut map_csv = String::from("marker,chr,pos_cM\n");
    for chr in &map.chromosomes {
        for m in &chr.markers {
            writeln!(map_csv, "{},{},{}", m.id, chr.name, m.pos).unwrap();
        }
    }

    // deterministic pseudo-noise, avoiding an extra RNG dependency here
    let noise = |i: usize, j: usize| -> f64 {
        let x = (i * 2654435761 + j * 40503 + 12345) as f64;
        let u = (x.sin() * 43758.5453).fract().abs();
        // rough inverse-normal via a logistic approximation; fine for tests
        (u.max(1e-6).min(1.0 - 1e-6) / (1.0 - u.max(1e-6).min(1.0 - 1e-6))).ln() * 0.55
    };
    let code = |g: Genotype| g.index() as f64 - 1.0;
    let mut pheno_csv = String::from("id");
    for j in 0..12 {
        write!(pheno_csv, ",t{j:02}").unwrap();
    }
    pheno_csv.push('\n');
    for i in 0..n {
        write!(pheno_csv, "ind{i:03}").unwrap();
        for j in 0..12 {
            let m = if j < 6 { 8 } else { 12 };
            let v = 1.2 * code(geno[(i, m)].unwrap()) + noise(i, j);
            write!(pheno_csv, ",{v:.6}").unwrap();
        }
        pheno_csv.push('\n');
    }

    let mut covar_csv = String::from("id,batch,sex\n");
    for i in 0..n {
        writeln!(covar_csv, "ind{i:03},b{},{}", i % 3, i % 2).unwrap();
    }

    let mut meta_csv = String::from("trait,chr,pos_cM\n");
    for j in 0..12 {
        writeln!(meta_csv, "t{j:02},7,{}", 20 + j).unwrap();
    }

    let write = |name: &str, contents: &str| -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, contents).unwrap();
        p
    };
    Dataset {
        geno: write("geno.csv", &geno_csv),
        map: write("map.csv", &map_csv),
        pheno: write("pheno.csv", &pheno_csv),
        covar: write("covar.csv", &covar_csv),
        trait_meta: write("tmeta.csv", &meta_csv),
    }
}

pub struct Dataset {
    pub geno: PathBuf,
    pub map: PathBuf,
    pub pheno: PathBuf,
    pub covar: PathBuf,
    pub trait_meta: PathBuf,
}

/// File contents with timestamp-bearing lines removed, for byte comparison.
pub fn stripped(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.contains("\"timestamp\"") && !l.starts_with("# {"))
        .collect::<Vec<_>>()
        .join("\n")
}
