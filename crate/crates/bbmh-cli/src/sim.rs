//! Monte Carlo bias/MSE harness over synthetic set pairs.
//!
//! The pair is two contiguous integer blocks sharing `a` elements, which
//! makes `(f1, f2, a)` exactly controllable; permutations are keyed and
//! pseudorandom, so element labels carry no information. Each replication
//! draws an independent permutation family from a seed derived off
//! `(master_seed, replication index)`, sketches both blocks once at the
//! largest requested size, and evaluates every estimator on prefixes.
//!
//! Replications run in parallel, but results are collected in replication
//! order and folded sequentially, so the emitted CSV is byte-identical for a
//! given spec regardless of worker count.

use std::io::Write;
use std::path::Path;

use bbmh_core::permute::derive_seed;
use bbmh_core::theory::{self, TheoryParams};
use bbmh_core::{estimate, MinwiseSketch, PermutationFamily, SetPairConfig};
use rayon::prelude::*;

use crate::csvfmt;
use crate::err::{CliError, CliResult};
use crate::specfile::{EstimatorSel, SpecFile};

pub struct SimSpec {
    pub d: u64,
    pub f1: u64,
    pub f2: u64,
    pub a: u64,
    pub k_grid: Vec<u32>,
    pub b_list: Vec<EstimatorSel>,
    pub replications: u32,
    pub master_seed: u64,
}

pub struct SimRow {
    pub sel: EstimatorSel,
    pub k: u32,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    pub theory_var: f64,
}

impl SimSpec {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let spec = SpecFile::load(path)?;
        Self::from_specfile(&spec)
    }

    pub fn from_specfile(spec: &SpecFile) -> CliResult<Self> {
        let tokens: Vec<String> = spec.require_list("b_list")?;
        let this = Self {
            d: spec.require("d")?,
            f1: spec.require("f1")?,
            f2: spec.require("f2")?,
            a: spec.require("a")?,
            k_grid: spec.require_list("k_grid")?,
            b_list: EstimatorSel::parse_list(&tokens)?,
            replications: spec.get_or("replications", 25_000)?,
            master_seed: spec.get_or("master_seed", 0)?,
        };
        this.validate()?;
        Ok(this)
    }

    fn validate(&self) -> CliResult<()> {
        if !self.d.is_power_of_two() {
            return Err(CliError::bad_input(
                "universe size d must be a power of two (permutations act on {0..2^m})",
            ));
        }
        SetPairConfig::with_cap(self.d, self.f1, self.f2, self.a, self.d)?;
        if self.replications == 0 {
            return Err(CliError::bad_input("replications must be at least 1"));
        }
        if self.k_grid.contains(&0) {
            return Err(CliError::bad_input("sample counts must be at least 1"));
        }
        let m = self.d.trailing_zeros();
        for sel in &self.b_list {
            match sel {
                EstimatorSel::Exact => {
                    return Err(CliError::bad_input(
                        "the exact estimator is a pr-spec debug mode, not a simulation target",
                    ))
                }
                EstimatorSel::Bits(b) if *b > m => {
                    return Err(CliError::bad_input(format!(
                        "b = {b} exceeds the universe width m = {m}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn theory_variance(sel: EstimatorSel, k: u32, r: f64, r1: f64, r2: f64) -> f64 {
    let k = u64::from(k);
    match sel {
        EstimatorSel::Minwise => theory::variance_minwise(r, k).unwrap_or(f64::NAN),
        EstimatorSel::Bits(b) => TheoryParams::new(r, r1, r2, b, k)
            .map(|p| theory::variance_bbit(&p))
            .unwrap_or(f64::NAN),
        EstimatorSel::Half => TheoryParams::new(r, r1, r2, 1, k)
            .and_then(|p| theory::variance_half(&p))
            .unwrap_or(f64::NAN),
        EstimatorSel::Exact => f64::NAN,
    }
}

pub fn run_bias_mse(spec: &SimSpec) -> CliResult<Vec<SimRow>> {
    let cfg = SetPairConfig::with_cap(spec.d, spec.f1, spec.f2, spec.a, spec.d)?;
    let m = spec.d.trailing_zeros();
    let r = cfg.resemblance();
    let (r1, r2) = (cfg.r1(), cfg.r2());
    let universe = u128::from(spec.d);

    let mut k_grid = spec.k_grid.clone();
    k_grid.sort_unstable();
    k_grid.dedup();
    let mut sels = spec.b_list.clone();
    sels.sort_by_key(|s| s.rank());
    sels.dedup();
    let combos: Vec<(EstimatorSel, u32)> = sels
        .iter()
        .flat_map(|&sel| k_grid.iter().map(move |&k| (sel, k)))
        .collect();

    let k_max = *k_grid.last().expect("validated non-empty");
    let needs_half = sels.contains(&EstimatorSel::Half);
    let perms = if needs_half { 2 * k_max } else { k_max };
    let span1 = 0..spec.f1;
    let span2 = spec.f1 - spec.a..spec.f1 + spec.f2 - spec.a;

    let per_rep: Vec<Vec<f64>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| {
            let seed = derive_seed(spec.master_seed, u64::from(rep));
            let family = PermutationFamily::new(m, seed, perms).expect("validated");
            let s1 = MinwiseSketch::build_from_ranges(&family, std::slice::from_ref(&span1))
                .expect("validated");
            let s2 = MinwiseSketch::build_from_ranges(&family, std::slice::from_ref(&span2))
                .expect("validated");
            combos
                .iter()
                .map(|&(sel, k)| match sel {
                    EstimatorSel::Minwise => {
                        let a = s1.prefix(k).expect("k <= perms");
                        let b = s2.prefix(k).expect("k <= perms");
                        estimate::estimate_minwise(&a, &b).expect("same family").value
                    }
                    EstimatorSel::Bits(bits) => {
                        let a = s1.prefix(k).expect("k <= perms").lowest_bits(bits).expect("b <= m");
                        let b = s2.prefix(k).expect("k <= perms").lowest_bits(bits).expect("b <= m");
                        estimate::estimate_bbit(&a, &b, universe).expect("same family").value
                    }
                    EstimatorSel::Half => {
                        let fold = |s: &MinwiseSketch| {
                            s.prefix(2 * k)
                                .expect("2k <= perms")
                                .lowest_bits(1)
                                .expect("b = 1")
                                .xor_combine()
                                .expect("even count")
                        };
                        estimate::estimate_half(&fold(&s1), &fold(&s2), universe)
                            .expect("same family")
                            .value
                    }
                    EstimatorSel::Exact => unreachable!("rejected in validate"),
                })
                .collect()
        })
        .collect();

    let n = f64::from(spec.replications);
    let rows = combos
        .iter()
        .enumerate()
        .map(|(i, &(sel, k))| {
            let mut sum_dev = 0.0;
            let mut sum_dev_sq = 0.0;
            for rep in &per_rep {
                let dev = rep[i] - r;
                sum_dev += dev;
                sum_dev_sq += dev * dev;
            }
            let bias = sum_dev / n;
            SimRow {
                sel,
                k,
                mean: r + bias,
                bias,
                mse: sum_dev_sq / n,
                theory_var: theory_variance(sel, k, r, r1, r2),
            }
        })
        .collect();
    Ok(rows)
}

pub fn write_csv(rows: &[SimRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "b,k,mean,bias,mse,theory_var")?;
    for row in rows {
        writeln!(
            out,
            "{}",
            csvfmt::line(&[
                row.sel.label(),
                row.k.to_string(),
                csvfmt::float(row.mean),
                csvfmt::float(row.bias),
                csvfmt::float(row.mse),
                csvfmt::float(row.theory_var),
            ])
        )?;
    }
    Ok(())
}
