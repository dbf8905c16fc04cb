//! Closed-form theory tables over a grid of `(r1, r2, R)` points.
//!
//! Grids come from the same `key = value` format as the other specs, in one
//! of two shapes: a `product` grid crossing `r1_list x r2_list x r_list`, or
//! explicit `row = r1,r2,R` lines (repeatable, emitted in file order). Each
//! point expands over `b_list`.
//!
//! Points that violate `R <= min(r1,r2)/max(r1,r2)` have no realizing set
//! pair; they are skipped and counted rather than failing the run, so coarse
//! grids can sweep the feasible region without pre-filtering. Ratio columns
//! are NaN at `R = 1`, where both storage factors vanish.

use std::io::Write;
use std::path::Path;

use bbmh_core::theory::{self, TheoryParams};
use bbmh_core::SetPairConfig;
use bbmh_core::oracle::exact_match_probability_f64;

use crate::csvfmt;
use crate::err::{CliError, CliResult};
use crate::specfile::SpecFile;

pub struct TheoryGrid {
    pub points: Vec<(f64, f64, f64)>,
    pub b_list: Vec<u32>,
    pub k: u64,
    pub exact_d: u64,
}

pub struct TheoryRow {
    pub r1: f64,
    pub r2: f64,
    pub resemblance: f64,
    pub b: u32,
    pub k: u64,
    pub e_match: f64,
    pub variance: f64,
    pub storage_factor: f64,
    pub b32_over_b: f64,
    pub b64_over_b: f64,
    pub exact_e_match: Option<f64>,
}

impl TheoryGrid {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let spec = SpecFile::load(path)?;
        Self::from_specfile(&spec)
    }

    pub fn from_specfile(spec: &SpecFile) -> CliResult<Self> {
        let rows = spec.all("row");
        let has_product = spec.get_str("r_list")?.is_some();
        let points = if !rows.is_empty() {
            if has_product {
                return Err(CliError::bad_input(
                    "give either row lines or r1_list/r2_list/r_list, not both",
                ));
            }
            rows.iter()
                .map(|raw| {
                    let parts: Vec<f64> = raw
                        .split(',')
                        .map(|p| {
                            p.trim().parse().map_err(|_| {
                                CliError::bad_input(format!("bad row component {p:?} in {raw:?}"))
                            })
                        })
                        .collect::<CliResult<_>>()?;
                    match parts.as_slice() {
                        [r1, r2, r] => Ok((*r1, *r2, *r)),
                        _ => Err(CliError::bad_input(format!(
                            "row must be r1,r2,R; got {raw:?}"
                        ))),
                    }
                })
                .collect::<CliResult<Vec<_>>>()?
        } else {
            let r1s: Vec<f64> = spec.require_list("r1_list")?;
            let r2s: Vec<f64> = spec.require_list("r2_list")?;
            let rs: Vec<f64> = spec.require_list("r_list")?;
            let mut points = Vec::with_capacity(r1s.len() * r2s.len() * rs.len());
            for &r1 in &r1s {
                for &r2 in &r2s {
                    for &r in &rs {
                        points.push((r1, r2, r));
                    }
                }
            }
            points
        };
        if points.is_empty() {
            return Err(CliError::bad_input("the grid has no points"));
        }

        let mut b_list: Vec<u32> = match spec.get_str("b_list")? {
            Some(_) => spec.require_list("b_list")?,
            None => vec![1, 2, 4],
        };
        b_list.sort_unstable();
        b_list.dedup();
        if b_list.is_empty() || b_list.iter().any(|&b| b == 0 || b > 64) {
            return Err(CliError::bad_input("b_list entries must lie in 1..=64"));
        }

        let this = Self {
            points,
            b_list,
            k: spec.get_or("k", 1)?,
            exact_d: spec.get_or("exact_d", 1 << 16)?,
        };
        if this.k == 0 {
            return Err(CliError::bad_input("k must be at least 1"));
        }
        if this.exact_d == 0 || this.exact_d > (1 << 20) {
            return Err(CliError::bad_input(
                "exact_d must lie in 1..=2^20 (the oracle is quadratic in D)",
            ));
        }
        Ok(this)
    }
}

/// Expands the grid; returns the rows plus the count of infeasible points
/// skipped. With `with_exact`, evaluates the combinatorial oracle on the
/// nearest integer set pair in a universe of `exact_d` (NaN when rounding
/// cannot realize the point).
pub fn run_theory(grid: &TheoryGrid, with_exact: bool) -> (Vec<TheoryRow>, usize) {
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for &(r1, r2, r) in &grid.points {
        if TheoryParams::new(r, r1, r2, 1, grid.k).is_err() {
            skipped += 1;
            continue;
        }
        let exact_cfg = if with_exact {
            SetPairConfig::from_ratios(grid.exact_d, r1, r2, r).ok()
        } else {
            None
        };
        for &b in &grid.b_list {
            let p = TheoryParams::new(r, r1, r2, b, grid.k).expect("checked at b = 1");
            rows.push(TheoryRow {
                r1,
                r2,
                resemblance: r,
                b,
                k: grid.k,
                e_match: theory::match_probability(&p),
                variance: theory::variance_bbit(&p),
                storage_factor: theory::storage_factor(&p),
                b32_over_b: theory::improvement_ratio(32, b, &p).unwrap_or(f64::NAN),
                b64_over_b: theory::improvement_ratio(64, b, &p).unwrap_or(f64::NAN),
                exact_e_match: with_exact.then(|| {
                    exact_cfg
                        .as_ref()
                        .and_then(|cfg| exact_match_probability_f64(cfg, b).ok())
                        .unwrap_or(f64::NAN)
                }),
            });
        }
    }
    (rows, skipped)
}

pub fn write_csv(rows: &[TheoryRow], with_exact: bool, out: &mut impl Write) -> std::io::Result<()> {
    let mut header =
        "r1,r2,resemblance,b,k,e_match,variance,storage_factor,b32_over_b,b64_over_b".to_string();
    if with_exact {
        header.push_str(",exact_e_match");
    }
    writeln!(out, "{header}")?;
    for row in rows {
        let mut fields = vec![
            csvfmt::float(row.r1),
            csvfmt::float(row.r2),
            csvfmt::float(row.resemblance),
            row.b.to_string(),
            row.k.to_string(),
            csvfmt::float(row.e_match),
            csvfmt::float(row.variance),
            csvfmt::float(row.storage_factor),
            csvfmt::float(row.b32_over_b),
            csvfmt::float(row.b64_over_b),
        ];
        if let Some(exact) = row.exact_e_match {
            fields.push(csvfmt::float(exact));
        }
        writeln!(out, "{}", csvfmt::line(&fields))?;
    }
    Ok(())
}
