//! Precision/recall benchmark for sketch-based near-duplicate retrieval.
//!
//! Ground truth is the exact resemblance of every document pair; a pair is
//! "retrieved" by an estimator when its estimate reaches the threshold.
//! Precision and recall are averaged over repetitions, each using an
//! independent permutation family. A repetition that retrieves nothing
//! counts as precision 1.0 (it made no false claims); a threshold with no
//! qualifying pairs at all has undefined recall, reported as -1.0 with a
//! warning.
//!
//! The `exact` pseudo-estimator scores pairs by their true resemblance and
//! therefore lands at precision = recall = 1 wherever ground truth is
//! non-empty; it is a harness self-check, not a sketch.

use std::io::Write;
use std::path::{Path, PathBuf};

use bbmh_core::permute::derive_seed;
use bbmh_core::{estimate, exact_resemblance, Document, MinwiseSketch, PermutationFamily, ShingleConfig};
use rayon::prelude::*;

use crate::corpus;
use crate::csvfmt;
use crate::err::{CliError, CliResult};
use crate::specfile::{EstimatorSel, SpecFile};

pub enum CorpusSource {
    Path(PathBuf),
    Synthetic { pairs: u32, doc_size: u32, grid: Vec<f64> },
}

pub struct PrSpec {
    pub source: CorpusSource,
    pub thresholds: Vec<f64>,
    pub k_grid: Vec<u32>,
    pub b_list: Vec<EstimatorSel>,
    pub repetitions: u32,
    pub master_seed: u64,
    pub universe_bits: u32,
    pub w: u32,
}

pub struct PrRow {
    pub r0: f64,
    pub sel: EstimatorSel,
    pub k: u32,
    pub precision: f64,
    pub recall: f64,
}

impl PrSpec {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let spec = SpecFile::load(path)?;
        Self::from_specfile(&spec)
    }

    pub fn from_specfile(spec: &SpecFile) -> CliResult<Self> {
        let source = match (spec.get_str("corpus")?, spec.get_str("synthetic_pairs")?) {
            (Some(_), Some(_)) => {
                return Err(CliError::bad_input(
                    "give either corpus or synthetic_pairs, not both",
                ))
            }
            (Some(path), None) => CorpusSource::Path(PathBuf::from(path)),
            (None, Some(_)) => CorpusSource::Synthetic {
                pairs: spec.require("synthetic_pairs")?,
                doc_size: spec.require("doc_size")?,
                grid: spec.require_list("resemblance_grid")?,
            },
            (None, None) => {
                return Err(CliError::bad_input(
                    "a pr spec needs a corpus path or synthetic_pairs",
                ))
            }
        };
        let tokens: Vec<String> = spec.require_list("b_list")?;
        let this = Self {
            source,
            thresholds: spec.require_list("thresholds")?,
            k_grid: spec.require_list("k_grid")?,
            b_list: EstimatorSel::parse_list(&tokens)?,
            repetitions: spec.get_or("repetitions", 700)?,
            master_seed: spec.get_or("master_seed", 0)?,
            universe_bits: spec.get_or("universe_bits", 64)?,
            w: spec.get_or("w", 5)?,
        };
        this.validate()?;
        Ok(this)
    }

    fn validate(&self) -> CliResult<()> {
        if self.thresholds.is_empty() {
            return Err(CliError::bad_input("thresholds must not be empty"));
        }
        if self.thresholds.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(CliError::bad_input(
                "thresholds must lie strictly between 0 and 1",
            ));
        }
        if self.k_grid.contains(&0) {
            return Err(CliError::bad_input("sample counts must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(CliError::bad_input("repetitions must be at least 1"));
        }
        if self.universe_bits == 0 || self.universe_bits > 64 {
            return Err(CliError::bad_input("universe_bits must lie in 1..=64"));
        }
        if let CorpusSource::Synthetic { pairs, doc_size, grid } = &self.source {
            if *pairs == 0 || *doc_size == 0 || grid.is_empty() {
                return Err(CliError::bad_input(
                    "synthetic corpora need pairs >= 1, doc_size >= 1 and a resemblance grid",
                ));
            }
        }
        for sel in &self.b_list {
            if let EstimatorSel::Bits(b) = sel {
                if *b > self.universe_bits {
                    return Err(CliError::bad_input(format!(
                        "b = {b} exceeds universe_bits = {}",
                        self.universe_bits
                    )));
                }
            }
        }
        Ok(())
    }

    fn documents(&self) -> CliResult<(Vec<Document>, Vec<String>)> {
        let mut warnings = Vec::new();
        let docs = match &self.source {
            CorpusSource::Path(path) => {
                let cfg = ShingleConfig::new(self.w, self.universe_bits, true)?;
                let (docs, dropped) = corpus::load_corpus(path, &cfg)?;
                if dropped > 0 {
                    warnings.push(format!(
                        "dropped {dropped} documents that normalize to nothing"
                    ));
                }
                docs
            }
            CorpusSource::Synthetic { pairs, doc_size, grid } => {
                corpus::synthetic_corpus(*pairs, *doc_size, grid, self.universe_bits)?
            }
        };
        if docs.len() < 2 {
            return Err(CliError::bad_input(
                "the corpus must keep at least two non-empty documents",
            ));
        }
        Ok((docs, warnings))
    }
}

/// Precision/recall of one score vector against per-threshold ground truth.
/// Recall is NaN where ground truth is empty; callers turn that into the
/// -1.0 sentinel after averaging.
fn score_pass(scores: &[f64], gt: &[Vec<bool>], thresholds: &[f64]) -> Vec<(f64, f64)> {
    thresholds
        .iter()
        .enumerate()
        .map(|(ti, &r0)| {
            let mut retrieved = 0u64;
            let mut hits = 0u64;
            let mut truth = 0u64;
            for (pair, &score) in scores.iter().enumerate() {
                let is_true = gt[ti][pair];
                truth += u64::from(is_true);
                if score >= r0 {
                    retrieved += 1;
                    hits += u64::from(is_true);
                }
            }
            let precision = if retrieved == 0 { 1.0 } else { hits as f64 / retrieved as f64 };
            let recall = if truth == 0 { f64::NAN } else { hits as f64 / truth as f64 };
            (precision, recall)
        })
        .collect()
}

pub fn run_pr(spec: &PrSpec) -> CliResult<(Vec<PrRow>, Vec<String>)> {
    let (docs, mut warnings) = spec.documents()?;
    let n = docs.len();
    let universe = estimate::universe_size(spec.universe_bits);

    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let exact: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| exact_resemblance(&docs[i], &docs[j]).expect("non-empty documents"))
        .collect();
    let gt: Vec<Vec<bool>> = spec
        .thresholds
        .iter()
        .map(|&r0| exact.iter().map(|&r| r >= r0).collect())
        .collect();
    for (ti, mask) in gt.iter().enumerate() {
        if !mask.iter().any(|&x| x) {
            warnings.push(format!(
                "no document pair reaches threshold {}; recall there is reported as -1.0",
                spec.thresholds[ti]
            ));
        }
    }

    let mut k_grid = spec.k_grid.clone();
    k_grid.sort_unstable();
    k_grid.dedup();
    let mut sels = spec.b_list.clone();
    sels.sort_by_key(|s| s.rank());
    sels.dedup();
    let sim_combos: Vec<(EstimatorSel, u32)> = sels
        .iter()
        .filter(|&&sel| sel != EstimatorSel::Exact)
        .flat_map(|&sel| k_grid.iter().map(move |&k| (sel, k)))
        .collect();

    // (combo, threshold) -> averaged (precision, recall).
    let mut averages = vec![(0.0f64, 0.0f64); sim_combos.len() * spec.thresholds.len()];
    if !sim_combos.is_empty() {
        let k_max = *k_grid.last().expect("validated non-empty");
        let needs_half = sels.contains(&EstimatorSel::Half);
        let perms = if needs_half { 2 * k_max } else { k_max };

        let per_rep: Vec<Vec<(f64, f64)>> = (0..spec.repetitions)
            .into_par_iter()
            .map(|rep| {
                let seed = derive_seed(spec.master_seed, u64::from(rep));
                let family =
                    PermutationFamily::new(spec.universe_bits, seed, perms).expect("validated");
                let sketches: Vec<MinwiseSketch> = docs
                    .iter()
                    .map(|d| MinwiseSketch::build(&family, d.shingles()).expect("validated"))
                    .collect();
                let mut out = Vec::with_capacity(sim_combos.len() * spec.thresholds.len());
                for &(sel, k) in &sim_combos {
                    let scores: Vec<f64> = match sel {
                        EstimatorSel::Minwise => {
                            let views: Vec<_> = sketches
                                .iter()
                                .map(|s| s.prefix(k).expect("k <= perms"))
                                .collect();
                            pairs
                                .iter()
                                .map(|&(i, j)| {
                                    estimate::estimate_minwise(&views[i], &views[j])
                                        .expect("same family")
                                        .value
                                })
                                .collect()
                        }
                        EstimatorSel::Bits(bits) => {
                            let views: Vec<_> = sketches
                                .iter()
                                .map(|s| {
                                    s.prefix(k)
                                        .expect("k <= perms")
                                        .lowest_bits(bits)
                                        .expect("b <= m")
                                })
                                .collect();
                            pairs
                                .iter()
                                .map(|&(i, j)| {
                                    estimate::estimate_bbit(&views[i], &views[j], universe)
                                        .expect("same family")
                                        .value
                                })
                                .collect()
                        }
                        EstimatorSel::Half => {
                            let views: Vec<_> = sketches
                                .iter()
                                .map(|s| {
                                    s.prefix(2 * k)
                                        .expect("2k <= perms")
                                        .lowest_bits(1)
                                        .expect("b = 1")
                                        .xor_combine()
                                        .expect("even count")
                                })
                                .collect();
                            pairs
                                .iter()
                                .map(|&(i, j)| {
                                    estimate::estimate_half(&views[i], &views[j], universe)
                                        .expect("same family")
                                        .value
                                })
                                .collect()
                        }
                        EstimatorSel::Exact => unreachable!("filtered out"),
                    };
                    out.extend(score_pass(&scores, &gt, &spec.thresholds));
                }
                out
            })
            .collect();

        let reps = f64::from(spec.repetitions);
        for rep in &per_rep {
            for (slot, &(p, r)) in averages.iter_mut().zip(rep) {
                slot.0 += p / reps;
                if !r.is_nan() {
                    slot.1 += r / reps;
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (ci, &(sel, k)) in sim_combos.iter().enumerate() {
        for (ti, &r0) in spec.thresholds.iter().enumerate() {
            let (precision, recall) = averages[ci * spec.thresholds.len() + ti];
            let recall = if gt[ti].iter().any(|&x| x) { recall } else { -1.0 };
            rows.push(PrRow { r0, sel, k, precision, recall });
        }
    }
    if sels.contains(&EstimatorSel::Exact) {
        let scored = score_pass(&exact, &gt, &spec.thresholds);
        for &k in &k_grid {
            for (ti, &r0) in spec.thresholds.iter().enumerate() {
                let (precision, recall) = scored[ti];
                let recall = if recall.is_nan() { -1.0 } else { recall };
                rows.push(PrRow { r0, sel: EstimatorSel::Exact, k, precision, recall });
            }
        }
    }
    rows.sort_by(|a, b| {
        a.r0.total_cmp(&b.r0)
            .then_with(|| a.sel.rank().cmp(&b.sel.rank()))
            .then_with(|| a.k.cmp(&b.k))
    });
    Ok((rows, warnings))
}

pub fn write_csv(rows: &[PrRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "r0,b,k,precision,recall")?;
    for row in rows {
        writeln!(
            out,
            "{}",
            csvfmt::line(&[
                csvfmt::float(row.r0),
                row.sel.label(),
                row.k.to_string(),
                csvfmt::float(row.precision),
                csvfmt::float(row.recall),
            ])
        )?;
    }
    Ok(())
}
