//! Corpus loading: a directory of text files (one document each) or a
//! single file (one document per line), plus the synthetic planted corpus
//! used by retrieval benchmarks.

use std::path::Path;

use bbmh_core::{shingle, Document, ShingleConfig};

use crate::err::{CliError, CliResult};

/// Loads a corpus from `path`: directories contribute one document per
/// regular file (id = file name), plain files one document per line
/// (id = line number). Documents that normalize to nothing are dropped and
/// counted in the second return value.
pub fn load_corpus(path: &Path, cfg: &ShingleConfig) -> CliResult<(Vec<Document>, usize)> {
    let mut docs = Vec::new();
    let mut dropped = 0usize;
    if path.is_dir() {
        let mut paths: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| CliError::bad_input(format!("{}: {e}", path.display())))?
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::bad_input(format!("{}: {e}", path.display())))?
            .into_iter()
            .map(|entry| entry.path())
            .filter(|p| p.is_file())
            .collect();
        paths.sort();
        for file in paths {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| CliError::bad_input(format!("{}: {e}", file.display())))?;
            let id = file
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| file.display().to_string());
            let doc = shingle(id, &text, cfg);
            if doc.is_empty() {
                dropped += 1;
            } else {
                docs.push(doc);
            }
        }
    } else {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::bad_input(format!("{}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let doc = shingle(format!("line{}", lineno + 1), line, cfg);
            if doc.is_empty() {
                dropped += 1;
            } else {
                docs.push(doc);
            }
        }
    }
    Ok((docs, dropped))
}

/// Builds `pairs` planted document pairs of `doc_size` distinct shingles
/// each. Pair `p` targets resemblance `grid[p % grid.len()]` by sharing
/// `c = round(R·2S/(1+R))` shingles (the realized resemblance `c/(2S−c)` is
/// what ground truth later measures); different pairs share nothing, so
/// cross-pair resemblance is exactly zero.
pub fn synthetic_corpus(
    pairs: u32,
    doc_size: u32,
    grid: &[f64],
    domain_bits: u32,
) -> CliResult<Vec<Document>> {
    if pairs == 0 || doc_size == 0 {
        return Err(CliError::bad_input("synthetic corpus needs pairs >= 1 and doc_size >= 1"));
    }
    if grid.is_empty() {
        return Err(CliError::bad_input("resemblance_grid must list at least one value"));
    }
    if grid.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(CliError::bad_input("resemblance_grid values must lie in [0,1]"));
    }
    let span = 2 * u64::from(doc_size);
    let total = span * u64::from(pairs);
    if domain_bits < 64 && total > (1u64 << domain_bits) {
        return Err(CliError::bad_input(
            "synthetic corpus does not fit in the universe; raise universe_bits",
        ));
    }
    let s = u64::from(doc_size);
    let mut docs = Vec::with_capacity(2 * pairs as usize);
    for p in 0..u64::from(pairs) {
        let target = grid[(p as usize) % grid.len()];
        let c = ((target * 2.0 * s as f64 / (1.0 + target)).round() as u64).min(s);
        let base = p * span;
        let a: Vec<u64> = (base..base + s).collect();
        let b: Vec<u64> = (base + s - c..base + 2 * s - c).collect();
        docs.push(Document::from_shingles(format!("pair{p}a"), a));
        docs.push(Document::from_shingles(format!("pair{p}b"), b));
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bbmh_core::exact_resemblance;

    #[test]
    fn planted_pairs_hit_their_targets() {
        let grid = [0.25, 0.55, 0.95];
        let docs = synthetic_corpus(6, 100, &grid, 64).unwrap();
        assert_eq!(docs.len(), 12);
        for (p, chunk) in docs.chunks(2).enumerate() {
            let r = exact_resemblance(&chunk[0], &chunk[1]).unwrap();
            let target = grid[p % grid.len()];
            // c is rounded to an integer, so realized R is within 1/(2S-c)
            // of the target.
            assert!((r - target).abs() < 0.01, "pair {p}: {r} vs {target}");
        }
        // Cross-pair disjointness.
        assert_eq!(exact_resemblance(&docs[0], &docs[2]), Some(0.0));
        assert_eq!(exact_resemblance(&docs[1], &docs[4]), Some(0.0));
    }

    #[test]
    fn synthetic_validation() {
        assert!(synthetic_corpus(0, 10, &[0.5], 64).is_err());
        assert!(synthetic_corpus(10, 0, &[0.5], 64).is_err());
        assert!(synthetic_corpus(10, 10, &[], 64).is_err());
        assert!(synthetic_corpus(10, 10, &[1.5], 64).is_err());
        assert!(synthetic_corpus(1000, 100, &[0.5], 17).is_err(), "2e5 ids need 18 bits");
        assert!(synthetic_corpus(1000, 100, &[0.5], 18).is_ok());
    }
}
