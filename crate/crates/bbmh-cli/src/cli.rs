//! Argument parsing and subcommand dispatch.
//!
//! Tables go to stdout; diagnostics (dropped documents, empty ground truth,
//! skipped grid points) go to stderr. Exit codes: 0 success, 2 bad input,
//! 3 incompatible sketches.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use bbmh_core::{estimate, shingle, MinwiseSketch, PermutationFamily, ShingleConfig, Sketch};
use clap::{Parser, Subcommand};

use crate::csvfmt;
use crate::err::{CliError, CliResult};
use crate::pr::PrSpec;
use crate::sim::SimSpec;
use crate::specfile::EstimatorSel;
use crate::theory_table::TheoryGrid;
use crate::{pr, sim, theory_table};

#[derive(Parser, Debug)]
#[command(name = "bbmh", version, about = "b-bit minwise sketching toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Shingle a text file and write its sketch.
    Sketch {
        /// Text file holding one document.
        #[arg(long)]
        input: PathBuf,
        /// Samples kept in the sketch.
        #[arg(long)]
        k: u32,
        /// Bits per sample: 1..=64, "minwise" (full width) or "half"
        /// (each stored bit XORs the lowest bits of two permutations).
        #[arg(long)]
        b: String,
        /// Master seed of the permutation family.
        #[arg(long)]
        seed: u64,
        /// Output sketch file.
        #[arg(long)]
        out: PathBuf,
        /// Shingle width in words.
        #[arg(long, default_value_t = 5)]
        w: u32,
        /// Fingerprint width m; sets live in {0..2^m}.
        #[arg(long, default_value_t = 64)]
        universe_bits: u32,
    },
    /// Estimate resemblance from two sketch files.
    Estimate {
        /// First sketch file.
        #[arg(long)]
        a: PathBuf,
        /// Second sketch file.
        #[arg(long)]
        b_file: PathBuf,
        /// Override the universe width used for the correction factors
        /// (defaults to the width recorded in the sketches).
        #[arg(long)]
        universe_bits: Option<u32>,
    },
    /// Monte Carlo bias/MSE table from a simulation spec.
    Simulate {
        /// key = value spec file.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Precision/recall retrieval benchmark from a pr spec.
    Pr {
        /// key = value spec file.
        #[arg(long)]
        spec: PathBuf,
    },
    /// Closed-form theory table from a grid spec.
    Theory {
        /// key = value grid file.
        #[arg(long)]
        grid: PathBuf,
        /// Add an exact combinatorial column evaluated at universe exact_d.
        #[arg(long)]
        exact: bool,
    },
}

fn build_sketch(
    text: &str,
    sel: EstimatorSel,
    k: u32,
    seed: u64,
    w: u32,
    universe_bits: u32,
) -> CliResult<Sketch> {
    if k == 0 {
        return Err(CliError::bad_input("k must be at least 1"));
    }
    let cfg = ShingleConfig::new(w, universe_bits, true)?;
    let doc = shingle("cli", text, &cfg);
    if doc.is_empty() {
        return Err(CliError::bad_input(
            "the document normalizes to no shingles; nothing to sketch",
        ));
    }
    let perms = match sel {
        EstimatorSel::Half => 2 * k,
        _ => k,
    };
    let family = PermutationFamily::new(universe_bits, seed, perms)?;
    let mins = MinwiseSketch::build(&family, doc.shingles())?;
    Ok(match sel {
        EstimatorSel::Minwise => Sketch::Minwise(mins),
        EstimatorSel::Bits(bits) => Sketch::Bbit(mins.lowest_bits(bits)?),
        EstimatorSel::Half => Sketch::Half(mins.lowest_bits(1)?.xor_combine()?),
        EstimatorSel::Exact => {
            return Err(CliError::bad_input(
                "exact is a pr-spec debug mode; sketches store minwise, b-bit or half samples",
            ))
        }
    })
}

fn run_estimate(
    a: &Sketch,
    b: &Sketch,
    universe_bits: Option<u32>,
    out: &mut impl Write,
) -> CliResult<()> {
    if let Some(m) = universe_bits {
        if m == 0 || m > 64 {
            return Err(CliError::bad_input("universe-bits must lie in 1..=64"));
        }
    }
    let universe_of = |m: u32| estimate::universe_size(universe_bits.unwrap_or(m));
    let (label, est) = match (a, b) {
        (Sketch::Minwise(x), Sketch::Minwise(y)) => {
            ("minwise", estimate::estimate_minwise(x, y)?)
        }
        (Sketch::Bbit(x), Sketch::Bbit(y)) => {
            ("bbit", estimate::estimate_bbit(x, y, universe_of(x.domain_bits()))?)
        }
        (Sketch::Half(x), Sketch::Half(y)) => {
            ("half", estimate::estimate_half(x, y, universe_of(x.domain_bits()))?)
        }
        _ => {
            return Err(CliError::incompatible(
                "the sketches store different sample kinds and cannot be compared",
            ))
        }
    };
    writeln!(out, "kind,b,k,estimate,clamped,truncated")?;
    writeln!(
        out,
        "{}",
        csvfmt::line(&[
            label.to_string(),
            est.kind.bits_per_sample().to_string(),
            est.k.to_string(),
            csvfmt::float(est.value),
            csvfmt::float(est.clamped),
            est.truncated.to_string(),
        ])
    )?;
    Ok(())
}

pub fn run(cli: Cli, out: &mut impl Write) -> CliResult<()> {
    match cli.cmd {
        Cmd::Sketch { input, k, b, seed, out: out_path, w, universe_bits } => {
            let sel = EstimatorSel::parse(&b)?;
            let text = fs::read_to_string(&input)
                .map_err(|e| CliError::bad_input(format!("{}: {e}", input.display())))?;
            let sketch = build_sketch(&text, sel, k, seed, w, universe_bits)?;
            let bytes = sketch.to_bytes();
            fs::write(&out_path, &bytes)
                .map_err(|e| CliError::bad_input(format!("{}: {e}", out_path.display())))?;
            writeln!(
                out,
                "wrote {} ({} bytes, kind={}, m={}, k={})",
                out_path.display(),
                bytes.len(),
                sel.label(),
                universe_bits,
                k
            )?;
            Ok(())
        }
        Cmd::Estimate { a, b_file, universe_bits } => {
            let read = |path: &PathBuf| -> CliResult<Sketch> {
                let bytes = fs::read(path)
                    .map_err(|e| CliError::bad_input(format!("{}: {e}", path.display())))?;
                Ok(Sketch::from_bytes(&bytes)?)
            };
            run_estimate(&read(&a)?, &read(&b_file)?, universe_bits, out)
        }
        Cmd::Simulate { spec } => {
            let spec = SimSpec::from_file(&spec)?;
            let rows = sim::run_bias_mse(&spec)?;
            sim::write_csv(&rows, out)?;
            Ok(())
        }
        Cmd::Pr { spec } => {
            let spec = PrSpec::from_file(&spec)?;
            let (rows, warnings) = pr::run_pr(&spec)?;
            for warning in warnings {
                eprintln!("warning: {warning}");
            }
            pr::write_csv(&rows, out)?;
            Ok(())
        }
        Cmd::Theory { grid, exact } => {
            let grid = TheoryGrid::from_file(&grid)?;
            let (rows, skipped) = theory_table::run_theory(&grid, exact);
            if skipped > 0 {
                eprintln!("warning: skipped {skipped} infeasible grid points");
            }
            if rows.is_empty() {
                return Err(CliError::bad_input("every grid point was infeasible"));
            }
            theory_table::write_csv(&rows, exact, out)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arguments_parse_into_commands() {
        let cli = Cli::try_parse_from([
            "bbmh", "sketch", "--input", "x.txt", "--k", "64", "--b", "half", "--seed", "9",
            "--out", "x.bbmh",
        ])
        .unwrap();
        match cli.cmd {
            Cmd::Sketch { k, ref b, seed, w, universe_bits, .. } => {
                assert_eq!((k, b.as_str(), seed, w, universe_bits), (64, "half", 9, 5, 64));
            }
            _ => panic!("wrong subcommand"),
        }

        let cli = Cli::try_parse_from([
            "bbmh", "estimate", "--a", "x.bbmh", "--b-file", "y.bbmh", "--universe-bits", "20",
        ])
        .unwrap();
        match cli.cmd {
            Cmd::Estimate { universe_bits, .. } => assert_eq!(universe_bits, Some(20)),
            _ => panic!("wrong subcommand"),
        }

        assert!(Cli::try_parse_from(["bbmh", "sketch", "--input", "x"]).is_err());
        assert!(Cli::try_parse_from(["bbmh", "theory"]).is_err());
    }

    #[test]
    fn sketch_round_trip_through_estimate() {
        let text_a = "the quick brown fox jumps over the lazy dog again and again";
        let text_b = "the quick brown fox jumps over the lazy dog again and again";
        let a = build_sketch(text_a, EstimatorSel::Bits(4), 32, 5, 5, 64).unwrap();
        let b = build_sketch(text_b, EstimatorSel::Bits(4), 32, 5, 5, 64).unwrap();
        let mut buf = Vec::new();
        run_estimate(&a, &b, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], "bbit");
        assert_eq!(fields[1], "4");
        assert_eq!(fields[2], "32");
        let value: f64 = fields[3].parse().unwrap();
        assert_eq!(value, 1.0, "identical documents");
    }

    #[test]
    fn kind_mixtures_are_incompatible() {
        let text = "one two three four five six seven eight nine ten";
        let a = build_sketch(text, EstimatorSel::Minwise, 16, 1, 3, 32).unwrap();
        let b = build_sketch(text, EstimatorSel::Bits(2), 16, 1, 3, 32).unwrap();
        let mut buf = Vec::new();
        let err = run_estimate(&a, &b, None, &mut buf).unwrap_err();
        assert_eq!(err.code, crate::err::EXIT_INCOMPATIBLE);
    }

    #[test]
    fn degenerate_documents_are_rejected() {
        let err = build_sketch("?!... --- ...", EstimatorSel::Bits(1), 8, 0, 5, 64).unwrap_err();
        assert_eq!(err.code, crate::err::EXIT_BAD_INPUT);
        let err = build_sketch("some words here", EstimatorSel::Exact, 8, 0, 5, 64).unwrap_err();
        assert_eq!(err.code, crate::err::EXIT_BAD_INPUT);
    }
}
