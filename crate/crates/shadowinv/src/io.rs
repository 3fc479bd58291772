//! JSON input formats and CSV output helpers.
//!
//! A POVM file is `{"dim": d, "effects": [[[re, im], ...], ...]}` where each
//! effect is a flat row-major list of `d*d` complex entries. An observable
//! file is `{"dim": d, "matrix": [[re, im], ...]}` with the same entry
//! layout.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use shadow_inversion::{validate_povm, Operator, Povm};

use crate::CliError;

#[derive(Deserialize)]
struct PovmFile {
    dim: usize,
    effects: Vec<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
struct ObservableFile {
    dim: usize,
    matrix: Vec<[f64; 2]>,
}

fn entries_to_operator(dim: usize, entries: &[[f64; 2]]) -> Result<Operator, CliError> {
    let rows: Vec<Complex64> = entries.iter().map(|e| Complex64::new(e[0], e[1])).collect();
    Operator::from_rows(dim, &rows).map_err(CliError::Lib)
}

pub fn load_povm(path: &Path) -> Result<Povm, CliError> {
    let text = fs::read_to_string(path)?;
    let file: PovmFile = serde_json::from_str(&text)?;
    let effects = file
        .effects
        .iter()
        .map(|m| entries_to_operator(file.dim, m))
        .collect::<Result<Vec<_>, _>>()?;
    validate_povm(effects).map_err(CliError::Lib)
}

pub fn load_observable(path: &Path) -> Result<Operator, CliError> {
    let text = fs::read_to_string(path)?;
    let file: ObservableFile = serde_json::from_str(&text)?;
    entries_to_operator(file.dim, &file.matrix)
}

/// Formats a float with 12 significant digits, the stable CSV precision.
pub fn sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn complex_pair(z: Complex64) -> String {
    format!("{}:{}", sig(z.re), sig(z.im))
}

/// Writes lines to `out` when given, stdout otherwise.
pub fn emit(out: Option<&Path>, lines: &[String]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = fs::File::create(path)?;
            for line in lines {
                writeln!(f, "{line}")?;
            }
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for line in lines {
                writeln!(lock, "{line}")?;
            }
            Ok(())
        }
    }
}
