//! Resumable state for long certification runs, stored as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use permorb_core::separation::SeparationProblem;
use permorb_core::Matrix;

use crate::csv_io::write_atomic;
use crate::error::CliError;

pub const FORMAT: &str = "permorb-certify-checkpoint";

/// Large counters are decimal strings; JSON numbers lose precision past 2^53.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub n: usize,
    pub seed: u64,
    pub reduced: bool,
    pub matrix: Vec<Vec<f64>>,
    pub total_tuples: String,
    /// Every tuple below this index has been scanned without a witness.
    pub next_index: String,
}

impl Checkpoint {
    pub fn new(problem: &SeparationProblem, seed: u64, reduced: bool, next_index: u128) -> Self {
        let m = problem.directions().matrix();
        Self {
            format: FORMAT.into(),
            version: 1,
            n: problem.n(),
            seed,
            reduced,
            matrix: (0..m.rows()).map(|i| m.row(i).to_vec()).collect(),
            total_tuples: problem.total_tuples().to_string(),
            next_index: next_index.to_string(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cp: Checkpoint = serde_json::from_str(&text)
            .map_err(|e| CliError::invalid(format!("{}: not a checkpoint: {e}", path.display())))?;
        if cp.format != FORMAT || cp.version != 1 {
            return Err(CliError::invalid(format!(
                "{}: unknown checkpoint format",
                path.display()
            )));
        }
        Ok(cp)
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        write_atomic(path, &(text + "\n"))
    }

    /// Index to resume from, after checking the checkpoint belongs to this run.
    pub fn resume_index(
        &self,
        problem: &SeparationProblem,
        seed: u64,
        reduced: bool,
    ) -> Result<u128, CliError> {
        let m: &Matrix = problem.directions().matrix();
        let same_matrix = self.matrix.len() == m.rows()
            && self
                .matrix
                .iter()
                .enumerate()
                .all(|(i, row)| row.as_slice() == m.row(i));
        if !same_matrix || self.n != problem.n() || self.seed != seed || self.reduced != reduced {
            return Err(CliError::invalid(
                "checkpoint was written for a different matrix, n, seed or reduction mode",
            ));
        }
        let next: u128 = self
            .next_index
            .parse()
            .map_err(|_| CliError::invalid("checkpoint next_index is not an integer"))?;
        if next > problem.total_tuples() {
            return Err(CliError::invalid(
                "checkpoint index lies beyond the tuple space",
            ));
        }
        Ok(next)
    }
}
