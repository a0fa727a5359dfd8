//! Parallel drivers around the sequential library routines. Work is split
//! into fixed chunks and merged in chunk order, so results do not depend on
//! the thread count.

use std::path::Path;

use rayon::prelude::*;
use rayon::ThreadPool;

use permorb_core::audit::{
    ose_check_pair, pair_ratio, pool_pair, DistortionEstimate, OseReport, SketchGram,
};
use permorb_core::embeddings::SketchOperator;
use permorb_core::separation::{
    verdict_from_scan, ScanOutcome, SeparationProblem, SeparationVerdict,
};
use permorb_core::{DirectionSet, RngSeed};

use crate::checkpoint::Checkpoint;
use crate::error::CliError;

/// Pool indices per parallel task.
const PAIR_CHUNK: u64 = 256;

/// Tuples per certification chunk; one checkpoint is written per batch.
pub const TUPLE_CHUNK: u128 = 1_000_000;

pub fn pool(threads: Option<usize>) -> Result<ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::invalid(format!("thread pool: {e}")))
}

fn chunks(trials: u64) -> Vec<(u64, u64)> {
    (0..trials.div_ceil(PAIR_CHUNK))
        .map(|c| (c * PAIR_CHUNK, ((c + 1) * PAIR_CHUNK).min(trials)))
        .collect()
}

pub fn estimate_distortion(
    tp: &ThreadPool,
    a: &DirectionSet,
    n: usize,
    trials: u64,
    seed: RngSeed,
) -> Result<DistortionEstimate, CliError> {
    let parts: Vec<Result<DistortionEstimate, CliError>> = tp.install(|| {
        chunks(trials)
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut est = DistortionEstimate::default();
                for i in lo..hi {
                    let (x, y) = pool_pair(a, n, seed, i)?;
                    est.record(i, pair_ratio(a, &x, &y)?);
                }
                Ok(est)
            })
            .collect()
    });
    parts
        .into_iter()
        .try_fold(DistortionEstimate::default(), |acc, p| Ok(acc.merge(p?)))
}

pub fn ose_check(
    tp: &ThreadPool,
    a: &DirectionSet,
    l: &SketchOperator,
    n: usize,
    epsilon: f64,
    trials: u64,
    seed: RngSeed,
) -> Result<OseReport, CliError> {
    let gram = SketchGram::new(l);
    let parts: Vec<Result<OseReport, CliError>> = tp.install(|| {
        chunks(trials)
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut r = OseReport::default();
                for i in lo..hi {
                    ose_check_pair(a, &gram, n, epsilon, seed, i, &mut r)?;
                }
                Ok(r)
            })
            .collect()
    });
    parts
        .into_iter()
        .try_fold(OseReport::default(), |acc, p| Ok(acc.merge(p?)))
}

/// Where a certification run stores its progress.
pub struct CheckpointSink<'a> {
    pub path: &'a Path,
    pub seed: u64,
    pub reduced: bool,
}

/// Scans `[start, min(total, budget))` chunk by chunk. The witness with the
/// smallest tuple index wins; `tuples_examined` counts `start` as done.
pub fn certify(
    tp: &ThreadPool,
    problem: &SeparationProblem,
    budget: u128,
    start: u128,
    sink: Option<&CheckpointSink<'_>>,
) -> Result<SeparationVerdict, CliError> {
    let total = problem.total_tuples();
    let end = total.min(budget);
    let batch = (tp.current_num_threads() as u128 * 4).max(1);
    let mut next = start.min(end);
    let mut outcome = ScanOutcome {
        witness: None,
        covered: next,
        nodes: 0,
    };
    while next < end {
        let ranges: Vec<(u128, u128)> = (0..batch)
            .map(|b| next + b * TUPLE_CHUNK)
            .take_while(|&lo| lo < end)
            .map(|lo| (lo, (lo + TUPLE_CHUNK).min(end)))
            .collect();
        let scans: Vec<ScanOutcome> = tp.install(|| {
            ranges
                .par_iter()
                .map(|&(lo, hi)| problem.scan(lo, hi))
                .collect()
        });
        for s in scans {
            outcome.covered += s.covered;
            outcome.nodes += s.nodes;
            if s.witness.is_some() {
                outcome.witness = s.witness;
                return Ok(verdict_from_scan(outcome, total, budget));
            }
        }
        next = ranges.last().map_or(end, |r| r.1);
        if let Some(sink) = sink {
            Checkpoint::new(problem, sink.seed, sink.reduced, next).save(sink.path)?;
        }
    }
    Ok(verdict_from_scan(outcome, total, budget))
}
