//! Experiment driver library behind the `fpq` binary: argument resolution,
//! deterministic parallel replication, and the CSV/JSON output formats.

pub mod commands;
pub mod format;
pub mod opts;

use fpq::rng::Stream;
use rayon::prelude::*;

/// Errors that map to process exit codes: usage errors exit 2, numerical
/// failures exit 3.
#[derive(Debug)]
pub enum CmdError {
    Usage(String),
    Numeric(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Usage(m) => write!(f, "usage error: {m}"),
            CmdError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CmdError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CmdError {}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

/// Run `reps` replications in parallel, replication `i` drawing from the
/// substream `(seed, i)`. Results are collected in replication order, so the
/// output is identical for any thread count.
pub fn run_replications<T, F>(seed: u64, reps: u64, threads: Option<usize>, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut Stream) -> T + Sync,
{
    let job = || {
        (0..reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = Stream::substream(seed, rep);
                body(rep, &mut rng)
            })
            .collect()
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(job),
        None => job(),
    }
}
