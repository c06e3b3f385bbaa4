//! QUBO embeddings of two machine-learning problems (kernel 2-means
//! clustering and soft-margin SVM training), exact spectral gaps by
//! exhaustive enumeration, dense analysis of the annealing Hamiltonian
//! `H(s) = f(s) H_I + g(s) H_P`, and a seeded sweep harness that relates
//! data-hardness parameters to the gap.
//!
//! Bit convention used everywhere: a state is packed into a `u64` where bit
//! `i` holds variable `z_i` (variable 0 is the least significant bit).

pub mod annealing;
pub mod datagen;
pub mod embeddings;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod qubo;
pub mod spectrum;

pub use error::{Error, Result};
pub use qubo::{IsingInstance, QuboInstance, SpectrumSummary};

/// Run `f` inside a dedicated rayon pool with `threads` workers.
///
/// `None` (or zero) uses the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) if t > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Contract(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}
