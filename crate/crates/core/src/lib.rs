//! Elkies and Atkin primes for elliptic curves over prime fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`arith`]: primes, Jacobi symbols, multiplicative functions and the
//!   square-free product sets used by the sieve sums.
//! * [`curves`]: exact point counting, traces of Frobenius and trace
//!   realisability over `F_p`.
//! * [`elkies`]: per-prime Elkies/Atkin classification, the counters
//!   `N_e`, `N_a` and the bound `L_p` at which the Elkies product first
//!   exceeds `4 sqrt(p)`.
//! * [`charsums`]: exact evaluation of the quadratic character sums that
//!   control the distribution of Elkies primes.
//! * [`search`]: scans for trace pairs whose small Elkies primes are scarce.

pub mod arith;
pub mod charsums;
pub mod curves;
pub mod elkies;
mod error;
pub mod search;

pub use error::{Error, Result};

/// Runs `f` on a rayon pool with `workers` threads, or on the global pool
/// when `workers` is zero.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
