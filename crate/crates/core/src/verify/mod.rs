//! Sweep-based checks of the estimates, regions and resolvent bounds.
//!
//! "Bounded by some M" is read as: the log-log slope of the measured ratio
//! against `1 + |λ|` (and `1 + |μ|`) does not exceed [`FLAT_SLOPE`].

pub mod compare;
pub mod estimates;
pub mod grid;
pub mod regions;
pub mod report;
pub mod resolvent;
pub mod sign;

pub use compare::{ExampleFamily, OracleComparison, RefinementStudy};
pub use estimates::{
    alpha_rhs, beta_rhs, check_boundary_trace, check_sharp_estimate, dirichlet_rhs, DataMask, DataNorms, EstimateCase,
    ProblemTemplate,
};
pub use grid::{log_space, MuScale, RegionFilter, RegionGrid};
pub use regions::{check_lambda_regions, RegionCase, RegionReport, RegionTemplate};
pub use report::{EstimatePoint, EstimateReport, Verdict, FLAT_SLOPE};
pub use resolvent::{
    check_convolution_decay, check_dore_yakubov, scan_generation, GenerationOperator, GenerationReport, GenerationScan,
    NuScale,
};
pub use sign::{sign_probe_rel_lambda, SignOutcome, SignProbeReport};

/// Order-preserving map over `items` on up to `threads` scoped threads.
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let chunk = items.len().div_ceil(threads);
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}
