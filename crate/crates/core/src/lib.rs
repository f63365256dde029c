pub mod analysis;
pub mod cli;
pub mod expansion;
pub mod gibbs;
pub mod linalg;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod tensor;

/// Size rayon's global pool from `GIBBSX_THREADS` if set. Results do not
/// depend on the thread count.
pub fn init_threads_from_env() {
    if let Some(n) = std::env::var("GIBBSX_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // a pool that already exists is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Guide chapters, compiled here so their examples run as doctests.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../README.md")]
    pub mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/chain.md")]
    pub mod chain {}
    #[doc = include_str!("../../../book/src/grading.md")]
    pub mod grading {}
    #[doc = include_str!("../../../book/src/convergence.md")]
    pub mod convergence {}
    #[doc = include_str!("../../../book/src/gibbs.md")]
    pub mod gibbs {}
    #[doc = include_str!("../../../book/src/wells.md")]
    pub mod wells {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
