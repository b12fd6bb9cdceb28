//! State-vector simulator for lackadaisical discrete-time quantum-walk
//! search on 1D and 2D periodic lattices.
//!
//! The walker carries a `d + 1` dimensional coin (edge directions plus a
//! weighted self-loop).  One step applies a marked-vertex coin and the
//! flip-flop shift.  Three coin families are provided: the loop-flip coin
//! (phase flip of only the self-loop at marked vertices, then Grover
//! diffusion everywhere), the AKR coin (full coin-block flip, then
//! diffusion) and the SKW coin (diffusion at unmarked vertices, `-I` at
//! marked ones).
//!
//! Amplitudes are real throughout: the start state and every operator are
//! real-valued, so the complex structure is never needed.  The `parallel`
//! feature (on by default) runs the per-vertex kernels and the experiment
//! rows on rayon; disabling it leaves a fully sequential build with
//! bit-identical results.

pub mod cli;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod operators;
pub mod search;

pub use error::{Result, WalkError};
pub use lattice::{
    build_lattice, CoinDirection, CoinFamily, CoinSpec, LatticeGeometry, VertexId, WalkState,
};
pub use operators::{
    apply_akr_oracle, apply_flipflop_shift, apply_grover_diffusion, apply_loop_oracle,
    apply_skw_coin, step, step_sequential, MarkedSet, Provenance,
};
pub use search::{evolve_trace, find_first_peak, success_probability, PeakResult, ProbabilityTrace};
