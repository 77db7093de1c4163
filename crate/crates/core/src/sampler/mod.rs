//! One tempered Markov chain: slice-sampled allocations, conjugate updates
//! of the exposure and stick parameters, adaptive random-walk updates of the
//! excess risks and global parameters, and label-switching moves.

mod chain;
pub mod conditionals;
mod config;
pub mod moves;
mod output;

pub use chain::{chain_rng, phase_of, run_chain, sample_allocations, Chain, Recorder};
pub use config::{
    adapted_scale, AdaptationSchedule, AllocationMode, InitialScales, ProposalScales,
    SamplerConfig,
};
pub use output::{
    read_draws_jsonl, write_draws_jsonl, Counter, Draw, MoveStats, Phase, PosteriorSample,
    TraceRow,
};
