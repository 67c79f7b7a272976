//! Error exponents and Monte-Carlo simulation of an interactive
//! Schalkwijk–Kailath-type scheme over AWGN channels with noisy feedback.
//!
//! The feedback link carries Terminal B's estimate through a dithered
//! modulo-lattice map, so the feedback power constraint holds exactly and
//! the residual cost is an occasional modulo-aliasing event. The crate
//! provides:
//!
//! - [`exponents`]: capacity, critical and expurgation rates, the Gallager
//!   exponent by region, and the Poltyrev exponent;
//! - [`feedback_exponent`]: the achievable exponent optimized over rounds
//!   and lattice looseness, plus its high-SNR closed forms;
//! - [`lattice`]: `cZⁿ`, `D4` and `E8` with nearest-point quantizers and
//!   dithers;
//! - [`jscc`]: modulo-lattice analog transmission with side information;
//! - [`scheme_sim`]: the interlaced two-scheme protocol, its coupled
//!   counterpart, and deterministic Monte-Carlo aggregation;
//! - [`config`]: the `key = value` campaign file format.
//!
//! Rates are in bits per channel use; exponents are in nats.

// `!(x > 0.0)` guards deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod error;
pub mod exponents;
pub mod feedback_exponent;
pub mod jscc;
pub mod lattice;
pub mod scheme_sim;
pub mod units;

pub use channel::ChannelParams;
pub use config::CampaignConfig;
pub use error::{Error, Result};
pub use exponents::{ExponentRegion, ExpurgationEval, RegionBoundaries};
pub use feedback_exponent::{
    Binding, FeedbackExponentResult, FeedbackOptimizer, OutOfRegionExponent,
};
pub use jscc::JsccParams;
pub use lattice::{CosetVector, Lattice, LatticeKind, LatticePoint};
pub use scheme_sim::{
    estimate_error_prob, run_coupled_trial, run_trial, run_trial_pair, wiener_update, Codebook,
    CodebookKind, ErrorEstimate, Proportion, SchemeConfig, SchemeSpec, SystemKind, TrialRecord,
    WienerStep,
};
pub use units::{Rate, SnrValue};
