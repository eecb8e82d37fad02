//! Betting-game simulation: forecasting protocols, Skeptic and Reality
//! strategies, capital processes, and convergence diagnostics.
//!
//! Three players repeat a round: Forecaster prices the next outcome (and a
//! hedge on its deviation), Skeptic stakes capital on the prices, Reality
//! settles the round.  Skeptic's capital process is the martingale-like
//! object everything else is built from:
//!
//! - [`protocol`] — move spaces, coherence validation, payoffs, the two-point
//!   witness measure, and the coin-game reduction;
//! - [`game`] — the round loop and the trace it records;
//! - [`skeptic`] — compensator bets, truncation at a loss bound, account
//!   mixtures, upcrossing bets, coin-game forcing, and the variance and
//!   multiplicative strategies for general hedges;
//! - [`reality`] — coherent responses, surrogate compliance (a Skeptic
//!   strategy turned into a deterministic strategy for Reality), the online
//!   ε-sequence, and divergence compliance via the trinomial reduction;
//! - [`forecaster`] — constant, coin, scheduled, and seeded-random price
//!   setters;
//! - [`hedge`] / [`growth`] — hedge functions with their axioms and
//!   regularizations, and the iterated-logarithm scale family;
//! - [`gilat`] — the lock-step three-case construction showing forecast
//!   sequences cannot characterize convergence;
//! - [`diagnostics`] — Kronecker checks, ratio-increment bounds, Cauchy
//!   witnesses, and rate experiments;
//! - [`trace_io`] — JSON Lines / CSV traces and bit-exact replay verification;
//! - [`parse`] — the compact descriptor strings the CLI uses.
//!
//! Single game runs are sequential and deterministic; strategy instances own
//! all their state, so distinct runs share nothing and may execute
//! concurrently.  There is no global mutable state.
//!
//! ```
//! use gtp::forecaster::ConstForecaster;
//! use gtp::game::run_game;
//! use gtp::protocol::ProtocolSpec;
//! use gtp::reality::RandomIntervalReality;
//! use gtp::skeptic::{QuadraticCompensator, Sign};
//!
//! let spec = ProtocolSpec::bfqh(1.0).unwrap();
//! let mut forecaster = ConstForecaster::new(0.0, 0.5);
//! let mut skeptic = QuadraticCompensator::new(Sign::Plus);
//! let mut reality = RandomIntervalReality::new(1.0, 7);
//! let trace = run_game(&spec, &mut forecaster, &mut skeptic, &mut reality, 100, 1.0).unwrap();
//! assert_eq!(trace.rounds.len(), 100);
//! ```

pub mod diagnostics;
pub mod forecaster;
pub mod game;
pub mod gilat;
pub mod growth;
pub mod hedge;
pub mod parse;
pub mod protocol;
pub mod reality;
pub mod skeptic;
pub mod trace_io;

pub use game::{run_game, run_game_observed, GameTrace, Round};
pub use growth::GrowthFunction;
pub use hedge::Hedge;
pub use protocol::{ForecastMove, ProtocolSpec, RealityMove, SkepticMove};

/// Comparison helper used throughout the tests and diagnostics: true when
/// `|a - b| ≤ abs_floor + rel · max(1, |a|, |b|)`.
pub fn within(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    (a - b).abs() <= abs_floor + rel * a.abs().max(b.abs()).max(1.0)
}
