//! Turning a reckless strategy into a prudent one.
//!
//! The negated compensator can lose without bound, so on its own it violates
//! the collateral duty.  Truncating it at the loss bound -D keeps `D + gain`
//! nonnegative by construction, and mixing the truncations at weights
//! `1/(D·2^D)` spreads one unit of initial capital over every bound at once.
//!
//! ```bash
//! cargo run -p gtp --example prudent_mixture
//! ```

use gtp::forecaster::RandomForecaster;
use gtp::game::{run_game, SkepticStrategy};
use gtp::protocol::ProtocolSpec;
use gtp::reality::RandomSignReality;
use gtp::skeptic::{mixture_of_truncations, QuadraticCompensator, Sign, Truncated};

fn main() {
    let spec = ProtocolSpec::bfqh(1.0).unwrap();
    let rounds = 5000;

    // the raw strategy digs an unbounded hole on a volatile path
    let mut raw = QuadraticCompensator::new(Sign::Minus);
    let trace = run_game(
        &spec,
        &mut RandomForecaster::new(&spec, 7),
        &mut raw,
        &mut RandomSignReality::new(1.0, 8),
        rounds,
        1.0,
    )
    .unwrap();
    let min_gain = trace.rounds.iter().map(|r| r.capital_after - 1.0).fold(f64::INFINITY, f64::min);
    println!("raw negated compensator:        worst gain {min_gain:10.2}");

    // one truncation obeys its bound
    let base = Box::new(QuadraticCompensator::new(Sign::Minus));
    let mut truncated = Truncated::new(&spec, base, 5.0).unwrap();
    let trace = run_game(
        &spec,
        &mut RandomForecaster::new(&spec, 7),
        &mut truncated,
        &mut RandomSignReality::new(1.0, 8),
        rounds,
        1.0,
    )
    .unwrap();
    let min_gain = trace.rounds.iter().map(|r| r.capital_after - 1.0).fold(f64::INFINITY, f64::min);
    println!(
        "truncated at loss -5:           worst gain {min_gain:10.2}   (stopped at round {:?})",
        truncated.stopping_round()
    );

    // the full mixture guarantees a floor below one unit of capital
    let mut mixture = mixture_of_truncations(&spec, || Box::new(QuadraticCompensator::new(Sign::Minus)), 30).unwrap();
    let floor = mixture.prudence_floor().unwrap();
    let trace = run_game(
        &spec,
        &mut RandomForecaster::new(&spec, 7),
        &mut mixture,
        &mut RandomSignReality::new(1.0, 8),
        rounds,
        1.0,
    )
    .unwrap();
    let min_gain = trace.rounds.iter().map(|r| r.capital_after - 1.0).fold(f64::INFINITY, f64::min);
    println!("truncation mixture (D <= 30):   worst gain {min_gain:10.6}   (guaranteed floor -{floor:.6})");
    assert!(min_gain >= -floor - 1e-12);
}
