//! The rate of the strong law, watched live in the coin game.
//!
//! With fair tosses the centered sums S_n grow like √n, while the scale
//! √g₂(Ā_n) with g₂(x) = x ln x (ln ln x)² grows just a little faster — so
//! the normalized statistic drifts to zero, and the forcing strategy that
//! underwrites the claim (the weighted compensator, reduced to a scalar coin
//! bet) stays bounded on fair paths.
//!
//! ```bash
//! cargo run -p gtp --example slln_rate
//! ```

use gtp::diagnostics::{run_rate_experiment, RateConfig};
use gtp::forecaster::CoinForecaster;
use gtp::protocol::ProtocolSpec;
use gtp::reality::FairCoinReality;
use gtp::skeptic::{CoinReduced, WeightedCompensator};
use gtp::GrowthFunction;

fn main() {
    let spec = ProtocolSpec::coin_toss();
    let cfg = RateConfig {
        growth: GrowthFunction::iterated_log(2),
        rounds: 100_000,
        replications: 10,
        seed: 42,
        capital_bound: 1e3,
        normalize_by_price_sums: true,
    };
    let summary = run_rate_experiment(&spec, &cfg, |stream| {
        (
            Box::new(CoinForecaster::new(0.5)),
            Box::new(CoinReduced::new(Box::new(WeightedCompensator::new(
                GrowthFunction::iterated_log(2),
            )))),
            Box::new(FairCoinReality::new(stream)),
        )
    })
    .unwrap();

    println!("coin game, p = 1/2, fair tosses, statistic |S_n|/√g₂(Ā_n):\n");
    print!("{}", summary.table());
    println!("\n(a 'drop' means the last quarter's maximum sits below the first quarter's)");
}
