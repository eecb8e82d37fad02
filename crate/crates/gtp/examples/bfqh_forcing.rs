//! The compensator bet in the quadratic-hedge game.
//!
//! Skeptic stakes `M_n = 2 S_{n-1}`, `V_n = 1`, which telescopes to the
//! capital `S_n² - A_n`: whenever the centered outcome sums wander while the
//! hedge prices stay summable, the capital explodes — that is how Skeptic
//! forces "Σ v_n < ∞  ⟺  Σ (x_n - m_n) converges".
//!
//! ```bash
//! cargo run -p gtp --example bfqh_forcing
//! ```

use gtp::forecaster::ConstForecaster;
use gtp::game::run_game_observed;
use gtp::protocol::ProtocolSpec;
use gtp::reality::RandomSignReality;
use gtp::skeptic::{QuadraticCompensator, Sign};
use gtp::trace_io::write_jsonl;

fn main() {
    let spec = ProtocolSpec::bfqh(1.0).unwrap();
    let rounds = 2000;

    // Reality plays ±1 at random against the price 0 and the maximal hedge
    // price 1: the squared spread always matches its price, so the capital
    // identity S² - A is pitted against real volatility.
    let mut forecaster = ConstForecaster::new(0.0, 1.0);
    let mut skeptic = QuadraticCompensator::new(Sign::Plus);
    let mut reality = RandomSignReality::new(1.0, 2024);

    let mut worst_residual = 0.0f64;
    let trace = run_game_observed(&spec, &mut forecaster, &mut skeptic, &mut reality, rounds, 1.0, |round, strat| {
        let identity = strat.capital_identity().unwrap();
        let realized = round.capital_after - 1.0;
        worst_residual = worst_residual.max((identity - realized).abs());
    })
    .unwrap();

    let sums = trace.spread_sums();
    println!("quadratic-hedge game, {rounds} rounds, price 0, hedge price 1");
    println!("final centered sum  S_n = {:+.3}", sums[rounds]);
    println!("final capital       K_n = {:.3}", trace.final_capital());
    println!("identity S² - A residual, worst round: {worst_residual:.2e}");

    let path = std::env::temp_dir().join("bfqh_forcing.jsonl");
    let mut out = std::fs::File::create(&path).unwrap();
    write_jsonl(&trace, Some(2024), &mut out).unwrap();
    println!("trace written to {} (verify with: gtp verify <file>)", path.display());
}
