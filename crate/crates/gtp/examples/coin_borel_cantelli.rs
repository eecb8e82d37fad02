//! Forcing the Borel–Cantelli equivalence in the coin game.
//!
//! The prudent mixture behind "Σ p_n < ∞ ⟺ Σ x_n < ∞": truncation accounts
//! on the ±unit bets catch one-sided drifts of S_n = Σ(x_k - p_k), a dyadic
//! grid of upcrossing accounts covers bounded oscillation.  On paths where
//! both series behave alike the capital stays bounded; on violating paths it
//! grows without apparent bound.
//!
//! ```bash
//! cargo run -p gtp --example coin_borel_cantelli
//! ```

use gtp::forecaster::{CoinForecaster, SeqForecaster};
use gtp::game::run_game;
use gtp::protocol::{ForecastMove, ProtocolSpec};
use gtp::reality::ScriptedReality;
use gtp::skeptic::coin_bc;

fn main() {
    let spec = ProtocolSpec::coin_toss();
    let rounds = 10_000;

    // Conforming path: p_n = 2^{-n} summable, and Reality lets only the first
    // 20 tosses land heads — both series finite.
    let forecasts: Vec<ForecastMove> =
        (1..=rounds).map(|n| ForecastMove::coin((0.5f64).powi(n.min(60) as i32))).collect();
    let script: Vec<f64> = (1..=rounds).map(|n| if n <= 20 { 1.0 } else { 0.0 }).collect();
    let mut skeptic = coin_bc(20);
    let trace = run_game(
        &spec,
        &mut SeqForecaster::new(forecasts),
        &mut skeptic,
        &mut ScriptedReality::new(script),
        rounds,
        1.0,
    )
    .unwrap();
    println!("both series finite:      final capital {:+9.3}", trace.final_capital());

    // Violating path: p ≡ 1/2 diverges while the tosses never land heads.
    let mut skeptic = coin_bc(20);
    let trace = run_game(
        &spec,
        &mut CoinForecaster::new(0.5),
        &mut skeptic,
        &mut ScriptedReality::new(vec![0.0; rounds]),
        rounds,
        1.0,
    )
    .unwrap();
    println!(
        "Σp = ∞ but Σx < ∞:       capital at n = 2500 / 5000 / 10000: {:.0} / {:.0} / {:.0}",
        trace.capital_at(2500),
        trace.capital_at(5000),
        trace.capital_at(10_000)
    );
    println!("(the betting account that sells at p earns p per round on a path with no heads)");
}
