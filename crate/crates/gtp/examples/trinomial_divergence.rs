//! Divergence compliance: Reality keeps the rate statistic from settling.
//!
//! When Σ v_n/g(A_n) diverges, Reality restricts herself to three outcomes
//! per round — the price, or the price displaced by ±√g(A_n)/ε_n with the
//! online ε-sequence calibrating the displacement — and lets a surrogate
//! trinomial forcing Skeptic decide when volatility is overdue.  The actual
//! Skeptic's capital never exceeds 1, whatever he bets, yet the normalized
//! increments z_n = (x_n - m_n)/√g(A_n) keep jolting by more than 1, so
//! their partial sums never become Cauchy.
//!
//! ```bash
//! cargo run -p gtp --example trinomial_divergence
//! ```

use gtp::diagnostics::cauchy_failure;
use gtp::forecaster::ConstForecaster;
use gtp::game::{run_game, PathStep, SkepticStrategy};
use gtp::protocol::{ForecastMove, SkepticMove};
use gtp::reality::{trinomial_comply, EpsilonSequence};
use gtp::GrowthFunction;
use rand::{Rng, SeedableRng};

/// An aggressive bettor: directional stakes at a fixed scale, hedged just
/// under the knife edge.  These are exactly the bets that make Reality answer
/// with the displaced outcome.
struct Provoker {
    eps: EpsilonSequence,
    hedge_price_sum: f64,
    rng: rand_chacha::ChaCha8Rng,
    pending: SkepticMove,
    capital: f64,
}

impl SkepticStrategy for Provoker {
    fn announce(&mut self, _n: usize, f: &ForecastMove) -> SkepticMove {
        self.hedge_price_sum += f.hedge_price;
        let g = self.hedge_price_sum;
        let value = self.eps.next_epsilon(f.hedge_price / g).unwrap();
        let scale = g.sqrt() / value.sqrt();
        self.pending = if self.rng.gen::<f64>() < 0.3 {
            SkepticMove::ZERO
        } else {
            let sign: f64 = if self.rng.gen::<bool>() { 1.0 } else { -1.0 };
            let stake = 0.05 * sign;
            SkepticMove::new(stake / scale, stake.abs() * (1.0 - 0.5 * self.rng.gen::<f64>()) * value / g)
        };
        self.pending
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.capital += step.payoff_of(&self.pending);
    }
}

fn main() {
    let rounds = 50_000;
    let mut reality = trinomial_comply(GrowthFunction::identity());
    let spec = reality.protocol().clone();
    // v ≡ 1 with g the identity makes a_n = 1/n: a divergent series
    let mut forecaster = ConstForecaster::new(0.0, 1.0);
    let mut skeptic = Provoker {
        eps: EpsilonSequence::new(),
        hedge_price_sum: 0.0,
        rng: rand_chacha::ChaCha8Rng::seed_from_u64(99),
        pending: SkepticMove::ZERO,
        capital: 1.0,
    };
    let trace = run_game(&spec, &mut forecaster, &mut skeptic, &mut reality, rounds, 1.0).unwrap();

    let max_capital = trace.rounds.iter().map(|r| r.capital_after).fold(f64::MIN, f64::max);
    println!("unbounded forecasting, v = 1, g(A) = A, {rounds} rounds");
    println!("max Skeptic capital:  {max_capital:.12}  (bound 1)");
    println!("final Skeptic capital {:.3}  (his own losses are his problem)", trace.final_capital());

    let fires = reality.fire_rounds();
    println!("displaced outcomes:   {} rounds, first at {:?}, last at {:?}", fires.len(), fires.first(), fires.last());

    let sums = trace.hedge_price_sums();
    let z: Vec<f64> = trace
        .rounds
        .iter()
        .enumerate()
        .map(|(i, r)| (r.reality.outcome - r.forecast.price) / sums[i + 1].sqrt())
        .collect();
    match cauchy_failure(&z, 1.0) {
        Some(w) => println!("Cauchy failure of Σ z_k: |sum over ({}, {}]| = {:.3} ≥ 1", w.from, w.to, w.gap),
        None => println!("no Cauchy failure found at unit scale (unexpected on a divergent run)"),
    }
}
