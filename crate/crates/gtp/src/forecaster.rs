//! Ready-made Forecaster strategies.

use crate::game::Forecaster;
use crate::protocol::{ForecastMove, ProtocolKind, ProtocolSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The same forecast every round.
pub struct ConstForecaster {
    mv: ForecastMove,
}

impl ConstForecaster {
    pub fn new(price: f64, hedge_price: f64) -> Self {
        Self { mv: ForecastMove::new(price, hedge_price) }
    }
}

impl Forecaster for ConstForecaster {
    fn announce(&mut self, _n: usize) -> ForecastMove {
        self.mv
    }
}

/// A constant coin forecast `p` (hedge priced at `p(1-p)`).
pub struct CoinForecaster {
    p: f64,
}

impl CoinForecaster {
    pub fn new(p: f64) -> Self {
        Self { p }
    }
}

impl Forecaster for CoinForecaster {
    fn announce(&mut self, _n: usize) -> ForecastMove {
        ForecastMove::coin(self.p)
    }
}

/// Replays a fixed schedule, repeating the final forecast once exhausted.
pub struct SeqForecaster {
    moves: Vec<ForecastMove>,
}

impl SeqForecaster {
    pub fn new(moves: Vec<ForecastMove>) -> Self {
        Self { moves }
    }
}

impl Forecaster for SeqForecaster {
    fn announce(&mut self, n: usize) -> ForecastMove {
        self.moves
            .get(n - 1)
            .or_else(|| self.moves.last())
            .copied()
            .unwrap_or(ForecastMove::new(0.0, 0.0))
    }
}

/// Seeded random admissible forecasts for the given protocol.
pub struct RandomForecaster {
    spec: ProtocolSpec,
    rng: ChaCha8Rng,
    /// Price magnitude cap for the unbounded protocols.
    pub price_range: f64,
    /// Hedge price cap for the unbounded protocols.
    pub hedge_price_range: f64,
}

impl RandomForecaster {
    pub fn new(spec: &ProtocolSpec, seed: u64) -> Self {
        Self {
            spec: spec.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
            price_range: 2.0,
            hedge_price_range: 2.0,
        }
    }
}

impl Forecaster for RandomForecaster {
    fn announce(&mut self, _n: usize) -> ForecastMove {
        match &self.spec.kind {
            ProtocolKind::BoundedForecasting { bound } => {
                ForecastMove::new(bound * (2.0 * self.rng.gen::<f64>() - 1.0), 0.0)
            }
            ProtocolKind::CoinToss => ForecastMove::coin(self.rng.gen::<f64>()),
            ProtocolKind::Bfqh { bound } => {
                let m = bound * (2.0 * self.rng.gen::<f64>() - 1.0);
                let v = self.rng.gen::<f64>() * (bound * bound - m * m);
                ForecastMove::new(m, v)
            }
            ProtocolKind::Trinomial => ForecastMove::new(0.0, self.rng.gen::<f64>()),
            ProtocolKind::UnboundedForecasting | ProtocolKind::Ufgh { .. } => {
                let m = self.price_range * (2.0 * self.rng.gen::<f64>() - 1.0);
                let v = self.hedge_price_range * self.rng.gen::<f64>().max(1e-9);
                ForecastMove::new(m, v)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::validate_forecast;

    #[test]
    fn random_forecasts_are_admissible() {
        for spec in [
            ProtocolSpec::bounded(2.0).unwrap(),
            ProtocolSpec::bfqh(1.0).unwrap(),
            ProtocolSpec::coin_toss(),
            ProtocolSpec::trinomial(),
            ProtocolSpec::unbounded(),
        ] {
            let mut fc = RandomForecaster::new(&spec, 42);
            for n in 1..=2000 {
                let f = fc.announce(n);
                assert!(validate_forecast(&spec, &f).is_ok(), "{spec}: {f:?}");
            }
        }
    }
}
