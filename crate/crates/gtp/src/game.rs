//! The round loop: one Forecaster, one Skeptic, one Reality, one capital.
//!
//! Strategies are stateful, single-owner move generators.  Skeptic strategies
//! are functions of the path only — they observe `(forecast, outcome)` pairs,
//! never the moves another Skeptic actually played — which is what lets a
//! compliance strategy run a private surrogate Skeptic on the same path.

use crate::protocol::{payoff, ForecastMove, MoveViolation, ProtocolSpec, RealityMove, SkepticMove};
use serde::{Deserialize, Serialize};

/// One completed round of play.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    /// 1-based round index.
    pub index: usize,
    pub forecast: ForecastMove,
    pub skeptic: SkepticMove,
    pub reality: RealityMove,
    pub payoff: f64,
    /// Capital after settling this round (includes the initial capital).
    pub capital_after: f64,
}

/// What a strategy sees when a round closes: the path step, not the other
/// players' bets.
#[derive(Clone, Copy)]
pub struct PathStep<'a> {
    pub spec: &'a ProtocolSpec,
    pub index: usize,
    pub forecast: ForecastMove,
    pub outcome: RealityMove,
}

impl PathStep<'_> {
    /// Payoff this step would have settled for the given bet.
    pub fn payoff_of(&self, bet: &SkepticMove) -> f64 {
        payoff(self.spec, &self.forecast, bet, &self.outcome)
    }

    pub fn spread(&self) -> f64 {
        self.outcome.outcome - self.forecast.price
    }
}

pub trait Forecaster {
    fn announce(&mut self, n: usize) -> ForecastMove;
    fn finish_round(&mut self, _step: &PathStep) {}
}

pub trait SkepticStrategy {
    fn announce(&mut self, n: usize, forecast: &ForecastMove) -> SkepticMove;
    fn finish_round(&mut self, step: &PathStep);

    /// Closed-form capital the strategy claims to have realized after the last
    /// finished round (initial stake excluded), when it declares one.
    fn capital_identity(&self) -> Option<f64> {
        None
    }

    /// The stake `F` such that the strategy guarantees cumulative gain ≥ -F on
    /// every path, when it makes that guarantee.
    fn prudence_floor(&self) -> Option<f64> {
        None
    }
}

pub trait RealityStrategy {
    fn announce(&mut self, n: usize, forecast: &ForecastMove, skeptic: &SkepticMove) -> RealityMove;
    fn finish_round(&mut self, _step: &PathStep) {}
}

/// The record of one played game.
#[derive(Debug, Clone)]
pub struct GameTrace {
    pub protocol: ProtocolSpec,
    pub initial_capital: f64,
    pub rounds: Vec<Round>,
    /// First round at which a prudence-declaring Skeptic's capital fell below
    /// zero.  Monitored, not enforced: the game continues.
    pub prudence_violation: Option<usize>,
}

impl GameTrace {
    /// Capital after round `n` (1-based); `capital_at(0)` is the initial capital.
    pub fn capital_at(&self, n: usize) -> f64 {
        if n == 0 {
            self.initial_capital
        } else {
            self.rounds[n - 1].capital_after
        }
    }

    pub fn final_capital(&self) -> f64 {
        self.rounds.last().map_or(self.initial_capital, |r| r.capital_after)
    }

    /// Running sums `S_n = Σ_{k≤n} (x_k - m_k)`, with `S_0 = 0` at index 0.
    pub fn spread_sums(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rounds.len() + 1);
        let mut s = 0.0;
        out.push(s);
        for r in &self.rounds {
            s += r.reality.outcome - r.forecast.price;
            out.push(s);
        }
        out
    }

    /// Running sums `A_n = Σ_{k≤n} v_k`, with `A_0 = 0` at index 0.
    pub fn hedge_price_sums(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rounds.len() + 1);
        let mut a = 0.0;
        out.push(a);
        for r in &self.rounds {
            a += r.forecast.hedge_price;
            out.push(a);
        }
        out
    }

    /// Running sums of the outcome prices `Σ_{k≤n} m_k` (the coin game's `Ā_n`).
    pub fn price_sums(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rounds.len() + 1);
        let mut a = 0.0;
        out.push(a);
        for r in &self.rounds {
            a += r.forecast.price;
            out.push(a);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    Forecaster,
    Skeptic,
    Reality,
}

impl std::fmt::Display for Player {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Player::Forecaster => write!(out, "Forecaster"),
            Player::Skeptic => write!(out, "Skeptic"),
            Player::Reality => write!(out, "Reality"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GameError {
    #[error("round {round}: {player} move rejected: {violation}")]
    InvalidMove { round: usize, player: Player, violation: MoveViolation },
    #[error("initial capital must be positive, got {0}")]
    BadInitialCapital(f64),
}

/// Runs `rounds` rounds of the protocol, validating every move.
///
/// Deterministic given the strategies (and any seeds they carry).  A strategy
/// emitting an invalid move halts the game with the round index and the
/// violated invariant; a prudence violation is only flagged in the trace.
pub fn run_game(
    spec: &ProtocolSpec,
    forecaster: &mut dyn Forecaster,
    skeptic: &mut dyn SkepticStrategy,
    reality: &mut dyn RealityStrategy,
    rounds: usize,
    initial_capital: f64,
) -> Result<GameTrace, GameError> {
    run_game_observed(spec, forecaster, skeptic, reality, rounds, initial_capital, |_, _| {})
}

/// [`run_game`] with a per-round observer, called after each round settles and
/// all strategies have been notified — the hook the capital-identity oracles
/// use.
pub fn run_game_observed(
    spec: &ProtocolSpec,
    forecaster: &mut dyn Forecaster,
    skeptic: &mut dyn SkepticStrategy,
    reality: &mut dyn RealityStrategy,
    rounds: usize,
    initial_capital: f64,
    mut on_round: impl FnMut(&Round, &dyn SkepticStrategy),
) -> Result<GameTrace, GameError> {
    if initial_capital <= 0.0 || !initial_capital.is_finite() {
        return Err(GameError::BadInitialCapital(initial_capital));
    }
    let mut trace = GameTrace {
        protocol: spec.clone(),
        initial_capital,
        rounds: Vec::with_capacity(rounds),
        prudence_violation: None,
    };
    let mut capital = initial_capital;
    let prudence_floor = skeptic.prudence_floor();

    for n in 1..=rounds {
        // Each move is validated before any later player sees it, so
        // strategies only ever observe admissible moves.
        let forecast = forecaster.announce(n);
        crate::protocol::validate_forecast(spec, &forecast)
            .map_err(|violation| GameError::InvalidMove { round: n, player: Player::Forecaster, violation })?;
        let bet = skeptic.announce(n, &forecast);
        crate::protocol::validate_skeptic(spec, &bet)
            .map_err(|violation| GameError::InvalidMove { round: n, player: Player::Skeptic, violation })?;
        let outcome = reality.announce(n, &forecast, &bet);
        crate::protocol::validate_reality(spec, &forecast, &outcome)
            .map_err(|violation| GameError::InvalidMove { round: n, player: Player::Reality, violation })?;

        let gain = payoff(spec, &forecast, &bet, &outcome);

        capital += gain;
        let round = Round {
            index: n,
            forecast,
            skeptic: bet,
            reality: outcome,
            payoff: gain,
            capital_after: capital,
        };

        if prudence_floor.is_some() && capital < 0.0 && trace.prudence_violation.is_none() {
            trace.prudence_violation = Some(n);
        }

        let step = PathStep { spec, index: n, forecast, outcome };
        forecaster.finish_round(&step);
        skeptic.finish_round(&step);
        reality.finish_round(&step);

        on_round(&round, skeptic);
        trace.rounds.push(round);
    }
    Ok(trace)
}
