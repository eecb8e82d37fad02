//! Skeptic strategies: compensator bets, truncation at a loss bound, account
//! mixtures, upcrossing bets, coin-game forcing, and the variance and
//! multiplicative strategies for general hedges.
//!
//! Strategies declaring a capital identity promise that their realized
//! cumulative gain equals a closed form of the path; the game loop's observer
//! hook lets tests hold them to it on every round.

use crate::game::{PathStep, SkepticStrategy};
use crate::growth::GrowthFunction;
use crate::hedge::{Hedge, Regularization};
use crate::protocol::{worst_case_payoff, ForecastMove, ProtocolSpec, SkepticMove};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StrategyError {
    #[error("mixture needs at least one component")]
    EmptyMixture,
    #[error("mixture weights must be positive and finite, got {0}")]
    BadWeight(f64),
    #[error("epsilon must lie in (0, 1/4), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("negated compensator needs a protocol that admits negative hedge stakes")]
    NegativeHedgeUnsupported,
    #[error("truncation needs a bounded protocol (finite worst-case gain)")]
    UnboundedTruncation,
    #[error("loss bound must be positive, got {0}")]
    BadLossBound(f64),
    #[error("upcrossing interval needs a < b, got [{a}, {b}]")]
    IntervalOrder { a: f64, b: f64 },
}

/// Bet direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sign::Plus => write!(out, "+"),
            Sign::Minus => write!(out, "-"),
        }
    }
}

// ---------------------------------------------------------------------------
// Constant bets
// ---------------------------------------------------------------------------

/// Bets the same `(stake, hedge_stake)` every round.
///
/// With a zero hedge stake the capital identity is `stake · S_n`.
pub struct ConstantBet {
    stake: f64,
    hedge_stake: f64,
    spread_sum: f64,
}

impl ConstantBet {
    pub fn new(stake: f64, hedge_stake: f64) -> Self {
        Self { stake, hedge_stake, spread_sum: 0.0 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0)
    }
}

/// The uniformly cautious strategy `M ≡ 1`: its capital is `S_n` itself.
pub fn unit_bet() -> ConstantBet {
    ConstantBet::new(1.0, 0.0)
}

impl SkepticStrategy for ConstantBet {
    fn announce(&mut self, _n: usize, _f: &ForecastMove) -> SkepticMove {
        SkepticMove::new(self.stake, self.hedge_stake)
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.spread_sum += step.spread();
    }

    fn capital_identity(&self) -> Option<f64> {
        (self.hedge_stake == 0.0).then_some(self.stake * self.spread_sum)
    }
}

// ---------------------------------------------------------------------------
// Compensator bets
// ---------------------------------------------------------------------------

/// `M_n = ±2 S_{n-1}`, `V_n = ±1`: capital `±(S_n² - A_n)` by telescoping.
///
/// The negated form only makes sense where the hedge stake may be negative
/// (BFQH and the trinomial game).
pub struct QuadraticCompensator {
    sign: f64,
    spread_sum: f64,
    hedge_price_sum: f64,
}

impl QuadraticCompensator {
    pub fn new(sign: Sign) -> Self {
        Self { sign: sign.value(), spread_sum: 0.0, hedge_price_sum: 0.0 }
    }

    /// Protocol-checked construction: the negated form is rejected where the
    /// hedge stake must be nonnegative.
    pub fn for_protocol(spec: &ProtocolSpec, sign: Sign) -> Result<Self, StrategyError> {
        if sign == Sign::Minus && !spec.allows_negative_hedge_stake() {
            return Err(StrategyError::NegativeHedgeUnsupported);
        }
        Ok(Self::new(sign))
    }
}

impl SkepticStrategy for QuadraticCompensator {
    fn announce(&mut self, _n: usize, _f: &ForecastMove) -> SkepticMove {
        SkepticMove::new(self.sign * 2.0 * self.spread_sum, self.sign)
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.spread_sum += step.spread();
        self.hedge_price_sum += step.forecast.hedge_price;
    }

    fn capital_identity(&self) -> Option<f64> {
        Some(self.sign * (self.spread_sum * self.spread_sum - self.hedge_price_sum))
    }
}

/// `M_n = 2 W_{n-1} / √g(A_n)`, `V_n = 1 / g(A_n)` with
/// `W_n = Σ (x_k - m_k)/√g(A_k)`: capital `W_n² - B_n`, where
/// `B_n = Σ v_k / g(A_k)` compensates `W²`.
pub struct WeightedCompensator {
    growth: GrowthFunction,
    scaled_spread_sum: f64,  // W_{n-1}
    compensator: f64,        // B_{n-1}
    hedge_price_sum: f64,    // A_n once announce has seen v_n
    current_scale: f64,      // g(A_n) for the round in flight
}

impl WeightedCompensator {
    pub fn new(growth: GrowthFunction) -> Self {
        Self {
            growth,
            scaled_spread_sum: 0.0,
            compensator: 0.0,
            hedge_price_sum: 0.0,
            current_scale: 1.0,
        }
    }
}

impl SkepticStrategy for WeightedCompensator {
    fn announce(&mut self, _n: usize, f: &ForecastMove) -> SkepticMove {
        self.hedge_price_sum += f.hedge_price;
        self.current_scale = self.growth.eval_shifted(self.hedge_price_sum);
        SkepticMove::new(
            2.0 * self.scaled_spread_sum / self.current_scale.sqrt(),
            1.0 / self.current_scale,
        )
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.scaled_spread_sum += step.spread() / self.current_scale.sqrt();
        self.compensator += step.forecast.hedge_price / self.current_scale;
    }

    fn capital_identity(&self) -> Option<f64> {
        Some(self.scaled_spread_sum * self.scaled_spread_sum - self.compensator)
    }
}

// ---------------------------------------------------------------------------
// Truncation at a loss bound
// ---------------------------------------------------------------------------

/// Plays the inner strategy until the first round its worst case could push
/// the inner strategy's running gain below `-D`; bets zero from then on.
///
/// Guarantees `D + gain ≥ 0` on every path, so a unit account of size `D`
/// funded at weight `1/D` observes the collateral duty.
pub struct Truncated {
    spec: ProtocolSpec,
    inner: Box<dyn SkepticStrategy>,
    loss_bound: f64,
    inner_gain: f64,
    pending: SkepticMove,
    stopped_at: Option<usize>,
}

impl Truncated {
    pub fn new(
        spec: &ProtocolSpec,
        inner: Box<dyn SkepticStrategy>,
        loss_bound: f64,
    ) -> Result<Self, StrategyError> {
        if !spec.is_bounded() {
            return Err(StrategyError::UnboundedTruncation);
        }
        if loss_bound <= 0.0 || !loss_bound.is_finite() {
            return Err(StrategyError::BadLossBound(loss_bound));
        }
        Ok(Self {
            spec: spec.clone(),
            inner,
            loss_bound,
            inner_gain: 0.0,
            pending: SkepticMove::ZERO,
            stopped_at: None,
        })
    }

    /// The round at which the truncation fired, if it has.
    pub fn stopping_round(&self) -> Option<usize> {
        self.stopped_at
    }

    /// The inner strategy's running gain (it keeps playing hypothetically).
    pub fn inner_gain(&self) -> f64 {
        self.inner_gain
    }
}

impl SkepticStrategy for Truncated {
    fn announce(&mut self, n: usize, f: &ForecastMove) -> SkepticMove {
        let mv = self.inner.announce(n, f);
        self.pending = mv;
        if self.stopped_at.is_some() {
            return SkepticMove::ZERO;
        }
        let worst = worst_case_payoff(&self.spec, f, &mv);
        if self.inner_gain + worst < -self.loss_bound {
            self.stopped_at = Some(n);
            return SkepticMove::ZERO;
        }
        mv
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.inner_gain += step.payoff_of(&self.pending);
        self.inner.finish_round(step);
    }

    fn prudence_floor(&self) -> Option<f64> {
        Some(self.loss_bound)
    }
}

// ---------------------------------------------------------------------------
// Mixtures
// ---------------------------------------------------------------------------

/// A weighted account mixture: the emitted move is the weighted sum of the
/// component moves, so the realized capital is the weighted sum of the
/// component capitals.
pub struct Mixture {
    parts: Vec<(f64, Box<dyn SkepticStrategy>)>,
}

impl Mixture {
    pub fn new(parts: Vec<(f64, Box<dyn SkepticStrategy>)>) -> Result<Self, StrategyError> {
        if parts.is_empty() {
            return Err(StrategyError::EmptyMixture);
        }
        for (w, _) in &parts {
            if *w <= 0.0 || !w.is_finite() {
                return Err(StrategyError::BadWeight(*w));
            }
        }
        Ok(Self { parts })
    }
}

impl SkepticStrategy for Mixture {
    fn announce(&mut self, n: usize, f: &ForecastMove) -> SkepticMove {
        let mut stake = 0.0;
        let mut hedge_stake = 0.0;
        for (w, part) in &mut self.parts {
            let mv = part.announce(n, f);
            stake += *w * mv.stake;
            hedge_stake += *w * mv.hedge_stake;
        }
        SkepticMove::new(stake, hedge_stake)
    }

    fn finish_round(&mut self, step: &PathStep) {
        for (_, part) in &mut self.parts {
            part.finish_round(step);
        }
    }

    fn capital_identity(&self) -> Option<f64> {
        let mut total = 0.0;
        for (w, part) in &self.parts {
            total += w * part.capital_identity()?;
        }
        Some(total)
    }

    fn prudence_floor(&self) -> Option<f64> {
        let mut total = 0.0;
        for (w, part) in &self.parts {
            total += w * part.prudence_floor()?;
        }
        Some(total)
    }
}

/// The prudent account mixture `Σ_{D=1}^{D_max} (1/(D·2^D)) · truncate(P, D)`.
///
/// Splitting an initial capital of `Σ 2^{-D}` across the accounts keeps every
/// account nonnegative; the `D_max` cutoff discards mixture weight below
/// `2^{-D_max}` of the capital split.
pub fn mixture_of_truncations(
    spec: &ProtocolSpec,
    mut make_inner: impl FnMut() -> Box<dyn SkepticStrategy>,
    d_max: u32,
) -> Result<Mixture, StrategyError> {
    let mut parts: Vec<(f64, Box<dyn SkepticStrategy>)> = Vec::with_capacity(d_max as usize);
    for d in 1..=d_max {
        let weight = 1.0 / (d as f64 * (2f64).powi(d as i32));
        let trunc = Truncated::new(spec, make_inner(), d as f64)?;
        parts.push((weight, Box::new(trunc)));
    }
    Mixture::new(parts)
}

// ---------------------------------------------------------------------------
// Upcrossing bets
// ---------------------------------------------------------------------------

/// Rides each upcrossing of `[lower, upper]` by the inner strategy's capital
/// process: enters when the monitored gain is at or below `lower`, replicates
/// the inner strategy's bets until the gain reaches `upper`, then exits.
///
/// Each completed upcrossing gains at least `upper - lower`; the only exposure
/// is the open position's distance below the entry level.
pub struct UpcrossingBet {
    inner: Box<dyn SkepticStrategy>,
    lower: f64,
    upper: f64,
    monitored_gain: f64,
    in_position: bool,
    pending: SkepticMove,
}

impl UpcrossingBet {
    pub fn new(
        inner: Box<dyn SkepticStrategy>,
        lower: f64,
        upper: f64,
    ) -> Result<Self, StrategyError> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(StrategyError::IntervalOrder { a: lower, b: upper });
        }
        Ok(Self { inner, lower, upper, monitored_gain: 0.0, in_position: false, pending: SkepticMove::ZERO })
    }

    pub fn monitored_gain(&self) -> f64 {
        self.monitored_gain
    }
}

impl SkepticStrategy for UpcrossingBet {
    fn announce(&mut self, n: usize, f: &ForecastMove) -> SkepticMove {
        // Position changes are decided on the previous round's level, so the
        // bet stays predictable.
        if self.in_position {
            if self.monitored_gain >= self.upper {
                self.in_position = false;
            }
        } else if self.monitored_gain <= self.lower {
            self.in_position = true;
        }
        let mv = self.inner.announce(n, f);
        self.pending = mv;
        if self.in_position {
            mv
        } else {
            SkepticMove::ZERO
        }
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.monitored_gain += step.payoff_of(&self.pending);
        self.inner.finish_round(step);
    }
}

// ---------------------------------------------------------------------------
// Coin-game forcing
// ---------------------------------------------------------------------------

/// A prudent coin-game mixture whose capital grows on paths where exactly one
/// of `Σ p_n`, `Σ x_n` is finite: truncation mixtures of the ±unit bets catch
/// the one-sided drifts, and a dyadic grid of truncated upcrossing accounts
/// covers bounded oscillation of `S_n`.
pub fn coin_bc(d_max: u32) -> Mixture {
    let spec = ProtocolSpec::coin_toss();
    let up = mixture_of_truncations(&spec, || Box::new(unit_bet()), d_max)
        .expect("coin game is bounded");
    let down = mixture_of_truncations(&spec, || Box::new(ConstantBet::new(-1.0, 0.0)), d_max)
        .expect("coin game is bounded");

    let intervals: [(f64, f64); 8] = [
        (-0.5, 0.0),
        (0.0, 0.5),
        (-1.0, -0.5),
        (0.5, 1.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (-2.0, -1.0),
        (1.0, 2.0),
    ];
    let norm: f64 = (1..=intervals.len()).map(|j| (2f64).powi(-(j as i32))).sum();

    // truncating the upcrossing accounts at loss 1 makes the whole mixture's
    // guaranteed floor exactly one unit of initial capital
    let mut parts: Vec<(f64, Box<dyn SkepticStrategy>)> =
        vec![(1.0 / 3.0, Box::new(up)), (1.0 / 3.0, Box::new(down))];
    for (j, &(a, b)) in intervals.iter().enumerate() {
        let cross = UpcrossingBet::new(Box::new(unit_bet()), a, b).expect("a < b");
        let trunc = Truncated::new(&spec, Box::new(cross), 1.0).expect("coin game is bounded");
        let weight = (2f64).powi(-(j as i32 + 1)) / norm / 3.0;
        parts.push((weight, Box::new(trunc)));
    }
    Mixture::new(parts).expect("nonempty")
}

// ---------------------------------------------------------------------------
// General-hedge strategies
// ---------------------------------------------------------------------------

/// The variance account: `M_n = 0`, `V_n = 1/g(A_n)` funded with stake `D`,
/// held at capital `D + Σ (h(x_k - m_k) - v_k)/g(A_k)` for as long as that
/// stays provably nonnegative; bets stop permanently once the next round's
/// worst case (`x = m`) could take it negative.
pub struct UfghVariance {
    hedge: Hedge,
    growth: GrowthFunction,
    stake: f64,
    capital: f64,
    hedge_price_sum: f64,
    halted: bool,
    pending: SkepticMove,
}

impl UfghVariance {
    pub fn new(spec: &ProtocolSpec, growth: GrowthFunction, stake: u32) -> Self {
        let stake = stake.max(1) as f64;
        Self {
            hedge: spec.hedge(),
            growth,
            stake,
            capital: stake,
            hedge_price_sum: 0.0,
            halted: false,
            pending: SkepticMove::ZERO,
        }
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }
}

impl SkepticStrategy for UfghVariance {
    fn announce(&mut self, _n: usize, f: &ForecastMove) -> SkepticMove {
        self.hedge_price_sum += f.hedge_price;
        if self.halted {
            self.pending = SkepticMove::ZERO;
            return self.pending;
        }
        let scale = self.growth.eval_shifted(self.hedge_price_sum);
        // Worst case for the pure hedge bet is x = m, losing v/g(A).
        if self.capital - f.hedge_price / scale < 0.0 {
            self.halted = true;
            self.pending = SkepticMove::ZERO;
            return self.pending;
        }
        self.pending = SkepticMove::new(0.0, 1.0 / scale);
        self.pending
    }

    fn finish_round(&mut self, step: &PathStep) {
        let d = step.spread();
        self.capital += self.pending.hedge_stake * (self.hedge.eval(d) - step.forecast.hedge_price);
    }

    fn capital_identity(&self) -> Option<f64> {
        Some(self.capital - self.stake)
    }

    fn prudence_floor(&self) -> Option<f64> {
        Some(self.stake)
    }
}

/// The multiplicative strategy: on rounds with `v_n / g(A_n) ≤ 1`,
///
/// ```text
/// M_n = ±ε K_{n-1} / h⁻¹(g(A_n)),   V_n = ε K_{n-1} / g(A_n),
/// ```
///
/// so the capital evolves by the factor
/// `1 ± ε x'/h⁻¹(g(A_n)) + ε (h(x') - v_n)/g(A_n)`, which stays at or above
/// `1/2` for `ε < 1/4`; other rounds bet nothing.
pub struct UfghMultiplicative {
    hedge: Hedge,
    growth: GrowthFunction,
    epsilon: f64,
    sign: f64,
    capital: f64,
    hedge_price_sum: f64,
    pending: SkepticMove,
    gated_on: bool,
    last_factor: f64,
}

impl UfghMultiplicative {
    /// Requires `ε ∈ (0, 1/4)`.  The hedge is H1-regularized so its inverse is
    /// available on all of `[0, ∞)`.
    pub fn new(
        spec: &ProtocolSpec,
        epsilon: f64,
        sign: Sign,
        growth: GrowthFunction,
    ) -> Result<Self, StrategyError> {
        if epsilon.is_nan() || epsilon <= 0.0 || epsilon >= 0.25 {
            return Err(StrategyError::EpsilonOutOfRange(epsilon));
        }
        Ok(Self {
            hedge: spec.hedge().regularized(Regularization::H1),
            growth,
            epsilon,
            sign: sign.value(),
            capital: 1.0,
            hedge_price_sum: 0.0,
            pending: SkepticMove::ZERO,
            gated_on: false,
            last_factor: 1.0,
        })
    }

    /// The growth factor realized on the last finished round (1 when gated off).
    pub fn last_factor(&self) -> f64 {
        self.last_factor
    }

    /// Whether the last announced round was gated on.
    pub fn gated_on(&self) -> bool {
        self.gated_on
    }

    pub fn capital(&self) -> f64 {
        self.capital
    }
}

impl SkepticStrategy for UfghMultiplicative {
    fn announce(&mut self, _n: usize, f: &ForecastMove) -> SkepticMove {
        self.hedge_price_sum += f.hedge_price;
        let scale = self.growth.eval_shifted(self.hedge_price_sum);
        self.gated_on = f.hedge_price / scale <= 1.0;
        if !self.gated_on {
            self.pending = SkepticMove::ZERO;
            return self.pending;
        }
        let inv = self.hedge.inverse(scale).expect("scale ≥ 0");
        self.pending = SkepticMove::new(
            self.sign * self.epsilon * self.capital / inv,
            self.epsilon * self.capital / scale,
        );
        self.pending
    }

    fn finish_round(&mut self, step: &PathStep) {
        if self.gated_on {
            let before = self.capital;
            self.capital += step.payoff_of(&self.pending);
            self.last_factor = self.capital / before;
        } else {
            self.last_factor = 1.0;
        }
    }

    fn capital_identity(&self) -> Option<f64> {
        Some(self.capital - 1.0)
    }

    fn prudence_floor(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// The combined rate-forcing strategy: variance accounts over `D = 1..D_max`
/// at weights `1/(2·D·2^D)` plus the ± multiplicative pair at weight `1/4`
/// each.  On paths where `Σ v_n/g(A_n)` stays small, any one-sided drift of
/// `Σ (x_k - m_k)/h⁻¹(g(A_k))` feeds one of the multiplicative accounts
/// geometrically.
pub fn force_general_rate(
    spec: &ProtocolSpec,
    growth: &GrowthFunction,
    epsilon: f64,
    d_max: u32,
) -> Result<Mixture, StrategyError> {
    let mut parts: Vec<(f64, Box<dyn SkepticStrategy>)> = Vec::new();
    for d in 1..=d_max {
        let weight = 0.5 / (d as f64 * (2f64).powi(d as i32));
        parts.push((weight, Box::new(UfghVariance::new(spec, growth.clone(), d))));
    }
    parts.push((0.25, Box::new(UfghMultiplicative::new(spec, epsilon, Sign::Plus, growth.clone())?)));
    parts.push((0.25, Box::new(UfghMultiplicative::new(spec, epsilon, Sign::Minus, growth.clone())?)));
    Mixture::new(parts)
}

// ---------------------------------------------------------------------------
// Coin-game reduction
// ---------------------------------------------------------------------------

/// Plays a quadratic-hedge strategy inside the coin game by collapsing its
/// `(M, V)` move to the equivalent scalar stake `M + V(1 - 2p)`.
///
/// For outcomes in `{0, 1}` the scalar payoff equals the quadratic-hedge
/// payoff exactly, so the inner strategy's capital identity carries over.
pub struct CoinReduced {
    inner: Box<dyn SkepticStrategy>,
}

impl CoinReduced {
    pub fn new(inner: Box<dyn SkepticStrategy>) -> Self {
        Self { inner }
    }
}

impl SkepticStrategy for CoinReduced {
    fn announce(&mut self, n: usize, f: &ForecastMove) -> SkepticMove {
        let mv = self.inner.announce(n, f);
        SkepticMove::new(crate::protocol::coin_reduce(mv.stake, mv.hedge_stake, f.price), 0.0)
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.inner.finish_round(step);
    }

    fn capital_identity(&self) -> Option<f64> {
        self.inner.capital_identity()
    }

    fn prudence_floor(&self) -> Option<f64> {
        self.inner.prudence_floor()
    }
}

// ---------------------------------------------------------------------------
// Adversarial script (for compliance demos and tests)
// ---------------------------------------------------------------------------

/// A seeded random Skeptic that observes the collateral duty: every bet's
/// worst case keeps its capital nonnegative.  Used to stress the compliance
/// strategies.
pub struct RandomDutySkeptic {
    rng: rand_chacha::ChaCha8Rng,
    capital: f64,
    pending: SkepticMove,
    idle_prob: f64,
}

impl RandomDutySkeptic {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        Self {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
            capital: 1.0,
            pending: SkepticMove::ZERO,
            idle_prob: 0.2,
        }
    }

    pub fn capital(&self) -> f64 {
        self.capital
    }
}

impl SkepticStrategy for RandomDutySkeptic {
    fn announce(&mut self, _n: usize, f: &ForecastMove) -> SkepticMove {
        use rand::Rng;
        if self.capital <= 0.0 || self.rng.gen::<f64>() < self.idle_prob {
            self.pending = SkepticMove::ZERO;
            return self.pending;
        }
        let v = f.hedge_price;
        // Hedge stake spends at most half the remaining capital at x = m; the
        // directional stake stays inside the parabola's worst case.
        let hedge_stake = self.rng.gen::<f64>() * 0.5 * self.capital / v.max(1e-12);
        let slack = (self.capital - hedge_stake * v).max(0.0);
        let stake_cap = 2.0 * (hedge_stake * slack).sqrt();
        let stake = if hedge_stake > 0.0 {
            (2.0 * self.rng.gen::<f64>() - 1.0) * stake_cap
        } else {
            0.0
        };
        self.pending = SkepticMove::new(stake, hedge_stake);
        self.pending
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.capital += step.payoff_of(&self.pending);
    }
}
