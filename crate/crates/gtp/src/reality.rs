//! Reality's deterministic strategies: coherent responses, surrogate
//! compliance, the online ε-sequence, and divergence compliance through the
//! trinomial reduction.
//!
//! Compliance turns a Skeptic strategy `P` into a strategy for Reality: she
//! blends `P`'s move with the actual Skeptic's move and answers with an
//! outcome making the blended payoff nonpositive.  Both accounts then stay
//! bounded — `P`'s boundedness pins the path inside the event `P` forces,
//! while the actual Skeptic's capital stays below `1 + ε` (or below the
//! initial capital itself in the strong variant).

use crate::game::{PathStep, RealityStrategy, SkepticStrategy};
use crate::growth::GrowthFunction;
use crate::hedge::{Hedge, Regularization};
use crate::protocol::{payoff, ForecastMove, ProtocolKind, ProtocolSpec, RealityMove, SkepticMove};
use crate::skeptic::{mixture_of_truncations, Mixture, QuadraticCompensator, Sign, StrategyError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Elementary Reality strategies
// ---------------------------------------------------------------------------

/// Always plays the same outcome.
pub struct ConstReality {
    outcome: f64,
}

impl ConstReality {
    pub fn new(outcome: f64) -> Self {
        Self { outcome }
    }
}

impl RealityStrategy for ConstReality {
    fn announce(&mut self, _n: usize, _f: &ForecastMove, _s: &SkepticMove) -> RealityMove {
        RealityMove::new(self.outcome)
    }
}

/// Plays the forecast price: the move that freezes every capital.
pub struct PriceReality;

impl RealityStrategy for PriceReality {
    fn announce(&mut self, _n: usize, f: &ForecastMove, _s: &SkepticMove) -> RealityMove {
        RealityMove::new(f.price)
    }
}

/// Replays a fixed script, repeating the last element once exhausted.
pub struct ScriptedReality {
    script: Vec<f64>,
}

impl ScriptedReality {
    pub fn new(script: Vec<f64>) -> Self {
        Self { script }
    }
}

impl RealityStrategy for ScriptedReality {
    fn announce(&mut self, n: usize, _f: &ForecastMove, _s: &SkepticMove) -> RealityMove {
        let x = self
            .script
            .get(n - 1)
            .or_else(|| self.script.last())
            .copied()
            .unwrap_or(0.0);
        RealityMove::new(x)
    }
}

/// Seeded random `±c` outcomes.
pub struct RandomSignReality {
    magnitude: f64,
    rng: ChaCha8Rng,
}

impl RandomSignReality {
    pub fn new(magnitude: f64, seed: u64) -> Self {
        Self { magnitude, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl RealityStrategy for RandomSignReality {
    fn announce(&mut self, _n: usize, _f: &ForecastMove, _s: &SkepticMove) -> RealityMove {
        let sign = if self.rng.gen::<bool>() { 1.0 } else { -1.0 };
        RealityMove::new(sign * self.magnitude)
    }
}

/// Seeded uniform outcomes on `[-c, c]`.
pub struct RandomIntervalReality {
    bound: f64,
    rng: ChaCha8Rng,
}

impl RandomIntervalReality {
    pub fn new(bound: f64, seed: u64) -> Self {
        Self { bound, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl RealityStrategy for RandomIntervalReality {
    fn announce(&mut self, _n: usize, _f: &ForecastMove, _s: &SkepticMove) -> RealityMove {
        RealityMove::new(self.bound * (2.0 * self.rng.gen::<f64>() - 1.0))
    }
}

/// Seeded fair coin: outcomes in `{0, 1}` with probability one half each.
pub struct FairCoinReality {
    rng: ChaCha8Rng,
}

impl FairCoinReality {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl RealityStrategy for FairCoinReality {
    fn announce(&mut self, _n: usize, _f: &ForecastMove, _s: &SkepticMove) -> RealityMove {
        RealityMove::new(if self.rng.gen::<bool>() { 1.0 } else { 0.0 })
    }
}

// ---------------------------------------------------------------------------
// Coherent responses
// ---------------------------------------------------------------------------

/// Reality's coherent response in a quadratic-hedge game with bound `c`:
/// the returned `x ∈ {m, -c, +c}` makes the payoff nonpositive.
///
/// `V ≥ 0` is answered by the price itself; `V < 0` by the extreme on the side
/// where `(2Vm - M)(c + m) ≤ 0` closes the inequality.
pub fn coherent_response_quadratic(
    bound: f64,
    m: f64,
    v: f64,
    stake: f64,
    hedge_stake: f64,
) -> (f64, f64) {
    let po = |x: f64| {
        let d = x - m;
        stake * d + hedge_stake * (d * d - v)
    };
    let x = if hedge_stake >= 0.0 {
        m
    } else if m >= stake / (2.0 * hedge_stake) {
        -bound
    } else {
        bound
    };
    (x, po(x))
}

/// Reality's coherent response in the unbounded protocols, with a strictness
/// flag: any nonzero bet can be answered with a strictly negative payoff.
pub fn coherent_response_unbounded(
    spec: &ProtocolSpec,
    f: &ForecastMove,
    s: &SkepticMove,
) -> (RealityMove, f64, bool) {
    let x = if s.hedge_stake > 0.0 || s.stake == 0.0 {
        RealityMove::new(f.price)
    } else {
        RealityMove::new(f.price - s.stake.signum())
    };
    let po = payoff(spec, f, s, &x);
    (x, po, po < 0.0)
}

/// The finite outcome set compliance strategies search for a response.
pub fn response_candidates(spec: &ProtocolSpec, f: &ForecastMove) -> Vec<f64> {
    if let Some(r) = &spec.reality_restriction {
        return r.allowed(f.price, spec.bound().unwrap_or(f64::INFINITY));
    }
    match &spec.kind {
        ProtocolKind::BoundedForecasting { bound } | ProtocolKind::Bfqh { bound } => {
            vec![f.price, -bound, *bound]
        }
        ProtocolKind::CoinToss => vec![0.0, 1.0],
        ProtocolKind::Trinomial => vec![0.0, 1.0, -1.0],
        ProtocolKind::UnboundedForecasting | ProtocolKind::Ufgh { .. } => {
            vec![f.price, f.price - 1.0, f.price + 1.0]
        }
    }
}

/// Most negative payoff wins; exact ties prefer the price, then the largest
/// outcome.
fn pick_response(candidates: &[f64], price: f64, mut payoff_at: impl FnMut(f64) -> f64) -> (f64, f64) {
    let rank = |x: f64| (if x == price { 0u8 } else { 1u8 }, -x);
    let mut best = candidates[0];
    let mut best_po = payoff_at(best);
    for &x in &candidates[1..] {
        let po = payoff_at(x);
        if po < best_po || (po == best_po && rank(x) < rank(best)) {
            best = x;
            best_po = po;
        }
    }
    (best, best_po)
}

// ---------------------------------------------------------------------------
// Surrogate compliance (positive ε)
// ---------------------------------------------------------------------------

/// Blends a surrogate Skeptic `P` (weight `1 - α`) with the actual Skeptic
/// (weight `α = 1/(1+ε)`) and plays a coherent response to the blend.
///
/// With a prudent surrogate and a duty-observing Skeptic this keeps the actual
/// capital at or below `1 + ε` and the surrogate's capital at or below
/// `(1 + ε)/ε`, whatever Forecaster and Skeptic do.
pub struct SurrogateComply {
    spec: ProtocolSpec,
    surrogate: Box<dyn SkepticStrategy>,
    actual_weight: f64,
    surrogate_gain: f64,
    actual_capital: f64,
    pending_surrogate: SkepticMove,
    pending_actual: SkepticMove,
    max_actual_capital: f64,
    max_surrogate_capital: f64,
    uncovered_rounds: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ComplianceError {
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("power-hedge compliance needs an exponent in [1, 2], got {0}")]
    BadExponent(f64),
}

impl SurrogateComply {
    pub fn new(
        spec: &ProtocolSpec,
        surrogate: Box<dyn SkepticStrategy>,
        epsilon: f64,
    ) -> Result<Self, ComplianceError> {
        if epsilon <= 0.0 || !epsilon.is_finite() {
            return Err(ComplianceError::BadEpsilon(epsilon));
        }
        Ok(Self {
            spec: spec.clone(),
            surrogate,
            actual_weight: 1.0 / (1.0 + epsilon),
            surrogate_gain: 0.0,
            actual_capital: 1.0,
            pending_surrogate: SkepticMove::ZERO,
            pending_actual: SkepticMove::ZERO,
            max_actual_capital: 1.0,
            max_surrogate_capital: 1.0,
            uncovered_rounds: 0,
        })
    }

    /// Actual Skeptic's capital (initial capital 1).
    pub fn actual_capital(&self) -> f64 {
        self.actual_capital
    }

    /// Surrogate's capital (initial capital 1).
    pub fn surrogate_capital(&self) -> f64 {
        1.0 + self.surrogate_gain
    }

    pub fn max_actual_capital(&self) -> f64 {
        self.max_actual_capital
    }

    pub fn max_surrogate_capital(&self) -> f64 {
        self.max_surrogate_capital
    }

    /// Rounds where no candidate response had nonpositive blended payoff.
    /// Cannot occur in the protocols this library ships candidates for.
    pub fn uncovered_rounds(&self) -> usize {
        self.uncovered_rounds
    }
}

impl RealityStrategy for SurrogateComply {
    fn announce(&mut self, n: usize, f: &ForecastMove, s: &SkepticMove) -> RealityMove {
        let pm = self.surrogate.announce(n, f);
        self.pending_surrogate = pm;
        self.pending_actual = *s;
        let w = self.actual_weight;
        let blend = SkepticMove::new(
            (1.0 - w) * pm.stake + w * s.stake,
            (1.0 - w) * pm.hedge_stake + w * s.hedge_stake,
        );
        let candidates = response_candidates(&self.spec, f);
        let (x, po) = pick_response(&candidates, f.price, |x| {
            payoff(&self.spec, f, &blend, &RealityMove::new(x))
        });
        if po > 0.0 {
            self.uncovered_rounds += 1;
        }
        RealityMove::new(x)
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.surrogate_gain += step.payoff_of(&self.pending_surrogate);
        self.actual_capital += step.payoff_of(&self.pending_actual);
        self.max_actual_capital = self.max_actual_capital.max(self.actual_capital);
        self.max_surrogate_capital = self.max_surrogate_capital.max(1.0 + self.surrogate_gain);
        self.surrogate.finish_round(step);
    }
}

// ---------------------------------------------------------------------------
// Strong surrogate compliance (ε = 0)
// ---------------------------------------------------------------------------

/// Keeps the actual Skeptic's capital at or below its initial value 1.
///
/// Until the Skeptic's first nonzero bet, Reality answers the surrogate alone
/// (price moves keep the surrogate's gain at or below 0 and the actual capital
/// exactly 1).  The first nonzero bet is answered strictly, the resulting
/// capital `K < 1` becomes the blending weight, and from then on Reality plays
/// coherent responses to `(1-α)·P-move + actual-move` — the actual account
/// being tracked at its reduced capital.  With a prudent surrogate (gain
/// floor at most 1) the telescoped blend keeps the capital at or below 1
/// forever.
pub struct SurrogateComplyStrong {
    spec: ProtocolSpec,
    surrogate: Box<dyn SkepticStrategy>,
    surrogate_floor: f64,
    surrogate_gain: f64,
    actual_capital: f64,
    /// `1 - α` once activated.
    surrogate_blend_weight: Option<f64>,
    activation_round: Option<usize>,
    pending_surrogate: SkepticMove,
    pending_actual: SkepticMove,
    max_actual_capital: f64,
    max_surrogate_capital: f64,
    uncovered_rounds: usize,
}

impl SurrogateComplyStrong {
    pub fn new(spec: &ProtocolSpec, surrogate: Box<dyn SkepticStrategy>) -> Self {
        let floor = surrogate.prudence_floor().unwrap_or(1.0).min(1.0);
        Self {
            spec: spec.clone(),
            surrogate,
            surrogate_floor: floor,
            surrogate_gain: 0.0,
            actual_capital: 1.0,
            surrogate_blend_weight: None,
            activation_round: None,
            pending_surrogate: SkepticMove::ZERO,
            pending_actual: SkepticMove::ZERO,
            max_actual_capital: 1.0,
            max_surrogate_capital: 1.0,
            uncovered_rounds: 0,
        }
    }

    /// Rounds where no candidate response had nonpositive blended payoff
    /// (possible only with a surrogate whose moves are invalid for the
    /// protocol).
    pub fn uncovered_rounds(&self) -> usize {
        self.uncovered_rounds
    }

    pub fn actual_capital(&self) -> f64 {
        self.actual_capital
    }

    pub fn surrogate_capital(&self) -> f64 {
        1.0 + self.surrogate_gain
    }

    pub fn max_actual_capital(&self) -> f64 {
        self.max_actual_capital
    }

    pub fn max_surrogate_capital(&self) -> f64 {
        self.max_surrogate_capital
    }

    pub fn activation_round(&self) -> Option<usize> {
        self.activation_round
    }

    /// Weight `1 - α` on the surrogate after activation, sized so the actual
    /// capital's headroom `1 - K_{n₀}` covers the surrogate's worst future
    /// rise `G_{n₀} + floor`.  In the regular case (`G_{n₀} ≤ 0`, floor ≤ 1)
    /// this is exactly `1 - K_{n₀}`.
    fn activation_weight(&self, capital_after: f64, gain_after: f64) -> f64 {
        let budget = 1.0 - capital_after;
        let exposure = gain_after + self.surrogate_floor;
        let cap = 1.0 - capital_after.max(0.0);
        if exposure <= 0.0 {
            cap
        } else {
            cap.min(budget / exposure)
        }
    }
}

impl RealityStrategy for SurrogateComplyStrong {
    fn announce(&mut self, n: usize, f: &ForecastMove, s: &SkepticMove) -> RealityMove {
        let pm = self.surrogate.announce(n, f);
        self.pending_surrogate = pm;
        self.pending_actual = *s;
        let candidates = response_candidates(&self.spec, f);
        let po_p = |x: f64| payoff(&self.spec, f, &pm, &RealityMove::new(x));
        let po_s = |x: f64| payoff(&self.spec, f, s, &RealityMove::new(x));

        if let Some(weight) = self.surrogate_blend_weight {
            let blend = SkepticMove::new(
                weight * pm.stake + s.stake,
                weight * pm.hedge_stake + s.hedge_stake,
            );
            let (x, po) = pick_response(&candidates, f.price, |x| {
                payoff(&self.spec, f, &blend, &RealityMove::new(x))
            });
            if po > 0.0 {
                self.uncovered_rounds += 1;
            }
            return RealityMove::new(x);
        }

        if s.is_zero() {
            // Respond to the surrogate alone, keeping its gain at or below 0;
            // the price move qualifies whenever the surrogate's payoff there
            // is nonpositive, and is preferred.
            let qualifying: Vec<f64> = candidates
                .iter()
                .copied()
                .filter(|&x| self.surrogate_gain + po_p(x) <= 0.0)
                .collect();
            let x = if qualifying.contains(&f.price) {
                f.price
            } else if qualifying.is_empty() {
                pick_response(&candidates, f.price, po_p).0
            } else {
                pick_response(&qualifying, f.price, po_p).0
            };
            return RealityMove::new(x);
        }

        // First nonzero bet: answer it strictly and switch to blending.
        let strict: Vec<f64> = candidates.iter().copied().filter(|&x| po_s(x) < 0.0).collect();
        if strict.is_empty() {
            // No strictly negative answer (a zero-risk bet); defer with a
            // coherent response to the actual move alone.
            let (x, _) = pick_response(&candidates, f.price, po_s);
            return RealityMove::new(x);
        }
        let (x, po) = pick_response(&strict, f.price, po_s);
        let capital_after = self.actual_capital + po;
        let gain_after = self.surrogate_gain + po_p(x);
        self.surrogate_blend_weight = Some(self.activation_weight(capital_after, gain_after));
        self.activation_round = Some(n);
        RealityMove::new(x)
    }

    fn finish_round(&mut self, step: &PathStep) {
        self.surrogate_gain += step.payoff_of(&self.pending_surrogate);
        self.actual_capital += step.payoff_of(&self.pending_actual);
        self.max_actual_capital = self.max_actual_capital.max(self.actual_capital);
        self.max_surrogate_capital = self.max_surrogate_capital.max(1.0 + self.surrogate_gain);
        self.surrogate.finish_round(step);
    }
}

// ---------------------------------------------------------------------------
// Online ε-sequence
// ---------------------------------------------------------------------------

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EpsilonError {
    #[error("stream values must be positive and finite, got {0}")]
    BadStreamValue(f64),
}

/// The online sequence `ε_n = min(1/a_n, 2^{-b})`, where the level `b` steps
/// up each time the running block sum `Σ ε_k a_k` reaches 1.
///
/// Guarantees `ε_n a_n ≤ 1` everywhere; on streams with `Σ a_n = ∞` the block
/// sums keep completing, so `Σ ε_n a_n = ∞` while `ε_n → 0`.
#[derive(Debug, Clone)]
pub struct EpsilonSequence {
    level: u32,
    block_sum: f64,
    emitted: usize,
}

impl Default for EpsilonSequence {
    fn default() -> Self {
        Self::new()
    }
}

impl EpsilonSequence {
    pub fn new() -> Self {
        Self { level: 1, block_sum: 0.0, emitted: 0 }
    }

    /// Consumes the next stream value and emits `ε_n`.
    pub fn next_epsilon(&mut self, a: f64) -> Result<f64, EpsilonError> {
        if a <= 0.0 || !a.is_finite() {
            return Err(EpsilonError::BadStreamValue(a));
        }
        let eps = (1.0 / a).min((2f64).powi(-(self.level.min(1000) as i32)));
        self.emitted += 1;
        self.block_sum += eps * a;
        if self.block_sum >= 1.0 {
            self.level += 1;
            self.block_sum = 0.0;
        }
        Ok(eps)
    }

    /// The current level `b` (nondecreasing).
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }
}

// ---------------------------------------------------------------------------
// Divergence compliance via the trinomial reduction
// ---------------------------------------------------------------------------

/// Snapshot of the reduced-game quantities for the round in flight.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReductionInfo {
    pub epsilon: f64,
    /// `h⁻¹(g(A_n)) / ε_n`: the outer displacement a reduced `±1` maps to.
    pub scale: f64,
    pub reduced_hedge_price: f64,
    pub reduced_stake: f64,
    pub reduced_hedge_stake: f64,
}

/// Reality's divergence-compliance strategy: restricts herself to
/// `x ∈ {m, m ± h⁻¹(g(A_n))/ε_n}`, runs a surrogate trinomial forcing Skeptic
/// in the reduced game (reduced forecast `(0, v'_n)` with
/// `v'_n = h(ε_n) · v_n/g(A_n) ∈ [0, 1]`), and picks the reduced outcome by
/// the strong-compliance rule.  The actual Skeptic's capital never exceeds 1.
///
/// With the quadratic hedge (`exponent = 2`) this is the divergence side of
/// the strong-law rate; general `h(x) = x^r` uses `ε_n = (sequence value)^{1/r}`.
pub struct DivergenceComply {
    spec: ProtocolSpec,
    hedge: Hedge,
    exponent: f64,
    growth: GrowthFunction,
    eps_seq: EpsilonSequence,
    reduced_spec: ProtocolSpec,
    surrogate: Box<dyn SkepticStrategy>,
    surrogate_floor: f64,
    surrogate_gain: f64,
    actual_capital: f64,
    surrogate_blend_weight: Option<f64>,
    activation_round: Option<usize>,
    hedge_price_sum: f64,
    pending_actual: SkepticMove,
    pending_surrogate: SkepticMove,
    pending_reduced_forecast: ForecastMove,
    pending_reduced_outcome: f64,
    current: ReductionInfo,
    fire_rounds: Vec<usize>,
    max_actual_capital: f64,
    uncovered_rounds: usize,
}

/// The forcing mixture run inside divergence compliance: truncation mixtures
/// of both compensator signs in the trinomial game, at half scale so the
/// blended account keeps headroom.
fn trinomial_forcing_surrogate(d_max: u32) -> Result<Mixture, StrategyError> {
    let spec = ProtocolSpec::trinomial();
    let minus = mixture_of_truncations(&spec, || Box::new(QuadraticCompensator::new(Sign::Minus)), d_max)?;
    let plus = mixture_of_truncations(&spec, || Box::new(QuadraticCompensator::new(Sign::Plus)), d_max)?;
    Mixture::new(vec![(0.35, Box::new(minus)), (0.15, Box::new(plus))])
}

impl DivergenceComply {
    /// Divergence compliance for the quadratic hedge (unbounded forecasting).
    pub fn trinomial(growth: GrowthFunction) -> Self {
        let spec = ProtocolSpec::unbounded();
        Self::build(spec, Hedge::quadratic(), 2.0, growth)
    }

    /// Divergence compliance for the power hedge `h(x) = x^r`, `r ∈ [1, 2]`.
    pub fn power_hedge(exponent: f64, growth: GrowthFunction) -> Result<Self, ComplianceError> {
        if !(1.0..=2.0).contains(&exponent) {
            return Err(ComplianceError::BadExponent(exponent));
        }
        let hedge = Hedge::power(exponent)
            .expect("exponent validated")
            .regularized(Regularization::H1);
        let spec = ProtocolSpec::ufgh(hedge.clone()).expect("power hedges in [1,2] pass the axioms");
        Ok(Self::build(spec, hedge, exponent, growth))
    }

    fn build(spec: ProtocolSpec, hedge: Hedge, exponent: f64, growth: GrowthFunction) -> Self {
        let surrogate = trinomial_forcing_surrogate(20).expect("trinomial game is bounded");
        let floor = surrogate.prudence_floor().unwrap_or(1.0).min(1.0);
        Self {
            spec,
            hedge,
            exponent,
            growth,
            eps_seq: EpsilonSequence::new(),
            reduced_spec: ProtocolSpec::trinomial(),
            surrogate: Box::new(surrogate),
            surrogate_floor: floor,
            surrogate_gain: 0.0,
            actual_capital: 1.0,
            surrogate_blend_weight: None,
            activation_round: None,
            hedge_price_sum: 0.0,
            pending_actual: SkepticMove::ZERO,
            pending_surrogate: SkepticMove::ZERO,
            pending_reduced_forecast: ForecastMove::new(0.0, 0.0),
            pending_reduced_outcome: 0.0,
            current: ReductionInfo::default(),
            fire_rounds: Vec::new(),
            max_actual_capital: 1.0,
            uncovered_rounds: 0,
        }
    }

    /// The protocol this strategy plays (carries the hedge for UFGH).
    pub fn protocol(&self) -> &ProtocolSpec {
        &self.spec
    }

    pub fn actual_capital(&self) -> f64 {
        self.actual_capital
    }

    pub fn max_actual_capital(&self) -> f64 {
        self.max_actual_capital
    }

    /// Rounds where Reality played `x = m ± h⁻¹(g(A_n))/ε_n`.
    pub fn fire_rounds(&self) -> &[usize] {
        &self.fire_rounds
    }

    /// Reduced-game values for the round in flight.
    pub fn last_reduction(&self) -> ReductionInfo {
        self.current
    }

    /// Rounds where no reduced outcome had nonpositive blended payoff.  The
    /// three-point set always covers the blend, so this stays zero.
    pub fn uncovered_rounds(&self) -> usize {
        self.uncovered_rounds
    }

    fn activation_weight(&self, capital_after: f64, gain_after: f64) -> f64 {
        let budget = 1.0 - capital_after;
        let exposure = gain_after + self.surrogate_floor;
        let cap = 1.0 - capital_after.max(0.0);
        if exposure <= 0.0 {
            cap
        } else {
            cap.min(budget / exposure)
        }
    }
}

impl RealityStrategy for DivergenceComply {
    fn announce(&mut self, n: usize, f: &ForecastMove, s: &SkepticMove) -> RealityMove {
        self.hedge_price_sum += f.hedge_price;
        let scale_g = self.growth.eval_shifted(self.hedge_price_sum);
        let a = f.hedge_price / scale_g;
        let value = self.eps_seq.next_epsilon(a).expect("v > 0 and g > 0");
        let eps = value.powf(1.0 / self.exponent);
        let displacement = self.hedge.inverse(scale_g).expect("g ≥ 0") / eps;
        let reduced_v = value * a; // h(ε)·v/g(A) ∈ [0, 1]
        debug_assert!(reduced_v <= 1.0 + 1e-15);

        let reduced_forecast = ForecastMove::new(0.0, reduced_v);
        let reduced_actual = SkepticMove::new(s.stake * displacement, s.hedge_stake * scale_g / value);
        self.current = ReductionInfo {
            epsilon: eps,
            scale: displacement,
            reduced_hedge_price: reduced_v,
            reduced_stake: reduced_actual.stake,
            reduced_hedge_stake: reduced_actual.hedge_stake,
        };

        let pm = self.surrogate.announce(n, &reduced_forecast);
        self.pending_surrogate = pm;
        self.pending_actual = *s;
        self.pending_reduced_forecast = reduced_forecast;

        let candidates = [0.0, 1.0, -1.0];
        let po_p = |z: f64| pm.stake * z + pm.hedge_stake * (z * z - reduced_v);
        let po_s = |z: f64| reduced_actual.stake * z + reduced_actual.hedge_stake * (z * z - reduced_v);

        let z = if let Some(weight) = self.surrogate_blend_weight {
            let blend = SkepticMove::new(
                weight * pm.stake + reduced_actual.stake,
                weight * pm.hedge_stake + reduced_actual.hedge_stake,
            );
            let (z, po) = pick_response(&candidates, 0.0, |z| {
                blend.stake * z + blend.hedge_stake * (z * z - reduced_v)
            });
            if po > 0.0 {
                self.uncovered_rounds += 1;
            }
            z
        } else if reduced_actual.is_zero() {
            let qualifying: Vec<f64> = candidates
                .iter()
                .copied()
                .filter(|&z| self.surrogate_gain + po_p(z) <= 0.0)
                .collect();
            if qualifying.contains(&0.0) {
                0.0
            } else if qualifying.is_empty() {
                pick_response(&candidates, 0.0, po_p).0
            } else {
                pick_response(&qualifying, 0.0, po_p).0
            }
        } else {
            let strict: Vec<f64> = candidates.iter().copied().filter(|&z| po_s(z) < 0.0).collect();
            if strict.is_empty() {
                pick_response(&candidates, 0.0, po_s).0
            } else {
                let (z, po) = pick_response(&strict, 0.0, po_s);
                let capital_after = self.actual_capital + po;
                let gain_after = self.surrogate_gain + po_p(z);
                self.surrogate_blend_weight = Some(self.activation_weight(capital_after, gain_after));
                self.activation_round = Some(n);
                z
            }
        };

        self.pending_reduced_outcome = z;
        if z != 0.0 {
            self.fire_rounds.push(n);
        }
        RealityMove::new(f.price + displacement * z)
    }

    fn finish_round(&mut self, step: &PathStep) {
        // The surrogate lives in the reduced game; feed it the reduced step.
        let z = self.pending_reduced_outcome;
        let rf = self.pending_reduced_forecast;
        self.surrogate_gain +=
            self.pending_surrogate.stake * z + self.pending_surrogate.hedge_stake * (z * z - rf.hedge_price);
        let reduced_step = PathStep {
            spec: &self.reduced_spec,
            index: step.index,
            forecast: rf,
            outcome: RealityMove::new(z),
        };
        self.surrogate.finish_round(&reduced_step);

        self.actual_capital += step.payoff_of(&self.pending_actual);
        self.max_actual_capital = self.max_actual_capital.max(self.actual_capital);
    }
}

/// Divergence compliance for the quadratic hedge.
pub fn trinomial_comply(growth: GrowthFunction) -> DivergenceComply {
    DivergenceComply::trinomial(growth)
}

/// Divergence compliance for `h(x) = x^r`.
pub fn power_hedge_comply(exponent: f64, growth: GrowthFunction) -> Result<DivergenceComply, ComplianceError> {
    DivergenceComply::power_hedge(exponent, growth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{run_game, Forecaster};
    use crate::protocol::validate_forecast;
    use crate::skeptic::{force_general_rate, ConstantBet, RandomDutySkeptic};

    struct ConstForecast(f64, f64);
    impl Forecaster for ConstForecast {
        fn announce(&mut self, _n: usize) -> ForecastMove {
            ForecastMove::new(self.0, self.1)
        }
    }

    #[test]
    fn coherent_response_quadratic_cases() {
        // V ≥ 0: the price, losing the hedge stake times the hedge price
        let (x, po) = coherent_response_quadratic(1.0, 0.3, 0.2, 5.0, 2.0);
        assert_eq!(x, 0.3);
        assert!((po - (-0.4)).abs() < 1e-15);

        // V < 0, m ≥ M/(2V): the lower extreme
        let (x, po) = coherent_response_quadratic(1.0, 0.0, 1.0, 0.0, -1.0);
        assert_eq!(x, -1.0);
        assert!(po.abs() < 1e-15); // -(1-1)·1 = 0

        // zero bet: the price, payoff zero
        let (x, po) = coherent_response_quadratic(1.0, -0.2, 0.5, 0.0, 0.0);
        assert_eq!(x, -0.2);
        assert_eq!(po, 0.0);

        // exhaustive nonpositivity over random admissible moves
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20_000 {
            let m = 2.0 * rng.gen::<f64>() - 1.0;
            let v = rng.gen::<f64>() * (1.0 - m * m);
            let stake = 20.0 * rng.gen::<f64>() - 10.0;
            let hedge_stake = 20.0 * rng.gen::<f64>() - 10.0;
            let (x, po) = coherent_response_quadratic(1.0, m, v, stake, hedge_stake);
            assert!(x.abs() <= 1.0);
            assert!(po <= 1e-12, "m={m} v={v} M={stake} V={hedge_stake} x={x}: {po}");
        }
    }

    #[test]
    fn coherent_response_unbounded_cases() {
        let spec = ProtocolSpec::unbounded();

        let (x, po, strict) =
            coherent_response_unbounded(&spec, &ForecastMove::new(0.0, 0.5), &SkepticMove::new(0.0, 1.0));
        assert_eq!(x.outcome, 0.0);
        assert!((po - (-0.5)).abs() < 1e-15);
        assert!(strict);

        let (x, po, strict) =
            coherent_response_unbounded(&spec, &ForecastMove::new(0.0, 0.5), &SkepticMove::new(2.0, 0.0));
        assert_eq!(x.outcome, -1.0);
        assert!((po - (-2.0)).abs() < 1e-15);
        assert!(strict);

        let (x, po, strict) =
            coherent_response_unbounded(&spec, &ForecastMove::new(0.7, 0.5), &SkepticMove::ZERO);
        assert_eq!(x.outcome, 0.7);
        assert_eq!(po, 0.0);
        assert!(!strict);
    }

    #[test]
    fn epsilon_sequence_hand_traces() {
        // a ≡ 1: 0.5, 0.5 (block closes), 0.25, ...
        let mut seq = EpsilonSequence::new();
        assert_eq!(seq.next_epsilon(1.0).unwrap(), 0.5);
        assert_eq!(seq.next_epsilon(1.0).unwrap(), 0.5);
        assert_eq!(seq.level(), 2);
        assert_eq!(seq.next_epsilon(1.0).unwrap(), 0.25);

        // a₁ = 4: ε₁ = 1/4 (the 1/a branch), block closes at once
        let mut seq = EpsilonSequence::new();
        assert_eq!(seq.next_epsilon(4.0).unwrap(), 0.25);
        assert_eq!(seq.level(), 2);

        // a_n = 2^{-n}: the block sum never reaches 1; the level locks
        let mut seq = EpsilonSequence::new();
        for n in 1..=10 {
            let eps = seq.next_epsilon((0.5f64).powi(n)).unwrap();
            assert_eq!(eps, 0.5, "n={n}");
        }
        assert_eq!(seq.level(), 1);

        assert!(seq.next_epsilon(0.0).is_err());
        assert!(seq.next_epsilon(-1.0).is_err());
    }

    #[test]
    fn surrogate_comply_bounds_hold() {
        // ε = 1: both capitals bounded by 2
        let spec = ProtocolSpec::unbounded();
        for seed in 0..5 {
            let surrogate = force_general_rate(&spec, &GrowthFunction::iterated_log(1), 0.2, 10).unwrap();
            let mut reality = SurrogateComply::new(&spec, Box::new(surrogate), 1.0).unwrap();
            let mut skeptic = RandomDutySkeptic::new(seed);
            let mut fc = ConstForecast(0.0, 1.0);
            run_game(&spec, &mut fc, &mut skeptic, &mut reality, 3000, 1.0).unwrap();
            assert!(reality.max_actual_capital() <= 2.0 + 1e-12, "seed {seed}");
            assert!(reality.max_surrogate_capital() <= 2.0 + 1e-12, "seed {seed}");
            assert_eq!(reality.uncovered_rounds(), 0);
        }
    }

    #[test]
    fn uncoverable_restriction_is_reported_not_hidden() {
        // a one-point move set cannot cover every blend: the strategy plays on
        // and counts the uncovered rounds instead of silently clamping
        use crate::protocol::RealityRestriction;
        let spec = ProtocolSpec::bfqh(1.0)
            .unwrap()
            .with_restriction(RealityRestriction::Fixed(vec![1.0]));
        let mut reality = SurrogateComply::new(
            &spec,
            Box::new(crate::skeptic::ConstantBet::zero()),
            1.0,
        )
        .unwrap();
        let mut skeptic = crate::skeptic::ConstantBet::new(1.0, 0.0); // bets into the forced outcome
        let mut fc = ConstForecast(0.0, 0.5);
        run_game(&spec, &mut fc, &mut skeptic, &mut reality, 10, 1.0).unwrap();
        assert!(reality.uncovered_rounds() > 0);

        // the three-point restriction always has coverage
        let spec = ProtocolSpec::bfqh(1.0)
            .unwrap()
            .with_restriction(RealityRestriction::PriceAndExtremes);
        let mut reality =
            SurrogateComply::new(&spec, Box::new(crate::skeptic::ConstantBet::zero()), 1.0).unwrap();
        let mut skeptic = crate::skeptic::ConstantBet::new(1.0, 0.0);
        let mut fc = ConstForecast(0.0, 0.5);
        run_game(&spec, &mut fc, &mut skeptic, &mut reality, 100, 1.0).unwrap();
        assert_eq!(reality.uncovered_rounds(), 0);
    }

    #[test]
    fn surrogate_comply_with_raw_compensator_surrogate() {
        // fixed-seed simulation oracle: the compensator plugged in directly,
        // constant forecast (m=0, v=1), a random duty-observing Skeptic
        let spec = ProtocolSpec::unbounded();
        let epsilon = 0.5;
        let mut reality = SurrogateComply::new(
            &spec,
            Box::new(crate::skeptic::QuadraticCompensator::new(crate::skeptic::Sign::Plus)),
            epsilon,
        )
        .unwrap();
        let mut skeptic = RandomDutySkeptic::new(2718);
        let mut fc = ConstForecast(0.0, 1.0);
        run_game(&spec, &mut fc, &mut skeptic, &mut reality, 10_000, 1.0).unwrap();
        assert!(reality.max_actual_capital() <= 1.0 + epsilon + 1e-12);
        assert!(reality.max_surrogate_capital() <= (1.0 + epsilon) / epsilon + 1e-12);
    }

    #[test]
    fn trinomial_comply_summable_stream_keeps_the_bound() {
        // v_n = 2^{-n} with constant growth: Σ v/g < ∞, so no recurrence is
        // promised, but the capital bound still holds
        struct ShrinkingForecast;
        impl Forecaster for ShrinkingForecast {
            fn announce(&mut self, n: usize) -> ForecastMove {
                ForecastMove::new(0.0, (0.5f64).powi(n.min(900) as i32))
            }
        }
        let mut reality = trinomial_comply(GrowthFunction::constant(1.0).unwrap());
        let spec = reality.protocol().clone();
        let mut skeptic = RandomDutySkeptic::new(31);
        let mut fc = ShrinkingForecast;
        let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 2000, 1.0).unwrap();
        assert!(trace.rounds.iter().all(|r| r.capital_after <= 1.0 + 1e-12));
    }

    #[test]
    fn power_hedge_identity_exponent_displaces_by_scale_over_epsilon() {
        // r = 1, g the identity, v ≡ 1: h⁻¹(y) = y, so the allowed moves are
        // m ± A_n/ε_n (or the price itself)
        let mut reality = power_hedge_comply(1.0, GrowthFunction::identity()).unwrap();
        let spec = reality.protocol().clone();
        let f = ForecastMove::new(0.25, 1.0);
        for n in 1..=100usize {
            let s = SkepticMove::new(if n % 2 == 0 { 0.4 } else { -0.4 }, 0.01);
            let x = reality.announce(n, &f, &s);
            let info = reality.last_reduction();
            let a_n = n as f64;
            assert!((info.scale - a_n / info.epsilon).abs() <= 1e-9 * a_n, "round {n}");
            let d = (x.outcome - f.price).abs();
            assert!(d == 0.0 || (d - info.scale).abs() <= 1e-9 * info.scale, "round {n}: d={d}");
            let step = PathStep { spec: &spec, index: n, forecast: f, outcome: x };
            reality.finish_round(&step);
        }
    }

    #[test]
    fn surrogate_comply_all_zero_skeptic() {
        let spec = ProtocolSpec::unbounded();
        let surrogate = force_general_rate(&spec, &GrowthFunction::identity(), 0.2, 8).unwrap();
        let mut reality = SurrogateComply::new(&spec, Box::new(surrogate), 0.5).unwrap();
        let mut skeptic = ConstantBet::zero();
        let mut fc = ConstForecast(0.0, 1.0);
        let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 2000, 1.0).unwrap();
        assert!(trace.rounds.iter().all(|r| r.capital_after <= 1.0 + 1e-12));
        assert!(reality.max_surrogate_capital() <= 3.0 + 1e-12); // (1+ε)/ε = 3
    }

    #[test]
    fn strong_compliance_zero_skeptic_keeps_everything_flat() {
        let spec = ProtocolSpec::unbounded();
        let surrogate = force_general_rate(&spec, &GrowthFunction::identity(), 0.2, 8).unwrap();
        let mut reality = SurrogateComplyStrong::new(&spec, Box::new(surrogate));
        let mut skeptic = ConstantBet::zero();
        let mut fc = ConstForecast(0.0, 1.0);
        let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 2000, 1.0).unwrap();
        assert!(reality.activation_round().is_none());
        assert!(trace.rounds.iter().all(|r| r.capital_after == 1.0));
        assert!(reality.surrogate_capital() <= 1.0 + 1e-12);
    }

    #[test]
    fn strong_compliance_activates_on_first_nonzero_bet() {
        struct LateSkeptic;
        impl SkepticStrategy for LateSkeptic {
            fn announce(&mut self, n: usize, _f: &ForecastMove) -> SkepticMove {
                if n >= 3 {
                    SkepticMove::new(0.0, 0.25)
                } else {
                    SkepticMove::ZERO
                }
            }
            fn finish_round(&mut self, _step: &PathStep) {}
        }
        let spec = ProtocolSpec::unbounded();
        let surrogate = force_general_rate(&spec, &GrowthFunction::identity(), 0.2, 8).unwrap();
        let mut reality = SurrogateComplyStrong::new(&spec, Box::new(surrogate));
        let mut skeptic = LateSkeptic;
        let mut fc = ConstForecast(0.0, 1.0);
        let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 50, 1.0).unwrap();
        assert_eq!(reality.activation_round(), Some(3));
        assert!(trace.rounds[2].capital_after < 1.0);
        assert!(trace.rounds.iter().all(|r| r.capital_after <= 1.0 + 1e-12));
    }

    #[test]
    fn strong_compliance_random_skeptics_stay_below_one() {
        let spec = ProtocolSpec::unbounded();
        for seed in 0..5 {
            let surrogate = force_general_rate(&spec, &GrowthFunction::iterated_log(1), 0.2, 10).unwrap();
            let mut reality = SurrogateComplyStrong::new(&spec, Box::new(surrogate));
            let mut skeptic = RandomDutySkeptic::new(1000 + seed);
            let mut fc = ConstForecast(0.0, 1.0);
            let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 3000, 1.0).unwrap();
            for r in &trace.rounds {
                assert!(r.capital_after <= 1.0 + 1e-12, "seed {seed} round {}", r.index);
            }
        }
    }

    #[test]
    fn trinomial_comply_restricted_moves_and_bound() {
        let growth = GrowthFunction::identity();
        let mut reality = trinomial_comply(growth);
        let spec = reality.protocol().clone();
        let mut skeptic = RandomDutySkeptic::new(11);
        let mut fc = ConstForecast(0.0, 1.0);
        let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 4000, 1.0).unwrap();
        for r in &trace.rounds {
            assert!(r.capital_after <= 1.0 + 1e-12, "round {}", r.index);
        }
        // every move is the price or the declared displacement
        for (r, _) in trace.rounds.iter().zip(0..) {
            let d = (r.reality.outcome - r.forecast.price).abs();
            assert!(d == 0.0 || d > 1.0, "unexpected displacement {d}");
        }
    }

    #[test]
    fn trinomial_comply_zero_skeptic_keeps_capital_exactly_one() {
        let mut reality = trinomial_comply(GrowthFunction::identity());
        let spec = reality.protocol().clone();
        let mut skeptic = ConstantBet::zero();
        let mut fc = ConstForecast(0.0, 1.0);
        let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 500, 1.0).unwrap();
        assert!(trace.rounds.iter().all(|r| r.capital_after == 1.0));
    }

    #[test]
    fn power_hedge_comply_matches_trinomial_at_exponent_two() {
        let mut a = trinomial_comply(GrowthFunction::identity());
        let mut b = power_hedge_comply(2.0, GrowthFunction::identity()).unwrap();
        let f = ForecastMove::new(0.0, 1.0);
        let s = SkepticMove::new(0.3, 0.1);
        for n in 1..=50 {
            let xa = a.announce(n, &f, &s);
            let xb = b.announce(n, &f, &s);
            assert!((xa.outcome - xb.outcome).abs() < 1e-9, "round {n}");
            let spec_a = a.protocol().clone();
            let spec_b = b.protocol().clone();
            let step_a = PathStep { spec: &spec_a, index: n, forecast: f, outcome: xa };
            let step_b = PathStep { spec: &spec_b, index: n, forecast: f, outcome: xb };
            a.finish_round(&step_a);
            b.finish_round(&step_b);
        }
        assert!(matches!(power_hedge_comply(2.5, GrowthFunction::identity()), Err(ComplianceError::BadExponent(_))));
    }

    #[test]
    fn power_hedge_reduced_price_stays_admissible() {
        let mut reality = power_hedge_comply(1.5, GrowthFunction::identity()).unwrap();
        let spec = reality.protocol().clone();
        let mut skeptic = RandomDutySkeptic::new(5);
        let mut fc = ConstForecast(0.0, 1.0);
        let trace = run_game(&spec, &mut fc, &mut skeptic, &mut reality, 1000, 1.0).unwrap();
        for r in &trace.rounds {
            assert!(r.capital_after <= 1.0 + 1e-12);
        }
        let info = reality.last_reduction();
        assert!(info.reduced_hedge_price <= 1.0 + 1e-15);
        assert!(validate_forecast(&ProtocolSpec::trinomial(), &ForecastMove::new(0.0, info.reduced_hedge_price)).is_ok());
    }
}
