//! Forecasting protocols: move spaces, coherence validation, and payoffs.
//!
//! A protocol fixes what the three players may announce each round and how
//! Skeptic's capital is updated.  The variants:
//!
//! - **Bounded forecasting** — prices and outcomes in `[-C, C]`, Skeptic bets a
//!   single stake `M`, payoff `M (x - m)`.
//! - **Coin tossing** — prices in `[0, 1]`, outcomes in `{0, 1}`, payoff `M (x - p)`.
//! - **Bounded forecasting with quadratic hedge (BFQH)** — Forecaster also
//!   prices the quadratic hedge (`v ∈ [0, C² - m²]` for coherence) and Skeptic
//!   may take either sign on the hedge leg: payoff
//!   `M (x - m) + V ((x - m)² - v)`.
//! - **Trinomial** — BFQH restricted to `m = 0`, `v ∈ [0, 1]`, `x ∈ {0, ±1}`.
//! - **Unbounded forecasting** — prices and outcomes range over all reals,
//!   `v > 0`, and the hedge stake must be nonnegative (`V ≥ 0`), since a
//!   negative hedge stake loses unboundedly as `|x| → ∞`.
//! - **Unbounded forecasting with a general hedge (UFGH)** — as above with the
//!   quadratic replaced by a hedge function `h`: payoff
//!   `M (x - m) + V (h(x - m) - v)`.

use crate::hedge::Hedge;
use std::fmt;

/// Forecaster's move: a price `m` for the outcome and a price `v` for the hedge.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ForecastMove {
    /// Price for Reality's move (conventionally `m`, or `p` in the coin game).
    pub price: f64,
    /// Price for the hedge payoff (ignored by the scalar protocols).
    pub hedge_price: f64,
}

impl ForecastMove {
    pub fn new(price: f64, hedge_price: f64) -> Self {
        Self { price, hedge_price }
    }

    /// Coin-game forecast: price `p`, hedge priced at the Bernoulli variance
    /// `p (1 - p)` so the forecast is also admissible in the bounding BFQH game.
    pub fn coin(p: f64) -> Self {
        Self { price: p, hedge_price: p * (1.0 - p) }
    }
}

/// Skeptic's move: a stake on the outcome and a stake on the hedge.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SkepticMove {
    pub stake: f64,
    pub hedge_stake: f64,
}

impl SkepticMove {
    pub const ZERO: SkepticMove = SkepticMove { stake: 0.0, hedge_stake: 0.0 };

    pub fn new(stake: f64, hedge_stake: f64) -> Self {
        Self { stake, hedge_stake }
    }

    pub fn is_zero(&self) -> bool {
        self.stake == 0.0 && self.hedge_stake == 0.0
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self { stake: w * self.stake, hedge_stake: w * self.hedge_stake }
    }
}

/// Reality's move.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RealityMove {
    pub outcome: f64,
}

impl RealityMove {
    pub fn new(outcome: f64) -> Self {
        Self { outcome }
    }
}

/// Optional per-round restriction of Reality's move space to a finite set.
#[derive(Debug, Clone, PartialEq)]
pub enum RealityRestriction {
    /// `x ∈ {m, -C, +C}` — the three-point restriction that keeps BFQH coherent.
    PriceAndExtremes,
    /// An explicit finite set, the same every round.
    Fixed(Vec<f64>),
}

impl RealityRestriction {
    /// The allowed outcomes for a round with forecast price `m` and bound `c`.
    pub fn allowed(&self, m: f64, c: f64) -> Vec<f64> {
        match self {
            RealityRestriction::PriceAndExtremes => vec![m, -c, c],
            RealityRestriction::Fixed(set) => set.clone(),
        }
    }
}

/// Which game is being played.
#[derive(Debug, Clone)]
pub enum ProtocolKind {
    BoundedForecasting { bound: f64 },
    Bfqh { bound: f64 },
    CoinToss,
    Trinomial,
    UnboundedForecasting,
    Ufgh { hedge: Hedge },
}

/// A protocol plus an optional restriction of Reality's move space.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub reality_restriction: Option<RealityRestriction>,
}

/// Reasons a spec fails to construct.
#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("bound must be positive and finite, got {0}")]
    NonPositiveBound(f64),
    #[error("hedge fails axiom checks on the validation grid: {0}")]
    HedgeAxioms(String),
}

impl ProtocolSpec {
    pub fn bounded(bound: f64) -> Result<Self, SpecError> {
        if bound <= 0.0 || !bound.is_finite() {
            return Err(SpecError::NonPositiveBound(bound));
        }
        Ok(Self { kind: ProtocolKind::BoundedForecasting { bound }, reality_restriction: None })
    }

    pub fn bfqh(bound: f64) -> Result<Self, SpecError> {
        if bound <= 0.0 || !bound.is_finite() {
            return Err(SpecError::NonPositiveBound(bound));
        }
        Ok(Self { kind: ProtocolKind::Bfqh { bound }, reality_restriction: None })
    }

    pub fn coin_toss() -> Self {
        Self { kind: ProtocolKind::CoinToss, reality_restriction: None }
    }

    pub fn trinomial() -> Self {
        Self { kind: ProtocolKind::Trinomial, reality_restriction: None }
    }

    pub fn unbounded() -> Self {
        Self { kind: ProtocolKind::UnboundedForecasting, reality_restriction: None }
    }

    /// UFGH with the given hedge.  The hedge is screened against the axioms
    /// (nonnegativity, symmetry, `h(x)/x` nondecreasing, `h(x)/x²`
    /// nonincreasing) on the default validation grid.
    pub fn ufgh(hedge: Hedge) -> Result<Self, SpecError> {
        let report = crate::hedge::check_axioms(&hedge, &crate::hedge::default_axiom_grid());
        if !report.is_clean() {
            return Err(SpecError::HedgeAxioms(report.summary()));
        }
        Ok(Self { kind: ProtocolKind::Ufgh { hedge }, reality_restriction: None })
    }

    pub fn with_restriction(mut self, r: RealityRestriction) -> Self {
        self.reality_restriction = Some(r);
        self
    }

    /// The bound `C` when the protocol has one.
    pub fn bound(&self) -> Option<f64> {
        match self.kind {
            ProtocolKind::BoundedForecasting { bound } | ProtocolKind::Bfqh { bound } => Some(bound),
            ProtocolKind::CoinToss | ProtocolKind::Trinomial => Some(1.0),
            _ => None,
        }
    }

    /// The hedge in force: quadratic unless the protocol carries its own.
    pub fn hedge(&self) -> Hedge {
        match &self.kind {
            ProtocolKind::Ufgh { hedge } => hedge.clone(),
            _ => Hedge::quadratic(),
        }
    }

    /// Whether Skeptic's hedge stake may be negative.
    pub fn allows_negative_hedge_stake(&self) -> bool {
        matches!(self.kind, ProtocolKind::Bfqh { .. } | ProtocolKind::Trinomial)
    }

    /// Whether Reality's move space is bounded (finite worst cases exist).
    pub fn is_bounded(&self) -> bool {
        !matches!(
            self.kind,
            ProtocolKind::UnboundedForecasting | ProtocolKind::Ufgh { .. }
        )
    }
}

/// A violated move invariant, carrying the offending bound.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MoveViolation {
    #[error("price {value} outside [{lo}, {hi}]")]
    PriceOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("hedge price {value} outside [0, {cap}] (cap = C² - m²)")]
    HedgePriceAboveCap { value: f64, cap: f64 },
    #[error("hedge price {value} must be positive")]
    HedgePriceNotPositive { value: f64 },
    #[error("hedge price {value} must be zero in a scalar-payoff protocol")]
    HedgePriceNotZero { value: f64 },
    #[error("price {value} must be zero in the trinomial game")]
    PriceNotZero { value: f64 },
    #[error("hedge stake {value} must be nonnegative here")]
    NegativeHedgeStake { value: f64 },
    #[error("hedge stake {value} must be zero in a scalar-payoff protocol")]
    HedgeStakeNotZero { value: f64 },
    #[error("outcome {value} outside [{lo}, {hi}]")]
    OutcomeOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("outcome {value} not in the allowed set {set:?}")]
    OutcomeNotInSet { value: f64, set: Vec<f64> },
    #[error("non-finite component {value}")]
    NonFinite { value: f64 },
}

/// Validity verdict for a move.
pub type Validity = Result<(), MoveViolation>;

fn check_finite(v: f64) -> Validity {
    if v.is_finite() {
        Ok(())
    } else {
        Err(MoveViolation::NonFinite { value: v })
    }
}

/// Validates a Forecaster move against the protocol's coherence rules.
///
/// Total function: invalid moves come back as a verdict naming the violated
/// bound, never as a panic.
pub fn validate_forecast(spec: &ProtocolSpec, f: &ForecastMove) -> Validity {
    check_finite(f.price)?;
    check_finite(f.hedge_price)?;
    match &spec.kind {
        ProtocolKind::BoundedForecasting { bound } => {
            if f.price.abs() > *bound {
                return Err(MoveViolation::PriceOutOfRange { value: f.price, lo: -bound, hi: *bound });
            }
            if f.hedge_price != 0.0 {
                return Err(MoveViolation::HedgePriceNotZero { value: f.hedge_price });
            }
            Ok(())
        }
        ProtocolKind::CoinToss => {
            if !(0.0..=1.0).contains(&f.price) {
                return Err(MoveViolation::PriceOutOfRange { value: f.price, lo: 0.0, hi: 1.0 });
            }
            // The hedge price is carried along for diagnostics but priced
            // implicitly at p(1-p); it does not enter the coin payoff.
            Ok(())
        }
        ProtocolKind::Bfqh { bound } => {
            if f.price.abs() > *bound {
                return Err(MoveViolation::PriceOutOfRange { value: f.price, lo: -bound, hi: *bound });
            }
            let cap = bound * bound - f.price * f.price;
            if f.hedge_price < 0.0 || f.hedge_price > cap {
                return Err(MoveViolation::HedgePriceAboveCap { value: f.hedge_price, cap });
            }
            Ok(())
        }
        ProtocolKind::Trinomial => {
            if f.price != 0.0 {
                return Err(MoveViolation::PriceNotZero { value: f.price });
            }
            if !(0.0..=1.0).contains(&f.hedge_price) {
                return Err(MoveViolation::HedgePriceAboveCap { value: f.hedge_price, cap: 1.0 });
            }
            Ok(())
        }
        ProtocolKind::UnboundedForecasting | ProtocolKind::Ufgh { .. } => {
            if f.hedge_price <= 0.0 {
                return Err(MoveViolation::HedgePriceNotPositive { value: f.hedge_price });
            }
            Ok(())
        }
    }
}

/// Validates a Skeptic move.
pub fn validate_skeptic(spec: &ProtocolSpec, s: &SkepticMove) -> Validity {
    check_finite(s.stake)?;
    check_finite(s.hedge_stake)?;
    match &spec.kind {
        ProtocolKind::BoundedForecasting { .. } | ProtocolKind::CoinToss => {
            if s.hedge_stake != 0.0 {
                return Err(MoveViolation::HedgeStakeNotZero { value: s.hedge_stake });
            }
            Ok(())
        }
        ProtocolKind::Bfqh { .. } | ProtocolKind::Trinomial => Ok(()),
        ProtocolKind::UnboundedForecasting | ProtocolKind::Ufgh { .. } => {
            if s.hedge_stake < 0.0 {
                return Err(MoveViolation::NegativeHedgeStake { value: s.hedge_stake });
            }
            Ok(())
        }
    }
}

/// Validates a Reality move (and the declared restriction, if any).
pub fn validate_reality(spec: &ProtocolSpec, f: &ForecastMove, x: &RealityMove) -> Validity {
    check_finite(x.outcome)?;
    match &spec.kind {
        ProtocolKind::BoundedForecasting { bound } | ProtocolKind::Bfqh { bound } => {
            if x.outcome.abs() > *bound {
                return Err(MoveViolation::OutcomeOutOfRange { value: x.outcome, lo: -bound, hi: *bound });
            }
        }
        ProtocolKind::CoinToss => {
            if x.outcome != 0.0 && x.outcome != 1.0 {
                return Err(MoveViolation::OutcomeNotInSet { value: x.outcome, set: vec![0.0, 1.0] });
            }
        }
        ProtocolKind::Trinomial => {
            if x.outcome != 0.0 && x.outcome != 1.0 && x.outcome != -1.0 {
                return Err(MoveViolation::OutcomeNotInSet { value: x.outcome, set: vec![-1.0, 0.0, 1.0] });
            }
        }
        ProtocolKind::UnboundedForecasting | ProtocolKind::Ufgh { .. } => {}
    }
    if let Some(restriction) = &spec.reality_restriction {
        let allowed = restriction.allowed(f.price, spec.bound().unwrap_or(f64::INFINITY));
        if !allowed.contains(&x.outcome) {
            return Err(MoveViolation::OutcomeNotInSet { value: x.outcome, set: allowed });
        }
    }
    Ok(())
}

/// The protocol payoff to Skeptic for one round of valid moves.
pub fn payoff(spec: &ProtocolSpec, f: &ForecastMove, s: &SkepticMove, x: &RealityMove) -> f64 {
    let d = x.outcome - f.price;
    match &spec.kind {
        ProtocolKind::BoundedForecasting { .. } | ProtocolKind::CoinToss => s.stake * d,
        ProtocolKind::Bfqh { .. } | ProtocolKind::Trinomial | ProtocolKind::UnboundedForecasting => {
            s.stake * d + s.hedge_stake * (d * d - f.hedge_price)
        }
        ProtocolKind::Ufgh { hedge } => s.stake * d + s.hedge_stake * (hedge.eval(d) - f.hedge_price),
    }
}

/// Validating wrapper around [`payoff`]: rejects invalid moves, naming the
/// violated invariant.
pub fn checked_payoff(
    spec: &ProtocolSpec,
    f: &ForecastMove,
    s: &SkepticMove,
    x: &RealityMove,
) -> Result<f64, MoveViolation> {
    validate_forecast(spec, f)?;
    validate_skeptic(spec, s)?;
    validate_reality(spec, f, x)?;
    Ok(payoff(spec, f, s, x))
}

/// Minimum gain to a scalar stake in the bounded forecasting game:
/// `min over x ∈ [-C, C] of stake · (x - m)`.
///
/// Always nonpositive for `m ∈ [-C, C]`.
pub fn min_gain(bound: f64, stake: f64, price: f64) -> f64 {
    if stake >= 0.0 {
        stake * (-bound - price)
    } else {
        stake * (bound - price)
    }
}

/// Worst-case payoff of a Skeptic move over Reality's admissible outcomes.
///
/// Finite only for bounded protocols; the truncation machinery relies on it.
pub fn worst_case_payoff(spec: &ProtocolSpec, f: &ForecastMove, s: &SkepticMove) -> f64 {
    if let Some(restriction) = &spec.reality_restriction {
        let c = spec.bound().unwrap_or(f64::INFINITY);
        return restriction
            .allowed(f.price, c)
            .into_iter()
            .map(|x| payoff(spec, f, s, &RealityMove::new(x)))
            .fold(f64::INFINITY, f64::min);
    }
    match &spec.kind {
        ProtocolKind::BoundedForecasting { bound } => min_gain(*bound, s.stake, f.price),
        ProtocolKind::CoinToss => [0.0, 1.0]
            .iter()
            .map(|&x| s.stake * (x - f.price))
            .fold(f64::INFINITY, f64::min),
        ProtocolKind::Trinomial => [-1.0, 0.0, 1.0]
            .iter()
            .map(|&x| payoff(spec, f, s, &RealityMove::new(x)))
            .fold(f64::INFINITY, f64::min),
        ProtocolKind::Bfqh { bound } => {
            // Quadratic in t = x - m over t ∈ [-C - m, C - m]: the minimum sits
            // at an endpoint, or at the vertex when the parabola opens upward.
            let (m, v) = (f.price, f.hedge_price);
            let (mm, vv) = (s.stake, s.hedge_stake);
            let q = |t: f64| mm * t + vv * (t * t - v);
            let lo = -bound - m;
            let hi = bound - m;
            let mut best = q(lo).min(q(hi));
            if vv > 0.0 {
                let t_star = -mm / (2.0 * vv);
                if t_star > lo && t_star < hi {
                    best = best.min(q(t_star));
                }
            }
            best
        }
        ProtocolKind::UnboundedForecasting | ProtocolKind::Ufgh { .. } => {
            if s.is_zero() {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

/// A probability measure on at most two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointMeasure {
    pub points: [(f64, f64); 2],
}

impl TwoPointMeasure {
    pub fn mean(&self) -> f64 {
        self.points.iter().map(|(z, w)| w * z).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.points.iter().map(|(z, w)| w * (z - m) * (z - m)).sum()
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum WitnessError {
    #[error("preconditions violated: need m ∈ [-C, C], v ∈ [0, C² - m²]")]
    OutOfRange,
    #[error("no measure with positive variance exists at the boundary m = ±C")]
    Infeasible,
}

/// The two-point measure on `[-C, C]` with mean exactly `m` and variance
/// exactly `v`:
///
/// ```text
/// a = m + (-C - m) √(v / (C² - m²)),   weight (1 - m/C) / 2
/// b = m + ( C - m) √(v / (C² - m²)),   weight (1 + m/C) / 2
/// ```
///
/// Witnesses that every admissible BFQH forecast is realizable, hence coherent.
pub fn witness_measure(bound: f64, m: f64, v: f64) -> Result<TwoPointMeasure, WitnessError> {
    let spread = bound * bound - m * m;
    if m.abs() > bound || v < 0.0 {
        return Err(WitnessError::OutOfRange);
    }
    if spread == 0.0 {
        // m = ±C forces v = 0: the degenerate point mass is the only choice.
        return if v == 0.0 {
            Ok(TwoPointMeasure { points: [(m, 0.5), (m, 0.5)] })
        } else {
            Err(WitnessError::Infeasible)
        };
    }
    if v > spread {
        return Err(WitnessError::OutOfRange);
    }
    let r = (v / spread).sqrt();
    let a = m + (-bound - m) * r;
    let b = m + (bound - m) * r;
    let w_a = (1.0 - m / bound) / 2.0;
    let w_b = (1.0 + m / bound) / 2.0;
    Ok(TwoPointMeasure { points: [(a, w_a), (b, w_b)] })
}

/// Reduces a BFQH bet against a coin forecast to the equivalent coin-game
/// stake: `M' = M + V (1 - 2p)`.
///
/// For both outcomes `x ∈ {0, 1}`, `(x - p)² - p(1 - p) = (x - p)(1 - 2p)`, so
/// the coin payoff with `M'` equals the BFQH payoff with `(M, V)` exactly.
pub fn coin_reduce(stake: f64, hedge_stake: f64, p: f64) -> f64 {
    stake + hedge_stake * (1.0 - 2.0 * p)
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ProtocolKind::BoundedForecasting { bound } => write!(out, "bounded:C={bound}")?,
            ProtocolKind::Bfqh { bound } => write!(out, "bfqh:C={bound}")?,
            ProtocolKind::CoinToss => write!(out, "coin")?,
            ProtocolKind::Trinomial => write!(out, "trinomial")?,
            ProtocolKind::UnboundedForecasting => write!(out, "unbounded")?,
            ProtocolKind::Ufgh { hedge } => write!(out, "ufgh:{hedge}")?,
        }
        match &self.reality_restriction {
            Some(RealityRestriction::PriceAndExtremes) => write!(out, ":restrict=extremes"),
            Some(RealityRestriction::Fixed(set)) => {
                write!(out, ":restrict=set(")?;
                for (i, v) in set.iter().enumerate() {
                    if i > 0 {
                        write!(out, ",")?;
                    }
                    write!(out, "{v}")?;
                }
                write!(out, ")")
            }
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bfqh1() -> ProtocolSpec {
        ProtocolSpec::bfqh(1.0).unwrap()
    }

    #[test]
    fn forecast_validation_names_the_violated_bound() {
        // v above the coherence cap C² - m² = 0.75
        let bad = validate_forecast(&bfqh1(), &ForecastMove::new(0.5, 0.8));
        assert_eq!(bad, Err(MoveViolation::HedgePriceAboveCap { value: 0.8, cap: 0.75 }));

        // boundary v = C² - m² is valid
        assert!(validate_forecast(&bfqh1(), &ForecastMove::new(0.0, 1.0)).is_ok());

        // price outside [-1, 1]
        let bad = validate_forecast(&bfqh1(), &ForecastMove::new(1.5, 0.0));
        assert!(matches!(bad, Err(MoveViolation::PriceOutOfRange { .. })));
    }

    #[test]
    fn payoff_matches_the_update_rule() {
        let spec = bfqh1();
        let p = payoff(
            &spec,
            &ForecastMove::new(0.0, 1.0),
            &SkepticMove::new(2.0, 1.0),
            &RealityMove::new(1.0),
        );
        assert_eq!(p, 2.0); // 2·1 + 1·(1 - 1)

        // zero bet pays zero in any protocol
        for spec in [bfqh1(), ProtocolSpec::coin_toss(), ProtocolSpec::unbounded()] {
            let p = payoff(&spec, &ForecastMove::new(0.3, 0.1), &SkepticMove::ZERO, &RealityMove::new(0.9));
            assert_eq!(p, 0.0);
        }
    }

    #[test]
    fn payoff_with_regularized_power_hedge() {
        // h(x) = x^1.5 regularized so h(x) = x² on [-1, 1]: at x = 0.5 the
        // hedge pays 0.25 against a price of 0.5.
        let hedge = Hedge::power(1.5).unwrap().regularized(crate::hedge::Regularization::H1);
        let spec = ProtocolSpec::ufgh(hedge).unwrap();
        let p = payoff(
            &spec,
            &ForecastMove::new(0.0, 0.5),
            &SkepticMove::new(0.0, 1.0),
            &RealityMove::new(0.5),
        );
        assert!((p - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn checked_payoff_rejects_invalid_moves_by_name() {
        let spec = bfqh1();
        let err = checked_payoff(
            &spec,
            &ForecastMove::new(0.5, 0.8),
            &SkepticMove::ZERO,
            &RealityMove::new(0.0),
        )
        .unwrap_err();
        assert_eq!(err, MoveViolation::HedgePriceAboveCap { value: 0.8, cap: 0.75 });

        let ok = checked_payoff(
            &spec,
            &ForecastMove::new(0.5, 0.5),
            &SkepticMove::new(1.0, 0.0),
            &RealityMove::new(1.0),
        )
        .unwrap();
        assert_eq!(ok, 0.5);
    }

    #[test]
    fn min_gain_formula_and_grid_oracle() {
        assert_eq!(min_gain(1.0, 1.0, 0.0), -1.0);
        assert_eq!(min_gain(1.0, 0.0, 0.3), 0.0);
        assert_eq!(min_gain(1.0, -2.0, 0.5), -1.0); // -2 (1 - 0.5)

        // brute-force cross-check over a 10⁴-point grid
        for &(c, stake, m) in &[(1.0, 1.0, 0.0), (1.0, -2.0, 0.5), (2.0, 0.7, -1.3), (1.0, -0.4, -0.9)] {
            let mut brute = f64::INFINITY;
            for i in 0..=10_000 {
                let x = -c + 2.0 * c * (i as f64) / 10_000.0;
                brute = brute.min(stake * (x - m));
            }
            let exact = min_gain(c, stake, m);
            assert!((brute - exact).abs() <= 1e-9, "stake {stake} m {m}: {brute} vs {exact}");
            assert!(exact <= 0.0);
        }
    }

    #[test]
    fn witness_measure_examples() {
        // symmetric: points ±1 with weight 1/2 each
        let w = witness_measure(1.0, 0.0, 1.0).unwrap();
        assert_eq!(w.points, [(-1.0, 0.5), (1.0, 0.5)]);

        // zero variance: total mass at the price
        let w = witness_measure(1.0, 0.0, 0.0).unwrap();
        assert_eq!(w.mean(), 0.0);
        assert_eq!(w.variance(), 0.0);

        // asymmetric case evaluated by hand: a ≈ -0.5607, b ≈ 0.8536
        let w = witness_measure(1.0, 0.5, 0.375).unwrap();
        let [(a, wa), (b, wb)] = w.points;
        assert!((a - (0.5 - 1.5 * (0.5f64).sqrt())).abs() < 1e-15);
        assert!((b - (0.5 + 0.5 * (0.5f64).sqrt())).abs() < 1e-15);
        assert!((wa - 0.25).abs() < 1e-15);
        assert!((wb - 0.75).abs() < 1e-15);
        assert!((w.mean() - 0.5).abs() < 1e-12);
        assert!((w.variance() - 0.375).abs() < 1e-12);

        // boundary m = ±C: v > 0 infeasible, v = 0 degenerate
        assert_eq!(witness_measure(1.0, 1.0, 0.1), Err(WitnessError::Infeasible));
        let w = witness_measure(1.0, 1.0, 0.0).unwrap();
        assert_eq!(w.mean(), 1.0);
    }

    #[test]
    fn coin_reduction_examples() {
        assert_eq!(coin_reduce(1.0, 2.0, 0.25), 2.0);
        assert_eq!(coin_reduce(0.7, 0.0, 0.9), 0.7);

        // M = 0, V = 1, p = 1/2: both payoffs vanish at x ∈ {0, 1}
        let m_eff = coin_reduce(0.0, 1.0, 0.5);
        assert_eq!(m_eff, 0.0);
        let bfqh = ProtocolSpec::bfqh(1.0).unwrap();
        for x in [0.0, 1.0] {
            let quad = payoff(&bfqh, &ForecastMove::coin(0.5), &SkepticMove::new(0.0, 1.0), &RealityMove::new(x));
            assert_eq!(quad, 0.0);
        }
    }

    #[test]
    fn coin_reduction_payoff_equality_both_outcomes() {
        let bfqh = ProtocolSpec::bfqh(1.0).unwrap();
        let coin = ProtocolSpec::coin_toss();
        for &(mm, vv, p) in &[(1.0, 2.0, 0.25), (-0.3, 0.8, 0.9), (0.0, -1.5, 0.4)] {
            let m_eff = coin_reduce(mm, vv, p);
            for x in [0.0, 1.0] {
                let quad = payoff(&bfqh, &ForecastMove::coin(p), &SkepticMove::new(mm, vv), &RealityMove::new(x));
                let scalar = payoff(&coin, &ForecastMove::coin(p), &SkepticMove::new(m_eff, 0.0), &RealityMove::new(x));
                assert!((quad - scalar).abs() <= 1e-15, "x={x}: {quad} vs {scalar}");
            }
        }
    }

    #[test]
    fn worst_case_payoff_brute_force_bfqh() {
        let spec = bfqh1();
        let cases = [
            (ForecastMove::new(0.2, 0.5), SkepticMove::new(1.5, -0.7)),
            (ForecastMove::new(-0.6, 0.3), SkepticMove::new(-2.0, 1.2)),
            (ForecastMove::new(0.0, 1.0), SkepticMove::new(0.0, 3.0)),
        ];
        for (f, s) in cases {
            let exact = worst_case_payoff(&spec, &f, &s);
            let mut brute = f64::INFINITY;
            for i in 0..=20_000 {
                let x = -1.0 + 2.0 * (i as f64) / 20_000.0;
                brute = brute.min(payoff(&spec, &f, &s, &RealityMove::new(x)));
            }
            assert!((brute - exact).abs() <= 1e-6, "{brute} vs {exact}");
            assert!(exact <= brute + 1e-12);
        }
    }

    #[test]
    fn three_point_restriction_always_has_a_nonpositive_payoff() {
        // Coherence survives restricting Reality to {m, -C, +C}.
        let spec = bfqh1();
        let mut rng_state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng_state ^= rng_state << 13;
            rng_state ^= rng_state >> 7;
            rng_state ^= rng_state << 17;
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..5000 {
            let m = 2.0 * next() - 1.0;
            let v = next() * (1.0 - m * m);
            let f = ForecastMove::new(m, v);
            let s = SkepticMove::new(20.0 * next() - 10.0, 20.0 * next() - 10.0);
            let best = [m, -1.0, 1.0]
                .iter()
                .map(|&x| payoff(&spec, &f, &s, &RealityMove::new(x)))
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 1e-12, "m={m} v={v} s={s:?}: {best}");
        }
    }
}
