//! The Gilat construction: an adversarial apparatus showing that no condition
//! on forecast sequences alone can characterize convergence of the centered
//! outcome sums.
//!
//! Around a harmonic scale `ω_n = 1/(n + a)` (with `a` large enough that
//! `√ω_{n-1} + √ω_n ≤ C`), the builder runs a mutual induction: two rewritten
//! copies `Q1`, `Q2` of a plug-in strategy `Q` are driven on synthetic
//! histories, the blended stake of `T = (P + Q1 + Q2)/3` fixes the sign of
//! `η_n` (`+√ω_n` when the blend's stake is nonpositive), and three case
//! traces advance in lock step:
//!
//! - Case I: forecast `(0, ω_n)`, Skeptic `T`, outcome `η_n` — the blend's
//!   capital never increases;
//! - Case II: forecast `(-η_{n-1}, ω_n)`, Skeptic `Q`, outcome `η_n - η_{n-1}`
//!   — the outcome sums telescope to `η_n → 0`;
//! - Case III: same forecasts, outcome `-η_n - η_{n-1}` — the outcome sums
//!   `-2 Σ_{k<n} η_k - η_n` diverge.
//!
//! Cases II and III realize the same capitals as the `Q1`/`Q2` accounts inside
//! Case I, round by round; [`check_equalities`] recomputes both routes from
//! the stored moves and reports the first discrepancy.

use crate::game::SkepticStrategy;
use crate::protocol::{ForecastMove, SkepticMove};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GilatError {
    #[error("shift {shift} too small for bound {bound}: 1/√(a-1) + 1/√a = {value} > C")]
    ShiftTooSmall { shift: u64, bound: f64, value: f64 },
    #[error("bound must be positive and finite, got {0}")]
    BadBound(f64),
    #[error("round {round}: {what}")]
    Admissibility { round: usize, what: String },
}

/// The smallest integer `a ≥ 2` with `1/√(a-1) + 1/√a ≤ C`.
pub fn min_admissible_shift(bound: f64) -> u64 {
    let margin = |a: u64| 1.0 / ((a - 1) as f64).sqrt() + 1.0 / (a as f64).sqrt();
    // 1/√(a-1) + 1/√a ≈ 2/√a, so start just below the crossover and walk up.
    let mut a = ((1.9 / bound) * (1.9 / bound)).floor().max(2.0) as u64;
    while a > 2 && margin(a - 1) <= bound {
        a -= 1;
    }
    while margin(a) > bound {
        a += 1;
    }
    a
}

#[derive(Debug, Clone, Copy)]
pub struct GilatConfig {
    pub bound: f64,
    /// The harmonic shift `a` in `ω_n = 1/(n + a)`.
    pub shift: u64,
    pub horizon: usize,
}

impl GilatConfig {
    pub fn new(bound: f64, shift: u64, horizon: usize) -> Result<Self, GilatError> {
        if bound <= 0.0 || !bound.is_finite() {
            return Err(GilatError::BadBound(bound));
        }
        let shift = shift.max(2);
        let value = 1.0 / ((shift - 1) as f64).sqrt() + 1.0 / (shift as f64).sqrt();
        if value > bound {
            return Err(GilatError::ShiftTooSmall { shift, bound, value });
        }
        Ok(Self { bound, shift, horizon })
    }

    /// Picks the smallest admissible shift for the bound.
    pub fn auto(bound: f64, horizon: usize) -> Result<Self, GilatError> {
        Self::new(bound, min_admissible_shift(bound), horizon)
    }

    pub fn omega(&self, n: usize) -> f64 {
        1.0 / (n as f64 + self.shift as f64)
    }
}

/// One round of the lock-step construction.
#[derive(Debug, Clone, Copy)]
pub struct GilatRound {
    pub index: usize,
    pub omega: f64,
    pub eta: f64,
    /// The blend `T`'s stake, whose sign decided `η_n`.
    pub blend_stake: f64,
    pub p_move: SkepticMove,
    pub q1_move: SkepticMove,
    /// The unnegated inner move of the `Q2` account (its stake is played
    /// negated in Case I).
    pub q2_inner_move: SkepticMove,
    /// Capitals after this round, each account starting at 1.
    pub case1_blend: f64,
    pub case1_p: f64,
    pub case1_q1: f64,
    pub case1_q2: f64,
    pub case2_q: f64,
    pub case3_q: f64,
    /// Running outcome sums of Cases II and III.
    pub case2_spread_sum: f64,
    pub case3_spread_sum: f64,
}

#[derive(Debug, Clone)]
pub struct GilatRun {
    pub config: GilatConfig,
    pub rounds: Vec<GilatRound>,
}

/// Executes the mutual induction over the configured horizon.
///
/// `make_p` and `make_q` build fresh instances of the plug-in strategies; `Q`
/// is instantiated twice, once per rewritten history.  Every forecast and
/// outcome in all three cases is range-checked against the bound.
pub fn build_run(
    config: GilatConfig,
    make_p: impl FnOnce() -> Box<dyn SkepticStrategy>,
    make_q: impl Fn() -> Box<dyn SkepticStrategy>,
) -> Result<GilatRun, GilatError> {
    let c = config.bound;
    let f1_spec = crate::protocol::ProtocolSpec::bfqh(c).expect("bound validated");
    let mut p = make_p();
    let mut q1 = make_q();
    let mut q2 = make_q();

    let mut rounds = Vec::with_capacity(config.horizon);
    let mut eta_prev = 0.0f64;
    let mut acc = CaseCapitals::default();
    let mut sum2 = 0.0;
    let mut sum3 = 0.0;

    for n in 1..=config.horizon {
        let omega = config.omega(n);
        let f1 = ForecastMove::new(0.0, omega);
        let f2 = ForecastMove::new(-eta_prev, omega);

        // Range checks the proof asserts for each case.
        if f2.price.abs() > c {
            return Err(GilatError::Admissibility { round: n, what: format!("price {} outside [-C, C]", f2.price) });
        }
        if omega > c * c - f2.price * f2.price {
            return Err(GilatError::Admissibility {
                round: n,
                what: format!("hedge price {omega} above cap {}", c * c - f2.price * f2.price),
            });
        }

        let p_move = p.announce(n, &f1);
        let q1_move = q1.announce(n, &f2);
        let q2_inner_move = q2.announce(n, &f2);
        let q2_move = SkepticMove::new(-q2_inner_move.stake, q2_inner_move.hedge_stake);

        let blend_stake = (p_move.stake + q1_move.stake + q2_move.stake) / 3.0;
        let eta = if blend_stake <= 0.0 { omega.sqrt() } else { -omega.sqrt() };

        let x2 = eta - eta_prev;
        let x3 = -eta - eta_prev;
        for (label, x) in [("case I", eta), ("case II", x2), ("case III", x3)] {
            if x.abs() > c {
                return Err(GilatError::Admissibility { round: n, what: format!("{label} outcome {x} outside [-C, C]") });
            }
        }

        // Case I payoffs on (f1, η).
        let po = |mv: &SkepticMove, f: &ForecastMove, x: f64| {
            let d = x - f.price;
            mv.stake * d + mv.hedge_stake * (d * d - f.hedge_price)
        };
        acc.case1_p += po(&p_move, &f1, eta);
        acc.case1_q1 += po(&q1_move, &f1, eta);
        acc.case1_q2 += po(&q2_move, &f1, eta);
        let blend = SkepticMove::new(
            blend_stake,
            (p_move.hedge_stake + q1_move.hedge_stake + q2_move.hedge_stake) / 3.0,
        );
        acc.case1_blend += po(&blend, &f1, eta);

        // Cases II and III settle the unrewritten strategy's moves on the
        // rewritten forecasts and outcomes.
        acc.case2 += po(&q1_move, &f2, x2);
        acc.case3 += po(&q2_inner_move, &f2, x3);
        sum2 += x2;
        sum3 += x3;

        let step1 = crate::game::PathStep {
            spec: &f1_spec,
            index: n,
            forecast: f1,
            outcome: crate::protocol::RealityMove::new(eta),
        };
        p.finish_round(&step1);
        let step2 = crate::game::PathStep {
            spec: &f1_spec,
            index: n,
            forecast: f2,
            outcome: crate::protocol::RealityMove::new(x2),
        };
        q1.finish_round(&step2);
        let step3 = crate::game::PathStep {
            spec: &f1_spec,
            index: n,
            forecast: f2,
            outcome: crate::protocol::RealityMove::new(x3),
        };
        q2.finish_round(&step3);

        rounds.push(GilatRound {
            index: n,
            omega,
            eta,
            blend_stake,
            p_move,
            q1_move,
            q2_inner_move,
            case1_blend: 1.0 + acc.case1_blend,
            case1_p: 1.0 + acc.case1_p,
            case1_q1: 1.0 + acc.case1_q1,
            case1_q2: 1.0 + acc.case1_q2,
            case2_q: 1.0 + acc.case2,
            case3_q: 1.0 + acc.case3,
            case2_spread_sum: sum2,
            case3_spread_sum: sum3,
        });
        eta_prev = eta;
    }

    Ok(GilatRun { config, rounds })
}

#[derive(Default)]
struct CaseCapitals {
    case1_blend: f64,
    case1_p: f64,
    case1_q1: f64,
    case1_q2: f64,
    case2: f64,
    case3: f64,
}

/// Result of re-verifying a run's identities from its stored moves.
#[derive(Debug, Clone)]
pub struct EqualityReport {
    /// Largest residual of the two capital equalities, over all rounds.
    pub max_equality_residual: f64,
    /// First round where an equality residual exceeded the tolerance.
    pub first_failure: Option<EqualityFailure>,
    /// Largest residual of the Case I ledger identity
    /// `K_blend = 1 + (K_P + K_Q1 + K_Q2 - 3)/3`.
    pub max_ledger_residual: f64,
    /// Whether `K_P + K_Q1 + K_Q2 ≤ 3` held on every round.
    pub component_sum_bounded: bool,
    /// Whether the blend's Case I capital never increased (up to the float
    /// floor).
    pub case1_monotone: bool,
    /// Largest deviation of the Case II outcome sums from `η_n`.
    pub max_case2_telescope_residual: f64,
    /// Largest deviation of the Case III outcome sums from
    /// `-2 Σ_{k<n} η_k - η_n`.
    pub max_case3_closed_form_residual: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct EqualityFailure {
    pub round: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl EqualityReport {
    pub fn is_clean(&self) -> bool {
        self.first_failure.is_none()
            && self.component_sum_bounded
            && self.case1_monotone
            && self.max_ledger_residual <= 1e-9
    }
}

fn rel_residual(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Verifies the run's identities at relative tolerance 1e-9:
///
/// - the stored capital equalities `K^{Q1 in Case I} = K^{Case II}` and
///   `K^{Q2 in Case I} = K^{Case III}` at every round (the build computes the
///   two sides through genuinely different payoff routes),
/// - a full recomputation of all four account capitals from the stored moves
///   and `η` values against the stored capitals, so any corruption of the run
///   is caught at its round,
/// - the Case I ledger identity and the component-sum bound,
/// - monotonicity of the blend's capital,
/// - the telescoped and closed-form outcome sums of Cases II and III.
pub fn check_equalities(run: &GilatRun) -> EqualityReport {
    let tol = 1e-9;
    let mut max_eq = 0.0f64;
    let mut first_failure = None;
    let mut max_ledger = 0.0f64;
    let mut component_sum_bounded = true;
    let mut case1_monotone = true;
    let mut max_tel2 = 0.0f64;
    let mut max_closed3 = 0.0f64;

    let mut eta_prev = 0.0;
    let mut eta_partial = 0.0; // Σ_{k≤n} η_k
    let mut k_q1_case1 = 1.0;
    let mut k_q2_case1 = 1.0;
    let mut k_case2 = 1.0;
    let mut k_case3 = 1.0;
    let mut prev_blend = 1.0;

    for r in &run.rounds {
        let omega = r.omega;
        let eta = r.eta;
        let f1 = ForecastMove::new(0.0, omega);
        let f2 = ForecastMove::new(-eta_prev, omega);
        let po = |mv: &SkepticMove, f: &ForecastMove, x: f64| {
            let d = x - f.price;
            mv.stake * d + mv.hedge_stake * (d * d - f.hedge_price)
        };

        let q2_move = SkepticMove::new(-r.q2_inner_move.stake, r.q2_inner_move.hedge_stake);
        k_q1_case1 += po(&r.q1_move, &f1, eta);
        k_q2_case1 += po(&q2_move, &f1, eta);
        k_case2 += po(&r.q1_move, &f2, eta - eta_prev);
        k_case3 += po(&r.q2_inner_move, &f2, -eta - eta_prev);

        // η must be √ω with the sign the stored blend stake dictates.
        let expected_eta = if r.blend_stake <= 0.0 { omega.sqrt() } else { -omega.sqrt() };
        if eta != expected_eta && first_failure.is_none() {
            first_failure = Some(EqualityFailure { round: r.index, lhs: eta, rhs: expected_eta });
        }
        let recomputed_blend =
            (r.p_move.stake + r.q1_move.stake - r.q2_inner_move.stake) / 3.0;

        // Stored equalities plus recomputed-vs-stored on every account.
        let comparisons = [
            (r.case1_q1, r.case2_q),
            (r.case1_q2, r.case3_q),
            (k_q1_case1, r.case1_q1),
            (k_q2_case1, r.case1_q2),
            (k_case2, r.case2_q),
            (k_case3, r.case3_q),
            (recomputed_blend, r.blend_stake),
        ];
        for (lhs, rhs) in comparisons {
            let res = rel_residual(lhs, rhs);
            max_eq = max_eq.max(res);
            if res > tol && first_failure.is_none() {
                first_failure = Some(EqualityFailure { round: r.index, lhs, rhs });
            }
        }

        // Ledger identity and component bound, against the stored capitals.
        let ledger = 1.0 + (r.case1_p + r.case1_q1 + r.case1_q2 - 3.0) / 3.0;
        max_ledger = max_ledger.max(rel_residual(r.case1_blend, ledger));
        if r.case1_p + r.case1_q1 + r.case1_q2 > 3.0 + 1e-9 {
            component_sum_bounded = false;
        }
        if r.case1_blend > prev_blend + 1e-12 {
            case1_monotone = false;
        }
        prev_blend = r.case1_blend;

        eta_partial += eta;
        max_tel2 = max_tel2.max((r.case2_spread_sum - eta).abs());
        let closed3 = -2.0 * (eta_partial - eta) - eta; // -2 Σ_{k<n} η_k - η_n
        max_closed3 = max_closed3.max((r.case3_spread_sum - closed3).abs());

        eta_prev = eta;
    }

    EqualityReport {
        max_equality_residual: max_eq,
        first_failure,
        max_ledger_residual: max_ledger,
        component_sum_bounded,
        case1_monotone,
        max_case2_telescope_residual: max_tel2,
        max_case3_closed_form_residual: max_closed3,
    }
}
