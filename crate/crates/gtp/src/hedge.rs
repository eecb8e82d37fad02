//! Hedge functions and their regularizations.
//!
//! A hedge `h` prices deviations `x - m`.  The axioms:
//!
//! - (A0) `h(x) = h(|x|) ≥ 0`,
//! - (A1) `h(x)/x` is monotone increasing for `x > c`,
//! - (A2) `h(x)/x²` is monotone decreasing for `x > c`,
//!
//! place `h` between linear and quadratic growth.  Two regularizations remove
//! the threshold `c`:
//!
//! - `h₀(x) = (h(c)/c)·x` for `|x| ≤ c`, `h(x)` otherwise — linear splice, so
//!   (A1)/(A2) hold down to 0 and the inverse exists on `[0, ∞)`;
//! - `h₁(x) = x²` for `|x| ≤ 1`, `h(h⁻¹(1)·x)` otherwise — additionally makes
//!   the hedge exactly quadratic near the origin, with `h₁(x)/x² ≤ 1` beyond.

use std::fmt;
use std::sync::Arc;

/// Relative tolerance for hedge inversion.
const INVERSE_TOL: f64 = 1e-12;

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum HedgeKind {
    Quadratic,
    Power { exponent: f64 },
    Custom { name: String, eval: EvalFn, threshold: f64 },
}

/// Which regularization has been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularization {
    None,
    /// Linear below the threshold.
    H0,
    /// Quadratic on `[-1, 1]`, rescaled hedge beyond.
    H1,
}

/// A hedge function, immutable after construction.
#[derive(Clone)]
pub struct Hedge {
    kind: HedgeKind,
    regularization: Regularization,
    /// `h₀⁻¹(1)` of the underlying hedge, cached for the H1 splice.
    inv_at_one: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HedgeError {
    #[error("power exponent must be positive and finite, got {0}")]
    BadExponent(f64),
    #[error("custom hedge threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("hedge inverse is only defined for y ≥ 0, got {0}")]
    NegativeTarget(f64),
}

impl Hedge {
    /// The quadratic hedge `h(x) = x²`.
    pub fn quadratic() -> Self {
        Hedge { kind: HedgeKind::Quadratic, regularization: Regularization::None, inv_at_one: 1.0 }
    }

    /// The power hedge `h(x) = |x|^r`.
    ///
    /// Any positive exponent is constructible so axiom checks can report on it;
    /// only `r ∈ [1, 2]` survives the axiom screen that protocol construction
    /// applies.
    pub fn power(exponent: f64) -> Result<Self, HedgeError> {
        if exponent <= 0.0 || !exponent.is_finite() {
            return Err(HedgeError::BadExponent(exponent));
        }
        Ok(Hedge { kind: HedgeKind::Power { exponent }, regularization: Regularization::None, inv_at_one: 1.0 })
    }

    /// A custom hedge from a forward evaluator and the threshold `c` beyond
    /// which (A1)/(A2) hold.  The evaluator is queried at `|x|` only.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        threshold: f64,
    ) -> Result<Self, HedgeError> {
        if threshold <= 0.0 || !threshold.is_finite() {
            return Err(HedgeError::BadThreshold(threshold));
        }
        Ok(Hedge {
            kind: HedgeKind::Custom { name: name.into(), eval: Arc::new(eval), threshold },
            regularization: Regularization::None,
            inv_at_one: 1.0,
        })
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization
    }

    /// Power exponent, when this is a (possibly regularized) power hedge.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            HedgeKind::Quadratic => Some(2.0),
            HedgeKind::Power { exponent } => Some(exponent),
            HedgeKind::Custom { .. } => None,
        }
    }

    /// Applies a regularization.  Idempotent; the quadratic hedge is a fixed
    /// point of both modes, and pure powers are untouched by H0 (their
    /// threshold is already 0).
    pub fn regularized(&self, mode: Regularization) -> Hedge {
        let mut out = self.clone();
        match (mode, &self.kind) {
            (Regularization::None, _) => out.regularization = Regularization::None,
            (_, HedgeKind::Quadratic) => out.regularization = Regularization::None,
            (Regularization::H0, HedgeKind::Power { .. }) => out.regularization = Regularization::None,
            (Regularization::H0, HedgeKind::Custom { .. }) => out.regularization = Regularization::H0,
            (Regularization::H1, _) => {
                // Splice against the H0-smoothed hedge so the inverse below the
                // junction is well defined.
                let base = self.regularized(Regularization::H0);
                out.inv_at_one = base.base_inverse_h0(1.0);
                out.regularization = Regularization::H1;
            }
        }
        out
    }

    /// The raw hedge before regularization, at `t ≥ 0`.
    fn base_eval(&self, t: f64) -> f64 {
        match &self.kind {
            HedgeKind::Quadratic => t * t,
            HedgeKind::Power { exponent } => t.powf(*exponent),
            HedgeKind::Custom { eval, .. } => eval(t),
        }
    }

    /// The H0-regularized hedge at `t ≥ 0` (identical to the base for
    /// quadratic and power hedges).
    fn eval_h0(&self, t: f64) -> f64 {
        match &self.kind {
            HedgeKind::Custom { threshold, .. } if t <= *threshold => {
                self.base_eval(*threshold) / threshold * t
            }
            _ => self.base_eval(t),
        }
    }

    /// Hedge value at `x`, respecting (A0) symmetry and the regularization.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x.abs();
        match self.regularization {
            Regularization::None => self.base_eval(t),
            Regularization::H0 => self.eval_h0(t),
            Regularization::H1 => {
                if t <= 1.0 {
                    t * t
                } else {
                    self.eval_h0(self.inv_at_one * t)
                }
            }
        }
    }

    /// Inverse of the H0-regularized hedge at `y ≥ 0`.
    fn base_inverse_h0(&self, y: f64) -> f64 {
        match &self.kind {
            HedgeKind::Quadratic => y.sqrt(),
            HedgeKind::Power { exponent } => y.powf(1.0 / exponent),
            HedgeKind::Custom { threshold, .. } => {
                let at_c = self.base_eval(*threshold);
                if y <= at_c {
                    // invert the linear segment (h(c)/c) t = y
                    y * threshold / at_c
                } else {
                    bisect_increasing(|t| self.base_eval(t), y, *threshold)
                }
            }
        }
    }

    /// The unique `t ≥ 0` with `eval(t) = y`, for hedges that are strictly
    /// increasing on `[0, ∞)` after regularization.
    ///
    /// Closed form for quadratic and power hedges; bisection (relative
    /// tolerance 1e-12, bracket growth by doubling) for custom ones.
    pub fn inverse(&self, y: f64) -> Result<f64, HedgeError> {
        if y < 0.0 {
            return Err(HedgeError::NegativeTarget(y));
        }
        Ok(match self.regularization {
            Regularization::None | Regularization::H0 => self.base_inverse_h0(y),
            Regularization::H1 => {
                if y <= 1.0 {
                    y.sqrt()
                } else {
                    self.base_inverse_h0(y) / self.inv_at_one
                }
            }
        })
    }
}

/// Bisection for `f(t) = y` with `f` increasing, starting the bracket at `lo`.
fn bisect_increasing(f: impl Fn(f64) -> f64, y: f64, seed: f64) -> f64 {
    if y == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = seed.max(1e-300);
    while f(hi) < y {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= INVERSE_TOL * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Findings from sampling the axioms on a grid.
#[derive(Debug, Default, Clone)]
pub struct AxiomReport {
    /// Points where `h(x) < 0`.
    pub negative_at: Vec<f64>,
    /// Points where `h(-x) ≠ h(x)`.
    pub asymmetric_at: Vec<f64>,
    /// Adjacent grid pairs where `h(x)/x` decreases.
    pub ratio_increase_violations: Vec<(f64, f64)>,
    /// Adjacent grid pairs where `h(x)/x²` increases.
    pub ratio_decrease_violations: Vec<(f64, f64)>,
}

impl AxiomReport {
    pub fn is_clean(&self) -> bool {
        self.negative_at.is_empty()
            && self.asymmetric_at.is_empty()
            && self.ratio_increase_violations.is_empty()
            && self.ratio_decrease_violations.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.is_clean() {
            return "clean".to_string();
        }
        let mut parts = Vec::new();
        if !self.negative_at.is_empty() {
            parts.push(format!("negative at {} points", self.negative_at.len()));
        }
        if !self.asymmetric_at.is_empty() {
            parts.push(format!("asymmetric at {} points", self.asymmetric_at.len()));
        }
        if let Some((a, b)) = self.ratio_increase_violations.first() {
            parts.push(format!(
                "h(x)/x decreasing on ({a:.3e}, {b:.3e}) and {} more pairs",
                self.ratio_increase_violations.len() - 1
            ));
        }
        if let Some((a, b)) = self.ratio_decrease_violations.first() {
            parts.push(format!(
                "h(x)/x² increasing on ({a:.3e}, {b:.3e}) and {} more pairs",
                self.ratio_decrease_violations.len() - 1
            ));
        }
        parts.join("; ")
    }
}

/// The default validation grid: 10⁴ log-spaced points on `[1e-6, 1e6]`.
pub fn default_axiom_grid() -> Vec<f64> {
    let n = 10_000;
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            10f64.powf(-6.0 + 12.0 * t)
        })
        .collect()
}

/// Samples the hedge axioms on a sorted positive grid and reports every
/// violation.  Monotonicity comparisons carry a relative slack of 1e-12 so
/// exact-constant ratios pass.
pub fn check_axioms(hedge: &Hedge, grid: &[f64]) -> AxiomReport {
    let mut report = AxiomReport::default();
    let slack = 1e-12;
    let mut prev: Option<(f64, f64, f64)> = None; // (x, h/x, h/x²)
    for &x in grid {
        let h = hedge.eval(x);
        if h < 0.0 {
            report.negative_at.push(x);
        }
        if hedge.eval(-x) != h {
            report.asymmetric_at.push(x);
        }
        let r1 = h / x;
        let r2 = h / (x * x);
        if let Some((px, pr1, pr2)) = prev {
            if r1 < pr1 * (1.0 - slack) - slack {
                report.ratio_increase_violations.push((px, x));
            }
            if r2 > pr2 * (1.0 + slack) + slack {
                report.ratio_decrease_violations.push((px, x));
            }
        }
        prev = Some((x, r1, r2));
    }
    report
}

impl fmt::Display for Hedge {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            HedgeKind::Quadratic => write!(out, "quad")?,
            HedgeKind::Power { exponent } => write!(out, "pow:{exponent}")?,
            HedgeKind::Custom { name, .. } => write!(out, "custom:{name}")?,
        }
        match self.regularization {
            Regularization::None => Ok(()),
            Regularization::H0 => write!(out, ":h0"),
            Regularization::H1 => write!(out, ":h1"),
        }
    }
}

impl fmt::Debug for Hedge {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "Hedge({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(Hedge::quadratic().eval(-2.0), 4.0);

        let p = Hedge::power(1.5).unwrap().regularized(Regularization::H1);
        assert_eq!(p.eval(0.5), 0.25); // quadratic region
        assert!((p.eval(4.0) - 8.0).abs() < 1e-12); // (1·4)^1.5
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(Hedge::quadratic().inverse(9.0).unwrap(), 3.0);
        assert_eq!(Hedge::power(2.0).unwrap().inverse(0.0).unwrap(), 0.0);

        // custom |x| with c = 1 under H0: linear slope 1 below 1
        let h = Hedge::custom("abs", |t| t, 1.0).unwrap().regularized(Regularization::H0);
        let y = h.eval(1.0) / 2.0;
        assert!((h.inverse(y).unwrap() - 0.5).abs() < 1e-12);

        assert_eq!(Hedge::quadratic().inverse(-1.0), Err(HedgeError::NegativeTarget(-1.0)));
    }

    #[test]
    fn regularize_examples() {
        // quadratic is a fixed point
        let q = Hedge::quadratic().regularized(Regularization::H1);
        for x in [0.1, 0.7, 3.0, 100.0] {
            assert_eq!(q.eval(x), x * x);
        }

        // splice continuity at 1 for a power hedge
        let p = Hedge::power(1.0).unwrap().regularized(Regularization::H1);
        assert!((p.eval(1.0) - 1.0).abs() < 1e-12);
        assert!((p.eval(1.0 + 1e-9) - (1.0 + 1e-9)).abs() < 1e-8);

        // custom |x| with c = 1 under H0 at 0.5
        let h = Hedge::custom("abs", |t| t, 1.0).unwrap().regularized(Regularization::H0);
        assert_eq!(h.eval(0.5), 0.5);
    }

    #[test]
    fn splice_continuity_within_tolerance() {
        for r in [1.0, 1.3, 1.5, 1.9] {
            let h = Hedge::power(r).unwrap().regularized(Regularization::H1);
            let below = h.eval(1.0 - 1e-13);
            let above = h.eval(1.0 + 1e-13);
            assert!((below - above).abs() < 1e-12, "r={r}");
        }
        let c = Hedge::custom("sqrt-ish", |t| t.powf(1.2), 2.0).unwrap();
        for mode in [Regularization::H0, Regularization::H1] {
            let h = c.regularized(mode);
            let splice = if mode == Regularization::H0 { 2.0 } else { 1.0 };
            assert!((h.eval(splice * (1.0 - 1e-13)) - h.eval(splice * (1.0 + 1e-13))).abs() < 1e-12);
        }
    }

    #[test]
    fn axiom_check_examples() {
        let grid = vec![0.5, 1.0, 2.0, 4.0];
        assert!(check_axioms(&Hedge::quadratic(), &grid).is_clean());

        // sublinear: h/x decreasing
        let bad1 = check_axioms(&Hedge::power(0.5).unwrap(), &[1.0, 2.0]);
        assert_eq!(bad1.ratio_increase_violations.len(), 1);
        assert!(bad1.ratio_decrease_violations.is_empty());

        // superquadratic: h/x² increasing
        let bad2 = check_axioms(&Hedge::power(2.5).unwrap(), &[1.0, 2.0]);
        assert_eq!(bad2.ratio_decrease_violations.len(), 1);
        assert!(bad2.ratio_increase_violations.is_empty());
    }

    #[test]
    fn default_grid_screens_protocol_hedges() {
        let grid = default_axiom_grid();
        assert!(check_axioms(&Hedge::power(1.5).unwrap(), &grid).is_clean());
        assert!(!check_axioms(&Hedge::power(2.5).unwrap(), &grid).is_clean());
        assert!(!check_axioms(&Hedge::power(0.5).unwrap(), &grid).is_clean());
    }

    #[test]
    fn h1_keeps_quadratic_dominance_below_one() {
        // h₁(x) = x² on [0, 1] and h₁(x)/x² ≤ 1 thereafter.
        for r in [1.0, 1.5] {
            let h = Hedge::power(r).unwrap().regularized(Regularization::H1);
            for i in 1..=100 {
                let x = i as f64 / 100.0;
                assert_eq!(h.eval(x), x * x, "r={r}, x={x}");
            }
            for i in 1..=100 {
                let x = 1.0 + i as f64 / 10.0;
                assert!(h.eval(x) / (x * x) <= 1.0 + 1e-12, "r={r}, x={x}");
            }
        }
    }

    #[test]
    fn inverse_roundtrip_custom() {
        let h = Hedge::custom("mixed", |t| t * t / (1.0 + 0.3 * t), 0.5)
            .unwrap()
            .regularized(Regularization::H1);
        for y in [0.0, 0.2, 1.0, 3.7, 250.0] {
            let t = h.inverse(y).unwrap();
            assert!((h.eval(t) - y).abs() <= 1e-10 * y.max(1.0), "y={y} t={t}");
        }
        // and the left direction: inverse ∘ eval is the identity on [0, ∞)
        for t in [0.0, 0.3, 1.0, 2.5, 40.0] {
            let back = h.inverse(h.eval(t)).unwrap();
            assert!((back - t).abs() <= 1e-10 * t.max(1.0), "t={t} back={back}");
        }
    }
}
