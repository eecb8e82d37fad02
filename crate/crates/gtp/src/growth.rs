//! Growth functions `g` used to scale hedge-price sums.
//!
//! The iterated-logarithm family
//!
//! ```text
//! g_i(x) = (∏_{j=0}^{i} ln^j x) · ln^i x,
//! g_0(x) = x²,  g_1(x) = x (ln x)²,  g_2(x) = x ln x (ln ln x)²
//! ```
//!
//! has the convergent tail integral `∫_{x0}^∞ dx / g_i(x) = 1 / ln^i(x0)`,
//! which is what makes these the natural rate scales.
//!
//! Strategies consume `g` only through values at running sums `A_n ≥ 0`, so
//! each iterated-log function carries an input offset (a tower of `e`s) that
//! keeps every logarithm at least 1 there; [`GrowthFunction::eval_shifted`]
//! applies it.  Raw evaluation and the tail integral work on the unshifted
//! formula above its domain floor.

use std::fmt;
use std::sync::Arc;

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum GrowthKind {
    IteratedLog { depth: usize },
    PowerOfArg { exponent: f64 },
    Constant { value: f64 },
    Custom { name: String, eval: EvalFn },
}

/// A positive nondecreasing scale function, immutable after construction.
#[derive(Clone)]
pub struct GrowthFunction {
    kind: GrowthKind,
    /// Domain floor for raw evaluation.
    x_min: f64,
    /// Offset applied by [`eval_shifted`](GrowthFunction::eval_shifted).
    offset: f64,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GrowthError {
    #[error("argument {x} below the domain floor {x_min}")]
    BelowDomainFloor { x: f64, x_min: f64 },
    #[error("growth exponent must be positive and finite, got {0}")]
    BadExponent(f64),
    #[error("constant growth value must be positive, got {0}")]
    BadConstant(f64),
}

/// `e↑↑n`: the tower of `e`s of height `n` (`e↑↑0 = 1`).
pub fn exp_tower(n: usize) -> f64 {
    let mut t = 1.0f64;
    for _ in 0..n {
        t = t.exp();
        if !t.is_finite() {
            return f64::INFINITY;
        }
    }
    t
}

/// `ln^i(x)`: the `i`-fold iterated logarithm, `ln^0(x) = x`.
pub fn iterated_ln(x: f64, depth: usize) -> f64 {
    let mut t = x;
    for _ in 0..depth {
        t = t.ln();
    }
    t
}

impl GrowthFunction {
    /// `g_i` with domain floor and shift offset both `e↑↑i`.
    pub fn iterated_log(depth: usize) -> Self {
        let tower = exp_tower(depth);
        GrowthFunction { kind: GrowthKind::IteratedLog { depth }, x_min: tower, offset: tower }
    }

    /// `g(x) = x^p`.
    pub fn power_of_arg(exponent: f64) -> Result<Self, GrowthError> {
        if exponent <= 0.0 || !exponent.is_finite() {
            return Err(GrowthError::BadExponent(exponent));
        }
        Ok(GrowthFunction {
            kind: GrowthKind::PowerOfArg { exponent },
            x_min: f64::MIN_POSITIVE,
            offset: 0.0,
        })
    }

    /// The identity scale `g(x) = x`.
    pub fn identity() -> Self {
        Self::power_of_arg(1.0).expect("exponent 1 is valid")
    }

    /// A constant scale.
    pub fn constant(value: f64) -> Result<Self, GrowthError> {
        if value <= 0.0 || !value.is_finite() {
            return Err(GrowthError::BadConstant(value));
        }
        Ok(GrowthFunction { kind: GrowthKind::Constant { value }, x_min: 0.0, offset: 0.0 })
    }

    /// A custom scale from a forward evaluator, with an explicit domain floor.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x_min: f64,
    ) -> Self {
        GrowthFunction { kind: GrowthKind::Custom { name: name.into(), eval: Arc::new(eval) }, x_min, offset: 0.0 }
    }

    /// Overrides the shift offset.
    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        match &self.kind {
            GrowthKind::IteratedLog { depth } => {
                let mut product = 1.0;
                let mut t = x;
                for _ in 0..*depth {
                    product *= t;
                    t = t.ln();
                }
                // ∏_{j=0}^{i} ln^j · ln^i = x ln x ⋯ ln^{i-1} x · (ln^i x)²
                product * t * t
            }
            GrowthKind::PowerOfArg { exponent } => x.powf(*exponent),
            GrowthKind::Constant { value } => *value,
            GrowthKind::Custom { eval, .. } => eval(x),
        }
    }

    /// Raw value `g(x)`, for `x` at or above the domain floor.
    pub fn eval(&self, x: f64) -> Result<f64, GrowthError> {
        if x < self.x_min {
            return Err(GrowthError::BelowDomainFloor { x, x_min: self.x_min });
        }
        Ok(self.eval_unchecked(x))
    }

    /// `g(x + offset)` — total on `[0, ∞)` for the iterated-log family, which
    /// is how strategies weight by `1/g(A_n)` without domain faults at small
    /// running sums.
    pub fn eval_shifted(&self, x: f64) -> f64 {
        self.eval_unchecked(x + self.offset)
    }

    /// `∫_{x0}^∞ dx / g(x)`, or `+∞` when the tail diverges.
    ///
    /// Closed form for the iterated-log and power families; numeric quadrature
    /// over doubling panels with divergence detection for custom scales.
    pub fn integral_tail(&self, x0: f64) -> Result<f64, GrowthError> {
        if x0 < self.x_min {
            return Err(GrowthError::BelowDomainFloor { x: x0, x_min: self.x_min });
        }
        Ok(match &self.kind {
            GrowthKind::IteratedLog { depth } => 1.0 / iterated_ln(x0, *depth),
            GrowthKind::PowerOfArg { exponent } => {
                if *exponent > 1.0 {
                    x0.powf(1.0 - exponent) / (exponent - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            GrowthKind::Constant { .. } => f64::INFINITY,
            GrowthKind::Custom { eval, .. } => numeric_tail(eval, x0),
        })
    }
}

/// Simpson quadrature of `1/g` over `[a, b]` with `panels` panels.
fn simpson_inv(eval: &EvalFn, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let f = |x: f64| 1.0 / eval(x);
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

fn numeric_tail(eval: &EvalFn, x0: f64) -> f64 {
    let mut total = 0.0;
    let mut a = x0.max(1e-300);
    // Doubling panels reach 2^200·x0; a tail still contributing beyond that,
    // or a running total past the cap, is reported as divergent.
    for _ in 0..200 {
        let b = a * 2.0;
        let piece = simpson_inv(eval, a, b, 64);
        if !piece.is_finite() || total > 1e12 {
            return f64::INFINITY;
        }
        total += piece;
        if piece < 1e-12 * total.max(1e-12) {
            return total;
        }
        a = b;
    }
    f64::INFINITY
}

/// Grid check that `g` is positive and nondecreasing; returns the offending
/// adjacent pairs.
pub fn check_growth(g: &GrowthFunction, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut bad = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let y = match g.eval(x) {
            Ok(y) => y,
            Err(_) => continue,
        };
        if y <= 0.0 {
            bad.push((x, x));
        }
        if let Some((px, py)) = prev {
            if y < py * (1.0 - 1e-12) {
                bad.push((px, x));
            }
        }
        prev = Some((x, y));
    }
    bad
}

impl fmt::Display for GrowthFunction {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GrowthKind::IteratedLog { depth } => write!(out, "ilog:{depth}"),
            GrowthKind::PowerOfArg { exponent } => write!(out, "pow:{exponent}"),
            GrowthKind::Constant { value } => write!(out, "const:{value}"),
            GrowthKind::Custom { name, .. } => write!(out, "custom:{name}"),
        }
    }
}

impl fmt::Debug for GrowthFunction {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(out, "GrowthFunction({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_values_match_the_closed_forms() {
        let e = std::f64::consts::E;
        let g1 = GrowthFunction::iterated_log(1);
        let x = e * e;
        assert!((g1.eval(x).unwrap() - 4.0 * x).abs() < 1e-9); // x (ln x)² at e²

        let g0 = GrowthFunction::iterated_log(0);
        assert_eq!(g0.eval(3.0).unwrap(), 9.0);

        let g2 = GrowthFunction::iterated_log(2);
        let y = 50.0f64;
        let expect = y * y.ln() * y.ln().ln() * y.ln().ln();
        assert!((g2.eval(y).unwrap() - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn closed_form_product_vs_direct_recursion_on_a_grid() {
        for depth in 0..=3 {
            let g = GrowthFunction::iterated_log(depth);
            for k in 0..50 {
                let x = g.x_min() * (1.0 + 0.5 * k as f64);
                let direct: f64 = (0..=depth).map(|j| iterated_ln(x, j)).product::<f64>() * iterated_ln(x, depth);
                assert!(
                    (g.eval(x).unwrap() - direct).abs() <= 1e-9 * direct.abs().max(1.0),
                    "depth {depth} x {x}"
                );
            }
        }
    }

    #[test]
    fn integral_tail_examples() {
        let e = std::f64::consts::E;
        let g2 = GrowthFunction::iterated_log(2);
        let x0 = e.exp(); // e^e
        assert!((g2.integral_tail(x0).unwrap() - 1.0).abs() < 1e-12);

        let linear = GrowthFunction::identity();
        assert_eq!(linear.integral_tail(1.0).unwrap(), f64::INFINITY);

        // a custom convergent tail: ∫_1^∞ dx/x² = 1
        let quad = GrowthFunction::custom("sq", |x| x * x, 1e-12);
        assert!((quad.integral_tail(1.0).unwrap() - 1.0).abs() < 1e-6);

        // a custom divergent tail is detected
        let lin = GrowthFunction::custom("lin", |x| x, 1e-12);
        assert_eq!(lin.integral_tail(1.0).unwrap(), f64::INFINITY);
    }

    #[test]
    fn domain_floor_is_enforced() {
        let g2 = GrowthFunction::iterated_log(2);
        assert!(matches!(g2.eval(2.0), Err(GrowthError::BelowDomainFloor { .. })));
        assert!(matches!(g2.integral_tail(2.0), Err(GrowthError::BelowDomainFloor { .. })));
    }

    #[test]
    fn shifted_eval_is_total_and_monotone_from_zero() {
        for depth in 0..=2 {
            let g = GrowthFunction::iterated_log(depth);
            let mut prev = 0.0;
            for k in 0..1000 {
                let x = k as f64 * 0.37;
                let y = g.eval_shifted(x);
                assert!(y >= 1.0 - 1e-12, "depth {depth} x {x}: {y}");
                assert!(y >= prev, "depth {depth} not monotone at {x}");
                prev = y;
            }
        }
        // power-of-arg carries no offset: shifted eval is the raw value
        let lin = GrowthFunction::identity();
        assert_eq!(lin.eval_shifted(7.0), 7.0);
    }

    #[test]
    fn growth_grid_check() {
        let g = GrowthFunction::iterated_log(1);
        let grid: Vec<f64> = (0..100).map(|k| g.x_min() + k as f64).collect();
        assert!(check_growth(&g, &grid).is_empty());
    }
}
