//! Hedge functions, their axioms, and the two regularizations.
//!
//! A hedge must be symmetric and nonnegative (A0), superlinear in ratio (A1:
//! `h(x)/x` nondecreasing) and subquadratic in ratio (A2: `h(x)/x²`
//! nonincreasing).  Power hedges `|x|^r` satisfy both exactly for
//! `r ∈ [1, 2]`; the H1 regularization splices an exact quadratic below 1 so
//! the inverse exists everywhere and `h(x) ≤ x²` throughout.
//!
//! ```bash
//! cargo run -p gtp --example hedge_axioms
//! ```

use gtp::hedge::{check_axioms, default_axiom_grid, Regularization};
use gtp::Hedge;

fn main() {
    let grid = default_axiom_grid();
    println!("axiom screen on {} log-spaced points in [1e-6, 1e6]:\n", grid.len());

    let candidates = vec![
        Hedge::quadratic(),
        Hedge::power(1.5).unwrap(),
        Hedge::power(1.0).unwrap(),
        Hedge::power(0.5).unwrap(),
        Hedge::power(2.5).unwrap(),
        Hedge::custom("abs", |t| t, 1.0).unwrap().regularized(Regularization::H0),
        Hedge::power(1.5).unwrap().regularized(Regularization::H1),
    ];
    for hedge in &candidates {
        let report = check_axioms(hedge, &grid);
        println!("  {hedge:<16} {}", report.summary());
    }

    println!("\nH1 splice for pow:1.5 (quadratic below 1, rescaled hedge beyond):");
    let h = Hedge::power(1.5).unwrap().regularized(Regularization::H1);
    for x in [0.25, 0.5, 1.0, 2.0, 4.0] {
        println!("  h({x:4}) = {:8.4}   h⁻¹(h({x})) = {:.6}", h.eval(x), h.inverse(h.eval(x)).unwrap());
    }
}
