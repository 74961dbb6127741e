//! Random inputs and result lines for the acceptance run.

use critical_ising::oracles::{ArcOrigin, WeightedDigraph};
use critical_ising::Complex64;
use rand::Rng;

/// Digraph on `n` vertices where each ordered pair carries an arc with
/// probability one half, weights uniform in the square [-2, 2]^2.
pub fn random_digraph(rng: &mut impl Rng, n: usize) -> WeightedDigraph<f64> {
    let mut g = WeightedDigraph::new(n);
    for u in 0..n {
        for v in (0..n).filter(|&v| v != u) {
            if rng.gen_bool(0.5) {
                let w = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                g.add_arc(u, v, w, ArcOrigin::Plain);
            }
        }
    }
    g
}

/// Positive couplings, one per edge.
pub fn random_couplings(rng: &mut impl Rng, edges: usize) -> Vec<f64> {
    (0..edges).map(|_| rng.gen_range(0.05..1.5)).collect()
}

/// Outcome of one criterion, printed as a single line.
#[derive(Debug)]
pub struct Outcome {
    pub number: usize,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "criterion {:2}: {verdict}  {}", self.number, self.detail)
    }
}
