//! Random small instances for exhaustive testing.
//!
//! Every acyclic violator space arises from some concrete LP-type problem,
//! so sampling random concrete problems reaches all of them.

use rand::Rng;

use super::{ConcreteLpProblem, ExplicitViolatorSpace};
use crate::set::ConstraintSet;

/// `n` constraints, each a random subset of `points` ordered points with a
/// per-problem inclusion density.
pub fn random_concrete<R: Rng + ?Sized>(n: usize, points: usize, rng: &mut R) -> ConcreteLpProblem {
    let density: f64 = rng.gen_range(0.3..0.9);
    let labels = (0..points).map(|i| format!("x{i}")).collect();
    let constraints = (0..n)
        .map(|_| {
            ConstraintSet::from_indices(points, (0..points).filter(|_| rng.gen_bool(density)))
        })
        .collect();
    ConcreteLpProblem::new(labels, constraints).expect("sizes agree by construction")
}

/// The violator space of a random concrete LP-type problem over `n`
/// constraints. Always acyclic and always satisfies the axioms.
pub fn random_acyclic_space<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ExplicitViolatorSpace {
    let points = rng.gen_range(1..=2 * n + 2);
    random_concrete(n, points, rng)
        .to_abstract()
        .and_then(|t| t.violator_map())
        .expect("concrete problems yield valid abstract tables")
}
