//! The violation-test contract shared by every instance family and solver.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::set::ConstraintSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("constraint {h} is already a member of the queried set")]
    MemberQuery { h: usize },
    #[error("constraint {h} is outside the ground set of size {n}")]
    OutOfRange { h: usize, n: usize },
    #[error("queried set lives in a ground set of size {got}, oracle expects {expected}")]
    GroundMismatch { expected: usize, got: usize },
    #[error("combinatorial dimension bound must be at least 1")]
    ZeroDelta,
}

/// A violator space given implicitly through its violation test.
///
/// Implementations answer `h ∈ V(G)` for `h ∉ G`. They carry no call
/// accounting; wrap them in a [`ViolationOracle`] for that.
pub trait ViolatorSpace {
    fn ground_size(&self) -> usize;

    /// An upper bound on the combinatorial dimension.
    fn dimension_hint(&self) -> usize;

    /// Decides `h ∈ V(G)`. Callers guarantee `h ∉ G` and `h < n`.
    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool;

    /// `V(G)` by scanning every `h ∉ G`.
    fn violators(&self, g: &ConstraintSet) -> ConstraintSet {
        let n = self.ground_size();
        let mut v = ConstraintSet::empty(n);
        for h in 0..n {
            if !g.contains(h) && self.is_violated_by(g, h) {
                v.insert(h);
            }
        }
        v
    }
}

impl<T: ViolatorSpace + ?Sized> ViolatorSpace for &T {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn dimension_hint(&self) -> usize {
        (**self).dimension_hint()
    }
    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool {
        (**self).is_violated_by(g, h)
    }
    fn violators(&self, g: &ConstraintSet) -> ConstraintSet {
        (**self).violators(g)
    }
}

impl<T: ViolatorSpace + ?Sized> ViolatorSpace for Box<T> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn dimension_hint(&self) -> usize {
        (**self).dimension_hint()
    }
    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool {
        (**self).is_violated_by(g, h)
    }
    fn violators(&self, g: &ConstraintSet) -> ConstraintSet {
        (**self).violators(g)
    }
}

impl<T: ViolatorSpace + ?Sized> ViolatorSpace for Arc<T> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn dimension_hint(&self) -> usize {
        (**self).dimension_hint()
    }
    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool {
        (**self).is_violated_by(g, h)
    }
    fn violators(&self, g: &ConstraintSet) -> ConstraintSet {
        (**self).violators(g)
    }
}

/// A violator space together with a dimension bound `delta` and a counter
/// of primitive violation tests.
///
/// The counter is atomic so one oracle can be shared read-only across
/// threads running independent trials.
#[derive(Debug)]
pub struct ViolationOracle<S> {
    space: S,
    delta: usize,
    calls: AtomicU64,
}

impl<S: ViolatorSpace> ViolationOracle<S> {
    /// Uses the space's own dimension hint, raised to at least 1.
    pub fn new(space: S) -> Self {
        let delta = space.dimension_hint().max(1);
        Self {
            space,
            delta,
            calls: AtomicU64::new(0),
        }
    }

    pub fn with_delta(space: S, delta: usize) -> Result<Self, OracleError> {
        if delta == 0 {
            return Err(OracleError::ZeroDelta);
        }
        Ok(Self {
            space,
            delta,
            calls: AtomicU64::new(0),
        })
    }

    pub fn n(&self) -> usize {
        self.space.ground_size()
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn space(&self) -> &S {
        &self.space
    }

    pub fn into_space(self) -> S {
        self.space
    }

    pub fn primitive_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    pub fn ground_set(&self) -> ConstraintSet {
        ConstraintSet::full(self.n())
    }

    fn check_query(&self, g: &ConstraintSet, h: usize) -> Result<(), OracleError> {
        let n = self.n();
        if g.ground_size() != n {
            return Err(OracleError::GroundMismatch {
                expected: n,
                got: g.ground_size(),
            });
        }
        if h >= n {
            return Err(OracleError::OutOfRange { h, n });
        }
        if g.contains(h) {
            return Err(OracleError::MemberQuery { h });
        }
        Ok(())
    }

    /// The primitive: decides `h ∈ V(G)` and counts one call.
    ///
    /// Rejected queries (`h ∈ G`, out-of-range `h`) are not counted.
    pub fn violates(&self, g: &ConstraintSet, h: usize) -> Result<bool, OracleError> {
        self.check_query(g, h)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(self.space.is_violated_by(g, h))
    }

    /// Same answer as [`violates`](Self::violates) without touching the counter.
    pub fn violates_uncounted(&self, g: &ConstraintSet, h: usize) -> Result<bool, OracleError> {
        self.check_query(g, h)?;
        Ok(self.space.is_violated_by(g, h))
    }

    /// `{h ∈ scope \ G : h ∈ V(G)}`, one counted call per tested element.
    pub fn violators_in(
        &self,
        g: &ConstraintSet,
        scope: &ConstraintSet,
    ) -> Result<ConstraintSet, OracleError> {
        let mut out = ConstraintSet::empty(self.n());
        for h in scope.difference(g).iter() {
            if self.violates(g, h)? {
                out.insert(h);
            }
        }
        Ok(out)
    }

    /// Full `V(G)`, uncounted.
    pub fn violators_uncounted(&self, g: &ConstraintSet) -> Result<ConstraintSet, OracleError> {
        if g.ground_size() != self.n() {
            return Err(OracleError::GroundMismatch {
                expected: self.n(),
                got: g.ground_size(),
            });
        }
        Ok(self.space.violators(g))
    }
}

/// Counters reported by a solver run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    /// Violation tests issued during the run.
    pub primitive_calls: u64,
    pub basis2_calls: u64,
    pub trivial_calls: u64,
    /// REPEAT-loop iterations summed over all Basis1 and Basis2 invocations.
    pub loop_iterations: u64,
    /// Largest number of working-set augmentations in one Basis1 run.
    pub max_augmentations: u64,
    /// Largest number of successful reweighting rounds in one Basis2 run.
    pub max_reweightings: u64,
    pub rng_seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug)]
    struct Everything(usize);

    impl ViolatorSpace for Everything {
        fn ground_size(&self) -> usize {
            self.0
        }
        fn dimension_hint(&self) -> usize {
            0
        }
        fn is_violated_by(&self, _g: &ConstraintSet, _h: usize) -> bool {
            true
        }
    }

    #[test]
    fn counter_is_linear_and_rejections_are_free() {
        let o = ViolationOracle::new(Everything(4));
        assert_eq!(o.delta(), 1);
        let g = ConstraintSet::from_indices(4, [0]);
        for _ in 0..7 {
            assert!(o.violates(&g, 2).unwrap());
        }
        assert_eq!(o.primitive_calls(), 7);
        assert_eq!(o.violates(&g, 0), Err(OracleError::MemberQuery { h: 0 }));
        assert_eq!(o.violates(&g, 9), Err(OracleError::OutOfRange { h: 9, n: 4 }));
        let wrong = ConstraintSet::empty(5);
        assert!(matches!(
            o.violates(&wrong, 1),
            Err(OracleError::GroundMismatch { .. })
        ));
        assert_eq!(o.primitive_calls(), 7);
        o.violates_uncounted(&g, 1).unwrap();
        assert_eq!(o.primitive_calls(), 7);
    }

    #[test]
    fn zero_delta_rejected() {
        assert_eq!(
            ViolationOracle::with_delta(Everything(2), 0).unwrap_err(),
            OracleError::ZeroDelta
        );
    }
}
