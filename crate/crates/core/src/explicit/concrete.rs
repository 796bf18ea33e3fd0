use super::{check_n, AbstractLpTable, ExplicitError, LpValue};
use crate::set::ConstraintSet;

/// Constraints as subsets of a linearly ordered point list.
///
/// `points` is listed in increasing order. `constraints` is a list rather
/// than a set: equal subsets at different positions are distinct
/// constraints, which gives multiset semantics with positional identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteLpProblem {
    points: Vec<String>,
    constraints: Vec<ConstraintSet>,
}

impl ConcreteLpProblem {
    pub fn new(points: Vec<String>, constraints: Vec<ConstraintSet>) -> Result<Self, ExplicitError> {
        for (index, c) in constraints.iter().enumerate() {
            if c.ground_size() != points.len() {
                return Err(ExplicitError::ConstraintSize {
                    index,
                    expected: points.len(),
                    got: c.ground_size(),
                });
            }
        }
        Ok(Self {
            points,
            constraints,
        })
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn constraints(&self) -> &[ConstraintSet] {
        &self.constraints
    }

    /// Minimum point (by position) of the intersection of the constraints
    /// in `g`; the empty family intersects to all points.
    pub fn min_of_intersection(&self, g: u32) -> LpValue {
        let mut meet = ConstraintSet::full(self.points.len());
        for (i, c) in self.constraints.iter().enumerate() {
            if g >> i & 1 == 1 {
                meet = meet.intersection(c);
            }
        }
        meet.iter()
            .next()
            .map_or(LpValue::Infinity, LpValue::Finite)
    }

    /// The abstract table `w(G) = min ⋂ G`, with `+inf` for empty
    /// intersections. Point labels become the value tokens.
    ///
    /// The result satisfies the abstract axioms by construction and is
    /// returned already validated.
    pub fn to_abstract(&self) -> Result<AbstractLpTable, ExplicitError> {
        let n = self.constraints.len();
        check_n(n)?;
        let mut t = AbstractLpTable::from_fn(n, self.points.clone(), |g| {
            self.min_of_intersection(g)
        })?;
        debug_assert!(t.check_abstract_axioms().is_ok());
        t = t.validate().map_err(ExplicitError::Axiom)?;
        Ok(t)
    }
}
