use super::{InstanceError, Scalar};
use crate::oracle::{ViolationOracle, ViolatorSpace};
use crate::set::ConstraintSet;

/// Fixed constraints intersected with every subproblem. They are not
/// members of the ground set.
#[derive(Debug, Clone, PartialEq)]
pub enum ImplicitRegion<T> {
    /// `x >= 0, y >= 0`.
    Orthant,
    /// `xmin <= x <= xmax, ymin <= y <= ymax`.
    Box { xmin: T, xmax: T, ymin: T, ymax: T },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

/// Halfplanes `a x + b y <= c` with objective: minimize `y`, then `x`.
///
/// The implicit region is pointed and bounded below, so every feasible
/// subproblem has a unique lexicographic optimum at a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfplaneLp<T> {
    halfplanes: Vec<[T; 3]>,
    names: Vec<String>,
    implicit: ImplicitRegion<T>,
}

impl<T: Scalar> HalfplaneLp<T> {
    /// Names default to `h0, h1, ...`.
    pub fn new(
        halfplanes: Vec<[T; 3]>,
        names: Option<Vec<String>>,
        implicit: ImplicitRegion<T>,
    ) -> Result<Self, InstanceError> {
        if let Some(i) = halfplanes
            .iter()
            .position(|[a, b, _]| a.is_zero() && b.is_zero())
        {
            return Err(InstanceError::DegenerateHalfplane(i));
        }
        if let ImplicitRegion::Box {
            xmin,
            xmax,
            ymin,
            ymax,
        } = &implicit
        {
            if xmin > xmax || ymin > ymax {
                return Err(InstanceError::EmptyBox);
            }
        }
        let names =
            names.unwrap_or_else(|| (0..halfplanes.len()).map(|i| format!("h{i}")).collect());
        assert_eq!(names.len(), halfplanes.len(), "one name per halfplane");
        Ok(Self {
            halfplanes,
            names,
            implicit,
        })
    }

    pub fn len(&self) -> usize {
        self.halfplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfplanes.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn halfplanes(&self) -> &[[T; 3]] {
        &self.halfplanes
    }

    pub fn implicit(&self) -> &ImplicitRegion<T> {
        &self.implicit
    }

    fn implicit_rows(&self) -> Vec<[T; 3]> {
        let (z, one) = (T::zero(), T::one());
        let neg = |v: &T| T::zero() - v.clone();
        match &self.implicit {
            ImplicitRegion::Orthant => vec![
                [neg(&one), z.clone(), z.clone()],
                [z.clone(), neg(&one), z],
            ],
            ImplicitRegion::Box {
                xmin,
                xmax,
                ymin,
                ymax,
            } => vec![
                [neg(&one), z.clone(), neg(xmin)],
                [one.clone(), z.clone(), xmax.clone()],
                [z.clone(), neg(&one), neg(ymin)],
                [z, one, ymax.clone()],
            ],
        }
    }

    fn satisfies(row: &[T; 3], p: &Point2<T>) -> bool {
        row[0].clone() * p.x.clone() + row[1].clone() * p.y.clone() <= row[2]
    }

    /// The lexicographic minimum `(y, x)` over the implicit region and the
    /// halfplanes of `g`, found among pairwise boundary intersections.
    /// `None` if the region is empty.
    pub fn optimum(&self, g: &ConstraintSet) -> Option<Point2<T>> {
        let mut rows = self.implicit_rows();
        rows.extend(g.iter().map(|h| self.halfplanes[h].clone()));
        let mut best: Option<Point2<T>> = None;
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let [a1, b1, c1] = &rows[i];
                let [a2, b2, c2] = &rows[j];
                let det = a1.clone() * b2.clone() - a2.clone() * b1.clone();
                if det.is_zero() {
                    continue;
                }
                let p = Point2 {
                    x: (c1.clone() * b2.clone() - c2.clone() * b1.clone()) / det.clone(),
                    y: (a1.clone() * c2.clone() - a2.clone() * c1.clone()) / det,
                };
                let better = best
                    .as_ref()
                    .is_none_or(|q| p.y < q.y || (p.y == q.y && p.x < q.x));
                if better && rows.iter().all(|r| Self::satisfies(r, &p)) {
                    best = Some(p);
                }
            }
        }
        best
    }

    /// The violator space with `δ = 2`. Fails if the implicit region meets
    /// the intersection of all halfplanes in the empty set, which keeps
    /// every subproblem feasible.
    pub fn into_oracle(self) -> Result<ViolationOracle<Self>, InstanceError> {
        if self.optimum(&ConstraintSet::full(self.len())).is_none() {
            return Err(InstanceError::Infeasible);
        }
        Ok(ViolationOracle::with_delta(self, 2).expect("2 >= 1"))
    }
}

impl<T: Scalar> ViolatorSpace for HalfplaneLp<T> {
    fn ground_size(&self) -> usize {
        self.halfplanes.len()
    }

    fn dimension_hint(&self) -> usize {
        2
    }

    /// The optimum of `g` lies strictly outside halfplane `h`.
    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool {
        let opt = self
            .optimum(g)
            .expect("subproblems of a feasible instance are feasible");
        !Self::satisfies(&self.halfplanes[h], &opt)
    }
}
