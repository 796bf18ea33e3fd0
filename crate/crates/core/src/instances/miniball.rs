use std::sync::atomic::{AtomicU64, Ordering};

use super::{solve_linear, InstanceError, Scalar};
use crate::oracle::{ViolationOracle, ViolatorSpace};
use crate::set::ConstraintSet;

/// Dimension guard for exact smallest-ball computations.
pub const MAX_MINIBALL_DIM: usize = 10;

/// `n` named points in `R^d`, with a counter of circumball solves as the
/// instance-internal cost measure.
#[derive(Debug)]
pub struct PointSet<T> {
    d: usize,
    points: Vec<Vec<T>>,
    names: Vec<String>,
    circumballs: AtomicU64,
}

impl<T: Clone> Clone for PointSet<T> {
    fn clone(&self) -> Self {
        Self {
            d: self.d,
            points: self.points.clone(),
            names: self.names.clone(),
            circumballs: AtomicU64::new(0),
        }
    }
}

impl<T: PartialEq> PartialEq for PointSet<T> {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.points == other.points && self.names == other.names
    }
}

/// A closed ball given by center and squared radius. The empty ball (the
/// ball of no points) has no center and contains nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball<T> {
    pub center: Option<Vec<T>>,
    pub radius_sq: T,
}

fn dist_sq<T: Scalar>(p: &[T], q: &[T]) -> T {
    p.iter().zip(q).fold(T::zero(), |acc, (a, b)| {
        let t = a.clone() - b.clone();
        acc + t.clone() * t
    })
}

impl<T: Scalar> Ball<T> {
    pub fn empty() -> Self {
        Self {
            center: None,
            radius_sq: T::zero(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.center.is_none()
    }

    /// Boundary points are contained.
    pub fn contains(&self, p: &[T]) -> bool {
        match &self.center {
            None => false,
            Some(c) => dist_sq(c, p) <= self.radius_sq,
        }
    }
}

impl<T: Scalar> PointSet<T> {
    /// Names default to `p0, p1, ...`.
    pub fn new(points: Vec<Vec<T>>, names: Option<Vec<String>>) -> Result<Self, InstanceError> {
        let d = points.first().map_or(0, Vec::len);
        for (index, p) in points.iter().enumerate() {
            if p.len() != d {
                return Err(InstanceError::DimensionMismatch {
                    index,
                    expected: d,
                    got: p.len(),
                });
            }
        }
        let names = names.unwrap_or_else(|| (0..points.len()).map(|i| format!("p{i}")).collect());
        assert_eq!(names.len(), points.len(), "one name per point");
        Ok(Self {
            d,
            points,
            names,
            circumballs: AtomicU64::new(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Circumball solves performed so far across all queries.
    pub fn internal_work(&self) -> u64 {
        self.circumballs.load(Ordering::Relaxed)
    }

    /// The smallest closed ball containing the points of `g`.
    pub fn smallest_ball(&self, g: &ConstraintSet) -> Ball<T> {
        let mut order = g.to_vec();
        let end = order.len();
        let mut support = Vec::with_capacity(self.d + 1);
        self.mtf(&mut order, end, &mut support)
    }

    /// Move-to-front recursion: the smallest ball containing the first
    /// `end` points of `order` with every point of `support` on its
    /// boundary. `support` stays affinely independent under exact
    /// arithmetic, so its size never exceeds `d + 1`.
    fn mtf(&self, order: &mut Vec<usize>, end: usize, support: &mut Vec<usize>) -> Ball<T> {
        let mut ball = self.circumball(support);
        if support.len() == self.d + 1 {
            return ball;
        }
        for i in 0..end {
            let p = order[i];
            if !ball.contains(&self.points[p]) {
                support.push(p);
                ball = self.mtf(order, i, support);
                support.pop();
                order.remove(i);
                order.insert(0, p);
            }
        }
        ball
    }

    /// Smallest ball with all of `support` on its boundary: the center lies
    /// in the affine hull, `c = p0 + Σ λ_i (p_i - p0)`, with
    /// `2 (p_i - p0)·(p_j - p0) λ = |p_i - p0|^2`.
    fn circumball(&self, support: &[usize]) -> Ball<T> {
        let Some((&first, rest)) = support.split_first() else {
            return Ball::empty();
        };
        self.circumballs.fetch_add(1, Ordering::Relaxed);
        let p0 = &self.points[first];
        let diffs: Vec<Vec<T>> = rest
            .iter()
            .map(|&i| {
                self.points[i]
                    .iter()
                    .zip(p0)
                    .map(|(a, b)| a.clone() - b.clone())
                    .collect()
            })
            .collect();
        let dot = |u: &[T], v: &[T]| {
            u.iter()
                .zip(v)
                .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        };
        let two = T::one() + T::one();
        let m = diffs
            .iter()
            .map(|u| diffs.iter().map(|v| two.clone() * dot(u, v)).collect())
            .collect();
        let rhs = diffs.iter().map(|u| dot(u, u)).collect();
        let Some(lambda) = solve_linear(m, rhs) else {
            // Only reachable with inexact scalars: cover the support crudely.
            let r2 = support
                .iter()
                .map(|&i| dist_sq(p0, &self.points[i]))
                .fold(T::zero(), |a, b| if b > a { b } else { a });
            return Ball {
                center: Some(p0.clone()),
                radius_sq: r2,
            };
        };
        let mut center = p0.clone();
        for (l, u) in lambda.iter().zip(&diffs) {
            for (c, x) in center.iter_mut().zip(u) {
                *c = c.clone() + l.clone() * x.clone();
            }
        }
        let radius_sq = dist_sq(&center, p0);
        Ball {
            center: Some(center),
            radius_sq,
        }
    }
}

impl<T: Scalar> ViolatorSpace for PointSet<T> {
    fn ground_size(&self) -> usize {
        self.points.len()
    }

    fn dimension_hint(&self) -> usize {
        self.d + 1
    }

    /// Strictly outside the smallest ball of `g`.
    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool {
        !self.smallest_ball(g).contains(&self.points[h])
    }
}

impl<T: Scalar> PointSet<T> {
    /// The smallest-enclosing-ball violator space with `δ = d + 1`.
    pub fn into_oracle(self) -> Result<ViolationOracle<Self>, InstanceError> {
        if self.is_empty() {
            return Err(InstanceError::Empty);
        }
        if self.d > MAX_MINIBALL_DIM {
            return Err(InstanceError::DimensionTooLarge(self.d));
        }
        let delta = self.d + 1;
        Ok(ViolationOracle::with_delta(self, delta).expect("d + 1 >= 1"))
    }
}
