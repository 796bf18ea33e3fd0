//! Basis computation through the violation primitive: the exhaustive
//! search over small sets, Clarkson's two randomized reductions, and a
//! Monte-Carlo check of the expected-violators bound for random samples.
//!
//! All randomness comes from a [`SolverRng`] (ChaCha8 seeded from a `u64`),
//! so a run is fully determined by its oracle and seed.

use itertools::Itertools;
use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::oracle::{OracleError, SolveStats, ViolationOracle, ViolatorSpace};
use crate::set::ConstraintSet;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no basis of size <= {delta} among {size} constraints; the dimension bound is too small or the oracle is not a violator space")]
    NoBasisFound { size: usize, delta: usize },
    #[error("{routine} exceeded its iteration guard of {limit} rounds")]
    IterationGuardExceeded { routine: &'static str, limit: u64 },
    #[error("working set augmented {augmentations} times, more than the dimension bound {delta}")]
    AugmentationBoundExceeded { augmentations: u64, delta: usize },
    #[error("{rounds} reweighting rounds reached the bound {bound:.3}")]
    ReweightingBoundExceeded { rounds: u64, bound: f64 },
    #[error("constraint multiplicity overflowed 128 bits")]
    WeightOverflow,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Seeded deterministic generator used by every randomized routine.
#[derive(Debug, Clone)]
pub struct SolverRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SolverRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent generator whose seed is drawn from this one.
    pub fn fork(&mut self) -> SolverRng {
        SolverRng::new(self.inner.next_u64())
    }
}

impl RngCore for SolverRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// Multiplicities `μ(h) >= 1` over a set of constraints.
#[derive(Debug, Clone)]
pub struct WeightedGroundSet {
    members: Vec<usize>,
    weights: Vec<u128>,
    total: u128,
}

impl WeightedGroundSet {
    /// Every member of `g` with multiplicity 1.
    pub fn uniform(g: &ConstraintSet) -> Self {
        let members = g.to_vec();
        let weights = vec![1; members.len()];
        let total = members.len() as u128;
        Self {
            members,
            weights,
            total,
        }
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn weight(&self, h: usize) -> Option<u128> {
        self.position(h).map(|i| self.weights[i])
    }

    fn position(&self, h: usize) -> Option<usize> {
        self.members.binary_search(&h).ok()
    }

    /// `μ(F)` summed over the members of `f` that belong to this set.
    pub fn weight_of(&self, f: &ConstraintSet) -> u128 {
        f.iter().filter_map(|h| self.weight(h)).sum()
    }

    pub fn double(&mut self, h: usize) -> Result<(), SolveError> {
        let i = self
            .position(h)
            .ok_or_else(|| SolveError::InvalidArgument(format!("{h} is not weighted")))?;
        let w = self.weights[i];
        let doubled = w.checked_mul(2).ok_or(SolveError::WeightOverflow)?;
        self.total = self.total.checked_add(w).ok_or(SolveError::WeightOverflow)?;
        self.weights[i] = doubled;
        Ok(())
    }

    /// Draws `r` of the `μ(G)` copies uniformly without replacement and
    /// returns the set of distinct constraints among them.
    pub fn sample_support<R: Rng + ?Sized>(&self, n: usize, r: usize, rng: &mut R) -> ConstraintSet {
        let mut out = ConstraintSet::empty(n);
        if r as u128 >= self.total {
            for &h in &self.members {
                out.insert(h);
            }
            return out;
        }
        let mut remaining = self.weights.clone();
        let mut left = self.total;
        for _ in 0..r {
            let mut pick = rng.gen_range(0..left);
            let mut slot = 0;
            while pick >= remaining[slot] {
                pick -= remaining[slot];
                slot += 1;
            }
            remaining[slot] -= 1;
            left -= 1;
            out.insert(self.members[slot]);
        }
        out
    }
}

/// The hard cap on successful Basis2 rounds for a set of `size` constraints.
pub fn reweighting_bound(delta: usize, size: usize) -> f64 {
    3.0 * delta as f64 * (size as f64).ln()
}

fn iteration_guard(delta: usize, size: usize) -> u64 {
    let log2 = (size.max(1) as f64).log2();
    (100.0 * delta as f64 * (1.0 + log2)).ceil() as u64
}

fn isqrt(x: u128) -> u128 {
    if x < 2 {
        return x;
    }
    let mut r = (x as f64).sqrt() as u128;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

struct Run<'a, S> {
    oracle: &'a ViolationOracle<S>,
    stats: SolveStats,
}

impl<'a, S: ViolatorSpace> Run<'a, S> {
    fn new(oracle: &'a ViolationOracle<S>, seed: u64) -> Self {
        Self {
            oracle,
            stats: SolveStats {
                rng_seed: seed,
                ..SolveStats::default()
            },
        }
    }

    fn finish(mut self, start_calls: u64) -> SolveStats {
        self.stats.primitive_calls = self.oracle.primitive_calls() - start_calls;
        self.stats
    }

    fn trivial(&mut self, g: &ConstraintSet) -> Result<ConstraintSet, SolveError> {
        self.stats.trivial_calls += 1;
        let delta = self.oracle.delta();
        let members = g.to_vec();
        let n = self.oracle.n();
        for k in 0..=delta.min(members.len()) {
            'candidates: for combo in members.iter().copied().combinations(k) {
                let b = ConstraintSet::from_indices(n, combo.iter().copied());
                for &h in &combo {
                    if !self.oracle.violates(&b.without(h), h)? {
                        continue 'candidates;
                    }
                }
                for h in g.difference(&b).iter() {
                    if self.oracle.violates(&b, h)? {
                        continue 'candidates;
                    }
                }
                return Ok(b);
            }
        }
        Err(SolveError::NoBasisFound {
            size: members.len(),
            delta,
        })
    }

    fn basis2(&mut self, g: &ConstraintSet, rng: &mut SolverRng) -> Result<ConstraintSet, SolveError> {
        self.stats.basis2_calls += 1;
        let delta = self.oracle.delta();
        let size = g.len();
        let r = 6 * delta * delta;
        if size <= r {
            return self.trivial(g);
        }
        let mut mu = WeightedGroundSet::uniform(g);
        let guard = iteration_guard(delta, size);
        let bound = reweighting_bound(delta, size);
        let mut rounds = 0u64;
        let mut reweightings = 0u64;
        loop {
            rounds += 1;
            self.stats.loop_iterations += 1;
            if rounds > guard {
                return Err(SolveError::IterationGuardExceeded {
                    routine: "basis2",
                    limit: guard,
                });
            }
            let sample = mu.sample_support(self.oracle.n(), r, rng);
            let c = self.trivial(&sample)?;
            let viol = self.oracle.violators_in(&c, g)?;
            if viol.is_empty() {
                return Ok(c);
            }
            // μ(V) <= μ(G) / 3δ, compared without division.
            let mu_v = mu.weight_of(&viol);
            let lhs = mu_v
                .checked_mul(3 * delta as u128)
                .ok_or(SolveError::WeightOverflow)?;
            if lhs <= mu.total() {
                for h in viol.iter() {
                    mu.double(h)?;
                }
                reweightings += 1;
                self.stats.max_reweightings = self.stats.max_reweightings.max(reweightings);
                if reweightings as f64 >= bound {
                    return Err(SolveError::ReweightingBoundExceeded {
                        rounds: reweightings,
                        bound,
                    });
                }
            }
        }
    }

    fn basis1(&mut self, g: &ConstraintSet, rng: &mut SolverRng) -> Result<ConstraintSet, SolveError> {
        let delta = self.oracle.delta();
        let size = g.len();
        if size <= 9 * delta * delta {
            return self.basis2(g, rng);
        }
        let r = isqrt((delta * delta) as u128 * size as u128) as usize;
        let members = g.to_vec();
        let n = self.oracle.n();
        let mut w = ConstraintSet::empty(n);
        let guard = iteration_guard(delta, size);
        let mut rounds = 0u64;
        let mut augmentations = 0u64;
        loop {
            rounds += 1;
            self.stats.loop_iterations += 1;
            if rounds > guard {
                return Err(SolveError::IterationGuardExceeded {
                    routine: "basis1",
                    limit: guard,
                });
            }
            let sample = ConstraintSet::from_indices(
                n,
                index::sample(rng, members.len(), r).into_iter().map(|i| members[i]),
            );
            let c = self.basis2(&w.union(&sample), rng)?;
            let viol = self.oracle.violators_in(&c, g)?;
            if viol.is_empty() {
                return Ok(c);
            }
            // |V| <= 2 sqrt(|G|)  <=>  |V|^2 <= 4 |G|
            let k = viol.len() as u128;
            if k * k <= 4 * size as u128 {
                w.union_with(&viol);
                augmentations += 1;
                self.stats.max_augmentations = self.stats.max_augmentations.max(augmentations);
                if augmentations > delta as u64 {
                    return Err(SolveError::AugmentationBoundExceeded {
                        augmentations,
                        delta,
                    });
                }
            }
        }
    }
}

fn check_ground<S: ViolatorSpace>(
    oracle: &ViolationOracle<S>,
    g: &ConstraintSet,
) -> Result<(), SolveError> {
    if g.ground_size() != oracle.n() {
        return Err(OracleError::GroundMismatch {
            expected: oracle.n(),
            got: g.ground_size(),
        }
        .into());
    }
    Ok(())
}

/// First set of size at most `delta`, in card-lex order, that passes both
/// basis conditions relative to `g`.
pub fn trivial_basis<S: ViolatorSpace>(
    oracle: &ViolationOracle<S>,
    g: &ConstraintSet,
) -> Result<ConstraintSet, SolveError> {
    check_ground(oracle, g)?;
    Run::new(oracle, 0).trivial(g)
}

/// Clarkson's first algorithm: grow a working set from violators of
/// sampled subproblems, solving each with [`basis2`].
pub fn basis1<S: ViolatorSpace>(
    oracle: &ViolationOracle<S>,
    g: &ConstraintSet,
    rng: &mut SolverRng,
) -> Result<(ConstraintSet, SolveStats), SolveError> {
    check_ground(oracle, g)?;
    let start = oracle.primitive_calls();
    let mut run = Run::new(oracle, rng.seed());
    let b = run.basis1(g, rng)?;
    Ok((b, run.finish(start)))
}

/// Clarkson's second algorithm: sample from a multiset, doubling the
/// multiplicity of violators whenever they carry little weight.
pub fn basis2<S: ViolatorSpace>(
    oracle: &ViolationOracle<S>,
    g: &ConstraintSet,
    rng: &mut SolverRng,
) -> Result<(ConstraintSet, SolveStats), SolveError> {
    check_ground(oracle, g)?;
    let start = oracle.primitive_calls();
    let mut run = Run::new(oracle, rng.seed());
    let b = run.basis2(g, rng)?;
    Ok((b, run.finish(start)))
}

/// A basis of the whole ground set via [`basis1`].
pub fn solve<S: ViolatorSpace>(
    oracle: &ViolationOracle<S>,
    rng: &mut SolverRng,
) -> Result<(ConstraintSet, SolveStats), SolveError> {
    basis1(oracle, &oracle.ground_set(), rng)
}

/// Trivial search on the full ground set, reporting stats like the
/// randomized solvers do.
pub fn solve_trivial<S: ViolatorSpace>(
    oracle: &ViolationOracle<S>,
    seed: u64,
) -> Result<(ConstraintSet, SolveStats), SolveError> {
    let start = oracle.primitive_calls();
    let mut run = Run::new(oracle, seed);
    let b = run.trivial(&oracle.ground_set())?;
    Ok((b, run.finish(start)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingReport {
    pub r: usize,
    pub trials: usize,
    pub mean: f64,
    pub stddev: f64,
    pub bound: f64,
    /// `3 * stddev / sqrt(trials)`.
    pub slack: f64,
    pub pass: bool,
}

/// Samples uniform `r`-subsets `R` and counts violators of `W ∪ R` outside
/// it, comparing the empirical mean with `delta * (n - r) / (r + 1)`.
/// Uses uncounted queries.
pub fn sampling_check<S: ViolatorSpace>(
    oracle: &ViolationOracle<S>,
    w: &ConstraintSet,
    r: usize,
    trials: usize,
    rng: &mut SolverRng,
) -> Result<SamplingReport, SolveError> {
    check_ground(oracle, w)?;
    let n = oracle.n();
    if r >= n {
        return Err(SolveError::InvalidArgument(format!(
            "sample size {r} must be below n = {n}"
        )));
    }
    if trials == 0 {
        return Err(SolveError::InvalidArgument("trials must be at least 1".into()));
    }
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        let sample = ConstraintSet::from_indices(n, index::sample(rng, n, r));
        let base = w.union(&sample);
        let v = oracle.violators_uncounted(&base)?.difference(&base);
        counts.push(v.len() as f64);
    }
    let mean = counts.iter().sum::<f64>() / trials as f64;
    let stddev = if trials > 1 {
        (counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    let bound = oracle.delta() as f64 * (n - r) as f64 / (r + 1) as f64;
    let slack = 3.0 * stddev / (trials as f64).sqrt();
    Ok(SamplingReport {
        r,
        trials,
        mean,
        stddev,
        bound,
        slack,
        pass: mean <= bound + slack,
    })
}
