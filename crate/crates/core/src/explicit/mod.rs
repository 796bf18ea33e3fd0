//! Table-backed violator spaces for small ground sets.
//!
//! Subsets are stored as `u32` masks, so the ground set is capped at
//! [`MAX_EXPLICIT_N`] elements. Everything here is exhaustive: axiom checks
//! enumerate all pairs `F ⊆ G`, basis enumeration inspects every subset.

mod abstract_lp;
mod concrete;
pub mod random;
mod structure;

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::oracle::ViolatorSpace;
use crate::set::{submasks, ConstraintSet};

pub use abstract_lp::{AbstractLpTable, LpValue};
pub use concrete::ConcreteLpProblem;
pub use structure::{BasisClass, BasisStructure, ConcreteRepresentation};

pub const MAX_EXPLICIT_N: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExplicitError {
    #[error("explicit tables support at most {MAX_EXPLICIT_N} constraints, got {0}")]
    TooLarge(usize),
    #[error("table must have {expected} entries, got {got}")]
    TableSize { expected: usize, got: usize },
    #[error("entry for subset {subset:#x} references constraints outside the ground set")]
    EntryOutOfRange { subset: u32 },
    #[error("value rank {rank} is outside the supplied order of {len} tokens")]
    RankOutOfRange { rank: usize, len: usize },
    #[error("constraint {index} lives over {got} points, problem has {expected}")]
    ConstraintSize {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("abstract table has not passed axiom validation")]
    Unvalidated,
    #[error("violator space is cyclic; a concrete representation requires acyclicity")]
    Cyclic,
    #[error("axiom check failed: {0}")]
    Axiom(AxiomViolation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    Consistency,
    Locality,
    Monotonicity,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Consistency => "consistency",
            Axiom::Locality => "locality",
            Axiom::Monotonicity => "monotonicity",
        })
    }
}

/// A failed axiom together with the sets that witness it.
///
/// For consistency `f == g` is the offending set. For locality of an
/// abstract table, `h` is the constraint in the premise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub f: ConstraintSet,
    pub g: ConstraintSet,
    pub h: Option<usize>,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails for F={} G={}", self.axiom, self.f, self.g)?;
        if let Some(h) = self.h {
            write!(f, " h={h}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_n(n: usize) -> Result<(), ExplicitError> {
    if n > MAX_EXPLICIT_N {
        Err(ExplicitError::TooLarge(n))
    } else {
        Ok(())
    }
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n == 0 {
        0
    } else {
        u32::MAX >> (32 - n)
    }
}

/// A violator space stored as the full table `G ↦ V(G)`.
#[derive(Debug, Clone)]
pub struct ExplicitViolatorSpace {
    n: usize,
    table: Vec<u32>,
    checked: bool,
    dimension: OnceLock<usize>,
}

impl PartialEq for ExplicitViolatorSpace {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.table == other.table
    }
}

impl Eq for ExplicitViolatorSpace {}

impl ExplicitViolatorSpace {
    /// Wraps a table indexed by subset mask. The table is not checked
    /// against the axioms; see [`verify`](Self::verify).
    pub fn new(n: usize, table: Vec<u32>) -> Result<Self, ExplicitError> {
        check_n(n)?;
        let expected = 1usize << n;
        if table.len() != expected {
            return Err(ExplicitError::TableSize {
                expected,
                got: table.len(),
            });
        }
        let full = full_mask(n);
        if let Some(subset) = (0..expected).find(|&g| table[g] & !full != 0) {
            return Err(ExplicitError::EntryOutOfRange {
                subset: subset as u32,
            });
        }
        Ok(Self {
            n,
            table,
            checked: false,
            dimension: OnceLock::new(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> u32) -> Result<Self, ExplicitError> {
        check_n(n)?;
        let table = (0..1u32 << n).map(|g| f(g) & full_mask(n)).collect();
        Self::new(n, table)
    }

    /// Checks both axioms and marks the space as checked.
    pub fn verify(mut self) -> Result<Self, AxiomViolation> {
        self.check_axioms()?;
        self.checked = true;
        Ok(self)
    }

    pub fn is_checked(&self) -> bool {
        self.checked
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[u32] {
        &self.table
    }

    pub fn full_mask(&self) -> u32 {
        full_mask(self.n)
    }

    pub fn violators_mask(&self, g: u32) -> u32 {
        self.table[g as usize]
    }

    pub fn set(&self, mask: u32) -> ConstraintSet {
        ConstraintSet::from_mask(self.n, mask as u64)
    }

    pub fn violators_of(&self, g: &ConstraintSet) -> ConstraintSet {
        self.set(self.violators_mask(mask_of(g)))
    }

    /// Consistency over every subset, then locality over every pair `F ⊆ G`.
    pub fn check_axioms(&self) -> Result<(), AxiomViolation> {
        for g in 0..=self.full_mask() {
            if g & self.table[g as usize] != 0 {
                let s = self.set(g);
                return Err(AxiomViolation {
                    axiom: Axiom::Consistency,
                    f: s.clone(),
                    g: s,
                    h: None,
                });
            }
        }
        for g in 0..=self.full_mask() {
            let vg = self.table[g as usize];
            for f in submasks(g) {
                let vf = self.table[f as usize];
                if g & vf == 0 && vf != vg {
                    return Err(AxiomViolation {
                        axiom: Axiom::Locality,
                        f: self.set(f),
                        g: self.set(g),
                        h: None,
                    });
                }
            }
        }
        Ok(())
    }

    /// The basis predicate: every proper subset `F ⊂ B` is violated by some
    /// element of `B`.
    pub fn is_basis_mask(&self, b: u32) -> bool {
        submasks(b)
            .skip(1)
            .all(|f| b & self.table[f as usize] != 0)
    }

    /// All inclusion-minimal `B ⊆ G` with `V(B) = V(G)`, in card-lex order.
    ///
    /// Minimality is tested by single-element removal, which is equivalent
    /// to full minimality whenever the axioms hold.
    pub fn all_bases_of_mask(&self, g: u32) -> Vec<u32> {
        let target = self.table[g as usize];
        let mut out: Vec<u32> = submasks(g)
            .filter(|&b| self.table[b as usize] == target)
            .filter(|&b| {
                ConstraintSet::from_mask(self.n, b as u64)
                    .iter()
                    .all(|h| self.table[(b & !(1 << h)) as usize] != target)
            })
            .collect();
        sort_card_lex(&mut out);
        out
    }
}

impl ViolatorSpace for ExplicitViolatorSpace {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn dimension_hint(&self) -> usize {
        *self
            .dimension
            .get_or_init(|| self.combinatorial_dimension())
    }

    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool {
        self.table[mask_of(g) as usize] >> h & 1 == 1
    }

    fn violators(&self, g: &ConstraintSet) -> ConstraintSet {
        self.violators_of(g)
    }
}

pub(crate) fn mask_of(g: &ConstraintSet) -> u32 {
    let m = g.to_mask().expect("explicit spaces hold at most 24 constraints");
    u32::try_from(m).expect("explicit spaces hold at most 24 constraints")
}

/// Order masks by cardinality, then lexicographically on ascending members.
pub(crate) fn cmp_card_lex_mask(a: u32, b: u32) -> std::cmp::Ordering {
    a.count_ones().cmp(&b.count_ones()).then_with(|| {
        // Lexicographic on ascending members: the first differing element
        // decides, and the set containing the smaller element comes first.
        let diff = a ^ b;
        if diff == 0 {
            std::cmp::Ordering::Equal
        } else if a & (diff & diff.wrapping_neg()) != 0 {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    })
}

pub(crate) fn sort_card_lex(v: &mut [u32]) {
    v.sort_by(|&a, &b| cmp_card_lex_mask(a, b));
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn cyclic_fixture_passes_axioms() {
        assert!(cyclic3().check_axioms().is_ok());
        assert!(cyclic3().verify().unwrap().is_checked());
    }

    #[test]
    fn square_fixture_passes_axioms() {
        assert!(square().check_axioms().is_ok());
    }

    #[test]
    fn empty_violators_pass() {
        let s = ExplicitViolatorSpace::from_fn(5, |_| 0).unwrap();
        assert!(s.check_axioms().is_ok());
    }

    #[test]
    fn self_violation_is_a_consistency_witness() {
        let s = ExplicitViolatorSpace::new(2, vec![0, 0b01, 0, 0]).unwrap();
        let w = s.check_axioms().unwrap_err();
        assert_eq!(w.axiom, Axiom::Consistency);
        assert_eq!(w.g.to_vec(), vec![0]);
    }

    #[test]
    fn locality_witness() {
        // V(∅) = ∅ but V({0}) = {1}: G={0} is not violated by V(∅).
        let s = ExplicitViolatorSpace::new(2, vec![0, 0b10, 0, 0]).unwrap();
        let w = s.check_axioms().unwrap_err();
        assert_eq!(w.axiom, Axiom::Locality);
        assert_eq!(w.g.to_vec(), vec![0]);
        assert!(w.f.is_empty());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            ExplicitViolatorSpace::new(2, vec![0; 3]).unwrap_err(),
            ExplicitError::TableSize {
                expected: 4,
                got: 3
            }
        );
        assert_eq!(
            ExplicitViolatorSpace::new(25, vec![]).unwrap_err(),
            ExplicitError::TooLarge(25)
        );
        assert_eq!(
            ExplicitViolatorSpace::new(1, vec![0b10, 0]).unwrap_err(),
            ExplicitError::EntryOutOfRange { subset: 0 }
        );
    }

    #[test]
    fn table_lookup_is_the_oracle() {
        use crate::oracle::ViolationOracle;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let space = random::random_acyclic_space(6, &mut rng);
        let oracle = ViolationOracle::new(space.clone());
        for _ in 0..500 {
            let g: u32 = rng.gen_range(0..64);
            let h = rng.gen_range(0..6);
            if g >> h & 1 == 1 {
                continue;
            }
            let expected = space.violators_mask(g) >> h & 1 == 1;
            let gs = space.set(g);
            for _ in 0..3 {
                assert_eq!(oracle.violates(&gs, h).unwrap(), expected);
            }
        }
    }

    #[test]
    fn cyclic_member_query_rejected() {
        use crate::oracle::{OracleError, ViolationOracle};
        let o = ViolationOracle::new(cyclic3());
        let f = ConstraintSet::from_indices(3, [0]);
        assert!(o.violates(&f, 2).unwrap());
        let all = ConstraintSet::full(3);
        assert_eq!(o.violates(&all, 2), Err(OracleError::MemberQuery { h: 2 }));
    }

    #[test]
    fn card_lex_mask_order() {
        let mut v = vec![0b110, 0b011, 0b101, 0b100, 0];
        sort_card_lex(&mut v);
        assert_eq!(v, vec![0, 0b100, 0b011, 0b101, 0b110]);
    }
}
