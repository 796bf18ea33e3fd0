use super::{
    check_n, full_mask, sort_card_lex, Axiom, AxiomViolation, ExplicitError,
    ExplicitViolatorSpace,
};
use crate::set::{submasks, ConstraintSet};

/// A value of an abstract LP-type table: a rank into the table's token
/// order, or the distinguished maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LpValue {
    Finite(usize),
    Infinity,
}

/// `G ↦ w(G)` for every subset of a small ground set, with values drawn from
/// a linearly ordered list of opaque tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractLpTable {
    n: usize,
    order: Vec<String>,
    values: Vec<LpValue>,
    validated: bool,
}

impl AbstractLpTable {
    /// `order` lists the value tokens from smallest to largest.
    pub fn new(n: usize, order: Vec<String>, values: Vec<LpValue>) -> Result<Self, ExplicitError> {
        check_n(n)?;
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(ExplicitError::TableSize {
                expected,
                got: values.len(),
            });
        }
        for v in &values {
            if let LpValue::Finite(rank) = *v {
                if rank >= order.len() {
                    return Err(ExplicitError::RankOutOfRange {
                        rank,
                        len: order.len(),
                    });
                }
            }
        }
        Ok(Self {
            n,
            order,
            values,
            validated: false,
        })
    }

    pub fn from_fn(
        n: usize,
        order: Vec<String>,
        mut w: impl FnMut(u32) -> LpValue,
    ) -> Result<Self, ExplicitError> {
        check_n(n)?;
        let values = (0..1u32 << n).map(&mut w).collect();
        Self::new(n, order, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn values(&self) -> &[LpValue] {
        &self.values
    }

    pub fn w(&self, g: u32) -> LpValue {
        self.values[g as usize]
    }

    pub fn token(&self, v: LpValue) -> &str {
        match v {
            LpValue::Finite(r) => &self.order[r],
            LpValue::Infinity => "+inf",
        }
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    /// Monotonicity over all `F ⊆ G` and locality over all `(F, G, h)`.
    ///
    /// Monotonicity is checked on pairs `G \ {h} ⊆ G`, which covers all
    /// pairs by transitivity of the order.
    pub fn check_abstract_axioms(&self) -> Result<(), AxiomViolation> {
        let full = full_mask(self.n);
        let set = |m: u32| ConstraintSet::from_mask(self.n, m as u64);
        for g in 0..=full {
            for h in 0..self.n {
                if g >> h & 1 == 1 {
                    let f = g & !(1 << h);
                    if self.w(f) > self.w(g) {
                        return Err(AxiomViolation {
                            axiom: Axiom::Monotonicity,
                            f: set(f),
                            g: set(g),
                            h: None,
                        });
                    }
                }
            }
        }
        for g in 0..=full {
            let wg = self.w(g);
            let increasing: Vec<usize> = (0..self.n)
                .filter(|&h| g >> h & 1 == 0 && wg < self.w(g | 1 << h))
                .collect();
            if increasing.is_empty() {
                continue;
            }
            for f in submasks(g) {
                if self.w(f) != wg {
                    continue;
                }
                for &h in &increasing {
                    if self.w(f) >= self.w(f | 1 << h) {
                        return Err(AxiomViolation {
                            axiom: Axiom::Locality,
                            f: set(f),
                            g: set(g),
                            h: Some(h),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn validate(mut self) -> Result<Self, AxiomViolation> {
        self.check_abstract_axioms()?;
        self.validated = true;
        Ok(self)
    }

    /// The violator mapping `V(G) = {h : w(G ∪ {h}) > w(G)}`.
    pub fn violator_map(&self) -> Result<ExplicitViolatorSpace, ExplicitError> {
        if !self.validated {
            return Err(ExplicitError::Unvalidated);
        }
        ExplicitViolatorSpace::from_fn(self.n, |g| {
            let wg = self.w(g);
            (0..self.n)
                .filter(|&h| self.w(g | 1 << h) > wg)
                .fold(0, |m, h| m | 1 << h)
        })
    }

    /// All inclusion-minimal `B ⊆ G` with `w(B) = w(G)`, in card-lex order.
    pub fn all_bases_of_mask(&self, g: u32) -> Vec<u32> {
        let target = self.w(g);
        let mut out: Vec<u32> = submasks(g)
            .filter(|&b| self.w(b) == target)
            .filter(|&b| {
                (0..self.n)
                    .filter(|&h| b >> h & 1 == 1)
                    .all(|h| self.w(b & !(1 << h)) != target)
            })
            .collect();
        sort_card_lex(&mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{letters, square};
    use super::*;

    fn tokens(k: usize) -> Vec<String> {
        (0..k).map(|i| i.to_string()).collect()
    }

    fn cardinality_table(n: usize) -> AbstractLpTable {
        AbstractLpTable::from_fn(n, tokens(n + 1), |g| LpValue::Finite(g.count_ones() as usize))
            .unwrap()
    }

    #[test]
    fn cardinality_is_lp_type() {
        assert!(cardinality_table(4).check_abstract_axioms().is_ok());
    }

    #[test]
    fn cardinality_violators_are_complements() {
        let v = cardinality_table(3).validate().unwrap().violator_map().unwrap();
        for g in 0..8u32 {
            assert_eq!(v.violators_mask(g), !g & 0b111);
        }
    }

    #[test]
    fn constant_is_lp_type_with_empty_violators() {
        let t = AbstractLpTable::from_fn(3, tokens(1), |_| LpValue::Finite(0)).unwrap();
        let v = t.validate().unwrap().violator_map().unwrap();
        assert!(v.table().iter().all(|&m| m == 0));
    }

    #[test]
    fn decreasing_value_is_a_monotonicity_witness() {
        let t = AbstractLpTable::new(
            1,
            tokens(2),
            vec![LpValue::Finite(1), LpValue::Finite(0)],
        )
        .unwrap();
        let w = t.check_abstract_axioms().unwrap_err();
        assert_eq!(w.axiom, Axiom::Monotonicity);
        assert!(w.f.is_empty());
        assert_eq!(w.g.to_vec(), vec![0]);
    }

    #[test]
    fn locality_witness() {
        // F=∅ ⊆ G={0}, h=1: w(F)=w(G) and w(G∪h) > w(G), yet w(F∪h) = w(F).
        let t = AbstractLpTable::new(
            2,
            tokens(2),
            vec![
                LpValue::Finite(0),
                LpValue::Finite(0),
                LpValue::Finite(0),
                LpValue::Finite(1),
            ],
        )
        .unwrap();
        let w = t.check_abstract_axioms().unwrap_err();
        assert_eq!(w.axiom, Axiom::Locality);
        assert_eq!(w.h, Some(1));
    }

    #[test]
    fn unvalidated_table_rejected() {
        assert_eq!(
            cardinality_table(2).violator_map().unwrap_err(),
            ExplicitError::Unvalidated
        );
    }

    #[test]
    fn square_radii_give_the_square_table() {
        // -inf < 0 < side/2 < diagonal/2
        let order = ["-inf", "0", "1/2", "sqrt2/2"].map(String::from).to_vec();
        let t = AbstractLpTable::from_fn(4, order, |g| {
            let r = match g.count_ones() {
                0 => 0,
                1 => 1,
                2 if g == letters("ac") || g == letters("bd") => 3,
                2 => 2,
                _ => 3,
            };
            LpValue::Finite(r)
        })
        .unwrap()
        .validate()
        .unwrap();
        let v = t.violator_map().unwrap();
        assert_eq!(v, square());
        assert_eq!(v.violators_mask(letters("ab")), letters("cd"));
    }

    #[test]
    fn equal_value_and_union_implies_equal_violators() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let p = super::super::random::random_concrete(6, 8, &mut rng);
            let t = p.to_abstract().unwrap();
            let v = t.clone().validate().unwrap().violator_map().unwrap();
            for a in 0..64u32 {
                for b in 0..64u32 {
                    if t.w(a) == t.w(b) && t.w(a) == t.w(a | b) {
                        assert_eq!(v.violators_mask(a), v.violators_mask(b));
                    }
                }
            }
        }
    }
}
