//! Bases, basis-equivalence classes, the locally-smaller relation and the
//! concrete representation of acyclic spaces.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use itertools::Itertools;

use super::{
    mask_of, sort_card_lex, ConcreteLpProblem, ExplicitError, ExplicitViolatorSpace,
};
use crate::set::ConstraintSet;

/// Bases sharing one violator set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisClass {
    /// Members in card-lex order; the first is the representative.
    pub bases: Vec<ConstraintSet>,
    pub violators: ConstraintSet,
}

impl BasisClass {
    pub fn representative(&self) -> &ConstraintSet {
        &self.bases[0]
    }

    /// `{a,c}` for a single basis, `[a,c]` when the class has several.
    pub fn label<S: AsRef<str>>(&self, names: &[S]) -> String {
        let inner = self.representative().display_with(names, ",").to_string();
        if self.bases.len() > 1 {
            format!("[{inner}]")
        } else {
            format!("{{{inner}}}")
        }
    }
}

#[derive(Debug, Clone)]
pub struct BasisStructure {
    /// Every basis, in card-lex order.
    pub bases: Vec<ConstraintSet>,
    /// Classes ordered by representative.
    pub classes: Vec<BasisClass>,
    /// For each basis, the index of its class.
    pub class_of: Vec<usize>,
    /// Row `i` holds every `j` with class `i` locally smaller than class `j`.
    pub leq0: Vec<ConstraintSet>,
    /// Transitive closure of `leq0`.
    pub leq1: Vec<ConstraintSet>,
    pub acyclic: bool,
    /// A directed cycle of distinct classes under `leq0`, first class
    /// repeated at the end. Present iff the space is cyclic.
    pub cycle: Option<Vec<usize>>,
    /// Present iff the space is acyclic.
    pub linear_extension: Option<Vec<usize>>,
}

impl BasisStructure {
    pub fn leq0(&self, i: usize, j: usize) -> bool {
        self.leq0[i].contains(j)
    }

    pub fn leq1(&self, i: usize, j: usize) -> bool {
        self.leq1[i].contains(j)
    }

    /// Index of the class whose members include `b`.
    pub fn class_containing(&self, b: &ConstraintSet) -> Option<usize> {
        self.bases
            .iter()
            .position(|x| x == b)
            .map(|i| self.class_of[i])
    }
}

/// An acyclic space rewritten as a concrete LP-type problem over its
/// basis-equivalence classes.
#[derive(Debug, Clone)]
pub struct ConcreteRepresentation {
    pub structure: BasisStructure,
    /// Class index for each point, in point order.
    pub point_classes: Vec<usize>,
    pub problem: ConcreteLpProblem,
}

impl ExplicitViolatorSpace {
    /// Every subset satisfying the basis predicate, in card-lex order.
    pub fn enumerate_bases(&self) -> Vec<ConstraintSet> {
        let mut masks: Vec<u32> = (0..=self.full_mask())
            .filter(|&b| self.is_basis_mask(b))
            .collect();
        sort_card_lex(&mut masks);
        masks.into_iter().map(|m| self.set(m)).collect()
    }

    /// The smallest, then lexicographically first, `B ⊆ G` with `V(B) = V(G)`.
    pub fn basis_of(&self, g: &ConstraintSet) -> ConstraintSet {
        let gm = mask_of(g);
        let target = self.violators_mask(gm);
        let members = g.to_vec();
        for k in 0..=members.len() {
            for combo in members.iter().combinations(k) {
                let b = combo.iter().fold(0u32, |m, &&h| m | 1 << h);
                if self.violators_mask(b) == target {
                    return self.set(b);
                }
            }
        }
        unreachable!("G itself has V(G) = V(G)")
    }

    /// Size of a largest basis.
    pub fn combinatorial_dimension(&self) -> usize {
        (0..=self.full_mask())
            .filter(|&b| self.is_basis_mask(b))
            .map(|b| b.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn structure(&self) -> BasisStructure {
        let bases = self.enumerate_bases();
        let mut classes: Vec<BasisClass> = Vec::new();
        let mut by_violators: HashMap<u32, usize> = HashMap::new();
        let mut class_of = Vec::with_capacity(bases.len());
        for b in &bases {
            let v = self.violators_mask(mask_of(b));
            let idx = *by_violators.entry(v).or_insert_with(|| {
                classes.push(BasisClass {
                    bases: Vec::new(),
                    violators: self.set(v),
                });
                classes.len() - 1
            });
            classes[idx].bases.push(b.clone());
            class_of.push(idx);
        }

        let k = classes.len();
        let leq0: Vec<ConstraintSet> = classes
            .iter()
            .map(|ci| {
                ConstraintSet::from_indices(
                    k,
                    (0..k).filter(|&j| {
                        ci.bases
                            .iter()
                            .any(|b| b.is_disjoint(&classes[j].violators))
                    }),
                )
            })
            .collect();

        let mut leq1 = leq0.clone();
        for m in 0..k {
            let row_m = leq1[m].clone();
            for row in leq1.iter_mut() {
                if row.contains(m) {
                    row.union_with(&row_m);
                }
            }
        }

        let acyclic = (0..k).all(|i| leq1[i].iter().all(|j| j == i || !leq1[j].contains(i)));
        let cycle = if acyclic { None } else { find_cycle(&leq0) };
        let linear_extension = if acyclic {
            Some(kahn_least_first(&leq0))
        } else {
            None
        };

        BasisStructure {
            bases,
            classes,
            class_of,
            leq0,
            leq1,
            acyclic,
            cycle,
            linear_extension,
        }
    }

    /// Concrete representation with numeric labels for constraints.
    pub fn to_concrete(&self) -> Result<ConcreteRepresentation, ExplicitError> {
        let names: Vec<String> = (0..self.n()).map(|i| i.to_string()).collect();
        self.to_concrete_named(&names)
    }

    /// Points are the basis-equivalence classes in linear-extension order;
    /// constraint `h` is the set of classes whose violators exclude `h`.
    pub fn to_concrete_named<S: AsRef<str>>(
        &self,
        names: &[S],
    ) -> Result<ConcreteRepresentation, ExplicitError> {
        let structure = self.structure();
        let order = structure
            .linear_extension
            .clone()
            .ok_or(ExplicitError::Cyclic)?;
        let labels: Vec<String> = order
            .iter()
            .map(|&c| structure.classes[c].label(names))
            .collect();
        let m = order.len();
        let constraints = (0..self.n())
            .map(|h| {
                ConstraintSet::from_indices(
                    m,
                    (0..m).filter(|&p| !structure.classes[order[p]].violators.contains(h)),
                )
            })
            .collect();
        let problem = ConcreteLpProblem::new(labels, constraints)?;
        Ok(ConcreteRepresentation {
            structure,
            point_classes: order,
            problem,
        })
    }
}

/// Depth-first search for a directed cycle, ignoring self-loops. The cycle
/// is rotated to start at its smallest class.
fn find_cycle(adj: &[ConstraintSet]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let k = adj.len();
    let mut mark = vec![Mark::New; k];
    for root in 0..k {
        if mark[root] != Mark::New {
            continue;
        }
        // Explicit stack of (node, iterator position) to keep deep graphs off
        // the call stack.
        let mut path: Vec<usize> = vec![root];
        let mut cursor: Vec<usize> = vec![0];
        mark[root] = Mark::Active;
        while let Some(&node) = path.last() {
            let succ: Vec<usize> = adj[node].iter().filter(|&j| j != node).collect();
            let pos = cursor.last_mut().unwrap();
            if *pos < succ.len() {
                let next = succ[*pos];
                *pos += 1;
                match mark[next] {
                    Mark::Active => {
                        let start = path.iter().position(|&x| x == next).unwrap();
                        let mut cyc: Vec<usize> = path[start..].to_vec();
                        let min_at = cyc
                            .iter()
                            .position_min()
                            .expect("cycle is nonempty");
                        cyc.rotate_left(min_at);
                        cyc.push(cyc[0]);
                        return Some(cyc);
                    }
                    Mark::New => {
                        mark[next] = Mark::Active;
                        path.push(next);
                        cursor.push(0);
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                path.pop();
                cursor.pop();
            }
        }
    }
    None
}

/// Topological order of a DAG (self-loops ignored), always taking the
/// smallest available index.
fn kahn_least_first(adj: &[ConstraintSet]) -> Vec<usize> {
    let k = adj.len();
    let mut indegree = vec![0usize; k];
    for (i, row) in adj.iter().enumerate() {
        for j in row.iter().filter(|&j| j != i) {
            indegree[j] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..k)
        .filter(|&i| indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut out = Vec::with_capacity(k);
    while let Some(Reverse(i)) = ready.pop() {
        out.push(i);
        for j in adj[i].iter().filter(|&j| j != i) {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    debug_assert_eq!(out.len(), k, "linear extension requested for a cyclic relation");
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{cyclic3, letters, square};
    use super::super::random::random_acyclic_space;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn masks(v: &[ConstraintSet]) -> Vec<u32> {
        v.iter().map(mask_of).collect()
    }

    fn names4() -> Vec<&'static str> {
        vec!["a", "b", "c", "d"]
    }

    #[test]
    fn cyclic_bases_and_cycle() {
        let s = cyclic3();
        assert_eq!(masks(&s.enumerate_bases()), vec![0, 1, 2, 4, 7]);
        let st = s.structure();
        assert!(!st.acyclic);
        assert!(st.linear_extension.is_none());
        // classes: ∅, f, g, h, fgh
        assert_eq!(st.cycle, Some(vec![1, 3, 2, 1]));
        assert_eq!(s.combinatorial_dimension(), 3);
    }

    #[test]
    fn square_bases_and_classes() {
        let s = square();
        let expected: Vec<u32> = ["", "a", "b", "c", "d", "ab", "ac", "ad", "bc", "bd", "cd"]
            .iter()
            .map(|x| letters(x))
            .collect();
        assert_eq!(masks(&s.enumerate_bases()), expected);
        let st = s.structure();
        assert!(st.acyclic);
        let merged: Vec<&BasisClass> = st.classes.iter().filter(|c| c.bases.len() > 1).collect();
        assert_eq!(merged.len(), 1);
        assert_eq!(masks(&merged[0].bases), vec![letters("ac"), letters("bd")]);
        assert_eq!(s.combinatorial_dimension(), 2);
    }

    #[test]
    fn square_basis_of_full_set() {
        let s = square();
        assert_eq!(mask_of(&s.basis_of(&ConstraintSet::full(4))), letters("ac"));
        assert!(s.basis_of(&ConstraintSet::empty(4)).is_empty());
    }

    #[test]
    fn square_concretization_matches_table() {
        let rep = square().to_concrete_named(&names4()).unwrap();
        let p = &rep.problem;
        let s_of = |h: usize| -> Vec<String> {
            let mut v: Vec<String> = p.constraints()[h].iter().map(|i| p.points()[i].clone()).collect();
            v.sort();
            v
        };
        let want = |xs: &[&str]| -> Vec<String> {
            let mut v: Vec<String> = xs.iter().map(|s| s.to_string()).collect();
            v.sort();
            v
        };
        assert_eq!(s_of(0), want(&["{a}", "{a,b}", "{a,d}", "[a,c]"]));
        assert_eq!(s_of(1), want(&["{b}", "{a,b}", "{b,c}", "[a,c]"]));
        assert_eq!(s_of(2), want(&["{c}", "{b,c}", "{c,d}", "[a,c]"]));
        assert_eq!(s_of(3), want(&["{d}", "{c,d}", "{a,d}", "[a,c]"]));
    }

    #[test]
    fn two_constraint_multiset_example() {
        let s = ExplicitViolatorSpace::from_fn(2, |_| 0).unwrap();
        assert_eq!(masks(&s.enumerate_bases()), vec![0]);
        let rep = s.to_concrete().unwrap();
        assert_eq!(rep.problem.points().len(), 1);
        assert_eq!(rep.problem.constraints().len(), 2);
        assert_eq!(rep.problem.constraints()[0], rep.problem.constraints()[1]);
        assert_eq!(rep.problem.constraints()[0].to_vec(), vec![0]);
        assert_eq!(s.combinatorial_dimension(), 0);
    }

    #[test]
    fn cyclic_concretization_rejected() {
        assert_eq!(cyclic3().to_concrete().unwrap_err(), ExplicitError::Cyclic);
    }

    #[test]
    fn basis_of_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = 1 + (rand::Rng::gen_range(&mut rng, 0..8));
            let s = random_acyclic_space(n, &mut rng);
            for g in 0..=s.full_mask() {
                let target = s.violators_mask(g);
                // independent oracle: filter all submasks, pick min by (card, sorted members)
                let best = (0..=g)
                    .filter(|&b| b & !g == 0 && s.violators_mask(b) == target)
                    .min_by_key(|&b| {
                        let members: Vec<usize> = (0..n).filter(|&i| b >> i & 1 == 1).collect();
                        (members.len(), members)
                    })
                    .unwrap();
                let got = s.basis_of(&s.set(g));
                assert_eq!(mask_of(&got), best);
                assert!(s.is_basis_mask(best));
            }
        }
    }

    #[test]
    fn structural_invariants_on_random_spaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = 1 + rand::Rng::gen_range(&mut rng, 0..7);
            let s = random_acyclic_space(n, &mut rng);
            let st = s.structure();
            assert!(st.acyclic);
            let ext = st.linear_extension.as_ref().unwrap();
            let pos: Vec<usize> = {
                let mut p = vec![0; ext.len()];
                for (i, &c) in ext.iter().enumerate() {
                    p[c] = i;
                }
                p
            };
            for i in 0..st.classes.len() {
                for j in st.leq1[i].iter() {
                    assert!(pos[i] <= pos[j], "extension must respect leq1");
                    // leq1 is transitively closed
                    assert!(st.leq1[j].is_subset(&st.leq1[i]));
                }
                assert!(st.leq0[i].is_subset(&st.leq1[i]));
            }
            // If [B] ≤0 [C] for distinct classes, no member of [C] is locally
            // smaller than a member of [B].
            for (bi, b) in st.bases.iter().enumerate() {
                for (ci, c) in st.bases.iter().enumerate() {
                    let (cb, cc) = (st.class_of[bi], st.class_of[ci]);
                    if cb != cc && st.leq0(cb, cc) {
                        assert!(!c.is_disjoint(&st.classes[cb].violators), "{b:?} {c:?}");
                    }
                }
            }
            let dim = s.combinatorial_dimension();
            assert!(st.bases.iter().all(|b| b.len() <= dim));
        }
    }

    #[test]
    fn round_trip_preserves_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let n = 1 + rand::Rng::gen_range(&mut rng, 0..6);
            let s = random_acyclic_space(n, &mut rng);
            let rep = s.to_concrete().unwrap();
            let t = rep.problem.to_abstract().unwrap();
            let back = t.violator_map().unwrap();
            for g in 0..=s.full_mask() {
                assert_eq!(s.all_bases_of_mask(g), t.all_bases_of_mask(g));
                assert_eq!(s.all_bases_of_mask(g), back.all_bases_of_mask(g));
            }
        }
    }
}
