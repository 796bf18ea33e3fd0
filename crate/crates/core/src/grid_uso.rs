//! Unique sink orientations of grids and the violator spaces they induce.
//!
//! The ground set is partitioned into blocks; a vertex picks one element per
//! block, and two vertices are adjacent when they differ in one block. An
//! orientation is stored as outmaps `s(J) ⊆ H \ J`: `j ∈ s(J)` means the
//! edge from `J` to `J ▷ j` (swap in `j` for `J`'s element of `j`'s block)
//! leaves `J`.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::oracle::{ViolationOracle, ViolatorSpace};
use crate::set::ConstraintSet;

/// Largest ground set [`GridUso::validate`] and [`random_uso`] accept.
pub const VALIDATE_MAX_N: usize = 16;
pub const RANDOM_USO_MAX_N: usize = 12;
/// Largest vertex count stored densely.
pub const DENSE_MAX_VERTICES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UsoError {
    #[error("blocks do not partition 0..{n}: element {element} is {problem}")]
    NotPartition {
        n: usize,
        element: usize,
        problem: &'static str,
    },
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("{n} elements exceed the limit of {limit} for this operation")]
    TooLarge { n: usize, limit: usize },
    #[error("expected {expected} outmaps, got {got}")]
    OutmapCount { expected: usize, got: usize },
    #[error("outmap of vertex {vertex:?} contains its own element {j}")]
    OutmapContainsVertex { vertex: Vec<usize>, j: usize },
    #[error("edge between {vertex:?} and its swap with {j} is oriented both or neither way")]
    EdgeInconsistent { vertex: Vec<usize>, j: usize },
    #[error("ranking of block {0} is not a permutation of the block")]
    BadRanking(usize),
    #[error("no unique sink orientation found in {0} attempts")]
    GenerationExhausted(u64),
    #[error("orientation has not been validated")]
    NotValidated,
}

/// Blocks `Π_1..Π_δ` partitioning `{0..n-1}`, with element names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
    pos_in_block: Vec<usize>,
    names: Vec<String>,
}

impl GridPartition {
    /// Blocks are sorted internally. Names default to the element index.
    pub fn new(n: usize, mut blocks: Vec<Vec<usize>>, names: Option<Vec<String>>) -> Result<Self, UsoError> {
        let mut block_of = vec![usize::MAX; n];
        let mut pos_in_block = vec![0; n];
        for (i, b) in blocks.iter_mut().enumerate() {
            if b.is_empty() {
                return Err(UsoError::EmptyBlock(i));
            }
            b.sort_unstable();
            for (p, &h) in b.iter().enumerate() {
                if h >= n {
                    return Err(UsoError::NotPartition { n, element: h, problem: "out of range" });
                }
                if block_of[h] != usize::MAX {
                    return Err(UsoError::NotPartition { n, element: h, problem: "in two blocks" });
                }
                block_of[h] = i;
                pos_in_block[h] = p;
            }
        }
        if let Some(h) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(UsoError::NotPartition { n, element: h, problem: "in no block" });
        }
        let names = names.unwrap_or_else(|| (0..n).map(|h| h.to_string()).collect());
        assert_eq!(names.len(), n, "one name per element");
        Ok(Self {
            blocks,
            block_of,
            pos_in_block,
            names,
        })
    }

    /// Consecutive blocks of the given sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self, UsoError> {
        let mut next = 0;
        let blocks = sizes
            .iter()
            .map(|&s| {
                let b = (next..next + s).collect();
                next += s;
                b
            })
            .collect();
        Self::new(next, blocks, None)
    }

    /// Same blocks, new element names.
    pub fn renamed(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.n(), "one name per element");
        self.names = names;
        self
    }

    /// `a0 a1 .. b0 b1 ..`: a letter per block and the position inside it.
    /// Falls back to element indices beyond 26 blocks.
    pub fn block_letter_names(&self) -> Vec<String> {
        (0..self.n())
            .map(|h| {
                let b = self.block_of[h];
                if b < 26 {
                    format!("{}{}", (b'a' + b as u8) as char, self.pos_in_block[h])
                } else {
                    h.to_string()
                }
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn delta(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, h: usize) -> usize {
        self.block_of[h]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_count(&self) -> Option<usize> {
        self.blocks.iter().try_fold(1usize, |acc, b| acc.checked_mul(b.len()))
    }

    /// Meets every block.
    pub fn is_valid(&self, g: &ConstraintSet) -> bool {
        self.blocks_hit(g).iter().all(|&hit| hit)
    }

    fn blocks_hit(&self, g: &ConstraintSet) -> Vec<bool> {
        let mut hit = vec![false; self.delta()];
        for h in g.iter() {
            hit[self.block_of[h]] = true;
        }
        hit
    }

    /// `Ḡ`: the union of the blocks disjoint from `g`.
    pub fn bar(&self, g: &ConstraintSet) -> ConstraintSet {
        let hit = self.blocks_hit(g);
        let mut out = ConstraintSet::empty(self.n());
        for (b, _) in self.blocks.iter().zip(&hit).filter(|(_, &h)| !h) {
            for &h in b {
                out.insert(h);
            }
        }
        out
    }

    /// The vertex equal to `g`, one element per block in block order.
    pub fn as_vertex(&self, g: &ConstraintSet) -> Option<Vec<usize>> {
        if g.len() != self.delta() {
            return None;
        }
        let mut v = vec![usize::MAX; self.delta()];
        for h in g.iter() {
            let b = self.block_of[h];
            if v[b] != usize::MAX {
                return None;
            }
            v[b] = h;
        }
        Some(v)
    }

    pub fn vertex_set(&self, v: &[usize]) -> ConstraintSet {
        ConstraintSet::from_indices(self.n(), v.iter().copied())
    }

    /// `J ▷ j`.
    pub fn swap(&self, v: &[usize], j: usize) -> Vec<usize> {
        let mut w = v.to_vec();
        w[self.block_of[j]] = j;
        w
    }

    /// Mixed-radix index of a vertex over in-block positions.
    pub fn vertex_index(&self, v: &[usize]) -> usize {
        v.iter()
            .zip(&self.blocks)
            .fold(0, |acc, (&h, b)| acc * b.len() + self.pos_in_block[h])
    }

    pub fn vertex_at(&self, mut index: usize) -> Vec<usize> {
        let mut v = vec![0; self.delta()];
        for (slot, b) in v.iter_mut().zip(&self.blocks).rev() {
            *slot = b[index % b.len()];
            index /= b.len();
        }
        v
    }

    /// Every vertex contained in `g`, in lexicographic order of positions.
    pub fn vertices_in(&self, g: &ConstraintSet) -> Vec<Vec<usize>> {
        let choices: Vec<Vec<usize>> = self
            .blocks
            .iter()
            .map(|b| b.iter().copied().filter(|&h| g.contains(h)).collect())
            .collect();
        if choices.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut idx = vec![0; choices.len()];
        loop {
            out.push(idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect());
            let mut k = choices.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Orientation {
    /// One outmap per vertex, by [`GridPartition::vertex_index`].
    Dense(Vec<ConstraintSet>),
    /// `rank[h]` orders each block; edges point toward lower rank.
    CoordinateOrder(Vec<usize>),
}

/// A grid orientation with a counter of edge evaluations.
#[derive(Debug)]
pub struct GridUso {
    partition: GridPartition,
    orientation: Orientation,
    validated: bool,
    edge_evals: AtomicU64,
}

impl Clone for GridUso {
    fn clone(&self) -> Self {
        Self {
            partition: self.partition.clone(),
            orientation: self.orientation.clone(),
            validated: self.validated,
            edge_evals: AtomicU64::new(0),
        }
    }
}

impl PartialEq for GridUso {
    fn eq(&self, other: &Self) -> bool {
        self.partition == other.partition && self.outmaps() == other.outmaps()
    }
}

/// A Π-valid subgrid whose sink count is not one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsoWitness {
    pub subgrid: ConstraintSet,
    pub sinks: Vec<Vec<usize>>,
}

impl GridUso {
    /// Dense orientation from one outmap per vertex (in
    /// [`GridPartition::vertex_index`] order). Checks edge consistency but
    /// not the unique-sink property.
    pub fn from_outmaps(partition: GridPartition, outmaps: Vec<ConstraintSet>) -> Result<Self, UsoError> {
        let expected = partition
            .vertex_count()
            .filter(|&c| c <= DENSE_MAX_VERTICES)
            .ok_or(UsoError::TooLarge { n: partition.n(), limit: DENSE_MAX_VERTICES })?;
        if outmaps.len() != expected {
            return Err(UsoError::OutmapCount { expected, got: outmaps.len() });
        }
        let u = Self {
            partition,
            orientation: Orientation::Dense(outmaps),
            validated: false,
            edge_evals: AtomicU64::new(0),
        };
        u.check_edge_consistency()?;
        Ok(u)
    }

    pub fn partition(&self) -> &GridPartition {
        &self.partition
    }

    pub fn renamed(mut self, names: Vec<String>) -> Self {
        self.partition = self.partition.renamed(names);
        self
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn delta(&self) -> usize {
        self.partition.delta()
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn edge_evals(&self) -> u64 {
        self.edge_evals.load(Ordering::Relaxed)
    }

    pub fn reset_edge_evals(&self) {
        self.edge_evals.store(0, Ordering::Relaxed);
    }

    /// `j ∈ s(J)`, uncounted.
    pub fn outmap_contains(&self, v: &[usize], j: usize) -> bool {
        let b = self.partition.block_of(j);
        if v[b] == j {
            return false;
        }
        match &self.orientation {
            Orientation::Dense(out) => out[self.partition.vertex_index(v)].contains(j),
            Orientation::CoordinateOrder(rank) => rank[j] < rank[v[b]],
        }
    }

    /// `j ∈ s(J)`, counted as one edge evaluation.
    pub fn evaluate_edge(&self, v: &[usize], j: usize) -> bool {
        self.edge_evals.fetch_add(1, Ordering::Relaxed);
        self.outmap_contains(v, j)
    }

    /// `s(J)`, uncounted.
    pub fn outmap(&self, v: &[usize]) -> ConstraintSet {
        match &self.orientation {
            Orientation::Dense(out) => out[self.partition.vertex_index(v)].clone(),
            Orientation::CoordinateOrder(_) => {
                ConstraintSet::from_indices(self.n(), (0..self.n()).filter(|&j| self.outmap_contains(v, j)))
            }
        }
    }

    /// All outmaps in vertex-index order. Only for small grids.
    pub fn outmaps(&self) -> Vec<ConstraintSet> {
        let count = self.partition.vertex_count().expect("small grid");
        (0..count).map(|i| self.outmap(&self.partition.vertex_at(i))).collect()
    }

    /// Outmaps avoid their own vertex, and every edge is oriented exactly
    /// one way.
    pub fn check_edge_consistency(&self) -> Result<(), UsoError> {
        let Orientation::Dense(out) = &self.orientation else {
            return Ok(());
        };
        let p = &self.partition;
        for (i, s) in out.iter().enumerate() {
            let v = p.vertex_at(i);
            if s.ground_size() != p.n() {
                return Err(UsoError::OutmapCount { expected: p.n(), got: s.ground_size() });
            }
            if let Some(&j) = v.iter().find(|&&j| s.contains(j)) {
                return Err(UsoError::OutmapContainsVertex { vertex: v, j });
            }
            for j in 0..p.n() {
                let old = v[p.block_of(j)];
                if old == j {
                    continue;
                }
                let w = p.swap(&v, j);
                if s.contains(j) == out[p.vertex_index(&w)].contains(old) {
                    return Err(UsoError::EdgeInconsistent { vertex: v, j });
                }
            }
        }
        Ok(())
    }

    /// Vertices `J ⊆ g` with `s(J) ∩ g = ∅`, uncounted.
    pub fn sinks_in(&self, g: &ConstraintSet) -> Vec<Vec<usize>> {
        self.partition
            .vertices_in(g)
            .into_iter()
            .filter(|v| g.iter().all(|j| !self.outmap_contains(v, j)))
            .collect()
    }

    /// The sink of the subgrid spanned by a Π-valid `g`, uncounted.
    pub fn sink(&self, g: &ConstraintSet) -> Option<Vec<usize>> {
        if let Orientation::CoordinateOrder(rank) = &self.orientation {
            let mut best: Vec<Option<usize>> = vec![None; self.delta()];
            for h in g.iter() {
                let slot = &mut best[self.partition.block_of(h)];
                if slot.is_none_or(|b| rank[h] < rank[b]) {
                    *slot = Some(h);
                }
            }
            return best.into_iter().collect();
        }
        self.sinks_in(g).into_iter().next()
    }

    /// Checks that every Π-valid subgrid has exactly one sink. Subgrids are
    /// scanned in increasing mask order; the first failure is returned.
    pub fn find_sink_violation(&self) -> Result<Option<UsoWitness>, UsoError> {
        let n = self.n();
        if n > VALIDATE_MAX_N {
            return Err(UsoError::TooLarge { n, limit: VALIDATE_MAX_N });
        }
        for mask in 0..1u64 << n {
            let g = ConstraintSet::from_mask(n, mask);
            if !self.partition.is_valid(&g) {
                continue;
            }
            let sinks = self.sinks_in(&g);
            if sinks.len() != 1 {
                return Ok(Some(UsoWitness { subgrid: g, sinks }));
            }
        }
        Ok(None)
    }

    /// Marks the orientation validated if it is a unique sink orientation.
    pub fn validate(mut self) -> Result<Result<Self, UsoWitness>, UsoError> {
        Ok(match self.find_sink_violation()? {
            None => {
                self.validated = true;
                Ok(self)
            }
            Some(w) => Err(w),
        })
    }

    /// `V(G)`: the outmap of the sink if `g` is Π-valid, else `Ḡ`. Uncounted.
    pub fn uso_violators(&self, g: &ConstraintSet) -> ConstraintSet {
        if !self.partition.is_valid(g) {
            return self.partition.bar(g);
        }
        let sink = self.sink(g).expect("validated orientations have sinks");
        self.outmap(&sink)
    }

    /// A directed cycle in the vertex digraph (arcs `J → J ▷ j` for
    /// `j ∈ s(J)`), listed with its first vertex repeated at the end.
    pub fn find_cycle(&self) -> Option<Vec<Vec<usize>>> {
        let p = &self.partition;
        let count = p.vertex_count().filter(|&c| c <= DENSE_MAX_VERTICES)?;
        let succ = |i: usize| -> Vec<usize> {
            let v = p.vertex_at(i);
            (0..p.n())
                .filter(|&j| self.outmap_contains(&v, j))
                .map(|j| p.vertex_index(&p.swap(&v, j)))
                .collect()
        };
        // 0 unvisited, 1 on stack, 2 done.
        let mut state = vec![0u8; count];
        for root in 0..count {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, succ(root), 0usize)];
            state[root] = 1;
            while let Some((node, next, pos)) = stack.last_mut() {
                if *pos == next.len() {
                    state[*node] = 2;
                    stack.pop();
                    continue;
                }
                let w = next[*pos];
                *pos += 1;
                match state[w] {
                    0 => {
                        state[w] = 1;
                        let s = succ(w);
                        stack.push((w, s, 0));
                    }
                    1 => {
                        let start = stack.iter().position(|(x, _, _)| *x == w).expect("on stack");
                        let mut cycle: Vec<Vec<usize>> =
                            stack[start..].iter().map(|(x, _, _)| p.vertex_at(*x)).collect();
                        cycle.push(p.vertex_at(w));
                        return Some(cycle);
                    }
                    _ => {}
                }
            }
        }
        None
    }

    /// The violator space with `δ` equal to the block count. Requires a
    /// validated orientation.
    pub fn into_oracle(self) -> Result<ViolationOracle<Self>, UsoError> {
        if !self.validated {
            return Err(UsoError::NotValidated);
        }
        let delta = self.delta();
        Ok(ViolationOracle::with_delta(self, delta).expect("partitions have a block"))
    }
}

impl ViolatorSpace for GridUso {
    fn ground_size(&self) -> usize {
        self.n()
    }

    fn dimension_hint(&self) -> usize {
        self.delta()
    }

    /// Non-Π-valid `g`: `h ∈ Ḡ`, free. Vertex `g`: one edge evaluation.
    /// Other Π-valid `g`: the sink is found by scanning vertices of the
    /// subgrid, one evaluation per outmap coordinate inspected, then one
    /// more for `h`.
    fn is_violated_by(&self, g: &ConstraintSet, h: usize) -> bool {
        let p = &self.partition;
        if !p.is_valid(g) {
            let b = p.block_of(h);
            return !g.iter().any(|x| p.block_of(x) == b);
        }
        if let Some(v) = p.as_vertex(g) {
            return self.evaluate_edge(&v, h);
        }
        let sink = p
            .vertices_in(g)
            .into_iter()
            .find(|v| g.iter().all(|j| !self.evaluate_edge(v, j)))
            .expect("validated orientations have sinks");
        self.evaluate_edge(&sink, h)
    }

    fn violators(&self, g: &ConstraintSet) -> ConstraintSet {
        self.uso_violators(g)
    }
}

/// Edges toward lower rank in every block; `rankings[i]` lists block `i`
/// from lowest to highest. The sink of every subgrid is its blockwise
/// minimum, so the result is a unique sink orientation and is marked
/// validated without a scan.
pub fn coordinate_order_uso(partition: GridPartition, rankings: &[Vec<usize>]) -> Result<GridUso, UsoError> {
    if rankings.len() != partition.delta() {
        return Err(UsoError::BadRanking(rankings.len().min(partition.delta())));
    }
    let mut rank = vec![usize::MAX; partition.n()];
    for (i, (order, block)) in rankings.iter().zip(partition.blocks()).enumerate() {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != *block {
            return Err(UsoError::BadRanking(i));
        }
        for (r, &h) in order.iter().enumerate() {
            rank[h] = r;
        }
    }
    Ok(GridUso {
        partition,
        orientation: Orientation::CoordinateOrder(rank),
        validated: true,
        edge_evals: AtomicU64::new(0),
    })
}

/// Coordinate-order orientation on consecutive blocks of the given sizes
/// with a uniformly random ranking of each block.
pub fn random_coordinate_uso<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<GridUso, UsoError> {
    let partition = GridPartition::from_sizes(sizes)?;
    let rankings: Vec<Vec<usize>> = partition
        .blocks()
        .iter()
        .map(|b| {
            let mut r = b.clone();
            r.shuffle(rng);
            r
        })
        .collect();
    coordinate_order_uso(partition, &rankings)
}

/// Coordinate-order orientation on blocks of near-equal size.
pub fn uniform_grid_uso<R: Rng + ?Sized>(n: usize, delta: usize, rng: &mut R) -> Result<GridUso, UsoError> {
    if delta == 0 || n < delta {
        return Err(UsoError::EmptyBlock(n.min(delta)));
    }
    let sizes: Vec<usize> = (0..delta).map(|i| n / delta + usize::from(i < n % delta)).collect();
    random_coordinate_uso(&sizes, rng)
}

/// A fixed 2×2×2 unique sink orientation whose vertex digraph has a
/// directed 6-cycle. Elements are `x0 x1 y0 y1 z0 z1`; the global sink is
/// `{x0, y0, z0}`.
pub fn cyclic_cube_uso() -> GridUso {
    let names = ["x0", "x1", "y0", "y1", "z0", "z1"].map(String::from).to_vec();
    let partition = GridPartition::new(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]], Some(names))
        .expect("three pairs partition six elements");
    // Vertex index is (bx, by, bz) in binary; outmaps list element indices.
    let raw: [&[usize]; 8] = [
        &[],
        &[1, 4],
        &[2, 5],
        &[2],
        &[0, 3],
        &[4],
        &[0],
        &[0, 2, 4],
    ];
    let outmaps = raw
        .iter()
        .map(|s| ConstraintSet::from_indices(6, s.iter().copied()))
        .collect();
    GridUso::from_outmaps(partition, outmaps)
        .expect("fixture is edge-consistent")
        .validate()
        .expect("n = 6")
        .expect("fixture is a unique sink orientation")
}

/// Uniformly random unique sink orientation by rejection: each line of the
/// grid (vertices differing in one block) gets a uniformly random linear
/// order, which every unique sink orientation induces, and the result is
/// kept if it validates.
pub fn random_uso<R: Rng + ?Sized>(
    partition: GridPartition,
    rng: &mut R,
    max_attempts: u64,
) -> Result<GridUso, UsoError> {
    let n = partition.n();
    if n > RANDOM_USO_MAX_N {
        return Err(UsoError::TooLarge { n, limit: RANDOM_USO_MAX_N });
    }
    let count = partition.vertex_count().expect("n <= 12");
    for _ in 0..max_attempts {
        let mut outmaps = vec![ConstraintSet::empty(n); count];
        for (b, block) in partition.blocks().iter().enumerate() {
            for i in 0..count {
                let v = partition.vertex_at(i);
                if v[b] != block[0] {
                    continue;
                }
                // One line per choice of the other coordinates.
                let mut order = block.clone();
                order.shuffle(rng);
                let rank: Vec<usize> = {
                    let mut r = vec![0; n];
                    for (k, &h) in order.iter().enumerate() {
                        r[h] = k;
                    }
                    r
                };
                for &a in block {
                    let va = partition.swap(&v, a);
                    let ia = partition.vertex_index(&va);
                    for &c in block {
                        if rank[c] < rank[a] {
                            outmaps[ia].insert(c);
                        }
                    }
                }
            }
        }
        let u = GridUso::from_outmaps(partition.clone(), outmaps)?;
        if let Ok(valid) = u.validate()? {
            return Ok(valid);
        }
    }
    Err(UsoError::GenerationExhausted(max_attempts))
}
