//! Clique machinery over the co-normal product: clique predicates, the
//! unique-extension computation, exact maximum-clique search, fixed-size
//! clique listing, and maximal projection-edgeless partitions.
//!
//! `extend_clique` returns the full set of common neighbors rather than
//! asserting there is at most one, so the uniqueness bound is something the
//! suites test, not assume.

use thiserror::Error;

use crate::ball_graph::{
    conormal_adjacent_coords, BallGraphError, ProductShape, ProductVertex, VertexIndexer,
};
use crate::bitset::BitSet;

/// Default cap on vertex counts for adjacency-matrix-backed operations.
pub const DEFAULT_CLIQUE_CAP: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliqueError {
    #[error(transparent)]
    Graph(#[from] BallGraphError),
    #[error("expected a clique of {expected} vertices, got {got}")]
    WrongCardinality { expected: usize, got: usize },
    #[error("the given vertex set is not a clique: {a} !~ {b}")]
    NotAClique { a: ProductVertex, b: ProductVertex },
    #[error("anchor {anchor} is not a member of the family")]
    AnchorNotMember { anchor: ProductVertex },
    #[error("anchors agree at coordinate {coord}; no partition separates them")]
    AnchorsAgree { coord: usize },
    #[error("no family member is projection-adjacent to the D anchor at coordinate {coord}")]
    NoSeparator { coord: usize },
}

/// A set of pairwise co-normal-adjacent product vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clique {
    members: Vec<ProductVertex>,
}

impl Clique {
    pub fn new(shape: &ProductShape, members: Vec<ProductVertex>) -> Result<Self, CliqueError> {
        for m in &members {
            shape.validate_vertex(m)?;
        }
        for a in 0..members.len() {
            for b in (a + 1)..members.len() {
                if !conormal_adjacent_coords(shape, members[a].coords(), members[b].coords()) {
                    return Err(CliqueError::NotAClique {
                        a: members[a].clone(),
                        b: members[b].clone(),
                    });
                }
            }
        }
        Ok(Clique { members })
    }

    pub fn members(&self) -> &[ProductVertex] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Whether the given vertices are pairwise co-normal adjacent.
pub fn is_clique(shape: &ProductShape, members: &[ProductVertex]) -> Result<bool, CliqueError> {
    for m in members {
        shape.validate_vertex(m)?;
    }
    for a in 0..members.len() {
        for b in (a + 1)..members.len() {
            if !conormal_adjacent_coords(shape, members[a].coords(), members[b].coords()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Bit-matrix adjacency of the co-normal product, indexed by vertex rank.
pub struct ConormalAdjacency {
    pub indexer: VertexIndexer,
    rows: Vec<BitSet>,
}

impl ConormalAdjacency {
    pub fn build(shape: &ProductShape, cap: usize) -> Result<Self, CliqueError> {
        let indexer = shape.indexer(cap)?;
        let count = indexer.count();
        let verts: Vec<ProductVertex> = (0..count).map(|r| indexer.vertex(r)).collect();
        let mut rows = vec![BitSet::empty(count); count];
        for a in 0..count {
            for b in (a + 1)..count {
                if conormal_adjacent_coords(shape, verts[a].coords(), verts[b].coords()) {
                    rows[a].insert(b);
                    rows[b].insert(a);
                }
            }
        }
        Ok(ConormalAdjacency { indexer, rows })
    }

    pub fn vertex_count(&self) -> usize {
        self.rows.len()
    }

    pub fn neighbors(&self, rank: usize) -> &BitSet {
        &self.rows[rank]
    }

    /// Common neighborhood of a set of ranks.
    pub fn common_neighbors(&self, ranks: &[usize]) -> BitSet {
        let mut acc = BitSet::full(self.vertex_count());
        for &r in ranks {
            acc.intersect_with(&self.rows[r]);
        }
        acc
    }
}

/// All vertices adjacent to every member of a clique of size `2^n - 1`.
///
/// The unique-extension bound says the result has at most one element; the
/// computed set is returned so callers can assert the bound.
pub fn extend_clique(
    shape: &ProductShape,
    clique: &[ProductVertex],
) -> Result<Vec<ProductVertex>, CliqueError> {
    let expected = (1usize << shape.n()) - 1;
    if clique.len() != expected {
        return Err(CliqueError::WrongCardinality {
            expected,
            got: clique.len(),
        });
    }
    if !is_clique(shape, clique)? {
        // Re-run to surface the offending pair.
        Clique::new(shape, clique.to_vec())?;
    }
    let adj = ConormalAdjacency::build(shape, DEFAULT_CLIQUE_CAP)?;
    let ranks: Vec<usize> = clique.iter().map(|v| adj.indexer.rank(v)).collect();
    let common = adj.common_neighbors(&ranks);
    Ok(common.iter().map(|r| adj.indexer.vertex(r)).collect())
}

/// Exact maximum clique cardinality of the co-normal product.
///
/// Uses a plain branch-and-bound over single-word bitsets when the graph has
/// at most 64 vertices, and branch-and-bound with a greedy coloring bound
/// above that.
pub fn max_clique_size(shape: &ProductShape) -> Result<usize, CliqueError> {
    max_clique_size_capped(shape, DEFAULT_CLIQUE_CAP)
}

pub fn max_clique_size_capped(shape: &ProductShape, cap: usize) -> Result<usize, CliqueError> {
    let indexer = shape.indexer(cap)?;
    let count = indexer.count();
    if count <= 64 {
        let verts: Vec<ProductVertex> = (0..count).map(|r| indexer.vertex(r)).collect();
        let mut adj = vec![0u64; count];
        for a in 0..count {
            for b in 0..count {
                if a != b && conormal_adjacent_coords(shape, verts[a].coords(), verts[b].coords())
                {
                    adj[a] |= 1 << b;
                }
            }
        }
        let full = if count == 64 { !0u64 } else { (1u64 << count) - 1 };
        let mut best = 0;
        max_clique_u64(&adj, full, 0, &mut best);
        return Ok(best);
    }
    let graph = ConormalAdjacency::build(shape, cap)?;
    let mut best = 0;
    let cand = BitSet::full(count);
    expand_colored(&graph, 0, &cand, &mut best);
    Ok(best)
}

fn max_clique_u64(adj: &[u64], cand: u64, size: usize, best: &mut usize) {
    if cand == 0 {
        *best = (*best).max(size);
        return;
    }
    let mut cand = cand;
    while cand != 0 {
        if size + cand.count_ones() as usize <= *best {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        max_clique_u64(adj, cand & adj[v], size + 1, best);
    }
    *best = (*best).max(size);
}

/// Greedy coloring of the candidate set; returns `(vertex, color_bound)`
/// sorted by ascending bound. `size + bound <= best` prunes the branch.
fn color_sort(graph: &ConormalAdjacency, cand: &BitSet) -> Vec<(usize, usize)> {
    let len = graph.vertex_count();
    let mut classes: Vec<BitSet> = Vec::new();
    let mut out = Vec::with_capacity(cand.count());
    for v in cand.iter() {
        let mut c = 0;
        while c < classes.len() && classes[c].intersects(graph.neighbors(v)) {
            c += 1;
        }
        if c == classes.len() {
            classes.push(BitSet::empty(len));
        }
        classes[c].insert(v);
        out.push((v, c + 1));
    }
    out.sort_by_key(|&(_, b)| b);
    out
}

fn expand_colored(graph: &ConormalAdjacency, size: usize, cand: &BitSet, best: &mut usize) {
    if cand.is_empty() {
        *best = (*best).max(size);
        return;
    }
    let order = color_sort(graph, cand);
    let mut cand = cand.clone();
    for (v, bound) in order.into_iter().rev() {
        if size + bound <= *best {
            return;
        }
        let mut next = cand.clone();
        next.intersect_with(graph.neighbors(v));
        expand_colored(graph, size + 1, &next, best);
        cand.remove(v);
    }
}

/// Visits every clique of exactly `k` vertices (as ascending ranks) together
/// with the bitset of vertices adjacent to all members.
pub fn for_each_clique_of_size<F: FnMut(&[usize], &BitSet)>(
    graph: &ConormalAdjacency,
    k: usize,
    mut visit: F,
) {
    if k == 0 {
        return;
    }
    let count = graph.vertex_count();
    let mut current = Vec::with_capacity(k);
    let mut common = BitSet::full(count);
    let cand = BitSet::full(count);
    clique_rec(graph, k, &mut current, &mut common, &cand, &mut visit);
}

fn clique_rec<F: FnMut(&[usize], &BitSet)>(
    graph: &ConormalAdjacency,
    k: usize,
    current: &mut Vec<usize>,
    common: &mut BitSet,
    cand: &BitSet,
    visit: &mut F,
) {
    if current.len() == k {
        visit(current, common);
        return;
    }
    if current.len() + cand.count() < k {
        return;
    }
    let mut cand = cand.clone();
    let mut from = 0;
    while let Some(v) = cand.first_at_or_after(from) {
        cand.remove(v);
        from = v + 1;
        if current.len() + 1 + cand.count() < k {
            // Taking v cannot reach k, and later siblings see even fewer
            // candidates.
            break;
        }
        let mut next = cand.clone();
        next.intersect_with(graph.neighbors(v));
        let mut next_common = common.clone();
        next_common.intersect_with(graph.neighbors(v));
        current.push(v);
        clique_rec(graph, k, current, &mut next_common, &next, visit);
        current.pop();
    }
}

/// A partition `(C, D)` of a `2^n`-clique such that the coordinate-`coord`
/// projection of `C` is edgeless and maximal with that property, with the
/// anchors landing on opposite sides.
///
/// The construction follows the uniqueness proof: seed `C` with the C anchor
/// plus the first member whose projection is adjacent to the D anchor's
/// projection, then extend greedily in enumeration order.
pub fn maximal_edgeless_partition(
    shape: &ProductShape,
    family: &Clique,
    coord: usize,
    anchor_in_c: &ProductVertex,
    anchor_in_d: &ProductVertex,
) -> Result<(Vec<ProductVertex>, Vec<ProductVertex>), CliqueError> {
    let members = family.members();
    let expected = 1usize << shape.n();
    if members.len() != expected {
        return Err(CliqueError::WrongCardinality {
            expected,
            got: members.len(),
        });
    }
    let pos_c = members
        .iter()
        .position(|m| m == anchor_in_c)
        .ok_or_else(|| CliqueError::AnchorNotMember {
            anchor: anchor_in_c.clone(),
        })?;
    let pos_d = members
        .iter()
        .position(|m| m == anchor_in_d)
        .ok_or_else(|| CliqueError::AnchorNotMember {
            anchor: anchor_in_d.clone(),
        })?;
    let comp = shape.component(coord);
    let pc = anchor_in_c.coord(coord);
    let pd = anchor_in_d.coord(coord);
    if pc == pd {
        return Err(CliqueError::AnchorsAgree { coord });
    }

    let mut in_c = vec![false; members.len()];
    in_c[pos_c] = true;
    if !comp.adjacent(pc, pd) {
        // Seed with the first member projection-adjacent to the D anchor, so
        // the D anchor can never be absorbed into C.
        let seed = members
            .iter()
            .position(|m| comp.adjacent(m.coord(coord), pd))
            .ok_or(CliqueError::NoSeparator { coord })?;
        in_c[seed] = true;
    }
    for (idx, m) in members.iter().enumerate() {
        if in_c[idx] || idx == pos_d {
            continue;
        }
        let blocked = members
            .iter()
            .enumerate()
            .any(|(j, c)| in_c[j] && comp.adjacent(m.coord(coord), c.coord(coord)));
        if !blocked {
            in_c[idx] = true;
        }
    }

    let mut c = Vec::new();
    let mut d = Vec::new();
    for (idx, m) in members.iter().enumerate() {
        if in_c[idx] {
            c.push(m.clone());
        } else {
            d.push(m.clone());
        }
    }
    Ok((c, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball_graph::{enumerate_vertices, VertexId};
    use proptest::prelude::*;

    fn pv(coords: &[VertexId]) -> ProductVertex {
        ProductVertex::new(coords.to_vec())
    }

    /// Brute-force maximum clique by subset enumeration; valid to 20 or so
    /// vertices. Independent of the branch-and-bound path.
    fn max_clique_brute(shape: &ProductShape) -> usize {
        let verts = enumerate_vertices(shape).unwrap();
        let n = verts.len();
        assert!(n <= 20);
        let mut best = 0;
        'outer: for mask in 0u32..(1 << n) {
            let size = mask.count_ones() as usize;
            if size <= best {
                continue;
            }
            let picked: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            for a in 0..picked.len() {
                for b in (a + 1)..picked.len() {
                    if !conormal_adjacent_coords(
                        shape,
                        verts[picked[a]].coords(),
                        verts[picked[b]].coords(),
                    ) {
                        continue 'outer;
                    }
                }
            }
            best = size;
        }
        best
    }

    #[test]
    fn singleton_is_clique() {
        let shape = ProductShape::new(&[(1, 1)]).unwrap();
        assert!(is_clique(&shape, &[pv(&[2])]).unwrap());
    }

    #[test]
    fn k4_is_clique_interior_pair_is_not() {
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        let verts = enumerate_vertices(&shape).unwrap();
        assert!(is_clique(&shape, &verts).unwrap());

        // Two distinct interior vertices are never adjacent.
        let shape2 = ProductShape::new(&[(1, 2), (1, 2)]).unwrap();
        assert!(!is_clique(&shape2, &[pv(&[2, 2]), pv(&[3, 3])]).unwrap());
    }

    #[test]
    fn extend_pair_member() {
        // Component {p, p'} plus isolated w: the only common neighbor of {p}
        // is p' (w has no neighbors). Exhaustive scan is the implementation.
        let shape = ProductShape::new(&[(1, 1)]).unwrap();
        let ext = extend_clique(&shape, &[pv(&[0])]).unwrap();
        assert_eq!(ext, vec![pv(&[1])]);
    }

    #[test]
    fn extend_in_k4_gives_missing_vertex() {
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        let verts = enumerate_vertices(&shape).unwrap();
        for leave_out in 0..4 {
            let clique: Vec<ProductVertex> = verts
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != leave_out)
                .map(|(_, v)| v.clone())
                .collect();
            let ext = extend_clique(&shape, &clique).unwrap();
            assert_eq!(ext, vec![verts[leave_out].clone()]);
        }
    }

    #[test]
    fn extend_isolated_vertex_is_empty() {
        let shape = ProductShape::new(&[(1, 1)]).unwrap();
        let ext = extend_clique(&shape, &[pv(&[2])]).unwrap();
        assert!(ext.is_empty());
    }

    #[test]
    fn extend_rejects_wrong_cardinality() {
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        let err = extend_clique(&shape, &[pv(&[0, 0])]).unwrap_err();
        assert!(matches!(err, CliqueError::WrongCardinality { expected: 3, got: 1 }));
    }

    #[test]
    fn max_clique_examples() {
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        assert_eq!(max_clique_size(&shape).unwrap(), 4);

        let shape = ProductShape::new(&[(0, 3)]).unwrap();
        assert_eq!(max_clique_size(&shape).unwrap(), 1);

        let shape = ProductShape::new(&[(1, 1), (1, 1), (1, 1)]).unwrap();
        assert_eq!(max_clique_size(&shape).unwrap(), 8);
    }

    #[test]
    fn colored_search_agrees_with_small_path() {
        // Force the colored branch by exceeding 64 vertices.
        let shape = ProductShape::new(&[(2, 1), (1, 2), (2, 0)]).unwrap();
        let n_verts = shape.vertex_count();
        assert!(n_verts > 64, "need > 64 vertices, got {n_verts}");
        assert_eq!(max_clique_size(&shape).unwrap(), 8);
    }

    #[test]
    fn partition_single_pair() {
        let shape = ProductShape::new(&[(1, 0)]).unwrap();
        let family = Clique::new(&shape, vec![pv(&[0]), pv(&[1])]).unwrap();
        let (c, d) =
            maximal_edgeless_partition(&shape, &family, 0, &pv(&[0]), &pv(&[1])).unwrap();
        assert_eq!(c, vec![pv(&[0])]);
        assert_eq!(d, vec![pv(&[1])]);
    }

    #[test]
    fn partition_k4() {
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        let verts = enumerate_vertices(&shape).unwrap();
        let family = Clique::new(&shape, verts).unwrap();
        let (mut c, mut d) =
            maximal_edgeless_partition(&shape, &family, 0, &pv(&[0, 0]), &pv(&[1, 0])).unwrap();
        c.sort();
        d.sort();
        assert_eq!(c, vec![pv(&[0, 0]), pv(&[0, 1])]);
        assert_eq!(d, vec![pv(&[1, 0]), pv(&[1, 1])]);
    }

    #[test]
    fn partition_rejects_agreeing_anchors() {
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        let verts = enumerate_vertices(&shape).unwrap();
        let family = Clique::new(&shape, verts).unwrap();
        let err = maximal_edgeless_partition(&shape, &family, 0, &pv(&[0, 0]), &pv(&[0, 1]))
            .unwrap_err();
        assert!(matches!(err, CliqueError::AnchorsAgree { coord: 0 }));
    }

    /// Oracle for the partition invariants: cardinalities, edgeless
    /// projections, maximality, and projection-neighborhood duality.
    fn assert_partition_invariants(
        shape: &ProductShape,
        coord: usize,
        c: &[ProductVertex],
        d: &[ProductVertex],
    ) {
        let n = shape.n();
        assert_eq!(c.len(), 1 << (n - 1));
        assert_eq!(d.len(), 1 << (n - 1));
        let comp = shape.component(coord);
        let edgeless = |part: &[ProductVertex]| {
            part.iter().all(|a| {
                part.iter()
                    .all(|b| !comp.adjacent(a.coord(coord), b.coord(coord)))
            })
        };
        assert!(edgeless(c), "projection of C has an edge");
        assert!(edgeless(d), "projection of D has an edge");
        // Maximality: no member of D can be moved into C.
        for m in d {
            let blocked = c
                .iter()
                .any(|x| comp.adjacent(m.coord(coord), x.coord(coord)));
            assert!(blocked, "C is not maximal: {m} could be added");
        }
        // Neighborhood duality on the projections.
        let proj = |part: &[ProductVertex]| {
            let mut ids: Vec<VertexId> = part.iter().map(|v| v.coord(coord)).collect();
            ids.sort();
            ids.dedup();
            ids
        };
        let nbhd = |ids: &[VertexId]| {
            let mut out: Vec<VertexId> = ids.iter().filter_map(|&v| comp.partner(v)).collect();
            out.sort();
            out.dedup();
            out
        };
        assert_eq!(proj(d), nbhd(&proj(c)));
        assert_eq!(proj(c), nbhd(&proj(d)));
    }

    #[test]
    fn partition_invariants_on_hypercube_families() {
        for sizes in [
            vec![(1, 0), (1, 0)],
            vec![(2, 1), (1, 1)],
            vec![(1, 0), (1, 1), (2, 0)],
        ] {
            let shape = ProductShape::new(&sizes).unwrap();
            let x = ProductVertex::new(vec![0; shape.n()]);
            let t = crate::ball_graph::hypercube_component(&shape, &x).unwrap();
            let family = Clique::new(&shape, t.clone()).unwrap();
            for coord in 0..shape.n() {
                let anchor_c = &t[t.len() - 1];
                let anchor_d = t
                    .iter()
                    .find(|m| m.coord(coord) != anchor_c.coord(coord))
                    .unwrap();
                let (c, d) =
                    maximal_edgeless_partition(&shape, &family, coord, anchor_c, anchor_d)
                        .unwrap();
                assert!(c.contains(anchor_c));
                assert!(d.contains(anchor_d));
                assert_partition_invariants(&shape, coord, &c, &d);
            }
        }
    }

    #[test]
    fn partition_invariants_hold_for_every_anchor_pair() {
        // Every hypercube family, every coordinate, every anchor pair whose
        // projections differ at that coordinate.
        for sizes in [vec![(1u32, 1u32), (1, 1)], vec![(2, 0), (1, 1)], vec![(1, 0), (1, 0), (1, 1)]] {
            let shape = ProductShape::new(&sizes).unwrap();
            for base in crate::ball_graph::enumerate_vertices(&shape).unwrap() {
                if crate::ball_graph::vertex_class(&shape, &base).unwrap()
                    != crate::ball_graph::VertexClass::Extreme
                {
                    continue;
                }
                let t = crate::ball_graph::hypercube_component(&shape, &base).unwrap();
                // Each family is seen once per member; run only from the
                // lexicographically smallest to keep this quick.
                if t.iter().min() != Some(&base) {
                    continue;
                }
                let family = Clique::new(&shape, t.clone()).unwrap();
                for coord in 0..shape.n() {
                    for a in &t {
                        for d in &t {
                            if a.coord(coord) == d.coord(coord) {
                                continue;
                            }
                            let (c_side, d_side) =
                                maximal_edgeless_partition(&shape, &family, coord, a, d).unwrap();
                            assert!(c_side.contains(a));
                            assert!(d_side.contains(d));
                            assert_partition_invariants(&shape, coord, &c_side, &d_side);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn clique_listing_matches_brute_force() {
        let shape = ProductShape::new(&[(1, 1), (1, 0)]).unwrap();
        let graph = ConormalAdjacency::build(&shape, 64).unwrap();
        let mut listed = Vec::new();
        for_each_clique_of_size(&graph, 3, |members, _| listed.push(members.to_vec()));
        // Brute force all 3-subsets.
        let count = graph.vertex_count();
        let mut brute = Vec::new();
        for a in 0..count {
            for b in (a + 1)..count {
                for c in (b + 1)..count {
                    if graph.neighbors(a).contains(b)
                        && graph.neighbors(a).contains(c)
                        && graph.neighbors(b).contains(c)
                    {
                        brute.push(vec![a, b, c]);
                    }
                }
            }
        }
        listed.sort();
        brute.sort();
        assert_eq!(listed, brute);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn branch_and_bound_matches_brute_force(
            sizes in proptest::collection::vec((0u32..3, 0u32..3), 1..3),
        ) {
            let sizes: Vec<(u32, u32)> = sizes
                .into_iter()
                .map(|(p, i)| if 2 * p + i == 0 { (p, i + 1) } else { (p, i) })
                .collect();
            let shape = ProductShape::new(&sizes).unwrap();
            if shape.vertex_count() <= 18 {
                prop_assert_eq!(
                    max_clique_size(&shape).unwrap(),
                    max_clique_brute(&shape)
                );
            }
        }

        #[test]
        fn max_clique_respects_power_bound(
            sizes in proptest::collection::vec((1u32..3, 0u32..3), 1..3),
        ) {
            let shape = ProductShape::new(&sizes).unwrap();
            let m = max_clique_size(&shape).unwrap();
            prop_assert_eq!(m, 1 << shape.n());
        }
    }
}
