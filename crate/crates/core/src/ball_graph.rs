//! Matching-plus-isolated component graphs and their co-normal and Cartesian
//! products.
//!
//! A component graph `B_i` consists of `pairs` matched vertex pairs plus
//! `isolated` degree-0 vertices, so its maximal vertex degree is exactly 1.
//! Vertex ids `0..2*pairs` are the pair members, with `2k` and `2k+1`
//! partnered; ids from `2*pairs` on are isolated. The sphere `S_i` of a
//! component is exactly the set of pair members (the domain of `partner`).
//!
//! Product vertices are coordinate tuples, one vertex id per component. Two
//! product vertices are adjacent in the co-normal product when they are
//! adjacent in at least one coordinate, and in the Cartesian product when
//! they are adjacent in exactly one coordinate and equal elsewhere. All
//! operations here are pure; shapes are immutable after construction.

use std::fmt;
use thiserror::Error;

pub type VertexId = u32;

/// Default cap on `enumerate_vertices`.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BallGraphError {
    #[error("shape must have at least one component")]
    EmptyShape,
    #[error("component {index} has no vertices")]
    TrivialComponent { index: usize },
    #[error("vertex has {got} coordinates but the shape has {expected} components")]
    ArityMismatch { got: usize, expected: usize },
    #[error("coordinate {coord} of {vertex} is not a vertex of component {component} (size {size})")]
    InvalidVertex {
        vertex: ProductVertex,
        component: usize,
        coord: VertexId,
        size: u32,
    },
    #[error("vertex count {count} exceeds the cap {cap}")]
    SizeCap { count: u128, cap: usize },
    #[error("vertex {vertex} is not extreme")]
    NotExtreme { vertex: ProductVertex },
}

/// One factor of the product: a matching plus isolated vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComponentGraph {
    index: usize,
    pairs: u32,
    isolated: u32,
}

impl ComponentGraph {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn pairs(&self) -> u32 {
        self.pairs
    }

    pub fn isolated(&self) -> u32 {
        self.isolated
    }

    pub fn vertex_count(&self) -> u32 {
        2 * self.pairs + self.isolated
    }

    /// Size of the sphere subgraph: the number of pair members.
    pub fn sphere_size(&self) -> u32 {
        2 * self.pairs
    }

    pub fn in_sphere(&self, v: VertexId) -> bool {
        v < self.sphere_size()
    }

    /// The matched partner of `v`. Defined exactly on sphere vertices, where
    /// it is a fixed-point-free involution.
    pub fn partner(&self, v: VertexId) -> Option<VertexId> {
        if self.in_sphere(v) {
            Some(v ^ 1)
        } else {
            None
        }
    }

    pub fn adjacent(&self, u: VertexId, v: VertexId) -> bool {
        self.partner(u) == Some(v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.vertex_count()
    }

    pub fn sphere_vertices(&self) -> impl Iterator<Item = VertexId> {
        0..self.sphere_size()
    }

    pub fn isolated_vertices(&self) -> impl Iterator<Item = VertexId> {
        self.sphere_size()..self.vertex_count()
    }
}

/// The family of component graphs defining a product.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProductShape {
    components: Vec<ComponentGraph>,
}

impl ProductShape {
    /// Builds a shape from `(pairs, isolated)` counts, one per component.
    /// Every component must have at least one vertex. Components with zero
    /// pairs are allowed; they have an empty sphere.
    pub fn new(sizes: &[(u32, u32)]) -> Result<Self, BallGraphError> {
        if sizes.is_empty() {
            return Err(BallGraphError::EmptyShape);
        }
        let components = sizes
            .iter()
            .enumerate()
            .map(|(index, &(pairs, isolated))| {
                if 2 * pairs + isolated == 0 {
                    Err(BallGraphError::TrivialComponent { index })
                } else {
                    Ok(ComponentGraph {
                        index,
                        pairs,
                        isolated,
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ProductShape { components })
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ComponentGraph] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ComponentGraph {
        &self.components[i]
    }

    /// Total number of product vertices.
    pub fn vertex_count(&self) -> u128 {
        self.components
            .iter()
            .map(|c| c.vertex_count() as u128)
            .product()
    }

    pub fn all_pairs_positive(&self) -> bool {
        self.components.iter().all(|c| c.pairs > 0)
    }

    /// A compact text label like `1p1i,2p0i`, used in reports.
    pub fn label(&self) -> String {
        self.components
            .iter()
            .map(|c| format!("{}p{}i", c.pairs, c.isolated))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn validate_vertex(&self, v: &ProductVertex) -> Result<(), BallGraphError> {
        if v.coords.len() != self.n() {
            return Err(BallGraphError::ArityMismatch {
                got: v.coords.len(),
                expected: self.n(),
            });
        }
        for (i, (&c, comp)) in v.coords.iter().zip(&self.components).enumerate() {
            if c >= comp.vertex_count() {
                return Err(BallGraphError::InvalidVertex {
                    vertex: v.clone(),
                    component: i,
                    coord: c,
                    size: comp.vertex_count(),
                });
            }
        }
        Ok(())
    }

    /// Mixed-radix rank/unrank indexer over the vertices in lexicographic
    /// coordinate order (leftmost coordinate most significant).
    pub fn indexer(&self, cap: usize) -> Result<VertexIndexer, BallGraphError> {
        let count = self.vertex_count();
        if count > cap as u128 {
            return Err(BallGraphError::SizeCap { count, cap });
        }
        let radices: Vec<u32> = self.components.iter().map(|c| c.vertex_count()).collect();
        let mut strides = vec![1usize; radices.len()];
        for i in (0..radices.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * radices[i + 1] as usize;
        }
        Ok(VertexIndexer {
            radices,
            strides,
            count: count as usize,
        })
    }
}

/// A vertex of the product: one vertex id per component.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductVertex {
    coords: Vec<VertexId>,
}

impl ProductVertex {
    pub fn new(coords: Vec<VertexId>) -> Self {
        ProductVertex { coords }
    }

    pub fn coords(&self) -> &[VertexId] {
        &self.coords
    }

    /// The coordinate projection.
    pub fn coord(&self, i: usize) -> VertexId {
        self.coords[i]
    }

    /// The complementary projection: all coordinates except `i`.
    pub fn drop_coord(&self, i: usize) -> Vec<VertexId> {
        let mut out = self.coords.clone();
        out.remove(i);
        out
    }

    pub fn with_coord(&self, i: usize, v: VertexId) -> Self {
        let mut coords = self.coords.clone();
        coords[i] = v;
        ProductVertex { coords }
    }
}

impl fmt::Display for ProductVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Rank/unrank between product vertices and `0..count` in lexicographic
/// coordinate order.
#[derive(Clone, Debug)]
pub struct VertexIndexer {
    radices: Vec<u32>,
    strides: Vec<usize>,
    count: usize,
}

impl VertexIndexer {
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rank(&self, v: &ProductVertex) -> usize {
        v.coords
            .iter()
            .zip(&self.strides)
            .map(|(&c, &s)| c as usize * s)
            .sum()
    }

    pub fn vertex(&self, mut rank: usize) -> ProductVertex {
        debug_assert!(rank < self.count);
        let mut coords = Vec::with_capacity(self.radices.len());
        for &s in &self.strides {
            coords.push((rank / s) as VertexId);
            rank %= s;
        }
        ProductVertex { coords }
    }

    /// Rank after replacing coordinate `i` (currently `old`) by `new`.
    pub fn rank_with_coord(&self, rank: usize, i: usize, old: VertexId, new: VertexId) -> usize {
        rank + new as usize * self.strides[i] - old as usize * self.strides[i]
    }
}

/// Classification of a product vertex by how many coordinates lie on their
/// component sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VertexClass {
    /// Every coordinate is a pair member.
    Extreme,
    /// Some but not all coordinates are pair members.
    SphereNonExtreme,
    /// No coordinate is a pair member.
    Interior,
}

pub(crate) fn conormal_adjacent_coords(
    shape: &ProductShape,
    a: &[VertexId],
    b: &[VertexId],
) -> bool {
    shape
        .components
        .iter()
        .enumerate()
        .any(|(i, c)| c.adjacent(a[i], b[i]))
}

pub(crate) fn cartesian_adjacent_coords(
    shape: &ProductShape,
    a: &[VertexId],
    b: &[VertexId],
) -> bool {
    let mut active = false;
    for (i, c) in shape.components.iter().enumerate() {
        if c.adjacent(a[i], b[i]) {
            if active {
                return false;
            }
            active = true;
        } else if a[i] != b[i] {
            return false;
        }
    }
    active
}

/// Whether coordinates of `a` and `b` differ at exactly one index, where they
/// are partnered. Returns that index.
pub(crate) fn single_flip_coord(
    shape: &ProductShape,
    a: &[VertexId],
    b: &[VertexId],
) -> Option<usize> {
    let mut active = None;
    for (i, c) in shape.components.iter().enumerate() {
        if c.adjacent(a[i], b[i]) {
            if active.is_some() {
                return None;
            }
            active = Some(i);
        } else if a[i] != b[i] {
            return None;
        }
    }
    active
}

/// Co-normal adjacency: `u ~ v` iff some coordinate pair is partnered.
pub fn conormal_adjacent(
    shape: &ProductShape,
    u: &ProductVertex,
    v: &ProductVertex,
) -> Result<bool, BallGraphError> {
    shape.validate_vertex(u)?;
    shape.validate_vertex(v)?;
    Ok(conormal_adjacent_coords(shape, &u.coords, &v.coords))
}

/// Cartesian adjacency: partnered in exactly one coordinate, equal elsewhere.
/// Implies co-normal adjacency.
pub fn cartesian_adjacent(
    shape: &ProductShape,
    u: &ProductVertex,
    v: &ProductVertex,
) -> Result<bool, BallGraphError> {
    shape.validate_vertex(u)?;
    shape.validate_vertex(v)?;
    Ok(cartesian_adjacent_coords(shape, &u.coords, &v.coords))
}

pub fn vertex_class(shape: &ProductShape, u: &ProductVertex) -> Result<VertexClass, BallGraphError> {
    shape.validate_vertex(u)?;
    Ok(vertex_class_coords(shape, &u.coords))
}

pub(crate) fn vertex_class_coords(shape: &ProductShape, coords: &[VertexId]) -> VertexClass {
    let on_sphere = coords
        .iter()
        .zip(&shape.components)
        .filter(|(&c, comp)| comp.in_sphere(c))
        .count();
    if on_sphere == shape.n() {
        VertexClass::Extreme
    } else if on_sphere > 0 {
        VertexClass::SphereNonExtreme
    } else {
        VertexClass::Interior
    }
}

/// All product vertices in lexicographic coordinate order, capped at
/// [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_vertices(shape: &ProductShape) -> Result<Vec<ProductVertex>, BallGraphError> {
    enumerate_vertices_capped(shape, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_vertices_capped(
    shape: &ProductShape,
    cap: usize,
) -> Result<Vec<ProductVertex>, BallGraphError> {
    let indexer = shape.indexer(cap)?;
    Ok((0..indexer.count()).map(|r| indexer.vertex(r)).collect())
}

/// The Cartesian-product connected component of an extreme vertex `x`: the
/// set of vertices agreeing with `x` on a subset `J` of coordinates and
/// taking the partner elsewhere.
///
/// The result is ordered by the subset bitmask (bit `i` set means coordinate
/// `i` agrees with `x`), so the last entry is `x` itself and the map from
/// masks to vertices is a bijection onto the returned set. The induced
/// Cartesian-product subgraph is the `n`-hypercube.
pub fn hypercube_component(
    shape: &ProductShape,
    x: &ProductVertex,
) -> Result<Vec<ProductVertex>, BallGraphError> {
    if vertex_class(shape, x)? != VertexClass::Extreme {
        return Err(BallGraphError::NotExtreme { vertex: x.clone() });
    }
    let n = shape.n();
    if n >= usize::BITS as usize - 1 {
        return Err(BallGraphError::SizeCap {
            count: u128::MAX,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0usize..(1 << n) {
        let coords = x
            .coords
            .iter()
            .enumerate()
            .map(|(i, &c)| if mask & (1 << i) != 0 { c } else { c ^ 1 })
            .collect();
        out.push(ProductVertex::new(coords));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pv(coords: &[VertexId]) -> ProductVertex {
        ProductVertex::new(coords.to_vec())
    }

    #[test]
    fn partner_is_fixed_point_free_involution() {
        let shape = ProductShape::new(&[(2, 3)]).unwrap();
        let c = shape.component(0);
        for v in c.sphere_vertices() {
            let p = c.partner(v).unwrap();
            assert_ne!(p, v);
            assert_eq!(c.partner(p), Some(v));
        }
        for v in c.isolated_vertices() {
            assert_eq!(c.partner(v), None);
        }
    }

    #[test]
    fn sphere_is_partner_domain() {
        let shape = ProductShape::new(&[(1, 2)]).unwrap();
        let c = shape.component(0);
        let sphere: Vec<_> = c.vertices().filter(|&v| c.partner(v).is_some()).collect();
        assert_eq!(sphere, c.sphere_vertices().collect::<Vec<_>>());
    }

    #[test]
    fn conormal_is_irreflexive() {
        let shape = ProductShape::new(&[(1, 1), (1, 0)]).unwrap();
        let u = pv(&[0, 1]);
        assert!(!conormal_adjacent(&shape, &u, &u).unwrap());
    }

    #[test]
    fn conormal_single_coordinate_edge() {
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        // (p, q) vs (p', q): adjacency in coordinate 0 only.
        assert!(conormal_adjacent(&shape, &pv(&[0, 0]), &pv(&[1, 0])).unwrap());
        assert!(cartesian_adjacent(&shape, &pv(&[0, 0]), &pv(&[1, 0])).unwrap());
    }

    #[test]
    fn one_pair_squared_is_complete() {
        // Oracle: enumerate all 6 vertex pairs of the 4-vertex product and
        // confirm each is a co-normal edge.
        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        let verts = enumerate_vertices(&shape).unwrap();
        assert_eq!(verts.len(), 4);
        for a in 0..verts.len() {
            for b in (a + 1)..verts.len() {
                assert!(
                    conormal_adjacent(&shape, &verts[a], &verts[b]).unwrap(),
                    "{} !~ {}",
                    verts[a],
                    verts[b]
                );
            }
        }
        // The frozen instance from that scan: both coordinates flipped.
        assert!(conormal_adjacent(&shape, &pv(&[0, 0]), &pv(&[1, 1])).unwrap());
        // Under the Cartesian product the double flip is not an edge.
        assert!(!cartesian_adjacent(&shape, &pv(&[0, 0]), &pv(&[1, 1])).unwrap());
    }

    #[test]
    fn invalid_vertex_is_rejected() {
        let shape = ProductShape::new(&[(1, 0)]).unwrap();
        let err = conormal_adjacent(&shape, &pv(&[2]), &pv(&[0])).unwrap_err();
        assert!(matches!(err, BallGraphError::InvalidVertex { .. }));
        let err = conormal_adjacent(&shape, &pv(&[0, 0]), &pv(&[0])).unwrap_err();
        assert!(matches!(err, BallGraphError::ArityMismatch { .. }));
    }

    #[test]
    fn vertex_classes() {
        let shape = ProductShape::new(&[(1, 1), (1, 1)]).unwrap();
        assert_eq!(
            vertex_class(&shape, &pv(&[0, 1])).unwrap(),
            VertexClass::Extreme
        );
        assert_eq!(
            vertex_class(&shape, &pv(&[0, 2])).unwrap(),
            VertexClass::SphereNonExtreme
        );
        assert_eq!(
            vertex_class(&shape, &pv(&[2, 2])).unwrap(),
            VertexClass::Interior
        );
    }

    #[test]
    fn enumeration_counts_and_order() {
        let shape = ProductShape::new(&[(1, 1)]).unwrap();
        assert_eq!(enumerate_vertices(&shape).unwrap().len(), 3);

        let shape = ProductShape::new(&[(1, 0), (1, 0)]).unwrap();
        assert_eq!(enumerate_vertices(&shape).unwrap().len(), 4);

        let shape = ProductShape::new(&[(1, 1), (1, 1), (1, 1)]).unwrap();
        let verts = enumerate_vertices(&shape).unwrap();
        assert_eq!(verts.len(), 27);
        // Lexicographic: sorted ascending, no duplicates.
        let mut sorted = verts.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(verts, sorted);
    }

    #[test]
    fn enumeration_cap() {
        let shape = ProductShape::new(&[(1, 1), (1, 1)]).unwrap();
        let err = enumerate_vertices_capped(&shape, 8).unwrap_err();
        assert!(matches!(err, BallGraphError::SizeCap { count: 9, cap: 8 }));
    }

    #[test]
    fn indexer_round_trip() {
        let shape = ProductShape::new(&[(2, 1), (0, 3), (1, 0)]).unwrap();
        let ix = shape.indexer(10_000).unwrap();
        for r in 0..ix.count() {
            let v = ix.vertex(r);
            assert_eq!(ix.rank(&v), r);
        }
    }

    #[test]
    fn hypercube_one_pair() {
        let shape = ProductShape::new(&[(1, 1)]).unwrap();
        let t = hypercube_component(&shape, &pv(&[0])).unwrap();
        assert_eq!(t, vec![pv(&[1]), pv(&[0])]);
    }

    #[test]
    fn hypercube_size_and_bijection() {
        let shape = ProductShape::new(&[(1, 0), (2, 1), (1, 2)]).unwrap();
        let x = pv(&[0, 2, 1]);
        let t = hypercube_component(&shape, &x).unwrap();
        assert_eq!(t.len(), 8);
        // Mask -> vertex is a bijection onto the set.
        let mut dedup = t.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), 8);
        // Mask with all bits set is x itself.
        assert_eq!(t[7], x);
    }

    #[test]
    fn hypercube_requires_extreme() {
        let shape = ProductShape::new(&[(1, 1)]).unwrap();
        let err = hypercube_component(&shape, &pv(&[2])).unwrap_err();
        assert!(matches!(err, BallGraphError::NotExtreme { .. }));
    }

    #[test]
    fn hypercube_induced_graph_is_n_cube() {
        // The induced Cartesian-product graph on the component of an extreme
        // vertex must be the n-hypercube: edges exactly between masks at
        // Hamming distance 1. That gives degree n and n * 2^(n-1) edges.
        for shape in [
            ProductShape::new(&[(1, 0)]).unwrap(),
            ProductShape::new(&[(1, 1), (2, 0)]).unwrap(),
            ProductShape::new(&[(1, 1), (1, 1), (1, 1)]).unwrap(),
        ] {
            let n = shape.n();
            let x = ProductVertex::new(vec![0; n]);
            let t = hypercube_component(&shape, &x).unwrap();
            let mut edges = 0;
            for a in 0..t.len() {
                for b in 0..t.len() {
                    if a == b {
                        continue;
                    }
                    let adj = cartesian_adjacent(&shape, &t[a], &t[b]).unwrap();
                    let hamming_one = (a ^ b).count_ones() == 1;
                    assert_eq!(adj, hamming_one, "masks {a} {b}");
                    if a < b && adj {
                        edges += 1;
                    }
                }
            }
            assert_eq!(edges, n * (1 << (n - 1)));
        }
    }

    #[test]
    fn empty_sphere_component_has_no_extreme_vertices() {
        let shape = ProductShape::new(&[(0, 2), (1, 0)]).unwrap();
        for v in enumerate_vertices(&shape).unwrap() {
            assert_ne!(vertex_class(&shape, &v).unwrap(), VertexClass::Extreme);
        }
    }

    proptest! {
        #[test]
        fn cartesian_implies_conormal_and_symmetry(
            sizes in proptest::collection::vec((0u32..3, 0u32..3), 1..4),
            seed_a in 0usize..10_000,
            seed_b in 0usize..10_000,
        ) {
            let sizes: Vec<(u32, u32)> = sizes
                .into_iter()
                .map(|(p, i)| if 2 * p + i == 0 { (p, i + 1) } else { (p, i) })
                .collect();
            let shape = ProductShape::new(&sizes).unwrap();
            let ix = shape.indexer(1_000_000).unwrap();
            let u = ix.vertex(seed_a % ix.count());
            let v = ix.vertex(seed_b % ix.count());

            let co = conormal_adjacent(&shape, &u, &v).unwrap();
            let ca = cartesian_adjacent(&shape, &u, &v).unwrap();
            // Subgraph relation.
            prop_assert!(!ca || co);
            // Symmetry.
            prop_assert_eq!(co, conormal_adjacent(&shape, &v, &u).unwrap());
            prop_assert_eq!(ca, cartesian_adjacent(&shape, &v, &u).unwrap());
            // Irreflexivity.
            prop_assert!(!conormal_adjacent(&shape, &u, &u).unwrap());
        }
    }
}
