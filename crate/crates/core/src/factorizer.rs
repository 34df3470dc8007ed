//! Injective homomorphisms of the co-normal product and their factorization
//! into a coordinate permutation plus per-component sphere maps.
//!
//! `factor` recovers the permutation from the coordinate flipped across each
//! hypercube edge at a base extreme vertex, checks that every extreme
//! vertex's hypercube maps consistently (a disagreement is an error, never
//! silently resolved), and then verifies the factorization identity at every
//! sphere coordinate of every vertex. A failure carries a minimal
//! counterexample so an exhaustive run doubles as a falsification harness.
//!
//! "Local isomorphism" is realized as an injective, partner-equivariant map
//! between component spheres; surjectivity is only asserted under the
//! image hypotheses checked by `check_bijective_factors`.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::ball_graph::{
    cartesian_adjacent_coords, conormal_adjacent_coords, single_flip_coord, vertex_class_coords,
    BallGraphError, ProductShape, ProductVertex, VertexClass, VertexId, VertexIndexer,
};
use crate::bitset::BitSet;

/// Default cap on vertex counts for exhaustive homomorphism enumeration.
pub const DEFAULT_HOM_ENUMERATION_CAP: usize = 12;

/// Cap used when materializing vertex tables for homomorphisms.
const HOM_VERTEX_CAP: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomomorphismError {
    #[error(transparent)]
    Graph(#[from] BallGraphError),
    #[error("map covers {got} vertices but the shape has {expected}")]
    NotTotal { got: usize, expected: usize },
    #[error("image index {image} of vertex {vertex} is out of range")]
    ImageOutOfRange { vertex: ProductVertex, image: usize },
    #[error("map is not injective: {a} and {b} share the image {image}")]
    NotInjective {
        a: ProductVertex,
        b: ProductVertex,
        image: ProductVertex,
    },
    #[error("edge {u} ~ {v} is not preserved: images {fu} and {fv} are not adjacent")]
    EdgeNotPreserved {
        u: ProductVertex,
        v: ProductVertex,
        fu: ProductVertex,
        fv: ProductVertex,
    },
    #[error("malformed homomorphism line {line:?}")]
    MalformedLine { line: String },
    #[error("vertex {vertex} is mapped more than once")]
    DuplicateSource { vertex: ProductVertex },
}

/// A total vertex map given by image ranks in lexicographic vertex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMap {
    images: Vec<usize>,
}

impl VertexMap {
    pub fn new(images: Vec<usize>) -> Self {
        VertexMap { images }
    }

    pub fn identity(len: usize) -> Self {
        VertexMap {
            images: (0..len).collect(),
        }
    }

    pub fn image(&self, rank: usize) -> usize {
        self.images[rank]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// First pair of ranks sharing an image, if any.
    pub fn first_injectivity_violation(&self) -> Option<(usize, usize)> {
        let mut seen: Vec<Option<usize>> = vec![None; self.images.len().max(1)];
        for (rank, &img) in self.images.iter().enumerate() {
            if img < seen.len() {
                if let Some(prev) = seen[img] {
                    return Some((prev, rank));
                }
                seen[img] = Some(rank);
            }
        }
        None
    }
}

/// Checks totality, image range, injectivity, and edge preservation of a raw
/// vertex map. Returns the first violation found.
pub fn verify_vertex_map(shape: &ProductShape, map: &VertexMap) -> Result<(), HomomorphismError> {
    let indexer = shape.indexer(HOM_VERTEX_CAP)?;
    let count = indexer.count();
    if map.len() != count {
        return Err(HomomorphismError::NotTotal {
            got: map.len(),
            expected: count,
        });
    }
    for (rank, &img) in map.images.iter().enumerate() {
        if img >= count {
            return Err(HomomorphismError::ImageOutOfRange {
                vertex: indexer.vertex(rank),
                image: img,
            });
        }
    }
    if let Some((a, b)) = map.first_injectivity_violation() {
        return Err(HomomorphismError::NotInjective {
            a: indexer.vertex(a),
            b: indexer.vertex(b),
            image: indexer.vertex(map.image(a)),
        });
    }
    let verts: Vec<ProductVertex> = (0..count).map(|r| indexer.vertex(r)).collect();
    for a in 0..count {
        for b in (a + 1)..count {
            if conormal_adjacent_coords(shape, verts[a].coords(), verts[b].coords()) {
                let (fa, fb) = (map.image(a), map.image(b));
                if !conormal_adjacent_coords(shape, verts[fa].coords(), verts[fb].coords()) {
                    return Err(HomomorphismError::EdgeNotPreserved {
                        u: verts[a].clone(),
                        v: verts[b].clone(),
                        fu: verts[fa].clone(),
                        fv: verts[fb].clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// A verified injective edge-preserving self-map of the co-normal product.
#[derive(Clone, Debug)]
pub struct Homomorphism {
    shape: Arc<ProductShape>,
    indexer: VertexIndexer,
    verts: Arc<Vec<ProductVertex>>,
    map: VertexMap,
}

impl PartialEq for Homomorphism {
    fn eq(&self, other: &Self) -> bool {
        *self.shape == *other.shape && self.map == other.map
    }
}
impl Eq for Homomorphism {}

impl Homomorphism {
    pub fn new(shape: ProductShape, map: VertexMap) -> Result<Self, HomomorphismError> {
        verify_vertex_map(&shape, &map)?;
        let indexer = shape.indexer(HOM_VERTEX_CAP)?;
        let verts = (0..indexer.count()).map(|r| indexer.vertex(r)).collect();
        Ok(Homomorphism {
            shape: Arc::new(shape),
            indexer,
            verts: Arc::new(verts),
            map,
        })
    }

    fn from_enumerator(
        shape: Arc<ProductShape>,
        indexer: VertexIndexer,
        verts: Arc<Vec<ProductVertex>>,
        map: VertexMap,
    ) -> Self {
        debug_assert!(verify_vertex_map(&shape, &map).is_ok());
        Homomorphism {
            shape,
            indexer,
            verts,
            map,
        }
    }

    pub fn identity(shape: ProductShape) -> Result<Self, HomomorphismError> {
        let count = shape.indexer(HOM_VERTEX_CAP)?.count();
        Homomorphism::new(shape, VertexMap::identity(count))
    }

    pub fn shape(&self) -> &ProductShape {
        &self.shape
    }

    pub fn vertex_map(&self) -> &VertexMap {
        &self.map
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn vertex(&self, rank: usize) -> &ProductVertex {
        &self.verts[rank]
    }

    pub fn image_rank(&self, rank: usize) -> usize {
        self.map.image(rank)
    }

    pub fn image_vertex(&self, rank: usize) -> &ProductVertex {
        &self.verts[self.map.image(rank)]
    }

    pub fn image_of(&self, v: &ProductVertex) -> Result<ProductVertex, BallGraphError> {
        self.shape.validate_vertex(v)?;
        Ok(self.image_vertex(self.indexer.rank(v)).clone())
    }

    /// The map as `source -> image` text lines, one vertex per line, in
    /// lexicographic source order.
    pub fn map_lines(&self) -> String {
        let mut out = String::new();
        for (rank, v) in self.verts.iter().enumerate() {
            out.push_str(&format!("{} -> {}\n", v, self.image_vertex(rank)));
        }
        out
    }

    /// Parses `source -> image` lines. Every vertex of the shape must appear
    /// exactly once as a source.
    pub fn parse_map_lines(shape: ProductShape, text: &str) -> Result<Self, HomomorphismError> {
        let indexer = shape.indexer(HOM_VERTEX_CAP)?;
        let count = indexer.count();
        let mut images: Vec<Option<usize>> = vec![None; count];
        let mut total = 0usize;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| HomomorphismError::MalformedLine {
                    line: line.to_string(),
                })?;
            let parse_vertex = |s: &str| -> Result<ProductVertex, HomomorphismError> {
                let coords = s
                    .trim()
                    .split(',')
                    .map(|c| c.trim().parse::<VertexId>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| HomomorphismError::MalformedLine {
                        line: line.to_string(),
                    })?;
                let v = ProductVertex::new(coords);
                shape.validate_vertex(&v)?;
                Ok(v)
            };
            let src = parse_vertex(lhs)?;
            let dst = parse_vertex(rhs)?;
            let rank = indexer.rank(&src);
            if images[rank].is_some() {
                return Err(HomomorphismError::DuplicateSource { vertex: src });
            }
            images[rank] = Some(indexer.rank(&dst));
            total += 1;
        }
        if total != count || images.iter().any(Option::is_none) {
            return Err(HomomorphismError::NotTotal {
                got: total,
                expected: count,
            });
        }
        let map = VertexMap::new(images.into_iter().map(Option::unwrap).collect());
        Homomorphism::new(shape, map)
    }
}

/// An injective, partner-equivariant map from one component sphere into
/// another, stored as the image of each sphere id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalMap {
    images: Vec<VertexId>,
}

impl LocalMap {
    pub fn new(images: Vec<VertexId>) -> Self {
        LocalMap { images }
    }

    pub fn identity(sphere_size: u32) -> Self {
        LocalMap {
            images: (0..sphere_size).collect(),
        }
    }

    pub fn sphere_size(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, s: VertexId) -> VertexId {
        self.images[s as usize]
    }

    pub fn images(&self) -> &[VertexId] {
        &self.images
    }

    pub fn first_injectivity_violation(&self) -> Option<(VertexId, VertexId)> {
        for a in 0..self.images.len() {
            for b in (a + 1)..self.images.len() {
                if self.images[a] == self.images[b] {
                    return Some((a as VertexId, b as VertexId));
                }
            }
        }
        None
    }

    /// `g(partner(s)) == partner(g(s))` for every sphere id.
    pub fn is_partner_equivariant(&self) -> bool {
        self.images.len() % 2 == 0
            && self
                .images
                .iter()
                .enumerate()
                .all(|(s, &img)| self.images[s ^ 1] == img ^ 1)
    }

    pub fn is_surjective_onto(&self, target_sphere_size: u32) -> bool {
        let mut hit = vec![false; target_sphere_size as usize];
        for &img in &self.images {
            if (img as usize) < hit.len() {
                hit[img as usize] = true;
            }
        }
        hit.iter().all(|&h| h)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorizationError {
    #[error("sigma has length {got}, expected {expected}")]
    SigmaArity { got: usize, expected: usize },
    #[error("sigma is not a permutation")]
    SigmaNotPermutation,
    #[error("local map {component} covers {got} sphere ids, expected {expected}")]
    LocalArity {
        component: usize,
        got: usize,
        expected: usize,
    },
    #[error("local map {component} image {image} is outside the target sphere")]
    LocalImageOutOfSphere { component: usize, image: VertexId },
    #[error("local map {component} is not injective")]
    LocalNotInjective { component: usize },
    #[error("local map {component} is not partner-equivariant")]
    LocalNotOdd { component: usize },
}

/// A coordinate permutation together with one sphere map per component.
///
/// The factorization identity: whenever a vertex has a sphere value at
/// coordinate `i`, the image vertex carries the mapped value at coordinate
/// `sigma[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub sigma: Vec<usize>,
    pub locals: Vec<LocalMap>,
}

impl Factorization {
    pub fn identity(shape: &ProductShape) -> Self {
        Factorization {
            sigma: (0..shape.n()).collect(),
            locals: shape
                .components()
                .iter()
                .map(|c| LocalMap::identity(c.sphere_size()))
                .collect(),
        }
    }

    pub fn validate(&self, shape: &ProductShape) -> Result<(), FactorizationError> {
        let n = shape.n();
        if self.sigma.len() != n {
            return Err(FactorizationError::SigmaArity {
                got: self.sigma.len(),
                expected: n,
            });
        }
        let mut seen = vec![false; n];
        for &t in &self.sigma {
            if t >= n || seen[t] {
                return Err(FactorizationError::SigmaNotPermutation);
            }
            seen[t] = true;
        }
        if self.locals.len() != n {
            return Err(FactorizationError::LocalArity {
                component: 0,
                got: self.locals.len(),
                expected: n,
            });
        }
        for (i, local) in self.locals.iter().enumerate() {
            let src = shape.component(i).sphere_size() as usize;
            if local.sphere_size() != src {
                return Err(FactorizationError::LocalArity {
                    component: i,
                    got: local.sphere_size(),
                    expected: src,
                });
            }
            let target = shape.component(self.sigma[i]).sphere_size();
            if let Some(&img) = local.images().iter().find(|&&img| img >= target) {
                return Err(FactorizationError::LocalImageOutOfSphere {
                    component: i,
                    image: img,
                });
            }
            if local.first_injectivity_violation().is_some() {
                return Err(FactorizationError::LocalNotInjective { component: i });
            }
            if !local.is_partner_equivariant() {
                return Err(FactorizationError::LocalNotOdd { component: i });
            }
        }
        Ok(())
    }

    /// Canonical text form, stable byte-for-byte for equal factorizations.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let sigma: Vec<String> = self.sigma.iter().map(|s| s.to_string()).collect();
        out.push_str(&format!("sigma: {}\n", sigma.join(" ")));
        for (i, local) in self.locals.iter().enumerate() {
            let imgs: Vec<String> = local.images().iter().map(|s| s.to_string()).collect();
            out.push_str(&format!("g[{}]: {}\n", i, imgs.join(" ")));
        }
        out
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorFailure {
    #[error("component {0} has an empty sphere; factorization needs a pair in every component")]
    EmptySphere(usize),
    #[error("image of extreme vertex {x} is not extreme: {y}")]
    ExtremeImageNotExtreme { x: ProductVertex, y: ProductVertex },
    #[error("image of {x} leaves the hypercube of the image of its base vertex {base}")]
    ImageLeavesHypercube { x: ProductVertex, base: ProductVertex },
    #[error("flipping coordinate {coord} of {x} does not map to a single-coordinate flip")]
    ImageNotCartesianEdge { x: ProductVertex, coord: usize },
    #[error("coordinate permutation extracted at the base vertex is not a bijection")]
    SigmaNotPermutation,
    #[error(
        "gluing conflict at {x}: flipping coordinate {coord} flips image coordinate {found}, expected {expected}"
    )]
    GluingConflict {
        x: ProductVertex,
        coord: usize,
        found: usize,
        expected: usize,
    },
    #[error(
        "local map conflict in component {component}: sphere id {sphere_id} maps to both {first} and {second}"
    )]
    LocalMapConflict {
        component: usize,
        sphere_id: VertexId,
        first: VertexId,
        second: VertexId,
    },
    #[error("recovered local map for component {component} is invalid: {source}")]
    LocalMapInvalid {
        component: usize,
        source: FactorizationError,
    },
    #[error("factorization identity fails at vertex {vertex}, coordinate {coord}")]
    IdentityViolation { vertex: ProductVertex, coord: usize },
}

/// Factors an injective homomorphism into a coordinate permutation and a
/// family of local sphere maps, verifying the factorization identity at
/// every sphere coordinate of every vertex.
///
/// Requires every component to have at least one pair (nonempty extreme
/// class). A failure would falsify the factorization property and carries a
/// counterexample vertex.
pub fn factor(hom: &Homomorphism) -> Result<Factorization, FactorFailure> {
    let shape = hom.shape();
    let n = shape.n();
    for (i, c) in shape.components().iter().enumerate() {
        if c.pairs() == 0 {
            return Err(FactorFailure::EmptySphere(i));
        }
    }
    let verts = &hom.verts;
    let indexer = &hom.indexer;

    let extremes: Vec<usize> = (0..verts.len())
        .filter(|&r| vertex_class_coords(shape, verts[r].coords()) == VertexClass::Extreme)
        .collect();
    debug_assert!(!extremes.is_empty());

    // Rank after flipping coordinate `i` of the vertex at `rank` to the
    // partner value.
    let flip = |rank: usize, i: usize| -> usize {
        let old = verts[rank].coord(i);
        indexer.rank_with_coord(rank, i, old, old ^ 1)
    };

    // Extract sigma from the single-coordinate flips at the base vertex.
    let base = extremes[0];
    let mut sigma = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    for i in 0..n {
        let y = verts[hom.image_rank(base)].coords();
        let yf = verts[hom.image_rank(flip(base, i))].coords();
        let j = single_flip_coord(shape, y, yf).ok_or_else(|| {
            FactorFailure::ImageNotCartesianEdge {
                x: verts[base].clone(),
                coord: i,
            }
        })?;
        if seen[j] {
            return Err(FactorFailure::SigmaNotPermutation);
        }
        seen[j] = true;
        sigma[i] = j;
    }

    // Per-component local maps, filled while walking every extreme vertex.
    let mut locals: Vec<Vec<Option<VertexId>>> = shape
        .components()
        .iter()
        .map(|c| vec![None; c.sphere_size() as usize])
        .collect();

    for &e in &extremes {
        let y_rank = hom.image_rank(e);
        let y = &verts[y_rank];
        if vertex_class_coords(shape, y.coords()) != VertexClass::Extreme {
            return Err(FactorFailure::ExtremeImageNotExtreme {
                x: verts[e].clone(),
                y: y.clone(),
            });
        }

        // Members of the hypercube of e, by agreement mask.
        let cube: Vec<usize> = (0usize..(1 << n))
            .map(|mask| {
                let mut r = e;
                for i in 0..n {
                    if mask & (1 << i) == 0 {
                        r = flip(r, i);
                    }
                }
                r
            })
            .collect();
        // The image hypercube, as a sorted rank list for membership tests.
        let mut image_cube: Vec<usize> = (0usize..(1 << n))
            .map(|mask| {
                let mut r = y_rank;
                for i in 0..n {
                    if mask & (1 << i) == 0 {
                        r = flip(r, i);
                    }
                }
                r
            })
            .collect();
        image_cube.sort_unstable();

        for &t in &cube {
            let yt_rank = hom.image_rank(t);
            if image_cube.binary_search(&yt_rank).is_err() {
                return Err(FactorFailure::ImageLeavesHypercube {
                    x: verts[t].clone(),
                    base: verts[e].clone(),
                });
            }
            // Every hypercube edge must map to a Cartesian edge flipping
            // exactly the sigma-image coordinate.
            let yt = verts[yt_rank].coords();
            for i in 0..n {
                let yf = verts[hom.image_rank(flip(t, i))].coords();
                match single_flip_coord(shape, yt, yf) {
                    None => {
                        return Err(FactorFailure::ImageNotCartesianEdge {
                            x: verts[t].clone(),
                            coord: i,
                        })
                    }
                    Some(j) if j != sigma[i] => {
                        return Err(FactorFailure::GluingConflict {
                            x: verts[t].clone(),
                            coord: i,
                            found: j,
                            expected: sigma[i],
                        })
                    }
                    _ => {}
                }
            }
        }

        // Record the local images seen at this extreme vertex.
        for i in 0..n {
            let s = verts[e].coord(i);
            let target = y.coord(sigma[i]);
            match locals[i][s as usize] {
                None => locals[i][s as usize] = Some(target),
                Some(prev) if prev != target => {
                    return Err(FactorFailure::LocalMapConflict {
                        component: i,
                        sphere_id: s,
                        first: prev,
                        second: target,
                    })
                }
                _ => {}
            }
        }
    }

    let locals: Vec<LocalMap> = locals
        .into_iter()
        .map(|images| LocalMap::new(images.into_iter().map(|o| o.expect("sphere covered")).collect()))
        .collect();

    let fact = Factorization { sigma, locals };
    if let Err(source) = fact.validate(shape) {
        let component = match &source {
            FactorizationError::LocalImageOutOfSphere { component, .. }
            | FactorizationError::LocalNotInjective { component }
            | FactorizationError::LocalNotOdd { component }
            | FactorizationError::LocalArity { component, .. } => *component,
            _ => 0,
        };
        return Err(FactorFailure::LocalMapInvalid { component, source });
    }

    // The identity must hold at every sphere coordinate of every vertex,
    // extreme or not.
    if let Some((vertex, coord)) = identity_violation(hom, &fact) {
        return Err(FactorFailure::IdentityViolation { vertex, coord });
    }

    Ok(fact)
}

/// First vertex and coordinate where the factorization identity fails.
fn identity_violation(hom: &Homomorphism, fact: &Factorization) -> Option<(ProductVertex, usize)> {
    let shape = hom.shape();
    let n = shape.n();
    for (rank, q) in hom.verts.iter().enumerate() {
        let img = hom.image_vertex(rank);
        for i in 0..n {
            let s = q.coord(i);
            if shape.component(i).in_sphere(s) && img.coord(fact.sigma[i]) != fact.locals[i].image(s)
            {
                return Some((q.clone(), i));
            }
        }
    }
    None
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error(transparent)]
    Factorization(#[from] FactorizationError),
    #[error("interior assignment has {got} component maps, expected {expected}")]
    InteriorArity { got: usize, expected: usize },
    #[error("interior assignment for component {component} covers {got} vertices, expected {expected}")]
    InteriorComponentArity {
        component: usize,
        got: usize,
        expected: usize,
    },
    #[error("interior image {image} is not a vertex of component {target}")]
    InteriorImageOutOfRange { target: usize, image: VertexId },
    #[error("component map {component} is not injective (interior image {image} collides)")]
    ComponentMapCollision { component: usize, image: VertexId },
    #[error(transparent)]
    Hom(#[from] HomomorphismError),
}

/// Images for the isolated vertices of each component: entry `k` of
/// component `i` is the image in component `sigma[i]` of the isolated vertex
/// with id `sphere_size + k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorAssignment {
    pub per_component: Vec<Vec<VertexId>>,
}

impl InteriorAssignment {
    /// Maps isolated vertex `sphere_size + k` of component `i` to the vertex
    /// with the same isolated slot in the target component. Only valid when
    /// paired components have matching sizes (true for the identity
    /// factorization).
    pub fn slot_preserving(shape: &ProductShape, fact: &Factorization) -> Self {
        InteriorAssignment {
            per_component: shape
                .components()
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let target = shape.component(fact.sigma[i]);
                    (0..c.isolated())
                        .map(|k| target.sphere_size() + k)
                        .collect()
                })
                .collect(),
        }
    }
}

/// Synthesizes the componentwise homomorphism determined by a factorization
/// plus images for the isolated vertices.
pub fn build_from_factors(
    shape: &ProductShape,
    fact: &Factorization,
    interior: &InteriorAssignment,
) -> Result<Homomorphism, BuildError> {
    fact.validate(shape)?;
    let n = shape.n();
    if interior.per_component.len() != n {
        return Err(BuildError::InteriorArity {
            got: interior.per_component.len(),
            expected: n,
        });
    }
    // Total per-component maps.
    let mut component_maps: Vec<Vec<VertexId>> = Vec::with_capacity(n);
    for i in 0..n {
        let comp = shape.component(i);
        let target = shape.component(fact.sigma[i]);
        let iso = &interior.per_component[i];
        if iso.len() != comp.isolated() as usize {
            return Err(BuildError::InteriorComponentArity {
                component: i,
                got: iso.len(),
                expected: comp.isolated() as usize,
            });
        }
        let mut images: Vec<VertexId> = fact.locals[i].images().to_vec();
        let mut used = vec![false; target.vertex_count() as usize];
        for &img in &images {
            used[img as usize] = true;
        }
        for &img in iso {
            if img >= target.vertex_count() {
                return Err(BuildError::InteriorImageOutOfRange {
                    target: fact.sigma[i],
                    image: img,
                });
            }
            if used[img as usize] {
                return Err(BuildError::ComponentMapCollision {
                    component: i,
                    image: img,
                });
            }
            used[img as usize] = true;
            images.push(img);
        }
        component_maps.push(images);
    }

    let indexer = shape.indexer(HOM_VERTEX_CAP).map_err(HomomorphismError::from)?;
    let count = indexer.count();
    let mut images = Vec::with_capacity(count);
    for rank in 0..count {
        let v = indexer.vertex(rank);
        let mut coords = vec![0 as VertexId; n];
        for i in 0..n {
            coords[fact.sigma[i]] = component_maps[i][v.coord(i) as usize];
        }
        images.push(indexer.rank(&ProductVertex::new(coords)));
    }
    Ok(Homomorphism::new(shape.clone(), VertexMap::new(images))?)
}

/// Outcome of the Cartesian-edge preservation check on extreme vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ESquareCheck {
    pub pass: bool,
    pub violation: Option<(ProductVertex, ProductVertex)>,
}

/// For all extreme `x ~' y`, the images must satisfy `f(x) ~' f(y)`.
pub fn check_e_square_homomorphism(hom: &Homomorphism) -> ESquareCheck {
    let shape = hom.shape();
    let extremes: Vec<usize> = (0..hom.vertex_count())
        .filter(|&r| vertex_class_coords(shape, hom.vertex(r).coords()) == VertexClass::Extreme)
        .collect();
    for (ai, &a) in extremes.iter().enumerate() {
        for &b in &extremes[ai + 1..] {
            if cartesian_adjacent_coords(shape, hom.vertex(a).coords(), hom.vertex(b).coords())
                && !cartesian_adjacent_coords(
                    shape,
                    hom.image_vertex(a).coords(),
                    hom.image_vertex(b).coords(),
                )
            {
                return ESquareCheck {
                    pass: false,
                    violation: Some((hom.vertex(a).clone(), hom.vertex(b).clone())),
                };
            }
        }
    }
    ESquareCheck {
        pass: true,
        violation: None,
    }
}

/// Outcome of the off-extreme factorization identity check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorCheck {
    pub pass: bool,
    pub violation: Option<(ProductVertex, usize)>,
}

/// The sphere-coordinate constraint binds at every vertex, not only on the
/// extreme class.
pub fn check_interior_lemma(hom: &Homomorphism, fact: &Factorization) -> InteriorCheck {
    match identity_violation(hom, fact) {
        None => InteriorCheck {
            pass: true,
            violation: None,
        },
        Some(v) => InteriorCheck {
            pass: false,
            violation: Some(v),
        },
    }
}

/// Outcome of the bijective-factors check: both image hypotheses computed
/// exhaustively, and surjectivity of the local maps when either holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectiveFactorsCheck {
    pub sphere_hypothesis: bool,
    pub extreme_hypothesis: bool,
    /// `None` when neither hypothesis holds (conclusion not evaluated).
    pub all_surjective: Option<bool>,
    pub witness: Option<(usize, VertexId)>,
}

impl BijectiveFactorsCheck {
    /// Hypothesis-held implies conclusion-held; vacuously true otherwise.
    pub fn pass(&self) -> bool {
        match self.all_surjective {
            Some(ok) => ok,
            None => true,
        }
    }
}

fn sphere_ranks(hom: &Homomorphism) -> Vec<usize> {
    let shape = hom.shape();
    (0..hom.vertex_count())
        .filter(|&r| vertex_class_coords(shape, hom.vertex(r).coords()) != VertexClass::Interior)
        .collect()
}

fn extreme_ranks(hom: &Homomorphism) -> Vec<usize> {
    let shape = hom.shape();
    (0..hom.vertex_count())
        .filter(|&r| vertex_class_coords(shape, hom.vertex(r).coords()) == VertexClass::Extreme)
        .collect()
}

/// `S (subset of) f(S)`: every sphere vertex is the image of a sphere vertex.
pub fn sphere_image_hypothesis(hom: &Homomorphism) -> bool {
    let sphere = sphere_ranks(hom);
    let mut hit = BitSet::empty(hom.vertex_count());
    for &r in &sphere {
        hit.insert(hom.image_rank(r));
    }
    sphere.iter().all(|&r| hit.contains(r))
}

/// `E (subset of) f(E)`: every extreme vertex is the image of an extreme one.
pub fn extreme_image_hypothesis(hom: &Homomorphism) -> bool {
    let extremes = extreme_ranks(hom);
    let mut hit = BitSet::empty(hom.vertex_count());
    for &r in &extremes {
        hit.insert(hom.image_rank(r));
    }
    extremes.iter().all(|&r| hit.contains(r))
}

pub fn check_bijective_factors(hom: &Homomorphism, fact: &Factorization) -> BijectiveFactorsCheck {
    let sphere_hypothesis = sphere_image_hypothesis(hom);
    let extreme_hypothesis = extreme_image_hypothesis(hom);
    if !sphere_hypothesis && !extreme_hypothesis {
        return BijectiveFactorsCheck {
            sphere_hypothesis,
            extreme_hypothesis,
            all_surjective: None,
            witness: None,
        };
    }
    let shape = hom.shape();
    for (i, local) in fact.locals.iter().enumerate() {
        let target = shape.component(fact.sigma[i]).sphere_size();
        if !local.is_surjective_onto(target) {
            let mut hit = vec![false; target as usize];
            for &img in local.images() {
                hit[img as usize] = true;
            }
            let missing = hit.iter().position(|&h| !h).unwrap() as VertexId;
            return BijectiveFactorsCheck {
                sphere_hypothesis,
                extreme_hypothesis,
                all_surjective: Some(false),
                witness: Some((i, missing)),
            };
        }
    }
    BijectiveFactorsCheck {
        sphere_hypothesis,
        extreme_hypothesis,
        all_surjective: Some(true),
        witness: None,
    }
}

/// Outcome of the sphere-implies-extreme check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SphereExtremeOutcome {
    /// The sphere image hypothesis does not hold; nothing to conclude.
    HypothesisNotMet,
    Holds,
    Violated { extreme: ProductVertex },
}

impl SphereExtremeOutcome {
    pub fn pass(&self) -> bool {
        !matches!(self, SphereExtremeOutcome::Violated { .. })
    }
}

/// If every sphere vertex has a sphere preimage, every extreme vertex must
/// have an extreme preimage.
pub fn check_sphere_implies_extreme(hom: &Homomorphism) -> SphereExtremeOutcome {
    sphere_implies_extreme_impl(hom.shape(), &hom.verts, &hom.map)
}

/// Raw-map variant of [`check_sphere_implies_extreme`]: assumes totality and
/// in-range images but not edge preservation, so the hypothesis-not-met
/// reporting path can be exercised on maps that are not homomorphisms.
pub fn check_sphere_implies_extreme_map(
    shape: &ProductShape,
    map: &VertexMap,
) -> Result<SphereExtremeOutcome, HomomorphismError> {
    let indexer = shape.indexer(HOM_VERTEX_CAP)?;
    let count = indexer.count();
    if map.len() != count {
        return Err(HomomorphismError::NotTotal {
            got: map.len(),
            expected: count,
        });
    }
    if let Some((rank, &img)) = map
        .images()
        .iter()
        .enumerate()
        .find(|(_, &img)| img >= count)
    {
        return Err(HomomorphismError::ImageOutOfRange {
            vertex: indexer.vertex(rank),
            image: img,
        });
    }
    let verts: Vec<ProductVertex> = (0..count).map(|r| indexer.vertex(r)).collect();
    Ok(sphere_implies_extreme_impl(shape, &verts, map))
}

fn sphere_implies_extreme_impl(
    shape: &ProductShape,
    verts: &[ProductVertex],
    map: &VertexMap,
) -> SphereExtremeOutcome {
    let count = verts.len();
    let classes: Vec<VertexClass> = verts
        .iter()
        .map(|v| vertex_class_coords(shape, v.coords()))
        .collect();
    let mut sphere_hit = BitSet::empty(count);
    let mut extreme_hit = BitSet::empty(count);
    for r in 0..count {
        match classes[r] {
            VertexClass::Extreme => {
                sphere_hit.insert(map.image(r));
                extreme_hit.insert(map.image(r));
            }
            VertexClass::SphereNonExtreme => {
                sphere_hit.insert(map.image(r));
            }
            VertexClass::Interior => {}
        }
    }
    let hypothesis = (0..count)
        .filter(|&r| classes[r] != VertexClass::Interior)
        .all(|r| sphere_hit.contains(r));
    if !hypothesis {
        return SphereExtremeOutcome::HypothesisNotMet;
    }
    for r in 0..count {
        if classes[r] == VertexClass::Extreme && !extreme_hit.contains(r) {
            return SphereExtremeOutcome::Violated {
                extreme: verts[r].clone(),
            };
        }
    }
    SphereExtremeOutcome::Holds
}

/// Streams every injective edge-preserving self-map of the co-normal
/// product, in lexicographic order of the image vector. Backtracking with
/// adjacency pruning; deterministic.
pub struct HomEnumerator {
    shape: Arc<ProductShape>,
    indexer: VertexIndexer,
    verts: Arc<Vec<ProductVertex>>,
    adjacency: Vec<BitSet>,
    /// For each rank, its adjacent ranks with smaller index.
    earlier_neighbors: Vec<Vec<usize>>,
    images: Vec<usize>,
    used: BitSet,
    cands: Vec<BitSet>,
    pos: Vec<usize>,
    depth: usize,
    state: EnumState,
}

#[derive(PartialEq)]
enum EnumState {
    Running,
    Exhausted,
}

impl HomEnumerator {
    pub fn new(shape: ProductShape, cap: usize) -> Result<Self, BallGraphError> {
        Self::with_prefix(shape, cap, &[])
    }

    /// Restricts the stream to maps whose first `prefix.len()` images equal
    /// `prefix`, enabling partitioned parallel verification.
    pub fn with_prefix(
        shape: ProductShape,
        cap: usize,
        prefix: &[usize],
    ) -> Result<Self, BallGraphError> {
        let indexer = shape.indexer(cap)?;
        let count = indexer.count();
        let verts: Vec<ProductVertex> = (0..count).map(|r| indexer.vertex(r)).collect();
        let mut adjacency = vec![BitSet::empty(count); count];
        for a in 0..count {
            for b in (a + 1)..count {
                if conormal_adjacent_coords(&shape, verts[a].coords(), verts[b].coords()) {
                    adjacency[a].insert(b);
                    adjacency[b].insert(a);
                }
            }
        }
        let earlier_neighbors: Vec<Vec<usize>> = (0..count)
            .map(|r| (0..r).filter(|&u| adjacency[r].contains(u)).collect())
            .collect();
        let mut e = HomEnumerator {
            shape: Arc::new(shape),
            indexer,
            verts: Arc::new(verts),
            adjacency,
            earlier_neighbors,
            images: vec![0; count],
            used: BitSet::empty(count),
            cands: vec![BitSet::empty(count); count + 1],
            pos: vec![0; count + 1],
            depth: 0,
            state: EnumState::Running,
        };
        if count == 0 {
            e.state = EnumState::Exhausted;
            return Ok(e);
        }
        e.cands[0] = BitSet::full(count);
        e.pos[0] = 0;
        // Seed the stack with the fixed prefix.
        for (d, &img) in prefix.iter().enumerate() {
            if img >= count || e.used.contains(img) || !e.cands[d].contains(img) {
                e.state = EnumState::Exhausted;
                return Ok(e);
            }
            e.images[d] = img;
            e.used.insert(img);
            // Lock this level to the single prefix choice.
            e.cands[d] = BitSet::empty(count);
            e.cands[d].insert(img);
            e.pos[d] = img + 1;
            if d + 1 < count {
                e.push_candidates(d + 1);
            }
        }
        e.depth = prefix.len().min(count.saturating_sub(1));
        if prefix.len() >= count && count > 0 {
            // Fully specified map: validate by running the scan at the last
            // level; depth stays at count - 1 with its candidate consumed.
            e.depth = count - 1;
            let last = prefix[count - 1];
            e.used.remove(last);
            e.pos[count - 1] = last;
        }
        Ok(e)
    }

    fn push_candidates(&mut self, depth: usize) {
        let count = self.verts.len();
        let mut cands = BitSet::full(count);
        for &u in &self.earlier_neighbors[depth] {
            cands.intersect_with(&self.adjacency[self.images[u]]);
        }
        self.cands[depth] = cands;
        self.pos[depth] = 0;
    }
}

impl Iterator for HomEnumerator {
    type Item = Homomorphism;

    fn next(&mut self) -> Option<Homomorphism> {
        if self.state == EnumState::Exhausted {
            return None;
        }
        let count = self.verts.len();
        loop {
            // Scan for the next unused candidate at the current depth.
            let mut choice = None;
            let mut from = self.pos[self.depth];
            while let Some(b) = self.cands[self.depth].first_at_or_after(from) {
                if !self.used.contains(b) {
                    choice = Some(b);
                    break;
                }
                from = b + 1;
            }
            match choice {
                None => {
                    if self.depth == 0 {
                        self.state = EnumState::Exhausted;
                        return None;
                    }
                    self.depth -= 1;
                    self.used.remove(self.images[self.depth]);
                }
                Some(b) => {
                    self.pos[self.depth] = b + 1;
                    self.images[self.depth] = b;
                    if self.depth + 1 == count {
                        let hom = Homomorphism::from_enumerator(
                            Arc::clone(&self.shape),
                            self.indexer.clone(),
                            Arc::clone(&self.verts),
                            VertexMap::new(self.images.clone()),
                        );
                        return Some(hom);
                    }
                    self.used.insert(b);
                    self.depth += 1;
                    self.push_candidates(self.depth);
                }
            }
        }
    }
}

/// Convenience wrapper with the default vertex cap.
pub fn enumerate_injective_homomorphisms(
    shape: &ProductShape,
) -> Result<HomEnumerator, BallGraphError> {
    HomEnumerator::new(shape.clone(), DEFAULT_HOM_ENUMERATION_CAP)
}

/// A uniformly random valid factorization plus interior assignment for a
/// shape. The permutation is drawn within classes of components with equal
/// `(pairs, isolated)` sizes, which keeps every local and interior map
/// injective by construction.
pub fn random_factorization<R: Rng>(
    shape: &ProductShape,
    rng: &mut R,
) -> (Factorization, InteriorAssignment) {
    let n = shape.n();
    // Group component indices by size class and shuffle targets per class.
    let mut sigma = vec![0usize; n];
    let mut classes: Vec<((u32, u32), Vec<usize>)> = Vec::new();
    for (i, c) in shape.components().iter().enumerate() {
        let key = (c.pairs(), c.isolated());
        match classes.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => classes.push((key, vec![i])),
        }
    }
    for (_, members) in &classes {
        let mut targets = members.clone();
        targets.shuffle(rng);
        for (&src, &dst) in members.iter().zip(&targets) {
            sigma[src] = dst;
        }
    }

    let mut locals = Vec::with_capacity(n);
    let mut interiors = Vec::with_capacity(n);
    for (i, c) in shape.components().iter().enumerate() {
        let pairs = c.pairs() as usize;
        // Random bijection on pairs plus a random orientation per pair.
        let mut pair_targets: Vec<usize> = (0..pairs).collect();
        pair_targets.shuffle(rng);
        let mut images = vec![0 as VertexId; 2 * pairs];
        for (k, &t) in pair_targets.iter().enumerate() {
            let flip: bool = rng.random();
            let lo = (2 * t) as VertexId;
            if flip {
                images[2 * k] = lo ^ 1;
                images[2 * k + 1] = lo;
            } else {
                images[2 * k] = lo;
                images[2 * k + 1] = lo ^ 1;
            }
        }
        locals.push(LocalMap::new(images));

        let iso = c.isolated() as usize;
        let mut iso_targets: Vec<VertexId> = (0..iso as u32)
            .map(|k| shape.component(sigma[i]).sphere_size() + k)
            .collect();
        iso_targets.shuffle(rng);
        interiors.push(iso_targets);
    }
    (
        Factorization { sigma, locals },
        InteriorAssignment {
            per_component: interiors,
        },
    )
}
