//! Finite-dimensional lp components, their max-norm sums, and the numeric
//! verification pipeline: the ball-to-graph bridge, homogeneous extensions
//! of odd sphere map families, tangent-ball intersection estimates, and
//! sampled isometry certification.
//!
//! Strictly convex components are realized as lp with 1 < p < infinity;
//! p = 1 and the max norm are admitted only as control cases that
//! demonstrate why the strict-convexity hypothesis matters. Default sphere
//! maps are signed permutations (any p) and orthogonal matrices (p = 2),
//! the odd sphere bijections available in closed form; a custom-map hook
//! accepts user-supplied odd maps.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::sampling::{random_orthogonal, random_signed_permutation, rng_from_seed, standard_normal};

#[derive(Debug, Error, Clone)]
pub enum BanachError {
    #[error("component dimension must be at least 1")]
    ZeroDimension,
    #[error("lp exponent {0} is out of range (need p >= 1)")]
    BadExponent(f64),
    #[error("space must have at least one component")]
    EmptySpace,
    #[error("point has {got} blocks, space has {expected} components")]
    BlockArity { got: usize, expected: usize },
    #[error("block {index} has dimension {got}, component expects {expected}")]
    BlockDimension {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("point lies outside the unit ball: block {index} has norm {norm}")]
    OutsideBall { index: usize, norm: f64 },
    #[error("sigma is not a permutation of the component indices")]
    SigmaNotPermutation,
    #[error("sphere map {index}: {reason}")]
    BadSphereMap { index: usize, reason: String },
    #[error("sphere map {index} has no closed-form inverse")]
    NoInverse { index: usize },
    #[error("cannot sample the requested norm profile")]
    SamplingFailure,
    #[error("balls are not tangent: center gap {gap}, radius sum {radius_sum}")]
    NotTangent { gap: f64, radius_sum: f64 },
    #[error("map decreases the distance of points {i} and {j}: {before} -> {after}")]
    NonContractive {
        i: usize,
        j: usize,
        before: f64,
        after: f64,
    },
    #[error("image of point {index} is not in the point set (nearest miss {nearest})")]
    ImageNotInPointSet { index: usize, nearest: f64 },
    #[error("induced vertex map is not injective: points {i} and {j} share an image")]
    InducedNotInjective { i: usize, j: usize },
    #[error("induced map breaks the distance-2 edge between points {i} and {j}")]
    InducedEdgeBroken { i: usize, j: usize },
}

/// The norm exponent of a component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn is_strictly_convex(self) -> bool {
        matches!(self, PExponent::Finite(p) if p > 1.0 && p.is_finite())
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

/// A finite-dimensional lp space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpComponent {
    pub dim: usize,
    pub p: PExponent,
}

impl LpComponent {
    pub fn new(dim: usize, p: PExponent) -> Result<Self, BanachError> {
        if dim == 0 {
            return Err(BanachError::ZeroDimension);
        }
        if let PExponent::Finite(v) = p {
            if !(v >= 1.0) || !v.is_finite() {
                return Err(BanachError::BadExponent(v));
            }
        }
        Ok(LpComponent { dim, p })
    }

    pub fn is_strictly_convex(&self) -> bool {
        self.p.is_strictly_convex()
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.p {
            PExponent::Infinity => x.iter().fold(0.0, |m, &v| m.max(v.abs())),
            PExponent::Finite(p) if (p - 1.0).abs() < 1e-12 => x.iter().map(|v| v.abs()).sum(),
            PExponent::Finite(p) if (p - 2.0).abs() < 1e-12 => {
                x.iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            PExponent::Finite(p) => x
                .iter()
                .map(|v| v.abs().powf(p))
                .sum::<f64>()
                .powf(1.0 / p),
        }
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.norm(&diff)
    }

    /// An approximately uniform unit vector: Gaussian normalization for
    /// p = 2, normalized exponential-power coordinates for other finite p,
    /// and normalized uniform coordinates for the max norm.
    pub fn sample_sphere<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let raw: Vec<f64> = match self.p {
                PExponent::Finite(p) if (p - 2.0).abs() < 1e-12 => {
                    (0..self.dim).map(|_| standard_normal(rng)).collect()
                }
                PExponent::Finite(p) => {
                    let gamma = Gamma::new(1.0 / p, 1.0).expect("valid gamma shape");
                    (0..self.dim)
                        .map(|_| {
                            let mag = gamma.sample(rng).powf(1.0 / p);
                            if rng.random::<bool>() {
                                mag
                            } else {
                                -mag
                            }
                        })
                        .collect()
                }
                PExponent::Infinity => (0..self.dim)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            };
            let norm = self.norm(&raw);
            if norm > 1e-9 {
                return raw.iter().map(|v| v / norm).collect();
            }
        }
    }
}

/// A point of the max-norm sum, one coordinate block per component.
#[derive(Clone, Debug, PartialEq)]
pub struct SumSpacePoint {
    pub blocks: Vec<Vec<f64>>,
}

impl SumSpacePoint {
    pub fn new(blocks: Vec<Vec<f64>>) -> Self {
        SumSpacePoint { blocks }
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.blocks[i]
    }
}

/// The max-norm direct sum of lp components.
#[derive(Clone, Debug, PartialEq)]
pub struct SumSpace {
    components: Vec<LpComponent>,
}

impl SumSpace {
    pub fn new(components: Vec<LpComponent>) -> Result<Self, BanachError> {
        if components.is_empty() {
            return Err(BanachError::EmptySpace);
        }
        Ok(SumSpace { components })
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[LpComponent] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &LpComponent {
        &self.components[i]
    }

    pub fn validate_point(&self, z: &SumSpacePoint) -> Result<(), BanachError> {
        if z.blocks.len() != self.n() {
            return Err(BanachError::BlockArity {
                got: z.blocks.len(),
                expected: self.n(),
            });
        }
        for (i, (block, comp)) in z.blocks.iter().zip(&self.components).enumerate() {
            if block.len() != comp.dim {
                return Err(BanachError::BlockDimension {
                    index: i,
                    got: block.len(),
                    expected: comp.dim,
                });
            }
        }
        Ok(())
    }

    pub fn block_norms(&self, z: &SumSpacePoint) -> Vec<f64> {
        z.blocks
            .iter()
            .zip(&self.components)
            .map(|(b, c)| c.norm(b))
            .collect()
    }

    /// The max norm over component norms.
    pub fn norm(&self, z: &SumSpacePoint) -> f64 {
        self.block_norms(z).into_iter().fold(0.0, f64::max)
    }

    pub fn distance(&self, a: &SumSpacePoint, b: &SumSpacePoint) -> f64 {
        a.blocks
            .iter()
            .zip(&b.blocks)
            .zip(&self.components)
            .map(|((x, y), c)| c.distance(x, y))
            .fold(0.0, f64::max)
    }

    pub fn zero(&self) -> SumSpacePoint {
        SumSpacePoint::new(self.components.iter().map(|c| vec![0.0; c.dim]).collect())
    }

    pub fn negate(&self, z: &SumSpacePoint) -> SumSpacePoint {
        SumSpacePoint::new(
            z.blocks
                .iter()
                .map(|b| b.iter().map(|v| -v).collect())
                .collect(),
        )
    }

    pub fn scale(&self, alpha: f64, z: &SumSpacePoint) -> SumSpacePoint {
        SumSpacePoint::new(
            z.blocks
                .iter()
                .map(|b| b.iter().map(|v| alpha * v).collect())
                .collect(),
        )
    }

    /// A random ball point with the requested number of non-unit blocks.
    /// Unit blocks are sphere samples; free blocks get a uniform radius and
    /// are occasionally exactly zero.
    pub fn sample_with_free_blocks<R: Rng>(&self, free: usize, rng: &mut R) -> SumSpacePoint {
        let n = self.n();
        let mut indices: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        let free_set: Vec<usize> = indices.into_iter().take(free.min(n)).collect();
        let blocks = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let unit = c.sample_sphere(rng);
                if free_set.contains(&i) {
                    if rng.random::<f64>() < 0.1 {
                        vec![0.0; c.dim]
                    } else {
                        let r: f64 = rng.random_range(0.0..0.999);
                        unit.iter().map(|v| r * v).collect()
                    }
                } else {
                    unit
                }
            })
            .collect();
        SumSpacePoint::new(blocks)
    }

    /// A random ball point with all blocks free.
    pub fn sample_ball<R: Rng>(&self, rng: &mut R) -> SumSpacePoint {
        self.sample_with_free_blocks(self.n(), rng)
    }
}

/// Extreme points of the unit ball: every block on its component sphere.
/// `z` must be in the ball within `tol`.
pub fn is_extreme(space: &SumSpace, z: &SumSpacePoint, tol: f64) -> Result<bool, BanachError> {
    space.validate_point(z)?;
    let norms = space.block_norms(z);
    for (index, &norm) in norms.iter().enumerate() {
        if norm > 1.0 + tol {
            return Err(BanachError::OutsideBall { index, norm });
        }
    }
    Ok(norms.iter().all(|&r| (r - 1.0).abs() <= tol))
}

/// Edge sets induced on a finite ball point set: distance-2 pairs, and
/// distance-2 pairs active in exactly one block with the other blocks equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallGraphEdges {
    pub conormal: Vec<(usize, usize)>,
    pub cartesian: Vec<(usize, usize)>,
}

pub fn ball_to_graph(
    space: &SumSpace,
    points: &[SumSpacePoint],
    tol: f64,
) -> Result<BallGraphEdges, BanachError> {
    for z in points {
        space.validate_point(z)?;
    }
    let mut conormal = Vec::new();
    let mut cartesian = Vec::new();
    for a in 0..points.len() {
        for b in (a + 1)..points.len() {
            let dists: Vec<f64> = space
                .components
                .iter()
                .enumerate()
                .map(|(i, c)| c.distance(points[a].block(i), points[b].block(i)))
                .collect();
            let maxd = dists.iter().fold(0.0f64, |m, &d| m.max(d));
            if (maxd - 2.0).abs() <= tol {
                conormal.push((a, b));
                let active: Vec<usize> = (0..dists.len())
                    .filter(|&i| (dists[i] - 2.0).abs() <= tol)
                    .collect();
                if active.len() == 1 && dists.iter().enumerate().all(|(i, &d)| i == active[0] || d <= tol)
                {
                    cartesian.push((a, b));
                }
            }
        }
    }
    Ok(BallGraphEdges { conormal, cartesian })
}

type CustomMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// An odd unit-sphere bijection between two components of equal dimension.
#[derive(Clone)]
pub enum SphereMap {
    /// `out[k] = signs[k] * x[perm[k]]`. Preserves every lp norm.
    SignedPermutation { perm: Vec<usize>, signs: Vec<f64> },
    /// Row-major orthogonal matrix; preserves the l2 norm only.
    Orthogonal { rows: Vec<Vec<f64>> },
    /// User-supplied odd sphere map; no closed-form inverse.
    Custom(CustomMap),
}

impl fmt::Debug for SphereMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SphereMap::SignedPermutation { perm, signs } => f
                .debug_struct("SignedPermutation")
                .field("perm", perm)
                .field("signs", signs)
                .finish(),
            SphereMap::Orthogonal { rows } => {
                f.debug_struct("Orthogonal").field("rows", rows).finish()
            }
            SphereMap::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl SphereMap {
    pub fn identity(dim: usize) -> Self {
        SphereMap::SignedPermutation {
            perm: (0..dim).collect(),
            signs: vec![1.0; dim],
        }
    }

    pub fn custom<F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static>(f: F) -> Self {
        SphereMap::Custom(Arc::new(f))
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SphereMap::SignedPermutation { perm, signs } => perm
                .iter()
                .zip(signs)
                .map(|(&src, &s)| s * x[src])
                .collect(),
            SphereMap::Orthogonal { rows } => rows
                .iter()
                .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
                .collect(),
            SphereMap::Custom(f) => f(x),
        }
    }

    pub fn inverse(&self, index: usize) -> Result<SphereMap, BanachError> {
        match self {
            SphereMap::SignedPermutation { perm, signs } => {
                let dim = perm.len();
                let mut inv_perm = vec![0usize; dim];
                let mut inv_signs = vec![1.0; dim];
                for k in 0..dim {
                    inv_perm[perm[k]] = k;
                    inv_signs[perm[k]] = signs[k];
                }
                Ok(SphereMap::SignedPermutation {
                    perm: inv_perm,
                    signs: inv_signs,
                })
            }
            SphereMap::Orthogonal { rows } => {
                let dim = rows.len();
                let transposed = (0..dim)
                    .map(|i| (0..dim).map(|j| rows[j][i]).collect())
                    .collect();
                Ok(SphereMap::Orthogonal { rows: transposed })
            }
            SphereMap::Custom(_) => Err(BanachError::NoInverse { index }),
        }
    }
}

/// A coordinate permutation plus one odd sphere map per component, sending
/// the sphere of component `i` to the sphere of component `sigma[i]`.
#[derive(Clone, Debug)]
pub struct SphereMapFamily {
    pub sigma: Vec<usize>,
    pub maps: Vec<SphereMap>,
}

impl SphereMapFamily {
    pub fn identity(space: &SumSpace) -> Self {
        SphereMapFamily {
            sigma: (0..space.n()).collect(),
            maps: space
                .components()
                .iter()
                .map(|c| SphereMap::identity(c.dim))
                .collect(),
        }
    }

    /// A random family of closed-form sphere isometries: orthogonal maps for
    /// p = 2 components, signed permutations otherwise. The permutation is
    /// drawn within classes of identical `(dim, p)`.
    pub fn random_isometric<R: Rng>(space: &SumSpace, rng: &mut R) -> Self {
        let n = space.n();
        let mut sigma = vec![0usize; n];
        let mut classes: Vec<((usize, u64), Vec<usize>)> = Vec::new();
        for (i, c) in space.components().iter().enumerate() {
            let p_bits = match c.p {
                PExponent::Finite(p) => p.to_bits(),
                PExponent::Infinity => u64::MAX,
            };
            let key = (c.dim, p_bits);
            match classes.iter_mut().find(|(k, _)| *k == key) {
                Some((_, m)) => m.push(i),
                None => classes.push((key, vec![i])),
            }
        }
        for (_, members) in &classes {
            let mut targets = members.clone();
            for i in (1..targets.len()).rev() {
                let j = rng.random_range(0..=i);
                targets.swap(i, j);
            }
            for (&src, &dst) in members.iter().zip(&targets) {
                sigma[src] = dst;
            }
        }
        let maps = space
            .components()
            .iter()
            .map(|c| match c.p {
                PExponent::Finite(p) if (p - 2.0).abs() < 1e-12 => SphereMap::Orthogonal {
                    rows: random_orthogonal(c.dim, rng),
                },
                _ => {
                    let (perm, signs) = random_signed_permutation(c.dim, rng);
                    SphereMap::SignedPermutation { perm, signs }
                }
            })
            .collect();
        SphereMapFamily { sigma, maps }
    }

    /// Structural validation plus seeded numeric probes: each map must send
    /// source unit vectors to target unit vectors and be odd.
    pub fn validate(&self, space: &SumSpace) -> Result<(), BanachError> {
        let n = space.n();
        if self.sigma.len() != n || self.maps.len() != n {
            return Err(BanachError::SigmaNotPermutation);
        }
        let mut seen = vec![false; n];
        for &t in &self.sigma {
            if t >= n || seen[t] {
                return Err(BanachError::SigmaNotPermutation);
            }
            seen[t] = true;
        }
        let mut rng = rng_from_seed(0x5f3759df);
        for (i, map) in self.maps.iter().enumerate() {
            let src = space.component(i);
            let dst = space.component(self.sigma[i]);
            if src.dim != dst.dim {
                return Err(BanachError::BadSphereMap {
                    index: i,
                    reason: format!("source dim {} != target dim {}", src.dim, dst.dim),
                });
            }
            match map {
                SphereMap::SignedPermutation { perm, signs } => {
                    if perm.len() != src.dim || signs.len() != src.dim {
                        return Err(BanachError::BadSphereMap {
                            index: i,
                            reason: "wrong arity".into(),
                        });
                    }
                    let mut hit = vec![false; src.dim];
                    for &p in perm {
                        if p >= src.dim || hit[p] {
                            return Err(BanachError::BadSphereMap {
                                index: i,
                                reason: "perm is not a bijection".into(),
                            });
                        }
                        hit[p] = true;
                    }
                    if signs.iter().any(|&s| s != 1.0 && s != -1.0) {
                        return Err(BanachError::BadSphereMap {
                            index: i,
                            reason: "signs must be +1 or -1".into(),
                        });
                    }
                }
                SphereMap::Orthogonal { rows } => {
                    if rows.len() != src.dim || rows.iter().any(|r| r.len() != src.dim) {
                        return Err(BanachError::BadSphereMap {
                            index: i,
                            reason: "wrong matrix shape".into(),
                        });
                    }
                }
                SphereMap::Custom(_) => {}
            }
            // Numeric probes: unit preservation and oddness.
            for _ in 0..8 {
                let u = src.sample_sphere(&mut rng);
                let v = map.apply(&u);
                if v.len() != dst.dim {
                    return Err(BanachError::BadSphereMap {
                        index: i,
                        reason: "image dimension mismatch".into(),
                    });
                }
                let vn = dst.norm(&v);
                if (vn - 1.0).abs() > 1e-9 {
                    return Err(BanachError::BadSphereMap {
                        index: i,
                        reason: format!("unit vector maps to norm {vn}"),
                    });
                }
                let neg_u: Vec<f64> = u.iter().map(|x| -x).collect();
                let v_neg = map.apply(&neg_u);
                let odd_defect = v
                    .iter()
                    .zip(&v_neg)
                    .fold(0.0f64, |m, (a, b)| m.max((a + b).abs()));
                if odd_defect > 1e-9 {
                    return Err(BanachError::BadSphereMap {
                        index: i,
                        reason: format!("map is not odd (defect {odd_defect})"),
                    });
                }
            }
        }
        Ok(())
    }

    /// The inverse family: inverse permutation, inverse maps reindexed so
    /// that applying the result forward computes the inverse extension.
    pub fn inverse(&self) -> Result<SphereMapFamily, BanachError> {
        let n = self.sigma.len();
        let mut inv_sigma = vec![0usize; n];
        for (i, &t) in self.sigma.iter().enumerate() {
            inv_sigma[t] = i;
        }
        let maps = (0..n)
            .map(|k| self.maps[inv_sigma[k]].inverse(inv_sigma[k]))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SphereMapFamily {
            sigma: inv_sigma,
            maps,
        })
    }
}

/// The positively homogeneous extension of a sphere map family to whole
/// balls: block `i` of norm `r` maps to `r` times the sphere image of its
/// normalization, landing in block `sigma[i]`; zero maps to zero.
#[derive(Clone, Debug)]
pub struct HomogeneousExtension {
    family: SphereMapFamily,
}

impl HomogeneousExtension {
    /// The forward extension of `family`.
    pub fn forward(family: SphereMapFamily) -> Self {
        HomogeneousExtension { family }
    }

    /// The extension of the inverse family; inverts [`Self::forward`] of the
    /// same family.
    pub fn inverse_of(family: &SphereMapFamily) -> Result<Self, BanachError> {
        Ok(HomogeneousExtension {
            family: family.inverse()?,
        })
    }

    pub fn family(&self) -> &SphereMapFamily {
        &self.family
    }

    pub fn apply(&self, space: &SumSpace, z: &SumSpacePoint) -> Result<SumSpacePoint, BanachError> {
        apply_extension(space, self, z)
    }
}

/// Applies a homogeneous extension blockwise. Preserves every block norm.
pub fn apply_extension(
    space: &SumSpace,
    ext: &HomogeneousExtension,
    z: &SumSpacePoint,
) -> Result<SumSpacePoint, BanachError> {
    space.validate_point(z)?;
    let n = space.n();
    let mut out: Vec<Vec<f64>> = space.components().iter().map(|c| vec![0.0; c.dim]).collect();
    for i in 0..n {
        let target = ext.family.sigma[i];
        let block = z.block(i);
        let r = space.component(i).norm(block);
        if r == 0.0 {
            continue;
        }
        let unit: Vec<f64> = block.iter().map(|v| v / r).collect();
        let image = ext.family.maps[i].apply(&unit);
        out[target] = image.into_iter().map(|v| r * v).collect();
    }
    Ok(SumSpacePoint::new(out))
}

/// Result of a sampled homogeneity check.
#[derive(Clone, Debug)]
pub struct HomogeneityCheck {
    pub pass: bool,
    pub samples: usize,
    pub max_deviation: f64,
    pub violation: Option<SumSpacePoint>,
}

/// Samples ball points with block norm 1 on at least `n - k` components and
/// asserts the map under test agrees with the extension within `tol`.
pub fn check_homogeneity(
    space: &SumSpace,
    map_under_test: &dyn Fn(&SumSpacePoint) -> SumSpacePoint,
    ext: &HomogeneousExtension,
    k: usize,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<HomogeneityCheck, BanachError> {
    if samples == 0 {
        return Err(BanachError::SamplingFailure);
    }
    let mut rng = rng_from_seed(seed);
    let mut max_deviation = 0.0f64;
    let mut violation = None;
    for s in 0..samples {
        // Exercise every admissible count of free blocks, biased toward the
        // boundary case of exactly k.
        let free = if s % 2 == 0 {
            k.min(space.n())
        } else {
            rng.random_range(0..=k.min(space.n()))
        };
        let z = space.sample_with_free_blocks(free, &mut rng);
        let got = map_under_test(&z);
        let want = apply_extension(space, ext, &z)?;
        let dev = space.distance(&got, &want);
        if dev > max_deviation {
            max_deviation = dev;
            if dev > tol {
                violation = Some(z);
            }
        }
    }
    Ok(HomogeneityCheck {
        pass: max_deviation <= tol,
        samples,
        max_deviation,
        violation,
    })
}

/// Result of the tangent-ball intersection estimate.
#[derive(Clone, Debug)]
pub struct TangencyReport {
    pub diameter_estimate: f64,
    pub tangency_point: Vec<f64>,
}

/// Estimates the diameter of the intersection of two tangent balls by
/// maximizing chord lengths through the tangency point over sampled and
/// locally refined directions. For strictly convex exponents the estimate
/// must be tiny; for the max norm a control configuration has a fat
/// intersection.
///
/// The tangency point returned is `c1 + r1 * (c2 - c1) / |c2 - c1|`.
pub fn two_ball_intersection_diameter(
    component: &LpComponent,
    c1: &[f64],
    r1: f64,
    c2: &[f64],
    r2: f64,
    samples: usize,
    seed: u64,
) -> Result<TangencyReport, BanachError> {
    let gap = component.distance(c1, c2);
    let radius_sum = r1 + r2;
    if r1 < 0.0
        || r2 < 0.0
        || gap <= 0.0
        || (gap - radius_sum).abs() > 1e-9 * (1.0 + radius_sum)
    {
        // Coincident centers have no tangency direction.
        return Err(BanachError::NotTangent { gap, radius_sum });
    }
    let dim = component.dim;
    let tangency: Vec<f64> = (0..dim)
        .map(|k| c1[k] + r1 * (c2[k] - c1[k]) / gap)
        .collect();

    let feas_eps = 5e-15 * (1.0 + radius_sum);
    let feasible = |x: &[f64]| -> bool {
        component.distance(x, c1) <= r1 + feas_eps && component.distance(x, c2) <= r2 + feas_eps
    };
    let reach = |d: &[f64]| -> f64 {
        // Largest s with tangency + s*d in both balls; the feasible set of s
        // is an interval starting at 0.
        let at = |s: f64| -> Vec<f64> { (0..dim).map(|k| tangency[k] + s * d[k]).collect() };
        if !feasible(&at(0.0)) {
            return 0.0;
        }
        let mut hi = radius_sum.max(1e-6);
        if feasible(&at(hi)) {
            return hi;
        }
        let mut lo = 0.0;
        for _ in 0..70 {
            let mid = 0.5 * (lo + hi);
            if feasible(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let chord = |d: &[f64]| -> f64 {
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        reach(d) + reach(&neg)
    };

    let mut rng = rng_from_seed(seed);
    let mut best_dir: Vec<f64> = vec![0.0; dim];
    best_dir[0] = 1.0;
    let mut best = 0.0f64;
    // Coordinate axes first (they expose flat max-norm faces), then random
    // directions.
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        directions.push(e);
    }
    for _ in 0..samples {
        directions.push(component.sample_sphere(&mut rng));
    }
    for d in directions {
        let c = chord(&d);
        if c > best {
            best = c;
            best_dir = d;
        }
    }
    // Local maximization around the best direction.
    let mut step = 0.5;
    for _ in 0..60 {
        let mut cand: Vec<f64> = best_dir
            .iter()
            .map(|v| v + step * standard_normal(&mut rng))
            .collect();
        let norm = component.norm(&cand);
        if norm > 1e-9 {
            for v in &mut cand {
                *v /= norm;
            }
            let c = chord(&cand);
            if c > best {
                best = c;
                best_dir = cand;
            }
        }
        step *= 0.9;
    }
    Ok(TangencyReport {
        diameter_estimate: best,
        tangency_point: tangency,
    })
}

/// Sampled certification that a ball self-map is an isometry, checking the
/// hypotheses that make the conclusion available: distances never increase,
/// sphere points stay on the sphere, odd scaling along rays, and sampled
/// injectivity. The defect is the worst distance distortion over the pairs.
#[derive(Clone, Debug)]
pub struct IsometryCertificate {
    pub lipschitz_ok: bool,
    pub sphere_preserved: bool,
    pub scaling_ok: bool,
    pub injective_on_samples: bool,
    pub max_defect: f64,
    pub is_isometry: bool,
    pub failure: Option<String>,
}

impl IsometryCertificate {
    pub fn hypotheses_hold(&self) -> bool {
        self.lipschitz_ok && self.sphere_preserved && self.scaling_ok && self.injective_on_samples
    }
}

const SCALING_GRID: [f64; 6] = [-1.0, -0.5, -0.25, 0.25, 0.5, 1.0];

pub fn certify_isometry(
    space: &SumSpace,
    map_under_test: &dyn Fn(&SumSpacePoint) -> SumSpacePoint,
    pairs: &[(SumSpacePoint, SumSpacePoint)],
    tol: f64,
) -> Result<IsometryCertificate, BanachError> {
    let mut lipschitz_ok = true;
    let mut max_defect = 0.0f64;
    let mut failure = None;
    for (u, v) in pairs {
        space.validate_point(u)?;
        space.validate_point(v)?;
        let before = space.distance(u, v);
        let after = space.distance(&map_under_test(u), &map_under_test(v));
        if after > before + tol {
            lipschitz_ok = false;
        }
        let defect = (after - before).abs();
        if defect > max_defect {
            max_defect = defect;
            if defect > tol && failure.is_none() {
                failure = Some(format!(
                    "distance {before:.17e} maps to {after:.17e}"
                ));
            }
        }
    }

    // Sphere and scaling hypotheses on normalized sample points derived from
    // the pair set (bounded count to keep certification cheap).
    let mut sphere_preserved = true;
    let mut scaling_ok = true;
    let mut injective_on_samples = true;
    let sample_points: Vec<&SumSpacePoint> = pairs
        .iter()
        .flat_map(|(u, v)| [u, v])
        .take(128)
        .collect();
    for z in &sample_points {
        let norm = space.norm(z);
        if norm <= 1e-9 {
            continue;
        }
        let unit = space.scale(1.0 / norm, z);
        let image = map_under_test(&unit);
        if (space.norm(&image) - 1.0).abs() > tol.max(1e-12) {
            sphere_preserved = false;
        }
        for alpha in SCALING_GRID {
            let scaled_in = map_under_test(&space.scale(alpha, &unit));
            let scaled_out = space.scale(alpha, &image);
            if space.distance(&scaled_in, &scaled_out) > tol.max(1e-12) {
                scaling_ok = false;
            }
        }
    }
    for (u, v) in pairs.iter().take(512) {
        let before = space.distance(u, v);
        if before > 1e-6 {
            let after = space.distance(&map_under_test(u), &map_under_test(v));
            if after <= 1e-12 {
                injective_on_samples = false;
            }
        }
    }

    let is_isometry = max_defect <= tol;
    Ok(IsometryCertificate {
        lipschitz_ok,
        sphere_preserved,
        scaling_ok,
        injective_on_samples,
        max_defect,
        is_isometry,
        failure,
    })
}

/// The vertex map induced on a finite ball point set by a non-contractive
/// map, verified to be an injective distance-2-preserving graph map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedGraphHom {
    pub images: Vec<usize>,
}

pub fn nonexpansive_to_graph_hom(
    space: &SumSpace,
    map_under_test: &dyn Fn(&SumSpacePoint) -> SumSpacePoint,
    points: &[SumSpacePoint],
    tol: f64,
) -> Result<InducedGraphHom, BanachError> {
    let images: Vec<SumSpacePoint> = points.iter().map(map_under_test).collect();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let before = space.distance(&points[i], &points[j]);
            let after = space.distance(&images[i], &images[j]);
            if after < before - tol {
                return Err(BanachError::NonContractive {
                    i,
                    j,
                    before,
                    after,
                });
            }
        }
    }
    // Match images back onto the point set.
    let mut vertex_map = Vec::with_capacity(points.len());
    for (index, img) in images.iter().enumerate() {
        let (nearest_idx, nearest) = points
            .iter()
            .enumerate()
            .map(|(j, p)| (j, space.distance(img, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty point set");
        if nearest > tol {
            return Err(BanachError::ImageNotInPointSet { index, nearest });
        }
        vertex_map.push(nearest_idx);
    }
    for i in 0..vertex_map.len() {
        for j in (i + 1)..vertex_map.len() {
            if vertex_map[i] == vertex_map[j] {
                return Err(BanachError::InducedNotInjective { i, j });
            }
        }
    }
    // Distance-2 pairs must stay at distance 2.
    let edges = ball_to_graph(space, points, tol)?;
    let edge_set: std::collections::BTreeSet<(usize, usize)> =
        edges.conormal.iter().copied().collect();
    for &(i, j) in &edges.conormal {
        let (a, b) = (
            vertex_map[i].min(vertex_map[j]),
            vertex_map[i].max(vertex_map[j]),
        );
        if !edge_set.contains(&(a, b)) {
            return Err(BanachError::InducedEdgeBroken { i, j });
        }
    }
    Ok(InducedGraphHom { images: vertex_map })
}

/// Outcome of probing the two index readings in the coefficient transfer
/// step of the homogeneity-equivalence argument: literal means the
/// coefficient is indexed through the permutation, swapped means it is not.
#[derive(Clone, Debug, PartialOrd, PartialEq)]
pub struct EquivProbe {
    pub literal_reading_deviation: f64,
    pub index_swapped_reading_deviation: f64,
    pub literal_reading_holds: bool,
    pub index_swapped_reading_holds: bool,
}

pub fn homogeneity_equiv_probe(
    space: &SumSpace,
    family: &SphereMapFamily,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<EquivProbe, BanachError> {
    family.validate(space)?;
    let gamma = HomogeneousExtension::forward(family.clone());
    let phi = HomogeneousExtension::inverse_of(family)?;
    let n = space.n();
    let mut rng = rng_from_seed(seed);
    let mut literal_dev = 0.0f64;
    let mut swapped_dev = 0.0f64;
    for _ in 0..samples.max(1) {
        // Distinct block norms so the two readings are distinguishable.
        let mut coeffs: Vec<f64> = (0..n)
            .map(|i| 0.15 + 0.7 * (i as f64 + rng.random::<f64>() * 0.8) / n as f64)
            .collect();
        coeffs[rng.random_range(0..n)] = 1.0;
        // y extreme, x the coefficient-scaled copy.
        let y = SumSpacePoint::new(
            space
                .components()
                .iter()
                .map(|c| c.sample_sphere(&mut rng))
                .collect(),
        );
        let x = SumSpacePoint::new(
            y.blocks
                .iter()
                .enumerate()
                .map(|(i, b)| b.iter().map(|v| coeffs[i] * v).collect())
                .collect(),
        );
        let phi_y = phi.apply(space, &y)?;
        for literal in [true, false] {
            let q = SumSpacePoint::new(
                phi_y
                    .blocks
                    .iter()
                    .enumerate()
                    .map(|(i, b)| {
                        let a = if literal {
                            coeffs[family.sigma[i]]
                        } else {
                            coeffs[i]
                        };
                        b.iter().map(|v| a * v).collect()
                    })
                    .collect(),
            );
            let dev = space.distance(&gamma.apply(space, &q)?, &x);
            if literal {
                literal_dev = literal_dev.max(dev);
            } else {
                swapped_dev = swapped_dev.max(dev);
            }
        }
    }
    Ok(EquivProbe {
        literal_reading_deviation: literal_dev,
        index_swapped_reading_deviation: swapped_dev,
        literal_reading_holds: literal_dev <= tol,
        index_swapped_reading_holds: swapped_dev <= tol,
    })
}
