//! Exact-rational models: the shift construction transporting a
//! non-expansive bijection between two balls into a self-map of a sequence
//! space, and the depth-limited closure operator generating a countable
//! sub-ball closed under a map, its inverse, rational scaling, and addition,
//! with an auditable derivation per element.
//!
//! Everything here is exact (arbitrary-precision rationals, max norm over
//! rational coordinates) except `check_rat_scaling`, which compares two
//! float point clouds on a grid and is the only approximate operation in
//! the module.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::banach_geometry::LpComponent;
use crate::sampling::{rng_from_seed, SeededRng};

pub type Rat = BigRational;
pub type RatVec = Vec<Rat>;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact max norm of a rational vector.
pub fn linf_norm(x: &[Rat]) -> Rat {
    x.iter()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rat::zero)
}

fn vec_sub(a: &[Rat], b: &[Rat]) -> RatVec {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn vec_add(a: &[Rat], b: &[Rat]) -> RatVec {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn vec_scale(q: &Rat, a: &[Rat]) -> RatVec {
    a.iter().map(|x| q * x).collect()
}

pub fn linf_distance(a: &[Rat], b: &[Rat]) -> Rat {
    linf_norm(&vec_sub(a, b))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("point dimension {got} does not match expected {expected}")]
    DimMismatch { got: usize, expected: usize },
    #[error("point lies outside the unit ball (norm {norm})")]
    NotInBall { norm: String },
    #[error("map is empty")]
    EmptyMap,
    #[error("map is not a bijection (duplicate {side} point)")]
    NotBijective { side: &'static str },
    #[error("map expands the pair ({i}, {j})")]
    NotNonexpansive { i: usize, j: usize },
    #[error("map is undefined at a required point")]
    MapUndefined,
    #[error("radial profile knots must run from (0,0) to (1,1) strictly increasing")]
    BadKnots,
    #[error("support block at index {index} has the wrong dimension")]
    BadSupportBlock { index: i64 },
}

/// A finite non-expansive bijection between two rational ball point sets,
/// stored as explicit point pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelMap {
    domain_dim: usize,
    image_dim: usize,
    domain: Vec<RatVec>,
    image: Vec<RatVec>,
    forward_index: BTreeMap<RatVec, usize>,
    inverse_index: BTreeMap<RatVec, usize>,
}

impl ModelMap {
    pub fn new(domain: Vec<RatVec>, image: Vec<RatVec>) -> Result<Self, ConstructionError> {
        if domain.is_empty() || domain.len() != image.len() {
            return Err(ConstructionError::EmptyMap);
        }
        let domain_dim = domain[0].len();
        let image_dim = image[0].len();
        let one = Rat::one();
        for p in &domain {
            if p.len() != domain_dim {
                return Err(ConstructionError::DimMismatch {
                    got: p.len(),
                    expected: domain_dim,
                });
            }
            if linf_norm(p) > one {
                return Err(ConstructionError::NotInBall {
                    norm: linf_norm(p).to_string(),
                });
            }
        }
        for p in &image {
            if p.len() != image_dim {
                return Err(ConstructionError::DimMismatch {
                    got: p.len(),
                    expected: image_dim,
                });
            }
            if linf_norm(p) > one {
                return Err(ConstructionError::NotInBall {
                    norm: linf_norm(p).to_string(),
                });
            }
        }
        let mut forward_index = BTreeMap::new();
        for (k, p) in domain.iter().enumerate() {
            if forward_index.insert(p.clone(), k).is_some() {
                return Err(ConstructionError::NotBijective { side: "domain" });
            }
        }
        let mut inverse_index = BTreeMap::new();
        for (k, p) in image.iter().enumerate() {
            if inverse_index.insert(p.clone(), k).is_some() {
                return Err(ConstructionError::NotBijective { side: "image" });
            }
        }
        for i in 0..domain.len() {
            for j in (i + 1)..domain.len() {
                if linf_distance(&image[i], &image[j]) > linf_distance(&domain[i], &domain[j]) {
                    return Err(ConstructionError::NotNonexpansive { i, j });
                }
            }
        }
        Ok(ModelMap {
            domain_dim,
            image_dim,
            domain,
            image,
            forward_index,
            inverse_index,
        })
    }

    pub fn domain_dim(&self) -> usize {
        self.domain_dim
    }

    pub fn image_dim(&self) -> usize {
        self.image_dim
    }

    pub fn domain(&self) -> &[RatVec] {
        &self.domain
    }

    pub fn image(&self) -> &[RatVec] {
        &self.image
    }

    pub fn apply(&self, x: &[Rat]) -> Option<&RatVec> {
        self.forward_index.get(x).map(|&k| &self.image[k])
    }

    pub fn apply_inverse(&self, y: &[Rat]) -> Option<&RatVec> {
        self.inverse_index.get(y).map(|&k| &self.domain[k])
    }

    /// The exact distance loss of the pair `(domain[i], domain[j])`:
    /// `d(x, x') - d(f(x), f(x'))`, nonnegative for a non-expansive map.
    pub fn defect(&self, i: usize, j: usize) -> Rat {
        linf_distance(&self.domain[i], &self.domain[j])
            - linf_distance(&self.image[i], &self.image[j])
    }
}

/// A finitely supported point of the two-sided sequence sum: blocks at
/// negative indices live in the domain-side model, blocks at nonnegative
/// indices in the image-side model. Absent indices are zero; zero blocks
/// are not stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SeqPoint {
    support: BTreeMap<i64, RatVec>,
}

impl SeqPoint {
    pub fn zero() -> Self {
        SeqPoint {
            support: BTreeMap::new(),
        }
    }

    pub fn from_blocks(blocks: impl IntoIterator<Item = (i64, RatVec)>) -> Self {
        let mut support = BTreeMap::new();
        for (i, b) in blocks {
            if !b.iter().all(Zero::is_zero) {
                support.insert(i, b);
            }
        }
        SeqPoint { support }
    }

    pub fn support(&self) -> &BTreeMap<i64, RatVec> {
        &self.support
    }

    pub fn norm(&self) -> Rat {
        self.support
            .values()
            .map(|b| linf_norm(b))
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn in_ball(&self) -> bool {
        self.norm() <= Rat::one()
    }

    /// The block at `index`, materialized as a zero vector of dimension
    /// `dim` when absent.
    pub fn block_or_zero(&self, index: i64, dim: usize) -> RatVec {
        self.support
            .get(&index)
            .cloned()
            .unwrap_or_else(|| vec![Rat::zero(); dim])
    }
}

impl fmt::Display for SeqPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .support
            .iter()
            .map(|(i, b)| {
                let coords: Vec<String> = b.iter().map(|c| c.to_string()).collect();
                format!("{}:({})", i, coords.join(","))
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// The exact max distance between two sequence points.
pub fn seq_distance(a: &SeqPoint, b: &SeqPoint) -> Rat {
    let mut best = Rat::zero();
    for (i, block) in &a.support {
        let other = b.support.get(i);
        let d = match other {
            Some(o) => linf_distance(block, o),
            None => linf_norm(block),
        };
        if d > best {
            best = d;
        }
    }
    for (i, block) in &b.support {
        if !a.support.contains_key(i) {
            let d = linf_norm(block);
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// The shift construction: blocks move one index to the right, and the
/// block arriving at index 0 passes through the model bijection.
#[derive(Clone, Debug)]
pub struct ShiftModel {
    pub map: ModelMap,
}

impl ShiftModel {
    pub fn new(map: ModelMap) -> Self {
        ShiftModel { map }
    }

    fn validate_point(&self, z: &SeqPoint) -> Result<(), ConstructionError> {
        for (&i, b) in z.support() {
            let expected = if i < 0 {
                self.map.domain_dim()
            } else {
                self.map.image_dim()
            };
            if b.len() != expected {
                return Err(ConstructionError::BadSupportBlock { index: i });
            }
        }
        if !z.in_ball() {
            return Err(ConstructionError::NotInBall {
                norm: z.norm().to_string(),
            });
        }
        Ok(())
    }

    /// `shift(z)` has block `i-1` of `z` at index `i` for `i != 0`, and the
    /// mapped block `f(z_{-1})` at index 0. Ball membership is preserved.
    pub fn shift(&self, z: &SeqPoint) -> Result<SeqPoint, ConstructionError> {
        self.validate_point(z)?;
        let feed = z.block_or_zero(-1, self.map.domain_dim());
        let mapped = self
            .map
            .apply(&feed)
            .ok_or(ConstructionError::MapUndefined)?
            .clone();
        let mut blocks: Vec<(i64, RatVec)> = z
            .support()
            .iter()
            .filter(|(&i, _)| i != -1)
            .map(|(&i, b)| (i + 1, b.clone()))
            .collect();
        blocks.push((0, mapped));
        Ok(SeqPoint::from_blocks(blocks))
    }

    /// The inverse shift: blocks move one index left, the block at index 0
    /// passes through the inverse bijection to index -1.
    pub fn unshift(&self, w: &SeqPoint) -> Result<SeqPoint, ConstructionError> {
        self.validate_point(w)?;
        let fed = w.block_or_zero(0, self.map.image_dim());
        let unmapped = self
            .map
            .apply_inverse(&fed)
            .ok_or(ConstructionError::MapUndefined)?
            .clone();
        let mut blocks: Vec<(i64, RatVec)> = w
            .support()
            .iter()
            .filter(|(&i, _)| i != 0)
            .map(|(&i, b)| (i - 1, b.clone()))
            .collect();
        blocks.push((-1, unmapped));
        Ok(SeqPoint::from_blocks(blocks))
    }

    /// Embeds a domain-side point at index -1.
    pub fn embed_domain(&self, x: &RatVec) -> SeqPoint {
        SeqPoint::from_blocks([(-1, x.clone())])
    }
}

/// Report of the shift construction's property transfer on sample pairs.
#[derive(Clone, Debug)]
pub struct ShiftReport {
    pub pairs_checked: usize,
    pub nonexpansive_ok: bool,
    pub injective_ok: bool,
    pub round_trip_ok: bool,
    /// Exact defect equality between the model pair and its embedding.
    pub defect_conserved: bool,
    pub failure: Option<String>,
}

impl ShiftReport {
    pub fn pass(&self) -> bool {
        self.nonexpansive_ok && self.injective_ok && self.round_trip_ok && self.defect_conserved
    }
}

/// Checks non-expansiveness, injectivity witnesses, inverse-shift round
/// trips on the sample pairs, and exact defect conservation for every
/// domain pair of the model embedded at index -1.
pub fn shift_properties(
    model: &ShiftModel,
    pairs: &[(SeqPoint, SeqPoint)],
) -> Result<ShiftReport, ConstructionError> {
    let mut report = ShiftReport {
        pairs_checked: pairs.len(),
        nonexpansive_ok: true,
        injective_ok: true,
        round_trip_ok: true,
        defect_conserved: true,
        failure: None,
    };
    let note = |report: &mut ShiftReport, msg: String| {
        if report.failure.is_none() {
            report.failure = Some(msg);
        }
    };
    for (z, w) in pairs {
        let fz = model.shift(z)?;
        let fw = model.shift(w)?;
        let before = seq_distance(z, w);
        let after = seq_distance(&fz, &fw);
        if after > before {
            report.nonexpansive_ok = false;
            note(&mut report, format!("expansion at pair {z} | {w}"));
        }
        if z != w && fz == fw {
            report.injective_ok = false;
            note(&mut report, format!("collision at pair {z} | {w}"));
        }
        for (orig, img) in [(z, &fz), (w, &fw)] {
            if model.unshift(img)? != *orig {
                report.round_trip_ok = false;
                note(&mut report, format!("round trip failed at {orig}"));
            }
        }
    }
    // Exact defect conservation at embedded domain pairs.
    let n = model.map.domain().len();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = model.embed_domain(&model.map.domain()[i]);
            let b = model.embed_domain(&model.map.domain()[j]);
            let fa = model.shift(&a)?;
            let fb = model.shift(&b)?;
            let constructed_defect = seq_distance(&a, &b) - seq_distance(&fa, &fb);
            if constructed_defect != model.map.defect(i, j) {
                report.defect_conserved = false;
                note(
                    &mut report,
                    format!("defect not conserved at domain pair ({i}, {j})"),
                );
            }
        }
    }
    Ok(report)
}

/// A rational-exact ball self-map usable as a closure generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorMap {
    /// A finite table; partial outside its recorded domain.
    Table(ModelMap),
    /// `out[k] = signs[k] * x[perm[k]]`; a max-norm isometry, total.
    SignedPermutation { perm: Vec<usize>, signs: Vec<i8> },
    /// Radial reparameterization by a piecewise-linear bijection of [0, 1]
    /// given by strictly increasing knots from (0,0) to (1,1); total on the
    /// ball and exactly invertible.
    RadialProfile { knots: Vec<(Rat, Rat)> },
}

impl GeneratorMap {
    pub fn identity(dim: usize) -> Self {
        GeneratorMap::SignedPermutation {
            perm: (0..dim).collect(),
            signs: vec![1; dim],
        }
    }

    pub fn radial_profile(knots: Vec<(Rat, Rat)>) -> Result<Self, ConstructionError> {
        if knots.len() < 2
            || knots.first() != Some(&(Rat::zero(), Rat::zero()))
            || knots.last() != Some(&(Rat::one(), Rat::one()))
            || knots.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1)
        {
            return Err(ConstructionError::BadKnots);
        }
        Ok(GeneratorMap::RadialProfile { knots })
    }

    /// Applies to a ball point; exact. `Err(MapUndefined)` for table misses.
    pub fn apply(&self, x: &[Rat]) -> Result<RatVec, ConstructionError> {
        let norm = linf_norm(x);
        if norm > Rat::one() {
            return Err(ConstructionError::NotInBall {
                norm: norm.to_string(),
            });
        }
        match self {
            GeneratorMap::Table(map) => map
                .apply(x)
                .cloned()
                .ok_or(ConstructionError::MapUndefined),
            GeneratorMap::SignedPermutation { perm, signs } => {
                if perm.len() != x.len() {
                    return Err(ConstructionError::DimMismatch {
                        got: x.len(),
                        expected: perm.len(),
                    });
                }
                Ok(perm
                    .iter()
                    .zip(signs)
                    .map(|(&src, &s)| {
                        if s >= 0 {
                            x[src].clone()
                        } else {
                            -x[src].clone()
                        }
                    })
                    .collect())
            }
            GeneratorMap::RadialProfile { knots } => {
                if norm.is_zero() {
                    return Ok(x.to_vec());
                }
                let target = interpolate(knots, &norm)?;
                let factor = target / &norm;
                Ok(vec_scale(&factor, x))
            }
        }
    }

    pub fn inverse(&self) -> Result<GeneratorMap, ConstructionError> {
        match self {
            GeneratorMap::Table(map) => ModelMap::new(map.image().to_vec(), map.domain().to_vec())
                .map(GeneratorMap::Table),
            GeneratorMap::SignedPermutation { perm, signs } => {
                let dim = perm.len();
                let mut inv_perm = vec![0usize; dim];
                let mut inv_signs = vec![1i8; dim];
                for k in 0..dim {
                    inv_perm[perm[k]] = k;
                    inv_signs[perm[k]] = signs[k];
                }
                Ok(GeneratorMap::SignedPermutation {
                    perm: inv_perm,
                    signs: inv_signs,
                })
            }
            GeneratorMap::RadialProfile { knots } => Ok(GeneratorMap::RadialProfile {
                knots: knots.iter().map(|(r, t)| (t.clone(), r.clone())).collect(),
            }),
        }
    }
}

fn interpolate(knots: &[(Rat, Rat)], r: &Rat) -> Result<Rat, ConstructionError> {
    for w in knots.windows(2) {
        let (r0, t0) = &w[0];
        let (r1, t1) = &w[1];
        if r >= r0 && r <= r1 {
            return Ok(t0 + (t1 - t0) * (r - r0) / (r1 - r0));
        }
    }
    Err(ConstructionError::BadKnots)
}

/// How an element of a closure state was produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derivation {
    Seed,
    Forward(usize),
    Inverse(usize),
    Scale(Rat, usize),
    Sum(usize, usize),
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Derivation::Seed => write!(f, "seed()"),
            Derivation::Forward(p) => write!(f, "f({p})"),
            Derivation::Inverse(p) => write!(f, "finv({p})"),
            Derivation::Scale(q, p) => write!(f, "scale({q})({p})"),
            Derivation::Sum(a, b) => write!(f, "sum({a},{b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepStats {
    pub added: usize,
    pub total: usize,
}

/// A depth-limited iteration of the closure operator: each step adds the
/// forward and inverse images of ball elements, rational multiples up to a
/// cap, and pairwise sums up to a per-step budget. Elements are exact, kept
/// in insertion order, and each one records its derivation.
#[derive(Clone, Debug)]
pub struct ClosureState {
    dim: usize,
    forward: GeneratorMap,
    inverse: GeneratorMap,
    elements: Vec<RatVec>,
    derivations: Vec<Derivation>,
    index: BTreeMap<RatVec, usize>,
    depth: usize,
}

impl ClosureState {
    pub fn seed(
        dim: usize,
        forward: GeneratorMap,
        inverse: GeneratorMap,
        seeds: Vec<RatVec>,
    ) -> Result<Self, ConstructionError> {
        let mut state = ClosureState {
            dim,
            forward,
            inverse,
            elements: Vec::new(),
            derivations: Vec::new(),
            index: BTreeMap::new(),
            depth: 0,
        };
        for s in seeds {
            if s.len() != dim {
                return Err(ConstructionError::DimMismatch {
                    got: s.len(),
                    expected: dim,
                });
            }
            state.push(s, Derivation::Seed);
        }
        Ok(state)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[RatVec] {
        &self.elements
    }

    pub fn derivations(&self) -> &[Derivation] {
        &self.derivations
    }

    pub fn contains(&self, x: &RatVec) -> bool {
        self.index.contains_key(x)
    }

    fn push(&mut self, x: RatVec, rule: Derivation) -> bool {
        if self.index.contains_key(&x) {
            return false;
        }
        let id = self.elements.len();
        self.index.insert(x.clone(), id);
        self.elements.push(x);
        self.derivations.push(rule);
        true
    }

    /// One closure step over the current elements, in deterministic order:
    /// forward images of ball elements, inverse images, rational multiples
    /// with numerator and denominator up to `rational_cap`, then pairwise
    /// sums until `sum_cap` new sum elements have been added.
    pub fn step(&mut self, rational_cap: u32, sum_cap: usize) -> Result<StepStats, ConstructionError> {
        let snapshot = self.elements.len();
        let mut added = 0usize;
        let one = Rat::one();
        for id in 0..snapshot {
            if linf_norm(&self.elements[id]) <= one {
                let y = self.forward.apply(&self.elements[id])?;
                if self.push(y, Derivation::Forward(id)) {
                    added += 1;
                }
            }
        }
        for id in 0..snapshot {
            if linf_norm(&self.elements[id]) <= one {
                let y = self.inverse.apply(&self.elements[id])?;
                if self.push(y, Derivation::Inverse(id)) {
                    added += 1;
                }
            }
        }
        let rationals = rationals_up_to(rational_cap);
        for id in 0..snapshot {
            for q in &rationals {
                let y = vec_scale(q, &self.elements[id]);
                if self.push(y, Derivation::Scale(q.clone(), id)) {
                    added += 1;
                }
            }
        }
        let mut sums_added = 0usize;
        'sums: for a in 0..snapshot {
            for b in a..snapshot {
                if sums_added >= sum_cap {
                    break 'sums;
                }
                let y = vec_add(&self.elements[a], &self.elements[b]);
                if self.push(y, Derivation::Sum(a, b)) {
                    added += 1;
                    sums_added += 1;
                }
            }
        }
        self.depth += 1;
        Ok(StepStats {
            added,
            total: self.elements.len(),
        })
    }

    /// Recomputes element `id` from its derivation tree alone; the audit
    /// trail must replay to the stored value exactly.
    pub fn replay(&self, id: usize) -> Result<RatVec, ConstructionError> {
        let mut values: Vec<Option<RatVec>> = vec![None; id + 1];
        for k in 0..=id {
            let v = match &self.derivations[k] {
                Derivation::Seed => self.elements[k].clone(),
                Derivation::Forward(p) => {
                    self.forward.apply(values[*p].as_ref().expect("parent precedes child"))?
                }
                Derivation::Inverse(p) => {
                    self.inverse.apply(values[*p].as_ref().expect("parent precedes child"))?
                }
                Derivation::Scale(q, p) => {
                    vec_scale(q, values[*p].as_ref().expect("parent precedes child"))
                }
                Derivation::Sum(a, b) => vec_add(
                    values[*a].as_ref().expect("parent precedes child"),
                    values[*b].as_ref().expect("parent precedes child"),
                ),
            };
            values[k] = Some(v);
        }
        Ok(values[id].take().expect("computed"))
    }

    /// One line per element: `element-id: rule(parent-ids)`.
    pub fn derivation_lines(&self) -> String {
        let mut out = String::new();
        for (id, rule) in self.derivations.iter().enumerate() {
            out.push_str(&format!("{id}: {rule}\n"));
        }
        out
    }
}

/// All reduced rationals `a/b` with `|a| <= cap`, `1 <= b <= cap`, sorted
/// ascending. Includes zero.
pub fn rationals_up_to(cap: u32) -> Vec<Rat> {
    let cap = cap as i64;
    let mut out = vec![Rat::zero()];
    for den in 1..=cap {
        for num in -cap..=cap {
            if num != 0 && gcd(num.unsigned_abs(), den.unsigned_abs()) == 1 {
                out.push(rat(num, den));
            }
        }
    }
    out.sort();
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Report of the rational-scaling closure comparison: the rational-arithmetic
/// route (rational combinations of the generators, intersected with the
/// ball) against the real route (a float coefficient grid intersected with
/// the ball), compared on an ambient grid. Each grid point within epsilon of
/// one cloud must be within two epsilon of the other.
#[derive(Clone, Debug)]
pub struct RatScalingReport {
    pub pass: bool,
    pub grid_points: usize,
    pub mismatches: usize,
}

pub fn check_rat_scaling(
    component: &LpComponent,
    generators: &[Vec<f64>],
    grid_epsilon: f64,
    coeff_cap: u32,
) -> RatScalingReport {
    let dim = component.dim;
    let m = generators.len();
    let combine = |coeffs: &[f64]| -> Vec<f64> {
        let mut point = vec![0.0; dim];
        for (c, g) in coeffs.iter().zip(generators) {
            for k in 0..dim {
                point[k] += c * g[k];
            }
        }
        point
    };

    // Rational route: dyadic-style coefficients a / coeff_cap on [-2, 2].
    let steps: Vec<f64> = (-(2 * coeff_cap as i64)..=(2 * coeff_cap as i64))
        .map(|a| a as f64 / coeff_cap as f64)
        .collect();
    let mut rational_cloud: Vec<Vec<f64>> = Vec::new();
    let mut coeffs = vec![0.0; m];
    build_cloud(&steps, &mut coeffs, 0, &combine, component, &mut rational_cloud);

    // Real route: an offset midpoint grid, independent of the rational one.
    let t_count = 4 * coeff_cap as i64 + 7;
    let real_steps: Vec<f64> = (0..t_count)
        .map(|t| -2.0 + 4.0 * (t as f64 + 0.5) / t_count as f64)
        .collect();
    let mut real_cloud: Vec<Vec<f64>> = Vec::new();
    let mut coeffs = vec![0.0; m];
    build_cloud(&real_steps, &mut coeffs, 0, &combine, component, &mut real_cloud);

    // Ambient grid over the ball with spacing epsilon / 2.
    let spacing = grid_epsilon / 2.0;
    let per_axis = (2.0 / spacing).ceil() as i64 + 1;
    let mut grid_points = 0usize;
    let mut mismatches = 0usize;
    let mut idx = vec![0i64; dim];
    loop {
        let point: Vec<f64> = idx.iter().map(|&i| -1.0 + i as f64 * spacing).collect();
        if component.norm(&point) <= 1.0 + spacing {
            grid_points += 1;
            let d1 = nearest(component, &point, &rational_cloud);
            let d2 = nearest(component, &point, &real_cloud);
            let near1 = d1 <= grid_epsilon;
            let near2 = d2 <= grid_epsilon;
            if (near1 && d2 > 2.0 * grid_epsilon) || (near2 && d1 > 2.0 * grid_epsilon) {
                mismatches += 1;
            }
        }
        // Odometer.
        let mut carry = true;
        for slot in idx.iter_mut().rev() {
            if carry {
                *slot += 1;
                if *slot < per_axis {
                    carry = false;
                } else {
                    *slot = 0;
                }
            }
        }
        if carry {
            break;
        }
    }
    RatScalingReport {
        pass: mismatches == 0,
        grid_points,
        mismatches,
    }
}

fn build_cloud(
    steps: &[f64],
    coeffs: &mut Vec<f64>,
    level: usize,
    combine: &dyn Fn(&[f64]) -> Vec<f64>,
    component: &LpComponent,
    out: &mut Vec<Vec<f64>>,
) {
    if level == coeffs.len() {
        let p = combine(coeffs);
        if component.norm(&p) <= 1.0 + 1e-12 {
            out.push(p);
        }
        return;
    }
    for &s in steps {
        coeffs[level] = s;
        build_cloud(steps, coeffs, level + 1, combine, component, out);
    }
}

fn nearest(component: &LpComponent, point: &[f64], cloud: &[Vec<f64>]) -> f64 {
    cloud
        .iter()
        .map(|c| component.distance(point, c))
        .fold(f64::INFINITY, f64::min)
}

/// A synthetic non-expansive model bijection: a rational contraction factor
/// composed with a signed coordinate permutation, applied to random rational
/// ball points (zero always included). Exactly non-expansive with defect
/// `(1 - factor) * distance` on every pair.
pub fn synthetic_model<R: Rng>(
    dim: usize,
    extra_points: usize,
    allow_isometry: bool,
    rng: &mut R,
) -> ModelMap {
    let factors = [rat(1, 1), rat(1, 2), rat(2, 3), rat(3, 4), rat(4, 5), rat(5, 6)];
    let factor = loop {
        let f = factors[rng.random_range(0..factors.len())].clone();
        if allow_isometry || !f.is_one() {
            break f;
        }
    };
    let mut perm: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let signs: Vec<i8> = (0..dim)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();

    let mut domain: Vec<RatVec> = vec![vec![Rat::zero(); dim]];
    while domain.len() < extra_points + 1 {
        let candidate: RatVec = (0..dim)
            .map(|_| {
                let den = rng.random_range(1i64..=6);
                let num = rng.random_range(-den..=den);
                rat(num, den)
            })
            .collect();
        if !domain.contains(&candidate) {
            domain.push(candidate);
        }
    }
    let image: Vec<RatVec> = domain
        .iter()
        .map(|x| {
            let permuted: RatVec = perm
                .iter()
                .zip(&signs)
                .map(|(&src, &s)| {
                    if s >= 0 {
                        x[src].clone()
                    } else {
                        -x[src].clone()
                    }
                })
                .collect();
            vec_scale(&factor, &permuted)
        })
        .collect();
    ModelMap::new(domain, image).expect("synthetic model is valid by construction")
}

/// Deterministic sample pairs for shift checks: supports drawn from the
/// model's own domain and image points so the shift is defined everywhere
/// it needs to be.
pub fn sample_seq_pairs(model: &ShiftModel, count: usize, seed: u64) -> Vec<(SeqPoint, SeqPoint)> {
    let mut rng: SeededRng = rng_from_seed(seed);
    let domain = model.map.domain();
    let image = model.map.image();
    let random_point = |rng: &mut SeededRng| {
        let mut blocks: Vec<(i64, RatVec)> = Vec::new();
        for index in -3i64..=2 {
            if rng.random::<f64>() < 0.5 {
                continue;
            }
            let block = if index < 0 {
                domain[rng.random_range(0..domain.len())].clone()
            } else {
                image[rng.random_range(0..image.len())].clone()
            };
            blocks.push((index, block));
        }
        SeqPoint::from_blocks(blocks)
    };
    (0..count)
        .map(|_| (random_point(&mut rng), random_point(&mut rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banach_geometry::PExponent;

    fn rv(coords: &[(i64, i64)]) -> RatVec {
        coords.iter().map(|&(n, d)| rat(n, d)).collect()
    }

    fn identity_model(points: Vec<RatVec>) -> ModelMap {
        ModelMap::new(points.clone(), points).unwrap()
    }

    #[test]
    fn model_map_validation() {
        // Expanding pair rejected.
        let err = ModelMap::new(
            vec![rv(&[(0, 1)]), rv(&[(1, 2)])],
            vec![rv(&[(0, 1)]), rv(&[(1, 1)])],
        )
        .unwrap_err();
        assert!(matches!(err, ConstructionError::NotNonexpansive { .. }));
        // Out-of-ball point rejected.
        let err = ModelMap::new(vec![rv(&[(3, 2)])], vec![rv(&[(1, 1)])]).unwrap_err();
        assert!(matches!(err, ConstructionError::NotInBall { .. }));
        // Duplicate image rejected.
        let err = ModelMap::new(
            vec![rv(&[(0, 1)]), rv(&[(1, 2)])],
            vec![rv(&[(0, 1)]), rv(&[(0, 1)])],
        )
        .unwrap_err();
        assert!(matches!(err, ConstructionError::NotBijective { side: "image" }));
    }

    #[test]
    fn shift_moves_blocks_right() {
        let model = ShiftModel::new(identity_model(vec![
            rv(&[(0, 1)]),
            rv(&[(1, 2)]),
            rv(&[(1, 1)]),
        ]));
        // Supported at -3 only: the block moves to -2, f(0) = 0 adds nothing.
        let z = SeqPoint::from_blocks([(-3, rv(&[(1, 2)]))]);
        let shifted = model.shift(&z).unwrap();
        assert_eq!(shifted, SeqPoint::from_blocks([(-2, rv(&[(1, 2)]))]));

        // Zero maps to zero when f(0) = 0.
        assert_eq!(model.shift(&SeqPoint::zero()).unwrap(), SeqPoint::zero());

        // The block at -1 passes through the map to index 0.
        let z = SeqPoint::from_blocks([(-1, rv(&[(1, 1)]))]);
        let shifted = model.shift(&z).unwrap();
        assert_eq!(shifted, SeqPoint::from_blocks([(0, rv(&[(1, 1)]))]));
    }

    #[test]
    fn shift_undefined_outside_model() {
        let model = ShiftModel::new(identity_model(vec![rv(&[(0, 1)])]));
        let z = SeqPoint::from_blocks([(-1, rv(&[(1, 2)]))]);
        assert!(matches!(
            model.shift(&z),
            Err(ConstructionError::MapUndefined)
        ));
    }

    #[test]
    fn defect_embedding_is_exact() {
        // f = (1/2) * identity on a 1-D model: defect at (x, x') is half
        // their distance, exactly.
        let domain = vec![rv(&[(0, 1)]), rv(&[(1, 1)]), rv(&[(-1, 2)])];
        let image: Vec<RatVec> = domain.iter().map(|x| vec_scale(&rat(1, 2), x)).collect();
        let model = ShiftModel::new(ModelMap::new(domain, image).unwrap());
        let report = shift_properties(&model, &sample_seq_pairs(&model, 50, 9)).unwrap();
        assert!(report.pass(), "{:?}", report.failure);
        // Frozen instance: pair (0, 1) has distance 1, images distance 1/2.
        assert_eq!(model.map.defect(0, 1), rat(1, 2));
    }

    #[test]
    fn shift_isometry_stays_isometric() {
        let domain = vec![rv(&[(0, 1)]), rv(&[(2, 3)]), rv(&[(-1, 1)])];
        let model = ShiftModel::new(identity_model(domain));
        let pairs = sample_seq_pairs(&model, 40, 4);
        for (z, w) in &pairs {
            let fz = model.shift(z).unwrap();
            let fw = model.shift(w).unwrap();
            assert_eq!(seq_distance(&fz, &fw), seq_distance(z, w));
        }
    }

    #[test]
    fn closure_zero_seed_is_fixed_point() {
        let forward = GeneratorMap::identity(2);
        let inverse = forward.inverse().unwrap();
        let mut state =
            ClosureState::seed(2, forward, inverse, vec![vec![Rat::zero(), Rat::zero()]])
                .unwrap();
        let stats = state.step(3, 64).unwrap();
        assert_eq!(stats.added, 0);
        assert_eq!(state.len(), 1);
        // Idempotence at the fixed point.
        let stats = state.step(3, 64).unwrap();
        assert_eq!(stats.added, 0);
    }

    #[test]
    fn closure_step_adds_scales_and_sums() {
        let forward = GeneratorMap::identity(1);
        let inverse = forward.inverse().unwrap();
        let mut state = ClosureState::seed(1, forward, inverse, vec![rv(&[(1, 1)])]).unwrap();
        state.step(2, 64).unwrap();
        // Doubling via the sum rule and scaling by small rationals.
        assert!(state.contains(&rv(&[(2, 1)])));
        assert!(state.contains(&rv(&[(1, 2)])));
        assert!(state.contains(&rv(&[(-1, 2)])));
        assert!(state.contains(&rv(&[(0, 1)])));
    }

    #[test]
    fn closure_monotone_and_replayable() {
        let forward = GeneratorMap::radial_profile(vec![
            (rat(0, 1), rat(0, 1)),
            (rat(1, 2), rat(1, 4)),
            (rat(1, 1), rat(1, 1)),
        ])
        .unwrap();
        let inverse = forward.inverse().unwrap();
        let mut state = ClosureState::seed(
            2,
            forward,
            inverse,
            vec![rv(&[(1, 1), (0, 1)]), rv(&[(1, 3), (1, 2)])],
        )
        .unwrap();
        let mut prev: Vec<RatVec> = state.elements().to_vec();
        for _ in 0..3 {
            state.step(2, 32).unwrap();
            // Monotone: earlier elements retained in order.
            assert_eq!(&state.elements()[..prev.len()], &prev[..]);
            prev = state.elements().to_vec();
        }
        for id in 0..state.len() {
            assert_eq!(state.replay(id).unwrap(), state.elements()[id], "id {id}");
        }
        let lines = state.derivation_lines();
        assert!(lines.lines().count() == state.len());
        assert!(lines.starts_with("0: seed()"));
    }

    #[test]
    fn radial_profile_round_trips() {
        let profile = GeneratorMap::radial_profile(vec![
            (rat(0, 1), rat(0, 1)),
            (rat(1, 2), rat(1, 4)),
            (rat(1, 1), rat(1, 1)),
        ])
        .unwrap();
        let inverse = profile.inverse().unwrap();
        for x in [rv(&[(1, 2), (1, 4)]), rv(&[(-2, 3), (1, 5)]), rv(&[(0, 1), (0, 1)])] {
            let y = profile.apply(&x).unwrap();
            assert_eq!(inverse.apply(&y).unwrap(), x);
        }
        // Norm 1/2 maps to norm 1/4 exactly.
        let y = profile.apply(&rv(&[(1, 2), (0, 1)])).unwrap();
        assert_eq!(linf_norm(&y), rat(1, 4));
    }

    #[test]
    fn table_generator_partiality_is_a_domain_error() {
        let table = GeneratorMap::Table(identity_model(vec![rv(&[(0, 1)])]));
        let inverse = table.inverse().unwrap();
        let mut state = ClosureState::seed(1, table, inverse, vec![rv(&[(1, 2)])]).unwrap();
        assert!(matches!(
            state.step(2, 8),
            Err(ConstructionError::MapUndefined)
        ));
    }

    #[test]
    fn synthetic_models_are_valid_and_defective() {
        let mut rng = rng_from_seed(77);
        for _ in 0..20 {
            let model = synthetic_model(2, 5, false, &mut rng);
            // Non-isometric by construction: some pair loses distance.
            let n = model.domain().len();
            let mut any_defect = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = model.defect(i, j);
                    assert!(d >= Rat::zero());
                    if d > Rat::zero() {
                        any_defect = true;
                    }
                }
            }
            assert!(any_defect);
        }
    }

    #[test]
    fn rationals_enumeration() {
        let qs = rationals_up_to(2);
        // -2, -1, -1/2, 0, 1/2, 1, 2: numerators and denominators up to 2.
        assert_eq!(qs.len(), 7);
        assert!(qs.windows(2).all(|w| w[0] < w[1]));
        assert!(qs.contains(&rat(-1, 2)));
        assert!(!qs.contains(&rat(3, 2)));
    }

    #[test]
    fn rat_scaling_catalogued_sets() {
        let l2 = LpComponent::new(2, PExponent::Finite(2.0)).unwrap();
        // Rational multiples of a single vector: both routes give the
        // segment [-1, 1] x {0}.
        let report = check_rat_scaling(&l2, &[vec![1.0, 0.0]], 0.125, 16);
        assert!(report.pass, "segment: {} mismatches", report.mismatches);
        // The zero set: both routes are {0}.
        let report = check_rat_scaling(&l2, &[], 0.125, 16);
        assert!(report.pass, "zero: {} mismatches", report.mismatches);
        // A spanning pair: both routes fill the ball.
        let report = check_rat_scaling(&l2, &[vec![1.0, 0.25], vec![-0.2, 0.9]], 0.125, 16);
        assert!(report.pass, "plane: {} mismatches", report.mismatches);
    }
}
