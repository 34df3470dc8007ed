//! Numeric geometry suites: homogeneous-extension inverse identities,
//! homogeneity checks with perturbation controls, tangent-ball intersection
//! estimates with a max-norm control, sampled isometry certification with a
//! falsification harness, and the ball-to-graph bridge.

use rand::Rng;
use serde_json::json;

use plab_core::ball_graph::{enumerate_vertices, ProductShape};
use plab_core::banach_geometry::{
    ball_to_graph, certify_isometry, check_homogeneity,
    homogeneity_equiv_probe, nonexpansive_to_graph_hom, two_ball_intersection_diameter,
    HomogeneousExtension, IsometryCertificate, LpComponent, PExponent, SphereMap,
    SphereMapFamily, SumSpace, SumSpacePoint,
};
use plab_core::factorizer::{build_from_factors, Factorization, InteriorAssignment, LocalMap};
use plab_core::sampling::{mix_seed, random_orthogonal, random_signed_permutation, rng_from_seed};

use crate::config::{RunConfig, SpaceSpec};
use crate::numeric_text;
use crate::report::{CheckResult, Witness};
use crate::suites::{map_indexed, payload_field, payload_u64, RunOptions, SuiteError};

fn space_witness(suite: &str, check: &str, spec: &SpaceSpec, extra: serde_json::Value) -> Witness {
    let mut payload = json!({ "space": spec });
    if let (Some(obj), Some(extra_obj)) = (payload.as_object_mut(), extra.as_object()) {
        for (k, v) in extra_obj {
            obj.insert(k.clone(), v.clone());
        }
    }
    Witness {
        suite: suite.into(),
        check: check.into(),
        payload,
    }
}

#[derive(Clone, Debug)]
pub struct GammaPhiOutcome {
    pub max_round_trip: f64,
    pub max_blockwise: f64,
    pub max_oddness: f64,
    pub pass: bool,
}

/// Round-trip, blockwise-norm, and oddness deviations of the forward and
/// inverse extensions of one random isometric family.
pub fn gamma_phi_space(
    spec: &SpaceSpec,
    samples: usize,
    algebraic_tol: f64,
    blockwise_tol: f64,
    seed: u64,
    dump: Option<&mut String>,
) -> Result<GammaPhiOutcome, SuiteError> {
    let space = spec.to_space()?;
    let mut rng = rng_from_seed(seed);
    let family = SphereMapFamily::random_isometric(&space, &mut rng);
    family.validate(&space)?;
    let gamma = HomogeneousExtension::forward(family.clone());
    let phi = HomogeneousExtension::inverse_of(&family)?;
    let mut max_round_trip = 0.0f64;
    let mut max_blockwise = 0.0f64;
    let mut max_oddness = 0.0f64;
    let mut dump = dump;
    for _ in 0..samples {
        let z = space.sample_ball(&mut rng);
        let gz = gamma.apply(&space, &z)?;
        let back = phi.apply(&space, &gz)?;
        max_round_trip = max_round_trip.max(space.distance(&back, &z));
        let before = space.block_norms(&z);
        let after = space.block_norms(&gz);
        for (i, &target) in family.sigma.iter().enumerate() {
            max_blockwise = max_blockwise.max((after[target] - before[i]).abs());
        }
        let gneg = gamma.apply(&space, &space.negate(&z))?;
        max_oddness = max_oddness.max(space.distance(&gneg, &space.negate(&gz)));
        if let Some(out) = dump.as_deref_mut() {
            out.push_str(&numeric_text::point_line(&[&z, &gz]));
        }
    }
    Ok(GammaPhiOutcome {
        max_round_trip,
        max_blockwise,
        max_oddness,
        pass: max_round_trip <= algebraic_tol
            && max_blockwise <= blockwise_tol
            && max_oddness <= algebraic_tol,
    })
}

pub fn gamma_phi(config: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckResult>, SuiteError> {
    let spaces = config.effective_spaces()?;
    let total = config.samples.unwrap_or(10_000);
    let per_space = total.div_ceil(spaces.len());
    let results = map_indexed(opts.jobs, &spaces, |si, spec| {
        let seed = mix_seed(config.seed, si as u64);
        let outcome = gamma_phi_space(
            spec,
            per_space,
            config.tolerances.algebraic,
            config.tolerances.blockwise,
            seed,
            None,
        );
        (seed, outcome)
    });
    let mut checks = Vec::new();
    for (spec, (seed, outcome)) in spaces.iter().zip(results) {
        let outcome = outcome?;
        let name = format!("gamma-phi/{}", spec.label());
        let detail = json!({
            "samples": per_space,
            "max_round_trip": outcome.max_round_trip,
            "max_blockwise": outcome.max_blockwise,
            "max_oddness": outcome.max_oddness,
        });
        checks.push(CheckResult::from_outcome(
            name.clone(),
            outcome.pass,
            Some(detail),
            || space_witness("gamma-phi", &name, spec, json!({ "instance_seed": seed, "samples": per_space })),
        ));
    }
    if let Some(path) = &opts.dump_samples {
        let mut text = String::new();
        let seed = mix_seed(config.seed, 0);
        gamma_phi_space(
            &spaces[0],
            per_space.min(1000),
            config.tolerances.algebraic,
            config.tolerances.blockwise,
            seed,
            Some(&mut text),
        )?;
        std::fs::write(path, text)?;
    }
    Ok(checks)
}

/// A family with a deliberately nontrivial permutation when the space has a
/// repeated `(dim, p)` class: the largest class is cycled.
fn cycled_family<R: Rng>(space: &SumSpace, rng: &mut R) -> SphereMapFamily {
    let n = space.n();
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (i, c) in space.components().iter().enumerate() {
        let found = classes.iter_mut().find(|m| {
            let j = m[0];
            let other = space.component(j);
            other.dim == c.dim && other.p == c.p
        });
        match found {
            Some(m) => m.push(i),
            None => classes.push(vec![i]),
        }
    }
    if let Some(class) = classes.iter().max_by_key(|m| m.len()) {
        if class.len() > 1 {
            for w in 0..class.len() {
                sigma[class[w]] = class[(w + 1) % class.len()];
            }
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

#[derive(Clone, Debug)]
pub struct HomogeneityOutcome {
    pub exact_pass: bool,
    pub perturbation_detected: bool,
    pub literal_holds: bool,
    pub swapped_holds: bool,
    pub literal_deviation: f64,
    pub swapped_deviation: f64,
}

pub fn homogeneity_space(
    spec: &SpaceSpec,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<HomogeneityOutcome, SuiteError> {
    let space = spec.to_space()?;
    let mut rng = rng_from_seed(seed);
    let family = cycled_family(&space, &mut rng);
    family.validate(&space)?;
    let ext = HomogeneousExtension::forward(family.clone());

    // The extension itself is homogeneous in every k.
    let mut exact_pass = true;
    let exact_space = space.clone();
    let exact_ext = ext.clone();
    let exact = move |z: &SumSpacePoint| exact_ext.apply(&exact_space, z).expect("valid point");
    for k in 0..=space.n() {
        let chk = check_homogeneity(&space, &exact, &ext, k, samples, tol, mix_seed(seed, k as u64))?;
        exact_pass &= chk.pass;
    }

    // An interior-only perturbation must be reported at k = n and invisible
    // at k = 0.
    let pert_space = space.clone();
    let pert_ext = ext.clone();
    let perturbed = move |z: &SumSpacePoint| {
        let mut out = pert_ext.apply(&pert_space, z).expect("valid point");
        for (b, c) in out.blocks.iter_mut().zip(pert_space.components()) {
            let r = c.norm(b);
            if r > 0.0 {
                let scale = (1.0 + 0.05 * (1.0 - r)).min(1.0 / r);
                for v in b.iter_mut() {
                    *v *= scale;
                }
            }
        }
        out
    };
    let at_n = check_homogeneity(
        &space,
        &perturbed,
        &ext,
        space.n(),
        samples.max(200),
        tol,
        mix_seed(seed, 101),
    )?;
    let at_zero = check_homogeneity(&space, &perturbed, &ext, 0, samples, tol, mix_seed(seed, 102))?;
    let perturbation_detected = !at_n.pass && at_n.violation.is_some() && at_zero.pass;

    // Both readings of the coefficient transfer step, recorded without
    // asserting intent.
    let probe = homogeneity_equiv_probe(&space, &family, samples, tol, mix_seed(seed, 103))?;
    Ok(HomogeneityOutcome {
        exact_pass,
        perturbation_detected,
        literal_holds: probe.literal_reading_holds,
        swapped_holds: probe.index_swapped_reading_holds,
        literal_deviation: probe.literal_reading_deviation,
        swapped_deviation: probe.index_swapped_reading_deviation,
    })
}

pub fn homogeneity(config: &RunConfig) -> Result<Vec<CheckResult>, SuiteError> {
    let spaces = config.effective_spaces()?;
    let samples = config.samples.unwrap_or(200);
    let mut checks = Vec::new();
    for (si, spec) in spaces.iter().enumerate() {
        let seed = mix_seed(config.seed, 0xb0 + si as u64);
        let outcome = homogeneity_space(spec, samples, config.tolerances.algebraic, seed)?;
        let label = spec.label();

        let name = format!("homogeneity/exact {label}");
        checks.push(CheckResult::from_outcome(
            name.clone(),
            outcome.exact_pass,
            Some(json!({ "samples": samples })),
            || space_witness("homogeneity", &name, spec, json!({ "instance_seed": seed, "kind": "exact" })),
        ));

        let name = format!("homogeneity/perturbation-detected {label}");
        checks.push(CheckResult::from_outcome(
            name.clone(),
            outcome.perturbation_detected,
            None,
            || space_witness("homogeneity", &name, spec, json!({ "instance_seed": seed, "kind": "perturbation" })),
        ));

        let name = format!("homogeneity/index-reading {label}");
        let detail = json!({
            "literal_holds": outcome.literal_holds,
            "literal_deviation": outcome.literal_deviation,
            "index_swapped_holds": outcome.swapped_holds,
            "index_swapped_deviation": outcome.swapped_deviation,
        });
        checks.push(CheckResult::from_outcome(
            name.clone(),
            outcome.literal_holds || outcome.swapped_holds,
            Some(detail),
            || space_witness("homogeneity", &name, spec, json!({ "instance_seed": seed, "kind": "probe" })),
        ));
    }
    Ok(checks)
}

/// One random tangent configuration in the plane for exponent `p`.
pub fn tangent_instance(p: PExponent, seed: u64, directions: usize) -> Result<f64, SuiteError> {
    let comp = LpComponent::new(2, p)?;
    let mut rng = rng_from_seed(seed);
    let dir = comp.sample_sphere(&mut rng);
    let c1: Vec<f64> = (0..2).map(|_| rng.random_range(-0.3..0.3)).collect();
    let r1: f64 = rng.random_range(0.3..1.2);
    let r2: f64 = rng.random_range(0.3..1.2);
    let c2: Vec<f64> = (0..2).map(|k| c1[k] + (r1 + r2) * dir[k]).collect();
    let report =
        two_ball_intersection_diameter(&comp, &c1, r1, &c2, r2, directions, mix_seed(seed, 1))?;
    Ok(report.diameter_estimate)
}

pub fn tangent_balls(config: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckResult>, SuiteError> {
    let configs = config.instances.unwrap_or(100);
    let directions = config.samples.unwrap_or(64);
    let mut checks = Vec::new();
    for (pi, p) in [1.5f64, 2.0, 3.0].iter().enumerate() {
        let indices: Vec<usize> = (0..configs).collect();
        let outcomes = map_indexed(opts.jobs, &indices, |_, &idx| {
            let seed = mix_seed(config.seed, (pi * 1_000_000 + idx) as u64);
            (seed, tangent_instance(PExponent::Finite(*p), seed, directions))
        });
        let name = format!("tangent-balls/p={p}");
        let mut max_diameter = 0.0f64;
        let mut bad_seed = None;
        for (seed, outcome) in outcomes {
            let d = outcome?;
            if d > max_diameter {
                max_diameter = d;
                if d > config.tolerances.diameter {
                    bad_seed.get_or_insert(seed);
                }
            }
        }
        let pass = max_diameter <= config.tolerances.diameter;
        let detail = json!({ "configs": configs, "max_diameter": max_diameter });
        checks.push(CheckResult::from_outcome(name.clone(), pass, Some(detail), || Witness {
            suite: "tangent-balls".into(),
            check: name.clone(),
            payload: json!({ "p": p, "instance_seed": bad_seed, "directions": directions }),
        }));
    }

    // Necessity of strict convexity: the max-norm control configuration has
    // a fat intersection.
    let comp = LpComponent::new(2, PExponent::Infinity)?;
    let report = two_ball_intersection_diameter(
        &comp,
        &[1.0, 0.0],
        1.0,
        &[-1.0, 0.0],
        1.0,
        directions,
        mix_seed(config.seed, 0xc0),
    )?;
    let name = "tangent-balls/max-norm-control".to_string();
    let pass = report.diameter_estimate >= 1.0;
    let detail = json!({ "diameter": report.diameter_estimate });
    checks.push(CheckResult::from_outcome(name.clone(), pass, Some(detail), || Witness {
        suite: "tangent-balls".into(),
        check: name.clone(),
        payload: json!({ "p": "inf", "instance_seed": mix_seed(config.seed, 0xc0), "directions": directions }),
    }));
    Ok(checks)
}

fn sample_pairs(
    space: &SumSpace,
    count: usize,
    rng: &mut plab_core::sampling::SeededRng,
) -> Vec<(SumSpacePoint, SumSpacePoint)> {
    (0..count)
        .map(|_| (space.sample_ball(rng), space.sample_ball(rng)))
        .collect()
}

/// Certifies the inverse extension of one random isometric family.
pub fn certify_instance(
    spec: &SpaceSpec,
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<IsometryCertificate, SuiteError> {
    let space = spec.to_space()?;
    let mut rng = rng_from_seed(seed);
    let family = SphereMapFamily::random_isometric(&space, &mut rng);
    let phi = HomogeneousExtension::inverse_of(&family)?;
    let map_space = space.clone();
    let map = move |z: &SumSpacePoint| phi.apply(&map_space, z).expect("valid point");
    let pairs = sample_pairs(&space, pairs, &mut rng);
    Ok(certify_isometry(&space, &map, &pairs, tol)?)
}

/// A perturbed candidate for the falsification harness; returns the
/// certificate. A harness violation is a certificate whose sampled
/// hypotheses all hold while the defect exceeds the falsification threshold.
pub fn falsification_instance(
    spec: &SpaceSpec,
    kind: usize,
    pairs: usize,
    tol: f64,
    seed: u64,
) -> Result<IsometryCertificate, SuiteError> {
    let space = spec.to_space()?;
    let mut rng = rng_from_seed(seed);
    let family = SphereMapFamily::random_isometric(&space, &mut rng);
    let phi = HomogeneousExtension::inverse_of(&family)?;
    let map_space = space.clone();
    let map: Box<dyn Fn(&SumSpacePoint) -> SumSpacePoint> = match kind % 3 {
        // Blockwise radial power: fixes the sphere, not 1-Lipschitz, and
        // breaks odd scaling.
        0 => Box::new(move |z: &SumSpacePoint| {
            let mut out = phi.apply(&map_space, z).expect("valid point");
            for (b, c) in out.blocks.iter_mut().zip(map_space.components()) {
                let r = c.norm(b);
                if r > 0.0 {
                    let factor = r.powf(0.15);
                    for v in b.iter_mut() {
                        *v *= factor;
                    }
                }
            }
            out
        }),
        // Global shrink: breaks sphere preservation.
        1 => Box::new(move |z: &SumSpacePoint| map_space.scale(0.9, &phi.apply(&map_space, z).expect("valid point"))),
        // Interior-only translation bump on block 0: breaks scaling.
        _ => Box::new(move |z: &SumSpacePoint| {
            let mut out = phi.apply(&map_space, z).expect("valid point");
            let slack = 1.0 - map_space.norm(&out);
            out.blocks[0][0] += 0.05 * slack.max(0.0);
            out
        }),
    };
    let pairs = sample_pairs(&space, pairs, &mut rng);
    Ok(certify_isometry(&space, &map, &pairs, tol)?)
}

/// Falsification threshold: a certificate counts against the harness only
/// if its measured defect exceeds this while every sampled hypothesis holds.
pub const FALSIFICATION_DEFECT: f64 = 1e-6;

pub fn isometry_certify(config: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckResult>, SuiteError> {
    let spaces = config.effective_spaces()?;
    let maps = config.instances.unwrap_or(100);
    let pairs = config.samples.unwrap_or(10_000);
    let tol = config.tolerances.algebraic;
    let mut checks = Vec::new();

    let indices: Vec<usize> = (0..maps).collect();
    let outcomes = map_indexed(opts.jobs, &indices, |_, &idx| {
        let spec = &spaces[idx % spaces.len()];
        let seed = mix_seed(config.seed, 0x15_000 + idx as u64);
        (idx, seed, certify_instance(spec, pairs, tol, seed))
    });
    let name = "isometry-certify/randomized-families".to_string();
    let mut max_defect = 0.0f64;
    let mut failures = 0usize;
    let mut bad: Option<(usize, u64)> = None;
    let mut dump = String::new();
    for (idx, seed, outcome) in outcomes {
        let cert = outcome?;
        max_defect = max_defect.max(cert.max_defect);
        if !(cert.is_isometry && cert.hypotheses_hold()) {
            failures += 1;
            bad.get_or_insert((idx, seed));
        }
        if idx == 0 {
            dump.push_str(&numeric_text::scalar_line(&[cert.max_defect]));
        }
    }
    let detail = json!({ "maps": maps, "pairs": pairs, "max_defect": max_defect, "failures": failures });
    checks.push(CheckResult::from_outcome(name.clone(), failures == 0, Some(detail), || {
        let (idx, seed) = bad.unwrap_or((0, 0));
        Witness {
            suite: "isometry-certify".into(),
            check: name.clone(),
            payload: json!({
                "space": spaces[idx % spaces.len()],
                "instance_seed": seed,
                "pairs": pairs,
                "kind": "family",
            }),
        }
    }));

    let falsification_pairs = 2000.min(pairs);
    let outcomes = map_indexed(opts.jobs, &indices, |_, &idx| {
        let spec = &spaces[idx % spaces.len()];
        let seed = mix_seed(config.seed, 0xfa_000 + idx as u64);
        (idx, seed, falsification_instance(spec, idx, falsification_pairs, tol, seed))
    });
    let name = "isometry-certify/falsification".to_string();
    let mut violations = 0usize;
    let mut bad: Option<(usize, u64)> = None;
    for (idx, seed, outcome) in outcomes {
        let cert = outcome?;
        if cert.hypotheses_hold() && cert.max_defect > FALSIFICATION_DEFECT {
            violations += 1;
            bad.get_or_insert((idx, seed));
        }
    }
    let detail = json!({ "perturbed_maps": maps, "violations": violations });
    checks.push(CheckResult::from_outcome(name.clone(), violations == 0, Some(detail), || {
        let (idx, seed) = bad.unwrap_or((0, 0));
        Witness {
            suite: "isometry-certify".into(),
            check: name.clone(),
            payload: json!({
                "space": spaces[idx % spaces.len()],
                "instance_seed": seed,
                "pairs": falsification_pairs,
                "kind": idx % 3,
            }),
        }
    }));

    if let Some(path) = &opts.dump_samples {
        std::fs::write(path, dump)?;
    }
    Ok(checks)
}

/// Antipodal discretization of each component: point ids `2k`/`2k+1` are a
/// unit pair, later ids are interior points.
fn discretize(
    space: &SumSpace,
    pairs: &[u32],
    isolated: &[u32],
    seed: u64,
) -> (ProductShape, Vec<SumSpacePoint>) {
    let mut rng = rng_from_seed(seed);
    let per_component: Vec<Vec<Vec<f64>>> = space
        .components()
        .iter()
        .zip(pairs.iter().zip(isolated))
        .map(|(comp, (&p, &m))| {
            let mut pts = Vec::new();
            for _ in 0..p {
                let u = comp.sample_sphere(&mut rng);
                let neg: Vec<f64> = u.iter().map(|v| -v).collect();
                pts.push(u);
                pts.push(neg);
            }
            for _ in 0..m {
                let u = comp.sample_sphere(&mut rng);
                let r: f64 = 0.1 + 0.6 * rng.random::<f64>();
                pts.push(u.iter().map(|v| r * v).collect());
            }
            pts
        })
        .collect();
    let sizes: Vec<(u32, u32)> = pairs.iter().zip(isolated).map(|(&p, &m)| (p, m)).collect();
    let shape = ProductShape::new(&sizes).expect("nontrivial sizes");
    let verts = enumerate_vertices(&shape).expect("small shape");
    let points = verts
        .iter()
        .map(|v| {
            SumSpacePoint::new(
                v.coords()
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| per_component[i][c as usize].clone())
                    .collect(),
            )
        })
        .collect();
    (shape, points)
}

pub fn bridge_edges_case(spec: &SpaceSpec, sizes: &[(u32, u32)], seed: u64) -> Result<bool, SuiteError> {
    let space = spec.to_space()?;
    let pairs: Vec<u32> = sizes.iter().map(|&(p, _)| p).collect();
    let isolated: Vec<u32> = sizes.iter().map(|&(_, i)| i).collect();
    let (shape, points) = discretize(&space, &pairs, &isolated, seed);
    let verts = enumerate_vertices(&shape)?;
    let edges = ball_to_graph(&space, &points, 1e-9)?;
    for a in 0..verts.len() {
        for b in (a + 1)..verts.len() {
            let co = plab_core::ball_graph::conormal_adjacent(&shape, &verts[a], &verts[b])?;
            let ca = plab_core::ball_graph::cartesian_adjacent(&shape, &verts[a], &verts[b])?;
            if edges.conormal.contains(&(a, b)) != co || edges.cartesian.contains(&(a, b)) != ca {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The induced vertex map of a forward extension on an antipodal grid must
/// match the componentwise graph homomorphism built from the corresponding
/// factorization.
pub fn bridge_induced_case() -> Result<bool, SuiteError> {
    let l2 = LpComponent::new(2, PExponent::Finite(2.0))?;
    let space = SumSpace::new(vec![l2, l2])?;
    let u = vec![0.6, 0.8];
    let neg: Vec<f64> = u.iter().map(|v| -v).collect();
    let per_component = [vec![u.clone(), neg.clone()], vec![u.clone(), neg]];
    let shape = ProductShape::new(&[(1, 0), (1, 0)])?;
    let verts = enumerate_vertices(&shape)?;
    let points: Vec<SumSpacePoint> = verts
        .iter()
        .map(|v| {
            SumSpacePoint::new(
                v.coords()
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| per_component[i][c as usize].clone())
                    .collect(),
            )
        })
        .collect();

    // Coordinate-swapping family with identity sphere maps.
    let family = SphereMapFamily {
        sigma: vec![1, 0],
        maps: vec![SphereMap::identity(2), SphereMap::identity(2)],
    };
    family.validate(&space)?;
    let gamma = HomogeneousExtension::forward(family);
    let map_space = space.clone();
    let map = move |z: &SumSpacePoint| gamma.apply(&map_space, z).expect("valid point");
    let induced = nonexpansive_to_graph_hom(&space, &map, &points, 1e-9)?;

    // The same map on the graph side.
    let fact = Factorization {
        sigma: vec![1, 0],
        locals: vec![LocalMap::identity(2), LocalMap::identity(2)],
    };
    let interior = InteriorAssignment {
        per_component: vec![vec![], vec![]],
    };
    let hom = build_from_factors(&shape, &fact, &interior)
        .map_err(|e| SuiteError::Witness(e.to_string()))?;
    let expected: Vec<usize> = (0..verts.len()).map(|r| hom.image_rank(r)).collect();
    Ok(induced.images == expected)
}

pub fn bridge(config: &RunConfig) -> Result<Vec<CheckResult>, SuiteError> {
    let cases: Vec<(SpaceSpec, Vec<(u32, u32)>)> = vec![
        (
            serde_json::from_value(json!({ "components": [ {"dim": 2, "p": 2.0}, {"dim": 3, "p": 1.5} ] }))
                .expect("static spec"),
            vec![(2, 1), (1, 2)],
        ),
        (
            serde_json::from_value(json!({ "components": [ {"dim": 2, "p": 3.0}, {"dim": 2, "p": 2.0}, {"dim": 1, "p": 2.0} ] }))
                .expect("static spec"),
            vec![(1, 1), (1, 0), (1, 1)],
        ),
    ];
    let mut checks = Vec::new();
    for (ci, (spec, sizes)) in cases.iter().enumerate() {
        let seed = mix_seed(config.seed, 0xb1 + ci as u64);
        let pass = bridge_edges_case(spec, sizes, seed)?;
        let name = format!("bridge/edges {}", spec.label());
        checks.push(CheckResult::from_outcome(name.clone(), pass, None, || {
            space_witness("bridge", &name, spec, json!({ "instance_seed": seed, "sizes": sizes, "kind": "edges" }))
        }));
    }
    let name = "bridge/induced-hom".to_string();
    let pass = bridge_induced_case()?;
    checks.push(CheckResult::from_outcome(name.clone(), pass, None, || Witness {
        suite: "bridge".into(),
        check: name.clone(),
        payload: json!({ "kind": "induced" }),
    }));
    Ok(checks)
}

pub fn replay(witness: &Witness) -> Result<CheckResult, SuiteError> {
    let (pass, detail) = match witness.suite.as_str() {
        "gamma-phi" => {
            let spec: SpaceSpec = serde_json::from_value(payload_field(witness, "space")?.clone())
                .map_err(|e| SuiteError::Witness(e.to_string()))?;
            let seed = payload_u64(witness, "instance_seed")?;
            let samples = payload_u64(witness, "samples")? as usize;
            let outcome = gamma_phi_space(&spec, samples, 1e-9, 1e-12, seed, None)?;
            (
                outcome.pass,
                json!({ "max_round_trip": outcome.max_round_trip, "max_blockwise": outcome.max_blockwise }),
            )
        }
        "homogeneity" => {
            let spec: SpaceSpec = serde_json::from_value(payload_field(witness, "space")?.clone())
                .map_err(|e| SuiteError::Witness(e.to_string()))?;
            let seed = payload_u64(witness, "instance_seed")?;
            let outcome = homogeneity_space(&spec, 200, 1e-9, seed)?;
            let kind = payload_field(witness, "kind")?.as_str().unwrap_or("exact");
            let pass = match kind {
                "perturbation" => outcome.perturbation_detected,
                "probe" => outcome.literal_holds || outcome.swapped_holds,
                _ => outcome.exact_pass,
            };
            (pass, json!({ "kind": kind }))
        }
        "tangent-balls" => {
            let seed = payload_u64(witness, "instance_seed")?;
            let directions = payload_u64(witness, "directions")? as usize;
            let p = payload_field(witness, "p")?;
            if p.as_str() == Some("inf") {
                let comp = LpComponent::new(2, PExponent::Infinity)?;
                let report = two_ball_intersection_diameter(
                    &comp, &[1.0, 0.0], 1.0, &[-1.0, 0.0], 1.0, directions, seed,
                )?;
                (
                    report.diameter_estimate >= 1.0,
                    json!({ "diameter": report.diameter_estimate }),
                )
            } else {
                let p = p.as_f64().ok_or_else(|| SuiteError::Witness("bad p".into()))?;
                let d = tangent_instance(PExponent::Finite(p), seed, directions)?;
                (d <= 1e-6, json!({ "diameter": d }))
            }
        }
        "isometry-certify" => {
            let spec: SpaceSpec = serde_json::from_value(payload_field(witness, "space")?.clone())
                .map_err(|e| SuiteError::Witness(e.to_string()))?;
            let seed = payload_u64(witness, "instance_seed")?;
            let pairs = payload_u64(witness, "pairs")? as usize;
            match payload_field(witness, "kind")? {
                v if v.as_str() == Some("family") => {
                    let cert = certify_instance(&spec, pairs, 1e-9, seed)?;
                    (
                        cert.is_isometry && cert.hypotheses_hold(),
                        json!({ "max_defect": cert.max_defect }),
                    )
                }
                v => {
                    let kind = v.as_u64().unwrap_or(0) as usize;
                    let cert = falsification_instance(&spec, kind, pairs, 1e-9, seed)?;
                    (
                        !(cert.hypotheses_hold() && cert.max_defect > FALSIFICATION_DEFECT),
                        json!({ "max_defect": cert.max_defect }),
                    )
                }
            }
        }
        "bridge" => match payload_field(witness, "kind")?.as_str() {
            Some("edges") => {
                let spec: SpaceSpec =
                    serde_json::from_value(payload_field(witness, "space")?.clone())
                        .map_err(|e| SuiteError::Witness(e.to_string()))?;
                let sizes: Vec<(u32, u32)> =
                    serde_json::from_value(payload_field(witness, "sizes")?.clone())
                        .map_err(|e| SuiteError::Witness(e.to_string()))?;
                let seed = payload_u64(witness, "instance_seed")?;
                (bridge_edges_case(&spec, &sizes, seed)?, json!({}))
            }
            _ => (bridge_induced_case()?, json!({})),
        },
        other => return Err(SuiteError::UnknownSuite(other.to_string())),
    };
    Ok(CheckResult::from_outcome(
        witness.check.clone(),
        pass,
        Some(detail),
        || witness.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_cases_pass() {
        let config = RunConfig::default_for("bridge");
        let checks = bridge(&config).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn gamma_phi_single_space() {
        let spec: SpaceSpec =
            serde_json::from_value(json!({ "components": [ {"dim": 2, "p": 2.0}, {"dim": 2, "p": 1.5} ] }))
                .unwrap();
        let outcome = gamma_phi_space(&spec, 500, 1e-9, 1e-12, 7, None).unwrap();
        assert!(outcome.pass, "{outcome:?}");
    }

    #[test]
    fn falsification_perturbations_never_slip_through() {
        let spec: SpaceSpec =
            serde_json::from_value(json!({ "components": [ {"dim": 2, "p": 2.0}, {"dim": 3, "p": 3.0} ] }))
                .unwrap();
        for kind in 0..3 {
            let cert = falsification_instance(&spec, kind, 800, 1e-9, 1234 + kind as u64).unwrap();
            assert!(
                !(cert.hypotheses_hold() && cert.max_defect > FALSIFICATION_DEFECT),
                "kind {kind}: {cert:?}"
            );
        }
    }
}
