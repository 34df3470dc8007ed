//! Exact-rational model suites: shift-construction property transfer,
//! closure iteration with derivation replay, and the rational-scaling
//! closure comparison.

use serde_json::json;

use plab_core::banach_geometry::{LpComponent, PExponent};
use plab_core::constructions::{
    check_rat_scaling, rat, sample_seq_pairs, shift_properties, synthetic_model, ClosureState,
    GeneratorMap, ShiftModel,
};
use plab_core::sampling::{mix_seed, rng_from_seed};
use rand::Rng;

use crate::config::RunConfig;
use crate::report::{CheckResult, Witness};
use crate::suites::{map_indexed, payload_u64, RunOptions, SuiteError};

/// Runs one synthetic shift model; fully determined by its seed.
pub fn shift_instance(instance_seed: u64) -> Result<plab_core::constructions::ShiftReport, SuiteError> {
    let mut rng = rng_from_seed(instance_seed);
    let dim = rng.random_range(1usize..=3);
    let extra = rng.random_range(4usize..=7);
    let allow_isometry = rng.random::<f64>() < 0.2;
    let model = ShiftModel::new(synthetic_model(dim, extra, allow_isometry, &mut rng));
    let pairs = sample_seq_pairs(&model, 30, mix_seed(instance_seed, 1));
    Ok(shift_properties(&model, &pairs)?)
}

pub fn shift(config: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckResult>, SuiteError> {
    let models = config.instances.unwrap_or(100);
    let indices: Vec<usize> = (0..models).collect();
    let outcomes = map_indexed(opts.jobs, &indices, |_, &idx| {
        let seed = mix_seed(config.seed, 0x51f7 + idx as u64);
        (seed, shift_instance(seed))
    });
    let mut nonexpansive = true;
    let mut bijective = true;
    let mut defect = true;
    let mut pairs_checked = 0usize;
    let mut bad: Option<(u64, String)> = None;
    for (seed, outcome) in outcomes {
        let report = outcome?;
        pairs_checked += report.pairs_checked;
        nonexpansive &= report.nonexpansive_ok;
        bijective &= report.injective_ok && report.round_trip_ok;
        defect &= report.defect_conserved;
        if !report.pass() && bad.is_none() {
            bad = Some((seed, report.failure.clone().unwrap_or_default()));
        }
    }
    let witness = |name: &str| {
        let (seed, error) = bad.clone().unwrap_or((0, String::new()));
        Witness {
            suite: "shift".into(),
            check: name.to_string(),
            payload: json!({ "instance_seed": seed, "error": error }),
        }
    };
    let detail = json!({ "models": models, "pairs_checked": pairs_checked });
    Ok(vec![
        CheckResult::from_outcome(
            "shift/defect-conservation",
            defect,
            Some(detail.clone()),
            || witness("shift/defect-conservation"),
        ),
        CheckResult::from_outcome(
            "shift/non-expansive",
            nonexpansive,
            Some(detail.clone()),
            || witness("shift/non-expansive"),
        ),
        CheckResult::from_outcome("shift/bijectivity", bijective, Some(detail), || {
            witness("shift/bijectivity")
        }),
    ])
}

fn closure_generators() -> (GeneratorMap, GeneratorMap) {
    let forward = GeneratorMap::radial_profile(vec![
        (rat(0, 1), rat(0, 1)),
        (rat(1, 2), rat(1, 4)),
        (rat(1, 1), rat(1, 1)),
    ])
    .expect("valid knots");
    let inverse = forward.inverse().expect("profile inverts");
    (forward, inverse)
}

/// Closure run over the radial-profile generators. Returns per-step sizes,
/// whether the order stayed monotone, and whether every element replayed.
pub fn closure_run(
    depth: usize,
    rational_cap: u32,
    sum_cap: usize,
) -> Result<(Vec<usize>, bool, bool), SuiteError> {
    let (forward, inverse) = closure_generators();
    let mut state = ClosureState::seed(
        2,
        forward,
        inverse,
        vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(1, 3), rat(1, 2)],
        ],
    )?;
    let mut sizes = vec![state.len()];
    let mut monotone = true;
    let mut prev = state.elements().to_vec();
    for _ in 0..depth {
        state.step(rational_cap, sum_cap)?;
        monotone &= state.elements()[..prev.len()] == prev[..];
        prev = state.elements().to_vec();
        sizes.push(state.len());
    }
    let mut replay_ok = true;
    for id in 0..state.len() {
        replay_ok &= state.replay(id)? == state.elements()[id];
    }
    Ok((sizes, monotone, replay_ok))
}

pub fn closure_derivation_dump(
    depth: usize,
    rational_cap: u32,
    sum_cap: usize,
) -> Result<String, SuiteError> {
    let (forward, inverse) = closure_generators();
    let mut state = ClosureState::seed(
        2,
        forward,
        inverse,
        vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(1, 3), rat(1, 2)],
        ],
    )?;
    for _ in 0..depth {
        state.step(rational_cap, sum_cap)?;
    }
    Ok(state.derivation_lines())
}

pub fn closure(config: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckResult>, SuiteError> {
    let caps = &config.caps;
    let mut checks = Vec::new();

    // The zero seed with identity generators is an immediate fixed point.
    let forward = GeneratorMap::identity(2);
    let inverse = forward.inverse()?;
    let mut state = ClosureState::seed(2, forward, inverse, vec![vec![rat(0, 1), rat(0, 1)]])
        .map_err(SuiteError::Construction)?;
    let first = state.step(caps.rational_cap, caps.sum_cap)?;
    let second = state.step(caps.rational_cap, caps.sum_cap)?;
    let pass = first.added == 0 && second.added == 0 && state.len() == 1;
    let name = "closure/zero-fixed-point".to_string();
    let detail = json!({ "added_first": first.added, "added_second": second.added });
    checks.push(CheckResult::from_outcome(name.clone(), pass, Some(detail), || Witness {
        suite: "closure".into(),
        check: name.clone(),
        payload: json!({ "case": "zero" }),
    }));

    let (sizes, monotone, replay_ok) = closure_run(caps.depth, caps.rational_cap, caps.sum_cap)?;
    let name = "closure/monotone-growth".to_string();
    let detail = json!({ "sizes": sizes });
    checks.push(CheckResult::from_outcome(name.clone(), monotone, Some(detail), || Witness {
        suite: "closure".into(),
        check: name.clone(),
        payload: json!({ "case": "growth" }),
    }));

    let name = "closure/derivation-replay".to_string();
    checks.push(CheckResult::from_outcome(name.clone(), replay_ok, None, || Witness {
        suite: "closure".into(),
        check: name.clone(),
        payload: json!({ "case": "replay" }),
    }));

    if let Some(path) = &opts.dump_derivations {
        let lines = closure_derivation_dump(caps.depth, caps.rational_cap, caps.sum_cap)?;
        std::fs::write(path, lines)?;
    }
    Ok(checks)
}

/// The three catalogued generator sets for the scaling-closure comparison.
pub fn rat_scaling_cases() -> Vec<(&'static str, Vec<Vec<f64>>)> {
    vec![
        ("segment", vec![vec![1.0, 0.0]]),
        ("zero", vec![]),
        ("plane", vec![vec![1.0, 0.25], vec![-0.2, 0.9]]),
    ]
}

pub fn rat_scaling(config: &RunConfig) -> Result<Vec<CheckResult>, SuiteError> {
    let component = LpComponent::new(2, PExponent::Finite(2.0))?;
    let epsilon = config.tolerances.grid_epsilon;
    let mut checks = Vec::new();
    for (label, generators) in rat_scaling_cases() {
        let report = check_rat_scaling(&component, &generators, epsilon, 16);
        let name = format!("rat-scaling/{label}");
        let detail = json!({
            "grid_points": report.grid_points,
            "mismatches": report.mismatches,
            "grid_epsilon": epsilon,
        });
        checks.push(CheckResult::from_outcome(name.clone(), report.pass, Some(detail), || {
            Witness {
                suite: "rat-scaling".into(),
                check: name.clone(),
                payload: json!({ "case": label }),
            }
        }));
    }
    Ok(checks)
}

pub fn replay(witness: &Witness) -> Result<CheckResult, SuiteError> {
    let (pass, detail) = match witness.suite.as_str() {
        "shift" => {
            let seed = payload_u64(witness, "instance_seed")?;
            let report = shift_instance(seed)?;
            (report.pass(), json!({ "failure": report.failure }))
        }
        "closure" => {
            let (sizes, monotone, replay_ok) = closure_run(3, 3, 64)?;
            (monotone && replay_ok, json!({ "sizes": sizes }))
        }
        "rat-scaling" => {
            let case = witness
                .payload
                .get("case")
                .and_then(|v| v.as_str())
                .ok_or_else(|| SuiteError::Witness("missing case".into()))?;
            let generators = rat_scaling_cases()
                .into_iter()
                .find(|(label, _)| *label == case)
                .ok_or_else(|| SuiteError::Witness(format!("unknown case {case:?}")))?
                .1;
            let component = LpComponent::new(2, PExponent::Finite(2.0))?;
            let report = check_rat_scaling(&component, &generators, 0.125, 16);
            (report.pass, json!({ "mismatches": report.mismatches }))
        }
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
    fn shift_suite_small_run() {
        let mut config = RunConfig::default_for("shift");
        config.instances = Some(10);
        let checks = shift(&config, &RunOptions::default()).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }

    #[test]
    fn closure_suite_passes() {
        let config = RunConfig::default_for("closure");
        let checks = closure(&config, &RunOptions::default()).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }
}
