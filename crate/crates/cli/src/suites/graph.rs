//! Clique suites: unique extension of near-maximal cliques and the exact
//! maximum-clique bound, exhaustively over a shape catalog.

use serde_json::json;

use plab_core::ball_graph::{ProductShape, ProductVertex, VertexId};
use plab_core::clique_engine::{
    extend_clique, for_each_clique_of_size, max_clique_size_capped, ConormalAdjacency,
};

use crate::catalog::catalog_shapes;
use crate::config::{RunConfig, ShapeSpec};
use crate::report::{CheckResult, Witness};
use crate::suites::{map_indexed, payload_field, RunOptions, SuiteError};

fn shape_witness(suite: &str, check: &str, shape: &ProductShape, extra: serde_json::Value) -> Witness {
    let mut payload = json!({ "shape": ShapeSpec::from_shape(shape) });
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

fn vertex_array(verts: &[ProductVertex]) -> serde_json::Value {
    json!(verts
        .iter()
        .map(|v| v.coords().to_vec())
        .collect::<Vec<Vec<VertexId>>>())
}

fn check_clique_ext_shape(shape: &ProductShape, clique_cap: usize) -> Result<CheckResult, SuiteError> {
    let n = shape.n();
    let k = (1usize << n) - 1;
    let graph = ConormalAdjacency::build(shape, clique_cap)?;
    let mut cliques = 0u64;
    let mut max_extension = 0usize;
    let mut offender: Option<(Vec<usize>, Vec<usize>)> = None;
    for_each_clique_of_size(&graph, k, |members, common| {
        cliques += 1;
        let ext = common.count();
        if ext > max_extension {
            max_extension = ext;
            if ext > 1 && offender.is_none() {
                offender = Some((members.to_vec(), common.iter().collect()));
            }
        }
    });
    let name = format!("clique-ext/{}", shape.label());
    let detail = json!({
        "vertices": graph.vertex_count(),
        "cliques": cliques,
        "max_extension": max_extension,
    });
    if let Some((members, ext)) = offender {
        let members: Vec<ProductVertex> = members.iter().map(|&r| graph.indexer.vertex(r)).collect();
        let ext: Vec<ProductVertex> = ext.iter().map(|&r| graph.indexer.vertex(r)).collect();
        let witness = shape_witness(
            "clique-ext",
            &name,
            shape,
            json!({ "clique": vertex_array(&members), "extension": vertex_array(&ext) }),
        );
        return Ok(CheckResult::fail(name, Some(detail), witness));
    }
    Ok(CheckResult::pass(name, Some(detail)))
}

pub fn clique_ext(config: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckResult>, SuiteError> {
    let shapes = catalog_shapes(&config.effective_limits());
    let results = map_indexed(opts.jobs, &shapes, |_, shape| {
        check_clique_ext_shape(shape, config.caps.clique_cap)
    });
    results.into_iter().collect()
}

fn check_max_clique_shape(shape: &ProductShape, clique_cap: usize) -> Result<CheckResult, SuiteError> {
    let bound = 1usize << shape.n();
    let max = max_clique_size_capped(shape, clique_cap)?;
    let all_pairs = shape.all_pairs_positive();
    let pass = max <= bound && (!all_pairs || max == bound);
    let name = format!("max-clique/{}", shape.label());
    let detail = json!({ "max_clique": max, "bound": bound, "all_pairs": all_pairs });
    Ok(CheckResult::from_outcome(name.clone(), pass, Some(detail), || {
        shape_witness("max-clique", &name, shape, json!({ "max_clique": max }))
    }))
}

pub fn max_clique(config: &RunConfig, opts: &RunOptions) -> Result<Vec<CheckResult>, SuiteError> {
    let shapes = catalog_shapes(&config.effective_limits());
    let results = map_indexed(opts.jobs, &shapes, |_, shape| {
        check_max_clique_shape(shape, config.caps.clique_cap)
    });
    results.into_iter().collect()
}

pub fn replay(witness: &Witness) -> Result<CheckResult, SuiteError> {
    let shape_spec: ShapeSpec = serde_json::from_value(payload_field(witness, "shape")?.clone())
        .map_err(|e| SuiteError::Witness(e.to_string()))?;
    let shape = shape_spec.to_shape()?;
    match witness.suite.as_str() {
        "clique-ext" => {
            let clique: Vec<Vec<VertexId>> =
                serde_json::from_value(payload_field(witness, "clique")?.clone())
                    .map_err(|e| SuiteError::Witness(e.to_string()))?;
            let members: Vec<ProductVertex> =
                clique.into_iter().map(ProductVertex::new).collect();
            let ext = extend_clique(&shape, &members)?;
            let pass = ext.len() <= 1;
            let detail = json!({ "extension": vertex_array(&ext) });
            Ok(CheckResult::from_outcome(
                witness.check.clone(),
                pass,
                Some(detail),
                || witness.clone(),
            ))
        }
        "max-clique" => check_max_clique_shape(&shape, 4096),
        other => Err(SuiteError::UnknownSuite(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ShapeLimits;

    #[test]
    fn minimal_catalog_passes() {
        let mut config = RunConfig::default_for("clique-ext");
        config.limits = Some(ShapeLimits {
            max_n: 2,
            max_pairs: 1,
            max_isolated: 1,
        });
        let checks = clique_ext(&config, &RunOptions::default()).unwrap();
        assert_eq!(checks.len(), 9);
        assert!(checks.iter().all(|c| c.pass));

        config.suite = "max-clique".into();
        let checks = max_clique(&config, &RunOptions::default()).unwrap();
        assert!(checks.iter().all(|c| c.pass));
    }

    #[test]
    fn replay_on_a_valid_clique() {
        let witness = Witness {
            suite: "clique-ext".into(),
            check: "clique-ext/manual".into(),
            payload: json!({
                "shape": { "components": [ {"pairs": 1, "isolated": 0}, {"pairs": 1, "isolated": 0} ] },
                "clique": [[0, 0], [0, 1], [1, 0]],
            }),
        };
        let result = replay(&witness).unwrap();
        assert!(result.pass);
        // The unique extension is the opposite corner.
        assert_eq!(
            result.detail.unwrap()["extension"],
            json!([[1, 1]])
        );
    }

    #[test]
    fn replay_rejects_malformed_witness() {
        let witness = Witness {
            suite: "clique-ext".into(),
            check: "x".into(),
            payload: json!({}),
        };
        assert!(matches!(replay(&witness), Err(SuiteError::Witness(_))));
    }
}
