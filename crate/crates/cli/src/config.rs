//! Run configuration: suite name, instance descriptions, caps, tolerances,
//! and the seed. The effective config is echoed verbatim into every report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use plab_core::ball_graph::ProductShape;
use plab_core::banach_geometry::{BanachError, LpComponent, PExponent, SumSpace};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("bad shape: {0}")]
    Shape(#[from] plab_core::ball_graph::BallGraphError),
    #[error("bad space: {0}")]
    Space(#[from] BanachError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ComponentSpec {
    pub pairs: u32,
    pub isolated: u32,
}

/// Shape description: `{ "components": [ {"pairs": k, "isolated": m}, ... ] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ShapeSpec {
    pub components: Vec<ComponentSpec>,
}

impl ShapeSpec {
    pub fn to_shape(&self) -> Result<ProductShape, plab_core::ball_graph::BallGraphError> {
        let sizes: Vec<(u32, u32)> = self
            .components
            .iter()
            .map(|c| (c.pairs, c.isolated))
            .collect();
        ProductShape::new(&sizes)
    }

    pub fn from_shape(shape: &ProductShape) -> Self {
        ShapeSpec {
            components: shape
                .components()
                .iter()
                .map(|c| ComponentSpec {
                    pairs: c.pairs(),
                    isolated: c.isolated(),
                })
                .collect(),
        }
    }
}

/// Exponent field accepting a number or the string `"inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PSpec(pub PExponent);

impl Serialize for PSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            PExponent::Finite(p) => s.serialize_f64(p),
            PExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(p) => Ok(PSpec(PExponent::Finite(p))),
            Repr::Text(t) if t == "inf" || t == "infinity" => Ok(PSpec(PExponent::Infinity)),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {t:?}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceComponentSpec {
    pub dim: usize,
    pub p: PSpec,
}

/// Space description: `{ "components": [ {"dim": d, "p": p}, ... ] }`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpaceSpec {
    pub components: Vec<SpaceComponentSpec>,
}

impl SpaceSpec {
    pub fn to_space(&self) -> Result<SumSpace, BanachError> {
        let comps = self
            .components
            .iter()
            .map(|c| LpComponent::new(c.dim, c.p.0))
            .collect::<Result<Vec<_>, _>>()?;
        SumSpace::new(comps)
    }

    pub fn label(&self) -> String {
        self.components
            .iter()
            .map(|c| format!("l{}^{}", c.p.0, c.dim))
            .collect::<Vec<_>>()
            .join("+")
    }
}

/// Catalog limits for shape enumeration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ShapeLimits {
    pub max_n: usize,
    pub max_pairs: u32,
    pub max_isolated: u32,
}

impl Default for ShapeLimits {
    fn default() -> Self {
        ShapeLimits {
            max_n: 3,
            max_pairs: 2,
            max_isolated: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(default)]
pub struct Caps {
    /// Cap on product vertex enumeration.
    pub vertex_cap: usize,
    /// Cap on adjacency-matrix operations (clique search).
    pub clique_cap: usize,
    /// Cap on exhaustive homomorphism enumeration.
    pub hom_cap: usize,
    /// Numerator/denominator bound for closure scaling.
    pub rational_cap: u32,
    /// New sum elements per closure step.
    pub sum_cap: usize,
    /// Closure iteration depth.
    pub depth: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            vertex_cap: 1_000_000,
            clique_cap: 4096,
            hom_cap: 12,
            rational_cap: 3,
            sum_cap: 64,
            depth: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Tolerances {
    /// Algebraic identities (round trips, isometry defects).
    pub algebraic: f64,
    /// Blockwise norm preservation.
    pub blockwise: f64,
    /// Optimization-based diameter estimates.
    pub diameter: f64,
    /// Grid epsilon for the closure comparison.
    pub grid_epsilon: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-9,
            blockwise: 1e-12,
            diameter: 1e-6,
            grid_epsilon: 0.125,
        }
    }
}

/// The full run configuration for one suite invocation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub suite: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<ShapeLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spaces: Option<Vec<SpaceSpec>>,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn default_for(suite: &str) -> Self {
        RunConfig {
            suite: suite.to_string(),
            shape: None,
            limits: None,
            spaces: None,
            caps: Caps::default(),
            tolerances: Tolerances::default(),
            samples: None,
            instances: None,
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn effective_limits(&self) -> ShapeLimits {
        self.limits.unwrap_or_default()
    }

    /// The configured shape, defaulting to two components of one pair plus
    /// one isolated vertex each.
    pub fn effective_shape(&self) -> Result<ProductShape, ConfigError> {
        match &self.shape {
            Some(spec) => Ok(spec.to_shape()?),
            None => Ok(ProductShape::new(&[(1, 1), (1, 1)])?),
        }
    }

    /// The configured spaces, defaulting to a small catalog with n up to 3,
    /// exponents 1.5, 2, and 3, dimensions up to 4.
    pub fn effective_spaces(&self) -> Result<Vec<SpaceSpec>, ConfigError> {
        if let Some(spaces) = &self.spaces {
            if spaces.is_empty() {
                return Err(ConfigError::Invalid("spaces must be nonempty".into()));
            }
            return Ok(spaces.clone());
        }
        Ok(default_space_catalog())
    }
}

fn space(components: &[(usize, f64)]) -> SpaceSpec {
    SpaceSpec {
        components: components
            .iter()
            .map(|&(dim, p)| SpaceComponentSpec {
                dim,
                p: PSpec(PExponent::Finite(p)),
            })
            .collect(),
    }
}

/// Strictly convex test spaces: n up to 3, p in {1.5, 2, 3}, dim up to 4.
pub fn default_space_catalog() -> Vec<SpaceSpec> {
    vec![
        space(&[(2, 2.0)]),
        space(&[(3, 1.5)]),
        space(&[(4, 3.0)]),
        space(&[(2, 2.0), (2, 2.0)]),
        space(&[(2, 1.5), (3, 3.0)]),
        space(&[(1, 2.0), (4, 2.0)]),
        space(&[(2, 2.0), (2, 2.0), (2, 2.0)]),
        space(&[(2, 1.5), (2, 1.5), (2, 1.5)]),
        space(&[(3, 3.0), (2, 2.0), (1, 1.5)]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_spec_round_trip() {
        let text = r#"{ "components": [ {"pairs": 1, "isolated": 2}, {"pairs": 2, "isolated": 0} ] }"#;
        let spec: ShapeSpec = serde_json::from_str(text).unwrap();
        let shape = spec.to_shape().unwrap();
        assert_eq!(shape.n(), 2);
        assert_eq!(ShapeSpec::from_shape(&shape), spec);
    }

    #[test]
    fn space_spec_accepts_inf() {
        let text = r#"{ "components": [ {"dim": 2, "p": 1.5}, {"dim": 1, "p": "inf"} ] }"#;
        let spec: SpaceSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.components[1].p.0, PExponent::Infinity);
        let round = serde_json::to_string(&spec).unwrap();
        let again: SpaceSpec = serde_json::from_str(&round).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn config_defaults() {
        let cfg = RunConfig::from_json(r#"{ "suite": "clique-ext" }"#).unwrap();
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.caps.hom_cap, 12);
        assert_eq!(cfg.tolerances.algebraic, 1e-9);
        assert_eq!(cfg.effective_limits(), ShapeLimits::default());
        assert_eq!(cfg.effective_shape().unwrap().label(), "1p1i,1p1i");
    }

    #[test]
    fn catalog_spaces_are_strictly_convex() {
        for spec in default_space_catalog() {
            let space = spec.to_space().unwrap();
            assert!(space.components().iter().all(|c| c.is_strictly_convex()));
            assert!(space.n() <= 3);
            assert!(space.components().iter().all(|c| c.dim <= 4));
        }
    }
}
