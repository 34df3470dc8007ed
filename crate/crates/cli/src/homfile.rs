//! Homomorphism interchange format: a shape header line followed by one
//! `source -> image` line per vertex.
//!
//! ```text
//! shape: {"components":[{"pairs":1,"isolated":1},{"pairs":1,"isolated":1}]}
//! 0,0 -> 0,0
//! 0,1 -> 0,1
//! ...
//! ```

use thiserror::Error;

use plab_core::factorizer::{Homomorphism, HomomorphismError};

use crate::config::ShapeSpec;

#[derive(Debug, Error)]
pub enum HomFileError {
    #[error("missing `shape:` header line")]
    MissingHeader,
    #[error("malformed shape header: {0}")]
    BadHeader(#[from] serde_json::Error),
    #[error("bad shape: {0}")]
    Shape(#[from] plab_core::ball_graph::BallGraphError),
    #[error(transparent)]
    Hom(#[from] HomomorphismError),
}

pub fn write_hom(hom: &Homomorphism) -> String {
    let spec = ShapeSpec::from_shape(hom.shape());
    let header = serde_json::to_string(&spec).expect("shape spec serializes");
    format!("shape: {header}\n{}", hom.map_lines())
}

pub fn parse_hom(text: &str) -> Result<Homomorphism, HomFileError> {
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            None => return Err(HomFileError::MissingHeader),
            Some(line) if line.trim().is_empty() || line.trim_start().starts_with('#') => continue,
            Some(line) => break line,
        }
    };
    let rest = header
        .trim_start()
        .strip_prefix("shape:")
        .ok_or(HomFileError::MissingHeader)?;
    let spec: ShapeSpec = serde_json::from_str(rest.trim())?;
    let shape = spec.to_shape()?;
    let body: String = lines.collect::<Vec<_>>().join("\n");
    Ok(Homomorphism::parse_map_lines(shape, &body)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use plab_core::ball_graph::ProductShape;

    #[test]
    fn round_trip() {
        let shape = ProductShape::new(&[(1, 1), (1, 0)]).unwrap();
        let hom = Homomorphism::identity(shape).unwrap();
        let text = write_hom(&hom);
        assert!(text.starts_with("shape: {\"components\""));
        let parsed = parse_hom(&text).unwrap();
        assert_eq!(parsed, hom);
    }

    #[test]
    fn missing_header_is_an_error() {
        assert!(matches!(
            parse_hom("0 -> 0\n"),
            Err(HomFileError::MissingHeader)
        ));
    }
}
