//! Line-oriented numeric text with fixed 17-significant-digit formatting,
//! so exported sample sets and certificates reproduce bit-for-bit.

use plab_core::banach_geometry::SumSpacePoint;

pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One line holding all coordinates of the given points, space separated.
pub fn point_line(points: &[&SumSpacePoint]) -> String {
    let mut fields = Vec::new();
    for p in points {
        for block in &p.blocks {
            for &v in block {
                fields.push(format_f64(v));
            }
        }
    }
    let mut line = fields.join(" ");
    line.push('\n');
    line
}

pub fn scalar_line(values: &[f64]) -> String {
    let mut line = values
        .iter()
        .map(|&v| format_f64(v))
        .collect::<Vec<_>>()
        .join(" ");
    line.push('\n');
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [1.0 / 3.0, -2.0f64.sqrt(), 1e-300, 123456.789] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_f64(0.5), "5.0000000000000000e-1");
    }
}
