//! Deterministic shape catalogs: every shape within the limits, enumerated
//! in a fixed order and deduplicated up to component reordering.

use plab_core::ball_graph::ProductShape;

use crate::config::ShapeLimits;

/// All shapes with `1 <= n <= max_n` components, each with at most
/// `max_pairs` pairs and `max_isolated` isolated vertices (and at least one
/// vertex). Component multisets are enumerated as non-decreasing sequences
/// over the component-type order `(pairs, isolated)` ascending, which both
/// fixes the order and removes reorderings.
pub fn catalog_shapes(limits: &ShapeLimits) -> Vec<ProductShape> {
    let mut types: Vec<(u32, u32)> = Vec::new();
    for pairs in 0..=limits.max_pairs {
        for isolated in 0..=limits.max_isolated {
            if 2 * pairs + isolated >= 1 {
                types.push((pairs, isolated));
            }
        }
    }
    let mut shapes = Vec::new();
    for n in 1..=limits.max_n {
        let mut picked = vec![0usize; n];
        multisets(&types, &mut picked, 0, 0, &mut shapes);
    }
    shapes
}

fn multisets(
    types: &[(u32, u32)],
    picked: &mut Vec<usize>,
    level: usize,
    min_type: usize,
    out: &mut Vec<ProductShape>,
) {
    if level == picked.len() {
        let sizes: Vec<(u32, u32)> = picked.iter().map(|&t| types[t]).collect();
        out.push(ProductShape::new(&sizes).expect("catalog types are nontrivial"));
        return;
    }
    for t in min_type..types.len() {
        picked[level] = t;
        multisets(types, picked, level + 1, t, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle: enumerate all ordered tuples, canonicalize by
    /// sorting, and count distinct canonical forms.
    fn brute_count(limits: &ShapeLimits) -> usize {
        let mut types: Vec<(u32, u32)> = Vec::new();
        for p in 0..=limits.max_pairs {
            for i in 0..=limits.max_isolated {
                if 2 * p + i >= 1 {
                    types.push((p, i));
                }
            }
        }
        let mut canon: std::collections::BTreeSet<Vec<(u32, u32)>> = Default::default();
        for n in 1..=limits.max_n {
            let mut tuple = vec![0usize; n];
            loop {
                let mut sizes: Vec<(u32, u32)> = tuple.iter().map(|&t| types[t]).collect();
                sizes.sort();
                canon.insert(sizes);
                // Odometer over ordered tuples.
                let mut carry = true;
                for slot in tuple.iter_mut().rev() {
                    if carry {
                        *slot += 1;
                        if *slot < types.len() {
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
        }
        canon.len()
    }

    #[test]
    fn tiny_catalog_has_three_shapes() {
        let limits = ShapeLimits {
            max_n: 1,
            max_pairs: 1,
            max_isolated: 1,
        };
        let labels: Vec<String> = catalog_shapes(&limits).iter().map(|s| s.label()).collect();
        assert_eq!(labels, vec!["0p1i", "1p0i", "1p1i"]);
    }

    #[test]
    fn counts_match_brute_force() {
        for limits in [
            ShapeLimits { max_n: 2, max_pairs: 1, max_isolated: 1 },
            ShapeLimits { max_n: 3, max_pairs: 1, max_isolated: 2 },
            ShapeLimits { max_n: 2, max_pairs: 2, max_isolated: 2 },
        ] {
            assert_eq!(catalog_shapes(&limits).len(), brute_count(&limits));
        }
    }

    #[test]
    fn default_catalog_size() {
        // 8 component types; multisets of size 1, 2, 3.
        let shapes = catalog_shapes(&ShapeLimits::default());
        assert_eq!(shapes.len(), 8 + 36 + 120);
        // No duplicates up to reordering.
        let mut canon: Vec<Vec<(u32, u32)>> = shapes
            .iter()
            .map(|s| {
                let mut sizes: Vec<(u32, u32)> = s
                    .components()
                    .iter()
                    .map(|c| (c.pairs(), c.isolated()))
                    .collect();
                sizes.sort();
                sizes
            })
            .collect();
        canon.sort();
        canon.dedup();
        assert_eq!(canon.len(), shapes.len());
    }

    #[test]
    fn empty_limits_give_empty_catalog() {
        let limits = ShapeLimits {
            max_n: 0,
            max_pairs: 2,
            max_isolated: 2,
        };
        assert!(catalog_shapes(&limits).is_empty());
    }
}
