//! Deterministic seeded sampling helpers shared by the numeric suites.
//!
//! All randomness flows through ChaCha8 streams derived from explicit u64
//! seeds, so every sampled check is reproducible from its recorded seed.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// splitmix64 step, used to derive independent per-instance seeds from a
/// master seed without sharing a stream.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15u64.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// A standard normal variate via Box-Muller.
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u1: f64 = rng.random();
        if u1 <= f64::MIN_POSITIVE {
            continue;
        }
        let u2: f64 = rng.random();
        return (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
    }
}

/// A random orthogonal matrix (rows) by Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    loop {
        let mut rows: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| standard_normal(rng)).collect())
            .collect();
        let mut ok = true;
        for i in 0..dim {
            for j in 0..i {
                let dot: f64 = (0..dim).map(|k| rows[i][k] * rows[j][k]).sum();
                for k in 0..dim {
                    rows[i][k] -= dot * rows[j][k];
                }
            }
            let norm: f64 = (0..dim).map(|k| rows[i][k] * rows[i][k]).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            for k in 0..dim {
                rows[i][k] /= norm;
            }
        }
        if ok {
            return rows;
        }
    }
}

/// A random signed permutation `(perm, signs)`: output `k` takes
/// `signs[k] * input[perm[k]]`.
pub fn random_signed_permutation<R: Rng>(dim: usize, rng: &mut R) -> (Vec<usize>, Vec<f64>) {
    let mut perm: Vec<usize> = (0..dim).collect();
    // Fisher-Yates.
    for i in (1..dim).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let signs = (0..dim)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect();
    (perm, signs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_seeds_differ() {
        let a = mix_seed(42, 0);
        let b = mix_seed(42, 1);
        assert_ne!(a, b);
        assert_eq!(a, mix_seed(42, 0));
    }

    #[test]
    fn orthogonal_rows_are_orthonormal() {
        let mut rng = rng_from_seed(5);
        for dim in 1..=4 {
            let q = random_orthogonal(dim, &mut rng);
            for i in 0..dim {
                for j in 0..dim {
                    let dot: f64 = (0..dim).map(|k| q[i][k] * q[j][k]).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - expect).abs() < 1e-12, "dim {dim} dot {i}{j} = {dot}");
                }
            }
        }
    }

    #[test]
    fn signed_permutation_is_bijective() {
        let mut rng = rng_from_seed(9);
        let (perm, signs) = random_signed_permutation(5, &mut rng);
        let mut seen = vec![false; 5];
        for &p in &perm {
            assert!(!seen[p]);
            seen[p] = true;
        }
        assert!(signs.iter().all(|&s| s == 1.0 || s == -1.0));
    }
}
