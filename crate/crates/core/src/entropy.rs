//! Gray-level entropy and the two image comparison measures built on it.
//!
//! * [`nu`] is the absolute entropy difference `|E(A) - E(B)|`. It ignores
//!   where pixels sit, so spatially unrelated images with equal histograms
//!   score 0.
//! * [`nu_hat`] is the natural entropy distance `E(A + (-B))`, the entropy of
//!   the ring difference. It is 0 exactly when `A - B` is a scalar image.
//!
//! Entropy depends only on the multiset of nonzero histogram counts. It is
//! evaluated by summing over those counts in ascending order, so any
//! relabelling of gray levels (adding a scalar, negating) yields a
//! bit-identical result rather than one that is merely close.

use crate::error::Result;
use crate::ring::{check_modulus, RingImage, ScalarWitness};

/// Occurrence counts per gray level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn of(image: &RingImage) -> Self {
        let mut counts = vec![0u64; image.modulus() as usize];
        for &v in image.pixels() {
            counts[v as usize] += 1;
        }
        Histogram {
            counts,
            total: image.len() as u64,
        }
    }

    pub fn modulus(&self) -> u32 {
        self.counts.len() as u32
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Probability of gray level `level`.
    pub fn probability(&self, level: u32) -> f64 {
        self.counts[level as usize] as f64 / self.total as f64
    }

    /// Number of gray levels with a nonzero count.
    pub fn occupied_levels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> EntropyValue {
        let mut occupied: Vec<u64> = self.counts.iter().copied().filter(|&c| c > 0).collect();
        if occupied.len() <= 1 {
            return EntropyValue::ZERO;
        }
        occupied.sort_unstable();
        let total = self.total as f64;
        let sum: f64 = occupied
            .iter()
            .map(|&c| {
                let p = c as f64 / total;
                p * p.log2()
            })
            .sum();
        let upper = f64::from(self.modulus()).log2();
        EntropyValue {
            bits: (-sum).clamp(0.0, upper),
        }
    }
}

/// Entropy in bits; always within `[0, log2(modulus)]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct EntropyValue {
    pub bits: f64,
}

impl EntropyValue {
    pub const ZERO: EntropyValue = EntropyValue { bits: 0.0 };
}

impl From<EntropyValue> for f64 {
    fn from(e: EntropyValue) -> f64 {
        e.bits
    }
}

pub fn histogram(image: &RingImage) -> Histogram {
    Histogram::of(image)
}

/// `E(A) = -sum p_x log2 p_x`, with empty levels contributing nothing.
pub fn entropy(image: &RingImage) -> EntropyValue {
    Histogram::of(image).entropy()
}

/// Absolute entropy difference. Shapes may differ; moduli must match.
pub fn nu(a: &RingImage, b: &RingImage) -> Result<f64> {
    check_modulus(a.modulus(), b.modulus())?;
    Ok((entropy(a).bits - entropy(b).bits).abs())
}

/// Natural entropy distance: entropy of the pixel-wise ring difference `a - b`.
pub fn nu_hat(a: &RingImage, b: &RingImage) -> Result<f64> {
    Ok(entropy(&a.sub(b)?).bits)
}

/// `nu(a, b) <= tol`; `tol = 0` is exact entropy equality.
pub fn weakly_equivalent(a: &RingImage, b: &RingImage, tol: f64) -> Result<bool> {
    Ok(nu(a, b)? <= tol)
}

/// Returns `s` such that `a = s + b` for the scalar image `s`, if one exists.
pub fn strongly_equivalent(a: &RingImage, b: &RingImage) -> Result<Option<ScalarWitness>> {
    Ok(a.sub(b)?.is_scalar())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::RingError;
    use crate::ring::scalar_image;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn img(width: usize, height: usize, pixels: &[u32]) -> RingImage {
        RingImage::new(width, height, 256, pixels.to_vec()).unwrap()
    }

    fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize, n: u32) -> RingImage {
        let px = (0..w * h).map(|_| rng.random_range(0..n)).collect();
        RingImage::new(w, h, n, px).unwrap()
    }

    // Independent tally and natural-log summation in pixel order.
    fn oracle_entropy(image: &RingImage) -> f64 {
        let mut tally: HashMap<u32, usize> = HashMap::new();
        for y in 0..image.height() {
            for x in 0..image.width() {
                *tally.entry(image.get(x, y)).or_default() += 1;
            }
        }
        let total = (image.width() * image.height()) as f64;
        -tally
            .values()
            .map(|&c| {
                let p = c as f64 / total;
                p * p.ln()
            })
            .sum::<f64>()
            / std::f64::consts::LN_2
    }

    #[test]
    fn histogram_counts() {
        let h = histogram(&img(2, 2, &[0, 255, 0, 255]));
        assert_eq!(h.counts()[0], 2);
        assert_eq!(h.counts()[255], 2);
        assert_eq!(h.counts().iter().sum::<u64>(), 4);
        assert_eq!(h.total(), 4);
        assert_eq!(h.counts().len(), 256);
        assert_eq!(h.probability(0), 0.5);

        let s = histogram(&scalar_image(9, 8, 8, 256).unwrap());
        assert_eq!(s.counts()[9], 64);
        assert_eq!(s.occupied_levels(), 1);
    }

    #[test]
    fn histogram_matches_tally() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_image(&mut rng, 17, 9, 16);
        let h = histogram(&a);
        for level in 0..16 {
            let count = a.pixels().iter().filter(|&&v| v == level).count() as u64;
            assert_eq!(h.counts()[level as usize], count);
        }
    }

    #[test]
    fn entropy_known_values() {
        assert_eq!(entropy(&scalar_image(42, 5, 3, 256).unwrap()).bits, 0.0);
        assert_eq!(entropy(&img(2, 2, &[0, 255, 0, 255])).bits, 1.0);
        assert_eq!(entropy(&img(4, 1, &[0, 1, 2, 3])).bits, 2.0);
    }

    #[test]
    fn entropy_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for n in [2, 16, 256, 1000] {
            let a = random_image(&mut rng, 64, 64, n);
            assert!((entropy(&a).bits - oracle_entropy(&a)).abs() < 1e-12);
        }
    }

    #[test]
    fn nu_examples() {
        let a = img(2, 2, &[0, 255, 0, 255]);
        let s = scalar_image(3, 2, 2, 256).unwrap();
        assert_eq!(nu(&a, &a).unwrap(), 0.0);
        assert_eq!(nu(&s, &a).unwrap(), 1.0);
        // Entropy ignores shape.
        assert_eq!(nu(&a, &img(4, 1, &[1, 2, 1, 2])).unwrap(), 0.0);
        let other = RingImage::zeros(2, 2, 16).unwrap();
        assert!(matches!(
            nu(&a, &other),
            Err(RingError::ModulusMismatch { .. })
        ));
    }

    #[test]
    fn nu_hat_hand_evaluated() {
        let a = img(2, 2, &[0, 255, 0, 255]);
        let b = img(2, 2, &[0, 0, 255, 255]);
        assert_eq!(a.sub(&b).unwrap().pixels(), &[0, 255, 1, 0]);
        assert_eq!(nu_hat(&a, &b).unwrap(), 1.5);
        assert_eq!(nu(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn nu_hat_requires_alignment() {
        let a = img(2, 2, &[0, 1, 2, 3]);
        let b = img(4, 1, &[0, 1, 2, 3]);
        assert!(matches!(
            nu_hat(&a, &b),
            Err(RingError::ShapeMismatch { .. })
        ));
        assert!(matches!(
            strongly_equivalent(&a, &b),
            Err(RingError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn checkerboard_versus_split() {
        let checker: Vec<u32> = (0..64).map(|i| ((i % 8 + i / 8) % 2) * 255).collect();
        let split: Vec<u32> = (0..64).map(|i| if i % 8 < 4 { 0 } else { 255 }).collect();
        let a = RingImage::new(8, 8, 256, checker).unwrap();
        let b = RingImage::new(8, 8, 256, split).unwrap();
        assert!(weakly_equivalent(&a, &b, 0.0).unwrap());
        assert_eq!(strongly_equivalent(&a, &b).unwrap(), None);
        assert!(nu_hat(&a, &b).unwrap() > 0.0);
    }

    #[test]
    fn equivalence_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = random_image(&mut rng, 6, 5, 256);
        let shifted = a.add(&scalar_image(17, 6, 5, 256).unwrap()).unwrap();
        assert!(weakly_equivalent(&a, &a, 0.0).unwrap());
        assert_eq!(
            strongly_equivalent(&a, &a).unwrap(),
            Some(ScalarWitness { value: 0 })
        );
        assert_eq!(
            strongly_equivalent(&shifted, &a).unwrap(),
            Some(ScalarWitness { value: 17 })
        );
        let s = scalar_image(0, 2, 2, 256).unwrap();
        assert!(!weakly_equivalent(&s, &img(2, 2, &[0, 255, 0, 255]), 0.0).unwrap());
    }

    // The triangle inequality holds for nu_hat because the difference image
    // A - C is a pixel-wise function of the pair (A - B, B - C), and the
    // entropy of a function of a pair is at most the sum of the marginal
    // entropies. A randomized search at small sizes confirms it never fails;
    // nu_hat is only a pseudometric since distinct images can be at distance 0.
    #[test]
    fn nu_hat_is_a_pseudometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5000 {
            let (w, h) = (rng.random_range(1..5), rng.random_range(1..5));
            let n = [2, 3, 4, 16][rng.random_range(0..4)];
            let a = random_image(&mut rng, w, h, n);
            let b = random_image(&mut rng, w, h, n);
            let c = random_image(&mut rng, w, h, n);
            let ac = nu_hat(&a, &c).unwrap();
            let bound = nu_hat(&a, &b).unwrap() + nu_hat(&b, &c).unwrap();
            assert!(ac <= bound + 1e-12, "{ac} > {bound}");
        }
        let a = img(2, 1, &[0, 1]);
        let b = img(2, 1, &[5, 6]);
        assert_ne!(a, b);
        assert_eq!(nu_hat(&a, &b).unwrap(), 0.0);
    }

    fn image_pair() -> impl Strategy<Value = (RingImage, RingImage)> {
        (
            1usize..8,
            1usize..8,
            prop_oneof![Just(16u32), Just(256u32), 2u32..300],
        )
            .prop_flat_map(|(w, h, n)| {
                let px = || proptest::collection::vec(0..n, w * h);
                (px(), px()).prop_map(move |(a, b)| {
                    (
                        RingImage::new(w, h, n, a).unwrap(),
                        RingImage::new(w, h, n, b).unwrap(),
                    )
                })
            })
    }

    proptest! {
        #[test]
        fn entropy_bounds((a, _b) in image_pair()) {
            let e = entropy(&a).bits;
            prop_assert!(e >= 0.0);
            prop_assert!(e <= f64::from(a.modulus()).log2());
            prop_assert_eq!(e == 0.0, a.is_scalar().is_some());
        }

        #[test]
        fn scalar_shift_preserves_entropy((a, _b) in image_pair(), s in 0u32..u32::MAX) {
            let s = scalar_image(s % a.modulus(), a.width(), a.height(), a.modulus()).unwrap();
            let b = a.add(&s).unwrap();
            prop_assert_eq!(entropy(&b).bits, entropy(&a).bits);
            prop_assert!(strongly_equivalent(&b, &a).unwrap().is_some());
            prop_assert_eq!(nu(&a, &b).unwrap(), 0.0);
            prop_assert_eq!(nu_hat(&a, &b).unwrap(), 0.0);
        }

        #[test]
        fn nu_hat_zero_iff_strong((a, b) in image_pair()) {
            let strong = strongly_equivalent(&a, &b).unwrap();
            prop_assert_eq!(strong.is_some(), nu_hat(&a, &b).unwrap() == 0.0);
        }

        #[test]
        fn measures_are_symmetric((a, b) in image_pair()) {
            prop_assert_eq!(nu_hat(&a, &b).unwrap(), nu_hat(&b, &a).unwrap());
            let v = nu(&a, &b).unwrap();
            prop_assert_eq!(v, nu(&b, &a).unwrap());
            prop_assert!(v <= entropy(&a).bits.max(entropy(&b).bits));
            prop_assert_eq!(nu(&a, &a).unwrap(), 0.0);
        }
    }
}
