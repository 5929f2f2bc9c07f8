//! Gray-level images as elements of the pixel-wise ring over `Z_n`.
//!
//! A [`RingImage`] stores residues in `[0, n)` row-major. Sum, difference,
//! product and negation act pixel by pixel modulo `n`, so the set of images of
//! a fixed shape and modulus is closed under all of them and forms a
//! commutative ring with the all-zero image as additive identity and the
//! all-one image as multiplicative identity.

use crate::error::{Result, RingError};

/// Default modulus for 8-bit gray-level images.
pub const DEFAULT_MODULUS: u32 = 256;

/// A `width x height` grid of residues modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingImage {
    width: usize,
    height: usize,
    modulus: u32,
    pixels: Vec<u32>,
}

/// The single gray level shared by every pixel of a scalar image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarWitness {
    pub value: u32,
}

impl RingImage {
    /// Builds an image from a row-major pixel buffer, validating every residue.
    pub fn new(width: usize, height: usize, modulus: u32, pixels: Vec<u32>) -> Result<Self> {
        check_dims(width, height)?;
        if modulus < 2 {
            return Err(RingError::InvalidModulus(modulus));
        }
        let expected = width * height;
        if pixels.len() != expected {
            return Err(RingError::PixelCount {
                expected,
                actual: pixels.len(),
            });
        }
        if let Some((index, &value)) = pixels.iter().enumerate().find(|(_, &v)| v >= modulus) {
            return Err(RingError::ResidueOutOfRange {
                index,
                value,
                modulus,
            });
        }
        Ok(Self {
            width,
            height,
            modulus,
            pixels,
        })
    }

    /// Builds an image by reducing arbitrary integers modulo `modulus`.
    pub fn from_integers(
        width: usize,
        height: usize,
        modulus: u32,
        values: impl IntoIterator<Item = i64>,
    ) -> Result<Self> {
        if modulus < 2 {
            return Err(RingError::InvalidModulus(modulus));
        }
        let n = i64::from(modulus);
        let pixels = values.into_iter().map(|v| v.rem_euclid(n) as u32).collect();
        Self::new(width, height, modulus, pixels)
    }

    /// The all-zero image (additive identity).
    pub fn zeros(width: usize, height: usize, modulus: u32) -> Result<Self> {
        scalar_image(0, width, height, modulus)
    }

    /// The all-one image (multiplicative identity).
    pub fn ones(width: usize, height: usize, modulus: u32) -> Result<Self> {
        scalar_image(1, width, height, modulus)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    /// Always false: a valid image has at least one pixel.
    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[u32] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u32> {
        self.pixels
    }

    /// Pixel at column `x`, row `y`.
    ///
    /// # Panics
    /// If the coordinate is outside the image.
    pub fn get(&self, x: usize, y: usize) -> u32 {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x}, {y}) out of bounds"
        );
        self.pixels[y * self.width + x]
    }

    pub fn same_shape(&self, other: &RingImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Number of distinct gray levels present.
    pub fn distinct_levels(&self) -> usize {
        let mut levels = self.pixels.clone();
        levels.sort_unstable();
        levels.dedup();
        levels.len()
    }

    /// Pixel-wise sum modulo `n`.
    pub fn add(&self, other: &RingImage) -> Result<RingImage> {
        let n = u64::from(self.modulus);
        self.zip_with(other, |a, b| (u64::from(a) + u64::from(b)) % n)
    }

    /// Pixel-wise difference modulo `n`; equal to `self.add(&other.neg())`.
    pub fn sub(&self, other: &RingImage) -> Result<RingImage> {
        let n = u64::from(self.modulus);
        self.zip_with(other, |a, b| (u64::from(a) + n - u64::from(b)) % n)
    }

    /// Pixel-wise product modulo `n`.
    pub fn mul(&self, other: &RingImage) -> Result<RingImage> {
        let n = u64::from(self.modulus);
        self.zip_with(other, |a, b| (u64::from(a) * u64::from(b)) % n)
    }

    /// Additive inverse: every pixel `v` becomes `(n - v) mod n`.
    pub fn neg(&self) -> RingImage {
        let n = self.modulus;
        self.with_pixels(self.pixels.iter().map(|&v| (n - v) % n).collect())
    }

    /// Returns the shared gray level if every pixel is equal.
    pub fn is_scalar(&self) -> Option<ScalarWitness> {
        let first = self.pixels[0];
        self.pixels
            .iter()
            .all(|&v| v == first)
            .then_some(ScalarWitness { value: first })
    }

    /// Checks that `other` has identical shape and modulus.
    pub fn check_compatible(&self, other: &RingImage) -> Result<()> {
        if !self.same_shape(other) {
            return Err(RingError::ShapeMismatch {
                left_width: self.width,
                left_height: self.height,
                right_width: other.width,
                right_height: other.height,
            });
        }
        check_modulus(self.modulus, other.modulus)
    }

    fn zip_with(&self, other: &RingImage, op: impl Fn(u32, u32) -> u64) -> Result<RingImage> {
        self.check_compatible(other)?;
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| op(a, b) as u32)
            .collect();
        Ok(self.with_pixels(pixels))
    }

    // Same shape and modulus; caller guarantees every value is a residue.
    pub(crate) fn with_pixels(&self, pixels: Vec<u32>) -> RingImage {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        debug_assert!(pixels.iter().all(|&v| v < self.modulus));
        RingImage {
            width: self.width,
            height: self.height,
            modulus: self.modulus,
            pixels,
        }
    }
}

pub(crate) fn check_modulus(left: u32, right: u32) -> Result<()> {
    if left != right {
        return Err(RingError::ModulusMismatch { left, right });
    }
    Ok(())
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(RingError::EmptyImage { width, height });
    }
    Ok(())
}

/// An image whose pixels all equal `value`.
pub fn scalar_image(value: u32, width: usize, height: usize, modulus: u32) -> Result<RingImage> {
    check_dims(width, height)?;
    if modulus < 2 {
        return Err(RingError::InvalidModulus(modulus));
    }
    if value >= modulus {
        return Err(RingError::ResidueOutOfRange {
            index: 0,
            value,
            modulus,
        });
    }
    Ok(RingImage {
        width,
        height,
        modulus,
        pixels: vec![value; width * height],
    })
}
