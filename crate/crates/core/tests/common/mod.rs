#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringshift::RingImage;

pub const SYNTH_SIZE: usize = 64;
pub const SYNTH_LEVELS: [u32; 3] = [40, 120, 220];

/// Region label of a pixel in the three-region synthetic layout: the top
/// half is split into a left and a right region, the bottom half is one.
pub fn synth_region(x: usize, y: usize) -> usize {
    if y >= SYNTH_SIZE / 2 {
        2
    } else if x < SYNTH_SIZE / 2 {
        0
    } else {
        1
    }
}

/// 64x64 piecewise-constant image (levels 40/120/220) plus uniform integer
/// noise in [-5, 5].
pub fn synthetic_noisy(seed: u64) -> RingImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pixels = Vec::with_capacity(SYNTH_SIZE * SYNTH_SIZE);
    for y in 0..SYNTH_SIZE {
        for x in 0..SYNTH_SIZE {
            let base = SYNTH_LEVELS[synth_region(x, y)] as i32;
            pixels.push((base + rng.random_range(-5..=5)) as u32);
        }
    }
    RingImage::new(SYNTH_SIZE, SYNTH_SIZE, 256, pixels).unwrap()
}

pub fn random_image(rng: &mut ChaCha8Rng, width: usize, height: usize, modulus: u32) -> RingImage {
    let pixels = (0..width * height)
        .map(|_| rng.random_range(0..modulus))
        .collect();
    RingImage::new(width, height, modulus, pixels).unwrap()
}

/// Single-pixel 0/255 checkerboard.
pub fn checkerboard(size: usize) -> RingImage {
    let pixels = (0..size * size)
        .map(|i| {
            if (i % size + i / size).is_multiple_of(2) {
                0
            } else {
                255
            }
        })
        .collect();
    RingImage::new(size, size, 256, pixels).unwrap()
}

/// Left half 0, right half 255.
pub fn half_split(size: usize) -> RingImage {
    let pixels = (0..size * size)
        .map(|i| if i % size < size / 2 { 0 } else { 255 })
        .collect();
    RingImage::new(size, size, 256, pixels).unwrap()
}

/// Number of jumps between consecutive samples larger than `gap`.
pub fn transitions(values: &[u32], gap: u32) -> usize {
    values
        .windows(2)
        .filter(|w| w[0].abs_diff(w[1]) > gap)
        .count()
}
