//! Synthetic 8×8 grayscale glyphs in three classes, jittered per sample:
//! integer translation, intensity scaling and additive noise. Classes are
//! pixel-space clusters far enough apart that an RBF classifier separates
//! them cleanly, which is what the generator constraints lean on.

use crate::tensor::Tensor;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GLYPH_SIDE: usize = 8;
pub const GLYPH_PIXELS: usize = GLYPH_SIDE * GLYPH_SIDE;
pub const GLYPH_CLASSES: usize = 3;

const RING: [&str; 8] = [
    "........", "..####..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", "..####..", "........",
];

const BAR: [&str; 8] = [
    "...#....", "..##....", "...#....", "...#....", "...#....", "...#....", "..###...", "........",
];

const ZIG: [&str; 8] = [
    ".#####..", ".....#..", "....#...", "...#....", "..#.....", ".#......", ".#####..", "........",
];

fn stencil(class: usize) -> &'static [&'static str; 8] {
    match class {
        0 => &RING,
        1 => &BAR,
        _ => &ZIG,
    }
}

/// One jittered glyph of the given class.
pub fn glyph(class: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let rows = stencil(class);
    let dx: i32 = rng.random_range(-1..=1);
    let dy: i32 = rng.random_range(-1..=1);
    let intensity: f64 = rng.random_range(0.75..1.0);
    let mut pixels = vec![0.0f64; GLYPH_PIXELS];
    for y in 0..GLYPH_SIDE {
        for x in 0..GLYPH_SIDE {
            let sy = y as i32 - dy;
            let sx = x as i32 - dx;
            let lit = sy >= 0
                && sy < GLYPH_SIDE as i32
                && sx >= 0
                && sx < GLYPH_SIDE as i32
                && rows[sy as usize].as_bytes()[sx as usize] == b'#';
            let noise: f64 = rng.random_range(0.0..0.12);
            pixels[y * GLYPH_SIDE + x] = ((if lit { intensity } else { 0.0 }) + noise).min(1.0);
        }
    }
    Tensor::vector(pixels)
}

/// `per_class` glyphs of each class, classes interleaved, with labels.
pub fn glyph_dataset(per_class: usize, seed: u64) -> Vec<(Tensor, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class * GLYPH_CLASSES);
    for i in 0..per_class {
        for class in 0..GLYPH_CLASSES {
            out.push((glyph(class, &mut rng), class));
            let _ = i;
        }
    }
    out
}
