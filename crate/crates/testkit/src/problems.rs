//! Random problem generators shared by the oracle tests and the acceptance
//! run.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use timelime_core::explain::{default_kernel_width, kernel_weight};

/// A small sample of 2..12 values at a random order of magnitude.
pub fn effect_sample(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.gen_range(2..12);
    let scale = 10f64.powi(rng.gen_range(-2..4));
    (0..n).map(|_| scale * rng.gen_range(-5.0..5.0)).collect()
}

/// Twenty points on a coarse grid (so ties occur) with a noisy threshold label.
pub fn mdl_dataset(rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<u8>) {
    let levels = rng.gen_range(3..21);
    let shift = rng.gen_range(0.2..0.8);
    let noise = rng.gen_range(0.0..0.4);
    let values: Vec<f64> = (0..20).map(|_| f64::from(rng.gen_range(0..levels)) / f64::from(levels)).collect();
    let labels = values.iter().map(|&v| u8::from((v > shift) != rng.gen_bool(noise))).collect();
    (values, labels)
}

pub struct LassoProblem {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub w: Vec<f64>,
}

/// A six-feature problem shaped like the surrogate fits in the pipeline:
/// binary "same bin as the instance" indicators, kernel weights on the number
/// of differing bins, and a dense random linear target with noise.
pub fn lasso_problem(rng: &mut ChaCha8Rng) -> LassoProblem {
    let n = 1000;
    let beta: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let keep: Vec<f64> = (0..6).map(|_| rng.gen_range(0.3..0.8)).collect();
    let width = default_kernel_width(6);
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = keep.iter().map(|&p| f64::from(u8::from(rng.gen_bool(p)))).collect();
        let differing = row.iter().filter(|&&b| b == 0.0).count() as f64;
        w.push(kernel_weight(differing.sqrt(), width));
        x.push(row);
    }
    let y = x.iter().map(|r| 0.3 + r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.1..0.1)).collect();
    LassoProblem { x, y, w }
}
