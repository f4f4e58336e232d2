//! Mask generation: uniformly random masks and the two inpainting-guided
//! selection schemes, together with the inpainting operators they use.

mod diffusion;
mod select;
mod shepard;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::image_io::{BinaryMask, GrayImage};

pub use diffusion::{inpaint_homogeneous, laplacian_residual, HomogeneousDiffusion};
pub use select::{densify, sparsify, sparsify_schedule};
pub use shepard::{inpaint_shepard, inpaint_shepard_with, shepard_sigma, Shepard};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaskGenError {
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("image and mask dimensions differ")]
    DimensionMismatch,
    #[error("solver stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("invalid selection parameters: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionSolveConfig {
    pub residual_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for DiffusionSolveConfig {
    fn default() -> Self {
        Self { residual_tolerance: 1e-6, max_iterations: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShepardConfig {
    pub truncation_radius_in_sigmas: f64,
}

impl Default for ShepardConfig {
    fn default() -> Self {
        Self { truncation_radius_in_sigmas: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub target_density: f64,
    /// Candidates per sparsification step, as a fraction of the current mask.
    pub candidate_fraction: f64,
    /// Fraction of the candidates removed per sparsification step.
    pub removal_fraction: f64,
    /// Points added per densification step; `None` means `max(1, ⌈0.01·target⌉)`.
    pub batch_size: Option<usize>,
    /// Random unknown pixels examined per point added during densification.
    pub candidates_per_point: usize,
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(target_density: f64, seed: u64) -> Self {
        Self { target_density, candidate_fraction: 0.02, removal_fraction: 0.5, batch_size: None, candidates_per_point: 5, seed }
    }

    pub fn target_points(&self, pixels: usize) -> usize {
        target_points(self.target_density, pixels)
    }

    pub fn batch_for(&self, target: usize) -> usize {
        self.batch_size.unwrap_or_else(|| ((target as f64 * 0.01).ceil() as usize).max(1))
    }

    fn validate(&self) -> Result<(), MaskGenError> {
        let frac = |v: f64| v > 0.0 && v <= 1.0;
        if !(self.target_density >= 0.0 && self.target_density <= 1.0) {
            return Err(MaskGenError::InvalidConfig(format!("density {}", self.target_density)));
        }
        if !frac(self.candidate_fraction) || !frac(self.removal_fraction) {
            return Err(MaskGenError::InvalidConfig("p and q must lie in (0, 1]".into()));
        }
        if self.batch_size == Some(0) || self.candidates_per_point == 0 {
            return Err(MaskGenError::InvalidConfig("batch size and candidate count must be positive".into()));
        }
        Ok(())
    }
}

pub fn target_points(density: f64, pixels: usize) -> usize {
    ((density * pixels as f64).round() as usize).min(pixels)
}

/// Reconstruction operator used to rank pixels during selection. It may
/// keep state between calls, such as a warm start.
pub trait Inpainter {
    fn inpaint(&mut self, image: &GrayImage, mask: &BinaryMask) -> Result<GrayImage, MaskGenError>;

    /// Forgets state carried between calls.
    fn reset(&mut self) {}
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mask with exactly `round(density·w·h)` uniformly placed points.
///
/// # Panics
/// If `density` is outside `[0, 1]`.
pub fn random_mask(width: usize, height: usize, density: f64, seed: u64) -> BinaryMask {
    assert!((0.0..=1.0).contains(&density), "density {density} outside [0, 1]");
    let n = width * height;
    let k = target_points(density, n);
    let mut mask = BinaryMask::new(width, height);
    for i in rand::seq::index::sample(&mut rng(seed), n, k) {
        mask.set_index(i, true);
    }
    mask
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64, MaskGenError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(MaskGenError::DimensionMismatch);
    }
    let sum: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(sum / a.len() as f64)
}
