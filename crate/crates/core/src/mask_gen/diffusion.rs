//! Homogeneous diffusion inpainting: the steady state of `u_t = Δu` with
//! known pixels fixed and reflecting image boundaries.
//!
//! Discretised with the 5-point stencil, the unknown pixels satisfy
//! `deg(i) u_i - Σ_{j ~ i, unknown} u_j = Σ_{j ~ i, known} f_j`, where the
//! neighbours `j ~ i` are those inside the image (mirroring the boundary
//! removes the outward flux term). The matrix is symmetric positive
//! definite whenever at least one pixel is known, so conjugate gradients
//! apply.

use super::{DiffusionSolveConfig, Inpainter, MaskGenError};
use crate::image_io::{BinaryMask, GrayImage};

#[derive(Debug, Clone)]
pub struct HomogeneousDiffusion {
    config: DiffusionSolveConfig,
    warm_start: Option<Vec<f64>>,
    last_iterations: usize,
}

impl HomogeneousDiffusion {
    pub fn new(config: DiffusionSolveConfig) -> Self {
        Self { config, warm_start: None, last_iterations: 0 }
    }

    /// Conjugate-gradient iterations used by the most recent solve.
    pub fn last_iterations(&self) -> usize {
        self.last_iterations
    }
}

impl Default for HomogeneousDiffusion {
    fn default() -> Self {
        Self::new(DiffusionSolveConfig::default())
    }
}

impl Inpainter for HomogeneousDiffusion {
    fn inpaint(&mut self, image: &GrayImage, mask: &BinaryMask) -> Result<GrayImage, MaskGenError> {
        let (out, iters) = solve(image, mask, &self.config, self.warm_start.as_deref())?;
        self.last_iterations = iters;
        self.warm_start = Some(out.values().to_vec());
        Ok(out)
    }

    fn reset(&mut self) {
        self.warm_start = None;
    }
}

pub fn inpaint_homogeneous(
    image: &GrayImage,
    mask: &BinaryMask,
    config: &DiffusionSolveConfig,
) -> Result<GrayImage, MaskGenError> {
    solve(image, mask, config, None).map(|(u, _)| u)
}

/// Applies `deg(i) x_i - Σ x_j` over unknown pixels, where `x` is zero at
/// known pixels.
fn apply(x: &[f64], known: &[bool], width: usize, height: usize, out: &mut [f64]) {
    for y in 0..height {
        for xx in 0..width {
            let i = y * width + xx;
            if known[i] {
                out[i] = 0.0;
                continue;
            }
            let mut deg = 0.0;
            let mut sum = 0.0;
            if xx > 0 {
                deg += 1.0;
                sum += x[i - 1];
            }
            if xx + 1 < width {
                deg += 1.0;
                sum += x[i + 1];
            }
            if y > 0 {
                deg += 1.0;
                sum += x[i - width];
            }
            if y + 1 < height {
                deg += 1.0;
                sum += x[i + width];
            }
            out[i] = deg * x[i] - sum;
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn solve(
    image: &GrayImage,
    mask: &BinaryMask,
    config: &DiffusionSolveConfig,
    initial: Option<&[f64]>,
) -> Result<(GrayImage, usize), MaskGenError> {
    let (w, h) = (image.width(), image.height());
    if (mask.width(), mask.height()) != (w, h) {
        return Err(MaskGenError::DimensionMismatch);
    }
    if mask.count_ones() == 0 {
        return Err(MaskGenError::EmptyMask);
    }
    let known = mask.bits();
    let f = image.values();
    let n = w * h;

    // Right-hand side: fluxes from known neighbours into unknown pixels.
    let mut known_only: Vec<f64> = (0..n).map(|i| if known[i] { f[i] } else { 0.0 }).collect();
    let mut b = vec![0.0; n];
    apply_known_flux(&known_only, known, w, h, &mut b);

    let mut x: Vec<f64> = match initial {
        Some(init) if init.len() == n => (0..n).map(|i| if known[i] { 0.0 } else { init[i] }).collect(),
        _ => {
            let mean = known_only.iter().sum::<f64>() / mask.count_ones() as f64;
            (0..n).map(|i| if known[i] { 0.0 } else { mean }).collect()
        }
    };

    let b_norm = dot(&b, &b).sqrt();
    let mut ax = vec![0.0; n];
    apply(&x, known, w, h, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    // With b = 0 the solution is 0; measure the residual absolutely then.
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let mut iterations = 0;
    let mut ap = vec![0.0; n];
    while rr.sqrt() / scale > config.residual_tolerance {
        if iterations >= config.max_iterations {
            return Err(MaskGenError::NotConverged { iterations, residual: rr.sqrt() / scale });
        }
        apply(&p, known, w, h, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        iterations += 1;
    }

    // The exact solution lies in [lo, hi]; clamping only moves an iterate
    // towards it and makes the maximum principle hold unconditionally.
    let (lo, hi) = (0..n)
        .filter(|&i| known[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| (lo.min(f[i]), hi.max(f[i])));
    for i in 0..n {
        if !known[i] {
            known_only[i] = x[i].clamp(lo, hi);
        }
    }
    Ok((GrayImage::from_raw(w, h, known_only), iterations))
}

fn apply_known_flux(known_values: &[f64], known: &[bool], width: usize, height: usize, out: &mut [f64]) {
    for y in 0..height {
        for x in 0..width {
            let i = y * width + x;
            if known[i] {
                continue;
            }
            let mut s = 0.0;
            if x > 0 && known[i - 1] {
                s += known_values[i - 1];
            }
            if x + 1 < width && known[i + 1] {
                s += known_values[i + 1];
            }
            if y > 0 && known[i - width] {
                s += known_values[i - width];
            }
            if y + 1 < height && known[i + width] {
                s += known_values[i + width];
            }
            out[i] = s;
        }
    }
}

/// `max |Δu|` over unknown pixels, with mirrored boundaries.
pub fn laplacian_residual(u: &GrayImage, mask: &BinaryMask) -> f64 {
    let (w, h) = (u.width(), u.height());
    let v = u.values();
    let mut worst: f64 = 0.0;
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                continue;
            }
            let c = v[y * w + x];
            let at = |xx: usize, yy: usize| v[yy * w + xx];
            let l = if x > 0 { at(x - 1, y) } else { c };
            let r = if x + 1 < w { at(x + 1, y) } else { c };
            let t = if y > 0 { at(x, y - 1) } else { c };
            let b = if y + 1 < h { at(x, y + 1) } else { c };
            worst = worst.max((l + r + t + b - 4.0 * c).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Gaussian elimination with partial pivoting over the full
    /// pixel system: identity rows for known pixels, Laplace rows otherwise.
    fn dense_oracle(image: &GrayImage, mask: &BinaryMask) -> Vec<f64> {
        let (w, h) = (image.width(), image.height());
        let n = w * h;
        let mut a = vec![vec![0.0f64; n + 1]; n];
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                if mask.get(x, y) {
                    a[i][i] = 1.0;
                    a[i][n] = image.get(x, y);
                    continue;
                }
                let nbrs = [
                    (x > 0).then(|| i - 1),
                    (x + 1 < w).then(|| i + 1),
                    (y > 0).then(|| i - w),
                    (y + 1 < h).then(|| i + w),
                ];
                for j in nbrs.into_iter().flatten() {
                    a[i][i] += 1.0;
                    a[i][j] -= 1.0;
                }
            }
        }
        for col in 0..n {
            let piv = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs())).unwrap();
            a.swap(col, piv);
            for row in 0..n {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
        (0..n).map(|i| a[i][n] / a[i][i]).collect()
    }

    #[test]
    fn matches_dense_solve_3x3() {
        let img = GrayImage::from_fn(3, 3, |x, y| if (x, y) == (2, 2) { 255.0 } else { 0.0 });
        let mut mask = BinaryMask::new(3, 3);
        mask.set(0, 0, true);
        mask.set(2, 2, true);
        let u = inpaint_homogeneous(&img, &mask, &DiffusionSolveConfig::default()).unwrap();
        let oracle = dense_oracle(&img, &mask);
        for (a, b) in u.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        // Symmetry of this configuration puts the centre at the midpoint.
        assert!((u.get(1, 1) - 127.5).abs() < 1e-6);
    }

    #[test]
    fn matches_dense_solve_4x4() {
        let img = GrayImage::from_fn(4, 4, |x, y| (x * 37 + y * 11) as f64);
        let mask = BinaryMask::from_rows(&["1000", "0010", "0000", "1001"]).unwrap();
        let u = inpaint_homogeneous(&img, &mask, &DiffusionSolveConfig::default()).unwrap();
        let oracle = dense_oracle(&img, &mask);
        for (a, b) in u.values().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn constants_and_single_points() {
        let img = GrayImage::filled(9, 7, 42.0);
        let mask = BinaryMask::from_rows(&["100000000", "000000000", "000001000", "0", "0", "0", "0"]
            .map(|r| if r == "0" { "000000000" } else { r }))
        .unwrap();
        let u = inpaint_homogeneous(&img, &mask, &DiffusionSolveConfig::default()).unwrap();
        assert!(u.values().iter().all(|&v| (v - 42.0).abs() < 1e-9));

        let img = GrayImage::from_fn(6, 5, |x, y| (x * 10 + y) as f64);
        let mut mask = BinaryMask::new(6, 5);
        mask.set(3, 2, true);
        let u = inpaint_homogeneous(&img, &mask, &DiffusionSolveConfig::default()).unwrap();
        assert!(u.values().iter().all(|&v| (v - 32.0).abs() < 1e-4));
    }

    #[test]
    fn errors() {
        let img = GrayImage::filled(3, 3, 1.0);
        assert!(matches!(
            inpaint_homogeneous(&img, &BinaryMask::new(3, 3), &DiffusionSolveConfig::default()),
            Err(MaskGenError::EmptyMask)
        ));
        assert!(matches!(
            inpaint_homogeneous(&img, &BinaryMask::full(2, 3), &DiffusionSolveConfig::default()),
            Err(MaskGenError::DimensionMismatch)
        ));
        let img = GrayImage::from_fn(40, 40, |x, _| x as f64);
        let mut mask = BinaryMask::new(40, 40);
        mask.set(0, 0, true);
        mask.set(39, 39, true);
        let cfg = DiffusionSolveConfig { residual_tolerance: 1e-12, max_iterations: 3 };
        assert!(matches!(inpaint_homogeneous(&img, &mask, &cfg), Err(MaskGenError::NotConverged { iterations: 3, .. })));
    }

    #[test]
    fn warm_start_reaches_same_solution() {
        let img = GrayImage::from_fn(20, 20, |x, y| ((x * 13 + y * 7) % 50) as f64);
        let mask = crate::mask_gen::random_mask(20, 20, 0.1, 3);
        let cold = inpaint_homogeneous(&img, &mask, &DiffusionSolveConfig::default()).unwrap();
        let mut op = HomogeneousDiffusion::default();
        op.inpaint(&img, &crate::mask_gen::random_mask(20, 20, 0.2, 4)).unwrap();
        let warm = op.inpaint(&img, &mask).unwrap();
        for (a, b) in cold.values().iter().zip(warm.values()) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    proptest::proptest! {
        #[test]
        fn maximum_principle_and_dirichlet(w in 1usize..24, h in 1usize..24, d in 0.01f64..0.5, seed in 0u64..1000) {
            let img = GrayImage::from_fn(w, h, |x, y| ((x * 37 + y * 91 + seed as usize) % 256) as f64);
            let mut mask = crate::mask_gen::random_mask(w, h, d, seed);
            if mask.count_ones() == 0 {
                mask.set(w / 2, h / 2, true);
            }
            let u = inpaint_homogeneous(&img, &mask, &DiffusionSolveConfig::default()).unwrap();
            let known = mask.ones_indices();
            let lo = known.iter().map(|&i| img.values()[i]).fold(f64::INFINITY, f64::min);
            let hi = known.iter().map(|&i| img.values()[i]).fold(f64::NEG_INFINITY, f64::max);
            proptest::prop_assert!(u.values().iter().all(|&v| (lo..=hi).contains(&v)));
            proptest::prop_assert!(known.iter().all(|&i| u.values()[i] == img.values()[i]));
        }
    }
}
