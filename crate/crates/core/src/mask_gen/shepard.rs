//! Shepard interpolation with a truncated Gaussian weight whose width
//! follows the mask density.

use super::{Inpainter, MaskGenError, ShepardConfig};
use crate::image_io::{BinaryMask, GrayImage};

/// `sqrt(m·n / (π·|K|))`.
pub fn shepard_sigma(width: usize, height: usize, points: usize) -> f64 {
    ((width * height) as f64 / (std::f64::consts::PI * points as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Shepard {
    pub config: ShepardConfig,
}

impl Inpainter for Shepard {
    fn inpaint(&mut self, image: &GrayImage, mask: &BinaryMask) -> Result<GrayImage, MaskGenError> {
        inpaint_shepard_with(image, mask, &self.config)
    }
}

pub fn inpaint_shepard(image: &GrayImage, mask: &BinaryMask) -> Result<GrayImage, MaskGenError> {
    inpaint_shepard_with(image, mask, &ShepardConfig::default())
}

pub fn inpaint_shepard_with(
    image: &GrayImage,
    mask: &BinaryMask,
    config: &ShepardConfig,
) -> Result<GrayImage, MaskGenError> {
    let (w, h) = (image.width(), image.height());
    if (mask.width(), mask.height()) != (w, h) {
        return Err(MaskGenError::DimensionMismatch);
    }
    let points = mask.ones_indices();
    if points.is_empty() {
        return Err(MaskGenError::EmptyMask);
    }
    let f = image.values();
    let sigma = shepard_sigma(w, h, points.len());
    let radius = config.truncation_radius_in_sigmas * sigma;
    let r = radius.floor() as isize;
    let inv = 1.0 / (2.0 * sigma * sigma);
    // Weights depend only on the offset, so tabulate one quadrant.
    let side = r.max(0) as usize + 1;
    let mut kernel = vec![0.0; side * side];
    for dy in 0..side {
        for dx in 0..side {
            let d2 = (dx * dx + dy * dy) as f64;
            if d2 <= radius * radius {
                kernel[dy * side + dx] = (-d2 * inv).exp();
            }
        }
    }

    let mut num = vec![0.0; w * h];
    let mut den = vec![0.0; w * h];
    for &q in &points {
        let (qx, qy) = ((q % w) as isize, (q / w) as isize);
        let v = f[q];
        let (y0, y1) = ((qy - r).max(0), (qy + r).min(h as isize - 1));
        let (x0, x1) = ((qx - r).max(0), (qx + r).min(w as isize - 1));
        for y in y0..=y1 {
            let row = (y - qy).unsigned_abs() * side;
            for x in x0..=x1 {
                let wgt = kernel[row + (x - qx).unsigned_abs()];
                let i = y as usize * w + x as usize;
                num[i] += wgt * v;
                den[i] += wgt;
            }
        }
    }

    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| (lo.min(f[q]), hi.max(f[q])));
    let out = (0..w * h)
        .map(|i| if den[i] > 0.0 { (num[i] / den[i]).clamp(lo, hi) } else { nearest_value(i, w, &points, f) })
        .collect();
    Ok(GrayImage::from_raw(w, h, out))
}

/// Value of the nearest mask point; ties go to the lowest row-major index.
fn nearest_value(i: usize, width: usize, points: &[usize], f: &[f64]) -> f64 {
    let (x, y) = ((i % width) as i64, (i / width) as i64);
    let best = points
        .iter()
        .min_by_key(|&&q| {
            let (dx, dy) = ((q % width) as i64 - x, (q / width) as i64 - y);
            (dx * dx + dy * dy, q)
        })
        .expect("nonempty mask");
    f[*best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigma_formula() {
        let direct = (16.0f64 / (5.0 * std::f64::consts::PI)).sqrt();
        assert!((shepard_sigma(4, 4, 5) - direct).abs() < 1e-12);
        assert!((direct - 1.00925).abs() < 1e-5);
    }

    #[test]
    fn single_point_gives_constant() {
        let img = GrayImage::from_fn(11, 7, |x, y| (x + 3 * y) as f64);
        let mut mask = BinaryMask::new(11, 7);
        mask.set(4, 2, true);
        let u = inpaint_shepard(&img, &mask).unwrap();
        assert!(u.values().iter().all(|&v| v == 10.0));
    }

    #[test]
    fn equidistant_midpoint() {
        let img = GrayImage::from_fn(5, 1, |x, _| if x == 0 { 10.0 } else { 30.0 });
        let mut mask = BinaryMask::new(5, 1);
        mask.set(0, 0, true);
        mask.set(4, 0, true);
        let u = inpaint_shepard(&img, &mask).unwrap();
        assert!((u.get(2, 0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_formula_small_case() {
        let img = GrayImage::from_fn(4, 4, |x, y| (x * 10 + y * 3) as f64);
        let mask = BinaryMask::from_rows(&["1001", "0000", "0100", "1001"]).unwrap();
        let u = inpaint_shepard(&img, &mask).unwrap();
        let s = shepard_sigma(4, 4, 5);
        for y in 0..4 {
            for x in 0..4 {
                let (mut n, mut d) = (0.0, 0.0);
                for q in mask.ones_indices() {
                    let (qx, qy) = ((q % 4) as f64, (q / 4) as f64);
                    let d2 = (qx - x as f64).powi(2) + (qy - y as f64).powi(2);
                    if d2.sqrt() <= 4.0 * s {
                        let wgt = (-d2 / (2.0 * s * s)).exp();
                        n += wgt * img.values()[q];
                        d += wgt;
                    }
                }
                assert!((u.get(x, y) - n / d).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_window_falls_back_to_nearest() {
        // A tiny truncation radius leaves most pixels without any weight.
        let img = GrayImage::from_fn(6, 1, |x, _| x as f64);
        let mut mask = BinaryMask::new(6, 1);
        mask.set(0, 0, true);
        mask.set(5, 0, true);
        let cfg = ShepardConfig { truncation_radius_in_sigmas: 0.1 };
        let u = inpaint_shepard_with(&img, &mask, &cfg).unwrap();
        assert_eq!(u.values(), &[0.0, 0.0, 0.0, 5.0, 5.0, 5.0]);
    }

    proptest! {
        #[test]
        fn constants_and_bounds(w in 1usize..24, h in 1usize..24, d in 0.01f64..0.5, seed in any::<u64>(), c in 0.0f64..255.0) {
            let mut mask = crate::mask_gen::random_mask(w, h, d, seed);
            if mask.count_ones() == 0 {
                mask.set(0, 0, true);
            }
            let u = inpaint_shepard(&GrayImage::filled(w, h, c), &mask).unwrap();
            prop_assert!(u.values().iter().all(|&v| v == c));

            let img = GrayImage::from_fn(w, h, |x, y| ((x * 31 + y * 17 + seed as usize) % 256) as f64);
            let u = inpaint_shepard(&img, &mask).unwrap();
            let known: Vec<f64> = mask.ones_indices().iter().map(|&i| img.values()[i]).collect();
            let lo = known.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = known.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(u.values().iter().all(|&v| v >= lo && v <= hi));
        }
    }
}
