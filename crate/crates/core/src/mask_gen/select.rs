//! Probabilistic inpainting-guided mask selection.
//!
//! Per-pixel error is the squared difference between reconstruction and
//! original. Ties in any error ranking go to the lower row-major index.

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;

use super::{rng, target_points, Inpainter, MaskGenError, SelectionConfig};
use crate::image_io::{BinaryMask, GrayImage};

fn squared_error(u: &GrayImage, f: &GrayImage, i: usize) -> f64 {
    let d = u.values()[i] - f.values()[i];
    d * d
}

fn by_error_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Probabilistic sparsification from the full mask down to
/// `round(target_density·N)` points.
pub fn sparsify(
    image: &GrayImage,
    op: &mut dyn Inpainter,
    config: &SelectionConfig,
) -> Result<BinaryMask, MaskGenError> {
    Ok(sparsify_schedule(image, op, config, &[config.target_density])?.remove(0))
}

/// One sparsification run that records the mask each time it reaches one of
/// `densities`. A step that would cross a recorded target is cut short at
/// it, so the result for a single density equals [`sparsify`].
/// `config.target_density` is ignored. Masks are returned in the order of
/// `densities`.
pub fn sparsify_schedule(
    image: &GrayImage,
    op: &mut dyn Inpainter,
    config: &SelectionConfig,
    densities: &[f64],
) -> Result<Vec<BinaryMask>, MaskGenError> {
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let mut targets = Vec::with_capacity(densities.len());
    for &d in densities {
        SelectionConfig { target_density: d, ..*config }.validate()?;
        let t = target_points(d, n);
        if t == 0 {
            return Err(MaskGenError::InvalidConfig(format!("density {d} selects no points")));
        }
        targets.push(t);
    }
    let mut pending: Vec<usize> = targets.clone();
    pending.sort_unstable_by(|a, b| b.cmp(a));
    pending.dedup();

    let mut rng: ChaCha8Rng = rng(config.seed);
    let mut mask = BinaryMask::full(w, h);
    let mut snapshots: Vec<(usize, BinaryMask)> = Vec::new();
    op.reset();
    for &t in &pending {
        while mask.count_ones() > t {
            sparsify_step(image, op, config, &mut rng, &mut mask, t)?;
        }
        snapshots.push((t, mask.clone()));
    }
    Ok(targets
        .iter()
        .map(|t| snapshots.iter().find(|(s, _)| s == t).expect("every target recorded").1.clone())
        .collect())
}

fn sparsify_step(
    image: &GrayImage,
    op: &mut dyn Inpainter,
    config: &SelectionConfig,
    rng: &mut ChaCha8Rng,
    mask: &mut BinaryMask,
    target: usize,
) -> Result<(), MaskGenError> {
    let ones = mask.ones_indices();
    let k = ones.len();
    // At least one point must stay known for the reconstruction to exist.
    let c = ((config.candidate_fraction * k as f64).ceil() as usize).clamp(1, k - 1);
    let candidates: Vec<usize> = sample(rng, k, c).into_iter().map(|j| ones[j]).collect();
    for &i in &candidates {
        mask.set_index(i, false);
    }
    let u = op.inpaint(image, mask)?;
    let mut ranked: Vec<(f64, usize)> = candidates.iter().map(|&i| (squared_error(&u, image, i), i)).collect();
    ranked.sort_by(by_error_then_index);
    let remove = ((config.removal_fraction * c as f64).ceil() as usize).min(k - target);
    for &(_, i) in &ranked[remove..] {
        mask.set_index(i, true);
    }
    Ok(())
}

/// Probabilistic densification from a random seed set of one batch up to
/// `round(target_density·N)` points. Each step draws
/// `candidates_per_point·batch` unknown pixels at random and adds the batch
/// with the largest error among them.
pub fn densify(
    image: &GrayImage,
    op: &mut dyn Inpainter,
    config: &SelectionConfig,
) -> Result<BinaryMask, MaskGenError> {
    config.validate()?;
    let (w, h) = (image.width(), image.height());
    let n = w * h;
    let target = config.target_points(n);
    if target == 0 {
        return Err(MaskGenError::InvalidConfig(format!("density {} selects no points", config.target_density)));
    }
    let batch = config.batch_for(target);
    let mut rng = rng(config.seed);
    let mut mask = BinaryMask::new(w, h);
    for i in sample(&mut rng, n, batch.min(target)) {
        mask.set_index(i, true);
    }
    op.reset();
    while mask.count_ones() < target {
        let u = op.inpaint(image, &mask)?;
        let unknown: Vec<usize> = (0..n).filter(|&i| !mask.get_index(i)).collect();
        let add = batch.min(target - mask.count_ones());
        let c = batch.saturating_mul(config.candidates_per_point).clamp(add, unknown.len());
        let mut ranked: Vec<(f64, usize)> = sample(&mut rng, unknown.len(), c)
            .into_iter()
            .map(|j| (-squared_error(&u, image, unknown[j]), unknown[j]))
            .collect();
        ranked.select_nth_unstable_by(add - 1, by_error_then_index);
        for &(_, i) in &ranked[..add] {
            mask.set_index(i, true);
        }
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask_gen::{inpaint_shepard, mse, random_mask, HomogeneousDiffusion, Shepard};

    fn step_image(w: usize, h: usize) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| if x >= w / 2 { 200.0 } else if y >= h / 2 { 120.0 } else { 40.0 })
    }

    /// Mean distance from mask points to the nearest pixel adjacent to an
    /// intensity jump, by exhaustive search.
    fn mean_edge_distance(img: &GrayImage, mask: &BinaryMask) -> f64 {
        let (w, h) = (img.width(), img.height());
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = img.get(x, y);
                let jump = (x + 1 < w && img.get(x + 1, y) != v)
                    || (x > 0 && img.get(x - 1, y) != v)
                    || (y + 1 < h && img.get(x, y + 1) != v)
                    || (y > 0 && img.get(x, y - 1) != v);
                if jump {
                    edges.push((x as f64, y as f64));
                }
            }
        }
        let pts = mask.ones_indices();
        pts.iter()
            .map(|&i| {
                let (x, y) = ((i % w) as f64, (i / w) as f64);
                edges.iter().map(|&(ex, ey)| ((ex - x).powi(2) + (ey - y).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / pts.len() as f64
    }

    #[test]
    fn sparsify_count_and_determinism() {
        let img = GrayImage::from_fn(16, 16, |x, y| ((x * 13 + y * 29) % 97) as f64);
        let cfg = SelectionConfig::new(0.1, 7);
        let a = sparsify(&img, &mut HomogeneousDiffusion::default(), &cfg).unwrap();
        assert_eq!(a.count_ones(), 26);
        assert_eq!(a, sparsify(&img, &mut HomogeneousDiffusion::default(), &cfg).unwrap());
    }

    #[test]
    fn sparsify_to_full_density_is_identity() {
        let img = GrayImage::filled(5, 5, 3.0);
        let m = sparsify(&img, &mut HomogeneousDiffusion::default(), &SelectionConfig::new(1.0, 1)).unwrap();
        assert_eq!(m, BinaryMask::full(5, 5));
    }

    #[test]
    fn schedule_matches_single_runs_at_first_target() {
        let img = GrayImage::from_fn(12, 12, |x, y| ((x * x + 3 * y) % 50) as f64);
        let cfg = SelectionConfig::new(0.3, 11);
        let single = sparsify(&img, &mut HomogeneousDiffusion::default(), &cfg).unwrap();
        let sched = sparsify_schedule(&img, &mut HomogeneousDiffusion::default(), &cfg, &[0.1, 0.3]).unwrap();
        assert_eq!(sched[1], single);
        assert_eq!(sched[0].count_ones(), 14);
        // Later snapshots are subsets of earlier ones.
        assert!(sched[0].ones_indices().iter().all(|&i| sched[1].get_index(i)));
    }

    #[test]
    fn sparsified_points_hug_edges() {
        let img = step_image(32, 32);
        let m = sparsify(&img, &mut HomogeneousDiffusion::default(), &SelectionConfig::new(0.05, 3)).unwrap();
        let r = random_mask(32, 32, 0.05, 3);
        assert_eq!(m.count_ones(), r.count_ones());
        assert!(mean_edge_distance(&img, &m) < mean_edge_distance(&img, &r));
    }

    #[test]
    fn densify_single_point_on_constant_image() {
        let img = GrayImage::filled(8, 8, 9.0);
        let m = densify(&img, &mut Shepard::default(), &SelectionConfig::new(1.0 / 64.0, 5)).unwrap();
        assert_eq!(m.count_ones(), 1);
    }

    #[test]
    fn densify_tie_break_is_scan_order() {
        // Every unknown pixel is a candidate and has zero error, so the
        // added batch is the first unknown pixels in row-major order.
        let img = GrayImage::filled(6, 6, 1.0);
        let cfg = SelectionConfig {
            batch_size: Some(2),
            candidates_per_point: usize::MAX,
            ..SelectionConfig::new(4.0 / 36.0, 9)
        };
        let m = densify(&img, &mut Shepard::default(), &cfg).unwrap();
        let seed_pts: Vec<usize> = sample(&mut rng(9), 36, 2).into_iter().collect();
        let mut expected: Vec<usize> = seed_pts.clone();
        expected.extend((0..36).filter(|i| !seed_pts.contains(i)).take(2));
        expected.sort_unstable();
        assert_eq!(m.ones_indices(), expected);
    }

    #[test]
    fn densify_beats_random_on_step_image() {
        let img = step_image(32, 32);
        let (mut dens, mut rand) = (0.0, 0.0);
        for seed in 0..10 {
            let m = densify(&img, &mut Shepard::default(), &SelectionConfig::new(0.05, seed)).unwrap();
            assert_eq!(m.count_ones(), 51);
            dens += mse(&inpaint_shepard(&img, &m).unwrap(), &img).unwrap();
            let r = random_mask(32, 32, 0.05, seed);
            rand += mse(&inpaint_shepard(&img, &r).unwrap(), &img).unwrap();
        }
        assert!(dens <= rand, "{dens} vs {rand}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let img = GrayImage::filled(4, 4, 0.0);
        let bad = SelectionConfig { removal_fraction: 0.0, ..SelectionConfig::new(0.5, 1) };
        assert!(sparsify(&img, &mut HomogeneousDiffusion::default(), &bad).is_err());
        assert!(densify(&img, &mut Shepard::default(), &SelectionConfig::new(0.0, 1)).is_err());
    }
}
