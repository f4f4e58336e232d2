//! Benchmark corpora: PGM directories and a synthetic stand-in for
//! natural photographs.

use std::path::Path;

use rand::Rng;

use super::BenchError;
use crate::image_io::{read_pgm, GrayImage};
use crate::mask_gen::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusImage {
    pub id: String,
    pub image: GrayImage,
}

/// Every `*.pgm` in `dir`, sorted by file name. The id is the file stem.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusImage>, BenchError> {
    let io = |e: std::io::Error| BenchError::Io(format!("{}: {e}", dir.display()));
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let bytes = std::fs::read(&p).map_err(|e| BenchError::Io(format!("{}: {e}", p.display())))?;
            let image = read_pgm(&bytes).map_err(|e| BenchError::Io(format!("{}: {e}", p.display())))?;
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(CorpusImage { id, image })
        })
        .collect()
}

/// Integer-valued test images that mix the structures found in
/// photographs: smooth shading, sharp-edged objects, periodic texture
/// and sensor noise. Image `i` depends only on `(seed, i)`.
pub fn synthetic_corpus(count: usize, size: usize, seed: u64) -> Vec<CorpusImage> {
    (0..count)
        .map(|i| CorpusImage {
            id: format!("synth{i:02}"),
            image: synthetic_image(size, seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64)),
        })
        .collect()
}

pub fn synthetic_image(size: usize, seed: u64) -> GrayImage {
    let mut rng = rng(seed);
    let s = size as f64;
    let (g0, gx, gy): (f64, f64, f64) = (rng.gen_range(40.0..200.0), rng.gen_range(-80.0..80.0), rng.gen_range(-80.0..80.0));
    let mut v: Vec<f64> =
        (0..size * size).map(|i| g0 + gx * ((i % size) as f64 / s - 0.5) + gy * ((i / size) as f64 / s - 0.5)).collect();

    // Objects: ellipses and axis-aligned boxes with their own shading.
    for _ in 0..rng.gen_range(4..9) {
        let (cx, cy) = (rng.gen_range(0.0..s), rng.gen_range(0.0..s));
        let (rx, ry) = (rng.gen_range(0.05..0.3) * s, rng.gen_range(0.05..0.3) * s);
        let level: f64 = rng.gen_range(0.0..255.0);
        let slope: f64 = rng.gen_range(-1.0..1.0);
        let boxy = rng.gen_bool(0.4);
        for y in 0..size {
            for x in 0..size {
                let (dx, dy) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                let inside = if boxy { dx.abs() <= 1.0 && dy.abs() <= 1.0 } else { dx * dx + dy * dy <= 1.0 };
                if inside {
                    v[y * size + x] = level + slope * (x as f64 - cx);
                }
            }
        }
    }

    // One textured region.
    let (tx, ty, tr) = (rng.gen_range(0.0..s), rng.gen_range(0.0..s), rng.gen_range(0.1..0.25) * s);
    let (fx, fy, amp) = (rng.gen_range(0.2..1.2), rng.gen_range(0.2..1.2), rng.gen_range(10.0..40.0));
    for y in 0..size {
        for x in 0..size {
            let (dx, dy) = (x as f64 - tx, y as f64 - ty);
            if dx * dx + dy * dy <= tr * tr {
                v[y * size + x] += amp * (fx * x as f64).sin() * (fy * y as f64).cos();
            }
        }
    }

    let noise: f64 = rng.gen_range(1.0..4.0);
    for p in v.iter_mut() {
        let n: f64 = (0..3).map(|_| rng.gen_range(-1.0..1.0)).sum::<f64>() * noise;
        *p = (*p + n).round().clamp(0.0, 255.0);
    }
    GrayImage::new(size, size, v).expect("values clamped to [0, 255]")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_corpus_is_deterministic_and_integral() {
        let a = synthetic_corpus(3, 32, 5);
        assert_eq!(a, synthetic_corpus(3, 32, 5));
        assert_ne!(a[0].image, a[1].image);
        for c in &a {
            assert!(c.image.values().iter().all(|v| v.fract() == 0.0 && (0.0..=255.0).contains(v)));
        }
    }

    #[test]
    fn loads_pgm_directory_in_name_order() {
        let dir = std::env::temp_dir().join(format!("sparsemask-corpus-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for (name, seed) in [("b.pgm", 1), ("a.pgm", 2)] {
            std::fs::write(dir.join(name), crate::image_io::write_pgm(&synthetic_image(8, seed))).unwrap();
        }
        std::fs::write(dir.join("notes.txt"), b"skip").unwrap();
        let c = load_corpus(&dir).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
        assert_eq!(c.iter().map(|c| c.id.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert_eq!(c[0].image, synthetic_image(8, 2));
    }
}
