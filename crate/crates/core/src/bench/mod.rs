//! Codec × mask family × density sweeps with size and timing records.

mod corpus;
mod pipeline;

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{decode_payload, encode_payload, CodecError};
use crate::image_io::{BinaryMask, CodecId, GrayImage};
use crate::mask_gen::{
    densify, random_mask, sparsify_schedule, HomogeneousDiffusion, MaskGenError, SelectionConfig, Shepard,
};

pub use corpus::{load_corpus, synthetic_corpus, synthetic_image, CorpusImage};
pub use pipeline::{pipeline_decode, pipeline_encode};

/// Bytes of the `SBM1` container header.
pub const HEADER_BYTES: usize = 21;

/// Environment variable capping the number of bench worker threads.
pub const THREADS_ENV: &str = "SPARSEMASK_THREADS";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("empty {0} list")]
    EmptyPlan(&'static str),
    #[error("density {0} outside (0, 1)")]
    InvalidDensity(f64),
    #[error("{0}")]
    Io(String),
    #[error("mask generation failed for {image}/{distribution}: {source}")]
    MaskGen { image: String, distribution: &'static str, source: MaskGenError },
    #[error("{codec} failed on {image}/{distribution}/{density}: {source}")]
    Codec { codec: CodecId, image: String, distribution: &'static str, density: f64, source: CodecError },
    #[error("round trip mismatch: {codec} on {image}/{distribution}/{density}")]
    RoundTrip { codec: CodecId, image: String, distribution: &'static str, density: f64 },
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("no records to aggregate")]
    NoRecords,
    #[error("csv: {0}")]
    Csv(String),
}

/// Mask families of the evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Distribution {
    Random,
    SparsifyHomdiff,
    DensifyShepard,
}

impl Distribution {
    pub const ALL: [Distribution; 3] = [Distribution::Random, Distribution::SparsifyHomdiff, Distribution::DensifyShepard];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Random => "random",
            Distribution::SparsifyHomdiff => "sparsify-homdiff",
            Distribution::DensifyShepard => "densify-shepard",
        }
    }

    /// Accepts the full names and the short forms `sparsify` and `densify`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "sparsify" => Some(Distribution::SparsifyHomdiff),
            "densify" => Some(Distribution::DensifyShepard),
            _ => Self::ALL.into_iter().find(|d| d.name() == name),
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Selection parameters shared by all generated masks of a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub candidate_fraction: f64,
    pub removal_fraction: f64,
    pub batch_size: Option<usize>,
    pub candidates_per_point: usize,
}

impl Default for SelectionParams {
    fn default() -> Self {
        let d = SelectionConfig::new(0.0, 0);
        Self {
            candidate_fraction: d.candidate_fraction,
            removal_fraction: d.removal_fraction,
            batch_size: d.batch_size,
            candidates_per_point: d.candidates_per_point,
        }
    }
}

impl SelectionParams {
    pub fn config(&self, density: f64, seed: u64) -> SelectionConfig {
        SelectionConfig {
            target_density: density,
            candidate_fraction: self.candidate_fraction,
            removal_fraction: self.removal_fraction,
            batch_size: self.batch_size,
            candidates_per_point: self.candidates_per_point,
            seed,
        }
    }
}

/// Seed of the generator for one (image, family, density) cell, as a
/// 64-bit FNV-1a hash so it is identical on every platform.
pub fn mask_seed(seed: u64, image_id: &str, distribution: Distribution, density: f64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&seed.to_le_bytes());
    eat(image_id.as_bytes());
    eat(&[0xff]);
    eat(distribution.name().as_bytes());
    eat(&density.to_bits().to_le_bytes());
    h
}

/// One mask of `distribution` at `density` for `image`.
pub fn generate_mask(
    image: &GrayImage,
    distribution: Distribution,
    density: f64,
    seed: u64,
    params: &SelectionParams,
) -> Result<BinaryMask, MaskGenError> {
    let cfg = params.config(density, seed);
    match distribution {
        Distribution::Random => Ok(random_mask(image.width(), image.height(), density, seed)),
        Distribution::SparsifyHomdiff => {
            crate::mask_gen::sparsify(image, &mut HomogeneousDiffusion::default(), &cfg)
        }
        Distribution::DensifyShepard => densify(image, &mut Shepard::default(), &cfg),
    }
}

/// Masks of one family for every density in `densities`, in that order.
///
/// Sparsification runs once per image from the full mask down to the
/// lowest density, recording each target on the way; its seed is taken
/// from the lowest density. The other families draw one mask per density.
pub fn generate_family(
    image_id: &str,
    image: &GrayImage,
    distribution: Distribution,
    densities: &[f64],
    seed: u64,
    params: &SelectionParams,
) -> Result<Vec<BinaryMask>, MaskGenError> {
    match distribution {
        Distribution::SparsifyHomdiff => {
            let lowest = densities.iter().cloned().fold(f64::INFINITY, f64::min);
            let cfg = params.config(lowest, mask_seed(seed, image_id, distribution, lowest));
            sparsify_schedule(image, &mut HomogeneousDiffusion::default(), &cfg, densities)
        }
        _ => densities
            .iter()
            .map(|&d| generate_mask(image, distribution, d, mask_seed(seed, image_id, distribution, d), params))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub corpus: Vec<CorpusImage>,
    pub codecs: Vec<CodecId>,
    pub densities: Vec<f64>,
    pub distributions: Vec<Distribution>,
    pub seed: u64,
    /// Timing repetitions; the best run is reported. Values below 3 are raised to 3.
    pub repetitions: usize,
    pub selection: SelectionParams,
    /// Count the container header in `bytes_per_mask_pixel`.
    pub include_header: bool,
    /// Worker cap; `None` defers to [`THREADS_ENV`], then to rayon's default.
    pub threads: Option<usize>,
}

impl BenchPlan {
    pub fn new(corpus: Vec<CorpusImage>) -> Self {
        Self {
            corpus,
            codecs: CodecId::ALL.to_vec(),
            densities: default_densities(),
            distributions: Distribution::ALL.to_vec(),
            seed: 0,
            repetitions: 3,
            selection: SelectionParams::default(),
            include_header: false,
            threads: None,
        }
    }

    fn validate(&self) -> Result<(), BenchError> {
        if self.corpus.is_empty() {
            return Err(BenchError::EmptyPlan("corpus"));
        }
        if self.codecs.is_empty() {
            return Err(BenchError::EmptyPlan("codec"));
        }
        if self.densities.is_empty() {
            return Err(BenchError::EmptyPlan("density"));
        }
        if self.distributions.is_empty() {
            return Err(BenchError::EmptyPlan("distribution"));
        }
        if let Some(&d) = self.densities.iter().find(|&&d| !(d > 0.0 && d < 1.0)) {
            return Err(BenchError::InvalidDensity(d));
        }
        Ok(())
    }
}

/// 1% to 10% in steps of one percentage point.
pub fn default_densities() -> Vec<f64> {
    density_range(0.01, 0.10)
}

/// `a..b` inclusive at one-percentage-point steps. Each value is `k/100`
/// exactly as parsed, so no rounding drift accumulates.
pub fn density_range(a: f64, b: f64) -> Vec<f64> {
    let (lo, hi) = ((a * 100.0).round() as i64, (b * 100.0).round() as i64);
    (lo..=hi).map(|k| k as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub codec: String,
    pub image: String,
    pub distribution: String,
    pub density: f64,
    pub mask_pixels: usize,
    pub payload_bytes: usize,
    pub total_bytes: usize,
    pub encode_ms: f64,
    pub decode_ms: f64,
    pub bytes_per_mask_pixel: f64,
}

impl BenchRecord {
    /// Every field except the timings.
    pub fn size_fields(&self) -> (&str, &str, &str, u64, usize, usize, usize, u64) {
        (
            &self.codec,
            &self.image,
            &self.distribution,
            self.density.to_bits(),
            self.mask_pixels,
            self.payload_bytes,
            self.total_bytes,
            self.bytes_per_mask_pixel.to_bits(),
        )
    }
}

pub fn bytes_per_mask_pixel(payload_bytes: usize, mask: &BinaryMask) -> Result<f64, BenchError> {
    match mask.count_ones() {
        0 => Err(BenchError::EmptyMask),
        k => Ok(payload_bytes as f64 / k as f64),
    }
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps {
        let t = Instant::now();
        let v = f();
        best = best.min(t.elapsed().as_secs_f64() * 1e3);
        out = Some(v);
    }
    (out.expect("at least one repetition"), best)
}

struct Cell<'a> {
    image: &'a str,
    distribution: Distribution,
    density: f64,
    mask: &'a BinaryMask,
}

fn measure(cell: &Cell<'_>, codec: CodecId, plan: &BenchPlan) -> Result<BenchRecord, BenchError> {
    let reps = plan.repetitions.max(3);
    let fail = |source| BenchError::Codec {
        codec,
        image: cell.image.to_string(),
        distribution: cell.distribution.name(),
        density: cell.density,
        source,
    };
    let mask = cell.mask;
    let (payload, encode_ms) = best_of(reps, || encode_payload(codec, mask));
    let payload = payload.map_err(fail)?;
    let ones = mask.count_ones() as u64;
    let (decoded, decode_ms) =
        best_of(reps, || decode_payload(codec, &payload, mask.width(), mask.height(), ones));
    if decoded.map_err(fail)? != *mask {
        return Err(BenchError::RoundTrip {
            codec,
            image: cell.image.to_string(),
            distribution: cell.distribution.name(),
            density: cell.density,
        });
    }
    let total_bytes = payload.len() + HEADER_BYTES;
    let counted = if plan.include_header { total_bytes } else { payload.len() };
    Ok(BenchRecord {
        codec: codec.name().to_string(),
        image: cell.image.to_string(),
        distribution: cell.distribution.name().to_string(),
        density: cell.density,
        mask_pixels: mask.count_ones(),
        payload_bytes: payload.len(),
        total_bytes,
        encode_ms,
        decode_ms,
        bytes_per_mask_pixel: bytes_per_mask_pixel(counted, mask)?,
    })
}

fn thread_cap(plan: &BenchPlan) -> Option<usize> {
    plan.threads
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
}

/// All masks of the plan, keyed by (image index, family index), each in
/// density order.
pub fn generate_masks(plan: &BenchPlan) -> Result<Vec<Vec<Vec<BinaryMask>>>, BenchError> {
    plan.validate()?;
    let pool = pool(plan)?;
    pool.install(|| {
        plan.corpus
            .par_iter()
            .map(|img| {
                plan.distributions
                    .par_iter()
                    .map(|&dist| {
                        generate_family(&img.id, &img.image, dist, &plan.densities, plan.seed, &plan.selection).map_err(
                            |source| BenchError::MaskGen { image: img.id.clone(), distribution: dist.name(), source },
                        )
                    })
                    .collect()
            })
            .collect()
    })
}

fn pool(plan: &BenchPlan) -> Result<rayon::ThreadPool, BenchError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap(plan) {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| BenchError::Io(e.to_string()))
}

/// Runs the sweep. Records are ordered by image, family, density, then
/// codec, following the plan's list orders.
pub fn run_benchmark(plan: &BenchPlan) -> Result<Vec<BenchRecord>, BenchError> {
    measure_masks(plan, &generate_masks(plan)?)
}

/// Codec measurements over masks laid out as by [`generate_masks`].
pub fn measure_masks(plan: &BenchPlan, masks: &[Vec<Vec<BinaryMask>>]) -> Result<Vec<BenchRecord>, BenchError> {
    plan.validate()?;
    let mut cells = Vec::new();
    for (img, per_dist) in plan.corpus.iter().zip(masks) {
        for (&distribution, per_density) in plan.distributions.iter().zip(per_dist) {
            for (&density, mask) in plan.densities.iter().zip(per_density) {
                for &codec in &plan.codecs {
                    cells.push((Cell { image: &img.id, distribution, density, mask }, codec));
                }
            }
        }
    }
    pool(plan)?.install(|| cells.par_iter().map(|(cell, codec)| measure(cell, *codec, plan)).collect())
}

/// Columns records can be grouped by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Codec,
    Image,
    Distribution,
    Density,
}

impl GroupKey {
    pub fn name(self) -> &'static str {
        match self {
            GroupKey::Codec => "codec",
            GroupKey::Image => "image",
            GroupKey::Distribution => "distribution",
            GroupKey::Density => "density",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [GroupKey::Codec, GroupKey::Image, GroupKey::Distribution, GroupKey::Density]
            .into_iter()
            .find(|k| k.name() == name)
    }

    fn value(self, r: &BenchRecord) -> String {
        match self {
            GroupKey::Codec => r.codec.clone(),
            GroupKey::Image => r.image.clone(),
            GroupKey::Distribution => r.distribution.clone(),
            GroupKey::Density => r.density.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub group_by: Vec<GroupKey>,
    pub keys: Vec<String>,
    pub records: usize,
    pub bytes_per_mask_pixel: f64,
    pub encode_ms: f64,
    pub decode_ms: f64,
}

/// Group means in order of each group's first appearance.
pub fn aggregate(records: &[BenchRecord], group_by: &[GroupKey]) -> Result<Vec<SummaryRow>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let mut order: Vec<Vec<String>> = Vec::new();
    let mut sums: BTreeMap<Vec<String>, (usize, f64, f64, f64)> = BTreeMap::new();
    for r in records {
        let key: Vec<String> = group_by.iter().map(|k| k.value(r)).collect();
        let e = sums.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            (0, 0.0, 0.0, 0.0)
        });
        e.0 += 1;
        e.1 += r.bytes_per_mask_pixel;
        e.2 += r.encode_ms;
        e.3 += r.decode_ms;
    }
    Ok(order
        .into_iter()
        .map(|key| {
            let (n, b, e, d) = sums[&key];
            let n_f = n as f64;
            SummaryRow {
                group_by: group_by.to_vec(),
                keys: key,
                records: n,
                bytes_per_mask_pixel: b / n_f,
                encode_ms: e / n_f,
                decode_ms: d / n_f,
            }
        })
        .collect())
}

/// Summary CSV: group key columns, then `records,bytes_per_mask_pixel,encode_ms,decode_ms`.
pub fn emit_csv(rows: &[SummaryRow]) -> Result<Vec<u8>, BenchError> {
    let first = rows.first().ok_or(BenchError::NoRecords)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| BenchError::Csv(e.to_string());
    let mut header: Vec<&str> = first.group_by.iter().map(|k| k.name()).collect();
    header.extend(["records", "bytes_per_mask_pixel", "encode_ms", "decode_ms"]);
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut fields = r.keys.clone();
        fields.extend([
            r.records.to_string(),
            r.bytes_per_mask_pixel.to_string(),
            r.encode_ms.to_string(),
            r.decode_ms.to_string(),
        ]);
        w.write_record(&fields).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| BenchError::Csv(e.to_string()))
}

/// Per-record CSV with the columns of [`BenchRecord`].
pub fn records_to_csv(records: &[BenchRecord]) -> Result<Vec<u8>, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| BenchError::Csv(e.to_string()))?;
    }
    w.into_inner().map_err(|e| BenchError::Csv(e.to_string()))
}

pub fn records_from_csv(bytes: &[u8]) -> Result<Vec<BenchRecord>, BenchError> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| BenchError::Csv(e.to_string()))
}
