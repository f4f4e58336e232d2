use std::path::Path;
use std::process::{Command, Output};

use sparsemask::bench::records_from_csv;
use sparsemask::image_io::{read_pbm, write_pbm, write_pgm, BinaryMask, GrayImage};

fn sparsemask(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsemask")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sparsemask(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn table1(dir: &Path) -> String {
    let path = dir.join("t1.pbm");
    let mask = BinaryMask::from_rows(&["1010", "0001", "0100", "0010"]).unwrap();
    std::fs::write(&path, write_pbm(&mask)).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn encode_decode_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let src = table1(dir.path());
    for codec in ["marwood", "demaret", "bpaq-s", "bpaq-m", "bpaq-l", "bpaq-xl", "ulpaq", "rle-huffman", "rle-arith"] {
        let sbm = dir.path().join(format!("{codec}.sbm"));
        let back = dir.path().join(format!("{codec}.pbm"));
        ok(&["encode", "--codec", codec, "--in", &src, "--out", sbm.to_str().unwrap()]);
        ok(&["decode", "--in", sbm.to_str().unwrap(), "--out", back.to_str().unwrap()]);
        assert_eq!(std::fs::read(&back).unwrap(), std::fs::read(&src).unwrap(), "{codec}");
    }
}

#[test]
fn repr_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let src = table1(dir.path());
    assert_eq!(ok(&["repr", "--in", &src, "--form", "rle"]).trim(), "0 5 1 2 1");
    assert_eq!(ok(&["repr", "--in", &src, "--form", "vector"]).trim(), "1 0 1 0 0 0 0 1 0 1 0 0 0 0 1 0");
    assert_eq!(ok(&["repr", "--in", &src, "--form", "csr"]).trim(), "1 3 4 2 3\n2 1 1 1");
    assert_eq!(ok(&["repr", "--in", &src, "--form", "coo", "--inline"]).trim(), "(1,1), (1,3), (2,4), (3,2), (4,3)");
}

#[test]
fn entropy_of_vector_form() {
    let dir = tempfile::tempdir().unwrap();
    let src = table1(dir.path());
    let h: f64 = ok(&["entropy", "--in", &src, "--form", "vector"]).trim().parse().unwrap();
    let p: f64 = 5.0 / 16.0;
    let oracle = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
    assert!((h - oracle).abs() < 1e-12, "{h} vs {oracle}");
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img.pgm");
    std::fs::write(&img, write_pgm(&GrayImage::from_fn(20, 16, |x, y| ((x * 7 + y * 3) % 40) as f64))).unwrap();
    for dist in ["random", "sparsify", "densify"] {
        let (a, b) = (dir.path().join(format!("{dist}a.pbm")), dir.path().join(format!("{dist}b.pbm")));
        for out in [&a, &b] {
            ok(&["gen", "--image", img.to_str().unwrap(), "--dist", dist, "--density", "0.1", "--seed", "4", "--out", out.to_str().unwrap()]);
        }
        let bytes = std::fs::read(&a).unwrap();
        assert_eq!(bytes, std::fs::read(&b).unwrap());
        assert_eq!(read_pbm(&bytes).unwrap().count_ones(), 32, "{dist}");
    }
}

#[test]
fn bench_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    ok(&["synth", "--out", corpus.to_str().unwrap(), "--count", "1", "--size", "24"]);
    let csv = dir.path().join("out.csv");
    let summary = dir.path().join("summary.csv");
    ok(&[
        "bench", "--corpus", corpus.to_str().unwrap(), "--codecs", "marwood,ulpaq", "--densities", "0.04..0.05",
        "--dists", "random,densify", "--seed", "1", "--csv", csv.to_str().unwrap(), "--summary",
        summary.to_str().unwrap(), "--include-header",
    ]);
    let records = records_from_csv(&std::fs::read(&csv).unwrap()).unwrap();
    assert_eq!(records.len(), 2 * 2 * 2);
    assert!(records.iter().all(|r| r.bytes_per_mask_pixel == r.total_bytes as f64 / r.mask_pixels as f64));
    let summary = std::fs::read_to_string(&summary).unwrap();
    assert_eq!(summary.lines().count(), 1 + 2 * 2);
}

#[test]
fn failures_are_single_line_and_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let src = table1(dir.path());
    for args in [
        vec!["encode", "--codec", "zip", "--in", src.as_str(), "--out", "/dev/null"],
        vec!["decode", "--in", "/nonexistent/x.sbm", "--out", "/dev/null"],
        vec!["repr", "--in", src.as_str(), "--form", "tree"],
        vec!["repr", "--in", src.as_str(), "--bogus"],
        vec!["bench", "--csv", "/dev/null", "--densities", "0.5..1.0"],
    ] {
        let out = sparsemask(&args);
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
    }
}

#[test]
fn decode_rejects_corrupt_container() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.sbm");
    std::fs::write(&bad, b"SBM2\x01").unwrap();
    let out = sparsemask(&["decode", "--in", bad.to_str().unwrap(), "--out", "/dev/null"]);
    assert!(!out.status.success());
}
