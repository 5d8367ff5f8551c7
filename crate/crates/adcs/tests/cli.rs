//! End-to-end exercises of the `adcs` binary: round trips, forced codec
//! selection, corrupt-archive handling, and exit-code conventions.

use std::path::Path;
use std::process::{Command, Output};

fn adcs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adcs"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn adcs_ok(dir: &Path, args: &[&str]) -> String {
    let out = adcs(dir, args);
    assert!(
        out.status.success(),
        "adcs {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_f64(path: &Path) -> Vec<f64> {
    std::fs::read(path)
        .unwrap()
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

/// Synthesize a small mixed corpus and return the manifest path.
fn make_corpus(dir: &Path) -> &'static str {
    let specs = [
        ("smooth", "smooth-sine", "32x32x32", "5"),
        ("noisy", "gaussian-noise", "32x32x32", "6"),
        ("steps", "piecewise-constant", "4096", "7"),
    ];
    let mut manifest = String::new();
    for (name, kind, dims, seed) in specs {
        let raw = format!("{name}.raw");
        adcs_ok(
            dir,
            &["synth", kind, "--dims", dims, "--seed", seed, "--out", &raw],
        );
        manifest.push_str(&format!("{name} f64 {dims} {raw}\n"));
    }
    std::fs::write(dir.join("corpus.txt"), manifest).unwrap();
    "corpus.txt"
}

#[test]
fn compress_decompress_round_trip_honors_bound() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let manifest = make_corpus(dir);
    let eb_rel = 1e-4;
    let csv = adcs_ok(
        dir,
        &[
            "compress",
            "--manifest",
            manifest,
            "--eb-rel",
            "1e-4",
            "--out",
            "a.adcs",
        ],
    );
    assert!(csv.starts_with("# adcs-csv v1 compress\n"));
    assert_eq!(
        csv.lines().count(),
        2 + 3,
        "schema, header, one row per field"
    );

    adcs_ok(dir, &["decompress", "a.adcs", "--out", "restored"]);
    for name in ["smooth", "noisy", "steps"] {
        let orig = read_f64(&dir.join(format!("{name}.raw")));
        let back = read_f64(&dir.join("restored").join(format!("{name}.raw")));
        assert_eq!(orig.len(), back.len());
        let (lo, hi) = orig
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
                (l.min(x), h.max(x))
            });
        let eb = eb_rel * (hi - lo);
        let worst = orig
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(
            worst <= eb,
            "{name}: max error {worst:.3e} exceeds bound {eb:.3e}"
        );
    }
}

#[test]
fn forced_codec_flags_override_selection() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let manifest = make_corpus(dir);
    for (codec, bit) in [("predictor", "0"), ("transform", "1")] {
        let csv = adcs_ok(
            dir,
            &[
                "compress",
                "--manifest",
                manifest,
                "--eb-rel",
                "1e-3",
                "--codec",
                codec,
                "--out",
                "f.adcs",
            ],
        );
        for row in csv.lines().skip(2) {
            assert_eq!(row.split(',').nth(1), Some(bit), "row: {row}");
        }
    }
}

#[test]
fn tampered_archive_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let manifest = make_corpus(dir);
    adcs_ok(
        dir,
        &[
            "compress",
            "--manifest",
            manifest,
            "--eb-rel",
            "1e-3",
            "--out",
            "a.adcs",
        ],
    );
    let good = std::fs::read(dir.join("a.adcs")).unwrap();

    let mut bad_magic = good.clone();
    bad_magic[0] ^= 0xFF;
    std::fs::write(dir.join("bad_magic.adcs"), bad_magic).unwrap();
    let out = adcs(dir, &["decompress", "bad_magic.adcs", "--out", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("corrupt"));

    let mut bad_version = good.clone();
    bad_version[4] = 99;
    std::fs::write(dir.join("bad_version.adcs"), bad_version).unwrap();
    let out = adcs(dir, &["decompress", "bad_version.adcs", "--out", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("version 99"));

    let mut truncated = good;
    truncated.truncate(truncated.len() / 2);
    std::fs::write(dir.join("trunc.adcs"), truncated).unwrap();
    let out = adcs(dir, &["decompress", "trunc.adcs", "--out", "x"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_archive_decompresses_to_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let empty = adcs::codec::CompressedArchive { records: vec![] };
    std::fs::write(dir.join("empty.adcs"), empty.to_bytes()).unwrap();
    adcs_ok(dir, &["decompress", "empty.adcs", "--out", "nothing"]);
    assert_eq!(std::fs::read_dir(dir.join("nothing")).unwrap().count(), 0);
}

#[test]
fn estimate_and_rdcurve_report_csv() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    let manifest = make_corpus(dir);
    let csv = adcs_ok(
        dir,
        &[
            "estimate",
            "--manifest",
            manifest,
            "--eb-rel",
            "1e-3",
            "--rsp",
            "0.05,0.10",
            "--no-verify",
        ],
    );
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# adcs-csv v1 estimate"));
    assert_eq!(lines.next(), Some("rsp,field,codec,est_br,est_psnr"));
    // two sampling ratios x three fields x two codec families
    assert_eq!(lines.count(), 2 * 3 * 2);

    let csv = adcs_ok(
        dir,
        &["rdcurve", "--manifest", manifest, "--sweep", "1e-2,1e-3"],
    );
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# adcs-csv v1 rdcurve"));
    assert_eq!(lines.next(), Some("field,eb_rel,codec,bitrate,psnr"));
    // three fields x two bounds x {predictor, transform, auto}
    assert_eq!(lines.count(), 3 * 2 * 3);
}

#[test]
fn usage_and_runtime_errors_use_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();
    // missing manifest file: runtime failure
    let out = adcs(
        dir,
        &[
            "compress",
            "--manifest",
            "missing.txt",
            "--eb-rel",
            "1e-3",
            "--out",
            "a.adcs",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    // --eb-abs and --eb-rel are mutually exclusive: usage error
    let out = adcs(
        dir,
        &[
            "compress",
            "--manifest",
            "m.txt",
            "--eb-rel",
            "1e-3",
            "--eb-abs",
            "0.1",
            "--out",
            "a.adcs",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    // a bound is required
    let out = adcs(dir, &["compress", "--manifest", "m.txt", "--out", "a.adcs"]);
    assert_eq!(out.status.code(), Some(2));
    // --help succeeds
    let out = adcs(dir, &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
