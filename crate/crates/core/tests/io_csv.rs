//! CSV and JSON round-trip tests: bit-exact float serialization, comment and
//! header handling, parse-error locations, and atomic-write behavior.

mod common;

use common::TestRng;
use covgraph::io::{
    atomic_write, read_batch_csv, read_matrix_csv, write_batch_csv, write_json, write_matrix_csv,
    CSV_SCHEMA,
};
use covgraph::model::{BatchKind, SampleBatch};
use covgraph::Error;
use nalgebra::DMatrix;
use std::fs;

#[test]
fn matrix_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let mut rng = TestRng(7);
    // Mix of scales, including values with no short decimal representation.
    let m = DMatrix::from_fn(4, 3, |i, j| rng.normal() * 10f64.powi((i as i32) - (j as i32)));
    write_matrix_csv(&path, &m).unwrap();
    let back = read_matrix_csv(&path).unwrap();
    assert_eq!(m, back, "shortest round-trip formatting must be lossless");
}

#[test]
fn written_files_carry_the_schema_comment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    write_matrix_csv(&path, &DMatrix::<f64>::identity(2, 2)).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let first = text.lines().next().unwrap();
    assert!(first.starts_with('#') && first.contains(CSV_SCHEMA), "{first}");
}

#[test]
fn batch_round_trip_preserves_samples_and_kind() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("y.csv");
    let data = nalgebra::dmatrix![1.5, -2.25, 0.125; 4.0, 5.5, -6.75]; // dim 2, n 3
    let batch = SampleBatch::new(data.clone(), BatchKind::ObservedY).unwrap();
    write_batch_csv(&path, &batch).unwrap();

    // On disk: one row per sample → 3 data rows of 2 fields.
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], "1.5,4");

    let back = read_batch_csv(&path, BatchKind::ObservedY, false).unwrap();
    assert_eq!(back.kind(), BatchKind::ObservedY);
    assert_eq!(back.data(), &data);
}

#[test]
fn reader_skips_comments_blanks_and_optional_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    fs::write(&path, "# a comment\n\nx1,x2\n1,2\n3,4\n").unwrap();
    let batch = read_batch_csv(&path, BatchKind::LatentX, true).unwrap();
    assert_eq!((batch.dim(), batch.n()), (2, 2));
    assert_eq!(batch.data()[(0, 0)], 1.0);
    // Without skip_header the textual header is a parse error at row 3, col 1.
    match read_batch_csv(&path, BatchKind::LatentX, false) {
        Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (3, 1)),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn ragged_rows_are_reported_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    fs::write(&path, "1,2,3\n4,5\n").unwrap();
    match read_matrix_csv(&path) {
        Err(Error::Parse { row, msg, .. }) => {
            assert_eq!(row, 2);
            assert!(msg.contains("ragged"), "{msg}");
        }
        other => panic!("expected ragged-row error, got {other:?}"),
    }
}

#[test]
fn bad_numbers_and_missing_files_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    fs::write(&path, "1,oops\n").unwrap();
    match read_matrix_csv(&path) {
        Err(Error::Parse { row, col, .. }) => assert_eq!((row, col), (1, 2)),
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(matches!(
        read_matrix_csv(&dir.path().join("nope.csv")),
        Err(Error::Io(_))
    ));
    fs::write(&path, "# only comments\n").unwrap();
    assert!(read_matrix_csv(&path).is_err());
}

#[test]
fn atomic_write_leaves_no_temp_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.txt");
    atomic_write(&path, b"hello").unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "hello");
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "out.txt")
        .collect();
    assert!(leftovers.is_empty(), "stray files: {leftovers:?}");
    // Overwrite goes through the same path.
    atomic_write(&path, b"world").unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "world");
}

#[test]
fn write_json_emits_pretty_output_with_trailing_newline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    #[derive(serde::Serialize)]
    struct Report {
        schema: &'static str,
        value: f64,
    }
    write_json(&path, &Report { schema: covgraph::SCHEMA_VERSION, value: 0.5 }).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n'));
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["schema"], covgraph::SCHEMA_VERSION);
    assert_eq!(parsed["value"], 0.5);
}
