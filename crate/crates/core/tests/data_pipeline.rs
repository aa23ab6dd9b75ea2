use std::path::PathBuf;

use adaprox_core::problems::{
    load_libsvm, load_libsvm_raw, normalize_rows, parse_libsvm, split_train_test, LabelRule, SyntheticSpec,
};
use adaprox_core::Error;

const SAMPLE: &str = "\
# toy file
+1 1:0.5 3:1.5 7:-2
-1 2:1 3:1
+1 7:3

-1 1:1 2:1 3:1 4:1
+1 5:0.25
-1 6:2 7:2
";

fn write_temp(name: &str, text: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn load_normalize_split_is_deterministic() {
    let path = write_temp("pipeline.libsvm", SAMPLE);
    let pipeline = || {
        let ds = normalize_rows(load_libsvm(&path).unwrap());
        split_train_test(&ds, 0.5, 42).unwrap()
    };
    let (train_a, test_a) = pipeline();
    let (train_b, test_b) = pipeline();
    assert_eq!(train_a, train_b);
    assert_eq!(test_a, test_b);
    assert_eq!((train_a.len(), test_a.len()), (3, 3));
    assert_eq!(train_a.dim(), 7);
    for row in train_a.rows().iter().chain(test_a.rows()) {
        assert!((row.norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn split_partitions_the_samples() {
    let ds = SyntheticSpec { n: 101, d: 3, margin: 0.0, flip: 0.0, seed: 4 }.generate().unwrap();
    let (train, test) = split_train_test(&ds, 0.8, 9).unwrap();
    assert_eq!((train.len(), test.len()), (80, 21));
    let mut seen: Vec<Vec<f64>> =
        train.rows().iter().chain(test.rows()).map(|r| r.values().to_vec()).collect();
    let mut all: Vec<Vec<f64>> = ds.rows().iter().map(|r| r.values().to_vec()).collect();
    seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(seen, all);
    let (other, _) = split_train_test(&ds, 0.8, 10).unwrap();
    assert_ne!(train, other);
}

#[test]
fn libsvm_text_round_trip() {
    let ds = load_libsvm(write_temp("roundtrip.libsvm", SAMPLE)).unwrap();
    let again = parse_libsvm(&ds.to_libsvm()).unwrap().into_dataset(LabelRule::Sign, Some(ds.dim())).unwrap();
    assert_eq!(ds, again);
}

#[test]
fn mnist_labels_are_binarized() {
    let raw = parse_libsvm("0 1:1\n4 2:1\n5 1:1\n9 3:1\n").unwrap();
    let ds = raw.into_dataset(LabelRule::Mnist, None).unwrap();
    assert_eq!(ds.labels(), &[-1.0, -1.0, 1.0, 1.0]);
    assert!(parse_libsvm("10 1:1\n").unwrap().into_dataset(LabelRule::Mnist, None).is_err());
}

#[test]
fn parse_errors_carry_line_numbers() {
    for (text, line) in [
        ("+1 1:1\n+1 0:2\n", 2),
        ("+1 1:1\n\n-1 3:1 2:1\n", 3),
        ("x 1:1\n", 1),
        ("+1 1:1\n+1 2:abc\n", 2),
        ("+1 1:1 2\n", 1),
    ] {
        match parse_libsvm(text) {
            Err(Error::Parse { line: got, .. }) => assert_eq!(got, line, "{text:?}"),
            other => panic!("expected parse error for {text:?}, got {other:?}"),
        }
    }
}

#[test]
fn missing_file_is_io_error() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("does-not-exist.libsvm");
    assert!(matches!(load_libsvm_raw(path), Err(Error::Io(_))));
}

#[test]
fn subsample_is_seeded() {
    let ds = SyntheticSpec { n: 50, d: 2, margin: 0.0, flip: 0.0, seed: 1 }.generate().unwrap();
    assert_eq!(ds.subsample(10, 3), ds.subsample(10, 3));
    assert_eq!(ds.subsample(10, 3).len(), 10);
    assert_eq!(ds.subsample(500, 3).len(), 50);
}
