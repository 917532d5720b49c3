mod common;

use common::{rng, sphere_points};
use otood_core::io::{
    decode_features, encode_features, parse_features_csv, parse_labels, parse_scores, read_features,
    read_labels, read_scores, write_features, write_labels, write_score_rows, write_scores, ScoreRow,
    MAGIC, SCORES_HEADER,
};
use otood_core::scoring::PlanDiagnostics;
use otood_core::{FeatureMatrix, Label, OtError, ScoredBatch};

fn binary(n: u32, d: u32, payload: &[f32]) -> Vec<u8> {
    let mut b = MAGIC.to_vec();
    for w in [1, n, d] {
        b.extend_from_slice(&w.to_le_bytes());
    }
    for x in payload {
        b.extend_from_slice(&x.to_le_bytes());
    }
    b
}

fn batch(scores: Vec<f64>, converged: bool) -> ScoredBatch {
    ScoredBatch {
        scores,
        lambda: 0.1,
        n_train: 10,
        plan_diag: PlanDiagnostics {
            iterations: 5,
            marginal_violation: 0.0,
            converged,
            log_domain: false,
        },
    }
}

#[test]
fn identity_rows_from_binary() {
    let m = decode_features(&binary(2, 2, &[1.0, 0.0, 0.0, 1.0]), true).unwrap();
    assert_eq!(m.as_slice(), &[1.0, 0.0, 0.0, 1.0]);
    assert_eq!((m.n_rows(), m.dim()), (2, 2));
}

#[test]
fn csv_row_is_normalized() {
    let m = parse_features_csv("3,4\n", true).unwrap();
    assert!((m.row(0)[0] - 0.6).abs() < 1e-15 && (m.row(0)[1] - 0.8).abs() < 1e-15);
    // without normalization the norm is checked instead
    assert!(parse_features_csv("3,4\n", false).is_err());
}

#[test]
fn malformed_binary_is_format_error() {
    let full = binary(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    for bytes in [&full[..full.len() - 1], &full[..10], &full[..0]] {
        assert!(matches!(decode_features(bytes, true), Err(OtError::Format(_))));
    }
    let mut magic = full.clone();
    magic[0] = b'X';
    assert!(matches!(decode_features(&magic, true), Err(OtError::Format(_))));
    let mut version = full.clone();
    version[4] = 2;
    assert!(matches!(decode_features(&version, true), Err(OtError::Format(_))));
}

#[test]
fn bad_values_are_data_errors() {
    let nan = binary(1, 2, &[f32::NAN, 1.0]);
    assert!(matches!(decode_features(&nan, true), Err(OtError::Data(_))));
    let inf = binary(1, 2, &[f32::INFINITY, 1.0]);
    assert!(matches!(decode_features(&inf, true), Err(OtError::Data(_))));
    match parse_features_csv("1,0\n0,0\n", true) {
        Err(OtError::Data(msg)) => assert!(msg.contains("row 1"), "{msg}"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_features_csv("1,x\n", true), Err(OtError::Format(_))));
    assert!(matches!(parse_features_csv("1,0\n1\n", true), Err(OtError::Format(_))));
}

#[test]
fn binary_and_csv_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let m = sphere_points(&mut rng(30), 25, 7);
    let (bin, csv) = (dir.path().join("f.feat"), dir.path().join("f.csv"));
    write_features(&bin, &m).unwrap();
    write_features(&csv, &m).unwrap();
    let a = read_features(&bin, false).unwrap();
    let b = read_features(&csv, false).unwrap();
    assert_eq!((a.n_rows(), a.dim()), (b.n_rows(), b.dim()));
    for ((x, y), z) in a.as_slice().iter().zip(b.as_slice()).zip(m.as_slice()) {
        assert!((x - y).abs() < 1e-7 && (x - z).abs() < 1e-7);
    }
    // unit norms survive the f32 round trip without renormalizing
    for row in a.rows() {
        let norm: f64 = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-4);
    }
}

#[test]
fn encode_layout_is_exact() {
    let m = FeatureMatrix::from_rows(&[[0.6, 0.8]]).unwrap();
    let bytes = encode_features(&m).unwrap();
    assert_eq!(bytes, binary(1, 2, &[0.6, 0.8]));
}

#[test]
fn missing_file_names_the_path() {
    let err = read_features("/nonexistent/features.feat", true).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/features.feat"));
}

#[test]
fn score_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scores.csv");
    let scores = vec![0.1, 1.7, 4.123_456_789, 0.000_000_4];
    write_scores(&path, &batch(scores.clone(), true)).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("index,score,converged\n0,0.100000,true\n1,1.700000,true\n"));
    let back = read_scores(&path).unwrap();
    for (row, s) in back.iter().zip(&scores) {
        assert!((row.score - s).abs() < 1e-6);
        assert!(row.converged);
    }
    assert_eq!(back.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
}

#[test]
fn empty_batch_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    write_scores(&path, &batch(vec![], true)).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), format!("{SCORES_HEADER}\n"));
    assert!(read_scores(&path).unwrap().is_empty());
}

#[test]
fn score_rows_keep_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rows.csv");
    let rows = vec![
        ScoreRow { index: 0, score: 2.5, converged: false },
        ScoreRow { index: 1, score: 0.25, converged: true },
    ];
    write_score_rows(&path, &rows).unwrap();
    assert_eq!(read_scores(&path).unwrap(), rows);
    assert!(parse_scores("bad header\n").is_err());
    assert!(parse_scores("index,score,converged\n0,1.0\n").is_err());
}

#[test]
fn labels_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("labels.txt");
    let labels = vec![Label::Id, Label::Ood, Label::Ood, Label::Id];
    write_labels(&path, &labels).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "0\n1\n1\n0\n");
    assert_eq!(read_labels(&path).unwrap(), labels);
    assert!(matches!(parse_labels("0\n2\n"), Err(OtError::Format(_))));
}
