//! Transition matrices: ingestion, validation, threshold grids and perturbations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum allowed deviation of a row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("expected {expected} state labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("duplicate state label {0:?}")]
    DuplicateLabel(String),
    #[error("entry ({row}, {col}) = {value} is negative")]
    Negative { row: usize, col: usize, value: f64 },
    #[error("entry ({row}, {col}) = {value} is outside [0, 1]")]
    OutOfRange { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to {sum}, expected 1 within {ROW_SUM_TOLERANCE:e}")]
    RowSum { row: usize, sum: f64 },
    #[error("dimension mismatch: {left} vs {right} states")]
    DimensionMismatch { left: usize, right: usize },
    #[error("state labels differ between matrices")]
    LabelMismatch,
    #[error(
        "perturbation target ({row}, {col}) is not an off-diagonal entry of a {n}-state matrix"
    )]
    InvalidTarget { row: usize, col: usize, n: usize },
    #[error("perturbed entry ({row}, {col}) would be {value}, outside [0, 1]")]
    PerturbationRange { row: usize, col: usize, value: f64 },
    #[error("diagonal compensation impossible: entry ({row}, {row}) would be {value}")]
    Compensation { row: usize, value: f64 },
}

/// Input encodings accepted by [`parse_matrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// JSON if the first non-blank character opens an object, CSV otherwise.
    pub fn sniff(text: &str) -> Format {
        match text.trim_start().chars().next() {
            Some('{') => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// A validated row-stochastic matrix with state labels.
///
/// Entries are stored row-major; all indices in this API are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    states: Vec<String>,
    entries: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    states: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
}

/// Labels `N1`, …, `Nn`.
pub fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("N{i}")).collect()
}

impl TransitionMatrix {
    /// Builds and validates a matrix from rows, labelling states `N1…Nn`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        Self::new(default_labels(n), rows)
    }

    pub fn new(states: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MatrixError::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        if states.len() != n {
            return Err(MatrixError::LabelCount {
                expected: n,
                got: states.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for s in &states {
            if !seen.insert(s.as_str()) {
                return Err(MatrixError::DuplicateLabel(s.clone()));
            }
        }
        for (row, r) in rows.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if value < 0.0 {
                    return Err(MatrixError::Negative { row, col, value });
                }
                if !(0.0..=1.0).contains(&value) {
                    return Err(MatrixError::OutOfRange { row, col, value });
                }
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(MatrixError::RowSum { row, sum });
            }
        }
        Ok(Self {
            states,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// The `n × n` identity chain: every state absorbing.
    pub fn identity(n: usize) -> Result<Self, MatrixError> {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    /// Transition probability from state `i` to state `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.row(i).to_vec()).collect()
    }

    /// Off-diagonal entries as `(i, j, p_ij)` in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            (0..n)
                .filter(move |&j| j != i)
                .map(move |j| (i, j, self.get(i, j)))
        })
    }

    pub fn threshold_grid(&self) -> ThresholdGrid {
        threshold_grid(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("matrix serialization cannot fail")
    }

    fn to_doc(&self) -> MatrixDoc {
        MatrixDoc {
            states: Some(self.states.clone()),
            matrix: self.rows(),
        }
    }
}

impl Serialize for TransitionMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

/// Parses a matrix from CSV or JSON text and validates it.
///
/// CSV: one row per line, comma separated; an optional leading line starting
/// with `#` holds the state labels. JSON: `{"states": [...], "matrix": [[...]]}`
/// with `states` optional.
pub fn parse_matrix(text: &str, format: Format) -> Result<TransitionMatrix, MatrixError> {
    match format {
        Format::Csv => parse_csv(text),
        Format::Json => parse_json(text),
    }
}

fn parse_json(text: &str) -> Result<TransitionMatrix, MatrixError> {
    let doc: MatrixDoc = serde_json::from_str(text).map_err(|e| MatrixError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let states = doc
        .states
        .unwrap_or_else(|| default_labels(doc.matrix.len()));
    TransitionMatrix::new(states, doc.matrix)
}

fn parse_csv(text: &str) -> Result<TransitionMatrix, MatrixError> {
    let mut labels: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            if labels.is_some() || !rows.is_empty() {
                return Err(MatrixError::Syntax {
                    line: lineno + 1,
                    column: 1,
                    message: "label header must precede all rows".into(),
                });
            }
            labels = Some(header.split(',').map(|s| s.trim().to_string()).collect());
            continue;
        }
        let mut row = Vec::new();
        let mut column = 1;
        for field in raw.split(',') {
            let token = field.trim();
            let value: f64 = token.parse().map_err(|_| MatrixError::Syntax {
                line: lineno + 1,
                column: column + (field.len() - field.trim_start().len()),
                message: format!("invalid number {token:?}"),
            })?;
            row.push(value);
            column += field.chars().count() + 1;
        }
        rows.push(row);
    }
    let n = rows.len();
    TransitionMatrix::new(labels.unwrap_or_else(|| default_labels(n)), rows)
}

/// The filtration parameter values: `0` followed by every distinct positive
/// off-diagonal entry, ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdGrid(Vec<f64>);

impl ThresholdGrid {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn threshold_grid(matrix: &TransitionMatrix) -> ThresholdGrid {
    let mut values: Vec<f64> = matrix
        .off_diagonal()
        .map(|(_, _, p)| p)
        .filter(|&p| p > 0.0)
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.insert(0, 0.0);
    ThresholdGrid(values)
}

/// Shift of one off-diagonal entry, optionally balanced on the diagonal of
/// the same row so the result stays stochastic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
    pub compensate: bool,
}

impl PerturbationSpec {
    pub fn compensated(row: usize, col: usize, delta: f64) -> Self {
        Self {
            row,
            col,
            delta,
            compensate: true,
        }
    }
}

pub fn perturb(
    matrix: &TransitionMatrix,
    spec: &PerturbationSpec,
) -> Result<TransitionMatrix, MatrixError> {
    let n = matrix.n();
    let PerturbationSpec {
        row,
        col,
        delta,
        compensate,
    } = *spec;
    if row >= n || col >= n || row == col {
        return Err(MatrixError::InvalidTarget { row, col, n });
    }
    let mut rows = matrix.rows();
    if compensate {
        let diag = rows[row][row] - delta;
        if !(0.0..=1.0).contains(&diag) {
            return Err(MatrixError::Compensation { row, value: diag });
        }
        rows[row][row] = diag;
    }
    let value = rows[row][col] + delta;
    if !(0.0..=1.0).contains(&value) {
        return Err(MatrixError::PerturbationRange { row, col, value });
    }
    rows[row][col] = value;
    TransitionMatrix::new(matrix.states.clone(), rows)
}

/// Entrywise comparison of two matrices over the same states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatrixDistance {
    /// Largest absolute entry difference.
    pub delta_inf: f64,
    /// Number of differing off-diagonal entries.
    pub l_offdiag: usize,
    /// Number of differing entries, diagonal included.
    pub l_all: usize,
}

pub fn matrix_distance(
    a: &TransitionMatrix,
    b: &TransitionMatrix,
) -> Result<MatrixDistance, MatrixError> {
    if a.n() != b.n() {
        return Err(MatrixError::DimensionMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    if a.states != b.states {
        return Err(MatrixError::LabelMismatch);
    }
    let n = a.n();
    let mut out = MatrixDistance {
        delta_inf: 0.0,
        l_offdiag: 0,
        l_all: 0,
    };
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (a.get(i, j), b.get(i, j));
            if x != y {
                out.delta_inf = out.delta_inf.max((x - y).abs());
                out.l_all += 1;
                if i != j {
                    out.l_offdiag += 1;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example() -> TransitionMatrix {
        TransitionMatrix::from_rows(vec![
            vec![0.5, 0.17, 0.33],
            vec![0.17, 0.6, 0.23],
            vec![0.15, 0.15, 0.7],
        ])
        .unwrap()
    }

    #[test]
    fn parses_example_json() {
        let text = r#"{"states": ["N1","N2","N3"],
            "matrix": [[0.5,0.17,0.33],[0.17,0.6,0.23],[0.15,0.15,0.7]]}"#;
        let m = parse_matrix(text, Format::Json).unwrap();
        assert_eq!(m.states(), ["N1", "N2", "N3"]);
        assert_eq!(m, example());
        assert_eq!(m.get(2, 0), 0.15);
    }

    #[test]
    fn parses_single_state_csv() {
        let m = parse_matrix("1", Format::Csv).unwrap();
        assert_eq!(m.n(), 1);
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.states(), ["N1"]);
    }

    #[test]
    fn csv_header_labels() {
        let m = parse_matrix("# a, b\n0.5,0.5\n0,1\n", Format::Csv).unwrap();
        assert_eq!(m.states(), ["a", "b"]);
    }

    #[test]
    fn rejects_bad_row_sum() {
        let err = parse_matrix("0.5,0.6\n0.5,0.5", Format::Csv).unwrap_err();
        assert!(matches!(err, MatrixError::RowSum { row: 0, .. }));
    }

    #[test]
    fn rejects_negative_and_non_square() {
        let err = parse_matrix("0.5,0.5\n-0.5,1.5", Format::Csv).unwrap_err();
        assert!(matches!(err, MatrixError::Negative { row: 1, col: 0, .. }));
        let err = parse_matrix("1,0\n1", Format::Csv).unwrap_err();
        assert!(matches!(err, MatrixError::NotSquare { row: 1, .. }));
    }

    #[test]
    fn syntax_errors_report_position() {
        let err = parse_matrix("1,0\n0, x", Format::Csv).unwrap_err();
        assert_eq!(
            err,
            MatrixError::Syntax {
                line: 2,
                column: 4,
                message: "invalid number \"x\"".into()
            }
        );
        let err = parse_matrix("{\"matrix\": [[1]", Format::Json).unwrap_err();
        assert!(matches!(err, MatrixError::Syntax { line: 1, .. }));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let err = TransitionMatrix::new(
            vec!["a".into(), "a".into()],
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        )
        .unwrap_err();
        assert_eq!(err, MatrixError::DuplicateLabel("a".into()));
    }

    #[test]
    fn grid_of_example() {
        assert_eq!(
            example().threshold_grid().values(),
            [0.0, 0.15, 0.17, 0.23, 0.33]
        );
    }

    #[test]
    fn grid_of_identity_and_duplicates() {
        assert_eq!(
            TransitionMatrix::identity(4)
                .unwrap()
                .threshold_grid()
                .values(),
            [0.0]
        );
        let m = TransitionMatrix::from_rows(vec![vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        assert_eq!(m.threshold_grid().values(), [0.0, 0.3]);
    }

    #[test]
    fn compensated_perturbation() {
        let p = example();
        let q = perturb(&p, &PerturbationSpec::compensated(0, 1, 0.01)).unwrap();
        assert!((q.get(0, 1) - 0.18).abs() < 1e-15);
        assert!((q.get(0, 0) - 0.49).abs() < 1e-15);
        for i in 0..3 {
            assert!((q.row(i).iter().sum::<f64>() - 1.0).abs() < ROW_SUM_TOLERANCE);
        }
        let d = matrix_distance(&p, &q).unwrap();
        assert!((d.delta_inf - 0.01).abs() < 1e-15);
        assert_eq!((d.l_offdiag, d.l_all), (1, 2));
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let p = example();
        assert_eq!(
            perturb(&p, &PerturbationSpec::compensated(1, 2, 0.0)).unwrap(),
            p
        );
    }

    #[test]
    fn infeasible_compensation() {
        let err = perturb(&example(), &PerturbationSpec::compensated(2, 0, 0.9)).unwrap_err();
        assert!(matches!(err, MatrixError::Compensation { row: 2, .. }));
        let err = perturb(&example(), &PerturbationSpec::compensated(2, 0, -0.2)).unwrap_err();
        assert!(matches!(err, MatrixError::PerturbationRange { .. }));
        let err = perturb(&example(), &PerturbationSpec::compensated(1, 1, 0.1)).unwrap_err();
        assert!(matches!(err, MatrixError::InvalidTarget { .. }));
    }

    #[test]
    fn uncompensated_perturbation_breaks_stochasticity() {
        let err = perturb(
            &example(),
            &PerturbationSpec {
                row: 0,
                col: 1,
                delta: 0.01,
                compensate: false,
            },
        )
        .unwrap_err();
        assert!(matches!(err, MatrixError::RowSum { row: 0, .. }));
    }

    #[test]
    fn distance_of_identical_and_multi() {
        let p = example();
        let d = matrix_distance(&p, &p).unwrap();
        assert_eq!((d.delta_inf, d.l_offdiag, d.l_all), (0.0, 0, 0));

        // three compensated shifts of at most 0.02, one per row
        let mut q = p.clone();
        for (r, c, delta) in [(0, 2, 0.02), (1, 0, -0.015), (2, 1, 0.01)] {
            q = perturb(&q, &PerturbationSpec::compensated(r, c, delta)).unwrap();
        }
        let d = matrix_distance(&p, &q).unwrap();
        assert_eq!(d.l_offdiag, 3);
        assert_eq!(d.l_all, 6);
        assert!((d.delta_inf - 0.02).abs() < 1e-15);
    }

    #[test]
    fn distance_dimension_mismatch() {
        let err = matrix_distance(&example(), &TransitionMatrix::identity(2).unwrap()).unwrap_err();
        assert!(matches!(
            err,
            MatrixError::DimensionMismatch { left: 3, right: 2 }
        ));
    }

    #[test]
    fn format_sniffing() {
        assert_eq!(Format::sniff("  {\"matrix\": [[1]]}"), Format::Json);
        assert_eq!(Format::sniff("1"), Format::Csv);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn stochastic(max_n: usize) -> impl Strategy<Value = TransitionMatrix> {
            (1..=max_n).prop_flat_map(|n| {
                proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, n), n).prop_map(
                    |raw| {
                        let rows = raw
                            .into_iter()
                            .enumerate()
                            .map(|(i, mut r)| {
                                r[i] += 0.1;
                                let s: f64 = r.iter().sum();
                                r.iter().map(|x| x / s).collect()
                            })
                            .collect();
                        TransitionMatrix::from_rows(rows).unwrap()
                    },
                )
            })
        }

        proptest! {
            #[test]
            fn json_round_trip_is_bit_exact(m in stochastic(6)) {
                let back = parse_matrix(&m.to_json(), Format::Json).unwrap();
                for (a, b) in m.entries.iter().zip(&back.entries) {
                    prop_assert_eq!(a.to_bits(), b.to_bits());
                }
                prop_assert_eq!(back, m);
            }

            #[test]
            fn grid_is_invariant_under_relabelling(m in stochastic(6), seed in any::<u64>()) {
                use rand::seq::SliceRandom;
                use rand::SeedableRng;
                let n = m.n();
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
                let rows = (0..n)
                    .map(|i| (0..n).map(|j| m.get(perm[i], perm[j])).collect())
                    .collect();
                let relabelled = TransitionMatrix::from_rows(rows).unwrap();
                prop_assert_eq!(relabelled.threshold_grid(), m.threshold_grid());
                let grid = m.threshold_grid();
                prop_assert!(grid.values().windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(grid.values()[0], 0.0);
            }
        }
    }
}
