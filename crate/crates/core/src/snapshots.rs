//! Snapshot-pair streams over trajectory matrices, with the convention
//! that consecutive pairs share state: the `x` of pair `i+1` is the `y`
//! of pair `i`, bit for bit.

use std::fs::File;
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::numerics::ensure_finite_matrix;

/// One streaming observation `(x_i, y_i)` with `y_i` the successor state
/// of `x_i`. `index` is the 1-based position in the stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotPair {
    pub x: Array1<f64>,
    pub y: Array1<f64>,
    pub index: usize,
}

impl SnapshotPair {
    pub fn new(x: Array1<f64>, y: Array1<f64>, index: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "snapshot pair states must have equal length",
                expected: x.len().to_string(),
                actual: y.len().to_string(),
            });
        }
        if index == 0 {
            return Err(Error::InvalidConfig("snapshot index is 1-based".into()));
        }
        Ok(Self { x, y, index })
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Single-consumer iterator of snapshot pairs over the columns of a
/// trajectory matrix (`n` state variables by `m + 1` time samples).
#[derive(Debug, Clone)]
pub struct SnapshotStream {
    trajectory: Array2<f64>,
    cursor: usize,
}

impl SnapshotStream {
    /// Build a stream from a trajectory with at least two columns; the
    /// stream yields `cols - 1` pairs `(column i-1, column i)`.
    pub fn from_trajectory(trajectory: Array2<f64>) -> Result<Self> {
        ensure_finite_matrix(&trajectory.view(), "trajectory")?;
        if trajectory.ncols() < 2 {
            return Err(Error::InvalidConfig(format!(
                "a trajectory needs at least 2 time samples to form a pair, got {}",
                trajectory.ncols()
            )));
        }
        Ok(Self {
            trajectory,
            cursor: 0,
        })
    }

    /// Total number of pairs the stream yields (independent of cursor).
    pub fn num_pairs(&self) -> usize {
        self.trajectory.ncols() - 1
    }

    /// State dimension `n`.
    pub fn dim(&self) -> usize {
        self.trajectory.nrows()
    }

    /// Full data matrices `(X, Y)` with `X` stacking every `x_i` and `Y`
    /// every `y_i` as columns; `Y[:, :-1]` equals `X[:, 1:]` bit-exactly.
    pub fn batch_matrices(&self) -> (Array2<f64>, Array2<f64>) {
        let m = self.num_pairs();
        let x = self.trajectory.slice(s![.., ..m]).to_owned();
        let y = self.trajectory.slice(s![.., 1..]).to_owned();
        (x, y)
    }
}

impl Iterator for SnapshotStream {
    type Item = SnapshotPair;

    fn next(&mut self) -> Option<SnapshotPair> {
        if self.cursor >= self.num_pairs() {
            return None;
        }
        let x = self.trajectory.column(self.cursor).to_owned();
        let y = self.trajectory.column(self.cursor + 1).to_owned();
        self.cursor += 1;
        Some(SnapshotPair {
            x,
            y,
            index: self.cursor,
        })
    }
}

/// Read a trajectory from CSV: rows are state variables, columns are time
/// samples, no header.
pub fn read_trajectory_csv(path: &Path) -> Result<Array2<f64>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(file);

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row: Vec<f64> = record
            .iter()
            .map(|field| {
                field.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "non-numeric CSV field {:?} in {}",
                        field,
                        path.display()
                    ))
                })
            })
            .collect::<Result<_>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::InvalidConfig(format!(
                    "ragged CSV in {}: row {} has {} fields, expected {}",
                    path.display(),
                    rows.len() + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::DegenerateInput("empty trajectory CSV"));
    }

    let (n, samples) = (rows.len(), rows[0].len());
    let mut t = Array2::zeros((n, samples));
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t[(i, j)] = v;
        }
    }
    ensure_finite_matrix(&t.view(), "trajectory CSV")?;
    Ok(t)
}

/// Write a trajectory in the CSV layout accepted by [`read_trajectory_csv`],
/// with full round-trip precision.
pub fn write_trajectory_csv(path: &Path, trajectory: &ArrayView2<'_, f64>) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = csv::Writer::from_writer(file);
    for row in trajectory.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writer.write_record(&fields).map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}
