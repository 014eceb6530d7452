//! Single-basis streaming DMD.
//!
//! Consecutive snapshot pairs overlap (`x_i = y_{i-1}`), so one evolving
//! orthonormal basis spans both the `x` and `y` column spaces. Each update
//! runs at most one Gram-Schmidt test and one POD compression, and reuses
//! the previous step's projected `y` as the current projected `x` whenever
//! the basis did not change, which is where the constant-factor savings
//! over the two-basis baseline come from.

use ndarray::{s, Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    append_column, ensure_finite_vector, norm, orthonormal_columns, outer, pad_zero, pinv_psd,
    residual_direction, sym_eig_descending, symmetrize,
};
use crate::snapshots::SnapshotPair;

/// What happened to the basis during one update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EsdmdUpdate {
    /// The snapshot introduced a direction outside the current span.
    pub expanded: bool,
    /// The expansion pushed the basis past the rank cap and a POD
    /// rotation brought it back to `r` columns.
    pub compressed: bool,
}

/// Streaming state: the joint basis `Q` plus reduced accumulators
/// `G_X`, `G_Y`, `C`, the cached projection of the previous `y`, and the
/// `new_direction` flag (always false between updates).
#[derive(Debug, Clone)]
pub struct EsdmdState {
    basis: Array2<f64>,
    gram_x: Array2<f64>,
    gram_y: Array2<f64>,
    cross: Array2<f64>,
    y_prev: Array1<f64>,
    new_direction: bool,
    max_rank: usize,
    tol: f64,
    steps: usize,
}

impl EsdmdState {
    /// Initialize from the first snapshot pair with an orthonormal basis
    /// for the joint span of `x` and `y` (one column when they are
    /// collinear, two otherwise).
    pub fn new(pair: &SnapshotPair, max_rank: usize, tol: f64) -> Result<Self> {
        ensure_finite_vector(&pair.x.view(), "snapshot x")?;
        ensure_finite_vector(&pair.y.view(), "snapshot y")?;
        if max_rank < 2 {
            return Err(Error::InvalidConfig(format!(
                "max rank must be at least 2, got {max_rank}"
            )));
        }
        if tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        if norm(&pair.x.view()) == 0.0 || norm(&pair.y.view()) == 0.0 {
            return Err(Error::DegenerateSnapshot("zero first snapshot"));
        }

        let joint = ndarray::stack![ndarray::Axis(1), pair.x, pair.y];
        let basis = orthonormal_columns(&joint.view(), tol)?;
        let xt = basis.t().dot(&pair.x);
        let yt = basis.t().dot(&pair.y);
        Ok(Self {
            gram_x: outer(&xt.view(), &xt.view()),
            gram_y: outer(&yt.view(), &yt.view()),
            cross: outer(&yt.view(), &xt.view()),
            y_prev: yt,
            new_direction: false,
            basis,
            max_rank,
            tol,
            steps: 1,
        })
    }

    /// Absorb one snapshot pair.
    ///
    /// In order: residual test of `y` against the basis; on expansion,
    /// append the residual direction and zero-pad the accumulators; if the
    /// basis now exceeds the rank cap, rotate onto the top-`r`
    /// eigenvectors of the padded `G_Y`; project and accumulate, reusing
    /// the cached projection of the previous `y` for `x` unless the basis
    /// changed this step.
    pub fn update(&mut self, pair: &SnapshotPair) -> Result<EsdmdUpdate> {
        self.check_pair(pair)?;
        debug_assert!(!self.new_direction, "flag must be clear between updates");
        let mut outcome = EsdmdUpdate::default();

        if let Some(p) = residual_direction(&self.basis.view(), &pair.y.view(), self.tol) {
            self.basis = append_column(&self.basis.view(), &p.view());
            self.gram_x = pad_zero(&self.gram_x.view(), 1, 1);
            self.gram_y = pad_zero(&self.gram_y.view(), 1, 1);
            self.cross = pad_zero(&self.cross.view(), 1, 1);
            self.new_direction = true;
            outcome.expanded = true;

            if self.basis.ncols() > self.max_rank {
                let (w, lam) = sym_eig_descending(&self.gram_y.view())?;
                let w_r = w.slice(s![.., ..self.max_rank]);
                self.basis = self.basis.dot(&w_r);
                self.gram_x = symmetrize(&w_r.t().dot(&self.gram_x).dot(&w_r));
                self.cross = w_r.t().dot(&self.cross).dot(&w_r);
                self.gram_y = Array2::from_diag(
                    &lam.slice(s![..self.max_rank]).mapv(|v| v.max(0.0)),
                );
                outcome.compressed = true;
            }
        }

        let yt = self.basis.t().dot(&pair.y);
        // The cached projection lives in the pre-update coordinates, so it
        // is only reusable when the basis did not change this step.
        let xt = if self.new_direction {
            self.basis.t().dot(&pair.x)
        } else {
            std::mem::take(&mut self.y_prev)
        };
        self.gram_x += &outer(&xt.view(), &xt.view());
        self.gram_y += &outer(&yt.view(), &yt.view());
        self.cross += &outer(&yt.view(), &xt.view());
        self.y_prev = yt;
        self.new_direction = false;
        self.steps += 1;
        Ok(outcome)
    }

    /// Reduced operator `A = C G_X⁺` in basis coordinates.
    pub fn operator(&self, rcond: f64) -> Result<Array2<f64>> {
        Ok(self.cross.dot(&pinv_psd(&self.gram_x.view(), rcond)?))
    }

    fn check_pair(&self, pair: &SnapshotPair) -> Result<()> {
        if pair.dim() != self.state_dim() {
            return Err(Error::DimensionMismatch {
                context: "snapshot dimension differs from state",
                expected: self.state_dim().to_string(),
                actual: pair.dim().to_string(),
            });
        }
        ensure_finite_vector(&pair.x.view(), "snapshot x")?;
        ensure_finite_vector(&pair.y.view(), "snapshot y")?;
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> ArrayView2<'_, f64> {
        self.basis.view()
    }

    pub fn gram_x(&self) -> ArrayView2<'_, f64> {
        self.gram_x.view()
    }

    pub fn gram_y(&self) -> ArrayView2<'_, f64> {
        self.gram_y.view()
    }

    pub fn cross(&self) -> ArrayView2<'_, f64> {
        self.cross.view()
    }

    /// Cached projection of the previous `y` onto the current basis.
    pub fn y_prev_projected(&self) -> &Array1<f64> {
        &self.y_prev
    }

    /// Number of pairs processed, counting the initializing pair.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn max_rank(&self) -> usize {
        self.max_rank
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Serialize the state to a self-describing JSON checkpoint.
    pub fn checkpoint_json(&self) -> Result<String> {
        let blob = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            max_rank: self.max_rank,
            tolerance: self.tol,
            steps: self.steps,
            basis: MatrixBlob::from_array(&self.basis),
            gram_x: MatrixBlob::from_array(&self.gram_x),
            gram_y: MatrixBlob::from_array(&self.gram_y),
            cross: MatrixBlob::from_array(&self.cross),
            y_prev_projected: self.y_prev.to_vec(),
        };
        serde_json::to_string_pretty(&blob)
            .map_err(|e| Error::InvalidCheckpoint(format!("serialization failed: {e}")))
    }

    /// Restore a state previously produced by [`checkpoint_json`].
    ///
    /// [`checkpoint_json`]: EsdmdState::checkpoint_json
    pub fn from_checkpoint_json(json: &str) -> Result<Self> {
        let blob: Checkpoint = serde_json::from_str(json)
            .map_err(|e| Error::InvalidCheckpoint(format!("parse failure: {e}")))?;
        if blob.format != CHECKPOINT_FORMAT {
            return Err(Error::InvalidCheckpoint(format!(
                "unknown format tag {:?}",
                blob.format
            )));
        }
        if blob.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidCheckpoint(format!(
                "unsupported version {}",
                blob.version
            )));
        }
        let basis = blob.basis.to_array()?;
        let gram_x = blob.gram_x.to_array()?;
        let gram_y = blob.gram_y.to_array()?;
        let cross = blob.cross.to_array()?;
        let q = basis.ncols();
        for (name, m) in [("gram_x", &gram_x), ("gram_y", &gram_y), ("cross", &cross)] {
            if m.dim() != (q, q) {
                return Err(Error::InvalidCheckpoint(format!(
                    "{name} is {:?}, expected {q}x{q}",
                    m.dim()
                )));
            }
        }
        if blob.y_prev_projected.len() != q {
            return Err(Error::InvalidCheckpoint(format!(
                "cached projection has length {}, expected {q}",
                blob.y_prev_projected.len()
            )));
        }
        if q > blob.max_rank || blob.steps == 0 || !(blob.tolerance > 0.0) {
            return Err(Error::InvalidCheckpoint("inconsistent header fields".into()));
        }
        let y_prev = Array1::from_vec(blob.y_prev_projected);
        ensure_finite_vector(&y_prev.view(), "checkpoint cached projection")?;
        Ok(Self {
            basis,
            gram_x,
            gram_y,
            cross,
            y_prev,
            new_direction: false,
            max_rank: blob.max_rank,
            tol: blob.tolerance,
            steps: blob.steps,
        })
    }
}

const CHECKPOINT_FORMAT: &str = "esdmd-state";
const CHECKPOINT_VERSION: u32 = 1;

/// Serialized state. The cached projection rides along with the spec'd
/// matrices so a restored state can keep reusing it.
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    max_rank: usize,
    tolerance: f64,
    steps: usize,
    basis: MatrixBlob,
    gram_x: MatrixBlob,
    gram_y: MatrixBlob,
    cross: MatrixBlob,
    y_prev_projected: Vec<f64>,
}

/// Column-major matrix payload with an explicit shape header.
#[derive(Serialize, Deserialize)]
struct MatrixBlob {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatrixBlob {
    fn from_array(m: &Array2<f64>) -> Self {
        let (rows, cols) = m.dim();
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            data.extend(m.column(j).iter());
        }
        Self { rows, cols, data }
    }

    fn to_array(&self) -> Result<Array2<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::InvalidCheckpoint(format!(
                "payload has {} entries, shape header says {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if !self.data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidCheckpoint("non-finite payload entry".into()));
        }
        Ok(Array2::from_shape_fn((self.rows, self.cols), |(i, j)| {
            self.data[j * self.rows + i]
        }))
    }
}
