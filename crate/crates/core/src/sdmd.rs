//! Two-basis streaming DMD baseline.
//!
//! Maintains separate orthonormal bases for the `x` and `y` column spaces
//! plus reduced accumulators, compressing each basis back to the rank cap
//! with a POD rotation whenever it grows past `r`. Compression runs
//! immediately after an expansion and before the new pair is accumulated,
//! the same interleaving the single-basis engine uses, so the two methods
//! differ only in how many bases they maintain.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::numerics::{
    append_column, ensure_finite_vector, norm, outer, pad_zero, pinv_psd, residual_direction,
    sym_eig_descending, symmetrize,
};
use crate::snapshots::SnapshotPair;

/// What happened to each basis during one update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SdmdUpdate {
    pub expanded_x: bool,
    pub expanded_y: bool,
    pub compressed_x: bool,
    pub compressed_y: bool,
}

/// Streaming state: bases `Q_X`, `Q_Y` and accumulators `G_X`, `G_Y`, `C`.
#[derive(Debug, Clone)]
pub struct SdmdState {
    basis_x: Array2<f64>,
    basis_y: Array2<f64>,
    gram_x: Array2<f64>,
    gram_y: Array2<f64>,
    cross: Array2<f64>,
    max_rank: usize,
    tol: f64,
    steps: usize,
}

impl SdmdState {
    /// Initialize from the first snapshot pair: one-column bases along
    /// `x` and `y` with the matching rank-one accumulators.
    pub fn new(pair: &SnapshotPair, max_rank: usize, tol: f64) -> Result<Self> {
        ensure_finite_vector(&pair.x.view(), "snapshot x")?;
        ensure_finite_vector(&pair.y.view(), "snapshot y")?;
        if max_rank == 0 {
            return Err(Error::InvalidConfig("max rank must be at least 1".into()));
        }
        if tol <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let nx = norm(&pair.x.view());
        let ny = norm(&pair.y.view());
        if nx == 0.0 || ny == 0.0 {
            return Err(Error::DegenerateSnapshot("zero first snapshot"));
        }

        let n = pair.dim();
        let mut basis_x = Array2::zeros((n, 1));
        basis_x.column_mut(0).assign(&(&pair.x / nx));
        let mut basis_y = Array2::zeros((n, 1));
        basis_y.column_mut(0).assign(&(&pair.y / ny));

        let xt = basis_x.t().dot(&pair.x);
        let yt = basis_y.t().dot(&pair.y);
        Ok(Self {
            gram_x: outer(&xt.view(), &xt.view()),
            gram_y: outer(&yt.view(), &yt.view()),
            cross: outer(&yt.view(), &xt.view()),
            basis_x,
            basis_y,
            max_rank,
            tol,
            steps: 1,
        })
    }

    /// Absorb one snapshot pair: Gram-Schmidt tests on both bases, POD
    /// compression of any basis that exceeds the rank cap, then rank-one
    /// accumulator updates in the post-compression coordinates.
    pub fn update(&mut self, pair: &SnapshotPair) -> Result<SdmdUpdate> {
        self.check_pair(pair)?;
        let mut outcome = SdmdUpdate::default();

        if let Some(p) = residual_direction(&self.basis_x.view(), &pair.x.view(), self.tol) {
            self.basis_x = append_column(&self.basis_x.view(), &p.view());
            self.gram_x = pad_zero(&self.gram_x.view(), 1, 1);
            self.cross = pad_zero(&self.cross.view(), 0, 1);
            outcome.expanded_x = true;
        }
        if let Some(p) = residual_direction(&self.basis_y.view(), &pair.y.view(), self.tol) {
            self.basis_y = append_column(&self.basis_y.view(), &p.view());
            self.gram_y = pad_zero(&self.gram_y.view(), 1, 1);
            self.cross = pad_zero(&self.cross.view(), 1, 0);
            outcome.expanded_y = true;
        }

        if self.basis_x.ncols() > self.max_rank {
            let (w, lam) = sym_eig_descending(&self.gram_x.view())?;
            let w_r = w.slice(ndarray::s![.., ..self.max_rank]);
            self.basis_x = self.basis_x.dot(&w_r);
            self.gram_x = Array2::from_diag(
                &lam.slice(ndarray::s![..self.max_rank]).mapv(|v| v.max(0.0)),
            );
            self.cross = self.cross.dot(&w_r);
            outcome.compressed_x = true;
        }
        if self.basis_y.ncols() > self.max_rank {
            let (w, lam) = sym_eig_descending(&self.gram_y.view())?;
            let w_r = w.slice(ndarray::s![.., ..self.max_rank]);
            self.basis_y = self.basis_y.dot(&w_r);
            self.gram_y = Array2::from_diag(
                &lam.slice(ndarray::s![..self.max_rank]).mapv(|v| v.max(0.0)),
            );
            self.cross = w_r.t().dot(&self.cross);
            outcome.compressed_y = true;
        }

        let xt = self.basis_x.t().dot(&pair.x);
        let yt = self.basis_y.t().dot(&pair.y);
        self.gram_x += &outer(&xt.view(), &xt.view());
        self.gram_y += &outer(&yt.view(), &yt.view());
        self.cross += &outer(&yt.view(), &xt.view());
        if outcome.compressed_x || outcome.compressed_y {
            self.gram_x = symmetrize(&self.gram_x);
            self.gram_y = symmetrize(&self.gram_y);
        }
        self.steps += 1;
        Ok(outcome)
    }

    /// Reduced operator `A = Q_Xᵀ Q_Y C G_X⁺`.
    pub fn operator(&self, rcond: f64) -> Result<Array2<f64>> {
        let g_pinv = pinv_psd(&self.gram_x.view(), rcond)?;
        Ok(self
            .basis_x
            .t()
            .dot(&self.basis_y)
            .dot(&self.cross)
            .dot(&g_pinv))
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
        self.basis_x.nrows()
    }

    pub fn basis_x(&self) -> ArrayView2<'_, f64> {
        self.basis_x.view()
    }

    pub fn basis_y(&self) -> ArrayView2<'_, f64> {
        self.basis_y.view()
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

    /// Number of pairs processed, counting the initializing pair.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn max_rank(&self) -> usize {
        self.max_rank
    }
}
