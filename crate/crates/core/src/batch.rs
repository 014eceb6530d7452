//! Batch-processing DMD on full data matrices, used as the reference
//! against which the streaming engines are benchmarked.

use ndarray::{s, Array2, ArrayView2};
use ndarray_linalg::{JobSvd, SVDDC};

use crate::error::{Error, Result};
use crate::numerics::ensure_finite_matrix;

/// Singular values at or below this fraction of the largest are treated
/// as numerically zero and excluded from inversion.
pub const SVD_RCOND: f64 = 1e-12;

/// Rank-truncated batch DMD fit.
#[derive(Debug, Clone)]
pub struct BatchDmdResult {
    /// Orthonormal basis `Q_X` (n x retained): leading left singular
    /// vectors of `X`.
    pub basis: Array2<f64>,
    /// Reduced operator (retained x retained) acting in basis coordinates.
    pub operator: Array2<f64>,
    /// Retained singular values of `X`; its length is the retained rank,
    /// which is below the requested rank when `X` is rank deficient.
    pub singular_values: Vec<f64>,
}

impl BatchDmdResult {
    pub fn retained_rank(&self) -> usize {
        self.singular_values.len()
    }
}

fn check_same_shape(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> Result<()> {
    ensure_finite_matrix(x, "data matrix X")?;
    ensure_finite_matrix(y, "data matrix Y")?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            context: "X and Y must have the same shape",
            expected: format!("{:?}", x.dim()),
            actual: format!("{:?}", y.dim()),
        });
    }
    Ok(())
}

/// Fit the rank-`r` projected DMD operator from data matrices `X`, `Y`.
///
/// `Q_X` holds the first `r` left singular vectors of `X` and the reduced
/// operator is evaluated through the same truncated SVD,
/// `A = Q_Xᵀ Y V_r Σ_r⁻¹`. When `X` has numerical rank below `r` the fit
/// is built on the numerical rank instead; the retained count is visible
/// in the result.
pub fn fit_batch(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>, r: usize) -> Result<BatchDmdResult> {
    check_same_shape(x, y)?;
    if x.ncols() == 0 {
        return Err(Error::InvalidConfig("need at least one snapshot pair".into()));
    }
    if r == 0 {
        return Err(Error::InvalidConfig("rank must be at least 1".into()));
    }

    let (u_opt, sigma, vt_opt) = x.to_owned().svddc(JobSvd::Some)?;
    let u = u_opt.expect("left singular vectors requested");
    let vt = vt_opt.expect("right singular vectors requested");

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    let numerical_rank = sigma.iter().filter(|&&s| s > SVD_RCOND * sigma_max).count();
    if numerical_rank == 0 {
        return Err(Error::DegenerateInput("zero data matrix"));
    }
    let retained = r.min(numerical_rank);

    let basis = u.slice(s![.., ..retained]).to_owned();
    // Y V_r Σ_r⁻¹, with Σ applied column-wise.
    let v_r = vt.slice(s![..retained, ..]).t().to_owned();
    let mut yv = y.dot(&v_r);
    for (j, mut col) in yv.columns_mut().into_iter().enumerate() {
        col.mapv_inplace(|v| v / sigma[j]);
    }
    let operator = basis.t().dot(&yv);

    Ok(BatchDmdResult {
        basis,
        operator,
        singular_values: sigma.iter().take(retained).copied().collect(),
    })
}

/// Full-space least-squares operator `A = Y X⁺`, the minimizer of
/// `|Y - A X|_F`. Intended as a small-scale test oracle.
pub fn full_operator(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_same_shape(x, y)?;
    let n = x.nrows();
    if x.ncols() == 0 {
        return Ok(Array2::zeros((n, n)));
    }

    let (u_opt, sigma, vt_opt) = x.to_owned().svddc(JobSvd::Some)?;
    let u = u_opt.expect("left singular vectors requested");
    let vt = vt_opt.expect("right singular vectors requested");

    let sigma_max = sigma.first().copied().unwrap_or(0.0);
    // X⁺ = V Σ⁺ Uᵀ with the same truncation rule as fit_batch.
    let mut v = vt.t().to_owned();
    for (j, mut col) in v.columns_mut().into_iter().enumerate() {
        let inv = if sigma[j] > SVD_RCOND * sigma_max && sigma[j] > 0.0 {
            1.0 / sigma[j]
        } else {
            0.0
        };
        col.mapv_inplace(|val| val * inv);
    }
    Ok(y.dot(&v).dot(&u.t()))
}
