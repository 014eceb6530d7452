//! Dense linear-algebra primitives with fixed ordering and tolerance
//! conventions, shared by every decomposition engine in this crate.
//!
//! All eigen-style outputs are deterministic: eigenvalues are sorted
//! descending (by value for symmetric problems, by modulus for general
//! ones) and eigenvector signs/phases are pinned, so downstream results
//! are reproducible bit-for-bit across runs.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{Eig, Eigh, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative Frobenius tolerance accepted by [`sym_eig_descending`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Relative magnitude below which negative eigenvalues of a nominally PSD
/// matrix are treated as round-off and clamped to zero.
pub const PSD_CLAMP_TOL: f64 = 1e-10;

/// Eigenvalues and matching eigenvectors of a real square matrix.
///
/// Columns of `vectors` have unit 2-norm and align with `values`.
/// Pairs are sorted by descending modulus, ties broken by descending
/// imaginary part, then descending real part.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<Complex64>,
    pub vectors: Array2<Complex64>,
}

pub(crate) fn ensure_finite_matrix(m: &ArrayView2<'_, f64>, context: &'static str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

pub(crate) fn ensure_finite_vector(v: &ArrayView1<'_, f64>, context: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}

/// Frobenius norm.
pub fn frobenius(m: &ArrayView2<'_, f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn norm(v: &ArrayView1<'_, f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Outer product `a bᵀ`.
pub(crate) fn outer(a: &ArrayView1<'_, f64>, b: &ArrayView1<'_, f64>) -> Array2<f64> {
    let mut out = Array2::zeros((a.len(), b.len()));
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[(i, j)] = ai * bj;
        }
    }
    out
}

/// Orthonormal basis for the column space of `m` via Gram-Schmidt with
/// reorthogonalization.
///
/// A column is dropped when its residual after projection onto the basis
/// built so far is at most `tol` times the column's original norm, so the
/// returned basis has exactly the numerical rank of `m` columns.
pub fn orthonormal_columns(m: &ArrayView2<'_, f64>, tol: f64) -> Result<Array2<f64>> {
    ensure_finite_matrix(m, "orthonormal_columns input")?;
    if m.ncols() == 0 {
        return Err(Error::InvalidConfig(
            "orthonormal_columns requires at least one column".into(),
        ));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "orthonormal_columns tolerance must be positive, got {tol}"
        )));
    }

    let n = m.nrows();
    let mut basis: Vec<Array1<f64>> = Vec::new();
    for j in 0..m.ncols() {
        let column = m.column(j);
        let original_norm = norm(&column);
        let mut v = column.to_owned();
        // Second projection pass keeps the new direction orthogonal even
        // when the residual is many orders below the column norm.
        for _ in 0..2 {
            for q in &basis {
                let coeff = q.dot(&v);
                v.scaled_add(-coeff, q);
            }
        }
        let residual = norm(&v.view());
        if residual > tol * original_norm {
            basis.push(v / residual);
        }
    }

    if basis.is_empty() {
        return Err(Error::DegenerateInput("all columns are zero"));
    }

    let mut q = Array2::zeros((n, basis.len()));
    for (j, col) in basis.iter().enumerate() {
        q.column_mut(j).assign(col);
    }
    Ok(q)
}

/// Eigendecomposition `G = W diag(lam) Wᵀ` of a symmetric matrix with
/// eigenvalues sorted descending.
///
/// Sign convention: in each eigenvector the entry of largest magnitude is
/// made positive (first such entry on ties), which pins the otherwise
/// arbitrary column signs.
pub fn sym_eig_descending(g: &ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array1<f64>)> {
    ensure_finite_matrix(g, "sym_eig_descending input")?;
    if g.nrows() != g.ncols() {
        return Err(Error::DimensionMismatch {
            context: "sym_eig_descending requires a square matrix",
            expected: format!("{0}x{0}", g.nrows()),
            actual: format!("{}x{}", g.nrows(), g.ncols()),
        });
    }
    let scale = frobenius(g);
    let asymmetry = frobenius(&(g - &g.t()).view());
    if scale > 0.0 && asymmetry > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric {
            asymmetry: asymmetry / scale,
            tolerance: SYMMETRY_TOL,
        });
    }

    let (lam_asc, w_asc) = g.to_owned().eigh(UPLO::Lower)?;

    let k = lam_asc.len();
    let mut lam = Array1::zeros(k);
    let mut w = Array2::zeros((k, k));
    for j in 0..k {
        let src = k - 1 - j;
        lam[j] = lam_asc[src];
        w.column_mut(j).assign(&w_asc.column(src));
    }
    for mut col in w.columns_mut() {
        fix_sign(&mut col.view_mut());
    }
    Ok((w, lam))
}

fn fix_sign(col: &mut ndarray::ArrayViewMut1<'_, f64>) {
    let mut idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in col.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            idx = i;
        }
    }
    if col[idx] < 0.0 {
        col.mapv_inplace(|v| -v);
    }
}

/// Moore-Penrose pseudoinverse of a symmetric positive semidefinite matrix.
///
/// Eigenvalues in `[-PSD_CLAMP_TOL * lam_max, 0)` are clamped to zero;
/// anything more negative is rejected. Only eigenvalues above
/// `rcond * lam_max` are inverted.
pub fn pinv_psd(g: &ArrayView2<'_, f64>, rcond: f64) -> Result<Array2<f64>> {
    if rcond < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "pinv_psd rcond must be nonnegative, got {rcond}"
        )));
    }
    let (w, lam) = sym_eig_descending(g)?;
    let lam_max = lam.first().copied().unwrap_or(0.0).max(0.0);
    for &l in lam.iter() {
        if l < -PSD_CLAMP_TOL * lam_max {
            return Err(Error::NotPositiveSemidefinite { eigenvalue: l });
        }
    }
    let cutoff = rcond * lam_max;
    // W diag(d) Wᵀ with d_i = 1/lam_i on the retained spectrum.
    let mut scaled = w.clone();
    for (j, mut col) in scaled.columns_mut().into_iter().enumerate() {
        let d = if lam[j] > cutoff && lam[j] > 0.0 {
            1.0 / lam[j]
        } else {
            0.0
        };
        col.mapv_inplace(|v| v * d);
    }
    Ok(scaled.dot(&w.t()))
}

/// Eigenvalues and eigenvectors of a general real square matrix, in the
/// canonical [`EigenPairs`] ordering.
pub fn eig_general(a: &ArrayView2<'_, f64>) -> Result<EigenPairs> {
    ensure_finite_matrix(a, "eig_general input")?;
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            context: "eig_general requires a square matrix",
            expected: format!("{0}x{0}", a.nrows()),
            actual: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    if a.nrows() == 0 {
        return Ok(EigenPairs {
            values: Vec::new(),
            vectors: Array2::zeros((0, 0)),
        });
    }

    let (raw_values, raw_vectors) = a.to_owned().eig()?;

    let order = sorted_indices(raw_values.iter());
    let n = a.nrows();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        values.push(raw_values[src]);
        let mut col = raw_vectors.column(src).to_owned();
        normalize_phase(&mut col);
        vectors.column_mut(dst).assign(&col);
    }
    Ok(EigenPairs { values, vectors })
}

/// Indices that sort complex values by descending modulus, ties broken by
/// descending imaginary part, then descending real part.
pub(crate) fn sorted_indices<'a, I>(values: I) -> Vec<usize>
where
    I: IntoIterator<Item = &'a Complex64>,
{
    let vals: Vec<&Complex64> = values.into_iter().collect();
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| {
        let (va, vb) = (vals[a], vals[b]);
        vb.norm()
            .partial_cmp(&va.norm())
            .unwrap()
            .then(vb.im.partial_cmp(&va.im).unwrap())
            .then(vb.re.partial_cmp(&va.re).unwrap())
    });
    idx
}

/// Scale to unit 2-norm and rotate so the largest-modulus entry is real
/// and positive.
fn normalize_phase(v: &mut Array1<Complex64>) {
    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return;
    }
    let mut idx = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            idx = i;
        }
    }
    let pivot = v[idx];
    let rotation = pivot.conj() / (pivot.norm() * nrm);
    v.mapv_inplace(|z| z * rotation);
}

/// Gram-Schmidt residual test used by the streaming engines: returns the
/// normalized residual direction of `v` against the orthonormal basis `q`
/// when the residual norm exceeds `tol * |v|`, otherwise `None`.
///
/// The residual used for the accept/reject decision comes from a single
/// projection pass (the streaming update rule); the returned direction
/// gets one further pass so the appended column stays orthogonal to
/// machine precision even when the residual is tiny.
pub(crate) fn residual_direction(
    q: &ArrayView2<'_, f64>,
    v: &ArrayView1<'_, f64>,
    tol: f64,
) -> Option<Array1<f64>> {
    let coeffs = q.t().dot(v);
    let mut e = v.to_owned();
    e.scaled_add(-1.0, &q.dot(&coeffs));
    let first_residual = norm(&e.view());
    if first_residual <= tol * norm(v) {
        return None;
    }
    let refine = q.t().dot(&e);
    e.scaled_add(-1.0, &q.dot(&refine));
    let nrm = norm(&e.view());
    if nrm == 0.0 {
        return None;
    }
    Some(e / nrm)
}

/// `m` with one extra column appended.
pub(crate) fn append_column(m: &ArrayView2<'_, f64>, col: &ArrayView1<'_, f64>) -> Array2<f64> {
    let (rows, cols) = m.dim();
    let mut out = Array2::zeros((rows, cols + 1));
    out.slice_mut(ndarray::s![.., ..cols]).assign(m);
    out.column_mut(cols).assign(col);
    out
}

/// `m` zero-padded by `extra_rows` and `extra_cols`.
pub(crate) fn pad_zero(m: &ArrayView2<'_, f64>, extra_rows: usize, extra_cols: usize) -> Array2<f64> {
    let (rows, cols) = m.dim();
    let mut out = Array2::zeros((rows + extra_rows, cols + extra_cols));
    out.slice_mut(ndarray::s![..rows, ..cols]).assign(m);
    out
}

/// Exact symmetrization `(m + mᵀ)/2`, applied after basis rotations so the
/// Gram accumulators stay symmetric bit-for-bit.
pub(crate) fn symmetrize(m: &Array2<f64>) -> Array2<f64> {
    let mt = m.t();
    let mut out = Array2::zeros(m.dim());
    for ((i, j), v) in out.indexed_iter_mut() {
        *v = 0.5 * (m[(i, j)] + mt[(i, j)]);
    }
    out
}

/// Lift a real basis through a complex matrix: `Q V` column by column.
pub(crate) fn real_times_complex(q: &ArrayView2<'_, f64>, v: &Array2<Complex64>) -> Array2<Complex64> {
    let re = v.mapv(|z| z.re);
    let im = v.mapv(|z| z.im);
    let qre = q.dot(&re);
    let qim = q.dot(&im);
    let mut out = Array2::zeros((qre.nrows(), qre.ncols()));
    for ((i, j), z) in out.indexed_iter_mut() {
        *z = Complex64::new(qre[(i, j)], qim[(i, j)]);
    }
    out
}
