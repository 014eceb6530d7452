//! Lift a reduced operator's eigendecomposition to full-space dynamic
//! modes and comparable frequency summaries.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{eig_general, real_times_complex};

/// Discrete-time spectrum of an estimated operator.
///
/// Eigenvalues follow the crate-wide canonical ordering (descending
/// modulus, then descending imaginary part, then descending real part);
/// `modes` columns align with them. A normalized frequency is
/// `|arg lambda| / pi`, the mode frequency as a fraction of Nyquist, so it
/// always lies in `[0, 1]`: positive real eigenvalues map to 0 and
/// negative real ones to 1.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub modes: Array2<Complex64>,
    pub normalized_frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Eigendecompose the reduced operator and lift the eigenvectors through
/// the basis: modes are `Q V`.
pub fn dynamic_spectrum(
    basis: &ArrayView2<'_, f64>,
    operator: &ArrayView2<'_, f64>,
) -> Result<Spectrum> {
    if operator.nrows() != operator.ncols() || basis.ncols() != operator.nrows() {
        return Err(Error::DimensionMismatch {
            context: "basis columns must match the square reduced operator",
            expected: format!("{0}x{0} operator", basis.ncols()),
            actual: format!("{}x{}", operator.nrows(), operator.ncols()),
        });
    }
    let pairs = eig_general(operator)?;
    let modes = real_times_complex(basis, &pairs.vectors);
    let normalized_frequencies: Vec<f64> = pairs
        .values
        .iter()
        .map(|lam| lam.arg().abs() / std::f64::consts::PI)
        .collect();
    let amplitudes: Vec<f64> = pairs.values.iter().map(|lam| lam.norm()).collect();
    Ok(Spectrum {
        eigenvalues: pairs.values,
        modes,
        normalized_frequencies,
        amplitudes,
    })
}

/// Greedy nearest-neighbor pairing of the `top_k` largest-modulus
/// eigenvalues of `a` against the eigenvalues of `b`, each `b` eigenvalue
/// used at most once; returns the largest paired distance in the complex
/// plane.
///
/// Greedy matching is adequate for the well-separated spectra this crate
/// compares; it is a diagnostic, not an optimal assignment.
pub fn match_spectra(a: &Spectrum, b: &Spectrum, top_k: usize) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidConfig("cannot match empty spectra".into()));
    }
    if top_k == 0 || top_k > a.len().min(b.len()) {
        return Err(Error::InvalidConfig(format!(
            "top_k must be in 1..={}, got {top_k}",
            a.len().min(b.len())
        )));
    }
    Ok(greedy_match_distance(
        &a.eigenvalues[..top_k],
        &b.eigenvalues,
    ))
}

/// Greedy max-distance matching on raw eigenvalue slices; `a` is consumed
/// in order, each entry pairing with its nearest unused entry of `b`.
pub(crate) fn greedy_match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    debug_assert!(a.len() <= b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for za in a {
        let mut best = f64::INFINITY;
        let mut best_j = 0;
        for (j, zb) in b.iter().enumerate() {
            if !used[j] {
                let d = (za - zb).norm();
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    fn spectrum_of(op: Array2<f64>) -> Spectrum {
        let basis = Array2::eye(op.nrows());
        dynamic_spectrum(&basis.view(), &op.view()).unwrap()
    }

    #[test]
    fn positive_real_eigenvalue_is_dc() {
        let basis = array![[1.0], [0.0], [0.0]];
        let op = array![[0.5]];
        let s = dynamic_spectrum(&basis.view(), &op.view()).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.normalized_frequencies[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.amplitudes[0], 0.5, epsilon = 1e-14);
        let m = s.modes.column(0);
        assert_abs_diff_eq!(m[0].norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[1].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn negative_real_eigenvalue_is_nyquist() {
        let s = spectrum_of(array![[-0.5]]);
        assert_abs_diff_eq!(s.normalized_frequencies[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn rotation_frequency_is_fraction_of_nyquist() {
        // 3 Hz rotation sampled at 120 Hz: 3/60 of Nyquist for both
        // conjugate eigenvalues.
        let theta = 2.0 * std::f64::consts::PI * 3.0 / 120.0;
        let op = array![
            [theta.cos(), -theta.sin()],
            [theta.sin(), theta.cos()]
        ];
        let s = spectrum_of(op);
        for (lam, freq) in s.eigenvalues.iter().zip(&s.normalized_frequencies) {
            assert_abs_diff_eq!(lam.norm(), 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(*freq, 0.05, epsilon = 1e-12);
        }
    }

    #[test]
    fn identical_spectra_match_exactly() {
        let s = spectrum_of(array![[0.9, 0.1], [0.0, 0.4]]);
        assert_abs_diff_eq!(match_spectra(&s, &s, 2).unwrap(), 0.0, epsilon = 0.0);
    }

    #[test]
    fn scalar_spectra_distance() {
        let a = spectrum_of(array![[1.0]]);
        let b = spectrum_of(array![[0.9]]);
        assert_abs_diff_eq!(match_spectra(&a, &b, 1).unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn conjugate_pairs_match_regardless_of_order() {
        // Two rotations at distinct angles; building the comparison
        // operator with the blocks swapped permutes the eigenvalue order
        // without changing the multiset.
        let block = |theta: f64| {
            array![
                [theta.cos(), -theta.sin()],
                [theta.sin(), theta.cos()]
            ]
        };
        let mut a_op = Array2::zeros((4, 4));
        a_op.slice_mut(ndarray::s![..2, ..2]).assign(&block(0.3));
        a_op.slice_mut(ndarray::s![2.., 2..]).assign(&block(1.1));
        let mut b_op = Array2::zeros((4, 4));
        b_op.slice_mut(ndarray::s![..2, ..2]).assign(&block(1.1));
        b_op.slice_mut(ndarray::s![2.., 2..]).assign(&block(0.3));
        let a = spectrum_of(a_op);
        let b = spectrum_of(b_op);
        assert!(match_spectra(&a, &b, 4).unwrap() < 1e-12);
    }

    #[test]
    fn match_is_symmetric_for_equal_lengths() {
        let a = spectrum_of(array![[0.8, 0.3], [0.0, 0.2]]);
        let b = spectrum_of(array![[0.7, 0.0], [0.1, 0.3]]);
        let ab = match_spectra(&a, &b, 2).unwrap();
        let ba = match_spectra(&b, &a, 2).unwrap();
        assert_abs_diff_eq!(ab, ba, epsilon = 1e-12);
    }

    #[test]
    fn frequencies_stay_in_unit_interval() {
        let op = array![
            [0.1, -0.9, 0.2],
            [0.8, 0.0, -0.1],
            [0.0, 0.3, -0.6]
        ];
        let s = spectrum_of(op);
        for f in &s.normalized_frequencies {
            assert!((0.0..=1.0).contains(f));
        }
    }

    #[test]
    fn real_operator_eigenvalues_pair_up() {
        let op = array![
            [0.2, -0.7, 0.1, 0.0],
            [0.7, 0.2, 0.0, 0.3],
            [0.0, 0.1, -0.4, 0.0],
            [0.2, 0.0, 0.1, 0.5]
        ];
        let s = spectrum_of(op);
        for lam in &s.eigenvalues {
            if lam.im.abs() > 1e-10 {
                let partner = s
                    .eigenvalues
                    .iter()
                    .map(|z| (z - lam.conj()).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(partner < 1e-10);
            }
        }
    }

    #[test]
    fn mode_lift_residual_small() {
        let op = array![[0.6, -0.3], [0.4, 0.1]];
        let basis = crate::numerics::orthonormal_columns(
            &array![[1.0, 0.2], [0.3, 1.0], [0.0, 0.5]].view(),
            1e-12,
        )
        .unwrap();
        let s = dynamic_spectrum(&basis.view(), &op.view()).unwrap();
        // Modes satisfy the lifted eigen-relation through the basis.
        let scale = crate::numerics::frobenius(&op.view());
        for (j, lam) in s.eigenvalues.iter().enumerate() {
            let phi = s.modes.column(j);
            // Q A v = lambda Q v = lambda phi, and phi = Q v.
            let v = basis.t().dot(&phi.mapv(|z| z.re)).mapv(|x| Complex64::new(x, 0.0))
                + basis
                    .t()
                    .dot(&phi.mapv(|z| z.im))
                    .mapv(|x| Complex64::new(0.0, x));
            let mut residual = 0.0f64;
            for i in 0..op.nrows() {
                let mut av = Complex64::new(0.0, 0.0);
                for k in 0..op.ncols() {
                    av += op[(i, k)] * v[k];
                }
                residual += (av - lam * v[i]).norm_sqr();
            }
            assert!(residual.sqrt() <= 1e-8 * scale);
        }
    }

    #[test]
    fn top_k_validation() {
        let a = spectrum_of(array![[0.5]]);
        let b = spectrum_of(array![[0.4]]);
        assert!(match_spectra(&a, &b, 0).is_err());
        assert!(match_spectra(&a, &b, 2).is_err());
    }
}
