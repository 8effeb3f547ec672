//! Eigenvalues and eigenvectors of the small Jacobians used here.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Eigenvalues sorted by real part, then imaginary part.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
    sort_eigenvalues(&mut ev);
    ev
}

pub fn sort_eigenvalues(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Unit vector spanning the (numerical) kernel of `m - lambda I`, for a
/// simple real eigenvalue `lambda`.
pub fn eigenvector(m: &DMatrix<f64>, lambda: f64) -> DVector<f64> {
    let n = m.nrows();
    let shifted = m - DMatrix::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty matrix");
    let v: DVector<f64> = v_t.row(k).transpose();
    v.normalize()
}
