use nalgebra::DMatrix;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// The `r`-th largest singular value (1-based), zero when `r` exceeds the
/// number of singular values.
pub fn rth_singular_value(m: &DMatrix<f64>, r: usize) -> f64 {
    singular_values(m).get(r.wrapping_sub(1)).copied().unwrap_or(0.0)
}

/// Scales each row to unit Euclidean length; zero rows stay zero.
pub fn normalize_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for r in 0..out.nrows() {
        let norm = out.row(r).norm();
        if norm > 0.0 {
            out.row_mut(r).scale_mut(1.0 / norm);
        }
    }
    out
}
