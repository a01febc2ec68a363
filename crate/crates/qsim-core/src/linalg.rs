//! Small dense linear-algebra helpers shared by the solver modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{QsimError, Result};

/// Max absolute entry (entrywise infinity norm).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, &v| acc.max(v.abs()))
}

/// Symmetric eigendecomposition with eigenvalues sorted descending and a
/// fixed sign convention: each eigenvector's largest-magnitude entry is
/// positive. Returns `(eigenvalues, eigenvectors)` with eigenvectors in
/// columns.
pub fn symmetric_eigen_desc(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let se = m.clone().symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = se.eigenvalues[src];
        let mut col = se.eigenvectors.column(src).clone_owned();
        let lead = col
            .iter()
            .cloned()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if col[lead] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

/// Shannon entropy in bits of a probability vector, with `0·log 0 := 0`.
/// Entries below `clamp` in magnitude are treated as exact zeros; small
/// negative round-off is tolerated the same way. The result is clamped to
/// the mathematical lower bound of zero (this also normalizes `-0.0`).
pub fn shannon_bits(probs: &[f64]) -> f64 {
    let clamp = 1e-15;
    probs
        .iter()
        .filter(|&&p| p > clamp)
        .map(|&p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Spectral-radius estimate of a nonnegative square matrix by power
/// iteration, deterministic all-ones start vector.
///
/// Iterates on `A + I` so that periodic structure cannot stall convergence;
/// the shift is subtracted from the estimate. Errors after `max_iter`
/// iterations without the successive estimates agreeing to `rel_tol`.
pub fn power_iteration_radius(a: &DMatrix<f64>, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = f64::NAN;
    for _ in 0..max_iter {
        let mut w = a * &v;
        w += &v; // shifted operator (A + I)·v
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm - 1.0;
        w /= norm;
        v = w;
        if (next - estimate).abs() <= rel_tol * next.abs().max(1e-300) {
            return Ok(next.max(0.0));
        }
        estimate = next;
    }
    Err(QsimError::Numerical(format!(
        "power iteration did not converge within {max_iter} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_desc_orders_and_signs() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let (vals, vecs) = symmetric_eigen_desc(&m);
        assert!((vals[0] - 1.5).abs() < 1e-12);
        assert!((vals[1] - 0.5).abs() < 1e-12);
        // Reconstruction.
        let rec = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        assert!(max_abs(&(rec - m)) < 1e-12);
        // Sign convention: dominant entries positive.
        assert!(vecs[(0, 0)] > 0.0 && vecs[(1, 0)] > 0.0);
    }

    #[test]
    fn shannon_handles_zero_mass() {
        assert_eq!(shannon_bits(&[1.0, 0.0]), 0.0);
        assert!((shannon_bits(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
        // Tiny negative round-off is ignored.
        assert_eq!(shannon_bits(&[1.0, -1e-17]), 0.0);
    }

    #[test]
    fn power_iteration_on_known_matrices() {
        // Anti-diagonal coupling block: radius equals the coupling strength.
        let a = 0.56f64.sqrt();
        let m = DMatrix::from_row_slice(2, 2, &[0.0, a, a, 0.0]);
        let r = power_iteration_radius(&m, 1e-12, 100_000).unwrap();
        assert!((r - a).abs() < 1e-10);

        // Zero matrix.
        let z = DMatrix::zeros(3, 3);
        assert_eq!(power_iteration_radius(&z, 1e-12, 100).unwrap(), 0.0);

        // Row-stochastic matrix has radius 1.
        let s = DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.8, 0.2]);
        let r = power_iteration_radius(&s, 1e-12, 100_000).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }
}
