//! Lawson-Hanson non-negative least squares.
//!
//! Solves `min ‖A x − b‖₂` subject to `x ≥ 0`. Used for cone membership
//! (is `x − apex` a non-negative combination of the generators?) and for
//! checking that a piecewise-linear objective is pinned at its minimizer.

use nalgebra::{DMatrix, DVector};

/// Result of a non-negative least-squares solve.
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual: f64,
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let n = a.ncols();
    let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
    let mut out = DVector::zeros(n);
    if idx.is_empty() {
        return out;
    }
    let sub = a.select_columns(idx.iter());
    let scale = sub.amax();
    if !(scale > 0.0) {
        return out;
    }
    let sub = sub / scale;
    let k = idx.len();
    // Householder QR for full column rank; SVD (minimum norm) otherwise.
    // SVD alone loses accuracy when singular values repeat.
    let qr = sub.clone().qr();
    let r = qr.r();
    let rmax = r.diagonal().amax();
    let sol = if sub.nrows() >= k && r.diagonal().iter().all(|v| v.abs() > 1e-12 * rmax) {
        let qtb = qr.q().tr_mul(b);
        r.solve_upper_triangular(&qtb.rows(0, k).into_owned())
    } else {
        let svd = sub.svd(true, true);
        let cutoff = 1e-14 * svd.singular_values.max();
        svd.solve(b, cutoff).ok()
    };
    if let Some(sol) = sol {
        for (k, &i) in idx.iter().enumerate() {
            out[i] = sol[k] / scale;
        }
    }
    out
}

/// Non-negative least squares by the active-set method of Lawson and Hanson.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let n = a.ncols();
    assert_eq!(a.nrows(), b.len(), "nnls: row count must match rhs length");

    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    // Columns whose fresh solve came back non-positive; cleared when x moves.
    let mut excluded = vec![false; n];
    let tol = 10.0 * f64::EPSILON * n.max(1) as f64 * a.norm() * b.norm();
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.tr_mul(&(b - a * &x));
        let pick = (0..n)
            .filter(|&i| !passive[i] && !excluded[i])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let j = match pick {
            Some(j) if w[j] > tol => j,
            _ => break,
        };
        passive[j] = true;

        let mut first = true;
        loop {
            let s = solve_passive(a, b, &passive);
            if (0..n).filter(|&i| passive[i]).all(|i| s[i] > 0.0) {
                if s != x {
                    excluded.iter_mut().for_each(|e| *e = false);
                }
                x = s;
                break;
            }
            if first && s[j] <= 0.0 {
                passive[j] = false;
                excluded[j] = true;
                break;
            }
            first = false;
            // Walk from x toward s until the first passive coordinate hits zero.
            let mut step = f64::INFINITY;
            let mut blocking = j;
            for i in (0..n).filter(|&i| passive[i] && s[i] <= 0.0) {
                let t = x[i] / (x[i] - s[i]);
                if t < step {
                    step = t;
                    blocking = i;
                }
            }
            x += (s - &x) * step;
            excluded.iter_mut().for_each(|e| *e = false);
            for i in 0..n {
                if passive[i] && (i == blocking || x[i] <= 0.0) {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if passive.iter().all(|p| !p) {
                break;
            }
        }
    }

    let residual = (a * &x - b).norm();
    NnlsSolution { x, residual }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_solution_matches_linear_solve() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![3.0, 4.0]);
        let sol = nnls(&a, &b);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.x[1] - 1.0).abs() < 1e-12);
        assert!(sol.residual < 1e-12);
    }

    #[test]
    fn negative_component_is_clamped() {
        // Unconstrained solution is (-1, 2); the constrained optimum sits on x0 = 0.
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![-1.0, 2.0]);
        let sol = nnls(&a, &b);
        assert_eq!(sol.x[0], 0.0);
        assert!((sol.x[1] - 2.0).abs() < 1e-12);
        assert!((sol.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overdetermined_system() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0, 1.0, 2.0]);
        let sol = nnls(&a, &b);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, -1.0, 0.5, 0.0, 1.0, -2.0]);
        let b = DVector::zeros(2);
        let sol = nnls(&a, &b);
        assert!(sol.x.iter().all(|&v| v == 0.0));
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn small_well_conditioned_cone() {
        // Four tiny generators with condition number about 41; the exact
        // coefficients are all positive.
        let a = DMatrix::from_column_slice(4, 4, &[
            2.8055964767779475e-6, -1.3141343340221151e-5, -6.182603727980778e-6, -5.9439815371446466e-6,
            4.563757518969824e-6, 1.2814427691246774e-5, -5.409991217072453e-6, -6.310018782246089e-6,
            -1.2315838178302962e-5, 5.056442372412546e-7, 9.714408479017615e-6, -2.7958010517960654e-6,
            5.4981302122759056e-6, -2.3929196302861886e-7, 2.5146224828921735e-6, 1.4748279867193848e-5,
        ]);
        let b = DVector::from_vec(vec![0.15702518720396333, -0.9468895235608872, 0.07977811376554757, 0.020148711634276967]);
        let exact = a.clone().lu().solve(&b).unwrap();
        assert!(exact.min() > 0.0);
        let sol = nnls(&a, &b);
        assert!(sol.residual < 1e-9, "{sol:?}");
        assert!((sol.x - exact).norm() < 1e-6 * b.norm() / 4.48e-7);
    }
}
