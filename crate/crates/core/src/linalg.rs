//! Extremal singular values of small dense complex matrices.
//!
//! Two independent routes are provided. [`singular_values`] runs one-sided
//! (Hestenes) Jacobi directly on the matrix, which keeps small singular
//! values accurate to about `eps·σ_max`. [`hermitian_eigenvalues`] runs
//! cyclic two-sided Jacobi on a Hermitian matrix and is used on the Gram
//! matrix `M M*` as a cross-check.

use num_complex::Complex64;

const MAX_SWEEPS: usize = 80;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMatrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    /// `M M*` (rows × rows).
    pub fn gram(&self) -> CMatrix {
        let mut g = CMatrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in 0..self.rows {
                let s: Complex64 = (0..self.cols)
                    .map(|k| self.get(i, k) * self.get(j, k).conj())
                    .sum();
                g.set(i, j, s);
            }
        }
        g
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// All `min(rows, cols)` singular values, ascending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    // Orthogonalize the columns of W, where W = M* when M is wide so that W
    // has min(rows, cols) columns; the column norms are then the singular values.
    let mut w: Vec<Vec<Complex64>> = if m.rows <= m.cols {
        (0..m.rows)
            .map(|i| (0..m.cols).map(|j| m.get(i, j).conj()).collect())
            .collect()
    } else {
        (0..m.cols)
            .map(|j| (0..m.rows).map(|i| m.get(i, j)).collect())
            .collect()
    };
    let n = w.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let (lo, hi) = w.split_at_mut(j);
                let (u, v) = (&mut lo[i], &mut hi[0]);
                let alpha: f64 = u.iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                let r = gamma.norm();
                if r == 0.0 || r <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * r);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let e = (gamma / r).conj();
                for (a, b) in u.iter_mut().zip(v.iter_mut()) {
                    let (x, y) = (*a, *b);
                    *a = x * c - e * y * s;
                    *b = x * s + e * y * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = w
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(f64::total_cmp);
    sv
}

/// `(σ_min, σ_max)`; `(0, 0)` for empty matrices.
pub fn singular_extrema(m: &CMatrix) -> (f64, f64) {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => (0.0, 0.0),
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
/// Stops once the off-diagonal mass falls below `1e-24` of the total.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    assert_eq!(h.rows, h.cols, "Hermitian matrix must be square");
    let n = h.rows;
    let mut a = h.clone();
    let total = a.frobenius().powi(2);
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum();
        if off <= 1e-24 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let zeta = (aqq - app) / (2.0 * r);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let e = (apq / r).conj();
                // A <- A U with U = [[c, s], [-s e, c e]] on the (p, q) plane.
                for k in 0..n {
                    let (x, y) = (a.get(k, p), a.get(k, q));
                    a.set(k, p, x * c - y * e * s);
                    a.set(k, q, x * s + y * e * c);
                }
                // A <- U* A
                for k in 0..n {
                    let (x, y) = (a.get(p, k), a.get(q, k));
                    a.set(p, k, x * c - y * e.conj() * s);
                    a.set(q, k, x * s + y * e.conj() * c);
                }
                a.set(p, q, Complex64::new(0.0, 0.0));
                a.set(q, p, Complex64::new(0.0, 0.0));
                a.set(p, p, Complex64::new(a.get(p, p).re, 0.0));
                a.set(q, q, Complex64::new(a.get(q, q).re, 0.0));
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular extrema through the eigenvalues of the smaller Gram matrix.
pub fn gram_singular_extrema(m: &CMatrix) -> (f64, f64) {
    if m.rows == 0 || m.cols == 0 {
        return (0.0, 0.0);
    }
    let g = if m.rows <= m.cols {
        m.gram()
    } else {
        let mut t = CMatrix::zeros(m.cols, m.rows);
        for i in 0..m.rows {
            for j in 0..m.cols {
                t.set(j, i, m.get(i, j).conj());
            }
        }
        t.gram()
    };
    let ev = hermitian_eigenvalues(&g);
    (ev[0].max(0.0).sqrt(), ev[ev.len() - 1].max(0.0).sqrt())
}
