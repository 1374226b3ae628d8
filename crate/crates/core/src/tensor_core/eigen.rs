//! Hermitian eigensolvers for the small fixed sizes used here.
//!
//! 2x2 matrices use the closed form. Anything larger goes through cyclic
//! complex Jacobi rotations, which stay accurate in the absolute sense
//! (`eps * ||M||`) for every eigenvalue, including the tiny ones that the
//! concurrence computation depends on.

use num_complex::Complex64 as C64;

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Input must be Hermitian to this absolute tolerance.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Jacobi stops once the off-diagonal Frobenius norm drops below this
/// (relative to `max(1, ||M||_F)`).
pub const JACOBI_TOL: f64 = 1e-13;
pub const JACOBI_MAX_SWEEPS: usize = 50;
/// Adjacent eigenvalues closer than this are reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;

/// Eigenvalues in descending order with matching orthonormal eigenvector
/// columns. Each column is phased so its largest-modulus entry is real and
/// positive (first such entry on exact ties).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigen<const N: usize> {
    pub values: [f64; N],
    pub vectors: Matrix<N>,
}

impl<const N: usize> Eigen<N> {
    pub fn vector(&self, idx: usize) -> [C64; N] {
        self.vectors.column(idx)
    }

    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_degenerate(&self) -> bool {
        self.min_gap() < DEGENERACY_GAP
    }

    /// Largest `||M v - lambda v||` over all pairs.
    pub fn max_residual(&self, m: &Matrix<N>) -> f64 {
        (0..N)
            .map(|idx| {
                let v = self.vector(idx);
                let mv = m.mul_vec(&v);
                mv.iter()
                    .zip(v.iter())
                    .map(|(a, b)| (a - b * self.values[idx]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

pub fn eig_hermitian<const N: usize>(m: &Matrix<N>) -> Result<Eigen<N>> {
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL || !residual.is_finite() {
        return Err(Error::NotHermitian { residual });
    }
    let sym = Matrix::<N>::from_fn(|r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    let (values, vectors) = if N == 2 {
        closed_form_2x2(&sym)
    } else {
        jacobi(sym)?
    };
    Ok(sort_and_phase(values, vectors))
}

fn closed_form_2x2<const N: usize>(m: &Matrix<N>) -> ([f64; N], Matrix<N>) {
    debug_assert_eq!(N, 2);
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let half = 0.5 * (a - d);
    let mean = 0.5 * (a + d);
    let r = half.hypot(b.norm());

    let mut values = [0.0; N];
    let mut vectors = Matrix::<N>::zeros();
    if b.norm() == 0.0 {
        values[0] = a;
        values[1] = d;
        vectors = Matrix::identity();
        return (values, vectors);
    }
    values[0] = mean + r;
    values[1] = mean - r;
    // Pick the row of (M - lambda_+) that avoids cancellation.
    let (x, y) = if half >= 0.0 {
        (C64::new(r + half, 0.0), b.conj())
    } else {
        (b, C64::new(r - half, 0.0))
    };
    let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
    let (x, y) = (x / n, y / n);
    vectors[(0, 0)] = x;
    vectors[(1, 0)] = y;
    vectors[(0, 1)] = -y.conj();
    vectors[(1, 1)] = x.conj();
    (values, vectors)
}

fn off_diagonal_norm<const N: usize>(a: &Matrix<N>) -> f64 {
    let mut s = 0.0;
    for r in 0..N {
        for c in 0..N {
            if r != c {
                s += a[(r, c)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi<const N: usize>(mut a: Matrix<N>) -> Result<([f64; N], Matrix<N>)> {
    let mut v = Matrix::<N>::identity();
    let threshold = JACOBI_TOL * a.frobenius_norm().max(1.0);
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..N {
            for q in (p + 1)..N {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    Ok((std::array::from_fn(|d| a[(d, d)].re), v))
}

/// Annihilates `a[p][q]` with `a <- W^H a W`, `v <- v W`, where
/// `W = diag(1, e^{-i phi}) * [[c, s], [-s, c]]` on the (p, q) plane.
fn rotate<const N: usize>(a: &mut Matrix<N>, v: &mut Matrix<N>, p: usize, q: usize) {
    let g = a[(p, q)];
    let g_abs = g.norm();
    if g_abs == 0.0 {
        return;
    }
    let phase = g / g_abs;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * g_abs);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let w_pp = C64::new(c, 0.0);
    let w_pq = C64::new(s, 0.0);
    let w_qp = -phase.conj() * s;
    let w_qq = phase.conj() * c;

    for k in 0..N {
        let (kp, kq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = kp * w_pp + kq * w_qp;
        a[(k, q)] = kp * w_pq + kq * w_qq;
        let (kp, kq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = kp * w_pp + kq * w_qp;
        v[(k, q)] = kp * w_pq + kq * w_qq;
    }
    for k in 0..N {
        let (pk, qk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = w_pp.conj() * pk + w_qp.conj() * qk;
        a[(q, k)] = w_pq.conj() * pk + w_qq.conj() * qk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
}

fn sort_and_phase<const N: usize>(values: [f64; N], vectors: Matrix<N>) -> Eigen<N> {
    let mut order: [usize; N] = std::array::from_fn(|i| i);
    order.sort_by(|&x, &y| values[y].total_cmp(&values[x]));
    let mut out = Eigen {
        values: std::array::from_fn(|i| values[order[i]]),
        vectors: Matrix::zeros(),
    };
    for (dst, &src) in order.iter().enumerate() {
        let col = vectors.column(src);
        let mut lead = 0;
        for r in 1..N {
            if col[r].norm() > col[lead].norm() {
                lead = r;
            }
        }
        let unit = if col[lead].norm() > 0.0 {
            col[lead].conj() / col[lead].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for r in 0..N {
            out.vectors[(r, dst)] = col[r] * unit;
        }
        out.vectors[(lead, dst)].im = 0.0;
    }
    out
}
