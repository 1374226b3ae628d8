//! Gradients of the invariants in the 16-dimensional real state space and
//! a Jacobian rank test for algebraic independence.
//!
//! Partial derivatives are taken with respect to `t^{ijk}` holding
//! `conj(t)` fixed. A 16-vector packs `(Re, Im)` of each complex partial
//! in lexicographic index order: slot `2n` is `Re dI/dt_n`, slot `2n + 1`
//! is `Im dI/dt_n`.

use num_complex::Complex64 as C64;

use super::{
    compute_invariants, general_p_gradient_impl, hyperdet_f, hyperdet_f_gradient,
    permutation_pair, Permutation,
};
use crate::error::Result;
use crate::tensor_core::StateTensor;

/// Relative pivot threshold for [`jacobian_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvariantId {
    I1,
    I2,
    I3,
    I4,
    I5,
    I6,
}

impl InvariantId {
    pub const ALL: [InvariantId; 6] = [
        InvariantId::I1,
        InvariantId::I2,
        InvariantId::I3,
        InvariantId::I4,
        InvariantId::I5,
        InvariantId::I6,
    ];

    /// 1-based, as in `I1..I6`.
    pub fn from_number(n: usize) -> Option<Self> {
        Self::ALL.get(n.checked_sub(1)?).copied()
    }

    pub fn number(self) -> usize {
        self as usize + 1
    }

    /// Polynomial degree in `(t, conj t)`.
    pub fn degree(self) -> u32 {
        [2, 4, 4, 4, 6, 8][self as usize]
    }

    pub fn name(self) -> &'static str {
        ["I1", "I2", "I3", "I4", "I5", "I6"][self as usize]
    }
}

pub fn pack_gradient(g: &[C64; 8]) -> [f64; 16] {
    std::array::from_fn(|s| if s % 2 == 0 { g[s / 2].re } else { g[s / 2].im })
}

/// `dP_{sigma,tau}/dt^{ijk}` by the product rule over the `r` unconjugated
/// slots.
pub fn general_p_gradient(
    t: &StateTensor,
    sigma: &Permutation,
    tau: &Permutation,
) -> Result<[C64; 8]> {
    general_p_gradient_impl(t, sigma, tau)
}

/// Complex partials `dI/dt^{ijk}` in lexicographic order.
pub fn complex_gradient(which: InvariantId, t: &StateTensor) -> [C64; 8] {
    match which {
        InvariantId::I1 => t.amplitudes().map(|z| z.conj()),
        InvariantId::I6 => {
            let f_bar = hyperdet_f(t).conj();
            hyperdet_f_gradient(t).map(|z| z * f_bar)
        }
        _ => {
            let (sigma, tau) = permutation_pair(which).expect("I2..I5 have a permutation form");
            general_p_gradient_impl(t, &sigma, &tau).expect("built-in pairs are valid")
        }
    }
}

pub fn gradient_analytic(which: InvariantId, t: &StateTensor) -> [f64; 16] {
    pack_gradient(&complex_gradient(which, t))
}

fn invariant_value(which: InvariantId, t: &StateTensor) -> Result<f64> {
    Ok(compute_invariants(t)?.values()[which as usize])
}

/// Central differences over the 16 real coordinates `(x_n, y_n)` of
/// `t_n = x_n + i y_n`, converted to the packed complex-partial convention
/// via `dI/dt = (dI/dx - i dI/dy) / 2`.
///
/// Panics if `h` is outside `[1e-7, 1e-3]`.
pub fn gradient_fd(which: InvariantId, t: &StateTensor, h: f64) -> Result<[f64; 16]> {
    assert!((1e-7..=1e-3).contains(&h), "step {h} outside [1e-7, 1e-3]");
    let mut packed = [0.0; 16];
    for n in 0..8 {
        let mut partial = [0.0; 2];
        for (axis, dir) in [C64::new(h, 0.0), C64::new(0.0, h)].into_iter().enumerate() {
            let mut plus = *t.amplitudes();
            let mut minus = *t.amplitudes();
            plus[n] += dir;
            minus[n] -= dir;
            let up = invariant_value(which, &StateTensor::new(plus)?)?;
            let down = invariant_value(which, &StateTensor::new(minus)?)?;
            partial[axis] = (up - down) / (2.0 * h);
        }
        packed[2 * n] = 0.5 * partial[0];
        packed[2 * n + 1] = -0.5 * partial[1];
    }
    Ok(packed)
}

/// Numerical rank of a set of row vectors by Gaussian elimination with
/// complete pivoting. Elimination stops once the largest remaining entry is
/// at most `tol` times the largest row norm.
pub fn jacobian_rank(rows: &[[f64; 16]], tol: f64) -> usize {
    let max_norm = rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    if max_norm == 0.0 {
        return 0;
    }
    let threshold = tol * max_norm;
    let mut m: Vec<[f64; 16]> = rows.to_vec();
    let mut cols: Vec<usize> = (0..16).collect();
    let mut rank = 0;
    while rank < m.len() && rank < 16 {
        let mut best = (0.0, rank, rank);
        for (r, row) in m.iter().enumerate().skip(rank) {
            for (ci, &c) in cols.iter().enumerate().skip(rank) {
                if row[c].abs() > best.0 {
                    best = (row[c].abs(), r, ci);
                }
            }
        }
        if best.0 <= threshold {
            break;
        }
        m.swap(rank, best.1);
        cols.swap(rank, best.2);
        let pc = cols[rank];
        let pivot_row = m[rank];
        for row in m.iter_mut().skip(rank + 1) {
            let factor = row[pc] / pivot_row[pc];
            for c in 0..16 {
                row[c] -= factor * pivot_row[c];
            }
        }
        rank += 1;
    }
    rank
}

/// The state `i|001> + |011> + |100> + |101> + |111>`, at which the six
/// gradients are tabulated.
pub fn gradient_test_state() -> StateTensor {
    let o = C64::new(1.0, 0.0);
    let z = C64::new(0.0, 0.0);
    StateTensor::new([z, C64::new(0.0, 1.0), z, o, o, o, z, o]).expect("finite")
}

/// Rows for `I1..I6` at `t`, in that order.
pub fn gradient_matrix(t: &StateTensor) -> [[f64; 16]; 6] {
    InvariantId::ALL.map(|id| gradient_analytic(id, t))
}

/// Packed gradient of a real-valued `P_{sigma,tau}`.
pub fn general_p_gradient_packed(
    t: &StateTensor,
    sigma: &Permutation,
    tau: &Permutation,
) -> Result<[f64; 16]> {
    Ok(pack_gradient(&general_p_gradient_impl(t, sigma, tau)?))
}
