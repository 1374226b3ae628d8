//! Three-qubit state tensors, reduced density matrices and the local
//! unitary action.
//!
//! Amplitudes `t^{ijk}` are stored in lexicographic order with `i` (particle
//! A) slowest and `k` (particle C) fastest, so `index = 4i + 2j + k`.

pub mod eigen;
pub mod matrix;

use std::fmt;

use num_complex::Complex64 as C64;

pub use eigen::{eig_hermitian, Eigen, DEGENERACY_GAP};
pub use matrix::{pauli_x, pauli_y, pauli_z, Mat2, Mat4, Matrix};

use crate::error::{Error, Result};

/// Two-index Levi-Civita symbol, `eps[0][1] = -eps[1][0] = 1`. The
/// contravariant copy is numerically identical.
pub const LEVI_CIVITA: [[f64; 2]; 2] = [[0.0, 1.0], [-1.0, 0.0]];

/// Squared norms below this are treated as the zero state.
pub const ZERO_NORM_SQR: f64 = 1e-24;
/// Local factors with `||U U^H - 1||_max` above this are rejected.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn position(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pair {
    AB,
    AC,
    BC,
}

impl Pair {
    pub const ALL: [Pair; 3] = [Pair::AB, Pair::AC, Pair::BC];

    pub fn parties(self) -> (Party, Party) {
        match self {
            Pair::AB => (Party::A, Party::B),
            Pair::AC => (Party::A, Party::C),
            Pair::BC => (Party::B, Party::C),
        }
    }

    /// The particle traced out to obtain this pair's marginal.
    pub fn complement(self) -> Party {
        match self {
            Pair::AB => Party::C,
            Pair::AC => Party::B,
            Pair::BC => Party::A,
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = self.parties();
        write!(f, "{x}{y}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    One(Party),
    Two(Pair),
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subsystem::One(p) => p.fmt(f),
            Subsystem::Two(p) => p.fmt(f),
        }
    }
}

/// Amplitude tensor `t^{ijk}` of a (not necessarily normalized) pure
/// three-qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateTensor {
    amp: [C64; 8],
}

#[inline]
pub fn flat_index(i: usize, j: usize, k: usize) -> usize {
    4 * i + 2 * j + k
}

#[inline]
pub fn split_index(idx: usize) -> (usize, usize, usize) {
    ((idx >> 2) & 1, (idx >> 1) & 1, idx & 1)
}

impl StateTensor {
    pub fn new(amp: [C64; 8]) -> Result<Self> {
        if let Some(index) = amp.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(StateTensor { amp })
    }

    pub fn from_real(amp: [f64; 8]) -> Result<Self> {
        Self::new(amp.map(|x| C64::new(x, 0.0)))
    }

    pub fn zero() -> Self {
        StateTensor { amp: [C64::new(0.0, 0.0); 8] }
    }

    /// The computational basis state `|ijk>`.
    pub fn basis(i: usize, j: usize, k: usize) -> Self {
        let mut t = Self::zero();
        t.amp[flat_index(i, j, k)] = C64::new(1.0, 0.0);
        t
    }

    pub fn amplitudes(&self) -> &[C64; 8] {
        &self.amp
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.amp[flat_index(i, j, k)]
    }

    /// `conj(t^{ijk})`, the lower-index tensor.
    #[inline]
    pub fn conj_at(&self, i: usize, j: usize, k: usize) -> C64 {
        self.amp[flat_index(i, j, k)].conj()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scaled(&self, s: C64) -> Self {
        StateTensor { amp: self.amp.map(|z| z * s) }
    }
}

/// `<s|t> = sum conj(s_ijk) t_ijk`.
pub fn inner_product(s: &StateTensor, t: &StateTensor) -> C64 {
    s.amp.iter().zip(t.amp.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn normalize(t: &StateTensor) -> Result<StateTensor> {
    let n2 = t.norm_sqr();
    if n2 <= ZERO_NORM_SQR {
        return Err(Error::ZeroState);
    }
    Ok(t.scaled(C64::new(1.0 / n2.sqrt(), 0.0)))
}

/// Hermitian PSD marginal of a pure state on one qubit (`N = 2`) or a pair
/// (`N = 4`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<const N: usize> {
    pub label: Subsystem,
    pub entries: Matrix<N>,
}

impl<const N: usize> DensityMatrix<N> {
    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn eig(&self) -> Result<Eigen<N>> {
        eig_hermitian(&self.entries)
    }
}

/// `(rho_X)^a_b = sum over the other two indices of t^{..a..} conj(t^{..b..})`.
pub fn reduced_density_one(t: &StateTensor, which: Party) -> DensityMatrix<2> {
    let pos = which.position();
    let mut m = Mat2::zeros();
    for x in 0..8 {
        for y in 0..8 {
            let (ix, iy) = (split_index(x), split_index(y));
            let kept_x = [ix.0, ix.1, ix.2];
            let kept_y = [iy.0, iy.1, iy.2];
            let traced_equal = (0..3)
                .filter(|&p| p != pos)
                .all(|p| kept_x[p] == kept_y[p]);
            if traced_equal {
                m[(kept_x[pos], kept_y[pos])] += t.amp[x] * t.amp[y].conj();
            }
        }
    }
    DensityMatrix { label: Subsystem::One(which), entries: m }
}

/// Pair marginal with the earlier particle on the slower index, e.g.
/// `(rho_BC)^{jk}_{mn} = sum_i t^{ijk} conj(t^{imn})` at `(2j+k, 2m+n)`.
pub fn reduced_density_two(t: &StateTensor, which: Pair) -> DensityMatrix<4> {
    let (p, q) = which.parties();
    let traced = which.complement().position();
    let (p, q) = (p.position(), q.position());
    let mut m = Mat4::zeros();
    for x in 0..8 {
        for y in 0..8 {
            let (ix, iy) = (split_index(x), split_index(y));
            let ix = [ix.0, ix.1, ix.2];
            let iy = [iy.0, iy.1, iy.2];
            if ix[traced] == iy[traced] {
                m[(2 * ix[p] + ix[q], 2 * iy[p] + iy[q])] += t.amp[x] * t.amp[y].conj();
            }
        }
    }
    DensityMatrix { label: Subsystem::Two(which), entries: m }
}

/// `tr(M^l)`, real part.
pub fn power_trace<const N: usize>(m: &DensityMatrix<N>, l: u32) -> f64 {
    m.entries.pow(l).trace().re
}

/// Element `u_a (x) u_b (x) u_c` of the local group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitaryTriple {
    pub u_a: Mat2,
    pub u_b: Mat2,
    pub u_c: Mat2,
}

impl UnitaryTriple {
    pub fn new(u_a: Mat2, u_b: Mat2, u_c: Mat2) -> Self {
        UnitaryTriple { u_a, u_b, u_c }
    }

    pub fn identity() -> Self {
        Self::new(Mat2::identity(), Mat2::identity(), Mat2::identity())
    }

    pub fn factor(&self, p: Party) -> &Mat2 {
        match p {
            Party::A => &self.u_a,
            Party::B => &self.u_b,
            Party::C => &self.u_c,
        }
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        for (name, u) in [('A', &self.u_a), ('B', &self.u_b), ('C', &self.u_c)] {
            let residual = u.unitarity_residual();
            if residual.is_nan() || residual > tol {
                return Err(Error::NonUnitary { factor: name, residual });
            }
        }
        Ok(())
    }
}

/// `t'^{ijk} = sum_{lmn} (u_a)^i_l (u_b)^j_m (u_c)^k_n t^{lmn}`.
pub fn apply_local_unitary(t: &StateTensor, u: &UnitaryTriple) -> Result<StateTensor> {
    u.check_unitary(UNITARITY_TOL)?;
    let mut out = [C64::new(0.0, 0.0); 8];
    for (x, slot) in out.iter_mut().enumerate() {
        let (i, j, k) = split_index(x);
        for y in 0..8 {
            let (l, m, n) = split_index(y);
            *slot += u.u_a[(i, l)] * u.u_b[(j, m)] * u.u_c[(k, n)] * t.amp[y];
        }
    }
    StateTensor::new(out)
}
