//! Tangles, the concurrence oracle, Schmidt data for the three one-versus-two
//! bipartitions, and canonical coordinates.
//!
//! The 3-tangle is `tau_ABC = 2|f|` (so `I6 = tau_ABC^2 / 4`). The 2-tangle
//! formulas are written in terms of the one-particle purities
//! `P_X = tr rho_X^2`:
//!
//! ```text
//! tau_AB = 1 - P_A - P_B + P_C - tau_ABC / 2
//! tau_AC = 1 - P_A + P_B - P_C - tau_ABC / 2
//! tau_BC = 1 + P_A - P_B - P_C - tau_ABC / 2
//! ```

pub mod canonical;
pub mod families;

use num_complex::Complex64 as C64;

pub use canonical::{
    canonical_coordinates, canonical_i5_check, ceqn_residuals, det_r, r_matrix, CanonicalData,
    PhaseFix,
};
pub use families::{make_family, Family};

use crate::error::{Error, Result};
use crate::invariants::{compute_invariants, kappa};
use crate::tensor_core::{
    pauli_y, reduced_density_one, DensityMatrix, Eigen, Mat2, Mat4, Matrix, Pair, Party,
    StateTensor, ZERO_NORM_SQR,
};

/// `|<psi|psi> - 1|` allowed where a normalized state is required.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Marginal eigenvalues below `SPECTRAL_FLOOR * tr(rho)` are rounding noise
/// and are set to zero before taking square roots.
pub const SPECTRAL_FLOOR: f64 = 64.0 * f64::EPSILON;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangleReport {
    pub tau_ab: f64,
    pub tau_ac: f64,
    pub tau_bc: f64,
    pub tau_abc: f64,
    pub tau_a_bc: f64,
    pub tau_b_ac: f64,
    pub tau_c_ab: f64,
    pub kappa_ab: f64,
    pub kappa_ac: f64,
    pub kappa_bc: f64,
}

impl TangleReport {
    pub const FIELD_NAMES: [&'static str; 10] = [
        "tau_AB", "tau_AC", "tau_BC", "tau_ABC", "tau_A(BC)", "tau_B(AC)", "tau_C(AB)",
        "kappa_AB", "kappa_AC", "kappa_BC",
    ];

    pub fn values(&self) -> [f64; 10] {
        [
            self.tau_ab, self.tau_ac, self.tau_bc, self.tau_abc, self.tau_a_bc, self.tau_b_ac,
            self.tau_c_ab, self.kappa_ab, self.kappa_ac, self.kappa_bc,
        ]
    }

    pub fn two_tangle(&self, pair: Pair) -> f64 {
        match pair {
            Pair::AB => self.tau_ab,
            Pair::AC => self.tau_ac,
            Pair::BC => self.tau_bc,
        }
    }

    /// `tau_{X(YZ)} - tau_XY - tau_XZ - tau_ABC` for each `X`; zero in exact
    /// arithmetic.
    pub fn monogamy_residuals(&self) -> [f64; 3] {
        [
            self.tau_a_bc - self.tau_ab - self.tau_ac - self.tau_abc,
            self.tau_b_ac - self.tau_ab - self.tau_bc - self.tau_abc,
            self.tau_c_ab - self.tau_ac - self.tau_bc - self.tau_abc,
        ]
    }
}

pub(crate) fn require_normalized(t: &StateTensor) -> Result<()> {
    let norm_sqr = t.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORMALIZATION_TOL {
        Err(Error::NotNormalized { norm_sqr })
    } else {
        Ok(())
    }
}

pub fn tangles(t: &StateTensor) -> Result<TangleReport> {
    require_normalized(t)?;
    let rec = compute_invariants(t)?;
    let (pa, pb, pc) = (rec.purity(Party::A), rec.purity(Party::B), rec.purity(Party::C));
    let tau_abc = 2.0 * rec.f.norm();
    let half = 0.5 * tau_abc;
    let one_vs_rest = |p| 4.0 * reduced_density_one(t, p).entries.det().re;
    Ok(TangleReport {
        tau_ab: 1.0 - pa - pb + pc - half,
        tau_ac: 1.0 - pa + pb - pc - half,
        tau_bc: 1.0 + pa - pb - pc - half,
        tau_abc,
        tau_a_bc: one_vs_rest(Party::A),
        tau_b_ac: one_vs_rest(Party::B),
        tau_c_ab: one_vs_rest(Party::C),
        kappa_ab: kappa(t, Pair::AB)?,
        kappa_ac: kappa(t, Pair::AC)?,
        kappa_bc: kappa(t, Pair::BC)?,
    })
}

/// `V diag(sqrt(max(lambda, 0))) V^H`, with noise-level eigenvalues zeroed.
fn psd_sqrt<const N: usize>(m: &Matrix<N>, trace: f64) -> Result<Matrix<N>> {
    let Eigen { values, vectors } = crate::tensor_core::eig_hermitian(m)?;
    let floor = SPECTRAL_FLOOR * trace.abs().max(f64::MIN_POSITIVE);
    let roots = values.map(|l| if l <= floor { 0.0 } else { l.sqrt() });
    Ok(vectors * Matrix::diag(roots) * vectors.adjoint())
}

/// Wootters concurrence of a two-qubit density matrix and its square, the
/// 2-tangle.
///
/// The `lambda_i` (square roots of the eigenvalues of
/// `sqrt(rho) rho~ sqrt(rho)`) are obtained as the singular values of
/// `sqrt(rho) sqrt(rho~)`, read off the Hermitian dilation
/// `[[0, A], [A^H, 0]]` with Jacobi. This avoids square roots of
/// rounding-level eigenvalues.
pub fn concurrence_oracle(rho: &DensityMatrix<4>) -> Result<(f64, f64)> {
    let m = &rho.entries;
    let herm = m.hermitian_residual();
    if herm > NORMALIZATION_TOL {
        return Err(Error::NotDensityMatrix(format!("not Hermitian (residual {herm:.3e})")));
    }
    let trace = rho.trace();
    if (trace - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotDensityMatrix(format!("trace {trace} differs from 1")));
    }
    let spectrum = rho.eig()?;
    if spectrum.values[3] < -NORMALIZATION_TOL {
        return Err(Error::NotDensityMatrix(format!(
            "negative eigenvalue {}",
            spectrum.values[3]
        )));
    }
    let flip: Mat4 = pauli_y().kron(&pauli_y());
    let sqrt_rho = psd_sqrt(m, trace)?;
    let sqrt_flipped = flip * sqrt_rho.conj() * flip;
    let a = sqrt_rho * sqrt_flipped;
    let dilation = Matrix::<8>::from_fn(|r, c| match (r < 4, c < 4) {
        (true, false) => a[(r, c - 4)],
        (false, true) => a[(c, r - 4)].conj(),
        _ => C64::new(0.0, 0.0),
    });
    let sv = crate::tensor_core::eig_hermitian(&dilation)?.values;
    let lambda = [sv[0], sv[1], sv[2], sv[3]].map(|x| x.max(0.0));
    let c = (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0);
    Ok((c, c * c))
}

/// Schmidt coefficients and one-particle eigenbases for the three
/// bipartitions `A|BC`, `B|AC`, `C|AB`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchmidtData {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
    /// Eigenvector columns of `rho_A`, `rho_B`, `rho_C`, matching the
    /// coefficient order.
    pub bases: [Mat2; 3],
    /// `lambda_0 - lambda_1` of each marginal.
    pub gaps: [f64; 3],
}

impl SchmidtData {
    pub fn coefficients(&self, p: Party) -> [f64; 2] {
        match p {
            Party::A => self.alpha,
            Party::B => self.beta,
            Party::C => self.gamma,
        }
    }

    pub fn basis(&self, p: Party) -> &Mat2 {
        &self.bases[p.position()]
    }
}

pub fn schmidt(t: &StateTensor) -> Result<SchmidtData> {
    if t.norm_sqr() <= ZERO_NORM_SQR {
        return Err(Error::ZeroState);
    }
    let mut coeffs = [[0.0; 2]; 3];
    let mut bases = [Mat2::zeros(); 3];
    let mut gaps = [0.0; 3];
    for p in Party::ALL {
        let e = reduced_density_one(t, p).eig()?;
        let n = p.position();
        coeffs[n] = e.values.map(|l| l.max(0.0).sqrt());
        bases[n] = e.vectors;
        gaps[n] = e.values[0] - e.values[1];
    }
    Ok(SchmidtData { alpha: coeffs[0], beta: coeffs[1], gamma: coeffs[2], bases, gaps })
}

/// Squared Schmidt coefficients from `lambda_0 + lambda_1 = I1` and
/// `lambda_0^2 + lambda_1^2 = purity`, descending.
pub fn schmidt_closed_form(i1: f64, purity: f64) -> (f64, f64) {
    let disc = (2.0 * purity - i1 * i1).max(0.0).sqrt();
    (0.5 * (i1 + disc), 0.5 * (i1 - disc))
}
