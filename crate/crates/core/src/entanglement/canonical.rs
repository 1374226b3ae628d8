//! Coordinates of a state in the product of its one-particle eigenbases,
//! with basis phases fixed so that `c^{000}, c^{100}, c^{001}, c^{011}` are
//! real and non-negative.
//!
//! Phase sequence:
//! 1. `phi_0`, `phi_1` make `c^{000}` and `c^{100}` real.
//! 2. `theta_0` makes `c^{001}` real; `chi_0` takes the opposite phase so the
//!    `c^{i00}` stay real.
//! 3. `theta_1` makes `c^{011}` real.
//!
//! When an anchor has modulus below [`ANCHOR_FLOOR`] the next coordinate in
//! lexicographic order carrying the same phase freedom is used instead; the
//! choice is recorded in the phase log.

use std::fmt;

use num_complex::Complex64 as C64;

use super::{require_normalized, schmidt, SchmidtData};
use crate::error::{Error, Result};
use crate::tensor_core::{split_index, Mat2, Party, StateTensor, DEGENERACY_GAP};

pub const ANCHOR_FLOOR: f64 = 1e-10;
/// `det R` is real in exact arithmetic; larger imaginary parts are errors.
pub const DET_R_IMAG_TOL: f64 = 1e-10;

/// One phase-fixing step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseFix {
    /// Basis vector whose phase was chosen, e.g. `"phi_0"` or
    /// `"theta_0 (+chi_0)"`.
    pub freedom: &'static str,
    /// Flat index of the coordinate made real, `None` if every candidate
    /// vanished and the phase was left as is.
    pub anchor: Option<usize>,
    pub fallback: bool,
}

impl fmt::Display for PhaseFix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.anchor {
            Some(x) => {
                let (i, j, k) = split_index(x);
                write!(f, "{}: c^{{{i}{j}{k}}} real", self.freedom)?;
                if self.fallback {
                    f.write_str(" (fallback)")?;
                }
                Ok(())
            }
            None => write!(f, "{}: unfixed (all candidates vanish)", self.freedom),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalData {
    pub c: [C64; 8],
    /// Schmidt data whose bases carry the fixed phases, so that
    /// `c^{ijk} = <phi_i theta_j chi_k | psi>`.
    pub schmidt: SchmidtData,
    pub phase_log: Vec<PhaseFix>,
    pub r_matrix: Mat2,
    pub det_r: f64,
}

impl CanonicalData {
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> C64 {
        self.c[crate::tensor_core::flat_index(i, j, k)]
    }
}

struct Phases {
    // angle added to each basis vector; c^{ijk} picks up exp(-i(a_i + b_j + g_k))
    a: [f64; 2],
    b: [f64; 2],
    g: [f64; 2],
}

fn first_anchor(c: &[C64; 8], candidates: &[usize]) -> (Option<usize>, bool) {
    match candidates.iter().position(|&x| c[x].norm() >= ANCHOR_FLOOR) {
        Some(n) => (Some(candidates[n]), n > 0),
        None => (None, false),
    }
}

fn rotate(c: &mut [C64; 8], select: impl Fn(usize, usize, usize) -> bool, angle: f64) {
    let phase = C64::from_polar(1.0, -angle);
    for (x, z) in c.iter_mut().enumerate() {
        let (i, j, k) = split_index(x);
        if select(i, j, k) {
            *z *= phase;
        }
    }
}

pub fn canonical_coordinates(t: &StateTensor) -> Result<CanonicalData> {
    require_normalized(t)?;
    let mut sd = schmidt(t)?;
    for p in Party::ALL {
        if sd.gaps[p.position()].abs() < DEGENERACY_GAP {
            return Err(Error::DegenerateSpectrum(p));
        }
    }

    let [phi, theta, chi] = sd.bases;
    let mut c = [C64::new(0.0, 0.0); 8];
    for (x, z) in c.iter_mut().enumerate() {
        let (i, j, k) = split_index(x);
        for y in 0..8 {
            let (a, b, g) = split_index(y);
            *z += phi[(a, i)].conj() * theta[(b, j)].conj() * chi[(g, k)].conj()
                * t.amplitudes()[y];
        }
    }

    let mut ph = Phases { a: [0.0; 2], b: [0.0; 2], g: [0.0; 2] };
    let mut log = Vec::with_capacity(4);

    // phi_0, phi_1: any coordinate with the matching first index.
    for (i, name) in [(0usize, "phi_0"), (1, "phi_1")] {
        let class: Vec<usize> = (0..4).map(|n| 4 * i + n).collect();
        let (anchor, fallback) = first_anchor(&c, &class);
        if let Some(x) = anchor {
            let angle = c[x].arg();
            rotate(&mut c, |ii, _, _| ii == i, angle);
            ph.a[i] += angle;
        }
        log.push(PhaseFix { freedom: name, anchor, fallback });
    }

    // theta_0 with compensating chi_0: only the c^{i0 1} move net.
    let (anchor, fallback) = first_anchor(&c, &[0b001, 0b101]);
    if let Some(x) = anchor {
        let angle = c[x].arg();
        rotate(&mut c, |_, j, _| j == 0, angle);
        rotate(&mut c, |_, _, k| k == 0, -angle);
        ph.b[0] += angle;
        ph.g[0] -= angle;
    }
    log.push(PhaseFix { freedom: "theta_0 (+chi_0)", anchor, fallback });

    let (anchor, fallback) = first_anchor(&c, &[0b011, 0b110, 0b111, 0b010]);
    if let Some(x) = anchor {
        let angle = c[x].arg();
        rotate(&mut c, |_, j, _| j == 1, angle);
        ph.b[1] += angle;
    }
    log.push(PhaseFix { freedom: "theta_1", anchor, fallback });

    // Anchors are real and non-negative up to rounding; clear the residue.
    for fix in &log {
        if let Some(x) = fix.anchor {
            c[x] = C64::new(c[x].norm(), 0.0);
        }
    }

    for (n, angles) in [ph.a, ph.b, ph.g].iter().enumerate() {
        for (col, &angle) in angles.iter().enumerate() {
            let phase = C64::from_polar(1.0, angle);
            for r in 0..2 {
                sd.bases[n][(r, col)] *= phase;
            }
        }
    }

    let mut cd = CanonicalData {
        c,
        schmidt: sd,
        phase_log: log,
        r_matrix: Mat2::zeros(),
        det_r: 0.0,
    };
    cd.r_matrix = r_matrix(&cd);
    cd.det_r = det_r(&cd)?;
    Ok(cd)
}

/// Largest residual of each of the three Gram systems
/// `sum_{jk} c^{ijk} conj(c^{ljk}) = alpha_i^2 delta_il` (and the B, C
/// analogues).
pub fn ceqn_residuals(cd: &CanonicalData) -> [f64; 3] {
    let sd = &cd.schmidt;
    let mut out = [0.0f64; 3];
    for (slot, p) in Party::ALL.into_iter().enumerate() {
        let coeffs = sd.coefficients(p);
        let pos = p.position();
        for u in 0..2 {
            for v in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for x in 0..8 {
                    let (i, j, k) = split_index(x);
                    let idx = [i, j, k];
                    if idx[pos] != u {
                        continue;
                    }
                    let mut other = idx;
                    other[pos] = v;
                    acc += cd.c[x] * cd.get(other[0], other[1], other[2]).conj();
                }
                let want = if u == v { coeffs[u] * coeffs[u] } else { 0.0 };
                out[slot] = out[slot].max((acc - want).norm());
            }
        }
    }
    out
}

/// `3 sum alpha_i^2 beta_j^2 |c^{ijk}|^2 - sum alpha_i^6 - sum beta_j^6`,
/// which should reproduce Kempe's invariant.
pub fn canonical_i5_check(cd: &CanonicalData) -> f64 {
    let a2 = cd.schmidt.alpha.map(|x| x * x);
    let b2 = cd.schmidt.beta.map(|x| x * x);
    let mut weighted = 0.0;
    for (x, z) in cd.c.iter().enumerate() {
        let (i, j, _) = split_index(x);
        weighted += a2[i] * b2[j] * z.norm_sqr();
    }
    let cube = |v: [f64; 2]| v.iter().map(|y| y * y * y).sum::<f64>();
    3.0 * weighted - cube(a2) - cube(b2)
}

/// `R^i_j = (alpha_i^4 + alpha_i^2) delta_ij - sum_{kl} (beta_k^2 + gamma_l^2) c^{ikl} conj(c^{jkl})`.
pub fn r_matrix(cd: &CanonicalData) -> Mat2 {
    let a2 = cd.schmidt.alpha.map(|x| x * x);
    let b2 = cd.schmidt.beta.map(|x| x * x);
    let g2 = cd.schmidt.gamma.map(|x| x * x);
    Mat2::from_fn(|i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..2 {
            for l in 0..2 {
                acc += (b2[k] + g2[l]) * cd.get(i, k, l) * cd.get(j, k, l).conj();
            }
        }
        let diag = if i == j { a2[i] * a2[i] + a2[i] } else { 0.0 };
        C64::new(diag, 0.0) - acc
    })
}

pub fn det_r(cd: &CanonicalData) -> Result<f64> {
    let d = r_matrix(cd).det();
    if d.im.abs() > DET_R_IMAG_TOL {
        return Err(Error::NonRealResult { what: "det R", re: d.re, im: d.im });
    }
    Ok(d.re)
}
