use std::fmt;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor_core::{normalize, StateTensor};
use crate::verify::stream;

/// Parameter tolerance on `sum x^2 = 1`.
pub const FAMILY_NORM_TOL: f64 = 1e-9;

/// Named state families. Amplitude parameters must be non-negative with
/// squares summing to one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    /// `a|111> + b|100>`
    Factorised { a: f64, b: f64 },
    /// `p|000> + q|111>`
    Ghz { p: f64, q: f64 },
    /// `p|100> + q|010> + r|001>`
    W { p: f64, q: f64, r: f64 },
    /// Normalized state with i.i.d. Gaussian real amplitudes.
    RandomReal { seed: u64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Factorised { .. } => "factorised",
            Family::Ghz { .. } => "ghz",
            Family::W { .. } => "w",
            Family::RandomReal { .. } => "random_real",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Factorised { a, b } => write!(f, "factorised(a={a}, b={b})"),
            Family::Ghz { p, q } => write!(f, "ghz(p={p}, q={q})"),
            Family::W { p, q, r } => write!(f, "w(p={p}, q={q}, r={r})"),
            Family::RandomReal { seed } => write!(f, "random_real(seed={seed})"),
        }
    }
}

fn check_amplitudes(params: &[f64]) -> Result<()> {
    if let Some(x) = params.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::BadParams(format!("amplitude {x} must be finite and non-negative")));
    }
    let sum: f64 = params.iter().map(|x| x * x).sum();
    if (sum - 1.0).abs() > FAMILY_NORM_TOL {
        return Err(Error::BadParams(format!(
            "squared amplitudes sum to {sum}, expected 1"
        )));
    }
    Ok(())
}

pub fn make_family(family: &Family) -> Result<StateTensor> {
    let mut amp = [0.0; 8];
    match *family {
        Family::Factorised { a, b } => {
            check_amplitudes(&[a, b])?;
            amp[0b111] = a;
            amp[0b100] = b;
        }
        Family::Ghz { p, q } => {
            check_amplitudes(&[p, q])?;
            amp[0b000] = p;
            amp[0b111] = q;
        }
        Family::W { p, q, r } => {
            check_amplitudes(&[p, q, r])?;
            amp[0b100] = p;
            amp[0b010] = q;
            amp[0b001] = r;
        }
        Family::RandomReal { seed } => {
            let mut rng = stream(seed, 0);
            for x in amp.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
            return normalize(&StateTensor::from_real(amp)?);
        }
    }
    StateTensor::from_real(amp)
}
