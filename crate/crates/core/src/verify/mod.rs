//! Randomized verification: Haar sampling, orbit-invariance Monte Carlo and
//! the algebraic identity suite.
//!
//! Every trial draws from its own ChaCha substream keyed by `(seed, trial)`,
//! so serial and parallel runs produce identical reports.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::entanglement::{canonical_coordinates, tangles, TangleReport};
use crate::error::{Error, Result};
use crate::invariants::{
    compute_invariants, dependent_sextics, general_p, general_p_gradient_packed,
    gradient_matrix, gradient_test_state,
    jacobian_rank, kappa, kempe_i5, power_trace_product, InvariantId, Permutation,
    DEFAULT_RANK_TOL,
};
use crate::tensor_core::{
    apply_local_unitary, normalize, power_trace, reduced_density_one, reduced_density_two, Mat2,
    Pair, Party, StateTensor, UnitaryTriple,
};

pub type Stream = ChaCha20Rng;

/// Independent substream `index` of the generator seeded by `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_gaussian(rng: &mut Stream) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random element of U(2): Gram-Schmidt on a complex Ginibre matrix,
/// which leaves the triangular factor with a positive real diagonal.
pub fn haar_u2(rng: &mut Stream) -> Mat2 {
    let g = Mat2::from_fn(|_, _| complex_gaussian(rng));
    let c0 = g.column(0);
    let n0 = (c0[0].norm_sqr() + c0[1].norm_sqr()).sqrt();
    let q0 = [c0[0] / n0, c0[1] / n0];
    let c1 = g.column(1);
    let mut q1 = c1;
    // two passes keep the columns orthogonal to rounding
    for _ in 0..2 {
        let overlap = q0[0].conj() * q1[0] + q0[1].conj() * q1[1];
        q1 = [q1[0] - q0[0] * overlap, q1[1] - q0[1] * overlap];
    }
    let n1 = (q1[0].norm_sqr() + q1[1].norm_sqr()).sqrt();
    let q1 = [q1[0] / n1, q1[1] / n1];
    Mat2::from_fn(|r, c| if c == 0 { q0[r] } else { q1[r] })
}

pub fn haar_local_unitary(rng: &mut Stream) -> UnitaryTriple {
    let u_a = haar_u2(rng);
    let u_b = haar_u2(rng);
    let u_c = haar_u2(rng);
    UnitaryTriple::new(u_a, u_b, u_c)
}

/// Normalized state with i.i.d. standard complex Gaussian amplitudes.
pub fn random_state(rng: &mut Stream) -> StateTensor {
    let amp = std::array::from_fn(|_| complex_gaussian(rng));
    normalize(&StateTensor::new(amp).expect("gaussian samples are finite"))
        .expect("gaussian state is almost surely nonzero")
}

pub fn random_matrix2(rng: &mut Stream) -> Mat2 {
    Mat2::from_fn(|_, _| complex_gaussian(rng))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub trial: usize,
    pub quantity: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialReport {
    pub trials: usize,
    pub seed: u64,
    pub quantities: Vec<String>,
    pub max_abs_dev: Vec<f64>,
    pub max_rel_dev: Vec<f64>,
    /// Sorted by trial index, then quantity order.
    pub failures: Vec<Failure>,
}

impl TrialReport {
    fn empty(trials: usize, seed: u64, quantities: &[&str]) -> Self {
        TrialReport {
            trials,
            seed,
            quantities: quantities.iter().map(|s| s.to_string()).collect(),
            max_abs_dev: vec![0.0; quantities.len()],
            max_rel_dev: vec![0.0; quantities.len()],
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Quantity with the largest relative deviation.
    pub fn worst(&self) -> Option<(&str, f64)> {
        self.quantities
            .iter()
            .zip(self.max_rel_dev.iter())
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(q, &d)| (q.as_str(), d))
    }

    pub fn max_rel(&self) -> f64 {
        self.max_rel_dev.iter().copied().fold(0.0, f64::max)
    }

    pub fn dev(&self, quantity: &str) -> Option<(f64, f64)> {
        let n = self.quantities.iter().position(|q| q == quantity)?;
        Some((self.max_abs_dev[n], self.max_rel_dev[n]))
    }
}

/// Quantities tracked along an orbit.
pub const ORBIT_QUANTITIES: [&str; 18] = [
    "I1", "I2", "I3", "I4", "I5", "I6", "|f|", "tau_AB", "tau_AC", "tau_BC", "tau_ABC",
    "tau_A(BC)", "tau_B(AC)", "tau_C(AB)", "kappa_AB", "kappa_AC", "kappa_BC", "det_R",
];

/// Values of [`ORBIT_QUANTITIES`]; `None` where undefined (tangles need a
/// normalized state, `det R` a non-degenerate one).
pub fn orbit_snapshot(t: &StateTensor) -> Result<[Option<f64>; 18]> {
    let rec = compute_invariants(t)?;
    let mut out = [None; 18];
    for (slot, v) in out.iter_mut().zip(rec.values()) {
        *slot = Some(v);
    }
    out[6] = Some(rec.f.norm());
    match tangles(t) {
        Ok(report) => {
            for (slot, v) in out[7..17].iter_mut().zip(report.values()) {
                *slot = Some(v);
            }
        }
        Err(Error::NotNormalized { .. }) => {}
        Err(e) => return Err(e),
    }
    match canonical_coordinates(t) {
        Ok(cd) => out[17] = Some(cd.det_r),
        Err(Error::NotNormalized { .. } | Error::DegenerateSpectrum(_)) => {}
        Err(e) => return Err(e),
    }
    Ok(out)
}

/// Relative deviation with denominator `1 + |reference|`.
pub fn rel_dev(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / (1.0 + reference.abs())
}

/// Orbit check against explicit group elements. Non-unitary factors surface
/// as [`Error::NonUnitary`].
pub fn invariance_check(
    t: &StateTensor,
    triples: &[UnitaryTriple],
    seed: u64,
    tol: f64,
) -> Result<TrialReport> {
    let reference = orbit_snapshot(t)?;
    let per_trial: Vec<Result<[Option<f64>; 18]>> = triples
        .par_iter()
        .map(|u| orbit_snapshot(&apply_local_unitary(t, u)?))
        .collect();
    let mut report = TrialReport::empty(triples.len(), seed, &ORBIT_QUANTITIES);
    for (trial, snap) in per_trial.into_iter().enumerate() {
        let snap = snap?;
        for q in 0..ORBIT_QUANTITIES.len() {
            let (Some(v), Some(r)) = (snap[q], reference[q]) else { continue };
            let abs = (v - r).abs();
            let rel = rel_dev(v, r);
            report.max_abs_dev[q] = report.max_abs_dev[q].max(abs);
            report.max_rel_dev[q] = report.max_rel_dev[q].max(rel);
            if rel.is_nan() || rel > tol {
                report.failures.push(Failure {
                    trial,
                    quantity: ORBIT_QUANTITIES[q].to_string(),
                    deviation: rel,
                });
            }
        }
    }
    Ok(report)
}

/// Applies `trials` fresh Haar triples to `t` and records the deviation of
/// every orbit quantity from its value at `t`.
pub fn invariance_suite(t: &StateTensor, trials: usize, seed: u64, tol: f64) -> Result<TrialReport> {
    let triples: Vec<UnitaryTriple> = (0..trials as u64)
        .map(|n| haar_local_unitary(&mut stream(seed, n)))
        .collect();
    invariance_check(t, &triples, seed, tol)
}

/// `tr(XYZ) + tr(XZY) - [trX tr(YZ) + trY tr(ZX) + trZ tr(XY) - trX trY trZ]`.
pub fn trace_identity_residual(x: &Mat2, y: &Mat2, z: &Mat2) -> f64 {
    let tr = |m: Mat2| m.trace();
    let lhs = tr(*x * *y * *z) + tr(*x * *z * *y);
    let rhs = tr(*x) * tr(*y * *z) + tr(*y) * tr(*z * *x) + tr(*z) * tr(*x * *y)
        - tr(*x) * tr(*y) * tr(*z);
    (lhs - rhs).norm()
}

/// `tr X^3 - (3/2) trX trX^2 + (1/2)(trX)^3`.
pub fn cayley_cubic_residual(x: &Mat2) -> f64 {
    let t1 = x.trace();
    let t2 = (*x * *x).trace();
    let t3 = (*x * *x * *x).trace();
    (t3 - 1.5 * t1 * t2 + 0.5 * t1 * t1 * t1).norm()
}

/// Largest disagreement among Kempe's invariant and the three
/// `3 kappa_XY - tr rho_X^3 - tr rho_Y^3` forms.
pub fn i5_forms_residual(t: &StateTensor) -> Result<f64> {
    let i5 = kempe_i5(t)?;
    let cube = |p| power_trace(&reduced_density_one(t, p), 3);
    let mut worst = 0.0f64;
    let mut forms = Vec::with_capacity(3);
    for pair in Pair::ALL {
        let (x, y) = pair.parties();
        forms.push(3.0 * kappa(t, pair)? - cube(x) - cube(y));
    }
    for (n, a) in forms.iter().enumerate() {
        worst = worst.max((a - i5).abs());
        for b in &forms[n + 1..] {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

/// `P_{s,s}`, `P_{e,s}`, `P_{s,e}` against products of power traces of
/// `rho_A`, `rho_C`, `rho_B` over the cycles of `s`, for all `s` in `S_r`.
pub fn reduction_residual(t: &StateTensor, r: usize) -> Result<f64> {
    let e = Permutation::identity(r)?;
    let mut worst = 0.0f64;
    for s in Permutation::all(r)? {
        let cases = [
            (general_p(t, &s, &s)?, Party::A),
            (general_p(t, &e, &s)?, Party::C),
            (general_p(t, &s, &e)?, Party::B),
        ];
        for (p, party) in cases {
            let want = power_trace_product(t, party, &s);
            worst = worst.max((p - want).norm());
        }
    }
    Ok(worst)
}

/// `P_{k s k^-1, k t k^-1} - P_{s,t}` over all `s, t, k` in `S_r`.
pub fn conjugation_residual(t: &StateTensor, r: usize) -> Result<f64> {
    let group = Permutation::all(r)?;
    let mut table = Vec::with_capacity(group.len() * group.len());
    for s in &group {
        for tau in &group {
            table.push(general_p(t, s, tau)?);
        }
    }
    let index = |p: &Permutation| group.iter().position(|g| g == p).expect("closed under conjugation");
    let n = group.len();
    let mut worst = 0.0f64;
    for (si, s) in group.iter().enumerate() {
        for (ti, tau) in group.iter().enumerate() {
            for k in &group {
                let moved = table[index(&s.conjugate_by(k)) * n + index(&tau.conjugate_by(k))];
                worst = worst.max((moved - table[si * n + ti]).norm());
            }
        }
    }
    Ok(worst)
}

/// `tr rho_X^l - tr rho_{YZ}^l` for each one-versus-two cut and `l <= 4`.
pub fn power_sum_residual(t: &StateTensor) -> f64 {
    let mut worst = 0.0f64;
    for pair in Pair::ALL {
        let single = reduced_density_one(t, pair.complement());
        let double = reduced_density_two(t, pair);
        for l in 1..=4 {
            worst = worst.max((power_trace(&single, l) - power_trace(&double, l)).abs());
        }
    }
    worst
}

pub const IDENTITY_CHECKS: [&str; 6] = [
    "trace_identity",
    "cayley_hamilton_cubic",
    "i5_three_forms",
    "reduction_laws",
    "simultaneous_conjugation",
    "two_party_power_sums",
];

/// Residual bounds for [`IDENTITY_CHECKS`], in order.
pub const IDENTITY_BOUNDS: [f64; 6] = [1e-10, 1e-10, 1e-10, 1e-11, 1e-11, 1e-11];

/// Runs every identity check on `samples` random inputs. `max_abs_dev`
/// holds the largest residual per check; a failure is a residual above its
/// bound in [`IDENTITY_BOUNDS`].
pub fn identity_suite(seed: u64, samples: usize) -> Result<TrialReport> {
    let rows: Vec<Result<[f64; 6]>> = (0..samples)
        .into_par_iter()
        .map(|n| {
            let sub = |check: u64| stream(seed, (check << 32) | n as u64);
            let mut rng = sub(0);
            let (x, y, z) = (random_matrix2(&mut rng), random_matrix2(&mut rng), random_matrix2(&mut rng));
            let a = trace_identity_residual(&x, &y, &z);
            let b = cayley_cubic_residual(&random_matrix2(&mut sub(1)));
            let t = random_state(&mut sub(2));
            let c = i5_forms_residual(&t)?;
            let mut d = 0.0f64;
            let mut e = 0.0f64;
            for r in 1..=3 {
                d = d.max(reduction_residual(&t, r)?);
                e = e.max(conjugation_residual(&t, r)?);
            }
            let f = power_sum_residual(&t);
            Ok([a, b, c, d, e, f])
        })
        .collect();
    let mut report = TrialReport::empty(samples, seed, &IDENTITY_CHECKS);
    for (trial, row) in rows.into_iter().enumerate() {
        for (q, &res) in row?.iter().enumerate() {
            report.max_abs_dev[q] = report.max_abs_dev[q].max(res);
            report.max_rel_dev[q] = report.max_rel_dev[q].max(res);
            if res.is_nan() || res > IDENTITY_BOUNDS[q] {
                report.failures.push(Failure {
                    trial,
                    quantity: IDENTITY_CHECKS[q].to_string(),
                    deviation: res,
                });
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndependenceReport {
    /// Rank of the `I1..I6` gradients at the gradient test state.
    pub rank6: usize,
    /// Largest rank of `{I1..I5, I5', I5'', I5'''}` over the sampled states.
    pub rank_deg6: usize,
}

pub const INDEPENDENCE_SAMPLES: usize = 20;

/// Gradient rows of all invariants of degree at most 6 (the five
/// independent ones plus the three reducible sextics).
pub fn degree_six_rows(t: &StateTensor) -> Result<Vec<[f64; 16]>> {
    let mut rows: Vec<[f64; 16]> = gradient_matrix(t)[..5].to_vec();
    for (_, s, tau, _) in dependent_sextics() {
        rows.push(general_p_gradient_packed(t, &s, &tau)?);
    }
    Ok(rows)
}

pub fn independence_report(seed: u64) -> Result<IndependenceReport> {
    let rank6 = jacobian_rank(&gradient_matrix(&gradient_test_state()), DEFAULT_RANK_TOL);
    let mut rank_deg6 = 0;
    for n in 0..INDEPENDENCE_SAMPLES as u64 {
        let t = random_state(&mut stream(seed, n));
        rank_deg6 = rank_deg6.max(jacobian_rank(&degree_six_rows(&t)?, DEFAULT_RANK_TOL));
    }
    Ok(IndependenceReport { rank6, rank_deg6 })
}

/// Empirical relation between `det R` and `I6 = |f|^2` over random states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetRFit {
    pub samples: usize,
    pub skipped_degenerate: usize,
    /// Least-squares slope of `I6` against `det R` through the origin.
    pub slope: f64,
    /// `log I6 = log(prefactor) + exponent * log(det R)` by least squares.
    pub loglog_exponent: f64,
    pub loglog_prefactor: f64,
    /// `max |I6 - 4 det R|`.
    pub max_abs_residual_times_four: f64,
    /// `max |I6 - det R|`, the relation with unit constant.
    pub max_abs_residual_unit: f64,
}

pub fn fit_det_r_relation(seed: u64, samples: usize) -> Result<DetRFit> {
    let pairs: Vec<Result<Option<(f64, f64)>>> = (0..samples as u64)
        .into_par_iter()
        .map(|n| {
            let t = random_state(&mut stream(seed, n));
            match canonical_coordinates(&t) {
                Ok(cd) => Ok(Some((cd.det_r, compute_invariants(&t)?.i6))),
                Err(Error::DegenerateSpectrum(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut pts = Vec::with_capacity(samples);
    let mut skipped = 0;
    for p in pairs {
        match p? {
            Some(xy) => pts.push(xy),
            None => skipped += 1,
        }
    }
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let logs: Vec<(f64, f64)> = pts
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let m = logs.len() as f64;
    let (mx, my) = (
        logs.iter().map(|p| p.0).sum::<f64>() / m,
        logs.iter().map(|p| p.1).sum::<f64>() / m,
    );
    let cov: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let exponent = cov / var;
    let intercept = my - exponent * mx;
    Ok(DetRFit {
        samples: pts.len(),
        skipped_degenerate: skipped,
        slope: sxy / sxx,
        loglog_exponent: exponent,
        loglog_prefactor: intercept.exp(),
        max_abs_residual_times_four: pts.iter().map(|(x, y)| (y - 4.0 * x).abs()).fold(0.0, f64::max),
        max_abs_residual_unit: pts.iter().map(|(x, y)| (y - x).abs()).fold(0.0, f64::max),
    })
}

/// Relabelled copies of the invariant ids, for report headers.
pub fn invariant_names() -> [&'static str; 6] {
    InvariantId::ALL.map(|id| id.name())
}

pub fn tangle_field_names() -> [&'static str; 10] {
    TangleReport::FIELD_NAMES
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_factors_are_unitary_and_deterministic() {
        for seed in 0..20 {
            let u = haar_local_unitary(&mut stream(seed, 0));
            u.check_unitary(1e-12).unwrap();
            assert_eq!(u, haar_local_unitary(&mut stream(seed, 0)));
        }
        assert_eq!(haar_local_unitary(&mut stream(42, 0)), haar_local_unitary(&mut stream(42, 0)));
        assert_ne!(haar_local_unitary(&mut stream(42, 0)), haar_local_unitary(&mut stream(42, 1)));
    }

    #[test]
    fn haar_first_moment() {
        let mut rng = stream(5, 0);
        let n = 100_000;
        let mean = (0..n).map(|_| haar_u2(&mut rng)[(0, 0)].norm_sqr()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
    }

    #[test]
    fn random_states_are_normalized_and_reproducible() {
        let a = random_state(&mut stream(3, 7));
        assert_eq!(a, random_state(&mut stream(3, 7)));
        assert!((a.norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mean_purity_within_bounds() {
        let mut rng = stream(11, 0);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| compute_invariants(&random_state(&mut rng)).unwrap().i2)
            .sum::<f64>()
            / n as f64;
        assert!(mean > 0.5 && mean < 1.0, "{mean}");
    }

    #[test]
    fn identity_matrices_satisfy_trace_identity() {
        let i = Mat2::identity();
        // LHS 2*2 = 4; RHS 2*2 * 3 - 8 = 4.
        assert_eq!(trace_identity_residual(&i, &i, &i), 0.0);
    }

    #[test]
    fn ghz_i5_forms_agree() {
        let h = 0.5f64.sqrt();
        let t = StateTensor::from_real([h, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, h]).unwrap();
        assert!(i5_forms_residual(&t).unwrap() < 1e-15);
        for pair in Pair::ALL {
            let (x, y) = pair.parties();
            let cube = |p| power_trace(&reduced_density_one(&t, p), 3);
            let form = 3.0 * kappa(&t, pair).unwrap() - cube(x) - cube(y);
            assert!((form - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_suite_seed_7() {
        let report = identity_suite(7, 100).unwrap();
        assert!(report.passed(), "{:?}", report.failures);
        for res in &report.max_abs_dev {
            assert!(*res < 1e-10);
        }
    }

    #[test]
    fn orbit_suite_ghz_and_random() {
        let h = 0.5f64.sqrt();
        let ghz = StateTensor::from_real([h, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, h]).unwrap();
        let report = invariance_suite(&ghz, 1000, 1, 1e-10).unwrap();
        assert!(report.passed(), "{:?}", report.worst());
        // degenerate marginals: det R undefined, so its deviation stays zero
        assert_eq!(report.dev("det_R"), Some((0.0, 0.0)));
        let t = random_state(&mut stream(2, 0));
        let report = invariance_suite(&t, 1000, 3, 1e-10).unwrap();
        assert!(report.passed(), "{:?}", report.worst());
    }

    #[test]
    fn injected_non_unitary_triple_surfaces() {
        let t = random_state(&mut stream(2, 0));
        let mut triples = vec![haar_local_unitary(&mut stream(0, 0))];
        triples.push(UnitaryTriple::new(Mat2::identity(), Mat2::diag([1.0, 1.5]), Mat2::identity()));
        let err = invariance_check(&t, &triples, 0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NonUnitary { factor: 'B', .. }));
    }

    #[test]
    fn suite_is_deterministic() {
        let t = random_state(&mut stream(4, 0));
        let a = invariance_suite(&t, 64, 9, 1e-10).unwrap();
        let b = invariance_suite(&t, 64, 9, 1e-10).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| invariance_suite(&t, 64, 9, 1e-10)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn independence_examples() {
        let rep = independence_report(0).unwrap();
        assert_eq!(rep, IndependenceReport { rank6: 6, rank_deg6: 5 });
        let g1 = gradient_matrix(&gradient_test_state())[0];
        assert_eq!(jacobian_rank(&[g1], DEFAULT_RANK_TOL), 1);
    }
}
