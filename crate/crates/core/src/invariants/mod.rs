//! Polynomial local-unitary invariants of three-qubit states.
//!
//! Labelling of the quartic invariants follows the permutation form:
//! `I2 = P_{e,(12)} = tr rho_C^2`, `I3 = P_{(12),e} = tr rho_B^2`,
//! `I4 = P_{(12),(12)} = tr rho_A^2`. `I6` is the degree-8 polynomial `|f|^2`
//! where `f` is the epsilon contraction of four copies of the state.

pub mod gradient;
pub mod permutation;

use num_complex::Complex64 as C64;

pub use gradient::{
    general_p_gradient_packed, gradient_analytic, gradient_fd, general_p_gradient, gradient_matrix,
    gradient_test_state, jacobian_rank, pack_gradient,
    InvariantId, DEFAULT_RANK_TOL,
};
pub use permutation::{Permutation, MAX_RANK};

use crate::error::{Error, Result};
use crate::tensor_core::{
    flat_index, inner_product, power_trace, reduced_density_one, reduced_density_two,
    split_index, Pair, Party, StateTensor,
};

/// Imaginary parts above `REALITY_TOL * (1 + |re|)` are reported as errors
/// for quantities that are real in exact arithmetic.
pub const REALITY_TOL: f64 = 1e-9;

/// The six invariants `I1..I6` together with the complex `f` (`I6 = |f|^2`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantRecord {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
    pub i6: f64,
    pub f: C64,
}

impl InvariantRecord {
    pub fn values(&self) -> [f64; 6] {
        [self.i1, self.i2, self.i3, self.i4, self.i5, self.i6]
    }

    /// `tr rho_X^2` under the labelling above.
    pub fn purity(&self, party: Party) -> f64 {
        match party {
            Party::A => self.i4,
            Party::B => self.i3,
            Party::C => self.i2,
        }
    }
}

pub(crate) fn real_or_err(what: &'static str, z: C64) -> Result<f64> {
    if z.im.abs() > REALITY_TOL * (1.0 + z.re.abs()) {
        Err(Error::NonRealResult { what, re: z.re, im: z.im })
    } else {
        Ok(z.re)
    }
}

/// `(I1, I2, I3, I4) = (<psi|psi>, tr rho_C^2, tr rho_B^2, tr rho_A^2)`.
pub fn quadratic_quartic(t: &StateTensor) -> (f64, f64, f64, f64) {
    let purity = |p| power_trace(&reduced_density_one(t, p), 2);
    (
        inner_product(t, t).re,
        purity(Party::C),
        purity(Party::B),
        purity(Party::A),
    )
}

/// Kempe's sextic invariant
/// `t^{i1j1k1} t^{i2j2k2} t^{i3j3k3} conj(t_{i1j2k3}) conj(t_{i2j3k1}) conj(t_{i3j1k2})`.
pub fn kempe_i5(t: &StateTensor) -> Result<f64> {
    let mut acc = C64::new(0.0, 0.0);
    for x1 in 0..8 {
        let (i1, j1, k1) = split_index(x1);
        let a1 = t.amplitudes()[x1];
        for x2 in 0..8 {
            let (i2, j2, k2) = split_index(x2);
            let a12 = a1 * t.amplitudes()[x2];
            for x3 in 0..8 {
                let (i3, j3, k3) = split_index(x3);
                acc += a12
                    * t.amplitudes()[x3]
                    * t.conj_at(i1, j2, k3)
                    * t.conj_at(i2, j3, k1)
                    * t.conj_at(i3, j1, k2);
            }
        }
    }
    real_or_err("I5", acc)
}

/// `kappa_XY = tr[(rho_X (x) rho_Y) rho_XY]`.
pub fn kappa(t: &StateTensor, pair: Pair) -> Result<f64> {
    let (x, y) = pair.parties();
    let rx = reduced_density_one(t, x).entries;
    let ry = reduced_density_one(t, y).entries;
    let rxy = reduced_density_two(t, pair).entries;
    real_or_err("kappa", (rx.kron(&ry) * rxy).trace())
}

/// The 64 non-vanishing terms of the epsilon contraction, as
/// `(sign, [flat index of each of the four state factors])`.
///
/// Pairings: `i1-i2, i3-i4, j1-j2, j3-j4, k1-k3, k2-k4`.
fn hyperdet_terms() -> impl Iterator<Item = (f64, [usize; 4])> {
    use crate::tensor_core::LEVI_CIVITA as E;
    (0..64usize).map(|bits| {
        let b = |n: usize| (bits >> n) & 1;
        let (i1, i3, j1, j3, k1, k2) = (b(0), b(1), b(2), b(3), b(4), b(5));
        let (i2, i4, j2, j4, k3, k4) = (1 - i1, 1 - i3, 1 - j1, 1 - j3, 1 - k1, 1 - k2);
        let sign = E[i1][i2] * E[i3][i4] * E[j1][j2] * E[j3][j4] * E[k1][k3] * E[k2][k4];
        (
            sign,
            [
                flat_index(i1, j1, k1),
                flat_index(i2, j2, k2),
                flat_index(i3, j3, k3),
                flat_index(i4, j4, k4),
            ],
        )
    })
}

/// The SL(2)^3-invariant quartic `f`; `|f|` is a local-unitary invariant,
/// its phase is not.
pub fn hyperdet_f(t: &StateTensor) -> C64 {
    let a = t.amplitudes();
    hyperdet_terms()
        .map(|(sign, x)| a[x[0]] * a[x[1]] * a[x[2]] * a[x[3]] * sign)
        .sum()
}

/// `df/dt^{abc}` for each flat index, by the product rule over the four slots.
pub(crate) fn hyperdet_f_gradient(t: &StateTensor) -> [C64; 8] {
    let a = t.amplitudes();
    let mut g = [C64::new(0.0, 0.0); 8];
    for (sign, x) in hyperdet_terms() {
        for slot in 0..4 {
            let rest: C64 = (0..4)
                .filter(|&s| s != slot)
                .map(|s| a[x[s]])
                .product();
            g[x[slot]] += rest * sign;
        }
    }
    g
}

pub fn compute_invariants(t: &StateTensor) -> Result<InvariantRecord> {
    let (i1, i2, i3, i4) = quadratic_quartic(t);
    let i5 = kempe_i5(t)?;
    let f = hyperdet_f(t);
    Ok(InvariantRecord { i1, i2, i3, i4, i5, i6: f.norm_sqr(), f })
}

fn check_pair(sigma: &Permutation, tau: &Permutation) -> Result<usize> {
    let r = sigma.rank();
    if r != tau.rank() {
        return Err(Error::RankMismatch(r, tau.rank()));
    }
    if r > MAX_RANK {
        return Err(Error::RankTooLarge(r));
    }
    Ok(r)
}

/// Visits every assignment of `r` flat indices, handing the callback the
/// slot indices and the product of conjugated factors
/// `prod_s conj(t_{i_s j_sigma(s) k_tau(s)})`.
fn for_each_assignment(
    t: &StateTensor,
    sigma: &Permutation,
    tau: &Permutation,
    mut visit: impl FnMut(&[usize], C64),
) {
    let r = sigma.rank();
    let mut slots = vec![0usize; r];
    let mut ijk = vec![(0usize, 0usize, 0usize); r];
    for code in 0..(1usize << (3 * r)) {
        for s in 0..r {
            slots[s] = (code >> (3 * s)) & 7;
            ijk[s] = split_index(slots[s]);
        }
        let conj_part: C64 = (0..r)
            .map(|s| t.conj_at(ijk[s].0, ijk[sigma.apply(s)].1, ijk[tau.apply(s)].2))
            .product();
        if conj_part != C64::new(0.0, 0.0) {
            visit(&slots, conj_part);
        }
    }
}

/// `P_{sigma,tau}(t)` by brute-force summation over all `2^{3r}` index
/// assignments.
pub fn general_p(t: &StateTensor, sigma: &Permutation, tau: &Permutation) -> Result<C64> {
    check_pair(sigma, tau)?;
    let a = t.amplitudes();
    let mut acc = C64::new(0.0, 0.0);
    for_each_assignment(t, sigma, tau, |slots, conj_part| {
        acc += slots.iter().map(|&x| a[x]).product::<C64>() * conj_part;
    });
    Ok(acc)
}

pub(crate) fn general_p_gradient_impl(
    t: &StateTensor,
    sigma: &Permutation,
    tau: &Permutation,
) -> Result<[C64; 8]> {
    check_pair(sigma, tau)?;
    let a = t.amplitudes();
    let mut g = [C64::new(0.0, 0.0); 8];
    for_each_assignment(t, sigma, tau, |slots, conj_part| {
        for (s, &x) in slots.iter().enumerate() {
            let rest: C64 = slots
                .iter()
                .enumerate()
                .filter(|&(s2, _)| s2 != s)
                .map(|(_, &y)| a[y])
                .product();
            g[x] += rest * conj_part;
        }
    });
    Ok(g)
}

fn perm(word: &str) -> Permutation {
    Permutation::parse(word).expect("built-in permutation word")
}

/// `(sigma, tau)` for the named invariants `I2..I5` in permutation form.
pub fn permutation_pair(which: InvariantId) -> Option<(Permutation, Permutation)> {
    match which {
        InvariantId::I1 => Some((perm("1"), perm("1"))),
        InvariantId::I2 => Some((perm("12"), perm("21"))),
        InvariantId::I3 => Some((perm("21"), perm("12"))),
        InvariantId::I4 => Some((perm("21"), perm("21"))),
        InvariantId::I5 => Some((perm("231"), perm("312"))),
        InvariantId::I6 => None,
    }
}

/// The three sextic invariants that reduce to `I5` plus lower-degree terms:
/// `I5' = P_{(12),(23)} = kappa_BC`, `I5'' = P_{(12),(123)} = kappa_AC`,
/// `I5''' = P_{(123),(12)} = kappa_AB`.
pub fn dependent_sextics() -> [(&'static str, Permutation, Permutation, Pair); 3] {
    [
        ("I5'", perm("213"), perm("132"), Pair::BC),
        ("I5''", perm("213"), perm("231"), Pair::AC),
        ("I5'''", perm("231"), perm("213"), Pair::AB),
    ]
}

/// Product of `tr rho_X^l` over the cycle lengths `l` of `sigma`.
pub fn power_trace_product(t: &StateTensor, party: Party, sigma: &Permutation) -> f64 {
    let rho = reduced_density_one(t, party);
    sigma
        .cycle_lengths()
        .iter()
        .map(|&l| power_trace(&rho, l as u32))
        .product()
}

/// If `P_{sigma,tau}` reduces to power traces of a single marginal
/// (`sigma = tau`: A, `sigma = e`: C, `tau = e`: B), returns that product.
pub fn reduction(t: &StateTensor, sigma: &Permutation, tau: &Permutation) -> Option<(Party, f64)> {
    if sigma.rank() != tau.rank() {
        return None;
    }
    let party = if sigma == tau {
        Party::A
    } else if sigma.is_identity() {
        Party::C
    } else if tau.is_identity() {
        Party::B
    } else {
        return None;
    };
    let cycles_of = if party == Party::C { tau } else { sigma };
    Some((party, power_trace_product(t, party, cycles_of)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::{normalize, LEVI_CIVITA};

    fn ghz() -> StateTensor {
        let h = 0.5f64.sqrt();
        StateTensor::from_real([h, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, h]).unwrap()
    }

    fn w(p: f64, q: f64, r: f64) -> StateTensor {
        StateTensor::from_real([0.0, r, q, 0.0, p, 0.0, 0.0, 0.0]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    /// Independent oracle: the full 2^12 sum with the epsilon table.
    fn hyperdet_brute(t: &StateTensor) -> C64 {
        let e = LEVI_CIVITA;
        let mut acc = C64::new(0.0, 0.0);
        for code in 0..4096usize {
            let b = |n: usize| (code >> n) & 1;
            let (i, j, k) = ([b(0), b(1), b(2), b(3)], [b(4), b(5), b(6), b(7)], [b(8), b(9), b(10), b(11)]);
            let s = e[i[0]][i[1]] * e[i[2]][i[3]] * e[j[0]][j[1]] * e[j[2]][j[3]] * e[k[0]][k[2]] * e[k[1]][k[3]];
            if s != 0.0 {
                acc += (0..4).map(|n| t.get(i[n], j[n], k[n])).product::<C64>() * s;
            }
        }
        acc
    }

    #[test]
    fn quadratic_quartic_examples() {
        let (i1, i2, i3, i4) = quadratic_quartic(&ghz());
        close(i1, 1.0, 1e-15);
        for x in [i2, i3, i4] {
            close(x, 0.5, 1e-15);
        }
        assert_eq!(quadratic_quartic(&StateTensor::basis(0, 0, 0)), (1.0, 1.0, 1.0, 1.0));
        let s = (1.0f64 / 3.0).sqrt();
        let (i1, i2, i3, i4) = quadratic_quartic(&w(s, s, s));
        close(i1, 1.0, 1e-15);
        for x in [i2, i3, i4] {
            close(x, 5.0 / 9.0, 1e-15);
        }
    }

    #[test]
    fn quartic_labels_follow_permutation_form() {
        let (p, q, r) = (0.6f64.sqrt(), 0.25f64.sqrt(), 0.15f64.sqrt());
        let t = w(p, q, r);
        let (_, i2, i3, i4) = quadratic_quartic(&t);
        // rho_C = diag(p^2 + q^2, r^2) etc.
        close(i2, (0.85f64).powi(2) + 0.15f64.powi(2), 1e-15);
        close(i3, (0.75f64).powi(2) + 0.25f64.powi(2), 1e-15);
        close(i4, (0.4f64).powi(2) + 0.6f64.powi(2), 1e-15);
        for (id, want) in [(InvariantId::I2, i2), (InvariantId::I3, i3), (InvariantId::I4, i4)] {
            let (s, tau) = permutation_pair(id).unwrap();
            close(general_p(&t, &s, &tau).unwrap().re, want, 1e-15);
        }
    }

    #[test]
    fn kempe_examples() {
        close(kempe_i5(&ghz()).unwrap(), 0.25, 1e-15);
        let s = (1.0f64 / 3.0).sqrt();
        close(kempe_i5(&w(s, s, s)).unwrap(), 2.0 / 9.0, 1e-15);
        close(kempe_i5(&StateTensor::basis(0, 0, 0)).unwrap(), 1.0, 0.0);
    }

    #[test]
    fn kappa_examples() {
        close(kappa(&StateTensor::basis(0, 0, 0), Pair::AB).unwrap(), 1.0, 0.0);
        // Solving 1/4 = 3 kappa - 1/4 - 1/4 gives kappa = 1/4.
        let g = ghz();
        close(kappa(&g, Pair::AB).unwrap(), 0.25, 1e-15);
        let a3 = power_trace(&reduced_density_one(&g, Party::A), 3);
        let b3 = power_trace(&reduced_density_one(&g, Party::B), 3);
        close(3.0 * kappa(&g, Pair::AB).unwrap() - a3 - b3, 0.25, 1e-15);
    }

    #[test]
    fn dependent_sextics_equal_kappas() {
        let t = normalize(&StateTensor::new([
            C64::new(0.3, -0.1), C64::new(0.2, 0.4), C64::new(-0.5, 0.0), C64::new(0.1, 0.1),
            C64::new(0.0, 0.3), C64::new(0.25, -0.2), C64::new(0.1, 0.05), C64::new(-0.3, 0.2),
        ]).unwrap()).unwrap();
        for (_, s, tau, pair) in dependent_sextics() {
            let p = general_p(&t, &s, &tau).unwrap();
            close(p.re, kappa(&t, pair).unwrap(), 1e-14);
            close(p.im, 0.0, 1e-14);
        }
    }

    #[test]
    fn hyperdet_examples() {
        let (p, q) = (0.8, 0.6);
        let t = StateTensor::from_real([p, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, q]).unwrap();
        let f = hyperdet_f(&t);
        close(f.re, -2.0 * p * p * q * q, 1e-15);
        close(f.im, 0.0, 0.0);
        assert_eq!(hyperdet_f(&w(0.6, 0.7, 0.1)), C64::new(0.0, 0.0));
        assert_eq!(hyperdet_f(&StateTensor::basis(0, 0, 0)), C64::new(0.0, 0.0));
    }

    #[test]
    fn hyperdet_matches_unpruned_sum() {
        let t = StateTensor::new([
            C64::new(0.3, -0.1), C64::new(0.2, 0.4), C64::new(-0.5, 0.0), C64::new(0.1, 0.1),
            C64::new(0.0, 0.3), C64::new(0.25, -0.2), C64::new(0.1, 0.05), C64::new(-0.3, 0.2),
        ]).unwrap();
        assert!((hyperdet_f(&t) - hyperdet_brute(&t)).norm() < 1e-15);
    }

    #[test]
    fn compute_invariants_examples() {
        let r = compute_invariants(&ghz()).unwrap();
        for (got, want) in r.values().iter().zip([1.0, 0.5, 0.5, 0.5, 0.25, 0.25]) {
            close(*got, want, 1e-15);
        }
        let r = compute_invariants(&StateTensor::basis(0, 0, 0)).unwrap();
        assert_eq!(r.values(), [1.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
        let o = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let ts = StateTensor::new([z, C64::new(0.0, 1.0), z, o, o, o, z, o]).unwrap();
        let r = compute_invariants(&ts).unwrap();
        assert!(r.values().iter().all(|v| v.is_finite()));
        close(r.i6, 4.0, 1e-12);
    }

    #[test]
    fn general_p_examples() {
        let e1 = perm("1");
        for t in [ghz(), w(0.6, 0.0, 0.8), StateTensor::basis(1, 0, 1)] {
            close(general_p(&t, &e1, &e1).unwrap().re, 1.0, 1e-15);
        }
        let s = perm("21");
        close(general_p(&ghz(), &s, &s).unwrap().re, 0.5, 1e-15);
        close(general_p(&ghz(), &perm("231"), &perm("312")).unwrap().re, 0.25, 1e-15);
    }

    #[test]
    fn general_p_kempe_agreement() {
        let t = StateTensor::new([
            C64::new(0.3, -0.1), C64::new(0.2, 0.4), C64::new(-0.5, 0.0), C64::new(0.1, 0.1),
            C64::new(0.0, 0.3), C64::new(0.25, -0.2), C64::new(0.1, 0.05), C64::new(-0.3, 0.2),
        ]).unwrap();
        let (s, tau) = permutation_pair(InvariantId::I5).unwrap();
        let p = general_p(&t, &s, &tau).unwrap();
        close(p.re, kempe_i5(&t).unwrap(), 1e-15);
    }

    #[test]
    fn general_p_errors() {
        let t = ghz();
        assert_eq!(general_p(&t, &perm("12"), &perm("123")), Err(Error::RankMismatch(2, 3)));
    }

    #[test]
    fn reduction_dispatch() {
        let t = ghz();
        let (party, v) = reduction(&t, &perm("21"), &perm("21")).unwrap();
        assert_eq!(party, Party::A);
        close(v, 0.5, 1e-15);
        assert_eq!(reduction(&t, &perm("123"), &perm("213")).unwrap().0, Party::C);
        assert_eq!(reduction(&t, &perm("213"), &perm("123")).unwrap().0, Party::B);
        assert!(reduction(&t, &perm("231"), &perm("312")).is_none());
    }

    #[test]
    fn purity_accessor() {
        let r = compute_invariants(&w(0.6f64.sqrt(), 0.25f64.sqrt(), 0.15f64.sqrt())).unwrap();
        close(r.purity(Party::A), 0.16 + 0.36, 1e-15);
        assert_eq!(r.purity(Party::C), r.i2);
    }
}
