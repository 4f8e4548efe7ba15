//! q-deformed combinatorics and forward three-term recurrences for the
//! q-Hermite (`H`), continuous q-Hermite (`h`), auxiliary (`B`) and
//! Al-Salam-Chihara (`p`) polynomial families.
//!
//! Every evaluator is generic over [`Scalar`], so the same code runs over
//! floats, complex floats, rationals and Q(sqrt D). Float evaluations that
//! overflow return [`Error::Overflow`] instead of infinities.

use crate::error::{Error, Result};
use crate::scalar::{RealScalar, Scalar};

/// Float tolerance for `sqrt_q^2 == q`.
const SQRT_Q_TOL: f64 = 1e-12;

/// The deformation parameter together with a stored square root, from which
/// every half-integer power `q^(n/2)` is taken.
#[derive(Clone, Debug, PartialEq)]
pub struct QParams<T> {
    q: T,
    sqrt_q: T,
}

impl<T: RealScalar> QParams<T> {
    /// Takes the root with the backend's `sqrt`; exact backends therefore
    /// require `q` to be a perfect square.
    pub fn new(q: T) -> Result<Self> {
        if q <= T::zero() {
            return Err(Error::Domain(format!("q = {q} must be positive")));
        }
        let sqrt_q = q.sqrt()?;
        Ok(QParams { q, sqrt_q })
    }
}

impl<T: Scalar> QParams<T> {
    pub fn with_sqrt(q: T, sqrt_q: T) -> Result<Self> {
        let square = sqrt_q.clone() * sqrt_q.clone();
        if !square.agrees(&q, SQRT_Q_TOL) {
            return Err(Error::Domain(format!("{sqrt_q:?} is not a square root of {q:?}")));
        }
        Ok(QParams { q, sqrt_q })
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    pub fn sqrt_q(&self) -> &T {
        &self.sqrt_q
    }

    /// `q^(n/2)`.
    pub fn half_power(&self, n: i64) -> T {
        self.sqrt_q.powi(n)
    }

    /// The correlation `q^(-(m-1)/2)` that makes the order-`m` kernel exist.
    pub fn rho(&self, m: usize) -> T {
        self.half_power(-(m as i64 - 1))
    }
}

/// `[n]_q = 1 + q + ... + q^(n-1)`, with `[0]_q = 0`.
pub fn q_bracket<T: Scalar>(n: usize, q: &T) -> T {
    let mut acc = T::zero();
    let mut power = T::one();
    for _ in 0..n {
        acc = acc + power.clone();
        power = power * q.clone();
    }
    acc
}

/// `[n]_q! = [1]_q [2]_q ... [n]_q`.
pub fn q_factorial<T: Scalar>(n: usize, q: &T) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * q_bracket(i, q))
}

/// Gaussian binomial, built from the q-Pascal rule
/// `[n, k] = [n-1, k-1] + q^k [n-1, k]` so that no division occurs and
/// `q = 1` needs no special case. Zero when `k > n`.
pub fn q_binomial<T: Scalar>(n: usize, k: usize, q: &T) -> T {
    if k > n {
        return T::zero();
    }
    q_binomial_row(n, q).swap_remove(k)
}

/// The full row `[n, 0], ..., [n, n]`.
pub fn q_binomial_row<T: Scalar>(n: usize, q: &T) -> Vec<T> {
    let mut row = vec![T::one()];
    for len in 1..=n {
        let mut next = Vec::with_capacity(len + 1);
        next.push(T::one());
        let mut qk = q.clone();
        for k in 1..len {
            next.push(row[k - 1].clone() + qk.clone() * row[k].clone());
            qk = qk * q.clone();
        }
        next.push(T::one());
        row = next;
    }
    row
}

/// `(a; q)_n = (1 - a)(1 - a q)...(1 - a q^(n-1))`.
pub fn q_pochhammer<T: Scalar>(a: &T, q: &T, n: usize) -> T {
    let mut acc = T::one();
    let mut term = a.clone();
    for _ in 0..n {
        acc = acc * (T::one() - term.clone());
        term = term * q.clone();
    }
    acc
}

/// Runs `P_{k+1} = step(k, q^k, [k]_q, P_{k-1}, P_k)` from `P_{-1} = 0`,
/// `P_0 = 1`, returning `P_0..=P_n`.
fn recurrence<T: Scalar>(
    n: usize,
    q: &T,
    what: &'static str,
    mut step: impl FnMut(usize, &T, &T, &T, &T) -> T,
) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(n + 1);
    let mut prev = T::zero();
    let mut cur = T::one();
    let mut qk = T::one();
    let mut bracket = T::zero();
    out.push(cur.clone());
    for k in 0..n {
        let next = step(k, &qk, &bracket, &prev, &cur).check_finite(what)?;
        prev = cur;
        cur = next;
        out.push(cur.clone());
        bracket = bracket + qk.clone();
        qk = qk * q.clone();
    }
    Ok(out)
}

/// `H_0..=H_n` from `x H_k = H_{k+1} + [k]_q H_{k-1}`.
pub fn q_hermite_sequence<T: Scalar>(n: usize, x: &T, q: &T) -> Result<Vec<T>> {
    recurrence(n, q, "q-Hermite recurrence", |_, _, bracket, prev, cur| {
        x.clone() * cur.clone() - bracket.clone() * prev.clone()
    })
}

/// q-Hermite polynomial `H_n(x|q)`.
pub fn q_hermite<T: Scalar>(n: usize, x: &T, q: &T) -> Result<T> {
    Ok(q_hermite_sequence(n, x, q)?.swap_remove(n))
}

/// `h_0..=h_n` from `2x h_k = h_{k+1} + (1 - q^k) h_{k-1}`.
pub fn continuous_q_hermite_sequence<T: Scalar>(n: usize, x: &T, q: &T) -> Result<Vec<T>> {
    let two_x = T::from_i64(2) * x.clone();
    recurrence(n, q, "continuous q-Hermite recurrence", |_, qk, _, prev, cur| {
        two_x.clone() * cur.clone() - (T::one() - qk.clone()) * prev.clone()
    })
}

/// Continuous q-Hermite polynomial `h_n(x|q)`.
pub fn continuous_q_hermite<T: Scalar>(n: usize, x: &T, q: &T) -> Result<T> {
    Ok(continuous_q_hermite_sequence(n, x, q)?.swap_remove(n))
}

/// `B_0..=B_n` from `B_{k+1} = -q^k y B_k + q^(k-1) [k]_q B_{k-1}`.
pub fn connection_b_sequence<T: Scalar>(n: usize, y: &T, q: &T) -> Result<Vec<T>> {
    recurrence(n, q, "B recurrence", |k, qk, bracket, prev, cur| {
        let head = -(qk.clone() * y.clone() * cur.clone());
        if k == 0 {
            head
        } else {
            head + qk.clone() / q.clone() * bracket.clone() * prev.clone()
        }
    })
}

/// Auxiliary polynomial `B_n(y|q)`, the connection coefficients between
/// the Al-Salam-Chihara and q-Hermite families.
pub fn connection_b<T: Scalar>(n: usize, y: &T, q: &T) -> Result<T> {
    Ok(connection_b_sequence(n, y, q)?.swap_remove(n))
}

/// `p_0..=p_n` from
/// `p_{k+1} = (x - rho y q^k) p_k - (1 - rho^2 q^(k-1)) [k]_q p_{k-1}`.
pub fn al_salam_chihara_sequence<T: Scalar>(
    n: usize,
    x: &T,
    y: &T,
    rho: &T,
    q: &T,
) -> Result<Vec<T>> {
    let rho_y = rho.clone() * y.clone();
    let rho2 = rho.clone() * rho.clone();
    recurrence(n, q, "Al-Salam-Chihara recurrence", |k, qk, bracket, prev, cur| {
        let head = (x.clone() - rho_y.clone() * qk.clone()) * cur.clone();
        if k == 0 {
            head
        } else {
            let damp = T::one() - rho2.clone() * qk.clone() / q.clone();
            head - damp * bracket.clone() * prev.clone()
        }
    })
}

/// Al-Salam-Chihara polynomial `p_n(x|y, rho, q)`.
pub fn al_salam_chihara<T: Scalar>(n: usize, x: &T, y: &T, rho: &T, q: &T) -> Result<T> {
    Ok(al_salam_chihara_sequence(n, x, y, rho, q)?.swap_remove(n))
}

/// `p_n` through its connection-coefficient expansion
/// `sum_k [n, k]_q rho^(n-k) B_{n-k}(y|q) H_k(x|q)`; an evaluation path
/// independent of [`al_salam_chihara`].
pub fn al_salam_chihara_expansion<T: Scalar>(
    n: usize,
    x: &T,
    y: &T,
    rho: &T,
    q: &T,
) -> Result<T> {
    let binom = q_binomial_row(n, q);
    let hs = q_hermite_sequence(n, x, q)?;
    let bs = connection_b_sequence(n, y, q)?;
    let mut acc = T::zero();
    for k in 0..=n {
        let term = binom[k].clone() * rho.powi((n - k) as i64) * bs[n - k].clone() * hs[k].clone();
        acc = acc + term;
    }
    acc.check_finite("Al-Salam-Chihara expansion")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rational, Rational};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        rational(n, d)
    }

    #[test]
    fn bracket_values() {
        assert_eq!(q_bracket(0, &r(5, 3)), r(0, 1));
        assert_eq!(q_bracket(1, &r(5, 3)), r(1, 1));
        assert_eq!(q_bracket(3, &r(2, 1)), r(7, 1));
        assert_eq!(q_bracket(4, &r(1, 1)), r(4, 1));
    }

    #[test]
    fn binomial_values() {
        let q = r(3, 5);
        for n in 0..6 {
            assert_eq!(q_binomial(n, 0, &q), r(1, 1));
            assert_eq!(q_binomial(n, n + 1, &q), r(0, 1));
        }
        assert_eq!(q_binomial(2, 1, &q), r(1, 1) + q.clone());
        // brute force (q;q)_4 / (q;q)_2^2 at q = 2
        let two = r(2, 1);
        let brute = q_pochhammer(&two, &two, 4) / (q_pochhammer(&two, &two, 2) * q_pochhammer(&two, &two, 2));
        assert_eq!(brute, r(35, 1));
        assert_eq!(q_binomial(4, 2, &two), r(35, 1));
        // q = 1 gives ordinary binomials
        assert_eq!(q_binomial(6, 3, &r(1, 1)), r(20, 1));
        assert_eq!(q_factorial(4, &r(1, 1)), r(24, 1));
    }

    #[test]
    fn pochhammer_values() {
        let q = r(7, 2);
        assert_eq!(q_pochhammer(&r(9, 4), &q, 0), r(1, 1));
        for n in 1..5 {
            assert_eq!(q_pochhammer(&r(1, 1), &q, n), r(0, 1));
        }
        assert_eq!(q_pochhammer(&r(2, 1), &r(3, 1), 2), r(5, 1));
    }

    #[test]
    fn hermite_low_orders() {
        let (x, q) = (r(7, 3), r(5, 2));
        assert_eq!(q_hermite(0, &x, &q).unwrap(), r(1, 1));
        assert_eq!(q_hermite(2, &x, &q).unwrap(), x.clone() * x.clone() - r(1, 1));
        // H_3 = x^3 - (2 + q) x, which vanishes at x = 2, q = 2.
        let h3 = x.clone() * x.clone() * x.clone() - (r(2, 1) + q.clone()) * x.clone();
        assert_eq!(q_hermite(3, &x, &q).unwrap(), h3);
        assert_eq!(q_hermite(3, &r(2, 1), &r(2, 1)).unwrap(), r(0, 1));
    }

    #[test]
    fn continuous_hermite_low_orders() {
        let (x, q) = (r(-4, 5), r(3, 7));
        assert_eq!(continuous_q_hermite(1, &x, &q).unwrap(), r(2, 1) * x.clone());
        assert_eq!(
            continuous_q_hermite(2, &x, &q).unwrap(),
            r(4, 1) * x.clone() * x.clone() - (r(1, 1) - q.clone())
        );
        assert_eq!(continuous_q_hermite(2, &r(1, 1), &r(1, 1)).unwrap(), r(4, 1));
    }

    #[test]
    fn b_family_low_orders() {
        let (y, q) = (r(3, 2), r(9, 4));
        assert_eq!(connection_b(1, &y, &q).unwrap(), -y.clone());
        assert_eq!(
            connection_b(2, &y, &q).unwrap(),
            q.clone() * y.clone() * y.clone() + r(1, 1)
        );
        assert_eq!(connection_b(2, &r(1, 1), &r(4, 1)).unwrap(), r(5, 1));
    }

    #[test]
    fn al_salam_chihara_low_orders() {
        let (x, y, rho, q) = (r(2, 3), r(-5, 7), r(1, 3), r(4, 1));
        assert_eq!(
            al_salam_chihara(1, &x, &y, &rho, &q).unwrap(),
            x.clone() - rho.clone() * y.clone()
        );
        let p2 = (x.clone() - rho.clone() * q.clone() * y.clone()) * (x.clone() - rho.clone() * y.clone())
            - (r(1, 1) - rho.clone() * rho.clone());
        assert_eq!(al_salam_chihara(2, &x, &y, &rho, &q).unwrap(), p2);

        // rho = q^(-1/2) = 1/2 at q = 4: x^2 + y^2 - xy(2 + 1/2) - (1 - 1/4)
        let half = r(1, 2);
        let closed = x.clone() * x.clone() + y.clone() * y.clone()
            - x.clone() * y.clone() * r(5, 2)
            - r(3, 4);
        assert_eq!(al_salam_chihara(2, &x, &y, &half, &q).unwrap(), closed);
        assert_eq!(al_salam_chihara_expansion(2, &x, &y, &half, &q).unwrap(), closed);
        assert_eq!(al_salam_chihara_expansion(0, &x, &y, &half, &q).unwrap(), r(1, 1));
    }

    #[test]
    fn q_params_half_powers() {
        let p = QParams::new(r(9, 4)).unwrap();
        assert_eq!(p.sqrt_q(), &r(3, 2));
        assert_eq!(p.half_power(-3), r(8, 27));
        assert_eq!(p.rho(3), r(4, 9));
        let rho = p.rho(5);
        assert_eq!(rho.clone() * rho * p.q().powi(4), r(1, 1));
        assert!(QParams::new(r(2, 1)).is_err());
        assert!(QParams::new(r(-4, 1)).is_err());
        assert!(QParams::new(2.0f64).is_ok());
        assert!(QParams::with_sqrt(r(4, 1), r(3, 1)).is_err());
    }

    #[test]
    fn float_overflow_is_reported() {
        let res = q_hermite(80, &1e3f64, &3.0);
        assert!(matches!(res, Err(Error::Overflow(_))), "{res:?}");
        assert!(q_hermite(10, &1.5f64, &2.0).is_ok());
    }

    #[test]
    fn sequences_agree_with_single_values() {
        let (x, q) = (r(1, 3), r(2, 1));
        let seq = q_hermite_sequence(6, &x, &q).unwrap();
        for (n, v) in seq.iter().enumerate() {
            assert_eq!(&q_hermite(n, &x, &q).unwrap(), v);
        }
    }

    #[test]
    fn q_factorial_against_pochhammer_and_pascal_against_quotient() {
        let q = r(5, 3);
        let one_minus_q = r(1, 1) - q.clone();
        for n in 0..=16 {
            assert_eq!(
                q_pochhammer(&q, &q, n),
                one_minus_q.powi(n as i64) * q_factorial(n, &q)
            );
            for k in 0..=n {
                let quotient = q_pochhammer(&q, &q, n)
                    / (q_pochhammer(&q, &q, k) * q_pochhammer(&q, &q, n - k));
                assert_eq!(q_binomial(n, k, &q), quotient);
            }
        }
    }

    #[test]
    fn q_equal_one_gives_classical_hermite_recurrence() {
        let x = r(-7, 4);
        let one = r(1, 1);
        let hs = q_hermite_sequence(12, &x, &one).unwrap();
        for n in 1..12 {
            assert_eq!(x.clone() * hs[n].clone(), hs[n + 1].clone() + r(n as i64, 1) * hs[n - 1].clone());
        }
    }

    #[test]
    fn integer_q_gives_integer_binomials() {
        let q = r(3, 1);
        for n in 0..10 {
            for k in 0..=n {
                assert!(q_binomial(n, k, &q).is_integer());
            }
        }
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-30i64..30, 1i64..12).prop_map(|(n, d)| r(n, d))
    }

    proptest! {
        #[test]
        fn expansion_matches_recurrence_exactly(
            n in 0usize..=16,
            x in small_rational(),
            y in small_rational(),
            rho in small_rational(),
            q in small_rational().prop_filter("q != 0", |q| !Scalar::is_zero(q)),
        ) {
            prop_assert_eq!(
                al_salam_chihara_expansion(n, &x, &y, &rho, &q).unwrap(),
                al_salam_chihara(n, &x, &y, &rho, &q).unwrap()
            );
        }

        #[test]
        fn expansion_matches_recurrence_in_floats(
            n in 0usize..=12,
            x in -2.0f64..2.0,
            y in -2.0f64..2.0,
            rho in -1.0f64..1.0,
            q in 0.1f64..3.0,
        ) {
            let rec = al_salam_chihara(n, &x, &y, &rho, &q).unwrap();
            let exp = al_salam_chihara_expansion(n, &x, &y, &rho, &q).unwrap();
            // Relative to the size of the individual terms, which is where cancellation lives.
            let binom = q_binomial_row(n, &q);
            let scale: f64 = (0..=n)
                .map(|k| (binom[k] * rho.powi((n - k) as i32)
                    * connection_b(n - k, &y, &q).unwrap()
                    * q_hermite(k, &x, &q).unwrap()).abs())
                .sum::<f64>()
                .max(1.0);
            prop_assert!((rec - exp).abs() <= 1e-9 * scale, "{rec} vs {exp}");
        }

        #[test]
        fn continuous_hermite_parity(n in 0usize..14, x in small_rational(), q in small_rational()) {
            let sign = if n % 2 == 0 { r(1, 1) } else { r(-1, 1) };
            prop_assert_eq!(
                continuous_q_hermite(n, &-x.clone(), &q).unwrap(),
                sign * continuous_q_hermite(n, &x, &q).unwrap()
            );
        }

        #[test]
        fn leading_coefficients(n in 0usize..10, q in small_rational()) {
            // The n-th finite difference with unit step isolates n! times the leading coefficient.
            let mut h_vals: Vec<Rational> = (0..=n as i64).map(|i| q_hermite(n, &r(i, 1), &q).unwrap()).collect();
            let mut c_vals: Vec<Rational> = (0..=n as i64).map(|i| continuous_q_hermite(n, &r(i, 1), &q).unwrap()).collect();
            for _ in 0..n {
                h_vals = h_vals.windows(2).map(|w| w[1].clone() - w[0].clone()).collect();
                c_vals = c_vals.windows(2).map(|w| w[1].clone() - w[0].clone()).collect();
            }
            let fact = Rational::from_integer((1..=n as i64).product::<i64>().into());
            prop_assert_eq!(&h_vals[0], &fact);
            prop_assert_eq!(&c_vals[0], &(fact * r(2, 1).powi(n as i64)));
        }
    }
}
