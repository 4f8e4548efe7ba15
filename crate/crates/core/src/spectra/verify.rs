//! Executable checks for the polynomial identities: each evaluates both
//! (or all three) sides independently and records per-point residuals in a
//! [`Report`].

use std::fmt::Display;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::{eval_product_form, eval_sum_form, index_set, t_factor, RootFamily};
use crate::error::{Error, Result};
use crate::exactnum::{rational, Rational};
use crate::qcore::{
    al_salam_chihara, connection_b, connection_b_sequence,
    continuous_q_hermite, q_binomial_row, q_hermite, q_hermite_sequence, QParams,
};
use crate::report::Report;
use crate::scalar::{RealScalar, Scalar};

/// A `side x side` tensor grid of rationals with distinct coordinates,
/// enough to pin a bivariate identity of degree `< side` in each variable.
pub fn rational_grid(side: usize) -> Vec<(Rational, Rational)> {
    let s = side as i64;
    let xs: Vec<Rational> = (0..s).map(|i| rational(2 * i - s, 3) + rational(1, 5)).collect();
    let ys: Vec<Rational> = (0..s).map(|j| rational(2 * j - s, 5) - rational(1, 4)).collect();
    xs.iter()
        .flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

/// Three-way check of `p_m(x | y, q^(-(m-1)/2), q)` against its connection
/// sum and its product of `v` factors at every sample point.
///
/// The points should form a tensor grid with at least `m + 1` distinct
/// values per coordinate; fewer than `(m + 1)^2` points is rejected.
pub fn verify_factorization<T: Scalar + Display>(
    m: usize,
    params: &QParams<T>,
    points: &[(T, T)],
    rel_tol: f64,
) -> Result<Report> {
    if points.len() < (m + 1) * (m + 1) {
        return Err(Error::Domain(format!(
            "{} sample points cannot pin a degree-{m} bivariate identity",
            points.len()
        )));
    }
    let rho = params.rho(m);
    let evaluated: Vec<Result<(T, T, T)>> = points
        .par_iter()
        .map(|(x, y)| {
            Ok((
                eval_sum_form(m, x, y, params)?,
                eval_product_form(m, x, y, params)?,
                al_salam_chihara(m, x, y, &rho, params.q())?,
            ))
        })
        .collect();

    let mut report = Report::new("factorization")
        .param("m", m)
        .param("q", format!("{}", params.q()))
        .param("mode", if T::EXACT { "exact" } else { "float" });
    for ((x, y), values) in points.iter().zip(evaluated) {
        let (sum, product, recurrence) = values?;
        let residual = sum
            .deviation(&product)
            .max(sum.deviation(&recurrence))
            .max(product.deviation(&recurrence));
        let ok = sum.agrees(&product, rel_tol) && sum.agrees(&recurrence, rel_tol);
        report.record(residual, ok, || {
            json!({
                "x": x.to_string(), "y": y.to_string(),
                "sum_form": sum.to_string(),
                "product_form": product.to_string(),
                "recurrence": recurrence.to_string(),
            })
        });
    }
    report.into_result()
}

/// The three evaluations compared by [`verify_addition_formula`].
#[derive(Clone, Copy, Debug)]
pub struct AdditionTerms {
    /// `sum_k [n,k]_q q^(-k(n-k)/2) h_k(x|q) h_{n-k}(y|1/q)`.
    pub hermite_sum: f64,
    /// `e^(-in phi) (-q^((1-n)/2) e^(i(theta+phi)), -q^((1-n)/2) e^(i(phi-theta)); q)_n`.
    pub pochhammer: Complex64,
    /// `2^n prod t_{2j-1}` (n even) or `2^n prod t_{2j}` (n odd).
    pub t_product: f64,
}

impl AdditionTerms {
    pub fn evaluate(n: usize, theta: f64, phi: f64, q: f64) -> Result<Self> {
        if !(q > 0.0) || q == 1.0 {
            return Err(Error::Domain(format!("addition formula needs q in (0,1) or (1,inf), got {q}")));
        }
        let (x, y) = (theta.cos(), phi.cos());
        let params = QParams::new(q)?;
        let inv_q = 1.0 / q;

        let binom = q_binomial_row(n, &q);
        let mut hermite_sum = 0.0;
        for k in 0..=n {
            let weight = params.half_power(-((k * (n - k)) as i64));
            hermite_sum += binom[k]
                * weight
                * continuous_q_hermite(k, &x, &q)?
                * continuous_q_hermite(n - k, &y, &inv_q)?;
        }

        let scale = -params.half_power(1 - n as i64);
        let a1 = Complex64::from_polar(scale, theta + phi);
        let a2 = Complex64::from_polar(scale, phi - theta);
        let qc = Complex64::new(q, 0.0);
        let pochhammer = Complex64::from_polar(1.0, -(n as f64) * phi)
            * crate::qcore::q_pochhammer(&a1, &qc, n)
            * crate::qcore::q_pochhammer(&a2, &qc, n);

        let factors: Vec<usize> = if n % 2 == 0 {
            (1..=n / 2).map(|j| 2 * j - 1).collect()
        } else {
            (0..=n / 2).map(|j| 2 * j).collect()
        };
        let t_product = factors
            .into_iter()
            .fold(2f64.powi(n as i32), |acc, j| acc * t_factor(j, &x, &y, &params));

        Ok(AdditionTerms {
            hermite_sum: hermite_sum.check_finite("addition sum")?,
            pochhammer: pochhammer.check_finite("addition product")?,
            t_product: t_product.check_finite("t product")?,
        })
    }
}

/// Pairwise agreement of the three [`AdditionTerms`] within `rel_tol`, and a
/// real Pochhammer side: `|Im| <= imag_tol * max(1, |P|)`. The product
/// reaches 1e14 at n = 10, so its rounding noise alone exceeds any fixed
/// absolute bound near 1e-10.
pub fn verify_addition_formula(
    n: usize,
    theta: f64,
    phi: f64,
    q: f64,
    rel_tol: f64,
    imag_tol: f64,
) -> Result<Report> {
    let terms = AdditionTerms::evaluate(n, theta, phi, q)?;
    let mut report = Report::new("addition")
        .param("n", n)
        .param("theta", theta)
        .param("phi", phi)
        .param("q", q);
    let poch_re = terms.pochhammer.re;
    let residual = poch_re
        .deviation(&terms.hermite_sum)
        .max(poch_re.deviation(&terms.t_product))
        .max(terms.hermite_sum.deviation(&terms.t_product));
    let imag = terms.pochhammer.im.abs() / terms.pochhammer.norm().max(1.0);
    let ok = residual <= rel_tol && imag <= imag_tol;
    report.record(residual, ok, || {
        json!({
            "hermite_sum": terms.hermite_sum,
            "pochhammer_re": terms.pochhammer.re,
            "pochhammer_im": terms.pochhammer.im,
            "t_product": terms.t_product,
        })
    });
    report.into_result()
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `h_m(x|q) = (1-q)^(m/2) H_m(2x / sqrt(1-q) | q)` together with the
/// companion `H_m(x|q) = (-i)^m h_m(i x sqrt(q-1)/2 | q) / (q-1)^(m/2)`,
/// both through complex square roots so that `q > 1` is covered.
pub fn verify_h_h_relation(m: usize, x: f64, q: f64, rel_tol: f64) -> Result<Report> {
    if !(q > 0.0) || q == 1.0 {
        return Err(Error::Domain(format!("h/H relation needs q > 0, q != 1, got {q}")));
    }
    let qc = c(q);
    let mut report = Report::new("h-H").param("m", m).param("x", x).param("q", q);

    let lhs = continuous_q_hermite(m, &c(x), &qc)?;
    let s = c(1.0 - q).sqrt();
    let rhs = s.powi(m as i32) * q_hermite(m, &(c(2.0 * x) / s), &qc)?;
    let dev = lhs.deviation(&rhs);
    report.record(dev, dev <= rel_tol, || json!({"h": lhs.to_string(), "scaled_H": rhs.to_string()}));

    let lhs = q_hermite(m, &c(x), &qc)?;
    let s = c(q - 1.0).sqrt();
    let arg = I * c(x) * s / c(2.0);
    let rhs = (-I).powi(m as i32) * continuous_q_hermite(m, &arg, &qc)? / s.powi(m as i32);
    let dev = lhs.deviation(&rhs);
    report.record(dev, dev <= rel_tol, || json!({"H": lhs.to_string(), "scaled_h": rhs.to_string()}));

    report.into_result()
}

/// `B_n(y|q) = i^n q^(n(n-2)/2) H_n(i sqrt(q) y | 1/q)` for `q > 0`, plus
/// `B_n(y|q) = i^n q^(n(n-1)/2) h_n(i y sqrt(q-1)/2 | 1/q) / (q-1)^(n/2)`
/// when `q != 1`.
pub fn verify_b_h_relation(n: usize, y: f64, q: f64, rel_tol: f64) -> Result<Report> {
    if !(q > 0.0) {
        return Err(Error::Domain(format!("B/H relation is implemented for q > 0, got {q}")));
    }
    let qc = c(q);
    let inv_q = c(1.0 / q);
    let sqrt_q = q.sqrt();
    let ni = n as i32;
    let mut report = Report::new("B-H").param("n", n).param("y", y).param("q", q);

    let lhs = connection_b(n, &c(y), &qc)?;
    let rhs = I.powi(ni) * c(sqrt_q.powi(ni * (ni - 2))) * q_hermite(n, &(I * c(sqrt_q * y)), &inv_q)?;
    let dev = lhs.deviation(&rhs);
    report.record(dev, dev <= rel_tol, || json!({"B": lhs.to_string(), "scaled_H": rhs.to_string()}));

    if q != 1.0 {
        let s = c(q - 1.0).sqrt();
        let arg = I * c(y) * s / c(2.0);
        let rhs = I.powi(ni) * c(sqrt_q.powi(ni * (ni - 1))) * continuous_q_hermite(n, &arg, &inv_q)?
            / s.powi(ni);
        let dev = lhs.deviation(&rhs);
        report.record(dev, dev <= rel_tol, || json!({"B": lhs.to_string(), "scaled_h": rhs.to_string()}));
    }
    report.into_result()
}

/// The square identity `chi_k^2 + 4/(q-1) = (radical_at(k))^2` for `k` in
/// `{m, n}`, with the root re-extracted by the backend, and the composition
/// `chi_m(chi_n(y)) = chi_{m+n}(y)` with a freshly extracted inner radical.
pub fn verify_chi_properties<T: RealScalar>(
    m: i64,
    n: i64,
    y: &T,
    params: &QParams<T>,
    rel_tol: f64,
) -> Result<Report> {
    let family = RootFamily::new(y.clone(), params)?;
    let four_over = T::from_i64(4) / (params.q().clone() - T::one());
    let mut report = Report::new("chi")
        .param("m", m)
        .param("n", n)
        .param("y", y)
        .param("q", params.q());

    for k in [m, n] {
        let point = family.point(k);
        let radicand = point.clone() * point.clone() + four_over.clone();
        let displayed = family.radical_at(k);
        let square = displayed.clone() * displayed.clone();
        let extracted = radicand.sqrt()?;
        let residual = square.deviation(&radicand).max(extracted.deviation(&displayed));
        let ok = square.agrees(&radicand, rel_tol) && extracted.agrees(&displayed, rel_tol);
        report.record(residual, ok, || {
            json!({"index": k, "radicand": radicand.to_string(), "displayed_root": displayed.to_string(), "extracted_root": extracted.to_string()})
        });
    }

    let inner = RootFamily::new(family.point(n), params)?;
    let composed = inner.point(m);
    let direct = family.point(m + n);
    report.record(composed.deviation(&direct), composed.agrees(&direct, rel_tol), || {
        json!({"composed": composed.to_string(), "direct": direct.to_string()})
    });
    report.into_result()
}

/// `p_m(chi_k | y, q^(-(m-1)/2), q) = 0` for every `k` in `(m)`.
///
/// Float residuals are divided by `|p_m'(chi_k)| max(1, |chi_k|)`, i.e. they
/// measure the implied relative error in the root.
pub fn verify_support_roots<T: RealScalar>(
    m: usize,
    y: &T,
    params: &QParams<T>,
    rel_tol: f64,
) -> Result<Report> {
    let family = RootFamily::new(y.clone(), params)?;
    let rho = params.rho(m);
    let indices = index_set(m)?;
    let points: Vec<T> = indices.iter().map(|k| family.point(k)).collect();
    let mut report = Report::new("support-roots")
        .param("m", m)
        .param("y", y)
        .param("q", params.q());
    for (i, k) in indices.iter().enumerate() {
        let x = &points[i];
        let value = al_salam_chihara(m, x, y, &rho, params.q())?;
        let (residual, ok) = if T::EXACT {
            (value.magnitude(), value.is_zero())
        } else {
            let slope: f64 = points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, other)| (x.to_f64() - other.to_f64()).abs())
                .product();
            let res = value.magnitude() / (slope * x.magnitude().max(1.0));
            (res, res <= rel_tol)
        };
        report.record(residual, ok, || json!({"index": k, "point": x.to_string(), "p_m": value.to_string()}));
    }
    report.into_result()
}

/// The `q = 1` degeneration: `sum_k C(m,k) B_{m-k}(y|1) H_k(x|1) = (x - y)^m`,
/// checked exactly.
pub fn hermite_limit_identity(m: usize, x: &Rational, y: &Rational) -> Result<Report> {
    let one = <Rational as Scalar>::one();
    let hs = q_hermite_sequence(m, x, &one)?;
    let bs = connection_b_sequence(m, y, &one)?;
    let lhs = (0..=m).fold(<Rational as Scalar>::zero(), |acc, k| {
        let c = Rational::from_integer(num_integer::binomial(m as u64, k as u64).into());
        acc + c * bs[m - k].clone() * hs[k].clone()
    });
    let rhs = (x.clone() - y.clone()).powi(m as i64);
    let mut report = Report::new("hermite-limit")
        .param("m", m)
        .param("x", x)
        .param("y", y);
    report.record(lhs.deviation(&rhs), lhs == rhs, || {
        json!({"sum": lhs.to_string(), "power": rhs.to_string()})
    });
    report.into_result()
}
