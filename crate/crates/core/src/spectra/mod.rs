//! Index sets, the root family `chi_k(y, q)`, the quadratic factors `v_n`
//! and `t_n`, and the two evaluations of `p_m(x | y, q^(-(m-1)/2), q)`
//! (connection sum and factor product).

mod verify;

pub use verify::{
    hermite_limit_identity, rational_grid, verify_addition_formula, verify_b_h_relation,
    verify_chi_properties, verify_factorization, verify_h_h_relation, verify_support_roots,
    AdditionTerms,
};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::qcore::{connection_b_sequence, q_binomial_row, q_hermite_sequence, QParams};
use crate::scalar::{RealScalar, Scalar};

/// The `m` integers `-(m-1), -(m-3), ..., m-1`: same parity, step 2,
/// symmetric about zero. Atom indices of the order-`m` kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    m: usize,
    elements: Vec<i64>,
}

impl IndexSet {
    pub fn order(&self) -> usize {
        self.m
    }

    pub fn elements(&self) -> &[i64] {
        &self.elements
    }

    pub fn contains(&self, k: i64) -> bool {
        self.elements.binary_search(&k).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.elements.iter().copied()
    }
}

pub fn index_set(m: usize) -> Result<IndexSet> {
    if m < 1 {
        return Err(Error::Domain("index set order must be at least 1".into()));
    }
    let top = m as i64 - 1;
    Ok(IndexSet {
        m,
        elements: (0..m as i64).map(|i| -top + 2 * i).collect(),
    })
}

/// `{i + j : i in (m), j in (n)}`, which is always `(m + n - 1)`.
pub fn index_sumset(m: usize, n: usize) -> Result<IndexSet> {
    let left = index_set(m)?;
    let right = index_set(n)?;
    let sums: BTreeSet<i64> = left
        .iter()
        .flat_map(|i| right.iter().map(move |j| i + j))
        .collect();
    let expected = index_set(m + n - 1)?;
    assert_eq!(
        sums.into_iter().collect::<Vec<_>>(),
        expected.elements,
        "sumset of ({m}) and ({n}) is not ({})",
        m + n - 1
    );
    Ok(expected)
}

fn require_q_above_one<T: RealScalar>(params: &QParams<T>) -> Result<()> {
    if *params.q() <= T::one() {
        return Err(Error::Domain(format!(
            "support points need q > 1, got {}",
            params.q()
        )));
    }
    Ok(())
}

/// The support points `chi_k(y, q)` for one conditioning value `y`.
///
/// `chi_0 = y` and, for `n >= 1`, `chi_{+n}`, `chi_{-n}` are the larger and
/// smaller roots of `v_n(x, -y, q)`:
/// `y (q^(n/2) + q^(-n/2)) / 2 +- sqrt(y^2 + 4/(q-1)) (q^(n/2) - q^(-n/2)) / 2`.
/// The radical is extracted once; exact backends must be able to represent
/// it (`NotAPerfectSquare` otherwise).
#[derive(Clone, Debug)]
pub struct RootFamily<T> {
    y: T,
    radical: T,
    params: QParams<T>,
}

impl<T: RealScalar> RootFamily<T> {
    pub fn new(y: T, params: &QParams<T>) -> Result<Self> {
        require_q_above_one(params)?;
        let four = T::from_i64(4);
        let radicand = y.clone() * y.clone() + four / (params.q().clone() - T::one());
        let radical = radicand.sqrt()?;
        Ok(RootFamily {
            y,
            radical,
            params: params.clone(),
        })
    }

    pub fn y(&self) -> &T {
        &self.y
    }

    /// `sqrt(y^2 + 4/(q-1))`.
    pub fn radical(&self) -> &T {
        &self.radical
    }

    pub fn params(&self) -> &QParams<T> {
        &self.params
    }

    pub fn point(&self, k: i64) -> T {
        if k == 0 {
            return self.y.clone();
        }
        let two = T::from_i64(2);
        let up = self.params.half_power(k.abs());
        let down = T::one() / up.clone();
        let even = (up.clone() + down.clone()) / two.clone();
        let odd = (up - down) / two;
        let odd = if k > 0 { odd } else { -odd };
        self.y.clone() * even + self.radical.clone() * odd
    }

    /// `y (q^(k/2) - q^(-k/2))/2 + sqrt(y^2 + 4/(q-1)) (q^(k/2) + q^(-k/2))/2`,
    /// which is the radical belonging to `chi_k`: its square equals
    /// `chi_k^2 + 4/(q-1)`.
    pub fn radical_at(&self, k: i64) -> T {
        let two = T::from_i64(2);
        let up = self.params.half_power(k);
        let down = T::one() / up.clone();
        let odd = (up.clone() - down.clone()) / two.clone();
        let even = (up + down) / two;
        self.y.clone() * odd + self.radical.clone() * even
    }
}

/// `chi_k(y, q)`.
pub fn chi<T: RealScalar>(k: i64, y: &T, params: &QParams<T>) -> Result<T> {
    Ok(RootFamily::new(y.clone(), params)?.point(k))
}

fn quadratic_factor<T: Scalar>(n: usize, x: &T, y: &T, params: &QParams<T>, constant: T) -> T {
    let up = params.half_power(n as i64);
    let down = T::one() / up.clone();
    x.clone() * x.clone() + y.clone() * y.clone() + x.clone() * y.clone() * (up + down) + constant
}

/// `(q^n + q^(-n) - 2)`, i.e. `(q^(n/2) - q^(-n/2))^2`.
fn spread<T: Scalar>(n: usize, params: &QParams<T>) -> T {
    let up = params.half_power(n as i64);
    let d = up.clone() - T::one() / up;
    d.clone() * d
}

/// `v_0 = x + y`; `v_n = x^2 + y^2 + xy (q^(n/2) + q^(-n/2)) - (q^n + q^(-n) - 2)/(q - 1)`.
pub fn v_factor<T: Scalar>(n: usize, x: &T, y: &T, params: &QParams<T>) -> Result<T> {
    if n == 0 {
        return Ok(x.clone() + y.clone());
    }
    let q_minus_one = params.q().clone() - T::one();
    if q_minus_one.is_zero() {
        return Err(Error::Domain("v_n with n >= 1 needs q != 1".into()));
    }
    let constant = -(spread(n, params) / q_minus_one);
    Ok(quadratic_factor(n, x, y, params, constant))
}

/// `t_0 = x + y`; `t_n = x^2 + y^2 + xy (q^(n/2) + q^(-n/2)) + (q^n + q^(-n) - 2)/4`.
pub fn t_factor<T: Scalar>(n: usize, x: &T, y: &T, params: &QParams<T>) -> T {
    if n == 0 {
        return x.clone() + y.clone();
    }
    let constant = spread(n, params) / T::from_i64(4);
    quadratic_factor(n, x, y, params, constant)
}

/// `sum_k [m, k]_q q^(-(m-1)(m-k)/2) B_{m-k}(y|q) H_k(x|q)`.
pub fn eval_sum_form<T: Scalar>(m: usize, x: &T, y: &T, params: &QParams<T>) -> Result<T> {
    let q = params.q();
    let binom = q_binomial_row(m, q);
    let hs = q_hermite_sequence(m, x, q)?;
    let bs = connection_b_sequence(m, y, q)?;
    let mut acc = T::zero();
    for k in 0..=m {
        let weight = params.half_power(-((m as i64 - 1) * (m - k) as i64));
        acc = acc + binom[k].clone() * weight * bs[m - k].clone() * hs[k].clone();
    }
    acc.check_finite("connection sum")
}

/// `prod_{j=1..i} v_{2j-1}(x, -y, q)` for `m = 2i`,
/// `prod_{j=0..i} v_{2j}(x, -y, q)` for `m = 2i + 1`.
pub fn eval_product_form<T: Scalar>(m: usize, x: &T, y: &T, params: &QParams<T>) -> Result<T> {
    let neg_y = -y.clone();
    let indices: Vec<usize> = if m % 2 == 0 {
        (1..=m / 2).map(|j| 2 * j - 1).collect()
    } else {
        (0..=m / 2).map(|j| 2 * j).collect()
    };
    let mut acc = T::one();
    for n in indices {
        acc = acc * v_factor(n, x, &neg_y, params)?;
    }
    acc.check_finite("factor product")
}
