//! The conditional law `Lambda(m, y, q)` of the next state given the current
//! state `y`, its composition (Chapman-Kolmogorov), and seeded simulation of
//! the resulting chain.
//!
//! Atoms are keyed by their integer index `k` in the index set `(m)`, never
//! by floating value: composition adds indices, so two routes to the same
//! support point always land on the same key.

mod chain;

pub use chain::{
    empirical_conditional_moment, empirical_moment_against, sample_step, simulate,
    simulate_batch, simulate_with, BrycKernel, ChainConfig, MomentGroup, MomentReport,
    TransitionKernel, Trajectory, DEFAULT_SEED, DEFAULT_STATE_BOUND,
};

use std::collections::BTreeMap;

use serde_json::json;

use crate::error::{Error, Result};
use crate::exactnum::{linear_solve, QuadField, QuadraticNumber, Rational};
use crate::qcore::{al_salam_chihara_sequence, q_hermite, q_hermite_sequence, QParams};
use crate::report::Report;
use crate::scalar::{RealScalar, Scalar};
use crate::spectra::{index_set, index_sumset, RootFamily};

/// Below this a float mass counts as negative.
pub const FLOAT_NEGATIVE_MASS_TOL: f64 = 1e-10;
/// Relative tolerance of the post-solve p-system check in float mode.
const FLOAT_MOMENT_TOL: f64 = 1e-8;
/// Absolute mass tolerance for float composition checks.
pub const FLOAT_MASS_TOL: f64 = 1e-9;
/// Relative tolerance for support values in float composition checks.
const FLOAT_VALUE_TOL: f64 = 1e-9;

/// What to do with a negative mass.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MassPolicy {
    /// Fail with [`Error::NegativeMass`].
    #[default]
    Strict,
    /// Keep the signed measure; callers inspect [`ConditionalDistribution::negative_atoms`].
    Audit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub value: T,
    pub mass: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalDistribution<T> {
    m: usize,
    y: T,
    params: QParams<T>,
    atoms: BTreeMap<i64, Atom<T>>,
}

impl<T: RealScalar> ConditionalDistribution<T> {
    /// Assembles a distribution from explicit atoms without any checks.
    pub fn from_atoms(m: usize, y: T, params: QParams<T>, atoms: BTreeMap<i64, Atom<T>>) -> Self {
        ConditionalDistribution { m, y, params, atoms }
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn y(&self) -> &T {
        &self.y
    }

    pub fn params(&self) -> &QParams<T> {
        &self.params
    }

    /// `q^(-(m-1)/2)`.
    pub fn rho(&self) -> T {
        self.params.rho(self.m)
    }

    pub fn atoms(&self) -> &BTreeMap<i64, Atom<T>> {
        &self.atoms
    }

    pub fn atom(&self, k: i64) -> Option<&Atom<T>> {
        self.atoms.get(&k)
    }

    pub fn total_mass(&self) -> T {
        self.atoms
            .values()
            .fold(T::zero(), |acc, a| acc + a.mass.clone())
    }

    pub fn mean(&self) -> T {
        self.atoms
            .values()
            .fold(T::zero(), |acc, a| acc + a.mass.clone() * a.value.clone())
    }

    /// `sum_k mass_k H_j(value_k | q)`.
    pub fn hermite_moment(&self, j: usize) -> Result<T> {
        let mut acc = T::zero();
        for atom in self.atoms.values() {
            acc = acc + atom.mass.clone() * q_hermite(j, &atom.value, self.params.q())?;
        }
        Ok(acc)
    }

    /// Atoms whose mass is below zero (below `-1e-10` in float mode).
    pub fn negative_atoms(&self) -> Vec<(i64, f64)> {
        self.atoms
            .iter()
            .filter(|(_, a)| is_negative_mass(&a.mass))
            .map(|(&k, a)| (k, a.mass.to_f64()))
            .collect()
    }

    fn enforce(self, policy: MassPolicy) -> Result<Self> {
        if policy == MassPolicy::Strict {
            if let Some(&(index, value)) = self.negative_atoms().first() {
                return Err(Error::NegativeMass { index, value });
            }
        }
        Ok(self)
    }
}

fn is_negative_mass<T: RealScalar>(mass: &T) -> bool {
    if T::EXACT {
        *mass < T::zero()
    } else {
        mass.to_f64() < -FLOAT_NEGATIVE_MASS_TOL
    }
}

/// Exact-mode setup for a chain started at rational `y`: the field
/// Q(sqrt(y^2 + 4/(q-1))), the parameters (q must be a rational square
/// above 1), and `y` embedded in that field. Every later support point,
/// Hermite value and mass stays in this one field.
pub fn exact_setup(q: &Rational, y: &Rational) -> Result<(QParams<QuadraticNumber>, QuadraticNumber)> {
    let one = <Rational as Scalar>::one();
    if *q <= one {
        return Err(Error::Domain(format!("q = {q} must exceed 1")));
    }
    let d = y * y + Rational::from_integer(4.into()) / (q - one);
    let field = QuadField::new(d)?;
    let params = QParams::new(QuadraticNumber::from_rational(q.clone()))?;
    Ok((params, QuadraticNumber::rational_in(y.clone(), &field)))
}

/// `Lambda(m, y, q)`: atoms `chi_k(y, q)` for `k` in `(m)`, masses from
/// `sum lambda_k = 1`, `sum lambda_k H_j(chi_k) = q^(-j(m-1)/2) H_j(y)`,
/// `j = 1..m-1`. The solution is cross-checked against the equivalent
/// system `sum lambda_k p_j(chi_k | y, q^(-(m-1)/2), q) = 0`.
pub fn build_distribution<T: RealScalar>(
    m: usize,
    y: &T,
    params: &QParams<T>,
    policy: MassPolicy,
) -> Result<ConditionalDistribution<T>> {
    if m < 2 {
        return Err(Error::Domain(format!("kernel order m = {m} must be at least 2")));
    }
    let family = RootFamily::new(y.clone(), params)?;
    let indices = index_set(m)?;
    let points: Vec<(i64, T)> = indices.iter().map(|k| (k, family.point(k))).collect();
    for pair in points.windows(2) {
        if pair[0].1 >= pair[1].1 {
            return Err(Error::DegenerateSupport(pair[0].0, pair[1].0));
        }
    }

    let q = params.q();
    // Row j holds H_j at every support point.
    let columns: Vec<Vec<T>> = points
        .iter()
        .map(|(_, x)| q_hermite_sequence(m - 1, x, q))
        .collect::<Result<_>>()?;
    let matrix: Vec<Vec<T>> = (0..m)
        .map(|j| columns.iter().map(|col| col[j].clone()).collect())
        .collect();
    let y_hermite = q_hermite_sequence(m - 1, y, q)?;
    let rhs: Vec<T> = (0..m)
        .map(|j| params.half_power(-(j as i64) * (m as i64 - 1)) * y_hermite[j].clone())
        .collect();
    let masses = linear_solve(&matrix, &rhs)?;

    check_p_system(m, y, params, &points, &masses)?;

    let atoms = points
        .into_iter()
        .zip(masses)
        .map(|((k, value), mass)| (k, Atom { value, mass }))
        .collect();
    ConditionalDistribution::from_atoms(m, y.clone(), params.clone(), atoms).enforce(policy)
}

fn check_p_system<T: RealScalar>(
    m: usize,
    y: &T,
    params: &QParams<T>,
    points: &[(i64, T)],
    masses: &[T],
) -> Result<()> {
    let rho = params.rho(m);
    let p_values: Vec<Vec<T>> = points
        .iter()
        .map(|(_, x)| al_salam_chihara_sequence(m - 1, x, y, &rho, params.q()))
        .collect::<Result<_>>()?;
    for row in 1..m {
        let mut sum = T::zero();
        let mut scale = 1.0f64;
        for (p, mass) in p_values.iter().zip(masses) {
            let term = mass.clone() * p[row].clone();
            scale += term.magnitude();
            sum = sum + term;
        }
        let ok = if T::EXACT {
            sum.is_zero()
        } else {
            sum.magnitude() <= FLOAT_MOMENT_TOL * scale
        };
        if !ok {
            return Err(Error::MomentSystemMismatch {
                row,
                residual: sum.magnitude(),
            });
        }
    }
    Ok(())
}

/// `sum_k mass_k H_j(value_k) - q^(-j(m-1)/2) H_j(y)`. The builder forces
/// zero for `1 <= j <= m-1`; larger `j` are accepted as a diagnostic.
pub fn conditional_moment_residual<T: RealScalar>(
    dist: &ConditionalDistribution<T>,
    j: usize,
) -> Result<T> {
    let target = dist.rho().powi(j as i64) * q_hermite(j, dist.y(), dist.params().q())?;
    Ok(dist.hermite_moment(j)? - target)
}

/// Lambda(m, y, q) followed by Lambda(n, ., q): the mass at index `k` is
/// `sum_{i+j=k} lambda_i(y) lambda_j(chi_i(y))`. No comparison against a
/// direct build is made here.
pub fn compose_unchecked<T: RealScalar>(
    outer: &ConditionalDistribution<T>,
    n: usize,
) -> Result<ConditionalDistribution<T>> {
    let params = outer.params();
    let mut acc: BTreeMap<i64, Atom<T>> = BTreeMap::new();
    for (&i, first) in outer.atoms() {
        let inner = build_distribution(n, &first.value, params, MassPolicy::Audit)?;
        for (&j, second) in inner.atoms() {
            let mass = first.mass.clone() * second.mass.clone();
            match acc.get_mut(&(i + j)) {
                Some(atom) => {
                    if !atom.value.agrees(&second.value, FLOAT_VALUE_TOL) {
                        return Err(Error::CompositionMismatch {
                            index: i + j,
                            deviation: atom.value.deviation(&second.value),
                        });
                    }
                    atom.mass = atom.mass.clone() + mass;
                }
                None => {
                    acc.insert(
                        i + j,
                        Atom {
                            value: second.value.clone(),
                            mass,
                        },
                    );
                }
            }
        }
    }
    let order = outer.order() + n - 1;
    debug_assert!(acc.keys().copied().eq(index_sumset(outer.order(), n)?.iter()));
    Ok(ConditionalDistribution::from_atoms(order, outer.y().clone(), params.clone(), acc))
}

/// Per-atom deviation between two distributions over the same index set:
/// `(index, value deviation, mass deviation, agrees)`.
fn atom_deviations<T: RealScalar>(
    left: &ConditionalDistribution<T>,
    right: &ConditionalDistribution<T>,
) -> Vec<(i64, f64, f64, bool)> {
    let keys: std::collections::BTreeSet<i64> =
        left.atoms().keys().chain(right.atoms().keys()).copied().collect();
    keys.into_iter()
        .map(|k| match (left.atom(k), right.atom(k)) {
            (Some(a), Some(b)) => {
                let value_dev = a.value.deviation(&b.value);
                let mass_dev = (a.mass.clone() - b.mass.clone()).magnitude();
                let ok = if T::EXACT {
                    a == b
                } else {
                    value_dev <= FLOAT_VALUE_TOL && mass_dev <= FLOAT_MASS_TOL
                };
                (k, value_dev, mass_dev, ok)
            }
            _ => (k, f64::INFINITY, f64::INFINITY, false),
        })
        .collect()
}

/// [`compose_unchecked`], then asserts the result equals
/// `build_distribution(m + n - 1, y, q)` atom by atom.
pub fn compose<T: RealScalar>(
    outer: &ConditionalDistribution<T>,
    n: usize,
    policy: MassPolicy,
) -> Result<ConditionalDistribution<T>> {
    if n < 2 {
        return Err(Error::Domain(format!("inner kernel order n = {n} must be at least 2")));
    }
    let composed = compose_unchecked(outer, n)?;
    let direct = build_distribution(composed.order(), outer.y(), outer.params(), MassPolicy::Audit)?;
    if let Some(&(index, value_dev, mass_dev, _)) = atom_deviations(&composed, &direct)
        .iter()
        .filter(|d| !d.3)
        .max_by(|a, b| a.2.max(a.1).total_cmp(&b.2.max(b.1)))
    {
        return Err(Error::CompositionMismatch {
            index,
            deviation: value_dev.max(mass_dev),
        });
    }
    composed.enforce(policy)
}

/// The `k`-step law of the order-`m` chain, `Lambda(k(m-1) + 1, y, q)`.
pub fn k_step_distribution<T: RealScalar>(
    m: usize,
    k: usize,
    y: &T,
    params: &QParams<T>,
    policy: MassPolicy,
) -> Result<ConditionalDistribution<T>> {
    if k < 1 {
        return Err(Error::Domain("step count k must be at least 1".into()));
    }
    build_distribution(k * m - k + 1, y, params, policy)
}

fn record_atoms<T: RealScalar>(
    report: &mut Report,
    stage: &str,
    composed: &ConditionalDistribution<T>,
    direct: &ConditionalDistribution<T>,
) {
    for (k, value_dev, mass_dev, ok) in atom_deviations(composed, direct) {
        let composed_atom = composed.atom(k);
        let direct_atom = direct.atom(k);
        report.record(value_dev.max(mass_dev), ok, || {
            json!({
                "stage": stage,
                "index": k,
                "composed": composed_atom.map(|a| [a.value.to_string(), a.mass.to_string()]),
                "direct": direct_atom.map(|a| [a.value.to_string(), a.mass.to_string()]),
            })
        });
    }
}

/// Checks `Lambda(m, y, q)` composed with `Lambda(n, ., q)` against
/// `Lambda(m+n-1, y, q)`, and one level of the multi-step law: the two-step
/// kernel `Lambda(2m-1)` followed by the one-step kernel `Lambda(m)` against
/// the three-step kernel `Lambda(3m-2)`.
///
/// Exact backends require identical atoms; float backends compare masses to
/// `1e-9` absolute and values to `1e-9` relative.
pub fn verify_chapman_kolmogorov<T: RealScalar>(
    m: usize,
    n: usize,
    y: &T,
    params: &QParams<T>,
) -> Result<Report> {
    if m < 2 || n < 2 {
        return Err(Error::Domain(format!("kernel orders ({m}, {n}) must both be at least 2")));
    }
    let mut report = Report::new("chapman-kolmogorov")
        .param("m", m)
        .param("n", n)
        .param("y", y)
        .param("q", params.q())
        .param("mode", if T::EXACT { "exact" } else { "float" });

    let one_step = build_distribution(m, y, params, MassPolicy::Audit)?;
    let composed = compose_unchecked(&one_step, n)?;
    let direct = build_distribution(m + n - 1, y, params, MassPolicy::Audit)?;
    record_atoms(&mut report, "one-step", &composed, &direct);

    let two_step = k_step_distribution(m, 2, y, params, MassPolicy::Audit)?;
    let composed = compose_unchecked(&two_step, m)?;
    let three_step = k_step_distribution(m, 3, y, params, MassPolicy::Audit)?;
    record_atoms(&mut report, "multi-step", &composed, &three_step);

    report.into_result()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational;

    fn exact(q: (i64, i64), y: (i64, i64)) -> (QParams<QuadraticNumber>, QuadraticNumber) {
        exact_setup(&rational(q.0, q.1), &rational(y.0, y.1)).unwrap()
    }

    #[test]
    fn two_point_closed_form() {
        let (params, y) = exact((4, 1), (1, 1));
        let dist = build_distribution(2, &y, &params, MassPolicy::Strict).unwrap();
        let lo = &dist.atom(-1).unwrap().value;
        let hi = &dist.atom(1).unwrap().value;
        let rho = params.rho(2);
        let lambda_hi = (rho * y.clone() - lo.clone()) / (hi.clone() - lo.clone());
        assert_eq!(dist.atom(1).unwrap().mass, lambda_hi);
        assert_eq!(dist.atom(-1).unwrap().mass, QuadraticNumber::one() - lambda_hi);
        assert!((dist.atom(1).unwrap().mass.to_f64() - 0.1727).abs() < 1e-4);
        assert!((dist.atom(-1).unwrap().mass.to_f64() - 0.8273).abs() < 1e-4);
        assert_eq!(dist.total_mass(), QuadraticNumber::one());
        assert_eq!(dist.mean(), QuadraticNumber::from_rational(rational(1, 2)));
    }

    #[test]
    fn two_point_hand_values() {
        // lambda_+ = (1/2 - 5/4 + 3/4 s) / (3/2 s) with s = sqrt(7/3)
        let s = (7.0f64 / 3.0).sqrt();
        let expected = (0.5 - 1.25 + 0.75 * s) / (1.5 * s);
        let params = QParams::new(4.0).unwrap();
        let dist = build_distribution(2, &1.0, &params, MassPolicy::Strict).unwrap();
        assert!((dist.atom(1).unwrap().mass - expected).abs() < 1e-14);
        assert!((dist.atom(-1).unwrap().value - 0.104_355_7).abs() < 1e-6);
        assert!((dist.atom(1).unwrap().value - 2.395_644_3).abs() < 1e-6);
    }

    #[test]
    fn masses_sum_to_one_and_match_moments() {
        let (params, y) = exact((9, 4), (-3, 7));
        for m in 2..=6 {
            let dist = build_distribution(m, &y, &params, MassPolicy::Audit).unwrap();
            assert_eq!(dist.total_mass(), QuadraticNumber::one());
            for j in 1..m {
                assert!(conditional_moment_residual(&dist, j).unwrap().is_zero(), "m={m} j={j}");
            }
        }
    }

    #[test]
    fn moments_beyond_the_system_also_match() {
        // Only j < m enter the solve, yet the residual vanishes for higher j
        // as well: the kernel carries the full martingale property of H_j.
        let (params, y) = exact((4, 1), (1, 1));
        let dist = build_distribution(2, &y, &params, MassPolicy::Strict).unwrap();
        let residual = conditional_moment_residual(&dist, 2).unwrap();
        // Direct evaluation: sum lambda (x^2 - 1) - rho^2 (y^2 - 1).
        let direct = dist.atoms().values().fold(QuadraticNumber::zero(), |acc, a| {
            acc + a.mass.clone() * (a.value.clone() * a.value.clone() - QuadraticNumber::one())
        }) - params.rho(2).powi(2) * (y.clone() * y.clone() - QuadraticNumber::one());
        assert_eq!(residual, direct);
        assert!(residual.is_zero());
        let (params, y) = exact((9, 4), (-3, 7));
        for m in 2..=4 {
            let dist = build_distribution(m, &y, &params, MassPolicy::Strict).unwrap();
            for j in m..m + 4 {
                assert!(conditional_moment_residual(&dist, j).unwrap().is_zero(), "m={m} j={j}");
            }
        }
    }

    #[test]
    fn order_below_two_is_rejected() {
        let params = QParams::new(4.0).unwrap();
        assert!(matches!(
            build_distribution(1, &1.0, &params, MassPolicy::Strict),
            Err(Error::Domain(_))
        ));
        let params = QParams::new(0.5).unwrap();
        assert!(build_distribution(2, &1.0, &params, MassPolicy::Strict).is_err());
    }

    #[test]
    fn compose_two_with_two_gives_three() {
        let (params, y) = exact((4, 1), (1, 1));
        let one = build_distribution(2, &y, &params, MassPolicy::Strict).unwrap();
        let composed = compose(&one, 2, MassPolicy::Strict).unwrap();
        let direct = build_distribution(3, &y, &params, MassPolicy::Strict).unwrap();
        assert_eq!(composed.atoms().len(), 3);
        assert_eq!(composed, direct);
    }

    #[test]
    fn compose_support_is_the_sumset() {
        let params = QParams::new(2.25).unwrap();
        for m in 2..5 {
            for n in 2..5 {
                let outer = build_distribution(m, &0.37, &params, MassPolicy::Audit).unwrap();
                let composed = compose(&outer, n, MassPolicy::Audit).unwrap();
                let keys: Vec<i64> = composed.atoms().keys().copied().collect();
                assert_eq!(keys, index_sumset(m, n).unwrap().elements());
            }
        }
    }

    #[test]
    fn compose_two_with_three_against_order_four() {
        let (params, y) = exact((4, 1), (1, 1));
        let outer = build_distribution(2, &y, &params, MassPolicy::Strict).unwrap();
        let composed = compose(&outer, 3, MassPolicy::Audit).unwrap();
        assert_eq!(composed, build_distribution(4, &y, &params, MassPolicy::Audit).unwrap());
    }

    #[test]
    fn k_step_laws() {
        let (params, y) = exact((4, 1), (1, 1));
        let one = k_step_distribution(2, 1, &y, &params, MassPolicy::Audit).unwrap();
        assert_eq!(one, build_distribution(2, &y, &params, MassPolicy::Audit).unwrap());
        let three = k_step_distribution(2, 3, &y, &params, MassPolicy::Audit).unwrap();
        assert_eq!(three.order(), 4);
        let chained = compose(&compose(&one, 2, MassPolicy::Audit).unwrap(), 2, MassPolicy::Audit).unwrap();
        assert_eq!(chained, three);
        let two = k_step_distribution(3, 2, &y, &params, MassPolicy::Audit).unwrap();
        assert_eq!(two.order(), 5);
    }

    #[test]
    fn chapman_kolmogorov_reports() {
        let (params, y) = exact((4, 1), (1, 1));
        let report = verify_chapman_kolmogorov(2, 2, &y, &params).unwrap();
        assert_eq!(report.max_residual, 0.0);
        // 3 atoms for the one-step check and 4 for Lambda(3) vs Lambda(4)
        assert_eq!(report.points_checked, 3 + 4);

        let fparams = QParams::new(2.25).unwrap();
        let report = verify_chapman_kolmogorov(4, 3, &0.37, &fparams).unwrap();
        assert!(report.max_residual < 1e-9, "{}", report.max_residual);
    }

    #[test]
    fn nearly_coincident_support_is_singular() {
        // With q barely above 1 the atoms nearly coincide and the float
        // system loses rank.
        let params = QParams::new(1.0 + 1e-15).unwrap();
        let res = build_distribution(3, &1e10, &params, MassPolicy::Audit);
        assert!(matches!(res, Err(Error::SingularMatrix { .. })), "{res:?}");
    }

    #[test]
    fn strict_policy_rejects_negative_masses() {
        let params = QParams::new(4.0).unwrap();
        let mut atoms = BTreeMap::new();
        atoms.insert(-1, Atom { value: 0.1, mass: 1.2 });
        atoms.insert(1, Atom { value: 2.4, mass: -0.2 });
        let dist = ConditionalDistribution::from_atoms(2, 1.0, params, atoms);
        assert_eq!(dist.negative_atoms(), vec![(1, -0.2)]);
        assert!(matches!(
            dist.clone().enforce(MassPolicy::Strict),
            Err(Error::NegativeMass { index: 1, .. })
        ));
        assert!(dist.enforce(MassPolicy::Audit).is_ok());
    }
}
