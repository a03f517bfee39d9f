// SPDX-License-Identifier: MIT OR Apache-2.0

//! Weight functions on `[0, 1]` of bounded q-variation.
//!
//! Step functions are represented exactly and their q-variation is computed
//! exactly; power and polynomial weights carry closed-form norms when they
//! are monotone on `[0, 1]`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::pvar::pvar;

/// Piecewise-constant function with value `values[k-1]` on
/// `(knots[k-1], knots[k]]` and `at_zero` at `x = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    knots: Vec<f64>,
    values: Vec<f64>,
    at_zero: f64,
}

impl StepFunction {
    pub fn new(knots: Vec<f64>, values: Vec<f64>, at_zero: f64) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() + 1 {
            return Err(Error::InvalidStepFunction(format!(
                "{} knots for {} pieces; need pieces + 1 and at least two knots",
                knots.len(),
                values.len()
            )));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::InvalidStepFunction(
                "knots must start at 0 and end at 1".into(),
            ));
        }
        if knots
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
        {
            return Err(Error::InvalidStepFunction(
                "knots must be strictly increasing".into(),
            ));
        }
        if !at_zero.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidStepFunction("values must be finite".into()));
        }
        Ok(Self {
            knots,
            values,
            at_zero,
        })
    }

    /// `1_{[0, t]}` for `0 < t < 1`; the left-closed end is carried by `at_zero`.
    pub fn indicator(t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidStepFunction(format!(
                "indicator endpoint must lie in (0, 1), got {t}"
            )));
        }
        Self::new(vec![0.0, t, 1.0], vec![1.0, 0.0], 1.0)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![c], c)
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at_zero(&self) -> f64 {
        self.at_zero
    }

    pub fn pieces(&self) -> usize {
        self.values.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.at_zero;
        }
        // First knot >= x closes the piece containing x.
        let k = self.knots.partition_point(|&t| t < x);
        self.values[k.clamp(1, self.values.len()) - 1]
    }

    /// `(f(0), b_1, ..., b_m)`, the values the function attains in order.
    pub fn attained(&self) -> Vec<f64> {
        std::iter::once(self.at_zero)
            .chain(self.values.iter().copied())
            .collect()
    }

    /// `int_0^1 f^2 = sum_k b_k^2 (t_k - t_{k-1})`.
    pub fn integral_of_square(&self) -> f64 {
        self.values
            .iter()
            .zip(self.knots.windows(2))
            .map(|(b, w)| b * b * (w[1] - w[0]))
            .sum()
    }
}

/// A weight function `f: [0, 1] -> R`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFunction {
    Step(StepFunction),
    /// `x^a` with `a >= 0` (and `0^0 = 1`).
    Power {
        a: f64,
    },
    /// `sum_k coeffs[k] x^k`.
    Poly {
        coeffs: Vec<f64>,
    },
}

/// q-variation norms of a weight function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QVarNorms {
    /// `v_q(f)`.
    pub variation: f64,
    /// `||f||_(q) = v_q(f)^(1/q)`.
    pub seminorm: f64,
    /// `||f||_sup`.
    pub sup: f64,
    /// `||f||_[q] = ||f||_sup + ||f||_(q)`.
    pub full: f64,
}

impl From<StepFunction> for WeightFunction {
    fn from(s: StepFunction) -> Self {
        Self::Step(s)
    }
}

impl WeightFunction {
    pub fn power(a: f64) -> Result<Self> {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::Config(format!(
                "power exponent must be >= 0, got {a}"
            )));
        }
        Ok(Self::Power { a })
    }

    pub fn poly(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "polynomial needs at least one finite coefficient".into(),
            ));
        }
        Ok(Self::Poly { coeffs })
    }

    pub fn identity() -> Self {
        Self::Power { a: 1.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Step(s) => s.eval(x),
            Self::Power { a } => x.powf(*a),
            Self::Poly { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }

    /// `(f(1/n), ..., f(n/n))`.
    pub fn eval_grid(&self, n: usize) -> Vec<f64> {
        let nf = n as f64;
        (1..=n).map(|i| self.eval(i as f64 / nf)).collect()
    }

    /// `I(f^2) = int_0^1 f(x)^2 dx`, exact for every supported family.
    pub fn integral_of_square(&self) -> f64 {
        match self {
            Self::Step(s) => s.integral_of_square(),
            Self::Power { a } => 1.0 / (2.0 * a + 1.0),
            Self::Poly { coeffs } => {
                let mut square = vec![0.0; 2 * coeffs.len() - 1];
                for (i, a) in coeffs.iter().enumerate() {
                    for (j, b) in coeffs.iter().enumerate() {
                        square[i + j] += a * b;
                    }
                }
                square
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c / (k + 1) as f64)
                    .sum()
            }
        }
    }

    /// q-variation norms. Step functions are handled exactly for any shape;
    /// power and polynomial weights only when monotone on `[0, 1]`, where
    /// `v_q(f) = |f(1) - f(0)|^q`.
    pub fn qvar_norms(&self, q: f64) -> Result<QVarNorms> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::UnsupportedExponent {
                p: q,
                requirement: "q-variation norms require q >= 1",
            });
        }
        let (variation, sup) = match self {
            Self::Step(s) => {
                let attained = s.attained();
                let sup = attained.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                (pvar(&attained, q)?.value, sup)
            }
            Self::Power { .. } => self.monotone_norm(q),
            Self::Poly { coeffs } => {
                if !certified_monotone(coeffs) {
                    return Err(Error::UnsupportedNorm(
                        "polynomial is not certified monotone on [0, 1]".into(),
                    ));
                }
                self.monotone_norm(q)
            }
        };
        let seminorm = variation.powf(1.0 / q);
        Ok(QVarNorms {
            variation,
            seminorm,
            sup,
            full: sup + seminorm,
        })
    }

    fn monotone_norm(&self, q: f64) -> (f64, f64) {
        let (f0, f1) = (self.eval(0.0), self.eval(1.0));
        ((f1 - f0).abs().powf(q), f0.abs().max(f1.abs()))
    }
}

/// Sufficient test for monotonicity on `[0, 1]`: the Bernstein coefficients
/// of the derivative all share one sign.
fn certified_monotone(coeffs: &[f64]) -> bool {
    let deriv: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect();
    if deriv.is_empty() {
        return true;
    }
    let d = deriv.len() - 1;
    let bern: Vec<f64> = (0..=d)
        .map(|i| {
            (0..=i)
                .map(|k| binomial(i, k) / binomial(d, k) * deriv[k])
                .sum()
        })
        .collect();
    bern.iter().all(|&b| b >= 0.0) || bern.iter().all(|&b| b <= 0.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Free-function form of [`WeightFunction::eval_grid`].
pub fn eval_grid(f: &WeightFunction, n: usize) -> Vec<f64> {
    f.eval_grid(n)
}

/// Norms `(||f||_(q), ||f||_sup, ||f||_[q])` of a step function.
pub fn qvar_norm_step(f: &StepFunction, q: f64) -> Result<(f64, f64, f64)> {
    let norms = WeightFunction::Step(f.clone()).qvar_norms(q)?;
    Ok((norms.seminorm, norms.sup, norms.full))
}

/// `nu_n(f) = sum_{i=1}^n x_i f(i/n)` with `n = x.len()`.
pub fn weighted_sum(x: &[f64], f: &WeightFunction) -> f64 {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi * f.eval((i + 1) as f64 / n))
        .sum()
}

/// `(I_n(f^2), I(f^2))` with `I_n(f^2) = n^-1 sum_j f(j/n)^2`.
pub fn riemann_sums(f: &WeightFunction, n: usize) -> (f64, f64) {
    let grid_sum: f64 = f.eval_grid(n).iter().map(|v| v * v).sum();
    (grid_sum / n as f64, f.integral_of_square())
}

/// Membership in `F_{q,delta} = { f : ||f||_[q] <= 1, I(f^2) > delta }`.
pub fn is_in_fq_delta(f: &WeightFunction, q: f64, delta: f64) -> Result<bool> {
    let norms = f.qvar_norms(q)?;
    Ok(norms.full <= 1.0 && f.integral_of_square() > delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn step(knots: &[f64], values: &[f64], at_zero: f64) -> WeightFunction {
        StepFunction::new(knots.to_vec(), values.to_vec(), at_zero)
            .unwrap()
            .into()
    }

    #[test]
    fn grid_evaluation() {
        let ind: WeightFunction = StepFunction::indicator(0.5).unwrap().into();
        assert_eq!(ind.eval_grid(4), vec![1.0, 1.0, 0.0, 0.0]);
        assert_eq!(ind.eval(0.0), 1.0);
        let id = WeightFunction::identity();
        assert_eq!(id.eval_grid(3), vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
        let f = step(&[0.0, 0.3, 1.0], &[2.0, -1.0], 0.0);
        let mut expected = vec![2.0; 3];
        expected.extend([-1.0; 7]);
        assert_eq!(f.eval_grid(10), expected);
    }

    #[test]
    fn indicator_norm_is_two() {
        for t in [0.1, 0.5, 0.9] {
            for q in [1.0, 1.5, 1.9] {
                let (semi, sup, full) =
                    qvar_norm_step(&StepFunction::indicator(t).unwrap(), q).unwrap();
                assert_eq!((semi, sup, full), (1.0, 1.0, 2.0));
            }
        }
    }

    #[test]
    fn constant_norm() {
        let (semi, _, full) = qvar_norm_step(&StepFunction::constant(-0.7).unwrap(), 1.5).unwrap();
        assert_eq!(semi, 0.0);
        assert_eq!(full, 0.7);
    }

    #[test]
    fn alternating_pieces_use_pvar_of_attained_values() {
        let f = StepFunction::new(vec![0.0, 0.2, 0.6, 1.0], vec![1.0, -1.0, 1.0], 0.0).unwrap();
        for q in [1.0, 1.5, 2.0] {
            let oracle = crate::pvar::pvar_bruteforce(&[0.0, 1.0, -1.0, 1.0], q).unwrap();
            let norms = WeightFunction::Step(f.clone()).qvar_norms(q).unwrap();
            assert_eq!(norms.variation, oracle.value);
        }
    }

    #[test]
    fn weighted_sums() {
        let x = [1.0, 2.0, 3.0];
        assert_relative_eq!(weighted_sum(&x, &WeightFunction::identity()), 14.0 / 3.0);
        let one = WeightFunction::poly(vec![1.0]).unwrap();
        assert_eq!(weighted_sum(&x, &one), 6.0);
        let ind: WeightFunction = StepFunction::indicator(0.5).unwrap().into();
        let x = [0.5, -1.0, 4.0, 2.0];
        assert_eq!(weighted_sum(&x, &ind), -0.5);
    }

    #[test]
    fn riemann_examples() {
        let (i4, i) = riemann_sums(&WeightFunction::identity(), 4);
        assert_relative_eq!(i4, 15.0 / 32.0, max_relative = 1e-15);
        assert_relative_eq!(i, 1.0 / 3.0);
        let ind: WeightFunction = StepFunction::indicator(0.5).unwrap().into();
        assert_eq!(ind.integral_of_square(), 0.5);
        let f = step(&[0.0, 0.3, 1.0], &[2.0, -1.0], 0.0);
        assert_relative_eq!(f.integral_of_square(), 1.9, max_relative = 1e-15);
        let sq = WeightFunction::poly(vec![0.0, 1.0]).unwrap();
        assert_relative_eq!(sq.integral_of_square(), 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(
            WeightFunction::power(2.0).unwrap().integral_of_square(),
            0.2
        );
    }

    #[test]
    fn membership() {
        let c = WeightFunction::poly(vec![0.9]).unwrap();
        assert!(is_in_fq_delta(&c, 1.5, 0.5).unwrap());
        assert!(!is_in_fq_delta(&c, 1.5, 0.81).unwrap());
        let cs: WeightFunction = StepFunction::constant(0.9).unwrap().into();
        assert!(!is_in_fq_delta(&cs, 1.5, 0.81).unwrap());
        for t in [0.05, 0.5, 0.95] {
            let ind: WeightFunction = StepFunction::indicator(t).unwrap().into();
            assert!(!is_in_fq_delta(&ind, 1.2, 0.0).unwrap());
        }
    }

    #[test]
    fn closed_form_norms() {
        let n = WeightFunction::power(2.0).unwrap().qvar_norms(1.5).unwrap();
        assert_eq!((n.variation, n.sup, n.full), (1.0, 1.0, 2.0));
        let n = WeightFunction::power(0.0).unwrap().qvar_norms(1.5).unwrap();
        assert_eq!(n.variation, 0.0);
        // 0.2 + 0.3x is increasing
        let n = WeightFunction::poly(vec![0.2, 0.3])
            .unwrap()
            .qvar_norms(1.0)
            .unwrap();
        assert_relative_eq!(n.full, 0.5 + 0.3);
        // x - x^2 rises then falls
        assert!(matches!(
            WeightFunction::poly(vec![0.0, 1.0, -1.0])
                .unwrap()
                .qvar_norms(1.0),
            Err(Error::UnsupportedNorm(_))
        ));
        // x^3 - x^2 + x: derivative 3x^2 - 2x + 1 > 0
        assert!(certified_monotone(&[0.0, 1.0, -1.0, 1.0]));
    }

    #[test]
    fn invalid_steps() {
        assert!(StepFunction::new(vec![0.0, 0.5], vec![1.0], 0.0).is_err());
        assert!(StepFunction::new(vec![0.0, 0.5, 0.5, 1.0], vec![1.0, 2.0, 3.0], 0.0).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![1.0, 2.0], 0.0).is_err());
        assert!(StepFunction::indicator(1.0).is_err());
        assert!(WeightFunction::Step(StepFunction::constant(1.0).unwrap())
            .qvar_norms(0.5)
            .is_err());
    }
}
