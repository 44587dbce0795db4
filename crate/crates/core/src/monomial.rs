//! Monomial bases of homogeneous degree pieces and forms over them.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::LinearForm;
use crate::linalg::Rational;

pub type Exponent = Vec<u32>;

/// Binomial coefficient C(n, k); zero when k > n.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial fits in usize")
}

/// All exponent vectors of total degree `t` in `nvars` variables, in
/// degree-lexicographic order with X_0 the largest variable.
#[derive(Debug)]
pub struct MonomialBasis {
    degree: usize,
    nvars: usize,
    exponents: Vec<Exponent>,
    index: HashMap<Exponent, usize>,
}

fn push_exponents(nvars: usize, remaining: u32, prefix: &mut Exponent, out: &mut Vec<Exponent>) {
    if prefix.len() + 1 == nvars {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=remaining).rev() {
        prefix.push(e);
        push_exponents(nvars, remaining - e, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    pub fn new(degree: usize, nvars: usize) -> Self {
        assert!(nvars > 0, "at least one variable");
        let mut exponents = Vec::with_capacity(binomial(degree + nvars - 1, nvars - 1));
        push_exponents(nvars, degree as u32, &mut Vec::with_capacity(nvars), &mut exponents);
        let index = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Self {
            degree,
            nvars,
            exponents,
            index,
        }
    }

    /// Shared basis for degree `t` forms on P^n (n + 1 variables).
    #[allow(clippy::type_complexity)]
    pub fn cached(t: usize, n: usize) -> Arc<MonomialBasis> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("monomial cache poisoned");
        guard
            .entry((t, n))
            .or_insert_with(|| Arc::new(MonomialBasis::new(t, n + 1)))
            .clone()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exponents
    }

    pub fn exponent(&self, i: usize) -> &Exponent {
        &self.exponents[i]
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

/// A homogeneous form of degree `degree` on P^n, with coefficients over
/// `MonomialBasis::cached(degree, n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    n: usize,
    degree: usize,
    coeffs: Vec<Rational>,
}

impl Form {
    pub fn zero(n: usize, degree: usize) -> Self {
        Self {
            n,
            degree,
            coeffs: vec![Rational::zero(); binomial(degree + n, n)],
        }
    }

    pub fn from_coeffs(n: usize, degree: usize, coeffs: Vec<Rational>) -> Result<Self> {
        let expected = binomial(degree + n, n);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: coeffs.len(),
            });
        }
        Ok(Self { n, degree, coeffs })
    }

    pub fn one(n: usize) -> Self {
        Self {
            n,
            degree: 0,
            coeffs: vec![Rational::one()],
        }
    }

    pub fn monomial(n: usize, exponent: &[u32]) -> Result<Self> {
        if exponent.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: exponent.len(),
            });
        }
        let degree = exponent.iter().sum::<u32>() as usize;
        let basis = MonomialBasis::cached(degree, n);
        let mut f = Self::zero(n, degree);
        f.coeffs[basis.index_of(exponent).expect("exponent has the right degree")] = Rational::one();
        Ok(f)
    }

    pub fn linear(coeffs: &[Rational]) -> Self {
        let n = coeffs.len() - 1;
        let basis = MonomialBasis::cached(1, n);
        let mut f = Self::zero(n, 1);
        for (k, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n + 1];
            e[k] = 1;
            f.coeffs[basis.index_of(&e).expect("unit exponent")] = c.clone();
        }
        f
    }

    pub fn from_linear_form(h: &LinearForm) -> Self {
        Self::linear(h.coeffs())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, c: &Rational) -> Form {
        Form {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        if self.n != other.n || self.degree != other.degree {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                found: other.coeffs.len(),
            });
        }
        Ok(Form {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn mul(&self, other: &Form) -> Result<Form> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        let left = MonomialBasis::cached(self.degree, n);
        let right = MonomialBasis::cached(other.degree, n);
        let target = MonomialBasis::cached(self.degree + other.degree, n);
        let mut out = Form::zero(n, self.degree + other.degree);
        let mut e = vec![0u32; n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = left.exponent(i);
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                for (slot, (x, y)) in e.iter_mut().zip(ea.iter().zip(right.exponent(j))) {
                    *slot = x + y;
                }
                out.coeffs[target.index_of(&e).expect("sum has target degree")] += a * b;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Form {
        let mut acc = Form::one(self.n);
        for _ in 0..k {
            acc = acc.mul(self).expect("same ambient");
        }
        acc
    }

    /// Product of the given linear forms (1 for none).
    pub fn product_of_linear(n: usize, forms: &[LinearForm]) -> Form {
        forms.iter().fold(Form::one(n), |acc, h| {
            acc.mul(&Form::from_linear_form(h)).expect("same ambient")
        })
    }

    /// The exponents with nonzero coefficient.
    pub fn support(&self) -> Vec<Exponent> {
        let basis = MonomialBasis::cached(self.degree, self.n);
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| basis.exponent(i).clone())
            .collect()
    }
}
