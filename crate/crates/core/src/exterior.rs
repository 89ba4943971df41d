//! Minimal exterior algebra over the complex covectors
//! `dz_1, dz̄_1, ..., dz_n, dz̄_n` of a flat torus.
//!
//! Generators are numbered `dz_j ↦ 2j`, `dz̄_j ↦ 2j + 1` (zero-based `j`),
//! and a monomial is the bitmask of its generators taken in increasing order.
//! Used to pair forms independently of the trace identities.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::linalg::CMatrix;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Form {
    terms: BTreeMap<u32, Complex64>,
}

pub fn dz(j: usize) -> usize {
    2 * j
}

pub fn dzbar(j: usize) -> usize {
    2 * j + 1
}

/// Sign of concatenating monomial `a` with monomial `b` and sorting.
fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl Form {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        let mut f = Self::zero();
        f.terms.insert(0, Complex64::new(1.0, 0.0));
        f
    }

    /// `coef · g_1 ∧ g_2 ∧ ...` in the given (not necessarily sorted) order.
    pub fn monomial(generators: &[usize], coef: Complex64) -> Self {
        generators.iter().fold(Self::one().scaled(coef), |acc, &g| {
            acc.wedge(&Self {
                terms: BTreeMap::from([(1u32 << g, Complex64::new(1.0, 0.0))]),
            })
        })
    }

    /// `√−1 Σ_{j,k} m_{jk} dz_j ∧ dz̄_k`.
    pub fn from_hermitian(m: &CMatrix) -> Self {
        let i = Complex64::new(0.0, 1.0);
        let mut f = Self::zero();
        for j in 0..m.nrows() {
            for k in 0..m.ncols() {
                f.add_assign(&Self::monomial(&[dz(j), dzbar(k)], i * m[(j, k)]));
            }
        }
        f
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.terms.values_mut().for_each(|c| *c *= s);
        self
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (&mask, &c) in &other.terms {
            *self.terms.entry(mask).or_default() += c;
        }
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                *out.terms.entry(a | b).or_default() += ca * cb * merge_sign(a, b);
            }
        }
        out
    }

    pub fn power(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.wedge(self))
    }

    /// Coefficient of `dz_1 ∧ dz̄_1 ∧ ... ∧ dz_n ∧ dz̄_n`.
    pub fn top_coefficient(&self, n: usize) -> Complex64 {
        let mask = if n == 0 { 0 } else { (1u32 << (2 * n)) - 1 };
        self.terms.get(&mask).copied().unwrap_or_default()
    }
}
