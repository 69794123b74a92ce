//! Holomorphic polynomials in `n` complex variables.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial `z^alpha`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, &zj)| acc * zj.powu(e))
    }

    /// `|z^alpha|^2` without forming the complex power.
    pub fn modulus_sq(&self, z: &[Complex64]) -> f64 {
        self.0
            .iter()
            .zip(z)
            .map(|(&e, zj)| zj.norm_sqr().powi(e as i32))
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All multi-indices of total degree `<= degree` in `n` variables, graded
/// (lower degrees first), so the basis for `degree - 1` is a prefix.
pub fn monomials_up_to(n: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..=degree {
        let mut current = vec![0u32; n];
        fill_degree(n, d, 0, &mut current, &mut out);
    }
    out
}

fn fill_degree(n: usize, remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_degree(n, remaining - e, pos + 1, current, out);
    }
    current[pos] = 0;
}

/// Sparse polynomial `sum c_alpha z^alpha`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "PolyRepr", into = "PolyRepr")]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::zero(n).with_term(MultiIndex::zero(n), Complex64::new(c, 0.0))
    }

    pub fn monomial(alpha: MultiIndex, coef: Complex64) -> Self {
        Self::zero(alpha.dim()).with_term(alpha, coef)
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        terms
            .into_iter()
            .fold(Self::zero(n), |p, (a, c)| p.with_term(a, c))
    }

    /// Adds `coef * z^alpha` to the polynomial.
    pub fn with_term(mut self, alpha: MultiIndex, coef: Complex64) -> Self {
        assert_eq!(alpha.dim(), self.n, "multi-index dimension mismatch");
        let entry = self.terms.entry(alpha).or_insert(Complex64::new(0.0, 0.0));
        *entry += coef;
        self.terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        self.terms.get(alpha).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(a, c)| c * a.eval(z)).sum()
    }

    /// Keeps only the monomials selected by `keep`.
    pub fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> Polynomial {
        Self {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(a, _)| keep(a))
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        other
            .terms
            .iter()
            .fold(self.clone(), |p, (a, c)| p.with_term(a.clone(), -c))
    }
}

/// Serialized form: dimension plus `[exponents, re, im]` triples.
#[derive(Serialize, Deserialize)]
struct PolyRepr {
    n: usize,
    #[serde(default)]
    terms: Vec<(Vec<u32>, f64, f64)>,
}

impl From<PolyRepr> for Polynomial {
    fn from(r: PolyRepr) -> Self {
        let mut p = Polynomial::zero(r.n);
        for (e, re, im) in r.terms {
            if e.len() == r.n {
                p = p.with_term(MultiIndex(e), Complex64::new(re, im));
            }
        }
        p
    }
}

impl From<Polynomial> for PolyRepr {
    fn from(p: Polynomial) -> Self {
        PolyRepr {
            n: p.n,
            terms: p.terms.into_iter().map(|(a, c)| (a.0, c.re, c.im)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_enumeration() {
        let basis = monomials_up_to(2, 2);
        let expected: Vec<Vec<u32>> = vec![
            vec![0, 0],
            vec![1, 0],
            vec![0, 1],
            vec![2, 0],
            vec![1, 1],
            vec![0, 2],
        ];
        assert_eq!(basis.into_iter().map(|m| m.0).collect::<Vec<_>>(), expected);
        assert_eq!(monomials_up_to(3, 3).len(), 20);
        assert_eq!(monomials_up_to(1, 4).len(), 5);
    }

    #[test]
    fn evaluation_and_cancellation() {
        let z = [Complex64::new(0.5, 0.5), Complex64::new(0.0, 2.0)];
        let p = Polynomial::constant(2, 1.0).with_term(MultiIndex(vec![1, 1]), Complex64::new(0.0, 1.0));
        let v = p.eval(&z);
        let expect = Complex64::new(1.0, 0.0) + Complex64::i() * z[0] * z[1];
        assert!((v - expect).norm() < 1e-15);
        let q = p.sub(&p);
        assert!(q.is_zero());
        assert!((MultiIndex(vec![2, 1]).modulus_sq(&z) - (z[0] * z[0] * z[1]).norm_sqr()).abs() < 1e-14);
    }

    #[test]
    fn serde_round_trip() {
        let p = Polynomial::constant(1, 2.0).with_term(MultiIndex(vec![1]), Complex64::new(1.0, -0.5));
        let text = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }
}
