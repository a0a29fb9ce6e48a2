//! Truncated bivariate polynomials.
//!
//! Coefficients are stored by total degree, then by the power of the second
//! variable: `(p, q)` lives at `n(n+1)/2 + q` with `n = p + q`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

/// Coefficient ring for [`Poly2`].
pub trait Coeff:
    Copy
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + PartialEq
    + std::fmt::Debug
{
    fn magnitude(self) -> f64;
}

impl Coeff for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Coeff for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

pub fn index(p: usize, q: usize) -> usize {
    let n = p + q;
    n * (n + 1) / 2 + q
}

pub fn len_for(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Iterates `(p, q)` in storage order.
pub fn monomials(degree: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=degree).flat_map(|n| (0..=n).map(move |q| (n - q, q)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly2<T> {
    degree: usize,
    c: Vec<T>,
}

impl<T: Coeff> Poly2<T> {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            c: vec![T::zero(); len_for(degree)],
        }
    }

    pub fn constant(degree: usize, v: T) -> Self {
        let mut out = Self::zero(degree);
        out.c[0] = v;
        out
    }

    /// The first variable (`p` direction).
    pub fn var_first(degree: usize) -> Self {
        let mut out = Self::zero(degree);
        if degree >= 1 {
            out.c[index(1, 0)] = T::one();
        }
        out
    }

    pub fn var_second(degree: usize) -> Self {
        let mut out = Self::zero(degree);
        if degree >= 1 {
            out.c[index(0, 1)] = T::one();
        }
        out
    }

    pub fn from_coeffs(degree: usize, c: Vec<T>) -> Self {
        assert_eq!(c.len(), len_for(degree), "coefficient table size");
        Self { degree, c }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, p: usize, q: usize) -> T {
        if p + q > self.degree {
            T::zero()
        } else {
            self.c[index(p, q)]
        }
    }

    pub fn set(&mut self, p: usize, q: usize, v: T) {
        assert!(p + q <= self.degree, "monomial ({p},{q}) above degree");
        self.c[index(p, q)] = v;
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            degree: self.degree,
            c: self.c.iter().map(|&v| v * k).collect(),
        }
    }

    pub fn add_constant(&self, k: T) -> Self {
        let mut out = self.clone();
        out.c[0] = out.c[0] + k;
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(usize, usize, T) -> T) -> Self {
        let mut out = self.clone();
        for (p, q) in monomials(self.degree) {
            out.c[index(p, q)] = f(p, q, self.c[index(p, q)]);
        }
        out
    }

    /// Keeps only the homogeneous part of total degree `n`.
    pub fn homogeneous(&self, n: usize) -> Self {
        self.map_coeffs(|p, q, v| if p + q == n { v } else { T::zero() })
    }

    pub fn mul_trunc(&self, other: &Self) -> Self {
        let d = self.degree.min(other.degree);
        let mut out = Self::zero(d);
        for (p1, q1) in monomials(d) {
            let a = self.c[index(p1, q1)];
            if a == T::zero() {
                continue;
            }
            for (p2, q2) in monomials(d - p1 - q1) {
                let b = other.c[index(p2, q2)];
                let k = index(p1 + p2, q1 + q2);
                out.c[k] = out.c[k] + a * b;
            }
        }
        out
    }

    /// Largest coefficient magnitude over total degrees in `range`.
    pub fn max_in_degrees(&self, range: std::ops::RangeInclusive<usize>) -> f64 {
        monomials(self.degree)
            .filter(|(p, q)| range.contains(&(p + q)))
            .map(|(p, q)| self.c[index(p, q)].magnitude())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, a: T, b: T) -> T {
        let mut pa = vec![T::one(); self.degree + 1];
        let mut pb = vec![T::one(); self.degree + 1];
        for k in 1..=self.degree {
            pa[k] = pa[k - 1] * a;
            pb[k] = pb[k - 1] * b;
        }
        monomials(self.degree).fold(T::zero(), |acc, (p, q)| {
            acc + self.c[index(p, q)] * pa[p] * pb[q]
        })
    }

    /// Substitutes polynomials for both variables, truncating at `self.degree`.
    pub fn substitute(&self, a: &Self, b: &Self) -> Self {
        let d = self.degree;
        let pa = powers(a, d);
        let pb = powers(b, d);
        let mut out = Self::zero(d);
        for (p, q) in monomials(d) {
            let k = self.c[index(p, q)];
            if k == T::zero() {
                continue;
            }
            out = out + pa[p].mul_trunc(&pb[q]).scale(k);
        }
        out
    }
}

fn powers<T: Coeff>(base: &Poly2<T>, d: usize) -> Vec<Poly2<T>> {
    let mut out = Vec::with_capacity(d + 1);
    out.push(Poly2::constant(d, T::one()));
    for k in 1..=d {
        out.push(out[k - 1].mul_trunc(base));
    }
    out
}

impl<T: Coeff> Add for Poly2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let d = self.degree.min(rhs.degree);
        let mut out = Self::zero(d);
        for (p, q) in monomials(d) {
            out.c[index(p, q)] = self.get(p, q) + rhs.get(p, q);
        }
        out
    }
}

impl<T: Coeff> Sub for Poly2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Coeff> Neg for Poly2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            degree: self.degree,
            c: self.c.into_iter().map(|v| -v).collect(),
        }
    }
}

impl<T: Coeff> Mul for Poly2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_trunc(&rhs)
    }
}

impl Add<f64> for Poly2<f64> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        self.add_constant(rhs)
    }
}

impl Sub<f64> for Poly2<f64> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        self.add_constant(-rhs)
    }
}

impl Mul<f64> for Poly2<f64> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_layout_is_dense() {
        let idx: Vec<_> = monomials(3).map(|(p, q)| index(p, q)).collect();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn product_truncates() {
        let x = Poly2::<f64>::var_first(2);
        let y = Poly2::<f64>::var_second(2);
        let s = (x.clone() + y.clone()) * (x + y);
        assert_eq!(s.get(2, 0), 1.0);
        assert_eq!(s.get(1, 1), 2.0);
        assert_eq!(s.get(0, 2), 1.0);
        let cube = s.clone() * s;
        assert_eq!(cube.max_in_degrees(0..=2), 0.0);
    }

    #[test]
    fn eval_matches_substitution() {
        let mut f = Poly2::<f64>::zero(3);
        f.set(1, 0, 2.0);
        f.set(1, 2, -1.5);
        f.set(0, 2, 0.25);
        let v = f.eval(0.3, -0.7);
        let direct = 2.0 * 0.3 - 1.5 * 0.3 * 0.49 + 0.25 * 0.49;
        assert!((v - direct).abs() < 1e-15);
    }
}
