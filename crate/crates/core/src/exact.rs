//! Exact rational and complex-rational scalars, sparse polynomials over them.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;
/// Complex number with exact rational parts.
pub type Cq = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn cq(re: Rational, im: Rational) -> Cq {
    Complex::new(re, im)
}

pub fn cq_int(n: i64) -> Cq {
    Complex::new(rat_int(n), Rational::zero())
}

pub fn cq_real(r: Rational) -> Cq {
    Complex::new(r, Rational::zero())
}

pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn cq_to_c64(z: &Cq) -> Complex64 {
    Complex64::new(rat_to_f64(&z.re), rat_to_f64(&z.im))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn fmt_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn fmt_cq(z: &Cq) -> String {
    if z.im.is_zero() {
        return fmt_rational(&z.re);
    }
    let mut s = fmt_rational(&z.re);
    if z.im.is_negative() {
        let _ = write!(s, "-{}i", fmt_rational(&z.im.abs()));
    } else {
        let _ = write!(s, "+{}i", fmt_rational(&z.im));
    }
    s
}

/// Byte cursor shared by the text parsers.
pub(crate) struct Cursor<'a> {
    src: &'a [u8],
    pub pos: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(src: &'a str) -> Self {
        Cursor { src: src.as_bytes(), pos: 0 }
    }

    pub fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    pub fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    pub fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    pub fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(w.as_bytes()) {
            self.pos += w.len();
            true
        } else {
            false
        }
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse::<BigInt>().unwrap())
    }

    pub fn integer(&mut self) -> Result<i64> {
        self.skip_ws();
        let neg = self.eat(b'-');
        let start = self.pos;
        let v = self.digits()?;
        let v = v.to_i64().ok_or(Error::Parse { pos: start, msg: "integer out of range".into() })?;
        Ok(if neg { -v } else { v })
    }

    /// `[+-]?digits(/digits)?`, no whitespace inside.
    pub fn rational(&mut self) -> Result<Rational> {
        self.skip_ws();
        let mut neg = false;
        match self.peek() {
            Some(b'-') => {
                neg = true;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        let num = self.digits()?;
        let den = if self.peek() == Some(b'/') {
            self.pos += 1;
            let d = self.digits()?;
            if d.is_zero() {
                return self.err("zero denominator");
            }
            d
        } else {
            BigInt::one()
        };
        let r = BigRational::new(num, den);
        Ok(if neg { -r } else { r })
    }

    /// `re`, `imi`, `re+imi` or `re-imi`.
    pub fn complex(&mut self) -> Result<Cq> {
        let first = self.rational()?;
        match self.peek() {
            Some(b'i') => {
                self.pos += 1;
                Ok(cq(Rational::zero(), first))
            }
            Some(b'+') | Some(b'-') => {
                let im = self.rational()?;
                if self.peek() != Some(b'i') {
                    return self.err("expected 'i' after imaginary part");
                }
                self.pos += 1;
                Ok(cq(first, im))
            }
            _ => Ok(cq_real(first)),
        }
    }
}

pub fn parse_cq(s: &str) -> Result<Cq> {
    let mut c = Cursor::new(s);
    let v = c.complex()?;
    c.skip_ws();
    if !c.at_end() {
        return c.err("trailing characters");
    }
    Ok(v)
}

/// Scalar ring usable as polynomial coefficients.
pub trait Coeff: Clone + PartialEq + Zero + One + Neg<Output = Self> + fmt::Debug {
    fn from_int(v: &BigInt) -> Self;
}

impl Coeff for Rational {
    fn from_int(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }
}

impl Coeff for Cq {
    fn from_int(v: &BigInt) -> Self {
        cq_real(BigRational::from_integer(v.clone()))
    }
}

/// Sparse multivariate polynomial keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, T>,
}

impl<T: Coeff> Poly<T> {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        Self::monomial(vec![0; nvars], c)
    }

    pub fn monomial(exps: Vec<u32>, c: T) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, T::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &T)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: T) {
        assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.clone() * c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(self.nvars, T::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn diff(&self, var: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, c.clone() * T::from_int(&BigInt::from(e[var])));
        }
        out
    }

    /// Substitutes zero for the listed variables.
    pub fn at_zero(&self, vars: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if vars.iter().all(|&v| e[v] == 0) {
                out.add_term(e.clone(), c.clone());
            }
        }
        out
    }

    pub fn constant_term(&self) -> T {
        self.terms.get(&vec![0; self.nvars]).cloned().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }
}

impl Poly<Cq> {
    pub fn eval_c64(&self, point: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = cq_to_c64(c);
            for (x, &p) in point.iter().zip(e) {
                t *= x.powu(p);
            }
            acc += t;
        }
        acc
    }
}

/// Square matrix with exact complex-rational entries, row major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMatrix {
    r: usize,
    entries: Vec<Cq>,
}

impl QMatrix {
    pub fn zeros(r: usize) -> Self {
        QMatrix { r, entries: vec![Cq::zero(); r * r] }
    }

    pub fn identity(r: usize) -> Self {
        let mut m = Self::zeros(r);
        for i in 0..r {
            m.entries[i * r + i] = Cq::one();
        }
        m
    }

    pub fn scalar(r: usize, c: Cq) -> Self {
        let mut m = Self::zeros(r);
        for i in 0..r {
            m.entries[i * r + i] = c.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Cq>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Shape("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(r * r);
        for row in rows {
            if row.len() != r {
                return Err(Error::Shape(format!("matrix row of length {} in {r}x{r} matrix", row.len())));
            }
            entries.extend(row);
        }
        Ok(QMatrix { r, entries })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn get(&self, i: usize, j: usize) -> &Cq {
        &self.entries[i * self.r + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        QMatrix { r: self.r, entries }
    }

    pub fn neg(&self) -> Self {
        QMatrix { r: self.r, entries: self.entries.iter().map(|a| -a).collect() }
    }

    pub fn scale_rat(&self, c: &Rational) -> Self {
        let entries = self.entries.iter().map(|a| Complex::new(&a.re * c, &a.im * c)).collect();
        QMatrix { r: self.r, entries }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let r = self.r;
        let mut out = Self::zeros(r);
        for i in 0..r {
            for l in 0..r {
                let a = &self.entries[i * r + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..r {
                    let b = &other.entries[l * r + j];
                    if !b.is_zero() {
                        out.entries[i * r + j] = &out.entries[i * r + j] + a * b;
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let r = self.r;
        let mut out = Self::zeros(r);
        for i in 0..r {
            for j in 0..r {
                out.entries[j * r + i] = self.entries[i * r + j].conj();
            }
        }
        out
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cq]> {
        self.entries.chunks(self.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_text_round_trip() {
        for s in ["0", "3", "-1/2", "1/3+2/5i", "-7-1/2i", "0+1i"] {
            let v = parse_cq(s).unwrap();
            assert_eq!(parse_cq(&fmt_cq(&v)).unwrap(), v);
        }
        assert_eq!(parse_cq("2i").unwrap(), cq(rat_int(0), rat_int(2)));
        assert_eq!(parse_cq("4/6").unwrap(), cq_real(rat(2, 3)));
        assert!(parse_cq("1/0").is_err());
        assert!(parse_cq("1+2").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(factorial(5), BigInt::from(120));
    }

    #[test]
    fn poly_product_rule() {
        let x = Poly::<Rational>::var(2, 0);
        let y = Poly::<Rational>::var(2, 1);
        let p = x.add(&y).pow(3);
        assert_eq!(p.len(), 4);
        let d = p.diff(0);
        let three = Poly::constant(2, rat_int(3));
        assert_eq!(d, three.mul(&x.add(&y).pow(2)));
        assert_eq!(p.at_zero(&[1]), x.pow(3));
    }

    #[test]
    fn matrix_adjoint_reverses_products() {
        let a = QMatrix::from_rows(vec![
            vec![cq(rat(1, 2), rat_int(1)), cq_int(2)],
            vec![cq_int(0), cq(rat_int(0), rat(-1, 3))],
        ])
        .unwrap();
        let b =
            QMatrix::from_rows(vec![vec![cq_int(1), cq(rat_int(1), rat_int(1))], vec![cq_int(3), cq_int(-1)]]).unwrap();
        assert_eq!(a.mul(&b).adjoint(), b.adjoint().mul(&a.adjoint()));
    }
}
