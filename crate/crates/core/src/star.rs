//! Graded polynomial symbols in ℏ, z, z̄ with matrix coefficients and their star product.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::rc::Rc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{cq, fmt_cq, rat, Cq, Cursor, Poly, QMatrix, Rational};

/// ℏ^hbar z^alpha z̄^beta.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub hbar: i32,
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl Monomial {
    pub fn new(hbar: i32, alpha: Vec<u32>, beta: Vec<u32>) -> Self {
        Monomial { hbar, alpha, beta }
    }

    pub fn z_degree(&self) -> u32 {
        self.alpha.iter().sum::<u32>() + self.beta.iter().sum::<u32>()
    }

    /// 2ℓ + |α| + |β|.
    pub fn weight(&self) -> i64 {
        2 * self.hbar as i64 + self.z_degree() as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalSymbol {
    n: usize,
    r: usize,
    terms: BTreeMap<Monomial, QMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grade {
    Zero,
    Homogeneous(u32),
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn make_symbol(n: usize, r: usize, terms: Vec<(i32, Vec<u32>, Vec<u32>, QMatrix)>) -> Result<FormalSymbol> {
    if r == 0 {
        return Err(Error::Shape("rank must be positive".into()));
    }
    let mut s = FormalSymbol::zero(n, r);
    for (l, alpha, beta, m) in terms {
        if alpha.len() != n || beta.len() != n {
            return Err(Error::Shape(format!("multi-indices of length {}/{} for n = {n}", alpha.len(), beta.len())));
        }
        if m.rank() != r {
            return Err(Error::Shape(format!("{0}x{0} coefficient for r = {r}", m.rank())));
        }
        s.add_term(Monomial::new(l, alpha, beta), m);
    }
    Ok(s)
}

impl FormalSymbol {
    pub fn zero(n: usize, r: usize) -> Self {
        FormalSymbol { n, r, terms: BTreeMap::new() }
    }

    pub fn scalar_term(n: usize, r: usize, hbar: i32, alpha: Vec<u32>, beta: Vec<u32>, c: Cq) -> Self {
        let mut s = Self::zero(n, r);
        s.add_term(Monomial::new(hbar, alpha, beta), QMatrix::scalar(r, c));
        s
    }

    pub fn one(n: usize, r: usize) -> Self {
        Self::scalar_term(n, r, 0, vec![0; n], vec![0; n], Cq::one())
    }

    pub fn hbar(n: usize, r: usize) -> Self {
        Self::scalar_term(n, r, 1, vec![0; n], vec![0; n], Cq::one())
    }

    pub fn z(n: usize, r: usize, i: usize) -> Self {
        let mut a = vec![0; n];
        a[i] = 1;
        Self::scalar_term(n, r, 0, a, vec![0; n], Cq::one())
    }

    pub fn zbar(n: usize, r: usize, i: usize) -> Self {
        let mut b = vec![0; n];
        b[i] = 1;
        Self::scalar_term(n, r, 0, vec![0; n], b, Cq::one())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &QMatrix)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&QMatrix> {
        self.terms.get(m)
    }

    fn add_term(&mut self, m: Monomial, c: QMatrix) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.add(&c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.r != other.r {
            return Err(Error::Shape(format!(
                "symbols with (n, r) = ({}, {}) and ({}, {})",
                self.n, self.r, other.n, other.r
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect();
        FormalSymbol { n: self.n, r: self.r, terms }
    }

    pub fn scale(&self, c: &Cq) -> Self {
        let mut out = Self::zero(self.n, self.r);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.mul(&QMatrix::scalar(self.r, c.clone())));
        }
        out
    }

    /// Splits into homogeneous pieces keyed by 2ℓ + |α| + |β|.
    pub fn homogeneous_parts(&self) -> BTreeMap<i64, FormalSymbol> {
        let mut out: BTreeMap<i64, FormalSymbol> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.weight()).or_insert_with(|| Self::zero(self.n, self.r)).add_term(m.clone(), c.clone());
        }
        out
    }

    /// True when no term depends on z or z̄.
    pub fn is_constant_in_z(&self) -> bool {
        self.terms.keys().all(|m| m.z_degree() == 0)
    }
}

pub fn grade_of(f: &FormalSymbol) -> Grade {
    let mut grade = None;
    for m in f.terms.keys() {
        let w = m.weight();
        if w < 0 || m.z_degree() as i64 > 3 * w {
            return Grade::Mixed;
        }
        match grade {
            None => grade = Some(w),
            Some(g) if g != w => return Grade::Mixed,
            _ => {}
        }
    }
    match grade {
        None => Grade::Zero,
        Some(g) => Grade::Homogeneous(g as u32),
    }
}

/// A symbol in W_m: every term has 2ℓ + |α| + |β| = m and ℓ ≥ −m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSymbol {
    symbol: FormalSymbol,
    grade: u32,
}

impl GradedSymbol {
    pub fn new(symbol: FormalSymbol, grade: u32) -> Result<Self> {
        for m in symbol.terms.keys() {
            if m.weight() != grade as i64 {
                return Err(Error::Invalid(format!("term {m:?} has weight {} in grade {grade}", m.weight())));
            }
            if (m.hbar as i64) < -(grade as i64) {
                return Err(Error::Invalid(format!("term {m:?} has ℏ-exponent below -{grade}")));
            }
        }
        Ok(GradedSymbol { symbol, grade })
    }

    pub fn from_homogeneous(symbol: FormalSymbol) -> Result<Self> {
        match grade_of(&symbol) {
            Grade::Homogeneous(m) => Self::new(symbol, m),
            Grade::Zero => Self::new(symbol, 0),
            Grade::Mixed => Err(Error::Invalid("symbol is not homogeneous".into())),
        }
    }

    pub fn symbol(&self) -> &FormalSymbol {
        &self.symbol
    }

    pub fn grade(&self) -> u32 {
        self.grade
    }

    pub fn star(&self, other: &Self) -> Result<Self> {
        Ok(GradedSymbol { symbol: star(&self.symbol, &other.symbol)?, grade: self.grade + other.grade })
    }

    pub fn adjoint(&self) -> Self {
        GradedSymbol { symbol: adjoint(&self.symbol), grade: self.grade }
    }
}

/// One coordinate of a product: terms ℏ^j z^p z̄^q with rational coefficient.
type Factor = Vec<(u32, u32, u32, Rational)>;

fn collect_factor(acc: &mut BTreeMap<(u32, u32, u32), Rational>, j: u32, p: &Poly<Rational>, zi: usize, zbi: usize) {
    let jf = BigRational::from_integer(crate::exact::factorial(j));
    for (e, c) in p.terms() {
        let key = (j, e[zi], e[zbi]);
        let v = acc.remove(&key).unwrap_or_else(Rational::zero) + c / &jf;
        if !v.is_zero() {
            acc.insert(key, v);
        }
    }
}

fn finish_factor(acc: BTreeMap<(u32, u32, u32), Rational>) -> Factor {
    acc.into_iter().map(|((j, p, q), c)| (j, p, q, c)).collect()
}

/// [exp(ℏ ∂_u ∂_ū)((−u)^a1 (z̄+ū)^b1 (z+u)^a2 (−ū)^b2)] at u = ū = 0, variables (z, z̄, u, ū).
fn factor_direct(a1: u32, b1: u32, a2: u32, b2: u32) -> Factor {
    let (z, zb, u, ub) = (0, 1, 2, 3);
    let v = |i| Poly::<Rational>::var(4, i);
    let minus = Poly::constant(4, -Rational::one());
    let s = minus
        .mul(&v(u))
        .pow(a1)
        .mul(&v(zb).add(&v(ub)).pow(b1))
        .mul(&v(z).add(&v(u)).pow(a2))
        .mul(&minus.mul(&v(ub)).pow(b2));
    let mut acc = BTreeMap::new();
    let mut cur = s;
    let mut j = 0;
    while !cur.is_zero() {
        collect_factor(&mut acc, j, &cur.at_zero(&[u, ub]), z, zb);
        cur = cur.diff(u).diff(ub);
        j += 1;
    }
    finish_factor(acc)
}

/// [exp(ℏ□)(z1^a1 z̄1^b1 z2^a2 z̄2^b2)] at z1 = 0, z̄2 = 0, variables (z1, z̄1, z2, z̄2),
/// □ = −∂1∂̄1 − ∂2∂̄2 + ∂1∂̄2 + ∂̄1∂2.
fn factor_tensor(a1: u32, b1: u32, a2: u32, b2: u32) -> Factor {
    let (z1, zb1, z2, zb2) = (0, 1, 2, 3);
    let mut cur = Poly::<Rational>::monomial(vec![a1, b1, a2, b2], Rational::one());
    let mut acc = BTreeMap::new();
    let mut j = 0;
    while !cur.is_zero() {
        collect_factor(&mut acc, j, &cur.at_zero(&[z1, zb2]), z2, zb1);
        let d = |p: &Poly<Rational>, a: usize, b: usize| p.diff(a).diff(b);
        let next = d(&cur, z1, zb2).add(&d(&cur, zb1, z2));
        let lap = d(&cur, z1, zb1).add(&d(&cur, z2, zb2));
        cur = next.add(&lap.scale(&-Rational::one()));
        j += 1;
    }
    finish_factor(acc)
}

fn star_with(f: &FormalSymbol, g: &FormalSymbol, factor: fn(u32, u32, u32, u32) -> Factor) -> Result<FormalSymbol> {
    f.check_compatible(g)?;
    let n = f.n;
    let mut cache: HashMap<[u32; 4], Rc<Factor>> = HashMap::new();
    let mut out = FormalSymbol::zero(n, f.r);
    for (mf, a) in &f.terms {
        for (mg, b) in &g.terms {
            let ab = a.mul(b);
            if ab.is_zero() {
                continue;
            }
            let mut partial: Vec<(u32, Vec<u32>, Vec<u32>, Rational)> =
                vec![(0, Vec::with_capacity(n), Vec::with_capacity(n), Rational::one())];
            for i in 0..n {
                let key = [mf.alpha[i], mf.beta[i], mg.alpha[i], mg.beta[i]];
                let fac = cache.entry(key).or_insert_with(|| Rc::new(factor(key[0], key[1], key[2], key[3]))).clone();
                let mut next = Vec::with_capacity(partial.len() * fac.len());
                for (j0, al, be, c0) in &partial {
                    for (j, p, q, c) in fac.iter() {
                        let mut al2 = al.clone();
                        al2.push(*p);
                        let mut be2 = be.clone();
                        be2.push(*q);
                        next.push((j0 + j, al2, be2, c0 * c));
                    }
                }
                partial = next;
            }
            for (j, al, be, c) in partial {
                out.add_term(Monomial::new(mf.hbar + mg.hbar + j as i32, al, be), ab.scale_rat(&c));
            }
        }
    }
    Ok(out)
}

/// f ⋆ g = [exp(ℏΔ_u)(f(ℏ, −u, z̄+ū) g(ℏ, z+u, −ū))] at u = ū = 0; coefficients multiply f-then-g.
pub fn star(f: &FormalSymbol, g: &FormalSymbol) -> Result<FormalSymbol> {
    star_with(f, g, factor_direct)
}

/// The same product through exp(ℏ□)(f ⊠ g) restricted to (0, z̄, z, 0).
pub fn star_tensor(f: &FormalSymbol, g: &FormalSymbol) -> Result<FormalSymbol> {
    star_with(f, g, factor_tensor)
}

#[derive(Clone, Debug)]
pub struct EquivReport {
    pub agree: bool,
    pub direct: FormalSymbol,
    pub tensor: FormalSymbol,
}

pub fn star_equiv_check(f: &FormalSymbol, g: &FormalSymbol) -> Result<EquivReport> {
    let direct = star(f, g)?;
    let tensor = star_tensor(f, g)?;
    Ok(EquivReport { agree: direct == tensor, direct, tensor })
}

/// 1⋆f = [exp(−ℏΔ)f](z, 0) and f⋆1 = [exp(−ℏΔ)f](0, z̄).
pub fn unit_product(f: &FormalSymbol, side: Side) -> FormalSymbol {
    let n = f.n;
    let mut out = FormalSymbol::zero(n, f.r);
    let killed: Vec<usize> = match side {
        Side::Left => (n..2 * n).collect(),
        Side::Right => (0..n).collect(),
    };
    for (m, a) in &f.terms {
        let mut exps = m.alpha.clone();
        exps.extend(&m.beta);
        let mut cur = Poly::<Rational>::monomial(exps, Rational::one());
        let mut j = 0u32;
        let mut sign = Rational::one();
        while !cur.is_zero() {
            let jf = BigRational::from_integer(crate::exact::factorial(j));
            for (e, c) in cur.at_zero(&killed).terms() {
                let coeff = c * &sign / &jf;
                out.add_term(Monomial::new(m.hbar + j as i32, e[..n].to_vec(), e[n..].to_vec()), a.scale_rat(&coeff));
            }
            let mut lap = Poly::zero(2 * n);
            for i in 0..n {
                lap = lap.add(&cur.diff(i).diff(n + i));
            }
            cur = lap;
            sign = -sign;
            j += 1;
        }
    }
    out
}

/// ℏ^ℓ z^α z̄^β a ↦ ℏ^ℓ z^β z̄^α a*.
pub fn adjoint(f: &FormalSymbol) -> FormalSymbol {
    let mut out = FormalSymbol::zero(f.n, f.r);
    for (m, a) in &f.terms {
        out.add_term(Monomial::new(m.hbar, m.beta.clone(), m.alpha.clone()), a.adjoint());
    }
    out
}

pub fn truncate_grade(f: &FormalSymbol, m_max: i64) -> FormalSymbol {
    let mut out = FormalSymbol::zero(f.n, f.r);
    for (m, a) in &f.terms {
        if m.weight() <= m_max {
            out.add_term(m.clone(), a.clone());
        }
    }
    out
}

/// f ⋆ 1 = f = 1 ⋆ f.
pub fn is_toeplitz_symbol(s: &FormalSymbol) -> bool {
    let one = FormalSymbol::one(s.n, s.r);
    star(s, &one).map(|x| &x == s).unwrap_or(false) && star(&one, s).map(|x| &x == s).unwrap_or(false)
}

impl fmt::Display for FormalSymbol {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(out, "symbol n={} r={}", self.n, self.r)?;
        for (m, a) in &self.terms {
            let idx = |v: &[u32]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
            let rows: Vec<String> =
                a.rows().map(|row| format!("[{}]", row.iter().map(fmt_cq).collect::<Vec<_>>().join(", "))).collect();
            writeln!(out, "({}, [{}], [{}], [{}])", m.hbar, idx(&m.alpha), idx(&m.beta), rows.join(", "))?;
        }
        Ok(())
    }
}

/// Compact one-line form for scalar symbols, e.g. `h + z zb^2`.
pub fn format_inline(f: &FormalSymbol) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let var = |name: &str, i: usize, e: u32| {
        let base = if f.n == 1 { name.to_string() } else { format!("{name}{}", i + 1) };
        if e == 1 {
            base
        } else {
            format!("{base}^{e}")
        }
    };
    let mut parts = Vec::new();
    for (m, a) in &f.terms {
        let mut factors = Vec::new();
        let c = if f.r == 1 {
            fmt_cq(a.get(0, 0))
        } else {
            format!("{:?}", a.rows().map(|r| r.iter().map(fmt_cq).collect::<Vec<_>>()).collect::<Vec<_>>())
        };
        match m.hbar {
            0 => {}
            1 => factors.push("h".to_string()),
            l => factors.push(format!("h^{l}")),
        }
        for (i, &e) in m.alpha.iter().enumerate() {
            if e > 0 {
                factors.push(var("z", i, e));
            }
        }
        for (i, &e) in m.beta.iter().enumerate() {
            if e > 0 {
                factors.push(var("zb", i, e));
            }
        }
        if factors.is_empty() {
            parts.push(c);
        } else if c == "1" {
            parts.push(factors.join(" "));
        } else {
            parts.push(format!("{c} {}", factors.join(" ")));
        }
    }
    parts.join(" + ")
}

fn parse_list<T>(c: &mut Cursor, mut item: impl FnMut(&mut Cursor) -> Result<T>) -> Result<Vec<T>> {
    c.expect(b'[')?;
    let mut out = Vec::new();
    if c.eat(b']') {
        return Ok(out);
    }
    loop {
        out.push(item(c)?);
        if c.eat(b']') {
            return Ok(out);
        }
        c.expect(b',')?;
    }
}

/// Parses the record format written by `Display`. Without a header line, n and r are
/// taken from the first record.
pub fn parse_symbol(src: &str) -> Result<FormalSymbol> {
    let mut c = Cursor::new(src);
    let mut dims = None;
    if c.eat_word("symbol") {
        if !c.eat_word("n=") {
            return c.err("expected n=");
        }
        let n = c.integer()?;
        if !c.eat_word("r=") {
            return c.err("expected r=");
        }
        let r = c.integer()?;
        if n < 0 || r < 1 {
            return c.err("bad dimensions");
        }
        dims = Some((n as usize, r as usize));
    }
    let mut records = Vec::new();
    loop {
        c.skip_ws();
        if c.at_end() {
            break;
        }
        let start = c.pos;
        c.expect(b'(')?;
        let l = c.integer()?;
        c.expect(b',')?;
        let alpha = parse_list(&mut c, |c| c.integer())?;
        c.expect(b',')?;
        let beta = parse_list(&mut c, |c| c.integer())?;
        c.expect(b',')?;
        let rows = parse_list(&mut c, |c| parse_list(c, |c| c.complex()))?;
        c.expect(b')')?;
        if alpha.iter().chain(&beta).any(|&x| x < 0) {
            return Err(Error::Parse { pos: start, msg: "negative exponent".into() });
        }
        let to_u = |v: Vec<i64>| v.into_iter().map(|x| x as u32).collect::<Vec<u32>>();
        let m = QMatrix::from_rows(rows).map_err(|e| Error::Parse { pos: start, msg: e.to_string() })?;
        records.push((l as i32, to_u(alpha), to_u(beta), m));
    }
    let (n, r) = match dims {
        Some(d) => d,
        None => match records.first() {
            Some((_, a, _, m)) => (a.len(), m.rank()),
            None => return Err(Error::Parse { pos: 0, msg: "empty symbol without header".into() }),
        },
    };
    make_symbol(n, r, records)
}

fn random_entry<R: Rng>(rng: &mut R) -> Cq {
    let part = |rng: &mut R| rat(rng.gen_range(-3..=3), rng.gen_range(1..=3));
    let re = part(rng);
    let im = if rng.gen_bool(0.5) { part(rng) } else { Rational::zero() };
    cq(re, im)
}

fn random_matrix<R: Rng>(rng: &mut R, r: usize) -> QMatrix {
    let rows: Vec<Vec<Cq>> = (0..r).map(|_| (0..r).map(|_| random_entry(rng)).collect()).collect();
    let m = QMatrix::from_rows(rows).unwrap();
    if m.is_zero() {
        QMatrix::identity(r)
    } else {
        m
    }
}

fn random_monomial<R: Rng>(rng: &mut R, n: usize, m: u32) -> Monomial {
    let l = rng.gen_range(-(m as i32)..=(m as i32) / 2);
    let d = (m as i32 - 2 * l) as u32;
    let mut exps = vec![0u32; 2 * n];
    for _ in 0..d {
        exps[rng.gen_range(0..2 * n)] += 1;
    }
    Monomial::new(l, exps[..n].to_vec(), exps[n..].to_vec())
}

/// Random element of W_m with up to `max_terms` terms.
pub fn random_homogeneous<R: Rng>(rng: &mut R, n: usize, r: usize, m: u32, max_terms: usize) -> GradedSymbol {
    let mut s = FormalSymbol::zero(n, r);
    for _ in 0..rng.gen_range(1..=max_terms) {
        s.add_term(random_monomial(rng, n, m), random_matrix(rng, r));
    }
    GradedSymbol::new(s, m).expect("random monomials respect the grade")
}

/// Random sum of homogeneous pieces of grade ≤ `max_grade`.
pub fn random_symbol<R: Rng>(rng: &mut R, n: usize, r: usize, max_grade: u32, max_terms: usize) -> FormalSymbol {
    let mut s = FormalSymbol::zero(n, r);
    for _ in 0..rng.gen_range(1..=max_terms) {
        let m = rng.gen_range(0..=max_grade);
        s.add_term(random_monomial(rng, n, m), random_matrix(rng, r));
    }
    s
}

/// Exact scalar value used in tests and reports.
pub fn scalar(c: i64) -> Cq {
    crate::exact::cq_int(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> FormalSymbol {
        FormalSymbol::one(1, 1)
    }
    fn z() -> FormalSymbol {
        FormalSymbol::z(1, 1, 0)
    }
    fn zb() -> FormalSymbol {
        FormalSymbol::zbar(1, 1, 0)
    }
    fn h() -> FormalSymbol {
        FormalSymbol::hbar(1, 1)
    }
    fn zzb() -> FormalSymbol {
        FormalSymbol::scalar_term(1, 1, 0, vec![1], vec![1], scalar(1))
    }

    #[test]
    fn make_symbol_merges_and_validates() {
        let s = make_symbol(
            1,
            1,
            vec![
                (0, vec![1], vec![0], QMatrix::scalar(1, scalar(1))),
                (0, vec![1], vec![0], QMatrix::scalar(1, scalar(2))),
            ],
        )
        .unwrap();
        assert_eq!(s, z().scale(&scalar(3)));
        assert!(make_symbol(2, 1, vec![(0, vec![1], vec![0, 0], QMatrix::identity(1))]).is_err());
        assert!(make_symbol(1, 2, vec![(0, vec![1], vec![0], QMatrix::identity(1))]).is_err());
        let cancel = make_symbol(
            1,
            1,
            vec![(0, vec![1], vec![0], QMatrix::identity(1)), (0, vec![1], vec![0], QMatrix::scalar(1, scalar(-1)))],
        )
        .unwrap();
        assert!(cancel.is_zero());
    }

    #[test]
    fn grades() {
        assert_eq!(grade_of(&z()), Grade::Homogeneous(1));
        assert_eq!(grade_of(&h()), Grade::Homogeneous(2));
        assert_eq!(grade_of(&z().add(&h()).unwrap()), Grade::Mixed);
        assert_eq!(grade_of(&FormalSymbol::zero(1, 1)), Grade::Zero);
        let hinv = FormalSymbol::scalar_term(1, 1, -1, vec![0], vec![0], scalar(1));
        assert_eq!(grade_of(&hinv), Grade::Mixed);
        let ok = FormalSymbol::scalar_term(1, 1, -1, vec![2], vec![1], scalar(1));
        assert_eq!(grade_of(&ok), Grade::Homogeneous(1));
        assert!(GradedSymbol::new(ok, 1).is_ok());
        assert!(GradedSymbol::new(z(), 2).is_err());
    }

    #[test]
    fn witness_products() {
        assert_eq!(star(&one(), &one()).unwrap(), one());
        assert_eq!(star(&z(), &zb()).unwrap(), h());
        assert_eq!(star(&zb(), &z()).unwrap(), zzb().add(&h()).unwrap());
        let hz = FormalSymbol::scalar_term(1, 1, 1, vec![1], vec![0], scalar(1));
        let left = star(&star(&z(), &zb()).unwrap(), &z()).unwrap();
        let right = star(&z(), &star(&zb(), &z()).unwrap()).unwrap();
        assert_eq!(left, hz);
        assert_eq!(right, hz);
    }

    #[test]
    fn unit_products() {
        assert_eq!(unit_product(&z(), Side::Left), z());
        assert!(unit_product(&z(), Side::Right).is_zero());
        assert_eq!(unit_product(&zzb(), Side::Left), h().neg());
        assert_eq!(star(&one(), &zzb()).unwrap(), h().neg());
        let cube = FormalSymbol::scalar_term(1, 1, 0, vec![3], vec![0], scalar(1));
        let sum = unit_product(&cube, Side::Left).add(&unit_product(&cube, Side::Right)).unwrap();
        assert_eq!(sum.sub(&cube).unwrap(), FormalSymbol::zero(1, 1));
    }

    #[test]
    fn adjoint_examples() {
        let s = FormalSymbol::scalar_term(1, 1, 1, vec![2], vec![1], scalar(1));
        let t = FormalSymbol::scalar_term(1, 1, 1, vec![1], vec![2], scalar(1));
        assert_eq!(adjoint(&s), t);
        assert_eq!(adjoint(&one()), one());
        let lhs = adjoint(&star(&z(), &zb()).unwrap());
        let rhs = star(&adjoint(&zb()), &adjoint(&z())).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, h());
        let c = FormalSymbol::scalar_term(1, 1, 0, vec![1], vec![0], cq(rat(1, 2), rat(2, 3)));
        assert_eq!(adjoint(&c), FormalSymbol::scalar_term(1, 1, 0, vec![0], vec![1], cq(rat(1, 2), rat(-2, 3))));
    }

    #[test]
    fn toeplitz_characterization() {
        assert!(is_toeplitz_symbol(&one()));
        assert!(is_toeplitz_symbol(&h()));
        assert!(!is_toeplitz_symbol(&zzb()));
        assert!(!is_toeplitz_symbol(&z().add(&h()).unwrap()));
    }

    #[test]
    fn truncation() {
        let hh = FormalSymbol::scalar_term(1, 1, 2, vec![0], vec![0], scalar(1));
        assert_eq!(truncate_grade(&z().add(&hh).unwrap(), 2), z());
        assert_eq!(truncate_grade(&one(), 0), one());
        assert!(truncate_grade(&star(&zb(), &z()).unwrap(), 1).is_zero());
    }

    #[test]
    fn text_round_trip() {
        let s = make_symbol(
            2,
            2,
            vec![(
                -1,
                vec![1, 0],
                vec![0, 1],
                QMatrix::from_rows(vec![vec![cq(rat(1, 2), rat(-1, 3)), scalar(0)], vec![scalar(2), scalar(-1)]])
                    .unwrap(),
            )],
        )
        .unwrap();
        let text = s.to_string();
        assert_eq!(parse_symbol(&text).unwrap(), s);
        let zero = FormalSymbol::zero(2, 1);
        assert_eq!(parse_symbol(&zero.to_string()).unwrap(), zero);
        assert_eq!(parse_symbol("(0, [1], [0], [[1]])").unwrap(), z());
        match parse_symbol("(0, [1], [0], [[1]]") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 19),
            other => panic!("{other:?}"),
        }
    }
}
