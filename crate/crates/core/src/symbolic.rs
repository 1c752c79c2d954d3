//! Exact multivariate Laurent polynomials over the integers.
//!
//! Exponent vectors are ordered graded-lexicographically, so the last key of
//! a term map is the leading term and reverse iteration gives the canonical
//! printing order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpVector(pub Vec<i32>);

impl ExpVector {
    pub fn zero(n: usize) -> Self {
        ExpVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        ExpVector(v)
    }

    pub fn from_i64(v: &[i64]) -> Self {
        ExpVector(v.iter().map(|&e| e as i32).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|&e| e as i64).sum()
    }

    pub fn add(&self, other: &ExpVector) -> ExpVector {
        ExpVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ExpVector) -> ExpVector {
        ExpVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i32) -> ExpVector {
        ExpVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }
}

impl Ord for ExpVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExpVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    nvars: usize,
    terms: BTreeMap<ExpVector, BigInt>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        LaurentPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(ExpVector::zero(nvars), BigInt::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::monomial(ExpVector::unit(nvars, i), BigInt::one())
    }

    pub fn monomial(exp: ExpVector, coeff: BigInt) -> Self {
        let nvars = exp.len();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        LaurentPoly { nvars, terms }
    }

    pub fn x_pow(exps: &[i64]) -> Self {
        Self::monomial(ExpVector::from_i64(exps), BigInt::one())
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExpVector, BigInt)>,
    {
        let mut p = LaurentPoly::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<ExpVector, BigInt> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &ExpVector) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn leading_term(&self) -> Option<(&ExpVector, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// Single term, if the polynomial is one.
    pub fn as_monomial(&self) -> Option<(&ExpVector, &BigInt)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn add_term(&mut self, e: ExpVector, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &LaurentPoly) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Dimension { expected: self.nvars, found: other.nvars });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check(other)?;
        let mut out = LaurentPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigInt) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c * k);
        }
        out
    }

    pub fn shift(&self, by: &ExpVector) -> LaurentPoly {
        LaurentPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.add(by), c.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> LaurentPoly {
        if let Some((e, c)) = self.as_monomial() {
            return LaurentPoly::monomial(e.scale(k as i32), num_traits::pow(c.clone(), k as usize));
        }
        let mut acc = LaurentPoly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Exact quotient in the Laurent ring, failing if `other` does not divide `self`.
    pub fn divexact(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.check(other)?;
        if other.is_zero() {
            return Err(Error::NotDivisible("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        if let Some((e, c)) = other.as_monomial() {
            let mut out = LaurentPoly::zero(self.nvars);
            for (ea, ca) in &self.terms {
                let (q, r) = ca.div_rem(c);
                if !r.is_zero() {
                    return Err(Error::NotDivisible(format!("coefficient {ca} by {c}")));
                }
                out.add_term(ea.sub(e), q);
            }
            return Ok(out);
        }
        // Shift both operands into the polynomial ring with no monomial factor,
        // then run leading-term division under the well-order on N^n.
        let sa = self.min_exponents();
        let sb = other.min_exponents();
        let a0 = self.shift(&sa.scale(-1));
        let b0 = other.shift(&sb.scale(-1));
        let (mb, cb) = b0.leading_term().map(|(e, c)| (e.clone(), c.clone())).unwrap();
        let mut r = a0;
        let mut q = LaurentPoly::zero(self.nvars);
        while let Some((mr, cr)) = r.leading_term().map(|(e, c)| (e.clone(), c.clone())) {
            let m = mr.sub(&mb);
            if !m.is_nonnegative() {
                return Err(Error::NotDivisible(format!(
                    "leading term {} not divisible by {}",
                    render_exp(&mr, "x"),
                    render_exp(&mb, "x")
                )));
            }
            let (cq, rem) = cr.div_rem(&cb);
            if !rem.is_zero() {
                return Err(Error::NotDivisible(format!("coefficient {cr} by {cb}")));
            }
            let t = LaurentPoly::monomial(m, cq);
            r = r.try_sub(&(&t * &b0))?;
            q = q.try_add(&t)?;
        }
        Ok(q.shift(&sa.sub(&sb)))
    }

    pub fn min_exponents(&self) -> ExpVector {
        let mut m = vec![i32::MAX; self.nvars];
        for e in self.terms.keys() {
            for (mi, ei) in m.iter_mut().zip(&e.0) {
                *mi = (*mi).min(*ei);
            }
        }
        if self.terms.is_empty() {
            m = vec![0; self.nvars];
        }
        ExpVector(m)
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|e| e.is_nonnegative())
    }

    pub fn sum_of_coefficients(&self) -> BigInt {
        self.terms.values().sum()
    }

    /// Canonical text: terms in descending graded-lex order, explicit `^`.
    pub fn render(&self, var: &str) -> String {
        let names: Vec<String> = (1..=self.nvars).map(|i| format!("{var}{i}")).collect();
        self.render_names(&names)
    }

    pub fn render_names(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = render_exp_names(e, names);
            if mono.is_empty() {
                out.push_str(&abs.to_string());
            } else if abs.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{abs}*{mono}"));
            }
        }
        out
    }
}

pub fn render_exp(e: &ExpVector, var: &str) -> String {
    let names: Vec<String> = (1..=e.len()).map(|i| format!("{var}{i}")).collect();
    render_exp_names(e, &names)
}

fn render_exp_names(e: &ExpVector, names: &[String]) -> String {
    let mut parts = Vec::new();
    for (name, &k) in names.iter().zip(&e.0) {
        match k {
            0 => {}
            1 => parts.push(name.clone()),
            _ => parts.push(format!("{name}^{k}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

impl<'a> std::ops::Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.try_mul(rhs).expect("variable count mismatch")
    }
}

impl<'a> std::ops::Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.try_add(rhs).expect("variable count mismatch")
    }
}

impl<'a> std::ops::Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &'a LaurentPoly) -> LaurentPoly {
        self.try_sub(rhs).expect("variable count mismatch")
    }
}

/// Polynomial in y_1..y_n with nonnegative exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct YPoly(LaurentPoly);

impl YPoly {
    pub fn one(n: usize) -> Self {
        YPoly(LaurentPoly::one(n))
    }

    pub fn from_laurent(p: LaurentPoly) -> Result<Self> {
        if !p.is_polynomial() {
            return Err(Error::Invariant(format!("negative exponent in {}", p.render("y"))));
        }
        Ok(YPoly(p))
    }

    pub fn as_laurent(&self) -> &LaurentPoly {
        &self.0
    }

    pub fn into_laurent(self) -> LaurentPoly {
        self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.nvars()
    }

    pub fn constant_term(&self) -> BigInt {
        self.0.coeff(&ExpVector::zero(self.0.nvars()))
    }

    pub fn eval_at_ones(&self) -> BigInt {
        self.0.sum_of_coefficients()
    }

    pub fn render(&self) -> String {
        self.0.render("y")
    }
}

impl fmt::Display for YPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Substitute `y_j -> images[j]` where each image is a single Laurent monomial.
pub fn substitute_monomials(f: &YPoly, images: &[LaurentPoly]) -> Result<LaurentPoly> {
    if images.len() != f.nvars() {
        return Err(Error::Dimension { expected: f.nvars(), found: images.len() });
    }
    let nx = images.first().map(|p| p.nvars()).unwrap_or(0);
    let mut monos = Vec::with_capacity(images.len());
    for (j, img) in images.iter().enumerate() {
        if img.nvars() != nx {
            return Err(Error::Dimension { expected: nx, found: img.nvars() });
        }
        let (e, c) = img.as_monomial().ok_or(Error::NonMonomial(j))?;
        monos.push((e.clone(), c.clone()));
    }
    let mut out = LaurentPoly::zero(nx);
    for (ye, yc) in f.as_laurent().terms() {
        let mut e = ExpVector::zero(nx);
        let mut c = yc.clone();
        for (k, &p) in ye.0.iter().enumerate() {
            if p != 0 {
                e = e.add(&monos[k].0.scale(p));
                c *= num_traits::pow(monos[k].1.clone(), p as usize);
            }
        }
        out.add_term(e, c);
    }
    Ok(out)
}
