//! Exact multivariate Laurent polynomials over the rationals.
//!
//! The symbol set is closed: the thermal diffusivity `D`, the relaxation
//! time `tau`, and the two step sizes `dt` and `dx`. Every scheme
//! coefficient handled by the crate lives in this ring, so no floating point
//! is involved until a caller explicitly asks for [`LaurentPoly::eval_f64`].
//!
//! Polynomials are kept in normal form: a map from exponent vectors to
//! nonzero coefficients, ordered lexicographically on `(D, tau, dt, dx)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// One of the four symbols a coefficient may depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SymbolId {
    /// Thermal diffusivity `D`.
    Diffusivity,
    /// Relaxation time `tau`.
    RelaxTime,
    /// Time step `dt`.
    TimeStep,
    /// Space step `dx`.
    SpaceStep,
}

impl SymbolId {
    pub const ALL: [SymbolId; 4] = [
        SymbolId::Diffusivity,
        SymbolId::RelaxTime,
        SymbolId::TimeStep,
        SymbolId::SpaceStep,
    ];

    pub fn index(self) -> usize {
        match self {
            SymbolId::Diffusivity => 0,
            SymbolId::RelaxTime => 1,
            SymbolId::TimeStep => 2,
            SymbolId::SpaceStep => 3,
        }
    }

    /// Name used in the canonical text rendering and in `.scheme` files.
    pub fn name(self) -> &'static str {
        match self {
            SymbolId::Diffusivity => "D",
            SymbolId::RelaxTime => "tau",
            SymbolId::TimeStep => "dt",
            SymbolId::SpaceStep => "dx",
        }
    }

    pub fn from_name(name: &str) -> Option<SymbolId> {
        SymbolId::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector indexed by [`SymbolId::index`]. Negative exponents are allowed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub [i32; 4]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; 4]);

    pub fn symbol(s: SymbolId) -> Monomial {
        let mut e = [0; 4];
        e[s.index()] = 1;
        Monomial(e)
    }

    pub fn exponent(&self, s: SymbolId) -> i32 {
        self.0[s.index()]
    }

    pub fn with_exponent(mut self, s: SymbolId, e: i32) -> Monomial {
        self.0[s.index()] = e;
        self
    }

    pub fn is_one(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(other.0) {
            *a += b;
        }
        Monomial(e)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial(self.0.map(|e| -e))
    }

    pub fn pow(&self, n: i32) -> Monomial {
        Monomial(self.0.map(|e| e * n))
    }
}

/// A variable that can be bound during substitution.
///
/// `Square(s)` binds `s^2` without ever naming `s` itself, which is how step
/// sizes fixed only through their square (`dx^2 = 4*D*tau`) are carried.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Symbol(SymbolId),
    Square(SymbolId),
}

impl Var {
    pub fn symbol(self) -> SymbolId {
        match self {
            Var::Symbol(s) | Var::Square(s) => s,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Symbol(s) => write!(f, "{s}"),
            Var::Square(s) => write!(f, "{s}^2"),
        }
    }
}

/// Partial map from variables to replacement polynomials.
pub type Bindings = BTreeMap<Var, LaurentPoly>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstitutionError {
    #[error("negative power of non-monomial replacement for `{0}`")]
    NonInvertibleSubstitution(Var),
    #[error(
        "odd exponent {exponent} of `{symbol}` cannot be expressed through a binding of {symbol}^2"
    )]
    OddExponent { symbol: SymbolId, exponent: i32 },
    #[error("both `{0}` and `{0}^2` are bound")]
    ConflictingBindings(SymbolId),
}

/// Positive rational values for all four symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation(pub [BigRational; 4]);

impl Valuation {
    pub fn new(d: BigRational, tau: BigRational, dt: BigRational, dx: BigRational) -> Valuation {
        Valuation([d, tau, dt, dx])
    }

    pub fn get(&self, s: SymbolId) -> &BigRational {
        &self.0[s.index()]
    }
}

/// Exact Laurent polynomial in `D, tau, dt, dx` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl LaurentPoly {
    pub fn zero() -> LaurentPoly {
        LaurentPoly::default()
    }

    pub fn one() -> LaurentPoly {
        LaurentPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> LaurentPoly {
        LaurentPoly::term(c, Monomial::ONE)
    }

    pub fn integer(n: i64) -> LaurentPoly {
        LaurentPoly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(numer: i64, denom: i64) -> LaurentPoly {
        LaurentPoly::constant(BigRational::new(numer.into(), denom.into()))
    }

    pub fn symbol(s: SymbolId) -> LaurentPoly {
        LaurentPoly::term(BigRational::one(), Monomial::symbol(s))
    }

    pub fn term(c: BigRational, m: Monomial) -> LaurentPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        LaurentPoly { terms }
    }

    /// Builds a polynomial from arbitrary terms, merging duplicates and
    /// dropping zeros.
    pub fn from_terms<I>(terms: I) -> LaurentPoly
    where
        I: IntoIterator<Item = (Monomial, BigRational)>,
    {
        let mut p = LaurentPoly::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The rational value if the polynomial is a constant (zero included).
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::ONE).cloned(),
            _ => None,
        }
    }

    /// `(coefficient, monomial)` when the polynomial has exactly one term.
    pub fn as_monomial(&self) -> Option<(&BigRational, &Monomial)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(m, c)| (c, m))
        } else {
            None
        }
    }

    pub fn contains(&self, s: SymbolId) -> bool {
        self.terms.keys().any(|m| m.exponent(s) != 0)
    }

    pub fn scale(&self, c: &BigRational) -> LaurentPoly {
        if c.is_zero() {
            return LaurentPoly::zero();
        }
        LaurentPoly {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> LaurentPoly {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.mul(m), v.clone()))
                .collect(),
        }
    }

    /// Inverse in the Laurent ring; only nonzero monomials are units.
    pub fn inverse(&self) -> Option<LaurentPoly> {
        let (c, m) = self.as_monomial()?;
        Some(LaurentPoly::term(c.recip(), m.inverse()))
    }

    /// Integer power. Negative powers require a monomial.
    pub fn pow(&self, n: i32) -> Option<LaurentPoly> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut acc = LaurentPoly::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Some(acc)
    }

    /// Simultaneous substitution of bound variables; unbound symbols pass through.
    pub fn substitute(&self, bindings: &Bindings) -> Result<LaurentPoly, SubstitutionError> {
        for s in SymbolId::ALL {
            if bindings.contains_key(&Var::Symbol(s)) && bindings.contains_key(&Var::Square(s)) {
                return Err(SubstitutionError::ConflictingBindings(s));
            }
        }
        let mut out = LaurentPoly::zero();
        for (m, c) in &self.terms {
            let mut kept = *m;
            let mut factor = LaurentPoly::constant(c.clone());
            for s in SymbolId::ALL {
                let e = m.exponent(s);
                if e == 0 {
                    continue;
                }
                let replaced = if let Some(v) = bindings.get(&Var::Symbol(s)) {
                    Some(
                        v.pow(e)
                            .ok_or(SubstitutionError::NonInvertibleSubstitution(Var::Symbol(s)))?,
                    )
                } else if let Some(v) = bindings.get(&Var::Square(s)) {
                    if e % 2 != 0 {
                        return Err(SubstitutionError::OddExponent {
                            symbol: s,
                            exponent: e,
                        });
                    }
                    Some(
                        v.pow(e / 2)
                            .ok_or(SubstitutionError::NonInvertibleSubstitution(Var::Square(s)))?,
                    )
                } else {
                    None
                };
                if let Some(r) = replaced {
                    kept = kept.with_exponent(s, 0);
                    factor = &factor * &r;
                }
            }
            out += factor.mul_monomial(&kept);
        }
        Ok(out)
    }

    /// Exact evaluation at positive rational values.
    pub fn eval(&self, values: &Valuation) -> BigRational {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for s in SymbolId::ALL {
                let e = m.exponent(s);
                if e != 0 {
                    t *= pow_rational(values.get(s), e);
                }
            }
            acc += t;
        }
        acc
    }

    /// Floating-point evaluation; `values` is indexed by [`SymbolId::index`].
    pub fn eval_f64(&self, values: [f64; 4]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for s in SymbolId::ALL {
                    let e = m.exponent(s);
                    if e != 0 {
                        t *= values[s.index()].powi(e);
                    }
                }
                t
            })
            .sum()
    }

    /// True when every coefficient is positive, so the polynomial is positive
    /// for any positive values of the symbols.
    pub fn is_manifestly_positive(&self) -> bool {
        !self.terms.is_empty() && self.terms.values().all(|c| c.is_positive())
    }
}

fn pow_rational(base: &BigRational, e: i32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        acc *= base;
    }
    if e < 0 {
        acc.recip()
    } else {
        acc
    }
}

impl Add<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        self += rhs;
        self
    }
}

impl AddAssign for LaurentPoly {
    fn add_assign(&mut self, rhs: LaurentPoly) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl Sub<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl From<BigRational> for LaurentPoly {
    fn from(c: BigRational) -> LaurentPoly {
        LaurentPoly::constant(c)
    }
}

impl From<SymbolId> for LaurentPoly {
    fn from(s: SymbolId) -> LaurentPoly {
        LaurentPoly::symbol(s)
    }
}

impl fmt::Display for LaurentPoly {
    /// Canonical rendering, e.g. `1 - 3*D*tau*dx^-2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let mut first = true;
            if !mag.is_one() || m.is_one() {
                write!(f, "{mag}")?;
                first = false;
            }
            for s in SymbolId::ALL {
                let e = m.exponent(s);
                if e == 0 {
                    continue;
                }
                if !first {
                    f.write_str("*")?;
                }
                first = false;
                if e == 1 {
                    write!(f, "{s}")?;
                } else {
                    write!(f, "{s}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl FromStr for LaurentPoly {
    type Err = crate::dsl::Diagnostic;

    fn from_str(s: &str) -> Result<LaurentPoly, Self::Err> {
        crate::dsl::parse_expression(s)
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<LaurentPoly, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
