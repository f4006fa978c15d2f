//! Exact arithmetic over a closed tower of base rings: the integers, the
//! rationals, prime fields and sparse multivariate polynomial rings over any
//! of these.  All values are immutable and kept in a canonical form, so two
//! elements are equal iff their representations are identical.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde_json::{json, Value as Json};

use crate::error::{Error, Result};

/// A ring of the base tower.  `Poly` coefficients are always one of the three
/// ground rings or a shallower poly ring; variable names within one ring are
/// distinct.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum BaseRing {
    Int,
    Rat,
    Mod(u64),
    Poly { coeff: Arc<BaseRing>, vars: Vec<String> },
}

impl fmt::Debug for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for BaseRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseRing::Int => write!(f, "Z"),
            BaseRing::Rat => write!(f, "Q"),
            BaseRing::Mod(p) => write!(f, "Z/{p}"),
            BaseRing::Poly { coeff, vars } => write!(f, "{}[{}]", coeff, vars.join(",")),
        }
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, valid for all u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl BaseRing {
    pub fn prime_field(p: u64) -> Result<BaseRing> {
        if is_prime(p) {
            Ok(BaseRing::Mod(p))
        } else {
            Err(Error::NotPrime(p))
        }
    }

    /// `R[vars]`; rejects duplicate variable names, including names already
    /// used by a polynomial coefficient ring.
    pub fn poly(coeff: BaseRing, vars: Vec<String>) -> Result<BaseRing> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.clone()) {
                return Err(Error::DuplicateLabel(v.clone()));
            }
        }
        if let BaseRing::Poly { vars: inner, .. } = &coeff {
            for v in inner {
                if seen.contains(v) {
                    return Err(Error::DuplicateLabel(v.clone()));
                }
            }
        }
        Ok(BaseRing::Poly { coeff: Arc::new(coeff), vars })
    }

    /// Appends one distinguished variable, flattening `R[xs][t]` to `R[xs,t]`.
    pub fn poly_extend(&self, var: &str) -> Result<BaseRing> {
        match self {
            BaseRing::Poly { coeff, vars } => {
                let mut vs = vars.clone();
                vs.push(var.to_string());
                BaseRing::poly(coeff.as_ref().clone(), vs)
            }
            other => BaseRing::poly(other.clone(), vec![var.to_string()]),
        }
    }

    pub fn vars(&self) -> &[String] {
        match self {
            BaseRing::Poly { vars, .. } => vars,
            _ => &[],
        }
    }

    pub fn coeff_ring(&self) -> &BaseRing {
        match self {
            BaseRing::Poly { coeff, .. } => coeff,
            other => other,
        }
    }

    pub fn zero(&self) -> Scalar {
        Scalar { ring: self.clone(), value: self.zero_value() }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    fn zero_value(&self) -> Value {
        match self {
            BaseRing::Int => Value::Int(BigInt::zero()),
            BaseRing::Rat => Value::Rat(BigRational::zero()),
            BaseRing::Mod(_) => Value::Mod(0),
            BaseRing::Poly { .. } => Value::Poly(Vec::new()),
        }
    }

    pub fn from_i64(&self, n: i64) -> Scalar {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> Scalar {
        let value = match self {
            BaseRing::Int => Value::Int(n.clone()),
            BaseRing::Rat => Value::Rat(BigRational::from_integer(n.clone())),
            BaseRing::Mod(p) => {
                let m = n.mod_floor(&BigInt::from(*p));
                Value::Mod(u64::try_from(m).expect("reduced residue fits u64"))
            }
            BaseRing::Poly { coeff, .. } => {
                let c = coeff.from_bigint(n);
                if c.is_zero() {
                    Value::Poly(Vec::new())
                } else {
                    Value::Poly(vec![(Monomial::constant(self.vars().len()), c)])
                }
            }
        };
        Scalar { ring: self.clone(), value }
    }

    /// The variable `name` as an element of this (polynomial) ring.
    pub fn var(&self, name: &str) -> Result<Scalar> {
        let vars = self.vars();
        let idx = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::NotAVariable(name.to_string()))?;
        let mut exps = vec![0u32; vars.len()];
        exps[idx] = 1;
        Ok(Scalar {
            ring: self.clone(),
            value: Value::Poly(vec![(Monomial(exps), self.coeff_ring().one())]),
        })
    }

    pub fn monomial(&self, exps: Vec<u32>, coeff: Scalar) -> Result<Scalar> {
        if exps.len() != self.vars().len() {
            return Err(Error::ShapeMismatch("exponent vector length".into()));
        }
        if &coeff.ring != self.coeff_ring() {
            return Err(Error::RingMismatch {
                expected: self.coeff_ring().to_string(),
                got: coeff.ring.to_string(),
            });
        }
        if coeff.is_zero() {
            return Ok(self.zero());
        }
        Ok(Scalar { ring: self.clone(), value: Value::Poly(vec![(Monomial(exps), coeff)]) })
    }

    /// Uniformly random element with small entries, for sampled identity checks.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        match self {
            BaseRing::Int => self.from_i64(rng.gen_range(-9..=9)),
            BaseRing::Rat => {
                let num = rng.gen_range(-9..=9);
                let den = rng.gen_range(1..=9);
                Scalar {
                    ring: self.clone(),
                    value: Value::Rat(BigRational::new(BigInt::from(num), BigInt::from(den))),
                }
            }
            BaseRing::Mod(p) => Scalar {
                ring: self.clone(),
                value: Value::Mod(rng.gen_range(0..*p)),
            },
            BaseRing::Poly { coeff, vars } => {
                let mut acc = self.zero();
                let terms = rng.gen_range(1..=2);
                for _ in 0..terms {
                    let c = coeff.sample(rng);
                    let exps: Vec<u32> =
                        (0..vars.len()).map(|_| rng.gen_range(0..=1)).collect();
                    if let Ok(m) = self.monomial(exps, c) {
                        acc = acc.add(&m);
                    }
                }
                acc
            }
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            BaseRing::Int => json!({"kind": "int"}),
            BaseRing::Rat => json!({"kind": "rat"}),
            BaseRing::Mod(p) => json!({"kind": "mod", "p": p.to_string()}),
            BaseRing::Poly { coeff, vars } => {
                json!({"kind": "poly", "coeff": coeff.to_json(), "vars": vars})
            }
        }
    }

    pub fn from_json(v: &Json) -> Result<BaseRing> {
        let kind = v
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| Error::Json("ring descriptor needs a string `kind`".into()))?;
        match kind {
            "int" => Ok(BaseRing::Int),
            "rat" => Ok(BaseRing::Rat),
            "mod" => {
                let p = v
                    .get("p")
                    .and_then(|p| p.as_str())
                    .ok_or_else(|| Error::Json("`mod` ring needs decimal string `p`".into()))?;
                let p: u64 =
                    p.parse().map_err(|_| Error::Json(format!("bad modulus {p:?}")))?;
                BaseRing::prime_field(p)
            }
            "poly" => {
                let coeff = BaseRing::from_json(
                    v.get("coeff").ok_or_else(|| Error::Json("`poly` needs `coeff`".into()))?,
                )?;
                let vars = v
                    .get("vars")
                    .and_then(|x| x.as_array())
                    .ok_or_else(|| Error::Json("`poly` needs `vars` array".into()))?
                    .iter()
                    .map(|x| {
                        x.as_str()
                            .map(str::to_string)
                            .ok_or_else(|| Error::Json("variable names must be strings".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                BaseRing::poly(coeff, vars)
            }
            other => Err(Error::Json(format!("unknown ring kind {other:?}"))),
        }
    }
}

/// Exponent vector under graded lexicographic order: higher total degree
/// first, ties broken lexicographically on the declared variable order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(nvars: usize) -> Monomial {
        Monomial(vec![0; nvars])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse term list sorted by descending monomial order, no zero coefficients.
type Terms = Vec<(Monomial, Scalar)>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
enum Value {
    Int(BigInt),
    Rat(BigRational),
    Mod(u64),
    Poly(Terms),
}

/// An exact element of some [`BaseRing`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    ring: BaseRing,
    value: Value,
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(q) => write!(f, "{q}"),
            Value::Mod(r) => write!(f, "{r}"),
            Value::Poly(terms) => {
                if terms.is_empty() {
                    return write!(f, "0");
                }
                let vars = self.ring.vars();
                for (i, (m, c)) in terms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    let mono: Vec<String> = m
                        .0
                        .iter()
                        .zip(vars)
                        .filter(|(e, _)| **e > 0)
                        .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                        .collect();
                    if mono.is_empty() {
                        write!(f, "{c}")?;
                    } else if c.is_one() {
                        write!(f, "{}", mono.join("*"))?;
                    } else {
                        write!(f, "({c})*{}", mono.join("*"))?;
                    }
                }
                Ok(())
            }
        }
    }
}

fn normalize(mut terms: Terms) -> Terms {
    terms.sort_by(|a, b| b.0.cmp(&a.0));
    let mut out: Terms = Vec::with_capacity(terms.len());
    for (m, c) in terms {
        match out.last_mut() {
            Some((lm, lc)) if *lm == m => {
                *lc = lc.add(&c);
            }
            _ => out.push((m, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

impl Scalar {
    pub fn ring(&self) -> &BaseRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Int(n) => n.is_zero(),
            Value::Rat(q) => q.is_zero(),
            Value::Mod(r) => *r == 0,
            Value::Poly(t) => t.is_empty(),
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.value {
            Value::Int(n) => n.is_one(),
            Value::Rat(q) => q.is_one(),
            Value::Mod(r) => *r == 1,
            Value::Poly(t) => {
                t.len() == 1 && t[0].0.degree() == 0 && t[0].1.is_one()
            }
        }
    }

    fn same_ring(&self, other: &Scalar) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch {
                expected: self.ring.to_string(),
                got: other.ring.to_string(),
            })
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_ring(other)?;
        Ok(self.add(other))
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.same_ring(other)?;
        Ok(self.sub(other))
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_ring(other)?;
        Ok(self.mul(other))
    }

    /// Addition; the two operands must belong to the same ring.
    pub fn add(&self, other: &Scalar) -> Scalar {
        debug_assert_eq!(self.ring, other.ring, "ring mismatch in add");
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a + b),
            (Value::Rat(a), Value::Rat(b)) => Value::Rat(a + b),
            (Value::Mod(a), Value::Mod(b)) => {
                let p = match self.ring {
                    BaseRing::Mod(p) => p,
                    _ => unreachable!(),
                };
                Value::Mod((a + b) % p)
            }
            (Value::Poly(a), Value::Poly(b)) => {
                let mut t = a.clone();
                t.extend(b.iter().cloned());
                Value::Poly(normalize(t))
            }
            _ => unreachable!("value/ring inconsistency"),
        };
        Scalar { ring: self.ring.clone(), value }
    }

    pub fn neg(&self) -> Scalar {
        let value = match &self.value {
            Value::Int(a) => Value::Int(-a),
            Value::Rat(a) => Value::Rat(-a),
            Value::Mod(a) => {
                let p = match self.ring {
                    BaseRing::Mod(p) => p,
                    _ => unreachable!(),
                };
                Value::Mod(if *a == 0 { 0 } else { p - a })
            }
            Value::Poly(t) => {
                Value::Poly(t.iter().map(|(m, c)| (m.clone(), c.neg())).collect())
            }
        };
        Scalar { ring: self.ring.clone(), value }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        debug_assert_eq!(self.ring, other.ring, "ring mismatch in mul");
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => Value::Int(a * b),
            (Value::Rat(a), Value::Rat(b)) => Value::Rat(a * b),
            (Value::Mod(a), Value::Mod(b)) => {
                let p = match self.ring {
                    BaseRing::Mod(p) => p,
                    _ => unreachable!(),
                };
                Value::Mod(mul_mod(*a, *b, p))
            }
            (Value::Poly(a), Value::Poly(b)) => {
                let mut t = Vec::with_capacity(a.len() * b.len());
                for (ma, ca) in a {
                    for (mb, cb) in b {
                        t.push((ma.mul(mb), ca.mul(cb)));
                    }
                }
                Value::Poly(normalize(t))
            }
            _ => unreachable!("value/ring inconsistency"),
        };
        Scalar { ring: self.ring.clone(), value }
    }

    pub fn pow(&self, mut e: u32) -> Scalar {
        let mut base = self.clone();
        let mut acc = self.ring.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Scale by an integer.
    pub fn scale_int(&self, n: &BigInt) -> Scalar {
        self.mul(&self.ring.from_bigint(n))
    }

    /// Exact inverse if the element is a unit of its ring.
    pub fn inverse(&self) -> Option<Scalar> {
        match &self.value {
            Value::Int(n) => {
                if n.is_one() || (-n).is_one() {
                    Some(self.clone())
                } else {
                    None
                }
            }
            Value::Rat(q) => {
                if q.is_zero() {
                    None
                } else {
                    Some(Scalar { ring: self.ring.clone(), value: Value::Rat(q.recip()) })
                }
            }
            Value::Mod(r) => {
                let p = match self.ring {
                    BaseRing::Mod(p) => p,
                    _ => unreachable!(),
                };
                if *r == 0 {
                    None
                } else {
                    Some(Scalar {
                        ring: self.ring.clone(),
                        value: Value::Mod(pow_mod(*r, p - 2, p)),
                    })
                }
            }
            Value::Poly(t) => {
                // Units of R[x] over the integral domains of the tower are
                // the constant units.
                if t.len() == 1 && t[0].0.degree() == 0 {
                    let inv = t[0].1.inverse()?;
                    Some(Scalar {
                        ring: self.ring.clone(),
                        value: Value::Poly(vec![(t[0].0.clone(), inv)]),
                    })
                } else {
                    None
                }
            }
        }
    }

    pub fn is_unit(&self) -> bool {
        self.inverse().is_some()
    }

    /// Sorted term view of a polynomial element (descending graded-lex).
    pub fn terms(&self) -> Result<&[(Monomial, Scalar)]> {
        match &self.value {
            Value::Poly(t) => Ok(t),
            _ => Err(Error::Invalid("not a polynomial element".into())),
        }
    }

    pub fn from_terms(ring: &BaseRing, terms: Vec<(Vec<u32>, Scalar)>) -> Result<Scalar> {
        let nvars = ring.vars().len();
        let mut out = Vec::with_capacity(terms.len());
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::ShapeMismatch("exponent vector length".into()));
            }
            if &c.ring != ring.coeff_ring() {
                return Err(Error::RingMismatch {
                    expected: ring.coeff_ring().to_string(),
                    got: c.ring.to_string(),
                });
            }
            out.push((Monomial(exps), c));
        }
        Ok(Scalar { ring: ring.clone(), value: Value::Poly(normalize(out)) })
    }

    /// Coefficient of `t^k` where `t` is the distinguished last variable of a
    /// univariate extension `R[t]`, as an element of `R`.
    pub fn coeff_of_last_var(&self, k: u32) -> Result<Scalar> {
        let (ring, terms) = match (&self.ring, &self.value) {
            (BaseRing::Poly { .. }, Value::Poly(t)) => (&self.ring, t),
            _ => return Err(Error::NotAVariable("last".into())),
        };
        let vars = ring.vars();
        if vars.is_empty() {
            return Err(Error::NotAVariable("last".into()));
        }
        let base = if vars.len() == 1 {
            ring.coeff_ring().clone()
        } else {
            BaseRing::poly(ring.coeff_ring().clone(), vars[..vars.len() - 1].to_vec())?
        };
        let mut picked: Vec<(Vec<u32>, Scalar)> = Vec::new();
        for (m, c) in terms {
            if *m.0.last().unwrap() == k {
                picked.push((m.0[..m.0.len() - 1].to_vec(), c.clone()));
            }
        }
        if vars.len() == 1 {
            let mut acc = base.zero();
            for (_, c) in picked {
                acc = acc.add(&c);
            }
            Ok(acc)
        } else {
            Scalar::from_terms(&base, picked)
        }
    }

    /// Total degree in the distinguished last variable.
    pub fn degree_in_last_var(&self) -> Result<u32> {
        let terms = self.terms()?;
        Ok(terms.iter().map(|(m, _)| *m.0.last().unwrap_or(&0)).max().unwrap_or(0))
    }

    pub fn to_json(&self) -> Json {
        match &self.value {
            Value::Int(n) => Json::String(n.to_string()),
            Value::Rat(q) => json!({"num": q.numer().to_string(), "den": q.denom().to_string()}),
            Value::Mod(r) => Json::String(r.to_string()),
            Value::Poly(t) => Json::Array(
                t.iter()
                    .map(|(m, c)| json!({"exponents": m.0, "coeff": c.to_json()}))
                    .collect(),
            ),
        }
    }

    pub fn from_json(ring: &BaseRing, v: &Json) -> Result<Scalar> {
        match ring {
            BaseRing::Int => {
                let s = v
                    .as_str()
                    .ok_or_else(|| Error::Json("integer must be a decimal string".into()))?;
                let n: BigInt =
                    s.parse().map_err(|_| Error::Json(format!("bad integer {s:?}")))?;
                Ok(ring.from_bigint(&n))
            }
            BaseRing::Rat => {
                let num = v
                    .get("num")
                    .and_then(|x| x.as_str())
                    .ok_or_else(|| Error::Json("rational needs `num`".into()))?;
                let den = v
                    .get("den")
                    .and_then(|x| x.as_str())
                    .ok_or_else(|| Error::Json("rational needs `den`".into()))?;
                let num: BigInt =
                    num.parse().map_err(|_| Error::Json(format!("bad numerator {num:?}")))?;
                let den: BigInt =
                    den.parse().map_err(|_| Error::Json(format!("bad denominator {den:?}")))?;
                if den.is_zero() {
                    return Err(Error::Json("zero denominator".into()));
                }
                Ok(Scalar { ring: ring.clone(), value: Value::Rat(BigRational::new(num, den)) })
            }
            BaseRing::Mod(_) => {
                let s = v
                    .as_str()
                    .ok_or_else(|| Error::Json("residue must be a decimal string".into()))?;
                let n: BigInt =
                    s.parse().map_err(|_| Error::Json(format!("bad residue {s:?}")))?;
                Ok(ring.from_bigint(&n))
            }
            BaseRing::Poly { coeff, vars } => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| Error::Json("polynomial must be a term array".into()))?;
                let mut terms = Vec::with_capacity(arr.len());
                for item in arr {
                    let exps = item
                        .get("exponents")
                        .and_then(|x| x.as_array())
                        .ok_or_else(|| Error::Json("term needs `exponents`".into()))?
                        .iter()
                        .map(|e| {
                            e.as_u64()
                                .and_then(|e| u32::try_from(e).ok())
                                .ok_or_else(|| Error::Json("bad exponent".into()))
                        })
                        .collect::<Result<Vec<u32>>>()?;
                    if exps.len() != vars.len() {
                        return Err(Error::Json("exponent vector length mismatch".into()));
                    }
                    let c = Scalar::from_json(
                        coeff,
                        item.get("coeff").ok_or_else(|| Error::Json("term needs `coeff`".into()))?,
                    )?;
                    terms.push((exps, c));
                }
                Scalar::from_terms(ring, terms)
            }
        }
    }
}

/// Arithmetic entry point with explicit operation selection and full
/// precondition checking.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

pub fn arith(a: &Scalar, b: &Scalar, op: ArithOp) -> Result<Scalar> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
    }
}

/// A homomorphism between rings of the tower.  The coefficient part is
/// canonical (Z into anything, Q into Q-algebras, reduction onto prime
/// fields); polynomial variables map to chosen images in the target.
#[derive(Clone, Debug, PartialEq)]
pub struct RingHom {
    source: BaseRing,
    target: BaseRing,
    var_images: Vec<(String, Scalar)>,
}

impl RingHom {
    pub fn new(
        source: BaseRing,
        target: BaseRing,
        var_images: Vec<(String, Scalar)>,
    ) -> Result<RingHom> {
        for (name, img) in &var_images {
            if !source.vars().iter().any(|v| v == name) {
                return Err(Error::NotAVariable(name.clone()));
            }
            if img.ring != target {
                return Err(Error::RingMismatch {
                    expected: target.to_string(),
                    got: img.ring.to_string(),
                });
            }
        }
        Ok(RingHom { source, target, var_images })
    }

    pub fn identity(ring: &BaseRing) -> RingHom {
        let var_images = ring
            .vars()
            .iter()
            .map(|v| (v.clone(), ring.var(v).expect("own variable")))
            .collect();
        RingHom { source: ring.clone(), target: ring.clone(), var_images }
    }

    /// The canonical inclusion for towers like `Z -> Z[x]` or `R -> R[x,y]`;
    /// also covers reductions `Z -> Z/p` and `Z -> Q`.
    pub fn canonical(source: &BaseRing, target: &BaseRing) -> Result<RingHom> {
        let var_images = source
            .vars()
            .iter()
            .map(|v| target.var(v).map(|s| (v.clone(), s)))
            .collect::<Result<Vec<_>>>()?;
        // Sanity: the coefficient map must exist; probing with 1 suffices to
        // catch Q -> Z/p style requests lacking a canonical map.
        let probe = RingHom {
            source: source.clone(),
            target: target.clone(),
            var_images,
        };
        probe.apply(&source.one())?;
        Ok(probe)
    }

    pub fn source(&self) -> &BaseRing {
        &self.source
    }

    pub fn target(&self) -> &BaseRing {
        &self.target
    }

    fn image_of_var(&self, name: &str) -> Result<&Scalar> {
        self.var_images
            .iter()
            .find(|(v, _)| v == name)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::MissingVariableImage(name.to_string()))
    }

    fn map_ground(&self, x: &Scalar) -> Result<Scalar> {
        match &x.value {
            Value::Int(n) => Ok(self.target.from_bigint(n)),
            Value::Rat(q) => {
                let num = self.target.from_bigint(q.numer());
                let den = self.target.from_bigint(q.denom());
                let inv = den
                    .inverse()
                    .ok_or_else(|| Error::NotInvertible(format!("{} in {}", q.denom(), self.target)))?;
                Ok(num.mul(&inv))
            }
            Value::Mod(r) => match (&x.ring, &self.target, self.target.coeff_ring()) {
                (BaseRing::Mod(p), BaseRing::Mod(q), _) if p == q => {
                    Ok(self.target.from_bigint(&BigInt::from(*r)))
                }
                (BaseRing::Mod(p), BaseRing::Poly { .. }, BaseRing::Mod(q)) if p == q => {
                    Ok(self.target.from_bigint(&BigInt::from(*r)))
                }
                _ => Err(Error::RingMismatch {
                    expected: self.target.to_string(),
                    got: x.ring.to_string(),
                }),
            },
            Value::Poly(_) => unreachable!("ground values only"),
        }
    }

    /// Image of `x` under the homomorphism; `x` must live in the source ring.
    pub fn apply(&self, x: &Scalar) -> Result<Scalar> {
        if x.ring != self.source {
            return Err(Error::RingMismatch {
                expected: self.source.to_string(),
                got: x.ring.to_string(),
            });
        }
        match &x.value {
            Value::Poly(terms) => {
                let vars = self.source.vars().to_vec();
                let mut acc = self.target.zero();
                for (m, c) in terms {
                    // Map the coefficient through a hom of the coefficient rings.
                    let ground = RingHom {
                        source: self.source.coeff_ring().clone(),
                        target: self.target.clone(),
                        var_images: Vec::new(),
                    };
                    let mut term = ground.map_scalar(c)?;
                    for (e, v) in m.0.iter().zip(&vars) {
                        if *e > 0 {
                            term = term.mul(&self.image_of_var(v)?.pow(*e));
                        }
                    }
                    acc = acc.add(&term);
                }
                Ok(acc)
            }
            _ => self.map_ground(x),
        }
    }

    fn map_scalar(&self, x: &Scalar) -> Result<Scalar> {
        match &x.value {
            Value::Poly(_) => {
                let hom = RingHom {
                    source: x.ring.clone(),
                    target: self.target.clone(),
                    var_images: self.var_images.clone(),
                };
                hom.apply(x)
            }
            _ => self.map_ground(x),
        }
    }
}

pub fn base_change(x: &Scalar, h: &RingHom) -> Result<Scalar> {
    h.apply(x)
}

/// Coefficient of `t^k` of `p` in `R[t]` as an element of `R`, where `t` is
/// the distinguished last variable.
pub fn poly_coeff(p: &Scalar, k: u32) -> Result<Scalar> {
    p.coeff_of_last_var(k)
}

/// `1/m` in `ring` when `m` is invertible there.
pub fn invert_integer(ring: &BaseRing, m: u64) -> Option<Scalar> {
    ring.from_bigint(&BigInt::from(m)).inverse()
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zx() -> BaseRing {
        BaseRing::poly(BaseRing::Int, vec!["x".into()]).unwrap()
    }

    #[test]
    fn rational_arithmetic() {
        let q = BaseRing::Rat;
        let half = Scalar::from_json(&q, &json!({"num": "1", "den": "2"})).unwrap();
        let third = Scalar::from_json(&q, &json!({"num": "1", "den": "3"})).unwrap();
        let sum = arith(&half, &third, ArithOp::Add).unwrap();
        let expect = Scalar::from_json(&q, &json!({"num": "5", "den": "6"})).unwrap();
        assert_eq!(sum, expect);
    }

    #[test]
    fn monomial_product() {
        let r = zx();
        let x = r.var("x").unwrap();
        let x2 = arith(&x, &x, ArithOp::Mul).unwrap();
        assert_eq!(x2, x.pow(2));
        assert_eq!(x2.terms().unwrap().len(), 1);
        assert_eq!(x2.terms().unwrap()[0].0, Monomial(vec![2]));
    }

    #[test]
    fn base_change_evaluation() {
        let r = zx();
        let x = r.var("x").unwrap();
        let h = RingHom::new(r.clone(), BaseRing::Int, vec![("x".into(), BaseRing::Int.from_i64(3))])
            .unwrap();
        assert_eq!(base_change(&x, &h).unwrap(), BaseRing::Int.from_i64(3));
    }

    #[test]
    fn base_change_reduction() {
        let f3 = BaseRing::prime_field(3).unwrap();
        let h = RingHom::canonical(&BaseRing::Int, &f3).unwrap();
        assert_eq!(base_change(&BaseRing::Int.from_i64(5), &h).unwrap(), f3.from_i64(2));
    }

    #[test]
    fn base_change_substitute_and_expand() {
        // (x^2 + 2) under x -> t + 1 gives t^2 + 2t + 3, checked against a
        // hand expansion.
        let r = zx();
        let x = r.var("x").unwrap();
        let p = x.pow(2).add(&r.from_i64(2));
        let rt = BaseRing::poly(BaseRing::Int, vec!["t".into()]).unwrap();
        let t = rt.var("t").unwrap();
        let h = RingHom::new(r, rt.clone(), vec![("x".into(), t.add(&rt.one()))]).unwrap();
        let img = base_change(&p, &h).unwrap();
        let expect = t
            .pow(2)
            .add(&t.mul(&rt.from_i64(2)))
            .add(&rt.from_i64(3));
        assert_eq!(img, expect);
    }

    #[test]
    fn coeff_extraction() {
        let rt = BaseRing::poly(BaseRing::Int, vec!["t".into()]).unwrap();
        let t = rt.var("t").unwrap();
        let p = t.pow(2).add(&rt.one());
        assert_eq!(poly_coeff(&p, 0).unwrap(), BaseRing::Int.from_i64(1));
        assert_eq!(poly_coeff(&t.pow(3), 2).unwrap(), BaseRing::Int.from_i64(0));
    }

    #[test]
    fn coeff_of_product_with_symbolic_roots() {
        // (t+a)(t+b) over Z[a,b]: the t-coefficient is a + b.
        let rab = BaseRing::poly(BaseRing::Int, vec!["a".into(), "b".into()]).unwrap();
        let rt = rab.poly_extend("t").unwrap();
        let a = rt.var("a").unwrap();
        let b = rt.var("b").unwrap();
        let t = rt.var("t").unwrap();
        let p = t.add(&a).mul(&t.add(&b));
        let c1 = poly_coeff(&p, 1).unwrap();
        let expect = rab.var("a").unwrap().add(&rab.var("b").unwrap());
        assert_eq!(c1, expect);
    }

    #[test]
    fn composite_modulus_rejected() {
        assert_eq!(BaseRing::prime_field(6), Err(Error::NotPrime(6)));
        assert!(BaseRing::prime_field(2).is_ok());
        assert!(is_prime(18446744073709551557)); // largest u64 prime
    }

    #[test]
    fn ring_mismatch_rejected() {
        let a = BaseRing::Int.from_i64(1);
        let b = BaseRing::Rat.from_i64(1);
        assert!(matches!(arith(&a, &b, ArithOp::Add), Err(Error::RingMismatch { .. })));
    }

    #[test]
    fn ring_axioms_sampled() {
        let rings = vec![
            BaseRing::Int,
            BaseRing::Rat,
            BaseRing::prime_field(7).unwrap(),
            BaseRing::poly(BaseRing::Int, vec!["x".into(), "y".into()]).unwrap(),
            BaseRing::poly(BaseRing::prime_field(5).unwrap(), vec!["t".into()]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ring in rings {
            for _ in 0..25 {
                let a = ring.sample(&mut rng);
                let b = ring.sample(&mut rng);
                let c = ring.sample(&mut rng);
                assert_eq!(a.add(&b), b.add(&a));
                assert_eq!(a.mul(&b), b.mul(&a));
                assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
                assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
                assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
                // canonical-form uniqueness
                let d = a.sub(&b);
                assert_eq!(d.is_zero(), a == b);
            }
        }
    }

    #[test]
    fn hom_is_ring_hom_sampled() {
        let r = zx();
        let rt = BaseRing::poly(BaseRing::Int, vec!["t".into()]).unwrap();
        let t = rt.var("t").unwrap();
        let homs = vec![
            RingHom::canonical(&BaseRing::Int, &BaseRing::prime_field(5).unwrap()).unwrap(),
            RingHom::new(r.clone(), rt.clone(), vec![("x".into(), t.pow(2).sub(&rt.one()))])
                .unwrap(),
            RingHom::canonical(&BaseRing::Int, &BaseRing::Rat).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for h in homs {
            assert!(h.apply(&h.source().zero()).unwrap().is_zero());
            assert!(h.apply(&h.source().one()).unwrap().is_one());
            for _ in 0..20 {
                let a = h.source().sample(&mut rng);
                let b = h.source().sample(&mut rng);
                assert_eq!(
                    h.apply(&a.add(&b)).unwrap(),
                    h.apply(&a).unwrap().add(&h.apply(&b).unwrap())
                );
                assert_eq!(
                    h.apply(&a.mul(&b)).unwrap(),
                    h.apply(&a).unwrap().mul(&h.apply(&b).unwrap())
                );
            }
        }
    }

    #[test]
    fn json_round_trip_sampled() {
        let rings = vec![
            BaseRing::Int,
            BaseRing::Rat,
            BaseRing::prime_field(13).unwrap(),
            BaseRing::poly(BaseRing::Rat, vec!["x".into(), "y".into()]).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for ring in rings {
            assert_eq!(BaseRing::from_json(&ring.to_json()).unwrap(), ring);
            for _ in 0..20 {
                let a = ring.sample(&mut rng);
                let back = Scalar::from_json(&ring, &a.to_json()).unwrap();
                assert_eq!(a, back);
                assert_eq!(a.to_json().to_string(), back.to_json().to_string());
            }
        }
    }

    #[test]
    fn grlex_order() {
        // total degree dominates, then lexicographic on the declared order
        let m1 = Monomial(vec![2, 0]);
        let m2 = Monomial(vec![0, 2]);
        let m3 = Monomial(vec![1, 0]);
        assert!(m1 > m2);
        assert!(m2 > m3);
    }
}
