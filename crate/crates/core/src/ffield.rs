//! The field pair k = F_q ⊂ K = F_{q²} (q = p^m, p odd) with log/exp tables.
//!
//! Elements are small indices: 0 is zero and i + 1 stands for g^i where g is
//! the fixed generator of K^×. Multiplication, inversion, conjugation and the
//! norm are exponent arithmetic; addition goes through a Zech logarithm table.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::cyclo::CycloNum;
use crate::error::{Error, Result};

/// Default upper bound on q accepted by [`FieldCtx::new`].
pub const DEFAULT_FIELD_BOUND: u64 = 10_000;

/// Hard limit on |K| = q² so that the tables stay in memory.
pub const TABLE_LIMIT: u64 = 1_000_000;

/// An element of K = F_{q²}, encoded as 0 (zero) or 1 + log_g.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which multiplicative group a sign character refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subfield {
    /// The big field K = F_{q²}.
    Big,
    /// The subfield k = F_q.
    Small,
}

/// Trace, norm and absolute trace of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceNorm {
    pub tr: Elem,
    pub nm: Elem,
    pub tr_p: u32,
}

/// Immutable tables for K = F_{q²} and its subfield.
pub struct FieldCtx {
    p: u32,
    m: u32,
    q: u32,
    order: u32,
    modulus: Vec<u32>,
    generator_code: u32,
    /// exp[i] = polynomial code of g^i, for 0 ≤ i < q² − 1.
    exp: Vec<u32>,
    /// log[code] = element index.
    log: Vec<u32>,
    /// zech[k] = index of 1 + g^k.
    zech: Vec<u32>,
    /// Absolute trace Tr_{K/F_p} per element index.
    trp: Vec<u32>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .field("generator_code", &self.generator_code)
            .finish()
    }
}

/// Serializable summary of a field context.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FieldInfo {
    pub p: u32,
    pub m: u32,
    pub q: u32,
    /// Coefficients of the defining polynomial of K over F_p, lowest first.
    pub modulus: Vec<u32>,
    /// The generator as a polynomial code Σ c_i p^i.
    pub generator_code: u32,
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn digits(mut code: u64, p: u64, len: usize) -> Vec<u64> {
    let mut v = vec![0; len];
    for d in v.iter_mut() {
        *d = code % p;
        code /= p;
    }
    v
}

fn undigits(v: &[u64], p: u64) -> u64 {
    v.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `a` modulo the monic polynomial `f` over F_p.
fn poly_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let df = f.len() - 1;
    let mut r = a.to_vec();
    while r.len() > df {
        let lead = r.pop().expect("nonempty");
        if lead != 0 {
            let base = r.len() - df;
            for (i, &fi) in f[..df].iter().enumerate() {
                r[base + i] = (r[base + i] + (p - lead) * fi) % p;
            }
        }
    }
    r
}

fn is_irreducible(f: &[u64], p: u64) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for code in 0..p.pow(d as u32) {
            let mut g = digits(code, p, d);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    let mut r = poly_rem(&prod, f, p);
    r.resize(f.len() - 1, 0);
    r
}

fn powmod(a: &[u64], mut e: u64, f: &[u64], p: u64) -> Vec<u64> {
    let deg = f.len() - 1;
    let mut result = vec![0u64; deg];
    result[0] = 1;
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            result = mulmod(&result, &base, f, p);
        }
        base = mulmod(&base, &base, f, p);
        e >>= 1;
    }
    result
}

impl FieldCtx {
    /// Builds F_{q²} ⊃ F_q for q = p^m with the default bound on q.
    pub fn new(p: u64, m: u32) -> Result<Arc<FieldCtx>> {
        Self::with_bound(p, m, DEFAULT_FIELD_BOUND)
    }

    /// Builds the field pair for a prime power q.
    pub fn from_order(q: u64) -> Result<Arc<FieldCtx>> {
        if q < 2 {
            return Err(Error::NotPrimePower(q));
        }
        let factors = prime_factors(q);
        if factors.len() != 1 {
            return Err(Error::NotPrimePower(q));
        }
        let p = factors[0];
        let mut m = 0;
        let mut r = q;
        while r > 1 {
            r /= p;
            m += 1;
        }
        Self::new(p, m)
    }

    pub fn with_bound(p: u64, m: u32, bound: u64) -> Result<Arc<FieldCtx>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p == 2 {
            return Err(Error::EvenCharacteristic(p));
        }
        let q = p
            .checked_pow(m)
            .filter(|_| m >= 1)
            .ok_or(Error::BoundExceeded { what: "field order q", size: u64::MAX, bound })?;
        if q > bound {
            return Err(Error::BoundExceeded { what: "field order q", size: q, bound });
        }
        let order = q * q;
        if order > TABLE_LIMIT {
            return Err(Error::BoundExceeded {
                what: "log table size q^2",
                size: order,
                bound: TABLE_LIMIT,
            });
        }
        let deg = 2 * m as usize;

        // Lowest irreducible monic polynomial, ordered by Σ c_i p^i.
        let modulus = (0..p.pow(deg as u32))
            .map(|code| {
                let mut f = digits(code, p, deg);
                f.push(1);
                f
            })
            .find(|f| is_irreducible(f, p))
            .ok_or(Error::NoIrreducible { p, degree: deg as u32 })?;

        let unit_order = order - 1;
        let factors = prime_factors(unit_order);
        let one = {
            let mut v = vec![0u64; deg];
            v[0] = 1;
            v
        };
        let generator_code = (1..order)
            .find(|&code| {
                let g = digits(code, p, deg);
                factors
                    .iter()
                    .all(|&r| powmod(&g, unit_order / r, &modulus, p) != one)
            })
            .ok_or(Error::NoIrreducible { p, degree: deg as u32 })?;
        let g = digits(generator_code, p, deg);

        let mut exp = Vec::with_capacity(unit_order as usize);
        let mut log = vec![u32::MAX; order as usize];
        log[0] = 0;
        let mut cur = one.clone();
        for i in 0..unit_order {
            let code = undigits(&cur, p);
            if log[code as usize] != u32::MAX {
                return Err(Error::NoIrreducible { p, degree: deg as u32 });
            }
            exp.push(code as u32);
            log[code as usize] = (i + 1) as u32;
            cur = mulmod(&cur, &g, &modulus, p);
        }
        if cur != one {
            return Err(Error::NoIrreducible { p, degree: deg as u32 });
        }

        let zech = exp
            .iter()
            .map(|&code| {
                let mut v = digits(code as u64, p, deg);
                v[0] = (v[0] + 1) % p;
                log[undigits(&v, p) as usize]
            })
            .collect();

        let mut ctx = FieldCtx {
            p: p as u32,
            m,
            q: q as u32,
            order: order as u32,
            modulus: modulus.iter().map(|&c| c as u32).collect(),
            generator_code: generator_code as u32,
            exp,
            log,
            zech,
            trp: Vec::new(),
        };
        ctx.trp = (0..order as u32)
            .map(|i| {
                // Σ_{k < 2m} x^{p^k} lies in F_p, i.e. is a constant polynomial.
                let x = Elem(i);
                let mut acc = Elem::ZERO;
                let mut y = x;
                for _ in 0..deg {
                    acc = ctx.add(acc, y);
                    y = ctx.pow(y, p);
                }
                let code = ctx.code(acc);
                debug_assert!(code < p as u32);
                code
            })
            .collect();
        Ok(Arc::new(ctx))
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// |k| = q.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// |K| = q².
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Conductor p(q+1) of the cyclotomic field holding all character values.
    pub fn conductor(&self) -> u32 {
        self.p * (self.q + 1)
    }

    pub fn info(&self) -> FieldInfo {
        FieldInfo {
            p: self.p,
            m: self.m,
            q: self.q,
            modulus: self.modulus.clone(),
            generator_code: self.generator_code,
        }
    }

    fn unit_order(&self) -> u32 {
        self.order - 1
    }

    /// The fixed generator g of K^×.
    pub fn generator(&self) -> Elem {
        Elem(2)
    }

    /// g^k for any integer k.
    pub fn gen_pow(&self, k: i64) -> Elem {
        Elem(k.rem_euclid(self.unit_order() as i64) as u32 + 1)
    }

    /// Discrete log of a nonzero element.
    pub fn log(&self, x: Elem) -> Option<u32> {
        (!x.is_zero()).then(|| x.0 - 1)
    }

    /// Polynomial code Σ c_i p^i of an element.
    pub fn code(&self, x: Elem) -> u32 {
        if x.is_zero() {
            0
        } else {
            self.exp[x.index() - 1]
        }
    }

    /// Element with the given polynomial code.
    pub fn from_code(&self, code: u32) -> Elem {
        Elem(self.log[code as usize])
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, v: i64) -> Elem {
        self.from_code(v.rem_euclid(self.p as i64) as u32)
    }

    /// All elements of K in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.order).map(Elem)
    }

    /// All elements of k = F_q in canonical order (0 first).
    pub fn subfield_elements(&self) -> impl Iterator<Item = Elem> + '_ {
        std::iter::once(Elem::ZERO)
            .chain((0..self.q - 1).map(move |k| Elem(1 + k * (self.q + 1))))
    }

    pub fn in_subfield(&self, x: Elem) -> bool {
        x.is_zero() || (x.0 - 1) % (self.q + 1) == 0
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() || b.is_zero() {
            return Elem::ZERO;
        }
        let s = (a.0 - 1) + (b.0 - 1);
        let u = self.unit_order();
        Elem(if s >= u { s - u } else { s } + 1)
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        let u = self.unit_order();
        let (i, j) = (a.0 - 1, b.0 - 1);
        let k = if j >= i { j - i } else { j + u - i };
        let z = self.zech[k as usize];
        if z == 0 {
            Elem::ZERO
        } else {
            self.mul(a, Elem(z))
        }
    }

    pub fn neg(&self, a: Elem) -> Elem {
        if a.is_zero() {
            a
        } else {
            self.mul(a, Elem(self.unit_order() / 2 + 1))
        }
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let u = self.unit_order();
        Ok(Elem((u - (a.0 - 1)) % u + 1))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let u = self.unit_order() as u64;
        Elem((((a.0 - 1) as u64 * (e % u)) % u) as u32 + 1)
    }

    /// λ ↦ λ^q, the nontrivial automorphism of K over k.
    pub fn conj(&self, a: Elem) -> Elem {
        self.pow(a, self.q as u64)
    }

    /// x + x̄.
    pub fn tr(&self, a: Elem) -> Elem {
        self.add(a, self.conj(a))
    }

    /// x·x̄ = x^{q+1}.
    pub fn nm(&self, a: Elem) -> Elem {
        self.pow(a, self.q as u64 + 1)
    }

    /// Absolute trace Tr_{K/F_p}(x) as a residue in [0, p).
    pub fn tr_p(&self, a: Elem) -> u32 {
        self.trp[a.index()]
    }

    pub fn trace_norm(&self, a: Elem) -> TraceNorm {
        TraceNorm { tr: self.tr(a), nm: self.nm(a), tr_p: self.tr_p(a) }
    }

    /// Quadratic character of K^× or of k^×.
    pub fn sign_char(&self, a: Elem, which: Subfield) -> Result<i8> {
        let e = self.log(a).ok_or(Error::ZeroArgument)?;
        let e = match which {
            Subfield::Big => e,
            Subfield::Small => {
                if e % (self.q + 1) != 0 {
                    return Err(Error::NotInSubfield);
                }
                e / (self.q + 1)
            }
        };
        Ok(if e % 2 == 0 { 1 } else { -1 })
    }

    /// Exponent e with ψ(x) = ζ_p^e.
    pub fn psi_exponent(&self, a: Elem) -> u32 {
        self.tr_p(a)
    }

    /// ψ(x) = ζ_p^{Tr_{K/F_p}(x)}, as an element of Q(ζ_{p(q+1)}).
    pub fn psi(&self, a: Elem) -> CycloNum {
        CycloNum::root_of_unity(self.conductor(), (self.psi_exponent(a) * (self.q + 1)) as i64)
    }

    /// 2^{-1} in the prime field.
    pub fn inv2(&self) -> Elem {
        self.from_int((self.p as i64 + 1) / 2)
    }

    /// The norm-one subgroup {λ : λλ̄ = 1}, generated by g^{q-1}, in the order
    /// 1, λ₀, λ₀², ….
    pub fn norm_one(&self) -> Vec<Elem> {
        (0..=self.q as i64)
            .map(|k| self.gen_pow(k * (self.q as i64 - 1)))
            .collect()
    }

    /// Some λ with N(λ) = d, for d ∈ k^×, by discrete-log division.
    pub fn norm_preimage(&self, d: Elem) -> Result<Elem> {
        let e = self.log(d).ok_or(Error::ZeroArgument)?;
        if e % (self.q + 1) != 0 {
            return Err(Error::NotInSubfield);
        }
        Ok(self.gen_pow((e / (self.q + 1)) as i64))
    }
}
