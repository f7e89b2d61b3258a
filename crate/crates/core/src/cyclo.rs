//! Exact arithmetic in cyclotomic fields Q(ζ_N).
//!
//! Elements are stored in the power basis 1, ζ, …, ζ^{φ(N)-1}, i.e. as
//! rational polynomials reduced modulo the cyclotomic polynomial Φ_N. This
//! form is canonical, so equality is plain coefficient comparison.
//!
//! Bulk kernels (operators) work instead in the group ring Z[x]/(x^N - 1)
//! with integer coefficients; [`CycloField::reduce_ints`] maps such a vector
//! to the canonical integer representative modulo Φ_N.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// The cyclotomic polynomial Φ_n with integer coefficients, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    assert!(n >= 1);
    // x^n - 1
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = exact_div(&num, &cyclotomic_polynomial(d));
        }
    }
    num
}

fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    assert_eq!(den[dd], 1, "divisor must be monic");
    let qlen = num.len() - dd;
    let mut quot = vec![0i64; qlen];
    for k in (0..qlen).rev() {
        let c = rem[k + dd];
        quot[k] = c;
        if c != 0 {
            for (i, &di) in den.iter().enumerate() {
                rem[k + i] -= c * di;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact polynomial division");
    quot
}

/// Euler's totient.
pub fn totient(mut n: u32) -> u32 {
    let mut result = n;
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            while n % f == 0 {
                n /= f;
            }
            result -= result / f;
        }
        f += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Shared data of Q(ζ_N): the conductor and Φ_N.
#[derive(Debug)]
pub struct CycloField {
    conductor: u32,
    phi: Vec<i64>,
}

impl CycloField {
    /// Returns the (cached) field of conductor `n`.
    pub fn get(n: u32) -> Arc<CycloField> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CycloField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("cyclotomic cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| {
                Arc::new(CycloField {
                    conductor: n,
                    phi: cyclotomic_polynomial(n),
                })
            })
            .clone()
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    /// φ(N), the degree of the field over Q.
    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi(&self) -> &[i64] {
        &self.phi
    }

    /// Reduces an integer polynomial (any length) modulo Φ_N in place. On
    /// return every coefficient at index ≥ φ(N) is zero.
    pub fn reduce_ints(&self, v: &mut [i64]) {
        let deg = self.degree();
        if self.phi.iter().all(|&c| c == 1) {
            // N prime: Φ_N = 1 + x + … + x^{N-1}.
            for k in (deg..v.len()).rev() {
                let c = v[k];
                if c != 0 {
                    for x in &mut v[k - deg..=k] {
                        *x -= c;
                    }
                }
            }
            return;
        }
        for k in (deg..v.len()).rev() {
            let c = v[k];
            if c != 0 {
                for (i, &pi) in self.phi.iter().enumerate() {
                    v[k - deg + i] -= c * pi;
                }
            }
        }
    }

    fn reduce_rationals(&self, v: &mut Vec<BigRational>) {
        let deg = self.degree();
        for k in (deg..v.len()).rev() {
            let c = v[k].clone();
            if !c.is_zero() {
                for (i, &pi) in self.phi.iter().enumerate() {
                    if pi != 0 {
                        v[k - deg + i] -= &c * BigRational::from_integer(BigInt::from(pi));
                    }
                }
            }
        }
        v.truncate(deg);
        v.resize(deg, BigRational::zero());
    }
}

/// Arithmetic operation selector for [`CycloNum::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// An exact element of Q(ζ_N) in canonical reduced form.
#[derive(Clone)]
pub struct CycloNum {
    field: Arc<CycloField>,
    coeffs: Vec<BigRational>,
}

impl CycloNum {
    pub fn zero(conductor: u32) -> Self {
        let field = CycloField::get(conductor);
        let coeffs = vec![BigRational::zero(); field.degree()];
        CycloNum { field, coeffs }
    }

    pub fn one(conductor: u32) -> Self {
        Self::from_rational(conductor, BigRational::one())
    }

    pub fn from_rational(conductor: u32, r: BigRational) -> Self {
        let mut z = Self::zero(conductor);
        z.coeffs[0] = r;
        z
    }

    pub fn from_int(conductor: u32, v: i64) -> Self {
        Self::from_rational(conductor, BigRational::from_integer(BigInt::from(v)))
    }

    /// ζ_N^k.
    pub fn root_of_unity(conductor: u32, k: i64) -> Self {
        let n = conductor as i64;
        let mut v = vec![0i64; conductor as usize];
        v[k.rem_euclid(n) as usize] = 1;
        Self::from_group_ring(conductor, &v, &BigRational::one())
    }

    /// Builds `scale · Σ v[k] ζ^k` from a group-ring vector of length ≤ N.
    pub fn from_group_ring(conductor: u32, v: &[i64], scale: &BigRational) -> Self {
        let field = CycloField::get(conductor);
        let mut w = v.to_vec();
        if w.len() < field.degree() {
            w.resize(field.degree(), 0);
        }
        field.reduce_ints(&mut w);
        let coeffs = w[..field.degree()]
            .iter()
            .map(|&c| scale * BigRational::from_integer(BigInt::from(c)))
            .collect();
        CycloNum { field, coeffs }
    }

    /// Builds an element from power-basis coefficients (reduced on entry).
    pub fn from_coeffs(conductor: u32, mut coeffs: Vec<BigRational>) -> Self {
        let field = CycloField::get(conductor);
        if coeffs.len() < field.degree() {
            coeffs.resize(field.degree(), BigRational::zero());
        }
        field.reduce_rationals(&mut coeffs);
        CycloNum { field, coeffs }
    }

    pub fn conductor(&self) -> u32 {
        self.field.conductor
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-expresses the element in Q(ζ_M) for a multiple M of the conductor.
    pub fn lift(&self, conductor: u32) -> Result<Self> {
        let n = self.conductor();
        if conductor % n != 0 {
            return Err(Error::ConductorMismatch(n, conductor));
        }
        if conductor == n {
            return Ok(self.clone());
        }
        let step = (conductor / n) as usize;
        let mut coeffs = vec![BigRational::zero(); conductor as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[k * step] = c.clone();
        }
        Ok(Self::from_coeffs(conductor, coeffs))
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.conductor() != other.conductor() {
            return Err(Error::ConductorMismatch(self.conductor(), other.conductor()));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(CycloNum { field: self.field.clone(), coeffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(CycloNum { field: self.field.clone(), coeffs })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let deg = self.field.degree();
        let mut prod = vec![BigRational::zero(); 2 * deg - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        self.field.reduce_rationals(&mut prod);
        Ok(CycloNum { field: self.field.clone(), coeffs: prod })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        self.try_mul(&other.inv()?)
    }

    /// Dispatches one of the four field operations.
    pub fn arith(&self, other: &Self, op: ArithOp) -> Result<Self> {
        match op {
            ArithOp::Add => self.try_add(other),
            ArithOp::Sub => self.try_sub(other),
            ArithOp::Mul => self.try_mul(other),
            ArithOp::Div => self.try_div(other),
        }
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CycloNum {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplicative inverse, by solving the linear system of the
    /// multiplication-by-self map on the power basis.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let deg = self.field.degree();
        // Column j holds self · ζ^j.
        let mut mat = vec![vec![BigRational::zero(); deg + 1]; deg];
        let mut col = self.coeffs.clone();
        for j in 0..deg {
            for i in 0..deg {
                mat[i][j] = col[i].clone();
            }
            // multiply col by ζ
            let mut shifted = vec![BigRational::zero(); deg + 1];
            for (i, c) in col.iter().enumerate() {
                shifted[i + 1] = c.clone();
            }
            self.field.reduce_rationals(&mut shifted);
            col = shifted;
        }
        mat[0][deg] = BigRational::one();
        // Gauss-Jordan on the augmented matrix.
        for c in 0..deg {
            let pivot = (c..deg)
                .find(|&r| !mat[r][c].is_zero())
                .ok_or(Error::DivisionByZero)?;
            mat.swap(c, pivot);
            let pv = mat[c][c].clone();
            for x in mat[c].iter_mut() {
                *x = &*x / &pv;
            }
            let prow = mat[c].clone();
            for (r, row) in mat.iter_mut().enumerate() {
                if r != c && !row[c].is_zero() {
                    let f = row[c].clone();
                    for (x, p) in row.iter_mut().zip(&prow) {
                        *x -= &f * p;
                    }
                }
            }
        }
        let coeffs = mat.into_iter().map(|row| row[deg].clone()).collect();
        Ok(CycloNum { field: self.field.clone(), coeffs })
    }

    /// Complex conjugation ζ ↦ ζ^{-1}.
    pub fn conj_c(&self) -> Self {
        let n = self.conductor() as usize;
        let mut v = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            v[(n - k) % n] += c;
        }
        Self::from_coeffs(self.conductor(), v)
    }

    /// Evaluation at ζ_N = exp(2πi/N).
    pub fn embed_complex(&self) -> Complex64 {
        let n = self.conductor() as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let x = c.to_f64().unwrap_or(f64::NAN);
                Complex64::from_polar(x, 2.0 * PI * k as f64 / n)
            })
            .sum()
    }
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        self.conductor() == other.conductor() && self.coeffs == other.coeffs
    }
}

impl Eq for CycloNum {}

impl fmt::Debug for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloNum[N={}](", self.conductor())?;
        fmt::Display::fmt(self, f)?;
        write!(f, ")")
    }
}

impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

macro_rules! forward_op {
    ($tr:ident, $method:ident, $try:ident) => {
        impl std::ops::$tr<&CycloNum> for &CycloNum {
            type Output = CycloNum;
            /// Panics on conductor mismatch; use the `try_` form to recover.
            fn $method(self, rhs: &CycloNum) -> CycloNum {
                self.$try(rhs).expect("cyclotomic operands must share a conductor")
            }
        }
        impl std::ops::$tr<CycloNum> for CycloNum {
            type Output = CycloNum;
            fn $method(self, rhs: CycloNum) -> CycloNum {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_op!(Add, add, try_add);
forward_op!(Sub, sub, try_sub);
forward_op!(Mul, mul, try_mul);

impl std::ops::Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        CycloNum {
            field: self.field.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// A rational serialized as `[numerator, denominator]`; components that do
/// not fit an i64 are written as decimal strings.
pub(crate) struct RationalPair<'a>(pub &'a BigRational);

impl Serialize for RationalPair<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        for part in [self.0.numer(), self.0.denom()] {
            match part.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&part.to_string())?,
            }
        }
        seq.end()
    }
}

impl Serialize for CycloNum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CycloNum", 2)?;
        st.serialize_field("conductor", &self.conductor())?;
        let pairs: Vec<RationalPair<'_>> = self.coeffs.iter().map(RationalPair).collect();
        st.serialize_field("coeffs", &pairs)?;
        st.end()
    }
}
