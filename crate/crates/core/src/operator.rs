//! Dense operators over Q(ζ_N) and the structured factors they are built from.
//!
//! An [`Operator`] is `scale · A` where `scale` is rational and every entry of
//! `A` is an integer vector of length N read in Z[x]/(x^N − 1). After
//! [`Operator::normalize`] entries are reduced modulo Φ_N, the integer
//! content is moved into `scale` and the first nonzero coefficient is
//! positive, which makes the representation canonical: two normalized
//! operators over the same conductor are equal iff their fields are equal.
//!
//! Operators may be rectangular. Products of structured factors are
//! evaluated a block of columns at a time so that 625×625 identities can be
//! certified without ever holding a dense product of dense matrices.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::cyclo::{CycloField, CycloNum};
use crate::error::{Error, Result};

/// A root of unity ζ_N^exp, possibly negated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase {
    pub neg: bool,
    pub exp: u32,
}

impl Phase {
    pub const ONE: Phase = Phase { neg: false, exp: 0 };

    pub fn new(sign: i8, exp: u32) -> Self {
        Phase { neg: sign < 0, exp }
    }

    fn conj(self, conductor: u32) -> Self {
        Phase { neg: self.neg, exp: (conductor - self.exp % conductor) % conductor }
    }
}

fn lcm(a: u32, b: u32) -> u32 {
    a / a.gcd(&b) * b
}

/// out += v · ζ^e · src for group-ring vectors of length N.
#[inline]
fn rotate_add(out: &mut [i64], src: &[i64], e: usize, v: i64) {
    let n = src.len();
    let (lo, hi) = src.split_at(n - e);
    for (o, s) in out[e..].iter_mut().zip(lo) {
        *o += v * s;
    }
    for (o, s) in out[..e].iter_mut().zip(hi) {
        *o += v * s;
    }
}

/// A (possibly rectangular) matrix `scale · A` over Q(ζ_N).
#[derive(Clone)]
pub struct Operator {
    rows: usize,
    cols: usize,
    conductor: u32,
    scale: BigRational,
    data: Vec<i64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Operator({}x{}, N={}, scale={})",
            self.rows, self.cols, self.conductor, self.scale
        )
    }
}

impl Operator {
    pub fn zeros(rows: usize, cols: usize, conductor: u32) -> Self {
        Operator {
            rows,
            cols,
            conductor,
            scale: BigRational::one(),
            data: vec![0; rows * cols * conductor as usize],
        }
    }

    /// Columns `cols` of the dim×dim identity.
    pub fn identity_block(dim: usize, cols: std::ops::Range<usize>, conductor: u32) -> Self {
        let mut op = Self::zeros(dim, cols.len(), conductor);
        let n = conductor as usize;
        let width = cols.len();
        for (j, c) in cols.enumerate() {
            op.data[(c * width + j) * n] = 1;
        }
        op
    }

    pub fn identity(dim: usize, conductor: u32) -> Self {
        Self::identity_block(dim, 0..dim, conductor)
    }

    /// Builds an operator from integer group-ring entries (length N each).
    pub fn from_parts(
        rows: usize,
        cols: usize,
        conductor: u32,
        scale: BigRational,
        data: Vec<i64>,
    ) -> Result<Self> {
        let expected = rows * cols * conductor as usize;
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: data.len() });
        }
        let mut op = Operator { rows, cols, conductor, scale, data };
        op.normalize();
        Ok(op)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    pub fn raw(&self) -> &[i64] {
        &self.data
    }

    fn n(&self) -> usize {
        self.conductor as usize
    }

    /// Integer group-ring vector of entry (r, c), before scaling.
    pub fn entry_ints(&self, r: usize, c: usize) -> &[i64] {
        let n = self.n();
        let off = (r * self.cols + c) * n;
        &self.data[off..off + n]
    }

    fn entry_ints_mut(&mut self, r: usize, c: usize) -> &mut [i64] {
        let n = self.n();
        let off = (r * self.cols + c) * n;
        &mut self.data[off..off + n]
    }

    pub fn entry(&self, r: usize, c: usize) -> CycloNum {
        CycloNum::from_group_ring(self.conductor, self.entry_ints(r, c), &self.scale)
    }

    pub fn is_zero_entry(&self, r: usize, c: usize) -> bool {
        self.entry_ints(r, c).iter().all(|&x| x == 0)
    }

    /// Canonical form: entries reduced mod Φ_N, content extracted, sign fixed.
    pub fn normalize(&mut self) {
        let field = CycloField::get(self.conductor);
        let n = self.n();
        for chunk in self.data.chunks_mut(n) {
            field.reduce_ints(chunk);
        }
        let g = self.data.iter().fold(0i64, |g, &x| g.gcd(&x));
        if g == 0 || self.scale.is_zero() {
            self.data.iter_mut().for_each(|x| *x = 0);
            self.scale = BigRational::one();
            return;
        }
        let first_neg = self.data.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0);
        let g = if first_neg { -g } else { g };
        if g != 1 {
            self.data.iter_mut().for_each(|x| *x /= g);
            self.scale *= BigRational::from_integer(BigInt::from(g));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.scale.is_zero() || self.data.iter().all(|&x| x == 0)
    }

    /// Re-expresses the operator over Q(ζ_M) for a multiple M of N.
    pub fn lift(&self, conductor: u32) -> Result<Self> {
        if conductor % self.conductor != 0 {
            return Err(Error::ConductorMismatch(self.conductor, conductor));
        }
        if conductor == self.conductor {
            return Ok(self.clone());
        }
        let k = (conductor / self.conductor) as usize;
        let (n, m) = (self.n(), conductor as usize);
        let mut data = vec![0i64; self.rows * self.cols * m];
        for (src, dst) in self.data.chunks(n).zip(data.chunks_mut(m)) {
            for (i, &v) in src.iter().enumerate() {
                dst[i * k] = v;
            }
        }
        let mut op = Operator { rows: self.rows, cols: self.cols, conductor, scale: self.scale.clone(), data };
        op.normalize();
        Ok(op)
    }

    fn common(a: &Operator, b: &Operator) -> Result<(Operator, Operator)> {
        let m = lcm(a.conductor, b.conductor);
        Ok((a.lift(m)?, b.lift(m)?))
    }

    /// Exact equality of values (conductors may differ).
    pub fn same_value(&self, other: &Operator) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let Ok((mut a, mut b)) = Self::common(self, other) else {
            return false;
        };
        a.normalize();
        b.normalize();
        if a.is_zero() || b.is_zero() {
            return a.is_zero() && b.is_zero();
        }
        a.scale == b.scale && a.data == b.data
    }

    /// First entry where the two operators differ, if any.
    pub fn first_difference(&self, other: &Operator) -> Option<(usize, usize)> {
        if self.rows != other.rows || self.cols != other.cols {
            return Some((0, 0));
        }
        if self.same_value(other) {
            return None;
        }
        for r in 0..self.rows {
            for c in 0..self.cols {
                let (x, y) = (self.entry(r, c), other.entry(r, c));
                let m = lcm(x.conductor(), y.conductor());
                if x.lift(m).ok() != y.lift(m).ok() {
                    return Some((r, c));
                }
            }
        }
        Some((0, 0))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && self.same_value(&Operator::identity(self.rows, self.conductor))
    }

    /// Dense product self · other.
    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let (a, b) = Self::common(self, other)?;
        let n = a.n();
        let (rows, inner, cols) = (a.rows, a.cols, b.cols);
        let mut out = Operator::zeros(rows, cols, a.conductor);
        for i in 0..rows {
            for k in 0..inner {
                let aik = a.entry_ints(i, k);
                for (e, &v) in aik.iter().enumerate() {
                    if v == 0 {
                        continue;
                    }
                    let brow = &b.data[k * cols * n..(k + 1) * cols * n];
                    let orow = &mut out.data[i * cols * n..(i + 1) * cols * n];
                    for (oc, bc) in orow.chunks_mut(n).zip(brow.chunks(n)) {
                        rotate_add(oc, bc, e, v);
                    }
                }
            }
        }
        out.scale = &a.scale * &b.scale;
        out.normalize();
        Ok(out)
    }

    /// Linear combination Σ coeff_i · op_i with rational coefficients.
    pub fn combine(terms: &[(BigRational, &Operator)]) -> Result<Operator> {
        let first = terms.first().ok_or(Error::DimensionMismatch { expected: 1, got: 0 })?;
        let (rows, cols) = (first.1.rows, first.1.cols);
        let m = terms.iter().fold(1u32, |m, (_, op)| lcm(m, op.conductor));
        let lifted: Vec<(BigRational, Operator)> = terms
            .iter()
            .map(|(c, op)| {
                if op.rows != rows || op.cols != cols {
                    return Err(Error::DimensionMismatch { expected: rows * cols, got: op.rows * op.cols });
                }
                Ok((c * &op.scale, op.lift(m)?))
            })
            .collect::<Result<_>>()?;
        let denom = lifted.iter().fold(BigInt::one(), |l, (c, _)| l.lcm(c.denom()));
        let mut out = Operator::zeros(rows, cols, m);
        for (c, op) in &lifted {
            let factor = (c * BigRational::from_integer(denom.clone())).to_integer();
            let f = factor.to_i64().ok_or(Error::BoundExceeded {
                what: "integer coefficient in operator combination",
                size: u64::MAX,
                bound: i64::MAX as u64,
            })?;
            if f == 0 {
                continue;
            }
            for (o, &x) in out.data.iter_mut().zip(&op.data) {
                *o += f * x;
            }
        }
        out.scale = BigRational::new(BigInt::one(), denom);
        out.normalize();
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Operator {
        let n = self.n();
        let mut out = Operator::zeros(self.cols, self.rows, self.conductor);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let src = self.entry_ints(r, c);
                let dst = out.entry_ints_mut(c, r);
                for (e, &v) in src.iter().enumerate() {
                    dst[(n - e) % n] += v;
                }
            }
        }
        out.scale = self.scale.clone();
        out.normalize();
        out
    }

    pub fn trace(&self) -> CycloNum {
        let n = self.n();
        let mut acc = vec![0i64; n];
        for i in 0..self.rows.min(self.cols) {
            for (a, &v) in acc.iter_mut().zip(self.entry_ints(i, i)) {
                *a += v;
            }
        }
        CycloNum::from_group_ring(self.conductor, &acc, &self.scale)
    }

    /// Sum of the entries (r, target(r)) for a map r ↦ target(r): the trace
    /// of self · P for the permutation matrix P with P e_{target(r)}... used
    /// for twisted traces Σ_x A[x][λx].
    pub fn twisted_trace(&self, target: &[usize]) -> CycloNum {
        let n = self.n();
        let mut acc = vec![0i64; n];
        for (r, &c) in target.iter().enumerate() {
            for (a, &v) in acc.iter_mut().zip(self.entry_ints(r, c)) {
                *a += v;
            }
        }
        CycloNum::from_group_ring(self.conductor, &acc, &self.scale)
    }

    /// Exact rank by Gauss–Jordan elimination over Q(ζ_N).
    pub fn rank(&self) -> usize {
        let mut m: Vec<Vec<CycloNum>> = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.entry(r, c)).collect())
            .collect();
        let mut rank = 0;
        for c in 0..self.cols {
            let Some(piv) = (rank..self.rows).find(|&r| !m[r][c].is_zero()) else {
                continue;
            };
            m.swap(rank, piv);
            let inv = m[rank][c].inv().expect("pivot is nonzero");
            let prow: Vec<CycloNum> = m[rank].iter().map(|x| x * &inv).collect();
            for (r, row) in m.iter_mut().enumerate() {
                if r == rank || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&prow).skip(c) {
                    *x = &*x - &(&f * p);
                }
            }
            m[rank] = prow;
            rank += 1;
        }
        rank
    }

    /// Approximate complex matrix.
    pub fn to_complex(&self) -> ComplexOperator {
        let n = self.n();
        let roots: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect();
        let s = self.scale.to_f64().unwrap_or(f64::NAN);
        let data = self
            .data
            .chunks(n)
            .map(|chunk| {
                chunk
                    .iter()
                    .zip(&roots)
                    .filter(|(&v, _)| v != 0)
                    .map(|(&v, z)| z * v as f64)
                    .sum::<Complex64>()
                    * s
            })
            .collect();
        ComplexOperator { rows: self.rows, cols: self.cols, data }
    }

    /// True if every column has at most one nonzero entry.
    fn column_sources(&self) -> Option<Vec<Option<usize>>> {
        let mut src = vec![None; self.cols];
        for r in 0..self.rows {
            for (c, slot) in src.iter_mut().enumerate() {
                if !self.is_zero_entry(r, c) {
                    if slot.is_some() {
                        return None;
                    }
                    *slot = Some(r);
                }
            }
        }
        Some(src)
    }
}

impl PartialEq for Operator {
    fn eq(&self, other: &Self) -> bool {
        self.same_value(other)
    }
}

impl Serialize for Operator {
    /// Dump format: dimensions, then every entry row-major as a CycloNum.
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Operator", 3)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        let entries: Vec<CycloNum> = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .map(|(r, c)| self.entry(r, c))
            .collect();
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

/// Double-precision complex matrix for bulk approximate checks.
#[derive(Clone, Debug)]
pub struct ComplexOperator {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexOperator {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn mul(&self, other: &ComplexOperator) -> ComplexOperator {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let (rows, inner, cols) = (self.rows, self.cols, other.cols);
        let mut data = vec![Complex64::new(0.0, 0.0); rows * cols];
        for i in 0..rows {
            let orow = &mut data[i * cols..(i + 1) * cols];
            for k in 0..inner {
                let a = self.data[i * inner + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(&other.data[k * cols..(k + 1) * cols]) {
                    *o += a * b;
                }
            }
        }
        ComplexOperator { rows, cols, data }
    }

    /// Largest entrywise distance.
    pub fn max_diff(&self, other: &ComplexOperator) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Tensor-product structure E(b, a) = Σ_l e1(b_l, a_l) on M = Kⁿ.
#[derive(Clone, Debug)]
struct TensorShape {
    n: usize,
    qsize: usize,
    e1: Vec<u32>,
}

/// The kernel operator K[b][a] = scale · ζ_N^{offset + E(b, a)}.
#[derive(Clone, Debug)]
pub struct PhaseKernel {
    dim: usize,
    conductor: u32,
    scale: BigRational,
    offset: u32,
    table: Option<Vec<u32>>,
    tensor: Option<TensorShape>,
}

impl PhaseKernel {
    /// A kernel given by a full exponent table `table[b * dim + a]`. If the
    /// table is a tensor power over K (with qsize = |K|, dim = qsizeⁿ) the
    /// factorization is detected, verified on every entry and used for
    /// fast application.
    pub fn from_table(
        dim: usize,
        conductor: u32,
        scale: BigRational,
        offset: u32,
        table: Vec<u32>,
        n: usize,
        qsize: usize,
    ) -> Self {
        let mut k = PhaseKernel { dim, conductor, scale, offset, table: Some(table), tensor: None };
        if qsize.pow(n as u32) == dim {
            k.tensor = k.detect_tensor(n, qsize);
        }
        k
    }

    /// A kernel with exponents Σ_l e1[b_l * qsize + a_l].
    pub fn from_tensor(n: usize, qsize: usize, conductor: u32, scale: BigRational, offset: u32, e1: Vec<u32>) -> Self {
        PhaseKernel {
            dim: qsize.pow(n as u32),
            conductor,
            scale,
            offset,
            table: None,
            tensor: Some(TensorShape { n, qsize, e1 }),
        }
    }

    fn detect_tensor(&self, n: usize, qsize: usize) -> Option<TensorShape> {
        let table = self.table.as_ref()?;
        let nn = self.conductor;
        // Read e1 off the last coordinate; E(0, 0) must vanish.
        if table[0] % nn != 0 {
            return None;
        }
        let e1: Vec<u32> = (0..qsize * qsize)
            .map(|i| table[(i / qsize) * self.dim + i % qsize] % nn)
            .collect();
        let shape = TensorShape { n, qsize, e1 };
        let ok = (0..self.dim).all(|b| {
            (0..self.dim).all(|a| Self::tensor_exp(&shape, b, a, nn) == table[b * self.dim + a] % nn)
        });
        ok.then_some(shape)
    }

    fn tensor_exp(shape: &TensorShape, mut b: usize, mut a: usize, nn: u32) -> u32 {
        let mut e = 0;
        for _ in 0..shape.n {
            e += shape.e1[(b % shape.qsize) * shape.qsize + a % shape.qsize];
            b /= shape.qsize;
            a /= shape.qsize;
        }
        e % nn
    }

    pub fn is_tensor(&self) -> bool {
        self.tensor.is_some()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    /// Exponent of entry (b, a), offset included, modulo N.
    pub fn exp(&self, b: usize, a: usize) -> u32 {
        let base = match (&self.tensor, &self.table) {
            (Some(shape), _) => Self::tensor_exp(shape, b, a, self.conductor),
            (None, Some(table)) => table[b * self.dim + a] % self.conductor,
            (None, None) => unreachable!("kernel without data"),
        };
        (base + self.offset) % self.conductor
    }

    pub fn adjoint(&self) -> PhaseKernel {
        let nn = self.conductor;
        let neg = |e: u32| (nn - e % nn) % nn;
        PhaseKernel {
            dim: self.dim,
            conductor: nn,
            scale: self.scale.clone(),
            offset: neg(self.offset),
            table: self.table.as_ref().map(|t| {
                let d = self.dim;
                (0..d * d).map(|i| neg(t[(i % d) * d + i / d])).collect()
            }),
            tensor: self.tensor.as_ref().map(|s| TensorShape {
                n: s.n,
                qsize: s.qsize,
                e1: (0..s.qsize * s.qsize)
                    .map(|i| neg(s.e1[(i % s.qsize) * s.qsize + i / s.qsize]))
                    .collect(),
            }),
        }
    }

    /// The dense operator.
    pub fn materialize(&self) -> Operator {
        let mut op = Operator::zeros(self.dim, self.dim, self.conductor);
        let n = self.conductor as usize;
        for b in 0..self.dim {
            for a in 0..self.dim {
                op.data[(b * self.dim + a) * n + self.exp(b, a) as usize] = 1;
            }
        }
        op.scale = self.scale.clone();
        op.normalize();
        op
    }
}

/// A structured operator on C^M.
#[derive(Clone, Debug)]
pub enum Factor {
    /// e_x ↦ phase[x]·e_x.
    Diagonal { conductor: u32, phases: Vec<Phase> },
    /// e_a ↦ phase[a]·e_{target[a]} for a permutation `target`.
    Monomial { conductor: u32, target: Vec<usize>, phases: Vec<Phase> },
    Kernel(PhaseKernel),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match self {
            Factor::Diagonal { phases, .. } => phases.len(),
            Factor::Monomial { target, .. } => target.len(),
            Factor::Kernel(k) => k.dim,
        }
    }

    pub fn conductor(&self) -> u32 {
        match self {
            Factor::Diagonal { conductor, .. } | Factor::Monomial { conductor, .. } => *conductor,
            Factor::Kernel(k) => k.conductor,
        }
    }

    pub fn adjoint(&self) -> Factor {
        match self {
            Factor::Diagonal { conductor, phases } => Factor::Diagonal {
                conductor: *conductor,
                phases: phases.iter().map(|p| p.conj(*conductor)).collect(),
            },
            Factor::Monomial { conductor, target, phases } => {
                let mut inv_target = vec![0; target.len()];
                let mut inv_phases = vec![Phase::ONE; target.len()];
                for (a, &t) in target.iter().enumerate() {
                    inv_target[t] = a;
                    inv_phases[t] = phases[a].conj(*conductor);
                }
                Factor::Monomial { conductor: *conductor, target: inv_target, phases: inv_phases }
            }
            Factor::Kernel(k) => Factor::Kernel(k.adjoint()),
        }
    }

    /// self · block, where the block's conductor is a multiple of ours.
    pub fn apply(&self, block: &Operator) -> Result<Operator> {
        if block.rows != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: block.rows });
        }
        let fc = self.conductor();
        let block = if block.conductor % fc == 0 { block.clone() } else { block.lift(lcm(block.conductor, fc))? };
        let mult = (block.conductor / fc) as usize;
        let n = block.n();
        let width = block.cols * n;
        let mut out = match self {
            Factor::Diagonal { phases, .. } => {
                let mut out = block;
                for (row, ph) in out.data.chunks_mut(width).zip(phases) {
                    let e = ph.exp as usize * mult % n;
                    for chunk in row.chunks_mut(n) {
                        chunk.rotate_right(e);
                        if ph.neg {
                            chunk.iter_mut().for_each(|x| *x = -*x);
                        }
                    }
                }
                out
            }
            Factor::Monomial { target, phases, .. } => {
                let mut out = Operator::zeros(block.rows, block.cols, block.conductor);
                out.scale = block.scale.clone();
                for (a, (&t, ph)) in target.iter().zip(phases).enumerate() {
                    let e = ph.exp as usize * mult % n;
                    let v = if ph.neg { -1 } else { 1 };
                    let src = &block.data[a * width..(a + 1) * width];
                    let dst = &mut out.data[t * width..(t + 1) * width];
                    for (oc, sc) in dst.chunks_mut(n).zip(src.chunks(n)) {
                        rotate_add(oc, sc, e, v);
                    }
                }
                out
            }
            Factor::Kernel(k) => apply_kernel(k, &block, mult)?,
        };
        out.normalize();
        Ok(out)
    }
}

fn apply_kernel(k: &PhaseKernel, block: &Operator, mult: usize) -> Result<Operator> {
    let n = block.n();
    let (d, cols) = (block.rows, block.cols);
    let width = cols * n;
    let mut out = Operator::zeros(d, cols, block.conductor);
    out.scale = &block.scale * &k.scale;
    if let Some(sources) = block.column_sources() {
        // Each column has a single nonzero entry: read the kernel column.
        for (c, src) in sources.iter().enumerate() {
            let Some(a) = *src else { continue };
            let val = block.entry_ints(a, c).to_vec();
            for b in 0..d {
                let e = k.exp(b, a) as usize * mult % n;
                rotate_add(out.entry_ints_mut(b, c), &val, e, 1);
            }
        }
        return Ok(out);
    }
    let offset = k.offset as usize * mult % n;
    match &k.tensor {
        Some(shape) => {
            let mut cur = block.data.clone();
            let mut next = vec![0i64; cur.len()];
            let q = shape.qsize;
            for l in 0..shape.n {
                // Mode l is digit l counted from the least significant end.
                let stride = q.pow(l as u32);
                next.iter_mut().for_each(|x| *x = 0);
                for r in 0..d {
                    let bl = (r / stride) % q;
                    let base = r - bl * stride;
                    let orow = &mut next[r * width..(r + 1) * width];
                    for al in 0..q {
                        let e = shape.e1[bl * q + al] as usize * mult % n;
                        let src_row = base + al * stride;
                        let src = &cur[src_row * width..(src_row + 1) * width];
                        if src.iter().all(|&x| x == 0) {
                            continue;
                        }
                        for (oc, sc) in orow.chunks_mut(n).zip(src.chunks(n)) {
                            rotate_add(oc, sc, e, 1);
                        }
                    }
                }
                std::mem::swap(&mut cur, &mut next);
            }
            if offset != 0 {
                for chunk in cur.chunks_mut(n) {
                    chunk.rotate_right(offset);
                }
            }
            out.data = cur;
        }
        None => {
            for b in 0..d {
                for a in 0..d {
                    let e = k.exp(b, a) as usize * mult % n;
                    let src = &block.data[a * width..(a + 1) * width];
                    if src.iter().all(|&x| x == 0) {
                        continue;
                    }
                    let orow = &mut out.data[b * width..(b + 1) * width];
                    for (oc, sc) in orow.chunks_mut(n).zip(src.chunks(n)) {
                        rotate_add(oc, sc, e, 1);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// A product F₁ F₂ ⋯ F_k of structured factors.
#[derive(Clone, Debug, Default)]
pub struct FactoredOp {
    pub factors: Vec<Factor>,
}

impl FactoredOp {
    pub fn new(factors: Vec<Factor>) -> Self {
        FactoredOp { factors }
    }

    pub fn then(mut self, other: FactoredOp) -> Self {
        self.factors.extend(other.factors);
        self
    }

    pub fn adjoint(&self) -> FactoredOp {
        FactoredOp { factors: self.factors.iter().rev().map(Factor::adjoint).collect() }
    }

    /// Smallest conductor holding every factor.
    pub fn conductor(&self) -> u32 {
        self.factors.iter().fold(1, |m, f| lcm(m, f.conductor()))
    }

    /// Columns `cols` of the product, evaluated right to left.
    pub fn materialize_block(&self, dim: usize, cols: std::ops::Range<usize>, conductor: u32) -> Result<Operator> {
        let conductor = lcm(conductor, self.conductor());
        let mut block = Operator::identity_block(dim, cols, conductor);
        for f in self.factors.iter().rev() {
            block = f.apply(&block)?;
        }
        Ok(block)
    }

    pub fn materialize(&self, dim: usize) -> Result<Operator> {
        self.materialize_block(dim, 0..dim, 1)
    }

    /// Exact operator equality, checked in column blocks of the given width.
    /// Returns the first differing (row, column) on failure.
    pub fn compare(&self, other: &FactoredOp, dim: usize, block: usize) -> Result<Option<(usize, usize)>> {
        let conductor = lcm(self.conductor(), other.conductor());
        let mut start = 0;
        while start < dim {
            let end = (start + block.max(1)).min(dim);
            let a = self.materialize_block(dim, start..end, conductor)?;
            let b = other.materialize_block(dim, start..end, conductor)?;
            if let Some((r, c)) = a.first_difference(&b) {
                return Ok(Some((r, c + start)));
            }
            start = end;
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn dft_kernel(q: usize, n: usize, conductor: u32) -> PhaseKernel {
        // e1(b, a) = a·b mod q on Z/q, a stand-in tensor kernel.
        let e1 = (0..q * q).map(|i| ((i / q) * (i % q) % q) as u32 * (conductor / q as u32)).collect();
        PhaseKernel::from_tensor(n, q, conductor, rat(1, 1), 0, e1)
    }

    #[test]
    fn normalization_is_canonical() {
        let mut a = Operator::zeros(1, 1, 5);
        a.data.copy_from_slice(&[2, 2, 2, 2, 4]);
        a.normalize();
        // 2(1+ζ+ζ²+ζ³) + 4ζ⁴ = −2ζ⁴ + 4ζ⁴ = 2ζ⁴ → reduced to −2(1+ζ+ζ²+ζ³)
        assert_eq!(a.entry_ints(0, 0), &[1, 1, 1, 1, 0]);
        assert_eq!(a.scale, rat(-2, 1));
        let mut b = Operator::zeros(1, 1, 5);
        b.data[4] = 2;
        b.normalize();
        assert_eq!(a, b);
        assert_eq!(a.entry(0, 0), CycloNum::root_of_unity(5, 4).scale(&rat(2, 1)));
    }

    #[test]
    fn lift_and_compare_across_conductors() {
        let mut a = Operator::zeros(1, 1, 5);
        a.data[1] = 1;
        let b = a.lift(20).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.entry(0, 0), CycloNum::root_of_unity(20, 4));
        assert!(a.lift(7).is_err());
    }

    #[test]
    fn tensor_apply_matches_dense_product() {
        let k = dft_kernel(5, 2, 5);
        let dense = k.materialize();
        let table: Vec<u32> = (0..625).map(|i| k.exp(i / 25, i % 25)).collect();
        let detected = PhaseKernel::from_table(25, 5, rat(1, 1), 0, table, 2, 5);
        assert!(detected.is_tensor());
        // A dense test block: the kernel applied to itself.
        let via_factor = Factor::Kernel(k.clone()).apply(&dense).unwrap();
        let via_mul = dense.mul(&dense).unwrap();
        assert_eq!(via_factor, via_mul);
        let mut broken: Vec<u32> = (0..625).map(|i| k.exp(i / 25, i % 25)).collect();
        broken[26] += 1;
        assert!(!PhaseKernel::from_table(25, 5, rat(1, 1), 0, broken, 2, 5).is_tensor());
    }

    #[test]
    fn dft_squares_to_reflection() {
        // F² = q·(x ↦ −x) for the character kernel ζ^{ab}.
        let k = dft_kernel(5, 1, 5);
        let f = FactoredOp::new(vec![Factor::Kernel(k.clone()), Factor::Kernel(k)]);
        let sq = f.materialize(5).unwrap();
        for b in 0..5 {
            for a in 0..5 {
                let expected = if (a + b) % 5 == 0 { 5 } else { 0 };
                assert_eq!(sq.entry(b, a), CycloNum::from_int(5, expected));
            }
        }
    }

    #[test]
    fn adjoints_invert_unitary_factors() {
        let diag = Factor::Diagonal {
            conductor: 5,
            phases: (0..5).map(|i| Phase::new(if i % 2 == 0 { 1 } else { -1 }, i)).collect(),
        };
        let mono = Factor::Monomial {
            conductor: 5,
            target: vec![2, 0, 1, 4, 3],
            phases: (0..5).map(|i| Phase::new(1, (2 * i) % 5)).collect(),
        };
        let kern = Factor::Kernel(PhaseKernel::from_tensor(1, 5, 5, rat(1, 5), 0, dft_kernel(5, 1, 5).tensor.unwrap().e1));
        // The kernel ζ^{ab}/5 satisfies K†K = 1/5.
        let id = Operator::identity(5, 5);
        for (f, s) in [(diag, rat(1, 1)), (mono, rat(1, 1)), (kern, rat(1, 5))] {
            let expected = Operator::combine(&[(s, &id)]).unwrap();
            let op = FactoredOp::new(vec![f.clone()]);
            let prod = op.adjoint().then(op.clone()).materialize(5).unwrap();
            assert_eq!(prod, expected);
            let dense = op.materialize(5).unwrap();
            assert_eq!(dense.adjoint(), op.adjoint().materialize(5).unwrap());
            assert_eq!(dense.adjoint().mul(&dense).unwrap(), expected);
        }
    }

    #[test]
    fn block_comparison_finds_difference() {
        let k = dft_kernel(5, 2, 5);
        let a = FactoredOp::new(vec![Factor::Kernel(k.clone())]);
        let mut k2 = k.clone();
        k2.offset = 1;
        let b = FactoredOp::new(vec![Factor::Kernel(k2)]);
        assert_eq!(a.compare(&a, 25, 7).unwrap(), None);
        assert_eq!(a.compare(&b, 25, 7).unwrap(), Some((0, 0)));
    }

    #[test]
    fn combine_and_trace() {
        let id = Operator::identity(3, 6);
        let half = Operator::combine(&[(rat(1, 2), &id), (rat(1, 3), &id)]).unwrap();
        assert_eq!(half.trace(), CycloNum::from_rational(6, rat(5, 2)));
        let zero = Operator::combine(&[(rat(1, 1), &id), (rat(-1, 1), &id)]).unwrap();
        assert!(zero.is_zero());
        assert_eq!(id.rank(), 3);
        assert_eq!(zero.rank(), 0);
    }

    #[test]
    fn complex_embedding_matches_exact_product() {
        let k = dft_kernel(5, 1, 5).materialize();
        let exact = k.mul(&k).unwrap().to_complex();
        let approx = k.to_complex().mul(&k.to_complex());
        assert!(exact.max_diff(&approx) < 1e-9);
    }
}
