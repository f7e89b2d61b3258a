//! The data (M, χ, γ, α, c) attached to Aₙ and a validator for its axioms.
//!
//! χ(x, y) = ψ(⟨x, y⟩), γ(u, x) = ψ(2⁻¹⟨xu, x⟩), α(t) = sign(det t). Every
//! value of χ and γ is a p-th root of unity ζ_p^e, so the validator compares
//! exponents; values that also carry a sign are compared as (sign, exponent)
//! pairs, which is exact because −1 is not a power of ζ_p for odd p.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::astar::{MatA, MatrixRing, ModVec};
use crate::cyclo::CycloNum;
use crate::error::{Error, Result};
use crate::ffield::{Elem, Subfield};

/// The normalizing constant (−q)^{−n}.
pub fn weil_constant(q: u32, n: usize) -> BigRational {
    let base = BigRational::from_integer(BigInt::from(-(q as i64)));
    num_traits::pow(base, n).recip()
}

/// The constant −1/qⁿ as printed in the source construction; it coincides
/// with [`weil_constant`] only for odd n.
pub fn printed_constant(q: u32, n: usize) -> BigRational {
    -num_traits::pow(BigRational::from_integer(BigInt::from(q)), n).recip()
}

/// How exhaustively [`WeilData::validate`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClauseReport {
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
    pub count_checked: u64,
}

impl ClauseReport {
    pub(crate) fn new() -> Self {
        ClauseReport { status: Status::Pass, counterexample: None, count_checked: 0 }
    }

    pub(crate) fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.count_checked += 1;
        if !ok && self.status == Status::Pass {
            self.status = Status::Fail;
            self.counterexample = Some(witness());
        }
    }
}

/// Validation report keyed by clause id.
#[derive(Clone, Debug, Serialize)]
pub struct DataReport {
    pub c: String,
    pub clauses: BTreeMap<String, ClauseReport>,
}

impl DataReport {
    pub fn passed(&self) -> bool {
        self.clauses.values().all(|c| c.status == Status::Pass)
    }

    pub fn clause(&self, id: &str) -> Option<&ClauseReport> {
        self.clauses.get(id)
    }
}

/// The data tuple for SL*^{-1}(2, Aₙ).
#[derive(Clone, Debug)]
pub struct WeilData {
    ring: MatrixRing,
    twist: Elem,
    c: BigRational,
}

impl WeilData {
    pub fn new(ring: MatrixRing) -> Self {
        let c = weil_constant(ring.field().q(), ring.n());
        WeilData { ring, twist: Elem::ONE, c }
    }

    /// Replaces ψ by ψ_a(λ) = ψ(aλ) for a ∈ k^×.
    pub fn with_twist(mut self, a: Elem) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        if !self.ring.field().in_subfield(a) {
            return Err(Error::NotInSubfield);
        }
        self.twist = a;
        Ok(self)
    }

    /// Overrides the constant c (used to test alternative normalizations).
    pub fn with_c(mut self, c: BigRational) -> Self {
        self.c = c;
        self
    }

    pub fn ring(&self) -> &MatrixRing {
        &self.ring
    }

    pub fn twist(&self) -> Elem {
        self.twist
    }

    pub fn c(&self) -> &BigRational {
        &self.c
    }

    pub fn p(&self) -> u32 {
        self.ring.field().p()
    }

    /// Exponent e with ψ_a(λ) = ζ_p^e.
    pub fn psi_exp(&self, l: Elem) -> u32 {
        let f = self.ring.field();
        f.psi_exponent(f.mul(self.twist, l))
    }

    pub fn chi_exp(&self, x: &[Elem], y: &[Elem]) -> u32 {
        self.psi_exp(self.ring.pairing(x, y))
    }

    /// γ(u, x) exponent without the hermitian check.
    pub fn gamma_exp_unchecked(&self, u: &MatA, x: &[Elem]) -> u32 {
        let f = self.ring.field();
        self.psi_exp(f.mul(f.inv2(), self.ring.quad(u, x)))
    }

    pub fn gamma_exp(&self, u: &MatA, x: &[Elem]) -> Result<u32> {
        if !self.ring.is_hermitian(u) {
            return Err(Error::NotHermitian);
        }
        Ok(self.gamma_exp_unchecked(u, x))
    }

    pub fn eval_chi(&self, x: &[Elem], y: &[Elem]) -> CycloNum {
        self.root(self.chi_exp(x, y))
    }

    pub fn eval_gamma(&self, u: &MatA, x: &[Elem]) -> Result<CycloNum> {
        Ok(self.root(self.gamma_exp(u, x)?))
    }

    fn root(&self, e: u32) -> CycloNum {
        let f = self.ring.field();
        CycloNum::root_of_unity(f.conductor(), (e * (f.q() + 1)) as i64)
    }

    /// α(t) = sign(det t).
    pub fn alpha(&self, t: &MatA) -> Result<i8> {
        let d = self.ring.det(t);
        if d.is_zero() {
            return Err(Error::Singular);
        }
        self.ring.field().sign_char(d, Subfield::Big)
    }

    /// Σ_{y∈M} γ(s, y) in Q(ζ_p).
    pub fn gamma_sum(&self, s: &MatA) -> Result<CycloNum> {
        if !self.ring.is_hermitian(s) {
            return Err(Error::NotHermitian);
        }
        let p = self.p();
        let mut hist = vec![0i64; p as usize];
        for y in self.ring.module_elements()? {
            hist[self.gamma_exp_unchecked(s, &y) as usize] += 1;
        }
        Ok(CycloNum::from_group_ring(p, &hist, &BigRational::one()))
    }

    /// Checks every clause of the data axioms (ε = −1) and returns a report;
    /// failures are report entries, never errors.
    pub fn validate(&self, mode: ValidationMode) -> Result<DataReport> {
        let r = &self.ring;
        let f = r.field().clone();
        let n = r.n();
        let mut clauses: BTreeMap<String, ClauseReport> = BTreeMap::new();
        let fmt_v = |x: &ModVec| format!("[{}]", x.iter().map(|e| e.0.to_string()).collect::<Vec<_>>().join(","));

        // Parameter sources: full lists (exhaustive) or a seeded sampler.
        let exhaustive = matches!(mode, ValidationMode::Exhaustive);
        let (samples, seed) = match mode {
            ValidationMode::Exhaustive => (0, 0),
            ValidationMode::Sampled { samples, seed } => (samples, seed),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let module: Vec<ModVec> = if exhaustive { r.module_elements()?.collect() } else { Vec::new() };
        let units: Vec<MatA> = if exhaustive {
            if n != 1 {
                return Err(Error::BoundExceeded {
                    what: "exhaustive unit enumeration (rank > 1)",
                    size: n as u64,
                    bound: 1,
                });
            }
            f.elements().skip(1).map(|e| r.scalar(e)).collect()
        } else {
            Vec::new()
        };
        let herm: Vec<MatA> = if exhaustive { r.hermitian_enum()?.collect() } else { Vec::new() };

        // 1(a) χ(xt, y) = α(tt*) χ(x, yt*); α(tt*) = 1 is tracked separately.
        let mut c1a = ClauseReport::new();
        let mut alpha_tts = ClauseReport::new();
        let check_1a = |x: &ModVec, y: &ModVec, t: &MatA, c1a: &mut ClauseReport| -> Result<()> {
            let a = self.alpha(&r.mul(t, &r.star(t)))?;
            let lhs = (1i8, self.chi_exp(&r.vec_mul(x, t), y));
            let rhs = (a, self.chi_exp(x, &r.vec_mul(y, &r.star(t))));
            c1a.record(lhs == rhs, || format!("x={} y={} t=[{t}]", fmt_v(x), fmt_v(y)));
            Ok(())
        };
        if exhaustive {
            for t in &units {
                alpha_tts.record(self.alpha(&r.mul(t, &r.star(t)))? == 1, || format!("t=[{t}]"));
                for x in &module {
                    for y in &module {
                        check_1a(x, y, t, &mut c1a)?;
                    }
                }
            }
        } else {
            for _ in 0..samples {
                let (x, y, t) = (r.random_vec(&mut rng), r.random_vec(&mut rng), r.random_invertible(&mut rng));
                alpha_tts.record(self.alpha(&r.mul(&t, &r.star(&t)))? == 1, || format!("t=[{t}]"));
                check_1a(&x, &y, &t, &mut c1a)?;
            }
        }
        clauses.insert("1a".into(), c1a);
        clauses.insert("alpha_tt_star".into(), alpha_tts);

        // 1(b) χ(y, x) = χ(−εx, y) = χ(x, y).
        let mut c1b = ClauseReport::new();
        let pairs: Box<dyn Iterator<Item = (ModVec, ModVec)>> = if exhaustive {
            Box::new(module.iter().flat_map(|x| module.iter().map(move |y| (x.clone(), y.clone()))))
        } else {
            let v: Vec<_> = (0..samples).map(|_| (r.random_vec(&mut rng), r.random_vec(&mut rng))).collect();
            Box::new(v.into_iter())
        };
        for (x, y) in pairs {
            c1b.record(self.chi_exp(&y, &x) == self.chi_exp(&x, &y), || {
                format!("x={} y={}", fmt_v(&x), fmt_v(&y))
            });
        }
        clauses.insert("1b".into(), c1b);

        // 1(c) nondegeneracy, always over all y ≠ 0 when M is enumerable.
        let mut c1c = ClauseReport::new();
        let full: Vec<ModVec> = r.module_elements()?.collect();
        for y in &full[1..] {
            let ok = full.iter().any(|x| self.chi_exp(x, y) != 0);
            c1c.record(ok, || format!("y={} pairs trivially with all of M", fmt_v(y)));
        }
        clauses.insert("1c".into(), c1c);

        // 2(a) γ(s + s′, x) = γ(s, x) γ(s′, x).
        let mut c2a = ClauseReport::new();
        let p = self.p();
        let check_2a = |s: &MatA, s2: &MatA, x: &ModVec, c2a: &mut ClauseReport| -> Result<()> {
            let lhs = self.gamma_exp(&r.add(s, s2), x)?;
            let rhs = (self.gamma_exp(s, x)? + self.gamma_exp(s2, x)?) % p;
            c2a.record(lhs == rhs, || format!("s=[{s}] s'=[{s2}] x={}", fmt_v(x)));
            Ok(())
        };
        if exhaustive {
            for s in &herm {
                for s2 in &herm {
                    for x in &module {
                        check_2a(s, s2, x, &mut c2a)?;
                    }
                }
            }
        } else {
            for _ in 0..samples {
                let (s, s2, x) = (r.random_hermitian(&mut rng), r.random_hermitian(&mut rng), r.random_vec(&mut rng));
                check_2a(&s, &s2, &x, &mut c2a)?;
            }
        }
        clauses.insert("2a".into(), c2a);

        // 2(b) γ(b, xt) = γ(tbt*, x).
        let mut c2b = ClauseReport::new();
        let check_2b = |b: &MatA, x: &ModVec, t: &MatA, c2b: &mut ClauseReport| -> Result<()> {
            let lhs = self.gamma_exp(b, &r.vec_mul(x, t))?;
            let rhs = self.gamma_exp(&r.mul(&r.mul(t, b), &r.star(t)), x)?;
            c2b.record(lhs == rhs, || format!("b=[{b}] x={} t=[{t}]", fmt_v(x)));
            Ok(())
        };
        if exhaustive {
            for b in &herm {
                for t in &units {
                    for x in &module {
                        check_2b(b, x, t, &mut c2b)?;
                    }
                }
            }
        } else {
            for _ in 0..samples {
                let (b, x, t) = (r.random_hermitian(&mut rng), r.random_vec(&mut rng), r.random_invertible(&mut rng));
                check_2b(&b, &x, &t, &mut c2b)?;
            }
        }
        clauses.insert("2b".into(), c2b);

        // 2(c) γ(t, x + z) = γ(t, x) γ(t, z) χ(x, zt).
        let mut c2c = ClauseReport::new();
        let check_2c = |t: &MatA, x: &ModVec, z: &ModVec, c2c: &mut ClauseReport| -> Result<()> {
            let lhs = self.gamma_exp(t, &r.vec_add(x, z))?;
            let rhs = (self.gamma_exp(t, x)? + self.gamma_exp(t, z)? + self.chi_exp(x, &r.vec_mul(z, t))) % p;
            c2c.record(lhs == rhs, || format!("t=[{t}] x={} z={}", fmt_v(x), fmt_v(z)));
            Ok(())
        };
        if exhaustive {
            for t in &herm {
                for x in &module {
                    for z in &module {
                        check_2c(t, x, z, &mut c2c)?;
                    }
                }
            }
        } else {
            for _ in 0..samples {
                let (t, x, z) = (r.random_hermitian(&mut rng), r.random_vec(&mut rng), r.random_vec(&mut rng));
                check_2c(&t, &x, &z, &mut c2c)?;
            }
        }
        clauses.insert("2c".into(), c2c);

        // 3(i) c²|M| = α(ε) = α(−1).
        let mut c3i = ClauseReport::new();
        let alpha_eps = self.alpha(&r.scalar(f.neg(Elem::ONE)))?;
        let m_size = BigRational::from_integer(BigInt::from(r.module_size()));
        let lhs = &self.c * &self.c * &m_size;
        let rhs = BigRational::from_integer(BigInt::from(alpha_eps));
        c3i.record(lhs == rhs, || format!("c^2|M| = {lhs}, alpha(-1) = {rhs}"));
        clauses.insert("3i".into(), c3i);

        // 3(ii) Σ_y γ(s, y) = α(−s)/c for every invertible hermitian s.
        let mut c3ii = ClauseReport::new();
        if self.c.is_zero() {
            c3ii.record(false, || "c = 0".to_string());
        } else {
            let all_herm: Vec<MatA> = if exhaustive { herm.clone() } else { r.hermitian_enum()?.collect() };
            for s in all_herm.iter().filter(|s| r.is_invertible(s)) {
                let sum = self.gamma_sum(s)?;
                let a = self.alpha(&r.neg(s))?;
                let expected = BigRational::from_integer(BigInt::from(a)) / &self.c;
                let ok = sum.as_rational().as_ref() == Some(&expected);
                c3ii.record(ok, || format!("s=[{s}] sum={sum} expected={expected}"));
            }
        }
        clauses.insert("3ii".into(), c3ii);

        Ok(DataReport { c: self.c.to_string(), clauses })
    }
}
