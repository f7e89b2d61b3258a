//! The Weil representation ρ on C^M: generator operators, ρ(g) along Bruhat
//! words, and operator-level checks of the defining relations.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::astar::{MatA, MatrixRing, ModVec};
use crate::cyclo::CycloNum;
use crate::error::{Error, Result};
use crate::operator::{ComplexOperator, Factor, FactoredOp, Operator, Phase, PhaseKernel};
use crate::ugroup::{GenWord, GroupElem, Token, UnitaryGroup};
use crate::wdata::{ClauseReport, Status, ValidationMode, WeilData};

/// Which kernel ρ(w) uses: χ(−a, b) or χ(a, b).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WSignVariant {
    #[serde(rename = "MINUS_A")]
    MinusA,
    #[serde(rename = "PLUS_A")]
    PlusA,
}

impl WSignVariant {
    pub const ALL: [WSignVariant; 2] = [WSignVariant::MinusA, WSignVariant::PlusA];
}

impl fmt::Display for WSignVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WSignVariant::MinusA => "MINUS_A",
            WSignVariant::PlusA => "PLUS_A",
        })
    }
}

/// The defining relations, with ε = −1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relation {
    /// u_s u_s′ = u_{s+s′}
    AddU,
    /// h_t h_t′ = h_{tt′}
    MulH,
    /// w² = h_{−1}
    WSquare,
    /// h_t u_s = u_{tst*} h_t
    ConjU,
    /// w h_t = h_{t*⁻¹} w
    ConjH,
    /// w u_{t⁻¹} w u_t w u_{t⁻¹} = h_t
    Braid,
}

impl Relation {
    pub const ALL: [Relation; 6] =
        [Relation::AddU, Relation::MulH, Relation::WSquare, Relation::ConjU, Relation::ConjH, Relation::Braid];

    pub fn id(self) -> &'static str {
        match self {
            Relation::AddU => "1a",
            Relation::MulH => "1b",
            Relation::WSquare => "2",
            Relation::ConjU => "3",
            Relation::ConjH => "4",
            Relation::Braid => "5",
        }
    }
}

/// Outcome of the relation suite for one variant.
#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub variant: WSignVariant,
    pub relations: BTreeMap<String, ClauseReport>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.relations.values().all(|r| r.status == Status::Pass)
    }

    pub fn instances(&self) -> u64 {
        self.relations.values().map(|r| r.count_checked).sum()
    }

    /// First failing relation and its witness.
    pub fn witness(&self) -> Option<String> {
        self.relations.iter().find(|(_, r)| r.status == Status::Fail).map(|(id, r)| {
            format!("relation {id}: {}", r.counterexample.clone().unwrap_or_default())
        })
    }
}

/// Result of resolving the ρ(w) kernel sign.
#[derive(Clone, Debug, Serialize)]
pub struct SignResolution {
    pub certified: WSignVariant,
    pub rejected_witness: String,
    pub reports: Vec<RelationReport>,
}

/// The representation for fixed data and kernel variant.
#[derive(Clone, Debug)]
pub struct WeilRep {
    data: WeilData,
    group: UnitaryGroup,
    variant: WSignVariant,
    dim: usize,
}

impl WeilRep {
    pub fn new(data: WeilData, variant: WSignVariant) -> Result<Self> {
        let group = UnitaryGroup::new(data.ring().clone())?;
        let dim = data.ring().module_size();
        Ok(WeilRep { data, group, variant, dim })
    }

    pub fn data(&self) -> &WeilData {
        &self.data
    }

    pub fn ring(&self) -> &MatrixRing {
        self.data.ring()
    }

    pub fn group(&self) -> &UnitaryGroup {
        &self.group
    }

    pub fn variant(&self) -> WSignVariant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Conductor of the operator entries: ρ lives in Q(ζ_p).
    pub fn conductor(&self) -> u32 {
        self.data.p()
    }

    fn elements(&self) -> impl Iterator<Item = ModVec> + '_ {
        (0..self.dim).map(|i| self.ring().vec_at(i))
    }

    pub fn factor_u(&self, s: &MatA) -> Result<Factor> {
        if !self.ring().is_hermitian(s) {
            return Err(Error::NotHermitian);
        }
        let phases = self
            .elements()
            .map(|x| Phase::new(1, self.data.gamma_exp_unchecked(s, &x)))
            .collect();
        Ok(Factor::Diagonal { conductor: self.conductor(), phases })
    }

    pub fn factor_h(&self, t: &MatA) -> Result<Factor> {
        let r = self.ring();
        let tinv = r.inv(t)?;
        let sign = self.data.alpha(t)?;
        let target = self.elements().map(|x| r.vec_index(&r.vec_mul(&x, &tinv))).collect();
        Ok(Factor::Monomial {
            conductor: self.conductor(),
            target,
            phases: vec![Phase::new(sign, 0); self.dim],
        })
    }

    /// ρ(w) as a tensor power of the rank-one kernel over K.
    pub fn factor_w(&self) -> Factor {
        let f = self.ring().field();
        let qsize = f.order() as usize;
        let e1 = (0..qsize * qsize)
            .map(|i| {
                let (b, a) = (crate::ffield::Elem((i / qsize) as u32), crate::ffield::Elem((i % qsize) as u32));
                let a = match self.variant {
                    WSignVariant::PlusA => a,
                    WSignVariant::MinusA => f.neg(a),
                };
                self.data.psi_exp(f.mul(a, f.conj(b)))
            })
            .collect();
        Factor::Kernel(PhaseKernel::from_tensor(
            self.ring().n(),
            qsize,
            self.conductor(),
            self.data.c().clone(),
            0,
            e1,
        ))
    }

    pub fn factor(&self, tok: &Token) -> Result<Factor> {
        match tok {
            Token::H(t) => self.factor_h(t),
            Token::U(s) => self.factor_u(s),
            Token::W => Ok(self.factor_w()),
        }
    }

    pub fn factors(&self, word: &GenWord) -> Result<FactoredOp> {
        Ok(FactoredOp::new(word.0.iter().map(|t| self.factor(t)).collect::<Result<_>>()?))
    }

    pub fn op_u(&self, s: &MatA) -> Result<Operator> {
        FactoredOp::new(vec![self.factor_u(s)?]).materialize(self.dim)
    }

    pub fn op_h(&self, t: &MatA) -> Result<Operator> {
        FactoredOp::new(vec![self.factor_h(t)?]).materialize(self.dim)
    }

    pub fn op_w(&self) -> Operator {
        match self.factor_w() {
            Factor::Kernel(k) => k.materialize(),
            _ => unreachable!("w is a kernel operator"),
        }
    }

    pub fn rho_word(&self, word: &GenWord) -> Result<Operator> {
        self.factors(word)?.materialize_block(self.dim, 0..self.dim, self.conductor())
    }

    /// ρ(g) as a product of generator factors along the Bruhat word.
    pub fn rho_factored(&self, g: &GroupElem) -> Result<FactoredOp> {
        self.factors(&self.group.bruhat_decompose(g)?)
    }

    pub fn rho(&self, g: &GroupElem) -> Result<Operator> {
        self.rho_word(&self.group.bruhat_decompose(g)?)
    }

    /// Exact equality of two words at the operator level. Returns a
    /// differing matrix position on failure.
    pub fn words_agree(&self, lhs: &GenWord, rhs: &GenWord) -> Result<Option<(usize, usize)>> {
        let (l, r) = (self.factors(lhs)?, self.factors(rhs)?);
        l.compare(&r, self.dim, self.dim)
    }

    /// ρ(g)† ρ(g) = 1, evaluated exactly.
    pub fn is_unitary(&self, g: &GroupElem) -> Result<bool> {
        let f = self.rho_factored(g)?;
        Ok(f.adjoint().then(f).materialize(self.dim)?.is_identity())
    }

    /// c · Σ_a χ(±a, a), computed from the Gauss sum over M.
    pub fn expected_w_trace(&self) -> Result<CycloNum> {
        let r = self.ring();
        let u = match self.variant {
            WSignVariant::PlusA => r.identity(),
            WSignVariant::MinusA => r.neg(&r.identity()),
        };
        let g = self.data_gauss(&u)?;
        Ok(g.scale(self.data.c()))
    }

    fn data_gauss(&self, u: &MatA) -> Result<CycloNum> {
        // The twisted character ψ_a needs the diagonal of the twist.
        let r = self.ring();
        let twisted = r.scale(self.data.twist(), u);
        r.gauss_sum_q(&twisted)
    }

    /// The two sides of one relation instance as words.
    pub fn relation_words(&self, rel: Relation, x: &MatA, y: &MatA) -> Result<(GenWord, GenWord)> {
        let r = self.ring();
        let words = match rel {
            Relation::AddU => (vec![Token::U(x.clone()), Token::U(y.clone())], vec![Token::U(r.add(x, y))]),
            Relation::MulH => (vec![Token::H(x.clone()), Token::H(y.clone())], vec![Token::H(r.mul(x, y))]),
            Relation::WSquare => (vec![Token::W, Token::W], vec![Token::H(r.neg(&r.identity()))]),
            Relation::ConjU => {
                let tst = r.mul(&r.mul(x, y), &r.star(x));
                (vec![Token::H(x.clone()), Token::U(y.clone())], vec![Token::U(tst), Token::H(x.clone())])
            }
            Relation::ConjH => {
                let ts_inv = r.inv(&r.star(x))?;
                (vec![Token::W, Token::H(x.clone())], vec![Token::H(ts_inv), Token::W])
            }
            Relation::Braid => {
                let ti = r.inv(x)?;
                (
                    vec![
                        Token::W,
                        Token::U(ti.clone()),
                        Token::W,
                        Token::U(x.clone()),
                        Token::W,
                        Token::U(ti),
                    ],
                    vec![Token::H(x.clone())],
                )
            }
        };
        Ok((GenWord(words.0), GenWord(words.1)))
    }

    fn parameter_sets(&self, rel: Relation, mode: ValidationMode, rng_seed: u64) -> Result<Vec<(MatA, MatA)>> {
        use rand::SeedableRng;
        let r = self.ring();
        let zero = r.zero();
        match mode {
            ValidationMode::Exhaustive => {
                if r.n() != 1 {
                    return Err(Error::BoundExceeded {
                        what: "exhaustive relation check (rank 1 only)",
                        size: r.n() as u64,
                        bound: 1,
                    });
                }
                let herm: Vec<MatA> = r.hermitian_enum()?.collect();
                let units: Vec<MatA> = r
                    .field()
                    .elements()
                    .filter(|e| !e.is_zero())
                    .map(|e| r.scalar(e))
                    .collect();
                let inv_herm: Vec<MatA> = herm.iter().filter(|s| r.is_invertible(s)).cloned().collect();
                let pairs = |xs: &[MatA], ys: &[MatA]| -> Vec<(MatA, MatA)> {
                    xs.iter().flat_map(|x| ys.iter().map(move |y| (x.clone(), y.clone()))).collect()
                };
                Ok(match rel {
                    Relation::AddU => pairs(&herm, &herm),
                    Relation::MulH => pairs(&units, &units),
                    Relation::WSquare => vec![(zero.clone(), zero)],
                    Relation::ConjU => pairs(&units, &herm),
                    Relation::ConjH => units.into_iter().map(|t| (t, zero.clone())).collect(),
                    Relation::Braid => inv_herm.into_iter().map(|t| (t, zero.clone())).collect(),
                })
            }
            ValidationMode::Sampled { samples, seed } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ rng_seed);
                if rel == Relation::WSquare {
                    return Ok(vec![(zero.clone(), zero)]);
                }
                Ok((0..samples)
                    .map(|_| match rel {
                        Relation::AddU => (r.random_hermitian(&mut rng), r.random_hermitian(&mut rng)),
                        Relation::MulH => (r.random_invertible(&mut rng), r.random_invertible(&mut rng)),
                        Relation::ConjU => (r.random_invertible(&mut rng), r.random_hermitian(&mut rng)),
                        Relation::ConjH => (r.random_invertible(&mut rng), zero.clone()),
                        Relation::Braid => (r.random_invertible_hermitian(&mut rng), zero.clone()),
                        Relation::WSquare => unreachable!(),
                    })
                    .collect())
            }
        }
    }

    /// Checks the given relations at the operator level. In sampled mode
    /// `samples` instances are drawn per relation (one for w² = h_{−1}).
    pub fn check_relations(&self, rels: &[Relation], mode: ValidationMode) -> Result<RelationReport> {
        let mut relations = BTreeMap::new();
        for (i, &rel) in rels.iter().enumerate() {
            let mut rep = ClauseReport::new();
            for (x, y) in self.parameter_sets(rel, mode, i as u64 + 1)? {
                let (lhs, rhs) = self.relation_words(rel, &x, &y)?;
                let diff = self.words_agree(&lhs, &rhs)?;
                rep.record(diff.is_none(), || {
                    let (row, col) = diff.unwrap_or_default();
                    let params = match rel {
                        Relation::WSquare => String::new(),
                        Relation::ConjH | Relation::Braid => format!("t={x}"),
                        Relation::AddU => format!("s={x}, s'={y}"),
                        Relation::MulH => format!("t={x}, t'={y}"),
                        Relation::ConjU => format!("t={x}, s={y}"),
                    };
                    format!("{params} differs at entry ({row},{col})").trim_start().to_string()
                });
            }
            relations.insert(rel.id().to_string(), rep);
        }
        Ok(RelationReport { variant: self.variant, relations })
    }

    pub fn check_all_relations(&self, mode: ValidationMode) -> Result<RelationReport> {
        self.check_relations(&Relation::ALL, mode)
    }

    /// Inserts a random instance of a relation (rewritten as a word equal to
    /// the identity) at a random position of the Bruhat word of g.
    pub fn alternative_word<R: Rng + ?Sized>(&self, g: &GroupElem, rng: &mut R) -> Result<GenWord> {
        let r = self.ring();
        let mut word = self.group.bruhat_decompose(g)?.0;
        let t = r.random_invertible(rng);
        let s = r.random_hermitian(rng);
        let minus = r.neg(&r.identity());
        let identity_word = match rng.gen_range(0..5) {
            0 => vec![Token::U(s.clone()), Token::U(r.neg(&s))],
            1 => vec![Token::H(t.clone()), Token::H(r.inv(&t)?)],
            2 => vec![Token::W, Token::W, Token::H(minus)],
            3 => {
                // h_t u_s h_t⁻¹ u_{−tst*}
                let tst = r.mul(&r.mul(&t, &s), &r.star(&t));
                vec![Token::H(t.clone()), Token::U(s), Token::H(r.inv(&t)?), Token::U(r.neg(&tst))]
            }
            _ => {
                // w u_{t⁻¹} w u_t w u_{t⁻¹} h_{t⁻¹} for hermitian t
                let th = r.random_invertible_hermitian(rng);
                let ti = r.inv(&th)?;
                vec![
                    Token::W,
                    Token::U(ti.clone()),
                    Token::W,
                    Token::U(th),
                    Token::W,
                    Token::U(ti.clone()),
                    Token::H(ti),
                ]
            }
        };
        let pos = rng.gen_range(0..=word.len());
        word.splice(pos..pos, identity_word);
        Ok(GenWord(word))
    }

    /// ρ(g₁)ρ(g₂) = ρ(g₁g₂), exactly.
    pub fn check_product(&self, g1: &GroupElem, g2: &GroupElem) -> Result<bool> {
        let lhs = self.rho_factored(g1)?.then(self.rho_factored(g2)?);
        let rhs = self.rho_factored(&self.group.mul(g1, g2))?;
        Ok(lhs.compare(&rhs, self.dim, self.dim)?.is_none())
    }
}

/// Outcome of the floating-point homomorphism check.
#[derive(Clone, Debug, Serialize)]
pub struct FloatHomReport {
    pub pairs: u64,
    pub max_diff: f64,
    pub tolerance: f64,
    /// Indices (i, j) of the worst pair when it exceeds the tolerance.
    pub counterexample: Option<(usize, usize)>,
}

impl FloatHomReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// ρ(gᵢ)ρ(gⱼ) ≈ ρ(gᵢgⱼ) for all ordered pairs of a group given as a list
/// of all its elements.
pub fn float_homomorphism(rep: &WeilRep, elems: &[GroupElem], tolerance: f64) -> Result<FloatHomReport> {
    let index: std::collections::HashMap<&GroupElem, usize> = elems.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let ops: Vec<ComplexOperator> = elems.iter().map(|g| Ok(rep.rho(g)?.to_complex())).collect::<Result<_>>()?;
    let mut max_diff: f64 = 0.0;
    let mut worst = (0, 0);
    for (i, a) in elems.iter().enumerate() {
        for (j, b) in elems.iter().enumerate() {
            let k = *index.get(&rep.group().mul(a, b)).ok_or(Error::NotMember)?;
            let diff = ops[i].mul(&ops[j]).max_diff(&ops[k]);
            if diff > max_diff {
                max_diff = diff;
                worst = (i, j);
            }
        }
    }
    let n = elems.len() as u64;
    Ok(FloatHomReport {
        pairs: n * n,
        max_diff,
        tolerance,
        counterexample: (max_diff > tolerance).then_some(worst),
    })
}

/// Runs the full relation suite for both kernels and returns the unique
/// variant satisfying all of them.
pub fn resolve_sign(data: &WeilData, mode: ValidationMode) -> Result<SignResolution> {
    let mut reports = Vec::new();
    for v in WSignVariant::ALL {
        reports.push(WeilRep::new(data.clone(), v)?.check_all_relations(mode)?);
    }
    let passing: Vec<&RelationReport> = reports.iter().filter(|r| r.passed()).collect();
    match passing.as_slice() {
        [one] => {
            let certified = one.variant;
            let rejected_witness = reports
                .iter()
                .find(|r| r.variant != certified)
                .and_then(RelationReport::witness)
                .unwrap_or_default();
            Ok(SignResolution { certified, rejected_witness, reports })
        }
        [] => Err(Error::SignResolution("neither kernel satisfies the relations".into())),
        _ => Err(Error::SignResolution("both kernels satisfy the relations".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use crate::ffield::{Elem, FieldCtx};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rep(q: u64, n: usize, v: WSignVariant) -> WeilRep {
        let f = FieldCtx::from_order(q).unwrap();
        WeilRep::new(WeilData::new(MatrixRing::new(f, n)), v).unwrap()
    }

    #[test]
    fn generator_examples() {
        let w = rep(5, 1, WSignVariant::PlusA);
        let r = w.ring().clone();
        assert!(w.op_u(&r.zero()).unwrap().is_identity());
        assert!(w.op_h(&r.identity()).unwrap().is_identity());
        let ow = w.op_w();
        assert_eq!(ow.entry(0, 0), CycloNum::from_rational(5, BigRational::new((-1).into(), 5.into())));
        // α(g) = −1 on every nonzero entry of op_h(g).
        let g = r.scalar(r.field().generator());
        let h = w.op_h(&g).unwrap();
        for row in 0..25 {
            for col in 0..25 {
                let e = h.entry(row, col);
                assert!(e.is_zero() || e == CycloNum::from_int(5, -1));
            }
        }
        // Diagonal of op_u(1) is ψ(N(a)/2).
        let u = w.op_u(&r.identity()).unwrap();
        let f = r.field();
        for a in f.elements() {
            let x = a.index();
            let expected = f.psi(f.mul(f.inv2(), f.nm(a)));
            let got = u.entry(x, x).lift(f.conductor()).unwrap();
            assert_eq!(got, expected);
        }
        assert!(w.op_u(&r.scalar(f.generator())).is_err());
        assert!(w.op_h(&r.zero()).is_err());
    }

    #[test]
    fn w_square_and_fourth_power() {
        for v in WSignVariant::ALL {
            let w = rep(5, 1, v);
            let r = w.ring().clone();
            let ow = w.op_w();
            let sq = ow.mul(&ow).unwrap();
            assert_eq!(sq, w.op_h(&r.neg(&r.identity())).unwrap());
            assert!(sq.mul(&sq).unwrap().is_identity());
            // Row orthogonality of the kernel.
            assert!(ow.adjoint().mul(&ow).unwrap().is_identity());
        }
    }

    #[test]
    fn plus_kernel_is_certified_at_rank_one() {
        for q in [5, 7] {
            let f = FieldCtx::from_order(q).unwrap();
            let data = WeilData::new(MatrixRing::new(f, 1));
            let res = resolve_sign(&data, ValidationMode::Exhaustive).unwrap();
            assert_eq!(res.certified, WSignVariant::PlusA);
            assert!(res.rejected_witness.starts_with("relation 5"), "{}", res.rejected_witness);
            let minus = &res.reports[0];
            assert_eq!(minus.relations["2"].status, Status::Pass);
            assert_eq!(minus.relations["4"].status, Status::Pass);
            assert_eq!(res.reports[1].relations["4"].count_checked, (q * q - 1) as u64);
        }
    }

    #[test]
    fn sampled_relations_at_rank_two() {
        let w = rep(5, 2, WSignVariant::PlusA);
        let mode = ValidationMode::Sampled { samples: 3, seed: 11 };
        let rep = w.check_all_relations(mode).unwrap();
        assert!(rep.passed(), "{:?}", rep.witness());
        assert_eq!(rep.instances(), 16);
        let minus = rep_minus_braid();
        assert!(!minus);
    }

    fn rep_minus_braid() -> bool {
        let w = rep(5, 2, WSignVariant::MinusA);
        let mode = ValidationMode::Sampled { samples: 3, seed: 11 };
        w.check_relations(&[Relation::Braid], mode).unwrap().passed()
    }

    #[test]
    fn rho_is_a_homomorphism_on_samples() {
        let w = rep(5, 1, WSignVariant::PlusA);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = w.group().clone();
        assert!(w.rho(&g.identity()).unwrap().is_identity());
        assert_eq!(w.rho(&g.identity()).unwrap().trace(), CycloNum::from_int(5, 25));
        for _ in 0..30 {
            let (a, b) = (g.random_element(&mut rng), g.random_element(&mut rng));
            assert!(w.check_product(&a, &b).unwrap());
            assert!(w.is_unitary(&a).unwrap());
            let alt = w.alternative_word(&a, &mut rng).unwrap();
            assert_eq!(g.reassemble(&alt).unwrap(), a);
            assert_eq!(w.rho_word(&alt).unwrap(), w.rho(&a).unwrap());
        }
    }

    #[test]
    fn float_check_on_a_subgroup_sample() {
        // The Borel part {h_t u_s} is closed under products.
        let w = rep(5, 1, WSignVariant::PlusA);
        let g = w.group().clone();
        let r = w.ring().clone();
        let borel: Vec<GroupElem> = r
            .field()
            .elements()
            .filter(|e| !e.is_zero())
            .flat_map(|t| {
                let g = &g;
                let r = &r;
                r.hermitian_enum().unwrap().map(move |s| g.mul(&g.h(&r.scalar(t)).unwrap(), &g.u(&s).unwrap()))
            })
            .collect();
        assert_eq!(borel.len(), 120);
        let rep = float_homomorphism(&w, &borel, 1e-9).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.pairs, 14_400);
    }

    #[test]
    fn minus_kernel_breaks_the_homomorphism() {
        let w = rep(5, 1, WSignVariant::MinusA);
        let g = w.group().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let failures = (0..20)
            .filter(|_| {
                let (a, b) = (g.random_element(&mut rng), g.random_element(&mut rng));
                !w.check_product(&a, &b).unwrap()
            })
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn w_trace_matches_gauss_sum() {
        for (q, n) in [(5, 1), (7, 1), (5, 2)] {
            for v in WSignVariant::ALL {
                let w = rep(q, n, v);
                let f = w.ring().field().clone();
                let t = w.op_w().trace().lift(f.conductor()).unwrap();
                assert_eq!(t, w.expected_w_trace().unwrap());
            }
        }
    }

    #[test]
    fn twisted_character_still_certifies_plus() {
        let f = FieldCtx::from_order(5).unwrap();
        let data = WeilData::new(MatrixRing::new(f.clone(), 1)).with_twist(Elem(7)).unwrap();
        let res = resolve_sign(&data, ValidationMode::Exhaustive).unwrap();
        assert_eq!(res.certified, WSignVariant::PlusA);
    }

    #[test]
    fn dump_lists_every_entry() {
        let w = rep(5, 1, WSignVariant::PlusA);
        let json = serde_json::to_value(w.op_w()).unwrap();
        assert_eq!(json["rows"], 25);
        assert_eq!(json["entries"].as_array().unwrap().len(), 625);
        assert_eq!(json["entries"][0]["coeffs"][0], serde_json::json!([-1, 5]));
    }
}
