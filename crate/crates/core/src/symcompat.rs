//! Compatibility with the symplectic picture: E = K^{2n} viewed over k with
//! the alternating form j(x, y) = i(x, y) − i(y, x), i(x, y) = x J y*, and
//! the generator formulas of the Weil representation of Sp(E, j) restricted
//! to the unitary group, realized on functions on F⁻ ≅ M.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::astar::{MatA, MatrixRing, ModVec};
use crate::error::{Error, Result};
use crate::ffield::{Elem, FieldCtx, Subfield};
use crate::operator::{Factor, FactoredOp, Phase, PhaseKernel};
use crate::ugroup::{GenWord, GroupElem, Token, UnitaryGroup};
use crate::wdata::{ClauseReport, Status, ValidationMode, WeilData};
use crate::weilrep::{Relation, WSignVariant, WeilRep};

/// A fourth root of unity i^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Kappa(pub u8);

impl Kappa {
    pub const ALL: [Kappa; 4] = [Kappa(0), Kappa(1), Kappa(2), Kappa(3)];

    pub fn is_one(self) -> bool {
        self.0 % 4 == 0
    }

    /// Exponent of κ in Q(ζ_N) for 4 | N.
    fn exponent(self, conductor: u32) -> u32 {
        (self.0 as u32 % 4) * (conductor / 4)
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["1", "i", "-1", "-i"][(self.0 % 4) as usize])
    }
}

impl Serialize for Kappa {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// E with its forms and the character φ(μ) = ψ(−μ/2).
#[derive(Clone, Debug)]
pub struct SymplecticCtx {
    data: WeilData,
    group: UnitaryGroup,
    theta: Elem,
}

impl SymplecticCtx {
    pub fn new(data: WeilData) -> Result<Self> {
        let group = UnitaryGroup::new(data.ring().clone())?;
        let theta = data.ring().field().generator();
        Ok(SymplecticCtx { data, group, theta })
    }

    pub fn ring(&self) -> &MatrixRing {
        self.data.ring()
    }

    fn field(&self) -> &FieldCtx {
        self.data.ring().field()
    }

    pub fn group(&self) -> &UnitaryGroup {
        &self.group
    }

    /// i(x, y) = x J y* with J = (0 1; −1 0).
    pub fn i_form(&self, x: &[Elem], y: &[Elem]) -> Elem {
        let f = self.field();
        let n = self.ring().n();
        (0..n).fold(Elem::ZERO, |acc, l| {
            let t = f.sub(f.mul(x[l], f.conj(y[n + l])), f.mul(x[n + l], f.conj(y[l])));
            f.add(acc, t)
        })
    }

    pub fn j_form(&self, x: &[Elem], y: &[Elem]) -> Elem {
        self.field().sub(self.i_form(x, y), self.i_form(y, x))
    }

    /// φ(μ) = ψ(−μ/2), as an exponent of ζ_p.
    pub fn phi_exp(&self, mu: Elem) -> u32 {
        let f = self.field();
        self.data.psi_exp(f.neg(f.mul(f.inv2(), mu)))
    }

    /// M ≅ F⁻ = {(x, 0)}.
    pub fn embed(&self, x: &[Elem]) -> ModVec {
        let mut v = x.to_vec();
        v.extend(std::iter::repeat(Elem::ZERO).take(self.ring().n()));
        v
    }

    /// The k-basis {e_l, θ e_l} of E.
    pub fn k_basis(&self) -> Vec<ModVec> {
        let dim = 2 * self.ring().n();
        let mut out = Vec::with_capacity(2 * dim);
        for l in 0..dim {
            for s in [Elem::ONE, self.theta] {
                let mut v = vec![Elem::ZERO; dim];
                v[l] = s;
                out.push(v);
            }
        }
        out
    }

    /// Coordinates (a, b) of v = a + bθ over k.
    fn k_coords(&self, v: Elem) -> (Elem, Elem) {
        let f = self.field();
        let b = f.div(f.sub(v, f.conj(v)), f.sub(self.theta, f.conj(self.theta))).expect("θ ∉ k");
        (f.sub(v, f.mul(b, self.theta)), b)
    }

    /// det over k of the Gram matrix of j on the k-basis.
    pub fn gram_det(&self) -> Elem {
        let basis = self.k_basis();
        let ring = MatrixRing::new(self.ring().field().clone(), basis.len());
        let entries = basis.iter().flat_map(|x| basis.iter().map(|y| self.j_form(x, y))).collect();
        ring.det(&MatA::from_entries(basis.len(), entries).expect("square"))
    }

    /// j is k-valued, alternating and nondegenerate. At n = 1 the first two
    /// are checked on all of E × E, otherwise on the k-basis and `samples`
    /// random pairs.
    pub fn check_form<R: Rng + ?Sized>(&self, samples: usize, rng: &mut R) -> Result<Option<String>> {
        let f = self.field();
        let n = self.ring().n();
        let pairs: Vec<(ModVec, ModVec)> = if n == 1 {
            let all: Vec<ModVec> = MatrixRing::new(self.ring().field().clone(), 2).module_elements()?.collect();
            all.iter().flat_map(|x| all.iter().map(move |y| (x.clone(), y.clone()))).collect()
        } else {
            let basis = self.k_basis();
            let mut v: Vec<(ModVec, ModVec)> =
                basis.iter().flat_map(|x| basis.iter().map(move |y| (x.clone(), y.clone()))).collect();
            let e2 = MatrixRing::new(self.ring().field().clone(), 2 * n);
            v.extend((0..samples).map(|_| (e2.random_vec(rng), e2.random_vec(rng))));
            v
        };
        for (x, y) in &pairs {
            let j = self.j_form(x, y);
            if !f.in_subfield(j) {
                return Ok(Some(format!("j({x:?},{y:?}) not in k")));
            }
            if !self.j_form(x, x).is_zero() {
                return Ok(Some(format!("j(x,x) != 0 at x={x:?}")));
            }
            if j != f.tr(self.i_form(x, y)) {
                return Ok(Some(format!("j != Tr i at ({x:?},{y:?})")));
            }
        }
        if self.gram_det().is_zero() {
            return Ok(Some("j is degenerate".into()));
        }
        Ok(None)
    }

    /// φ(−2λ) = ψ(λ) for every λ ∈ K.
    pub fn check_phi(&self) -> bool {
        let f = self.field();
        let two = f.from_int(2);
        f.elements().all(|l| self.phi_exp(f.neg(f.mul(two, l))) == self.data.psi_exp(l))
    }

    /// j(xg, yg) = j(x, y) on all pairs of the k-basis. Returns a witness
    /// pair on failure.
    pub fn check_embedding(&self, g: &GroupElem) -> Option<(ModVec, ModVec)> {
        let basis = self.k_basis();
        for x in &basis {
            let xg = self.group.act(x, g);
            for y in &basis {
                if self.j_form(&xg, &self.group.act(y, g)) != self.j_form(x, y) {
                    return Some((x.clone(), y.clone()));
                }
            }
        }
        None
    }

    /// det over k of x ↦ xt on F⁻ = Kⁿ.
    pub fn det_on_f_minus(&self, t: &MatA) -> Elem {
        let n = self.ring().n();
        let basis: Vec<ModVec> = self.k_basis().into_iter().filter(|v| v[n..].iter().all(|e| e.is_zero())).collect();
        let rows: Vec<Elem> = basis
            .iter()
            .flat_map(|v| {
                let img = self.ring().vec_mul(&v[..n], t);
                img.into_iter().flat_map(|c| {
                    let (a, b) = self.k_coords(c);
                    [a, b]
                })
            })
            .collect();
        let ring = MatrixRing::new(self.ring().field().clone(), 2 * n);
        ring.det(&MatA::from_entries(2 * n, rows).expect("square"))
    }

    /// The H-token: f ↦ s(det h_t|F⁻) f(· t).
    pub fn factor_h(&self, t: &MatA) -> Result<Factor> {
        let r = self.ring();
        let tinv = r.inv(t)?;
        let sign = self.field().sign_char(self.det_on_f_minus(t), Subfield::Small)?;
        let target = (0..r.module_size()).map(|i| r.vec_index(&r.vec_mul(&r.vec_at(i), &tinv))).collect();
        Ok(Factor::Monomial {
            conductor: self.data.p(),
            target,
            phases: vec![Phase::new(sign, 0); r.module_size()],
        })
    }

    /// The U-token: multiplication by φ(j(x c(−u_s), x)) with the Cayley
    /// transform c(−u_s) = (0 s/2; 0 0).
    pub fn factor_u(&self, s: &MatA) -> Result<Factor> {
        let r = self.ring();
        if !r.is_hermitian(s) {
            return Err(Error::NotHermitian);
        }
        let cayley = GroupElem { a: r.zero(), b: r.scale(self.field().inv2(), s), c: r.zero(), d: r.zero() };
        let phases = (0..r.module_size())
            .map(|i| {
                let x = self.embed(&r.vec_at(i));
                Phase::new(1, self.phi_exp(self.j_form(&self.group.act(&x, &cayley), &x)))
            })
            .collect();
        Ok(Factor::Diagonal { conductor: self.data.p(), phases })
    }

    /// Conductor holding ζ_p and i.
    pub fn kappa_conductor(&self) -> u32 {
        let p = self.data.p();
        if p % 4 == 0 { p } else { 4 * p }
    }

    /// The W-token: κ q^{−n} Σ_y φ(j(xw, y)) f(y).
    pub fn factor_w(&self, kappa: Kappa) -> Factor {
        let r = self.ring();
        let d = r.module_size();
        let nn = self.kappa_conductor();
        let step = nn / self.data.p();
        let w = self.group.w();
        let xw: Vec<ModVec> = (0..d).map(|i| self.group.act(&self.embed(&r.vec_at(i)), &w)).collect();
        let ys: Vec<ModVec> = (0..d).map(|i| self.embed(&r.vec_at(i))).collect();
        let table = xw
            .iter()
            .flat_map(|x| ys.iter().map(move |y| (x, y)))
            .map(|(x, y)| self.phi_exp(self.j_form(x, y)) * step)
            .collect();
        let q = BigInt::from(self.field().q());
        let scale = BigRational::new(BigInt::one(), q.pow(r.n() as u32));
        let qsize = self.field().order() as usize;
        Factor::Kernel(PhaseKernel::from_table(d, nn, scale, kappa.exponent(nn), table, r.n(), qsize))
    }

    pub fn factor(&self, tok: &Token, kappa: Kappa) -> Result<Factor> {
        match tok {
            Token::H(t) => self.factor_h(t),
            Token::U(s) => self.factor_u(s),
            Token::W => Ok(self.factor_w(kappa)),
        }
    }

    pub fn factors(&self, word: &GenWord, kappa: Kappa) -> Result<FactoredOp> {
        Ok(FactoredOp::new(word.0.iter().map(|t| self.factor(t, kappa)).collect::<Result<_>>()?))
    }

    fn block(&self) -> usize {
        let d = self.ring().module_size();
        if d > 100 { d / 5 } else { d }
    }

    /// Checks the given relations with the symplectic generator formulas.
    fn relations_hold(&self, kappa: Kappa, rels: &[Relation], mode: ValidationMode) -> Result<Option<String>> {
        // Reuse the parameter sets and word shapes of the unitary side.
        let rep = WeilRep::new(self.data.clone(), WSignVariant::PlusA)?;
        let r = self.ring();
        for &rel in rels {
            let params: Vec<MatA> = match (rel, mode) {
                (Relation::WSquare, _) => vec![r.zero()],
                (_, ValidationMode::Exhaustive) => {
                    r.hermitian_enum()?.filter(|s| r.is_invertible(s)).collect()
                }
                (_, ValidationMode::Sampled { samples, seed }) => {
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                    (0..samples).map(|_| r.random_invertible_hermitian(&mut rng)).collect()
                }
            };
            for t in params {
                let (lhs, rhs) = rep.relation_words(rel, &t, &r.zero())?;
                let (l, rr) = (self.factors(&lhs, kappa)?, self.factors(&rhs, kappa)?);
                if let Some((a, b)) = l.compare(&rr, r.module_size(), self.block())? {
                    return Ok(Some(format!("relation {} at t={t} differs at ({a},{b})", rel.id())));
                }
            }
        }
        Ok(None)
    }
}

/// How κ was pinned down.
#[derive(Clone, Debug, Serialize)]
pub struct KappaResolution {
    pub kappa: Kappa,
    /// Candidates satisfying W² = H(−1).
    pub after_w_square: Vec<Kappa>,
    /// Witnesses against the rejected candidates.
    pub rejected: BTreeMap<String, String>,
    pub matches_claimed_one: bool,
}

/// Determines κ from w² = h_{−1}, then from the braid relation
/// w u_{t⁻¹} w u_t w u_{t⁻¹} = h_t when the first leaves several candidates.
pub fn resolve_kappa(ctx: &SymplecticCtx, mode: ValidationMode) -> Result<KappaResolution> {
    let mut rejected = BTreeMap::new();
    let mut after = Vec::new();
    for k in Kappa::ALL {
        match ctx.relations_hold(k, &[Relation::WSquare], mode)? {
            None => after.push(k),
            Some(w) => {
                rejected.insert(k.to_string(), w);
            }
        }
    }
    let mut survivors = Vec::new();
    for &k in &after {
        let res = if after.len() > 1 { ctx.relations_hold(k, &[Relation::Braid], mode)? } else { None };
        match res {
            None => survivors.push(k),
            Some(w) => {
                rejected.insert(k.to_string(), w);
            }
        }
    }
    match survivors.as_slice() {
        [k] => Ok(KappaResolution { kappa: *k, after_w_square: after, rejected, matches_claimed_one: k.is_one() }),
        [] => Err(Error::KappaResolution("no fourth root of unity satisfies the relations".into())),
        _ => Err(Error::KappaResolution(format!("{} candidates remain", survivors.len()))),
    }
}

/// Generator-wise comparison of the symplectic formulas with ρ.
#[derive(Clone, Debug, Serialize)]
pub struct CompatReport {
    pub certified_variant: WSignVariant,
    pub certified_kappa: Kappa,
    pub generators: BTreeMap<String, ClauseReport>,
    /// Spot check on whole words for random group elements.
    pub words: ClauseReport,
    /// Scalar of the H-token equals α(t).
    pub h_scalar_is_alpha: ClauseReport,
}

impl CompatReport {
    pub fn passed(&self) -> bool {
        self.generators.values().all(|c| c.status == Status::Pass)
            && self.words.status == Status::Pass
            && self.h_scalar_is_alpha.status == Status::Pass
    }
}

/// Compares every generator (all units and hermitian matrices at n = 1,
/// `samples` of each otherwise) and `word_samples` random elements.
pub fn compare_generatorwise<R: Rng + ?Sized>(
    ctx: &SymplecticCtx,
    variant: WSignVariant,
    kappa: Kappa,
    mode: ValidationMode,
    word_samples: usize,
    rng: &mut R,
) -> Result<CompatReport> {
    let rep = WeilRep::new(ctx.data.clone(), variant)?;
    let r = ctx.ring();
    let d = r.module_size();
    let (units, herm): (Vec<MatA>, Vec<MatA>) = match mode {
        ValidationMode::Exhaustive => {
            if r.n() != 1 {
                return Err(Error::BoundExceeded { what: "exhaustive generator comparison (rank 1 only)", size: r.n() as u64, bound: 1 });
            }
            (
                r.field().elements().filter(|e| !e.is_zero()).map(|e| r.scalar(e)).collect(),
                r.hermitian_enum()?.collect(),
            )
        }
        ValidationMode::Sampled { samples, .. } => (
            (0..samples).map(|_| r.random_invertible(rng)).collect(),
            (0..samples).map(|_| r.random_hermitian(rng)).collect(),
        ),
    };
    let mut generators = BTreeMap::new();
    let mut alpha_rep = ClauseReport::new();
    let compare = |tok: &Token| -> Result<Option<(usize, usize)>> {
        let w = FactoredOp::new(vec![ctx.factor(tok, kappa)?]);
        let rho = FactoredOp::new(vec![rep.factor(tok)?]);
        w.compare(&rho, d, ctx.block())
    };
    let mut h_rep = ClauseReport::new();
    for t in &units {
        let diff = compare(&Token::H(t.clone()))?;
        h_rep.record(diff.is_none(), || format!("t={t} differs at {diff:?}"));
        let s = ctx.field().sign_char(ctx.det_on_f_minus(t), Subfield::Small)?;
        alpha_rep.record(s == ctx.data.alpha(t)?, || format!("t={t}"));
    }
    generators.insert("H".to_string(), h_rep);
    let mut u_rep = ClauseReport::new();
    for s in &herm {
        let diff = compare(&Token::U(s.clone()))?;
        u_rep.record(diff.is_none(), || format!("s={s} differs at {diff:?}"));
    }
    generators.insert("U".to_string(), u_rep);
    let mut w_rep = ClauseReport::new();
    let diff = compare(&Token::W)?;
    w_rep.record(diff.is_none(), || format!("differs at {diff:?}"));
    generators.insert("W".to_string(), w_rep);
    let mut words = ClauseReport::new();
    for _ in 0..word_samples {
        let g = ctx.group.random_element(rng);
        let word = ctx.group.bruhat_decompose(&g)?;
        let diff = ctx.factors(&word, kappa)?.compare(&rep.factors(&word)?, d, ctx.block())?;
        words.record(diff.is_none(), || format!("g={g} differs at {diff:?}"));
    }
    Ok(CompatReport { certified_variant: variant, certified_kappa: kappa, generators, words, h_scalar_is_alpha: alpha_rep })
}
