//! The group SL*^{-1}(2, Aₙ) ≅ U(n,n)(K/k) of 2×2 block matrices over Aₙ,
//! its generators h_t, u_s, w, and words in them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::astar::{MatA, MatrixRing, ModVec};
use crate::error::{Error, Result};
use crate::ffield::Elem;

/// Default bound on the order of an enumerated group.
pub const DEFAULT_GROUP_BOUND: u64 = 5000;

/// A 2×2 block matrix (a b; c d) over Aₙ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElem {
    pub a: MatA,
    pub b: MatA,
    pub c: MatA,
    pub d: MatA,
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{};{};{}", self.a, self.b, self.c, self.d)
    }
}

impl FromStr for GroupElem {
    type Err = Error;

    /// Parses four `;`-separated blocks of comma-separated element indices.
    fn from_str(s: &str) -> Result<Self> {
        let blocks: Vec<MatA> = s.split(';').map(str::parse).collect::<Result<_>>()?;
        match <[MatA; 4]>::try_from(blocks) {
            Ok([a, b, c, d]) if a.n() == b.n() && b.n() == c.n() && c.n() == d.n() => {
                Ok(GroupElem { a, b, c, d })
            }
            _ => Err(Error::Parse(format!("expected four equal-size blocks in {s:?}"))),
        }
    }
}

/// A generator token.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    /// h_t for invertible t.
    H(MatA),
    /// u_s for hermitian s.
    U(MatA),
    W,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::H(t) => write!(f, "H[{t}]"),
            Token::U(s) => write!(f, "U[{s}]"),
            Token::W => write!(f, "W"),
        }
    }
}

/// A word in the generators, read left to right as a matrix product.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GenWord(pub Vec<Token>);

impl fmt::Display for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Token::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for GenWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        for part in s.split_whitespace() {
            let tok = if part == "W" {
                Token::W
            } else if let Some(body) = part.strip_prefix("H[").and_then(|r| r.strip_suffix(']')) {
                Token::H(body.parse()?)
            } else if let Some(body) = part.strip_prefix("U[").and_then(|r| r.strip_suffix(']')) {
                Token::U(body.parse()?)
            } else {
                return Err(Error::Parse(format!("unknown token {part:?}")));
            };
            tokens.push(tok);
        }
        Ok(GenWord(tokens))
    }
}

/// The group SL*^{-1}(2, Aₙ) over a fixed matrix ring.
#[derive(Clone, Debug)]
pub struct UnitaryGroup {
    ring: MatrixRing,
}

impl UnitaryGroup {
    /// Rejects q ≤ 3, where the generators-and-relations description is not
    /// available.
    pub fn new(ring: MatrixRing) -> Result<Self> {
        let q = ring.field().q();
        if q <= 3 {
            return Err(Error::PresentationHypothesis(q as u64));
        }
        Ok(UnitaryGroup { ring })
    }

    pub fn ring(&self) -> &MatrixRing {
        &self.ring
    }

    /// q(q−1)(q+1)² at n = 1; in general |U(n,n)| = q^{n(2n−1)} Π_{i=1}^{2n} (q^i − (−1)^i).
    pub fn order(&self) -> u128 {
        let q = self.ring.field().q() as u128;
        let n = self.ring.n() as u32;
        let mut ord = q.pow(n * (2 * n - 1));
        for i in 1..=2 * n {
            let qi = q.pow(i);
            ord *= if i % 2 == 0 { qi - 1 } else { qi + 1 };
        }
        ord
    }

    pub fn identity(&self) -> GroupElem {
        let r = &self.ring;
        GroupElem { a: r.identity(), b: r.zero(), c: r.zero(), d: r.identity() }
    }

    pub fn h(&self, t: &MatA) -> Result<GroupElem> {
        let r = &self.ring;
        r.check_dim(t)?;
        let tinv = r.inv(t)?;
        Ok(GroupElem { a: t.clone(), b: r.zero(), c: r.zero(), d: r.star(&tinv) })
    }

    pub fn u(&self, s: &MatA) -> Result<GroupElem> {
        let r = &self.ring;
        r.check_dim(s)?;
        if !r.is_hermitian(s) {
            return Err(Error::NotHermitian);
        }
        Ok(GroupElem { a: r.identity(), b: s.clone(), c: r.zero(), d: r.identity() })
    }

    /// w = (0 1; −1 0).
    pub fn w(&self) -> GroupElem {
        let r = &self.ring;
        GroupElem { a: r.zero(), b: r.identity(), c: r.neg(&r.identity()), d: r.zero() }
    }

    pub fn token(&self, tok: &Token) -> Result<GroupElem> {
        match tok {
            Token::H(t) => self.h(t),
            Token::U(s) => self.u(s),
            Token::W => Ok(self.w()),
        }
    }

    /// The six block identities a*c = c*a, ab* = ba*, b*d = d*b, cd* = dc*,
    /// ad* − bc* = 1 and a*d − c*b = 1.
    pub fn is_member(&self, g: &GroupElem) -> bool {
        let r = &self.ring;
        if [&g.a, &g.b, &g.c, &g.d].iter().any(|m| m.n() != r.n()) {
            return false;
        }
        let (a, b, c, d) = (&g.a, &g.b, &g.c, &g.d);
        let (sa, sb, sc, sd) = (r.star(a), r.star(b), r.star(c), r.star(d));
        let one = r.identity();
        r.mul(&sa, c) == r.mul(&sc, a)
            && r.mul(a, &sb) == r.mul(b, &sa)
            && r.mul(&sb, d) == r.mul(&sd, b)
            && r.mul(c, &sd) == r.mul(d, &sc)
            && r.sub(&r.mul(a, &sd), &r.mul(b, &sc)) == one
            && r.sub(&r.mul(&sa, d), &r.mul(&sc, b)) == one
    }

    /// g J g* = J with J = (0 1; −1 0), i.e. g preserves i(x, y) = x J y*.
    pub fn preserves_form(&self, g: &GroupElem) -> bool {
        let r = &self.ring;
        let (sa, sb, sc, sd) = (r.star(&g.a), r.star(&g.b), r.star(&g.c), r.star(&g.d));
        // g J = (−b a; −d c); (g J) g* has blocks
        let tl = r.sub(&r.mul(&g.a, &sb), &r.mul(&g.b, &sa));
        let tr = r.sub(&r.mul(&g.a, &sd), &r.mul(&g.b, &sc));
        let bl = r.sub(&r.mul(&g.c, &sb), &r.mul(&g.d, &sa));
        let br = r.sub(&r.mul(&g.c, &sd), &r.mul(&g.d, &sc));
        tl.is_zero() && br.is_zero() && tr == r.identity() && bl == r.neg(&r.identity())
    }

    pub fn mul(&self, g: &GroupElem, h: &GroupElem) -> GroupElem {
        let r = &self.ring;
        let m = |x: &MatA, y: &MatA, z: &MatA, w: &MatA| r.add(&r.mul(x, y), &r.mul(z, w));
        GroupElem {
            a: m(&g.a, &h.a, &g.b, &h.c),
            b: m(&g.a, &h.b, &g.b, &h.d),
            c: m(&g.c, &h.a, &g.d, &h.c),
            d: m(&g.c, &h.b, &g.d, &h.d),
        }
    }

    /// g⁻¹ = (d* −b*; −c* a*).
    pub fn inv(&self, g: &GroupElem) -> GroupElem {
        let r = &self.ring;
        GroupElem {
            a: r.star(&g.d),
            b: r.neg(&r.star(&g.b)),
            c: r.neg(&r.star(&g.c)),
            d: r.star(&g.a),
        }
    }

    /// Row vector x ∈ K^{2n} times g.
    pub fn act(&self, x: &[Elem], g: &GroupElem) -> ModVec {
        let r = &self.ring;
        let n = r.n();
        let (x1, x2) = x.split_at(n);
        let top = r.vec_add(&r.vec_mul(x1, &g.a), &r.vec_mul(x2, &g.c));
        let bot = r.vec_add(&r.vec_mul(x1, &g.b), &r.vec_mul(x2, &g.d));
        [top, bot].concat()
    }

    /// The matrix product of a word.
    pub fn reassemble(&self, word: &GenWord) -> Result<GroupElem> {
        word.0.iter().try_fold(self.identity(), |acc, tok| Ok(self.mul(&acc, &self.token(tok)?)))
    }

    /// Merges adjacent U and H tokens and drops trivial ones.
    pub fn normalize(&self, word: GenWord) -> GenWord {
        let r = &self.ring;
        let mut out: Vec<Token> = Vec::with_capacity(word.0.len());
        for tok in word.0 {
            let merged = match (out.last(), &tok) {
                (Some(Token::U(s)), Token::U(s2)) => Some(Token::U(r.add(s, s2))),
                (Some(Token::H(t)), Token::H(t2)) => Some(Token::H(r.mul(t, t2))),
                _ => None,
            };
            let next = match merged {
                Some(m) => {
                    out.pop();
                    m
                }
                None => tok,
            };
            let trivial = match &next {
                Token::U(s) => s.is_zero(),
                Token::H(t) => *t == r.identity(),
                Token::W => false,
            };
            if !trivial {
                out.push(next);
            }
        }
        GenWord(out)
    }

    /// Word for g: the big cell [U(ac⁻¹), W, H(−c), U(c⁻¹d)] when c is
    /// invertible, otherwise the big-cell word of g·u_s·w followed by
    /// [H(−1), W, U(−s)] for the first hermitian s with cs + d invertible.
    pub fn bruhat_decompose(&self, g: &GroupElem) -> Result<GenWord> {
        let r = &self.ring;
        if !self.is_member(g) {
            return Err(Error::NotMember);
        }
        if let Ok(cinv) = r.inv(&g.c) {
            return Ok(self.normalize(self.big_cell(g, &cinv)));
        }
        for s in r.hermitian_enum()? {
            let lower = r.add(&r.mul(&g.c, &s), &g.d);
            if !r.is_invertible(&lower) {
                continue;
            }
            let shifted = self.mul(&self.mul(g, &self.u(&s)?), &self.w());
            let cinv = r.inv(&shifted.c)?;
            let mut word = self.big_cell(&shifted, &cinv);
            word.0.push(Token::H(r.neg(&r.identity())));
            word.0.push(Token::W);
            word.0.push(Token::U(r.neg(&s)));
            return Ok(self.normalize(word));
        }
        Err(Error::DecompositionFailed)
    }

    fn big_cell(&self, g: &GroupElem, cinv: &MatA) -> GenWord {
        let r = &self.ring;
        GenWord(vec![
            Token::U(r.mul(&g.a, cinv)),
            Token::W,
            Token::H(r.neg(&g.c)),
            Token::U(r.mul(cinv, &g.d)),
        ])
    }

    /// All elements at n = 1: the Borel part h_t u_s and the big cell
    /// u_x w h_t u_y, each exactly once.
    pub fn enumerate(&self, bound: u64) -> Result<Vec<GroupElem>> {
        let r = &self.ring;
        if r.n() != 1 {
            return Err(Error::BoundExceeded {
                what: "group enumeration (rank must be 1)",
                size: r.n() as u64,
                bound: 1,
            });
        }
        let order = self.order();
        if order > bound as u128 {
            return Err(Error::BoundExceeded { what: "group order", size: order as u64, bound });
        }
        let f = r.field();
        let herm: Vec<MatA> = r.hermitian_enum()?.collect();
        let units: Vec<MatA> = f.elements().skip(1).map(|e| r.scalar(e)).collect();
        let mut out = Vec::with_capacity(order as usize);
        for t in &units {
            let ht = self.h(t)?;
            for s in &herm {
                out.push(self.mul(&ht, &self.u(s)?));
            }
        }
        let w = self.w();
        for x in &herm {
            let uxw = self.mul(&self.u(x)?, &w);
            for t in &units {
                let left = self.mul(&uxw, &self.h(t)?);
                for y in &herm {
                    out.push(self.mul(&left, &self.u(y)?));
                }
            }
        }
        Ok(out)
    }

    /// i(x, y) = x J y* on K^{2n}.
    pub fn skew_form(&self, x: &[Elem], y: &[Elem]) -> Elem {
        let r = &self.ring;
        let f = r.field();
        let n = r.n();
        let (x1, x2) = x.split_at(n);
        let (y1, y2) = y.split_at(n);
        f.sub(r.pairing(x1, y2), r.pairing(x2, y1))
    }

    /// A uniformly random group element: builds a random hyperbolic basis
    /// r_1..r_n, s_1..s_n of (K^{2n}, i) with i(r_k, s_l) = δ_kl and takes it
    /// as the rows of g.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElem {
        let r = &self.ring;
        let f = r.field().clone();
        let n = r.n();
        let big = f.order();
        let mut pairs: Vec<(ModVec, ModVec)> = Vec::with_capacity(n);
        let project = |v: ModVec, pairs: &[(ModVec, ModVec)]| {
            pairs.iter().fold(v, |v, (rv, sv)| {
                let a = self.skew_form(&v, sv);
                let b = self.skew_form(&v, rv);
                let v = r.vec_add(&v, &r.vec_neg(&r.vec_scale(a, rv)));
                r.vec_add(&v, &r.vec_scale(b, sv))
            })
        };
        let random_vec = |rng: &mut R| -> ModVec { (0..2 * n).map(|_| Elem(rng.gen_range(0..big))).collect() };
        for _ in 0..n {
            let rv = loop {
                let v = project(random_vec(rng), &pairs);
                if v.iter().any(|e| !e.is_zero()) && self.skew_form(&v, &v).is_zero() {
                    break v;
                }
            };
            let sv = loop {
                let v = project(random_vec(rng), &pairs);
                let mu = self.skew_form(&rv, &v);
                if mu.is_zero() {
                    continue;
                }
                // i(r, λv) = λ̄ i(r, v); choose λ̄ = μ⁻¹.
                let lambda = f.conj(f.inv(mu).expect("nonzero"));
                let v = r.vec_scale(lambda, &v);
                if self.skew_form(&v, &v).is_zero() {
                    break v;
                }
            };
            pairs.push((rv, sv));
        }
        let block = |rows: Vec<&[Elem]>| {
            MatA::from_entries(n, rows.concat()).expect("n rows of length n")
        };
        let a = block(pairs.iter().map(|(rv, _)| &rv[..n]).collect());
        let b = block(pairs.iter().map(|(rv, _)| &rv[n..]).collect());
        let c = block(pairs.iter().map(|(_, sv)| &sv[..n]).collect());
        let d = block(pairs.iter().map(|(_, sv)| &sv[n..]).collect());
        GroupElem { a, b, c, d }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::FieldCtx;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn group(p: u64, n: usize) -> UnitaryGroup {
        UnitaryGroup::new(MatrixRing::new(FieldCtx::new(p, 1).unwrap(), n)).unwrap()
    }

    #[test]
    fn rejects_small_q() {
        let r = MatrixRing::new(FieldCtx::new(3, 1).unwrap(), 1);
        let err = UnitaryGroup::new(r).unwrap_err();
        assert!(matches!(err, Error::PresentationHypothesis(3)));
        assert!(err.to_string().contains("q > 3"));
    }

    #[test]
    fn membership_examples() {
        let g = group(5, 1);
        let r = g.ring().clone();
        let f = r.field().clone();
        assert!(g.is_member(&g.identity()));
        assert!(g.is_member(&g.w()));
        let fake_u = GroupElem { a: r.identity(), b: r.scalar(f.generator()), c: r.zero(), d: r.identity() };
        assert!(!g.is_member(&fake_u));
        assert!(!g.preserves_form(&fake_u));
        assert!(matches!(g.u(&r.scalar(f.generator())), Err(Error::NotHermitian)));
        assert!(matches!(g.h(&r.zero()), Err(Error::Singular)));
    }

    #[test]
    fn generator_relations_as_matrices() {
        let g = group(5, 1);
        let r = g.ring().clone();
        let f = r.field().clone();
        let minus = r.neg(&r.identity());
        assert_eq!(g.h(&r.identity()).unwrap(), g.identity());
        assert_eq!(g.mul(&g.w(), &g.w()), g.h(&minus).unwrap());
        assert_eq!(g.inv(&g.w()), g.mul(&g.h(&minus).unwrap(), &g.w()));
        let herm: Vec<MatA> = r.hermitian_enum().unwrap().collect();
        let units: Vec<MatA> = f.elements().skip(1).map(|e| r.scalar(e)).collect();
        for t in &units {
            let ht = g.h(t).unwrap();
            for t2 in &units {
                assert_eq!(g.mul(&ht, &g.h(t2).unwrap()), g.h(&r.mul(t, t2)).unwrap());
            }
            for s in &herm {
                let lhs = g.mul(&ht, &g.u(s).unwrap());
                let tst = r.mul(&r.mul(t, s), &r.star(t));
                assert_eq!(lhs, g.mul(&g.u(&tst).unwrap(), &ht));
            }
            let tsi = r.star(&r.inv(t).unwrap());
            assert_eq!(g.mul(&g.w(), &ht), g.mul(&g.h(&tsi).unwrap(), &g.w()));
        }
        for s in &herm {
            for s2 in &herm {
                assert_eq!(g.mul(&g.u(s).unwrap(), &g.u(s2).unwrap()), g.u(&r.add(s, s2)).unwrap());
            }
        }
        // w u_{t⁻¹} w u_t w u_{t⁻¹} = h_t for invertible hermitian t.
        for t in herm.iter().filter(|t| r.is_invertible(t)) {
            let ti = r.inv(t).unwrap();
            let word = GenWord(vec![
                Token::W,
                Token::U(ti.clone()),
                Token::W,
                Token::U(t.clone()),
                Token::W,
                Token::U(ti),
            ]);
            assert_eq!(g.reassemble(&word).unwrap(), g.h(t).unwrap());
        }
    }

    #[test]
    fn relations_hold_at_rank_two() {
        let g = group(5, 2);
        let r = g.ring().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let t = r.random_invertible_hermitian(&mut rng);
            let ti = r.inv(&t).unwrap();
            let word = GenWord(vec![
                Token::W,
                Token::U(ti.clone()),
                Token::W,
                Token::U(t.clone()),
                Token::W,
                Token::U(ti),
            ]);
            assert_eq!(g.reassemble(&word).unwrap(), g.h(&t).unwrap());
        }
    }

    #[test]
    fn products_stay_in_group() {
        let g = group(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = g.random_element(&mut rng);
            let y = g.random_element(&mut rng);
            assert!(g.is_member(&x) && g.preserves_form(&x));
            let xy = g.mul(&x, &y);
            assert!(g.is_member(&xy));
            assert_eq!(g.mul(&x, &g.identity()), x);
            assert_eq!(g.mul(&x, &g.inv(&x)), g.identity());
        }
    }

    #[test]
    fn decomposition_examples() {
        let g = group(5, 1);
        let r = g.ring().clone();
        assert_eq!(g.bruhat_decompose(&g.w()).unwrap(), GenWord(vec![Token::W]));
        let s = r.scalar(r.field().from_int(3));
        let us = g.u(&s).unwrap();
        let word = g.bruhat_decompose(&us).unwrap();
        assert_eq!(g.reassemble(&word).unwrap(), us);
        let id_word = g.bruhat_decompose(&g.identity()).unwrap();
        assert_eq!(g.reassemble(&id_word).unwrap(), g.identity());
        let not_member = GroupElem { a: r.identity(), b: r.identity(), c: r.identity(), d: r.identity() };
        assert!(matches!(g.bruhat_decompose(&not_member), Err(Error::NotMember)));
    }

    #[test]
    fn decomposition_round_trip_rank_two() {
        let g = group(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let r = g.ring().clone();
        let mut elems: Vec<GroupElem> = (0..200).map(|_| g.random_element(&mut rng)).collect();
        // Small-cell elements: c singular but nonzero.
        for _ in 0..20 {
            let t = r.random_invertible(&mut rng);
            let s = r.random_hermitian(&mut rng);
            elems.push(g.mul(&g.h(&t).unwrap(), &g.u(&s).unwrap()));
            let partial = r.diag(&[Elem::ONE, Elem::ZERO]);
            let x = g.mul(&g.u(&partial).unwrap(), &g.w());
            let x = g.mul(&g.mul(&g.w(), &g.u(&partial).unwrap()), &x);
            elems.push(g.mul(&x, &g.h(&t).unwrap()));
        }
        for x in elems {
            let word = g.bruhat_decompose(&x).unwrap();
            assert_eq!(g.reassemble(&word).unwrap(), x);
        }
    }

    #[test]
    fn enumeration_matches_order_formula_and_is_closed() {
        for (p, order) in [(5u64, 720usize), (7, 2688)] {
            let g = group(p, 1);
            assert_eq!(g.order(), order as u128);
            let all = g.enumerate(DEFAULT_GROUP_BOUND).unwrap();
            assert_eq!(all.len(), order);
            let set: HashSet<&GroupElem> = all.iter().collect();
            assert_eq!(set.len(), order);
            assert!(all.iter().all(|x| g.is_member(x)));
        }
        assert!(group(5, 2).enumerate(DEFAULT_GROUP_BOUND).is_err());
        assert!(group(5, 1).enumerate(100).is_err());
    }

    #[test]
    fn every_element_decomposes_at_rank_one() {
        let g = group(5, 1);
        for x in g.enumerate(DEFAULT_GROUP_BOUND).unwrap() {
            let word = g.bruhat_decompose(&x).unwrap();
            assert_eq!(g.reassemble(&word).unwrap(), x);
            assert!(word.0.iter().filter(|t| **t == Token::W).count() <= 2);
        }
    }

    #[test]
    fn sampler_is_roughly_uniform_at_rank_one() {
        let g = group(5, 1);
        let all = g.enumerate(DEFAULT_GROUP_BOUND).unwrap();
        let index: std::collections::HashMap<&GroupElem, usize> =
            all.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut counts = vec![0u32; all.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 72_000;
        for _ in 0..draws {
            counts[index[&g.random_element(&mut rng)]] += 1;
        }
        // Expected 100 per element; chi-square with 719 degrees of freedom.
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - 100.0).powi(2) / 100.0).sum();
        assert!(chi2 < 900.0, "chi2 = {chi2}");
    }

    #[test]
    fn text_formats_round_trip() {
        let g = group(5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = g.random_element(&mut rng);
        assert_eq!(x.to_string().parse::<GroupElem>().unwrap(), x);
        let word = g.bruhat_decompose(&x).unwrap();
        assert_eq!(word.to_string().parse::<GenWord>().unwrap(), word);
        assert!("U[1,2] X".parse::<GenWord>().is_err());
        assert!("1;2;3".parse::<GroupElem>().is_err());
    }
}
