//! Decomposition of C^M under the norm-one scalars λ ∈ K (N(λ) = 1), which
//! act by x ↦ λx and commute with ρ. Each character of the cyclic group
//! C_{q+1} cuts out one isotypic component.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::astar::{MatA, MatrixRing};
use crate::cyclo::CycloNum;
use crate::error::{Error, Result};
use crate::ffield::{Elem, FieldCtx};
use crate::operator::Operator;
use crate::ugroup::GroupElem;
use crate::weilrep::WeilRep;

/// A norm-one scalar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CenterElem {
    pub lambda: Elem,
}

/// The q+1 norm-one elements, as powers λ₀^k of a fixed generator.
pub fn center_elems(field: &FieldCtx) -> Vec<CenterElem> {
    field.norm_one().into_iter().map(|lambda| CenterElem { lambda }).collect()
}

/// The permutation x ↦ λx of M, in canonical indices.
pub fn sigma(ring: &MatrixRing, lambda: Elem) -> Vec<usize> {
    (0..ring.module_size())
        .map(|i| ring.vec_index(&ring.vec_scale(lambda, &ring.vec_at(i))))
        .collect()
}

/// op · σ = σ · op, tested entrywise as op[σx][σy] = op[x][y].
pub fn commutes_with_perm(op: &Operator, perm: &[usize]) -> bool {
    (0..op.rows()).all(|x| (0..op.cols()).all(|y| op.entry_ints(perm[x], perm[y]) == op.entry_ints(x, y)))
}

/// One isotypic component.
#[derive(Clone, Debug, Serialize)]
pub struct IsoComponent {
    /// j such that λ₀ acts by ζ_{q+1}^j.
    pub pi_index: usize,
    pub dim: usize,
    #[serde(skip)]
    pub projector: Option<Operator>,
}

/// The center action on C^M for a fixed matrix ring.
#[derive(Clone, Debug)]
pub struct Decomposition {
    ring: MatrixRing,
    center: Vec<CenterElem>,
    perms: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn new(ring: MatrixRing) -> Self {
        let center = center_elems(ring.field());
        let perms = center.iter().map(|c| sigma(&ring, c.lambda)).collect();
        Decomposition { ring, center, perms }
    }

    pub fn center(&self) -> &[CenterElem] {
        &self.center
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// q + 1.
    pub fn order(&self) -> usize {
        self.center.len()
    }

    fn dim(&self) -> usize {
        self.ring.module_size()
    }

    /// Coefficients of P_j = (1/(q+1)) Σ_k ζ_{q+1}^{−jk} σ_{λ₀^k} in the group algebra.
    pub fn group_algebra_coeffs(&self, j: usize) -> Vec<CycloNum> {
        let m = self.order();
        let inv = BigRational::new(BigInt::one(), BigInt::from(m));
        (0..m)
            .map(|k| CycloNum::root_of_unity(m as u32, -((j * k % m) as i64)).scale(&inv))
            .collect()
    }

    /// P_j² = P_j computed in Q(ζ_{q+1})[C_{q+1}], which embeds faithfully.
    pub fn idempotent_in_group_algebra(&self, j: usize) -> bool {
        let c = self.group_algebra_coeffs(j);
        let m = c.len();
        (0..m).all(|k| {
            let sq = (0..m).fold(CycloNum::zero(m as u32), |acc, a| acc + &c[a] * &c[(k + m - a) % m]);
            sq == c[k]
        })
    }

    /// Dense P_j over Q(ζ_{q+1}).
    pub fn projector(&self, j: usize) -> Operator {
        let m = self.order();
        let d = self.dim();
        let mut data = vec![0i64; d * d * m];
        for (k, perm) in self.perms.iter().enumerate() {
            let e = (m - j * k % m) % m;
            for (x, &y) in perm.iter().enumerate() {
                data[(y * d + x) * m + e] += 1;
            }
        }
        let scale = BigRational::new(BigInt::one(), BigInt::from(m));
        Operator::from_parts(d, d, m as u32, scale, data).expect("projector shape")
    }

    /// trace(P_j) as an integer, from the fixed points of each σ_λ.
    pub fn rank_by_trace(&self, j: usize) -> Result<usize> {
        let m = self.order();
        let mut acc = CycloNum::zero(m as u32);
        for (k, perm) in self.perms.iter().enumerate() {
            let fixed = perm.iter().enumerate().filter(|(x, &y)| *x == y).count() as i64;
            acc = acc + CycloNum::root_of_unity(m as u32, -((j * k % m) as i64)).scale(&BigRational::from_integer(fixed.into()));
        }
        let tr = acc.scale(&BigRational::new(BigInt::one(), BigInt::from(m)));
        tr.as_rational()
            .filter(|r| r.is_integer())
            .and_then(|r| r.to_integer().to_usize())
            .ok_or(Error::DecompositionFailed)
    }

    /// All components. With `exact_rank` ranks come from row reduction of
    /// the dense projector, otherwise from its trace.
    pub fn components(&self, exact_rank: bool) -> Result<Vec<IsoComponent>> {
        (0..self.order())
            .map(|j| {
                if exact_rank {
                    let p = self.projector(j);
                    Ok(IsoComponent { pi_index: j, dim: p.rank(), projector: Some(p) })
                } else {
                    Ok(IsoComponent { pi_index: j, dim: self.rank_by_trace(j)?, projector: None })
                }
            })
            .collect()
    }

    /// Integer parts of χ_j(g) for every j: χ_j(g) = scale/(q+1) · v_j with
    /// v_j in Z[ζ_{p(q+1)}], from the twisted traces Σ_x ρ(g)[x][λx].
    fn character_ints(&self, rho: &Operator) -> (BigRational, Vec<Vec<i64>>) {
        let m = self.order();
        let p = rho.conductor() as usize;
        let big = p * m;
        let traces: Vec<Vec<i64>> = self
            .perms
            .iter()
            .map(|perm| {
                let mut t = vec![0i64; p];
                for (x, &y) in perm.iter().enumerate() {
                    for (a, &v) in t.iter_mut().zip(rho.entry_ints(x, y)) {
                        *a += v;
                    }
                }
                t
            })
            .collect();
        let chars = (0..m)
            .map(|j| {
                let mut v = vec![0i64; big];
                for (k, t) in traces.iter().enumerate() {
                    let shift = (big - (j * k % m) * p) % big;
                    for (e, &c) in t.iter().enumerate() {
                        v[(e * m + shift) % big] += c;
                    }
                }
                v
            })
            .collect();
        let scale = rho.scale() / BigRational::from_integer(BigInt::from(m));
        (scale, chars)
    }

    /// χ_j(g) = trace(ρ(g) P_j) for every j.
    pub fn characters(&self, rho: &Operator) -> Vec<CycloNum> {
        let big = rho.conductor() * self.order() as u32;
        let (scale, ints) = self.character_ints(rho);
        ints.iter().map(|v| CycloNum::from_group_ring(big, v, &scale)).collect()
    }
}

/// ⟨χ_i, χ_j⟩ over a list of group elements.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterReport {
    /// Gram matrix of the component characters, exact.
    pub gram: Vec<Vec<CycloNum>>,
    /// ⟨χ_ρ, χ_ρ⟩ for the whole representation.
    pub total: CycloNum,
    pub group_order: usize,
}

impl CharacterReport {
    /// Every component irreducible and pairwise distinct.
    pub fn certifies_irreducibility(&self) -> bool {
        self.gram.iter().enumerate().all(|(i, row)| {
            row.iter().enumerate().all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() })
        })
    }
}

fn conv_conj_add(acc: &mut [i64], a: &[i64], b: &[i64]) {
    let n = acc.len();
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                acc[(i + n - j) % n] += x * y;
            }
        }
    }
}

/// Exact inner products of the component characters, summed over `group`
/// (which must be the whole group for the values to mean anything).
pub fn character_inner_products(rep: &WeilRep, decomp: &Decomposition, group: &[GroupElem]) -> Result<CharacterReport> {
    let m = decomp.order();
    let big = rep.conductor() * m as u32;
    let nb = big as usize;
    // Σ_g scale_g² · v_i(g) v̄_j(g), grouped by scale to stay in integers.
    let mut acc: BTreeMap<BigRational, Vec<Vec<Vec<i64>>>> = BTreeMap::new();
    let mut total: BTreeMap<BigRational, Vec<i64>> = BTreeMap::new();
    for g in group {
        let rho = rep.rho(g)?;
        let (scale, v) = decomp.character_ints(&rho);
        let key = &scale * &scale;
        let slot = acc.entry(key.clone()).or_insert_with(|| vec![vec![vec![0; nb]; m]; m]);
        for i in 0..m {
            for j in 0..m {
                conv_conj_add(&mut slot[i][j], &v[i], &v[j]);
            }
        }
        let mut sum = vec![0i64; nb];
        for vi in &v {
            for (s, &x) in sum.iter_mut().zip(vi) {
                *s += x;
            }
        }
        conv_conj_add(total.entry(key).or_insert_with(|| vec![0; nb]), &sum, &sum);
    }
    let norm = BigRational::new(BigInt::one(), BigInt::from(group.len()));
    let finish = |parts: Vec<(&BigRational, &Vec<i64>)>| {
        parts.into_iter().fold(CycloNum::zero(big), |s, (k, v)| s + CycloNum::from_group_ring(big, v, &(k * &norm)))
    };
    let gram = (0..m)
        .map(|i| (0..m).map(|j| finish(acc.iter().map(|(k, s)| (k, &s[i][j])).collect())).collect())
        .collect();
    let total = finish(total.iter().collect());
    Ok(CharacterReport { gram, total, group_order: group.len() })
}

/// Monte Carlo estimate of ⟨χ_j, χ_j⟩ from uniform samples.
#[derive(Clone, Debug, Serialize)]
pub struct CharacterEstimate {
    pub pi_index: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

pub fn estimate_inner_products<R: Rng + ?Sized>(
    rep: &WeilRep,
    decomp: &Decomposition,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<CharacterEstimate>> {
    let m = decomp.order();
    let mut vals = vec![Vec::with_capacity(samples); m];
    for _ in 0..samples {
        let g = rep.group().random_element(rng);
        let chars = decomp.characters(&rep.rho(&g)?);
        for (j, c) in chars.iter().enumerate() {
            vals[j].push(c.embed_complex().norm_sqr());
        }
    }
    Ok(vals
        .into_iter()
        .enumerate()
        .map(|(pi_index, v)| {
            let k = v.len().max(1) as f64;
            let mean = v.iter().sum::<f64>() / k;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
            CharacterEstimate { pi_index, estimate: mean, std_error: (var / k).sqrt(), samples }
        })
        .collect())
}

/// Evidence that the norm-one scalars are all of the symmetry group of the
/// pair (χ, γ) among Aₙ-linear automorphisms of M.
#[derive(Clone, Debug, Serialize)]
pub struct MaximalityReport {
    /// Dimension over K of the matrices commuting with all of Aₙ.
    pub commutant_dim: usize,
    /// Number of λ ∈ K^× whose scalar action preserves χ and γ.
    pub preserving_scalars: usize,
    pub hermitian_checked: usize,
    pub holds: bool,
}

/// Aₙ-linear endomorphisms of M = Kⁿ are right multiplications by central
/// elements; the centralizer is computed by row reduction over K. Every
/// λ ∈ K^× is then tested against χ on all of M × M and against γ on all
/// of M for `hermitian_samples` hermitian u (all of them when n = 1).
pub fn maximality<R: Rng + ?Sized>(
    rep: &WeilRep,
    hermitian_samples: usize,
    rng: &mut R,
) -> Result<MaximalityReport> {
    let ring = rep.ring();
    let f = ring.field().clone();
    let n = ring.n();
    let commutant_dim = n * n - centralizer_rank(ring);
    let herm: Vec<MatA> = if n == 1 {
        ring.hermitian_enum()?.collect()
    } else {
        (0..hermitian_samples).map(|_| ring.random_hermitian(rng)).collect()
    };
    let data = rep.data();
    let xs: Vec<_> = ring.module_elements()?.collect();
    let mut preserving = 0;
    for lambda in f.elements().filter(|e| !e.is_zero()) {
        let chi_ok = xs.iter().all(|x| {
            let lx = ring.vec_scale(lambda, x);
            xs.iter().step_by(if n == 1 { 1 } else { 7 }).all(|y| {
                data.chi_exp(&lx, &ring.vec_scale(lambda, y)) == data.chi_exp(x, y)
            })
        });
        let gamma_ok = chi_ok
            && herm.iter().all(|u| {
                xs.iter().all(|x| data.gamma_exp_unchecked(u, &ring.vec_scale(lambda, x)) == data.gamma_exp_unchecked(u, x))
            });
        if gamma_ok {
            preserving += 1;
        }
    }
    let holds = commutant_dim == 1 && preserving == (f.q() + 1) as usize;
    Ok(MaximalityReport { commutant_dim, preserving_scalars: preserving, hermitian_checked: herm.len(), holds })
}

/// Rank over K of the linear map m ↦ (m E_ab − E_ab m)_{a,b} on Mₙ(K).
fn centralizer_rank(ring: &MatrixRing) -> usize {
    let f = ring.field();
    let n = ring.n();
    let nn = n * n;
    // Rows: one equation per (a, b, i, j); columns: entries of m.
    let mut rows: Vec<Vec<Elem>> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for i in 0..n {
                for j in 0..n {
                    // (m E_ab)_{ij} = δ_{jb} m_{ia};  (E_ab m)_{ij} = δ_{ia} m_{bj}
                    let mut row = vec![Elem::ZERO; nn];
                    if j == b {
                        row[i * n + a] = f.add(row[i * n + a], Elem::ONE);
                    }
                    if i == a {
                        row[b * n + j] = f.sub(row[b * n + j], Elem::ONE);
                    }
                    rows.push(row);
                }
            }
        }
    }
    let mut rank = 0;
    for c in 0..nn {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let inv = f.inv(rows[rank][c]).expect("nonzero pivot");
        let prow: Vec<Elem> = rows[rank].iter().map(|&x| f.mul(x, inv)).collect();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let k = rows[r][c];
                for (x, &y) in rows[r].iter_mut().zip(&prow) {
                    *x = f.sub(*x, f.mul(k, y));
                }
            }
        }
        rows[rank] = prow;
        rank += 1;
    }
    rank
}

/// Sanity helper for reports: dims must sum to |M|.
pub fn dims_sum(components: &[IsoComponent]) -> usize {
    components.iter().map(|c| c.dim).sum()
}
