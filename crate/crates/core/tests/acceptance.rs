//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are mathematically unattainable as
//! stated; they are still evaluated in full and reported as FAIL, and the
//! run only fails if one of them unexpectedly passes or another criterion
//! fails.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use unitary_weil::astar::{MatA, MatrixRing};
use unitary_weil::cli::{self, RunConfig, Task};
use unitary_weil::cyclo::CycloNum;
use unitary_weil::decomp::{self, Decomposition};
use unitary_weil::ffield::{Elem, FieldCtx, Subfield};
use unitary_weil::operator::Operator;
use unitary_weil::symcompat::{self, SymplecticCtx};
use unitary_weil::ugroup::{GroupElem, UnitaryGroup};
use unitary_weil::wdata::{ValidationMode, WeilData};
use unitary_weil::weilrep::{self, WSignVariant, WeilRep};
use unitary_weil::Error;

/// Σ_x ψ(⟨xu, x⟩) equals +q² at n = 2, not −q².
const KNOWN_FAILURES: &[u32] = &[1];

struct Outcome {
    pass: bool,
    detail: String,
}

fn ring(q: u64, n: usize) -> MatrixRing {
    MatrixRing::new(FieldCtx::from_order(q).unwrap(), n)
}

fn data(q: u64, n: usize) -> WeilData {
    WeilData::new(ring(q, n))
}

/// Gauss sum by direct summation of ψ over M, independent of the histogram code.
fn gauss_oracle(r: &MatrixRing, u: &MatA) -> CycloNum {
    let f = r.field();
    r.module_elements()
        .unwrap()
        .fold(CycloNum::zero(f.conductor()), |acc, x| acc + f.psi(r.quad(u, &x)))
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for (q, n) in [(5u64, 1usize), (7, 1), (5, 2)] {
        let r = ring(q, n);
        let f = r.field().clone();
        let target = -BigInt::from(q).pow(n as u32);
        let expected = CycloNum::from_rational(f.conductor(), BigRational::from_integer(target.clone()));
        let us: Vec<MatA> = if n == 1 {
            r.hermitian_enum().unwrap().filter(|s| r.is_invertible(s)).collect()
        } else {
            let ns = f.subfield_elements().find(|&e| !e.is_zero() && f.sign_char(e, Subfield::Small).unwrap() == -1).unwrap();
            let mut v = vec![r.identity(), r.diag(&[Elem::ONE, ns])];
            v.extend((0..10).map(|_| r.random_invertible_hermitian(&mut rng)));
            v
        };
        let mut observed = std::collections::BTreeSet::new();
        for u in &us {
            let g = r.gauss_sum_q(u).unwrap();
            assert_eq!(g, gauss_oracle(&r, u), "gauss sum disagrees with direct summation");
            observed.insert(g.to_string());
            pass &= g == expected;
        }
        notes.push(format!("({q},{n}): {} forms, observed {:?} vs expected {target}", us.len(), observed));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn criterion_2() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (q, n, mode) in [
        (5, 1, ValidationMode::Exhaustive),
        (7, 1, ValidationMode::Exhaustive),
        (5, 2, ValidationMode::Sampled { samples: 10_000, seed: 202 }),
    ] {
        let rep = data(q, n).validate(mode).unwrap();
        let checked: u64 = rep.clauses.values().map(|c| c.count_checked).sum();
        let failed: Vec<&String> = rep.clauses.iter().filter(|(_, c)| c.counterexample.is_some()).map(|(k, _)| k).collect();
        pass &= rep.passed();
        notes.push(format!("({q},{n}): c={}, {checked} checks, failing {failed:?}", rep.c));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn criterion_3() -> Outcome {
    let res = weilrep::resolve_sign(&data(5, 1), ValidationMode::Exhaustive).unwrap();
    let certified = res.reports.iter().find(|r| r.variant == res.certified).unwrap();
    let mut pass = certified.passed() && !res.rejected_witness.is_empty();
    let w = WeilRep::new(data(5, 2), res.certified).unwrap();
    let sampled = w.check_all_relations(ValidationMode::Sampled { samples: 100, seed: 303 }).unwrap();
    pass &= sampled.passed() && sampled.instances() >= 500;
    Outcome {
        pass,
        detail: format!(
            "(5,1): {} instances, certified {}, rejected witness [{}]; (5,2): {} sampled instances {}",
            certified.instances(),
            res.certified,
            res.rejected_witness,
            sampled.instances(),
            if sampled.passed() { "hold" } else { "FAIL" }
        ),
    }
}

fn criterion_4() -> Outcome {
    let w = WeilRep::new(data(5, 1), WSignVariant::PlusA).unwrap();
    let g = w.group().clone();
    let elems = g.enumerate(10_000).unwrap();
    let float = weilrep::float_homomorphism(&w, &elems, 1e-9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut exact_bad = 0;
    for _ in 0..5000 {
        let (a, b) = (&elems[rng.gen_range(0..elems.len())], &elems[rng.gen_range(0..elems.len())]);
        let prod = w.rho(a).unwrap().mul(&w.rho(b).unwrap()).unwrap();
        if prod != w.rho(&g.mul(a, b)).unwrap() {
            exact_bad += 1;
        }
    }
    let mut word_bad = 0;
    for _ in 0..1000 {
        let x = &elems[rng.gen_range(0..elems.len())];
        let alt = w.alternative_word(x, &mut rng).unwrap();
        if g.reassemble(&alt).unwrap() != *x || w.rho_word(&alt).unwrap() != w.rho(x).unwrap() {
            word_bad += 1;
        }
    }
    Outcome {
        pass: float.passed() && exact_bad == 0 && word_bad == 0,
        detail: format!(
            "float {} pairs max diff {:.2e}; exact 5000 pairs, {exact_bad} bad; 1000 alternative words, {word_bad} bad",
            float.pairs, float.max_diff
        ),
    }
}

/// Membership in U(1,1) straight from g J g* = J on 2×2 matrices over K.
fn brute_force_order(q: u64) -> usize {
    let f = FieldCtx::from_order(q).unwrap();
    let els: Vec<Elem> = f.elements().collect();
    let (one, zero) = (Elem::ONE, Elem::ZERO);
    let minus_one = f.neg(one);
    let mut count = 0;
    for &a in &els {
        for &b in &els {
            // Row (a, b) must satisfy i((a,b),(a,b)) = a b̄ − b ā = 0.
            if f.sub(f.mul(a, f.conj(b)), f.mul(b, f.conj(a))) != zero {
                continue;
            }
            for &c in &els {
                for &d in &els {
                    let tl = f.sub(f.mul(a, f.conj(b)), f.mul(b, f.conj(a)));
                    let tr = f.sub(f.mul(a, f.conj(d)), f.mul(b, f.conj(c)));
                    let bl = f.sub(f.mul(c, f.conj(b)), f.mul(d, f.conj(a)));
                    let br = f.sub(f.mul(c, f.conj(d)), f.mul(d, f.conj(c)));
                    if tl == zero && br == zero && tr == one && bl == minus_one {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for (q, expected) in [(5u64, 720usize), (7, 2688)] {
        let g = UnitaryGroup::new(ring(q, 1)).unwrap();
        let enumerated = g.enumerate(10_000).unwrap();
        let distinct: std::collections::HashSet<&GroupElem> = enumerated.iter().collect();
        let brute = brute_force_order(q);
        let classical = (q * (q + 1) * (q * q - 1)) as usize;
        let ok = enumerated.len() == expected
            && distinct.len() == expected
            && brute == expected
            && classical == expected
            && g.order() == expected as u128
            && enumerated.iter().all(|e| g.is_member(e));
        pass &= ok;
        notes.push(format!("q={q}: enumerated {}, brute force {brute}, formula {classical}", enumerated.len()));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn fixed_point_dims(q: usize, n: usize) -> Vec<usize> {
    let m = q.pow(2 * n as u32);
    (0..=q).map(|j| (m - 1) / (q + 1) + usize::from(j == 0)).collect()
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for q in [5u64, 7] {
        let w = WeilRep::new(data(q, 1), WSignVariant::PlusA).unwrap();
        let dec = Decomposition::new(w.ring().clone());
        let comps = dec.components(true).unwrap();
        let dims: Vec<usize> = comps.iter().map(|c| c.dim).collect();
        let ps: Vec<&Operator> = comps.iter().map(|c| c.projector.as_ref().unwrap()).collect();
        let mut ok = dims == fixed_point_dims(q as usize, 1);
        ok &= ps.iter().all(|p| &p.mul(p).unwrap() == *p);
        for (i, a) in ps.iter().enumerate() {
            for (j, b) in ps.iter().enumerate() {
                if i != j {
                    ok &= a.mul(b).unwrap().is_zero();
                }
            }
        }
        let one = BigRational::one();
        ok &= Operator::combine(&ps.iter().map(|p| (one.clone(), *p)).collect::<Vec<_>>()).unwrap().is_identity();
        let elems = w.group().enumerate(10_000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        for (k, g) in elems.iter().enumerate() {
            let rho = w.rho(g).unwrap();
            ok &= dec.perms().iter().all(|p| decomp::commutes_with_perm(&rho, p));
            // Dense products on a sample as a direct check.
            if k % 50 == 0 {
                let p = ps[rng.gen_range(0..ps.len())];
                ok &= p.mul(&rho).unwrap() == rho.mul(p).unwrap();
            }
        }
        pass &= ok;
        notes.push(format!("q={q}: {} components, dims {dims:?}, commuting with all {} elements", comps.len(), elems.len()));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for q in [5u64, 7] {
        let w = WeilRep::new(data(q, 1), WSignVariant::PlusA).unwrap();
        let dec = Decomposition::new(w.ring().clone());
        let elems = w.group().enumerate(10_000).unwrap();
        let r = decomp::character_inner_products(&w, &dec, &elems).unwrap();
        let diag: Vec<String> = (0..dec.order()).map(|j| r.gram[j][j].to_string()).collect();
        pass &= r.certifies_irreducibility();
        notes.push(format!("q={q}: <chi,chi> = {diag:?}, off-diagonal zero: {}", r.certifies_irreducibility()));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for (q, n) in [(5u64, 1usize), (7, 1), (5, 2)] {
        let d = data(q, n);
        let mode = if n == 1 { ValidationMode::Exhaustive } else { ValidationMode::Sampled { samples: 5, seed: 809 } };
        let variant = weilrep::resolve_sign(&d, if n == 1 { mode } else { ValidationMode::Sampled { samples: 5, seed: 810 } })
            .unwrap()
            .certified;
        let ctx = SymplecticCtx::new(d).unwrap();
        let k = symcompat::resolve_kappa(&ctx, mode).unwrap();
        let gen_mode = if n == 1 { ValidationMode::Exhaustive } else { ValidationMode::Sampled { samples: 50, seed: 811 } };
        let rep = symcompat::compare_generatorwise(&ctx, variant, k.kappa, gen_mode, 3, &mut rng).unwrap();
        let gens: u64 = rep.generators.values().map(|c| c.count_checked).sum();
        pass &= rep.passed();
        notes.push(format!(
            "({q},{n}): {variant}, kappa = {} ({}), {gens} generators equal: {}",
            k.kappa,
            if k.matches_claimed_one { "matches 1" } else { "differs from 1" },
            rep.passed()
        ));
    }
    Outcome { pass, detail: notes.join("; ") }
}

fn criterion_9() -> Outcome {
    let direct = UnitaryGroup::new(ring(3, 1));
    let direct_ok = matches!(&direct, Err(Error::PresentationHypothesis(3)))
        && direct.as_ref().unwrap_err().to_string().contains("q > 3");
    let report = cli::run(&RunConfig::new(3, 1, Task::All));
    let msg = report.error.clone().unwrap_or_default();
    Outcome { pass: direct_ok && msg.contains("q > 3") && !report.passed(), detail: msg }
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "Gauss sums equal -q^n", criterion_1),
        (2, "data axioms", criterion_2),
        (3, "presentation relations and sign resolution", criterion_3),
        (4, "homomorphism", criterion_4),
        (5, "group orders", criterion_5),
        (6, "isotypic decomposition", criterion_6),
        (7, "irreducibility", criterion_7),
        (8, "symplectic compatibility", criterion_8),
        (9, "q = 3 guard", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = HashMap::new();
    for (id, name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str()) || s == &id.to_string()) {
            continue;
        }
        let t = Instant::now();
        let out = f();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (out.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (unexpected)",
        };
        println!("criterion {id} [{name}]: {tag} in {:.1}s: {}", t.elapsed().as_secs_f64(), out.detail);
        if out.pass == known {
            unexpected.insert(id, tag);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected outcomes: {unexpected:?}");
        ExitCode::FAILURE
    }
}
