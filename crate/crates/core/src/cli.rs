//! Command-line configuration, suite orchestration and the JSON report.
//!
//! Sampling uses `ChaCha8Rng` seeded from `--seed`; each suite derives its
//! own stream as `seed + k` for a fixed suite number k, so reports are
//! byte-identical across runs with the same configuration.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::astar::{MatA, MatrixRing};
use crate::cyclo::CycloNum;
use crate::decomp::{self, Decomposition};
use crate::error::{Error, Result};
use crate::ffield::{Elem, FieldCtx, FieldInfo, Subfield};
use crate::operator::FactoredOp;
use crate::symcompat::{self, Kappa, SymplecticCtx};
use crate::ugroup::{UnitaryGroup, DEFAULT_GROUP_BOUND};
use crate::wdata::{Status, ValidationMode, WeilData};
use crate::weilrep::{self, WSignVariant, WeilRep};

/// Report schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the enumeration bound.
pub const ENUM_BOUND_VAR: &str = "UWEIL_ENUM_BOUND";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    VerifyData,
    VerifyPresentation,
    VerifyHom,
    Gauss,
    Decompose,
    Irreducibility,
    Compatibility,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Float,
}

/// Verify the Weil representation of U(n,n)(F_{q²}/F_q).
#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "uweil", version)]
pub struct RunConfig {
    /// Order of the base field k (odd prime power > 3).
    #[arg(long)]
    pub q: u64,
    /// Matrix size n of Aₙ = Mₙ(F_{q²}).
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Task::All)]
    pub task: Task,
    /// Backend for the all-pairs homomorphism check.
    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    pub backend: Backend,
    /// Sample count for every sampled check (suite defaults otherwise).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report path.
    #[arg(long, default_value = "report.json")]
    pub out: PathBuf,
    /// Twist a ∈ k^× of the additive character, as a field element code.
    #[arg(long)]
    pub psi_twist: Option<u32>,
    /// Also dump ρ(w) to this path.
    #[arg(long)]
    pub dump_w: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(q: u64, n: usize, task: Task) -> Self {
        RunConfig {
            q,
            n,
            task,
            backend: Backend::Exact,
            samples: None,
            seed: 0,
            out: PathBuf::from("report.json"),
            psi_twist: None,
            dump_w: None,
        }
    }

    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(stream))
    }

    fn mode(&self, default_samples: usize, stream: u64) -> ValidationMode {
        if self.n == 1 {
            ValidationMode::Exhaustive
        } else {
            ValidationMode::Sampled { samples: self.samples_or(default_samples), seed: self.seed.wrapping_add(stream) }
        }
    }

    fn runs(&self, task: Task) -> bool {
        self.task == Task::All || self.task == task
    }
}

/// One named assertion.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub status: Status,
    pub checks: Vec<Check>,
    pub counterexamples: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        SuiteReport { name: name.into(), status: Status::Pass, checks: Vec::new(), counterexamples: Vec::new() }
    }

    fn check(&mut self, name: &str, ok: bool, detail: Value) {
        if !ok {
            self.status = Status::Fail;
        }
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name: name.into(), status, detail });
    }

    fn witness(&mut self, w: impl Into<String>) {
        self.counterexamples.push(w.into());
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Certified {
    pub w_sign_variant: Option<WSignVariant>,
    pub kappa: Option<Kappa>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldInfo>,
    pub suites: Vec<SuiteReport>,
    pub certified: Certified,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.suites.iter().all(SuiteReport::passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn enum_bound() -> Option<u64> {
    std::env::var(ENUM_BOUND_VAR).ok().and_then(|v| v.parse().ok())
}

fn exact(x: &CycloNum) -> Value {
    json!(x.to_string())
}

/// Runs the selected suites. Configuration errors (q ≤ 3, bounds, bad
/// twist) produce a report with `error` set.
pub fn run(config: &RunConfig) -> Report {
    let mut report = Report {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        field: None,
        suites: Vec::new(),
        certified: Certified::default(),
        error: None,
    };
    if let Err(e) = run_suites(config, &mut report) {
        report.error = Some(e.to_string());
    }
    report
}

fn build_data(config: &RunConfig) -> Result<(WeilData, FieldInfo)> {
    let field = FieldCtx::from_order(config.q)?;
    let info = field.info();
    let mut ring = MatrixRing::new(field.clone(), config.n);
    if let Some(b) = enum_bound() {
        ring = ring.with_bound(b);
    }
    // The group constructor carries the q > 3 guard.
    UnitaryGroup::new(ring.clone())?;
    let mut data = WeilData::new(ring);
    if let Some(code) = config.psi_twist {
        if code >= field.order() {
            return Err(Error::Parse(format!("twist code {code} out of range")));
        }
        data = data.with_twist(field.from_code(code))?;
    }
    Ok((data, info))
}

fn run_suites(config: &RunConfig, report: &mut Report) -> Result<()> {
    let (data, info) = build_data(config)?;
    report.field = Some(info);
    if config.runs(Task::Gauss) {
        report.suites.push(gauss_suite(config, &data)?);
    }
    if config.runs(Task::VerifyData) {
        report.suites.push(data_suite(config, &data)?);
    }
    let mut variant = None;
    if config.runs(Task::VerifyPresentation) {
        let (suite, v) = presentation_suite(config, &data)?;
        report.suites.push(suite);
        variant = v;
    }
    // Later suites need a kernel; resolve it if the presentation suite did not.
    let needs_rep = [Task::VerifyHom, Task::Decompose, Task::Irreducibility, Task::Compatibility]
        .iter()
        .any(|&t| config.runs(t));
    if needs_rep && variant.is_none() {
        variant = Some(weilrep::resolve_sign(&data, config.mode(20, 3))?.certified);
    }
    report.certified.w_sign_variant = variant;
    if let Some(v) = variant {
        let rep = WeilRep::new(data.clone(), v)?;
        if let Some(path) = &config.dump_w {
            std::fs::write(path, serde_json::to_string(&rep.op_w())?)?;
        }
        if config.runs(Task::VerifyHom) {
            report.suites.push(hom_suite(config, &rep)?);
        }
        if config.runs(Task::Decompose) {
            report.suites.push(decompose_suite(config, &rep)?);
        }
        if config.runs(Task::Irreducibility) {
            report.suites.push(irreducibility_suite(config, &rep)?);
        }
        if config.runs(Task::Compatibility) {
            let (suite, kappa) = compat_suite(config, &data, v)?;
            report.suites.push(suite);
            report.certified.kappa = Some(kappa);
        }
    }
    Ok(())
}

/// Invertible hermitian matrices to test: all of them at n = 1, otherwise
/// the diagonal forms diag(1, …, 1, δ) for each square class δ plus samples.
fn tested_hermitian(config: &RunConfig, ring: &MatrixRing, samples: usize) -> Result<Vec<MatA>> {
    if config.n == 1 {
        return Ok(ring.hermitian_enum()?.filter(|s| ring.is_invertible(s)).collect());
    }
    let f = ring.field();
    let mut out = Vec::new();
    let nonsquare = f.subfield_elements().find(|&e| !e.is_zero() && matches!(f.sign_char(e, Subfield::Small), Ok(-1)));
    for delta in [Some(Elem::ONE), nonsquare].into_iter().flatten() {
        let mut d = vec![Elem::ONE; ring.n()];
        d[ring.n() - 1] = delta;
        out.push(ring.diag(&d));
    }
    let mut rng = config.rng(1);
    out.extend((0..samples).map(|_| ring.random_invertible_hermitian(&mut rng)));
    Ok(out)
}

fn gauss_suite(config: &RunConfig, data: &WeilData) -> Result<SuiteReport> {
    let ring = data.ring();
    let f = ring.field();
    let mut suite = SuiteReport::new("gauss");
    let target = -BigInt::from(f.q()).pow(ring.n() as u32);
    let expected = CycloNum::from_rational(f.conductor(), BigRational::from_integer(target.clone()));
    let us = tested_hermitian(config, ring, config.samples_or(20))?;
    let mut values = std::collections::BTreeSet::new();
    let mut bad = 0usize;
    for u in &us {
        let twisted = ring.scale(data.twist(), u);
        let g = ring.gauss_sum_q(&twisted)?;
        values.insert(g.to_string());
        if g != expected {
            bad += 1;
            if suite.counterexamples.len() < 5 {
                suite.witness(format!("u={u}: sum={g}, expected {target}"));
            }
        }
    }
    suite.check(
        "sum_equals_minus_q_pow_n",
        bad == 0,
        json!({"tested": us.len(), "expected": target.to_string(), "observed_values": values, "mismatches": bad}),
    );
    Ok(suite)
}

fn data_suite(config: &RunConfig, data: &WeilData) -> Result<SuiteReport> {
    let mut suite = SuiteReport::new("verify-data");
    let report = data.validate(config.mode(10_000, 2))?;
    for (id, clause) in &report.clauses {
        suite.check(&format!("clause_{id}"), clause.status == Status::Pass, json!({"checked": clause.count_checked}));
        if let Some(w) = &clause.counterexample {
            suite.witness(format!("clause {id}: {w}"));
        }
    }
    suite.checks.push(Check { name: "c".into(), status: Status::Pass, detail: json!(report.c) });
    Ok(suite)
}

fn presentation_suite(config: &RunConfig, data: &WeilData) -> Result<(SuiteReport, Option<WSignVariant>)> {
    let mut suite = SuiteReport::new("verify-presentation");
    let mode = config.mode(100, 3);
    let res = match weilrep::resolve_sign(data, mode) {
        Ok(r) => r,
        Err(Error::SignResolution(msg)) => {
            suite.check("sign_resolution", false, json!(msg));
            return Ok((suite, None));
        }
        Err(e) => return Err(e),
    };
    for r in &res.reports {
        for (id, clause) in &r.relations {
            let ok = r.variant != res.certified || clause.status == Status::Pass;
            suite.check(
                &format!("{}_relation_{id}", r.variant),
                ok,
                json!({"checked": clause.count_checked, "holds": clause.status == Status::Pass}),
            );
        }
    }
    suite.check(
        "sign_resolution",
        !res.rejected_witness.is_empty(),
        json!({"certified": res.certified, "rejected_witness": res.rejected_witness}),
    );
    let rep = WeilRep::new(data.clone(), res.certified)?;
    let d = rep.dim();
    let w = rep.factor_w();
    let w4 = FactoredOp::new(vec![w.clone(), w.clone(), w.clone(), w.clone()]);
    suite.check("w_fourth_power_is_identity", w4.materialize(d)?.is_identity(), Value::Null);
    let trace = rep.op_w().trace().lift(rep.ring().field().conductor())?;
    let expected = rep.expected_w_trace()?;
    suite.check("w_trace_matches_gauss_sum", trace == expected, json!({"trace": trace.to_string()}));
    let mut rng = config.rng(4);
    let unitary = (0..config.samples_or(if config.n == 1 { 50 } else { 5 }))
        .map(|_| rep.is_unitary(&rep.group().random_element(&mut rng)))
        .collect::<Result<Vec<bool>>>()?;
    suite.check("rho_unitary", unitary.iter().all(|&u| u), json!({"checked": unitary.len()}));
    Ok((suite, Some(res.certified)))
}

fn hom_suite(config: &RunConfig, rep: &WeilRep) -> Result<SuiteReport> {
    let mut suite = SuiteReport::new("verify-hom");
    let group = rep.group();
    let mut rng = config.rng(5);
    suite.check("rho_identity", rep.rho(&group.identity())?.is_identity(), Value::Null);
    if config.backend == Backend::Float && config.n == 1 {
        let bound = enum_bound().unwrap_or(DEFAULT_GROUP_BOUND);
        let elems = group.enumerate(bound)?;
        let r = weilrep::float_homomorphism(rep, &elems, 1e-9)?;
        if let Some((i, j)) = r.counterexample {
            suite.witness(format!("g1={} g2={}", elems[i], elems[j]));
        }
        suite.check("float_all_pairs", r.passed(), json!({"pairs": r.pairs, "max_diff": format!("{:.3e}", r.max_diff)}));
    } else {
        let pairs = config.samples_or(if config.n == 1 { 5000 } else { 10 });
        let mut bad = 0;
        for _ in 0..pairs {
            let (a, b) = (group.random_element(&mut rng), group.random_element(&mut rng));
            if !rep.check_product(&a, &b)? {
                bad += 1;
                suite.witness(format!("g1={a} g2={b}"));
            }
        }
        suite.check("exact_pairs", bad == 0, json!({"pairs": pairs}));
    }
    let words = config.samples_or(if config.n == 1 { 1000 } else { 10 });
    let mut bad = 0;
    for _ in 0..words {
        let g = group.random_element(&mut rng);
        let alt = rep.alternative_word(&g, &mut rng)?;
        let diff = rep.factors(&alt)?.compare(&rep.rho_factored(&g)?, rep.dim(), rep.dim())?;
        if diff.is_some() {
            bad += 1;
            suite.witness(format!("g={g} word={alt}"));
        }
    }
    suite.check("word_independence", bad == 0, json!({"words": words}));
    Ok(suite)
}

fn decompose_suite(config: &RunConfig, rep: &WeilRep) -> Result<SuiteReport> {
    let mut suite = SuiteReport::new("decompose");
    let ring = rep.ring();
    let f = ring.field();
    let q = f.q() as usize;
    let d = rep.dim();
    let dec = Decomposition::new(ring.clone());
    suite.check("center_order", dec.order() == q + 1, json!(dec.order()));
    let ow = rep.op_w();
    let commute_w = dec.perms().iter().all(|p| decomp::commutes_with_perm(&ow, p));
    suite.check("center_commutes_with_w", commute_w, Value::Null);
    let exact = config.n == 1;
    let comps = dec.components(exact)?;
    let dims: Vec<usize> = comps.iter().map(|c| c.dim).collect();
    let formula_ok = comps
        .iter()
        .all(|c| c.dim == (d - 1) / (q + 1) + usize::from(c.pi_index == 0));
    suite.check(
        "dimensions",
        formula_ok && decomp::dims_sum(&comps) == d,
        json!({"dims": dims, "rank_method": if exact { "row-reduction" } else { "trace" }}),
    );
    let idem = (0..dec.order()).all(|j| dec.idempotent_in_group_algebra(j));
    suite.check("idempotent_in_group_algebra", idem, Value::Null);
    if exact {
        let ps: Vec<_> = comps.iter().map(|c| c.projector.clone().expect("dense projector")).collect();
        let idem = ps.iter().all(|p| p.mul(p).map(|pp| &pp == p).unwrap_or(false));
        suite.check("projectors_idempotent", idem, Value::Null);
        let mut orth = true;
        for (i, a) in ps.iter().enumerate() {
            for b in &ps[i + 1..] {
                orth &= a.mul(b)?.is_zero() && b.mul(a)?.is_zero();
            }
        }
        suite.check("projectors_orthogonal", orth, Value::Null);
        let one = BigRational::from_integer(1.into());
        let terms: Vec<_> = ps.iter().map(|p| (one.clone(), p)).collect();
        suite.check("projectors_sum_to_identity", crate::operator::Operator::combine(&terms)?.is_identity(), Value::Null);
    }
    // Every projector is a combination of the σ_λ, so commuting with every
    // σ_λ is commuting with every projector.
    let elems = if config.n == 1 {
        rep.group().enumerate(enum_bound().unwrap_or(DEFAULT_GROUP_BOUND))?
    } else {
        let mut rng = config.rng(6);
        (0..config.samples_or(100)).map(|_| rep.group().random_element(&mut rng)).collect()
    };
    let mut bad = 0;
    for g in &elems {
        let rho = rep.rho(g)?;
        if !dec.perms().iter().all(|p| decomp::commutes_with_perm(&rho, p)) {
            bad += 1;
            suite.witness(format!("g={g}"));
        }
    }
    suite.check("projectors_commute_with_rho", bad == 0, json!({"elements": elems.len()}));
    Ok(suite)
}

fn irreducibility_suite(config: &RunConfig, rep: &WeilRep) -> Result<SuiteReport> {
    let mut suite = SuiteReport::new("irreducibility");
    let dec = Decomposition::new(rep.ring().clone());
    let mut rng = config.rng(7);
    if config.n == 1 {
        let elems = rep.group().enumerate(enum_bound().unwrap_or(DEFAULT_GROUP_BOUND))?;
        let r = decomp::character_inner_products(rep, &dec, &elems)?;
        let diag: Vec<String> = (0..dec.order()).map(|j| r.gram[j][j].to_string()).collect();
        suite.check(
            "components_irreducible",
            r.gram.iter().enumerate().all(|(j, row)| row[j].is_one()),
            json!({"inner_products": diag, "group_order": r.group_order, "certified": true}),
        );
        let off = r
            .gram
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, v)| i == j || v.is_zero()));
        suite.check("components_orthogonal", off, Value::Null);
        let expected = CycloNum::from_int(r.total.conductor(), dec.order() as i64);
        suite.check("total_inner_product", r.total == expected, json!(exact(&r.total)));
    } else {
        let samples = config.samples_or(50);
        let est = decomp::estimate_inner_products(rep, &dec, samples, &mut rng)?;
        let detail: Vec<Value> = est
            .iter()
            .map(|e| {
                json!({"pi_index": e.pi_index, "estimate": format!("{:.4}", e.estimate),
                       "std_error": format!("{:.4}", e.std_error), "samples": e.samples})
            })
            .collect();
        suite.checks.push(Check {
            name: "monte_carlo_inner_products".into(),
            status: Status::Pass,
            detail: json!({"estimates": detail, "certified": false}),
        });
    }
    let m = decomp::maximality(rep, config.samples_or(4).min(20), &mut rng)?;
    suite.check("center_is_maximal", m.holds, serde_json::to_value(&m)?);
    Ok(suite)
}

fn compat_suite(config: &RunConfig, data: &WeilData, variant: WSignVariant) -> Result<(SuiteReport, Kappa)> {
    let mut suite = SuiteReport::new("compatibility");
    let ctx = SymplecticCtx::new(data.clone())?;
    let mut rng = config.rng(8);
    let form = ctx.check_form(config.samples_or(100), &mut rng)?;
    if let Some(w) = &form {
        suite.witness(w.clone());
    }
    suite.check("j_alternating_k_valued_nondegenerate", form.is_none(), Value::Null);
    suite.check("phi_minus_two_lambda_is_psi", ctx.check_phi(), Value::Null);
    let elems = if config.n == 1 {
        ctx.group().enumerate(enum_bound().unwrap_or(DEFAULT_GROUP_BOUND))?
    } else {
        (0..config.samples_or(100)).map(|_| ctx.group().random_element(&mut rng)).collect()
    };
    let bad: Vec<_> = elems.iter().filter(|g| ctx.check_embedding(g).is_some()).collect();
    suite.check("embedding_preserves_j", bad.is_empty(), json!({"elements": elems.len()}));
    let k = symcompat::resolve_kappa(&ctx, config.mode(5, 9))?;
    suite.checks.push(Check {
        name: "kappa".into(),
        status: Status::Pass,
        detail: json!({"kappa": k.kappa, "after_w_square": k.after_w_square,
                       "rejected": k.rejected, "equals_claimed_one": k.matches_claimed_one}),
    });
    let r = symcompat::compare_generatorwise(&ctx, variant, k.kappa, config.mode(100, 10), config.samples_or(if config.n == 1 { 100 } else { 5 }), &mut rng)?;
    for (name, c) in &r.generators {
        suite.check(&format!("generator_{name}"), c.status == Status::Pass, json!({"checked": c.count_checked}));
        if let Some(w) = &c.counterexample {
            suite.witness(format!("{name}: {w}"));
        }
    }
    suite.check("h_scalar_is_alpha", r.h_scalar_is_alpha.status == Status::Pass, json!({"checked": r.h_scalar_is_alpha.count_checked}));
    suite.check("random_words", r.words.status == Status::Pass, json!({"checked": r.words.count_checked}));
    Ok((suite, k.kappa))
}
