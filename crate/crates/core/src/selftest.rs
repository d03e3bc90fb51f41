//! The acceptance suite as a library: every criterion runs from a seed and
//! reports its worst deviations and any individual failures.

use std::time::Instant;

use num_complex::Complex64;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{is_rational_square, Rational, SquareClass};
use crate::brauer::{
    candidate_places, even_clifford_structure, hilbert_symbol_classes, Center,
    Place, QuaternionSymbol,
};
use crate::clifford::{center_of_even, Blade, CliffordAlgebra, CliffordElement};
use crate::error::{Error, Result};
use crate::hodge::{
    aligned_closed_form, aligned_closed_form_exact, aligned_weil_gram_exact, polarization_e, random_z,
    verify_cspin, verify_polarization, HodgeStructure2,
};
use crate::kugasatake::{ks_report, verify_embedding, ReportOptions};
use crate::qform::DiagonalForm;
use crate::report::Check;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tolerance: f64,
    pub witness_height: u64,
    pub oracle_bound: usize,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: 1e-9,
            witness_height: 50,
            oracle_bound: crate::clifford::DEFAULT_ORACLE_BOUND,
            seed: 0,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::Usage(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.witness_height < 1 {
            return Err(Error::Usage("witness_height must be at least 1".into()));
        }
        Ok(())
    }

    /// Riemann-relation residuals get one extra digit of slack.
    pub fn riemann_tolerance(&self) -> f64 {
        10.0 * self.tolerance
    }

    pub fn report_options(&self) -> ReportOptions {
        ReportOptions {
            tolerance: self.tolerance,
            riemann_tolerance: self.riemann_tolerance(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub module: String,
    pub check: String,
    pub deviation: f64,
    pub context: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub cases: usize,
    /// Worst deviation per check name.
    pub checks: Vec<Check>,
    pub failures: Vec<Failure>,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
    pub note: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let worst = self
            .checks
            .iter()
            .filter(|c| c.tolerance < 0.5)
            .map(|c| format!("{} {:.1e}/{:.0e}", c.name, c.max_deviation, c.tolerance))
            .collect::<Vec<_>>()
            .join(", ");
        let budget = match self.budget_seconds {
            Some(b) => format!("{:.2}s of {b}s", self.seconds),
            None => format!("{:.2}s", self.seconds),
        };
        let mut line = format!("criterion {} {verdict}: {} ({} cases, {budget})", self.id, self.name, self.cases);
        if !worst.is_empty() {
            line.push_str(&format!(" [{worst}]"));
        }
        if !self.note.is_empty() {
            line.push_str(&format!(" {}", self.note));
        }
        line
    }
}

/// Accumulates checks for one criterion.
struct Collector {
    checks: Vec<Check>,
    failures: Vec<Failure>,
    cases: usize,
}

impl Collector {
    fn new() -> Self {
        Collector {
            checks: Vec::new(),
            failures: Vec::new(),
            cases: 0,
        }
    }

    fn record(&mut self, module: &str, check: Check, context: impl FnOnce() -> String) {
        if !check.pass {
            self.failures.push(Failure {
                module: module.into(),
                check: check.name.clone(),
                deviation: check.max_deviation,
                context: context(),
            });
        }
        match self.checks.iter_mut().find(|c| c.name == check.name) {
            Some(c) => {
                if !(check.max_deviation <= c.max_deviation) {
                    c.max_deviation = check.max_deviation;
                }
                c.pass &= check.pass;
            }
            None => self.checks.push(check),
        }
    }

    fn error(&mut self, module: &str, check: &str, err: Error, context: String) {
        self.record(module, Check::holds(check, false), || format!("{context}: {err}"));
    }

    fn finish(self, id: u8, name: &str, start: Instant, budget: Option<f64>, note: String) -> CriterionResult {
        let seconds = start.elapsed().as_secs_f64();
        let mut checks = self.checks;
        let mut failures = self.failures;
        if let Some(b) = budget {
            let ok = seconds < b;
            checks.push(Check::within("runtime_seconds", seconds, b));
            if !ok {
                failures.push(Failure {
                    module: "selftest".into(),
                    check: "runtime_seconds".into(),
                    deviation: seconds,
                    context: format!("budget {b}s"),
                });
            }
        }
        CriterionResult {
            id,
            name: name.into(),
            pass: failures.is_empty() && checks.iter().all(|c| c.pass),
            cases: self.cases,
            checks,
            failures,
            seconds,
            budget_seconds: budget,
            note,
        }
    }
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn fmt_form(d: &[i64]) -> String {
    let parts: Vec<String> = d.iter().map(i64::to_string).collect();
    format!("<{}>", parts.join(","))
}

/// Random diagonal form of signature (2-, (n-2)+): two negative leading
/// coefficients, the rest positive, magnitudes drawn from `pool`.
pub fn random_hodge_form<R: Rng>(rng: &mut R, n: usize, pool: &[i64]) -> Vec<i64> {
    (0..n)
        .map(|i| {
            let m = pool.choose(rng).expect("nonempty pool").abs();
            if i < 2 {
                -m
            } else {
                m
            }
        })
        .collect()
}

pub fn run_all(cfg: &RunConfig) -> Vec<CriterionResult> {
    (1..=8).map(|id| run_criterion(id, cfg)).collect()
}

pub fn run_criterion(id: u8, cfg: &RunConfig) -> CriterionResult {
    match id {
        1 => trace_lemma(cfg),
        2 => classification_goldens(cfg),
        3 => center_oracle(cfg),
        4 => product_formula(cfg),
        5 => hodge_sweep(cfg),
        6 => aligned_closed_forms(cfg),
        7 => kuga_satake_reports(cfg),
        8 => embedding_equivariance(cfg),
        _ => panic!("no criterion {id}"),
    }
}

pub const CRITERIA: [(u8, &str); 8] = [
    (1, "trace lemma"),
    (2, "classification goldens"),
    (3, "center oracle equivalence"),
    (4, "Hilbert product formula"),
    (5, "Hodge verification sweep"),
    (6, "aligned-plane closed form"),
    (7, "Kuga-Satake reports"),
    (8, "embedding equivariance"),
];

fn rng_for(cfg: &RunConfig, id: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ u64::from(id))
}

pub const TRACE_FORMS_PER_N: usize = 12;

/// Tr(iota(e^a) e^b) against 0 / 2^{n-1} prod d_i^{a_i}, exactly, for every
/// same-parity pair of blades.
fn trace_lemma(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 1);
    let mut col = Collector::new();
    let pool = [-3, -2, -1, 1, 2, 3];
    for n in 1..=8usize {
        for _ in 0..TRACE_FORMS_PER_N {
            let d: Vec<i64> = (0..n).map(|_| *pool.choose(&mut rng).unwrap()).collect();
            let form = DiagonalForm::from_integers(&d).expect("nonzero coefficients");
            let alg = CliffordAlgebra::exact(&form);
            let top = q(1i64 << (n - 1));
            let mut bad = 0usize;
            let blades: Vec<Blade> = Blade::all(n).collect();
            for &a in &blades {
                let left = CliffordElement::blade(&alg, a).reversal();
                for &b in &blades {
                    if (a.grade() + b.grade()) % 2 == 1 {
                        continue;
                    }
                    let tr = (&left * &CliffordElement::blade(&alg, b)).trace().expect("even product");
                    let expected = if a == b {
                        a.indices().fold(top.clone(), |acc, i| acc * q(d[i - 1]))
                    } else {
                        Rational::zero()
                    };
                    if tr != expected {
                        bad += 1;
                    }
                }
            }
            col.cases += 1;
            col.record("clifford", Check::holds("trace_identity", bad == 0), || {
                format!("{} mismatched pairs for {}", bad, fmt_form(&d))
            });
        }
    }
    col.finish(1, "trace lemma", start, Some(5.0), String::new())
}

/// (center label, matrix size, split flag, ramification of D over Q)
type Golden = (Vec<i64>, &'static str, u64, bool, Option<Vec<Place>>);

fn goldens() -> Vec<Golden> {
    let mut g: Vec<Golden> = vec![(vec![-1, -1, 1], "Q", 1, true, Some(vec![]))];
    for d in [3u64, 7, 11] {
        g.push((
            vec![-1, -1, d as i64],
            "Q",
            1,
            false,
            Some(vec![Place::Prime(2), Place::Prime(d)]),
        ));
    }
    for (d, label) in [(1, "Q(sqrt -1)"), (2, "Q(sqrt -2)"), (3, "Q(sqrt -3)"), (5, "Q(sqrt -5)")] {
        g.push((vec![-1, -1, 1, 1, 1, d], label, 2, true, None));
    }
    g
}

fn classification_goldens(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut col = Collector::new();
    for (d, center, size, split, ram) in goldens() {
        col.cases += 1;
        let form = DiagonalForm::from_integers(&d).expect("valid golden");
        let s = match even_clifford_structure(&form) {
            Ok(s) => s,
            Err(e) => {
                col.error("brauer", "classification", e, fmt_form(&d));
                continue;
            }
        };
        let mut ok = s.center.label() == center && s.matrix_size == size && s.is_split == split;
        if let (Some(expected), Some(class)) = (&ram, &s.quaternion) {
            ok &= class.ramified().iter().copied().eq(expected.iter().copied());
        }
        col.record("brauer", Check::holds("classification", ok), || {
            format!(
                "{}: got center {} size {} split {} quaternion {:?}",
                fmt_form(&d),
                s.center.label(),
                s.matrix_size,
                s.is_split,
                s.quaternion.as_ref().map(|c| c.to_string())
            )
        });
        // split peeled symbols come with an explicit isotropic vector
        for sym in &s.symbols {
            match sym.is_split(cfg.witness_height) {
                Ok(cert) if cert.split => {
                    col.record("brauer", Check::holds("split_witness_found", cert.witness.is_some()), || {
                        format!("{sym} for {} within height {}", fmt_form(&d), cfg.witness_height)
                    });
                }
                Ok(_) => {}
                Err(e) => col.error("brauer", "split_witness_found", e, fmt_form(&d)),
            }
        }
    }
    col.finish(2, "classification goldens", start, Some(1.0), String::new())
}

/// Center of C^+(Q) from the commutant: (dimension, whether it is Q x Q).
pub fn oracle_center(form: &DiagonalForm, bound: usize) -> Result<(usize, bool)> {
    let alg = CliffordAlgebra::exact(form);
    let basis = center_of_even(&alg, bound)?;
    match basis.len() {
        1 => Ok((1, false)),
        2 => {
            let z = basis
                .iter()
                .find(|z| !z.is_scalar())
                .cloned()
                .ok_or_else(|| Error::Internal("center basis is scalar".into()))?;
            // z^2 = p + q z, solved on two coordinates that separate 1 and z
            let z2 = &z * &z;
            let (blade, zc) = z
                .terms()
                .find(|(b, _)| *b != Blade::ONE)
                .map(|(b, c)| (b, c.clone()))
                .expect("non-scalar");
            let qc = z2.coeff(blade) / zc;
            let p = z2.scalar_part() - qc.clone() * z.scalar_part();
            let check = &CliffordElement::scalar(&alg, p.clone()) + &z.scale(&qc);
            if check != z2 {
                return Err(Error::Internal("center is not generated by one quadratic element".into()));
            }
            // an idempotent exists iff t^2 - q t - p splits over Q
            let disc = qc.clone() * qc + q(4) * p;
            Ok((2, is_rational_square(&disc)))
        }
        k => Err(Error::Internal(format!("center of dimension {k}"))),
    }
}

fn all_tuples(pool: &[i64], n: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                pool.iter().map(move |&x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every ordered form over {+-1,+-2,+-3,+-5} of signature (2-, (n-2)+), n <= 5.
fn center_oracle(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut col = Collector::new();
    let pool = [-5, -3, -2, -1, 1, 2, 3, 5];
    let top = cfg.oracle_bound.min(5);
    for n in 2..=top {
        for d in all_tuples(&pool, n) {
            if d.iter().filter(|x| **x < 0).count() != 2 {
                continue;
            }
            col.cases += 1;
            let form = DiagonalForm::from_integers(&d).expect("nonzero");
            let predicted = match even_clifford_structure(&form) {
                Ok(s) => match s.center {
                    Center::Rationals => (1, false),
                    Center::Quadratic(_) => (2, false),
                    Center::Split => (2, true),
                },
                Err(e) => {
                    col.error("brauer", "center_prediction", e, fmt_form(&d));
                    continue;
                }
            };
            match oracle_center(&form, cfg.oracle_bound) {
                Ok(found) => col.record("clifford", Check::holds("center_matches", found == predicted), || {
                    format!("{}: brauer {:?}, oracle {:?}", fmt_form(&d), predicted, found)
                }),
                Err(e) => col.error("clifford", "center_matches", e, fmt_form(&d)),
            }
        }
    }
    let note = if top < 5 {
        format!("(oracle bound {} restricts to n <= {top})", cfg.oracle_bound)
    } else {
        String::new()
    };
    col.finish(3, "center oracle equivalence", start, Some(60.0), note)
}

/// Random squarefree integer with 0 < |n| <= bound.
pub fn random_squarefree<R: Rng>(rng: &mut R, bound: i64) -> i64 {
    loop {
        let n = rng.gen_range(-bound..=bound);
        if n == 0 {
            continue;
        }
        let m = n.unsigned_abs();
        if (2u64..).take_while(|p| p * p <= m).all(|p| m % (p * p) != 0) {
            return n;
        }
    }
}

pub const PRODUCT_FORMULA_PAIRS: usize = 500;

fn product_formula(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 4);
    let mut col = Collector::new();
    for _ in 0..PRODUCT_FORMULA_PAIRS {
        col.cases += 1;
        let (a, b) = (random_squarefree(&mut rng, 10_000), random_squarefree(&mut rng, 10_000));
        let (ca, cb) = (SquareClass::from_i64(a).unwrap(), SquareClass::from_i64(b).unwrap());
        let product: i32 = candidate_places(&ca, &cb)
            .into_iter()
            .map(|v| i32::from(hilbert_symbol_classes(&ca, &cb, v)))
            .product();
        col.record("brauer", Check::holds("product_formula", product == 1), || format!("({a},{b})"));
        match QuaternionSymbol::new(ca, cb).ramification() {
            Ok(c) => col.record("brauer", Check::holds("even_ramification", c.ramified().len() % 2 == 0), || {
                format!("({a},{b}) ramified at {c}")
            }),
            Err(e) => col.error("brauer", "even_ramification", e, format!("({a},{b})")),
        }
    }
    col.finish(4, "Hilbert product formula", start, Some(5.0), String::new())
}

pub const PLANES_PER_N: usize = 20;
pub const RIEMANN_SAMPLES: usize = 10;

fn hodge_sweep(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 5);
    let mut col = Collector::new();
    for n in 3..=8usize {
        for _ in 0..PLANES_PER_N {
            col.cases += 1;
            let d = random_hodge_form(&mut rng, n, &[1, 2, 3]);
            let ctx = || fmt_form(&d);
            let form = DiagonalForm::from_integers(&d).unwrap();
            let hs = match HodgeStructure2::random(&form, &mut rng, 0.3) {
                Ok(h) => h,
                Err(e) => {
                    col.error("hodge", "plane", e, ctx());
                    continue;
                }
            };
            let weil = match hs.weil_element() {
                Ok(w) => w,
                Err(e) => {
                    col.error("hodge", "weil_square", e, ctx());
                    continue;
                }
            };
            col.record("hodge", Check::within("weil_square", weil.square_deviation(), cfg.tolerance), ctx);
            let pol = match polarization_e(&hs, &weil) {
                Ok(p) => p,
                Err(e) => {
                    col.error("hodge", "sign_selection", e, ctx());
                    continue;
                }
            };
            col.record("hodge", Check::holds("sign_selection", true), ctx);
            match verify_polarization(&weil, &pol, &mut rng, RIEMANN_SAMPLES, cfg.tolerance, cfg.riemann_tolerance()) {
                Ok(checks) => checks.into_iter().for_each(|c| col.record("hodge", c, ctx)),
                Err(e) => col.error("hodge", "riemann_relation", e, ctx()),
            }
            // unit z = e^{i phi} for the rotation statement, plus general z
            let mut zs: Vec<Complex64> = (0..3)
                .map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
                .collect();
            zs.push(random_z(&mut rng));
            match verify_cspin(&hs, &weil, &zs, cfg.tolerance) {
                Ok(checks) => checks.into_iter().for_each(|c| col.record("hodge", c, ctx)),
                Err(e) => col.error("hodge", "cspin_membership", e, ctx()),
            }
        }
    }
    col.finish(5, "Hodge verification sweep", start, Some(120.0), String::new())
}

pub const ALIGNED_FORMS_PER_N: usize = 6;

fn aligned_closed_forms(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 6);
    let mut col = Collector::new();
    for n in 3..=8usize {
        let mut forms: Vec<Vec<i64>> = (0..ALIGNED_FORMS_PER_N)
            .map(|_| random_hodge_form(&mut rng, n, &[1, 2, 3]))
            .collect();
        // d1 d2 a square, for the exact path
        let mut sq = random_hodge_form(&mut rng, n, &[1, 2, 3]);
        sq[1] = sq[0] * [1, 4, 9][rng.gen_range(0..3)];
        forms.push(sq);
        for d in forms {
            col.cases += 1;
            let ctx = || fmt_form(&d);
            let form = DiagonalForm::from_integers(&d).unwrap();
            let result = HodgeStructure2::aligned(&form)
                .and_then(|hs| Ok((hs.weil_element()?, hs)))
                .and_then(|(w, hs)| polarization_e(&hs, &w));
            match result {
                Ok(pol) => {
                    col.record("hodge", Check::holds("alpha_sign_positive", pol.sign == 1), ctx);
                    let dev = pol.weil_gram.relative_deviation(&aligned_closed_form(&form));
                    col.record("hodge", Check::within("closed_form", dev, cfg.tolerance), ctx);
                }
                Err(e) => col.error("hodge", "closed_form", e, ctx()),
            }
            if let (Some(exact), Some(formula)) = (aligned_weil_gram_exact(&form), aligned_closed_form_exact(&form)) {
                col.record("hodge", Check::holds("closed_form_exact", exact == formula), ctx);
            }
        }
    }
    col.finish(6, "aligned-plane closed form", start, None, String::new())
}

fn kuga_satake_reports(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 7);
    let mut col = Collector::new();
    let goldens: [(&[i64], &str); 3] = [
        (&[-1, -1, 1], "product of two isogenous elliptic curves"),
        (&[-1, -1, 3], "simple abelian surface"),
        (
            &[-1, -1, 1, 1, 1, 3],
            "A^4 with A a simple abelian 4-fold (dim A = 4), Q(sqrt -3) ⊆ End(A)",
        ),
    ];
    for (d, summary) in goldens {
        let form = DiagonalForm::from_integers(d).unwrap();
        for trial in 0..3 {
            col.cases += 1;
            let ctx = || format!("{} plane #{trial}", fmt_form(d));
            let hs = if trial == 0 {
                HodgeStructure2::aligned(&form)
            } else {
                HodgeStructure2::random(&form, &mut rng, 0.3)
            };
            match hs.and_then(|hs| ks_report(&hs, &cfg.report_options())) {
                Ok(r) => {
                    col.record("kugasatake", Check::holds("summary", r.factors.summary == summary), || {
                        format!("{}: got {:?}", ctx(), r.factors.summary)
                    });
                    col.record("kugasatake", Check::holds("ks_dim", r.ks_dim == 1u64 << (d.len() - 2)), ctx);
                    for c in r.checks {
                        col.record("kugasatake", c, ctx);
                    }
                }
                Err(e) => col.error("kugasatake", "report", e, ctx()),
            }
        }
    }
    col.finish(7, "Kuga-Satake reports", start, None, String::new())
}

pub const EMBEDDING_TRIPLES: usize = 10;

fn embedding_equivariance(cfg: &RunConfig) -> CriterionResult {
    let start = Instant::now();
    let mut rng = rng_for(cfg, 8);
    let mut col = Collector::new();
    for n in 3..=6usize {
        for _ in 0..EMBEDDING_TRIPLES {
            col.cases += 1;
            let d = random_hodge_form(&mut rng, n, &[1, 2, 3]);
            let ctx = || fmt_form(&d);
            let form = DiagonalForm::from_integers(&d).unwrap();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let z = random_z(&mut rng);
            let res = HodgeStructure2::random(&form, &mut rng, 0.3)
                .and_then(|hs| Ok((hs.weil_element()?, hs)))
                .and_then(|(w, hs)| verify_embedding(&hs, &w, &[v], &[z]));
            match res {
                Ok(r) => col.record("kugasatake", Check::within("embedding_residual", r, cfg.tolerance), ctx),
                Err(e) => col.error("kugasatake", "embedding_residual", e, ctx()),
            }
        }
    }
    col.finish(8, "embedding equivariance", start, None, String::new())
}
