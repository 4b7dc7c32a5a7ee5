//! Acceptance battery: each criterion is a list of named checks with defects and tolerances.

use crate::connection::{coefficients, curvature_direct, gauduchon, levi_civita, structure_equation_defect};
use crate::connection::{bismut_curvature_relation, chern_curvature_relation, torsion_auxiliary, ConnectionChoice};
use crate::curvature_analysis::analyze;
use crate::error::{Error, Result};
use crate::exterior::ComplexForm;
use crate::flag::{self, FlagParams};
use crate::manifold::{builtin, BuiltinName, HermitianSurface, ScalarField, Tensor4};
use crate::twistor::{
    acs_coordinates, condition_report, conformal_compare, critical_lambda_sq, nijenhuis_oracle, Lambdas, ReportConfig,
    TwistorChart,
};
use crate::Form;
use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;

type C64 = Complex<f64>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value < tol`.
    pub fn below(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tol, passed: value < tol }
    }

    /// Passes when `value > tol`.
    pub fn above(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Check { name: name.into(), value, tol, passed: value > tol }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 0.0 } else { 1.0 }, tol: 0.5, passed: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub passed: bool,
}

impl CriterionResult {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One line: `criterion N [PASS|FAIL] title (k/n checks, t s)`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        format!(
            "criterion {} [{}] {} ({}/{} checks, {:.2}s of {:.0}s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            ok,
            self.checks.len(),
            self.seconds,
            self.budget_seconds
        )
    }
}

/// Named groups of criteria.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Appendix,
    Cp2,
    Oracle,
    Integrability,
    Relations,
    Conformal,
    Gauduchon,
    Algebra,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 9] =
        ["appendix", "cp2", "oracle", "integrability", "relations", "conformal", "gauduchon", "algebra", "all"];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "appendix" => Suite::Appendix,
            "cp2" => Suite::Cp2,
            "oracle" => Suite::Oracle,
            "integrability" => Suite::Integrability,
            "relations" => Suite::Relations,
            "conformal" => Suite::Conformal,
            "gauduchon" => Suite::Gauduchon,
            "algebra" => Suite::Algebra,
            "all" => Suite::All,
            other => return Err(Error::InvalidParameter(format!("unknown suite '{other}'"))),
        })
    }

    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::All => (1..=8).collect(),
            s => vec![Suite::NAMES.iter().position(|n| *n == s.name()).expect("listed") as u8 + 1],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Appendix => "appendix",
            Suite::Cp2 => "cp2",
            Suite::Oracle => "oracle",
            Suite::Integrability => "integrability",
            Suite::Relations => "relations",
            Suite::Conformal => "conformal",
            Suite::Gauduchon => "gauduchon",
            Suite::Algebra => "algebra",
            Suite::All => "all",
        }
    }
}

/// Runs criterion `id`; `tol` overrides the residual threshold of the oracle suite.
pub fn run_criterion(id: u8, tol: Option<f64>) -> Result<CriterionResult> {
    let start = Instant::now();
    let (title, budget, checks) = match id {
        1 => ("appendix exactness", 1.0, appendix()?),
        2 => ("projective-plane pipeline", 30.0, cp2()?),
        3 => ("formula against oracle", 300.0, oracle(tol.unwrap_or(1e-4))?),
        4 => ("integrability", 120.0, integrability()?),
        5 => ("curvature relations", 120.0, relations()?),
        6 => ("conformal behaviour", 60.0, conformal()?),
        7 => ("Gauduchon family", 60.0, gauduchon_family()?),
        8 => ("property suites", 120.0, properties()?),
        _ => return Err(Error::InvalidParameter(format!("criterion {id} (expected 1..8)"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let mut checks = checks;
    checks.push(Check::below("runtime seconds", seconds, budget));
    let passed = checks.iter().all(|c| c.passed);
    Ok(CriterionResult { id, title: title.into(), checks, seconds, budget_seconds: budget, passed })
}

pub fn run_suite(suite: Suite, tol: Option<f64>) -> Result<Vec<CriterionResult>> {
    suite.criteria().into_iter().map(|id| run_criterion(id, tol)).collect()
}

fn q(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn fp(a: i64, b: i64, c: i64) -> Result<FlagParams> {
    FlagParams::from_squares([q(a), q(b), q(c)])
}

fn appendix() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let grid = [fp(1, 1, 1)?, fp(1, 1, 2)?, fp(1, 2, 3)?, fp(3, 1, 5)?, fp(2, 5, 3)?, fp(5, 2, 3)?, fp(3, 4, 7)?];
    let mut display = true;
    for i in 1..=4 {
        for &p in &grid {
            display &= flag::flag_dk(i, p)? == flag::flag_dk_display(i, p)?;
        }
    }
    out.push(Check::holds("dK_i equals the closed forms", display));
    // dK₁(1,1,λ) = 0 exactly at λ² = 2 on a rational grid
    let mut iff = true;
    for k in 1..=40 {
        let u = Rational64::new(k, 10);
        iff &= flag::flag_dk(1, FlagParams::single_sq(u)?)?.is_zero() == (u == q(2));
    }
    out.push(Check::holds("dK_1(lambda) = 0 iff lambda^2 = 2", iff));
    let mut three = true;
    for a in 1..=4 {
        for b in 1..=4 {
            for c in 1..=8 {
                let p = fp(a, b, c)?;
                three &= flag::flag_dk(1, p)?.is_zero() == (a + b == c);
                three &= flag::flag_dk(3, p)?.is_zero() == (a == b + c);
                three &= flag::flag_dk(4, p)?.is_zero() == (a + c == b);
                three &= !flag::flag_dk(2, p)?.is_zero();
            }
        }
    }
    out.push(Check::holds("three-parameter zero loci", three));
    let mut half = true;
    for &p in &grid {
        let dk = flag::flag_dk(2, p)?;
        half &= !dk.is_zero() && flag::flag_bidegree(&dk, 2, 1, 2)?.is_zero();
    }
    out.push(Check::holds("K_2 is (1,2)-symplectic and not symplectic", half));
    let mut balanced = true;
    for i in 1..=4 {
        for &p in &grid {
            balanced &= flag::flag_balanced(i, p)?.is_zero();
        }
    }
    out.push(Check::holds("K_i wedge dK_i = 0", balanced));
    let (r1, r2) = flag::nearly_kahler_check();
    out.push(Check::below("|dK_2 - 3 Re rho|", r1, 1e-12));
    out.push(Check::below("|d Im rho + 2 K_2^2|", r2, 1e-12));
    Ok(out)
}

fn sample_chart() -> TwistorChart {
    TwistorChart::default()
}

fn cp2() -> Result<Vec<Check>> {
    let m = builtin(BuiltinName::Cp2Fs, &[("c".into(), 2.0)])?;
    let (mut wm, mut r0, mut ds) = (0.0f64, 0.0f64, 0.0f64);
    for x in m.sample_points(10, 1) {
        let lc = levi_civita(&m, &x)?;
        let a = analyze(&m, &lc, 1e-6)?;
        wm = wm.max(a.decomposition.w_minus.norm());
        r0 = r0.max(a.flags.traceless_ricci_norm.max(a.decomposition.ric0.norm()));
        ds = ds.max((a.decomposition.s - 12.0).abs());
    }
    let mut out = vec![Check::below("|W-|", wm, 1e-6), Check::below("|Ric_0|", r0, 1e-6), Check::below("|s - 12|", ds, 1e-5)];
    for choice in [ConnectionChoice::LICHNEROWICZ, ConnectionChoice::CHERN] {
        let crit = critical_lambda_sq(&m, choice, 1, 10, 1, 1e-6)?;
        let gap = crit.map(|u| (u - 2.0).abs()).unwrap_or(f64::INFINITY);
        out.push(Check::below(format!("{} critical lambda^2 - 2", choice.label()), gap, 1e-5));
        let cfg = ReportConfig {
            lambdas: vec![Lambdas::single(0.5), Lambdas::single(1.0), Lambdas::single(2f64.sqrt())],
            points: 10,
            ..ReportConfig::default()
        };
        let rep = condition_report(&m, choice, &cfg)?;
        for i in 1..=4 {
            let worst = rep.points.iter().flat_map(|p| &p.records).filter(|r| r.i == i).map(|r| r.balanced.defect).fold(0.0, f64::max);
            out.push(Check::below(format!("{} balanced defect i={i}", choice.label()), worst, 1e-6));
        }
    }
    Ok(out)
}

fn oracle(tol: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let cfg = ReportConfig {
        lambdas: vec![Lambdas::single(0.5), Lambdas::single(1.0), Lambdas::single(2f64.sqrt())],
        points: 5,
        ..ReportConfig::default()
    };
    for name in BuiltinName::ALL {
        let m = builtin(name, &[])?;
        for choice in [ConnectionChoice::LICHNEROWICZ, ConnectionChoice::CHERN] {
            let rep = condition_report(&m, choice, &cfg)?;
            for i in 1..=4 {
                let mut worst = 0.0f64;
                for r in rep.points.iter().flat_map(|p| &p.records).filter(|r| r.i == i) {
                    worst = worst.max(r.dk_residual.unwrap_or(f64::INFINITY));
                }
                out.push(Check::below(format!("{} {} i={i} dK residual", name.as_str(), choice.label()), worst, tol));
            }
        }
    }
    Ok(out)
}

fn nijenhuis_max(m: &HermitianSurface, choice: ConnectionChoice, i: usize, pick_min: bool) -> Result<f64> {
    let chart = sample_chart();
    let vals = chart
        .sample(m, 5, 1)
        .iter()
        .map(|z| nijenhuis_oracle(i, m, choice, z, &chart))
        .collect::<Result<Vec<_>>>()?;
    Ok(if pick_min { vals.iter().cloned().fold(f64::INFINITY, f64::min) } else { vals.iter().cloned().fold(0.0, f64::max) })
}

fn integrability() -> Result<Vec<Check>> {
    let (l, ch) = (ConnectionChoice::LICHNEROWICZ, ConnectionChoice::CHERN);
    let mut out = Vec::new();
    for name in BuiltinName::ALL {
        let m = builtin(name, &[])?;
        if name != BuiltinName::Hopf {
            out.push(Check::below(format!("{} J1 L", name.as_str()), nijenhuis_max(&m, l, 1, false)?, 1e-4));
        }
        for choice in [l, ch] {
            out.push(Check::above(format!("{} J2 {}", name.as_str(), choice.label()), nijenhuis_max(&m, choice, 2, true)?, 0.1));
        }
        if name.is_kahler() {
            out.push(Check::below(format!("{} J3 L", name.as_str()), nijenhuis_max(&m, l, 3, false)?, 1e-4));
        }
    }
    let hopf = builtin(BuiltinName::Hopf, &[])?;
    for i in [3, 4] {
        out.push(Check::below(format!("hopf J{i} chern"), nijenhuis_max(&hopf, ch, i, false)?, 1e-4));
    }
    Ok(out)
}

fn gap(a: &Tensor4, b: &Tensor4) -> f64 {
    let mut m: f64 = 0.0;
    for n in 0..256 {
        let (i, j, k, l) = (n / 64, n / 16 % 4, n / 4 % 4, n % 4);
        m = m.max((a[i][j][k][l] - b[i][j][k][l]).abs());
    }
    m
}

fn relations() -> Result<Vec<Check>> {
    let m = builtin(BuiltinName::Hopf, &[])?;
    let (mut c, mut b) = (0.0f64, 0.0f64);
    for x in m.sample_points(10, 1) {
        let lc = levi_civita(&m, &x)?;
        let aux = torsion_auxiliary(&m, &lc)?;
        c = c.max(gap(&chern_curvature_relation(&lc, &aux).r, &curvature_direct(&m, &x, ConnectionChoice::CHERN)?));
        b = b.max(gap(&bismut_curvature_relation(&lc, &m)?.r, &curvature_direct(&m, &x, ConnectionChoice::BISMUT)?));
    }
    Ok(vec![Check::below("Chern relation against direct", c, 1e-5), Check::below("Bismut relation against direct", b, 1e-4)])
}

fn conformal() -> Result<Vec<Check>> {
    let m = builtin(BuiltinName::Hopf, &[])?;
    let chart = sample_chart();
    let pts = chart.sample(&m, 5, 3);
    let linear: ScalarField = Arc::new(|x: &[f64]| 0.1 * x[0]);
    let constant: ScalarField = Arc::new(|_: &[f64]| 0.3);
    let (mut ch, mut j1, mut all) = (0.0f64, 0.0f64, 0.0f64);
    for z in &pts {
        let c = conformal_compare(&m, linear.clone(), "0.1*x1", z, &chart)?;
        ch = ch.max(c.chern.iter().cloned().fold(0.0, f64::max));
        j1 = j1.max(c.lichnerowicz[0]);
        let k = conformal_compare(&m, constant.clone(), "0.3", z, &chart)?;
        all = all.max(k.chern.iter().chain(&k.lichnerowicz).cloned().fold(0.0, f64::max));
    }
    Ok(vec![
        Check::below("J_i chern under f = 0.1 x1", ch, 1e-6),
        Check::below("J_1 L under f = 0.1 x1", j1, 1e-6),
        Check::below("all eight under constant f", all, 1e-8),
    ])
}

fn gauduchon_family() -> Result<Vec<Check>> {
    let m = builtin(BuiltinName::Hopf, &[])?;
    let mut interp = 0.0f64;
    for x in m.sample_points(10, 1) {
        let c0 = coefficients(&m, &x, ConnectionChoice::Gauduchon(0.0));
        let c1 = coefficients(&m, &x, ConnectionChoice::Gauduchon(1.0));
        for t in [-1.0, -0.3, 0.5, 2.0] {
            let ct = coefficients(&m, &x, ConnectionChoice::Gauduchon(t));
            for n in 0..64 {
                let (i, j, k) = (n / 16, n / 4 % 4, n % 4);
                interp = interp.max((ct[i][j][k] - ((1.0 - t) * c0[i][j][k] + t * c1[i][j][k])).abs());
            }
        }
    }
    let chart = sample_chart();
    let mut j1 = 0.0f64;
    for z in chart.sample(&m, 5, 1) {
        let y = chart.coordinates(&z)?;
        let base = acs_coordinates(&m, ConnectionChoice::Gauduchon(0.0), 1, &y)?;
        for t in [-1.0, 0.5, 1.0] {
            j1 = j1.max((acs_coordinates(&m, ConnectionChoice::Gauduchon(t), 1, &y)? - base).amax());
        }
    }
    Ok(vec![Check::below("affine interpolation in t", interp, 1e-9), Check::below("J_1 across t", j1, 1e-8)])
}

fn random_form(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> Form {
    ComplexForm::from_components(dim, degree, |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_exact(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> crate::ExactForm {
    ComplexForm::from_components(dim, degree, |_| {
        Complex::new(Rational64::new(rng.gen_range(-9..10), rng.gen_range(1..7)), Rational64::new(rng.gen_range(-9..10), rng.gen_range(1..7)))
    })
}

fn properties() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut assoc, mut graded, mut star, mut split, mut bideg, mut basis) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut exact = true;
    let pairing = [(0, 3), (1, 4), (2, 5)];
    for _ in 0..50 {
        let (a, b, c) = (random_form(&mut rng, 6, 1), random_form(&mut rng, 6, 2), random_form(&mut rng, 6, 2));
        assoc = assoc.max((a.w(&b).w(&c) - a.w(&b.w(&c))).norm());
        let (p, qd) = (rng.gen_range(0..4), rng.gen_range(0..4));
        let (x, y) = (random_form(&mut rng, 6, p), random_form(&mut rng, 6, qd));
        let sign = if (p * qd) % 2 == 0 { 1.0 } else { -1.0 };
        graded = graded.max((x.w(&y) - y.w(&x).scale_real(sign)).norm());
        let f = random_form(&mut rng, 4, 2);
        let s = f.hodge_star_4(1)?;
        star = star.max((s.hodge_star_4(1)? - f.clone()).norm()).max((s.norm() - f.norm()).abs());
        let (sd, asd) = f.sd_asd_split()?;
        split = split.max((sd.clone() + asd.clone() - f.clone()).norm()).max((sd.hodge_star_4(1)? - sd).norm());
        let t = random_form(&mut rng, 6, 3);
        let mut sum = Form::zero(6, 3);
        for pp in 0..=3 {
            sum = sum + t.bidegree_project(&pairing, pp, 3 - pp)?.form;
        }
        bideg = bideg.max((sum - t).norm());
        let mat = DMatrix::from_fn(4, 4, |r, c| C64::new(if r == c { 2.0 } else { 0.0 } + rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
        let inv = mat.clone().try_inverse().ok_or(Error::InvalidParameter("singular".into()))?;
        let rows = |m: &DMatrix<C64>| (0..4).map(|r| (0..4).map(|c| m[(r, c)]).collect::<Vec<_>>()).collect::<Vec<_>>();
        let g = random_form(&mut rng, 4, 2);
        basis = basis.max((g.change_basis(&rows(&mat)).change_basis(&rows(&inv)) - g).norm());
        let (ea, eb, ec) = (random_exact(&mut rng, 5, 1), random_exact(&mut rng, 5, 1), random_exact(&mut rng, 5, 2));
        exact &= ea.w(&eb).w(&ec) == ea.w(&eb.w(&ec));
        exact &= (ea.w(&eb) + eb.w(&ea)).is_zero();
        exact &= ea.w(&ea).is_zero();
    }
    let mut out = vec![
        Check::below("wedge associativity", assoc, 1e-12),
        Check::below("graded commutativity", graded, 1e-12),
        Check::below("Hodge star involutive isometry", star, 1e-12),
        Check::below("self-dual splitting", split, 1e-12),
        Check::below("bidegree partition", bideg, 1e-12),
        Check::below("change of basis round trip", basis, 1e-10),
        Check::holds("exact rational algebra laws", exact),
    ];
    for name in BuiltinName::ALL {
        let m = builtin(name, &[])?;
        let (mut sym, mut bianchi, mut herm, mut spd, mut jc) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
        for x in m.sample_points(5, 21) {
            m.validate_at(&x)?;
            let d = levi_civita(&m, &x)?.defects();
            sym = sym.max(d.get("first_pair")).max(d.get("second_pair")).max(d.get("pair_exchange")).max(d.get("omega_skew"));
            bianchi = bianchi.max(d.get("bianchi"));
            for t in [-1.0, 0.0, 1.0] {
                let data = gauduchon(&m, &x, t)?;
                herm = herm.max(data.skew_hermitian_defect()).max(structure_equation_defect(&m, &data));
            }
            let g = m.metric(&x);
            spd = spd.min(g.symmetric_eigenvalues().min());
            let j = m.complex_structure(&x);
            jc = jc.max((j * j + Matrix4::identity()).amax()).max((j.transpose() * g * j - g).amax());
        }
        let n = name.as_str();
        out.push(Check::below(format!("{n} curvature symmetries"), sym, 1e-6));
        out.push(Check::below(format!("{n} first Bianchi"), bianchi, 1e-6));
        out.push(Check::below(format!("{n} Hermitian connection invariants"), herm, 1e-7));
        out.push(Check::above(format!("{n} metric positive definite"), spd, 0.0));
        out.push(Check::below(format!("{n} J^2 = -1 and J-invariant metric"), jc, 1e-10));
    }
    Ok(out)
}
