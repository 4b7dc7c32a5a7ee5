use crate::output::{emit, fmt_f64, table, SCHEMA};
use crate::{AppendixArgs, ConnectionArg, ConnectionArgs, Failure, LambdaArgs, ReportArgs, ScanArgs, SurfaceArgs, VerifyArgs};
use num_rational::Rational64;
use serde::Serialize;
use twistorlab_core::connection::ConnectionChoice;
use twistorlab_core::curvature_analysis::Flag;
use twistorlab_core::flag::{self, FlagParams};
use twistorlab_core::manifold::builtin::builtin_by_name;
use twistorlab_core::twistor::{condition_report, scan as scan_lambda, ConditionReport, Lambdas, ReportConfig, ScanResult, TwistorChart};
use twistorlab_core::verify::{run_suite, CriterionResult, Suite};
use twistorlab_core::{BuiltinName, ExactForm, HermitianSurface};

const TOOL: &str = "twistorlab";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct SurfaceInfo {
    name: String,
    params: Vec<(String, f64)>,
}

fn load_surface(a: &SurfaceArgs) -> Result<(HermitianSurface, SurfaceInfo), Failure> {
    let params = a.params.clone().map(|p| p.0).unwrap_or_default();
    let is_builtin = BuiltinName::ALL.iter().any(|b| b.as_str() == a.surface);
    let m = if is_builtin {
        builtin_by_name(&a.surface, &params)?
    } else {
        let path = std::path::Path::new(&a.surface);
        if !path.is_file() {
            return Err(Failure::Usage(format!("unknown surface `{}` (not a built-in or a file)", a.surface)));
        }
        if !params.is_empty() {
            return Err(Failure::Usage("--params applies to built-in surfaces only".into()));
        }
        HermitianSurface::parse(&std::fs::read_to_string(path)?)?
    };
    Ok((m, SurfaceInfo { name: a.surface.clone(), params }))
}

fn connection(a: &ConnectionArgs) -> Result<ConnectionChoice, Failure> {
    match (a.connection, a.t) {
        (ConnectionArg::Gauduchon, Some(t)) if t.is_finite() => Ok(ConnectionChoice::Gauduchon(t)),
        (ConnectionArg::Gauduchon, _) => Err(Failure::Usage("--connection gauduchon needs a finite --t".into())),
        (_, Some(_)) => Err(Failure::Usage("--t applies to --connection gauduchon only".into())),
        (ConnectionArg::Lichnerowicz, None) => Ok(ConnectionChoice::LICHNEROWICZ),
        (ConnectionArg::Chern, None) => Ok(ConnectionChoice::CHERN),
        (ConnectionArg::Bismut, None) => Ok(ConnectionChoice::BISMUT),
    }
}

/// `--lambda` values as `(1, 1, λ)`, plus one triple from `--lambda1..3` (missing entries are 1).
fn lambdas(a: &LambdaArgs) -> Vec<Lambdas> {
    let mut out: Vec<Lambdas> = a.lambda.iter().map(|&l| Lambdas::single(l)).collect();
    if a.lambda1.is_some() || a.lambda2.is_some() || a.lambda3.is_some() {
        out.push(Lambdas([a.lambda1.unwrap_or(1.0), a.lambda2.unwrap_or(1.0), a.lambda3.unwrap_or(1.0)]));
    }
    if out.is_empty() {
        out.push(Lambdas::single(1.0));
    }
    out
}

#[derive(Serialize)]
struct SummaryRow {
    i: usize,
    lambdas: Lambdas,
    symplectic: Flag,
    balanced: Flag,
    integrable: Flag,
    /// Largest formula-against-oracle residual; null without a closed form.
    max_dk_residual: Option<f64>,
    max_balanced_residual: Option<f64>,
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    seed: u64,
    surface: SurfaceInfo,
    report: &'a ConditionReport,
    summary: Vec<SummaryRow>,
}

fn worst(flags: impl Iterator<Item = Flag>, tol: f64) -> Flag {
    let mut all = true;
    let mut defect = 0.0f64;
    for f in flags {
        all &= f.value;
        defect = defect.max(f.defect);
    }
    Flag { value: all, defect, tol }
}

fn max_opt(mut v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    v.try_fold(0.0f64, |acc, x| Some(acc.max(x?)))
}

fn summarize(rep: &ConditionReport) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for i in 1..=4 {
        for &l in &rep.config.lambdas {
            let recs: Vec<_> = rep.records(i, l).collect();
            rows.push(SummaryRow {
                i,
                lambdas: l,
                symplectic: worst(recs.iter().map(|r| r.symplectic), rep.config.tol),
                balanced: worst(recs.iter().map(|r| r.balanced), rep.config.tol),
                integrable: worst(recs.iter().map(|r| r.integrable), rep.config.nijenhuis_tol),
                max_dk_residual: max_opt(recs.iter().map(|r| r.dk_residual)),
                max_balanced_residual: max_opt(recs.iter().map(|r| r.balanced_residual)),
            });
        }
    }
    rows
}

fn flag_cell(f: &Flag) -> String {
    format!("{} ({:.2e})", f.value, f.defect)
}

fn lambda_cell(l: &Lambdas) -> String {
    if l.is_single() {
        format!("{}", l.lambda())
    } else {
        format!("({}, {}, {})", l.0[0], l.0[1], l.0[2])
    }
}

pub fn report(a: &ReportArgs) -> Result<(), Failure> {
    let (m, info) = load_surface(&a.surface)?;
    let choice = connection(&a.connection)?;
    if a.tol.is_nan() || a.tol <= 0.0 || a.sample.points == 0 {
        return Err(Failure::Usage("--tol must be positive and --points at least 1".into()));
    }
    let cfg = ReportConfig {
        lambdas: lambdas(&a.lambdas),
        points: a.sample.points,
        seed: a.sample.seed,
        tol: a.tol,
        ..ReportConfig::default()
    };
    let rep = condition_report(&m, choice, &cfg)?;
    let summary = summarize(&rep);
    let doc = ReportDocument { schema: SCHEMA, tool: TOOL, version: VERSION, seed: cfg.seed, surface: info, report: &rep, summary };
    emit(&a.output, &doc, || {
        let mut s = format!(
            "surface {}  connection {} (t = {})  points {}  seed {}  tol {:e}\n\n",
            doc.surface.name, rep.connection, rep.t, cfg.points, cfg.seed, cfg.tol
        );
        let rows: Vec<Vec<String>> = doc
            .summary
            .iter()
            .map(|r| {
                vec![
                    r.i.to_string(),
                    lambda_cell(&r.lambdas),
                    flag_cell(&r.symplectic),
                    flag_cell(&r.balanced),
                    flag_cell(&r.integrable),
                    r.max_dk_residual.map(|v| format!("{v:.2e}")).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        s += &table(&["i", "lambda", "symplectic", "balanced", "integrable", "dK residual"], &rows);
        s
    })
}

#[derive(Serialize)]
struct VerifyDocument {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    suite: String,
    passed: bool,
    criteria: Vec<CriterionResult>,
}

pub fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let suite = Suite::parse(&a.suite)?;
    if a.tol.is_some_and(|t| t.is_nan() || t <= 0.0) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    let results = run_suite(suite, a.tol)?;
    let failed: Vec<String> = results
        .iter()
        .filter(|r| !r.passed)
        .flat_map(|r| r.failures().map(move |c| format!("criterion {}: {}", r.id, c.name)))
        .collect();
    let doc = VerifyDocument {
        schema: SCHEMA,
        tool: TOOL,
        version: VERSION,
        suite: suite.name().into(),
        passed: failed.is_empty(),
        criteria: results,
    };
    emit(&a.output, &doc, || {
        let mut s = String::new();
        for r in &doc.criteria {
            s += &r.summary_line();
            s.push('\n');
            for c in r.failures() {
                s += &format!("    failed: {} = {} (tol {})\n", c.name, fmt_f64(c.value), fmt_f64(c.tol));
            }
        }
        s
    })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verify(failed))
    }
}

#[derive(Serialize)]
struct ScanDocument {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    seed: u64,
    surface: SurfaceInfo,
    connection: String,
    points: usize,
    tol: f64,
    scans: Vec<ScanResult>,
}

pub fn scan(a: &ScanArgs) -> Result<(), Failure> {
    let (m, info) = load_surface(&a.surface)?;
    let choice = connection(&a.connection)?;
    if !(a.lambda_min > 0.0 && a.lambda_max > a.lambda_min) {
        return Err(Failure::Usage("need 0 < --lambda-min < --lambda-max".into()));
    }
    let grid: Vec<f64> = match a.steps {
        0 => Vec::new(),
        1 => vec![a.lambda_min],
        n => (0..n).map(|k| a.lambda_min + (a.lambda_max - a.lambda_min) * k as f64 / (n - 1) as f64).collect(),
    };
    let chart = TwistorChart::default();
    let pts = chart.sample(&m, a.sample.points, a.sample.seed);
    let indices: Vec<usize> = match a.i {
        Some(i) if (1..=4).contains(&i) => vec![i],
        Some(i) => return Err(Failure::Usage(format!("--i {i} (expected 1..4)"))),
        None => (1..=4).collect(),
    };
    let scans = indices
        .into_iter()
        .map(|i| scan_lambda(&m, choice, i, &grid, &pts, &chart, a.tol))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = ScanDocument {
        schema: SCHEMA,
        tool: TOOL,
        version: VERSION,
        seed: a.sample.seed,
        surface: info,
        connection: choice.label(),
        points: a.sample.points,
        tol: a.tol,
        scans,
    };
    emit(&a.output, &doc, || {
        let mut s = String::new();
        for r in &doc.scans {
            s += &format!("i = {}  zeros: {:?}  identically zero: {}\n", r.i, r.zeros, r.identically_zero);
            let rows: Vec<Vec<String>> = r
                .rows
                .iter()
                .map(|x| vec![format!("{:.6}", x.lambda), format!("{:.6e}", x.symplectic_defect), format!("{:.6e}", x.balanced_defect)])
                .collect();
            s += &table(&["lambda", "|dK|", "|K^dK|"], &rows);
            s.push('\n');
        }
        s
    })
}

fn rational(q: Rational64) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Terms as `coefficient basis^basis...` with the flag-manifold names.
fn render_form(f: &ExactForm) -> String {
    if f.is_zero() {
        return "0".into();
    }
    f.components()
        .iter()
        .map(|(idx, c)| {
            let names: Vec<&str> = idx.iter().map(|&k| flag::basis_name(k)).collect();
            format!("({} + {}i) {}", rational(c.re), rational(c.im), names.join("^"))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[derive(Serialize)]
struct StructureRow {
    i: usize,
    dk_coefficient: String,
    dk: String,
    symplectic: bool,
    one_two_symplectic: bool,
    balanced: bool,
    /// Null where no closed form exists.
    ddbar_matches_display: Option<bool>,
}

#[derive(Serialize)]
struct NearlyKahler {
    dk_minus_three_re_rho: f64,
    d_im_rho_plus_two_k_squared: f64,
}

#[derive(Serialize)]
struct Normalization {
    twistor_critical_lambda_sq: f64,
    flag_critical_lambda_sq: String,
}

#[derive(Serialize)]
struct AppendixDocument {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    lambda_sq: [String; 3],
    structures: Vec<StructureRow>,
    nearly_kahler: NearlyKahler,
    integrable_structures: Vec<usize>,
    normalization: Normalization,
}

pub fn appendix(a: &AppendixArgs) -> Result<(), Failure> {
    let ls = lambdas(&a.lambdas);
    if ls.len() != 1 {
        return Err(Failure::Usage("appendix takes one parameter set".into()));
    }
    let p = FlagParams::from_lambdas(ls[0].0)?;
    let mut structures = Vec::new();
    for i in 1..=4 {
        let dk = flag::flag_dk(i, p)?;
        let ddbar = match flag::flag_ddbar(i, p) {
            Ok(d) => Some(d == flag::flag_ddbar_structural(i, p)?),
            Err(twistorlab_core::Error::NotApplicable(_)) => None,
            Err(e) => return Err(e.into()),
        };
        structures.push(StructureRow {
            i,
            dk_coefficient: rational(flag::dk_coefficient(i, p)?),
            dk: render_form(&dk),
            symplectic: dk.is_zero(),
            one_two_symplectic: flag::flag_bidegree(&dk, i, 1, 2)?.is_zero(),
            balanced: flag::flag_balanced(i, p)?.is_zero(),
            ddbar_matches_display: ddbar,
        });
    }
    let (r1, r2) = flag::nearly_kahler_check();
    let (tw, fl) = flag::normalization_crosscheck()?;
    let doc = AppendixDocument {
        schema: SCHEMA,
        tool: TOOL,
        version: VERSION,
        lambda_sq: p.sq.map(rational),
        structures,
        nearly_kahler: NearlyKahler { dk_minus_three_re_rho: r1, d_im_rho_plus_two_k_squared: r2 },
        integrable_structures: flag::integrable_structures(),
        normalization: Normalization { twistor_critical_lambda_sq: tw, flag_critical_lambda_sq: rational(fl) },
    };
    emit(&a.output, &doc, || {
        let mut s = format!("lambda^2 = ({}, {}, {})\n\n", doc.lambda_sq[0], doc.lambda_sq[1], doc.lambda_sq[2]);
        let rows: Vec<Vec<String>> = doc
            .structures
            .iter()
            .map(|r| {
                vec![
                    r.i.to_string(),
                    r.dk_coefficient.clone(),
                    r.symplectic.to_string(),
                    r.one_two_symplectic.to_string(),
                    r.balanced.to_string(),
                    r.ddbar_matches_display.map(|b| b.to_string()).unwrap_or_else(|| "-".into()),
                ]
            })
            .collect();
        s += &table(&["i", "dK coefficient", "dK = 0", "(1,2) = 0", "K^dK = 0", "ddbar display"], &rows);
        s += &format!(
            "\nnearly Kahler residuals: {} {}\nintegrable structures: {:?}\ncritical lambda^2: twistor {} flag {}\n",
            fmt_f64(r1),
            fmt_f64(r2),
            doc.integrable_structures,
            fmt_f64(tw),
            doc.normalization.flag_critical_lambda_sq
        );
        s
    })
}
