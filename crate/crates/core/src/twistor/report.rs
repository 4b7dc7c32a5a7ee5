//! Per-point condition reports and `λ` scans.

use super::formulas::{balanced_defect_formula, dk_formula, kahler_form, Lambdas};
use super::oracle::{dk_oracle, nijenhuis_oracle};
use super::{twistor_coframe, TwistorChart, TwistorCoframe, TwistorPoint, NIJENHUIS_TOL};
use crate::connection::ConnectionChoice;
use crate::curvature_analysis::{ConditionFlags, Flag};
use crate::error::{Error, Result};
use crate::exterior::inner;
use crate::manifold::HermitianSurface;
use crate::Form;
use rayon::prelude::*;
use serde::Serialize;

/// Inputs of [`condition_report`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportConfig {
    pub lambdas: Vec<Lambdas>,
    pub points: usize,
    pub seed: u64,
    /// Threshold for the symplectic and balanced flags.
    pub tol: f64,
    pub nijenhuis_tol: f64,
    pub chart: TwistorChart,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            lambdas: vec![Lambdas::single(1.0)],
            points: 5,
            seed: 1,
            tol: 1e-4,
            nijenhuis_tol: NIJENHUIS_TOL,
            chart: TwistorChart::default(),
        }
    }
}

/// Conditions for one `(i, λ)` at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRecord {
    pub i: usize,
    pub lambdas: Lambdas,
    /// `‖dK_i‖`, from the closed form when one exists.
    pub symplectic: Flag,
    /// `‖K_i∧dK_i‖`.
    pub balanced: Flag,
    pub integrable: Flag,
    /// `‖dK_formula − dK_oracle‖`; `None` without a closed form.
    pub dk_residual: Option<f64>,
    /// `‖(K∧dK)_formula − K∧dK_oracle‖`.
    pub balanced_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub point: TwistorPoint,
    pub chart: [f64; 6],
    pub base: ConditionFlags,
    pub records: Vec<ConditionRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub connection: String,
    pub t: f64,
    pub config: ReportConfig,
    pub points: Vec<PointRecord>,
}

impl ConditionReport {
    /// Records for `(i, λ)` across all points.
    pub fn records(&self, i: usize, lambdas: Lambdas) -> impl Iterator<Item = &ConditionRecord> {
        self.points.iter().flat_map(move |p| p.records.iter().filter(move |r| r.i == i && r.lambdas == lambdas))
    }

    /// True when the flag holds at every sampled point.
    pub fn all(&self, i: usize, lambdas: Lambdas, pick: impl Fn(&ConditionRecord) -> &Flag) -> bool {
        let mut any = false;
        for r in self.records(i, lambdas) {
            any = true;
            if !pick(r).value {
                return false;
            }
        }
        any
    }
}

fn record(
    m: &HermitianSurface,
    choice: ConnectionChoice,
    cf: &TwistorCoframe,
    i: usize,
    lambdas: Lambdas,
    integrable: Flag,
    cfg: &ReportConfig,
) -> Result<ConditionRecord> {
    let oracle = dk_oracle(i, lambdas, m, choice, &cf.point, &cfg.chart)?;
    let k = kahler_form(i, lambdas)?;
    let oracle_balanced = k.w(&oracle);
    let (dk, dk_residual, balanced_residual) = match dk_formula(i, lambdas, cf) {
        Ok(f) => {
            let bal = balanced_defect_formula(i, lambdas, cf)?;
            let r1 = (f.clone() - oracle.clone()).norm();
            let r2 = (bal - oracle_balanced.clone()).norm();
            (f, Some(r1), Some(r2))
        }
        Err(Error::NoFormula) => (oracle.clone(), None, None),
        Err(e) => return Err(e),
    };
    Ok(ConditionRecord {
        i,
        lambdas,
        symplectic: Flag::new(dk.norm(), cfg.tol),
        balanced: Flag::new(k.w(&dk).norm(), cfg.tol),
        integrable,
        dk_residual,
        balanced_residual,
    })
}

fn point_record(
    m: &HermitianSurface,
    choice: ConnectionChoice,
    z: &TwistorPoint,
    cfg: &ReportConfig,
) -> Result<PointRecord> {
    let cf = twistor_coframe(m, choice, z, &cfg.chart)?;
    let mut records = Vec::new();
    for i in 1..=4 {
        let integrable = Flag::new(nijenhuis_oracle(i, m, choice, z, &cfg.chart)?, cfg.nijenhuis_tol);
        for &l in &cfg.lambdas {
            records.push(record(m, choice, &cf, i, l, integrable, cfg)?);
        }
    }
    records.sort_by(|a, b| a.i.cmp(&b.i).then(a.lambdas.0.partial_cmp(&b.lambdas.0).expect("finite")));
    Ok(PointRecord { point: *z, chart: cf.y, base: cf.base.flags.clone(), records })
}

/// Symplectic, balanced and integrability flags at seeded sample points.
pub fn condition_report(m: &HermitianSurface, choice: ConnectionChoice, cfg: &ReportConfig) -> Result<ConditionReport> {
    let t = choice
        .t()
        .ok_or_else(|| Error::InvalidParameter("the twistor construction needs a Hermitian connection".into()))?;
    for l in &cfg.lambdas {
        l.validate()?;
    }
    let pts = cfg.chart.sample(m, cfg.points, cfg.seed);
    let points = pts.par_iter().map(|z| point_record(m, choice, z, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(ConditionReport { connection: choice.label(), t, config: cfg.clone(), points })
}

/// One grid value of a scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub lambda: f64,
    /// Largest `‖dK_i‖` over the points.
    pub symplectic_defect: f64,
    /// Largest `‖K_i∧dK_i‖` over the points.
    pub balanced_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub i: usize,
    pub rows: Vec<ScanRow>,
    /// `λ` where the symplectic defect vanishes inside the grid.
    pub zeros: Vec<f64>,
    /// Set when `dK_i` vanishes at every grid value.
    pub identically_zero: bool,
}

/// `dK_i(λ)` at one point, through the closed form or the oracle.
fn dk_at(m: &HermitianSurface, choice: ConnectionChoice, z: &TwistorPoint, chart: &TwistorChart, i: usize, l: f64) -> Result<Form> {
    let lambdas = Lambdas::single(l);
    let cf = twistor_coframe(m, choice, z, chart)?;
    match dk_formula(i, lambdas, &cf) {
        Err(Error::NoFormula) => dk_oracle(i, lambdas, m, choice, z, chart),
        other => other,
    }
}

/// Sweeps `λ` over `grid` for `K_i`.
///
/// `K_i(λ) = K⁰ + λ²K³` is affine in `λ²`, so `dK_i(λ) = A + λ²B` exactly; the
/// zero of the summed squared defect is bracketed on the grid and bisected.
pub fn scan(
    m: &HermitianSurface,
    choice: ConnectionChoice,
    i: usize,
    grid: &[f64],
    points: &[TwistorPoint],
    chart: &TwistorChart,
    tol: f64,
) -> Result<ScanResult> {
    if grid.len() < 2 || points.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    for &l in grid {
        Lambdas::single(l).validate()?;
    }
    let parts = points
        .par_iter()
        .map(|z| {
            let d1 = dk_at(m, choice, z, chart, i, 1.0)?;
            let d2 = dk_at(m, choice, z, chart, i, 2.0)?;
            let b = (d2 - d1.clone()).scale_real(1.0 / 3.0);
            Ok((d1 - b.clone(), b))
        })
        .collect::<Result<Vec<(Form, Form)>>>()?;
    let k0 = kahler_form(i, Lambdas::single(1.0))?;
    let k3 = (kahler_form(i, Lambdas::single(2.0))? - k0.clone()).scale_real(1.0 / 3.0);
    let k0 = k0 - k3.clone();
    let at = |u: f64| -> (f64, f64) {
        let k = k0.clone() + k3.scale_real(u);
        parts.iter().fold((0.0f64, 0.0f64), |(s, b), (a, bb)| {
            let d = a.clone() + bb.scale_real(u);
            (s.max(d.norm()), b.max(k.w(&d).norm()))
        })
    };
    let rows: Vec<ScanRow> = grid
        .iter()
        .map(|&l| {
            let (s, b) = at(l * l);
            ScanRow { lambda: l, symplectic_defect: s, balanced_defect: b }
        })
        .collect();
    let identically_zero = rows.iter().all(|r| r.symplectic_defect < tol);
    let slope = |u: f64| parts.iter().map(|(a, b)| inner(&(a.clone() + b.scale_real(u)), b).re).sum::<f64>();
    let mut zeros = Vec::new();
    if !identically_zero {
        for w in grid.windows(2) {
            let (mut lo, mut hi) = (w[0] * w[0], w[1] * w[1]);
            let (glo, ghi) = (slope(lo), slope(hi));
            if glo == 0.0 && at(lo).0 < tol {
                zeros.push(lo.sqrt());
                continue;
            }
            if glo.signum() == ghi.signum() {
                continue;
            }
            while hi - lo > 1e-12 {
                let mid = 0.5 * (lo + hi);
                if slope(mid).signum() == glo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let u = 0.5 * (lo + hi);
            if at(u).0 < tol {
                zeros.push(u.sqrt());
            }
        }
    }
    Ok(ScanResult { i, rows, zeros, identically_zero })
}

/// The `λ²` at which `dK_i` vanishes, located by [`scan`] over `λ ∈ [0.25, 4]`.
pub fn critical_lambda_sq(
    m: &HermitianSurface,
    choice: ConnectionChoice,
    i: usize,
    points: usize,
    seed: u64,
    tol: f64,
) -> Result<Option<f64>> {
    let chart = TwistorChart::default();
    let pts = chart.sample(m, points, seed);
    let grid: Vec<f64> = (0..=15).map(|k| 0.25 * (k + 1) as f64).collect();
    let res = scan(m, choice, i, &grid, &pts, &chart, tol)?;
    Ok(match res.zeros.as_slice() {
        [l] => Some(l * l),
        _ => None,
    })
}
