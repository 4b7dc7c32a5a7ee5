//! The twistor space `Z = P(T^{1,0}M)` on an explicit six-dimensional chart.
//!
//! Chart coordinates are `y = (x¹..x⁴, Re ζ, Im ζ)`, where the line through a
//! base point is `[u₁ + ζu₂]` against the canonical unitary frame. The section
//! `y ↦ (û₁, û₂) = (u₁, u₂)A(ζ)` with
//! `A = [[1, −ζ̄], [ζ, 1]]/√(1+|ζ|²)` is the Gram–Schmidt frame of
//! `(u₁ + ζu₂, u₂)`. Forms on `Z` are stored over the twistor coframe
//! `(φ¹, φ², φ³, φ̄¹, φ̄², φ̄³)` at the evaluation point.

mod compare;
mod formulas;
mod oracle;
mod report;

pub use compare::{conformal_compare, eigenspace_angle, projective_bundle_form, ConformalComparison, ProjectiveForm};
pub use formulas::{
    acs_endomorphism, balanced_defect_formula, ddbar_formula, dk_formula, dk_structural, kahler_form,
    unitary_basis, DdbarHypotheses, Lambdas,
};
pub use oracle::{
    acs_coordinates, balanced_oracle, ddbar_oracle, dk_oracle, min_hermitian_eigenvalue, nijenhuis_oracle,
    positivity_matrix,
};
pub use report::{
    condition_report, critical_lambda_sq, scan, ConditionRecord, ConditionReport, PointRecord, ReportConfig,
    ScanResult, ScanRow,
};

use crate::connection::{
    complex_torsion, connection_forms, curvature_complex, gauduchon, levi_civita, mu_of, real_form, rotate_torsion,
    ConnectionChoice, CurvatureTensor,
};
use crate::curvature_analysis::{analyze, BaseAnalysis};
use crate::error::{Error, Result};
use crate::exterior::{ComplexForm, ConjugationMap};
use crate::manifold::{HermitianSurface, Point};
use crate::Form;
use nalgebra::{Matrix2, Matrix6, Vector4};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

type C64 = Complex<f64>;

/// Slots of the twistor coframe.
pub const P1: usize = 0;
pub const P2: usize = 1;
pub const P3: usize = 2;
pub const B1: usize = 3;
pub const B2: usize = 4;
pub const B3: usize = 5;

/// Smallest admissible `λ`; below it `h_λ` is numerically degenerate.
pub const LAMBDA_MIN: f64 = 1e-3;

/// Default Nijenhuis threshold (ten times the worst FD noise seen on analytic built-ins).
pub const NIJENHUIS_TOL: f64 = 1e-4;

/// Conjugation pairing of the twistor coframe.
pub fn conjugation() -> ConjugationMap<f64> {
    ConjugationMap::from_pairing(6, &PAIRING).expect("valid pairing")
}

pub(crate) const PAIRING: [(usize, usize); 3] = [(P1, B1), (P2, B2), (P3, B3)];

/// A complex tangent line at a base point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwistorPoint {
    pub x: Point,
    /// Components against the canonical frame `(u₁, u₂)`, unit length, first
    /// nonvanishing component positive real.
    pub line: [C64; 2],
}

impl TwistorPoint {
    pub fn new(x: Point, v: [C64; 2]) -> Result<Self> {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("twistor line vector must be nonzero".into()));
        }
        let lead = if v[0].norm() > 1e-300 { v[0] } else { v[1] };
        let phase = lead.conj() / lead.norm();
        Ok(TwistorPoint { x, line: [v[0] * phase / n, v[1] * phase / n] })
    }

    pub fn from_zeta(x: Point, zeta: C64) -> Self {
        Self::new(x, [C64::new(1.0, 0.0), zeta]).expect("nonzero")
    }

    /// Affine fiber coordinate; `None` for the line `[u₂]`.
    pub fn zeta(&self) -> Option<C64> {
        (self.line[0].norm() > 1e-300).then(|| self.line[1] / self.line[0])
    }

    /// Line through a `(1,0)` vector given in chart components.
    pub fn from_vector(m: &HermitianSurface, x: Point, v: &Vector4<C64>) -> Result<Self> {
        let frame = m.frame(&x)?;
        Self::new(x, [frame.eta(0).dot(v), frame.eta(1).dot(v)])
    }

    /// Chart components of the unit representative `l₁u₁ + l₂u₂`.
    pub fn vector(&self, m: &HermitianSurface) -> Result<Vector4<C64>> {
        let frame = m.frame(&self.x)?;
        Ok(frame.u(0) * self.line[0] + frame.u(1) * self.line[1])
    }
}

/// The affine chart `|ζ| < ζ_max` over the base chart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwistorChart {
    pub zeta_max: f64,
}

impl Default for TwistorChart {
    fn default() -> Self {
        TwistorChart { zeta_max: 4.0 }
    }
}

impl TwistorChart {
    pub fn coordinates(&self, z: &TwistorPoint) -> Result<[f64; 6]> {
        let zeta = z.zeta().ok_or(Error::FiberOutOfChart(f64::INFINITY))?;
        if zeta.norm() >= self.zeta_max {
            return Err(Error::FiberOutOfChart(zeta.norm()));
        }
        let x = z.x;
        Ok([x[0], x[1], x[2], x[3], zeta.re, zeta.im])
    }

    pub fn point(&self, y: &[f64]) -> TwistorPoint {
        TwistorPoint::from_zeta([y[0], y[1], y[2], y[3]], C64::new(y[4], y[5]))
    }

    /// Base and fiber margins for `levels` nested stencils of `step`.
    pub fn ensure_interior(&self, m: &HermitianSurface, y: &[f64], levels: usize, step_reach: f64) -> Result<()> {
        m.ensure_interior(&y[..4], levels)?;
        let r = (y[4] * y[4] + y[5] * y[5]).sqrt();
        if r + levels as f64 * step_reach >= self.zeta_max {
            return Err(Error::FiberOutOfChart(r));
        }
        Ok(())
    }

    /// Seeded sample: Latin-hypercube base points and fiber coordinates in `|ζ| < 0.8`.
    pub fn sample(&self, m: &HermitianSurface, n: usize, seed: u64) -> Vec<TwistorPoint> {
        let base = m.sample_points(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a37_1f0c);
        base.into_iter()
            .map(|x| {
                let r = 0.8 * rng.gen::<f64>().sqrt();
                let a = std::f64::consts::TAU * rng.gen::<f64>();
                TwistorPoint::from_zeta(x, C64::from_polar(r, a))
            })
            .collect()
    }
}

/// `A(ζ) = [[1, −ζ̄], [ζ, 1]]/√(1+|ζ|²)`, an element of `SU(2)`.
pub fn rotation(zeta: C64) -> Matrix2<C64> {
    let s = 1.0 / (1.0 + zeta.norm_sqr()).sqrt();
    Matrix2::new(C64::new(1.0, 0.0), -zeta.conj(), zeta, C64::new(1.0, 0.0)) * C64::new(s, 0.0)
}

/// Rows `φ̂¹, φ̂², φ̂³` in chart components at `y`, without boundary checks.
///
/// `φ̂ = A⁻¹η` and `φ̂³ = (A⁻¹ψA)₁₂ + (A⁻¹dA)₁₂` with `(A⁻¹dA)₁₂ = −dζ̄/(1+|ζ|²)`.
pub(crate) fn section_rows(m: &HermitianSurface, t: f64, y: &[f64]) -> [[C64; 6]; 3] {
    let x = &y[..4];
    let zeta = C64::new(y[4], y[5]);
    let e = m.frame_matrix(x);
    let theta = e.try_inverse().expect("frame is invertible");
    let eta = |a: usize, k: usize| C64::new(theta[(2 * a, k)], theta[(2 * a + 1, k)]) * FRAC_1_SQRT_2;
    let omega = connection_forms(m, x, ConnectionChoice::Gauduchon(t));
    let a = rotation(zeta);
    let ad = a.adjoint();
    let s2 = 1.0 / (1.0 + zeta.norm_sqr());
    let mut rows = [[C64::new(0.0, 0.0); 6]; 3];
    for k in 0..4 {
        for r in 0..2 {
            rows[r][k] = ad[(r, 0)] * eta(0, k) + ad[(r, 1)] * eta(1, k);
        }
        let psi = crate::connection::complex_matrix(&omega[k]);
        rows[2][k] = (ad * psi * a)[(0, 1)];
    }
    rows[2][4] = C64::new(-s2, 0.0);
    rows[2][5] = C64::new(0.0, s2);
    rows
}

/// Rows `(φ̂, conj φ̂)` as a `6×6` matrix `C` with `φ̂ = C dy`.
pub(crate) fn basis_matrix(rows: &[[C64; 6]; 3]) -> Matrix6<C64> {
    Matrix6::from_fn(|i, k| if i < 3 { rows[i][k] } else { rows[i - 3][k].conj() })
}

pub(crate) fn matrix_rows(m: &Matrix6<C64>) -> Vec<Vec<C64>> {
    (0..6).map(|i| (0..6).map(|j| m[(i, j)]).collect()).collect()
}

/// Embeds a form over `(φ¹, φ², φ̄¹, φ̄²)` into the twistor coframe.
pub(crate) fn lift(f: &Form) -> Form {
    f.embed(6, &[P1, P2, B1, B2])
}

/// Twistor coframe and structure data at a point of `Z`.
#[derive(Clone, Debug)]
pub struct TwistorCoframe {
    pub choice: ConnectionChoice,
    pub t: f64,
    pub point: TwistorPoint,
    pub y: [f64; 6],
    pub rotation: Matrix2<C64>,
    /// `φ̂ = C dy` (rows `φ̂¹, φ̂², φ̂³` and conjugates).
    pub basis: Matrix6<C64>,
    pub inverse: Matrix6<C64>,
    /// Torsion `T̂¹, T̂²` of the chosen connection.
    pub torsion: [Form; 2],
    /// Curvature `Ψ̂^a_b` of the chosen connection.
    pub curvature: [[Form; 2]; 2],
    /// Levi-Civita curvature in the rotated frame.
    pub lc_tensor: CurvatureTensor,
    /// Chosen-connection curvature in the rotated frame.
    pub conn_tensor: CurvatureTensor,
    /// Levi-Civita `m`-part `μ̂`.
    pub mu: Form,
    pub base: BaseAnalysis,
}

/// Builds the coframe at `z` for a member of the canonical family.
pub fn twistor_coframe(
    m: &HermitianSurface,
    choice: ConnectionChoice,
    z: &TwistorPoint,
    chart: &TwistorChart,
) -> Result<TwistorCoframe> {
    let t = choice
        .t()
        .ok_or_else(|| Error::InvalidParameter("the twistor construction needs a Hermitian connection".into()))?;
    let y = chart.coordinates(z)?;
    chart.ensure_interior(m, &y, 3, m.backend.reach())?;
    let x = &y[..4];
    let lc = levi_civita(m, x)?;
    let data = gauduchon(m, x, t)?;
    let zeta = C64::new(y[4], y[5]);
    let a = rotation(zeta);
    let r = real_form(&a);
    let rows = section_rows(m, t, &y);
    let basis = basis_matrix(&rows);
    if basis.determinant().norm() < 1e-12 {
        return Err(Error::Invariant { check: "twistor coframe degenerate".into(), point: y.to_vec() });
    }
    let inverse = basis.try_inverse().ok_or_else(|| Error::Invariant {
        check: "twistor coframe degenerate".into(),
        point: y.to_vec(),
    })?;
    let conn_tensor = data.tensor().rotated(&r);
    let lc_tensor = lc.tensor().rotated(&r);
    let torsion = complex_torsion(&rotate_torsion(&data.torsion, &r)).map(|f| lift(&f));
    let curvature = std::array::from_fn(|p| std::array::from_fn(|q| lift(&curvature_complex(&conn_tensor.r, p, q))));
    let mu_dx: Vec<C64> = (0..4).map(|k| mu_of(&(r.transpose() * lc.omega[k] * r))).collect();
    let mu_dy = ComplexForm::from_components(6, 1, |k| if k[0] < 4 { mu_dx[k[0]] } else { C64::new(0.0, 0.0) });
    let mu = mu_dy.change_basis(&matrix_rows(&inverse));
    let base = analyze(m, &lc, 1e-6)?;
    Ok(TwistorCoframe {
        choice,
        t,
        point: *z,
        y,
        rotation: a,
        basis,
        inverse,
        torsion,
        curvature,
        lc_tensor,
        conn_tensor,
        mu,
        base,
    })
}

impl TwistorCoframe {
    pub fn phi(&self, slot: usize) -> Form {
        Form::basis(6, slot)
    }

    pub fn conj(&self, f: &Form) -> Form {
        f.conjugate(&conjugation())
    }

    /// Chart components of a form over the twistor coframe.
    pub fn to_coordinates(&self, f: &Form) -> Form {
        f.change_basis(&matrix_rows(&self.basis))
    }

    /// A chart-component form rewritten over the twistor coframe.
    pub fn from_coordinates(&self, f: &Form) -> Form {
        f.change_basis(&matrix_rows(&self.inverse))
    }

    /// `τ³`, the complex `(1,2)` entry of the Levi-Civita curvature.
    pub fn tau(&self) -> Form {
        lift(&curvature_complex(&self.lc_tensor.r, 0, 1))
    }

    /// `τ³` assembled from complexified components,
    /// `R_{1̄212}φ¹φ² + R_{1̄21̄2̄}φ̄¹φ̄² + R_{1̄211̄}φ¹φ̄¹ + R_{1̄222̄}φ²φ̄² + R_{1̄212̄}φ¹φ̄² + R_{1̄21̄2}φ̄¹φ²`.
    pub fn tau_from_components(&self) -> Form {
        let c = |p: &str| self.lc_tensor.complexify(p).expect("fixed pattern");
        let w = |a: usize, b: usize| Form::basis(6, a).w(&Form::basis(6, b));
        let terms = [
            (c("~1212"), w(P1, P2)),
            (c("~12~1~2"), w(B1, B2)),
            (c("~121~1"), w(P1, B1)),
            (c("~122~2"), w(P2, B2)),
            (c("~121~2"), w(P1, B2)),
            (c("~12~12"), w(B1, P2)),
        ];
        terms.into_iter().fold(Form::zero(6, 2), |acc, (k, f)| acc + f * k)
    }

    /// Real Levi-Civita curvature form `Ω^i_j` in the rotated frame.
    pub fn lc_real(&self, i: usize, j: usize) -> Form {
        let r = &self.lc_tensor.r;
        let f = ComplexForm::from_components(4, 2, |kl| C64::new(r[i][j][kl[0]][kl[1]], 0.0));
        lift(&f.change_basis(&crate::connection::theta_in_complex_basis()))
    }

    /// Evaluation point of the base.
    pub fn x(&self) -> Point {
        self.point.x
    }
}

#[cfg(test)]
mod tests;
