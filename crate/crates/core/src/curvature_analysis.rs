//! Curvature operator on 2-forms and its block decomposition.

use crate::connection::LeviCivitaData;
use crate::error::Result;
use crate::exterior::SdAsdBasis;
use crate::manifold::{HermitianSurface, Tensor4};
use nalgebra::{Matrix3, Matrix4, Matrix6};
use serde::Serialize;

/// `R̂` in the basis `(α₊¹, α₊², α₊³, α₋¹, α₋², α₋³)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureOperator6(pub Matrix6<f64>);

/// Pairs `(i, j, coefficient)` with `i < j` of each basis 2-form.
fn basis_terms() -> Vec<Vec<(usize, usize, f64)>> {
    SdAsdBasis::<f64>::standard()
        .ordered()
        .iter()
        .map(|f| f.components().into_iter().map(|(ix, c)| (ix[0], ix[1], c.re)).collect())
        .collect()
}

/// `R̂_pq = Σ_{i<j, k<l} (α_p)_ij (α_q)_kl R_ijkl`.
pub fn curvature_operator(r: &Tensor4) -> CurvatureOperator6 {
    let basis = basis_terms();
    let op = Matrix6::from_fn(|p, q| {
        let mut s = 0.0;
        for &(i, j, a) in &basis[p] {
            for &(k, l, b) in &basis[q] {
                s += a * b * r[i][j][k][l];
            }
        }
        s
    });
    CurvatureOperator6(op)
}

impl CurvatureOperator6 {
    pub fn symmetry_defect(&self) -> f64 {
        (self.0 - self.0.transpose()).abs().max()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylDecomposition {
    pub w_plus: Matrix3<f64>,
    pub w_minus: Matrix3<f64>,
    /// Off-diagonal block, carrying the trace-free Ricci tensor.
    pub ric0: Matrix3<f64>,
    pub s: f64,
    /// `s* = 4⟨R̂α₊¹, α₊¹⟩`, equal to `s` on Kähler surfaces.
    pub sstar: f64,
}

pub fn decompose(op: &CurvatureOperator6) -> WeylDecomposition {
    let m = &op.0;
    let a: Matrix3<f64> = m.fixed_view::<3, 3>(0, 0).into();
    let c: Matrix3<f64> = m.fixed_view::<3, 3>(3, 3).into();
    let b: Matrix3<f64> = m.fixed_view::<3, 3>(0, 3).into();
    let s = 2.0 * m.trace();
    let shift = Matrix3::identity() * (s / 12.0);
    WeylDecomposition { w_plus: a - shift, w_minus: c - shift, ric0: b, s, sstar: 4.0 * m[(0, 0)] }
}

impl WeylDecomposition {
    pub fn reassemble(&self) -> CurvatureOperator6 {
        let shift = Matrix3::identity() * (self.s / 12.0);
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(self.w_plus + shift));
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&(self.w_minus + shift));
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.ric0);
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&self.ric0.transpose());
        CurvatureOperator6(m)
    }
}

/// `Ric_jl = Σ_i R_ijil` in the frame.
pub fn ricci(r: &Tensor4) -> Matrix4<f64> {
    Matrix4::from_fn(|j, l| (0..4).map(|i| r[i][j][i][l]).sum())
}

/// A flag with the defect it was decided from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Flag {
    pub value: bool,
    pub defect: f64,
    pub tol: f64,
}

impl Flag {
    pub fn new(defect: f64, tol: f64) -> Self {
        Flag { value: defect < tol, defect, tol }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionFlags {
    pub self_dual: Flag,
    pub anti_self_dual: Flag,
    pub einstein: Flag,
    pub kahler: Flag,
    pub ricci_j_invariant: Flag,
    pub s: f64,
    pub sstar: f64,
    /// `‖Ric − (s/4)h‖` from direct contraction, for cross-checking the block norm.
    pub traceless_ricci_norm: f64,
}

/// Flags from a decomposition, the contracted Ricci tensor and a Kähler defect `‖dF‖`.
pub fn predicates(dec: &WeylDecomposition, ric: &Matrix4<f64>, kahler_defect: f64, tol: f64) -> ConditionFlags {
    let j0 = crate::manifold::standard_j();
    let s = ric.trace();
    let traceless = (ric - Matrix4::identity() * (s / 4.0)).norm();
    ConditionFlags {
        self_dual: Flag::new(dec.w_minus.norm(), tol),
        anti_self_dual: Flag::new(dec.w_plus.norm(), tol),
        einstein: Flag::new(dec.ric0.norm(), tol),
        kahler: Flag::new(kahler_defect, tol),
        ricci_j_invariant: Flag::new((ric * j0 - j0 * ric).norm(), tol),
        s: dec.s,
        sstar: dec.sstar,
        traceless_ricci_norm: traceless,
    }
}

/// Full base analysis at a point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseAnalysis {
    pub decomposition: WeylDecomposition,
    pub flags: ConditionFlags,
}

pub fn analyze(m: &HermitianSurface, lc: &LeviCivitaData, tol: f64) -> Result<BaseAnalysis> {
    let op = curvature_operator(&lc.curvature);
    let decomposition = decompose(&op);
    let kd = m.d_fundamental_form(&lc.point, &lc.frame).norm();
    let flags = predicates(&decomposition, &ricci(&lc.curvature), kd, tol);
    Ok(BaseAnalysis { decomposition, flags })
}
