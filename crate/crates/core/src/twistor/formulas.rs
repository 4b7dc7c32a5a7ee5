//! Almost complex structures, fundamental forms and the closed-form defect expressions.

use super::{basis_matrix, section_rows, TwistorCoframe, B1, B2, B3, LAMBDA_MIN, P1, P2, P3};
use crate::error::{Error, Result};
use crate::manifold::HermitianSurface;
use crate::Form;
use nalgebra::Matrix6;
use num_complex::Complex;
use serde::Serialize;

type C64 = Complex<f64>;

/// Metric parameters `(λ₁, λ₂, λ₃)`; the one-parameter family is `(1, 1, λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lambdas(pub [f64; 3]);

impl Lambdas {
    pub fn single(lambda: f64) -> Self {
        Lambdas([1.0, 1.0, lambda])
    }

    pub fn is_single(&self) -> bool {
        self.0[0] == 1.0 && self.0[1] == 1.0
    }

    pub fn lambda(&self) -> f64 {
        self.0[2]
    }

    pub fn validate(&self) -> Result<()> {
        for l in self.0 {
            if !(l >= LAMBDA_MIN && l.is_finite()) {
                return Err(Error::InvalidParameter(format!("lambda {l} below minimum {LAMBDA_MIN}")));
            }
        }
        Ok(())
    }
}

/// Slots of the `(1,0)` basis of `J_i`:
/// `J₁ {φ¹, φ̄², φ³}`, `J₂ {φ¹, φ̄², φ̄³}`, `J₃ {φ¹, φ², φ³}`, `J₄ {φ¹, φ², φ̄³}`.
pub fn unitary_basis(i: usize) -> Result<[usize; 3]> {
    match i {
        1 => Ok([P1, B2, P3]),
        2 => Ok([P1, B2, B3]),
        3 => Ok([P1, P2, P3]),
        4 => Ok([P1, P2, B3]),
        _ => Err(Error::InvalidParameter(format!("structure index {i} (expected 1..4)"))),
    }
}

pub(crate) fn bar(slot: usize) -> usize {
    (slot + 3) % 6
}

/// `(holomorphic, antiholomorphic)` slot pairs of `J_i`.
pub(crate) fn pairing(i: usize) -> Result<Vec<(usize, usize)>> {
    Ok(unitary_basis(i)?.iter().map(|&s| (s, bar(s))).collect())
}

fn e(slot: usize) -> Form {
    Form::basis(6, slot)
}

fn wedge_all(parts: &[Form]) -> Form {
    parts[1..].iter().fold(parts[0].clone(), |acc, f| acc.w(f))
}

fn ii() -> C64 {
    C64::new(0.0, 1.0)
}

/// `K_i(λ₁,λ₂,λ₃) = i Σ λ_a² ξ_a∧ξ̄_a` over the `(1,0)` basis of `J_i`.
pub fn kahler_form(i: usize, lambdas: Lambdas) -> Result<Form> {
    lambdas.validate()?;
    let xi = unitary_basis(i)?;
    let mut k = Form::zero(6, 2);
    for a in 0..3 {
        k = k + e(xi[a]).w(&e(bar(xi[a]))).scale(ii() * lambdas.0[a] * lambdas.0[a]);
    }
    Ok(k)
}

/// `J = B⁻¹ diag(i,i,i,−i,−i,−i) B` with `B` the `(1,0)` rows and their conjugates.
pub(crate) fn acs_from_basis(i: usize, c: &Matrix6<C64>) -> Result<Matrix6<f64>> {
    let xi = unitary_basis(i)?;
    let order = [xi[0], xi[1], xi[2], bar(xi[0]), bar(xi[1]), bar(xi[2])];
    let b = Matrix6::from_fn(|r, k| c[(order[r], k)]);
    let binv = b.try_inverse().ok_or(Error::NonUnitary)?;
    let d = Matrix6::from_diagonal(&nalgebra::Vector6::from_fn(|r, _| if r < 3 { ii() } else { -ii() }));
    Ok((binv * d * b).map(|z| z.re))
}

/// Real endomorphism of `J_i` in chart coordinates at the coframe point.
pub fn acs_endomorphism(i: usize, cf: &TwistorCoframe) -> Result<Matrix6<f64>> {
    acs_from_basis(i, &cf.basis)
}

pub(crate) fn acs_at(m: &HermitianSurface, t: f64, i: usize, y: &[f64]) -> Result<Matrix6<f64>> {
    acs_from_basis(i, &basis_matrix(&section_rows(m, t, y)))
}

fn sign(i: usize) -> f64 {
    if i % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

enum Family {
    Lichnerowicz,
    Chern,
}

fn family(cf: &TwistorCoframe) -> Result<Family> {
    if cf.t == 0.0 {
        Ok(Family::Lichnerowicz)
    } else if cf.t == 1.0 {
        Ok(Family::Chern)
    } else {
        Err(Error::NoFormula)
    }
}

/// Closed-form `dK_i`.
///
/// One-parameter metrics use the displayed Lichnerowicz and Chern expressions;
/// three-parameter metrics use the structure equations directly.
pub fn dk_formula(i: usize, lambdas: Lambdas, cf: &TwistorCoframe) -> Result<Form> {
    lambdas.validate()?;
    unitary_basis(i)?;
    let fam = family(cf)?;
    if !lambdas.is_single() {
        return dk_structural(i, lambdas, cf);
    }
    let l2 = lambdas.lambda().powi(2) * sign(i);
    let core = match (&fam, i) {
        (_, 1 | 2) => {
            let mut c = wedge_all(&[e(B1), e(P2), e(P3)]).scale_real(2.0) - wedge_all(&[e(P1), e(B2), e(B3)]).scale_real(2.0);
            if let Family::Chern = fam {
                let [t1, t2] = &cf.torsion;
                let (t1b, t2b) = (cf.conj(t1), cf.conj(t2));
                c = c + t1.w(&e(B1)) - t1b.w(&e(P1)) + t2b.w(&e(P2)) - t2.w(&e(B2));
            }
            c
        }
        (Family::Lichnerowicz, _) => {
            let mub = cf.conj(&cf.mu);
            wedge_all(&[mub, e(P1), e(P2)]).scale_real(2.0) - wedge_all(&[cf.mu.clone(), e(B1), e(B2)]).scale_real(2.0)
        }
        (Family::Chern, _) => {
            let [t1, t2] = &cf.torsion;
            let (t1b, t2b) = (cf.conj(t1), cf.conj(t2));
            t1.w(&e(B1)) - t1b.w(&e(P1)) + t2.w(&e(B2)) - t2b.w(&e(P2))
        }
    };
    let x = match fam {
        Family::Lichnerowicz => cf.tau(),
        Family::Chern => cf.curvature[0][1].clone(),
    };
    let xb = cf.conj(&x);
    Ok((core + (x.w(&e(B3)) - xb.w(&e(P3))).scale_real(l2)).times_i())
}

/// `dK_i` from the structure equations of the chosen connection, for any `t`.
///
/// `dφ¹ ≅ −φ³∧φ² + T¹`, `dφ² ≅ φ̄³∧φ¹ + T²`, `dφ³ ≅ Ψ¹₂`, dropping the diagonal
/// connection terms, which cancel in every `ξ∧ξ̄`.
pub fn dk_structural(i: usize, lambdas: Lambdas, cf: &TwistorCoframe) -> Result<Form> {
    lambdas.validate()?;
    let xi = unitary_basis(i)?;
    let dphi = [
        cf.torsion[0].clone() - e(P3).w(&e(P2)),
        cf.torsion[1].clone() + e(B3).w(&e(P1)),
        cf.curvature[0][1].clone(),
    ];
    let d = |slot: usize| if slot < 3 { dphi[slot].clone() } else { cf.conj(&dphi[slot - 3]) };
    let mut out = Form::zero(6, 3);
    for a in 0..3 {
        let (s, sb) = (xi[a], bar(xi[a]));
        let term = d(s).w(&e(sb)) - e(s).w(&d(sb));
        out = out + term.scale(ii() * lambdas.0[a] * lambdas.0[a]);
    }
    Ok(out)
}

/// Closed-form balanced defect `K_i∧dK_i`.
pub fn balanced_defect_formula(i: usize, lambdas: Lambdas, cf: &TwistorCoframe) -> Result<Form> {
    lambdas.validate()?;
    unitary_basis(i)?;
    let fam = family(cf)?;
    if !lambdas.is_single() {
        return Ok(kahler_form(i, lambdas)?.w(&dk_structural(i, lambdas, cf)?));
    }
    let l2 = lambdas.lambda().powi(2);
    match fam {
        Family::Lichnerowicz => {
            let r = |p: &str| cf.lc_tensor.complexify(p).expect("fixed pattern");
            let (r22, r11) = (r("~122~2"), r("~121~1"));
            let top = |last: usize, second: [usize; 2]| wedge_all(&[e(P1), e(B1), e(second[0]), e(second[1]), e(last)]);
            Ok(match i {
                1 | 2 => {
                    let c = (r22 - r11) * sign(i);
                    (top(B3, [B2, P2]) * c + top(P3, [B2, P2]) * c.conj()).scale_real(l2)
                }
                _ => {
                    let c = r22 + r11;
                    let mu_part = (wedge_all(&[cf.conj(&cf.mu), e(P1), e(P2)])
                        - wedge_all(&[cf.mu.clone(), e(B1), e(B2)]))
                    .w(&e(P3))
                    .w(&e(B3))
                    .scale_real(2.0);
                    let body = top(B3, [P2, B2]) * c + top(P3, [P2, B2]) * c.conj() + mu_part;
                    body.scale_real(if i == 3 { -l2 } else { l2 })
                }
            })
        }
        Family::Chern => {
            let [t1, t2] = &cf.torsion;
            let (t1b, t2b) = (cf.conj(t1), cf.conj(t2));
            let psi = cf.curvature[0][1].clone();
            let psib = cf.conj(&psi);
            let horiz = if i <= 2 {
                e(P1).w(&e(B1)) + e(B2).w(&e(P2))
            } else {
                e(P1).w(&e(B1)) + e(P2).w(&e(B2))
            };
            let t_part = if i <= 2 {
                t1.w(&e(B1)) - t1b.w(&e(P1)) + t2b.w(&e(P2)) - t2.w(&e(B2))
            } else {
                t1.w(&e(B1)) - t1b.w(&e(P1)) + t2.w(&e(B2)) - t2b.w(&e(P2))
            };
            let (vert, curv) = if i % 2 == 1 {
                (e(P3).w(&e(B3)), horiz.w(&psi).w(&e(B3)) - horiz.w(&psib).w(&e(P3)))
            } else {
                (e(B3).w(&e(P3)), horiz.w(&psib).w(&e(P3)) - horiz.w(&psi).w(&e(B3)))
            };
            // the displays give −K∧dK
            Ok((curv + t_part.w(&vert)).scale_real(-l2))
        }
    }
}

/// Hypotheses under which the `∂∂̄` displays hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DdbarHypotheses {
    pub self_dual: bool,
    pub constant_scalar: bool,
    pub ricci_j_invariant: bool,
}

impl DdbarHypotheses {
    /// Pointwise flags from the base analysis; constancy of `s` is asserted by the caller.
    pub fn from_coframe(cf: &TwistorCoframe, constant_scalar: bool) -> Self {
        let f = &cf.base.flags;
        DdbarHypotheses { self_dual: f.self_dual.value, constant_scalar, ricci_j_invariant: f.ricci_j_invariant.value }
    }
}

/// Closed-form `i∂∂̄K_i`.
pub fn ddbar_formula(i: usize, lambdas: Lambdas, cf: &TwistorCoframe, hyp: DdbarHypotheses) -> Result<Form> {
    lambdas.validate()?;
    unitary_basis(i)?;
    if !lambdas.is_single() {
        return Err(Error::NotApplicable("no ∂∂̄ display for three-parameter metrics on a general surface".into()));
    }
    let fam = family(cf)?;
    let l2 = lambdas.lambda().powi(2);
    let pb = |a: usize, b: usize| e(a).w(&e(b));
    match (fam, i) {
        (Family::Lichnerowicz, 1) => {
            if !hyp.self_dual {
                return Err(Error::NotApplicable("missing hypothesis: self-dual".into()));
            }
            if !hyp.constant_scalar {
                return Err(Error::NotApplicable("missing hypothesis: constant scalar curvature".into()));
            }
            let s = cf.base.flags.s;
            let shape = pb(P1, B1).w(&pb(B2, P2)).scale_real(-s / 12.0)
                + pb(B2, P2).w(&pb(P3, B3))
                + pb(P3, B3).w(&pb(P1, B1));
            Ok(shape.scale_real(-(2.0 - l2 * s / 6.0)) + lc_bracket(cf).scale_real(l2))
        }
        (Family::Lichnerowicz, 3 | 4) => {
            if !hyp.ricci_j_invariant {
                return Err(Error::NotApplicable("missing hypothesis: J-invariant Ricci tensor".into()));
            }
            let f = &cf.base.flags;
            let mub = cf.conj(&cf.mu);
            let first = pb(P1, B1).w(&pb(P2, B2)).scale_real(0.25 * (f.s - f.sstar));
            let second = cf.mu.w(&mub).w(&(pb(P1, B1) + pb(P2, B2))).scale_real(-2.0);
            Ok(first + second + lc_bracket(cf).scale_real(l2))
        }
        (Family::Chern, 3 | 4) => {
            let psi = &cf.curvature;
            let p12b = cf.conj(&psi[0][1]);
            let [t1, t2] = &cf.torsion;
            let vertical = psi[0][1].w(&p12b) + (psi[0][0].clone() - psi[1][1].clone()).w(&pb(P3, B3));
            Ok(vertical.scale_real(-l2)
                + psi[0][0].w(&pb(P1, B1))
                + psi[1][1].w(&pb(P2, B2))
                + t1.w(&cf.conj(t1))
                - p12b.w(&pb(P1, B2))
                - psi[0][1].w(&pb(B1, P2))
                + t2.w(&cf.conj(t2)))
        }
        _ => Err(Error::NotApplicable(format!("no ∂∂̄ display for K_{i} with this connection"))),
    }
}

/// `i(Ω¹₂ − Ω³₄)∧φ³∧φ̄³ − τ³∧τ̄³`.
fn lc_bracket(cf: &TwistorCoframe) -> Form {
    let tau = cf.tau();
    let taub = cf.conj(&tau);
    (cf.lc_real(0, 1) - cf.lc_real(2, 3)).w(&e(P3)).w(&e(B3)).times_i() - tau.w(&taub)
}
