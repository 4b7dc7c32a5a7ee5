//! Conformal comparison of the induced structures and the projective-bundle form.

use super::formulas::{acs_at, Lambdas};
use super::{twistor_coframe, TwistorChart, TwistorPoint};
use crate::connection::ConnectionChoice;
use crate::error::{Error, Result};
use crate::manifold::{standard_j, HermitianSurface, ScalarField};
use crate::Form;
use nalgebra::{DMatrix, Matrix3, Matrix6};
use num_complex::Complex;
use serde::Serialize;

type C64 = Complex<f64>;

/// Endomorphism differences between `h` and `e^{2f}h` at one twistor point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConformalComparison {
    /// Max-entry differences of `J₁..J₄` for the Lichnerowicz connection.
    pub lichnerowicz: [f64; 4],
    /// Same for the Chern connection.
    pub chern: [f64; 4],
    /// Largest principal angle between the `(1,0)` spaces of `J₁^L`.
    pub j1_lichnerowicz_angle: f64,
}

/// Compares `J_i` built from `h` and from `e^{2f}h` at the same point of `Z`.
pub fn conformal_compare(
    m: &HermitianSurface,
    f: ScalarField,
    label: &str,
    z: &TwistorPoint,
    chart: &TwistorChart,
) -> Result<ConformalComparison> {
    let mt = m.conformal(f, label)?;
    let y = chart.coordinates(z)?;
    chart.ensure_interior(m, &y, 2, m.backend.reach())?;
    let zt = TwistorPoint::from_vector(&mt, z.x, &z.vector(m)?)?;
    let yt = chart.coordinates(&zt)?;
    // canonical frames of conformal metrics are proportional, so the charts agree
    let drift = y.iter().zip(&yt).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if drift > 1e-9 {
        return Err(Error::Invariant { check: "conformal charts disagree".into(), point: y.to_vec() });
    }
    let diffs = |t: f64| -> Result<([f64; 4], Vec<Matrix6<f64>>)> {
        let mut out = [0.0; 4];
        let mut pairs = Vec::new();
        for i in 1..=4 {
            let a = acs_at(m, t, i, &y)?;
            let b = acs_at(&mt, t, i, &y)?;
            out[i - 1] = (a - b).amax();
            if i == 1 {
                pairs.push(a);
                pairs.push(b);
            }
        }
        Ok((out, pairs))
    };
    let (lichnerowicz, j1) = diffs(0.0)?;
    let (chern, _) = diffs(1.0)?;
    Ok(ConformalComparison { lichnerowicz, chern, j1_lichnerowicz_angle: eigenspace_angle(&j1[0], &j1[1]) })
}

fn holomorphic_basis(j: &Matrix6<f64>) -> DMatrix<C64> {
    let p = DMatrix::from_fn(6, 6, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        C64::new(0.5 * id, -0.5 * j[(r, c)])
    });
    let svd = p.svd(true, false);
    let u = svd.u.expect("requested");
    let mut order: Vec<usize> = (0..6).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    DMatrix::from_fn(6, 3, |r, c| u[(r, order[c])])
}

/// Largest principal angle between the `+i` eigenspaces of two complex structures.
pub fn eigenspace_angle(j1: &Matrix6<f64>, j2: &Matrix6<f64>) -> f64 {
    let q1 = holomorphic_basis(j1);
    let q2 = holomorphic_basis(j2);
    let resid = &q1 - &q2 * (q2.adjoint() * &q1);
    let s = resid.singular_values().max();
    s.min(1.0).asin()
}

/// The form `λp*F + i∂∂̄ log h(v,v)` at a point of `Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveForm {
    /// Over the Chern twistor coframe at the point.
    pub form: Form,
    /// Coefficient matrix against `dZ_a∧dZ̄_b` in holomorphic coordinates `(z₁, z₂, w)`, divided by `i`.
    pub hermitian: Matrix3<C64>,
    /// Fiber coefficient of the log term alone.
    pub fiber_component: f64,
    pub min_eigenvalue: f64,
}

impl ProjectiveForm {
    /// `H(v, v̄)` along six fixed test directions.
    pub fn test_directions(&self) -> [f64; 6] {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let dirs = [
            [one, zero, zero],
            [zero, one, zero],
            [zero, zero, one],
            [one, one, zero],
            [zero, C64::new(0.0, 1.0), one],
            [one, C64::new(-0.5, 0.5), C64::new(0.3, -1.0)],
        ];
        dirs.map(|v| {
            let mut s = C64::new(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    s += v[a] * self.hermitian[(a, b)] * v[b].conj();
                }
            }
            s.re
        })
    }
}

/// Holomorphic coordinate `w` of the line `[u₁ + ζu₂]`, with `v = c(∂_{z₁} + w∂_{z₂})`.
fn fiber_coordinate(m: &HermitianSurface, y: &[f64]) -> Result<C64> {
    let frame = m.frame(&y[..4])?;
    let v = frame.u(0) + frame.u(1) * C64::new(y[4], y[5]);
    if v[0].norm() < 1e-12 {
        return Err(Error::FiberOutOfChart(f64::INFINITY));
    }
    Ok(v[2] / v[0])
}

/// `λ p*F + i∂∂̄ log h(v,v)` on `P(T^{1,0}M)` for a Kähler surface.
pub fn projective_bundle_form(
    m: &HermitianSurface,
    lambda: f64,
    z: &TwistorPoint,
    chart: &TwistorChart,
) -> Result<ProjectiveForm> {
    Lambdas::single(lambda).validate()?;
    let x = z.x;
    let y = chart.coordinates(z)?;
    chart.ensure_interior(m, &y, 2, m.backend.reach())?;
    if (m.complex_structure(&x) - standard_j()).amax() > 1e-10 {
        return Err(Error::NotApplicable("complex structure is not the standard one at the point".into()));
    }
    let kd = m.d_fundamental_form(&x, &m.frame(&x)?).norm();
    if kd > 1e-6 {
        return Err(Error::NotApplicable(format!("surface is not Kähler (‖dF‖ = {kd:.3e})")));
    }
    let w0 = fiber_coordinate(m, &y)?;
    let yh = [x[0], x[1], x[2], x[3], w0.re, w0.im];
    let potential = |p: &[f64]| -> f64 {
        let g = m.metric(&p[..4]);
        // ∂_{z₁} + w∂_{z₂} with w = p₄ + ip₅
        let w = C64::new(p[4], p[5]);
        let v = [C64::new(0.5, 0.0), C64::new(0.0, -0.5), w * 0.5, w * C64::new(0.0, -0.5)];
        let mut s = C64::new(0.0, 0.0);
        for k in 0..4 {
            for l in 0..4 {
                s += v[k] * v[l].conj() * g[(k, l)];
            }
        }
        s.re.ln()
    };
    let b = m.backend;
    let hess = |a: usize, c: usize| b.partial(|p: &[f64]| b.partial(potential, p, c), &yh, a);
    let mut levi = Matrix3::<C64>::zeros();
    for a in 0..3 {
        for c in 0..3 {
            let (xa, ya, xc, yc) = (2 * a, 2 * a + 1, 2 * c, 2 * c + 1);
            levi[(a, c)] = C64::new(hess(xa, xc) + hess(ya, yc), hess(xa, yc) - hess(ya, xc)) * 0.25;
        }
    }
    let fm = m.fundamental_matrix(&x);
    // F = i Σ g_ab̄ dz_a∧dz̄_b on the base
    let to_z = real_to_holomorphic_rows();
    let f_real = Form::from_components(6, 2, |kl| {
        if kl[0] < 4 && kl[1] < 4 {
            C64::new(fm[(kl[0], kl[1])], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let f_hol = f_real.change_basis(&to_z);
    let ii = C64::new(0.0, 1.0);
    let mut hermitian = Matrix3::<C64>::zeros();
    for a in 0..3 {
        for c in 0..3 {
            hermitian[(a, c)] = levi[(a, c)] + f_hol.coefficient(&[a, c + 3]) * (-ii) * lambda;
        }
    }
    let hol = Form::from_components(6, 2, |kl| {
        if kl[0] < 3 && kl[1] >= 3 {
            hermitian[(kl[0], kl[1] - 3)] * ii
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // pull back along y ↦ (x, Re w, Im w), then onto the Chern coframe
    let phi = |p: &[f64]| -> [f64; 6] {
        let w = fiber_coordinate(m, p).expect("inside the chart");
        [p[0], p[1], p[2], p[3], w.re, w.im]
    };
    let jac: Vec<[f64; 6]> = b.gradient(phi, &y);
    let rows_real: Vec<Vec<C64>> = (0..6).map(|r| (0..6).map(|k| C64::new(jac[k][r], 0.0)).collect()).collect();
    let dy = hol.change_basis(&holomorphic_to_real_rows()).change_basis(&rows_real);
    let cf = twistor_coframe(m, ConnectionChoice::CHERN, z, chart)?;
    let min_eigenvalue = super::oracle::min_hermitian_eigenvalue(&hermitian);
    Ok(ProjectiveForm { form: cf.from_coordinates(&dy), hermitian, fiber_component: levi[(2, 2)].re, min_eigenvalue })
}

/// Rows expressing `dX₁, dY₁, dX₂, dY₂, dX₃, dY₃` over `dZ₁, dZ₂, dZ₃, dZ̄₁, dZ̄₂, dZ̄₃`.
fn real_to_holomorphic_rows() -> Vec<Vec<C64>> {
    let mut rows = vec![vec![C64::new(0.0, 0.0); 6]; 6];
    for a in 0..3 {
        rows[2 * a][a] = C64::new(0.5, 0.0);
        rows[2 * a][a + 3] = C64::new(0.5, 0.0);
        rows[2 * a + 1][a] = C64::new(0.0, -0.5);
        rows[2 * a + 1][a + 3] = C64::new(0.0, 0.5);
    }
    rows
}

/// Rows expressing `dZ_a, dZ̄_a` over the real coordinate differentials.
fn holomorphic_to_real_rows() -> Vec<Vec<C64>> {
    let mut rows = vec![vec![C64::new(0.0, 0.0); 6]; 6];
    for a in 0..3 {
        rows[a][2 * a] = C64::new(1.0, 0.0);
        rows[a][2 * a + 1] = C64::new(0.0, 1.0);
        rows[a + 3][2 * a] = C64::new(1.0, 0.0);
        rows[a + 3][2 * a + 1] = C64::new(0.0, -1.0);
    }
    rows
}

/// `K₃^{Ch}(1)` for comparison with the projective-bundle form.
#[cfg(test)]
pub(crate) fn reference_form() -> Form {
    super::formulas::kahler_form(3, Lambdas::single(1.0)).expect("valid parameters")
}
