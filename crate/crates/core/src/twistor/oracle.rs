//! Finite-difference oracles on the twistor chart, independent of the structure equations.

use super::formulas::{acs_at, kahler_form, pairing, unitary_basis, Lambdas};
use super::{basis_matrix, matrix_rows, section_rows, TwistorChart, TwistorPoint, B1, P1};
use crate::connection::ConnectionChoice;
use crate::error::{Error, Result};
use crate::manifold::{DiffBackend, HermitianSurface};
use crate::Form;
use nalgebra::{DMatrix, Matrix3, Matrix6, SymmetricEigen};
use num_complex::Complex;

type C64 = Complex<f64>;

/// Outer step for the second derivative in the `∂∂̄` oracle.
const DDBAR_STEP: f64 = 4e-3;

fn parameter(choice: ConnectionChoice) -> Result<f64> {
    choice
        .t()
        .ok_or_else(|| Error::InvalidParameter("the twistor construction needs a Hermitian connection".into()))
}

fn hat_to_dy(m: &HermitianSurface, t: f64, y: &[f64], f: &Form) -> Form {
    f.change_basis(&matrix_rows(&basis_matrix(&section_rows(m, t, y))))
}

fn dy_to_hat(m: &HermitianSurface, t: f64, y: &[f64], f: &Form) -> Result<Form> {
    let c = basis_matrix(&section_rows(m, t, y));
    let inv = c.try_inverse().ok_or_else(|| Error::Invariant {
        check: "twistor coframe degenerate".into(),
        point: y.to_vec(),
    })?;
    Ok(f.change_basis(&matrix_rows(&inv)))
}

/// Chart components of `dK_i` at `y`.
fn dk_coordinates(m: &HermitianSurface, t: f64, k: &Form, y: &[f64]) -> Form {
    m.backend.exterior_derivative(|p: &[f64]| hat_to_dy(m, t, p, k), y)
}

/// `dK_i` by differencing the chart components of `K_i`, returned over the twistor coframe at `z`.
pub fn dk_oracle(
    i: usize,
    lambdas: Lambdas,
    m: &HermitianSurface,
    choice: ConnectionChoice,
    z: &TwistorPoint,
    chart: &TwistorChart,
) -> Result<Form> {
    let t = parameter(choice)?;
    let k = kahler_form(i, lambdas)?;
    let y = chart.coordinates(z)?;
    chart.ensure_interior(m, &y, 2, m.backend.reach())?;
    dy_to_hat(m, t, &y, &dk_coordinates(m, t, &k, &y))
}

/// `K_i∧dK_i` with `dK_i` from [`dk_oracle`].
pub fn balanced_oracle(
    i: usize,
    lambdas: Lambdas,
    m: &HermitianSurface,
    choice: ConnectionChoice,
    z: &TwistorPoint,
    chart: &TwistorChart,
) -> Result<Form> {
    Ok(kahler_form(i, lambdas)?.w(&dk_oracle(i, lambdas, m, choice, z, chart)?))
}

/// `i∂∂̄K_i = i Π^{2,2} d Π^{1,2} dK_i`, both derivatives by differencing.
pub fn ddbar_oracle(
    i: usize,
    lambdas: Lambdas,
    m: &HermitianSurface,
    choice: ConnectionChoice,
    z: &TwistorPoint,
    chart: &TwistorChart,
) -> Result<Form> {
    let t = parameter(choice)?;
    let k = kahler_form(i, lambdas)?;
    let pair = pairing(i)?;
    let outer = DiffBackend::new(4, DDBAR_STEP)?;
    let y = chart.coordinates(z)?;
    let levels = 2 + (outer.reach() / m.backend.reach()).ceil() as usize;
    chart.ensure_interior(m, &y, levels, m.backend.reach())?;
    let dbar_k = |p: &[f64]| -> Form {
        let hat = dy_to_hat(m, t, p, &dk_coordinates(m, t, &k, p)).expect("coframe checked at the centre");
        let part = hat.bidegree_project(&pair, 1, 2).expect("3-form over a paired basis").form;
        hat_to_dy(m, t, p, &part)
    };
    let dd = dy_to_hat(m, t, &y, &outer.exterior_derivative(dbar_k, &y))?;
    Ok(dd.bidegree_project(&pair, 2, 2)?.form.times_i())
}

/// Real endomorphism of `J_i` in chart coordinates at `y`.
pub fn acs_coordinates(m: &HermitianSurface, choice: ConnectionChoice, i: usize, y: &[f64]) -> Result<Matrix6<f64>> {
    acs_at(m, parameter(choice)?, i, y)
}

/// Largest Euclidean norm of `N(∂_a, ∂_b)` over the fifteen coordinate pairs.
pub fn nijenhuis_oracle(
    i: usize,
    m: &HermitianSurface,
    choice: ConnectionChoice,
    z: &TwistorPoint,
    chart: &TwistorChart,
) -> Result<f64> {
    let t = parameter(choice)?;
    unitary_basis(i)?;
    let y = chart.coordinates(z)?;
    chart.ensure_interior(m, &y, 2, m.backend.reach())?;
    let j = acs_at(m, t, i, &y)?;
    let field = |p: &[f64]| acs_at(m, t, i, p).expect("coframe checked at the centre");
    let dj: Vec<Matrix6<f64>> = m.backend.gradient(field, &y);
    let mut worst = 0.0f64;
    for a in 0..6 {
        for b in a + 1..6 {
            let mut n = [0.0; 6];
            for (c, nc) in n.iter_mut().enumerate() {
                let mut v = 0.0;
                for d in 0..6 {
                    v += j[(d, a)] * dj[d][(c, b)] - j[(d, b)] * dj[d][(c, a)];
                    v += j[(c, d)] * (dj[b][(d, a)] - dj[a][(d, b)]);
                }
                *nc = v;
            }
            worst = worst.max(n.iter().map(|v| v * v).sum::<f64>().sqrt());
        }
    }
    Ok(worst)
}

/// Hermitian matrix `M_ab` with `Θ∧(iξ_a∧ξ̄_b) = M_ab · vol`, `vol = Π_c iξ_c∧ξ̄_c`.
///
/// A real `(2,2)`-form `Θ` is positive exactly when `M` is positive definite.
pub fn positivity_matrix(theta: &Form, i: usize) -> Result<Matrix3<C64>> {
    if theta.dim() != 6 || theta.degree() != 4 {
        return Err(Error::DegreeMismatch(theta.degree(), 4));
    }
    let xi = unitary_basis(i)?;
    let e = |s: usize| Form::basis(6, s);
    let bar = |s: usize| (s + 3) % 6;
    let ii = C64::new(0.0, 1.0);
    let vol = (0..3).fold(Form::scalar(6, C64::new(1.0, 0.0)), |acc, c| acc.w(&e(xi[c]).w(&e(bar(xi[c]))).scale(ii)));
    let top = [P1, P1 + 1, P1 + 2, B1, B1 + 1, B1 + 2];
    let v = vol.coefficient(&top);
    Ok(Matrix3::from_fn(|a, b| theta.w(&e(xi[a]).w(&e(bar(xi[b]))).scale(ii)).coefficient(&top) / v))
}

/// Smallest eigenvalue of the Hermitian part of a complex matrix.
pub fn min_hermitian_eigenvalue(h: &Matrix3<C64>) -> f64 {
    let hs = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let real = DMatrix::from_fn(6, 6, |r, c| {
        let z = hs[(r % 3, c % 3)];
        match (r < 3, c < 3) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    SymmetricEigen::new(real).eigenvalues.min()
}
