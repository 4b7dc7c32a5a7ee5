//! Central finite differences over vector-valued fields.

use crate::exterior::ComplexForm;
use nalgebra::SMatrix;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

/// Values that can be linearly combined by a difference stencil.
pub trait Linear: Sized {
    fn lincomb(terms: &[(f64, &Self)]) -> Self;
}

impl Linear for f64 {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(w, v)| w * **v).sum()
    }
}

impl Linear for Complex<f64> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        terms.iter().map(|(w, v)| **v * *w).sum()
    }
}

impl<const R: usize, const C: usize> Linear for SMatrix<f64, R, C> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let mut out = Self::zeros();
        for (w, v) in terms {
            out += **v * *w;
        }
        out
    }
}

impl<const R: usize, const C: usize> Linear for SMatrix<Complex<f64>, R, C> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let mut out = Self::zeros();
        for (w, v) in terms {
            out += **v * Complex::new(*w, 0.0);
        }
        out
    }
}

impl<T: Linear + Clone, const N: usize> Linear for [T; N] {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        std::array::from_fn(|i| {
            let parts: Vec<(f64, &T)> = terms.iter().map(|(w, v)| (*w, &v[i])).collect();
            T::lincomb(&parts)
        })
    }
}

impl<T: Linear> Linear for Vec<T> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        let n = terms[0].1.len();
        (0..n)
            .map(|i| {
                let parts: Vec<(f64, &T)> = terms.iter().map(|(w, v)| (*w, &v[i])).collect();
                T::lincomb(&parts)
            })
            .collect()
    }
}

impl Linear for ComplexForm<f64> {
    fn lincomb(terms: &[(f64, &Self)]) -> Self {
        ComplexForm::combine(terms)
    }
}

/// Central difference scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffBackend {
    /// Accuracy order, 2 or 4.
    pub order: u8,
    /// Step applied along every coordinate.
    pub step: f64,
}

impl Default for DiffBackend {
    fn default() -> Self {
        DiffBackend { order: 4, step: 1e-3 }
    }
}

impl DiffBackend {
    pub fn new(order: u8, step: f64) -> crate::Result<Self> {
        if order != 2 && order != 4 {
            return Err(crate::Error::InvalidParameter(format!("difference order {order} (expected 2 or 4)")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(crate::Error::InvalidParameter(format!("difference step {step}")));
        }
        Ok(DiffBackend { order, step })
    }

    /// Distance from the centre to the outermost stencil node.
    pub fn reach(&self) -> f64 {
        self.step * if self.order == 4 { 2.0 } else { 1.0 }
    }

    fn stencil(&self) -> &'static [(f64, f64)] {
        // (offset in steps, weight before division by the step)
        if self.order == 4 {
            &[(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)]
        } else {
            &[(-1.0, -0.5), (1.0, 0.5)]
        }
    }

    /// `∂f/∂x_k` at `x`.
    pub fn partial<V, F>(&self, f: F, x: &[f64], k: usize) -> V
    where
        V: Linear,
        F: Fn(&[f64]) -> V,
    {
        let h = self.step;
        let samples: Vec<(f64, V)> = self
            .stencil()
            .iter()
            .map(|&(o, w)| {
                let mut y = x.to_vec();
                y[k] += o * h;
                (w / h, f(&y))
            })
            .collect();
        let refs: Vec<(f64, &V)> = samples.iter().map(|(w, v)| (*w, v)).collect();
        V::lincomb(&refs)
    }

    /// All first partials at `x`, indexed by coordinate.
    pub fn gradient<V, F>(&self, f: F, x: &[f64]) -> Vec<V>
    where
        V: Linear,
        F: Fn(&[f64]) -> V,
    {
        (0..x.len()).map(|k| self.partial(&f, x, k)).collect()
    }

    /// Exterior derivative `Σ_k dx^k ∧ ∂_k β` of a coordinate-basis form field.
    pub fn exterior_derivative<F>(&self, field: F, x: &[f64]) -> ComplexForm<f64>
    where
        F: Fn(&[f64]) -> ComplexForm<f64>,
    {
        let n = x.len();
        let mut out: Option<ComplexForm<f64>> = None;
        for (k, dk) in self.gradient(&field, x).into_iter().enumerate() {
            let term = ComplexForm::basis(n, k).w(&dk);
            out = Some(match out {
                Some(acc) => acc + term,
                None => term,
            });
        }
        out.unwrap_or_else(|| ComplexForm::zero(n, 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;

    #[test]
    fn polynomial_exactness() {
        let b4 = DiffBackend::default();
        let f = |x: &[f64]| x[0].powi(4) - 3.0 * x[0] * x[1];
        let d = b4.partial(f, &[0.7, 0.2], 0);
        assert!((d - (4.0 * 0.343 - 0.6)).abs() < 1e-10);
        let b2 = DiffBackend::new(2, 1e-4).unwrap();
        let g = |x: &[f64]| x[0] * x[0];
        assert!((b2.partial(g, &[0.3], 0) - 0.6).abs() < 1e-10);
    }

    #[test]
    fn order_four_converges_faster() {
        let f = |x: &[f64]| x[0].sin();
        let err = |b: DiffBackend| (b.partial(f, &[0.4], 0) - 0.4f64.cos()).abs();
        let e4 = err(DiffBackend::new(4, 1e-2).unwrap());
        let e4h = err(DiffBackend::new(4, 5e-3).unwrap());
        assert!(e4 / e4h > 12.0);
        let e2 = err(DiffBackend::new(2, 1e-2).unwrap());
        assert!(e4 < e2);
    }

    #[test]
    fn matrix_and_array_values() {
        let b = DiffBackend::default();
        let f = |x: &[f64]| Matrix2::new(x[0], x[1] * x[1], 1.0, x[0] * x[1]);
        let d = b.partial(f, &[1.0, 2.0], 1);
        assert!((d - Matrix2::new(0.0, 4.0, 0.0, 1.0)).norm() < 1e-10);
        let g = |x: &[f64]| [[x[0], 2.0 * x[0]], [0.0, x[0] * x[0]]];
        let dg = b.partial(g, &[3.0], 0);
        assert!((dg[1][1] - 6.0).abs() < 1e-9 && (dg[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exterior_derivative_of_one_form() {
        // β = x dy has dβ = dx∧dy
        let b = DiffBackend::default();
        let field = |x: &[f64]| ComplexForm::basis(2, 1).scale_real(x[0]);
        let d = b.exterior_derivative(field, &[0.3, -0.2]);
        assert!((d.coefficient(&[0, 1]) - Complex::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn invalid_backends() {
        assert!(DiffBackend::new(3, 1e-3).is_err());
        assert!(DiffBackend::new(4, 0.0).is_err());
    }
}
