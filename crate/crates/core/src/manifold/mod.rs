//! Hermitian surfaces on a single coordinate chart.

pub mod builtin;
pub mod dsl;
pub mod fd;

pub use builtin::{builtin, BuiltinName};
pub use fd::{DiffBackend, Linear};

use crate::error::{Error, Result};
use crate::exterior::ComplexForm;
use crate::Form;
use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex;
use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

pub type Point = [f64; 4];
/// `t[a][b][c]`.
pub type Tensor3 = [[[f64; 4]; 4]; 4];
/// `t[a][b][c][d]`.
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];

pub type MatrixField = Arc<dyn Fn(&[f64]) -> Matrix4<f64> + Send + Sync>;
/// Smooth function on the chart, e.g. a conformal factor.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Tolerance used for every pointwise structural check.
pub const INVARIANT_TOL: f64 = 1e-10;
/// Residual below which a Gram–Schmidt seed counts as degenerate.
pub const SEED_TOL: f64 = 1e-8;
/// Number of Latin-hypercube points checked at load time.
pub const LOAD_SAMPLES: usize = 16;
const LOAD_SEED: u64 = 0x7e1d_5eed;

/// The standard block complex structure, `J ∂₁ = ∂₂`, `J ∂₃ = ∂₄`.
pub fn standard_j() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(1, 0)] = 1.0;
    j[(0, 1)] = -1.0;
    j[(3, 2)] = 1.0;
    j[(2, 3)] = -1.0;
    j
}

pub fn zero3() -> Tensor3 {
    [[[0.0; 4]; 4]; 4]
}

pub fn zero4() -> Tensor4 {
    [[[[0.0; 4]; 4]; 4]; 4]
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartSpec {
    pub coords: [String; 4],
    pub domain: [(f64, f64); 4],
}

impl ChartSpec {
    pub fn new(coords: [String; 4], domain: [(f64, f64); 4]) -> Result<Self> {
        for (k, (lo, hi)) in domain.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::InvalidParameter(format!("empty interval for {}", coords[k])));
            }
        }
        Ok(ChartSpec { coords, domain })
    }

    pub fn standard(domain: [(f64, f64); 4]) -> Self {
        ChartSpec { coords: ["x1", "x2", "x3", "x4"].map(String::from), domain }
    }

    /// Distance from `x` to the nearest face of the box; negative outside.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.domain
            .iter()
            .zip(x)
            .map(|((lo, hi), v)| (v - lo).min(hi - v))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn centre(&self) -> Point {
        std::array::from_fn(|k| 0.5 * (self.domain[k].0 + self.domain[k].1))
    }
}

/// Metric and complex structure fields on one chart.
#[derive(Clone)]
pub struct HermitianSurface {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub chart: ChartSpec,
    pub backend: DiffBackend,
    metric: MatrixField,
    structure: MatrixField,
    source: String,
}

impl fmt::Debug for HermitianSurface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianSurface")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("chart", &self.chart)
            .field("backend", &self.backend)
            .finish()
    }
}

impl HermitianSurface {
    /// Builds a surface and checks every invariant at the load-time sample points.
    pub fn new(
        name: impl Into<String>,
        params: Vec<(String, f64)>,
        chart: ChartSpec,
        metric: MatrixField,
        structure: MatrixField,
        source: String,
    ) -> Result<Self> {
        let s = HermitianSurface {
            name: name.into(),
            params,
            chart,
            backend: DiffBackend::default(),
            metric,
            structure,
            source,
        };
        for p in s.latin_hypercube(LOAD_SAMPLES, LOAD_SEED, 0.0) {
            s.validate_at(&p)?;
        }
        Ok(s)
    }

    /// Parses the surface description language.
    pub fn parse(text: &str) -> Result<Self> {
        let spec = dsl::parse_spec(text)?;
        let gt: Arc<Vec<dsl::Expr>> = Arc::new(spec.metric_table());
        let jt: Arc<Vec<dsl::Expr>> = Arc::new(spec.structure_table());
        let metric: MatrixField = Arc::new(move |x| Matrix4::from_fn(|i, j| gt[4 * i + j].eval(x)));
        let structure: MatrixField = Arc::new(move |x| Matrix4::from_fn(|i, j| jt[4 * i + j].eval(x)));
        let chart = ChartSpec::new(spec.coords, spec.domain)?;
        Self::new("custom", Vec::new(), chart, metric, structure, text.to_string())
    }

    /// Description-language text that reproduces this surface.
    pub fn spec_text(&self) -> &str {
        &self.source
    }

    pub fn with_backend(mut self, backend: DiffBackend) -> Self {
        self.backend = backend;
        self
    }

    /// The conformally related surface with metric `e^{2f} h`.
    pub fn conformal(&self, f: ScalarField, label: &str) -> Result<Self> {
        let g = self.metric.clone();
        let metric: MatrixField = Arc::new(move |x| g(x) * (2.0 * f(x)).exp());
        let mut s = Self::new(
            format!("{}*exp(2f)", self.name),
            self.params.clone(),
            self.chart.clone(),
            metric,
            self.structure.clone(),
            format!("# conformal rescaling of {} by f = {label}\n", self.name),
        )?;
        s.backend = self.backend;
        Ok(s)
    }

    pub fn metric(&self, x: &[f64]) -> Matrix4<f64> {
        (self.metric)(x)
    }

    pub fn complex_structure(&self, x: &[f64]) -> Matrix4<f64> {
        (self.structure)(x)
    }

    /// `F_ab = F(∂_a, ∂_b) = h(J∂_a, ∂_b)`.
    pub fn fundamental_matrix(&self, x: &[f64]) -> Matrix4<f64> {
        self.complex_structure(x).transpose() * self.metric(x)
    }

    /// Checks symmetry, positivity, `J² = −1` and compatibility at `x`.
    pub fn validate_at(&self, x: &[f64]) -> Result<()> {
        let fail = |check: &str| Error::Invariant { check: check.into(), point: x.to_vec() };
        let g = self.metric(x);
        let j = self.complex_structure(x);
        if g.iter().chain(j.iter()).any(|v| !v.is_finite()) {
            return Err(fail("non-finite field value"));
        }
        let scale = g.abs().max().max(1.0);
        if (g - g.transpose()).abs().max() > INVARIANT_TOL * scale {
            return Err(fail("metric not symmetric"));
        }
        let eig = SymmetricEigen::new(g).eigenvalues;
        if eig.min() <= INVARIANT_TOL {
            return Err(fail("metric not positive definite"));
        }
        if (j * j + Matrix4::identity()).abs().max() > INVARIANT_TOL * j.abs().max().max(1.0).powi(2) {
            return Err(fail("J^2 != -Id"));
        }
        if (j.transpose() * g * j - g).abs().max() > INVARIANT_TOL * scale * j.abs().max().max(1.0).powi(2) {
            return Err(fail("metric not J-invariant"));
        }
        Ok(())
    }

    /// Latin-hypercube points in the box shrunk by `inset` (a fraction of each side).
    pub fn latin_hypercube(&self, n: usize, seed: u64, inset: f64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let strata: Vec<Vec<usize>> = (0..4)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        (0..n)
            .map(|i| {
                std::array::from_fn(|k| {
                    let (lo, hi) = self.chart.domain[k];
                    let w = hi - lo;
                    let (a, b) = (lo + inset * w, hi - inset * w);
                    let u: f64 = rng.gen();
                    a + (b - a) * (strata[k][i] as f64 + u) / n as f64
                })
            })
            .collect()
    }

    /// Uniform random interior points keeping a 10% inset from every face.
    pub fn sample_points(&self, n: usize, seed: u64) -> Vec<Point> {
        self.latin_hypercube(n, seed, 0.1)
    }

    /// Fails unless `levels` nested stencils around `x` stay inside the chart.
    pub fn ensure_interior(&self, x: &[f64], levels: usize) -> Result<()> {
        let need = (levels.max(1) as f64 * self.backend.reach()).max(2.0 * self.backend.step);
        if self.chart.margin(x) <= need {
            return Err(Error::Boundary(x.to_vec()));
        }
        Ok(())
    }

    /// `∂_k g` for `k = 0..4`.
    pub fn metric_derivatives(&self, x: &[f64]) -> Vec<Matrix4<f64>> {
        self.backend.gradient(|y: &[f64]| self.metric(y), x)
    }

    /// Levi-Civita Christoffel symbols `Γ[a][k][b] = Γ^a_{kb}`, with `∇_{∂k}∂b = Γ^a_{kb} ∂a`.
    pub fn christoffel(&self, x: &[f64]) -> Tensor3 {
        let gi = self.metric(x).try_inverse().expect("metric is positive definite");
        let dg = self.metric_derivatives(x);
        let mut low = zero3();
        for c in 0..4 {
            for k in 0..4 {
                for b in 0..4 {
                    low[c][k][b] = 0.5 * (dg[k][(c, b)] + dg[b][(c, k)] - dg[c][(k, b)]);
                }
            }
        }
        let mut out = zero3();
        for a in 0..4 {
            for k in 0..4 {
                for b in 0..4 {
                    out[a][k][b] = (0..4).map(|c| gi[(a, c)] * low[c][k][b]).sum();
                }
            }
        }
        out
    }

    /// `dF_abc = ∂_a F_bc + ∂_b F_ca + ∂_c F_ab` in chart coordinates.
    pub fn d_fundamental(&self, x: &[f64]) -> Tensor3 {
        let df = self.backend.gradient(|y: &[f64]| self.fundamental_matrix(y), x);
        let mut out = zero3();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    out[a][b][c] = df[a][(b, c)] + df[b][(c, a)] + df[c][(a, b)];
                }
            }
        }
        out
    }

    /// Gram–Schmidt frame from the canonical seeds `∂₁`, `∂₃`.
    pub fn frame(&self, x: &[f64]) -> Result<UnitaryFrame> {
        self.adapted_frame(x, [Vector4::x(), Vector4::z()])
    }

    /// Frame matrix (columns `e_i`) from the canonical seeds, for use inside stencils.
    pub fn frame_matrix(&self, x: &[f64]) -> Matrix4<f64> {
        gram_schmidt(&self.metric(x), &self.complex_structure(x), [Vector4::x(), Vector4::z()]).0
    }

    pub fn adapted_frame(&self, x: &[f64], seeds: [Vector4<f64>; 2]) -> Result<UnitaryFrame> {
        let g = self.metric(x);
        let (e, residual) = gram_schmidt(&g, &self.complex_structure(x), seeds);
        if residual < SEED_TOL {
            return Err(Error::DegenerateSeed(x.to_vec()));
        }
        let theta = e.try_inverse().ok_or_else(|| Error::DegenerateSeed(x.to_vec()))?;
        Ok(UnitaryFrame { point: to_point(x), e, theta })
    }

    /// `F` over the coframe `θ` of `frame`.
    pub fn fundamental_form(&self, x: &[f64], frame: &UnitaryFrame) -> Form {
        let f = frame.e.transpose() * self.fundamental_matrix(x) * frame.e;
        ComplexForm::from_components(4, 2, |ij| Complex::new(f[(ij[0], ij[1])], 0.0))
    }

    /// `dF` over the coframe `θ` of `frame`.
    pub fn d_fundamental_form(&self, x: &[f64], frame: &UnitaryFrame) -> Form {
        let d = self.d_fundamental(x);
        let e = &frame.e;
        ComplexForm::from_components(4, 3, |ijk| {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        s += d[a][b][c] * e[(a, ijk[0])] * e[(b, ijk[1])] * e[(c, ijk[2])];
                    }
                }
            }
            Complex::new(s, 0.0)
        })
    }

    /// `δF = −∗d∗F` over the coframe of the canonical frame at `x`.
    pub fn codifferential_fundamental(&self, x: &[f64]) -> Result<Form> {
        self.ensure_interior(x, 1)?;
        let frame = self.frame(x)?;
        let star_f = |y: &[f64]| -> Form {
            let e = self.frame_matrix(y);
            let theta = e.try_inverse().expect("frame is invertible");
            let f = e.transpose() * self.fundamental_matrix(y) * e;
            let in_frame = ComplexForm::from_components(4, 2, |ij| Complex::new(f[(ij[0], ij[1])], 0.0));
            let star = in_frame.hodge_star_4(1).expect("dimension 4");
            star.change_basis(&real_rows(&theta))
        };
        let d_star = self.backend.exterior_derivative(star_f, x);
        // dx^a = Σ_i E_ai θ^i
        let to_frame = d_star.change_basis(&real_rows(&frame.e));
        Ok(-to_frame.hodge_star_4(1)?)
    }

    /// Lee form `α = JδF = −δF∘J` in chart coordinates, `α_a = α(∂_a)`.
    pub fn lee_form(&self, x: &[f64]) -> Result<Vector4<f64>> {
        let frame = self.frame(x)?;
        let delta = self.codifferential_fundamental(x)?;
        let d: Vector4<f64> = Vector4::from_fn(|i, _| delta.coefficient(&[i]).re);
        let jf = frame.theta * self.complex_structure(x) * frame.e;
        // (δF∘J)(e_i) = Σ_j δF_j (J_frame)_{ji}
        let alpha_frame = -(jf.transpose() * d);
        Ok(frame.theta.transpose() * alpha_frame)
    }

    /// Lee form evaluated without boundary checks, for use inside stencils.
    pub(crate) fn lee_form_unchecked(&self, x: &[f64]) -> Vector4<f64> {
        let e = self.frame_matrix(x);
        let theta = e.try_inverse().expect("frame is invertible");
        let d = self.d_fundamental(x);
        // δF = −∗dF since F is self-dual
        let mut df = [0.0; 4];
        let triples = [([1, 2, 3], 0), ([0, 2, 3], 1), ([0, 1, 3], 2), ([0, 1, 2], 3)];
        for (idx, l) in triples {
            let mut s = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    for c in 0..4 {
                        s += d[a][b][c] * e[(a, idx[0])] * e[(b, idx[1])] * e[(c, idx[2])];
                    }
                }
            }
            // ∗(θ^{ijk}) = ε_{ijkl} θ^l, with ε_{1234} = 1
            let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
            df[l] = sign * s;
        }
        let delta = Vector4::from_fn(|i, _| -df[i]);
        let jf = theta * self.complex_structure(x) * e;
        let alpha_frame = -(jf.transpose() * delta);
        theta.transpose() * alpha_frame
    }
}

fn to_point(x: &[f64]) -> Point {
    std::array::from_fn(|k| x[k])
}

/// Rows of a real matrix as complex substitution rows.
pub(crate) fn real_rows(m: &Matrix4<f64>) -> Vec<Vec<Complex<f64>>> {
    (0..4).map(|i| (0..4).map(|j| Complex::new(m[(i, j)], 0.0)).collect()).collect()
}

/// Modified Gram–Schmidt with `e₂ = Je₁`, `e₄ = Je₃`; also returns the second-seed residual.
fn gram_schmidt(g: &Matrix4<f64>, j: &Matrix4<f64>, seeds: [Vector4<f64>; 2]) -> (Matrix4<f64>, f64) {
    let ip = |u: &Vector4<f64>, v: &Vector4<f64>| (u.transpose() * g * v)[(0, 0)];
    let n1 = ip(&seeds[0], &seeds[0]).sqrt();
    let e1 = seeds[0] / n1;
    let e2 = j * e1;
    let mut s = seeds[1];
    s -= e1 * ip(&s, &e1);
    s -= e2 * ip(&s, &e2);
    let r = ip(&s, &s).max(0.0).sqrt();
    let residual = r.min(n1);
    let e3 = s / r;
    let e4 = j * e3;
    (Matrix4::from_columns(&[e1, e2, e3, e4]), residual)
}

/// J-adapted orthonormal frame at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryFrame {
    pub point: Point,
    /// Columns are `e₁..e₄` in chart components.
    pub e: Matrix4<f64>,
    /// Rows are the dual coframe `θ¹..θ⁴` in chart components.
    pub theta: Matrix4<f64>,
}

impl UnitaryFrame {
    /// `u_a = (e_{2a−1} − i e_{2a})/√2` in chart components, `a ∈ {0, 1}`.
    pub fn u(&self, a: usize) -> Vector4<Complex<f64>> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Vector4::from_fn(|k, _| Complex::new(self.e[(k, 2 * a)], -self.e[(k, 2 * a + 1)]) * s)
    }

    /// `η^a = (θ^{2a−1} + iθ^{2a})/√2` in chart components.
    pub fn eta(&self, a: usize) -> Vector4<Complex<f64>> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Vector4::from_fn(|k, _| Complex::new(self.theta[(2 * a, k)], self.theta[(2 * a + 1, k)]) * s)
    }

    pub fn gram(&self, g: &Matrix4<f64>) -> Matrix4<f64> {
        self.e.transpose() * g * self.e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> HermitianSurface {
        builtin(BuiltinName::FlatC2, &[]).unwrap()
    }

    #[test]
    fn flat_frame_is_coordinate_frame() {
        let f = flat().frame(&[0.0; 4]).unwrap();
        assert!((f.e - Matrix4::identity()).norm() < 1e-15);
        let u = f.u(0);
        assert!((u[1] - Complex::new(0.0, -std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn degenerate_seed() {
        let err = flat().adapted_frame(&[0.0; 4], [Vector4::x(), Vector4::y()]).unwrap_err();
        assert!(err.to_string().starts_with("seed degenerate at point"));
    }

    #[test]
    fn boundary_refusal() {
        let s = flat();
        assert!(matches!(s.lee_form(&[0.9995, 0.0, 0.0, 0.0]), Err(Error::Boundary(_))));
        assert!(s.ensure_interior(&[0.5, 0.0, 0.0, 0.0], 3).is_ok());
    }

    #[test]
    fn frame_for_nonstandard_seeds() {
        let s = builtin(BuiltinName::Cp2Fs, &[]).unwrap();
        let x = [0.2, -0.1, 0.3, 0.05];
        let seeds = [Vector4::new(1.0, 0.5, 0.0, 0.2), Vector4::new(0.0, 0.3, 1.0, -0.4)];
        let f = s.adapted_frame(&x, seeds).unwrap();
        assert!((f.gram(&s.metric(&x)) - Matrix4::identity()).abs().max() < 1e-10);
        let j = s.complex_structure(&x);
        assert_eq!(j * f.e.column(0), f.e.column(1));
        assert_eq!(j * f.e.column(2), f.e.column(3));
    }

    #[test]
    fn fundamental_form_is_standard_in_frame() {
        let s = builtin(BuiltinName::Hopf, &[]).unwrap();
        let x = [1.0, 0.1, -0.2, 0.05];
        let frame = s.frame(&x).unwrap();
        let f = s.fundamental_form(&x, &frame);
        let expect = ComplexForm::monomial(4, &[0, 1], Complex::new(1.0, 0.0))
            + ComplexForm::monomial(4, &[2, 3], Complex::new(1.0, 0.0));
        assert!(f.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn lee_form_satisfies_df_equals_alpha_wedge_f() {
        let s = builtin(BuiltinName::Hopf, &[]).unwrap();
        let x = [0.9, 0.2, -0.1, 0.3];
        let alpha = s.lee_form(&x).unwrap();
        let quick = s.lee_form_unchecked(&x);
        assert!((alpha - quick).norm() < 1e-10);
        let d = s.d_fundamental(&x);
        let f = s.fundamental_matrix(&x);
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let af = alpha[a] * f[(b, c)] + alpha[b] * f[(c, a)] + alpha[c] * f[(a, b)];
                    worst = worst.max((d[a][b][c] - af).abs());
                }
            }
        }
        assert!(worst < 1e-9, "{worst}");
        // α = −2 dr/r has unit-free length 2 for the metric δ/r²
        let g = s.metric(&x);
        let norm = (alpha.transpose() * g.try_inverse().unwrap() * alpha)[(0, 0)].sqrt();
        assert!((norm - 2.0).abs() < 1e-8, "{norm}");
    }

    #[test]
    fn latin_hypercube_strata() {
        let s = flat();
        let pts = s.latin_hypercube(16, 3, 0.0);
        for k in 0..4 {
            let mut cells: Vec<usize> = pts.iter().map(|p| ((p[k] + 1.0) / 2.0 * 16.0) as usize).collect();
            cells.sort();
            assert_eq!(cells, (0..16).collect::<Vec<_>>());
        }
    }

    #[test]
    fn parse_errors_name_check() {
        let text = "coords x1 x2 x3 x4\ndomain x1 -1 1\ndomain x2 -1 1\ndomain x3 -1 1\ndomain x4 -1 1\n\
                    g 1 1 = 1/(1+x1^2)\ng 2 1 = 0.1\nJ standard\n";
        let err = HermitianSurface::parse(text).unwrap_err();
        assert!(err.to_string().starts_with("metric not symmetric at point"), "{err}");
        let text = "coords x1 x2 x3 x4\ndomain x1 -1 1\ndomain x2 -1 1\ndomain x3 -1 1\ndomain x4 -1 1\n\
                    g 1 1 = 2\nJ standard\n";
        let err = HermitianSurface::parse(text).unwrap_err();
        assert!(err.to_string().starts_with("metric not J-invariant"), "{err}");
    }
}
