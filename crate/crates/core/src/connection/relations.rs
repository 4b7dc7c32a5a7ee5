//! Curvature of the Chern and Bismut connections expressed through Levi-Civita data and the Lee form.

use super::{transform4, CurvatureTensor, CurvatureWhich, LeviCivitaData};
use crate::error::Result;
use crate::manifold::{zero3, zero4, HermitianSurface, Tensor3};
use nalgebra::{Matrix4, Vector4};

/// `L(X,Y) = (∇_Xα)Y + ½α(X)α(Y)`, `d(α∘J)` and `|α|²` in chart coordinates.
#[derive(Clone, Debug)]
pub struct TorsionAuxiliary {
    pub alpha: Vector4<f64>,
    pub l: Matrix4<f64>,
    pub d_alpha_j: Matrix4<f64>,
    pub alpha_sq: f64,
    pub metric: Matrix4<f64>,
    pub fundamental: Matrix4<f64>,
}

impl TorsionAuxiliary {
    pub fn max_abs(&self) -> f64 {
        self.l.abs().max().max(self.d_alpha_j.abs().max()).max(self.alpha_sq.abs())
    }
}

/// `(α∘J)_b = α(J∂_b)`.
fn alpha_j(m: &HermitianSurface, y: &[f64]) -> Vector4<f64> {
    m.complex_structure(y).transpose() * m.lee_form_unchecked(y)
}

pub fn torsion_auxiliary(m: &HermitianSurface, lc: &LeviCivitaData) -> Result<TorsionAuxiliary> {
    let x = &lc.point;
    m.ensure_interior(x, 2)?;
    let alpha = m.lee_form(x)?;
    let da = m.backend.gradient(|y: &[f64]| m.lee_form_unchecked(y), x);
    let gam = &lc.christoffel;
    let l = Matrix4::from_fn(|a, b| {
        let cov = da[a][b] - (0..4).map(|c| alpha[c] * gam[c][a][b]).sum::<f64>();
        cov + 0.5 * alpha[a] * alpha[b]
    });
    let daj = m.backend.gradient(|y: &[f64]| alpha_j(m, y), x);
    let d_alpha_j = Matrix4::from_fn(|a, b| daj[a][b] - daj[b][a]);
    let g = m.metric(x);
    let alpha_sq = (alpha.transpose() * g.try_inverse().expect("metric is positive definite") * alpha)[(0, 0)];
    Ok(TorsionAuxiliary { alpha, l, d_alpha_j, alpha_sq, metric: g, fundamental: m.fundamental_matrix(x) })
}

/// Chern curvature from Levi-Civita curvature and the Lee form.
///
/// `K = R + ½d(α∘J)(X₃,X₄)F(X₁,X₂) + ½[L(X₄,X₂)h(X₃,X₁) + L(X₃,X₁)h(X₄,X₂)]
///  − ½[L(X₃,X₂)h(X₄,X₁) + L(X₄,X₁)h(X₃,X₂)] + ¼|α|²[h(X₃,X₂)h(X₄,X₁) − h(X₄,X₂)h(X₃,X₁)]`.
pub fn chern_curvature_relation(lc: &LeviCivitaData, aux: &TorsionAuxiliary) -> CurvatureTensor {
    let (g, f, l) = (&aux.metric, &aux.fundamental, &aux.l);
    let r = &lc.curvature_coords;
    let mut k = zero4();
    for i in 0..4 {
        for j in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    k[i][j][a][b] = r[i][j][a][b]
                        + 0.5 * aux.d_alpha_j[(a, b)] * f[(i, j)]
                        + 0.5 * (l[(b, j)] * g[(a, i)] + l[(a, i)] * g[(b, j)])
                        - 0.5 * (l[(a, j)] * g[(b, i)] + l[(b, i)] * g[(a, j)])
                        + 0.25 * aux.alpha_sq * (g[(a, j)] * g[(b, i)] - g[(b, j)] * g[(a, i)]);
                }
            }
        }
    }
    CurvatureTensor { which: CurvatureWhich::Gauduchon(1.0), r: transform4(&k, &lc.frame.e) }
}

/// `P = (α∘J)∧F` with `P_abc = β_aF_bc + β_bF_ca + β_cF_ab`.
fn p_form(m: &HermitianSurface, y: &[f64]) -> Tensor3 {
    let beta = alpha_j(m, y);
    let f = m.fundamental_matrix(y);
    let mut p = zero3();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                p[a][b][c] = beta[a] * f[(b, c)] + beta[b] * f[(c, a)] + beta[c] * f[(a, b)];
            }
        }
    }
    p
}

/// Bismut curvature from Levi-Civita curvature and `P = (α∘J)∧F`.
///
/// `K̃ = R + ½(∇_{X₃}P)(X₄,X₂,X₁) − ½(∇_{X₄}P)(X₃,X₂,X₁) + ¼Σ_p[P(X₄,X₁,e_p)P(X₃,X₂,e_p) − P(X₃,X₁,e_p)P(X₄,X₂,e_p)]`.
pub fn bismut_curvature_relation(lc: &LeviCivitaData, m: &HermitianSurface) -> Result<CurvatureTensor> {
    let x = &lc.point;
    m.ensure_interior(x, 3)?;
    let p = p_form(m, x);
    let dp = m.backend.gradient(|y: &[f64]| p_form(m, y), x);
    let gam = &lc.christoffel;
    let mut np = [[[[0.0; 4]; 4]; 4]; 4];
    for k in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let mut s = dp[k][a][b][c];
                    for d in 0..4 {
                        s -= gam[d][k][a] * p[d][b][c] + gam[d][k][b] * p[a][d][c] + gam[d][k][c] * p[a][b][d];
                    }
                    np[k][a][b][c] = s;
                }
            }
        }
    }
    let gi = m.metric(x).try_inverse().expect("metric is positive definite");
    // raise the last slot once: pu[a][b][q] = Σ_p P_abp g^{pq}
    let mut pu = zero3();
    for a in 0..4 {
        for b in 0..4 {
            for q in 0..4 {
                pu[a][b][q] = (0..4).map(|pp| p[a][b][pp] * gi[(pp, q)]).sum();
            }
        }
    }
    let r = &lc.curvature_coords;
    let mut out = zero4();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let quad: f64 = (0..4).map(|q| pu[l][i][q] * p[k][j][q] - pu[k][i][q] * p[l][j][q]).sum();
                    out[i][j][k][l] =
                        r[i][j][k][l] + 0.5 * np[k][l][j][i] - 0.5 * np[l][k][j][i] + 0.25 * quad;
                }
            }
        }
    }
    Ok(CurvatureTensor { which: CurvatureWhich::Gauduchon(-1.0), r: transform4(&out, &lc.frame.e) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{curvature_direct, levi_civita, ConnectionChoice};
    use crate::manifold::{builtin, BuiltinName};

    fn gap(a: &CurvatureTensor, b: &crate::manifold::Tensor4) -> f64 {
        let mut m: f64 = 0.0;
        for n in 0..256 {
            let (i, j, k, l) = (n / 64, n / 16 % 4, n / 4 % 4, n % 4);
            m = m.max((a.r[i][j][k][l] - b[i][j][k][l]).abs());
        }
        m
    }

    #[test]
    fn relations_on_hopf() {
        let s = builtin(BuiltinName::Hopf, &[]).unwrap();
        let x = [1.05, 0.12, -0.2, 0.15];
        let lc = levi_civita(&s, &x).unwrap();
        let aux = torsion_auxiliary(&s, &lc).unwrap();
        let k = chern_curvature_relation(&lc, &aux);
        let direct = curvature_direct(&s, &x, ConnectionChoice::CHERN).unwrap();
        assert!(gap(&k, &direct) < 1e-5, "{}", gap(&k, &direct));
        let kb = bismut_curvature_relation(&lc, &s).unwrap();
        let direct_b = curvature_direct(&s, &x, ConnectionChoice::BISMUT).unwrap();
        assert!(gap(&kb, &direct_b) < 1e-4, "{}", gap(&kb, &direct_b));
    }

    #[test]
    fn kahler_and_flat_inputs() {
        for name in [BuiltinName::Cp2Fs, BuiltinName::FlatC2] {
            let s = builtin(name, &[]).unwrap();
            let x = [0.2, 0.1, -0.3, 0.25];
            let lc = levi_civita(&s, &x).unwrap();
            let aux = torsion_auxiliary(&s, &lc).unwrap();
            assert!(aux.max_abs() < 1e-7);
            let k = chern_curvature_relation(&lc, &aux);
            assert!(gap(&k, &lc.curvature) < 1e-7);
            let kb = bismut_curvature_relation(&lc, &s).unwrap();
            assert!(gap(&kb, &lc.curvature) < 1e-7);
        }
    }
}
