//! Levi-Civita connection and the canonical Hermitian family `D^t`.
//!
//! Curvature follows `R(X₁,X₂,X₃,X₄) = h(R(X₃,X₄)X₂, X₁)`, so in a frame
//! `Ω^i_j(e_k, e_l) = R_ijkl`.

mod complexify;
mod relations;

pub use complexify::{parse_pattern, CurvatureTensor, CurvatureWhich, Slot};
pub use relations::{bismut_curvature_relation, chern_curvature_relation, torsion_auxiliary, TorsionAuxiliary};

use crate::error::Result;
use crate::exterior::ComplexForm;
use crate::manifold::{zero3, zero4, HermitianSurface, Tensor3, Tensor4, UnitaryFrame};
use crate::Form;
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

/// Which connection drives a computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ConnectionChoice {
    LeviCivita,
    /// `D^t`: Lichnerowicz at 0, Chern at 1, Bismut at −1.
    Gauduchon(f64),
}

impl ConnectionChoice {
    pub const LICHNEROWICZ: ConnectionChoice = ConnectionChoice::Gauduchon(0.0);
    pub const CHERN: ConnectionChoice = ConnectionChoice::Gauduchon(1.0);
    pub const BISMUT: ConnectionChoice = ConnectionChoice::Gauduchon(-1.0);

    pub fn t(self) -> Option<f64> {
        match self {
            ConnectionChoice::LeviCivita => None,
            ConnectionChoice::Gauduchon(t) => Some(t),
        }
    }

    pub fn label(self) -> String {
        match self {
            ConnectionChoice::LeviCivita => "levi_civita".into(),
            ConnectionChoice::Gauduchon(0.0) => "lichnerowicz".into(),
            ConnectionChoice::Gauduchon(1.0) => "chern".into(),
            ConnectionChoice::Gauduchon(-1.0) => "bismut".into(),
            ConnectionChoice::Gauduchon(t) => format!("gauduchon(t={t})"),
        }
    }
}

impl fmt::Display for ConnectionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `out[i][j][k][l] = Σ t[a][b][c][d] m_ai m_bj m_ck m_dl`.
pub fn transform4(t: &Tensor4, m: &Matrix4<f64>) -> Tensor4 {
    let mut cur = *t;
    for slot in 0..4 {
        let mut next = zero4();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let idx = [i, j, k, l];
                        let mut s = 0.0;
                        for a in 0..4 {
                            let mut src = idx;
                            src[slot] = a;
                            s += cur[src[0]][src[1]][src[2]][src[3]] * m[(a, idx[slot])];
                        }
                        next[i][j][k][l] = s;
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// Difference tensor `Δ^d_{ab} = D^t_{∂a}∂b − ∇_{∂a}∂b`, indexed `[d][a][b]`.
///
/// Lowered, `h(Δ(X,Y),Z) = ¼[dF(JX,JY,JZ) − dF(JX,Y,Z)] − (t/4)[dF(JX,JY,JZ) + dF(JX,Y,Z)]`.
pub fn difference_tensor(m: &HermitianSurface, x: &[f64], t: f64) -> Tensor3 {
    let d = m.d_fundamental(x);
    let j = m.complex_structure(x);
    let gi = m.metric(x).try_inverse().expect("metric is positive definite");
    let mut jxyz = zero3();
    let mut jjj = zero3();
    // contract one slot at a time to keep the cost at 4⁴ per pass
    let mut tmp1 = zero3();
    let mut tmp2 = zero3();
    for a in 0..4 {
        for q in 0..4 {
            for r in 0..4 {
                let v: f64 = (0..4).map(|p| d[p][q][r] * j[(p, a)]).sum();
                jxyz[a][q][r] = v;
                tmp1[a][q][r] = v;
            }
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            for r in 0..4 {
                tmp2[a][b][r] = (0..4).map(|q| tmp1[a][q][r] * j[(q, b)]).sum();
            }
        }
    }
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                jjj[a][b][c] = (0..4).map(|r| tmp2[a][b][r] * j[(r, c)]).sum();
            }
        }
    }
    let mut out = zero3();
    for a in 0..4 {
        for b in 0..4 {
            let low: [f64; 4] = std::array::from_fn(|c| {
                0.25 * (jjj[a][b][c] - jxyz[a][b][c]) - 0.25 * t * (jjj[a][b][c] + jxyz[a][b][c])
            });
            for dd in 0..4 {
                out[dd][a][b] = (0..4).map(|c| gi[(dd, c)] * low[c]).sum();
            }
        }
    }
    out
}

/// Connection coefficients `Γ[a][k][b]` with `D_{∂k}∂b = Γ^a_{kb} ∂a`.
pub fn coefficients(m: &HermitianSurface, x: &[f64], choice: ConnectionChoice) -> Tensor3 {
    let mut g = m.christoffel(x);
    if let ConnectionChoice::Gauduchon(t) = choice {
        let d = difference_tensor(m, x, t);
        for a in 0..4 {
            for k in 0..4 {
                for b in 0..4 {
                    g[a][k][b] += d[a][k][b];
                }
            }
        }
    }
    g
}

/// Connection matrices `ω_k` against the canonical frame field: `ω^i_j(∂_k) = ω_k[(i, j)]`.
pub fn connection_forms(m: &HermitianSurface, x: &[f64], choice: ConnectionChoice) -> [Matrix4<f64>; 4] {
    let e = m.frame_matrix(x);
    let theta = e.try_inverse().expect("frame is invertible");
    let de = m.backend.gradient(|y: &[f64]| m.frame_matrix(y), x);
    let gam = coefficients(m, x, choice);
    std::array::from_fn(|k| {
        let gk = Matrix4::from_fn(|a, b| gam[a][k][b]);
        theta * (de[k] + gk * e)
    })
}

/// Curvature matrices `Ω(∂_k, ∂_l) = ∂_kω_l − ∂_lω_k + [ω_k, ω_l]`, indexed `[k][l]`.
pub fn curvature_matrices(m: &HermitianSurface, x: &[f64], choice: ConnectionChoice) -> [[Matrix4<f64>; 4]; 4] {
    let w = connection_forms(m, x, choice);
    let dw = m.backend.gradient(|y: &[f64]| connection_forms(m, y, choice), x);
    std::array::from_fn(|k| {
        std::array::from_fn(|l| dw[k][l] - dw[l][k] + w[k] * w[l] - w[l] * w[k])
    })
}

/// Frame components `R_ijkl` from the structure equation `Ω = dω + ω∧ω`.
pub fn curvature_direct(m: &HermitianSurface, x: &[f64], choice: ConnectionChoice) -> Result<Tensor4> {
    m.ensure_interior(x, 3)?;
    let e = m.frame(x)?.e;
    Ok(frame_curvature(&curvature_matrices(m, x, choice), &e))
}

fn frame_curvature(om: &[[Matrix4<f64>; 4]; 4], e: &Matrix4<f64>) -> Tensor4 {
    let mut r = zero4();
    for i in 0..4 {
        for j in 0..4 {
            let c = Matrix4::from_fn(|a, b| om[a][b][(i, j)]);
            let f = e.transpose() * c * e;
            for k in 0..4 {
                for l in 0..4 {
                    r[i][j][k][l] = f[(k, l)];
                }
            }
        }
    }
    r
}

/// Lowered coordinate curvature `R(∂a,∂b,∂k,∂l)` from derivatives of the coefficients.
pub fn curvature_coordinates(m: &HermitianSurface, x: &[f64], choice: ConnectionChoice) -> Tensor4 {
    let gam = coefficients(m, x, choice);
    let dg = m.backend.gradient(|y: &[f64]| coefficients(m, y, choice), x);
    let g = m.metric(x);
    let mut up = zero4();
    for a in 0..4 {
        for b in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let mut s = dg[k][a][l][b] - dg[l][a][k][b];
                    for c in 0..4 {
                        s += gam[a][k][c] * gam[c][l][b] - gam[a][l][c] * gam[c][k][b];
                    }
                    up[a][b][k][l] = s;
                }
            }
        }
    }
    let mut low = zero4();
    for e in 0..4 {
        for b in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    low[e][b][k][l] = (0..4).map(|a| g[(e, a)] * up[a][b][k][l]).sum();
                }
            }
        }
    }
    low
}

/// Torsion `T^d_{ab} = Γ^d_{ab} − Γ^d_{ba}` in coordinates.
pub fn torsion_coordinates(m: &HermitianSurface, x: &[f64], choice: ConnectionChoice) -> Tensor3 {
    let mut out = zero3();
    if let ConnectionChoice::Gauduchon(t) = choice {
        let d = difference_tensor(m, x, t);
        for c in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    out[c][a][b] = d[c][a][b] - d[c][b][a];
                }
            }
        }
    }
    out
}

/// Substitution rows writing `θ¹..θ⁴` over the complex basis `(φ¹, φ², φ̄¹, φ̄²)`.
pub fn theta_in_complex_basis() -> Vec<Vec<Complex<f64>>> {
    let r = Complex::new(FRAC_1_SQRT_2, 0.0);
    let i = Complex::new(0.0, FRAC_1_SQRT_2);
    let z = Complex::new(0.0, 0.0);
    vec![vec![r, z, r, z], vec![-i, z, i, z], vec![z, r, z, r], vec![z, -i, z, i]]
}

/// Complex entry `½[(A^{2a−1}_{2b−1} + A^{2a}_{2b}) + i(A^{2a}_{2b−1} − A^{2a−1}_{2b})]`.
pub fn complex_entry<F: Fn(usize, usize) -> T, T>(a: usize, b: usize, real: F) -> (T, T, T, T) {
    (real(2 * a, 2 * b), real(2 * a + 1, 2 * b + 1), real(2 * a + 1, 2 * b), real(2 * a, 2 * b + 1))
}

/// `½[(p + q) + i(r − s)]` for complex-entry extraction.
fn assemble(p: f64, q: f64, r: f64, s: f64) -> Complex<f64> {
    Complex::new(0.5 * (p + q), 0.5 * (r - s))
}

/// Complex `2×2` matrix of a real `4×4` matrix commuting with `J₀`.
pub fn complex_matrix(m: &Matrix4<f64>) -> Matrix2<Complex<f64>> {
    Matrix2::from_fn(|a, b| {
        let (p, q, r, s) = complex_entry(a, b, |i, j| m[(i, j)]);
        assemble(p, q, r, s)
    })
}

/// `u(2)`-projection `½(A − J₀AJ₀)` of a real `4×4` matrix.
pub fn unitary_part(m: &Matrix4<f64>) -> Matrix4<f64> {
    let j0 = crate::manifold::standard_j();
    (m - j0 * m * j0) * 0.5
}

/// Real `4×4` form of a complex `2×2` matrix acting on `(u₁, u₂)`.
pub fn real_form(a: &Matrix2<Complex<f64>>) -> Matrix4<f64> {
    let mut r = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            let (p, q) = (a[(i, j)].re, a[(i, j)].im);
            r[(2 * i, 2 * j)] = p;
            r[(2 * i, 2 * j + 1)] = -q;
            r[(2 * i + 1, 2 * j)] = q;
            r[(2 * i + 1, 2 * j + 1)] = p;
        }
    }
    r
}

/// Maximum defect of each structural invariant.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Defects(pub Vec<(String, f64)>);

impl Defects {
    pub fn get(&self, name: &str) -> f64 {
        self.0.iter().find(|(n, _)| n == name).map_or(f64::NAN, |(_, v)| *v)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

fn max_abs4(f: impl Fn(usize, usize, usize, usize) -> f64) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    m = m.max(f(i, j, k, l).abs());
                }
            }
        }
    }
    m
}

/// Levi-Civita data at a point, against the canonical frame field.
#[derive(Clone, Debug)]
pub struct LeviCivitaData {
    pub point: Vec<f64>,
    pub frame: UnitaryFrame,
    pub christoffel: Tensor3,
    /// `ω^i_j(∂_k) = omega[k][(i, j)]`.
    pub omega: [Matrix4<f64>; 4],
    /// Frame components `R_ijkl`.
    pub curvature: Tensor4,
    /// `R(∂a, ∂b, ∂k, ∂l)` from the Christoffel route.
    pub curvature_coords: Tensor4,
}

pub fn levi_civita(m: &HermitianSurface, x: &[f64]) -> Result<LeviCivitaData> {
    m.ensure_interior(x, 3)?;
    m.validate_at(x)?;
    let frame = m.frame(x)?;
    let choice = ConnectionChoice::LeviCivita;
    Ok(LeviCivitaData {
        point: x.to_vec(),
        christoffel: m.christoffel(x),
        omega: connection_forms(m, x, choice),
        curvature: frame_curvature(&curvature_matrices(m, x, choice), &frame.e),
        curvature_coords: curvature_coordinates(m, x, choice),
        frame,
    })
}

impl LeviCivitaData {
    /// `ω^i_j(e_l) = result[l][(i, j)]`.
    pub fn omega_on_frame(&self) -> [Matrix4<f64>; 4] {
        omega_on_frame(&self.omega, &self.frame)
    }

    pub fn tensor(&self) -> CurvatureTensor {
        CurvatureTensor { which: CurvatureWhich::LeviCivita, r: self.curvature }
    }

    /// Antisymmetry of `ω`, curvature symmetries and the first Bianchi identity.
    pub fn defects(&self) -> Defects {
        let w = self.omega_on_frame();
        let skew = w.iter().map(|m| (m + m.transpose()).abs().max()).fold(0.0, f64::max);
        let r = &self.curvature;
        Defects(vec![
            ("omega_skew".into(), skew),
            ("first_pair".into(), max_abs4(|i, j, k, l| r[i][j][k][l] + r[j][i][k][l])),
            ("second_pair".into(), max_abs4(|i, j, k, l| r[i][j][k][l] + r[i][j][l][k])),
            ("pair_exchange".into(), max_abs4(|i, j, k, l| r[i][j][k][l] - r[k][l][i][j])),
            ("bianchi".into(), max_abs4(|i, j, k, l| r[i][j][k][l] + r[i][k][l][j] + r[i][l][j][k])),
            (
                "routes".into(),
                max_abs4(|i, j, k, l| r[i][j][k][l] - transform4(&self.curvature_coords, &self.frame.e)[i][j][k][l]),
            ),
        ])
    }
}

fn omega_on_frame(omega: &[Matrix4<f64>; 4], frame: &UnitaryFrame) -> [Matrix4<f64>; 4] {
    std::array::from_fn(|l| {
        let mut m = Matrix4::zeros();
        for k in 0..4 {
            m += omega[k] * frame.e[(k, l)];
        }
        m
    })
}

/// Coordinate covector of a 1-form given by its values on coordinate vectors.
pub type Covector = [Complex<f64>; 4];

/// Data of a canonical Hermitian connection at a point.
#[derive(Clone, Debug)]
pub struct HermitianConnectionData {
    pub t: f64,
    pub point: Vec<f64>,
    pub frame: UnitaryFrame,
    /// Real connection matrices, `ω^i_j(∂_k) = omega[k][(i, j)]`.
    pub omega: [Matrix4<f64>; 4],
    /// `ψ^a_b(∂_k) = psi[k][(a, b)]`.
    pub psi: [Matrix2<Complex<f64>>; 4],
    /// Frame torsion `T^i_{jk}`.
    pub torsion: Tensor3,
    /// `T^a = (T^{2a−1} + iT^{2a})/√2` over `(φ¹, φ², φ̄¹, φ̄²)`.
    pub torsion_complex: [Form; 2],
    /// Frame curvature `R_ijkl` of `D^t`.
    pub curvature: Tensor4,
    /// The Levi-Civita `m`-part `μ` (coordinate components); meaningful for every `t`.
    pub mu: Covector,
}

pub fn gauduchon(m: &HermitianSurface, x: &[f64], t: f64) -> Result<HermitianConnectionData> {
    m.ensure_interior(x, 3)?;
    m.validate_at(x)?;
    let frame = m.frame(x)?;
    let choice = ConnectionChoice::Gauduchon(t);
    let omega = connection_forms(m, x, choice);
    let psi = omega.map(|w| complex_matrix(&w));
    let tc = torsion_coordinates(m, x, choice);
    let mut torsion = zero3();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    for a in 0..4 {
                        for b in 0..4 {
                            s += frame.theta[(i, d)] * tc[d][a][b] * frame.e[(a, j)] * frame.e[(b, k)];
                        }
                    }
                }
                torsion[i][j][k] = s;
            }
        }
    }
    let torsion_complex = complex_torsion(&torsion);
    let curvature = frame_curvature(&curvature_matrices(m, x, choice), &frame.e);
    let lc = connection_forms(m, x, ConnectionChoice::LeviCivita);
    let mu = std::array::from_fn(|k| mu_of(&lc[k]));
    Ok(HermitianConnectionData { t, point: x.to_vec(), frame, omega, psi, torsion, torsion_complex, curvature, mu })
}

/// `T^a = (T^{2a−1} + iT^{2a})/√2` over `(φ¹, φ², φ̄¹, φ̄²)` from frame torsion `T^i_{jk}`.
pub fn complex_torsion(torsion: &Tensor3) -> [Form; 2] {
    let real: Vec<Form> = (0..4)
        .map(|i| {
            ComplexForm::from_components(4, 2, |jk| Complex::new(torsion[i][jk[0]][jk[1]], 0.0))
                .change_basis(&theta_in_complex_basis())
        })
        .collect();
    std::array::from_fn(|a| (real[2 * a].clone() + real[2 * a + 1].times_i()).scale_real(FRAC_1_SQRT_2))
}

/// Frame torsion in the rotated frame `ê_j = Σ_i e_i m_ij`, `m` orthogonal.
pub fn rotate_torsion(torsion: &Tensor3, m: &Matrix4<f64>) -> Tensor3 {
    let mut out = zero3();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        for c in 0..4 {
                            s += m[(a, i)] * torsion[a][b][c] * m[(b, j)] * m[(c, k)];
                        }
                    }
                }
                out[i][j][k] = s;
            }
        }
    }
    out
}

/// `μ = ½[(ω^2_4 − ω^1_3) − i(ω^2_3 + ω^1_4)]` from a real connection matrix.
pub fn mu_of(w: &Matrix4<f64>) -> Complex<f64> {
    Complex::new(0.5 * (w[(1, 3)] - w[(0, 2)]), -0.5 * (w[(1, 2)] + w[(0, 3)]))
}

impl HermitianConnectionData {
    pub fn tensor(&self) -> CurvatureTensor {
        CurvatureTensor { which: CurvatureWhich::Gauduchon(self.t), r: self.curvature }
    }

    /// `ψ^a_b` as a coordinate covector.
    pub fn psi_covector(&self, a: usize, b: usize) -> Covector {
        std::array::from_fn(|k| self.psi[k][(a, b)])
    }

    /// `Ψ^a_b` as a 2-form over `(φ¹, φ², φ̄¹, φ̄²)`.
    pub fn curvature_complex(&self, a: usize, b: usize) -> Form {
        curvature_complex(&self.curvature, a, b)
    }

    /// Real connection matrix commutes with `J₀` and is skew; returns the worst defect.
    pub fn skew_hermitian_defect(&self) -> f64 {
        let j0 = crate::manifold::standard_j();
        omega_on_frame(&self.omega, &self.frame)
            .iter()
            .map(|w| (w + w.transpose()).abs().max().max((w * j0 - j0 * w).abs().max()))
            .fold(0.0, f64::max)
    }

    /// Norm of the `(1,1)`-part of the complex torsion.
    pub fn torsion_mixed_norm(&self) -> f64 {
        let pairing = [(0, 2), (1, 3)];
        self.torsion_complex
            .iter()
            .map(|f| f.bidegree_project(&pairing, 1, 1).expect("valid pairing").form.norm())
            .fold(0.0, f64::max)
    }
}

/// `Ψ^a_b = ½[(Ω^{2a−1}_{2b−1} + Ω^{2a}_{2b}) + i(Ω^{2a}_{2b−1} − Ω^{2a−1}_{2b})]` over the complex basis.
pub fn curvature_complex(r: &Tensor4, a: usize, b: usize) -> Form {
    let omega = |i: usize, j: usize| ComplexForm::from_components(4, 2, |kl| Complex::new(r[i][j][kl[0]][kl[1]], 0.0));
    let (p, q, s, u) = complex_entry(a, b, omega);
    ((p + q) + (s - u).times_i()).scale_real(0.5).change_basis(&theta_in_complex_basis())
}

/// Residual of `dφ^a + ψ^a_b ∧ φ^b = T^a`, computed by differentiating the coframe field.
pub fn structure_equation_defect(m: &HermitianSurface, data: &HermitianConnectionData) -> f64 {
    let x = &data.point;
    let coframe = |y: &[f64], a: usize| -> Form {
        let e = m.frame_matrix(y);
        let th = e.try_inverse().expect("frame is invertible");
        ComplexForm::from_components(4, 1, |k| Complex::new(th[(2 * a, k[0])], th[(2 * a + 1, k[0])]) * FRAC_1_SQRT_2)
    };
    let to_frame = crate::manifold::real_rows(&data.frame.e);
    let mut worst: f64 = 0.0;
    for a in 0..2 {
        let dphi = m.backend.exterior_derivative(|y| coframe(y, a), x);
        let mut lhs = dphi;
        for b in 0..2 {
            let psi = ComplexForm::from_components(4, 1, |k| data.psi[k[0]][(a, b)]);
            lhs = lhs + psi.w(&coframe(x, b));
        }
        let in_complex = lhs.change_basis(&to_frame).change_basis(&theta_in_complex_basis());
        worst = worst.max((in_complex - data.torsion_complex[a].clone()).max_abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{builtin, BuiltinName};

    #[test]
    fn flat_connection_vanishes() {
        let s = builtin(BuiltinName::FlatC2, &[]).unwrap();
        let lc = levi_civita(&s, &[0.1, 0.2, -0.3, 0.0]).unwrap();
        assert!(lc.christoffel.iter().flatten().flatten().all(|v| v.abs() < 1e-12));
        assert!(lc.curvature.iter().flatten().flatten().flatten().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn symmetries_on_builtins() {
        for name in BuiltinName::ALL {
            let s = builtin(name, &[]).unwrap();
            for p in s.sample_points(5, 21) {
                let d = levi_civita(&s, &p).unwrap().defects();
                assert!(d.get("omega_skew") < 1e-8, "{name:?} {d:?}");
                for key in ["first_pair", "second_pair", "pair_exchange", "bianchi", "routes"] {
                    assert!(d.get(key) < 1e-6, "{name:?} {key} {d:?}");
                }
            }
        }
    }

    #[test]
    fn family_is_affine_in_t() {
        let s = builtin(BuiltinName::Hopf, &[]).unwrap();
        let x = [1.0, 0.1, 0.2, -0.1];
        let c = |t| coefficients(&s, &x, ConnectionChoice::Gauduchon(t));
        let (a, b, h) = (c(0.0), c(1.0), c(0.5));
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert!((h[i][j][k] - 0.5 * (a[i][j][k] + b[i][j][k])).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn hermitian_invariants() {
        let s = builtin(BuiltinName::Hopf, &[]).unwrap();
        let x = [1.1, -0.2, 0.1, 0.3];
        for t in [-1.0, 0.0, 0.5, 1.0] {
            let d = gauduchon(&s, &x, t).unwrap();
            assert!(d.skew_hermitian_defect() < 1e-8, "t={t}");
            assert!(structure_equation_defect(&s, &d) < 1e-7, "t={t}");
        }
        let ch = gauduchon(&s, &x, 1.0).unwrap();
        assert!(ch.torsion_mixed_norm() < 1e-7);
        assert!(ch.torsion_complex[0].norm() + ch.torsion_complex[1].norm() > 0.1);
        let bi = gauduchon(&s, &x, -1.0).unwrap();
        // Bismut torsion is totally skew
        let skew = (0..4)
            .flat_map(|i| (0..4).flat_map(move |j| (0..4).map(move |k| (i, j, k))))
            .map(|(i, j, k)| (bi.torsion[i][j][k] + bi.torsion[j][i][k]).abs())
            .fold(0.0, f64::max);
        assert!(skew < 1e-9);
    }

    #[test]
    fn lichnerowicz_is_unitary_projection() {
        let s = builtin(BuiltinName::Hopf, &[]).unwrap();
        let x = [0.9, 0.3, -0.1, 0.2];
        let lc = connection_forms(&s, &x, ConnectionChoice::LeviCivita);
        let l = connection_forms(&s, &x, ConnectionChoice::LICHNEROWICZ);
        for k in 0..4 {
            assert!((unitary_part(&lc[k]) - l[k]).abs().max() < 1e-8);
        }
    }

    #[test]
    fn kahler_family_collapses() {
        let s = builtin(BuiltinName::Cp2Fs, &[]).unwrap();
        let x = [0.3, -0.2, 0.1, 0.4];
        let lc = coefficients(&s, &x, ConnectionChoice::LeviCivita);
        for t in [-1.0, 0.0, 1.0] {
            let c = coefficients(&s, &x, ConnectionChoice::Gauduchon(t));
            let d = (0..64).map(|n| (c[n / 16][n / 4 % 4][n % 4] - lc[n / 16][n / 4 % 4][n % 4]).abs()).fold(0.0, f64::max);
            assert!(d < 1e-7);
            let data = gauduchon(&s, &x, t).unwrap();
            assert!(data.torsion.iter().flatten().flatten().all(|v| v.abs() < 1e-7));
        }
    }

    #[test]
    fn real_and_complex_forms_agree() {
        let a = Matrix2::new(Complex::new(0.3, 0.1), Complex::new(-0.2, 0.5), Complex::new(0.7, 0.0), Complex::new(0.0, -0.4));
        let r = real_form(&a);
        assert!((complex_matrix(&r) - a).norm() < 1e-15);
        assert!((unitary_part(&r) - r).norm() < 1e-15);
    }
}
