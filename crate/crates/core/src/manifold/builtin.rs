//! Model geometries: flat space, the Fubini–Study and Bergman-ball metrics, and the Hopf metric.

use super::{standard_j, ChartSpec, HermitianSurface, MatrixField};
use crate::error::{Error, Result};
use nalgebra::Matrix4;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinName {
    FlatC2,
    Cp2Fs,
    Ch2,
    Hopf,
}

impl BuiltinName {
    pub const ALL: [BuiltinName; 4] = [BuiltinName::FlatC2, BuiltinName::Cp2Fs, BuiltinName::Ch2, BuiltinName::Hopf];

    pub fn as_str(self) -> &'static str {
        match self {
            BuiltinName::FlatC2 => "flat_c2",
            BuiltinName::Cp2Fs => "cp2_fs",
            BuiltinName::Ch2 => "ch2",
            BuiltinName::Hopf => "hopf",
        }
    }

    pub fn is_kahler(self) -> bool {
        self != BuiltinName::Hopf
    }
}

impl FromStr for BuiltinName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BuiltinName::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::UnknownSurface(s.to_string()))
    }
}

/// Real metric of the Hermitian matrix `ĝ` with `ĝ₁₂ = p + iq`, using `z_a = x_{2a−1} + i x_{2a}`.
fn hermitian_to_real(g11: f64, g22: f64, p: f64, q: f64) -> Matrix4<f64> {
    Matrix4::new(
        g11, 0.0, p, q, //
        0.0, g11, -q, p, //
        p, -q, g22, 0.0, //
        q, p, 0.0, g22,
    )
}

fn curvature_param(name: BuiltinName, params: &[(String, f64)]) -> Result<f64> {
    let mut c = 2.0;
    for (k, v) in params {
        if k != "c" {
            return Err(Error::InvalidParameter(format!("{} takes no parameter `{k}`", name.as_str())));
        }
        c = *v;
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
    }
    Ok(c)
}

fn domain_lines(domain: &[(f64, f64); 4]) -> String {
    (0..4).map(|k| format!("domain x{} {} {}\n", k + 1, domain[k].0, domain[k].1)).collect()
}

/// Constant-curvature Kähler models: `sign = +1` for the projective plane, `−1` for the ball.
fn constant_hsc(name: BuiltinName, c: f64, sign: f64, domain: [(f64, f64); 4]) -> Result<HermitianSurface> {
    let k = 4.0 / c;
    let metric: MatrixField = Arc::new(move |x| {
        let (a, b) = (x[0] * x[0] + x[1] * x[1], x[2] * x[2] + x[3] * x[3]);
        let d = 1.0 + sign * (a + b);
        let w = k / (d * d);
        // ĝ = k[(1 ± r²)δ ∓ z̄_a z_b]/(1 ± r²)²
        let p = -sign * w * (x[0] * x[2] + x[1] * x[3]);
        let q = -sign * w * (x[0] * x[3] - x[1] * x[2]);
        hermitian_to_real(w * (1.0 + sign * b), w * (1.0 + sign * a), p, q)
    });
    let (op, nop) = if sign > 0.0 { ("+", "-") } else { ("-", "+") };
    let d = format!("(1 {op} x1^2 {op} x2^2 {op} x3^2 {op} x4^2)^2");
    let mut text = format!("# {} with holomorphic sectional curvature {}\ncoords x1 x2 x3 x4\n", name.as_str(), sign * c);
    text += &domain_lines(&domain);
    text += &format!("g 1 1 = {k}*(1 {op} x3^2 {op} x4^2)/{d}\n");
    text += &format!("g 2 2 = {k}*(1 {op} x3^2 {op} x4^2)/{d}\n");
    text += &format!("g 3 3 = {k}*(1 {op} x1^2 {op} x2^2)/{d}\n");
    text += &format!("g 4 4 = {k}*(1 {op} x1^2 {op} x2^2)/{d}\n");
    let re = format!("{k}*(x1*x3 + x2*x4)/{d}");
    let im = format!("{k}*(x1*x4 - x2*x3)/{d}");
    for (i, j, e, s) in [(1, 3, &re, nop), (2, 4, &re, nop), (1, 4, &im, nop), (2, 3, &im, op)] {
        let (lo, hi) = (i.min(j), i.max(j));
        let signed = if s == "-" { format!("0 - {e}") } else { e.clone() };
        text += &format!("g {lo} {hi} = {signed}\ng {hi} {lo} = {signed}\n");
    }
    text += "J standard\n";
    let chart = ChartSpec::standard(domain);
    let structure: MatrixField = Arc::new(|_| standard_j());
    HermitianSurface::new(name.as_str(), vec![("c".into(), c)], chart, metric, structure, text)
}

/// Built-in surface by name.
pub fn builtin(name: BuiltinName, params: &[(String, f64)]) -> Result<HermitianSurface> {
    let structure: MatrixField = Arc::new(|_| standard_j());
    match name {
        BuiltinName::FlatC2 => {
            if let Some((k, _)) = params.first() {
                return Err(Error::InvalidParameter(format!("flat_c2 takes no parameter `{k}`")));
            }
            let domain = [(-1.0, 1.0); 4];
            let text = format!("# flat C^2\ncoords x1 x2 x3 x4\n{}J standard\n", domain_lines(&domain));
            HermitianSurface::new(
                name.as_str(),
                Vec::new(),
                ChartSpec::standard(domain),
                Arc::new(|_| Matrix4::identity()),
                structure,
                text,
            )
        }
        BuiltinName::Cp2Fs => constant_hsc(name, curvature_param(name, params)?, 1.0, [(-1.0, 1.0); 4]),
        BuiltinName::Ch2 => constant_hsc(name, curvature_param(name, params)?, -1.0, [(-0.45, 0.45); 4]),
        BuiltinName::Hopf => {
            if let Some((k, _)) = params.first() {
                return Err(Error::InvalidParameter(format!("hopf takes no parameter `{k}`")));
            }
            // a box inside the annulus 0.5 < |z| < 2
            let domain = [(0.6, 1.4), (-0.4, 0.4), (-0.4, 0.4), (-0.4, 0.4)];
            let mut text = format!("# Hopf metric |dz|^2/|z|^2\ncoords x1 x2 x3 x4\n{}", domain_lines(&domain));
            for i in 1..=4 {
                text += &format!("g {i} {i} = 1/(x1^2 + x2^2 + x3^2 + x4^2)\n");
            }
            text += "J standard\n";
            HermitianSurface::new(
                name.as_str(),
                Vec::new(),
                ChartSpec::standard(domain),
                Arc::new(|x| Matrix4::identity() / (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3])),
                structure,
                text,
            )
        }
    }
}

/// Built-in by textual name with `k=v` parameters.
pub fn builtin_by_name(name: &str, params: &[(String, f64)]) -> Result<HermitianSurface> {
    builtin(name.parse()?, params)
}
