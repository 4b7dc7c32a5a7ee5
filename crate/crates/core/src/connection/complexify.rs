use super::transform4;
use crate::error::{Error, Result};
use crate::manifold::Tensor4;
use nalgebra::Matrix4;
use num_complex::Complex;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CurvatureWhich {
    LeviCivita,
    Gauduchon(f64),
}

/// One slot of a complexified component: `u_a` or its conjugate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Slot {
    /// Zero-based unitary index.
    pub index: usize,
    pub bar: bool,
}

impl Slot {
    pub const fn new(index: usize, bar: bool) -> Self {
        Slot { index, bar }
    }

    /// Frame components of `u_a = (e_{2a−1} − i e_{2a})/√2` or `ū_a`.
    pub fn vector(self) -> [Complex<f64>; 4] {
        let mut v = [Complex::new(0.0, 0.0); 4];
        v[2 * self.index] = Complex::new(FRAC_1_SQRT_2, 0.0);
        v[2 * self.index + 1] = Complex::new(0.0, if self.bar { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 });
        v
    }
}

/// Parses patterns such as `1̄21̄2` (combining macron after the digit) or `~12~12`.
pub fn parse_pattern(pattern: &str) -> Result<[Slot; 4]> {
    let bad = || Error::Pattern(pattern.to_string());
    let mut slots: Vec<Slot> = Vec::new();
    let mut pending_bar = false;
    for c in pattern.chars() {
        match c {
            '1' | '2' => {
                slots.push(Slot::new(if c == '1' { 0 } else { 1 }, pending_bar));
                pending_bar = false;
            }
            '~' if !pending_bar => pending_bar = true,
            '\u{0304}' | '\u{0305}' => match slots.last_mut() {
                Some(s) if !s.bar => s.bar = true,
                _ => return Err(bad()),
            },
            c if c.is_whitespace() => {}
            _ => return Err(bad()),
        }
    }
    if pending_bar || slots.len() != 4 {
        return Err(bad());
    }
    Ok([slots[0], slots[1], slots[2], slots[3]])
}

/// Real frame components `R_ijkl` of a curvature tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    pub which: CurvatureWhich,
    pub r: Tensor4,
}

impl CurvatureTensor {
    /// `R(v₁, v₂, v₃, v₄)` extended complex-multilinearly.
    pub fn component(&self, slots: [Slot; 4]) -> Complex<f64> {
        let v = slots.map(Slot::vector);
        let mut s = Complex::new(0.0, 0.0);
        for i in 0..4 {
            if v[0][i].norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..4 {
                if v[1][j].norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..4 {
                    if v[2][k].norm_sqr() == 0.0 {
                        continue;
                    }
                    for l in 0..4 {
                        s += v[0][i] * v[1][j] * v[2][k] * v[3][l] * self.r[i][j][k][l];
                    }
                }
            }
        }
        s
    }

    pub fn complexify(&self, pattern: &str) -> Result<Complex<f64>> {
        Ok(self.component(parse_pattern(pattern)?))
    }

    /// Components in the frame `ê_j = Σ_i e_i m_ij`.
    pub fn rotated(&self, m: &Matrix4<f64>) -> Self {
        CurvatureTensor { which: self.which, r: transform4(&self.r, m) }
    }

    /// Largest gap between a component and the conjugate of its flag-flipped partner.
    pub fn conjugation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for code in 0..256u32 {
            let slots: [Slot; 4] = std::array::from_fn(|n| {
                let bits = code >> (2 * n);
                Slot::new((bits & 1) as usize, bits & 2 != 0)
            });
            let flipped = slots.map(|s| Slot::new(s.index, !s.bar));
            worst = worst.max((self.component(slots) - self.component(flipped).conj()).norm());
        }
        worst
    }
}
