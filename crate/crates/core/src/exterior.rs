//! Complex exterior algebra over a finite ordered coframe basis.
//!
//! Monomials are stored as bitmasks of strictly increasing basis indices,
//! with the permutation sign folded into the coefficient.

use crate::error::{Error, Result};
use crate::scalar::Real;
use num_complex::Complex;
use num_traits::{Float, One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Largest supported basis dimension.
pub const MAX_DIM: usize = 16;

/// Homogeneous complex differential form at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexForm<T: Real> {
    dim: usize,
    degree: usize,
    terms: BTreeMap<u32, Complex<T>>,
}

fn mask_of(indices: &[usize]) -> Option<(u32, i32)> {
    // returns the canonical mask and the sign of the sorting permutation
    let mut idx = indices.to_vec();
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in 0..idx.len() - 1 - i {
            if idx[j] > idx[j + 1] {
                idx.swap(j, j + 1);
                sign = -sign;
            } else if idx[j] == idx[j + 1] {
                return None;
            }
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((idx.iter().fold(0u32, |m, &i| m | (1 << i)), sign))
}

/// Sign of `e^A ∧ e^B` relative to the sorted monomial of `A | B`.
fn merge_sign(a: u32, b: u32) -> i32 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if j >= 31 { 0 } else { a & !((1u32 << (j + 1)) - 1) };
        swaps += above.count_ones();
    }
    if swaps.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn indices_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

fn negligible<T: Real>(c: &Complex<T>) -> bool {
    T::negligible_sq(c.norm_sqr())
}

fn from_i32<T: Real>(s: i32) -> Complex<T> {
    if s >= 0 {
        Complex::one()
    } else {
        -Complex::<T>::one()
    }
}

impl<T: Real> ComplexForm<T> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM, "basis dimension {dim} exceeds {MAX_DIM}");
        ComplexForm {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// Constant 0-form.
    pub fn scalar(dim: usize, c: Complex<T>) -> Self {
        let mut f = Self::zero(dim, 0);
        f.insert(0, c);
        f
    }

    /// The basis 1-form `ε^i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        Self::monomial(dim, &[i], Complex::one())
    }

    /// `c · ε^{i_1} ∧ … ∧ ε^{i_k}` for indices in any order.
    pub fn monomial(dim: usize, indices: &[usize], c: Complex<T>) -> Self {
        assert!(indices.iter().all(|&i| i < dim), "index out of basis range");
        let mut f = Self::zero(dim, indices.len());
        if let Some((mask, sign)) = mask_of(indices) {
            f.insert(mask, c * from_i32::<T>(sign));
        }
        f
    }

    /// Builds a form from its values on increasing index tuples.
    pub fn from_components<F>(dim: usize, degree: usize, mut value: F) -> Self
    where
        F: FnMut(&[usize]) -> Complex<T>,
    {
        let mut f = Self::zero(dim, degree);
        for mask in 0u32..(1u32 << dim) {
            if mask.count_ones() as usize == degree {
                let idx = indices_of(mask);
                f.insert(mask, value(&idx));
            }
        }
        f
    }

    fn insert(&mut self, mask: u32, c: Complex<T>) {
        let entry = self.terms.entry(mask).or_insert_with(Complex::zero);
        *entry = *entry + c;
        if negligible(entry) {
            self.terms.remove(&mask);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial with the given indices (any order).
    pub fn coefficient(&self, indices: &[usize]) -> Complex<T> {
        match mask_of(indices) {
            Some((mask, sign)) => {
                self.terms.get(&mask).copied().unwrap_or_else(Complex::zero) * from_i32::<T>(sign)
            }
            None => Complex::zero(),
        }
    }

    /// Terms as (increasing index tuple, coefficient), lexicographically sorted.
    pub fn components(&self) -> Vec<(Vec<usize>, Complex<T>)> {
        let mut out: Vec<_> = self.terms.iter().map(|(&m, &c)| (indices_of(m), c)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        let mut f = Self::zero(self.dim, self.degree);
        for (&m, &v) in &self.terms {
            f.insert(m, v * c);
        }
        f
    }

    pub fn scale_real(&self, r: T) -> Self {
        self.scale(Complex::new(r, T::zero()))
    }

    /// Multiplication by `i`.
    pub fn times_i(&self) -> Self {
        self.scale(Complex::i())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch);
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        let degree = if self.is_zero() { other.degree } else { self.degree };
        let mut f = Self::zero(self.dim, degree);
        for (&m, &v) in self.terms.iter().chain(other.terms.iter()) {
            f.insert(m, v);
        }
        Ok(f)
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch);
        }
        let mut f = Self::zero(self.dim, self.degree + other.degree);
        for (&ma, &ca) in &self.terms {
            for (&mb, &cb) in &other.terms {
                if ma & mb != 0 {
                    continue;
                }
                f.insert(ma | mb, ca * cb * from_i32::<T>(merge_sign(ma, mb)));
            }
        }
        Ok(f)
    }

    /// Wedge that panics on dimension mismatch; for internal algebra on a shared basis.
    pub fn w(&self, other: &Self) -> Self {
        self.wedge(other).expect("basis dimension mismatch")
    }

    /// Hodge star against an orthonormal coframe in dimension 4.
    pub fn hodge_star_4(&self, orientation: i32) -> Result<Self> {
        if self.dim != 4 {
            return Err(Error::HodgeDimension);
        }
        let full = 0b1111u32;
        let mut f = Self::zero(4, 4 - self.degree);
        let o = from_i32::<T>(orientation.signum());
        for (&m, &c) in &self.terms {
            let comp = full & !m;
            f.insert(comp, c * o * from_i32::<T>(merge_sign(m, comp)));
        }
        Ok(f)
    }

    /// Splits a 2-form into self-dual and anti-self-dual parts.
    pub fn sd_asd_split(&self) -> Result<(Self, Self)> {
        if self.degree != 2 {
            return Err(Error::SplitDegree);
        }
        let star = self.hodge_star_4(1)?;
        let h = T::half();
        let plus = (self.clone() + star.clone()).scale_real(h);
        let minus = (self.clone() - star).scale_real(h);
        Ok((plus, minus))
    }

    /// Projection onto bidegree `(p, q)` with respect to a holomorphic/antiholomorphic pairing.
    pub fn bidegree_project(&self, pairing: &[(usize, usize)], p: usize, q: usize) -> Result<Projection<T>> {
        let (holo, anti) = pairing_masks(self.dim, pairing)?;
        if p + q != self.degree {
            return Ok(Projection {
                form: Self::zero(self.dim, p + q),
                degree_mismatch: true,
            });
        }
        let mut f = Self::zero(self.dim, self.degree);
        for (&m, &c) in &self.terms {
            if (m & holo).count_ones() as usize == p && (m & anti).count_ones() as usize == q {
                f.insert(m, c);
            }
        }
        Ok(Projection {
            form: f,
            degree_mismatch: false,
        })
    }

    /// Complex conjugate, where `conj(ε^i) = factor_i · ε^{target_i}`.
    pub fn conjugate(&self, map: &ConjugationMap<T>) -> Self {
        assert_eq!(map.images.len(), self.dim, "conjugation map dimension");
        let mut f = Self::zero(self.dim, self.degree);
        for (&m, &c) in &self.terms {
            let idx = indices_of(m);
            let mut coef = c.conj();
            let mut targets = Vec::with_capacity(idx.len());
            for i in idx {
                let (j, factor) = map.images[i];
                coef = coef * factor;
                targets.push(j);
            }
            if let Some((mask, sign)) = mask_of(&targets) {
                f.insert(mask, coef * from_i32::<T>(sign));
            }
        }
        f
    }

    /// Evaluates the form on `degree` vectors given by their components in the dual basis.
    pub fn evaluate(&self, vectors: &[Vec<Complex<T>>]) -> Complex<T> {
        assert_eq!(vectors.len(), self.degree, "need one vector per degree");
        let mut total = Complex::zero();
        for (&m, &c) in &self.terms {
            let idx = indices_of(m);
            let rows: Vec<Vec<Complex<T>>> = idx
                .iter()
                .map(|&i| vectors.iter().map(|v| v[i]).collect())
                .collect();
            total = total + c * determinant(&rows);
        }
        total
    }

    /// Rewrites the form in a new basis, given `ε^i = Σ_j m[i][j] η^j`.
    pub fn change_basis(&self, m: &[Vec<Complex<T>>]) -> Self {
        assert_eq!(m.len(), self.dim, "substitution needs one row per old basis element");
        let new_dim = m.first().map_or(0, |r| r.len());
        let images: Vec<Self> = m
            .iter()
            .map(|row| {
                let mut f = Self::zero(new_dim, 1);
                for (j, &c) in row.iter().enumerate() {
                    f.insert(1 << j, c);
                }
                f
            })
            .collect();
        let mut out = Self::zero(new_dim, self.degree);
        for (&mask, &c) in &self.terms {
            let mut acc = Self::scalar(new_dim, c);
            for i in indices_of(mask) {
                acc = acc.w(&images[i]);
                if acc.is_zero() {
                    break;
                }
            }
            if !acc.is_zero() {
                out = out + acc;
            }
        }
        out
    }

    /// Places the form into a larger basis, sending index `i` to `slots[i]`.
    pub fn embed(&self, new_dim: usize, slots: &[usize]) -> Self {
        let mut f = Self::zero(new_dim, self.degree);
        for (&m, &c) in &self.terms {
            let idx: Vec<usize> = indices_of(m).into_iter().map(|i| slots[i]).collect();
            if let Some((mask, sign)) = mask_of(&idx) {
                f.insert(mask, c * from_i32::<T>(sign));
            }
        }
        f
    }

    /// `sqrt(Σ |c|²)` over canonical monomials.
    pub fn norm(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_sqr().as_f64())
            // an empty float sum is -0.0
            .fold(0.0, |a, b| a + b)
            .sqrt()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.norm_sqr().as_f64().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && (self.clone() - other.clone()).max_abs() <= tol
    }

    /// Coefficient-wise map (the result is re-normalized).
    pub fn map_coefficients<U: Real, F: Fn(Complex<T>) -> Complex<U>>(&self, f: F) -> ComplexForm<U> {
        let mut out = ComplexForm::<U>::zero(self.dim, self.degree);
        for (&m, &c) in &self.terms {
            out.insert(m, f(c));
        }
        out
    }
}

impl ComplexForm<f64> {
    /// Linear combination of same-shape forms with real weights.
    pub fn combine(terms: &[(f64, &ComplexForm<f64>)]) -> ComplexForm<f64> {
        let first = terms[0].1;
        let mut acc: BTreeMap<u32, Complex<f64>> = BTreeMap::new();
        for (w, f) in terms {
            for (&m, &c) in &f.terms {
                *acc.entry(m).or_insert_with(Complex::zero) += c * *w;
            }
        }
        let mut f = ComplexForm::zero(first.dim, first.degree);
        for (m, c) in acc {
            f.insert(m, c);
        }
        f
    }

    /// Real part `(a + conj a)/2`.
    pub fn real_part(&self, map: &ConjugationMap<f64>) -> Self {
        (self.clone() + self.conjugate(map)).scale_real(0.5)
    }

    /// Imaginary part `(a - conj a)/(2i)`.
    pub fn imag_part(&self, map: &ConjugationMap<f64>) -> Self {
        (self.clone() - self.conjugate(map)).scale(Complex::new(0.0, -0.5))
    }
}

fn determinant<T: Real>(rows: &[Vec<Complex<T>>]) -> Complex<T> {
    let n = rows.len();
    match n {
        0 => Complex::one(),
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        _ => {
            let mut total = Complex::zero();
            for col in 0..n {
                if rows[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Complex<T>>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(j, _)| j != col).map(|(_, &v)| v).collect())
                    .collect();
                let term = rows[0][col] * determinant(&minor);
                total = if col % 2 == 0 { total + term } else { total - term };
            }
            total
        }
    }
}

fn pairing_masks(dim: usize, pairing: &[(usize, usize)]) -> Result<(u32, u32)> {
    let mut holo = 0u32;
    let mut anti = 0u32;
    for &(h, a) in pairing {
        if h >= dim || a >= dim || h == a {
            return Err(Error::InvalidPairing(format!("pair ({h}, {a}) out of range")));
        }
        holo |= 1 << h;
        anti |= 1 << a;
    }
    let all = if dim == 32 { u32::MAX } else { (1u32 << dim) - 1 };
    if holo & anti != 0 || holo | anti != all {
        return Err(Error::InvalidPairing("pairs must partition the basis".into()));
    }
    Ok((holo, anti))
}

/// Result of a bidegree projection.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection<T: Real> {
    pub form: ComplexForm<T>,
    /// Set when `p + q` differs from the degree; the form is then empty.
    pub degree_mismatch: bool,
}

/// How complex conjugation acts on basis 1-forms.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationMap<T: Real> {
    images: Vec<(usize, Complex<T>)>,
}

impl<T: Real> ConjugationMap<T> {
    /// Holomorphic index `h` and antiholomorphic index `a` are swapped.
    pub fn from_pairing(dim: usize, pairing: &[(usize, usize)]) -> Result<Self> {
        pairing_masks(dim, pairing)?;
        let mut images = vec![(0, Complex::one()); dim];
        for &(h, a) in pairing {
            images[h] = (a, Complex::one());
            images[a] = (h, Complex::one());
        }
        Ok(ConjugationMap { images })
    }

    /// Arbitrary images `conj(ε^i) = factor · ε^j`.
    pub fn from_images(images: Vec<(usize, Complex<T>)>) -> Self {
        ConjugationMap { images }
    }

    /// Basis of real 1-forms: conjugation fixes every element.
    pub fn real(dim: usize) -> Self {
        ConjugationMap {
            images: (0..dim).map(|i| (i, Complex::one())).collect(),
        }
    }
}

impl<T: Real> Add for ComplexForm<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(&rhs).expect("incompatible forms in sum")
    }
}

impl<T: Real> Sub for ComplexForm<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_add(&-rhs).expect("incompatible forms in difference")
    }
}

impl<T: Real> Neg for ComplexForm<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-Complex::<T>::one())
    }
}

impl<T: Real> Mul<Complex<T>> for ComplexForm<T> {
    type Output = Self;
    fn mul(self, c: Complex<T>) -> Self {
        self.scale(c)
    }
}

impl<T: Real> fmt::Display for ComplexForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .components()
            .into_iter()
            .map(|(idx, c)| {
                let names: Vec<String> = idx.iter().map(|i| format!("e{}", i + 1)).collect();
                if names.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c}) {}", names.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The six unit-norm 2-forms `α±^k` over an orthonormal coframe in dimension 4.
#[derive(Clone, Debug)]
pub struct SdAsdBasis<T: Real> {
    pub plus: [ComplexForm<T>; 3],
    pub minus: [ComplexForm<T>; 3],
}

impl<T: Real + Float> SdAsdBasis<T> {
    /// `α±¹ = (θ¹²±θ³⁴)/√2`, `α±² = (θ¹³±θ⁴²)/√2`, `α±³ = (θ¹⁴±θ²³)/√2`.
    pub fn standard() -> Self {
        let r = Complex::new(T::one() / (T::one() + T::one()).sqrt(), T::zero());
        let m = |a: usize, b: usize| ComplexForm::monomial(4, &[a, b], r);
        let pair = [([0, 1], [2, 3]), ([0, 2], [3, 1]), ([0, 3], [1, 2])];
        let plus = pair.map(|(x, y)| m(x[0], x[1]) + m(y[0], y[1]));
        let minus = pair.map(|(x, y)| m(x[0], x[1]) - m(y[0], y[1]));
        SdAsdBasis { plus, minus }
    }

    /// The basis in operator order `(α₊¹, α₊², α₊³, α₋¹, α₋², α₋³)`.
    pub fn ordered(&self) -> Vec<ComplexForm<T>> {
        self.plus.iter().chain(self.minus.iter()).cloned().collect()
    }
}

/// Hermitian inner product `Σ a_I conj(b_I)` of forms on an orthonormal coframe.
pub fn inner<T: Real>(a: &ComplexForm<T>, b: &ComplexForm<T>) -> Complex<T> {
    let mut total = Complex::zero();
    for (m, c) in &a.terms {
        if let Some(d) = b.terms.get(m) {
            total = total + *c * d.conj();
        }
    }
    total
}
