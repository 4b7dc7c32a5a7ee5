//! Exact invariant geometry of the flag manifold `SU(3)/T²`.
//!
//! Left-invariant forms are written over the fixed basis
//! `(w¹₂, w¹₃, w²₃, w̄¹₂, w̄¹₃, w̄²₃, w¹₁, w²₂)` of the complexified dual of
//! `su(3)`, with `w³₃ = −w¹₁ − w²₂`. Exterior derivatives come from
//! `dw = −w∧w` with Gaussian-rational coefficients, so every identity below
//! is checked exactly. Forms pulled back from the flag manifold are
//! returned over the six horizontal elements only.

use crate::error::{Error, Result};
use crate::exterior::ConjugationMap;
use crate::manifold::DiffBackend;
use crate::twistor::{critical_lambda_sq, LAMBDA_MIN};
use crate::connection::ConnectionChoice;
use crate::{builtin, BuiltinName, ExactForm, Form};
use nalgebra::{Matrix3, Matrix6};
use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

type C64 = Complex<f64>;
type Q = Rational64;
type CQ = Complex<Rational64>;

pub const W12: usize = 0;
pub const W13: usize = 1;
pub const W23: usize = 2;
pub const B12: usize = 3;
pub const B13: usize = 4;
pub const B23: usize = 5;
pub const H1: usize = 6;
pub const H2: usize = 7;

const NAMES: [&str; 8] = ["w12", "w13", "w23", "~w12", "~w13", "~w23", "w11", "w22"];

pub fn basis_name(i: usize) -> &'static str {
    NAMES[i]
}

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn cq(re: Q, im: Q) -> CQ {
    Complex::new(re, im)
}

fn one() -> CQ {
    cq(Q::one(), Q::zero())
}

fn imag() -> CQ {
    cq(Q::zero(), Q::one())
}

fn e(i: usize) -> ExactForm {
    ExactForm::basis(8, i)
}

/// Entry `w^l_m` (1-based) as a 1-form on `SU(3)`.
fn entry(l: usize, m: usize) -> ExactForm {
    match (l, m) {
        (1, 1) => e(H1),
        (2, 2) => e(H2),
        (3, 3) => -(e(H1) + e(H2)),
        (1, 2) => e(W12),
        (1, 3) => e(W13),
        (2, 3) => e(W23),
        (2, 1) => -e(B12),
        (3, 1) => -e(B13),
        (3, 2) => -e(B23),
        _ => unreachable!("index out of range"),
    }
}

/// `d(w^l_m) = −Σ_k w^l_k∧w^k_m`.
fn d_entry(l: usize, m: usize) -> ExactForm {
    (1..=3).fold(ExactForm::zero(8, 2), |acc, k| acc - entry(l, k).w(&entry(k, m)))
}

/// Exterior derivative of a basis 1-form.
pub fn structure_d(i: usize) -> ExactForm {
    match i {
        W12 => d_entry(1, 2),
        W13 => d_entry(1, 3),
        W23 => d_entry(2, 3),
        // w̄^l_m = −w^m_l
        B12 => -d_entry(2, 1),
        B13 => -d_entry(3, 1),
        B23 => -d_entry(3, 2),
        H1 => d_entry(1, 1),
        H2 => d_entry(2, 2),
        _ => panic!("basis index {i} out of range"),
    }
}

/// Exterior derivative of a left-invariant form, by the Leibniz rule.
pub fn d(f: &ExactForm) -> ExactForm {
    assert_eq!(f.dim(), 8, "left-invariant forms live on the eight-element basis");
    let mut out = ExactForm::zero(8, f.degree() + 1);
    for (idx, c) in f.components() {
        for j in 0..idx.len() {
            let prefix = idx[..j].iter().fold(ExactForm::scalar(8, c), |acc, &k| acc.w(&e(k)));
            let suffix = idx[j + 1..].iter().fold(ExactForm::scalar(8, one()), |acc, &k| acc.w(&e(k)));
            let term = prefix.w(&structure_d(idx[j])).w(&suffix);
            out = if j % 2 == 0 { out + term } else { out - term };
        }
    }
    out
}

/// Conjugation on the eight-element basis; the diagonal entries are imaginary.
pub fn conjugation8() -> ConjugationMap<Q> {
    ConjugationMap::from_images(
        (0..8)
            .map(|i| match i {
                0..=2 => (i + 3, one()),
                3..=5 => (i - 3, one()),
                _ => (i, -one()),
            })
            .collect(),
    )
}

/// Conjugation on the horizontal basis.
pub fn conjugation6() -> ConjugationMap<Q> {
    ConjugationMap::from_pairing(6, &PAIRS).expect("valid pairing")
}

const PAIRS: [(usize, usize); 3] = [(W12, B12), (W13, B13), (W23, B23)];

/// Restriction to the horizontal basis; fails if a diagonal entry survives.
pub fn horizontal(f: &ExactForm) -> Result<ExactForm> {
    let mut out = ExactForm::zero(6, f.degree());
    for (idx, c) in f.components() {
        if idx.iter().any(|&i| i >= H1) {
            return Err(Error::Invariant {
                check: format!("form is not basic: term {:?}", idx.iter().map(|&i| NAMES[i]).collect::<Vec<_>>()),
                point: Vec::new(),
            });
        }
        out = out + ExactForm::monomial(6, &idx, c);
    }
    Ok(out)
}

fn lift(f: &ExactForm) -> ExactForm {
    f.embed(8, &[0, 1, 2, 3, 4, 5])
}

/// Squared metric parameters `(λ₁², λ₂², λ₃²)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlagParams {
    pub sq: [Q; 3],
}

impl FlagParams {
    pub fn from_squares(sq: [Q; 3]) -> Result<Self> {
        let p = FlagParams { sq };
        p.validate()?;
        Ok(p)
    }

    /// The one-parameter family `(1, 1, λ)` given `λ²`.
    pub fn single_sq(lambda_sq: Q) -> Result<Self> {
        Self::from_squares([Q::one(), Q::one(), lambda_sq])
    }

    /// Rational approximation of `λ²` for floating inputs.
    pub fn from_lambdas(l: [f64; 3]) -> Result<Self> {
        let mut sq = [Q::zero(); 3];
        for (s, x) in sq.iter_mut().zip(l) {
            if !(x >= LAMBDA_MIN && x.is_finite()) {
                return Err(Error::InvalidParameter(format!("lambda {x} must be positive")));
            }
            *s = rational_approx(x * x, MAX_DENOM);
        }
        Self::from_squares(sq)
    }

    pub fn to_f64(&self) -> [f64; 3] {
        self.sq.map(Lossy::lossy)
    }

    fn validate(&self) -> Result<()> {
        if self.sq.iter().any(|s| !s.is_positive()) {
            return Err(Error::InvalidParameter("flag metric parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Denominator bound when reading floating parameters, keeping exact products in range.
const MAX_DENOM: i64 = 1_000_000;

/// Best rational approximation with denominator at most `max_denom`, by continued fractions.
fn rational_approx(x: f64, max_denom: i64) -> Q {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    loop {
        let a = r.floor();
        let (p2, q2) = (a as i64 * p1 + p0, a as i64 * q1 + q0);
        if q2 > max_denom {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a;
        if frac < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    Q::new(p1, q1)
}

/// `(1,0)` basis of `J_i` for `i = 1..8`; `J_{i+4} = −J_i` uses the conjugate basis.
pub fn flag_unitary_basis(i: usize) -> Result<[usize; 3]> {
    let base = match i {
        1 | 5 => [W12, B13, B23],
        2 | 6 => [W12, B13, W23],
        3 | 7 => [W12, W13, B23],
        4 | 8 => [W12, W13, W23],
        _ => return Err(Error::InvalidParameter(format!("structure index {i} (expected 1..8)"))),
    };
    Ok(if i > 4 { base.map(bar) } else { base })
}

fn bar(i: usize) -> usize {
    (i + 3) % 6
}

fn pairing(i: usize) -> Result<Vec<(usize, usize)>> {
    Ok(flag_unitary_basis(i)?.iter().map(|&s| (s, bar(s))).collect())
}

/// `K_i = i Σ λ_a² ξ_a∧ξ̄_a` over the horizontal basis.
pub fn flag_kahler(i: usize, p: FlagParams) -> Result<ExactForm> {
    p.validate()?;
    if i > 4 {
        return Err(Error::InvalidParameter(format!("structure index {i} (expected 1..4)")));
    }
    let xi = flag_unitary_basis(i)?;
    let mut k = ExactForm::zero(6, 2);
    for (&s, &l) in xi.iter().zip(&p.sq) {
        let t = ExactForm::basis(6, s).w(&ExactForm::basis(6, bar(s)));
        k = k + t.scale(imag() * cq(l, Q::zero()));
    }
    Ok(k)
}

/// `dK_i` from the structure equations.
pub fn flag_dk(i: usize, p: FlagParams) -> Result<ExactForm> {
    horizontal(&d(&lift(&flag_kahler(i, p)?)))
}

/// `i(w̄¹₂∧w¹₃∧w̄²₃ − w¹₂∧w̄¹₃∧w²₃)`.
pub fn flag_dk_shape() -> ExactForm {
    let m = |a: usize, b: usize, c: usize| ExactForm::monomial(6, &[a, b, c], one());
    (m(B12, W13, B23) - m(W12, B13, W23)).times_i()
}

/// Coefficient of [`flag_dk_shape`] in `dK_i`:
/// `λ₁²+λ₂²−λ₃²`, `λ₁²+λ₂²+λ₃²`, `λ₁²−λ₂²−λ₃²`, `λ₁²−λ₂²+λ₃²`.
pub fn dk_coefficient(i: usize, p: FlagParams) -> Result<Q> {
    let [a, b, c] = p.sq;
    match i {
        1 => Ok(a + b - c),
        2 => Ok(a + b + c),
        3 => Ok(a - b - c),
        4 => Ok(a - b + c),
        _ => Err(Error::InvalidParameter(format!("structure index {i} (expected 1..4)"))),
    }
}

/// The closed form `c_i(λ) · i(w̄¹₂w¹₃w̄²₃ − w¹₂w̄¹₃w²₃)`.
pub fn flag_dk_display(i: usize, p: FlagParams) -> Result<ExactForm> {
    p.validate()?;
    Ok(flag_dk_shape().scale(cq(dk_coefficient(i, p)?, Q::zero())))
}

/// `K_i∧dK_i`, assembled by wedge.
pub fn flag_balanced(i: usize, p: FlagParams) -> Result<ExactForm> {
    Ok(flag_kahler(i, p)?.w(&flag_dk(i, p)?))
}

/// The `(p, q)` part of a horizontal form for `J_i`.
pub fn flag_bidegree(f: &ExactForm, i: usize, p: usize, q: usize) -> Result<ExactForm> {
    Ok(f.bidegree_project(&pairing(i)?, p, q)?.form)
}

/// `i∂∂̄K_i = i Π^{2,2} d Π^{1,2} dK_i`, computed from the structure equations.
pub fn flag_ddbar_structural(i: usize, p: FlagParams) -> Result<ExactForm> {
    let dbar = flag_bidegree(&flag_dk(i, p)?, i, 1, 2)?;
    let dd = horizontal(&d(&lift(&dbar)))?;
    Ok(flag_bidegree(&dd, i, 2, 2)?.times_i())
}

/// Closed forms of `i∂∂̄K_i` for `i = 1, 3, 4`.
pub fn flag_ddbar(i: usize, p: FlagParams) -> Result<ExactForm> {
    p.validate()?;
    let [a, b, c] = p.sq;
    let pp = |x: usize, y: usize| ExactForm::basis(6, x).w(&ExactForm::basis(6, y));
    let (coef, shape) = match i {
        1 => (
            a + b - c,
            -pp(W12, B12).w(&pp(B13, W13)) + pp(B13, W13).w(&pp(B23, W23)) + pp(B23, W23).w(&pp(W12, B12)),
        ),
        3 => (
            b + c - a,
            pp(W12, B12).w(&pp(W13, B13)) - pp(W13, B13).w(&pp(B23, W23)) + pp(B23, W23).w(&pp(W12, B12)),
        ),
        4 => (
            a + c - b,
            pp(W12, B12).w(&pp(W13, B13)) + pp(W13, B13).w(&pp(W23, B23)) - pp(W23, B23).w(&pp(W12, B12)),
        ),
        _ => return Err(Error::NotApplicable(format!("no ∂∂̄ display for K_{i}"))),
    };
    // (√−1)² = −1
    Ok(shape.scale(cq(-coef, Q::zero())))
}

/// `ρ = i³ w¹₂∧w̄¹₃∧w²₃`.
pub fn rho() -> ExactForm {
    ExactForm::monomial(6, &[W12, B13, W23], cq(Q::zero(), q(-1)))
}

/// Residuals `‖dK₂ − 3Re ρ‖` and `‖d Im ρ + 2K₂∧K₂‖` at `λ₁ = λ₂ = λ₃ = 1/√2`.
pub fn nearly_kahler_check() -> (f64, f64) {
    let half = Q::new(1, 2);
    let p = FlagParams::from_squares([half; 3]).expect("positive");
    let k = flag_kahler(2, p).expect("valid");
    let dk = flag_dk(2, p).expect("basic");
    let conj = conjugation6();
    let r = rho();
    let rb = r.conjugate(&conj);
    let re = (r.clone() + rb.clone()).scale(cq(half, Q::zero()));
    let im = (r - rb).scale(cq(Q::zero(), -half));
    let d_im = horizontal(&d(&lift(&im))).expect("basic");
    let r1 = dk - re.scale(cq(q(3), Q::zero()));
    let r2 = d_im + k.w(&k).scale(cq(q(2), Q::zero()));
    (to_float(&r1).norm(), to_float(&r2).norm())
}

pub fn to_float(f: &ExactForm) -> Form {
    f.map_coefficients(|c| C64::new(c.re.lossy(), c.im.lossy()))
}

trait Lossy {
    fn lossy(self) -> f64;
}

impl Lossy for Q {
    fn lossy(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Terms of `dξ` violating `(1,0)`-closure for the eight invariant structures.
///
/// Diagonal entries only appear as `w^l_l∧ξ`, which lie in the ideal, so they are dropped.
pub fn nijenhuis_obstruction(i: usize) -> Result<ExactForm> {
    let xi = flag_unitary_basis(i)?;
    let pair = pairing(i)?;
    let mut out = ExactForm::zero(6, 2);
    for &s in &xi {
        let mut horiz = ExactForm::zero(6, 2);
        for (idx, c) in structure_d(s).components() {
            if idx.iter().all(|&k| k < H1) {
                horiz = horiz + ExactForm::monomial(6, &idx, c);
            } else if !idx.contains(&s) {
                return Err(Error::Invariant { check: "unexpected vertical term".into(), point: Vec::new() });
            }
        }
        out = out + horiz.bidegree_project(&pair, 0, 2)?.form;
    }
    Ok(out)
}

/// Real endomorphism of `J_i` on the horizontal space, in coordinates `(Re w, Im w)`.
pub fn flag_acs(i: usize) -> Result<Matrix6<f64>> {
    let xi = flag_unitary_basis(i)?;
    let order = [xi[0], xi[1], xi[2], bar(xi[0]), bar(xi[1]), bar(xi[2])];
    // w_k = a_k + i b_k, w̄_k = a_k − i b_k
    let b = Matrix6::from_fn(|r, k| {
        let s = order[r];
        let (slot, sign) = if s < 3 { (s, 1.0) } else { (s - 3, -1.0) };
        if k == slot {
            C64::new(1.0, 0.0)
        } else if k == slot + 3 {
            C64::new(0.0, sign)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let binv = b.try_inverse().ok_or(Error::NonUnitary)?;
    let dm = Matrix6::from_diagonal(&nalgebra::Vector6::from_fn(|r, _| C64::new(0.0, if r < 3 { 1.0 } else { -1.0 })));
    let j = binv * dm * b;
    if j.iter().any(|z| z.im.abs() > 1e-14) {
        return Err(Error::Invariant { check: "complex structure not real".into(), point: Vec::new() });
    }
    Ok(j.map(|z| z.re))
}

/// Indices `i ∈ 1..8` whose structure has no Nijenhuis obstruction.
pub fn integrable_structures() -> Vec<usize> {
    (1..=8).filter(|&i| nijenhuis_obstruction(i).map(|f| f.is_zero()).unwrap_or(false)).collect()
}

/// The exact `λ²` with `dK_i(1,1,λ) = 0`, if any.
pub fn flag_critical_lambda_sq(i: usize) -> Result<Option<Q>> {
    let c0 = dk_coefficient(i, FlagParams { sq: [Q::one(), Q::one(), Q::zero()] })?;
    let c1 = dk_coefficient(i, FlagParams { sq: [Q::one(), Q::one(), Q::one()] })?;
    let slope = c1 - c0;
    if slope.is_zero() {
        return Ok(None);
    }
    let u = -c0 / slope;
    Ok(u.is_positive().then_some(u))
}

/// Critical `λ²` of `K₁` from the twistor pipeline on `cp2_fs(2)` and from the flag algebra.
pub fn normalization_crosscheck() -> Result<(f64, Q)> {
    normalization_crosscheck_with(2.0)
}

/// As [`normalization_crosscheck`] with curvature parameter `c`.
pub fn normalization_crosscheck_with(c: f64) -> Result<(f64, Q)> {
    let m = builtin(BuiltinName::Cp2Fs, &[("c".into(), c)])?;
    let twistor = critical_lambda_sq(&m, ConnectionChoice::LICHNEROWICZ, 1, 5, 1, 1e-6)?
        .ok_or_else(|| Error::Invariant { check: "no symplectic value for K₁".into(), point: Vec::new() })?;
    let flag = flag_critical_lambda_sq(1)?
        .ok_or_else(|| Error::Invariant { check: "no flag critical value".into(), point: Vec::new() })?;
    Ok((twistor, flag))
}

/// A special unitary matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SU3Element(pub Matrix3<C64>);

/// Fixed ordering of the eight `su(3)` directions:
/// `E₁₂−E₂₁, i(E₁₂+E₂₁), E₁₃−E₃₁, i(E₁₃+E₃₁), E₂₃−E₃₂, i(E₂₃+E₃₂), i(E₁₁−E₂₂), i(E₂₂−E₃₃)`.
pub fn su3_basis() -> [Matrix3<C64>; 8] {
    let unit = |r: usize, c: usize| Matrix3::from_fn(|a, b| if (a, b) == (r, c) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let i = C64::new(0.0, 1.0);
    [
        unit(0, 1) - unit(1, 0),
        (unit(0, 1) + unit(1, 0)) * i,
        unit(0, 2) - unit(2, 0),
        (unit(0, 2) + unit(2, 0)) * i,
        unit(1, 2) - unit(2, 1),
        (unit(1, 2) + unit(2, 1)) * i,
        (unit(0, 0) - unit(1, 1)) * i,
        (unit(1, 1) - unit(2, 2)) * i,
    ]
}

impl SU3Element {
    pub fn new(g: Matrix3<C64>) -> Result<Self> {
        let unitary = (g.adjoint() * g - Matrix3::identity()).norm();
        let det = (g.determinant() - C64::new(1.0, 0.0)).norm();
        if unitary > 1e-12 || det > 1e-12 {
            return Err(Error::NonUnitary);
        }
        Ok(SU3Element(g))
    }

    pub fn identity() -> Self {
        SU3Element(Matrix3::identity())
    }

    /// `exp(X)` for `X ∈ su(3)` with seeded coefficients in `[−1, 1]`.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = su3_basis().iter().fold(Matrix3::zeros(), |acc, t| acc + t * C64::new(rng.gen_range(-1.0..1.0), 0.0));
        SU3Element::new(x.exp()).expect("exponential of su(3)")
    }

    /// `g·exp(Σ xₐTₐ)`.
    pub fn translate(&self, x: &[f64]) -> Matrix3<C64> {
        let t = su3_basis();
        let v = (0..8).fold(Matrix3::zeros(), |acc, a| acc + t[a] * C64::new(x[a], 0.0));
        self.0 * v.exp()
    }
}

/// `w(V) = g⁻¹V` for a tangent vector `V` at `g`.
pub fn maurer_cartan(g: &SU3Element, v: &Matrix3<C64>) -> Matrix3<C64> {
    g.0.adjoint() * v
}

/// Maurer–Cartan values along the eight basis directions, by differencing `g·exp(tTₐ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaurerCartanEval {
    pub values: [Matrix3<C64>; 8],
}

impl MaurerCartanEval {
    /// Largest deviation from skew-Hermitian and traceless.
    pub fn su3_defect(&self) -> f64 {
        self.values.iter().map(|w| (w + w.adjoint()).norm().max(w.trace().norm())).fold(0.0, f64::max)
    }
}

fn backend() -> DiffBackend {
    DiffBackend::default()
}

/// `w` in the exponential chart `x ↦ g·exp(Σ xₐTₐ)` at `x`, one matrix per coordinate.
fn mc_chart(g: &SU3Element, x: &[f64]) -> Vec<Matrix3<C64>> {
    let h = g.translate(x);
    backend().gradient(|p: &[f64]| g.translate(p), x).into_iter().map(|dv| h.adjoint() * dv).collect()
}

pub fn maurer_cartan_eval(g: &SU3Element) -> MaurerCartanEval {
    let w = mc_chart(g, &[0.0; 8]);
    MaurerCartanEval { values: std::array::from_fn(|a| w[a]) }
}

/// `|(dw + w∧w)(X, Y)|` for a seeded random bivector, by differencing.
pub fn structure_equation_residual(g: &SU3Element, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xv: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let yv: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let origin = [0.0; 8];
    let w = mc_chart(g, &origin);
    let dw: Vec<Vec<Matrix3<C64>>> = backend().gradient(|p: &[f64]| mc_chart(g, p), &origin);
    let mut total = Matrix3::<C64>::zeros();
    for a in 0..8 {
        for b in 0..8 {
            // dw(∂a,∂b) = ∂a w_b − ∂b w_a
            let val = dw[a][b] - dw[b][a] + w[a] * w[b] - w[b] * w[a];
            total += val * C64::new(0.5 * (xv[a] * yv[b] - xv[b] * yv[a]), 0.0);
        }
    }
    total.norm()
}

/// Chart components of a basis 1-form, read from the Maurer–Cartan matrices.
fn basis_row(w: &[Matrix3<C64>], i: usize) -> Vec<C64> {
    let pick = |l: usize, m: usize| w.iter().map(|x| x[(l, m)]).collect::<Vec<_>>();
    match i {
        W12 => pick(0, 1),
        W13 => pick(0, 2),
        W23 => pick(1, 2),
        B12 => pick(0, 1).into_iter().map(|c| c.conj()).collect(),
        B13 => pick(0, 2).into_iter().map(|c| c.conj()).collect(),
        B23 => pick(1, 2).into_iter().map(|c| c.conj()).collect(),
        H1 => pick(0, 0),
        H2 => pick(1, 1),
        _ => unreachable!("basis index"),
    }
}

fn to_chart(f: &Form, g: &SU3Element, x: &[f64]) -> Form {
    let w = mc_chart(g, x);
    let rows: Vec<Vec<C64>> = (0..8).map(|i| basis_row(&w, i)).collect();
    f.change_basis(&rows)
}

/// `‖d_structural f − d_FD f‖` in the exponential chart at `g`.
pub fn structural_d_residual(f: &ExactForm, g: &SU3Element) -> f64 {
    let f8 = to_float(&if f.dim() == 6 { lift(f) } else { f.clone() });
    let structural = to_chart(&to_float(&d(&if f.dim() == 6 { lift(f) } else { f.clone() })), g, &[0.0; 8]);
    let fd = backend().exterior_derivative(|p: &[f64]| to_chart(&f8, g, p), &[0.0; 8]);
    (structural - fd).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: i64, b: i64, c: i64) -> FlagParams {
        FlagParams::from_squares([q(a), q(b), q(c)]).unwrap()
    }

    #[test]
    fn structure_equations_match_displays() {
        // dw¹₂ = −(w¹₁−w²₂)∧w¹₂ − w̄²₃∧w¹₃
        let d12 = -(e(H1) - e(H2)).w(&e(W12)) - e(B23).w(&e(W13));
        assert_eq!(structure_d(W12), d12);
        // dw¹₃ = −(w¹₁−w³₃)∧w¹₃ + w²₃∧w¹₂
        let w33 = -(e(H1) + e(H2));
        assert_eq!(structure_d(W13), -(e(H1) - w33.clone()).w(&e(W13)) + e(W23).w(&e(W12)));
        // dw²₃ = −(w²₂−w³₃)∧w²₃ + w̄¹₂∧w¹₃
        assert_eq!(structure_d(W23), -(e(H2) - w33).w(&e(W23)) + e(B12).w(&e(W13)));
    }

    #[test]
    fn d_squares_to_zero() {
        for i in 0..8 {
            assert!(d(&structure_d(i)).is_zero(), "{}", NAMES[i]);
        }
        let k = lift(&flag_kahler(3, p(2, 5, 7)).unwrap());
        assert!(d(&d(&k)).is_zero());
    }

    #[test]
    fn conjugation_commutes_with_d() {
        let c = conjugation8();
        for i in 0..8 {
            assert_eq!(structure_d(i).conjugate(&c), structure_d((0..8).find(|&j| e(i).conjugate(&c) == e(j) || e(i).conjugate(&c) == -e(j)).unwrap()).scale(if i >= H1 { -one() } else { one() }));
        }
    }

    #[test]
    fn dk_matches_displays_exactly() {
        for i in 1..=4 {
            for params in [p(1, 1, 2), p(1, 1, 1), p(1, 2, 3), p(3, 1, 5), FlagParams::single_sq(Q::new(7, 3)).unwrap()] {
                assert_eq!(flag_dk(i, params).unwrap(), flag_dk_display(i, params).unwrap(), "i={i}");
            }
        }
    }

    #[test]
    fn zero_classification() {
        assert!(flag_dk(1, p(1, 1, 2)).unwrap().is_zero());
        assert!(!flag_dk(1, p(1, 1, 1)).unwrap().is_zero());
        assert!(flag_dk(1, p(3, 4, 7)).unwrap().is_zero());
        assert!(flag_dk(3, p(5, 2, 3)).unwrap().is_zero());
        assert!(flag_dk(4, p(2, 5, 3)).unwrap().is_zero());
        assert!(!flag_dk(2, p(1, 1, 1)).unwrap().is_zero());
        assert_eq!(flag_critical_lambda_sq(1).unwrap(), Some(q(2)));
        assert_eq!(flag_critical_lambda_sq(2).unwrap(), None);
        assert_eq!(flag_critical_lambda_sq(3).unwrap(), None);
    }

    #[test]
    fn second_structure_is_one_two_symplectic() {
        for params in [p(1, 1, 1), p(1, 2, 3)] {
            let dk = flag_dk(2, params).unwrap();
            assert!(!dk.is_zero());
            assert!(flag_bidegree(&dk, 2, 1, 2).unwrap().is_zero());
            assert!(flag_bidegree(&dk, 2, 2, 1).unwrap().is_zero());
        }
    }

    #[test]
    fn all_balanced() {
        for i in 1..=4 {
            for params in [p(1, 2, 3), p(1, 1, 1), p(5, 3, 2)] {
                assert!(flag_balanced(i, params).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn ddbar_matches_displays() {
        for i in [1, 3, 4] {
            for params in [p(1, 2, 3), p(1, 1, 1), p(2, 1, 5)] {
                assert_eq!(flag_ddbar_structural(i, params).unwrap(), flag_ddbar(i, params).unwrap(), "i={i}");
            }
        }
        assert!(flag_ddbar(1, p(1, 1, 2)).unwrap().is_zero());
        assert!(matches!(flag_ddbar(2, p(1, 1, 1)), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn nearly_kahler() {
        let (a, b) = nearly_kahler_check();
        assert_eq!((a, b), (0.0, 0.0));
    }

    #[test]
    fn six_of_eight_integrable() {
        for i in 1..=8 {
            let j = flag_acs(i).unwrap();
            assert!((j * j + Matrix6::identity()).amax() < 1e-14);
        }
        assert_eq!(integrable_structures(), vec![1, 3, 4, 5, 7, 8]);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(FlagParams::from_squares([q(0), q(1), q(1)]).is_err());
        assert!(FlagParams::from_lambdas([1.0, -1.0, 1.0]).is_err());
        let half = FlagParams::from_lambdas([std::f64::consts::FRAC_1_SQRT_2; 3]).unwrap();
        assert_eq!(half.sq, [Q::new(1, 2); 3]);
    }

    #[test]
    fn maurer_cartan_at_identity() {
        let t = su3_basis();
        let g = SU3Element::identity();
        assert_eq!(maurer_cartan(&g, &t[0]), t[0]);
        let eval = maurer_cartan_eval(&SU3Element::random(7));
        for a in 0..8 {
            assert!((eval.values[a] - t[a]).norm() < 1e-10);
        }
        assert!(eval.su3_defect() < 1e-10);
        assert!(SU3Element::new(Matrix3::identity() * C64::new(2.0, 0.0)).is_err());
    }

    #[test]
    fn structure_equation_by_differencing() {
        let g = SU3Element::random(7);
        assert!(structure_equation_residual(&g, 7) < 1e-6);
    }

    #[test]
    fn structural_d_matches_differencing() {
        let g = SU3Element::random(11);
        for i in 1..=4 {
            let k = flag_kahler(i, p(1, 2, 3)).unwrap();
            assert!(structural_d_residual(&k, &g) < 1e-6, "i={i}");
        }
        assert!(structural_d_residual(&rho(), &g) < 1e-6);
    }

    #[test]
    fn normalization_agrees_with_twistor_side() {
        let (tw, fl) = normalization_crosscheck().unwrap();
        assert_eq!(fl, q(2));
        assert!((tw - 2.0).abs() < 1e-6, "{tw}");
        assert!((normalization_crosscheck_with(4.0).unwrap().0 - 1.0).abs() < 1e-6);
        assert!((normalization_crosscheck_with(1.0).unwrap().0 - 4.0).abs() < 1e-6);
    }
}
