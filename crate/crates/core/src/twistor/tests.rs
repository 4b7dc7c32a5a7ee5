use super::*;
use crate::manifold::{builtin, BuiltinName};
use std::sync::Arc;

const ROOT2: f64 = std::f64::consts::SQRT_2;

fn surface(b: BuiltinName) -> HermitianSurface {
    builtin(b, &[]).unwrap()
}

fn chart() -> TwistorChart {
    TwistorChart::default()
}

fn coframe(m: &HermitianSurface, choice: ConnectionChoice, z: &TwistorPoint) -> TwistorCoframe {
    twistor_coframe(m, choice, z, &chart()).unwrap()
}

const BOTH: [ConnectionChoice; 2] = [ConnectionChoice::LICHNEROWICZ, ConnectionChoice::CHERN];

#[test]
fn point_normalization() {
    let x = [0.1, 0.2, 0.0, -0.1];
    let a = TwistorPoint::new(x, [C64::new(0.0, 2.0), C64::new(1.0, 1.0)]).unwrap();
    assert!(a.line[0].im.abs() < 1e-15 && a.line[0].re > 0.0);
    let n: f64 = a.line.iter().map(|c| c.norm_sqr()).sum();
    assert!((n - 1.0).abs() < 1e-14);
    let b = TwistorPoint::new(x, [C64::new(0.0, -5.0), C64::new(-2.5, -2.5)]).unwrap();
    assert!((a.line[1] - b.line[1]).norm() < 1e-14);
    let vertical = TwistorPoint::new(x, [C64::new(0.0, 0.0), C64::new(0.0, 3.0)]).unwrap();
    assert_eq!(vertical.line[1], C64::new(1.0, 0.0));
    assert!(vertical.zeta().is_none());
    assert!(TwistorPoint::new(x, [C64::new(0.0, 0.0); 2]).is_err());
}

#[test]
fn chart_bounds() {
    let x = [0.0; 4];
    let c = chart();
    assert!(matches!(c.coordinates(&TwistorPoint::from_zeta(x, C64::new(5.0, 0.0))), Err(Error::FiberOutOfChart(_))));
    let vertical = TwistorPoint::new(x, [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
    assert!(matches!(c.coordinates(&vertical), Err(Error::FiberOutOfChart(_))));
    let z = TwistorPoint::from_zeta(x, C64::new(0.3, -0.2));
    let y = c.coordinates(&z).unwrap();
    assert!((c.point(&y).line[1] - z.line[1]).norm() < 1e-15);
}

#[test]
fn rotation_is_special_unitary() {
    let a = rotation(C64::new(0.7, -1.3));
    assert!((a.adjoint() * a - Matrix2::identity()).norm() < 1e-14);
    assert!((a.determinant() - C64::new(1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn levi_civita_is_rejected() {
    let m = surface(BuiltinName::FlatC2);
    let z = TwistorPoint::from_zeta([0.0; 4], C64::new(0.1, 0.0));
    assert!(matches!(
        twistor_coframe(&m, ConnectionChoice::LeviCivita, &z, &chart()),
        Err(Error::InvalidParameter(_))
    ));
}

#[test]
fn flat_fiber_form_has_no_horizontal_part() {
    let m = surface(BuiltinName::FlatC2);
    let y = [0.2, -0.1, 0.3, 0.0, 0.0, 0.0];
    let rows = section_rows(&m, 0.0, &y);
    assert!(rows[2][..4].iter().all(|c| c.norm() < 1e-12));
}

#[test]
fn fiber_form_agrees_on_kahler_surfaces() {
    let m = surface(BuiltinName::Cp2Fs);
    let y = [0.2, -0.1, 0.3, 0.05, 0.4, -0.3];
    let l = section_rows(&m, 0.0, &y);
    let c = section_rows(&m, 1.0, &y);
    for k in 0..6 {
        assert!((l[2][k] - c[2][k]).norm() < 1e-9);
    }
}

#[test]
fn fiber_form_difference_is_torsion() {
    // φ³_L − φ³_Ch = ½(T¹₂₁φ¹ − conj(T²₁₂)φ̄²)
    let m = surface(BuiltinName::Hopf);
    for z in chart().sample(&m, 3, 4) {
        let ch = coframe(&m, ConnectionChoice::CHERN, &z);
        let l = section_rows(&m, 0.0, &ch.y);
        let c = section_rows(&m, 1.0, &ch.y);
        let diff_dy = Form::from_components(6, 1, |k| l[2][k[0]] - c[2][k[0]]);
        let diff = ch.from_coordinates(&diff_dy);
        let t1_21 = ch.torsion[0].coefficient(&[P2, P1]);
        let t2_12 = ch.torsion[1].coefficient(&[P1, P2]);
        let expect = (Form::basis(6, P1) * t1_21 - Form::basis(6, B2) * t2_12.conj()).scale_real(0.5);
        assert!((diff.clone() - expect).norm() < 1e-8, "{diff}");
        assert!(diff.norm() > 0.1);
    }
}

#[test]
fn tau_matches_component_expansion() {
    for b in BuiltinName::ALL {
        let m = surface(b);
        for z in chart().sample(&m, 2, 9) {
            let cf = coframe(&m, ConnectionChoice::LICHNEROWICZ, &z);
            assert!((cf.tau() - cf.tau_from_components()).norm() < 1e-9, "{}", m.name);
        }
    }
}

#[test]
fn unitary_bases() {
    assert_eq!(unitary_basis(1).unwrap(), [P1, B2, P3]);
    assert_eq!(unitary_basis(4).unwrap(), [P1, P2, B3]);
    assert!(unitary_basis(0).is_err() && unitary_basis(5).is_err());
}

#[test]
fn kahler_forms_are_real_and_nondegenerate() {
    let conj = conjugation();
    for i in 1..=4 {
        for l in [Lambdas::single(0.3), Lambdas([0.5, 1.2, 2.0])] {
            let k = kahler_form(i, l).unwrap();
            assert!((k.conjugate(&conj) - k.clone()).norm() < 1e-12);
            let vol = k.w(&k).w(&k).scale_real(1.0 / 6.0);
            // orientation of iφ¹φ̄¹ ∧ iφ²φ̄² ∧ iφ³φ̄³
            let reference = (0..3).fold(Form::scalar(6, C64::new(1.0, 0.0)), |acc, a| {
                acc.w(&Form::basis(6, a).w(&Form::basis(6, a + 3)).times_i())
            });
            let ratio = vol.coefficient(&[0, 1, 2, 3, 4, 5]) / reference.coefficient(&[0, 1, 2, 3, 4, 5]);
            let expect: f64 = l.0.iter().map(|x| x * x).product();
            assert!(ratio.im.abs() < 1e-12 && ratio.re.abs() > 0.0);
            assert!((ratio.re.abs() - expect).abs() < 1e-12);
            let sign = if i == 1 || i == 2 { -1.0 } else { 1.0 } * if i % 2 == 0 { -1.0 } else { 1.0 };
            assert_eq!(ratio.re.signum(), sign, "i = {i}");
        }
    }
    assert!(kahler_form(1, Lambdas::single(1e-4)).is_err());
}

#[test]
fn complex_structures_square_to_minus_one() {
    for b in BuiltinName::ALL {
        let m = surface(b);
        let z = chart().sample(&m, 1, 3)[0];
        for choice in BOTH {
            let cf = coframe(&m, choice, &z);
            for i in 1..=4 {
                let j = acs_endomorphism(i, &cf).unwrap();
                assert!((j * j + Matrix6::identity()).amax() < 1e-10);
                // declared (1,0)-forms are +i eigencovectors
                for s in unitary_basis(i).unwrap() {
                    let row = cf.basis.row(s);
                    let jr = row * j.map(|v| C64::new(v, 0.0));
                    assert!((jr - row * C64::new(0.0, 1.0)).norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn j1_and_j3_differ_by_conjugating_phi2() {
    let m = surface(BuiltinName::Hopf);
    let z = chart().sample(&m, 1, 3)[0];
    let cf = coframe(&m, ConnectionChoice::CHERN, &z);
    let j1 = acs_endomorphism(1, &cf).unwrap();
    let j3 = acs_endomorphism(3, &cf).unwrap();
    let c = cf.basis;
    for s in [P1, P3] {
        let row = c.row(s);
        let cj = |j: &Matrix6<f64>| row * j.map(|v| C64::new(v, 0.0));
        assert!((cj(&j1) - cj(&j3)).norm() < 1e-10);
    }
    let row = c.row(P2);
    let on = |j: &Matrix6<f64>| row * j.map(|v| C64::new(v, 0.0));
    assert!((on(&j1) + on(&j3)).norm() < 1e-10);
}

#[test]
fn kahler_surfaces_share_j1() {
    let m = surface(BuiltinName::Cp2Fs);
    for z in chart().sample(&m, 3, 8) {
        let y = chart().coordinates(&z).unwrap();
        let l = formulas::acs_at(&m, 0.0, 1, &y).unwrap();
        let c = formulas::acs_at(&m, 1.0, 1, &y).unwrap();
        assert!((l - c).amax() < 1e-10);
    }
}

#[test]
fn j1_is_common_to_the_canonical_family() {
    let m = surface(BuiltinName::Hopf);
    for z in chart().sample(&m, 3, 8) {
        let y = chart().coordinates(&z).unwrap();
        let base = formulas::acs_at(&m, 0.0, 1, &y).unwrap();
        for t in [-1.0, 0.5, 1.0] {
            assert!((formulas::acs_at(&m, t, 1, &y).unwrap() - base).amax() < 1e-8, "t = {t}");
        }
        let j3 = (formulas::acs_at(&m, 1.0, 3, &y).unwrap() - formulas::acs_at(&m, 0.0, 3, &y).unwrap()).amax();
        assert!(j3 > 1e-3);
    }
}

#[test]
fn dk_formulas_match_oracle() {
    for b in BuiltinName::ALL {
        let m = surface(b);
        for choice in BOTH {
            for z in chart().sample(&m, 2, 21) {
                let cf = coframe(&m, choice, &z);
                for i in 1..=4 {
                    for l in [0.5, 1.0, ROOT2] {
                        let la = Lambdas::single(l);
                        let o = dk_oracle(i, la, &m, choice, &z, &chart()).unwrap();
                        let f = dk_formula(i, la, &cf).unwrap();
                        assert!((f - o.clone()).norm() < 1e-8, "{} {choice} i={i} λ={l}", m.name);
                        let bf = balanced_defect_formula(i, la, &cf).unwrap();
                        let bo = kahler_form(i, la).unwrap().w(&o);
                        assert!((bf - bo).norm() < 1e-8, "balanced {} {choice} i={i} λ={l}", m.name);
                    }
                }
            }
        }
    }
}

#[test]
fn three_parameter_family_matches_oracle() {
    let la = Lambdas([0.7, 1.3, 0.9]);
    for b in [BuiltinName::Hopf, BuiltinName::Cp2Fs] {
        let m = surface(b);
        for choice in [ConnectionChoice::LICHNEROWICZ, ConnectionChoice::CHERN, ConnectionChoice::Gauduchon(0.4)] {
            let z = chart().sample(&m, 1, 2)[0];
            let cf = coframe(&m, choice, &z);
            for i in 1..=4 {
                let o = dk_oracle(i, la, &m, choice, &z, &chart()).unwrap();
                assert!((dk_structural(i, la, &cf).unwrap() - o).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn structural_path_reproduces_single_parameter_displays() {
    let m = surface(BuiltinName::Hopf);
    let z = chart().sample(&m, 1, 6)[0];
    for choice in BOTH {
        let cf = coframe(&m, choice, &z);
        for i in 1..=4 {
            let la = Lambdas::single(1.7);
            let d = dk_formula(i, la, &cf).unwrap();
            assert!((dk_structural(i, la, &cf).unwrap() - d).norm() < 1e-10);
        }
    }
}

#[test]
fn general_t_has_no_closed_form() {
    let m = surface(BuiltinName::Hopf);
    let z = chart().sample(&m, 1, 6)[0];
    let cf = coframe(&m, ConnectionChoice::Gauduchon(0.5), &z);
    assert_eq!(dk_formula(1, Lambdas::single(1.0), &cf), Err(Error::NoFormula));
    assert_eq!(balanced_defect_formula(3, Lambdas::single(1.0), &cf), Err(Error::NoFormula));
    assert!(dk_oracle(1, Lambdas::single(1.0), &m, ConnectionChoice::Gauduchon(0.5), &z, &chart()).is_ok());
}

#[test]
fn cp2_first_structure_is_symplectic_only_at_two() {
    let m = surface(BuiltinName::Cp2Fs);
    for z in chart().sample(&m, 3, 12) {
        for choice in BOTH {
            let cf = coframe(&m, choice, &z);
            assert!(dk_formula(1, Lambdas::single(ROOT2), &cf).unwrap().norm() < 1e-7);
            assert!(dk_formula(1, Lambdas::single(1.0), &cf).unwrap().norm() > 0.5);
            for i in 1..=4 {
                assert!(balanced_defect_formula(i, Lambdas::single(1.0), &cf).unwrap().norm() < 1e-7);
            }
        }
    }
}

#[test]
fn flat_third_structure_is_symplectic() {
    let m = surface(BuiltinName::FlatC2);
    for z in chart().sample(&m, 3, 12) {
        let cf = coframe(&m, ConnectionChoice::LICHNEROWICZ, &z);
        for l in [0.2, 1.0, 3.0] {
            assert!(dk_formula(3, Lambdas::single(l), &cf).unwrap().norm() < 1e-9);
            assert!(dk_formula(4, Lambdas::single(l), &cf).unwrap().norm() < 1e-9);
            assert!(balanced_defect_formula(1, Lambdas::single(l), &cf).unwrap().norm() < 1e-9);
        }
    }
}

#[test]
fn nijenhuis_thresholds() {
    let c = chart();
    for b in BuiltinName::ALL {
        let m = surface(b);
        for z in c.sample(&m, 2, 17) {
            for choice in BOTH {
                assert!(nijenhuis_oracle(2, &m, choice, &z, &c).unwrap() > 0.1, "{}", m.name);
            }
            if b != BuiltinName::Hopf {
                let l = ConnectionChoice::LICHNEROWICZ;
                assert!(nijenhuis_oracle(1, &m, l, &z, &c).unwrap() < NIJENHUIS_TOL, "{}", m.name);
                assert!(nijenhuis_oracle(3, &m, l, &z, &c).unwrap() < NIJENHUIS_TOL, "{}", m.name);
            } else {
                for i in [3, 4] {
                    assert!(nijenhuis_oracle(i, &m, ConnectionChoice::CHERN, &z, &c).unwrap() < NIJENHUIS_TOL);
                }
                assert!(nijenhuis_oracle(3, &m, ConnectionChoice::LICHNEROWICZ, &z, &c).unwrap() > 0.1);
            }
        }
    }
}

fn full_hypotheses() -> DdbarHypotheses {
    DdbarHypotheses { self_dual: true, constant_scalar: true, ricci_j_invariant: true }
}

#[test]
fn ddbar_formulas_match_oracle() {
    let cases = [
        (BuiltinName::Cp2Fs, ConnectionChoice::LICHNEROWICZ, [1, 3, 4].as_slice()),
        (BuiltinName::Ch2, ConnectionChoice::LICHNEROWICZ, &[1, 3, 4]),
        (BuiltinName::Cp2Fs, ConnectionChoice::CHERN, &[3, 4]),
        (BuiltinName::Hopf, ConnectionChoice::CHERN, &[3, 4]),
        (BuiltinName::Hopf, ConnectionChoice::LICHNEROWICZ, &[1]),
    ];
    for (b, choice, structures) in cases {
        let m = surface(b);
        let z = chart().sample(&m, 1, 30)[0];
        let cf = coframe(&m, choice, &z);
        for &i in structures {
            for l in [0.5, ROOT2] {
                let la = Lambdas::single(l);
                let f = ddbar_formula(i, la, &cf, full_hypotheses()).unwrap();
                let o = ddbar_oracle(i, la, &m, choice, &z, &chart()).unwrap();
                assert!((f - o).norm() < 1e-5, "{} {choice} i={i}", m.name);
            }
        }
    }
}

#[test]
fn ddbar_hypotheses_are_enforced() {
    let m = surface(BuiltinName::Hopf);
    let z = chart().sample(&m, 1, 30)[0];
    let cf = coframe(&m, ConnectionChoice::LICHNEROWICZ, &z);
    let hyp = DdbarHypotheses::from_coframe(&cf, true);
    assert!(!hyp.ricci_j_invariant);
    match ddbar_formula(3, Lambdas::single(1.0), &cf, hyp) {
        Err(Error::NotApplicable(msg)) => assert!(msg.contains("Ricci")),
        other => panic!("{other:?}"),
    }
    let no_const = DdbarHypotheses { constant_scalar: false, ..full_hypotheses() };
    assert!(matches!(ddbar_formula(1, Lambdas::single(1.0), &cf, no_const), Err(Error::NotApplicable(_))));
    assert!(matches!(ddbar_formula(2, Lambdas::single(1.0), &cf, full_hypotheses()), Err(Error::NotApplicable(_))));
    let ch = coframe(&m, ConnectionChoice::CHERN, &z);
    assert!(ddbar_formula(3, Lambdas::single(1.0), &ch, DdbarHypotheses::from_coframe(&ch, false)).is_ok());
    assert!(matches!(ddbar_formula(1, Lambdas::single(1.0), &ch, full_hypotheses()), Err(Error::NotApplicable(_))));
}

#[test]
fn kahler_case_ddbar_reduces_to_curvature_bracket() {
    // on a Kähler–Einstein base s = s*, and μ vanishes
    let m = surface(BuiltinName::Cp2Fs);
    let z = chart().sample(&m, 1, 31)[0];
    let cf = coframe(&m, ConnectionChoice::LICHNEROWICZ, &z);
    assert!(cf.mu.norm() < 1e-9);
    let la = Lambdas::single(1.3);
    let f = ddbar_formula(3, la, &cf, DdbarHypotheses::from_coframe(&cf, true)).unwrap();
    let e = |s: usize| Form::basis(6, s);
    let tau = cf.tau();
    let bracket = (cf.lc_real(0, 1) - cf.lc_real(2, 3)).w(&e(P3)).w(&e(B3)).times_i() - tau.w(&cf.conj(&tau));
    assert!((f - bracket.scale_real(1.69)).norm() < 1e-8);
}

#[test]
fn ch2_first_structure_ddbar_is_positive_for_small_lambda() {
    let m = surface(BuiltinName::Ch2);
    for z in chart().sample(&m, 3, 40) {
        let cf = coframe(&m, ConnectionChoice::LICHNEROWICZ, &z);
        let hyp = DdbarHypotheses::from_coframe(&cf, true);
        assert!(hyp.self_dual);
        let f = ddbar_formula(1, Lambdas::single(0.1), &cf, hyp).unwrap();
        let pm = positivity_matrix(&f, 1).unwrap();
        assert!(oracle::min_hermitian_eigenvalue(&pm) > 0.5, "{pm}");
    }
    // on cp2 the same expression is not positive
    let m = surface(BuiltinName::Cp2Fs);
    let z = chart().sample(&m, 1, 40)[0];
    let cf = coframe(&m, ConnectionChoice::LICHNEROWICZ, &z);
    let f = ddbar_formula(1, Lambdas::single(0.1), &cf, DdbarHypotheses::from_coframe(&cf, true)).unwrap();
    assert!(oracle::min_hermitian_eigenvalue(&positivity_matrix(&f, 1).unwrap()) < 0.0);
}

#[test]
fn conformal_invariance() {
    let m = surface(BuiltinName::Hopf);
    let c = chart();
    for z in c.sample(&m, 3, 50) {
        let lin = conformal_compare(&m, Arc::new(|x: &[f64]| 0.1 * x[0]), "0.1*x1", &z, &c).unwrap();
        assert!(lin.chern.iter().all(|d| *d < 1e-6), "{lin:?}");
        assert!(lin.lichnerowicz[0] < 1e-6 && lin.j1_lichnerowicz_angle < 1e-6);
        assert!(lin.lichnerowicz[2] > 1e-4);
        let scale = conformal_compare(&m, Arc::new(|_: &[f64]| 0.3), "0.3", &z, &c).unwrap();
        assert!(scale.chern.iter().chain(&scale.lichnerowicz).all(|d| *d < 1e-8), "{scale:?}");
        let zero = conformal_compare(&m, Arc::new(|_: &[f64]| 0.0), "0", &z, &c).unwrap();
        assert!(zero.chern.iter().chain(&zero.lichnerowicz).all(|d| *d == 0.0));
    }
}

#[test]
fn eigenspace_angle_detects_rotation() {
    let j = Matrix6::from_fn(|r, c| match (r, c) {
        (1, 0) | (3, 2) | (5, 4) => 1.0,
        (0, 1) | (2, 3) | (4, 5) => -1.0,
        _ => 0.0,
    });
    assert!(eigenspace_angle(&j, &j) < 1e-12);
    assert!((eigenspace_angle(&j, &(-j)) - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
}

#[test]
fn projective_form() {
    let c = chart();
    let flat = surface(BuiltinName::FlatC2);
    let z = TwistorPoint::from_zeta([0.1, 0.2, -0.1, 0.0], C64::new(0.5, -0.3));
    let p = projective_bundle_form(&flat, 1.0, &z, &c).unwrap();
    let w2 = 0.34;
    assert!((p.fiber_component - 1.0 / ((1.0 + w2) * (1.0 + w2))).abs() < 1e-6);

    let cp2 = surface(BuiltinName::Cp2Fs);
    for z in c.sample(&cp2, 3, 60) {
        let p = projective_bundle_form(&cp2, 10.0, &z, &c).unwrap();
        assert!(p.test_directions().iter().all(|v| *v > 0.0));
        assert!(p.min_eigenvalue > 0.0);
        assert!((p.form.clone() - compare::reference_form()).norm() > 0.01);
        // real (1,1)-form for the twistor complex structure of the holomorphic bundle
        assert!((p.form.conjugate(&conjugation()) - p.form.clone()).norm() < 1e-6);
        let pair = formulas::pairing(4).unwrap();
        let off = p.form.bidegree_project(&pair, 2, 0).unwrap().form.norm();
        assert!(off < 1e-6, "{off}");
    }
    let hopf = surface(BuiltinName::Hopf);
    let z = c.sample(&hopf, 1, 60)[0];
    assert!(matches!(projective_bundle_form(&hopf, 1.0, &z, &c), Err(Error::NotApplicable(_))));
}

#[test]
fn condition_report_flags() {
    let m = surface(BuiltinName::Cp2Fs);
    let grid = [1.0, ROOT2, 2.0].map(Lambdas::single).to_vec();
    let cfg = ReportConfig { lambdas: grid.clone(), points: 3, ..Default::default() };
    let r = condition_report(&m, ConnectionChoice::LICHNEROWICZ, &cfg).unwrap();
    for i in 1..=4 {
        for &l in &grid {
            let want = i == 1 && l.lambda() == ROOT2;
            assert_eq!(r.all(i, l, |c| &c.symplectic), want, "i={i} λ={}", l.lambda());
        }
    }
    assert!(r.points.iter().flat_map(|p| &p.records).all(|c| c.dk_residual.unwrap() < 1e-6));

    let flat = surface(BuiltinName::FlatC2);
    let r = condition_report(&flat, ConnectionChoice::LICHNEROWICZ, &cfg).unwrap();
    for &l in &grid {
        assert!(r.all(3, l, |c| &c.symplectic) && r.all(4, l, |c| &c.symplectic));
    }

    let hopf = surface(BuiltinName::Hopf);
    let cfg1 = ReportConfig { points: 3, ..Default::default() };
    let r = condition_report(&hopf, ConnectionChoice::CHERN, &cfg1).unwrap();
    for i in [3, 4] {
        for c in r.records(i, Lambdas::single(1.0)) {
            assert!(!c.balanced.value && c.balanced.defect > 0.1);
            assert!(c.integrable.value);
        }
    }
    let g = condition_report(&hopf, ConnectionChoice::Gauduchon(0.5), &cfg1).unwrap();
    assert!(g.points.iter().flat_map(|p| &p.records).all(|c| c.dk_residual.is_none()));
}

#[test]
fn report_is_deterministic() {
    let m = surface(BuiltinName::Hopf);
    let cfg = ReportConfig { points: 4, seed: 99, ..Default::default() };
    let a = condition_report(&m, ConnectionChoice::CHERN, &cfg).unwrap();
    let b = condition_report(&m, ConnectionChoice::CHERN, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn critical_values_follow_scalar_curvature() {
    for (c, want) in [(2.0, 2.0), (4.0, 1.0), (1.0, 4.0)] {
        let m = builtin(BuiltinName::Cp2Fs, &[("c".into(), c)]).unwrap();
        for choice in BOTH {
            let u = critical_lambda_sq(&m, choice, 1, 4, 3, 1e-6).unwrap().expect("one zero");
            assert!((u - want).abs() < 1e-6, "c={c} {choice}: {u}");
        }
    }
}

#[test]
fn scan_reports_identically_zero_and_empty_grids() {
    let m = surface(BuiltinName::FlatC2);
    let c = chart();
    let pts = c.sample(&m, 2, 1);
    let r = scan(&m, ConnectionChoice::CHERN, 3, &[0.5, 1.0, 2.0], &pts, &c, 1e-6).unwrap();
    assert!(r.identically_zero && r.zeros.is_empty());
    assert!(scan(&m, ConnectionChoice::CHERN, 3, &[1.0], &pts, &c, 1e-6).is_err());
    let r = scan(&m, ConnectionChoice::CHERN, 2, &[0.5, 1.0, 2.0], &pts, &c, 1e-6).unwrap();
    assert!(!r.identically_zero && r.zeros.is_empty());
}
