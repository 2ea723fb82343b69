//! End-to-end checks of the analysis pipeline on gallery surfaces.

use std::f64::consts::PI;

use wlab_core::calculus::{Mask, ScalarField};
use wlab_core::diagnostics::{Analysis, DiagnosticsReport, Tolerances, Verdict};
use wlab_core::frame::FrameOptions;
use wlab_core::gallery::{self, CurveSpec, HopfChartResult, Profile};
use wlab_core::invariants::{normal_norm, ricci_residual_with_rhs, ricci_rhs, willmore_energy_euclidean};

fn report_of(a: &Analysis) -> DiagnosticsReport {
    a.report(&Tolerances::for_spec(&a.chart.spec))
}

fn curvature_surface(k1: f64, k2: f64, n: usize) -> HopfChartResult {
    let curve = CurveSpec {
        k1: Profile::Constant(k1),
        k2: Profile::Constant(k2),
        t_period: None,
        ambient_complex_dim: 3,
    };
    gallery::hopf_from_curvature(&curve, n, n).unwrap()
}

#[test]
fn zero_curvature_hopf_surface_is_the_clifford_torus() {
    // <kappa, kappa-bar> is a density in |dz|^2, so compare it per unit of induced metric
    let density = |a: &Analysis, p: usize| a.inv.kk_bar.data[p].re / a.frame.lift_metric[p];
    let clifford = Analysis::of(&gallery::clifford(32, 32).unwrap()).unwrap();
    let expected = density(&clifford, 0);
    assert!((expected - 0.5).abs() < 1e-10);
    for h in [
        curvature_surface(0.0, 0.0, 32),
        gallery::pinkall_hopf_torus(0.0, 32, 32).unwrap(),
    ] {
        let a = Analysis::of(&h.chart).unwrap();
        let r = report_of(&a);
        assert!((r.energies.w_conformal - 2.0 * PI * PI).abs() < 1e-8);
        assert!((0..a.inv.s.len()).all(|p| (density(&a, p) - expected).abs() < 1e-8));
        assert!(r.passed, "{:?}", r.entries);
    }
}

#[test]
fn closed_hopf_energies_match_the_curvature_integral() {
    let charts = [
        gallery::pinkall_hopf_torus(1.5, 32, 32).unwrap(),
        curvature_surface(0.0, 0.5, 32),
        curvature_surface(0.0, 2f64.sqrt(), 32),
        gallery::homogeneous_cp2_hopf([1.5, -1.0, 0.0], None, 32, 32).unwrap(),
    ];
    for h in &charts {
        assert!(h.closed);
        let w = report_of(&Analysis::of(&h.chart).unwrap()).energies.w_conformal;
        assert!(
            (w - h.closed_form_energy).abs() < 1e-5,
            "{}: {w} vs {}",
            h.chart.label,
            h.closed_form_energy
        );
    }
}

#[test]
fn torsion_makes_the_normal_bundle_non_flat() {
    let a = Analysis::of(&curvature_surface(0.0, 0.5, 32).chart).unwrap();
    let r = report_of(&a);
    let flat = r.entry("flat_normal").unwrap();
    assert_eq!(flat.verdict, Verdict::Fail);
    // recorded floor of the constant-torsion surface
    assert!((flat.min - 0.03125).abs() < 1e-6, "{}", flat.min);
    assert_eq!(r.entry("isothermic").unwrap().verdict, Verdict::Skipped);

    let generic = gallery::homogeneous_cp2_hopf([1.5, -1.0, 0.0], None, 32, 32).unwrap();
    let flat = report_of(&Analysis::of(&generic.chart).unwrap())
        .entry("flat_normal")
        .unwrap()
        .min;
    assert!(flat > 1e-3, "{flat}");
}

#[test]
fn degenerate_cp2_triple_reduces_to_the_pinkall_torus() {
    let cp2 = gallery::homogeneous_cp2_hopf([2.0, -0.5, 0.7], None, 32, 32).unwrap();
    let pk = gallery::pinkall_hopf_torus(1.5, 32, 32).unwrap();
    let (a, b) = (Analysis::of(&cp2.chart).unwrap(), Analysis::of(&pk.chart).unwrap());
    assert!((report_of(&a).energies.w_conformal - report_of(&b).energies.w_conformal).abs() < 1e-6);
    assert!(report_of(&a).entry("flat_normal").unwrap().linf < 1e-6);
}

#[test]
fn sqrt2_torsion_surface_is_willmore_but_not_s_willmore() {
    let a = Analysis::of(&curvature_surface(0.0, 2f64.sqrt(), 32).chart).unwrap();
    let r = report_of(&a);
    let verdict = |n: &str| r.entry(n).unwrap().verdict;
    assert_eq!(verdict("willmore"), Verdict::Pass);
    assert_eq!(verdict("six_form_holomorphy"), Verdict::Pass);
    assert_eq!(verdict("s_willmore"), Verdict::Fail);
    assert_eq!(verdict("flat_normal"), Verdict::Fail);
    assert_eq!(r.spans.lift_rank, Some(7));
}

#[test]
fn pinkall_torus_is_not_willmore() {
    let r = report_of(&Analysis::of(&gallery::pinkall_hopf_torus(1.5, 32, 32).unwrap().chart).unwrap());
    let w = r.entry("willmore").unwrap();
    assert_eq!(w.verdict, Verdict::Fail);
    assert!(w.linf > 0.1);
    for n in ["codazzi", "gauss", "ricci", "structure", "flat_normal", "isothermic"] {
        assert_eq!(r.entry(n).unwrap().verdict, Verdict::Pass, "{n}");
    }
    assert_eq!(r.entry("six_form_holomorphy").unwrap().verdict, Verdict::Skipped);
}

#[test]
fn veronese_integrability_holds_at_fd_accuracy() {
    let chart = gallery::veronese(64, 64, gallery::MERCATOR_EXTENT).unwrap();
    let a = Analysis::of(&chart).unwrap();
    let r = report_of(&a);
    assert!(r.entry("ricci").unwrap().linf < 1e-4);
    assert!(r.entry("gauss").unwrap().linf < 1e-3);
    assert!(r.entry("willmore").unwrap().linf < 1e-4);
    assert!(r.energies.relative_gap.unwrap() < 0.01);
    assert!(r.energies.partial_domain);
    assert_eq!(r.spans.lift_rank, Some(6));
}

#[test]
fn round_sphere_has_zero_euclidean_energy() {
    let chart = gallery::round_sphere(64, 32, gallery::MERCATOR_EXTENT).unwrap();
    let a = Analysis::of(&chart).unwrap();
    let e = willmore_energy_euclidean(&chart, &a.ops).unwrap();
    assert!(e.value.abs() < 1e-8, "{}", e.value);
}

#[test]
fn clifford_hopf_differential_is_parallel() {
    let a = Analysis::of(&gallery::clifford(32, 32).unwrap()).unwrap();
    let all = Mask::all(a.inv.s.len());
    for p in 0..a.inv.s.len() {
        assert!(normal_norm(&a.inv.dzbar_kappa.at(p)) < 1e-10);
    }
    assert!(a.inv.s.linf(&all) < 1e-10);
}

#[test]
fn doubled_ricci_right_hand_side_is_detected() {
    let chart = gallery::veronese(64, 64, gallery::MERCATOR_EXTENT).unwrap();
    let a = Analysis::of(&chart).unwrap();
    let two = ScalarField::from_real(&chart.spec, &vec![2.0; chart.spec.len()]).unwrap();
    let doubled = a.inv.kappa.scale_by(&two);
    let resid = ricci_residual_with_rhs(&a.frame, &a.ops, &a.inv, &doubled).unwrap();
    let mut worst = 0.0f64;
    for p in (0..resid.data.len()).filter(|&p| a.inv.umbilic_free.is_valid(p)) {
        let kappa = a.inv.kappa.at(p);
        let expected = a
            .frame
            .psi
            .iter()
            .map(|psi| 3.0 * normal_norm(&ricci_rhs(&psi.at(p), &kappa)))
            .fold(0.0, f64::max);
        worst = worst.max((resid.data[p].re - expected).abs() / expected.max(1e-3));
    }
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn perturbed_clifford_is_a_failing_control() {
    let chart = gallery::perturb(&gallery::clifford(64, 64).unwrap(), 0.05, 7).unwrap();
    let a = Analysis::run(&chart, &FrameOptions::unchecked()).unwrap();
    let r = report_of(&a);
    assert!(r.frame.conformality_defect > 1e-3);
    assert!(r.entry("willmore").unwrap().linf > 1e-3);
    assert!(!r.passed);
}
