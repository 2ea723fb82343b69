//! Acceptance suite. Prints one line per criterion and fails if any criterion fails.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wlab_core::calculus::{convergence_order, ConvergenceFit, GridSpec, Mask, ScalarField};
use wlab_core::chart::Chart;
use wlab_core::diagnostics::{
    flatness_defect, reduced_system_residual, reduction_span_check, ricci_commutator_defect, six_form_value,
    synthetic_normal, Analysis, DiagnosticsReport, Tolerances,
};
use wlab_core::gallery::{self, CurveSpec, Profile};
use wlab_core::lorentz::random_mobius;

struct Suite {
    failures: Vec<String>,
}

impl Suite {
    fn record(&mut self, id: &str, title: &str, pass: bool, detail: String) {
        println!("[{}] {id:>2} {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(format!("{id} {title}"));
        }
    }
}

fn report(chart: &Chart) -> DiagnosticsReport {
    Analysis::of(chart).unwrap().report(&Tolerances::for_spec(&chart.spec))
}

fn linf(r: &DiagnosticsReport, name: &str) -> f64 {
    r.entry(name).unwrap().linf
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sqrt2_hopf(n: usize) -> Chart {
    let curve = CurveSpec {
        k1: Profile::Constant(0.0),
        k2: Profile::Constant(2f64.sqrt()),
        t_period: None,
        ambient_complex_dim: 3,
    };
    gallery::hopf_from_curvature(&curve, n, n).unwrap().chart
}

fn clifford_exact(s: &mut Suite) {
    let chart = gallery::clifford(64, 64).unwrap();
    let a = Analysis::of(&chart).unwrap();
    let r = a.report(&Tolerances::for_spec(&chart.spec));
    let w_err = (r.energies.w_conformal - 2.0 * PI * PI).abs();
    let kk_err = a.inv.kk_bar.data.iter().map(|z| (z - 0.125).norm()).fold(0.0, f64::max);
    let names = [
        "willmore",
        "s_willmore",
        "flat_normal",
        "isothermic",
        "gauss",
        "codazzi",
        "ricci",
    ];
    let worst = names.iter().map(|n| linf(&r, n)).fold(0.0, f64::max);
    let omega = linf(&r, "six_form");
    s.record(
        "1",
        "Clifford torus 64x64",
        w_err < 1e-6 && kk_err < 1e-8 && worst < 1e-8 && omega < 1e-12,
        format!("|W-2pi^2|={w_err:.1e} |kk-1/8|={kk_err:.1e} max residual={worst:.1e} |Omega|={omega:.1e}"),
    );
}

fn energy_oracle(s: &mut Suite) {
    let charts = [
        gallery::clifford(64, 64).unwrap(),
        gallery::pinkall_hopf_torus(1.5, 64, 64).unwrap().chart,
        gallery::veronese(64, 64, gallery::MERCATOR_EXTENT).unwrap(),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for chart in &charts {
        let gap = report(chart).energies.relative_gap;
        pass &= gap.is_some_and(|g| g < 0.01);
        parts.push(format!("{}={:.1e}", chart.label, gap.unwrap_or(f64::NAN)));
    }
    s.record(
        "2",
        "conformal vs Euclidean energy",
        pass,
        format!("relative gaps {}", parts.join(" ")),
    );
}

fn pinkall(s: &mut Suite) {
    let h = gallery::pinkall_hopf_torus(1.5, 64, 64).unwrap();
    let r = report(&h.chart);
    let w = r.energies.w_conformal;
    let period_err = (h.closing_period - 4.0 * PI / 5.0).abs();
    let w_err = (w - 2.5 * PI * PI).abs();
    let cf_err = (w - h.closed_form_energy).abs();
    let flat = linf(&r, "flat_normal");
    s.record(
        "3",
        "Pinkall Hopf torus c=3/2",
        h.closed && period_err < 1e-12 && w_err < 1e-5 && cf_err < 1e-8 && flat < 1e-8,
        format!("|T-4pi/5|={period_err:.1e} |W-5pi^2/2|={w_err:.1e} |W-closed form|={cf_err:.1e} flat={flat:.1e}"),
    );
}

fn willmore_fit(sizes: &[usize], build: impl Fn(usize) -> Chart) -> ConvergenceFit {
    convergence_order(sizes, |n| Ok(linf(&report(&build(n)), "willmore"))).unwrap()
}

fn non_flat_controls(s: &mut Suite) {
    let sizes = [32, 64, 128];
    let veronese = |n| gallery::veronese(n, n, gallery::MERCATOR_EXTENT).unwrap();
    let hopf = sqrt2_hopf;

    let flat_floor = |chart: &Chart| {
        let r = report(chart);
        let e = r.entry("flat_normal").unwrap();
        (e.min, 10.0 * e.tolerance)
    };
    let (v_min, v_bound) = flat_floor(&veronese(64));
    let (h_min, h_bound) = flat_floor(&hopf(64));

    let v_fit = willmore_fit(&sizes, veronese);
    let h_fit = willmore_fit(&sizes, hopf);
    let h_max = h_fit.residuals.iter().cloned().fold(0.0, f64::max);
    s.record(
        "4",
        "non-flat controls (Veronese, Hopf k2=sqrt2)",
        v_min > v_bound && h_min > h_bound && v_fit.order() >= 5.0 && h_max < 1e-8,
        format!(
            "flat min {v_min:.2e}>{v_bound:.0e}, {h_min:.2e}>{h_bound:.0e}; Veronese Willmore {:.1e} order {:.2}; Hopf Willmore max {h_max:.1e} (slope {:.2})",
            v_fit.residuals[2],
            v_fit.order(),
            h_fit.slope
        ),
    );
}

fn reduction_witnesses(s: &mut Suite) {
    let clifford = gallery::clifford(32, 32).unwrap();
    let mut lift_ranks = Vec::new();
    for seed in 1..=5 {
        let chart = gallery::scramble(&clifford, 5, seed, 1.0).unwrap();
        let a = Analysis::of(&chart).unwrap();
        lift_ranks.push(reduction_span_check(&a.frame, &a.ops, &a.inv).unwrap().0);
    }
    let jet = |chart: &Chart| {
        let a = Analysis::of(chart).unwrap();
        reduction_span_check(&a.frame, &a.ops, &a.inv).unwrap().1
    };
    let jet_clifford = jet(&clifford);
    let jet_pinkall = jet(&gallery::pinkall_hopf_torus(1.5, 32, 32).unwrap().chart);
    let sphere = gallery::round_sphere(64, 32, gallery::MERCATOR_EXTENT)
        .unwrap()
        .include_in_higher_sphere(4)
        .unwrap();
    let a = Analysis::of(&sphere).unwrap();
    let sphere_rank = reduction_span_check(&a.frame, &a.ops, &a.inv).unwrap().0;
    s.record(
        "5",
        "reduction witnesses",
        lift_ranks.iter().all(|&r| r == 5) && jet_clifford <= 4 && jet_pinkall <= 4 && sphere_rank == 4,
        format!(
            "scrambled Clifford lift ranks {lift_ranks:?}; kappa-jet ranks {jet_clifford}, {jet_pinkall}; sphere in S^4 lift rank {sphere_rank}"
        ),
    );
}

fn mobius_invariance(s: &mut Suite) {
    let mut worst = 0.0f64;
    for chart in [
        gallery::clifford(64, 64).unwrap(),
        gallery::pinkall_hopf_torus(1.5, 64, 64).unwrap().chart,
    ] {
        let base = report(&chart);
        for seed in 1..=5 {
            let moved = report(&chart.apply_mobius(&random_mobius(3, seed, 1.0)).unwrap());
            worst = worst.max((moved.energies.w_conformal - base.energies.w_conformal).abs());
            for (e0, e1) in base.entries.iter().zip(&moved.entries) {
                assert_eq!(e0.name, e1.name);
                worst = worst.max((e0.linf - e1.linf).abs());
            }
        }
    }
    s.record(
        "6",
        "Moebius invariance",
        worst < 1e-7,
        format!("largest change {worst:.1e} over 10 maps"),
    );
}

fn flatness_equivalence(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut agree, mut flat_count) = (0, 0);
    let total = 10_000;
    for trial in 0..total {
        let rank = rng.random_range(2..=6);
        let dim = rank + 4;
        let coeffs: Vec<Complex64> = if trial % 2 == 0 {
            let phase = Complex64::from_polar(1.0, rng.random_range(-PI..PI));
            (0..rank).map(|_| phase * rng.random_range(-1.0..1.0)).collect()
        } else {
            (0..rank)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        };
        let kappa = synthetic_normal(dim, 4, &coeffs);
        let basis: Vec<Vec<f64>> = (0..rank)
            .map(|a| {
                let mut e = vec![0.0; dim];
                e[4 + a] = 1.0;
                e
            })
            .collect();
        let scalar_flat = flatness_defect(&kappa) < 1e-10;
        let ricci_flat = ricci_commutator_defect(&kappa, &basis) < 1e-10;
        agree += usize::from(scalar_flat == ricci_flat);
        flat_count += usize::from(scalar_flat);
    }
    s.record(
        "7",
        "flatness criterion equivalence",
        agree == total,
        format!("{agree}/{total} agree ({flat_count} flat)"),
    );
}

fn s_willmore_six_form(s: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let rank = rng.random_range(2..=6);
        let coeffs: Vec<Complex64> = (0..rank)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let kappa = synthetic_normal(rank + 4, 4, &coeffs);
        let mu = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let d: Vec<Complex64> = kappa.iter().map(|k| mu * k).collect();
        worst = worst.max(six_form_value(&kappa, &d).norm());
    }
    s.record(
        "8",
        "S-Willmore implies Omega = 0",
        worst < 1e-12,
        format!("max |Omega| {worst:.1e} over 1000 fixtures"),
    );
}

fn reduced_equations(s: &mut Suite) {
    let spec = GridSpec::new(33, 33, 2.0, 2.0, false, false)
        .unwrap()
        .with_origin(-1.0, -1.0);
    let all = Mask::all(spec.len());
    let zero = ScalarField::zeros(&spec);
    let constant = |x: f64| ScalarField::from_real(&spec, &vec![x; spec.len()]).unwrap();

    let zeros = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
    let (a0, b0) = reduced_system_residual(&zeros, &zero, &zero, &spec).unwrap();
    let zero_worst = a0.linf(&all).max(b0.linf(&all));

    // Clifford: <kappa, kappa-bar> = 1/8 along one real normal direction, s = 0, constant phase
    let k = [constant(1.0 / 8f64.sqrt()), zero.clone(), zero.clone(), zero.clone()];
    let (a1, b1) = reduced_system_residual(&k, &constant(0.3), &zero, &spec).unwrap();
    let clifford_worst = a1.linf(&all).max(b1.linf(&all));

    let u: Vec<f64> = (0..spec.len())
        .map(|p| spec.coords(p / spec.nv, p % spec.nv).0)
        .collect();
    let k = [
        zero.clone(),
        zero.clone(),
        ScalarField::from_real(&spec, &u).unwrap(),
        zero.clone(),
    ];
    let (a2, b2) = reduced_system_residual(&k, &zero, &zero, &spec).unwrap();
    let first = a2.linf(&all);
    let second_err = (0..spec.len())
        .map(|p| (b2.data[p].re - 2.0 * u[p].abs()).abs())
        .fold(0.0, f64::max);
    s.record(
        "9",
        "reduced integrability equations",
        zero_worst < 1e-12 && clifford_worst < 1e-12 && first < 1e-9 && second_err < 1e-9,
        format!(
            "zero {zero_worst:.1e}, Clifford {clifford_worst:.1e}; k3=u: first {first:.1e}, |second - 2|u|| {second_err:.1e}"
        ),
    );
}

#[test]
fn acceptance_suite() {
    let mut s = Suite { failures: Vec::new() };
    clifford_exact(&mut s);
    energy_oracle(&mut s);
    pinkall(&mut s);
    non_flat_controls(&mut s);
    reduction_witnesses(&mut s);
    mobius_invariance(&mut s);
    flatness_equivalence(&mut s);
    s_willmore_six_form(&mut s);
    reduced_equations(&mut s);
    println!("[N/A ] 10 Willmore two-spheres: no constructive test; ingredients covered by 5, 7 and 8");
    assert!(s.failures.is_empty(), "failed criteria: {:?}", s.failures);
}
