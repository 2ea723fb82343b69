//! Hopf surfaces `x = e^{i theta} gamma(t)` over horizontal curves in S^{2m-1} ⊂ C^m.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::ode::{FrameIntegrator, FrameState, Profile};
use crate::calculus::GridSpec;
use crate::chart::Chart;
use crate::error::{Result, WlabError};

/// Largest denominator accepted when testing frequency ratios for rationality.
pub const MAX_DENOMINATOR: u64 = 64;
/// Tolerance on the monodromy defect `|gamma(T) - e^{i phi} gamma(0)|`.
pub const CLOSURE_TOL: f64 = 1e-8;
const CONSTRAINT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HopfChartResult {
    #[serde(skip)]
    pub chart: Chart,
    pub closed: bool,
    /// Length of the t-interval covered by the chart (the closing period when closed).
    pub closing_period: f64,
    /// `phi` with `gamma(T) = e^{i phi} gamma(0)`, wrapped to (-pi, pi].
    pub lift_monodromy_phase: f64,
    /// `2 pi ∫ ((k1^2 + k2^2)/4 + 1) dt` over the chart's t-interval.
    pub closed_form_energy: f64,
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

fn rational_approx(r: f64) -> Option<(i64, u64)> {
    (1..=MAX_DENOMINATOR).find_map(|q| {
        let p = (r * q as f64).round();
        ((r - p / q as f64).abs() < 1e-9 * r.abs().max(1.0)).then_some((p as i64, q))
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Smallest `T > 0` with all `(f_i - f_0) T ∈ 2 pi Z`, if the frequency
/// differences are rationally related with small denominators. Returns
/// `(T, phi)` with `phi = f_0 T` wrapped.
pub fn closing_period(freqs: &[f64]) -> Option<(f64, f64)> {
    let diffs: Vec<f64> = freqs
        .iter()
        .skip(1)
        .map(|f| f - freqs[0])
        .filter(|d| d.abs() > 1e-12)
        .collect();
    let d_ref = *diffs.first()?;
    let mut lcm = 1u64;
    for d in &diffs {
        let (_, q) = rational_approx(d / d_ref)?;
        lcm = lcm / gcd(lcm, q) * q;
        if lcm > MAX_DENOMINATOR {
            return None;
        }
    }
    let t = TAU * lcm as f64 / d_ref.abs();
    Some((t, wrap_angle(freqs[0] * t)))
}

/// `(Re z_1, Im z_1, ..., Re z_m, Im z_m)` of `e^{i v} gamma`.
fn hopf_point(gamma: &[Complex64], v: f64) -> Vec<f64> {
    let rot = Complex64::from_polar(1.0, v);
    gamma
        .iter()
        .flat_map(|z| {
            let w = rot * z;
            [w.re, w.im]
        })
        .collect()
}

fn hopf_grid(nu: usize, nv: usize, length: f64, closed: bool, phase: f64) -> Result<GridSpec> {
    if closed {
        Ok(GridSpec::periodic(nu, nv, length, TAU)?.with_shear(-phase / length))
    } else {
        GridSpec::new(nu, nv, length, TAU, false, true)
    }
}

fn assemble(label: &str, spec: GridSpec, gammas: &[Vec<Complex64>]) -> Result<Chart> {
    let m = gammas[0].len();
    let mut points = Vec::with_capacity(spec.len() * 2 * m);
    for (i, g) in gammas.iter().enumerate() {
        for j in 0..spec.nv {
            let (_, v) = spec.coords(i, j);
            points.extend(hopf_point(g, v));
        }
    }
    Chart::new(label, spec, 2 * m - 1, points)
}

/// Curvatures `(k1, k2)` of the homogeneous horizontal curve `(a_j e^{i lambda_j t})`.
pub fn homogeneous_curvatures(lambdas: &[f64], amps: &[f64]) -> (f64, f64) {
    let k1: f64 = lambdas.iter().zip(amps).map(|(l, a)| a * a * l.powi(3)).sum();
    // xi' + gamma - i k1 xi, evaluated at t = 0
    let k2_sq: f64 = lambdas
        .iter()
        .zip(amps)
        .map(|(l, a)| (a * (1.0 - l * l + k1 * l)).powi(2))
        .sum();
    (k1, k2_sq.sqrt())
}

/// Hopf surface over `gamma(t) = (a_j e^{i lambda_j t})_j`.
pub fn homogeneous_hopf(label: &str, lambdas: &[f64], amps: &[f64], nu: usize, nv: usize) -> Result<HopfChartResult> {
    if lambdas.len() != amps.len() || lambdas.len() < 2 {
        return Err(WlabError::InvalidParameter {
            name: "lambdas".into(),
            reason: "need matching lambdas and amps with at least two entries".into(),
        });
    }
    let moment = |k: i32| -> f64 { lambdas.iter().zip(amps).map(|(l, a)| a * a * l.powi(k)).sum() };
    for (k, target, what) in [
        (0, 1.0, "sum a^2 = 1"),
        (1, 0.0, "sum a^2 lambda = 0"),
        (2, 1.0, "sum a^2 lambda^2 = 1"),
    ] {
        let got = moment(k);
        if (got - target).abs() > CONSTRAINT_TOL {
            return Err(WlabError::Constraint(format!("{what} violated: got {got:.15}")));
        }
    }
    let active: Vec<f64> = lambdas
        .iter()
        .zip(amps)
        .filter(|(_, a)| a.abs() > 1e-14)
        .map(|(l, _)| *l)
        .collect();
    let (length, closed, phase) = match closing_period(&active) {
        Some((t, phi)) => (t, true, phi),
        None => {
            let d = active.iter().skip(1).map(|f| (f - active[0]).abs()).fold(0.0, f64::max);
            (TAU / d, false, 0.0)
        }
    };
    let spec = hopf_grid(nu, nv, length, closed, phase)?;
    let gammas: Vec<Vec<Complex64>> = (0..nu)
        .map(|i| {
            let (t, _) = spec.coords(i, 0);
            lambdas
                .iter()
                .zip(amps)
                .map(|(l, a)| Complex64::from_polar(*a, l * t))
                .collect()
        })
        .collect();
    let chart = assemble(label, spec, &gammas)?;
    let (k1, k2) = homogeneous_curvatures(lambdas, amps);
    Ok(HopfChartResult {
        chart,
        closed,
        closing_period: length,
        lift_monodromy_phase: phase,
        closed_form_energy: TAU * length * ((k1 * k1 + k2 * k2) / 4.0 + 1.0),
    })
}

/// Roots of `lambda^2 - c lambda - 1 = 0` and the weights of the horizontal unit-speed curve.
pub fn pinkall_data(c: f64) -> ([f64; 2], [f64; 2]) {
    let r = (c * c + 4.0).sqrt();
    let (l1, l2) = ((c + r) / 2.0, (c - r) / 2.0);
    let a1 = (-l2 / (l1 - l2)).sqrt();
    let a2 = (l1 / (l1 - l2)).sqrt();
    ([l1, l2], [a1, a2])
}

/// Hopf torus in S^3 over the curve of constant geodesic curvature `c`, in closed form.
pub fn pinkall_hopf_torus(c: f64, nu: usize, nv: usize) -> Result<HopfChartResult> {
    if !c.is_finite() {
        return Err(WlabError::InvalidParameter {
            name: "c".into(),
            reason: "must be finite".into(),
        });
    }
    let (l, a) = pinkall_data(c);
    homogeneous_hopf("pinkall_hopf_torus", &l, &a, nu, nv)
}

/// Non-negative squared weights solving the moment system for three frequencies.
pub fn complete_amplitudes(lambdas: [f64; 3]) -> Result<[f64; 3]> {
    let v = DMatrix::from_fn(3, 3, |r, c| lambdas[c].powi(r as i32));
    let rhs = DVector::from_vec(vec![1.0, 0.0, 1.0]);
    let sol = v
        .lu()
        .solve(&rhs)
        .ok_or_else(|| WlabError::Constraint("lambdas must be distinct".into()))?;
    if sol.iter().any(|&w| w < -CONSTRAINT_TOL) {
        return Err(WlabError::Constraint(format!(
            "no admissible weights for these lambdas (squared weights {:?})",
            sol.as_slice()
        )));
    }
    Ok([sol[0].max(0.0).sqrt(), sol[1].max(0.0).sqrt(), sol[2].max(0.0).sqrt()])
}

/// Homogeneous Hopf surface in S^5 over a three-frequency curve in CP^2.
pub fn homogeneous_cp2_hopf(
    lambdas: [f64; 3],
    amps: Option<[f64; 3]>,
    nu: usize,
    nv: usize,
) -> Result<HopfChartResult> {
    let amps = match amps {
        Some(a) => a,
        None => complete_amplitudes(lambdas)?,
    };
    homogeneous_hopf("homogeneous_cp2_hopf", &lambdas, &amps, nu, nv)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct CurveSpec {
    pub k1: Profile,
    pub k2: Profile,
    /// Period of the curvature data; derived from the frame's spectrum when
    /// omitted for constant curvatures.
    pub t_period: Option<f64>,
    /// `m` for curves in S^{2m-1} ⊂ C^m.
    pub ambient_complex_dim: usize,
}

/// Frequencies of `gamma` for constant curvatures: eigenvalues of the
/// Hermitian generator `-i M` of the frame ODE with nonzero weight on gamma.
pub fn constant_curvature_frequencies(k1: f64, k2: f64, with_eta: bool) -> Vec<f64> {
    let n = if with_eta { 3 } else { 2 };
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut m = DMatrix::from_element(n, n, z);
    m[(0, 1)] = one;
    m[(1, 0)] = -one;
    m[(1, 1)] = i * k1;
    if with_eta {
        m[(1, 2)] = one * k2;
        m[(2, 1)] = -one * k2;
    }
    let h = m.map(|x| -i * x);
    let eig = h.symmetric_eigen();
    let mut out: Vec<f64> = (0..n)
        .filter(|&j| eig.eigenvectors[(0, j)].norm() > 1e-12)
        .map(|j| eig.eigenvalues[j])
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn monodromy(g0: &FrameState, g: &FrameState) -> (f64, f64) {
    let c: Complex64 = g.gamma.iter().zip(&g0.gamma).map(|(a, b)| a * b.conj()).sum();
    let rot = Complex64::from_polar(1.0, c.arg());
    let defect = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - rot * y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    (c.arg(), defect(&g.gamma, &g0.gamma) + defect(&g.xi, &g0.xi))
}

/// Hopf surface over the horizontal curve with the given curvatures,
/// integrated from `gamma = e_1`, `xi = e_2`, `eta = e_3`.
pub fn hopf_from_curvature(curve: &CurveSpec, nu: usize, nv: usize) -> Result<HopfChartResult> {
    curve.k1.validate("k1")?;
    curve.k2.validate("k2")?;
    let with_eta = !curve.k2.is_zero();
    let m = curve.ambient_complex_dim;
    if m < 2 || (with_eta && m < 3) {
        return Err(WlabError::InvalidParameter {
            name: "ambient_complex_dim".into(),
            reason: format!("{m} is too small (need >= 2, or >= 3 when k2 is not identically zero)"),
        });
    }
    let period = match (curve.t_period, curve.k1.constant_value(), curve.k2.constant_value()) {
        (Some(t), _, _) => t,
        (None, Some(k1), Some(k2)) => {
            let freqs = constant_curvature_frequencies(k1, k2, with_eta);
            closing_period(&freqs)
                .map(|(t, _)| t)
                .ok_or_else(|| WlabError::InvalidParameter {
                    name: "t_period".into(),
                    reason: "curve does not close; give t_period explicitly".into(),
                })?
        }
        (None, _, _) => {
            return Err(WlabError::InvalidParameter {
                name: "t_period".into(),
                reason: "required for tabulated curvature".into(),
            })
        }
    };
    if !(period > 0.0 && period.is_finite()) {
        return Err(WlabError::InvalidParameter {
            name: "t_period".into(),
            reason: format!("must be positive, got {period}"),
        });
    }

    let start = FrameState::standard(m, with_eta);
    let mut ode = FrameIntegrator::new(&curve.k1, &curve.k2, period);
    let mut state = start.clone();
    let mut closure = None;
    for mult in 1..=MAX_DENOMINATOR {
        let t0 = (mult - 1) as f64 * period;
        ode.advance(&mut state, t0, t0 + period)?;
        let (phi, defect) = monodromy(&start, &state);
        if defect < CLOSURE_TOL {
            closure = Some((mult as f64 * period, phi));
            break;
        }
    }
    let (length, closed, phase) = match closure {
        Some((t, phi)) => (t, true, wrap_angle(phi)),
        None => (period, false, 0.0),
    };

    let spec = hopf_grid(nu, nv, length, closed, phase)?;
    let mut ode = FrameIntegrator::new(&curve.k1, &curve.k2, period);
    let mut state = start;
    let mut gammas = Vec::with_capacity(nu);
    let mut t = 0.0;
    for i in 0..nu {
        let (ti, _) = spec.coords(i, 0);
        ode.advance(&mut state, t, ti)?;
        t = ti;
        gammas.push(state.gamma.clone());
    }
    let chart = assemble("hopf_from_curvature", spec, &gammas)?;

    // periodic trapezoid rule on the curvature data, spectrally accurate
    let samples = 4096;
    let eval = FrameIntegrator::new(&curve.k1, &curve.k2, period);
    let dt = length / samples as f64;
    let density: f64 = (0..samples)
        .map(|s| {
            let ts = s as f64 * dt;
            let (a, b) = eval.curvatures(ts);
            (a * a + b * b) / 4.0 + 1.0
        })
        .sum::<f64>()
        * dt;
    Ok(HopfChartResult {
        chart,
        closed,
        closing_period: length,
        lift_monodromy_phase: phase,
        closed_form_energy: TAU * density,
    })
}
