//! Adaptive Dormand-Prince 5(4) integration of the horizontal Hopf frame
//! `(gamma, xi, eta)` in C^m with re-orthonormalization after every step.

use num_complex::Complex64;

use crate::error::{Result, WlabError};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Largest tolerated drift of `|xi|` from 1 before re-projection.
pub const FRAME_DRIFT_LIMIT: f64 = 1e-6;

/// Curvature as a function of arc length.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(untagged)]
pub enum Profile {
    Constant(f64),
    /// Equispaced samples over one period, trigonometrically interpolated.
    Tabulated(Vec<f64>),
}

impl Profile {
    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Constant(c) => *c == 0.0,
            Profile::Tabulated(v) => v.iter().all(|&x| x == 0.0),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            Profile::Constant(c) => Some(*c),
            Profile::Tabulated(_) => None,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Profile::Constant(c) => c.is_finite(),
            Profile::Tabulated(v) => !v.is_empty() && v.iter().all(|x| x.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(WlabError::InvalidParameter {
                name: name.into(),
                reason: "curvature must be finite (and tabulated profiles non-empty)".into(),
            })
        }
    }

    fn evaluator(&self, period: f64) -> Box<dyn Fn(f64) -> f64 + Send + Sync> {
        match self {
            Profile::Constant(c) => {
                let c = *c;
                Box::new(move |_| c)
            }
            Profile::Tabulated(samples) => {
                let interp = TrigInterpolant::new(samples, period);
                Box::new(move |t| interp.eval(t))
            }
        }
    }
}

/// Real trigonometric interpolant through equispaced periodic samples.
#[derive(Debug, Clone)]
struct TrigInterpolant {
    period: f64,
    mean: f64,
    /// (frequency index, cosine coefficient, sine coefficient)
    modes: Vec<(f64, f64, f64)>,
}

impl TrigInterpolant {
    fn new(samples: &[f64], period: f64) -> Self {
        let m = samples.len();
        let mean = samples.iter().sum::<f64>() / m as f64;
        let mut modes = Vec::new();
        for k in 1..=m / 2 {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, s) in samples.iter().enumerate() {
                let ang = std::f64::consts::TAU * (k * j) as f64 / m as f64;
                a += s * ang.cos();
                b += s * ang.sin();
            }
            let mut scale = 2.0 / m as f64;
            if 2 * k == m {
                // the Nyquist mode is shared between +k and -k
                scale = 1.0 / m as f64;
                b = 0.0;
            }
            modes.push((k as f64, a * scale, b * scale));
        }
        Self { period, mean, modes }
    }

    fn eval(&self, t: f64) -> f64 {
        let w = std::f64::consts::TAU * t / self.period;
        self.mean
            + self
                .modes
                .iter()
                .map(|&(k, a, b)| a * (k * w).cos() + b * (k * w).sin())
                .sum::<f64>()
    }
}

/// State of the frame ODE: `m` complex coordinates each for gamma, xi and (optionally) eta.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameState {
    pub gamma: Vec<Complex64>,
    pub xi: Vec<Complex64>,
    pub eta: Option<Vec<Complex64>>,
}

fn hdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn hnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl FrameState {
    /// `gamma = e_1`, `xi = e_2`, `eta = e_3`.
    pub fn standard(m: usize, with_eta: bool) -> Self {
        let e = |k: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); m];
            v[k] = Complex64::new(1.0, 0.0);
            v
        };
        Self {
            gamma: e(0),
            xi: e(1),
            eta: with_eta.then(|| e(2)),
        }
    }

    fn flatten(&self) -> Vec<Complex64> {
        let mut v = self.gamma.clone();
        v.extend_from_slice(&self.xi);
        if let Some(e) = &self.eta {
            v.extend_from_slice(e);
        }
        v
    }

    fn unflatten(&self, v: &[Complex64]) -> Self {
        let m = self.gamma.len();
        Self {
            gamma: v[..m].to_vec(),
            xi: v[m..2 * m].to_vec(),
            eta: self.eta.as_ref().map(|_| v[2 * m..3 * m].to_vec()),
        }
    }

    /// Complex Gram-Schmidt of (gamma, xi, eta), i.e. real Gram-Schmidt of
    /// (gamma, i gamma, xi, i xi, eta).
    fn reorthonormalize(&mut self) {
        let n = hnorm(&self.gamma);
        self.gamma.iter_mut().for_each(|z| *z /= n);
        let c = hdot(&self.xi, &self.gamma);
        self.xi.iter_mut().zip(&self.gamma).for_each(|(x, g)| *x -= c * g);
        let n = hnorm(&self.xi);
        self.xi.iter_mut().for_each(|z| *z /= n);
        if let Some(eta) = &mut self.eta {
            for basis in [&self.gamma, &self.xi] {
                let c = hdot(eta, basis);
                eta.iter_mut().zip(basis.iter()).for_each(|(x, g)| *x -= c * g);
            }
            let n = hnorm(eta);
            eta.iter_mut().for_each(|z| *z /= n);
        }
    }

    /// Largest deviation from orthonormality of the frame.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut vecs = vec![&self.gamma, &self.xi];
        if let Some(e) = &self.eta {
            vecs.push(e);
        }
        let mut worst: f64 = 0.0;
        for (i, a) in vecs.iter().enumerate() {
            for (j, b) in vecs.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((hdot(a, b) - target).norm());
            }
        }
        worst
    }
}

/// Integrates `gamma' = xi`, `xi' = -gamma + i k1 xi + k2 eta`, `eta' = -k2 xi`.
///
/// `eta` is transported with no component along itself or `i xi`, the
/// least-rotation choice among unit sections orthogonal to gamma, i gamma, xi, i xi.
pub struct FrameIntegrator {
    k1: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    k2: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub tol: f64,
    pub steps: usize,
}

impl FrameIntegrator {
    pub fn new(k1: &Profile, k2: &Profile, period: f64) -> Self {
        Self {
            k1: k1.evaluator(period),
            k2: k2.evaluator(period),
            tol: 1e-12,
            steps: 0,
        }
    }

    pub fn curvatures(&self, t: f64) -> (f64, f64) {
        ((self.k1)(t), (self.k2)(t))
    }

    fn rhs(&self, t: f64, s: &FrameState, y: &[Complex64]) -> Vec<Complex64> {
        let m = s.gamma.len();
        let (k1, k2) = ((self.k1)(t), (self.k2)(t));
        let i = Complex64::new(0.0, 1.0);
        let mut out = vec![Complex64::new(0.0, 0.0); y.len()];
        for c in 0..m {
            let (g, x) = (y[c], y[m + c]);
            out[c] = x;
            out[m + c] = -g + i * k1 * x;
            if s.eta.is_some() {
                let e = y[2 * m + c];
                out[m + c] += k2 * e;
                out[2 * m + c] = -k2 * x;
            }
        }
        out
    }

    fn dp_step(&self, t: f64, h: f64, s: &FrameState, y: &[Complex64]) -> (Vec<Complex64>, f64) {
        let mut k: Vec<Vec<Complex64>> = Vec::with_capacity(7);
        for stage in 0..7 {
            let mut yi = y.to_vec();
            for (j, kj) in k.iter().enumerate() {
                let a = A[stage][j];
                if a != 0.0 {
                    yi.iter_mut().zip(kj).for_each(|(v, d)| *v += h * a * d);
                }
            }
            k.push(self.rhs(t + C[stage] * h, s, &yi));
        }
        let mut y5 = y.to_vec();
        let mut err: f64 = 0.0;
        for idx in 0..y.len() {
            let mut d5 = Complex64::new(0.0, 0.0);
            let mut de = Complex64::new(0.0, 0.0);
            for stage in 0..7 {
                d5 += B5[stage] * k[stage][idx];
                de += (B5[stage] - B4[stage]) * k[stage][idx];
            }
            y5[idx] += h * d5;
            err = err.max((h * de).norm() / (self.tol * (1.0 + y[idx].norm())));
        }
        (y5, err)
    }

    /// Advances `state` from `t0` to `t1` exactly.
    pub fn advance(&mut self, state: &mut FrameState, t0: f64, t1: f64) -> Result<()> {
        let mut t = t0;
        let mut h = ((t1 - t0) / 4.0).min(0.05);
        while t < t1 {
            let last = t + h >= t1;
            let step = if last { t1 - t } else { h };
            let y = state.flatten();
            let (y_new, err) = self.dp_step(t, step, state, &y);
            if err <= 1.0 {
                let mut next = state.unflatten(&y_new);
                let drift = (hnorm(&next.xi) - 1.0).abs();
                if drift > FRAME_DRIFT_LIMIT {
                    return Err(WlabError::FrameDegeneracy {
                        t,
                        step: self.steps,
                        detail: format!("|xi| drifted by {drift:.3e} over a step of size {step:.3e}"),
                    });
                }
                next.reorthonormalize();
                *state = next;
                t = if last { t1 } else { t + step };
                self.steps += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
            if h < 1e-12 * (1.0 + t.abs()) {
                return Err(WlabError::FrameDegeneracy {
                    t,
                    step: self.steps,
                    detail: format!("step size underflow ({h:.3e})"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_interpolant_reproduces_samples_and_low_modes() {
        let period = 3.0;
        let f = |t: f64| {
            1.0 + (std::f64::consts::TAU * t / period).cos() - 0.5 * (2.0 * std::f64::consts::TAU * t / period).sin()
        };
        let samples: Vec<f64> = (0..8).map(|j| f(j as f64 * period / 8.0)).collect();
        let interp = TrigInterpolant::new(&samples, period);
        for t in [0.0, 0.3, 1.1, 2.9] {
            assert!((interp.eval(t) - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_curvature_gives_a_great_circle() {
        let mut s = FrameState::standard(2, false);
        let mut ode = FrameIntegrator::new(&Profile::Constant(0.0), &Profile::Constant(0.0), 1.0);
        ode.advance(&mut s, 0.0, 1.3).unwrap();
        assert!((s.gamma[0].re - 1.3f64.cos()).abs() < 1e-11);
        assert!((s.gamma[1].re - 1.3f64.sin()).abs() < 1e-11);
        assert!(s.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn frame_stays_orthonormal_with_torsion() {
        let mut s = FrameState::standard(3, true);
        let mut ode = FrameIntegrator::new(
            &Profile::Constant(0.7),
            &Profile::Tabulated(vec![0.5, 1.0, 0.2, 0.1]),
            2.0,
        );
        ode.advance(&mut s, 0.0, 20.0).unwrap();
        assert!(s.orthonormality_defect() < 1e-13);
    }
}
