//! Fields on rectangular parameter grids and the operators acting on them.
//!
//! A grid point `(i, j)` sits at `u = u0 + i*hu` and
//! `v = v0 + j*hv + shear*(u - u0)`. The shear lets a torus whose lattice is
//! not rectangular in the conformal coordinate (Hopf tori with a monodromy
//! phase, rotated coordinates) still be stored on a doubly periodic index grid.
//! Periodic axes are differentiated spectrally, non-periodic axes with
//! centered finite differences of configurable even order.

mod convergence;
mod stencil;

pub use convergence::{convergence_order, fit_convergence, ConvergenceClass, ConvergenceFit, ROUNDOFF_FLOOR};
pub use stencil::{fornberg_weights, FirstDerivativeStencil};

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Result, WlabError};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cells excluded next to each non-periodic boundary for quantities built
/// from one derivative.
pub const BOUNDARY_MARGIN: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
    /// Period (periodic axis) or extent (non-periodic axis) along u.
    pub lu: f64,
    pub lv: f64,
    pub periodic_u: bool,
    pub periodic_v: bool,
    #[serde(default)]
    pub u0: f64,
    #[serde(default)]
    pub v0: f64,
    /// `dv/du` drift of the index grid; see the module docs.
    #[serde(default)]
    pub shear: f64,
    #[serde(default = "default_fd_order")]
    pub fd_order: usize,
}

fn default_fd_order() -> usize {
    6
}

impl GridSpec {
    pub fn new(nu: usize, nv: usize, lu: f64, lv: f64, periodic_u: bool, periodic_v: bool) -> Result<Self> {
        let spec = Self {
            nu,
            nv,
            lu,
            lv,
            periodic_u,
            periodic_v,
            u0: 0.0,
            v0: 0.0,
            shear: 0.0,
            fd_order: default_fd_order(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn periodic(nu: usize, nv: usize, lu: f64, lv: f64) -> Result<Self> {
        Self::new(nu, nv, lu, lv, true, true)
    }

    pub fn with_origin(mut self, u0: f64, v0: f64) -> Self {
        self.u0 = u0;
        self.v0 = v0;
        self
    }

    pub fn with_shear(mut self, shear: f64) -> Self {
        self.shear = shear;
        self
    }

    pub fn with_fd_order(mut self, order: usize) -> Self {
        self.fd_order = order;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 8 || self.nv < 8 {
            return Err(WlabError::InvalidGrid(format!(
                "grid sizes must be >= 8, got {}x{}",
                self.nu, self.nv
            )));
        }
        if !(self.lu > 0.0 && self.lv > 0.0 && self.lu.is_finite() && self.lv.is_finite()) {
            return Err(WlabError::InvalidGrid(format!(
                "extents must be positive, got {} x {}",
                self.lu, self.lv
            )));
        }
        if self.shear != 0.0 && !self.periodic_v {
            return Err(WlabError::InvalidGrid("shear requires a periodic v axis".into()));
        }
        if self.fd_order < 2 || !self.fd_order.is_multiple_of(2) {
            return Err(WlabError::InvalidGrid(format!(
                "finite-difference order must be even and >= 2, got {}",
                self.fd_order
            )));
        }
        let needs_fd = !(self.periodic_u && self.periodic_v);
        let short = (!self.periodic_u && self.nu <= self.fd_order) || (!self.periodic_v && self.nv <= self.fd_order);
        if needs_fd && short {
            return Err(WlabError::InvalidGrid(
                "non-periodic axis shorter than the stencil".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fully_periodic(&self) -> bool {
        self.periodic_u && self.periodic_v
    }

    pub fn hu(&self) -> f64 {
        if self.periodic_u {
            self.lu / self.nu as f64
        } else {
            self.lu / (self.nu - 1) as f64
        }
    }

    pub fn hv(&self) -> f64 {
        if self.periodic_v {
            self.lv / self.nv as f64
        } else {
            self.lv / (self.nv - 1) as f64
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    /// Physical coordinates `(u, v)` of grid point `(i, j)`.
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        let du = i as f64 * self.hu();
        (self.u0 + du, self.v0 + j as f64 * self.hv() + self.shear * du)
    }

    /// Measure of the parameter domain (the shear has unit Jacobian).
    pub fn area(&self) -> f64 {
        self.lu * self.lv
    }

    /// Valid everywhere except `margin` cells next to non-periodic boundaries.
    /// Margin for residuals built from composed derivatives: two stencil
    /// half-widths, since each composition carries the one-sided error inward.
    pub fn residual_margin(&self) -> usize {
        self.fd_order.max(BOUNDARY_MARGIN)
    }

    pub fn interior_mask(&self, margin: usize) -> Mask {
        let keep = |k: usize, n: usize, periodic: bool| periodic || (k >= margin && k + margin < n);
        let mut m = Vec::with_capacity(self.len());
        for i in 0..self.nu {
            for j in 0..self.nv {
                m.push(keep(i, self.nu, self.periodic_u) && keep(j, self.nv, self.periodic_v));
            }
        }
        Mask(m)
    }

    /// Samples a complex function of the physical coordinates.
    pub fn sample(&self, f: impl Fn(f64, f64) -> Complex64 + Sync + Send) -> ScalarField {
        let data = (0..self.len())
            .into_par_iter()
            .map(|p| {
                let (u, v) = self.coords(p / self.nv, p % self.nv);
                f(u, v)
            })
            .collect();
        ScalarField {
            nu: self.nu,
            nv: self.nv,
            data,
        }
    }

    pub fn sample_real(&self, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> ScalarField {
        self.sample(|u, v| Complex64::new(f(u, v), 0.0))
    }

    fn check_shape(&self, nu: usize, nv: usize) -> Result<()> {
        if nu != self.nu || nv != self.nv {
            return Err(WlabError::ShapeMismatch {
                expected: (self.nu, self.nv),
                got: (nu, nv),
            });
        }
        Ok(())
    }
}

/// Per-point validity flags; `true` means the point enters norms and reductions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask(pub Vec<bool>);

impl Mask {
    pub fn all(len: usize) -> Self {
        Self(vec![true; len])
    }

    pub fn and(&self, other: &Mask) -> Mask {
        Mask(self.0.iter().zip(&other.0).map(|(a, b)| *a && *b).collect())
    }

    pub fn valid_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn masked_fraction(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        1.0 - self.valid_count() as f64 / self.0.len() as f64
    }

    pub fn is_valid(&self, p: usize) -> bool {
        self.0[p]
    }
}

/// Complex scalar per grid point, row-major in `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nu: usize,
    pub nv: usize,
    pub data: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self {
            nu: spec.nu,
            nv: spec.nv,
            data: vec![Complex64::new(0.0, 0.0); spec.len()],
        }
    }

    pub fn from_vec(spec: &GridSpec, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != spec.len() {
            return Err(WlabError::DimensionMismatch {
                expected: spec.len(),
                got: data.len(),
            });
        }
        Ok(Self {
            nu: spec.nu,
            nv: spec.nv,
            data,
        })
    }

    pub fn from_real(spec: &GridSpec, data: &[f64]) -> Result<Self> {
        Self::from_vec(spec, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            nu: self.nu,
            nv: self.nv,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        Self {
            nu: self.nu,
            nv: self.nv,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.re).collect()
    }

    /// Max modulus over valid points; 0 when nothing is valid.
    pub fn linf(&self, mask: &Mask) -> f64 {
        self.data
            .iter()
            .zip(&mask.0)
            .filter(|(_, &ok)| ok)
            .map(|(z, _)| z.norm())
            .fold(0.0, f64::max)
    }

    /// Min modulus over valid points; `f64::INFINITY` when nothing is valid.
    pub fn min_abs(&self, mask: &Mask) -> f64 {
        self.data
            .iter()
            .zip(&mask.0)
            .filter(|(_, &ok)| ok)
            .map(|(z, _)| z.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// `sqrt(integral of |f|^2)` with masked points contributing zero.
    pub fn l2(&self, spec: &GridSpec, mask: &Mask) -> f64 {
        let weights = quadrature_weights(spec);
        self.data
            .iter()
            .zip(&mask.0)
            .zip(&weights)
            .filter(|((_, &ok), _)| ok)
            .map(|((z, _), w)| z.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }
}

/// One complex field per ambient component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub nu: usize,
    pub nv: usize,
    pub comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn len(&self) -> usize {
        self.nu * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Ambient vector at flat index `p`.
    pub fn at(&self, p: usize) -> Vec<Complex64> {
        self.comps.iter().map(|c| c.data[p]).collect()
    }

    /// Builds a field from a per-point function returning `dim` components.
    pub fn from_fn(spec: &GridSpec, dim: usize, f: impl Fn(usize) -> Vec<Complex64> + Sync + Send) -> Self {
        let points: Vec<Vec<Complex64>> = (0..spec.len()).into_par_iter().map(f).collect();
        Self::from_points(spec, dim, &points)
    }

    pub fn from_points(spec: &GridSpec, dim: usize, points: &[Vec<Complex64>]) -> Self {
        let mut comps = vec![ScalarField::zeros(spec); dim];
        for (p, v) in points.iter().enumerate() {
            debug_assert_eq!(v.len(), dim);
            for (c, x) in comps.iter_mut().zip(v) {
                c.data[p] = *x;
            }
        }
        Self {
            nu: spec.nu,
            nv: spec.nv,
            comps,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            nu: self.nu,
            nv: self.nv,
            comps: self.comps.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Pointwise scaling by a scalar field.
    pub fn scale_by(&self, s: &ScalarField) -> Self {
        Self {
            nu: self.nu,
            nv: self.nv,
            comps: self.comps.iter().map(|c| c.zip_map(s, |a, b| a * b)).collect(),
        }
    }
}

#[derive(Clone)]
enum AxisOp {
    Spectral {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        /// `i k 2 pi / L` per FFT bin, Nyquist zeroed.
        multipliers: Vec<Complex64>,
    },
    FiniteDifference {
        stencil: FirstDerivativeStencil,
        h: f64,
    },
}

impl AxisOp {
    fn new(n: usize, period_or_extent: f64, periodic: bool, fd_order: usize, h: f64) -> Self {
        if periodic {
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(n);
            let inverse = planner.plan_fft_inverse(n);
            let multipliers = (0..n)
                .map(|k| {
                    let kk = if 2 * k < n {
                        k as f64
                    } else if 2 * k == n {
                        0.0
                    } else {
                        k as f64 - n as f64
                    };
                    I * (2.0 * PI * kk / period_or_extent) / n as f64
                })
                .collect();
            AxisOp::Spectral {
                forward,
                inverse,
                multipliers,
            }
        } else {
            AxisOp::FiniteDifference {
                stencil: FirstDerivativeStencil::new(n, fd_order),
                h,
            }
        }
    }

    /// Derivative of one line. Spectral lines differentiate the real and
    /// imaginary parts separately so the operator commutes with conjugation
    /// bit for bit.
    fn apply_line(&self, line: &[Complex64], out: &mut [Complex64]) {
        match self {
            AxisOp::FiniteDifference { stencil, h } => stencil.apply(line, *h, out),
            AxisOp::Spectral {
                forward,
                inverse,
                multipliers,
            } => {
                let n = line.len();
                let mut re: Vec<Complex64> = line.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
                let mut im: Vec<Complex64> = line.iter().map(|z| Complex64::new(z.im, 0.0)).collect();
                let mut scratch = vec![
                    Complex64::new(0.0, 0.0);
                    forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())
                ];
                for buf in [&mut re, &mut im] {
                    forward.process_with_scratch(buf, &mut scratch);
                    for (b, m) in buf.iter_mut().zip(multipliers) {
                        *b *= m;
                    }
                    inverse.process_with_scratch(buf, &mut scratch);
                }
                for k in 0..n {
                    out[k] = Complex64::new(re[k].re, im[k].re);
                }
            }
        }
    }
}

/// Differential operators bound to one grid; build once and reuse.
#[derive(Clone)]
pub struct GridOps {
    spec: GridSpec,
    u_axis: AxisOp,
    v_axis: AxisOp,
}

impl std::fmt::Debug for GridOps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GridOps").field("spec", &self.spec).finish()
    }
}

impl GridOps {
    pub fn new(spec: &GridSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec: spec.clone(),
            u_axis: AxisOp::new(spec.nu, spec.lu, spec.periodic_u, spec.fd_order, spec.hu()),
            v_axis: AxisOp::new(spec.nv, spec.lv, spec.periodic_v, spec.fd_order, spec.hv()),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Derivative along the first index direction (`v` drifting with the shear).
    fn d_index_u(&self, f: &ScalarField) -> ScalarField {
        let (nu, nv) = (self.spec.nu, self.spec.nv);
        let columns: Vec<Vec<Complex64>> = (0..nv)
            .into_par_iter()
            .map(|j| {
                let line: Vec<Complex64> = (0..nu).map(|i| f.data[i * nv + j]).collect();
                let mut out = vec![Complex64::new(0.0, 0.0); nu];
                self.u_axis.apply_line(&line, &mut out);
                out
            })
            .collect();
        let mut data = vec![Complex64::new(0.0, 0.0); nu * nv];
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                data[i * nv + j] = *x;
            }
        }
        ScalarField { nu, nv, data }
    }

    fn d_index_v(&self, f: &ScalarField) -> ScalarField {
        let nv = self.spec.nv;
        let mut data = vec![Complex64::new(0.0, 0.0); f.data.len()];
        data.par_chunks_mut(nv)
            .zip(f.data.par_chunks(nv))
            .for_each(|(out, line)| self.v_axis.apply_line(line, out));
        ScalarField {
            nu: self.spec.nu,
            nv,
            data,
        }
    }

    /// `(d/du at fixed v, d/dv)`.
    pub fn grad(&self, f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
        self.spec.check_shape(f.nu, f.nv)?;
        let fv = self.d_index_v(f);
        let mut fu = self.d_index_u(f);
        if self.spec.shear != 0.0 {
            let s = self.spec.shear;
            for (a, b) in fu.data.iter_mut().zip(&fv.data) {
                *a -= b * s;
            }
        }
        Ok((fu, fv))
    }

    pub fn du(&self, f: &ScalarField) -> Result<ScalarField> {
        Ok(self.grad(f)?.0)
    }

    pub fn dv(&self, f: &ScalarField) -> Result<ScalarField> {
        self.spec.check_shape(f.nu, f.nv)?;
        Ok(self.d_index_v(f))
    }

    /// Both Wirtinger derivatives `(f_z, f_zbar)` from one gradient evaluation.
    pub fn wirtinger(&self, f: &ScalarField) -> Result<(ScalarField, ScalarField)> {
        let (fu, fv) = self.grad(f)?;
        let dz = fu.zip_map(&fv, |a, b| Complex64::new(0.5 * (a.re + b.im), 0.5 * (a.im - b.re)));
        let dzbar = fu.zip_map(&fv, |a, b| Complex64::new(0.5 * (a.re - b.im), 0.5 * (a.im + b.re)));
        Ok((dz, dzbar))
    }

    /// `f_z = (f_u - i f_v) / 2`.
    pub fn dz(&self, f: &ScalarField) -> Result<ScalarField> {
        Ok(self.wirtinger(f)?.0)
    }

    /// `f_zbar = (f_u + i f_v) / 2`.
    pub fn dzbar(&self, f: &ScalarField) -> Result<ScalarField> {
        Ok(self.wirtinger(f)?.1)
    }

    pub fn dz_vec(&self, f: &VectorField) -> Result<VectorField> {
        self.map_vec(f, |s| self.dz(s))
    }

    pub fn dzbar_vec(&self, f: &VectorField) -> Result<VectorField> {
        self.map_vec(f, |s| self.dzbar(s))
    }

    pub fn wirtinger_vec(&self, f: &VectorField) -> Result<(VectorField, VectorField)> {
        let mut dz = Vec::with_capacity(f.dim());
        let mut dzbar = Vec::with_capacity(f.dim());
        for c in &f.comps {
            let (a, b) = self.wirtinger(c)?;
            dz.push(a);
            dzbar.push(b);
        }
        Ok((
            VectorField {
                nu: f.nu,
                nv: f.nv,
                comps: dz,
            },
            VectorField {
                nu: f.nu,
                nv: f.nv,
                comps: dzbar,
            },
        ))
    }

    fn map_vec(&self, f: &VectorField, op: impl Fn(&ScalarField) -> Result<ScalarField>) -> Result<VectorField> {
        let comps = f.comps.iter().map(op).collect::<Result<Vec<_>>>()?;
        Ok(VectorField {
            nu: f.nu,
            nv: f.nv,
            comps,
        })
    }

    /// `f_uu + f_vv = 4 f_{z zbar}`.
    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        let fzzbar = self.dz(&self.dzbar(f)?)?;
        Ok(fzzbar.map(|z| z * 4.0))
    }

    pub fn integrate(&self, f: &ScalarField) -> Result<Complex64> {
        integrate(f, &self.spec)
    }
}

/// Equal weights on periodic axes, trapezoidal end weights otherwise.
pub fn quadrature_weights(spec: &GridSpec) -> Vec<f64> {
    let axis = |n: usize, h: f64, periodic: bool| -> Vec<f64> {
        (0..n)
            .map(|k| {
                if !periodic && (k == 0 || k == n - 1) {
                    0.5 * h
                } else {
                    h
                }
            })
            .collect()
    };
    let wu = axis(spec.nu, spec.hu(), spec.periodic_u);
    let wv = axis(spec.nv, spec.hv(), spec.periodic_v);
    let mut w = Vec::with_capacity(spec.len());
    for a in &wu {
        for b in &wv {
            w.push(a * b);
        }
    }
    w
}

pub fn integrate(f: &ScalarField, spec: &GridSpec) -> Result<Complex64> {
    spec.check_shape(f.nu, f.nv)?;
    Ok(f.data.iter().zip(quadrature_weights(spec)).map(|(z, w)| z * w).sum())
}

pub fn diff_z(f: &ScalarField, spec: &GridSpec) -> Result<ScalarField> {
    GridOps::new(spec)?.dz(f)
}

pub fn diff_zbar(f: &ScalarField, spec: &GridSpec) -> Result<ScalarField> {
    GridOps::new(spec)?.dzbar(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::periodic(4, 16, 1.0, 1.0).is_err());
        assert!(GridSpec::periodic(16, 16, 0.0, 1.0).is_err());
        assert!(GridSpec::new(16, 16, 1.0, 1.0, true, false)
            .unwrap()
            .with_shear(0.5)
            .validate()
            .is_err());
        assert!(GridSpec::periodic(16, 16, 1.0, 1.0)
            .unwrap()
            .with_fd_order(5)
            .validate()
            .is_err());
    }

    #[test]
    fn fourier_mode_is_an_eigenfunction_of_dz() {
        let lu = 3.0;
        let spec = GridSpec::periodic(32, 16, lu, 2.0).unwrap();
        let f = spec.sample(|u, _| Complex64::from_polar(1.0, TAU * u / lu));
        let fz = diff_z(&f, &spec).unwrap();
        let expected = f.map(|z| z * I * (PI / lu));
        assert!(max_diff(&fz, &expected) < 1e-12);
    }

    #[test]
    fn constants_differentiate_to_zero() {
        for periodic_u in [true, false] {
            let spec = GridSpec::new(24, 16, 2.0, TAU, periodic_u, true).unwrap();
            let f = spec.sample(|_, _| Complex64::new(2.5, -1.0));
            let (fz, fzbar) = GridOps::new(&spec).unwrap().wirtinger(&f).unwrap();
            assert!(fz.linf(&Mask::all(spec.len())) < 1e-12);
            assert!(fzbar.linf(&Mask::all(spec.len())) < 1e-12);
        }
    }

    #[test]
    fn mixed_wirtinger_is_quarter_laplacian() {
        let (lu, lv) = (TAU, 3.0);
        let spec = GridSpec::periodic(32, 32, lu, lv).unwrap();
        let ops = GridOps::new(&spec).unwrap();
        let a = TAU / lu;
        let b = TAU / lv;
        let f = spec.sample_real(|u, v| (a * u).sin() * (b * v).cos());
        let fzzbar = ops.dz(&ops.dzbar(&f).unwrap()).unwrap();
        let expected = f.map(|z| z * (-(a * a + b * b) / 4.0));
        assert!(max_diff(&fzzbar, &expected) < 1e-10);
    }

    #[test]
    fn shear_matches_the_chain_rule() {
        // f(u,v) = cos(u) sin(v) stored on a sheared periodic lattice
        let spec = GridSpec::periodic(32, 32, TAU, TAU).unwrap().with_shear(1.0);
        let ops = GridOps::new(&spec).unwrap();
        let f = spec.sample_real(|u, v| u.cos() * v.sin());
        let (fu, fv) = ops.grad(&f).unwrap();
        let eu = spec.sample_real(|u, v| -u.sin() * v.sin());
        let ev = spec.sample_real(|u, v| u.cos() * v.cos());
        assert!(max_diff(&fu, &eu) < 1e-11);
        assert!(max_diff(&fv, &ev) < 1e-11);
    }

    #[test]
    fn finite_differences_converge_at_sixth_order() {
        let err = |n: usize| {
            let spec = GridSpec::new(n, 8, 2.0, TAU, false, true)
                .unwrap()
                .with_origin(-1.0, 0.0);
            let f = spec.sample_real(|u, _| (1.3 * u).exp());
            let fu = GridOps::new(&spec).unwrap().du(&f).unwrap();
            let e = spec.sample_real(|u, _| 1.3 * (1.3 * u).exp());
            max_diff(&fu, &e)
        };
        let ratio = err(40) / err(80);
        assert!(ratio > 2f64.powf(5.5), "ratio {ratio}");
    }

    #[test]
    fn quadrature_examples() {
        let spec = GridSpec::periodic(32, 32, TAU, TAU).unwrap();
        let one = integrate(&spec.sample_real(|_, _| 1.0), &spec).unwrap();
        assert!((one.re - 4.0 * PI * PI).abs() < 1e-12);
        let s = integrate(&spec.sample_real(|u, _| u.sin()), &spec).unwrap();
        assert!(s.norm() < 1e-14);
        let s2 = integrate(&spec.sample_real(|u, _| u.sin().powi(2)), &spec).unwrap();
        assert!((s2.re - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let spec = GridSpec::periodic(16, 16, 1.0, 1.0).unwrap();
        let other = GridSpec::periodic(16, 32, 1.0, 1.0).unwrap();
        let f = ScalarField::zeros(&other);
        assert!(matches!(diff_z(&f, &spec), Err(WlabError::ShapeMismatch { .. })));
        assert!(integrate(&f, &spec).is_err());
    }

    #[test]
    fn interior_mask_excludes_the_fd_margin() {
        let spec = GridSpec::new(20, 16, 1.0, TAU, false, true).unwrap();
        let m = spec.interior_mask(BOUNDARY_MARGIN);
        assert_eq!(m.valid_count(), (20 - 6) * 16);
    }
}
