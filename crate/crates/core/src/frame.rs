//! Light-cone lifts, the canonical lift, the vector N and a normal frame of V^perp.
//!
//! V is spanned by `{Y, Re Y_z, Im Y_z, Y_{z zbar}}`; projections onto V and
//! its orthogonal complement use the numerical Gram matrix of that real basis
//! at every point, so they need neither N nor the normal frame.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{GridOps, Mask, ScalarField, VectorField};
use crate::chart::Chart;
use crate::error::{Result, WlabError};
use crate::lorentz::{pair, pair_real};

/// Below this value of `<Y0_z, Y0_zbar>` the parametrization is treated as singular.
pub const DEGENERATE_METRIC: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    /// Precondition on the chart: max `|<x_z,x_z>| / <x_z,x_zbar>` on the interior.
    pub conformality_tol: f64,
}

impl FrameOptions {
    /// 1e-8 on spectral charts; finite-difference charts get 1e-3 because
    /// the check itself carries the truncation error of the stencil.
    pub fn for_chart(chart: &Chart) -> Self {
        let conformality_tol = if chart.spec.fully_periodic() { 1e-8 } else { 1e-3 };
        Self { conformality_tol }
    }

    /// Skips the conformality precondition (used for deliberately broken controls).
    pub fn unchecked() -> Self {
        Self {
            conformality_tol: f64::INFINITY,
        }
    }
}

/// Pointwise orthogonal projection onto V and V^perp.
#[derive(Debug, Clone)]
pub struct VProjector {
    dim: usize,
    /// Per point: the four real basis vectors of V, concatenated.
    basis: Vec<f64>,
    gram_inv: Vec<Matrix4<f64>>,
}

impl VProjector {
    fn build(dim: usize, len: usize, vectors: impl Fn(usize) -> [Vec<f64>; 4] + Sync + Send) -> Self {
        let rows: Vec<(Vec<f64>, Matrix4<f64>)> = (0..len)
            .into_par_iter()
            .map(|p| {
                let b = vectors(p);
                let g = Matrix4::from_fn(|r, c| pair_real(&b[r], &b[c]));
                let inv = g.try_inverse().unwrap_or_else(Matrix4::zeros);
                (b.concat(), inv)
            })
            .collect();
        let mut basis = Vec::with_capacity(len * 4 * dim);
        let mut gram_inv = Vec::with_capacity(len);
        for (b, g) in rows {
            basis.extend(b);
            gram_inv.push(g);
        }
        Self { dim, basis, gram_inv }
    }

    fn basis_vec(&self, p: usize, a: usize) -> &[f64] {
        let off = (p * 4 + a) * self.dim;
        &self.basis[off..off + self.dim]
    }

    /// Component of `v` in V_C.
    pub fn project_v(&self, p: usize, v: &[Complex64]) -> Vec<Complex64> {
        let mut rhs = [Complex64::new(0.0, 0.0); 4];
        for (a, r) in rhs.iter_mut().enumerate() {
            let b = self.basis_vec(p, a);
            let mut acc = -v[0] * b[0];
            for k in 1..self.dim {
                acc += v[k] * b[k];
            }
            *r = acc;
        }
        let g = &self.gram_inv[p];
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for a in 0..4 {
            let coeff: Complex64 = (0..4).map(|c| rhs[c] * g[(a, c)]).sum();
            for (o, bk) in out.iter_mut().zip(self.basis_vec(p, a)) {
                *o += coeff * bk;
            }
        }
        out
    }

    /// Component of `v` in V^perp_C.
    pub fn project_perp(&self, p: usize, v: &[Complex64]) -> Vec<Complex64> {
        let pv = self.project_v(p, v);
        v.iter().zip(pv).map(|(a, b)| a - b).collect()
    }

    pub fn project_perp_real(&self, p: usize, v: &[f64]) -> Vec<f64> {
        let c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.project_perp(p, &c).into_iter().map(|z| z.re).collect()
    }

    /// Applies the V^perp projection at every grid point.
    pub fn perp_field(&self, f: &VectorField) -> VectorField {
        let spec_len = f.len();
        let points: Vec<Vec<Complex64>> = (0..spec_len)
            .into_par_iter()
            .map(|p| self.project_perp(p, &f.at(p)))
            .collect();
        let mut comps = vec![
            ScalarField {
                nu: f.nu,
                nv: f.nv,
                data: vec![Complex64::new(0.0, 0.0); spec_len]
            };
            f.dim()
        ];
        for (p, v) in points.into_iter().enumerate() {
            for (c, x) in comps.iter_mut().zip(v) {
                c.data[p] = x;
            }
        }
        VectorField {
            nu: f.nu,
            nv: f.nv,
            comps,
        }
    }
}

/// Moving frame along a chart.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub ambient_n: usize,
    pub y: VectorField,
    pub y_z: VectorField,
    pub y_zbar: VectorField,
    pub y_zz: VectorField,
    /// Real by construction; stored with the numerically negligible imaginary part removed.
    pub y_zzbar: VectorField,
    pub n: Option<VectorField>,
    /// Orthonormal basis of V^perp, `ambient_n - 2` fields. Pointwise gauge only.
    pub psi: Vec<VectorField>,
    pub projector: VProjector,
    /// `<Y0_z, Y0_zbar>` of the light-cone lift `(1, x)`.
    pub lift_metric: Vec<f64>,
    pub mask: Mask,
    pub conformality_defect: f64,
}

impl FrameField {
    pub fn dim(&self) -> usize {
        self.ambient_n + 2
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// D_z of a section of V^perp_C: the V^perp part of its z-derivative.
    pub fn d_z(&self, ops: &GridOps, section: &VectorField) -> Result<VectorField> {
        Ok(self.projector.perp_field(&ops.dz_vec(section)?))
    }

    pub fn d_zbar(&self, ops: &GridOps, section: &VectorField) -> Result<VectorField> {
        Ok(self.projector.perp_field(&ops.dzbar_vec(section)?))
    }

    /// Worst violation of each defining relation over unmasked points.
    pub fn relation_defects(&self) -> FrameDefects {
        let mut d = FrameDefects::default();
        for p in (0..self.len()).filter(|&p| self.mask.is_valid(p)) {
            let y = self.y.at(p);
            let yz = self.y_z.at(p);
            let yzb = self.y_zbar.at(p);
            d.lift_null = d.lift_null.max(pair(&y, &y).norm());
            d.yz_null = d.yz_null.max(pair(&yz, &yz).norm());
            d.yz_yzbar = d.yz_yzbar.max((pair(&yz, &yzb) - 0.5).norm());
            if let Some(nf) = &self.n {
                let n = nf.at(p);
                let rel = [
                    pair(&n, &yz).norm(),
                    pair(&n, &yzb).norm(),
                    pair(&n, &n).norm(),
                    (pair(&n, &y) + 1.0).norm(),
                ];
                d.n_relations = rel.iter().fold(d.n_relations, |m, &x| m.max(x));
                for (a, pa) in self.psi.iter().enumerate() {
                    let psi_a = pa.at(p);
                    for t in [&y, &yz, &n] {
                        d.psi_perp = d.psi_perp.max(pair(&psi_a, t).norm());
                    }
                    for pb in self.psi.iter().skip(a) {
                        let g = pair(&psi_a, &pb.at(p));
                        let target = if std::ptr::eq(pa, pb) { 1.0 } else { 0.0 };
                        d.psi_orthonormal = d.psi_orthonormal.max((g - target).norm());
                    }
                }
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct FrameDefects {
    pub lift_null: f64,
    pub yz_null: f64,
    pub yz_yzbar: f64,
    pub n_relations: f64,
    pub psi_orthonormal: f64,
    pub psi_perp: f64,
}

impl FrameDefects {
    pub fn max(&self) -> f64 {
        [
            self.lift_null,
            self.yz_null,
            self.yz_yzbar,
            self.n_relations,
            self.psi_orthonormal,
            self.psi_perp,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `Y0 = (1, x)` at every grid point.
pub fn light_cone_lift(chart: &Chart) -> Result<VectorField> {
    let spec = &chart.spec;
    for p in 0..spec.len() {
        let n2: f64 = chart.point(p).iter().map(|x| x * x).sum();
        if (n2 - 1.0).abs() > 1e-11 {
            return Err(WlabError::InvalidChart(format!("point {p} is not a unit vector")));
        }
    }
    Ok(VectorField::from_fn(spec, chart.ambient_n + 2, |p| {
        std::iter::once(1.0)
            .chain(chart.point(p).iter().copied())
            .map(|x| Complex64::new(x, 0.0))
            .collect()
    }))
}

/// The lift `Y` with `|dY|^2 = |dz|^2`, its first derivatives, second
/// derivatives, and the V projector. `N` and the normal frame are filled
/// later by [`frame_n`] and [`normal_basis`].
pub fn canonical_lift(chart: &Chart, ops: &GridOps, opts: &FrameOptions) -> Result<FrameField> {
    let spec = &chart.spec;
    let dim = chart.ambient_n + 2;
    let y0 = light_cone_lift(chart)?;
    let (y0_z, y0_zbar) = ops.wirtinger_vec(&y0)?;

    let interior = chart.interior_mask();
    let mut metric = vec![0.0; spec.len()];
    let mut defect: f64 = 0.0;
    let mut degenerate = vec![false; spec.len()];
    for p in 0..spec.len() {
        let a = y0_z.at(p);
        let b = y0_zbar.at(p);
        let m = pair(&a, &b).re;
        metric[p] = m;
        if m < DEGENERATE_METRIC {
            degenerate[p] = true;
        } else if interior.is_valid(p) {
            defect = defect.max(pair(&a, &a).norm() / m);
        }
    }
    let n_degenerate = degenerate.iter().filter(|&&d| d).count();
    if 2 * n_degenerate > spec.len() {
        return Err(WlabError::DegenerateMetric {
            count: n_degenerate,
            total: spec.len(),
        });
    }
    if defect > opts.conformality_tol {
        return Err(WlabError::NonConformal {
            ratio: defect,
            tol: opts.conformality_tol,
        });
    }

    let y = y0.scale_by(&normalizing_factor(&metric, spec.nu, spec.nv));
    let (y_z, y_zbar) = ops.wirtinger_vec(&y)?;
    let (y_zz, y_zzbar_raw) = ops.wirtinger_vec(&y_z)?;
    let y_zzbar = VectorField {
        nu: spec.nu,
        nv: spec.nv,
        comps: y_zzbar_raw
            .comps
            .iter()
            .map(|c| c.map(|z| Complex64::new(z.re, 0.0)))
            .collect(),
    };

    let re = |f: &VectorField, p: usize| -> Vec<f64> { f.comps.iter().map(|c| c.data[p].re).collect() };
    let im = |f: &VectorField, p: usize| -> Vec<f64> { f.comps.iter().map(|c| c.data[p].im).collect() };
    let projector = VProjector::build(dim, spec.len(), |p| {
        [re(&y, p), re(&y_z, p), im(&y_z, p), re(&y_zzbar, p)]
    });

    let mask = Mask(interior.0.iter().zip(&degenerate).map(|(a, d)| *a && !d).collect());
    Ok(FrameField {
        ambient_n: chart.ambient_n,
        y,
        y_z,
        y_zbar,
        y_zz,
        y_zzbar,
        n: None,
        psi: Vec::new(),
        projector,
        lift_metric: metric,
        mask,
        conformality_defect: defect,
    })
}

/// `1 / sqrt(2 <L_z, L_zbar>)` from the metric of a lift `L`.
fn normalizing_factor(metric: &[f64], nu: usize, nv: usize) -> ScalarField {
    ScalarField {
        nu,
        nv,
        data: metric
            .iter()
            .map(|&m| Complex64::new(1.0 / (2.0 * m.max(DEGENERATE_METRIC)).sqrt(), 0.0))
            .collect(),
    }
}

/// Rescales any positive lift `L` to the canonical one, `L / sqrt(2 <L_z, L_zbar>)`.
pub fn normalize_lift(lift: &VectorField, ops: &GridOps) -> Result<VectorField> {
    let (l_z, l_zbar) = ops.wirtinger_vec(lift)?;
    let metric: Vec<f64> = (0..lift.len()).map(|p| pair(&l_z.at(p), &l_zbar.at(p)).re).collect();
    Ok(lift.scale_by(&normalizing_factor(&metric, lift.nu, lift.nv)))
}

/// `kappa`: the V^perp part of `Y_zz`.
pub fn hopf_projection(frame: &FrameField) -> VectorField {
    frame.projector.perp_field(&frame.y_zz)
}

/// `N = 2 Y_{z zbar} + 2 <kappa, kappa-bar> Y`.
pub fn frame_n(frame: &FrameField, kk_bar: &ScalarField) -> Result<VectorField> {
    if kk_bar.len() != frame.len() {
        return Err(WlabError::DimensionMismatch {
            expected: frame.len(),
            got: kk_bar.len(),
        });
    }
    let spec_len = frame.len();
    let comps = frame
        .y_zzbar
        .comps
        .iter()
        .zip(&frame.y.comps)
        .map(|(a, y)| ScalarField {
            nu: a.nu,
            nv: a.nv,
            data: (0..spec_len)
                .map(|p| Complex64::new(2.0 * a.data[p].re + 2.0 * kk_bar.data[p].re * y.data[p].re, 0.0))
                .collect(),
        })
        .collect();
    Ok(VectorField {
        nu: frame.y.nu,
        nv: frame.y.nv,
        comps,
    })
}

/// Orthonormal basis of V^perp at each point by pivoted modified Gram-Schmidt
/// of the projected ambient basis. Points where V^perp comes out rank
/// deficient are masked.
pub fn normal_basis(frame: &FrameField) -> (Vec<VectorField>, Mask) {
    let dim = frame.dim();
    let rank = frame.ambient_n - 2;
    let len = frame.len();
    let per_point: Vec<Option<Vec<Vec<f64>>>> = (0..len)
        .into_par_iter()
        .map(|p| {
            let mut cands: Vec<Vec<f64>> = (0..dim)
                .map(|k| {
                    let mut e = vec![0.0; dim];
                    e[k] = 1.0;
                    frame.projector.project_perp_real(p, &e)
                })
                .collect();
            let mut out: Vec<Vec<f64>> = Vec::with_capacity(rank);
            for _ in 0..rank {
                let (best, norm2) = cands
                    .iter()
                    .enumerate()
                    .map(|(k, c)| (k, pair_real(c, c)))
                    .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
                if !(norm2 > 1e-20) {
                    return None;
                }
                let mut psi = cands.swap_remove(best);
                // second pass against earlier vectors and V for orthogonality to roundoff
                for q in &out {
                    let c = pair_real(&psi, q);
                    psi.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
                psi = frame.projector.project_perp_real(p, &psi);
                let nrm = pair_real(&psi, &psi).sqrt();
                psi.iter_mut().for_each(|a| *a /= nrm);
                for c in cands.iter_mut() {
                    let d = pair_real(c, &psi);
                    c.iter_mut().zip(&psi).for_each(|(a, b)| *a -= d * b);
                }
                out.push(psi);
            }
            Some(out)
        })
        .collect();

    let (nu, nv) = (frame.y.nu, frame.y.nv);
    let mut mask = frame.mask.clone();
    let mut fields = vec![
        VectorField {
            nu,
            nv,
            comps: vec![
                ScalarField {
                    nu,
                    nv,
                    data: vec![Complex64::new(0.0, 0.0); len]
                };
                dim
            ],
        };
        rank
    ];
    for (p, basis) in per_point.into_iter().enumerate() {
        match basis {
            Some(b) => {
                for (field, v) in fields.iter_mut().zip(b) {
                    for (c, x) in field.comps.iter_mut().zip(v) {
                        c.data[p] = Complex64::new(x, 0.0);
                    }
                }
            }
            None => mask.0[p] = false,
        }
    }
    (fields, mask)
}

/// Full frame: canonical lift, `N` (through the Hopf projection), and the normal basis.
pub fn build_frame(chart: &Chart, ops: &GridOps, opts: &FrameOptions) -> Result<FrameField> {
    let mut frame = canonical_lift(chart, ops, opts)?;
    let kappa = hopf_projection(&frame);
    let kk_bar = kk_bar_field(&kappa);
    frame.n = Some(frame_n(&frame, &kk_bar)?);
    let (psi, mask) = normal_basis(&frame);
    frame.psi = psi;
    frame.mask = mask;
    Ok(frame)
}

/// `<kappa, conj kappa>` per point.
pub fn kk_bar_field(kappa: &VectorField) -> ScalarField {
    ScalarField {
        nu: kappa.nu,
        nv: kappa.nv,
        data: (0..kappa.len())
            .map(|p| {
                let k = kappa.at(p);
                Complex64::new(crate::lorentz::pair_hermitian(&k, &k), 0.0)
            })
            .collect(),
    }
}
