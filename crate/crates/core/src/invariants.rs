//! Conformal Hopf differential, Schwarzian, normal connection, Ricci and
//! structure-equation residuals, and the two Willmore energy pipelines.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{quadrature_weights, GridOps, GridSpec, Mask, ScalarField, VectorField};
use crate::chart::Chart;
use crate::error::{Result, WlabError};
use crate::frame::{hopf_projection, kk_bar_field, FrameField};
use crate::lorentz::{pair, pair_hermitian};

/// Relative umbilic threshold against the chart maximum of `<kappa, kappa-bar>`.
pub const UMBILIC_REL: f64 = 1e-10;
/// Absolute floor so that totally umbilic charts are masked entirely.
pub const UMBILIC_ABS: f64 = 1e-12;

const C0: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct InvariantField {
    pub kappa: VectorField,
    pub s: ScalarField,
    /// `<kappa, kappa-bar>`, real.
    pub kk_bar: ScalarField,
    /// `<kappa, kappa>`.
    pub kk: ScalarField,
    /// `arg<kappa,kappa> / 2`, not unwrapped.
    pub theta: ScalarField,
    pub dz_kappa: VectorField,
    pub dzbar_kappa: VectorField,
    /// Frame mask (interior, non-degenerate, full normal frame).
    pub mask: Mask,
    /// `mask` with umbilic points removed.
    pub umbilic_free: Mask,
}

/// `kappa`, `s`, their pairings and first normal derivatives.
pub fn hopf_schwarzian(frame: &FrameField, ops: &GridOps) -> Result<InvariantField> {
    let n = frame
        .n
        .as_ref()
        .ok_or_else(|| WlabError::FrameRelation("frame vector N has not been computed".into()))?;
    let kappa = hopf_projection(frame);
    let len = frame.len();
    let (nu, nv) = (kappa.nu, kappa.nv);
    let s = ScalarField {
        nu,
        nv,
        data: (0..len).map(|p| 2.0 * pair(&frame.y_zz.at(p), &n.at(p))).collect(),
    };
    let kk_bar = kk_bar_field(&kappa);
    let kk = ScalarField {
        nu,
        nv,
        data: (0..len)
            .map(|p| {
                let k = kappa.at(p);
                pair(&k, &k)
            })
            .collect(),
    };
    let theta = kk.map(|z| Complex64::new(0.5 * z.arg(), 0.0));
    let dz_kappa = frame.d_z(ops, &kappa)?;
    let dzbar_kappa = frame.d_zbar(ops, &kappa)?;

    let max_kk = kk_bar.linf(&frame.mask);
    let threshold = (UMBILIC_REL * max_kk).max(UMBILIC_ABS);
    let umbilic_free = Mask(
        (0..len)
            .map(|p| frame.mask.is_valid(p) && kk_bar.data[p].re >= threshold)
            .collect(),
    );
    Ok(InvariantField {
        kappa,
        s,
        kk_bar,
        kk,
        theta,
        dz_kappa,
        dzbar_kappa,
        mask: frame.mask.clone(),
        umbilic_free,
    })
}

/// Largest Euclidean norms of `Y_zz + (s/2) Y - kappa` and of the
/// `Y_z`, `Y_zbar` components of `Y_zz`, over unmasked points.
pub fn decomposition_residual(frame: &FrameField, inv: &InvariantField) -> (f64, f64) {
    let mut resid: f64 = 0.0;
    let mut tangential: f64 = 0.0;
    for p in (0..frame.len()).filter(|&p| inv.mask.is_valid(p)) {
        let yzz = frame.y_zz.at(p);
        let y = frame.y.at(p);
        let k = inv.kappa.at(p);
        let s = inv.s.data[p];
        let r: f64 = (0..yzz.len())
            .map(|c| (yzz[c] + 0.5 * s * y[c] - k[c]).norm_sqr())
            .sum::<f64>()
            .sqrt();
        resid = resid.max(r);
        // coefficients along Y_zbar and Y_z are 2<Y_zz, Y_z> and 2<Y_zz, Y_zbar>
        let t1 = 2.0 * pair(&yzz, &frame.y_z.at(p));
        let t2 = 2.0 * pair(&yzz, &frame.y_zbar.at(p));
        tangential = tangential.max(t1.norm()).max(t2.norm());
    }
    (resid, tangential)
}

/// Hermitian norm `sqrt<v, conj v>` of a normal-bundle vector (clamped at 0).
pub fn normal_norm(v: &[Complex64]) -> f64 {
    pair_hermitian(v, v).max(0.0).sqrt()
}

/// Euclidean norm of a complex ambient vector.
pub fn euclidean_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `2<psi,kappa> kappa-bar - 2<psi,kappa-bar> kappa`.
pub fn ricci_rhs(psi: &[Complex64], kappa: &[Complex64]) -> Vec<Complex64> {
    let kb: Vec<Complex64> = kappa.iter().map(|z| z.conj()).collect();
    let a = 2.0 * pair(psi, kappa);
    let b = 2.0 * pair(psi, &kb);
    kb.iter().zip(kappa).map(|(x, y)| a * x - b * y).collect()
}

/// `R(psi) = D_zbar D_z psi - D_z D_zbar psi` for the sections `P e_k`, one field per ambient index.
fn curvature_of_projected_basis(frame: &FrameField, ops: &GridOps) -> Result<Vec<VectorField>> {
    let dim = frame.dim();
    let len = frame.len();
    (0..dim)
        .map(|k| {
            let mut e = vec![0.0; dim];
            e[k] = 1.0;
            let pts: Vec<Vec<Complex64>> = (0..len)
                .into_par_iter()
                .map(|p| {
                    frame
                        .projector
                        .project_perp_real(p, &e)
                        .into_iter()
                        .map(|x| Complex64::new(x, 0.0))
                        .collect()
                })
                .collect();
            let f = VectorField::from_points(ops.spec(), dim, &pts);
            let a = frame.d_z(ops, &f)?;
            let c = frame.d_zbar(ops, &a)?;
            // D_z D_zbar f is the conjugate of D_zbar D_z f for real f
            let comps = c.comps.iter().map(|comp| comp.map(|z| z - z.conj())).collect();
            Ok(VectorField {
                nu: c.nu,
                nv: c.nv,
                comps,
            })
        })
        .collect()
}

/// Pointwise `max_alpha |R(psi_alpha) - RHS(psi_alpha)|`. The curvature is
/// evaluated on the smooth sections `P e_k` and contracted with the
/// pointwise frame, so the Gram-Schmidt gauge never gets differentiated.
pub fn ricci_residual(frame: &FrameField, ops: &GridOps, inv: &InvariantField) -> Result<ScalarField> {
    ricci_residual_with_rhs(frame, ops, inv, &inv.kappa)
}

/// As [`ricci_residual`] but with `kappa_rhs` substituted on the right-hand side only.
pub fn ricci_residual_with_rhs(
    frame: &FrameField,
    ops: &GridOps,
    inv: &InvariantField,
    kappa_rhs: &VectorField,
) -> Result<ScalarField> {
    if kappa_rhs.len() != frame.len() || kappa_rhs.dim() != frame.dim() {
        return Err(WlabError::DimensionMismatch {
            expected: frame.len() * frame.dim(),
            got: kappa_rhs.len() * kappa_rhs.dim(),
        });
    }
    let curv = curvature_of_projected_basis(frame, ops)?;
    let dim = frame.dim();
    let data = (0..frame.len())
        .into_par_iter()
        .map(|p| {
            if !inv.mask.is_valid(p) {
                return C0;
            }
            let k = kappa_rhs.at(p);
            let curv_p: Vec<Vec<Complex64>> = curv.iter().map(|f| f.at(p)).collect();
            let worst = frame
                .psi
                .iter()
                .map(|psi_field| {
                    let psi = psi_field.at(p);
                    let mut lhs = vec![C0; dim];
                    for (pk, ck) in psi.iter().zip(&curv_p) {
                        for (l, c) in lhs.iter_mut().zip(ck) {
                            *l += pk.re * c;
                        }
                    }
                    let rhs = ricci_rhs(&psi, &k);
                    let diff: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
                    normal_norm(&frame.projector.project_perp(p, &diff))
                })
                .fold(0.0, f64::max);
            Complex64::new(worst, 0.0)
        })
        .collect();
    Ok(ScalarField {
        nu: frame.y.nu,
        nv: frame.y.nv,
        data,
    })
}

/// Pointwise Euclidean norm of the defects of the `N_z` and `psi_z` structure
/// equations, the latter checked on the sections `P e_k`.
pub fn structure_residual(frame: &FrameField, ops: &GridOps, inv: &InvariantField) -> Result<ScalarField> {
    let n = frame
        .n
        .as_ref()
        .ok_or_else(|| WlabError::FrameRelation("frame vector N has not been computed".into()))?;
    let n_z = ops.dz_vec(n)?;
    let dim = frame.dim();
    let len = frame.len();
    let mut worst = vec![0.0f64; len];
    for p in (0..len).filter(|&p| inv.mask.is_valid(p)) {
        let nz = n_z.at(p);
        let yz = frame.y_z.at(p);
        let yzb = frame.y_zbar.at(p);
        let dk = inv.dzbar_kappa.at(p);
        let kk = inv.kk_bar.data[p].re;
        let s = inv.s.data[p];
        let r: Vec<Complex64> = (0..dim)
            .map(|c| nz[c] + 2.0 * kk * yz[c] + s * yzb[c] - 2.0 * dk[c])
            .collect();
        worst[p] = euclidean_norm(&r);
    }
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        let pts: Vec<Vec<Complex64>> = (0..len)
            .map(|p| {
                frame
                    .projector
                    .project_perp_real(p, &e)
                    .into_iter()
                    .map(|x| Complex64::new(x, 0.0))
                    .collect()
            })
            .collect();
        let f = VectorField::from_points(ops.spec(), dim, &pts);
        let f_z = ops.dz_vec(&f)?;
        let df = frame.projector.perp_field(&f_z);
        for p in (0..len).filter(|&p| inv.mask.is_valid(p)) {
            let fp = &pts[p];
            let a = 2.0 * pair(fp, &inv.dzbar_kappa.at(p));
            let b = 2.0 * pair(fp, &inv.kappa.at(p));
            let y = frame.y.at(p);
            let yzb = frame.y_zbar.at(p);
            let fz = f_z.at(p);
            let d = df.at(p);
            let r: Vec<Complex64> = (0..dim).map(|c| fz[c] - d[c] - a * y[c] + b * yzb[c]).collect();
            worst[p] = worst[p].max(euclidean_norm(&r));
        }
    }
    Ok(ScalarField {
        nu: frame.y.nu,
        nv: frame.y.nv,
        data: worst.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Energy {
    pub value: f64,
    /// The chart does not cover a closed surface; the value is the energy of the sampled patch.
    pub partial_domain: bool,
}

/// `W = 2i ∫ <kappa,kappa-bar> dz ∧ dzbar = 4 ∫ <kappa,kappa-bar> du dv`.
pub fn willmore_energy_conformal(inv: &InvariantField, spec: &GridSpec) -> Result<Energy> {
    let value = 4.0 * crate::calculus::integrate(&inv.kk_bar, spec)?.re;
    Ok(Energy {
        value,
        partial_domain: !spec.fully_periodic(),
    })
}

/// Minimum allowed distance between the stereographic pole and the samples.
pub const MIN_POLE_DISTANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EuclideanEnergy {
    pub value: f64,
    pub partial_domain: bool,
    pub pole: Vec<f64>,
    pub pole_distance: f64,
}

fn min_distance(chart: &Chart, q: &[f64]) -> f64 {
    (0..chart.spec.len())
        .into_par_iter()
        .map(|p| {
            chart
                .point(p)
                .iter()
                .zip(q)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .reduce(|| f64::INFINITY, f64::min)
        .sqrt()
}

/// Sphere point farthest from the chart samples among coordinate axes,
/// diagonals and a fixed set of pseudo-random directions.
pub fn select_pole(chart: &Chart) -> Result<(Vec<f64>, f64)> {
    let w = chart.width();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for i in 0..w {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; w];
            e[i] = sign;
            candidates.push(e);
        }
        for j in i + 1..w {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![0.0; w];
                e[i] = si * std::f64::consts::FRAC_1_SQRT_2;
                e[j] = sj * std::f64::consts::FRAC_1_SQRT_2;
                candidates.push(e);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..64 {
        let v: Vec<f64> = (0..w).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            candidates.push(v.iter().map(|x| x / n).collect());
        }
    }
    let (best, dist) = candidates
        .into_iter()
        .map(|c| {
            let d = min_distance(chart, &c);
            (c, d)
        })
        .fold((Vec::new(), f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if dist < MIN_POLE_DISTANCE {
        return Err(WlabError::PoleTooClose {
            best: dist,
            min: MIN_POLE_DISTANCE,
        });
    }
    Ok((best, dist))
}

/// `∫ (|H|^2 - K) dA` of the stereographic image in R^n, with first and
/// second fundamental forms from grid derivatives.
pub fn willmore_energy_euclidean(chart: &Chart, ops: &GridOps) -> Result<EuclideanEnergy> {
    let (pole, pole_distance) = select_pole(chart)?;
    let spec = &chart.spec;
    let len = spec.len();
    let w = chart.width();
    // stereographic coordinates, kept in R^{n+1} (orthogonal to the pole)
    let mut comps = vec![vec![0.0; len]; w];
    for p in 0..len {
        let x = chart.point(p);
        let t: f64 = x.iter().zip(&pole).map(|(a, b)| a * b).sum();
        for c in 0..w {
            comps[c][p] = (x[c] - t * pole[c]) / (1.0 - t);
        }
    }
    let mut xu = Vec::with_capacity(w);
    let mut xv = Vec::with_capacity(w);
    let mut xuu = Vec::with_capacity(w);
    let mut xuv = Vec::with_capacity(w);
    let mut xvv = Vec::with_capacity(w);
    for c in comps {
        let f = ScalarField::from_real(spec, &c)?;
        let (fu, fv) = ops.grad(&f)?;
        let (fuu, fuv) = ops.grad(&fu)?;
        let fvv = ops.dv(&fv)?;
        xu.push(fu.real_parts());
        xv.push(fv.real_parts());
        xuu.push(fuu.real_parts());
        xuv.push(fuv.real_parts());
        xvv.push(fvv.real_parts());
    }
    let dot = |a: &[Vec<f64>], b: &[Vec<f64>], p: usize| -> f64 { (0..w).map(|c| a[c][p] * b[c][p]).sum() };
    let density: Vec<f64> = (0..len)
        .map(|p| {
            let e = dot(&xu, &xu, p);
            let f = dot(&xu, &xv, p);
            let g = dot(&xv, &xv, p);
            let det = e * g - f * f;
            if det <= 0.0 {
                return 0.0;
            }
            let normal_part = |d: &[Vec<f64>]| -> Vec<f64> {
                let a = dot(d, &xu, p);
                let b = dot(d, &xv, p);
                // tangential coefficients solve the 2x2 metric system
                let cu = (g * a - f * b) / det;
                let cv = (e * b - f * a) / det;
                (0..w).map(|c| d[c][p] - cu * xu[c][p] - cv * xv[c][p]).collect()
            };
            let iuu = normal_part(&xuu);
            let iuv = normal_part(&xuv);
            let ivv = normal_part(&xvv);
            let h: Vec<f64> = (0..w)
                .map(|c| (g * iuu[c] - 2.0 * f * iuv[c] + e * ivv[c]) / (2.0 * det))
                .collect();
            let h2: f64 = h.iter().map(|x| x * x).sum();
            let k =
                (iuu.iter().zip(&ivv).map(|(a, b)| a * b).sum::<f64>() - iuv.iter().map(|x| x * x).sum::<f64>()) / det;
            (h2 - k) * det.sqrt()
        })
        .collect();
    let weights = quadrature_weights(spec);
    let value = density.iter().zip(&weights).map(|(d, w)| d * w).sum();
    Ok(EuclideanEnergy {
        value,
        partial_domain: !spec.fully_periodic(),
        pole,
        pole_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{build_frame, FrameOptions};
    use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

    fn clifford(n: usize) -> Chart {
        let s = FRAC_1_SQRT_2;
        let spec = GridSpec::periodic(n, n, TAU, TAU).unwrap();
        Chart::from_fn("clifford", spec, 3, |u, v| {
            vec![s * u.cos(), s * u.sin(), s * v.cos(), s * v.sin()]
        })
        .unwrap()
    }

    fn analyse(chart: &Chart) -> (GridOps, FrameField, InvariantField) {
        let ops = GridOps::new(&chart.spec).unwrap();
        let frame = build_frame(chart, &ops, &FrameOptions::for_chart(chart)).unwrap();
        let inv = hopf_schwarzian(&frame, &ops).unwrap();
        (ops, frame, inv)
    }

    #[test]
    fn clifford_hopf_differential_by_hand() {
        let chart = clifford(32);
        let (ops, frame, inv) = analyse(&chart);
        let q = 2f64.sqrt() / 4.0;
        for p in 0..frame.len() {
            let (i, j) = (p / 32, p % 32);
            let (u, v) = chart.spec.coords(i, j);
            let nrm = [-u.cos(), -u.sin(), v.cos(), v.sin()].map(|x| x * FRAC_1_SQRT_2);
            let k = inv.kappa.at(p);
            assert!(k[0].norm() < 1e-12);
            for c in 0..4 {
                assert!((k[c + 1] - q * nrm[c]).norm() < 1e-12);
            }
            assert!((inv.kk_bar.data[p].re - 0.125).abs() < 1e-12);
            assert!(inv.s.data[p].norm() < 1e-12);
        }
        assert!(inv.dzbar_kappa.comps.iter().all(|c| c.linf(&inv.mask) < 1e-12));
        let (res, tan) = decomposition_residual(&frame, &inv);
        assert!(res < 1e-12 && tan < 1e-12);
        let w = willmore_energy_conformal(&inv, &chart.spec).unwrap();
        assert!((w.value - 2.0 * PI * PI).abs() < 1e-10 && !w.partial_domain);
        assert!(ricci_residual(&frame, &ops, &inv).unwrap().linf(&inv.mask) < 1e-10);
        assert!(structure_residual(&frame, &ops, &inv).unwrap().linf(&inv.mask) < 1e-10);
    }

    #[test]
    fn euclidean_pipeline_matches_on_clifford() {
        let chart = clifford(64);
        let ops = GridOps::new(&chart.spec).unwrap();
        let e = willmore_energy_euclidean(&chart, &ops).unwrap();
        assert!((e.value - 2.0 * PI * PI).abs() < 1e-4, "{}", e.value);
        assert!(e.pole_distance >= MIN_POLE_DISTANCE);
    }

    #[test]
    fn ricci_right_hand_side_is_quadratic() {
        let psi = [0.0, 0.0, 0.0, 1.0, 0.0].map(|x| Complex64::new(x, 0.0));
        let k = [0.0, 0.0, 0.0, 1.0, 0.0].map(|x| Complex64::new(0.0, x)).to_vec();
        let k2: Vec<Complex64> = k.iter().map(|z| 2.0 * z).collect();
        let a = ricci_rhs(&psi, &k);
        let b = ricci_rhs(&psi, &k2);
        for (x, y) in a.iter().zip(&b) {
            assert!((4.0 * x - y).norm() < 1e-15);
        }
    }
}
