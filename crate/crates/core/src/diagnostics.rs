//! Residual fields for the Willmore, S-Willmore, flatness, isothermic and
//! integrability conditions, the holomorphic 6-form, reduction ranks, and
//! the report that collects them.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{GridOps, GridSpec, Mask, ScalarField, VectorField};
use crate::chart::Chart;
use crate::error::{Result, WlabError};
use crate::frame::{build_frame, FrameDefects, FrameField, FrameOptions};
use crate::invariants::{
    hopf_schwarzian, normal_norm, ricci_residual, ricci_rhs, structure_residual, willmore_energy_conformal,
    willmore_energy_euclidean, InvariantField,
};
use crate::lorentz::{pair, pair_real, rank_of, span_rank, MinkowskiVec, RANK_TOL};

pub const SCHEMA_VERSION: u32 = 1;
/// Default verdict tolerance on spectral (fully periodic) charts.
pub const SPECTRAL_TOLERANCE: f64 = 1e-6;
/// Default verdict tolerance on finite-difference charts.
pub const FD_TOLERANCE: f64 = 1e-3;
/// Fewest unmasked samples accepted by the span checks.
pub const MIN_SPAN_SAMPLES: usize = 50;

pub const RESIDUAL_NAMES: &[&str] = &[
    "willmore",
    "codazzi",
    "gauss",
    "ricci",
    "structure",
    "s_willmore",
    "flat_normal",
    "isothermic",
    "six_form",
    "six_form_holomorphy",
];

// ---------------------------------------------------------------------------
// pointwise algebra, usable on synthetic data

/// `<kappa,kappa-bar> - |<kappa,kappa>|`; zero exactly when kappa is a phase times a real vector.
pub fn flatness_defect(kappa: &[Complex64]) -> f64 {
    crate::lorentz::pair_hermitian(kappa, kappa) - pair(kappa, kappa).norm()
}

/// Norm of the part of `d` orthogonal to the complex line of `kappa`.
pub fn s_willmore_defect(kappa: &[Complex64], d: &[Complex64]) -> f64 {
    let kb: Vec<Complex64> = kappa.iter().map(|z| z.conj()).collect();
    let kk = pair(kappa, &kb);
    let mu = pair(d, &kb) / kk;
    let r: Vec<Complex64> = d.iter().zip(kappa).map(|(a, b)| a - mu * b).collect();
    normal_norm(&r)
}

/// `<d,kappa>^2 - <d,d><kappa,kappa>` with `d = D_zbar kappa`.
pub fn six_form_value(kappa: &[Complex64], d: &[Complex64]) -> Complex64 {
    let a = pair(d, kappa);
    a * a - pair(d, d) * pair(kappa, kappa)
}

/// `max_alpha |2<psi,kappa> kappa-bar - 2<psi,kappa-bar> kappa|` over a real orthonormal normal basis.
pub fn ricci_commutator_defect(kappa: &[Complex64], basis: &[Vec<f64>]) -> f64 {
    basis
        .iter()
        .map(|psi| {
            let psi: Vec<Complex64> = psi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            normal_norm(&ricci_rhs(&psi, kappa))
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// residual fields

fn scalar(nu: usize, nv: usize, data: Vec<Complex64>) -> ScalarField {
    ScalarField { nu, nv, data }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Willmore residual `|D_zbar D_zbar kappa + (s-bar/2) kappa|` and the
/// conformal Codazzi residual, the norm of its componentwise imaginary part.
pub fn willmore_codazzi_residuals(
    frame: &FrameField,
    ops: &GridOps,
    inv: &InvariantField,
) -> Result<(ScalarField, ScalarField)> {
    let dd = frame.d_zbar(ops, &inv.dzbar_kappa)?;
    let (nu, nv) = (inv.s.nu, inv.s.nv);
    let rows: Vec<(Complex64, Complex64)> = (0..inv.s.len())
        .into_par_iter()
        .map(|p| {
            if !inv.mask.is_valid(p) {
                return (real(0.0), real(0.0));
            }
            let sb = inv.s.data[p].conj();
            let w: Vec<Complex64> = dd
                .at(p)
                .iter()
                .zip(inv.kappa.at(p))
                .map(|(a, k)| a + 0.5 * sb * k)
                .collect();
            let im: Vec<f64> = w.iter().map(|z| z.im).collect();
            (real(normal_norm(&w)), real(pair_real(&im, &im).max(0.0).sqrt()))
        })
        .collect();
    let (w, c): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok((scalar(nu, nv, w), scalar(nu, nv, c)))
}

/// `|s_zbar / 2 - 3 <kappa, D_z kappa-bar> - <D_z kappa, kappa-bar>|`.
pub fn gauss_residual(ops: &GridOps, inv: &InvariantField) -> Result<ScalarField> {
    let s_zbar = ops.dzbar(&inv.s)?;
    let data = (0..inv.s.len())
        .into_par_iter()
        .map(|p| {
            if !inv.mask.is_valid(p) {
                return real(0.0);
            }
            let k = inv.kappa.at(p);
            let kb: Vec<Complex64> = k.iter().map(|z| z.conj()).collect();
            // D_z kappa-bar is the conjugate of D_zbar kappa
            let dz_kb: Vec<Complex64> = inv.dzbar_kappa.at(p).iter().map(|z| z.conj()).collect();
            let r = 0.5 * s_zbar.data[p] - 3.0 * pair(&k, &dz_kb) - pair(&inv.dz_kappa.at(p), &kb);
            real(r.norm())
        })
        .collect();
    Ok(scalar(inv.s.nu, inv.s.nv, data))
}

/// S-Willmore residual, zero at umbilic points.
pub fn s_willmore_residual(inv: &InvariantField) -> ScalarField {
    let data = (0..inv.s.len())
        .map(|p| {
            if inv.umbilic_free.is_valid(p) {
                real(s_willmore_defect(&inv.kappa.at(p), &inv.dzbar_kappa.at(p)))
            } else {
                real(0.0)
            }
        })
        .collect();
    scalar(inv.s.nu, inv.s.nv, data)
}

/// `<kappa,kappa-bar> - |<kappa,kappa>|`, zero at umbilic points.
pub fn flat_normal_residual(inv: &InvariantField) -> ScalarField {
    let data = (0..inv.s.len())
        .map(|p| {
            if inv.umbilic_free.is_valid(p) {
                real(inv.kk_bar.data[p].re - inv.kk.data[p].norm())
            } else {
                real(0.0)
            }
        })
        .collect();
    scalar(inv.s.nu, inv.s.nv, data)
}

/// `Omega` and `|Omega_zbar|`.
pub fn six_form(ops: &GridOps, inv: &InvariantField) -> Result<(ScalarField, ScalarField)> {
    let omega = scalar(
        inv.s.nu,
        inv.s.nv,
        (0..inv.s.len())
            .map(|p| six_form_value(&inv.kappa.at(p), &inv.dzbar_kappa.at(p)))
            .collect(),
    );
    let holo = ops.dzbar(&omega)?.map(|z| real(z.norm()));
    Ok((omega, holo))
}

#[derive(Debug, Clone)]
pub struct IsothermicField {
    /// `|theta_{z zbar}|`.
    pub residual: ScalarField,
    /// Unwrapped and detrended `theta`.
    pub theta: ScalarField,
    /// Umbilic-free points whose phase unwrapped consistently.
    pub mask: Mask,
}

fn wrap(a: f64) -> f64 {
    crate::gallery::wrap_angle(a)
}

/// Unwraps `phase` along the first column, then along each row, and masks
/// the corners of plaquettes with nonzero winding. On periodic axes the
/// linear winding (in index space) is removed so that the result is periodic.
pub fn unwrap_phase(phase: &[f64], spec: &GridSpec) -> (Vec<f64>, Mask) {
    let (nu, nv) = (spec.nu, spec.nv);
    let idx = |i: usize, j: usize| i * nv + j;
    let mut out = vec![0.0; phase.len()];
    out[0] = phase[0];
    for i in 1..nu {
        out[idx(i, 0)] = out[idx(i - 1, 0)] + wrap(phase[idx(i, 0)] - phase[idx(i - 1, 0)]);
    }
    for i in 0..nu {
        for j in 1..nv {
            out[idx(i, j)] = out[idx(i, j - 1)] + wrap(phase[idx(i, j)] - phase[idx(i, j - 1)]);
        }
    }
    let mut ok = vec![true; phase.len()];
    let iu = if spec.periodic_u { nu } else { nu - 1 };
    let jv = if spec.periodic_v { nv } else { nv - 1 };
    for i in 0..iu {
        for j in 0..jv {
            let (i1, j1) = ((i + 1) % nu, (j + 1) % nv);
            let corners = [idx(i, j), idx(i1, j), idx(i1, j1), idx(i, j1)];
            let winding: f64 = (0..4)
                .map(|k| wrap(phase[corners[(k + 1) % 4]] - phase[corners[k]]))
                .sum();
            if winding.abs() > std::f64::consts::PI {
                for c in corners {
                    ok[c] = false;
                }
            }
        }
    }
    let winding = |closing: f64| (closing / std::f64::consts::TAU).round();
    let wu = if spec.periodic_u {
        winding(out[idx(nu - 1, 0)] + wrap(phase[idx(0, 0)] - phase[idx(nu - 1, 0)]) - out[0])
    } else {
        0.0
    };
    let wv = if spec.periodic_v {
        winding(out[idx(0, nv - 1)] + wrap(phase[idx(0, 0)] - phase[idx(0, nv - 1)]) - out[0])
    } else {
        0.0
    };
    for i in 0..nu {
        for j in 0..nv {
            out[idx(i, j)] -= std::f64::consts::TAU * (wu * i as f64 / nu as f64 + wv * j as f64 / nv as f64);
        }
    }
    (out, Mask(ok))
}

/// `|theta_{z zbar}|` for `theta = arg<kappa,kappa> / 2`. Requires a flat normal
/// bundle (flatness residual below `flat_tol`), since only then is theta the
/// phase of kappa itself.
pub fn isothermic_phase_residual(ops: &GridOps, inv: &InvariantField, flat_tol: f64) -> Result<IsothermicField> {
    let flat = flat_normal_residual(inv).linf(&inv.umbilic_free);
    if flat >= flat_tol {
        return Err(WlabError::NotFlat(flat));
    }
    let spec = ops.spec();
    let phase: Vec<f64> = inv.kk.data.iter().map(|z| z.arg()).collect();
    let (unwrapped, consistent) = unwrap_phase(&phase, spec);
    let theta = ScalarField::from_real(spec, &unwrapped.iter().map(|x| 0.5 * x).collect::<Vec<_>>())?;
    let lap = ops.dzbar(&ops.dz(&theta)?)?;
    Ok(IsothermicField {
        residual: lap.map(|z| real(z.norm())),
        theta,
        mask: inv.umbilic_free.and(&consistent),
    })
}

/// `(lift_rank, kappa_jet_rank)`: the span rank of the canonical lifts over
/// all unmasked samples, and the largest pointwise rank of the real and
/// imaginary parts of `{kappa, D_z kappa, D_zbar D_z kappa}`.
pub fn reduction_span_check(frame: &FrameField, ops: &GridOps, inv: &InvariantField) -> Result<(usize, usize)> {
    let samples: Vec<usize> = (0..frame.len()).filter(|&p| inv.mask.is_valid(p)).collect();
    if samples.len() < MIN_SPAN_SAMPLES {
        return Err(WlabError::TooFewSamples {
            got: samples.len(),
            needed: MIN_SPAN_SAMPLES,
        });
    }
    let lifts: Vec<MinkowskiVec> = samples
        .iter()
        .map(|&p| MinkowskiVec(frame.y.at(p).iter().map(|z| z.re).collect()))
        .collect();
    let lift_rank = span_rank(&lifts, RANK_TOL)?;

    let dd = frame.d_zbar(ops, &inv.dz_kappa)?;
    let dim = frame.dim();
    let jet_rank = samples
        .par_iter()
        .filter(|&&p| inv.umbilic_free.is_valid(p))
        .map(|&p| {
            let rows = [inv.kappa.at(p), inv.dz_kappa.at(p), dd.at(p)];
            let m = nalgebra::DMatrix::from_fn(6, dim, |r, c| {
                let z = rows[r / 2][c];
                if r % 2 == 0 {
                    z.re
                } else {
                    z.im
                }
            });
            rank_of(m, RANK_TOL)
        })
        .max()
        .unwrap_or(0);
    Ok((lift_rank, jet_rank))
}

/// Evaluates the two integrability equations of the reduced system for data
/// `k_alpha` (real), phase `theta` and Schwarzian `s`. Returns the pointwise
/// maximum over alpha of the first residual and the second residual.
pub fn reduced_system_residual(
    k_fields: &[ScalarField; 4],
    theta: &ScalarField,
    s: &ScalarField,
    spec: &GridSpec,
) -> Result<(ScalarField, ScalarField)> {
    for f in k_fields.iter().chain([theta, s]) {
        if f.nu != spec.nu || f.nv != spec.nv {
            return Err(WlabError::ShapeMismatch {
                expected: (spec.nu, spec.nv),
                got: (f.nu, f.nv),
            });
        }
    }
    let ops = GridOps::new(spec)?;
    let i = Complex64::new(0.0, 1.0);
    let (th_z, th_zb) = ops.wirtinger(theta)?;
    let th_zbzb = ops.dzbar(&th_zb)?;
    let mut first = vec![0.0f64; spec.len()];
    for k in k_fields {
        let k_zb = ops.dzbar(k)?;
        let k_zbzb = ops.dzbar(&k_zb)?;
        for p in 0..spec.len() {
            let coeff = i * th_zbzb.data[p] - th_zb.data[p] * th_zb.data[p] + 0.5 * s.data[p].conj();
            let r = k_zbzb.data[p] + 2.0 * i * th_zb.data[p] * k_zb.data[p] + coeff * k.data[p];
            first[p] = first[p].max(r.norm());
        }
    }
    let sum_sq = ScalarField {
        nu: spec.nu,
        nv: spec.nv,
        data: (0..spec.len())
            .map(|p| k_fields.iter().map(|k| k.data[p] * k.data[p]).sum())
            .collect(),
    };
    let sum_sq_z = ops.dz(&sum_sq)?;
    let s_zb = ops.dzbar(s)?;
    let second: Vec<Complex64> = (0..spec.len())
        .map(|p| {
            let r = 0.5 * s_zb.data[p] - 2.0 * sum_sq_z.data[p] + 2.0 * i * th_z.data[p] * sum_sq.data[p];
            real(r.norm())
        })
        .collect();
    Ok((
        ScalarField::from_vec(spec, first.into_iter().map(real).collect())?,
        ScalarField::from_vec(spec, second)?,
    ))
}

// ---------------------------------------------------------------------------
// analysis pipeline and report

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub name: String,
    pub linf: f64,
    pub l2: f64,
    /// Smallest value over valid points (infinite when nothing is valid).
    pub min: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub masked_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Verdict tolerances, with per-residual overrides.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    pub default: f64,
    pub overrides: BTreeMap<String, f64>,
}

impl Tolerances {
    pub fn for_spec(spec: &GridSpec) -> Self {
        Self {
            default: if spec.fully_periodic() {
                SPECTRAL_TOLERANCE
            } else {
                FD_TOLERANCE
            },
            overrides: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, tol: f64) -> Self {
        self.overrides.insert(name.to_string(), tol);
        self
    }

    pub fn get(&self, name: &str) -> f64 {
        self.overrides.get(name).copied().unwrap_or(self.default)
    }
}

/// Fields computed once per chart; verdicts are attached later.
#[derive(Debug, Clone)]
pub struct ResidualFields {
    pub willmore: ScalarField,
    pub codazzi: ScalarField,
    pub gauss: ScalarField,
    pub ricci: ScalarField,
    pub structure: ScalarField,
    pub s_willmore: ScalarField,
    pub flat_normal: ScalarField,
    pub omega: ScalarField,
    pub omega_holomorphy: ScalarField,
}

/// Everything computed from a chart.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub chart: Chart,
    pub ops: GridOps,
    pub frame: FrameField,
    pub inv: InvariantField,
    pub fields: ResidualFields,
}

impl Analysis {
    pub fn run(chart: &Chart, opts: &FrameOptions) -> Result<Self> {
        let ops = GridOps::new(&chart.spec)?;
        let frame = build_frame(chart, &ops, opts)?;
        let inv = hopf_schwarzian(&frame, &ops)?;
        let (willmore, codazzi) = willmore_codazzi_residuals(&frame, &ops, &inv)?;
        let gauss = gauss_residual(&ops, &inv)?;
        let ricci = ricci_residual(&frame, &ops, &inv)?;
        let structure = structure_residual(&frame, &ops, &inv)?;
        let (omega, omega_holomorphy) = six_form(&ops, &inv)?;
        let fields = ResidualFields {
            willmore,
            codazzi,
            gauss,
            ricci,
            structure,
            s_willmore: s_willmore_residual(&inv),
            flat_normal: flat_normal_residual(&inv),
            omega,
            omega_holomorphy,
        };
        Ok(Self {
            chart: chart.clone(),
            ops,
            frame,
            inv,
            fields,
        })
    }

    /// Default-option analysis.
    pub fn of(chart: &Chart) -> Result<Self> {
        Self::run(chart, &FrameOptions::for_chart(chart))
    }

    fn entry(&self, name: &str, field: &ScalarField, mask: &Mask, tol: f64) -> ResidualEntry {
        let linf = field.linf(mask);
        ResidualEntry {
            name: name.to_string(),
            linf,
            l2: field.l2(&self.chart.spec, mask),
            min: field.min_abs(mask),
            verdict: if linf < tol { Verdict::Pass } else { Verdict::Fail },
            tolerance: tol,
            masked_fraction: mask.masked_fraction(),
            note: None,
        }
    }

    /// Residual entries with verdicts.
    pub fn entries(&self, tol: &Tolerances) -> Vec<ResidualEntry> {
        let f = &self.fields;
        let (m, mu) = (&self.inv.mask, &self.inv.umbilic_free);
        let mut out = vec![
            self.entry("willmore", &f.willmore, m, tol.get("willmore")),
            self.entry("codazzi", &f.codazzi, m, tol.get("codazzi")),
            self.entry("gauss", &f.gauss, m, tol.get("gauss")),
            self.entry("ricci", &f.ricci, m, tol.get("ricci")),
            self.entry("structure", &f.structure, m, tol.get("structure")),
            self.entry("s_willmore", &f.s_willmore, mu, tol.get("s_willmore")),
            self.entry("flat_normal", &f.flat_normal, mu, tol.get("flat_normal")),
        ];
        let iso_tol = tol.get("isothermic");
        out.push(
            match isothermic_phase_residual(&self.ops, &self.inv, tol.get("flat_normal")) {
                Ok(iso) => self.entry("isothermic", &iso.residual, &iso.mask, iso_tol),
                Err(e) => skipped("isothermic", iso_tol, e.to_string()),
            },
        );
        out.push(self.entry("six_form", &f.omega, m, tol.get("six_form")));
        let willmore_ok = out[0].verdict == Verdict::Pass;
        let holo = self.entry(
            "six_form_holomorphy",
            &f.omega_holomorphy,
            m,
            tol.get("six_form_holomorphy"),
        );
        out.push(if willmore_ok {
            holo
        } else {
            ResidualEntry {
                verdict: Verdict::Skipped,
                note: Some("holomorphy is only expected for Willmore surfaces".into()),
                ..holo
            }
        });
        out
    }

    pub fn report(&self, tol: &Tolerances) -> DiagnosticsReport {
        let spec = &self.chart.spec;
        let entries = self.entries(tol);
        let w_conf = willmore_energy_conformal(&self.inv, spec).expect("kk_bar lives on the chart grid");
        let euclid = willmore_energy_euclidean(&self.chart, &self.ops);
        let (w_euclidean, w_euclidean_error) = match &euclid {
            Ok(e) => (Some(e.value), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let relative_gap = w_euclidean
            .filter(|_| w_conf.value.abs() > 1e-12)
            .map(|we| (w_conf.value - we).abs() / w_conf.value.abs());
        let spans = match reduction_span_check(&self.frame, &self.ops, &self.inv) {
            Ok((lift_rank, kappa_jet_rank)) => Spans {
                lift_rank: Some(lift_rank),
                kappa_jet_rank: Some(kappa_jet_rank),
                error: None,
            },
            Err(e) => Spans {
                lift_rank: None,
                kappa_jet_rank: None,
                error: Some(e.to_string()),
            },
        };
        DiagnosticsReport {
            schema_version: SCHEMA_VERSION,
            chart: ChartInfo {
                label: self.chart.label.clone(),
                nu: spec.nu,
                nv: spec.nv,
                ambient_n: self.chart.ambient_n,
                discretization: if spec.fully_periodic() {
                    "spectral"
                } else {
                    "finite_difference"
                },
                fd_order: spec.fd_order,
                periodic_u: spec.periodic_u,
                periodic_v: spec.periodic_v,
                lu: spec.lu,
                lv: spec.lv,
                shear: spec.shear,
            },
            seed: None,
            passed: entries.iter().all(|e| e.verdict != Verdict::Fail),
            entries,
            energies: Energies {
                w_conformal: w_conf.value,
                partial_domain: w_conf.partial_domain,
                w_euclidean,
                w_euclidean_error,
                relative_gap,
            },
            spans,
            frame: FrameInfo {
                conformality_defect: self.frame.conformality_defect,
                relations: self.frame.relation_defects(),
                masked_fraction: self.inv.mask.masked_fraction(),
                umbilic_fraction: self.inv.umbilic_free.masked_fraction(),
            },
            hopf: None,
            transforms: Vec::new(),
        }
    }

    /// Per-point values for external plotting; masked entries are NaN.
    pub fn pointwise_rows(&self) -> Vec<FieldRow> {
        let f = &self.fields;
        let spec = &self.chart.spec;
        let (m, mu) = (&self.inv.mask, &self.inv.umbilic_free);
        let pick = |field: &ScalarField, mask: &Mask, p: usize| {
            if mask.is_valid(p) {
                field.data[p].norm()
            } else {
                f64::NAN
            }
        };
        (0..spec.len())
            .map(|p| {
                let (u, v) = spec.coords(p / spec.nv, p % spec.nv);
                FieldRow {
                    u,
                    v,
                    kkbar: if m.is_valid(p) {
                        self.inv.kk_bar.data[p].re
                    } else {
                        f64::NAN
                    },
                    abs_kk: if m.is_valid(p) {
                        self.inv.kk.data[p].norm()
                    } else {
                        f64::NAN
                    },
                    theta: if mu.is_valid(p) {
                        self.inv.theta.data[p].re
                    } else {
                        f64::NAN
                    },
                    res_willmore: pick(&f.willmore, m, p),
                    res_swillmore: pick(&f.s_willmore, mu, p),
                    res_flat: pick(&f.flat_normal, mu, p),
                    res_gauss: pick(&f.gauss, m, p),
                    res_codazzi: pick(&f.codazzi, m, p),
                    omega_abs: pick(&f.omega, m, p),
                }
            })
            .collect()
    }
}

fn skipped(name: &str, tol: f64, note: String) -> ResidualEntry {
    ResidualEntry {
        name: name.into(),
        linf: f64::NAN,
        l2: f64::NAN,
        min: f64::NAN,
        verdict: Verdict::Skipped,
        tolerance: tol,
        masked_fraction: 1.0,
        note: Some(note),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldRow {
    pub u: f64,
    pub v: f64,
    pub kkbar: f64,
    pub abs_kk: f64,
    pub theta: f64,
    pub res_willmore: f64,
    pub res_swillmore: f64,
    pub res_flat: f64,
    pub res_gauss: f64,
    pub res_codazzi: f64,
    pub omega_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartInfo {
    pub label: String,
    pub nu: usize,
    pub nv: usize,
    pub ambient_n: usize,
    pub discretization: &'static str,
    pub fd_order: usize,
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub lu: f64,
    pub lv: f64,
    pub shear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Energies {
    pub w_conformal: f64,
    pub partial_domain: bool,
    pub w_euclidean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_euclidean_error: Option<String>,
    pub relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spans {
    pub lift_rank: Option<usize>,
    pub kappa_jet_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameInfo {
    pub conformality_defect: f64,
    pub relations: FrameDefects,
    pub masked_fraction: f64,
    pub umbilic_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub schema_version: u32,
    pub chart: ChartInfo,
    pub seed: Option<u64>,
    pub passed: bool,
    pub entries: Vec<ResidualEntry>,
    pub energies: Energies,
    pub spans: Spans,
    pub frame: FrameInfo,
    pub hopf: Option<crate::gallery::HopfChartResult>,
    pub transforms: Vec<String>,
}

impl DiagnosticsReport {
    pub fn entry(&self, name: &str) -> Option<&ResidualEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Builds a synthetic normal-bundle vector `sum_a c_a e_{offset+a}` in a
/// Minkowski space of dimension `dim` (no timelike component).
pub fn synthetic_normal(dim: usize, offset: usize, coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut v = vec![real(0.0); dim];
    for (a, c) in coeffs.iter().enumerate() {
        v[offset + a] = *c;
    }
    v
}

/// Convenience for tests: a vector field from per-point vectors on `spec`.
pub fn field_from_points(spec: &GridSpec, points: &[Vec<Complex64>]) -> VectorField {
    VectorField::from_points(spec, points.first().map_or(0, |p| p.len()), points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn synthetic_flatness_values() {
        let k = synthetic_normal(6, 3, &[c(1.0, 1.0), c(2.0, 2.0)]);
        assert!(flatness_defect(&k).abs() < 1e-14);
        let k = synthetic_normal(6, 3, &[c(1.0, 0.0), c(0.0, 1.0)]);
        assert!((flatness_defect(&k) - 2.0).abs() < 1e-15);
        assert!((crate::lorentz::pair_hermitian(&k, &k) - 2.0).abs() < 1e-15);
        assert!(pair(&k, &k).norm() < 1e-15);
    }

    #[test]
    fn synthetic_s_willmore_and_six_form_values() {
        let psi3 = synthetic_normal(6, 3, &[c(1.0, 0.0)]);
        let psi4 = synthetic_normal(6, 4, &[c(1.0, 0.0)]);
        let five: Vec<Complex64> = psi3.iter().map(|z| 5.0 * z).collect();
        assert!(s_willmore_defect(&psi3, &five) < 1e-15);
        assert!((s_willmore_defect(&psi3, &psi4) - 1.0).abs() < 1e-15);
        assert!(six_form_value(&psi3, &five).norm() < 1e-15);
        assert!((six_form_value(&psi3, &psi4) - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn clifford_diagnostics_vanish() {
        let chart = gallery::clifford(32, 32).unwrap();
        let a = Analysis::of(&chart).unwrap();
        let report = a.report(&Tolerances::for_spec(&chart.spec));
        for e in &report.entries {
            assert!(e.verdict == Verdict::Pass, "{e:?}");
            assert!(e.linf < 1e-8, "{e:?}");
        }
        assert!(report.entry("six_form").unwrap().linf < 1e-12);
        assert_eq!(report.spans.lift_rank, Some(5));
        assert_eq!(report.spans.kappa_jet_rank, Some(1));
        assert!(report.passed);
    }

    #[test]
    fn round_sphere_is_totally_umbilic() {
        let chart = gallery::round_sphere(64, 32, gallery::MERCATOR_EXTENT).unwrap();
        let a = Analysis::of(&chart).unwrap();
        assert!(a.inv.kk_bar.linf(&a.inv.mask) < 1e-12);
        let w = willmore_energy_conformal(&a.inv, &chart.spec).unwrap();
        assert!(w.value.abs() < 1e-8 && w.partial_domain);
        assert_eq!(a.inv.umbilic_free.valid_count(), 0);
    }

    #[test]
    fn unwrapping_removes_jumps_and_winding() {
        let spec = GridSpec::periodic(16, 16, std::f64::consts::TAU, std::f64::consts::TAU).unwrap();
        let phase: Vec<f64> = (0..spec.len())
            .map(|p| {
                let (u, v) = spec.coords(p / 16, p % 16);
                wrap(u + 0.3 * v.sin())
            })
            .collect();
        let (out, mask) = unwrap_phase(&phase, &spec);
        assert_eq!(mask.valid_count(), spec.len());
        // the winding in u is removed, leaving the periodic part
        for p in 0..spec.len() {
            let (_, v) = spec.coords(p / 16, p % 16);
            assert!((out[p] - 0.3 * v.sin()).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn reduced_system_zero_fixtures() {
        let spec = GridSpec::new(24, 24, 2.0, 2.0, false, false).unwrap();
        let zero = ScalarField::zeros(&spec);
        let ks = [zero.clone(), zero.clone(), zero.clone(), zero.clone()];
        let (a, b) = reduced_system_residual(&ks, &zero, &zero, &spec).unwrap();
        assert_eq!(a.linf(&Mask::all(spec.len())), 0.0);
        assert_eq!(b.linf(&Mask::all(spec.len())), 0.0);
        let bad = GridSpec::new(16, 24, 2.0, 2.0, false, false).unwrap();
        assert!(reduced_system_residual(&ks, &ScalarField::zeros(&bad), &zero, &spec).is_err());
    }
}
