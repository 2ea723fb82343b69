//! Example surfaces and transformations.

mod hopf;
mod ode;

pub use hopf::{
    closing_period, complete_amplitudes, constant_curvature_frequencies, homogeneous_cp2_hopf, homogeneous_curvatures,
    homogeneous_hopf, hopf_from_curvature, pinkall_data, pinkall_hopf_torus, wrap_angle, CurveSpec, HopfChartResult,
    CLOSURE_TOL, MAX_DENOMINATOR,
};
pub use ode::{FrameIntegrator, FrameState, Profile, FRAME_DRIFT_LIMIT};

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::GridSpec;
use crate::chart::Chart;
use crate::error::{Result, WlabError};
use crate::lorentz::random_mobius;

/// Default half-width of the Mercator strip `|u| <= U`.
pub const MERCATOR_EXTENT: f64 = 2.5;

/// `(1/sqrt 2)(cos u, sin u, cos v, sin v)` on a 2 pi × 2 pi spectral grid.
pub fn clifford(nu: usize, nv: usize) -> Result<Chart> {
    let s = FRAC_1_SQRT_2;
    let spec = GridSpec::periodic(nu, nv, TAU, TAU)?;
    Chart::from_fn("clifford", spec, 3, |u, v| {
        vec![s * u.cos(), s * u.sin(), s * v.cos(), s * v.sin()]
    })
}

fn mercator_spec(nu: usize, nv: usize, extent: f64) -> Result<GridSpec> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(WlabError::InvalidParameter {
            name: "u_max".into(),
            reason: format!("must be positive, got {extent}"),
        });
    }
    Ok(GridSpec::new(nu, nv, 2.0 * extent, TAU, false, true)?.with_origin(-extent, 0.0))
}

/// Conformal coordinates on the unit sphere S^2, poles excluded.
fn mercator(u: f64, v: f64) -> [f64; 3] {
    let r = 1.0 / u.cosh();
    [r * v.cos(), r * v.sin(), u.tanh()]
}

/// Totally umbilic S^2 ⊂ S^3 in Mercator coordinates, `u ∈ [-extent, extent]`.
pub fn round_sphere(nu: usize, nv: usize, extent: f64) -> Result<Chart> {
    let spec = mercator_spec(nu, nv, extent)?;
    Chart::from_fn("round_sphere", spec, 3, |u, v| {
        let [x, y, z] = mercator(u, v);
        vec![x, y, z, 0.0]
    })
}

/// Veronese surface S^2 → S^4 composed with Mercator coordinates.
pub fn veronese(nu: usize, nv: usize, extent: f64) -> Result<Chart> {
    let spec = mercator_spec(nu, nv, extent)?;
    let r3 = 3f64.sqrt();
    Chart::from_fn("veronese", spec, 4, |u, v| {
        let [x, y, z] = mercator(u, v);
        vec![
            r3 * y * z,
            r3 * x * z,
            r3 * x * y,
            r3 / 2.0 * (x * x - y * y),
            (x * x + y * y - 2.0 * z * z) / 2.0,
        ]
    })
}

/// `x -> (x + eps F(x)) / |x + eps F(x)|` with a seeded random quadratic map `F`.
/// Acting on the points keeps every periodicity of the chart; the result is
/// no longer conformal.
pub fn perturb(chart: &Chart, amplitude: f64, seed: u64) -> Result<Chart> {
    let w = chart.width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lin: Vec<f64> = (0..w * w).map(|_| rng.random_range(-1.0..1.0)).collect();
    let quad: Vec<f64> = (0..w * w * w).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut points = Vec::with_capacity(chart.raw_points().len());
    for p in 0..chart.spec.len() {
        let x = chart.point(p);
        let mut y: Vec<f64> = x.to_vec();
        for r in 0..w {
            let mut f = 0.0;
            for a in 0..w {
                f += lin[r * w + a] * x[a];
                for b in 0..w {
                    f += quad[(r * w + a) * w + b] * x[a] * x[b];
                }
            }
            y[r] += amplitude * f;
        }
        let n = y.iter().map(|c| c * c).sum::<f64>().sqrt();
        points.extend(y.iter().map(|c| c / n));
    }
    Chart::new(
        format!("{}+perturbed", chart.label),
        chart.spec.clone(),
        chart.ambient_n,
        points,
    )
}

/// Includes in S^{n_target} and applies the seeded random Möbius map of the given magnitude.
pub fn scramble(chart: &Chart, n_target: usize, seed: u64, magnitude: f64) -> Result<Chart> {
    let wide = chart.include_in_higher_sphere(n_target)?;
    wide.apply_mobius(&random_mobius(n_target, seed, magnitude))
}

fn default_extent() -> f64 {
    MERCATOR_EXTENT
}

fn default_complex_dim() -> usize {
    3
}

fn zero_profile() -> Profile {
    Profile::Constant(0.0)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoParams {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MercatorParams {
    #[serde(default = "default_extent")]
    pub u_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinkallParams {
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureParams {
    pub k1: Profile,
    #[serde(default = "zero_profile")]
    pub k2: Profile,
    #[serde(default)]
    pub t_period: Option<f64>,
    #[serde(default = "default_complex_dim")]
    pub ambient_complex_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cp2Params {
    pub lambdas: [f64; 3],
    #[serde(default)]
    pub amps: Option<[f64; 3]>,
}

/// A gallery surface with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Surface {
    Clifford,
    RoundSphere(MercatorParams),
    PinkallHopfTorus(PinkallParams),
    HopfFromCurvature(CurvatureParams),
    HomogeneousCp2Hopf(Cp2Params),
    Veronese(MercatorParams),
}

/// A constructed chart plus the Hopf metadata when the surface is a Hopf surface.
#[derive(Debug, Clone)]
pub struct BuiltSurface {
    pub chart: Chart,
    pub hopf: Option<HopfChartResult>,
}

impl Surface {
    pub fn name(&self) -> &'static str {
        match self {
            Surface::Clifford => "clifford",
            Surface::RoundSphere(_) => "round_sphere",
            Surface::PinkallHopfTorus(_) => "pinkall_hopf_torus",
            Surface::HopfFromCurvature(_) => "hopf_from_curvature",
            Surface::HomogeneousCp2Hopf(_) => "homogeneous_cp2_hopf",
            Surface::Veronese(_) => "veronese",
        }
    }

    pub fn build(&self, nu: usize, nv: usize) -> Result<BuiltSurface> {
        let hopf = |r: HopfChartResult| BuiltSurface {
            chart: r.chart.clone(),
            hopf: Some(r),
        };
        let plain = |chart: Chart| BuiltSurface { chart, hopf: None };
        Ok(match self {
            Surface::Clifford => plain(clifford(nu, nv)?),
            Surface::RoundSphere(p) => plain(round_sphere(nu, nv, p.u_max)?),
            Surface::Veronese(p) => plain(veronese(nu, nv, p.u_max)?),
            Surface::PinkallHopfTorus(p) => hopf(pinkall_hopf_torus(p.c, nu, nv)?),
            Surface::HopfFromCurvature(p) => hopf(hopf_from_curvature(
                &CurveSpec {
                    k1: p.k1.clone(),
                    k2: p.k2.clone(),
                    t_period: p.t_period,
                    ambient_complex_dim: p.ambient_complex_dim,
                },
                nu,
                nv,
            )?),
            Surface::HomogeneousCp2Hopf(p) => hopf(homogeneous_cp2_hopf(p.lambdas, p.amps, nu, nv)?),
        })
    }
}

/// One parameter of a gallery entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSchema {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: Option<&'static str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub ambient: &'static str,
    pub params: &'static [ParamSchema],
}

const fn param(name: &'static str, kind: &'static str, default: Option<&'static str>) -> ParamSchema {
    ParamSchema { name, kind, default }
}

pub const GALLERY: &[GalleryEntry] = &[
    GalleryEntry {
        name: "clifford",
        description: "Clifford torus, minimal in S^3, spectral grid",
        ambient: "S^3",
        params: &[],
    },
    GalleryEntry {
        name: "round_sphere",
        description: "totally umbilic S^2 in Mercator coordinates, poles excluded",
        ambient: "S^3",
        params: &[param("u_max", "real", Some("2.5"))],
    },
    GalleryEntry {
        name: "pinkall_hopf_torus",
        description: "Hopf torus over a circle of constant curvature c (closed form)",
        ambient: "S^3",
        params: &[param("c", "real", None)],
    },
    GalleryEntry {
        name: "hopf_from_curvature",
        description: "Hopf surface over a horizontal curve integrated from curvature data",
        ambient: "S^(2m-1)",
        params: &[
            param("k1", "real | [real]", None),
            param("k2", "real | [real]", Some("0")),
            param("t_period", "real", Some("closing period for constant curvature")),
            param("ambient_complex_dim", "integer m", Some("3")),
        ],
    },
    GalleryEntry {
        name: "homogeneous_cp2_hopf",
        description: "homogeneous Hopf surface over a three-frequency curve in CP^2",
        ambient: "S^5",
        params: &[
            param("lambdas", "[real; 3]", None),
            param("amps", "[real; 3]", Some("solved from the moment conditions")),
        ],
    },
    GalleryEntry {
        name: "veronese",
        description: "Veronese surface, minimal and full in S^4, Mercator coordinates",
        ambient: "S^4",
        params: &[param("u_max", "real", Some("2.5"))],
    },
];
