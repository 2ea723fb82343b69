//! Run configuration files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wlab_core::diagnostics::{Tolerances, RESIDUAL_NAMES};
use wlab_core::gallery::{self, BuiltSurface, Surface, GALLERY};

use crate::CliError;

/// Smallest grid dimension accepted from a config.
pub const MIN_GRID: usize = 8;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub transforms: Vec<Transform>,
    #[serde(default)]
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nu: usize,
    pub nv: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Transform {
    /// Random Moebius map; the seed defaults to one derived from the run seed.
    Mobius {
        #[serde(default)]
        seed: Option<u64>,
        magnitude: f64,
    },
    /// Zero-padding into S^n.
    IncludeN(usize),
    /// Smooth random perturbation off the original surface.
    Perturb {
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Output {
    Report(PathBuf),
    Fields(PathBuf),
    Convergence {
        sizes: Vec<usize>,
        #[serde(default)]
        path: Option<PathBuf>,
    },
}

fn parse_at<T: DeserializeOwned>(value: serde_json::Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let at = if path == "." {
            prefix.to_string()
        } else {
            format!("{prefix}.{path}")
        };
        CliError::Config(format!("{at}: {}", e.into_inner()))
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("{path}: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.grid.nu < MIN_GRID || self.grid.nv < MIN_GRID {
            return Err(CliError::Config(format!(
                "grid: sizes must be at least {MIN_GRID}, got {}x{}",
                self.grid.nu, self.grid.nv
            )));
        }
        for key in self.tolerances.keys() {
            if key != "default" && !RESIDUAL_NAMES.contains(&key.as_str()) {
                return Err(CliError::Config(format!(
                    "tolerances.{key}: unknown residual (expected one of default, {})",
                    RESIDUAL_NAMES.join(", ")
                )));
            }
        }
        if let Some((key, _)) = self.tolerances.iter().find(|(_, &t)| !(t > 0.0)) {
            return Err(CliError::Config(format!("tolerances.{key}: must be positive")));
        }
        self.surface()?;
        Ok(())
    }

    /// The gallery surface named by the config, with its parameters.
    pub fn surface(&self) -> Result<Surface, CliError> {
        let params = match &self.surface.params {
            serde_json::Value::Null => serde_json::Value::Object(Default::default()),
            v => v.clone(),
        };
        let at = "surface.params";
        Ok(match self.surface.name.as_str() {
            "clifford" => {
                parse_at::<gallery::NoParams>(params, at)?;
                Surface::Clifford
            }
            "round_sphere" => Surface::RoundSphere(parse_at(params, at)?),
            "pinkall_hopf_torus" => Surface::PinkallHopfTorus(parse_at(params, at)?),
            "hopf_from_curvature" => Surface::HopfFromCurvature(parse_at(params, at)?),
            "homogeneous_cp2_hopf" => Surface::HomogeneousCp2Hopf(parse_at(params, at)?),
            "veronese" => Surface::Veronese(parse_at(params, at)?),
            other => {
                let known: Vec<&str> = GALLERY.iter().map(|g| g.name).collect();
                return Err(CliError::Config(format!(
                    "surface.name: unknown surface `{other}` (known: {})",
                    known.join(", ")
                )));
            }
        })
    }

    pub fn tolerances(&self, spec: &wlab_core::calculus::GridSpec) -> Tolerances {
        let mut tol = Tolerances::for_spec(spec);
        for (key, &value) in &self.tolerances {
            if key == "default" {
                tol.default = value;
            } else {
                tol = tol.with(key, value);
            }
        }
        tol
    }

    /// Builds the surface at the given grid size and applies the transforms in order.
    pub fn build(&self, nu: usize, nv: usize) -> Result<(BuiltSurface, Vec<Transform>), CliError> {
        let chart_err = |e: wlab_core::WlabError| CliError::Chart(e.to_string());
        let mut built = self.surface()?.build(nu, nv).map_err(chart_err)?;
        let mut applied = Vec::with_capacity(self.transforms.len());
        for (k, t) in self.transforms.iter().enumerate() {
            // distinct default seeds per transform, all determined by the run seed
            let derived = self.seed.wrapping_mul(1000).wrapping_add(k as u64);
            let resolved = match *t {
                Transform::Mobius { seed, magnitude } => {
                    let seed = seed.unwrap_or(derived);
                    let map = wlab_core::lorentz::random_mobius(built.chart.ambient_n, seed, magnitude);
                    built.chart = built.chart.apply_mobius(&map).map_err(chart_err)?;
                    Transform::Mobius {
                        seed: Some(seed),
                        magnitude,
                    }
                }
                Transform::IncludeN(n) => {
                    built.chart = built.chart.include_in_higher_sphere(n).map_err(chart_err)?;
                    Transform::IncludeN(n)
                }
                Transform::Perturb { amplitude, seed } => {
                    let seed = seed.unwrap_or(derived);
                    built.chart = gallery::perturb(&built.chart, amplitude, seed).map_err(chart_err)?;
                    Transform::Perturb {
                        amplitude,
                        seed: Some(seed),
                    }
                }
            };
            applied.push(resolved);
        }
        Ok((built, applied))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::parse(r#"{"surface": {"name": "clifford"}, "grid": {"nu": 16, "nv": 16}}"#).unwrap();
        assert_eq!(cfg.seed, 0);
        assert!(cfg.transforms.is_empty() && cfg.outputs.is_empty());
        assert_eq!(cfg.surface().unwrap(), Surface::Clifford);
    }

    #[test]
    fn errors_name_the_offending_key() {
        let err = |text: &str| match RunConfig::parse(text) {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected a config error, got {other:?}"),
        };
        let msg = err(r#"{"surface": {"name": "clifford"}, "grid": {"nu": 16, "nv": "x"}}"#);
        assert!(msg.starts_with("grid.nv"), "{msg}");
        let msg =
            err(r#"{"surface": {"name": "pinkall_hopf_torus", "params": {"cc": 1}}, "grid": {"nu": 16, "nv": 16}}"#);
        assert!(msg.contains("surface.params") && msg.contains("cc"), "{msg}");
        let msg =
            err(r#"{"surface": {"name": "clifford"}, "grid": {"nu": 16, "nv": 16}, "tolerances": {"wilmore": 1}}"#);
        assert!(msg.starts_with("tolerances.wilmore"), "{msg}");
        let msg = err(r#"{"surface": {"name": "torus"}, "grid": {"nu": 16, "nv": 16}}"#);
        assert!(msg.starts_with("surface.name"), "{msg}");
        let msg = err(r#"{"surface": {"name": "clifford"}, "grid": {"nu": 4, "nv": 16}}"#);
        assert!(msg.starts_with("grid"), "{msg}");
        let msg = err(r#"{"surface": {"name": "clifford"}, "grid": {"nu": 16, "nv": 16}, "colour": 1}"#);
        assert!(msg.contains("colour"), "{msg}");
    }

    #[test]
    fn transforms_resolve_their_seeds() {
        let cfg = RunConfig::parse(
            r#"{"surface": {"name": "clifford"}, "grid": {"nu": 16, "nv": 16}, "seed": 4,
                "transforms": [{"include_n": 5}, {"mobius": {"magnitude": 0.5}}]}"#,
        )
        .unwrap();
        let (built, applied) = cfg.build(16, 16).unwrap();
        assert_eq!(built.chart.ambient_n, 5);
        assert_eq!(
            applied[1],
            Transform::Mobius {
                seed: Some(4001),
                magnitude: 0.5
            }
        );
    }

    #[test]
    fn tolerance_overrides_apply() {
        let cfg = RunConfig::parse(
            r#"{"surface": {"name": "clifford"}, "grid": {"nu": 16, "nv": 16},
                "tolerances": {"default": 1e-9, "flat_normal": 1e-3}}"#,
        )
        .unwrap();
        let tol = cfg.tolerances(&wlab_core::calculus::GridSpec::periodic(16, 16, 1.0, 1.0).unwrap());
        assert_eq!(tol.get("willmore"), 1e-9);
        assert_eq!(tol.get("flat_normal"), 1e-3);
    }
}
