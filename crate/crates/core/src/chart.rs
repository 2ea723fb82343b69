//! Conformally parametrized surface patches in the unit sphere S^n.

use num_complex::Complex64;

use crate::calculus::{GridOps, GridSpec, Mask, BOUNDARY_MARGIN};
use crate::error::{Result, WlabError};

const UNIT_TOL: f64 = 1e-12;

/// Grid samples of a map into S^n ⊂ R^{n+1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub label: String,
    pub spec: GridSpec,
    /// Target sphere dimension `n`; points live in R^{n+1}.
    pub ambient_n: usize,
    /// Point-major storage, `ambient_n + 1` coordinates per grid point.
    points: Vec<f64>,
}

impl Chart {
    pub fn new(label: impl Into<String>, spec: GridSpec, ambient_n: usize, points: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        let width = ambient_n + 1;
        if points.len() != spec.len() * width {
            return Err(WlabError::DimensionMismatch {
                expected: spec.len() * width,
                got: points.len(),
            });
        }
        if ambient_n < 3 {
            return Err(WlabError::InvalidChart(format!(
                "target sphere must have dimension >= 3, got {ambient_n}"
            )));
        }
        let chart = Self {
            label: label.into(),
            spec,
            ambient_n,
            points,
        };
        chart.check_unit()?;
        Ok(chart)
    }

    /// Samples `f(u, v)` (which must return `ambient_n + 1` coordinates) on the grid.
    pub fn from_fn(
        label: impl Into<String>,
        spec: GridSpec,
        ambient_n: usize,
        f: impl Fn(f64, f64) -> Vec<f64>,
    ) -> Result<Self> {
        let mut points = Vec::with_capacity(spec.len() * (ambient_n + 1));
        for i in 0..spec.nu {
            for j in 0..spec.nv {
                let (u, v) = spec.coords(i, j);
                points.extend(f(u, v));
            }
        }
        Self::new(label, spec, ambient_n, points)
    }

    pub fn width(&self) -> usize {
        self.ambient_n + 1
    }

    pub fn point(&self, p: usize) -> &[f64] {
        let w = self.width();
        &self.points[p * w..(p + 1) * w]
    }

    pub fn raw_points(&self) -> &[f64] {
        &self.points
    }

    fn check_unit(&self) -> Result<()> {
        for p in 0..self.spec.len() {
            let n2: f64 = self.point(p).iter().map(|x| x * x).sum();
            if (n2.sqrt() - 1.0).abs() > UNIT_TOL || !n2.is_finite() {
                return Err(WlabError::InvalidChart(format!(
                    "point {p} has norm {:.15} (not on the unit sphere)",
                    n2.sqrt()
                )));
            }
        }
        Ok(())
    }

    /// Largest `|<x_z,x_z>| / <x_z,x_zbar>` over the interior (Euclidean bilinear pairing).
    pub fn conformality_defect(&self, ops: &GridOps) -> Result<f64> {
        let spec = &self.spec;
        let mut xz_xz = vec![Complex64::new(0.0, 0.0); spec.len()];
        let mut xz_xzbar = vec![0.0; spec.len()];
        for c in 0..self.width() {
            let comp = crate::calculus::ScalarField::from_real(
                spec,
                &(0..spec.len()).map(|p| self.point(p)[c]).collect::<Vec<_>>(),
            )?;
            let xz = ops.dz(&comp)?;
            for (p, z) in xz.data.iter().enumerate() {
                xz_xz[p] += z * z;
                xz_xzbar[p] += z.norm_sqr();
            }
        }
        let mask = spec.interior_mask(BOUNDARY_MARGIN);
        Ok(ratio_max(&xz_xz, &xz_xzbar, &mask))
    }

    /// Same surface in S^{n_target} through zero padding.
    pub fn include_in_higher_sphere(&self, n_target: usize) -> Result<Chart> {
        if n_target < self.ambient_n {
            return Err(WlabError::InvalidParameter {
                name: "n_target".into(),
                reason: format!("{n_target} < current ambient dimension {}", self.ambient_n),
            });
        }
        let w = self.width();
        let mut points = Vec::with_capacity(self.spec.len() * (n_target + 1));
        for p in 0..self.spec.len() {
            points.extend_from_slice(&self.points[p * w..(p + 1) * w]);
            points.extend(std::iter::repeat_n(0.0, n_target - self.ambient_n));
        }
        Chart::new(self.label.clone(), self.spec.clone(), n_target, points)
    }

    /// Acts on the lifts `(1, x)` and re-projects to the sphere.
    pub fn apply_mobius(&self, m: &crate::lorentz::MobiusMap) -> Result<Chart> {
        if m.dim() != self.ambient_n + 2 {
            return Err(WlabError::DimensionMismatch {
                expected: self.ambient_n + 2,
                got: m.dim(),
            });
        }
        let mut points = Vec::with_capacity(self.points.len());
        for p in 0..self.spec.len() {
            let y = crate::lorentz::MinkowskiVec::lift(self.point(p));
            let ty = m.apply(&y.0);
            if ty[0] <= 1e-10 {
                return Err(WlabError::ProjectionSingular(ty[0]));
            }
            // (t, X) is null, so |X / t| = 1 up to roundoff
            points.extend(ty[1..].iter().map(|c| c / ty[0]));
        }
        Chart::new(self.label.clone(), self.spec.clone(), self.ambient_n, points)
    }

    /// Interior mask for residual norms.
    pub fn interior_mask(&self) -> Mask {
        self.spec.interior_mask(self.spec.residual_margin())
    }
}

fn ratio_max(num: &[Complex64], den: &[f64], mask: &Mask) -> f64 {
    num.iter()
        .zip(den)
        .zip(&mask.0)
        .filter(|(_, &ok)| ok)
        .map(|((n, d), _)| if *d > 0.0 { n.norm() / d } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn clifford(n: usize) -> Chart {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let spec = GridSpec::periodic(n, n, TAU, TAU).unwrap();
        Chart::from_fn("clifford", spec, 3, |u, v| {
            vec![s * u.cos(), s * u.sin(), s * v.cos(), s * v.sin()]
        })
        .unwrap()
    }

    #[test]
    fn rejects_points_off_the_sphere() {
        let spec = GridSpec::periodic(8, 8, 1.0, 1.0).unwrap();
        let err = Chart::from_fn("bad", spec, 3, |_, _| vec![1.0, 0.1, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, WlabError::InvalidChart(_)));
    }

    #[test]
    fn clifford_is_conformal_and_spherical_coordinates_are_not() {
        let c = clifford(32);
        let ops = GridOps::new(&c.spec).unwrap();
        assert!(c.conformality_defect(&ops).unwrap() < 1e-12);

        // (polar, azimuth) on S^2 ⊂ S^3, poles excluded
        let spec = GridSpec::new(32, 32, 2.0, TAU, false, true)
            .unwrap()
            .with_origin(0.5, 0.0);
        let sph = Chart::from_fn("spherical", spec, 3, |a, b| {
            vec![a.sin() * b.cos(), a.sin() * b.sin(), a.cos(), 0.0]
        })
        .unwrap();
        let ops = GridOps::new(&sph.spec).unwrap();
        assert!(sph.conformality_defect(&ops).unwrap() > 0.1);
    }

    #[test]
    fn identity_mobius_and_padding() {
        let c = clifford(16);
        let same = c.apply_mobius(&crate::lorentz::MobiusMap::identity(5)).unwrap();
        assert_eq!(same, c);
        let padded = c.include_in_higher_sphere(5).unwrap();
        assert_eq!(padded.width(), 6);
        assert_eq!(&padded.point(7)[..4], c.point(7));
        assert!(c.include_in_higher_sphere(2).is_err());
    }
}
