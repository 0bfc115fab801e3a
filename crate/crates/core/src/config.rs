//! JSON run configuration for geodesic simulations.
//!
//! Initial data are either a named preset or explicit Fourier coefficients
//! `[k…, re, im]` meaning `c(k) = re + i·im` in `f = Σ c(k) e^{ik·x}`. Only
//! one of each conjugate pair `±k` may be listed; the other is filled in so
//! the field is real.
//!
//! ```json
//! {"schema_version": 1, "dimension": 1, "points_per_axis": 256,
//!  "dt": 0.001, "t_end": 1.0, "output_every": 10,
//!  "initial": {"preset": "hs_cosine"}}
//! ```

use std::collections::HashSet;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};
use crate::flow::{SimConfig, DEFAULT_BLOWUP_THRESHOLD};
use crate::spectral::{FourierScalar, GridSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// σ = cos x, ρ = ½.
    HsCosine,
    /// σ = 0, ρ = 1.
    StationaryRho,
    /// σ = cos x, ρ = 1 + ½ sin x.
    ModulatedRho,
    /// Seeded smooth σ (modes ≤ 4) and ρ = 1 + small perturbation.
    Random,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_coeffs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_coeffs: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub dimension: usize,
    pub points_per_axis: usize,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub initial: InitialData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Energy-drift tolerance reported alongside the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_threshold: Option<f64>,
}

fn invalid(msg: impl Into<String>) -> GeoError {
    GeoError::InvalidConfig(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.dimension, self.points_per_axis)
    }

    /// Checks everything that can be checked without integrating.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if let Some(tol) = self.tolerance {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(invalid("tolerance must be positive"));
            }
        }
        self.sim_config().map(|_| ())
    }

    pub fn initial_fields(&self) -> Result<(FourierScalar, FourierScalar)> {
        let spec = self.spec()?;
        let init = &self.initial;
        match (
            init.preset,
            init.sigma_coeffs.is_some() || init.rho_coeffs.is_some(),
        ) {
            (Some(_), true) => Err(invalid(
                "initial: give either a preset or coefficient lists, not both",
            )),
            (None, false) => Err(invalid("initial: missing preset or coefficient lists")),
            (Some(preset), false) => Ok(preset_fields(preset, spec, self.seed.unwrap_or(0))),
            (None, true) => {
                let sigma = coefficients(
                    spec,
                    init.sigma_coeffs.as_deref().unwrap_or(&[]),
                    "sigma_coeffs",
                )?;
                let rho = coefficients(
                    spec,
                    init.rho_coeffs.as_deref().unwrap_or(&[]),
                    "rho_coeffs",
                )?;
                if sigma.coefficient(&vec![0; spec.dimension()]).norm() != 0.0 {
                    return Err(invalid(
                        "sigma_coeffs: the k = 0 coefficient must be zero (σ has zero mean)",
                    ));
                }
                Ok((sigma, rho))
            }
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let (sigma0, rho0) = self.initial_fields()?;
        SimConfig::new(self.dt, self.t_end, self.output_every, sigma0, rho0)?
            .with_blowup_threshold(self.blowup_threshold.unwrap_or(DEFAULT_BLOWUP_THRESHOLD))
    }
}

pub fn preset_fields(preset: Preset, spec: GridSpec, seed: u64) -> (FourierScalar, FourierScalar) {
    let cos_x = || FourierScalar::from_fn(spec, |x| x[0].cos());
    match preset {
        Preset::HsCosine => (cos_x(), FourierScalar::constant(spec, 0.5)),
        Preset::StationaryRho => (
            FourierScalar::zeros(spec),
            FourierScalar::constant(spec, 1.0),
        ),
        Preset::ModulatedRho => (
            cos_x(),
            FourierScalar::from_fn(spec, |x| 1.0 + 0.5 * x[0].sin()),
        ),
        Preset::Random => {
            let modes = 4.min(spec.dealias_cutoff());
            let sigma = FourierScalar::random_band_limited(spec, seed, modes, 2.0, false)
                .expect("modes within cutoff");
            let bump =
                FourierScalar::random_band_limited(spec, seed.wrapping_add(1), modes, 2.0, false)
                    .expect("modes within cutoff");
            (
                sigma,
                &FourierScalar::constant(spec, 1.0) + &bump.scale(0.1),
            )
        }
    }
}

fn coefficients(spec: GridSpec, entries: &[Vec<f64>], name: &str) -> Result<FourierScalar> {
    let dim = spec.dimension();
    let cutoff = spec.dealias_cutoff() as i64;
    let mut seen = HashSet::new();
    let mut modes = Vec::with_capacity(entries.len());
    for entry in entries {
        if entry.len() != dim + 2 {
            return Err(invalid(format!(
                "{name}: entry {entry:?} must have {} numbers [k…, re, im]",
                dim + 2
            )));
        }
        if entry.iter().any(|v| !v.is_finite()) {
            return Err(invalid(format!("{name}: non-finite value in {entry:?}")));
        }
        let mut k = Vec::with_capacity(dim);
        for &v in &entry[..dim] {
            if v.fract() != 0.0 || v.abs() > cutoff as f64 {
                return Err(invalid(format!(
                    "{name}: wavevector {:?} must be integers with |k_i| <= {cutoff}",
                    &entry[..dim]
                )));
            }
            k.push(v as i64);
        }
        let neg: Vec<i64> = k.iter().map(|v| -v).collect();
        let canonical = if k > neg { k.clone() } else { neg };
        if !seen.insert(canonical) {
            return Err(invalid(format!(
                "{name}: duplicate wavevector {k:?} (or its negative)"
            )));
        }
        let (re, im) = (entry[dim], entry[dim + 1]);
        if k.iter().all(|&v| v == 0) && im != 0.0 {
            return Err(invalid(format!(
                "{name}: the k = 0 coefficient must be real"
            )));
        }
        modes.push((k, Complex64::new(re, im)));
    }
    FourierScalar::from_modes(spec, &modes)
}
