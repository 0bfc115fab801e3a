//! Geodesic flow of the coset space in divergence variables `σ = div u₁`, `ρ`.
//!
//! The Euler equation only prescribes `d(div u_t)`, so `σ_t` is fixed up to a
//! constant; we take the one that keeps `mean σ = 0`. Velocities use the
//! gradient representative `u₁ = grad Δ⁻¹σ`. On T¹ this is the two-component
//! Hunter–Saxton system with the zero-mean antiderivative convention.

use serde::Serialize;

use crate::error::{GeoError, Result};
use crate::forms::{contract, d0, divergence, gradient, VectorField};
use crate::spectral::{FourierScalar, GridSpec};

/// Largest |mean σ| accepted as zero.
pub const MEAN_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicState {
    pub t: f64,
    pub sigma: FourierScalar,
    pub rho: FourierScalar,
}

impl GeodesicState {
    pub fn new(t: f64, sigma: FourierScalar, rho: FourierScalar) -> Result<Self> {
        if sigma.spec() != rho.spec() {
            return Err(GeoError::GridMismatch {
                left: sigma.spec(),
                right: rho.spec(),
            });
        }
        let mean = sigma.mean();
        if mean.abs() > MEAN_TOLERANCE {
            return Err(GeoError::NonzeroMean(mean));
        }
        Ok(Self { t, sigma, rho })
    }

    pub fn spec(&self) -> GridSpec {
        self.sigma.spec()
    }

    /// ¼∫(σ² + ρ²) dμ, which equals ⟨⟨u, u⟩⟩.
    pub fn energy(&self) -> f64 {
        0.25 * (self.sigma.inner(&self.sigma) + self.rho.inner(&self.rho))
    }

    pub fn mass(&self) -> f64 {
        self.rho.integral()
    }

    pub fn monitor(&self) -> MonitorRow {
        MonitorRow {
            t: self.t,
            energy: self.energy(),
            mass: self.mass(),
            mean_sigma: self.sigma.mean(),
            max_abs_sigma: self.sigma.sup_norm(),
            max_abs_rho: self.rho.sup_norm(),
        }
    }
}

/// Gradient field `u₁ = grad g` with `Δg = σ`, `mean g = 0`.
pub fn reconstruct_velocity(sigma: &FourierScalar) -> Result<VectorField> {
    let mean = sigma.mean();
    if mean.abs() > MEAN_TOLERANCE {
        return Err(GeoError::NonzeroMean(mean));
    }
    Ok(gradient(&sigma.inverse_laplacian()))
}

/// `(σ_t, ρ_t)` of the Euler equation.
pub fn euler_rhs(state: &GeodesicState) -> Result<(FourierScalar, FourierScalar)> {
    rhs(&state.sigma, &state.rho)
}

fn rhs(sigma: &FourierScalar, rho: &FourierScalar) -> Result<(FourierScalar, FourierScalar)> {
    let u = reconstruct_velocity(sigma)?;
    let flux =
        &(&contract(&u, &d0(sigma)) + &sigma.times(sigma).scale(0.5)) - &rho.times(rho).scale(0.5);
    let sigma_dot = (-flux).without_mean();
    let rho_dot = -divergence(&u.scaled_by(rho));
    Ok((sigma_dot, rho_dot))
}

fn check_blowup(state: &GeodesicState, threshold: f64) -> Result<()> {
    let peak = state.sigma.sup_norm().max(state.rho.sup_norm());
    if !state.sigma.is_finite() || !state.rho.is_finite() || !peak.is_finite() {
        return Err(GeoError::Blowup {
            t: state.t,
            reason: "non-finite value".into(),
        });
    }
    if peak > threshold {
        return Err(GeoError::Blowup {
            t: state.t,
            reason: format!("sup norm {peak:e} exceeds {threshold:e}"),
        });
    }
    Ok(())
}

/// One classical RK4 step; `mean σ` is re-projected to zero afterwards.
pub fn rk4_step(state: &GeodesicState, dt: f64, blowup_threshold: f64) -> Result<GeodesicState> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(GeoError::InvalidConfig(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let (s, r) = (&state.sigma, &state.rho);
    // Intermediate stages are only approximately mean-free.
    let stage = |sigma: FourierScalar, rho: FourierScalar| rhs(&sigma.without_mean(), &rho);

    let (k1s, k1r) = rhs(s, r)?;
    let (k2s, k2r) = stage(s + &k1s.scale(0.5 * dt), r + &k1r.scale(0.5 * dt))?;
    let (k3s, k3r) = stage(s + &k2s.scale(0.5 * dt), r + &k2r.scale(0.5 * dt))?;
    let (k4s, k4r) = stage(s + &k3s.scale(dt), r + &k3r.scale(dt))?;

    let combine = |y: &FourierScalar,
                   a: FourierScalar,
                   b: FourierScalar,
                   c: FourierScalar,
                   d: FourierScalar| {
        y + &(&(&(&a + &b.scale(2.0)) + &c.scale(2.0)) + &d).scale(dt / 6.0)
    };
    let next = GeodesicState {
        t: state.t + dt,
        sigma: combine(s, k1s, k2s, k3s, k4s).without_mean(),
        rho: combine(r, k1r, k2r, k3r, k4r),
    };
    check_blowup(&next, blowup_threshold)?;
    Ok(next)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub spec: GridSpec,
    pub dt: f64,
    pub t_end: f64,
    pub output_every: usize,
    pub sigma0: FourierScalar,
    pub rho0: FourierScalar,
    pub blowup_threshold: f64,
}

impl SimConfig {
    pub fn new(
        dt: f64,
        t_end: f64,
        output_every: usize,
        sigma0: FourierScalar,
        rho0: FourierScalar,
    ) -> Result<Self> {
        let config = Self {
            spec: sigma0.spec(),
            dt,
            t_end,
            output_every,
            sigma0,
            rho0,
            blowup_threshold: DEFAULT_BLOWUP_THRESHOLD,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_blowup_threshold(mut self, threshold: f64) -> Result<Self> {
        self.blowup_threshold = threshold;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GeoError::InvalidConfig(msg));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive and finite, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.dt <= self.t_end) {
            return bad(format!(
                "need dt <= t_end, got dt {} t_end {}",
                self.dt, self.t_end
            ));
        }
        if self.output_every == 0 {
            return bad("output_every must be at least 1".into());
        }
        if self.blowup_threshold.is_nan() || self.blowup_threshold <= 0.0 {
            return bad("blowup_threshold must be positive".into());
        }
        if self.sigma0.spec() != self.spec || self.rho0.spec() != self.spec {
            return bad("initial data do not live on the configured grid".into());
        }
        GeodesicState::new(0.0, self.sigma0.clone(), self.rho0.clone())?;
        Ok(())
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonitorRow {
    pub t: f64,
    pub energy: f64,
    pub mass: f64,
    pub mean_sigma: f64,
    pub max_abs_sigma: f64,
    pub max_abs_rho: f64,
}

impl MonitorRow {
    pub const HEADER: [&'static str; 6] = [
        "t",
        "energy",
        "mass",
        "mean_sigma",
        "max_abs_sigma",
        "max_abs_rho",
    ];

    pub fn values(&self) -> [f64; 6] {
        [
            self.t,
            self.energy,
            self.mass,
            self.mean_sigma,
            self.max_abs_sigma,
            self.max_abs_rho,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Blowup,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupInfo {
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSeries {
    pub status: RunStatus,
    pub velocity_representative: &'static str,
    pub rows: Vec<MonitorRow>,
    pub blowup: Option<BlowupInfo>,
    #[serde(skip)]
    pub final_state: GeodesicState,
}

impl TimeSeries {
    /// Largest |E(t) − E(0)| / E(0) over the recorded rows.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(self.rows.iter().map(|r| r.energy))
    }

    /// Largest |m(t) − m(0)| / max(|m(0)|, 1) over the recorded rows.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.rows.first().map_or(0.0, |r| r.mass);
        let scale = m0.abs().max(1.0);
        self.rows
            .iter()
            .map(|r| (r.mass - m0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn max_abs_mean_sigma(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.mean_sigma.abs())
            .fold(0.0, f64::max)
    }
}

fn relative_drift(values: impl Iterator<Item = f64>) -> f64 {
    let mut values = values.peekable();
    let Some(&first) = values.peek() else {
        return 0.0;
    };
    let scale = if first == 0.0 { 1.0 } else { first.abs() };
    values
        .map(|v| (v - first).abs() / scale)
        .fold(0.0, f64::max)
}

/// Integrates from `t = 0` to `t_end`; rows at step 0, every `output_every`
/// steps and at the final step. Blow-up ends the run with the last valid row.
pub fn simulate(config: &SimConfig) -> Result<TimeSeries> {
    config.validate()?;
    let mut state = GeodesicState::new(0.0, config.sigma0.clone(), config.rho0.clone())?;
    let mut rows = vec![state.monitor()];
    let n = config.steps();
    for step in 1..=n {
        let dt = if step == n {
            config.t_end - (n - 1) as f64 * config.dt
        } else {
            config.dt
        };
        match rk4_step(&state, dt, config.blowup_threshold) {
            Ok(mut next) => {
                next.t = if step == n {
                    config.t_end
                } else {
                    step as f64 * config.dt
                };
                state = next;
            }
            Err(GeoError::Blowup { t, reason }) => {
                let last = state.monitor();
                if rows.last() != Some(&last) {
                    rows.push(last);
                }
                return Ok(TimeSeries {
                    status: RunStatus::Blowup,
                    velocity_representative: "gradient",
                    rows,
                    blowup: Some(BlowupInfo { t, reason }),
                    final_state: state,
                });
            }
            Err(e) => return Err(e),
        }
        if step % config.output_every == 0 || step == n {
            rows.push(state.monitor());
        }
    }
    Ok(TimeSeries {
        status: RunStatus::Completed,
        velocity_representative: "gradient",
        rows,
        blowup: None,
        final_state: state,
    })
}

/// Integrates to `t_end` with fixed step `dt` and returns the final state.
pub fn integrate(
    sigma0: &FourierScalar,
    rho0: &FourierScalar,
    dt: f64,
    t_end: f64,
    blowup_threshold: f64,
) -> Result<GeodesicState> {
    let config = SimConfig::new(dt, t_end, usize::MAX, sigma0.clone(), rho0.clone())?
        .with_blowup_threshold(blowup_threshold)?;
    let series = simulate(&config)?;
    match series.blowup {
        Some(BlowupInfo { t, reason }) => Err(GeoError::Blowup { t, reason }),
        None => Ok(series.final_state),
    }
}

/// Observed order `log₂(‖σ_{dt₀} − σ_{dt₁}‖ / ‖σ_{dt₁} − σ_{dt₂}‖)` on σ(t_end)
/// in the grid sup norm, for step sizes `dt₀ = 2dt₁ = 4dt₂`.
pub fn measure_rk4_order(
    sigma0: &FourierScalar,
    rho0: &FourierScalar,
    t_end: f64,
    dts: [f64; 3],
) -> Result<f64> {
    let runs = dts
        .iter()
        .map(|&dt| integrate(sigma0, rho0, dt, t_end, DEFAULT_BLOWUP_THRESHOLD))
        .collect::<Result<Vec<_>>>()?;
    let e1 = (&runs[0].sigma - &runs[1].sigma).sup_norm();
    let e2 = (&runs[1].sigma - &runs[2].sigma).sup_norm();
    Ok((e1 / e2).log2())
}
