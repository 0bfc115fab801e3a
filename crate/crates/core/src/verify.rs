//! Verification suites: operator identities, the curvature survey report and
//! the 1D cross-check between the σ-formulation and the literal two-component
//! Hunter–Saxton solver.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{b_diag, b_sym, commutator, descent_residual, pairing, AlgebraVector};
use crate::curvature::{
    bracket_divergence_residual, curvature_survey, sample_seed, SurveyConfig, TermStats,
};
use crate::error::{GeoError, Result};
use crate::fd::{fd_derivative, FdField, Hs2Literal};
use crate::flow::{
    euler_rhs, integrate, reconstruct_velocity, GeodesicState, DEFAULT_BLOWUP_THRESHOLD,
};
use crate::forms::{
    d0, d1, delta1, delta2, divergence, flat, hodge_split, inv_a_exact, lie_bracket, operator_a,
    wedge11, OneForm, TwoForm, VectorField,
};
use crate::spectral::{FourierScalar, GridSpec};

/// Value of the descent expression for the documented volume-changing
/// triple w = cos x ∂x, u = sin 2x ∂x, v = −cos x ∂x on T¹.
pub const DESCENT_VIOLATION: f64 = 3.0 * std::f64::consts::PI / 8.0;

const DECAY: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl SuiteResult {
    fn new(name: &'static str, residuals: &[f64], tolerance: f64) -> Self {
        let max_residual =
            residuals.iter().copied().fold(
                0.0,
                |m: f64, r| {
                    if r.is_nan() {
                        f64::NAN
                    } else {
                        m.max(r)
                    }
                },
            );
        Self {
            name,
            samples: residuals.len(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport {
    pub dimension: usize,
    pub points_per_axis: usize,
    pub active_modes: usize,
    pub seed: u64,
    pub samples: usize,
    pub suites: Vec<SuiteResult>,
    pub pass: bool,
}

impl IdentityReport {
    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }
}

/// Default grid and band limit for a torus dimension.
pub fn default_resolution(dimension: usize) -> (usize, usize) {
    if dimension == 1 {
        (128, 21)
    } else {
        (64, 10)
    }
}

struct Sampler {
    spec: GridSpec,
    seed: u64,
    modes: usize,
}

impl Sampler {
    fn seed(&self, sample: usize, slot: u64) -> u64 {
        sample_seed(self.seed, sample as u64, slot)
    }

    fn scalar(&self, sample: usize, slot: u64, constant: bool) -> FourierScalar {
        FourierScalar::random_band_limited(
            self.spec,
            self.seed(sample, slot),
            self.modes,
            DECAY,
            constant,
        )
        .expect("modes checked at construction")
    }

    fn field(&self, sample: usize, slot: u64) -> VectorField {
        VectorField::random(self.spec, self.seed(sample, slot), self.modes, DECAY)
            .expect("modes checked")
    }

    fn form(&self, sample: usize, slot: u64) -> OneForm {
        flat(&self.field(sample, slot))
    }

    fn vector(&self, sample: usize, slot: u64) -> AlgebraVector {
        AlgebraVector::random(self.spec, self.seed(sample, slot), self.modes, DECAY)
            .expect("modes checked")
    }

    /// Divergence-free field: random constant plus, on T², a coexact part
    /// `(∂_y ψ, −∂_x ψ)`.
    fn divergence_free(&self, sample: usize, slot: u64) -> VectorField {
        let c = self.scalar(sample, slot, true).mean();
        let d = self.scalar(sample, slot + 1, true).mean();
        if self.spec.dimension() == 1 {
            VectorField::constant(self.spec, &[c]).expect("dimension 1")
        } else {
            let psi = self.scalar(sample, slot + 2, false);
            let constant = VectorField::constant(self.spec, &[c, d]).expect("dimension 2");
            let curl = VectorField::new(vec![psi.d(1), -psi.d(0)]).expect("two components");
            &constant + &curl
        }
    }
}

fn run(samples: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> Vec<f64> {
    (0..samples).into_par_iter().map(f).collect()
}

/// Runs every identity suite on `samples` seeded random inputs.
pub fn verify_identities(
    dimension: usize,
    points_per_axis: usize,
    active_modes: usize,
    seed: u64,
    samples: usize,
    tolerance: f64,
) -> Result<IdentityReport> {
    if samples == 0 {
        return Err(GeoError::InvalidConfig("samples must be at least 1".into()));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(GeoError::InvalidConfig(
            "tolerance must be non-negative".into(),
        ));
    }
    let spec = GridSpec::new(dimension, points_per_axis)?;
    if active_modes > spec.dealias_cutoff() {
        return Err(GeoError::ModesExceedCutoff {
            requested: active_modes,
            cutoff: spec.dealias_cutoff(),
        });
    }
    let s = Sampler {
        spec,
        seed,
        modes: active_modes,
    };

    let mut suites = Vec::new();
    let mut push =
        |name, residuals: Vec<f64>| suites.push(SuiteResult::new(name, &residuals, tolerance));

    // A⁻¹ on exact forms: div A⁻¹df = −f + mean f and A(A⁻¹df) = df.
    push(
        "inverse_a",
        run(samples, |i| {
            let f = s.scalar(i, 0, true);
            let w = inv_a_exact(&f);
            let div_err =
                (&divergence(&w) + &(&f - &FourierScalar::constant(spec, f.mean()))).sup_norm();
            div_err.max((&operator_a(&w) - &d0(&f)).sup_norm())
        }),
    );

    push(
        "kernel_a",
        run(samples, |i| operator_a(&s.divergence_free(i, 0)).sup_norm()),
    );

    // ♭[v,w] = div w·♭v − div v·♭w − δ(♭v ∧ ♭w); the wedge term is absent on T¹.
    push(
        "lie_formula",
        run(samples, |i| {
            let (v, w) = (s.field(i, 0), s.field(i, 1));
            let lhs = flat(&lie_bracket(&v, &w).expect("same grid"));
            let mut rhs =
                &flat(&v).scaled_by(&divergence(&w)) - &flat(&w).scaled_by(&divergence(&v));
            if dimension == 2 {
                rhs = &rhs - &delta2(&wedge11(&flat(&v), &flat(&w)).expect("dimension 2"));
            }
            (&lhs - &rhs).sup_norm()
        }),
    );

    push(
        "bracket_divergence",
        run(samples, |i| {
            bracket_divergence_residual(&s.vector(i, 0), &s.vector(i, 1)).expect("same grid")
        }),
    );

    push(
        "descent",
        run(samples, |i| {
            let w = AlgebraVector::from_field(s.divergence_free(i, 0));
            descent_residual(&s.vector(i, 3), &s.vector(i, 4), &w)
                .expect("same grid")
                .abs()
        }),
    );

    push(
        "descent_violation",
        vec![(descent_violation()? - DESCENT_VIOLATION).abs()],
    );

    // ⟨⟨½(B(u,v) + B(v,u)), w⟩⟩ = ½(⟨⟨u,[v,w]⟩⟩ + ⟨⟨v,[u,w]⟩⟩)
    push(
        "b_condition",
        run(samples, |i| {
            let (u, v, w) = (s.vector(i, 0), s.vector(i, 1), s.vector(i, 2));
            let lhs = b_sym(&u, &v)
                .and_then(|b| b.pair_with(&w))
                .expect("same grid");
            let rhs = 0.5
                * (pairing(&u, &commutator(&v, &w).expect("same grid")).expect("same grid")
                    + pairing(&v, &commutator(&u, &w).expect("same grid")).expect("same grid"));
            (lhs - rhs).abs()
        }),
    );

    push(
        "adjointness",
        run(samples, |i| {
            let f = s.scalar(i, 0, true);
            let alpha = s.form(i, 1);
            let first = (d0(&f).l2_inner(&alpha).expect("same grid")
                - f.l2_inner(&delta1(&alpha)).expect("same grid"))
            .abs();
            if dimension == 1 {
                return first;
            }
            let omega = TwoForm::new(s.scalar(i, 3, true)).expect("dimension 2");
            let second = (d1(&alpha)
                .and_then(|da| da.l2_inner(&omega))
                .expect("dimension 2")
                - alpha.l2_inner(&delta2(&omega)).expect("same grid"))
            .abs();
            first.max(second)
        }),
    );

    push(
        "hodge",
        run(samples, |i| {
            let alpha = s.form(i, 0);
            let parts = hodge_split(&alpha);
            let (e, c, h) = (parts.exact(), &parts.coexact, &parts.harmonic);
            let inner = |a: &OneForm, b: &OneForm| a.l2_inner(b).expect("same grid").abs();
            let resum = (&parts.reconstruct() - &alpha).sup_norm();
            resum.max(inner(&e, c)).max(inner(&e, h)).max(inner(c, h))
        }),
    );

    // σ_t, ρ_t of the Euler equation equal the divergence-level data of B(u,u).
    push(
        "euler_b_diag",
        run(samples, |i| {
            euler_b_diag_residual(&s.scalar(i, 0, false), &s.scalar(i, 1, true))
        }),
    );

    let pass = suites.iter().all(|s| s.pass);
    Ok(IdentityReport {
        dimension,
        points_per_axis,
        active_modes,
        seed,
        samples,
        suites,
        pass,
    })
}

/// The descent expression for the documented triple on T¹ (M = 64).
pub fn descent_violation() -> Result<f64> {
    let spec = GridSpec::new(1, 64)?;
    let field = |f: fn(f64) -> f64| {
        AlgebraVector::from_field(VectorField::from_fn(spec, move |_, x| f(x[0])))
    };
    descent_residual(
        &field(|x| (2.0 * x).sin()),
        &field(|x| -x.cos()),
        &field(f64::cos),
    )
}

/// max |euler_rhs − b_diag| over both components.
pub fn euler_b_diag_residual(sigma: &FourierScalar, rho: &FourierScalar) -> f64 {
    let state = GeodesicState::new(0.0, sigma.clone(), rho.clone()).expect("zero-mean σ");
    let (sd, rd) = euler_rhs(&state).expect("zero-mean σ");
    let u = AlgebraVector::new(
        reconstruct_velocity(sigma).expect("zero-mean σ"),
        rho.clone(),
    )
    .expect("same grid");
    let b = b_diag(&u);
    (&sd - &b.div_part)
        .sup_norm()
        .max((&rd - &b.function_part).sup_norm())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub suite: &'static str,
    pub dimension: usize,
    pub points_per_axis: usize,
    pub active_modes: usize,
    pub mu: f64,
    pub expected_curvature: f64,
    pub samples: usize,
    pub rejected: usize,
    pub max_rel_error: f64,
    pub route_spread_max: f64,
    pub per_term_stats: TermStats,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    pub timestamp: String,
}

/// Runs the curvature survey and judges it against `tolerance`.
pub fn verify_curvature(
    config: &SurveyConfig,
    tolerance: f64,
    timestamp: String,
) -> Result<VerifyReport> {
    let survey = curvature_survey(config)?;
    let pass = survey.max_rel_error <= tolerance && survey.route_spread_max <= tolerance;
    Ok(VerifyReport {
        suite: "sectional_curvature",
        dimension: config.dimension,
        points_per_axis: config.points_per_axis,
        active_modes: config.active_modes,
        mu: survey.mu,
        expected_curvature: survey.expected_curvature,
        samples: config.samples,
        rejected: survey.rejected,
        max_rel_error: survey.max_rel_error,
        route_spread_max: survey.route_spread_max,
        per_term_stats: survey.term_stats,
        tolerance,
        pass,
        seed: config.seed,
        timestamp,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrosscheckConfig {
    pub seed: u64,
    pub resolution: usize,
    pub t_end: f64,
    pub dt: f64,
    /// Scale of the random part of σ₀.
    pub amplitude: f64,
    pub tolerance: f64,
}

impl CrosscheckConfig {
    pub fn new(seed: u64, resolution: usize, t_end: f64) -> Self {
        Self {
            seed,
            resolution,
            t_end,
            dt: 1e-3,
            amplitude: 1.0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CrosscheckStatus {
    Pass,
    Mismatch,
    Blowup,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub config: CrosscheckConfig,
    pub status: CrosscheckStatus,
    pub sigma_sup_diff: Option<f64>,
    pub rho_sup_diff: Option<f64>,
    pub spectral_blowup_t: Option<f64>,
    pub literal_blowup_t: Option<f64>,
    pub energy_drift_literal: Option<f64>,
}

/// Initial data of the cross-check: σ₀ a zero-mean random field on modes
/// 1..=2 rescaled to sup norm `amplitude`, ρ₀ = ½ + 0.05 · (zero-mean random
/// field on modes 1..=2, rescaled to unit sup norm).
pub fn crosscheck_initial_data(
    spec: GridSpec,
    seed: u64,
    amplitude: f64,
) -> Result<(FourierScalar, FourierScalar)> {
    let modes = 2.min(spec.dealias_cutoff());
    let unit = |seed| -> Result<FourierScalar> {
        let f = FourierScalar::random_band_limited(spec, seed, modes, DECAY, false)?;
        let peak = f.sup_norm();
        Ok(f.scale(1.0 / peak))
    };
    let sigma = unit(seed)?.scale(amplitude);
    let bump = unit(seed.wrapping_add(1))?;
    Ok((
        sigma,
        &FourierScalar::constant(spec, 0.5) + &bump.scale(0.05),
    ))
}

/// Integrates the same data with the spectral σ-formulation and the literal
/// finite-difference solver on the same grid, and compares σ = u_x and ρ.
pub fn crosscheck_1d(config: &CrosscheckConfig) -> Result<CrosscheckReport> {
    if !(config.dt > 0.0 && config.t_end > 0.0 && config.dt <= config.t_end) {
        return Err(GeoError::InvalidConfig("need 0 < dt <= t_end".into()));
    }
    let spec = GridSpec::new(1, config.resolution)?;
    let (sigma0, rho0) = crosscheck_initial_data(spec, config.seed, config.amplitude)?;

    let spectral = match integrate(
        &sigma0,
        &rho0,
        config.dt,
        config.t_end,
        DEFAULT_BLOWUP_THRESHOLD,
    ) {
        Ok(state) => Ok(state),
        Err(GeoError::Blowup { t, .. }) => Err(t),
        Err(e) => return Err(e),
    };

    let n = config.resolution;
    let u0 = reconstruct_velocity(&sigma0)?.component(0).to_grid();
    let u0 = FdField::new(1, n, u0)?;
    let r0 = FdField::new(1, n, rho0.to_grid())?;
    let solver = Hs2Literal::new(n)?;
    let literal = solver.run(&u0, &r0, config.dt, config.t_end, DEFAULT_BLOWUP_THRESHOLD)?;

    let mut report = CrosscheckReport {
        config: *config,
        status: CrosscheckStatus::Blowup,
        sigma_sup_diff: None,
        rho_sup_diff: None,
        spectral_blowup_t: spectral.as_ref().err().copied(),
        literal_blowup_t: literal.blowup.as_ref().map(|(t, _)| *t),
        energy_drift_literal: None,
    };
    let Ok(state) = spectral else {
        return Ok(report);
    };
    if literal.blowup.is_some() {
        return Ok(report);
    }

    let e0 = solver.energy(&u0, &r0);
    report.energy_drift_literal = Some((solver.energy(&literal.u, &literal.rho) - e0).abs() / e0);
    let sigma_fd = fd_derivative(&literal.u, 0)?;
    let sup_diff = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .fold(0.0, |m: f64, (x, y)| m.max((x - y).abs()))
    };
    let ds = sup_diff(sigma_fd.values(), &state.sigma.to_grid());
    let dr = sup_diff(literal.rho.values(), &state.rho.to_grid());
    report.sigma_sup_diff = Some(ds);
    report.rho_sup_diff = Some(dr);
    report.status = if ds <= config.tolerance && dr <= config.tolerance {
        CrosscheckStatus::Pass
    } else {
        CrosscheckStatus::Mismatch
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descent_violation_value() {
        assert!((descent_violation().unwrap() - DESCENT_VIOLATION).abs() < 1e-12);
    }

    #[test]
    fn identity_suites_pass_on_small_runs() {
        for dim in [1, 2] {
            let (m, modes) = default_resolution(dim);
            let report = verify_identities(dim, m, modes, 42, 4, 1e-9).unwrap();
            assert!(report.pass, "{report:#?}");
            assert_eq!(report.suites.len(), 10);
        }
    }

    #[test]
    fn unreachable_tolerance_fails() {
        let report = verify_identities(1, 128, 21, 42, 3, 1e-16).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(verify_identities(1, 128, 21, 1, 0, 1e-9).is_err());
        assert!(verify_identities(1, 32, 21, 1, 2, 1e-9).is_err());
        assert!(crosscheck_1d(&CrosscheckConfig {
            dt: 0.0,
            ..CrosscheckConfig::new(1, 64, 0.1)
        })
        .is_err());
    }

    #[test]
    fn crosscheck_small_grid_runs() {
        let report = crosscheck_1d(&CrosscheckConfig::new(42, 64, 0.02)).unwrap();
        assert!(report.sigma_sup_diff.is_some());
        assert_eq!(report.spectral_blowup_t, None);
    }
}
