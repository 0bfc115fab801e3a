//! Unnormalized sectional curvature `⟨⟨R(u,v)v, u⟩⟩` of the coset space,
//! computed three ways:
//!
//! 1. the four-term expansion `⟨⟨δ,δ⟩⟩ + ⟨⟨[u,v],β⟩⟩ − ¾⟨⟨[u,v],[u,v]⟩⟩ −
//!    ⟨⟨B(u,u),B(v,v)⟩⟩` with `δ, β` the symmetric and antisymmetric parts of B;
//! 2. the simplified `I₁ + I₂` form, built from six integrals;
//! 3. the closed form `gram / μ(M)`.
//!
//! Only divergence-level data of B ever enters. The β-term is evaluated as an
//! integral against `[u₁, v₁]` so `A⁻¹` is never applied to a non-exact form.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{
    a_pairing, b_diag, b_sym, commutator, directional, pairing, AlgebraVector, BRep,
};
use crate::error::{GeoError, Result};
use crate::forms::{contract, d0, divergence, flat, lie_bracket, operator_a, OneForm};
use crate::spectral::GridSpec;

/// Minimum relative Gram determinant of an admissible 2-plane.
pub const DEGENERATE_PLANE_THRESHOLD: f64 = 1e-8;

/// Coefficient decay used when sampling survey directions.
pub const SURVEY_DECAY: f64 = 2.0;

fn ensure_same(u: &AlgebraVector, v: &AlgebraVector) -> Result<()> {
    if u.spec() == v.spec() {
        Ok(())
    } else {
        Err(GeoError::GridMismatch {
            left: u.spec(),
            right: v.spec(),
        })
    }
}

/// ⟨⟨δ, δ⟩⟩ with δ = ½(B(u,v) + B(v,u)).
pub fn term_delta(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    let delta = b_sym(u, v)?;
    delta.pairing(&delta)
}

/// ⟨⟨[u,v], β⟩⟩ with β = ½(B(u,v) − B(v,u)), integrated against the bracket.
pub fn term_beta(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    ensure_same(u, v)?;
    let (u1, u2) = (u.field(), u.scalar());
    let (v1, v2) = (v.field(), v.scalar());
    let au = operator_a(u1);
    let av = operator_a(v1);
    let div_u = divergence(u1);
    let div_v = divergence(v1);

    let antisym: OneForm = [
        d0(&a_pairing(u1, v1)),
        au.scaled_by(&div_v),
        d0(v2).scaled_by(u2),
        -d0(&a_pairing(v1, u1)),
        -av.scaled_by(&div_u),
        -d0(u2).scaled_by(v2),
    ]
    .into_iter()
    .reduce(|a, b| a + b)
    .expect("nonempty");

    let bracket = lie_bracket(u1, v1)?;
    let first = flat(&bracket).l2_inner(&antisym)?;

    let bracket_scalar = &directional(u1, v2) - &directional(v1, u2);
    let flux = &v1.scaled_by(u2) - &u1.scaled_by(v2);
    let second = bracket_scalar.l2_inner(&divergence(&flux))?;

    Ok(-0.125 * first - 0.125 * second)
}

/// −¾⟨⟨[u,v], [u,v]⟩⟩.
pub fn term_bracket(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    let c = commutator(u, v)?;
    Ok(-0.75 * pairing(&c, &c)?)
}

/// −⟨⟨B(u,u), B(v,v)⟩⟩.
pub fn term_diag(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    ensure_same(u, v)?;
    Ok(-b_diag(u).pairing(&b_diag(v))?)
}

/// Sum of the four expansion terms.
pub fn numerator_terms(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    Ok(term_delta(u, v)? + term_beta(u, v)? + term_bracket(u, v)? + term_diag(u, v)?)
}

/// `I₁ + I₂` from the six integrals of `div u₁, div v₁, u₂, v₂`.
pub fn numerator_simplified(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    ensure_same(u, v)?;
    let mu = u.spec().measure();
    let div_u = divergence(u.field());
    let div_v = divergence(v.field());
    let (u2, v2) = (u.scalar(), v.scalar());

    let duu = div_u.l2_inner(&div_u)?;
    let dvv = div_v.l2_inner(&div_v)?;
    let duv = div_u.l2_inner(&div_v)?;
    let fuv = u2.l2_inner(v2)?;
    let fuu = u2.l2_inner(u2)?;
    let fvv = v2.l2_inner(v2)?;

    let c = 1.0 / (16.0 * mu);
    let i1 = c * duu * dvv - c * duv * duv;
    let i2 = -2.0 * c * duv * fuv - c * fuv * fuv + c * duu * fvv + c * dvv * fuu + c * fuu * fvv;
    Ok(i1 + i2)
}

/// (⟨⟨u,u⟩⟩⟨⟨v,v⟩⟩ − ⟨⟨u,v⟩⟩²) / μ(M).
pub fn numerator_closed(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    Ok(gram(u, v)? / u.spec().measure())
}

pub fn gram(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    let uu = pairing(u, u)?;
    let vv = pairing(v, v)?;
    let uv = pairing(u, v)?;
    Ok(uu * vv - uv * uv)
}

/// All curvature quantities for one 2-plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureBreakdown {
    pub term_delta: f64,
    pub term_beta: f64,
    pub term_bracket: f64,
    pub term_diag: f64,
    pub numerator_terms: f64,
    pub numerator_simplified: f64,
    pub numerator_closed: f64,
    pub gram: f64,
    pub sectional: f64,
}

impl CurvatureBreakdown {
    /// Largest pairwise difference between the three numerator routes,
    /// relative to the closed form.
    pub fn route_spread(&self) -> f64 {
        let routes = [
            self.numerator_terms,
            self.numerator_simplified,
            self.numerator_closed,
        ];
        let hi = routes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = routes.iter().copied().fold(f64::INFINITY, f64::min);
        (hi - lo) / self.numerator_closed.abs().max(f64::MIN_POSITIVE)
    }
}

/// Sectional curvature of the plane spanned by `u, v`; rejects planes whose
/// relative Gram determinant is below [`DEGENERATE_PLANE_THRESHOLD`].
pub fn sectional_curvature(u: &AlgebraVector, v: &AlgebraVector) -> Result<CurvatureBreakdown> {
    ensure_same(u, v)?;
    let uu = pairing(u, u)?;
    let vv = pairing(v, v)?;
    let uv = pairing(u, v)?;
    let gram = uu * vv - uv * uv;
    let threshold = DEGENERATE_PLANE_THRESHOLD * uu * vv;
    if !(gram > 0.0 && gram >= threshold) {
        return Err(GeoError::DegeneratePlane { gram, threshold });
    }
    let term_delta = term_delta(u, v)?;
    let term_beta = term_beta(u, v)?;
    let term_bracket = term_bracket(u, v)?;
    let term_diag = term_diag(u, v)?;
    let numerator_terms = term_delta + term_beta + term_bracket + term_diag;
    Ok(CurvatureBreakdown {
        term_delta,
        term_beta,
        term_bracket,
        term_diag,
        numerator_terms,
        numerator_simplified: numerator_simplified(u, v)?,
        numerator_closed: gram / u.spec().measure(),
        gram,
        sectional: numerator_terms / gram,
    })
}

/// Divergence-level data of `−½([u,v] + B(u,v) + B(v,u))`, the Levi-Civita
/// connection of the coset space at the identity.
pub fn nabla_identity(u: &AlgebraVector, v: &AlgebraVector) -> Result<BRep> {
    let c = commutator(u, v)?;
    let bracket = BRep {
        div_part: divergence(c.field()),
        function_part: c.scalar().clone(),
    };
    Ok(&bracket.scale(-0.5) - &b_sym(u, v)?)
}

/// Survey parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurveyConfig {
    pub dimension: usize,
    pub points_per_axis: usize,
    pub samples: usize,
    pub seed: u64,
    pub active_modes: usize,
}

impl SurveyConfig {
    /// M = 128 with 21 active modes on T¹, M = 64 with 10 per axis on T².
    pub fn for_dimension(dimension: usize, samples: usize, seed: u64) -> Self {
        let (points_per_axis, active_modes) = if dimension == 1 { (128, 21) } else { (64, 10) };
        Self {
            dimension,
            points_per_axis,
            samples,
            seed,
            active_modes,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Stat {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Stat {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let n = values.clone().count().max(1) as f64;
        Self {
            min: values.clone().fold(f64::INFINITY, f64::min),
            max: values.clone().fold(f64::NEG_INFINITY, f64::max),
            mean: values.sum::<f64>() / n,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TermStats {
    pub term_delta: Stat,
    pub term_beta: Stat,
    pub term_bracket: Stat,
    pub term_diag: Stat,
    pub sectional: Stat,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub config: SurveyConfig,
    pub mu: f64,
    pub expected_curvature: f64,
    pub rejected: usize,
    pub max_rel_error: f64,
    pub route_spread_max: f64,
    pub term_stats: TermStats,
    #[serde(skip)]
    pub breakdowns: Vec<CurvatureBreakdown>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the random direction `slot` (0 = u, 1 = v) of survey attempt
/// `attempt`; independent of evaluation order.
pub fn sample_seed(master: u64, attempt: u64, slot: u64) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(attempt.wrapping_mul(2).wrapping_add(slot)))
}

/// Random 2-plane of survey attempt `attempt`.
pub fn survey_pair(
    spec: GridSpec,
    master: u64,
    attempt: u64,
    active_modes: usize,
) -> Result<(AlgebraVector, AlgebraVector)> {
    let u = AlgebraVector::random(
        spec,
        sample_seed(master, attempt, 0),
        active_modes,
        SURVEY_DECAY,
    )?;
    let v = AlgebraVector::random(
        spec,
        sample_seed(master, attempt, 1),
        active_modes,
        SURVEY_DECAY,
    )?;
    Ok((u, v))
}

/// Samples random 2-planes and compares their sectional curvature with
/// `1/μ(M)`. Attempts are evaluated in parallel in fixed batches and
/// accepted in attempt order, so the report depends only on the seed.
pub fn curvature_survey(config: &SurveyConfig) -> Result<SurveyReport> {
    if config.samples == 0 {
        return Err(GeoError::InvalidConfig("samples must be at least 1".into()));
    }
    let spec = GridSpec::new(config.dimension, config.points_per_axis)?;
    let max_attempts = 100 * config.samples + config.samples;
    let mut breakdowns = Vec::with_capacity(config.samples);
    let mut rejected = 0;
    let mut next_attempt = 0usize;
    let mut last_degenerate = None;

    while breakdowns.len() < config.samples {
        if next_attempt >= max_attempts {
            return Err(last_degenerate.unwrap_or(GeoError::DegeneratePlane {
                gram: 0.0,
                threshold: DEGENERATE_PLANE_THRESHOLD,
            }));
        }
        let batch = (config.samples - breakdowns.len()).min(max_attempts - next_attempt);
        let results: Vec<Result<CurvatureBreakdown>> = (next_attempt..next_attempt + batch)
            .into_par_iter()
            .map(|attempt| {
                let (u, v) = survey_pair(spec, config.seed, attempt as u64, config.active_modes)?;
                sectional_curvature(&u, &v)
            })
            .collect();
        next_attempt += batch;
        for r in results {
            match r {
                Ok(b) => breakdowns.push(b),
                Err(e @ GeoError::DegeneratePlane { .. }) => {
                    rejected += 1;
                    last_degenerate = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mu = spec.measure();
    let expected = 1.0 / mu;
    let max_rel_error = breakdowns
        .iter()
        .map(|b| (b.sectional - expected).abs() / expected)
        .fold(0.0, f64::max);
    let route_spread_max = breakdowns
        .iter()
        .map(CurvatureBreakdown::route_spread)
        .fold(0.0, f64::max);
    let term_stats = TermStats {
        term_delta: Stat::of(breakdowns.iter().map(|b| b.term_delta)),
        term_beta: Stat::of(breakdowns.iter().map(|b| b.term_beta)),
        term_bracket: Stat::of(breakdowns.iter().map(|b| b.term_bracket)),
        term_diag: Stat::of(breakdowns.iter().map(|b| b.term_diag)),
        sectional: Stat::of(breakdowns.iter().map(|b| b.sectional)),
    };
    Ok(SurveyReport {
        config: *config,
        mu,
        expected_curvature: expected,
        rejected,
        max_rel_error,
        route_spread_max,
        term_stats,
        breakdowns,
    })
}

/// ⟨A u₁, v₁⟩ − ⟨A v₁, u₁⟩ − div[u₁, v₁]; zero for all u₁, v₁.
pub fn bracket_divergence_residual(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    ensure_same(u, v)?;
    let (u1, v1) = (u.field(), v.field());
    let lhs = divergence(&lie_bracket(u1, v1)?);
    let rhs = &contract(v1, &operator_a(u1)) - &contract(u1, &operator_a(v1));
    Ok((&lhs - &rhs).sup_norm())
}
