//! Finite-difference oracle. Shares nothing with the spectral stack except
//! point sampling: derivatives are 4th-order central stencils, integrals are
//! periodic rectangle sums, and the literal Hunter–Saxton solver inverts the
//! discrete second-difference operator through its circulant symbol.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::algebra::AlgebraVector;
use crate::error::{GeoError, Result};
use crate::flow::DEFAULT_BLOWUP_THRESHOLD;
use crate::spectral::FourierScalar;

const TAU: f64 = std::f64::consts::TAU;

/// Grid values on a uniform periodic `n` (or `n × n`) grid over `[0, 2π)ⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdField {
    dimension: usize,
    n: usize,
    values: Vec<f64>,
}

impl FdField {
    pub fn new(dimension: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(GeoError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if n < 8 {
            return Err(GeoError::InvalidGrid(format!(
                "need at least 8 points per axis, got {n}"
            )));
        }
        if values.len() != n.pow(dimension as u32) {
            return Err(GeoError::InvalidGrid(format!(
                "{} values for a {n}^{dimension} grid",
                values.len()
            )));
        }
        Ok(Self {
            dimension,
            n,
            values,
        })
    }

    pub fn from_fn(dimension: usize, n: usize, f: impl Fn(&[f64; 2]) -> f64) -> Result<Self> {
        let h = TAU / n as f64;
        let len = n.pow(dimension as u32);
        let values = (0..len)
            .map(|i| {
                if dimension == 1 {
                    f(&[i as f64 * h, 0.0])
                } else {
                    f(&[(i / n) as f64 * h, (i % n) as f64 * h])
                }
            })
            .collect();
        Self::new(dimension, n, values)
    }

    /// Samples a band-limited spectral field by direct series evaluation.
    pub fn sample(f: &FourierScalar, n: usize) -> Result<Self> {
        Self::from_fn(f.spec().dimension(), n, |x| f.evaluate_at(x))
    }

    pub fn constant(dimension: usize, n: usize, value: f64) -> Result<Self> {
        Self::new(dimension, n, vec![value; n.pow(dimension as u32)])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.n as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn zip(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(
            (self.dimension, self.n),
            (other.dimension, other.n),
            "FD grid mismatch"
        );
        Self {
            dimension: self.dimension,
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| op(*a, *b))
                .collect(),
        }
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        Self {
            dimension: self.dimension,
            n: self.n,
            values: self.values.iter().map(|v| op(*v)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn measure(&self) -> f64 {
        TAU.powi(self.dimension as i32)
    }

    pub fn without_mean(&self) -> Self {
        let mean = fd_quadrature(self) / self.measure();
        self.map(|v| v - mean)
    }

    /// Applies a periodic 5-point stencil to `[f₋₂, f₋₁, f, f₊₁, f₊₂]`.
    fn stencil(&self, axis: usize, rule: impl Fn([f64; 5]) -> f64) -> Self {
        let n = self.n as isize;
        let wrap = |i: isize| ((i % n + n) % n) as usize;
        let values = (0..self.values.len())
            .map(|idx| {
                let (row, col) = if self.dimension == 1 {
                    (0, idx as isize)
                } else {
                    ((idx / self.n) as isize, (idx % self.n) as isize)
                };
                rule([-2, -1, 0, 1, 2].map(|j| {
                    let at = match (self.dimension, axis) {
                        (1, _) => wrap(col + j),
                        (_, 0) => wrap(row + j) * self.n + col as usize,
                        _ => row as usize * self.n + wrap(col + j),
                    };
                    self.values[at]
                }))
            })
            .collect();
        Self {
            dimension: self.dimension,
            n: self.n,
            values,
        }
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < self.dimension {
            Ok(())
        } else {
            Err(GeoError::AxisOutOfRange {
                axis,
                dimension: self.dimension,
            })
        }
    }
}

/// (−f₊₂ + 8f₊₁ − 8f₋₁ + f₋₂) / 12h.
pub fn fd_derivative(f: &FdField, axis: usize) -> Result<FdField> {
    f.check_axis(axis)?;
    let c = 1.0 / (12.0 * f.spacing());
    // differences first, so constants map to exactly zero
    Ok(f.stencil(axis, |[m2, m1, _, p1, p2]| {
        c * ((m2 - p2) + 8.0 * (p1 - m1))
    }))
}

/// (−f₊₂ + 16f₊₁ − 30f + 16f₋₁ − f₋₂) / 12h².
pub fn fd_second_derivative(f: &FdField, axis: usize) -> Result<FdField> {
    f.check_axis(axis)?;
    let c = 1.0 / (12.0 * f.spacing().powi(2));
    Ok(f.stencil(axis, |[m2, m1, f0, p1, p2]| {
        c * (16.0 * ((p1 - f0) + (m1 - f0)) - ((p2 - f0) + (m2 - f0)))
    }))
}

/// Periodic rectangle rule `hⁿ Σ f`.
pub fn fd_quadrature(f: &FdField) -> f64 {
    f.spacing().powi(f.dimension as i32) * f.values.iter().sum::<f64>()
}

fn d(f: &FdField, axis: usize) -> FdField {
    fd_derivative(f, axis).expect("axis checked by caller")
}

/// Sampled tangent vector `(u₁, u₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FdVector {
    pub field: Vec<FdField>,
    pub scalar: FdField,
}

impl FdVector {
    pub fn sample(u: &AlgebraVector, n: usize) -> Result<Self> {
        Ok(Self {
            field: u
                .field()
                .components()
                .iter()
                .map(|c| FdField::sample(c, n))
                .collect::<Result<_>>()?,
            scalar: FdField::sample(u.scalar(), n)?,
        })
    }

    fn div(&self) -> FdField {
        sum((0..self.field.len()).map(|i| d(&self.field[i], i)))
    }
}

fn sum(mut terms: impl Iterator<Item = FdField>) -> FdField {
    let first = terms.next().expect("nonempty");
    terms.fold(first, |acc, t| acc.add(&t))
}

fn contract(v: &[FdField], alpha: &[FdField]) -> FdField {
    sum(v.iter().zip(alpha).map(|(a, b)| a.mul(b)))
}

fn grad(f: &FdField) -> Vec<FdField> {
    (0..f.dimension).map(|i| d(f, i)).collect()
}

fn bracket(x: &[FdField], y: &[FdField]) -> Vec<FdField> {
    (0..x.len())
        .map(|i| sum((0..x.len()).map(|j| x[j].mul(&d(&y[i], j)).sub(&y[j].mul(&d(&x[i], j))))))
        .collect()
}

fn integral_of_product(a: &FdField, b: &FdField) -> f64 {
    fd_quadrature(&a.mul(b))
}

/// `(div-level, function-level)` data of ½(B(u,v) + B(v,u)).
fn b_sym(u: &FdVector, v: &FdVector) -> (FdField, FdField) {
    let du = u.div();
    let dv = v.div();
    // ⟨Au₁, v₁⟩ = −⟨d div u₁, v₁⟩
    let au_v = contract(&grad(&du), &v.field).scale(-1.0);
    let av_u = contract(&grad(&dv), &u.field).scale(-1.0);
    let interior = au_v
        .add(&av_u)
        .sub(&du.mul(&dv))
        .add(&u.scalar.mul(&v.scalar));
    let flux: Vec<FdField> = (0..u.field.len())
        .map(|i| v.field[i].mul(&u.scalar).add(&u.field[i].mul(&v.scalar)))
        .collect();
    let fdiv = sum((0..flux.len()).map(|i| d(&flux[i], i)));
    (interior.scale(0.5).without_mean(), fdiv.scale(-0.5))
}

/// The four expansion terms `(δ, β, bracket, diag)` of the curvature
/// numerator, evaluated with finite differences only.
pub fn fd_curvature_terms(u: &FdVector, v: &FdVector) -> Result<[f64; 4]> {
    let dim = u.scalar.dimension;
    if u.field.len() != dim || v.field.len() != dim || v.scalar.dimension != dim {
        return Err(GeoError::DimensionMismatch {
            expected: dim,
            found: v.field.len(),
        });
    }
    let du = u.div();
    let dv = v.div();

    let (sd, sf) = b_sym(u, v);
    let term_delta = 0.25 * (integral_of_product(&sd, &sd) + integral_of_product(&sf, &sf));

    let gdu = grad(&du);
    let gdv = grad(&dv);
    let au: Vec<FdField> = gdu.iter().map(|c| c.scale(-1.0)).collect();
    let av: Vec<FdField> = gdv.iter().map(|c| c.scale(-1.0)).collect();
    let g_auv = grad(&contract(&au, &v.field));
    let g_avu = grad(&contract(&av, &u.field));
    let gu2 = grad(&u.scalar);
    let gv2 = grad(&v.scalar);
    let antisym: Vec<FdField> = (0..dim)
        .map(|i| {
            g_auv[i]
                .add(&au[i].mul(&dv))
                .add(&u.scalar.mul(&gv2[i]))
                .sub(&g_avu[i])
                .sub(&av[i].mul(&du))
                .sub(&v.scalar.mul(&gu2[i]))
        })
        .collect();
    let c1 = bracket(&u.field, &v.field);
    let c2 = contract(&u.field, &gv2).sub(&contract(&v.field, &gu2));
    let flux: Vec<FdField> = (0..dim)
        .map(|i| v.field[i].mul(&u.scalar).sub(&u.field[i].mul(&v.scalar)))
        .collect();
    let flux_div = sum((0..dim).map(|i| d(&flux[i], i)));
    let term_beta = -0.125 * fd_quadrature(&contract(&c1, &antisym))
        - 0.125 * integral_of_product(&c2, &flux_div);

    let div_c1 = sum((0..dim).map(|i| d(&c1[i], i)));
    let term_bracket =
        -0.75 * 0.25 * (integral_of_product(&div_c1, &div_c1) + integral_of_product(&c2, &c2));

    let b_diag = |w: &FdVector| {
        let dw = w.div();
        let aw_w = contract(&grad(&dw), &w.field).scale(-1.0);
        let interior = aw_w
            .sub(&dw.mul(&dw).scale(0.5))
            .add(&w.scalar.mul(&w.scalar).scale(0.5));
        let fl: Vec<FdField> = w.field.iter().map(|c| c.mul(&w.scalar)).collect();
        let fdiv = sum((0..dim).map(|i| d(&fl[i], i)));
        (interior.without_mean(), fdiv.scale(-1.0))
    };
    let (bud, buf) = b_diag(u);
    let (bvd, bvf) = b_diag(v);
    let term_diag = -0.25 * (integral_of_product(&bud, &bvd) + integral_of_product(&buf, &bvf));

    Ok([term_delta, term_beta, term_bracket, term_diag])
}

/// Sum of [`fd_curvature_terms`].
pub fn fd_curvature_numerator(u: &FdVector, v: &FdVector) -> Result<f64> {
    Ok(fd_curvature_terms(u, v)?.iter().sum())
}

/// Literal 1D two-component Hunter–Saxton solver on `n` points:
/// `u_t = D₂⁻¹(−D F)`, `F = u D₂u + ½(Du)² − ½ρ²`, `ρ_t = −D(ρu)`,
/// with `D, D₂` the 4th-order stencils and `D₂⁻¹` the zero-mean inverse.
pub struct Hs2Literal {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    symbol: Vec<f64>,
}

impl Hs2Literal {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 {
            return Err(GeoError::InvalidGrid(format!(
                "need at least 8 points, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let h = TAU / n as f64;
        // eigenvalues of the circulant second-difference matrix
        let symbol = (0..n)
            .map(|j| {
                let theta = TAU * j as f64 / n as f64;
                (-2.0 * (2.0 * theta).cos() + 32.0 * theta.cos() - 30.0) / (12.0 * h * h)
            })
            .collect();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            symbol,
        })
    }

    fn field(&self, values: Vec<f64>) -> FdField {
        FdField {
            dimension: 1,
            n: self.n,
            values,
        }
    }

    fn check(&self, f: &FdField) -> Result<()> {
        if f.dimension != 1 || f.n != self.n {
            return Err(GeoError::InvalidGrid(format!(
                "expected a 1D field on {} points",
                self.n
            )));
        }
        Ok(())
    }

    /// Zero-mean solution of `D₂ w = y` (the mean of `y` is discarded).
    pub fn inverse_second_difference(&self, y: &FdField) -> FdField {
        let mut buf: Vec<Complex64> = y.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf[0] = Complex64::new(0.0, 0.0);
        for (c, s) in buf.iter_mut().zip(&self.symbol).skip(1) {
            *c /= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        self.field(buf.iter().map(|c| c.re * scale).collect())
    }

    pub fn rhs(&self, u: &FdField, rho: &FdField) -> (FdField, FdField) {
        let du = d(u, 0);
        let d2u = fd_second_derivative(u, 0).expect("axis 0");
        let flux = u
            .mul(&d2u)
            .add(&du.mul(&du).scale(0.5))
            .sub(&rho.mul(rho).scale(0.5));
        let u_t = self.inverse_second_difference(&d(&flux, 0).scale(-1.0));
        let rho_t = d(&rho.mul(u), 0).scale(-1.0);
        (u_t, rho_t)
    }

    /// One RK4 step. Errors with `Blowup { t: dt, .. }` (time relative to
    /// the step start) if `u`, `Du` or `ρ` exceeds the threshold.
    pub fn step(
        &self,
        u: &FdField,
        rho: &FdField,
        dt: f64,
        threshold: f64,
    ) -> Result<(FdField, FdField)> {
        self.check(u)?;
        self.check(rho)?;
        let axpy = |y: &FdField, k: &FdField, c: f64| y.add(&k.scale(c));
        let (k1u, k1r) = self.rhs(u, rho);
        let (k2u, k2r) = self.rhs(&axpy(u, &k1u, 0.5 * dt), &axpy(rho, &k1r, 0.5 * dt));
        let (k3u, k3r) = self.rhs(&axpy(u, &k2u, 0.5 * dt), &axpy(rho, &k2r, 0.5 * dt));
        let (k4u, k4r) = self.rhs(&axpy(u, &k3u, dt), &axpy(rho, &k3r, dt));
        let combine = |y: &FdField, a: &FdField, b: &FdField, c: &FdField, e: &FdField| {
            y.add(
                &a.add(&b.scale(2.0))
                    .add(&c.scale(2.0))
                    .add(e)
                    .scale(dt / 6.0),
            )
        };
        let u_next = combine(u, &k1u, &k2u, &k3u, &k4u);
        let rho_next = combine(rho, &k1r, &k2r, &k3r, &k4r);

        let peak = u_next
            .sup_norm()
            .max(d(&u_next, 0).sup_norm())
            .max(rho_next.sup_norm());
        if !(u_next.is_finite() && rho_next.is_finite() && peak.is_finite()) {
            return Err(GeoError::Blowup {
                t: dt,
                reason: "non-finite value".into(),
            });
        }
        if peak > threshold {
            return Err(GeoError::Blowup {
                t: dt,
                reason: format!("sup norm {peak:e} exceeds {threshold:e}"),
            });
        }
        Ok((u_next, rho_next))
    }

    /// ¼ h Σ (−u D₂u + ρ²), the discrete ¼∫(u_x² + ρ²).
    pub fn energy(&self, u: &FdField, rho: &FdField) -> f64 {
        let d2u = fd_second_derivative(u, 0).expect("axis 0");
        0.25 * fd_quadrature(&u.mul(&d2u).scale(-1.0).add(&rho.mul(rho)))
    }

    /// Integrates to `t_end` with steps of `dt` (the last shortened).
    pub fn run(
        &self,
        u0: &FdField,
        rho0: &FdField,
        dt: f64,
        t_end: f64,
        threshold: f64,
    ) -> Result<LiteralRun> {
        if !(dt > 0.0 && dt.is_finite() && t_end >= 0.0) {
            return Err(GeoError::InvalidConfig(format!(
                "bad time grid dt {dt}, t_end {t_end}"
            )));
        }
        let steps = ((t_end / dt) * (1.0 - 1e-12)).ceil() as usize;
        let (mut u, mut rho) = (u0.clone(), rho0.clone());
        let mut t = 0.0;
        for step in 1..=steps {
            let h = if step == steps {
                t_end - (steps - 1) as f64 * dt
            } else {
                dt
            };
            match self.step(&u, &rho, h, threshold) {
                Ok((un, rn)) => {
                    u = un;
                    rho = rn;
                    t = if step == steps {
                        t_end
                    } else {
                        step as f64 * dt
                    };
                }
                Err(GeoError::Blowup { reason, .. }) => {
                    return Ok(LiteralRun {
                        t,
                        u,
                        rho,
                        blowup: Some((t + h, reason)),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(LiteralRun {
            t,
            u,
            rho,
            blowup: None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiteralRun {
    /// Time of the last valid state.
    pub t: f64,
    pub u: FdField,
    pub rho: FdField,
    /// Time and reason of blow-up, if it occurred.
    pub blowup: Option<(f64, String)>,
}

/// One RK4 step of the literal system with the default blow-up threshold.
pub fn hs2_literal_step(u: &FdField, rho: &FdField, dt: f64) -> Result<(FdField, FdField)> {
    Hs2Literal::new(u.points_per_axis())?.step(u, rho, dt, DEFAULT_BLOWUP_THRESHOLD)
}
