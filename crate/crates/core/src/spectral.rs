//! Band-limited real scalar fields on the flat tori T¹ = [0, 2π) and
//! T² = [0, 2π)².
//!
//! A [`FourierScalar`] stores the full complex coefficient array of a real
//! field, normalized so that `f(x) = Σ_k c(k) e^{i k·x}`. The constant mode
//! is therefore the mean, and integrals follow from Parseval's identity.
//! Products are formed pointwise on the grid and truncated with the 2/3 rule.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GeoError, Result};

/// Discretization of T¹ or T²: `points_per_axis` uniform samples per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dimension: usize,
    points_per_axis: usize,
}

impl GridSpec {
    pub fn new(dimension: usize, points_per_axis: usize) -> Result<Self> {
        if !(1..=2).contains(&dimension) {
            return Err(GeoError::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dimension}"
            )));
        }
        if points_per_axis < 16 || !points_per_axis.is_power_of_two() {
            return Err(GeoError::InvalidGrid(format!(
                "points per axis must be a power of two >= 16, got {points_per_axis}"
            )));
        }
        Ok(Self {
            dimension,
            points_per_axis,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Largest retained wavenumber per axis after a product (2/3 rule).
    pub fn dealias_cutoff(&self) -> usize {
        self.points_per_axis / 3
    }

    /// Total number of grid points (and of stored coefficients).
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume μ(M) = (2π)ⁿ.
    pub fn measure(&self) -> f64 {
        (2.0 * PI).powi(self.dimension as i32)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points_per_axis as f64
    }

    fn wavenumber(&self, slot: usize) -> i64 {
        let n = self.points_per_axis;
        if slot <= n / 2 {
            slot as i64
        } else {
            slot as i64 - n as i64
        }
    }

    fn slot(&self, k: i64) -> Option<usize> {
        let half = (self.points_per_axis / 2) as i64;
        if k > half || k < -half {
            return None;
        }
        Some(k.rem_euclid(self.points_per_axis as i64) as usize)
    }

    fn split(&self, index: usize) -> [usize; 2] {
        let n = self.points_per_axis;
        match self.dimension {
            1 => [index, 0],
            _ => [index / n, index % n],
        }
    }

    /// Wavevector of a storage index; the second entry is zero on T¹.
    pub fn wavevector(&self, index: usize) -> [i64; 2] {
        let [a, b] = self.split(index);
        match self.dimension {
            1 => [self.wavenumber(a), 0],
            _ => [self.wavenumber(a), self.wavenumber(b)],
        }
    }

    /// Storage index of a wavevector, if it is representable on this grid.
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dimension {
            return None;
        }
        let a = self.slot(k[0])?;
        match self.dimension {
            1 => Some(a),
            _ => Some(a * self.points_per_axis + self.slot(k[1])?),
        }
    }

    /// Physical coordinates of a grid point; the second entry is zero on T¹.
    pub fn grid_point(&self, index: usize) -> [f64; 2] {
        let [a, b] = self.split(index);
        let h = self.spacing();
        [a as f64 * h, b as f64 * h]
    }

    fn conjugate_index(&self, index: usize) -> usize {
        let n = self.points_per_axis;
        let [a, b] = self.split(index);
        let a = (n - a) % n;
        match self.dimension {
            1 => a,
            _ => a * n + (n - b) % n,
        }
    }

    fn within_cutoff(&self, index: usize) -> bool {
        let c = self.dealias_cutoff() as i64;
        let k = self.wavevector(index);
        k[0].abs() <= c && k[1].abs() <= c
    }

    fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(GeoError::GridMismatch {
                left: *self,
                right: *other,
            })
        }
    }
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    let mut planner = PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner());
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// Unnormalized multidimensional DFT in place.
fn transform(spec: &GridSpec, data: &mut [Complex64], forward: bool) {
    let n = spec.points_per_axis;
    let fft = plan(n, forward);
    // contiguous axis: every run of n values is one transform
    fft.process(data);
    if spec.dimension == 2 {
        let mut column = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                column[i] = data[i * n + j];
            }
            fft.process(&mut column);
            for i in 0..n {
                data[i * n + j] = column[i];
            }
        }
    }
}

fn hermitian_projection(spec: &GridSpec, coeffs: &[Complex64]) -> Vec<Complex64> {
    (0..coeffs.len())
        .map(|i| 0.5 * (coeffs[i] + coeffs[spec.conjugate_index(i)].conj()))
        .collect()
}

/// A real-valued band-limited scalar field, held by its Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierScalar {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

impl FourierScalar {
    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            coeffs: vec![Complex64::new(0.0, 0.0); spec.len()],
        }
    }

    pub fn constant(spec: GridSpec, value: f64) -> Self {
        let mut f = Self::zeros(spec);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Forward transform of grid samples (row-major, axis 0 slowest).
    pub fn from_grid(spec: GridSpec, values: &[f64]) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(GeoError::InvalidGrid(format!(
                "expected {} grid values, got {}",
                spec.len(),
                values.len()
            )));
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform(&spec, &mut data, true);
        let scale = 1.0 / spec.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
        Ok(Self {
            spec,
            coeffs: hermitian_projection(&spec, &data),
        })
    }

    /// Samples `f` at the grid points. On T¹ the closure sees `x[1] == 0`.
    pub fn from_fn(spec: GridSpec, f: impl Fn(&[f64; 2]) -> f64) -> Self {
        let values: Vec<f64> = (0..spec.len()).map(|i| f(&spec.grid_point(i))).collect();
        Self::from_grid(spec, &values).expect("grid length matches spec")
    }

    /// Builds a field from explicit coefficients `c(k)`; the partner `c(-k)`
    /// is filled in as the complex conjugate.
    pub fn from_modes(spec: GridSpec, modes: &[(Vec<i64>, Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(spec);
        for (k, value) in modes {
            f.set_mode(k, *value)?;
        }
        Ok(f)
    }

    fn set_mode(&mut self, k: &[i64], value: Complex64) -> Result<()> {
        let index = self.spec.index_of(k).ok_or_else(|| {
            GeoError::InvalidConfig(format!(
                "wavevector {k:?} not representable on {:?}",
                self.spec
            ))
        })?;
        let partner = self.spec.conjugate_index(index);
        if partner == index {
            self.coeffs[index] = Complex64::new(value.re, 0.0);
        } else {
            self.coeffs[index] = value;
            self.coeffs[partner] = value.conj();
        }
        Ok(())
    }

    /// Zero-mean field with coefficients drawn iid complex Gaussian on
    /// `1 ≤ max_i |k_i| ≤ active_modes`, each scaled by `|k|^-decay`.
    ///
    /// Draw order for a `ChaCha8Rng` seeded with `seed`: the constant mode
    /// first (one real normal, only when `include_constant`), then for each
    /// wavevector in the upper half-space (`k_0 > 0`, or `k_0 == 0 && k_1 > 0`),
    /// in lexicographic order of `(k_0, k_1)`, the real and imaginary parts.
    pub fn random_band_limited(
        spec: GridSpec,
        seed: u64,
        active_modes: usize,
        decay: f64,
        include_constant: bool,
    ) -> Result<Self> {
        let cutoff = spec.dealias_cutoff();
        if active_modes > cutoff {
            return Err(GeoError::ModesExceedCutoff {
                requested: active_modes,
                cutoff,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = Self::zeros(spec);
        if include_constant {
            let c: f64 = StandardNormal.sample(&mut rng);
            f.coeffs[0] = Complex64::new(c, 0.0);
        }
        for k in upper_half_wavevectors(spec.dimension, active_modes as i64) {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            let norm = (k.iter().map(|&ki| (ki * ki) as f64).sum::<f64>()).sqrt();
            let value = Complex64::new(re, im) * norm.powf(-decay);
            f.set_mode(&k, value)?;
        }
        Ok(f)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `c(k)`, or zero when `k` lies outside the grid.
    pub fn coefficient(&self, k: &[i64]) -> Complex64 {
        self.spec
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    pub fn to_grid(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        transform(&self.spec, &mut data, false);
        data.iter().map(|c| c.re).collect()
    }

    /// Grid → coefficients → grid.
    pub fn transform_roundtrip(&self) -> Self {
        Self::from_grid(self.spec, &self.to_grid()).expect("grid length matches spec")
    }

    /// Pointwise evaluation by direct summation of the Fourier series.
    pub fn evaluate_at(&self, x: &[f64; 2]) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(i, c)| {
                let k = self.spec.wavevector(i);
                let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1];
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }

    /// Multiplies by `i k_axis`. The Nyquist mode is dropped so the result
    /// stays real.
    pub fn partial_derivative(&self, axis: usize) -> Result<Self> {
        if axis >= self.spec.dimension {
            return Err(GeoError::AxisOutOfRange {
                axis,
                dimension: self.spec.dimension,
            });
        }
        let nyquist = (self.spec.points_per_axis / 2) as i64;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = self.spec.wavevector(i)[axis];
                if k == nyquist {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, k as f64)
                }
            })
            .collect();
        Ok(Self {
            spec: self.spec,
            coeffs,
        })
    }

    pub(crate) fn d(&self, axis: usize) -> Self {
        self.partial_derivative(axis).expect("axis below dimension")
    }

    /// Dealiased pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.spec.ensure_same(&other.spec)?;
        let a = self.to_grid();
        let b = other.to_grid();
        let values: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(Self::from_grid(self.spec, &values)?.dealiased())
    }

    /// Product for fields already known to share a grid.
    pub(crate) fn times(&self, other: &Self) -> Self {
        assert_eq!(self.spec, other.spec, "grid mismatch in product");
        self.product(other).expect("specs checked")
    }

    /// Zeroes every coefficient with some `|k_i|` above the dealias cutoff.
    pub fn dealiased(mut self) -> Self {
        for i in 0..self.coeffs.len() {
            if !self.spec.within_cutoff(i) {
                self.coeffs[i] = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    pub fn is_dealiased(&self) -> bool {
        (0..self.coeffs.len())
            .all(|i| self.spec.within_cutoff(i) || self.coeffs[i].norm_sqr() == 0.0)
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn integral(&self) -> f64 {
        self.spec.measure() * self.mean()
    }

    pub fn without_mean(mut self) -> Self {
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        self
    }

    /// ∫ f g dμ by Parseval.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        self.spec.ensure_same(&other.spec)?;
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        Ok(self.spec.measure() * sum)
    }

    pub(crate) fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.spec, other.spec, "grid mismatch in inner product");
        self.l2_inner(other).expect("specs checked")
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Maximum absolute value over the grid points.
    pub fn sup_norm(&self) -> f64 {
        self.to_grid().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| (self.coeffs[i] - self.coeffs[self.spec.conjugate_index(i)].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn laplacian(&self) -> Self {
        self.map_symbol(|k| -((k[0] * k[0] + k[1] * k[1]) as f64))
    }

    /// Zero-mean solution `g` of `Δg = f - mean(f)`.
    pub fn inverse_laplacian(&self) -> Self {
        self.map_symbol(|k| {
            let k2 = (k[0] * k[0] + k[1] * k[1]) as f64;
            if k2 == 0.0 {
                0.0
            } else {
                -1.0 / k2
            }
        })
    }

    fn map_symbol(&self, symbol: impl Fn([i64; 2]) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * symbol(self.spec.wavevector(i)))
            .collect();
        Self {
            spec: self.spec,
            coeffs,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            spec: self.spec,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.spec, other.spec, "grid mismatch in linear combination");
        Self {
            spec: self.spec,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }
}

/// Wavevectors with `1 ≤ max |k_i| ≤ active` and positive leading entry.
fn upper_half_wavevectors(dimension: usize, active: i64) -> Vec<Vec<i64>> {
    match dimension {
        1 => (1..=active).map(|k| vec![k]).collect(),
        _ => {
            let mut out = Vec::new();
            for kx in 0..=active {
                for ky in -active..=active {
                    if kx > 0 || ky > 0 {
                        out.push(vec![kx, ky]);
                    }
                }
            }
            out
        }
    }
}

impl Add for &FourierScalar {
    type Output = FourierScalar;
    fn add(self, rhs: &FourierScalar) -> FourierScalar {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &FourierScalar {
    type Output = FourierScalar;
    fn sub(self, rhs: &FourierScalar) -> FourierScalar {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Add for FourierScalar {
    type Output = FourierScalar;
    fn add(self, rhs: FourierScalar) -> FourierScalar {
        &self + &rhs
    }
}

impl Sub for FourierScalar {
    type Output = FourierScalar;
    fn sub(self, rhs: FourierScalar) -> FourierScalar {
        &self - &rhs
    }
}

impl Neg for &FourierScalar {
    type Output = FourierScalar;
    fn neg(self) -> FourierScalar {
        self.scale(-1.0)
    }
}

impl Neg for FourierScalar {
    type Output = FourierScalar;
    fn neg(self) -> FourierScalar {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &FourierScalar {
    type Output = FourierScalar;
    fn mul(self, rhs: f64) -> FourierScalar {
        self.scale(rhs)
    }
}

impl Mul<f64> for FourierScalar {
    type Output = FourierScalar;
    fn mul(self, rhs: f64) -> FourierScalar {
        self.scale(rhs)
    }
}
