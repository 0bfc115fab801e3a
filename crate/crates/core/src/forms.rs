//! Vector fields and differential forms on the flat torus.
//!
//! With the flat metric the musical isomorphisms are componentwise
//! identities, so vector fields and 1-forms share a representation but are
//! kept as distinct types. 2-forms exist only on T² and are stored by their
//! `dx∧dy` density.

use std::ops::{Add, Neg, Sub};

use crate::error::{GeoError, Result};
use crate::spectral::{FourierScalar, GridSpec};

fn check_components(components: &[FourierScalar]) -> Result<GridSpec> {
    let first = components
        .first()
        .ok_or_else(|| GeoError::InvalidGrid("no components".into()))?;
    let spec = first.spec();
    if components.len() != spec.dimension() {
        return Err(GeoError::DimensionMismatch {
            expected: spec.dimension(),
            found: components.len(),
        });
    }
    for c in components {
        if c.spec() != spec {
            return Err(GeoError::GridMismatch {
                left: spec,
                right: c.spec(),
            });
        }
    }
    Ok(spec)
}

fn ensure_same(a: GridSpec, b: GridSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(GeoError::GridMismatch { left: a, right: b })
    }
}

macro_rules! componentwise {
    ($name:ident) => {
        impl $name {
            pub fn new(components: Vec<FourierScalar>) -> Result<Self> {
                check_components(&components)?;
                Ok(Self { components })
            }

            pub fn zeros(spec: GridSpec) -> Self {
                Self {
                    components: vec![FourierScalar::zeros(spec); spec.dimension()],
                }
            }

            /// Constant coefficients, one per axis.
            pub fn constant(spec: GridSpec, values: &[f64]) -> Result<Self> {
                Self::new(
                    values
                        .iter()
                        .map(|&v| FourierScalar::constant(spec, v))
                        .collect(),
                )
            }

            /// Samples component `axis` from `f(axis, x)`.
            pub fn from_fn(spec: GridSpec, f: impl Fn(usize, &[f64; 2]) -> f64) -> Self {
                Self {
                    components: (0..spec.dimension())
                        .map(|axis| FourierScalar::from_fn(spec, |x| f(axis, x)))
                        .collect(),
                }
            }

            /// Independent random components, seeded `seed, seed + 1, ...`.
            pub fn random(
                spec: GridSpec,
                seed: u64,
                active_modes: usize,
                decay: f64,
            ) -> Result<Self> {
                let components = (0..spec.dimension())
                    .map(|axis| {
                        FourierScalar::random_band_limited(
                            spec,
                            seed.wrapping_add(axis as u64),
                            active_modes,
                            decay,
                            true,
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self { components })
            }

            pub fn spec(&self) -> GridSpec {
                self.components[0].spec()
            }

            pub fn dimension(&self) -> usize {
                self.components.len()
            }

            pub fn component(&self, axis: usize) -> &FourierScalar {
                &self.components[axis]
            }

            pub fn components(&self) -> &[FourierScalar] {
                &self.components
            }

            /// ∫ Σ_i a_i b_i dμ.
            pub fn l2_inner(&self, other: &Self) -> Result<f64> {
                ensure_same(self.spec(), other.spec())?;
                Ok(self
                    .components
                    .iter()
                    .zip(&other.components)
                    .map(|(a, b)| a.inner(b))
                    .sum())
            }

            pub fn sup_norm(&self) -> f64 {
                self.components
                    .iter()
                    .map(FourierScalar::sup_norm)
                    .fold(0.0, f64::max)
            }

            pub fn scale(&self, factor: f64) -> Self {
                self.map(|c| c.scale(factor))
            }

            /// Dealiased pointwise product with a scalar field.
            pub fn scaled_by(&self, f: &FourierScalar) -> Self {
                self.map(|c| f.times(c))
            }

            pub fn map(&self, f: impl Fn(&FourierScalar) -> FourierScalar) -> Self {
                Self {
                    components: self.components.iter().map(f).collect(),
                }
            }

            fn zip_with(
                &self,
                other: &Self,
                f: impl Fn(&FourierScalar, &FourierScalar) -> FourierScalar,
            ) -> Self {
                Self {
                    components: self
                        .components
                        .iter()
                        .zip(&other.components)
                        .map(|(a, b)| f(a, b))
                        .collect(),
                }
            }
        }

        impl Add for &$name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                self.zip_with(rhs, |a, b| a + b)
            }
        }

        impl Sub for &$name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                self.zip_with(rhs, |a, b| a - b)
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                &self + &rhs
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                &self - &rhs
            }
        }

        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                self.scale(-1.0)
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                self.scale(-1.0)
            }
        }
    };
}

/// Tangent vector field, one scalar component per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<FourierScalar>,
}

/// Differential 1-form `Σ a_i dx_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    components: Vec<FourierScalar>,
}

componentwise!(VectorField);
componentwise!(OneForm);

/// 2-form `h dx∧dy` on T².
#[derive(Clone, Debug, PartialEq)]
pub struct TwoForm {
    density: FourierScalar,
}

impl TwoForm {
    pub fn new(density: FourierScalar) -> Result<Self> {
        let dim = density.spec().dimension();
        if dim != 2 {
            return Err(GeoError::DimensionMismatch {
                expected: 2,
                found: dim,
            });
        }
        Ok(Self { density })
    }

    pub fn density(&self) -> &FourierScalar {
        &self.density
    }

    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        self.density.l2_inner(&other.density)
    }
}

fn require_plane(spec: GridSpec) -> Result<()> {
    if spec.dimension() == 2 {
        Ok(())
    } else {
        Err(GeoError::DimensionMismatch {
            expected: 2,
            found: spec.dimension(),
        })
    }
}

pub fn flat(v: &VectorField) -> OneForm {
    OneForm {
        components: v.components.clone(),
    }
}

pub fn sharp(alpha: &OneForm) -> VectorField {
    VectorField {
        components: alpha.components.clone(),
    }
}

pub fn gradient(f: &FourierScalar) -> VectorField {
    VectorField {
        components: (0..f.spec().dimension()).map(|axis| f.d(axis)).collect(),
    }
}

pub fn divergence(v: &VectorField) -> FourierScalar {
    v.components
        .iter()
        .enumerate()
        .map(|(axis, c)| c.d(axis))
        .reduce(|a, b| a + b)
        .expect("at least one component")
}

/// Natural pairing ⟨v, α⟩ of a vector field with a 1-form (dealiased).
pub fn contract(v: &VectorField, alpha: &OneForm) -> FourierScalar {
    v.components
        .iter()
        .zip(&alpha.components)
        .map(|(a, b)| a.times(b))
        .reduce(|a, b| a + b)
        .expect("at least one component")
}

/// Pointwise Euclidean dot product of two vector fields (dealiased).
pub fn dot(v: &VectorField, w: &VectorField) -> FourierScalar {
    contract(v, &flat(w))
}

pub fn d0(f: &FourierScalar) -> OneForm {
    flat(&gradient(f))
}

/// d(a dx + b dy) = (∂x b − ∂y a) dx∧dy.
pub fn d1(alpha: &OneForm) -> Result<TwoForm> {
    require_plane(alpha.spec())?;
    let a = &alpha.components[0];
    let b = &alpha.components[1];
    TwoForm::new(&b.d(0) - &a.d(1))
}

/// Codifferential on 1-forms, δα = −div α♯.
pub fn delta1(alpha: &OneForm) -> FourierScalar {
    -divergence(&sharp(alpha))
}

/// Codifferential on 2-forms, δ(h dx∧dy) = (∂y h) dx − (∂x h) dy.
pub fn delta2(omega: &TwoForm) -> OneForm {
    let h = &omega.density;
    OneForm {
        components: vec![h.d(1), -h.d(0)],
    }
}

/// (a dx + b dy) ∧ (c dx + e dy) = (a e − b c) dx∧dy.
pub fn wedge11(alpha: &OneForm, beta: &OneForm) -> Result<TwoForm> {
    require_plane(alpha.spec())?;
    ensure_same(alpha.spec(), beta.spec())?;
    let (a, b) = (&alpha.components[0], &alpha.components[1]);
    let (c, e) = (&beta.components[0], &beta.components[1]);
    TwoForm::new(&a.times(e) - &b.times(c))
}

/// [X, Y] = DY·X − DX·Y.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField> {
    ensure_same(x.spec(), y.spec())?;
    let n = x.dimension();
    let components = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    &x.components[j].times(&y.components[i].d(j))
                        - &y.components[j].times(&x.components[i].d(j))
                })
                .reduce(|a, b| a + b)
                .expect("at least one axis")
        })
        .collect();
    Ok(VectorField { components })
}

/// A v = dδv♭ = −d div v.
pub fn operator_a(v: &VectorField) -> OneForm {
    -d0(&divergence(v))
}

/// Gradient representative `w = grad g` of A⁻¹(df), with `Δg = −f + mean f`
/// and `mean g = 0`; hence `div w = −f + mean f`.
pub fn inv_a_exact(f: &FourierScalar) -> VectorField {
    gradient(&(-f).inverse_laplacian())
}

/// Hodge splitting of a 1-form on the flat torus.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeParts {
    /// Zero-mean potential `f`; the exact part is `df`.
    pub exact_potential: FourierScalar,
    pub coexact: OneForm,
    /// Constant-coefficient part.
    pub harmonic: OneForm,
}

impl HodgeParts {
    pub fn exact(&self) -> OneForm {
        d0(&self.exact_potential)
    }

    pub fn reconstruct(&self) -> OneForm {
        &(&self.exact() + &self.coexact) + &self.harmonic
    }
}

pub fn hodge_split(alpha: &OneForm) -> HodgeParts {
    let spec = alpha.spec();
    let exact_potential = divergence(&sharp(alpha)).inverse_laplacian();
    let harmonic = OneForm {
        components: alpha
            .components
            .iter()
            .map(|c| FourierScalar::constant(spec, c.mean()))
            .collect(),
    };
    let coexact = &(alpha - &d0(&exact_potential)) - &harmonic;
    HodgeParts {
        exact_potential,
        coexact,
        harmonic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> GridSpec {
        GridSpec::new(1, 32).unwrap()
    }

    fn plane() -> GridSpec {
        GridSpec::new(2, 32).unwrap()
    }

    fn scalar(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> FourierScalar {
        FourierScalar::from_fn(spec, |x| f(x[0], x[1]))
    }

    fn close(a: &FourierScalar, b: &FourierScalar, tol: f64) -> bool {
        (a - b).sup_norm() <= tol
    }

    #[test]
    fn musical_isomorphisms() {
        let spec = line();
        let v = VectorField::new(vec![scalar(spec, |x, _| x.sin())]).unwrap();
        assert_eq!(flat(&v).component(0), v.component(0));
        let p = plane();
        let alpha = OneForm::new(vec![FourierScalar::zeros(p), scalar(p, |_, y| y.cos())]).unwrap();
        assert_eq!(sharp(&alpha).component(1), alpha.component(1));
        let r = VectorField::random(p, 3, 6, 1.0).unwrap();
        assert_eq!(sharp(&flat(&r)), r);
    }

    #[test]
    fn gradient_and_divergence() {
        let spec = line();
        let v = VectorField::new(vec![scalar(spec, |x, _| x.sin())]).unwrap();
        assert!(close(&divergence(&v), &scalar(spec, |x, _| x.cos()), 1e-13));

        let p = plane();
        let g = gradient(&scalar(p, |x, y| x.sin() + y.cos()));
        assert!(close(g.component(0), &scalar(p, |x, _| x.cos()), 1e-13));
        assert!(close(g.component(1), &scalar(p, |_, y| -y.sin()), 1e-13));

        let lap = divergence(&gradient(&scalar(spec, |x, _| (2.0 * x).cos())));
        assert!(close(
            &lap,
            &scalar(spec, |x, _| -4.0 * (2.0 * x).cos()),
            1e-12
        ));

        let r = VectorField::random(p, 8, 8, 1.0).unwrap();
        assert_eq!(divergence(&r).mean(), 0.0);
    }

    #[test]
    fn exterior_derivative_and_codifferential() {
        let p = plane();
        let f = scalar(p, |x, y| x.sin() * y.sin());
        assert!(d1(&d0(&f)).unwrap().density().sup_norm() < 1e-14);

        let alpha = OneForm::new(vec![scalar(p, |x, _| x.sin()), FourierScalar::zeros(p)]).unwrap();
        assert!(close(&delta1(&alpha), &scalar(p, |x, _| -x.cos()), 1e-13));

        let omega = TwoForm::new(scalar(p, |x, _| x.sin())).unwrap();
        let d = delta2(&omega);
        assert!(d.component(0).sup_norm() < 1e-13);
        assert!(close(d.component(1), &scalar(p, |x, _| -x.cos()), 1e-13));

        let line_form = OneForm::zeros(line());
        assert!(matches!(
            d1(&line_form),
            Err(GeoError::DimensionMismatch { .. })
        ));
        assert!(TwoForm::new(FourierScalar::zeros(line())).is_err());
    }

    #[test]
    fn codifferentials_compose_to_zero() {
        let p = plane();
        let h = FourierScalar::random_band_limited(p, 21, 8, 1.0, true).unwrap();
        let omega = TwoForm::new(h).unwrap();
        assert!(delta1(&delta2(&omega)).sup_norm() < 1e-12);
    }

    #[test]
    fn wedge_products() {
        let p = plane();
        let dx = OneForm::constant(p, &[1.0, 0.0]).unwrap();
        let dy = OneForm::constant(p, &[0.0, 1.0]).unwrap();
        let vol = wedge11(&dx, &dy).unwrap();
        assert!(close(
            vol.density(),
            &FourierScalar::constant(p, 1.0),
            1e-15
        ));

        let f = scalar(p, |x, y| x.cos() + y.sin());
        let g = scalar(p, |x, _| (2.0 * x).sin());
        let fdx = OneForm::new(vec![f, FourierScalar::zeros(p)]).unwrap();
        let gdx = OneForm::new(vec![g, FourierScalar::zeros(p)]).unwrap();
        assert!(wedge11(&fdx, &gdx).unwrap().density().sup_norm() < 1e-15);

        let a = OneForm::new(vec![scalar(p, |x, _| x.cos()), FourierScalar::zeros(p)]).unwrap();
        let b = OneForm::new(vec![FourierScalar::zeros(p), scalar(p, |_, y| y.sin())]).unwrap();
        let w = wedge11(&a, &b).unwrap();
        assert!(close(
            w.density(),
            &scalar(p, |x, y| x.cos() * y.sin()),
            1e-14
        ));
        let anti = wedge11(&b, &a).unwrap();
        assert!((w.density() + anti.density()).sup_norm() < 1e-15);

        assert!(wedge11(&OneForm::zeros(line()), &OneForm::zeros(line())).is_err());
    }

    #[test]
    fn lie_brackets() {
        let spec = line();
        let u = VectorField::new(vec![scalar(spec, |x, _| x.sin())]).unwrap();
        let v = VectorField::new(vec![scalar(spec, |x, _| x.cos())]).unwrap();
        let b = lie_bracket(&u, &v).unwrap();
        assert!(close(
            b.component(0),
            &FourierScalar::constant(spec, -1.0),
            1e-14
        ));
        assert!(lie_bracket(&u, &u).unwrap().sup_norm() < 1e-15);

        let p = plane();
        let x = VectorField::new(vec![scalar(p, |_, y| y.sin()), FourierScalar::zeros(p)]).unwrap();
        let y = VectorField::constant(p, &[0.0, 1.0]).unwrap();
        let b = lie_bracket(&x, &y).unwrap();
        assert!(close(b.component(0), &scalar(p, |_, y| -y.cos()), 1e-13));
        assert!(b.component(1).sup_norm() < 1e-15);

        assert!(matches!(
            lie_bracket(&u, &VectorField::zeros(GridSpec::new(1, 64).unwrap())),
            Err(GeoError::GridMismatch { .. })
        ));
    }

    #[test]
    fn operator_a_examples() {
        let spec = line();
        let v = VectorField::new(vec![scalar(spec, |x, _| x.sin())]).unwrap();
        assert!(close(
            operator_a(&v).component(0),
            &scalar(spec, |x, _| x.sin()),
            1e-13
        ));
        let c = VectorField::constant(spec, &[1.0]).unwrap();
        assert_eq!(operator_a(&c).sup_norm(), 0.0);
        let p = plane();
        let shear =
            VectorField::new(vec![scalar(p, |_, y| y.sin()), FourierScalar::zeros(p)]).unwrap();
        assert!(operator_a(&shear).sup_norm() < 1e-15);
    }

    #[test]
    fn inverse_of_a_on_exact_forms() {
        let spec = line();
        let cosx = scalar(spec, |x, _| x.cos());
        let w = inv_a_exact(&cosx);
        assert!(close(w.component(0), &scalar(spec, |x, _| -x.sin()), 1e-13));
        assert!(close(&divergence(&w), &-&cosx, 1e-13));

        let shifted = scalar(spec, |x, _| 2.0 + x.cos());
        assert!(close(&divergence(&inv_a_exact(&shifted)), &-&cosx, 1e-13));

        assert_eq!(
            inv_a_exact(&FourierScalar::constant(spec, 3.0)).sup_norm(),
            0.0
        );
    }

    #[test]
    fn hodge_examples() {
        let spec = line();
        let alpha = OneForm::new(vec![scalar(spec, |x, _| x.cos())]).unwrap();
        let parts = hodge_split(&alpha);
        assert!(close(
            &parts.exact_potential,
            &scalar(spec, |x, _| x.sin()),
            1e-13
        ));
        assert!(parts.coexact.sup_norm() < 1e-13);
        assert!(parts.harmonic.sup_norm() < 1e-15);

        let three = OneForm::constant(spec, &[3.0]).unwrap();
        let parts = hodge_split(&three);
        assert_eq!(parts.exact_potential.sup_norm(), 0.0);
        assert!((parts.harmonic.component(0).mean() - 3.0).abs() < 1e-15);

        let p = plane();
        let beta = OneForm::new(vec![FourierScalar::zeros(p), scalar(p, |x, _| x.cos())]).unwrap();
        let parts = hodge_split(&beta);
        assert!(parts.exact_potential.sup_norm() < 1e-15);
        assert!(parts.harmonic.sup_norm() < 1e-15);
        assert!((&parts.coexact - &beta).sup_norm() < 1e-15);
    }
}
