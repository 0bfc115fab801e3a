//! The algebra 𝔛(M) × C^∞(M) of the semidirect product, its right-invariant
//! (degenerate) metric, and divergence-level data of the bilinear operator B.
//!
//! The metric only sees `div u₁` and `u₂`, so B is exposed through [`BRep`]:
//! the pair `(div B₁, B₂)`. Vector-valued B(u, v) for u ≠ v is not defined
//! here since its defining 1-form is generally not exact.

use std::ops::{Add, Neg, Sub};

use crate::error::{GeoError, Result};
use crate::forms::{contract, d0, divergence, gradient, lie_bracket, operator_a, VectorField};
use crate::spectral::{FourierScalar, GridSpec};

/// Element `(u₁, u₂)` of the algebra: a vector field and a function.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraVector {
    field: VectorField,
    scalar: FourierScalar,
}

impl AlgebraVector {
    pub fn new(field: VectorField, scalar: FourierScalar) -> Result<Self> {
        if field.spec() != scalar.spec() {
            return Err(GeoError::GridMismatch {
                left: field.spec(),
                right: scalar.spec(),
            });
        }
        Ok(Self { field, scalar })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            field: VectorField::zeros(spec),
            scalar: FourierScalar::zeros(spec),
        }
    }

    /// Pure vector-field direction `(v, 0)`.
    pub fn from_field(field: VectorField) -> Self {
        let scalar = FourierScalar::zeros(field.spec());
        Self { field, scalar }
    }

    /// Pure function direction `(0, f)`.
    pub fn from_scalar(scalar: FourierScalar) -> Self {
        let field = VectorField::zeros(scalar.spec());
        Self { field, scalar }
    }

    /// Random general vector field (seeds `seed..seed+n`) and random
    /// function (seed `seed + n`), all with a constant mode.
    pub fn random(spec: GridSpec, seed: u64, active_modes: usize, decay: f64) -> Result<Self> {
        let field = VectorField::random(spec, seed, active_modes, decay)?;
        let scalar = FourierScalar::random_band_limited(
            spec,
            seed.wrapping_add(spec.dimension() as u64),
            active_modes,
            decay,
            true,
        )?;
        Ok(Self { field, scalar })
    }

    pub fn spec(&self) -> GridSpec {
        self.scalar.spec()
    }

    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn scalar(&self) -> &FourierScalar {
        &self.scalar
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            field: self.field.scale(factor),
            scalar: self.scalar.scale(factor),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.field.sup_norm().max(self.scalar.sup_norm())
    }
}

impl Add for &AlgebraVector {
    type Output = AlgebraVector;
    fn add(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector {
            field: &self.field + &rhs.field,
            scalar: &self.scalar + &rhs.scalar,
        }
    }
}

impl Sub for &AlgebraVector {
    type Output = AlgebraVector;
    fn sub(self, rhs: &AlgebraVector) -> AlgebraVector {
        AlgebraVector {
            field: &self.field - &rhs.field,
            scalar: &self.scalar - &rhs.scalar,
        }
    }
}

impl Neg for &AlgebraVector {
    type Output = AlgebraVector;
    fn neg(self) -> AlgebraVector {
        self.scale(-1.0)
    }
}

fn ensure_same(a: GridSpec, b: GridSpec) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(GeoError::GridMismatch { left: a, right: b })
    }
}

/// Divergence-level representation `(div B₁, B₂)` of a B-type operator.
#[derive(Clone, Debug, PartialEq)]
pub struct BRep {
    /// `div B₁`, zero mean.
    pub div_part: FourierScalar,
    /// `B₂`.
    pub function_part: FourierScalar,
}

impl BRep {
    /// ⟨⟨self, w⟩⟩ = ¼∫[div_part · div w₁ + function_part · w₂] dμ.
    pub fn pair_with(&self, w: &AlgebraVector) -> Result<f64> {
        ensure_same(self.div_part.spec(), w.spec())?;
        Ok(0.25
            * (self.div_part.inner(&divergence(&w.field)) + self.function_part.inner(&w.scalar)))
    }

    /// ⟨⟨self, other⟩⟩ between two divergence-level representations.
    pub fn pairing(&self, other: &BRep) -> Result<f64> {
        ensure_same(self.div_part.spec(), other.div_part.spec())?;
        Ok(0.25
            * (self.div_part.inner(&other.div_part)
                + self.function_part.inner(&other.function_part)))
    }

    pub fn sup_norm(&self) -> f64 {
        self.div_part.sup_norm().max(self.function_part.sup_norm())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            div_part: self.div_part.scale(factor),
            function_part: self.function_part.scale(factor),
        }
    }
}

impl Sub for &BRep {
    type Output = BRep;
    fn sub(self, rhs: &BRep) -> BRep {
        BRep {
            div_part: &self.div_part - &rhs.div_part,
            function_part: &self.function_part - &rhs.function_part,
        }
    }
}

impl Add for &BRep {
    type Output = BRep;
    fn add(self, rhs: &BRep) -> BRep {
        BRep {
            div_part: &self.div_part + &rhs.div_part,
            function_part: &self.function_part + &rhs.function_part,
        }
    }
}

/// Scalar field ⟨A u₁, v₁⟩.
pub fn a_pairing(u1: &VectorField, v1: &VectorField) -> FourierScalar {
    contract(v1, &operator_a(u1))
}

/// Directional derivative `df(v) = ⟨v, grad f⟩`.
pub(crate) fn directional(v: &VectorField, f: &FourierScalar) -> FourierScalar {
    contract(v, &d0(f))
}

/// [u, v] = ([u₁, v₁], dv₂(u₁) − du₂(v₁)).
pub fn commutator(u: &AlgebraVector, v: &AlgebraVector) -> Result<AlgebraVector> {
    ensure_same(u.spec(), v.spec())?;
    let field = lie_bracket(&u.field, &v.field)?;
    let scalar = &directional(&u.field, &v.scalar) - &directional(&v.field, &u.scalar);
    Ok(AlgebraVector { field, scalar })
}

/// ⟨⟨u, v⟩⟩ = ¼∫[div u₁ div v₁ + u₂ v₂] dμ.
pub fn pairing(u: &AlgebraVector, v: &AlgebraVector) -> Result<f64> {
    ensure_same(u.spec(), v.spec())?;
    Ok(0.25 * (divergence(&u.field).inner(&divergence(&v.field)) + u.scalar.inner(&v.scalar)))
}

/// ad_w u = −[w, u].
pub fn ad(w: &AlgebraVector, u: &AlgebraVector) -> Result<AlgebraVector> {
    Ok(-&commutator(w, u)?)
}

/// ⟨⟨ad_w u, v⟩⟩ + ⟨⟨u, ad_w v⟩⟩; vanishes when w is tangent to the
/// volume-preserving subgroup.
pub fn descent_residual(u: &AlgebraVector, v: &AlgebraVector, w: &AlgebraVector) -> Result<f64> {
    Ok(pairing(&ad(w, u)?, v)? + pairing(u, &ad(w, v)?)?)
}

/// `(div B₁(u,u), B₂(u,u))`.
pub fn b_diag(u: &AlgebraVector) -> BRep {
    let div_u = divergence(&u.field);
    let interior = &(&a_pairing(&u.field, &u.field) - &div_u.times(&div_u).scale(0.5))
        + &u.scalar.times(&u.scalar).scale(0.5);
    BRep {
        div_part: interior.without_mean(),
        function_part: -divergence(&u.field.scaled_by(&u.scalar)),
    }
}

/// Divergence-level data of ½(B(u,v) + B(v,u)).
pub fn b_sym(u: &AlgebraVector, v: &AlgebraVector) -> Result<BRep> {
    ensure_same(u.spec(), v.spec())?;
    let interior = &(&(&a_pairing(&u.field, &v.field) + &a_pairing(&v.field, &u.field))
        - &divergence(&v.field).times(&divergence(&u.field)))
        + &u.scalar.times(&v.scalar);
    let flux = &v.field.scaled_by(&u.scalar) + &u.field.scaled_by(&v.scalar);
    Ok(BRep {
        div_part: interior.scale(0.5).without_mean(),
        function_part: divergence(&flux).scale(-0.5),
    })
}

/// Gradient-plus-function representative of a direction: keeps `div u₁` and
/// `u₂`, drops the divergence-free part of `u₁`.
pub fn horizontal_part(u: &AlgebraVector) -> AlgebraVector {
    AlgebraVector {
        field: gradient(&divergence(&u.field).inverse_laplacian()),
        scalar: u.scalar.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line() -> GridSpec {
        GridSpec::new(1, 64).unwrap()
    }

    fn s(spec: GridSpec, f: impl Fn(f64) -> f64) -> FourierScalar {
        FourierScalar::from_fn(spec, |x| f(x[0]))
    }

    fn field(spec: GridSpec, f: impl Fn(f64) -> f64) -> VectorField {
        VectorField::new(vec![s(spec, f)]).unwrap()
    }

    fn av(spec: GridSpec, f1: impl Fn(f64) -> f64, f2: impl Fn(f64) -> f64) -> AlgebraVector {
        AlgebraVector::new(field(spec, f1), s(spec, f2)).unwrap()
    }

    fn close(a: &FourierScalar, b: &FourierScalar, tol: f64) -> bool {
        (a - b).sup_norm() <= tol
    }

    #[test]
    fn commutator_examples() {
        let spec = line();
        let u = av(spec, f64::sin, |_| 0.0);
        let v = av(spec, f64::cos, |_| 0.0);
        let c = commutator(&u, &v).unwrap();
        assert!(close(
            c.field().component(0),
            &FourierScalar::constant(spec, -1.0),
            1e-14
        ));
        assert!(c.scalar().sup_norm() < 1e-15);

        let f = AlgebraVector::from_scalar(s(spec, |x| x.cos() + 0.3));
        let g = AlgebraVector::from_scalar(s(spec, |x| (2.0 * x).sin()));
        assert_eq!(commutator(&f, &g).unwrap().sup_norm(), 0.0);

        let u = av(spec, f64::sin, f64::cos);
        let v = av(spec, |_| 0.0, f64::sin);
        let c = commutator(&u, &v).unwrap();
        assert!(c.field().sup_norm() < 1e-15);
        assert!(close(
            c.scalar(),
            &s(spec, |x| 0.5 * (2.0 * x).sin()),
            1e-14
        ));
    }

    #[test]
    fn commutator_is_antisymmetric() {
        let spec = GridSpec::new(2, 32).unwrap();
        let u = AlgebraVector::random(spec, 1, 6, 2.0).unwrap();
        let v = AlgebraVector::random(spec, 10, 6, 2.0).unwrap();
        let sum = &commutator(&u, &v).unwrap() + &commutator(&v, &u).unwrap();
        assert!(sum.sup_norm() < 1e-14);
    }

    #[test]
    fn pairing_examples() {
        let spec = line();
        let u = av(spec, f64::sin, |_| 0.0);
        assert!((pairing(&u, &u).unwrap() - PI / 4.0).abs() < 1e-14);
        let u = av(spec, f64::sin, |_| 1.0);
        assert!((pairing(&u, &u).unwrap() - 3.0 * PI / 4.0).abs() < 1e-14);
        let k = av(spec, |_| 1.0, |_| 0.0);
        let any = AlgebraVector::random(spec, 4, 8, 1.0).unwrap();
        assert_eq!(pairing(&k, &any).unwrap(), 0.0);
        let other = AlgebraVector::zeros(GridSpec::new(1, 32).unwrap());
        assert!(pairing(&u, &other).is_err());
    }

    #[test]
    fn adjoint_examples() {
        let spec = line();
        let u = AlgebraVector::random(spec, 3, 8, 1.0).unwrap();
        assert!(ad(&u, &u).unwrap().sup_norm() < 1e-14);

        let w = av(spec, |_| 1.0, |_| 0.0);
        let u = av(spec, f64::sin, |_| 0.0);
        let a = ad(&w, &u).unwrap();
        assert!(close(a.field().component(0), &s(spec, |x| -x.cos()), 1e-14));

        let w = av(spec, f64::sin, |_| 0.0);
        let u = av(spec, |_| 0.0, f64::sin);
        let a = ad(&w, &u).unwrap();
        assert!(close(
            a.scalar(),
            &s(spec, |x| -0.5 * (2.0 * x).sin()),
            1e-14
        ));
    }

    #[test]
    fn descent_examples() {
        let spec = line();
        let w = av(spec, |_| 1.0, |_| 0.0);
        let u = av(spec, f64::sin, |_| 0.0);
        let v = av(spec, f64::cos, |_| 0.0);
        assert!(descent_residual(&u, &v, &w).unwrap().abs() < 1e-12);

        // w = cos x ∂x is not volume preserving; hand integration gives 3π/8
        let w = av(spec, f64::cos, |_| 0.0);
        let u = av(spec, |x| (2.0 * x).sin(), |_| 0.0);
        let v = av(spec, |x| -x.cos(), |_| 0.0);
        let r = descent_residual(&u, &v, &w).unwrap();
        assert!((r - 3.0 * PI / 8.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn b_diag_examples() {
        let spec = line();
        let u = av(spec, f64::sin, |_| 0.0);
        let b = b_diag(&u);
        assert!(close(
            &b.div_part,
            &s(spec, |x| -0.75 * (2.0 * x).cos()),
            1e-13
        ));
        assert!(b.function_part.sup_norm() < 1e-15);

        let c = AlgebraVector::from_scalar(FourierScalar::constant(spec, 2.5));
        assert!(b_diag(&c).sup_norm() < 1e-15);

        let k = av(spec, |_| 1.0, |_| 0.0);
        assert_eq!(b_diag(&k).sup_norm(), 0.0);
    }

    #[test]
    fn b_sym_examples() {
        let spec = line();
        let u = av(spec, f64::sin, |_| 0.0);
        let v = av(spec, f64::cos, |_| 0.0);
        let b = b_sym(&u, &v).unwrap();
        assert!(close(
            &b.div_part,
            &s(spec, |x| 0.75 * (2.0 * x).sin()),
            1e-13
        ));
        assert!(b.function_part.sup_norm() < 1e-15);

        let r = AlgebraVector::random(spec, 12, 8, 1.0).unwrap();
        assert!((&b_sym(&r, &r).unwrap() - &b_diag(&r)).sup_norm() < 1e-13);

        let f = s(spec, |x| 1.0 + x.sin());
        let g = s(spec, |x| x.cos() - 0.5);
        let b = b_sym(
            &AlgebraVector::from_scalar(f.clone()),
            &AlgebraVector::from_scalar(g.clone()),
        )
        .unwrap();
        let fg = f.times(&g);
        assert!(close(
            &b.div_part,
            &(&fg - &FourierScalar::constant(spec, fg.mean())).scale(0.5),
            1e-14
        ));
        assert!(b.function_part.sup_norm() < 1e-15);
    }

    #[test]
    fn b_sym_is_symmetric() {
        let spec = GridSpec::new(2, 32).unwrap();
        let u = AlgebraVector::random(spec, 5, 5, 2.0).unwrap();
        let v = AlgebraVector::random(spec, 50, 5, 2.0).unwrap();
        let d = &b_sym(&u, &v).unwrap() - &b_sym(&v, &u).unwrap();
        assert!(d.sup_norm() < 1e-13);
        assert!(b_sym(&u, &v).unwrap().div_part.mean().abs() < 1e-12);
    }

    #[test]
    fn horizontal_part_keeps_metric_data() {
        let spec = GridSpec::new(2, 32).unwrap();
        let u = AlgebraVector::random(spec, 8, 6, 1.0).unwrap();
        let h = horizontal_part(&u);
        assert!((divergence(h.field()) - divergence(u.field())).sup_norm() < 1e-12);
        let w = AlgebraVector::random(spec, 80, 6, 1.0).unwrap();
        assert!((pairing(&h, &w).unwrap() - pairing(&u, &w).unwrap()).abs() < 1e-11);
    }
}
