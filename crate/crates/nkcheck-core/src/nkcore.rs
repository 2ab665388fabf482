//! The nearly Kähler structures on S³×S³.
//!
//! A tangent vector at (p, q) is stored in the (α, β) coordinates of
//! Z = (pα, qβ) with α, β imaginary quaternions: every structure tensor
//! of interest (J, P, Q, g, G, the curvature) has a closed form in these
//! coordinates, and tangency to the product of spheres is automatic.

use crate::quat::{ImaginaryQuaternion, Quaternion};
use crate::{CoreError, Result};

/// Base-point equality tolerance (ℝ⁸ Euclidean distance).
pub const EPS_BASE: f64 = 1e-10;
/// Unit-norm tolerance for points on S³×S³.
pub const EPS_POINT: f64 = 1e-10;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// A point (p, q) ∈ S³×S³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    p: Quaternion,
    q: Quaternion,
}

impl SurfacePoint {
    /// Both factors must be unit within [`EPS_POINT`].
    pub fn new(p: Quaternion, q: Quaternion) -> Result<Self> {
        let r = (p.norm() - 1.0).abs().max((q.norm() - 1.0).abs());
        if r > EPS_POINT {
            return Err(CoreError::NotOnSurface(r));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> Quaternion {
        self.p
    }

    pub fn q(&self) -> Quaternion {
        self.q
    }

    /// ℝ⁸ distance between base points.
    pub fn distance(&self, other: &SurfacePoint) -> f64 {
        ((self.p - other.p).norm_sq() + (self.q - other.q).norm_sq()).sqrt()
    }
}

/// A tangent vector Z = (pα, qβ) at a [`SurfacePoint`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector {
    pub base: SurfacePoint,
    pub alpha: ImaginaryQuaternion,
    pub beta: ImaginaryQuaternion,
}

/// A raw ℝ⁸ vector (u, v), not necessarily tangent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientVector {
    pub u: Quaternion,
    pub v: Quaternion,
}

impl TangentVector {
    pub fn new(base: SurfacePoint, alpha: ImaginaryQuaternion, beta: ImaginaryQuaternion) -> Self {
        Self { base, alpha, beta }
    }

    pub fn zero(base: SurfacePoint) -> Self {
        Self::new(base, ImaginaryQuaternion::ZERO, ImaginaryQuaternion::ZERO)
    }

    /// Ambient ℝ⁸ representation (pα, qβ).
    pub fn ambient(&self) -> AmbientVector {
        AmbientVector {
            u: self.base.p() * self.alpha.promote(),
            v: self.base.q() * self.beta.promote(),
        }
    }

    /// Recover (α, β) from an ambient vector at `base`, dropping the
    /// radial components ⟨u, p⟩p and ⟨v, q⟩q.
    pub fn from_ambient_projected(base: SurfacePoint, amb: AmbientVector) -> Self {
        let alpha = (base.p().conj() * amb.u).im();
        let beta = (base.q().conj() * amb.v).im();
        Self::new(base, alpha, beta)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.base, self.alpha.scale(s), self.beta.scale(s))
    }
}

impl std::ops::Add for TangentVector {
    type Output = Self;
    /// Componentwise; callers combine vectors at a shared base point.
    fn add(self, r: Self) -> Self {
        Self::new(self.base, self.alpha + r.alpha, self.beta + r.beta)
    }
}

impl std::ops::Sub for TangentVector {
    type Output = Self;
    fn sub(self, r: Self) -> Self {
        Self::new(self.base, self.alpha - r.alpha, self.beta - r.beta)
    }
}

impl std::ops::Neg for TangentVector {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

fn check_base(a: &TangentVector, b: &TangentVector) -> Result<()> {
    let d = a.base.distance(&b.base);
    if d > EPS_BASE {
        return Err(CoreError::BasePointMismatch(d));
    }
    Ok(())
}

/// Almost complex structure: (α, β) ↦ ((2β−α)/√3, (−2α+β)/√3).
pub fn apply_j(z: &TangentVector) -> TangentVector {
    let a = (z.beta.scale(2.0) - z.alpha).scale(1.0 / SQRT3);
    let b = (z.beta - z.alpha.scale(2.0)).scale(1.0 / SQRT3);
    TangentVector::new(z.base, a, b)
}

/// Almost product structure: swaps α and β.
pub fn apply_p(z: &TangentVector) -> TangentVector {
    TangentVector::new(z.base, z.beta, z.alpha)
}

/// Usual product structure: negates α.
pub fn apply_q(z: &TangentVector) -> TangentVector {
    TangentVector::new(z.base, -z.alpha, z.beta)
}

/// The nearly Kähler metric ½(⟨Z, W⟩ + ⟨JZ, JW⟩) in coordinates.
pub fn metric_g(z: &TangentVector, w: &TangentVector) -> Result<f64> {
    check_base(z, w)?;
    Ok(metric_g_unchecked(z, w))
}

/// Same as [`metric_g`] without the base-point check; for inner loops
/// where all vectors are known to share a base.
pub fn metric_g_unchecked(z: &TangentVector, w: &TangentVector) -> f64 {
    let aa = z.alpha.dot(w.alpha) + z.beta.dot(w.beta);
    let ab = z.alpha.dot(w.beta) + z.beta.dot(w.alpha);
    (4.0 * aa - 2.0 * ab) / 3.0
}

pub fn norm_g(z: &TangentVector) -> f64 {
    metric_g_unchecked(z, z).max(0.0).sqrt()
}

/// The ambient Euclidean inner product ⟨α₁,α₂⟩ + ⟨β₁,β₂⟩.
pub fn euclid_inner(z: &TangentVector, w: &TangentVector) -> Result<f64> {
    check_base(z, w)?;
    Ok(z.alpha.dot(w.alpha) + z.beta.dot(w.beta))
}

/// The fundamental tensor G(X, Y) = (∇̃_X J)Y in quaternion coordinates.
pub fn tensor_g(x: &TangentVector, y: &TangentVector) -> Result<TangentVector> {
    check_base(x, y)?;
    Ok(tensor_g_unchecked(x, y))
}

pub fn tensor_g_unchecked(x: &TangentVector, y: &TangentVector) -> TangentVector {
    let (a, b) = (x.alpha, x.beta);
    let (c, d) = (y.alpha, y.beta);
    let s = 2.0 / (3.0 * SQRT3);
    let alpha = (b.cross(c) + a.cross(d) + a.cross(c) - b.cross(d).scale(2.0)).scale(s);
    let beta = (-(a.cross(d)) - b.cross(c) + a.cross(c).scale(2.0) - b.cross(d)).scale(s);
    TangentVector::new(x.base, alpha, beta)
}

/// Curvature tensor of the nearly Kähler connection, in closed form.
pub fn curvature_r(
    x: &TangentVector,
    y: &TangentVector,
    z: &TangentVector,
) -> Result<TangentVector> {
    check_base(x, y)?;
    check_base(x, z)?;
    let g = metric_g_unchecked;
    let (jx, jy, jz) = (apply_j(x), apply_j(y), apply_j(z));
    let (px, py) = (apply_p(x), apply_p(y));
    let (jpx, jpy) = (apply_j(&px), apply_j(&py));

    let t1 = (x.scale(g(y, z)) - y.scale(g(x, z))).scale(5.0 / 12.0);
    let t2 = (jx.scale(g(&jy, z)) - jy.scale(g(&jx, z)) - jz.scale(2.0 * g(&jx, y)))
        .scale(1.0 / 12.0);
    let t3 = (px.scale(g(&py, z)) - py.scale(g(&px, z)) + jpx.scale(g(&jpy, z))
        - jpy.scale(g(&jpx, z)))
    .scale(1.0 / 3.0);
    Ok(t1 + t2 + t3)
}

/// Convert a Euclidean covariant derivative (already projected to the
/// tangent space of S³×S³) into the nearly Kähler one:
/// ∇̃_X Y = ∇ᴱ_X Y − ½(JG(X, PY) + JG(Y, PX)).
pub fn euclid_to_nk(
    value_e: &TangentVector,
    x: &TangentVector,
    y: &TangentVector,
) -> Result<TangentVector> {
    check_base(value_e, x)?;
    check_base(x, y)?;
    let c1 = apply_j(&tensor_g_unchecked(x, &apply_p(y)));
    let c2 = apply_j(&tensor_g_unchecked(y, &apply_p(x)));
    Ok(*value_e - (c1 + c2).scale(0.5))
}

/// Split Z into its two factor projections ((pα, 0), (0, qβ)) computed
/// via ½(Z ∓ QZ).
pub fn product_projections(z: &TangentVector) -> (AmbientVector, AmbientVector) {
    let qz = apply_q(z);
    let first = (*z - qz).scale(0.5).ambient();
    let second = (*z + qz).scale(0.5).ambient();
    (
        AmbientVector { u: first.u, v: Quaternion::ZERO },
        AmbientVector { u: Quaternion::ZERO, v: second.v },
    )
}

/// The isometries of S³×S³ used to move submanifolds around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Isometry {
    /// (p, q) ↦ (a p c̄, b q c̄); preserves g, J and P.
    Fabc { a: Quaternion, b: Quaternion, c: Quaternion },
    /// Factor swap (p, q) ↦ (q, p).
    F1,
    /// (p, q) ↦ (p̄, q p̄).
    F2,
}

impl Isometry {
    pub fn fabc(a: Quaternion, b: Quaternion, c: Quaternion) -> Result<Self> {
        for u in [a, b, c] {
            let n = u.norm();
            if (n - 1.0).abs() > EPS_POINT {
                return Err(CoreError::NonUnitParameter(n));
            }
        }
        Ok(Self::Fabc { a, b, c })
    }

    pub fn apply_point(&self, pt: &SurfacePoint) -> SurfacePoint {
        let (p, q) = (pt.p(), pt.q());
        let (np, nq) = match self {
            Self::Fabc { a, b, c } => (*a * p * c.conj(), *b * q * c.conj()),
            Self::F1 => (q, p),
            Self::F2 => (p.conj(), q * p.conj()),
        };
        SurfacePoint { p: np, q: nq }
    }

    /// Pushforward on tangent vectors, in (α, β) coordinates.
    pub fn apply_tangent(&self, z: &TangentVector) -> TangentVector {
        let base = self.apply_point(&z.base);
        let (alpha, beta) = match self {
            // d/ds (a p exp(sα) c̄) gives α ↦ c α c̄ on both factors.
            Self::Fabc { c, .. } => (z.alpha.conjugate_by(*c), z.beta.conjugate_by(*c)),
            Self::F1 => (z.beta, z.alpha),
            // Chain rule of (p, q) ↦ (p̄, q p̄).
            Self::F2 => {
                let p = z.base.p();
                (
                    (-z.alpha).conjugate_by(p),
                    (z.beta - z.alpha).conjugate_by(p),
                )
            }
        };
        TangentVector::new(base, alpha, beta)
    }
}

/// Point of the curve s ↦ (p·exp(sα), q·exp(sβ)); its velocity at s = 0
/// is the tangent vector (pα, qβ).
pub fn flow_point(
    base: &SurfacePoint,
    alpha: ImaginaryQuaternion,
    beta: ImaginaryQuaternion,
    s: f64,
) -> SurfacePoint {
    SurfacePoint {
        p: base.p() * alpha.scale(s).exp(),
        q: base.q() * beta.scale(s).exp(),
    }
}

/// Extend constant (γ, δ) coordinates to a field along the flow; such a
/// field is smooth and equals Y at s = 0.
pub fn left_invariant_field(
    y: &TangentVector,
) -> impl Fn(&SurfacePoint) -> TangentVector + Copy + '_ {
    move |pt| TangentVector::new(*pt, y.alpha, y.beta)
}

/// Finite-difference step for first derivatives.
pub const FD_H1: f64 = 1e-5;

/// ∇̃_X (field) by Richardson-extrapolated central differences of the
/// ambient representation along the flow curve of X, projected back to
/// the tangent space and converted through [`euclid_to_nk`].
pub fn nk_derivative_along<F>(x: &TangentVector, field: F, h: f64) -> Result<TangentVector>
where
    F: Fn(&SurfacePoint) -> TangentVector,
{
    let diff = |step: f64| -> AmbientVector {
        let plus = field(&flow_point(&x.base, x.alpha, x.beta, step)).ambient();
        let minus = field(&flow_point(&x.base, x.alpha, x.beta, -step)).ambient();
        AmbientVector {
            u: (plus.u - minus.u).scale(0.5 / step),
            v: (plus.v - minus.v).scale(0.5 / step),
        }
    };
    let d1 = diff(h);
    let d2 = diff(0.5 * h);
    // One Richardson level on the O(h²) central scheme.
    let amb = AmbientVector {
        u: d2.u.scale(4.0 / 3.0) - d1.u.scale(1.0 / 3.0),
        v: d2.v.scale(4.0 / 3.0) - d1.v.scale(1.0 / 3.0),
    };
    let value_e = TangentVector::from_ambient_projected(x.base, amb);
    let y0 = field(&x.base);
    euclid_to_nk(&value_e, x, &y0)
}

/// (∇̃_X J)Y computed numerically from a smooth extension of Y.
pub fn numeric_nabla_j<F>(x: &TangentVector, field: F, h: f64) -> Result<TangentVector>
where
    F: Fn(&SurfacePoint) -> TangentVector + Copy,
{
    let j_field = move |pt: &SurfacePoint| apply_j(&field(pt));
    let d_jy = nk_derivative_along(x, j_field, h)?;
    let dy = nk_derivative_along(x, field, h)?;
    Ok(d_jy - apply_j(&dy))
}

/// (∇̃_X P)Y computed numerically from a smooth extension of Y.
pub fn numeric_nabla_p<F>(x: &TangentVector, field: F, h: f64) -> Result<TangentVector>
where
    F: Fn(&SurfacePoint) -> TangentVector + Copy,
{
    let p_field = move |pt: &SurfacePoint| apply_p(&field(pt));
    let d_py = nk_derivative_along(x, p_field, h)?;
    let dy = nk_derivative_along(x, field, h)?;
    Ok(d_py - apply_p(&dy))
}
