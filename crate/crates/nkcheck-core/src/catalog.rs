//! Executable immersion charts for every CR class, the A(t) profile
//! ODE, and chart-level application of the ambient isometries.

use std::sync::Arc;

use num_complex::Complex64;

use crate::frame::PClass;
use crate::nkcore::{Isometry, SurfacePoint, SQRT3};
use crate::quat::{ImaginaryQuaternion, Quaternion};
use crate::{CoreError, Result};

/// Phase profile f(t) in the A(t) ODE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    Linear,
    Sine,
}

impl Profile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Linear => t,
            Profile::Sine => t.sin(),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Profile::Zero => "zero",
            Profile::Linear => "linear",
            Profile::Sine => "sine",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "zero" => Ok(Profile::Zero),
            "linear" => Ok(Profile::Linear),
            "sine" => Ok(Profile::Sine),
            other => Err(CoreError::InvalidConfig(format!("unknown profile: {other}"))),
        }
    }
}

/// Default ODE step.
pub const ODE_STEP: f64 = 1e-3;

/// Integrated path of (a₁(t), a₂(t)).
#[derive(Debug, Clone)]
pub struct ProfilePath {
    pub profile: Profile,
    pub t0: f64,
    pub step: f64,
    /// Samples at t0 + k·step (step is signed only within integration;
    /// stored ascending).
    pub a1: Vec<Complex64>,
    pub a2: Vec<Complex64>,
    /// Largest single-step norm drift seen before renormalization.
    pub max_drift: f64,
}

fn ode_rhs(profile: Profile, t: f64, a1: Complex64, a2: Complex64) -> (Complex64, Complex64) {
    let f = profile.eval(t);
    let e_m = Complex64::new(0.0, -f).exp();
    let e_p = Complex64::new(0.0, f).exp();
    let c = SQRT3 / 2.0;
    (-a2 * e_m * c, a1 * e_p * c)
}

fn rk4_step(
    profile: Profile,
    t: f64,
    h: f64,
    a1: Complex64,
    a2: Complex64,
) -> (Complex64, Complex64) {
    let (k1a, k1b) = ode_rhs(profile, t, a1, a2);
    let (k2a, k2b) = ode_rhs(profile, t + 0.5 * h, a1 + k1a * (0.5 * h), a2 + k1b * (0.5 * h));
    let (k3a, k3b) = ode_rhs(profile, t + 0.5 * h, a1 + k2a * (0.5 * h), a2 + k2b * (0.5 * h));
    let (k4a, k4b) = ode_rhs(profile, t + h, a1 + k3a * h, a2 + k3b * h);
    (
        a1 + (k1a + (k2a + k3a) * 2.0 + k4a) * (h / 6.0),
        a2 + (k1b + (k2b + k3b) * 2.0 + k4b) * (h / 6.0),
    )
}

/// Classical RK4 over [t_range.0, t_range.1] with per-step
/// renormalization of the unit-norm first integral.
pub fn integrate_a(
    profile: Profile,
    a0: (Complex64, Complex64),
    t_range: (f64, f64),
    step: f64,
) -> Result<ProfilePath> {
    let n0 = (a0.0.norm_sqr() + a0.1.norm_sqr()).sqrt();
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(CoreError::InvalidInitialNorm(n0));
    }
    if !(step > 0.0) || t_range.1 <= t_range.0 {
        return Err(CoreError::InvalidConfig(
            "integration range must be increasing with positive step".into(),
        ));
    }
    if t_range.0 > 0.0 || t_range.1 < 0.0 {
        // Initial conditions are posed at t = 0.
        return Err(CoreError::ProfileDomainMismatch);
    }
    let n_neg = (-t_range.0 / step).ceil() as usize;
    let n_pos = (t_range.1 / step).ceil() as usize;
    let total = n_neg + n_pos + 1;
    let mut a1 = vec![Complex64::default(); total];
    let mut a2 = vec![Complex64::default(); total];
    a1[n_neg] = a0.0;
    a2[n_neg] = a0.1;
    let mut max_drift = 0.0f64;
    let mut advance = |idx_from: usize, idx_to: usize, h: f64, a1: &mut Vec<Complex64>, a2: &mut Vec<Complex64>| {
        let t = (idx_from as f64 - n_neg as f64) * step;
        let (mut x, mut y) = rk4_step(profile, t, h, a1[idx_from], a2[idx_from]);
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        max_drift = max_drift.max((n - 1.0).abs());
        x /= n;
        y /= n;
        a1[idx_to] = x;
        a2[idx_to] = y;
    };
    for k in 0..n_pos {
        advance(n_neg + k, n_neg + k + 1, step, &mut a1, &mut a2);
    }
    for k in 0..n_neg {
        advance(n_neg - k, n_neg - k - 1, -step, &mut a1, &mut a2);
    }
    Ok(ProfilePath {
        profile,
        t0: -(n_neg as f64) * step,
        step,
        a1,
        a2,
        max_drift,
    })
}

impl ProfilePath {
    pub fn t_max(&self) -> f64 {
        self.t0 + self.step * (self.a1.len() - 1) as f64
    }

    /// (a₁(t), a₂(t)) at an arbitrary in-range t: the cached grid value
    /// at the nearest node below, plus one short RK4 step.
    pub fn at(&self, t: f64) -> Result<(Complex64, Complex64)> {
        let pos = (t - self.t0) / self.step;
        if pos < -1e-9 || pos > (self.a1.len() - 1) as f64 + 1e-9 {
            return Err(CoreError::ProfileDomainMismatch);
        }
        let k = (pos.floor().max(0.0) as usize).min(self.a1.len() - 1);
        let rem = t - (self.t0 + k as f64 * self.step);
        if rem.abs() < 1e-14 {
            return Ok((self.a1[k], self.a2[k]));
        }
        let tk = self.t0 + k as f64 * self.step;
        Ok(rk4_step(self.profile, tk, rem, self.a1[k], self.a2[k]))
    }

    /// A(t) = a₁(t) + a₂(t)·j as a quaternion.
    pub fn a_quat(&self, t: f64) -> Result<Quaternion> {
        let (a1, a2) = self.at(t)?;
        Ok(Quaternion::new(a1.re, a1.im, a2.re, a2.im))
    }
}

/// Which member of a three-chart family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    F1,
    F2,
    F3,
}

/// Expected geometric data attached to a chart for verification.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartMetadata {
    pub expected_class: PClass,
    pub expected_theta: Option<f64>,
    /// Expected (a₃, a₄) for the charts with θ = π/2 and a₁ = a₂ = 0.
    pub expected_a34: Option<(f64, f64)>,
    /// Expected (ω₁, ω₂, ω₃) for the θ = 0 charts.
    pub expected_omega: Option<[f64; 3]>,
    /// Expected |g([E₁,E₂], E₃)|.
    pub expected_defect_abs: Option<f64>,
}

/// A local parametrization (x₁,x₂,x₃) ↦ S³×S³ with verification
/// metadata. Evaluation is pure; charts can be freely cloned and
/// shared across threads.
#[derive(Clone)]
pub struct ImmersionChart {
    pub name: String,
    /// Closed parameter box [lo, hi] per coordinate.
    pub domain: [[f64; 2]; 3],
    eval: Arc<dyn Fn(f64, f64, f64) -> SurfacePoint + Send + Sync>,
    pub metadata: ChartMetadata,
}

impl std::fmt::Debug for ImmersionChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImmersionChart")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("metadata", &self.metadata)
            .finish_non_exhaustive()
    }
}

impl ImmersionChart {
    pub fn eval(&self, u: f64, v: f64, t: f64) -> SurfacePoint {
        (self.eval)(u, v, t)
    }

    pub fn contains(&self, params: [f64; 3], margin: f64) -> bool {
        params
            .iter()
            .zip(self.domain.iter())
            .all(|(x, [lo, hi])| *x >= lo + margin && *x <= hi - margin)
    }
}

fn exp_i_phase(phi: f64) -> Quaternion {
    Quaternion::new(phi.cos(), phi.sin(), 0.0, 0.0)
}

fn surface(p: Quaternion, q: Quaternion) -> SurfacePoint {
    SurfacePoint::new(p, q).expect("chart formulas produce unit factors")
}

const BOX_07: [[f64; 2]; 3] = [[-0.7, 0.7], [-0.7, 0.7], [-0.7, 0.7]];

/// Charts with P𝒟₁ = 𝒟₁: a circle factor times the A(t) tube.
pub fn chart_family_d1(which: Family, profile: Profile, a0: (Complex64, Complex64)) -> Result<ImmersionChart> {
    // Integrate slightly past the parameter box so finite-difference
    // stencils at the boundary stay in range.
    let path = Arc::new(integrate_a(profile, a0, (-0.8, 0.8), ODE_STEP)?);
    // The families correspond to the three branches ω₁+iω₂ = −e^{2iφ}
    // with φ = −π/6, π/6, π/2.
    let omega = match which {
        Family::F1 => [-0.5, 0.5 * SQRT3, 0.0],
        Family::F2 => [-0.5, -0.5 * SQRT3, 0.0],
        Family::F3 => [1.0, 0.0, 0.0],
    };
    let metadata = ChartMetadata {
        expected_class: PClass::D1EqualsD1,
        expected_theta: Some(0.0),
        expected_a34: None,
        expected_omega: Some(omega),
        expected_defect_abs: Some(0.0),
    };
    let name = match which {
        Family::F1 => "thm42.f1",
        Family::F2 => "thm42.f2",
        Family::F3 => "thm42.f3",
    };
    let eval: Arc<dyn Fn(f64, f64, f64) -> SurfacePoint + Send + Sync> = match which {
        Family::F1 => {
            let path = path.clone();
            Arc::new(move |u, v, t| {
                let p = exp_i_phase(SQRT3 / 2.0 * u + 0.5 * v);
                let a = path.a_quat(t).expect("t inside integrated range");
                let q = a * exp_i_phase(SQRT3 / 2.0 * u - 0.5 * v);
                surface(p, q)
            })
        }
        Family::F2 => {
            let path = path.clone();
            Arc::new(move |u, v, t| {
                let a = path.a_quat(t).expect("t inside integrated range");
                let p = a * exp_i_phase(SQRT3 / 2.0 * u - 0.5 * v);
                let q = exp_i_phase(SQRT3 / 2.0 * u + 0.5 * v);
                surface(p, q)
            })
        }
        Family::F3 => {
            let path = path.clone();
            Arc::new(move |u, v, t| {
                let a_bar = path.a_quat(t).expect("t inside integrated range").conj();
                let p = exp_i_phase(v) * a_bar;
                let q = exp_i_phase(-(SQRT3 / 2.0 * u - 0.5 * v)) * a_bar;
                surface(p, q)
            })
        }
    };
    Ok(ImmersionChart {
        name: name.into(),
        domain: BOX_07,
        eval,
        metadata,
    })
}

/// The chart with P𝒟₁ = 𝒟₂, parametrized by two coefficient
/// quaternions of norm ½.
pub fn chart_d1_to_d2(a: Quaternion, e: Quaternion) -> Result<ImmersionChart> {
    for c in [a, e] {
        let n = c.norm();
        if (n - 0.5).abs() > 1e-12 {
            return Err(CoreError::WrongCoefficientNorm(n));
        }
    }
    let s32 = (1.5f64).sqrt();
    let is2 = 1.0 / (2.0f64).sqrt();
    let is6 = 1.0 / (6.0f64).sqrt();
    let s23 = (2.0f64 / 3.0).sqrt();
    let eval = move |u: f64, v: f64, t: f64| {
        let phi1 = s32 * u - is2 * v;
        let psi1 = s23 * t + is6 * u + is2 * v;
        let p = a * Quaternion::new(
            phi1.cos(),
            phi1.sin(),
            SQRT3 * psi1.sin(),
            SQRT3 * psi1.cos(),
        );
        let phi2 = s32 * u + is2 * v;
        let psi2 = s23 * t + is6 * u - is2 * v;
        let q = e * Quaternion::new(
            phi2.cos(),
            phi2.sin(),
            -SQRT3 * psi2.sin(),
            -SQRT3 * psi2.cos(),
        );
        surface(p, q)
    };
    Ok(ImmersionChart {
        name: "thm52".into(),
        domain: BOX_07,
        eval: Arc::new(eval),
        metadata: ChartMetadata {
            expected_class: PClass::D1PerpSubcaseD2,
            expected_theta: Some(std::f64::consts::FRAC_PI_2),
            expected_a34: Some((0.0, 0.0)),
            expected_omega: None,
            expected_defect_abs: Some(0.0),
        },
    })
}

/// Exponential coordinates on S³ around 1.
fn exp_coord(x1: f64, x2: f64, x3: f64) -> Quaternion {
    ImaginaryQuaternion::new(x1, x2, x3).exp()
}

/// Charts with P𝒟₁ = 𝒟₃: conjugation orbits of (√3+i)/2.
pub fn chart_family_d3(which: Family) -> ImmersionChart {
    let c = Quaternion::new(SQRT3 / 2.0, 0.5, 0.0, 0.0);
    // Branch values of the angle parameter per family; the nonzero
    // integrability defect has magnitude 2/√3 at each of them.
    let (name, a34) = match which {
        Family::F1 => ("cor.f1", {
            let t = std::f64::consts::FRAC_PI_3;
            (t.cos(), t.sin())
        }),
        Family::F2 => ("cor.f2", {
            let t = 2.0 * std::f64::consts::FRAC_PI_3;
            (t.cos(), t.sin())
        }),
        Family::F3 => ("cor.f3", (1.0, 0.0)),
    };
    let eval: Arc<dyn Fn(f64, f64, f64) -> SurfacePoint + Send + Sync> = match which {
        Family::F1 => Arc::new(move |x1, x2, x3| {
            let u = exp_coord(x1, x2, x3);
            surface(u * c * u.conj(), u.conj())
        }),
        // The factor swap reverses the induced orientation of the
        // tangent frame; the third coordinate is negated so that the
        // extracted (a₃, a₄) land on the branch value 2π/3 rather than
        // its antipode.
        Family::F2 => Arc::new(move |x1, x2, x3| {
            let u = exp_coord(x1, x2, -x3);
            surface(u.conj(), u * c * u.conj())
        }),
        // Same orientation fix as cor.f2: this family's branch value is
        // t = 0, reached with the reflected third coordinate.
        Family::F3 => Arc::new(move |x1, x2, x3| {
            let u = exp_coord(x1, x2, -x3);
            surface(u, u * c)
        }),
    };
    ImmersionChart {
        name: name.into(),
        domain: [[-0.6, 0.6], [-0.6, 0.6], [-0.6, 0.6]],
        eval,
        metadata: ChartMetadata {
            expected_class: PClass::D1PerpSubcaseD3,
            expected_theta: Some(std::f64::consts::FRAC_PI_2),
            expected_a34: Some(a34),
            expected_omega: None,
            expected_defect_abs: Some(2.0 / SQRT3),
        },
    }
}

/// Compose a chart with an ambient isometry. Classification and the
/// contact angle are preserved; component expectations that are not
/// isometry-invariant are kept only for the structure-preserving
/// two-point rotations.
pub fn transform_chart(chart: &ImmersionChart, isometry: Isometry) -> ImmersionChart {
    let inner = chart.eval.clone();
    let eval = move |u: f64, v: f64, t: f64| isometry.apply_point(&inner(u, v, t));
    let keep_all = matches!(isometry, Isometry::Fabc { .. });
    let metadata = ChartMetadata {
        expected_class: chart.metadata.expected_class,
        expected_theta: chart.metadata.expected_theta,
        expected_a34: if keep_all { chart.metadata.expected_a34 } else { None },
        expected_omega: if keep_all { chart.metadata.expected_omega } else { None },
        expected_defect_abs: chart.metadata.expected_defect_abs,
    };
    ImmersionChart {
        name: format!("{}+{}", chart.name, isometry_tag(&isometry)),
        domain: chart.domain,
        eval: Arc::new(eval),
        metadata,
    }
}

fn isometry_tag(isometry: &Isometry) -> &'static str {
    match isometry {
        Isometry::Fabc { .. } => "Fabc",
        Isometry::F1 => "F1",
        Isometry::F2 => "F2",
    }
}

/// Ids of the default chart registry.
pub const CHART_IDS: [&str; 7] = [
    "thm42.f1", "thm42.f2", "thm42.f3", "thm52", "cor.f1", "cor.f2", "cor.f3",
];

/// Build a default-configuration chart by id.
pub fn get_chart(id: &str) -> Result<ImmersionChart> {
    let a0 = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    match id {
        "thm42.f1" => chart_family_d1(Family::F1, Profile::Zero, a0),
        "thm42.f2" => chart_family_d1(Family::F2, Profile::Zero, a0),
        "thm42.f3" => chart_family_d1(Family::F3, Profile::Zero, a0),
        "thm52" => chart_d1_to_d2(
            Quaternion::new(0.5, 0.0, 0.0, 0.0),
            Quaternion::new(0.5, 0.0, 0.0, 0.0),
        ),
        "cor.f1" => Ok(chart_family_d3(Family::F1)),
        "cor.f2" => Ok(chart_family_d3(Family::F2)),
        "cor.f3" => Ok(chart_family_d3(Family::F3)),
        other => Err(CoreError::UnknownChart(other.into())),
    }
}
