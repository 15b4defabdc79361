//! Mechanical systems in left-trivialized Hamiltonian form.
//!
//! Momenta live in `sk(n)` throughout; for `n = 3` the hat map turns the
//! `sk(3)` inner product into the Euclidean dot product, so formulas stated
//! for ℝ³ vectors carry over unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::CotangentState;
use crate::linalg::{asym, hat, vee, Mat, RotMat, SkewMat, SpdMat};

/// A Hamiltonian `H(g, μ)` on `SO(n) × sk(n)*` with left-trivialized partials.
pub trait LeftTrivHamiltonian {
    fn dim(&self) -> usize;
    fn energy(&self, g: &RotMat, mu: &SkewMat) -> Result<f64>;
    /// `∂H/∂g = asym(gᵀ ∇_g H)`.
    fn d_g(&self, g: &RotMat, mu: &SkewMat) -> Result<SkewMat>;
    fn d_mu(&self, g: &RotMat, mu: &SkewMat) -> Result<SkewMat>;
}

/// A reduced Hamiltonian `h(μ)` on `sk(n)*`.
pub trait ReducedHamiltonian {
    fn dim(&self) -> usize;
    fn energy(&self, mu: &SkewMat) -> Result<f64>;
    fn d_mu(&self, mu: &SkewMat) -> Result<SkewMat>;
}

/// The `SO(n)`-invariant Hamiltonian `H(g, μ) = h(μ)` on the full cotangent bundle.
#[derive(Clone, Debug)]
pub struct Invariant<R>(pub R);

impl<R: ReducedHamiltonian> LeftTrivHamiltonian for Invariant<R> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn energy(&self, _g: &RotMat, mu: &SkewMat) -> Result<f64> {
        self.0.energy(mu)
    }

    fn d_g(&self, _g: &RotMat, mu: &SkewMat) -> Result<SkewMat> {
        Ok(SkewMat::zeros(mu.dim()))
    }

    fn d_mu(&self, _g: &RotMat, mu: &SkewMat) -> Result<SkewMat> {
        self.0.d_mu(mu)
    }
}

/// Free rigid body `h(μ) = ½ vee(μ)ᵀ J⁻¹ vee(μ)`.
#[derive(Clone, Debug)]
pub struct RigidBody {
    inertia: SpdMat,
    inverse: Mat,
}

impl RigidBody {
    pub fn new(inertia: SpdMat) -> Result<Self> {
        if inertia.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: inertia.dim(),
            });
        }
        let inverse = inertia.inverse()?;
        Ok(Self { inertia, inverse })
    }

    pub fn principal(moments: [f64; 3]) -> Result<Self> {
        Self::new(SpdMat::new(Mat::diag(&moments))?)
    }

    pub fn inertia(&self) -> &SpdMat {
        &self.inertia
    }

    /// Body angular velocity `J⁻¹ vee(μ)`.
    pub fn angular_velocity(&self, mu: &SkewMat) -> Result<[f64; 3]> {
        let w = self.inverse.mul_vec(&vee(mu)?);
        Ok([w[0], w[1], w[2]])
    }
}

/// The free rigid body as a reduced Hamiltonian.
pub fn rigid_body_reduced(inertia: &SpdMat) -> Result<RigidBody> {
    RigidBody::new(inertia.clone())
}

impl ReducedHamiltonian for RigidBody {
    fn dim(&self) -> usize {
        3
    }

    fn energy(&self, mu: &SkewMat) -> Result<f64> {
        let m = vee(mu)?;
        let w = self.angular_velocity(mu)?;
        Ok(0.5 * dot(&m, &w))
    }

    fn d_mu(&self, mu: &SkewMat) -> Result<SkewMat> {
        Ok(hat(self.angular_velocity(mu)?))
    }
}

/// Constants of the dipole-on-a-stick benchmark.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DipoleParams {
    /// Mass; scales both the inertia and the gravity term.
    pub mass: f64,
    /// Half-length of the dipole and thickness of the stick.
    pub alpha: f64,
    pub charge: f64,
    pub beta: f64,
    /// Position of the fixed external charge.
    pub z: [f64; 3],
}

impl Default for DipoleParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            alpha: 0.1,
            charge: 1.0,
            beta: 1.0,
            z: [0.0, 0.0, -1.5],
        }
    }
}

impl DipoleParams {
    /// Reference position of the positive charge, `(0, α, −1)`.
    pub fn y_plus(&self) -> [f64; 3] {
        [0.0, self.alpha, -1.0]
    }

    pub fn y_minus(&self) -> [f64; 3] {
        [0.0, -self.alpha, -1.0]
    }

    /// Principal moments of `J = m · diag(1 + α², 1, α²)`.
    pub fn inertia(&self) -> [f64; 3] {
        let a2 = self.alpha * self.alpha;
        [self.mass * (1.0 + a2), self.mass, self.mass * a2]
    }
}

/// Distance below which a charge is considered to sit on the external pole.
pub const POLE_THRESHOLD: f64 = 1e-9;

/// `U(g) = m e₃ᵀ g e₃ + qβ (‖g y₊ − z‖⁻¹ − ‖g y₋ − z‖⁻¹)`.
pub fn dipole_potential(g: &RotMat, params: &DipoleParams) -> Result<f64> {
    check_dim3(g.dim())?;
    let gravity = params.mass * g[(2, 2)];
    let plus = charge_offset(g, &params.y_plus(), &params.z)?;
    let minus = charge_offset(g, &params.y_minus(), &params.z)?;
    Ok(gravity + params.charge * params.beta * (1.0 / norm(&plus) - 1.0 / norm(&minus)))
}

/// `H^L(g, μ) = ½ p̃ᵀ J⁻¹ p̃ + U(g)` with `p̃ = vee(μ)`.
pub fn dipole_energy(g: &RotMat, mu: &SkewMat, params: &DipoleParams) -> Result<f64> {
    let p = vee(mu)?;
    let j = params.inertia();
    let kinetic = 0.5 * (0..3).map(|k| p[k] * p[k] / j[k]).sum::<f64>();
    Ok(kinetic + dipole_potential(g, params)?)
}

/// `H^R(g, p) = ½ pᵀ g J⁻¹ gᵀ p + U(g)` for a right-trivialized momentum `p`.
pub fn dipole_energy_right(g: &RotMat, p: [f64; 3], params: &DipoleParams) -> Result<f64> {
    check_dim3(g.dim())?;
    let body = g.transpose().mul_vec(&p);
    let j = params.inertia();
    let kinetic = 0.5 * (0..3).map(|k| body[k] * body[k] / j[k]).sum::<f64>();
    Ok(kinetic + dipole_potential(g, params)?)
}

/// `∂H/∂g = asym(gᵀ ∇_g U)`, with
/// `∇_g(e₃ᵀ g e₃) = e₃ e₃ᵀ` and `∇_g ‖g y − z‖⁻¹ = −(g y − z) yᵀ / ‖g y − z‖³`.
pub fn dipole_d_g(g: &RotMat, _mu: &SkewMat, params: &DipoleParams) -> Result<SkewMat> {
    check_dim3(g.dim())?;
    let mut grad = Mat::zeros(3);
    grad[(2, 2)] = params.mass;
    let qb = params.charge * params.beta;
    for (y, sign) in [(params.y_plus(), 1.0), (params.y_minus(), -1.0)] {
        let d = charge_offset(g, &y, &params.z)?;
        let r = norm(&d);
        let coeff = -sign * qb / (r * r * r);
        for i in 0..3 {
            for j in 0..3 {
                grad[(i, j)] += coeff * d[i] * y[j];
            }
        }
    }
    Ok(asym(&g.t_mul(&grad)))
}

/// Initial data `g(0)` with right-trivialized momentum `g(0) J g(0)ᵀ e₂`,
/// converted to the left-trivialized frame.
pub fn dipole_initial_state(params: &DipoleParams) -> CotangentState {
    let g0 = RotMat::new(
        Mat::from_rows([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
            .expect("finite entries"),
    )
    .expect("signed permutation with determinant one");
    let j = Mat::diag(&params.inertia());
    let e2 = [0.0, 1.0, 0.0];
    let p_right = (&*g0 * &j.mul_t(&g0)).mul_vec(&e2);
    let p = crate::integrator::legendre_convert(&g0, [p_right[0], p_right[1], p_right[2]])
        .expect("three-dimensional state");
    CotangentState { g: g0, p }
}

/// The dipole on a stick as a [`LeftTrivHamiltonian`].
#[derive(Clone, Debug, Default)]
pub struct Dipole {
    params: DipoleParams,
}

impl Dipole {
    pub fn new(params: DipoleParams) -> Result<Self> {
        if params.inertia().iter().any(|&j| !(j > 0.0)) {
            return Err(Error::InvalidArgument(
                "dipole inertia must be positive definite (mass > 0, alpha ≠ 0)".into(),
            ));
        }
        Ok(Self { params })
    }

    pub fn params(&self) -> &DipoleParams {
        &self.params
    }

    pub fn initial_state(&self) -> CotangentState {
        dipole_initial_state(&self.params)
    }
}


impl LeftTrivHamiltonian for Dipole {
    fn dim(&self) -> usize {
        3
    }

    fn energy(&self, g: &RotMat, mu: &SkewMat) -> Result<f64> {
        dipole_energy(g, mu, &self.params)
    }

    fn d_g(&self, g: &RotMat, mu: &SkewMat) -> Result<SkewMat> {
        dipole_d_g(g, mu, &self.params)
    }

    fn d_mu(&self, _g: &RotMat, mu: &SkewMat) -> Result<SkewMat> {
        let p = vee(mu)?;
        let j = self.params.inertia();
        Ok(hat([p[0] / j[0], p[1] / j[1], p[2] / j[2]]))
    }
}

fn charge_offset(g: &RotMat, y: &[f64; 3], z: &[f64; 3]) -> Result<[f64; 3]> {
    let gy = g.mul_vec(y);
    let d = [gy[0] - z[0], gy[1] - z[1], gy[2] - z[2]];
    let r = norm(&d);
    if r < POLE_THRESHOLD {
        return Err(Error::PoleSingularity(r));
    }
    Ok(d)
}

fn check_dim3(n: usize) -> Result<()> {
    if n == 3 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: 3,
            found: n,
        })
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
