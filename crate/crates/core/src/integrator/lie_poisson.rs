use crate::error::Result;
use crate::fixed_point::{FixedPointConfig, Tracker};
use crate::linalg::{asym, polar_decompose, polar_project, sylvester_rot, Mat, RotMat, SkewMat};
use crate::systems::ReducedHamiltonian;
use crate::tableau::ButcherTableau;
use crate::tangent::{apply_psi_star, apply_varphi_star, chain_solve_from, StageGeometry};

use super::{check_step_inputs, ReducedState, StageCache};

/// One reduced step `μ₀ ↦ μ₁` for an `SO(n)`-invariant Hamiltonian.
///
/// The unknowns are the stage momenta, `V_i = Θ_iᵀ`, `f₀ = g₀ᵀg₁` and the
/// multiplier. With `g₀ = I` the iterates coincide with those of
/// [`super::vpd_step`] through `g₁ = f₀` and `U_i = f₀ V_i`.
pub fn lie_poisson_step<H: ReducedHamiltonian + ?Sized>(
    sys: &H,
    tableau: &ButcherTableau,
    h: f64,
    state: &ReducedState,
    cfg: &FixedPointConfig,
) -> Result<(ReducedState, StageCache)> {
    let n = state.mu.dim();
    check_step_inputs(tableau, h, n, &state.mu, cfg)?;
    let s = tableau.stages();
    let (a, b) = (&tableau.a, &tableau.b);
    let mu0 = &state.mu;

    let mut mus = vec![mu0.clone(); s];
    let mut vs = vec![RotMat::identity(n); s];
    let mut f0 = RotMat::identity(n);
    let mut lambda = mu0.scale(-0.5);
    let mut warm: Option<Vec<SkewMat>> = None;
    let mut chain_iterations = 0;
    let mut tracker = Tracker::new("Lie-Poisson step", *cfg);

    let p_factors = loop {
        let omegas = stage_velocities(sys, &mus)?;
        let mut change = 0.0_f64;

        let mut p_factors = Vec::with_capacity(s);
        for i in 0..s {
            let mut a_i = f0.transpose().into_mat();
            for j in 0..s {
                if a[i][j] != 0.0 {
                    a_i.axpy(h * a[i][j], &(&*vs[j] * &*omegas[j]));
                }
            }
            let f = polar_decompose(&a_i)?;
            change = change.max((&*f.u - &*vs[i]).spectral_norm());
            vs[i] = f.u;
            p_factors.push(f.p);
        }

        let mut y = Mat::identity(n);
        y.axpy(h, &(&*f0 * &weighted_sum(&vs, &omegas, b)));
        let next_f0 = polar_project(&y)?;
        change = change.max((&*next_f0 - &*f0).spectral_norm());
        f0 = next_f0;

        let thetas: Vec<RotMat> = vs.iter().map(RotMat::transpose).collect();
        let geom = StageGeometry::reduced(&f0, &thetas, p_factors.clone(), omegas.clone(), a, h)?;
        let rhs: Vec<SkewMat> = (0..s)
            .map(|i| asym(&vs[i].t_mul(&lambda).mul_t(&omegas[i])).scale(-b[i]))
            .collect();
        let sol = chain_solve_from(&geom, &rhs, warm.as_deref(), cfg)?;
        chain_iterations += sol.iterations;

        let r = &apply_varphi_star(&geom, &sol).scale(h) - mu0;
        let next_lambda = sylvester_rot(&f0, &r)?;
        change = change.max((&next_lambda - &lambda).norm());
        lambda = next_lambda;

        for k in 0..s {
            let mut next = apply_psi_star(&geom, &sol, k).scale(h / b[k]);
            next.axpy(-1.0, &asym(&vs[k].t_mul(&lambda)));
            change = change.max((&next - &mus[k]).norm());
            mus[k] = next;
        }
        warm = Some(sol.stages);

        if tracker.record(change)? {
            break p_factors;
        }
    };

    let omegas = stage_velocities(sys, &mus)?;
    let mut x = f0.transpose().into_mat();
    x.axpy(h, &weighted_sum(&vs, &omegas, b));
    let mu1 = asym(&x.mul_t(&lambda));
    let cache = StageCache {
        mus,
        omegas,
        stage_rots: vs,
        p_factors,
        lambda,
        end_rot: f0,
        iterations: tracker.iterations(),
        chain_iterations,
    };
    Ok((ReducedState { mu: mu1 }, cache))
}

fn stage_velocities<H: ReducedHamiltonian + ?Sized>(
    sys: &H,
    mus: &[SkewMat],
) -> Result<Vec<SkewMat>> {
    mus.iter().map(|mu| sys.d_mu(mu)).collect()
}

/// `Σ b_i V_i Ω_i`.
fn weighted_sum(vs: &[RotMat], omegas: &[SkewMat], b: &[f64]) -> Mat {
    let mut sum = Mat::zeros(vs[0].dim());
    for ((v, om), &bi) in vs.iter().zip(omegas).zip(b) {
        sum.axpy(bi, &(&**v * &**om));
    }
    sum
}

/// [`lie_poisson_step`] with fixed system, tableau and step size.
pub struct LiePoissonStepper<'a, H: ?Sized> {
    pub system: &'a H,
    pub tableau: ButcherTableau,
    pub h: f64,
    pub cfg: FixedPointConfig,
}

impl<H: ReducedHamiltonian + ?Sized> super::Stepper for LiePoissonStepper<'_, H> {
    type State = ReducedState;

    fn step(&self, state: &ReducedState) -> Result<(ReducedState, StageCache)> {
        lie_poisson_step(self.system, &self.tableau, self.h, state, &self.cfg)
    }
}
