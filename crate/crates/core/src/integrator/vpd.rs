use crate::error::Result;
use crate::fixed_point::{FixedPointConfig, Tracker};
use crate::linalg::{asym, polar_decompose, polar_project, sylvester_rot, Mat, RotMat, SkewMat};
use crate::systems::LeftTrivHamiltonian;
use crate::tableau::ButcherTableau;
use crate::tangent::{apply_psi_star, apply_varphi_star, chain_solve_from, StageGeometry};

use super::{check_step_inputs, CotangentState, StageCache};

/// One variational polar-decomposition step `(g₀, p₀) ↦ (g₁, p₁)`.
///
/// The stage velocities, stage rotations, end rotation and multiplier are
/// found by a Gauss–Seidel sweep that is repeated until the largest change of
/// any unknown drops below `cfg.tol`.
pub fn vpd_step<H: LeftTrivHamiltonian + ?Sized>(
    sys: &H,
    tableau: &ButcherTableau,
    h: f64,
    state: &CotangentState,
    cfg: &FixedPointConfig,
) -> Result<(CotangentState, StageCache)> {
    let n = state.g.dim();
    check_step_inputs(tableau, h, n, &state.p, cfg)?;
    let s = tableau.stages();
    let (a, b) = (&tableau.a, &tableau.b);
    let g0 = &state.g;
    let p0 = &state.p;

    let mut mus = vec![p0.clone(); s];
    let mut us = vec![g0.clone(); s];
    let mut g1 = g0.clone();
    let mut lambda = p0.scale(-0.5);
    let mut warm: Option<Vec<SkewMat>> = None;
    let mut chain_iterations = 0;
    let mut tracker = Tracker::new("VPD step", *cfg);

    let p_factors = loop {
        let omegas = stage_velocities(sys, &us, &mus)?;
        let mut change = 0.0_f64;

        let mut p_factors = Vec::with_capacity(s);
        for i in 0..s {
            let mut a_i = (**g0).clone();
            for j in 0..s {
                if a[i][j] != 0.0 {
                    a_i.axpy(h * a[i][j], &(&*us[j] * &*omegas[j]));
                }
            }
            let f = polar_decompose(&a_i)?;
            change = change.max((&*f.u - &*us[i]).spectral_norm());
            us[i] = f.u;
            p_factors.push(f.p);
        }

        let next_g1 = polar_project(&end_point(g0, &us, &omegas, b, h))?;
        change = change.max((&*next_g1 - &*g1).spectral_norm());
        g1 = next_g1;

        let geom = StageGeometry::full(g0, &us, p_factors.clone(), omegas.clone(), a, h)?;
        let g1_lambda = &*g1 * &*lambda;
        let mut rhs = Vec::with_capacity(s);
        for i in 0..s {
            let w = &sys.d_g(&us[i], &mus[i])? - &asym(&us[i].t_mul(&g1_lambda).mul_t(&omegas[i]));
            rhs.push(w.scale(b[i]));
        }
        let sol = chain_solve_from(&geom, &rhs, warm.as_deref(), cfg)?;
        chain_iterations += sol.iterations;

        let r = &apply_varphi_star(&geom, &sol).scale(h) - p0;
        let next_lambda = sylvester_rot(&g0.relative_to(&g1), &r)?;
        change = change.max((&next_lambda - &lambda).norm());
        lambda = next_lambda;

        let g1_lambda = &*g1 * &*lambda;
        for k in 0..s {
            let mut next = apply_psi_star(&geom, &sol, k).scale(h / b[k]);
            next.axpy(-1.0, &asym(&us[k].t_mul(&g1_lambda)));
            change = change.max((&next - &mus[k]).norm());
            mus[k] = next;
        }
        warm = Some(sol.stages);

        if tracker.record(change)? {
            break p_factors;
        }
    };

    let omegas = stage_velocities(sys, &us, &mus)?;
    let y = end_point(g0, &us, &omegas, b, h);
    let p1 = asym(&g1.t_mul(&y).mul_t(&lambda));
    let cache = StageCache {
        mus,
        omegas,
        stage_rots: us,
        p_factors,
        lambda,
        end_rot: g1.clone(),
        iterations: tracker.iterations(),
        chain_iterations,
    };
    Ok((CotangentState { g: g1, p: p1 }, cache))
}

fn stage_velocities<H: LeftTrivHamiltonian + ?Sized>(
    sys: &H,
    us: &[RotMat],
    mus: &[SkewMat],
) -> Result<Vec<SkewMat>> {
    us.iter().zip(mus).map(|(u, mu)| sys.d_mu(u, mu)).collect()
}

/// `g₀ + h Σ b_i U_i Ω_i`.
fn end_point(g0: &RotMat, us: &[RotMat], omegas: &[SkewMat], b: &[f64], h: f64) -> Mat {
    let mut y = (**g0).clone();
    for ((u, om), &bi) in us.iter().zip(omegas).zip(b) {
        y.axpy(h * bi, &(&**u * &**om));
    }
    y
}

/// Residuals of the six defining equations of a step, each evaluated
/// independently from the converged values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VpdResiduals {
    /// Stage-velocity equation (skew norm, maximised over stages).
    pub stage_momentum: f64,
    /// `g₁ = ℙ(g₀ + h Σ b_i U_i Ω_i)` (spectral norm).
    pub end_rotation: f64,
    /// `U_i = ℙ(g₀ + h Σ a_ij U_j Ω_j)` (spectral norm, maximised).
    pub stage_rotation: f64,
    /// Multiplier equation (skew norm).
    pub multiplier: f64,
    /// End momentum (skew norm).
    pub end_momentum: f64,
    /// `Ω_i = ∂H/∂μ(U_i, μ_i)` (skew norm, maximised).
    pub velocity: f64,
}

impl VpdResiduals {
    pub fn max(&self) -> f64 {
        [
            self.stage_momentum,
            self.end_rotation,
            self.stage_rotation,
            self.multiplier,
            self.end_momentum,
            self.velocity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Evaluate the defining equations of a step at the values stored in `cache`.
pub fn vpd_residuals<H: LeftTrivHamiltonian + ?Sized>(
    sys: &H,
    tableau: &ButcherTableau,
    h: f64,
    start: &CotangentState,
    end: &CotangentState,
    cache: &StageCache,
    cfg: &FixedPointConfig,
) -> Result<VpdResiduals> {
    let s = tableau.stages();
    let (a, b) = (&tableau.a, &tableau.b);
    let (g0, p0) = (&start.g, &start.p);
    let (us, mus, lambda) = (&cache.stage_rots, &cache.mus, &cache.lambda);
    let g1 = &end.g;

    let omegas = stage_velocities(sys, us, mus)?;
    let velocity = omegas
        .iter()
        .zip(&cache.omegas)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);

    let mut stage_rotation = 0.0_f64;
    let mut p_factors = Vec::with_capacity(s);
    for i in 0..s {
        let mut a_i = (**g0).clone();
        for j in 0..s {
            a_i.axpy(h * a[i][j], &(&*us[j] * &*omegas[j]));
        }
        let f = polar_decompose(&a_i)?;
        stage_rotation = stage_rotation.max((&*f.u - &*us[i]).spectral_norm());
        p_factors.push(f.p);
    }

    let y = end_point(g0, us, &omegas, b, h);
    let end_rotation = (&*polar_project(&y)? - &**g1).spectral_norm();

    let geom = StageGeometry::full(g0, us, p_factors, omegas.clone(), a, h)?;
    let g1_lambda = &**g1 * &**lambda;
    let mut rhs = Vec::with_capacity(s);
    for i in 0..s {
        let w = &sys.d_g(&us[i], &mus[i])? - &asym(&us[i].t_mul(&g1_lambda).mul_t(&omegas[i]));
        rhs.push(w.scale(b[i]));
    }
    let sol = chain_solve_from(&geom, &rhs, None, cfg)?;

    let lhs = asym(&g0.t_mul(&g1_lambda));
    let r = &apply_varphi_star(&geom, &sol).scale(h) - p0;
    let multiplier = (&lhs - &r).norm();

    let mut stage_momentum = 0.0_f64;
    for k in 0..s {
        let mut expected = apply_psi_star(&geom, &sol, k).scale(h / b[k]);
        expected.axpy(-1.0, &asym(&us[k].t_mul(&g1_lambda)));
        stage_momentum = stage_momentum.max((&expected - &mus[k]).norm());
    }

    let p1 = asym(&g1.t_mul(&y).mul_t(lambda));
    let end_momentum = (&p1 - &end.p).norm();

    Ok(VpdResiduals {
        stage_momentum,
        end_rotation,
        stage_rotation,
        multiplier,
        end_momentum,
        velocity,
    })
}

/// [`vpd_step`] with fixed system, tableau and step size.
pub struct VpdStepper<'a, H: ?Sized> {
    pub system: &'a H,
    pub tableau: ButcherTableau,
    pub h: f64,
    pub cfg: FixedPointConfig,
}

impl<H: LeftTrivHamiltonian + ?Sized> super::Stepper for VpdStepper<'_, H> {
    type State = CotangentState;

    fn step(&self, state: &CotangentState) -> Result<(CotangentState, StageCache)> {
        vpd_step(self.system, &self.tableau, self.h, state, &self.cfg)
    }
}
