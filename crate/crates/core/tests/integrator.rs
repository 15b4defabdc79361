mod common;

use common::*;
use polarvi::integrator::{
    integrate, legendre_convert, lie_poisson_step, vpd_residuals, vpd_step, CotangentState,
    FixedPointConfig, LiePoissonStepper, ReducedState, StageCache, VpdStepper,
};
use polarvi::linalg::{hat, vee, Mat, RotMat, SkewMat};
use polarvi::systems::{
    dipole_energy, dipole_energy_right, Dipole, DipoleParams, Invariant, LeftTrivHamiltonian,
    ReducedHamiltonian, RigidBody,
};
use polarvi::tableau::{ButcherTableau, Method};
use polarvi::Error;
use proptest::prelude::*;

struct Free(usize);

impl ReducedHamiltonian for Free {
    fn dim(&self) -> usize {
        self.0
    }
    fn energy(&self, _mu: &SkewMat) -> polarvi::Result<f64> {
        Ok(0.0)
    }
    fn d_mu(&self, mu: &SkewMat) -> polarvi::Result<SkewMat> {
        Ok(SkewMat::zeros(mu.dim()))
    }
}

fn cfg() -> FixedPointConfig {
    FixedPointConfig::default()
}

fn body() -> RigidBody {
    RigidBody::principal([1.0, 2.0, 3.0]).unwrap()
}

#[test]
fn zero_hamiltonian_is_stationary() {
    let mut r = rng(1);
    for method in Method::ALL {
        for n in [2, 3, 4] {
            let g0 = random_rot(&mut r, n, 1.0);
            let p0 = random_skew(&mut r, n, 1.0);
            let st = CotangentState { g: g0.clone(), p: p0.clone() };
            let (next, cache) =
                vpd_step(&Invariant(Free(n)), &method.tableau(), 0.1, &st, &cfg()).unwrap();
            assert!((&*next.g - &*g0).max_abs() < 1e-15);
            assert!((&next.p - &p0).max_abs() < 1e-14);
            assert!((&cache.lambda + &p0.scale(0.5)).max_abs() < 1e-14);
            for mu in &cache.mus {
                assert!((mu - &p0).max_abs() < 1e-14);
            }
        }
    }
}

#[test]
fn residuals_vanish_at_convergence() {
    let sys = Dipole::default();
    let mut st = sys.initial_state();
    for method in Method::ALL {
        let t = method.tableau();
        for _ in 0..3 {
            let (next, cache) = vpd_step(&sys, &t, 0.05, &st, &cfg()).unwrap();
            let res = vpd_residuals(&sys, &t, 0.05, &st, &next, &cache, &cfg()).unwrap();
            assert!(res.max() < 1e-13, "{method}: {res:?}");
            st = next;
        }
    }
}

#[test]
fn spatial_momentum_is_conserved_for_invariant_hamiltonians() {
    let mut r = rng(2);
    let sys = Invariant(body());
    let g0 = random_rot(&mut r, 3, 1.0);
    let p0 = hat([0.3, -0.7, 1.1]);
    let spatial = |s: &CotangentState| &*s.g * &s.p.mul_t(&s.g);
    let mut st = CotangentState { g: g0, p: p0 };
    let m0 = spatial(&st);
    for _ in 0..50 {
        st = vpd_step(&sys, &Method::Gl2.tableau(), 0.1, &st, &cfg()).unwrap().0;
    }
    assert!((&spatial(&st) - &m0).max_abs() < 1e-13);
}

#[test]
fn reduced_step_matches_full_step() {
    let mut r = rng(3);
    let b = body();
    let mu0 = hat([0.4, 1.0, -0.6]);
    for method in Method::ALL {
        let t = method.tableau();
        let g0 = random_rot(&mut r, 3, 1.0);
        let (full, fcache) = vpd_step(
            &Invariant(b.clone()),
            &t,
            0.1,
            &CotangentState { g: g0.clone(), p: mu0.clone() },
            &cfg(),
        )
        .unwrap();
        let (red, rcache) =
            lie_poisson_step(&b, &t, 0.1, &ReducedState { mu: mu0.clone() }, &cfg()).unwrap();
        assert!((&full.p - &red.mu).max_abs() < 1e-13, "{method}");
        let f0 = g0.relative_to(&full.g);
        assert!((&*f0 - &*rcache.end_rot).max_abs() < 1e-13);
        for (u, v) in fcache.stage_rots.iter().zip(&rcache.stage_rots) {
            // U_i = g₁ Θ_iᵀ = g₀ f₀ V_i
            assert!((&**u - &(&*g0 * &(&*f0 * &**v))).max_abs() < 1e-13);
        }
    }
}

#[test]
fn casimir_is_conserved_by_reduced_steps() {
    let b = body();
    let mut st = ReducedState { mu: hat([0.4, 1.0, -0.6]) };
    let c0 = v3(&st.mu).norm();
    for _ in 0..200 {
        st = lie_poisson_step(&b, &Method::Gl2.tableau(), 0.05, &st, &cfg()).unwrap().0;
    }
    assert!((v3(&st.mu).norm() - c0).abs() < 1e-13);
}

#[test]
fn relative_equilibrium_about_principal_axis() {
    // μ = 1.5 e₃ on the axis of J₃ = 3: constant Ω = 0.5 ê₃ and g(t) = exp(tΩ).
    let sys = Invariant(body());
    let mu0 = hat([0.0, 0.0, 1.5]);
    let exact = expm(&hat([0.0, 0.0, 1.0]));
    let run = |h: f64, steps: usize| {
        let st = CotangentState { g: RotMat::identity(3), p: mu0.clone() };
        let stepper = VpdStepper { system: &sys, tableau: Method::Gl3.tableau(), h, cfg: cfg() };
        let traj = integrate(&stepper, st, steps, &mut []).unwrap();
        assert!((&traj.last.p - &mu0).max_abs() < 1e-14);
        let axis = traj.last.g.mul_vec(&[0.0, 0.0, 1.0]);
        assert!((axis[2] - 1.0).abs() < 1e-15 && axis[0].abs() < 1e-15 && axis[1].abs() < 1e-15);
        (&*traj.last.g - &*exact).max_abs()
    };
    let coarse = run(0.1, 20);
    let fine = run(0.05, 40);
    assert!(coarse < 1e-11, "{coarse:e}");
    assert!(coarse / fine > 40.0, "{coarse:e} {fine:e}");
}

fn flow_error(method: Method, h: f64) -> f64 {
    let sys = Dipole::default();
    let st = sys.initial_state();
    let (next, _) = vpd_step(&sys, &method.tableau(), h, &st, &cfg()).unwrap();
    let (g, mu) = rk4_flow(
        &st.g,
        &st.p,
        h,
        400,
        &|g, mu| sys.d_g(&RotMat::new(g.clone()).unwrap_or_else(|_| proj(g)), mu).unwrap(),
        &|g, mu| sys.d_mu(&proj(g), mu).unwrap(),
    );
    (&*next.g - &g).max_abs() + (&next.p - &mu).max_abs()
}

fn proj(g: &Mat) -> RotMat {
    polarvi::linalg::polar_project(g).unwrap()
}

#[test]
fn local_error_matches_continuous_flow() {
    for (method, order) in [(Method::Gl1, 2), (Method::Rk3, 3), (Method::Gl2, 4)] {
        let e1 = flow_error(method, 0.2);
        let e2 = flow_error(method, 0.1);
        let observed = (e1 / e2).log2();
        assert!(
            observed > order as f64 + 0.6,
            "{method}: local errors {e1:e}, {e2:e}, slope {observed}"
        );
    }
    assert!(flow_error(Method::Gl3, 0.1) < 1e-9);
}

#[test]
fn stages_stay_orthogonal() {
    let sys = Dipole::default();
    let mut st = sys.initial_state();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let (next, cache) = vpd_step(&sys, &Method::Gl3.tableau(), 0.05, &st, &cfg()).unwrap();
        worst = worst.max(cache.max_orthogonality_error()).max(next.g.orthogonality_error());
        st = next;
    }
    assert!(worst < 1e-14, "{worst:e}");
}

#[test]
fn failures_carry_the_step_index() {
    let sys = Dipole::default();
    let tight = FixedPointConfig::new(1e-15, 1).unwrap();
    let stepper = VpdStepper { system: &sys, tableau: Method::Gl2.tableau(), h: 0.01, cfg: tight };
    let err = integrate(&stepper, sys.initial_state(), 5, &mut []).unwrap_err();
    match err {
        Error::StepFailed { step, source } => {
            assert_eq!(step, 1);
            assert!(matches!(*source, Error::NoConvergence { .. }));
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn observers_see_every_step() {
    let b = body();
    let stepper =
        LiePoissonStepper { system: &b, tableau: Method::Rk3.tableau(), h: 0.1, cfg: cfg() };
    let mut seen = Vec::new();
    let mut obs = |k: usize, s: &ReducedState, c: &StageCache| {
        seen.push((k, b.energy(&s.mu)?, c.iterations));
        Ok(())
    };
    let traj =
        integrate(&stepper, ReducedState { mu: hat([1.0, 0.2, 0.0]) }, 7, &mut [&mut obs]).unwrap();
    assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), (1..=7).collect::<Vec<_>>());
    assert_eq!(traj.steps, 7);
    assert!(traj.iterations.max >= 2);
}

#[test]
fn invalid_inputs() {
    let sys = Dipole::default();
    let st = sys.initial_state();
    let t = Method::Gl1.tableau();
    assert!(matches!(vpd_step(&sys, &t, 0.0, &st, &cfg()), Err(Error::InvalidArgument(_))));
    let zero_weight = ButcherTableau::from_ab(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![1.0, 0.0]);
    if let Ok(zw) = zero_weight {
        assert!(matches!(vpd_step(&sys, &zw, 0.1, &st, &cfg()), Err(Error::ZeroWeight(1))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frames_agree(w in prop::array::uniform3(-2.0..2.0f64), p in prop::array::uniform3(-1.0..1.0f64)) {
        let params = DipoleParams::default();
        let g = expm(&hat(w));
        let left = legendre_convert(&g, p).unwrap();
        let hl = dipole_energy(&g, &left, &params).unwrap();
        let hr = dipole_energy_right(&g, p, &params).unwrap();
        prop_assert!((hl - hr).abs() < 1e-13 * hr.abs().max(1.0));
        let back = g.mul_vec(&vee(&left).unwrap());
        for k in 0..3 {
            prop_assert!((back[k] - p[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_matches_finite_differences(w in prop::array::uniform3(-0.5..0.5f64), dir in prop::array::uniform3(-1.0..1.0f64)) {
        let sys = Dipole::default();
        let g = &*sys.initial_state().g * &*expm(&hat(w));
        let g = RotMat::new(g).unwrap();
        let xi = hat(dir);
        let eps = 1e-5;
        let plus = RotMat::new(&*g * &*expm(&xi.scale(eps))).unwrap();
        let minus = RotMat::new(&*g * &*expm(&xi.scale(-eps))).unwrap();
        let mu = SkewMat::zeros(3);
        let fd = (sys.energy(&plus, &mu).unwrap() - sys.energy(&minus, &mu).unwrap()) / (2.0 * eps);
        let analytic = sys.d_g(&g, &mu).unwrap().inner(&xi);
        prop_assert!((fd - analytic).abs() < 1e-8, "{fd} vs {analytic}");
    }
}

#[test]
fn relative_equilibria_after_ten_steps() {
    let inertia = [1.0, 2.0, 3.0];
    let sys = Invariant(body());
    for axis in 0..3 {
        for scale in [0.3, -2.0] {
            let mut v = [0.0; 3];
            v[axis] = scale;
            let mu0 = hat(v);
            let mut w = [0.0; 3];
            w[axis] = 10.0 * 0.01 * scale / inertia[axis];
            let stepper =
                VpdStepper { system: &sys, tableau: Method::Gl3.tableau(), h: 0.01, cfg: cfg() };
            let st = CotangentState { g: RotMat::identity(3), p: mu0.clone() };
            let traj = integrate(&stepper, st, 10, &mut []).unwrap();
            assert!((&traj.last.p - &mu0).max_abs() < 1e-14);
            assert!((&*traj.last.g - &*expm(&hat(w))).max_abs() < 1e-12);
        }
    }
}

#[test]
fn reduced_zero_hamiltonian_and_equilibria() {
    let mu0 = hat([0.3, -0.2, 0.9]);
    let (next, cache) =
        lie_poisson_step(&Free(3), &Method::Gl2.tableau(), 0.1, &ReducedState { mu: mu0.clone() }, &cfg())
            .unwrap();
    assert!((&next.mu - &mu0).max_abs() < 1e-15);
    assert!((&*cache.end_rot - &Mat::identity(3)).max_abs() < 1e-15);
    let b = body();
    for v in [[1.3, 0.0, 0.0], [0.0, -0.4, 0.0], [0.0, 0.0, 2.0]] {
        let mu0 = hat(v);
        for method in Method::ALL {
            let (next, _) =
                lie_poisson_step(&b, &method.tableau(), 0.05, &ReducedState { mu: mu0.clone() }, &cfg())
                    .unwrap();
            assert!((&next.mu - &mu0).max_abs() < 1e-13, "{method}");
        }
    }
}

#[test]
fn casimir_over_a_thousand_steps() {
    let b = body();
    let stepper = LiePoissonStepper { system: &b, tableau: Method::Gl2.tableau(), h: 0.01, cfg: cfg() };
    let mu0 = hat([0.4, 1.0, -0.6]);
    let c0 = v3(&mu0).norm();
    let mut worst = 0.0_f64;
    let mut obs = |_k: usize, s: &ReducedState, _c: &StageCache| {
        worst = worst.max((v3(&s.mu).norm() - c0).abs());
        Ok(())
    };
    integrate(&stepper, ReducedState { mu: mu0 }, 1000, &mut [&mut obs]).unwrap();
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn full_and_reduced_sequences_agree() {
    let b = body();
    let full_sys = Invariant(b.clone());
    let mut full = CotangentState { g: RotMat::identity(3), p: hat([0.4, 1.0, -0.6]) };
    let mut red = ReducedState { mu: full.p.clone() };
    for _ in 0..100 {
        full = vpd_step(&full_sys, &Method::Gl2.tableau(), 0.01, &full, &cfg()).unwrap().0;
        red = lie_poisson_step(&b, &Method::Gl2.tableau(), 0.01, &red, &cfg()).unwrap().0;
        assert!((&full.p - &red.mu).max_abs() <= 1e-10);
    }
}

#[test]
fn tiny_steps_are_consistent_with_the_flow() {
    let sys = Dipole::default();
    let st = sys.initial_state();
    let h = 1e-6;
    let (next, _) = vpd_step(&sys, &Method::Gl1.tableau(), h, &st, &cfg()).unwrap();
    let (g, mu) = rk4_flow(
        &st.g,
        &st.p,
        h,
        1,
        &|g, mu| sys.d_g(&proj(g), mu).unwrap(),
        &|g, mu| sys.d_mu(&proj(g), mu).unwrap(),
    );
    let err = (&*next.g - &g).max_abs() + (&next.p - &mu).max_abs();
    assert!(err <= h * h, "{err:e}");
}

#[test]
fn integrate_zero_and_one_step() {
    let sys = Dipole::default();
    let st = sys.initial_state();
    let stepper = VpdStepper { system: &sys, tableau: Method::Gl2.tableau(), h: 0.05, cfg: cfg() };
    let traj = integrate(&stepper, st.clone(), 0, &mut []).unwrap();
    assert_eq!(traj.last, st);
    assert_eq!(traj.steps, 0);
    let traj = integrate(&stepper, st.clone(), 1, &mut []).unwrap();
    let (direct, _) = vpd_step(&sys, &Method::Gl2.tableau(), 0.05, &st, &cfg()).unwrap();
    assert_eq!(traj.last, direct);
}

#[test]
fn legendre_examples() {
    let p = [0.3, -1.0, 2.0];
    assert_eq!(legendre_convert(&RotMat::identity(3), p).unwrap(), hat(p));
    let g = expm(&hat([0.2, 0.5, -1.0]));
    assert_eq!(legendre_convert(&g, [0.0; 3]).unwrap().max_abs(), 0.0);
    assert!(legendre_convert(&RotMat::identity(2), p).is_err());
    // p(0) = g(0) J g(0)ᵀ e₂ gives p̃(0) = hat(J g(0)ᵀ e₂) = hat(0, 0, −0.01)
    let st = Dipole::default().initial_state();
    let jg = m3(&Mat::diag(&DipoleParams::default().inertia())) * m3(&st.g).transpose();
    let expected = jg * nalgebra::Vector3::new(0.0, 1.0, 0.0);
    assert!((v3(&st.p) - expected).norm() < 1e-17);
    assert!((expected - nalgebra::Vector3::new(0.0, 0.0, -0.01)).norm() < 1e-17);
}

fn fd_d_mu(energy: &dyn Fn(&SkewMat) -> f64, mu: &SkewMat) -> [f64; 3] {
    let eps = 1e-6;
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[k] = eps;
        *o = (energy(&(mu + &hat(e))) - energy(&(mu - &hat(e)))) / (2.0 * eps);
    }
    out
}

#[test]
fn gradient_consistency_along_projected_curves() {
    let sys = Dipole::default();
    let mut r = rng(40);
    for _ in 0..50 {
        let g = random_rot(&mut r, 3, 2.0);
        let mu = random_skew(&mut r, 3, 0.5);
        if sys.d_g(&g, &mu).is_err() {
            continue;
        }
        let dir = random_skew(&mut r, 3, 1.0);
        let omega = dir.scale(1.0 / v3(&dir).norm());
        let eps = 1e-5;
        let curve = |t: f64| {
            let u = proj(&(&Mat::identity(3) + &*omega.scale(t)));
            RotMat::new(&*g * &*u).unwrap()
        };
        let fd = (sys.energy(&curve(eps), &mu).unwrap() - sys.energy(&curve(-eps), &mu).unwrap())
            / (2.0 * eps);
        let analytic = sys.d_g(&g, &mu).unwrap().inner(&omega);
        assert!((fd - analytic).abs() < 1e-6, "{fd} vs {analytic}");
        let dmu = vee(&sys.d_mu(&g, &mu).unwrap()).unwrap();
        let fd = fd_d_mu(&|m| sys.energy(&g, m).unwrap(), &mu);
        for k in 0..3 {
            assert!((dmu[k] - fd[k]).abs() < 1e-6);
        }
    }
}

#[test]
fn rigid_body_d_mu_matches_finite_differences() {
    let b = RigidBody::principal([1.3, 0.7, 2.9]).unwrap();
    let mut r = rng(41);
    for _ in 0..20 {
        let mu = random_skew(&mut r, 3, 1.0);
        let fd = fd_d_mu(&|m| b.energy(m).unwrap(), &mu);
        let dmu = vee(&b.d_mu(&mu).unwrap()).unwrap();
        for k in 0..3 {
            assert!((dmu[k] - fd[k]).abs() < 1e-8);
        }
    }
}
