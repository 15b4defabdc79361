//! Tangent map of the polar projection, its adjoint, and the stacked adjoint
//! chains that appear when the internal stages of a step are varied.
//!
//! With `A = U·P`, the tangent map `dℙ_A(B)` is the skew `Ω` solving
//! `P·Ω + Ω·P + Bᵀ·U − Uᵀ·B = 0`, and its adjoint with respect to the trace
//! and `sk(n)` inner products is `dℙ*_A(W) = U · Lyap(P, Wᵀ)`.
//!
//! Varying one stage velocity `Ω_k` perturbs every stage rotation through
//! the implicit stage equations. The adjoint of that sensitivity is obtained
//! from the linear system
//!
//! ```text
//! S_j − asym(h · U_jᵀ · Σ_l a_lj dℙ*_{A_l}(S_l) · Ω_jᵀ) = rhs_j,   j = 1..s
//! ```
//!
//! solved by fixed-point iteration, followed by one of two read-out maps.
//! Only the relative rotations `U_jᵀ·U_l` and `g₀ᵀ·U_l` enter, so the same
//! code serves the full step on `T*SO(n)` and its Lie–Poisson reduction.

use crate::error::{Error, Result};
use crate::fixed_point::{FixedPointConfig, Tracker};
use crate::linalg::{asym, lyap_spd, Mat, PolarFactors, RotMat, SkewMat, SpdEigen, SpdMat};

/// `dℙ_A(B)` for `A` with polar factors `factors`.
pub fn dpol(factors: &PolarFactors, b: &Mat) -> Result<SkewMat> {
    lyap_spd(&factors.p, &asym(&b.t_mul(&factors.u)))
}

/// `dℙ*_A(W) = U · Lyap(P, Wᵀ)`.
pub fn dpol_star(factors: &PolarFactors, w: &SkewMat) -> Result<Mat> {
    let lyap = lyap_spd(&factors.p, &-w)?;
    Ok(&*factors.u * &*lyap)
}

/// Everything the adjoint chains need about one step's internal stages.
#[derive(Clone, Debug)]
pub struct StageGeometry {
    s: usize,
    n: usize,
    /// `rel[j·s + l] = U_jᵀ·U_l` (full) or `Θ_j·Θ_lᵀ` (reduced).
    rel: Vec<RotMat>,
    p_factors: Vec<SpdMat>,
    lyap: Vec<SpdEigen>,
    omegas: Vec<SkewMat>,
    /// `g₀ᵀ·U_l` (full) or `f₀·Θ_lᵀ` (reduced).
    base_transport: Vec<RotMat>,
    a: Vec<Vec<f64>>,
    h: f64,
}

const GEOMETRY_TOL: f64 = 1e-12;

impl StageGeometry {
    /// Assemble from precomputed relative rotations.
    pub fn new(
        rel: Vec<RotMat>,
        p_factors: Vec<SpdMat>,
        omegas: Vec<SkewMat>,
        base_transport: Vec<RotMat>,
        a: &[Vec<f64>],
        h: f64,
    ) -> Result<Self> {
        let s = p_factors.len();
        if s == 0 {
            return Err(Error::InvalidArgument("at least one stage is required".into()));
        }
        let n = p_factors[0].dim();
        let check = |expected: usize, found: usize| {
            if expected == found {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, found })
            }
        };
        check(s * s, rel.len())?;
        check(s, omegas.len())?;
        check(s, base_transport.len())?;
        check(s, a.len())?;
        for row in a {
            check(s, row.len())?;
        }
        for m in rel.iter().map(|r| r.dim()).chain(omegas.iter().map(|o| o.dim())) {
            check(n, m)?;
        }
        let identity = Mat::identity(n);
        for j in 0..s {
            if (&*rel[j * s + j] - &identity).max_abs() > GEOMETRY_TOL {
                return Err(Error::InvalidArgument(format!("rel({j},{j}) is not the identity")));
            }
            for l in j + 1..s {
                if (&*rel[j * s + l] - &rel[l * s + j].transpose()).max_abs() > GEOMETRY_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "rel({j},{l}) is not the transpose of rel({l},{j})"
                    )));
                }
            }
        }
        let lyap = p_factors.iter().map(SpdEigen::new).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            s,
            n,
            rel,
            p_factors,
            lyap,
            omegas,
            base_transport,
            a: a.to_vec(),
            h,
        })
    }

    /// Geometry of the full step from `g₀` and the stage rotations `U_i`.
    pub fn full(
        g0: &RotMat,
        stage_rots: &[RotMat],
        p_factors: Vec<SpdMat>,
        omegas: Vec<SkewMat>,
        a: &[Vec<f64>],
        h: f64,
    ) -> Result<Self> {
        let rel = pairwise(stage_rots, |j, l| stage_rots[j].relative_to(&stage_rots[l]));
        let base = stage_rots.iter().map(|u| g0.relative_to(u)).collect();
        Self::new(rel, p_factors, omegas, base, a, h)
    }

    /// Geometry of the reduced step from `f₀ = g₀ᵀg₁` and `Θ_i = U_iᵀg₁`.
    pub fn reduced(
        f0: &RotMat,
        thetas: &[RotMat],
        p_factors: Vec<SpdMat>,
        omegas: Vec<SkewMat>,
        a: &[Vec<f64>],
        h: f64,
    ) -> Result<Self> {
        let rel = pairwise(thetas, |j, l| {
            RotMat::new_unchecked(thetas[j].mul_t(&thetas[l]))
        });
        let base = thetas
            .iter()
            .map(|t| RotMat::new_unchecked(f0.mul_t(t)))
            .collect();
        Self::new(rel, p_factors, omegas, base, a, h)
    }

    pub fn stages(&self) -> usize {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn rel(&self, j: usize, l: usize) -> &RotMat {
        &self.rel[j * self.s + l]
    }

    pub fn base_transport(&self, l: usize) -> &RotMat {
        &self.base_transport[l]
    }

    pub fn p_factor(&self, l: usize) -> &SpdMat {
        &self.p_factors[l]
    }

    pub fn omega(&self, j: usize) -> &SkewMat {
        &self.omegas[j]
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    /// `Lyap(P_l, S_lᵀ)` for every stage.
    fn lyap_terms(&self, stages: &[SkewMat]) -> Vec<SkewMat> {
        stages
            .iter()
            .zip(&self.lyap)
            .map(|(s, eig)| eig.solve(&-s))
            .collect()
    }

    /// The coupling `asym(h · Σ_l a_lj rel(j,l) · L_l · Ω_jᵀ)` for stage `j`.
    fn coupling(&self, j: usize, lyap_terms: &[SkewMat]) -> SkewMat {
        let mut sum = Mat::zeros(self.n);
        for (l, term) in lyap_terms.iter().enumerate() {
            let coeff = self.a[l][j];
            if coeff != 0.0 {
                sum.axpy(coeff, &(&**self.rel(j, l) * &**term));
            }
        }
        asym(&sum.mul_t(&self.omegas[j])).scale(self.h)
    }
}

fn pairwise(items: &[RotMat], f: impl Fn(usize, usize) -> RotMat) -> Vec<RotMat> {
    let s = items.len();
    (0..s * s).map(|idx| f(idx / s, idx % s)).collect()
}

/// Solution `{S_l}` of the stacked chain together with the lifted terms
/// `Lyap(P_l, S_lᵀ)` that both read-out maps consume.
#[derive(Clone, Debug)]
pub struct ChainSolution {
    pub stages: Vec<SkewMat>,
    pub lyap_terms: Vec<SkewMat>,
    pub iterations: usize,
}

impl ChainSolution {
    /// Wrap arbitrary stage values, e.g. to evaluate the read-out maps alone.
    pub fn from_stages(geom: &StageGeometry, stages: Vec<SkewMat>) -> Result<Self> {
        if stages.len() != geom.s {
            return Err(Error::DimensionMismatch {
                expected: geom.s,
                found: stages.len(),
            });
        }
        let lyap_terms = geom.lyap_terms(&stages);
        Ok(Self {
            stages,
            lyap_terms,
            iterations: 0,
        })
    }
}

/// Solve `S_j − asym(h · Σ_l a_lj rel(j,l) · Lyap(P_l, S_lᵀ) · Ω_jᵀ) = rhs_j`.
pub fn chain_solve(
    geom: &StageGeometry,
    rhs: &[SkewMat],
    cfg: &FixedPointConfig,
) -> Result<ChainSolution> {
    chain_solve_from(geom, rhs, None, cfg)
}

/// [`chain_solve`] with an optional warm start.
pub fn chain_solve_from(
    geom: &StageGeometry,
    rhs: &[SkewMat],
    initial: Option<&[SkewMat]>,
    cfg: &FixedPointConfig,
) -> Result<ChainSolution> {
    if rhs.len() != geom.s {
        return Err(Error::DimensionMismatch {
            expected: geom.s,
            found: rhs.len(),
        });
    }
    let mut stages: Vec<SkewMat> = match initial {
        Some(init) if init.len() == geom.s => init.to_vec(),
        _ => rhs.to_vec(),
    };
    let mut tracker = Tracker::new("adjoint chain", *cfg);
    loop {
        let lyap_terms = geom.lyap_terms(&stages);
        let mut change = 0.0_f64;
        let next: Vec<SkewMat> = (0..geom.s)
            .map(|j| {
                let updated = &rhs[j] + &geom.coupling(j, &lyap_terms);
                change = change.max((&*updated - &*stages[j]).spectral_norm());
                updated
            })
            .collect();
        stages = next;
        if tracker.record(change)? {
            break;
        }
    }
    let lyap_terms = geom.lyap_terms(&stages);
    Ok(ChainSolution {
        stages,
        lyap_terms,
        iterations: tracker.iterations(),
    })
}

/// Largest residual of the chain equations at `sol`, for diagnostics.
pub fn chain_residual(geom: &StageGeometry, rhs: &[SkewMat], sol: &ChainSolution) -> f64 {
    (0..geom.s)
        .map(|j| {
            let lhs = &sol.stages[j] - &geom.coupling(j, &sol.lyap_terms);
            (&*lhs - &*rhs[j]).spectral_norm()
        })
        .fold(0.0, f64::max)
}

/// `asym(Σ_l a_lk · rel(k,l) · Lyap(P_l, S_lᵀ))`: the read-out for a
/// variation of stage velocity `k`.
pub fn apply_psi_star(geom: &StageGeometry, sol: &ChainSolution, k: usize) -> SkewMat {
    let mut sum = Mat::zeros(geom.n);
    for (l, term) in sol.lyap_terms.iter().enumerate() {
        let coeff = geom.a[l][k];
        if coeff != 0.0 {
            sum.axpy(coeff, &(&**geom.rel(k, l) * &**term));
        }
    }
    asym(&sum)
}

/// `asym(Σ_l base_transport(l) · Lyap(P_l, S_lᵀ))`: the read-out for a
/// variation of the initial configuration.
pub fn apply_varphi_star(geom: &StageGeometry, sol: &ChainSolution) -> SkewMat {
    let mut sum = Mat::zeros(geom.n);
    for (l, term) in sol.lyap_terms.iter().enumerate() {
        sum.axpy(1.0, &(&*geom.base_transport[l] * &**term));
    }
    asym(&sum)
}
