use super::*;
use nalgebra::{DMatrix, DVector};
use polarvi::linalg::{polar_decompose, Mat, PolarFactors, RotMat, SkewMat};
use polarvi::tableau::Method;
use polarvi::tangent::{dpol, StageGeometry};
use rand::Rng;

/// A synthetic step configuration: `g₀`, stage points `A_i` near SO(n) and
/// their factors, stage velocities and a tableau.
pub struct Instance {
    pub g0: RotMat,
    pub factors: Vec<PolarFactors>,
    pub omegas: Vec<SkewMat>,
    pub a: Vec<Vec<f64>>,
    pub h: f64,
}

impl Instance {
    pub fn random(r: &mut impl Rng, n: usize, method: Method, h: f64) -> Self {
        let a = method.tableau().a;
        let s = a.len();
        let g0 = random_rot(r, n, 1.5);
        let factors = (0..s)
            .map(|_| {
                let u = random_rot(r, n, 1.5);
                let p = random_spd(r, n, 0.7, 1.4);
                polar_decompose(&(&*u * &p)).unwrap()
            })
            .collect();
        let omegas = (0..s).map(|_| random_skew(r, n, 1.0)).collect();
        Self { g0, factors, omegas, a, h }
    }

    pub fn stages(&self) -> usize {
        self.a.len()
    }

    pub fn geometry(&self) -> StageGeometry {
        StageGeometry::full(
            &self.g0,
            &self.factors.iter().map(|f| f.u.clone()).collect::<Vec<_>>(),
            self.factors.iter().map(|f| f.p.clone()).collect(),
            self.omegas.clone(),
            &self.a,
            self.h,
        )
        .unwrap()
    }

    /// Forward map `δ ↦ {η_i}` solving `η_i − dℙ_{A_i}(h Σ_j a_ij U_j η_j Ω_j) = src_i(δ)`.
    pub fn forward(&self, src: &[Mat]) -> Vec<SkewMat> {
        let s = self.stages();
        let mut eta: Vec<SkewMat> = (0..s).map(|i| dpol(&self.factors[i], &src[i]).unwrap()).collect();
        for _ in 0..200 {
            eta = (0..s)
                .map(|i| {
                    let mut b = src[i].clone();
                    for j in 0..s {
                        let u = &*self.factors[j].u;
                        b.axpy(self.h * self.a[i][j], &(&(u * &*eta[j]) * &*self.omegas[j]));
                    }
                    dpol(&self.factors[i], &b).unwrap()
                })
                .collect();
        }
        eta
    }
}

/// Dense Kronecker assembly of the stacked chain on full `n × n` blocks.
pub fn chain_oracle(inst: &Instance, rhs: &[SkewMat]) -> Vec<Mat> {
    let n = inst.g0.dim();
    let s = inst.stages();
    let nn = n * n;
    let id = DMatrix::<f64>::identity(nn, nn);
    let t = transpose_perm(n);
    let asym = &id - &t;
    let lyap_ops: Vec<DMatrix<f64>> = inst
        .factors
        .iter()
        .map(|f| {
            let p = to_na(&f.p);
            let idn = DMatrix::<f64>::identity(n, n);
            let k = idn.kronecker(&p) + p.transpose().kronecker(&idn);
            -(k.try_inverse().unwrap()) * &t
        })
        .collect();
    let mut big = DMatrix::<f64>::zeros(s * nn, s * nn);
    for j in 0..s {
        let uj = to_na(&inst.factors[j].u);
        let om = to_na(&inst.omegas[j]);
        for l in 0..s {
            let ul = to_na(&inst.factors[l].u);
            let rel = uj.transpose() * ul;
            // vec(R X Ωᵀ) = (Ω ⊗ R) vec X
            let block = -inst.h * inst.a[l][j] * (&asym * om.kronecker(&rel) * &lyap_ops[l]);
            let block = if j == l { block + &id } else { block };
            big.view_mut((j * nn, l * nn), (nn, nn)).copy_from(&block);
        }
    }
    let mut b = DVector::<f64>::zeros(s * nn);
    for (j, r) in rhs.iter().enumerate() {
        b.rows_mut(j * nn, nn).copy_from(&vec_of(r));
    }
    let x = big.lu().solve(&b).unwrap();
    (0..s).map(|j| unvec(&x.rows(j * nn, nn).into_owned(), n)).collect()
}
