#![allow(dead_code)]

pub mod chain;

use nalgebra::{DMatrix, Matrix3, Vector3};
use polarvi::linalg::{hat, vee, Mat, RotMat, SkewMat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(m: &Mat) -> DMatrix<f64> {
    let n = m.dim();
    DMatrix::from_fn(n, n, |i, j| m[(i, j)])
}

pub fn from_na(m: &DMatrix<f64>) -> Mat {
    Mat::from_fn(m.nrows(), |i, j| m[(i, j)])
}

pub fn random_mat(rng: &mut impl Rng, n: usize, scale: f64) -> Mat {
    Mat::from_fn(n, |_, _| scale * rng.random_range(-1.0..1.0))
}

pub fn random_skew(rng: &mut impl Rng, n: usize, scale: f64) -> SkewMat {
    SkewMat::project(&random_mat(rng, n, scale))
}

/// Rotation `exp(x)` via nalgebra's matrix exponential.
pub fn expm(x: &SkewMat) -> RotMat {
    let e = to_na(x).exp();
    RotMat::new(from_na(&e)).expect("exponential of a skew matrix")
}

pub fn random_rot(rng: &mut impl Rng, n: usize, scale: f64) -> RotMat {
    expm(&random_skew(rng, n, scale))
}

/// Orthogonal polar factor `a (aᵀa)^{-1/2}` by symmetric eigen-decomposition.
pub fn polar_oracle(a: &Mat) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = to_na(a);
    let ata = a.transpose() * &a;
    let eig = ata.symmetric_eigen();
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let p = &eig.eigenvectors * sqrt * eig.eigenvectors.transpose();
    let u = &a * &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose();
    (u, p)
}

pub fn v3(x: &SkewMat) -> Vector3<f64> {
    let v = vee(x).unwrap();
    Vector3::new(v[0], v[1], v[2])
}

pub fn sk3(v: &Vector3<f64>) -> SkewMat {
    hat([v[0], v[1], v[2]])
}

pub fn m3(m: &Mat) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[(i, j)])
}

/// Continuous flow `ġ = gΩ`, `μ̇ = μΩ − Ωμ − ∂H/∂g`, `Ω = ∂H/∂μ`, integrated
/// with classical RK4.
pub fn rk4_flow(
    g0: &Mat,
    mu0: &SkewMat,
    t: f64,
    substeps: usize,
    d_g: &dyn Fn(&Mat, &SkewMat) -> SkewMat,
    d_mu: &dyn Fn(&Mat, &SkewMat) -> SkewMat,
) -> (Mat, SkewMat) {
    let n = g0.dim();
    let rhs = |g: &Mat, mu: &SkewMat| -> (Mat, Mat) {
        let om = d_mu(g, mu);
        let gd = g * &*om;
        let mut md = &(&**mu * &*om) - &(&*om * &**mu);
        md.axpy(-1.0, &d_g(g, mu));
        (gd, md)
    };
    let dt = t / substeps as f64;
    let mut g = g0.clone();
    let mut mu: Mat = (**mu0).clone();
    for _ in 0..substeps {
        let sk = |m: &Mat| SkewMat::project(m);
        let (k1g, k1m) = rhs(&g, &sk(&mu));
        let g2 = &g + &(&k1g * (dt / 2.0));
        let m2 = &mu + &(&k1m * (dt / 2.0));
        let (k2g, k2m) = rhs(&g2, &sk(&m2));
        let g3 = &g + &(&k2g * (dt / 2.0));
        let m3 = &mu + &(&k2m * (dt / 2.0));
        let (k3g, k3m) = rhs(&g3, &sk(&m3));
        let g4 = &g + &(&k3g * dt);
        let m4 = &mu + &(&k3m * dt);
        let (k4g, k4m) = rhs(&g4, &sk(&m4));
        let mut dg = Mat::zeros(n);
        let mut dm = Mat::zeros(n);
        for (w, kg, km) in [(1.0, &k1g, &k1m), (2.0, &k2g, &k2m), (2.0, &k3g, &k3m), (1.0, &k4g, &k4m)] {
            dg.axpy(w * dt / 6.0, kg);
            dm.axpy(w * dt / 6.0, km);
        }
        g = &g + &dg;
        mu = &mu + &dm;
    }
    (g, SkewMat::project(&mu))
}

/// Column-major `vec(X)`.
pub fn vec_of(m: &Mat) -> nalgebra::DVector<f64> {
    let n = m.dim();
    nalgebra::DVector::from_fn(n * n, |k, _| m[(k % n, k / n)])
}

pub fn unvec(v: &nalgebra::DVector<f64>, n: usize) -> Mat {
    Mat::from_fn(n, |i, j| v[j * n + i])
}

/// Permutation `T` with `T vec(X) = vec(Xᵀ)`.
pub fn transpose_perm(n: usize) -> DMatrix<f64> {
    let mut t = DMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            t[(i * n + j, j * n + i)] = 1.0;
        }
    }
    t
}

/// `Lyap(P, C)` from the Kronecker form `(I ⊗ P + Pᵀ ⊗ I) vec X = −vec C`.
pub fn lyap_oracle(p: &Mat, c: &Mat) -> Mat {
    let n = p.dim();
    let pn = to_na(p);
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(&pn) + pn.transpose().kronecker(&id);
    let x = k.lu().solve(&(-vec_of(c))).expect("invertible Kronecker sum");
    unvec(&x, n)
}

/// `Λ` with `MΛ + ΛMᵀ = R` from `(I ⊗ M + M ⊗ I) vec Λ = vec R`.
pub fn sylvester_oracle(m: &Mat, r: &Mat) -> Mat {
    let n = m.dim();
    let mn = to_na(m);
    let id = DMatrix::<f64>::identity(n, n);
    let k = id.kronecker(&mn) + mn.kronecker(&id);
    let x = k.lu().solve(&vec_of(r)).expect("invertible Kronecker sum");
    unvec(&x, n)
}

pub fn spectral(m: &DMatrix<f64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Random symmetric positive-definite matrix with eigenvalues in `[lo, hi]`.
pub fn random_spd(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Mat {
    let q = to_na(&random_rot(rng, n, 2.0));
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(lo..hi)));
    from_na(&(&q * d * q.transpose())).symmetrize()
}
