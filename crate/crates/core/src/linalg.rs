//! Dense complex linear algebra helpers on top of nalgebra.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

/// Dimension up to which norms are computed by dense eigensolvers.
pub const DENSE_NORM_CAP: usize = 512;

/// Ascending eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    pub fn new(m: &CMat) -> Self {
        let n = m.nrows();
        if n == 0 {
            return Self { values: Vec::new(), vectors: CMat::zeros(0, 0) };
        }
        let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let se = SymmetricEigen::new(herm);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
        let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut vectors = CMat::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            vectors.set_column(dst, &se.eigenvectors.column(src));
        }
        Self { values, vectors }
    }

    /// `V f(D) V*` for a real function of the eigenvalues.
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMat {
        let mut scaled = self.vectors.clone();
        for (j, &e) in self.values.iter().enumerate() {
            let fj = f(e);
            for x in scaled.column_mut(j).iter_mut() {
                *x *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// `exp(i s M)`.
    pub fn exp_i(&self, s: f64) -> CMat {
        self.apply(|e| C64::from_polar(1.0, s * e))
    }

    /// Moves a matrix into the eigenbasis: `V* M V`.
    pub fn to_eigenbasis(&self, m: &CMat) -> CMat {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// Moves a matrix back from the eigenbasis: `V M V*`.
    pub fn from_eigenbasis(&self, m: &CMat) -> CMat {
        &self.vectors * m * self.vectors.adjoint()
    }
}

/// `exp(i s H)` for Hermitian `H`.
pub fn exp_i_herm(h: &CMat, s: f64) -> CMat {
    Eigh::new(h).exp_i(s)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn hermiticity_residual(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// Spectral norm. Dense below [`DENSE_NORM_CAP`], power iteration above.
pub fn norm2(m: &CMat) -> f64 {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    if r.max(c) <= DENSE_NORM_CAP {
        let g = if r >= c { m.adjoint() * m } else { m * m.adjoint() };
        let e = Eigh::new(&g);
        return e.values.last().copied().unwrap_or(0.0).max(0.0).sqrt();
    }
    power_norm(m, 1e-10, 2000)
}

/// Largest singular value by power iteration on `M* M`, deterministic start.
pub fn power_norm(m: &CMat, rel_tol: f64, max_iter: usize) -> f64 {
    let n = m.ncols();
    let mut v = seeded_vector(n, 0x5eed_0001);
    let mut last = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let u = m.adjoint() * &w;
        let s = u.norm();
        if s == 0.0 {
            return 0.0;
        }
        v = u / C64::new(s, 0.0);
        let est = s.sqrt();
        if (est - last).abs() <= rel_tol * est {
            return est;
        }
        last = est;
    }
    last
}

/// Max-abs entry, handy for exactness checks.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

/// Unit vector with pseudo-random complex entries from a fixed seed.
pub fn seeded_vector(n: usize, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = CVec::from_fn(n, |_, _| {
        let a = unit_float(&mut rng) - 0.5;
        let b = unit_float(&mut rng) - 0.5;
        C64::new(a, b)
    });
    let nv = v.norm();
    if nv > 0.0 {
        v /= C64::new(nv, 0.0);
    }
    v
}

fn unit_float(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Closest unitary `U (U* U)^{-1/2}`.
pub fn polar_unitary(u: &CMat) -> CMat {
    let g = Eigh::new(&(u.adjoint() * u));
    let inv_sqrt = g.apply(|e| C64::new(1.0 / e.max(1e-300).sqrt(), 0.0));
    u * inv_sqrt
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.ncols();
    norm2(&(u.adjoint() * u - CMat::identity(n, n)))
}

/// Distance of a real number to the nearest integer.
pub fn integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Numerical radius `max |<v, M v>|` over unit vectors.
pub fn numerical_radius(m: &CMat) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return m[(0, 0)].norm();
    }
    let top = |theta: f64| {
        let rot = m * C64::from_polar(1.0, theta);
        let h = (&rot + rot.adjoint()) * C64::new(0.5, 0.0);
        *Eigh::new(&h).values.last().unwrap()
    };
    let samples = 720;
    let mut best = (0.0, f64::NEG_INFINITY);
    for k in 0..samples {
        let th = 2.0 * PI * k as f64 / samples as f64;
        let v = top(th);
        if v > best.1 {
            best = (th, v);
        }
    }
    let step = 2.0 * PI / samples as f64;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if top(c) > top(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.1.max(top(0.5 * (a + b)))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// Lowest eigenpairs of a Hermitian operator given as a matrix-vector product.
#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    pub vectors: Vec<CVec>,
    pub residuals: Vec<f64>,
}

/// Lanczos with full reorthogonalization for the `k` lowest eigenpairs.
pub fn lanczos_lowest<F>(apply: F, dim: usize, k: usize, tol: f64, max_iter: usize) -> Result<LanczosResult>
where
    F: Fn(&CVec) -> CVec,
{
    let k = k.min(dim);
    let m_max = max_iter.min(dim).max(k);
    let mut basis: Vec<CVec> = Vec::with_capacity(m_max);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    basis.push(seeded_vector(dim, 0x1a2c_2057));
    let mut last: Option<LanczosResult> = None;
    for j in 0..m_max {
        let mut w = apply(&basis[j]);
        let a = basis[j].dotc(&w).re;
        alpha.push(a);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w.axpy(-c, q, ONE);
            }
        }
        let b = w.norm();
        let m = j + 1;
        let check = m >= k && (m % 8 == 0 || m == m_max || b < 1e-12);
        if check {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let se = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| se.eigenvalues[x].partial_cmp(&se.eigenvalues[y]).unwrap());
            let mut values = Vec::new();
            let mut vectors = Vec::new();
            let mut residuals = Vec::new();
            for &idx in order.iter().take(k) {
                let s = se.eigenvectors.column(idx);
                let mut v = CVec::zeros(dim);
                for (i, q) in basis.iter().enumerate() {
                    v.axpy(C64::new(s[i], 0.0), q, ONE);
                }
                let nv = v.norm();
                v /= C64::new(nv, 0.0);
                values.push(se.eigenvalues[idx]);
                residuals.push((b * s[m - 1]).abs());
                vectors.push(v);
            }
            let done = residuals
                .iter()
                .zip(&values)
                .all(|(r, v)| *r <= tol * v.abs().max(1.0));
            let res = LanczosResult { values, vectors, residuals };
            if done || b < 1e-12 || m == m_max {
                if done || b < 1e-12 {
                    return Ok(res);
                }
                last = Some(res);
                break;
            }
        }
        if b < 1e-12 {
            break;
        }
        beta.push(b);
        basis.push(w / C64::new(b, 0.0));
    }
    match last {
        Some(r) => Err(Error::Convergence(alloc::format!(
            "Lanczos residuals {:?} after {} iterations",
            r.residuals,
            m_max
        ))),
        None => Err(Error::Convergence("Lanczos produced no Ritz pairs".into())),
    }
}

/// Determinant of a small complex matrix.
pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let (x, w) = composite_rule(0.0, PI, 10, 8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.sin()).sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn eigh_sorted_and_reconstructs() {
        let m = CMat::from_fn(5, 5, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let e = Eigh::new(&m);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let back = e.apply(|x| C64::new(x, 0.0));
        assert!(max_abs(&(back - &m)) < 1e-12);
    }

    #[test]
    fn norms_agree_dense_and_power() {
        let m = CMat::from_fn(6, 4, |i, j| C64::new((i * j) as f64 * 0.1, (i as f64 - 1.5) * 0.2));
        let d = norm2(&m);
        let p = power_norm(&m, 1e-13, 5000);
        assert!((d - p).abs() < 1e-8 * d);
    }

    #[test]
    fn polar_restores_unitarity() {
        let h = CMat::from_fn(4, 4, |i, j| C64::new((i + j) as f64, (i as f64) - (j as f64)));
        let u = exp_i_herm(&h, 0.3) * C64::new(1.0 + 1e-3, 0.0);
        assert!(unitarity_residual(&polar_unitary(&u)) < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let n = 60;
        let m = CMat::from_fn(n, n, |i, j| {
            let d = (i as f64 - j as f64).abs();
            if d == 0.0 {
                C64::new((i % 7) as f64, 0.0)
            } else if d <= 2.0 {
                C64::new(0.3, if i < j { 0.1 } else { -0.1 })
            } else {
                ZERO
            }
        });
        let dense = Eigh::new(&m);
        let r = lanczos_lowest(|v| &m * v, n, 3, 1e-10, 200).unwrap();
        for k in 0..3 {
            assert!((r.values[k] - dense.values[k]).abs() < 1e-9);
        }
    }

    #[test]
    fn numerical_radius_of_nilpotent() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!((numerical_radius(&m) - 0.5).abs() < 1e-9);
    }
}
