//! Brute-force references for the test suites.
//!
//! Nothing here depends on the library under test. Lattices are explored by
//! breadth-first search, Fock operators are assembled from bit strings with
//! explicit Jordan-Wigner signs, ground states come from dense
//! diagonalization and indices from direct traces. Everything is slow on
//! purpose.

pub mod fock;
pub mod grid;
pub mod models;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C = Complex64;
pub type M = DMatrix<C>;

pub const PI: f64 = std::f64::consts::PI;

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Ascending eigenvalues and eigenvectors of a Hermitian matrix.
pub fn eigh(m: &M) -> (Vec<f64>, M) {
    let herm = (m + m.adjoint()) * c(0.5);
    let se = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = M::zeros(m.nrows(), m.ncols());
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Spectral norm through the eigenvalues of `A* A`.
pub fn opnorm(m: &M) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let (v, _) = eigh(&(m.adjoint() * m));
    v.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub fn commutator(a: &M, b: &M) -> M {
    a * b - b * a
}

/// `exp(−i s H)` for Hermitian `H`.
pub fn expm_herm(h: &M, s: f64) -> M {
    let (v, u) = eigh(h);
    let d = M::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&e| C::from_polar(1.0, -s * e))));
    &u * d * u.adjoint()
}

/// Numerical radius `max_{|v|=1} |<v, A v>|`: the top eigenvalue of
/// `Re(e^{iθ} A)` maximized over θ by repeatedly zooming a uniform scan.
pub fn numerical_radius(a: &M) -> f64 {
    let top = |th: f64| {
        let r = (a * C::from_polar(1.0, th) + a.adjoint() * C::from_polar(1.0, -th)) * c(0.5);
        *eigh(&r).0.last().unwrap()
    };
    let (mut centre, mut half) = (PI, PI);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..6 {
        let k = 240;
        let mut arg = centre;
        for i in 0..=k {
            let th = centre - half + 2.0 * half * i as f64 / k as f64;
            let v = top(th);
            if v > best {
                best = v;
                arg = th;
            }
        }
        centre = arg;
        half *= 4.0 / k as f64;
    }
    best
}

pub fn integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Angle in `(−π, π]`.
pub fn wrap(a: f64) -> f64 {
    let mut x = a.rem_euclid(2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Smooth step `e^{−1/x} / (e^{−1/x} + e^{−1/(1−x)})` on `[0, 1]`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / x).exp();
        let b = (-1.0 / (1.0 - x)).exp();
        a / (a + b)
    }
}

/// Odd filter: `1/ω` outside the gap, `S(|ω|/γ)/ω` inside.
pub fn filter_f(gamma: f64, w: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else if w.abs() >= gamma {
        1.0 / w
    } else {
        smooth_step(w.abs() / gamma) / w
    }
}

/// Gauss-Legendre rule on `[a, b]` with `panels` panels of `order` points,
/// nodes from Newton iteration on the Legendre recurrence.
pub fn quadrature(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let mut base = Vec::new();
    for i in 0..order {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=order {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
        base.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for &(x, w) in &base {
            out.push((lo + 0.5 * h * (x + 1.0), 0.5 * h * w));
        }
    }
    out
}

/// `A = V diag-filtered V*` with `A_jk = −i f(E_j − E_k) (V* B V)_jk`.
pub fn filtered(values: &[f64], vectors: &M, b: &M, kernel: impl Fn(f64) -> C) -> M {
    let mut m = vectors.adjoint() * b * vectors;
    for j in 0..values.len() {
        for k in 0..values.len() {
            m[(j, k)] *= kernel(values[j] - values[k]);
        }
    }
    vectors * m * vectors.adjoint()
}

/// Fixed-step fourth-order Runge-Kutta for `i dF/dΦ = A(Φ) F`, `F(Φ') = 1`.
pub fn rk4_transport(gen: impl Fn(f64) -> M, phi: f64, phi_prime: f64, steps: usize) -> M {
    let n = gen(phi_prime).nrows();
    let mut f = M::identity(n, n);
    let h = (phi - phi_prime) / steps as f64;
    let mi = C::new(0.0, -1.0);
    for k in 0..steps {
        let x = phi_prime + k as f64 * h;
        let a0 = gen(x);
        let am = gen(x + 0.5 * h);
        let a1 = gen(x + h);
        let k1 = &a0 * &f * mi;
        let k2 = &am * (&f + &k1 * c(0.5 * h)) * mi;
        let k3 = &am * (&f + &k2 * c(0.5 * h)) * mi;
        let k4 = &a1 * (&f + &k3 * c(h)) * mi;
        f += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_polynomials() {
        let q = quadrature(0.0, 2.0, 3, 8);
        let s: f64 = q.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn numerical_radius_of_a_nilpotent() {
        let mut m = M::zeros(2, 2);
        m[(0, 1)] = C::from_polar(3.0, 0.7);
        assert!((numerical_radius(&m) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rk4_matches_exponential() {
        let h = M::from_fn(3, 3, |i, j| if i == j { c(i as f64) } else { C::new(0.1, (i as f64) - (j as f64)) });
        let h = (&h + h.adjoint()) * c(0.5);
        let f = rk4_transport(|_| h.clone(), 1.0, 0.0, 1600);
        let d = opnorm(&(f - expm_herm(&h, 1.0)));
        assert!(d < 1e-10, "{d}");
    }
}
