//! Model Hamiltonians written out bond by bond.

use crate::grid::Grid;
use crate::{c, C, M};

/// One-particle Harper matrix: `t` on every `e1` bond, `t e^{i(φ x1 − Φ)}` on
/// the `e2` bond leaving `x` (absent on rings), `−μ` on the diagonal.
pub fn harper(g: &Grid, t: f64, mu: f64, phi: f64, flux: f64) -> M {
    let mut h = M::zeros(g.n(), g.n());
    for s in 0..g.n() {
        let (x1, x2) = g.xy(s);
        let (x1i, x2i) = (x1 as isize, x2 as isize);
        let y = g.site(x1i + 1, x2i);
        h[(y, s)] += c(t);
        h[(s, y)] += c(t);
        if g.l2 > 1 {
            let z = g.site(x1i, x2i + 1);
            let a = C::from_polar(t, phi * x1 as f64 - flux);
            h[(z, s)] += a;
            h[(s, z)] += a.conj();
        }
        h[(s, s)] -= c(mu);
    }
    h
}

/// `∂_Φ` of [`harper`].
pub fn harper_d_flux(g: &Grid, t: f64, phi: f64, flux: f64) -> M {
    let mut h = M::zeros(g.n(), g.n());
    if g.l2 == 1 {
        return h;
    }
    for s in 0..g.n() {
        let (x1, x2) = g.xy(s);
        let z = g.site(x1 as isize, x2 as isize + 1);
        let a = C::from_polar(t, phi * x1 as f64 - flux) * C::new(0.0, -1.0);
        h[(z, s)] += a;
        h[(s, z)] += a.conj();
    }
    h
}

/// Ring hopping `t`, chemical potential `μ` and the pairs `(x, x+1, V)`.
pub fn cdw(l: usize, t: f64, v: f64, mu: f64) -> (M, Vec<(usize, usize, f64)>) {
    let g = Grid::new(l, 1);
    let h = harper(&g, t, mu, 0.0, 0.0);
    let pairs = (0..l).map(|x| (x, (x + 1) % l, v)).collect();
    (h, pairs)
}

/// Alternating `t1` (bonds leaving even columns) and `t2`, rungs `t_perp`,
/// potential `Δ(−1)^{x1} − μ` and chain repulsion `u`.
pub fn dimerized(g: &Grid, t1: f64, t2: f64, t_perp: f64, delta: f64, u: f64, mu: f64) -> (M, Vec<(usize, usize, f64)>) {
    let mut h = M::zeros(g.n(), g.n());
    let mut pairs = Vec::new();
    for s in 0..g.n() {
        let (x1, x2) = g.xy(s);
        let (x1i, x2i) = (x1 as isize, x2 as isize);
        let y = g.site(x1i + 1, x2i);
        let t = if x1 % 2 == 0 { t1 } else { t2 };
        h[(y, s)] += c(t);
        h[(s, y)] += c(t);
        if g.l2 > 1 {
            let z = g.site(x1i, x2i + 1);
            h[(z, s)] += c(t_perp);
            h[(s, z)] += c(t_perp);
        }
        h[(s, s)] += c(if x1 % 2 == 0 { delta } else { -delta } - mu);
        if u != 0.0 {
            pairs.push((s, y, u));
        }
    }
    (h, pairs)
}

/// `u_{x, y} = 1` for `x = y − k e1`: `Γ(u) c*_y Γ(u)* = c*_{y − k e1}`.
pub fn translation(g: &Grid, k: isize) -> M {
    let mut u = M::zeros(g.n(), g.n());
    for s in 0..g.n() {
        let (x1, x2) = g.xy(s);
        u[(g.site(x1 as isize - k, x2 as isize), s)] = c(1.0);
    }
    u
}

/// Magnetic translation `U c*_y U* = e^{−i φ y2} c*_{y − e1}`.
pub fn magnetic_translation(g: &Grid, phi: f64) -> M {
    let mut u = M::zeros(g.n(), g.n());
    for s in 0..g.n() {
        let (x1, x2) = g.xy(s);
        u[(g.site(x1 as isize - 1, x2 as isize), s)] = C::from_polar(1.0, -phi * x2 as f64);
    }
    u
}

/// Gauge transformation `exp(−iΔ Σ x2 q_x)`.
pub fn gauge(g: &Grid, delta: f64) -> M {
    M::from_diagonal(&nalgebra::DVector::from_iterator(
        g.n(),
        (0..g.n()).map(|s| C::from_polar(1.0, -delta * g.xy(s).1 as f64)),
    ))
}
