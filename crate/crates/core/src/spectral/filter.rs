use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{composite_rule, C64, I, ZERO};

/// Smooth monotone step on `[0, 1]`: 0 below, 1 above, `S(x) + S(1 − x) = 1`.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let h = |y: f64| (-1.0 / y).exp();
    let a = h(x);
    a / (a + h(1.0 - x))
}

/// Completion of `Ŵ` inside `|ω| < γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Interior {
    /// `f(ω) = S(|ω|/γ)/ω`, infinitely differentiable.
    #[default]
    Smooth,
    /// `f(ω) = (ω/γ²)(2 − ω²/γ²)`, matched to `1/ω` in value and slope.
    Cubic,
}

/// Quadrature parameters for the time-domain filter.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TimeGrid {
    /// Truncation `T = horizon / γ`.
    pub horizon: f64,
    /// Gauss-Legendre order per panel.
    pub order: usize,
    /// Spacing of the frequency grid in units of `γ`.
    pub omega_step: f64,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { horizon: 400.0, order: 10, omega_step: 1.0 / 200.0 }
    }
}

/// Filter with `Ŵ(ω) = −1/(iω)` for `|ω| ≥ γ`, using
/// `Ŵ(ω) = ∫ W(t) e^{−iωt} dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FilterSpec {
    pub gamma: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub interior: Interior,
    #[cfg_attr(feature = "serde", serde(default))]
    pub time_grid: TimeGrid,
}

impl FilterSpec {
    pub fn new(gamma: f64) -> Result<Self> {
        let s = Self { gamma, interior: Interior::Smooth, time_grid: TimeGrid::default() };
        s.validate()?;
        Ok(s)
    }

    pub fn with_interior(mut self, interior: Interior) -> Self {
        self.interior = interior;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::Filter("gamma must be positive".into()));
        }
        let g = &self.time_grid;
        if !(g.horizon > 0.0) || g.order == 0 || !(g.omega_step > 0.0) {
            return Err(Error::Filter("time grid parameters must be positive".into()));
        }
        Ok(())
    }

    /// Real odd function with `Ŵ = i f`.
    pub fn f(&self, w: f64) -> f64 {
        let a = w.abs();
        if a >= self.gamma {
            return 1.0 / w;
        }
        if a == 0.0 {
            return 0.0;
        }
        let x = a / self.gamma;
        match self.interior {
            Interior::Smooth => smooth_step(x) / w,
            Interior::Cubic => w / (self.gamma * self.gamma) * (2.0 - x * x),
        }
    }

    /// `Ŵ(ω)`.
    pub fn w_hat(&self, w: f64) -> C64 {
        I * self.f(w)
    }

    /// Low-frequency weight `g(ω) = 1 − ω f(ω)`, vanishing for `|ω| ≥ γ`.
    pub fn low_pass(&self, w: f64) -> f64 {
        1.0 - w * self.f(w)
    }

    /// `W(t) = −sgn(t)/2 + (1/π) ∫_0^γ g(ω) sin(ωt)/ω dω`.
    pub fn w_time(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let order = self.time_grid.order;
        let panels = ((self.gamma * t.abs() / PI).ceil() as usize * 2).max(16);
        let (nodes, weights) = composite_rule(0.0, self.gamma, panels, order);
        let mut acc = 0.0;
        for (w, c) in nodes.iter().zip(&weights) {
            acc += c * self.low_pass(*w) * (w * t).sin() / w;
        }
        -0.5 * t.signum() + acc / PI
    }

    pub fn horizon(&self) -> f64 {
        self.time_grid.horizon / self.gamma
    }

    /// Nodes and weights on `[0, T]` fine enough for frequencies up to `omega_max`.
    pub(crate) fn time_rule(&self, omega_max: f64) -> (Vec<f64>, Vec<f64>) {
        let t_max = self.horizon();
        let scale = omega_max.max(self.gamma);
        let panels = ((t_max * scale / PI).ceil() as usize).max(64);
        composite_rule(0.0, t_max, panels, self.time_grid.order)
    }

    /// Samples of `κ(ω) = ∫_{−T}^{T} W(t) e^{iωt} dt` and its derivative on
    /// the grid `ω_k = k h`, `0 ≤ ω_k ≤ omega_max + h`.
    pub(crate) fn kappa_table(&self, omega_max: f64) -> KappaTable {
        let h = self.time_grid.omega_step * self.gamma;
        let m = (omega_max / h).ceil() as usize + 1;
        let (nodes, weights) = self.time_rule(omega_max + 2.0 * h);
        let wt: Vec<f64> = nodes.iter().zip(&weights).map(|(t, c)| c * self.w_time(*t)).collect();
        let mut val = alloc::vec![ZERO; m + 1];
        let mut der = alloc::vec![ZERO; m + 1];
        // rotate e^{i ω_k t} along the grid, re-anchored every 256 steps
        let mut phase: Vec<C64> = alloc::vec![C64::new(1.0, 0.0); nodes.len()];
        let step: Vec<C64> = nodes.iter().map(|t| C64::from_polar(1.0, h * t)).collect();
        for k in 0..=m {
            if k % 256 == 0 {
                for (p, t) in phase.iter_mut().zip(&nodes) {
                    *p = C64::from_polar(1.0, k as f64 * h * t);
                }
            }
            let mut s = 0.0;
            let mut c = 0.0;
            for ((p, w), t) in phase.iter().zip(&wt).zip(&nodes) {
                s += w * p.im;
                c += w * t * p.re;
            }
            val[k] = I * (2.0 * s);
            der[k] = I * (2.0 * c);
            for (p, st) in phase.iter_mut().zip(&step) {
                *p *= st;
            }
        }
        let tail = self.w_time(self.horizon()).abs();
        KappaTable { h, val, der, nodes, wt, tail }
    }
}

/// Tabulated time-integral kernel.
#[derive(Debug, Clone)]
pub(crate) struct KappaTable {
    pub h: f64,
    pub val: Vec<C64>,
    pub der: Vec<C64>,
    pub nodes: Vec<f64>,
    pub wt: Vec<f64>,
    /// `|W(T)|` at the truncation time.
    pub tail: f64,
}

impl KappaTable {
    pub fn eval(&self, w: f64) -> C64 {
        hermite_odd(self.h, &self.val, &self.der, w)
    }

    /// Direct quadrature at one frequency.
    pub fn direct(&self, w: f64) -> C64 {
        let s: f64 = self.nodes.iter().zip(&self.wt).map(|(t, c)| c * (w * t).sin()).sum();
        I * (2.0 * s)
    }

    /// Largest interpolation defect at cell midpoints (sampled).
    pub fn interpolation_error(&self, samples: usize) -> f64 {
        let cells = self.val.len() - 1;
        let stride = (cells / samples.max(1)).max(1);
        (0..cells)
            .step_by(stride)
            .map(|k| {
                let w = (k as f64 + 0.5) * self.h;
                (self.eval(w) - self.direct(w)).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Cubic Hermite interpolation of an odd function sampled on `k h`, `k ≥ 0`.
pub(crate) fn hermite_odd(h: f64, val: &[C64], der: &[C64], w: f64) -> C64 {
    let a = w.abs();
    let x = a / h;
    let k = (x.floor() as usize).min(val.len() - 2);
    let s = x - k as f64;
    let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
    let h10 = s * s * s - 2.0 * s * s + s;
    let h01 = -2.0 * s * s * s + 3.0 * s * s;
    let h11 = s * s * s - s * s;
    let v = val[k] * h00 + der[k] * (h10 * h) + val[k + 1] * h01 + der[k + 1] * (h11 * h);
    if w < 0.0 {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outside_the_gap_it_is_exact() {
        for interior in [Interior::Smooth, Interior::Cubic] {
            let f = FilterSpec::new(0.8).unwrap().with_interior(interior);
            assert_eq!(f.w_hat(0.8), C64::new(0.0, 1.0 / 0.8));
            assert_eq!(f.w_hat(-3.0), -f.w_hat(3.0));
            assert_eq!(f.w_hat(0.0), ZERO);
            for w in [0.1, 0.4, 0.79] {
                assert_eq!(f.f(-w), -f.f(w));
            }
        }
    }

    #[test]
    fn cubic_matches_slope() {
        let f = FilterSpec::new(1.0).unwrap().with_interior(Interior::Cubic);
        let h = 1e-6;
        let inner = (f.f(1.0 - h) - f.f(1.0 - 2.0 * h)) / h;
        assert!((inner + 1.0).abs() < 1e-4);
        assert!((f.f(1.0 - 1e-12) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn time_domain_limits() {
        let f = FilterSpec::new(1.0).unwrap();
        assert!((f.w_time(1e-9) + 0.5).abs() < 1e-8);
        assert!(f.w_time(400.0).abs() < 1e-6);
        assert_eq!(f.w_time(-2.0), -f.w_time(2.0));
    }

    #[test]
    fn step_is_symmetric() {
        for x in [0.1, 0.3, 0.5, 0.77] {
            assert!((smooth_step(x) + smooth_step(1.0 - x) - 1.0).abs() < 1e-15);
        }
    }
}
