//! Fermionic Fock spaces as explicit lists of occupation bit strings.
//!
//! Mode `j` is bit `j`; `c_j` and `c*_j` carry the sign `(−1)^{#occupied
//! modes below j}`.

use std::collections::HashMap;

use crate::{c, C, M};

pub fn annihilate(s: u64, j: usize) -> Option<(f64, u64)> {
    if s >> j & 1 == 0 {
        return None;
    }
    Some((sign_below(s, j), s & !(1 << j)))
}

pub fn create(s: u64, j: usize) -> Option<(f64, u64)> {
    if s >> j & 1 == 1 {
        return None;
    }
    Some((sign_below(s, j), s | (1 << j)))
}

fn sign_below(s: u64, j: usize) -> f64 {
    if (s & ((1u64 << j) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn bits(s: u64) -> Vec<usize> {
    (0..64).filter(|&j| s >> j & 1 == 1).collect()
}

#[derive(Debug, Clone)]
pub struct Space {
    pub n_sites: usize,
    pub states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl Space {
    fn from_states(n_sites: usize, states: Vec<u64>) -> Self {
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Self { n_sites, states, index }
    }

    /// All `2^n` configurations, indexed by their bit pattern.
    pub fn full(n: usize) -> Self {
        Self::from_states(n, (0..1u64 << n).collect())
    }

    /// Configurations with particle numbers in `ks`.
    pub fn sectors(n: usize, ks: &[usize]) -> Self {
        Self::from_states(n, (0..1u64 << n).filter(|s| ks.contains(&(s.count_ones() as usize))).collect())
    }

    pub fn sector(n: usize, k: usize) -> Self {
        Self::sectors(n, &[k])
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index(&self, s: u64) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == 1 << self.n_sites
    }

    /// Matrix with columns `|s> ↦ Σ amp |t>`; images outside the space are dropped.
    pub fn build(&self, f: impl Fn(u64) -> Vec<(C, u64)>) -> M {
        let mut m = M::zeros(self.dim(), self.dim());
        for (j, &s) in self.states.iter().enumerate() {
            for (amp, t) in f(s) {
                if let Some(i) = self.index(t) {
                    m[(i, j)] += amp;
                }
            }
        }
        m
    }

    pub fn diag(&self, f: impl Fn(u64) -> f64) -> M {
        self.build(|s| vec![(c(f(s)), s)])
    }

    /// `Q_S = Σ_{x ∈ S} q_x`.
    pub fn charge(&self, sites: &[usize]) -> M {
        self.diag(|s| sites.iter().filter(|&&x| s >> x & 1 == 1).count() as f64)
    }

    pub fn cdag(&self, j: usize) -> M {
        self.build(|s| create(s, j).map(|(g, t)| vec![(c(g), t)]).unwrap_or_default())
    }

    pub fn c(&self, j: usize) -> M {
        self.build(|s| annihilate(s, j).map(|(g, t)| vec![(c(g), t)]).unwrap_or_default())
    }

    /// `dΓ(h) = Σ_{x,y} h_{yx} c*_y c_x`, applied mode by mode.
    pub fn quadratic(&self, h: &M) -> M {
        let n = self.n_sites;
        self.build(|s| {
            let mut out = Vec::new();
            for x in 0..n {
                let Some((g1, s1)) = annihilate(s, x) else { continue };
                for y in 0..n {
                    let v = h[(y, x)];
                    if v == C::new(0.0, 0.0) {
                        continue;
                    }
                    if let Some((g2, s2)) = create(s1, y) {
                        out.push((v * (g1 * g2), s2));
                    }
                }
            }
            out
        })
    }

    /// `Σ coeff q_a q_b`.
    pub fn pairs(&self, list: &[(usize, usize, f64)]) -> M {
        self.diag(|s| list.iter().filter(|p| s >> p.0 & 1 == 1 && s >> p.1 & 1 == 1).map(|p| p.2).sum())
    }

    /// `Γ(u)`, defined by `Γ(u) c*_{j1} ⋯ c*_{jk} |0> = (u c*)_{j1} ⋯ (u c*)_{jk} |0>`
    /// with `(u c*)_j = Σ_x u_{xj} c*_x`.
    pub fn second_quantize(&self, u: &M) -> M {
        let n = self.n_sites;
        self.build(|s| {
            let mut v: HashMap<u64, C> = HashMap::from([(0u64, c(1.0))]);
            for j in bits(s).into_iter().rev() {
                let mut next: HashMap<u64, C> = HashMap::new();
                for (&t, &a) in &v {
                    for x in 0..n {
                        let ux = u[(x, j)];
                        if ux == C::new(0.0, 0.0) {
                            continue;
                        }
                        if let Some((g, t2)) = create(t, x) {
                            *next.entry(t2).or_insert(C::new(0.0, 0.0)) += a * ux * g;
                        }
                    }
                }
                v = next;
            }
            v.into_iter().map(|(t, a)| (a, t)).collect()
        })
    }

    /// `<0_C| A |0_C> ⊗ 1_C`, assembled as `Σ_T C*_T P_0 A P_0 C_T` over the
    /// subsets `T` of the complement `C`, where `C*_T` creates `T` in
    /// ascending order on the vacuum of `C`. Needs every particle number
    /// that the result touches.
    pub fn vacuum_condexp(&self, a: &M, region: &[usize]) -> M {
        let s_mask: u64 = region.iter().map(|&x| 1u64 << x).sum();
        // C*_T |s ∩ S> = g(s) |s>
        let g = |s: u64| -> f64 {
            let mut amp = 1.0;
            let mut t = s & s_mask;
            for y in bits(s & !s_mask).into_iter().rev() {
                let (sg, t2) = create(t, y).expect("mode of the complement");
                amp *= sg;
                t = t2;
            }
            debug_assert_eq!(t, s);
            amp
        };
        let mut out = M::zeros(self.dim(), self.dim());
        for (i, &si) in self.states.iter().enumerate() {
            for (j, &sj) in self.states.iter().enumerate() {
                if si & !s_mask != sj & !s_mask {
                    continue;
                }
                let (Some(ii), Some(jj)) = (self.index(si & s_mask), self.index(sj & s_mask)) else {
                    panic!("the vacuum slice needs particle number {}", (si & s_mask).count_ones());
                };
                out[(i, j)] = a[(ii, jj)] * (g(si) * g(sj));
            }
        }
        out
    }

    /// Normalized partial trace over the complement of `region` for even
    /// operators on the full space: the average over conjugation by
    /// `1, a_y, b_y, a_y b_y` for each Majorana pair of the complement.
    pub fn tracial_condexp(&self, a: &M, region: &[usize]) -> M {
        assert!(self.is_full(), "the Majorana twirl needs the full Fock space");
        let mut out = a.clone();
        for y in (0..self.n_sites).filter(|y| !region.contains(y)) {
            // a_y|s> = σ|s ⊕ y>, b_y|s> = ±iσ|s ⊕ y>
            let sig = |s: u64| sign_below(s, y);
            let ma = |s: u64| c(sig(s));
            let mb = |s: u64| C::new(0.0, if s >> y & 1 == 0 { sig(s) } else { -sig(s) });
            let flip = 1u64 << y;
            let conj = |m: &M, p: &dyn Fn(u64) -> C| -> M {
                let mut r = M::zeros(m.nrows(), m.ncols());
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let (si, sj) = (i as u64, j as u64);
                        r[((si ^ flip) as usize, (sj ^ flip) as usize)] = p(si) * m[(i, j)] * p(sj).conj();
                    }
                }
                r
            };
            let xa = conj(&out, &ma);
            let xb = conj(&out, &mb);
            let xab = conj(&xb, &ma);
            out = (&out + xa + xb + xab) * c(0.25);
        }
        out
    }
}

/// Lowest `p` eigenvectors.
pub fn ground_frame(h: &M, p: usize) -> (Vec<f64>, M) {
    let (e, v) = crate::eigh(h);
    (e, v.columns(0, p).into_owned())
}
