//! Discrete tori, regions and the half-space geometry used by the index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Product of two cycles `Z/L1 x Z/L2`; `L2 = 1` is a ring.
///
/// Sites are indexed by `x1 + L1 * x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Torus {
    l1: usize,
    l2: usize,
}

/// A set of lattice sites, stored as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    mask: Vec<bool>,
}

fn cyclic(a: usize, b: usize, l: usize) -> usize {
    let d = a.abs_diff(b) % l;
    d.min(l - d)
}

impl Torus {
    pub fn new(l1: usize, l2: usize) -> Result<Self> {
        if l1 < 2 {
            return Err(Error::Lattice(format!("L1 = {l1} leaves no meaningful half space")));
        }
        if l2 < 1 {
            return Err(Error::Lattice("L2 must be positive".into()));
        }
        Ok(Self { l1, l2 })
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn n_sites(&self) -> usize {
        self.l1 * self.l2
    }

    pub fn site(&self, x1: usize, x2: usize) -> usize {
        (x1 % self.l1) + self.l1 * (x2 % self.l2)
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.l1, site / self.l1)
    }

    /// Neighbor in direction 1 or 2 (`+1` step), wrapping around.
    pub fn shift(&self, site: usize, dx1: isize, dx2: isize) -> usize {
        let (x1, x2) = self.coords(site);
        let y1 = (x1 as isize + dx1).rem_euclid(self.l1 as isize) as usize;
        let y2 = (x2 as isize + dx2).rem_euclid(self.l2 as isize) as usize;
        self.site(y1, y2)
    }

    /// Graph distance on the product of cycles.
    pub fn dist(&self, a: usize, b: usize) -> usize {
        let (a1, a2) = self.coords(a);
        let (b1, b2) = self.coords(b);
        cyclic(a1, b1, self.l1) + cyclic(a2, b2, self.l2)
    }

    pub fn diameter(&self) -> usize {
        self.l1 / 2 + self.l2 / 2
    }

    /// Nearest-neighbor pairs `(x, x + e)` for `e` in both directions.
    ///
    /// Degenerate bonds (`L = 1`) are skipped; `L = 2` bonds appear twice,
    /// matching a Hamiltonian summed over sites.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.n_sites() {
            out.push((s, self.shift(s, 1, 0)));
            if self.l2 > 1 {
                out.push((s, self.shift(s, 0, 1)));
            }
        }
        out
    }

    pub fn empty(&self) -> Region {
        Region { mask: vec![false; self.n_sites()] }
    }

    pub fn full(&self) -> Region {
        Region { mask: vec![true; self.n_sites()] }
    }

    pub fn region(&self, sites: &[usize]) -> Region {
        let mut r = self.empty();
        for &s in sites {
            r.mask[s % self.n_sites()] = true;
        }
        r
    }

    /// All sites whose first coordinate lies in `cols` (taken mod `L1`).
    pub fn columns<I: IntoIterator<Item = isize>>(&self, cols: I) -> Region {
        let mut r = self.empty();
        for c in cols {
            let x1 = c.rem_euclid(self.l1 as isize) as usize;
            for x2 in 0..self.l2 {
                r.mask[self.site(x1, x2)] = true;
            }
        }
        r
    }

    /// Sites within distance `r` of `region`.
    pub fn fatten(&self, region: &Region, r: usize) -> Region {
        let core: Vec<usize> = region.sites();
        let mut out = self.empty();
        if core.is_empty() {
            return out;
        }
        for s in 0..self.n_sites() {
            if core.iter().any(|&c| self.dist(s, c) <= r) {
                out.mask[s] = true;
            }
        }
        out
    }

    /// `S_(1) ∩ (Λ \ S)_(1)`.
    pub fn boundary(&self, region: &Region) -> Region {
        self.fatten(region, 1).intersect(&self.fatten(&region.complement(), 1))
    }

    pub fn region_dist(&self, a: &Region, b: &Region) -> Option<usize> {
        let sa = a.sites();
        let sb = b.sites();
        sa.iter().flat_map(|&x| sb.iter().map(move |&y| (x, y))).map(|(x, y)| self.dist(x, y)).min()
    }
}

impl Region {
    pub fn empty_of(n_sites: usize) -> Region {
        Region { mask: vec![false; n_sites] }
    }

    pub fn insert(&mut self, site: usize) {
        self.mask[site] = true;
    }

    pub fn contains(&self, site: usize) -> bool {
        self.mask.get(site).copied().unwrap_or(false)
    }

    pub fn sites(&self) -> Vec<usize> {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_sites(&self) -> usize {
        self.mask.len()
    }

    pub fn union(&self, other: &Region) -> Region {
        Region { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect() }
    }

    pub fn intersect(&self, other: &Region) -> Region {
        Region { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect() }
    }

    pub fn minus(&self, other: &Region) -> Region {
        Region { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && !*b).collect() }
    }

    pub fn complement(&self) -> Region {
        Region { mask: self.mask.iter().map(|m| !m).collect() }
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.intersect(other).is_empty()
    }

    /// Bit mask over the first 64 sites, used by the Fock space.
    pub fn bits(&self) -> u64 {
        self.mask.iter().enumerate().take(64).filter(|(_, &m)| m).fold(0u64, |acc, (i, _)| acc | (1u64 << i))
    }
}

/// `Γ = {0 <= x1 < L1/2}` with its two boundary components and the slabs
/// `Λ_±` next to them.
#[derive(Debug, Clone)]
pub struct HalfSpace {
    pub torus: Torus,
    pub gamma: Region,
    pub boundary_minus: Region,
    pub boundary_plus: Region,
    pub lambda_minus: Region,
    pub lambda_plus: Region,
    /// Requested slab radius `floor(c * L1)`.
    pub requested_radius: usize,
    /// Slab radius after clamping so that `Λ_-` and `Λ_+` stay disjoint.
    pub lambda_radius: usize,
    /// Radius of the neighborhoods `(∂_±)_(r)` used to split operators.
    pub split_radius: usize,
    /// `dist(∂_-, ∂_+)`.
    pub separation: usize,
}

impl HalfSpace {
    /// Builds the geometry with slab fraction `c` (radius `floor(c * L1)`).
    pub fn new(torus: Torus, c: f64) -> Result<Self> {
        let l1 = torus.l1();
        if l1 < 4 {
            return Err(Error::Lattice(format!("L1 = {l1} < 4: the two boundaries of the half space touch")));
        }
        let h = l1.div_ceil(2) as isize;
        let gamma = torus.columns(0..h);
        let boundary_minus = torus.columns([-1, 0]);
        let boundary_plus = torus.columns([h - 1, h]);
        if !boundary_minus.is_disjoint(&boundary_plus) {
            return Err(Error::Lattice("boundary components intersect".into()));
        }
        let separation = torus.region_dist(&boundary_minus, &boundary_plus).unwrap_or(0);
        let requested_radius = (c.max(0.0) * l1 as f64).floor() as usize;
        let max_disjoint = ((h as usize).saturating_sub(2)) / 2;
        let lambda_radius = requested_radius.min(max_disjoint);
        let lambda_minus = torus.fatten(&boundary_minus, lambda_radius).intersect(&gamma);
        let lambda_plus = torus.fatten(&boundary_plus, lambda_radius).intersect(&gamma);
        debug_assert!(lambda_minus.is_disjoint(&lambda_plus));
        let split_radius = (l1 / 4).min(separation.saturating_sub(1));
        Ok(Self {
            torus,
            gamma,
            boundary_minus,
            boundary_plus,
            lambda_minus,
            lambda_plus,
            requested_radius,
            lambda_radius,
            split_radius,
            separation,
        })
    }

    /// `(∂_-)_(r)` with the split radius.
    pub fn split_minus(&self) -> Region {
        self.torus.fatten(&self.boundary_minus, self.split_radius)
    }

    /// `(∂_+)_(r)` with the split radius.
    pub fn split_plus(&self) -> Region {
        self.torus.fatten(&self.boundary_plus, self.split_radius)
    }

    /// Overrides the split radius (kept below the boundary separation).
    pub fn with_split_radius(mut self, r: usize) -> Self {
        self.split_radius = r.min(self.separation.saturating_sub(1));
        self
    }

    /// Middle part `Γ \ (Λ_- ∪ Λ_+)`.
    pub fn middle(&self) -> Region {
        self.gamma.minus(&self.lambda_minus.union(&self.lambda_plus))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_and_torus_metrics() {
        let r = Torus::new(4, 1).unwrap();
        assert_eq!(r.n_sites(), 4);
        assert_eq!(r.diameter(), 2);
        let t = Torus::new(4, 4).unwrap();
        assert_eq!(t.dist(t.site(0, 0), t.site(2, 2)), 4);
        let t = Torus::new(6, 3).unwrap();
        assert_eq!(t.n_sites(), 18);
        assert_eq!(t.diameter(), 4);
        assert!(Torus::new(1, 4).is_err());
    }

    #[test]
    fn fattening_and_boundary() {
        let t = Torus::new(4, 4).unwrap();
        let s = t.region(&[t.site(1, 1)]);
        assert_eq!(t.fatten(&s, 0), s);
        assert_eq!(t.fatten(&s, 1).len(), 5);
        let t = Torus::new(6, 3).unwrap();
        assert_eq!(t.fatten(&t.columns([0]), 1), t.columns([5, 0, 1]));
        assert!(t.boundary(&t.empty()).is_empty());
        assert!(t.boundary(&t.full()).is_empty());
        let t = Torus::new(8, 3).unwrap();
        assert_eq!(t.boundary(&t.columns(0..4)), t.columns([3, 4, 7, 0]));
    }

    #[test]
    fn half_space_examples() {
        let g = HalfSpace::new(Torus::new(8, 2).unwrap(), 0.25).unwrap();
        assert_eq!(g.gamma, g.torus.columns(0..4));
        assert_eq!(g.boundary_minus, g.torus.columns([7, 0]));
        assert_eq!(g.boundary_plus, g.torus.columns([3, 4]));
        assert!(g.lambda_minus.is_disjoint(&g.lambda_plus));
        let g = HalfSpace::new(Torus::new(4, 1).unwrap(), 0.25).unwrap();
        assert_eq!(g.gamma.sites(), [0, 1]);
        assert_eq!(g.boundary_minus.sites(), [0, 3]);
        assert_eq!(g.boundary_plus.sites(), [1, 2]);
        let g = HalfSpace::new(Torus::new(6, 6).unwrap(), 0.25).unwrap();
        assert_eq!(g.separation, 2);
        assert!(HalfSpace::new(Torus::new(3, 2).unwrap(), 0.25).is_err());
    }

    #[test]
    fn separation_grows_linearly() {
        let seps: Vec<usize> =
            [4, 6, 8, 10].iter().map(|&l| HalfSpace::new(Torus::new(l, 2).unwrap(), 0.25).unwrap().separation).collect();
        assert_eq!(seps, [1, 2, 3, 4]);
    }
}
