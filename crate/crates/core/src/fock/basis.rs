use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::Torus;

/// Default cap on the number of basis states.
pub const DEFAULT_DIM_CAP: usize = 20_000_000;

/// Occupation bitstrings with a fixed particle number, in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sector {
    n: usize,
    states: Vec<u64>,
}

impl Sector {
    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, i: usize) -> u64 {
        self.states[i]
    }

    pub fn index(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
}

/// Fock space of spinless fermions restricted to a contiguous range of
/// particle numbers.
///
/// States are grouped by particle number (ascending) and ordered
/// lexicographically inside each group; the flat index follows that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    n_sites: usize,
    sectors: Vec<Sector>,
    offsets: Vec<usize>,
}

/// All `k`-subsets of `mask`, as ascending bitstrings.
pub fn subsets_with_popcount(mask: u64, k: usize) -> Vec<u64> {
    let bits: Vec<u32> = (0..64).filter(|b| mask >> b & 1 == 1).collect();
    let mut out = Vec::new();
    if k > bits.len() {
        return out;
    }
    let m = bits.len();
    if k == 0 {
        out.push(0);
        return out;
    }
    if k == m {
        out.push(mask);
        return out;
    }
    // Gosper's hack over compressed positions, then scatter.
    let mut c: u64 = (1u64 << k) - 1;
    let limit: u64 = if m == 64 { u64::MAX } else { 1u64 << m };
    loop {
        let mut s = 0u64;
        let mut rest = c;
        while rest != 0 {
            let i = rest.trailing_zeros();
            s |= 1u64 << bits[i as usize];
            rest &= rest - 1;
        }
        out.push(s);
        let u = c & c.wrapping_neg();
        let v = c.wrapping_add(u);
        if v == 0 || v >= limit {
            break;
        }
        c = v + (((v ^ c) / u) >> 2);
        if c >= limit {
            break;
        }
    }
    out.sort_unstable();
    out
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

impl FockBasis {
    /// Sectors `n_lo..=n_hi` on `n_sites` modes.
    pub fn with_range(n_sites: usize, n_lo: usize, n_hi: usize, cap: usize) -> Result<Self> {
        if n_sites > 64 {
            return Err(Error::Shape("at most 64 sites fit a bitstring".into()));
        }
        if n_lo > n_hi || n_hi > n_sites {
            return Err(Error::Shape(alloc::format!(
                "particle range {n_lo}..={n_hi} invalid for {n_sites} sites"
            )));
        }
        let dim: u128 = (n_lo..=n_hi).map(|n| binomial(n_sites, n)).sum();
        if dim > cap as u128 {
            return Err(Error::DimensionCap { dim: dim.min(usize::MAX as u128) as usize, cap });
        }
        let full = if n_sites == 64 { u64::MAX } else { (1u64 << n_sites) - 1 };
        let sectors: Vec<Sector> =
            (n_lo..=n_hi).map(|n| Sector { n, states: subsets_with_popcount(full, n) }).collect();
        let mut offsets = Vec::with_capacity(sectors.len());
        let mut acc = 0;
        for s in &sectors {
            offsets.push(acc);
            acc += s.dim();
        }
        Ok(Self { n_sites, sectors, offsets })
    }

    /// Fixed particle number `N` (or the full Fock space when `None`).
    pub fn new(lattice: &Torus, n: Option<usize>) -> Result<Self> {
        Self::with_cap(lattice, n, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(lattice: &Torus, n: Option<usize>, cap: usize) -> Result<Self> {
        let sites = lattice.n_sites();
        match n {
            Some(n) => {
                if n > sites {
                    return Err(Error::Shape(alloc::format!("N = {n} exceeds {sites} sites")));
                }
                Self::with_range(sites, n, n, cap)
            }
            None => Self::with_range(sites, 0, sites, cap),
        }
    }

    /// Full Fock space on `n_sites` modes.
    pub fn full(n_sites: usize) -> Result<Self> {
        Self::with_range(n_sites, 0, n_sites, DEFAULT_DIM_CAP)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn site_mask(&self) -> u64 {
        if self.n_sites == 64 {
            u64::MAX
        } else {
            (1u64 << self.n_sites) - 1
        }
    }

    pub fn dim(&self) -> usize {
        self.sectors.iter().map(Sector::dim).sum()
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn n_blocks(&self) -> usize {
        self.sectors.len()
    }

    pub fn block(&self, b: usize) -> &Sector {
        &self.sectors[b]
    }

    /// Block holding `n` particles.
    pub fn block_of(&self, n: usize) -> Option<usize> {
        self.sectors.iter().position(|s| s.n == n)
    }

    pub fn is_full(&self) -> bool {
        self.sectors.len() == self.n_sites + 1
    }

    /// The single particle number if the basis is one sector.
    pub fn particle_number(&self) -> Option<usize> {
        (self.sectors.len() == 1).then(|| self.sectors[0].n)
    }

    pub fn offset(&self, b: usize) -> usize {
        self.offsets[b]
    }

    /// Flat index of a bitstring.
    pub fn index(&self, state: u64) -> Option<usize> {
        let n = state.count_ones() as usize;
        let b = self.block_of(n)?;
        self.sectors[b].index(state).map(|i| self.offsets[b] + i)
    }

    /// `(block, local index)` of a flat index.
    pub fn locate(&self, flat: usize) -> (usize, usize) {
        let b = match self.offsets.binary_search(&flat) {
            Ok(mut b) => {
                while b + 1 < self.offsets.len() && self.offsets[b + 1] == flat {
                    b += 1;
                }
                b
            }
            Err(b) => b - 1,
        };
        (b, flat - self.offsets[b])
    }

    pub fn state(&self, flat: usize) -> u64 {
        let (b, i) = self.locate(flat);
        self.sectors[b].states[i]
    }

    /// Sub-basis made of one block.
    pub fn single(&self, b: usize) -> Self {
        Self { n_sites: self.n_sites, sectors: alloc::vec![self.sectors[b].clone()], offsets: alloc::vec![0] }
    }
}

/// `(-1)^(number of occupied modes below `site`)`.
pub fn jw_sign(state: u64, site: usize) -> f64 {
    let below = state & ((1u64 << site) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c*_to c_from |state>` as `(sign, new state)`, or `None` if it vanishes.
pub fn hop(state: u64, from: usize, to: usize) -> Option<(f64, u64)> {
    if state >> from & 1 == 0 {
        return None;
    }
    let mid = state & !(1u64 << from);
    if mid >> to & 1 == 1 {
        return None;
    }
    let s = jw_sign(state, from) * jw_sign(mid, to);
    Some((s, mid | (1u64 << to)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        let ring = Torus::new(4, 1).unwrap();
        assert_eq!(FockBasis::new(&ring, Some(2)).unwrap().dim(), 6);
        let sq = Torus::new(2, 2).unwrap();
        assert_eq!(FockBasis::new(&sq, None).unwrap().dim(), 16);
        let ring8 = Torus::new(8, 1).unwrap();
        assert_eq!(FockBasis::new(&ring8, Some(4)).unwrap().dim(), 70);
        assert!(matches!(
            FockBasis::with_cap(&ring8, None, 100),
            Err(Error::DimensionCap { dim: 256, cap: 100 })
        ));
    }

    #[test]
    fn ordering_and_lookup() {
        let b = FockBasis::full(4).unwrap();
        for f in 0..b.dim() {
            assert_eq!(b.index(b.state(f)), Some(f));
        }
        let s = b.block(b.block_of(2).unwrap()).states();
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
    }

    #[test]
    fn subsets_of_sparse_mask() {
        let s = subsets_with_popcount(0b1010_0101, 2);
        assert_eq!(s.len(), 6);
        assert!(s.iter().all(|x| x & !0b1010_0101 == 0 && x.count_ones() == 2));
        assert_eq!(subsets_with_popcount(0b11, 3), Vec::<u64>::new());
        assert_eq!(subsets_with_popcount(0, 0), [0]);
    }

    #[test]
    fn hopping_signs() {
        // c*_2 c_0 |1,1,0> : pass mode 1 twice -> one sign flip on the way in
        assert_eq!(hop(0b011, 0, 2), Some((-1.0, 0b110)));
        assert_eq!(hop(0b001, 0, 1), Some((1.0, 0b010)));
        assert_eq!(hop(0b010, 0, 1), None);
    }
}
