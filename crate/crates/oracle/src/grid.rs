//! Periodic `L1 × L2` grids explored by breadth-first search.

use std::collections::{BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub l1: usize,
    pub l2: usize,
}

impl Grid {
    pub fn new(l1: usize, l2: usize) -> Self {
        Self { l1, l2 }
    }

    pub fn n(&self) -> usize {
        self.l1 * self.l2
    }

    pub fn site(&self, x1: isize, x2: isize) -> usize {
        x1.rem_euclid(self.l1 as isize) as usize + self.l1 * x2.rem_euclid(self.l2 as isize) as usize
    }

    pub fn xy(&self, s: usize) -> (usize, usize) {
        (s % self.l1, s / self.l1)
    }

    pub fn neighbours(&self, s: usize) -> Vec<usize> {
        let (x1, x2) = self.xy(s);
        let (x1, x2) = (x1 as isize, x2 as isize);
        let set: BTreeSet<usize> =
            [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().map(|(a, b)| self.site(x1 + a, x2 + b)).filter(|&t| t != s).collect();
        set.into_iter().collect()
    }

    /// Graph distances from a set of sources.
    pub fn bfs(&self, sources: &[usize]) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.n()];
        let mut q = VecDeque::new();
        for &s in sources {
            d[s] = 0;
            q.push_back(s);
        }
        while let Some(s) = q.pop_front() {
            for t in self.neighbours(s) {
                if d[t] == usize::MAX {
                    d[t] = d[s] + 1;
                    q.push_back(t);
                }
            }
        }
        d
    }

    pub fn dist(&self, a: usize, b: usize) -> usize {
        self.bfs(&[a])[b]
    }

    pub fn diameter(&self) -> usize {
        (0..self.n()).map(|s| *self.bfs(&[s]).iter().max().unwrap()).max().unwrap()
    }

    pub fn set_dist(&self, a: &[usize], b: &[usize]) -> usize {
        let d = self.bfs(a);
        b.iter().map(|&s| d[s]).min().unwrap()
    }

    /// Sites within distance `r` of `set`, ascending.
    pub fn ball(&self, set: &[usize], r: usize) -> Vec<usize> {
        let d = self.bfs(set);
        (0..self.n()).filter(|&s| d[s] <= r).collect()
    }

    pub fn columns(&self, cols: &[isize]) -> Vec<usize> {
        let keep: BTreeSet<usize> = cols.iter().map(|c| c.rem_euclid(self.l1 as isize) as usize).collect();
        (0..self.n()).filter(|&s| keep.contains(&(s % self.l1))).collect()
    }

    /// Sites of `set` with a neighbour outside, together with outside sites
    /// with a neighbour inside.
    pub fn edge(&self, set: &[usize]) -> Vec<usize> {
        let inside: BTreeSet<usize> = set.iter().copied().collect();
        (0..self.n())
            .filter(|&s| self.neighbours(s).iter().any(|t| inside.contains(t) != inside.contains(&s)))
            .collect()
    }

    /// Left half `{0 ≤ x1 < ⌈L1/2⌉}`.
    pub fn half(&self) -> Vec<usize> {
        let h = self.l1.div_ceil(2) as isize;
        self.columns(&(0..h).collect::<Vec<_>>())
    }

    /// Boundary columns at the left and right ends of the half.
    pub fn boundaries(&self) -> (Vec<usize>, Vec<usize>) {
        let h = self.l1.div_ceil(2) as isize;
        (self.columns(&[-1, 0]), self.columns(&[h - 1, h]))
    }

    /// Neighbourhood radius used to split operators at the two boundaries.
    pub fn split_radius(&self) -> usize {
        let (m, p) = self.boundaries();
        (self.l1 / 4).min(self.set_dist(&m, &p).saturating_sub(1))
    }
}
