use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::basis::{hop, jw_sign, FockBasis};
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::lattice::Region;
use crate::linalg::{self, CMat, CVec, Eigh, C64, ZERO};

/// Which half of a fermion pair to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FermionKind {
    Create,
    Annihilate,
}

/// Sparse complex matrix on the flat index of a [`FockBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    rows: Vec<Vec<(usize, C64)>>,
    pub support: Option<Region>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, rows: (0..dim).map(|_| Vec::new()).collect(), support: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `v` to entry `(r, c)`.
    pub fn add_entry(&mut self, r: usize, c: usize, v: C64) {
        let row = &mut self.rows[r];
        match row.binary_search_by_key(&c, |e| e.0) {
            Ok(i) => row[i].1 += v,
            Err(i) => row.insert(i, (c, v)),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let row = &self.rows[r];
        row.binary_search_by_key(&c, |e| e.0).map(|i| row[i].1).unwrap_or(ZERO)
    }

    pub fn row(&self, r: usize) -> &[(usize, C64)] {
        &self.rows[r]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Drops entries with modulus at most `tol`.
    pub fn prune(&mut self, tol: f64) {
        for row in &mut self.rows {
            row.retain(|e| e.1.norm() > tol);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        let mut out = CVec::zeros(self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = ZERO;
            for &(c, a) in row {
                acc += a * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            for e in row.iter_mut() {
                e.1 *= s;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for (r, c, v) in other.entries() {
            out.add_entry(r, c, v);
        }
        out.support = union_support(&self.support, &other.support);
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (r, c, v) in self.entries() {
            out.add_entry(c, r, v.conj());
        }
        out.support = self.support.clone();
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut out = Self::zeros(self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    out.add_entry(r, c, a * b);
                }
            }
        }
        out.support = union_support(&self.support, &other.support);
        Ok(out)
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.entries().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }

    /// Spectral norm (dense below [`linalg::DENSE_NORM_CAP`], power iteration above).
    pub fn norm(&self) -> f64 {
        if self.dim <= linalg::DENSE_NORM_CAP {
            return linalg::norm2(&self.to_dense());
        }
        let adj = self.adjoint();
        power_norm_op(|v| adj.apply(&self.apply(v)), self.dim)
    }

    /// Splits a number-conserving operator into per-sector dense blocks.
    ///
    /// Fails with the size of the largest particle-number-changing entry, or
    /// when a sector is too large to hold densely.
    pub fn to_block(&self, basis: &FockBasis) -> Result<BlockOperator> {
        check_dim(self.dim, basis.dim())?;
        if let Some(big) = basis.sectors().iter().map(|s| s.dim()).find(|&d| d > crate::spectral::DENSE_CAP) {
            return Err(Error::DimensionCap { dim: big, cap: crate::spectral::DENSE_CAP });
        }
        let mut blocks: Vec<CMat> = basis.sectors().iter().map(|s| CMat::zeros(s.dim(), s.dim())).collect();
        let mut leak = 0.0f64;
        for (r, c, v) in self.entries() {
            let (br, ir) = basis.locate(r);
            let (bc, ic) = basis.locate(c);
            if br == bc {
                blocks[br][(ir, ic)] += v;
            } else {
                leak = leak.max(v.norm());
            }
        }
        if leak > 0.0 {
            return Err(Error::NotNumberConserving(leak));
        }
        Ok(BlockOperator { blocks, support: self.support.clone() })
    }

    /// Restriction to one sector block (entries leaving the block are dropped).
    pub fn block_apply(&self, basis: &FockBasis, b: usize, v: &CVec) -> CVec {
        let off = basis.offset(b);
        let d = basis.block(b).dim();
        let mut out = CVec::zeros(d);
        for i in 0..d {
            let mut acc = ZERO;
            for &(c, a) in &self.rows[off + i] {
                if c >= off && c < off + d {
                    acc += a * v[c - off];
                }
            }
            out[i] = acc;
        }
        out
    }

    /// Dense copy of one sector block.
    pub fn block_dense(&self, basis: &FockBasis, b: usize) -> CMat {
        let off = basis.offset(b);
        let d = basis.block(b).dim();
        let mut m = CMat::zeros(d, d);
        for i in 0..d {
            for &(c, a) in &self.rows[off + i] {
                if c >= off && c < off + d {
                    m[(i, c - off)] += a;
                }
            }
        }
        m
    }

    /// Coordinate list `row col re im`, one entry per line.
    pub fn to_coo(&self) -> String {
        let mut s = String::new();
        for (r, c, v) in self.entries() {
            let _ = writeln!(s, "{r} {c} {:.17e} {:.17e}", v.re, v.im);
        }
        s
    }
}

/// Number-conserving operator stored as one dense block per particle number.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub blocks: Vec<CMat>,
    pub support: Option<Region>,
}

fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("dimension {a} vs {b}")));
    }
    Ok(())
}

fn union_support(a: &Option<Region>, b: &Option<Region>) -> Option<Region> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.union(b)),
        _ => None,
    }
}

fn power_norm_op<F: Fn(&CVec) -> CVec>(gram: F, dim: usize) -> f64 {
    let mut v = linalg::seeded_vector(dim, 0x5eed);
    let mut last = 0.0;
    for _ in 0..2000 {
        let w = gram(&v);
        let lam = w.norm();
        if lam == 0.0 {
            return 0.0;
        }
        v = w / C64::new(lam, 0.0);
        if (lam - last).abs() <= 1e-10 * lam {
            return lam.sqrt();
        }
        last = lam;
    }
    last.sqrt()
}

impl BlockOperator {
    pub fn zeros(basis: &FockBasis) -> Self {
        Self { blocks: basis.sectors().iter().map(|s| CMat::zeros(s.dim(), s.dim())).collect(), support: None }
    }

    pub fn identity(basis: &FockBasis) -> Self {
        Self {
            blocks: basis.sectors().iter().map(|s| CMat::identity(s.dim(), s.dim())).collect(),
            support: Some(Region::empty_of(basis.n_sites())),
        }
    }

    /// Diagonal operator with entries `f(bitstring)`.
    pub fn diagonal<F: Fn(u64) -> C64>(basis: &FockBasis, f: F) -> Self {
        let blocks = basis
            .sectors()
            .iter()
            .map(|s| {
                let mut m = CMat::zeros(s.dim(), s.dim());
                for (i, &st) in s.states().iter().enumerate() {
                    m[(i, i)] = f(st);
                }
                m
            })
            .collect();
        Self { blocks, support: None }
    }

    pub fn with_support(mut self, support: Option<Region>) -> Self {
        self.support = support;
        self
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.nrows()).sum()
    }

    fn zip_with<F: Fn(&CMat, &CMat) -> CMat>(&self, other: &Self, f: F) -> Result<Self> {
        if self.blocks.len() != other.blocks.len()
            || self.blocks.iter().zip(&other.blocks).any(|(a, b)| a.shape() != b.shape())
        {
            return Err(Error::Shape("block structure differs".into()));
        }
        Ok(Self { blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(), support: None })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a + b)?;
        out.support = union_support(&self.support, &other.support);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a - b)?;
        out.support = union_support(&self.support, &other.support);
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = self.zip_with(other, |a, b| a * b)?;
        out.support = union_support(&self.support, &other.support);
        Ok(out)
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b - b * a)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b * s).collect(), support: self.support.clone() }
    }

    pub fn add_scalar(&self, s: C64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut m = b.clone();
                for i in 0..m.nrows() {
                    m[(i, i)] += s;
                }
                m
            })
            .collect();
        Self { blocks, support: self.support.clone() }
    }

    pub fn adjoint(&self) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.adjoint()).collect(), support: self.support.clone() }
    }

    /// `U* A U`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        let mut out = self.zip_with(u, |a, u| u.adjoint() * a * u)?;
        out.support = None;
        Ok(out)
    }

    /// Spectral norm, the maximum over blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(block_norm).fold(0.0, f64::max)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.blocks.iter().map(linalg::hermiticity_residual).fold(0.0, f64::max)
    }

    /// `‖U*U − 1‖`.
    pub fn unitarity_residual(&self) -> f64 {
        self.blocks.iter().map(linalg::unitarity_residual).fold(0.0, f64::max)
    }

    /// `exp(i s A)` for Hermitian `A`.
    pub fn exp_i(&self, s: f64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| linalg::exp_i_herm(b, s)).collect(), support: self.support.clone() }
    }

    /// Fock-space trace.
    pub fn trace(&self) -> C64 {
        self.blocks.iter().map(|b| b.trace()).fold(ZERO, |a, b| a + b)
    }

    pub fn to_sparse(&self, basis: &FockBasis, tol: f64) -> SparseOperator {
        let mut s = SparseOperator::zeros(basis.dim());
        for (b, m) in self.blocks.iter().enumerate() {
            let off = basis.offset(b);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if m[(i, j)].norm() > tol {
                        s.add_entry(off + i, off + j, m[(i, j)]);
                    }
                }
            }
        }
        s.support = self.support.clone();
        s
    }

    pub fn to_coo(&self, basis: &FockBasis) -> String {
        self.to_sparse(basis, 0.0).to_coo()
    }

    /// `F* A F` for a frame living in block `b`.
    pub fn compress(&self, b: usize, frame: &CMat) -> CMat {
        frame.adjoint() * &self.blocks[b] * frame
    }
}

fn block_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.nrows() <= linalg::DENSE_NORM_CAP {
        if linalg::hermiticity_residual(m) == 0.0 {
            return Eigh::new(m).values.iter().map(|e| e.abs()).fold(0.0, f64::max);
        }
        return linalg::norm2(m);
    }
    let adj = m.adjoint();
    power_norm_op(|v| &adj * (m * v), m.nrows())
}

/// `c*_x` or `c_x` on the flat index of `basis`.
///
/// Fails when some image state falls in a sector the basis does not hold.
pub fn fermion_operator(basis: &FockBasis, site: usize, kind: FermionKind) -> Result<SparseOperator> {
    if site >= basis.n_sites() {
        return Err(Error::Shape(format!("site {site} outside the lattice")));
    }
    let mut op = SparseOperator::zeros(basis.dim());
    for col in 0..basis.dim() {
        let st = basis.state(col);
        let occ = st >> site & 1 == 1;
        let target = match (kind, occ) {
            (FermionKind::Create, false) => st | (1u64 << site),
            (FermionKind::Annihilate, true) => st & !(1u64 << site),
            _ => continue,
        };
        let row = basis.index(target).ok_or(Error::MissingSector(target.count_ones() as usize))?;
        op.add_entry(row, col, C64::new(jw_sign(st, site), 0.0));
    }
    Ok(op)
}

/// `Q_S = Σ_{x∈S} c*_x c_x`.
pub fn charge_operator(basis: &FockBasis, region: &Region) -> BlockOperator {
    let mask = region.bits();
    BlockOperator::diagonal(basis, |s| C64::new((s & mask).count_ones() as f64, 0.0)).with_support(Some(region.clone()))
}

/// `q_x = c*_x c_x`.
pub fn occupation(basis: &FockBasis, site: usize) -> BlockOperator {
    let mut r = Region::empty_of(basis.n_sites());
    r.insert(site);
    charge_operator(basis, &r)
}

/// `Σ amp c*_to c_from` as a sparse operator (no Hermitian completion).
pub fn hopping_terms(basis: &FockBasis, terms: &[(usize, usize, C64)]) -> SparseOperator {
    let mut op = SparseOperator::zeros(basis.dim());
    for col in 0..basis.dim() {
        let st = basis.state(col);
        for &(from, to, amp) in terms {
            if from == to {
                if st >> from & 1 == 1 {
                    op.add_entry(col, col, amp);
                }
                continue;
            }
            if let Some((s, new)) = hop(st, from, to) {
                if let Some(row) = basis.index(new) {
                    op.add_entry(row, col, amp * s);
                }
            }
        }
    }
    op
}

/// Second quantization `dΓ(h) = Σ h_{yx} c*_y c_x` of a one-particle matrix.
pub fn second_quantize(basis: &FockBasis, h: &CMat) -> SparseOperator {
    let n = basis.n_sites();
    let mut terms = Vec::new();
    for y in 0..n {
        for x in 0..n {
            let v = h[(y, x)];
            if v != ZERO {
                terms.push((x, y, v));
            }
        }
    }
    let mut op = hopping_terms(basis, &terms);
    op.prune(0.0);
    op
}

/// Ground-state-independent scalar `c·1` as a block operator.
pub fn scalar(basis: &FockBasis, c: C64) -> BlockOperator {
    BlockOperator::identity(basis).scale(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Torus;
    use crate::linalg::ONE;

    fn anticomm(a: &CMat, b: &CMat) -> CMat {
        a * b + b * a
    }

    #[test]
    fn car_relations_small() {
        let basis = FockBasis::full(4).unwrap();
        let c: Vec<CMat> = (0..4)
            .map(|x| fermion_operator(&basis, x, FermionKind::Annihilate).unwrap().to_dense())
            .collect();
        let cd: Vec<CMat> =
            (0..4).map(|x| fermion_operator(&basis, x, FermionKind::Create).unwrap().to_dense()).collect();
        let id = CMat::identity(16, 16);
        for x in 0..4 {
            for y in 0..4 {
                let expect = if x == y { id.clone() } else { CMat::zeros(16, 16) };
                assert!(linalg::max_abs(&(anticomm(&c[x], &cd[y]) - expect)) < 1e-14);
                assert!(linalg::max_abs(&anticomm(&c[x], &c[y])) < 1e-14);
            }
        }
        assert!(linalg::max_abs(&(cd[0].adjoint() - &c[0])) == 0.0);
    }

    #[test]
    fn creation_antisymmetry() {
        let basis = FockBasis::full(2).unwrap();
        let c0 = fermion_operator(&basis, 0, FermionKind::Create).unwrap().to_dense();
        let c1 = fermion_operator(&basis, 1, FermionKind::Create).unwrap().to_dense();
        let mut vac = CVec::zeros(4);
        vac[basis.index(0).unwrap()] = ONE;
        let a = &c1 * (&c0 * &vac);
        let b = &c0 * (&c1 * &vac);
        assert!((a + b).norm() == 0.0);
    }

    #[test]
    fn missing_sector_is_an_error() {
        let ring = Torus::new(4, 1).unwrap();
        let basis = FockBasis::new(&ring, Some(2)).unwrap();
        assert!(matches!(fermion_operator(&basis, 0, FermionKind::Create), Err(Error::MissingSector(3))));
    }

    #[test]
    fn charges() {
        let t = Torus::new(4, 1).unwrap();
        let basis = FockBasis::new(&t, Some(2)).unwrap();
        let q = charge_operator(&basis, &t.full());
        assert_eq!(q.blocks[0], CMat::identity(6, 6) * C64::new(2.0, 0.0));
        assert!(charge_operator(&basis, &t.empty()).norm() == 0.0);
        let two = Torus::new(2, 1).unwrap();
        let b1 = FockBasis::new(&two, Some(1)).unwrap();
        let q0 = occupation(&b1, 0);
        // states 0b01 then 0b10
        assert_eq!(q0.blocks[0][(0, 0)], ONE);
        assert_eq!(q0.blocks[0][(1, 1)], ZERO);
    }

    #[test]
    fn hopping_matches_products() {
        let basis = FockBasis::full(3).unwrap();
        let cd2 = fermion_operator(&basis, 2, FermionKind::Create).unwrap();
        let c0 = fermion_operator(&basis, 0, FermionKind::Annihilate).unwrap();
        let prod = cd2.mul(&c0).unwrap().to_dense();
        let hop = hopping_terms(&basis, &[(0, 2, ONE)]).to_dense();
        assert!(linalg::max_abs(&(prod - hop)) == 0.0);
    }

    #[test]
    fn block_roundtrip_and_conservation() {
        let basis = FockBasis::full(3).unwrap();
        let h = hopping_terms(&basis, &[(0, 1, ONE), (1, 0, ONE)]);
        let b = h.to_block(&basis).unwrap();
        assert_eq!(b.to_sparse(&basis, 0.0).to_dense(), h.to_dense());
        let c = fermion_operator(&basis, 0, FermionKind::Create).unwrap();
        assert!(matches!(c.to_block(&basis), Err(Error::NotNumberConserving(_))));
    }

    #[test]
    fn coo_lines() {
        let basis = FockBasis::full(1).unwrap();
        let c = fermion_operator(&basis, 0, FermionKind::Annihilate).unwrap();
        assert_eq!(c.to_coo().trim(), "0 1 1.00000000000000000e0 0.00000000000000000e0");
    }
}
