//! Hamiltonian builders: Harper-Hubbard with piercing and threaded flux,
//! a charge-density-wave ring and a dimerized chain or ladder.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{charge_operator, hopping_terms, BlockOperator, FockBasis, SparseOperator};
use crate::lattice::{Region, Torus};
use crate::linalg::{CMat, C64, I, ZERO};

/// Density-density coupling `u q_x q_{x+d}` for every site `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Interaction {
    pub d1: isize,
    pub d2: isize,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HarperHubbardParams {
    pub t: f64,
    pub mu: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub interactions: Vec<Interaction>,
    /// Piercing flux `φ = 2π m / n`.
    pub m: i64,
    pub n: i64,
    /// Threaded flux per unit length.
    #[cfg_attr(feature = "serde", serde(default))]
    pub flux: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CdwParams {
    pub t: f64,
    pub v: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct DimerizedParams {
    /// Hopping on bonds leaving even columns.
    pub t1: f64,
    /// Hopping on bonds leaving odd columns.
    pub t2: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub t_perp: f64,
    /// Staggered potential `Δ (−1)^{x1}`.
    #[cfg_attr(feature = "serde", serde(default))]
    pub delta: f64,
    /// Nearest-neighbor repulsion along the chain.
    #[cfg_attr(feature = "serde", serde(default))]
    pub u: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub mu: f64,
}

/// One local piece `h_Z` of a Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub enum TermKind {
    /// `amp c*_to c_from + h.c.`; for `from == to` this is `2 Re(amp) q_x`.
    Hop { from: usize, to: usize, amp: C64 },
    /// `coeff q_x`.
    Density { site: usize, coeff: f64 },
    /// `coeff q_a q_b`.
    Pair { a: usize, b: usize, coeff: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    pub region: Region,
    pub kind: TermKind,
}

/// Sum of local terms, with its assembled matrix on a basis.
#[derive(Debug, Clone)]
pub struct LocalHamiltonian {
    pub lattice: Torus,
    pub terms: Vec<LocalTerm>,
    /// One-particle part (hopping and chemical potential).
    pub one_body: CMat,
    /// Density-density couplings `(a, b, coeff)`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub total: SparseOperator,
    /// Largest diameter of a term support.
    pub range: usize,
    /// Largest term norm.
    pub strength: f64,
}

impl HarperHubbardParams {
    pub fn free(t: f64, mu: f64, m: i64, n: i64) -> Self {
        Self { t, mu, interactions: Vec::new(), m, n, flux: 0.0 }
    }

    pub fn phi(&self) -> f64 {
        2.0 * PI * self.m as f64 / self.n as f64
    }

    pub fn with_flux(&self, flux: f64) -> Self {
        Self { flux, ..self.clone() }
    }

    pub fn is_free(&self) -> bool {
        self.interactions.iter().all(|i| i.u == 0.0)
    }

    pub fn validate(&self, lattice: &Torus) -> Result<()> {
        if self.n <= 0 {
            return Err(Error::Model(format!("flux denominator n = {} must be positive", self.n)));
        }
        if gcd(self.m.unsigned_abs(), self.n as u64) != 1 {
            return Err(Error::Model(format!("m = {} and n = {} are not coprime", self.m, self.n)));
        }
        if (self.m * lattice.l1() as i64).rem_euclid(self.n) != 0 {
            return Err(Error::Model(format!(
                "L1 phi is not a multiple of 2 pi (L1 = {}, phi = 2 pi {}/{})",
                lattice.l1(),
                self.m,
                self.n
            )));
        }
        if !self.t.is_finite() || !self.mu.is_finite() || !self.flux.is_finite() {
            return Err(Error::Model("non-finite parameter".into()));
        }
        Ok(())
    }

    fn transverse_phase(&self, x1: usize, flux: f64) -> C64 {
        C64::from_polar(1.0, self.phi() * x1 as f64 - flux)
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn interaction_pairs(lattice: &Torus, list: &[Interaction]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for it in list {
        if it.u == 0.0 {
            continue;
        }
        for x in 0..lattice.n_sites() {
            out.push((x, lattice.shift(x, it.d1, it.d2), it.u));
        }
    }
    out
}

fn pair_region(lattice: &Torus, a: usize, b: usize) -> Region {
    lattice.region(&[a, b])
}

impl LocalHamiltonian {
    fn assemble(lattice: Torus, terms: Vec<LocalTerm>, basis: &FockBasis) -> Result<Self> {
        let n = lattice.n_sites();
        if basis.n_sites() != n {
            return Err(Error::Shape(format!("basis has {} sites, lattice {}", basis.n_sites(), n)));
        }
        let mut one_body = CMat::zeros(n, n);
        let mut pairs = Vec::new();
        let mut range = 0;
        let mut strength = 0.0f64;
        for term in &terms {
            let sites = term.region.sites();
            for &a in &sites {
                for &b in &sites {
                    range = range.max(lattice.dist(a, b));
                }
            }
            match term.kind {
                TermKind::Hop { from, to, amp } => {
                    one_body[(to, from)] += amp;
                    one_body[(from, to)] += amp.conj();
                    strength = strength.max(if from == to { 2.0 * amp.re.abs() } else { amp.norm() });
                }
                TermKind::Density { site, coeff } => {
                    one_body[(site, site)] += coeff;
                    strength = strength.max(coeff.abs());
                }
                TermKind::Pair { a, b, coeff } => {
                    pairs.push((a, b, coeff));
                    strength = strength.max(coeff.abs());
                }
            }
        }
        let total = total_operator(basis, &one_body, &pairs);
        Ok(Self { lattice, terms, one_body, pairs, total, range, strength })
    }

    pub fn is_free(&self) -> bool {
        self.pairs.iter().all(|p| p.2 == 0.0)
    }

    /// Matrix of a single term on `basis`.
    pub fn term_operator(&self, basis: &FockBasis, i: usize) -> SparseOperator {
        let mut op = match self.terms[i].kind {
            TermKind::Hop { from, to, amp } => {
                if from == to {
                    hopping_terms(basis, &[(from, from, C64::new(2.0 * amp.re, 0.0))])
                } else {
                    hopping_terms(basis, &[(from, to, amp), (to, from, amp.conj())])
                }
            }
            TermKind::Density { site, coeff } => hopping_terms(basis, &[(site, site, C64::new(coeff, 0.0))]),
            TermKind::Pair { a, b, coeff } => pair_operator(basis, &[(a, b, coeff)]),
        };
        op.support = Some(self.terms[i].region.clone());
        op
    }

    /// `‖total − Σ h_Z‖`, entrywise maximum.
    pub fn term_sum_residual(&self, basis: &FockBasis) -> f64 {
        let mut sum = SparseOperator::zeros(basis.dim());
        for i in 0..self.terms.len() {
            sum = sum.add(&self.term_operator(basis, i)).expect("same basis");
        }
        let diff = sum.add(&self.total.scale(C64::new(-1.0, 0.0))).expect("same basis");
        diff.entries().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    /// Number-conserving block form of the total.
    pub fn blocks(&self, basis: &FockBasis) -> Result<BlockOperator> {
        self.total.to_block(basis)
    }
}

fn pair_operator(basis: &FockBasis, pairs: &[(usize, usize, f64)]) -> SparseOperator {
    let mut op = SparseOperator::zeros(basis.dim());
    for f in 0..basis.dim() {
        let s = basis.state(f);
        let v: f64 = pairs.iter().filter(|p| s >> p.0 & 1 == 1 && s >> p.1 & 1 == 1).map(|p| p.2).sum();
        if v != 0.0 {
            op.add_entry(f, f, C64::new(v, 0.0));
        }
    }
    op
}

fn total_operator(basis: &FockBasis, one_body: &CMat, pairs: &[(usize, usize, f64)]) -> SparseOperator {
    let n = basis.n_sites();
    let mut hops = Vec::new();
    for y in 0..n {
        for x in 0..n {
            if one_body[(y, x)] != ZERO {
                hops.push((x, y, one_body[(y, x)]));
            }
        }
    }
    let mut op = hopping_terms(basis, &hops).add(&pair_operator(basis, pairs)).expect("same basis");
    op.prune(0.0);
    op
}

fn harper_terms(lattice: &Torus, p: &HarperHubbardParams) -> Vec<LocalTerm> {
    let mut terms = Vec::new();
    for x in 0..lattice.n_sites() {
        let (x1, _) = lattice.coords(x);
        let y = lattice.shift(x, 1, 0);
        if p.t != 0.0 {
            terms.push(LocalTerm {
                region: pair_region(lattice, x, y),
                kind: TermKind::Hop { from: x, to: y, amp: C64::new(p.t, 0.0) },
            });
        }
        if lattice.l2() > 1 && p.t != 0.0 {
            let z = lattice.shift(x, 0, 1);
            terms.push(LocalTerm {
                region: pair_region(lattice, x, z),
                kind: TermKind::Hop { from: x, to: z, amp: p.transverse_phase(x1, p.flux) * p.t },
            });
        }
        if p.mu != 0.0 {
            terms.push(LocalTerm { region: lattice.region(&[x]), kind: TermKind::Density { site: x, coeff: -p.mu } });
        }
    }
    for (a, b, u) in interaction_pairs(lattice, &p.interactions) {
        terms.push(LocalTerm { region: pair_region(lattice, a, b), kind: TermKind::Pair { a, b, coeff: u } });
    }
    terms
}

/// `H_Φ = t Σ (e^{i(φx1−Φ)} c*_{x+e2} c_x + c*_{x+e1} c_x + h.c.) − μ N + Σ u q_x q_{x+d}`.
///
/// Rings (`L2 = 1`) carry no transverse bond.
pub fn build_harper_hubbard(lattice: &Torus, params: &HarperHubbardParams, basis: &FockBasis) -> Result<LocalHamiltonian> {
    params.validate(lattice)?;
    LocalHamiltonian::assemble(*lattice, harper_terms(lattice, params), basis)
}

/// One-particle matrix of the non-interacting Harper model.
pub fn build_single_particle(lattice: &Torus, params: &HarperHubbardParams) -> Result<CMat> {
    params.validate(lattice)?;
    if !params.is_free() {
        return Err(Error::Model("single-particle reduction needs u = 0".into()));
    }
    Ok(one_body_of(lattice, &harper_terms(lattice, params)))
}

fn one_body_of(lattice: &Torus, terms: &[LocalTerm]) -> CMat {
    let n = lattice.n_sites();
    let mut h = CMat::zeros(n, n);
    for term in terms {
        match term.kind {
            TermKind::Hop { from, to, amp } => {
                h[(to, from)] += amp;
                h[(from, to)] += amp.conj();
            }
            TermKind::Density { site, coeff } => h[(site, site)] += coeff,
            TermKind::Pair { .. } => {}
        }
    }
    h
}

/// One-particle `∂_Φ h_Φ = Σ (−i t e^{i(φx1−Φ)} |x+e2><x| + h.c.)`.
pub fn d_phi_single_particle(lattice: &Torus, params: &HarperHubbardParams) -> CMat {
    let n = lattice.n_sites();
    let mut h = CMat::zeros(n, n);
    if lattice.l2() == 1 {
        return h;
    }
    for x in 0..n {
        let (x1, _) = lattice.coords(x);
        let z = lattice.shift(x, 0, 1);
        let amp = -I * params.t * params.transverse_phase(x1, params.flux);
        h[(z, x)] += amp;
        h[(x, z)] += amp.conj();
    }
    h
}

/// Many-body `∂_Φ H_Φ`.
pub fn d_phi_hamiltonian(lattice: &Torus, params: &HarperHubbardParams, basis: &FockBasis) -> Result<SparseOperator> {
    params.validate(lattice)?;
    let h = d_phi_single_particle(lattice, params);
    let mut op = crate::fock::second_quantize(basis, &h);
    op.prune(0.0);
    Ok(op)
}

/// Ring with hopping `t`, repulsion `V q_x q_{x+1}` and chemical potential `μ`.
pub fn build_cdw_model(lattice: &Torus, params: &CdwParams, basis: &FockBasis) -> Result<LocalHamiltonian> {
    if lattice.l2() != 1 {
        return Err(Error::Model("the charge-density-wave model lives on a ring (L2 = 1)".into()));
    }
    if lattice.n_sites() % 2 == 1 {
        return Err(Error::Model(format!("odd ring length {} has no half filling", lattice.n_sites())));
    }
    let mut terms = Vec::new();
    for x in 0..lattice.n_sites() {
        let y = lattice.shift(x, 1, 0);
        if params.t != 0.0 {
            terms.push(LocalTerm {
                region: pair_region(lattice, x, y),
                kind: TermKind::Hop { from: x, to: y, amp: C64::new(params.t, 0.0) },
            });
        }
        if params.v != 0.0 {
            terms.push(LocalTerm { region: pair_region(lattice, x, y), kind: TermKind::Pair { a: x, b: y, coeff: params.v } });
        }
        if params.mu != 0.0 {
            terms.push(LocalTerm { region: lattice.region(&[x]), kind: TermKind::Density { site: x, coeff: -params.mu } });
        }
    }
    LocalHamiltonian::assemble(*lattice, terms, basis)
}

/// Alternating hoppings `t1, t2` along `x1`, rungs `t_perp`, staggered
/// potential and nearest-neighbor repulsion along the chain.
pub fn build_dimerized(lattice: &Torus, params: &DimerizedParams, basis: &FockBasis) -> Result<LocalHamiltonian> {
    LocalHamiltonian::assemble(*lattice, dimerized_terms(lattice, params)?, basis)
}

pub fn dimerized_single_particle(lattice: &Torus, params: &DimerizedParams) -> Result<CMat> {
    if params.u != 0.0 {
        return Err(Error::Model("single-particle reduction needs u = 0".into()));
    }
    Ok(one_body_of(lattice, &dimerized_terms(lattice, params)?))
}

fn dimerized_terms(lattice: &Torus, p: &DimerizedParams) -> Result<Vec<LocalTerm>> {
    if lattice.l1() % 2 == 1 {
        return Err(Error::Model("dimerization needs an even L1".into()));
    }
    let mut terms = Vec::new();
    for x in 0..lattice.n_sites() {
        let (x1, _) = lattice.coords(x);
        let y = lattice.shift(x, 1, 0);
        let t = if x1 % 2 == 0 { p.t1 } else { p.t2 };
        if t != 0.0 {
            terms.push(LocalTerm { region: pair_region(lattice, x, y), kind: TermKind::Hop { from: x, to: y, amp: C64::new(t, 0.0) } });
        }
        if lattice.l2() > 1 && p.t_perp != 0.0 {
            let z = lattice.shift(x, 0, 1);
            terms.push(LocalTerm {
                region: pair_region(lattice, x, z),
                kind: TermKind::Hop { from: x, to: z, amp: C64::new(p.t_perp, 0.0) },
            });
        }
        let stag = if x1 % 2 == 0 { p.delta } else { -p.delta };
        if stag - p.mu != 0.0 {
            terms.push(LocalTerm { region: lattice.region(&[x]), kind: TermKind::Density { site: x, coeff: stag - p.mu } });
        }
        if p.u != 0.0 {
            terms.push(LocalTerm { region: pair_region(lattice, x, y), kind: TermKind::Pair { a: x, b: y, coeff: p.u } });
        }
    }
    Ok(terms)
}

/// `‖[Q_Λ, A]‖` for an operator on the flat index of `basis`.
pub fn charge_conservation_residual(op: &SparseOperator, basis: &FockBasis) -> f64 {
    let mut comm = SparseOperator::zeros(basis.dim());
    for (r, c, v) in op.entries() {
        let d = basis.state(r).count_ones() as f64 - basis.state(c).count_ones() as f64;
        if d != 0.0 {
            comm.add_entry(r, c, v * d);
        }
    }
    comm.norm()
}

pub fn check_charge_conservation(h: &LocalHamiltonian, basis: &FockBasis) -> f64 {
    charge_conservation_residual(&h.total, basis)
}

/// `i[H, Q_S]`, the current through the boundary of `region`.
pub fn boundary_current(h: &LocalHamiltonian, basis: &FockBasis, region: &Region) -> Result<BlockOperator> {
    let hb = h.blocks(basis)?;
    let q = charge_operator(basis, region);
    Ok(hb.commutator(&q)?.scale(I))
}
