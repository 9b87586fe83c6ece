use alloc::vec;
use alloc::vec::Vec;

use super::basis::{binomial, subsets_with_popcount, FockBasis};
use super::ops::BlockOperator;
use crate::error::{Error, Result};
use crate::lattice::{Region, Torus};
use crate::linalg::{CMat, C64};

/// State used on the complement when projecting onto a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Reference {
    /// Charge twirl followed by the normalized partial trace. On a basis
    /// holding a single particle number the trace runs over the complement
    /// configurations compatible with that number.
    #[default]
    Tracial,
    /// Slice with the complement in its vacuum: `A ↦ <0_C|A|0_C> ⊗ 1_C`.
    Vacuum,
}

/// `‖A − Π_{core_(r)}(A)‖` for `r = 0..=r_max`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupportProfile {
    pub radii: Vec<usize>,
    pub residuals: Vec<f64>,
}

/// Sign picked up when moving the occupied modes of `s_mask` in front of
/// those of the complement.
pub fn reorder_sign(state: u64, s_mask: u64) -> f64 {
    let c = state & !s_mask;
    let mut a = state & s_mask;
    let mut pairs = 0u32;
    while a != 0 {
        let y = a.trailing_zeros();
        pairs += (c & ((1u64 << y) - 1)).count_ones();
        a &= a - 1;
    }
    if pairs % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

struct Reduced {
    s_mask: u64,
    states: Vec<Vec<u64>>,
    blocks: Vec<Option<CMat>>,
}

impl Reduced {
    fn index(&self, a: u64) -> (usize, usize) {
        let k = a.count_ones() as usize;
        (k, self.states[k].binary_search(&a).expect("state of the region"))
    }
}

/// Local indices of a block grouped by complement configuration.
fn groups(states: &[u64], c_mask: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..states.len()).collect();
    order.sort_by_key(|&i| (states[i] & c_mask, states[i]));
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut last = None;
    for i in order {
        let c = states[i] & c_mask;
        if last != Some(c) {
            out.push(Vec::new());
            last = Some(c);
        }
        out.last_mut().unwrap().push(i);
    }
    out
}

fn reduce(op: &BlockOperator, basis: &FockBasis, s_mask: u64, reference: Reference) -> Result<Reduced> {
    let full = basis.site_mask();
    let c_mask = full & !s_mask;
    let n_s = s_mask.count_ones() as usize;
    let n_c = c_mask.count_ones() as usize;
    let states: Vec<Vec<u64>> = (0..=n_s).map(|k| subsets_with_popcount(s_mask, k)).collect();
    let mut blocks: Vec<Option<CMat>> = vec![None; n_s + 1];
    let tracial_sector = match reference {
        Reference::Tracial if basis.is_full() => false,
        Reference::Tracial if basis.particle_number().is_some() => true,
        Reference::Tracial => {
            return Err(Error::Shape("tracial projection needs the full Fock space or a single sector".into()))
        }
        Reference::Vacuum => false,
    };
    for (b, sector) in basis.sectors().iter().enumerate() {
        let st = sector.states();
        let n = sector.particles();
        let m = &op.blocks[b];
        for g in groups(st, c_mask) {
            let c = st[g[0]] & c_mask;
            let weight = match reference {
                Reference::Vacuum if c != 0 => continue,
                Reference::Vacuum => 1.0,
                Reference::Tracial if tracial_sector => {
                    let k = n - c.count_ones() as usize;
                    1.0 / binomial(n_c, n - k) as f64
                }
                Reference::Tracial => 1.0 / (1u128 << n_c) as f64,
            };
            let k = n - c.count_ones() as usize;
            let dk = states[k].len();
            let r = blocks[k].get_or_insert_with(|| CMat::zeros(dk, dk));
            for &i in &g {
                let si = reorder_sign(st[i], s_mask);
                let ai = states[k].binary_search(&(st[i] & s_mask)).unwrap();
                for &j in &g {
                    let v = m[(i, j)];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let sj = reorder_sign(st[j], s_mask);
                    let aj = states[k].binary_search(&(st[j] & s_mask)).unwrap();
                    r[(ai, aj)] += v * (weight * si * sj);
                }
            }
        }
    }
    Ok(Reduced { s_mask, states, blocks })
}

fn extend(red: &Reduced, basis: &FockBasis) -> Result<BlockOperator> {
    let c_mask = basis.site_mask() & !red.s_mask;
    let mut out = BlockOperator::zeros(basis);
    for (b, sector) in basis.sectors().iter().enumerate() {
        let st = sector.states();
        let m = &mut out.blocks[b];
        for g in groups(st, c_mask) {
            let (k, _) = red.index(st[g[0]] & red.s_mask);
            let r = red.blocks[k].as_ref().ok_or(Error::MissingSector(k))?;
            for &i in &g {
                let si = reorder_sign(st[i], red.s_mask);
                let (_, ai) = red.index(st[i] & red.s_mask);
                for &j in &g {
                    let sj = reorder_sign(st[j], red.s_mask);
                    let (_, aj) = red.index(st[j] & red.s_mask);
                    m[(i, j)] = r[(ai, aj)] * (si * sj);
                }
            }
        }
    }
    Ok(out)
}

/// Projection `Π_S` onto operators supported in `region`.
///
/// Operators whose declared support already lies in `region` are returned
/// unchanged.
pub fn conditional_expectation(
    op: &BlockOperator,
    basis: &FockBasis,
    region: &Region,
    reference: Reference,
) -> Result<BlockOperator> {
    if let Some(s) = &op.support {
        if s.is_subset(region) {
            return Ok(op.clone());
        }
    }
    if region.n_sites() != basis.n_sites() {
        return Err(Error::Shape("region and basis live on different lattices".into()));
    }
    let red = reduce(op, basis, region.bits(), reference)?;
    let out = extend(&red, basis)?;
    Ok(out.with_support(Some(region.clone())))
}

pub fn support_profile(
    op: &BlockOperator,
    basis: &FockBasis,
    lattice: &Torus,
    core: &Region,
    r_max: usize,
    reference: Reference,
) -> Result<SupportProfile> {
    let mut radii = Vec::new();
    let mut residuals = Vec::new();
    let plain = op.clone().with_support(None);
    for r in 0..=r_max {
        let region = lattice.fatten(core, r);
        let p = conditional_expectation(&plain, basis, &region, reference)?;
        radii.push(r);
        residuals.push(plain.sub(&p)?.norm());
    }
    Ok(SupportProfile { radii, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ops::{charge_operator, hopping_terms, occupation};
    use crate::linalg::{max_abs, ONE};

    #[test]
    fn unital_and_local_fixed() {
        let t = Torus::new(4, 1).unwrap();
        let basis = FockBasis::new(&t, Some(2)).unwrap();
        let s = t.region(&[0, 1]);
        for reference in [Reference::Tracial] {
            let one = BlockOperator::identity(&basis).with_support(None);
            let p = conditional_expectation(&one, &basis, &s, reference).unwrap();
            assert!(max_abs(&(&p.blocks[0] - &one.blocks[0])) < 1e-14);
            let q0 = occupation(&basis, 0).with_support(None);
            let p = conditional_expectation(&q0, &basis, &s, reference).unwrap();
            assert!(max_abs(&(&p.blocks[0] - &q0.blocks[0])) < 1e-14);
        }
    }

    #[test]
    fn empty_region_gives_filling() {
        let t = Torus::new(6, 1).unwrap();
        let basis = FockBasis::new(&t, Some(2)).unwrap();
        let q = occupation(&basis, 4).with_support(None);
        let p = conditional_expectation(&q, &basis, &t.empty(), Reference::Tracial).unwrap();
        let expect = CMat::identity(15, 15) * C64::new(2.0 / 6.0, 0.0);
        assert!(max_abs(&(&p.blocks[0] - expect)) < 1e-14);
        let full = FockBasis::full(4).unwrap();
        let q = occupation(&full, 3).with_support(None);
        let p = conditional_expectation(&q, &full, &Region::empty_of(4), Reference::Tracial).unwrap();
        assert!((p.blocks[2][(1, 1)].re - 0.5).abs() < 1e-14);
        let p = conditional_expectation(&q, &full, &Region::empty_of(4), Reference::Vacuum).unwrap();
        assert!(p.norm() < 1e-14);
    }

    #[test]
    fn hopping_inside_region_survives_with_signs() {
        let full = FockBasis::full(4).unwrap();
        let s = {
            let mut r = Region::empty_of(4);
            r.insert(0);
            r.insert(2);
            r
        };
        let h = hopping_terms(&full, &[(0, 2, ONE), (2, 0, ONE)]).to_block(&full).unwrap();
        for reference in [Reference::Tracial, Reference::Vacuum] {
            let p = conditional_expectation(&h, &full, &s, reference).unwrap();
            assert!(p.sub(&h).unwrap().norm() < 1e-14);
        }
        // a hop leaving the region is removed
        let h = hopping_terms(&full, &[(0, 1, ONE), (1, 0, ONE)]).to_block(&full).unwrap();
        let p = conditional_expectation(&h, &full, &s, Reference::Tracial).unwrap();
        assert!(p.norm() < 1e-14);
    }

    #[test]
    fn profile_of_half_charge() {
        let t = Torus::new(8, 1).unwrap();
        let basis = FockBasis::new(&t, Some(4)).unwrap();
        let gamma = t.columns(0..4);
        let q = charge_operator(&basis, &gamma);
        let core = t.boundary(&gamma);
        let prof = support_profile(&q, &basis, &t, &core, 2, Reference::Tracial).unwrap();
        assert!(prof.residuals[0] > 0.5);
        assert!(prof.residuals.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!(prof.residuals[1] < 1e-12);
    }
}
