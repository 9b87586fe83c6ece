//! Invariants checked on random inputs.

use std::f64::consts::PI;

use proptest::prelude::*;

use index_lab_core::flows::{Monomial, UnitaryKind};
use index_lab_core::fock::{
    charge_operator, conditional_expectation, fermion_operator, hopping_terms, support_profile, BlockOperator,
    FermionKind, FockBasis, Reference, SparseOperator,
};
use index_lab_core::lattice::{HalfSpace, Region, Torus};
use index_lab_core::linalg::{self, CMat, C64};
use index_lab_core::spectral::{FilterSpec, SmoothStep};

fn region(t: &Torus, mask: u64) -> Region {
    let sites: Vec<usize> = (0..t.n_sites()).filter(|&x| mask >> x & 1 == 1).collect();
    t.region(&sites)
}

fn dense(op: &SparseOperator) -> CMat {
    op.to_dense()
}

/// Hermitian operator with hoppings, on-site terms and density pairs.
fn random_hamiltonian(t: &Torus, basis: &FockBasis, coeffs: &[f64]) -> BlockOperator {
    let n = t.n_sites();
    let mut terms = Vec::new();
    let mut k = 0;
    let mut next = || {
        k += 1;
        coeffs[(k - 1) % coeffs.len()]
    };
    for (x, y) in t.bonds() {
        let a = C64::new(next(), next());
        terms.push((x, y, a));
        terms.push((y, x, a.conj()));
    }
    for x in 0..n {
        terms.push((x, x, C64::new(next(), 0.0)));
    }
    let mut h = hopping_terms(basis, &terms).to_block(basis).unwrap();
    for (x, y) in t.bonds() {
        let u = next();
        let pair = BlockOperator::diagonal(basis, |s| {
            C64::new(if s >> x & 1 == 1 && s >> y & 1 == 1 { u } else { 0.0 }, 0.0)
        });
        h = h.add(&pair).unwrap();
    }
    h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_anticommutation(n in 2usize..6, i in 0usize..6, j in 0usize..6) {
        let (i, j) = (i % n, j % n);
        let basis = FockBasis::full(n).unwrap();
        let ci = dense(&fermion_operator(&basis, i, FermionKind::Annihilate).unwrap());
        let cj = dense(&fermion_operator(&basis, j, FermionKind::Annihilate).unwrap());
        let cdj = dense(&fermion_operator(&basis, j, FermionKind::Create).unwrap());
        let d = basis.dim();
        let delta = if i == j { 1.0 } else { 0.0 };
        let mixed = &ci * &cdj + &cdj * &ci - CMat::identity(d, d) * C64::new(delta, 0.0);
        let pure = &ci * &cj + &cj * &ci;
        prop_assert!(linalg::max_abs(&mixed) < 1e-14);
        prop_assert!(linalg::max_abs(&pure) < 1e-14);
        prop_assert!(linalg::max_abs(&(cdj.adjoint() - &cj)) < 1e-14);
    }

    #[test]
    fn charges_commute_and_have_integer_spectrum(a in 0u64..64, b in 0u64..64, n in 0usize..7) {
        let t = Torus::new(3, 2).unwrap();
        let basis = FockBasis::new(&t, Some(n)).unwrap();
        let (ra, rb) = (region(&t, a), region(&t, b));
        let qa = charge_operator(&basis, &ra);
        let qb = charge_operator(&basis, &rb);
        prop_assert!(qa.commutator(&qb).unwrap().norm() < 1e-14);
        for blk in &qa.blocks {
            let e = linalg::Eigh::new(blk);
            for v in e.values {
                prop_assert!(linalg::integer_distance(v) < 1e-12);
                prop_assert!(v > -1e-12 && v < ra.len().min(n) as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn projections_are_unital_idempotent_and_contracting(
        mask in 0u64..64,
        coeffs in prop::collection::vec(-1.0f64..1.0, 8..24),
        vacuum in any::<bool>(),
    ) {
        let t = Torus::new(3, 2).unwrap();
        let basis = FockBasis::full(6).unwrap();
        let reference = if vacuum { Reference::Vacuum } else { Reference::Tracial };
        let r = region(&t, mask);
        let h = random_hamiltonian(&t, &basis, &coeffs);
        let one = BlockOperator::identity(&basis);
        let p1 = conditional_expectation(&one, &basis, &r, reference).unwrap();
        prop_assert!(p1.sub(&one).unwrap().norm() < 1e-12);
        let ph = conditional_expectation(&h, &basis, &r, reference).unwrap();
        let pph = conditional_expectation(&ph.clone().with_support(None), &basis, &r, reference).unwrap();
        prop_assert!(pph.sub(&ph).unwrap().norm() < 1e-10);
        prop_assert!(ph.hermiticity_residual() < 1e-12);
        if !vacuum {
            prop_assert!(ph.norm() <= h.norm() + 1e-10);
        }
        let full = conditional_expectation(&h.clone().with_support(None), &basis, &t.full(), reference).unwrap();
        prop_assert!(full.sub(&h).unwrap().norm() < 1e-12);
    }

    #[test]
    fn monomials_are_unitary_and_covariant(
        perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        theta in prop::collection::vec(-PI..PI, 6),
        y in 0usize..6,
    ) {
        let basis = FockBasis::full(6).unwrap();
        let m = Monomial { sigma: perm.clone(), theta: theta.clone(), kind: UnitaryKind::Composite };
        let u = m.to_block(&basis);
        prop_assert!(u.unitarity_residual() < 1e-12);
        let ud: CMat = {
            let mut d = CMat::zeros(basis.dim(), basis.dim());
            let mut off = 0;
            for b in &u.blocks {
                let k = b.nrows();
                d.view_mut((off, off), (k, k)).copy_from(b);
                off += k;
            }
            d
        };
        let cy = dense(&fermion_operator(&basis, y, FermionKind::Create).unwrap());
        let cs = dense(&fermion_operator(&basis, perm[y], FermionKind::Create).unwrap());
        let lhs = &ud * cy * ud.adjoint();
        let rhs = cs * C64::from_polar(1.0, theta[y]);
        prop_assert!(linalg::max_abs(&(lhs - rhs)) < 1e-12);
        let back = m.then(&m.adjoint());
        prop_assert!(back.sigma.iter().enumerate().all(|(i, &s)| i == s));
        prop_assert!(back.theta.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn integer_distance_is_bounded(x in -1e6f64..1e6) {
        let d = linalg::integer_distance(x);
        prop_assert!((0.0..=0.5).contains(&d));
        prop_assert!((linalg::integer_distance(x + 3.0) - d).abs() < 1e-6);
        let w = linalg::wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
    }

    #[test]
    fn filter_is_odd_and_exact_outside_the_gap(gamma in 0.1f64..5.0, w in -10.0f64..10.0) {
        let f = FilterSpec::new(gamma).unwrap();
        prop_assert!((f.f(w) + f.f(-w)).abs() < 1e-12);
        if w.abs() >= gamma {
            prop_assert!((w * f.f(w) - 1.0).abs() < 1e-12);
        }
        let g = f.low_pass(w);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&g));
        let step = SmoothStep::new(gamma, 0.25 * gamma, 0.0).unwrap();
        prop_assert!(step.eval(w) >= step.eval(w + 0.1) - 1e-15);
    }

    #[test]
    fn support_profiles_do_not_grow(coeffs in prop::collection::vec(-1.0f64..1.0, 8..24), core in 0u64..1024) {
        let t = Torus::new(10, 1).unwrap();
        let basis = FockBasis::new(&t, Some(2)).unwrap();
        let h = random_hamiltonian(&t, &basis, &coeffs);
        let core = region(&t, core | 1);
        let prof = support_profile(&h, &basis, &t, &core, 5, Reference::Tracial).unwrap();
        for w in prof.residuals.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-10);
        }
    }

    #[test]
    fn half_space_regions_are_consistent(l1 in 4usize..14, l2 in 1usize..4) {
        let t = Torus::new(l1, l2).unwrap();
        let hs = HalfSpace::new(t.clone(), 0.25).unwrap();
        prop_assert!(hs.split_minus().is_disjoint(&hs.boundary_plus));
        prop_assert!(hs.split_plus().is_disjoint(&hs.boundary_minus));
        prop_assert!(hs.boundary_minus.is_subset(&hs.split_minus()));
        prop_assert!(t.boundary(&hs.gamma).is_subset(&hs.boundary_minus.union(&hs.boundary_plus)));
    }
}
