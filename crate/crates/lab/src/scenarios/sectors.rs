use anyhow::Result;
use serde_json::json;

use index_lab_core::fock::{charge_operator, BlockOperator};
use index_lab_core::linalg;
use index_lab_core::spectral::local_observables;
use index_lab_core::transport::{sector_decompose, sector_index, sector_mixing, sector_permutation};

use super::winding::dressed_charge;
use crate::config::ExperimentConfig;
use crate::engine::{Instance, Split};
use crate::report::{Assertion, Row, SizeOutcome};

/// Σ_x (−1)^{x1} n_x.
fn staggered_density(inst: &Instance, basis: &index_lab_core::fock::FockBasis) -> Result<BlockOperator> {
    let l = &inst.lattice;
    let even = l.columns((0..l.l1() as isize).filter(|c| c % 2 == 0));
    let odd = l.columns((0..l.l1() as isize).filter(|c| c % 2 == 1));
    Ok(charge_operator(basis, &even).sub(&charge_operator(basis, &odd))?)
}

pub fn sectors(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let tol = &cfg.tolerances;
    let d = inst.dense()?;
    let ctx = inst.split_context()?;
    let mut out = SizeOutcome::default();

    let order = staggered_density(inst, &d.basis)?;
    let sectors = sector_decompose(&d.projection, &[order], 0.1)?;
    let (th, split) = inst.translation(1)?;
    let Split::Dense(s) = &split else { unreachable!("dense route") };
    let perm = sector_permutation(&th.0, &sectors)?;
    let (th2, _) = inst.translation(2)?;
    let perm2 = sector_permutation(&th2.0, &sectors)?;
    let fixed = perm2.image.iter().enumerate().all(|(m, &i)| m == i);
    let rep = inst.index(&split, Some(&th))?;

    let dressed = dressed_charge(cfg, inst)?;
    let sector_commutators: Vec<f64> = (0..sectors.frames.len())
        .map(|m| sectors.projection(m, &d.projection).commutator_norm(&dressed.q_bar))
        .collect();
    let mixing = sector_mixing(&local_observables(&inst.lattice, &d.basis, 1)?, &sectors);

    out.push(
        Row::new(inst, "translation").with_index(&rep).with_leakage(split.leakage()).with_residual(perm.residual),
        json!({
            "gap": inst.gap(),
            "index": rep,
            "split": split.diagnostics(),
            "sector_ranks": sectors.ranks(),
            "sector_values": sectors.values,
            "sector_separation": sectors.separation,
            "permutation": perm,
            "transposition": perm.is_transposition(),
            "square_permutation": perm2,
            "dressed_commutators": sector_commutators,
            "local_mixing": mixing,
        }),
    );
    out.check(Assertion::holds("translation permutes the sectors by a transposition", size, perm.is_transposition(), true));
    out.check(Assertion::holds("translation^2 fixes every sector", size, fixed, true));
    out.check(Assertion::at_most("sector permutation residual", size, perm.residual, tol.symmetry, true));

    let bound = tol.integer_distance_for(cfg.scenario);
    for m in 0..sectors.frames.len() {
        let si = sector_index(&th.0, s, &d.projection, &sectors, &perm, m, &ctx)?;
        let mut row = Row::new(inst, format!("sector[{m}]")).with_residual(si.power_integer_distance.max(si.cycle_integer_distance));
        row.p = Some(si.rank);
        row.index = Some(si.power_index);
        row.p_index = Some(si.power_index * si.rank as f64);
        row.integer_distance = Some(si.power_integer_distance.max(si.cycle_integer_distance));
        row.leakage = Some(split.leakage());
        out.push(
            row,
            json!({
                "sector": si,
                "consistency": (si.power_index / si.cycle_length as f64 - si.cycle_index).abs(),
                "power_is_integer": linalg::integer_distance(si.power_index * si.rank as f64),
            }),
        );
        if tol.enforced_at(inst.lattice.l1(), inst.lattice.l2()) {
            out.check(Assertion::at_most(format!("sector[{m}]: power variant integer distance"), size, si.power_integer_distance, bound, true));
            out.check(Assertion::at_most(format!("sector[{m}]: cycle variant integer distance"), size, si.cycle_integer_distance, bound, true));
        }
    }
    Ok(out)
}
