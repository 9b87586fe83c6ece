use anyhow::Result;
use serde_json::json;

use super::{export, integer_check};
use crate::config::{ExperimentConfig, UnitaryConfig};
use crate::engine::Instance;
use crate::report::{Assertion, Row, SizeOutcome};

pub fn lsm(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let k = match cfg.unitary {
        Some(UnitaryConfig::Translation { power }) => power.max(1),
        _ => 1,
    };
    let label = UnitaryConfig::Translation { power: k }.label();
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let mut out = SizeOutcome::default();
    let (u, split) = inst.translation(k)?;
    let rep = inst.index(&split, Some(&u))?;
    let p = rep.p as f64;
    let charge = inst.column_charge(k)?;
    let density = charge / (k * inst.lattice.l2()) as f64;
    // T(Θ^k)_− = −Q_{[0, k)}, so p Ind = −p <Q_{[0,k)}>.
    let identity = (rep.p_index + p * charge).abs();
    let commutator = rep.commutator.unwrap_or(f64::NAN);
    if rep.p > 1 {
        out.notes.push(format!(
            "p = {} at {}x{}: the ground space is degenerate; the sectors scenario resolves it",
            rep.p,
            inst.lattice.l1(),
            inst.lattice.l2()
        ));
    }
    export(cfg, inst, &label, &split, &mut out);
    out.push(
        Row::new(inst, &label).with_index(&rep).with_leakage(split.leakage()).with_residual(commutator),
        json!({
            "gap": inst.gap(),
            "index": rep,
            "split": split.diagnostics(),
            "column_charge": charge,
            "p_column_charge": p * charge,
            "density": density,
            "p_l2_density": p * inst.lattice.l2() as f64 * density,
            "charge_identity_residual": identity,
        }),
    );
    out.assertions.extend(integer_check(cfg, inst, &label, rep.integer_distance));
    out.check(Assertion::at_most(format!("{label}: [U, P]"), size, commutator, cfg.tolerances.symmetry, true));
    out.check(Assertion::at_most(
        format!("{label}: index equals minus the column charge"),
        size,
        identity,
        cfg.tolerances.symmetry,
        true,
    ));
    Ok(out)
}

pub fn magnetic_lsm(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let params = cfg.model.harper().expect("validated");
    let n = params.n as usize;
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let mut out = SizeOutcome::default();

    let (u, split) = inst.magnetic_translation(1)?;
    let rep = inst.index(&split, Some(&u))?;
    let commutator = rep.commutator.unwrap_or(f64::NAN);
    export(cfg, inst, "magnetic_translation", &split, &mut out);
    out.push(
        Row::new(inst, "magnetic_translation").with_index(&rep).with_leakage(split.leakage()).with_residual(commutator),
        json!({ "gap": inst.gap(), "index": rep, "split": split.diagnostics() }),
    );
    out.assertions.extend(integer_check(cfg, inst, "magnetic_translation", rep.integer_distance));
    out.check(Assertion::at_most("magnetic_translation: [U, P]", size, commutator, cfg.tolerances.symmetry, true));

    let label = UnitaryConfig::Translation { power: n }.label();
    let (un, split_n) = inst.translation(n)?;
    let rep_n = inst.index(&split_n, Some(&un))?;
    let charge = inst.column_charge(n)?;
    let p = rep_n.p as f64;
    let identity = (rep_n.p_index + p * charge).abs();
    let per_cell = charge / inst.lattice.l2() as f64;
    out.push(
        Row::new(inst, &label).with_index(&rep_n).with_leakage(split_n.leakage()).with_residual(identity),
        json!({
            "index": rep_n,
            "split": split_n.diagnostics(),
            "column_charge": charge,
            "charge_per_magnetic_cell": per_cell,
            "p_charge_per_magnetic_cell": p * per_cell,
            "n_times_magnetic_index": n as f64 * rep.index,
        }),
    );
    out.check(Assertion::at_most(format!("{label}: [U, P]"), size, rep_n.commutator.unwrap_or(f64::NAN), cfg.tolerances.symmetry, true));
    out.check(Assertion::at_most(
        format!("{label}: index equals minus the {n}-column charge"),
        size,
        identity,
        cfg.tolerances.symmetry,
        true,
    ));
    Ok(out)
}
