use anyhow::Result;
use serde_json::{json, Value};

use index_lab_core::flows::ParallelTransport;
use index_lab_core::linalg;

use super::{export, integer_check, winding::winding_of};
use crate::config::{ExperimentConfig, UnitaryConfig};
use crate::engine::{Engine, Instance};
use crate::report::{Assertion, Row, SizeOutcome};

pub(super) fn run_json(run: &ParallelTransport) -> Value {
    json!({
        "steps": run.steps,
        "rejected": run.rejected,
        "max_error": run.max_error,
        "unitarity_residual": run.unitarity_residual,
    })
}

pub fn hall(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let quanta = match cfg.unitary {
        Some(UnitaryConfig::Flux { quanta }) => quanta,
        _ => 1,
    };
    let label = UnitaryConfig::Flux { quanta }.label();
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let mut out = SizeOutcome::default();
    let (w, split, run) = inst.flux_threading(quanta)?;
    let rep = inst.index(&split, Some(&w))?;
    let commutator = rep.commutator.unwrap_or(f64::NAN);
    let sigma = rep.index / quanta as f64;
    let mut details = json!({
        "gap": inst.gap(),
        "index": rep,
        "split": split.diagnostics(),
        "transport": run_json(&run),
        "quanta": quanta,
        "sigma": sigma,
    });
    let mut row = Row::new(inst, &label).with_index(&rep).with_leakage(split.leakage()).with_residual(commutator);
    if let Engine::Dense(_) = inst.engine {
        let (report, dressed) = winding_of(cfg, inst, &w, &split, rep.p_index)?;
        details["winding"] = serde_json::to_value(&report)?;
        details["dressed_commutator"] = json!(dressed);
        out.check(Assertion::at_most(format!("{label}: winding agrees with p Ind"), size, report.residual, cfg.tolerances.winding, true));
        row = row.with_residual(report.residual);
    }
    export(cfg, inst, &label, &split, &mut out);
    out.push(row, details);
    out.assertions.extend(integer_check(cfg, inst, &label, rep.integer_distance));
    out.check(Assertion::at_most(format!("{label}: [W, P]"), size, commutator, cfg.tolerances.symmetry, false));
    Ok(out)
}

pub fn adz(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let params = cfg.model.harper().expect("validated");
    let n = params.n as usize;
    let phi = inst.phi;
    let base = inst.flux;
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let tol = &cfg.tolerances;
    let mut out = SizeOutcome::default();

    let (min_gap, periodicity) = inst.flux_gap_scan(16)?;
    let covariance = inst.covariance_residual(&params)?;

    let (tn, tn_split) = inst.translation(n)?;
    let rep_t = inst.index(&tn_split, Some(&tn))?;
    out.push(
        Row::new(inst, format!("translation^{n}")).with_index(&rep_t).with_leakage(tn_split.leakage()),
        json!({ "index": rep_t, "split": tn_split.diagnostics() }),
    );

    let (f_loop, f_split, f_run) = inst.transport(base + n as f64 * phi, base)?;
    let rep_f = inst.index(&f_split, Some(&f_loop))?;
    export(cfg, inst, "flux_loop", &f_split, &mut out);
    out.push(
        Row::new(inst, "flux_loop")
            .with_index(&rep_f)
            .with_leakage(f_split.leakage())
            .with_residual(rep_f.commutator.unwrap_or(f64::NAN)),
        json!({ "index": rep_f, "split": f_split.diagnostics(), "transport": run_json(&f_run) }),
    );

    // U(Φ)^k = Θ^k F(Φ + kφ, Φ) for k = 2, 3, and the cocycle and covariance
    // of F on the points Φ, Φ + φ, Φ + 2φ.
    let (th, _) = inst.translation(1)?;
    let (f1, _) = inst.propagator(base + phi, base)?;
    let (f2, _) = inst.propagator(base + 2.0 * phi, base)?;
    let (f21, _) = inst.propagator(base + 2.0 * phi, base + phi)?;
    let f3 = if n == 3 { f_loop.clone() } else { inst.propagator(base + 3.0 * phi, base)?.0 };
    let u = th.then(&f1)?;
    let u2 = u.then(&u)?;
    let u3 = u2.then(&u)?;
    let th2 = th.then(&th)?;
    let th3 = th2.then(&th)?;
    let power_identity = u2.distance(&th2.then(&f2)?)?.max(u3.distance(&th3.then(&f3)?)?);
    let cocycle = f21.then(&f1)?.distance(&f2)?;
    let covariance_f = f1.then(&th)?.distance(&th.then(&f21)?)?;

    let p = rep_t.p as f64;
    let combined = (rep_t.p_index + rep_f.p_index) / n as f64;
    let dist = linalg::integer_distance(combined);
    let l2 = inst.lattice.l2() as f64;
    let quanta = l2 * n as f64 * phi / (2.0 * std::f64::consts::PI);
    let mut row = Row::new(inst, "adz").with_residual(power_identity.max(cocycle));
    row.index = Some(combined / p);
    row.p_index = Some(combined);
    row.integer_distance = Some(dist);
    row.leakage = Some(tn_split.leakage().max(f_split.leakage()));
    out.push(
        row,
        json!({
            "gap": inst.gap(),
            "translation_index": rep_t.index,
            "flux_index": rep_f.index,
            "combined": combined,
            "rho": -rep_t.index / (n as f64 * l2),
            "sigma": if quanta != 0.0 { rep_f.index / quanta } else { 0.0 },
            "power_identity_residual": power_identity,
            "cocycle_residual": cocycle,
            "covariance_transport_residual": covariance_f,
            "covariance_hamiltonian_residual": covariance,
            "periodicity_residual": periodicity,
            "min_gap_over_flux": min_gap,
        }),
    );
    out.assertions.extend(integer_check(cfg, inst, "adz", dist));
    out.check(Assertion::at_most("adz: U^k = Θ^k F identity", size, power_identity, tol.power_identity, true));
    out.check(Assertion::at_most("adz: cocycle", size, cocycle, tol.cocycle, true));
    out.check(Assertion::at_most("adz: translation covariance of H", size, covariance, tol.symmetry, true));
    out.check(Assertion::at_most("adz: translation covariance of F", size, covariance_f, tol.power_identity, false));
    out.check(Assertion::at_most("adz: periodicity of P", size, periodicity, tol.symmetry, true));
    out.check(Assertion::holds("adz: gap open along the flux loop", size, min_gap > cfg.transport.gap_floor, true));
    Ok(out)
}
