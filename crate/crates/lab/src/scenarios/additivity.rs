use anyhow::Result;
use serde_json::json;

use super::winding::unitary;
use crate::config::{ExperimentConfig, PairConfig, UnitaryConfig};
use crate::engine::Instance;
use crate::report::{Assertion, Row, SizeOutcome};

pub fn additivity(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let tol = &cfg.tolerances;
    let mut out = SizeOutcome::default();
    for PairConfig { first, second } in &cfg.pairs {
        let (u1, s1, f1) = unitary(inst, first)?;
        let (u2, s2, f2) = unitary(inst, second)?;
        let transported = f1 || f2;
        let r1 = inst.index(&s1, Some(&u1))?;
        let r2 = inst.index(&s2, Some(&u2))?;
        // U2 U1: U1 acts first.
        let composite = inst.compose(&s2, &u1, &s1)?;
        let product = u2.then(&u1)?;
        let rc = inst.index(&composite, Some(&product))?;
        let residual = (rc.index - r1.index - r2.index).abs();
        let label = format!("{}*{}", second.label(), first.label());
        let mut details = json!({
            "first": r1,
            "second": r2,
            "composite": rc,
            "split": composite.diagnostics(),
            "residual": residual,
        });
        // The sum rule needs both factors to commute with P.
        for (u, r, moved) in [(first, &r1, f1), (second, &r2, f2)] {
            let bound = if moved { tol.additivity_exact } else { tol.symmetry };
            let c = r.commutator.unwrap_or(f64::NAN);
            out.check(Assertion::at_most(format!("{label}: [{}, P]", u.label()), size, c, bound, true));
        }
        let threshold = if transported { tol.additivity_transport } else { tol.additivity_exact };
        out.check(Assertion::at_most(format!("{label}: additivity"), size, residual, threshold, true));

        // Independent evaluations of the product.
        if let (UnitaryConfig::Flux { quanta: q1 }, UnitaryConfig::Flux { quanta: q2 }) = (first, second) {
            let (w, ws, _) = inst.flux_threading(q1 + q2)?;
            let rd = inst.index(&ws, Some(&w))?;
            let direct = (rd.index - r1.index - r2.index).abs();
            details["direct"] = json!({ "index": rd, "residual": direct });
            out.check(Assertion::at_most(
                format!("{label}: single threading of {} quanta", q1 + q2),
                size,
                direct,
                tol.additivity_transport,
                true,
            ));
        } else if !transported {
            let ds = inst.direct_split(&product)?;
            let rd = inst.index(&ds, None)?;
            details["direct"] = json!({ "index": rd, "split": ds.diagnostics() });
        }
        out.push(
            Row::new(inst, &label).with_index(&rc).with_leakage(composite.leakage()).with_residual(residual),
            details,
        );
    }
    Ok(out)
}
