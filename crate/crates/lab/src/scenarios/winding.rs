use anyhow::{bail, Result};
use serde_json::json;

use index_lab_core::fock::Reference;
use index_lab_core::spectral::{quasi_adiabatic_k, time_integral_k, DressedCharge, FilterSpec};
use index_lab_core::transport::{winding_check, WindingReport};

use super::{export, integer_check};
use crate::config::{ExperimentConfig, UnitaryConfig};
use crate::engine::{Instance, Split, Unit};
use crate::report::{Assertion, Row, SizeOutcome};

/// Largest dimension at which the time-integral route is compared.
const TIME_ROUTE_CAP: usize = 1024;

fn filter(cfg: &ExperimentConfig, inst: &Instance) -> Result<FilterSpec> {
    let gamma = cfg.spectral.gamma.unwrap_or(inst.gap().gamma);
    Ok(FilterSpec::new(gamma)?.with_interior(cfg.spectral.interior.into()))
}

/// `Q̄ = Q_Γ − K_− − K_+` by the spectral route.
pub fn dressed_charge(cfg: &ExperimentConfig, inst: &Instance) -> Result<DressedCharge> {
    let d = inst.dense()?;
    let ctx = inst.split_context()?;
    Ok(quasi_adiabatic_k(
        &d.spectrum,
        &ctx.q_gamma,
        &d.projection,
        &filter(cfg, inst)?,
        &inst.geometry,
        &d.basis,
        Reference::Vacuum,
    )?)
}

/// Winding of `det_P 𝒵_−` for `U`, with `‖[Q̄, P]‖`.
pub(super) fn winding_of(
    cfg: &ExperimentConfig,
    inst: &Instance,
    u: &Unit,
    split: &Split,
    p_index: f64,
) -> Result<(WindingReport, f64)> {
    let Split::Dense(s) = split else { bail!("winding needs the many-body route") };
    let d = inst.dense()?;
    let dressed = dressed_charge(cfg, inst)?;
    let report = winding_check(
        &u.0,
        s,
        &dressed,
        &d.projection,
        &inst.split_context()?,
        p_index,
        &cfg.winding.options(),
    )?;
    Ok((report, dressed.commutator_residual))
}

pub(super) fn unitary(inst: &Instance, u: &UnitaryConfig) -> Result<(Unit, Split, bool)> {
    Ok(match *u {
        UnitaryConfig::Translation { power } => {
            let (u, s) = inst.translation(power)?;
            (u, s, false)
        }
        UnitaryConfig::MagneticTranslation { power } => {
            let (u, s) = inst.magnetic_translation(power)?;
            (u, s, false)
        }
        UnitaryConfig::Flux { quanta } => {
            let (u, s, _) = inst.flux_threading(quanta)?;
            (u, s, true)
        }
    })
}

pub fn winding(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let unitary_cfg = cfg.unitary.unwrap_or(UnitaryConfig::Translation { power: 1 });
    let label = unitary_cfg.label();
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let tol = &cfg.tolerances;
    let mut out = SizeOutcome::default();
    let d = inst.dense()?;
    let (u, split, _) = unitary(inst, &unitary_cfg)?;
    let rep = inst.index(&split, Some(&u))?;
    let dressed = dressed_charge(cfg, inst)?;
    let Split::Dense(s) = &split else { bail!("winding needs the many-body route") };
    let report = winding_check(&u.0, s, &dressed, &d.projection, &inst.split_context()?, rep.p_index, &cfg.winding.options())?;
    let mut details = json!({
        "gap": inst.gap(),
        "index": rep,
        "split": split.diagnostics(),
        "winding": report,
        "dressed_commutator": dressed.commutator_residual,
        "dressed_leakage": dressed.leakage,
    });
    if inst.dim() <= TIME_ROUTE_CAP {
        let ctx = inst.split_context()?;
        let (k_time, time_report) = time_integral_k(&d.spectrum, &d.hamiltonian, &ctx.q_gamma, &filter(cfg, inst)?)?;
        let agreement = k_time.sub(&dressed.k)?.norm();
        details["k_routes_difference"] = json!(agreement);
        details["time_route"] = serde_json::to_value(time_report)?;
        out.check(Assertion::at_most("spectral and time-integral K agree", size, agreement, tol.k_routes, true));
    }
    export(cfg, inst, &label, &split, &mut out);
    out.push(
        Row::new(inst, &label).with_index(&rep).with_leakage(split.leakage()).with_residual(report.residual),
        details,
    );
    out.assertions.extend(integer_check(cfg, inst, &label, rep.integer_distance));
    out.check(Assertion::at_most(format!("{label}: |winding - p Ind|"), size, report.residual, tol.winding, true));
    out.check(Assertion::at_most(format!("{label}: |det_P Z(2π) - 1|"), size, report.det_residual, tol.winding_det, true));
    out.check(Assertion::at_most("[Q̄, P]", size, dressed.commutator_residual, tol.dressed_commutator, true));
    Ok(out)
}
