//! Scenario runners. Every size is an independent task; rows are merged in
//! the order of the configured sizes.

mod additivity;
mod cluster;
mod flux;
mod lsm;
mod sectors;
mod winding;

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::Result;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Scenario};
use crate::engine::{route, Engine, Instance, Split};
use crate::report::{dense_coo, Assertion, Row, SizeOutcome, SweepResult};

pub use winding::dressed_charge;

fn run_size(cfg: &ExperimentConfig, size: [usize; 2], verbose: bool) -> SizeOutcome {
    let t0 = Instant::now();
    let outcome = Instance::build(cfg, size).and_then(|inst| match cfg.scenario {
        Scenario::Lsm => lsm::lsm(cfg, &inst),
        Scenario::MagneticLsm => lsm::magnetic_lsm(cfg, &inst),
        Scenario::Hall => flux::hall(cfg, &inst),
        Scenario::Adz => flux::adz(cfg, &inst),
        Scenario::Additivity => additivity::additivity(cfg, &inst),
        Scenario::Cluster => cluster::cluster(cfg, &inst),
        Scenario::Sectors => sectors::sectors(cfg, &inst),
        Scenario::Winding => winding::winding(cfg, &inst),
    });
    let elapsed = t0.elapsed().as_secs_f64();
    let mut out = match outcome {
        Ok(o) => o,
        Err(e) => {
            let mut o = SizeOutcome::default();
            o.push(Row::aborted(size, cfg.scenario.name(), route(cfg).name(), &e), serde_json::Value::Null);
            o.check(Assertion::holds("row completed", Some(size), false, true));
            o
        }
    };
    for r in &mut out.rows {
        r.wall_time_s = elapsed;
    }
    if let Some(limit) = cfg.tolerances.max_seconds {
        out.check(Assertion::at_most("wall time per size", Some(size), elapsed, limit, true));
    }
    if verbose {
        eprintln!("[{}] {}x{} done in {:.2} s", cfg.scenario.name(), size[0], size[1], elapsed);
    }
    out
}

/// Runs the configured sweep on `threads` workers.
pub fn run(cfg: &ExperimentConfig, threads: usize, verbose: bool) -> Result<SweepResult> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    let outcomes: Vec<SizeOutcome> = pool.install(|| cfg.sizes.par_iter().map(|&s| run_size(cfg, s, verbose)).collect());
    let mut result = SweepResult {
        scenario: cfg.scenario.name().into(),
        rows: Vec::new(),
        details: Vec::new(),
        assertions: Vec::new(),
        notes: Vec::new(),
        passed: false,
        operators: Vec::new(),
    };
    for o in outcomes {
        result.rows.extend(o.rows);
        result.details.extend(o.details);
        result.assertions.extend(o.assertions);
        result.operators.extend(o.operators);
        for n in o.notes {
            if !result.notes.contains(&n) {
                result.notes.push(n);
            }
        }
    }
    result.assertions.extend(trend_assertions(&result.rows, cfg.tolerances.monotone_hard));
    result.passed = result.hard_failures().is_empty();
    Ok(result)
}

/// Integer distances must not grow along the sweep, label by label.
fn trend_assertions(rows: &[Row], hard: bool) -> Vec<Assertion> {
    let mut by_label: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.is_ok()) {
        if let Some(d) = r.integer_distance {
            by_label.entry(r.label.as_str()).or_default().push(d);
        }
    }
    by_label
        .into_iter()
        .filter(|(_, v)| v.len() > 1)
        .map(|(label, v)| {
            let worst = v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
            Assertion::at_most(format!("{label}: integer distance non-increasing"), None, worst, 1e-9, hard)
        })
        .collect()
}

/// COO dumps of `A` and `T_−` when requested.
fn export(cfg: &ExperimentConfig, inst: &Instance, name: &str, split: &Split, out: &mut SizeOutcome) {
    if !cfg.export_operators {
        return;
    }
    let tag = format!("{name}_{}x{}", inst.lattice.l1(), inst.lattice.l2());
    let (a, t) = match (split, &inst.engine) {
        (Split::Free(s), _) => (dense_coo(&s.a), dense_coo(&s.t_minus)),
        (Split::Dense(s), Engine::Dense(d)) => (s.a.to_coo(&d.basis), s.t_minus.to_coo(&d.basis)),
        _ => return,
    };
    out.operators.push((format!("{tag}_a.coo"), a));
    out.operators.push((format!("{tag}_t_minus.coo"), t));
}

/// Hard integer-distance check at the sizes where it is enforced.
fn integer_check(cfg: &ExperimentConfig, inst: &Instance, label: &str, distance: f64) -> Option<Assertion> {
    let (l1, l2) = (inst.lattice.l1(), inst.lattice.l2());
    cfg.tolerances.enforced_at(l1, l2).then(|| {
        Assertion::at_most(
            format!("{label}: integer distance"),
            Some([l1, l2]),
            distance,
            cfg.tolerances.integer_distance_for(cfg.scenario),
            true,
        )
    })
}
