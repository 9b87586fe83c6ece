use anyhow::{bail, Result};
use serde_json::json;

use index_lab_core::fock::{occupation, BlockOperator};
use index_lab_core::free;
use index_lab_core::linalg::{self, CMat};
use index_lab_core::spectral::{clustering_map, clustering_test, toporder_test, SmoothStep};

use crate::config::ExperimentConfig;
use crate::engine::{Engine, Instance};
use crate::report::{Assertion, Row, SizeOutcome};

/// Sites within distance 1 of the origin.
fn patch(inst: &Instance) -> Vec<usize> {
    (0..inst.lattice.n_sites()).filter(|&x| inst.lattice.dist(0, x) <= 1).collect()
}

/// A seeded quadratic observable supported near the origin, as a one-particle matrix.
fn local_quadratic(inst: &Instance, seed: u64) -> CMat {
    let sites = patch(inst);
    let m = sites.len();
    let v = linalg::seeded_vector(m * m, seed);
    let mut o = CMat::zeros(inst.lattice.n_sites(), inst.lattice.n_sites());
    for (i, &x) in sites.iter().enumerate() {
        for (j, &y) in sites.iter().enumerate() {
            o[(x, y)] = v[i * m + j];
        }
    }
    o
}

pub fn cluster(cfg: &ExperimentConfig, inst: &Instance) -> Result<SizeOutcome> {
    let size = Some([inst.lattice.l1(), inst.lattice.l2()]);
    let tol = &cfg.tolerances;
    let mut seps = cfg.separations.clone();
    if seps.is_empty() {
        seps = vec![1, 2, 3];
    }
    if let Some(&d) = seps.iter().find(|&&d| d >= inst.lattice.l1()) {
        bail!("separation {d} does not fit on L1 = {}", inst.lattice.l1());
    }
    let gamma = inst.gap().gamma;
    let step = SmoothStep::new(gamma, 0.25 * gamma, 0.0)?;
    let mut out = SizeOutcome::default();
    let mut values = Vec::with_capacity(seps.len());

    match &inst.engine {
        Engine::Free(f) => {
            for &d in &seps {
                let y = inst.lattice.site(d, 0);
                let c = free::density_clustering(&f.sys, 0, y);
                values.push(c);
                let mut row = Row::new(inst, format!("clustering[{d}]")).with_residual(c);
                row.p = Some(1);
                out.push(row, json!({ "separation": d, "distance": inst.lattice.dist(0, y), "correlation": c }));
            }
            let o = local_quadratic(inst, cfg.seed);
            let (kill, adjoint) = free::clustering_identities(&f.sys, &o, &step);
            out.push(
                Row::new(inst, "clustering_map").with_residual(kill.max(adjoint)),
                json!({ "q_p": kill, "p_q_minus_p_o_q": adjoint, "observable_sites": patch(inst) }),
            );
            out.check(Assertion::at_most("Q(O) P = 0", size, kill, tol.clustering_identities, true));
            out.check(Assertion::at_most("P Q(O) = P O (1 - P)", size, adjoint, tol.clustering_identities, true));
        }
        Engine::Dense(d) => {
            let n0 = occupation(&d.basis, 0);
            for &s in &seps {
                let y = inst.lattice.site(s, 0);
                let c = clustering_test(&n0, &occupation(&d.basis, y), &d.projection);
                values.push(c);
                out.push(
                    Row::new(inst, format!("clustering[{s}]")).with_residual(c),
                    json!({ "separation": s, "distance": inst.lattice.dist(0, y), "correlation": c }),
                );
            }
            // O = Σ c_xy a*_x a_y on the patch.
            let o1 = local_quadratic(inst, cfg.seed);
            let terms: Vec<(usize, usize, _)> = patch(inst)
                .iter()
                .flat_map(|&x| patch(inst).into_iter().map(move |y| (x, y)))
                .map(|(x, y)| (x, y, o1[(x, y)]))
                .collect();
            let o = index_lab_core::fock::hopping_terms(&d.basis, &terms).to_block(&d.basis)?;
            let q = clustering_map(&o, &d.spectrum, &step);
            let p = d.projection.projector(&d.basis);
            let one_minus_p = BlockOperator::identity(&d.basis).sub(&p)?;
            let kill = q.mul(&p)?.norm();
            let adjoint = p.mul(&q)?.sub(&p.mul(&o)?.mul(&one_minus_p)?)?.norm();
            let toporder = toporder_test(&d.projection, &inst.lattice, &d.basis, 1)?;
            out.push(
                Row::new(inst, "clustering_map").with_residual(kill.max(adjoint)),
                json!({ "q_p": kill, "p_q_minus_p_o_q": adjoint, "local_indistinguishability": toporder }),
            );
            out.check(Assertion::at_most("Q(O) P = 0", size, kill, tol.clustering_identities, true));
            out.check(Assertion::at_most("P Q(O) = P O (1 - P)", size, adjoint, tol.clustering_identities, true));
        }
    }
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    out.check(Assertion::holds("correlations strictly decrease with separation", size, decreasing, true));
    Ok(out)
}
