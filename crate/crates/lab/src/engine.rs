//! One lattice size of an experiment, on the one-particle or the many-body route.

use std::f64::consts::PI;

use anyhow::{anyhow, bail, Result};

use index_lab_core::flows::{self, FluxFamily, ManyBodyFlux, Monomial, ParallelTransport, TransportOptions};
use index_lab_core::fock::{BlockOperator, FockBasis};
use index_lab_core::free::{self, FreeContext, FreeFermions, FreeFlux, FreeSplit};
use index_lab_core::lattice::{HalfSpace, Torus};
use index_lab_core::linalg::CMat;
use index_lab_core::models::{
    build_cdw_model, build_dimerized, build_harper_hubbard, build_single_particle, dimerized_single_particle,
    HarperHubbardParams,
};
use index_lab_core::spectral::{BlockSpectrum, GapReport, GroundProjection};
use index_lab_core::transport::{self, IndexReport, SplitContext, SplitDiagnostics, TransportSplit};

use crate::config::{ExperimentConfig, ModelConfig, Solver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Free,
    ManyBody,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Free => "free",
            Route::ManyBody => "many_body",
        }
    }
}

/// Picks the route for a configuration.
pub fn route(cfg: &ExperimentConfig) -> Route {
    match cfg.solver {
        Solver::Free => Route::Free,
        Solver::ManyBody => Route::ManyBody,
        Solver::Auto => {
            if cfg.model.is_free() && cfg.filling.is_some() && cfg.model.cdw().is_none() {
                Route::Free
            } else {
                Route::ManyBody
            }
        }
    }
}

/// A unitary: the one-particle matrix on the free route (one block), the
/// Fock-space operator otherwise.
#[derive(Debug, Clone)]
pub struct Unit(pub BlockOperator);

impl Unit {
    fn one_particle(m: CMat) -> Self {
        Unit(BlockOperator { blocks: vec![m], support: None })
    }

    fn matrix(&self) -> &CMat {
        &self.0.blocks[0]
    }

    /// `self · other`.
    pub fn then(&self, other: &Unit) -> Result<Unit> {
        Ok(Unit(self.0.mul(&other.0)?))
    }

    pub fn distance(&self, other: &Unit) -> Result<f64> {
        Ok(flows::distance(&self.0, &other.0)?)
    }
}

#[derive(Debug, Clone)]
pub enum Split {
    Free(FreeSplit),
    Dense(TransportSplit),
}

impl Split {
    pub fn diagnostics(&self) -> SplitDiagnostics {
        match self {
            Split::Dense(s) => s.diagnostics(),
            Split::Free(s) => SplitDiagnostics {
                nu: s.nu,
                leakage: s.leakage,
                convention_residual: s.convention_residual,
                a_norm: index_lab_core::linalg::norm2(&s.a),
                t_minus_norm: index_lab_core::linalg::norm2(&s.t_minus),
            },
        }
    }

    pub fn leakage(&self) -> f64 {
        match self {
            Split::Free(s) => s.leakage,
            Split::Dense(s) => s.leakage,
        }
    }
}

pub struct FreeEngine {
    pub sys: FreeFermions,
    pub ctx: FreeContext,
    pub family: Option<FreeFlux>,
}

pub struct DenseEngine {
    pub basis: FockBasis,
    pub hamiltonian: BlockOperator,
    pub spectrum: BlockSpectrum,
    pub projection: GroundProjection,
    pub family: Option<ManyBodyFlux>,
}

pub enum Engine {
    Free(FreeEngine),
    Dense(DenseEngine),
}

pub struct Instance {
    pub lattice: Torus,
    pub geometry: HalfSpace,
    pub particles: Option<usize>,
    pub route: Route,
    pub engine: Engine,
    pub flux: f64,
    pub phi: f64,
    pub transport: TransportOptions,
}

impl Instance {
    pub fn build(cfg: &ExperimentConfig, size: [usize; 2]) -> Result<Self> {
        let lattice = Torus::new(size[0], size[1])?;
        let mut geometry = HalfSpace::new(lattice, cfg.geometry.c)?;
        if let Some(r) = cfg.geometry.split_radius {
            geometry = geometry.with_split_radius(r);
        }
        let particles = cfg.filling.map(|f| f.particles(lattice.n_sites())).transpose()?;
        let harper = cfg.model.harper();
        if let Some(p) = &harper {
            p.validate(&lattice)?;
        }
        let (flux, phi) = harper.as_ref().map(|p| (p.flux, p.phi())).unwrap_or((0.0, 0.0));
        let route = route(cfg);
        let engine = match route {
            Route::Free => {
                let n = particles.ok_or_else(|| anyhow!("the free route needs a filling"))?;
                let h = match &cfg.model {
                    ModelConfig::HarperHubbard { .. } => build_single_particle(&lattice, harper.as_ref().unwrap())?,
                    ModelConfig::Dimerized { .. } => dimerized_single_particle(&lattice, &cfg.model.dimerized().unwrap())?,
                    ModelConfig::Cdw { .. } => bail!("the cdw model has no one-particle route"),
                };
                let family = harper.map(|params| FreeFlux {
                    lattice,
                    params,
                    n_filled: n,
                    options: cfg.generator_options(),
                });
                Engine::Free(FreeEngine { sys: FreeFermions::new(h, n)?, ctx: FreeContext::new(&geometry), family })
            }
            Route::ManyBody => {
                let basis = match particles {
                    Some(n) => FockBasis::with_range(lattice.n_sites(), 0, n, index_lab_core::fock::DEFAULT_DIM_CAP)?,
                    None => FockBasis::new(&lattice, None)?,
                };
                let local = match &cfg.model {
                    ModelConfig::HarperHubbard { .. } => build_harper_hubbard(&lattice, harper.as_ref().unwrap(), &basis)?,
                    ModelConfig::Cdw { .. } => build_cdw_model(&lattice, &cfg.model.cdw().unwrap(), &basis)?,
                    ModelConfig::Dimerized { .. } => build_dimerized(&lattice, &cfg.model.dimerized().unwrap(), &basis)?,
                };
                let hamiltonian = local.blocks(&basis)?;
                let spectrum = BlockSpectrum::new(&hamiltonian)?;
                let projection = match particles {
                    Some(n) => {
                        let b = basis.block_of(n).ok_or_else(|| anyhow!("no block with {n} particles"))?;
                        spectrum.projection_in(b, cfg.spectral.hint, cfg.spectral.p_max)?
                    }
                    None => spectrum.projection(cfg.spectral.hint, cfg.spectral.p_max)?,
                };
                let family = harper.map(|params| ManyBodyFlux {
                    lattice,
                    params,
                    basis: basis.clone(),
                    particles,
                    hint: cfg.spectral.hint,
                    options: cfg.generator_options(),
                });
                Engine::Dense(DenseEngine { basis, hamiltonian, spectrum, projection, family })
            }
        };
        Ok(Self { lattice, geometry, particles, route, engine, flux, phi, transport: cfg.transport.options() })
    }

    pub fn dim(&self) -> usize {
        match &self.engine {
            Engine::Free(f) => f.sys.h.nrows(),
            Engine::Dense(d) => d.basis.dim(),
        }
    }

    pub fn gap(&self) -> GapReport {
        match &self.engine {
            Engine::Free(f) => {
                let e0 = f.sys.energy();
                let gamma = f.sys.gap();
                GapReport { energies: vec![e0, e0 + gamma], p: 1, gamma, delta: 0.0, admissible: gamma > 0.0 }
            }
            Engine::Dense(d) => d.projection.report.clone(),
        }
    }

    pub fn p(&self) -> usize {
        match &self.engine {
            Engine::Free(_) => 1,
            Engine::Dense(d) => d.projection.p(),
        }
    }

    pub fn dense(&self) -> Result<&DenseEngine> {
        match &self.engine {
            Engine::Dense(d) => Ok(d),
            Engine::Free(_) => bail!("this step needs the many-body route"),
        }
    }

    pub fn split_context(&self) -> Result<SplitContext<'_>> {
        Ok(SplitContext::new(&self.dense()?.basis, &self.geometry))
    }

    fn monomial(&self, m: Monomial) -> Result<(Unit, Split)> {
        Ok(match &self.engine {
            Engine::Free(f) => {
                let u = m.one_particle();
                let s = free::transport_split(&u, &f.ctx);
                (Unit::one_particle(u), Split::Free(s))
            }
            Engine::Dense(d) => {
                let u = m.to_block(&d.basis);
                let s = transport::transport_split(&u, &self.split_context()?)?;
                (Unit(u), Split::Dense(s))
            }
        })
    }

    /// Split of an arbitrary unitary, without composition.
    pub fn direct_split(&self, u: &Unit) -> Result<Split> {
        Ok(match &self.engine {
            Engine::Free(f) => Split::Free(free::transport_split(u.matrix(), &f.ctx)),
            Engine::Dense(_) => Split::Dense(transport::transport_split(&u.0, &self.split_context()?)?),
        })
    }

    /// `U^k` with its split built by composition.
    pub fn power(&self, u: &Unit, split: &Split, k: usize) -> Result<(Unit, Split)> {
        let mut acc_u = u.clone();
        let mut acc_s = split.clone();
        for _ in 1..k {
            acc_s = self.compose(&acc_s, u, split)?;
            acc_u = acc_u.then(u)?;
        }
        Ok((acc_u, acc_s))
    }

    pub fn translation(&self, power: usize) -> Result<(Unit, Split)> {
        let (u, s) = self.monomial(Monomial::translation(&self.lattice, 1)?)?;
        self.power(&u, &s, power.max(1))
    }

    pub fn magnetic_translation(&self, power: usize) -> Result<(Unit, Split)> {
        let (u, s) = self.monomial(Monomial::magnetic_translation(&self.lattice, self.phi)?)?;
        self.power(&u, &s, power.max(1))
    }

    pub fn gauge(&self, delta_phi: f64) -> Result<(Unit, Split)> {
        self.monomial(Monomial::gauge(&self.lattice, delta_phi))
    }

    /// `F(Φ, Φ')` with the split accumulated along the path.
    pub fn transport(&self, phi: f64, phi_prime: f64) -> Result<(Unit, Split, ParallelTransport)> {
        match &self.engine {
            Engine::Free(f) => {
                let fam = f.family.as_ref().ok_or_else(|| anyhow!("flux threading needs the harper_hubbard model"))?;
                let (u, run, s) = free::stepwise_split(fam, phi, phi_prime, &self.transport, &f.ctx)?;
                Ok((Unit::one_particle(u), Split::Free(s), run))
            }
            Engine::Dense(d) => {
                let fam = d.family.as_ref().ok_or_else(|| anyhow!("flux threading needs the harper_hubbard model"))?;
                let (run, s) = transport::stepwise_split(fam, phi, phi_prime, &self.transport, &self.split_context()?)?;
                Ok((Unit(run.unitary.op.clone()), Split::Dense(s), run))
            }
        }
    }

    /// Plain `F(Φ, Φ')` without a split.
    pub fn propagator(&self, phi: f64, phi_prime: f64) -> Result<(Unit, ParallelTransport)> {
        match &self.engine {
            Engine::Free(f) => {
                let fam = f.family.as_ref().ok_or_else(|| anyhow!("flux threading needs the harper_hubbard model"))?;
                let (u, run) = free::parallel_transport(fam, phi, phi_prime, &self.transport)?;
                Ok((Unit::one_particle(u), run))
            }
            Engine::Dense(d) => {
                let fam = d.family.as_ref().ok_or_else(|| anyhow!("flux threading needs the harper_hubbard model"))?;
                let run = flows::parallel_transport(fam, phi, phi_prime, &BlockOperator::identity(&d.basis), &self.transport)?;
                Ok((Unit(run.unitary.op.clone()), run))
            }
        }
    }

    /// `W = F(Φ, Φ − 2π q/L2) 𝓕_{−2π q/L2}` at the model flux `Φ`.
    pub fn flux_threading(&self, quanta: i64) -> Result<(Unit, Split, ParallelTransport)> {
        let phi = self.flux;
        let delta = -2.0 * PI * quanta as f64 / self.lattice.l2() as f64;
        let (f, fs, run) = self.transport(phi, phi + delta)?;
        let (g, gs) = self.gauge(delta)?;
        let split = self.compose(&fs, &g, &gs)?;
        Ok((f.then(&g)?, split, run))
    }

    /// Split of `X Y` from those of `X` and `Y`.
    pub fn compose(&self, x: &Split, y: &Unit, ys: &Split) -> Result<Split> {
        Ok(match (&self.engine, x, ys) {
            (Engine::Free(f), Split::Free(x), Split::Free(ys)) => Split::Free(free::compose(x, y.matrix(), ys, &f.ctx)),
            (Engine::Dense(_), Split::Dense(x), Split::Dense(ys)) => {
                Split::Dense(transport::compose_transport(x, &y.0, ys, &self.split_context()?)?)
            }
            _ => bail!("splits from different routes"),
        })
    }

    pub fn index(&self, split: &Split, u: Option<&Unit>) -> Result<IndexReport> {
        Ok(match (&self.engine, split) {
            (Engine::Free(f), Split::Free(s)) => free::index(&f.sys, s, u.map(|u| u.matrix())),
            (Engine::Dense(d), Split::Dense(s)) => {
                let mut r = transport::index(&d.projection, s);
                r.commutator = u.map(|u| transport::projection_commutator(&u.0, &d.projection));
                r
            }
            _ => bail!("split from a different route"),
        })
    }

    /// `⟨Q_S⟩_P` for the first `k` columns.
    pub fn column_charge(&self, k: usize) -> Result<f64> {
        let cols = self.lattice.columns(0..k as isize);
        Ok(match &self.engine {
            Engine::Free(f) => f.sys.expect(&free::indicator(&cols)).re,
            Engine::Dense(d) => {
                let q = index_lab_core::fock::charge_operator(&d.basis, &cols);
                d.projection.trace(&q).re / d.projection.p() as f64
            }
        })
    }

    /// `‖Θ* H_Φ Θ − H_{Φ+φ}‖` at the model flux.
    pub fn covariance_residual(&self, params: &HarperHubbardParams) -> Result<f64> {
        let th = Monomial::translation(&self.lattice, 1)?;
        Ok(match &self.engine {
            Engine::Free(_) => {
                let t = th.one_particle();
                let h0 = build_single_particle(&self.lattice, params)?;
                let h1 = build_single_particle(&self.lattice, &params.with_flux(params.flux + self.phi))?;
                index_lab_core::linalg::norm2(&(t.adjoint() * h0 * &t - h1))
            }
            Engine::Dense(d) => {
                let t = th.to_block(&d.basis);
                let h0 = build_harper_hubbard(&self.lattice, params, &d.basis)?.blocks(&d.basis)?;
                let h1 = build_harper_hubbard(&self.lattice, &params.with_flux(params.flux + self.phi), &d.basis)?
                    .blocks(&d.basis)?;
                h0.conjugate_by(&t)?.sub(&h1)?.norm()
            }
        })
    }

    /// Smallest gap over `samples` flux values in `[Φ, Φ + 2π)`, and
    /// `‖P_{Φ+2π} − P_Φ‖`.
    pub fn flux_gap_scan(&self, samples: usize) -> Result<(f64, f64)> {
        let base = self.flux;
        let mut min_gap = f64::INFINITY;
        let fam: &dyn FluxFamily = match &self.engine {
            Engine::Free(f) => f.family.as_ref().ok_or_else(|| anyhow!("needs the harper_hubbard model"))?,
            Engine::Dense(d) => d.family.as_ref().ok_or_else(|| anyhow!("needs the harper_hubbard model"))?,
        };
        for i in 0..samples {
            let phi = base + 2.0 * PI * i as f64 / samples as f64;
            let g = match &self.engine {
                Engine::Free(f) => f.family.as_ref().unwrap().system(phi)?.gap(),
                Engine::Dense(d) => {
                    let params = d.family.as_ref().unwrap().params.with_flux(phi);
                    let h = build_harper_hubbard(&self.lattice, &params, &d.basis)?.blocks(&d.basis)?;
                    let spectrum = BlockSpectrum::new(&h)?;
                    let b = d.projection.block;
                    spectrum.projection_in(b, Some(d.projection.p()), 8)?.report.gamma
                }
            };
            min_gap = min_gap.min(g);
        }
        let periodicity = flows::distance(&fam.projector(base + 2.0 * PI)?, &fam.projector(base)?)?;
        Ok((min_gap, periodicity))
    }

    pub fn identity(&self) -> Unit {
        match &self.engine {
            Engine::Free(f) => {
                let n = f.sys.h.nrows();
                Unit::one_particle(CMat::identity(n, n))
            }
            Engine::Dense(d) => Unit(BlockOperator::identity(&d.basis)),
        }
    }
}
