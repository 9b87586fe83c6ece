//! Shared by the lab test targets: config loading, and scenario outputs
//! recomputed by the brute-force reference in `index-lab-oracle`.

#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::Value;

use index_lab::config::UnitaryConfig;
use index_lab::report::Row;
use index_lab::{ExperimentConfig, SweepResult};
use index_lab_oracle::fock::Space;
use index_lab_oracle::grid::Grid;
use index_lab_oracle::{self as oracle, c, eigh, C, M, PI};

pub const THIRD: f64 = 2.0 * PI / 3.0;

/// Library against reference.
pub const AGREEMENT: f64 = 1e-8;

pub fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn config(name: &str) -> ExperimentConfig {
    let path = configs_dir().join(format!("{name}.json"));
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()))
}

pub fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

pub fn run(cfg: &ExperimentConfig) -> SweepResult {
    index_lab::run(cfg, threads(), false).expect("sweep runs")
}

/// Row and details with the given label and size.
pub fn row<'a>(r: &'a SweepResult, label: &str, size: [usize; 2]) -> (&'a Row, &'a Value) {
    let i = r
        .rows
        .iter()
        .position(|row| row.label == label && [row.l1, row.l2] == size)
        .unwrap_or_else(|| panic!("no row {label} at {size:?}; rows: {:?}", r.rows.iter().map(|r| &r.label).collect::<Vec<_>>()));
    (&r.rows[i], &r.details[i])
}

/// One scenario output next to its recomputation.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub library: f64,
    pub reference: f64,
}

impl Fixture {
    fn new(name: impl Into<String>, library: f64, reference: f64) -> Self {
        Self { name: name.into(), library, reference }
    }

    pub fn deviation(&self) -> f64 {
        (self.library - self.reference).abs() / self.reference.abs().max(1.0)
    }

    pub fn agrees(&self) -> bool {
        self.deviation() <= AGREEMENT
    }
}

fn diag_of(sites: &[usize], n: usize) -> M {
    let mut m = M::zeros(n, n);
    for &x in sites {
        m[(x, x)] = c(1.0);
    }
    m
}

fn occupied(h: &M, n: usize) -> M {
    let (_, v) = eigh(h);
    let f = v.columns(0, n).into_owned();
    &f * f.adjoint()
}

/// One-particle split at `∂_−` and its phase `arg Π (1 + e^{2πiλ})/2`.
fn free_split(g: &Grid, u: &M) -> (M, f64) {
    let n = g.n();
    let chi = diag_of(&g.half(), n);
    let (m, _) = g.boundaries();
    let chi_m = diag_of(&g.ball(&m, g.split_radius()), n);
    let t = &chi_m * (u.adjoint() * &chi * u - &chi) * &chi_m;
    let (l, _) = eigh(&(&chi + &t));
    let z: C = l.iter().map(|&x| (C::from_polar(1.0, 2.0 * PI * x) + 1.0) * 0.5).product();
    (t, oracle::wrap(z.arg()))
}

/// `Tr(P T_−)` for the `k`-fold product of `u` with itself, splits composed.
fn free_power_index(g: &Grid, p: &M, u: &M, k: usize) -> f64 {
    let (t1, nu) = free_split(g, u);
    let mut t = t1.clone();
    for _ in 1..k {
        t = u.adjoint() * &t * u + &t1;
    }
    (p * &t).trace().re - k as f64 * nu / (2.0 * PI)
}

fn phase_of(x: &M) -> f64 {
    let (e, _) = eigh(x);
    let s: C = e.iter().map(|&l| C::from_polar(1.0, 2.0 * PI * l)).sum::<C>() / e.len() as f64;
    oracle::wrap(s.arg())
}

/// Vacuum-reference Fock split at `∂_−`, phase removed.
fn fock_split(sp: &Space, g: &Grid, u: &M) -> M {
    let q = sp.charge(&g.half());
    let (m, _) = g.boundaries();
    let a = u.adjoint() * &q * u - &q;
    let raw = sp.vacuum_condexp(&a, &g.ball(&m, g.split_radius()));
    let nu = phase_of(&(&q + &raw));
    raw - M::identity(sp.dim(), sp.dim()) * c(nu / (2.0 * PI))
}

/// Fock split of `u^k`, composed from the split of `u`.
fn fock_power_split(sp: &Space, g: &Grid, u: &M, k: usize) -> M {
    let t1 = fock_split(sp, g, u);
    let mut t = t1.clone();
    for _ in 1..k {
        t = u.adjoint() * &t * u + &t1;
    }
    t
}

/// Lowest `p` states with `k` particles, embedded in `sp`.
fn ground(sp: &Space, h: &M, k: usize, p: usize) -> M {
    let idx: Vec<usize> = (0..sp.dim()).filter(|&i| sp.states[i].count_ones() as usize == k).collect();
    let sub = M::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
    let (_, v) = eigh(&sub);
    let mut f = M::zeros(sp.dim(), p);
    for (a, &i) in idx.iter().enumerate() {
        for j in 0..p {
            f[(i, j)] = v[(a, j)];
        }
    }
    f
}

fn with_sizes(mut cfg: ExperimentConfig, sizes: &[[usize; 2]]) -> ExperimentConfig {
    cfg.sizes = sizes.to_vec();
    cfg
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("detail {key} missing in {v}"))
}

fn lsm_atomic() -> Vec<Fixture> {
    let r = run(&with_sizes(config("lsm_atomic"), &[[4, 2]]));
    let (row, details) = row(&r, "translation", [4, 2]);
    let g = Grid::new(4, 2);
    let sp = Space::full(8);
    let full = sp.index(0xff).unwrap();
    let tm = fock_split(&sp, &g, &sp.second_quantize(&oracle::models::translation(&g, 1)));
    let charge = sp.charge(&g.columns(&[0]))[(full, full)].re;
    vec![
        Fixture::new("atomic 4x2: p Ind of the translation", row.p_index.unwrap(), tm[(full, full)].re),
        Fixture::new("atomic 4x2: p <Q_0>", num(details, "p_column_charge"), charge),
    ]
}

fn density_wave_translation() -> Vec<Fixture> {
    let r = run(&config("winding_cdw"));
    let (row, _) = row(&r, "translation", [8, 1]);
    let g = Grid::new(8, 1);
    let sp = Space::sectors(8, &[0, 1, 2, 3, 4]);
    let (h1, pairs) = oracle::models::cdw(8, 0.1, 10.0, 10.0);
    let f = ground(&sp, &(sp.quadratic(&h1) + sp.pairs(&pairs)), 4, 2);
    let tm = fock_split(&sp, &g, &sp.second_quantize(&oracle::models::translation(&g, 1)));
    vec![Fixture::new("density wave 8x1: p Ind of the translation", row.p_index.unwrap(), (f.adjoint() * tm * f).trace().re)]
}

fn dimerized_square_translation() -> Vec<Fixture> {
    let r = run(&config("winding_dimerized"));
    let (row, _) = row(&r, "translation^2", [8, 1]);
    let g = Grid::new(8, 1);
    let sp = Space::sectors(8, &[0, 1, 2, 3, 4]);
    let (h1, pairs) = oracle::models::dimerized(&g, 1.0, 0.1, 0.0, 1.5, 1.0, 1.0);
    let f = ground(&sp, &(sp.quadratic(&h1) + sp.pairs(&pairs)), 4, 1);
    let tm = fock_power_split(&sp, &g, &sp.second_quantize(&oracle::models::translation(&g, 1)), 2);
    vec![Fixture::new("interacting dimerized 8x1: p Ind of the square translation", row.p_index.unwrap(), (f.adjoint() * tm * f).trace().re)]
}

fn density_wave_sectors() -> Vec<Fixture> {
    let r = run(&config("sectors_cdw"));
    let g = Grid::new(8, 1);
    let sp = Space::sectors(8, &[0, 1, 2, 3, 4]);
    let (h1, pairs) = oracle::models::cdw(8, 1.0, 100.0, 0.0);
    let f = ground(&sp, &(sp.quadratic(&h1) + sp.pairs(&pairs)), 4, 2);
    let stag = sp.diag(|s| (0..8).filter(|x| s >> x & 1 == 1).map(|x| if x % 2 == 0 { 1.0 } else { -1.0 }).sum());
    let (_, v) = eigh(&(f.adjoint() * &stag * &f));
    let th = sp.second_quantize(&oracle::models::translation(&g, 1));
    let tm = fock_split(&sp, &g, &th);
    let tm2 = th.adjoint() * &tm * &th + &tm;
    let mut out = vec![Fixture::new(
        "density wave V=100: p Ind of the translation",
        row(&r, "translation", [8, 1]).0.p_index.unwrap(),
        (f.adjoint() * &tm * &f).trace().re,
    )];
    for m in 0..2 {
        let fm = &f * v.columns(m, 1);
        let power = (fm.adjoint() * &tm2 * &fm)[(0, 0)].re;
        out.push(Fixture::new(format!("density wave V=100: sector {m} index"), row(&r, &format!("sector[{m}]"), [8, 1]).0.index.unwrap(), power));
    }
    out
}

fn magnetic() -> Vec<Fixture> {
    let r = run(&with_sizes(config("magnetic_hofstadter"), &[[6, 6]]));
    let g = Grid::new(6, 6);
    let p = occupied(&oracle::models::harper(&g, 1.0, 0.0, THIRD, 0.0), 12);
    let mag = oracle::models::magnetic_translation(&g, THIRD);
    let th = oracle::models::translation(&g, 1);
    vec![
        Fixture::new(
            "Hofstadter 6x6: magnetic translation index",
            row(&r, "magnetic_translation", [6, 6]).0.index.unwrap(),
            free_power_index(&g, &p, &mag, 1),
        ),
        Fixture::new(
            "Hofstadter 6x6: index of the third power of the translation",
            row(&r, &UnitaryConfig::Translation { power: 3 }.label(), [6, 6]).0.index.unwrap(),
            free_power_index(&g, &p, &th, 3),
        ),
    ]
}

fn additivity() -> Vec<Fixture> {
    let mut cfg = config("additivity_hofstadter");
    cfg.pairs.retain(|pair| {
        matches!(
            (pair.first, pair.second),
            (UnitaryConfig::MagneticTranslation { .. }, UnitaryConfig::MagneticTranslation { .. })
        )
    });
    assert_eq!(cfg.pairs.len(), 1);
    let r = run(&cfg);
    let g = Grid::new(6, 6);
    let p = occupied(&oracle::models::harper(&g, 1.0, 0.0, THIRD, 0.0), 12);
    let mag = oracle::models::magnetic_translation(&g, THIRD);
    vec![Fixture::new(
        "Hofstadter 6x6: composite magnetic translation index",
        r.rows[0].index.unwrap(),
        free_power_index(&g, &p, &mag, 2),
    )]
}

fn dimerized_chain() -> Vec<Fixture> {
    let r = run(&config("lsm_dimerized"));
    let g = Grid::new(12, 1);
    let (h, _) = oracle::models::dimerized(&g, 1.0, 0.5, 0.0, 0.3, 0.0, 0.0);
    let p = occupied(&h, 6);
    let th = oracle::models::translation(&g, 1);
    vec![Fixture::new(
        "free dimerized 12x1: index of the square translation",
        row(&r, "translation^2", [12, 1]).0.index.unwrap(),
        free_power_index(&g, &p, &th, 2),
    )]
}

fn ladder_clustering() -> Vec<Fixture> {
    let r = run(&config("cluster_ladder"));
    let g = Grid::new(8, 2);
    let (h, _) = oracle::models::dimerized(&g, 1.0, 0.5, 0.5, 0.5, 0.0, 0.0);
    let p = occupied(&h, 8);
    (1..=3)
        .map(|d| {
            let y = g.site(d, 0);
            Fixture::new(
                format!("free ladder 8x2: density correlation at separation {d}"),
                row(&r, &format!("clustering[{d}]"), [8, 2]).0.residual.unwrap(),
                p[(0, y)].norm_sqr(),
            )
        })
        .collect()
}

/// Every scenario-level fixture, computed in parallel.
pub fn fixtures() -> Vec<Fixture> {
    let jobs: [fn() -> Vec<Fixture>; 8] = [
        lsm_atomic,
        density_wave_translation,
        dimerized_square_translation,
        density_wave_sectors,
        magnetic,
        additivity,
        dimerized_chain,
        ladder_clustering,
    ];
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|job| s.spawn(job)).collect();
        handles.into_iter().flat_map(|h| h.join().expect("fixture job")).collect()
    })
}
