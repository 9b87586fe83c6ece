//! Acceptance gate. Runs the shipped configs and prints one PASS/FAIL line
//! per criterion. Tolerances are pinned here, not taken from the configs.
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not fail
//! the run; any other failure does, and so does a known failure that starts
//! passing (the list must then be updated).

mod common;

use std::process::ExitCode;

use index_lab::report::Row;
use index_lab::SweepResult;

use common::{config, row, run};

const MAGNETIC_DISTANCE: f64 = 0.05;
const MAGNETIC_SECONDS: f64 = 300.0;
/// Distances at rounding level carry no trend; growth below this is noise.
const ROUNDING_SLACK: f64 = 1e-12;
const DIMERIZED_DISTANCE: f64 = 0.02;
const ATOMIC_CHARGE: f64 = 1e-10;
const ADDITIVITY_EXACT: f64 = 1e-6;
const ADDITIVITY_TRANSPORT: f64 = 0.05;
const WINDING: f64 = 0.02;
const WINDING_DET: f64 = 0.05;
const WINDING_DIM: usize = 4096;
const ADZ_DISTANCE: f64 = 0.1;
const ADZ_POWER: f64 = 1e-6;
const ADZ_COCYCLE: f64 = 1e-7;
const SECTOR_DISTANCE: f64 = 0.02;
const DRESSED_COMMUTATOR: f64 = 1e-10;
const K_ROUTES: f64 = 1e-6;
const K_ROUTES_DIM: usize = 1024;
const CLUSTERING_IDENTITIES: f64 = 1e-10;

/// The flux loop index on 6x6 is 0.94 per quantum; see the README.
const KNOWN_FAILURES: &[&str] = &["C5 combined integer distance"];

struct Line {
    name: String,
    passed: bool,
    detail: String,
}

fn line(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Line {
    Line { name: name.into(), passed, detail: detail.into() }
}

fn num(v: &serde_json::Value, path: &[&str]) -> f64 {
    let mut cur = v;
    for k in path {
        cur = &cur[*k];
    }
    cur.as_f64().unwrap_or_else(|| panic!("missing {path:?}"))
}

fn all_ok(r: &SweepResult) -> bool {
    r.rows.iter().all(Row::is_ok)
}

fn c1() -> Vec<Line> {
    let r = run(&config("magnetic_hofstadter"));
    let sizes = [[6, 6], [9, 9], [12, 12]];
    let rows: Vec<&Row> = sizes.iter().map(|&s| row(&r, "magnetic_translation", s).0).collect();
    let d: Vec<f64> = rows.iter().map(|r| r.integer_distance.unwrap()).collect();
    let t: Vec<f64> = rows.iter().map(|r| r.wall_time_s).collect();
    vec![
        line("C1 magnetic translation distance at 6x6", d[0] <= MAGNETIC_DISTANCE, format!("{:.3e} <= {MAGNETIC_DISTANCE}", d[0])),
        line(
            "C1 distance non-increasing over 6, 9, 12",
            d.windows(2).all(|w| w[1] <= w[0] + ROUNDING_SLACK),
            format!("{:.3e}, {:.3e}, {:.3e} (slack {ROUNDING_SLACK})", d[0], d[1], d[2]),
        ),
        line(
            "C1 wall time per size",
            t.iter().all(|&s| s <= MAGNETIC_SECONDS),
            format!("{:.1} s, {:.1} s, {:.1} s <= {MAGNETIC_SECONDS} s", t[0], t[1], t[2]),
        ),
    ]
}

fn c2() -> Vec<Line> {
    let atomic = run(&config("lsm_atomic"));
    let worst = [[4, 2], [4, 3]]
        .iter()
        .map(|&s| {
            let (r, d) = row(&atomic, "translation", s);
            let l2 = s[1] as f64;
            (num(d, &["p_column_charge"]) - l2).abs().max((r.p_index.unwrap() + l2).abs())
        })
        .fold(0.0, f64::max);
    let dimer = run(&config("lsm_dimerized"));
    let d = row(&dimer, "translation^2", [12, 1]).0.integer_distance.unwrap();
    vec![
        line("C2 atomic filled: p<Q_0> = L2 = -p Ind", all_ok(&atomic) && worst <= ATOMIC_CHARGE, format!("{worst:.3e} <= {ATOMIC_CHARGE}")),
        line("C2 dimerized ring distance at L1 = 12", d <= DIMERIZED_DISTANCE, format!("{d:.3e} <= {DIMERIZED_DISTANCE}")),
    ]
}

fn c3() -> Vec<Line> {
    let r = run(&config("additivity_hofstadter"));
    let (mut exact, mut transport) = (0.0f64, 0.0f64);
    for row in &r.rows {
        let res = row.residual.unwrap_or(f64::NAN);
        if row.label.contains("flux") {
            transport = transport.max(res);
        } else {
            exact = exact.max(res);
        }
    }
    vec![
        line("C3 additivity of exact pairs", all_ok(&r) && exact <= ADDITIVITY_EXACT, format!("{exact:.3e} <= {ADDITIVITY_EXACT}")),
        line(
            "C3 additivity of transport pairs",
            all_ok(&r) && transport <= ADDITIVITY_TRANSPORT,
            format!("{transport:.3e} <= {ADDITIVITY_TRANSPORT}"),
        ),
    ]
}

const INTERACTING: [(&str, &str); 3] =
    [("winding_dimerized", "translation^2"), ("winding_cdw", "translation"), ("winding_cdw_square", "translation^2")];

fn c4_c7() -> Vec<Line> {
    let (mut winding, mut det, mut dim, mut gapped) = (0.0f64, 0.0f64, 0usize, true);
    let (mut commutator, mut k_routes, mut k_dim) = (0.0f64, 0.0f64, 0usize);
    for (name, label) in INTERACTING {
        let r = run(&config(name));
        let (row, d) = row(&r, label, [8, 1]);
        winding = winding.max(num(d, &["winding", "residual"]));
        det = det.max(num(d, &["winding", "det_residual"]));
        dim = dim.max(row.dim.unwrap());
        gapped &= row.admissible == Some(true);
        commutator = commutator.max(num(d, &["dressed_commutator"]));
        k_routes = k_routes.max(num(d, &["k_routes_difference"]));
        k_dim = k_dim.max(row.dim.unwrap());
    }
    vec![
        line(
            "C4 |winding - p Ind| on gapped interacting models",
            gapped && dim <= WINDING_DIM && winding <= WINDING,
            format!("{winding:.3e} <= {WINDING} (dim {dim})"),
        ),
        line("C4 |det_P Z(2pi) - 1|", det <= WINDING_DET, format!("{det:.3e} <= {WINDING_DET}")),
        line("C7 ||[Qbar, P]||", commutator <= DRESSED_COMMUTATOR, format!("{commutator:.3e} <= {DRESSED_COMMUTATOR}")),
        line(
            "C7 spectral and time-integral K agree",
            k_dim <= K_ROUTES_DIM && k_routes <= K_ROUTES,
            format!("{k_routes:.3e} <= {K_ROUTES} (dim {k_dim})"),
        ),
    ]
}

fn c5() -> Vec<Line> {
    let r = run(&config("adz_hofstadter"));
    let (row, d) = row(&r, "adz", [6, 6]);
    let dist = row.integer_distance.unwrap();
    let power = num(d, &["power_identity_residual"]);
    let cocycle = num(d, &["cocycle_residual"]);
    vec![
        line("C5 combined integer distance", dist <= ADZ_DISTANCE, format!("{dist:.3e} <= {ADZ_DISTANCE}")),
        line("C5 power identity", power <= ADZ_POWER, format!("{power:.3e} <= {ADZ_POWER}")),
        line("C5 cocycle", cocycle <= ADZ_COCYCLE, format!("{cocycle:.3e} <= {ADZ_COCYCLE}")),
    ]
}

fn c6() -> Vec<Line> {
    let r = run(&config("sectors_cdw"));
    let (_, d) = row(&r, "translation", [8, 1]);
    let transposition = d["transposition"].as_bool() == Some(true);
    let worst = (0..2)
        .map(|m| {
            let s = &row(&r, &format!("sector[{m}]"), [8, 1]).1["sector"];
            num(s, &["power_integer_distance"]).max(num(s, &["cycle_integer_distance"]))
        })
        .fold(0.0, f64::max);
    vec![
        line("C6 translation is a transposition of the sectors", transposition, format!("{transposition}")),
        line("C6 power and cycle variants integer", worst <= SECTOR_DISTANCE, format!("{worst:.3e} <= {SECTOR_DISTANCE}")),
    ]
}

fn c8() -> Vec<Line> {
    let r = run(&config("cluster_ladder"));
    let v: Vec<f64> = (1..=3).map(|d| row(&r, &format!("clustering[{d}]"), [8, 2]).0.residual.unwrap()).collect();
    let (_, m) = row(&r, "clustering_map", [8, 2]);
    let ident = num(m, &["q_p"]).max(num(m, &["p_q_minus_p_o_q"]));
    vec![
        line(
            "C8 clustering strictly decreasing over 1, 2, 3",
            v.windows(2).all(|w| w[1] < w[0]),
            format!("{:.3e}, {:.3e}, {:.3e}", v[0], v[1], v[2]),
        ),
        line("C8 clustering map identities", ident <= CLUSTERING_IDENTITIES, format!("{ident:.3e} <= {CLUSTERING_IDENTITIES}")),
    ]
}

fn c9() -> Vec<Line> {
    let fx = common::fixtures();
    let worst = fx.iter().map(common::Fixture::deviation).fold(0.0, f64::max);
    let mut out = vec![line(
        "C9 scenario outputs match the brute-force reference",
        fx.iter().all(common::Fixture::agrees),
        format!("{} fixtures, worst {worst:.3e} <= {}", fx.len(), common::AGREEMENT),
    )];
    for f in fx.iter().filter(|f| !f.agrees()) {
        out.push(line(format!("C9 {}", f.name), false, format!("library {} reference {}", f.library, f.reference)));
    }
    out
}

fn main() -> ExitCode {
    let jobs: [fn() -> Vec<Line>; 8] = [c1, c2, c3, c4_c7, c5, c6, c8, c9];
    let mut lines: Vec<Line> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|job| s.spawn(job)).collect();
        handles.into_iter().flat_map(|h| h.join().expect("criterion job")).collect()
    });
    lines.sort_by(|a, b| a.name.cmp(&b.name));
    let mut ok = true;
    for l in &lines {
        let known = KNOWN_FAILURES.contains(&l.name.as_str());
        let tag = match (l.passed, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as known failure)",
        };
        ok &= l.passed != known;
        println!("{tag:<14} {:<56} {}", l.name, l.detail);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
