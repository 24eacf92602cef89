//! Acceptance checks, one line per criterion. Run with
//! `cargo test --test acceptance`; pass criterion numbers after `--` to run a
//! subset.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use common::{lattice_offset, point_chain, product_dijkstra, reference_signatures};
use homolink_cli::scenario::{parse_scenario, Scenario, ShapeSpec};
use homolink_core::combinatorics::{binomial, partitions};
use homolink_core::invariant::{phi_s, phi_vector, Engine, EngineError, FormField};
use homolink_core::lowdim::{
    biot_savart_field, gauss_flux_form, gauss_linking_number, residue_form, solid_angle_flux,
    winding_number, ClosedFormKind,
};
use homolink_core::mesh::geometry::chain_distance;
use homolink_core::mesh::sample::{
    sample_circle, sample_polyline_loop, sample_sphere, Embedding, Orientation,
};
use homolink_core::mesh::{Chain, Point, SkeletonSet};
use homolink_core::planner::{
    augmented_search, build_grid_graph, edge_signatures, EdgeSignatureCache, GridGraph, GridSpec,
    SearchConfig, SearchMode,
};
use homolink_core::quadrature::QuadConfig;
use homolink_core::quotient::{
    auto_q, connected_quotient_search, q_membership, quotient_augmented_search, QLattice, Subspace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn scenario(name: &str) -> (Scenario, PathBuf) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let text = std::fs::read_to_string(dir.join(name)).expect("bundled scenario");
    (parse_scenario(&text).expect("bundled scenario parses"), dir)
}

fn tight() -> QuadConfig {
    QuadConfig {
        order: 8,
        split_ratio: 0.1,
        ..QuadConfig::default()
    }
}

fn near_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

// ---------------------------------------------------------------------------
// 1, 2: the 5D torus experiment

struct TorusValues {
    base: Vec<(String, f64)>,
    secs: f64,
}

fn torus_values(sc: &Scenario, dir: &Path, only: usize) -> Result<Vec<(String, f64)>, String> {
    let set = sc.skeleton_set(dir).map_err(|e| e.to_string())?;
    let cands = sc.candidate_chains(dir).map_err(|e| e.to_string())?;
    let engine =
        Engine::new(&set, sc.d, sc.n, sc.tolerances.quad(), 0).map_err(|e| e.to_string())?;
    let cands = &cands[..only.min(cands.len())];
    let chains: Vec<Chain> = cands.iter().map(|(_, c)| c.clone()).collect();
    let mut out = Vec::new();
    for ((label, _), r) in cands.iter().zip(engine.signatures(&chains)) {
        out.push((
            label.clone(),
            r.map_err(|e| format!("{label}: {e}"))?.0.values[0],
        ));
    }
    Ok(out)
}

fn refined(sc: &Scenario) -> Scenario {
    let mut sc = sc.clone();
    for s in sc.skeletons.iter_mut().chain(sc.candidates.iter_mut()) {
        match s {
            ShapeSpec::Torus { resolution, .. } | ShapeSpec::Sphere { resolution, .. } => {
                *resolution = [resolution[0] * 2, resolution[1] * 2];
            }
            _ => {}
        }
    }
    sc
}

fn torus_base() -> Result<TorusValues, String> {
    let (sc, dir) = scenario("torus5d.json");
    let t = Instant::now();
    let base = torus_values(&sc, &dir, usize::MAX)?;
    Ok(TorusValues {
        base,
        secs: t.elapsed().as_secs_f64(),
    })
}

fn criterion_1(t: &TorusValues) -> Check {
    let (sc, dir) = scenario("torus5d.json");
    ensure!(sc.d == 5 && sc.n == 3, "scene is D={} N={}", sc.d, sc.n);
    match &sc.skeletons[0] {
        ShapeSpec::Torus {
            r,
            big_r,
            resolution,
            ..
        } => ensure!(
            *r == 0.8 && *big_r == 1.6 && *resolution == [24, 24],
            "torus r={r} R={big_r} res={resolution:?}"
        ),
        other => return Err(format!("skeleton is {other:?}")),
    }
    ensure!(
        sc.tolerances.quad_order == 4,
        "quad order {}",
        sc.tolerances.quad_order
    );
    let want = [("omega(1)", -1.0), ("omega(2)", 0.0), ("omega'(1)", 0.0)];
    for ((label, v), (wl, w)) in t.base.iter().zip(want) {
        ensure!(label == wl, "candidate order: {label} vs {wl}");
        ensure!((v - w).abs() <= 0.05, "{label} = {v}, want {w} ± 0.05");
    }
    let fine = torus_values(&refined(&sc), &dir, 3)?;
    let mut worst: f64 = 0.0;
    for ((label, a), (_, b)) in t.base.iter().zip(&fine) {
        ensure!(
            (a - b).abs() < 0.02,
            "{label} moved {a} -> {b} on the refined mesh"
        );
        worst = worst.max((a - b).abs());
    }
    Ok(format!(
        "{} in {:.1} s with {} worker(s); refined mesh max change {worst:.1e}",
        t.base[..3]
            .iter()
            .map(|(l, v)| format!("{l}={v:.6}"))
            .collect::<Vec<_>>()
            .join(" "),
        t.secs,
        workers()
    ))
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn criterion_2(t: &TorusValues) -> Check {
    let mut seen = Vec::new();
    for want in ["omega(1)", "omega(1.2)", "omega(1.5)"] {
        let (_, v) = t
            .base
            .iter()
            .find(|(l, _)| l == want)
            .ok_or(format!("{want} missing"))?;
        ensure!((v + 1.0).abs() <= 0.05, "{want} = {v}");
        seen.push(format!("{want}={v:.6}"));
    }
    Ok(seen.join(" "))
}

// ---------------------------------------------------------------------------
// 3: closed forms

fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().map(|v| v * v).sum::<f64>().sqrt();
    got.iter()
        .zip(want)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3a);
    let mut worst = [0.0f64; 3];

    let s2 = [0.3, -0.2];
    let f = FormField::new(&point_chain(&s2), 2, 2, tight()).map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let got =
            ClosedFormKind::Residue.from_psi(&f.psi_coefficients(&x).map_err(|e| e.to_string())?);
        worst[0] = worst[0].max(rel_err(
            &got,
            &residue_form(x, s2).map_err(|e| e.to_string())?,
        ));
    }

    let wire = sample_polyline_loop(
        &[
            [1.0, 0.0, 0.0],
            [0.0, 1.2, 0.3],
            [-1.0, 0.0, -0.2],
            [0.1, -0.9, 0.0],
        ]
        .map(|p| Point(p.to_vec())),
        true,
    )
    .map_err(|e| e.to_string())?;
    let f = FormField::new(&wire, 3, 2, tight()).map_err(|e| e.to_string())?;
    let mut n = 0;
    while n < 100 {
        let x = [
            rng.gen_range(-2.5..2.5),
            rng.gen_range(-2.5..2.5),
            rng.gen_range(-2.5..2.5),
        ];
        let Ok(want) = biot_savart_field(x, &wire, 0.05) else {
            continue;
        };
        n += 1;
        let got = ClosedFormKind::BiotSavart
            .from_psi(&f.psi_coefficients(&x).map_err(|e| e.to_string())?);
        worst[1] = worst[1].max(rel_err(&got, &want));
    }

    let s3 = [0.1, 0.5, -0.4];
    let f = FormField::new(&point_chain(&s3), 3, 3, tight()).map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let x = [
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        ];
        let got =
            ClosedFormKind::GaussFlux.from_psi(&f.psi_coefficients(&x).map_err(|e| e.to_string())?);
        worst[2] = worst[2].max(rel_err(
            &got,
            &gauss_flux_form(x, s3).map_err(|e| e.to_string())?,
        ));
    }
    for (w, name) in worst.iter().zip(["residue", "Biot-Savart", "Gauss flux"]) {
        ensure!(*w < 1e-8, "{name} relative error {w:e}");
    }

    // winding and flux integrals against the general invariant
    let q = QuadConfig::default();
    let mut dev: f64 = 0.0;
    let mut count = 0;
    while count < 40 {
        let poly = random_loop_2d(&mut rng, [0.0, 0.0], 2.0);
        let s = [rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5)];
        let (Ok(w), Ok(v)) = (
            winding_number(&poly, s),
            phi_s(&poly, &point_chain(&s), 2, 2, q),
        ) else {
            continue;
        };
        dev = dev.max((w - v).abs());
        count += 1;
    }
    for _ in 0..10 {
        let origin = vec![
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(-0.5..0.5),
        ];
        let radius = rng.gen_range(0.8..1.5);
        let e = Embedding::new(3, vec![0, 1, 2], origin).unwrap();
        let surf =
            sample_sphere(radius, &e, (8, 16), Orientation::Forward).map_err(|e| e.to_string())?;
        let s = [
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        ];
        let (Ok(w), Ok(v)) = (
            solid_angle_flux(&surf, s),
            phi_s(&surf, &point_chain(&s), 3, 3, q),
        ) else {
            continue;
        };
        dev = dev.max((w - v).abs());
        count += 1;
    }
    ensure!(dev <= 0.01, "winding/flux deviation {dev}");
    Ok(format!(
        "max rel err residue {:.1e}, Biot-Savart {:.1e}, Gauss {:.1e}; {count} winding/flux integrals within {dev:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

fn random_loop_2d(rng: &mut ChaCha8Rng, c: [f64; 2], r: f64) -> Chain {
    let n = rng.gen_range(3..9);
    let pts: Vec<Point> = (0..n)
        .map(|i| {
            let a = (i as f64 + 0.8 * rng.gen::<f64>()) / n as f64 * std::f64::consts::TAU;
            let rr = r * rng.gen_range(0.4..1.4);
            Point(vec![c[0] + rr * a.cos(), c[1] + rr * a.sin()])
        })
        .collect();
    sample_polyline_loop(&pts, true).unwrap()
}

fn random_loop_3d(rng: &mut ChaCha8Rng, c: [f64; 3], r: f64) -> Chain {
    let n = rng.gen_range(4..8);
    let tilt = rng.gen_range(0.0..1.0);
    let pts: Vec<Point> = (0..n)
        .map(|i| {
            let a = (i as f64 + 0.8 * rng.gen::<f64>()) / n as f64 * std::f64::consts::TAU;
            let rr = r * rng.gen_range(0.6..1.3);
            Point(vec![
                c[0] + rr * a.cos(),
                c[1] + rr * a.sin() * (1.0 - tilt),
                c[2] + rr * a.sin() * tilt + rng.gen_range(-0.3..0.3),
            ])
        })
        .collect();
    sample_polyline_loop(&pts, true).unwrap()
}

// ---------------------------------------------------------------------------
// 4: linking number by counting crossings through a spanning disk

/// Linking number of a planar convex loop `a` (in z = 0) with `b`: signed
/// crossings of `b` through the polygon bounded by `a`.
fn disk_crossings(a: &Chain, b: &Chain) -> i64 {
    let segs = |c: &Chain| -> Vec<([f64; 3], [f64; 3], i64)> {
        c.terms()
            .iter()
            .map(|(s, k)| {
                let v = s.vertices();
                let p = |i: usize| [v[i].0[0], v[i].0[1], v[i].0[2]];
                (p(0), p(1), *k)
            })
            .collect()
    };
    let sa = segs(a);
    assert!(
        sa.iter().all(|(p, q, _)| p[2] == 0.0 && q[2] == 0.0),
        "spanning loop must lie in z = 0"
    );
    let area: f64 = sa
        .iter()
        .map(|(p, q, k)| *k as f64 * (p[0] * q[1] - q[0] * p[1]))
        .sum();
    let inside = |x: f64, y: f64| {
        let mut odd = false;
        for (p, q, _) in &sa {
            if (p[1] > y) != (q[1] > y) && x < p[0] + (y - p[1]) / (q[1] - p[1]) * (q[0] - p[0]) {
                odd = !odd;
            }
        }
        odd
    };
    let mut n = 0;
    for (p, q, k) in segs(b) {
        if (p[2] > 0.0) == (q[2] > 0.0) {
            continue;
        }
        let t = p[2] / (p[2] - q[2]);
        if inside(p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])) {
            n += k * (q[2] - p[2]).signum() as i64;
        }
    }
    n * area.signum() as i64
}

fn criterion_4() -> Check {
    let a = sample_circle(1.0, &Embedding::standard(3, 2), 64, Orientation::Forward).unwrap();
    let circle = |axes: Vec<usize>, origin: [f64; 3], r: f64, o: Orientation| {
        sample_circle(r, &Embedding::new(3, axes, origin.to_vec()).unwrap(), 64, o).unwrap()
    };
    let linked = circle(vec![0, 2], [1.0, 0.0, 0.0], 1.0, Orientation::Forward);
    let cases = [
        ("hopf", linked.clone()),
        (
            "hopf reversed",
            circle(vec![0, 2], [1.0, 0.0, 0.0], 1.0, Orientation::Reversed),
        ),
        (
            "apart",
            circle(vec![0, 2], [3.5, 0.0, 0.0], 1.0, Orientation::Forward),
        ),
        (
            "above",
            circle(vec![0, 1], [0.0, 0.0, 2.0], 1.0, Orientation::Forward),
        ),
        (
            "twice",
            linked
                .concat(&circle(
                    vec![0, 2],
                    [1.2, 0.0, 0.0],
                    0.9,
                    Orientation::Forward,
                ))
                .unwrap(),
        ),
    ];
    let q = QuadConfig::default();
    let mut sign = None;
    let mut notes = Vec::new();
    for (name, b) in &cases {
        let v = phi_s(b, &a, 3, 2, q).map_err(|e| format!("{name}: {e}"))?;
        let oracle = disk_crossings(&a, b);
        if oracle != 0 {
            let s = *sign.get_or_insert((v / oracle as f64).signum());
            ensure!(
                (v - s * oracle as f64).abs() <= 0.01,
                "{name}: {v} vs crossings {oracle}"
            );
        } else {
            ensure!(v.abs() <= 0.01, "{name}: {v} for an unlinked pair");
        }
        let gauss = gauss_linking_number(b, &a).map_err(|e| e.to_string())?;
        ensure!(
            (v - gauss).abs() <= 0.01,
            "{name}: {v} vs Gauss integral {gauss}"
        );
        notes.push(format!("{name} {v:.4}/{oracle}"));
    }
    ensure!(
        (phi_s(&linked, &a, 3, 2, q).unwrap().abs() - 1.0).abs() <= 0.01,
        "hopf magnitude"
    );
    Ok(format!("phi/crossings: {}", notes.join(", ")))
}

// ---------------------------------------------------------------------------
// 5: randomized property suites

struct Instance {
    set: SkeletonSet,
    d: usize,
    w1: Chain,
    w2: Chain,
}

fn u(rng: &mut ChaCha8Rng, a: f64) -> f64 {
    rng.gen_range(-a..a)
}

fn random_instance(rng: &mut ChaCha8Rng, i: usize) -> Instance {
    if i % 4 == 3 {
        let m = rng.gen_range(1..3);
        let centres: Vec<[f64; 3]> = (0..m).map(|_| [u(rng, 1.0), 0.0, 0.0]).collect();
        let (c1, c2) = (
            [u(rng, 1.5), u(rng, 1.0), 0.0],
            [u(rng, 1.5), 0.0, u(rng, 1.0)],
        );
        Instance {
            set: SkeletonSet::unlabeled(
                centres
                    .into_iter()
                    .map(|c| random_loop_3d(rng, c, 1.0))
                    .collect(),
            ),
            d: 3,
            w1: random_loop_3d(rng, c1, 1.2),
            w2: random_loop_3d(rng, c2, 1.2),
        }
    } else {
        let m = rng.gen_range(1..4);
        let skel = (0..m)
            .map(|_| point_chain(&[u(rng, 2.0), u(rng, 2.0)]))
            .collect();
        let (c1, c2) = ([u(rng, 1.0), u(rng, 1.0)], [u(rng, 1.0), u(rng, 1.0)]);
        Instance {
            set: SkeletonSet::unlabeled(skel),
            d: 2,
            w1: random_loop_2d(rng, c1, 2.0),
            w2: random_loop_2d(rng, c2, 2.0),
        }
    }
}

fn signature(c: &Chain, inst: &Instance) -> Result<Vec<f64>, EngineError> {
    Ok(phi_vector(c, &inst.set, inst.d, 2, QuadConfig::default())?.values)
}

/// Draws closer than this to a skeleton are rejected: below it the bisection
/// depth limit no longer resolves the kernel.
const CLEARANCE: f64 = 0.02;

fn clear(inst: &Instance) -> bool {
    inst.set.skeletons.iter().all(|s| {
        chain_distance(&inst.w1, s) >= CLEARANCE && chain_distance(&inst.w2, s) >= CLEARANCE
    })
}

/// Runs `prop` on `want` instances whose chains keep clear of the skeletons.
fn suite(
    seed: u64,
    want: usize,
    mut prop: impl FnMut(&Instance) -> Result<Option<f64>, String>,
) -> Result<(usize, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ok, mut worst, mut i) = (0, 0.0f64, 0);
    while ok < want {
        let inst = random_instance(&mut rng, i);
        i += 1;
        if !clear(&inst) {
            continue;
        }
        if let Some(w) = prop(&inst)? {
            ok += 1;
            worst = worst.max(w);
        }
        ensure!(i < want * 20, "too many singular draws");
    }
    Ok((ok, worst))
}

fn criterion_5() -> Check {
    const N: usize = 200;
    let eps_int = 0.05;
    let mut notes = Vec::new();

    let (n, w) = suite(51, N, |inst| {
        let (Ok(a), Ok(b), Ok(ab)) = (
            signature(&inst.w1, inst),
            signature(&inst.w2, inst),
            signature(&inst.w1.concat(&inst.w2).unwrap(), inst),
        ) else {
            return Ok(None);
        };
        let dev = (0..a.len())
            .map(|k| (ab[k] - a[k] - b[k]).abs())
            .fold(0.0, f64::max);
        ensure!(dev <= 2.0 * eps_int, "linearity off by {dev}");
        Ok(Some(dev))
    })?;
    notes.push(format!("linearity {n} (max {w:.0e})"));

    let (n, _) = suite(52, N, |inst| {
        let (Ok(a), Ok(na)) = (
            signature(&inst.w1, inst),
            signature(&inst.w1.negated(), inst),
        ) else {
            return Ok(None);
        };
        ensure!(
            a.iter().zip(&na).all(|(x, y)| *x == -*y),
            "antisymmetry: {a:?} vs {na:?}"
        );
        Ok(Some(0.0))
    })?;
    notes.push(format!("antisymmetry {n} (exact)"));

    let (n, w) = suite(53, N, |inst| {
        let Ok(a) = signature(&inst.w1, inst) else {
            return Ok(None);
        };
        let dev = a.iter().map(|&x| near_int(x)).fold(0.0, f64::max);
        ensure!(dev <= eps_int, "non-integral cycle signature {a:?}");
        Ok(Some(dev))
    })?;
    notes.push(format!("integrality {n} (max {w:.0e})"));

    let (n, w) = loop_closure(54, N, eps_int)?;
    notes.push(format!("loop closure {n} (max {w:.0e})"));
    Ok(notes.join(", "))
}

/// Random walk-free paths: shortest hop paths through a random waypoint,
/// exploring neighbours in a random order.
fn hop_path(g: &GridGraph, rng: &mut ChaCha8Rng, from: u32, to: u32) -> Vec<u32> {
    let mut parent = vec![u32::MAX; g.vertex_count()];
    parent[from as usize] = from;
    let mut q = VecDeque::from([from]);
    while let Some(v) = q.pop_front() {
        if v == to {
            break;
        }
        let mut next: Vec<u32> = g.steps(v).map(|s| s.to).collect();
        for i in (1..next.len()).rev() {
            next.swap(i, rng.gen_range(0..=i));
        }
        for u in next {
            if parent[u as usize] == u32::MAX {
                parent[u as usize] = v;
                q.push_back(u);
            }
        }
    }
    let mut p = vec![to];
    while *p.last().unwrap() != from {
        p.push(parent[*p.last().unwrap() as usize]);
    }
    p.reverse();
    p
}

fn loop_closure(seed: u64, want: usize, eps_int: f64) -> Result<(usize, f64), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ok, mut worst, mut tries) = (0, 0.0f64, 0);
    while ok < want {
        tries += 1;
        ensure!(tries < want * 20, "too many singular draws");
        let g = build_grid_graph(&GridSpec {
            lower: vec![0.0, 0.0],
            upper: vec![10.0, 10.0],
            resolution: vec![10, 10],
            blocked: vec![],
        })
        .unwrap();
        let m = rng.gen_range(1..4);
        let pts = (0..m)
            .map(|_| point_chain(&[rng.gen_range(1.0..9.0), rng.gen_range(1.0..9.0)]))
            .collect();
        let engine =
            Engine::new(&SkeletonSet::unlabeled(pts), 2, 2, QuadConfig::default(), 1).unwrap();
        let Ok(cache) = edge_signatures(&g, &engine) else {
            continue;
        };
        let n = g.vertex_count() as u32;
        let (s, t) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let path = |rng: &mut ChaCha8Rng| {
            let w = rng.gen_range(0..n);
            let mut p = hop_path(&g, rng, s, w);
            p.extend(&hop_path(&g, rng, w, t)[1..]);
            cache.path_signature(&g, &p).unwrap()
        };
        let (a, b) = (path(&mut rng), path(&mut rng));
        let dev = a
            .iter()
            .zip(&b)
            .map(|(x, y)| near_int(x - y))
            .fold(0.0, f64::max);
        ensure!(dev <= 2.0 * eps_int, "path pair differs by {a:?} - {b:?}");
        worst = worst.max(dev);
        ok += 1;
    }
    Ok((ok, worst))
}

// ---------------------------------------------------------------------------
// 6, 7: planner

struct Plan {
    g: GridGraph,
    cache: EdgeSignatureCache,
    start: u32,
    goal: u32,
}

fn setup(sc: &Scenario, dir: &Path) -> Result<Plan, String> {
    let set = sc.skeleton_set(dir).map_err(|e| e.to_string())?;
    let g = build_grid_graph(sc.grid.as_ref().ok_or("no grid")?).map_err(|e| e.to_string())?;
    let engine = Engine::new(&set, sc.d, sc.n, sc.tolerances.quad(), sc.threads)
        .map_err(|e| e.to_string())?;
    let cache = edge_signatures(&g, &engine).map_err(|e| e.to_string())?;
    let start = g
        .locate(sc.start.as_ref().ok_or("no start")?)
        .map_err(|e| e.to_string())?;
    let goal = g
        .locate(sc.goal.as_ref().ok_or("no goal")?)
        .map_err(|e| e.to_string())?;
    Ok(Plan {
        g,
        cache,
        start,
        goal,
    })
}

fn differences_integral(sigs: &[&[f64]], tol: f64) -> Result<(), String> {
    for (i, a) in sigs.iter().enumerate() {
        for b in &sigs[i + 1..] {
            let d: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
            ensure!(
                d.iter().all(|&x| near_int(x) <= tol),
                "difference {d:?} is not integral"
            );
            ensure!(d.iter().any(|&x| x.abs() > 0.5), "repeated class {a:?}");
        }
    }
    Ok(())
}

fn criterion_6() -> Check {
    let t = Instant::now();
    let (sc, dir) = scenario("two_obstacles.json");
    let grid = sc.grid.as_ref().unwrap();
    ensure!(grid.resolution == [50, 50], "grid {:?}", grid.resolution);
    let p = setup(&sc, &dir)?;
    let out = augmented_search(
        &p.g,
        &p.cache,
        p.start,
        p.goal,
        &SearchMode::EnumerateK(10),
        &SearchConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let interior = p.g.vertex_at(&[2, 2]).unwrap();
    ensure!(
        p.g.degree(interior) == 8,
        "interior degree {}",
        p.g.degree(interior)
    );
    ensure!(out.classes.len() == 10, "{} classes", out.classes.len());
    let sigs: Vec<&[f64]> = out.classes.iter().map(|c| c.signature.as_slice()).collect();
    differences_integral(&sigs, 0.05)?;
    ensure!(
        out.classes.windows(2).all(|w| w[0].cost <= w[1].cost),
        "costs not sorted"
    );
    for c in &out.classes {
        ensure!(
            p.cache.path_signature(&p.g, &c.path).as_deref() == Some(c.signature.as_slice()),
            "path signature is not the edge sum"
        );
    }
    ensure!(secs <= 60.0, "50x50 took {secs:.1} s");

    let (small, dir) = scenario("two_obstacles_15.json");
    let q = setup(&small, &dir)?;
    let k = 10;
    let got = augmented_search(
        &q.g,
        &q.cache,
        q.start,
        q.goal,
        &SearchMode::EnumerateK(k),
        &SearchConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let oracle = product_dijkstra(&q.g, &q.cache, q.start, q.goal, 6, k + 20);
    ensure!(
        got.classes.len() == k && oracle.len() >= k,
        "{} vs {} classes",
        got.classes.len(),
        oracle.len()
    );
    let r = reference_signatures(&q.g, &q.cache, q.start);
    let rg = r[q.goal as usize].as_ref().unwrap();
    for (c, (_, oc)) in got.classes.iter().zip(&oracle) {
        ensure!(
            (c.cost - oc).abs() <= 1e-9,
            "rank {} cost {} vs oracle {oc}",
            c.rank,
            c.cost
        );
        let z = lattice_offset(&c.signature, rg);
        let hit = oracle
            .iter()
            .find(|(oz, _)| *oz == z)
            .ok_or(format!("class {z:?} unknown to oracle"))?;
        ensure!(
            (hit.1 - c.cost).abs() <= 1e-9,
            "class {z:?} cost {} vs oracle {}",
            c.cost,
            hit.1
        );
    }
    Ok(format!(
        "50x50: 10 classes, costs {:.2}..{:.2}, {:.2} s; 15x15 costs match product-graph oracle",
        out.classes[0].cost, out.classes[9].cost, secs
    ))
}

fn criterion_7() -> Check {
    let (sc, dir) = scenario("loop3d.json");
    ensure!(
        sc.grid.as_ref().unwrap().resolution == [16, 16, 16],
        "grid resolution"
    );
    let p = setup(&sc, &dir)?;
    let interior = p.g.vertex_at(&[1, 1, 1]).unwrap();
    ensure!(
        p.g.degree(interior) == 26,
        "interior degree {}",
        p.g.degree(interior)
    );
    let out = augmented_search(
        &p.g,
        &p.cache,
        p.start,
        p.goal,
        &SearchMode::EnumerateK(3),
        &SearchConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure!(out.classes.len() == 3, "{} classes", out.classes.len());
    let sigs: Vec<&[f64]> = out.classes.iter().map(|c| c.signature.as_slice()).collect();
    differences_integral(&sigs, 0.05)?;
    let off: Vec<f64> = sigs.iter().map(|s| s[0] - sigs[0][0]).collect();
    Ok(format!(
        "3 classes, offsets from the first {:?}",
        off.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>()
    ))
}

// ---------------------------------------------------------------------------
// 8: quotient

fn polyline(pts: &[[f64; 2]]) -> Chain {
    sample_polyline_loop(
        &pts.iter().map(|p| Point(p.to_vec())).collect::<Vec<_>>(),
        false,
    )
    .unwrap()
}

fn criterion_8() -> Check {
    let (sc, dir) = scenario("collar.json");
    let p = setup(&sc, &dir)?;
    let sub = sc.subspace.as_ref().ok_or("no subspace")?;
    let l = Subspace::from_boxes(&p.g, &sub.boxes);
    let eps = &sc.tolerances;
    let q = auto_q(&p.g, &p.cache, &l, eps.eps_int)
        .map_err(|e| e.to_string())?
        .with_eps(eps.eps_q);
    let set = sc.skeleton_set(&dir).map_err(|e| e.to_string())?;
    let quad = eps.quad();

    // over the top of both obstacles versus underneath both
    let (s, g) = (sc.start.clone().unwrap(), sc.goal.clone().unwrap());
    let s = [s[0], s[1]];
    let g = [g[0], g[1]];
    let left = polyline(&[s, [10.0, 40.0], [40.0, 40.0], g]);
    let right = polyline(&[s, [10.0, 8.0], [40.0, 8.0], g]);
    let a = phi_vector(&left, &set, 2, 2, quad)
        .map_err(|e| e.to_string())?
        .values;
    let b = phi_vector(&right, &set, 2, 2, quad)
        .map_err(|e| e.to_string())?
        .values;
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    ensure!(
        diff.iter().any(|x| x.abs() > 0.5),
        "plain signatures agree: {diff:?}"
    );
    ensure!(
        q_membership(&diff, &q),
        "difference {diff:?} not in Q = {:?}",
        q.basis()
    );
    let lone = vec![1.0, 0.0];
    ensure!(!q_membership(&lone, &q), "Q contains (1, 0)");

    let cfg = eps.quotient();
    let out = quotient_augmented_search(&p.g, &p.cache, &q, &l, p.start, p.goal, 5, &cfg)
        .map_err(|e| e.to_string())?;
    ensure!(
        out.classes.len() == 5,
        "{} quotient classes",
        out.classes.len()
    );
    for (i, a) in out.classes.iter().enumerate() {
        for b in &out.classes[i + 1..] {
            ensure!(a.residue != b.residue, "repeated residue {:?}", a.residue);
            let d: Vec<f64> = a
                .result
                .signature
                .iter()
                .zip(&b.result.signature)
                .map(|(x, y)| x - y)
                .collect();
            ensure!(
                !q_membership(&d, &q),
                "classes {} and {} agree modulo Q",
                a.result.rank,
                b.result.rank
            );
        }
    }

    let conn = connected_quotient_search(&p.g, &p.cache, &q, &l, p.start, p.goal, 5, &cfg)
        .map_err(|e| e.to_string())?;
    ensure!(!conn.classes.is_empty(), "connected search found nothing");
    for c in &conn.classes {
        let path = &c.result.path;
        let runs = path
            .windows(2)
            .filter(|w| !l.contains(w[0]) && l.contains(w[1]))
            .count()
            + usize::from(l.contains(path[0]));
        ensure!(
            runs == 1 && !l.contains(path[0]),
            "rank {} enters L {runs} times",
            c.result.rank
        );
        let first_in = path.iter().position(|&v| l.contains(v)).unwrap();
        ensure!(
            path[first_in..].iter().all(|&v| l.contains(v)),
            "rank {} leaves L again",
            c.result.rank
        );
        ensure!(
            out.classes.iter().any(|o| o.residue == c.residue) || {
                let wider =
                    quotient_augmented_search(&p.g, &p.cache, &q, &l, p.start, p.goal, 40, &cfg)
                        .map_err(|e| e.to_string())?;
                wider.classes.iter().any(|o| o.residue == c.residue)
            },
            "connected class {:?} unknown to the plain quotient search",
            c.residue
        );
    }

    // Q = {0} with L the goal cell alone
    let mut mask = vec![false; p.g.vertex_count()];
    mask[p.goal as usize] = true;
    let lg = Subspace::from_mask(mask);
    let trivial = QLattice::trivial(set.len());
    let plain = augmented_search(
        &p.g,
        &p.cache,
        p.start,
        p.goal,
        &SearchMode::EnumerateK(5),
        &SearchConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let qa = quotient_augmented_search(&p.g, &p.cache, &trivial, &lg, p.start, p.goal, 5, &cfg)
        .map_err(|e| e.to_string())?;
    let qc = connected_quotient_search(&p.g, &p.cache, &trivial, &lg, p.start, p.goal, 5, &cfg)
        .map_err(|e| e.to_string())?;
    for (name, o) in [("quotient", &qa), ("connected", &qc)] {
        ensure!(
            o.classes.len() == plain.classes.len(),
            "{name}: {} classes",
            o.classes.len()
        );
        for (x, y) in o.classes.iter().zip(&plain.classes) {
            ensure!(
                x.result.path == y.path,
                "{name}: rank {} path differs",
                y.rank
            );
            ensure!(
                (x.result.cost - y.cost).abs() <= 1e-9,
                "{name}: rank {} cost differs",
                y.rank
            );
        }
    }
    Ok(format!(
        "Q basis {:?}; over/under difference {:?} in Q; residues {:?}; {} connected classes leave L once",
        q.basis(),
        diff.iter().map(|x| x.round() as i64).collect::<Vec<_>>(),
        out.classes.iter().map(|c| c.residue.clone()).collect::<Vec<_>>(),
        conn.classes.len()
    ))
}

// ---------------------------------------------------------------------------
// 9: combinatorics

fn inversion_sign(seq: &[usize]) -> i8 {
    let mut inv = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            inv += usize::from(seq[i] > seq[j]);
        }
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

fn criterion_9() -> Check {
    for n in 0..=8 {
        let a: Vec<usize> = (1..=n).collect();
        for w in 0..=n {
            let p = partitions(&a, w).map_err(|e| e.to_string())?;
            ensure!(p.len() == binomial(n, w), "n={n} w={w}: {}", p.len());
            let mut lefts: Vec<&Vec<usize>> = p.iter().map(|r| &r.left).collect();
            lefts.dedup();
            ensure!(lefts.len() == p.len(), "n={n} w={w}: repeated left sets");
        }
    }
    let src = [1, 3, 6, 9, 5];
    let p = partitions(&src, 3).map_err(|e| e.to_string())?;
    ensure!(p.len() == 10, "{} partitions", p.len());
    for r in &p {
        let pos: Vec<usize> = r
            .left
            .iter()
            .chain(&r.right)
            .map(|x| src.iter().position(|y| y == x).unwrap())
            .collect();
        ensure!(
            r.sign == inversion_sign(&pos),
            "{:?}|{:?} sign {}",
            r.left,
            r.right,
            r.sign
        );
    }
    let find = |l: [usize; 3]| {
        p.iter()
            .find(|r| r.left == l)
            .map(|r| (r.right.clone(), r.sign))
    };
    ensure!(
        find([1, 3, 6]) == Some((vec![9, 5], 1)),
        "[[1,3,6],[9,5]] {:?}",
        find([1, 3, 6])
    );
    ensure!(
        find([1, 3, 9]) == Some((vec![6, 5], -1)),
        "[[1,3,9],[6,5]] {:?}",
        find([1, 3, 9])
    );
    Ok("C(n,w) counts for n <= 8; part^3([1,3,6,9,5]) has 10 partitions with inversion-count signs".into())
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let picked: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let want = |i: usize| picked.is_empty() || picked.contains(&i);
    let torus = if want(1) || want(2) {
        Some(std::panic::catch_unwind(torus_base).unwrap_or_else(|_| Err("panicked".into())))
    } else {
        None
    };
    let with_torus = |f: fn(&TorusValues) -> Check| -> Check {
        match torus.as_ref().unwrap() {
            Ok(t) => f(t),
            Err(e) => Err(e.clone()),
        }
    };
    let criteria: [(usize, &str, &dyn Fn() -> Check); 9] = [
        (1, "5D torus reproduction", &|| with_torus(criterion_1)),
        (2, "scale-family stability", &|| with_torus(criterion_2)),
        (3, "closed-form agreement", &criterion_3),
        (4, "linking oracle", &criterion_4),
        (5, "invariance properties", &criterion_5),
        (6, "2D planner experiment", &criterion_6),
        (7, "3D planner smoke test", &criterion_7),
        (8, "quotient experiment", &criterion_8),
        (9, "combinatorics", &criterion_9),
    ];
    let mut failed = 0;
    for (i, name, f) in criteria {
        if !want(i) {
            continue;
        }
        let t = Instant::now();
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("PASS {i} {name} [{secs:.1}s]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {i} {name} [{secs:.1}s]: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
