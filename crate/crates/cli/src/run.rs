use std::path::{Path, PathBuf};

use homolink_core::invariant::{Engine, FormField};
use homolink_core::lowdim::{biot_savart_field, gauss_flux_form, residue_form, ClosedFormKind};
use homolink_core::mesh::geometry::{bounding_ball, chain_distance};
use homolink_core::mesh::sample::sample_polyline_loop;
use homolink_core::mesh::{validate_skeleton_set, Chain, Point, Simplex, SkeletonSet};
use homolink_core::planner::{
    augmented_search, build_grid_graph, edge_signatures, ClassResult, GridGraph, SearchMode,
};
use homolink_core::quadrature::{QuadConfig, QuadStats};
use homolink_core::quotient::{
    auto_q, connected_quotient_search, quotient_augmented_search, QLattice, QuotientOutcome,
    Subspace,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::results::{
    write_file, CandidateSignature, ClassRecord, ClosedFormCheck, Diagnostics, ResultBundle,
    ValidationSummary,
};
use crate::scenario::{parse_scenario, Mode, Scenario, SCHEMA_VERSION};
use crate::svg::emit_svg;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Invariant,
    Plan,
    QuotientPlan,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Invariant => "invariant",
            Command::Plan => "plan",
            Command::QuotientPlan => "quotient-plan",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub scenario: PathBuf,
    pub classes: Option<usize>,
    pub target_signature: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub threads: Option<usize>,
    pub quad_order: Option<usize>,
    pub project: Option<[usize; 2]>,
    /// Quotient planning: keep the part of each path outside L connected.
    pub connected: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub bundle: ResultBundle,
    /// Files written under `--out`.
    pub files: Vec<PathBuf>,
}

/// Runs one subcommand. With `--out`, result files are written there even
/// when validation fails.
pub fn run(cmd: Command, opts: &RunOptions) -> Result<RunOutput, CliError> {
    let text = std::fs::read_to_string(&opts.scenario).map_err(|e| CliError::Io {
        path: opts.scenario.clone(),
        message: e.to_string(),
    })?;
    let mut sc = parse_scenario(&text)?;
    if let Some(q) = opts.quad_order {
        sc.tolerances.quad_order = q;
        sc.tolerances
            .quad()
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(t) = opts.threads {
        sc.threads = t;
    }
    let base = opts
        .scenario
        .parent()
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let set = sc.skeleton_set(&base)?;
    let report = validate_skeleton_set(&set, sc.d, sc.n, sc.tolerances.eps_sing);
    let mut bundle = ResultBundle {
        schema_version: SCHEMA_VERSION,
        command: cmd.name().to_string(),
        scenario: sc.name.clone(),
        skeletons: (0..set.len()).map(|i| set.label(i).to_string()).collect(),
        signatures: vec![],
        classes: vec![],
        lattice: None,
        validation: None,
        diagnostics: Diagnostics::default(),
    };
    let mut failure = None;
    match cmd {
        Command::Validate => {
            let closed = if report.is_valid() {
                closed_form_checks(&sc, &set)?
            } else {
                vec![]
            };
            let mut problems: Vec<String> =
                report.violations.iter().map(|v| v.to_string()).collect();
            problems.extend(closed.iter().filter(|c| !c.passed).map(|c| {
                format!(
                    "{}: {} closed form differs by {:e} (relative)",
                    c.skeleton, c.kind, c.max_relative_error
                )
            }));
            if !problems.is_empty() {
                failure = Some(CliError::Validation(problems));
            }
            bundle.validation = Some(ValidationSummary {
                violations: report.violations.clone(),
                closed_form: closed,
            });
        }
        _ if !report.is_valid() => return Err(report.violations.into()),
        Command::Invariant => invariant(&sc, &set, &base, &mut bundle)?,
        Command::Plan => plan(&sc, &set, opts, &mut bundle)?,
        Command::QuotientPlan => quotient_plan(&sc, &set, opts, &mut bundle)?,
    }
    let mut files = Vec::new();
    if let Some(dir) = &opts.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.clone(),
            message: e.to_string(),
        })?;
        let p = dir.join("result.json");
        write_file(&p, &bundle.to_json())?;
        files.push(p);
        if matches!(cmd, Command::Plan | Command::QuotientPlan) {
            let p = dir.join("paths.csv");
            write_file(&p, &bundle.paths_csv())?;
            files.push(p);
        }
        if opts.svg {
            let p = dir.join("plot.svg");
            write_file(&p, &emit_svg(&bundle, &sc, &set, opts.project)?)?;
            files.push(p);
        }
    } else if opts.svg {
        return Err(CliError::Usage("--svg needs --out".into()));
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(RunOutput { bundle, files }),
    }
}

fn invariant(
    sc: &Scenario,
    set: &SkeletonSet,
    base: &Path,
    bundle: &mut ResultBundle,
) -> Result<(), CliError> {
    let candidates = sc.candidate_chains(base)?;
    if candidates.is_empty() {
        return Err(CliError::Semantic {
            path: "candidates".into(),
            message: "the invariant command needs at least one candidate cycle".into(),
        });
    }
    let engine = Engine::new(set, sc.d, sc.n, sc.tolerances.quad(), sc.threads)?;
    let mut stats = QuadStats::default();
    for (label, chain) in candidates {
        let (sig, st) = engine.signature(&chain)?;
        stats.merge(&st);
        bundle.signatures.push(CandidateSignature {
            label,
            nearest_integers: sig.rounded(),
            max_integer_residual: sig.integer_residual(),
            values: sig.values,
        });
    }
    bundle.diagnostics.quadrature = stats;
    Ok(())
}

struct PlanSetup {
    graph: GridGraph,
    cache: homolink_core::planner::EdgeSignatureCache,
    start: u32,
    goal: u32,
}

fn setup_plan(sc: &Scenario, set: &SkeletonSet) -> Result<PlanSetup, CliError> {
    let missing = |f: &str| CliError::Semantic {
        path: f.into(),
        message: "required for planning".into(),
    };
    let grid = sc.grid.as_ref().ok_or_else(|| missing("grid"))?;
    let start = sc.start.as_ref().ok_or_else(|| missing("start"))?;
    let goal = sc.goal.as_ref().ok_or_else(|| missing("goal"))?;
    if sc.n != 2 {
        return Err(CliError::Semantic {
            path: "N".into(),
            message: format!(
                "planning works with paths, which needs N = 2 (got {})",
                sc.n
            ),
        });
    }
    let graph = build_grid_graph(grid)?;
    let start = graph.locate(start)?;
    let goal = graph.locate(goal)?;
    let engine = Engine::new(set, sc.d, sc.n, sc.tolerances.quad(), sc.threads)?;
    let cache = edge_signatures(&graph, &engine)?;
    Ok(PlanSetup {
        graph,
        cache,
        start,
        goal,
    })
}

fn record(g: &GridGraph, c: ClassResult, residue: Option<Vec<i64>>) -> ClassRecord {
    ClassRecord {
        rank: c.rank,
        path: c.path.iter().map(|&v| g.coords(v).to_vec()).collect(),
        vertices: c.path,
        signature: c.signature,
        residue,
        cost: c.cost,
    }
}

fn plan(
    sc: &Scenario,
    set: &SkeletonSet,
    opts: &RunOptions,
    bundle: &mut ResultBundle,
) -> Result<(), CliError> {
    let mode = match (&opts.target_signature, opts.classes, &sc.mode) {
        (Some(t), _, _) => SearchMode::TargetClass(t.clone()),
        (None, Some(k), _) => SearchMode::EnumerateK(k),
        (None, None, Some(Mode::Target(t))) => SearchMode::TargetClass(t.clone()),
        (None, None, Some(Mode::Enumerate(k))) => SearchMode::EnumerateK(*k),
        (None, None, None) => SearchMode::EnumerateK(1),
    };
    let p = setup_plan(sc, set)?;
    let out = augmented_search(
        &p.graph,
        &p.cache,
        p.start,
        p.goal,
        &mode,
        &sc.tolerances.search(),
    )?;
    bundle.classes = out
        .classes
        .into_iter()
        .map(|c| record(&p.graph, c, None))
        .collect();
    bundle.diagnostics = Diagnostics {
        quadrature: *p.cache.stats(),
        expansions: Some(out.expansions),
        exhausted: Some(out.exhausted),
    };
    Ok(())
}

fn quotient_plan(
    sc: &Scenario,
    set: &SkeletonSet,
    opts: &RunOptions,
    bundle: &mut ResultBundle,
) -> Result<(), CliError> {
    let sub = sc.subspace.as_ref().ok_or_else(|| CliError::Semantic {
        path: "subspace".into(),
        message: "required for quotient planning".into(),
    })?;
    if opts.target_signature.is_some()
        || matches!(sc.mode, Some(Mode::Target(_))) && opts.classes.is_none()
    {
        return Err(CliError::Usage(
            "quotient planning enumerates classes; target mode is not supported".into(),
        ));
    }
    let k = match (opts.classes, &sc.mode) {
        (Some(k), _) => k,
        (None, Some(Mode::Enumerate(k))) => *k,
        _ => 1,
    };
    let p = setup_plan(sc, set)?;
    let g = &p.graph;
    let mut mask = Subspace::from_boxes(g, &sub.boxes).mask().to_vec();
    for (i, cell) in sub.cells.iter().enumerate() {
        let v = g.vertex_at(cell).ok_or_else(|| CliError::Semantic {
            path: format!("subspace.cells[{i}]"),
            message: "not a free grid cell".into(),
        })?;
        mask[v as usize] = true;
    }
    let l = Subspace::from_mask(mask);
    let m = set.len();
    let mut gens: Vec<Vec<i64>> = Vec::new();
    if !sub.generators.is_empty() {
        let loops = sub
            .generators
            .iter()
            .map(|pts| {
                sample_polyline_loop(
                    &pts.iter().map(|x| Point(x.clone())).collect::<Vec<_>>(),
                    true,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let engine = Engine::new(set, sc.d, sc.n, sc.tolerances.quad(), sc.threads)?;
        let sigs = engine
            .signatures(&loops)
            .into_iter()
            .map(|r| r.map(|(s, _)| s.values))
            .collect::<Result<Vec<_>, _>>()?;
        gens.extend(
            QLattice::from_signatures(m, &sigs, sc.tolerances.eps_int)?
                .basis()
                .iter()
                .cloned(),
        );
    }
    if sub.auto {
        gens.extend(
            auto_q(g, &p.cache, &l, sc.tolerances.eps_int)?
                .basis()
                .iter()
                .cloned(),
        );
    }
    let q = QLattice::from_integer(m, &gens)?.with_eps(sc.tolerances.eps_q);
    let cfg = sc.tolerances.quotient();
    let out: QuotientOutcome = if opts.connected {
        connected_quotient_search(g, &p.cache, &q, &l, p.start, p.goal, k, &cfg)?
    } else {
        quotient_augmented_search(g, &p.cache, &q, &l, p.start, p.goal, k, &cfg)?
    };
    bundle.lattice = Some(q.basis().to_vec());
    bundle.classes = out
        .classes
        .into_iter()
        .map(|c| record(g, c.result, Some(c.residue)))
        .collect();
    bundle.diagnostics = Diagnostics {
        quadrature: *p.cache.stats(),
        expansions: Some(out.expansions),
        exhausted: Some(out.exhausted),
    };
    Ok(())
}

/// Compares the general form field against the closed forms available for
/// (D, N) = (2, 2), (3, 2) and (3, 3) at seeded random points.
fn closed_form_checks(sc: &Scenario, set: &SkeletonSet) -> Result<Vec<ClosedFormCheck>, CliError> {
    let Some(kind) = ClosedFormKind::for_dims(sc.d, sc.n) else {
        return Ok(vec![]);
    };
    let quad = QuadConfig {
        order: 8,
        split_ratio: 0.1,
        ..sc.tolerances.quad()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut checks = Vec::new();
    for (i, skel) in set.skeletons.iter().enumerate() {
        let field = FormField::new(skel, sc.d, sc.n, quad)?;
        let pts: Vec<&[f64]> = skel.points().map(|p| p.coords()).collect();
        let (center, radius) = bounding_ball(&pts);
        let reach = radius.max(1.0) * 2.0;
        let mut worst: f64 = 0.0;
        let mut count = 0;
        let mut tries = 0;
        while count < 100 && tries < 10_000 {
            tries += 1;
            let x: Vec<f64> = center
                .iter()
                .map(|c| c + rng.gen_range(-reach..reach))
                .collect();
            let probe = Chain::new(sc.d, 0, vec![(Simplex::new(vec![Point(x.clone())])?, 1)])?;
            if chain_distance(&probe, skel) < 0.1 * radius.max(1.0) {
                continue;
            }
            count += 1;
            let got = kind.from_psi(&field.psi_coefficients(&x)?);
            let want = closed_form(kind, &x, skel, sc.tolerances.eps_sing);
            let scale = want
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE);
            let err = got
                .iter()
                .zip(&want)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale;
            worst = worst.max(err);
        }
        checks.push(ClosedFormCheck {
            skeleton: set.label(i).to_string(),
            kind: format!("{kind:?}"),
            points: count,
            max_relative_error: worst,
            passed: worst < 1e-6,
        });
    }
    Ok(checks)
}

fn closed_form(kind: ClosedFormKind, x: &[f64], skel: &Chain, eps: f64) -> Vec<f64> {
    match kind {
        ClosedFormKind::Residue => {
            let mut v = vec![0.0; 2];
            for (s, c) in skel.terms() {
                let p = s.vertices()[0].coords();
                let r = residue_form([x[0], x[1]], [p[0], p[1]]).expect("probe away from source");
                v[0] += *c as f64 * r[0];
                v[1] += *c as f64 * r[1];
            }
            v
        }
        ClosedFormKind::GaussFlux => {
            let mut v = vec![0.0; 3];
            for (s, c) in skel.terms() {
                let p = s.vertices()[0].coords();
                let r = gauss_flux_form([x[0], x[1], x[2]], [p[0], p[1], p[2]])
                    .expect("probe away from source");
                for k in 0..3 {
                    v[k] += *c as f64 * r[k];
                }
            }
            v
        }
        ClosedFormKind::BiotSavart => biot_savart_field([x[0], x[1], x[2]], skel, eps)
            .expect("probe away from wire")
            .to_vec(),
    }
}
