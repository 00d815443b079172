use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use swclab_core::convexity::{ModulusMethod, SignSumStatus};
use swclab_core::embed::{kloeckner_iterate, Embedding};
use swclab_core::families::{subsets_up_to, vc_extract};
use swclab_core::fixtures::{self, Fixture};
use swclab_core::{
    baudier_embedding, binary_tree, bourgain_embedding, check_derivation_shrink,
    check_midpoint_inequality, check_sign_sum_bound, derive_function, diamond,
    distance_to_set_function, distortion_report, dz_index, find_functionals, laakso, modulus,
    polynomial_trace_test, restrict_and_separate, separation_value, slicing_functional, to_points,
    trace_count, verify_cube, verify_james_system, AmbientNorm, ConvexBody, DeltaEvaluator,
    DeriveOptions, Error, JamesSystem, MetricGraph, PointSet, SetFamily, Vector,
};

use crate::args::{
    BodyArgs, Command, DeriveCommon, EmbedCmd, FamilyAction, FamilyCmd, Global, GraphArgs,
    GraphCmd, JamesCmd, MethodArg, UcCmd, VcExtractArgs, VcTestArgs,
};

/// A failed command: exit code, machine-readable kind and message.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            kind: "invalid_input",
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            kind: "infeasible",
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Infeasible(_) => "infeasible",
            Error::InsufficientPoints { .. } => "insufficient_points",
            Error::Unsupported(_) => "unsupported",
            Error::Verification(_) => "verification",
        };
        CliError {
            code: if e.is_infeasible_kind() { 3 } else { 2 },
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Grid on which a sampled modulus is tabulated for bodies without a closed form.
const DELTA_GRID: [f64; 20] = [
    0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9,
    2.0,
];

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string(value).map_err(|e| CliError::invalid(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

/// An ordered point list with its norm; accepts point-set files too.
#[derive(Deserialize)]
struct PointsFile {
    norm: AmbientNorm,
    points: Vec<Vector>,
}

pub fn command_name(cmd: &Command) -> String {
    let family = |then: &Option<FamilyAction>, base: &str| match then {
        None => base.to_string(),
        Some(FamilyAction::Trace(_)) => format!("{base} trace"),
        Some(FamilyAction::Vctest(_)) => format!("{base} vctest"),
        Some(FamilyAction::Vcextract(_)) => format!("{base} vcextract"),
        Some(FamilyAction::Points { .. }) => format!("{base} points"),
    };
    match cmd {
        Command::Dz(_) => "dz".into(),
        Command::DeriveFn(_) => "derive-fn".into(),
        Command::James { action } => match action {
            JamesCmd::Verify { .. } => "james verify",
            JamesCmd::Search { .. } => "james search",
            JamesCmd::Separate { .. } => "james separate",
            JamesCmd::Cube { .. } => "james cube",
            JamesCmd::Subspace { .. } => "james subspace",
        }
        .into(),
        Command::Modulus(_) => "modulus".into(),
        Command::UcCheck { action } => match action {
            UcCmd::Midpoint { .. } => "uc-check midpoint",
            UcCmd::Signsum { .. } => "uc-check signsum",
            UcCmd::Shrink { .. } => "uc-check shrink",
        }
        .into(),
        Command::Graph { action } => match action {
            GraphCmd::Tree { .. } => "graph tree",
            GraphCmd::Diamond { .. } => "graph diamond",
            GraphCmd::Laakso { .. } => "graph laakso",
        }
        .into(),
        Command::Embed { action } => match action {
            EmbedCmd::Bourgain { .. } => "embed bourgain",
            EmbedCmd::Baudier { .. } => "embed baudier",
            EmbedCmd::Prune { .. } => "embed prune",
            EmbedCmd::Report { .. } => "embed report",
        }
        .into(),
        Command::Family { action } => match action {
            FamilyCmd::Schreier { then, .. } => family(then, "family schreier"),
            FamilyCmd::Blocks { then, .. } => family(then, "family blocks"),
            FamilyCmd::Bounded { then, .. } => family(then, "family bounded"),
            FamilyCmd::Trace { .. } => "family trace".into(),
            FamilyCmd::Vctest { .. } => "family vctest".into(),
            FamilyCmd::Vcextract { .. } => "family vcextract".into(),
            FamilyCmd::Slice { .. } => "family slice".into(),
            FamilyCmd::Points { .. } => "family points".into(),
        },
        Command::Fixtures { .. } => "fixtures".into(),
    }
}

pub fn run(cmd: &Command, global: &Global) -> CliResult<Value> {
    match cmd {
        Command::Dz(a) => dz(&a.common, global),
        Command::DeriveFn(a) => {
            let (set, opts) = derive_inputs(&a.common, global)?;
            if set.weak_tail().is_some() {
                return Err(CliError::invalid("derive-fn does not accept a weak tail"));
            }
            let values: Vec<f64> = match (&a.values, &a.distance_to) {
                (Some(p), _) => read_json(p)?,
                (None, Some(p)) => distance_to_set_function(&set, &read_json::<PointSet>(p)?)?,
                (None, None) => return Err(CliError::invalid("need --values or --distance-to")),
            };
            let trace = derive_function(&set, &values, a.common.eps, a.common.max_steps, &opts)?;
            let mut v = to_value(&trace);
            v["values"] = to_value(&values);
            v["removal_steps"] = to_value(&trace.removal_steps());
            Ok(v)
        }
        Command::James { action } => james(action),
        Command::Modulus(a) => {
            let (body, ambient, dim) = resolve_body(&a.body, None)?;
            let method = match a.method {
                MethodArg::Closed => ModulusMethod::ClosedForm,
                MethodArg::Sampled => ModulusMethod::SampledUpperBound {
                    samples: a.body.samples,
                    seed: global.seed,
                },
            };
            Ok(to_value(&modulus(&body, ambient, dim, a.eps, method)?))
        }
        Command::UcCheck { action } => uc_check(action, global),
        Command::Graph { action } => graph(action),
        Command::Embed { action } => embed(action, global),
        Command::Family { action } => family(action),
        Command::Fixtures { names, out } => {
            let fixtures = names
                .iter()
                .map(|n| n.parse::<Fixture>())
                .collect::<Result<Vec<_>, _>>()?;
            fs::create_dir_all(out)
                .map_err(|e| CliError::invalid(format!("{}: {e}", out.display())))?;
            let mut written = Vec::new();
            for f in fixtures {
                let path = out.join(format!("{}.json", f.file_stem()));
                write_json(&path, &f.to_json()?)?;
                written.push(json!({"name": f.to_string(), "path": path.display().to_string()}));
            }
            Ok(json!({ "written": written }))
        }
    }
}

fn derive_inputs(a: &DeriveCommon, global: &Global) -> CliResult<(PointSet, DeriveOptions)> {
    let set: PointSet = read_json(&a.input)?;
    let mut opts = DeriveOptions::from(a.mode).with_cap(global.clique_cap);
    if let Some(p) = &a.directions {
        opts = opts.with_directions(read_json(p)?);
    }
    Ok((set, opts))
}

fn dz(a: &DeriveCommon, global: &Global) -> CliResult<Value> {
    let (set, opts) = derive_inputs(a, global)?;
    let trace = dz_index(&set, a.eps, a.max_steps, &opts)?;
    let mut v = to_value(&trace);
    v["survivor_counts"] = to_value(&trace.levels.iter().map(Vec::len).collect::<Vec<_>>());
    Ok(v)
}

fn james(action: &JamesCmd) -> CliResult<Value> {
    match action {
        JamesCmd::Verify { input, tol } => {
            let sys: JamesSystem = read_json(input)?;
            Ok(to_value(&verify_james_system(&sys, *tol)))
        }
        JamesCmd::Search {
            input,
            theta,
            output,
        } => {
            let f: PointsFile = read_json(input)?;
            let search = find_functionals(&f.points, *theta, f.norm)?;
            if search.functionals.is_none() {
                return Err(CliError::infeasible(format!(
                    "no functional of dual norm <= 1 at indices {:?}",
                    search.failed
                )));
            }
            let sys = search.clone().into_system(*theta, f.norm, f.points)?;
            if let Some(p) = output {
                write_json(p, &sys)?;
            }
            Ok(json!({"search": search, "system": sys}))
        }
        JamesCmd::Separate { input } => {
            let f: PointsFile = read_json(input)?;
            Ok(to_value(&separation_value(&f.points, f.norm)?))
        }
        JamesCmd::Cube { input, theta } => {
            let f: PointsFile = read_json(input)?;
            Ok(to_value(&verify_cube(&f.points, *theta, f.norm)?))
        }
        JamesCmd::Subspace {
            input,
            constraints,
            tol,
        } => {
            let set: PointSet = read_json(input)?;
            let cs: Vec<Vector> = read_json(constraints)?;
            Ok(to_value(&restrict_and_separate(&set, &cs, *tol)?))
        }
    }
}

fn resolve_body(
    a: &BodyArgs,
    fallback_dim: Option<usize>,
) -> CliResult<(ConvexBody, AmbientNorm, usize)> {
    let body = match (&a.body, a.ball) {
        (Some(p), _) => read_json::<ConvexBody>(p)?,
        (None, Some(norm)) => ConvexBody::unit_ball(norm),
        (None, None) => return Err(CliError::invalid("need --body or --ball")),
    };
    let own = match &body {
        ConvexBody::AbsHull(set) => set.norm(),
        ConvexBody::LpBall { norm, .. } => *norm,
        ConvexBody::Ellipsoid { .. } => AmbientNorm::L2,
    };
    let dim = match (body.dim(), a.dim) {
        (Some(d), Some(given)) if d != given => {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: given,
            }
            .into());
        }
        (Some(d), _) | (None, Some(d)) => d,
        (None, None) if fallback_dim.is_some() => fallback_dim.expect("checked"),
        (None, None) => return Err(CliError::invalid("--dim is required for a norm ball")),
    };
    Ok((body, a.ambient.unwrap_or(own), dim))
}

fn delta_for(
    body: &ConvexBody,
    ambient: AmbientNorm,
    dim: usize,
    samples: usize,
    seed: u64,
) -> CliResult<DeltaEvaluator> {
    Ok(DeltaEvaluator::for_body(
        body,
        ambient,
        dim,
        &DELTA_GRID,
        samples,
        seed,
    )?)
}

fn uc_check(action: &UcCmd, global: &Global) -> CliResult<Value> {
    match action {
        UcCmd::Midpoint {
            body,
            input,
            pairs,
            tol,
        } => {
            let (k, ambient, dim) = resolve_body(body, None)?;
            let delta = delta_for(&k, ambient, dim, body.samples, global.seed)?;
            let list: Vec<(Vector, Vector)> = match input {
                Some(p) => read_json(p)?,
                None => {
                    let pts = fixtures::random_points_in_body(&k, dim, 2 * pairs, global.seed)?;
                    pts.chunks(2)
                        .map(|c| (c[0].clone(), c[1].clone()))
                        .collect()
                }
            };
            Ok(to_value(&check_midpoint_inequality(
                &k, ambient, &delta, &list, *tol,
            )?))
        }
        UcCmd::Signsum { body, input, tol } => {
            let xs: Vec<Vector> = read_json(input)?;
            let (k, ambient, dim) = resolve_body(body, xs.first().map(Vector::dim))?;
            let delta = delta_for(&k, ambient, dim, body.samples, global.seed)?;
            let report = check_sign_sum_bound(&k, ambient, &delta, &xs, *tol)?;
            let mut v = to_value(&report);
            v["pass"] = Value::Bool(report.status == SignSumStatus::Ok);
            Ok(v)
        }
        UcCmd::Shrink {
            body,
            input,
            eps,
            mode,
        } => {
            let net: PointSet = read_json(input)?;
            let (k, ambient, dim) = resolve_body(body, Some(net.dim()))?;
            let delta = delta_for(&k, ambient, dim, body.samples, global.seed)?;
            let opts = DeriveOptions::from(*mode).with_cap(global.clique_cap);
            Ok(to_value(&check_derivation_shrink(
                &k, &delta, &net, *eps, &opts,
            )?))
        }
    }
}

fn graph_summary(g: &MetricGraph, a: &GraphArgs) -> Value {
    let mut v = json!({
        "family": g.family,
        "level": g.level,
        "vertices": g.len(),
        "edges": g.edges.len(),
        "diameter": g.diameter(),
        "metric_ok": g.check_metric().ok(),
    });
    if let Some((s, t)) = g.endpoints() {
        v["endpoint_distance"] = json!(g.dist(s, t));
    }
    if a.full {
        v["graph"] = to_value(g);
    }
    v
}

fn graph(action: &GraphCmd) -> CliResult<Value> {
    match action {
        GraphCmd::Tree {
            graph,
            check_formula,
        } => {
            let g = binary_tree(graph.n)?;
            let mut v = graph_summary(&g, graph);
            if *check_formula {
                v["formula_ok"] = json!(g.check_tree_formula());
            }
            Ok(v)
        }
        GraphCmd::Diamond { graph } => Ok(graph_summary(&diamond(graph.n)?, graph)),
        GraphCmd::Laakso { graph } => Ok(graph_summary(&laakso(graph.n)?, graph)),
    }
}

fn embedding_result(e: &Embedding, output: &Option<std::path::PathBuf>) -> CliResult<Value> {
    if let Some(p) = output {
        write_json(p, e)?;
    }
    Ok(json!({
        "vertices": e.graph.len(),
        "dim": e.dim(),
        "report": distortion_report(e)?,
    }))
}

fn embed(action: &EmbedCmd, global: &Global) -> CliResult<Value> {
    match action {
        EmbedCmd::Bourgain { input, sb, n, out } => {
            let sys = match (input, sb) {
                (Some(p), _) => read_json(p)?,
                (None, true) => {
                    let size = 1usize
                        .checked_shl(*n as u32 + 1)
                        .filter(|s| *s <= 1 << 13)
                        .ok_or_else(|| CliError::invalid(format!("height {n} is too large")))?;
                    fixtures::sb_james(size - 1)?
                }
                (None, false) => return Err(CliError::invalid("need --input or --sb")),
            };
            embedding_result(&bourgain_embedding(&sys, *n)?, &out.output)
        }
        EmbedCmd::Baudier { input, depth, out } => {
            let blocks: Vec<JamesSystem> = match input {
                Some(p) => read_json(p)?,
                None => fixtures::baudier_blocks(*depth)?,
            };
            embedding_result(&baudier_embedding(&blocks, *depth)?, &out.output)
        }
        EmbedCmd::Prune {
            input,
            theta,
            rounds,
            samples,
            out,
        } => {
            let e: Embedding = read_json(input)?;
            let theta = match theta {
                Some(t) => *t,
                None => distortion_report(&e)?.sep_norm,
            };
            let delta = delta_for(&e.body, e.ambient, e.dim(), *samples, global.seed)?;
            let (pruned, trace) = kloeckner_iterate(&e, theta, &delta, *rounds)?;
            if let Some(p) = &out.output {
                write_json(p, &pruned)?;
            }
            let decrease_ok = trace
                .rounds
                .windows(2)
                .all(|w| w[1].lip_gauge <= w[0].lip_gauge - w[0].delta + 1e-9);
            Ok(json!({
                "trace": trace,
                "decrease_ok": decrease_ok,
                "advisory": delta.advisory(),
            }))
        }
        EmbedCmd::Report { input } => {
            let e: Embedding = read_json(input)?;
            Ok(to_value(&distortion_report(&e)?))
        }
    }
}

fn family_action(fam: &SetFamily, then: &Option<FamilyAction>) -> CliResult<Value> {
    match then {
        None => Ok(json!({"size": fam.len(), "family": fam})),
        Some(FamilyAction::Trace(a)) => Ok(to_value(&trace_count(fam, &a.a)?)),
        Some(FamilyAction::Vctest(t)) => vc_test(fam, t),
        Some(FamilyAction::Vcextract(x)) => vc_extract_cmd(fam, x),
        Some(FamilyAction::Points { norm }) => Ok(to_value(&to_points(fam, *norm)?)),
    }
}

fn vc_test(fam: &SetFamily, t: &VcTestArgs) -> CliResult<Value> {
    let n = fam.universe_size();
    let samples = subsets_up_to(n as u32, t.max_size.min(n));
    Ok(to_value(&polynomial_trace_test(fam, t.p, t.c, &samples)?))
}

fn vc_extract_cmd(fam: &SetFamily, x: &VcExtractArgs) -> CliResult<Value> {
    let report = vc_extract(fam, &x.a.a, x.cap)?;
    let mut v = to_value(&report);
    if report.chain.len() >= 2 {
        let cert = separation_value(&report.chain_points(fam.universe_size()), AmbientNorm::Linf)?;
        v["chain_separation"] = to_value(&cert.theta);
    }
    Ok(v)
}

fn family(action: &FamilyCmd) -> CliResult<Value> {
    match action {
        FamilyCmd::Schreier { n, then } => family_action(&swclab_core::schreier(*n)?, then),
        FamilyCmd::Blocks { n_max, then } => {
            family_action(&swclab_core::block_family(*n_max)?, then)
        }
        FamilyCmd::Bounded { n, p, then } => {
            family_action(&swclab_core::bounded_card_family(*n, *p)?, then)
        }
        FamilyCmd::Trace { input, a } => Ok(to_value(&trace_count(&read_json(input)?, &a.a)?)),
        FamilyCmd::Vctest { input, test } => vc_test(&read_json(input)?, test),
        FamilyCmd::Vcextract { input, extract } => vc_extract_cmd(&read_json(input)?, extract),
        FamilyCmd::Slice { n, m, n_max } => Ok(to_value(&slicing_functional(*n, *m, *n_max)?)),
        FamilyCmd::Points { input, norm } => Ok(to_value(&to_points(&read_json(input)?, *norm)?)),
    }
}
