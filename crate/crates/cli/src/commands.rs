//! Subcommand implementations. Every command renders a report as text,
//! JSON, or (where tabular) CSV; identical inputs and seed give
//! byte-identical reports.

use std::fmt::Write as _;
use std::path::Path;

use num_rational::Ratio;
use serde_json::{json, Value};
use vspace::algorithms::{basis1, basis2, sampling_check, solve_trivial, SolverRng};
use vspace::explicit::AxiomViolation;
use vspace::grid_uso::{
    coordinate_order_uso, cyclic_cube_uso, random_uso, uniform_grid_uso, GridPartition, UsoError,
    UsoWitness,
};
use vspace::io::{explicit_to_json, parse_document, uso_to_json, Document, ParseError};
use vspace::{
    tabulate, ConstraintSet, ExplicitViolatorSpace, GridUso, SolveStats, ViolationOracle,
    ViolatorSpace,
};

use crate::load::{explicit_error, is_size_guard, load, read_document, validated, CliError, Instance, Loaded};
use crate::{Algo, Cli, Command, Format, UsoCommand, UsoKind};

pub struct Outcome {
    pub text: String,
    pub code: u8,
}

fn ok(text: String) -> Outcome {
    Outcome { text, code: 0 }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Check { path } => check(cli, path),
        Command::Solve { path, algo, delta } => solve(cli, path, *algo, *delta),
        Command::Structure { path } => structure(cli, path),
        Command::Uso { command } => match command {
            UsoCommand::Generate {
                shape,
                kind,
                max_attempts,
            } => uso_generate(cli, shape.as_deref(), *kind, *max_attempts),
            UsoCommand::Tabulate { path } => uso_tabulate(cli, path),
            UsoCommand::Sink { path } => uso_sink(cli, path),
            UsoCommand::Probe {
                shape,
                trials,
                max_attempts,
            } => uso_probe(cli, shape, *trials, *max_attempts),
        },
        Command::Bench {
            delta,
            sizes,
            algos,
            trials,
        } => bench(cli, *delta, sizes, algos, *trials),
        Command::Sampling {
            path,
            r,
            w,
            trials,
            delta,
        } => sampling(cli, path, *r, w, *trials, *delta),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn render(
    format: Format,
    json: Value,
    text: impl FnOnce() -> String,
    csv: Option<String>,
) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(pretty(&json)),
        Format::Text => Ok(text()),
        Format::Csv => csv.ok_or_else(|| CliError::Parse("CSV output is not available for this command".into())),
    }
}

/// `{a,c}`, with `{}` for the empty set.
fn braces(g: &ConstraintSet, names: &[String]) -> String {
    format!("{{{}}}", g.display_with(names, ","))
}

fn name_array(g: &ConstraintSet, names: &[String]) -> Value {
    Value::Array(g.iter().map(|h| Value::String(names[h].clone())).collect())
}

pub fn witness_text(w: &AxiomViolation, names: &[String]) -> String {
    let mut s = format!(
        "{} fails for F={} G={}",
        w.axiom,
        braces(&w.f, names),
        braces(&w.g, names)
    );
    if let Some(h) = w.h {
        let _ = write!(s, " h={}", names[h]);
    }
    s
}

pub fn uso_witness_text(w: &UsoWitness, names: &[String]) -> String {
    let sinks: Vec<String> = w
        .sinks
        .iter()
        .map(|v| {
            let set = ConstraintSet::from_indices(names.len(), v.iter().copied());
            braces(&set, names)
        })
        .collect();
    format!(
        "subgrid {} has {} sinks{}{}",
        braces(&w.subgrid, names),
        w.sinks.len(),
        if sinks.is_empty() { "" } else { ": " },
        sinks.join(" ")
    )
}

fn check(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let (kind, n, witness) = match parse_document(&text) {
        Ok(doc) => check_document(doc)?,
        Err(ParseError::Uso(e @ (UsoError::EdgeInconsistent { .. } | UsoError::OutmapContainsVertex { .. }))) => {
            ("uso", None, Some(e.to_string()))
        }
        Err(e) if is_size_guard(&e) => return Err(CliError::Size(format!("{}: {e}", path.display()))),
        Err(e) => return Err(CliError::Parse(format!("{}: {e}", path.display()))),
    };
    let json = json!({ "kind": kind, "n": n, "ok": witness.is_none(), "witness": witness });
    let out = render(
        cli.format,
        json,
        || match &witness {
            None => format!("ok: {kind}{}\n", n.map_or(String::new(), |n| format!(" with {n} constraints"))),
            Some(w) => format!("witness: {w}\n"),
        },
        None,
    )?;
    Ok(Outcome {
        text: out,
        code: if witness.is_none() { 0 } else { 1 },
    })
}

fn check_document(doc: Document) -> Result<(&'static str, Option<usize>, Option<String>), CliError> {
    let kind = doc.kind();
    let names = doc.names().to_vec();
    let n = names.len();
    let witness = match doc {
        Document::Explicit { space, .. } => space.check_axioms().err().map(|w| witness_text(&w, &names)),
        Document::Abstract { table, .. } => table.check_abstract_axioms().err().map(|w| witness_text(&w, &names)),
        Document::Concrete { problem, .. } => {
            // LP-type by construction; the induced space is checked anyway.
            let space = problem
                .to_abstract()
                .and_then(|t| t.violator_map())
                .map_err(explicit_error)?;
            space.check_axioms().err().map(|w| witness_text(&w, &names))
        }
        Document::Uso(u) => match u.find_sink_violation() {
            Ok(w) => w.map(|w| format!("not a unique sink orientation: {}", uso_witness_text(&w, &names))),
            Err(e) => return Err(CliError::Size(e.to_string())),
        },
        Document::Points(p) => tabulate_checked(&p)?.check_axioms().err().map(|w| witness_text(&w, &names)),
        Document::Halfplanes(l) => tabulate_checked(&l)?.check_axioms().err().map(|w| witness_text(&w, &names)),
    };
    Ok((kind, Some(n), witness))
}

fn tabulate_checked<S: ViolatorSpace>(space: &S) -> Result<ExplicitViolatorSpace, CliError> {
    tabulate(space).map_err(|e| CliError::Size(e.to_string()))
}

/// Instance-internal cost reported next to primitive calls.
trait InternalWork {
    fn internal_work(&self) -> Option<(&'static str, u64)>;
}

impl InternalWork for ExplicitViolatorSpace {
    fn internal_work(&self) -> Option<(&'static str, u64)> {
        None
    }
}

impl InternalWork for vspace::ExactPointSet {
    fn internal_work(&self) -> Option<(&'static str, u64)> {
        Some(("circumball_solves", vspace::PointSet::internal_work(self)))
    }
}

impl InternalWork for vspace::ExactHalfplaneLp {
    fn internal_work(&self) -> Option<(&'static str, u64)> {
        None
    }
}

impl InternalWork for GridUso {
    fn internal_work(&self) -> Option<(&'static str, u64)> {
        Some(("edge_evaluations", self.edge_evals()))
    }
}

/// A computation to run against whichever oracle a file produced.
trait OracleJob {
    type Out;
    fn run<S: ViolatorSpace + InternalWork>(self, oracle: ViolationOracle<S>) -> Result<Self::Out, CliError>;
}

fn make_oracle<S: ViolatorSpace>(space: S, delta: Option<u64>) -> ViolationOracle<S> {
    match delta {
        Some(d) => ViolationOracle::with_delta(space, d as usize).expect("clap enforces delta >= 1"),
        None => ViolationOracle::new(space),
    }
}

fn dispatch<J: OracleJob>(instance: Instance, delta: Option<u64>, job: J) -> Result<J::Out, CliError> {
    match instance {
        Instance::Explicit(s) => job.run(make_oracle(s, delta)),
        Instance::Points(p) => {
            if p.is_empty() {
                return Err(CliError::Parse("point set is empty".into()));
            }
            if p.dim() > vspace::instances::MAX_MINIBALL_DIM {
                return Err(CliError::Size(format!("dimension {} exceeds the exact-arithmetic limit", p.dim())));
            }
            job.run(make_oracle(p, delta))
        }
        Instance::Halfplanes(l) => {
            let o = l.into_oracle().map_err(|e| CliError::Parse(e.to_string()))?;
            let space = o.into_space();
            job.run(make_oracle(space, delta))
        }
        Instance::Uso(u) => job.run(make_oracle(u, delta)),
    }
}

struct SolveRun {
    algo: Algo,
    seed: u64,
}

struct SolveResult {
    n: usize,
    delta: usize,
    basis: ConstraintSet,
    stats: SolveStats,
    work: Option<(&'static str, u64)>,
    verified: bool,
}

fn solve_error(e: vspace::SolveError) -> CliError {
    CliError::Solve(e.to_string())
}

impl OracleJob for SolveRun {
    type Out = SolveResult;

    fn run<S: ViolatorSpace + InternalWork>(self, oracle: ViolationOracle<S>) -> Result<SolveResult, CliError> {
        let mut rng = SolverRng::new(self.seed);
        let full = oracle.ground_set();
        let (basis, stats) = match self.algo {
            Algo::Trivial => solve_trivial(&oracle, self.seed),
            Algo::Clarkson1 | Algo::Auto => basis1(&oracle, &full, &mut rng),
            Algo::Clarkson2 => basis2(&oracle, &full, &mut rng),
        }
        .map_err(solve_error)?;
        let work = oracle.space().internal_work();
        let target = oracle.violators_uncounted(&full).map_err(|e| CliError::Solve(e.to_string()))?;
        let got = oracle.violators_uncounted(&basis).map_err(|e| CliError::Solve(e.to_string()))?;
        Ok(SolveResult {
            n: oracle.n(),
            delta: oracle.delta(),
            basis,
            stats,
            work,
            verified: got == target,
        })
    }
}

fn solve(cli: &Cli, path: &Path, algo: Algo, delta: Option<u64>) -> Result<Outcome, CliError> {
    let Loaded { kind, names, instance } = load(read_document(path)?)?;
    let r = dispatch(instance, delta, SolveRun { algo, seed: cli.seed })?;
    let basis_names: Vec<&str> = r.basis.iter().map(|h| names[h].as_str()).collect();
    let s = &r.stats;
    let mut json = json!({
        "kind": kind,
        "algorithm": algo.name(),
        "seed": cli.seed,
        "n": r.n,
        "delta": r.delta,
        "basis": basis_names,
        "primitive_calls": s.primitive_calls,
        "basis2_calls": s.basis2_calls,
        "trivial_calls": s.trivial_calls,
        "loop_iterations": s.loop_iterations,
        "max_augmentations": s.max_augmentations,
        "max_reweightings": s.max_reweightings,
        "verified": r.verified,
    });
    if let Some((label, count)) = r.work {
        json[label] = json!(count);
    }
    let csv = {
        let mut header = "kind,algorithm,seed,n,delta,basis,primitive_calls,basis2_calls,trivial_calls,loop_iterations,max_augmentations,max_reweightings,verified".to_string();
        let mut row = format!(
            "{kind},{},{},{},{},{},{},{},{},{},{},{},{}",
            algo.name(),
            cli.seed,
            r.n,
            r.delta,
            basis_names.join(" "),
            s.primitive_calls,
            s.basis2_calls,
            s.trivial_calls,
            s.loop_iterations,
            s.max_augmentations,
            s.max_reweightings,
            r.verified
        );
        if let Some((label, count)) = r.work {
            let _ = write!(header, ",{label}");
            let _ = write!(row, ",{count}");
        }
        format!("{header}\n{row}\n")
    };
    let text = || {
        let mut t = String::new();
        let _ = writeln!(t, "basis: {}", braces(&r.basis, &names));
        let _ = writeln!(t, "algorithm: {}", algo.name());
        let _ = writeln!(t, "seed: {}", cli.seed);
        let _ = writeln!(t, "n: {}  delta: {}", r.n, r.delta);
        let _ = writeln!(t, "primitive calls: {}", s.primitive_calls);
        let _ = writeln!(t, "basis2 calls: {}  trivial calls: {}", s.basis2_calls, s.trivial_calls);
        let _ = writeln!(t, "loop iterations: {}", s.loop_iterations);
        let _ = writeln!(
            t,
            "max augmentations: {}  max reweightings: {}",
            s.max_augmentations, s.max_reweightings
        );
        if let Some((label, count)) = r.work {
            let _ = writeln!(t, "{}: {count}", label.replace('_', " "));
        }
        let _ = writeln!(t, "verified: {}", r.verified);
        t
    };
    Ok(ok(render(cli.format, json, text, Some(csv))?))
}

fn explicit_of(instance: Instance) -> Result<ExplicitViolatorSpace, CliError> {
    match instance {
        Instance::Explicit(s) => Ok(s),
        Instance::Points(p) => tabulate_checked(&p),
        Instance::Halfplanes(l) => {
            let o = l.into_oracle().map_err(|e| CliError::Parse(e.to_string()))?;
            tabulate_checked(o.space())
        }
        Instance::Uso(u) => tabulate_checked(&u),
    }
}

fn structure(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    let Loaded { kind, names, instance } = load(read_document(path)?)?;
    let space = explicit_of(instance)?;
    let st = space.structure();
    let labels: Vec<String> = st.classes.iter().map(|c| c.label(&names)).collect();
    let concrete = if st.acyclic {
        Some(space.to_concrete_named(&names).map_err(explicit_error)?)
    } else {
        None
    };
    let dimension = st.bases.iter().map(ConstraintSet::len).max().unwrap_or(0);
    let leq0: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|i| st.leq0[i].iter().filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let s_table: Vec<(String, Vec<String>)> = concrete
        .as_ref()
        .map(|c| {
            names
                .iter()
                .enumerate()
                .map(|(h, name)| {
                    let pts = c.problem.constraints()[h]
                        .iter()
                        .map(|p| c.problem.points()[p].clone())
                        .collect();
                    (name.clone(), pts)
                })
                .collect()
        })
        .unwrap_or_default();
    let json = json!({
        "kind": kind,
        "names": names,
        "combinatorial_dimension": dimension,
        "bases": st.bases.iter().map(|b| braces(b, &names)).collect::<Vec<_>>(),
        "classes": st.classes.iter().zip(&labels).map(|(c, l)| json!({
            "label": l,
            "bases": c.bases.iter().map(|b| braces(b, &names)).collect::<Vec<_>>(),
            "violators": name_array(&c.violators, &names),
        })).collect::<Vec<_>>(),
        "locally_smaller": leq0.iter().map(|&(i, j)| json!([labels[i], labels[j]])).collect::<Vec<_>>(),
        "acyclic": st.acyclic,
        "cycle": st.cycle.as_ref().map(|c| c.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>()),
        "linear_extension": st.linear_extension.as_ref().map(|c| c.iter().map(|&i| labels[i].clone()).collect::<Vec<_>>()),
        "concrete": concrete.as_ref().map(|_| s_table.iter().map(|(h, pts)| json!({"constraint": h, "classes": pts})).collect::<Vec<_>>()),
    });
    let text = || {
        let mut t = String::new();
        let _ = writeln!(t, "constraints: {}", names.join(" "));
        let _ = writeln!(t, "combinatorial dimension: {dimension}");
        let bases: Vec<String> = st.bases.iter().map(|b| braces(b, &names)).collect();
        let _ = writeln!(t, "bases ({}): {}", bases.len(), bases.join(" "));
        let _ = writeln!(t, "classes:");
        for (c, l) in st.classes.iter().zip(&labels) {
            let members: Vec<String> = c.bases.iter().map(|b| braces(b, &names)).collect();
            let _ = writeln!(t, "  {l}: bases {} violators {}", members.join(" "), braces(&c.violators, &names));
        }
        let _ = writeln!(t, "acyclic: {}", st.acyclic);
        if let Some(c) = &st.cycle {
            let parts: Vec<&str> = c.iter().map(|&i| labels[i].as_str()).collect();
            let _ = writeln!(t, "cycle: {}", parts.join(" <=0 "));
        }
        if let Some(ext) = &st.linear_extension {
            let parts: Vec<&str> = ext.iter().map(|&i| labels[i].as_str()).collect();
            let _ = writeln!(t, "linear extension: {}", parts.join(" < "));
        }
        if !s_table.is_empty() {
            let _ = writeln!(t, "concrete constraints S(h):");
            for (h, pts) in &s_table {
                let _ = writeln!(t, "  {h}: {}", pts.join(" "));
            }
        }
        t
    };
    Ok(ok(render(cli.format, json, text, None)?))
}

fn parse_shape(shape: &str) -> Result<Vec<usize>, CliError> {
    let sizes: Result<Vec<usize>, _> = shape.split(['x', 'X']).map(|p| p.trim().parse::<usize>()).collect();
    match sizes {
        Ok(s) if !s.is_empty() && s.iter().all(|&k| k > 0) => Ok(s),
        _ => Err(CliError::Parse(format!("bad shape {shape:?}; expected block sizes like 3x2x2"))),
    }
}

fn uso_error(e: UsoError) -> CliError {
    match e {
        UsoError::TooLarge { .. } => CliError::Size(e.to_string()),
        UsoError::GenerationExhausted(_) => CliError::Solve(e.to_string()),
        _ => CliError::Parse(e.to_string()),
    }
}

fn uso_generate(cli: &Cli, shape: Option<&str>, kind: UsoKind, max_attempts: u64) -> Result<Outcome, CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Parse("CSV output is not available for this command".into()));
    }
    let mut rng = SolverRng::new(cli.seed);
    let u = match kind {
        UsoKind::CyclicCube => {
            if shape.is_some_and(|s| parse_shape(s).ok() != Some(vec![2, 2, 2])) {
                return Err(CliError::Parse("the cyclic cube has shape 2x2x2".into()));
            }
            cyclic_cube_uso()
        }
        UsoKind::Random | UsoKind::Coordinate => {
            let sizes = parse_shape(shape.ok_or_else(|| CliError::Parse("--shape is required".into()))?)?;
            let partition = GridPartition::from_sizes(&sizes).map_err(uso_error)?;
            let names = partition.block_letter_names();
            let u = if kind == UsoKind::Random {
                random_uso(partition, &mut rng, max_attempts).map_err(uso_error)?
            } else {
                let rankings: Vec<Vec<usize>> = partition
                    .blocks()
                    .iter()
                    .map(|b| {
                        let mut r = b.clone();
                        rand::seq::SliceRandom::shuffle(r.as_mut_slice(), &mut rng);
                        r
                    })
                    .collect();
                coordinate_order_uso(partition, &rankings).map_err(uso_error)?
            };
            if u.partition().vertex_count().is_none_or(|c| c > vspace::grid_uso::DENSE_MAX_VERTICES) {
                return Err(CliError::Size("grid too large to list every vertex".into()));
            }
            u.renamed(names)
        }
    };
    let mut doc = uso_to_json(&u);
    if kind != UsoKind::CyclicCube {
        doc["seed"] = json!(cli.seed);
    }
    Ok(ok(pretty(&doc)))
}

fn read_uso(path: &Path) -> Result<GridUso, CliError> {
    match read_document(path)? {
        Document::Uso(u) => validated(u),
        other => Err(CliError::Parse(format!(
            "{}: expected a grid orientation, found {}",
            path.display(),
            other.kind()
        ))),
    }
}

fn uso_tabulate(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    if cli.format == Format::Csv {
        return Err(CliError::Parse("CSV output is not available for this command".into()));
    }
    let u = read_uso(path)?;
    let space = tabulate_checked(&u)?;
    Ok(ok(pretty(&explicit_to_json(u.partition().names(), &space))))
}

fn uso_sink(cli: &Cli, path: &Path) -> Result<Outcome, CliError> {
    let u = read_uso(path)?;
    let names = u.partition().names().to_vec();
    let sink = u.sink(&ConstraintSet::full(u.n())).expect("validated orientations have a sink");
    let set = u.partition().vertex_set(&sink);
    let json = json!({ "sink": name_array(&set, &names) });
    let out = render(cli.format, json, || format!("sink: {}\n", braces(&set, &names)), None)?;
    Ok(ok(out))
}

fn uso_probe(cli: &Cli, shape: &str, trials: usize, max_attempts: u64) -> Result<Outcome, CliError> {
    let sizes = parse_shape(shape)?;
    let partition = GridPartition::from_sizes(&sizes).map_err(uso_error)?;
    let mut rng = SolverRng::new(cli.seed);
    let mut cyclic = Vec::new();
    for trial in 0..trials {
        let u = random_uso(partition.clone(), &mut rng, max_attempts).map_err(uso_error)?;
        if !tabulate_checked(&u)?.structure().acyclic {
            cyclic.push(trial);
        }
    }
    let json = json!({
        "shape": shape,
        "seed": cli.seed,
        "delta": partition.delta(),
        "trials": trials,
        "cyclic": cyclic.len(),
        "cyclic_trials": cyclic,
    });
    let text = || {
        format!(
            "shape {shape} (delta {}), seed {}: {} of {trials} random orientations give a cyclic space\n",
            partition.delta(),
            cli.seed,
            cyclic.len()
        )
    };
    Ok(ok(render(cli.format, json, text, None)?))
}

struct BenchRow {
    n: usize,
    algo: Algo,
    mean_calls: f64,
    mean_iterations: f64,
}

fn bench(cli: &Cli, delta: usize, sizes: &[usize], algos: &[Algo], trials: usize) -> Result<Outcome, CliError> {
    if delta == 0 || trials == 0 {
        return Err(CliError::Parse("delta and trials must be positive".into()));
    }
    if let Some(&n) = sizes.iter().find(|&&n| n < delta) {
        return Err(CliError::Parse(format!("size {n} is smaller than delta {delta}")));
    }
    let mut master = SolverRng::new(cli.seed);
    let mut rows = Vec::new();
    for &n in sizes {
        let mut sums = vec![(0u64, 0u64); algos.len()];
        for _ in 0..trials {
            let mut inst_rng = master.fork();
            let solve_seed = rand::RngCore::next_u64(&mut master);
            let u = uniform_grid_uso(n, delta, &mut inst_rng).map_err(uso_error)?;
            for (k, &algo) in algos.iter().enumerate() {
                let oracle = u.clone().into_oracle().map_err(uso_error)?;
                let r = SolveRun { algo, seed: solve_seed }.run(oracle)?;
                sums[k].0 += r.stats.primitive_calls;
                sums[k].1 += r.stats.loop_iterations;
            }
        }
        for (k, &algo) in algos.iter().enumerate() {
            rows.push(BenchRow {
                n,
                algo,
                mean_calls: sums[k].0 as f64 / trials as f64,
                mean_iterations: sums[k].1 as f64 / trials as f64,
            });
        }
    }
    let header = "n,delta,algo,mean_primitive_calls,mean_iterations,trials,seed";
    let mut csv = format!("{header}\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{delta},{},{:.3},{:.3},{trials},{}",
            r.n,
            r.algo.name(),
            r.mean_calls,
            r.mean_iterations,
            cli.seed
        );
    }
    let json = json!({
        "seed": cli.seed,
        "delta": delta,
        "trials": trials,
        "rows": rows.iter().map(|r| json!({
            "n": r.n,
            "algo": r.algo.name(),
            "mean_primitive_calls": r.mean_calls,
            "mean_iterations": r.mean_iterations,
        })).collect::<Vec<_>>(),
    });
    let text = csv.clone();
    Ok(ok(render(cli.format, json, || text, Some(csv))?))
}

struct SamplingRun {
    w: Vec<usize>,
    r: usize,
    trials: usize,
    seed: u64,
}

struct SamplingResult {
    n: usize,
    delta: usize,
    report: vspace::SamplingReport,
    exact: Option<Ratio<u64>>,
}

/// Largest number of samples enumerated for the exact expectation.
const EXACT_SAMPLE_LIMIT: u64 = 200_000;

fn binomial(n: u64, k: u64) -> Option<u64> {
    (0..k).try_fold(1u64, |acc, i| acc.checked_mul(n - i).map(|x| x / (i + 1)))
}

impl OracleJob for SamplingRun {
    type Out = SamplingResult;

    fn run<S: ViolatorSpace + InternalWork>(self, oracle: ViolationOracle<S>) -> Result<SamplingResult, CliError> {
        let n = oracle.n();
        let w = ConstraintSet::from_indices(n, self.w.iter().copied());
        let mut rng = SolverRng::new(self.seed);
        let report = sampling_check(&oracle, &w, self.r, self.trials, &mut rng).map_err(solve_error)?;
        let exact = match binomial(n as u64, self.r as u64) {
            Some(count) if count <= EXACT_SAMPLE_LIMIT => {
                let mut total = 0u64;
                for combo in itertools::Itertools::combinations(0..n, self.r) {
                    let base = w.union(&ConstraintSet::from_indices(n, combo));
                    let v = oracle.violators_uncounted(&base).map_err(|e| CliError::Solve(e.to_string()))?;
                    total += v.difference(&base).len() as u64;
                }
                Some(Ratio::new(total, count))
            }
            _ => None,
        };
        Ok(SamplingResult {
            n,
            delta: oracle.delta(),
            report,
            exact,
        })
    }
}

fn sampling(
    cli: &Cli,
    path: &Path,
    r: usize,
    w: &[String],
    trials: usize,
    delta: Option<u64>,
) -> Result<Outcome, CliError> {
    let Loaded { names, instance, .. } = load(read_document(path)?)?;
    let w_idx = w
        .iter()
        .map(|x| {
            names
                .iter()
                .position(|y| y == x)
                .ok_or_else(|| CliError::Parse(format!("unknown constraint {x:?} in --w")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let res = dispatch(instance, delta, SamplingRun { w: w_idx, r, trials, seed: cli.seed })?;
    let rep = &res.report;
    let exact_str = res.exact.map(|q| format!("{}/{}", q.numer(), q.denom()));
    let exact_f = res.exact.map(|q| *q.numer() as f64 / *q.denom() as f64);
    let json = json!({
        "seed": cli.seed,
        "n": res.n,
        "delta": res.delta,
        "r": rep.r,
        "w": w,
        "trials": rep.trials,
        "mean": rep.mean,
        "stddev": rep.stddev,
        "bound": rep.bound,
        "slack": rep.slack,
        "pass": rep.pass,
        "exact_mean": exact_str,
    });
    let csv = format!(
        "seed,n,delta,r,trials,mean,stddev,bound,slack,pass,exact_mean\n{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}\n",
        cli.seed,
        res.n,
        res.delta,
        rep.r,
        rep.trials,
        rep.mean,
        rep.stddev,
        rep.bound,
        rep.slack,
        rep.pass,
        exact_str.clone().unwrap_or_default()
    );
    let text = || {
        let mut t = String::new();
        let _ = writeln!(t, "seed: {}", cli.seed);
        let _ = writeln!(t, "n: {}  delta: {}  r: {}  trials: {}", res.n, res.delta, rep.r, rep.trials);
        let _ = writeln!(t, "mean violators: {:.6} (stddev {:.6})", rep.mean, rep.stddev);
        let _ = writeln!(t, "bound: {:.6} + slack {:.6}", rep.bound, rep.slack);
        if let (Some(s), Some(f)) = (&exact_str, exact_f) {
            let _ = writeln!(t, "exact mean: {s} = {f:.6}");
        }
        let _ = writeln!(t, "pass: {}", rep.pass);
        t
    };
    Ok(ok(render(cli.format, json, text, Some(csv))?))
}
