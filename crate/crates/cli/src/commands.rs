use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ed_align::deform::{parse_transforms, write_transforms};
use ed_align::eiae::{train_eiae, ToyConfig};
use ed_align::losses::{bounded_mmd, mmd, FeatureSet, KernelConfig, LossWeights};
use ed_align::registration::{register, rig, BindingMethod, RegistrationConfig, Rig};
use ed_align::{apply_ed, build_hierarchy, parse_obj, qem_decimate, write_obj, BindingTable, NodeTransform, TriMesh};
use serde::Serialize;

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::manifest::Files;

fn load_mesh(files: &mut Files, path: &Path) -> CliResult<TriMesh> {
    parse_obj(&files.read(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn binding_method(method: Method, k: usize) -> BindingMethod {
    match method {
        Method::Trace => BindingMethod::Trace,
        Method::Knn => BindingMethod::Knn { k },
    }
}

/// Sends `text` to `out` when given, otherwise to standard output.
fn emit(files: &mut Files, out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => files.write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn simplify(a: &SimplifyArgs, files: &mut Files) -> CliResult<()> {
    let mesh = load_mesh(files, &a.input)?;
    let dec = qem_decimate(&mesh, a.target_verts)?;
    if dec.stalled {
        eprintln!(
            "warning: stopped at {} vertices; no further collapse was valid",
            dec.mesh.vertex_count()
        );
    }
    files.write(&a.out, write_obj(&dec.mesh).as_bytes())
}

pub fn coarsen(a: &CoarsenArgs, files: &mut Files) -> CliResult<()> {
    let mesh = load_mesh(files, &a.input)?;
    let h = build_hierarchy(&mesh, a.levels, a.seed)?;
    let mut text = String::new();
    let sizes = h.level_sizes();
    let list: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    writeln!(text, "levels {}", sizes.len()).unwrap();
    writeln!(text, "sizes {}", list.join(" ")).unwrap();
    for (step, pool) in h.pools.iter().enumerate() {
        let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
        for c in pool.clusters() {
            *histogram.entry(c.len()).or_default() += 1;
        }
        let ratio = sizes[step + 1] as f64 / sizes[step] as f64;
        writeln!(text, "step {} {} -> {} ratio {ratio:.4}", step + 1, sizes[step], sizes[step + 1]).unwrap();
        for (size, count) in histogram {
            writeln!(text, "  cluster_size {size} count {count}").unwrap();
        }
    }
    let mut finest: BTreeMap<usize, usize> = BTreeMap::new();
    for c in h.trace_all() {
        *finest.entry(c.len()).or_default() += 1;
    }
    writeln!(text, "graph_nodes {}", h.coarsest().len()).unwrap();
    for (size, count) in finest {
        writeln!(text, "  traced_size {size} count {count}").unwrap();
    }
    emit(files, a.out.as_deref(), &text)
}

fn method_label(method: Method, k: usize) -> String {
    match method {
        Method::Trace => "trace".into(),
        Method::Knn => format!("knn(k={k})"),
    }
}

fn sorted(controls: &[usize]) -> Vec<usize> {
    let mut c = controls.to_vec();
    c.sort_unstable();
    c
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn bind(a: &BindArgs, files: &mut Files) -> CliResult<()> {
    let mesh = load_mesh(files, &a.input)?;
    let table_for = |m: Method| -> CliResult<Rig> { Ok(rig(&mesh, a.levels, a.seed, binding_method(m, a.knn_k))?) };
    let main = table_for(a.method)?;
    let mut text = String::new();
    let label = method_label(a.method, a.knn_k);
    match a.compare {
        None => {
            writeln!(
                text,
                "binding {label} vertices {} nodes {}",
                main.binding.len(),
                main.graph.node_count()
            )
            .unwrap();
            write_table(&mut text, &main.binding);
        }
        Some(other) => {
            let theirs = table_for(other)?.binding;
            let other_label = method_label(other, a.knn_k);
            let differing: Vec<usize> = (0..mesh.vertex_count())
                .filter(|&v| sorted(&main.binding.controls[v]) != sorted(&theirs.controls[v]))
                .collect();
            writeln!(text, "compare {label} vs {other_label}").unwrap();
            writeln!(text, "differing {} of {}", differing.len(), mesh.vertex_count()).unwrap();
            for v in differing {
                writeln!(
                    text,
                    "v {v} {label} {} | {other_label} {}",
                    join(&sorted(&main.binding.controls[v])),
                    join(&sorted(&theirs.controls[v]))
                )
                .unwrap();
            }
        }
    }
    emit(files, a.out.as_deref(), &text)
}

fn write_table(text: &mut String, table: &BindingTable) {
    for (v, (c, w)) in table.controls.iter().zip(&table.weights).enumerate() {
        let weights: Vec<String> = w.iter().map(|x| format!("{x:.17e}")).collect();
        writeln!(text, "v {v} controls {} weights {}", join(c), weights.join(" ")).unwrap();
    }
}

pub fn deform(a: &DeformArgs, files: &mut Files) -> CliResult<()> {
    let mesh = load_mesh(files, &a.input)?;
    let r = rig(&mesh, a.rig.levels, a.rig.seed, binding_method(a.rig.method, a.rig.knn_k))?;
    if let Some(path) = &a.emit_identity {
        let identity = vec![NodeTransform::IDENTITY; r.graph.node_count()];
        return files.write(path, write_transforms(&identity).as_bytes());
    }
    let (Some(tpath), Some(out)) = (&a.transforms, &a.out) else {
        return Err(CliError::Usage("deform needs --transforms and --out".into()));
    };
    let params = parse_transforms(&files.read(tpath)?).map_err(|source| CliError::Input {
        path: tpath.clone(),
        source,
    })?;
    if params.len() != r.graph.node_count() {
        return Err(CliError::Usage(format!(
            "{} holds {} transforms but the graph has {} nodes at --levels {} --seed {}",
            tpath.display(),
            params.len(),
            r.graph.node_count(),
            a.rig.levels,
            a.rig.seed
        )));
    }
    let mut graph = r.graph;
    graph.params = params;
    let moved = apply_ed(mesh.vertices(), &graph, &r.binding)?;
    files.write(out, write_obj(&mesh.with_vertices(moved)?).as_bytes())
}

#[derive(Serialize)]
struct RegisterOutput<'a> {
    config: &'a RegistrationConfig,
    source_vertices: usize,
    target_vertices: usize,
    target_bbox_diagonal: f64,
    #[serde(flatten)]
    report: serde_json::Value,
}

pub fn register_cmd(a: &RegisterArgs, files: &mut Files) -> CliResult<()> {
    let source = load_mesh(files, &a.source)?;
    let target = load_mesh(files, &a.target)?;
    let mut cfg = RegistrationConfig::with_iters(a.iters);
    cfg.levels = a.levels;
    cfg.learning_rate = a.lr;
    cfg.rng_seed = a.seed;
    cfg.binding = binding_method(a.binding, a.knn_k);
    cfg.convergence_tol = a.tol;
    if let Some(c) = a.cycle_iters {
        cfg.cycle_iters = c;
    }
    if a.no_cycle {
        cfg.cycle_iters = 0;
    }
    cfg.weights = LossWeights {
        lambda_arap: a.lambda_arap,
        lambda_edge: a.lambda_edge,
        lambda_lap: a.lambda_lap,
        beta: a.beta,
        ..LossWeights::default()
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let report = register(&source, &target, &cfg)?;
    eprintln!(
        "{} iterations, converged {}, final Chamfer {:.6e}, {:.2} s",
        report.iterations, report.converged, report.final_chamfer, report.wall_time_secs
    );
    files.write(&a.out, write_obj(&report.deformed).as_bytes())?;
    if let Some(path) = &a.report {
        let mut value = serde_json::to_value(&report)?;
        // timing differs between runs; keep the file reproducible
        if let Some(obj) = value.as_object_mut() {
            obj.remove("wall_time_secs");
        }
        let out = RegisterOutput {
            config: &cfg,
            source_vertices: source.vertex_count(),
            target_vertices: target.vertex_count(),
            target_bbox_diagonal: target.bbox_diagonal(),
            report: value,
        };
        let mut text = serde_json::to_string_pretty(&out)?;
        text.push('\n');
        files.write(path, text.as_bytes())?;
    }
    Ok(())
}

/// One row per non-empty line, whitespace-separated; `#` starts a comment.
pub fn parse_matrix(text: &str) -> Result<FeatureSet, String> {
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| format!("line {}: bad number {t:?}", n + 1)))
            .collect::<Result<Vec<f64>, String>>()?;
        if let Some(first) = rows.first().map(Vec::len) {
            if row.len() != first {
                return Err(format!("line {}: {} columns, expected {first}", n + 1, row.len()));
            }
        }
        rows.push(row);
    }
    FeatureSet::from_rows(&rows).map_err(|e| e.to_string())
}

pub fn mmd_cmd(a: &MmdArgs, files: &mut Files) -> CliResult<()> {
    let mut load = |p: &Path| -> CliResult<FeatureSet> {
        let text = files.read(p)?;
        parse_matrix(&text).map_err(|m| {
            CliError::Input {
                path: p.to_path_buf(),
                source: ed_align::Error::Argument(m),
            }
        })
    };
    let x = load(&a.x)?;
    let y = load(&a.y)?;
    if x.dim() != y.dim() {
        return Err(CliError::Usage(format!(
            "--x has {} columns but --y has {}",
            x.dim(),
            y.dim()
        )));
    }
    let kernel = match &a.sigmas {
        Some(s) => KernelConfig::new(s.clone()).map_err(|e| CliError::Usage(e.to_string()))?,
        None => KernelConfig::default(),
    };
    let raw = mmd(&x, &y, &kernel)?.0;
    let bounded = bounded_mmd(&x, &y, &kernel, a.beta)?.0;
    println!("raw {raw:.17e}");
    println!("bounded {bounded:.17e}");
    Ok(())
}

#[derive(Serialize)]
struct CsvRow {
    epoch: usize,
    train_loss: f64,
    raw_mmd: f64,
    bounded_mmd: f64,
    accuracy: f64,
}

pub fn eiae_demo(a: &EiaeArgs, files: &mut Files) -> CliResult<()> {
    let cfg = ToyConfig {
        canonical_dim: a.canonical_dim,
        hidden: a.hidden,
        epochs: a.epochs,
        learning_rate: a.lr,
        seed: a.seed,
        weights: LossWeights {
            lambda_f: a.lambda_f,
            ..LossWeights::default()
        },
        ..ToyConfig::default()
    };
    let trained = train_eiae(&cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &trained.trace {
        w.serialize(CsvRow {
            epoch: r.epoch,
            train_loss: r.train_loss,
            raw_mmd: r.eval.raw_mmd,
            bounded_mmd: r.eval.bounded_mmd,
            accuracy: r.eval.accuracy,
        })?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io {
        path: a.out.clone(),
        source: e.into_error(),
    })?;
    if let Some(last) = trained.trace.last() {
        eprintln!(
            "epoch {}: raw MMD {:.4}, accuracy {:.1}%",
            last.epoch,
            last.eval.raw_mmd,
            100.0 * last.eval.accuracy
        );
    }
    files.write(&a.out, &bytes)
}
