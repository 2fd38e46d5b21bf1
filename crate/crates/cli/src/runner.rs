//! Task execution and report assembly.
//!
//! Configuration problems (unknown names, unparsable numbers, invalid
//! kernel parameters) surface as `Err` before any task runs — the
//! caller maps those to exit code 2. Runtime failures inside a task
//! (divergent partition sums, violated preconditions) become
//! `TaskReport::Error` entries; the report is still written and the
//! run exits 1.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use papangelou::checks::{
    check_a2, check_a2prime_extract_f, check_bc, check_cocycle, check_diagonal_positivity,
    check_dynkin, check_j, check_jprime, check_simple, CheckReport,
};
use papangelou::extract::{classify, extract_interaction, extract_local, extract_vanishing_diagonal};
use papangelou::gnz::{default_suite, gnz_reports, transform_test};
use papangelou::kernel::Kernel;
use papangelou::partition::Truncation;
use papangelou::samplers::{draw, BirthDeathParams, SampleBatch, SamplerSpec};
use papangelou::scalar::{default_tol, Rational, Scalar};
use papangelou::space::{SiteMap, Space};

use crate::config::{
    merge_map, Arithmetic, CheckSpec, KernelSpec, OutputFormat, RunConfig, TaskSpec,
};
use crate::report::{
    check_json, classification_json, decomposition_json, gnz_rows, CheckJson, ExtractJson,
    GnzJson, Report, SampleJson, TaskReport, TransformJson,
};

enum BuiltKernels {
    Rational {
        exact: Box<dyn Kernel<Rational>>,
        float: Box<dyn Kernel<f64>>,
    },
    Float {
        float: Box<dyn Kernel<f64>>,
    },
}

impl BuiltKernels {
    fn float(&self) -> &dyn Kernel<f64> {
        match self {
            BuiltKernels::Rational { float, .. } => float.as_ref(),
            BuiltKernels::Float { float } => float.as_ref(),
        }
    }
}

enum ResolvedCheck {
    A1,
    A2,
    A2Prime,
    A6,
    J,
    JPrime,
    BC,
    Simple,
    Dynkin(SiteMap),
}

enum ResolvedExtract {
    Local { max_n: u32 },
    Interaction { max_n: u32, diagonal: Vec<String> },
    Vanishing { max_n: u32 },
    Classify { max_n: u32 },
}

enum ResolvedTask {
    Check(ResolvedCheck),
    Sample {
        spec: SamplerSpec,
        method: String,
        n: usize,
        dump: bool,
    },
    Gnz {
        spec: SamplerSpec,
        method: String,
        n: usize,
    },
    Transform {
        map: SiteMap,
        spec: SamplerSpec,
        method: String,
        n: usize,
    },
    Extract(ResolvedExtract),
}

fn resolve_check(space: &Space, spec: &CheckSpec, kernel: &KernelSpec) -> Result<ResolvedCheck> {
    let (property, merge) = match spec {
        CheckSpec::Property(p) => (p.as_str(), None),
        CheckSpec::WithMap { property, merge } => (property.as_str(), Some(merge)),
    };
    let resolved = match property {
        "A1" => ResolvedCheck::A1,
        "A2" => ResolvedCheck::A2,
        "A2prime" | "A2'" => ResolvedCheck::A2Prime,
        "A6" => {
            if kernel.f.is_none() {
                bail!("check A6 needs a kernel with a pair density `f`");
            }
            ResolvedCheck::A6
        }
        "J" => ResolvedCheck::J,
        "Jprime" | "J'" => ResolvedCheck::JPrime,
        "BC" => ResolvedCheck::BC,
        "simple" => ResolvedCheck::Simple,
        "D" | "dynkin" => {
            let merge = merge
                .ok_or_else(|| anyhow!("check D needs a merge, e.g. merge = [[\"a\",\"b\"]]"))?;
            ResolvedCheck::Dynkin(merge_map(space, merge)?)
        }
        other => bail!(
            "unknown check property `{other}` (available: A1, A2, A2prime, A6, J, Jprime, \
             D, BC, simple)"
        ),
    };
    if merge.is_some() && !matches!(resolved, ResolvedCheck::Dynkin(_)) {
        bail!("only check D takes a merge");
    }
    Ok(resolved)
}

fn resolve_sampler(
    method: &str,
    burn_in: Option<usize>,
    thin: Option<usize>,
    truncation: &Truncation<f64>,
) -> Result<SamplerSpec> {
    match method {
        "exact" => Ok(SamplerSpec::Exact {
            truncation: truncation.clone(),
        }),
        "product_form" => Ok(SamplerSpec::ProductForm),
        "birth_death" => {
            let defaults = BirthDeathParams::default();
            Ok(SamplerSpec::BirthDeath(BirthDeathParams {
                burn_in: burn_in.unwrap_or(defaults.burn_in),
                thin: thin.unwrap_or(defaults.thin),
            }))
        }
        other => bail!(
            "unknown sampler `{other}` (available: exact, product_form, birth_death)"
        ),
    }
}

fn resolve_tasks(
    cfg: &RunConfig,
    space: &Space,
    truncation_f64: &Truncation<f64>,
    filter: Option<&str>,
) -> Result<Vec<ResolvedTask>> {
    let mut out = Vec::new();
    for task in &cfg.tasks {
        if let Some(kind) = filter {
            if task.kind() != kind {
                continue;
            }
        }
        let resolved = match task {
            TaskSpec::Check(spec) => ResolvedTask::Check(resolve_check(space, spec, &cfg.kernel)?),
            TaskSpec::Sample(s) => ResolvedTask::Sample {
                spec: resolve_sampler(&s.method, s.burn_in, s.thin, truncation_f64)?,
                method: s.method.clone(),
                n: s.n,
                dump: s.dump,
            },
            TaskSpec::Gnz(s) => ResolvedTask::Gnz {
                spec: resolve_sampler(&s.method, s.burn_in, s.thin, truncation_f64)?,
                method: s.method.clone(),
                n: s.n,
            },
            TaskSpec::Transform(s) => ResolvedTask::Transform {
                map: merge_map(space, &s.merge)?,
                spec: resolve_sampler(&s.method, s.burn_in, s.thin, truncation_f64)?,
                method: s.method.clone(),
                n: s.n,
            },
            TaskSpec::Extract(s) => {
                let max_n = s.max_n.unwrap_or(6);
                let resolved = match s.regime.as_str() {
                    "local" => ResolvedExtract::Local { max_n },
                    "interaction" => {
                        let diagonal = s.f_diagonal.clone().ok_or_else(|| {
                            anyhow!("extract regime `interaction` needs `f_diagonal`")
                        })?;
                        if diagonal.len() != space.len() {
                            bail!(
                                "`f_diagonal` has {} entries for a {}-site space",
                                diagonal.len(),
                                space.len()
                            );
                        }
                        for d in &diagonal {
                            Rational::parse(d).map_err(|e| anyhow!(e.to_string()))?;
                        }
                        ResolvedExtract::Interaction { max_n, diagonal }
                    }
                    "vanishing_diagonal" => ResolvedExtract::Vanishing { max_n },
                    "classify" => ResolvedExtract::Classify { max_n },
                    other => bail!(
                        "unknown extract regime `{other}` (available: local, interaction, \
                         vanishing_diagonal, classify)"
                    ),
                };
                ResolvedTask::Extract(resolved)
            }
        };
        out.push(resolved);
    }
    Ok(out)
}

fn run_check_generic<T: Scalar>(
    pi: &dyn Kernel<T>,
    space: &Space,
    kernel_spec: &KernelSpec,
    check: &ResolvedCheck,
    probe_mass: u32,
    map_budget: usize,
) -> Result<CheckJson, papangelou::Error> {
    let tol = default_tol::<T>();
    let report: CheckReport<T> = match check {
        ResolvedCheck::A1 => check_cocycle(pi, probe_mass, &tol),
        ResolvedCheck::A2 => check_a2(pi, probe_mass, &tol),
        ResolvedCheck::A2Prime => check_a2prime_extract_f(pi, probe_mass, &tol).0,
        ResolvedCheck::A6 => {
            let f = kernel_spec
                .pair_density::<T>(space)
                .map_err(|e| papangelou::Error::Parameter(e.to_string()))?;
            check_diagonal_positivity(&f)
        }
        ResolvedCheck::J => check_j(pi, probe_mass, &tol),
        ResolvedCheck::JPrime => check_jprime(pi, probe_mass, &tol)?,
        ResolvedCheck::BC => check_bc(pi, probe_mass, map_budget, &tol),
        ResolvedCheck::Simple => check_simple(pi, probe_mass),
        ResolvedCheck::Dynkin(map) => check_dynkin(pi, map, probe_mass, &tol),
    };
    Ok(check_json(space, &report))
}

fn run_extract_generic<T: Scalar>(
    pi: &dyn Kernel<T>,
    spec: &ResolvedExtract,
    probe_mass: u32,
) -> Result<ExtractJson, papangelou::Error> {
    let tol = default_tol::<T>();
    match spec {
        ResolvedExtract::Local { max_n } => {
            let d = extract_local(pi, *max_n, probe_mass, &tol)?;
            Ok(decomposition_json(&d))
        }
        ResolvedExtract::Interaction { max_n, diagonal } => {
            let diagonal: Result<Vec<T>, _> =
                diagonal.iter().map(|s| T::parse(s)).collect();
            let d = extract_interaction(pi, &diagonal?, *max_n, probe_mass, &tol)?;
            Ok(decomposition_json(&d))
        }
        ResolvedExtract::Vanishing { max_n } => {
            let d = extract_vanishing_diagonal(pi, *max_n, probe_mass, &tol)?;
            Ok(decomposition_json(&d))
        }
        ResolvedExtract::Classify { max_n } => {
            let c = classify(pi, probe_mass, *max_n, &tol);
            Ok(classification_json(&c))
        }
    }
}

fn write_sample_csv(
    path: &Path,
    space: &Space,
    batch: &SampleBatch,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    writer.write_record(space.site_names())?;
    for cfg in &batch.configs {
        writer.write_record(cfg.counts().iter().map(|c| c.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

/// Execute the (optionally filtered) tasks of a configuration and
/// write the report plus any CSV artifacts into `out_dir`.
pub fn execute(cfg: &RunConfig, filter: Option<&str>, out_dir: &Path) -> Result<Report> {
    let space = cfg.space()?;
    let kernels = match cfg.arithmetic {
        Arithmetic::Rational => BuiltKernels::Rational {
            exact: cfg.kernel.build::<Rational>(&space)?,
            float: cfg.kernel.build::<f64>(&space)?,
        },
        Arithmetic::Float => BuiltKernels::Float {
            float: cfg.kernel.build::<f64>(&space)?,
        },
    };
    let truncation_f64 = Truncation::new(
        cfg.truncation.max_mass,
        f64::parse(&cfg.truncation.tol).map_err(|e| anyhow!(e.to_string()))?,
    );
    let tasks = resolve_tasks(cfg, &space, &truncation_f64, filter)?;

    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;

    let mut reports: Vec<TaskReport> = Vec::with_capacity(tasks.len());
    for (index, task) in tasks.iter().enumerate() {
        let report = run_task(
            cfg,
            &space,
            &kernels,
            task,
            index,
            out_dir,
        );
        reports.push(report.unwrap_or_else(|e| TaskReport::Error {
            message: e.to_string(),
        }));
    }

    let pass = reports.iter().all(|r| r.passed());
    let report = Report {
        space: space.site_names().to_vec(),
        kernel: cfg.kernel.name.clone(),
        arithmetic: cfg.arithmetic.as_str().to_string(),
        seed: cfg.seed,
        probe_mass: cfg.probe_mass,
        replicas: cfg.replicas,
        tasks: reports,
        pass,
    };

    let json = serde_json::to_vec_pretty(&report).context("cannot serialize report")?;
    let report_path = out_dir.join("report.json");
    let mut bytes = json;
    bytes.push(b'\n');
    fs::write(&report_path, bytes)
        .with_context(|| format!("cannot write {}", report_path.display()))?;

    if cfg.output.format == OutputFormat::Csv {
        write_gnz_csv(&report, out_dir)?;
    }
    Ok(report)
}

fn run_task(
    cfg: &RunConfig,
    space: &Space,
    kernels: &BuiltKernels,
    task: &ResolvedTask,
    index: usize,
    out_dir: &Path,
) -> Result<TaskReport> {
    match task {
        ResolvedTask::Check(check) => {
            let json = match kernels {
                BuiltKernels::Rational { exact, .. } => run_check_generic(
                    exact.as_ref(),
                    space,
                    &cfg.kernel,
                    check,
                    cfg.probe_mass,
                    cfg.map_budget,
                ),
                BuiltKernels::Float { float } => run_check_generic(
                    float.as_ref(),
                    space,
                    &cfg.kernel,
                    check,
                    cfg.probe_mass,
                    cfg.map_budget,
                ),
            }?;
            Ok(TaskReport::Check(json))
        }
        ResolvedTask::Extract(spec) => {
            let json = match kernels {
                BuiltKernels::Rational { exact, .. } => {
                    run_extract_generic(exact.as_ref(), spec, cfg.probe_mass)
                }
                BuiltKernels::Float { float } => {
                    run_extract_generic(float.as_ref(), spec, cfg.probe_mass)
                }
            }?;
            Ok(TaskReport::Extract(json))
        }
        ResolvedTask::Sample {
            spec,
            method,
            n,
            dump,
        } => {
            let pi = kernels.float();
            let batch = draw(pi, spec, *n, cfg.seed, cfg.replicas)?;
            let csv_name = if *dump || cfg.output.format == OutputFormat::Csv {
                let name = format!("samples_task{index}.csv");
                write_sample_csv(&out_dir.join(&name), space, &batch)?;
                Some(name)
            } else {
                None
            };
            Ok(TaskReport::Sample(SampleJson {
                method: method.clone(),
                n: *n,
                mean_counts: batch.mean_counts(space.len()),
                acceptance_rate: batch.diagnostics.acceptance_rate,
                tail_bound: batch.diagnostics.tail_bound,
                csv: csv_name,
            }))
        }
        ResolvedTask::Gnz { spec, method, n } => {
            let pi = kernels.float();
            let batch = draw(pi, spec, *n, cfg.seed, cfg.replicas)?;
            let suite = default_suite(space);
            let estimates = gnz_reports(&batch, pi, &suite)?;
            Ok(TaskReport::Gnz(GnzJson {
                method: method.clone(),
                n: *n,
                all_pass: estimates.iter().all(|r| r.pass),
                reports: gnz_rows(&estimates),
            }))
        }
        ResolvedTask::Transform {
            map,
            spec,
            method,
            n,
        } => {
            let pi = kernels.float();
            let outcome = transform_test(
                pi,
                map,
                spec,
                *n,
                cfg.seed,
                cfg.replicas,
                cfg.probe_mass,
                1e-9,
            )?;
            Ok(TaskReport::Transform(TransformJson {
                map: map.describe(space),
                target_sites: outcome.target_space.site_names().to_vec(),
                kernel: outcome.pushed_kernel_name.clone(),
                method: method.clone(),
                n: *n,
                all_pass: outcome.reports.iter().all(|r| r.pass),
                mean_counts: outcome.batch.mean_counts(outcome.target_space.len()),
                reports: gnz_rows(&outcome.reports),
            }))
        }
    }
}

/// Flat CSV across all identity tests: one row per (task, function).
fn write_gnz_csv(report: &Report, out_dir: &Path) -> Result<()> {
    let rows: Vec<(usize, &str, &crate::report::GnzRowJson)> = report
        .tasks
        .iter()
        .enumerate()
        .flat_map(|(i, task)| -> Vec<(usize, &str, &crate::report::GnzRowJson)> {
            match task {
                TaskReport::Gnz(g) => g.reports.iter().map(|r| (i, "gnz", r)).collect(),
                TaskReport::Transform(t) => {
                    t.reports.iter().map(|r| (i, "transform", r)).collect()
                }
                _ => Vec::new(),
            }
        })
        .collect();
    if rows.is_empty() {
        return Ok(());
    }
    let path = out_dir.join("gnz.csv");
    let mut writer = csv::Writer::from_path(&path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    writer.write_record([
        "kernel", "task", "kind", "function", "family", "lhs", "rhs", "se_lhs", "se_rhs",
        "z_score", "pass",
    ])?;
    for (i, kind, r) in rows {
        writer.write_record([
            report.kernel.as_str(),
            &i.to_string(),
            kind,
            &r.function,
            &r.family,
            &r.lhs.to_string(),
            &r.rhs.to_string(),
            &r.se_lhs.to_string(),
            &r.se_rhs.to_string(),
            &r.z_score.to_string(),
            &r.pass.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
