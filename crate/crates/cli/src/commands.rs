use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;
use serde_json::json;

use equilox::cluster::{cluster_all, Clustering};
use equilox::instance::{derive_demands, validate_instance, DemandTable, Instance};
use equilox::models::lp::write_lp;
use equilox::models::mps::{write_mps, MpsFormat};
use equilox::models::{self, extract_metrics, BuildOptions, FirstStage, Formulation, ModelIR};
use equilox::sim::{self, EvalOptions, EvalRecord, FormulationConfig, Metric};
use equilox::solver::{default_backend, solve_with, Solution, SolutionCache, SolveParams};
use equilox::fixtures;

use crate::args::{ExportArgs, ExportFormat, ModelFlags, RunArgs, SimulateArgs, SolveFlags, ValidateArgs};
use crate::manifest::{default_out_dir, ClusterConfig, InstanceRef, RunManifest, Seeds};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_USAGE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn invalid(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_INVALID, error: e.into() }
    }
    fn solver(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_SOLVER, error: e.into() }
    }
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_USAGE, error: e.into() }
    }
}

type CmdResult = Result<(), Failure>;

/// Reads an instance from a path, falling back to the bundled fixtures by name.
fn read_instance_text(source: &str) -> Result<String, Failure> {
    let path = Path::new(source);
    if path.exists() {
        return fs::read_to_string(path)
            .with_context(|| format!("cannot read {source}"))
            .map_err(Failure::invalid);
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or(source);
    fixtures::bundled(name)
        .map(str::to_string)
        .ok_or_else(|| Failure::invalid(anyhow!("no such instance file: {source}")))
}

fn load(source: &str, manifest: &mut RunManifest) -> Result<Instance, Failure> {
    let text = read_instance_text(source)?;
    manifest.instance = Some(InstanceRef::new(source, &text));
    let inst = Instance::from_json_str(&text).map_err(Failure::invalid)?;
    let findings = validate_instance(&inst);
    if !findings.is_empty() {
        for f in &findings {
            eprintln!("  {f}");
        }
        return Err(Failure::invalid(anyhow!("{source}: {} validation findings", findings.len())));
    }
    Ok(inst)
}

fn solve_params(flags: &SolveFlags, lp_relaxation: bool) -> SolveParams {
    SolveParams {
        time_limit_s: flags.time_limit,
        rel_gap: flags.gap,
        threads: if flags.repro { 1 } else { flags.threads },
        seed: flags.seed,
        lp_relaxation,
    }
}

/// Per-scenario cluster counts from the flag or the instance, checked against
/// the scenario count.
fn cluster_counts(flags: &ModelFlags, inst: &Instance) -> Result<(Option<Vec<usize>>, &'static str), Failure> {
    let (ks, source) = match (&flags.clusters, &inst.clusters_k) {
        (Some(ks), _) => (Some(ks.clone()), "flag"),
        (None, Some(ks)) => (Some(ks.clone()), "instance"),
        (None, None) => (None, "elbow"),
    };
    if let Some(ks) = &ks {
        if ks.len() != inst.scenarios.len() {
            return Err(Failure::usage(anyhow!(
                "{} cluster counts given for {} scenarios",
                ks.len(),
                inst.scenarios.len()
            )));
        }
    }
    Ok((ks, source))
}

/// Builds the model; for GiniC the chosen cluster counts go to the manifest.
fn build_model(
    f: Formulation,
    inst: &Instance,
    demand: &DemandTable,
    flags: &ModelFlags,
    seed: u64,
    manifest: &mut RunManifest,
) -> Result<ModelIR, Failure> {
    let mut options = BuildOptions {
        valid_inequality: !flags.no_valid_inequality && f == Formulation::Gini,
        clusterings: None,
    };
    if f == Formulation::GiniC {
        let (ks, source) = cluster_counts(flags, inst)?;
        let clusterings: Vec<Clustering> = cluster_all(demand, ks.as_deref(), seed).map_err(Failure::invalid)?;
        manifest.clusters = Some(ClusterConfig {
            source: source.to_string(),
            ks: Some(clusterings.iter().map(|c| c.k).collect()),
        });
        options.clusterings = Some(clusterings);
    }
    models::build(f, inst, demand, &options).map_err(Failure::invalid)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T, manifest: &mut RunManifest) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::invalid)? + "\n";
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::invalid)?;
    manifest.artifacts.push(path.to_path_buf());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.6}"))
}

fn write_metrics(path: &Path, inst: &Instance, demand: &DemandTable, sol: &Solution) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(Failure::invalid)?;
    let mut header = vec!["scenario".to_string(), "probability".into(), "U".into(), "G".into()];
    header.extend(inst.areas.iter().map(|a| format!("coverage_{}", a.id)));
    w.write_record(&header).map_err(Failure::invalid)?;
    for (s, m) in extract_metrics(inst, demand, &sol.values).into_iter().enumerate() {
        let mut row = vec![
            m.scenario.clone(),
            demand.probability(s).to_string(),
            m.effectiveness.to_string(),
            m.gini.map(|g| g.to_string()).unwrap_or_default(),
        ];
        row.extend(m.coverage.iter().map(ToString::to_string));
        w.write_record(&row).map_err(Failure::invalid)?;
    }
    w.flush().map_err(Failure::invalid)?;
    Ok(())
}

/// Runs `body`, then stamps and writes the manifest whatever the outcome.
fn with_manifest(
    mut manifest: RunManifest,
    path: PathBuf,
    body: impl FnOnce(&mut RunManifest) -> CmdResult,
) -> CmdResult {
    let result = body(&mut manifest);
    let (code, error) = match &result {
        Ok(()) => (EXIT_OK, None),
        Err(f) => (f.code, Some(format!("{:#}", f.error))),
    };
    manifest.finish(code as i32, error);
    match manifest.write(&path) {
        Ok(()) => log::info!("manifest written to {}", path.display()),
        Err(e) => eprintln!("warning: cannot write {}: {e}", path.display()),
    }
    result
}

pub fn run(args: RunArgs) -> CmdResult {
    let f = args.formulation_pos.or(args.formulation);
    let label = f.map_or("run", Formulation::as_str);
    let out = args.out.clone().unwrap_or_else(|| default_out_dir(label));
    let manifest = RunManifest::start("run");
    with_manifest(manifest, out.join("manifest.json"), |m| {
        let f = f.ok_or_else(|| Failure::usage(anyhow!("a formulation is required (sp, gmd, gini, ginic)")))?;
        m.formulations = vec![f.to_string()];
        let params = solve_params(&args.solve, args.lp_relax);
        m.params = Some(params.clone());
        m.seeds = Some(Seeds {
            solver: params.seed,
            sampling: None,
            clustering: args.solve.seed,
        });
        m.options = json!({
            "lp_relax": args.lp_relax,
            "valid_inequality": !args.model.no_valid_inequality && f == Formulation::Gini,
            "repro": args.solve.repro,
        });
        let inst = load(&args.instance, m)?;
        let demand = derive_demands(&inst);
        let model = build_model(f, &inst, &demand, &args.model, args.solve.seed, m)?;
        let backend = default_backend(args.solve.solver_path.clone());
        m.backend = Some(backend.name());
        fs::create_dir_all(&out)
            .with_context(|| format!("cannot create {}", out.display()))
            .map_err(Failure::invalid)?;

        let sol = solve_with(backend.as_ref(), &model, &params);
        write_json(&out.join("solution.json"), &sol, m)?;
        m.results = json!({
            "status": sol.status,
            "objective": sol.objective,
            "best_bound": sol.best_bound,
            "gap": sol.gap,
            "wall_time_s": sol.wall_time_s,
        });
        if !sol.status.has_solution() {
            return Err(Failure::solver(anyhow!(
                "{f}: solver returned {}: {}",
                sol.status.as_str(),
                sol.messages.join("; ")
            )));
        }
        if args.lp_relax {
            println!("{f} LP relaxation: {:.7} ({})", sol.objective.unwrap_or(f64::NAN), sol.status.as_str());
            return Ok(());
        }

        let plan = FirstStage::from_values(&inst, &sol.values).map_err(Failure::solver)?;
        write_json(&out.join("first_stage.json"), &plan, m)?;
        let metrics = out.join("metrics.csv");
        write_metrics(&metrics, &inst, &demand, &sol)?;
        m.artifacts.push(metrics);

        let open = plan.open_locations();
        println!("formulation: {f}");
        println!("status:      {}", sol.status.as_str());
        println!("objective:   {}", fmt_opt(sol.objective));
        println!("gap:         {}", fmt_opt(sol.gap));
        println!("open RFs:    {} ({})", open.len(), open.join(", "));
        println!("output:      {}", out.display());
        Ok(())
    })
}

#[derive(Serialize)]
struct PlanReport<'a> {
    formulation: Formulation,
    status: &'static str,
    objective: Option<f64>,
    gap: Option<f64>,
    wall_time_s: f64,
    first_stage: &'a FirstStage,
}

pub fn simulate(args: SimulateArgs) -> CmdResult {
    let out = args.out.clone().unwrap_or_else(|| default_out_dir("simulate"));
    let manifest = RunManifest::start("simulate");
    with_manifest(manifest, out.join("manifest.json"), |m| {
        if args.formulations.is_empty() {
            return Err(Failure::usage(anyhow!("no formulations given")));
        }
        if !(args.realization_time_limit > 0.0) {
            return Err(Failure::usage(anyhow!("--realization-time-limit must be positive")));
        }
        m.formulations = args.formulations.iter().map(ToString::to_string).collect();
        let params = solve_params(&args.solve, false);
        m.params = Some(params.clone());
        m.seeds = Some(Seeds {
            solver: params.seed,
            sampling: Some(args.solve.seed),
            clustering: args.solve.seed,
        });
        m.options = json!({
            "count": args.count,
            "jobs": args.jobs,
            "continuous_sampling": args.continuous_sampling,
            "plain_effectiveness": args.plain_effectiveness,
            "realization_time_limit_s": args.realization_time_limit,
            "valid_inequality": !args.model.no_valid_inequality,
            "repro": args.solve.repro,
        });
        let inst = load(&args.instance, m)?;
        let demand = derive_demands(&inst);
        let (ks, source) = cluster_counts(&args.model, &inst)?;
        m.clusters = Some(ClusterConfig {
            source: source.to_string(),
            ks: ks.clone(),
        });
        let backend = default_backend(args.solve.solver_path.clone());
        m.backend = Some(backend.name());
        fs::create_dir_all(&out)
            .with_context(|| format!("cannot create {}", out.display()))
            .map_err(Failure::invalid)?;
        let cache = if args.no_cache {
            None
        } else {
            Some(SolutionCache::new(args.cache_dir.clone().unwrap_or_else(|| out.clone())))
        };

        let config = FormulationConfig {
            valid_inequality: !args.model.no_valid_inequality,
            clusters: ks,
            cluster_seed: args.solve.seed,
        };
        let mut plans = Vec::new();
        for &f in &args.formulations {
            eprintln!("solving {f} plan");
            let plan = sim::solve_plan(backend.as_ref(), cache.as_ref(), &inst, &demand, f, &config, &params)
                .map_err(Failure::solver)?;
            plans.push(plan);
        }
        let reports: Vec<_> = plans
            .iter()
            .map(|p| PlanReport {
                formulation: p.formulation,
                status: p.solution.status.as_str(),
                objective: p.solution.objective,
                gap: p.solution.gap,
                wall_time_s: p.solution.wall_time_s,
                first_stage: &p.first_stage,
            })
            .collect();
        write_json(&out.join("plans.json"), &reports, m)?;

        let realizations = sim::sample_realizations(&demand, args.count, args.solve.seed, args.continuous_sampling);
        write_json(&out.join("realizations.json"), &realizations, m)?;

        let mut records: Vec<EvalRecord> = Vec::new();
        for plan in &plans {
            let f = plan.formulation;
            let mut eval_params = params.clone();
            if f.uses_ranking() {
                eval_params.time_limit_s = eval_params.time_limit_s.min(args.realization_time_limit);
            }
            let options = EvalOptions {
                params: eval_params,
                plain_effectiveness: args.plain_effectiveness,
                // realizations are clustered on their own shares
                formulation: FormulationConfig {
                    clusters: None,
                    ..config.clone()
                },
                jobs: args.jobs,
                cache: cache.clone(),
            };
            eprintln!("evaluating {f} on {} realizations", realizations.len());
            records.extend(sim::evaluate(backend.as_ref(), &inst, f, &plan.first_stage, &realizations, &options));
        }
        write_json(&out.join("records.json"), &records, m)?;
        let files = sim::summarize(&records, &out).map_err(Failure::invalid)?;
        m.artifacts.extend([
            files.scatter,
            files.hist_gini,
            files.hist_eff,
            files.summary,
            files.benefit_inequity,
            files.benefit_effectiveness,
        ]);

        print_simulation(&plans, &records);
        m.results = json!({
            "plans": reports.iter().map(|r| json!({
                "formulation": r.formulation,
                "status": r.status,
                "objective": r.objective,
                "gap": r.gap,
            })).collect::<Vec<_>>(),
            "disclosure": sim::disclosure(&records),
        });
        Ok(())
    })
}

fn print_simulation(plans: &[sim::Plan], records: &[EvalRecord]) {
    println!("plans:");
    for p in plans {
        println!(
            "  {:<6} {:<15} objective {}  gap {}  open RFs {}",
            p.formulation.as_str(),
            p.solution.status.as_str(),
            fmt_opt(p.solution.objective),
            fmt_opt(p.solution.gap),
            p.first_stage.open_locations().len()
        );
    }
    for metric in [Metric::Inequity, Metric::Effectiveness] {
        println!("{}:", metric.as_str());
        for p in plans {
            match sim::stats(&sim::metric_values(records, p.formulation, metric)) {
                Some(s) => println!(
                    "  {:<6} n {:>4}  mean {:.4}  sd {:.4}  CoV {}  best {:.4}  worst {:.4}",
                    p.formulation.as_str(),
                    s.count,
                    s.mean,
                    s.sd,
                    s.cov_pct.map_or_else(|| "-".into(), |c| format!("{c:.2}%")),
                    if metric == Metric::Inequity { s.min } else { s.max },
                    if metric == Metric::Inequity { s.max } else { s.min },
                ),
                None => println!("  {:<6} no usable realizations", p.formulation.as_str()),
            }
        }
        let bm = sim::benefit_matrix(records, metric);
        println!("  benefit (%), row vs column:");
        print!("  {:<6}", "");
        for c in &bm.formulations {
            print!(" {:>9}", c.as_str());
        }
        println!();
        for (i, r) in bm.formulations.iter().enumerate() {
            print!("  {:<6}", r.as_str());
            for cell in &bm.cells[i] {
                print!(" {:>9}", cell.map_or_else(|| "-".into(), |v| format!("{v:.2}")));
            }
            println!();
        }
    }
    let limited: Vec<_> = records.iter().filter(|r| r.solved() && r.gap.is_some_and(|g| g > 1e-4)).collect();
    if !limited.is_empty() {
        println!("unproven realization solves: {}", limited.len());
        for r in limited {
            println!("  {} {} gap {}", r.formulation.as_str(), r.realization, fmt_opt(r.gap));
        }
    }
    println!("failed / excluded realizations:");
    for (f, (failed, excluded)) in sim::disclosure(records) {
        println!("  {f:<6} failed {failed}  excluded {excluded}");
    }
}

pub fn validate(args: ValidateArgs) -> CmdResult {
    let out = args.out.clone().unwrap_or_else(|| default_out_dir("validate"));
    with_manifest(RunManifest::start("validate"), out.join("manifest.json"), |m| {
        let text = read_instance_text(&args.instance)?;
        m.instance = Some(InstanceRef::new(&args.instance, &text));
        let inst = Instance::from_json_str(&text).map_err(Failure::invalid)?;
        let findings = validate_instance(&inst);
        m.results = json!({ "findings": findings });
        if findings.is_empty() {
            println!("{}: ok", args.instance);
            return Ok(());
        }
        for f in &findings {
            println!("{f}");
        }
        Err(Failure::invalid(anyhow!("{} findings", findings.len())))
    })
}

pub fn export(args: ExportArgs) -> CmdResult {
    let out_dir = args.output.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut manifest_path = args.output.clone().into_os_string();
    manifest_path.push(".manifest.json");
    with_manifest(RunManifest::start("export"), manifest_path.into(), |m| {
        m.formulations = vec![args.formulation.to_string()];
        m.seeds = Some(Seeds {
            solver: 0,
            sampling: None,
            clustering: args.seed,
        });
        m.options = json!({ "format": format!("{:?}", args.format) });
        let inst = load(&args.instance, m)?;
        let demand = derive_demands(&inst);
        let model = build_model(args.formulation, &inst, &demand, &args.model, args.seed, m)?;
        let text = match args.format {
            ExportFormat::Mps => write_mps(&model, MpsFormat::Free),
            ExportFormat::FixedMps => write_mps(&model, MpsFormat::Fixed),
            ExportFormat::Lp => write_lp(&model),
        };
        if !out_dir.as_os_str().is_empty() {
            fs::create_dir_all(&out_dir).map_err(Failure::invalid)?;
        }
        fs::write(&args.output, text)
            .with_context(|| format!("cannot write {}", args.output.display()))
            .map_err(Failure::invalid)?;
        m.artifacts.push(args.output.clone());
        println!(
            "{}: {} variables, {} constraints, {} binaries",
            args.output.display(),
            model.variables().len(),
            model.constraints().len(),
            model.num_binaries()
        );
        Ok(())
    })
}
