//! Out-of-sample evaluation of first-stage plans on sampled demand
//! realizations, and the reports built from it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::cluster_all;
use crate::error::SimError;
use crate::instance::{DemandTable, Instance};
use crate::lorenz::{compute_gini, rank_coverages, CoverageVector};
use crate::models::{self, BuildOptions, CommonVars, FirstStage, Formulation, ModelIR, Sense};
use crate::solver::{solve_cached, Backend, SolutionCache, Solution, SolveParams, Status};

/// Width of the histogram bins over `[0, 1]`.
pub const HIST_BIN_WIDTH: f64 = 0.05;
/// Default per-realization time limit for the ranking formulations.
pub const RANKING_REALIZATION_TIME_LIMIT_S: f64 = 300.0;

/// One sampled demand realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub id: String,
    /// `[r][a]`
    pub d: Vec<Vec<u64>>,
    /// `d` over the realization total, `[r][a]`
    pub u: Vec<Vec<f64>>,
    pub positive_areas: Vec<usize>,
}

impl Realization {
    fn from_demands(id: String, d: Vec<Vec<u64>>) -> Self {
        let table = DemandTable::from_demands(vec![id.clone()], vec![1.0], vec![d.clone()]);
        let u = table.scenario_demands(0).iter().enumerate().map(|(r, row)| {
            (0..row.len()).map(|a| table.u(r, a, 0)).collect()
        });
        Realization {
            u: u.collect(),
            positive_areas: table.positive_areas(0).to_vec(),
            id,
            d,
        }
    }

    /// Single-scenario table with probability 1.
    pub fn demand_table(&self) -> DemandTable {
        DemandTable::from_demands(vec![self.id.clone()], vec![1.0], vec![self.d.clone()])
    }
}

/// Per-cell `(min_s d_ras, max_s d_ras)`, laid out `[r][a]`.
pub fn demand_range(demand: &DemandTable) -> Vec<Vec<(u64, u64)>> {
    (0..demand.n_items())
        .map(|r| {
            (0..demand.n_areas())
                .map(|a| {
                    let it = (0..demand.n_scenarios()).map(|s| demand.d(r, a, s));
                    (it.clone().min().unwrap_or(0), it.max().unwrap_or(0))
                })
                .collect()
        })
        .collect()
}

/// Draws `count` realizations, each cell uniform on its scenario range.
/// Integer-uniform inclusive by default; `continuous` draws a real value
/// and rounds it to the nearest unit.
pub fn sample_realizations(
    demand: &DemandTable,
    count: usize,
    seed: u64,
    continuous: bool,
) -> Vec<Realization> {
    let range = demand_range(demand);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = count.max(1).to_string().len().max(3);
    (0..count)
        .map(|i| {
            let d = range
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&(lo, hi)| {
                            if lo == hi {
                                lo
                            } else if continuous {
                                rng.gen_range(lo as f64..=hi as f64).round() as u64
                            } else {
                                rng.gen_range(lo..=hi)
                            }
                        })
                        .collect()
                })
                .collect();
            Realization::from_demands(format!("r{:0width$}", i + 1), d)
        })
        .collect()
}

/// How a formulation is assembled for one solve.
#[derive(Debug, Clone, Default)]
pub struct FormulationConfig {
    /// Adds the upper-bounding Lorenz inequality (Gini only).
    pub valid_inequality: bool,
    /// Clusters per scenario for GiniC; elbow selection when `None`.
    pub clusters: Option<Vec<usize>>,
    pub cluster_seed: u64,
}

pub fn build_formulation(
    formulation: Formulation,
    inst: &Instance,
    demand: &DemandTable,
    config: &FormulationConfig,
) -> Result<ModelIR, SimError> {
    let mut options = BuildOptions {
        valid_inequality: config.valid_inequality && formulation == Formulation::Gini,
        clusterings: None,
    };
    if formulation == Formulation::GiniC {
        options.clusterings = Some(cluster_all(demand, config.clusters.as_deref(), config.cluster_seed)?);
    }
    Ok(models::build(formulation, inst, demand, &options)?)
}

/// A first-stage plan with the solve that produced it.
#[derive(Debug, Clone)]
pub struct Plan {
    pub formulation: Formulation,
    pub first_stage: FirstStage,
    pub solution: Solution,
}

/// Solves `formulation` on the instance scenarios and extracts `(Y, P)`.
pub fn solve_plan(
    backend: &dyn Backend,
    cache: Option<&SolutionCache>,
    inst: &Instance,
    demand: &DemandTable,
    formulation: Formulation,
    config: &FormulationConfig,
    params: &SolveParams,
) -> Result<Plan, SimError> {
    let model = build_formulation(formulation, inst, demand, config)?;
    let solution = solve_cached(backend, cache, &model, params);
    if !solution.status.has_solution() {
        return Err(SimError::NoPlan {
            formulation: formulation.to_string(),
            message: format!("{:?}: {}", solution.status, solution.messages.join("; ")),
        });
    }
    let first_stage = FirstStage::from_values(inst, &solution.values)?;
    Ok(Plan {
        formulation,
        first_stage,
        solution,
    })
}

/// Settings of [`evaluate`].
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub params: SolveParams,
    /// Replaces every formulation's recourse objective by plain effectiveness.
    pub plain_effectiveness: bool,
    pub formulation: FormulationConfig,
    /// Worker threads; 0 means one.
    pub jobs: usize,
    pub cache: Option<SolutionCache>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            params: SolveParams::default(),
            plain_effectiveness: false,
            formulation: FormulationConfig {
                valid_inequality: true,
                clusters: None,
                cluster_seed: 0,
            },
            jobs: 1,
            cache: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub formulation: Formulation,
    pub realization: String,
    pub status: Status,
    /// Post-hoc Gini; `None` when the solve failed or nothing is covered.
    pub g_star: Option<f64>,
    /// Post-hoc effectiveness; `None` when the solve failed.
    pub u_star: Option<f64>,
    /// Coverage per area in area order.
    pub coverage: Vec<f64>,
    pub positive_areas: Vec<usize>,
    pub objective: Option<f64>,
    pub gap: Option<f64>,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

impl EvalRecord {
    pub fn solved(&self) -> bool {
        self.status.has_solution()
    }

    /// Coverages restricted to the positive-demand areas.
    pub fn ranked_input(&self) -> Vec<f64> {
        self.positive_areas.iter().map(|&a| self.coverage[a]).collect()
    }
}

/// Gini of already-computed coverages by the explicit double sum over
/// ranked values: `1 - (Z_1 + sum_{j>1} (C_{j-1} + C_j)) / (n * sum Z)`
/// with `C_j` the cumulative sum of the first `j` ranked values.
pub fn posthoc_gini(x_rank: &[f64]) -> Option<f64> {
    let n = x_rank.len();
    let mut z = x_rank.to_vec();
    z.sort_by(f64::total_cmp);
    let total: f64 = z.iter().sum();
    if n == 0 || total <= 0.0 {
        return None;
    }
    let mut bracket = z[0];
    for j in 2..=n {
        let below: f64 = z[..j - 1].iter().sum();
        let upto: f64 = z[..j].iter().sum();
        bracket += below + upto;
    }
    Some(1.0 - bracket / (n as f64 * total))
}

/// Gini of the same vector through the Lorenz-curve module.
pub fn lorenz_gini(x_rank: &[f64]) -> Option<f64> {
    let v = CoverageVector::unlabeled(x_rank.iter().map(|x| x.max(0.0)).collect()).ok()?;
    compute_gini(&rank_coverages(&v)).ok().map(|g| g.gini)
}

fn recourse_model(
    inst: &Instance,
    formulation: Formulation,
    plan: &FirstStage,
    realization: &Realization,
    options: &EvalOptions,
) -> Result<(ModelIR, DemandTable), SimError> {
    let demand = realization.demand_table();
    let mut model = build_formulation(formulation, inst, &demand, &options.formulation)?;
    if options.plain_effectiveness {
        let vars = CommonVars::lookup(&model, inst, &demand)?;
        model.set_objective(Sense::Maximize, vars.effectiveness_terms(&demand, 0));
    }
    let model = models::fix_first_stage(&model, plan)?;
    Ok((model, demand))
}

fn evaluate_one(
    backend: &dyn Backend,
    inst: &Instance,
    formulation: Formulation,
    plan: &FirstStage,
    realization: &Realization,
    options: &EvalOptions,
) -> EvalRecord {
    let mut record = EvalRecord {
        formulation,
        realization: realization.id.clone(),
        status: Status::Error,
        g_star: None,
        u_star: None,
        coverage: vec![0.0; inst.areas.len()],
        positive_areas: realization.positive_areas.clone(),
        objective: None,
        gap: None,
        wall_time_s: 0.0,
        messages: Vec::new(),
    };
    let (model, demand) = match recourse_model(inst, formulation, plan, realization, options) {
        Ok(m) => m,
        Err(e) => {
            record.messages.push(e.to_string());
            return record;
        }
    };
    let sol = solve_cached(backend, options.cache.as_ref(), &model, &options.params);
    record.status = sol.status;
    record.objective = sol.objective;
    record.gap = sol.gap;
    record.wall_time_s = sol.wall_time_s;
    record.messages = sol.messages.clone();
    if !sol.status.has_solution() {
        log::warn!("{formulation} {}: {:?}", realization.id, sol.status);
        return record;
    }
    record.coverage = models::coverages(inst, &demand, &sol.values).remove(0);
    record.u_star = Some(record.coverage.iter().sum());
    record.g_star = posthoc_gini(&record.ranked_input());
    record
}

/// Re-solves the recourse of `formulation` under the fixed `plan` for every
/// realization, in parallel on `options.jobs` workers. Output order follows
/// `realizations`.
pub fn evaluate(
    backend: &dyn Backend,
    inst: &Instance,
    formulation: Formulation,
    plan: &FirstStage,
    realizations: &[Realization],
    options: &EvalOptions,
) -> Vec<EvalRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        realizations
            .par_iter()
            .map(|r| evaluate_one(backend, inst, formulation, plan, r, options))
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Inequity,
    Effectiveness,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Inequity => "inequity",
            Metric::Effectiveness => "effectiveness",
        }
    }

    fn of(self, r: &EvalRecord) -> Option<f64> {
        match self {
            Metric::Inequity => r.g_star,
            Metric::Effectiveness => r.u_star,
        }
    }
}

/// Mean, sample standard deviation and coefficient of variation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    /// `100 * sd / mean`; `None` when the mean is zero.
    pub cov_pct: Option<f64>,
    pub min: f64,
    pub max: f64,
}

pub fn stats(values: &[f64]) -> Option<Stats> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Some(Stats {
        count: n,
        mean,
        sd,
        cov_pct: (mean != 0.0).then(|| 100.0 * sd / mean),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

/// Formulations in canonical order that have at least one record.
fn formulations_of(records: &[EvalRecord]) -> Vec<Formulation> {
    Formulation::ALL
        .iter()
        .copied()
        .filter(|f| records.iter().any(|r| r.formulation == *f))
        .collect()
}

/// Metric values of one formulation. Failed solves are dropped; for
/// inequity so are realizations where nothing was covered.
pub fn metric_values(records: &[EvalRecord], formulation: Formulation, metric: Metric) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.formulation == formulation)
        .filter_map(|r| metric.of(r))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenefitMatrix {
    pub metric: Metric,
    pub formulations: Vec<Formulation>,
    /// Per-formulation average; `None` without valid records.
    pub delta: Vec<Option<f64>>,
    /// `cells[i][j] = (delta[j] - delta[i]) / delta[i] * 100`; `None` when
    /// `delta[i]` is zero or missing.
    pub cells: Vec<Vec<Option<f64>>>,
}

impl BenefitMatrix {
    pub fn from_deltas(metric: Metric, formulations: Vec<Formulation>, delta: Vec<Option<f64>>) -> Self {
        let cells = delta
            .iter()
            .enumerate()
            .map(|(i, &di)| {
                delta
                    .iter()
                    .enumerate()
                    .map(|(j, &dj)| match (di, dj) {
                        (Some(di), Some(_)) if i == j && di != 0.0 => Some(0.0),
                        (Some(di), Some(dj)) if di != 0.0 => Some((dj - di) / di * 100.0),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        BenefitMatrix {
            metric,
            formulations,
            delta,
            cells,
        }
    }

    pub fn cell(&self, row: Formulation, col: Formulation) -> Option<f64> {
        let i = self.formulations.iter().position(|&f| f == row)?;
        let j = self.formulations.iter().position(|&f| f == col)?;
        self.cells[i][j]
    }
}

pub fn benefit_matrix(records: &[EvalRecord], metric: Metric) -> BenefitMatrix {
    let formulations = formulations_of(records);
    let delta = formulations
        .iter()
        .map(|&f| stats(&metric_values(records, f, metric)).map(|s| s.mean))
        .collect();
    BenefitMatrix::from_deltas(metric, formulations, delta)
}

/// Paths of the files written by [`summarize`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportFiles {
    pub scatter: PathBuf,
    pub hist_gini: PathBuf,
    pub hist_eff: PathBuf,
    pub summary: PathBuf,
    pub benefit_inequity: PathBuf,
    pub benefit_effectiveness: PathBuf,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Bin counts over `[0, 1]` with the last bin closed; values outside are
/// clamped into the end bins.
pub fn histogram(values: &[f64], width: f64) -> Vec<(f64, f64, usize)> {
    let bins = (1.0 / width).round() as usize;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = ((v / width).floor().max(0.0) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| (k as f64 * width, (k + 1) as f64 * width, c))
        .collect()
}

fn write_hist(path: &Path, records: &[EvalRecord], metric: Metric) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["formulation", "bin_lo", "bin_hi", "count"])?;
    for f in formulations_of(records) {
        for (lo, hi, c) in histogram(&metric_values(records, f, metric), HIST_BIN_WIDTH) {
            w.write_record([
                f.label().to_string(),
                format!("{lo:.2}"),
                format!("{hi:.2}"),
                c.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_benefit(path: &Path, m: &BenefitMatrix) -> Result<(), SimError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![m.metric.as_str().to_string()];
    header.extend(m.formulations.iter().map(|f| f.label().to_string()));
    w.write_record(&header)?;
    for (i, f) in m.formulations.iter().enumerate() {
        let mut row = vec![f.label().to_string()];
        row.extend(m.cells[i].iter().map(|&c| fmt_opt(c)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the scatter, histogram, summary and benefit CSV files into `dir`.
pub fn summarize(records: &[EvalRecord], dir: &Path) -> Result<ReportFiles, SimError> {
    std::fs::create_dir_all(dir)?;
    let files = ReportFiles {
        scatter: dir.join("scatter.csv"),
        hist_gini: dir.join("hist_gini.csv"),
        hist_eff: dir.join("hist_eff.csv"),
        summary: dir.join("summary.csv"),
        benefit_inequity: dir.join("benefit_inequity.csv"),
        benefit_effectiveness: dir.join("benefit_effectiveness.csv"),
    };

    let mut w = csv::Writer::from_path(&files.scatter)?;
    w.write_record(["formulation", "realization", "U_star", "G_star", "status", "gap"])?;
    for r in records {
        w.write_record([
            r.formulation.label().to_string(),
            r.realization.clone(),
            fmt_opt(r.u_star),
            fmt_opt(r.g_star),
            r.status.as_str().to_string(),
            fmt_opt(r.gap),
        ])?;
    }
    w.flush()?;

    write_hist(&files.hist_gini, records, Metric::Inequity)?;
    write_hist(&files.hist_eff, records, Metric::Effectiveness)?;

    let mut w = csv::Writer::from_path(&files.summary)?;
    w.write_record([
        "formulation", "metric", "count", "failed", "excluded", "mean", "sd", "cov_pct", "best", "worst",
    ])?;
    for f in formulations_of(records) {
        let mine: Vec<&EvalRecord> = records.iter().filter(|r| r.formulation == f).collect();
        let failed = mine.iter().filter(|r| !r.solved()).count();
        for metric in [Metric::Inequity, Metric::Effectiveness] {
            let values = metric_values(records, f, metric);
            let excluded = mine.len() - failed - values.len();
            let s = stats(&values);
            // lower inequity and higher effectiveness are better
            let (best, worst) = match (s, metric) {
                (Some(s), Metric::Inequity) => (Some(s.min), Some(s.max)),
                (Some(s), Metric::Effectiveness) => (Some(s.max), Some(s.min)),
                (None, _) => (None, None),
            };
            w.write_record([
                f.label().to_string(),
                metric.as_str().to_string(),
                values.len().to_string(),
                failed.to_string(),
                excluded.to_string(),
                fmt_opt(s.map(|s| s.mean)),
                fmt_opt(s.map(|s| s.sd)),
                fmt_opt(s.and_then(|s| s.cov_pct)),
                fmt_opt(best),
                fmt_opt(worst),
            ])?;
        }
    }
    w.flush()?;

    write_benefit(&files.benefit_inequity, &benefit_matrix(records, Metric::Inequity))?;
    write_benefit(&files.benefit_effectiveness, &benefit_matrix(records, Metric::Effectiveness))?;
    Ok(files)
}

/// Per-formulation counts of failed solves and degenerate realizations.
pub fn disclosure(records: &[EvalRecord]) -> BTreeMap<String, (usize, usize)> {
    formulations_of(records)
        .into_iter()
        .map(|f| {
            let mine = records.iter().filter(|r| r.formulation == f);
            let failed = mine.clone().filter(|r| !r.solved()).count();
            let degenerate = mine.filter(|r| r.solved() && r.g_star.is_none()).count();
            (f.label().to_string(), (failed, degenerate))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::derive_demands;
    use crate::solver::HighsSolver;
    use proptest::prelude::*;

    fn pairwise(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let mut s = 0.0;
        for a in x {
            for b in x {
                s += (a - b).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn constant_cells_are_never_resampled() {
        let d = vec![
            vec![vec![0, 5, 3]],
            vec![vec![0, 5, 9]],
        ];
        let t = DemandTable::from_demands(vec!["a".into(), "b".into()], vec![0.5, 0.5], d);
        for r in sample_realizations(&t, 200, 3, false) {
            assert_eq!(r.d[0][0], 0);
            assert_eq!(r.d[0][1], 5);
            assert!((3..=9).contains(&r.d[0][2]));
            assert_eq!(r.positive_areas, vec![1, 2]);
            let total: f64 = r.u.iter().flatten().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_sampling_hits_both_endpoints() {
        let d = vec![vec![vec![1]], vec![vec![3]]];
        let t = DemandTable::from_demands(vec!["a".into(), "b".into()], vec![0.5, 0.5], d);
        let seen: std::collections::BTreeSet<u64> =
            sample_realizations(&t, 300, 11, false).iter().map(|r| r.d[0][0]).collect();
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let inst = fixtures::serrana();
        let demand = derive_demands(&inst);
        let a = sample_realizations(&demand, 100, 42, false);
        assert_eq!(a, sample_realizations(&demand, 100, 42, false));
        assert_ne!(a, sample_realizations(&demand, 100, 43, false));
        let range = demand_range(&demand);
        for r in &a {
            for (row, lim) in r.d.iter().zip(&range) {
                for (&x, &(lo, hi)) in row.iter().zip(lim) {
                    assert!(lo <= x && x <= hi);
                }
            }
        }
        assert_eq!(a[0].id, "r001");
        for r in sample_realizations(&demand, 20, 42, true) {
            for (row, lim) in r.d.iter().zip(&range) {
                for (&x, &(lo, hi)) in row.iter().zip(lim) {
                    assert!(lo <= x && x <= hi);
                }
            }
        }
    }

    #[test]
    fn posthoc_gini_examples() {
        assert!(posthoc_gini(&[0.2, 0.2, 0.2]).unwrap().abs() < 1e-12);
        assert!((posthoc_gini(&[0.0, 0.0, 0.9]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((posthoc_gini(&[0.4, 0.1, 0.3, 0.2]).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(posthoc_gini(&[0.0, 0.0]), None);
        assert_eq!(posthoc_gini(&[]), None);
    }

    proptest! {
        #[test]
        fn posthoc_gini_matches_lorenz_and_pairwise(x in prop::collection::vec(0.0f64..1.0, 1..12)) {
            prop_assume!(x.iter().sum::<f64>() > 1e-6);
            let g = posthoc_gini(&x).unwrap();
            prop_assert!((g - lorenz_gini(&x).unwrap()).abs() < 1e-9);
            prop_assert!((g - pairwise(&x)).abs() < 1e-9);
        }
    }

    #[test]
    fn stats_examples() {
        assert!(stats(&[]).is_none());
        let s = stats(&[0.4]).unwrap();
        assert_eq!((s.mean, s.sd, s.cov_pct), (0.4, 0.0, Some(0.0)));
        let s = stats(&[0.1827, 0.7873, 0.2420, 0.2813, 0.1935, 0.2404]).unwrap();
        assert!((s.cov_pct.unwrap() - 71.96).abs() < 0.05, "{s:?}");
    }

    #[test]
    fn benefit_cells() {
        let m = BenefitMatrix::from_deltas(
            Metric::Inequity,
            vec![Formulation::Sp, Formulation::Gini, Formulation::Gmd],
            vec![Some(0.5), Some(0.25), Some(0.0)],
        );
        assert_eq!(m.cell(Formulation::Sp, Formulation::Gini), Some(-50.0));
        assert_eq!(m.cell(Formulation::Gini, Formulation::Sp), Some(100.0));
        assert_eq!(m.cell(Formulation::Sp, Formulation::Sp), Some(0.0));
        assert_eq!(m.cell(Formulation::Gmd, Formulation::Sp), None);
        assert_eq!(m.cell(Formulation::Gmd, Formulation::Gmd), None);
        let eq = BenefitMatrix::from_deltas(
            Metric::Effectiveness,
            vec![Formulation::Sp, Formulation::Gmd],
            vec![Some(0.3), Some(0.3)],
        );
        assert_eq!(eq.cells[0][1], Some(0.0));
    }

    #[test]
    fn histogram_edges() {
        let h = histogram(&[0.0, 0.049, 0.05, 1.0, 0.999], 0.05);
        assert_eq!(h.len(), 20);
        assert_eq!(h[0].2, 2);
        assert_eq!(h[1].2, 1);
        assert_eq!(h[19].2, 2);
    }

    #[test]
    fn empty_report_has_headers() {
        let dir = tempfile::tempdir().unwrap();
        let files = summarize(&[], dir.path()).unwrap();
        let scatter = std::fs::read_to_string(&files.scatter).unwrap();
        assert_eq!(scatter.trim(), "formulation,realization,U_star,G_star,status,gap");
        let summary = std::fs::read_to_string(&files.summary).unwrap();
        assert_eq!(summary.lines().count(), 1);
        assert_eq!(std::fs::read_to_string(&files.benefit_inequity).unwrap().trim(), "inequity");
    }

    fn tiny_realizations() -> (Instance, Vec<Realization>) {
        let inst = fixtures::tiny();
        let demand = derive_demands(&inst);
        (inst, sample_realizations(&demand, 4, 5, false))
    }

    #[test]
    fn empty_plan_covers_nothing() {
        let (inst, reals) = tiny_realizations();
        let plan = FirstStage::empty(&inst);
        for f in Formulation::ALL {
            let recs = evaluate(&HighsSolver, &inst, f, &plan, &reals, &EvalOptions::default());
            for r in recs {
                assert!(r.solved(), "{f}: {:?}", r.messages);
                assert_eq!(r.u_star, Some(0.0));
                assert_eq!(r.g_star, None);
            }
        }
    }

    #[test]
    fn evaluation_identities_on_tiny() {
        let (inst, reals) = tiny_realizations();
        let demand = derive_demands(&inst);
        let opts = EvalOptions::default();
        for f in Formulation::ALL {
            let plan = solve_plan(
                &HighsSolver,
                None,
                &inst,
                &demand,
                f,
                &opts.formulation,
                &SolveParams::default(),
            )
            .unwrap();
            let recs = evaluate(&HighsSolver, &inst, f, &plan.first_stage, &reals, &opts);
            assert_eq!(recs.len(), reals.len());
            for (rec, real) in recs.iter().zip(&reals) {
                assert_eq!(rec.realization, real.id);
                assert!(rec.solved());
                let x = rec.ranked_input();
                if let Some(g) = rec.g_star {
                    assert!((g - lorenz_gini(&x).unwrap()).abs() < 1e-9);
                }
                let sum_positive: f64 = x.iter().sum();
                assert!((rec.u_star.unwrap() - sum_positive).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn full_cover_gives_zero_gini() {
        // one area with demand, fully stocked: coverage is complete
        let inst = fixtures::tiny();
        let demand = derive_demands(&inst);
        let plan = solve_plan(
            &HighsSolver,
            None,
            &inst,
            &demand,
            Formulation::Sp,
            &FormulationConfig::default(),
            &SolveParams::default(),
        )
        .unwrap();
        let real = Realization::from_demands("solo".into(), vec![vec![0, 4]]);
        let recs = evaluate(&HighsSolver, &inst, Formulation::Sp, &plan.first_stage, &[real], &EvalOptions::default());
        assert!(recs[0].g_star.unwrap().abs() < 1e-12);
        assert!((recs[0].u_star.unwrap() - 1.0).abs() < 1e-9);
    }
}
