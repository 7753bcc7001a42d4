//! Deterministic-equivalent MILPs of the two-stage location-allocation
//! problem under four objectives.
//!
//! Variable naming is stable so solutions can be diffed across runs:
//!
//! | name              | meaning                                             |
//! |-------------------|-----------------------------------------------------|
//! | `Y(size,loc)`     | facility of `size` opened at `loc` (binary)         |
//! | `P(item,loc)`     | units of `item` prepositioned at `loc`              |
//! | `X(item,area,loc,scen)` | fraction of `area`'s `item` demand served from `loc` |
//! | `O(ent,j,scen)`   | rank entity `ent` holds rank `j` (binary)           |
//! | `Z(j,scen)`       | coverage of the `j`-th ranked entity                |
//! | `HL(scen)`, `HU(scen)` | lowest / highest coverage bounds               |
//! | `t(a,a2,scen)`    | pairwise absolute difference (GMD)                  |
//!
//! Rank entities are area ids for the Gini model and `c1..ck` for clusters.

mod ir;
pub mod lp;
pub mod mps;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use ir::{Cmp, Constraint, ModelIR, Objective, Sense, VarId, VarKind, Variable};

use crate::cluster::Clustering;
use crate::error::ModelError;
use crate::instance::{derive_shipping_costs, DemandTable, Instance};
use crate::lorenz::{compute_gini, rank_coverages, rank_weight, CoverageVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formulation {
    Sp,
    Gmd,
    Gini,
    #[serde(rename = "ginic")]
    GiniC,
}

impl Formulation {
    pub const ALL: [Formulation; 4] = [
        Formulation::Sp,
        Formulation::Gmd,
        Formulation::Gini,
        Formulation::GiniC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::Sp => "sp",
            Formulation::Gmd => "gmd",
            Formulation::Gini => "gini",
            Formulation::GiniC => "ginic",
        }
    }

    /// Display label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Formulation::Sp => "SP",
            Formulation::Gmd => "GMD",
            Formulation::Gini => "Gini",
            Formulation::GiniC => "GiniC",
        }
    }

    pub fn uses_ranking(self) -> bool {
        matches!(self, Formulation::Gini | Formulation::GiniC)
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formulation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sp" => Ok(Formulation::Sp),
            "gmd" => Ok(Formulation::Gmd),
            "gini" => Ok(Formulation::Gini),
            "ginic" => Ok(Formulation::GiniC),
            other => Err(format!("unknown formulation {other:?} (expected sp, gmd, gini, ginic)")),
        }
    }
}

/// Variable handles of the part shared by every formulation.
#[derive(Debug, Clone)]
pub struct CommonVars {
    /// One per facility option, in instance order.
    pub y: Vec<VarId>,
    /// `[r][loc]`, `loc` indexing [`Instance::location_indices`].
    pub p: Vec<Vec<VarId>>,
    /// `[s][r][a][loc]`
    pub x: Vec<Vec<Vec<Vec<VarId>>>>,
}

impl CommonVars {
    /// Recovers the handles from a model built by [`build_common`].
    pub fn lookup(model: &ModelIR, inst: &Instance, demand: &DemandTable) -> Result<Self, ModelError> {
        let locs = inst.location_indices();
        let y = inst
            .facility_options
            .iter()
            .map(|o| model.try_var(&y_name(&o.size, &o.location)))
            .collect::<Result<_, _>>()?;
        let p = inst
            .relief_items
            .iter()
            .map(|item| {
                locs.iter()
                    .map(|&n| model.try_var(&p_name(&item.id, &inst.areas[n].id)))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        let x = (0..demand.n_scenarios())
            .map(|s| {
                inst.relief_items
                    .iter()
                    .map(|item| {
                        inst.areas
                            .iter()
                            .map(|area| {
                                locs.iter()
                                    .map(|&n| {
                                        model.try_var(&x_name(
                                            &item.id,
                                            &area.id,
                                            &inst.areas[n].id,
                                            demand.scenario_id(s),
                                        ))
                                    })
                                    .collect::<Result<_, _>>()
                            })
                            .collect::<Result<_, _>>()
                    })
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(CommonVars { y, p, x })
    }

    /// `sum_{r,n} u_ras X_rans`: demand coverage of area `a` in scenario `s`.
    pub fn coverage_terms(&self, demand: &DemandTable, a: usize, s: usize) -> Vec<(VarId, f64)> {
        let mut terms = Vec::new();
        for r in 0..demand.n_items() {
            let u = demand.u(r, a, s);
            if u > 0.0 {
                terms.extend(self.x[s][r][a].iter().map(|&v| (v, u)));
            }
        }
        terms
    }

    /// `U_s = sum_{r,a,n} u_ras X_rans`.
    pub fn effectiveness_terms(&self, demand: &DemandTable, s: usize) -> Vec<(VarId, f64)> {
        (0..demand.n_areas())
            .flat_map(|a| self.coverage_terms(demand, a, s))
            .collect()
    }
}

pub fn y_name(size: &str, loc: &str) -> String {
    format!("Y({size},{loc})")
}
pub fn p_name(item: &str, loc: &str) -> String {
    format!("P({item},{loc})")
}
pub fn x_name(item: &str, area: &str, loc: &str, scen: &str) -> String {
    format!("X({item},{area},{loc},{scen})")
}
pub fn z_name(j: usize, scen: &str) -> String {
    format!("Z({j},{scen})")
}
pub fn o_name(entity: &str, j: usize, scen: &str) -> String {
    format!("O({entity},{j},{scen})")
}

/// First- and second-stage constraints shared by all four formulations.
pub fn build_common(inst: &Instance, demand: &DemandTable, name: &str) -> (ModelIR, CommonVars) {
    let mut m = ModelIR::new(name, Sense::Maximize);
    let locs = inst.location_indices();
    let ship = derive_shipping_costs(inst);
    let area_id = |a: usize| inst.areas[a].id.as_str();

    let y: Vec<VarId> = inst
        .facility_options
        .iter()
        .map(|o| m.add_var(y_name(&o.size, &o.location), VarKind::Binary, 0.0, 1.0))
        .collect();
    let p: Vec<Vec<VarId>> = inst
        .relief_items
        .iter()
        .map(|item| {
            locs.iter()
                .map(|&n| {
                    m.add_var(
                        p_name(&item.id, area_id(n)),
                        VarKind::Continuous,
                        0.0,
                        f64::INFINITY,
                    )
                })
                .collect()
        })
        .collect();
    let x: Vec<Vec<Vec<Vec<VarId>>>> = (0..demand.n_scenarios())
        .map(|s| {
            inst.relief_items
                .iter()
                .map(|item| {
                    (0..inst.areas.len())
                        .map(|a| {
                            locs.iter()
                                .map(|&n| {
                                    m.add_var(
                                        x_name(&item.id, area_id(a), area_id(n), demand.scenario_id(s)),
                                        VarKind::Continuous,
                                        0.0,
                                        1.0,
                                    )
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let options_at = |n: usize| {
        inst.facility_options
            .iter()
            .enumerate()
            .filter(move |(_, o)| o.location == inst.areas[n].id)
    };

    for (li, &n) in locs.iter().enumerate() {
        let loc = area_id(n);
        // storage only where a facility is open
        let mut terms: Vec<(VarId, f64)> = inst
            .relief_items
            .iter()
            .enumerate()
            .map(|(r, item)| (p[r][li], item.volume_m3))
            .collect();
        terms.extend(options_at(n).map(|(i, o)| (y[i], -o.capacity_m3)));
        m.add_constraint(format!("storage({loc})"), terms, Cmp::Le, 0.0);

        // minimum prepositioning at every opened site
        let mut terms: Vec<(VarId, f64)> = (0..inst.relief_items.len()).map(|r| (p[r][li], 1.0)).collect();
        terms.extend(options_at(n).map(|(i, _)| (y[i], -inst.min_preposition)));
        m.add_constraint(format!("minprep({loc})"), terms, Cmp::Ge, 0.0);

        let terms: Vec<(VarId, f64)> = options_at(n).map(|(i, _)| (y[i], 1.0)).collect();
        m.add_constraint(format!("onesize({loc})"), terms, Cmp::Le, 1.0);
    }

    for (r, item) in inst.relief_items.iter().enumerate() {
        let terms = p[r].iter().map(|&v| (v, 1.0)).collect();
        m.add_constraint(format!("maxprep({})", item.id), terms, Cmp::Le, item.max_preposition);
    }

    let mut terms = Vec::new();
    for (r, item) in inst.relief_items.iter().enumerate() {
        for (li, &n) in locs.iter().enumerate() {
            terms.push((p[r][li], item.unit_prep_cost.at(area_id(n))));
        }
    }
    for (i, o) in inst.facility_options.iter().enumerate() {
        terms.push((y[i], o.fixed_cost));
    }
    m.add_constraint("budget1", terms, Cmp::Le, inst.budgets.first_stage);

    for s in 0..demand.n_scenarios() {
        let sid = demand.scenario_id(s);
        for (r, item) in inst.relief_items.iter().enumerate() {
            for (li, &n) in locs.iter().enumerate() {
                let mut terms: Vec<(VarId, f64)> = (0..inst.areas.len())
                    .map(|a| (x[s][r][a][li], demand.d(r, a, s) as f64))
                    .collect();
                terms.push((p[r][li], -1.0));
                m.add_constraint(format!("stock({},{},{sid})", item.id, area_id(n)), terms, Cmp::Le, 0.0);
            }
            for a in 0..inst.areas.len() {
                let terms = x[s][r][a].iter().map(|&v| (v, 1.0)).collect();
                m.add_constraint(format!("cover({},{},{sid})", item.id, area_id(a)), terms, Cmp::Le, 1.0);
            }
        }
        let mut terms = Vec::new();
        for (r, item) in inst.relief_items.iter().enumerate() {
            let load = item.volume_m3 / inst.vehicle.capacity_m3;
            for a in 0..inst.areas.len() {
                let d = demand.d(r, a, s) as f64;
                for (li, &n) in locs.iter().enumerate() {
                    let c = ship[a][n] * load * d;
                    if c != 0.0 {
                        terms.push((x[s][r][a][li], c));
                    }
                }
            }
        }
        m.add_constraint(format!("budget2({sid})"), terms, Cmp::Le, inst.budgets.second_stage);
    }

    (m, CommonVars { y, p, x })
}

/// Maximizes expected effectiveness only.
pub fn build_sp(inst: &Instance, demand: &DemandTable) -> ModelIR {
    let (mut m, vars) = build_common(inst, demand, "sp");
    let mut obj = Vec::new();
    for s in 0..demand.n_scenarios() {
        let pi = demand.probability(s);
        obj.extend(vars.effectiveness_terms(demand, s).into_iter().map(|(v, c)| (v, pi * c)));
    }
    m.set_objective(Sense::Maximize, obj);
    m
}

/// Share of scenario demand at each area: `rho[s][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmdProportions {
    pub rho: Vec<Vec<f64>>,
}

impl GmdProportions {
    pub fn new(demand: &DemandTable) -> Self {
        let rho = (0..demand.n_scenarios())
            .map(|s| {
                let shares: Vec<f64> = (0..demand.n_areas()).map(|a| demand.area_share(a, s)).collect();
                let total: f64 = shares.iter().sum();
                shares
                    .iter()
                    .map(|x| if total > 0.0 { x / total } else { 0.0 })
                    .collect()
            })
            .collect();
        GmdProportions { rho }
    }
}

/// Effectiveness minus the linearized pairwise mean difference.
pub fn build_gmd(inst: &Instance, demand: &DemandTable) -> ModelIR {
    let (mut m, vars) = build_common(inst, demand, "gmd");
    let rho = GmdProportions::new(demand).rho;
    let mut obj = Vec::new();
    for s in 0..demand.n_scenarios() {
        let sid = demand.scenario_id(s).to_string();
        let pi = demand.probability(s);
        obj.extend(vars.effectiveness_terms(demand, s).into_iter().map(|(v, c)| (v, pi * c)));
        let cov: Vec<Vec<(VarId, f64)>> = (0..inst.areas.len()).map(|a| vars.coverage_terms(demand, a, s)).collect();
        for a in 0..inst.areas.len() {
            for b in a + 1..inst.areas.len() {
                let (ida, idb) = (&inst.areas[a].id, &inst.areas[b].id);
                let t = m.add_var(format!("t({ida},{idb},{sid})"), VarKind::Continuous, 0.0, f64::INFINITY);
                // t >= rho_a cov_b - rho_b cov_a and its mirror
                let diff: Vec<(VarId, f64)> = cov[b]
                    .iter()
                    .map(|&(v, c)| (v, rho[s][a] * c))
                    .chain(cov[a].iter().map(|&(v, c)| (v, -rho[s][b] * c)))
                    .collect();
                let mut up = vec![(t, 1.0)];
                up.extend(diff.iter().map(|&(v, c)| (v, -c)));
                m.add_constraint(format!("gmdp({ida},{idb},{sid})"), up, Cmp::Ge, 0.0);
                let mut dn = vec![(t, 1.0)];
                dn.extend(diff.iter().copied());
                m.add_constraint(format!("gmdn({ida},{idb},{sid})"), dn, Cmp::Ge, 0.0);
                obj.push((t, -pi));
            }
        }
    }
    m.set_objective(Sense::Maximize, obj);
    m
}

/// Adds the ranking block of one scenario over `entities` (label, coverage)
/// and returns the objective terms `(1/n)(2n+1-2j) pi Z_j`.
fn add_rank_block(
    m: &mut ModelIR,
    sid: &str,
    pi: f64,
    entities: &[(String, Vec<(VarId, f64)>)],
) -> Vec<(VarId, f64)> {
    let n = entities.len();
    if n == 0 {
        return Vec::new();
    }
    let z: Vec<VarId> = (1..=n)
        .map(|j| m.add_var(z_name(j, sid), VarKind::Continuous, 0.0, 1.0))
        .collect();
    let o: Vec<Vec<VarId>> = entities
        .iter()
        .map(|(label, _)| {
            (1..=n)
                .map(|j| m.add_var(o_name(label, j, sid), VarKind::Binary, 0.0, 1.0))
                .collect()
        })
        .collect();
    for (e, (label, _)) in entities.iter().enumerate() {
        let terms = o[e].iter().map(|&v| (v, 1.0)).collect();
        m.add_constraint(format!("rank_ent({label},{sid})"), terms, Cmp::Eq, 1.0);
    }
    for j in 0..n {
        let terms = (0..n).map(|e| (o[e][j], 1.0)).collect();
        m.add_constraint(format!("rank_pos({},{sid})", j + 1), terms, Cmp::Eq, 1.0);
    }
    for (e, (label, cov)) in entities.iter().enumerate() {
        for j in 0..n {
            // Z_j - cov + O <= 1
            let mut up = vec![(z[j], 1.0), (o[e][j], 1.0)];
            up.extend(cov.iter().map(|&(v, c)| (v, -c)));
            m.add_constraint(format!("zub({label},{},{sid})", j + 1), up, Cmp::Le, 1.0);
            // Z_j - cov - O >= -1
            let mut lo = vec![(z[j], 1.0), (o[e][j], -1.0)];
            lo.extend(cov.iter().map(|&(v, c)| (v, -c)));
            m.add_constraint(format!("zlb({label},{},{sid})", j + 1), lo, Cmp::Ge, -1.0);
        }
    }
    for j in 0..n.saturating_sub(1) {
        m.add_constraint(
            format!("chain({},{sid})", j + 1),
            vec![(z[j], 1.0), (z[j + 1], -1.0)],
            Cmp::Le,
            0.0,
        );
    }
    (0..n).map(|j| (z[j], pi * rank_weight(n, j + 1))).collect()
}

/// The ranking block alone over fixed coverages `cov(e)`, one per entity,
/// with the rank-weighted objective. Its optimal `Z` is `coverages` sorted
/// ascending.
pub fn build_ranking(coverages: &[f64]) -> ModelIR {
    let mut m = ModelIR::new("ranking", Sense::Maximize);
    let entities: Vec<(String, Vec<(VarId, f64)>)> = coverages
        .iter()
        .enumerate()
        .map(|(e, &c)| {
            let label = format!("e{}", e + 1);
            let v = m.add_var(format!("cov({label})"), VarKind::Continuous, c, c);
            (label, vec![(v, 1.0)])
        })
        .collect();
    let obj = add_rank_block(&mut m, "fixed", 1.0, &entities);
    m.set_objective(Sense::Maximize, obj);
    m
}

/// Exact Lorenz-curve Gini: maximizes `sum_s pi_s U_s (1 - G_s)` through
/// ranked coverages of the positive-demand areas.
pub fn build_gini(inst: &Instance, demand: &DemandTable) -> ModelIR {
    let (mut m, vars) = build_common(inst, demand, "gini");
    let mut obj = Vec::new();
    for s in 0..demand.n_scenarios() {
        let entities: Vec<(String, Vec<(VarId, f64)>)> = demand
            .positive_areas(s)
            .iter()
            .map(|&a| (inst.areas[a].id.clone(), vars.coverage_terms(demand, a, s)))
            .collect();
        obj.extend(add_rank_block(&mut m, demand.scenario_id(s), demand.probability(s), &entities));
    }
    m.set_objective(Sense::Maximize, obj);
    m
}

/// Adds the upper-bounding Lorenz inequality of every scenario to a model
/// produced by [`build_gini`]:
/// `sum_j (2n+1-2j) Z_j <= n U + (n-1)(HL - HU)` with
/// `HL <= coverage_a <= HU` for every positive-demand area.
pub fn add_valid_inequality(
    model: &ModelIR,
    inst: &Instance,
    demand: &DemandTable,
) -> Result<ModelIR, ModelError> {
    let vars = CommonVars::lookup(model, inst, demand)?;
    let mut m = model.clone();
    for s in 0..demand.n_scenarios() {
        let areas = demand.positive_areas(s);
        let n = areas.len();
        if n == 0 {
            continue;
        }
        let sid = demand.scenario_id(s);
        let hl = m.add_var(format!("HL({sid})"), VarKind::Continuous, 0.0, 1.0);
        let hu = m.add_var(format!("HU({sid})"), VarKind::Continuous, 0.0, 1.0);
        let mut u_terms = Vec::new();
        for &a in areas {
            let cov = vars.coverage_terms(demand, a, s);
            let id = &inst.areas[a].id;
            let mut lo = vec![(hl, 1.0)];
            lo.extend(cov.iter().map(|&(v, c)| (v, -c)));
            m.add_constraint(format!("hl({id},{sid})"), lo, Cmp::Le, 0.0);
            let mut hi = vec![(hu, 1.0)];
            hi.extend(cov.iter().map(|&(v, c)| (v, -c)));
            m.add_constraint(format!("hu({id},{sid})"), hi, Cmp::Ge, 0.0);
            u_terms.extend(cov);
        }
        let nf = n as f64;
        let mut terms: Vec<(VarId, f64)> = (1..=n)
            .map(|j| Ok((m.try_var(&z_name(j, sid))?, (2 * n + 1 - 2 * j) as f64)))
            .collect::<Result<_, ModelError>>()?;
        terms.extend(u_terms.into_iter().map(|(v, c)| (v, -nf * c)));
        terms.push((hl, -(nf - 1.0)));
        terms.push((hu, nf - 1.0));
        m.add_constraint(format!("vi({sid})"), terms, Cmp::Le, 0.0);
    }
    Ok(m)
}

/// Lorenz-curve Gini over a priori clusters of areas.
pub fn build_ginic(
    inst: &Instance,
    demand: &DemandTable,
    clusterings: &[Clustering],
) -> Result<ModelIR, ModelError> {
    let (mut m, vars) = build_common(inst, demand, "ginic");
    let mut obj = Vec::new();
    for s in 0..demand.n_scenarios() {
        let sid = demand.scenario_id(s);
        let positive = demand.positive_areas(s);
        if positive.is_empty() {
            continue;
        }
        let clustering = clusterings
            .iter()
            .find(|c| c.scenario == sid)
            .ok_or_else(|| ModelError::MissingClustering(sid.to_string()))?;
        if !clustering.partitions(positive) {
            return Err(ModelError::BadClustering {
                scenario: sid.to_string(),
            });
        }
        let entities: Vec<(String, Vec<(VarId, f64)>)> = clustering
            .members()
            .iter()
            .enumerate()
            .map(|(w, members)| {
                let cov = members
                    .iter()
                    .flat_map(|&a| vars.coverage_terms(demand, a, s))
                    .collect();
                (format!("c{}", w + 1), cov)
            })
            .collect();
        obj.extend(add_rank_block(&mut m, sid, demand.probability(s), &entities));
    }
    m.set_objective(Sense::Maximize, obj);
    Ok(m)
}

/// Options selecting the variant of a formulation.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Adds the upper-bounding Lorenz inequality to the Gini model.
    pub valid_inequality: bool,
    /// Required for [`Formulation::GiniC`].
    pub clusterings: Option<Vec<Clustering>>,
}

pub fn build(
    formulation: Formulation,
    inst: &Instance,
    demand: &DemandTable,
    options: &BuildOptions,
) -> Result<ModelIR, ModelError> {
    match formulation {
        Formulation::Sp => Ok(build_sp(inst, demand)),
        Formulation::Gmd => Ok(build_gmd(inst, demand)),
        Formulation::Gini => {
            let m = build_gini(inst, demand);
            if options.valid_inequality {
                add_valid_inequality(&m, inst, demand)
            } else {
                Ok(m)
            }
        }
        Formulation::GiniC => {
            let clusterings = options
                .clusterings
                .as_deref()
                .ok_or_else(|| ModelError::MissingClustering(demand.scenario_id(0).to_string()))?;
            build_ginic(inst, demand, clusterings)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilityDecision {
    pub location: String,
    pub size: String,
    pub open: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockDecision {
    pub item: String,
    pub location: String,
    pub quantity: f64,
}

/// Here-and-now decisions: which facilities open and how much is stocked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstStage {
    pub facilities: Vec<FacilityDecision>,
    pub stock: Vec<StockDecision>,
}

impl FirstStage {
    /// Reads `Y` and `P` from solution values; `Y` is rounded, `P` clipped at 0.
    pub fn from_values(inst: &Instance, values: &BTreeMap<String, f64>) -> Result<Self, ModelError> {
        let get = |name: String| {
            values
                .get(&name)
                .copied()
                .ok_or(ModelError::UnknownVariable(name))
        };
        let facilities = inst
            .facility_options
            .iter()
            .map(|o| {
                Ok(FacilityDecision {
                    location: o.location.clone(),
                    size: o.size.clone(),
                    open: get(y_name(&o.size, &o.location))? > 0.5,
                })
            })
            .collect::<Result<_, ModelError>>()?;
        let mut stock = Vec::new();
        for item in &inst.relief_items {
            for n in inst.location_indices() {
                let loc = &inst.areas[n].id;
                stock.push(StockDecision {
                    item: item.id.clone(),
                    location: loc.clone(),
                    quantity: get(p_name(&item.id, loc))?.max(0.0),
                });
            }
        }
        Ok(FirstStage { facilities, stock })
    }

    /// All facilities closed, nothing stocked.
    pub fn empty(inst: &Instance) -> Self {
        FirstStage {
            facilities: inst
                .facility_options
                .iter()
                .map(|o| FacilityDecision {
                    location: o.location.clone(),
                    size: o.size.clone(),
                    open: false,
                })
                .collect(),
            stock: inst
                .relief_items
                .iter()
                .flat_map(|item| {
                    inst.location_indices().into_iter().map(move |n| StockDecision {
                        item: item.id.clone(),
                        location: inst.areas[n].id.clone(),
                        quantity: 0.0,
                    })
                })
                .collect(),
        }
    }

    pub fn open_locations(&self) -> Vec<&str> {
        self.facilities
            .iter()
            .filter(|f| f.open)
            .map(|f| f.location.as_str())
            .collect()
    }

    pub fn total_stock(&self) -> f64 {
        self.stock.iter().map(|s| s.quantity).sum()
    }
}

/// Copy of `model` with `Y` and `P` bounded to the given plan.
pub fn fix_first_stage(model: &ModelIR, fs: &FirstStage) -> Result<ModelIR, ModelError> {
    let mut m = model.clone();
    for f in &fs.facilities {
        let id = m
            .var_id(&y_name(&f.size, &f.location))
            .ok_or_else(|| ModelError::FirstStageShape(format!("no facility ({}, {})", f.location, f.size)))?;
        m.fix(id, if f.open { 1.0 } else { 0.0 });
    }
    for st in &fs.stock {
        let id = m
            .var_id(&p_name(&st.item, &st.location))
            .ok_or_else(|| ModelError::FirstStageShape(format!("no stock ({}, {})", st.item, st.location)))?;
        m.fix(id, st.quantity);
    }
    let expected_y = m.count_prefix("Y(");
    let expected_p = m.count_prefix("P(");
    if fs.facilities.len() != expected_y || fs.stock.len() != expected_p {
        return Err(ModelError::FirstStageShape(format!(
            "plan has {} facilities and {} stock entries, model has {expected_y} and {expected_p}",
            fs.facilities.len(),
            fs.stock.len()
        )));
    }
    Ok(m)
}

/// Post-hoc metrics of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioMetrics {
    pub scenario: String,
    /// Coverage per area, in area order; zero outside the positive set.
    pub coverage: Vec<f64>,
    pub effectiveness: f64,
    /// `None` when no demand is covered.
    pub gini: Option<f64>,
}

/// Coverage of every area per scenario, read from `X` values.
pub fn coverages(
    inst: &Instance,
    demand: &DemandTable,
    values: &BTreeMap<String, f64>,
) -> Vec<Vec<f64>> {
    let locs = inst.location_indices();
    (0..demand.n_scenarios())
        .map(|s| {
            let sid = demand.scenario_id(s);
            (0..inst.areas.len())
                .map(|a| {
                    let mut acc = 0.0;
                    for (r, item) in inst.relief_items.iter().enumerate() {
                        let u = demand.u(r, a, s);
                        if u == 0.0 {
                            continue;
                        }
                        for &n in &locs {
                            let x = values
                                .get(&x_name(&item.id, &inst.areas[a].id, &inst.areas[n].id, sid))
                                .copied()
                                .unwrap_or(0.0);
                            acc += u * x;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Effectiveness and Lorenz Gini of every scenario of a solution.
pub fn extract_metrics(
    inst: &Instance,
    demand: &DemandTable,
    values: &BTreeMap<String, f64>,
) -> Vec<ScenarioMetrics> {
    coverages(inst, demand, values)
        .into_iter()
        .enumerate()
        .map(|(s, coverage)| {
            let positive = demand.positive_areas(s);
            let effectiveness: f64 = coverage.iter().sum();
            let gini = if positive.is_empty() {
                None
            } else {
                let v = CoverageVector::new(
                    positive.iter().map(|&a| coverage[a].max(0.0)).collect(),
                    positive.iter().map(|&a| inst.areas[a].id.clone()).collect(),
                )
                .expect("non-empty, nonnegative");
                compute_gini(&rank_coverages(&v)).ok().map(|g| g.gini)
            };
            ScenarioMetrics {
                scenario: demand.scenario_id(s).to_string(),
                coverage,
                effectiveness,
                gini,
            }
        })
        .collect()
}
