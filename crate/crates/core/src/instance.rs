//! Problem data: areas, candidate response facilities, relief items, disaster
//! scenarios and the parameters derived from them.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::InstanceError;

/// Tolerance on the scenario probability sum.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub id: String,
    #[serde(default)]
    pub name: String,
}

/// A facility of a given size that may be opened at a candidate location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacilityOption {
    pub location: String,
    pub size: String,
    pub capacity_m3: f64,
    pub fixed_cost: f64,
}

/// Unit prepositioning cost, either identical at every location or given
/// per location id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrepCost {
    Uniform(f64),
    PerLocation(BTreeMap<String, f64>),
}

impl PrepCost {
    pub fn at(&self, location: &str) -> f64 {
        match self {
            PrepCost::Uniform(c) => *c,
            PrepCost::PerLocation(m) => m.get(location).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliefItem {
    pub id: String,
    /// Days during which a victim must be supplied.
    pub length_days: u64,
    /// People served by one unit.
    pub coverage_people: u64,
    pub volume_m3: f64,
    pub max_preposition: f64,
    pub unit_prep_cost: PrepCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub capacity_m3: f64,
    pub fuel_cost_per_litre: f64,
    pub km_per_litre: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub probability: f64,
    /// Homeless and displaced people per area id.
    pub victims: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub first_stage: f64,
    pub second_stage: f64,
}

/// Immutable problem data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default)]
    pub name: String,
    pub areas: Vec<Area>,
    /// Candidate facility locations; defaults to every area.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locations: Option<Vec<String>>,
    pub facility_options: Vec<FacilityOption>,
    pub relief_items: Vec<ReliefItem>,
    pub vehicle: Vehicle,
    pub scenarios: Vec<Scenario>,
    /// Square matrix in area order.
    pub distances_km: Vec<Vec<f64>>,
    pub budgets: Budgets,
    pub min_preposition: f64,
    /// Optional number of clusters per scenario for the cluster-based model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters_k: Option<Vec<usize>>,
}

/// One invariant violation found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub field: String,
    pub message: String,
}

impl Finding {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl Instance {
    pub fn from_json_str(text: &str) -> Result<Instance, InstanceError> {
        serde_json::from_str(text).map_err(InstanceError::Parse)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn area_index(&self, id: &str) -> Option<usize> {
        self.areas.iter().position(|a| a.id == id)
    }

    /// Area indices of the candidate facility locations, in declaration order.
    pub fn location_indices(&self) -> Vec<usize> {
        match &self.locations {
            None => (0..self.areas.len()).collect(),
            Some(ids) => ids.iter().filter_map(|id| self.area_index(id)).collect(),
        }
    }

    /// Distinct facility size ids in order of first appearance.
    pub fn size_levels(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for option in &self.facility_options {
            if !seen.contains(&option.size) {
                seen.push(option.size.clone());
            }
        }
        seen
    }

    pub fn victims(&self, scenario: usize, area: usize) -> i64 {
        self.scenarios[scenario]
            .victims
            .get(&self.areas[area].id)
            .copied()
            .unwrap_or(0)
    }
}

/// Parses an instance file without checking invariants.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Instance::from_json_str(&text)
}

/// Parses and validates an instance file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let inst = parse_instance(path)?;
    let findings = validate_instance(&inst);
    if findings.is_empty() {
        Ok(inst)
    } else {
        Err(InstanceError::Invalid(findings))
    }
}

fn is_name_safe(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Checks every data invariant; returns one finding per violation.
pub fn validate_instance(inst: &Instance) -> Vec<Finding> {
    let mut out = Vec::new();

    if inst.areas.is_empty() {
        out.push(Finding::new("areas", "at least one area is required"));
    }
    let mut area_ids = HashSet::new();
    for (i, area) in inst.areas.iter().enumerate() {
        if !is_name_safe(&area.id) {
            out.push(Finding::new(
                format!("areas[{i}].id"),
                format!("id {:?} must be non-empty and use only [A-Za-z0-9_]", area.id),
            ));
        }
        if !area_ids.insert(area.id.as_str()) {
            out.push(Finding::new(
                format!("areas[{i}].id"),
                format!("duplicate area id {:?}", area.id),
            ));
        }
    }

    if let Some(locations) = &inst.locations {
        let mut seen = HashSet::new();
        for (i, loc) in locations.iter().enumerate() {
            if !area_ids.contains(loc.as_str()) {
                out.push(Finding::new(
                    format!("locations[{i}]"),
                    format!("location {loc:?} is not an area id"),
                ));
            }
            if !seen.insert(loc.as_str()) {
                out.push(Finding::new(
                    format!("locations[{i}]"),
                    format!("duplicate location {loc:?}"),
                ));
            }
        }
    }
    let location_ids: HashSet<&str> = match &inst.locations {
        Some(l) => l.iter().map(String::as_str).collect(),
        None => area_ids.clone(),
    };

    let mut pairs = HashSet::new();
    for (i, option) in inst.facility_options.iter().enumerate() {
        let field = format!("facility_options[{i}]");
        if !location_ids.contains(option.location.as_str()) {
            out.push(Finding::new(
                &field,
                format!("unknown location {:?}", option.location),
            ));
        }
        if !is_name_safe(&option.size) {
            out.push(Finding::new(
                &field,
                format!("size id {:?} must use only [A-Za-z0-9_]", option.size),
            ));
        }
        if !pairs.insert((option.location.as_str(), option.size.as_str())) {
            out.push(Finding::new(
                &field,
                format!(
                    "duplicate facility option ({}, {})",
                    option.location, option.size
                ),
            ));
        }
        if !(option.capacity_m3 > 0.0) || !option.capacity_m3.is_finite() {
            out.push(Finding::new(
                format!("{field}.capacity_m3"),
                format!(
                    "capacity of ({}, {}) must be positive, got {}",
                    option.location, option.size, option.capacity_m3
                ),
            ));
        }
        if !(option.fixed_cost >= 0.0) || !option.fixed_cost.is_finite() {
            out.push(Finding::new(
                format!("{field}.fixed_cost"),
                format!(
                    "fixed cost of ({}, {}) must be nonnegative, got {}",
                    option.location, option.size, option.fixed_cost
                ),
            ));
        }
    }

    if inst.relief_items.is_empty() {
        out.push(Finding::new("relief_items", "at least one relief item is required"));
    }
    let mut item_ids = HashSet::new();
    for (i, item) in inst.relief_items.iter().enumerate() {
        let field = format!("relief_items[{i}]");
        if !is_name_safe(&item.id) {
            out.push(Finding::new(
                format!("{field}.id"),
                format!("id {:?} must be non-empty and use only [A-Za-z0-9_]", item.id),
            ));
        }
        if !item_ids.insert(item.id.as_str()) {
            out.push(Finding::new(
                format!("{field}.id"),
                format!("duplicate relief item id {:?}", item.id),
            ));
        }
        if item.length_days == 0 {
            out.push(Finding::new(format!("{field}.length_days"), "must be positive"));
        }
        if item.coverage_people == 0 {
            out.push(Finding::new(format!("{field}.coverage_people"), "must be at least 1"));
        }
        if !(item.volume_m3 > 0.0) {
            out.push(Finding::new(format!("{field}.volume_m3"), "must be positive"));
        }
        if !(item.max_preposition >= 0.0) {
            out.push(Finding::new(format!("{field}.max_preposition"), "must be nonnegative"));
        }
        match &item.unit_prep_cost {
            PrepCost::Uniform(c) if !(*c >= 0.0) => out.push(Finding::new(
                format!("{field}.unit_prep_cost"),
                "must be nonnegative",
            )),
            PrepCost::PerLocation(m) => {
                for (loc, c) in m {
                    if !location_ids.contains(loc.as_str()) {
                        out.push(Finding::new(
                            format!("{field}.unit_prep_cost.{loc}"),
                            "unknown location",
                        ));
                    }
                    if !(*c >= 0.0) {
                        out.push(Finding::new(
                            format!("{field}.unit_prep_cost.{loc}"),
                            "must be nonnegative",
                        ));
                    }
                }
            }
            _ => {}
        }
    }

    let v = &inst.vehicle;
    for (name, value) in [
        ("capacity_m3", v.capacity_m3),
        ("fuel_cost_per_litre", v.fuel_cost_per_litre),
        ("km_per_litre", v.km_per_litre),
    ] {
        if !(value > 0.0) {
            out.push(Finding::new(
                format!("vehicle.{name}"),
                format!("must be strictly positive, got {value}"),
            ));
        }
    }

    if inst.scenarios.is_empty() {
        out.push(Finding::new("scenarios", "at least one scenario is required"));
    } else {
        let total: f64 = inst.scenarios.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            out.push(Finding::new(
                "scenarios",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
    }
    let mut scenario_ids = HashSet::new();
    for (i, scenario) in inst.scenarios.iter().enumerate() {
        let field = format!("scenarios[{i}]");
        if !is_name_safe(&scenario.id) {
            out.push(Finding::new(
                format!("{field}.id"),
                format!("id {:?} must be non-empty and use only [A-Za-z0-9_]", scenario.id),
            ));
        }
        if !scenario_ids.insert(scenario.id.as_str()) {
            out.push(Finding::new(
                format!("{field}.id"),
                format!("duplicate scenario id {:?}", scenario.id),
            ));
        }
        if !(scenario.probability > 0.0 && scenario.probability <= 1.0) {
            out.push(Finding::new(
                format!("{field}.probability"),
                format!("must lie in (0, 1], got {}", scenario.probability),
            ));
        }
        for area in &inst.areas {
            match scenario.victims.get(&area.id) {
                None => out.push(Finding::new(
                    format!("{field}.victims"),
                    format!("missing area {:?}", area.id),
                )),
                Some(&n) if n < 0 => out.push(Finding::new(
                    format!("{field}.victims.{}", area.id),
                    format!("must be nonnegative, got {n}"),
                )),
                _ => {}
            }
        }
        for key in scenario.victims.keys() {
            if !area_ids.contains(key.as_str()) {
                out.push(Finding::new(
                    format!("{field}.victims.{key}"),
                    "unknown area",
                ));
            }
        }
    }

    let n = inst.areas.len();
    if inst.distances_km.len() != n || inst.distances_km.iter().any(|row| row.len() != n) {
        out.push(Finding::new(
            "distances_km",
            format!("must be a {n}x{n} matrix in area order"),
        ));
    } else {
        for i in 0..n {
            if inst.distances_km[i][i] != 0.0 {
                out.push(Finding::new(
                    format!("distances_km[{i}][{i}]"),
                    "diagonal must be zero",
                ));
            }
            for j in 0..n {
                let d = inst.distances_km[i][j];
                if !(d >= 0.0) || !d.is_finite() {
                    out.push(Finding::new(
                        format!("distances_km[{i}][{j}]"),
                        format!("must be nonnegative, got {d}"),
                    ));
                }
                if j > i && d != inst.distances_km[j][i] {
                    out.push(Finding::new(
                        format!("distances_km[{i}][{j}]"),
                        format!("asymmetric: {d} vs {}", inst.distances_km[j][i]),
                    ));
                }
            }
        }
    }

    if !(inst.budgets.first_stage >= 0.0) {
        out.push(Finding::new("budgets.first_stage", "must be nonnegative"));
    }
    if !(inst.budgets.second_stage >= 0.0) {
        out.push(Finding::new("budgets.second_stage", "must be nonnegative"));
    }
    if !(inst.min_preposition >= 0.0) || inst.min_preposition.fract() != 0.0 {
        out.push(Finding::new(
            "min_preposition",
            "must be a nonnegative integer",
        ));
    }
    if let Some(ks) = &inst.clusters_k {
        if ks.len() != inst.scenarios.len() {
            out.push(Finding::new(
                "clusters_k",
                format!(
                    "expected one value per scenario ({}), got {}",
                    inst.scenarios.len(),
                    ks.len()
                ),
            ));
        }
    }

    out
}

/// Demands and demand shares per (item, area, scenario).
#[derive(Debug, Clone, PartialEq)]
pub struct DemandTable {
    scenario_ids: Vec<String>,
    probabilities: Vec<f64>,
    n_items: usize,
    n_areas: usize,
    /// `[s][r][a]`
    d: Vec<Vec<Vec<u64>>>,
    u: Vec<Vec<Vec<f64>>>,
    positive_areas: Vec<Vec<usize>>,
}

impl DemandTable {
    /// Builds a table from raw integer demands laid out as `[s][r][a]`.
    pub fn from_demands(
        scenario_ids: Vec<String>,
        probabilities: Vec<f64>,
        d: Vec<Vec<Vec<u64>>>,
    ) -> DemandTable {
        assert_eq!(scenario_ids.len(), d.len());
        assert_eq!(probabilities.len(), d.len());
        let n_items = d.first().map_or(0, Vec::len);
        let n_areas = d
            .first()
            .and_then(|s| s.first())
            .map_or(0, Vec::len);
        let mut u = Vec::with_capacity(d.len());
        let mut positive_areas = Vec::with_capacity(d.len());
        for scen in &d {
            let total: u64 = scen.iter().flatten().sum();
            let shares = scen
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&x| if total > 0 { x as f64 / total as f64 } else { 0.0 })
                        .collect()
                })
                .collect();
            u.push(shares);
            positive_areas.push(
                (0..n_areas)
                    .filter(|&a| scen.iter().any(|row| row[a] > 0))
                    .collect(),
            );
        }
        DemandTable {
            scenario_ids,
            probabilities,
            n_items,
            n_areas,
            d,
            u,
            positive_areas,
        }
    }

    pub fn n_scenarios(&self) -> usize {
        self.d.len()
    }
    pub fn n_items(&self) -> usize {
        self.n_items
    }
    pub fn n_areas(&self) -> usize {
        self.n_areas
    }
    pub fn scenario_id(&self, s: usize) -> &str {
        &self.scenario_ids[s]
    }
    pub fn scenario_ids(&self) -> &[String] {
        &self.scenario_ids
    }
    pub fn probability(&self, s: usize) -> f64 {
        self.probabilities[s]
    }
    pub fn d(&self, r: usize, a: usize, s: usize) -> u64 {
        self.d[s][r][a]
    }
    pub fn u(&self, r: usize, a: usize, s: usize) -> f64 {
        self.u[s][r][a]
    }
    /// Raw demands of one scenario, `[r][a]`.
    pub fn scenario_demands(&self, s: usize) -> &[Vec<u64>] {
        &self.d[s]
    }
    pub fn total_demand(&self, s: usize) -> u64 {
        self.d[s].iter().flatten().sum()
    }
    /// Areas with positive total demand in scenario `s`, ascending index.
    pub fn positive_areas(&self, s: usize) -> &[usize] {
        &self.positive_areas[s]
    }
    /// Share of total scenario demand located at area `a` (sum over items).
    pub fn area_share(&self, a: usize, s: usize) -> f64 {
        (0..self.n_items).map(|r| self.u[s][r][a]).sum()
    }
}

/// Integer demand from victims: `ceil(length / coverage * victims)`, computed
/// exactly in integers.
pub fn demand_units(item: &ReliefItem, victims: u64) -> u64 {
    let num = item.length_days as u128 * victims as u128;
    let den = item.coverage_people as u128;
    num.div_ceil(den) as u64
}

pub fn derive_demands(inst: &Instance) -> DemandTable {
    let d = (0..inst.scenarios.len())
        .map(|s| {
            inst.relief_items
                .iter()
                .map(|item| {
                    (0..inst.areas.len())
                        .map(|a| demand_units(item, inst.victims(s, a).max(0) as u64))
                        .collect()
                })
                .collect()
        })
        .collect();
    DemandTable::from_demands(
        inst.scenarios.iter().map(|s| s.id.clone()).collect(),
        inst.scenarios.iter().map(|s| s.probability).collect(),
        d,
    )
}

/// Per-trip shipping cost between two areas, in area order.
pub fn derive_shipping_costs(inst: &Instance) -> Vec<Vec<f64>> {
    let per_km = inst.vehicle.fuel_cost_per_litre / inst.vehicle.km_per_litre;
    inst.distances_km
        .iter()
        .map(|row| row.iter().map(|d| per_km * d).collect())
        .collect()
}

/// Lookup from area id to index.
pub fn area_lookup(inst: &Instance) -> HashMap<&str, usize> {
    inst.areas
        .iter()
        .enumerate()
        .map(|(i, a)| (a.id.as_str(), i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn serrana() -> Instance {
        fixtures::serrana()
    }

    #[test]
    fn serrana_loads_and_validates() {
        let inst = load_instance(fixtures::serrana_path()).unwrap();
        assert_eq!(inst.areas.len(), 13);
        assert_eq!(inst.scenarios.len(), 18);
        for s in &inst.scenarios {
            assert!((s.probability - 1.0 / 18.0).abs() < 1e-15);
        }
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn probability_sum_is_checked() {
        let mut inst = serrana();
        inst.scenarios.truncate(2);
        inst.scenarios[0].probability = 0.45;
        inst.scenarios[1].probability = 0.45;
        let findings = validate_instance(&inst);
        assert_eq!(findings.len(), 2, "{findings:?}");
        assert!(findings.iter().any(|f| f.field == "scenarios"));
    }

    #[test]
    fn empty_scenarios_rejected() {
        let mut inst = serrana();
        inst.scenarios.clear();
        let findings = validate_instance(&inst);
        assert!(findings.iter().any(|f| f.field == "scenarios"));
    }

    #[test]
    fn negative_capacity_names_the_option() {
        let mut inst = serrana();
        inst.facility_options[5].capacity_m3 = -3.0;
        let findings = validate_instance(&inst);
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].field, "facility_options[5].capacity_m3");
        assert!(findings[0].message.contains("very_large"));
    }

    #[test]
    fn duplicate_area_id_found_once() {
        let mut inst = serrana();
        inst.areas[1].id = "ter".into();
        let findings: Vec<_> = validate_instance(&inst)
            .into_iter()
            .filter(|f| f.message.contains("duplicate area"))
            .collect();
        assert_eq!(findings.len(), 1);
    }

    #[test]
    fn asymmetric_distance_rejected() {
        let mut inst = serrana();
        inst.distances_km[0][1] += 1.0;
        let findings = validate_instance(&inst);
        assert_eq!(findings.len(), 1);
        assert!(findings[0].message.contains("asymmetric"));
    }

    #[test]
    fn malformed_file_is_a_parse_error() {
        let err = Instance::from_json_str("{\"areas\": 3}").unwrap_err();
        assert!(matches!(err, InstanceError::Parse(_)));
    }

    #[test]
    fn water_and_food_demand_in_teresopolis_2001() {
        let inst = serrana();
        let demand = derive_demands(&inst);
        let ter = inst.area_index("ter").unwrap();
        let s2001 = inst.scenarios.iter().position(|s| s.id == "2001").unwrap();
        assert_eq!(inst.victims(s2001, ter), 10028);
        assert_eq!(demand.d(0, ter, s2001), 70196);
        assert_eq!(demand.d(1, ter, s2001), 2507);
    }

    #[test]
    fn ceil_rounds_up_fractional_demand() {
        let item = &serrana().relief_items[1];
        assert_eq!(demand_units(item, 1), 1);
        assert_eq!(demand_units(item, 5), 2);
        assert_eq!(demand_units(item, 0), 0);
    }

    #[test]
    fn year_2000_only_tres_rios() {
        let inst = serrana();
        let demand = derive_demands(&inst);
        let trr = inst.area_index("trr").unwrap();
        assert_eq!(demand.positive_areas(0), &[trr]);
    }

    #[test]
    fn shares_normalize_per_scenario() {
        let demand = derive_demands(&serrana());
        for s in 0..demand.n_scenarios() {
            let total: f64 = (0..demand.n_items())
                .flat_map(|r| (0..demand.n_areas()).map(move |a| (r, a)))
                .map(|(r, a)| demand.u(r, a, s))
                .sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn shipping_cost_teresopolis_petropolis() {
        let inst = serrana();
        let c = derive_shipping_costs(&inst);
        let ter = inst.area_index("ter").unwrap();
        let pet = inst.area_index("pet").unwrap();
        assert!((c[ter][pet] - 97.0736).abs() < 1e-6);
        for i in 0..c.len() {
            assert_eq!(c[i][i], 0.0);
            for j in 0..c.len() {
                assert_eq!(c[i][j], c[j][i]);
                assert!(c[i][j] >= 0.0);
            }
        }
    }

    #[test]
    fn blank_cells_are_zero() {
        let inst = serrana();
        let cor = inst.area_index("cor").unwrap();
        let s2011 = inst.scenarios.iter().position(|s| s.id == "2011").unwrap();
        assert_eq!(inst.victims(s2011, cor), 0);
        assert_eq!(derive_demands(&inst).positive_areas(s2011).len(), 12);
    }

    #[test]
    fn json_round_trip_preserves_instance() {
        let inst = serrana();
        let back = Instance::from_json_str(&inst.to_json_string()).unwrap();
        assert_eq!(inst, back);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn demand_zero_iff_no_victims(victims in 0u64..1_000_000, r in 0usize..6) {
                let item = &serrana().relief_items[r];
                let d = demand_units(item, victims);
                prop_assert_eq!(d == 0, victims == 0);
            }

            #[test]
            fn demand_monotone_in_victims(v in 0u64..1_000_000, extra in 0u64..1000, r in 0usize..6) {
                let item = &serrana().relief_items[r];
                prop_assert!(demand_units(item, v + extra) >= demand_units(item, v));
            }

            #[test]
            fn positive_set_matches_total_demand(raw in proptest::collection::vec(0u64..50, 6)) {
                // two items, three areas, one scenario
                let d = vec![vec![raw[0..3].to_vec(), raw[3..6].to_vec()]];
                let table = DemandTable::from_demands(vec!["s".into()], vec![1.0], d);
                for a in 0..3 {
                    let positive = raw[a] + raw[a + 3] > 0;
                    prop_assert_eq!(table.positive_areas(0).contains(&a), positive);
                }
                if raw.iter().sum::<u64>() > 0 {
                    let total: f64 = (0..2).flat_map(|r| (0..3).map(move |a| (r, a)))
                        .map(|(r, a)| table.u(r, a, 0)).sum();
                    prop_assert!((total - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
