//! Bundled instances.

use std::path::PathBuf;

use crate::instance::Instance;

pub const SERRANA_JSON: &str = include_str!("../data/serrana.json");
pub const TINY_JSON: &str = include_str!("../data/tiny.json");

/// On-disk location of the bundled case study.
pub fn serrana_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/serrana.json")
}

pub fn tiny_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/tiny.json")
}

pub fn serrana() -> Instance {
    Instance::from_json_str(SERRANA_JSON).expect("bundled serrana.json parses")
}

pub fn tiny() -> Instance {
    Instance::from_json_str(TINY_JSON).expect("bundled tiny.json parses")
}

/// Resolves a bundled fixture by file name (`serrana.json`, `tiny.json`).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "serrana.json" | "serrana" => Some(SERRANA_JSON),
        "tiny.json" | "tiny" => Some(TINY_JSON),
        _ => None,
    }
}

/// Small random instance for property tests and benchmarks: every area is a
/// candidate location with two facility sizes, two relief items and
/// equiprobable scenarios. Deterministic in `seed`.
pub fn random_instance(seed: u64, n_areas: usize, n_scenarios: usize) -> Instance {
    use std::collections::BTreeMap;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::instance::{
        Area, Budgets, FacilityOption, PrepCost, ReliefItem, Scenario, Vehicle,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let areas: Vec<Area> = (0..n_areas)
        .map(|a| Area {
            id: format!("a{a}"),
            name: format!("Area {a}"),
        })
        .collect();
    let mut facility_options = Vec::new();
    for (size, cap, cost) in [("large", 12.0, 120.0), ("small", 5.0, 60.0)] {
        for area in &areas {
            facility_options.push(FacilityOption {
                location: area.id.clone(),
                size: size.to_string(),
                capacity_m3: cap * rng.gen_range(0.8..1.2),
                fixed_cost: (cost * rng.gen_range(0.8..1.2_f64)).round(),
            });
        }
    }
    let relief_items = ["water", "food"]
        .iter()
        .map(|id| ReliefItem {
            id: id.to_string(),
            length_days: rng.gen_range(1..=3),
            coverage_people: rng.gen_range(1..=4),
            volume_m3: rng.gen_range(0.05..0.3),
            max_preposition: rng.gen_range(20..=80) as f64,
            unit_prep_cost: PrepCost::Uniform(1.0),
        })
        .collect();
    let mut distances_km = vec![vec![0.0; n_areas]; n_areas];
    for a in 0..n_areas {
        for b in a + 1..n_areas {
            let d = rng.gen_range(1..=40) as f64;
            distances_km[a][b] = d;
            distances_km[b][a] = d;
        }
    }
    let scenarios = (0..n_scenarios)
        .map(|s| Scenario {
            id: format!("s{s}"),
            probability: 1.0 / n_scenarios as f64,
            victims: areas
                .iter()
                .map(|a| {
                    let v = if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=20) };
                    (a.id.clone(), v)
                })
                .collect::<BTreeMap<_, _>>(),
        })
        .collect();
    Instance {
        name: format!("random-{seed}"),
        areas,
        locations: None,
        facility_options,
        relief_items,
        vehicle: Vehicle {
            capacity_m3: 10.0,
            fuel_cost_per_litre: 2.0,
            km_per_litre: 1.0,
        },
        scenarios,
        distances_km,
        budgets: Budgets {
            first_stage: rng.gen_range(150..=300) as f64,
            second_stage: rng.gen_range(5..=30) as f64,
        },
        min_preposition: 1.0,
        clusters_k: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::validate_instance;

    #[test]
    fn bundled_fixtures_validate() {
        assert!(validate_instance(&serrana()).is_empty());
        assert!(validate_instance(&tiny()).is_empty());
        assert!(bundled("serrana").is_some());
        assert!(bundled("nope.json").is_none());
    }

    #[test]
    fn random_instances_validate() {
        for seed in 0..20 {
            let inst = random_instance(seed, 2 + seed as usize % 6, 1 + seed as usize % 3);
            assert_eq!(validate_instance(&inst), vec![], "seed {seed}");
            assert_eq!(inst, random_instance(seed, 2 + seed as usize % 6, 1 + seed as usize % 3));
        }
    }
}
