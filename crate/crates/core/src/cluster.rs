//! One-dimensional k-means over per-area demand shares, used to build the
//! cluster-based Lorenz curve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ClusterError;
use crate::instance::DemandTable;

/// Restarts per cluster count when scanning for the elbow.
pub const ELBOW_RESTARTS: usize = 10;
/// Upper end of the elbow scan before clipping to the number of points.
pub const DEFAULT_K_MAX: usize = 8;

const MAX_ITERATIONS: usize = 200;

/// Partition of one scenario's positive-demand areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub scenario: String,
    pub k: usize,
    /// Area indices, parallel to `assignment`.
    pub areas: Vec<usize>,
    /// Cluster index in `0..k` of each area, clusters ordered by centroid.
    pub assignment: Vec<usize>,
    /// Within-cluster sum of squares for `k = 1, 2, ...` when an elbow scan
    /// produced this clustering.
    #[serde(default)]
    pub wss_by_k: Vec<f64>,
}

impl Clustering {
    /// Area indices of each cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (&a, &w) in self.areas.iter().zip(&self.assignment) {
            out[w].push(a);
        }
        out
    }

    /// One singleton cluster per area, in area order.
    pub fn singletons(scenario: &str, areas: &[usize]) -> Clustering {
        Clustering {
            scenario: scenario.to_string(),
            k: areas.len(),
            areas: areas.to_vec(),
            assignment: (0..areas.len()).collect(),
            wss_by_k: Vec::new(),
        }
    }

    /// True when every cluster is non-empty and the areas are exactly `expected`.
    pub fn partitions(&self, expected: &[usize]) -> bool {
        let mut a = self.areas.clone();
        a.sort_unstable();
        let mut b = expected.to_vec();
        b.sort_unstable();
        a == b
            && self.assignment.len() == self.areas.len()
            && self.assignment.iter().all(|&w| w < self.k)
            && self.members().iter().all(|m| !m.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KmeansFit {
    pub assignment: Vec<usize>,
    pub centroids: Vec<f64>,
    pub wss: f64,
}

/// Lloyd's algorithm with k-means++ seeding, deterministic in `seed`.
/// Clusters are relabelled by ascending centroid.
pub fn kmeans(points: &[f64], k: usize, seed: u64) -> Result<KmeansFit, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if k > points.len() {
        return Err(ClusterError::TooManyClusters {
            k,
            points: points.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_plus_plus(points, k, &mut rng);
    let mut assignment = vec![usize::MAX; points.len()];

    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<usize> = points.iter().map(|&x| nearest(&centroids, x)).collect();
        repair_empty(points, &centroids, &mut next, k);
        let changed = next != assignment;
        assignment = next;
        centroids = means(points, &assignment, k);
        if !changed {
            break;
        }
    }

    // relabel by centroid so cluster order is canonical
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]).then(a.cmp(&b)));
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    let assignment: Vec<usize> = assignment.iter().map(|&w| relabel[w]).collect();
    let centroids: Vec<f64> = order.iter().map(|&w| centroids[w]).collect();
    let wss = points
        .iter()
        .zip(&assignment)
        .map(|(x, &w)| (x - centroids[w]).powi(2))
        .sum();
    Ok(KmeansFit {
        assignment,
        centroids,
        wss,
    })
}

/// Best of `restarts` runs of [`kmeans`] by within-cluster sum of squares.
pub fn kmeans_best(
    points: &[f64],
    k: usize,
    seed: u64,
    restarts: usize,
) -> Result<KmeansFit, ClusterError> {
    let mut best: Option<KmeansFit> = None;
    for i in 0..restarts.max(1) {
        let fit = kmeans(points, k, seed.wrapping_add(i as u64 * 0x9E37_79B9))?;
        if best.as_ref().is_none_or(|b| fit.wss < b.wss - 1e-15) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn seed_plus_plus(points: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut chosen = vec![rng.gen_range(0..points.len())];
    while chosen.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if chosen.contains(&i) {
                    0.0
                } else {
                    chosen
                        .iter()
                        .map(|&c| (x - points[c]).powi(2))
                        .fold(f64::INFINITY, f64::min)
                }
            })
            .collect();
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut idx = d2.len() - 1;
            for (i, w) in d2.iter().enumerate() {
                if *w > 0.0 && target < *w {
                    idx = i;
                    break;
                }
                target -= w;
            }
            if chosen.contains(&idx) {
                (0..points.len()).rev().find(|i| !chosen.contains(i)).unwrap()
            } else {
                idx
            }
        } else {
            // every remaining point coincides with a centre
            let free: Vec<usize> = (0..points.len()).filter(|i| !chosen.contains(i)).collect();
            free[rng.gen_range(0..free.len())]
        };
        chosen.push(pick);
    }
    chosen.iter().map(|&i| points[i]).collect()
}

fn nearest(centroids: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (w, c) in centroids.iter().enumerate() {
        if (x - c).abs() < (x - centroids[best]).abs() {
            best = w;
        }
    }
    best
}

/// Moves points into empty clusters: each empty cluster takes the point
/// farthest from its centroid among clusters with more than one member.
fn repair_empty(points: &[f64], centroids: &[f64], assignment: &mut [usize], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &w in assignment.iter() {
            sizes[w] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut donor: Option<(usize, f64)> = None;
        for (i, &w) in assignment.iter().enumerate() {
            if sizes[w] > 1 {
                let d = (points[i] - centroids[w]).abs();
                if donor.is_none_or(|(_, bd)| d >= bd) {
                    donor = Some((i, d));
                }
            }
        }
        let (i, _) = donor.expect("k <= number of points");
        assignment[i] = empty;
    }
}

fn means(points: &[f64], assignment: &[usize], k: usize) -> Vec<f64> {
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (x, &w) in points.iter().zip(assignment) {
        sum[w] += x;
        count[w] += 1;
    }
    sum.iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect()
}

/// Chooses `k` at the point of maximal curvature of the WSS scree curve.
/// Returns the selected `k` and `WSS(1..=k_max)`.
pub fn elbow_select_k(points: &[f64], k_max: usize, seed: u64) -> (usize, Vec<f64>) {
    let k_max = k_max.min(points.len()).max(1.min(points.len()));
    let wss: Vec<f64> = (1..=k_max)
        .map(|k| {
            kmeans_best(points, k, seed, ELBOW_RESTARTS)
                .map(|f| f.wss)
                .unwrap_or(0.0)
        })
        .collect();
    if points.len() <= 2 || wss.first().is_none_or(|&w| w <= 1e-15) {
        return (1, wss);
    }
    // wss[k-1] is WSS(k)
    let mut best_k = 1;
    let mut best_curv = 0.0;
    for k in 2..k_max {
        let curv = wss[k - 2] - 2.0 * wss[k - 1] + wss[k];
        if curv > best_curv + 1e-15 {
            best_curv = curv;
            best_k = k;
        }
    }
    (best_k, wss)
}

/// Feature of each positive-demand area: its share of total scenario demand.
pub fn scenario_features(demand: &DemandTable, s: usize) -> (Vec<usize>, Vec<f64>) {
    let areas = demand.positive_areas(s).to_vec();
    let features = areas.iter().map(|&a| demand.area_share(a, s)).collect();
    (areas, features)
}

/// Clusters one scenario with a fixed `k`, or by elbow selection when `k` is
/// `None`. A scenario without positive demand yields an empty clustering.
pub fn cluster_scenario(
    demand: &DemandTable,
    s: usize,
    k: Option<usize>,
    seed: u64,
) -> Result<Clustering, ClusterError> {
    let (areas, features) = scenario_features(demand, s);
    let scenario = demand.scenario_id(s).to_string();
    if areas.is_empty() {
        return Ok(Clustering {
            scenario,
            k: 0,
            areas,
            assignment: Vec::new(),
            wss_by_k: Vec::new(),
        });
    }
    let (k, wss_by_k) = match k {
        Some(k) => (k, Vec::new()),
        None => elbow_select_k(&features, DEFAULT_K_MAX, seed),
    };
    let fit = kmeans_best(&features, k, seed, ELBOW_RESTARTS)?;
    Ok(Clustering {
        scenario,
        k,
        areas,
        assignment: fit.assignment,
        wss_by_k,
    })
}

/// Clusters every scenario. `ks`, when given, fixes `k` per scenario.
pub fn cluster_all(
    demand: &DemandTable,
    ks: Option<&[usize]>,
    seed: u64,
) -> Result<Vec<Clustering>, ClusterError> {
    (0..demand.n_scenarios())
        .map(|s| cluster_scenario(demand, s, ks.map(|ks| ks[s]), seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::derive_demands;
    use proptest::prelude::*;

    #[test]
    fn separates_two_groups() {
        let fit = kmeans(&[0.1, 0.1, 0.9], 2, 7).unwrap();
        assert_eq!(fit.assignment, vec![0, 0, 1]);
        assert!(fit.wss.abs() < 1e-12);
    }

    #[test]
    fn k_equal_to_points_gives_singletons() {
        for pts in [vec![0.3, 0.1, 0.2], vec![0.1, 0.1, 0.9]] {
            let fit = kmeans(&pts, 3, 1).unwrap();
            let mut a = fit.assignment.clone();
            a.sort_unstable();
            assert_eq!(a, vec![0, 1, 2]);
        }
    }

    #[test]
    fn single_cluster() {
        let fit = kmeans(&[0.3, 0.1, 0.2], 1, 1).unwrap();
        assert_eq!(fit.assignment, vec![0, 0, 0]);
        assert!((fit.centroids[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn too_many_clusters() {
        assert_eq!(
            kmeans(&[0.1, 0.2], 3, 0),
            Err(ClusterError::TooManyClusters { k: 3, points: 2 })
        );
    }

    #[test]
    fn elbow_forced_cases() {
        assert_eq!(elbow_select_k(&[0.4], 8, 0).0, 1);
        assert_eq!(elbow_select_k(&[0.2, 0.2, 0.2, 0.2], 8, 0).0, 1);
        assert_eq!(elbow_select_k(&[0.1, 0.9], 8, 0).0, 1);
    }

    #[test]
    fn elbow_finds_three_groups() {
        // a dense middle group with one outlier on each side
        let pts = [0.02, 0.5, 0.49, 0.51, 0.5, 0.48, 0.52, 0.98];
        assert_eq!(elbow_select_k(&pts, 8, 3).0, 3);
    }

    #[test]
    fn published_cluster_counts_fit_the_fixture() {
        let inst = fixtures::serrana();
        let demand = derive_demands(&inst);
        let ks = inst.clusters_k.clone().unwrap();
        let clusters = cluster_all(&demand, Some(&ks), 11).unwrap();
        for (s, c) in clusters.iter().enumerate() {
            assert!(c.partitions(demand.positive_areas(s)));
            assert_eq!(c.k, ks[s]);
        }
    }

    #[test]
    fn elbow_on_case_study_is_reported() {
        // The published counts come from a visual elbow; report agreement only.
        let inst = fixtures::serrana();
        let demand = derive_demands(&inst);
        let published = inst.clusters_k.clone().unwrap();
        let found: Vec<usize> = cluster_all(&demand, None, 11)
            .unwrap()
            .iter()
            .map(|c| c.k)
            .collect();
        let agree = found.iter().zip(&published).filter(|(a, b)| a == b).count();
        eprintln!("elbow k = {found:?}\npublished = {published:?}\nagreement {agree}/18");
        assert_eq!(found.len(), 18);
    }

    proptest! {
        #[test]
        fn partition_and_contiguity(pts in prop::collection::vec(0.0f64..1.0, 1..15), k in 1usize..6, seed in any::<u64>()) {
            prop_assume!(k <= pts.len());
            let fit = kmeans(&pts, k, seed).unwrap();
            let mut seen = vec![false; k];
            for &w in &fit.assignment { seen[w] = true; }
            prop_assert!(seen.iter().all(|&b| b));
            // 1-D clusters are intervals that do not interleave
            for w in 0..k {
                for v in w + 1..k {
                    let max_w = pts.iter().zip(&fit.assignment).filter(|(_, &c)| c == w).map(|(x, _)| *x).fold(f64::MIN, f64::max);
                    let min_v = pts.iter().zip(&fit.assignment).filter(|(_, &c)| c == v).map(|(x, _)| *x).fold(f64::MAX, f64::min);
                    prop_assert!(max_w <= min_v);
                }
            }
        }

        #[test]
        fn deterministic(pts in prop::collection::vec(0.0f64..1.0, 1..15), k in 1usize..6, seed in any::<u64>()) {
            prop_assume!(k <= pts.len());
            prop_assert_eq!(kmeans(&pts, k, seed).unwrap(), kmeans(&pts, k, seed).unwrap());
        }

        #[test]
        fn wss_nonincreasing(pts in prop::collection::vec(0.0f64..1.0, 2..14), seed in any::<u64>()) {
            let (_, wss) = elbow_select_k(&pts, DEFAULT_K_MAX, seed);
            for w in wss.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", wss);
            }
        }
    }
}
