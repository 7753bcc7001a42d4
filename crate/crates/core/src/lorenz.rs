//! Lorenz curves and Gini coefficients of fixed coverage vectors.
//!
//! The curve over `n` groups is the piecewise-linear interpolation of the
//! points `(j/n, C_j / U)` where `C_j` is the sum of the `j` smallest
//! coverages and `U` the total. The Gini coefficient is twice the area between
//! that curve and the diagonal, integrated exactly as a sum of trapezoids.

use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use crate::error::LorenzError;

/// Per-group demand coverage together with the group labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageVector {
    values: Vec<f64>,
    labels: Vec<String>,
}

impl CoverageVector {
    pub fn new(values: Vec<f64>, labels: Vec<String>) -> Result<Self, LorenzError> {
        if values.is_empty() {
            return Err(LorenzError::Empty);
        }
        if labels.len() != values.len() {
            return Err(LorenzError::LengthMismatch {
                labels: labels.len(),
                values: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(LorenzError::Negative { index, value });
        }
        Ok(CoverageVector { values, labels })
    }

    /// Labels the values `g000`, `g001`, ... so that label order matches
    /// position order.
    pub fn unlabeled(values: Vec<f64>) -> Result<Self, LorenzError> {
        let labels = (0..values.len()).map(|i| format!("g{i:03}")).collect();
        Self::new(values, labels)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzCurve {
    /// Coverages in ascending order.
    pub sorted: Vec<f64>,
    pub sorted_labels: Vec<String>,
    /// `L(j/n)` for `j = 0..=n`; `None` when the total is zero.
    pub cumulative_shares: Option<Vec<f64>>,
    pub total: f64,
}

impl LorenzCurve {
    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.cumulative_shares.is_none()
    }

    /// `(p, L(p))` breakpoints, empty for a degenerate curve.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let n = self.n() as f64;
        self.cumulative_shares
            .as_ref()
            .map(|shares| {
                shares
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| (j as f64 / n, l))
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Writes the breakpoints as `p,share` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "share"])?;
        for (p, l) in self.breakpoints() {
            w.write_record([p.to_string(), l.to_string()])?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniResult {
    pub gini: f64,
    pub effectiveness: f64,
    /// `effectiveness * (1 - gini)`.
    pub objective: f64,
}

/// Sorts coverages ascending (ties by label) and accumulates the curve.
pub fn rank_coverages(c: &CoverageVector) -> LorenzCurve {
    let mut order: Vec<usize> = (0..c.values.len()).collect();
    order.sort_by(|&i, &j| {
        c.values[i]
            .partial_cmp(&c.values[j])
            .unwrap_or(Ordering::Equal)
            .then_with(|| c.labels[i].cmp(&c.labels[j]))
    });
    let sorted: Vec<f64> = order.iter().map(|&i| c.values[i]).collect();
    let sorted_labels = order.iter().map(|&i| c.labels[i].clone()).collect();
    let total: f64 = sorted.iter().sum();
    let cumulative_shares = (total > 0.0).then(|| {
        let mut acc = 0.0;
        let mut shares = Vec::with_capacity(sorted.len() + 1);
        shares.push(0.0);
        for (j, z) in sorted.iter().enumerate() {
            acc += z;
            shares.push(if j + 1 == sorted.len() { 1.0 } else { acc / total });
        }
        shares
    });
    LorenzCurve {
        sorted,
        sorted_labels,
        cumulative_shares,
        total,
    }
}

/// Gini coefficient as one minus twice the trapezoid area under the curve.
pub fn compute_gini(curve: &LorenzCurve) -> Result<GiniResult, LorenzError> {
    if curve.total <= 0.0 || curve.n() == 0 {
        return Err(LorenzError::Degenerate);
    }
    let n = curve.n() as f64;
    let u = curve.total;
    // Sum over trapezoids of (C_{j-1} + C_j), with C_0 = 0.
    let mut prev = 0.0;
    let mut acc = 0.0;
    let mut area = 0.0;
    for z in &curve.sorted {
        acc += z;
        area += prev + acc;
        prev = acc;
    }
    let gini = (1.0 - area / (n * u)).max(0.0);
    Ok(GiniResult {
        gini,
        effectiveness: u,
        objective: u * (1.0 - gini),
    })
}

/// `U (1 - G)` written as a weighted sum of the ranked coverages:
/// `sum_j (2n + 1 - 2j) Z_j / n`.
pub fn objective_closed_form(curve: &LorenzCurve) -> f64 {
    let n = curve.n();
    if n == 0 {
        return 0.0;
    }
    curve
        .sorted
        .iter()
        .enumerate()
        .map(|(idx, z)| rank_weight(n, idx + 1) * z)
        .sum()
}

/// Objective weight of rank `j` (1-based) among `n` groups.
pub fn rank_weight(n: usize, j: usize) -> f64 {
    (2 * n + 1 - 2 * j) as f64 / n as f64
}

/// Pairwise Gini mean difference with group proportions:
/// `(1/U) sum_{a<a'} |rho_a cov_a' - rho_a' cov_a|`.
pub fn mean_difference_gini(c: &CoverageVector, proportions: &[f64]) -> Result<f64, LorenzError> {
    if proportions.len() != c.values.len() {
        return Err(LorenzError::LengthMismatch {
            labels: proportions.len(),
            values: c.values.len(),
        });
    }
    let sum: f64 = proportions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(LorenzError::Proportions(sum));
    }
    let u = c.total();
    if u <= 0.0 {
        return Err(LorenzError::Degenerate);
    }
    let v = &c.values;
    let mut acc = 0.0;
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            acc += (proportions[a] * v[b] - proportions[b] * v[a]).abs();
        }
    }
    Ok(acc / u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    /// Brute-force mean absolute difference over all ordered pairs.
    fn pairwise_gini(x: &[f64]) -> f64 {
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

    fn curve(values: &[f64]) -> LorenzCurve {
        rank_coverages(&CoverageVector::unlabeled(values.to_vec()).unwrap())
    }

    #[test]
    fn ranks_and_accumulates() {
        let c = curve(&[0.4, 0.1, 0.3, 0.2]);
        assert_eq!(c.sorted, vec![0.1, 0.2, 0.3, 0.4]);
        let expect = [0.0, 0.1, 0.3, 0.6, 1.0];
        for (got, want) in c.cumulative_shares.unwrap().iter().zip(expect) {
            assert!((got - want).abs() < TOL);
        }
    }

    #[test]
    fn equal_vector_is_the_diagonal() {
        let c = curve(&[0.7, 0.7, 0.7]);
        let expect = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        for (got, want) in c.cumulative_shares.unwrap().iter().zip(expect) {
            assert!((got - want).abs() < TOL);
        }
    }

    #[test]
    fn singleton_curve() {
        let c = curve(&[0.3]);
        assert_eq!(c.cumulative_shares.unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn ties_follow_label_order() {
        let c = rank_coverages(
            &CoverageVector::new(
                vec![0.5, 0.5, 0.1],
                vec!["zeta".into(), "alpha".into(), "mid".into()],
            )
            .unwrap(),
        );
        assert_eq!(c.sorted_labels, vec!["mid", "alpha", "zeta"]);
    }

    #[test]
    fn all_zero_is_degenerate() {
        let c = curve(&[0.0, 0.0]);
        assert!(c.is_degenerate());
        assert_eq!(compute_gini(&c), Err(LorenzError::Degenerate));
        assert_eq!(objective_closed_form(&c), 0.0);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert_eq!(CoverageVector::unlabeled(vec![]), Err(LorenzError::Empty));
        assert!(matches!(
            CoverageVector::unlabeled(vec![0.1, -0.2]),
            Err(LorenzError::Negative { index: 1, .. })
        ));
    }

    #[test]
    fn quarter_gini_matches_pairwise() {
        let g = compute_gini(&curve(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        assert!((g.gini - 0.25).abs() < TOL);
        assert!((pairwise_gini(&[0.1, 0.2, 0.3, 0.4]) - 0.25).abs() < TOL);
        assert!((g.effectiveness - 1.0).abs() < TOL);
        assert!((g.objective - 0.75).abs() < TOL);
    }

    #[test]
    fn equity_and_single_owner_extremes() {
        let g = compute_gini(&curve(&[0.2; 4])).unwrap();
        assert!(g.gini.abs() < TOL);
        let g = compute_gini(&curve(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        assert!((g.gini - 0.75).abs() < TOL);
    }

    #[test]
    fn closed_form_examples() {
        let u = 0.9;
        let c = curve(&[u / 3.0; 3]);
        assert!((objective_closed_form(&c) - u).abs() < TOL);
        assert!((objective_closed_form(&curve(&[0.1, 0.2, 0.3, 0.4])) - 0.75).abs() < TOL);
        assert_eq!(objective_closed_form(&curve(&[0.0; 5])), 0.0);
    }

    #[test]
    fn mean_difference_examples() {
        let c = CoverageVector::unlabeled(vec![0.0, 1.0]).unwrap();
        assert!((mean_difference_gini(&c, &[0.5, 0.5]).unwrap() - 0.5).abs() < TOL);
        let c = CoverageVector::unlabeled(vec![0.3, 0.3, 0.3]).unwrap();
        let third = 1.0 / 3.0;
        assert!(mean_difference_gini(&c, &[third; 3]).unwrap().abs() < TOL);
        assert!(matches!(
            mean_difference_gini(&c, &[0.5, 0.2, 0.2]),
            Err(LorenzError::Proportions(_))
        ));
    }

    #[test]
    fn breakpoint_csv_has_header() {
        let mut buf = Vec::new();
        curve(&[0.1, 0.3]).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p,share\n0,0\n"));
        assert_eq!(text.lines().count(), 4);
    }

    fn coverages() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 1..30)
            .prop_filter("positive total", |v| v.iter().sum::<f64>() > 1e-6)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matches_pairwise_oracle(v in coverages()) {
            let g = compute_gini(&curve(&v)).unwrap();
            prop_assert!((g.gini - pairwise_gini(&v)).abs() < TOL);
        }

        #[test]
        fn closed_form_identity(v in coverages()) {
            let c = curve(&v);
            let g = compute_gini(&c).unwrap();
            prop_assert!((objective_closed_form(&c) - g.effectiveness * (1.0 - g.gini)).abs() < TOL);
            prop_assert!((g.objective - g.effectiveness * (1.0 - g.gini)).abs() < TOL);
        }

        #[test]
        fn scale_invariant(v in coverages(), k in 0.01f64..100.0) {
            let g1 = compute_gini(&curve(&v)).unwrap().gini;
            let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
            let g2 = compute_gini(&curve(&scaled)).unwrap().gini;
            prop_assert!((g1 - g2).abs() < TOL);
        }

        #[test]
        fn permutation_invariant(v in coverages(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut w = v.clone();
            w.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = compute_gini(&curve(&v)).unwrap();
            let b = compute_gini(&curve(&w)).unwrap();
            prop_assert!((a.gini - b.gini).abs() < TOL);
            prop_assert!((a.effectiveness - b.effectiveness).abs() < TOL);
        }

        #[test]
        fn range_and_shape(v in coverages()) {
            let c = curve(&v);
            let n = c.n() as f64;
            let g = compute_gini(&c).unwrap().gini;
            prop_assert!(g >= 0.0 && g <= 1.0 - 1.0 / n + TOL);
            let shares = c.cumulative_shares.clone().unwrap();
            prop_assert!((shares[c.n()] - 1.0).abs() < TOL);
            for j in 0..c.n() {
                prop_assert!(shares[j + 1] + TOL >= shares[j]);
                prop_assert!(shares[j] <= j as f64 / n + TOL);
                let prev = if j > 0 { c.sorted[j - 1] } else { 0.0 };
                prop_assert!(c.sorted[j] >= prev);
            }
        }

        #[test]
        fn pigou_dalton(v in prop::collection::vec(0.0f64..1.0, 2..20), pick in any::<(usize, usize)>(), frac in 0.01f64..0.49) {
            let mut s = v.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let (a, b) = (pick.0 % s.len(), pick.1 % s.len());
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assume!(s[hi] > s[lo] + 1e-6);
            // keep the transfer rank-preserving: stay within neighbouring values
            let below_hi = s.iter().filter(|&&x| x < s[hi]).cloned().fold(f64::MIN, f64::max);
            let above_lo = s.iter().filter(|&&x| x > s[lo]).cloned().fold(f64::MAX, f64::min);
            let room = (s[hi] - below_hi).min(above_lo - s[lo]);
            let eps = frac * room;
            prop_assume!(eps > 1e-9);
            let before = compute_gini(&curve(&s)).unwrap().gini;
            let mut t = s.clone();
            t[hi] -= eps;
            t[lo] += eps;
            let after = compute_gini(&curve(&t)).unwrap().gini;
            prop_assert!(after < before);
        }
    }
}
