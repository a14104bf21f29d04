//! Supporting statistics over per-function index values: pooled two-sample
//! t-tests and k-means clustering with a silhouette-chosen K and a
//! two-component PCA projection.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::seed;

const RESTARTS: usize = 10;
const MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectKind {
    Direct,
    Interaction,
}

impl EffectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EffectKind::Direct => "direct",
            EffectKind::Interaction => "interaction",
        }
    }
}

/// Index values of one (param, effect kind) across the problem suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectSample {
    pub param: String,
    pub kind: EffectKind,
    pub values: Vec<f64>,
}

impl EffectSample {
    pub fn label(&self) -> String {
        format!("{}:{}", self.param, self.kind.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub df: f64,
    /// Zero pooled variance with different means.
    pub infinite: bool,
}

/// Equal-variance two-sample t-test. Negative `t` means `b` has the larger mean.
pub fn pairwise_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    let (n1, n2) = (a.len(), b.len());
    if n1 < 2 || n2 < 2 {
        return Err(Error::InvalidInput(format!("t-test needs >= 2 values per sample, got {n1} and {n2}")));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("t-test samples must be finite".into()));
    }
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let (m1, m2) = (mean(a), mean(b));
    let ss = |x: &[f64], m: f64| x.iter().map(|v| (v - m).powi(2)).sum::<f64>();
    let df = (n1 + n2 - 2) as f64;
    let pooled = (ss(a, m1) + ss(b, m2)) / df;
    let diff = m1 - m2;
    if pooled == 0.0 {
        return Ok(if diff == 0.0 {
            TTest { t: 0.0, p: 1.0, df, infinite: false }
        } else {
            TTest { t: f64::INFINITY.copysign(diff), p: 0.0, df, infinite: true }
        });
    }
    let t = diff / (pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let p = beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0);
    Ok(TTest { t, p, df, infinite: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub assignments: Vec<usize>,
    pub k: usize,
    /// Mean silhouette per evaluated candidate K.
    pub silhouette_curve: Vec<(usize, f64)>,
    /// First two principal-component scores per item.
    pub projection: Vec<[f64; 2]>,
    /// Fraction of variance carried by each of the two components.
    pub explained: [f64; 2],
    /// All items identical: silhouette undefined, K forced to 2.
    pub degenerate: bool,
    pub inertia: f64,
}

/// k-means (10 k-means++ restarts per K, best inertia kept) over each
/// candidate K, choosing `K = max(2, argmax silhouette)`. Candidates below 2
/// or not below the item count are skipped.
pub fn kmeans_silhouette(items: &[Vec<f64>], candidates: &[usize], seed: u64) -> Result<ClusterResult> {
    let n = items.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("clustering needs >= 3 items, got {n}")));
    }
    let d = items[0].len();
    if d == 0 || items.iter().any(|x| x.len() != d || x.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput("cluster features must be finite and of equal width".into()));
    }
    let (projection, explained) = pca2(items);
    let degenerate = items.iter().all(|x| x == &items[0]);
    if degenerate {
        let (assignments, inertia) = best_kmeans(items, 2, seed);
        return Ok(ClusterResult {
            assignments,
            k: 2,
            silhouette_curve: Vec::new(),
            projection,
            explained,
            degenerate,
            inertia,
        });
    }

    let mut ks: Vec<usize> = candidates.iter().copied().filter(|&k| k >= 2 && k < n).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut curve = Vec::new();
    let mut fits = Vec::new();
    for &k in &ks {
        let (assign, inertia) = best_kmeans(items, k, seed::derive(seed, &[k as u64]));
        curve.push((k, silhouette(items, &assign, k)));
        fits.push((assign, inertia));
    }
    // ties resolve to the smallest K
    let best = curve.iter().enumerate().fold(None::<(usize, f64)>, |acc, (i, &(_, s))| match acc {
        Some((_, bs)) if bs >= s => acc,
        _ => Some((i, s)),
    });
    let (k, (assignments, inertia)) = match best {
        Some((i, _)) if ks[i] >= 2 => (ks[i], fits.swap_remove(i)),
        _ => (2, best_kmeans(items, 2, seed)),
    };
    Ok(ClusterResult { assignments, k, silhouette_curve: curve, projection, explained, degenerate, inertia })
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn best_kmeans(items: &[Vec<f64>], k: usize, seed: u64) -> (Vec<usize>, f64) {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for restart in 0..RESTARTS {
        let mut rng = seed::rng(seed::derive(seed, &[restart as u64]));
        let fit = lloyd(items, k, &mut rng);
        if best.as_ref().is_none_or(|b| fit.1 < b.1) {
            best = Some(fit);
        }
    }
    best.expect("at least one restart")
}

/// Lloyd iterations from a k-means++ start. Empty clusters are re-seeded
/// with the point farthest from its centroid.
fn lloyd(items: &[Vec<f64>], k: usize, rng: &mut seed::Rng) -> (Vec<usize>, f64) {
    let n = items.len();
    let d = items[0].len();
    let mut centers = vec![items[rng.random_range(0..n)].clone()];
    while centers.len() < k {
        let w: Vec<f64> =
            items.iter().map(|x| centers.iter().map(|c| dist2(x, c)).fold(f64::INFINITY, f64::min)).collect();
        let total: f64 = w.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            w.iter().position(|&wi| {
                u -= wi;
                u < 0.0
            })
            .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        centers.push(items[pick].clone());
    }
    let nearest = |x: &[f64], centers: &[Vec<f64>]| {
        (0..k).min_by(|&a, &b| dist2(x, &centers[a]).total_cmp(&dist2(x, &centers[b]))).expect("k >= 1")
    };
    let mut assign: Vec<usize> = items.iter().map(|x| nearest(x, &centers)).collect();
    for _ in 0..MAX_ITER {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (x, &a) in items.iter().zip(&assign) {
            counts[a] += 1;
            sums[a].iter_mut().zip(x).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(&items[a], &centers[assign[a]]).total_cmp(&dist2(&items[b], &centers[assign[b]]))
                    })
                    .expect("n >= 1");
                centers[c] = items[far].clone();
            }
        }
        let next: Vec<usize> = items.iter().map(|x| nearest(x, &centers)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    let inertia = items.iter().zip(&assign).map(|(x, &a)| dist2(x, &centers[a])).sum();
    (assign, inertia)
}

/// Mean silhouette (Euclidean); singleton clusters score 0.
pub fn silhouette(items: &[Vec<f64>], assign: &[usize], k: usize) -> f64 {
    let n = items.len();
    let sizes = (0..k).map(|c| assign.iter().filter(|&&a| a == c).count()).collect::<Vec<_>>();
    let mut total = 0.0;
    for i in 0..n {
        if sizes[assign[i]] <= 1 {
            continue;
        }
        let mut sum = vec![0.0; k];
        for j in 0..n {
            if j != i {
                sum[assign[j]] += dist2(&items[i], &items[j]).sqrt();
            }
        }
        let a = sum[assign[i]] / (sizes[assign[i]] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != assign[i] && sizes[c] > 0)
            .map(|c| sum[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let s = if !b.is_finite() || a.max(b) == 0.0 { 0.0 } else { (b - a) / a.max(b) };
        total += s;
    }
    total / n as f64
}

/// Scores on the top two principal components of the centered matrix. Each
/// component's largest-magnitude loading is made positive.
pub fn pca2(items: &[Vec<f64>]) -> (Vec<[f64; 2]>, [f64; 2]) {
    let n = items.len();
    let d = items[0].len();
    let x = DMatrix::from_fn(n, d, |i, j| items[i][j]);
    let means = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |i, j| x[(i, j)] - means[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
    let mut proj = vec![[0.0; 2]; n];
    let mut explained = [0.0; 2];
    for (c, &j) in order.iter().take(2).enumerate() {
        let mut v = eig.eigenvectors.column(j).into_owned();
        let lead = v.iter().copied().fold(0.0f64, |m, e| if e.abs() > m.abs() { e } else { m });
        if lead < 0.0 {
            v = -v;
        }
        let scores = &centered * v;
        for i in 0..n {
            proj[i][c] = scores[i];
        }
        explained[c] = if total > 0.0 { eig.eigenvalues[j].max(0.0) / total } else { 0.0 };
    }
    (proj, explained)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn ttest_hand_values() {
        let t = pairwise_ttest(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((t.t, t.p), (0.0, 1.0));
        let t = pairwise_ttest(&[0.0; 4], &[0.0; 4]).unwrap();
        assert_eq!((t.t, t.p, t.infinite), (0.0, 1.0, false));
        let t = pairwise_ttest(&[0.0; 4], &[1.0; 4]).unwrap();
        assert!(t.infinite && t.t < 0.0);
        let jitter = [0.0, 1e-9, -1e-9, 0.5e-9];
        let b: Vec<f64> = jitter.iter().map(|j| 1.0 + j).collect();
        let t = pairwise_ttest(&jitter, &b).unwrap();
        assert!(t.t < -1e6 && t.p < 1e-3);
        // scipy.stats.ttest_ind([1,2,3,4],[2,4,6,8]) -> t=-1.7320508075688772, p=0.13397459621556118
        let t = pairwise_ttest(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]).unwrap();
        assert!((t.t + 1.732_050_807_568_877_2).abs() < 1e-12);
        assert!((t.p - 0.133_974_596_215_561_18).abs() < 1e-12, "{}", t.p);
        assert!(pairwise_ttest(&[1.0], &[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn ttest_antisymmetric_and_affine_invariant(
            a in prop::collection::vec(-10.0f64..10.0, 2..20),
            b in prop::collection::vec(-10.0f64..10.0, 2..20),
            scale in 0.01f64..100.0,
            shift in -100.0f64..100.0,
        ) {
            let ab = pairwise_ttest(&a, &b).unwrap();
            let ba = pairwise_ttest(&b, &a).unwrap();
            prop_assert_eq!(ab.t, -ba.t);
            prop_assert_eq!(ab.p, ba.p);
            let tr = |x: &[f64]| x.iter().map(|v| v * scale + shift).collect::<Vec<_>>();
            let t2 = pairwise_ttest(&tr(&a), &tr(&b)).unwrap();
            prop_assert!((t2.t - ab.t).abs() <= 1e-7 * ab.t.abs().max(1.0));
            prop_assert!((t2.p - ab.p).abs() <= 1e-7);
        }
    }

    fn blobs(centers: &[[f64; 2]], per: usize, sd: f64, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seed::rng(seed);
        let noise = Normal::new(0.0, sd).unwrap();
        centers
            .iter()
            .flat_map(|c| (0..per).map(|_| vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]).collect::<Vec<_>>())
            .collect()
    }

    #[test]
    fn separated_blobs() {
        let items = blobs(&[[0.0, 0.0], [10.0, 10.0]], 15, 0.5, 1);
        let r = kmeans_silhouette(&items, &[2, 3, 4, 5], 7).unwrap();
        assert_eq!(r.k, 2);
        assert!(r.silhouette_curve[0].1 > 0.8);
        assert!(r.assignments[..15].iter().all(|&a| a == r.assignments[0]));
        assert!(r.assignments[15..].iter().all(|&a| a != r.assignments[0]));
        let items = blobs(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]], 10, 0.5, 2);
        assert_eq!(kmeans_silhouette(&items, &[2, 3, 4, 5], 7).unwrap().k, 3);
    }

    #[test]
    fn degenerate_and_small_inputs() {
        let r = kmeans_silhouette(&vec![vec![1.0, 1.0]; 5], &[2, 3], 0).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.k, 2);
        // three collinear equidistant points: K=3 is skipped, K=2 wins
        let r = kmeans_silhouette(&[vec![0.0], vec![1.0], vec![2.0]], &[2, 3], 0).unwrap();
        assert_eq!(r.k, 2);
        assert_eq!(r.silhouette_curve.len(), 1);
        assert!(kmeans_silhouette(&[vec![0.0], vec![1.0]], &[2], 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn kmeans_is_a_lloyd_fixed_point(seed in any::<u64>(), n in 3usize..30, k in 2usize..5) {
            let mut rng = seed::rng(seed);
            let items: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random(), rng.random()]).collect();
            let k = k.min(n - 1);
            let (assign, _) = best_kmeans(&items, k, seed);
            let centers: Vec<Option<Vec<f64>>> = (0..k)
                .map(|c| {
                    let m: Vec<&Vec<f64>> = items.iter().zip(&assign).filter(|(_, &a)| a == c).map(|(x, _)| x).collect();
                    (!m.is_empty()).then(|| (0..3).map(|j| m.iter().map(|x| x[j]).sum::<f64>() / m.len() as f64).collect())
                })
                .collect();
            for (x, &a) in items.iter().zip(&assign) {
                let own = dist2(x, centers[a].as_ref().unwrap());
                for c in centers.iter().flatten() {
                    prop_assert!(own <= dist2(x, c) + 1e-12);
                }
            }
            let s = silhouette(&items, &assign, k);
            prop_assert!((-1.0..=1.0).contains(&s));
        }
    }

    #[test]
    fn pca_sign_convention_and_variance() {
        let items: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64 + 0.01 * (i % 2) as f64]).collect();
        let (proj, explained) = pca2(&items);
        assert!(explained[0] > 0.99);
        // first component follows the increasing direction
        assert!(proj[9][0] > proj[0][0]);
        let flipped: Vec<Vec<f64>> = items.iter().map(|x| vec![-x[0], -x[1]]).collect();
        let (proj2, _) = pca2(&flipped);
        assert!(proj2[0][0] > proj2[9][0]);
    }
}
