//! Lloyd's k-means with k-means++ seeding, used to place inducing points.

use rand::Rng;

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(centers: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = dist2(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_plus_plus<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if u < w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        centers.push(points[idx].clone());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize) -> (Vec<Vec<f64>>, f64) {
    let n = points.len();
    let k = centers.len();
    let d = points[0].len();
    let mut assign = vec![usize::MAX; n];
    for _ in 0..max_iter {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (j, _) = nearest(&centers, p);
            if assign[i] != j {
                assign[i] = j;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assign[i]] += 1;
            for (s, v) in sums[assign[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        for j in 0..k {
            if counts[j] > 0 {
                centers[j] = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            } else {
                // Re-seed an empty cluster at the worst-served point.
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist2(&points[a], &centers[assign[a]]).total_cmp(&dist2(&points[b], &centers[assign[b]]))
                    })
                    .unwrap_or(0);
                centers[j] = points[far].clone();
                assign[far] = j;
            }
        }
    }
    let inertia = points.iter().map(|p| nearest(&centers, p).1).sum();
    (centers, inertia)
}

/// `k` centres minimizing within-cluster squared distance, best of `restarts`.
///
/// With `k ≥ points.len()` the points are returned unchanged.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    restarts: usize,
    max_iter: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    if points.is_empty() || k == 0 {
        return Vec::new();
    }
    if k >= points.len() {
        return points.to_vec();
    }
    let mut best: Option<(Vec<Vec<f64>>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let init = seed_plus_plus(points, k, rng);
        let (centers, inertia) = lloyd(points, init, max_iter);
        if best.as_ref().is_none_or(|(_, b)| inertia < *b) {
            best = Some((centers, inertia));
        }
    }
    best.map(|(c, _)| c).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn recovers_separated_clusters() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut pts = Vec::new();
        for &(cx, cy) in &[(0.0, 0.0), (10.0, 0.0), (0.0, 10.0)] {
            for i in 0..20 {
                let t = i as f64 * 0.3;
                pts.push(vec![cx + 0.1 * t.cos(), cy + 0.1 * t.sin()]);
            }
        }
        let mut centers = kmeans(&pts, 3, 10, 100, &mut rng);
        centers.sort_by(|a, b| (a[0] + 2.0 * a[1]).total_cmp(&(b[0] + 2.0 * b[1])));
        let expected = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        for (c, e) in centers.iter().zip(&expected) {
            assert!(dist2(c, e) < 0.05, "{c:?} vs {e:?}");
        }
    }

    #[test]
    fn small_inputs_pass_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = vec![vec![0.1], vec![0.7]];
        assert_eq!(kmeans(&pts, 5, 3, 10, &mut rng), pts);
        assert!(kmeans(&[], 3, 3, 10, &mut rng).is_empty());
    }

    #[test]
    fn deterministic_under_seed() {
        let pts: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
            .collect();
        let a = kmeans(&pts, 7, 4, 50, &mut ChaCha8Rng::seed_from_u64(9));
        let b = kmeans(&pts, 7, 4, 50, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert_eq!(a.len(), 7);
    }
}
