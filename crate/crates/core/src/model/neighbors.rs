use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{dist2, Point3};
use crate::{contract, Result};

/// Index of the point nearest the centroid; ties go to the lowest index.
pub fn fps_start(points: &[Point3]) -> usize {
    let n = points.len().max(1) as f64;
    let mut c = [0.0; 3];
    for p in points {
        for a in 0..3 {
            c[a] += p[a];
        }
    }
    let c = c.map(|v| v / n);
    let mut best = (f64::INFINITY, 0);
    for (i, p) in points.iter().enumerate() {
        let d = dist2(p, &c);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

/// Greedy farthest-point sampling of `m` indices starting at `start`.
/// Ties go to the lowest index.
pub fn fps(points: &[Point3], m: usize, start: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if m == 0 || m > n {
        return Err(contract(format!("fps needs 1 <= m <= {n}, got {m}")));
    }
    if start >= n {
        return Err(contract(format!("fps start {start} out of range")));
    }
    let mut chosen = Vec::with_capacity(m);
    let mut nearest = vec![f64::INFINITY; n];
    let mut current = start;
    for _ in 0..m {
        chosen.push(current);
        nearest[current] = f64::NEG_INFINITY;
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, p) in points.iter().enumerate() {
            if nearest[i] == f64::NEG_INFINITY {
                continue;
            }
            let d = dist2(p, &points[current]);
            if d < nearest[i] {
                nearest[i] = d;
            }
            if nearest[i] > best.0 {
                best = (nearest[i], i);
            }
        }
        current = best.1;
    }
    Ok(chosen)
}

/// For each query, the `k` nearest points of `base` ordered by distance
/// (ties by index). Returned flat, `k` entries per query.
pub fn knn_query(base: &[Point3], queries: &[Point3], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > base.len() {
        return Err(contract(format!("knn needs 1 <= k <= {}, got {k}", base.len())));
    }
    let mut out = Vec::with_capacity(queries.len() * k);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(base.len());
    for q in queries {
        order.clear();
        order.extend(base.iter().enumerate().map(|(j, p)| (dist2(q, p), j)));
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        out.extend(order.iter().map(|&(_, j)| j));
    }
    Ok(out)
}

/// `k` nearest neighbours of every point, including itself.
pub fn knn(points: &[Point3], k: usize) -> Result<Vec<usize>> {
    knn_query(points, points, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fps_collinear() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]];
        assert_eq!(fps(&pts, 2, 0).unwrap(), vec![0, 3]);
        let mut all = fps(&pts, 4, 0).unwrap();
        all.sort();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(fps(&pts, 5, 0).is_err());
        assert!(fps(&pts, 0, 0).is_err());
    }

    #[test]
    fn fps_start_prefers_low_index() {
        let pts = [[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        assert_eq!(fps_start(&pts), 0);
    }

    #[test]
    fn knn_self_first() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [5.0, 0.0, 0.0]];
        assert_eq!(knn(&pts, 1).unwrap(), vec![0, 1, 2]);
        assert!(knn(&pts, 0).is_err());
        assert!(knn(&pts, 4).is_err());
    }

    #[test]
    fn knn_separated_clusters() {
        let mut pts = Vec::new();
        for i in 0..4 {
            pts.push([i as f64 * 0.1, 0.0, 0.0]);
            pts.push([100.0 + i as f64 * 0.1, 0.0, 0.0]);
        }
        let nb = knn(&pts, 4).unwrap();
        for i in 0..pts.len() {
            for &j in &nb[i * 4..i * 4 + 4] {
                assert_eq!(i % 2, j % 2);
            }
        }
    }
}
