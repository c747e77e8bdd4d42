//! Moving-instance formation and matching: DBSCAN on Cartesian detection
//! positions, cluster centroids, optimal one-to-one association.

use serde::{Deserialize, Serialize};

use crate::lap::solve_assignment;
use crate::point::{PointClass, RadarPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    /// Neighborhood radius, meters.
    pub eps: f64,
    /// Neighbors (self included) needed for a core point.
    pub min_pts: usize,
    /// Largest centroid distance accepted as a match, meters.
    pub gate: f64,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            eps: 2.0,
            min_pts: 2,
            gate: 2.5,
        }
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

/// Density-based clustering. Returns a cluster id per point, `None` for noise.
///
/// Core points (at least `min_pts` points within `eps`, itself included) that
/// are within `eps` of each other share a cluster; ids follow the order of the
/// first core point of each cluster. A non-core point within `eps` of a core
/// point joins the cluster of its nearest core neighbor, which makes the
/// partition independent of input order.
pub fn dbscan(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let eps2 = eps * eps;
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| dist2(points[i], points[j]) <= eps2).collect())
        .collect();
    let core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut labels = vec![None; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || labels[seed].is_some() {
            continue;
        }
        labels[seed] = Some(next);
        stack.push(seed);
        while let Some(p) = stack.pop() {
            for &q in &neighbors[p] {
                if core[q] && labels[q].is_none() {
                    labels[q] = Some(next);
                    stack.push(q);
                }
            }
        }
        next += 1;
    }

    for i in 0..n {
        if core[i] {
            continue;
        }
        labels[i] = neighbors[i]
            .iter()
            .filter(|&&j| core[j])
            .min_by(|&&a, &&b| dist2(points[i], points[a]).total_cmp(&dist2(points[i], points[b])))
            .and_then(|&j| labels[j]);
    }
    labels
}

/// Mean position of each cluster, indexed by cluster id.
pub fn clusters_to_centroids(points: &[[f64; 2]], ids: &[Option<usize>]) -> Vec<[f64; 2]> {
    let k = ids.iter().flatten().max().map_or(0, |m| m + 1);
    let mut sum = vec![[0.0, 0.0]; k];
    let mut count = vec![0usize; k];
    for (p, id) in points.iter().zip(ids) {
        if let Some(c) = id {
            sum[*c][0] += p[0];
            sum[*c][1] += p[1];
            count[*c] += 1;
        }
    }
    sum.iter()
        .zip(&count)
        .filter(|(_, &n)| n > 0)
        .map(|(s, &n)| [s[0] / n as f64, s[1] / n as f64])
        .collect()
}

/// Centroids of the moving instances formed by the points labeled MOVING.
pub fn moving_instances(points: &[RadarPoint], labels: &[PointClass], config: &ClusterConfig) -> Vec<[f64; 2]> {
    let moving: Vec<[f64; 2]> = points
        .iter()
        .zip(labels)
        .filter(|(_, c)| **c == PointClass::Moving)
        .map(|(p, _)| p.position())
        .collect();
    let ids = dbscan(&moving, config.eps, config.min_pts);
    clusters_to_centroids(&moving, &ids)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub gt: [f64; 2],
    pub pred: [f64; 2],
    pub distance: f64,
}

/// Detection counts of one frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameMatch {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub pairs: Vec<MatchedPair>,
}

/// Optimal assignment on a ground-truth x prediction cost matrix, keeping the
/// assigned pairs whose cost is within `gate`.
pub fn gated_assignment(costs: &[Vec<f64>], gate: f64) -> Vec<(usize, usize)> {
    solve_assignment(costs)
        .into_iter()
        .enumerate()
        .filter_map(|(i, j)| j.filter(|&j| costs[i][j] <= gate).map(|j| (i, j)))
        .collect()
}

/// Optimal L2 assignment between ground-truth and predicted centroids; pairs
/// farther apart than `gate` are split into one FP and one FN.
pub fn associate(gt: &[[f64; 2]], pred: &[[f64; 2]], gate: f64) -> FrameMatch {
    let costs: Vec<Vec<f64>> = gt
        .iter()
        .map(|g| pred.iter().map(|p| dist2(*g, *p).sqrt()).collect())
        .collect();
    let pairs: Vec<MatchedPair> = gated_assignment(&costs, gate)
        .into_iter()
        .map(|(i, j)| MatchedPair {
            gt: gt[i],
            pred: pred[j],
            distance: costs[i][j],
        })
        .collect();
    let tp = pairs.len();
    FrameMatch {
        tp,
        fp: pred.len() - tp,
        fn_: gt.len() - tp,
        pairs,
    }
}

/// Per-frame matches of a sequence.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InstanceReport {
    pub frames: Vec<FrameMatch>,
}

impl InstanceReport {
    pub fn push(&mut self, m: FrameMatch) {
        self.frames.push(m);
    }

    /// `(TP, FP, FN)` summed over frames.
    pub fn totals(&self) -> (usize, usize, usize) {
        self.frames
            .iter()
            .fold((0, 0, 0), |(tp, fp, fn_), f| (tp + f.tp, fp + f.fp, fn_ + f.fn_))
    }
}

/// Clusters ground-truth and predicted moving points of one frame with the
/// same settings and matches the instances.
pub fn match_frame(
    points: &[RadarPoint],
    gt: &[PointClass],
    predicted: &[PointClass],
    config: &ClusterConfig,
) -> FrameMatch {
    let gt_inst = moving_instances(points, gt, config);
    let pred_inst = moving_instances(points, predicted, config);
    associate(&gt_inst, &pred_inst, config.gate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbscan_pair_and_isolated() {
        assert_eq!(dbscan(&[[0.0, 0.0], [0.5, 0.0]], 1.0, 2), vec![Some(0), Some(0)]);
        assert_eq!(dbscan(&[[0.0, 0.0], [10.0, 0.0]], 1.0, 2), vec![None, None]);
        // exactly eps apart counts as a neighbor
        assert_eq!(dbscan(&[[0.0, 0.0], [1.0, 0.0]], 1.0, 2), vec![Some(0), Some(0)]);
    }

    #[test]
    fn dbscan_border_point_joins_nearest_core() {
        // chain a - b - c with min_pts 3: only b is core
        let pts = [[0.0, 0.0], [0.9, 0.0], [1.8, 0.0], [10.0, 0.0]];
        assert_eq!(dbscan(&pts, 1.0, 3), vec![Some(0), Some(0), Some(0), None]);
    }

    #[test]
    fn centroids() {
        let pts = [[0.0, 0.0], [2.0, 0.0], [5.0, 5.0]];
        assert_eq!(clusters_to_centroids(&pts, &[Some(0), Some(0), None]), vec![[1.0, 0.0]]);
        assert!(clusters_to_centroids(&pts, &[None, None, None]).is_empty());
    }

    #[test]
    fn identical_lists_all_match() {
        let c = [[1.0, 2.0], [5.0, -3.0], [20.0, 0.0]];
        let m = associate(&c, &c, 2.5);
        assert_eq!((m.tp, m.fp, m.fn_), (3, 0, 0));
        assert!(m.pairs.iter().all(|p| p.distance == 0.0));
    }

    #[test]
    fn cost_matrix_pairing() {
        let costs = vec![vec![1.0, 2.0], vec![2.0, 10.0]];
        assert_eq!(gated_assignment(&costs, 5.0), vec![(0, 1), (1, 0)]);
        assert_eq!(gated_assignment(&costs, 1.5), vec![]);
    }

    #[test]
    fn gated_far_prediction() {
        let gt = [[0.0, 0.0], [10.0, 0.0]];
        let pred = [[0.5, 0.0], [10.0, 1.0], [60.0, 0.0]];
        let m = associate(&gt, &pred, 2.5);
        assert_eq!((m.tp, m.fp, m.fn_), (2, 1, 0));
        let far = associate(&[[0.0, 0.0]], &[[50.0, 0.0]], 2.5);
        assert_eq!((far.tp, far.fp, far.fn_), (0, 1, 1));
        let none = associate(&[], &[], 2.5);
        assert_eq!((none.tp, none.fp, none.fn_), (0, 0, 0));
    }
}
