#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use radar_egoseg::{GroundTruthLabels, PointClass, RadarFrame, RadarPoint};

/// Random labeled frames with the given point counts, 0.06 s apart.
pub fn random_frames(counts: &[usize], seed: u64) -> Vec<RadarFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    counts
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let points: Vec<RadarPoint> = (0..n)
                .map(|_| {
                    RadarPoint::new(rng.gen_range(1.0..60.0), rng.gen_range(-1.0..1.0), rng.gen_range(-15.0..5.0))
                        .with_rcs(rng.gen_range(-10.0..20.0))
                })
                .collect();
            let class: Vec<PointClass> = (0..n)
                .map(|_| match rng.gen_range(0..3) {
                    0 => PointClass::Static,
                    1 => PointClass::Moving,
                    _ => PointClass::FalsePositive,
                })
                .collect();
            let instance = class.iter().map(|c| (*c == PointClass::Moving).then_some(1)).collect();
            let mut f = RadarFrame::new(k as f64 * 0.06, points);
            f.gt = Some(GroundTruthLabels { class, instance });
            f
        })
        .collect()
}

/// Minimum total cost over all row-to-column assignments, by enumeration.
pub fn brute_force_assignment_cost(costs: &[Vec<f64>]) -> f64 {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    fn go(costs: &[Vec<f64>], row: usize, used: &mut Vec<bool>, left: usize, best: &mut f64, acc: f64) {
        if left == 0 || row == costs.len() {
            if left == 0 {
                *best = best.min(acc);
            }
            return;
        }
        let rows_left = costs.len() - row;
        // skipping this row is only possible when rows outnumber columns
        if rows_left > left {
            go(costs, row + 1, used, left, best, acc);
        }
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                go(costs, row + 1, used, left - 1, best, acc + costs[row][j]);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(costs, 0, &mut vec![false; cols], rows.min(cols), &mut best, 0.0);
    if rows.min(cols) == 0 {
        0.0
    } else {
        best
    }
}

/// DBSCAN by explicit reachability: transitive closure of the core-core
/// neighbor relation, then border points to their nearest core neighbor.
pub fn dbscan_closure(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let near = |i: usize, j: usize| {
        let (dx, dy) = (points[i][0] - points[j][0], points[i][1] - points[j][1]);
        dx * dx + dy * dy <= eps * eps
    };
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = core[i] && core[j] && near(i, j);
        }
    }
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut labels = vec![None; n];
    let mut next = 0;
    for i in 0..n {
        if core[i] && labels[i].is_none() {
            for j in 0..n {
                if reach[i][j] {
                    labels[j] = Some(next);
                }
            }
            next += 1;
        }
    }
    for i in 0..n {
        if !core[i] {
            let mut best: Option<(f64, usize)> = None;
            for j in (0..n).filter(|&j| core[j] && near(i, j)) {
                let d = (points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2);
                if best.map_or(true, |(b, _)| d < b) {
                    best = Some((d, j));
                }
            }
            labels[i] = best.and_then(|(_, j)| labels[j]);
        }
    }
    labels
}

/// Static detections of a radar moving with `motion`, azimuths spread over
/// `[-spread/2, spread/2]`, Doppler noise `sigma`.
pub fn static_points(rng: &mut impl Rng, n: usize, spread: f64, motion: radar_egoseg::RadarMotion, sigma: f64) -> Vec<RadarPoint> {
    let normal = rand_distr::Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).unwrap();
    (0..n)
        .map(|k| {
            // pin both ends so the spread is exact
            let a = match k {
                0 => -spread / 2.0,
                1 => spread / 2.0,
                _ => rng.gen_range(-spread / 2.0..spread / 2.0),
            };
            let noise = if sigma > 0.0 { rng.sample(normal) } else { 0.0 };
            RadarPoint::new(rng.gen_range(2.0..80.0), a, radar_egoseg::ego::static_radial_velocity(a, motion) + noise)
        })
        .collect()
}

pub mod gradcheck {
    use radar_egoseg::network::model::batch_loss;
    use radar_egoseg::network::params::Store;
    use radar_egoseg::network::train::feature_statistics;
    use radar_egoseg::network::{gradients, ModelConfig, ModelParams, Sample};
    use radar_egoseg::{FrameWindow, RadarFrame};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Tiny model with normalization fitted to `frames` and every weight
    /// nudged off its initial value.
    pub fn tiny_params(seed: u64, frames: &[RadarFrame]) -> ModelParams {
        let mut p = ModelParams::init(&ModelConfig::tiny(), seed);
        let (mean, std) = feature_statistics(frames, 4);
        p.set_input_normalization(&mean, &std);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for v in p.weights.iter_mut() {
            *v += rng.gen_range(-0.1..0.1);
        }
        p
    }

    pub fn sequences() -> Vec<Vec<RadarFrame>> {
        vec![
            super::random_frames(&[6, 6, 6], 1),
            super::random_frames(&[5, 6, 4], 2),
            super::random_frames(&[6, 3, 6], 3),
        ]
    }

    pub fn samples(seqs: &[Vec<RadarFrame>], weight: f64) -> Vec<Sample<'_>> {
        seqs.iter()
            .enumerate()
            .map(|(i, f)| Sample {
                window: FrameWindow::new(f),
                sample_weight: weight * (1.0 + i as f64 * 0.5),
            })
            .collect()
    }

    pub struct Report {
        pub checked: usize,
        pub worst: f64,
        pub at: String,
    }

    /// Central differences with step `h` against the analytic gradient of
    /// every weight. Relative errors use a floor of 1e-6 on the magnitude.
    pub fn check(params: &mut ModelParams, batch: &[Sample], seed: u64, h: f64) -> Report {
        let g = gradients(params, batch, seed, None).unwrap();
        let layout = params.layout();
        let mut report = Report {
            checked: 0,
            worst: 0.0,
            at: String::new(),
        };
        for (name, store, slot) in &layout.entries {
            if *store != Store::Weights {
                continue;
            }
            for i in slot.range() {
                let orig = params.weights[i];
                params.weights[i] = orig + h;
                let up = batch_loss(params, batch, seed).unwrap();
                params.weights[i] = orig - h;
                let down = batch_loss(params, batch, seed).unwrap();
                params.weights[i] = orig;
                let numeric = (up - down) / (2.0 * h);
                let analytic = g.weights[i];
                let rel = (numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6);
                report.checked += 1;
                if rel > report.worst {
                    report.worst = rel;
                    report.at = format!("{name}[{}]: analytic {analytic:e} numeric {numeric:e}", i - slot.offset);
                }
            }
        }
        report
    }
}
