use std::cmp::Reverse;
use std::collections::BinaryHeap;

use cdiff::ecg::ridge::{best_path, path_objective};
use cdiff::ecg::stft::{FrameLayout, Spectrogram};
use cdiff::ecg::{f1_score, median_spectrogram};
use cdiff::kernels::diffusion_from_points;
use cdiff::matrix::{antisymmetry_defect, max_abs_diff, symmetry_defect};
use cdiff::operators::build_composite;
use cdiff::spectral::{antisymmetric_spectrum, reconstruct_antisymmetric};
use cdiff::{ComputeOptions, Matrix};
use faer::Mat;
use proptest::prelude::*;

/// Shortest path through the layered column graph. Node costs are shifted to
/// be nonnegative so Dijkstra applies; returns the best objective.
fn dijkstra_objective(score: &[Vec<f64>], penalty: f64) -> f64 {
    let tw = score.len();
    let nf = score[0].len();
    let top = score.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let node = |t: usize, f: usize| t * nf + f;
    let mut dist = vec![f64::INFINITY; tw * nf];
    let mut heap = BinaryHeap::new();
    let key = |d: f64| Reverse(d.to_bits());
    for f in 0..nf {
        let d = top - score[0][f];
        dist[node(0, f)] = d;
        heap.push((key(d), node(0, f)));
    }
    while let Some((Reverse(bits), v)) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[v] {
            continue;
        }
        let (t, f) = (v / nf, v % nf);
        if t + 1 == tw {
            continue;
        }
        for g in 0..nf {
            let nd = d + penalty * f.abs_diff(g) as f64 + (top - score[t + 1][g]);
            let w = node(t + 1, g);
            if nd < dist[w] {
                dist[w] = nd;
                heap.push((key(nd), w));
            }
        }
    }
    let best = (0..nf).map(|f| dist[node(tw - 1, f)]).fold(f64::INFINITY, f64::min);
    tw as f64 * top - best
}

/// Every path enumerated by an odometer.
fn brute_objective(score: &[Vec<f64>], penalty: f64) -> f64 {
    let tw = score.len();
    let nf = score[0].len();
    let mut path = vec![0usize; tw];
    let mut best = f64::NEG_INFINITY;
    loop {
        best = best.max(path_objective(score, &path, penalty));
        let mut k = 0;
        loop {
            if k == tw {
                return best;
            }
            path[k] += 1;
            if path[k] < nf {
                break;
            }
            path[k] = 0;
            k += 1;
        }
    }
}

fn grid(max_f: usize, max_t: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, f64)> {
    (1..=max_f, 1..=max_t, 0.0..2.0f64).prop_flat_map(|(nf, tw, pen)| {
        (prop::collection::vec(prop::collection::vec(-5.0..1.0f64, nf), tw), Just(pen))
    })
}

fn spectrogram(mag: Matrix) -> Spectrogram {
    let (nf, tw) = (mag.nrows(), mag.ncols());
    Spectrogram {
        mag,
        freqs_hz: (0..nf).map(|k| k as f64).collect(),
        times_s: (0..tw).map(|t| t as f64).collect(),
        layout: FrameLayout { fs: 2.0 * nf as f64, window: 16, hop: 1, nfft: 2 * nf, deshape: false },
    }
}

fn points(n: usize, d: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-10.0..10.0f64, n * d).prop_map(move |v| Mat::from_fn(n, d, |i, k| v[i * d + k]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ridge_dp_matches_shortest_path((score, pen) in grid(100, 100)) {
        let (path, total) = best_path(&score, pen);
        prop_assert_eq!(path.len(), score.len());
        prop_assert!((path_objective(&score, &path, pen) - total).abs() <= 1e-9 * (1.0 + total.abs()));
        let oracle = dijkstra_objective(&score, pen);
        prop_assert!((total - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()), "dp {} oracle {}", total, oracle);
    }

    #[test]
    fn ridge_dp_matches_enumeration((score, pen) in grid(4, 7)) {
        let (_, total) = best_path(&score, pen);
        let oracle = brute_objective(&score, pen);
        prop_assert!((total - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()));
    }

    #[test]
    fn f1_matching_is_one_to_one(
        est in prop::collection::vec(0usize..5000, 0..60),
        truth in prop::collection::vec(0usize..5000, 0..60),
        guard in 0.0..3.0f64,
    ) {
        let e = f1_score(&est, &truth, 250.0, 50.0, guard, 5000);
        prop_assert!(e.tp <= est.len().min(truth.len()));
        prop_assert!((0.0..=1.0).contains(&e.f1));
        prop_assert!((0.0..=1.0).contains(&e.se) && (0.0..=1.0).contains(&e.ppv));
        let lo = guard * 250.0;
        let hi = 5000.0 - guard * 250.0;
        let inside = |v: &[usize]| v.iter().filter(|&&i| i as f64 >= lo && i as f64 <= hi).count();
        prop_assert_eq!(e.tp + e.fn_, inside(&truth));
        prop_assert_eq!(e.tp + e.fp, inside(&est));
    }

    #[test]
    fn median_is_permutation_invariant(
        vals in prop::collection::vec(prop::collection::vec(0.0..10.0f64, 12), 1..7),
        rot in 0usize..7,
    ) {
        let specs: Vec<Spectrogram> = vals.iter().map(|v| spectrogram(Mat::from_fn(3, 4, |i, j| v[i * 4 + j]))).collect();
        let mut shuffled = specs.clone();
        shuffled.rotate_left(rot % specs.len());
        shuffled.reverse();
        let a = median_spectrogram(&specs).unwrap();
        let b = median_spectrogram(&shuffled).unwrap();
        prop_assert_eq!(&a.mag, &b.mag);
        for i in 0..3 {
            for j in 0..4 {
                let mut px: Vec<f64> = vals.iter().map(|v| v[i * 4 + j]).collect();
                px.sort_by(f64::total_cmp);
                let m = px.len();
                let want = if m % 2 == 1 { px[m / 2] } else { 0.5 * (px[m / 2 - 1] + px[m / 2]) };
                prop_assert_eq!(a.mag[(i, j)], want);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composite_structure(n in 3usize..40, seed_pts in points(40, 3), other in points(40, 2), div in 0.5..6.0f64) {
        let x = seed_pts.as_ref().subrows(0, n).to_owned();
        let y = other.as_ref().subrows(0, n).to_owned();
        let opts = ComputeOptions::default();
        let (p1, _) = diffusion_from_points(x.as_ref(), div, &opts).unwrap();
        let (p2, _) = diffusion_from_points(y.as_ref(), div, &opts).unwrap();
        let ops = build_composite(&p1, &p2).unwrap();
        prop_assert!(symmetry_defect(ops.s.as_ref()) <= 1e-12);
        prop_assert!(antisymmetry_defect(ops.a.as_ref()) <= 1e-12);
        prop_assert!(max_abs_diff(ops.h.as_ref(), ops.g.transpose()) <= 1e-12);
    }

    #[test]
    fn scale_invariance(x in points(25, 3), gamma in 0.01..100.0f64) {
        let opts = ComputeOptions::default();
        let (a, _) = diffusion_from_points(x.as_ref(), 2.0, &opts).unwrap();
        let (b, _) = diffusion_from_points((&x * faer::Scale(gamma)).as_ref(), 2.0, &opts).unwrap();
        prop_assert!(max_abs_diff(a.p.as_ref(), b.p.as_ref()) <= 1e-12);
        prop_assert!(max_abs_diff(a.q.as_ref(), b.q.as_ref()) <= 1e-12);
    }

    #[test]
    fn antisymmetric_round_trip(v in prop::collection::vec(-1.0..1.0f64, 400), n in 2usize..20) {
        let a = Mat::from_fn(n, n, |i, j| v[i * 20 + j] - v[j * 20 + i]);
        let spec = antisymmetric_spectrum(a.as_ref()).unwrap();
        let back = reconstruct_antisymmetric(&spec);
        prop_assert!(max_abs_diff(back.as_ref(), a.as_ref()) <= 1e-9 * (1.0 + cdiff::matrix::max_abs(a.as_ref())));
    }
}
