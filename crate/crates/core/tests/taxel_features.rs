use std::collections::BTreeSet;

use proptest::prelude::*;
use tactile_core::features::{extract_features, time_normalize, ExtractOptions};
use tactile_core::taxel::{
    connected_components, largest_component, pool_frame, threshold_frame, BinaryMask, Connectivity, Pooling,
    TaxelFrame, TaxelTrial,
};

/// Union-find partition of the set cells, independent of the library's
/// flood fill.
fn union_find_partition(mask: &BinaryMask, eight: bool) -> BTreeSet<Vec<(usize, usize)>> {
    let (rows, cols) = (mask.rows(), mask.cols());
    let mut parent: Vec<usize> = (0..rows * cols).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut offsets = vec![(0isize, 1isize), (1, 0)];
    if eight {
        offsets.extend([(1, 1), (1, -1)]);
    }
    for r in 0..rows {
        for c in 0..cols {
            if !mask.get(r, c) {
                continue;
            }
            for &(dr, dc) in &offsets {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr >= rows as isize || nc >= cols as isize {
                    continue;
                }
                let (nr, nc) = (nr as usize, nc as usize);
                if mask.get(nr, nc) {
                    let a = find(&mut parent, r * cols + c);
                    let b = find(&mut parent, nr * cols + nc);
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for r in 0..rows {
        for c in 0..cols {
            if mask.get(r, c) {
                let root = find(&mut parent, r * cols + c);
                groups.entry(root).or_default().push((r, c));
            }
        }
    }
    groups.into_values().map(|mut g| { g.sort(); g }).collect()
}

fn grid(rows: usize, cols: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(prop::bool::weighted(0.45), rows * cols)
}

proptest! {
    #[test]
    fn components_match_union_find((rows, cols, bits) in (1usize..12, 1usize..12).prop_flat_map(|(r, c)| (Just(r), Just(c), grid(r, c))),
                                   eight in any::<bool>()) {
        let mask = BinaryMask::from_bits(rows, cols, bits).unwrap();
        let conn = if eight { Connectivity::Eight } else { Connectivity::Four };
        let comps = connected_components(&mask, conn);
        let got: BTreeSet<Vec<(usize, usize)>> = comps.iter().map(|c| c.taxels.clone()).collect();
        prop_assert_eq!(got.len(), comps.len());
        prop_assert_eq!(&got, &union_find_partition(&mask, eight));
        prop_assert_eq!(comps.iter().map(|c| c.area()).sum::<usize>(), mask.count());
        if let Some(big) = largest_component(&comps) {
            prop_assert!(comps.iter().all(|c| c.area() <= big.area()));
        }
    }

    #[test]
    fn pooling_conserves_total_force(forces in prop::collection::vec(0.0f64..5.0, 24 * 16),
                                     f in prop::sample::select(vec![1usize, 2, 4, 8])) {
        let frame = TaxelFrame::new(24, 16, 0.009, forces).unwrap();
        let pooled = pool_frame(&frame, Pooling::Block(f)).unwrap();
        prop_assert_eq!(pooled.rows() * f, 24);
        prop_assert!((pooled.total_force() - frame.total_force()).abs() < 1e-9);
        prop_assert!((pooled.pitch() - 0.009 * f as f64).abs() < 1e-15);
        let full = pool_frame(&frame, Pooling::Full).unwrap();
        prop_assert!((full.total_force() - frame.total_force()).abs() < 1e-9);
        prop_assert!(pooled.max_force() + 1e-12 >= frame.max_force());
    }

    #[test]
    fn threshold_is_strict(forces in prop::collection::vec(0.0f64..2.0, 6 * 5), tau in 0.0f64..2.0) {
        let frame = TaxelFrame::new(6, 5, 0.01, forces.clone()).unwrap();
        let mask = threshold_frame(&frame, tau);
        for (i, &v) in forces.iter().enumerate() {
            prop_assert_eq!(mask.bits()[i], v > tau);
        }
    }

    #[test]
    fn time_normalize_round_trips(values in prop::collection::vec(-10.0f64..10.0, 2..40), k in 1usize..5) {
        let n = values.len();
        prop_assert_eq!(time_normalize(&values, n).unwrap(), values.clone());
        // Upsampling by an integer factor keeps the original points on the grid.
        let up = time_normalize(&values, (n - 1) * k + 1).unwrap();
        let back = time_normalize(&up, n).unwrap();
        for (a, b) in back.iter().zip(&values) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert_eq!(up[0], values[0]);
        prop_assert_eq!(*up.last().unwrap(), values[n - 1]);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(up.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
    }

    #[test]
    fn linear_series_stay_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, n in 2usize..30, m in 2usize..60) {
        let series: Vec<f64> = (0..n).map(|i| a + b * i as f64 / (n - 1) as f64).collect();
        let out = time_normalize(&series, m).unwrap();
        for (i, v) in out.iter().enumerate() {
            prop_assert!((v - (a + b * i as f64 / (m - 1) as f64)).abs() < 1e-9);
        }
    }
}

fn blob_frame(force: f64, cells: &[(usize, usize)]) -> TaxelFrame {
    let mut forces = vec![0.0; 24 * 16];
    for &(r, c) in cells {
        forces[r * 16 + c] = force;
    }
    TaxelFrame::new(24, 16, 0.009, forces).unwrap()
}

#[test]
fn features_of_a_hand_built_trial() {
    // Two silent frames, then a blob growing to the right next to a weaker
    // single-taxel distractor.
    let mut frames = vec![blob_frame(0.0, &[]), blob_frame(0.0, &[])];
    for k in 0..5usize {
        let cells: Vec<(usize, usize)> = (0..k + 2).map(|c| (10, 4 + c)).collect();
        let mut forces = blob_frame(1.0 + k as f64, &cells).forces().to_vec();
        forces[0] = 0.8;
        frames.push(TaxelFrame::new(24, 16, 0.009, forces).unwrap());
    }
    let trial = TaxelTrial::new(frames, 100.0, 0.5, None, None).unwrap();
    let opts = ExtractOptions { window_s: 0.05, ..ExtractOptions::default() };
    let arm: Vec<f64> = (0..7).map(|i| i as f64 * 0.001).collect();
    let fs = extract_features(&trial, &opts, Some(&arm)).unwrap();
    assert_eq!(fs.onset_index, 2);
    assert_eq!(fs.len(), 5);
    assert_eq!(fs.f_max, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    assert_eq!(fs.area, vec![2.0, 3.0, 4.0, 5.0, 6.0]);
    for (k, d) in fs.d.iter().enumerate() {
        // Centroid shifts half a pitch per frame; the arm moves 1 mm per frame.
        let want = ((k as f64 * 0.5 * 0.009).powi(2) + (k as f64 * 0.001).powi(2)).sqrt();
        assert!((d - want).abs() < 1e-12, "frame {k}: {d} vs {want}");
    }
}

#[test]
fn short_trials_are_padded_with_the_mean() {
    let frames = vec![blob_frame(1.0, &[(3, 3)]), blob_frame(3.0, &[(3, 3)])];
    let trial = TaxelTrial::new(frames, 100.0, 0.5, None, None).unwrap();
    let opts = ExtractOptions { window_s: 0.04, ..ExtractOptions::default() };
    let fs = extract_features(&trial, &opts, None).unwrap();
    assert_eq!(fs.f_max, vec![1.0, 3.0, 2.0, 2.0]);
    assert_eq!(fs.area, vec![1.0; 4]);
}
