use std::collections::BTreeSet;

use prefracture_core::geometry::{fracture, piece_mesh, PieceGraph, VoxelGrid};
use prefracture_core::postprocess::{merge_group_meshes, split_disconnected, summarize};
use proptest::prelude::*;

/// Components by repeated depth-first search on the label-restricted graph.
fn oracle(labels: &[usize], n: usize, edges: &[(usize, usize)]) -> BTreeSet<Vec<usize>> {
    let mut seen = vec![false; n];
    let mut out = BTreeSet::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut stack = vec![s];
        seen[s] = true;
        let mut comp = vec![];
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &(a, b) in edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && !seen[y] && labels[y] == labels[s] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.insert(comp);
    }
    out
}

fn instance() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<usize>)> {
    (1usize..30).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec((0..n, 0..n), 0..2 * n)
                .prop_map(|e| e.into_iter().filter(|(a, b)| a != b).collect::<Vec<_>>()),
            proptest::collection::vec(0usize..4, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_matches_component_oracle((n, edges, labels) in instance()) {
        let graph = PieceGraph::new(n, edges.iter().copied()).unwrap();
        let out = split_disconnected(&labels, &graph).unwrap();
        let got: BTreeSet<Vec<usize>> = out.groups.iter().cloned().collect();
        prop_assert_eq!(got, oracle(&labels, n, &edges));
        for (g, members) in out.groups.iter().enumerate() {
            prop_assert!(members.iter().all(|&p| labels[p] == out.provenance[g]));
        }
        let mut all: Vec<usize> = out.groups.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());

        let relabeled = out.labels(n);
        let again = split_disconnected(&relabeled, &graph).unwrap();
        prop_assert_eq!(&again.groups, &out.groups);
    }

    #[test]
    fn group_meshes_conserve_volume(sites in 2usize..12, seed in any::<u64>(), labels in proptest::collection::vec(0usize..3, 12)) {
        let mut grid = VoxelGrid::empty([0.0; 3], 0.25, [5, 4, 3]).unwrap();
        for v in 0..grid.len() {
            grid.set(v, v % 7 != 3);
        }
        let pieces = fracture(&grid, sites, seed).unwrap();
        let labels = &labels[..pieces.len().min(12)];
        prop_assume!(labels.len() == pieces.len());
        let groups = split_disconnected(labels, pieces.graph()).unwrap();
        let meshes = merge_group_meshes(&groups, &pieces).unwrap();
        prop_assert_eq!(meshes.len(), groups.len());
        let total: f64 = meshes.iter().map(|m| m.volume()).sum();
        prop_assert!((total - pieces.total_volume()).abs() < 1e-12);
        for m in &meshes {
            prop_assert!(m.is_watertight());
        }
        let summary = summarize(&groups, &pieces);
        let vol: f64 = summary.iter().map(|s| s.volume).sum();
        prop_assert_eq!(vol, pieces.total_volume());
    }
}

#[test]
fn merged_adjacent_voxels_make_one_shell() {
    let mut grid = VoxelGrid::empty([0.0; 3], 1.0, [2, 1, 1]).unwrap();
    grid.set(0, true);
    grid.set(1, true);
    let pieces = fracture(&grid, 2, 0).unwrap();
    assert_eq!(pieces.len(), 2);
    let together = split_disconnected(&[0, 0], pieces.graph()).unwrap();
    let meshes = merge_group_meshes(&together, &pieces).unwrap();
    assert_eq!(meshes.len(), 1);
    assert_eq!(meshes[0].triangles().len(), 20);

    let apart = split_disconnected(&[0, 1], pieces.graph()).unwrap();
    let meshes = merge_group_meshes(&apart, &pieces).unwrap();
    assert_eq!(meshes.len(), 2);
    for (i, m) in meshes.iter().enumerate() {
        assert_eq!(m.triangles().len(), 12);
        assert_eq!(m.vertices(), piece_mesh(&pieces, &apart.groups[i]).unwrap().vertices());
    }
}
