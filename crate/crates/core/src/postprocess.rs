//! From piece labels to ready-to-use group meshes.
//!
//! Labels are first split so that each group is one face-connected set of
//! pieces; every group is then meshed as the boundary of its voxel union, so
//! faces shared by pieces of the same group disappear.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{piece_mesh, PieceGraph, PieceSet, Point3, TriMesh};
use crate::{contract, Result};

/// Connected groups of pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSet {
    /// Piece ids per group, ascending.
    pub groups: Vec<Vec<usize>>,
    /// Label each group was split from.
    pub provenance: Vec<usize>,
}

impl GroupSet {
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Per-piece group index.
    pub fn labels(&self, piece_count: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; piece_count];
        for (g, members) in self.groups.iter().enumerate() {
            for &p in members {
                out[p] = g;
            }
        }
        out
    }
}

/// Splits each label class into connected components of the piece graph.
/// Groups are ordered by label, then by their smallest piece id.
pub fn split_disconnected(labels: &[usize], graph: &PieceGraph) -> Result<GroupSet> {
    let n = graph.node_count();
    if labels.len() != n {
        return Err(contract(format!("{} labels for {n} pieces", labels.len())));
    }
    let adj = graph.adjacency_lists();
    let mut seen = vec![false; n];
    let mut found: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut members = Vec::new();
        while let Some(p) = queue.pop_front() {
            members.push(p);
            for &q in &adj[p] {
                if !seen[q] && labels[q] == labels[start] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        found.push((labels[start], members));
    }
    found.sort_by_key(|(label, members)| (*label, members[0]));
    let (provenance, groups) = found.into_iter().unzip();
    Ok(GroupSet { groups, provenance })
}

/// One boundary mesh per group.
pub fn merge_group_meshes(groups: &GroupSet, pieces: &PieceSet) -> Result<Vec<TriMesh>> {
    groups
        .groups
        .iter()
        .enumerate()
        .map(|(i, members)| {
            let mut mesh = piece_mesh(pieces, members)?;
            mesh.set_name(format!("group_{i}"));
            Ok(mesh)
        })
        .collect()
}

/// Volume and center of mass of one group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSummary {
    pub pieces: Vec<usize>,
    pub volume: f64,
    pub com: Point3,
}

pub fn summarize(groups: &GroupSet, pieces: &PieceSet) -> Vec<GroupSummary> {
    groups
        .groups
        .iter()
        .map(|members| {
            let mut volume = 0.0;
            let mut weighted = [0.0; 3];
            for &p in members {
                let piece = &pieces.pieces()[p];
                volume += piece.volume;
                for a in 0..3 {
                    weighted[a] += piece.com[a] * piece.volume;
                }
            }
            GroupSummary { pieces: members.clone(), volume, com: weighted.map(|w| w / volume) }
        })
        .collect()
}
