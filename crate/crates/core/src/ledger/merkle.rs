//! Binary SHA-256 Merkle tree over voter commitments.
//!
//! Leaves are `H(0x03 ‖ cm)`, inner nodes `H(0x04 ‖ left ‖ right)`. A level
//! with an odd number of nodes pairs its last node with itself.

use crate::hash::{self, tag, Hash32};

/// Root of a tree with no leaves.
pub const EMPTY_ROOT: Hash32 = [0u8; 32];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PathStep {
    pub sibling: Hash32,
    /// The sibling sits to the left of the running hash.
    pub sibling_on_left: bool,
}

pub fn leaf_hash(cm: &Hash32) -> Hash32 {
    hash::tagged(tag::MERKLE_LEAF, &[cm])
}

pub fn node_hash(left: &Hash32, right: &Hash32) -> Hash32 {
    hash::tagged(tag::MERKLE_NODE, &[left, right])
}

/// Fold an authentication path from a commitment up to a root.
pub fn fold_path(cm: &Hash32, path: &[PathStep]) -> Hash32 {
    path.iter().fold(leaf_hash(cm), |acc, step| {
        if step.sibling_on_left {
            node_hash(&step.sibling, &acc)
        } else {
            node_hash(&acc, &step.sibling)
        }
    })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MerkleTree {
    leaves: Vec<Hash32>,
    /// `levels[0]` holds leaf hashes, the last level holds the root.
    levels: Vec<Vec<Hash32>>,
}

impl MerkleTree {
    pub fn new(leaves: Vec<Hash32>) -> Self {
        let mut levels = Vec::new();
        if !leaves.is_empty() {
            let mut level: Vec<Hash32> = leaves.iter().map(leaf_hash).collect();
            while level.len() > 1 {
                let next = level
                    .chunks(2)
                    .map(|pair| node_hash(&pair[0], pair.get(1).unwrap_or(&pair[0])))
                    .collect();
                levels.push(std::mem::replace(&mut level, next));
            }
            levels.push(level);
        }
        Self { leaves, levels }
    }

    pub fn leaves(&self) -> &[Hash32] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn root(&self) -> Hash32 {
        self.levels.last().map_or(EMPTY_ROOT, |top| top[0])
    }

    pub fn position(&self, cm: &Hash32) -> Option<usize> {
        self.leaves.iter().position(|leaf| leaf == cm)
    }

    /// Authentication path for the leaf at `index`.
    pub fn path(&self, index: usize) -> Option<Vec<PathStep>> {
        if index >= self.leaves.len() {
            return None;
        }
        let mut idx = index;
        let mut path = Vec::with_capacity(self.levels.len().saturating_sub(1));
        for level in &self.levels[..self.levels.len() - 1] {
            let sibling_idx = idx ^ 1;
            let sibling = *level.get(sibling_idx).unwrap_or(&level[idx]);
            path.push(PathStep {
                sibling,
                sibling_on_left: idx % 2 == 1,
            });
            idx /= 2;
        }
        Some(path)
    }

    pub fn path_for(&self, cm: &Hash32) -> Option<Vec<PathStep>> {
        self.position(cm).and_then(|i| self.path(i))
    }
}
