use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partition of the sector indices `1..=N` with no interleaved blocks.
///
/// Indices are 1-based, matching the numbering of the sectors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct NoncrossingPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl TryFrom<PartitionRepr> for NoncrossingPartition {
    type Error = Error;
    fn try_from(r: PartitionRepr) -> Result<Self> {
        Self::new(r.n, r.blocks)
    }
}

impl From<NoncrossingPartition> for PartitionRepr {
    fn from(p: NoncrossingPartition) -> Self {
        Self {
            n: p.n,
            blocks: p.blocks,
        }
    }
}

impl NoncrossingPartition {
    /// Validates that `blocks` partition `1..=n`, are noncrossing and that at
    /// least one block has two or more elements. Singletons may be omitted.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut blocks = complete_with_singletons(n, blocks)?;
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort();
        if let Some((a, b)) = find_crossing(&blocks) {
            return Err(Error::CrossingPartition(a, b));
        }
        let p = Self { n, blocks };
        if p.nontrivial_blocks().next().is_none() {
            return Err(Error::Validation(
                "partition needs at least one block with two or more sectors".into(),
            ));
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Blocks with at least two elements; each one becomes a contour component.
    pub fn nontrivial_blocks(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.blocks.iter().filter(|b| b.len() >= 2)
    }

    pub fn block_of(&self, j: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&j))
    }
}

fn complete_with_singletons(n: usize, blocks: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    let mut seen = vec![false; n + 1];
    for b in &blocks {
        if b.is_empty() {
            return Err(Error::Validation("empty block in partition".into()));
        }
        for &j in b {
            if j == 0 || j > n {
                return Err(Error::Validation(format!(
                    "sector index {j} outside 1..={n}"
                )));
            }
            if seen[j] {
                return Err(Error::Validation(format!(
                    "sector index {j} appears in two blocks"
                )));
            }
            seen[j] = true;
        }
    }
    let mut blocks = blocks;
    blocks.extend((1..=n).filter(|&j| !seen[j]).map(|j| vec![j]));
    Ok(blocks)
}

fn find_crossing(blocks: &[Vec<usize>]) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = blocks.iter().flatten().copied().max().unwrap_or(0);
    let mut label = vec![usize::MAX; n + 1];
    for (b, block) in blocks.iter().enumerate() {
        for &j in block {
            label[j] = b;
        }
    }
    for j in 1..=n {
        for k in j + 1..=n {
            for jp in k + 1..=n {
                if label[jp] != label[j] || label[k] == label[j] {
                    continue;
                }
                for kp in jp + 1..=n {
                    if label[kp] == label[k] {
                        return Some((blocks[label[j]].clone(), blocks[label[k]].clone()));
                    }
                }
            }
        }
    }
    None
}

/// `true` iff no quadruple `j < k < j' < k'` has `j ~ j'`, `k ~ k'` in
/// different blocks. Fails if `blocks` is not a partition of `1..=n`.
pub fn is_noncrossing(blocks: &[Vec<usize>], n: usize) -> Result<bool> {
    let total: usize = blocks.iter().map(Vec::len).sum();
    let completed = complete_with_singletons(n, blocks.to_vec())?;
    if total != n {
        return Err(Error::Validation(format!(
            "blocks cover {total} of {n} sector indices"
        )));
    }
    Ok(find_crossing(&completed).is_none())
}
