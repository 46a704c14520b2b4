use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{DatasetEntry, SecurityType, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn new(train: usize, valid: usize, test: usize) -> Self {
        SplitSizes { train, valid, test }
    }

    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }

    fn as_array(&self) -> [usize; 3] {
        [self.train, self.valid, self.test]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SplitError {
    #[error("split sizes sum to {requested} but there are {available} entries")]
    SizeMismatch { requested: usize, available: usize },
}

/// Recorded as the first line of a split file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitHeader {
    pub seed: u64,
    pub sizes: SplitSizes,
    /// Per-type counts assigned to train, valid and test.
    pub allocation: BTreeMap<SecurityType, [usize; 3]>,
}

/// Stratified split. Per-type counts are the proportional quotas rounded
/// so that every row (type) and column (split) total is exact and every cell
/// is within one of its quota. Membership within a type is a seeded shuffle.
/// Output is sorted by id.
pub fn split_dataset(
    mut entries: Vec<DatasetEntry>,
    sizes: SplitSizes,
    seed: u64,
) -> Result<(Vec<DatasetEntry>, SplitHeader), SplitError> {
    if sizes.total() != entries.len() {
        return Err(SplitError::SizeMismatch { requested: sizes.total(), available: entries.len() });
    }
    let mut counts = [0usize; 8];
    for e in &entries {
        counts[e.security_type.index()] += 1;
    }
    let alloc = allocate(&counts, sizes.as_array());

    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let mut by_type: [Vec<usize>; 8] = Default::default();
    for (i, e) in entries.iter().enumerate() {
        by_type[e.security_type.index()].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (t, members) in by_type.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        let mut cursor = members.iter();
        for (j, split) in Split::ALL.iter().enumerate() {
            for &i in cursor.by_ref().take(alloc[t][j]) {
                entries[i].split = Some(*split);
            }
        }
    }
    let allocation = SecurityType::ALL
        .iter()
        .filter(|t| counts[t.index()] > 0)
        .map(|&t| (t, alloc[t.index()]))
        .collect();
    Ok((entries, SplitHeader { seed, sizes, allocation }))
}

/// Rounds the quota matrix `counts[t] * sizes[j] / total` to integers with
/// exact row and column sums. Floors are taken first; the leftover units
/// are placed on cells with a fractional quota by a max-flow over the
/// bipartite (type, split) graph, which always has a full solution.
pub(crate) fn allocate(counts: &[usize; 8], sizes: [usize; 3]) -> [[usize; 3]; 8] {
    let total: usize = counts.iter().sum();
    let mut alloc = [[0usize; 3]; 8];
    if total == 0 {
        return alloc;
    }
    let mut frac = [[false; 3]; 8];
    for t in 0..8 {
        for j in 0..3 {
            let num = counts[t] as u128 * sizes[j] as u128;
            alloc[t][j] = (num / total as u128) as usize;
            frac[t][j] = num % total as u128 != 0;
        }
    }
    let row_left: Vec<usize> = (0..8).map(|t| counts[t] - alloc[t].iter().sum::<usize>()).collect();
    let col_left: Vec<usize> = (0..3).map(|j| sizes[j] - (0..8).map(|t| alloc[t][j]).sum::<usize>()).collect();

    // nodes: 0 source, 1..=8 types, 9..=11 splits, 12 sink
    const N: usize = 13;
    let mut cap = [[0usize; N]; N];
    for t in 0..8 {
        cap[0][1 + t] = row_left[t];
        for j in 0..3 {
            if frac[t][j] {
                cap[1 + t][9 + j] = 1;
            }
        }
    }
    for j in 0..3 {
        cap[9 + j][12] = col_left[j];
    }
    let mut flow = [[0usize; N]; N];
    loop {
        let mut prev = [usize::MAX; N];
        prev[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for v in 0..N {
                let residual = cap[u][v] - flow[u][v] + flow[v][u];
                if prev[v] == usize::MAX && residual > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[12] == usize::MAX {
            break;
        }
        let mut v = 12;
        while v != 0 {
            let u = prev[v];
            if flow[v][u] > 0 {
                flow[v][u] -= 1;
            } else {
                flow[u][v] += 1;
            }
            v = u;
        }
    }
    for t in 0..8 {
        for j in 0..3 {
            alloc[t][j] += flow[1 + t][9 + j];
        }
    }
    debug_assert!((0..8).all(|t| alloc[t].iter().sum::<usize>() == counts[t]));
    debug_assert!((0..3).all(|j| (0..8).map(|t| alloc[t][j]).sum::<usize>() == sizes[j]));
    alloc
}
