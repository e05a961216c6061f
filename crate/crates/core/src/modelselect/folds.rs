use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::panel::ClusterAssignment;

/// Assignment of whole clusters to `k` validation folds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldPlan {
    k: usize,
    seed: u64,
    keys: Vec<String>,
    /// Fold of each cluster, aligned with `keys`.
    fold_of: Vec<usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fold_of_key(&self, key: &str) -> Option<usize> {
        self.keys.binary_search_by(|k| k.as_str().cmp(key)).ok().map(|i| self.fold_of[i])
    }

    /// Cluster keys in each fold.
    pub fn folds(&self) -> Vec<Vec<&str>> {
        let mut out = vec![Vec::new(); self.k];
        for (key, &f) in self.keys.iter().zip(&self.fold_of) {
            out[f].push(key.as_str());
        }
        out
    }

    /// Fold of every row of `clusters`, which must be the assignment the plan was made from.
    pub fn row_folds(&self, clusters: &ClusterAssignment) -> Vec<usize> {
        assert_eq!(clusters.keys(), self.keys.as_slice(), "plan built from different clusters");
        clusters.membership().iter().map(|&g| self.fold_of[g]).collect()
    }
}

/// Shuffles the clusters with a seeded generator and deals them round-robin into `k` folds.
pub fn make_folds(clusters: &ClusterAssignment, k: usize, seed: u64) -> Result<FoldPlan> {
    let g = clusters.n_clusters();
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > g {
        return Err(Error::invalid(format!("{k} folds requested but only {g} clusters")));
    }
    let mut order: Vec<usize> = (0..g).collect();
    order.shuffle(&mut crate::rng::rng(seed));
    let mut fold_of = vec![0; g];
    for (pos, &c) in order.iter().enumerate() {
        fold_of[c] = pos % k;
    }
    Ok(FoldPlan {
        k,
        seed,
        keys: clusters.keys().to_vec(),
        fold_of,
    })
}
