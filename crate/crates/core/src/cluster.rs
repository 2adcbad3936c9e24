//! Group-average hierarchical agglomerative clustering, plain and
//! constraint-aware.
//!
//! Both variants repeatedly merge the pair of clusters with the highest
//! group-average similarity (the mean of all cross-pair document
//! similarities, always recomputed from the document-level matrix). The
//! constrained variant first merges every must-link component, then refuses
//! any merge that would put a cannot-linked pair into one cluster: the
//! offending cluster pair's similarity is set to `-1`, which excludes it from
//! selection for good, and the loop ends when no pair with non-negative
//! similarity remains. Cannot-links are re-validated on every candidate
//! merge, so penalties survive the row rebuilds that follow merges.
//!
//! Ties on similarity break toward the lexicographically smallest cluster
//! index pair; clusters are kept ordered by their smallest document index, so
//! merge logs are fully deterministic.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::constraints::ConstraintSet;
use crate::error::{Error, Result};
use crate::similarity::SimilarityMatrix;

/// When plain agglomerative clustering stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Stop once exactly `k` clusters remain.
    TargetK(usize),
    /// Merge all the way down to a single cluster.
    MergeToOne,
}

/// One recorded merge: the two clusters (as sorted document indices) and the
/// group-average similarity that selected them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeRecord {
    pub step: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub sim: f64,
}

/// A flat cluster assignment. Cluster ids are contiguous `0..k`, numbered by
/// each cluster's smallest document index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    pub fn from_clusters(n_docs: usize, clusters: &[BTreeSet<usize>]) -> Partition {
        let mut order: Vec<&BTreeSet<usize>> = clusters.iter().collect();
        order.sort_by_key(|c| c.iter().next().copied());
        let mut assignment = vec![usize::MAX; n_docs];
        for (id, cluster) in order.iter().enumerate() {
            for &doc in *cluster {
                assignment[doc] = id;
            }
        }
        debug_assert!(assignment.iter().all(|&a| a != usize::MAX));
        Partition {
            assignment,
            k: clusters.len(),
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn n_docs(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Clusters as sorted documents lists, indexed by cluster id.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut clusters = vec![Vec::new(); self.k];
        for (doc, &c) in self.assignment.iter().enumerate() {
            clusters[c].push(doc);
        }
        clusters
    }

    /// JSON object mapping document id to cluster id.
    pub fn to_json(&self, doc_ids: &[String]) -> String {
        let map: std::collections::BTreeMap<&str, usize> = doc_ids
            .iter()
            .map(String::as_str)
            .zip(self.assignment.iter().copied())
            .collect();
        serde_json::to_string_pretty(&map).expect("partition serializes")
    }
}

/// The evolving state of an agglomerative run: current clusters (kept sorted
/// by smallest member), the active cluster-pair similarity table, and the
/// merge log.
pub struct ClusterState<'m> {
    matrix: &'m SimilarityMatrix,
    clusters: Vec<BTreeSet<usize>>,
    active: Vec<Vec<f64>>,
    merge_log: Vec<MergeRecord>,
    penalties: usize,
}

impl<'m> ClusterState<'m> {
    /// Singleton clusters over every document of the matrix.
    pub fn new(matrix: &'m SimilarityMatrix) -> Result<Self> {
        let n = matrix.n();
        if n == 0 {
            return Err(Error::InvalidInput("empty similarity matrix".into()));
        }
        let clusters: Vec<BTreeSet<usize>> = (0..n).map(|i| BTreeSet::from([i])).collect();
        let mut active = vec![vec![0.0; n]; n];
        for (i, row) in active.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = matrix.get(i, j);
            }
        }
        Ok(ClusterState {
            matrix,
            clusters,
            active,
            merge_log: Vec::new(),
            penalties: 0,
        })
    }

    pub fn clusters(&self) -> &[BTreeSet<usize>] {
        &self.clusters
    }

    pub fn merge_log(&self) -> &[MergeRecord] {
        &self.merge_log
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    fn group_average(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> f64 {
        let mut sum = 0.0;
        for &i in a {
            for &j in b {
                sum += self.matrix.get(i, j);
            }
        }
        sum / (a.len() * b.len()) as f64
    }

    /// The highest-similarity cluster pair, ties broken toward the smallest
    /// `(i, j)`. With `nonneg_only`, pairs below zero (penalized or not) are
    /// never candidates.
    fn max_pair(&self, nonneg_only: bool) -> Option<(usize, usize, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..self.clusters.len() {
            for j in (i + 1)..self.clusters.len() {
                let sim = self.active[i][j];
                if nonneg_only && sim < 0.0 {
                    continue;
                }
                if best.is_none_or(|(.., s)| sim > s) {
                    best = Some((i, j, sim));
                }
            }
        }
        best
    }

    /// Merge clusters at positions `i < j`, record the step, and recompute
    /// the merged cluster's row from the document-level matrix.
    fn merge(&mut self, i: usize, j: usize, sim: f64) {
        let b = self.clusters.remove(j);
        let record = MergeRecord {
            step: self.merge_log.len(),
            a: self.clusters[i].iter().copied().collect(),
            b: b.iter().copied().collect(),
            sim,
        };
        self.merge_log.push(record);
        self.clusters[i].extend(b);

        for row in self.active.iter_mut() {
            row.remove(j);
        }
        self.active.remove(j);
        for k in 0..self.clusters.len() {
            if k != i {
                let s = self.group_average(&self.clusters[i], &self.clusters[k]);
                self.active[i][k] = s;
                self.active[k][i] = s;
            }
        }
    }

    fn penalize(&mut self, i: usize, j: usize) {
        self.active[i][j] = -1.0;
        self.active[j][i] = -1.0;
        self.penalties += 1;
    }

    /// Merge every must-link component into one cluster before any
    /// similarity-driven merge, then rebuild the whole active table. These
    /// merges are setup, not selections, so they are not logged.
    pub fn apply_ml(&mut self, ml: &BTreeSet<(usize, usize)>) {
        if ml.is_empty() {
            return;
        }
        self.clusters = ml_initial_clusters(self.matrix.n(), ml);
        let k = self.clusters.len();
        self.active = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in (i + 1)..k {
                let s = self.group_average(&self.clusters[i], &self.clusters[j]);
                self.active[i][j] = s;
                self.active[j][i] = s;
            }
        }
    }

    pub fn partition(&self) -> Partition {
        Partition::from_clusters(self.matrix.n(), &self.clusters)
    }
}

/// Starting clusters for a constrained run: one cluster per must-link
/// component, singletons for unconstrained documents, ordered by smallest
/// member.
pub fn ml_initial_clusters(n_docs: usize, ml: &BTreeSet<(usize, usize)>) -> Vec<BTreeSet<usize>> {
    let mut parent: Vec<usize> = (0..n_docs).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in ml {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut by_root: std::collections::BTreeMap<usize, BTreeSet<usize>> = Default::default();
    for doc in 0..n_docs {
        by_root.entry(find(&mut parent, doc)).or_default().insert(doc);
    }
    // keying by each component's minimum orders clusters by smallest member
    let by_min: std::collections::BTreeMap<usize, BTreeSet<usize>> = by_root
        .into_values()
        .map(|c| (*c.iter().next().expect("non-empty component"), c))
        .collect();
    by_min.into_values().collect()
}

/// True iff merging `a` and `b` would not put any cannot-linked pair into the
/// same cluster.
pub fn validate_cl(
    a: &BTreeSet<usize>,
    b: &BTreeSet<usize>,
    cl: &BTreeSet<(usize, usize)>,
) -> bool {
    if cl.is_empty() {
        return true;
    }
    for &x in a {
        for &y in b {
            let pair = if x <= y { (x, y) } else { (y, x) };
            if cl.contains(&pair) {
                return false;
            }
        }
    }
    true
}

/// Plain group-average agglomerative clustering. Returns the merge log and
/// the final partition.
pub fn hac(matrix: &SimilarityMatrix, stop: StopRule) -> Result<(Vec<MergeRecord>, Partition)> {
    let mut state = ClusterState::new(matrix)?;
    let target = match stop {
        StopRule::MergeToOne => 1,
        StopRule::TargetK(k) => {
            if k == 0 || k > matrix.n() {
                return Err(Error::InvalidInput(format!(
                    "target k = {k} outside 1..={}",
                    matrix.n()
                )));
            }
            k
        }
    };
    while state.len() > target {
        let (i, j, sim) = state.max_pair(false).expect("at least two clusters remain");
        state.merge(i, j, sim);
    }
    let partition = state.partition();
    Ok((state.merge_log, partition))
}

/// Constraint-aware agglomerative clustering. `constraints` must be closed
/// and consistent. Must-link components are merged up front; thereafter the
/// loop selects the most similar cluster pair with non-negative similarity,
/// penalizes it with `-1` when the merge would violate a cannot-link, and
/// merges it otherwise. The run ends when nothing mergeable remains, so the
/// result satisfies every constraint.
pub fn constrained_hac(
    matrix: &SimilarityMatrix,
    constraints: &ConstraintSet<usize>,
) -> Result<(Vec<MergeRecord>, Partition)> {
    let (log, partition, _) = constrained_hac_with_stats(matrix, constraints)?;
    Ok((log, partition))
}

/// Counters describing one constrained run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstrainedStats {
    pub merges: usize,
    pub penalties: usize,
}

/// [`constrained_hac`] variant that also reports merge and penalty counts
/// (each loop iteration does exactly one of the two, which bounds the run).
pub fn constrained_hac_with_stats(
    matrix: &SimilarityMatrix,
    constraints: &ConstraintSet<usize>,
) -> Result<(Vec<MergeRecord>, Partition, ConstrainedStats)> {
    if !constraints.is_closed() {
        return Err(Error::InvalidInput(
            "constraints must be transitively closed before clustering".into(),
        ));
    }
    let conflicts = constraints.check_consistency();
    if !conflicts.is_empty() {
        return Err(Error::InconsistentConstraints(format!(
            "{} pair(s) are both must-link and cannot-link, e.g. {:?}",
            conflicts.len(),
            conflicts[0]
        )));
    }
    let n = matrix.n();
    if let Some(&(_, b)) = constraints
        .ml()
        .iter()
        .chain(constraints.cl().iter())
        .find(|&&(_, b)| b >= n)
    {
        return Err(Error::InvalidInput(format!(
            "constraint references document index {b}, matrix has {n}"
        )));
    }

    let mut state = ClusterState::new(matrix)?;
    state.apply_ml(constraints.ml());

    while let Some((i, j, sim)) = state.max_pair(true) {
        if validate_cl(&state.clusters[i], &state.clusters[j], constraints.cl()) {
            state.merge(i, j, sim);
        } else {
            state.penalize(i, j);
        }
    }

    let partition = state.partition();
    debug_assert!(constraints
        .cl()
        .iter()
        .all(|&(x, y)| partition.assignment()[x] != partition.assignment()[y]));
    debug_assert!(constraints
        .ml()
        .iter()
        .all(|&(x, y)| partition.assignment()[x] == partition.assignment()[y]));
    let stats = ConstrainedStats {
        merges: state.merge_log.len(),
        penalties: state.penalties,
    };
    Ok((state.merge_log, partition, stats))
}

/// Replay recorded merges from a given starting state until `k` clusters
/// remain or the log is exhausted, whichever comes first.
pub fn replay_merges(
    initial: Vec<BTreeSet<usize>>,
    log: &[MergeRecord],
    k: usize,
) -> Partition {
    let n_docs: usize = initial.iter().map(BTreeSet::len).sum();
    let mut clusters = initial;
    for record in log {
        if clusters.len() <= k {
            break;
        }
        let pos_a = clusters
            .iter()
            .position(|c| c.contains(&record.a[0]))
            .expect("merge log references unknown document");
        let pos_b = clusters
            .iter()
            .position(|c| c.contains(&record.b[0]))
            .expect("merge log references unknown document");
        debug_assert_ne!(pos_a, pos_b, "merge log disagrees with starting state");
        let (keep, drop) = (pos_a.min(pos_b), pos_a.max(pos_b));
        let removed = clusters.remove(drop);
        clusters[keep].extend(removed);
    }
    Partition::from_clusters(n_docs, &clusters)
}

/// Cut a plain-HAC merge log at `k` clusters by replaying its merges over
/// singleton leaves.
pub fn cut_dendrogram(n_docs: usize, log: &[MergeRecord], k: usize) -> Result<Partition> {
    if k == 0 || k > n_docs {
        return Err(Error::InvalidInput(format!(
            "cut k = {k} outside 1..={n_docs}"
        )));
    }
    let singletons: Vec<BTreeSet<usize>> = (0..n_docs).map(|i| BTreeSet::from([i])).collect();
    let partition = replay_merges(singletons, log, k);
    if partition.k() != k {
        return Err(Error::InvalidInput(format!(
            "merge log exhausted at {} clusters before reaching k = {k}",
            partition.k()
        )));
    }
    Ok(partition)
}

/// Serialize a merge log as JSON lines with document ids substituted for
/// indices.
pub fn merge_log_to_jsonl(log: &[MergeRecord], doc_ids: &[String]) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        step: usize,
        a: Vec<&'a str>,
        b: Vec<&'a str>,
        sim: f64,
    }
    let mut out = String::new();
    for record in log {
        let row = Row {
            step: record.step,
            a: record.a.iter().map(|&i| doc_ids[i].as_str()).collect(),
            b: record.b.iter().map(|&i| doc_ids[i].as_str()).collect(),
            sim: record.sim,
        };
        out.push_str(&serde_json::to_string(&row).expect("merge record serializes"));
        out.push('\n');
    }
    out
}
