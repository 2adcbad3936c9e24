//! Instance-level must-link / cannot-link constraint sets.
//!
//! Constraints are unordered pairs of document ids. Before clustering, a set
//! is transitively closed: must-link is an equivalence closure (union-find),
//! and a cannot-link between any two members of different must-link
//! components propagates to every cross pair of those components. Cannot-link
//! is deliberately *not* transitive through cannot-link — forbidding (a, b)
//! and (b, c) says nothing about (a, c).
//!
//! A pair that ends up in both sets makes the whole set inconsistent;
//! closure then aborts with the offending pair and its derivation rather
//! than silently repairing annotations.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Display;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

fn ordered<Id: Ord>(a: Id, b: Id) -> (Id, Id) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Must-link and cannot-link pairs over document ids (`String` for parsed
/// files, `usize` once resolved against a similarity matrix).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet<Id: Ord + Clone = String> {
    ml: BTreeSet<(Id, Id)>,
    cl: BTreeSet<(Id, Id)>,
    closed: bool,
}

impl<Id: Ord + Clone + Display> ConstraintSet<Id> {
    pub fn new() -> Self {
        ConstraintSet {
            ml: BTreeSet::new(),
            cl: BTreeSet::new(),
            closed: false,
        }
    }

    pub fn add_ml(&mut self, a: Id, b: Id) -> Result<()> {
        if a == b {
            return Err(Error::InvalidInput(format!("self-pair ({a}, {b})")));
        }
        self.ml.insert(ordered(a, b));
        self.closed = false;
        Ok(())
    }

    pub fn add_cl(&mut self, a: Id, b: Id) -> Result<()> {
        if a == b {
            return Err(Error::InvalidInput(format!("self-pair ({a}, {b})")));
        }
        self.cl.insert(ordered(a, b));
        self.closed = false;
        Ok(())
    }

    pub fn ml(&self) -> &BTreeSet<(Id, Id)> {
        &self.ml
    }

    pub fn cl(&self) -> &BTreeSet<(Id, Id)> {
        &self.cl
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_empty(&self) -> bool {
        self.ml.is_empty() && self.cl.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ml.len() + self.cl.len()
    }

    fn all_ids(&self) -> BTreeSet<Id> {
        self.ml
            .iter()
            .chain(self.cl.iter())
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect()
    }

    /// Must-link components as sorted member lists, covering every id that
    /// appears in the set (ids seen only in cannot-links are singletons).
    fn ml_components(&self) -> Vec<Vec<Id>> {
        let ids: Vec<Id> = self.all_ids().into_iter().collect();
        let index: BTreeMap<&Id, usize> = ids.iter().enumerate().map(|(i, id)| (id, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (a, b) in &self.ml {
            let (ra, rb) = (find(&mut parent, index[a]), find(&mut parent, index[b]));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut components: BTreeMap<usize, Vec<Id>> = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            components.entry(find(&mut parent, i)).or_default().push(id.clone());
        }
        components.into_values().collect()
    }

    /// Close the set without checking for conflicts: the result may contain
    /// pairs present in both `ml` and `cl`. [`Self::transitive_closure`] is
    /// the checked entry point.
    pub fn transitive_closure_unchecked(&self) -> ConstraintSet<Id> {
        let components = self.ml_components();
        let mut comp_of: BTreeMap<Id, usize> = BTreeMap::new();
        for (ci, members) in components.iter().enumerate() {
            for m in members {
                comp_of.insert(m.clone(), ci);
            }
        }

        let mut ml = BTreeSet::new();
        for members in &components {
            for i in 0..members.len() {
                for j in (i + 1)..members.len() {
                    ml.insert(ordered(members[i].clone(), members[j].clone()));
                }
            }
        }

        let mut cl = BTreeSet::new();
        let mut linked_components: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (a, b) in &self.cl {
            linked_components.insert(ordered(comp_of[a], comp_of[b]));
        }
        for (ca, cb) in linked_components {
            for x in &components[ca] {
                for y in &components[cb] {
                    if x != y {
                        cl.insert(ordered(x.clone(), y.clone()));
                    }
                }
            }
        }

        ConstraintSet { ml, cl, closed: true }
    }

    /// Transitively close the set. Fails when the closure derives some pair
    /// as both must-link and cannot-link; the error spells out how the
    /// contradiction arises.
    pub fn transitive_closure(&self) -> Result<ConstraintSet<Id>> {
        let closed = self.transitive_closure_unchecked();
        let conflicts = closed.check_consistency();
        if let Some((a, b)) = conflicts.first() {
            let mut detail = format!(
                "{} pair(s) derived as both must-link and cannot-link; first: ({a}, {b})",
                conflicts.len()
            );
            if let Some(chain) = self.derivation(a, b) {
                detail.push_str(&format!("; {chain}"));
            }
            return Err(Error::InconsistentConstraints(detail));
        }
        Ok(closed)
    }

    /// Every pair present in both `ml` and `cl` (empty means consistent).
    pub fn check_consistency(&self) -> Vec<(Id, Id)> {
        self.ml.intersection(&self.cl).cloned().collect()
    }

    /// Shortest must-link path between two ids over the raw (pre-closure)
    /// pairs, if one exists.
    fn ml_path(&self, from: &Id, to: &Id) -> Option<Vec<Id>> {
        if from == to {
            return Some(vec![from.clone()]);
        }
        let mut adjacency: BTreeMap<&Id, Vec<&Id>> = BTreeMap::new();
        for (a, b) in &self.ml {
            adjacency.entry(a).or_default().push(b);
            adjacency.entry(b).or_default().push(a);
        }
        let mut previous: BTreeMap<&Id, &Id> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            for &next in adjacency.get(node).into_iter().flatten() {
                if next != from && !previous.contains_key(next) {
                    previous.insert(next, node);
                    if next == to {
                        let mut path = vec![to.clone()];
                        let mut cursor = next;
                        while let Some(&p) = previous.get(cursor) {
                            path.push(p.clone());
                            cursor = p;
                        }
                        path.reverse();
                        return Some(path);
                    }
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Human-readable explanation of why (a, b) is derived as both must-link
    /// and cannot-link.
    fn derivation(&self, a: &Id, b: &Id) -> Option<String> {
        let ml_chain = self
            .ml_path(a, b)
            .map(|p| p.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(" ~ "))?;
        // find the raw cannot-link responsible: endpoints must-link-reachable
        // from a and b respectively
        for (c, d) in &self.cl {
            for (x, y) in [(c, d), (d, c)] {
                if let (Some(pa), Some(pb)) = (self.ml_path(a, x), self.ml_path(b, y)) {
                    let fmt = |p: Vec<Id>| {
                        p.iter().map(|id| id.to_string()).collect::<Vec<_>>().join(" ~ ")
                    };
                    return Some(format!(
                        "must-link chain: {ml_chain}; cannot-link {x} / {y} reaches the pair via {} and {}",
                        fmt(pa),
                        fmt(pb)
                    ));
                }
            }
        }
        Some(format!("must-link chain: {ml_chain}"))
    }
}

/// Parse a constraint file: one `ML <id> <id>` or `CL <id> <id>` per line,
/// blank lines and `#` comments ignored. Ids must exist in `known_ids`.
pub fn parse_constraints(
    content: &str,
    file: &str,
    known_ids: &BTreeSet<String>,
) -> Result<ConstraintSet<String>> {
    let mut set = ConstraintSet::new();
    for (idx, raw) in content.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| Error::ParseLine {
            file: file.to_string(),
            line: line_no,
            msg,
        };
        if fields.len() != 3 {
            return Err(err(format!(
                "expected 'ML <id> <id>' or 'CL <id> <id>', found {} field(s)",
                fields.len()
            )));
        }
        let (a, b) = (fields[1].to_string(), fields[2].to_string());
        if a == b {
            return Err(err(format!("self-pair ({a}, {b})")));
        }
        for id in [&a, &b] {
            if !known_ids.contains(id) {
                return Err(err(format!("unknown document id '{id}'")));
            }
        }
        match fields[0] {
            "ML" => set.add_ml(a, b)?,
            "CL" => set.add_cl(a, b)?,
            other => return Err(err(format!("unknown constraint kind '{other}'"))),
        }
    }
    Ok(set)
}

/// Read and parse a constraint file from disk.
pub fn parse_constraints_file(path: &Path, known_ids: &BTreeSet<String>) -> Result<ConstraintSet<String>> {
    let content = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_constraints(&content, &path.to_string_lossy(), known_ids)
}

/// Sample `floor(fraction * n*(n-1)/2)` distinct document pairs uniformly and
/// type each by the ground-truth labels: same label becomes must-link,
/// different labels cannot-link. Deterministic for a fixed seed; the result
/// is raw (not yet closed).
pub fn sample_oracle_constraints<Id, L>(
    labels: &BTreeMap<Id, L>,
    fraction: f64,
    seed: u64,
) -> ConstraintSet<Id>
where
    Id: Ord + Clone + Display,
    L: Eq,
{
    let fraction = fraction.clamp(0.0, 1.0);
    let ids: Vec<&Id> = labels.keys().collect();
    let mut pairs = Vec::new();
    for i in 0..ids.len() {
        for j in (i + 1)..ids.len() {
            pairs.push((ids[i], ids[j]));
        }
    }
    let count = (fraction * pairs.len() as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, pairs.len(), count.min(pairs.len()));

    let mut set = ConstraintSet::new();
    for idx in chosen.iter() {
        let (a, b) = pairs[idx];
        if labels[a] == labels[b] {
            set.ml.insert(ordered(a.clone(), b.clone()));
        } else {
            set.cl.insert(ordered(a.clone(), b.clone()));
        }
    }
    set
}

/// Resolve id-level constraints to matrix indices.
pub fn index_constraints(
    set: &ConstraintSet<String>,
    doc_ids: &[String],
) -> Result<ConstraintSet<usize>> {
    let index: BTreeMap<&str, usize> = doc_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let resolve = |pairs: &BTreeSet<(String, String)>| -> Result<BTreeSet<(usize, usize)>> {
        pairs
            .iter()
            .map(|(a, b)| {
                let ia = *index.get(a.as_str()).ok_or_else(|| Error::UnknownDocId(a.clone()))?;
                let ib = *index.get(b.as_str()).ok_or_else(|| Error::UnknownDocId(b.clone()))?;
                Ok(ordered(ia, ib))
            })
            .collect()
    };
    Ok(ConstraintSet {
        ml: resolve(&set.ml)?,
        cl: resolve(&set.cl)?,
        closed: set.closed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set_of(ml: &[(u32, u32)], cl: &[(u32, u32)]) -> ConstraintSet<u32> {
        let mut s = ConstraintSet::new();
        for &(a, b) in ml {
            s.add_ml(a, b).unwrap();
        }
        for &(a, b) in cl {
            s.add_cl(a, b).unwrap();
        }
        s
    }

    /// Fixed-point closure by naive repeated expansion, used as the oracle.
    fn brute_force_closure(set: &ConstraintSet<u32>) -> ConstraintSet<u32> {
        let mut ml = set.ml().clone();
        let mut cl = set.cl().clone();
        loop {
            let mut changed = false;
            let ml_snapshot: Vec<_> = ml.iter().cloned().collect();
            for &(a, b) in &ml_snapshot {
                for &(c, d) in &ml_snapshot {
                    for (x, y) in [(a, b), (b, a)] {
                        for (u, v) in [(c, d), (d, c)] {
                            if y == u && x != v {
                                changed |= ml.insert(ordered(x, v));
                            }
                        }
                    }
                }
            }
            let cl_snapshot: Vec<_> = cl.iter().cloned().collect();
            for &(a, b) in &ml_snapshot {
                for &(c, d) in &cl_snapshot {
                    for (x, y) in [(a, b), (b, a)] {
                        for (u, v) in [(c, d), (d, c)] {
                            if y == u && x != v {
                                changed |= cl.insert(ordered(x, v));
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        ConstraintSet { ml, cl, closed: true }
    }

    #[test]
    fn parse_basic_file() {
        let known: BTreeSet<String> = ["d1", "d2", "d3"].iter().map(|s| s.to_string()).collect();
        let set = parse_constraints("ML d1 d2\nCL d1 d3\n", "c.txt", &known).unwrap();
        assert_eq!(set.ml().len(), 1);
        assert!(set.ml().contains(&("d1".to_string(), "d2".to_string())));
        assert!(set.cl().contains(&("d1".to_string(), "d3".to_string())));
        assert!(!set.is_closed());
    }

    #[test]
    fn parse_empty_and_comments() {
        let known: BTreeSet<String> = ["d1", "d2"].iter().map(|s| s.to_string()).collect();
        let set = parse_constraints("# nothing here\n\n", "c.txt", &known).unwrap();
        assert!(set.is_empty());
        let set = parse_constraints("ML d1 d2 # trailing note\n", "c.txt", &known).unwrap();
        assert_eq!(set.ml().len(), 1);
    }

    #[test]
    fn parse_normalizes_pair_order() {
        let known: BTreeSet<String> = ["d1", "d2"].iter().map(|s| s.to_string()).collect();
        let set = parse_constraints("ML d2 d1\nML d1 d2\n", "c.txt", &known).unwrap();
        assert_eq!(set.ml().len(), 1);
    }

    #[test]
    fn parse_rejects_bad_lines() {
        let known: BTreeSet<String> = ["d1", "d2"].iter().map(|s| s.to_string()).collect();
        for (content, expect_line) in [
            ("ML d1\n", 1),
            ("XX d1 d2\n", 1),
            ("ML d1 d2\nML d1 d1\n", 2),
            ("ML d1 nope\n", 1),
        ] {
            match parse_constraints(content, "c.txt", &known).unwrap_err() {
                Error::ParseLine { line, .. } => assert_eq!(line, expect_line, "{content:?}"),
                other => panic!("unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn closure_of_empty_set_is_empty() {
        let closed = set_of(&[], &[]).transitive_closure().unwrap();
        assert!(closed.is_empty());
        assert!(closed.is_closed());
    }

    #[test]
    fn ml_transitivity() {
        let closed = set_of(&[(1, 2), (2, 3)], &[]).transitive_closure().unwrap();
        assert!(closed.ml().contains(&(1, 3)));
        assert_eq!(closed.ml().len(), 3);
    }

    #[test]
    fn cl_propagates_through_ml() {
        let closed = set_of(&[(1, 2)], &[(2, 3)]).transitive_closure().unwrap();
        assert!(closed.cl().contains(&(1, 3)));
        assert_eq!(closed.cl().len(), 2);
    }

    #[test]
    fn cl_is_not_transitive_through_cl() {
        let closed = set_of(&[], &[(1, 2), (2, 3)]).transitive_closure().unwrap();
        assert!(!closed.cl().contains(&(1, 3)));
    }

    #[test]
    fn closure_is_idempotent() {
        let closed = set_of(&[(1, 2), (2, 3), (5, 6)], &[(3, 5), (7, 8)])
            .transitive_closure()
            .unwrap();
        let again = closed.transitive_closure().unwrap();
        assert_eq!(closed, again);
    }

    #[test]
    fn direct_conflict_is_detected() {
        let set = set_of(&[(1, 2)], &[(1, 2)]);
        assert!(matches!(
            set.transitive_closure().unwrap_err(),
            Error::InconsistentConstraints(_)
        ));
        let closed = set.transitive_closure_unchecked();
        assert_eq!(closed.check_consistency(), vec![(1, 2)]);
    }

    #[test]
    fn derived_conflict_is_detected_with_chain() {
        let set = set_of(&[(1, 2), (2, 3)], &[(1, 3)]);
        let err = set.transitive_closure().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("must-link chain"), "{msg}");
        assert!(msg.contains("cannot-link"), "{msg}");
        // the cannot-link spreads over the whole must-link component, so
        // every intra-component pair conflicts, the original one included
        let conflicts = set.transitive_closure_unchecked().check_consistency();
        assert!(conflicts.contains(&(1, 3)));
        assert_eq!(conflicts.len(), 3);
    }

    #[test]
    fn consistent_set_reports_ok() {
        let closed = set_of(&[(1, 2)], &[(3, 4)]).transitive_closure().unwrap();
        assert!(closed.check_consistency().is_empty());
    }

    #[test]
    fn oracle_fraction_zero_is_empty() {
        let labels: BTreeMap<u32, &str> = [(1, "a"), (2, "a"), (3, "b")].into();
        assert!(sample_oracle_constraints(&labels, 0.0, 9).is_empty());
    }

    #[test]
    fn oracle_fraction_one_types_all_pairs() {
        let labels: BTreeMap<u32, &str> = [(1, "a"), (2, "a"), (3, "b")].into();
        let set = sample_oracle_constraints(&labels, 1.0, 9);
        assert_eq!(set.ml(), &[(1, 2)].into());
        assert_eq!(set.cl(), &[(1, 3), (2, 3)].into());
    }

    #[test]
    fn oracle_is_seed_deterministic() {
        let labels: BTreeMap<u32, u32> = (0..12).map(|i| (i, i % 3)).collect();
        let a = sample_oracle_constraints(&labels, 0.4, 1234);
        let b = sample_oracle_constraints(&labels, 0.4, 1234);
        assert_eq!(a, b);
        let c = sample_oracle_constraints(&labels, 0.4, 1235);
        assert_ne!(a, c);
    }

    #[test]
    fn index_constraints_resolves_and_rejects() {
        let mut set = ConstraintSet::<String>::new();
        set.add_ml("b".into(), "a".into()).unwrap();
        let indexed = index_constraints(&set, &["a".to_string(), "b".to_string()]).unwrap();
        assert!(indexed.ml().contains(&(0, 1)));
        let missing = index_constraints(&set, &["a".to_string()]).unwrap_err();
        assert!(matches!(missing, Error::UnknownDocId(_)));
    }

    proptest! {
        #[test]
        fn closure_matches_brute_force(
            ml in proptest::collection::vec((0u32..12, 0u32..12), 0..10),
            cl in proptest::collection::vec((0u32..12, 0u32..12), 0..10),
        ) {
            let mut set = ConstraintSet::new();
            for (a, b) in ml {
                if a != b { set.add_ml(a, b).unwrap(); }
            }
            for (a, b) in cl {
                if a != b { set.add_cl(a, b).unwrap(); }
            }
            let fast = set.transitive_closure_unchecked();
            let oracle = brute_force_closure(&set);
            prop_assert_eq!(fast.ml(), oracle.ml());
            prop_assert_eq!(fast.cl(), oracle.cl());
        }

        #[test]
        fn oracle_constraints_close_consistently(
            seed in 0u64..500,
            n in 2usize..15,
            classes in 1usize..4,
            fraction in 0.0f64..=1.0,
        ) {
            let labels: BTreeMap<usize, usize> =
                (0..n).map(|i| (i, i % classes)).collect();
            let set = sample_oracle_constraints(&labels, fraction, seed);
            let closed = set.transitive_closure();
            prop_assert!(closed.is_ok());
        }
    }
}
