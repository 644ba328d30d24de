//! Release policy for unification angles.
//!
//! Each released `θ_ij` tells the miner one difference `θ_j − θ_i` between
//! secret subset angles. The ledger treats subsets as nodes and releases as
//! edges, and only accepts a release when the new edge joins two previously
//! unconnected components: a cycle would add an equation that is a linear
//! combination of the ones already released. At most `m − 1` edges can ever
//! be recorded.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::rotation::Angle;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyViolation {
    /// The pair `{i, j}` has already been released.
    AlreadyReleased,
    /// `i` and `j` are already connected through released pairs.
    ClosesCycle,
    /// `m − 1` pairs are already released.
    EdgeLimit,
}

impl fmt::Display for PolicyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyViolation::AlreadyReleased => "pair already released",
            PolicyViolation::ClosesCycle => "release would close a cycle of dependent equations",
            PolicyViolation::EdgeLimit => "m-1 releases already made",
        })
    }
}

/// Outcome of [`ReleaseLedger::can_release`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReleaseCheck {
    violations: Vec<PolicyViolation>,
}

impl ReleaseCheck {
    pub fn is_allowed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[PolicyViolation] {
        &self.violations
    }
}

impl fmt::Display for ReleaseCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_allowed() {
            return f.write_str("allowed");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReleasedEdge {
    pub i: usize,
    pub j: usize,
    pub theta: Angle,
}

/// Client-side record of released unification angles over `m` subsets.
/// Subset indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct ReleaseLedger {
    m: usize,
    edges: Vec<ReleasedEdge>,
}

impl ReleaseLedger {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("ledger needs at least one subset".into()));
        }
        Ok(ReleaseLedger { m, edges: Vec::new() })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &[ReleasedEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        for index in [i, j] {
            if index == 0 || index > self.m {
                return Err(Error::SubsetIndex { index, m: self.m });
            }
        }
        if i == j {
            return Err(Error::InvalidParameter(format!(
                "cannot unify subset {i} with itself"
            )));
        }
        Ok(())
    }

    /// Whether releasing `θ_ij` keeps the policy. Never mutates the ledger.
    pub fn can_release(&self, i: usize, j: usize) -> Result<ReleaseCheck> {
        self.check_pair(i, j)?;
        let mut violations = Vec::new();
        if self
            .edges
            .iter()
            .any(|e| (e.i, e.j) == (i, j) || (e.i, e.j) == (j, i))
        {
            violations.push(PolicyViolation::AlreadyReleased);
        }
        let mut components = Components::new(self.m);
        for e in &self.edges {
            components.union(e.i - 1, e.j - 1);
        }
        if components.find(i - 1) == components.find(j - 1) {
            violations.push(PolicyViolation::ClosesCycle);
        }
        if self.edges.len() + 1 > self.m - 1 {
            violations.push(PolicyViolation::EdgeLimit);
        }
        Ok(ReleaseCheck { violations })
    }

    /// Records a release that [`can_release`](Self::can_release) allows.
    pub fn record_release(&mut self, i: usize, j: usize, theta: Angle) -> Result<()> {
        let check = self.can_release(i, j)?;
        if !check.is_allowed() {
            return Err(Error::Policy {
                i,
                j,
                violations: check.violations,
            });
        }
        self.edges.push(ReleasedEdge { i, j, theta });
        Ok(())
    }

    /// Rank of the linear system `{θ_j − θ_i = θ_ij}` the miner can assemble
    /// from the released angles.
    pub fn attacker_rank(&self) -> usize {
        let pairs: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.i, e.j)).collect();
        difference_system_rank(self.m, &pairs)
    }

    /// Text form: a header line `m <m>` followed by `i j theta` per release.
    pub fn to_text(&self) -> String {
        let mut out = format!("m {}\n", self.m);
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.i, e.j, e.theta));
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Loads a ledger, replaying every line through the policy check.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.into(),
            line,
            column: 0,
            message,
        };
        let (line, header) = lines
            .next()
            .ok_or_else(|| Error::format(path, "empty ledger file"))?;
        let m = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["m", value] => value
                .parse()
                .map_err(|_| parse_err(line, format!("bad subset count {value:?}")))?,
            _ => return Err(parse_err(line, "expected header `m <count>`".into())),
        };
        let mut ledger = ReleaseLedger::new(m)?;
        for (line, text) in lines {
            let fields: Vec<&str> = text.split_whitespace().collect();
            let [i, j, theta] = fields[..] else {
                return Err(parse_err(line, "expected `i j theta`".into()));
            };
            let i = i
                .parse()
                .map_err(|_| parse_err(line, format!("bad subset index {i:?}")))?;
            let j = j
                .parse()
                .map_err(|_| parse_err(line, format!("bad subset index {j:?}")))?;
            let theta = theta
                .parse::<f64>()
                .ok()
                .and_then(|t| Angle::new(t).ok())
                .ok_or_else(|| parse_err(line, format!("bad angle {theta:?}")))?;
            ledger
                .record_release(i, j, theta)
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok(ledger)
    }
}

/// Rank of the difference system over `m` unknowns with one equation per
/// `(i, j)` pair (1-based): `m` minus the number of connected components of
/// the constraint graph.
pub fn difference_system_rank(m: usize, pairs: &[(usize, usize)]) -> usize {
    let mut components = Components::new(m);
    // each successful union removes one component
    pairs
        .iter()
        .filter(|&&(i, j)| components.union(i - 1, j - 1))
        .count()
}

/// Disjoint-set forest with path halving.
struct Components {
    parent: Vec<usize>,
}

impl Components {
    fn new(n: usize) -> Self {
        Components {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> Angle {
        Angle::new(d).unwrap()
    }

    /// Row reduction over the explicit difference matrix, one row per pair
    /// with −1 at column i and +1 at column j.
    fn row_reduction_rank(m: usize, pairs: &[(usize, usize)]) -> usize {
        let mut rows: Vec<Vec<f64>> = pairs
            .iter()
            .map(|&(i, j)| {
                let mut r = vec![0.0; m];
                r[i - 1] = -1.0;
                r[j - 1] = 1.0;
                r
            })
            .collect();
        let mut rank = 0;
        for col in 0..m {
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][col].abs() > 1e-12) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[col].abs() > 1e-12 {
                    let f = row[col] / pivot_row[col];
                    for (x, p) in row.iter_mut().zip(&pivot_row) {
                        *x -= f * p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    fn has_cycle(m: usize, pairs: &[(usize, usize)]) -> bool {
        // an undirected graph is a forest iff |E| = |V| - components
        let mut seen = vec![false; m];
        let adj = |v: usize| {
            pairs
                .iter()
                .filter_map(move |&(i, j)| {
                    if i - 1 == v {
                        Some(j - 1)
                    } else if j - 1 == v {
                        Some(i - 1)
                    } else {
                        None
                    }
                })
                .collect::<Vec<_>>()
        };
        let mut components = 0;
        for s in 0..m {
            if seen[s] {
                continue;
            }
            components += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                for w in adj(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        pairs.len() != m - components
    }

    #[test]
    fn empty_ledger_allows_any_pair() {
        let l = ReleaseLedger::new(5).unwrap();
        for i in 1..=5 {
            for j in 1..=5 {
                if i != j {
                    assert!(l.can_release(i, j).unwrap().is_allowed());
                }
            }
        }
        assert_eq!(l.attacker_rank(), 0);
    }

    #[test]
    fn triangle_is_refused_as_cycle() {
        let mut l = ReleaseLedger::new(3).unwrap();
        l.record_release(1, 2, deg(10.0)).unwrap();
        l.record_release(1, 3, deg(20.0)).unwrap();
        let check = l.can_release(2, 3).unwrap();
        assert!(!check.is_allowed());
        assert!(check.violations().contains(&PolicyViolation::ClosesCycle));
    }

    #[test]
    fn chain_on_four_trips_both_rules() {
        let mut l = ReleaseLedger::new(4).unwrap();
        for (i, j) in [(1, 2), (2, 3), (3, 4)] {
            l.record_release(i, j, deg(1.0)).unwrap();
        }
        let pairs = [(1, 2), (2, 3), (3, 4), (1, 4)];
        assert!(has_cycle(4, &pairs));
        let check = l.can_release(1, 4).unwrap();
        assert_eq!(
            check.violations(),
            [PolicyViolation::ClosesCycle, PolicyViolation::EdgeLimit]
        );
    }

    #[test]
    fn disjoint_components_are_legal() {
        let mut l = ReleaseLedger::new(4).unwrap();
        l.record_release(1, 2, deg(5.0)).unwrap();
        l.record_release(3, 4, deg(6.0)).unwrap();
        assert_eq!(l.len(), 2);
        assert!(l.can_release(2, 3).unwrap().is_allowed());
        assert!(!l.can_release(4, 3).unwrap().is_allowed());
    }

    #[test]
    fn full_chain_on_five_refuses_everything() {
        let mut l = ReleaseLedger::new(5).unwrap();
        for i in 1..5 {
            l.record_release(i, i + 1, deg(i as f64)).unwrap();
        }
        for i in 1..=5 {
            for j in 1..=5 {
                if i != j {
                    let before = l.clone();
                    assert!(!l.can_release(i, j).unwrap().is_allowed());
                    assert!(l.record_release(i, j, deg(0.0)).is_err());
                    assert_eq!(l, before);
                }
            }
        }
    }

    #[test]
    fn duplicate_is_rejected() {
        let mut l = ReleaseLedger::new(3).unwrap();
        l.record_release(1, 2, deg(5.0)).unwrap();
        match l.record_release(2, 1, deg(355.0)) {
            Err(Error::Policy { violations, .. }) => {
                assert!(violations.contains(&PolicyViolation::AlreadyReleased))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_indices() {
        let l = ReleaseLedger::new(3).unwrap();
        assert!(matches!(l.can_release(0, 1), Err(Error::SubsetIndex { .. })));
        assert!(matches!(l.can_release(1, 4), Err(Error::SubsetIndex { .. })));
        assert!(matches!(l.can_release(2, 2), Err(Error::InvalidParameter(_))));
        assert!(ReleaseLedger::new(0).is_err());
    }

    #[test]
    fn rank_matches_row_reduction() {
        let tree = [(1, 2), (1, 3), (3, 4)];
        assert_eq!(row_reduction_rank(4, &tree), 3);
        assert_eq!(difference_system_rank(4, &tree), 3);

        let triangle = [(1, 2), (1, 3), (2, 3)];
        assert_eq!(row_reduction_rank(3, &triangle), 2);
        assert_eq!(difference_system_rank(3, &triangle), 2);
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.txt");
        let mut l = ReleaseLedger::new(4).unwrap();
        l.record_release(1, 2, deg(150.0)).unwrap();
        l.record_release(4, 3, deg(0.1 + 0.2)).unwrap();
        l.save(&path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("m 4\n1 2 150\n"));
        assert_eq!(ReleaseLedger::load(&path).unwrap(), l);
    }

    #[test]
    fn load_rejects_cyclic_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.txt");
        std::fs::write(&path, "m 3\n1 2 1\n2 3 1\n3 1 1\n").unwrap();
        assert!(matches!(ReleaseLedger::load(&path), Err(Error::Parse { line: 4, .. })));
        std::fs::write(&path, "3\n").unwrap();
        assert!(ReleaseLedger::load(&path).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn accepted_sequences_stay_forests(
                m in 2usize..=10,
                requests in proptest::collection::vec((1usize..=10, 1usize..=10), 0..40),
            ) {
                let mut l = ReleaseLedger::new(m).unwrap();
                for (i, j) in requests {
                    if i > m || j > m || i == j { continue; }
                    let before = l.clone();
                    let check = l.can_release(i, j).unwrap();
                    prop_assert_eq!(&l, &before);
                    if check.is_allowed() {
                        l.record_release(i, j, Angle::ZERO).unwrap();
                    } else {
                        prop_assert!(l.record_release(i, j, Angle::ZERO).is_err());
                    }
                    let pairs: Vec<_> = l.edges().iter().map(|e| (e.i, e.j)).collect();
                    prop_assert!(!has_cycle(m, &pairs));
                    prop_assert!(pairs.len() < m);
                    prop_assert_eq!(l.attacker_rank(), row_reduction_rank(m, &pairs));
                    prop_assert!(l.attacker_rank() < m);
                }
            }
        }
    }
}
