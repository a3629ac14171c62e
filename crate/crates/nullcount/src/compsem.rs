//! Deciding whether a complete database is a completion of an incomplete one.
//!
//! For Codd tables this is a bipartite matching problem. For naive tables the
//! problem is NP-complete and [`is_completion_naive`] is an exponential search.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Fact, GroundDatabase, GroundFact, IncompleteDatabase, Term};

/// Maximum matching by augmenting paths. `adj[l]` lists the right nodes of
/// left node `l`; the result gives each left node's partner.
pub fn maximum_matching(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut right_of: Vec<Option<usize>> = vec![None; n_left];
    let mut left_of: Vec<Option<usize>> = vec![None; n_right];
    fn augment(
        l: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        right_of: &mut [Option<usize>],
        left_of: &mut [Option<usize>],
    ) -> bool {
        for &r in &adj[l] {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            if left_of[r].is_none_or(|l2| augment(l2, adj, seen, right_of, left_of)) {
                left_of[r] = Some(l);
                right_of[l] = Some(r);
                return true;
            }
        }
        false
    }
    for l in 0..n_left {
        let mut seen = vec![false; n_right];
        augment(l, adj, &mut seen, &mut right_of, &mut left_of);
    }
    right_of
}

/// Size of a maximum matching of the bipartite graph given by `(left, right)` edges.
pub fn max_bipartite_matching(left: usize, right: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); left];
    for &(l, r) in edges {
        adj[l].push(r);
    }
    maximum_matching(left, right, &adj)
        .iter()
        .filter(|m| m.is_some())
        .count()
}

/// Whether `g` is an instance of `f` for some values of its nulls.
fn instance_of(db: &IncompleteDatabase, f: &Fact, g: &GroundFact) -> bool {
    if f.relation != g.relation || f.args.len() != g.args.len() {
        return false;
    }
    let mut bound: BTreeMap<&str, &str> = BTreeMap::new();
    f.args.iter().zip(&g.args).all(|(t, c)| match t {
        Term::Const(a) => a == c,
        Term::Null(n) => db.domain_of(n).contains(c) && *bound.entry(n.as_str()).or_insert(c.as_str()) == c.as_str(),
    })
}

/// Decides completion membership for a Codd table by matching facts of the
/// table to the facts of `s` they can produce.
pub fn is_completion_codd(db: &IncompleteDatabase, s: &GroundDatabase) -> Result<bool> {
    if !db.is_codd() {
        return Err(Error::Setting("matching-based check needs a Codd table".into()));
    }
    let mut adj = Vec::with_capacity(db.facts().len());
    for f in db.facts() {
        let targets: Vec<usize> = s
            .facts()
            .iter()
            .enumerate()
            .filter(|(_, g)| instance_of(db, f, g))
            .map(|(i, _)| i)
            .collect();
        if targets.is_empty() {
            return Ok(false);
        }
        adj.push(targets);
    }
    let m = maximum_matching(adj.len(), s.len(), &adj);
    Ok(m.iter().filter(|x| x.is_some()).count() == s.len())
}

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// Decides completion membership for any table by backtracking over the
/// nulls, fewest remaining candidates first. Exponential in the worst case;
/// gives up with a resource error after `budget` search nodes.
pub fn is_completion_naive(db: &IncompleteDatabase, s: &GroundDatabase, budget: u64) -> Result<bool> {
    let nulls = db.nulls();
    let ix = |n: &str| nulls.binary_search_by(|m| m.as_str().cmp(n)).unwrap();
    // per fact: candidate targets in s
    let mut cands: Vec<Vec<usize>> = Vec::new();
    for f in db.facts() {
        let c: Vec<usize> = (0..s.len()).filter(|&i| instance_of(db, f, &s.facts()[i])).collect();
        if c.is_empty() {
            return Ok(false);
        }
        cands.push(c);
    }
    let coverable = (0..s.len()).all(|i| cands.iter().any(|c| c.contains(&i)));
    if !coverable {
        return Ok(false);
    }
    let facts_of_null: Vec<Vec<usize>> = (0..nulls.len())
        .map(|k| {
            (0..db.facts().len())
                .filter(|&i| db.facts()[i].nulls().any(|n| n == nulls[k]))
                .collect()
        })
        .collect();
    let compiled: Vec<Vec<std::result::Result<&str, usize>>> = db
        .facts()
        .iter()
        .map(|f| {
            f.args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => Ok(c.as_str()),
                    Term::Null(n) => Err(ix(n)),
                })
                .collect()
        })
        .collect();
    let mut search = Search {
        s,
        cands,
        compiled,
        facts_of_null,
        values: nulls
            .iter()
            .map(|n| db.domain_of(n).iter().map(String::as_str).collect())
            .collect(),
        assign: vec![None; nulls.len()],
        nodes: 0,
        budget,
    };
    search.run()
}

struct Search<'a> {
    s: &'a GroundDatabase,
    cands: Vec<Vec<usize>>,
    compiled: Vec<Vec<std::result::Result<&'a str, usize>>>,
    facts_of_null: Vec<Vec<usize>>,
    values: Vec<Vec<&'a str>>,
    assign: Vec<Option<&'a str>>,
    nodes: u64,
    budget: u64,
}

impl<'a> Search<'a> {
    fn fits(&self, fact: usize, target: usize) -> bool {
        self.compiled[fact]
            .iter()
            .zip(&self.s.facts()[target].args)
            .all(|(t, c)| match t {
                Ok(a) => *a == c,
                Err(k) => self.assign[*k].is_none_or(|v| v == c),
            })
    }

    fn fact_ok(&self, fact: usize) -> bool {
        self.cands[fact].iter().any(|&t| self.fits(fact, t))
    }

    fn covered(&self) -> bool {
        (0..self.s.len()).all(|t| (0..self.cands.len()).any(|f| self.cands[f].contains(&t) && self.fits(f, t)))
    }

    fn run(&mut self) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Resource(format!(
                "completion search exceeded {} nodes",
                self.budget
            )));
        }
        if !self.covered() {
            return Ok(false);
        }
        let mut best: Option<(usize, Vec<&'a str>)> = None;
        for k in 0..self.assign.len() {
            if self.assign[k].is_some() {
                continue;
            }
            let mut ok = Vec::new();
            for &v in &self.values[k] {
                self.assign[k] = Some(v);
                if self.facts_of_null[k].iter().all(|&f| self.fact_ok(f)) {
                    ok.push(v);
                }
            }
            self.assign[k] = None;
            if best.as_ref().is_none_or(|(_, b)| ok.len() < b.len()) {
                best = Some((k, ok));
            }
        }
        let Some((k, vals)) = best else {
            // fully assigned: every fact lands in s and s is covered
            return Ok(true);
        };
        for v in vals {
            self.assign[k] = Some(v);
            if self.run()? {
                return Ok(true);
            }
        }
        self.assign[k] = None;
        Ok(false)
    }
}
