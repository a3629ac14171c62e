use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use super::precondition;
use crate::error::{Error, Result};
use crate::model::{Count, Fact, IncompleteDatabase, Term};
use crate::query::{Arg, Atom, ConjunctiveQuery};

fn dom_product(db: &IncompleteDatabase, f: &Fact) -> Count {
    f.nulls().fold(Count::one(), |acc, n| acc * db.domain_of(n).len())
}

/// Valuations of the nulls of `f` under which it matches `atom`. Every null
/// occurs once, so positions are independent except through shared variables.
fn matches(db: &IncompleteDatabase, atom: &Atom, f: &Fact) -> Count {
    let mut by_var: BTreeMap<&str, Vec<&Term>> = BTreeMap::new();
    for (a, t) in atom.args.iter().zip(&f.args) {
        match a {
            Arg::Const(c) => {
                let ok = match t {
                    Term::Const(b) => b == c,
                    Term::Null(n) => db.domain_of(n).contains(c),
                };
                if !ok {
                    return Count::ZERO;
                }
            }
            Arg::Var(x) => by_var.entry(x).or_default().push(t),
        }
    }
    let mut total = Count::one();
    for terms in by_var.values() {
        let mut common: Option<BTreeSet<&str>> = None;
        for t in terms {
            let cand: BTreeSet<&str> = match t {
                Term::Const(b) => [b.as_str()].into(),
                Term::Null(n) => db.domain_of(n).iter().map(String::as_str).collect(),
            };
            common = Some(match common {
                None => cand,
                Some(c) => c.intersection(&cand).copied().collect(),
            });
        }
        total *= common.map_or(0, |c| c.len());
    }
    total
}

/// Valuation count on a Codd table for a query whose atoms share no variables:
/// a product over atoms of (all valuations of the relation's nulls minus those
/// where no fact matches).
pub fn count_val_codd(db: &IncompleteDatabase, q: &ConjunctiveQuery) -> Result<Count> {
    if !db.is_codd() {
        return Err(Error::Setting("per-atom algorithm needs a Codd table".into()));
    }
    if !q.is_self_join_free() || !q.is_boolean() {
        return Err(precondition("needs a Boolean self-join-free query"));
    }
    if q.atom_counts().values().any(|&n| n > 1) {
        return Err(precondition("atoms share a variable"));
    }
    let mut result = Count::one();
    let rels = q.relations();
    for n in db.nulls() {
        let in_query = db
            .facts()
            .iter()
            .any(|f| rels.contains(f.relation.as_str()) && f.nulls().any(|m| m == n));
        if !in_query {
            result *= db.domain_of(n).len();
        }
    }
    for atom in q.atoms() {
        let mut total = Count::one();
        let mut miss = Count::one();
        for f in db.facts_of(&atom.relation) {
            let all = dom_product(db, f);
            miss *= &all - matches(db, atom, f);
            total *= all;
        }
        result *= total - miss;
    }
    Ok(result)
}
