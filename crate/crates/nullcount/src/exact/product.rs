use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::{precondition, ExactConfig};
use crate::error::Result;
use crate::model::{Count, IncompleteDatabase, Term};
use crate::query::{Arg, ConjunctiveQuery};

/// Checks that every variable occurs once and every atom has at most one constant.
fn check_shape(q: &ConjunctiveQuery) -> Result<()> {
    if !q.is_self_join_free() || !q.is_boolean() {
        return Err(precondition("needs a Boolean self-join-free query"));
    }
    let mut seen = BTreeSet::new();
    for a in q.atoms() {
        for v in a.vars() {
            if !seen.insert(v) {
                return Err(precondition(format!("variable {v} occurs more than once")));
            }
        }
        if a.constants().count() > 1 {
            return Err(precondition(format!("atom {a} has more than one constant")));
        }
    }
    Ok(())
}

/// Valuation count when no variable is repeated: every valuation satisfies the
/// query unless one of its relations is empty. Queries with constants go to
/// [`count_val_constants_dp`].
pub fn count_val_disjoint(db: &IncompleteDatabase, q: &ConjunctiveQuery, cfg: &ExactConfig) -> Result<Count> {
    check_shape(q)?;
    if q.has_constants() {
        return count_val_constants_dp(db, q, cfg);
    }
    if q.atoms().iter().any(|a| db.facts_of(&a.relation).next().is_none()) {
        return Ok(Count::zero());
    }
    Ok(db.total_valuations())
}

/// Valuation count for queries whose atoms each carry at most one constant
/// and share no variables. Dynamic program over the nulls whose state is the
/// set of constant atoms already satisfied.
pub fn count_val_constants_dp(db: &IncompleteDatabase, q: &ConjunctiveQuery, cfg: &ExactConfig) -> Result<Count> {
    check_shape(q)?;
    // (relation, position of the constant, constant)
    let mut targets: Vec<(&str, usize, &str)> = Vec::new();
    for a in q.atoms() {
        match a.args.iter().position(|x| matches!(x, Arg::Const(_))) {
            Some(p) => targets.push((&a.relation, p, a.args[p].name())),
            None => {
                if db.facts_of(&a.relation).next().is_none() {
                    return Ok(Count::zero());
                }
            }
        }
    }
    let k = targets.len();
    if k > cfg.constants_cap {
        return Err(precondition(format!(
            "{k} atoms with constants exceed the cap of {}",
            cfg.constants_cap
        )));
    }
    let full = (1usize << k) - 1;
    let mut start = 0usize;
    // atoms whose constant position each null occupies
    let mut touches: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, (rel, p, c)) in targets.iter().enumerate() {
        for f in db.facts_of(rel) {
            match &f.args[*p] {
                Term::Const(a) if a == c => start |= 1 << i,
                Term::Const(_) => {}
                Term::Null(n) => *touches.entry(n.as_str()).or_insert(0) |= 1 << i,
            }
        }
    }
    let mut dp = vec![Count::zero(); full + 1];
    dp[start] = Count::one();
    let mut factor = Count::one();
    for n in db.nulls() {
        let dom = db.domain_of(n);
        let Some(&mask) = touches.get(n.as_str()) else {
            factor *= dom.len();
            continue;
        };
        let mut hits: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, (_, _, c)) in targets.iter().enumerate() {
            if mask >> i & 1 == 1 && dom.contains(*c) {
                *hits.entry(c).or_insert(0) |= 1 << i;
            }
        }
        let others = dom.len() - hits.len();
        let mut next = vec![Count::zero(); full + 1];
        for (s, w) in dp.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for &m in hits.values() {
                next[s | m] += w;
            }
            if others > 0 {
                next[s] += w * others;
            }
        }
        dp = next;
    }
    Ok(&dp[full] * factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_database;
    use crate::query::parse_cq;

    fn run(db: &str, q: &str) -> Count {
        count_val_disjoint(
            &parse_database(db).unwrap(),
            &parse_cq(q).unwrap(),
            &ExactConfig::default(),
        )
        .unwrap()
    }

    #[test]
    fn disjoint_examples() {
        assert_eq!(
            run("dom ?1 : a b c\ndom ?2 : a b\nR(?1)\nS(?2)", "R(X), S(Y)"),
            Count::from(6u32)
        );
        assert_eq!(run("dom ?1 : a b c\nR(?1)", "R(X), S(Y)"), Count::zero());
        assert_eq!(run("R(a, b)", "R(X, Y)"), Count::one());
    }

    #[test]
    fn constants_examples() {
        assert_eq!(
            run("dom ?1 : c e\ndom ?2 : d e\nR(?1)\nS(?2)", "R(c), S(d)"),
            Count::one()
        );
        assert_eq!(run("dom ?1 : c d e\nR(?1)\nS(?1)", "R(c), S(d)"), Count::zero());
        assert_eq!(run("R(c)", "R(c)"), Count::one());
        assert_eq!(run("dom ?1 : c d\nR(?1, b)\nS(?1)", "R(c, Y), S(Z)"), Count::one());
    }

    #[test]
    fn rejects_shared_variables() {
        let db = parse_database("R(a)\nS(a)").unwrap();
        let q = parse_cq("R(X), S(X)").unwrap();
        assert!(count_val_disjoint(&db, &q, &ExactConfig::default()).is_err());
    }
}
