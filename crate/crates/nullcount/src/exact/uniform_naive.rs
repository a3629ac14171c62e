use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{binomial, pow, precondition, require_uniform, surj, ExactConfig};
use crate::error::{Error, Result};
use crate::model::{Count, IncompleteDatabase, Term};
use crate::query::{Arg, ConjunctiveQuery};

/// The query after dropping variables that occur once: a list of groups of
/// unary projections `(relation, column)` that must meet at a common value.
struct Reduced<'a> {
    d: usize,
    dom: &'a BTreeSet<String>,
    /// Per group, per atom, the terms found in the projected column.
    groups: Vec<Vec<Vec<&'a Term>>>,
    /// Nulls occurring in some projected column.
    live: BTreeSet<&'a str>,
    /// Nulls of the database not in `live`.
    free: usize,
}

fn reduce<'a>(db: &'a IncompleteDatabase, q: &'a ConjunctiveQuery) -> Result<Option<Reduced<'a>>> {
    let dom = require_uniform(db)?;
    if !q.is_self_join_free() || !q.is_boolean() || q.has_constants() {
        return Err(precondition("needs a Boolean self-join-free query without constants"));
    }
    let mut occurrences: BTreeMap<&str, usize> = BTreeMap::new();
    for a in q.atoms() {
        for x in &a.args {
            *occurrences.entry(x.name()).or_insert(0) += 1;
        }
    }
    let mut by_var: BTreeMap<&str, Vec<(&str, usize)>> = BTreeMap::new();
    for a in q.atoms() {
        let kept: Vec<(usize, &str)> = a
            .args
            .iter()
            .enumerate()
            .filter_map(|(i, x)| match x {
                Arg::Var(v) if occurrences[v.as_str()] > 1 => Some((i, v.as_str())),
                _ => None,
            })
            .collect();
        match kept.as_slice() {
            [] => {
                if db.facts_of(&a.relation).next().is_none() {
                    return Ok(None);
                }
            }
            [(i, v)] => by_var.entry(v).or_default().push((&a.relation, *i)),
            _ => return Err(precondition(format!("atom {a} keeps more than one join position"))),
        }
    }
    let mut groups = Vec::new();
    let mut live = BTreeSet::new();
    for cols in by_var.values() {
        let mut g = Vec::new();
        for &(rel, i) in cols {
            let terms: Vec<&Term> = db.facts_of(rel).map(|f| &f.args[i]).collect();
            for t in &terms {
                if let Term::Null(n) = t {
                    live.insert(n.as_str());
                }
            }
            g.push(terms);
        }
        groups.push(g);
    }
    let free = db.nulls().len() - live.len();
    Ok(Some(Reduced {
        d: dom.len(),
        dom,
        groups,
        live,
        free,
    }))
}

/// Valuation count on a uniform naive table for a query without `R(x,x)`,
/// `R(x)∧S(x,y)∧T(y)` and `R(x,y)∧S(x,y)`. Inclusion–exclusion over the groups
/// of atoms joined on a variable.
pub fn count_val_uniform_naive(db: &IncompleteDatabase, q: &ConjunctiveQuery, cfg: &ExactConfig) -> Result<Count> {
    let Some(r) = reduce(db, q)? else {
        return Ok(Count::zero());
    };
    let m = r.groups.len();
    if m > 20 {
        return Err(precondition(format!(
            "{m} join groups are too many for inclusion–exclusion"
        )));
    }
    let mut sum = BigInt::zero();
    for s in 0u32..1 << m {
        let n = non_satisfying(&r, s, cfg)?;
        if s.count_ones() % 2 == 0 {
            sum += BigInt::from(n);
        } else {
            sum -= BigInt::from(n);
        }
    }
    debug_assert!(!sum.is_negative());
    Ok(sum.magnitude().clone() * pow(r.d as u64, r.free))
}

/// Valuations of the projected nulls under which every group in `subset`
/// (indices into the join groups, ordered by join variable) fails to meet.
pub fn non_satisfying_for_subset(
    db: &IncompleteDatabase,
    q: &ConjunctiveQuery,
    subset: &[usize],
    cfg: &ExactConfig,
) -> Result<Count> {
    let Some(r) = reduce(db, q)? else {
        return Err(Error::Invalid(
            "an atom without join variables has an empty relation".into(),
        ));
    };
    let mut mask = 0u32;
    for &i in subset {
        if i >= r.groups.len() {
            return Err(Error::Invalid(format!("no join group {i}")));
        }
        mask |= 1 << i;
    }
    non_satisfying(&r, mask, cfg)
}

fn non_satisfying(r: &Reduced<'_>, subset: u32, cfg: &ExactConfig) -> Result<Count> {
    // one bit per projected column of the chosen groups
    let mut forbidden: Vec<u64> = Vec::new();
    let mut const_sig: BTreeMap<&str, u64> = BTreeMap::new();
    let mut null_sig: BTreeMap<&str, u64> = BTreeMap::new();
    let mut bit = 0;
    for (gi, g) in r.groups.iter().enumerate() {
        if subset >> gi & 1 == 0 {
            continue;
        }
        let mut f = 0u64;
        for terms in g {
            if bit >= 64 {
                return Err(precondition("more than 64 projected columns"));
            }
            f |= 1 << bit;
            for t in terms {
                match t {
                    Term::Const(c) => *const_sig.entry(c).or_insert(0) |= 1 << bit,
                    Term::Null(n) => *null_sig.entry(n).or_insert(0) |= 1 << bit,
                }
            }
            bit += 1;
        }
        forbidden.push(f);
    }
    let bad = |s: u64| forbidden.iter().any(|&f| f & !s == 0);
    if const_sig.values().any(|&s| bad(s)) {
        return Ok(Count::zero());
    }
    let mut regions: BTreeMap<u64, u64> = BTreeMap::new();
    let mut in_dom = 0u64;
    for (c, s) in &const_sig {
        if r.dom.contains(*c) {
            *regions.entry(*s).or_insert(0) += 1;
            in_dom += 1;
        }
    }
    *regions.entry(0).or_insert(0) += r.d as u64 - in_dom;
    let mut blocks: BTreeMap<u64, u64> = BTreeMap::new();
    for s in null_sig.values() {
        *blocks.entry(*s).or_insert(0) += 1;
    }
    if blocks.len() > cfg.signature_cap {
        return Err(precondition(format!(
            "{} null signatures exceed the cap of {}",
            blocks.len(),
            cfg.signature_cap
        )));
    }
    let mut order: Vec<(u64, u64)> = blocks.into_iter().collect();
    order.sort_by_key(|&(s, _)| (s.count_ones(), s));
    let outside = r.live.len() - null_sig.len();
    let mut search = Blocks {
        order: &order,
        bad: &bad,
        memo: HashMap::new(),
    };
    let start: Vec<(u64, u64)> = regions.into_iter().filter(|&(_, n)| n > 0).collect();
    Ok(search.count(0, start) * pow(r.d as u64, outside))
}

/// Assigns the null blocks one at a time. A region is a set of domain values
/// that share the set of columns they already appear in.
struct Blocks<'a, F> {
    order: &'a [(u64, u64)],
    bad: &'a F,
    memo: HashMap<(usize, Vec<(u64, u64)>), Count>,
}

impl<F: Fn(u64) -> bool> Blocks<'_, F> {
    fn count(&mut self, i: usize, regions: Vec<(u64, u64)>) -> Count {
        if i == self.order.len() {
            return Count::one();
        }
        if let Some(c) = self.memo.get(&(i, regions.clone())) {
            return c.clone();
        }
        let (sig, n) = self.order[i];
        let allowed: Vec<bool> = regions.iter().map(|&(r, _)| !(self.bad)(r | sig)).collect();
        let mut total = Count::zero();
        let mut ks = vec![0u64; regions.len()];
        loop {
            let used: u64 = ks.iter().sum();
            if used >= 1 && used <= n {
                let mut w = surj(n, used);
                let mut next: BTreeMap<u64, u64> = BTreeMap::new();
                for (j, &(r, size)) in regions.iter().enumerate() {
                    w *= binomial(size, ks[j]);
                    if size > ks[j] {
                        *next.entry(r).or_insert(0) += size - ks[j];
                    }
                    if ks[j] > 0 {
                        *next.entry(r | sig).or_insert(0) += ks[j];
                    }
                }
                if !w.is_zero() {
                    total += w * self.count(i + 1, next.into_iter().collect());
                }
            }
            // odometer over allowed regions
            let mut j = 0;
            loop {
                if j == regions.len() {
                    self.memo.insert((i, regions), total.clone());
                    return total;
                }
                if allowed[j] && ks[j] < regions[j].1.min(n) {
                    ks[j] += 1;
                    break;
                }
                ks[j] = 0;
                j += 1;
            }
        }
    }
}
