use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};

use super::{pow, precondition, require_uniform, surj, ExactConfig};
use crate::error::{Error, Result};
use crate::model::{Count, Fact, IncompleteDatabase, Term};
use crate::query::{connectivity_graph, Atom, ConjunctiveQuery};

/// How a fact relates to the centre variable of its atom.
enum Kind {
    /// Never matches.
    Dead,
    /// Centre positions are all nulls; `alpha` matching valuations per value.
    Free { alpha: Count },
    /// Centre is pinned to a constant.
    Determined { value: String, alpha: Count },
}

fn classify_fact(f: &Fact, atom: &Atom, centre: &str, dom: &BTreeSet<String>) -> Kind {
    let d = dom.len();
    let mut groups: BTreeMap<&str, Vec<&Term>> = BTreeMap::new();
    for (a, t) in atom.args.iter().zip(&f.args) {
        groups.entry(a.name()).or_default().push(t);
    }
    // ways to fill one group of positions with a common value, given that
    // the group's nulls are not constrained elsewhere
    let ways = |terms: &[&Term]| -> (Option<Option<String>>, usize) {
        let consts: BTreeSet<&str> = terms
            .iter()
            .filter_map(|t| match t {
                Term::Const(c) => Some(c.as_str()),
                Term::Null(_) => None,
            })
            .collect();
        let has_null = terms.iter().any(|t| t.is_null());
        match consts.len() {
            0 => (Some(None), d),
            1 => {
                let c = consts.into_iter().next().unwrap();
                let ok = !has_null || dom.contains(c);
                (if ok { Some(Some(c.to_string())) } else { None }, usize::from(ok))
            }
            _ => (None, 0),
        }
    };
    let mut alpha = Count::one();
    for (v, terms) in &groups {
        if *v != centre {
            alpha *= ways(terms).1;
        }
    }
    if alpha.is_zero() {
        return Kind::Dead;
    }
    match ways(&groups[centre]) {
        (None, _) => Kind::Dead,
        (Some(None), _) => Kind::Free { alpha },
        (Some(Some(value)), _) => Kind::Determined { value, alpha },
    }
}

/// Valuation count on a uniform Codd table for a query whose components are
/// stars: one centre variable in every atom, other variables confined to one
/// atom. Counts the valuations in which no value is a centre witness.
pub fn count_val_uniform_codd(db: &IncompleteDatabase, q: &ConjunctiveQuery, cfg: &ExactConfig) -> Result<Count> {
    let dom = require_uniform(db)?;
    if !db.is_codd() {
        return Err(Error::Setting("star algorithm needs a Codd table".into()));
    }
    if !q.is_self_join_free() || !q.is_boolean() || q.has_constants() {
        return Err(precondition("needs a Boolean self-join-free query without constants"));
    }
    let d = dom.len() as u64;
    let rels = q.relations();
    let mut result = Count::one();
    for f in db.facts() {
        if !rels.contains(f.relation.as_str()) {
            result *= pow(d, f.nulls().count());
        }
    }
    for comp in connectivity_graph(q).components() {
        let atoms: Vec<&Atom> = comp.iter().map(|&i| &q.atoms()[i]).collect();
        if atoms.len() > cfg.star_cap {
            return Err(precondition(format!(
                "component with {} atoms exceeds the cap of {}",
                atoms.len(),
                cfg.star_cap
            )));
        }
        let centre = find_centre(&atoms)?;
        result *= component(db, &atoms, &centre, dom)?;
        if result.is_zero() {
            break;
        }
    }
    Ok(result)
}

fn find_centre(atoms: &[&Atom]) -> Result<String> {
    let first: BTreeSet<&str> = atoms[0].vars().collect();
    for x in first {
        if !atoms.iter().all(|a| a.vars().any(|v| v == x)) {
            continue;
        }
        let star = atoms
            .iter()
            .flat_map(|a| a.vars().filter(|&v| v != x).collect::<BTreeSet<_>>())
            .fold((BTreeSet::new(), true), |(mut seen, ok), v| {
                let fresh = seen.insert(v);
                (seen, ok && fresh)
            });
        if star.1 {
            return Ok(x.to_string());
        }
    }
    if atoms.len() == 1 {
        // a lone atom without variables
        return Ok(String::new());
    }
    Err(precondition("component is not a star"))
}

fn component(db: &IncompleteDatabase, atoms: &[&Atom], centre: &str, dom: &BTreeSet<String>) -> Result<Count> {
    let d = dom.len() as u64;
    let k = atoms.len();
    let mut total = Count::one();
    let mut dead = Count::one();
    // per atom: free-fact polynomial coefficients, determined (P, N) per constant
    let mut h: Vec<Vec<Count>> = Vec::with_capacity(k);
    let mut det: Vec<BTreeMap<String, (Count, Count)>> = vec![BTreeMap::new(); k];
    for (j, atom) in atoms.iter().enumerate() {
        let mut g = vec![Count::one()];
        let mut det_all: BTreeMap<String, (Count, Count)> = BTreeMap::new();
        for f in db.facts_of(&atom.relation) {
            let t = f.nulls().count();
            let all = pow(d, t);
            total *= &all;
            if centre.is_empty() {
                // zero-arity atom: any fact matches
                dead = Count::zero();
                continue;
            }
            match classify_fact(f, atom, centre, dom) {
                Kind::Dead => dead *= all,
                Kind::Free { alpha } => {
                    let beta = &all - &alpha * d;
                    let mut next = vec![Count::zero(); g.len() + 1];
                    for (w, c) in g.iter().enumerate() {
                        next[w] += c * &beta;
                        next[w + 1] += c * &alpha;
                    }
                    g = next;
                }
                Kind::Determined { value, alpha } => {
                    let e = det_all.entry(value).or_insert((Count::one(), Count::one()));
                    e.0 *= &all;
                    e.1 *= &all - alpha;
                }
            }
        }
        let umax = (g.len() as u64 - 1).min(d);
        h.push(
            (0..=umax)
                .map(|u| {
                    g.iter()
                        .enumerate()
                        .fold(Count::zero(), |acc, (w, c)| acc + c * surj(w as u64, u))
                })
                .collect(),
        );
        det[j] = det_all
            .into_iter()
            .map(|(c, (all, none))| (c, (&all - &none, none)))
            .collect();
    }
    if centre.is_empty() {
        return Ok(&total - dead);
    }
    let full = (1usize << k) - 1;
    let limits: Vec<usize> = h.iter().map(|v| v.len() - 1).collect();
    let mut dp: HashMap<Vec<usize>, Count> = HashMap::from([(vec![0; k], Count::one())]);
    let step = |dp: HashMap<Vec<usize>, Count>, weights: &[Count]| {
        let mut next: HashMap<Vec<usize>, Count> = HashMap::new();
        for (u, w) in dp {
            for (s, ws) in weights.iter().enumerate() {
                if ws.is_zero() {
                    continue;
                }
                let mut v = u.clone();
                let mut ok = true;
                for j in 0..k {
                    if s >> j & 1 == 1 {
                        v[j] += 1;
                        ok &= v[j] <= limits[j];
                    }
                }
                if ok {
                    *next.entry(v).or_insert_with(Count::zero) += &w * ws;
                }
            }
        }
        next
    };
    let determined: BTreeSet<&String> = det.iter().flat_map(|m| m.keys()).collect();
    let none = (Count::zero(), Count::one());
    for c in &determined {
        let mut weights = vec![Count::zero(); full + 1];
        let in_dom = dom.contains(*c);
        for (s, ws) in weights.iter_mut().enumerate() {
            if !in_dom && s != 0 {
                continue;
            }
            for t in 0..=full {
                if s | t == full {
                    continue;
                }
                let mut p = Count::one();
                for (j, m) in det.iter().enumerate() {
                    let (pj, nj) = m.get(*c).unwrap_or(&none);
                    p *= if t >> j & 1 == 1 { pj } else { nj };
                }
                *ws += p;
            }
        }
        dp = step(dp, &weights);
    }
    let anonymous = dom.iter().filter(|v| !determined.contains(v)).count();
    let mut weights = vec![Count::one(); full + 1];
    weights[full] = Count::zero();
    for _ in 0..anonymous {
        dp = step(dp, &weights);
    }
    let mut nonsat = Count::zero();
    for (u, w) in dp {
        let mut p = w;
        for j in 0..k {
            p *= &h[j][u[j]];
        }
        nonsat += p;
    }
    Ok(total - nonsat * dead)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_database;
    use crate::oracle::brute_val;
    use crate::query::parse_cq;

    #[test]
    fn agrees_with_brute_force() {
        let cases = [
            ("@uniform a b c\nR(?1)\nR(a)\nS(?2)\nS(b)", "R(X), S(X)"),
            ("@uniform a b\nR(?1, ?2)\nR(a, ?3)\nS(?4)", "R(X, X), S(X)"),
            (
                "@uniform a b c\nR(?1, ?2)\nS(?3, b)\nS(?4, ?5)\nT(?6)",
                "R(X, Y), S(X, Z), T(X)",
            ),
            ("@uniform a b\nR(?1)\nR(?2)\nS(?3)\nS(c)", "R(X), S(X)"),
            (
                "@uniform a b c\nR(?1, ?2)\nR(a, a)\nS(?3)\nU(?4)",
                "R(X, Y), S(X), U(W)",
            ),
            ("@uniform a b\nR(?1)\nS(?2)", "R(X), S(X), T(X)"),
        ];
        for (db, q) in cases {
            let d = parse_database(db).unwrap();
            let cq = parse_cq(q).unwrap();
            let got = count_val_uniform_codd(&d, &cq, &ExactConfig::default()).unwrap();
            assert_eq!(got, brute_val(&d, &cq.clone().into(), false).unwrap(), "{q} on {db}");
        }
    }

    #[test]
    fn rejects_non_stars() {
        let db = parse_database("@uniform a b\nR(?1)\nS(?2, ?3)\nT(?4)").unwrap();
        let q = parse_cq("R(X), S(X, Y), T(Y)").unwrap();
        assert!(count_val_uniform_codd(&db, &q, &ExactConfig::default()).is_err());
    }
}
