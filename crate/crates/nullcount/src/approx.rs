//! Randomized approximation of valuation counts for unions of conjunctive
//! queries, by Karp–Luby sampling over the union of witness cylinders.
//!
//! A witness is a partial valuation that makes some disjunct true no matter
//! how the remaining nulls are set. The satisfying valuations are exactly the
//! union of the cylinders of all witnesses.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::{BigInt, RandBigInt};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{Count, Fact, IncompleteDatabase, Term};
use crate::query::{Arg, Atom, UnionQuery};

#[derive(Clone, Copy, Debug)]
pub struct ApproxConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub witness_cap: usize,
    pub jobs: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            epsilon: 0.1,
            delta: 0.05,
            seed: 0,
            witness_cap: 100_000,
            jobs: 1,
        }
    }
}

/// Partial valuation: null index to value index within the null's domain.
pub type Witness = BTreeMap<usize, usize>;

#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    /// The estimate rounded to an integer.
    pub value: Count,
    /// Sum of witness cylinder sizes.
    pub cylinder_sum: Count,
    pub witnesses: usize,
    /// Samples per run.
    pub samples: u64,
    /// Independent runs whose median is taken.
    pub runs: u64,
    /// Set when the answer was determined without sampling.
    pub exact: bool,
}

/// Nulls and their domains in a fixed order.
pub struct Space<'a> {
    pub nulls: &'a [String],
    pub domains: Vec<Vec<&'a str>>,
}

impl<'a> Space<'a> {
    pub fn new(db: &'a IncompleteDatabase) -> Self {
        let nulls = db.nulls();
        let domains = nulls
            .iter()
            .map(|n| db.domain_of(n).iter().map(String::as_str).collect())
            .collect();
        Space { nulls, domains }
    }

    fn index(&self, n: &str) -> usize {
        self.nulls.binary_search_by(|m| m.as_str().cmp(n)).unwrap()
    }

    fn value_index(&self, k: usize, v: &str) -> Option<usize> {
        self.domains[k].binary_search(&v).ok()
    }

    /// Number of valuations extending `w`.
    pub fn cylinder(&self, w: &Witness) -> Count {
        let mut c = Count::one();
        for (k, d) in self.domains.iter().enumerate() {
            if !w.contains_key(&k) {
                c *= d.len();
            }
        }
        c
    }
}

/// All witnesses of `q`, deduplicated. Fails with a resource error past `cap`.
pub fn witnesses(db: &IncompleteDatabase, q: &UnionQuery, cap: usize) -> Result<Vec<Witness>> {
    let space = Space::new(db);
    let mut out: BTreeSet<Witness> = BTreeSet::new();
    for d in q.disjuncts() {
        let atoms: Vec<&Atom> = d.atoms().iter().collect();
        let mut s = Search {
            db,
            space: &space,
            out: &mut out,
            cap,
            bind: BTreeMap::new(),
            assign: BTreeMap::new(),
        };
        s.go(&atoms)?;
    }
    Ok(out.into_iter().collect())
}

/// What a variable is bound to during the search.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Bound<'a> {
    Value(&'a str),
    Null(usize),
}

struct Search<'a, 'b> {
    db: &'a IncompleteDatabase,
    space: &'b Space<'a>,
    out: &'b mut BTreeSet<Witness>,
    cap: usize,
    bind: BTreeMap<&'a str, Bound<'a>>,
    assign: Witness,
}

impl<'a> Search<'a, '_> {
    fn go(&mut self, atoms: &[&'a Atom]) -> Result<()> {
        let Some((a, rest)) = atoms.split_first() else {
            if self.out.insert(self.assign.clone()) && self.out.len() > self.cap {
                return Err(Error::Resource(format!("more than {} witnesses", self.cap)));
            }
            return Ok(());
        };
        for f in self.db.facts_of(&a.relation) {
            if f.args.len() != a.args.len() {
                continue;
            }
            let saved = (self.bind.clone(), self.assign.clone());
            self.unify(a, f, 0, rest)?;
            (self.bind, self.assign) = saved;
        }
        Ok(())
    }

    fn resolve(&self, b: Bound<'a>) -> Bound<'a> {
        match b {
            Bound::Null(k) => match self.assign.get(&k) {
                Some(&v) => Bound::Value(self.space.domains[k][v]),
                None => b,
            },
            v => v,
        }
    }

    /// Unifies position `i` onwards of `a` with `f`, then continues with `rest`.
    fn unify(&mut self, a: &'a Atom, f: &'a Fact, i: usize, rest: &[&'a Atom]) -> Result<()> {
        if i == a.args.len() {
            return self.go(rest);
        }
        let term = match &f.args[i] {
            Term::Const(c) => Bound::Value(c.as_str()),
            Term::Null(n) => Bound::Null(self.space.index(n)),
        };
        let term = self.resolve(term);
        let other = match &a.args[i] {
            Arg::Const(c) => Bound::Value(c.as_str()),
            Arg::Var(x) => match self.bind.get(x.as_str()) {
                Some(&b) => self.resolve(b),
                None => {
                    self.bind.insert(x, term);
                    let r = self.unify(a, f, i + 1, rest);
                    self.bind.remove(x.as_str());
                    return r;
                }
            },
        };
        match (term, other) {
            (Bound::Value(u), Bound::Value(v)) => {
                if u == v {
                    self.unify(a, f, i + 1, rest)?;
                }
            }
            (Bound::Null(k), Bound::Value(v)) | (Bound::Value(v), Bound::Null(k)) => {
                if let Some(ix) = self.space.value_index(k, v) {
                    self.assign.insert(k, ix);
                    self.unify(a, f, i + 1, rest)?;
                    self.assign.remove(&k);
                }
            }
            (Bound::Null(k), Bound::Null(m)) => {
                if k == m {
                    self.unify(a, f, i + 1, rest)?;
                } else {
                    let common: Vec<&str> = self.space.domains[k]
                        .iter()
                        .filter(|v| self.space.value_index(m, v).is_some())
                        .copied()
                        .collect();
                    for v in common {
                        self.assign.insert(k, self.space.value_index(k, v).unwrap());
                        self.assign.insert(m, self.space.value_index(m, v).unwrap());
                        self.unify(a, f, i + 1, rest)?;
                    }
                    self.assign.remove(&k);
                    self.assign.remove(&m);
                }
            }
        }
        Ok(())
    }
}

/// Exact size of the union of witness cylinders by inclusion–exclusion.
pub fn exact_union_by_ie(db: &IncompleteDatabase, ws: &[Witness]) -> Result<Count> {
    if ws.len() > 20 {
        return Err(Error::Resource(format!(
            "{} witnesses are too many for inclusion–exclusion",
            ws.len()
        )));
    }
    let space = Space::new(db);
    let mut sum = BigInt::zero();
    fn dfs(space: &Space<'_>, ws: &[Witness], i: usize, acc: Option<Witness>, size: usize, sum: &mut BigInt) {
        if i == ws.len() {
            if let Some(w) = acc {
                let c = BigInt::from(space.cylinder(&w));
                if size % 2 == 1 {
                    *sum += c;
                } else {
                    *sum -= c;
                }
            }
            return;
        }
        dfs(space, ws, i + 1, acc.clone(), size, sum);
        let merged = match acc {
            None => Some(ws[i].clone()),
            Some(mut a) => {
                let ok = ws[i].iter().all(|(k, v)| *a.entry(*k).or_insert(*v) == *v);
                ok.then_some(a)
            }
        };
        if let Some(m) = merged {
            dfs(space, ws, i + 1, Some(m), size + 1, sum);
        }
    }
    dfs(&space, ws, 0, None, 0, &mut sum);
    debug_assert!(!sum.is_negative());
    Ok(sum.magnitude().clone())
}

const BATCH: u64 = 4096;

/// Estimates the number of valuations satisfying `q` within a factor
/// `1 ± epsilon` with probability at least `1 - delta`.
pub fn karp_luby(db: &IncompleteDatabase, q: &UnionQuery, cfg: &ApproxConfig) -> Result<Estimate> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0) || !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(Error::Invalid(
            "epsilon and delta must lie strictly between 0 and 1".into(),
        ));
    }
    let ws = witnesses(db, q, cfg.witness_cap)?;
    let space = Space::new(db);
    let sizes: Vec<Count> = ws.iter().map(|w| space.cylinder(w)).collect();
    let total: Count = sizes.iter().sum();
    let done = |value: Count| Estimate {
        value,
        cylinder_sum: total.clone(),
        witnesses: ws.len(),
        samples: 0,
        runs: 0,
        exact: true,
    };
    if ws.is_empty() {
        return Ok(done(Count::zero()));
    }
    if ws.iter().any(|w| w.is_empty()) || ws.len() == 1 {
        return Ok(done(if ws[0].is_empty() {
            db.total_valuations()
        } else {
            sizes[0].clone()
        }));
    }
    let n = ws.len() as f64;
    let (runs, delta) = if cfg.delta < 0.25 {
        let t = (8.0 * (1.0 / cfg.delta).ln()).ceil() as u64;
        (t | 1, 0.25)
    } else {
        (1, cfg.delta)
    };
    let samples = (3.0 * n * (2.0 / delta).ln() / (cfg.epsilon * cfg.epsilon)).ceil() as u64;
    let mut prefix = Vec::with_capacity(sizes.len());
    let mut acc = Count::zero();
    for s in &sizes {
        acc += s;
        prefix.push(acc.clone());
    }
    let sampler = Sampler {
        space: &space,
        ws: &ws,
        prefix: &prefix,
        total: &total,
    };
    let mut estimates: Vec<Count> = (0..runs)
        .map(|r| {
            let hits = sampler.run(cfg.seed, r, samples, cfg.jobs.max(1));
            (&total * hits + samples / 2) / samples
        })
        .collect();
    estimates.sort();
    Ok(Estimate {
        value: estimates[estimates.len() / 2].clone(),
        cylinder_sum: total.clone(),
        witnesses: ws.len(),
        samples,
        runs,
        exact: false,
    })
}

struct Sampler<'a> {
    space: &'a Space<'a>,
    ws: &'a [Witness],
    prefix: &'a [Count],
    total: &'a Count,
}

impl Sampler<'_> {
    /// Number of samples whose chosen witness is the first one covering the
    /// sampled valuation. Batches are seeded independently of `jobs`.
    fn run(&self, seed: u64, run: u64, samples: u64, jobs: usize) -> u64 {
        let batches = samples.div_ceil(BATCH);
        let batch = |b: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run << 32 | b);
            let len = BATCH.min(samples - b * BATCH);
            (0..len).filter(|_| self.sample(&mut rng)).count() as u64
        };
        if jobs == 1 || batches == 1 {
            return (0..batches).map(batch).sum();
        }
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..jobs as u64)
                .map(|j| {
                    let batch = &batch;
                    s.spawn(move || (j..batches).step_by(jobs).map(batch).sum::<u64>())
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).sum()
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> bool {
        let r = rng.gen_biguint_below(self.total);
        let i = self.prefix.partition_point(|p| *p <= r);
        let w = &self.ws[i];
        let v: Vec<usize> = (0..self.space.nulls.len())
            .map(|k| match w.get(&k) {
                Some(&x) => x,
                None => rng.gen_range(0..self.space.domains[k].len()),
            })
            .collect();
        !self.ws[..i].iter().any(|u| u.iter().all(|(k, x)| v[*k] == *x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_database;
    use crate::oracle::brute_val;
    use crate::query::parse_query;

    #[test]
    fn witness_union_is_the_satisfying_set() {
        let cases = [
            ("@uniform a b c\nR(?1, ?2)\nR(a, ?3)", "R(X, X)"),
            ("dom ?1 : a b\ndom ?2 : b c\nR(?1)\nS(?2)", "R(X), S(X)"),
            ("@uniform a b\nR(?1, ?2)\nS(?2, a)", "R(X, Y), S(Y, X) | R(a, a)"),
        ];
        for (db, q) in cases {
            let d = parse_database(db).unwrap();
            let u = parse_query(q).unwrap();
            let ws = witnesses(&d, &u, 1000).unwrap();
            assert_eq!(
                exact_union_by_ie(&d, &ws).unwrap(),
                brute_val(&d, &u, false).unwrap(),
                "{q}"
            );
        }
    }

    #[test]
    fn estimate_is_close_and_reproducible() {
        let d = parse_database("@uniform a b c d\nR(?1, ?2)\nR(?3, ?4)\nR(?5, a)\nS(?2)\nS(?4)").unwrap();
        let u = parse_query("R(X, X), S(X)").unwrap();
        let exact = brute_val(&d, &u, false).unwrap();
        let cfg = ApproxConfig {
            epsilon: 0.1,
            delta: 0.05,
            seed: 7,
            ..Default::default()
        };
        let a = karp_luby(&d, &u, &cfg).unwrap();
        let b = karp_luby(&d, &u, &ApproxConfig { jobs: 3, ..cfg }).unwrap();
        assert_eq!(a, b);
        let (e, x): (f64, f64) = (a.value.to_string().parse().unwrap(), exact.to_string().parse().unwrap());
        assert!((e - x).abs() <= 0.1 * x, "{e} vs {x}");
    }

    #[test]
    fn trivial_cases_are_exact() {
        let d = parse_database("@uniform a b\nR(a)\nR(?1)").unwrap();
        let e = karp_luby(&d, &parse_query("R(a)").unwrap(), &ApproxConfig::default()).unwrap();
        assert!(e.exact);
        assert_eq!(e.value, Count::from(2u32));
        let e = karp_luby(&d, &parse_query("S(X)").unwrap(), &ApproxConfig::default()).unwrap();
        assert_eq!(e.value, Count::zero());
    }
}
