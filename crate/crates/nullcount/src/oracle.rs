//! Exponential reference counters: query evaluation, counting by enumerating
//! valuations, and brute-force counters for graph and formula problems.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{Count, GroundDatabase, GroundFact, IncompleteDatabase, Term};
use crate::query::{Arg, UnionQuery};

/// Limits for the enumerating counters.
#[derive(Clone, Copy, Debug)]
pub struct OracleConfig {
    pub valuation_cap: u64,
    /// States kept by the fact-by-fact sweep.
    pub state_cap: usize,
    pub jobs: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            valuation_cap: 1 << 24,
            state_cap: 1 << 22,
            jobs: 1,
        }
    }
}

/// True iff some disjunct maps homomorphically into the database.
pub fn eval(q: &UnionQuery, g: &GroundDatabase) -> bool {
    let mut by_rel: BTreeMap<&str, Vec<&[String]>> = BTreeMap::new();
    for f in g.facts() {
        by_rel.entry(&f.relation).or_default().push(&f.args);
    }
    q.disjuncts().iter().any(|d| {
        let mut atoms: Vec<&crate::query::Atom> = d.atoms().iter().collect();
        atoms.sort_by_key(|a| by_rel.get(a.relation.as_str()).map_or(0, Vec::len));
        let mut bind: BTreeMap<&str, &str> = BTreeMap::new();
        hom(&atoms, &by_rel, &mut bind)
    })
}

fn hom<'a>(
    atoms: &[&'a crate::query::Atom],
    by_rel: &BTreeMap<&str, Vec<&'a [String]>>,
    bind: &mut BTreeMap<&'a str, &'a str>,
) -> bool {
    let Some((a, rest)) = atoms.split_first() else {
        return true;
    };
    let Some(tuples) = by_rel.get(a.relation.as_str()) else {
        return false;
    };
    'tuples: for t in tuples {
        if t.len() != a.args.len() {
            continue;
        }
        let mut added = Vec::new();
        for (arg, val) in a.args.iter().zip(t.iter()) {
            let ok = match arg {
                Arg::Const(c) => c == val,
                Arg::Var(x) => match bind.get(x.as_str()) {
                    Some(v) => *v == val,
                    None => {
                        bind.insert(x, val);
                        added.push(x.as_str());
                        true
                    }
                },
            };
            if !ok {
                for x in added {
                    bind.remove(x);
                }
                continue 'tuples;
            }
        }
        if hom(rest, by_rel, bind) {
            return true;
        }
        for x in added {
            bind.remove(x);
        }
    }
    false
}

#[derive(Clone, Copy)]
enum Slot {
    C(u32),
    N(usize),
}

#[derive(Clone, Copy)]
enum QSlot {
    C(u32),
    V(usize),
    Missing,
}

type Tuple = (usize, Vec<u32>);

/// Interned form of a database and query used by the enumerating counters.
struct Compiled {
    names: Vec<String>,
    facts: Vec<(usize, Vec<Slot>)>,
    domains: Vec<Vec<u32>>,
    relations: usize,
    query: Vec<Vec<(Option<usize>, Vec<QSlot>)>>,
}

impl Compiled {
    fn new(db: &IncompleteDatabase, q: Option<&UnionQuery>) -> Self {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut names = Vec::new();
        let mut intern = |s: &str, names: &mut Vec<String>| -> u32 {
            *ids.entry(s.to_string()).or_insert_with(|| {
                names.push(s.to_string());
                (names.len() - 1) as u32
            })
        };
        let rels: Vec<String> = db.schema().into_keys().collect();
        let rel_ix = |r: &str| rels.iter().position(|x| x == r);
        let null_ix: HashMap<&str, usize> = db.nulls().iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let domains = db
            .nulls()
            .iter()
            .map(|n| db.domain_of(n).iter().map(|c| intern(c, &mut names)).collect())
            .collect();
        let facts = db
            .facts()
            .iter()
            .map(|f| {
                let args = f
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => Slot::C(intern(c, &mut names)),
                        Term::Null(n) => Slot::N(null_ix[n.as_str()]),
                    })
                    .collect();
                (rel_ix(&f.relation).unwrap(), args)
            })
            .collect();
        let query = q
            .map(|q| {
                q.disjuncts()
                    .iter()
                    .map(|d| {
                        let vars: Vec<&str> = d.vars().into_iter().collect();
                        d.atoms()
                            .iter()
                            .map(|a| {
                                let r = rel_ix(&a.relation).filter(|&i| db.schema()[&rels[i]] == a.args.len());
                                let args = a
                                    .args
                                    .iter()
                                    .map(|x| match x {
                                        Arg::Var(v) => QSlot::V(vars.iter().position(|y| y == v).unwrap()),
                                        Arg::Const(c) => match ids.get(c.as_str()) {
                                            Some(&i) => QSlot::C(i),
                                            None => QSlot::Missing,
                                        },
                                    })
                                    .collect();
                                (r, args)
                            })
                            .collect()
                    })
                    .collect()
            })
            .unwrap_or_default();
        Compiled {
            names,
            relations: rels.len(),
            facts,
            domains,
            query,
        }
    }

    fn ground(&self, vals: &[u32], out: &mut Vec<Tuple>) {
        out.clear();
        for (r, args) in &self.facts {
            out.push((
                *r,
                args.iter()
                    .map(|s| match s {
                        Slot::C(c) => *c,
                        Slot::N(n) => vals[*n],
                    })
                    .collect(),
            ));
        }
        out.sort_unstable();
        out.dedup();
    }

    fn holds(&self, tuples: &[Tuple]) -> bool {
        let mut by_rel: Vec<Vec<&[u32]>> = vec![Vec::new(); self.relations];
        for (r, t) in tuples {
            by_rel[*r].push(t);
        }
        self.query.iter().any(|d| {
            let nvars = d.iter().flat_map(|(_, a)| a.iter()).fold(0, |m, s| match s {
                QSlot::V(v) => m.max(v + 1),
                _ => m,
            });
            let mut bind = vec![None; nvars];
            let mut order: Vec<usize> = (0..d.len()).collect();
            order.sort_by_key(|&i| d[i].0.map_or(0, |r| by_rel[r].len()));
            chom(d, &order, &by_rel, &mut bind)
        })
    }
}

fn chom(
    d: &[(Option<usize>, Vec<QSlot>)],
    order: &[usize],
    by_rel: &[Vec<&[u32]>],
    bind: &mut Vec<Option<u32>>,
) -> bool {
    let Some((&i, rest)) = order.split_first() else {
        return true;
    };
    let (Some(r), args) = (&d[i].0, &d[i].1) else {
        return false;
    };
    'tuples: for t in &by_rel[*r] {
        let mut added = Vec::new();
        for (s, &v) in args.iter().zip(t.iter()) {
            let ok = match *s {
                QSlot::Missing => false,
                QSlot::C(c) => c == v,
                QSlot::V(x) => match bind[x] {
                    Some(b) => b == v,
                    None => {
                        bind[x] = Some(v);
                        added.push(x);
                        true
                    }
                },
            };
            if !ok {
                for x in added {
                    bind[x] = None;
                }
                continue 'tuples;
            }
        }
        if chom(d, rest, by_rel, bind) {
            return true;
        }
        for x in added {
            bind[x] = None;
        }
    }
    false
}

fn check_cap(db: &IncompleteDatabase, cfg: &OracleConfig) -> Result<u64> {
    match db.total_valuations_u64() {
        Some(t) if t <= cfg.valuation_cap => Ok(t),
        _ => Err(Error::Resource(format!(
            "{} valuations exceed the enumeration cap of {}",
            db.total_valuations(),
            cfg.valuation_cap
        ))),
    }
}

/// Runs `work` on disjoint index ranges, one per job, and returns the results in range order.
fn split<T: Send>(total: u64, jobs: usize, work: impl Fn(u64, u64) -> T + Sync) -> Vec<T> {
    let jobs = (jobs.max(1) as u64).min(total.max(1));
    let chunk = total.div_ceil(jobs);
    if jobs == 1 {
        return vec![work(0, total)];
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let work = &work;
                s.spawn(move || work(j * chunk, ((j + 1) * chunk).min(total)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

struct Odometer<'a> {
    domains: &'a [Vec<u32>],
    digits: Vec<usize>,
    vals: Vec<u32>,
}

impl<'a> Odometer<'a> {
    fn at(domains: &'a [Vec<u32>], mut index: u64) -> Self {
        let mut digits = vec![0; domains.len()];
        for i in (0..domains.len()).rev() {
            let r = domains[i].len() as u64;
            digits[i] = (index % r) as usize;
            index /= r;
        }
        let vals = digits.iter().zip(domains).map(|(&d, dom)| dom[d]).collect();
        Odometer { domains, digits, vals }
    }

    fn step(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.domains[i].len() {
                self.vals[i] = self.domains[i][self.digits[i]];
                return;
            }
            self.digits[i] = 0;
            self.vals[i] = self.domains[i][0];
        }
    }
}

/// Number of valuations whose completion satisfies `q` (or violates it when `negated`).
pub fn brute_val(db: &IncompleteDatabase, q: &UnionQuery, negated: bool) -> Result<Count> {
    brute_val_with(db, q, negated, &OracleConfig::default())
}

pub fn brute_val_with(db: &IncompleteDatabase, q: &UnionQuery, negated: bool, cfg: &OracleConfig) -> Result<Count> {
    let total = check_cap(db, cfg)?;
    let c = Compiled::new(db, Some(q));
    let parts = split(total, cfg.jobs, |start, end| {
        let mut odo = Odometer::at(&c.domains, start);
        let mut buf = Vec::new();
        let mut n = 0u64;
        for _ in start..end {
            c.ground(&odo.vals, &mut buf);
            if c.holds(&buf) != negated {
                n += 1;
            }
            odo.step();
        }
        n
    });
    Ok(Count::from(parts.into_iter().sum::<u64>()))
}

/// Number of distinct completions satisfying `q` (or violating it when `negated`).
pub fn brute_comp(db: &IncompleteDatabase, q: &UnionQuery, negated: bool) -> Result<Count> {
    brute_comp_with(db, Some(q), negated, &OracleConfig::default())
}

/// Number of distinct completions; `None` counts all of them.
pub fn brute_comp_with(
    db: &IncompleteDatabase,
    q: Option<&UnionQuery>,
    negated: bool,
    cfg: &OracleConfig,
) -> Result<Count> {
    let total = check_cap(db, cfg)?;
    let c = Compiled::new(db, q);
    let parts = split(total, cfg.jobs, |start, end| {
        let mut odo = Odometer::at(&c.domains, start);
        let mut buf = Vec::new();
        let mut seen: HashSet<Vec<Tuple>> = HashSet::new();
        for _ in start..end {
            c.ground(&odo.vals, &mut buf);
            if !seen.contains(&buf) {
                seen.insert(buf.clone());
            }
            odo.step();
        }
        seen
    });
    let mut all = HashSet::new();
    for p in parts {
        all.extend(p);
    }
    let n = all.iter().filter(|t| q.is_none_or(|_| c.holds(t) != negated)).count();
    Ok(Count::from(n))
}

/// Every completion with the number of valuations producing it, computed by
/// sweeping over the facts and merging partial valuations that agree on the
/// nulls still to come and on the facts produced so far.
pub fn completion_distribution(db: &IncompleteDatabase, cfg: &OracleConfig) -> Result<BTreeMap<GroundDatabase, Count>> {
    let c = Compiled::new(db, None);
    let n = db.nulls().len();
    let mut first = vec![usize::MAX; n];
    let mut last = vec![0; n];
    for (i, (_, args)) in c.facts.iter().enumerate() {
        for s in args {
            if let Slot::N(k) = *s {
                first[k] = first[k].min(i);
                last[k] = i;
            }
        }
    }
    let base: Vec<Tuple> = c
        .facts
        .iter()
        .filter(|(_, args)| args.iter().all(|s| matches!(s, Slot::C(_))))
        .map(|(r, args)| {
            (
                *r,
                args.iter().map(|s| if let Slot::C(x) = s { *x } else { 0 }).collect(),
            )
        })
        .collect();
    // facts already present need not be tracked per state
    let base_set: HashSet<&Tuple> = base.iter().collect();
    let mut produced_ix: HashMap<Tuple, u32> = HashMap::new();
    let mut produced: Vec<Tuple> = Vec::new();
    // (assignment to live nulls, produced fact ids) -> valuation count
    type State = (Vec<(usize, u32)>, Vec<u32>);
    let mut states: HashMap<State, BigUint> = HashMap::new();
    states.insert((Vec::new(), Vec::new()), BigUint::from(1u32));
    for (i, (r, args)) in c.facts.iter().enumerate() {
        let fresh: Vec<usize> = {
            let mut v: Vec<usize> = args
                .iter()
                .filter_map(|s| match *s {
                    Slot::N(k) if first[k] == i => Some(k),
                    _ => None,
                })
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        if fresh.is_empty() && args.iter().all(|s| matches!(s, Slot::C(_))) {
            continue;
        }
        let mut next: HashMap<State, BigUint> = HashMap::new();
        for ((assign, set), count) in states {
            let mut odo_doms: Vec<Vec<u32>> = fresh.iter().map(|&k| c.domains[k].clone()).collect();
            if odo_doms.is_empty() {
                odo_doms.push(vec![0]);
            }
            let combos: u64 = odo_doms.iter().map(|d| d.len() as u64).product();
            let mut odo = Odometer::at(&odo_doms, 0);
            for _ in 0..combos {
                let lookup = |k: usize| -> u32 {
                    match fresh.iter().position(|&f| f == k) {
                        Some(p) => odo.vals[p],
                        None => assign.iter().find(|(n, _)| *n == k).unwrap().1,
                    }
                };
                let t: Tuple = (
                    *r,
                    args.iter()
                        .map(|s| match *s {
                            Slot::C(x) => x,
                            Slot::N(k) => lookup(k),
                        })
                        .collect(),
                );
                let mut nset = set.clone();
                if !base_set.contains(&t) {
                    let id = *produced_ix.entry(t.clone()).or_insert_with(|| {
                        produced.push(t);
                        (produced.len() - 1) as u32
                    });
                    if let Err(p) = nset.binary_search(&id) {
                        nset.insert(p, id);
                    }
                }
                let mut nassign: Vec<(usize, u32)> = assign.iter().copied().filter(|(k, _)| last[*k] > i).collect();
                for (p, &k) in fresh.iter().enumerate() {
                    if last[k] > i {
                        nassign.push((k, odo.vals[p]));
                    }
                }
                nassign.sort_unstable();
                *next.entry((nassign, nset)).or_insert_with(BigUint::zero) += &count;
                odo.step();
            }
        }
        if next.len() > cfg.state_cap {
            return Err(Error::Resource(format!(
                "sweep needs more than {} states",
                cfg.state_cap
            )));
        }
        states = next;
    }
    let mut out: BTreeMap<GroundDatabase, Count> = BTreeMap::new();
    let to_fact =
        |(r, t): &Tuple, rels: &[String]| GroundFact::new(&rels[*r], t.iter().map(|&x| c.names[x as usize].as_str()));
    let rels: Vec<String> = db.schema().into_keys().collect();
    for ((_, set), count) in states {
        let facts: Vec<GroundFact> = base
            .iter()
            .chain(set.iter().map(|&id| &produced[id as usize]))
            .map(|t| to_fact(t, &rels))
            .collect();
        *out.entry(GroundDatabase::new(facts)).or_insert_with(BigUint::zero) += count;
    }
    Ok(out)
}

/// Valuation and completion counts for `q` read off a completion distribution.
pub fn sweep_counts(
    db: &IncompleteDatabase,
    q: Option<&UnionQuery>,
    negated: bool,
    cfg: &OracleConfig,
) -> Result<(Count, Count)> {
    let dist = completion_distribution(db, cfg)?;
    let mut val = Count::zero();
    let mut comp = 0usize;
    for (g, n) in &dist {
        if q.is_none_or(|q| eval(q, g) != negated) {
            val += n;
            comp += 1;
        }
    }
    Ok((val, Count::from(comp)))
}

/// A simple undirected graph with an optional bipartition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    nodes: Vec<String>,
    edges: Vec<(usize, usize)>,
    left: Option<BTreeSet<usize>>,
}

impl Graph {
    pub fn new(nodes: Vec<String>, edges: Vec<(usize, usize)>, left: Option<BTreeSet<usize>>) -> Result<Self> {
        let uniq: BTreeSet<&String> = nodes.iter().collect();
        if uniq.len() != nodes.len() {
            return Err(Error::Invalid("duplicate node name".into()));
        }
        if let Some(n) = nodes.iter().find(|n| !crate::model::valid_name(n)) {
            return Err(Error::Invalid(format!("bad node name {n:?}")));
        }
        let mut es = Vec::new();
        for (a, b) in edges {
            if a >= nodes.len() || b >= nodes.len() {
                return Err(Error::Invalid("edge endpoint out of range".into()));
            }
            if a == b {
                return Err(Error::Invalid(format!("self-loop on {}", nodes[a])));
            }
            es.push((a.min(b), a.max(b)));
        }
        es.sort_unstable();
        es.dedup();
        if let Some(l) = &left {
            if l.iter().any(|&u| u >= nodes.len()) {
                return Err(Error::Invalid("left side names an unknown node".into()));
            }
            if es.iter().any(|(a, b)| l.contains(a) == l.contains(b)) {
                return Err(Error::Invalid("an edge does not cross the bipartition".into()));
            }
        }
        Ok(Graph { nodes, edges: es, left })
    }

    /// Graph on nodes `v0 .. v{n-1}`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new((0..n).map(|i| format!("v{i}")).collect(), edges.to_vec(), None)
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Self::from_edges(n, &edges).unwrap()
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).unwrap()
    }

    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        Self::from_edges(n, &edges).unwrap()
    }

    /// Same graph, with the bipartition given by a proper 2-coloring if one exists.
    pub fn with_bipartition(mut self) -> Option<Self> {
        let n = self.nodes.len();
        let mut color = vec![None; n];
        for s in 0..n {
            if color[s].is_some() {
                continue;
            }
            color[s] = Some(true);
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for v in self.neighbors(u) {
                    match color[v] {
                        None => {
                            color[v] = Some(!color[u].unwrap());
                            stack.push(v);
                        }
                        Some(c) if c == color[u].unwrap() => return None,
                        _ => {}
                    }
                }
            }
        }
        self.left = Some((0..n).filter(|&i| color[i] == Some(true)).collect());
        Some(self)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn left(&self) -> Option<&BTreeSet<usize>> {
        self.left.as_ref()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == u {
                Some(b)
            } else if b == u {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Parses `nodes: a b c`, `edge a b` and `left: a` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes: Vec<String> = Vec::new();
        let mut edges = Vec::new();
        let mut left: Option<Vec<(usize, String)>> = None;
        let mut pending = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap();
            let col = |tok: &str| line.find(tok).map_or(1, |p| p + 1);
            let mut words = line.split_whitespace();
            let Some(head) = words.next() else { continue };
            match head {
                "nodes:" => {
                    for w in words {
                        if nodes.iter().any(|n| n == w) {
                            return Err(Error::parse(i + 1, col(w), format!("node {w} declared twice")));
                        }
                        nodes.push(w.to_string());
                    }
                }
                "edge" => {
                    let ends: Vec<&str> = words.collect();
                    if ends.len() != 2 {
                        return Err(Error::parse(i + 1, 1, "an edge needs two endpoints"));
                    }
                    pending.push((i + 1, col(ends[0]), ends[0].to_string(), ends[1].to_string()));
                }
                "left:" => {
                    left.get_or_insert_with(Vec::new)
                        .extend(words.map(|w| (i + 1, w.to_string())));
                }
                _ => return Err(Error::parse(i + 1, col(head), format!("unknown line kind {head:?}"))),
            }
        }
        let ix = |n: &str| nodes.iter().position(|m| m == n);
        for (line, col, a, b) in pending {
            match (ix(&a), ix(&b)) {
                (Some(x), Some(y)) => edges.push((x, y)),
                _ => return Err(Error::parse(line, col, format!("edge {a} {b} uses an undeclared node"))),
            }
        }
        let left = match left {
            None => None,
            Some(ws) => {
                let mut s = BTreeSet::new();
                for (line, w) in ws {
                    s.insert(ix(&w).ok_or_else(|| Error::parse(line, 1, format!("unknown node {w}")))?);
                }
                Some(s)
            }
        };
        Graph::new(nodes, edges, left)
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nodes: {}", self.nodes.join(" "))?;
        if let Some(l) = &self.left {
            let names: Vec<&str> = l.iter().map(|&i| self.nodes[i].as_str()).collect();
            writeln!(f, "left: {}", names.join(" "))?;
        }
        for (a, b) in &self.edges {
            writeln!(f, "edge {} {}", self.nodes[*a], self.nodes[*b])?;
        }
        Ok(())
    }
}

/// A 3-CNF formula; literal `-i` is the negation of variable `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf3 {
    pub num_vars: usize,
    pub clauses: Vec<[i32; 3]>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self> {
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > num_vars {
                    return Err(Error::Invalid(format!("literal {l} out of range 1..={num_vars}")));
                }
            }
        }
        Ok(Cnf3 { num_vars, clauses })
    }

    /// Parses `c3 1 -2 3` clause lines and an optional `p cnf <vars> <clauses>` header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut declared = 0usize;
        let mut clauses = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap();
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.first() {
                None => continue,
                Some(&"p") => {
                    if words.len() < 3 || words[1] != "cnf" {
                        return Err(Error::parse(i + 1, 1, "expected `p cnf <vars> <clauses>`"));
                    }
                    declared = words[2]
                        .parse()
                        .map_err(|_| Error::parse(i + 1, line.find(words[2]).unwrap() + 1, "bad variable count"))?;
                }
                Some(&"c3") => {
                    if words.len() != 4 {
                        return Err(Error::parse(i + 1, 1, "a clause needs exactly three literals"));
                    }
                    let mut c = [0i32; 3];
                    for (k, w) in words[1..].iter().enumerate() {
                        c[k] = w.parse().ok().filter(|&l: &i32| l != 0).ok_or_else(|| {
                            Error::parse(i + 1, line.find(w).unwrap() + 1, format!("bad literal {w:?}"))
                        })?;
                    }
                    clauses.push(c);
                }
                Some(w) => {
                    return Err(Error::parse(
                        i + 1,
                        line.find(w).unwrap() + 1,
                        format!("unknown line kind {w:?}"),
                    ))
                }
            }
        }
        let max = clauses
            .iter()
            .flatten()
            .map(|l| l.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        Cnf3::new(declared.max(max), clauses)
    }

    pub fn satisfied_by(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let bit = assignment >> (l.unsigned_abs() - 1) & 1 == 1;
                bit == (l > 0)
            })
        })
    }
}

impl fmt::Display for Cnf3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            writeln!(f, "c3 {} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

pub const DEFAULT_GRAPH_CAP: usize = 20;
pub const DEFAULT_CNF_CAP: usize = 24;

fn graph_cap(g: &Graph, cap: usize) -> Result<()> {
    if g.nodes.len() > cap {
        return Err(Error::Resource(format!(
            "{} nodes exceed the cap of {cap}",
            g.nodes.len()
        )));
    }
    Ok(())
}

/// Proper colorings with three colors.
pub fn count_3col(g: &Graph) -> Result<Count> {
    graph_cap(g, DEFAULT_GRAPH_CAP)?;
    let n = g.nodes.len();
    let mut colors = vec![0u8; n];
    let mut count = 0u64;
    fn go(g: &Graph, i: usize, colors: &mut [u8], count: &mut u64) {
        if i == colors.len() {
            *count += 1;
            return;
        }
        for c in 0..3 {
            if g.neighbors(i).any(|j| j < i && colors[j] == c) {
                continue;
            }
            colors[i] = c;
            go(g, i + 1, colors, count);
        }
    }
    go(g, 0, &mut colors, &mut count);
    Ok(Count::from(count))
}

fn subsets_where(g: &Graph, ok: impl Fn(u64, (usize, usize)) -> bool) -> Result<Count> {
    graph_cap(g, DEFAULT_GRAPH_CAP)?;
    let n = g.nodes.len();
    let count = (0..1u64 << n).filter(|&s| g.edges.iter().all(|&e| ok(s, e))).count();
    Ok(Count::from(count))
}

/// Independent sets, including the empty set.
pub fn count_is(g: &Graph) -> Result<Count> {
    subsets_where(g, |s, (a, b)| s >> a & 1 == 0 || s >> b & 1 == 0)
}

/// Vertex covers, including the full node set.
pub fn count_vc(g: &Graph) -> Result<Count> {
    subsets_where(g, |s, (a, b)| s >> a & 1 == 1 || s >> b & 1 == 1)
}

/// True iff every connected component has at most as many edges as nodes.
pub fn is_pseudoforest(nodes: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut n_count = vec![0usize; nodes];
    let mut e_count = vec![0usize; nodes];
    for v in 0..nodes {
        let r = find(&mut parent, v);
        n_count[r] += 1;
    }
    for &(a, _) in edges {
        let r = find(&mut parent, a);
        e_count[r] += 1;
    }
    (0..nodes).all(|r| e_count[r] <= n_count[r])
}

/// An orientation in which every node has out-degree at most one, as
/// `(tail, head)` pairs, or `None` if there is none. Each edge is matched to
/// the endpoint that becomes its tail.
pub fn pseudoforest_orientation(nodes: usize, edges: &[(usize, usize)]) -> Option<Vec<(usize, usize)>> {
    let adj: Vec<Vec<usize>> = edges.iter().map(|&(a, b)| vec![a, b]).collect();
    let m = crate::compsem::maximum_matching(edges.len(), nodes, &adj);
    if m.iter().any(Option::is_none) {
        return None;
    }
    Some(
        edges
            .iter()
            .zip(m)
            .map(|(&(a, b), t)| {
                let t = t.unwrap();
                (t, if t == a { b } else { a })
            })
            .collect(),
    )
}

/// Edge subsets forming a pseudoforest on the node set.
pub fn count_pf(g: &Graph) -> Result<Count> {
    let m = g.edges.len();
    if m > 2 * DEFAULT_GRAPH_CAP {
        return Err(Error::Resource(format!(
            "{m} edges exceed the cap of {}",
            2 * DEFAULT_GRAPH_CAP
        )));
    }
    let n = g.nodes.len();
    let count = (0..1u64 << m)
        .filter(|&s| {
            let sub: Vec<_> = (0..m).filter(|i| s >> i & 1 == 1).map(|i| g.edges[i]).collect();
            is_pseudoforest(n, &sub)
        })
        .count();
    Ok(Count::from(count))
}

/// Assignments of the first `k` variables that extend to a satisfying assignment.
pub fn count_k3sat(f: &Cnf3, k: usize) -> Result<Count> {
    if f.num_vars > DEFAULT_CNF_CAP {
        return Err(Error::Resource(format!(
            "{} variables exceed the cap of {DEFAULT_CNF_CAP}",
            f.num_vars
        )));
    }
    if k > f.num_vars {
        return Err(Error::Invalid(format!("k = {k} exceeds the {} variables", f.num_vars)));
    }
    let rest = f.num_vars - k;
    let count = (0..1u64 << k)
        .filter(|&p| (0..1u64 << rest).any(|s| f.satisfied_by(p | s << k)))
        .count();
    Ok(Count::from(count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_database;
    use crate::query::parse_query;

    const FIG1: &str = "dom ?1 : a b c\ndom ?2 : a b\nS(a, b)\nS(?1, a)\nS(a, ?2)\n";

    fn g(facts: &[(&str, &[&str])]) -> GroundDatabase {
        GroundDatabase::new(
            facts
                .iter()
                .map(|(r, a)| GroundFact::new(*r, a.iter().copied()))
                .collect(),
        )
    }

    #[test]
    fn eval_examples() {
        let q = parse_query("S(X,X)").unwrap();
        assert!(eval(&q, &g(&[("S", &["a", "b"]), ("S", &["a", "a"])])));
        assert!(!eval(&q, &g(&[("S", &["a", "b"]), ("S", &["b", "a"])])));
        assert!(!eval(&parse_query("R(X)").unwrap(), &GroundDatabase::default()));
        assert!(eval(
            &parse_query("R(X), S(X,c)").unwrap(),
            &g(&[("R", &["b"]), ("S", &["b", "c"])])
        ));
    }

    #[test]
    fn fig1_counts() {
        let db = parse_database(FIG1).unwrap();
        let q = parse_query("S(X,X)").unwrap();
        assert_eq!(brute_val(&db, &q, false).unwrap(), Count::from(4u32));
        assert_eq!(brute_val(&db, &q, true).unwrap(), Count::from(2u32));
        assert_eq!(brute_comp(&db, &q, false).unwrap(), Count::from(3u32));
        let (v, c) = sweep_counts(&db, Some(&q), false, &OracleConfig::default()).unwrap();
        assert_eq!((v, c), (Count::from(4u32), Count::from(3u32)));
    }

    #[test]
    fn small_completion_counts() {
        let db = parse_database("dom ?1 : a b\nR(?1)").unwrap();
        assert_eq!(
            brute_comp(&db, &parse_query("R(X)").unwrap(), false).unwrap(),
            Count::from(2u32)
        );
        let db = parse_database("dom ?1 : a b\nR(?1)\nS(?1)").unwrap();
        assert_eq!(
            brute_comp(&db, &parse_query("R(X), S(Y)").unwrap(), false).unwrap(),
            Count::from(2u32)
        );
        let db = parse_database("dom ?1 : a b\nS(?1)").unwrap();
        assert!(brute_val(&db, &parse_query("R(X)").unwrap(), false).unwrap().is_zero());
    }

    #[test]
    fn cap_is_reported() {
        let db = parse_database("@uniform a b\nR(?1, ?2, ?3)").unwrap();
        let cfg = OracleConfig {
            valuation_cap: 4,
            ..Default::default()
        };
        let q = parse_query("R(X,Y,Z)").unwrap();
        assert!(matches!(brute_val_with(&db, &q, false, &cfg), Err(Error::Resource(_))));
    }

    #[test]
    fn jobs_do_not_change_results() {
        let db = parse_database("@uniform a b c\nR(?1, ?2)\nR(?2, ?3)\nS(?3, a)").unwrap();
        let q = parse_query("R(X,X) | S(b,Y)").unwrap();
        let one = OracleConfig::default();
        let three = OracleConfig { jobs: 3, ..one };
        assert_eq!(
            brute_val_with(&db, &q, false, &one).unwrap(),
            brute_val_with(&db, &q, false, &three).unwrap()
        );
        assert_eq!(
            brute_comp_with(&db, Some(&q), false, &one).unwrap(),
            brute_comp_with(&db, Some(&q), false, &three).unwrap()
        );
    }

    #[test]
    fn reference_counters() {
        let k3 = Graph::complete(3);
        assert_eq!(count_3col(&k3).unwrap(), Count::from(6u32));
        assert_eq!(count_is(&k3).unwrap(), Count::from(4u32));
        assert_eq!(count_vc(&k3).unwrap(), Count::from(4u32));
        assert_eq!(count_pf(&Graph::path(2)).unwrap(), Count::from(2u32));
        assert_eq!(count_pf(&Graph::cycle(4)).unwrap(), Count::from(16u32));
        let f = Cnf3::new(3, vec![[1, 2, 3]]).unwrap();
        assert_eq!(count_k3sat(&f, 1).unwrap(), Count::from(2u32));
        let f = Cnf3::new(1, vec![[1, 1, 1]]).unwrap();
        assert_eq!(count_k3sat(&f, 1).unwrap(), Count::from(1u32));
    }

    #[test]
    fn orientation_agrees_with_component_test() {
        for mask in 0u32..1 << 10 {
            let all = Graph::complete(5);
            let sub: Vec<_> = (0..10).filter(|i| mask >> i & 1 == 1).map(|i| all.edges()[i]).collect();
            let o = pseudoforest_orientation(5, &sub);
            assert_eq!(o.is_some(), is_pseudoforest(5, &sub));
            if let Some(o) = o {
                let mut out = [0; 5];
                for (t, _) in o {
                    out[t] += 1;
                }
                assert!(out.iter().all(|&d| d <= 1));
            }
        }
    }

    #[test]
    fn graph_and_cnf_files() {
        let g = Graph::parse("nodes: a b c\nleft: a\nedge a b\nedge c a # comment\n").unwrap();
        assert_eq!(g.edges().len(), 2);
        assert_eq!(Graph::parse(&g.to_string()).unwrap(), g);
        assert!(matches!(
            Graph::parse("nodes: a\nedge a b"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(Graph::parse("nodes: a b\nleft: a b\nedge a b").is_err());
        let f = Cnf3::parse("c3 1 -2 3\nc3 -1 -1 2\n").unwrap();
        assert_eq!(f.num_vars, 3);
        assert_eq!(Cnf3::parse(&f.to_string()).unwrap(), f);
        assert!(matches!(
            Cnf3::parse("c3 1 0 2"),
            Err(Error::Parse { line: 1, column: 6, .. })
        ));
    }
}
