//! Generators for the hardness reductions. Each output carries the count
//! identity relating a counting problem on the generated database to a
//! counting problem on the source graph or formula, and
//! [`verify_identity`] checks it with the reference counters.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::classify::{DomainKind, Problem, ProblemKind, Setting, TableKind};
use crate::error::{Error, Result};
use crate::exact::pow;
use crate::model::{Count, Domains, Fact, IncompleteDatabase, Term};
use crate::oracle::{
    brute_comp_with, brute_val_with, count_3col, count_is, count_k3sat, count_pf, count_vc, sweep_counts, Cnf3, Graph,
    OracleConfig,
};
use crate::query::{parse_query, UnionQuery};

/// Counting problem on the source instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reference {
    ThreeColorings,
    IndependentSets,
    VertexCovers,
    Pseudoforests,
    /// 1 if the graph is 3-colourable, else 0.
    ThreeColorable,
    /// Assignments of the first `k` variables that extend to a model.
    ExtendableAssignments {
        k: usize,
    },
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::ThreeColorings => write!(f, "#3COL(G)"),
            Reference::IndependentSets => write!(f, "#IS(G)"),
            Reference::VertexCovers => write!(f, "#VC(G)"),
            Reference::Pseudoforests => write!(f, "#PF(G)"),
            Reference::ThreeColorable => write!(f, "[G is 3-colorable]"),
            Reference::ExtendableAssignments { k } => write!(f, "#{k}3SAT(F)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `scale × problem(database) = base ± reference(source)`. With no query the
/// problem counts all completions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Identity {
    pub problem: Problem,
    pub scale: Count,
    pub base: Count,
    pub sign: Sign,
    pub reference: Reference,
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.scale.is_one() {
            write!(f, "{} × ", self.scale)?;
        }
        write!(f, "{}(D) = ", self.problem)?;
        let op = match self.sign {
            Sign::Plus => "+",
            Sign::Minus => "−",
        };
        if self.base.is_zero() && self.sign == Sign::Plus {
            write!(f, "{}", self.reference)
        } else {
            write!(f, "{} {op} {}", self.base, self.reference)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Graph(Graph),
    Cnf(Cnf3),
}

#[derive(Clone, Debug)]
pub struct GadgetOutput {
    pub name: &'static str,
    pub database: IncompleteDatabase,
    /// `None` when the identity counts all completions.
    pub query: Option<UnionQuery>,
    pub setting: Setting,
    pub identity: Identity,
    pub source: Source,
}

/// Names of the generators accepted by [`gadget_by_name`].
pub const GADGET_NAMES: [&str; 8] = [
    "3col",
    "is-val-rst",
    "is-val-rxy",
    "vc",
    "is-comp",
    "pf",
    "3col-comp",
    "k3sat",
];

/// Graph or formula a gadget is built from.
pub enum Instance<'a> {
    Graph(&'a Graph),
    Cnf(&'a Cnf3, usize),
}

pub fn gadget_by_name(name: &str, inst: Instance<'_>) -> Result<GadgetOutput> {
    match (name, inst) {
        ("3col", Instance::Graph(g)) => gadget_3col(g),
        ("is-val-rst", Instance::Graph(g)) => gadget_is_val(g, IsVariant::Rst),
        ("is-val-rxy", Instance::Graph(g)) => gadget_is_val(g, IsVariant::RxySxy),
        ("vc", Instance::Graph(g)) => gadget_vc(g),
        ("is-comp", Instance::Graph(g)) => gadget_is_comp(g),
        ("pf", Instance::Graph(g)) => gadget_pf(g),
        ("3col-comp", Instance::Graph(g)) => gadget_3col_comp(g),
        ("k3sat", Instance::Cnf(f, k)) => gadget_k3sat(f, k),
        ("k3sat", Instance::Graph(_)) => Err(Error::Invalid("gadget k3sat takes a formula".into())),
        (n, Instance::Cnf(..)) if GADGET_NAMES.contains(&n) => Err(Error::Invalid(format!("gadget {n} takes a graph"))),
        (n, _) => Err(Error::Invalid(format!(
            "unknown gadget {n}; expected one of {}",
            GADGET_NAMES.join(", ")
        ))),
    }
}

fn null(name: &str) -> Term {
    Term::null(format!("n_{name}"))
}

fn c(name: &str) -> Term {
    Term::constant(name)
}

fn fact(rel: &str, args: Vec<Term>) -> Fact {
    Fact::new(rel, args)
}

/// `base`, or `base` with underscores appended until it avoids `taken`.
fn fresh<'a>(base: &str, taken: impl IntoIterator<Item = &'a String>) -> String {
    let taken: BTreeSet<&String> = taken.into_iter().collect();
    let mut s = base.to_string();
    while taken.contains(&s) {
        s.push('_');
    }
    s
}

fn isolated(g: &Graph) -> usize {
    (0..g.nodes().len())
        .filter(|&u| g.neighbors(u).next().is_none())
        .count()
}

fn uniform_setting(table: TableKind) -> Setting {
    Setting::new(table, DomainKind::Uniform)
}

fn query(text: &str) -> Option<UnionQuery> {
    Some(parse_query(text).expect("gadget queries are well formed"))
}

/// Valuations satisfying `R(x,x)` on the graph's edges, coloured by {1,2,3}.
pub fn gadget_3col(g: &Graph) -> Result<GadgetOutput> {
    let mut facts = Vec::new();
    for &(a, b) in g.edges() {
        let (u, v) = (&g.nodes()[a], &g.nodes()[b]);
        facts.push(fact("R", vec![null(u), null(v)]));
        facts.push(fact("R", vec![null(v), null(u)]));
    }
    let database = IncompleteDatabase::new(facts, Domains::uniform(["1", "2", "3"]))?;
    Ok(GadgetOutput {
        name: "3col",
        database,
        query: query("R(X, X)"),
        setting: uniform_setting(TableKind::Naive),
        identity: Identity {
            problem: Problem::VAL,
            // nulls of isolated nodes occur in no fact
            scale: pow(3, isolated(g)),
            base: pow(3, g.nodes().len()),
            sign: Sign::Minus,
            reference: Reference::ThreeColorings,
        },
        source: Source::Graph(g.clone()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsVariant {
    /// Query `R(x) ∧ S(x,y) ∧ T(y)`.
    Rst,
    /// Query `R(x,y) ∧ S(x,y)`.
    RxySxy,
}

/// Independent sets as the valuations violating the query, over {0,1}.
pub fn gadget_is_val(g: &Graph, variant: IsVariant) -> Result<GadgetOutput> {
    let mut facts = Vec::new();
    for &(a, b) in g.edges() {
        let (u, v) = (&g.nodes()[a], &g.nodes()[b]);
        facts.push(fact("S", vec![null(u), null(v)]));
        facts.push(fact("S", vec![null(v), null(u)]));
    }
    let (name, q) = match variant {
        IsVariant::Rst => {
            facts.push(fact("R", vec![c("1")]));
            facts.push(fact("T", vec![c("1")]));
            ("is-val-rst", "R(X), S(X, Y), T(Y)")
        }
        IsVariant::RxySxy => {
            facts.push(fact("R", vec![c("1"), c("1")]));
            ("is-val-rxy", "R(X, Y), S(X, Y)")
        }
    };
    let database = IncompleteDatabase::new(facts, Domains::uniform(["0", "1"]))?;
    Ok(GadgetOutput {
        name,
        database,
        query: query(q),
        setting: uniform_setting(TableKind::Naive),
        identity: Identity {
            problem: Problem::VAL,
            scale: pow(2, isolated(g)),
            base: pow(2, g.nodes().len()),
            sign: Sign::Minus,
            reference: Reference::IndependentSets,
        },
        source: Source::Graph(g.clone()),
    })
}

/// Vertex covers as completions of a Codd table with per-null domains.
pub fn gadget_vc(g: &Graph) -> Result<GadgetOutput> {
    let anchor = fresh("a", g.nodes());
    let mut facts = vec![fact("R", vec![c(&anchor)])];
    let mut doms = BTreeMap::new();
    for (i, &(a, b)) in g.edges().iter().enumerate() {
        let n = format!("e{i}");
        facts.push(fact("R", vec![Term::null(&n)]));
        doms.insert(n, [g.nodes()[a].clone(), g.nodes()[b].clone()].into());
    }
    for u in g.nodes() {
        let n = format!("n_{u}");
        facts.push(fact("R", vec![Term::null(&n)]));
        doms.insert(n, [u.clone(), anchor.clone()].into());
    }
    let database = IncompleteDatabase::new(facts, Domains::PerNull(doms))?;
    Ok(GadgetOutput {
        name: "vc",
        database,
        query: query("R(X)"),
        setting: Setting::new(TableKind::Codd, DomainKind::NonUniform),
        identity: Identity {
            problem: Problem::COMP,
            scale: Count::one(),
            base: Count::zero(),
            sign: Sign::Plus,
            reference: Reference::VertexCovers,
        },
        source: Source::Graph(g.clone()),
    })
}

/// Completions of a uniform naive table over {0,1} counting `2^|V| + #IS`.
pub fn gadget_is_comp(g: &Graph) -> Result<GadgetOutput> {
    let mut facts = Vec::new();
    for u in g.nodes() {
        facts.push(fact("R", vec![c(&format!("n_{u}")), null(u)]));
    }
    for &(a, b) in g.edges() {
        let (u, v) = (&g.nodes()[a], &g.nodes()[b]);
        facts.push(fact("R", vec![null(u), null(v)]));
        facts.push(fact("R", vec![null(v), null(u)]));
    }
    // node nulls all start with "n_"
    let loose = "b";
    for (x, y) in [("0", "0"), ("0", "1"), ("1", "0")] {
        facts.push(fact("R", vec![c(x), c(y)]));
    }
    facts.push(fact("R", vec![Term::null(loose), Term::null(loose)]));
    let database = IncompleteDatabase::new(facts, Domains::uniform(["0", "1"]))?;
    Ok(GadgetOutput {
        name: "is-comp",
        database,
        query: query("R(X, X)"),
        setting: uniform_setting(TableKind::Naive),
        identity: Identity {
            problem: Problem::COMP,
            scale: Count::one(),
            base: pow(2, g.nodes().len()),
            sign: Sign::Plus,
            reference: Reference::IndependentSets,
        },
        source: Source::Graph(g.clone()),
    })
}

/// Pseudoforests of a bipartite graph as completions of a uniform Codd table.
pub fn gadget_pf(g: &Graph) -> Result<GadgetOutput> {
    let left = g
        .left()
        .ok_or_else(|| Error::Invalid("gadget pf needs a graph with a declared bipartition".into()))?;
    let n = g.nodes().len();
    let edges: BTreeSet<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(a, b)| if left.contains(&a) { (a, b) } else { (b, a) })
        .collect();
    let mut facts = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if !edges.contains(&(s, t)) {
                facts.push(fact("R", vec![c(&g.nodes()[s]), c(&g.nodes()[t])]));
            }
        }
    }
    for (i, u) in g.nodes().iter().enumerate() {
        if left.contains(&i) {
            facts.push(fact("R", vec![c(u), null(u)]));
        } else {
            facts.push(fact("R", vec![null(u), c(u)]));
        }
    }
    let f = fresh("f", g.nodes());
    facts.push(fact("R", vec![c(&f), c(&f)]));
    let database = IncompleteDatabase::new(facts, Domains::uniform(g.nodes().iter().cloned()))?;
    Ok(GadgetOutput {
        name: "pf",
        database,
        query: query("R(X, X)"),
        setting: uniform_setting(TableKind::Codd),
        identity: Identity {
            problem: Problem::COMP,
            scale: Count::one(),
            base: Count::zero(),
            sign: Sign::Plus,
            reference: Reference::Pseudoforests,
        },
        source: Source::Graph(g.clone()),
    })
}

/// A table with 8 completions when the graph is 3-colourable and 7 otherwise.
pub fn gadget_3col_comp(g: &Graph) -> Result<GadgetOutput> {
    let mut facts = Vec::new();
    for &(a, b) in g.edges() {
        let (u, v) = (&g.nodes()[a], &g.nodes()[b]);
        facts.push(fact("R", vec![null(u), null(v)]));
        facts.push(fact("R", vec![null(v), null(u)]));
    }
    for (x, y) in [("1", "2"), ("2", "1"), ("2", "3"), ("3", "2"), ("1", "3"), ("3", "1")] {
        facts.push(fact("R", vec![c(x), c(y)]));
    }
    for i in 1..=3 {
        let (p, q) = (Term::null(format!("aux{i}")), Term::null(format!("aux{i}p")));
        facts.push(fact("R", vec![p.clone(), q.clone()]));
        facts.push(fact("R", vec![q, p]));
    }
    facts.push(fact("R", vec![c("c"), c("c")]));
    let database = IncompleteDatabase::new(facts, Domains::uniform(["1", "2", "3"]))?;
    Ok(GadgetOutput {
        name: "3col-comp",
        database,
        query: None,
        setting: uniform_setting(TableKind::Naive),
        identity: Identity {
            problem: Problem::COMP,
            scale: Count::one(),
            base: Count::from(7u32),
            sign: Sign::Plus,
            reference: Reference::ThreeColorable,
        },
        source: Source::Graph(g.clone()),
    })
}

/// Completions violating the query count the assignments of the first `k`
/// variables that extend to a model of `f`.
pub fn gadget_k3sat(f: &Cnf3, k: usize) -> Result<GadgetOutput> {
    if k == 0 || k > f.num_vars {
        return Err(Error::Invalid(format!("k must lie in 1..={}", f.num_vars)));
    }
    let bits = |a: usize| [(a >> 2) & 1, (a >> 1) & 1, a & 1];
    let rel = |a: usize| {
        let [x, y, z] = bits(a);
        format!("C{x}{y}{z}")
    };
    let var = |i: usize| Term::null(format!("x{i}"));
    let mut facts = Vec::new();
    for a in 0..8 {
        for b in 0..8 {
            let (p, q) = (bits(a), bits(b));
            if (0..3).any(|i| p[i] == q[i]) {
                facts.push(fact(&rel(a), q.iter().map(|v| c(&v.to_string())).collect()));
            }
        }
    }
    for clause in &f.clauses {
        let a = clause.iter().fold(0, |acc, &l| acc << 1 | usize::from(l > 0));
        facts.push(fact(
            &rel(a),
            clause.iter().map(|l| var(l.unsigned_abs() as usize)).collect(),
        ));
    }
    for i in 1..=k {
        facts.push(fact("S", vec![c(&i.to_string()), var(i)]));
    }
    let database = IncompleteDatabase::new_merging(facts, Domains::uniform(["0", "1"]))?;
    let atoms: Vec<String> = (0..8).map(|a| format!("{}(X, Y, Z)", rel(a))).collect();
    Ok(GadgetOutput {
        name: "k3sat",
        database,
        query: query(&format!("S(U, V), {}", atoms.join(", "))),
        setting: uniform_setting(TableKind::Naive),
        identity: Identity {
            problem: Problem {
                kind: ProblemKind::Completions,
                negated: true,
            },
            scale: Count::one(),
            base: Count::zero(),
            sign: Sign::Plus,
            reference: Reference::ExtendableAssignments { k },
        },
        source: Source::Cnf(f.clone()),
    })
}

/// Both sides of an identity as evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    /// `scale × problem(database)`.
    pub lhs: Count,
    /// `base ± reference(source)`.
    pub rhs: Count,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

impl fmt::Display for IdentityCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.holds() {
            write!(f, "identity holds: {} = {}", self.lhs, self.rhs)
        } else {
            write!(f, "identity fails: {} ≠ {}", self.lhs, self.rhs)
        }
    }
}

/// Valuation counts up to this size are enumerated directly; larger tables
/// go through the completion sweep.
const DIRECT_LIMIT: u64 = 1 << 16;

/// Evaluates both sides of the identity with the reference counters.
pub fn verify_identity(out: &GadgetOutput) -> Result<IdentityCheck> {
    verify_identity_with(out, &OracleConfig::default())
}

pub fn verify_identity_with(out: &GadgetOutput, cfg: &OracleConfig) -> Result<IdentityCheck> {
    let id = &out.identity;
    let db = &out.database;
    let q = out.query.as_ref();
    let neg = id.problem.negated;
    let direct = db.total_valuations_u64().is_some_and(|n| n <= DIRECT_LIMIT);
    let value = match (id.problem.kind, direct) {
        (ProblemKind::Valuations, true) => match q {
            Some(q) => brute_val_with(db, q, neg, cfg)?,
            None => db.total_valuations(),
        },
        (ProblemKind::Completions, true) => brute_comp_with(db, q, neg, cfg)?,
        (ProblemKind::Valuations, false) => sweep_counts(db, q, neg, cfg)?.0,
        (ProblemKind::Completions, false) => sweep_counts(db, q, neg, cfg)?.1,
    };
    let reference = match (&out.source, id.reference) {
        (Source::Graph(g), Reference::ThreeColorings) => count_3col(g)?,
        (Source::Graph(g), Reference::IndependentSets) => count_is(g)?,
        (Source::Graph(g), Reference::VertexCovers) => count_vc(g)?,
        (Source::Graph(g), Reference::Pseudoforests) => count_pf(g)?,
        (Source::Graph(g), Reference::ThreeColorable) => Count::from(u32::from(!count_3col(g)?.is_zero())),
        (Source::Cnf(f), Reference::ExtendableAssignments { k }) => count_k3sat(f, k)?,
        _ => return Err(Error::Invalid("identity does not match its source instance".into())),
    };
    let rhs = match id.sign {
        Sign::Plus => &id.base + reference,
        Sign::Minus => {
            if reference > id.base {
                return Err(Error::Verification(format!(
                    "reference count {reference} exceeds the base {}",
                    id.base
                )));
            }
            &id.base - reference
        }
    };
    Ok(IdentityCheck {
        lhs: &id.scale * value,
        rhs,
    })
}
