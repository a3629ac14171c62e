//! Conjunctive queries, unions of them, and pattern containment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg {
    Var(String),
    Const(String),
}

impl Arg {
    pub fn var(name: impl Into<String>) -> Self {
        Arg::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Arg::Const(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Arg::Var(s) | Arg::Const(s) => s,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Arg::Var(_))
    }
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<Arg>,
}

impl Atom {
    pub fn new(relation: impl Into<String>, args: Vec<Arg>) -> Self {
        Atom {
            relation: relation.into(),
            args,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|a| match a {
            Arg::Var(v) => Some(v.as_str()),
            Arg::Const(_) => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|a| match a {
            Arg::Const(c) => Some(c.as_str()),
            Arg::Var(_) => None,
        })
    }

    fn counts(&self) -> (BTreeMap<&str, usize>, BTreeMap<&str, usize>) {
        let mut vars = BTreeMap::new();
        let mut consts = BTreeMap::new();
        for a in &self.args {
            let m = if a.is_var() { &mut vars } else { &mut consts };
            *m.entry(a.name()).or_insert(0) += 1;
        }
        (vars, consts)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConjunctiveQuery {
    atoms: Vec<Atom>,
    free_vars: Vec<String>,
}

impl ConjunctiveQuery {
    pub fn new(atoms: Vec<Atom>, free_vars: Vec<String>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Invalid("a query needs at least one atom".into()));
        }
        let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
        for a in &atoms {
            if a.args.is_empty() {
                return Err(Error::Invalid(format!("atom {} has no arguments", a.relation)));
            }
            if let Some(k) = arity.insert(&a.relation, a.args.len()) {
                if k != a.args.len() {
                    return Err(Error::Invalid(format!(
                        "relation {} used with arities {k} and {}",
                        a.relation,
                        a.args.len()
                    )));
                }
            }
        }
        let q = ConjunctiveQuery { atoms, free_vars };
        let vars = q.vars();
        for x in &q.free_vars {
            if !vars.contains(x.as_str()) {
                return Err(Error::Invalid(format!("free variable {x} does not occur in the body")));
            }
        }
        Ok(q)
    }

    /// Boolean query from atoms.
    pub fn boolean(atoms: Vec<Atom>) -> Result<Self> {
        Self::new(atoms, Vec::new())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn free_vars(&self) -> &[String] {
        &self.free_vars
    }

    pub fn is_boolean(&self) -> bool {
        self.free_vars.is_empty()
    }

    pub fn is_self_join_free(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.atoms.iter().all(|a| seen.insert(&a.relation))
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        self.atoms.iter().flat_map(Atom::vars).collect()
    }

    pub fn constants(&self) -> BTreeSet<&str> {
        self.atoms.iter().flat_map(Atom::constants).collect()
    }

    pub fn has_constants(&self) -> bool {
        self.atoms.iter().any(|a| a.constants().next().is_some())
    }

    pub fn relations(&self) -> BTreeSet<&str> {
        self.atoms.iter().map(|a| a.relation.as_str()).collect()
    }

    /// Number of atoms in which each variable occurs.
    pub fn atom_counts(&self) -> BTreeMap<&str, usize> {
        let mut m = BTreeMap::new();
        for a in &self.atoms {
            for v in a.vars().collect::<BTreeSet<_>>() {
                *m.entry(v).or_insert(0) += 1;
            }
        }
        m
    }

    pub fn into_union(self) -> UnionQuery {
        UnionQuery { disjuncts: vec![self] }
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.free_vars.is_empty() {
            write!(f, "q({}) := ", self.free_vars.join(", "))?;
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnionQuery {
    disjuncts: Vec<ConjunctiveQuery>,
}

impl UnionQuery {
    pub fn new(disjuncts: Vec<ConjunctiveQuery>) -> Result<Self> {
        let Some(first) = disjuncts.first() else {
            return Err(Error::Invalid("a union needs at least one disjunct".into()));
        };
        let k = first.free_vars.len();
        if disjuncts.iter().any(|d| d.free_vars.len() != k) {
            return Err(Error::Invalid(
                "disjuncts disagree on the number of free variables".into(),
            ));
        }
        let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
        for a in disjuncts.iter().flat_map(|d| d.atoms.iter()) {
            if let Some(n) = arity.insert(&a.relation, a.args.len()) {
                if n != a.args.len() {
                    return Err(Error::Invalid(format!(
                        "relation {} used with arities {n} and {}",
                        a.relation,
                        a.args.len()
                    )));
                }
            }
        }
        Ok(UnionQuery { disjuncts })
    }

    pub fn disjuncts(&self) -> &[ConjunctiveQuery] {
        &self.disjuncts
    }

    pub fn is_boolean(&self) -> bool {
        self.disjuncts[0].is_boolean()
    }

    /// The single disjunct, if there is exactly one.
    pub fn as_single(&self) -> Option<&ConjunctiveQuery> {
        match self.disjuncts.as_slice() {
            [q] => Some(q),
            _ => None,
        }
    }
}

impl From<ConjunctiveQuery> for UnionQuery {
    fn from(q: ConjunctiveQuery) -> Self {
        q.into_union()
    }
}

impl fmt::Display for UnionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            if i > 0 && !d.free_vars.is_empty() {
                let body = ConjunctiveQuery {
                    atoms: d.atoms.clone(),
                    free_vars: Vec::new(),
                };
                write!(f, "{body}")?;
            } else {
                write!(f, "{d}")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err_at(&self, pos: usize, msg: impl Into<String>) -> Error {
        let before = &self.text[..pos];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        Error::parse(line, col, msg)
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        self.err_at(self.pos, msg)
    }

    fn skip_ws(&mut self) {
        loop {
            let rest = &self.text[self.pos..];
            if let Some(c) = rest.chars().next() {
                if c.is_whitespace() {
                    self.pos += c.len_utf8();
                    continue;
                }
                if c == '#' {
                    self.pos += rest.find('\n').unwrap_or(rest.len());
                    continue;
                }
            }
            break;
        }
    }

    fn peek_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        self.text[self.pos..].starts_with(s)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.peek_str(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{s}'")))
        }
    }

    fn ident(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an identifier"));
        }
        Ok((start, &self.text[start..self.pos]))
    }

    fn atom(&mut self) -> Result<(usize, Atom)> {
        let (start, rel) = self.ident()?;
        self.expect("(")?;
        let mut args = Vec::new();
        loop {
            let (_, name) = self.ident()?;
            args.push(if name.starts_with(|c: char| c.is_ascii_uppercase()) {
                Arg::Var(name.to_string())
            } else {
                Arg::Const(name.to_string())
            });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok((start, Atom::new(rel, args)))
    }
}

/// Parses `[q(X, ...) :=] R(X, c), S(X) | T(X)`.
///
/// Uppercase-initial identifiers are variables, all others constants.
pub fn parse_query(text: &str) -> Result<UnionQuery> {
    let mut p = Parser { text, pos: 0 };
    let mut arity: BTreeMap<String, usize> = BTreeMap::new();
    let mut check = |p: &Parser, start: usize, a: &Atom| -> Result<()> {
        match arity.get(&a.relation) {
            Some(&k) if k != a.args.len() => Err(p.err_at(
                start,
                format!(
                    "relation {} has arity {k} elsewhere but {} here",
                    a.relation,
                    a.args.len()
                ),
            )),
            _ => {
                arity.insert(a.relation.clone(), a.args.len());
                Ok(())
            }
        }
    };
    let (start, first) = p.atom()?;
    let mut head = None;
    let mut body = Vec::new();
    if p.eat(":=") {
        let mut vars = Vec::new();
        for a in &first.args {
            match a {
                Arg::Var(v) => vars.push(v.clone()),
                Arg::Const(c) => return Err(p.err_at(start, format!("head argument {c} is not a variable"))),
            }
        }
        head = Some((start, vars));
    } else {
        check(&p, start, &first)?;
        body.push(first);
    }
    let mut disjuncts = Vec::new();
    loop {
        if body.is_empty() {
            let (s, a) = p.atom()?;
            check(&p, s, &a)?;
            body.push(a);
        }
        while p.eat(",") {
            let (s, a) = p.atom()?;
            check(&p, s, &a)?;
            body.push(a);
        }
        disjuncts.push(std::mem::take(&mut body));
        if !p.eat("|") {
            break;
        }
    }
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.err("unexpected trailing input"));
    }
    let free = head.as_ref().map(|(_, v)| v.clone()).unwrap_or_default();
    let mut out = Vec::new();
    for atoms in disjuncts {
        let vars: BTreeSet<&str> = atoms.iter().flat_map(Atom::vars).collect();
        if let Some((s, hv)) = &head {
            if let Some(x) = hv.iter().find(|x| !vars.contains(x.as_str())) {
                return Err(p.err_at(*s, format!("free variable {x} does not occur in the body")));
            }
        }
        out.push(ConjunctiveQuery::new(atoms, free.clone())?);
    }
    UnionQuery::new(out)
}

/// Parses a query that must consist of one conjunctive query.
pub fn parse_cq(text: &str) -> Result<ConjunctiveQuery> {
    let u = parse_query(text)?;
    match u.disjuncts.len() {
        1 => Ok(u.disjuncts.into_iter().next().unwrap()),
        n => Err(Error::Invalid(format!(
            "expected one conjunctive query, found {n} disjuncts"
        ))),
    }
}

/// Whether `pattern` can be obtained from `q` by deleting atoms and argument
/// occurrences and renaming variables and relations. Constants are never renamed.
pub fn contains_pattern(q: &ConjunctiveQuery, pattern: &ConjunctiveQuery) -> bool {
    let qc: Vec<_> = q.atoms.iter().map(Atom::counts).collect();
    let pc: Vec<_> = pattern.atoms.iter().map(Atom::counts).collect();
    if pc.len() > qc.len() {
        return false;
    }
    let mut used_atoms = vec![false; qc.len()];
    let mut rho: BTreeMap<&str, &str> = BTreeMap::new();
    embed_atoms(&pc, &qc, 0, &mut used_atoms, &mut rho)
}

type Counts<'a> = (BTreeMap<&'a str, usize>, BTreeMap<&'a str, usize>);

fn embed_atoms<'a>(
    pc: &[Counts<'a>],
    qc: &[Counts<'a>],
    i: usize,
    used: &mut Vec<bool>,
    rho: &mut BTreeMap<&'a str, &'a str>,
) -> bool {
    if i == pc.len() {
        return true;
    }
    for j in 0..qc.len() {
        if used[j] {
            continue;
        }
        let (pv, pk) = &pc[i];
        let (qv, qk) = &qc[j];
        if pk.iter().any(|(c, n)| qk.get(c).copied().unwrap_or(0) < *n) {
            continue;
        }
        used[j] = true;
        let vars: Vec<(&str, usize)> = pv.iter().map(|(v, n)| (*v, *n)).collect();
        if embed_vars(&vars, 0, qv, pc, qc, i, used, rho) {
            return true;
        }
        used[j] = false;
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn embed_vars<'a>(
    vars: &[(&'a str, usize)],
    k: usize,
    target: &BTreeMap<&'a str, usize>,
    pc: &[Counts<'a>],
    qc: &[Counts<'a>],
    i: usize,
    used: &mut Vec<bool>,
    rho: &mut BTreeMap<&'a str, &'a str>,
) -> bool {
    if k == vars.len() {
        return embed_atoms(pc, qc, i + 1, used, rho);
    }
    let (x, n) = vars[k];
    if let Some(&y) = rho.get(x) {
        return target.get(y).copied().unwrap_or(0) >= n && embed_vars(vars, k + 1, target, pc, qc, i, used, rho);
    }
    for (&y, &m) in target {
        if m < n || rho.values().any(|&z| z == y) {
            continue;
        }
        rho.insert(x, y);
        if embed_vars(vars, k + 1, target, pc, qc, i, used, rho) {
            return true;
        }
        rho.remove(x);
    }
    false
}

/// Structural flags for the query shapes that decide complexity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CanonicalPatternReport {
    /// `R(x,x)`: an atom repeats a variable.
    pub rxx: bool,
    /// `R(x) ∧ S(x)`: a variable occurs in two atoms.
    pub rx_sx: bool,
    /// `R(x) ∧ S(x,y) ∧ T(y)`.
    pub rx_sxy_ty: bool,
    /// `R(x,y) ∧ S(x,y)`: two atoms share two variables.
    pub rxy_sxy: bool,
    /// `R(x,y)`: an atom holds two distinct variables.
    pub rxy: bool,
    /// Every atom has exactly one argument.
    pub unary_only: bool,
    /// `R(c,c)`: an atom repeats a constant.
    pub rcc: bool,
    /// `R(c,d)`: an atom holds two distinct constants.
    pub rcc_distinct: bool,
    /// Some atom has a constant and at least two arguments.
    pub constant_nonunary: bool,
}

impl CanonicalPatternReport {
    /// Names of the flags that are set, in declaration order.
    pub fn names(&self) -> Vec<&'static str> {
        [
            (self.rxx, "R(x,x)"),
            (self.rx_sx, "R(x)∧S(x)"),
            (self.rx_sxy_ty, "R(x)∧S(x,y)∧T(y)"),
            (self.rxy_sxy, "R(x,y)∧S(x,y)"),
            (self.rxy, "R(x,y)"),
            (self.rcc, "R(c,c)"),
            (self.rcc_distinct, "R(c,c')"),
        ]
        .into_iter()
        .filter_map(|(b, n)| b.then_some(n))
        .collect()
    }
}

pub fn canonical_patterns(q: &ConjunctiveQuery) -> CanonicalPatternReport {
    let sets: Vec<BTreeSet<&str>> = q.atoms.iter().map(|a| a.vars().collect()).collect();
    let mut r = CanonicalPatternReport {
        unary_only: q.atoms.iter().all(|a| a.args.len() == 1),
        ..Default::default()
    };
    for (a, s) in q.atoms.iter().zip(&sets) {
        let (vc, cc) = a.counts();
        r.rxx |= vc.values().any(|&n| n >= 2);
        r.rxy |= s.len() >= 2;
        r.rcc |= cc.values().any(|&n| n >= 2);
        r.rcc_distinct |= cc.len() >= 2;
        r.constant_nonunary |= !cc.is_empty() && a.args.len() >= 2;
    }
    let n = sets.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let shared: Vec<&&str> = sets[i].intersection(&sets[j]).collect();
            r.rx_sx |= !shared.is_empty();
            r.rxy_sxy |= shared.len() >= 2;
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                // x shared by atoms i and j, y shared by j and k, x != y
                let right: Vec<&&str> = sets[j].intersection(&sets[k]).collect();
                r.rx_sxy_ty |= shared.iter().any(|x| right.iter().any(|y| x != y));
            }
        }
    }
    r
}

/// Atoms as nodes, an edge between atoms sharing variables, labeled by them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize, BTreeSet<String>)>,
}

impl ConnectivityGraph {
    /// Connected components as sorted lists of atom indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.nodes).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for (a, b, _) in &self.edges {
            let (ra, rb) = (find(&mut parent, *a), find(&mut parent, *b));
            parent[ra.max(rb)] = ra.min(rb);
        }
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.nodes {
            let r = find(&mut parent, i);
            comps.entry(r).or_default().push(i);
        }
        comps.into_values().collect()
    }
}

pub fn connectivity_graph(q: &ConjunctiveQuery) -> ConnectivityGraph {
    let sets: Vec<BTreeSet<&str>> = q.atoms.iter().map(|a| a.vars().collect()).collect();
    let mut edges = Vec::new();
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let shared: BTreeSet<String> = sets[i].intersection(&sets[j]).map(|s| s.to_string()).collect();
            if !shared.is_empty() {
                edges.push((i, j, shared));
            }
        }
    }
    ConnectivityGraph {
        nodes: sets.len(),
        edges,
    }
}

/// Restricts a query to a subset of its atoms (in the given order).
pub fn sub_query(q: &ConjunctiveQuery, atoms: &[usize]) -> ConjunctiveQuery {
    ConjunctiveQuery {
        atoms: atoms.iter().map(|&i| q.atoms[i].clone()).collect(),
        free_vars: Vec::new(),
    }
}

/// Replaces the free variables by constants, giving a Boolean query.
pub fn substitute(q: &ConjunctiveQuery, tuple: &[String]) -> Result<ConjunctiveQuery> {
    if tuple.len() != q.free_vars.len() {
        return Err(Error::Invalid(format!(
            "expected {} constants, got {}",
            q.free_vars.len(),
            tuple.len()
        )));
    }
    let map: BTreeMap<&str, &str> = q
        .free_vars
        .iter()
        .map(String::as_str)
        .zip(tuple.iter().map(String::as_str))
        .collect();
    let atoms = q
        .atoms
        .iter()
        .map(|a| {
            Atom::new(
                &a.relation,
                a.args
                    .iter()
                    .map(|x| match x {
                        Arg::Var(v) => match map.get(v.as_str()) {
                            Some(c) => Arg::Const(c.to_string()),
                            None => x.clone(),
                        },
                        Arg::Const(_) => x.clone(),
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(ConjunctiveQuery {
        atoms,
        free_vars: Vec::new(),
    })
}

/// One representative tuple per class of answer tuples that behave alike:
/// each free variable is either a query constant or a fresh constant, fresh
/// constants being distinguished only by which variables share them.
pub fn free_var_classes(q: &ConjunctiveQuery) -> Vec<Vec<String>> {
    let consts: Vec<String> = q.constants().into_iter().map(String::from).collect();
    let fresh = |i: usize| -> String {
        let mut name = format!("new{i}");
        while consts.contains(&name) {
            name.push('_');
        }
        name
    };
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(
        k: usize,
        n: usize,
        blocks: usize,
        consts: &[String],
        fresh: &dyn Fn(usize) -> String,
        cur: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
    ) {
        if k == n {
            out.push(cur.clone());
            return;
        }
        for c in consts {
            cur.push(c.clone());
            go(k + 1, n, blocks, consts, fresh, cur, out);
            cur.pop();
        }
        for b in 0..=blocks {
            cur.push(fresh(b + 1));
            go(k + 1, n, blocks.max(b + 1), consts, fresh, cur, out);
            cur.pop();
        }
    }
    go(0, q.free_vars.len(), 0, &consts, &fresh, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cq(s: &str) -> ConjunctiveQuery {
        parse_cq(s).unwrap()
    }

    #[test]
    fn parses_the_three_shapes() {
        let q = cq("R(X,X)");
        assert_eq!(q.atoms().len(), 1);
        assert!(q.is_boolean());
        assert_eq!(q.vars().len(), 1);
        let q = cq("q(X) := R(X,c), S(X,Y)");
        assert_eq!(q.free_vars(), ["X"]);
        assert_eq!(q.constants().into_iter().collect::<Vec<_>>(), ["c"]);
        let u = parse_query("R(X) | S(X,Y)").unwrap();
        assert_eq!(u.disjuncts().len(), 2);
    }

    #[test]
    fn parse_errors_carry_positions() {
        assert_eq!(
            parse_query("R(X,").unwrap_err(),
            Error::parse(1, 5, "expected an identifier")
        );
        assert!(matches!(
            parse_query("R(X),\n  R(X,Y)"),
            Err(Error::Parse { line: 2, column: 3, .. })
        ));
        assert!(matches!(
            parse_query("q(Z) := R(X)"),
            Err(Error::Parse { line: 1, column: 1, .. })
        ));
        assert!(matches!(parse_query("R(X) S(X)"), Err(Error::Parse { .. })));
        assert!(matches!(parse_query("q(c) := R(c)"), Err(Error::Parse { .. })));
        assert!(parse_query("R()").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["R(X, c), S(X)", "q(X) := R(X, Y) | S(X)", "R(a) | S(X, X)"] {
            let u = parse_query(s).unwrap();
            assert_eq!(parse_query(&u.to_string()).unwrap(), u);
        }
    }

    #[test]
    fn pattern_example_with_renaming_and_deletion() {
        let q = cq("R(U,X,U), Sp(Y,Y), T(X,s,Z,s)");
        let p = cq("Rp(U,U,Y), Sp(Z)");
        assert!(contains_pattern(&q, &p));
        assert!(contains_pattern(&q, &q));
        assert!(!contains_pattern(&cq("R(X,Y)"), &cq("R(X,X)")));
    }

    #[test]
    fn constants_are_rigid() {
        assert!(contains_pattern(&cq("R(X,c,c)"), &cq("S(c,c)")));
        assert!(!contains_pattern(&cq("R(X,c,d)"), &cq("S(c,c)")));
        assert!(!contains_pattern(&cq("R(X,c)"), &cq("S(d)")));
    }

    #[test]
    fn canonical_flags() {
        let r = canonical_patterns(&cq("R(X,X)"));
        assert!(r.rxx && !r.rxy && !r.rx_sx);
        let r = canonical_patterns(&cq("R(X), S(X,Y), T(Y)"));
        assert!(r.rx_sxy_ty && r.rx_sx && r.rxy && !r.rxy_sxy);
        let r = canonical_patterns(&cq("R(X,c,c)"));
        assert!(r.rcc && !r.rcc_distinct && r.constant_nonunary);
        let r = canonical_patterns(&cq("R(X), S(Y)"));
        assert!(r.unary_only && !r.rx_sx);
    }

    #[test]
    fn connectivity() {
        let q = cq("R1(X,Y), R2(Y,X), S1(Z), S2(Z,W), S3(W), T1(A), T2(A,B), T3(B,C), T4(C)");
        assert_eq!(connectivity_graph(&q).components().len(), 3);
        assert_eq!(connectivity_graph(&cq("R(X), S(Y)")).components().len(), 2);
        let g = connectivity_graph(&cq("R(X,Y), S(X,Y)"));
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].2, ["X".to_string(), "Y".to_string()].into_iter().collect());
    }

    #[test]
    fn substitution() {
        let q = cq("q(X) := R(X,c)");
        assert_eq!(substitute(&q, &["c".into()]).unwrap(), cq("R(c,c)"));
        let q = cq("q(X,Y) := R(X), S(Y)");
        assert_eq!(substitute(&q, &["a".into(), "b".into()]).unwrap(), cq("R(a), S(b)"));
        let q = cq("R(X)");
        assert_eq!(substitute(&q, &[]).unwrap(), q);
        assert!(substitute(&q, &["a".into()]).is_err());
    }

    #[test]
    fn answer_classes() {
        assert_eq!(free_var_classes(&cq("q(X) := R(Y,c,X), S(d,X)")).len(), 3);
        assert_eq!(free_var_classes(&cq("q(X) := R(X)")).len(), 1);
        let reps = free_var_classes(&cq("q(X,Y) := R(X,Y)"));
        assert_eq!(reps.len(), 2);
        assert!(reps.iter().any(|t| t[0] == t[1]));
        assert!(reps.iter().any(|t| t[0] != t[1]));
    }
}
