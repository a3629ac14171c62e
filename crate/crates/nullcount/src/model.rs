//! Incomplete databases, valuations and their completions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

pub type Count = BigUint;

pub(crate) fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(String),
    Null(String),
}

impl Term {
    pub fn constant(name: impl Into<String>) -> Self {
        Term::Const(name.into())
    }

    pub fn null(name: impl Into<String>) -> Self {
        Term::Null(name.into())
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Const(s) | Term::Null(s) => s,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) => write!(f, "{s}"),
            Term::Null(s) => write!(f, "?{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub relation: String,
    pub args: Vec<Term>,
}

impl Fact {
    pub fn new(relation: impl Into<String>, args: Vec<Term>) -> Self {
        Fact {
            relation: relation.into(),
            args,
        }
    }

    pub fn nulls(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Null(n) => Some(n.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_null())
    }
}

impl fmt::Display for Fact {
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

/// Candidate values for the nulls: either one set per null or one shared set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domains {
    PerNull(BTreeMap<String, BTreeSet<String>>),
    Uniform(BTreeSet<String>),
}

impl Domains {
    pub fn uniform<I, S>(values: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Domains::Uniform(values.into_iter().map(Into::into).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncompleteDatabase {
    facts: Vec<Fact>,
    domains: Domains,
    nulls: Vec<String>,
}

impl IncompleteDatabase {
    /// Builds a database, rejecting duplicate facts.
    pub fn new(facts: Vec<Fact>, domains: Domains) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for f in &facts {
            if !seen.insert(f) {
                return Err(Error::Invalid(format!("duplicate fact {f}")));
            }
        }
        Self::build(facts, domains)
    }

    /// Builds a database, merging duplicate facts.
    pub fn new_merging(facts: Vec<Fact>, domains: Domains) -> Result<Self> {
        Self::build(facts, domains)
    }

    fn build(mut facts: Vec<Fact>, domains: Domains) -> Result<Self> {
        facts.sort();
        facts.dedup();
        let mut arity: BTreeMap<&str, usize> = BTreeMap::new();
        let mut nulls = BTreeSet::new();
        for f in &facts {
            if !valid_name(&f.relation) {
                return Err(Error::Invalid(format!("bad relation name {:?}", f.relation)));
            }
            if f.args.is_empty() {
                return Err(Error::Invalid(format!("fact {f} has no arguments")));
            }
            match arity.insert(&f.relation, f.args.len()) {
                Some(a) if a != f.args.len() => {
                    return Err(Error::Invalid(format!(
                        "relation {} used with arities {a} and {}",
                        f.relation,
                        f.args.len()
                    )))
                }
                _ => {}
            }
            for t in &f.args {
                if !valid_name(t.name()) {
                    return Err(Error::Invalid(format!("bad term name {:?}", t.name())));
                }
                if let Term::Null(n) = t {
                    nulls.insert(n.clone());
                }
            }
        }
        match &domains {
            Domains::Uniform(d) => {
                if d.is_empty() {
                    return Err(Error::Domain("uniform domain is empty".into()));
                }
            }
            Domains::PerNull(m) => {
                for n in &nulls {
                    match m.get(n) {
                        None => return Err(Error::Domain(format!("null ?{n} has no domain"))),
                        Some(d) if d.is_empty() => return Err(Error::Domain(format!("null ?{n} has an empty domain"))),
                        _ => {}
                    }
                }
                if let Some((n, _)) = m.iter().find(|(_, d)| d.is_empty()) {
                    return Err(Error::Domain(format!("null ?{n} has an empty domain")));
                }
            }
        }
        Ok(IncompleteDatabase {
            facts,
            domains,
            nulls: nulls.into_iter().collect(),
        })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn domains(&self) -> &Domains {
        &self.domains
    }

    /// Nulls occurring in the facts, sorted by name.
    pub fn nulls(&self) -> &[String] {
        &self.nulls
    }

    pub fn domain_of(&self, null: &str) -> &BTreeSet<String> {
        match &self.domains {
            Domains::Uniform(d) => d,
            Domains::PerNull(m) => &m[null],
        }
    }

    pub fn uniform_domain(&self) -> Option<&BTreeSet<String>> {
        match &self.domains {
            Domains::Uniform(d) => Some(d),
            Domains::PerNull(_) => None,
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.domains, Domains::Uniform(_))
    }

    /// True iff no null has two occurrences, counting positions.
    pub fn is_codd(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.facts.iter().flat_map(Fact::nulls).all(|n| seen.insert(n))
    }

    /// Relation names with their arities.
    pub fn schema(&self) -> BTreeMap<String, usize> {
        self.facts.iter().map(|f| (f.relation.clone(), f.args.len())).collect()
    }

    pub fn facts_of<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a Fact> + 'a {
        self.facts.iter().filter(move |f| f.relation == relation)
    }

    pub fn constants(&self) -> BTreeSet<String> {
        self.facts
            .iter()
            .flat_map(|f| f.args.iter())
            .filter(|t| !t.is_null())
            .map(|t| t.name().to_string())
            .collect()
    }

    pub fn to_per_null(&self) -> IncompleteDatabase {
        let m = self
            .nulls
            .iter()
            .map(|n| (n.clone(), self.domain_of(n).clone()))
            .collect();
        IncompleteDatabase {
            facts: self.facts.clone(),
            domains: Domains::PerNull(m),
            nulls: self.nulls.clone(),
        }
    }

    /// Converts to a uniform database when all nulls share one domain.
    /// A database without nulls needs the domain to be given.
    pub fn to_uniform(&self, if_no_nulls: Option<&BTreeSet<String>>) -> Option<IncompleteDatabase> {
        if let Domains::Uniform(_) = self.domains {
            return Some(self.clone());
        }
        let d = match self.nulls.first() {
            Some(n) => self.domain_of(n).clone(),
            None => if_no_nulls?.clone(),
        };
        if self.nulls.iter().any(|n| *self.domain_of(n) != d) {
            return None;
        }
        Some(IncompleteDatabase {
            facts: self.facts.clone(),
            domains: Domains::Uniform(d),
            nulls: self.nulls.clone(),
        })
    }

    /// Product of the domain sizes of the nulls.
    pub fn total_valuations(&self) -> Count {
        self.nulls
            .iter()
            .fold(Count::one(), |acc, n| acc * self.domain_of(n).len())
    }

    /// Total number of valuations if it fits in a `u64`.
    pub fn total_valuations_u64(&self) -> Option<u64> {
        self.nulls
            .iter()
            .try_fold(1u64, |acc, n| acc.checked_mul(self.domain_of(n).len() as u64))
    }

    /// All valuations in order of sorted null names and sorted domain values.
    pub fn valuations(&self) -> Valuations<'_> {
        Valuations::new(self, 0, None)
    }

    /// Valuations with index in `start..end` of the full enumeration order.
    pub fn valuation_range(&self, start: u64, end: u64) -> Valuations<'_> {
        Valuations::new(self, start, Some(end.saturating_sub(start)))
    }
}

impl fmt::Display for IncompleteDatabase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.domains {
            Domains::Uniform(d) => {
                write!(f, "@uniform")?;
                for c in d {
                    write!(f, " {c}")?;
                }
                writeln!(f)?;
            }
            Domains::PerNull(m) => {
                for (n, d) in m {
                    write!(f, "dom ?{n} :")?;
                    for c in d {
                        write!(f, " {c}")?;
                    }
                    writeln!(f)?;
                }
            }
        }
        for fact in &self.facts {
            writeln!(f, "{fact}")?;
        }
        Ok(())
    }
}

/// Total map from nulls to constants.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Valuation(pub BTreeMap<String, String>);

impl Valuation {
    pub fn get(&self, null: &str) -> Option<&str> {
        self.0.get(null).map(String::as_str)
    }

    pub fn set(&mut self, null: impl Into<String>, value: impl Into<String>) {
        self.0.insert(null.into(), value.into());
    }
}

impl<N: Into<String>, V: Into<String>> FromIterator<(N, V)> for Valuation {
    fn from_iter<T: IntoIterator<Item = (N, V)>>(iter: T) -> Self {
        Valuation(iter.into_iter().map(|(n, v)| (n.into(), v.into())).collect())
    }
}

/// Odometer over valuations; the first null is the most significant digit.
pub struct Valuations<'a> {
    nulls: &'a [String],
    values: Vec<Vec<&'a String>>,
    digits: Vec<usize>,
    remaining: Option<u64>,
    done: bool,
}

impl<'a> Valuations<'a> {
    fn new(db: &'a IncompleteDatabase, start: u64, len: Option<u64>) -> Self {
        let values: Vec<Vec<&String>> = db.nulls.iter().map(|n| db.domain_of(n).iter().collect()).collect();
        let mut digits = vec![0; values.len()];
        let mut rest = start;
        for (i, vs) in values.iter().enumerate().rev() {
            let r = vs.len() as u64;
            digits[i] = (rest % r) as usize;
            rest /= r;
        }
        Valuations {
            nulls: &db.nulls,
            values,
            digits,
            remaining: len,
            done: rest > 0,
        }
    }

    fn advance(&mut self) {
        for i in (0..self.digits.len()).rev() {
            self.digits[i] += 1;
            if self.digits[i] < self.values[i].len() {
                return;
            }
            self.digits[i] = 0;
        }
        self.done = true;
    }
}

impl Iterator for Valuations<'_> {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        if self.done || self.remaining == Some(0) {
            return None;
        }
        if let Some(r) = self.remaining.as_mut() {
            *r -= 1;
        }
        let v = Valuation(
            self.nulls
                .iter()
                .zip(&self.digits)
                .enumerate()
                .map(|(i, (n, &d))| (n.clone(), self.values[i][d].clone()))
                .collect(),
        );
        self.advance();
        Some(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundFact {
    pub relation: String,
    pub args: Vec<String>,
}

impl GroundFact {
    pub fn new<S: Into<String>>(relation: impl Into<String>, args: impl IntoIterator<Item = S>) -> Self {
        GroundFact {
            relation: relation.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

impl fmt::Display for GroundFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.relation, self.args.join(", "))
    }
}

/// A complete database, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundDatabase {
    facts: Vec<GroundFact>,
}

impl GroundDatabase {
    pub fn new(mut facts: Vec<GroundFact>) -> Self {
        facts.sort();
        facts.dedup();
        GroundDatabase { facts }
    }

    pub fn facts(&self) -> &[GroundFact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, f: &GroundFact) -> bool {
        self.facts.binary_search(f).is_ok()
    }

    /// Reads a database file that must not mention nulls.
    pub fn parse(text: &str) -> Result<Self> {
        let db = parse_database(text)?;
        Self::try_from(&db)
    }
}

impl TryFrom<&IncompleteDatabase> for GroundDatabase {
    type Error = Error;

    fn try_from(db: &IncompleteDatabase) -> Result<Self> {
        db.facts()
            .iter()
            .map(|f| {
                if f.is_ground() {
                    Ok(GroundFact::new(&f.relation, f.args.iter().map(|t| t.name())))
                } else {
                    Err(Error::Invalid(format!("fact {f} is not ground")))
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(GroundDatabase::new)
    }
}

impl fmt::Display for GroundDatabase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fact in &self.facts {
            writeln!(f, "{fact}")?;
        }
        Ok(())
    }
}

/// Substitutes every null; fails on a missing or out-of-domain value.
pub fn apply_valuation(db: &IncompleteDatabase, v: &Valuation) -> Result<GroundDatabase> {
    for n in db.nulls() {
        match v.get(n) {
            None => return Err(Error::Domain(format!("no value for null ?{n}"))),
            Some(c) if !db.domain_of(n).contains(c) => {
                return Err(Error::Domain(format!("value {c} not in the domain of ?{n}")))
            }
            _ => {}
        }
    }
    Ok(GroundDatabase::new(
        db.facts()
            .iter()
            .map(|f| {
                GroundFact::new(
                    &f.relation,
                    f.args.iter().map(|t| match t {
                        Term::Const(c) => c.as_str(),
                        Term::Null(n) => v.get(n).unwrap(),
                    }),
                )
            })
            .collect(),
    ))
}

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, self.text[..self.pos].chars().count() + 1, msg)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.err("expected an identifier"));
        }
        Ok(&self.text[start..self.pos])
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_term(cur: &mut Cursor<'_>) -> Result<Term> {
    if cur.eat('?') {
        Ok(Term::Null(cur.ident()?.to_string()))
    } else {
        Ok(Term::Const(cur.ident()?.to_string()))
    }
}

/// Parses the line-based database format.
///
/// ```text
/// # comment
/// dom ?1 : a b c
/// S(a, ?1)
/// ```
pub fn parse_database(text: &str) -> Result<IncompleteDatabase> {
    let mut uniform: Option<BTreeSet<String>> = None;
    let mut per_null: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut facts = Vec::new();
    let mut arity: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let mut cur = Cursor {
            line: i + 1,
            text: strip_comment(raw),
            pos: 0,
        };
        if cur.at_end() {
            continue;
        }
        if cur.eat('@') {
            let kw = cur.ident()?;
            if kw != "uniform" {
                return Err(cur.err(format!("unknown directive @{kw}")));
            }
            if uniform.is_some() {
                return Err(cur.err("@uniform declared twice"));
            }
            if !per_null.is_empty() {
                return Err(cur.err("@uniform mixed with dom lines"));
            }
            let mut d = BTreeSet::new();
            while !cur.at_end() {
                d.insert(cur.ident()?.to_string());
            }
            if d.is_empty() {
                return Err(cur.err("empty uniform domain"));
            }
            uniform = Some(d);
            continue;
        }
        let save = cur.pos;
        let word = cur.ident()?;
        cur.skip_ws();
        if word == "dom" && cur.peek() == Some('?') {
            if uniform.is_some() {
                return Err(cur.err("dom line mixed with @uniform"));
            }
            cur.expect('?')?;
            let n = cur.ident()?.to_string();
            cur.expect(':')?;
            let mut d = BTreeSet::new();
            while !cur.at_end() {
                d.insert(cur.ident()?.to_string());
            }
            if d.is_empty() {
                return Err(cur.err(format!("empty domain for ?{n}")));
            }
            if per_null.insert(n.clone(), d).is_some() {
                return Err(cur.err(format!("domain of ?{n} declared twice")));
            }
            continue;
        }
        let rel = word.to_string();
        let rel_col = save;
        cur.expect('(')?;
        let mut args = vec![parse_term(&mut cur)?];
        while cur.eat(',') {
            args.push(parse_term(&mut cur)?);
        }
        cur.expect(')')?;
        cur.eat('.');
        if !cur.at_end() {
            return Err(cur.err("unexpected trailing input"));
        }
        if let Some(&a) = arity.get(&rel) {
            if a != args.len() {
                cur.pos = rel_col;
                cur.skip_ws();
                return Err(cur.err(format!(
                    "relation {rel} has arity {a} elsewhere but {} here",
                    args.len()
                )));
            }
        }
        arity.insert(rel.clone(), args.len());
        facts.push(Fact::new(rel, args));
    }
    let domains = match uniform {
        Some(d) => Domains::Uniform(d),
        None => Domains::PerNull(per_null),
    };
    IncompleteDatabase::new_merging(facts, domains)
}
