//! Complexity verdicts for counting problems over incomplete databases.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::IncompleteDatabase;
use crate::query::{canonical_patterns, free_var_classes, substitute, ConjunctiveQuery, UnionQuery};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TableKind {
    Naive,
    Codd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DomainKind {
    NonUniform,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Setting {
    pub table: TableKind,
    pub domain: DomainKind,
}

impl Setting {
    pub const ALL: [Setting; 4] = [
        Setting::new(TableKind::Naive, DomainKind::NonUniform),
        Setting::new(TableKind::Codd, DomainKind::NonUniform),
        Setting::new(TableKind::Naive, DomainKind::Uniform),
        Setting::new(TableKind::Codd, DomainKind::Uniform),
    ];

    pub const fn new(table: TableKind, domain: DomainKind) -> Self {
        Setting { table, domain }
    }

    /// The most specific setting the database belongs to.
    pub fn of(db: &IncompleteDatabase) -> Self {
        Setting {
            table: if db.is_codd() {
                TableKind::Codd
            } else {
                TableKind::Naive
            },
            domain: if db.is_uniform() {
                DomainKind::Uniform
            } else {
                DomainKind::NonUniform
            },
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = match self.table {
            TableKind::Naive => "naive",
            TableKind::Codd => "codd",
        };
        let d = match self.domain {
            DomainKind::NonUniform => "non-uniform",
            DomainKind::Uniform => "uniform",
        };
        write!(f, "{t}/{d}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProblemKind {
    Valuations,
    Completions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Problem {
    pub kind: ProblemKind,
    /// Count for the negation of the query.
    pub negated: bool,
}

impl Problem {
    pub const VAL: Problem = Problem {
        kind: ProblemKind::Valuations,
        negated: false,
    };
    pub const COMP: Problem = Problem {
        kind: ProblemKind::Completions,
        negated: false,
    };
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ProblemKind::Valuations => "#Val",
            ProblemKind::Completions => "#Comp",
        };
        if self.negated {
            write!(f, "{k}(not q)")
        } else {
            write!(f, "{k}(q)")
        }
    }
}

/// Polynomial-time counting algorithms, see [`crate::exact`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Product,
    ConstantsDp,
    CoddPerAtom,
    UniformNaiveIe,
    UniformCoddStar,
    UniformUnaryComp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Product,
        Algorithm::ConstantsDp,
        Algorithm::CoddPerAtom,
        Algorithm::UniformNaiveIe,
        Algorithm::UniformCoddStar,
        Algorithm::UniformUnaryComp,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Product => "product",
            Algorithm::ConstantsDp => "constants-dp",
            Algorithm::CoddPerAtom => "codd-per-atom",
            Algorithm::UniformNaiveIe => "uniform-naive-ie",
            Algorithm::UniformCoddStar => "uniform-codd-star",
            Algorithm::UniformUnaryComp => "uniform-unary-comp",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.id() == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExactStatus {
    Tractable(Algorithm),
    SharpPComplete,
    /// Hard, with membership in #P not established.
    SharpPHard,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactVerdict {
    pub status: ExactStatus,
    /// Pattern queries that make the problem hard.
    pub witnesses: Vec<String>,
}

impl ExactVerdict {
    fn tractable(a: Algorithm) -> Self {
        ExactVerdict {
            status: ExactStatus::Tractable(a),
            witnesses: Vec::new(),
        }
    }

    pub fn is_tractable(&self) -> bool {
        matches!(self.status, ExactStatus::Tractable(_))
    }

    pub fn is_hard(&self) -> bool {
        matches!(self.status, ExactStatus::SharpPComplete | ExactStatus::SharpPHard)
    }

    pub fn algorithm(&self) -> Option<Algorithm> {
        match self.status {
            ExactStatus::Tractable(a) => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for ExactVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            ExactStatus::Tractable(a) => write!(f, "FP (algorithm {})", a.id())?,
            ExactStatus::SharpPComplete => write!(f, "#P-complete")?,
            ExactStatus::SharpPHard => write!(f, "#P-hard")?,
            ExactStatus::Unknown => write!(f, "unknown")?,
        }
        if !self.witnesses.is_empty() {
            write!(f, " (pattern {})", self.witnesses.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ApproxStatus {
    Fpras,
    NoFprasUnlessNpEqRp,
    Open,
}

impl fmt::Display for ApproxStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApproxStatus::Fpras => "FPRAS",
            ApproxStatus::NoFprasUnlessNpEqRp => "no FPRAS unless NP = RP",
            ApproxStatus::Open => "open",
        })
    }
}

fn hard(complete: bool, names: Vec<&str>) -> ExactVerdict {
    ExactVerdict {
        status: if complete {
            ExactStatus::SharpPComplete
        } else {
            ExactStatus::SharpPHard
        },
        witnesses: names.into_iter().map(String::from).collect(),
    }
}

/// Exact-complexity verdict for a Boolean self-join-free query.
pub fn classify_exact(q: &ConjunctiveQuery, s: Setting, p: Problem) -> Result<ExactVerdict> {
    if !q.is_self_join_free() {
        return Err(Error::Capability(format!("query {q} has a self-join")));
    }
    if !q.is_boolean() {
        return Err(Error::Invalid(format!("query {q} has free variables")));
    }
    let r = canonical_patterns(q);
    let consts = q.has_constants();
    let pick = |flags: &[(bool, &'static str)]| -> Vec<&'static str> {
        flags.iter().filter(|(b, _)| *b).map(|(_, n)| *n).collect()
    };
    use DomainKind::*;
    use TableKind::*;
    Ok(match (p.kind, s.table, s.domain) {
        (ProblemKind::Valuations, Naive, NonUniform) => {
            let w = pick(&[
                (r.rxx, "R(x,x)"),
                (r.rx_sx, "R(x)∧S(x)"),
                (r.rcc, "R(c,c)"),
                (r.rcc_distinct, "R(c,c')"),
            ]);
            if !w.is_empty() {
                hard(true, w)
            } else if consts {
                ExactVerdict::tractable(Algorithm::ConstantsDp)
            } else {
                ExactVerdict::tractable(Algorithm::Product)
            }
        }
        (ProblemKind::Valuations, Codd, NonUniform) => {
            if r.rx_sx {
                hard(true, vec!["R(x)∧S(x)"])
            } else {
                ExactVerdict::tractable(Algorithm::CoddPerAtom)
            }
        }
        (ProblemKind::Valuations, table, Uniform) => {
            let mut flags = vec![(r.rx_sxy_ty, "R(x)∧S(x,y)∧T(y)"), (r.rxy_sxy, "R(x,y)∧S(x,y)")];
            if table == Naive {
                flags.insert(0, (r.rxx, "R(x,x)"));
            }
            let w = pick(&flags);
            if consts {
                ExactVerdict {
                    status: ExactStatus::Unknown,
                    witnesses: Vec::new(),
                }
            } else if !w.is_empty() {
                hard(true, w)
            } else if table == Naive {
                ExactVerdict::tractable(Algorithm::UniformNaiveIe)
            } else {
                ExactVerdict::tractable(Algorithm::UniformCoddStar)
            }
        }
        (ProblemKind::Completions, table, NonUniform) => hard(table == Codd, vec!["R(x)"]),
        (ProblemKind::Completions, table, Uniform) => {
            if r.unary_only {
                ExactVerdict::tractable(Algorithm::UniformUnaryComp)
            } else {
                let mut w = pick(&[(r.rxx, "R(x,x)"), (r.rxy, "R(x,y)")]);
                if w.is_empty() {
                    w.push("non-unary atom");
                }
                hard(table == Codd, w)
            }
        }
    })
}

/// Whether a randomized approximation scheme exists.
pub fn classify_approx(q: &UnionQuery, s: Setting, p: Problem) -> ApproxStatus {
    let unary = q
        .disjuncts()
        .iter()
        .all(|d| d.atoms().iter().all(|a| a.args.len() == 1));
    match (p.kind, s.domain, s.table) {
        (ProblemKind::Valuations, _, _) => ApproxStatus::Fpras,
        (ProblemKind::Completions, DomainKind::NonUniform, _) => ApproxStatus::NoFprasUnlessNpEqRp,
        (ProblemKind::Completions, DomainKind::Uniform, _) if unary => ApproxStatus::Fpras,
        (ProblemKind::Completions, DomainKind::Uniform, TableKind::Naive) => ApproxStatus::NoFprasUnlessNpEqRp,
        (ProblemKind::Completions, DomainKind::Uniform, TableKind::Codd) => ApproxStatus::Open,
    }
}

/// Verdict per class of answer tuples, plus the combined verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParametricVerdict {
    pub classes: BTreeMap<Vec<String>, ExactVerdict>,
    pub overall: ExactVerdict,
}

pub fn classify_parametric(q: &ConjunctiveQuery, s: Setting, p: Problem) -> Result<ParametricVerdict> {
    let mut classes = BTreeMap::new();
    for rep in free_var_classes(q) {
        let b = substitute(q, &rep)?;
        classes.insert(rep, classify_exact(&b, s, p)?);
    }
    let verdicts: Vec<&ExactVerdict> = classes.values().collect();
    let overall = if let Some(h) = verdicts.iter().find(|v| v.is_hard()) {
        (*h).clone()
    } else if let Some(u) = verdicts.iter().find(|v| v.status == ExactStatus::Unknown) {
        (*u).clone()
    } else {
        verdicts[0].clone()
    };
    Ok(ParametricVerdict { classes, overall })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::{parse_cq, parse_query};

    const CN: Setting = Setting::new(TableKind::Codd, DomainKind::NonUniform);
    const CU: Setting = Setting::new(TableKind::Codd, DomainKind::Uniform);
    const NN: Setting = Setting::new(TableKind::Naive, DomainKind::NonUniform);

    #[test]
    fn verdict_examples() {
        let rs = parse_cq("R(X), S(X)").unwrap();
        let v = classify_exact(&rs, CN, Problem::VAL).unwrap();
        assert_eq!(v.status, ExactStatus::SharpPComplete);
        assert_eq!(v.witnesses, ["R(x)∧S(x)"]);
        assert_eq!(
            classify_exact(&rs, CU, Problem::VAL).unwrap().status,
            ExactStatus::Tractable(Algorithm::UniformCoddStar)
        );
        let rxy = parse_cq("R(X,Y)").unwrap();
        assert_eq!(
            classify_exact(&rxy, CU, Problem::COMP).unwrap().status,
            ExactStatus::SharpPComplete
        );
        let rx = parse_cq("R(X)").unwrap();
        assert_eq!(
            classify_exact(&rx, CN, Problem::COMP).unwrap().status,
            ExactStatus::SharpPComplete
        );
    }

    #[test]
    fn approx_examples() {
        let rx = parse_query("R(X)").unwrap();
        let rxy = parse_query("R(X,Y)").unwrap();
        for s in Setting::ALL {
            assert_eq!(classify_approx(&rxy, s, Problem::VAL), ApproxStatus::Fpras);
        }
        assert_eq!(
            classify_approx(&rx, CN, Problem::COMP),
            ApproxStatus::NoFprasUnlessNpEqRp
        );
        assert_eq!(classify_approx(&rxy, CU, Problem::COMP), ApproxStatus::Open);
    }

    #[test]
    fn self_joins_are_rejected() {
        let q = parse_cq("R(X), R(Y)").unwrap();
        assert!(matches!(
            classify_exact(&q, NN, Problem::VAL),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn parametric_examples() {
        let q = parse_cq("q(X) := R(X)").unwrap();
        assert!(classify_parametric(&q, NN, Problem::VAL)
            .unwrap()
            .overall
            .is_tractable());
        let q = parse_cq("q(X) := R(X,X)").unwrap();
        assert!(classify_parametric(&q, NN, Problem::VAL).unwrap().overall.is_hard());
        let q = parse_cq("q(X,Y) := R(X,c), S(Y)").unwrap();
        let v = classify_parametric(&q, NN, Problem::VAL).unwrap();
        assert!(v.overall.is_hard());
        assert!(v.classes[&vec!["c".to_string(), "c".to_string()]].is_hard());
        assert_eq!(v.classes.len(), 5);
        let q = parse_cq("q(X) := R(X, Y), S(X)").unwrap();
        let v = classify_parametric(&q, CN, Problem::VAL).unwrap();
        assert!(v.overall.is_tractable());
        assert!(classify_exact(&parse_cq("R(X, Y), S(X)").unwrap(), CN, Problem::VAL)
            .unwrap()
            .is_hard());
    }
}
