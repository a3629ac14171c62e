use std::fmt;

use super::{run_algorithm, ExactConfig};
use crate::approx::{karp_luby, ApproxConfig, Estimate};
use crate::classify::{
    classify_approx, classify_exact, Algorithm, ApproxStatus, DomainKind, ExactVerdict, Problem, ProblemKind, Setting,
    TableKind,
};
use crate::error::{Error, Result};
use crate::model::{Count, IncompleteDatabase};
use crate::oracle::{brute_comp_with, brute_val_with, OracleConfig};
use crate::query::UnionQuery;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Exact algorithm when one applies, else sampling for valuations, else
    /// brute force within the caps.
    #[default]
    Auto,
    Exact,
    Brute,
    Approx,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Mode::Auto),
            "exact" => Ok(Mode::Exact),
            "brute" => Ok(Mode::Brute),
            "approx" => Ok(Mode::Approx),
            _ => Err(Error::Invalid(format!("unknown mode {s}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct PlanConfig {
    pub exact: ExactConfig,
    pub oracle: OracleConfig,
    pub approx: ApproxConfig,
    /// Setting to count in instead of the detected one.
    pub setting: Option<Setting>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Algorithm(Algorithm),
    Brute,
    KarpLuby,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Algorithm(a) => f.write_str(a.id()),
            Method::Brute => f.write_str("brute-force"),
            Method::KarpLuby => f.write_str("karp-luby"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CountValue {
    Exact(Count),
    Estimate(Estimate),
}

impl CountValue {
    pub fn value(&self) -> &Count {
        match self {
            CountValue::Exact(c) => c,
            CountValue::Estimate(e) => &e.value,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountResult {
    pub value: CountValue,
    pub method: Method,
    pub setting: Setting,
    /// Exact-complexity verdict, for single self-join-free disjuncts.
    pub verdict: Option<ExactVerdict>,
    pub approx: ApproxStatus,
}

/// The database to count in: the input, possibly converted to the requested setting.
fn effective(db: &IncompleteDatabase, want: Option<Setting>) -> Result<(IncompleteDatabase, Setting)> {
    let detected = Setting::of(db);
    let Some(want) = want else {
        return Ok((db.clone(), detected));
    };
    if want.table == TableKind::Codd && detected.table != TableKind::Codd {
        return Err(Error::Setting(
            "a null occurs more than once, so the table is not Codd".into(),
        ));
    }
    let db = match (want.domain, detected.domain) {
        (DomainKind::Uniform, DomainKind::NonUniform) => db
            .to_uniform(None)
            .ok_or_else(|| Error::Setting("nulls have different domains".into()))?,
        (DomainKind::NonUniform, DomainKind::Uniform) => db.to_per_null(),
        _ => db.clone(),
    };
    Ok((db, want))
}

/// Counts valuations or completions of `db` satisfying `q` (or its negation).
pub fn plan_and_count(
    db: &IncompleteDatabase,
    q: &UnionQuery,
    problem: Problem,
    mode: Mode,
    cfg: &PlanConfig,
) -> Result<CountResult> {
    if !q.is_boolean() {
        return Err(Error::Invalid(
            "counting needs a Boolean query; substitute an answer tuple first".into(),
        ));
    }
    let (db, setting) = effective(db, cfg.setting)?;
    let verdict = match q.as_single() {
        Some(cq) if cq.is_self_join_free() => Some(classify_exact(cq, setting, problem)?),
        _ => None,
    };
    let approx = classify_approx(q, setting, problem);
    let result = |value, method| CountResult {
        value,
        method,
        setting,
        verdict: verdict.clone(),
        approx,
    };
    let describe = || match &verdict {
        Some(v) => format!("{problem} is {v} in the {setting} setting"),
        None => format!("{problem} has no known tractable case for unions or self-joins"),
    };
    let exact = |alg: Algorithm| -> Result<Count> {
        let cq = q.as_single().expect("verdicts exist only for single disjuncts");
        let n = run_algorithm(alg, &db, cq, &cfg.exact)?;
        if !problem.negated {
            return Ok(n);
        }
        match problem.kind {
            ProblemKind::Valuations => Ok(db.total_valuations() - n),
            ProblemKind::Completions => Err(Error::Capability(
                "exact completion counts for a negated query need brute force".into(),
            )),
        }
    };
    let brute = || -> Result<Count> {
        match problem.kind {
            ProblemKind::Valuations => brute_val_with(&db, q, problem.negated, &cfg.oracle),
            ProblemKind::Completions => brute_comp_with(&db, Some(q), problem.negated, &cfg.oracle),
        }
    };
    let sample = || -> Result<CountResult> {
        if problem.kind == ProblemKind::Completions {
            let why = match approx {
                ApproxStatus::Fpras => "no sampler is implemented for completions",
                ApproxStatus::NoFprasUnlessNpEqRp => "never: no FPRAS exists unless NP = RP",
                ApproxStatus::Open => "open: no FPRAS is known",
            };
            return Err(Error::Capability(format!(
                "approximate completion counting in the {setting} setting: {why}"
            )));
        }
        if problem.negated {
            return Err(Error::Capability(
                "sampling covers monotone queries only; the negation is not".into(),
            ));
        }
        let e = karp_luby(&db, q, &cfg.approx)?;
        Ok(result(CountValue::Estimate(e), Method::KarpLuby))
    };
    // a uniform table is also a per-null one, so the non-uniform algorithms apply
    let alg = verdict.as_ref().and_then(ExactVerdict::algorithm).or_else(|| {
        let cq = q.as_single().filter(|cq| cq.is_self_join_free())?;
        if setting.domain != DomainKind::Uniform {
            return None;
        }
        let general = Setting::new(setting.table, DomainKind::NonUniform);
        classify_exact(cq, general, problem).ok()?.algorithm()
    });
    match mode {
        Mode::Exact => match alg {
            Some(a) => Ok(result(CountValue::Exact(exact(a)?), Method::Algorithm(a))),
            None => Err(Error::Hardness(describe())),
        },
        Mode::Brute => Ok(result(CountValue::Exact(brute()?), Method::Brute)),
        Mode::Approx => sample(),
        Mode::Auto => {
            if let Some(a) = alg {
                match exact(a) {
                    Ok(n) => return Ok(result(CountValue::Exact(n), Method::Algorithm(a))),
                    Err(Error::Capability(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            if problem.kind == ProblemKind::Valuations && !problem.negated && alg.is_none() {
                return sample();
            }
            match brute() {
                Ok(n) => Ok(result(CountValue::Exact(n), Method::Brute)),
                Err(Error::Resource(r)) => Err(Error::Hardness(format!("{}; brute force: {r}", describe()))),
                Err(e) => Err(e),
            }
        }
    }
}
