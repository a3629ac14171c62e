//! Polynomial-time counting algorithms for the tractable cases, and the
//! planner that routes an instance to an algorithm, the sampler or brute force.

mod codd;
mod plan;
mod product;
mod star;
mod unary_comp;
mod uniform_naive;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::classify::Algorithm;
use crate::error::{Error, Result};
use crate::model::{Count, IncompleteDatabase};
use crate::query::ConjunctiveQuery;

pub use codd::count_val_codd;
pub use plan::{plan_and_count, CountResult, CountValue, Method, Mode, PlanConfig};
pub use product::{count_val_constants_dp, count_val_disjoint};
pub use star::count_val_uniform_codd;
pub use unary_comp::count_comp_uniform_unary;
pub use uniform_naive::{count_val_uniform_naive, non_satisfying_for_subset};

/// Guards on the parts of the algorithms that are exponential in the query.
#[derive(Clone, Copy, Debug)]
pub struct ExactConfig {
    /// Distinct null-block signatures in the inclusion–exclusion algorithm.
    pub signature_cap: usize,
    /// Atoms per connected component in the star algorithm.
    pub star_cap: usize,
    /// Atoms carrying a constant in the constants algorithm.
    pub constants_cap: usize,
    /// Unary relations in the completion algorithm.
    pub relation_cap: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            signature_cap: 8,
            star_cap: 3,
            constants_cap: 6,
            relation_cap: 3,
        }
    }
}

/// Number of surjections from an `n`-set onto an `m`-set.
pub fn surj(n: u64, m: u64) -> Count {
    if m > n {
        return Count::zero();
    }
    // alternating sum evaluated with separate positive and negative parts
    let mut pos = Count::zero();
    let mut neg = Count::zero();
    for i in 0..=m {
        let term = binomial(m, i) * num_traits::pow(Count::from(m - i), n as usize);
        if i % 2 == 0 {
            pos += term;
        } else {
            neg += term;
        }
    }
    pos - neg
}

pub fn binomial(n: u64, k: u64) -> Count {
    if k > n {
        return Count::zero();
    }
    let k = k.min(n - k);
    let mut r = Count::one();
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

pub fn multinomial(parts: &[u64]) -> Count {
    let mut total = 0;
    let mut r = Count::one();
    for &p in parts {
        total += p;
        r *= binomial(total, p);
    }
    r
}

pub(crate) fn pow(base: u64, exp: usize) -> Count {
    num_traits::pow(BigUint::from(base), exp)
}

/// Runs one algorithm without checking its preconditions beyond what the
/// algorithm itself verifies.
pub fn run_algorithm(
    alg: Algorithm,
    db: &IncompleteDatabase,
    q: &ConjunctiveQuery,
    cfg: &ExactConfig,
) -> Result<Count> {
    check_arities(db, q)?;
    match alg {
        Algorithm::Product => count_val_disjoint(db, q, cfg),
        Algorithm::ConstantsDp => count_val_constants_dp(db, q, cfg),
        Algorithm::CoddPerAtom => count_val_codd(db, q),
        Algorithm::UniformNaiveIe => count_val_uniform_naive(db, q, cfg),
        Algorithm::UniformCoddStar => count_val_uniform_codd(db, q, cfg),
        Algorithm::UniformUnaryComp => count_comp_uniform_unary(db, q, cfg),
    }
}

pub(crate) fn check_arities(db: &IncompleteDatabase, q: &ConjunctiveQuery) -> Result<()> {
    let schema = db.schema();
    for a in q.atoms() {
        if let Some(&k) = schema.get(&a.relation) {
            if k != a.args.len() {
                return Err(Error::Invalid(format!(
                    "relation {} has arity {k} in the database but {} in the query",
                    a.relation,
                    a.args.len()
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn require_uniform(db: &IncompleteDatabase) -> Result<&std::collections::BTreeSet<String>> {
    db.uniform_domain()
        .ok_or_else(|| Error::Setting("algorithm needs a uniform domain".into()))
}

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Capability(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_surj(n: u32, m: u32) -> u64 {
        if m == 0 {
            return u64::from(n == 0);
        }
        let total = (m as u64).pow(n);
        (0..total)
            .filter(|&f| {
                let mut hit = vec![false; m as usize];
                let mut x = f;
                for _ in 0..n {
                    hit[(x % m as u64) as usize] = true;
                    x /= m as u64;
                }
                hit.iter().all(|&h| h)
            })
            .count() as u64
    }

    #[test]
    fn surjection_values() {
        assert_eq!(surj(3, 2), Count::from(6u32));
        assert_eq!(surj(2, 3), Count::zero());
        assert_eq!(surj(4, 4), Count::from(24u32));
        assert_eq!(surj(0, 0), Count::one());
        assert_eq!(surj(3, 0), Count::zero());
        for n in 0..6 {
            for m in 0..6 {
                assert_eq!(surj(n, m), Count::from(brute_surj(n as u32, m as u32)), "surj({n},{m})");
            }
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), Count::from(10u32));
        assert_eq!(binomial(5, 6), Count::zero());
        assert_eq!(multinomial(&[2, 1, 1]), Count::from(12u32));
    }
}
