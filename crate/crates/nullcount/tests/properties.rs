use proptest::prelude::*;

use nullcount::approx::{karp_luby, ApproxConfig};
use nullcount::classify::{Problem, ProblemKind};
use nullcount::exact::{binomial, plan_and_count, run_algorithm, surj, ExactConfig, Mode, PlanConfig};
use nullcount::oracle::{brute_comp, brute_val, sweep_counts, OracleConfig};
use nullcount::{parse_cq, parse_database, parse_query, Count, IncompleteDatabase};

const RELS: [(&str, usize); 4] = [("R", 1), ("S", 1), ("T", 2), ("U", 2)];
const VALUES: [&str; 3] = ["a", "b", "c"];

/// Term choice: below 3 a constant, otherwise a null.
fn term(choice: usize, codd: bool, next: &mut usize) -> String {
    if choice < VALUES.len() {
        VALUES[choice].to_string()
    } else if codd {
        *next += 1;
        format!("?m{next}")
    } else {
        format!("?n{}", choice - VALUES.len())
    }
}

fn build(facts: &[(usize, Vec<usize>)], dom: usize, codd: bool, uniform: bool) -> IncompleteDatabase {
    let mut next = 0;
    let mut lines = std::collections::BTreeSet::new();
    for (r, args) in facts {
        let (name, arity) = RELS[*r];
        let terms: Vec<String> = args[..arity].iter().map(|&c| term(c, codd, &mut next)).collect();
        lines.insert(format!("{name}({})", terms.join(", ")));
    }
    let body: Vec<String> = lines.into_iter().collect();
    let text = body.join("\n");
    let mut nulls: Vec<&str> = text
        .split(['(', ')', ',', ' ', '\n'])
        .filter(|w| w.starts_with('?'))
        .collect();
    nulls.sort();
    nulls.dedup();
    let header = if uniform {
        format!("@uniform {}\n", VALUES[..dom].join(" "))
    } else {
        nulls
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let d: Vec<&str> = VALUES.iter().copied().skip(i % 2).take(dom.max(1)).collect();
                format!("dom {n} : {}\n", d.join(" "))
            })
            .collect()
    };
    parse_database(&format!("{header}{text}")).unwrap()
}

fn facts() -> impl Strategy<Value = Vec<(usize, Vec<usize>)>> {
    prop::collection::vec((0..RELS.len(), prop::collection::vec(0..7usize, 2)), 1..6)
}

fn agree(db: &IncompleteDatabase, alg: &str, q: &str) -> Result<(), TestCaseError> {
    let cq = parse_cq(q).unwrap();
    let alg = nullcount::classify::Algorithm::from_id(alg).unwrap();
    let got = run_algorithm(alg, db, &cq, &ExactConfig::default()).unwrap();
    let u = cq.into();
    let want = if alg == nullcount::classify::Algorithm::UniformUnaryComp {
        brute_comp(db, &u, false).unwrap()
    } else {
        brute_val(db, &u, false).unwrap()
    };
    prop_assert_eq!(got, want, "{} on\n{}", q, db);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surjections_partition_functions(n in 0u64..10, d in 0u64..10) {
        let sum: Count = (0..=d).map(|m| binomial(d, m) * surj(n, m)).sum();
        prop_assert_eq!(sum, num_traits::pow(Count::from(d), n as usize));
    }

    #[test]
    fn product_matches_brute_force(f in facts(), dom in 1usize..4) {
        let db = build(&f, dom, false, false);
        agree(&db, "product", "R(X), T(Y, Z)")?;
        agree(&db, "constants-dp", "R(a), T(X, b)")?;
    }

    #[test]
    fn codd_per_atom_matches_brute_force(f in facts(), dom in 1usize..4) {
        let db = build(&f, dom, true, false);
        agree(&db, "codd-per-atom", "T(X, X), R(Y)")?;
    }

    #[test]
    fn uniform_algorithms_match_brute_force(f in facts(), dom in 1usize..4) {
        let naive = build(&f, dom, false, true);
        agree(&naive, "uniform-naive-ie", "R(X), S(X), T(X, Y)")?;
        let unary: Vec<_> = f.iter().filter(|(r, _)| RELS[*r].1 == 1).cloned().collect();
        if !unary.is_empty() {
            agree(&build(&unary, dom, false, true), "uniform-unary-comp", "R(X), S(X)")?;
        }
        let codd = build(&f, dom, true, true);
        agree(&codd, "uniform-codd-star", "R(X), T(X, Y), U(Z, Z)")?;
        agree(&codd, "uniform-codd-star", "R(X), T(X, X)")?;
    }

    #[test]
    fn query_and_negation_partition_valuations(f in facts(), dom in 1usize..4, uniform: bool) {
        let db = build(&f, dom, false, uniform);
        let q = parse_query("T(X, Y), R(Y)").unwrap();
        for kind in [ProblemKind::Valuations, ProblemKind::Completions] {
            let cfg = PlanConfig::default();
            let pos = plan_and_count(&db, &q, Problem { kind, negated: false }, Mode::Auto, &cfg);
            let neg = plan_and_count(&db, &q, Problem { kind, negated: true }, Mode::Brute, &cfg);
            let (pos, neg) = match (pos, neg) {
                (Ok(p), Ok(n)) => (p, n),
                _ => continue,
            };
            if !matches!(pos.value, nullcount::exact::CountValue::Exact(_)) {
                continue;
            }
            let total = match kind {
                ProblemKind::Valuations => db.total_valuations(),
                ProblemKind::Completions => {
                    sweep_counts(&db, None, false, &OracleConfig::default()).unwrap().1
                }
            };
            prop_assert_eq!(pos.value.value() + neg.value.value(), total);
        }
    }

    #[test]
    fn sweep_agrees_with_enumeration(f in facts(), dom in 1usize..4) {
        let db = build(&f, dom, false, false);
        let q = parse_query("T(X, Y), S(Y) | R(X), S(X)").unwrap();
        let (val, comp) = sweep_counts(&db, Some(&q), false, &OracleConfig::default()).unwrap();
        prop_assert_eq!(val, brute_val(&db, &q, false).unwrap());
        prop_assert_eq!(comp, brute_comp(&db, &q, false).unwrap());
    }

    #[test]
    fn database_text_round_trips(f in facts(), dom in 1usize..4, codd: bool, uniform: bool) {
        let db = build(&f, dom, codd, uniform);
        prop_assert_eq!(parse_database(&db.to_string()).unwrap(), db);
    }

    #[test]
    fn sampling_is_reproducible(f in facts(), seed in 0u64..1000) {
        let db = build(&f, 3, false, false);
        let q = parse_query("T(X, Y), R(Y)").unwrap();
        let one = ApproxConfig { seed, epsilon: 0.3, delta: 0.2, ..ApproxConfig::default() };
        let three = ApproxConfig { jobs: 3, ..one };
        prop_assert_eq!(karp_luby(&db, &q, &one).unwrap(), karp_luby(&db, &q, &three).unwrap());
    }
}
