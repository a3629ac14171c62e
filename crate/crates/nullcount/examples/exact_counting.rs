//! Each polynomial-time algorithm on an instance of its class, checked
//! against enumeration.

use nullcount::classify::Algorithm;
use nullcount::exact::{run_algorithm, ExactConfig};
use nullcount::oracle::{brute_comp, brute_val};
use nullcount::{parse_cq, parse_database};

fn main() -> nullcount::Result<()> {
    let cases = [
        (
            Algorithm::Product,
            "dom ?1 : a b\ndom ?2 : b c\nR(?1, ?2)\nS(?2)",
            "R(X, Y), S(Z)",
        ),
        (
            Algorithm::ConstantsDp,
            "dom ?1 : a b\ndom ?2 : a c\nR(?1, ?2)\nS(?2)",
            "R(a, X), S(c)",
        ),
        (
            Algorithm::CoddPerAtom,
            "dom ?1 : a b\ndom ?2 : a b c\nR(?1, a)\nR(b, ?2)",
            "R(X, X)",
        ),
        (
            Algorithm::UniformNaiveIe,
            "@uniform a b c\nR(?1)\nS(?1, ?2)\nS(?3, a)",
            "R(X), S(X, Y)",
        ),
        (
            Algorithm::UniformCoddStar,
            "@uniform a b c\nR(?1)\nR(b)\nS(?2)\nT(?3, ?4)",
            "R(X), S(X), T(X, Y)",
        ),
        (
            Algorithm::UniformUnaryComp,
            "@uniform a b c\nR(?1)\nR(?2)\nS(?2)",
            "R(X), S(X)",
        ),
    ];
    let cfg = ExactConfig::default();
    for (alg, db, q) in cases {
        let db = parse_database(db)?;
        let q = parse_cq(q)?;
        let fast = run_algorithm(alg, &db, &q, &cfg)?;
        let slow = if alg == Algorithm::UniformUnaryComp {
            brute_comp(&db, &q.clone().into(), false)?
        } else {
            brute_val(&db, &q.clone().into(), false)?
        };
        println!("{:<20} {:<24} {fast} (enumeration {slow})", alg.id(), q.to_string());
    }
    Ok(())
}
