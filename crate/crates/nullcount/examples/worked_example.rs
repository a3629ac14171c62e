//! Valuations and completions of a small table with two nulls.

use nullcount::classify::Problem;
use nullcount::exact::{plan_and_count, Mode, PlanConfig};
use nullcount::oracle::completion_distribution;
use nullcount::{parse_database, parse_query};

fn main() -> nullcount::Result<()> {
    let db = parse_database(
        "dom ?1 : a b c
         dom ?2 : a b
         S(a, b)
         S(?1, a)
         S(a, ?2)",
    )?;
    let q = parse_query("S(X, X)")?;
    let cfg = PlanConfig::default();
    for p in [Problem::VAL, Problem::COMP] {
        let r = plan_and_count(&db, &q, p, Mode::Auto, &cfg)?;
        println!("{p} = {} via {}", r.value.value(), r.method);
    }
    println!("completions and how many valuations give each:");
    for (g, n) in completion_distribution(&db, &cfg.oracle)? {
        let facts: Vec<String> = g.facts().iter().map(ToString::to_string).collect();
        println!("  {{{}}} x{n}", facts.join(", "));
    }
    Ok(())
}
