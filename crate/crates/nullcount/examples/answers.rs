//! Counting per answer tuple of a query with free variables.

use nullcount::classify::{classify_parametric, Problem, Setting};
use nullcount::exact::{plan_and_count, Mode, PlanConfig};
use nullcount::query::substitute;
use nullcount::{parse_cq, parse_database};

fn main() -> nullcount::Result<()> {
    let db = parse_database("dom ?1 : a b c\ndom ?2 : a b\nR(?1, a)\nR(b, ?2)\nS(?2)")?;
    let q = parse_cq("q(X) := R(X, Y), S(X)")?;
    let v = classify_parametric(&q, Setting::of(&db), Problem::VAL)?;
    for (class, verdict) in &v.classes {
        println!("answers like {class:?}: {verdict}");
    }
    for answer in ["a", "b", "c"] {
        let b = substitute(&q, &[answer.to_string()])?;
        let r = plan_and_count(&db, &b.into(), Problem::VAL, Mode::Auto, &PlanConfig::default())?;
        println!("X = {answer}: {} valuations via {}", r.value.value(), r.method);
    }
    Ok(())
}
