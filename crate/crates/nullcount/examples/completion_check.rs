//! Whether a complete database is a completion of an incomplete one.

use nullcount::compsem::{is_completion_codd, is_completion_naive, DEFAULT_NODE_BUDGET};
use nullcount::{parse_database, GroundDatabase};

fn main() -> nullcount::Result<()> {
    let codd = parse_database("dom ?1 : a b\ndom ?2 : a b\nR(?1, a)\nR(b, ?2)")?;
    let naive = parse_database("dom ?1 : a b\nR(?1, a)\nR(b, ?1)")?;
    for facts in ["R(a, a)\nR(b, b)", "R(b, a)", "R(a, a)\nR(b, a)"] {
        let s = GroundDatabase::parse(facts)?;
        println!(
            "{:<20} codd: {:<5} naive: {}",
            facts.replace('\n', " "),
            is_completion_codd(&codd, &s)?,
            is_completion_naive(&naive, &s, DEFAULT_NODE_BUDGET)?
        );
    }
    Ok(())
}
