//! Pattern containment between queries.

use nullcount::parse_cq;
use nullcount::query::{canonical_patterns, contains_pattern};

fn main() -> nullcount::Result<()> {
    let q = parse_cq("R(U, X, U), S(Y, Y), T(X, V, Z, V)")?;
    for p in ["R2(U, U, Y), S2(Z)", "A(X, Y), B(X, Y)", "A(X), B(X), C(X)"] {
        let p = parse_cq(p)?;
        println!("{p} is a pattern of {q}: {}", contains_pattern(&q, &p));
    }
    println!("shapes present: {}", canonical_patterns(&q).names().join(", "));
    Ok(())
}
