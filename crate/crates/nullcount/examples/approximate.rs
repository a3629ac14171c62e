//! Sampling estimate of a valuation count that has no exact algorithm.

use nullcount::approx::{karp_luby, witnesses, ApproxConfig};
use nullcount::oracle::brute_val;
use nullcount::{parse_database, parse_query};

fn main() -> nullcount::Result<()> {
    let mut text = String::new();
    for i in 0..8 {
        text.push_str(&format!("dom ?x{i} : a b c d\nR(?x{i}, ?x{})\n", (i + 1) % 8));
    }
    text.push_str("S(a)\n");
    let db = parse_database(&text)?;
    let q = parse_query("R(X, Y), S(Y) | R(X, X)")?;
    let cfg = ApproxConfig {
        epsilon: 0.1,
        delta: 0.05,
        seed: 1,
        ..ApproxConfig::default()
    };
    let e = karp_luby(&db, &q, &cfg)?;
    println!("witnesses: {}", witnesses(&db, &q, cfg.witness_cap)?.len());
    println!("estimate: {} ({} samples x {} runs)", e.value, e.samples, e.runs);
    println!("exact:    {}", brute_val(&db, &q, false)?);
    Ok(())
}
