//! Exact and approximate complexity of the basic query shapes in every setting.

use nullcount::classify::{classify_approx, classify_exact, Problem, Setting};
use nullcount::parse_cq;

fn main() -> nullcount::Result<()> {
    let shapes = [
        "R(X, X)",
        "R(X), S(X)",
        "R(X), S(X, Y), T(Y)",
        "R(X, Y), S(X, Y)",
        "R(X)",
        "R(X, Y)",
    ];
    for p in [Problem::VAL, Problem::COMP] {
        for s in Setting::ALL {
            println!("{p} in {s}");
            for text in shapes {
                let q = parse_cq(text)?;
                let exact = classify_exact(&q, s, p)?;
                let approx = classify_approx(&q.clone().into(), s, p);
                println!("  {text:<22} {exact}; {approx}");
            }
        }
    }
    Ok(())
}
