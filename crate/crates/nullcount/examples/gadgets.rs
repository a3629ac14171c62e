//! Hardness gadgets on small graphs and a formula, with their count identities.

use nullcount::gadgets::{gadget_by_name, verify_identity, Instance, GADGET_NAMES};
use nullcount::oracle::{Cnf3, Graph};

fn main() -> nullcount::Result<()> {
    let square = Graph::cycle(4).with_bipartition().expect("even cycles are bipartite");
    for name in GADGET_NAMES.iter().filter(|&&n| n != "k3sat") {
        let out = gadget_by_name(name, Instance::Graph(&square))?;
        println!("{name:<11} {:<40} {}", out.identity.to_string(), verify_identity(&out)?);
    }
    let f = Cnf3::new(3, vec![[1, 2, 3], [-1, -2, 3]])?;
    for k in 1..=3 {
        let out = gadget_by_name("k3sat", Instance::Cnf(&f, k))?;
        println!(
            "k3sat k={k}  {:<40} {}",
            out.identity.to_string(),
            verify_identity(&out)?
        );
    }
    Ok(())
}
