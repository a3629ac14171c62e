//! Counting the valuations and completions of incomplete databases that
//! satisfy a query.

pub mod approx;
pub mod classify;
pub mod cli;
pub mod compsem;
pub mod error;
pub mod exact;
pub mod gadgets;
pub mod model;
pub mod oracle;
pub mod query;

pub use error::{Error, Result};
pub use model::{
    apply_valuation, parse_database, Count, Domains, Fact, GroundDatabase, GroundFact, IncompleteDatabase, Term,
    Valuation,
};
pub use query::{parse_cq, parse_query, Arg, Atom, ConjunctiveQuery, UnionQuery};
