pub mod aggregators;
pub mod axiom_lab;
pub mod constraints;
pub mod error;
pub mod fo;
pub mod lifting_lab;
pub mod query_agg;
pub mod relational;
pub mod space;

pub use error::{Error, Result};
