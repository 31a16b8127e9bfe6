//! First-order logic with equality over relational instances.

pub mod ast;
pub mod eval;
pub mod fragment;
pub mod parser;

pub use ast::{Formula, Term};
pub use eval::{answer, answer_free, is_true, satisfies, Answers, Assignment};
pub use fragment::{classify, FragmentTag};
pub use parser::{parse, parse_with_schema};
