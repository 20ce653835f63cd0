pub mod api;
pub mod canon;
pub mod corpus;
pub mod eval;
pub mod formula;
pub mod index;
pub mod mixed;
pub mod query;
pub mod text;
pub mod unify;
