pub mod codelist;
pub mod error;
pub mod expr;
pub mod index_set;
pub mod interval;
pub mod spectral;
pub mod engine;
pub mod reference;
pub mod bench;
pub mod corpus;
