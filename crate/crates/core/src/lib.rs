pub mod basis;
pub mod error;
pub mod field;
pub mod opalg;
pub mod streams;
pub mod machines;
pub mod entropy;
pub mod enumerate;
pub mod counterexamples;
pub mod cli;
