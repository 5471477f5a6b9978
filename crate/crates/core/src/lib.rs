//! Exact analysis of non-symmetric distance spaces.

pub mod derived;
pub mod exec;
pub mod extreal;
pub mod family;
pub mod formal_balls;
pub mod gallery;
pub mod nets;
pub mod order;
pub mod random;
pub mod space;
pub mod sweep;
pub mod theorems;
pub mod topology;

pub use exec::Exec;
pub use extreal::{ExtReal, Rational};
pub use nets::EpSeq;
pub use space::FiniteSpace;
