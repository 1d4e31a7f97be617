pub mod exact;
pub mod poly;
pub mod circuit;
pub mod families;
pub mod witness;
pub mod kronecker;
pub mod identify;
pub mod approx;
pub mod protocol;
pub mod neural;
pub mod cli;
