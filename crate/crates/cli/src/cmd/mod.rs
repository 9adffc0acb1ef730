pub mod bench;
pub mod bias;
pub mod eval;
pub mod fit;
pub mod generate;
pub mod sweep;
