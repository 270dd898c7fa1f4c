pub mod basins;
pub mod cli;
pub mod error;
pub mod fixpoints;
pub mod method;
pub mod orbit;
pub mod poly;
pub mod render;
pub mod scaling;
pub mod symmetry;
