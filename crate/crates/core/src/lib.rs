pub mod cli;
pub mod coder;
pub mod estimator;
pub mod flexibility;
pub mod growth;
