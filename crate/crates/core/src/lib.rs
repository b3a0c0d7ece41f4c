pub mod algorithms;
pub mod cli;
pub mod codec;
pub mod engine;
pub mod model;
pub mod partition;
pub mod store;
