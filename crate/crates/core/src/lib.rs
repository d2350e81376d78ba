pub mod assign;
pub mod fairness;
pub mod flow;
pub mod model;
pub mod algos;
pub mod data;
pub mod rng;
pub mod smartpark;
pub mod stats;
pub mod experiment;
