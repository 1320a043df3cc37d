//! Evaluation of synthetic tabular data against a real reference dataset
//! along three axes: fidelity (structure, value integrity, marginal shapes and
//! text characteristics), utility (train-on-synthetic, test-on-real rating
//! prediction) and privacy (a membership inference attack).

pub mod dataset;
pub mod cli;
pub mod fidelity;
pub mod privacy;
pub mod report;
pub mod seed;
pub mod textfid;
pub mod toy;
pub mod utility;
