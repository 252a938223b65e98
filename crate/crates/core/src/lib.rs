//! Monte Carlo study of qubit state tomography with weak Gaussian-pointer
//! measurements, compared against projective tomography on equal resources.

pub mod bloch;
pub mod cli;
pub mod estimator;
pub mod harness;
pub mod pointer;
pub mod protocol;
pub mod validate;
