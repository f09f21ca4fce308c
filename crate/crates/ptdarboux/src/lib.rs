//! Generation and numerical verification of exactly solvable non-Hermitian
//! PT-symmetric potentials via higher-order Darboux (Crum) transformations.
//!
//! The pipeline: start from a closed-form solvable model ([`models`]), pick a
//! set of eigenstates as transformation functions, build the transformed
//! potential and eigenfunctions through Wronskian determinants ([`darboux`]),
//! then verify everything independently: discretized spectra with deleted
//! levels ([`spectral`]) and the nonlinear pseudo-supersymmetry algebra
//! ([`susy`]). All closed-form objects are carried as exact symbolic
//! expressions ([`expr`]) so derivatives are never approximated.

pub mod closed_form;
pub mod config;
pub mod darboux;
pub mod expr;
pub mod models;
pub mod pipeline;
pub mod report;
pub mod spectral;
pub mod susy;

