//! Stochastic reaction networks: elimination of non-interacting species,
//! reduced kinetics, exact stationary distributions and scaling limits.

pub mod algebra;
pub mod elimination;
pub mod expr;
pub mod fixtures;
pub mod kinetics;
pub mod linalg;
pub mod markov;
pub mod model;
pub mod netparse;
pub mod num;
pub mod scaling;
pub mod simulate;
pub mod system;
