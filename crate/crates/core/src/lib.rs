//! Schreier families, the repeated-averages hierarchy, and exact evaluation
//! of Schreier, Baernstein and interval-blocking norms on finitely supported
//! rational vectors.

pub mod averages;
pub mod config;
pub mod error;
pub mod interval;
pub mod norms;
pub mod ordinal;
pub mod par;
pub mod rational;
pub mod report;
pub mod schreier;
pub mod szlenk;
pub mod verify;

pub use error::{Error, Result};
pub use ordinal::Ordinal;
pub use rational::{Exponent, Rational};
pub use schreier::{FamilyHandle, FiniteSet};
