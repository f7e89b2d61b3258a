//! Exact construction and verification of the Weil representation of the
//! quasi-split unitary group U(n,n)(F_{q²}/F_q), realized as SL*^{-1}(2, Mₙ(F_{q²})).

pub mod cyclo;
pub mod decomp;
pub mod error;
pub mod ffield;
pub mod astar;
pub mod cli;
pub mod wdata;
pub mod operator;
pub mod symcompat;
pub mod ugroup;
pub mod weilrep;

pub use error::{Error, Result};
