//! Feasibility decisions and verifiable infeasibility certificates for
//! polynomial systems that encode graph problems.

pub mod error;
pub mod exactla;
pub mod fields;
pub mod cli;
pub mod cyclecert;
pub mod encodings;
pub mod fpnulla;
pub mod nulla;
pub mod polys;
pub mod possatz;
pub mod recover;
pub mod sdpcore;

pub use error::{Error, Result};
