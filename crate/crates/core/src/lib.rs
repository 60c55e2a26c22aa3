//! Rédei-polynomial direction counting in finite planes F_q² and growth of
//! symmetric sets in the affine group Aff(F_q), with exact arithmetic
//! throughout and a verification harness for the associated bounds.

pub mod affgroup;
pub mod bounds;
pub mod cli;
pub mod ff;
pub mod harness;
pub mod io;
pub mod plane;
pub mod poly;
