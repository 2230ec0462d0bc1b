//! Automorphism families of the ball and bidisc, dented model domains, and
//! numerical estimates of boundary orbit accumulation sets.

pub mod accum;
pub mod cli;
pub mod domains;
pub mod levi;
pub mod moebius;
pub mod orbits;
pub mod scenario;
pub mod verify;
