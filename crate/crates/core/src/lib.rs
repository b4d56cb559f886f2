#![no_std]
extern crate alloc;

pub mod analytic;
pub mod error;
pub mod evolve;
pub mod iontrap;
pub mod linalg;
pub mod model;
pub mod protocol;
