#![allow(dead_code)]

pub mod geweke;
pub mod ks;
pub mod partitions;
pub mod toy;
