#![allow(dead_code)]

pub mod bigfloat;
pub mod oracle_grid;
