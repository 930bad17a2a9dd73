#![allow(dead_code)]

pub mod surface_eval;
