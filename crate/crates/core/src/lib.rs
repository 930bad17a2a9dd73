pub mod bound;
pub mod check;
pub mod corpus;
pub mod infer;
pub mod interp_dist;
pub mod interp_trace;
pub mod potential;
pub mod profiler;
pub mod program;
pub mod rat;
pub mod syntax;
pub mod value;
