// comparisons are written as !(x < bound) so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod flow;
pub mod bounds;
pub mod models;
pub mod seqspace;
pub mod cli;
