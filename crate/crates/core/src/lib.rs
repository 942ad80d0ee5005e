#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod design;
pub mod enumerate;
pub mod error;
pub mod infer;
pub mod link;
pub mod mle;
pub mod model;
pub mod mpl;
pub mod normal;
pub mod path;
pub mod separation;
