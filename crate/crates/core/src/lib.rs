//! Canonical W₁,₊-geodesics on finite graphs and entropy convexity along them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bb_triple;
pub mod binomial_w2;
pub mod entropy;
pub mod error;
pub mod geodesic;
pub mod graph;
pub mod lp;
pub mod measure;
pub mod orientation;
pub mod poly;
pub mod product;
pub mod transport;

pub use error::{Error, Result};
