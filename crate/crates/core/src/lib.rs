// Tensor loops index several arrays at once; `!(x > t)` guards are meant to reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod error;
pub mod expr;
pub mod extrinsic;
pub mod geometry;
pub mod intrinsic;
pub mod jet;
pub mod par;
pub mod quadrature;
pub mod renorm;
pub mod theorems;
