//! Wind-farm monitoring toolkit: quantized recurrent wind forecasting, yaw
//! set-point control, and wind-aware multi-UAV inspection routing.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod forecast;
pub mod geom;
pub mod kinematics;
pub mod pipeline;
pub mod routing;
pub mod wind;
pub mod yaw;

pub use error::{Error, Result};
pub use geom::Vec2;
pub use kinematics::{GroundSpeedRule, UavSpec, VelocityTriangle};
pub use wind::{CpModel, TurbineModel, TurbineSpec, WindVector};
