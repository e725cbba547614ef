//! Saddle points of smooth functions via level-set min-max problems.
//!
//! For a level `l` and Morse index `m`, the slice diameter
//! `diam(S ∩ lev_{≥l} f ∩ U)` is minimized over `m`-dimensional affine
//! subspaces `S`. The smallest level at which the slices can be made empty
//! is the critical value of an index-`m` saddle inside the ball `U`.
//!
//! - [`bisection`] brackets that level with linear convergence.
//! - [`local`] iterates from a lower bound and converges superlinearly near
//!   nondegenerate saddles.
//! - [`quadmodel`] fits quadratic models from sampled values and gradients.

pub mod app;
pub mod bisection;
pub mod bounds;
pub mod error;
pub mod geometry;
pub mod local;
pub mod numkit;
pub mod objective;
pub mod outer;
pub mod quadmodel;
pub mod trace;

pub use error::{Error, Result};
