//! Classification of objects met by incidental contact with a tactile
//! forearm into rigid/soft × fixed/movable categories.
//!
//! The pipeline runs taxel frames through thresholding and connected
//! components ([`taxel`]), reduces each trial to maximum-force, contact-area
//! and contact-motion series ([`features`]), and scores them against
//! per-category left-right Gaussian HMMs ([`hmm`]). A lumped spring/friction
//! contact model ([`sim`]) generates labelled synthetic trials, [`baseline`]
//! holds the PCA + nearest-neighbour comparator, and [`harness`] runs the
//! cross-validation studies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod category;
pub mod features;
pub mod harness;
pub mod hmm;
pub mod sim;
pub mod taxel;

pub use category::{Category, Condition, Setting};
