//! Construction, analysis and decoding of quantum locally recoverable codes over finite fields.
//!
//! The crate is organised bottom-up: [`gf`] provides field arithmetic, [`linalg`] dense
//! matrices over a field, [`polycode`] monomial-support polynomial spaces and evaluation,
//! [`classical`] linear codes, [`css`] CSS codes in the symplectic picture, [`qtb`] the
//! (folded) quantum Tamo-Barg family, [`listdec`] Reed-Solomon and folded Reed-Solomon list
//! decoders, [`qtbdec`] the reduction of qTB decoding to list decoding, [`ensembles`] random
//! codes and expander-based concatenation, and [`bounds`] closed-form distance and radius
//! calculators.

pub mod error;
pub mod gf;
pub mod linalg;
pub mod polycode;
pub mod classical;
pub mod css;
pub mod qtb;
pub mod listdec;
pub mod bounds;
pub mod qtbdec;
pub mod ensembles;

pub use error::{Error, Result};
pub use gf::{FieldCtx, FieldDescriptor, Felt};
