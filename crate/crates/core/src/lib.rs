//! Engine for a tangible grid web-authoring board.
//!
//! Brackets placed on a fixed grid stand for page elements. The engine
//! tracks their layout, binds content to them, analyzes how content fits
//! each bracket and speaks feedback as text utterances. Pages render to a
//! self-contained CSS grid document and sessions persist as canonical JSON.

pub mod command;
pub mod content;
pub mod fit;
pub mod grid;
pub mod session;
pub mod persist;
pub mod protocol;
pub mod render;
pub mod batch;
pub mod simulate;
