//! Command grammar for the text channel and the feedback utterances the
//! engine speaks back.

mod catalog;
mod compose;
mod grammar;

pub use catalog::{catalog, Catalog, Severity, Template, Utterance};
pub use compose::{
    compose_check, compose_dictation_chunk, compose_dictation_start, compose_error, compose_expansion,
    compose_image_fit, compose_media_picker, compose_notice, compose_placement, compose_readback, compose_removal,
    compose_reshape, compose_text_fit, compose_text_replaced, number_word, WrongDiagnosticKind,
    READBACK_PREVIEW_CHARS,
};
pub use grammar::{parse_command, render_canonical, Command, NotACommand, ParseMode, Parsed};
