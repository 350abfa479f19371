//! Batch replay over many scripts. Uses rayon when the `parallel` feature
//! is on and a plain iterator otherwise; results are in input order either
//! way.

use crate::grid::GridConfig;
use crate::protocol::{replay, SessionScript};
use crate::render::{parse_layout, render_page, LayoutEntry};
use crate::session::SessionState;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Condensed result of one replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchResult {
    pub revision: u64,
    pub utterances: usize,
    pub failures: usize,
    pub invariant_error: Option<String>,
    pub html: String,
}

fn run_one(script: &SessionScript, config: &GridConfig, wake: &str) -> BatchResult {
    let outcome = replay(script, config.clone(), wake);
    let state = &outcome.engine.state;
    BatchResult {
        revision: state.revision,
        utterances: state.utterances().count(),
        failures: outcome.failures.len(),
        invariant_error: state.check_invariants().err(),
        html: render_page(state).html,
    }
}

pub fn replay_all_sequential(scripts: &[SessionScript], config: &GridConfig, wake: &str) -> Vec<BatchResult> {
    scripts.iter().map(|s| run_one(s, config, wake)).collect()
}

#[cfg(feature = "parallel")]
pub fn replay_all(scripts: &[SessionScript], config: &GridConfig, wake: &str) -> Vec<BatchResult> {
    scripts.par_iter().map(|s| run_one(s, config, wake)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn replay_all(scripts: &[SessionScript], config: &GridConfig, wake: &str) -> Vec<BatchResult> {
    replay_all_sequential(scripts, config, wake)
}

/// Renders each state and parses the layout back.
pub fn render_sweep(states: &[SessionState]) -> Vec<Result<Vec<LayoutEntry>, String>> {
    let one = |s: &SessionState| parse_layout(&render_page(s).html).map_err(|e| e.to_string());
    #[cfg(feature = "parallel")]
    {
        states.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        states.iter().map(one).collect()
    }
}
