//! Seeded random session scripts for soak and determinism testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::content::MediaKind;
use crate::grid::{BracketType, GridConfig, UnitId};
use crate::protocol::{Inbound, SessionScript};

const PHRASES: [&str; 8] = [
    "Welcome to my page",
    "Photos from the trip",
    "next line",
    "stop",
    "Contact me any time",
    "A short note",
    "hey grid",
    "Lorem ipsum dolor sit amet consectetur adipiscing elit",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationParams {
    pub steps: usize,
    pub units: usize,
    pub wake_word: String,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self { steps: 60, units: 6, wake_word: crate::protocol::DEFAULT_WAKE_WORD.to_string() }
    }
}

fn footprint(rng: &mut ChaCha8Rng, config: &GridConfig) -> (u16, u16, u16, u16) {
    // mostly valid, occasionally out of range or undersized
    let row_span = rng.gen_range(1..=6.min(config.rows));
    let col_span = rng.gen_range(1..=6.min(config.cols));
    let row = rng.gen_range(1..=config.rows + 1);
    let col = rng.gen_range(1..=config.cols + 1);
    (row, col, row_span, col_span)
}

fn command(rng: &mut ChaCha8Rng, wake: &str) -> String {
    match rng.gen_range(0..10) {
        0 => format!("{wake} title"),
        1 => format!("{wake} text"),
        2 => format!("{wake} media"),
        3 => format!("{wake} check"),
        4 => "next line".to_string(),
        5 => "stop".to_string(),
        6 => format!("{wake} dance"),
        _ => PHRASES.choose(rng).expect("non-empty").to_string(),
    }
}

/// Builds a script of random inbound messages. The same seed always
/// yields the same script.
pub fn random_script(seed: u64, params: &SimulationParams, config: &GridConfig) -> SessionScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let units: Vec<UnitId> = (0..params.units.max(1)).map(|i| UnitId::new(format!("u{i}"))).collect();
    let mut messages = Vec::with_capacity(params.steps);
    for _ in 0..params.steps {
        let unit = units.choose(&mut rng).expect("non-empty").clone();
        let msg = match rng.gen_range(0..12) {
            0..=2 => {
                let (row, col, row_span, col_span) = footprint(&mut rng, config);
                let bracket_type = *BracketType::ALL.choose(&mut rng).expect("non-empty");
                Inbound::Place { unit, bracket_type, row, col, row_span, col_span }
            }
            3 => Inbound::Remove { unit },
            4 => {
                let (row, col, row_span, col_span) = footprint(&mut rng, config);
                Inbound::Reshape { unit, row, col, row_span, col_span }
            }
            5 | 6 => Inbound::Touch { unit, duration_ms: if rng.gen_bool(0.2) { 3500 } else { 120 } },
            7..=9 => Inbound::Command { text: command(&mut rng, &params.wake_word) },
            10 => {
                let kind = if rng.gen_bool(0.5) { MediaKind::Image } else { MediaKind::Video };
                Inbound::MediaSelected {
                    unit,
                    kind,
                    uri: format!("media/{}.bin", rng.gen_range(0..100)),
                    width: rng.gen_range(0..2000),
                    height: rng.gen_range(0..2000),
                    alt: rng.gen_bool(0.5).then(|| "An item".to_string()),
                }
            }
            _ => {
                let n = rng.gen_range(0..4);
                let lines = (0..n).map(|_| PHRASES.choose(&mut rng).expect("non-empty").to_string()).collect();
                Inbound::ReplaceText { unit, lines }
            }
        };
        messages.push(msg);
    }
    SessionScript::from_messages(messages)
}
