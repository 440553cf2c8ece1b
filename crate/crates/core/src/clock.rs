//! Solve-time accounting.
//!
//! The wall clock measures real elapsed time. The work clock charges a fixed
//! cost per simplex iteration, which makes timings, time limits and every
//! artifact derived from them reproducible across runs and machines.

use std::time::Instant;

/// Seconds charged per simplex iteration by the work clock.
pub const WORK_SECONDS_PER_ITERATION: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    Wall,
    #[default]
    Work,
}

impl std::str::FromStr for ClockKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "wall" => Ok(ClockKind::Wall),
            "work" => Ok(ClockKind::Work),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown clock `{other}` (expected wall or work)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveClock {
    kind: ClockKind,
    start: Instant,
    iterations: u64,
}

impl SolveClock {
    pub fn start(kind: ClockKind) -> Self {
        SolveClock {
            kind,
            start: Instant::now(),
            iterations: 0,
        }
    }

    pub fn charge(&mut self, simplex_iterations: usize) {
        self.iterations += simplex_iterations as u64;
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn elapsed(&self) -> f64 {
        match self.kind {
            ClockKind::Wall => self.start.elapsed().as_secs_f64(),
            ClockKind::Work => self.iterations as f64 * WORK_SECONDS_PER_ITERATION,
        }
    }
}
