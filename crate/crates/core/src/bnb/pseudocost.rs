use serde::{Deserialize, Serialize};

use crate::config::fractional_part;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Down,
    Up,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Down => Direction::Up,
            Direction::Up => Direction::Down,
        }
    }

    fn slot(self) -> usize {
        match self {
            Direction::Down => 0,
            Direction::Up => 1,
        }
    }
}

/// Per-variable, per-direction average objective gain per unit of change.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudocostTable {
    sum: Vec<[f64; 2]>,
    count: Vec<[u32; 2]>,
}

impl PseudocostTable {
    pub const DEFAULT: f64 = 1.0;

    pub fn new(num_vars: usize) -> Self {
        PseudocostTable {
            sum: vec![[0.0; 2]; num_vars],
            count: vec![[0; 2]; num_vars],
        }
    }

    /// Pseudocost of `var` in `dir`, or 1.0 before the first observation.
    pub fn get(&self, var: usize, dir: Direction) -> f64 {
        let c = self.count[var][dir.slot()];
        if c == 0 {
            Self::DEFAULT
        } else {
            self.sum[var][dir.slot()] / c as f64
        }
    }

    pub fn observations(&self, var: usize, dir: Direction) -> u32 {
        self.count[var][dir.slot()]
    }

    pub fn update(&mut self, var: usize, dir: Direction, objective_gain: f64, frac: f64) {
        update_pseudocosts(self, var, dir, objective_gain, frac);
    }
}

/// Records one branching observation: unit gain `gain / f` when going down,
/// `gain / (1 - f)` when going up, where `f` is the fractional part.
pub fn update_pseudocosts(
    table: &mut PseudocostTable,
    var: usize,
    dir: Direction,
    objective_gain: f64,
    frac: f64,
) {
    debug_assert!(frac > 0.0 && frac < 1.0, "fraction {frac} outside (0, 1)");
    let gain = objective_gain.max(0.0);
    let unit = match dir {
        Direction::Down => gain / frac,
        Direction::Up => gain / (1.0 - frac),
    };
    if unit.is_finite() {
        table.sum[var][dir.slot()] += unit;
        table.count[var][dir.slot()] += 1;
    }
}

/// Best-estimate score: the bound plus, for every fractional integer
/// variable, the cheaper pseudocost-projected cost of rounding it.
pub fn node_estimate(
    lower_bound: f64,
    x: &[f64],
    is_integer: &[bool],
    table: &PseudocostTable,
    int_tol: f64,
) -> f64 {
    let mut est = lower_bound;
    for (j, (&v, &int)) in x.iter().zip(is_integer).enumerate() {
        if !int {
            continue;
        }
        let f = fractional_part(v, int_tol);
        if f > 0.0 {
            est += (table.get(j, Direction::Down) * f).min(table.get(j, Direction::Up) * (1.0 - f));
        }
    }
    est
}
