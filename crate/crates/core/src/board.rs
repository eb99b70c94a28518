//! Board geometry: per-symbol goal coordinates, the rectangular clipping
//! region, nearest-goal quantization, and Voronoi mass integration.

use std::fmt::Write as _;

use crate::alphabet::{Alphabet, Symbol};
use crate::oracle::Grid;
use crate::{Error, Result};

/// Planchette position in board units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Position {
        Position { x, y }
    }

    pub fn distance(self, other: Position) -> f64 {
        self.distance_squared(other).sqrt()
    }

    pub fn distance_squared(self, other: Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Axis-aligned board rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Bounds> {
        if !(x_min < x_max && y_min < y_max)
            || !(x_min.is_finite() && x_max.is_finite() && y_min.is_finite() && y_max.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "degenerate bounds [{x_min},{x_max}]x[{y_min},{y_max}]"
            )));
        }
        Ok(Bounds { x_min, x_max, y_min, y_max })
    }

    pub fn contains(&self, p: Position) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
}

/// Symbol goals and clipping region for one board.
#[derive(Clone, Debug, PartialEq)]
pub struct BoardLayout {
    alphabet: Alphabet,
    goals: Vec<Position>,
    bounds: Bounds,
}

impl BoardLayout {
    /// Builds a board from parallel symbol/goal lists, checking that goals
    /// are pairwise distinct and inside the bounds.
    pub fn new(alphabet: Alphabet, goals: Vec<Position>, bounds: Bounds) -> Result<BoardLayout> {
        if goals.len() != alphabet.len() {
            return Err(Error::ShapeMismatch { left: goals.len(), right: alphabet.len() });
        }
        for (i, g) in goals.iter().enumerate() {
            if !bounds.contains(*g) {
                return Err(Error::InvalidConfig(format!(
                    "goal for {:?} lies outside bounds",
                    alphabet.label(Symbol(i as u8))
                )));
            }
            for other in &goals[..i] {
                if g == other {
                    return Err(Error::InvalidConfig("goals are not pairwise distinct".into()));
                }
            }
        }
        Ok(BoardLayout { alphabet, goals, bounds })
    }

    /// The default 28-symbol board: a 7x4 integer grid inside
    /// `[-1,7] x [-1,4]`, BOS pinned at `(3,0)`, letters `a`..`z` then EOS
    /// filling the remaining cells row by row (y ascending, then x
    /// ascending).
    pub fn default_latin() -> BoardLayout {
        let alphabet = Alphabet::latin();
        let bos_cell = Position::new(3.0, 0.0);
        let mut cells = Vec::with_capacity(28);
        for y in 0..4 {
            for x in 0..7 {
                let p = Position::new(x as f64, y as f64);
                if p != bos_cell {
                    cells.push(p);
                }
            }
        }
        let mut goals = vec![bos_cell];
        goals.extend(cells);
        // Alphabet order is BOS, a..z, EOS, so goals line up with symbols.
        let bounds = Bounds::new(-1.0, 7.0, -1.0, 4.0).unwrap();
        BoardLayout::new(alphabet, goals, bounds).expect("default board is well-formed")
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn goal(&self, s: Symbol) -> Position {
        self.goals[s.index()]
    }

    pub fn goals(&self) -> &[Position] {
        &self.goals
    }

    /// Componentwise clamp into the bounds; identity for interior points.
    pub fn clip(&self, p: Position) -> Position {
        Position {
            x: p.x.clamp(self.bounds.x_min, self.bounds.x_max),
            y: p.y.clamp(self.bounds.y_min, self.bounds.y_max),
        }
    }

    /// Symbol whose goal is nearest to `p`; ties go to the lowest symbol
    /// index.
    pub fn nearest_goal(&self, p: Position) -> Symbol {
        let mut best = Symbol(0);
        let mut best_d = f64::INFINITY;
        for (i, g) in self.goals.iter().enumerate() {
            let d = p.distance_squared(*g);
            if d < best_d {
                best_d = d;
                best = Symbol(i as u8);
            }
        }
        best
    }

    /// Integrates a normalized grid density over each symbol's nearest-goal
    /// region. The grid must cover the board bounds and sum to one within
    /// 1e-6; the returned masses then sum to one up to the same tolerance.
    pub fn voronoi_cell_mass(&self, density: &Grid) -> Result<Vec<f64>> {
        density.check_covers(self.bounds)?;
        let total: f64 = density.values().iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { sum: total });
        }
        let mut masses = vec![0.0; self.alphabet.len()];
        for (cell, value) in density.cells() {
            masses[self.nearest_goal(cell).index()] += value;
        }
        Ok(masses)
    }

    /// Serializes to the tab-separated board file format.
    pub fn to_board_file(&self) -> String {
        let b = self.bounds;
        let mut out = String::new();
        writeln!(out, "bounds\t{}\t{}\t{}\t{}", b.x_min, b.x_max, b.y_min, b.y_max).unwrap();
        for s in self.alphabet.symbols() {
            let g = self.goal(s);
            writeln!(out, "{}\t{}\t{}", self.alphabet.label(s), g.x, g.y).unwrap();
        }
        out
    }

    /// Parses the board file format: a `bounds` header line followed by one
    /// `symbol<TAB>x<TAB>y` line per symbol.
    pub fn from_board_file(text: &str) -> Result<BoardLayout> {
        let mut labels = Vec::new();
        let mut goals = Vec::new();
        let mut bounds = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let parse = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("expected a number, got {s:?}"),
                })
            };
            if fields[0] == "bounds" {
                if fields.len() != 5 {
                    return Err(Error::Parse { line: idx + 1, msg: "bounds needs 4 fields".into() });
                }
                bounds = Some(Bounds::new(
                    parse(fields[1])?,
                    parse(fields[2])?,
                    parse(fields[3])?,
                    parse(fields[4])?,
                )?);
            } else {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "symbol lines need 3 fields".into(),
                    });
                }
                labels.push(fields[0].to_string());
                goals.push(Position::new(parse(fields[1])?, parse(fields[2])?));
            }
        }
        let bounds = bounds.ok_or(Error::Parse { line: 0, msg: "missing bounds header".into() })?;
        let alphabet = Alphabet::from_labels(&labels)?;
        BoardLayout::new(alphabet, goals, bounds)
    }
}
