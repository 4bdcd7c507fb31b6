//! Textual robot design scripts and the occupied-cell designs they describe.
//!
//! A script has a header declaring the block count followed by an ordered
//! assembly sequence:
//!
//! ```text
//! robot with 3 blocks:
//! block b0 at origin.
//! attach block b1 to the right of block b0.
//! attach block b2 to the top of block b1.
//! ```
//!
//! Cells are integer lattice coordinates `(col, row)` with `row` pointing up.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Lattice coordinate of one module, `(col, row)`.
pub type Cell = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Right,
    Top,
    Left,
    Bottom,
}

impl Direction {
    /// Neighbor order used by the canonical serializer.
    pub const ALL: [Direction; 4] = [
        Direction::Right,
        Direction::Top,
        Direction::Left,
        Direction::Bottom,
    ];

    pub fn offset(self) -> (i32, i32) {
        match self {
            Direction::Right => (1, 0),
            Direction::Top => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Bottom => (0, -1),
        }
    }

    pub fn apply(self, cell: Cell) -> Cell {
        let (dc, dr) = self.offset();
        (cell.0 + dc, cell.1 + dr)
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Right => "right",
            Direction::Top => "top",
            Direction::Left => "left",
            Direction::Bottom => "bottom",
        }
    }

    fn from_word(word: &str) -> Option<Self> {
        match word {
            "right" => Some(Direction::Right),
            "top" => Some(Direction::Top),
            "left" => Some(Direction::Left),
            "bottom" => Some(Direction::Bottom),
            _ => None,
        }
    }
}

/// A robot as a set of occupied cells, each labelled with a module id.
///
/// Equality compares the occupied cells only; ids are labels.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GridDesign {
    ids: BTreeMap<BlockId, Cell>,
}

impl PartialEq for GridDesign {
    fn eq(&self, other: &Self) -> bool {
        self.ids.len() == other.ids.len() && self.cells() == other.cells()
    }
}

impl Eq for GridDesign {}

impl GridDesign {
    /// Builds a design from cells, numbering ids in sorted cell order.
    /// Repeated cells become overlapping modules.
    pub fn from_cells<I: IntoIterator<Item = Cell>>(cells: I) -> Self {
        let mut list: Vec<Cell> = cells.into_iter().collect();
        list.sort_unstable();
        let ids = list
            .into_iter()
            .enumerate()
            .map(|(i, c)| (BlockId(i as u32), c))
            .collect();
        GridDesign { ids }
    }

    pub fn from_blocks<I: IntoIterator<Item = (BlockId, Cell)>>(blocks: I) -> Self {
        GridDesign {
            ids: blocks.into_iter().collect(),
        }
    }

    pub fn blocks(&self) -> &BTreeMap<BlockId, Cell> {
        &self.ids
    }

    pub fn cells(&self) -> BTreeSet<Cell> {
        self.ids.values().copied().collect()
    }

    /// Number of modules, counting overlapping ones separately.
    pub fn block_count(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Inclusive bounding box `(min, max)`, or `None` when empty.
    pub fn bounds(&self) -> Option<(Cell, Cell)> {
        let mut it = self.ids.values();
        let first = *it.next()?;
        Some(it.fold((first, first), |(lo, hi), &(c, r)| {
            ((lo.0.min(c), lo.1.min(r)), (hi.0.max(c), hi.1.max(r)))
        }))
    }

    pub fn translated(&self, dc: i32, dr: i32) -> GridDesign {
        GridDesign {
            ids: self
                .ids
                .iter()
                .map(|(&id, &(c, r))| (id, (c + dc, r + dr)))
                .collect(),
        }
    }

    /// Translates the design so that the minimum column and row are zero.
    pub fn normalized(&self) -> GridDesign {
        match self.bounds() {
            Some((lo, _)) => self.translated(-lo.0, -lo.1),
            None => self.clone(),
        }
    }
}

/// One assembly statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statement {
    Place(BlockId),
    Attach {
        block: BlockId,
        anchor: BlockId,
        direction: Direction,
    },
}

/// Parsed design script: declared block count plus ordered statements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignScript {
    pub block_count: usize,
    pub statements: Vec<Statement>,
}

impl fmt::Display for DesignScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "robot with {} blocks:", self.block_count)?;
        for st in &self.statements {
            match st {
                Statement::Place(id) => write!(f, "\nblock {id} at origin.")?,
                Statement::Attach {
                    block,
                    anchor,
                    direction,
                } => write!(
                    f,
                    "\nattach block {block} to the {} of block {anchor}.",
                    direction.name()
                )?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: unrecognized statement {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: block {anchor} is referenced before it is placed")]
    Reference { line: usize, anchor: BlockId },
    #[error("line {line}: block {block} would occupy cell {cell:?}, which is already taken")]
    Overlap {
        line: usize,
        block: BlockId,
        cell: Cell,
    },
    #[error("line {line}: block {block} is defined twice")]
    DuplicateId { line: usize, block: BlockId },
    #[error("header declares {declared} blocks but {placed} were placed")]
    CountMismatch { declared: usize, placed: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("design has no blocks")]
    EmptyDesign,
    #[error("design is illegal: {0}")]
    Illegal(Verdict),
    #[error("cannot place {min}..={max} blocks inside a {width}x{height} grid")]
    InfeasibleRange {
        width: u32,
        height: u32,
        min: usize,
        max: usize,
    },
}

/// Reads a design script. Case, repeated whitespace, blank lines and
/// trailing punctuation are ignored.
pub fn parse(text: &str) -> Result<DesignScript, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, normalize_line(l)))
        .filter(|(_, toks)| !toks.is_empty());

    let (header_line, header) = lines.next().ok_or(ParseError::Syntax {
        line: 1,
        text: String::new(),
    })?;
    let block_count = parse_header(&header).ok_or_else(|| ParseError::Syntax {
        line: header_line,
        text: header.join(" "),
    })?;

    let mut statements = Vec::new();
    for (line, toks) in lines {
        let words: Vec<&str> = toks.iter().map(String::as_str).collect();
        let st = match words.as_slice() {
            ["block", id, "at", "origin"] if statements.is_empty() => {
                parse_id(id).map(Statement::Place)
            }
            ["attach", "block", id, "to", "the", dir, "of", "block", anchor] => {
                match (parse_id(id), Direction::from_word(dir), parse_id(anchor)) {
                    (Some(block), Some(direction), Some(anchor)) => Some(Statement::Attach {
                        block,
                        anchor,
                        direction,
                    }),
                    _ => None,
                }
            }
            _ => None,
        };
        match st {
            Some(st) => statements.push((line, st)),
            None => {
                return Err(ParseError::Syntax {
                    line,
                    text: words.join(" "),
                })
            }
        }
    }

    if let Some((line, Statement::Attach { .. })) = statements.first() {
        return Err(ParseError::Syntax {
            line: *line,
            text: "first statement must place the root block".into(),
        });
    }

    let script = DesignScript {
        block_count,
        statements: statements.iter().map(|(_, s)| *s).collect(),
    };
    let lines: Vec<usize> = statements.iter().map(|(l, _)| *l).collect();
    run(&script, |i| lines[i])?;
    Ok(script)
}

fn normalize_line(line: &str) -> Vec<String> {
    let trimmed = line
        .trim()
        .trim_end_matches(|c: char| c.is_ascii_punctuation() || c.is_whitespace());
    trimmed
        .split_whitespace()
        .map(|w| w.to_ascii_lowercase())
        .collect()
}

fn parse_header(toks: &[String]) -> Option<usize> {
    match toks {
        [robot, with, n, blocks]
            if robot == "robot" && with == "with" && (blocks == "blocks" || blocks == "block") =>
        {
            n.parse().ok()
        }
        _ => None,
    }
}

fn parse_id(word: &str) -> Option<BlockId> {
    let digits = word.strip_prefix('b')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().map(BlockId)
}

/// Executes statements against an occupancy map. `line_of` maps a
/// statement index to the source line used in error reports.
fn run(script: &DesignScript, line_of: impl Fn(usize) -> usize) -> Result<GridDesign, ParseError> {
    let mut placed: BTreeMap<BlockId, Cell> = BTreeMap::new();
    let mut occupied: HashSet<Cell> = HashSet::new();
    for (i, st) in script.statements.iter().enumerate() {
        let line = line_of(i);
        let (block, cell) = match *st {
            Statement::Place(id) if i == 0 => (id, (0, 0)),
            Statement::Place(_) => {
                return Err(ParseError::Syntax {
                    line,
                    text: "only the first statement may place a block at the origin".into(),
                })
            }
            Statement::Attach {
                block,
                anchor,
                direction,
            } => {
                if i == 0 {
                    return Err(ParseError::Syntax {
                        line,
                        text: "first statement must place the root block".into(),
                    });
                }
                let base = placed
                    .get(&anchor)
                    .ok_or(ParseError::Reference { line, anchor })?;
                (block, direction.apply(*base))
            }
        };
        if placed.contains_key(&block) {
            return Err(ParseError::DuplicateId { line, block });
        }
        if !occupied.insert(cell) {
            return Err(ParseError::Overlap { line, block, cell });
        }
        placed.insert(block, cell);
    }
    if placed.len() != script.block_count {
        return Err(ParseError::CountMismatch {
            declared: script.block_count,
            placed: placed.len(),
        });
    }
    Ok(GridDesign { ids: placed }.normalized())
}

/// Builds the design described by a script, re-checking every statement.
/// The result is translated so that its minimum column and row are zero.
pub fn execute(script: &DesignScript) -> Result<GridDesign, ParseError> {
    // Statement index stands in for the line number of a script built in memory.
    run(script, |i| i + 2)
}

/// Parses and executes in one go.
pub fn parse_design(text: &str) -> Result<GridDesign, ParseError> {
    parse(text).and_then(|s| execute(&s))
}

fn bfs_script(
    cells: &BTreeSet<Cell>,
    root: Cell,
    mut order: impl FnMut(&mut [Direction; 4]),
) -> DesignScript {
    let mut ids: BTreeMap<Cell, BlockId> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut statements = vec![Statement::Place(BlockId(0))];
    ids.insert(root, BlockId(0));
    queue.push_back(root);
    while let Some(cell) = queue.pop_front() {
        let anchor = ids[&cell];
        let mut dirs = Direction::ALL;
        order(&mut dirs);
        for dir in dirs {
            let next = dir.apply(cell);
            if cells.contains(&next) && !ids.contains_key(&next) {
                let block = BlockId(ids.len() as u32);
                ids.insert(next, block);
                statements.push(Statement::Attach {
                    block,
                    anchor,
                    direction: dir,
                });
                queue.push_back(next);
            }
        }
    }
    DesignScript {
        block_count: statements.len(),
        statements,
    }
}

fn require_legal(design: &GridDesign) -> Result<BTreeSet<Cell>, DesignError> {
    if design.is_empty() {
        return Err(DesignError::EmptyDesign);
    }
    let verdict = validate(design, None);
    if !verdict.legal {
        return Err(DesignError::Illegal(verdict));
    }
    Ok(design.cells())
}

/// Canonical assembly script: breadth-first from the smallest cell with
/// neighbors visited right, top, left, bottom.
pub fn canonical_script(design: &GridDesign) -> Result<DesignScript, DesignError> {
    let cells = require_legal(design)?;
    let root = *cells.iter().next().expect("non-empty");
    Ok(bfs_script(&cells, root, |_| {}))
}

pub fn serialize(design: &GridDesign) -> Result<String, DesignError> {
    canonical_script(design).map(|s| s.to_string())
}

/// Translation-invariant identity of a design's occupied cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.len() % 2 != 0 {
            return None;
        }
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(s.get(i..i + 2)?, 16).ok())
            .collect::<Option<Vec<u8>>>()
            .map(CanonicalKey)
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for CanonicalKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CanonicalKey::from_hex(&s).ok_or_else(|| serde::de::Error::custom("invalid canonical key"))
    }
}

/// Sorted, origin-normalized cell list packed as big-endian `u32` pairs.
/// Rotations and reflections give different keys.
pub fn canonical_key(design: &GridDesign) -> Result<CanonicalKey, DesignError> {
    let (lo, _) = design.bounds().ok_or(DesignError::EmptyDesign)?;
    let mut bytes = Vec::with_capacity(design.block_count() * 8);
    for (c, r) in design.cells() {
        bytes.extend_from_slice(&((c - lo.0) as u32).to_be_bytes());
        bytes.extend_from_slice(&((r - lo.1) as u32).to_be_bytes());
    }
    Ok(CanonicalKey(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    Empty,
    Overlap,
    Disconnected,
    ExceedsBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub legal: bool,
    pub reasons: Vec<Reason>,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.legal {
            return f.write_str("legal");
        }
        let names: Vec<String> = self
            .reasons
            .iter()
            .map(|r| serde_json::to_string(r).unwrap_or_default().trim_matches('"').to_owned())
            .collect();
        f.write_str(&names.join(", "))
    }
}

fn is_connected(cells: &BTreeSet<Cell>) -> bool {
    let Some(&start) = cells.iter().next() else {
        return true;
    };
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(cell) = stack.pop() {
        for dir in Direction::ALL {
            let next = dir.apply(cell);
            if cells.contains(&next) && seen.insert(next) {
                stack.push(next);
            }
        }
    }
    seen.len() == cells.len()
}

/// Legality check: non-empty, no overlapping modules, 4-connected, and
/// within `max_grid = (width, height)` after normalization when given.
pub fn validate(design: &GridDesign, max_grid: Option<(u32, u32)>) -> Verdict {
    let mut reasons = Vec::new();
    if design.is_empty() {
        reasons.push(Reason::Empty);
    } else {
        let cells = design.cells();
        if cells.len() != design.block_count() {
            reasons.push(Reason::Overlap);
        }
        if !is_connected(&cells) {
            reasons.push(Reason::Disconnected);
        }
        if let (Some((w, h)), Some((lo, hi))) = (max_grid, design.bounds()) {
            if (hi.0 - lo.0 + 1) as u32 > w || (hi.1 - lo.1 + 1) as u32 > h {
                reasons.push(Reason::ExceedsBound);
            }
        }
    }
    Verdict {
        legal: reasons.is_empty(),
        reasons,
    }
}

/// `k` assembly scripts for the same robot, each a breadth-first traversal
/// from a random root with random neighbor order at every expansion.
pub fn bfs_augment(design: &GridDesign, k: usize, seed: u64) -> Result<Vec<DesignScript>, DesignError> {
    let cells = require_legal(design)?;
    let roots: Vec<Cell> = cells.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..k)
        .map(|_| {
            let root = roots[rng.gen_range(0..roots.len())];
            bfs_script(&cells, root, |dirs| dirs.shuffle(&mut rng))
        })
        .collect())
}

/// Grows a connected design inside a `width x height` grid by adding
/// uniformly chosen frontier cells, with the block count drawn uniformly
/// from `blocks`.
pub fn sample_design(
    grid: (u32, u32),
    blocks: std::ops::RangeInclusive<usize>,
    seed: u64,
) -> Result<GridDesign, DesignError> {
    let (width, height) = grid;
    let (min, max) = (*blocks.start(), *blocks.end());
    let capacity = width as usize * height as usize;
    if width == 0 || height == 0 || min == 0 || min > max || max > capacity {
        return Err(DesignError::InfeasibleRange {
            width,
            height,
            min,
            max,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(min..=max);
    let inside = |(c, r): Cell| c >= 0 && r >= 0 && (c as u32) < width && (r as u32) < height;

    let start = (
        rng.gen_range(0..width) as i32,
        rng.gen_range(0..height) as i32,
    );
    let mut cells = BTreeSet::from([start]);
    let mut frontier: BTreeSet<Cell> = BTreeSet::new();
    let extend = |cell: Cell, cells: &BTreeSet<Cell>, frontier: &mut BTreeSet<Cell>| {
        for dir in Direction::ALL {
            let next = dir.apply(cell);
            if inside(next) && !cells.contains(&next) {
                frontier.insert(next);
            }
        }
    };
    extend(start, &cells, &mut frontier);
    while cells.len() < n {
        let pick = *frontier
            .iter()
            .nth(rng.gen_range(0..frontier.len()))
            .expect("frontier non-empty while grid has room");
        frontier.remove(&pick);
        cells.insert(pick);
        extend(pick, &cells, &mut frontier);
    }
    Ok(GridDesign::from_cells(cells).normalized())
}

/// One line of a design batch file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignRecord {
    pub id: String,
    pub text: String,
}
