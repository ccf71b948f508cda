//! Annotated museum map: occupancy grid, area segmentation, exhibit
//! annotations and the curated tour order.
//!
//! Cells use half-open intervals: a point belongs to cell
//! `floor((p - origin) / resolution)` on each axis, so every in-bounds point
//! maps to exactly one cell. Row `r` of the grid covers
//! `[origin.y + r*res, origin.y + (r+1)*res)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Pose;

pub type ExhibitId = u32;

/// Grid coordinates of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Cell { col, row }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    resolution: f64,
    origin: (f64, f64),
    width: usize,
    height: usize,
    /// Row-major, `true` = occupied.
    occupied: Vec<bool>,
}

impl GridMap {
    pub fn new(
        resolution: f64,
        origin: (f64, f64),
        width: usize,
        height: usize,
        occupied: Vec<bool>,
    ) -> Result<Self, ValidationError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(ValidationError::NonPositiveResolution(resolution));
        }
        if !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(ValidationError::NonFinite("grid.origin"));
        }
        if width.checked_mul(height) != Some(occupied.len()) {
            return Err(ValidationError::CellCountMismatch {
                width,
                height,
                cells: occupied.len(),
            });
        }
        if occupied.iter().all(|&o| o) {
            return Err(ValidationError::NoFreeCell);
        }
        Ok(GridMap {
            resolution,
            origin,
            width,
            height,
            occupied,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new(index % self.width, index / self.width)
    }

    pub fn in_bounds(&self, col: i64, row: i64) -> bool {
        col >= 0 && row >= 0 && (col as usize) < self.width && (row as usize) < self.height
    }

    /// Occupied or out-of-bounds cells are not free.
    pub fn is_free(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height && !self.occupied[self.index(cell)]
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Result<Cell, LocateError> {
        let fx = libm::floor((x - self.origin.0) / self.resolution);
        let fy = libm::floor((y - self.origin.1) / self.resolution);
        if !fx.is_finite() || !fy.is_finite() || fx < 0.0 || fy < 0.0 {
            return Err(LocateError::OutOfBounds { x, y });
        }
        if fx >= self.width as f64 || fy >= self.height as f64 {
            return Err(LocateError::OutOfBounds { x, y });
        }
        Ok(Cell::new(fx as usize, fy as usize))
    }

    /// World coordinates of the cell's center.
    pub fn cell_center(&self, cell: Cell) -> (f64, f64) {
        (
            self.origin.0 + (cell.col as f64 + 0.5) * self.resolution,
            self.origin.1 + (cell.row as f64 + 0.5) * self.resolution,
        )
    }

    /// Whether the world point lies in a free, in-bounds cell.
    pub fn point_is_free(&self, x: f64, y: f64) -> bool {
        self.cell_of(x, y).map(|c| self.is_free(c)).unwrap_or(false)
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter(|(_, &o)| !o)
            .map(move |(i, _)| self.cell_at(i))
    }

    /// Rows as `.`/`#` strings, row 0 first.
    pub fn to_rows(&self) -> Vec<String> {
        self.occupied
            .chunks(self.width)
            .map(|row| row.iter().map(|&o| if o { '#' } else { '.' }).collect())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub id: String,
    pub name: String,
    /// Short description of the gallery, used as prompt context.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intro: Option<String>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Speaker {
    Guide,
    Visitor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueTurn {
    pub speaker: Speaker,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exhibit {
    pub id: ExhibitId,
    pub name: String,
    pub area_id: String,
    pub viewing_pose: Pose,
    pub intro: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activities: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub misc: Option<String>,
    pub sample_dialogue: Vec<DialogueTurn>,
}

/// Serialized shape of a map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub grid: GridDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_pose: Option<Pose>,
    pub areas: Vec<AreaDocument>,
    pub exhibits: Vec<Exhibit>,
    pub tour_order: Vec<ExhibitId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDocument {
    pub resolution: f64,
    pub origin: [f64; 2],
    pub width: usize,
    pub height: usize,
    pub rows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaDocument {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intro: Option<String>,
    /// `[col, row]` pairs.
    pub cells: Vec<[i64; 2]>,
}

/// First violated map invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("grid resolution must be positive, got {0}")]
    NonPositiveResolution(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("grid declares {width}x{height} but holds {cells} cells")]
    CellCountMismatch {
        width: usize,
        height: usize,
        cells: usize,
    },
    #[error("grid row {row} has {found} cells, expected {expected}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("grid row {row} col {col}: unexpected character {ch:?}")]
    BadCellChar { row: usize, col: usize, ch: char },
    #[error("grid has no free cell")]
    NoFreeCell,
    #[error("area id {0:?} is not unique")]
    DuplicateAreaId(String),
    #[error("area {0:?} has no cells")]
    EmptyArea(String),
    #[error("area {area:?} lists cell [{col}, {row}] outside the grid")]
    AreaCellOutOfBounds { area: String, col: i64, row: i64 },
    #[error("areas must be disjoint: cell [{col}, {row}] is in both {first:?} and {second:?}")]
    OverlappingAreas {
        col: usize,
        row: usize,
        first: String,
        second: String,
    },
    #[error("areas must cover every free cell: [{col}, {row}] has no area")]
    UncoveredFreeCell { col: usize, row: usize },
    #[error("exhibit id {0} is not unique")]
    DuplicateExhibitId(ExhibitId),
    #[error("exhibit id must be positive")]
    ZeroExhibitId,
    #[error("exhibit {exhibit} references unknown area {area:?}")]
    UnknownArea { exhibit: ExhibitId, area: String },
    #[error("exhibit {0} viewing pose lies outside the grid")]
    ViewingPoseOutOfBounds(ExhibitId),
    #[error("exhibit {0} viewing pose lies on an occupied cell")]
    ViewingPoseOccupied(ExhibitId),
    #[error("exhibit {exhibit} viewing pose lies in area {found:?}, not its declared area {declared:?}")]
    ViewingPoseAreaMismatch {
        exhibit: ExhibitId,
        declared: String,
        found: String,
    },
    #[error("exhibit {0} has an empty intro")]
    EmptyIntro(ExhibitId),
    #[error("exhibit {0} sample dialogue needs at least two turns")]
    SampleDialogueTooShort(ExhibitId),
    #[error("exhibit {0} sample dialogue must alternate speakers")]
    SampleDialogueNotAlternating(ExhibitId),
    #[error("tour order is empty but the map has exhibits")]
    EmptyTourOrder,
    #[error("tour order lists exhibit {0} twice")]
    TourOrderDuplicate(ExhibitId),
    #[error("tour order lists unknown exhibit {0}")]
    TourOrderUnknown(ExhibitId),
    #[error("start pose must lie on a free cell")]
    StartPoseNotFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LocateError {
    #[error("point ({x}, {y}) is outside the grid")]
    OutOfBounds { x: f64, y: f64 },
    #[error("cell [{}, {}] is occupied", .0.col, .0.row)]
    OccupiedCell(Cell),
}

/// Validated, immutable museum map.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedMap {
    grid: GridMap,
    areas: Vec<Area>,
    exhibits: Vec<Exhibit>,
    tour_order: Vec<ExhibitId>,
    start_pose: Pose,
    explicit_start: bool,
    exhibit_index: BTreeMap<ExhibitId, usize>,
    /// Area index per grid cell.
    cell_area: Vec<Option<usize>>,
}

impl AnnotatedMap {
    pub fn from_document(doc: MapDocument) -> Result<Self, ValidationError> {
        let g = &doc.grid;
        if g.rows.len() != g.height {
            return Err(ValidationError::CellCountMismatch {
                width: g.width,
                height: g.height,
                cells: g.rows.iter().map(|r| r.chars().count()).sum(),
            });
        }
        let mut occupied = Vec::with_capacity(g.width * g.height);
        for (row, text) in g.rows.iter().enumerate() {
            let n = text.chars().count();
            if n != g.width {
                return Err(ValidationError::RowWidth {
                    row,
                    expected: g.width,
                    found: n,
                });
            }
            for (col, ch) in text.chars().enumerate() {
                match ch {
                    '.' => occupied.push(false),
                    '#' => occupied.push(true),
                    _ => return Err(ValidationError::BadCellChar { row, col, ch }),
                }
            }
        }
        let grid = GridMap::new(
            g.resolution,
            (g.origin[0], g.origin[1]),
            g.width,
            g.height,
            occupied,
        )?;

        let mut areas = Vec::with_capacity(doc.areas.len());
        let mut cell_area: Vec<Option<usize>> = alloc::vec![None; g.width * g.height];
        let mut area_ids = BTreeSet::new();
        for (ai, a) in doc.areas.into_iter().enumerate() {
            if !area_ids.insert(a.id.clone()) {
                return Err(ValidationError::DuplicateAreaId(a.id));
            }
            if a.cells.is_empty() {
                return Err(ValidationError::EmptyArea(a.id));
            }
            let mut cells = Vec::with_capacity(a.cells.len());
            for [col, row] in a.cells {
                if !grid.in_bounds(col, row) {
                    return Err(ValidationError::AreaCellOutOfBounds { area: a.id, col, row });
                }
                let cell = Cell::new(col as usize, row as usize);
                let slot = &mut cell_area[grid.index(cell)];
                match *slot {
                    Some(prev) if prev == ai => {}
                    Some(prev) => {
                        let first: &Area = &areas[prev];
                        return Err(ValidationError::OverlappingAreas {
                            col: cell.col,
                            row: cell.row,
                            first: first.id.clone(),
                            second: a.id,
                        });
                    }
                    None => {
                        *slot = Some(ai);
                        cells.push(cell);
                    }
                }
            }
            areas.push(Area {
                id: a.id,
                name: a.name,
                intro: a.intro,
                cells,
            });
        }
        if let Some(c) = grid.free_cells().find(|&c| cell_area[grid.index(c)].is_none()) {
            return Err(ValidationError::UncoveredFreeCell { col: c.col, row: c.row });
        }

        let mut exhibits = doc.exhibits;
        let mut exhibit_index = BTreeMap::new();
        for (i, e) in exhibits.iter_mut().enumerate() {
            if e.id == 0 {
                return Err(ValidationError::ZeroExhibitId);
            }
            if exhibit_index.insert(e.id, i).is_some() {
                return Err(ValidationError::DuplicateExhibitId(e.id));
            }
            let p = e.viewing_pose;
            if !p.x.is_finite() || !p.y.is_finite() || !p.theta.is_finite() {
                return Err(ValidationError::NonFinite("exhibit viewing_pose"));
            }
            e.viewing_pose = Pose::new(p.x, p.y, p.theta);
            let Some(declared) = areas.iter().position(|a| a.id == e.area_id) else {
                return Err(ValidationError::UnknownArea {
                    exhibit: e.id,
                    area: e.area_id.clone(),
                });
            };
            let cell = grid
                .cell_of(p.x, p.y)
                .map_err(|_| ValidationError::ViewingPoseOutOfBounds(e.id))?;
            if !grid.is_free(cell) {
                return Err(ValidationError::ViewingPoseOccupied(e.id));
            }
            let found = cell_area[grid.index(cell)].expect("free cells are covered");
            if found != declared {
                return Err(ValidationError::ViewingPoseAreaMismatch {
                    exhibit: e.id,
                    declared: e.area_id.clone(),
                    found: areas[found].id.clone(),
                });
            }
            if e.intro.trim().is_empty() {
                return Err(ValidationError::EmptyIntro(e.id));
            }
            if e.sample_dialogue.len() < 2 {
                return Err(ValidationError::SampleDialogueTooShort(e.id));
            }
            if e.sample_dialogue.windows(2).any(|w| w[0].speaker == w[1].speaker) {
                return Err(ValidationError::SampleDialogueNotAlternating(e.id));
            }
        }

        if doc.tour_order.is_empty() && !exhibits.is_empty() {
            return Err(ValidationError::EmptyTourOrder);
        }
        let mut seen = BTreeSet::new();
        for &id in &doc.tour_order {
            if !exhibit_index.contains_key(&id) {
                return Err(ValidationError::TourOrderUnknown(id));
            }
            if !seen.insert(id) {
                return Err(ValidationError::TourOrderDuplicate(id));
            }
        }

        let explicit_start = doc.start_pose.is_some();
        let start_pose = match doc.start_pose {
            Some(p) => {
                if !p.x.is_finite() || !p.y.is_finite() || !p.theta.is_finite() {
                    return Err(ValidationError::NonFinite("start_pose"));
                }
                if !grid.point_is_free(p.x, p.y) {
                    return Err(ValidationError::StartPoseNotFree);
                }
                Pose::new(p.x, p.y, p.theta)
            }
            None => match doc.tour_order.first() {
                Some(id) => exhibits[exhibit_index[id]].viewing_pose,
                None => {
                    let c = grid.free_cells().next().expect("grid has a free cell");
                    let (x, y) = grid.cell_center(c);
                    Pose::new(x, y, 0.0)
                }
            },
        };

        Ok(AnnotatedMap {
            grid,
            areas,
            exhibits,
            tour_order: doc.tour_order,
            start_pose,
            explicit_start,
            exhibit_index,
            cell_area,
        })
    }

    pub fn to_document(&self) -> MapDocument {
        MapDocument {
            grid: GridDocument {
                resolution: self.grid.resolution,
                origin: [self.grid.origin.0, self.grid.origin.1],
                width: self.grid.width,
                height: self.grid.height,
                rows: self.grid.to_rows(),
            },
            start_pose: self.explicit_start.then_some(self.start_pose),
            areas: self
                .areas
                .iter()
                .map(|a| AreaDocument {
                    id: a.id.clone(),
                    name: a.name.clone(),
                    intro: a.intro.clone(),
                    cells: a
                        .cells
                        .iter()
                        .map(|c| [c.col as i64, c.row as i64])
                        .collect(),
                })
                .collect(),
            exhibits: self.exhibits.clone(),
            tour_order: self.tour_order.clone(),
        }
    }

    pub fn grid(&self) -> &GridMap {
        &self.grid
    }

    pub fn areas(&self) -> &[Area] {
        &self.areas
    }

    pub fn area(&self, id: &str) -> Option<&Area> {
        self.areas.iter().find(|a| a.id == id)
    }

    pub fn exhibits(&self) -> &[Exhibit] {
        &self.exhibits
    }

    pub fn exhibit(&self, id: ExhibitId) -> Option<&Exhibit> {
        self.exhibit_index.get(&id).map(|&i| &self.exhibits[i])
    }

    pub fn tour_order(&self) -> &[ExhibitId] {
        &self.tour_order
    }

    pub fn start_pose(&self) -> Pose {
        self.start_pose
    }

    pub fn cell_of(&self, x: f64, y: f64) -> Result<Cell, LocateError> {
        self.grid.cell_of(x, y)
    }

    pub fn area_of_cell(&self, cell: Cell) -> Option<&Area> {
        if cell.col >= self.grid.width || cell.row >= self.grid.height {
            return None;
        }
        self.cell_area[self.grid.index(cell)].map(|i| &self.areas[i])
    }

    /// The area containing the pose's cell.
    pub fn area_of(&self, pose: &Pose) -> Result<&Area, LocateError> {
        let cell = self.grid.cell_of(pose.x, pose.y)?;
        if !self.grid.is_free(cell) {
            return Err(LocateError::OccupiedCell(cell));
        }
        Ok(self
            .area_of_cell(cell)
            .expect("validated maps assign every free cell to an area"))
    }

    /// Exhibits in the same area as `pose`, nearest first, ties by id.
    pub fn nearby_exhibits(&self, pose: &Pose) -> Result<Vec<&Exhibit>, LocateError> {
        let area = self.area_of(pose)?;
        let mut found: Vec<(f64, &Exhibit)> = self
            .exhibits
            .iter()
            .filter(|e| e.area_id == area.id)
            .map(|e| (pose.distance(&e.viewing_pose), e))
            .collect();
        found.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.id.cmp(&b.1.id))
        });
        Ok(found.into_iter().map(|(_, e)| e).collect())
    }

    /// Grid cell of the exhibit's viewing pose.
    pub fn exhibit_cell(&self, id: ExhibitId) -> Option<Cell> {
        let e = self.exhibit(id)?;
        self.grid.cell_of(e.viewing_pose.x, e.viewing_pose.y).ok()
    }
}
