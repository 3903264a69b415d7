//! Spherical variable-resolution layout of the N-cube around a focus point.
//!
//! The focus sits at the north pole and latitude encodes Hamming distance
//! from it. Ring `d` holds the points reached by flipping `d` cyclically
//! consecutive bits, so neighbors on adjacent rings differ in one bit. Other
//! points are dropped into the diamond cell whose corners are closest.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::landscape::{Landscape, LandscapeError, Point};

pub const MAX_GRID_DIMENSIONS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("spherical grids need 2 <= n <= {MAX_GRID_DIMENSIONS}, got {0}")]
    Dimensions(usize),
    #[error("point has {got} dimensions, grid has {expected}")]
    Length { expected: usize, got: usize },
}

impl From<GridError> for LandscapeError {
    fn from(e: GridError) -> Self {
        match e {
            GridError::Dimensions(n) => LandscapeError::Dimensions(n),
            GridError::Length { expected, got } => LandscapeError::Length { expected, got },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    n: usize,
    focus: Point,
    rings: Vec<Vec<Point>>,
}

/// Mask flipping `d` consecutive dimensions starting at `start`, wrapping.
fn run_mask(focus: Point, start: usize, d: usize) -> u32 {
    let n = focus.len();
    (0..d).fold(0, |m, o| m | focus.dim_mask((start + o) % n))
}

impl SphericalGrid {
    pub fn build(n: usize, focus: Point) -> Result<Self, GridError> {
        if !(2..=MAX_GRID_DIMENSIONS).contains(&n) {
            return Err(GridError::Dimensions(n));
        }
        if focus.len() != n {
            return Err(GridError::Length { expected: n, got: focus.len() });
        }
        let mut rings = Vec::with_capacity(n + 1);
        rings.push(alloc::vec![focus]);
        for d in 1..n {
            rings.push((0..n).map(|j| focus.xor(run_mask(focus, j, d))).collect());
        }
        rings.push(alloc::vec![focus.complement()]);
        Ok(SphericalGrid { n, focus, rings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn focus(&self) -> Point {
        self.focus
    }

    pub fn rings(&self) -> &[Vec<Point>] {
        &self.rings
    }

    pub fn ring(&self, d: usize) -> &[Point] {
        &self.rings[d]
    }

    /// Grid point `j` (taken cyclically) of ring `d`; poles ignore `j`.
    pub fn grid_point(&self, d: usize, j: usize) -> Point {
        let ring = &self.rings[d];
        ring[j % ring.len()]
    }

    pub fn len(&self) -> usize {
        self.rings.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn latitude(&self, d: usize) -> f64 {
        PI * d as f64 / self.n as f64
    }

    /// Longitude of grid slot `j` on ring `d`, in radians.
    pub fn longitude(&self, d: usize, j: f64) -> f64 {
        (j + d as f64 / 2.0) * 2.0 * PI / self.n as f64
    }

    /// Corners of diamond cell `j` at latitude `d`: the ring above, the two
    /// ring-`d` sides, then the ring below.
    pub fn cell_corners(&self, d: usize, j: usize) -> [Point; 4] {
        [self.grid_point(d - 1, j + 1), self.grid_point(d, j), self.grid_point(d, j + 1), self.grid_point(d + 1, j)]
    }

    pub fn place(&self, point: Point) -> Result<SphericalPlacement, GridError> {
        if point.len() != self.n {
            return Err(GridError::Length { expected: self.n, got: point.len() });
        }
        let d = point.hamming(&self.focus) as usize;
        let exact = |slot: usize| SphericalPlacement {
            point,
            distance: d,
            location: CellLocation::Grid { slot },
            latitude: self.latitude(d),
            longitude: if d == 0 || d == self.n { 0.0 } else { self.longitude(d, slot as f64) },
        };
        if d == 0 || d == self.n {
            return Ok(exact(0));
        }
        if let Some(slot) = self.rings[d].iter().position(|&p| p == point) {
            return Ok(exact(slot));
        }
        let mut best = (u32::MAX, 0usize);
        for j in 0..self.n {
            let cost: u32 = self.cell_corners(d, j).iter().map(|c| c.hamming(&point)).sum();
            if cost < best.0 {
                best = (cost, j);
            }
        }
        let (cost, cell) = best;
        let offset = 0.8 * (unit_hash(point.bits()) - 0.5);
        Ok(SphericalPlacement {
            point,
            distance: d,
            location: CellLocation::Cell { cell, corner_distance: cost, offset },
            latitude: self.latitude(d),
            longitude: self.longitude(d, cell as f64 + 0.5 + offset),
        })
    }
}

/// Deterministic value in `[0, 1)` from point bits.
fn unit_hash(bits: u32) -> f64 {
    let mut z = (bits as u64).wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellLocation {
    /// The point is grid slot `slot` of its ring.
    Grid { slot: usize },
    /// Off-grid: diamond `cell`, summed corner distance, and longitude
    /// offset from the cell center in slot units (within ±0.4).
    Cell { cell: usize, corner_distance: u32, offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPlacement {
    pub point: Point,
    /// Hamming distance to the focus (the latitude band).
    pub distance: usize,
    pub location: CellLocation,
    /// Colatitude from the north pole, radians.
    pub latitude: f64,
    pub longitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MarkerKind {
    /// Past position.
    Dot,
    /// Evaluated probe.
    Triangle,
    /// Highlighted current position.
    Current,
}

impl MarkerKind {
    pub fn label(self) -> &'static str {
        match self {
            MarkerKind::Dot => "dot",
            MarkerKind::Triangle => "triangle",
            MarkerKind::Current => "current",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Radial lift at fitness 1; the sphere has radius 1 at fitness 0.
    pub elevation_scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { elevation_scale: 0.25 }
    }
}

/// Cartesian position with the focus on +z; `z >= 0` faces the viewer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projected {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Projected {
    fn from_angles(latitude: f64, longitude: f64, radius: f64) -> Self {
        let s = libm::sin(latitude);
        Projected {
            x: radius * s * libm::cos(longitude),
            y: radius * s * libm::sin(longitude),
            z: radius * libm::cos(latitude),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub ring: usize,
    pub slot: usize,
    pub point: Point,
    pub latitude: f64,
    pub longitude: f64,
    pub fitness: f64,
    /// Linear in fitness: 0 dark, 1 light.
    pub brightness: f64,
    pub position: Projected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacedMarker {
    pub kind: MarkerKind,
    pub placement: SphericalPlacement,
    pub fitness: f64,
    pub position: Projected,
}

/// Everything needed to draw one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub n: usize,
    pub focus: Point,
    pub vertices: Vec<Vertex>,
    /// Triangles over vertex indices tiling the sphere band by band.
    pub faces: Vec<[usize; 3]>,
    pub markers: Vec<PlacedMarker>,
}

impl Scene {
    pub fn face_fitness(&self, face: &[usize; 3]) -> f64 {
        face.iter().map(|&i| self.vertices[i].fitness).sum::<f64>() / 3.0
    }
}

/// Samples current fitness at every grid vertex and places the markers.
pub fn render(
    landscape: &Landscape,
    grid: &SphericalGrid,
    markers: &[(Point, MarkerKind)],
    options: RenderOptions,
) -> Result<Scene, LandscapeError> {
    if landscape.n() != grid.n {
        return Err(LandscapeError::Length { expected: landscape.n(), got: grid.n });
    }
    let radius = |f: f64| 1.0 + options.elevation_scale * f;
    let mut vertices = Vec::with_capacity(grid.len());
    let mut first = Vec::with_capacity(grid.n + 1);
    for (d, ring) in grid.rings.iter().enumerate() {
        first.push(vertices.len());
        for (j, &point) in ring.iter().enumerate() {
            let fitness = landscape.fitness(point);
            let latitude = grid.latitude(d);
            let longitude = if ring.len() == 1 { 0.0 } else { grid.longitude(d, j as f64) };
            vertices.push(Vertex {
                ring: d,
                slot: j,
                point,
                latitude,
                longitude,
                fitness,
                brightness: fitness,
                position: Projected::from_angles(latitude, longitude, radius(fitness)),
            });
        }
    }
    let n = grid.n;
    let at = |d: usize, j: usize| first[d] + if grid.rings[d].len() == 1 { 0 } else { j % n };
    let mut faces = Vec::new();
    for d in 0..n {
        for j in 0..n {
            if d > 0 {
                faces.push([at(d, j), at(d, j + 1), at(d + 1, j)]);
            }
            if d + 1 < n {
                faces.push([at(d, j), at(d + 1, j + n - 1), at(d + 1, j)]);
            }
        }
    }
    let mut placed = Vec::with_capacity(markers.len());
    for &(point, kind) in markers {
        landscape.check(point)?;
        let placement = grid.place(point)?;
        let fitness = landscape.fitness(point);
        placed.push(PlacedMarker {
            kind,
            placement,
            fitness,
            position: Projected::from_angles(placement.latitude, placement.longitude, radius(fitness)),
        });
    }
    Ok(Scene { n, focus: grid.focus, vertices, faces, markers: placed })
}
