//! Domain discretization: interior sites of `a Z^2` inside a simple polygon,
//! the external boundary layer, 4-neighbour adjacency, cells, and the dyadic
//! block grid over the unit square.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A bounded simply connected planar domain with its lattice spacing.
#[derive(Debug, Clone)]
pub struct DomainSpec<S: Scalar> {
    /// Simple closed polygon (implicitly closed: last vertex joins the first).
    pub polygon: Vec<[S; 2]>,
    /// Lattice spacing `a`.
    pub mesh: S,
}

impl<S: Scalar> DomainSpec<S> {
    /// The open unit square, the default domain.
    pub fn unit_square(mesh: S) -> Self {
        let z = S::zero();
        let o = S::one();
        DomainSpec {
            polygon: vec![[z, z], [o, z], [o, o], [z, o]],
            mesh,
        }
    }

    /// Axis-aligned rectangle `(0, w) x (0, h)`.
    pub fn rectangle(w: S, h: S, mesh: S) -> Self {
        let z = S::zero();
        DomainSpec {
            polygon: vec![[z, z], [w, z], [w, h], [z, h]],
            mesh,
        }
    }

    pub fn diameter(&self) -> S {
        let mut d2 = S::zero();
        for (i, p) in self.polygon.iter().enumerate() {
            for q in self.polygon.iter().skip(i + 1) {
                let dx = p[0] - q[0];
                let dy = p[1] - q[1];
                d2 = d2.max(dx * dx + dy * dy);
            }
        }
        d2.sqrt()
    }
}

/// Reference to a 4-neighbour of an interior site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteRef {
    Interior(u32),
    Boundary(u32),
}

/// Discretized domain: interior sites (row-major), external boundary sites,
/// adjacency and cells. Immutable once built and shareable across workers.
#[derive(Debug, Clone)]
pub struct Lattice<S: Scalar> {
    pub mesh: S,
    positions: Vec<[S; 2]>,
    grid_coords: Vec<[i64; 2]>,
    boundary_positions: Vec<[S; 2]>,
    boundary_grid: Vec<[i64; 2]>,
    neighbors: Vec<[SiteRef; 4]>,
    interior_of: HashMap<[i64; 2], u32>,
}

impl<S: Scalar> Lattice<S> {
    pub fn num_sites(&self) -> usize {
        self.positions.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary_positions.len()
    }

    /// Position of interior site `i`.
    pub fn position(&self, i: usize) -> [S; 2] {
        self.positions[i]
    }

    pub fn positions(&self) -> &[[S; 2]] {
        &self.positions
    }

    pub fn boundary_position(&self, b: usize) -> [S; 2] {
        self.boundary_positions[b]
    }

    /// Integer coordinates `(k, l)` with position `(k a, l a)`.
    pub fn grid_coord(&self, i: usize) -> [i64; 2] {
        self.grid_coords[i]
    }

    /// 4-neighbours of interior site `i`, order `-x, +x, -y, +y`.
    pub fn neighbors(&self, i: usize) -> [SiteRef; 4] {
        self.neighbors[i]
    }

    pub fn interior_index(&self, grid: [i64; 2]) -> Option<usize> {
        self.interior_of.get(&grid).map(|&i| i as usize)
    }

    /// The box `S_a(x)` of side `a` centred at interior site `i`,
    /// returned as `(lower corner, upper corner)`.
    pub fn cell(&self, i: usize) -> ([S; 2], [S; 2]) {
        let h = self.mesh / S::from_f64_c(2.0);
        let p = self.positions[i];
        ([p[0] - h, p[1] - h], [p[0] + h, p[1] + h])
    }

    /// Interior strip with `w x h` sites at spacing `a`, carved from the
    /// rectangle `(0,(w+1)a) x (0,(h+1)a)` with a full external boundary ring.
    pub fn strip(w: usize, h: usize, mesh: S) -> Self {
        let spec = DomainSpec::rectangle(
            mesh * S::from_usize(w + 1).unwrap(),
            mesh * S::from_usize(h + 1).unwrap(),
            mesh,
        );
        let lat = discretize_domain(&spec).expect("strip domain is nonempty");
        assert_eq!(lat.num_sites(), w * h, "strip produced unexpected site count");
        lat
    }

    /// Debug dump: `index,x,y,is_boundary,block_i,block_j` per site; boundary
    /// rows carry block `0,0`.
    pub fn dump_csv<W: Write>(&self, grid: Option<&BlockGrid>, out: &mut W) -> Result<()> {
        writeln!(out, "index,x,y,is_boundary,block_i,block_j")?;
        for i in 0..self.num_sites() {
            let p = self.positions[i];
            let (bi, bj) = grid.map(|g| g.block_of(i)).unwrap_or((0, 0));
            writeln!(out, "{},{},{},0,{},{}", i, p[0], p[1], bi, bj)?;
        }
        for b in 0..self.num_boundary() {
            let p = self.boundary_positions[b];
            writeln!(out, "{},{},{},1,0,0", b, p[0], p[1])?;
        }
        Ok(())
    }
}

fn point_segment_dist2<S: Scalar>(p: [S; 2], a: [S; 2], b: [S; 2]) -> S {
    let abx = b[0] - a[0];
    let aby = b[1] - a[1];
    let apx = p[0] - a[0];
    let apy = p[1] - a[1];
    let denom = abx * abx + aby * aby;
    let t = if denom > S::zero() {
        ((apx * abx + apy * aby) / denom).max(S::zero()).min(S::one())
    } else {
        S::zero()
    };
    let dx = apx - t * abx;
    let dy = apy - t * aby;
    dx * dx + dy * dy
}

/// Strict interior test with an `eps` exclusion band around the boundary, so
/// that lattice points falling on the polygon within rounding error are
/// classified as outside.
fn strictly_inside<S: Scalar>(poly: &[[S; 2]], p: [S; 2], eps: S) -> bool {
    let n = poly.len();
    let e2 = eps * eps;
    for i in 0..n {
        if point_segment_dist2(p, poly[i], poly[(i + 1) % n]) <= e2 {
            return false;
        }
    }
    // Ray cast along +x.
    let mut inside = false;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let t = (p[1] - a[1]) / (b[1] - a[1]);
            let x = a[0] + t * (b[0] - a[0]);
            if x > p[0] {
                inside = !inside;
            }
        }
    }
    inside
}

fn orient<S: Scalar>(a: [S; 2], b: [S; 2], c: [S; 2]) -> S {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross<S: Scalar>(a: [S; 2], b: [S; 2], c: [S; 2], d: [S; 2]) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    (o1 * o2 < S::zero()) && (o3 * o4 < S::zero())
}

fn validate_polygon<S: Scalar>(poly: &[[S; 2]]) -> Result<()> {
    if poly.len() < 3 {
        return Err(Error::InvalidPolygon("fewer than 3 vertices".into()));
    }
    let n = poly.len();
    let mut area2 = S::zero();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        area2 += a[0] * b[1] - b[0] * a[1];
    }
    if area2.abs() == S::zero() {
        return Err(Error::InvalidPolygon("zero area".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            // Skip edges sharing a vertex.
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return Err(Error::InvalidPolygon(format!(
                    "edges {i} and {j} intersect"
                )));
            }
        }
    }
    Ok(())
}

/// Intersect `a Z^2` with the domain interior and collect the external
/// boundary layer. Sites are ordered row-major (y outer, x inner).
pub fn discretize_domain<S: Scalar>(spec: &DomainSpec<S>) -> Result<Lattice<S>> {
    validate_polygon(&spec.polygon)?;
    let a = spec.mesh;
    if !(a > S::zero()) || a >= spec.diameter() {
        return Err(Error::EmptyLattice);
    }
    let eps = a * S::from_f64_c(1e-7);

    let (mut xmin, mut xmax) = (spec.polygon[0][0], spec.polygon[0][0]);
    let (mut ymin, mut ymax) = (spec.polygon[0][1], spec.polygon[0][1]);
    for p in &spec.polygon {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let lo_x = (xmin / a).floor().to_f64_c() as i64 - 1;
    let hi_x = (xmax / a).ceil().to_f64_c() as i64 + 1;
    let lo_y = (ymin / a).floor().to_f64_c() as i64 - 1;
    let hi_y = (ymax / a).ceil().to_f64_c() as i64 + 1;

    let mut positions = Vec::new();
    let mut grid_coords = Vec::new();
    let mut interior_of: HashMap<[i64; 2], u32> = HashMap::new();
    for gy in lo_y..=hi_y {
        for gx in lo_x..=hi_x {
            let p = [a * S::from_i64(gx).unwrap(), a * S::from_i64(gy).unwrap()];
            if strictly_inside(&spec.polygon, p, eps) {
                interior_of.insert([gx, gy], positions.len() as u32);
                positions.push(p);
                grid_coords.push([gx, gy]);
            }
        }
    }
    if positions.is_empty() {
        return Err(Error::EmptyLattice);
    }

    // External boundary: lattice points outside the domain adjacent to an
    // interior site, ordered row-major.
    let mut boundary_of: HashMap<[i64; 2], u32> = HashMap::new();
    let mut boundary_grid = Vec::new();
    for gy in lo_y..=hi_y {
        for gx in lo_x..=hi_x {
            if interior_of.contains_key(&[gx, gy]) {
                continue;
            }
            let adj = [[gx - 1, gy], [gx + 1, gy], [gx, gy - 1], [gx, gy + 1]]
                .iter()
                .any(|g| interior_of.contains_key(g));
            if adj {
                boundary_of.insert([gx, gy], boundary_grid.len() as u32);
                boundary_grid.push([gx, gy]);
            }
        }
    }
    let boundary_positions: Vec<[S; 2]> = boundary_grid
        .iter()
        .map(|&[gx, gy]| [a * S::from_i64(gx).unwrap(), a * S::from_i64(gy).unwrap()])
        .collect();

    let neighbors: Vec<[SiteRef; 4]> = grid_coords
        .iter()
        .map(|&[gx, gy]| {
            let mut nb = [SiteRef::Boundary(0); 4];
            for (k, g) in [[gx - 1, gy], [gx + 1, gy], [gx, gy - 1], [gx, gy + 1]]
                .iter()
                .enumerate()
            {
                nb[k] = if let Some(&i) = interior_of.get(g) {
                    SiteRef::Interior(i)
                } else {
                    SiteRef::Boundary(boundary_of[g])
                };
            }
            nb
        })
        .collect();

    Ok(Lattice {
        mesh: a,
        positions,
        grid_coords,
        boundary_positions,
        boundary_grid,
        neighbors,
        interior_of,
    })
}

/// Dyadic partition of the unit square into `N x N` blocks with the site
/// assignment. Blocks are indexed 1-based as `(i, j)`.
#[derive(Debug, Clone)]
pub struct BlockGrid {
    pub n: usize,
    assignment: Vec<(u16, u16)>,
    sites: Vec<Vec<u32>>,
}

impl BlockGrid {
    pub fn block_of(&self, site: usize) -> (u16, u16) {
        self.assignment[site]
    }

    /// Interior sites assigned to block `(i, j)` (1-based).
    pub fn sites_in(&self, i: usize, j: usize) -> &[u32] {
        &self.sites[(j - 1) * self.n + (i - 1)]
    }

    /// The open box `B^N_{i,j} = ((i-1)/N, i/N) x ((j-1)/N, j/N)`.
    pub fn block_cell<S: Scalar>(&self, i: usize, j: usize) -> ([S; 2], [S; 2]) {
        let n = S::from_usize(self.n).unwrap();
        let lo = [
            S::from_usize(i - 1).unwrap() / n,
            S::from_usize(j - 1).unwrap() / n,
        ];
        let hi = [S::from_usize(i).unwrap() / n, S::from_usize(j).unwrap() / n];
        (lo, hi)
    }

    pub fn num_blocks(&self) -> usize {
        self.n * self.n
    }
}

/// Assign every interior site to its block, half-open convention: a site on
/// a block edge belongs to the block with the larger index (lower-left
/// corners are inclusive).
pub fn build_block_grid<S: Scalar>(lat: &Lattice<S>, n: usize) -> BlockGrid {
    assert!(n >= 1 && n.is_power_of_two(), "N must be a power of two");
    let nf = S::from_usize(n).unwrap();
    let mut assignment = Vec::with_capacity(lat.num_sites());
    let mut sites = vec![Vec::new(); n * n];
    for s in 0..lat.num_sites() {
        let p = lat.position(s);
        let clamp = |v: S| -> usize {
            let k = (v * nf).floor().to_f64_c() as i64 + 1;
            k.clamp(1, n as i64) as usize
        };
        let (i, j) = (clamp(p[0]), clamp(p[1]));
        assignment.push((i as u16, j as u16));
        sites[(j - 1) * n + (i - 1)].push(s as u32);
    }
    BlockGrid {
        n,
        assignment,
        sites,
    }
}
