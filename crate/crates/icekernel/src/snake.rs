//! Snake configurations: permutations of the mid-edges that step only by
//! 0, e¹, e², or the half-diagonal e³, their bijection with six-vertex
//! configurations, and the signed weights whose fiber sums realize the
//! six-vertex Boltzmann weight.
//!
//! A *generalised* snake lets the west and south mid-edges of a vertex pass
//! straight through each other (a *crossing*, weighted with a sign −1); a
//! *pure* snake has no crossings. The shape map [`sh`] uncrosses every
//! crossing, and [`fiber`] enumerates its preimages. Pushing the signed
//! measure on generalised snakes forward through [`sh`] and the bijection
//! [`phi`]⁻¹ recovers the six-vertex Boltzmann measure — the identity the
//! determinantal formulas in [`crate::kasteleyn`] rest on, verified here
//! exhaustively at enumeration scale.

use crate::error::{Error, Result};
use crate::lattice::{
    incident_mid_edges, mid_edge_index, mid_edges, step, Color, HalfStep, MidEdge, TorusSize,
    Vertex,
};
use crate::sixvertex::{vertex_type, FreeFermionParams, SixVertexConfig, VertexType};
use crate::sum::CompensatedSum;

/// A generalised snake configuration: a permutation of the mid-edges of
/// 𝕋_n in which a Black mid-edge steps by 0, e¹, or e³ and a White one by
/// 0, e², or e³ (crossings allowed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenSnakeConfig {
    size: TorusSize,
    image: Vec<usize>,
}

impl GenSnakeConfig {
    /// Validates that `image` (in canonical mid-edge indexing) is a
    /// permutation obeying the per-color step constraint.
    pub fn new(size: TorusSize, image: Vec<usize>) -> Result<Self> {
        validate_image(size, &image)?;
        Ok(GenSnakeConfig { size, image })
    }

    fn new_unchecked(size: TorusSize, image: Vec<usize>) -> Self {
        debug_assert!(validate_image(size, &image).is_ok());
        GenSnakeConfig { size, image }
    }

    /// The torus size.
    pub fn size(&self) -> TorusSize {
        self.size
    }

    /// The permutation in canonical mid-edge indexing.
    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Where the permutation sends a mid-edge.
    pub fn image_of(&self, x: MidEdge) -> MidEdge {
        mid_edges(self.size)[self.image[mid_edge_index(self.size, x)]]
    }

    /// Whether the west and south mid-edges of v pass straight through
    /// (west → east and south → north simultaneously).
    pub fn crossing_at(&self, v: Vertex) -> bool {
        let inc = incident_mid_edges(v, Some(self.size));
        self.image_of(inc.west) == inc.east && self.image_of(inc.south) == inc.north
    }

    /// All crossing vertices in row-major order.
    pub fn crossing_vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        for v2 in 0..self.size.n() {
            for v1 in 0..self.size.n() {
                let v = Vertex::new(v1, v2);
                if self.crossing_at(v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

fn validate_image(size: TorusSize, image: &[usize]) -> Result<()> {
    let m = size.mid_edge_count();
    if image.len() != m {
        return Err(Error::InvalidSnake(format!(
            "image must list all {m} mid-edges, got {}",
            image.len()
        )));
    }
    let mut seen = vec![false; m];
    for &t in image {
        if t >= m {
            return Err(Error::InvalidSnake(format!("target index {t} out of range 0..{m}")));
        }
        if seen[t] {
            return Err(Error::InvalidSnake(format!("not a permutation: index {t} hit twice")));
        }
        seen[t] = true;
    }
    let edges = mid_edges(size);
    for (i, x) in edges.iter().enumerate() {
        let y = edges[image[i]];
        let along = match x.color() {
            Color::Black => HalfStep::E1,
            Color::White => HalfStep::E2,
        };
        let legal = y == *x
            || y == step(*x, along, Some(size))
            || y == step(*x, HalfStep::E3, Some(size));
        if !legal {
            return Err(Error::InvalidSnake(format!(
                "mid-edge ({}, {}) maps to ({}, {}), which is not a 0, e¹/e², or e³ step",
                x.d1, x.d2, y.d1, y.d2
            )));
        }
    }
    Ok(())
}

/// A generalised snake with no crossings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PureSnakeConfig {
    inner: GenSnakeConfig,
}

impl PureSnakeConfig {
    /// Validates the absence of crossings.
    pub fn new(g: GenSnakeConfig) -> Result<Self> {
        if let Some(v) = g.crossing_vertices().first() {
            return Err(Error::InvalidSnake(format!(
                "snake has a crossing at vertex ({}, {})",
                v.v1, v.v2
            )));
        }
        Ok(PureSnakeConfig { inner: g })
    }

    /// The underlying generalised snake.
    pub fn general(&self) -> &GenSnakeConfig {
        &self.inner
    }

    /// Consumes the wrapper.
    pub fn into_general(self) -> GenSnakeConfig {
        self.inner
    }

    /// The torus size.
    pub fn size(&self) -> TorusSize {
        self.inner.size
    }

    /// Whether v carries the crossing-free double bond west → north,
    /// south → east (the pattern the shape map's fibers toggle).
    pub fn double_bond_at(&self, v: Vertex) -> bool {
        let inc = incident_mid_edges(v, Some(self.size()));
        self.inner.image_of(inc.west) == inc.north && self.inner.image_of(inc.south) == inc.east
    }

    /// All double-bond vertices in row-major order.
    pub fn double_bond_vertices(&self) -> Vec<Vertex> {
        let mut out = Vec::new();
        for v2 in 0..self.size().n() {
            for v1 in 0..self.size().n() {
                let v = Vertex::new(v1, v2);
                if self.double_bond_at(v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

/// Counts of the non-fixed steps and crossings of a generalised snake.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnakeCounts {
    /// Number of mid-edges stepping by e¹.
    pub a: usize,
    /// Number of mid-edges stepping by e².
    pub b: usize,
    /// Number of mid-edges stepping by e³.
    pub c: usize,
    /// Number of crossings.
    pub s: usize,
}

/// The bijection from six-vertex configurations to pure snakes.
///
/// Per vertex, the local rule bonds the incident mid-edges whose edges are
/// oriented against +e¹/+e²: type 2 bonds west → north and south → east,
/// type 3 south → north, type 4 west → east, type 5 south → east, type 6
/// west → north, and type 1 bonds nothing. Unbonded mid-edges are fixed
/// points, so an edge is oriented along +e¹/+e² exactly when its midpoint
/// is fixed — which is how [`phi_inverse`] reads the map back.
pub fn phi(cfg: &SixVertexConfig) -> PureSnakeConfig {
    let size = cfg.size();
    let mut image: Vec<usize> = (0..size.mid_edge_count()).collect();
    for v2 in 0..size.n() {
        for v1 in 0..size.n() {
            let v = Vertex::new(v1, v2);
            let inc = incident_mid_edges(v, Some(size));
            let w = mid_edge_index(size, inc.west);
            let s = mid_edge_index(size, inc.south);
            let e = mid_edge_index(size, inc.east);
            let n = mid_edge_index(size, inc.north);
            match vertex_type(cfg, v) {
                VertexType::T1 => {}
                VertexType::T2 => {
                    image[w] = n;
                    image[s] = e;
                }
                VertexType::T3 => image[s] = n,
                VertexType::T4 => image[w] = e,
                VertexType::T5 => image[s] = e,
                VertexType::T6 => image[w] = n,
            }
        }
    }
    let general = GenSnakeConfig::new(size, image).expect("local bonds always form a legal snake");
    PureSnakeConfig::new(general).expect("the local bonding rule never produces a crossing")
}

/// The inverse bijection: an edge is oriented along +e¹/+e² exactly when
/// its midpoint is a fixed point of the snake.
pub fn phi_inverse(p: &PureSnakeConfig) -> SixVertexConfig {
    let size = p.size();
    let n = size.n();
    let nn = size.vertex_count();
    let mut horiz = vec![false; nn];
    let mut vert = vec![false; nn];
    for j in 0..n {
        for i in 0..n {
            let he = MidEdge { d1: 2 * i + 1, d2: 2 * j };
            let ve = MidEdge { d1: 2 * i, d2: 2 * j + 1 };
            horiz[(j * n + i) as usize] = p.general().image_of(he) == he;
            vert[(j * n + i) as usize] = p.general().image_of(ve) == ve;
        }
    }
    SixVertexConfig::new(size, horiz, vert)
        .expect("crossing-free snakes encode ice configurations")
}

/// The shape map: straightens every crossing into the west → north,
/// south → east double bond. Idempotent, and the identity on pure snakes.
pub fn sh(g: &GenSnakeConfig) -> PureSnakeConfig {
    let size = g.size();
    let mut image = g.image().to_vec();
    for v in g.crossing_vertices() {
        let inc = incident_mid_edges(v, Some(size));
        let w = mid_edge_index(size, inc.west);
        let s = mid_edge_index(size, inc.south);
        image[w] = mid_edge_index(size, inc.north);
        image[s] = mid_edge_index(size, inc.east);
    }
    PureSnakeConfig::new(GenSnakeConfig::new_unchecked(size, image))
        .expect("uncrossing every crossing leaves none")
}

/// Enumerates the shape-map fiber of a pure snake: one generalised snake
/// per subset of its double-bond vertices, with the chosen subset turned
/// back into crossings. Yields 2^(#double bonds) snakes, the pure one first.
pub fn fiber(p: &PureSnakeConfig) -> impl Iterator<Item = GenSnakeConfig> {
    let size = p.size();
    let spots: Vec<(usize, usize, usize, usize)> = p
        .double_bond_vertices()
        .into_iter()
        .map(|v| {
            let inc = incident_mid_edges(v, Some(size));
            (
                mid_edge_index(size, inc.west),
                mid_edge_index(size, inc.south),
                mid_edge_index(size, inc.east),
                mid_edge_index(size, inc.north),
            )
        })
        .collect();
    let base = p.general().image().to_vec();
    (0..(1u64 << spots.len())).map(move |mask| {
        let mut image = base.clone();
        for (k, &(w, s, e, n)) in spots.iter().enumerate() {
            if mask >> k & 1 == 1 {
                image[w] = e;
                image[s] = n;
            }
        }
        GenSnakeConfig::new_unchecked(size, image)
    })
}

/// Tallies the e¹, e², e³ steps and the crossings of a generalised snake.
pub fn counts(g: &GenSnakeConfig) -> SnakeCounts {
    let size = g.size();
    let edges = mid_edges(size);
    let (mut a, mut b, mut c) = (0, 0, 0);
    for (i, x) in edges.iter().enumerate() {
        let y = edges[g.image()[i]];
        if y == *x {
            continue;
        } else if y == step(*x, HalfStep::E1, Some(size)) {
            a += 1;
        } else if y == step(*x, HalfStep::E2, Some(size)) {
            b += 1;
        } else {
            debug_assert_eq!(y, step(*x, HalfStep::E3, Some(size)));
            c += 1;
        }
    }
    SnakeCounts { a, b, c, s: g.crossing_vertices().len() }
}

/// The parity of the snake as a permutation, via cycle decomposition: each
/// even-length cycle contributes a factor −1.
pub fn perm_sign(g: &GenSnakeConfig) -> i32 {
    let image = g.image();
    let mut visited = vec![false; image.len()];
    let mut sign = 1;
    for start in 0..image.len() {
        if visited[start] {
            continue;
        }
        let mut len = 0usize;
        let mut cur = start;
        while !visited[cur] {
            visited[cur] = true;
            cur = image[cur];
            len += 1;
        }
        if len % 2 == 0 {
            sign = -sign;
        }
    }
    sign
}

/// The signed weight (−1)^S α^A β^B γ^C of a generalised snake.
pub fn signed_weight(g: &GenSnakeConfig, params: FreeFermionParams) -> f64 {
    let k = counts(g);
    let sign = if k.s % 2 == 0 { 1.0 } else { -1.0 };
    sign * params.alpha().powi(k.a as i32)
        * params.beta().powi(k.b as i32)
        * params.gamma().powi(k.c as i32)
}

/// The fiber-summed signed weight of a pure snake.
///
/// Equals the six-vertex Boltzmann weight of [`phi_inverse`] of the snake
/// under the free-fermion weight set — the pushforward identity.
pub fn pure_weight(p: &PureSnakeConfig, params: FreeFermionParams) -> f64 {
    let mut total = CompensatedSum::new();
    for g in fiber(p) {
        total.add(signed_weight(&g, params));
    }
    total.total()
}
