//! Geometry of the square lattice and its discrete torus: vertices,
//! mid-edges with exact half-integer coordinates, colors, and step
//! arithmetic.
//!
//! Midpoints of lattice edges live on the half-integer lattice, so every
//! coordinate here is stored **doubled**: the mid-edge at (1/2, 0) is held
//! as `(d1, d2) = (1, 0)`. Exactly one of the two doubled coordinates of a
//! mid-edge is odd; an odd `d1` marks the midpoint of a horizontal edge
//! (colored [`Color::Black`]), an odd `d2` the midpoint of a vertical edge
//! ([`Color::White`]). All arithmetic is exact integer arithmetic, reduced
//! mod `2n` on the torus 𝕋_n.

use crate::error::{Error, Result};

/// Side length of the discrete torus 𝕋_n.
///
/// `n = 1` would turn every edge into a self-loop and degenerate the
/// two-in/two-out rule, so sizes below 2 are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusSize {
    n: i64,
}

impl TorusSize {
    /// Validates `n ≥ 2`.
    pub fn new(n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TorusTooSmall { n });
        }
        Ok(TorusSize { n })
    }

    /// The side length n.
    pub fn n(self) -> i64 {
        self.n
    }

    /// Number of vertices, n².
    pub fn vertex_count(self) -> usize {
        (self.n * self.n) as usize
    }

    /// Number of mid-edges, 2n².
    pub fn mid_edge_count(self) -> usize {
        2 * self.vertex_count()
    }

    /// The modulus 2n that doubled coordinates are reduced by.
    pub fn doubled(self) -> i64 {
        2 * self.n
    }
}

/// A lattice vertex; on the torus both coordinates are reduced mod n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    /// First (horizontal) coordinate.
    pub v1: i64,
    /// Second (vertical) coordinate.
    pub v2: i64,
}

impl Vertex {
    /// A vertex at (v1, v2); no reduction is applied.
    pub fn new(v1: i64, v2: i64) -> Self {
        Vertex { v1, v2 }
    }

    /// The torus representative with both coordinates in [0, n).
    pub fn reduce(self, size: TorusSize) -> Self {
        Vertex {
            v1: self.v1.rem_euclid(size.n()),
            v2: self.v2.rem_euclid(size.n()),
        }
    }

    /// Row-major position v2·n + v1 of the reduced vertex on 𝕋_n.
    pub fn index_on(self, size: TorusSize) -> usize {
        let r = self.reduce(size);
        (r.v2 * size.n() + r.v1) as usize
    }
}

/// Mid-edge color: `Black` for horizontal-edge midpoints, `White` for
/// vertical ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    /// Midpoint of a horizontal edge (odd doubled first coordinate).
    Black,
    /// Midpoint of a vertical edge (odd doubled second coordinate).
    White,
}

impl Color {
    /// The other color.
    pub fn opposite(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

/// The midpoint of a lattice edge, stored in doubled coordinates.
///
/// The true position is (d1/2, d2/2); exactly one of d1, d2 is odd. On the
/// torus both doubled coordinates are reduced mod 2n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MidEdge {
    /// Doubled first coordinate.
    pub d1: i64,
    /// Doubled second coordinate.
    pub d2: i64,
}

impl MidEdge {
    /// Validates the parity invariant: exactly one doubled coordinate odd.
    pub fn new(d1: i64, d2: i64) -> Result<Self> {
        let x = MidEdge { d1, d2 };
        if !x.parity_valid() {
            return Err(Error::InvalidMidEdge { d1, d2 });
        }
        Ok(x)
    }

    /// Whether exactly one of the doubled coordinates is odd.
    pub fn parity_valid(self) -> bool {
        (self.d1.rem_euclid(2) == 1) != (self.d2.rem_euclid(2) == 1)
    }

    /// Black when d1 is odd (horizontal edge), White when d2 is odd.
    pub fn color(self) -> Color {
        debug_assert!(self.parity_valid(), "not a mid-edge: ({}, {})", self.d1, self.d2);
        if self.d1.rem_euclid(2) == 1 {
            Color::Black
        } else {
            Color::White
        }
    }

    /// The torus representative with both doubled coordinates in [0, 2n).
    pub fn reduce(self, size: TorusSize) -> Self {
        let m = size.doubled();
        MidEdge {
            d1: self.d1.rem_euclid(m),
            d2: self.d2.rem_euclid(m),
        }
    }
}

/// A step of the mid-edge walk, stored as a doubled offset.
///
/// `E1 = (1, 0)` and `E2 = (0, 1)` preserve color, the half-diagonal
/// `E3 = (1/2, 1/2)` flips it, and `Zero` is the identity step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfStep {
    /// The identity step (0, 0).
    Zero,
    /// One unit along the first axis.
    E1,
    /// One unit along the second axis.
    E2,
    /// Half a unit along both axes.
    E3,
}

impl HalfStep {
    /// All four steps.
    pub const ALL: [HalfStep; 4] = [HalfStep::Zero, HalfStep::E1, HalfStep::E2, HalfStep::E3];

    /// The doubled-coordinate offset of the step.
    pub fn doubled_offset(self) -> (i64, i64) {
        match self {
            HalfStep::Zero => (0, 0),
            HalfStep::E1 => (2, 0),
            HalfStep::E2 => (0, 2),
            HalfStep::E3 => (1, 1),
        }
    }

    /// Whether taking this step changes the mid-edge color (only `E3` does).
    pub fn flips_color(self) -> bool {
        matches!(self, HalfStep::E3)
    }
}

/// All 2n² mid-edges of 𝕋_n in canonical order: row-major by (d2, d1).
///
/// Rows with even d2 hold the n Black mid-edges (odd d1 = 1, 3, …, 2n−1),
/// rows with odd d2 the n White ones (even d1 = 0, 2, …, 2n−2). This order
/// is the basis used by every matrix indexed by mid-edges; positions are
/// recovered by [`mid_edge_index`].
pub fn mid_edges(size: TorusSize) -> Vec<MidEdge> {
    let mut out = Vec::with_capacity(size.mid_edge_count());
    for d2 in 0..size.doubled() {
        let start = if d2 % 2 == 0 { 1 } else { 0 };
        for k in 0..size.n() {
            out.push(MidEdge { d1: start + 2 * k, d2 });
        }
    }
    out
}

/// The position of (the torus representative of) `x` in [`mid_edges`].
pub fn mid_edge_index(size: TorusSize, x: MidEdge) -> usize {
    let r = x.reduce(size);
    let col = if r.d2 % 2 == 0 { (r.d1 - 1) / 2 } else { r.d1 / 2 };
    (r.d2 * size.n() + col) as usize
}

/// The four mid-edges west, south, east, north of a vertex, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IncidentMidEdges {
    /// v − ½e¹ (Black).
    pub west: MidEdge,
    /// v − ½e² (White).
    pub south: MidEdge,
    /// v + ½e¹ (Black).
    pub east: MidEdge,
    /// v + ½e² (White).
    pub north: MidEdge,
}

impl IncidentMidEdges {
    /// The quadruple in (W, S, E, N) order.
    pub fn as_array(self) -> [MidEdge; 4] {
        [self.west, self.south, self.east, self.north]
    }
}

/// The mid-edges at v ∓ ½e¹ and v ∓ ½e², wrapped mod 2n when a torus size
/// is given. Colors always come out (Black, White, Black, White) for
/// (W, S, E, N).
pub fn incident_mid_edges(v: Vertex, size: Option<TorusSize>) -> IncidentMidEdges {
    let raw = IncidentMidEdges {
        west: MidEdge { d1: 2 * v.v1 - 1, d2: 2 * v.v2 },
        south: MidEdge { d1: 2 * v.v1, d2: 2 * v.v2 - 1 },
        east: MidEdge { d1: 2 * v.v1 + 1, d2: 2 * v.v2 },
        north: MidEdge { d1: 2 * v.v1, d2: 2 * v.v2 + 1 },
    };
    match size {
        None => raw,
        Some(s) => IncidentMidEdges {
            west: raw.west.reduce(s),
            south: raw.south.reduce(s),
            east: raw.east.reduce(s),
            north: raw.north.reduce(s),
        },
    }
}

/// `x + s` in doubled coordinates, wrapped mod 2n when a torus size is given.
pub fn step(x: MidEdge, s: HalfStep, size: Option<TorusSize>) -> MidEdge {
    let (o1, o2) = s.doubled_offset();
    let y = MidEdge {
        d1: x.d1 + o1,
        d2: x.d2 + o2,
    };
    match size {
        None => y,
        Some(sz) => y.reduce(sz),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn torus_size_rejects_degenerate_side_lengths() {
        assert!(matches!(TorusSize::new(1), Err(Error::TorusTooSmall { n: 1 })));
        assert!(TorusSize::new(2).is_ok());
        let s = TorusSize::new(3).unwrap();
        assert_eq!(s.vertex_count(), 9);
        assert_eq!(s.mid_edge_count(), 18);
        assert_eq!(s.doubled(), 6);
    }

    #[test]
    fn mid_edge_constructor_enforces_parity() {
        assert!(MidEdge::new(1, 0).is_ok());
        assert!(MidEdge::new(0, 3).is_ok());
        assert!(matches!(MidEdge::new(0, 0), Err(Error::InvalidMidEdge { .. })));
        assert!(matches!(MidEdge::new(1, 1), Err(Error::InvalidMidEdge { .. })));
        assert_eq!(MidEdge::new(1, 0).unwrap().color(), Color::Black);
        assert_eq!(MidEdge::new(0, 1).unwrap().color(), Color::White);
        assert_eq!(MidEdge::new(-1, 4).unwrap().color(), Color::Black);
    }

    #[test]
    fn canonical_order_counts_and_first_element() {
        let s2 = TorusSize::new(2).unwrap();
        let s3 = TorusSize::new(3).unwrap();
        let m2 = mid_edges(s2);
        let m3 = mid_edges(s3);
        assert_eq!(m2.len(), 8);
        assert_eq!(m3.len(), 18);
        assert_eq!(m2[0], MidEdge { d1: 1, d2: 0 });
        assert_eq!(m2[0].color(), Color::Black);
        let distinct: HashSet<_> = m3.iter().copied().collect();
        assert_eq!(distinct.len(), m3.len());
        assert!(m3.iter().all(|x| x.parity_valid()));
    }

    #[test]
    fn index_is_the_position_in_the_canonical_order() {
        for n in 2..=5 {
            let s = TorusSize::new(n).unwrap();
            for (i, x) in mid_edges(s).into_iter().enumerate() {
                assert_eq!(mid_edge_index(s, x), i);
            }
        }
    }

    #[test]
    fn incident_mid_edges_on_the_plane_and_on_the_torus() {
        let inc = incident_mid_edges(Vertex::new(0, 0), None);
        assert_eq!(inc.west, MidEdge { d1: -1, d2: 0 });
        assert_eq!(inc.south, MidEdge { d1: 0, d2: -1 });
        assert_eq!(inc.east, MidEdge { d1: 1, d2: 0 });
        assert_eq!(inc.north, MidEdge { d1: 0, d2: 1 });

        let s2 = TorusSize::new(2).unwrap();
        let wrapped = incident_mid_edges(Vertex::new(0, 0), Some(s2));
        assert_eq!(wrapped.west, MidEdge { d1: 3, d2: 0 });
        assert_eq!(wrapped.south, MidEdge { d1: 0, d2: 3 });

        let colors: Vec<Color> = wrapped.as_array().iter().map(|x| x.color()).collect();
        assert_eq!(colors, vec![Color::Black, Color::White, Color::Black, Color::White]);
    }

    #[test]
    fn step_examples() {
        let x = MidEdge::new(1, 0).unwrap();
        assert_eq!(step(x, HalfStep::E3, None), MidEdge { d1: 2, d2: 1 });
        assert_eq!(step(x, HalfStep::Zero, None), x);

        let s2 = TorusSize::new(2).unwrap();
        let y = MidEdge::new(3, 2).unwrap();
        assert_eq!(step(y, HalfStep::E1, Some(s2)), MidEdge { d1: 1, d2: 2 });
    }

    #[test]
    fn incident_quadruple_is_consistent_with_step() {
        let s = TorusSize::new(3).unwrap();
        for v1 in 0..3 {
            for v2 in 0..3 {
                let inc = incident_mid_edges(Vertex::new(v1, v2), Some(s));
                assert_eq!(step(inc.west, HalfStep::E1, Some(s)), inc.east);
                assert_eq!(step(inc.south, HalfStep::E2, Some(s)), inc.north);
            }
        }
    }

    #[test]
    fn vertex_reduction_and_row_major_index() {
        let s = TorusSize::new(3).unwrap();
        assert_eq!(Vertex::new(-1, 7).reduce(s), Vertex::new(2, 1));
        assert_eq!(Vertex::new(2, 1).index_on(s), 5);
        assert_eq!(Vertex::new(0, 0).index_on(s), 0);
    }

    fn arb_mid_edge() -> impl Strategy<Value = MidEdge> {
        (-40i64..40, -40i64..40, any::<bool>()).prop_map(|(a, b, horizontal)| {
            if horizontal {
                MidEdge { d1: 2 * a + 1, d2: 2 * b }
            } else {
                MidEdge { d1: 2 * a, d2: 2 * b + 1 }
            }
        })
    }

    proptest! {
        #[test]
        fn steps_preserve_or_flip_color_as_declared(x in arb_mid_edge(), si in 0usize..4) {
            let s = HalfStep::ALL[si];
            let y = step(x, s, None);
            prop_assert!(y.parity_valid());
            if s.flips_color() {
                prop_assert_eq!(y.color(), x.color().opposite());
            } else {
                prop_assert_eq!(y.color(), x.color());
            }
        }

        #[test]
        fn reduction_commutes_with_indexing(x in arb_mid_edge(), n in 2i64..8) {
            let s = TorusSize::new(n).unwrap();
            let idx = mid_edge_index(s, x);
            prop_assert_eq!(mid_edges(s)[idx], x.reduce(s));
        }
    }
}
