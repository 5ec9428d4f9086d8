//! Six-vertex configurations on the torus: the ice rule, vertex types,
//! Boltzmann weights, and the exhaustive enumeration oracle with exact
//! event probabilities.
//!
//! An edge orientation is a boolean: `true` means the arrow points along
//! +e¹ (horizontal edges) or +e² (vertical edges). The ice rule demands two
//! incoming and two outgoing arrows at every vertex, which leaves exactly
//! six local patterns; their weights are (a₁, a₂, b₁, b₂, c₁, c₂) in the
//! order fixed by [`VertexType`].
//!
//! The free-fermion parametrisation (α, β, γ) ↦ (1, γ²−αβ, β, α, γ, γ)
//! places the model on the surface where the anisotropy △ vanishes; the
//! determinantal machinery in the rest of the crate is exact precisely
//! there. Everything in this module, by contrast, works for arbitrary
//! positive weights and serves as the brute-force oracle the fast paths are
//! verified against.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::{TorusSize, Vertex};
use crate::sum::CompensatedSum;

/// Free-fermion parameters (α, β, γ).
///
/// Requires α ≥ 0, β ≥ 0, γ > 0 and γ² − αβ > 0. Zero α or β is allowed —
/// the weight formulas stay finite and the α = β = 0 point is a valuable
/// frozen-phase test case — but operations that need strictly positive
/// weights ([`anisotropy`]) reject the resulting weight sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFermionParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl FreeFermionParams {
    /// Validates the domain constraints.
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "parameters must be finite, got ({alpha}, {beta}, {gamma})"
            )));
        }
        if alpha < 0.0 || beta < 0.0 {
            return Err(Error::InvalidParameters(format!(
                "alpha and beta must be nonnegative, got ({alpha}, {beta})"
            )));
        }
        if gamma <= 0.0 {
            return Err(Error::InvalidParameters(format!("gamma must be positive, got {gamma}")));
        }
        if gamma * gamma - alpha * beta <= 0.0 {
            return Err(Error::InvalidParameters(format!(
                "gamma^2 - alpha*beta must be positive, got {}",
                gamma * gamma - alpha * beta
            )));
        }
        Ok(FreeFermionParams { alpha, beta, gamma })
    }

    /// The parameter α.
    pub fn alpha(self) -> f64 {
        self.alpha
    }

    /// The parameter β.
    pub fn beta(self) -> f64 {
        self.beta
    }

    /// The parameter γ.
    pub fn gamma(self) -> f64 {
        self.gamma
    }

    /// The parameters with α and β exchanged (a valid set whenever `self` is).
    pub fn swapped(self) -> Self {
        FreeFermionParams {
            alpha: self.beta,
            beta: self.alpha,
            gamma: self.gamma,
        }
    }
}

/// The six Boltzmann weights (a₁, a₂, b₁, b₂, c₁, c₂).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixVertexWeights {
    /// Weight of type 1.
    pub a1: f64,
    /// Weight of type 2.
    pub a2: f64,
    /// Weight of type 3.
    pub b1: f64,
    /// Weight of type 4.
    pub b2: f64,
    /// Weight of type 5.
    pub c1: f64,
    /// Weight of type 6.
    pub c2: f64,
}

impl SixVertexWeights {
    /// Validates that all six weights are finite and nonnegative.
    ///
    /// Zero entries arise on the boundary of the free-fermion family
    /// (α = 0 or β = 0) and are accepted; strict positivity is demanded
    /// only by the operations that need it.
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64, c1: f64, c2: f64) -> Result<Self> {
        let all = [a1, a2, b1, b2, c1, c2];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameters(format!(
                "weights must be finite and nonnegative, got {all:?}"
            )));
        }
        Ok(SixVertexWeights { a1, a2, b1, b2, c1, c2 })
    }

    /// The weight of one vertex type.
    pub fn of_type(self, t: VertexType) -> f64 {
        match t {
            VertexType::T1 => self.a1,
            VertexType::T2 => self.a2,
            VertexType::T3 => self.b1,
            VertexType::T4 => self.b2,
            VertexType::T5 => self.c1,
            VertexType::T6 => self.c2,
        }
    }

    /// The weights as an array in type order.
    pub fn as_array(self) -> [f64; 6] {
        [self.a1, self.a2, self.b1, self.b2, self.c1, self.c2]
    }
}

/// The free-fermion weight set (1, γ²−αβ, β, α, γ, γ).
pub fn weights_from_params(p: FreeFermionParams) -> SixVertexWeights {
    SixVertexWeights {
        a1: 1.0,
        a2: p.gamma * p.gamma - p.alpha * p.beta,
        b1: p.beta,
        b2: p.alpha,
        c1: p.gamma,
        c2: p.gamma,
    }
}

/// The anisotropy △ = (a₁a₂ + b₁b₂ − c₁c₂) / (2√(a₁a₂b₁b₂)).
///
/// △ classifies the phase (ferroelectric △ > 1, disordered |△| < 1,
/// antiferroelectric △ < −1); free-fermion weight sets give △ = 0.
/// Undefined when any of a₁, a₂, b₁, b₂ vanishes.
pub fn anisotropy(w: SixVertexWeights) -> Result<f64> {
    let prod = [w.a1, w.a2, w.b1, w.b2];
    if prod.iter().any(|x| *x <= 0.0) {
        return Err(Error::InvalidParameters(format!(
            "anisotropy needs strictly positive a and b weights, got {prod:?}"
        )));
    }
    Ok((w.a1 * w.a2 + w.b1 * w.b2 - w.c1 * w.c2) / (2.0 * (w.a1 * w.a2 * w.b1 * w.b2).sqrt()))
}

/// One of the six vertex types, in weight order (a₁, a₂, b₁, b₂, c₁, c₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexType {
    /// All four arrows along +e¹/+e²: west and south in, east and north out.
    T1,
    /// The full reversal of type 1.
    T2,
    /// Horizontal arrows along +e¹, vertical along −e² (first b-pattern).
    T3,
    /// The reversal of type 3.
    T4,
    /// Both horizontal arrows inward, both vertical outward (first c-pattern).
    T5,
    /// The reversal of type 5.
    T6,
}

impl VertexType {
    /// The six types in weight order.
    pub const ALL: [VertexType; 6] = [
        VertexType::T1,
        VertexType::T2,
        VertexType::T3,
        VertexType::T4,
        VertexType::T5,
        VertexType::T6,
    ];

    /// The 1-based type number.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    /// The 0-based position in weight order.
    pub fn index(self) -> usize {
        match self {
            VertexType::T1 => 0,
            VertexType::T2 => 1,
            VertexType::T3 => 2,
            VertexType::T4 => 3,
            VertexType::T5 => 4,
            VertexType::T6 => 5,
        }
    }

    /// Parses a 1-based type number.
    pub fn from_number(t: u8) -> Result<Self> {
        match t {
            1..=6 => Ok(VertexType::ALL[(t - 1) as usize]),
            _ => Err(Error::InvalidVertexType(t)),
        }
    }

    /// The image under global arrow reversal: 1↔2, 3↔4, 5↔6.
    pub fn reversed(self) -> Self {
        match self {
            VertexType::T1 => VertexType::T2,
            VertexType::T2 => VertexType::T1,
            VertexType::T3 => VertexType::T4,
            VertexType::T4 => VertexType::T3,
            VertexType::T5 => VertexType::T6,
            VertexType::T6 => VertexType::T5,
        }
    }
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Classifies the four incident orientations (west, east, south, north) of
/// a vertex; `true` means the arrow points along +e¹ or +e².
///
/// Returns `None` exactly when the pattern violates the ice rule (the
/// west/south arrows in minus the east/north arrows in must balance).
pub fn classify_orientations(w: bool, e: bool, s: bool, n: bool) -> Option<VertexType> {
    match (w, e, s, n) {
        (true, true, true, true) => Some(VertexType::T1),
        (false, false, false, false) => Some(VertexType::T2),
        (true, true, false, false) => Some(VertexType::T3),
        (false, false, true, true) => Some(VertexType::T4),
        (true, false, false, true) => Some(VertexType::T5),
        (false, true, true, false) => Some(VertexType::T6),
        _ => None,
    }
}

/// An orientation of every torus edge that satisfies the ice rule at every
/// vertex.
///
/// `horiz[j·n + i]` is the orientation of the horizontal edge whose
/// midpoint is (i + ½, j), i.e. the edge east of vertex (i, j); `vert[j·n + i]`
/// of the vertical edge with midpoint (i, j + ½), north of (i, j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SixVertexConfig {
    size: TorusSize,
    horiz: Vec<bool>,
    vert: Vec<bool>,
}

impl SixVertexConfig {
    /// Validates array lengths and the ice rule at every vertex.
    pub fn new(size: TorusSize, horiz: Vec<bool>, vert: Vec<bool>) -> Result<Self> {
        if horiz.len() != size.vertex_count() || vert.len() != size.vertex_count() {
            return Err(Error::InvalidParameters(format!(
                "edge arrays must each have length n^2 = {}, got {} and {}",
                size.vertex_count(),
                horiz.len(),
                vert.len()
            )));
        }
        let cfg = SixVertexConfig { size, horiz, vert };
        match cfg.first_ice_violation() {
            None => Ok(cfg),
            Some(v) => Err(Error::IceRuleViolation { v1: v.v1, v2: v.v2 }),
        }
    }

    fn from_parts_unchecked(size: TorusSize, horiz: Vec<bool>, vert: Vec<bool>) -> Self {
        let cfg = SixVertexConfig { size, horiz, vert };
        debug_assert!(cfg.first_ice_violation().is_none());
        cfg
    }

    fn first_ice_violation(&self) -> Option<Vertex> {
        for v2 in 0..self.size.n() {
            for v1 in 0..self.size.n() {
                let v = Vertex::new(v1, v2);
                let (w, e, s, n) = self.orientations_at(v);
                if classify_orientations(w, e, s, n).is_none() {
                    return Some(v);
                }
            }
        }
        None
    }

    /// The torus size.
    pub fn size(&self) -> TorusSize {
        self.size
    }

    /// Horizontal-edge orientations in row-major order.
    pub fn horiz(&self) -> &[bool] {
        &self.horiz
    }

    /// Vertical-edge orientations in row-major order.
    pub fn vert(&self) -> &[bool] {
        &self.vert
    }

    /// The orientations of the four edges at v as (west, east, south, north).
    pub fn orientations_at(&self, v: Vertex) -> (bool, bool, bool, bool) {
        let n = self.size.n();
        let r = v.reduce(self.size);
        let h = |a: i64, b: i64| self.horiz[(b.rem_euclid(n) * n + a.rem_euclid(n)) as usize];
        let vv = |a: i64, b: i64| self.vert[(b.rem_euclid(n) * n + a.rem_euclid(n)) as usize];
        (h(r.v1 - 1, r.v2), h(r.v1, r.v2), vv(r.v1, r.v2 - 1), vv(r.v1, r.v2))
    }

    /// The configuration with every arrow reversed (always valid again).
    pub fn reversed(&self) -> SixVertexConfig {
        SixVertexConfig::from_parts_unchecked(
            self.size,
            self.horiz.iter().map(|b| !b).collect(),
            self.vert.iter().map(|b| !b).collect(),
        )
    }
}

/// The vertex type of `cfg` at `v`.
///
/// Total because [`SixVertexConfig::new`] already enforces the ice rule;
/// classification of raw orientation data goes through
/// [`classify_orientations`], which reports violations as `None`.
pub fn vertex_type(cfg: &SixVertexConfig, v: Vertex) -> VertexType {
    let (w, e, s, n) = cfg.orientations_at(v);
    classify_orientations(w, e, s, n).expect("constructor enforces the ice rule")
}

/// The largest edge-bit count the exhaustive oracle will sweep (n ≤ 3).
const ENUMERATION_BIT_LIMIT: usize = 26;

/// Streams every ice configuration of 𝕋_n exactly once.
///
/// Sweeps all 2^(2n²) orientation bitmasks and keeps those that satisfy the
/// ice rule at every vertex (the per-vertex check exits at the first
/// violation). Requires 2n² ≤ 26, i.e. n ≤ 3.
pub fn enumerate_configs(size: TorusSize) -> Result<impl Iterator<Item = SixVertexConfig>> {
    let bits = size.mid_edge_count();
    if bits > ENUMERATION_BIT_LIMIT {
        return Err(Error::EnumerationTooLarge { n: size.n() });
    }
    let nn = size.vertex_count();
    Ok((0u64..(1u64 << bits)).filter_map(move |mask| {
        let horiz: Vec<bool> = (0..nn).map(|k| (mask >> k) & 1 == 1).collect();
        let vert: Vec<bool> = (0..nn).map(|k| (mask >> (nn + k)) & 1 == 1).collect();
        SixVertexConfig::new(size, horiz, vert).ok()
    }))
}

/// The Boltzmann weight of a configuration: the product over all vertices
/// of the local type weight.
pub fn config_weight(cfg: &SixVertexConfig, w: SixVertexWeights) -> f64 {
    let n = cfg.size().n();
    let mut p = 1.0;
    for v2 in 0..n {
        for v1 in 0..n {
            p *= w.of_type(vertex_type(cfg, Vertex::new(v1, v2)));
        }
    }
    p
}

/// The partition function by exhaustive enumeration (the oracle route).
pub fn partition_enumerate(size: TorusSize, w: SixVertexWeights) -> Result<f64> {
    let mut z = CompensatedSum::new();
    for cfg in enumerate_configs(size)? {
        z.add(config_weight(&cfg, w));
    }
    Ok(z.total())
}

/// The Boltzmann probability that each listed vertex has its listed type,
/// by exhaustive enumeration.
///
/// Constraint vertices are reduced to the torus first and must be distinct;
/// an empty list gives probability 1.
pub fn event_probability_enumerate(
    size: TorusSize,
    w: SixVertexWeights,
    constraints: &[(Vertex, VertexType)],
) -> Result<f64> {
    let mut seen = HashSet::new();
    for (v, _) in constraints {
        let r = v.reduce(size);
        if !seen.insert((r.v1, r.v2)) {
            return Err(Error::DuplicateVertex { v1: r.v1, v2: r.v2 });
        }
    }
    let mut z = CompensatedSum::new();
    let mut matching = CompensatedSum::new();
    for cfg in enumerate_configs(size)? {
        let wt = config_weight(&cfg, w);
        z.add(wt);
        if constraints.iter().all(|(v, t)| vertex_type(&cfg, *v) == *t) {
            matching.add(wt);
        }
    }
    Ok(matching.total() / z.total())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn params(alpha: f64, beta: f64, gamma: f64) -> FreeFermionParams {
        FreeFermionParams::new(alpha, beta, gamma).unwrap()
    }

    fn t2_configs() -> &'static [SixVertexConfig] {
        static CONFIGS: OnceLock<Vec<SixVertexConfig>> = OnceLock::new();
        CONFIGS.get_or_init(|| {
            enumerate_configs(TorusSize::new(2).unwrap()).unwrap().collect()
        })
    }

    fn t3_configs() -> &'static [SixVertexConfig] {
        static CONFIGS: OnceLock<Vec<SixVertexConfig>> = OnceLock::new();
        CONFIGS.get_or_init(|| {
            enumerate_configs(TorusSize::new(3).unwrap()).unwrap().collect()
        })
    }

    fn rel_close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * y.abs().max(1.0)
    }

    #[test]
    fn parameter_validation() {
        assert!(FreeFermionParams::new(0.1, 0.1, 0.5).is_ok());
        assert!(FreeFermionParams::new(0.0, 0.0, 0.5).is_ok());
        assert!(FreeFermionParams::new(1.0, 1.0, 1.0).is_err());
        assert!(FreeFermionParams::new(-0.1, 0.1, 0.5).is_err());
        assert!(FreeFermionParams::new(0.1, 0.1, 0.0).is_err());
        assert!(FreeFermionParams::new(f64::NAN, 0.1, 0.5).is_err());
    }

    #[test]
    fn weight_sets_from_the_free_fermion_family() {
        let w = weights_from_params(params(0.1, 0.1, 0.5));
        assert_eq!(w.as_array(), [1.0, 0.24, 0.1, 0.1, 0.5, 0.5]);
        let w0 = weights_from_params(params(0.0, 0.0, 0.5));
        assert_eq!(w0.as_array(), [1.0, 0.25, 0.0, 0.0, 0.5, 0.5]);
        // b1 takes beta and b2 takes alpha, not the other way around
        let w_ab = weights_from_params(params(0.3, 0.4, 0.8));
        assert_eq!(w_ab.b1, 0.4);
        assert_eq!(w_ab.b2, 0.3);
    }

    #[test]
    fn anisotropy_vanishes_on_the_free_fermion_surface() {
        let d = anisotropy(weights_from_params(params(0.1, 0.1, 0.5))).unwrap();
        assert!(d.abs() < 1e-15, "anisotropy {d} should vanish");
        let d2 = anisotropy(weights_from_params(params(0.3, 0.4, 0.8))).unwrap();
        assert!(d2.abs() < 1e-15, "anisotropy {d2} should vanish");
        let unit = SixVertexWeights::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((anisotropy(unit).unwrap() - 0.5).abs() < 1e-15);
        let degenerate = weights_from_params(params(0.0, 0.1, 0.5));
        assert!(anisotropy(degenerate).is_err());
    }

    #[test]
    fn type_numbering_and_reversal() {
        for (i, t) in VertexType::ALL.iter().enumerate() {
            assert_eq!(t.index(), i);
            assert_eq!(VertexType::from_number(t.number()).unwrap(), *t);
            assert_eq!(t.reversed().reversed(), *t);
        }
        assert!(VertexType::from_number(0).is_err());
        assert!(VertexType::from_number(7).is_err());
        assert_eq!(VertexType::T3.reversed(), VertexType::T4);
        assert_eq!(VertexType::T5.reversed(), VertexType::T6);
    }

    #[test]
    fn orientation_patterns_map_to_types_in_figure_order() {
        assert_eq!(classify_orientations(true, true, true, true), Some(VertexType::T1));
        assert_eq!(classify_orientations(false, false, false, false), Some(VertexType::T2));
        assert_eq!(classify_orientations(true, true, false, false), Some(VertexType::T3));
        assert_eq!(classify_orientations(false, false, true, true), Some(VertexType::T4));
        assert_eq!(classify_orientations(true, false, false, true), Some(VertexType::T5));
        assert_eq!(classify_orientations(false, true, true, false), Some(VertexType::T6));
        // the ten remaining patterns all violate the ice rule
        let mut valid = 0;
        for mask in 0..16u8 {
            let bit = |k: u8| mask >> k & 1 == 1;
            if classify_orientations(bit(0), bit(1), bit(2), bit(3)).is_some() {
                valid += 1;
            }
        }
        assert_eq!(valid, 6);
    }

    #[test]
    fn uniform_orientations_freeze_the_type() {
        let s = TorusSize::new(2).unwrap();
        let all_plus = SixVertexConfig::new(s, vec![true; 4], vec![true; 4]).unwrap();
        let all_minus = all_plus.reversed();
        for v2 in 0..2 {
            for v1 in 0..2 {
                assert_eq!(vertex_type(&all_plus, Vertex::new(v1, v2)), VertexType::T1);
                assert_eq!(vertex_type(&all_minus, Vertex::new(v1, v2)), VertexType::T2);
            }
        }
        let w = weights_from_params(params(0.1, 0.1, 0.5));
        assert!(rel_close(config_weight(&all_plus, w), 1.0, 1e-15));
        assert!(rel_close(config_weight(&all_minus, w), 0.24f64.powi(4), 1e-15));
    }

    #[test]
    fn ice_rule_is_enforced_at_construction() {
        let s = TorusSize::new(2).unwrap();
        let bad = SixVertexConfig::new(s, vec![true, false, false, false], vec![false; 4]);
        assert!(matches!(bad, Err(Error::IceRuleViolation { .. })));
        let wrong_len = SixVertexConfig::new(s, vec![true; 3], vec![true; 4]);
        assert!(matches!(wrong_len, Err(Error::InvalidParameters(_))));
    }

    // A hand-transcribed valid configuration on 𝕋₄ exercising all six types.
    fn sample_t4_config() -> SixVertexConfig {
        let horiz = vec![
            false, true, true, true, true, false, false, false, false, false, false, true, true,
            true, true, false,
        ];
        let vert = vec![
            true, false, false, true, false, true, false, true, true, true, false, false, false,
            true, false, true,
        ];
        SixVertexConfig::new(TorusSize::new(4).unwrap(), horiz, vert).unwrap()
    }

    #[test]
    fn classification_of_a_mixed_configuration() {
        let cfg = sample_t4_config();
        let expected: Vec<u8> = vec![5, 6, 3, 1, 6, 5, 2, 4, 5, 4, 2, 6, 6, 1, 3, 5];
        let mut got = Vec::new();
        for j in 0..4 {
            for i in 0..4 {
                got.push(vertex_type(&cfg, Vertex::new(i, j)).number());
            }
        }
        assert_eq!(got, expected);
        let w = weights_from_params(params(0.1, 0.1, 0.5));
        assert!(rel_close(config_weight(&cfg, w), 2.25e-8, 1e-12));
    }

    #[test]
    fn enumeration_counts_are_frozen() {
        assert_eq!(t2_configs().len(), 18);
        assert_eq!(t3_configs().len(), 148);
        assert!(enumerate_configs(TorusSize::new(4).unwrap()).is_err());
    }

    #[test]
    fn every_enumerated_config_balances_c_vertices() {
        for cfg in t2_configs().iter().chain(t3_configs()) {
            let n = cfg.size().n();
            let mut c5 = 0;
            let mut c6 = 0;
            for v2 in 0..n {
                for v1 in 0..n {
                    match vertex_type(cfg, Vertex::new(v1, v2)) {
                        VertexType::T5 => c5 += 1,
                        VertexType::T6 => c6 += 1,
                        _ => {}
                    }
                }
            }
            assert_eq!(c5, c6);
        }
    }

    #[test]
    fn arrow_reversal_swaps_partner_types() {
        for cfg in t2_configs() {
            let rev = cfg.reversed();
            for v2 in 0..2 {
                for v1 in 0..2 {
                    let v = Vertex::new(v1, v2);
                    assert_eq!(vertex_type(&rev, v), vertex_type(cfg, v).reversed());
                }
            }
            assert_eq!(&rev.reversed(), cfg);
        }
    }

    #[test]
    fn partition_function_frozen_values() {
        let cases = [
            (2, (0.1, 0.1, 0.5), 1.18042176),
            (3, (0.1, 0.1, 0.5), 1.0658014973533962),
            (2, (0.3, 0.4, 0.8), 2.810816160000001),
            (3, (0.3, 0.4, 0.8), 3.7280059746019076),
            (2, (0.25, 0.15, 0.6), 1.5104858625390625),
            (3, (0.25, 0.15, 0.6), 1.3148142013336732),
        ];
        for (n, (al, be, ga), expect) in cases {
            let z = partition_enumerate(
                TorusSize::new(n).unwrap(),
                weights_from_params(params(al, be, ga)),
            )
            .unwrap();
            assert!(rel_close(z, expect, 1e-13), "Z_{n}({al},{be},{ga}) = {z} != {expect}");
        }
    }

    #[test]
    fn unit_weights_count_configurations() {
        let unit = SixVertexWeights::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(partition_enumerate(TorusSize::new(2).unwrap(), unit).unwrap(), 18.0);
        assert_eq!(partition_enumerate(TorusSize::new(3).unwrap(), unit).unwrap(), 148.0);
    }

    #[test]
    fn partition_is_monotone_in_the_c_weights() {
        let s = TorusSize::new(2).unwrap();
        let lo = partition_enumerate(s, weights_from_params(params(0.1, 0.1, 0.5))).unwrap();
        let hi = partition_enumerate(s, weights_from_params(params(0.1, 0.1, 0.6))).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn partition_is_symmetric_in_alpha_beta() {
        for n in [2, 3] {
            let s = TorusSize::new(n).unwrap();
            for (al, be, ga) in [(0.3, 0.4, 0.8), (0.25, 0.15, 0.6), (0.05, 0.7, 1.1)] {
                let z1 = partition_enumerate(s, weights_from_params(params(al, be, ga))).unwrap();
                let z2 = partition_enumerate(s, weights_from_params(params(be, al, ga))).unwrap();
                assert!(rel_close(z1, z2, 1e-12), "Z({al},{be}) = {z1} vs Z({be},{al}) = {z2}");
            }
        }
    }

    #[test]
    fn event_probabilities_from_enumeration() {
        let s3 = TorusSize::new(3).unwrap();
        let w = weights_from_params(params(0.1, 0.1, 0.5));

        let empty = event_probability_enumerate(s3, w, &[]).unwrap();
        assert_eq!(empty, 1.0);

        let mut total = 0.0;
        for t in VertexType::ALL {
            total += event_probability_enumerate(s3, w, &[(Vertex::new(1, 2), t)]).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-14);

        let p1 = event_probability_enumerate(s3, w, &[(Vertex::new(0, 0), VertexType::T1)]).unwrap();
        assert!(rel_close(p1, 0.9603435896061779, 1e-13));

        let dup = event_probability_enumerate(
            s3,
            w,
            &[(Vertex::new(0, 0), VertexType::T1), (Vertex::new(3, 3), VertexType::T2)],
        );
        assert!(matches!(dup, Err(Error::DuplicateVertex { v1: 0, v2: 0 })));

        let too_big = event_probability_enumerate(TorusSize::new(4).unwrap(), w, &[]);
        assert!(matches!(too_big, Err(Error::EnumerationTooLarge { n: 4 })));
    }

    proptest! {
        #[test]
        fn c_weight_rescaling_leaves_config_weights_unchanged(
            idx in 0usize..148,
            scale in 0.2f64..5.0,
        ) {
            let cfg = &t3_configs()[idx];
            let w = weights_from_params(params(0.3, 0.4, 0.8));
            let rescaled = SixVertexWeights::new(w.a1, w.a2, w.b1, w.b2, w.c1 * scale, w.c2 / scale)
                .unwrap();
            let before = config_weight(cfg, w);
            let after = config_weight(cfg, rescaled);
            prop_assert!(rel_close(after, before, 1e-12));
        }

        #[test]
        fn reversal_preserves_total_weight_under_partner_swap(idx in 0usize..148) {
            let cfg = &t3_configs()[idx];
            let w = weights_from_params(params(0.3, 0.4, 0.8));
            // swapping the weights within each reversal pair compensates reversal
            let swapped = SixVertexWeights::new(w.a2, w.a1, w.b2, w.b1, w.c2, w.c1).unwrap();
            let direct = config_weight(&cfg.reversed(), w);
            let via_swap = config_weight(cfg, swapped);
            prop_assert!(rel_close(direct, via_swap, 1e-12));
        }
    }
}
