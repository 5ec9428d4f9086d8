//! Twisted adjacency operators on the mid-edge torus and the determinant
//! formulas built from them: partition values, inverse kernels, and
//! finite-volume correlation functions.
//!
//! Each operator acts on the free module over the canonical mid-edge basis
//! as the identity plus weighted shifts by e¹ (from horizontal mid-edges),
//! e² (from vertical mid-edges), and the half-diagonal e³ (from all). Four
//! twist sectors θ ∈ {0, 1}² multiply those weights by fractional boundary
//! phases; the signed half-sum of the four determinants reproduces the
//! six-vertex partition function, and ratios of determinants against
//! minors of the inverse operators give exact event probabilities.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{
    incident_mid_edges, mid_edge_index, mid_edges, step, Color, HalfStep, MidEdge, TorusSize,
    Vertex,
};
use crate::linalg::{det_direct, lu_factor, CMatrix};
use crate::sixvertex::{FreeFermionParams, VertexType};
use crate::snake::SnakeCounts;
use crate::sum::{CompensatedComplexSum, CompensatedSum};

/// Relative size below which a spectral-polynomial value at a root-of-unity
/// pair is treated as vanishing, making the Fourier inversion formula
/// unusable for that sector.
const SPECTRAL_SINGULAR_TOL: f64 = 1e-13;

/// A pair of boundary twists, each 0 or 1, selecting one of the four
/// determinant sectors on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Theta {
    t1: u8,
    t2: u8,
}

impl Theta {
    /// The four sectors in the fixed order (0,0), (0,1), (1,0), (1,1).
    pub const ALL: [Theta; 4] = [
        Theta { t1: 0, t2: 0 },
        Theta { t1: 0, t2: 1 },
        Theta { t1: 1, t2: 0 },
        Theta { t1: 1, t2: 1 },
    ];

    /// Builds a twist pair; each component must be 0 or 1.
    pub fn new(t1: u8, t2: u8) -> Result<Self> {
        if t1 > 1 || t2 > 1 {
            return Err(Error::InvalidParameters(format!(
                "twist components must be 0 or 1, got ({t1}, {t2})"
            )));
        }
        Ok(Theta { t1, t2 })
    }

    /// First twist component.
    pub fn t1(self) -> u8 {
        self.t1
    }

    /// Second twist component.
    pub fn t2(self) -> u8 {
        self.t2
    }
}

impl std::fmt::Display for Theta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.t1, self.t2)
    }
}

/// The twisted shift weights (α_θ, β_θ, γ_θ): the real weights times the
/// boundary phases e^{iπθ₁/n}, e^{iπθ₂/n}, and e^{iπ(θ₁+θ₂)/(2n)}.
fn twisted_weights(
    size: TorusSize,
    theta: Theta,
    params: FreeFermionParams,
) -> (Complex64, Complex64, Complex64) {
    let n = size.n() as f64;
    let alpha_t = Complex64::from_polar(params.alpha(), PI * theta.t1 as f64 / n);
    let beta_t = Complex64::from_polar(params.beta(), PI * theta.t2 as f64 / n);
    let gamma_t =
        Complex64::from_polar(params.gamma(), PI * (theta.t1 + theta.t2) as f64 / (2.0 * n));
    (alpha_t, beta_t, gamma_t)
}

/// A twisted adjacency operator stored as a dense matrix over the
/// canonical mid-edge basis.
#[derive(Debug, Clone)]
pub struct KasteleynOperator {
    size: TorusSize,
    theta: Theta,
    params: FreeFermionParams,
    matrix: CMatrix,
}

impl KasteleynOperator {
    /// Torus size the operator lives on.
    pub fn size(&self) -> TorusSize {
        self.size
    }

    /// Twist sector.
    pub fn theta(&self) -> Theta {
        self.theta
    }

    /// Weight parameters.
    pub fn params(&self) -> FreeFermionParams {
        self.params
    }

    /// Number of mid-edges, hence matrix dimension (2n²).
    pub fn dim(&self) -> usize {
        self.size.mid_edge_count()
    }

    /// The entry at a pair of mid-edges (reduced mod the torus).
    pub fn entry(&self, x: MidEdge, y: MidEdge) -> Complex64 {
        self.matrix[(mid_edge_index(self.size, x), mid_edge_index(self.size, y))]
    }

    pub(crate) fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Builds the dense twisted operator: 1 on the diagonal, α_θ from each
/// horizontal mid-edge to its east neighbour, β_θ from each vertical
/// mid-edge to its north neighbour, and γ_θ from every mid-edge along the
/// half-diagonal step.
pub fn build_k(size: TorusSize, theta: Theta, params: FreeFermionParams) -> KasteleynOperator {
    let edges = mid_edges(size);
    let mut matrix = CMatrix::zeros(edges.len());
    let (alpha_t, beta_t, gamma_t) = twisted_weights(size, theta, params);
    for (i, &x) in edges.iter().enumerate() {
        matrix[(i, i)] = Complex64::new(1.0, 0.0);
        let (unit_step, weight) = match x.color() {
            Color::Black => (HalfStep::E1, alpha_t),
            Color::White => (HalfStep::E2, beta_t),
        };
        matrix[(i, mid_edge_index(size, step(x, unit_step, Some(size))))] = weight;
        matrix[(i, mid_edge_index(size, step(x, HalfStep::E3, Some(size))))] = gamma_t;
    }
    KasteleynOperator { size, theta, params, matrix }
}

/// The signed coefficient ½·(−1)^{(θ₁+n+1)(θ₂+n+1)} weighting each sector
/// in the partition sum.
pub fn c_theta(size: TorusSize, theta: Theta) -> f64 {
    let exponent =
        (theta.t1 as i64 + size.n() + 1) * (theta.t2 as i64 + size.n() + 1);
    if exponent % 2 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// A determinant in log scale: the value is `phase · exp(log_magnitude)`
/// with `phase` on the unit circle. A zero determinant carries
/// `log_magnitude = −∞` and phase 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// Natural log of the determinant's absolute value; −∞ for zero.
    pub log_magnitude: f64,
    /// Unit-modulus phase factor.
    pub phase: Complex64,
}

impl LogDet {
    /// The log form of a zero determinant.
    pub fn zero() -> LogDet {
        LogDet { log_magnitude: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) }
    }

    /// Whether this is an exact zero.
    pub fn is_zero(self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    /// The determinant in linear scale; overflows for log-magnitudes
    /// beyond binary64 range.
    pub fn value(self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_magnitude.exp()
        }
    }
}

/// The determinant of a twisted operator by LU elimination with partial
/// pivoting, reported in log scale.
pub fn det_k(op: &KasteleynOperator) -> LogDet {
    let (log_magnitude, phase) = lu_factor(op.matrix().clone()).log_det();
    if log_magnitude == f64::NEG_INFINITY {
        LogDet::zero()
    } else {
        LogDet { log_magnitude, phase }
    }
}

/// Spectral data for one twist sector: the spectral polynomial
/// Δ_θ(w₁, w₂) = (1 + α_θw₁)(1 + β_θw₂) − γ_θ²w₁w₂ tabulated over all
/// pairs of n-th roots of unity, its product in log scale (which equals
/// the operator determinant, since the operator is shift-invariant with a
/// two-point cell), and the twisted weights.
struct SectorTables {
    size: TorusSize,
    theta: Theta,
    alpha_t: Complex64,
    beta_t: Complex64,
    gamma_t: Complex64,
    /// The n-th roots of unity e^{2πij/n}.
    roots: Vec<Complex64>,
    /// 1/Δ_θ at (roots[j], roots[k]), row-major by (j, k).
    inv_delta: Vec<Complex64>,
    det: LogDet,
    /// Whether some pair put Δ_θ at or below the singularity threshold.
    singular: bool,
}

impl SectorTables {
    fn build(size: TorusSize, theta: Theta, params: FreeFermionParams) -> SectorTables {
        let n = size.n();
        let (alpha_t, beta_t, gamma_t) = twisted_weights(size, theta, params);
        let gamma_sq = gamma_t * gamma_t;
        let roots: Vec<Complex64> =
            (0..n).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).collect();
        let scale =
            (1.0 + params.alpha()) * (1.0 + params.beta()) + params.gamma() * params.gamma();
        let tol = SPECTRAL_SINGULAR_TOL * scale;
        let one = Complex64::new(1.0, 0.0);
        let mut inv_delta = vec![Complex64::new(0.0, 0.0); (n * n) as usize];
        let mut log_magnitude = CompensatedSum::new();
        let mut phase = one;
        let mut singular = false;
        let mut exact_zero = false;
        for j in 0..n {
            for k in 0..n {
                let delta = (one + alpha_t * roots[j as usize]) * (one + beta_t * roots[k as usize])
                    - gamma_sq * roots[j as usize] * roots[k as usize];
                let mag = delta.norm();
                if mag <= tol {
                    singular = true;
                }
                if mag == 0.0 {
                    exact_zero = true;
                    continue;
                }
                inv_delta[(j * n + k) as usize] = delta.inv();
                log_magnitude.add(mag.ln());
                phase *= delta / mag;
                phase /= phase.norm();
            }
        }
        let det = if exact_zero {
            LogDet::zero()
        } else {
            LogDet { log_magnitude: log_magnitude.total(), phase }
        };
        SectorTables { size, theta, alpha_t, beta_t, gamma_t, roots, inv_delta, det, singular }
    }

    /// One entry of the inverse operator by the explicit double Fourier
    /// sum. The same-color numerators are 1 + β_θw₂ (both horizontal) and
    /// 1 + α_θw₁ (both vertical); mixed pairs carry −γ_θ(w₁w₂)^{1/2},
    /// whose half powers combine with the half-integer coordinate
    /// differences so that only integer root powers ever appear.
    fn inverse_entry(&self, x: MidEdge, y: MidEdge) -> Complex64 {
        let n = self.size.n();
        let xr = x.reduce(self.size);
        let yr = y.reduce(self.size);
        let diff1 = xr.d1 - yr.d1;
        let diff2 = xr.d2 - yr.d2;
        let colors = (xr.color(), yr.color());
        let (p1, p2) = if colors.0 == colors.1 {
            (diff1 / 2, diff2 / 2)
        } else {
            ((diff1 + 1) / 2, (diff2 + 1) / 2)
        };
        let one = Complex64::new(1.0, 0.0);
        let mut acc = CompensatedComplexSum::new();
        for j in 0..n {
            for k in 0..n {
                let numerator = match colors {
                    (Color::Black, Color::Black) => one + self.beta_t * self.roots[k as usize],
                    (Color::White, Color::White) => one + self.alpha_t * self.roots[j as usize],
                    _ => -self.gamma_t,
                };
                let power = (j * p1 + k * p2).rem_euclid(n) as usize;
                acc.add(self.roots[power] * numerator * self.inv_delta[(j * n + k) as usize]);
            }
        }
        acc.total() / (n * n) as f64
    }
}

/// The operator determinant as the product of the spectral polynomial over
/// all n² pairs of n-th roots of unity — O(n²), no elimination, same value
/// as [`det_k`]. Kept as the cross-check route for the elimination path.
#[allow(dead_code)]
pub(crate) fn det_k_spectral(
    size: TorusSize,
    theta: Theta,
    params: FreeFermionParams,
) -> LogDet {
    SectorTables::build(size, theta, params).det
}

/// Combines four sector determinants into log Z, factoring out the largest
/// magnitude. Fails if everything cancels, if a spurious imaginary part
/// survives, or if the result is not positive.
fn assemble_log_partition(size: TorusSize, dets: &[LogDet; 4]) -> Result<f64> {
    let mut peak = f64::NEG_INFINITY;
    for d in dets {
        if !d.is_zero() {
            peak = peak.max(d.log_magnitude);
        }
    }
    if peak == f64::NEG_INFINITY {
        return Err(Error::AccuracyLoss("all four twisted determinants vanish".into()));
    }
    let mut total = CompensatedComplexSum::new();
    let mut largest = 0.0f64;
    for (d, th) in dets.iter().zip(Theta::ALL) {
        if d.is_zero() {
            continue;
        }
        let term = d.phase * (c_theta(size, th) * (d.log_magnitude - peak).exp());
        largest = largest.max(term.norm());
        total.add(term);
    }
    let tot = total.total();
    if tot.norm() < 1e-12 * largest {
        return Err(Error::AccuracyLoss(
            "the four twisted determinants cancel to below 1e-12 of their size".into(),
        ));
    }
    if tot.im.abs() > 1e-10 * tot.norm() {
        return Err(Error::AccuracyLoss(format!(
            "imaginary residue {:.3e} relative in the determinant assembly",
            tot.im.abs() / tot.norm()
        )));
    }
    if tot.re <= 0.0 {
        return Err(Error::AccuracyLoss(
            "determinant assembly produced a non-positive partition value".into(),
        ));
    }
    Ok(peak + tot.re.ln())
}

/// The partition function as the signed half-sum of the four twisted
/// determinants, Σ_θ c_θ det K_θ, each computed by dense LU elimination.
pub fn partition_kasteleyn(size: TorusSize, params: FreeFermionParams) -> Result<f64> {
    log_partition_kasteleyn(size, params).map(f64::exp)
}

/// The natural log of [`partition_kasteleyn`]; stays finite on tori large
/// enough that the linear value would overflow.
pub fn log_partition_kasteleyn(size: TorusSize, params: FreeFermionParams) -> Result<f64> {
    let dets: Vec<LogDet> =
        Theta::ALL.par_iter().map(|&theta| det_k(&build_k(size, theta, params))).collect();
    assemble_log_partition(size, &[dets[0], dets[1], dets[2], dets[3]])
}

/// One entry of the inverse twisted operator, K_θ⁻¹(x, y), via the double
/// Fourier sum over pairs of n-th roots of unity.
///
/// Fails with [`Error::SingularSpectralPoint`] when the spectral
/// polynomial vanishes at some root pair; callers holding a determinant
/// weight for the sector may instead fall back to dense inversion, as
/// [`corr_finite`] does.
pub fn k_inverse_entry(
    size: TorusSize,
    theta: Theta,
    params: FreeFermionParams,
    x: MidEdge,
    y: MidEdge,
) -> Result<Complex64> {
    let tables = SectorTables::build(size, theta, params);
    if tables.singular {
        return Err(Error::SingularSpectralPoint { t1: theta.t1, t2: theta.t2 });
    }
    Ok(tables.inverse_entry(x, y))
}

/// The probability, under the signed measure whose partition value the
/// determinants compute, that a random mid-edge permutation maps each
/// source xⁱ to its target yⁱ.
///
/// Each displacement yⁱ − xⁱ must reduce to 0, e¹, e², or e³ on the torus
/// and the sources must be distinct. The value is
/// Π K₀₀(xⁱ, yⁱ) · Σ_θ (c_θ det K_θ / Z) q_θ det[K_θ⁻¹(yⁱ, xʲ)], where
/// q_θ carries the boundary phase of the total displacement; per-pair
/// displacements are reduced mod the torus before entering that total,
/// which is what keeps the twisted sectors consistent with wrapped pairs.
pub fn corr_finite(
    size: TorusSize,
    params: FreeFermionParams,
    pairs: &[(MidEdge, MidEdge)],
) -> Result<f64> {
    let twice = size.doubled();
    let mut sources = HashSet::new();
    let mut prefactor = 1.0f64;
    let mut sum_d1 = 0i64;
    let mut sum_d2 = 0i64;
    let mut reduced: Vec<(MidEdge, MidEdge)> = Vec::with_capacity(pairs.len());
    for &(x, y) in pairs {
        let xr = x.reduce(size);
        let yr = y.reduce(size);
        if !sources.insert((xr.d1, xr.d2)) {
            return Err(Error::InvalidParameters(format!(
                "correlation sources must be distinct mid-edges; ({}, {}) repeats",
                xr.d1, xr.d2
            )));
        }
        let d1 = (yr.d1 - xr.d1).rem_euclid(twice);
        let d2 = (yr.d2 - xr.d2).rem_euclid(twice);
        prefactor *= match (d1, d2) {
            (0, 0) => 1.0,
            (2, 0) => params.alpha(),
            (0, 2) => params.beta(),
            (1, 1) => params.gamma(),
            _ => {
                return Err(Error::InvalidParameters(format!(
                    "pair displacement ({d1}, {d2})/2 on the torus is none of 0, e1, e2, e3"
                )))
            }
        };
        sum_d1 += d1;
        sum_d2 += d2;
        reduced.push((xr, yr));
    }

    let sectors: Vec<SectorTables> =
        Theta::ALL.iter().map(|&theta| SectorTables::build(size, theta, params)).collect();
    let dets = [sectors[0].det, sectors[1].det, sectors[2].det, sectors[3].det];
    let log_z = assemble_log_partition(size, &dets)?;

    let k = reduced.len();
    let mut total = CompensatedComplexSum::new();
    for tables in &sectors {
        if tables.det.is_zero() {
            continue; // weighted by det/Z = 0
        }
        // A sector can in principle sit at a spectral zero while its
        // determinant survives the exact-zero test; dense inversion still
        // works there as long as elimination finds its pivots.
        let dense_inverse = if tables.singular {
            match lu_factor(build_k(size, tables.theta, params).matrix().clone()).inverse() {
                Ok(inv) => Some(inv),
                Err(_) => continue,
            }
        } else {
            None
        };
        let mut minor = CMatrix::zeros(k);
        for (i, &(_, y)) in reduced.iter().enumerate() {
            for (j, &(x, _)) in reduced.iter().enumerate() {
                minor[(i, j)] = match &dense_inverse {
                    Some(inv) => inv[(mid_edge_index(size, y), mid_edge_index(size, x))],
                    None => tables.inverse_entry(y, x),
                };
            }
        }
        let weight = tables.det.phase
            * (c_theta(size, tables.theta) * (tables.det.log_magnitude - log_z).exp());
        let boundary_phase = Complex64::from_polar(
            1.0,
            PI * (tables.theta.t1 as i64 * sum_d1 + tables.theta.t2 as i64 * sum_d2) as f64
                / twice as f64,
        );
        total.add(weight * boundary_phase * det_direct(&minor));
    }
    let value = total.total() * prefactor;
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::AccuracyLoss(format!(
            "correlation value kept an imaginary residue of {:.3e}",
            value.im.abs()
        )));
    }
    Ok(value.re)
}

/// The probability that each listed vertex carries its listed type,
/// computed from [`corr_finite`] by pinning the images of the west and
/// south mid-edges of every constrained vertex.
///
/// Types 1 and 3–6 pin both images directly; type 2 is realised by two
/// image patterns (bonds crossed or uncrossed), so the probability is a
/// sum over one pattern choice per type-2 vertex.
pub fn vertex_event_finite(
    size: TorusSize,
    params: FreeFermionParams,
    constraints: &[(Vertex, VertexType)],
) -> Result<f64> {
    let mut seen = HashSet::new();
    for &(v, _) in constraints {
        let r = v.reduce(size);
        if !seen.insert((r.v1, r.v2)) {
            return Err(Error::DuplicateVertex { v1: r.v1, v2: r.v2 });
        }
    }
    let mut variants: Vec<Vec<(MidEdge, MidEdge)>> = vec![Vec::new()];
    for &(v, t) in constraints {
        let inc = incident_mid_edges(v.reduce(size), Some(size));
        let (w, s, e, n) = (inc.west, inc.south, inc.east, inc.north);
        let realizations: Vec<[(MidEdge, MidEdge); 2]> = match t {
            VertexType::T1 => vec![[(w, w), (s, s)]],
            VertexType::T2 => vec![[(w, n), (s, e)], [(w, e), (s, n)]],
            VertexType::T3 => vec![[(w, w), (s, n)]],
            VertexType::T4 => vec![[(w, e), (s, s)]],
            VertexType::T5 => vec![[(w, w), (s, e)]],
            VertexType::T6 => vec![[(w, n), (s, s)]],
        };
        let mut extended = Vec::with_capacity(variants.len() * realizations.len());
        for base in &variants {
            for realization in &realizations {
                let mut pairs = base.clone();
                pairs.extend_from_slice(realization);
                extended.push(pairs);
            }
        }
        variants = extended;
    }
    let mut acc = CompensatedSum::new();
    for pairs in &variants {
        acc.add(corr_finite(size, params, pairs)?);
    }
    Ok(acc.total())
}

/// The four-sector phase sum matching the sign of a generalised snake:
/// Σ_θ c_θ · exp(iπ[θ₁(2A + C) + θ₂(2B + C)] / (2n)) equals
/// sgn(ρ̄)(−1)^S for any snake with step counts (A, B, C) and S crossings,
/// which is what lets signed snake weights reassemble into determinants.
pub fn sector_sign_sum(size: TorusSize, counts: SnakeCounts) -> Complex64 {
    let twice = size.doubled();
    let mut total = CompensatedComplexSum::new();
    for theta in Theta::ALL {
        let numerator = theta.t1 as i64 * (2 * counts.a as i64 + counts.c as i64)
            + theta.t2 as i64 * (2 * counts.b as i64 + counts.c as i64);
        let phase = Complex64::from_polar(1.0, PI * numerator as f64 / twice as f64);
        total.add(phase * c_theta(size, theta));
    }
    total.total()
}
