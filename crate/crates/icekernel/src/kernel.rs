//! Infinite-volume machinery: the spectral polynomial Δ, the
//! contour-integral kernel L assembled from its Fourier coefficients,
//! k-point vertex-type correlations on the full plane, vertex polynomials,
//! and vertex-type frequency integrals.
//!
//! Everything here reduces to the primitive
//! Φ(m₁, m₂) = ∮∮ w₁^{m₁} w₂^{m₂} / Δ(w₁, w₂) · dw₁ dw₂ / (2πi w₁)(2πi w₂),
//! the (−m₁, −m₂) Fourier coefficient of 1/Δ on the unit torus. Two
//! independent quadrature backends compute it: a uniform product grid
//! (exact Fourier projection up to aliasing, geometrically convergent when
//! Δ is zero-free on the torus) and a residue-reduced backend that
//! evaluates the w₂ contour integral analytically and quadratures only in
//! w₁, splitting the circle at the angles where Δ's w₂-root crosses the
//! unit circle. The residue route stays valid when Δ has isolated zeros
//! on the torus, where the grid backend's spectral guard refuses.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kasteleyn::vertex_event_finite;
use crate::lattice::{incident_mid_edges, Color, MidEdge, TorusSize, Vertex};
use crate::linalg::{det_direct, CMatrix};
use crate::sixvertex::{weights_from_params, FreeFermionParams, VertexType};
use crate::sum::CompensatedComplexSum;

/// A point (w₁, w₂) on the unit torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    w1: Complex64,
    w2: Complex64,
}

impl SpectralPoint {
    /// Builds a spectral point; both coordinates must sit on the unit
    /// circle to within 10⁻¹⁴.
    pub fn new(w1: Complex64, w2: Complex64) -> Result<Self> {
        for (name, w) in [("w1", w1), ("w2", w2)] {
            if (w.norm() - 1.0).abs() > 1e-14 {
                return Err(Error::InvalidParameters(format!(
                    "{name} = {w} is off the unit circle by {:.3e}",
                    (w.norm() - 1.0).abs()
                )));
            }
        }
        Ok(SpectralPoint { w1, w2 })
    }

    /// The point (e^{iφ₁}, e^{iφ₂}).
    pub fn from_angles(phi1: f64, phi2: f64) -> Self {
        SpectralPoint {
            w1: Complex64::from_polar(1.0, phi1),
            w2: Complex64::from_polar(1.0, phi2),
        }
    }

    /// First coordinate.
    pub fn w1(self) -> Complex64 {
        self.w1
    }

    /// Second coordinate.
    pub fn w2(self) -> Complex64 {
        self.w2
    }
}

/// Integer exponents of w₁ and w₂ after half-power cancellation. The type
/// is what guarantees that no fractional power is ever evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FourierIndex {
    /// Exponent of w₁.
    pub m1: i64,
    /// Exponent of w₂.
    pub m2: i64,
}

impl FourierIndex {
    /// Plain constructor.
    pub fn new(m1: i64, m2: i64) -> Self {
        FourierIndex { m1, m2 }
    }
}

/// The data determining one kernel entry: the displacement y − x (stored
/// doubled, so half-integers stay exact) and the colors of both
/// mid-edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelEntrySpec {
    delta1: i64,
    delta2: i64,
    cx: Color,
    cy: Color,
}

impl KernelEntrySpec {
    /// Builds an entry spec, checking that the displacement parity matches
    /// the color pair: equal colors force even doubled deltas, mixed
    /// colors force odd ones.
    pub fn new(delta1: i64, delta2: i64, cx: Color, cy: Color) -> Result<Self> {
        let expect_odd = cx != cy;
        if (delta1.rem_euclid(2) == 1) != expect_odd || (delta2.rem_euclid(2) == 1) != expect_odd {
            return Err(Error::InvalidParameters(format!(
                "doubled displacement ({delta1}, {delta2}) has the wrong parity for colors \
                 ({cx:?}, {cy:?})"
            )));
        }
        Ok(KernelEntrySpec { delta1, delta2, cx, cy })
    }

    /// The spec for the pair (x, y); the parity invariant holds
    /// automatically for valid mid-edges.
    pub fn from_points(x: MidEdge, y: MidEdge) -> Self {
        KernelEntrySpec { delta1: y.d1 - x.d1, delta2: y.d2 - x.d2, cx: x.color(), cy: y.color() }
    }

    /// Doubled first displacement component.
    pub fn delta1(self) -> i64 {
        self.delta1
    }

    /// Doubled second displacement component.
    pub fn delta2(self) -> i64 {
        self.delta2
    }

    /// Color of the source point.
    pub fn cx(self) -> Color {
        self.cx
    }

    /// Color of the target point.
    pub fn cy(self) -> Color {
        self.cy
    }
}

/// Controls for the Fourier-coefficient quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    initial_grid: usize,
    max_grid: usize,
    rel_tol: f64,
    min_abs_delta_guard: f64,
}

impl QuadratureConfig {
    /// Builds a config; grids must be powers of two with initial ≤ max,
    /// and both tolerances positive.
    pub fn new(
        initial_grid: usize,
        max_grid: usize,
        rel_tol: f64,
        min_abs_delta_guard: f64,
    ) -> Result<Self> {
        if !initial_grid.is_power_of_two() || !max_grid.is_power_of_two() {
            return Err(Error::InvalidParameters(format!(
                "grid sizes must be powers of two, got {initial_grid} and {max_grid}"
            )));
        }
        if initial_grid > max_grid {
            return Err(Error::InvalidParameters(format!(
                "initial grid {initial_grid} exceeds max grid {max_grid}"
            )));
        }
        if !(rel_tol > 0.0 && rel_tol.is_finite()) || !(min_abs_delta_guard > 0.0 && min_abs_delta_guard.is_finite())
        {
            return Err(Error::InvalidParameters(
                "quadrature tolerances must be positive and finite".into(),
            ));
        }
        Ok(QuadratureConfig { initial_grid, max_grid, rel_tol, min_abs_delta_guard })
    }

    /// Starting grid / quadrature order.
    pub fn initial_grid(self) -> usize {
        self.initial_grid
    }

    /// Largest grid / quadrature order before giving up.
    pub fn max_grid(self) -> usize {
        self.max_grid
    }

    /// Relative tolerance between successive refinements.
    pub fn rel_tol(self) -> f64 {
        self.rel_tol
    }

    /// Smallest |Δ| tolerated on a sampling grid.
    pub fn min_abs_delta_guard(self) -> f64 {
        self.min_abs_delta_guard
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { initial_grid: 64, max_grid: 4096, rel_tol: 1e-9, min_abs_delta_guard: 1e-6 }
    }
}

/// The spectral polynomial Δ(w₁, w₂) = (1 + αw₁)(1 + βw₂) − γ²w₁w₂.
pub fn delta_poly(params: FreeFermionParams, w: SpectralPoint) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    (one + params.alpha() * w.w1) * (one + params.beta() * w.w2)
        - params.gamma() * params.gamma() * w.w1 * w.w2
}

/// The numerator recipe of one entry of M⁻¹·Δ, by color pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseNumerator {
    /// Both horizontal: 1 + β·w₂.
    OnePlusBetaW2,
    /// Both vertical: 1 + α·w₁.
    OnePlusAlphaW1,
    /// Mixed colors: −γ·(w₁w₂)^{1/2}; the half powers never get
    /// evaluated — they cancel against half-integer displacement
    /// exponents, which is what [`FourierIndex`] encodes.
    MinusGammaHalfPowers,
}

impl InverseNumerator {
    /// Evaluates the integer-power part of the numerator (for the mixed
    /// recipe that is the bare −γ prefactor).
    pub fn evaluate(self, params: FreeFermionParams, w: SpectralPoint) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        match self {
            InverseNumerator::OnePlusBetaW2 => one + params.beta() * w.w2,
            InverseNumerator::OnePlusAlphaW1 => one + params.alpha() * w.w1,
            InverseNumerator::MinusGammaHalfPowers => Complex64::new(-params.gamma(), 0.0),
        }
    }

    /// Whether the recipe carries the cancelled (w₁w₂)^{1/2} marker.
    pub fn has_half_powers(self) -> bool {
        self == InverseNumerator::MinusGammaHalfPowers
    }
}

/// The numerator of [M⁻¹]_{cx,cy} over Δ.
pub fn m_inverse_numerator(cx: Color, cy: Color) -> InverseNumerator {
    match (cx, cy) {
        (Color::Black, Color::Black) => InverseNumerator::OnePlusBetaW2,
        (Color::White, Color::White) => InverseNumerator::OnePlusAlphaW1,
        _ => InverseNumerator::MinusGammaHalfPowers,
    }
}

/// The invariants deciding whether Δ vanishes on the unit torus:
/// P = 1 + α² − β² − (αβ − γ²)² and Q = 2(α(1 − β²) + βγ²). Writing
/// Δ(w₁, ·) = u + v·w₂, one has |u|² − |v|² = P + Q·cos φ₁, so zeros exist
/// exactly when |P| ≤ Q, sitting over the angles with cos φ₁ = −P/Q.
fn zero_free_invariants(p: FreeFermionParams) -> (f64, f64) {
    let (a, b, g) = (p.alpha(), p.beta(), p.gamma());
    let cross = a * b - g * g;
    let big_p = 1.0 + a * a - b * b - cross * cross;
    let big_q = 2.0 * (a * (1.0 - b * b) + b * g * g);
    (big_p, big_q)
}

/// A lower bound on min |Δ| over the unit torus; non-positive when the
/// torus carries zeros.
pub(crate) fn torus_zero_margin(p: FreeFermionParams) -> f64 {
    let (big_p, big_q) = zero_free_invariants(p);
    let envelope = 1.0
        + p.alpha()
        + p.beta()
        + (p.alpha() * p.beta() - p.gamma() * p.gamma()).abs();
    (big_p.abs() - big_q) / envelope
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct PhiKey {
    params: [u64; 3],
    m1: i64,
    m2: i64,
    cfg: [u64; 4],
}

fn phi_cache() -> &'static RwLock<HashMap<PhiKey, Complex64>> {
    static CACHE: OnceLock<RwLock<HashMap<PhiKey, Complex64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn phi_key(params: FreeFermionParams, idx: FourierIndex, q: &QuadratureConfig) -> PhiKey {
    PhiKey {
        params: [params.alpha().to_bits(), params.beta().to_bits(), params.gamma().to_bits()],
        m1: idx.m1,
        m2: idx.m2,
        cfg: [
            q.initial_grid as u64,
            q.max_grid as u64,
            q.rel_tol.to_bits(),
            q.min_abs_delta_guard.to_bits(),
        ],
    }
}

/// The Fourier primitive Φ(m₁, m₂), memoized per (parameters, index,
/// quadrature config). The backend is chosen automatically: the product
/// grid when Δ is comfortably zero-free on the torus, the residue-reduced
/// route otherwise.
pub fn phi_coeff(
    params: FreeFermionParams,
    idx: FourierIndex,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let key = phi_key(params, idx, q);
    if let Some(&hit) = phi_cache().read().expect("phi cache poisoned").get(&key) {
        return Ok(hit);
    }
    let margin = torus_zero_margin(params);
    let value = if margin > (10.0 * q.min_abs_delta_guard).max(1e-4) {
        phi_coeff_grid(params, idx, q)?
    } else {
        phi_coeff_residue(params, idx, q)?
    };
    phi_cache().write().expect("phi cache poisoned").insert(key, value);
    Ok(value)
}

/// Grid backend: the mean of w₁^{m₁}w₂^{m₂}/Δ over an M×M product grid of
/// unit roots, doubling M until successive estimates agree to the
/// relative tolerance. Exact Fourier projection up to aliasing;
/// geometric convergence when Δ is zero-free on the torus.
pub fn phi_coeff_grid(
    params: FreeFermionParams,
    idx: FourierIndex,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let mut grid = q.initial_grid;
    let mut prev: Option<Complex64> = None;
    loop {
        let est = grid_estimate(params, idx, grid, q.min_abs_delta_guard)?;
        if let Some(p) = prev {
            if (est - p).norm() <= q.rel_tol * est.norm().max(1.0) {
                return Ok(est);
            }
        }
        if grid >= q.max_grid {
            return Err(Error::QuadratureFailure(format!(
                "Fourier coefficient ({}, {}) did not converge by grid {grid}; last estimate {est}",
                idx.m1, idx.m2
            )));
        }
        prev = Some(est);
        grid *= 2;
    }
}

fn grid_estimate(
    params: FreeFermionParams,
    idx: FourierIndex,
    grid: usize,
    guard: f64,
) -> Result<Complex64> {
    let m = grid as i64;
    let roots: Vec<Complex64> =
        (0..m).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect();
    let one = Complex64::new(1.0, 0.0);
    let (alpha, beta) = (params.alpha(), params.beta());
    let gamma_sq = params.gamma() * params.gamma();
    let mut acc = CompensatedComplexSum::new();
    for j in 0..m {
        let left = one + alpha * roots[j as usize];
        for k in 0..m {
            let delta =
                left * (one + beta * roots[k as usize]) - gamma_sq * roots[j as usize] * roots[k as usize];
            let mag = delta.norm();
            if mag < guard {
                return Err(Error::QuadratureFailure(format!(
                    "spectral guard tripped: |Δ| = {mag:.3e} below {guard:.1e} at grid point \
                     ({}, {})",
                    roots[j as usize], roots[k as usize]
                )));
            }
            let power = (j * idx.m1 + k * idx.m2).rem_euclid(m) as usize;
            acc.add(roots[power] / delta);
        }
    }
    Ok(acc.total() / (m * m) as f64)
}

/// Residue backend: the w₂ integral done analytically — Δ is linear in
/// w₂, contributing its single simple pole when that pole lies inside the
/// unit circle, plus the pole at the origin for m₂ ≤ 0 — followed by
/// Gauss–Legendre quadrature in the w₁ angle. The circle is split at the
/// angles where the w₂-pole crosses the unit circle (the torus zeros of
/// Δ), across which the integrand jumps; each arc is smooth.
pub fn phi_coeff_residue(
    params: FreeFermionParams,
    idx: FourierIndex,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let (big_p, big_q) = zero_free_invariants(params);
    if big_q.abs() < 1e-14 && big_p.abs() < 1e-14 {
        return Err(Error::QuadratureFailure(
            "the spectral polynomial vanishes along an entire torus circle; the integral has no \
             quadrature here"
                .into(),
        ));
    }
    let mut boundaries = vec![0.0, 2.0 * PI];
    if big_q > 0.0 && big_p.abs() <= big_q {
        let phi_star = (-big_p / big_q).clamp(-1.0, 1.0).acos();
        for cut in [phi_star, 2.0 * PI - phi_star] {
            if cut > 1e-12 && cut < 2.0 * PI - 1e-12 {
                boundaries.push(cut);
            }
        }
    }
    boundaries.sort_by(f64::total_cmp);
    boundaries.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut order = q.initial_grid;
    let mut prev: Option<Complex64> = None;
    loop {
        let mut acc = CompensatedComplexSum::new();
        for window in boundaries.windows(2) {
            arc_integral(params, idx, window[0], window[1], order, &mut acc);
        }
        let est = acc.total() / (2.0 * PI);
        if let Some(p) = prev {
            if (est - p).norm() <= q.rel_tol * est.norm().max(1.0) {
                return Ok(est);
            }
        }
        if order >= q.max_grid {
            return Err(Error::QuadratureFailure(format!(
                "Fourier coefficient ({}, {}) did not converge by quadrature order {order}; last \
                 estimate {est}",
                idx.m1, idx.m2
            )));
        }
        prev = Some(est);
        order *= 2;
    }
}

fn arc_integral(
    params: FreeFermionParams,
    idx: FourierIndex,
    lo: f64,
    hi: f64,
    order: usize,
    acc: &mut CompensatedComplexSum,
) {
    let table = gauss_legendre_cached(order);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    for (&node, &weight) in table.0.iter().zip(table.1.iter()) {
        let phi = mid + half * node;
        acc.add(residue_integrand(params, idx, phi) * (weight * half));
    }
}

/// e^{im₁φ} times the exact w₂ contour integral at w₁ = e^{iφ}.
fn residue_integrand(params: FreeFermionParams, idx: FourierIndex, phi: f64) -> Complex64 {
    let w1 = Complex64::from_polar(1.0, phi);
    let one = Complex64::new(1.0, 0.0);
    let u = one + params.alpha() * w1;
    let v = params.beta()
        + (params.alpha() * params.beta() - params.gamma() * params.gamma()) * w1;
    let m2 = idx.m2;
    let mut inner = Complex64::new(0.0, 0.0);
    if v.norm() == 0.0 {
        // Δ degenerates to u alone; only the m₂ = 0 coefficient survives.
        if m2 == 0 {
            inner = u.inv();
        }
    } else {
        if m2 <= 0 {
            inner += u.inv() * (-v / u).powi((-m2) as i32);
        }
        let pole = -u / v;
        if pole.norm() < 1.0 {
            inner += pole.powi((m2 - 1) as i32) / v;
        }
    }
    inner * Complex64::from_polar(1.0, idx.m1 as f64 * phi)
}

/// Gauss–Legendre nodes and weights on [−1, 1], computed by Newton
/// iteration on the Legendre recurrence and cached per order.
fn gauss_legendre_cached(order: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature table cache poisoned");
    guard.entry(order).or_insert_with(|| Arc::new(gauss_legendre(order))).clone()
}

fn legendre_and_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0f64;
    let mut curr = x;
    for k in 2..=order {
        let next = ((2 * k - 1) as f64 * x * curr - (k - 1) as f64 * prev) / k as f64;
        prev = curr;
        curr = next;
    }
    let derivative = order as f64 * (x * curr - prev) / (x * x - 1.0);
    (curr, derivative)
}

fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    for i in 0..(order + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(order, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(order, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// One entry of the infinite-volume kernel, assembled from Φ with the
/// half-power cancellation built in:
/// (B,B) ↦ Φ(Δ₁, Δ₂) + β·Φ(Δ₁, Δ₂+1); (W,W) ↦ Φ(Δ₁, Δ₂) + α·Φ(Δ₁+1, Δ₂);
/// mixed ↦ −γ·Φ(Δ₁+½, Δ₂+½); with Δ = y − x (half-integers in the mixed
/// case, so every index reaching Φ is an integer).
pub fn kernel_entry(
    params: FreeFermionParams,
    spec: &KernelEntrySpec,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    let (d1, d2) = (spec.delta1, spec.delta2);
    match (spec.cx, spec.cy) {
        (Color::Black, Color::Black) => {
            let base = phi_coeff(params, FourierIndex::new(d1 / 2, d2 / 2), q)?;
            let shifted = phi_coeff(params, FourierIndex::new(d1 / 2, d2 / 2 + 1), q)?;
            Ok(base + params.beta() * shifted)
        }
        (Color::White, Color::White) => {
            let base = phi_coeff(params, FourierIndex::new(d1 / 2, d2 / 2), q)?;
            let shifted = phi_coeff(params, FourierIndex::new(d1 / 2 + 1, d2 / 2), q)?;
            Ok(base + params.alpha() * shifted)
        }
        _ => {
            let shifted = phi_coeff(params, FourierIndex::new((d1 + 1) / 2, (d2 + 1) / 2), q)?;
            Ok(-params.gamma() * shifted)
        }
    }
}

/// The kernel L(x, y) for mid-edges of the infinite lattice. Depends on
/// (x, y) only through (y − x, colors), so translation invariance is
/// structural.
pub fn kernel_l(
    params: FreeFermionParams,
    x: MidEdge,
    y: MidEdge,
    q: &QuadratureConfig,
) -> Result<Complex64> {
    kernel_entry(params, &KernelEntrySpec::from_points(x, y), q)
}

/// The source and target mid-edge lists of a constraint set: per vertex vⁱ
/// the sources are (W, S); the targets are the type's pinned images,
/// t = 1 ↦ (W, S), 2 ↦ (N, E), 3 ↦ (W, N), 4 ↦ (E, S), 5 ↦ (W, E),
/// 6 ↦ (N, S).
pub fn assemble_points(
    constraints: &[(Vertex, VertexType)],
) -> Result<(Vec<MidEdge>, Vec<MidEdge>)> {
    let mut seen = HashSet::new();
    let mut xs = Vec::with_capacity(2 * constraints.len());
    let mut ys = Vec::with_capacity(2 * constraints.len());
    for &(v, t) in constraints {
        if !seen.insert((v.v1, v.v2)) {
            return Err(Error::DuplicateVertex { v1: v.v1, v2: v.v2 });
        }
        let inc = incident_mid_edges(v, None);
        xs.push(inc.west);
        xs.push(inc.south);
        let (y1, y2) = match t {
            VertexType::T1 => (inc.west, inc.south),
            VertexType::T2 => (inc.north, inc.east),
            VertexType::T3 => (inc.west, inc.north),
            VertexType::T4 => (inc.east, inc.south),
            VertexType::T5 => (inc.west, inc.east),
            VertexType::T6 => (inc.north, inc.south),
        };
        ys.push(y1);
        ys.push(y2);
    }
    Ok((xs, ys))
}

/// A correlation value together with what post-processing did to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    /// The returned probability (clamped into [0, 1] when marginally out).
    pub value: f64,
    /// The raw real part before clamping.
    pub raw: f64,
    /// Whether clamping changed the value.
    pub clamped: bool,
    /// |imaginary part| of the assembled determinant product.
    pub imaginary_residue: f64,
}

/// The full working of one correlation: the assembled points, every
/// kernel entry, the 2k×2k determinant, the weight prefactor, and the
/// final report.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationDetail {
    /// Source mid-edges, two per constrained vertex.
    pub xs: Vec<MidEdge>,
    /// Target mid-edges, two per constrained vertex.
    pub ys: Vec<MidEdge>,
    /// Kernel values, `entries[i][j] = L(xs[i], ys[j])`.
    pub entries: Vec<Vec<Complex64>>,
    /// det of the entry matrix.
    pub determinant: Complex64,
    /// Product of the constrained types' weights.
    pub prefactor: f64,
    /// The resulting probability and its post-processing flags.
    pub report: CorrelationReport,
}

/// The infinite-volume probability that each listed vertex carries its
/// listed type: (Π a_{tᵢ}) · det[L(xⁱ, yʲ)], with points from
/// [`assemble_points`] — returned with its full working.
pub fn correlation_detail(
    params: FreeFermionParams,
    constraints: &[(Vertex, VertexType)],
    q: &QuadratureConfig,
) -> Result<CorrelationDetail> {
    let (xs, ys) = assemble_points(constraints)?;
    let dim = xs.len();
    let mut matrix = CMatrix::zeros(dim);
    let mut entries = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let entry = kernel_l(params, x, y, q)?;
            matrix[(i, j)] = entry;
            entries[i][j] = entry;
        }
    }
    let weights = weights_from_params(params);
    let mut prefactor = 1.0f64;
    for &(_, t) in constraints {
        prefactor *= weights.of_type(t);
    }
    let determinant = det_direct(&matrix);
    let full = determinant * prefactor;
    let imaginary_residue = full.im.abs();
    if imaginary_residue > 1e-9 {
        return Err(Error::AccuracyLoss(format!(
            "correlation determinant kept an imaginary residue of {imaginary_residue:.3e}"
        )));
    }
    let raw = full.re;
    let (value, clamped) = if raw < 0.0 && raw >= -1e-9 {
        (0.0, true)
    } else if raw > 1.0 && raw <= 1.0 + 1e-9 {
        (1.0, true)
    } else {
        (raw, false)
    };
    let report = CorrelationReport { value, raw, clamped, imaginary_residue };
    Ok(CorrelationDetail { xs, ys, entries, determinant, prefactor, report })
}

/// The report alone from [`correlation_detail`].
pub fn correlation_report(
    params: FreeFermionParams,
    constraints: &[(Vertex, VertexType)],
    q: &QuadratureConfig,
) -> Result<CorrelationReport> {
    correlation_detail(params, constraints, q).map(|d| d.report)
}

/// The probability from [`correlation_report`], as a bare number.
pub fn correlation(
    params: FreeFermionParams,
    constraints: &[(Vertex, VertexType)],
    q: &QuadratureConfig,
) -> Result<f64> {
    correlation_report(params, constraints, q).map(|r| r.value)
}

/// The vertex polynomial f_t at (w₁, w₂, w̃₁, w̃₂), evaluated from the
/// printed closed forms.
pub fn vertex_poly(
    t: VertexType,
    w: SpectralPoint,
    wt: SpectralPoint,
    params: FreeFermionParams,
) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let (a, b) = (params.alpha(), params.beta());
    let g2 = params.gamma() * params.gamma();
    let (w1, w2) = (w.w1, w.w2);
    let (t1, t2) = (wt.w1, wt.w2);
    match t {
        VertexType::T1 => (one + b * w2) * (one + a * t1) - g2 * w1 * t2,
        VertexType::T2 => {
            (g2 - a * b) * (g2 * t1 * w2 - (one + a * t1) * (one + b * w2)) * w1 * t2
        }
        VertexType::T3 => b * t2 * ((one + b * w2) * (one + a * t1) - g2 * w1 * w2),
        VertexType::T4 => a * w1 * ((one + b * w2) * (one + a * t1) - g2 * t1 * t2),
        VertexType::T5 => g2 * t2 * (one + b * w2) * (w1 - t1),
        VertexType::T6 => g2 * w1 * (one + a * t1) * (t2 - w2),
    }
}

/// The 2×2 matrix R_t whose determinant, times the type's weight a_t,
/// reproduces f_t — the cross-check route for [`vertex_poly`].
pub fn r_matrix(
    t: VertexType,
    w: SpectralPoint,
    wt: SpectralPoint,
    params: FreeFermionParams,
) -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    let (a, b, g) = (params.alpha(), params.beta(), params.gamma());
    let (w1, w2) = (w.w1, w.w2);
    let (t1, t2) = (wt.w1, wt.w2);
    match t {
        VertexType::T1 => [[one + b * w2, -g * w1], [-g * t2, one + a * t1]],
        VertexType::T2 => {
            [[-g * w1 * w2, w1 * (one + b * w2)], [t2 * (one + a * t1), -g * t1 * t2]]
        }
        VertexType::T3 => [[one + b * w2, -g * w1 * w2], [-g * t2, t2 * (one + a * t1)]],
        VertexType::T4 => [[(one + b * w2) * w1, -g * w1], [-g * t1 * t2, one + a * t1]],
        VertexType::T5 => [[one + b * w2, (one + b * w2) * w1], [-g * t2, -g * t1 * t2]],
        VertexType::T6 => [[-g * w1 * w2, -g * w1], [(one + a * t1) * t2, one + a * t1]],
    }
}

/// The monomial expansion of f_t in (w₁, w₂, w̃₁, w̃₂): entries
/// (coefficient, powers (a, b, c, d)).
fn monomial_table(t: VertexType, p: FreeFermionParams) -> Vec<(f64, [i64; 4])> {
    let (a, b) = (p.alpha(), p.beta());
    let g2 = p.gamma() * p.gamma();
    let a2 = g2 - a * b;
    match t {
        VertexType::T1 => vec![
            (1.0, [0, 0, 0, 0]),
            (a, [0, 0, 1, 0]),
            (b, [0, 1, 0, 0]),
            (a * b, [0, 1, 1, 0]),
            (-g2, [1, 0, 0, 1]),
        ],
        VertexType::T2 => vec![
            (a2 * a2, [1, 1, 1, 1]),
            (-a2, [1, 0, 0, 1]),
            (-a2 * a, [1, 0, 1, 1]),
            (-a2 * b, [1, 1, 0, 1]),
        ],
        VertexType::T3 => vec![
            (b, [0, 0, 0, 1]),
            (a * b, [0, 0, 1, 1]),
            (b * b, [0, 1, 0, 1]),
            (a * b * b, [0, 1, 1, 1]),
            (-b * g2, [1, 1, 0, 1]),
        ],
        VertexType::T4 => vec![
            (a, [1, 0, 0, 0]),
            (a * a, [1, 0, 1, 0]),
            (a * b, [1, 1, 0, 0]),
            (a * a * b, [1, 1, 1, 0]),
            (-a * g2, [1, 0, 1, 1]),
        ],
        VertexType::T5 => vec![
            (g2, [1, 0, 0, 1]),
            (b * g2, [1, 1, 0, 1]),
            (-g2, [0, 0, 1, 1]),
            (-b * g2, [0, 1, 1, 1]),
        ],
        VertexType::T6 => vec![
            (g2, [1, 0, 0, 1]),
            (a * g2, [1, 0, 1, 1]),
            (-g2, [1, 1, 0, 0]),
            (-a * g2, [1, 1, 1, 0]),
        ],
    }
}

/// The asymptotic frequency of vertex type t: the four-fold torus integral
/// of f_t/(ΔΔ̃), computed by expanding f_t into monomials so the integral
/// factorizes exactly into products Φ(a, b)·Φ(c, d) over the untilde/tilde
/// pairs.
pub fn frequency(params: FreeFermionParams, t: VertexType, q: &QuadratureConfig) -> Result<f64> {
    let mut acc = CompensatedComplexSum::new();
    for (coeff, [a, b, c, d]) in monomial_table(t, params) {
        if coeff == 0.0 {
            continue;
        }
        let left = phi_coeff(params, FourierIndex::new(a, b), q)?;
        let right = phi_coeff(params, FourierIndex::new(c, d), q)?;
        acc.add(left * right * coeff);
    }
    let value = acc.total();
    if value.im.abs() > 1e-9 {
        return Err(Error::AccuracyLoss(format!(
            "frequency of type {t} kept an imaginary residue of {:.3e}",
            value.im.abs()
        )));
    }
    if value.re < -1e-6 || value.re > 1.0 + 1e-6 {
        return Err(Error::AccuracyLoss(format!(
            "frequency of type {t} escaped [0, 1] beyond the guard: {}",
            value.re
        )));
    }
    Ok(value.re)
}

/// One row of a finite-to-infinite comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    /// Torus side length.
    pub n: i64,
    /// The finite-volume probability on that torus.
    pub finite: f64,
    /// |finite − infinite|.
    pub gap: f64,
}

/// The infinite-volume value and the per-size gaps of a convergence run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    /// The contour-integral probability being approached.
    pub infinite: f64,
    /// One row per requested torus size, in the given order.
    pub rows: Vec<ConvergenceRow>,
}

/// Computes the finite-volume probability of a single vertex-type
/// constraint on each listed torus and its gap to the infinite-volume
/// correlation. Sizes must be strictly increasing.
pub fn finite_to_infinite_convergence(
    params: FreeFermionParams,
    constraint: (Vertex, VertexType),
    sizes: &[i64],
    q: &QuadratureConfig,
) -> Result<ConvergenceTable> {
    if sizes.is_empty() {
        return Err(Error::InvalidParameters("convergence run needs at least one size".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters(format!(
            "sizes must be strictly increasing, got {sizes:?}"
        )));
    }
    let infinite = correlation(params, &[constraint], q)?;
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let size = TorusSize::new(n)?;
        let finite = vertex_event_finite(size, params, &[constraint])?;
        rows.push(ConvergenceRow { n, finite, gap: (finite - infinite).abs() });
    }
    Ok(ConvergenceTable { infinite, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(alpha: f64, beta: f64, gamma: f64) -> FreeFermionParams {
        FreeFermionParams::new(alpha, beta, gamma).unwrap()
    }

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    /// Φ in the α = β = 0 regime, where 1/Δ = Σ_k γ^{2k}(w₁w₂)^k gives
    /// Φ(m₁, m₂) = γ^{−2m₁}·[m₁ = m₂ ≤ 0].
    fn series_oracle(gamma: f64, m1: i64, m2: i64) -> f64 {
        if m1 == m2 && m1 <= 0 {
            gamma.powi((-2 * m1) as i32)
        } else {
            0.0
        }
    }

    fn random_unit(rng: &mut ChaCha8Rng) -> SpectralPoint {
        SpectralPoint::from_angles(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI))
    }

    #[test]
    fn spectral_points_must_sit_on_the_unit_circle() {
        let ok = SpectralPoint::new(Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0));
        assert!(ok.is_ok());
        let off = SpectralPoint::new(Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0));
        assert!(off.is_err());
    }

    #[test]
    fn delta_poly_matches_hand_values() {
        let w11 = SpectralPoint::from_angles(0.0, 0.0);
        let d = delta_poly(params(0.0, 0.0, 0.5), w11);
        assert!((d - Complex64::new(0.75, 0.0)).norm() < 1e-15);
        let d = delta_poly(params(0.1, 0.1, 0.5), w11);
        assert!((d - Complex64::new(0.96, 0.0)).norm() < 1e-15);
        let wmm = SpectralPoint::from_angles(PI, PI);
        let d = delta_poly(params(0.1, 0.1, 0.5), wmm);
        assert!((d - Complex64::new(0.56, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn numerator_selector_follows_the_color_pair() {
        assert_eq!(m_inverse_numerator(Color::Black, Color::Black), InverseNumerator::OnePlusBetaW2);
        assert_eq!(m_inverse_numerator(Color::White, Color::White), InverseNumerator::OnePlusAlphaW1);
        assert_eq!(
            m_inverse_numerator(Color::Black, Color::White),
            InverseNumerator::MinusGammaHalfPowers
        );
        assert!(m_inverse_numerator(Color::White, Color::Black).has_half_powers());
        let p = params(0.3, 0.4, 0.8);
        let w = SpectralPoint::from_angles(0.3, 1.1);
        let bb = InverseNumerator::OnePlusBetaW2.evaluate(p, w);
        assert!((bb - (Complex64::new(1.0, 0.0) + 0.4 * w.w2())).norm() < 1e-15);
        let mixed = InverseNumerator::MinusGammaHalfPowers.evaluate(p, w);
        assert!((mixed - Complex64::new(-0.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn entry_specs_enforce_parity() {
        assert!(KernelEntrySpec::new(2, 0, Color::Black, Color::Black).is_ok());
        assert!(KernelEntrySpec::new(1, 1, Color::Black, Color::White).is_ok());
        assert!(KernelEntrySpec::new(1, 0, Color::Black, Color::Black).is_err());
        assert!(KernelEntrySpec::new(2, 2, Color::Black, Color::White).is_err());
        let x = MidEdge::new(-1, 0).unwrap();
        let y = MidEdge::new(0, -1).unwrap();
        let spec = KernelEntrySpec::from_points(x, y);
        assert_eq!((spec.delta1(), spec.delta2()), (1, -1));
        assert_eq!((spec.cx(), spec.cy()), (Color::Black, Color::White));
    }

    #[test]
    fn quadrature_configs_validate_their_fields() {
        assert!(QuadratureConfig::new(64, 4096, 1e-9, 1e-6).is_ok());
        assert!(QuadratureConfig::new(60, 4096, 1e-9, 1e-6).is_err());
        assert!(QuadratureConfig::new(128, 64, 1e-9, 1e-6).is_err());
        assert!(QuadratureConfig::new(64, 4096, 0.0, 1e-6).is_err());
        assert!(QuadratureConfig::new(64, 4096, 1e-9, -1.0).is_err());
        assert_eq!(QuadratureConfig::default().initial_grid(), 64);
        assert_eq!(QuadratureConfig::default().max_grid(), 4096);
    }

    #[test]
    fn gauss_legendre_tables_integrate_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(8);
        // Exact for degree ≤ 15: check x², x⁶ and a constant.
        for (exponent, exact) in [(0u32, 2.0), (2, 2.0 / 3.0), (6, 2.0 / 7.0)] {
            let total: f64 =
                nodes.iter().zip(&weights).map(|(&x, &w)| w * x.powi(exponent as i32)).sum();
            assert!((total - exact).abs() < 1e-13, "x^{exponent}: {total} vs {exact}");
        }
        let weight_sum: f64 = weights.iter().sum();
        assert!((weight_sum - 2.0).abs() < 1e-13);
    }

    #[test]
    fn both_backends_reproduce_the_series_oracle() {
        let p = params(0.0, 0.0, 0.5);
        for m1 in -3..=3 {
            for m2 in -3..=3 {
                let idx = FourierIndex::new(m1, m2);
                let oracle = series_oracle(0.5, m1, m2);
                let grid = phi_coeff_grid(p, idx, &q()).unwrap();
                let residue = phi_coeff_residue(p, idx, &q()).unwrap();
                assert!(
                    (grid - Complex64::new(oracle, 0.0)).norm() < 1e-12,
                    "grid ({m1},{m2}): {grid} vs {oracle}"
                );
                assert!(
                    (residue - Complex64::new(oracle, 0.0)).norm() < 1e-12,
                    "residue ({m1},{m2}): {residue} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn backends_agree_off_the_degenerate_axis() {
        for p in [params(0.1, 0.1, 0.5), params(0.25, 0.15, 0.6)] {
            assert!(torus_zero_margin(p) > 0.0);
            for m1 in -3..=3 {
                for m2 in -3..=3 {
                    let idx = FourierIndex::new(m1, m2);
                    let grid = phi_coeff_grid(p, idx, &q()).unwrap();
                    let residue = phi_coeff_residue(p, idx, &q()).unwrap();
                    assert!(
                        (grid - residue).norm() < 1e-9,
                        "({m1},{m2}): {grid} vs {residue}"
                    );
                    assert!(grid.im.abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn torus_zeros_route_to_the_residue_backend() {
        // (0.3, 0.4, 0.8) puts zeros of Δ on the unit torus: |P| ≤ Q.
        let p = params(0.3, 0.4, 0.8);
        assert!(torus_zero_margin(p) <= 0.0);
        // The grid backend must refuse (guard or non-convergence)...
        assert!(phi_coeff_grid(p, FourierIndex::new(0, 0), &q()).is_err());
        // ...while the auto route lands on the residue value.
        let auto = phi_coeff(p, FourierIndex::new(0, 0), &q()).unwrap();
        assert!((auto - Complex64::new(0.63700539210739, 0.0)).norm() < 1e-9, "{auto}");
    }

    #[test]
    fn whole_circle_degeneracy_is_rejected() {
        // α = β = 0, γ = 1 makes Δ = 1 − w₁w₂ vanish along a full circle.
        let p = params(0.0, 0.0, 1.0);
        let by_residue = phi_coeff_residue(p, FourierIndex::new(0, 0), &q());
        assert!(matches!(by_residue, Err(Error::QuadratureFailure(_))));
        // The grid backend hits exact zeros of Δ on its sampling grid.
        let by_grid = phi_coeff_grid(p, FourierIndex::new(0, 0), &q());
        match by_grid {
            Err(Error::QuadratureFailure(msg)) => assert!(msg.contains("guard")),
            other => panic!("expected a guard failure, got {other:?}"),
        }
    }

    #[test]
    fn memoized_lookups_return_identical_values() {
        let p = params(0.1, 0.1, 0.5);
        let idx = FourierIndex::new(-2, 1);
        let first = phi_coeff(p, idx, &q()).unwrap();
        let second = phi_coeff(p, idx, &q()).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn kernel_entries_follow_the_series_oracle() {
        let p = params(0.0, 0.0, 0.5);
        let x = MidEdge::new(1, 0).unwrap();
        let same = kernel_l(p, x, x, &q()).unwrap();
        assert!((same - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        // x Black at (−1/2, 0), y White at (0, −1/2): Δ = (1/2, −1/2).
        let xb = MidEdge::new(-1, 0).unwrap();
        let yw = MidEdge::new(0, -1).unwrap();
        let mixed = kernel_l(p, xb, yw, &q()).unwrap();
        assert!(mixed.norm() < 1e-12);
    }

    #[test]
    fn kernel_entries_are_translation_invariant() {
        let p = params(0.25, 0.15, 0.6);
        let x = MidEdge::new(1, 2).unwrap();
        let y = MidEdge::new(2, 3).unwrap();
        let base = kernel_l(p, x, y, &q()).unwrap();
        for (s1, s2) in [(2, 0), (0, -4), (6, 2)] {
            let xs = MidEdge::new(x.d1 + s1, x.d2 + s2).unwrap();
            let ys = MidEdge::new(y.d1 + s1, y.d2 + s2).unwrap();
            let shifted = kernel_l(p, xs, ys, &q()).unwrap();
            assert!((base - shifted).norm() < 1e-12);
        }
    }

    #[test]
    fn assembled_points_follow_the_type_table() {
        let v = Vertex::new(0, 0);
        let (xs, ys) = assemble_points(&[(v, VertexType::T1)]).unwrap();
        let w = MidEdge::new(-1, 0).unwrap();
        let s = MidEdge::new(0, -1).unwrap();
        assert_eq!(xs, vec![w, s]);
        assert_eq!(ys, vec![w, s]);
        let (_, ys) = assemble_points(&[(v, VertexType::T5)]).unwrap();
        assert_eq!(ys, vec![w, MidEdge::new(1, 0).unwrap()]);
        let (xs, _) =
            assemble_points(&[(v, VertexType::T2), (Vertex::new(1, 0), VertexType::T3)]).unwrap();
        assert_eq!(xs.len(), 4);
        let distinct: HashSet<_> = xs.iter().map(|m| (m.d1, m.d2)).collect();
        assert_eq!(distinct.len(), 4);
        assert!(matches!(
            assemble_points(&[(v, VertexType::T1), (v, VertexType::T2)]),
            Err(Error::DuplicateVertex { .. })
        ));
    }

    #[test]
    fn vertex_polynomials_match_hand_values_and_tables() {
        let p = params(0.1, 0.1, 0.5);
        let ones = SpectralPoint::from_angles(0.0, 0.0);
        let f1 = vertex_poly(VertexType::T1, ones, ones, p);
        assert!((f1 - Complex64::new(0.96, 0.0)).norm() < 1e-15);
        // f₅ vanishes when w₁ = w̃₁.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let w = random_unit(&mut rng);
            let wt = SpectralPoint::new(w.w1(), random_unit(&mut rng).w2()).unwrap();
            let f5 = vertex_poly(VertexType::T5, w, wt, params(0.3, 0.4, 0.8));
            assert!(f5.norm() < 1e-14);
        }
        // The monomial tables expand exactly to the closed forms.
        for _ in 0..50 {
            let w = random_unit(&mut rng);
            let wt = random_unit(&mut rng);
            for t in VertexType::ALL {
                let direct = vertex_poly(t, w, wt, params(0.3, 0.4, 0.8));
                let mut from_table = Complex64::new(0.0, 0.0);
                for (coeff, [a, b, c, d]) in monomial_table(t, params(0.3, 0.4, 0.8)) {
                    from_table += coeff
                        * w.w1().powi(a as i32)
                        * w.w2().powi(b as i32)
                        * wt.w1().powi(c as i32)
                        * wt.w2().powi(d as i32);
                }
                assert!(
                    (direct - from_table).norm() < 1e-12,
                    "type {t}: {direct} vs {from_table}"
                );
            }
        }
    }

    #[test]
    fn vertex_polynomials_sum_to_the_spectral_product() {
        let p = params(0.3, 0.4, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let w = random_unit(&mut rng);
            let wt = random_unit(&mut rng);
            let mut sum = Complex64::new(0.0, 0.0);
            for t in VertexType::ALL {
                sum += vertex_poly(t, w, wt, p);
            }
            let product = delta_poly(p, w) * delta_poly(p, wt);
            assert!((sum - product).norm() < 1e-12, "{sum} vs {product}");
        }
    }

    #[test]
    fn vertex_polynomials_equal_weighted_r_determinants() {
        let p = params(0.25, 0.15, 0.6);
        let weights = weights_from_params(p);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let w = random_unit(&mut rng);
            let wt = random_unit(&mut rng);
            for t in VertexType::ALL {
                let m = r_matrix(t, w, wt, p);
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                let f = vertex_poly(t, w, wt, p);
                assert!(
                    (f - weights.of_type(t) * det).norm() < 1e-12,
                    "type {t}: {f} vs {}",
                    weights.of_type(t) * det
                );
            }
        }
    }

    #[test]
    fn frequencies_match_the_frozen_table() {
        let p = params(0.3, 0.4, 0.8);
        let frozen = [
            0.492097219942864,
            0.011766221875187,
            0.084983806063287,
            0.054455712944450,
            0.178348519587106,
            0.178348519587106,
        ];
        let mut sum = 0.0;
        for t in VertexType::ALL {
            let f = frequency(p, t, &q()).unwrap();
            assert!(
                (f - frozen[t.index()]).abs() < 1e-8,
                "type {t}: {f} vs {}",
                frozen[t.index()]
            );
            sum += f;
        }
        assert!((sum - 1.0).abs() < 1e-8);
        let f5 = frequency(p, VertexType::T5, &q()).unwrap();
        let f6 = frequency(p, VertexType::T6, &q()).unwrap();
        assert!((f5 - f6).abs() < 1e-10);
    }

    #[test]
    fn frequencies_degenerate_correctly_at_the_frozen_point() {
        let p = params(0.0, 0.0, 0.5);
        let expected = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        for t in VertexType::ALL {
            let f = frequency(p, t, &q()).unwrap();
            assert!((f - expected[t.index()]).abs() < 1e-8, "type {t}: {f}");
        }
    }

    #[test]
    fn frequency_swap_symmetry_exchanges_types_three_and_four() {
        let p = params(0.1, 0.3, 0.7);
        let f3 = frequency(p, VertexType::T3, &q()).unwrap();
        let f4_swapped = frequency(p.swapped(), VertexType::T4, &q()).unwrap();
        assert!((f3 - f4_swapped).abs() < 1e-8);
        let f4 = frequency(p, VertexType::T4, &q()).unwrap();
        let f3_swapped = frequency(p.swapped(), VertexType::T3, &q()).unwrap();
        assert!((f4 - f3_swapped).abs() < 1e-8);
    }

    #[test]
    fn single_vertex_correlations_sum_to_one() {
        for p in [params(0.1, 0.1, 0.5), params(0.3, 0.4, 0.8)] {
            let v = Vertex::new(0, 0);
            let mut sum = 0.0;
            for t in VertexType::ALL {
                sum += correlation(p, &[(v, t)], &q()).unwrap();
            }
            assert!((sum - 1.0).abs() < 1e-8, "sum {sum}");
        }
    }

    #[test]
    fn correlations_match_frequencies_at_one_point() {
        for p in [params(0.1, 0.1, 0.5), params(0.3, 0.4, 0.8)] {
            let v = Vertex::new(2, -1);
            for t in VertexType::ALL {
                let by_det = correlation(p, &[(v, t)], &q()).unwrap();
                let by_freq = frequency(p, t, &q()).unwrap();
                assert!(
                    (by_det - by_freq).abs() < 1e-8,
                    "type {t}: {by_det} vs {by_freq}"
                );
            }
        }
    }

    #[test]
    fn degenerate_point_correlations_freeze_onto_type_one() {
        let p = params(0.0, 0.0, 0.5);
        let v = Vertex::new(0, 0);
        for t in VertexType::ALL {
            let value = correlation(p, &[(v, t)], &q()).unwrap();
            let expected = if t == VertexType::T1 { 1.0 } else { 0.0 };
            assert!((value - expected).abs() < 1e-8, "type {t}: {value}");
        }
    }

    #[test]
    fn two_vertex_correlations_match_frozen_values() {
        let p = params(0.3, 0.4, 0.8);
        let far = correlation(
            p,
            &[(Vertex::new(0, 0), VertexType::T3), (Vertex::new(2, 1), VertexType::T5)],
            &q(),
        )
        .unwrap();
        assert!((far - 0.0080022730).abs() < 1e-8, "{far}");
        let adjacent = correlation(
            p,
            &[(Vertex::new(0, 0), VertexType::T5), (Vertex::new(1, 0), VertexType::T4)],
            &q(),
        )
        .unwrap();
        assert!((adjacent - 0.0398637737).abs() < 1e-8, "{adjacent}");
    }

    #[test]
    fn type_two_column_swap_flips_the_determinant_sign_exactly() {
        let p = params(0.1, 0.1, 0.5);
        let (xs, ys) = assemble_points(&[(Vertex::new(0, 0), VertexType::T2)]).unwrap();
        let mut forward = CMatrix::zeros(2);
        let mut swapped = CMatrix::zeros(2);
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                let entry = kernel_l(p, x, y, &q()).unwrap();
                forward[(i, j)] = entry;
                swapped[(i, 1 - j)] = entry;
            }
        }
        assert_eq!(det_direct(&swapped), -det_direct(&forward));
    }

    #[test]
    fn finite_volumes_converge_to_the_contour_value() {
        let p = params(0.1, 0.1, 0.5);
        let table = finite_to_infinite_convergence(
            p,
            (Vertex::new(0, 0), VertexType::T1),
            &[4, 8],
            &q(),
        )
        .unwrap();
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows[1].gap < table.rows[0].gap);
        assert!(table.rows[1].gap < 1e-3);
        let single =
            finite_to_infinite_convergence(p, (Vertex::new(0, 0), VertexType::T1), &[4], &q())
                .unwrap();
        assert_eq!(single.rows.len(), 1);
        assert!(matches!(
            finite_to_infinite_convergence(p, (Vertex::new(0, 0), VertexType::T1), &[8, 4], &q()),
            Err(Error::InvalidParameters(_))
        ));
        assert!(matches!(
            finite_to_infinite_convergence(p, (Vertex::new(0, 0), VertexType::T1), &[], &q()),
            Err(Error::InvalidParameters(_))
        ));
    }
}
