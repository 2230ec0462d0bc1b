//! Möbius automorphisms of the unit disc `D`, the unit ball `B ⊂ ℂ²` and the
//! bidisc `D²`, stored as projective matrices.
//!
//! A [`DiscMap`] acts on homogeneous coordinates `[ζ, 1]`, a [`BallMap`] on
//! `[z1, z2, 1]`. Composition and integer powers are matrix products, so the
//! group law is exact up to rounding. Every map preserves the Hermitian form
//! `J = diag(1, -1)` (resp. `diag(1, 1, -1)`) up to a positive scalar, which
//! gives the inverse as `J M^† J` without a general matrix inversion.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Unit-determinant entries larger than this switch to max-entry scaling.
const MAX_UNIT_DET_ENTRY: f64 = 1e64;
/// Relative tolerance for the `M^† J M ∝ J` check on raw matrices.
const FORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoebiusError {
    #[error("parameter `{name}` = {value} is outside the unit disc")]
    ParameterOutsideDisc { name: &'static str, value: Complex64 },
    #[error("parameter `{name}` must be nonzero")]
    TrivialParameter { name: &'static str },
    #[error("matrix does not preserve the ball/disc Hermitian form (defect {defect:.3e})")]
    NotAnAutomorphism { defect: f64 },
    #[error("point {0} sits on the pole of the Cayley transform")]
    CayleyPole(String),
    #[error("family is not a translation in w1: max deviation {max_deviation:.3e} (best t = {t})")]
    NotATranslation { t: f64, max_deviation: f64 },
    #[error("non-finite coordinates")]
    NonFinite,
}

#[inline]
fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A point `(z1, z2)` of ℂ².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPoint2 {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl CPoint2 {
    pub const ORIGIN: CPoint2 = CPoint2 {
        z1: Complex64::new(0.0, 0.0),
        z2: Complex64::new(0.0, 0.0),
    };

    pub fn new(z1: Complex64, z2: Complex64) -> Self {
        Self { z1, z2 }
    }

    /// Point with real coordinates `(x1, x2)`.
    pub fn real(x1: f64, x2: f64) -> Self {
        Self::new(c(x1, 0.0), c(x2, 0.0))
    }

    pub fn from_reals(r: [f64; 4]) -> Self {
        Self::new(c(r[0], r[1]), c(r[2], r[3]))
    }

    /// `(Re z1, Im z1, Re z2, Im z2)`.
    pub fn to_reals(self) -> [f64; 4] {
        [self.z1.re, self.z1.im, self.z2.re, self.z2.im]
    }

    pub fn norm_sqr(self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Polydisc norm `max(|z1|, |z2|)`.
    pub fn max_norm(self) -> f64 {
        self.z1.norm().max(self.z2.norm())
    }

    pub fn dist(self, other: CPoint2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.z1.is_finite() && self.z2.is_finite()
    }
}

impl Add for CPoint2 {
    type Output = CPoint2;
    fn add(self, rhs: CPoint2) -> CPoint2 {
        CPoint2::new(self.z1 + rhs.z1, self.z2 + rhs.z2)
    }
}

impl Sub for CPoint2 {
    type Output = CPoint2;
    fn sub(self, rhs: CPoint2) -> CPoint2 {
        CPoint2::new(self.z1 - rhs.z1, self.z2 - rhs.z2)
    }
}

impl Mul<f64> for CPoint2 {
    type Output = CPoint2;
    fn mul(self, s: f64) -> CPoint2 {
        CPoint2::new(self.z1 * s, self.z2 * s)
    }
}

impl fmt::Display for CPoint2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}{:+}i, {}{:+}i)",
            self.z1.re, self.z1.im, self.z2.re, self.z2.im
        )
    }
}

/// A point `(w1, w2)` of ℂ², read in Siegel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelPoint {
    pub w1: Complex64,
    pub w2: Complex64,
}

impl SiegelPoint {
    pub fn new(w1: Complex64, w2: Complex64) -> Self {
        Self { w1, w2 }
    }

    /// `Im w1 − |w2|²`; positive exactly on the Siegel domain 𝒰.
    pub fn height(self) -> f64 {
        self.w1.im - self.w2.norm_sqr()
    }

    pub fn in_domain(self) -> bool {
        self.height() > 0.0
    }

    pub fn dist(self, other: SiegelPoint) -> f64 {
        ((self.w1 - other.w1).norm_sqr() + (self.w2 - other.w2).norm_sqr()).sqrt()
    }
}

/// Group structure shared by all map kinds.
pub trait Group: Sized + Clone {
    fn identity() -> Self;

    /// `self ∘ other`: apply `other` first.
    fn compose(&self, other: &Self) -> Self;

    fn inverse(&self) -> Self;

    /// Integer power by repeated squaring; negative exponents use the inverse.
    fn power(&self, j: i64) -> Self {
        let mut base = if j < 0 { self.inverse() } else { self.clone() };
        let mut n = j.unsigned_abs();
        let mut acc = Self::identity();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.compose(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.compose(&base);
            }
        }
        acc
    }
}

/// A biholomorphic self-map of a domain in ℂ².
pub trait Automorphism: Group + Send + Sync {
    fn apply(&self, p: CPoint2) -> CPoint2;
}

type Mat2 = [[Complex64; 2]; 2];
type Mat3 = [[Complex64; 3]; 3];

fn mul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mul3(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[Complex64::default(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

fn det2(m: &Mat2) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn det3(m: &Mat3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Projective normalization shared by both matrix sizes: unit `|det|`
/// (falling back to unit max-entry for huge hyperbolic powers), then a phase
/// making the last diagonal entry real positive.
fn normalize_entries<const N: usize>(m: &mut [[Complex64; N]; N], det: Complex64) {
    let max_entry = m
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |acc, z| acc.max(z.norm()));
    assert!(
        max_entry.is_finite() && max_entry > 0.0,
        "internal invariant violated: degenerate Möbius matrix"
    );
    let det_abs = det.norm();
    let mut scale = if det_abs > 0.0 && det_abs.is_finite() {
        det_abs.powf(-1.0 / N as f64)
    } else {
        0.0
    };
    if scale == 0.0 || !scale.is_finite() || max_entry * scale > MAX_UNIT_DET_ENTRY {
        scale = 1.0 / max_entry;
    }
    let corner = m[N - 1][N - 1];
    let phase = if corner.norm() > 1e-14 * max_entry {
        corner.conj() / corner.norm()
    } else {
        let lead = m
            .iter()
            .flat_map(|row| row.iter())
            .copied()
            .find(|z| z.norm() > 1e-14 * max_entry)
            .unwrap_or(c(1.0, 0.0));
        lead.conj() / lead.norm()
    };
    let k = phase * scale;
    for row in m.iter_mut() {
        for z in row.iter_mut() {
            *z *= k;
        }
    }
}

/// Möbius automorphism of the unit disc, `ζ ↦ (aζ + b)/(cζ + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscMap {
    m: Mat2,
}

/// Dynamical type of a disc automorphism.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiscDynamics {
    Identity,
    Elliptic,
    Parabolic {
        fixed: Complex64,
    },
    Hyperbolic {
        attracting: Complex64,
        repelling: Complex64,
        /// `|f'|` at the attracting fixed point.
        multiplier: f64,
    },
}

impl DiscMap {
    fn from_raw(m: Mat2) -> Self {
        let mut m = m;
        let det = det2(&m);
        normalize_entries(&mut m, det);
        Self { m }
    }

    /// Build from a raw matrix, checking that it preserves `|ζ|² − 1` up to a
    /// positive factor (i.e. it is a disc automorphism, not merely a Möbius map).
    pub fn from_matrix(m: [[Complex64; 2]; 2]) -> Result<Self, MoebiusError> {
        let map = Self::from_raw(m);
        let defect = form_defect2(&map.m);
        if defect > FORM_TOL {
            return Err(MoebiusError::NotAnAutomorphism { defect });
        }
        Ok(map)
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn rotation(theta: f64) -> Self {
        Self::from_raw([[Complex64::from_polar(1.0, theta), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        (self.m[0][0] * z + self.m[0][1]) / (self.m[1][0] * z + self.m[1][1])
    }

    /// `|f'(z)|`.
    pub fn derivative_abs(&self, z: Complex64) -> f64 {
        let den = self.m[1][0] * z + self.m[1][1];
        det2(&self.m).norm() / den.norm_sqr()
    }

    /// Fixed points on the unit circle, sorted by argument.
    pub fn boundary_fixed_points(&self) -> Vec<Complex64> {
        let [[a, b], [cc, d]] = self.m;
        let scale = a.norm().max(b.norm()).max(cc.norm()).max(d.norm());
        let mut roots = if cc.norm() <= 1e-13 * scale {
            // ζ ↦ (aζ + b)/d; an automorphism with c = 0 is a rotation.
            Vec::new()
        } else {
            // c ζ² + (d − a) ζ − b = 0
            let p = (d - a) / cc;
            let q = -b / cc;
            let disc = (p * p - q * 4.0).sqrt();
            vec![(-p + disc) / 2.0, (-p - disc) / 2.0]
        };
        roots.retain(|z| (z.norm() - 1.0).abs() < 1e-6);
        roots.sort_by(|x, y| x.arg().total_cmp(&y.arg()));
        roots.dedup_by(|x, y| (*x - *y).norm() < 1e-6);
        roots.iter().map(|z| z / z.norm()).collect()
    }

    pub fn dynamics(&self) -> DiscDynamics {
        let tr = self.m[0][0] + self.m[1][1];
        let det = det2(&self.m);
        let off = self.m[0][1].norm().max(self.m[1][0].norm());
        let diag_gap = (self.m[0][0] - self.m[1][1]).norm();
        if off < 1e-13 && diag_gap < 1e-13 {
            return DiscDynamics::Identity;
        }
        // tr²/det is real for automorphisms: < 4 elliptic, = 4 parabolic, > 4 hyperbolic
        let sigma = (tr * tr / det).re;
        if sigma < 4.0 - 1e-9 {
            return DiscDynamics::Elliptic;
        }
        let fixed = self.boundary_fixed_points();
        if sigma <= 4.0 + 1e-9 && self.m[1][0].norm() > 1e-13 {
            // double root of c ζ² + (d − a) ζ − b, without the lossy square root
            let e = (self.m[0][0] - self.m[1][1]) / (self.m[1][0] * 2.0);
            return DiscDynamics::Parabolic { fixed: e / e.norm() };
        }
        if sigma <= 4.0 + 1e-9 || fixed.len() < 2 {
            return match fixed.first() {
                Some(&e) => DiscDynamics::Parabolic { fixed: e },
                None => DiscDynamics::Elliptic,
            };
        }
        let (u, v) = (fixed[0], fixed[1]);
        let (du, dv) = (self.derivative_abs(u), self.derivative_abs(v));
        if du < dv {
            DiscDynamics::Hyperbolic { attracting: u, repelling: v, multiplier: du }
        } else {
            DiscDynamics::Hyperbolic { attracting: v, repelling: u, multiplier: dv }
        }
    }
}

fn form_defect2(m: &Mat2) -> f64 {
    // M^† J M should equal k J with k > 0
    let j = [1.0, -1.0];
    let mut g = [[Complex64::default(); 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            g[r][s] = (0..2).map(|t| m[t][r].conj() * j[t] * m[t][s]).sum();
        }
    }
    let k = g[0][0].re;
    if k <= 0.0 {
        return f64::INFINITY;
    }
    let mut defect: f64 = 0.0;
    for r in 0..2 {
        for s in 0..2 {
            let want = if r == s { j[r] * k } else { 0.0 };
            defect = defect.max((g[r][s] - want).norm() / k);
        }
    }
    defect
}

fn form_defect3(m: &Mat3) -> f64 {
    let j = [1.0, 1.0, -1.0];
    let mut g = [[Complex64::default(); 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            g[r][s] = (0..3).map(|t| m[t][r].conj() * j[t] * m[t][s]).sum();
        }
    }
    let k = g[0][0].re;
    if k <= 0.0 {
        return f64::INFINITY;
    }
    let mut defect: f64 = 0.0;
    for r in 0..3 {
        for s in 0..3 {
            let want = if r == s { j[r] * k } else { 0.0 };
            defect = defect.max((g[r][s] - want).norm() / k);
        }
    }
    defect
}

impl Group for DiscMap {
    fn identity() -> Self {
        Self::from_raw([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
    }

    fn compose(&self, other: &Self) -> Self {
        Self::from_raw(mul2(&self.m, &other.m))
    }

    fn inverse(&self) -> Self {
        let [[a, b], [cc, d]] = self.m;
        Self::from_raw([[a.conj(), -cc.conj()], [-b.conj(), d.conj()]])
    }
}

/// `ζ ↦ e^{iθ}(ζ − a)/(1 − āζ)`.
pub fn disc_mobius(a: Complex64, theta: f64) -> Result<DiscMap, MoebiusError> {
    if !a.is_finite() || !theta.is_finite() {
        return Err(MoebiusError::NonFinite);
    }
    if a.norm() >= 1.0 {
        return Err(MoebiusError::ParameterOutsideDisc { name: "a", value: a });
    }
    let rot = Complex64::from_polar(1.0, theta);
    Ok(DiscMap::from_raw([[rot, -a * rot], [-a.conj(), c(1.0, 0.0)]]))
}

/// `λ(ζ) = (ζ + 1/5)/(1 + ζ/5)`, the disc map driving the bidisc examples.
pub fn lambda() -> DiscMap {
    disc_mobius(c(-0.2, 0.0), 0.0).expect("|a| = 1/5 < 1")
}

/// Projective automorphism of the unit ball in ℂ².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallMap {
    m: Mat3,
}

impl BallMap {
    fn from_raw(m: Mat3) -> Self {
        let mut m = m;
        let det = det3(&m);
        normalize_entries(&mut m, det);
        Self { m }
    }

    /// Build from a raw 3×3 matrix, checking that it preserves
    /// `|z1|² + |z2|² − 1` up to a positive factor.
    pub fn from_matrix(m: [[Complex64; 3]; 3]) -> Result<Self, MoebiusError> {
        let map = Self::from_raw(m);
        let defect = form_defect3(&map.m);
        if defect > FORM_TOL {
            return Err(MoebiusError::NotAnAutomorphism { defect });
        }
        Ok(map)
    }

    pub fn matrix(&self) -> [[Complex64; 3]; 3] {
        self.m
    }

    /// The induced disc map on `z1` when the matrix is block diagonal
    /// (`z1` evolves independently of `z2`), as for every generator used here.
    pub fn z1_factor(&self) -> Option<DiscMap> {
        let m = &self.m;
        let scale = m
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        let off = [m[0][1], m[1][0], m[1][2], m[2][1]]
            .iter()
            .fold(0.0_f64, |acc, z| acc.max(z.norm()));
        if off > 1e-13 * scale {
            return None;
        }
        Some(DiscMap::from_raw([[m[0][0], m[0][2]], [m[2][0], m[2][2]]]))
    }
}

impl Group for BallMap {
    fn identity() -> Self {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        Self::from_raw([[one, zero, zero], [zero, one, zero], [zero, zero, one]])
    }

    fn compose(&self, other: &Self) -> Self {
        Self::from_raw(mul3(&self.m, &other.m))
    }

    fn inverse(&self) -> Self {
        let j = [1.0, 1.0, -1.0];
        let mut inv = [[Complex64::default(); 3]; 3];
        for (r, row) in inv.iter_mut().enumerate() {
            for (s, z) in row.iter_mut().enumerate() {
                *z = self.m[s][r].conj() * (j[r] * j[s]);
            }
        }
        Self::from_raw(inv)
    }
}

impl Automorphism for BallMap {
    fn apply(&self, p: CPoint2) -> CPoint2 {
        let m = &self.m;
        let v0 = m[0][0] * p.z1 + m[0][1] * p.z2 + m[0][2];
        let v1 = m[1][0] * p.z1 + m[1][1] * p.z2 + m[1][2];
        let v2 = m[2][0] * p.z1 + m[2][1] * p.z2 + m[2][2];
        CPoint2::new(v0 / v2, v1 / v2)
    }
}

/// The hyperbolic generator of the dented ball:
/// `((z1 − 1/5)/(1 − z1/5), √(1 − 1/25)·z2/(1 − z1/5))`.
pub fn example11_phi() -> BallMap {
    let s = (1.0 - 0.04_f64).sqrt();
    let zero = c(0.0, 0.0);
    BallMap::from_raw([
        [c(1.0, 0.0), zero, c(-0.2, 0.0)],
        [zero, c(s, 0.0), zero],
        [c(-0.2, 0.0), zero, c(1.0, 0.0)],
    ])
}

/// The j-th member of the parabolic family.
///
/// Clearing the `(j + 2i)` denominators of the pointwise formula gives the
/// matrix `2i·I + j·N` with `N² = 0`, so `φ^j ∘ φ^k = φ^{j+k}` holds exactly.
pub fn example12_phi(j: i64) -> BallMap {
    let jf = j as f64;
    let zero = c(0.0, 0.0);
    BallMap::from_raw([
        [c(-jf, 2.0), zero, c(-jf, 0.0)],
        [zero, c(0.0, 2.0), zero],
        [c(jf, 0.0), zero, c(jf, 2.0)],
    ])
}

/// Automorphism of the bidisc: optionally swap the coordinates, then apply
/// `first` to the new `z1` and `second` to the new `z2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BidiscMap {
    pub first: DiscMap,
    pub second: DiscMap,
    pub swap: bool,
}

impl BidiscMap {
    pub fn new(first: DiscMap, second: DiscMap, swap: bool) -> Self {
        Self { first, second, swap }
    }

    pub fn product(first: DiscMap, second: DiscMap) -> Self {
        Self::new(first, second, false)
    }
}

impl Group for BidiscMap {
    fn identity() -> Self {
        Self::product(DiscMap::identity(), DiscMap::identity())
    }

    fn compose(&self, other: &Self) -> Self {
        if self.swap {
            Self::new(
                self.first.compose(&other.second),
                self.second.compose(&other.first),
                !other.swap,
            )
        } else {
            Self::new(
                self.first.compose(&other.first),
                self.second.compose(&other.second),
                other.swap,
            )
        }
    }

    fn inverse(&self) -> Self {
        if self.swap {
            Self::new(self.second.inverse(), self.first.inverse(), true)
        } else {
            Self::product(self.first.inverse(), self.second.inverse())
        }
    }
}

impl Automorphism for BidiscMap {
    fn apply(&self, p: CPoint2) -> CPoint2 {
        let (u1, u2) = if self.swap { (p.z2, p.z1) } else { (p.z1, p.z2) };
        CPoint2::new(self.first.apply(u1), self.second.apply(u2))
    }
}

/// `(λ, λ)`: the cyclic generator of the dented bidisc.
pub fn example21_phi() -> BidiscMap {
    let l = lambda();
    BidiscMap::product(l, l)
}

/// `ψ_{j,ρ_a} = (λ^j(z1), ρ_a^j(z2))` with `ρ_a(ζ) = (ζ − a)/(1 − āζ)`.
pub fn psi(j: i64, a: Complex64) -> Result<BidiscMap, MoebiusError> {
    if a == c(0.0, 0.0) {
        return Err(MoebiusError::TrivialParameter { name: "a" });
    }
    let rho = disc_mobius(a, 0.0)?;
    Ok(BidiscMap::product(lambda().power(j), rho.power(j)))
}

/// `μ_j = (λ^j(z1), z2)`.
pub fn mu(j: i64) -> BidiscMap {
    BidiscMap::product(lambda().power(j), DiscMap::identity())
}

/// Either kind of map acting on ℂ², for code that handles ball and bidisc
/// families uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnyMap {
    Ball(BallMap),
    Bidisc(BidiscMap),
}

impl AnyMap {
    pub fn apply(&self, p: CPoint2) -> CPoint2 {
        match self {
            AnyMap::Ball(m) => m.apply(p),
            AnyMap::Bidisc(m) => m.apply(p),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            AnyMap::Ball(m) => AnyMap::Ball(m.inverse()),
            AnyMap::Bidisc(m) => AnyMap::Bidisc(m.inverse()),
        }
    }

    pub fn power(&self, j: i64) -> Self {
        match self {
            AnyMap::Ball(m) => AnyMap::Ball(m.power(j)),
            AnyMap::Bidisc(m) => AnyMap::Bidisc(m.power(j)),
        }
    }

    /// Disc map governing the `z1` coordinate, when it evolves on its own.
    pub fn z1_factor(&self) -> Option<DiscMap> {
        match self {
            AnyMap::Ball(m) => m.z1_factor(),
            AnyMap::Bidisc(m) if !m.swap => Some(m.first),
            AnyMap::Bidisc(_) => None,
        }
    }
}

impl From<BallMap> for AnyMap {
    fn from(m: BallMap) -> Self {
        AnyMap::Ball(m)
    }
}

impl From<BidiscMap> for AnyMap {
    fn from(m: BidiscMap) -> Self {
        AnyMap::Bidisc(m)
    }
}

/// Cayley transform `B → 𝒰`: `w1 = i(1 − z1)/(1 + z1)`, `w2 = z2/(1 + z1)`.
///
/// Sends `(−1, 0)` to infinity, so the parabolic family becomes `w1 ↦ w1 + j`.
pub fn cayley_to_siegel(p: CPoint2) -> Result<SiegelPoint, MoebiusError> {
    if !p.is_finite() {
        return Err(MoebiusError::NonFinite);
    }
    let den = c(1.0, 0.0) + p.z1;
    if den.norm() < 1e-300 {
        return Err(MoebiusError::CayleyPole(p.to_string()));
    }
    let w1 = c(0.0, 1.0) * (c(1.0, 0.0) - p.z1) / den;
    Ok(SiegelPoint::new(w1, p.z2 / den))
}

/// Inverse Cayley transform `𝒰 → B`.
pub fn siegel_to_ball(w: SiegelPoint) -> Result<CPoint2, MoebiusError> {
    if !(w.w1.is_finite() && w.w2.is_finite()) {
        return Err(MoebiusError::NonFinite);
    }
    // u = (1 − z1)/(1 + z1) = −i w1
    let u = c(0.0, -1.0) * w.w1;
    let den = c(1.0, 0.0) + u;
    if den.norm() < 1e-300 {
        return Err(MoebiusError::CayleyPole(format!("w1 = {}", w.w1)));
    }
    let z1 = (c(1.0, 0.0) - u) / den;
    let z2 = w.w2 * 2.0 / den;
    Ok(CPoint2::new(z1, z2))
}

/// Conjugate a ball map to the Siegel domain and apply it at `w`.
pub fn apply_in_siegel(map: &BallMap, w: SiegelPoint) -> Result<SiegelPoint, MoebiusError> {
    cayley_to_siegel(map.apply(siegel_to_ball(w)?))
}

/// 25 probe points of 𝒰: five real offsets of `w1` crossed with five `w2`
/// values, each lifted one unit above the paraboloid `Im w1 = |w2|²`.
pub fn siegel_probe_grid() -> Vec<SiegelPoint> {
    let w2s = [
        c(0.0, 0.0),
        c(0.3, 0.0),
        c(0.0, 0.5),
        c(-0.2, 0.4),
        c(0.7, -0.1),
    ];
    let heights = [1.0, 0.5, 2.0, 0.25, 3.0];
    let mut out = Vec::with_capacity(25);
    for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        for (w2, h) in w2s.iter().zip(heights) {
            out.push(SiegelPoint::new(c(x, w2.norm_sqr() + h), *w2));
        }
    }
    out
}

/// Fit `w ↦ (w1 + t·j, w2)` to the Siegel conjugates of a ball-map family.
///
/// Returns `t` when every conjugated member matches the translation within
/// `tol` on every probe point; otherwise the best-fit `t` and the maximum
/// deviation are returned as [`MoebiusError::NotATranslation`].
pub fn detect_translation<F>(
    family: F,
    js: impl IntoIterator<Item = i64>,
    probe: &[SiegelPoint],
    tol: f64,
) -> Result<f64, MoebiusError>
where
    F: Fn(i64) -> BallMap,
{
    let mut images = Vec::new();
    for j in js {
        let map = family(j);
        for &w in probe {
            let image = match apply_in_siegel(&map, w) {
                Ok(image) if image.w1.is_finite() && image.w2.is_finite() => Some(image),
                _ => None,
            };
            images.push((j, w, image));
        }
    }

    let (sum, n) = images
        .iter()
        .filter(|(j, _, _)| *j != 0)
        .filter_map(|(j, w, img)| img.map(|img| ((img.w1 - w.w1).re / *j as f64, 1usize)))
        .fold((0.0, 0usize), |(s, n), (t, k)| (s + t, n + k));
    let t = if n > 0 { sum / n as f64 } else { 0.0 };

    let mut max_deviation: f64 = 0.0;
    for (j, w, img) in &images {
        let dev = match img {
            Some(img) => {
                let expected = SiegelPoint::new(w.w1 + t * *j as f64, w.w2);
                img.dist(expected)
            }
            None => f64::INFINITY,
        };
        max_deviation = max_deviation.max(dev);
    }
    if max_deviation.is_nan() || max_deviation >= tol {
        return Err(MoebiusError::NotATranslation { t, max_deviation });
    }
    Ok(t)
}

/// Pointwise closed forms kept as independent oracles for the matrix code.
pub mod closed_form {
    use super::*;

    pub fn example11_phi(p: CPoint2) -> CPoint2 {
        let den = c(1.0, 0.0) - p.z1 * 0.2;
        let s = (1.0 - 0.04_f64).sqrt();
        CPoint2::new((p.z1 - 0.2) / den, p.z2 * s / den)
    }

    /// The displayed formula for the j-th member of the parabolic family.
    pub fn example12_phi(j: i64, p: CPoint2) -> CPoint2 {
        let jf = c(j as f64, 0.0);
        let two_i = c(0.0, 2.0);
        let den = c(1.0, 0.0) + p.z1 * jf / (jf + two_i);
        let first = (two_i - jf) / (two_i + jf) * (p.z1 + jf / (jf - two_i)) / den;
        let second = (two_i * p.z2 / (jf + two_i)) / den;
        CPoint2::new(first, second)
    }

    pub fn disc_mobius(a: Complex64, theta: f64, z: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, theta) * (z - a) / (c(1.0, 0.0) - a.conj() * z)
    }
}

/// Uniform angle in `[0, 2π)` for index `k` of `n`.
pub(crate) fn grid_angle(k: usize, n: usize) -> f64 {
    2.0 * PI * k as f64 / n as f64
}
