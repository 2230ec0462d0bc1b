//! Defining-function models: the ball, the bidisc, the single-dent domain Ω′
//! and the dented domains Ω obtained by propagating the dent along an
//! automorphism family.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moebius::{
    example11_phi, example12_phi, example21_phi, grid_angle, mu, psi, AnyMap, CPoint2,
    DiscDynamics, DiscMap, Group, MoebiusError,
};

/// Radius of the bump's support.
pub const BUMP_RADIUS: f64 = 0.1;
/// Extra room around the bump support used by the safe-zone test.
const SAFE_MARGIN: f64 = 1e-3;
/// Default cap on |j| when deciding membership in a dented domain.
pub const DEFAULT_J_MAX: i64 = 200;
/// Default |j| range of the sampled ψ family behind `dented_bidisc(psi)`.
pub const DEFAULT_PSI_J_MAX: i64 = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("point {0} is not inside the domain")]
    Outside(String),
    #[error("membership of {0} is inconclusive at the truncation cap")]
    Inconclusive(String),
    #[error("J_max must be at least 1 (got {0})")]
    BadCap(i64),
    #[error("generator cannot propagate the dent: {0}")]
    UnsupportedGenerator(&'static str),
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

/// `(1/100 − |w1|²)² (1/100 − |w2|²)²` on `|(w1, w2)| ≤ 1/10`, zero outside.
///
/// Implemented verbatim, including the jump on the sphere `|(w1, w2)| = 1/10`.
pub fn alpha(w1: Complex64, w2: Complex64) -> f64 {
    let (a, b) = (w1.norm_sqr(), w2.norm_sqr());
    if (a + b).sqrt() <= BUMP_RADIUS {
        (0.01 - a).powi(2) * (0.01 - b).powi(2)
    } else {
        0.0
    }
}

pub fn ball_value(p: CPoint2) -> f64 {
    p.norm_sqr() - 1.0
}

pub fn bidisc_value(p: CPoint2) -> f64 {
    p.z1.norm_sqr().max(p.z2.norm_sqr()) - 1.0
}

/// The boundary point `(i, 0)` carrying the primary dent.
pub fn dent_center() -> CPoint2 {
    CPoint2::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0))
}

/// `P₀ = (i, i)`, the alternative dent site for the bidisc examples.
pub fn dent_center_p0() -> CPoint2 {
    CPoint2::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0))
}

/// Defining function of Ω′: `(|z1|² + |z2|² − 1) + α(z1 − i, z2)`.
pub fn omega_prime_value(p: CPoint2) -> f64 {
    ball_value(p) + alpha(p.z1 - dent_center().z1, p.z2)
}

/// Bidisc analogue of Ω′ with the dent at `center`.
pub fn bidisc_prime_value(p: CPoint2, center: CPoint2) -> f64 {
    bidisc_value(p) + alpha(p.z1 - center.z1, p.z2 - center.z2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    Outside,
    Inconclusive,
}

/// Which ball family propagates the dent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallFamily {
    Ex11,
    Ex12,
}

/// Which bidisc family propagates the dent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BidiscFamily {
    Cyclic,
    Psi,
    Mu,
    /// The full automorphism group: no dent survives, the domain is `D²`.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Ball,
    Bidisc,
    OmegaPrime,
    DentedBall(BallFamily),
    DentedBidisc(BidiscFamily),
}

/// The parent model (ball or bidisc) of a domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parent {
    Ball,
    Bidisc,
}

/// A real coordinate on the z1-disc that the generator's z1 factor shifts by
/// a fixed positive amount per forward step:
/// `−ln|(ζ − a)/(ζ − r)|` for hyperbolic maps, the projection of `1/(ζ − e)`
/// onto the translation direction for parabolic ones.
#[derive(Clone, Copy, Debug)]
struct EscapeCoordinate {
    kind: EscapeKind,
    /// Range of the coordinate over the dent's z1-shadow.
    dent_lo: f64,
    dent_hi: f64,
}

#[derive(Clone, Copy, Debug)]
enum EscapeKind {
    Hyperbolic { attracting: Complex64, repelling: Complex64 },
    Parabolic { fixed: Complex64, direction: Complex64 },
}

impl EscapeKind {
    fn chart(&self, z: Complex64) -> Complex64 {
        match *self {
            EscapeKind::Hyperbolic { attracting, repelling } => (z - attracting) / (z - repelling),
            EscapeKind::Parabolic { fixed, .. } => Complex64::new(1.0, 0.0) / (z - fixed),
        }
    }

    fn chart_pole(&self) -> Complex64 {
        match *self {
            EscapeKind::Hyperbolic { repelling, .. } => repelling,
            EscapeKind::Parabolic { fixed, .. } => fixed,
        }
    }

    fn value(&self, z: Complex64) -> f64 {
        let u = self.chart(z);
        match *self {
            EscapeKind::Hyperbolic { .. } => -u.norm().ln(),
            EscapeKind::Parabolic { direction, .. } => (u * direction.conj()).re,
        }
    }
}

impl EscapeCoordinate {
    fn new(factor: &DiscMap, shadow_center: Complex64, shadow_radius: f64) -> Result<Self, DomainError> {
        let kind = match factor.dynamics() {
            DiscDynamics::Hyperbolic { attracting, repelling, .. } => {
                EscapeKind::Hyperbolic { attracting, repelling }
            }
            DiscDynamics::Parabolic { fixed } => {
                let chart = |z: Complex64| Complex64::new(1.0, 0.0) / (z - fixed);
                let z0 = Complex64::new(0.0, 0.0);
                let tau = chart(factor.apply(z0)) - chart(z0);
                if tau.norm() < 1e-12 {
                    return Err(DomainError::UnsupportedGenerator("parabolic map with zero translation"));
                }
                EscapeKind::Parabolic { fixed, direction: tau / tau.norm() }
            }
            _ => {
                return Err(DomainError::UnsupportedGenerator(
                    "z1 factor must be hyperbolic or parabolic",
                ))
            }
        };
        if (kind.chart_pole() - shadow_center).norm() <= shadow_radius {
            return Err(DomainError::UnsupportedGenerator("fixed point inside the dent shadow"));
        }
        // Image of the shadow disc under the chart is again a disc; find it
        // from three boundary points.
        let pts: Vec<Complex64> = (0..3)
            .map(|k| kind.chart(shadow_center + Complex64::from_polar(shadow_radius, grid_angle(k, 3))))
            .collect();
        let (center, radius) = circumcircle(pts[0], pts[1], pts[2]);
        let (dent_lo, dent_hi) = match kind {
            EscapeKind::Hyperbolic { .. } => {
                let near = center.norm() - radius;
                if near <= 0.0 {
                    return Err(DomainError::UnsupportedGenerator("attracting point inside the dent shadow"));
                }
                (-(center.norm() + radius).ln(), -near.ln())
            }
            EscapeKind::Parabolic { direction, .. } => {
                let mid = (center * direction.conj()).re;
                (mid - radius, mid + radius)
            }
        };
        Ok(Self { kind, dent_lo, dent_hi })
    }

    fn value(&self, z: Complex64) -> f64 {
        self.kind.value(z)
    }

    /// Forward iterates (coordinate increasing) never re-enter the shadow.
    fn safe_forward(&self, z: Complex64) -> bool {
        self.value(z) > self.dent_hi
    }

    fn safe_backward(&self, z: Complex64) -> bool {
        self.value(z) < self.dent_lo
    }
}

fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
    let (ax, ay, bx, by, cx, cy) = (a.re, a.im, b.re, b.im, c.re, c.im);
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    let ux = (a.norm_sqr() * (by - cy) + b.norm_sqr() * (cy - ay) + c.norm_sqr() * (ay - by)) / d;
    let uy = (a.norm_sqr() * (cx - bx) + b.norm_sqr() * (ax - cx) + c.norm_sqr() * (bx - ax)) / d;
    let center = Complex64::new(ux, uy);
    (center, (a - center).norm())
}

/// One propagated copy of the dent: `g(center)` and `g⁻¹`.
#[derive(Clone, Debug)]
struct DentCopy {
    center: CPoint2,
    inverse: AnyMap,
}

#[derive(Clone, Debug)]
enum Propagation {
    None,
    Cyclic {
        generator: AnyMap,
        inverse: AnyMap,
        escape: EscapeCoordinate,
        copies: Vec<DentCopy>,
    },
    /// Membership over a finite sample of an uncountable family.
    Sampled { copies: Vec<DentCopy> },
}

/// A bounded domain in ℂ² given by a defining function.
#[derive(Clone, Debug)]
pub struct ModelDomain {
    kind: DomainKind,
    dent: CPoint2,
    j_max: i64,
    propagation: Arc<Propagation>,
}

impl ModelDomain {
    fn plain(kind: DomainKind) -> Self {
        Self { kind, dent: dent_center(), j_max: 0, propagation: Arc::new(Propagation::None) }
    }

    pub fn ball() -> Self {
        Self::plain(DomainKind::Ball)
    }

    pub fn bidisc() -> Self {
        Self::plain(DomainKind::Bidisc)
    }

    pub fn omega_prime() -> Self {
        Self::plain(DomainKind::OmegaPrime)
    }

    /// The ball with the dent at `(i, 0)` propagated by a cyclic ball family.
    pub fn dented_ball(family: BallFamily, j_max: i64) -> Result<Self, DomainError> {
        let generator = match family {
            BallFamily::Ex11 => AnyMap::Ball(example11_phi()),
            BallFamily::Ex12 => AnyMap::Ball(example12_phi(1)),
        };
        Self::cyclic(DomainKind::DentedBall(family), generator, dent_center(), j_max)
    }

    /// The bidisc with a dent at `center` propagated by one of the bidisc families.
    pub fn dented_bidisc(family: BidiscFamily, center: CPoint2, j_max: i64) -> Result<Self, DomainError> {
        let kind = DomainKind::DentedBidisc(family);
        match family {
            BidiscFamily::Cyclic => Self::cyclic(kind, AnyMap::Bidisc(example21_phi()), center, j_max),
            BidiscFamily::Mu => Self::cyclic(kind, AnyMap::Bidisc(mu(1)), center, j_max),
            BidiscFamily::Full => Ok(Self { dent: center, ..Self::plain(kind) }),
            BidiscFamily::Psi => {
                if j_max < 1 {
                    return Err(DomainError::BadCap(j_max));
                }
                let mut copies = Vec::new();
                for a in default_psi_grid(32, &[0.2, 0.4, 0.6, 0.8]) {
                    for j in -j_max..=j_max {
                        let g = psi(j, a)?;
                        copies.push(DentCopy { center: g.apply_point(center), inverse: AnyMap::Bidisc(g.inverse()) });
                    }
                }
                Ok(Self { kind, dent: center, j_max, propagation: Arc::new(Propagation::Sampled { copies }) })
            }
        }
    }

    fn cyclic(kind: DomainKind, generator: AnyMap, center: CPoint2, j_max: i64) -> Result<Self, DomainError> {
        if j_max < 1 {
            return Err(DomainError::BadCap(j_max));
        }
        let factor = generator
            .z1_factor()
            .ok_or(DomainError::UnsupportedGenerator("z1 must evolve independently of z2"))?;
        let escape = EscapeCoordinate::new(&factor, center.z1, BUMP_RADIUS + SAFE_MARGIN)?;
        let copies = (-j_max..=j_max)
            .map(|j| {
                let g = generator.power(j);
                DentCopy { center: g.apply(center), inverse: g.inverse() }
            })
            .collect();
        Ok(Self {
            kind,
            dent: center,
            j_max,
            propagation: Arc::new(Propagation::Cyclic {
                generator,
                inverse: generator.inverse(),
                escape,
                copies,
            }),
        })
    }

    /// Resolve a CLI domain name.
    pub fn by_name(name: &str) -> Result<Self, DomainError> {
        match name {
            "ball" => Ok(Self::ball()),
            "bidisc" | "ex24" => Ok(Self::bidisc()),
            "omega-prime" | "omega_prime" => Ok(Self::omega_prime()),
            "ex11" => Self::dented_ball(BallFamily::Ex11, DEFAULT_J_MAX),
            "ex12" => Self::dented_ball(BallFamily::Ex12, DEFAULT_J_MAX),
            "ex21" => Self::dented_bidisc(BidiscFamily::Cyclic, dent_center(), DEFAULT_J_MAX),
            "ex21-p0" => Self::dented_bidisc(BidiscFamily::Cyclic, dent_center_p0(), DEFAULT_J_MAX),
            "ex22" => Self::dented_bidisc(BidiscFamily::Psi, dent_center(), DEFAULT_PSI_J_MAX),
            "ex23" => Self::dented_bidisc(BidiscFamily::Mu, dent_center(), DEFAULT_J_MAX),
            other => Err(DomainError::UnknownDomain(other.to_string())),
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    pub fn dent(&self) -> CPoint2 {
        self.dent
    }

    pub fn parent(&self) -> Parent {
        match self.kind {
            DomainKind::Ball | DomainKind::OmegaPrime | DomainKind::DentedBall(_) => Parent::Ball,
            DomainKind::Bidisc | DomainKind::DentedBidisc(_) => Parent::Bidisc,
        }
    }

    pub fn parent_value(&self, p: CPoint2) -> f64 {
        match self.parent() {
            Parent::Ball => ball_value(p),
            Parent::Bidisc => bidisc_value(p),
        }
    }

    /// Distance to the parent model's boundary (negative outside).
    pub fn parent_distance(&self, p: CPoint2) -> f64 {
        match self.parent() {
            Parent::Ball => 1.0 - p.norm(),
            Parent::Bidisc => 1.0 - p.max_norm(),
        }
    }

    /// Ω′ value of a pulled-back point, when it lies in the bump support.
    /// Automorphisms preserve the parent, so a copy can only exclude a point
    /// through the dent; this also keeps iterates that round onto the parent
    /// boundary from counting as excluded.
    fn dent_value(&self, q: CPoint2) -> Option<f64> {
        let a = alpha(q.z1 - self.dent.z1, q.z2 - self.dent.z2);
        (a > 0.0).then(|| self.parent_value(q) + a)
    }

    /// A defining function: negative exactly on the domain.
    ///
    /// For cyclic dented domains this is the maximum of the Ω′ value over the
    /// orbit of `p` until both directions reach the safe zone; for the sampled
    /// ψ domain it is the maximum over the sampled copies.
    pub fn defining_value(&self, p: CPoint2) -> f64 {
        match self.kind {
            DomainKind::Ball => ball_value(p),
            DomainKind::Bidisc | DomainKind::DentedBidisc(BidiscFamily::Full) => bidisc_value(p),
            DomainKind::OmegaPrime => omega_prime_value(p),
            _ => match self.propagation.as_ref() {
                Propagation::Cyclic { .. } => {
                    let mut worst = self.parent_value(p);
                    self.walk_orbit(p, |q| {
                        if let Some(v) = self.dent_value(q) {
                            worst = worst.max(v);
                        }
                        true
                    });
                    worst
                }
                Propagation::Sampled { copies } => copies
                    .iter()
                    .filter_map(|c| self.dent_value(c.inverse.apply(p)))
                    .fold(self.parent_value(p), f64::max),
                Propagation::None => self.parent_value(p),
            },
        }
    }

    /// Visit `p` and its iterates under the generator in both directions,
    /// stopping each direction once it is in the safe zone. Returns false when
    /// a direction hit the cap without reaching the safe zone. `visit`
    /// returning false aborts the walk (and counts as conclusive).
    fn walk_orbit(&self, p: CPoint2, mut visit: impl FnMut(CPoint2) -> bool) -> bool {
        let Propagation::Cyclic { generator, inverse, escape, .. } = self.propagation.as_ref() else {
            return visit(p) || true;
        };
        if !visit(p) {
            return true;
        }
        for (step, forward) in [(generator, true), (inverse, false)] {
            let safe = |q: CPoint2| {
                if forward {
                    escape.safe_forward(q.z1)
                } else {
                    escape.safe_backward(q.z1)
                }
            };
            let mut q = p;
            let mut done = safe(q);
            let mut n = 0;
            while !done && n < self.j_max {
                q = step.apply(q);
                n += 1;
                if !visit(q) {
                    return true;
                }
                done = safe(q);
            }
            if !done {
                return false;
            }
        }
        true
    }

    pub fn membership(&self, p: CPoint2) -> Membership {
        if !p.is_finite() {
            return Membership::Outside;
        }
        let inside = |v: f64| if v < 0.0 { Membership::Inside } else { Membership::Outside };
        match self.kind {
            DomainKind::Ball | DomainKind::Bidisc | DomainKind::OmegaPrime => inside(self.defining_value(p)),
            DomainKind::DentedBidisc(BidiscFamily::Full) => inside(bidisc_value(p)),
            _ => {
                if self.parent_value(p) >= 0.0 {
                    return Membership::Outside;
                }
                match self.propagation.as_ref() {
                    Propagation::Cyclic { .. } => {
                        let mut outside = false;
                        let conclusive = self.walk_orbit(p, |q| {
                            outside = self.dent_value(q).is_some_and(|v| v >= 0.0);
                            !outside
                        });
                        if outside {
                            Membership::Outside
                        } else if conclusive {
                            Membership::Inside
                        } else {
                            Membership::Inconclusive
                        }
                    }
                    Propagation::Sampled { copies } => {
                        let excluded = copies
                            .iter()
                            .any(|c| self.dent_value(c.inverse.apply(p)).is_some_and(|v| v >= 0.0));
                        if excluded {
                            Membership::Outside
                        } else {
                            Membership::Inside
                        }
                    }
                    Propagation::None => inside(self.parent_value(p)),
                }
            }
        }
    }

    pub fn contains(&self, p: CPoint2) -> bool {
        self.membership(p) == Membership::Inside
    }

    /// Distance to the boundary for a point known to be inside.
    ///
    /// Ball: `1 − ‖p‖`; bidisc: `1 − max(|z1|, |z2|)`; dented domains: the
    /// smaller of the parent distance and a bisection along the ray towards
    /// the nearest propagated dent center.
    pub fn boundary_distance(&self, p: CPoint2) -> Result<f64, DomainError> {
        match self.membership(p) {
            Membership::Inside => Ok(self.distance_estimate(p)),
            Membership::Outside => Err(DomainError::Outside(p.to_string())),
            Membership::Inconclusive => Err(DomainError::Inconclusive(p.to_string())),
        }
    }

    /// [`Self::boundary_distance`] without the membership check, clamped at 0.
    /// Used for orbit points, which lie in the domain by invariance but may
    /// round onto the boundary.
    pub fn distance_estimate(&self, p: CPoint2) -> f64 {
        let parent = self.parent_distance(p).max(0.0);
        let copies = match self.propagation.as_ref() {
            Propagation::Cyclic { copies, .. } | Propagation::Sampled { copies } => copies,
            Propagation::None => {
                return match self.kind {
                    DomainKind::OmegaPrime => parent.min(self.ray_distance(p, self.dent, omega_prime_value)),
                    _ => parent,
                }
            }
        };
        if parent == 0.0 || copies.is_empty() {
            return parent;
        }
        let nearest = copies
            .iter()
            .min_by(|a, b| a.center.dist(p).total_cmp(&b.center.dist(p)))
            .expect("non-empty");
        let dent = |q: CPoint2| self.dent_value(nearest.inverse.apply(q)).unwrap_or(-1.0);
        parent.min(self.ray_distance(p, nearest.center, dent))
    }

    /// Bisection on the segment from `p` towards `target` for the first sign
    /// change of `value` (negative at `p`, nonnegative at `target`).
    fn ray_distance(&self, p: CPoint2, target: CPoint2, value: impl Fn(CPoint2) -> f64) -> f64 {
        let len = target.dist(p);
        if len == 0.0 || value(p) >= 0.0 {
            return 0.0;
        }
        if value(target) < 0.0 {
            return f64::INFINITY;
        }
        let dir = (target - p) * (1.0 / len);
        let (mut lo, mut hi) = (0.0, len);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if value(p + dir * mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `n` boundary points found by radial bisection of the defining value
    /// along seeded random directions.
    pub fn sample_boundary(&self, n: usize, seed: u64) -> Vec<CPoint2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let dir = CPoint2::from_reals(v);
            let norm = dir.norm();
            if norm < 1e-12 {
                continue;
            }
            let dir = dir * (1.0 / norm);
            if let Some(p) = self.radial_root(dir) {
                out.push(p);
            }
        }
        out
    }

    fn radial_root(&self, dir: CPoint2) -> Option<CPoint2> {
        let (mut lo, mut hi) = (0.0_f64, 1.5_f64);
        if self.defining_value(dir * lo) >= 0.0 || self.defining_value(dir * hi) < 0.0 {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.defining_value(dir * mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (a, b) = (dir * lo, dir * hi);
        let (va, vb) = (self.defining_value(a), self.defining_value(b));
        Some(if va.abs() <= vb.abs() { a } else { b })
    }
}

impl fmt::Display for ModelDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DomainKind::Ball => write!(f, "ball"),
            DomainKind::Bidisc => write!(f, "bidisc"),
            DomainKind::OmegaPrime => write!(f, "omega_prime"),
            DomainKind::DentedBall(fam) => write!(f, "dented_ball({fam:?})"),
            DomainKind::DentedBidisc(fam) => write!(f, "dented_bidisc({fam:?}, dent {})", self.dent),
        }
    }
}

trait ApplyPoint {
    fn apply_point(&self, p: CPoint2) -> CPoint2;
}

impl ApplyPoint for crate::moebius::BidiscMap {
    fn apply_point(&self, p: CPoint2) -> CPoint2 {
        crate::moebius::Automorphism::apply(self, p)
    }
}

/// `a = r·e^{2πik/n}` for `k < n` and each modulus `r`, ordered by argument.
pub fn default_psi_grid(args: usize, moduli: &[f64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(args * moduli.len());
    for k in 0..args {
        for &r in moduli {
            out.push(Complex64::from_polar(r, grid_angle(k, args)));
        }
    }
    out
}

/// Membership in `Ω = ⋂_j φ^j(Ω′)` for a ball generator, using
/// `p ∈ φ^j(Ω′) ⇔ φ^{−j}(p) ∈ Ω′` with a safe-zone early exit and a cap at `|j| = j_max`.
pub fn omega_contains(p: CPoint2, generator: &crate::moebius::BallMap, j_max: i64) -> Result<Membership, DomainError> {
    let domain = ModelDomain::cyclic(
        DomainKind::DentedBall(BallFamily::Ex11),
        AnyMap::Ball(*generator),
        dent_center(),
        j_max,
    )?;
    Ok(domain.membership(p))
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::moebius::{lambda, Automorphism, BallMap};

    fn ci(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn alpha_values() {
        assert!((alpha(ci(0.0, 0.0), ci(0.0, 0.0)) - 1e-8).abs() < 1e-22);
        assert_eq!(alpha(ci(0.2, 0.0), ci(0.0, 0.0)), 0.0);
        // |w| = 1/10 sits on the closed support, where the value is ~0
        assert!(alpha(ci(0.1, 0.0), ci(0.0, 0.0)) < 1e-30);
    }

    #[test]
    fn alpha_jump_on_support_sphere() {
        let inside = alpha(ci(0.07, 0.0), ci(0.07, 0.0));
        assert!(inside > 6.0e-10 && inside < 7.0e-10);
        assert_eq!(alpha(ci(0.0708, 0.0), ci(0.0708, 0.0)), 0.0);
    }

    #[test]
    fn omega_prime_values() {
        assert_eq!(omega_prime_value(CPoint2::ORIGIN), -1.0);
        assert_eq!(omega_prime_value(CPoint2::real(1.0, 0.0)), 0.0);
        for t in [0.0, 0.5, 1.0, 2.0] {
            let p = CPoint2::new(Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 + 0.03 * t), ci(0.0, 0.0));
            assert!((p.z1 - ci(0.0, 1.0)).norm() <= 0.1);
            assert!(omega_prime_value(p) >= 0.0);
        }
    }

    #[test]
    fn origin_in_dented_ball() {
        assert_eq!(omega_contains(CPoint2::ORIGIN, &example11_phi(), 200).unwrap(), Membership::Inside);
    }

    #[test]
    fn origin_orbit_stays_clear_of_dent_by_brute_force() {
        let phi = example11_phi();
        // beyond |j| ≈ 60 the iterates round onto the sphere
        for j in -60..=60 {
            let q = phi.power(-j).apply(CPoint2::ORIGIN);
            assert!(omega_prime_value(q) < 0.0, "j = {j}");
        }
    }

    #[test]
    fn point_in_primary_dent_is_excluded() {
        // line search along the i-axis for the first point of B outside Ω′
        let mut t = 0.9_f64;
        let mut step = 0.01;
        while step > 1e-15 {
            let p = CPoint2::new(ci(0.0, t + step), ci(0.0, 0.0));
            if p.norm() < 1.0 && omega_prime_value(p) < 0.0 {
                t += step;
            } else {
                step *= 0.5;
            }
        }
        let p = CPoint2::new(ci(0.0, 0.5 * (t + 1.0)), ci(0.0, 0.0));
        assert!(p.norm() < 1.0);
        assert!(omega_prime_value(p) >= 0.0);
        assert!((p.z1 - ci(0.0, 1.0)).norm() <= 0.1);
        assert_eq!(omega_contains(p, &example11_phi(), 200).unwrap(), Membership::Outside);
        // the dent is only ~5e-9 deep
        assert!(1.0 - t < 1e-8);
    }

    #[test]
    fn bad_cap_rejected() {
        assert!(matches!(omega_contains(CPoint2::ORIGIN, &example11_phi(), 0), Err(DomainError::BadCap(0))));
        assert!(omega_contains(CPoint2::ORIGIN, &BallMap::identity(), 10).is_err());
    }

    #[test]
    fn tiny_cap_is_inconclusive_not_truncated() {
        // a point whose backward orbit needs several steps to leave the dent's shadow
        let p = example11_phi().power(-6).apply(CPoint2::new(ci(0.0, 0.5), ci(0.0, 0.0)));
        assert_eq!(omega_contains(p, &example11_phi(), 1).unwrap(), Membership::Inconclusive);
        assert_eq!(omega_contains(p, &example11_phi(), 200).unwrap(), Membership::Inside);
    }

    #[test]
    fn boundary_distance_models() {
        assert_eq!(ModelDomain::ball().boundary_distance(CPoint2::ORIGIN).unwrap(), 1.0);
        assert_eq!(ModelDomain::bidisc().boundary_distance(CPoint2::real(0.5, 0.0)).unwrap(), 0.5);
        assert!(ModelDomain::ball().boundary_distance(CPoint2::real(1.2, 0.0)).is_err());
    }

    #[test]
    fn dented_distance_near_primary_dent() {
        let d = ModelDomain::dented_ball(BallFamily::Ex11, 200).unwrap();
        for t in [0.5, 0.9, 0.99, 0.999] {
            let p = CPoint2::new(ci(0.0, t), ci(0.0, 0.0));
            let got = d.boundary_distance(p).unwrap();
            // oracle: bisection of omega_prime_value along the i-axis
            let (mut lo, mut hi) = (t, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if omega_prime_value(CPoint2::new(ci(0.0, mid), ci(0.0, 0.0))) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((got - (lo - t)).abs() < 1e-12, "t = {t}");
            assert!(got < 1.0 - p.norm(), "dent must shrink the distance at t = {t}");
        }
    }

    #[test]
    fn sample_boundary_models() {
        for p in ModelDomain::ball().sample_boundary(100, 7) {
            assert!((p.norm() - 1.0).abs() < 1e-8);
        }
        for p in ModelDomain::bidisc().sample_boundary(100, 7) {
            assert!((p.max_norm() - 1.0).abs() < 1e-8);
        }
        let om = ModelDomain::omega_prime();
        let a = om.sample_boundary(100, 3);
        assert_eq!(a, om.sample_boundary(100, 3));
        assert!(a.iter().all(|&p| omega_prime_value(p).abs() < 1e-8));
    }

    #[test]
    fn escape_coordinate_shift_is_constant() {
        let l = lambda();
        let e = EscapeCoordinate::new(&l, ci(0.0, 1.0), 0.101).unwrap();
        for z in [ci(0.0, 0.0), ci(0.3, -0.5), ci(-0.9, 0.1)] {
            let shift = e.value(l.apply(z)) - e.value(z);
            assert!((shift - 1.5_f64.ln()).abs() < 1e-12);
        }
        let par = example12_phi(1).z1_factor().unwrap();
        let e = EscapeCoordinate::new(&par, ci(0.0, 1.0), 0.101).unwrap();
        let s0 = e.value(par.apply(ci(0.2, 0.1))) - e.value(ci(0.2, 0.1));
        let s1 = e.value(par.apply(ci(-0.4, 0.6))) - e.value(ci(-0.4, 0.6));
        assert!(s0 > 0.0 && (s0 - s1).abs() < 1e-12);
    }

    #[test]
    fn by_name_covers_cli_domains() {
        for name in ["ball", "bidisc", "ex11", "ex12", "ex21", "ex22", "ex23", "ex24", "ex21-p0"] {
            let d = ModelDomain::by_name(name).unwrap();
            assert!(d.contains(CPoint2::ORIGIN), "{name}");
        }
        assert!(ModelDomain::by_name("torus").is_err());
    }
}
