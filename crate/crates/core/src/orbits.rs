//! Orbit iteration, limit detection and harvesting of near-boundary samples.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accum::PointCloud;
use crate::domains::{DomainError, Membership, ModelDomain, Parent};
use crate::moebius::{disc_mobius, mu, psi, AnyMap, BidiscMap, CPoint2, DiscMap, MoebiusError};

pub const DEFAULT_TAIL: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("starting point {0} is not inside the domain")]
    OutsideDomain(String),
    #[error("membership of starting point {0} is inconclusive")]
    Inconclusive(String),
    #[error("empty index range {0}..={1}")]
    EmptyRange(i64, i64),
    #[error("no accumulation at this depth: none of {candidates} images came within {threshold} of the boundary")]
    NoAccumulation { candidates: usize, threshold: f64 },
    #[error("threshold must be positive (got {0})")]
    BadThreshold(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Moebius(#[from] MoebiusError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitEntry {
    pub j: i64,
    pub point: CPoint2,
    pub bdist: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub entries: Vec<OrbitEntry>,
    pub limit: Option<CPoint2>,
    pub converged: bool,
}

impl OrbitRecord {
    fn from_entries(entries: Vec<OrbitEntry>) -> Self {
        let mut record = Self { entries, limit: None, converged: false };
        record.limit = orbit_limit(&record, DEFAULT_TAIL, DEFAULT_TOL);
        record.converged = record.limit.is_some();
        record
    }

    pub fn last(&self) -> Option<&OrbitEntry> {
        self.entries.last()
    }
}

fn check_start(domain: &ModelDomain, x: CPoint2) -> Result<(), OrbitError> {
    match domain.membership(x) {
        Membership::Inside => Ok(()),
        Membership::Outside => Err(OrbitError::OutsideDomain(x.to_string())),
        Membership::Inconclusive => Err(OrbitError::Inconclusive(x.to_string())),
    }
}

/// Orbit of `x` under `map^j` for `j_min ≤ j ≤ j_max`, each point computed
/// from its own matrix power.
pub fn iterate_orbit(
    map: &AnyMap,
    x: CPoint2,
    j_min: i64,
    j_max: i64,
    domain: &ModelDomain,
) -> Result<OrbitRecord, OrbitError> {
    iterate_family(|j| map.power(j), x, j_min, j_max, domain)
}

/// Like [`iterate_orbit`] for a family given member by member, e.g. a
/// closed-form `j ↦ φ^j`.
pub fn iterate_family<F>(member: F, x: CPoint2, j_min: i64, j_max: i64, domain: &ModelDomain) -> Result<OrbitRecord, OrbitError>
where
    F: Fn(i64) -> AnyMap + Sync,
{
    if j_min > j_max {
        return Err(OrbitError::EmptyRange(j_min, j_max));
    }
    check_start(domain, x)?;
    let entries = (j_min..=j_max)
        .into_par_iter()
        .map(|j| {
            let point = member(j).apply(x);
            OrbitEntry { j, point, bdist: domain.distance_estimate(point) }
        })
        .collect();
    Ok(OrbitRecord::from_entries(entries))
}

/// Orbit of a point that may lie on the boundary (e.g. `P₀ = (i, i)`);
/// no membership check, distances are to the parent model.
pub fn boundary_orbit(map: &AnyMap, p: CPoint2, j_min: i64, j_max: i64, domain: &ModelDomain) -> Result<OrbitRecord, OrbitError> {
    if j_min > j_max {
        return Err(OrbitError::EmptyRange(j_min, j_max));
    }
    let entries = (j_min..=j_max)
        .map(|j| {
            let point = map.power(j).apply(p);
            OrbitEntry { j, point, bdist: domain.parent_distance(point).max(0.0) }
        })
        .collect();
    Ok(OrbitRecord::from_entries(entries))
}

fn tail_limit(tail: &[OrbitEntry], tol: f64) -> Option<CPoint2> {
    if tail.is_empty() {
        return None;
    }
    let mut diameter: f64 = 0.0;
    for (k, a) in tail.iter().enumerate() {
        if !a.point.is_finite() || a.bdist >= tol {
            return None;
        }
        for b in &tail[k + 1..] {
            diameter = diameter.max(a.point.dist(b.point));
        }
    }
    if diameter >= tol {
        return None;
    }
    let sum = tail.iter().fold(CPoint2::ORIGIN, |acc, e| acc + e.point);
    Some(sum * (1.0 / tail.len() as f64))
}

/// Mean of the last `tail` points when they are within `tol` of each other
/// and of the boundary.
pub fn orbit_limit(record: &OrbitRecord, tail: usize, tol: f64) -> Option<CPoint2> {
    if tail == 0 || record.entries.len() < tail {
        return None;
    }
    tail_limit(&record.entries[record.entries.len() - tail..], tol)
}

/// [`orbit_limit`] for the j → −∞ end: the first `tail` entries.
pub fn orbit_limit_backward(record: &OrbitRecord, tail: usize, tol: f64) -> Option<CPoint2> {
    if tail == 0 || record.entries.len() < tail {
        return None;
    }
    tail_limit(&record.entries[..tail], tol)
}

/// Finite enumerations of the automorphism families.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Cyclic { generator: AnyMap, js: Vec<i64> },
    Psi { js: Vec<i64>, a_grid: Vec<Complex64> },
    Mu { js: Vec<i64> },
    /// Random elements of Aut(D²) pushing the origin to within `depth` of
    /// the boundary.
    FullBidisc { samples: usize, seed: u64, depth: f64 },
}

impl FamilySpec {
    pub fn psi(js: Vec<i64>, a_grid: Vec<Complex64>) -> Result<Self, OrbitError> {
        for &a in &a_grid {
            psi(1, a)?;
        }
        Ok(FamilySpec::Psi { js, a_grid })
    }

    pub fn len(&self) -> usize {
        match self {
            FamilySpec::Cyclic { js, .. } | FamilySpec::Mu { js } => js.len(),
            FamilySpec::Psi { js, a_grid } => js.len() * a_grid.len(),
            FamilySpec::FullBidisc { samples, .. } => *samples,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Cyclic { .. } => "cyclic",
            FamilySpec::Psi { .. } => "psi",
            FamilySpec::Mu { .. } => "mu",
            FamilySpec::FullBidisc { .. } => "full_bidisc",
        }
    }

    /// The `idx`-th member; deterministic and independent of the others.
    pub fn member(&self, idx: usize) -> AnyMap {
        match self {
            FamilySpec::Cyclic { generator, js } => generator.power(js[idx]),
            FamilySpec::Mu { js } => AnyMap::Bidisc(mu(js[idx])),
            FamilySpec::Psi { js, a_grid } => {
                let (ai, ji) = (idx / js.len(), idx % js.len());
                AnyMap::Bidisc(psi(js[ji], a_grid[ai]).expect("a-grid validated at construction"))
            }
            FamilySpec::FullBidisc { seed, depth, .. } => AnyMap::Bidisc(full_bidisc_member(*seed, idx as u64, *depth)),
        }
    }
}

fn full_bidisc_member(seed: u64, idx: u64, depth: f64) -> BidiscMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx);
    let tau = std::f64::consts::TAU;
    let lo = (1.0 - depth).powi(2);
    // area-uniform on the annulus 1 - depth < |a| < 1 and on the disc
    let deep = Complex64::from_polar(rng.gen_range(lo..1.0_f64).sqrt(), rng.gen_range(0.0..tau));
    let free = Complex64::from_polar(rng.gen::<f64>().sqrt(), rng.gen_range(0.0..tau));
    let (a1, a2) = if rng.gen::<bool>() { (deep, free) } else { (free, deep) };
    let factor = |a: Complex64, theta: f64| -> DiscMap { disc_mobius(a, theta).expect("|a| < 1 by construction") };
    let first = factor(a1, rng.gen_range(0.0..tau));
    let second = factor(a2, rng.gen_range(0.0..tau));
    BidiscMap::new(first, second, rng.gen::<bool>())
}

/// `j` with `lo ≤ |j| ≤ hi`, in increasing order.
pub fn symmetric_range(lo: i64, hi: i64) -> Vec<i64> {
    let mut js: Vec<i64> = (-hi..=-lo).chain(lo..=hi).collect();
    js.dedup();
    js
}

/// Nearest boundary point: radial for the ball; for the bidisc, every
/// coordinate with modulus above `1 − threshold` is pushed to modulus one.
pub fn project_to_boundary(p: CPoint2, parent: Parent, threshold: f64) -> CPoint2 {
    match parent {
        Parent::Ball => p * (1.0 / p.norm()),
        Parent::Bidisc => {
            let push = |z: Complex64| if z.norm() > 1.0 - threshold { z / z.norm() } else { z };
            CPoint2::new(push(p.z1), push(p.z2))
        }
    }
}

/// Apply every family member to every base point and keep the boundary
/// projections of images closer than `threshold` to the boundary.
///
/// Output order follows the (member, base point) grid index.
pub fn accumulation_samples(
    family: &FamilySpec,
    base_points: &[CPoint2],
    domain: &ModelDomain,
    threshold: f64,
) -> Result<PointCloud, OrbitError> {
    if !(threshold > 0.0) {
        return Err(OrbitError::BadThreshold(threshold));
    }
    for &x in base_points {
        check_start(domain, x)?;
    }
    let nb = base_points.len();
    let candidates = family.len() * nb;
    let parent = domain.parent();
    let points: Vec<[f64; 4]> = (0..family.len())
        .into_par_iter()
        .flat_map_iter(|m| {
            let g = family.member(m);
            base_points.iter().filter_map(move |&x| {
                let y = g.apply(x);
                if !y.is_finite() {
                    return None;
                }
                // dents only shrink the parent, so its distance is an upper bound
                let near = domain.parent_distance(y) < threshold || domain.distance_estimate(y) < threshold;
                near.then(|| project_to_boundary(y, parent, threshold).to_reals())
            })
        })
        .collect();
    if points.is_empty() {
        return Err(OrbitError::NoAccumulation { candidates, threshold });
    }
    Ok(PointCloud::new(points, format!("{} on {}", family.name(), domain)))
}

/// `max ‖φ^j(z) − limit‖` over a 7⁴ grid of the cube `[−r, r]⁴` restricted to `‖z‖ ≤ r`.
pub fn uniformity_check(map: &AnyMap, r: f64, j: i64, limit: CPoint2) -> f64 {
    let g = map.power(j);
    let ticks: Vec<f64> = (0..7).map(|k| -r + 2.0 * r * k as f64 / 6.0).collect();
    let mut worst: f64 = 0.0;
    for &a in &ticks {
        for &b in &ticks {
            for &c in &ticks {
                for &d in &ticks {
                    let z = CPoint2::from_reals([a, b, c, d]);
                    if z.norm() <= r {
                        worst = worst.max(g.apply(z).dist(limit));
                    }
                }
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{dent_center_p0, BallFamily, BidiscFamily};
    use crate::moebius::{example11_phi, example12_phi, example21_phi, BallMap, Group};

    fn ex11() -> AnyMap {
        AnyMap::Ball(example11_phi())
    }

    #[test]
    fn hyperbolic_distance_ratio() {
        let d = ModelDomain::dented_ball(BallFamily::Ex11, 200).unwrap();
        let rec = iterate_orbit(&ex11(), CPoint2::ORIGIN, 0, 40, &d).unwrap();
        let e = &rec.entries;
        for k in 30..40 {
            let ratio = e[k + 1].bdist / e[k].bdist;
            assert!((ratio - 2.0 / 3.0).abs() < 0.05, "ratio {ratio} at {k}");
        }
        assert!(e.windows(2).all(|w| w[0].j < w[1].j));
    }

    #[test]
    fn identity_orbit_is_constant_and_not_converged() {
        let id = AnyMap::Ball(BallMap::identity());
        let x = CPoint2::real(0.1, 0.0);
        let rec = iterate_orbit(&id, x, -5, 20, &ModelDomain::ball()).unwrap();
        assert!(rec.entries.iter().all(|e| e.point == x));
        assert!(!rec.converged);
        assert!(rec.limit.is_none());
    }

    #[test]
    fn parabolic_distance_closed_form() {
        let d = ModelDomain::ball();
        let rec = iterate_family(|j| AnyMap::Ball(example12_phi(j)), CPoint2::ORIGIN, 1, 1000, &d).unwrap();
        let target = CPoint2::real(-1.0, 0.0);
        for e in &rec.entries {
            let want = 2.0 / Complex64::new(e.j as f64, 2.0).norm();
            assert!((e.point.dist(target) - want).abs() < 1e-9, "j = {}", e.j);
        }
    }

    #[test]
    fn limits_of_both_examples() {
        let d = ModelDomain::ball();
        let rec = iterate_orbit(&ex11(), CPoint2::ORIGIN, -60, 60, &d).unwrap();
        let fwd = orbit_limit(&rec, 10, 1e-3).unwrap();
        let bwd = orbit_limit_backward(&rec, 10, 1e-3).unwrap();
        assert!(fwd.dist(CPoint2::real(-1.0, 0.0)) < 1e-3);
        assert!(bwd.dist(CPoint2::real(1.0, 0.0)) < 1e-3);

        let p = AnyMap::Ball(example12_phi(1));
        let rec = iterate_orbit(&p, CPoint2::ORIGIN, -1000, 1000, &d).unwrap();
        for lim in [orbit_limit(&rec, 10, 1e-2), orbit_limit_backward(&rec, 10, 1e-2)] {
            assert!(lim.unwrap().dist(CPoint2::real(-1.0, 0.0)) < 1e-2);
        }
    }

    #[test]
    fn orbit_limit_needs_enough_entries() {
        let rec = iterate_orbit(&ex11(), CPoint2::ORIGIN, 0, 3, &ModelDomain::ball()).unwrap();
        assert!(orbit_limit(&rec, 10, 1.0).is_none());
    }

    #[test]
    fn verdict_stable_under_tail_doubling() {
        let rec = iterate_orbit(&ex11(), CPoint2::ORIGIN, 0, 120, &ModelDomain::ball()).unwrap();
        let a = orbit_limit(&rec, 10, 1e-6).unwrap();
        let b = orbit_limit(&rec, 20, 1e-6).unwrap();
        assert!(a.dist(b) < 1e-6);
    }

    #[test]
    fn outside_start_rejected() {
        let err = iterate_orbit(&ex11(), CPoint2::real(1.5, 0.0), 0, 3, &ModelDomain::ball()).unwrap_err();
        assert!(matches!(err, OrbitError::OutsideDomain(_)));
        assert!(matches!(
            iterate_orbit(&ex11(), CPoint2::ORIGIN, 3, 0, &ModelDomain::ball()),
            Err(OrbitError::EmptyRange(3, 0))
        ));
    }

    #[test]
    fn p0_orbit_tends_to_corners() {
        let d = ModelDomain::dented_bidisc(BidiscFamily::Cyclic, dent_center_p0(), 200).unwrap();
        let rec = boundary_orbit(&AnyMap::Bidisc(example21_phi()), dent_center_p0(), -60, 60, &d).unwrap();
        let fwd = orbit_limit(&rec, 10, 1e-3).unwrap();
        let bwd = orbit_limit_backward(&rec, 10, 1e-3).unwrap();
        assert!(fwd.dist(CPoint2::real(1.0, 1.0)) < 1e-3);
        assert!(bwd.dist(CPoint2::real(-1.0, -1.0)) < 1e-3);
    }

    #[test]
    fn ex11_samples_sit_at_two_points() {
        let fam = FamilySpec::Cyclic { generator: ex11(), js: symmetric_range(0, 60) };
        let d = ModelDomain::dented_ball(BallFamily::Ex11, 200).unwrap();
        let cloud = accumulation_samples(&fam, &[CPoint2::ORIGIN], &d, 1e-3).unwrap();
        assert!(!cloud.points.is_empty());
        for p in &cloud.points {
            let p = CPoint2::from_reals(*p);
            let near = p.dist(CPoint2::real(1.0, 0.0)).min(p.dist(CPoint2::real(-1.0, 0.0)));
            assert!(near < 1e-3);
        }
    }

    #[test]
    fn small_psi_grid_fills_circles_over_plus_minus_one() {
        let a_grid = crate::domains::default_psi_grid(32, &[0.2, 0.4, 0.6, 0.8]);
        let fam = FamilySpec::psi(symmetric_range(30, 60), a_grid).unwrap();
        let cloud = accumulation_samples(&fam, &[CPoint2::ORIGIN], &ModelDomain::bidisc(), 1e-3).unwrap();
        let mut args = Vec::new();
        for p in &cloud.points {
            let p = CPoint2::from_reals(*p);
            assert!((p.z1.re.abs() - 1.0).abs() < 1e-3 && p.z1.im.abs() < 1e-3);
            assert!((p.z2.norm() - 1.0).abs() < 1e-12);
            args.push(p.z2.arg());
        }
        args.sort_by(f64::total_cmp);
        let widest = args.windows(2).map(|w| w[1] - w[0]).fold(args[0] + std::f64::consts::TAU - args[args.len() - 1], f64::max);
        assert!(widest < 0.3, "largest angular gap {widest}");
    }

    #[test]
    fn small_mu_grid_fills_discs_over_plus_minus_one() {
        let mut base = Vec::new();
        for a in 0..20 {
            for b in 0..20 {
                let z2 = Complex64::new(-0.95 + 0.1 * a as f64, -0.95 + 0.1 * b as f64);
                if z2.norm() < 0.95 {
                    base.push(CPoint2::new(Complex64::new(0.0, 0.0), z2));
                }
            }
        }
        let fam = FamilySpec::Mu { js: symmetric_range(0, 60) };
        let cloud = accumulation_samples(&fam, &base, &ModelDomain::bidisc(), 1e-3).unwrap();
        let mut plus = 0;
        let mut minus = 0;
        for p in &cloud.points {
            let p = CPoint2::from_reals(*p);
            assert!(p.z2.norm() < 1.0);
            if p.z1.re > 0.0 {
                plus += 1;
            } else {
                minus += 1;
            }
        }
        assert!(plus > 100 && minus > 100);
    }

    #[test]
    fn empty_accumulation_is_a_value() {
        let fam = FamilySpec::Cyclic { generator: ex11(), js: vec![0, 1] };
        match accumulation_samples(&fam, &[CPoint2::ORIGIN], &ModelDomain::ball(), 1e-3) {
            Err(OrbitError::NoAccumulation { candidates: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn samples_are_order_deterministic() {
        let fam = FamilySpec::FullBidisc { samples: 5000, seed: 9, depth: 1e-3 };
        let a = accumulation_samples(&fam, &[CPoint2::ORIGIN], &ModelDomain::bidisc(), 1e-3).unwrap();
        let b = accumulation_samples(&fam, &[CPoint2::ORIGIN], &ModelDomain::bidisc(), 1e-3).unwrap();
        assert_eq!(a.points, b.points);
        assert_eq!(a.points.len(), 5000);
    }

    #[test]
    fn uniformity_values() {
        let lim = CPoint2::real(-1.0, 0.0);
        let v40 = uniformity_check(&ex11(), 0.5, 40, lim);
        assert!((v40 - 3.402e-4).abs() < 1e-6, "{v40}");
        for j in 10..60 {
            assert!(uniformity_check(&ex11(), 0.5, j + 5, lim) < uniformity_check(&ex11(), 0.5, j, lim));
        }
        // the z2 component sets the rate
        let ratio = uniformity_check(&ex11(), 0.5, 42, lim) / v40;
        assert!((ratio - 2.0 / 3.0).abs() < 0.01, "{ratio}");
        let id = AnyMap::Ball(BallMap::identity());
        assert_eq!(uniformity_check(&id, 0.5, 3, lim), uniformity_check(&id, 0.5, 40, lim));
    }
}
