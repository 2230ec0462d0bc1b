//! Point clouds of boundary samples, leader clustering and box-counting
//! dimension.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::orbits::{accumulation_samples, OrbitError};
use crate::scenario::RunConfig;

#[derive(Debug, Error)]
pub enum AccumError {
    #[error("clustering radius must be positive (got {0})")]
    BadRadius(f64),
    #[error("box counting needs at least two scales (got {0})")]
    TooFewScales(usize),
    #[error("box side must be positive and finite (got {0})")]
    BadScale(f64),
    #[error("cloud is empty")]
    EmptyCloud,
    #[error("box counts increase with the box side: {0:?}")]
    NonMonotone(Vec<ScaleCount>),
    #[error("row {row}: {msg}")]
    Parse { row: usize, msg: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Domain(#[from] crate::domains::DomainError),
}

/// Points of ℂ² stored as `(Re z1, Im z1, Re z2, Im z2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<[f64; 4]>,
    pub provenance: String,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 4]>, provenance: impl Into<String>) -> Self {
        Self { points, provenance: provenance.into() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `re1,im1,re2,im2`; floats use the shortest
    /// representation that parses back exactly.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), AccumError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["re1", "im1", "re2", "im2"])?;
        for p in &self.points {
            out.write_record(p.iter().map(|x| x.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, provenance: &str) -> Result<Self, AccumError> {
        let mut rdr = csv::Reader::from_reader(r);
        if rdr.headers()?.iter().collect::<Vec<_>>() != ["re1", "im1", "re2", "im2"] {
            return Err(AccumError::Parse { row: 0, msg: "expected header re1,im1,re2,im2".into() });
        }
        let mut points = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |msg: String| AccumError::Parse { row: row + 1, msg };
            if rec.len() != 4 {
                return Err(bad(format!("expected 4 fields, found {}", rec.len())));
            }
            let mut p = [0.0_f64; 4];
            for (slot, field) in p.iter_mut().zip(rec.iter()) {
                *slot = field.trim().parse().map_err(|_| bad(format!("not a number: `{field}`")))?;
                if !slot.is_finite() {
                    return Err(bad("non-finite coordinate".into()));
                }
            }
            points.push(p);
        }
        Ok(Self::new(points, provenance))
    }

    /// JSON array of `[re1, im1, re2, im2]` arrays.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.points).expect("finite floats serialize")
    }

    pub fn from_json(s: &str, provenance: &str) -> Result<Self, AccumError> {
        Ok(Self::new(serde_json::from_str(s)?, provenance))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: [f64; 4],
    pub count: usize,
    /// Largest distance from a member to the final center.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    /// Points that could not be assigned (non-finite coordinates).
    pub unassigned: usize,
}

fn dist4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

type Cell = [i64; 4];

fn cell_of(p: &[f64; 4], side: f64) -> Cell {
    p.map(|x| (x / side).floor() as i64)
}

/// Greedy leader clustering in input order: each point joins the first
/// center within `radius`, else starts a new one; centers are running means.
pub fn cluster(cloud: &PointCloud, radius: f64) -> Result<ClusterSet, AccumError> {
    if !(radius > 0.0) {
        return Err(AccumError::BadRadius(radius));
    }
    let mut centers: Vec<[f64; 4]> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    // centers bucketed by cells of side `radius`; a center within `radius`
    // of p lies in one of the 3⁴ cells around p's cell
    let mut grid: HashMap<Cell, Vec<usize>> = HashMap::new();
    let mut labels = Vec::with_capacity(cloud.len());
    let mut unassigned = 0;
    for p in &cloud.points {
        if p.iter().any(|x| !x.is_finite()) {
            unassigned += 1;
            labels.push(usize::MAX);
            continue;
        }
        let home = cell_of(p, radius);
        let mut best: Option<usize> = None;
        for off in 0..81 {
            let mut c = home;
            let mut o = off;
            for slot in c.iter_mut() {
                *slot += (o % 3) as i64 - 1;
                o /= 3;
            }
            if let Some(ids) = grid.get(&c) {
                for &k in ids {
                    if best.is_none_or(|b| k < b) && dist4(&centers[k], p) <= radius {
                        best = Some(k);
                    }
                }
            }
        }
        let k = match best {
            Some(k) => k,
            None => {
                centers.push(*p);
                counts.push(0);
                grid.entry(home).or_default().push(centers.len() - 1);
                centers.len() - 1
            }
        };
        let before = cell_of(&centers[k], radius);
        counts[k] += 1;
        let n = counts[k] as f64;
        for (c, x) in centers[k].iter_mut().zip(p) {
            *c += (x - *c) / n;
        }
        let after = cell_of(&centers[k], radius);
        if after != before {
            if let Some(ids) = grid.get_mut(&before) {
                ids.retain(|&id| id != k);
            }
            grid.entry(after).or_default().push(k);
        }
        labels.push(k);
    }
    let mut radii = vec![0.0_f64; centers.len()];
    for (p, &k) in cloud.points.iter().zip(&labels) {
        if k != usize::MAX {
            radii[k] = radii[k].max(dist4(&centers[k], p));
        }
    }
    let clusters = centers
        .into_iter()
        .zip(counts)
        .zip(radii)
        .map(|((center, count), radius)| Cluster { center, count, radius })
        .collect();
    Ok(ClusterSet { clusters, unassigned })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleCount {
    pub eps: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub slope: f64,
    pub r2: f64,
    /// All counts equal: the fit carries no information.
    pub degenerate: bool,
    pub scales: Vec<ScaleCount>,
}

/// Number of occupied boxes `[kε, (k+1)ε)` in ℝ⁴.
pub fn box_count(points: &[[f64; 4]], eps: f64) -> usize {
    let mut seen = HashSet::with_capacity(points.len());
    for p in points {
        seen.insert(p.map(|x| (x / eps).floor() as i64));
    }
    seen.len()
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`.
///
/// Fewer than about a hundred points rarely give a meaningful fit; they are
/// still accepted so saturated clouds report slope 0.
pub fn box_counting_dimension(cloud: &PointCloud, eps_list: &[f64]) -> Result<DimensionEstimate, AccumError> {
    if eps_list.len() < 2 {
        return Err(AccumError::TooFewScales(eps_list.len()));
    }
    if let Some(&bad) = eps_list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(AccumError::BadScale(bad));
    }
    if cloud.is_empty() {
        return Err(AccumError::EmptyCloud);
    }
    let mut scales: Vec<ScaleCount> = eps_list
        .par_iter()
        .map(|&eps| ScaleCount { eps, count: box_count(&cloud.points, eps) })
        .collect();
    scales.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    if scales.windows(2).any(|w| w[1].count > w[0].count) {
        return Err(AccumError::NonMonotone(scales));
    }
    let xs: Vec<f64> = scales.iter().map(|s| -s.eps.ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|s| (s.count as f64).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 || sxx == 0.0 {
        return Ok(DimensionEstimate { slope: 0.0, r2: 0.0, degenerate: true, scales });
    }
    let slope = sxy / sxx;
    let r2 = (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0);
    Ok(DimensionEstimate { slope, r2, degenerate: false, scales })
}

/// `2^{-a}, …, 2^{-b}` in `steps_per_octave` steps per halving.
pub fn dyadic_scales(a: u32, b: u32, steps_per_octave: u32) -> Vec<f64> {
    let n = (b - a) * steps_per_octave;
    (0..=n)
        .map(|k| 2f64.powf(-(a as f64) - k as f64 / steps_per_octave as f64))
        .collect()
}

/// Run the accumulation pipeline for a scenario: harvest samples, cluster
/// them and fit the box-counting dimension.
pub fn estimate_s(config: &RunConfig) -> Result<(PointCloud, ClusterSet, DimensionEstimate), AccumError> {
    let domain = config.domain()?;
    let cloud = accumulation_samples(&config.family()?, &config.base_points(), &domain, config.threshold)?;
    let clusters = cluster(&cloud, config.cluster_radius)?;
    let dim = box_counting_dimension(&cloud, &config.scales)?;
    Ok((cloud, clusters, dim))
}
