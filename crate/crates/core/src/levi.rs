//! Levi form of a defining function at a boundary point, by finite
//! differences, and the resulting pseudoconvexity class.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::{ModelDomain, Parent};
use crate::moebius::CPoint2;

pub const DEFAULT_STEP: f64 = 1e-4;
/// Sign tolerance for the restricted Levi form.
pub const LEVI_TOL: f64 = 1e-3;
/// How close `f(p)` must be to zero for `p` to count as a boundary point.
pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeviError {
    #[error("point {point} is not on the boundary (f = {value:e})")]
    NotOnBoundary { point: String, value: f64 },
    #[error("defining function is not finite at stencil point {0}")]
    NonFinite(String),
    #[error("gradient vanishes at {0}")]
    DegenerateGradient(String),
}

/// A real-valued function whose zero set is the boundary.
pub trait DefiningFunction {
    fn value(&self, p: CPoint2) -> f64;

    /// False where the function is known not to be C² (e.g. the bidisc's
    /// distinguished boundary).
    fn smooth_at(&self, _p: CPoint2) -> bool {
        true
    }
}

impl<F: Fn(CPoint2) -> f64> DefiningFunction for F {
    fn value(&self, p: CPoint2) -> f64 {
        self(p)
    }
}

impl DefiningFunction for ModelDomain {
    fn value(&self, p: CPoint2) -> f64 {
        self.defining_value(p)
    }

    fn smooth_at(&self, p: CPoint2) -> bool {
        match self.parent() {
            Parent::Ball => true,
            Parent::Bidisc => (p.z1.norm_sqr() - p.z2.norm_sqr()).abs() > 4.0 * DEFAULT_STEP,
        }
    }
}

/// 2×2 Hermitian matrix `h[j][k] = ∂²f/∂z_j∂z̄_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianForm {
    pub h: [[Complex64; 2]; 2],
}

impl HermitianForm {
    pub fn new(h: [[Complex64; 2]; 2]) -> Self {
        Self { h }
    }

    /// `v* H v`.
    pub fn quad(&self, v: [Complex64; 2]) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..2 {
            for k in 0..2 {
                s += v[j].conj() * self.h[j][k] * v[k];
            }
        }
        s.re
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                worst = worst.max((self.h[j][k] - self.h[k][j].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in increasing order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let (a, d) = (self.h[0][0].re, self.h[1][1].re);
        let b = self.h[0][1].norm();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mid - rad, mid + rad]
    }

    pub fn max_diff(&self, other: &HermitianForm) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                worst = worst.max((self.h[j][k] - other.h[j][k]).norm());
            }
        }
        worst
    }
}

fn shifted(p: CPoint2, moves: &[(usize, f64)]) -> CPoint2 {
    let mut x = p.to_reals();
    for &(axis, d) in moves {
        x[axis] += d;
    }
    CPoint2::from_reals(x)
}

fn eval<F: DefiningFunction + ?Sized>(f: &F, q: CPoint2) -> Result<f64, LeviError> {
    let v = f.value(q);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(LeviError::NonFinite(q.to_string()))
    }
}

/// Central second differences in `(x1, y1, x2, y2)` combined into the
/// complex Hessian, then Hermitian-symmetrized.
pub fn complex_hessian<F: DefiningFunction + ?Sized>(f: &F, p: CPoint2, h: f64) -> Result<HermitianForm, LeviError> {
    let f0 = eval(f, p)?;
    let mut d2 = [[0.0_f64; 4]; 4];
    for a in 0..4 {
        let fp = eval(f, shifted(p, &[(a, h)]))?;
        let fm = eval(f, shifted(p, &[(a, -h)]))?;
        d2[a][a] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in a + 1..4 {
            let pp = eval(f, shifted(p, &[(a, h), (b, h)]))?;
            let pm = eval(f, shifted(p, &[(a, h), (b, -h)]))?;
            let mp = eval(f, shifted(p, &[(a, -h), (b, h)]))?;
            let mm = eval(f, shifted(p, &[(a, -h), (b, -h)]))?;
            d2[a][b] = (pp - pm - mp + mm) / (4.0 * h * h);
            d2[b][a] = d2[a][b];
        }
    }
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            m[j][k] = Complex64::new(d2[xj][xk] + d2[yj][yk], d2[xj][yk] - d2[yj][xk]) * 0.25;
        }
    }
    let mut sym = m;
    for j in 0..2 {
        for k in 0..2 {
            sym[j][k] = (m[j][k] + m[k][j].conj()) * 0.5;
        }
    }
    Ok(HermitianForm::new(sym))
}

/// `(∂f/∂z1, ∂f/∂z2)` by central differences.
pub fn complex_gradient<F: DefiningFunction + ?Sized>(f: &F, p: CPoint2, h: f64) -> Result<[Complex64; 2], LeviError> {
    let mut d = [0.0; 4];
    for (a, slot) in d.iter_mut().enumerate() {
        *slot = (eval(f, shifted(p, &[(a, h)]))? - eval(f, shifted(p, &[(a, -h)]))?) / (2.0 * h);
    }
    Ok([Complex64::new(d[0], -d[1]) * 0.5, Complex64::new(d[2], -d[3]) * 0.5])
}

/// Unit vector spanning the complex tangent line `Σ ∂f/∂z_j v_j = 0`.
pub fn complex_tangent<F: DefiningFunction + ?Sized>(f: &F, p: CPoint2) -> Result<[Complex64; 2], LeviError> {
    let g = complex_gradient(f, p, DEFAULT_STEP)?;
    let norm = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
    if norm < 1e-12 {
        return Err(LeviError::DegenerateGradient(p.to_string()));
    }
    Ok([-g[1] / norm, g[0] / norm])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeviClass {
    StronglyPseudoconvex,
    LeviDegenerate,
    NotPseudoconvex,
    NonSmooth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryClassification {
    pub class: LeviClass,
    /// `v* H v` on the unit complex tangent; NaN (null in JSON) at non-smooth points.
    pub levi_value: f64,
}

pub fn class_of(levi_value: f64) -> LeviClass {
    if levi_value > LEVI_TOL {
        LeviClass::StronglyPseudoconvex
    } else if levi_value < -LEVI_TOL {
        LeviClass::NotPseudoconvex
    } else {
        LeviClass::LeviDegenerate
    }
}

pub fn classify_boundary<F: DefiningFunction + ?Sized>(f: &F, p: CPoint2) -> Result<BoundaryClassification, LeviError> {
    let value = eval(f, p)?;
    if value.abs() >= BOUNDARY_TOL {
        return Err(LeviError::NotOnBoundary { point: p.to_string(), value });
    }
    if !f.smooth_at(p) {
        return Ok(BoundaryClassification { class: LeviClass::NonSmooth, levi_value: f64::NAN });
    }
    let v = complex_tangent(f, p)?;
    let levi_value = complex_hessian(f, p, DEFAULT_STEP)?.quad(v);
    Ok(BoundaryClassification { class: class_of(levi_value), levi_value })
}
