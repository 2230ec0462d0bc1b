//! Named experiments and their default grids.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::accum::dyadic_scales;
use crate::domains::{
    default_psi_grid, dent_center, BallFamily, BidiscFamily, DomainError, ModelDomain, DEFAULT_J_MAX,
    DEFAULT_PSI_J_MAX,
};
use crate::moebius::{
    disc_mobius, example11_phi, example12_phi, example21_phi, lambda, mu, psi, AnyMap, BidiscMap, CPoint2,
};
use crate::orbits::{symmetric_range, FamilySpec, OrbitError, DEFAULT_THRESHOLD};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Ex11,
    Ex12,
    Ex21,
    Ex22,
    Ex23,
    Ex24,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Ex11,
        Scenario::Ex12,
        Scenario::Ex21,
        Scenario::Ex22,
        Scenario::Ex23,
        Scenario::Ex24,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Ex11 => "ex11",
            Scenario::Ex12 => "ex12",
            Scenario::Ex21 => "ex21",
            Scenario::Ex22 => "ex22",
            Scenario::Ex23 => "ex23",
            Scenario::Ex24 => "ex24",
        }
    }

    /// Map whose powers give the scenario's orbits.
    pub fn orbit_map(self) -> AnyMap {
        match self {
            Scenario::Ex11 => AnyMap::Ball(example11_phi()),
            Scenario::Ex12 => AnyMap::Ball(example12_phi(1)),
            Scenario::Ex21 => AnyMap::Bidisc(example21_phi()),
            Scenario::Ex22 => AnyMap::Bidisc(psi(1, Complex64::new(0.5, 0.0)).expect("nonzero parameter")),
            Scenario::Ex23 => AnyMap::Bidisc(mu(1)),
            Scenario::Ex24 => {
                let rho = disc_mobius(Complex64::new(0.0, 0.5), 0.0).expect("|a| < 1");
                AnyMap::Bidisc(BidiscMap::product(lambda(), rho))
            }
        }
    }

    /// Dimension of the accumulation set the scenario should reproduce.
    pub fn expected_dimension(self) -> Option<f64> {
        match self {
            Scenario::Ex11 | Scenario::Ex12 => None,
            Scenario::Ex21 => Some(0.0),
            Scenario::Ex22 => Some(1.0),
            Scenario::Ex23 => Some(2.0),
            Scenario::Ex24 => Some(3.0),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}` (expected one of ex11, ex12, ex21, ex22, ex23, ex24)"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    /// Family indices `j` with `j_lo ≤ |j| ≤ j_hi`.
    pub j_lo: i64,
    pub j_hi: i64,
    /// ψ parameters `a = r·e^{2πik/a_args}` for each modulus `r`.
    pub a_args: usize,
    pub a_moduli: Vec<f64>,
    /// Side of the square grid of z2 base points over the disc; 0 means the origin only.
    pub base_grid: usize,
    /// Sampled automorphisms for the full bidisc group.
    pub samples: usize,
    pub seed: u64,
    pub threshold: f64,
    pub scales: Vec<f64>,
    pub cluster_radius: f64,
    /// Truncation cap of the dented domain.
    pub domain_cap: i64,
}

impl RunConfig {
    pub fn new(scenario: Scenario) -> Self {
        let mut c = RunConfig {
            scenario,
            j_lo: 0,
            j_hi: 60,
            a_args: 32,
            a_moduli: vec![0.2, 0.4, 0.6, 0.8],
            base_grid: 0,
            samples: 0,
            seed: 0,
            threshold: DEFAULT_THRESHOLD,
            scales: dyadic_scales(3, 7, 1),
            cluster_radius: 0.1,
            domain_cap: DEFAULT_J_MAX,
        };
        match scenario {
            Scenario::Ex11 | Scenario::Ex21 => {}
            Scenario::Ex12 => c.j_hi = 1000,
            Scenario::Ex22 => {
                c.j_lo = 30;
                c.a_args = 2048;
                c.domain_cap = DEFAULT_PSI_J_MAX;
            }
            Scenario::Ex23 => {
                c.j_lo = 55;
                c.base_grid = 256;
            }
            Scenario::Ex24 => {
                c.samples = 1_000_000;
                c.scales = dyadic_scales(2, 4, 2);
            }
        }
        c
    }

    pub fn js(&self) -> Vec<i64> {
        symmetric_range(self.j_lo, self.j_hi)
    }

    pub fn domain(&self) -> Result<ModelDomain, DomainError> {
        let cap = self.domain_cap;
        match self.scenario {
            Scenario::Ex11 => ModelDomain::dented_ball(BallFamily::Ex11, cap),
            Scenario::Ex12 => ModelDomain::dented_ball(BallFamily::Ex12, cap),
            Scenario::Ex21 => ModelDomain::dented_bidisc(BidiscFamily::Cyclic, dent_center(), cap),
            Scenario::Ex22 => ModelDomain::dented_bidisc(BidiscFamily::Psi, dent_center(), cap),
            Scenario::Ex23 => ModelDomain::dented_bidisc(BidiscFamily::Mu, dent_center(), cap),
            Scenario::Ex24 => ModelDomain::dented_bidisc(BidiscFamily::Full, dent_center(), cap),
        }
    }

    pub fn family(&self) -> Result<FamilySpec, OrbitError> {
        Ok(match self.scenario {
            Scenario::Ex11 | Scenario::Ex12 | Scenario::Ex21 => {
                FamilySpec::Cyclic { generator: self.scenario.orbit_map(), js: self.js() }
            }
            Scenario::Ex22 => FamilySpec::psi(self.js(), default_psi_grid(self.a_args, &self.a_moduli))?,
            Scenario::Ex23 => FamilySpec::Mu { js: self.js() },
            Scenario::Ex24 => FamilySpec::FullBidisc { samples: self.samples, seed: self.seed, depth: self.threshold },
        })
    }

    /// The origin, or cell centers of a `base_grid²` grid on `[−1, 1]²`
    /// lying in the open disc, used as z2 with z1 = 0.
    pub fn base_points(&self) -> Vec<CPoint2> {
        let n = self.base_grid;
        if n == 0 {
            return vec![CPoint2::ORIGIN];
        }
        let tick = |k: usize| -1.0 + (2 * k + 1) as f64 / n as f64;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                let z2 = Complex64::new(tick(a), tick(b));
                if z2.norm() < 1.0 {
                    out.push(CPoint2::new(Complex64::new(0.0, 0.0), z2));
                }
            }
        }
        out
    }
}
