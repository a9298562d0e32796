//! Coupling data model and the closed-form single-particle quantities of the
//! generalized Ising chain: the auxiliary-plane loop, the quasiparticle
//! dispersion, the Bogoliubov angle and the two critical fields.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of k samples used to discretize the loop.
pub const DEFAULT_GRID_SIZE: usize = 4096;

/// Parameters of one Hamiltonian instance.
///
/// `jx[n-1]` and `jy[n-1]` are the couplings between spins `n` sites apart,
/// `g` is the transverse field. Serialized as `{"R": .., "jx": [..], "jy": [..], "g": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoupling", into = "RawCoupling")]
pub struct CouplingSet {
    jx: Vec<f64>,
    jy: Vec<f64>,
    g: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCoupling {
    #[serde(rename = "R")]
    range: usize,
    jx: Vec<f64>,
    jy: Vec<f64>,
    g: f64,
}

impl TryFrom<RawCoupling> for CouplingSet {
    type Error = Error;

    fn try_from(raw: RawCoupling) -> Result<Self> {
        if raw.jx.len() != raw.range {
            return Err(Error::InvalidCoupling(format!(
                "R = {} but jx has {} entries",
                raw.range,
                raw.jx.len()
            )));
        }
        CouplingSet::new(raw.jx, raw.jy, raw.g)
    }
}

impl From<CouplingSet> for RawCoupling {
    fn from(c: CouplingSet) -> Self {
        RawCoupling {
            range: c.range(),
            jx: c.jx,
            jy: c.jy,
            g: c.g,
        }
    }
}

impl CouplingSet {
    pub fn new(jx: Vec<f64>, jy: Vec<f64>, g: f64) -> Result<Self> {
        if jx.is_empty() {
            return Err(Error::InvalidCoupling("R must be at least 1".into()));
        }
        if jx.len() != jy.len() {
            return Err(Error::InvalidCoupling(format!(
                "jx has {} entries but jy has {}",
                jx.len(),
                jy.len()
            )));
        }
        if !jx.iter().chain(&jy).all(|v| v.is_finite()) || !g.is_finite() {
            return Err(Error::InvalidCoupling("all entries must be finite".into()));
        }
        Ok(CouplingSet { jx, jy, g })
    }

    /// Coupling with only the `jx` channels set.
    pub fn pure_x(jx: Vec<f64>, g: f64) -> Result<Self> {
        let jy = vec![0.0; jx.len()];
        Self::new(jx, jy, g)
    }

    /// Interaction range R.
    pub fn range(&self) -> usize {
        self.jx.len()
    }

    pub fn jx(&self) -> &[f64] {
        &self.jx
    }

    pub fn jy(&self) -> &[f64] {
        &self.jy
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn with_g(&self, g: f64) -> Result<Self> {
        Self::new(self.jx.clone(), self.jy.clone(), g)
    }

    /// Same couplings with `jx` and `jy` exchanged, which reflects the loop
    /// through the x axis.
    pub fn swapped(&self) -> Self {
        CouplingSet {
            jx: self.jy.clone(),
            jy: self.jx.clone(),
            g: self.g,
        }
    }

    /// Iterator over `(n, jx[n], jy[n])` with n starting at 1.
    pub fn channels(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.jx
            .iter()
            .zip(&self.jy)
            .enumerate()
            .map(|(i, (&jx, &jy))| (i + 1, jx, jy))
    }
}

/// Map any finite angle into `[-pi, pi)`.
pub fn canonical_k(k: f64) -> f64 {
    let r = (k + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2*pi
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `(cos nk, sin nk)`, exact at the two high-symmetry momenta 0 and pi.
fn harmonic(n: usize, k: f64) -> (f64, f64) {
    // in-range momenta skip the wrap so that k and -k stay exact mirrors
    let kc = if k.abs() < PI { k } else { canonical_k(k) };
    if kc == 0.0 {
        (1.0, 0.0)
    } else if kc == -PI {
        (if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    } else {
        let (s, c) = (n as f64 * kc.abs()).sin_cos();
        (c, if kc < 0.0 { -s } else { s })
    }
}

/// Point of the auxiliary-plane loop at momentum `k`.
pub fn loop_point(c: &CouplingSet, k: f64) -> (f64, f64) {
    let mut x = 0.0;
    let mut y = 0.0;
    for (n, jx, jy) in c.channels() {
        let (cos, sin) = harmonic(n, k);
        x += (jx + jy) * cos;
        y += (jx - jy) * sin;
    }
    (x - c.g, y)
}

/// Derivative `(dx/dk, dy/dk)` of the loop at `k`.
pub fn loop_tangent(c: &CouplingSet, k: f64) -> (f64, f64) {
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (n, jx, jy) in c.channels() {
        let (cos, sin) = harmonic(n, k);
        let nf = n as f64;
        dx -= nf * (jx + jy) * sin;
        dy += nf * (jx - jy) * cos;
    }
    (dx, dy)
}

/// One sample of the loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSample {
    pub k: f64,
    pub x: f64,
    pub y: f64,
}

impl LoopSample {
    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Uniformly sampled loop over `k` in `[-pi, pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopCurve {
    samples: Vec<LoopSample>,
    r_min: f64,
}

impl LoopCurve {
    /// Build a curve from raw samples; `r_min` is recomputed.
    pub fn from_samples(samples: Vec<LoopSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(
                "a loop needs at least two samples".into(),
            ));
        }
        let r_min = samples
            .iter()
            .map(LoopSample::radius)
            .fold(f64::INFINITY, f64::min);
        Ok(LoopCurve { samples, r_min })
    }

    pub fn samples(&self) -> &[LoopSample] {
        &self.samples
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    /// CSV export with header `k,x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,x,y\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::io::fmt_f64(s.k),
                crate::io::fmt_f64(s.x),
                crate::io::fmt_f64(s.y)
            ));
        }
        out
    }
}

/// Sample the loop on `grid_size` uniform momenta `k_i = -pi + 2 pi i / grid_size`.
pub fn sample_loop(c: &CouplingSet, grid_size: usize) -> Result<LoopCurve> {
    let min = 4 * c.range();
    if grid_size < min {
        return Err(Error::Undersampled { grid_size, min });
    }
    let step = 2.0 * PI / grid_size as f64;
    let samples = (0..grid_size)
        .map(|i| {
            let k = -PI + step * i as f64;
            let (x, y) = loop_point(c, k);
            LoopSample { k, x, y }
        })
        .collect();
    LoopCurve::from_samples(samples)
}

/// Quasiparticle energy and Bogoliubov angle at one momentum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumSample {
    pub k: f64,
    pub epsilon: f64,
    pub theta: f64,
    /// Set when `epsilon == 0`; `theta` is then reported as 0.
    pub gapless: bool,
}

/// Dispersion `eps_k = 2 |r(k)|` with `cos theta = -2x/eps`, `sin theta = 2y/eps`.
pub fn dispersion(c: &CouplingSet, k: f64) -> SpectrumSample {
    let (x, y) = loop_point(c, k);
    let epsilon = 2.0 * x.hypot(y);
    if epsilon == 0.0 {
        return SpectrumSample {
            k,
            epsilon,
            theta: 0.0,
            gapless: true,
        };
    }
    SpectrumSample {
        k,
        epsilon,
        theta: y.atan2(-x),
        gapless: false,
    }
}

/// Fields `(g_plus, g_minus)` at which the gap closes at k = 0 and k = pi.
pub fn critical_fields(c: &CouplingSet) -> (f64, f64) {
    let mut g_plus = 0.0;
    let mut g_minus = 0.0;
    for (n, jx, jy) in c.channels() {
        g_plus += jx + jy;
        g_minus += if n % 2 == 0 { jx + jy } else { -(jx + jy) };
    }
    (g_plus, g_minus)
}

/// Names of the built-in parameter rows.
pub const PRESET_NAMES: [&str; 9] = ["a", "b", "c", "d", "e", "f", "g", "h", "i"];

/// Built-in parameter rows (a)-(i), all at g = 0.
pub fn preset(name: &str) -> Option<CouplingSet> {
    let (jx, jy): (&[f64], &[f64]) = match name {
        "a" => (&[0.4, 0.0], &[0.0, 0.6]),
        "b" => (&[0.0, 0.45], &[0.55, 0.0]),
        "c" => (&[0.8, 0.5], &[-0.2, 0.5]),
        "d" => (&[1.0], &[0.0]),
        "e" => (&[0.8, 0.4], &[0.0, 0.0]),
        "f" => (&[0.4, 0.6], &[0.0, 0.0]),
        "g" => (&[0.3, 0.2, 0.5], &[0.0; 3]),
        "h" => (&[0.25, 0.1, 0.15, 0.5], &[0.0; 4]),
        "i" => (&[0.2, 0.0, 0.15, 0.15, 0.5], &[0.0; 5]),
        _ => return None,
    };
    Some(CouplingSet::new(jx.to_vec(), jy.to_vec(), 0.0).expect("presets are valid"))
}
