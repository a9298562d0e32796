//! Berry connection, curvature and Chern number of the lower band of the
//! 2D-to-3D extended loop Hamiltonian.
//!
//! The planar loop `(x(k), y(k))` is lifted to a closed surface over
//! `(k, phi)`, with `phi = pi/2` recovering the original loop. All Berry
//! quantities use closed forms of the lower-band eigenstate; no eigenvector is
//! built numerically.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{loop_point, loop_tangent, sample_loop, CouplingSet, DEFAULT_GRID_SIZE};
use crate::winding::{swept_angle, GAP_TOLERANCE};

/// How the planar loop is lifted into three dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtensionKind {
    /// `(r sin phi cos theta, r sin phi sin theta, cos phi)`.
    UnitSphereAngle,
    /// `r (sin phi cos theta, sin phi sin theta, cos phi)`.
    RadialScaled,
}

/// Orientation of the polar angle `theta` of the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    /// `theta` as defined by the loop; the Chern number comes out as `-N`.
    AsWritten,
    /// `theta -> -theta`; the Chern number equals the winding number.
    #[default]
    ThetaFlipped,
}

impl SignConvention {
    fn sign(self) -> f64 {
        match self {
            SignConvention::AsWritten => 1.0,
            SignConvention::ThetaFlipped => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChernMethod {
    /// Boundary formula from the unwrapped loop angle.
    AnalyticBoundary,
    /// Midpoint quadrature of the curvature over `(k, cos phi)`.
    #[serde(rename = "quadrature")]
    Quadrature2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerryField {
    coupling: CouplingSet,
    extension: ExtensionKind,
    convention: SignConvention,
}

/// Loop data needed at one momentum.
#[derive(Debug, Clone, Copy)]
struct LoopLocal {
    /// Radius entering the lower-band eigenstate: `r` or 1.
    rho: f64,
    /// `d theta / dk` with the sign convention applied.
    dtheta: f64,
}

impl BerryField {
    pub fn new(coupling: CouplingSet, extension: ExtensionKind, convention: SignConvention) -> Self {
        BerryField {
            coupling,
            extension,
            convention,
        }
    }

    pub fn coupling(&self) -> &CouplingSet {
        &self.coupling
    }

    pub fn extension(&self) -> ExtensionKind {
        self.extension
    }

    pub fn convention(&self) -> SignConvention {
        self.convention
    }

    /// Point of the extended surface at `(k, phi)`.
    pub fn extended_point(&self, k: f64, phi: f64) -> [f64; 3] {
        let (x, y) = loop_point(&self.coupling, k);
        let r = x.hypot(y);
        let s = self.convention.sign();
        let (sin_phi, cos_phi) = phi.sin_cos();
        match self.extension {
            ExtensionKind::UnitSphereAngle => [x * sin_phi, s * y * sin_phi, cos_phi],
            ExtensionKind::RadialScaled => [x * sin_phi, s * y * sin_phi, r * cos_phi],
        }
    }

    /// `d theta / dk = (x y' - y x') / r^2`, zero where the loop hits the origin.
    pub fn dtheta_dk(&self, k: f64) -> f64 {
        self.local(k).dtheta
    }

    fn local(&self, k: f64) -> LoopLocal {
        let (x, y) = loop_point(&self.coupling, k);
        let (dx, dy) = loop_tangent(&self.coupling, k);
        let r2 = x * x + y * y;
        let r = r2.sqrt();
        let dtheta = if r2 > 0.0 {
            self.convention.sign() * (x * dy - y * dx) / r2
        } else {
            0.0
        };
        let rho = match self.extension {
            ExtensionKind::UnitSphereAngle => r,
            ExtensionKind::RadialScaled => 1.0,
        };
        LoopLocal { rho, dtheta }
    }

    /// Lower-band energy of the normalized extended field,
    /// `E = sqrt(cos^2 phi + rho^2 sin^2 phi)`.
    pub fn band_energy(&self, k: f64, phi: f64) -> f64 {
        let rho = self.local(k).rho;
        let (s, c) = phi.sin_cos();
        (c * c + rho * rho * s * s).sqrt()
    }

    /// Berry connection `A_k` of the lower band.
    pub fn connection_k(&self, k: f64, phi: f64) -> Result<f64> {
        let l = self.local(k);
        let (sin_phi, cos_phi) = phi.sin_cos();
        let rs = l.rho * sin_phi;
        let e = (cos_phi * cos_phi + rs * rs).sqrt();
        if cos_phi > 0.0 {
            if rs == 0.0 {
                return Err(Error::GaugeSingularity { k, phi });
            }
            // E - cos phi = (rho sin phi)^2 / (E + cos phi) avoids cancellation
            Ok(-(e + cos_phi) / (2.0 * e) * l.dtheta)
        } else {
            if e < 1e-12 {
                return Err(Error::BandTouching { k, phi });
            }
            Ok(-rs * rs / (2.0 * e * (e - cos_phi)) * l.dtheta)
        }
    }

    /// Berry connection `A_phi` of the lower band, which vanishes identically.
    pub fn connection_phi(&self, _k: f64, _phi: f64) -> f64 {
        0.0
    }

    /// Berry curvature `Omega_{k phi} = -rho^2 sin phi / (2 E^3) * d theta / dk`.
    pub fn curvature(&self, k: f64, phi: f64) -> Result<f64> {
        let l = self.local(k);
        let (sin_phi, cos_phi) = phi.sin_cos();
        let rs = l.rho * sin_phi;
        let e = (cos_phi * cos_phi + rs * rs).sqrt();
        // cos(pi/2) is 6e-17, not 0
        if e < 1e-12 {
            return Err(Error::BandTouching { k, phi });
        }
        Ok(-l.rho * l.rho * sin_phi / (2.0 * e * e * e) * l.dtheta)
    }
}

pub fn berry_connection_k(field: &BerryField, k: f64, phi: f64) -> Result<f64> {
    field.connection_k(k, phi)
}

pub fn berry_curvature(field: &BerryField, k: f64, phi: f64) -> Result<f64> {
    field.curvature(k, phi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernResult {
    pub c: i64,
    pub raw: f64,
    pub method: ChernMethod,
}

/// Quadrature grid `(nk, nphi)` used when none is given.
pub const DEFAULT_CHERN_GRID: (usize, usize) = (1024, 1024);

/// `(r^2 / 2) * integral over t in (-1, 1) of (r^2 - (r^2 - 1) t^2)^(-3/2)`,
/// which equals 1 for every r > 0. Composite Gauss-Legendre on `panels`
/// equal panels of 8 nodes each.
pub fn polar_integral(r: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(8);
    let r2 = r * r;
    let width = 2.0 / panels as f64;
    let per_panel: Vec<f64> = (0..panels)
        .map(|p| {
            let mid = -1.0 + (p as f64 + 0.5) * width;
            nodes
                .iter()
                .zip(&weights)
                .map(|(&u, &w)| {
                    let t = mid + 0.5 * width * u;
                    let e2 = r2 - (r2 - 1.0) * t * t;
                    w / (e2 * e2.sqrt())
                })
                .sum::<f64>()
                * 0.5
                * width
        })
        .collect();
    0.5 * r2 * pairwise_sum(&per_panel)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Sum with a fixed binary-tree order, so the result does not depend on how
/// the inputs were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn chern_number(field: &BerryField, method: ChernMethod, grid: (usize, usize)) -> Result<ChernResult> {
    // criticality is judged on the same loop sampling as the winding number
    let curve = sample_loop(&field.coupling, DEFAULT_GRID_SIZE.max(grid.0))?;
    if curve.r_min() <= GAP_TOLERANCE {
        return Err(Error::ChernAtCriticality { r_min: curve.r_min() });
    }
    let raw = match method {
        ChernMethod::AnalyticBoundary => {
            // c = -(theta(2 pi) - theta(0)) / 2 pi under the loop's own theta
            -field.convention.sign() * swept_angle(&curve) / (2.0 * PI)
        }
        ChernMethod::Quadrature2D => curvature_integral(field, grid)?,
    };
    let c = raw.round();
    if (raw - c).abs() >= 0.25 {
        return Err(Error::InconsistentChern { raw });
    }
    Ok(ChernResult {
        c: c as i64,
        raw,
        method,
    })
}

/// `(1 / 2 pi) * integral of Omega over k in [0, 2 pi), phi in (0, pi)`.
///
/// With `t = cos phi` the phi integral becomes
/// `-rho^2 theta'(k) / 2 * integral of (rho^2 - (rho^2 - 1) t^2)^(-3/2) dt`,
/// evaluated by the midpoint rule in both `k` and `t`. Rows in `k` are
/// evaluated in parallel and reduced pairwise in index order.
fn curvature_integral(field: &BerryField, (nk, nt): (usize, usize)) -> Result<f64> {
    if nk == 0 || nt == 0 {
        return Err(Error::InvalidArgument("quadrature grid must be non-empty".into()));
    }
    let dk = 2.0 * PI / nk as f64;
    let dt = 2.0 / nt as f64;
    let rows: Vec<f64> = (0..nk)
        .into_par_iter()
        .map(|i| {
            let k = (i as f64 + 0.5) * dk;
            let l = field.local(k);
            let rho2 = l.rho * l.rho;
            let cells: Vec<f64> = (0..nt)
                .map(|j| {
                    let t = -1.0 + (j as f64 + 0.5) * dt;
                    let e2 = rho2 - (rho2 - 1.0) * t * t;
                    1.0 / (e2 * e2.sqrt())
                })
                .collect();
            -0.5 * rho2 * l.dtheta * pairwise_sum(&cells) * dt
        })
        .collect();
    Ok(pairwise_sum(&rows) * dk / (2.0 * PI))
}

/// Surface samples `(k, phi, x, y, z)` on a uniform grid, for external plotting.
pub fn surface_samples(field: &BerryField, nk: usize, nphi: usize) -> Vec<[f64; 5]> {
    let mut out = Vec::with_capacity(nk * nphi);
    for i in 0..nk {
        let k = -PI + 2.0 * PI * i as f64 / nk as f64;
        for j in 0..nphi {
            let phi = PI * j as f64 / (nphi.max(2) - 1) as f64;
            let [x, y, z] = field.extended_point(k, phi);
            out.push([k, phi, x, y, z]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::preset;
    use std::f64::consts::FRAC_PI_2;

    fn field(name: &str, convention: SignConvention) -> BerryField {
        BerryField::new(preset(name).unwrap(), ExtensionKind::UnitSphereAngle, convention)
    }

    fn unit_circle() -> BerryField {
        field("d", SignConvention::AsWritten)
    }

    #[test]
    fn connection_on_equator_of_unit_circle() {
        let f = unit_circle();
        for k in [-2.0, 0.1, 1.3] {
            assert!((f.dtheta_dk(k) - 1.0).abs() < 1e-14);
            assert!((f.band_energy(k, FRAC_PI_2) - 1.0).abs() < 1e-15);
            assert!((f.connection_k(k, FRAC_PI_2).unwrap() + 0.5).abs() < 1e-14);
            assert!((f.curvature(k, FRAC_PI_2).unwrap() + 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn connection_vanishes_at_south_pole() {
        let f = field("g", SignConvention::AsWritten);
        assert!(f.connection_k(0.4, PI).unwrap().abs() < 1e-30);
        assert!(f.connection_k(0.4, PI - 1e-6).unwrap().abs() < 1e-10);
    }

    #[test]
    fn north_pole_is_gauge_singular() {
        let f = unit_circle();
        assert!(matches!(f.connection_k(0.3, 0.0), Err(Error::GaugeSingularity { .. })));
    }

    #[test]
    fn band_touching_needs_zero_radius_on_equator() {
        let c = CouplingSet::new(vec![1.0], vec![0.0], 1.0).unwrap();
        let f = BerryField::new(c, ExtensionKind::UnitSphereAngle, SignConvention::AsWritten);
        assert!(matches!(f.curvature(0.0, FRAC_PI_2), Err(Error::BandTouching { .. })));
        assert!(f.curvature(0.0, 1.0).is_ok());
    }

    #[test]
    fn a_phi_is_zero() {
        let f = field("a", SignConvention::ThetaFlipped);
        assert_eq!(f.connection_phi(0.3, 1.1), 0.0);
    }

    #[test]
    fn curvature_vanishes_where_angle_is_stationary() {
        // row c winds zero times, so theta' must change sign somewhere
        let f = field("c", SignConvention::AsWritten);
        let ks: Vec<f64> = (0..64).map(|i| -PI + 2.0 * PI * i as f64 / 64.0).collect();
        let i = (0..63)
            .find(|&i| f.dtheta_dk(ks[i]).signum() != f.dtheta_dk(ks[i + 1]).signum())
            .unwrap();
        let (mut a, mut b) = (ks[i], ks[i + 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f.dtheta_dk(m).signum() == f.dtheta_dk(a).signum() {
                a = m;
            } else {
                b = m;
            }
        }
        assert!(f.curvature(a, 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn curvature_is_minus_phi_derivative_of_connection() {
        let f = field("h", SignConvention::ThetaFlipped);
        let h = 1e-4;
        for (k, phi) in [(0.2, 0.7), (1.9, 2.4), (-2.2, 1.5)] {
            let fd = -(f.connection_k(k, phi + h).unwrap() - f.connection_k(k, phi - h).unwrap()) / (2.0 * h);
            let om = f.curvature(k, phi).unwrap();
            assert!((fd - om).abs() < 1e-6 * om.abs().max(1.0), "{fd} vs {om}");
        }
    }

    #[test]
    fn equator_reproduces_loop() {
        for ext in [ExtensionKind::UnitSphereAngle, ExtensionKind::RadialScaled] {
            let f = BerryField::new(preset("b").unwrap(), ext, SignConvention::AsWritten);
            let [x, y, z] = f.extended_point(0.9, FRAC_PI_2);
            let (lx, ly) = loop_point(f.coupling(), 0.9);
            assert!((x - lx).abs() < 1e-15 && (y - ly).abs() < 1e-15 && z.abs() < 1e-15);
        }
    }

    #[test]
    fn polar_integral_identity() {
        for r in [0.1, 0.5, 1.0, 2.0, 10.0] {
            assert!((polar_integral(r, 512) - 1.0).abs() < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn chern_examples() {
        for method in [ChernMethod::AnalyticBoundary, ChernMethod::Quadrature2D] {
            let grid = (256, 256);
            let d = chern_number(&field("d", SignConvention::ThetaFlipped), method, grid).unwrap();
            assert_eq!(d.c, 1);
            let a = chern_number(&field("a", SignConvention::ThetaFlipped), method, grid).unwrap();
            assert_eq!(a.c, -2);
            let a = chern_number(&field("a", SignConvention::AsWritten), method, grid).unwrap();
            assert_eq!(a.c, 2);
            for conv in [SignConvention::AsWritten, SignConvention::ThetaFlipped] {
                assert_eq!(chern_number(&field("c", conv), method, grid).unwrap().c, 0);
            }
        }
    }

    #[test]
    fn radial_extension_gives_same_magnitude() {
        let f = BerryField::new(preset("g").unwrap(), ExtensionKind::RadialScaled, SignConvention::AsWritten);
        let r = chern_number(&f, ChernMethod::Quadrature2D, (512, 512)).unwrap();
        assert_eq!(r.c, -3);
    }

    #[test]
    fn critical_loop_has_no_chern_number() {
        let c = CouplingSet::new(vec![1.0], vec![0.0], 1.0).unwrap();
        let f = BerryField::new(c, ExtensionKind::UnitSphereAngle, SignConvention::ThetaFlipped);
        assert!(matches!(
            chern_number(&f, ChernMethod::AnalyticBoundary, DEFAULT_CHERN_GRID),
            Err(Error::ChernAtCriticality { .. })
        ));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 14 is within the 2n - 1 exactness limit
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((q - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }
}
