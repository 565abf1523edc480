//! Product Gauss-Legendre quadrature on the unit 3-sphere.
//!
//! Hyperspherical angles `xi0 = cos th`, `xi1 = sin th cos chi`,
//! `xi2 = sin th sin chi cos phi`, `xi3 = sin th sin chi sin phi`, with
//! `dsigma = sin^2 th dth d(cos chi) dphi`.
//!
//! For a node parameter `n` the `th` direction uses `n` Gauss-Legendre nodes on
//! each of `[0, pi/2]` and `[pi/2, pi]`, `cos chi` uses `n/2` Gauss-Legendre
//! nodes and `phi` an `n/2`-point periodic trapezoid. Symbols of very
//! anisotropic sheets (`a` far from 1) peak sharply near the poles in `th`,
//! which is why the budget is weighted towards that direction.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::gamma::C64;
use super::symbols::Covector;

pub const MIN_NODES: usize = 4;
pub const DEFAULT_NODES: usize = 32;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, z).1;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Node set with weights summing to `2 pi^2`.
#[derive(Debug, Clone)]
pub struct CosphereRule {
    pub n: usize,
    pub nodes: Vec<(Covector, f64)>,
}

impl CosphereRule {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::TooFewNodes { min: MIN_NODES, got: n });
        }
        let (gx, gw) = gauss_legendre(n);
        let m = n / 2;
        let (ux, uw) = gauss_legendre(m);

        let mut theta = Vec::with_capacity(2 * n);
        for half in 0..2 {
            let lo = half as f64 * PI / 2.0;
            for (x, w) in gx.iter().zip(&gw) {
                let th = lo + PI / 4.0 * (x + 1.0);
                theta.push((th, w * PI / 4.0 * th.sin().powi(2)));
            }
        }

        let dphi = 2.0 * PI / m as f64;
        let mut nodes = Vec::with_capacity(theta.len() * m * m);
        for &(th, wt) in &theta {
            let (st, ct) = th.sin_cos();
            for (u, wu) in ux.iter().zip(&uw) {
                let su = (1.0 - u * u).sqrt();
                for k in 0..m {
                    let (sp, cp) = (k as f64 * dphi).sin_cos();
                    let xi = Covector::new(ct, st * u, st * su * cp, st * su * sp);
                    nodes.push((xi, wt * wu * dphi));
                }
            }
        }
        Ok(Self { n, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum in node order, so results are reproducible bit for bit.
    pub fn integrate<F: FnMut(&Covector) -> C64>(&self, mut f: F) -> C64 {
        self.nodes.iter().fold(C64::new(0.0, 0.0), |acc, (xi, w)| acc + f(xi) * *w)
    }

    pub fn try_integrate<T, F>(&self, mut f: F) -> Result<T>
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(&Covector) -> Result<T>,
    {
        let mut acc = T::default();
        for (xi, w) in &self.nodes {
            acc = acc + f(xi)? * *w;
        }
        Ok(acc)
    }
}

/// `int_{S^3} f dsigma` with the rule for node parameter `n`.
pub fn cosphere_integrate<F: FnMut(&Covector) -> C64>(f: F, n: usize) -> Result<C64> {
    Ok(CosphereRule::new(n)?.integrate(f))
}
