//! Gauss–Legendre rules, graded fixed rules and an adaptive Gauss–Kronrod integrator.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Adaptive 15-point Gauss–Kronrod integrator with global bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureEngine {
    rel_tol: f64,
    max_subdivisions: usize,
}

impl Default for QuadratureEngine {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureEngine {
    pub fn new(rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= 1e-3) {
            return Err(Error::invalid(
                "quadrature_tol",
                format!("{rel_tol:e} must lie in (0, 1e-3]"),
            ));
        }
        if max_subdivisions < 1 {
            return Err(Error::invalid("max_subdivisions", "must be at least 1"));
        }
        Ok(Self {
            rel_tol,
            max_subdivisions,
        })
    }

    /// Number of points in the underlying Kronrod rule.
    pub fn order(&self) -> usize {
        15
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }

    /// Integrates `f` over `[a, b]` until the error estimate drops below
    /// `max(abs_tol, rel_tol * |I|)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64, abs_tol: f64) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            });
        }
        let first = kronrod15(&f, a, b);
        let mut value = first.value;
        let mut error = first.error;
        let mut roundoff = first.roundoff;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        loop {
            let target = abs_tol.max(self.rel_tol * value.abs());
            if error <= target || error <= roundoff {
                break;
            }
            if heap.len() >= self.max_subdivisions {
                return Err(Error::Quadrature {
                    lower: a,
                    upper: b,
                    achieved: error,
                    requested: target,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.lower + worst.upper);
            if mid <= worst.lower || mid >= worst.upper {
                // interval cannot be split any further in floating point
                heap.push(worst);
                break;
            }
            let left = kronrod15(&f, worst.lower, mid);
            let right = kronrod15(&f, mid, worst.upper);
            value += left.value + right.value - worst.value;
            error += left.error + right.error - worst.error;
            roundoff += left.roundoff + right.roundoff - worst.roundoff;
            heap.push(left);
            heap.push(right);
        }
        // re-sum to shed the drift of the running updates
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !value.is_finite() {
            return Err(Error::Quadrature {
                lower: a,
                upper: b,
                achieved: f64::INFINITY,
                requested: abs_tol,
            });
        }
        Ok(Estimate {
            value,
            error,
            intervals: heap.len(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
    roundoff: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs *= scale;
    res_asc *= scale;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(roundoff);
    }
    if !error.is_finite() {
        error = f64::INFINITY;
    }
    Segment {
        lower: a,
        upper: b,
        value,
        error,
        roundoff,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one point");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// A fixed rule on the unit interval, applied to arbitrary subintervals.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl FixedRule {
    /// Plain Gauss–Legendre on `[0, 1]`.
    pub fn gauss(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self {
            nodes: x.iter().map(|&xi| 0.5 * (xi + 1.0)).collect(),
            weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        }
    }

    /// Gauss–Legendre through `x = 3u² − 2u³`, which clusters points at both ends.
    pub fn graded(n: usize) -> Self {
        let g = Self::gauss(n);
        let nodes = g.nodes.iter().map(|&u| u * u * (3.0 - 2.0 * u)).collect();
        let weights = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(&u, &w)| w * 6.0 * u * (1.0 - u))
            .collect();
        Self { nodes, weights }
    }

    /// Gauss–Legendre through `x = u²`, which removes `√x` behaviour at the left end.
    pub fn left_sqrt(n: usize) -> Self {
        let g = Self::gauss(n);
        let nodes = g.nodes.iter().map(|&u| u * u).collect();
        let weights = g
            .nodes
            .iter()
            .zip(&g.weights)
            .map(|(&u, &w)| 2.0 * u * w)
            .collect();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Points and weights mapped to `[a, b]`.
    pub fn points(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (a + len * x, len * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.points(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for p in 0..(2 * n) {
                let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
                let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((got - want).abs() < 1e-14, "n={n} p={p} got={got}");
            }
        }
    }

    #[test]
    fn kronrod_handles_inverse_sqrt_endpoint() {
        let q = QuadratureEngine::new(1e-12, 500).unwrap();
        let est = q.integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 0.0).unwrap();
        assert!((est.value - 2.0).abs() < 1e-10, "{est:?}");
    }

    #[test]
    fn kronrod_reports_failure_when_limit_hit() {
        let q = QuadratureEngine::new(1e-12, 3).unwrap();
        let err = q.integrate(|x| (1.0 / x).sin(), 1e-4, 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Quadrature { achieved, .. } if achieved > 0.0));
    }

    #[test]
    fn engine_rejects_loose_tolerance() {
        assert!(QuadratureEngine::new(1e-2, 10).is_err());
        assert!(QuadratureEngine::new(0.0, 10).is_err());
    }

    #[test]
    fn graded_rule_tames_endpoint_roots() {
        let rule = FixedRule::graded(12);
        let got = rule.integrate(0.0, 1.0, |x| x.sqrt() * (1.0 - x).sqrt());
        assert!((got - PI / 8.0).abs() < 1e-7, "{got}");
    }

    #[test]
    fn left_sqrt_rule_is_exact_for_half_powers() {
        let rule = FixedRule::left_sqrt(6);
        let got = rule.integrate(2.0, 3.0, |x| (x - 2.0).sqrt());
        assert!((got - 2.0 / 3.0).abs() < 1e-14);
    }
}
