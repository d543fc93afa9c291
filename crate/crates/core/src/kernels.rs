//! Influence functions A_k(r) of the hat pressures and their derivatives.
//!
//! The opening kernel factors as `A(r) = ∫_r^a J(z)/√(z²−r²) dz` with the
//! inner profile `J(z) = ∫_0^z y ψ(y)/√(z²−y²) dy`. For hat functions `J` is
//! assembled from the closed forms I₁..I₄; the outer integral is done
//! numerically after subtracting the endpoint singularity.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{DlForm, RadialMesh};
use crate::quadrature::QuadratureEngine;

const RADICAND_CLAMP: f64 = 1e-14;

/// √(z² − c²) for the internal evaluations, where the case logic already
/// guarantees z ≥ c up to rounding.
#[inline]
fn root(z: f64, c: f64) -> f64 {
    let r = (z - c) * (z + c);
    if r > 0.0 {
        r.sqrt()
    } else {
        0.0
    }
}

#[inline]
fn at(x: f64, s: f64) -> f64 {
    x.atan2(s)
}

fn checked_root(what: &'static str, z: f64, c: f64) -> Result<f64> {
    let r = (z - c) * (z + c);
    if r >= 0.0 {
        Ok(r.sqrt())
    } else if r >= -RADICAND_CLAMP * z.abs().max(c.abs()).powi(2) {
        Ok(0.0)
    } else {
        Err(Error::Domain {
            what,
            radicand: r,
            argument: z,
        })
    }
}

/// Rising half of hat `k` integrated from (k−1)h up to z, for (k−1)h ≤ z ≤ kh.
pub fn inner_i1(z: f64, k: usize, h: f64) -> Result<f64> {
    let cm = (k as f64 - 1.0) * h;
    let sm = checked_root("I1", z, cm)?;
    Ok(i1(z, cm, sm, h))
}

/// Rising half of hat `k` integrated over its full support, for z ≥ kh.
pub fn inner_i2(z: f64, k: usize, h: f64) -> Result<f64> {
    let ck = k as f64 * h;
    let sk = checked_root("I2", z, ck)?;
    let cm = ck - h;
    let sm = checked_root("I2", z, cm)?;
    Ok(i2(z, cm, sm, ck, sk, h))
}

/// Falling half of hat `k` integrated from kh up to z, for kh ≤ z ≤ (k+1)h.
pub fn inner_i3(z: f64, k: usize, h: f64) -> Result<f64> {
    let ck = k as f64 * h;
    let sk = checked_root("I3", z, ck)?;
    Ok(i3(z, ck, sk, h))
}

/// Falling half of hat `k` integrated over its full support, for z ≥ (k+1)h.
pub fn inner_i4(z: f64, k: usize, h: f64) -> Result<f64> {
    let ck = k as f64 * h;
    let cp = ck + h;
    let sp = checked_root("I4", z, cp)?;
    let sk = checked_root("I4", z, ck)?;
    Ok(i4(z, ck, sk, cp, sp, h))
}

#[inline]
fn i1(z: f64, cm: f64, sm: f64, h: f64) -> f64 {
    (PI * z * z - 2.0 * cm * sm - 2.0 * z * z * at(cm, sm)) / (4.0 * h)
}

#[inline]
fn i2(z: f64, cm: f64, sm: f64, ck: f64, sk: f64, h: f64) -> f64 {
    ((h - ck) * sm + (ck - 2.0 * h) * sk - z * z * at(cm, sm) + z * z * at(ck, sk)) / (2.0 * h)
}

#[inline]
fn i3(z: f64, ck: f64, sk: f64, h: f64) -> f64 {
    (-PI * z * z + 2.0 * (2.0 * h + ck) * sk + 2.0 * z * z * at(ck, sk)) / (4.0 * h)
}

#[inline]
fn i4(z: f64, ck: f64, sk: f64, cp: f64, sp: f64, h: f64) -> f64 {
    (-(h + ck) * sp + (2.0 * h + ck) * sk + z * z * at(ck, sk) - z * z * at(cp, sp)) / (2.0 * h)
}

/// Inner profile of an outer Abel-type integral.
pub trait InnerProfile {
    fn value(&self, z: f64) -> f64;
    /// dJ/dz; may be infinite at a point where J is only continuous.
    fn slope(&self, z: f64) -> f64;
    /// J vanishes identically for z ≤ this radius.
    fn support_start(&self) -> f64;
    /// Points above the support start where J is not smooth, ascending.
    fn breakpoints(&self) -> Vec<f64>;
    /// Typical size of J, used to set an absolute quadrature floor.
    fn magnitude(&self) -> f64;
    /// Fluid radius the profile scales with.
    fn fluid_radius(&self) -> f64;
    /// Coefficient c of the `c z/√(z²−ℓ²)` part of the slope beyond ℓ.
    fn front_coefficient(&self) -> f64 {
        0.0
    }
    /// Slope without the front part.
    fn regular_slope(&self, z: f64) -> f64 {
        self.slope(z)
    }
}

/// Value and slope of hat `k`'s profile. The slope returned excludes the
/// `−z/√(z²−ℓ²)` term of the front hat beyond ℓ, which callers add.
#[inline]
pub(crate) fn hat_eval(k: usize, n: usize, h: f64, ell: f64, z: f64) -> (f64, f64) {
    let node = |j: usize| if j == n { ell } else { j as f64 * h };
    if k == 0 {
        let s0 = z;
        if z < h {
            (i3(z, 0.0, s0, h), 1.0 - PI * z / (2.0 * h))
        } else {
            let sp = root(z, h);
            (i4(z, 0.0, s0, h, sp, h), 1.0 - z * at(h, sp) / h)
        }
    } else {
        let cm = node(k - 1);
        if z <= cm {
            return (0.0, 0.0);
        }
        let ck = node(k);
        let sm = root(z, cm);
        let atm = at(cm, sm);
        if z < ck {
            return (i1(z, cm, sm, h), z * (PI - 2.0 * atm) / (2.0 * h));
        }
        let sk = root(z, ck);
        let atk = at(ck, sk);
        let left = i2(z, cm, sm, ck, sk, h);
        let left_slope = z * (atk - atm) / h;
        if k == n {
            return (left, left_slope);
        }
        let cp = node(k + 1);
        if z < cp {
            (
                left + i3(z, ck, sk, h),
                left_slope - PI * z / (2.0 * h) + z * atk / h,
            )
        } else {
            let sp = root(z, cp);
            (
                left + i4(z, ck, sk, cp, sp, h),
                left_slope + z * (atk - at(cp, sp)) / h,
            )
        }
    }
}

/// `z/√(z²−ℓ²)` for z > ℓ, else 0.
#[inline]
pub(crate) fn front_singular_slope(ell: f64, z: f64) -> f64 {
    if z < ell {
        0.0
    } else {
        let s = root(z, ell);
        z / s
    }
}

/// Inner profile of hat function ψ_k.
#[derive(Debug, Clone, Copy)]
pub struct HatProfile {
    k: usize,
    n: usize,
    h: f64,
    ell: f64,
}

impl HatProfile {
    pub fn new(mesh: &RadialMesh, k: usize) -> Self {
        assert!(k <= mesh.elements(), "hat index {k} beyond mesh");
        Self {
            k,
            n: mesh.elements(),
            h: mesh.h(),
            ell: mesh.fluid_radius(),
        }
    }
}

impl InnerProfile for HatProfile {
    fn value(&self, z: f64) -> f64 {
        hat_eval(self.k, self.n, self.h, self.ell, z).0
    }

    fn slope(&self, z: f64) -> f64 {
        let s = hat_eval(self.k, self.n, self.h, self.ell, z).1;
        if self.k == self.n && z >= self.ell {
            s - front_singular_slope(self.ell, z)
        } else {
            s
        }
    }

    fn support_start(&self) -> f64 {
        if self.k == 0 {
            0.0
        } else {
            (self.k - 1) as f64 * self.h
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let node = |j: usize| if j == self.n { self.ell } else { j as f64 * self.h };
        if self.k == 0 {
            vec![node(1)]
        } else if self.k == self.n {
            vec![self.ell]
        } else {
            vec![node(self.k), node(self.k + 1)]
        }
    }

    fn magnitude(&self) -> f64 {
        self.h
    }

    fn fluid_radius(&self) -> f64 {
        self.ell
    }

    fn front_coefficient(&self) -> f64 {
        if self.k == self.n {
            -1.0
        } else {
            0.0
        }
    }

    fn regular_slope(&self, z: f64) -> f64 {
        hat_eval(self.k, self.n, self.h, self.ell, z).1
    }
}

/// Inner profile of unit pressure on the lag annulus `[ℓ, a]`: √(z²−ℓ²).
#[derive(Debug, Clone, Copy)]
pub struct LagProfile {
    ell: f64,
}

impl LagProfile {
    pub fn new(ell: f64) -> Self {
        Self { ell }
    }
}

impl InnerProfile for LagProfile {
    fn value(&self, z: f64) -> f64 {
        if z <= self.ell {
            0.0
        } else {
            root(z, self.ell)
        }
    }

    fn slope(&self, z: f64) -> f64 {
        front_singular_slope(self.ell, z)
    }

    fn support_start(&self) -> f64 {
        self.ell
    }

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn magnitude(&self) -> f64 {
        self.ell
    }

    fn fluid_radius(&self) -> f64 {
        self.ell
    }

    fn front_coefficient(&self) -> f64 {
        1.0
    }

    fn regular_slope(&self, _z: f64) -> f64 {
        0.0
    }
}

fn check_radius(what: &'static str, r: f64, a: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 || r > a {
        Err(Error::OutOfRange { what, r, limit: a })
    } else {
        Ok(())
    }
}

fn segments<P: InnerProfile + ?Sized>(p: &P, lo: f64, a: f64) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo];
    cuts.extend(p.breakpoints().into_iter().filter(|&b| b > lo && b < a));
    cuts.push(a);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn abs_floor<P: InnerProfile + ?Sized>(p: &P, q: &QuadratureEngine) -> f64 {
    q.rel_tol() * 1e-3 * p.magnitude().abs()
}

/// ∫ g(z, z−r) dz over `[lo, hi]` through `z = lo + (hi−lo)u²`.
fn sqrt_left<G: Fn(f64, f64) -> f64>(
    q: &QuadratureEngine,
    lo: f64,
    hi: f64,
    r: f64,
    abs_tol: f64,
    g: G,
) -> Result<f64> {
    let d = hi - lo;
    let gap = lo - r;
    let est = q.integrate(
        |u| {
            let x = d * u * u;
            2.0 * d * u * g(lo + x, gap + x)
        },
        0.0,
        1.0,
        abs_tol,
    )?;
    Ok(est.value)
}

/// `A(r) = ∫_r^a J(z)/√(z²−r²) dz`.
pub fn outer_value<P: InnerProfile + ?Sized>(p: &P, r: f64, a: f64, q: &QuadratureEngine) -> Result<f64> {
    check_radius("influence value", r, a)?;
    let c = p.support_start();
    if r >= a || c >= a {
        return Ok(0.0);
    }
    let tol = abs_floor(p, q);
    let mut total = 0.0;
    if r == 0.0 {
        for (lo, hi) in segments(p, c, a) {
            total += sqrt_left(q, lo, hi, 0.0, tol, |z, _| p.value(z) / z)?;
        }
        return Ok(total);
    }
    let regular = |z: f64, dz: f64| p.value(z) / (dz * (z + r)).sqrt();
    if r < c {
        for (lo, hi) in segments(p, c, a) {
            total += sqrt_left(q, lo, hi, r, tol, regular)?;
        }
        return Ok(total);
    }
    let jr = p.value(r);
    let segs = segments(p, r, a);
    let (_, b) = segs[0];
    let d = b - r;
    let sd = d.sqrt();
    let first = q.integrate(
        |u| {
            let z = r + d * u * u;
            2.0 * sd * (p.value(z) - jr) / (z + r).sqrt()
        },
        0.0,
        1.0,
        tol,
    )?;
    total += first.value + jr * ((b + (d * (b + r)).sqrt()) / r).ln();
    for &(lo, hi) in &segs[1..] {
        total += sqrt_left(q, lo, hi, r, tol, regular)?;
    }
    Ok(total)
}

/// ∂A/∂r. With z = r cosh u the outer integral reads A = ∫₀^U J(r cosh u) du,
/// U = acosh(a/r), so ∂A/∂r = ∫₀^U J′(r cosh u) cosh u du − J(a) a/(r√(a²−r²)).
pub fn outer_dr<P: InnerProfile + ?Sized>(p: &P, r: f64, a: f64, q: &QuadratureEngine) -> Result<f64> {
    check_radius("influence r-derivative", r, a)?;
    if r == a {
        return Err(Error::Domain {
            what: "dA/dr at the crack tip",
            radicand: 0.0,
            argument: r,
        });
    }
    let c = p.support_start();
    if r == 0.0 || c >= a {
        return Ok(0.0);
    }
    if r >= c && !p.slope(r).is_finite() {
        return Err(Error::Domain {
            what: "dA/dr where the inner profile has an infinite slope",
            radicand: 0.0,
            argument: r,
        });
    }
    // u(z) without the cancellation of acosh near 1
    let u_of = |z: f64| (((z - r) * (z + r)).max(0.0).sqrt() / r).asinh();
    let ell = p.fluid_radius();
    let coef = p.front_coefficient();
    let u_ell = if r < ell { u_of(ell) } else { 0.0 };
    // z − ℓ from u − u_ℓ, accurate right next to the front
    let gap = |du: f64, u: f64| {
        if r < ell {
            2.0 * r * (0.5 * (u + u_ell)).sinh() * (0.5 * du).sinh()
        } else {
            2.0 * r * (0.5 * u).sinh().powi(2) + (r - ell)
        }
    };
    let tol = abs_floor(p, q) / r;
    let mut total = 0.0;
    for (lo, hi) in segments(p, c.max(r), a) {
        let (u0, u1) = (u_of(lo), u_of(hi));
        let d = u1 - u0;
        let beyond = coef != 0.0 && lo >= ell;
        let off = u0 - u_ell;
        let est = q.integrate(
            |t| {
                let u = u0 + d * t * t;
                let ch = u.cosh();
                let z = r * ch;
                let mut g = p.regular_slope(z);
                if beyond {
                    let x = gap(off + d * t * t, u);
                    g += coef * z / (x * (z + ell)).sqrt();
                }
                2.0 * d * t * g * ch
            },
            0.0,
            1.0,
            tol,
        )?;
        total += est.value;
    }
    Ok(total - p.value(a) * a / (r * ((a - r) * (a + r)).sqrt()))
}

/// ∂A/∂a = J(a)/√(a²−r²).
pub fn outer_da<P: InnerProfile + ?Sized>(p: &P, r: f64, a: f64) -> Result<f64> {
    check_radius("influence a-derivative", r, a)?;
    if r >= a {
        return Err(Error::Domain {
            what: "dA/da at the crack tip",
            radicand: 0.0,
            argument: r,
        });
    }
    Ok(p.value(a) / ((a - r) * (a + r)).sqrt())
}

/// ∂A/∂ℓ at fixed element count, from homogeneity of degree one in (r, a, ℓ).
pub fn outer_dl<P: InnerProfile + ?Sized>(p: &P, r: f64, a: f64, q: &QuadratureEngine) -> Result<f64> {
    let v = outer_value(p, r, a, q)?;
    let da = outer_da(p, r, a)?;
    let dr = outer_dr(p, r, a, q)?;
    Ok((v - a * da - r * dr) / p.fluid_radius())
}

fn check_index(k: usize, mesh: &RadialMesh) -> Result<()> {
    if k > mesh.elements() {
        Err(Error::invalid(
            "k",
            format!("hat index {k} exceeds element count {}", mesh.elements()),
        ))
    } else {
        Ok(())
    }
}

fn check_geometry(mesh: &RadialMesh, a: f64) -> Result<()> {
    if mesh.fluid_radius() > a {
        Err(Error::invalid(
            "crack_radius",
            format!("fluid radius {:e} exceeds crack radius {a:e}", mesh.fluid_radius()),
        ))
    } else {
        Ok(())
    }
}

#[allow(non_snake_case)]
pub fn influence_A(k: usize, r: f64, a: f64, mesh: &RadialMesh, q: &QuadratureEngine) -> Result<f64> {
    check_index(k, mesh)?;
    check_geometry(mesh, a)?;
    outer_value(&HatProfile::new(mesh, k), r, a, q)
}

#[allow(non_snake_case)]
pub fn influence_dA_dr(k: usize, r: f64, a: f64, mesh: &RadialMesh, q: &QuadratureEngine) -> Result<f64> {
    check_index(k, mesh)?;
    check_geometry(mesh, a)?;
    outer_dr(&HatProfile::new(mesh, k), r, a, q)
}

#[allow(non_snake_case)]
pub fn influence_dA_da(k: usize, r: f64, a: f64, mesh: &RadialMesh) -> Result<f64> {
    check_index(k, mesh)?;
    check_geometry(mesh, a)?;
    outer_da(&HatProfile::new(mesh, k), r, a)
}

#[allow(non_snake_case)]
pub fn influence_dA_dl(
    k: usize,
    r: f64,
    a: f64,
    mesh: &RadialMesh,
    q: &QuadratureEngine,
    form: DlForm,
) -> Result<f64> {
    check_index(k, mesh)?;
    check_geometry(mesh, a)?;
    match form {
        DlForm::Exact => outer_dl(&HatProfile::new(mesh, k), r, a, q),
        DlForm::FrontNodeOnly => {
            if k < mesh.elements() {
                return Ok(0.0);
            }
            let ell = mesh.fluid_radius();
            check_radius("front-node ℓ-derivative", r, a)?;
            let s = checked_root("dA/dl front node", ell, r)?;
            if s == 0.0 {
                return Err(Error::Domain {
                    what: "dA/dl front node",
                    radicand: (ell - r) * (ell + r),
                    argument: r,
                });
            }
            Ok(inner_i1(ell, k, mesh.h())? / s)
        }
    }
}

/// A_k and its three derivatives for every node at one query radius.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceRow {
    pub query_radius: f64,
    pub values: Vec<f64>,
    pub d_dr: Vec<f64>,
    pub d_da: Vec<f64>,
    pub d_dl: Vec<f64>,
}

pub fn influence_row(
    r: f64,
    a: f64,
    mesh: &RadialMesh,
    q: &QuadratureEngine,
    form: DlForm,
) -> Result<InfluenceRow> {
    check_geometry(mesh, a)?;
    let n = mesh.nodes();
    let mut row = InfluenceRow {
        query_radius: r,
        values: Vec::with_capacity(n),
        d_dr: Vec::with_capacity(n),
        d_da: Vec::with_capacity(n),
        d_dl: Vec::with_capacity(n),
    };
    for k in 0..n {
        let p = HatProfile::new(mesh, k);
        let v = outer_value(&p, r, a, q)?;
        let dr = outer_dr(&p, r, a, q)?;
        let da = outer_da(&p, r, a)?;
        let dl = match form {
            DlForm::Exact => (v - a * da - r * dr) / mesh.fluid_radius(),
            DlForm::FrontNodeOnly => influence_dA_dl(k, r, a, mesh, q, form)?,
        };
        row.values.push(v);
        row.d_dr.push(dr);
        row.d_da.push(da);
        row.d_dl.push(dl);
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> QuadratureEngine {
        QuadratureEngine::new(1e-12, 400).unwrap()
    }

    /// J_k by direct quadrature in θ, y = z sin θ.
    fn j_quad(mesh: &RadialMesh, k: usize, z: f64) -> f64 {
        let q = engine();
        let mut cuts = vec![0.0];
        for node in mesh.node_positions() {
            if node > 0.0 && node < z {
                cuts.push((node / z).asin());
            }
        }
        cuts.push(std::f64::consts::FRAC_PI_2);
        cuts.windows(2)
            .map(|w| {
                q.integrate(|t| z * t.sin() * mesh.shape(k, z * t.sin()), w[0], w[1], 1e-18)
                    .unwrap()
                    .value
            })
            .sum()
    }

    #[test]
    fn i1_at_first_node_is_quarter_pi_h() {
        let h = 0.37;
        assert!((inner_i1(h, 1, h).unwrap() - PI * h / 4.0).abs() < 1e-15);
    }

    #[test]
    fn printed_forms_match_quadrature() {
        let mesh = RadialMesh::new(1.0, 8).unwrap();
        let h = mesh.h();
        for k in 1..8 {
            let kf = k as f64;
            for t in [0.0, 0.3, 0.999, 1.0] {
                let z = (kf - 1.0 + t) * h;
                if z == 0.0 {
                    continue;
                }
                let left: f64 = j_quad(&mesh, k, z);
                let got = inner_i1(z, k, h).unwrap();
                assert!((got - left).abs() <= 1e-10 * left.abs().max(1e-3 * h), "I1 k={k} z={z}");
            }
            // I4 at its lower endpoint
            let z = (kf + 1.0) * h;
            let full = j_quad(&mesh, k, z);
            let got = inner_i2(z, k, h).unwrap() + inner_i4(z, k, h).unwrap();
            assert!((got / full - 1.0).abs() < 1e-10, "I2+I4 k={k}");
        }
    }

    #[test]
    fn domain_violations_are_reported() {
        let err = inner_i4(0.5, 1, 0.5).unwrap_err();
        assert!(matches!(err, Error::Domain { radicand, .. } if radicand < 0.0));
        assert!(inner_i1(1.0 - 1e-17, 2, 0.5).is_ok());
    }

    #[test]
    fn hat_slope_matches_difference() {
        let mesh = RadialMesh::new(1.0, 5).unwrap();
        for k in 0..=5 {
            let p = HatProfile::new(&mesh, k);
            for z in [0.05, 0.13, 0.31, 0.47, 0.66, 0.93, 1.2, 1.9] {
                let d = 1e-6;
                let fd = (p.value(z + d) - p.value(z - d)) / (2.0 * d);
                let s = p.slope(z);
                assert!((s - fd).abs() < 1e-6 * fd.abs().max(1.0), "k={k} z={z} {s} {fd}");
            }
        }
    }

    #[test]
    fn hat_profiles_sum_to_z_inside_and_lag_outside() {
        let mesh = RadialMesh::new(0.01, 10).unwrap();
        let lag = LagProfile::new(0.01);
        for z in [0.0005, 0.003, 0.0099, 0.01, 0.014, 0.02] {
            let sum: f64 = (0..=10).map(|k| HatProfile::new(&mesh, k).value(z)).sum();
            let total = sum + lag.value(z);
            assert!((total - z).abs() < 1e-15, "z={z}");
        }
    }

    #[test]
    fn influence_vanishes_at_tip() {
        let mesh = RadialMesh::new(0.01, 10).unwrap();
        let q = QuadratureEngine::default();
        for k in [0, 5, 10] {
            assert_eq!(influence_A(k, 0.02, 0.02, &mesh, &q).unwrap(), 0.0);
        }
        assert!(influence_A(3, 0.021, 0.02, &mesh, &q).is_err());
    }

    #[test]
    fn dr_vanishes_on_axis() {
        let mesh = RadialMesh::new(0.01, 10).unwrap();
        let q = QuadratureEngine::default();
        assert_eq!(influence_dA_dr(4, 0.0, 0.02, &mesh, &q).unwrap(), 0.0);
    }

    #[test]
    fn front_node_dl_zero_for_interior_hats() {
        let mesh = RadialMesh::new(0.01, 10).unwrap();
        let q = QuadratureEngine::default();
        let v = influence_dA_dl(9, 0.004, 0.02, &mesh, &q, DlForm::FrontNodeOnly).unwrap();
        assert_eq!(v, 0.0);
        assert!(influence_dA_dl(10, 0.01, 0.02, &mesh, &q, DlForm::FrontNodeOnly).is_err());
        let near = influence_dA_dl(10, 0.01 * (1.0 - 1e-8), 0.02, &mesh, &q, DlForm::FrontNodeOnly).unwrap();
        let far = influence_dA_dl(10, 0.01 * (1.0 - 1e-4), 0.02, &mesh, &q, DlForm::FrontNodeOnly).unwrap();
        // grows like (ℓ−r)^(−1/2)
        assert!((near / far / 100.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn dr_rejects_infinite_slope() {
        let mesh = RadialMesh::new(0.01, 10).unwrap();
        let q = QuadratureEngine::default();
        assert!(matches!(
            influence_dA_dr(10, 0.01, 0.02, &mesh, &q),
            Err(Error::Domain { .. })
        ));
    }
}
