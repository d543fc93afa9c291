//! Crack opening reconstructed from nodal pressures, and the stress intensity factor.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::kernels::{self, front_singular_slope, hat_eval, InnerProfile, LagProfile};
use crate::model::{MaterialParams, RadialMesh, SifPrefactor, State};
use crate::quadrature::{FixedRule, QuadratureEngine};

/// Inner profile of the whole net-pressure field: Σ p_k J_k(z) − σ₀ √(z²−ℓ²)₊.
#[derive(Debug, Clone, Copy)]
pub struct PressureProfile<'a> {
    pressures: &'a [f64],
    sigma0: f64,
    n: usize,
    h: f64,
    ell: f64,
}

impl<'a> PressureProfile<'a> {
    pub fn new(mesh: &RadialMesh, pressures: &'a [f64], sigma0: f64) -> Self {
        assert_eq!(pressures.len(), mesh.nodes(), "pressure vector does not match mesh");
        Self {
            pressures,
            sigma0,
            n: mesh.elements(),
            h: mesh.h(),
            ell: mesh.fluid_radius(),
        }
    }

    fn last_hat(&self, z: f64) -> usize {
        if z >= self.ell {
            self.n
        } else {
            ((z / self.h).floor() as usize + 1).min(self.n)
        }
    }
}

impl InnerProfile for PressureProfile<'_> {
    fn value(&self, z: f64) -> f64 {
        let mut v = 0.0;
        for k in 0..=self.last_hat(z) {
            v += self.pressures[k] * hat_eval(k, self.n, self.h, self.ell, z).0;
        }
        v - self.sigma0 * LagProfile::new(self.ell).value(z)
    }

    fn slope(&self, z: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..=self.last_hat(z) {
            s += self.pressures[k] * hat_eval(k, self.n, self.h, self.ell, z).1;
        }
        // the front hat and the lag load share one singular term that
        // cancels when p_N = −σ₀
        let coef = -self.pressures[self.n] - self.sigma0;
        if coef != 0.0 && z >= self.ell {
            s += coef * front_singular_slope(self.ell, z);
        }
        s
    }

    fn support_start(&self) -> f64 {
        0.0
    }

    fn breakpoints(&self) -> Vec<f64> {
        (1..=self.n)
            .map(|j| if j == self.n { self.ell } else { j as f64 * self.h })
            .collect()
    }

    fn front_coefficient(&self) -> f64 {
        -self.pressures[self.n] - self.sigma0
    }

    fn regular_slope(&self, z: f64) -> f64 {
        (0..=self.last_hat(z))
            .map(|k| self.pressures[k] * hat_eval(k, self.n, self.h, self.ell, z).1)
            .sum()
    }

    fn magnitude(&self) -> f64 {
        let pmax = self.pressures.iter().fold(self.sigma0.abs(), |m, p| m.max(p.abs()));
        pmax * self.ell
    }

    fn fluid_radius(&self) -> f64 {
        self.ell
    }
}

fn check_query(state: &State, r: f64) -> Result<()> {
    let a = state.crack_radius;
    if r.is_nan() || r < 0.0 || r > a {
        Err(Error::OutOfRange {
            what: "opening",
            r,
            limit: a,
        })
    } else {
        Ok(())
    }
}

/// w(r) = (8/πE′) [Σ_k A_k(r) p_k − σ₀ B(r)].
pub fn opening(state: &State, mat: &MaterialParams, r: f64, q: &QuadratureEngine) -> Result<f64> {
    check_query(state, r)?;
    let prof = PressureProfile::new(&state.mesh, &state.pressures, mat.far_field_stress);
    Ok(mat.compliance() * kernels::outer_value(&prof, r, state.crack_radius, q)?)
}

/// ∂w/∂r.
pub fn opening_slope(state: &State, mat: &MaterialParams, r: f64, q: &QuadratureEngine) -> Result<f64> {
    check_query(state, r)?;
    let prof = PressureProfile::new(&state.mesh, &state.pressures, mat.far_field_stress);
    Ok(mat.compliance() * kernels::outer_dr(&prof, r, state.crack_radius, q)?)
}

/// Sampled opening profile.
#[derive(Debug, Clone, PartialEq)]
pub struct OpeningProfile {
    pub radii: Vec<f64>,
    pub openings: Vec<f64>,
    pub crack_radius: f64,
}

impl OpeningProfile {
    pub fn negative_count(&self) -> usize {
        self.openings.iter().filter(|w| **w < 0.0).count()
    }
}

pub fn opening_profile(
    state: &State,
    mat: &MaterialParams,
    radii: &[f64],
    q: &QuadratureEngine,
) -> Result<OpeningProfile> {
    let openings = radii
        .iter()
        .map(|&r| opening(state, mat, r, q))
        .collect::<Result<Vec<_>>>()?;
    Ok(OpeningProfile {
        radii: radii.to_vec(),
        openings,
        crack_radius: state.crack_radius,
    })
}

/// Opening at the mesh nodes.
pub fn nodal_openings(state: &State, mat: &MaterialParams, q: &QuadratureEngine) -> Result<Vec<f64>> {
    state
        .mesh
        .node_positions()
        .into_iter()
        .map(|r| opening(state, mat, r, q))
        .collect()
}

/// Separated contributions to ∂w/∂t at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTerms {
    pub opening: f64,
    /// (8/πE′) Σ A_k ṗ_k
    pub storage: f64,
    /// (8/πE′) ȧ Σ ∂A_k/∂a p_k, lag load included
    pub crack_advection: f64,
    /// (8/πE′) ℓ̇ Σ ∂A_k/∂ℓ p_k, lag load included
    pub front_advection: f64,
}

impl RateTerms {
    pub fn total(&self) -> f64 {
        self.storage + self.crack_advection + self.front_advection
    }
}

#[allow(clippy::too_many_arguments)]
pub fn opening_rate_terms(
    state: &State,
    mat: &MaterialParams,
    r: f64,
    pressure_rates: &[f64],
    a_rate: f64,
    l_rate: f64,
    include_dadl: bool,
    q: &QuadratureEngine,
) -> Result<RateTerms> {
    check_query(state, r)?;
    let c = mat.compliance();
    let a = state.crack_radius;
    let prof = PressureProfile::new(&state.mesh, &state.pressures, mat.far_field_stress);
    let rates = PressureProfile::new(&state.mesh, pressure_rates, 0.0);
    let crack = if a_rate != 0.0 {
        c * a_rate * kernels::outer_da(&prof, r, a)?
    } else {
        0.0
    };
    let front = if include_dadl && l_rate != 0.0 {
        c * l_rate * kernels::outer_dl(&prof, r, a, q)?
    } else {
        0.0
    };
    Ok(RateTerms {
        opening: c * kernels::outer_value(&prof, r, a, q)?,
        storage: c * kernels::outer_value(&rates, r, a, q)?,
        crack_advection: crack,
        front_advection: front,
    })
}

const SIF_POINTS: usize = 16;

/// `∫₀^a r ψ_k(r)/√(a²−r²) dr` for every node, through r = a sin θ.
pub fn sif_weights(mesh: &RadialMesh, a: f64) -> Vec<f64> {
    let rule = FixedRule::gauss(SIF_POINTS);
    let n = mesh.elements();
    let mut out = vec![0.0; n + 1];
    let theta = |r: f64| (r / a).min(1.0).asin();
    for e in 0..n {
        let (r0, r1) = (mesh.node(e), mesh.node(e + 1));
        let (t0, t1) = (theta(r0), theta(r1));
        let len = r1 - r0;
        for (t, w) in rule.points(t0, t1) {
            let r = a * t.sin();
            let x = (r - r0) / len;
            let g = w * r;
            out[e] += g * (1.0 - x);
            out[e + 1] += g * x;
        }
    }
    out
}

/// Mode-I stress intensity factor of the current state.
pub fn sif(state: &State, mat: &MaterialParams, prefactor: SifPrefactor) -> Result<f64> {
    let a = state.crack_radius;
    if !(a > 0.0) {
        return Err(Error::invalid("crack_radius", "must be positive"));
    }
    let weights = sif_weights(&state.mesh, a);
    let ell = state.fluid_radius();
    let load: f64 = weights.iter().zip(&state.pressures).map(|(w, p)| w * p).sum();
    let lag = mat.far_field_stress * ((a - ell) * (a + ell)).max(0.0).sqrt();
    Ok(prefactor.value(a) * (load - lag))
}

const N_SQRT: usize = 12;
const N_GAUSS: usize = 12;

/// Panels covering `[0, a]`, cut at each break. The first panel after a cut
/// takes the √-graded rule; long pieces continue with Gauss panels of
/// doubling width.
fn z_panels(breaks: &[f64], a: f64, h_ref: f64) -> Vec<(f64, f64, bool)> {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&b| b > 0.0 && b < a).collect();
    cuts.push(0.0);
    cuts.push(a);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut panels = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 1.5 * h_ref {
            panels.push((lo, hi, true));
            continue;
        }
        let mut x = lo + h_ref;
        panels.push((lo, x, true));
        let mut width = h_ref;
        while x < hi {
            let next = if hi - x <= 3.0 * width { hi } else { x + 2.0 * width };
            panels.push((x, next, false));
            width = next - x;
            x = next;
        }
    }
    panels
}

/// Points and weights for z-integrals over `[0, a]` whose integrands may
/// carry `√` behaviour just right of each break.
pub(crate) fn z_rule(breaks: &[f64], a: f64, h_ref: f64) -> Vec<(f64, f64)> {
    let sqrt_rule = FixedRule::left_sqrt(N_SQRT);
    let gauss = FixedRule::gauss(N_GAUSS);
    z_panels(breaks, a, h_ref)
        .into_iter()
        .flat_map(|(lo, hi, graded)| {
            let rule = if graded { &sqrt_rule } else { &gauss };
            rule.points(lo, hi).collect::<Vec<_>>()
        })
        .collect()
}

struct Panel {
    lo: f64,
    hi: f64,
    /// (z, weight, J(z), J′(z))
    points: Vec<(f64, f64, f64, f64)>,
}

/// Outer integral of one pressure profile and its r-derivative at many radii.
///
/// Panels at least one panel away from r use a fixed rule with the inner
/// profile cached; the window up to the end of the next panel is integrated
/// adaptively.
pub struct OpeningSampler<'a> {
    profile: PressureProfile<'a>,
    crack_radius: f64,
    panels: Vec<Panel>,
}

impl<'a> OpeningSampler<'a> {
    pub fn new(mesh: &RadialMesh, pressures: &'a [f64], a: f64, sigma0: f64) -> Self {
        let profile = PressureProfile::new(mesh, pressures, sigma0);
        let sqrt_rule = FixedRule::left_sqrt(N_SQRT);
        let gauss = FixedRule::gauss(N_GAUSS);
        let panels = z_panels(&mesh.node_positions(), a, mesh.h())
            .into_iter()
            .map(|(lo, hi, graded)| {
                let rule = if graded { &sqrt_rule } else { &gauss };
                let points = rule
                    .points(lo, hi)
                    .map(|(z, w)| (z, w, profile.value(z), profile.slope(z)))
                    .collect();
                Panel { lo, hi, points }
            })
            .collect();
        Self {
            profile,
            crack_radius: a,
            panels,
        }
    }

    /// `(∫_r^a J/√(z²−r²) dz, its r-derivative)` without the compliance factor.
    pub fn sample(&self, r: f64, q: &QuadratureEngine) -> Result<(f64, f64)> {
        let a = self.crack_radius;
        let i = self.panels.partition_point(|p| p.hi <= r);
        let far = i + 2;
        if far >= self.panels.len() {
            let v = kernels::outer_value(&self.profile, r, a, q)?;
            let d = kernels::outer_dr(&self.profile, r, a, q)?;
            return Ok((v, d));
        }
        let cut = self.panels[far].lo;
        let mut value = kernels::outer_value(&self.profile, r, cut, q)?;
        if r == 0.0 {
            for p in &self.panels[far..] {
                value += p.points.iter().map(|&(z, w, j, _)| w * j / z).sum::<f64>();
            }
            return Ok((value, 0.0));
        }
        let edge = |z: f64| z / (r * ((z - r) * (z + r)).sqrt());
        let mut slope = kernels::outer_dr(&self.profile, r, cut, q)? + self.profile.value(cut) * edge(cut);
        for p in &self.panels[far..] {
            for &(z, w, j, dj) in &p.points {
                let k = 1.0 / ((z - r) * (z + r)).sqrt();
                value += w * j * k;
                slope += w * dj * z * k / r;
            }
        }
        slope -= self.profile.value(a) * edge(a);
        Ok((value, slope))
    }
}

/// ∫₀^L w(r) r dr, exact swap of the order of integration.
pub fn volume_moment(state: &State, mat: &MaterialParams, upper: f64) -> f64 {
    let a = state.crack_radius;
    let upper = upper.clamp(0.0, a);
    if upper == 0.0 {
        return 0.0;
    }
    let prof = PressureProfile::new(&state.mesh, &state.pressures, mat.far_field_stress);
    let mut breaks = state.mesh.node_positions();
    breaks.push(upper);
    let total: f64 = z_rule(&breaks, a, state.mesh.h())
        .into_iter()
        .map(|(z, w)| {
            let cap = z.min(upper);
            w * prof.value(z) * (z - ((z - cap) * (z + cap)).max(0.0).sqrt())
        })
        .sum();
    mat.compliance() * total
}

/// Fluid mass 2πρ ∫₀^ℓ w r dr.
pub fn fluid_mass(state: &State, mat: &MaterialParams, density: f64) -> f64 {
    2.0 * std::f64::consts::PI * density * volume_moment(state, mat, state.fluid_radius())
}

/// SIF of uniform pressure over the whole crack, `(2/π) p √a`, for reference.
pub fn uniform_sif(p: f64, a: f64) -> f64 {
    p * a.sqrt() / FRAC_PI_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_mesh;
    use proptest::prelude::*;

    fn mat(sigma0: f64) -> MaterialParams {
        MaterialParams::new(4e10, 0.0, 5e5, 0.1, sigma0).unwrap()
    }

    #[test]
    fn sampler_agrees_with_direct_integrals() {
        let q = QuadratureEngine::default();
        let mesh = build_mesh(0.01, 12).unwrap();
        for (sigma0, p_front) in [(0.0, 0.0), (2e5, 3e5)] {
            let m = mat(sigma0);
            let mut p: Vec<f64> = mesh.node_positions().iter().map(|r| 2e6 - 9e7 * r).collect();
            p[12] = p_front;
            let state = State::new(0.0, 0.02, mesh.clone(), p).unwrap();
            let sampler = OpeningSampler::new(&mesh, &state.pressures, 0.02, sigma0);
            let c = m.compliance();
            for r in [0.0, 1e-5, 0.0031, 0.0074, 0.01 - 4e-9, 0.0123, 0.0199] {
                let (v, d) = sampler.sample(r, &q).unwrap();
                let w = opening(&state, &m, r, &q).unwrap();
                assert!((c * v - w).abs() <= 1e-9 * w.abs(), "w at {r}: {} {w}", c * v);
                if r > 0.0 {
                    let dw = opening_slope(&state, &m, r, &q).unwrap();
                    assert!((c * d - dw).abs() <= 1e-8 * dw.abs().max(1e-4), "w' at {r}: {} {dw}", c * d);
                }
            }
        }
    }

    #[test]
    fn uniform_pressure_without_lag_is_elliptic() {
        let a = 0.02;
        let s = State::initial(a, a, 8, 1e6).unwrap();
        let m = mat(0.0);
        let q = QuadratureEngine::default();
        for r in [0.0, 0.003, 0.011, 0.0195, 0.02] {
            let w = opening(&s, &m, r, &q).unwrap();
            let want = m.compliance() * 1e6 * ((a - r) * (a + r)).sqrt();
            assert!((w - want).abs() <= 1e-9 * m.compliance() * 1e6 * a, "r={r}");
        }
        let k = sif(&s, &m, SifPrefactor::PiSqrtA).unwrap();
        assert!((k / uniform_sif(1e6, a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_pressure_gives_zero_sif() {
        let s = State::initial(0.02, 0.01, 6, 0.0).unwrap();
        assert_eq!(sif(&s, &mat(0.0), SifPrefactor::PiSqrtA).unwrap(), 0.0);
    }

    #[test]
    fn sif_weights_equal_inner_profile_at_tip() {
        let mesh = build_mesh(0.01, 7).unwrap();
        let a = 0.016;
        let w = sif_weights(&mesh, a);
        for (k, wk) in w.iter().enumerate() {
            let j = kernels::HatProfile::new(&mesh, k).value(a);
            assert!((wk / j - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn lag_load_enters_sif_additively() {
        let base = State::initial(0.02, 0.01, 6, 1e6).unwrap();
        let k0 = sif(&base, &mat(0.0), SifPrefactor::PiSqrtA).unwrap();
        let k1 = sif(&base, &mat(2e5), SifPrefactor::PiSqrtA).unwrap();
        let want = 2e5 * (0.02f64.powi(2) - 0.01f64.powi(2)).sqrt() * SifPrefactor::PiSqrtA.value(0.02);
        assert!(((k0 - k1) / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn volume_moment_matches_direct_quadrature() {
        let mesh = build_mesh(0.01, 5).unwrap();
        let p = vec![1.2e6, 1.0e6, 0.7e6, 0.5e6, 0.2e6, 0.0];
        let s = State::new(0.0, 0.02, mesh, p).unwrap();
        let m = mat(0.0);
        let q = QuadratureEngine::new(1e-12, 400).unwrap();
        for upper in [0.01, 0.0073] {
            let direct = q
                .integrate(|r| opening(&s, &m, r, &q).unwrap() * r, 0.0, upper, 0.0)
                .unwrap()
                .value;
            let fast = volume_moment(&s, &m, upper);
            assert!((fast / direct - 1.0).abs() < 1e-9, "L={upper}: {fast} vs {direct}");
        }
    }

    #[test]
    fn opening_slope_matches_difference() {
        let mesh = build_mesh(0.01, 5).unwrap();
        let p = vec![1.2e6, 1.0e6, 0.7e6, 0.5e6, 0.2e6, 0.1e6];
        let s = State::new(0.0, 0.02, mesh, p).unwrap();
        let m = mat(1e5);
        let q = QuadratureEngine::new(1e-12, 400).unwrap();
        for r in [0.0011, 0.0049, 0.0133] {
            let d = 1e-7;
            let fd = (opening(&s, &m, r + d, &q).unwrap() - opening(&s, &m, r - d, &q).unwrap()) / (2.0 * d);
            let got = opening_slope(&s, &m, r, &q).unwrap();
            assert!((got / fd - 1.0).abs() < 1e-6, "r={r}: {got} vs {fd}");
        }
    }

    #[test]
    fn stationary_fronts_leave_storage_only() {
        let s = State::initial(0.02, 0.01, 4, 1e6).unwrap();
        let rates = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let q = QuadratureEngine::default();
        let t = opening_rate_terms(&s, &mat(0.0), 0.004, &rates, 0.0, 0.0, true, &q).unwrap();
        assert_eq!(t.crack_advection, 0.0);
        assert_eq!(t.front_advection, 0.0);
        assert_eq!(t.total(), t.storage);
    }

    #[test]
    fn crack_advection_matches_difference_and_is_positive() {
        let mut s = State::initial(0.02, 0.01, 6, 1e6).unwrap();
        let m = mat(0.0);
        let q = QuadratureEngine::new(1e-12, 400).unwrap();
        let zero = vec![0.0; 7];
        for r in [0.0, 0.004, 0.012, 0.019] {
            let t = opening_rate_terms(&s, &m, r, &zero, 1.0, 0.0, true, &q).unwrap();
            assert!(t.crack_advection > 0.0);
            let d = 1e-9;
            let w0 = opening(&s, &m, r, &q).unwrap();
            s.crack_radius += d;
            let w1 = opening(&s, &m, r, &q).unwrap();
            s.crack_radius -= d;
            assert!(((w1 - w0) / d / t.crack_advection - 1.0).abs() < 1e-4, "r={r}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn opening_and_sif_are_linear(alpha in -3.0f64..3.0, p in proptest::collection::vec(-1e6f64..1e6, 6), x in 0.0f64..1.0) {
            let mesh = build_mesh(0.01, 5).unwrap();
            let s = State::new(0.0, 0.015, mesh.clone(), p.clone()).unwrap();
            let scaled = State::new(0.0, 0.015, mesh, p.iter().map(|v| alpha * v).collect()).unwrap();
            let m = mat(0.0);
            let q = QuadratureEngine::default();
            let r = x * 0.015;
            let w = opening(&s, &m, r, &q).unwrap();
            let ws = opening(&scaled, &m, r, &q).unwrap();
            let scale = m.compliance() * 1e6 * 0.015;
            prop_assert!((ws - alpha * w).abs() <= 1e-12 * scale);
            let k = sif(&s, &m, SifPrefactor::PiSqrtA).unwrap();
            let ks = sif(&scaled, &m, SifPrefactor::PiSqrtA).unwrap();
            prop_assert!((ks - alpha * k).abs() <= 1e-12 * 1e6 * 0.2);
        }

        #[test]
        fn opening_vanishes_at_tip(p in proptest::collection::vec(0.0f64..1e6, 5), ratio in 1.0f64..3.0) {
            let mesh = build_mesh(0.01, 4).unwrap();
            let s = State::new(0.0, 0.01 * ratio, mesh, p).unwrap();
            let q = QuadratureEngine::default();
            prop_assert_eq!(opening(&s, &mat(1e5), 0.01 * ratio, &q).unwrap(), 0.0);
        }

        #[test]
        fn sif_scales_with_root_a(scale in 0.3f64..3.0) {
            let base = State::new(0.0, 0.02, build_mesh(0.01, 4).unwrap(), vec![3.0, 2.0, 2.0, 1.0, 0.5]).unwrap();
            let grown = State::new(0.0, 0.02 * scale, build_mesh(0.01 * scale, 4).unwrap(), base.pressures.clone()).unwrap();
            let m = mat(0.0);
            let k0 = sif(&base, &m, SifPrefactor::PiSqrtA).unwrap();
            let k1 = sif(&grown, &m, SifPrefactor::PiSqrtA).unwrap();
            prop_assert!((k1 / k0 / scale.sqrt() - 1.0).abs() < 1e-12);
        }
    }
}
