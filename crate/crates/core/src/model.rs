//! Domain types: material, fluid, source, mesh, state and solver settings.
//!
//! Everything is stored in SI units (m, kg, s, Pa).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// E′ [Pa]
    pub plane_strain_modulus: f64,
    pub poisson: f64,
    /// K_Ic [Pa·√m]
    pub toughness: f64,
    /// η [Pa·s/m]
    pub numerical_viscosity: f64,
    /// σ₀ [Pa], compressive positive
    pub far_field_stress: f64,
}

impl MaterialParams {
    pub fn new(
        plane_strain_modulus: f64,
        poisson: f64,
        toughness: f64,
        numerical_viscosity: f64,
        far_field_stress: f64,
    ) -> Result<Self> {
        let m = Self {
            plane_strain_modulus,
            poisson,
            toughness,
            numerical_viscosity,
            far_field_stress,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        positive("plane_strain_modulus", self.plane_strain_modulus)?;
        if !(0.0..0.5).contains(&self.poisson) {
            return Err(Error::invalid("poisson", format!("{} not in [0, 0.5)", self.poisson)));
        }
        nonnegative("toughness", self.toughness)?;
        positive("numerical_viscosity", self.numerical_viscosity)?;
        nonnegative("far_field_stress", self.far_field_stress)
    }

    /// 8/(π E′), the factor mapping pressure influence to opening.
    pub fn compliance(&self) -> f64 {
        8.0 / (PI * self.plane_strain_modulus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    /// μ [Pa·s]
    pub viscosity: f64,
    /// ρ [kg/m³]
    pub density: f64,
}

impl FluidParams {
    pub fn new(viscosity: f64, density: f64) -> Result<Self> {
        let f = Self { viscosity, density };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        positive("viscosity", self.viscosity)?;
        positive("density", self.density)
    }
}

/// `s(r,t) = (q₀/2π) exp(−r²/β) (1 − exp(−ω t))`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceTerm {
    /// q₀ [kg/(m²·s)]
    pub amplitude: f64,
    /// β [m²]
    pub radial_decay: f64,
    /// ω [1/s]
    pub ramp_rate: f64,
}

impl SourceTerm {
    pub fn new(amplitude: f64, radial_decay: f64, ramp_rate: f64) -> Result<Self> {
        let s = Self {
            amplitude,
            radial_decay,
            ramp_rate,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("amplitude", self.amplitude)?;
        positive("radial_decay", self.radial_decay)?;
        positive("ramp_rate", self.ramp_rate)
    }

    fn ramp(&self, t: f64) -> f64 {
        -(-self.ramp_rate * t).exp_m1()
    }

    /// Mass flux at `(r, t)`.
    pub fn eval(&self, r: f64, t: f64) -> f64 {
        self.amplitude / (2.0 * PI) * (-r * r / self.radial_decay).exp() * self.ramp(t)
    }

    /// ∂s/∂r at `(r, t)`.
    pub fn eval_dr(&self, r: f64, t: f64) -> f64 {
        -2.0 * r / self.radial_decay * self.eval(r, t)
    }

    /// `∫₀^L s(r,t) r dr`, in closed form.
    pub fn radial_moment(&self, length: f64, t: f64) -> f64 {
        let beta = self.radial_decay;
        self.amplitude / (2.0 * PI) * self.ramp(t) * 0.5 * beta * -(-length * length / beta).exp_m1()
    }
}

/// Free-function form of [`SourceTerm::eval`].
pub fn eval_source(src: &SourceTerm, r: f64, t: f64) -> f64 {
    src.eval(r, t)
}

/// Uniform mesh of `[0, ℓ]` carrying linear hat functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMesh {
    fluid_radius: f64,
    elements: usize,
}

impl RadialMesh {
    pub fn new(fluid_radius: f64, elements: usize) -> Result<Self> {
        if !(fluid_radius > 0.0 && fluid_radius.is_finite()) {
            return Err(Error::invalid("fluid_radius", format!("{fluid_radius:e} must be positive")));
        }
        if elements < 2 {
            return Err(Error::invalid("elements", format!("{elements} < 2")));
        }
        Ok(Self {
            fluid_radius,
            elements,
        })
    }

    pub fn fluid_radius(&self) -> f64 {
        self.fluid_radius
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn nodes(&self) -> usize {
        self.elements + 1
    }

    pub fn h(&self) -> f64 {
        self.fluid_radius / self.elements as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.elements {
            self.fluid_radius
        } else {
            k as f64 * self.h()
        }
    }

    pub fn node_positions(&self) -> Vec<f64> {
        (0..=self.elements).map(|k| self.node(k)).collect()
    }

    /// Element containing `r`, with the last element closed on the right.
    pub fn element_of(&self, r: f64) -> usize {
        let e = (r / self.h()).floor();
        if e < 0.0 {
            0
        } else {
            (e as usize).min(self.elements - 1)
        }
    }

    /// ψ_k(r); zero outside `[0, ℓ]`.
    pub fn shape(&self, k: usize, r: f64) -> f64 {
        if r < 0.0 || r > self.fluid_radius {
            return 0.0;
        }
        let h = self.h();
        let x = r / h - k as f64;
        if x.abs() >= 1.0 {
            0.0
        } else {
            1.0 - x.abs()
        }
    }

    /// dψ_k/dr inside element `e`.
    pub fn shape_slope(&self, k: usize, e: usize) -> f64 {
        let h = self.h();
        if k == e {
            -1.0 / h
        } else if k == e + 1 {
            1.0 / h
        } else {
            0.0
        }
    }

    /// Interpolates nodal values at `r`; beyond ℓ the last value is held.
    pub fn interpolate(&self, values: &[f64], r: f64) -> f64 {
        debug_assert_eq!(values.len(), self.nodes());
        if r >= self.fluid_radius {
            return values[self.elements];
        }
        if r <= 0.0 {
            return values[0];
        }
        let e = self.element_of(r);
        let x = (r - self.node(e)) / (self.node(e + 1) - self.node(e));
        values[e] * (1.0 - x) + values[e + 1] * x
    }
}

/// Free-function form of [`RadialMesh::new`].
pub fn build_mesh(fluid_radius: f64, elements: usize) -> Result<RadialMesh> {
    RadialMesh::new(fluid_radius, elements)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub time: f64,
    pub crack_radius: f64,
    pub pressures: Vec<f64>,
    pub mesh: RadialMesh,
}

impl State {
    pub fn new(time: f64, crack_radius: f64, mesh: RadialMesh, pressures: Vec<f64>) -> Result<Self> {
        let s = Self {
            time,
            crack_radius,
            pressures,
            mesh,
        };
        s.validate()?;
        Ok(s)
    }

    /// Uniform pressure `p0` on `[0, ℓ0]` at `t = 0`.
    pub fn initial(crack_radius: f64, fluid_radius: f64, elements: usize, p0: f64) -> Result<Self> {
        let mesh = RadialMesh::new(fluid_radius, elements)?;
        let pressures = vec![p0; mesh.nodes()];
        Self::new(0.0, crack_radius, mesh, pressures)
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.mesh.fluid_radius();
        if !(self.crack_radius.is_finite() && l <= self.crack_radius) {
            return Err(Error::invalid(
                "crack_radius",
                format!("fluid radius {l:e} exceeds crack radius {:e}", self.crack_radius),
            ));
        }
        if self.pressures.len() != self.mesh.nodes() {
            return Err(Error::invalid(
                "pressures",
                format!("{} values for {} nodes", self.pressures.len(), self.mesh.nodes()),
            ));
        }
        if self.pressures.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("pressures", "non-finite nodal pressure"));
        }
        Ok(())
    }

    pub fn fluid_radius(&self) -> f64 {
        self.mesh.fluid_radius()
    }

    pub fn lag(&self) -> f64 {
        self.crack_radius - self.fluid_radius()
    }
}

/// Moves the state onto a uniform mesh of `[0, new_ℓ]` with the same element count.
pub fn remesh_transfer(old: &State, new_fluid_radius: f64) -> Result<State> {
    if new_fluid_radius == old.fluid_radius() {
        return Ok(old.clone());
    }
    let mesh = RadialMesh::new(new_fluid_radius, old.mesh.elements())?;
    let pressures = mesh
        .node_positions()
        .into_iter()
        .map(|r| old.mesh.interpolate(&old.pressures, r))
        .collect();
    Ok(State {
        time: old.time,
        crack_radius: old.crack_radius.max(new_fluid_radius),
        pressures,
        mesh,
    })
}

/// Condition imposed on the front node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FrontCondition {
    /// p_N = −σ₀: the fluid at the front matches the lag-zone pressure.
    #[default]
    Pinned,
    /// p_N is a free unknown tested with ψ_N.
    Free,
}

/// Prefactor of the stress intensity factor integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SifPrefactor {
    /// 2/(π√a)
    #[default]
    PiSqrtA,
    /// 2/√(πa)
    Classical,
}

impl SifPrefactor {
    pub fn value(self, a: f64) -> f64 {
        match self {
            SifPrefactor::PiSqrtA => 2.0 / (PI * a.sqrt()),
            SifPrefactor::Classical => 2.0 / (PI * a).sqrt(),
        }
    }
}

/// How ∂A_k/∂ℓ is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DlForm {
    /// Exact derivative at fixed element count, every node moves with ℓ.
    Exact,
    /// Only the front hat contributes, through I₁(ℓ)/√(ℓ²−r²).
    #[default]
    FrontNodeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub dt: f64,
    pub tol_ell: f64,
    pub tol_a: f64,
    pub max_inner_iters: usize,
    pub max_outer_iters: usize,
    pub include_dadl_terms: bool,
    pub include_dadr_terms: bool,
    pub quadrature_tol: f64,
    pub front_condition: FrontCondition,
    pub sif_prefactor: SifPrefactor,
    pub dl_form: DlForm,
    /// ε_w [m]
    pub opening_floor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            dt: 5e-7,
            tol_ell: 1e-6,
            tol_a: 1e-6,
            max_inner_iters: 50,
            max_outer_iters: 50,
            include_dadl_terms: true,
            include_dadr_terms: true,
            quadrature_tol: 1e-10,
            front_condition: FrontCondition::Pinned,
            sif_prefactor: SifPrefactor::PiSqrtA,
            dl_form: DlForm::default(),
            opening_floor: 1e-12,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        positive("dt", self.dt)?;
        unit_interval("tol_ell", self.tol_ell)?;
        unit_interval("tol_a", self.tol_a)?;
        unit_interval("quadrature_tol", self.quadrature_tol)?;
        if self.max_inner_iters < 1 {
            return Err(Error::invalid("max_inner_iters", "must be at least 1"));
        }
        if self.max_outer_iters < 1 {
            return Err(Error::invalid("max_outer_iters", "must be at least 1"));
        }
        positive("opening_floor", self.opening_floor)
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v:e} must be positive")))
    }
}

fn nonnegative(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v:e} must be nonnegative")))
    }
}

fn unit_interval(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v:e} not in (0, 1)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn benchmark_source() -> SourceTerm {
        SourceTerm::new(0.03, 32.0, 2.0).unwrap()
    }

    #[test]
    fn source_limits() {
        let s = benchmark_source();
        assert!((s.eval(0.0, 1e9) - 4.774_648_292_756_86e-3).abs() < 1e-16);
        assert_eq!(s.eval(3.0, 0.0), 0.0);
        // direct arithmetic at r=4, t=1
        let want = 0.03 / (2.0 * PI) * (-0.5f64).exp() * (1.0 - (-2.0f64).exp());
        assert!((s.eval(4.0, 1.0) / want - 1.0).abs() < 1e-15);
    }

    #[test]
    fn source_radial_moment_matches_quadrature() {
        let s = SourceTerm::new(3e7, 32e-6, 2.0).unwrap();
        let t = 1e-4;
        let rule = crate::quadrature::FixedRule::gauss(40);
        let num = rule.integrate(0.0, 0.01, |r| s.eval(r, t) * r);
        assert!((s.radial_moment(0.01, t) / num - 1.0).abs() < 1e-12);
        let d = 1e-7;
        let fd = (s.eval(0.004 + d, t) - s.eval(0.004 - d, t)) / (2.0 * d);
        assert!((s.eval_dr(0.004, t) / fd - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mesh_nodes() {
        let m = build_mesh(0.01, 10).unwrap();
        assert!((m.h() - 1e-3).abs() < 1e-18);
        let nodes = m.node_positions();
        assert_eq!(nodes.len(), 11);
        assert_eq!(nodes[10], 0.01);
        assert_eq!(build_mesh(1.0, 2).unwrap().node_positions(), vec![0.0, 0.5, 1.0]);
        assert!(build_mesh(1.0, 1).is_err());
        assert!(build_mesh(0.0, 4).is_err());
        assert!(build_mesh(-1.0, 4).is_err());
    }

    #[test]
    fn shapes_are_lagrange() {
        let m = build_mesh(0.37, 7).unwrap();
        for k in 0..m.nodes() {
            for j in 0..m.nodes() {
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((m.shape(k, m.node(j)) - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn remesh_identity_and_extension() {
        let s = State::new(0.0, 2.0, build_mesh(1.0, 4).unwrap(), vec![5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let same = remesh_transfer(&s, 1.0).unwrap();
        assert_eq!(same, s);
        let longer = remesh_transfer(&s, 1.2).unwrap();
        assert_eq!(longer.pressures[4], 1.0);
        // node 3 at 0.9 lies between old nodes 3 (0.75) and 4 (1.0)
        assert!((longer.pressures[3] - (2.0 - 0.6)).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn partition_of_unity(l in 1e-3f64..10.0, n in 2usize..64, x in 0.0f64..=1.0) {
            let m = build_mesh(l, n).unwrap();
            let r = x * l;
            let total: f64 = (0..m.nodes()).map(|k| m.shape(k, r)).sum();
            prop_assert!((total - 1.0).abs() < 1e-14);
        }

        #[test]
        fn source_monotone(r in 0.0f64..0.02, dr in 0.0f64..0.01, t in 0.0f64..2.0, dt in 0.0f64..1.0) {
            let s = SourceTerm::new(3e7, 32e-6, 2.0).unwrap();
            prop_assert!(s.eval(r, t + dt) >= s.eval(r, t));
            prop_assert!(s.eval(r + dr, t) <= s.eval(r, t));
        }

        #[test]
        fn remesh_reproduces_linear_fields(c in -10.0f64..10.0, shrink in 0.1f64..=1.0, n in 2usize..20) {
            let mesh = build_mesh(1.0, n).unwrap();
            let p = mesh.node_positions().iter().map(|r| c * r).collect();
            let s = State::new(0.0, 1.0, mesh, p).unwrap();
            let t = remesh_transfer(&s, shrink).unwrap();
            for (r, p) in t.mesh.node_positions().iter().zip(&t.pressures) {
                prop_assert!((p - c * r).abs() < 1e-12);
            }
        }

        #[test]
        fn remesh_idempotent(l in 0.1f64..2.0, n in 2usize..12, seed in proptest::collection::vec(-1.0f64..1.0, 13)) {
            let mesh = build_mesh(l, n).unwrap();
            let s = State::new(0.0, 3.0, mesh, seed[..=n].to_vec()).unwrap();
            let once = remesh_transfer(&s, l).unwrap();
            let twice = remesh_transfer(&once, l).unwrap();
            prop_assert_eq!(&once, &s);
            prop_assert_eq!(&twice, &once);
        }
    }
}
