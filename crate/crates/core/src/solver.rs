//! Staggered time stepping: an outer crack-radius loop around an inner
//! fluid-front/pressure loop.

use std::f64::consts::PI;
use std::time::Instant;

use log::{debug, info};
use serde::Serialize;

use crate::elasticity::{fluid_mass, sif};
use crate::error::{Error, Result};
use crate::front::{ascend_root, fluid_front_advance};
use crate::lubrication::{assemble, effective_front_condition, inner_solve};
use crate::model::{remesh_transfer, FluidParams, FrontCondition, MaterialParams, SolverSettings, SourceTerm, State};
use crate::quadrature::QuadratureEngine;

const LENGTH_FLOOR: f64 = 1e-15;

/// Everything a step needs besides the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Problem {
    pub material: MaterialParams,
    pub fluid: FluidParams,
    pub source: SourceTerm,
    pub settings: SolverSettings,
}

impl Problem {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.fluid.validate()?;
        self.source.validate()?;
        self.settings.validate()
    }

    pub fn engine(&self) -> Result<QuadratureEngine> {
        QuadratureEngine::new(self.settings.quadrature_tol, 200)
    }
}

/// Mass bookkeeping carried from step to step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassBalance {
    pub initial: f64,
    /// Cumulative injected mass, backward-Euler in time.
    pub injected: f64,
}

impl MassBalance {
    pub fn start(state: &State, problem: &Problem) -> Self {
        Self {
            initial: fluid_mass(state, &problem.material, problem.fluid.density),
            injected: 0.0,
        }
    }

    /// (M − M₀ − injected) relative to the injected mass, or to M₀ before any injection.
    pub fn relative_residual(&self, current: f64) -> f64 {
        let scale = if self.injected > 0.0 { self.injected } else { self.initial };
        (current - self.initial - self.injected) / scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub state: State,
    pub inner_iters: usize,
    pub outer_iters: usize,
    pub sif: f64,
    /// |K_I − K_Ic|/K_Ic, only when the crack advanced.
    pub griffith_residual: Option<f64>,
    pub fluid_mass: f64,
    pub mass: MassBalance,
    pub mass_residual: f64,
    pub front_clamped: bool,
    #[serde(skip)]
    pub wall_time: f64,
}

impl StepReport {
    pub fn advanced(&self) -> bool {
        self.griffith_residual.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    InnerDivergence,
    OuterDivergence,
    OpeningFloor,
    NumericalFailure,
}

impl Termination {
    fn from_error(e: &Error) -> Self {
        match e {
            Error::Divergence { loop_name: "inner", .. } => Self::InnerDivergence,
            Error::Divergence { .. } => Self::OuterDivergence,
            Error::OpeningFloor { .. } => Self::OpeningFloor,
            _ => Self::NumericalFailure,
        }
    }
}

#[derive(Debug)]
pub struct RunResult {
    pub initial: State,
    pub reports: Vec<StepReport>,
    pub final_state: State,
    pub termination: Termination,
    pub error: Option<Error>,
}

/// Converged inner loop at one crack radius.
#[derive(Debug, Clone)]
struct InnerResult {
    state: State,
    iters: usize,
    sif: f64,
    clamped: bool,
}

fn rel_change(new: f64, old: f64) -> f64 {
    (new - old).abs() / new.abs().max(LENGTH_FLOOR)
}

fn vec_change(new: &[f64], old: &[f64]) -> f64 {
    let diff: f64 = new.iter().zip(old).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = new.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

#[derive(Debug, Clone, Copy)]
struct Relaxation {
    active: bool,
    omega: f64,
    last: Option<f64>,
}

impl Default for Relaxation {
    fn default() -> Self {
        Self {
            active: false,
            omega: 1.0,
            last: None,
        }
    }
}

impl Relaxation {
    /// Factor applied to the raw increment `r`.
    fn factor(&mut self, r: f64) -> f64 {
        if let Some(r0) = self.last {
            if !self.active && r * r0 < 0.0 && r.abs() > r0.abs() {
                self.active = true;
            }
            if self.active && r != r0 {
                self.omega = (-self.omega * r0 / (r - r0)).clamp(0.05, 1.0);
            }
        }
        self.last = Some(r);
        self.omega
    }
}

/// Fluid front and pressures at fixed crack radius `a`, starting from `warm`.
fn inner_loop(prev: &State, warm: &State, a: f64, p: &Problem, q: &QuadratureEngine) -> Result<InnerResult> {
    let s = &p.settings;
    let t1 = prev.time + s.dt;
    let a_rate = (a - prev.crack_radius) / s.dt;
    let start_ell = warm.fluid_radius().min(a);
    let mut trial = remesh_transfer(warm, start_ell)?;
    trial.crack_radius = a;
    trial.time = t1;
    let mut clamped = false;
    // Aitken relaxation of the front update, engaged once the plain iteration oscillates with growing amplitude
    let mut relax = Relaxation::default();
    for j in 1..=s.max_inner_iters {
        let ell_old = trial.fluid_radius();
        let raw = if ell_old < a {
            fluid_front_advance(prev, &trial, &p.material, &p.fluid, &p.source, s.dt, s.opening_floor, q)?
        } else {
            ell_old
        };
        let mut ell = ell_old + relax.factor(raw - ell_old) * (raw - ell_old);
        if ell > a {
            info!("fluid front {ell:e} m clamped to crack radius {a:e} m at t = {t1:e} s");
            ell = a;
            clamped = true;
        }
        if !(ell > 0.0) {
            return Err(Error::invalid("fluid_radius", format!("front receded to {ell:e} m")));
        }
        let lagged = remesh_transfer(&trial, ell)?;
        let l_rate = (ell - prev.fluid_radius()) / s.dt;
        let sys = assemble(
            prev,
            &lagged,
            a_rate,
            l_rate,
            &lagged.pressures,
            &p.material,
            &p.fluid,
            &p.source,
            s,
            q,
        )?;
        let pressures = inner_solve(&sys)?;
        let dl = rel_change(ell, ell_old).max(if relax.active { rel_change(raw, ell_old) } else { 0.0 });
        let dp = vec_change(&pressures, &lagged.pressures);
        trial = State {
            pressures,
            ..lagged
        };
        debug!("inner j={j} ell={ell:e} dl={dl:e} dp={dp:e}");
        if dl < s.tol_ell && dp < s.tol_ell {
            let k = sif(&trial, &p.material, s.sif_prefactor)?;
            return Ok(InnerResult {
                state: trial,
                iters: j,
                sif: k,
                clamped,
            });
        }
    }
    Err(Error::Divergence {
        loop_name: "inner",
        iterations: s.max_inner_iters,
        change: rel_change(trial.fluid_radius(), warm.fluid_radius()),
    })
}

/// Advances `state` by one time step.
pub fn step(state: &State, problem: &Problem, index: usize, mass: &MassBalance) -> Result<StepReport> {
    let clock = Instant::now();
    state.validate()?;
    let q = problem.engine()?;
    let s = &problem.settings;
    let mat = &problem.material;
    let a_n = state.crack_radius;

    let first = inner_loop(state, state, a_n, problem, &q)?;
    let mut outer_iters = 1;
    let accepted = if first.sif <= mat.toughness {
        first
    } else {
        // backward-Euler form of the regularised growth law, divided by the
        // gain G = Δt E′/η: (a − aⁿ)/G = 1 − K_Ic/K(a). Any root has a > aⁿ,
        // so the Heaviside gate is dropped and |g| measures the SIF mismatch.
        let gain = s.dt * mat.plane_strain_modulus / mat.numerical_viscosity;
        let excess = 1.0 - mat.toughness / first.sif;
        let step0 = (gain * excess).min(2.0 * a_n * excess).max(4.0 * s.tol_a * a_n);
        let mut last = first.clone();
        let mut warm = first.state.clone();
        let mut evals = 0;
        ascend_root(a_n, -excess, step0, s.tol_a, s.tol_a, s.max_outer_iters - 1, |a| {
            let r = inner_loop(state, &warm, a, problem, &q)?;
            evals += 1;
            let f = (a - a_n) / gain - 1.0 + mat.toughness / r.sif;
            debug!("outer a={a:e} K={:e} F={f:e}", r.sif);
            warm = r.state.clone();
            last = r;
            Ok(f)
        })?;
        outer_iters += evals;
        last
    };

    let t1 = state.time + s.dt;
    let injected = mass.injected + s.dt * 2.0 * PI * problem.source.radial_moment(accepted.state.fluid_radius(), t1);
    let mass_next = MassBalance {
        initial: mass.initial,
        injected,
    };
    let m = fluid_mass(&accepted.state, mat, problem.fluid.density);
    let advanced = accepted.state.crack_radius > a_n;
    Ok(StepReport {
        step: index,
        inner_iters: accepted.iters,
        outer_iters,
        sif: accepted.sif,
        griffith_residual: advanced.then(|| (accepted.sif - mat.toughness).abs() / mat.toughness),
        fluid_mass: m,
        mass: mass_next,
        mass_residual: mass_next.relative_residual(m),
        front_clamped: accepted.clamped,
        state: accepted.state,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

/// Applies the front condition to the initial data: under a pinned front the
/// front node starts at the lag pressure.
pub fn consistent_initial(mut state: State, problem: &Problem) -> State {
    if effective_front_condition(&state, &problem.settings) == FrontCondition::Pinned {
        if let Some(p) = state.pressures.last_mut() {
            *p = -problem.material.far_field_stress;
        }
    }
    state
}

/// Runs `steps` time steps from `initial` (made consistent first), calling `observe` after each
/// accepted step. A failing step ends the run with the partial history kept.
pub fn run_with<F: FnMut(&StepReport)>(initial: State, problem: &Problem, steps: usize, mut observe: F) -> Result<RunResult> {
    problem.validate()?;
    initial.validate()?;
    let initial = consistent_initial(initial, problem);
    let mut mass = MassBalance::start(&initial, problem);
    let mut reports: Vec<StepReport> = Vec::with_capacity(steps);
    let mut current = initial.clone();
    for n in 1..=steps {
        match step(&current, problem, n, &mass) {
            Ok(rep) => {
                info!(
                    "step {n}: t={:e} a={:e} ell={:e} K={:e} inner={} outer={}",
                    rep.state.time,
                    rep.state.crack_radius,
                    rep.state.fluid_radius(),
                    rep.sif,
                    rep.inner_iters,
                    rep.outer_iters
                );
                observe(&rep);
                mass = rep.mass;
                current = rep.state.clone();
                reports.push(rep);
            }
            Err(e) => {
                info!("step {n} rejected: {e}");
                return Ok(RunResult {
                    initial,
                    reports,
                    final_state: current,
                    termination: Termination::from_error(&e),
                    error: Some(e),
                });
            }
        }
    }
    Ok(RunResult {
        initial,
        reports,
        final_state: current,
        termination: Termination::Completed,
        error: None,
    })
}

pub fn run(initial: State, problem: &Problem, steps: usize) -> Result<RunResult> {
    run_with(initial, problem, steps, |_| {})
}
