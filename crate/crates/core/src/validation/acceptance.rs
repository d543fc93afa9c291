//! The acceptance suite: oracle comparisons, analytic fixed points and the
//! regime runs, one verdict per criterion.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::Result;
use crate::elasticity::{opening, sif, uniform_sif};
use crate::kernels::{influence_A, influence_dA_da, influence_dA_dl, influence_dA_dr};
use crate::lubrication::{assemble, inner_solve};
use crate::model::{DlForm, FrontCondition, MaterialParams, RadialMesh, SifPrefactor, State};
use crate::quadrature::QuadratureEngine;
use crate::solver::{run, RunResult, Termination};
use crate::validation::oracle::{self, Hats, NaiveInput};

pub const SEED: u64 = 0x5eed_2024;

pub const KERNEL_SAMPLES: usize = 200;
pub const KERNEL_REL_TOL: f64 = 1e-6;
pub const DERIVATIVE_SAMPLES: usize = 100;
pub const DERIVATIVE_REL_TOL: f64 = 1e-4;
/// Minimum distance of a derivative sample from any case boundary, in elements.
pub const BOUNDARY_MARGIN: f64 = 0.05;
pub const SNEDDON_ELEMENTS: usize = 64;
pub const SNEDDON_RADII: usize = 20;
pub const SNEDDON_OPENING_TOL: f64 = 5e-3;
pub const SNEDDON_SIF_TOL: f64 = 1e-3;
pub const ASSEMBLY_ELEMENTS: usize = 4;
pub const ASSEMBLY_REL_TOL: f64 = 1e-8;
pub const GRIFFITH_TOL: f64 = 1e-4;
pub const REGIME_STEPS: usize = 200;
pub const COMPLIANT_MODULUS: f64 = 4e8;
pub const STIFF_MODULUS: f64 = 4e12;
/// Steps over which the compliant crack must hold still while the fluid advances.
pub const COMPLIANT_WINDOW: usize = 20;
/// Latest accepted step at which stiff growth must have started.
pub const STIFF_ONSET_LIMIT: usize = 50;
pub const MASS_ELEMENTS: usize = 40;
pub const MASS_STEPS: usize = 100;
pub const MASS_TOL: f64 = 1e-2;
pub const TOGGLE_TOL: f64 = 1e-2;

const ORACLE_TOL: f64 = 1e-12;
const ASSEMBLY_ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Verdict {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!(
            "[{}] {}. {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Verdict {
    let clock = Instant::now();
    let (passed, detail) = f();
    Verdict {
        id,
        name,
        passed,
        detail,
        seconds: clock.elapsed().as_secs_f64(),
    }
}

fn engine() -> QuadratureEngine {
    RunConfig::benchmark().problem().engine().expect("benchmark engine")
}

/// A random influence-function query, drawn so that `case` cycles through
/// r below the hat, on its rising half, on its falling half and beyond it.
#[derive(Debug, Clone, Copy)]
pub struct KernelQuery {
    pub k: usize,
    pub r: f64,
    pub a: f64,
    pub ell: f64,
    pub elements: usize,
    pub case: usize,
}

pub fn kernel_queries(count: usize, margin: f64, seed: u64) -> Vec<KernelQuery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let case = out.len() % 4;
        let n = rng.gen_range(2..=40usize);
        let ell = rng.gen_range(2e-3..2e-2);
        let a = if out.len() % 10 == 9 && case != 3 {
            ell
        } else {
            ell * rng.gen_range(1.001..2.5)
        };
        let h = ell / n as f64;
        let k = match case {
            0 => rng.gen_range(2..=n),
            1 => rng.gen_range(1..=n),
            _ => rng.gen_range(0..=n),
        };
        let c = |j: f64| j * h;
        let kf = k as f64;
        let (lo, hi) = match case {
            0 => (0.0, c(kf - 1.0)),
            1 => (c(kf - 1.0), c(kf)),
            2 if k < n => (c(kf), c(kf + 1.0)),
            2 => continue,
            _ => (c(kf + 1.0).min(ell), a),
        };
        let pad = margin * h;
        let (lo, hi) = (lo + pad, hi - pad.max(1e-6 * a));
        if !(hi > lo) {
            continue;
        }
        out.push(KernelQuery {
            k,
            r: rng.gen_range(lo..hi),
            a,
            ell,
            elements: n,
            case,
        });
    }
    out
}

/// Criterion 1.
pub fn kernel_oracle() -> Verdict {
    timed(1, "kernel oracle equivalence", || {
        let q = engine();
        let mut worst = (0.0f64, None);
        let mut per_case = [0usize; 4];
        for kq in kernel_queries(KERNEL_SAMPLES, 0.0, SEED) {
            per_case[kq.case] += 1;
            let mesh = RadialMesh::new(kq.ell, kq.elements).expect("mesh");
            let closed = match influence_A(kq.k, kq.r, kq.a, &mesh, &q) {
                Ok(v) => v,
                Err(e) => return (false, format!("closed form failed at {kq:?}: {e}")),
            };
            let reference = oracle::influence(kq.k, kq.r, kq.a, Hats { ell: kq.ell, n: kq.elements }, ORACLE_TOL);
            let rel = (closed - reference).abs() / reference.abs();
            if !(rel <= worst.0) {
                worst = (rel, Some(kq));
            }
        }
        (
            worst.0 <= KERNEL_REL_TOL,
            format!(
                "max rel err {:.2e} (tol {KERNEL_REL_TOL:e}) over {KERNEL_SAMPLES} queries, cases {per_case:?}",
                worst.0
            ),
        )
    })
}

fn central(f: impl Fn(f64) -> f64, x: f64, d: f64) -> f64 {
    (f(x + d) - f(x - d)) / (2.0 * d)
}

/// Criterion 2.
pub fn derivative_consistency() -> Verdict {
    timed(2, "derivative consistency", || {
        let q = QuadratureEngine::new(1e-12, 400).expect("engine");
        let mut worst = [0.0f64; 3];
        let queries = kernel_queries(DERIVATIVE_SAMPLES, BOUNDARY_MARGIN, SEED ^ 1);
        for kq in &queries {
            let (k, r, a, ell, n) = (kq.k, kq.r, kq.a, kq.ell, kq.elements);
            let mesh = RadialMesh::new(ell, n).expect("mesh");
            let h = mesh.h();
            let d = 1e-3 * BOUNDARY_MARGIN * h;
            let value = |r: f64, a: f64, ell: f64| {
                let m = RadialMesh::new(ell, n).expect("mesh");
                influence_A(k, r, a, &m, &q).expect("A")
            };
            let analytic = [
                influence_dA_dr(k, r, a, &mesh, &q),
                influence_dA_da(k, r, a, &mesh),
                influence_dA_dl(k, r, a, &mesh, &q, DlForm::Exact),
            ];
            let fd = [
                central(|x| value(x, a, ell), r, d),
                if a > ell { central(|x| value(r, x, ell), a, d.min(0.5 * (a - ell))) } else { f64::NAN },
                if a > ell { central(|x| value(r, a, x), ell, d.min(0.5 * (a - ell))) } else { f64::NAN },
            ];
            for i in 0..3 {
                if fd[i].is_nan() {
                    continue;
                }
                let an = match &analytic[i] {
                    Ok(v) => *v,
                    Err(e) => return (false, format!("derivative {i} failed at {kq:?}: {e}")),
                };
                let rel = (an - fd[i]).abs() / an.abs().max(fd[i].abs());
                worst[i] = worst[i].max(rel);
            }
        }
        let ok = worst.iter().all(|w| *w <= DERIVATIVE_REL_TOL);
        (
            ok,
            format!(
                "max rel err d/dr {:.2e}, d/da {:.2e}, d/dl {:.2e} (tol {DERIVATIVE_REL_TOL:e}) over {} points",
                worst[0],
                worst[1],
                worst[2],
                queries.len()
            ),
        )
    })
}

/// Criterion 3.
pub fn sneddon() -> Verdict {
    timed(3, "Sneddon fixed point", || {
        let (a, p, e) = (0.02, 1e6, 4e10);
        let mat = MaterialParams::new(e, 0.0, 5e5, 0.1, 0.0).expect("material");
        let state = State::initial(a, a, SNEDDON_ELEMENTS, p).expect("state");
        let q = engine();
        let mut worst_w = 0.0f64;
        for i in 0..SNEDDON_RADII {
            let r = a * (i as f64 + 0.5) / SNEDDON_RADII as f64;
            let w = match opening(&state, &mat, r, &q) {
                Ok(w) => w,
                Err(err) => return (false, format!("opening failed at r = {r:e}: {err}")),
            };
            let exact = 8.0 * p / (std::f64::consts::PI * e) * ((a - r) * (a + r)).sqrt();
            worst_w = worst_w.max((w - exact).abs() / exact);
        }
        let k = sif(&state, &mat, SifPrefactor::PiSqrtA).expect("sif");
        let k_err = (k - uniform_sif(p, a)).abs() / uniform_sif(p, a);
        (
            worst_w <= SNEDDON_OPENING_TOL && k_err <= SNEDDON_SIF_TOL,
            format!(
                "opening max rel err {worst_w:.2e} (tol {SNEDDON_OPENING_TOL:e}), K_I rel err {k_err:.2e} (tol {SNEDDON_SIF_TOL:e})"
            ),
        )
    })
}

/// The step-one system compared by criterion 4: fronts moved off their
/// initial positions, a curved lagged pressure and a free front node.
pub fn assembly_case() -> (State, State, f64, f64, Vec<f64>, crate::solver::Problem) {
    let cfg = RunConfig::benchmark();
    let mut problem = cfg.problem();
    problem.settings.front_condition = FrontCondition::Free;
    let dt = problem.settings.dt;
    let prev = State::initial(0.02, 0.01, ASSEMBLY_ELEMENTS, cfg.geometry.initial_pressure).expect("state");
    let (a1, l1) = (0.0201, 0.0102);
    let mesh = RadialMesh::new(l1, ASSEMBLY_ELEMENTS).expect("mesh");
    let lagged: Vec<f64> = mesh
        .node_positions()
        .iter()
        .map(|r| 1e6 * (1.0 - 0.3 * (r / l1).powi(2)))
        .collect();
    let trial = State::new(dt, a1, mesh, lagged.clone()).expect("trial");
    ((prev), trial, (a1 - 0.02) / dt, (l1 - 0.01) / dt, lagged, problem)
}

/// Largest relative differences between the production and naive systems
/// (matrix, right-hand side, solution) for the criterion-4 case under `form`.
pub fn assembly_errors(form: DlForm) -> Result<[f64; 3]> {
    let (prev, trial, a_rate, l_rate, lagged, mut problem) = assembly_case();
    problem.settings.dl_form = form;
    let s = &problem.settings;
    let sys = assemble(
        &prev,
        &trial,
        a_rate,
        l_rate,
        &lagged,
        &problem.material,
        &problem.fluid,
        &problem.source,
        s,
        &problem.engine()?,
    )?;
    let naive = oracle::naive_assembly(
        &NaiveInput {
            hats: Hats {
                ell: trial.fluid_radius(),
                n: ASSEMBLY_ELEMENTS,
            },
            crack_radius: trial.crack_radius,
            a_rate,
            l_rate,
            prev_pressures: prev.pressures.clone(),
            lagged_pressures: lagged,
            time: trial.time,
            dt: s.dt,
            modulus: problem.material.plane_strain_modulus,
            viscosity: problem.fluid.viscosity,
            density: problem.fluid.density,
            source: (problem.source.amplitude, problem.source.radial_decay, problem.source.ramp_rate),
            include_dl: s.include_dadl_terms,
            front_node_only: form == DlForm::FrontNodeOnly,
            include_dr: s.include_dadr_terms,
            pinned: false,
        },
        ASSEMBLY_ORACLE_TOL,
    );
    let n1 = ASSEMBLY_ELEMENTS + 1;
    let rel = |x: f64, y: f64| if x == y { 0.0 } else { (x - y).abs() / y.abs() };
    let mut worst_m = 0.0f64;
    let mut worst_b = 0.0f64;
    for i in 0..n1 {
        for k in 0..n1 {
            worst_m = worst_m.max(rel(sys.matrix[(i, k)], naive.matrix[i][k]));
        }
        worst_b = worst_b.max(rel(sys.rhs[i], naive.rhs[i]));
    }
    let x = inner_solve(&sys)?;
    let y = oracle::gauss_solve(naive.matrix, naive.rhs);
    let worst_x = x.iter().zip(&y).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    Ok([worst_m, worst_b, worst_x])
}

/// Criterion 4, with the configured form of ∂A/∂ℓ.
pub fn assembly_oracle() -> Verdict {
    timed(4, "assembly oracle", || {
        let form = RunConfig::benchmark().settings.dl_form;
        match assembly_errors(form) {
            Ok([m, b, x]) => (
                m <= ASSEMBLY_REL_TOL && b <= ASSEMBLY_REL_TOL,
                format!("max rel err matrix {m:.2e}, rhs {b:.2e} (tol {ASSEMBLY_REL_TOL:e}); solution {x:.2e}"),
            ),
            Err(e) => (false, format!("assembly failed: {e}")),
        }
    })
}

/// The five acceptance runs.
#[derive(Debug)]
pub struct Runs {
    /// Benchmark, 200 steps.
    pub benchmark: RunResult,
    pub compliant: RunResult,
    pub stiff: RunResult,
    /// Benchmark at 40 elements, 100 steps.
    pub fine: RunResult,
    /// Benchmark with the ∂A/∂ℓ and ∂A/∂r terms switched off.
    pub reduced: RunResult,
}

impl Runs {
    fn all(&self) -> [(&'static str, &RunResult); 5] {
        [
            ("benchmark", &self.benchmark),
            ("compliant", &self.compliant),
            ("stiff", &self.stiff),
            ("fine", &self.fine),
            ("reduced", &self.reduced),
        ]
    }
}

pub fn acceptance_configs() -> [RunConfig; 5] {
    let base = RunConfig::benchmark();
    let mut benchmark = base.clone();
    benchmark.steps = REGIME_STEPS;
    let mut compliant = benchmark.clone();
    compliant.material.plane_strain_modulus = COMPLIANT_MODULUS;
    let mut stiff = benchmark.clone();
    stiff.material.plane_strain_modulus = STIFF_MODULUS;
    let mut fine = base.clone();
    fine.geometry.elements = MASS_ELEMENTS;
    fine.steps = MASS_STEPS;
    let mut reduced = benchmark.clone();
    reduced.settings.include_dadl_terms = false;
    reduced.settings.include_dadr_terms = false;
    [benchmark, compliant, stiff, fine, reduced]
}

pub fn acceptance_runs() -> Runs {
    let mut results: Vec<RunResult> = acceptance_configs()
        .into_par_iter()
        .map(|cfg| {
            let initial = cfg.initial_state().expect("initial state");
            run(initial, &cfg.problem(), cfg.steps).expect("valid run")
        })
        .collect();
    let reduced = results.pop().expect("five runs");
    let fine = results.pop().expect("five runs");
    let stiff = results.pop().expect("five runs");
    let compliant = results.pop().expect("five runs");
    let benchmark = results.pop().expect("five runs");
    Runs {
        benchmark,
        compliant,
        stiff,
        fine,
        reduced,
    }
}

fn completed(name: &str, r: &RunResult) -> Option<String> {
    (r.termination != Termination::Completed).then(|| {
        format!(
            "{name} run stopped after {} steps: {:?} {}",
            r.reports.len(),
            r.termination,
            r.error.as_ref().map(|e| e.to_string()).unwrap_or_default()
        )
    })
}

/// Criterion 5, over every advancing step of the 200-step runs at the
/// benchmark and stiff moduli.
pub fn griffith(runs: &Runs) -> Verdict {
    timed(5, "Griffith convergence", || {
        let mut advancing = 0;
        let mut worst = 0.0f64;
        let mut parts = Vec::new();
        for (name, r) in [("benchmark", &runs.benchmark), ("stiff", &runs.stiff)] {
            if let Some(msg) = completed(name, r) {
                return (false, msg);
            }
            let res: Vec<f64> = r.reports.iter().filter_map(|s| s.griffith_residual).collect();
            parts.push(format!("{name} {} advancing", res.len()));
            advancing += res.len();
            worst = res.into_iter().fold(worst, f64::max);
        }
        (
            advancing > 0 && worst <= GRIFFITH_TOL,
            format!("max |K-Kc|/Kc {worst:.2e} (tol {GRIFFITH_TOL:e}) over {} steps", parts.join(", ")),
        )
    })
}

/// Criterion 6.
pub fn regimes(runs: &Runs) -> Verdict {
    timed(6, "regime reproduction", || {
        for (name, r) in [("compliant", &runs.compliant), ("stiff", &runs.stiff)] {
            if let Some(msg) = completed(name, r) {
                return (false, msg);
            }
        }
        let c = &runs.compliant;
        let a0 = c.initial.crack_radius;
        let mut ell_prev = c.initial.fluid_radius();
        let mut held = 0;
        let mut grew = true;
        for rep in c.reports.iter().take_while(|rep| rep.state.crack_radius == a0) {
            held += 1;
            if held <= COMPLIANT_WINDOW {
                grew &= rep.state.fluid_radius() > ell_prev;
            }
            ell_prev = rep.state.fluid_radius();
        }
        let compliant_ok = held >= COMPLIANT_WINDOW && grew;

        let s = &runs.stiff;
        let onset = s.reports.iter().find(|rep| rep.state.crack_radius > s.initial.crack_radius).map(|rep| rep.step);
        let mut lag_prev = s.initial.lag();
        let mut lag_drops = 0;
        for rep in &s.reports {
            if rep.state.lag() < lag_prev {
                lag_drops += 1;
            }
            lag_prev = rep.state.lag();
        }
        let lag_growth = s.reports.last().map(|rep| rep.state.lag() - s.initial.lag()).unwrap_or(0.0);
        let stiff_ok = matches!(onset, Some(n) if n <= STIFF_ONSET_LIMIT) && lag_drops == 0 && lag_growth > 0.0;
        (
            compliant_ok && stiff_ok,
            format!(
                "compliant: a held for {held} steps, ell strictly rising over the first {COMPLIANT_WINDOW}: {grew}; \
                 stiff: growth onset at step {} (limit {STIFF_ONSET_LIMIT}), lag decreases {lag_drops}, lag change {lag_growth:.3e} m",
                onset.map(|n| n.to_string()).unwrap_or_else(|| "none".into())
            ),
        )
    })
}

/// Criterion 7.
pub fn mass_conservation(runs: &Runs) -> Verdict {
    timed(7, "mass conservation", || {
        let r = &runs.fine;
        if let Some(msg) = completed("fine", r) {
            return (false, msg);
        }
        let Some(last) = r.reports.last() else {
            return (false, "no steps".into());
        };
        let res = last.mass_residual.abs();
        (
            res <= MASS_TOL,
            format!(
                "|M - M0 - injected|/injected {res:.2e} after {} steps at {MASS_ELEMENTS} elements (tol {MASS_TOL:e})",
                r.reports.len()
            ),
        )
    })
}

/// Criterion 8.
pub fn irreversibility(runs: &Runs) -> Verdict {
    timed(8, "irreversibility and ordering", || {
        let mut bad = Vec::new();
        let mut steps = 0;
        for (name, r) in runs.all() {
            let mut a_prev = r.initial.crack_radius;
            for rep in &r.reports {
                steps += 1;
                let s = &rep.state;
                if s.crack_radius < a_prev || s.fluid_radius() > s.crack_radius {
                    bad.push(format!("{name} step {}", rep.step));
                }
                a_prev = s.crack_radius;
            }
        }
        (
            bad.is_empty(),
            if bad.is_empty() {
                format!("a nondecreasing and ell <= a at all {steps} accepted steps")
            } else {
                format!("violated at {}", bad.join(", "))
            },
        )
    })
}

/// Criterion 9.
pub fn negligible_terms(runs: &Runs) -> Verdict {
    timed(9, "negligible-terms observation", || {
        for (name, r) in [("benchmark", &runs.benchmark), ("reduced", &runs.reduced)] {
            if let Some(msg) = completed(name, r) {
                return (false, msg);
            }
        }
        let mut worst = (0.0f64, 0.0f64);
        for (x, y) in runs.benchmark.reports.iter().zip(&runs.reduced.reports) {
            let da = (x.state.crack_radius - y.state.crack_radius).abs() / x.state.crack_radius;
            let dl = (x.state.fluid_radius() - y.state.fluid_radius()).abs() / x.state.fluid_radius();
            worst = (worst.0.max(da), worst.1.max(dl));
        }
        (
            worst.0 < TOGGLE_TOL && worst.1 < TOGGLE_TOL,
            format!("max rel change a {:.2e}, ell {:.2e} (tol {TOGGLE_TOL:e})", worst.0, worst.1),
        )
    })
}

/// Runs every criterion, reporting each verdict as it is reached.
pub fn run_all(mut report: impl FnMut(&Verdict)) -> Vec<Verdict> {
    let mut out = Vec::new();
    let mut push = |v: Verdict| {
        report(&v);
        out.push(v);
    };
    push(kernel_oracle());
    push(derivative_consistency());
    push(sneddon());
    push(assembly_oracle());
    let runs = acceptance_runs();
    push(griffith(&runs));
    push(regimes(&runs));
    push(mass_conservation(&runs));
    push(irreversibility(&runs));
    push(negligible_terms(&runs));
    out
}
