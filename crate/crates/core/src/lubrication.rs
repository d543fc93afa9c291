//! Backward-Euler weak form of the lubrication equation and the Picard pressure solve.
//!
//! Row i of the system tests the mass balance with ψ_i:
//!
//! ```text
//! c Σ_k [S_ik (p_k − p_k^n)/Δt + ȧ Ta_ik p_k + ℓ̇ Tl_ik p_k] + Σ_k P_ik p_k
//!     = c σ₀ (ȧ Ta_iB + ℓ̇ Tl_iB) + (12μ/ρ) F_i + (μ/ρ) (G_i − H_i)
//! ```
//!
//! with c = 96μ/(πE′), S_ik = ∫ψ_i A_k r dr, Ta and Tl the same with ∂A_k/∂a
//! and ∂A_k/∂ℓ, P_ik = ∫ψ_i′ w³ ψ_k′ r dr, F_i = ∫ψ_i s r dr,
//! G_i = ∫ψ_i′ w² s′ r dr and H_i = ∫ψ_i′ w s w′ r dr. The opening w in P, G
//! and H is frozen at the lagged pressure iterate.
//!
//! The r-integrals against A_k are turned into z-integrals of inner profiles
//! by swapping the order of integration, e.g. S_ik = ∫₀^a J_i(z) J_k(z) dz.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::elasticity::{z_rule, OpeningSampler};
use crate::error::{Error, Result};
use crate::kernels::{self, hat_eval, inner_i1, HatProfile, InnerProfile, LagProfile};
use crate::model::{DlForm, FluidParams, FrontCondition, MaterialParams, RadialMesh, SolverSettings, SourceTerm, State};
use crate::quadrature::{FixedRule, QuadratureEngine};

const ELEMENT_POINTS: usize = 8;
const CONDITION_LIMIT: f64 = 1e14;

/// Frobenius norms of the separate contributions.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TermNorms {
    pub storage: f64,
    pub crack_advection: f64,
    pub front_advection: f64,
    pub poiseuille: f64,
    pub source_coupling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub diagnostics: TermNorms,
    pub front_condition: FrontCondition,
}

/// z-integral matrices of one configuration (mesh, a). Column N+1 holds the
/// lag-zone load.
#[derive(Debug, Clone)]
pub struct Moments {
    /// ∫ψ_i A_k r dr
    pub storage: DMatrix<f64>,
    /// ∫ψ_i ∂_a A_k r dr
    pub crack: DMatrix<f64>,
    /// ∫ψ_i ∂_ℓ A_k r dr
    pub front: DMatrix<f64>,
}

fn node(mesh: &RadialMesh, j: usize) -> f64 {
    mesh.node(j)
}

/// Antiderivative of y²/√(z²−y²) evaluated at y ≤ z.
#[inline]
fn g2(z: f64, y: f64) -> f64 {
    if y >= z {
        return 0.25 * PI * z * z;
    }
    let s = ((z - y) * (z + y)).sqrt();
    0.5 * z * z * y.atan2(s) - 0.5 * y * s
}

/// K_i(z) = ∫₀^min(z,ℓ) r² ψ_i′(r)/√(z²−r²) dr for every i.
fn slope_profiles(mesh: &RadialMesh, z: f64, out: &mut [f64]) {
    let n = mesh.elements();
    let h = mesh.h();
    out.iter_mut().for_each(|v| *v = 0.0);
    for e in 0..n {
        let lo = node(mesh, e);
        if z <= lo {
            break;
        }
        let hi = node(mesh, e + 1).min(z);
        let part = (g2(z, hi) - g2(z, lo)) / h;
        out[e] -= part;
        out[e + 1] += part;
    }
}

/// J_k(z) for every hat and J_B(z) in the last slot.
fn inner_profiles(mesh: &RadialMesh, z: f64, out: &mut [f64]) {
    let n = mesh.elements();
    let (h, ell) = (mesh.h(), mesh.fluid_radius());
    for (k, v) in out[..=n].iter_mut().enumerate() {
        *v = hat_eval(k, n, h, ell, z).0;
    }
    out[n + 1] = LagProfile::new(ell).value(z);
}

/// Storage and advection moments, with the exact or front-node ℓ-derivative.
pub fn moments(mesh: &RadialMesh, a: f64, q: &QuadratureEngine, form: DlForm, need_front_row: bool) -> Result<Moments> {
    let n = mesh.elements();
    let ell = mesh.fluid_radius();
    let cols = n + 2;
    let mut s = DMatrix::<f64>::zeros(n + 1, cols);
    let mut qm = DMatrix::<f64>::zeros(n + 1, cols);
    let mut jz = vec![0.0; cols];
    let mut kz = vec![0.0; n + 1];
    for (z, w) in z_rule(&mesh.node_positions(), a, mesh.h()) {
        inner_profiles(mesh, z, &mut jz);
        slope_profiles(mesh, z, &mut kz);
        for i in 0..=n {
            if jz[i] == 0.0 && kz[i] == 0.0 {
                continue;
            }
            let (wj, wk) = (w * jz[i], w * kz[i]);
            for k in 0..cols {
                s[(i, k)] += wj * jz[k];
                qm[(i, k)] += wk * jz[k];
            }
        }
    }
    let mut ja = vec![0.0; cols];
    inner_profiles(mesh, a, &mut ja);
    let crack = DMatrix::from_fn(n + 1, cols, |i, k| ja[i] * ja[k]);

    let mut front = DMatrix::<f64>::zeros(n + 1, cols);
    for i in 0..=n {
        for k in 0..cols {
            front[(i, k)] = (3.0 * s[(i, k)] - a * crack[(i, k)] + qm[(i, k)]) / ell;
        }
    }
    // boundary term of the moving upper limit, row N only
    if need_front_row && a > ell {
        for k in 0..=n {
            let ak = kernels::outer_value(&HatProfile::new(mesh, k), ell, a, q)?;
            front[(n, k)] -= ell * ak;
        }
        front[(n, n + 1)] -= ell * (a - ell);
    }
    if form == DlForm::FrontNodeOnly {
        let mut jl = vec![0.0; cols];
        inner_profiles(mesh, ell, &mut jl);
        let i1 = inner_i1(ell, n, mesh.h())?;
        for i in 0..=n {
            for k in 0..=n {
                front[(i, k)] = if k == n { i1 * jl[i] } else { 0.0 };
            }
        }
    }
    Ok(Moments {
        storage: s,
        crack,
        front,
    })
}

/// Opening and its slope at the element quadrature points, with ψ data.
struct ElementSample {
    r: f64,
    weight: f64,
    element: usize,
    w: f64,
    dw: f64,
}

fn element_samples(
    state: &State,
    pressures: &[f64],
    mat: &MaterialParams,
    q: &QuadratureEngine,
) -> Result<Vec<ElementSample>> {
    let mesh = &state.mesh;
    let sampler = OpeningSampler::new(mesh, pressures, state.crack_radius, mat.far_field_stress);
    let c = mat.compliance();
    let rule = FixedRule::graded(ELEMENT_POINTS);
    let mut out = Vec::with_capacity(mesh.elements() * ELEMENT_POINTS);
    for e in 0..mesh.elements() {
        for (r, weight) in rule.points(mesh.node(e), mesh.node(e + 1)) {
            let (v, d) = sampler.sample(r, q)?;
            out.push(ElementSample {
                r,
                weight,
                element: e,
                w: c * v,
                dw: c * d,
            });
        }
    }
    Ok(out)
}

fn check_finite(m: &DMatrix<f64>, term: &'static str) -> Result<()> {
    for (row, r) in m.row_iter().enumerate() {
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, term });
        }
    }
    Ok(())
}

fn check_finite_vec(v: &DVector<f64>, term: &'static str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(row) => Err(Error::NonFinite { row, term }),
        None => Ok(()),
    }
}

/// Front condition actually applied: with zero lag the front node is left free.
pub fn effective_front_condition(trial: &State, settings: &SolverSettings) -> FrontCondition {
    if trial.fluid_radius() >= trial.crack_radius {
        FrontCondition::Free
    } else {
        settings.front_condition
    }
}

/// Assembles the linear system for p^{n+1} at the trial geometry.
///
/// `prev` supplies p^n (same element count), `trial` the mesh, crack radius
/// and new time, `lagged_p` the Picard iterate freezing the opening.
#[allow(clippy::too_many_arguments)]
pub fn assemble(
    prev: &State,
    trial: &State,
    a_rate: f64,
    l_rate: f64,
    lagged_p: &[f64],
    mat: &MaterialParams,
    fluid: &FluidParams,
    src: &SourceTerm,
    settings: &SolverSettings,
    q: &QuadratureEngine,
) -> Result<AssembledSystem> {
    let mesh = &trial.mesh;
    let n = mesh.elements();
    if prev.pressures.len() != n + 1 || lagged_p.len() != n + 1 {
        return Err(Error::invalid("pressures", "previous or lagged pressures do not match the trial mesh"));
    }
    let dt = settings.dt;
    let a = trial.crack_radius;
    let t = trial.time;
    let sigma0 = mat.far_field_stress;
    let bc = effective_front_condition(trial, settings);
    let use_dl = settings.include_dadl_terms && l_rate != 0.0;
    let mom = moments(mesh, a, q, settings.dl_form, use_dl && bc == FrontCondition::Free)?;
    let c = 96.0 * fluid.viscosity / (PI * mat.plane_strain_modulus);
    let nu = fluid.viscosity / fluid.density;

    let sq = mom.storage.columns(0, n + 1);
    let storage = sq * (c / dt);
    let crack = mom.crack.columns(0, n + 1) * (c * a_rate);
    let front = if use_dl {
        mom.front.columns(0, n + 1) * (c * l_rate)
    } else {
        DMatrix::zeros(n + 1, n + 1)
    };

    let samples = element_samples(trial, lagged_p, mat, q)?;
    let mut poiseuille = DMatrix::zeros(n + 1, n + 1);
    let mut source = DVector::zeros(n + 1);
    for smp in &samples {
        let e = smp.element;
        let (r0, r1) = (mesh.node(e), mesh.node(e + 1));
        let x = (smp.r - r0) / (r1 - r0);
        let psi = [1.0 - x, x];
        let dpsi = [mesh.shape_slope(e, e), mesh.shape_slope(e + 1, e)];
        let wr = smp.weight * smp.r;
        let w3 = smp.w * smp.w * smp.w;
        for (a_i, i) in [e, e + 1].into_iter().enumerate() {
            for (b_k, k) in [e, e + 1].into_iter().enumerate() {
                poiseuille[(i, k)] += wr * dpsi[a_i] * w3 * dpsi[b_k];
            }
        }
        let s = src.eval(smp.r, t);
        let ds = src.eval_dr(smp.r, t);
        let coupling = if settings.include_dadr_terms {
            smp.w * s * smp.dw
        } else {
            0.0
        };
        for (a_i, i) in [e, e + 1].into_iter().enumerate() {
            source[i] += wr
                * (12.0 * nu * psi[a_i] * s + nu * dpsi[a_i] * (smp.w * smp.w * ds - coupling));
        }
    }

    let p_old = DVector::from_column_slice(&prev.pressures);
    let lag_col = |m: &DMatrix<f64>| DVector::from_fn(n + 1, |i, _| m[(i, n + 1)]);
    let mut lag_drive = lag_col(&mom.crack) * a_rate;
    if use_dl {
        lag_drive += lag_col(&mom.front) * l_rate;
    }
    let mut rhs = &storage * &p_old + lag_drive * (c * sigma0) + &source;
    let mut matrix = &storage + &crack + &front + &poiseuille;

    check_finite(&storage, "storage")?;
    check_finite(&crack, "crack-front advection")?;
    check_finite(&front, "fluid-front advection")?;
    check_finite(&poiseuille, "Poiseuille")?;
    check_finite_vec(&source, "source coupling")?;
    check_finite_vec(&rhs, "right-hand side")?;

    if bc == FrontCondition::Pinned {
        let scale = (0..n).map(|i| matrix[(i, i)].abs()).fold(0.0, f64::max);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        matrix.row_mut(n).fill(0.0);
        matrix[(n, n)] = scale;
        rhs[n] = -sigma0 * scale;
    }

    Ok(AssembledSystem {
        diagnostics: TermNorms {
            storage: storage.norm(),
            crack_advection: crack.norm(),
            front_advection: front.norm(),
            poiseuille: poiseuille.norm(),
            source_coupling: source.norm(),
        },
        matrix,
        rhs,
        front_condition: bc,
    })
}

/// Dense LU solve with a 1-norm condition check.
pub fn inner_solve(sys: &AssembledSystem) -> Result<Vec<f64>> {
    let m = &sys.matrix;
    let lu = m.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    let cond = norm1(m) * norm1(&inv);
    if !(cond.is_finite() && cond <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition: cond });
    }
    let x = &inv * &sys.rhs;
    Ok(x.iter().copied().collect())
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
