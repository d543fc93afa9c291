//! Fluid-front advance from the integrated mass balance and crack-front
//! velocity from the viscously regularised Griffith law.

use crate::elasticity::{self, volume_moment};
use crate::error::{Error, Result};
use crate::model::{FluidParams, MaterialParams, SourceTerm, State};
use crate::quadrature::QuadratureEngine;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontState {
    pub crack_radius: f64,
    pub fluid_radius: f64,
    pub a_rate: f64,
    pub l_rate: f64,
    pub sif: f64,
    /// K_I − K_Ic
    pub yield_value: f64,
}

/// New fluid radius from mass balance over `[0, ℓ_lag]`, ℓ_lag being the
/// fluid radius of `trial`:
///
/// ℓ = ℓⁿ + Δt/(ℓ_lag ρ w(ℓ_lag)) ∫₀^ℓ_lag (s − ρ (w_trial − wⁿ)/Δt) r dr.
#[allow(clippy::too_many_arguments)]
pub fn fluid_front_advance(
    prev: &State,
    trial: &State,
    mat: &MaterialParams,
    fluid: &FluidParams,
    src: &SourceTerm,
    dt: f64,
    opening_floor: f64,
    q: &QuadratureEngine,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", "time step must be positive"));
    }
    let ell = trial.fluid_radius();
    let w_front = elasticity::opening(trial, mat, ell, q)?;
    if !(w_front > opening_floor) {
        return Err(Error::OpeningFloor {
            radius: ell,
            opening: w_front,
            floor: opening_floor,
        });
    }
    let stored = volume_moment(trial, mat, ell) - volume_moment(prev, mat, ell.min(prev.crack_radius));
    let injected = src.radial_moment(ell, trial.time);
    let rho = fluid.density;
    Ok(prev.fluid_radius() + dt * (injected - rho * stored / dt) / (ell * rho * w_front))
}

/// ∂ℓ/∂t = w²(ℓ)/(12μ) [−∂p/∂r + (μ/ρ) ∂(s/w)/∂r] at r = ℓ, with a
/// second-order backward difference for the pressure gradient.
pub fn fluid_front_velocity_gradient_form(
    state: &State,
    mat: &MaterialParams,
    fluid: &FluidParams,
    src: &SourceTerm,
    opening_floor: f64,
    q: &QuadratureEngine,
) -> Result<f64> {
    let ell = state.fluid_radius();
    let w = elasticity::opening(state, mat, ell, q)?;
    if !(w > opening_floor) {
        return Err(Error::OpeningFloor {
            radius: ell,
            opening: w,
            floor: opening_floor,
        });
    }
    let p = &state.pressures;
    let n = state.mesh.elements();
    let h = state.mesh.h();
    let dp = if n >= 2 {
        (3.0 * p[n] - 4.0 * p[n - 1] + p[n - 2]) / (2.0 * h)
    } else {
        (p[1] - p[0]) / h
    };
    let t = state.time;
    let s = src.eval(ell, t);
    let source_part = if s == 0.0 && src.eval_dr(ell, t) == 0.0 {
        0.0
    } else {
        let dw = elasticity::opening_slope(state, mat, ell, q)?;
        src.eval_dr(ell, t) / w - s * dw / (w * w)
    };
    let mu = fluid.viscosity;
    Ok(w * w / (12.0 * mu) * (-dp + mu / fluid.density * source_part))
}

/// (E′/η)(1 − K_Ic/K) when K > K_Ic, zero otherwise.
pub fn crack_front_velocity(sif: f64, mat: &MaterialParams) -> f64 {
    if sif > mat.toughness {
        mat.plane_strain_modulus / mat.numerical_viscosity * (1.0 - mat.toughness / sif)
    } else {
        0.0
    }
}

pub fn crack_front_update(a_prev: f64, sif: f64, mat: &MaterialParams, dt: f64) -> f64 {
    a_prev + dt * crack_front_velocity(sif, mat)
}

/// Root of `f` above `lo`, where `f(lo) < 0`. Steps upward with a doubling
/// increment until the sign changes, then shrinks the bracket by the Illinois
/// rule (bisecting when it stalls) until its width is at most `rel_tol`
/// relative or `|f| ≤ f_tol`. Returns the last point evaluated.
pub(crate) fn ascend_root<F>(
    lo: f64,
    f_lo: f64,
    first_step: f64,
    rel_tol: f64,
    f_tol: f64,
    max_evals: usize,
    mut f: F,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut fa) = (lo, f_lo);
    let mut step = first_step;
    let mut evals = 0;
    let (mut b, mut fb) = loop {
        if evals >= max_evals {
            return Err(Error::Divergence {
                loop_name: "outer",
                iterations: evals,
                change: step / (a + step),
            });
        }
        let x = a + step;
        let fx = f(x)?;
        evals += 1;
        if fx.abs() <= f_tol || (fx > 0.0 && x - a <= rel_tol * x) {
            return Ok(x);
        }
        if fx > 0.0 {
            break (x, fx);
        }
        a = x;
        fa = fx;
        step *= 2.0;
    };
    let mut side = 0i8;
    let mut stalls = 0;
    while evals < max_evals {
        let width = b - a;
        let secant = (a * fb - b * fa) / (fb - fa);
        let x = if stalls >= 2 || !(secant > a && secant < b) {
            stalls = 0;
            0.5 * (a + b)
        } else {
            secant
        };
        let fx = f(x)?;
        evals += 1;
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if b - a <= rel_tol * b {
            return Ok(x);
        }
        if b - a > 0.5 * width {
            stalls += 1;
        } else {
            stalls = 0;
        }
    }
    Err(Error::Divergence {
        loop_name: "outer",
        iterations: evals,
        change: (b - a) / b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat() -> MaterialParams {
        MaterialParams::new(4e10, 0.0, 5e5, 0.1, 0.0).unwrap()
    }

    #[test]
    fn gate_is_closed_up_to_toughness() {
        let m = mat();
        assert_eq!(crack_front_velocity(0.9 * 5e5, &m), 0.0);
        assert_eq!(crack_front_velocity(5e5, &m), 0.0);
        assert_eq!(crack_front_velocity(0.0, &m), 0.0);
    }

    #[test]
    fn velocity_at_twice_toughness() {
        assert_eq!(crack_front_velocity(1e6, &mat()), 2e11);
    }

    #[test]
    fn update_matches_direct_arithmetic() {
        let m = mat();
        let k = 5e5 * (1.0 + 1e-6);
        let da = crack_front_update(0.02, k, &m, 5e-7) - 0.02;
        let expect = 5e-7 * 4e10 / 0.1 * (1e-6 / (1.0 + 1e-6));
        assert!((da / expect - 1.0).abs() < 1e-8);
        assert_eq!(crack_front_update(0.02, 4e5, &m, 5e-7), 0.02);
    }

    #[test]
    fn root_of_a_cubic() {
        let f = |x: f64| Ok(x * x * x - 2.0);
        let r = ascend_root(0.5, -1.875, 0.01, 1e-12, 0.0, 200, f).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-11);
    }

    #[test]
    fn root_of_a_steep_function() {
        // slope jumps by nine orders of magnitude across the root
        let f = |x: f64| Ok(if x < 1.0 { 1e9 * (x - 1.0) } else { x - 1.0 });
        let r = ascend_root(0.5, f(0.5).unwrap(), 0.75, 1e-9, 0.0, 200, f).unwrap();
        assert!((r - 1.0).abs() < 2e-9, "{r}");
    }

    #[test]
    fn frozen_fronts_without_source_stay_put() {
        let m = mat();
        let fluid = FluidParams::new(0.89e-3, 1e3).unwrap();
        let src = SourceTerm::new(0.0, 32e-6, 2.0).unwrap();
        let q = QuadratureEngine::default();
        let s = State::initial(0.02, 0.01, 6, 1e6).unwrap();
        let l = fluid_front_advance(&s, &s, &m, &fluid, &src, 5e-7, 1e-12, &q).unwrap();
        assert_eq!(l, 0.01);
    }

    #[test]
    fn injection_pushes_front_out() {
        let m = mat();
        let fluid = FluidParams::new(0.89e-3, 1e3).unwrap();
        let src = SourceTerm::new(3e7, 32e-6, 2.0).unwrap();
        let q = QuadratureEngine::default();
        let s = State::initial(0.02, 0.01, 6, 1e6).unwrap();
        let mut trial = s.clone();
        trial.time = 5e-7;
        let l = fluid_front_advance(&s, &trial, &m, &fluid, &src, 5e-7, 1e-12, &q).unwrap();
        assert!(l > 0.01);
    }

    #[test]
    fn opening_floor_rejects_closed_front() {
        let m = mat();
        let fluid = FluidParams::new(0.89e-3, 1e3).unwrap();
        let src = SourceTerm::new(3e7, 32e-6, 2.0).unwrap();
        let q = QuadratureEngine::default();
        let s = State::initial(0.02, 0.01, 4, 0.0).unwrap();
        let err = fluid_front_advance(&s, &s, &m, &fluid, &src, 5e-7, 1e-12, &q).unwrap_err();
        assert!(matches!(err, Error::OpeningFloor { .. }));
    }

    #[test]
    fn gradient_form_vanishes_for_uniform_pressure() {
        let m = mat();
        let fluid = FluidParams::new(0.89e-3, 1e3).unwrap();
        let src = SourceTerm::new(0.0, 32e-6, 2.0).unwrap();
        let q = QuadratureEngine::default();
        let s = State::initial(0.02, 0.01, 6, 1e6).unwrap();
        assert_eq!(fluid_front_velocity_gradient_form(&s, &m, &fluid, &src, 1e-12, &q).unwrap(), 0.0);
    }

    #[test]
    fn gradient_form_on_linear_pressure() {
        let m = mat();
        let fluid = FluidParams::new(0.89e-3, 1e3).unwrap();
        let src = SourceTerm::new(0.0, 32e-6, 2.0).unwrap();
        let q = QuadratureEngine::default();
        let mut s = State::initial(0.02, 0.01, 5, 0.0).unwrap();
        let slope = -2e7;
        s.pressures = s.mesh.node_positions().iter().map(|r| 1e6 + slope * r).collect();
        let w = elasticity::opening(&s, &m, 0.01, &q).unwrap();
        let v = fluid_front_velocity_gradient_form(&s, &m, &fluid, &src, 1e-12, &q).unwrap();
        let expect = w * w / (12.0 * 0.89e-3) * -slope;
        assert!((v / expect - 1.0).abs() < 1e-9, "{v} {expect}");
    }
}
