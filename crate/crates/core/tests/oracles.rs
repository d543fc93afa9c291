//! Production kernels, opening, SIF, remeshing and front advance against
//! the brute-force references.

use pennyfrac::config::RunConfig;
use pennyfrac::elasticity::{opening, sif};
use pennyfrac::front::fluid_front_advance;
use pennyfrac::kernels::{influence_A, influence_dA_da, influence_dA_dl, influence_dA_dr};
use pennyfrac::model::{remesh_transfer, DlForm, MaterialParams, RadialMesh, SifPrefactor, State};
use pennyfrac::quadrature::QuadratureEngine;
use pennyfrac::validation::acceptance;
use pennyfrac::validation::oracle::{self, Field, Hats};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn engine() -> QuadratureEngine {
    QuadratureEngine::default()
}

fn hat_field(hats: Hats, k: usize) -> Field {
    let mut values = vec![0.0; hats.n + 1];
    values[k] = 1.0;
    Field {
        hats,
        values,
        beyond: 0.0,
    }
}

#[test]
fn influence_at_benchmark_point() {
    let mesh = RadialMesh::new(0.01, 10).unwrap();
    let v = influence_A(5, 0.003, 0.02, &mesh, &engine()).unwrap();
    let reference = oracle::influence(5, 0.003, 0.02, Hats { ell: 0.01, n: 10 }, TOL);
    assert!((v / reference - 1.0).abs() < 1e-6, "{v} {reference}");
}

#[test]
fn crack_derivative_at_pinned_point() {
    let ell = 0.01;
    let mesh = RadialMesh::new(ell, 10).unwrap();
    let hats = Hats { ell, n: 10 };
    let (a, r) = (2.0 * ell, 0.5 * ell);
    let v = influence_dA_da(3, r, a, &mesh).unwrap();
    let reference = oracle::inner(&hat_field(hats, 3), a, TOL) / ((a - r) * (a + r)).sqrt();
    assert!((v / reference - 1.0).abs() < 1e-9, "{v} {reference}");
}

#[test]
fn front_and_radial_derivatives_match_references() {
    let (ell, a, n) = (0.01, 0.017, 6);
    let mesh = RadialMesh::new(ell, n).unwrap();
    let hats = Hats { ell, n };
    let q = engine();
    for r in [0.0013, 0.0047, 0.0081, 0.0099] {
        let field = Field {
            hats,
            values: vec![0.0; n + 1],
            beyond: 0.0,
        };
        let smp = oracle::sample(&field, r, a, true, TOL);
        for k in 0..=n {
            let dl = influence_dA_dl(k, r, a, &mesh, &q, DlForm::Exact).unwrap();
            let scale = smp.dl_k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!((dl - smp.dl_k[k]).abs() < 1e-8 * scale, "r={r} k={k}: {dl} {}", smp.dl_k[k]);
            let dr = influence_dA_dr(k, r, a, &mesh, &q).unwrap();
            let single = oracle::sample(&hat_field(hats, k), r, a, false, TOL);
            assert!((dr - single.slope).abs() < 1e-8 * single.slope.abs().max(1.0), "r={r} k={k}: {dr} {}", single.slope);
        }
    }
}

#[test]
fn benchmark_opening_at_the_axis() {
    let cfg = RunConfig::benchmark();
    let s = cfg.initial_state().unwrap();
    let w = opening(&s, &cfg.material, 0.0, &engine()).unwrap();
    let field = Field {
        hats: Hats { ell: 0.01, n: 10 },
        values: vec![1e6; 11],
        beyond: 0.0,
    };
    let reference = cfg.material.compliance() * oracle::sample(&field, 0.0, 0.02, false, TOL).value;
    assert!((w / reference - 1.0).abs() < 1e-6, "{w} {reference}");
}

#[test]
fn triangular_pressure_sif() {
    let a = 0.02;
    let n = 8;
    let mesh = RadialMesh::new(a, n).unwrap();
    let p0 = 2e6;
    let p: Vec<f64> = mesh.node_positions().iter().map(|r| p0 * (1.0 - r / a)).collect();
    let s = State::new(0.0, a, mesh, p).unwrap();
    let m = MaterialParams::new(4e10, 0.0, 5e5, 0.1, 0.0).unwrap();
    let k = sif(&s, &m, SifPrefactor::PiSqrtA).unwrap();
    // r = a sin θ removes the endpoint root
    let integral = oracle::integrate(0.0, std::f64::consts::FRAC_PI_2, 1e-14, |t| {
        let r = a * t.sin();
        r * p0 * (1.0 - r / a)
    });
    let reference = 2.0 / (std::f64::consts::PI * a.sqrt()) * integral;
    assert!((k / reference - 1.0).abs() < 1e-8, "{k} {reference}");
}

#[test]
fn remesh_matches_direct_interpolation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ell = 0.01;
    let mesh = RadialMesh::new(ell, 8).unwrap();
    let p: Vec<f64> = (0..9).map(|_| rng.gen_range(-1e6..1e6)).collect();
    let s = State::new(0.0, 0.02, mesh, p.clone()).unwrap();
    let moved = remesh_transfer(&s, 1.05 * ell).unwrap();
    let h = ell / 8.0;
    for (j, r) in moved.mesh.node_positions().into_iter().enumerate() {
        let expect = if r >= ell {
            p[8]
        } else {
            let e = (r / h).floor() as usize;
            let x = r / h - e as f64;
            p[e] + x * (p[e + 1] - p[e])
        };
        assert!((moved.pressures[j] - expect).abs() <= 1e-9 * expect.abs().max(1.0), "node {j}");
    }
}

#[test]
fn first_step_front_advance() {
    let cfg = RunConfig::benchmark();
    let p = cfg.problem();
    let prev = cfg.initial_state().unwrap();
    let mut trial = remesh_transfer(&prev, 0.0101).unwrap();
    trial.time = p.settings.dt;
    trial.pressures = trial.mesh.node_positions().iter().map(|r| 1e6 * (1.0 - 0.2 * (r / 0.0101).powi(2))).collect();
    let q = engine();
    let ell = fluid_front_advance(&prev, &trial, &p.material, &p.fluid, &p.source, p.settings.dt, p.settings.opening_floor, &q)
        .unwrap();
    let field = |s: &State| Field {
        hats: Hats {
            ell: s.fluid_radius(),
            n: s.mesh.elements(),
        },
        values: s.pressures.clone(),
        beyond: 0.0,
    };
    let reference = oracle::front_advance(
        &field(&prev),
        prev.crack_radius,
        &field(&trial),
        trial.crack_radius,
        trial.time,
        p.settings.dt,
        p.material.plane_strain_modulus,
        p.fluid.density,
        (p.source.amplitude, p.source.radial_decay, p.source.ramp_rate),
        TOL,
    );
    assert!(((ell - prev.fluid_radius()) / (reference - prev.fluid_radius()) - 1.0).abs() < 1e-8, "{ell} {reference}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn influence_is_nonnegative(n in 2usize..16, kx in 0.0f64..1.0, x in 0.0f64..1.0, ratio in 1.0f64..2.5) {
        let ell = 0.01;
        let a = ell * ratio;
        let mesh = RadialMesh::new(ell, n).unwrap();
        let k = ((n + 1) as f64 * kx) as usize;
        let v = influence_A(k.min(n), x * a, a, &mesh, &engine()).unwrap();
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn influence_is_continuous_across_nodes(n in 2usize..16, j in 1usize..16, k in 0usize..16, ratio in 1.0f64..2.5) {
        let ell = 0.01;
        let a = ell * ratio;
        let mesh = RadialMesh::new(ell, n).unwrap();
        let (j, k) = (j.min(n), k.min(n));
        let c = mesh.node(j);
        prop_assume!(c < a);
        let q = engine();
        let below = influence_A(k, c - 1e-12, a, &mesh, &q).unwrap();
        let above = influence_A(k, c + 1e-12, a, &mesh, &q).unwrap();
        prop_assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn hats_sum_to_the_ellipse_without_lag(n in 2usize..16, x in 0.0f64..1.0) {
        let a = 0.01;
        let mesh = RadialMesh::new(a, n).unwrap();
        let r = x * a;
        let q = engine();
        let total: f64 = (0..=n).map(|k| influence_A(k, r, a, &mesh, &q).unwrap()).sum();
        prop_assert!((total - ((a - r) * (a + r)).sqrt()).abs() < 1e-12 * a);
    }
}

#[test]
fn exact_length_derivative_assembly() {
    let [m, b, _] = acceptance::assembly_errors(DlForm::Exact).unwrap();
    assert!(m <= acceptance::ASSEMBLY_REL_TOL && b <= acceptance::ASSEMBLY_REL_TOL, "{m} {b}");
}
