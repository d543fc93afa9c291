//! Brute-force reference values.
//!
//! Nothing here touches the closed-form kernels or the production assembly:
//! the double integral for A is evaluated by nested tanh-sinh quadrature after
//! the substitutions y = z sin θ (inner) and z = r cosh u (outer), and the
//! lubrication matrices are assembled entry by entry from those values.

use std::f64::consts::{FRAC_PI_2, PI};

const T_MAX: f64 = 4.0;
const MIN_LEVEL: u32 = 1;
const MAX_LEVEL: u32 = 7;

/// ∫ f over `[lo, hi]` for a vector-valued `f` by tanh-sinh quadrature,
/// halving the step until every component settles to `tol` relative.
pub fn integrate_many<F: FnMut(f64, &mut [f64])>(lo: f64, hi: f64, dim: usize, tol: f64, mut f: F) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    if !(hi > lo) {
        return sum;
    }
    let d = 0.5 * (hi - lo);
    let mut buf = vec![0.0; dim];
    let mut add = |t: f64, sum: &mut [f64]| {
        let u = FRAC_PI_2 * t.sinh();
        let x = if u > 0.0 {
            hi - 2.0 * d / (1.0 + (2.0 * u).exp())
        } else {
            lo + 2.0 * d / (1.0 + (-2.0 * u).exp())
        };
        if !(x > lo && x < hi) {
            return;
        }
        let ch = u.cosh();
        let w = d * FRAC_PI_2 * t.cosh() / (ch * ch);
        buf.iter_mut().for_each(|v| *v = 0.0);
        f(x, &mut buf);
        for (s, b) in sum.iter_mut().zip(&buf) {
            *s += w * b;
        }
    };
    let mut h = 0.5;
    let kmax = (T_MAX / h).ceil() as i64;
    for k in -kmax..=kmax {
        add(k as f64 * h, &mut sum);
    }
    let mut prev: Vec<f64> = sum.iter().map(|s| s * h).collect();
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let kmax = (T_MAX / h).ceil() as i64;
        for k in (-kmax..=kmax).filter(|k| k % 2 != 0) {
            add(k as f64 * h, &mut sum);
        }
        let est: Vec<f64> = sum.iter().map(|s| s * h).collect();
        let scale = est.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let settled = est
            .iter()
            .zip(&prev)
            .all(|(e, p)| (e - p).abs() <= tol * e.abs() + 1e-15 * scale);
        prev = est;
        if level >= MIN_LEVEL && settled {
            break;
        }
    }
    prev
}

pub fn integrate<F: FnMut(f64) -> f64>(lo: f64, hi: f64, tol: f64, mut f: F) -> f64 {
    integrate_many(lo, hi, 1, tol, |x, out| out[0] = f(x))[0]
}

/// Integrates over consecutive pieces of `breaks`.
fn integrate_pieces<F: FnMut(f64, &mut [f64])>(breaks: &[f64], dim: usize, tol: f64, mut f: F) -> Vec<f64> {
    let mut total = vec![0.0; dim];
    for w in breaks.windows(2) {
        let part = integrate_many(w[0], w[1], dim, tol, &mut f);
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}

/// Uniform hat basis on `[0, ℓ]`.
#[derive(Debug, Clone, Copy)]
pub struct Hats {
    pub ell: f64,
    pub n: usize,
}

impl Hats {
    pub fn node(&self, j: usize) -> f64 {
        if j == self.n {
            self.ell
        } else {
            self.ell * j as f64 / self.n as f64
        }
    }

    fn h(&self) -> f64 {
        self.ell / self.n as f64
    }

    /// (ψ_k(y), ψ_k′(y)); ψ_N drops to zero beyond ℓ.
    pub fn hat(&self, k: usize, y: f64) -> (f64, f64) {
        if y < 0.0 || y > self.ell {
            return (0.0, 0.0);
        }
        let h = self.h();
        let x = (y - self.node(k)) / h;
        if x.abs() >= 1.0 {
            (0.0, 0.0)
        } else if x < 0.0 {
            (1.0 + x, 1.0 / h)
        } else {
            (1.0 - x, -1.0 / h)
        }
    }

    /// Hats that can be nonzero at y.
    fn active(&self, y: f64) -> std::ops::RangeInclusive<usize> {
        let e = ((y / self.h()).floor().max(0.0) as usize).min(self.n - 1);
        e..=(e + 1)
    }

    fn breaks_below(&self, z: f64) -> Vec<f64> {
        (1..=self.n).map(|j| self.node(j)).filter(|&c| c < z).collect()
    }
}

/// Nodal field Σ p_k ψ_k(y) on `[0, ℓ]`, with the value `beyond` past ℓ.
#[derive(Debug, Clone)]
pub struct Field {
    pub hats: Hats,
    pub values: Vec<f64>,
    pub beyond: f64,
}

impl Field {
    fn eval(&self, y: f64) -> (f64, f64) {
        if y > self.hats.ell {
            return (self.beyond, 0.0);
        }
        let mut v = (0.0, 0.0);
        for k in self.hats.active(y) {
            let (p, dp) = self.hats.hat(k, y);
            v.0 += self.values[k] * p;
            v.1 += self.values[k] * dp;
        }
        v
    }

    /// Interval outside which the field vanishes.
    fn support(&self) -> (f64, f64) {
        let hats = self.hats;
        let first = self.values.iter().position(|v| *v != 0.0);
        let last = self.values.iter().rposition(|v| *v != 0.0);
        let lo = match first {
            Some(k) if k > 0 => hats.node(k - 1),
            Some(_) => 0.0,
            None if self.beyond != 0.0 => hats.ell,
            None => return (0.0, 0.0),
        };
        let hi = match last {
            _ if self.beyond != 0.0 => f64::INFINITY,
            Some(k) if k < hats.n => hats.node(k + 1),
            _ => hats.ell,
        };
        (lo, hi)
    }

    fn jump(&self) -> f64 {
        self.values[self.hats.n] - self.beyond
    }
}

/// Reference quantities at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// A_k(r) per hat (empty unless requested).
    pub a_k: Vec<f64>,
    /// ∂A_k/∂ℓ per hat (empty unless requested).
    pub dl_k: Vec<f64>,
    /// ∫_r^a J_f(z)/√(z²−r²) dz for the field, without compliance.
    pub value: f64,
    /// Its r-derivative.
    pub slope: f64,
}

// Inner slots: [J_k]*(n+1), [∂ℓ regular J_k]*(n+1), J_f, J_f′ regular.
fn inner_all(field: &Field, z: f64, per_hat: bool, tol: f64) -> Vec<f64> {
    let hats = field.hats;
    let n1 = hats.n + 1;
    let off = if per_hat { 2 * n1 } else { 0 };
    let dim = off + 2;
    let (lo, hi) = if per_hat { (0.0, f64::INFINITY) } else { field.support() };
    if lo >= z {
        return vec![0.0; dim];
    }
    let mut breaks = vec![(lo / z).asin()];
    breaks.extend(
        hats.breaks_below(z)
            .into_iter()
            .filter(|&c| c > lo && c < hi)
            .map(|c| (c / z).asin()),
    );
    breaks.push(if hi < z { (hi / z).asin() } else { FRAC_PI_2 });
    let ell = hats.ell;
    integrate_pieces(&breaks, dim, tol, |th, out| {
        let (s, _) = th.sin_cos();
        let y = z * s;
        if per_hat && y <= ell {
            for k in hats.active(y) {
                let (p, dp) = hats.hat(k, y);
                out[k] = y * p;
                out[n1 + k] = y * (-y / ell) * dp;
            }
        }
        let (f, df) = field.eval(y);
        out[off] = y * f;
        out[off + 1] = s * f + y * s * df;
    })
}

/// ∫_ℓ^a dz / (√(z²−ℓ²) √(z²−r²)) for r < ℓ.
fn front_weight(ell: f64, r: f64, a: f64, tol: f64) -> f64 {
    let delta = ((ell - r) * (ell + r)).sqrt();
    let top = ((a - ell) * (a + ell)).sqrt() / delta;
    let q = delta / ell;
    integrate(0.0, top.asinh(), tol, |phi| 1.0 / (1.0 + (q * phi.sinh()).powi(2)).sqrt()) / ell
}

/// Reference values of the double integral and its r- and ℓ-derivatives.
pub fn sample(field: &Field, r: f64, a: f64, per_hat: bool, tol: f64) -> Sample {
    let hats = field.hats;
    let n1 = hats.n + 1;
    let off = if per_hat { 2 * n1 } else { 0 };
    let dim = off + 2;
    let (lo, hi) = if per_hat { (0.0, f64::INFINITY) } else { field.support() };
    let start = lo.max(r);
    let mut knots: Vec<f64> = (1..=hats.n)
        .map(|j| hats.node(j))
        .filter(|&c| c > start && c < a && c <= hi)
        .collect();
    let acc = if start >= a {
        vec![0.0; dim]
    } else if r > 0.0 {
        let mut breaks = vec![(start / r).acosh()];
        breaks.extend(knots.iter().map(|c| (c / r).acosh()));
        breaks.push((a / r).acosh());
        integrate_pieces(&breaks, dim, tol, |u, out| {
            let ch = u.cosh();
            let inner = inner_all(field, r * ch, per_hat, tol);
            out[..off + 1].copy_from_slice(&inner[..off + 1]);
            out[off + 1] = inner[off + 1] * ch;
        })
    } else {
        knots.insert(0, start);
        knots.push(a);
        integrate_pieces(&knots, dim, tol, |z, out| {
            let inner = inner_all(field, z, per_hat, tol);
            for (o, v) in out.iter_mut().zip(&inner).take(off + 1) {
                *o = v / z;
            }
        })
    };
    let ell = hats.ell;
    let weight = if r < ell { front_weight(ell, r, a, tol) } else { f64::NAN };
    let slope = if r > 0.0 {
        let ja = inner_all(field, a, false, tol)[0];
        let mut s = acc[off + 1] - ja * a / (r * ((a - r) * (a + r)).sqrt());
        if field.jump() != 0.0 {
            s -= ell * ell / r * field.jump() * weight;
        }
        s
    } else {
        0.0
    };
    let (a_k, dl_k) = if per_hat {
        let mut dl = acc[n1..2 * n1].to_vec();
        dl[hats.n] += ell * weight;
        (acc[..n1].to_vec(), dl)
    } else {
        (Vec::new(), Vec::new())
    };
    Sample {
        a_k,
        dl_k,
        value: acc[off],
        slope,
    }
}

/// A_k(r) for one hat.
pub fn influence(k: usize, r: f64, a: f64, hats: Hats, tol: f64) -> f64 {
    let mut values = vec![0.0; hats.n + 1];
    values[k] = 1.0;
    let field = Field {
        hats,
        values,
        beyond: 0.0,
    };
    sample(&field, r, a, false, tol).value
}

/// ∫₀^z y f(y)/√(z²−y²) dy of a field.
pub fn inner(field: &Field, z: f64, tol: f64) -> f64 {
    inner_all(field, z, false, tol)[0]
}

/// Parameters of the naive assembly.
#[derive(Debug, Clone)]
pub struct NaiveInput {
    pub hats: Hats,
    pub crack_radius: f64,
    pub a_rate: f64,
    pub l_rate: f64,
    pub prev_pressures: Vec<f64>,
    pub lagged_pressures: Vec<f64>,
    pub time: f64,
    pub dt: f64,
    pub modulus: f64,
    pub viscosity: f64,
    pub density: f64,
    /// (q₀, β, ω)
    pub source: (f64, f64, f64),
    pub include_dl: bool,
    /// ∂A_k/∂ℓ restricted to the front hat, J_N(ℓ)/√(ℓ²−r²).
    pub front_node_only: bool,
    pub include_dr: bool,
    pub pinned: bool,
}

#[derive(Debug, Clone)]
pub struct NaiveSystem {
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

/// Entry-by-entry assembly with zero far-field stress.
pub fn naive_assembly(inp: &NaiveInput, tol: f64) -> NaiveSystem {
    let hats = inp.hats;
    let n1 = hats.n + 1;
    let a = inp.crack_radius;
    let (q0, beta, omega) = inp.source;
    let ramp = 1.0 - (-omega * inp.time).exp();
    let s = |r: f64| q0 / (2.0 * PI) * (-r * r / beta).exp() * ramp;
    let ds = |r: f64| -2.0 * r / beta * s(r);
    let lagged = Field {
        hats,
        values: inp.lagged_pressures.clone(),
        beyond: 0.0,
    };
    let compliance = 8.0 / (PI * inp.modulus);
    let mut da_k = vec![0.0; n1];
    for (k, v) in da_k.iter_mut().enumerate() {
        let mut values = vec![0.0; n1];
        values[k] = 1.0;
        *v = inner(
            &Field {
                hats,
                values,
                beyond: 0.0,
            },
            a,
            tol,
        );
    }
    let front_inner = {
        let mut values = vec![0.0; n1];
        values[hats.n] = 1.0;
        inner(
            &Field {
                hats,
                values,
                beyond: 0.0,
            },
            hats.ell,
            tol,
        )
    };
    let mm = n1 * n1;
    // slots: S, Ta, Tl, P (n1² each), F, G, H (n1 each)
    let dim = 4 * mm + 3 * n1;
    let mut total = vec![0.0; dim];
    for e in 0..hats.n {
        let part = integrate_many(hats.node(e), hats.node(e + 1), dim, tol, |r, out| {
            let smp = sample(&lagged, r, a, true, tol);
            let w = compliance * smp.value;
            let dw = compliance * smp.slope;
            let root = ((a - r) * (a + r)).sqrt();
            let dl_k = if inp.front_node_only { vec![0.0; n1] } else { smp.dl_k.clone() };
            for i in 0..n1 {
                let (pi, dpi) = hats.hat(i, r);
                if pi == 0.0 && dpi == 0.0 {
                    continue;
                }
                for k in 0..n1 {
                    out[i * n1 + k] = pi * smp.a_k[k] * r;
                    out[mm + i * n1 + k] = pi * da_k[k] / root * r;
                    out[2 * mm + i * n1 + k] = pi * dl_k[k] * r;
                    let (_, dpk) = hats.hat(k, r);
                    out[3 * mm + i * n1 + k] = dpi * dpk * w * w * w * r;
                }
                out[4 * mm + i] = pi * s(r) * r;
                out[4 * mm + n1 + i] = dpi * w * w * ds(r) * r;
                out[4 * mm + 2 * n1 + i] = dpi * w * s(r) * dw * r;
            }
        });
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    if inp.front_node_only {
        // r = ℓ sin θ takes the 1/√(ℓ²−r²) endpoint root out of the column integral
        let ell = hats.ell;
        let cuts: Vec<f64> = (0..=hats.n).map(|e| (hats.node(e) / ell).min(1.0).asin()).collect();
        for i in 0..n1 {
            let mut col = 0.0;
            for e in 0..hats.n {
                col += integrate(cuts[e], cuts[e + 1], tol, |t| {
                    let r = ell * t.sin();
                    hats.hat(i, r).0 * r
                });
            }
            total[2 * mm + i * n1 + hats.n] = front_inner * col;
        }
    }
    let c = 96.0 * inp.viscosity / (PI * inp.modulus);
    let nu = inp.viscosity / inp.density;
    let mut matrix = vec![vec![0.0; n1]; n1];
    let mut rhs = vec![0.0; n1];
    for i in 0..n1 {
        for k in 0..n1 {
            let sik = total[i * n1 + k];
            let ta = total[mm + i * n1 + k];
            let tl = if inp.include_dl { total[2 * mm + i * n1 + k] } else { 0.0 };
            matrix[i][k] = c * (sik / inp.dt + inp.a_rate * ta + inp.l_rate * tl) + total[3 * mm + i * n1 + k];
            rhs[i] += c * sik / inp.dt * inp.prev_pressures[k];
        }
        let h = if inp.include_dr { total[4 * mm + 2 * n1 + i] } else { 0.0 };
        rhs[i] += 12.0 * nu * total[4 * mm + i] + nu * (total[4 * mm + n1 + i] - h);
    }
    if inp.pinned {
        let scale = (0..hats.n).map(|i| matrix[i][i].abs()).fold(0.0, f64::max);
        matrix[hats.n] = vec![0.0; n1];
        matrix[hats.n][hats.n] = scale;
        rhs[hats.n] = 0.0;
    }
    NaiveSystem { matrix, rhs }
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot = &top[col];
        for (i, row) in rest.iter_mut().enumerate() {
            let f = row[col] / pivot[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * p;
            }
            b[col + 1 + i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    x
}

/// Mass-balance front position from reference openings: the new fluid
/// radius when the trial field has front `trial.hats.ell`.
#[allow(clippy::too_many_arguments)]
pub fn front_advance(
    prev: &Field,
    prev_crack: f64,
    trial: &Field,
    trial_crack: f64,
    time: f64,
    dt: f64,
    modulus: f64,
    density: f64,
    source: (f64, f64, f64),
    tol: f64,
) -> f64 {
    let compliance = 8.0 / (PI * modulus);
    let ell = trial.hats.ell;
    let (q0, beta, omega) = source;
    let ramp = 1.0 - (-omega * time).exp();
    let s = |r: f64| q0 / (2.0 * PI) * (-r * r / beta).exp() * ramp;
    let opening = |f: &Field, crack: f64, r: f64| {
        if r >= crack {
            0.0
        } else {
            compliance * sample(f, r, crack, false, tol).value
        }
    };
    let mut breaks: Vec<f64> = (0..=trial.hats.n).map(|j| trial.hats.node(j)).collect();
    breaks.extend((1..prev.hats.n).map(|j| prev.hats.node(j)).filter(|&c| c < ell));
    if prev.hats.ell < ell {
        breaks.push(prev.hats.ell);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let net = integrate_pieces(&breaks, 1, tol, |r, out| {
        let dw = opening(trial, trial_crack, r) - opening(prev, prev_crack, r);
        out[0] = (s(r) - density * dw / dt) * r;
    })[0];
    let w_front = opening(trial, trial_crack, ell);
    prev.hats.ell + dt * net / (ell * density * w_front)
}
