//! Independent reference solvers for the radial variational problems.
//!
//! Both constraints are removed analytically: the L2 constraint by
//! normalisation and the second constraint by dilation, which preserves the L2
//! norm, scales the energy by `s = lambda^2` and changes the footprint. What is
//! left is an unconstrained minimisation over shapes, run as a gradient flow
//! preconditioned by the H1 inner product on a uniform grid.

use std::f64::consts::PI;

pub struct Grid {
    pub m: usize,
    pub r: f64,
    w: Vec<f64>,
    a: Vec<f64>,
    w_norm: Vec<f64>,
}

impl Grid {
    pub fn new(m: usize, r: f64) -> Self {
        let dr = r / m as f64;
        let w: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 * dr * dr).collect();
        let w_norm = w.iter().map(|&v| v.max(PI * dr * dr / 4.0)).collect();
        let a = (0..m).map(|j| 2.0 * PI * (j as f64 + 0.5)).collect();
        Self { m, r, w, a, w_norm }
    }

    fn energy(&self, x: &[f64]) -> f64 {
        (0..self.m)
            .map(|j| {
                let next = if j + 1 < self.m { x[j + 1] } else { 0.0 };
                self.a[j] * (next - x[j]).powi(2)
            })
            .sum()
    }

    fn energy_grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.m];
        for j in 0..self.m {
            let next = if j + 1 < self.m { x[j + 1] } else { 0.0 };
            let d = 2.0 * self.a[j] * (next - x[j]);
            g[j] -= d;
            if j + 1 < self.m {
                g[j + 1] += d;
            }
        }
        g
    }

    fn mass(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.w).map(|(v, w)| w * v * v).sum()
    }

    fn normalized(&self, x: &[f64]) -> Vec<f64> {
        let s = self.mass(x).sqrt();
        x.iter().map(|v| v / s).collect()
    }

    /// Solve `(2K + W) p = g` (Thomas algorithm).
    fn precondition(&self, g: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut diag: Vec<f64> = (0..m)
            .map(|j| 2.0 * (self.a[j] + if j > 0 { self.a[j - 1] } else { 0.0 }) + self.w_norm[j])
            .collect();
        let off: Vec<f64> = (0..m - 1).map(|j| -2.0 * self.a[j]).collect();
        let mut rhs = g.to_vec();
        for j in 1..m {
            let f = off[j - 1] / diag[j - 1];
            diag[j] -= f * off[j - 1];
            rhs[j] -= f * rhs[j - 1];
        }
        let mut p = vec![0.0; m];
        p[m - 1] = rhs[m - 1] / diag[m - 1];
        for j in (0..m - 1).rev() {
            p[j] = (rhs[j] - off[j] * p[j + 1]) / diag[j];
        }
        p
    }

    /// Minimise a scale-free objective `f(normalised shape) -> (value, gradient)`.
    fn flow(&self, mut x: Vec<f64>, f: impl Fn(&[f64]) -> (f64, Vec<f64>), iters: usize) -> (f64, Vec<f64>) {
        x = self.normalized(&x);
        let (mut val, mut grad) = f(&x);
        let mut step = 1e-2;
        for _ in 0..iters {
            // gradient of the degree-0 extension x -> f(x / |x|)
            let gx: f64 = grad.iter().zip(&x).map(|(g, x)| g * x).sum();
            let tangent: Vec<f64> = (0..self.m).map(|j| grad[j] - gx * self.w[j] * x[j]).collect();
            let dir = self.precondition(&tangent);
            let mut accepted = false;
            for _ in 0..40 {
                let trial: Vec<f64> = x.iter().zip(&dir).map(|(x, d)| x - step * d).collect();
                let trial = self.normalized(&trial);
                let (tv, tg) = f(&trial);
                if tv < val {
                    x = trial;
                    val = tv;
                    grad = tg;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.3;
            }
            if !accepted {
                break;
            }
        }
        (val, x)
    }

    /// `chi(u)` for `0 < u < 1`.
    pub fn chi(&self, u: f64, iters: usize) -> f64 {
        let start: Vec<f64> = (0..self.m)
            .map(|j| {
                let r = j as f64 * self.r / self.m as f64;
                (-r * r / 2.0).exp()
            })
            .collect();
        self.flow(start, |x| self.dilated(x, u), iters).0
    }

    /// Value and gradient of `s(x) E(x)` where the dilation `s` puts the footprint at `u`.
    fn dilated(&self, x: &[f64], u: f64) -> (f64, Vec<f64>) {
        let footprint = |s: f64| {
            x.iter()
                .zip(&self.w)
                .map(|(v, w)| -w * (-s * v * v).exp_m1())
                .sum::<f64>()
                / s
        };
        // footprint(s) decreases from mass = 1 to 0
        let (mut lo, mut hi) = (1e-12, 1.0);
        while footprint(hi) > u {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if footprint(mid) > u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo - 1.0 < 1e-15 {
                break;
            }
        }
        let s = 0.5 * (lo + hi);
        let e = self.energy(x);
        let ge = self.energy_grad(x);
        let dg_ds: f64 = x
            .iter()
            .zip(&self.w)
            .map(|(v, w)| w * v * v * (-s * v * v).exp())
            .sum::<f64>()
            - u;
        let grad = (0..self.m)
            .map(|j| {
                let dg_dx = 2.0 * self.w[j] * s * x[j] * (-s * x[j] * x[j]).exp();
                let ds_dx = -dg_dx / dg_ds;
                e * ds_dx + s * ge[j]
            })
            .collect();
        (s * e, grad)
    }

    /// `mu_2 = inf E(x) / sum w x^4` over unit-mass shapes.
    pub fn mu2(&self, iters: usize) -> f64 {
        let start: Vec<f64> = (0..self.m)
            .map(|j| {
                let r = j as f64 * self.r / self.m as f64;
                (-r * r / 2.0).exp()
            })
            .collect();
        let f = |x: &[f64]| {
            let e = self.energy(x);
            let q: f64 = x.iter().zip(&self.w).map(|(v, w)| w * v.powi(4)).sum();
            let ge = self.energy_grad(x);
            let grad = (0..self.m)
                .map(|j| ge[j] / q - e / (q * q) * 4.0 * self.w[j] * x[j].powi(3))
                .collect();
            (e / q, grad)
        };
        self.flow(start, f, iters).0
    }
}

/// `|Q|_2^2 / 2` for the ground state of `Q'' + Q'/r - Q + Q^3 = 0`, found by
/// shooting on `Q(0)`; this equals `mu_2` through the sharp
/// Gagliardo-Nirenberg inequality.
pub fn townes_half_mass() -> f64 {
    let integrate = |q0: f64, keep: bool| -> (i32, f64) {
        // returns (+1 if Q overshoots below 0, -1 if it turns back up), and the mass
        let h = 1e-4;
        let (mut r, mut q, mut p) = (1e-8, q0, 0.0);
        let mut mass = 0.0;
        let rhs = |r: f64, q: f64, p: f64| (p, -p / r + q - q * q * q);
        while r < 12.0 {
            let (k1q, k1p) = rhs(r, q, p);
            let (k2q, k2p) = rhs(r + h / 2.0, q + h / 2.0 * k1q, p + h / 2.0 * k1p);
            let (k3q, k3p) = rhs(r + h / 2.0, q + h / 2.0 * k2q, p + h / 2.0 * k2p);
            let (k4q, k4p) = rhs(r + h, q + h * k3q, p + h * k3p);
            q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            r += h;
            if keep {
                mass += 2.0 * PI * r * q * q * h;
            }
            if q < 0.0 {
                return (1, mass);
            }
            if p > 0.0 {
                return (-1, mass);
            }
        }
        (0, mass)
    };
    let (mut lo, mut hi) = (2.0, 2.5);
    for _ in 0..48 {
        let mid = 0.5 * (lo + hi);
        if integrate(mid, false).0 > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // integrate until the trajectory peels off, the tail beyond is negligible
    integrate(0.5 * (lo + hi), true).1 / 2.0
}
