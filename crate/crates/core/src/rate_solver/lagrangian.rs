//! Augmented-Lagrangian minimisation of the discrete radial Dirichlet energy
//! under two nodal equality constraints `sum w_j f(psi_j) = target`.
//!
//! The inner problem is solved by damped Newton. Its Hessian is tridiagonal
//! plus the rank-2 penalty term, so each step costs O(M) via Woodbury.

use super::profile::{stiffness, weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NodeTerm {
    Square,
    Area,
    Quartic,
}

impl NodeTerm {
    /// `(f, f', f'')` at `x`.
    #[inline]
    pub(crate) fn eval(self, x: f64) -> (f64, f64, f64) {
        match self {
            NodeTerm::Square => (x * x, 2.0 * x, 2.0),
            NodeTerm::Area => {
                let e = (-x * x).exp();
                (-(-x * x).exp_m1(), 2.0 * x * e, (2.0 - 4.0 * x * x) * e)
            }
            NodeTerm::Quartic => (x.powi(4), 4.0 * x.powi(3), 12.0 * x * x),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Problem {
    pub m: usize,
    pub dr: f64,
    pub terms: [(NodeTerm, f64); 2],
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Settings {
    pub tol_constraint: f64,
    pub tol_gradient: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub mu0: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    /// Nodes `0..=M` with the boundary zero appended.
    pub values: Vec<f64>,
    pub energy: f64,
    pub residuals: [f64; 2],
    pub kkt: f64,
    pub converged: bool,
}

struct Workspace {
    w: Vec<f64>,
    // mass-lumped weights for dual norms and shifts (w_0 would be 0)
    w_norm: Vec<f64>,
    a: Vec<f64>,
}

impl Problem {
    fn workspace(&self) -> Workspace {
        let w_full = weights(self.m, self.dr);
        let w: Vec<f64> = w_full[..self.m].to_vec();
        let floor = std::f64::consts::PI * self.dr * self.dr / 4.0;
        let w_norm = w.iter().map(|&v| v.max(floor)).collect();
        Workspace {
            w,
            w_norm,
            a: stiffness(self.m),
        }
    }

    fn energy(&self, ws: &Workspace, x: &[f64]) -> f64 {
        let m = self.m;
        let mut e = 0.0;
        for j in 0..m {
            let next = if j + 1 < m { x[j + 1] } else { 0.0 };
            e += ws.a[j] * (next - x[j]).powi(2);
        }
        e
    }

    fn energy_grad(&self, ws: &Workspace, x: &[f64], g: &mut [f64]) {
        let m = self.m;
        g.fill(0.0);
        for j in 0..m {
            let next = if j + 1 < m { x[j + 1] } else { 0.0 };
            let d = 2.0 * ws.a[j] * (next - x[j]);
            g[j] -= d;
            if j + 1 < m {
                g[j + 1] += d;
            }
        }
    }

    fn constraint(&self, ws: &Workspace, i: usize, x: &[f64]) -> f64 {
        let (term, target) = self.terms[i];
        x.iter()
            .zip(&ws.w)
            .map(|(&v, w)| w * term.eval(v).0)
            .sum::<f64>()
            - target
    }

    fn merit(&self, ws: &Workspace, x: &[f64], lam: [f64; 2], mu: f64) -> f64 {
        let mut l = self.energy(ws, x);
        for (i, &li) in lam.iter().enumerate() {
            let c = self.constraint(ws, i, x);
            l += -li * c + 0.5 * mu * c * c;
        }
        l
    }

    fn dual_norm(ws: &Workspace, g: &[f64]) -> f64 {
        g.iter().zip(&ws.w_norm).map(|(g, w)| g * g / w).sum::<f64>().sqrt()
    }

    /// Run the augmented-Lagrangian schedule from `x0` (nodes `0..M`).
    pub fn solve(&self, x0: &[f64], s: &Settings) -> Outcome {
        let ws = self.workspace();
        let m = self.m;
        let mut x = x0[..m].to_vec();
        let mut lam = [0.0; 2];
        let mut mu = s.mu0;
        let mut prev_viol = f64::INFINITY;
        let mut g = vec![0.0; m];
        let mut kkt = f64::INFINITY;
        let mut converged = false;
        for _ in 0..s.max_outer {
            let scale = self.energy(&ws, &x).max(1.0);
            let inner_tol = 0.1 * s.tol_gradient * scale;
            self.newton(&ws, &mut x, lam, mu, inner_tol, s.max_inner);
            let c = [self.constraint(&ws, 0, &x), self.constraint(&ws, 1, &x)];
            for i in 0..2 {
                lam[i] -= mu * c[i];
            }
            // KKT residual with the updated multipliers equals the inner gradient
            self.lagrangian_grad(&ws, &x, lam, 0.0, &mut g);
            kkt = Self::dual_norm(&ws, &g) / self.energy(&ws, &x).max(1.0);
            let viol = c[0].abs().max(c[1].abs());
            if viol <= s.tol_constraint && kkt <= s.tol_gradient {
                converged = true;
                break;
            }
            if viol > 0.25 * prev_viol {
                mu = (mu * 10.0).min(1e12);
            }
            prev_viol = viol;
        }
        let residuals = [self.constraint(&ws, 0, &x), self.constraint(&ws, 1, &x)];
        let energy = self.energy(&ws, &x);
        let mut values = x;
        values.push(0.0);
        Outcome {
            values,
            energy,
            residuals,
            kkt,
            converged,
        }
    }

    /// Gradient of `E - sum lam_i c_i + mu/2 sum c_i^2`.
    fn lagrangian_grad(&self, ws: &Workspace, x: &[f64], lam: [f64; 2], mu: f64, g: &mut [f64]) {
        self.energy_grad(ws, x, g);
        for i in 0..2 {
            let coef = mu * self.constraint(ws, i, x) - lam[i];
            let term = self.terms[i].0;
            for j in 0..self.m {
                g[j] += coef * ws.w[j] * term.eval(x[j]).1;
            }
        }
    }

    fn newton(&self, ws: &Workspace, x: &mut Vec<f64>, lam: [f64; 2], mu: f64, tol: f64, max_iter: usize) {
        let m = self.m;
        let mut g = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m.saturating_sub(1)];
        let mut u = [vec![0.0; m], vec![0.0; m]];
        let mut trial = vec![0.0; m];
        let mut shift = 0.0f64;
        for _ in 0..max_iter {
            self.lagrangian_grad(ws, x, lam, mu, &mut g);
            if Self::dual_norm(ws, &g) <= tol {
                return;
            }
            for j in 0..m {
                diag[j] = 2.0 * (ws.a[j] + if j > 0 { ws.a[j - 1] } else { 0.0 });
            }
            for j in 0..m.saturating_sub(1) {
                off[j] = -2.0 * ws.a[j];
            }
            for i in 0..2 {
                let c = self.constraint(ws, i, x);
                let coef = mu * c - lam[i];
                let term = self.terms[i].0;
                let root = mu.sqrt();
                for j in 0..m {
                    let (_, f1, f2) = term.eval(x[j]);
                    diag[j] += coef * ws.w[j] * f2;
                    u[i][j] = root * ws.w[j] * f1;
                }
            }
            // Levenberg shift until the tridiagonal part is positive definite.
            let max_diag = diag.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            shift *= 0.1;
            let dir = loop {
                let shifted: Vec<f64> = diag
                    .iter()
                    .zip(&ws.w_norm)
                    .map(|(d, w)| d + shift * w)
                    .collect();
                if let Some(fact) = Tridiag::factor(&shifted, &off) {
                    break fact.solve_woodbury(&u, &g);
                }
                shift = (shift * 10.0).max(1e-10 * max_diag / ws.w_norm[m - 1]);
            };
            let slope: f64 = g.iter().zip(&dir).map(|(g, d)| -g * d).sum();
            let l0 = self.merit(ws, x, lam, mu);
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                for j in 0..m {
                    trial[j] = x[j] - alpha * dir[j];
                }
                let l1 = self.merit(ws, &trial, lam, mu);
                if l1 <= l0 + 1e-4 * alpha * slope || (l1 - l0).abs() <= 1e-15 * l0.abs() {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                return;
            }
            x.copy_from_slice(&trial);
        }
    }
}

/// LDL^T factorisation of a symmetric tridiagonal matrix.
struct Tridiag {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl Tridiag {
    fn factor(diag: &[f64], off: &[f64]) -> Option<Self> {
        let n = diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = diag[0];
        if d[0] <= 0.0 {
            return None;
        }
        for j in 1..n {
            l[j - 1] = off[j - 1] / d[j - 1];
            d[j] = diag[j] - l[j - 1] * off[j - 1];
            if d[j] <= 1e-14 * diag[j].abs() || d[j] <= 0.0 {
                return None;
            }
        }
        Some(Self { d, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut y = b.to_vec();
        for j in 1..n {
            y[j] -= self.l[j - 1] * y[j - 1];
        }
        for j in 0..n {
            y[j] /= self.d[j];
        }
        for j in (0..n - 1).rev() {
            y[j] -= self.l[j] * y[j + 1];
        }
        y
    }

    /// Solve `(T + u0 u0^T + u1 u1^T) x = b`.
    fn solve_woodbury(&self, u: &[Vec<f64>; 2], b: &[f64]) -> Vec<f64> {
        let y = self.solve(b);
        let z = [self.solve(&u[0]), self.solve(&u[1])];
        let dot = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(a, b)| a * b).sum::<f64>();
        let s00 = 1.0 + dot(&u[0], &z[0]);
        let s01 = dot(&u[0], &z[1]);
        let s10 = dot(&u[1], &z[0]);
        let s11 = 1.0 + dot(&u[1], &z[1]);
        let r0 = dot(&u[0], &y);
        let r1 = dot(&u[1], &y);
        let det = s00 * s11 - s01 * s10;
        let c0 = (s11 * r0 - s01 * r1) / det;
        let c1 = (s00 * r1 - s10 * r0) / det;
        y.iter()
            .zip(z[0].iter().zip(&z[1]))
            .map(|(y, (z0, z1))| y - c0 * z0 - c1 * z1)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn woodbury_matches_dense_solve() {
        let n = 6;
        let diag = [4.0, 5.0, 3.0, 6.0, 4.5, 5.5];
        let off = [-1.0, 0.5, -0.7, 1.2, -0.3];
        let u = [vec![0.3, -0.2, 0.9, 0.1, 0.0, 0.4], vec![1.0, 0.2, -0.5, 0.3, 0.8, -0.1]];
        let b = [1.0, -2.0, 0.5, 3.0, -1.0, 0.25];
        let x = Tridiag::factor(&diag, &off).unwrap().solve_woodbury(&u, &b);
        for i in 0..n {
            let mut row = diag[i] * x[i];
            if i > 0 {
                row += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                row += off[i] * x[i + 1];
            }
            for k in 0..2 {
                row += u[k][i] * u[k].iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
            }
            assert!((row - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn factor_rejects_indefinite() {
        assert!(Tridiag::factor(&[1.0, 1.0], &[2.0]).is_none());
    }
}
