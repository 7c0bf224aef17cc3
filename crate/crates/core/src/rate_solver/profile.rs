use std::f64::consts::PI;

/// Radial function on `M + 1` uniform nodes `0, dr, ..., r_max` with `psi_M = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub r_max: f64,
    pub values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(r_max: f64, values: Vec<f64>) -> Self {
        assert!(values.len() >= 3 && r_max > 0.0);
        Self { r_max, values }
    }

    /// Profile from a closure on a grid of `m` intervals; the last node is forced to 0.
    pub fn from_fn(r_max: f64, m: usize, f: impl Fn(f64) -> f64) -> Self {
        let dr = r_max / m as f64;
        let mut values: Vec<f64> = (0..=m).map(|j| f(j as f64 * dr)).collect();
        values[m] = 0.0;
        Self { r_max, values }
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.intervals() as f64
    }

    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        let dr = self.dr();
        (0..self.values.len()).map(move |j| j as f64 * dr)
    }

    /// Trapezoid weights `2 pi r_j dr`.
    pub fn weights(&self) -> Vec<f64> {
        weights(self.intervals(), self.dr())
    }

    /// `sum w_j psi_j^2`.
    pub fn mass(&self) -> f64 {
        self.integrate(|p| p * p)
    }

    /// `sum w_j (1 - exp(-psi_j^2))`.
    pub fn area(&self) -> f64 {
        self.integrate(|p| -(-p * p).exp_m1())
    }

    /// `sum w_j psi_j^4`.
    pub fn quartic(&self) -> f64 {
        self.integrate(|p| p.powi(4))
    }

    /// Discrete Dirichlet energy with cell-centred gradients.
    pub fn energy(&self) -> f64 {
        let a = stiffness(self.intervals());
        self.values
            .windows(2)
            .zip(&a)
            .map(|(w, a)| a * (w[1] - w[0]).powi(2))
            .sum()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weights().iter().zip(&self.values).map(|(w, &p)| w * f(p)).sum()
    }

    /// Largest increase `psi_{j+1} - psi_j` (nonpositive for a nonincreasing profile).
    pub fn max_increase(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_nonincreasing(&self, tol: f64) -> bool {
        self.max_increase() <= tol
    }

    /// Mass carried by the two nodes next to the outer boundary.
    pub fn boundary_mass(&self) -> f64 {
        let w = self.weights();
        let m = self.intervals();
        (m - 2..m).map(|j| w[j] * self.values[j].powi(2)).sum()
    }
}

pub(crate) fn weights(m: usize, dr: f64) -> Vec<f64> {
    (0..=m).map(|j| 2.0 * PI * j as f64 * dr * dr).collect()
}

/// Coefficients `a_j = 2 pi r_{j+1/2} / dr` of the energy `sum a_j (psi_{j+1} - psi_j)^2`.
pub(crate) fn stiffness(m: usize) -> Vec<f64> {
    (0..m).map(|j| 2.0 * PI * (j as f64 + 0.5)).collect()
}
