//! Small numerical helpers: Gauss-Legendre rules, the exponential integral
//! E1, and golden-section minimization.

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            // x*x - 1 vanishes in the derivative formula for the trivial rule.
            nodes[0] = 0.0;
            weights[0] = 2.0;
            break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed-order Gauss-Legendre rule mapped onto arbitrary panels.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0.
pub fn exp_integral_e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    assert!(x > 0.0, "E1 needs x > 0");
    if x <= 1.0 {
        // Power series: -gamma - ln x - sum (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        -EULER - x.ln() - sum
    } else {
        // Modified Lentz continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Golden-section search for the minimum of a unimodal function on [a, b].
pub fn golden_section<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, tol: f64, mut f: F) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for order in [1, 2, 5, 8, 16] {
            let rule = GaussRule::new(order);
            for deg in 0..(2 * order) {
                let exact = (2f64.powi(deg as i32 + 1) - 0.0) / (deg as f64 + 1.0);
                let got = rule.integrate(0.0, 2.0, |x| x.powi(deg as i32));
                assert!((got - exact).abs() < 1e-11 * exact.max(1.0), "order {order} deg {deg}");
            }
        }
    }

    #[test]
    fn e1_matches_quadrature() {
        // E1(x) = int_0^1 exp(-x/u)/u du; substitute u = e^{-v}: int_0^inf exp(-x e^v) dv.
        let rule = GaussRule::new(32);
        for x in [0.01, 0.5, 1.0, 2.5, 10.0] {
            let mut acc = 0.0;
            let steps = 400;
            let top = 40.0;
            for k in 0..steps {
                let a = top * k as f64 / steps as f64;
                let b = top * (k + 1) as f64 / steps as f64;
                acc += rule.integrate(a, b, |v| (-x * v.exp()).exp());
            }
            assert!((exp_integral_e1(x) - acc).abs() < 1e-12 * acc.max(1e-3), "x={x}");
        }
        assert!((exp_integral_e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section(-3.0, 5.0, 1e-10, |x| (x - 1.25) * (x - 1.25) + 2.0);
        // the bracket shrinks to ~sqrt(machine eps) around a flat minimum
        assert!((x - 1.25).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-15);
    }
}
