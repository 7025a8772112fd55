//! Quadrature rules: tanh-sinh for endpoint-singular integrands,
//! Gauss–Legendre on intervals and a degree-5 rule on triangles.

use std::f64::consts::PI;

/// Tanh-sinh (double exponential) quadrature of `f` on `[a, b]`.
/// Refines the step until two levels agree to `rel_tol`.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let t_max = 4.0;
    let node = |t: f64| {
        let u = 0.5 * PI * t.sinh();
        let x = u.tanh();
        let w = 0.5 * PI * t.cosh() / u.cosh().powi(2);
        (x, w)
    };
    let mut h = 0.5;
    let mut sum = {
        let (x, w) = node(0.0);
        w * f(c + half * x)
    };
    let mut j = 1;
    loop {
        let t = j as f64 * h;
        if t > t_max {
            break;
        }
        let (x, w) = node(t);
        sum += w * (f(c + half * x) + f(c - half * x));
        j += 1;
    }
    let mut estimate = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut j = 1;
        loop {
            let t = j as f64 * h;
            if t > t_max {
                break;
            }
            let (x, w) = node(t);
            if x < 1.0 {
                sum += w * (f(c + half * x) + f(c - half * x));
            }
            j += 2;
        }
        let next = sum * h * half;
        let done = (next - estimate).abs() <= rel_tol * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed Gauss–Legendre rule mapped to arbitrary intervals.
#[derive(Clone, Debug)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }

    /// Adaptive bisection until the rule and its two halves agree.
    pub fn integrate_adaptive(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
        let whole = self.integrate(f, a, b);
        self.refine(f, a, b, whole, rel_tol, 0)
    }

    fn refine(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = self.integrate(f, a, m);
        let right = self.integrate(f, m, b);
        let split = left + right;
        if depth >= 30 || (split - whole).abs() <= tol * split.abs().max(f64::MIN_POSITIVE) {
            return split;
        }
        self.refine(f, a, m, left, tol, depth + 1) + self.refine(f, m, b, right, tol, depth + 1)
    }
}

/// Seven-point degree-5 rule on a triangle, as barycentric points and
/// weights summing to one (multiply by the area).
pub fn triangle_rule() -> [([f64; 3], f64); 7] {
    let s = 15f64.sqrt();
    let a1 = (6.0 - s) / 21.0;
    let b1 = (9.0 + 2.0 * s) / 21.0;
    let a2 = (6.0 + s) / 21.0;
    let b2 = (9.0 - 2.0 * s) / 21.0;
    let w1 = (155.0 - s) / 1200.0;
    let w2 = (155.0 + s) / 1200.0;
    [
        ([1.0 / 3.0; 3], 9.0 / 40.0),
        ([b1, a1, a1], w1),
        ([a1, b1, a1], w1),
        ([a1, a1, b1], w1),
        ([b2, a2, a2], w2),
        ([a2, b2, a2], w2),
        ([a2, a2, b2], w2),
    ]
}

/// Integral over the triangle with vertices `v` of a function of position,
/// refined adaptively (four children per level) to `rel_tol`.
pub fn integrate_triangle(
    f: &impl Fn([f64; 2]) -> f64,
    v: [[f64; 2]; 3],
    rel_tol: f64,
    max_depth: u32,
) -> f64 {
    let whole = triangle_once(f, v);
    triangle_refine(f, v, whole, rel_tol, max_depth)
}

fn triangle_area(v: &[[f64; 2]; 3]) -> f64 {
    0.5 * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])).abs()
}

fn triangle_once(f: &impl Fn([f64; 2]) -> f64, v: [[f64; 2]; 3]) -> f64 {
    let area = triangle_area(&v);
    triangle_rule()
        .iter()
        .map(|(b, w)| {
            let x = [
                b[0] * v[0][0] + b[1] * v[1][0] + b[2] * v[2][0],
                b[0] * v[0][1] + b[1] * v[1][1] + b[2] * v[2][1],
            ];
            w * f(x)
        })
        .sum::<f64>()
        * area
}

fn triangle_refine(
    f: &impl Fn([f64; 2]) -> f64,
    v: [[f64; 2]; 3],
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let mid = |a: [f64; 2], b: [f64; 2]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
    let m01 = mid(v[0], v[1]);
    let m12 = mid(v[1], v[2]);
    let m20 = mid(v[2], v[0]);
    let kids = [
        [v[0], m01, m20],
        [m01, v[1], m12],
        [m20, m12, v[2]],
        [m01, m12, m20],
    ];
    let parts: Vec<f64> = kids.iter().map(|k| triangle_once(f, *k)).collect();
    let split: f64 = parts.iter().sum();
    if depth == 0 || (split - whole).abs() <= tol * split.abs().max(f64::MIN_POSITIVE) {
        return split;
    }
    kids.iter()
        .zip(&parts)
        .map(|(k, w)| triangle_refine(f, *k, *w, tol, depth - 1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let v = tanh_sinh(|x| x.sqrt(), 0.0, 1.0, 1e-14);
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
        let v = tanh_sinh(|x| x.cos().powi(4), 0.0, PI / 2.0, 1e-14);
        assert!((v - 3.0 * PI / 16.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in 1..=12 {
            let rule = GaussRule::new(n);
            for deg in 0..2 * n {
                let v = rule.integrate(&|x| x.powi(deg as i32), 0.0, 1.0);
                assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_gauss_on_fractional_power() {
        let rule = GaussRule::new(8);
        let v = rule.integrate_adaptive(&|x: f64| x.powf(2.5), 0.0, 1.0, 1e-12);
        assert!((v - 1.0 / 3.5).abs() < 1e-11);
    }

    #[test]
    fn triangle_rule_degree_five() {
        let v = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        // ∫ x^a y^b over the unit simplex = a! b! / (a+b+2)!
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let exact = fact(a) * fact(b) / fact(a + b + 2);
                let got = integrate_triangle(&|x| x[0].powi(a as i32) * x[1].powi(b as i32), v, 1e-15, 0);
                assert!((got - exact).abs() < 1e-15, "a={a} b={b}");
            }
        }
    }
}
