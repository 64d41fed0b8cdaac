use std::sync::OnceLock;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre polynomial of the given order.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1);
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// The shared order-8 rule used for per-unit-interval integration.
    pub fn order8() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(8))
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Maps the rule onto `[a, b]`, yielding `(x, w)` pairs.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order8_nodes_match_tabulated_values() {
        let gl = GaussLegendre::order8();
        let nodes = gl.nodes();
        assert!((nodes[7] - 0.960_289_856_497_536_2).abs() < 1e-15);
        assert!((nodes[4] - 0.183_434_642_495_649_8).abs() < 1e-15);
        assert!((gl.weights()[7] - 0.101_228_536_290_376_3).abs() < 1e-15);
        let total: f64 = gl.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn exact_for_degree_fifteen() {
        let gl = GaussLegendre::order8();
        for deg in 0..=15 {
            let got = gl.integrate(0.0, 2.0, |x| x.powi(deg));
            let want = 2f64.powi(deg + 1) / (deg as f64 + 1.0);
            assert!((got - want).abs() < 1e-12 * want, "degree {deg}");
        }
    }

    #[test]
    fn odd_order_has_center_node() {
        let gl = GaussLegendre::new(5);
        assert_eq!(gl.nodes()[2], 0.0);
        let got = gl.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((got - 2.0 / 9.0).abs() < 1e-14);
    }
}
