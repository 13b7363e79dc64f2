//! Gauss–Legendre rules, composite panel rules and barycentric interpolation.
//!
//! Everything band-limited in this crate is integrated on panels whose
//! breakpoints sit on the kinks of the integrand, so a modest number of
//! Legendre nodes per panel gives close to machine precision.

use std::f64::consts::PI;

/// Nodes and weights of a quadrature rule, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` with a fixed left-to-right summation order.
    pub fn integrate<T, F>(&self, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64) -> T,
    {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(T::default(), |acc, (&x, &w)| acc + f(x) * w)
    }
}

/// Gauss–Legendre rule with `n` nodes on [-1, 1].
///
/// Nodes are found by Newton iteration on the three-term recurrence and are
/// mirrored so that the rule is exactly symmetric.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess for the i-th largest root.
        let theta = PI * (4.0 * i as f64 + 3.0) / (4.0 * n as f64 + 2.0);
        let nf = n as f64;
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Rule {
    let base = gauss_legendre(n);
    map_rule(&base, a, b)
}

fn map_rule(base: &Rule, a: f64, b: f64) -> Rule {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    Rule {
        nodes: base.nodes.iter().map(|&t| mid + half * t).collect(),
        weights: base.weights.iter().map(|&w| half * w).collect(),
    }
}

/// Composite Gauss–Legendre rule over consecutive panels `breaks`, each panel
/// further split so that no sub-panel is longer than `max_len`.
pub fn composite(breaks: &[f64], nodes_per_panel: usize, max_len: f64) -> Rule {
    let base = gauss_legendre(nodes_per_panel);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        let pieces = if max_len.is_finite() && max_len > 0.0 {
            (len / max_len).ceil().max(1.0) as usize
        } else {
            1
        };
        let step = len / pieces as f64;
        for p in 0..pieces {
            let lo = a + step * p as f64;
            let hi = if p + 1 == pieces { b } else { lo + step };
            let r = map_rule(&base, lo, hi);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
    }
    Rule { nodes, weights }
}

/// Composite rule sized for integrands carrying a phase `e^{i ω x}` with
/// |ω| ≤ `max_freq`: sub-panels span at most four radians of phase.
pub fn oscillatory(breaks: &[f64], max_freq: f64) -> Rule {
    let max_len = if max_freq > 0.0 { 4.0 / max_freq } else { f64::INFINITY };
    composite(breaks, 20, max_len)
}

/// Panel rule for integrands `e^{iωx} p(x)` with |ω| ≤ `max_freq` and `p`
/// smooth on each panel: a panel keeps a single `n_whole`-node rule while its
/// phase span stays below `n_whole / 2` radians, otherwise it is cut into
/// four-radian pieces with 20 nodes each.
pub fn panel_rule(breaks: &[f64], n_whole: usize, max_freq: f64) -> Rule {
    let whole = gauss_legendre(n_whole);
    let piece = gauss_legendre(20);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = b - a;
        if len <= 0.0 {
            continue;
        }
        if len * max_freq <= 0.5 * n_whole as f64 {
            let r = map_rule(&whole, a, b);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
            continue;
        }
        let pieces = (len * max_freq / 4.0).ceil() as usize;
        let step = len / pieces as f64;
        for p in 0..pieces {
            let lo = a + step * p as f64;
            let hi = if p + 1 == pieces { b } else { lo + step };
            let r = map_rule(&piece, lo, hi);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
    }
    Rule { nodes, weights }
}

/// Barycentric weights for polynomial interpolation through `nodes`, scaled
/// by the capacity of the node interval to avoid overflow.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    if n == 0 {
        return Vec::new();
    }
    let lo = nodes[0];
    let hi = nodes[n - 1];
    let scale = if hi > lo { 4.0 / (hi - lo) } else { 1.0 };
    (0..n)
        .map(|j| {
            let prod: f64 = (0..n)
                .filter(|&m| m != j)
                .map(|m| (nodes[j] - nodes[m]) * scale)
                .product();
            1.0 / prod
        })
        .collect()
}

/// Second-form barycentric interpolation.
pub fn barycentric_eval<T>(nodes: &[f64], bary: &[f64], values: &[T], x: f64) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let mut num = T::default();
    let mut den = 0.0;
    for ((&xj, &wj), &vj) in nodes.iter().zip(bary).zip(values) {
        let d = x - xj;
        if d == 0.0 {
            return vj;
        }
        let c = wj / d;
        num = num + vj * c;
        den += c;
    }
    num * (1.0 / den)
}
