//! Gauss-Legendre rules and composite panel integration.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on P_n from Tricomi's initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 1.0;
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        self.mapped(a, b).map(|(x, w)| f(x) * w).sum()
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
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared, lazily built rule with `n` nodes.
pub fn rule(n: usize) -> &'static GaussLegendre {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Box::leak(Box::new(GaussLegendre::new(n))))
}

/// Composite rule: `[a, b]` split into equal panels no wider than `panel_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PanelSpec {
    pub nodes_per_panel: usize,
    pub panel_width: f64,
}

impl Default for PanelSpec {
    fn default() -> Self {
        PanelSpec {
            nodes_per_panel: 64,
            panel_width: 0.5,
        }
    }
}

impl PanelSpec {
    pub fn new(nodes_per_panel: usize, panel_width: f64) -> Self {
        PanelSpec {
            nodes_per_panel,
            panel_width,
        }
    }

    /// All (node, weight) pairs of the composite rule on [a, b], in order.
    pub fn points(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        if b <= a {
            return Vec::new();
        }
        let panels = ((b - a) / self.panel_width).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let gl = rule(self.nodes_per_panel);
        let mut out = Vec::with_capacity(panels * gl.len());
        for p in 0..panels {
            let lo = a + p as f64 * h;
            let hi = if p + 1 == panels { b } else { lo + h };
            out.extend(gl.mapped(lo, hi));
        }
        out
    }
}

/// Nodes and weights on [a, b] assembled from explicit breakpoints.
pub fn points_on_breaks(breaks: &[f64], nodes_per_panel: usize) -> Vec<(f64, f64)> {
    let gl = rule(nodes_per_panel);
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .flat_map(|w| gl.mapped(w[0], w[1]).collect::<Vec<_>>())
        .collect()
}

/// Breakpoints of `panels` equal panels on [a, b].
pub fn uniform_breaks(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let panels = panels.max(1);
    (0..=panels)
        .map(|i| {
            if i == panels {
                b
            } else {
                a + (b - a) * i as f64 / panels as f64
            }
        })
        .collect()
}

/// Pairwise summation; keeps reductions independent of how values were produced.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
