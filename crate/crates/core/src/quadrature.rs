//! Composite Gauss–Legendre quadrature.
//!
//! Every overlap integral in the crate (packet projection, half-line
//! overlaps, orthonormality checks) uses 64-node panels of width 0.5 on a
//! symmetric interval. Panel edges land on multiples of the panel width, so
//! `x = 0` is always a panel boundary and half-line integrals reuse the same
//! nodes.

use std::f64::consts::PI;

use crate::model::{GaussianPacketSpec, PhysicalParams};

pub const PANEL_WIDTH: f64 = 0.5;
pub const NODES_PER_PANEL: usize = 64;
/// Half-widths (in units of the packet or ground-state spread) added beyond the
/// outermost feature of the integrand.
pub const TAIL_WIDTHS: f64 = 12.0;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
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
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

/// Flattened nodes and weights of a panel rule over `[a, b]`.
#[derive(Debug, Clone)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    /// `[a, b]` split into equal panels no wider than `panel_width`.
    pub fn new(a: f64, b: f64, panel_width: f64, order: usize) -> Self {
        assert!(b > a && panel_width > 0.0);
        let panels = ((b - a) / panel_width - 1e-9).ceil().max(1.0) as usize;
        let h = (b - a) / panels as f64;
        let base = GaussLegendre::new(order);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
        Self { nodes, weights }
    }

    /// Standard panels over `[-extent, extent]`, extent rounded up to a whole panel.
    pub fn symmetric(extent: f64) -> Self {
        let l = round_up_to_panel(extent);
        Self::new(-l, l, PANEL_WIDTH, NODES_PER_PANEL)
    }

    /// Standard panels over `[0, extent]`.
    pub fn half_line(extent: f64) -> Self {
        Self::new(0.0, round_up_to_panel(extent), PANEL_WIDTH, NODES_PER_PANEL)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn round_up_to_panel(extent: f64) -> f64 {
    (extent / PANEL_WIDTH).ceil().max(1.0) * PANEL_WIDTH
}

/// Interval half-width on which every basis function up to `n_max` has decayed.
pub fn basis_extent(params: &PhysicalParams, n_max: usize) -> f64 {
    let g = params.g();
    (g * (2 * n_max + 1) as f64).sqrt() + TAIL_WIDTHS * (g / 2.0).sqrt()
}

/// Interval half-width for projecting `packet` onto the basis of a well with
/// minima at `±x_s`.
pub fn packet_extent(params: &PhysicalParams, x_s: f64, packet: &GaussianPacketSpec, n_max: usize) -> f64 {
    let g = params.g();
    let spread = packet.mu.sqrt().max((g / 2.0).sqrt());
    let around_packet = x_s.max(packet.x0.abs()) + TAIL_WIDTHS * spread;
    around_packet.max(basis_extent(params, n_max))
}
