//! Gauss–Legendre rules and a corner-singular cube rule.
//!
//! [`CornerRule`] integrates over the box `[0, a_1] × … × [0, a_d]` a
//! function that may blow up like `|u|^{-s}` (`s < d`) at the origin
//! corner. The unit cube is split into `d` pyramids according to which
//! coordinate is largest, each pyramid is mapped to `t ∈ [0, 1]`,
//! `v ∈ [0, 1]^{d-1}` (Duffy transform, Jacobian `t^{d-1}`), and the
//! radial variable `t` is integrated on a geometrically graded mesh with
//! ratio 1/2 toward zero. The last panel uses the substitution `t = a τ^4`.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and P_{n-1}
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
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
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(lo + 0.5 * h * (x + 1.0));
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Tensor rule for the unit cube with a possible singularity at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerRule {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Panels per unit length in the transformed coordinates.
    pub panels: usize,
    /// Number of geometric grading levels toward the corner.
    pub levels: usize,
}

impl Default for CornerRule {
    fn default() -> Self {
        CornerRule { order: 16, panels: 8, levels: 12 }
    }
}

/// Flattened nodes (`d` coordinates per node) and weights.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }
}

impl CornerRule {
    /// Rule with roughly `resolution` nodes per unit length along each axis.
    pub fn with_resolution(resolution: usize) -> Self {
        let order = 16;
        CornerRule { order, panels: (resolution / order).max(1), ..Default::default() }
    }

    fn radial(&self) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ws = Vec::new();
        let mut hi = 1.0_f64;
        for _ in 0..self.levels {
            let lo = hi * 0.5;
            let sub = ((hi - lo) * self.panels as f64).ceil() as usize;
            let (x, w) = composite(lo, hi, sub, self.order);
            xs.extend(x);
            ws.extend(w);
            hi = lo;
        }
        // innermost panel: t = hi · τ^4 smooths t^{-s} and log t at τ = 0
        let (x, w) = composite(0.0, 1.0, 1, self.order);
        for (tau, wt) in x.iter().zip(&w) {
            xs.push(hi * tau.powi(4));
            ws.push(hi * 4.0 * tau.powi(3) * wt);
        }
        (xs, ws)
    }

    /// Nodes for the box `[0, extents_1] × … × [0, extents_d]`.
    pub fn nodes(&self, extents: &[f64]) -> NodeSet {
        let d = extents.len();
        assert!(d >= 1);
        let (tx, tw) = self.radial();
        let (vx, vw) = composite(0.0, 1.0, self.panels, self.order);
        let scale: f64 = extents.iter().product();
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let tail = d - 1;
        let count_v = vx.len().pow(tail as u32);
        let mut xi = vec![0.0; d];
        for k in 0..d {
            for (t, wt) in tx.iter().zip(&tw) {
                let jac = t.powi(tail as i32) * wt * scale;
                for idx in 0..count_v {
                    let mut rem = idx;
                    let mut w = jac;
                    let mut slot = 0;
                    for (j, x) in xi.iter_mut().enumerate() {
                        if j == k {
                            *x = *t;
                            continue;
                        }
                        let vi = rem % vx.len();
                        rem /= vx.len();
                        *x = t * vx[vi];
                        w *= vw[vi];
                        slot += 1;
                    }
                    debug_assert_eq!(slot, tail);
                    for (j, x) in xi.iter().enumerate() {
                        points.push(x * extents[j]);
                    }
                    weights.push(w);
                }
            }
        }
        NodeSet { dim: d, points, weights }
    }

    /// Integral over the box with the singular point at the origin corner.
    pub fn integrate(&self, extents: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
        if extents.iter().any(|&a| a <= 0.0) {
            return 0.0;
        }
        let nodes = self.nodes(extents);
        let terms: Vec<f64> = nodes.iter().map(|(p, w)| w * f(p)).collect();
        crate::sum::pairwise_sum(&terms)
    }
}

/// Integral of `f` over the box `[lo, hi]` split at an interior point `at`,
/// so that a singularity at `at` sits at a corner of every piece.
pub fn integrate_box_around(
    rule: &CornerRule,
    lo: &[f64],
    hi: &[f64],
    at: &[f64],
    f: impl Fn(&[f64]) -> f64,
) -> f64 {
    let d = lo.len();
    let mut total = Vec::with_capacity(1 << d);
    let mut extents = vec![0.0; d];
    let mut signs = vec![0.0; d];
    let mut y = vec![0.0; d];
    for mask in 0..(1usize << d) {
        for i in 0..d {
            if mask & (1 << i) != 0 {
                extents[i] = hi[i] - at[i];
                signs[i] = 1.0;
            } else {
                extents[i] = at[i] - lo[i];
                signs[i] = -1.0;
            }
        }
        if extents.iter().any(|&a| a <= 0.0) {
            continue;
        }
        let nodes = rule.nodes(&extents);
        let mut terms = Vec::with_capacity(nodes.len());
        for (u, w) in nodes.iter() {
            for i in 0..d {
                y[i] = at[i] + signs[i] * u[i];
            }
            terms.push(w * f(&y));
        }
        total.push(crate::sum::pairwise_sum(&terms));
    }
    crate::sum::pairwise_sum(&total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let (x, w) = gauss_legendre(n);
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "n={n}: {q} vs {exact}");
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn corner_rule_handles_log_and_inverse_distance() {
        let rule = CornerRule::default();
        // ∫_0^1 -ln u du = 1
        let v = rule.integrate(&[1.0], |u| -u[0].ln());
        assert!((v - 1.0).abs() < 1e-9, "{v}");
        // ∫_{[0,1]^2} |u|^{-1} = 2 ln(1 + √2)
        let v = rule.integrate(&[1.0, 1.0], |u| 1.0 / u[0].hypot(u[1]));
        assert!((v - 2.0 * (1.0 + 2f64.sqrt()).ln()).abs() < 1e-9, "{v}");
        // smooth integrand over a non-square box
        let v = rule.integrate(&[2.0, 0.5], |u| u[0] * u[1]);
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn split_box_integral_recovers_volume() {
        let rule = CornerRule { order: 8, panels: 2, levels: 4 };
        let v = integrate_box_around(&rule, &[0.0, 0.0], &[1.0, 2.0], &[0.3, 1.5], |_| 1.0);
        assert!((v - 2.0).abs() < 1e-12);
    }
}
