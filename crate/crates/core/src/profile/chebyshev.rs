//! Floating-point proposal machinery. Nothing here is trusted: every polynomial
//! produced is later checked exactly against the sharp profile.

use std::f64::consts::PI;

/// The sharp profile in the scaled variable `t`, where `x = 1 + scale * t`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Target {
    pub delta: f64,
    pub scale: f64,
}

impl Target {
    pub fn g(&self, x: f64) -> f64 {
        let d = self.delta;
        if x <= 1.0 - d || x >= 1.0 + d {
            1.0 - d
        } else if x <= 1.0 {
            (1.0 - d) + (x - (1.0 - d)) * (-(1.0 + d) / d)
        } else {
            -2.0 * d + (x - 1.0) * ((1.0 + d) / d)
        }
    }

    pub fn at_t(&self, t: f64) -> f64 {
        self.g(1.0 + self.scale * t)
    }

    /// The profile with each corner replaced by a quadratic blend of half-width `h`.
    pub fn mollified_at_t(&self, t: f64, h: f64) -> f64 {
        let x = 1.0 + self.scale * t;
        let d = self.delta;
        let s = (1.0 + d) / d;
        let mut y = self.g(x);
        for (c, jump) in [(1.0 - d, -s), (1.0, 2.0 * s), (1.0 + d, -s)] {
            let u = (x - c).abs();
            if u < h {
                y += jump / 2.0 * ((u * u + h * h) / (2.0 * h) - u);
            }
        }
        y
    }

    pub fn kinks_t(&self) -> [f64; 3] {
        let d = self.delta / self.scale;
        [-d, 0.0, d]
    }

    /// `t` range corresponding to `x` in `[0, 2 + delta]`.
    pub fn certified_t(&self) -> (f64, f64) {
        (-1.0 / self.scale, (1.0 + self.delta) / self.scale)
    }
}

/// First-kind Chebyshev nodes `cos(pi (k + 1/2) / (n + 1))`, `k = 0..=n`.
pub(crate) fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| (PI * (k as f64 + 0.5) / (n as f64 + 1.0)).cos())
        .collect()
}

/// Chebyshev coefficients of the degree-`n` interpolant through values at [`chebyshev_nodes`].
pub(crate) fn chebyshev_coefficients(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let period = 4 * m;
    let table: Vec<f64> = (0..period)
        .map(|i| (PI * i as f64 / (2.0 * m as f64)).cos())
        .collect();
    let mut out = vec![0.0; m];
    for (k, c) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, v) in values.iter().enumerate() {
            s += v * table[(k * (2 * j + 1)) % period];
        }
        *c = 2.0 * s / m as f64;
    }
    out[0] /= 2.0;
    out
}

pub(crate) fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = ck + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    c.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Dense sample grid in `t`, refined around the corners.
pub(crate) fn check_grid(target: &Target, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let m = (20 * (n + 2)).max(4000);
    let mut grid: Vec<f64> = (0..=m)
        .map(|k| -(PI * k as f64 / m as f64).cos())
        .collect();
    let window = 10.0 * PI / n.max(1) as f64;
    for kink in target.kinks_t() {
        grid.push(kink);
        for i in 0..=1600 {
            grid.push(kink - window + 2.0 * window * i as f64 / 1600.0);
        }
    }
    grid.retain(|t| (lo..=hi).contains(t));
    grid.push(lo);
    grid.push(hi);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Largest `|P - g|` over the part of the grid inside `[0, 2 + delta]`.
pub(crate) fn estimate_error(target: &Target, coeffs: &[f64]) -> f64 {
    let (lo, hi) = target.certified_t();
    let n = coeffs.len().saturating_sub(1);
    let mut grid = check_grid(target, n, lo, hi);
    let extra = 10_000;
    grid.extend((0..=extra).map(|i| lo + (hi - lo) * i as f64 / extra as f64));
    grid.iter()
        .map(|&t| (clenshaw(coeffs, t) - target.at_t(t)).abs())
        .fold(0.0, f64::max)
}

/// Chebyshev interpolation of the mollified profile.
pub(crate) fn interpolate(target: &Target, n: usize, half_width: f64) -> Vec<f64> {
    let values: Vec<f64> = chebyshev_nodes(n)
        .iter()
        .map(|&t| target.mollified_at_t(t, half_width))
        .collect();
    chebyshev_coefficients(&values)
}

/// Barycentric weights for arbitrary nodes, computed in the log domain.
fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut logs = vec![0.0; n];
    let mut signs = vec![1.0; n];
    for i in 0..n {
        let mut l = 0.0;
        let mut s = 1.0;
        for j in 0..n {
            if i != j {
                let d = 2.0 * (nodes[i] - nodes[j]);
                l -= d.abs().ln();
                if d < 0.0 {
                    s = -s;
                }
            }
        }
        logs[i] = l;
        signs[i] = s;
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    logs.iter()
        .zip(&signs)
        .map(|(l, s)| s * (l - top).exp())
        .collect()
}

fn barycentric_eval(nodes: &[f64], weights: &[f64], values: &[f64], t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((x, w), v) in nodes.iter().zip(weights).zip(values) {
        let diff = t - x;
        if diff == 0.0 {
            return *v;
        }
        let c = w / diff;
        num += c * v;
        den += c;
    }
    num / den
}

/// Best uniform approximation of the sharp profile on the full scaled interval
/// by the Remez exchange, started from the extrema of the interpolation error.
/// Returns Chebyshev coefficients of the best iterate.
pub(crate) fn remez(target: &Target, n: usize, max_iter: usize) -> Vec<f64> {
    let grid = check_grid(target, n, -1.0, 1.0);
    let g_grid: Vec<f64> = grid.iter().map(|&t| target.at_t(t)).collect();

    let start = chebyshev_coefficients(
        &chebyshev_nodes(n)
            .iter()
            .map(|&t| target.at_t(t))
            .collect::<Vec<_>>(),
    );
    let err0: Vec<f64> = grid
        .iter()
        .zip(&g_grid)
        .map(|(&t, g)| clenshaw(&start, t) - g)
        .collect();
    let mut nodes = chebyshev_nodes(n);
    nodes.reverse();
    let mut bounds = vec![0usize];
    bounds.extend(nodes.iter().map(|x| grid.partition_point(|t| t < x)));
    bounds.push(grid.len());
    let mut sel: Vec<usize> = bounds
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| argmax_abs(&err0, w[0], w[1]))
        .collect();
    if sel.len() != n + 2 {
        return start;
    }

    let mut best: Option<(f64, Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    for _ in 0..max_iter {
        let reference: Vec<f64> = sel.iter().map(|&i| grid[i]).collect();
        let w = barycentric_weights(&reference);
        let g_ref: Vec<f64> = sel.iter().map(|&i| g_grid[i]).collect();
        let alt: Vec<f64> = (0..n + 2).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let h = dot(&w, &g_ref) / dot(&w, &alt);
        let values: Vec<f64> = g_ref.iter().zip(&alt).map(|(g, a)| g - a * h).collect();
        let err: Vec<f64> = grid
            .iter()
            .zip(&g_grid)
            .map(|(&t, g)| barycentric_eval(&reference, &w, &values, t) - g)
            .collect();
        let emax = err.iter().map(|e| e.abs()).fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| emax < b.0) {
            best = Some((emax, reference.clone(), w.clone(), values.clone()));
        }
        if emax - h.abs() < 0.01 * emax {
            break;
        }
        match exchange(&err, n + 2) {
            Some(next) => sel = next,
            None => break,
        }
    }
    let (_, reference, w, values) = best.expect("at least one iteration");
    let samples: Vec<f64> = chebyshev_nodes(n)
        .iter()
        .map(|&t| barycentric_eval(&reference, &w, &values, t))
        .collect();
    chebyshev_coefficients(&samples)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn argmax_abs(e: &[f64], a: usize, b: usize) -> usize {
    (a..b)
        .max_by(|&i, &j| e[i].abs().total_cmp(&e[j].abs()))
        .expect("nonempty range")
}

/// One extremum per maximal same-sign run, thinned to `count` alternating points.
fn exchange(err: &[f64], count: usize) -> Option<Vec<usize>> {
    let mut sel = Vec::new();
    let mut start = 0;
    for i in 1..=err.len() {
        if i == err.len() || (err[i] >= 0.0) != (err[start] >= 0.0) {
            sel.push(argmax_abs(err, start, i));
            start = i;
        }
    }
    while sel.len() > count {
        if sel.len() - count == 1 {
            if err[sel[0]].abs() < err[sel[sel.len() - 1]].abs() {
                sel.remove(0);
            } else {
                sel.pop();
            }
        } else {
            let k = (0..sel.len() - 1)
                .min_by(|&i, &j| {
                    let a = err[sel[i]].abs().max(err[sel[i + 1]].abs());
                    let b = err[sel[j]].abs().max(err[sel[j + 1]].abs());
                    a.total_cmp(&b)
                })
                .expect("at least two points");
            sel.drain(k..k + 2);
        }
    }
    (sel.len() == count).then_some(sel)
}
