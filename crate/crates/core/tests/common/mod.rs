//! Straight-line reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerical code paths.
#![allow(dead_code)]

use kuranet::rng::SplitMix64;

/// Dense row-major weights, `N` and parameters.
#[derive(Debug, Clone)]
pub struct Dense {
    pub n: usize,
    pub a: Vec<f64>,
    pub m: f64,
    pub k: f64,
    pub alpha: f64,
    pub omega_nat: Vec<f64>,
}

impl Dense {
    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }
}

/// `ω̇_i` by the defining formula, summing over every column of the dense matrix.
pub fn accel(d: &Dense, theta: &[f64], omega: &[f64]) -> Vec<f64> {
    let n = d.n;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut s = 0.0;
        for l in 0..n {
            s += d.w(i, l) * (theta[l] - theta[i] + d.alpha).sin();
        }
        out[i] = (d.omega_nat[i] - omega[i] + d.k / n as f64 * s) / d.m;
    }
    out
}

/// `2m ΣΔxΔy + (1 − m√K) ΣΔx² + 2m² ΣΔy²` over ordered pairs.
pub fn energy(m: f64, k: f64, x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let mut cross = 0.0;
    let mut xx = 0.0;
    let mut yy = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            cross += dx * dy;
            xx += dx * dx;
            yy += dy * dy;
        }
    }
    2.0 * m * cross + (1.0 - m * k.sqrt()) * xx + 2.0 * m * m * yy
}

pub fn pair_sq(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += (x[i] - x[j]).powi(2);
        }
    }
    s
}

/// `Σ_{(i,j) ∈ E} (x_i − x_j)²` over ordered pairs with positive weight.
pub fn edge_sq(d_n: usize, a: &[f64], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..d_n {
        for j in 0..d_n {
            if a[i * d_n + j] > 0.0 {
                s += (x[i] - x[j]).powi(2);
            }
        }
    }
    s
}

/// Hop diameter by Floyd-Warshall; `None` when disconnected.
pub fn floyd_diameter(n: usize, a: &[f64]) -> Option<usize> {
    const INF: usize = usize::MAX / 4;
    let mut dist = vec![INF; n * n];
    for i in 0..n {
        dist[i * n + i] = 0;
        for j in 0..n {
            if a[i * n + j] > 0.0 {
                dist[i * n + j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i * n + k] + dist[k * n + j];
                if via < dist[i * n + j] {
                    dist[i * n + j] = via;
                }
            }
        }
    }
    let max = dist.iter().copied().max().unwrap_or(0);
    (max < INF).then_some(max)
}

/// `1 / (1 + r |Eᶜ|)` with `|Eᶜ| = N² − |E|`, ordered pairs, diagonal in `Eᶜ`.
pub fn lambda1(n: usize, a: &[f64]) -> f64 {
    let r = floyd_diameter(n, a).expect("connected") as f64;
    let edges = a.iter().filter(|&&w| w > 0.0).count();
    1.0 / (1.0 + r * (n * n - edges) as f64)
}

/// Random connected symmetric weight matrix on `n` vertices: a random
/// spanning tree plus extra edges with probability `p`.
pub fn random_connected(rng: &mut SplitMix64, n: usize, p: f64) -> Vec<f64> {
    let mut a = vec![0.0; n * n];
    let set = |a: &mut Vec<f64>, i: usize, j: usize, w: f64| {
        a[i * n + j] = w;
        a[j * n + i] = w;
    };
    for v in 1..n {
        let u = rng.uniform_int(0, v as u64 - 1) as usize;
        let w = rng.uniform(0.1, 2.0);
        set(&mut a, u, v, w);
    }
    for i in 0..n {
        for j in i + 1..n {
            if a[i * n + j] == 0.0 && rng.next_f64() < p {
                let w = rng.uniform(0.1, 2.0);
                set(&mut a, i, j, w);
            }
        }
    }
    a
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Component-wise relative error, scaled by the largest magnitude in the pair of vectors.
pub fn vec_rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).fold(0.0f64, |s, x| s.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}
