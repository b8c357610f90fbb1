#![allow(dead_code)]

use std::io::Write;

use rand::Rng;
use riskrule::rng::{seeded, SeedRng};
use riskrule::search::gen_scenarios;
use riskrule::{Grid, Parameterization, SearchInstance, SearchPath};

pub fn rng(seed: u64) -> SeedRng {
    seeded(seed)
}

/// One unbuffered status line on stderr, visible even when the harness
/// captures test output.
pub fn report(id: u32, ok: bool, detail: &str) {
    let tag = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] criterion {id}: {detail}");
}

/// A random instance with one or two targets.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_cells: usize,
    max_t: usize,
    max_i: usize,
    mode: Parameterization,
    targets: usize,
) -> SearchInstance {
    let (rows, cols) = loop {
        let r = rng.gen_range(1..=max_cells);
        let c = rng.gen_range(1..=max_cells);
        if r * c <= max_cells && r * c >= 2 {
            break (r, c);
        }
    };
    let grid = Grid::new(rows, cols).unwrap();
    let t = rng.gen_range(2..=max_t);
    let i = rng.gen_range(2..=max_i);
    let tracks = (0..targets)
        .map(|_| {
            let start = rng.gen_range(0..grid.cell_count());
            gen_scenarios(rng, &grid, &[start], t, i, 0.6).unwrap()
        })
        .collect();
    let alpha = match mode {
        Parameterization::A => 2.74887,
        Parameterization::B => 0.510826,
    };
    let tau = if targets > 1 { rng.gen_range(0.3..=1.0) } else { 1.0 };
    SearchInstance::new(grid, t, tracks, alpha, mode, tau).unwrap()
}

/// A random admissible parameter vector. Mode B draws normalized uniform
/// weights and subtracts the barycenter; mode A perturbs the detection rate
/// and the weights, with some weights clipped.
pub fn random_param<R: Rng>(rng: &mut R, inst: &SearchInstance) -> Vec<f64> {
    let n = inst.scenario_count();
    let base = 1.0 / n as f64;
    match inst.mode() {
        Parameterization::B => {
            let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
            let s: f64 = u.iter().sum();
            let mut xi: Vec<f64> = u.iter().map(|v| v / s - base).collect();
            let drift = xi.iter().sum::<f64>() / n as f64;
            xi.iter_mut().for_each(|v| *v -= drift);
            xi
        }
        Parameterization::A => {
            let mut xi = vec![rng.gen_range(-1.0..1.0)];
            xi.extend((0..n).map(|_| rng.gen_range(-1.5 * base..1.5 * base)));
            // keep at least one weight positive
            xi[1] = xi[1].abs();
            xi
        }
    }
}

/// A random walk of the searcher.
pub fn random_path<R: Rng>(rng: &mut R, inst: &SearchInstance) -> SearchPath {
    let grid = inst.grid();
    let mut cell = rng.gen_range(0..grid.cell_count());
    let mut cells = vec![cell];
    for _ in 1..inst.horizon() {
        let nb = grid.neighbors(cell);
        cell = nb[rng.gen_range(0..nb.len())];
        cells.push(cell);
    }
    SearchPath::new(cells)
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Solves a small square system by Gaussian elimination with partial
/// pivoting; `None` when it is (numerically) singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        rhs.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        out(cur);
        return;
    }
    for i in start..n {
        if n - i < k - cur.len() {
            break;
        }
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// Minimum L1 norm of `B` over `(B, b)` separating labelled points with the
/// margin `[eps, delta]`, by enumerating the vertices cut out by `r + 1`
/// active constraints among the margin hyperplanes and the coordinate
/// hyperplanes `B_l = 0`. The objective is linear on each orthant and every
/// orthant piece of the feasible set is pointed, so its minimum sits at one
/// of these vertices. `None` when no vertex is feasible.
pub fn l1_oracle(points: &[(Vec<f64>, bool)], eps: f64, delta: f64, tol: f64) -> Option<f64> {
    let r = points[0].0.len();
    // hyperplanes as (coef over [B, b], rhs)
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, y) in points {
        let mut c = x.clone();
        c.push(1.0);
        let (a, b) = if *y { (eps, delta) } else { (-delta, -eps) };
        planes.push((c.clone(), a));
        planes.push((c, b));
    }
    for l in 0..r {
        let mut c = vec![0.0; r + 1];
        c[l] = 1.0;
        planes.push((c, 0.0));
    }
    let feasible = |z: &[f64]| {
        points.iter().all(|(x, y)| {
            let g: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum::<f64>() + z[r];
            let (lo, hi) = if *y { (eps, delta) } else { (-delta, -eps) };
            g >= lo - tol && g <= hi + tol
        })
    };
    let mut best: Option<f64> = None;
    subsets(planes.len(), r + 1, 0, &mut Vec::new(), &mut |idx| {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(z) = solve_square(a, rhs) {
            if feasible(&z) {
                let v: f64 = z[..r].iter().map(|v| v.abs()).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    best
}

/// A random separation problem in dimension `1..=5`.
pub fn random_separation<R: Rng>(rng: &mut R) -> (Vec<(Vec<f64>, bool)>, f64, f64) {
    let r = rng.gen_range(1..=5);
    let n = rng.gen_range(1..=r + 3);
    let pts = (0..n)
        .map(|_| ((0..r).map(|_| rng.gen_range(-1.0..1.0)).collect(), rng.gen_bool(0.5)))
        .collect();
    let eps = rng.gen_range(0.01..0.2);
    let delta = eps + rng.gen_range(0.1..2.0);
    (pts, eps, delta)
}

/// Between `min` and `max` random training points, capped at the number of
/// affinely independent points the parameter space admits.
pub fn random_training<R: Rng>(rng: &mut R, inst: &SearchInstance, min: usize, max: usize) -> Vec<Vec<f64>> {
    let cap = match inst.mode() {
        Parameterization::A => inst.param_dim() + 1,
        Parameterization::B => inst.param_dim(),
    };
    let n = rng.gen_range(min.min(cap)..=max.min(cap));
    (0..n).map(|_| random_param(rng, inst)).collect()
}
