//! Seeded generators for training and test parameter sets.
//!
//! Every generator draws from a ChaCha8 stream seeded with `seed`, so equal
//! specs produce bitwise-equal point sets on every platform.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::inv_beta_reg;

use crate::error::{domain, structural, Error, Result};
use crate::rng::seeded;

/// Attempts allowed in total before a rejection sampler gives up.
pub const ATTEMPT_CAP: u64 = 10_000_000;
/// A window of this many attempts without an acceptance counts as a stall
/// (acceptance rate below 1e-6).
pub const STALL_WINDOW: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataKind {
    ShrinkingUniform { nu: u32 },
    SimplexUniform { radius: f64 },
    SimplexBeta { a: f64, b: f64, radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    #[serde(flatten)]
    pub kind: DataKind,
    pub count: usize,
    pub seed: u64,
    /// Dimension of each point.
    pub dim: usize,
}

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(domain("point count must be at least 1"));
        }
        if self.dim == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        match self.kind {
            DataKind::ShrinkingUniform { nu } => check_nu(nu)?,
            DataKind::SimplexUniform { radius } => check_radius(radius)?,
            DataKind::SimplexBeta { a, b, radius } => {
                check_radius(radius)?;
                check_shape(a, b)?;
            }
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        match self.kind {
            DataKind::ShrinkingUniform { nu } => shrinking_uniform(nu, self.dim, self.count, self.seed),
            DataKind::SimplexUniform { radius } => simplex_uniform(radius, self.dim, self.count, self.seed),
            DataKind::SimplexBeta { a, b, radius } => simplex_beta(a, b, radius, self.dim, self.count, self.seed),
        }
    }

    /// One-line description written as the first comment of a point file.
    pub fn provenance(&self) -> String {
        let kind = match self.kind {
            DataKind::ShrinkingUniform { nu } => format!("shrinking_uniform nu={nu}"),
            DataKind::SimplexUniform { radius } => format!("simplex_uniform radius={radius}"),
            DataKind::SimplexBeta { a, b, radius } => format!("simplex_beta a={a} b={b} radius={radius}"),
        };
        format!("{kind} count={} dim={} seed={}", self.count, self.dim, self.seed)
    }
}

fn check_nu(nu: u32) -> Result<()> {
    if (1..=8).contains(&nu) {
        Ok(())
    } else {
        Err(domain(format!("shrinking level nu = {nu} outside 1..=8")))
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("radius {radius} must be positive")))
    }
}

fn check_shape(a: f64, b: f64) -> Result<()> {
    if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("beta shape ({a}, {b}) must be positive")))
    }
}

/// Half-widths of the sampling boxes at level `nu`: `0.18 - 0.02 nu` for the
/// detection-rate coordinate and `0.009 - 0.001 nu` for the others.
pub fn shrinking_half_widths(nu: u32) -> Result<(f64, f64)> {
    check_nu(nu)?;
    let nu = f64::from(nu);
    Ok((0.18 - 0.02 * nu, 0.009 - 0.001 * nu))
}

/// Independent uniform coordinates; coordinate 0 is the detection-rate
/// perturbation, the remaining `dim - 1` perturb scenario weights.
pub fn shrinking_uniform(nu: u32, dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let (h0, h) = shrinking_half_widths(nu)?;
    if dim == 0 || count == 0 {
        return Err(domain("dimension and count must be positive"));
    }
    let mut rng = seeded(seed);
    Ok((0..count)
        .map(|_| {
            (0..dim)
                .map(|j| {
                    let w = if j == 0 { h0 } else { h };
                    rng.gen_range(-w..=w)
                })
                .collect()
        })
        .collect())
}

/// Normalized uniform vectors minus the barycenter, kept when their
/// Euclidean norm is at most `radius`.
pub fn simplex_uniform(radius: f64, dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_radius(radius)?;
    let mut rng = seeded(seed);
    rejection(dim, count, radius, Limits::default(), |buf| {
        for v in buf.iter_mut() {
            *v = rng.gen::<f64>();
        }
    })
}

/// As [`simplex_uniform`] with beta(a, b) coordinates before normalization,
/// drawn by inverse CDF.
pub fn simplex_beta(a: f64, b: f64, radius: f64, dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_radius(radius)?;
    check_shape(a, b)?;
    let mut rng = seeded(seed);
    rejection(dim, count, radius, Limits::default(), |buf| {
        for v in buf.iter_mut() {
            *v = beta_quantile(a, b, rng.gen::<f64>());
        }
    })
}

pub(crate) fn beta_quantile(a: f64, b: f64, u: f64) -> f64 {
    inv_beta_reg(a, b, u)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Limits {
    pub cap: u64,
    pub window: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Self { cap: ATTEMPT_CAP, window: STALL_WINDOW }
    }
}

pub(crate) fn rejection<F>(dim: usize, count: usize, radius: f64, limits: Limits, mut draw: F) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(&mut [f64]),
{
    if dim == 0 || count == 0 {
        return Err(domain("dimension and count must be positive"));
    }
    let base = 1.0 / dim as f64;
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0.0; dim];
    let mut attempts = 0u64;
    let mut since_accept = 0u64;
    while out.len() < count {
        if attempts >= limits.cap || since_accept >= limits.window {
            return Err(Error::Stall { accepted: out.len(), attempts });
        }
        attempts += 1;
        since_accept += 1;
        draw(&mut buf);
        let total: f64 = buf.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        let mut point: Vec<f64> = buf.iter().map(|v| v / total - base).collect();
        // Pin the sum to zero; the correction is a few ulps.
        let drift: f64 = point.iter().sum::<f64>() / dim as f64;
        point.iter_mut().for_each(|v| *v -= drift);
        let norm = point.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= radius {
            out.push(point);
            since_accept = 0;
        }
    }
    Ok(out)
}

pub fn write_points<W: Write>(mut w: W, spec: &DataSpec, points: &[Vec<f64>]) -> Result<()> {
    writeln!(w, "# {}", spec.provenance())?;
    let mut csv = csv::Writer::from_writer(w);
    let dim = points.first().map_or(spec.dim, Vec::len);
    csv.write_record((0..dim).map(|j| format!("xi{j}")))?;
    for p in points {
        csv.write_record(p.iter().map(|v| format!("{v:e}")))?;
    }
    csv.flush()?;
    Ok(())
}

/// Reads a point file. Leading `#` lines are skipped; the header row names
/// the coordinates.
pub fn read_points<R: BufRead>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    let mut points = Vec::new();
    let mut dim = None;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let p: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: k + 2, msg: e.to_string() })?;
        if *dim.get_or_insert(p.len()) != p.len() {
            return Err(structural(format!("point {} has {} coordinates, expected {}", k + 1, p.len(), dim.unwrap())));
        }
        points.push(p);
    }
    if points.is_empty() {
        return Err(structural("point file has no points"));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::beta::beta_reg;

    #[test]
    fn shrinking_ranges() {
        assert_eq!(shrinking_half_widths(8).unwrap().0, 0.18 - 0.16);
        let (h0, h) = shrinking_half_widths(8).unwrap();
        assert!((h0 - 0.02).abs() < 1e-15 && (h - 0.001).abs() < 1e-15);
        assert!((shrinking_half_widths(1).unwrap().0 - 0.16).abs() < 1e-15);
        assert!(shrinking_half_widths(0).is_err());
        assert!(shrinking_half_widths(9).is_err());
        let pts = shrinking_uniform(8, 11, 200, 3).unwrap();
        for p in &pts {
            assert!(p[0].abs() <= h0);
            assert!(p[1..].iter().all(|v| v.abs() <= h));
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = simplex_uniform(0.1, 20, 5, 9).unwrap();
        let b = simplex_uniform(0.1, 20, 5, 9).unwrap();
        assert_eq!(a, b);
        let c = simplex_uniform(0.1, 20, 5, 10).unwrap();
        assert_ne!(a, c);
        assert_eq!(shrinking_uniform(3, 4, 3, 1).unwrap(), shrinking_uniform(3, 4, 3, 1).unwrap());
    }

    #[test]
    fn simplex_points_lie_in_the_ball_and_sum_to_zero() {
        for p in simplex_uniform(0.05, 100, 50, 1).unwrap() {
            let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(n <= 0.05);
            assert!(p.iter().sum::<f64>().abs() < 1e-12);
            assert!(p.iter().all(|v| 0.01 + v >= 0.0));
        }
        for p in simplex_beta(0.1, 0.1, 0.1, 100, 50, 2).unwrap() {
            assert!(p.iter().map(|v| v * v).sum::<f64>().sqrt() <= 0.1);
            assert!(p.iter().sum::<f64>().abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_cdf_inverts() {
        // near 1 the quantile is limited by f64 spacing, so the upper half is
        // checked through the reflection I(a, b, x) = 1 - I(b, a, 1 - x)
        for &(a, b) in &[(0.1, 0.1), (1.0, 1.0), (2.0, 5.0)] {
            for k in 1..20 {
                let u = k as f64 / 20.0;
                let x = beta_quantile(a, b, u);
                if u <= 0.5 {
                    assert!((beta_reg(a, b, x) - u).abs() < 1e-12, "a={a} b={b} u={u}");
                } else {
                    let mirrored = 1.0 - beta_quantile(b, a, 1.0 - u);
                    assert!((x - mirrored).abs() < 1e-12, "a={a} b={b} u={u}");
                }
            }
        }
    }

    #[test]
    fn stall_is_reported() {
        let err = rejection(3, 1, 1e-9, Limits { cap: 50, window: 20 }, |b| {
            b.copy_from_slice(&[1.0, 0.0, 0.0])
        })
        .unwrap_err();
        assert!(matches!(err, Error::Stall { accepted: 0, attempts: 20 }));
        let err = rejection(3, 5, 1.0, Limits { cap: 3, window: 20 }, |b| b.fill(1.0)).unwrap_err();
        assert!(matches!(err, Error::Stall { accepted: 3, attempts: 3 }));
    }

    #[test]
    fn bad_specs() {
        assert!(simplex_uniform(0.0, 5, 1, 0).is_err());
        assert!(simplex_beta(0.0, 1.0, 0.1, 5, 1, 0).is_err());
        let spec = DataSpec { kind: DataKind::SimplexUniform { radius: 0.1 }, count: 0, seed: 0, dim: 3 };
        assert!(spec.generate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let spec = DataSpec { kind: DataKind::SimplexBeta { a: 0.1, b: 0.1, radius: 0.1 }, count: 4, seed: 5, dim: 30 };
        let pts = spec.generate().unwrap();
        let mut buf = Vec::new();
        write_points(&mut buf, &spec, &pts).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# simplex_beta a=0.1 b=0.1 radius=0.1 count=4 dim=30 seed=5\n"));
        assert_eq!(read_points(&buf[..]).unwrap(), pts);
    }
}
