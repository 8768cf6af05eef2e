//! Integration over the open unit cube.
//!
//! Measure integrands are smooth inside the cube but carry logarithmic
//! singularities on its faces, where the copula argument of the kernel goes
//! to zero. Tensor Gauss–Legendre rules never evaluate on the boundary, and
//! with the default [`NodeMapping::Graded`] the nodes are pushed through the
//! degree-9 smoothstep `φ(t) = t⁵(126 − 420t + 540t² − 315t³ + 70t⁴)`,
//! whose first four derivatives vanish at both ends and flatten those
//! singularities. Sums use a
//! fixed pairwise tree, so results do not depend on the thread count.

use std::sync::atomic::{AtomicU64, Ordering};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::{FractionalKernel, FractionalOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    GaussLegendreTensor,
    MonteCarlo,
    AdaptiveDoubling,
}

/// How `[0, 1]` Gauss–Legendre nodes are placed inside the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeMapping {
    Affine,
    Graded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig {
    pub method: Method,
    pub nodes_per_axis: usize,
    pub mc_samples: u64,
    pub seed: u64,
    pub clamp_epsilon: f64,
    pub rel_tolerance: f64,
    pub mapping: NodeMapping,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            method: Method::GaussLegendreTensor,
            nodes_per_axis: 64,
            mc_samples: 1_000_000,
            seed: 42,
            clamp_epsilon: 1e-300,
            rel_tolerance: 1e-8,
            mapping: NodeMapping::Graded,
        }
    }
}

/// Tensor grids stop growing past this many points.
const MAX_TENSOR_POINTS: usize = 1 << 24;
const MAX_ADAPTIVE_NODES: usize = 1024;
const MC_BATCH: u64 = 10_000;

impl IntegrationConfig {
    /// Default configuration for a given dimension; dimension 4 and above
    /// switch to Monte Carlo.
    pub fn for_dim(dim: usize) -> Self {
        let mut cfg = Self::default();
        if dim >= 4 {
            cfg.method = Method::MonteCarlo;
        }
        cfg
    }

    pub fn gauss_legendre(nodes_per_axis: usize) -> Self {
        Self {
            nodes_per_axis,
            ..Self::default()
        }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self {
            method: Method::MonteCarlo,
            mc_samples: samples,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_axis < 2 {
            return Err(Error::Parameter(format!(
                "nodes_per_axis must be at least 2, got {}",
                self.nodes_per_axis
            )));
        }
        if !(self.clamp_epsilon > 0.0 && self.clamp_epsilon < 1e-10) {
            return Err(Error::Parameter(format!(
                "clamp_epsilon must lie in (0, 1e-10), got {}",
                self.clamp_epsilon
            )));
        }
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::Parameter("rel_tolerance must be positive".into()));
        }
        if self.method == Method::MonteCarlo && self.mc_samples < 2 {
            return Err(Error::Parameter("Monte Carlo needs at least 2 samples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    /// Difference between the last two refinement levels, or the Monte Carlo
    /// standard error.
    pub error_estimate: f64,
    pub evaluations: u64,
    /// Kernel arguments raised to `clamp_epsilon`.
    pub clamped: u64,
}

impl IntegralResult {
    pub const ZERO: IntegralResult = IntegralResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        clamped: 0,
    };
}

/// Sum of integrals over disjoint pieces; error estimates add.
impl std::ops::Add for IntegralResult {
    type Output = IntegralResult;

    fn add(self, rhs: IntegralResult) -> IntegralResult {
        IntegralResult {
            value: self.value + rhs.value,
            error_estimate: self.error_estimate + rhs.error_estimate,
            evaluations: self.evaluations + rhs.evaluations,
            clamped: self.clamped + rhs.clamped,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th largest root
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
        let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
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
        if d.is_finite() {
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
    (nodes, weights)
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
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// One-dimensional rule on `(0, 1)` after the chosen mapping.
pub fn unit_rule(n: usize, mapping: NodeMapping) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    x.iter()
        .zip(&w)
        .map(|(&x, &w)| {
            let t = 0.5 * (x + 1.0);
            let wt = 0.5 * w;
            match mapping {
                NodeMapping::Affine => (t, wt),
                NodeMapping::Graded => {
                    let s = 1.0 - t;
                    let phi = if t <= 0.5 {
                        smoothstep9(t)
                    } else {
                        1.0 - smoothstep9(s)
                    };
                    let ts = t * s;
                    (phi, wt * 630.0 * ts * ts * ts * ts)
                }
            }
        })
        .unzip()
}

/// `t⁵(126 − 420t + 540t² − 315t³ + 70t⁴)`, the degree-9 smoothstep whose
/// first four derivatives vanish at both ends.
#[inline]
fn smoothstep9(t: f64) -> f64 {
    let t2 = t * t;
    t2 * t2 * t * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t))))
}

/// Pairwise (cascade) summation with a fixed split, deterministic for a
/// given slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `∫_{[0,1]^dim} f`.
pub fn integrate_unit_cube<F>(f: F, dim: usize, cfg: &IntegrationConfig) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::Parameter("integration dimension must be at least 1".into()));
    }
    match cfg.method {
        Method::GaussLegendreTensor => {
            let n = cfg.nodes_per_axis;
            let coarse_n = (n / 2).max(2);
            let fine = tensor_rule(&f, dim, n, cfg.mapping)?;
            let coarse = tensor_rule(&f, dim, coarse_n, cfg.mapping)?;
            Ok(IntegralResult {
                value: fine.0,
                error_estimate: (fine.0 - coarse.0).abs(),
                evaluations: fine.1 + coarse.1,
                clamped: 0,
            })
        }
        Method::AdaptiveDoubling => {
            let mut n = cfg.nodes_per_axis;
            let (mut value, mut evaluations) = tensor_rule(&f, dim, n, cfg.mapping)?;
            let mut error_estimate = f64::INFINITY;
            loop {
                let next = n * 2;
                if next > MAX_ADAPTIVE_NODES || tensor_size(next, dim).is_none() {
                    break;
                }
                let (refined, evals) = tensor_rule(&f, dim, next, cfg.mapping)?;
                evaluations += evals;
                error_estimate = (refined - value).abs();
                value = refined;
                n = next;
                if error_estimate < cfg.rel_tolerance * value.abs().max(1.0) {
                    break;
                }
            }
            Ok(IntegralResult {
                value,
                error_estimate,
                evaluations,
                clamped: 0,
            })
        }
        Method::MonteCarlo => monte_carlo(&f, dim, cfg.mc_samples, cfg.seed),
    }
}

fn tensor_size(n: usize, dim: usize) -> Option<usize> {
    let mut total: usize = 1;
    for _ in 0..dim {
        total = total.checked_mul(n)?;
    }
    (total <= MAX_TENSOR_POINTS).then_some(total)
}

fn tensor_rule<F>(f: &F, dim: usize, n: usize, mapping: NodeMapping) -> Result<(f64, u64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let total = tensor_size(n, dim).ok_or_else(|| {
        Error::Parameter(format!(
            "tensor grid with {n} nodes in dimension {dim} exceeds {MAX_TENSOR_POINTS} points; use Monte Carlo"
        ))
    })?;
    let (x, w) = unit_rule(n, mapping);
    // the first coordinate is the slowest-varying index
    let inner = total / n;
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut point = vec![0.0; dim];
            let mut out = Vec::with_capacity(inner);
            for j in 0..inner {
                let mut rest = j;
                let mut weight = w[i];
                point[0] = x[i];
                for d in (1..dim).rev() {
                    let k = rest % n;
                    rest /= n;
                    point[d] = x[k];
                    weight *= w[k];
                }
                out.push(weight * f(&point));
            }
            out
        })
        .collect();
    if let Some(pos) = terms.iter().position(|t| !t.is_finite()) {
        let mut point = vec![0.0; dim];
        let mut rest = pos;
        for d in (0..dim).rev() {
            point[d] = x[rest % n];
            rest /= n;
        }
        let value = f(&point);
        return Err(Error::Singularity { point, value });
    }
    Ok((pairwise_sum(&terms), total as u64))
}

#[derive(Debug, Clone, Copy)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.count as f64, other.count as f64);
        Moments {
            count,
            mean: self.mean + delta * nb / count as f64,
            m2: self.m2 + other.m2 + delta * delta * na * nb / count as f64,
        }
    }
}

/// Uniform draw in the open interval `(0, 1)`.
#[inline]
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn monte_carlo<F>(f: &F, dim: usize, samples: u64, seed: u64) -> Result<IntegralResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let batches = samples.div_ceil(MC_BATCH);
    let results: Vec<Result<Moments>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            // one ChaCha stream per batch keeps the draw sequence independent
            // of how batches are scheduled
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let len = MC_BATCH.min(samples - b * MC_BATCH);
            let mut point = vec![0.0; dim];
            let mut m = Moments {
                count: 0,
                mean: 0.0,
                m2: 0.0,
            };
            for _ in 0..len {
                for p in point.iter_mut() {
                    *p = open_unit(&mut rng);
                }
                let y = f(&point);
                if !y.is_finite() {
                    return Err(Error::Singularity {
                        point: point.clone(),
                        value: y,
                    });
                }
                m.count += 1;
                let delta = y - m.mean;
                m.mean += delta / m.count as f64;
                m.m2 += delta * (y - m.mean);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments {
        count: 0,
        mean: 0.0,
        m2: 0.0,
    };
    for r in results {
        total = total.merge(r?);
    }
    let n = total.count as f64;
    let variance = total.m2 / (n - 1.0);
    Ok(IntegralResult {
        value: total.mean,
        error_estimate: (variance / n).sqrt(),
        evaluations: total.count,
        clamped: 0,
    })
}

/// Subregions of the unit square bounded by a diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareRegion {
    /// `u + v ≥ 1`, where `max(u + v − 1, 0)` is positive.
    AboveAntiDiagonal,
    /// `u + v ≤ 1`.
    BelowAntiDiagonal,
    /// `v ≤ u`.
    BelowDiagonal,
    /// `v ≥ u`.
    AboveDiagonal,
}

/// `∫` of `f` over a triangular part of the unit square, mapped onto the
/// square so integrands with a kink along the diagonal stay smooth.
pub fn integrate_region<F>(f: F, region: SquareRegion, cfg: &IntegrationConfig) -> Result<IntegralResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let mapped = |p: &[f64]| {
        let (a, s) = (p[0], p[1]);
        match region {
            // v = 1 - u + u s
            SquareRegion::AboveAntiDiagonal => a * f(a, 1.0 - a + a * s),
            // v = (1 - u) s
            SquareRegion::BelowAntiDiagonal => (1.0 - a) * f(a, (1.0 - a) * s),
            // v = u s
            SquareRegion::BelowDiagonal => a * f(a, a * s),
            // u = v s
            SquareRegion::AboveDiagonal => a * f(a * s, a),
        }
    };
    integrate_unit_cube(mapped, 2, cfg)
}

/// Kernel applied to the copula argument inside a measure integrand.
#[derive(Debug, Clone, Copy)]
pub enum KernelKind {
    /// `{−Ln_η x}^{1/η}`.
    Fractional(FractionalKernel),
    /// `−Ln_η x = Γ(η + 1) · (−log x)`.
    InverseMlf(f64),
    /// `−log x`.
    Log,
}

impl KernelKind {
    pub fn fractional(eta: FractionalOrder) -> Self {
        KernelKind::Fractional(FractionalKernel::new(eta))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 0.0;
        }
        match self {
            KernelKind::Fractional(k) => k.eval(x),
            KernelKind::InverseMlf(factor) => -factor * x.ln(),
            KernelKind::Log => -x.ln(),
        }
    }
}

/// `v ↦ w(v) · kernel(max(k(v), ε))`, exactly zero where `w(v) = 0`.
///
/// Counts how often the clamp fires.
pub struct GuardedIntegrand<W, K> {
    weight: W,
    kernel_arg: K,
    kernel: KernelKind,
    epsilon: f64,
    clamped: AtomicU64,
}

impl<W, K> GuardedIntegrand<W, K>
where
    W: Fn(&[f64]) -> f64 + Sync,
    K: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(weight: W, kernel_arg: K, kernel: KernelKind, epsilon: f64) -> Self {
        Self {
            weight,
            kernel_arg,
            kernel,
            epsilon,
            clamped: AtomicU64::new(0),
        }
    }

    pub fn eval(&self, v: &[f64]) -> f64 {
        let w = (self.weight)(v);
        if w == 0.0 {
            return 0.0;
        }
        let mut arg = (self.kernel_arg)(v);
        if !(arg >= self.epsilon) {
            self.clamped.fetch_add(1, Ordering::Relaxed);
            arg = self.epsilon;
        }
        w * self.kernel.eval(arg)
    }

    pub fn clamped(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }

    /// Integrates over the unit cube and attaches the clamp count.
    pub fn integrate(&self, dim: usize, cfg: &IntegrationConfig) -> Result<IntegralResult> {
        let mut r = integrate_unit_cube(|v| self.eval(v), dim, cfg)?;
        r.clamped = self.clamped();
        Ok(r)
    }
}

/// Functional form of [`GuardedIntegrand`] for a fractional kernel.
pub fn guarded_integrand<W, K>(
    weight: W,
    kernel_arg: K,
    eta: FractionalOrder,
) -> impl Fn(&[f64]) -> f64 + Sync
where
    W: Fn(&[f64]) -> f64 + Sync,
    K: Fn(&[f64]) -> f64 + Sync,
{
    let g = GuardedIntegrand::new(
        weight,
        kernel_arg,
        KernelKind::fractional(eta),
        IntegrationConfig::default().clamp_epsilon,
    );
    move |v: &[f64]| g.eval(v)
}
