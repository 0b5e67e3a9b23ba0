//! Numeric fiber geometry: critical points, oval tracing by Hamiltonian
//! flow, transversal curves, and path algebra.
//!
//! Paths live on a fiber `f⁻¹(t)` and are stored as sampled parameterized
//! curves with complex coordinates (real scenarios carry zero imaginary
//! parts). Between samples the curve is evaluated by a Catmull–Rom cubic, so
//! densely sampled paths are accurate to O(h⁴) — enough for the 1e−8-level
//! quadrature targets downstream.

use crate::poly::BiPoly;
use crate::rk;
use crate::{Error, Result};
use num_complex::Complex64;

/// A point of ℂ², real scenarios use zero imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: Complex64,
    pub y: Complex64,
}

impl Point {
    pub fn real(x: f64, y: f64) -> Self {
        Point { x: Complex64::new(x, 0.0), y: Complex64::new(y, 0.0) }
    }

    pub fn new(x: Complex64, y: Complex64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        ((self.x - other.x).norm_sqr() + (self.y - other.y).norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.re.is_finite() && self.x.im.is_finite() && self.y.re.is_finite() && self.y.im.is_finite()
    }
}

/// Hessian classification of a nondegenerate critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorseType {
    Minimum,
    Maximum,
    Saddle,
    NonMorse,
}

/// A real critical point of `f` with its type and critical value.
#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    pub point: Point,
    pub kind: MorseType,
    pub value: f64,
}

/// Discretized parameterized curve on a fiber `f⁻¹(t)`.
#[derive(Debug, Clone)]
pub struct Path {
    /// Ordered `(parameter, point)` samples; parameters strictly increasing
    /// from 0 to 1. Closed paths duplicate the start point at the end.
    samples: Vec<(f64, Point)>,
    /// Fiber value.
    pub t: Complex64,
    pub closed: bool,
    /// Sample indices where the curve is only C⁰ (concatenation joints).
    /// Interpolation stencils never cross these.
    breaks: Vec<usize>,
}

/// Velocity (dx/du, dy/du) along a segment's local parameter.
pub type Velocity = (Complex64, Complex64);

impl Path {
    pub fn from_samples(samples: Vec<(f64, Point)>, t: Complex64, closed: bool) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Numeric("path needs at least two samples".into()));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Numeric("path parameters must increase".into()));
            }
        }
        Ok(Path { samples, t, closed, breaks: vec![] })
    }

    /// Samples an analytic parameterization at `n + 1` uniform parameters.
    pub fn from_fn<F>(n: usize, t: Complex64, closed: bool, point: F) -> Self
    where
        F: Fn(f64) -> Point,
    {
        let samples = (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                (s, point(s))
            })
            .collect();
        Path { samples, t, closed, breaks: vec![] }
    }

    /// Straight segment between two points (on a fiber only if the caller
    /// says so; used for synthetic fixtures).
    pub fn line(p0: Point, p1: Point, n: usize, t: Complex64) -> Self {
        Path::from_fn(n, t, false, |s| {
            Point::new(
                p0.x + (p1.x - p0.x) * s,
                p0.y + (p1.y - p0.y) * s,
            )
        })
    }

    pub fn num_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn start(&self) -> Point {
        self.samples[0].1
    }

    pub fn end(&self) -> Point {
        self.samples[self.samples.len() - 1].1
    }

    pub fn samples(&self) -> &[(f64, Point)] {
        &self.samples
    }

    /// Total chord length.
    pub fn length(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[0].1.dist(&w[1].1))
            .sum()
    }

    /// Largest fiber residual `|f(p) − t|` over the samples.
    pub fn fiber_residual(&self, f: &BiPoly) -> f64 {
        self.samples
            .iter()
            .map(|(_, p)| (f.eval_complex(p.x, p.y) - self.t).norm())
            .fold(0.0, f64::max)
    }

    /// C¹-boundary sample indices: breaks plus the two ends for open paths
    /// (closed smooth paths have none and wrap).
    fn is_smooth_closed(&self) -> bool {
        self.closed && self.breaks.is_empty()
    }

    /// Run of C¹ samples containing the segment `[seg, seg+1]`:
    /// `(lo, hi)` node indices inclusive.
    fn run_of_segment(&self, seg: usize) -> (usize, usize) {
        let n = self.samples.len();
        let mut lo = 0usize;
        let mut hi = n - 1;
        for &b in &self.breaks {
            if b <= seg && b > lo {
                lo = b;
            }
            if b >= seg + 1 && b < hi {
                hi = b;
            }
        }
        (lo, hi)
    }

    /// dP/ds at `node` using a Lagrange stencil of up to 5 nodes confined to
    /// `[lo, hi]` (wrapping instead when the path is smoothly closed).
    fn tangent_in_run(&self, node: usize, lo: usize, hi: usize) -> Velocity {
        let n = self.samples.len();
        let mut idx: Vec<isize> = Vec::with_capacity(5);
        if self.is_smooth_closed() {
            for o in -2isize..=2 {
                idx.push(node as isize + o);
            }
        } else {
            let span = hi - lo;
            let want = span.min(4);
            let mut start = node.saturating_sub(2).max(lo);
            if start + want > hi {
                start = hi - want;
            }
            for o in 0..=want {
                idx.push((start + o) as isize);
            }
        }
        let m = n - 1; // distinct samples for closed paths
        let mut params = Vec::with_capacity(idx.len());
        let mut pts = Vec::with_capacity(idx.len());
        let mut at = 0usize;
        for (j, &raw) in idx.iter().enumerate() {
            let (s, p) = if self.is_smooth_closed() {
                let wrapped = raw.rem_euclid(m as isize) as usize;
                let turns = (raw - wrapped as isize) / m as isize;
                let (s, p) = self.samples[wrapped];
                (s + turns as f64, p)
            } else {
                self.samples[raw as usize]
            };
            if raw == node as isize {
                at = j;
            }
            params.push(s);
            pts.push(p);
        }
        lagrange_derivative(&params, &pts, at)
    }

    /// Hermite data for segment `i`: point and velocity at local u = 0, ½, 1.
    /// Velocities are per unit of local parameter.
    pub fn segment_eval(&self, i: usize) -> [(Point, Velocity); 3] {
        let (lo, hi) = self.run_of_segment(i);
        let (s0, p0) = self.samples[i];
        let (s1, p1) = self.samples[i + 1];
        let d = s1 - s0;
        let t0 = self.tangent_in_run(i, lo, hi);
        let t1 = self.tangent_in_run(i + 1, lo, hi);
        let m0 = (t0.0 * d, t0.1 * d);
        let m1 = (t1.0 * d, t1.1 * d);
        let eval = |u: f64| -> (Point, Velocity) {
            let u2 = u * u;
            let u3 = u2 * u;
            let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
            let h10 = u3 - 2.0 * u2 + u;
            let h01 = -2.0 * u3 + 3.0 * u2;
            let h11 = u3 - u2;
            let x = p0.x * h00 + m0.0 * h10 + p1.x * h01 + m1.0 * h11;
            let y = p0.y * h00 + m0.1 * h10 + p1.y * h01 + m1.1 * h11;
            let g00 = 6.0 * u2 - 6.0 * u;
            let g10 = 3.0 * u2 - 4.0 * u + 1.0;
            let g01 = -6.0 * u2 + 6.0 * u;
            let g11 = 3.0 * u2 - 2.0 * u;
            let vx = p0.x * g00 + m0.0 * g10 + p1.x * g01 + m1.0 * g11;
            let vy = p0.y * g00 + m0.1 * g10 + p1.y * g01 + m1.1 * g11;
            (Point::new(x, y), (vx, vy))
        };
        [eval(0.0), eval(0.5), eval(1.0)]
    }

    /// Curve point at global parameter `s` by Hermite interpolation.
    pub fn point_at(&self, s: f64) -> Point {
        let s = s.clamp(0.0, 1.0);
        let idx = match self
            .samples
            .binary_search_by(|probe| probe.0.partial_cmp(&s).unwrap())
        {
            Ok(i) => return self.samples[i].1,
            Err(i) => i.saturating_sub(1).min(self.samples.len() - 2),
        };
        let (s0, _) = self.samples[idx];
        let (s1, _) = self.samples[idx + 1];
        let u = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
        let data = self.segment_eval(idx);
        let (p0, (m0x, m0y)) = data[0];
        let (p1, (m1x, m1y)) = data[2];
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        Point::new(
            p0.x * h00 + m0x * h10 + p1.x * h01 + m1x * h11,
            p0.y * h00 + m0y * h10 + p1.y * h01 + m1y * h11,
        )
    }

    /// Reverses orientation: samples in reverse order, `s ↦ 1 − s`.
    pub fn reverse(&self) -> Path {
        let n = self.samples.len();
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|&(s, p)| (1.0 - s, p))
            .collect();
        let mut breaks: Vec<usize> = self.breaks.iter().map(|&b| n - 1 - b).collect();
        breaks.sort_unstable();
        Path { samples, t: self.t, closed: self.closed, breaks }
    }

    /// Rotates a closed path so that sample `k` becomes the start.
    pub fn rebase_cycle(&self, k: usize) -> Result<Path> {
        if !self.closed {
            return Err(Error::Numeric("rebase requires a closed path".into()));
        }
        let n = self.samples.len() - 1; // distinct samples
        let k = k % n;
        if k == 0 {
            return Ok(self.clone());
        }
        let mut samples = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let idx = (k + j) % n;
            samples.push(self.samples[idx].1);
        }
        let out: Vec<(f64, Point)> = samples
            .into_iter()
            .enumerate()
            .map(|(j, p)| (j as f64 / n as f64, p))
            .collect();
        let mut path = Path::from_samples(out, self.t, true)?;
        let mut breaks: Vec<usize> = self
            .breaks
            .iter()
            .map(|&b| (b + n - k % n) % n)
            .collect();
        if !self.breaks.is_empty() && !breaks.contains(&0) {
            // the old seam becomes an interior corner
            breaks.push((n - k % n) % n);
        }
        breaks.sort_unstable();
        breaks.dedup();
        path.breaks = breaks;
        Ok(path)
    }

    /// Resamples at roughly `n + 1` parameters through the interpolant,
    /// preserving corner locations (each smooth run is resampled uniformly).
    pub fn resample(&self, n: usize) -> Path {
        self.reparameterize(n, |u| u)
    }

    /// Reparameterizes with a strictly increasing warp of [0,1] onto itself
    /// applied within each smooth run; geometry and corners are unchanged,
    /// parameter spacing is not.
    pub fn reparameterize<W>(&self, n: usize, warp: W) -> Path
    where
        W: Fn(f64) -> f64,
    {
        let mut bounds: Vec<f64> = vec![0.0];
        for &b in &self.breaks {
            let s = self.samples[b].0;
            if s > 0.0 && s < 1.0 {
                bounds.push(s);
            }
        }
        bounds.push(1.0);
        bounds.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bounds.dedup();
        let mut samples: Vec<(f64, Point)> = Vec::with_capacity(n + bounds.len());
        let mut breaks: Vec<usize> = Vec::new();
        for w in bounds.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !samples.is_empty() {
                breaks.push(samples.len() - 1);
            }
            let pieces = ((b - a) * n as f64).ceil().max(4.0) as usize;
            let start = if samples.is_empty() { 0 } else { 1 };
            for i in start..=pieces {
                let u = i as f64 / pieces as f64;
                let s = a + (b - a) * warp(u).clamp(0.0, 1.0);
                samples.push((a + (b - a) * u, self.point_at(s)));
            }
        }
        Path { samples, t: self.t, closed: self.closed, breaks }
    }
}

/// Concatenation `l₁ · l₂` (first traverse `l₁`, then `l₂`).
///
/// Requires matching endpoint/start within `tol` and equal fiber values;
/// parameter ranges are spliced proportionally to sample counts.
pub fn path_concat(l1: &Path, l2: &Path, tol: f64) -> Result<Path> {
    if (l1.t - l2.t).norm() > 1e-9 * (1.0 + l1.t.norm()) {
        return Err(Error::Numeric(format!(
            "fiber mismatch in concatenation: {} vs {}",
            l1.t, l2.t
        )));
    }
    let gap = l1.end().dist(&l2.start());
    if gap > tol {
        return Err(Error::Numeric(format!(
            "endpoint mismatch in concatenation: gap {gap:.3e} exceeds {tol:.3e}"
        )));
    }
    let n1 = l1.samples.len() - 1;
    let n2 = l2.samples.len() - 1;
    let w = n1 as f64 / (n1 + n2) as f64;
    let mut samples = Vec::with_capacity(n1 + n2 + 1);
    for &(s, p) in &l1.samples {
        samples.push((s * w, p));
    }
    for &(s, p) in l2.samples.iter().skip(1) {
        samples.push((w + s * (1.0 - w), p));
    }
    let closed = samples[0].1.dist(&samples[samples.len() - 1].1) <= tol;
    let mut path = Path::from_samples(samples, l1.t, closed)?;
    let mut breaks: Vec<usize> = l1.breaks.clone();
    breaks.push(n1);
    breaks.extend(l2.breaks.iter().map(|&b| b + n1));
    if closed {
        breaks.push(0);
    }
    breaks.sort_unstable();
    breaks.dedup();
    path.breaks = breaks;
    Ok(path)
}

/// The commutator loop `(α, β) = α⁻¹ β⁻¹ α β` as a single closed path.
pub fn commutator_path(alpha: &Path, beta: &Path, tol: f64) -> Result<Path> {
    if !alpha.closed || !beta.closed {
        return Err(Error::Numeric("commutator needs closed loops".into()));
    }
    if alpha.start().dist(&beta.start()) > tol {
        return Err(Error::Numeric(format!(
            "basepoint mismatch: {:.3e}",
            alpha.start().dist(&beta.start())
        )));
    }
    let ai = alpha.reverse();
    let bi = beta.reverse();
    let p = path_concat(&ai, &bi, tol)?;
    let p = path_concat(&p, alpha, tol)?;
    path_concat(&p, beta, tol)
}

/// Transversal ray: `f` restricted to `center + s·dir` must be strictly
/// monotone over the bracket, so `t ↦ P₀(t)` is well defined.
#[derive(Debug, Clone)]
pub struct TransversalSpec {
    pub center: (f64, f64),
    pub dir: (f64, f64),
    pub bracket: (f64, f64),
}

impl TransversalSpec {
    pub fn new(center: (f64, f64), dir: (f64, f64), bracket: (f64, f64)) -> Self {
        let norm = (dir.0 * dir.0 + dir.1 * dir.1).sqrt();
        TransversalSpec {
            center,
            dir: (dir.0 / norm, dir.1 / norm),
            bracket,
        }
    }

    pub fn point_at_param(&self, s: f64) -> (f64, f64) {
        (self.center.0 + s * self.dir.0, self.center.1 + s * self.dir.1)
    }

    /// Checks strict monotonicity of `f` along the bracket by scanning.
    pub fn validate_monotone(&self, f: &BiPoly, scan: usize) -> Result<()> {
        let (lo, hi) = self.bracket;
        let mut prev = f.eval_f64(self.point_at_param(lo).0, self.point_at_param(lo).1);
        let first = f.eval_f64(self.point_at_param(lo + (hi - lo) / scan as f64).0,
                               self.point_at_param(lo + (hi - lo) / scan as f64).1);
        let increasing = first > prev;
        for i in 1..=scan {
            let s = lo + (hi - lo) * i as f64 / scan as f64;
            let (x, y) = self.point_at_param(s);
            let v = f.eval_f64(x, y);
            if (increasing && v <= prev) || (!increasing && v >= prev) {
                return Err(Error::Scenario(format!(
                    "f is not strictly monotone along the transversal ray near s = {s}"
                )));
            }
            prev = v;
        }
        Ok(())
    }
}

/// Point `P₀(t)` on the fiber along the transversal ray, by bisection plus a
/// Newton polish; residual below `1e−12·scale`.
pub fn transversal_point(f: &BiPoly, spec: &TransversalSpec, t: f64) -> Result<Point> {
    let (mut lo, mut hi) = spec.bracket;
    let g = |s: f64| {
        let (x, y) = spec.point_at_param(s);
        f.eval_f64(x, y) - t
    };
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        let (x, y) = spec.point_at_param(lo);
        return Ok(Point::real(x, y));
    }
    if glo * ghi > 0.0 {
        return Err(Error::Numeric(format!(
            "transversal bracket does not straddle t = {t}: f-range endpoints {:.6} / {:.6}",
            glo + t,
            ghi + t
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if (gm > 0.0) == (glo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mut s = 0.5 * (lo + hi);
    // Newton polish along the ray.
    for _ in 0..8 {
        let (x, y) = spec.point_at_param(s);
        let val = f.eval_f64(x, y) - t;
        let grad = f.dx().eval_f64(x, y) * spec.dir.0 + f.dy().eval_f64(x, y) * spec.dir.1;
        if grad.abs() < 1e-300 {
            break;
        }
        s -= val / grad;
    }
    s = s.clamp(spec.bracket.0, spec.bracket.1);
    let (x, y) = spec.point_at_param(s);
    let residual = (f.eval_f64(x, y) - t).abs();
    if residual > 1e-9 * (1.0 + t.abs()) {
        return Err(Error::Numeric(format!(
            "transversal point did not converge: residual {residual:.3e}"
        )));
    }
    Ok(Point::real(x, y))
}

/// Newton projection of a real point onto the fiber `f = t` along ∇f.
pub fn project_to_fiber_real(f: &BiPoly, p: [f64; 2], t: f64, tol: f64) -> Result<[f64; 2]> {
    let fx = f.dx();
    let fy = f.dy();
    let mut q = p;
    for _ in 0..50 {
        let val = f.eval_f64(q[0], q[1]) - t;
        if val.abs() <= tol {
            return Ok(q);
        }
        let gx = fx.eval_f64(q[0], q[1]);
        let gy = fy.eval_f64(q[0], q[1]);
        let g2 = gx * gx + gy * gy;
        if g2 < 1e-300 {
            return Err(Error::Numeric("projection hit a critical point".into()));
        }
        q[0] -= val * gx / g2;
        q[1] -= val * gy / g2;
    }
    Err(Error::Numeric("fiber projection did not converge".into()))
}

/// Complex Newton step onto the fiber `f = t` along the conjugate gradient;
/// used by analytic continuation over complex `t`.
pub fn project_to_fiber_complex(f: &BiPoly, p: Point, t: Complex64, tol: f64) -> Result<Point> {
    let fx = f.dx();
    let fy = f.dy();
    let mut q = p;
    for _ in 0..60 {
        let val = f.eval_complex(q.x, q.y) - t;
        if val.norm() <= tol {
            return Ok(q);
        }
        let gx = fx.eval_complex(q.x, q.y);
        let gy = fy.eval_complex(q.x, q.y);
        let g2 = gx.norm_sqr() + gy.norm_sqr();
        if g2 < 1e-300 {
            return Err(Error::Numeric("projection hit a critical point".into()));
        }
        let lambda = val / Complex64::new(g2, 0.0);
        q = Point::new(q.x - lambda * gx.conj(), q.y - lambda * gy.conj());
    }
    Err(Error::Numeric("complex fiber projection did not converge".into()))
}

/// Options for level-curve tracing.
#[derive(Debug, Clone)]
pub struct TraceOptions {
    pub fiber_tol: f64,
    pub closure_tol: f64,
    pub rk_tol: f64,
    pub max_steps: usize,
    /// Resampled points on the returned closed path.
    pub samples: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            fiber_tol: 1e-10,
            closure_tol: 1e-8,
            rk_tol: 1e-12,
            max_steps: 4_000_000,
            samples: 2048,
        }
    }
}

/// Traces the closed orbit of the Hamiltonian field `(f_y, −f_x)` through
/// (the fiber projection of) `seed` on the level set `f = t`.
///
/// Returns a closed [`Path`] oriented by the flow, uniformly sampled in flow
/// time, every sample Newton-projected onto the fiber. Fails when no return
/// is detected within the step budget (separatrix proximity or an unbounded
/// component).
pub fn trace_oval(f: &BiPoly, t: f64, seed: Point, opts: &TraceOptions) -> Result<Path> {
    let fx = f.dx();
    let fy = f.dy();
    let rhs = |p: [f64; 2]| -> [f64; 2] { [fy.eval_f64(p[0], p[1]), -fx.eval_f64(p[0], p[1])] };
    let start = project_to_fiber_real(f, [seed.x.re, seed.y.re], t, opts.fiber_tol * 0.01)?;
    let (period, h_max) = find_return(f, &rhs, start, t, opts)?;

    // Resample uniformly in flow time with projection at every step.
    let n = opts.samples;
    let dt = period / n as f64;
    let mut samples = Vec::with_capacity(n + 1);
    let mut y = start;
    samples.push((0.0, Point::real(start[0], start[1])));
    let n_sub = 1 + (dt / (0.25 * h_max)).ceil() as usize;
    let h = dt / n_sub as f64;
    for i in 1..n {
        for _ in 0..n_sub {
            y = rk::rk4_step(&rhs, y, h);
        }
        y = project_to_fiber_real(f, y, t, opts.fiber_tol * 0.01)?;
        samples.push((i as f64 / n as f64, Point::real(y[0], y[1])));
    }
    for _ in 0..n_sub {
        y = rk::rk4_step(&rhs, y, h);
    }
    let scale = 1.0 + (start[0] * start[0] + start[1] * start[1]).sqrt();
    let gap = ((y[0] - start[0]).powi(2) + (y[1] - start[1]).powi(2)).sqrt();
    if gap > opts.closure_tol * scale {
        return Err(Error::Numeric(format!(
            "traced path does not close: gap {gap:.3e}"
        )));
    }
    samples.push((1.0, Point::real(start[0], start[1])));

    let path = Path { samples, t: Complex64::new(t, 0.0), closed: true, breaks: vec![] };
    let residual = path.fiber_residual(f);
    if residual > opts.fiber_tol {
        return Err(Error::Numeric(format!(
            "fiber residual {residual:.3e} exceeds tolerance after projection"
        )));
    }
    Ok(path)
}

/// Flow time for one return of the orbit through `seed` on `f = t`.
pub fn orbit_period(f: &BiPoly, t: f64, seed: Point, opts: &TraceOptions) -> Result<f64> {
    let fx = f.dx();
    let fy = f.dy();
    let rhs = |p: [f64; 2]| -> [f64; 2] { [fy.eval_f64(p[0], p[1]), -fx.eval_f64(p[0], p[1])] };
    let start = project_to_fiber_real(f, [seed.x.re, seed.y.re], t, opts.fiber_tol * 0.01)?;
    find_return(f, &rhs, start, t, opts).map(|(period, _)| period)
}

/// Shared return detection: integrates the Hamiltonian flow from `start`,
/// watching the Poincaré section through the seed (plane normal to the flow
/// direction there), and refines the crossing time by bisection. Returns
/// `(period, h_max)`.
fn find_return<F>(
    f: &BiPoly,
    rhs: &F,
    start: [f64; 2],
    t: f64,
    opts: &TraceOptions,
) -> Result<(f64, f64)>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let v0 = rhs(start);
    let speed0 = (v0[0] * v0[0] + v0[1] * v0[1]).sqrt();
    if speed0 < 1e-12 {
        return Err(Error::Numeric("seed sits at a critical point".into()));
    }
    let n_hat = [v0[0] / speed0, v0[1] / speed0];
    let sigma = |p: [f64; 2]| (p[0] - start[0]) * n_hat[0] + (p[1] - start[1]) * n_hat[1];
    let dist = |p: [f64; 2]| ((p[0] - start[0]).powi(2) + (p[1] - start[1]).powi(2)).sqrt();
    let scale = 1.0 + (start[0] * start[0] + start[1] * start[1]).sqrt();
    let h_max = 0.02 * scale / speed0.max(0.1);

    let mut max_dist = 0.0f64;
    let mut armed = false;
    let mut prev: (f64, [f64; 2]) = (0.0, start);
    let mut hit: Option<((f64, [f64; 2]), f64)> = None;
    let mut steps = 0usize;
    rk::integrate_adaptive(rhs, start, 1e6, opts.rk_tol, h_max, &mut |tau, y, _h| {
        steps += 1;
        if steps > opts.max_steps {
            return false;
        }
        let y = match project_to_fiber_real(f, y, t, opts.fiber_tol * 0.01) {
            Ok(p) => p,
            Err(_) => return false,
        };
        let d = dist(y);
        max_dist = max_dist.max(d);
        if !armed && d > 0.05 * scale {
            armed = true;
        }
        if armed && sigma(prev.1) < 0.0 && sigma(y) >= 0.0 && d < 0.25 * max_dist {
            hit = Some((prev, tau));
            return false;
        }
        prev = (tau, y);
        true
    });

    let ((tau0, p0), tau1) = hit.ok_or_else(|| {
        Error::Numeric(format!(
            "no return detected while tracing f = {t} (separatrix proximity or unbounded component?)"
        ))
    })?;

    // Bisect the crossing time within [tau0, tau1].
    let mut lo = 0.0f64;
    let mut hi = tau1 - tau0;
    let flow_from_p0 = |dt: f64| -> [f64; 2] {
        if dt <= 0.0 {
            return p0;
        }
        let n_sub = 16;
        let h = dt / n_sub as f64;
        let mut y = p0;
        for _ in 0..n_sub {
            y = rk::rk4_step(rhs, y, h);
        }
        project_to_fiber_real(f, y, t, opts.fiber_tol * 0.01).unwrap_or(y)
    };
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if sigma(flow_from_p0(mid)) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((tau0 + 0.5 * (lo + hi), h_max))
}

/// All real critical points of `f` inside `[−box_radius, box_radius]²`,
/// located by Newton iteration from a grid of starts and classified by the
/// Hessian signature.
pub fn critical_points(f: &BiPoly, box_radius: f64, grid: usize) -> Vec<CriticalPoint> {
    let fx = f.dx();
    let fy = f.dy();
    let fxx = fx.dx();
    let fxy = fx.dy();
    let fyy = fy.dy();
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 0..=grid {
        for j in 0..=grid {
            let mut x = -box_radius + 2.0 * box_radius * i as f64 / grid as f64;
            let mut y = -box_radius + 2.0 * box_radius * j as f64 / grid as f64;
            let mut ok = false;
            for _ in 0..60 {
                let gx = fx.eval_f64(x, y);
                let gy = fy.eval_f64(x, y);
                if gx.abs() + gy.abs() < 1e-12 {
                    ok = true;
                    break;
                }
                let a = fxx.eval_f64(x, y);
                let b = fxy.eval_f64(x, y);
                let d = fyy.eval_f64(x, y);
                let det = a * d - b * b;
                if det.abs() < 1e-14 {
                    break;
                }
                let dx = (-gx * d + gy * b) / det;
                let dy = (gx * b - gy * a) / det;
                x += dx;
                y += dy;
                if !x.is_finite() || !y.is_finite() || x.abs() + y.abs() > 100.0 * box_radius {
                    break;
                }
            }
            if ok && x.abs() <= box_radius && y.abs() <= box_radius {
                if !found
                    .iter()
                    .any(|&(px, py)| (px - x).abs() + (py - y).abs() < 1e-6)
                {
                    found.push((x, y));
                }
            }
        }
    }
    let mut out: Vec<CriticalPoint> = found
        .into_iter()
        .map(|(x, y)| {
            let a = fxx.eval_f64(x, y);
            let b = fxy.eval_f64(x, y);
            let d = fyy.eval_f64(x, y);
            let det = a * d - b * b;
            let scale = a.abs().max(d.abs()).max(b.abs()).max(1e-30);
            let kind = if det.abs() < 1e-8 * scale * scale {
                MorseType::NonMorse
            } else if det < 0.0 {
                MorseType::Saddle
            } else if a + d > 0.0 {
                MorseType::Minimum
            } else {
                MorseType::Maximum
            };
            CriticalPoint { point: Point::real(x, y), kind, value: f.eval_f64(x, y) }
        })
        .collect();
    out.sort_by(|p, q| {
        p.value
            .partial_cmp(&q.value)
            .unwrap()
            .then(p.point.x.re.partial_cmp(&q.point.x.re).unwrap())
            .then(p.point.y.re.partial_cmp(&q.point.y.re).unwrap())
    });
    out
}

/// Derivative of the interpolating polynomial through `(params, pts)` at
/// node index `at` (Lagrange differentiation, exact for the polynomial).
fn lagrange_derivative(params: &[f64], pts: &[Point], at: usize) -> Velocity {
    let n = params.len();
    let xc = params[at];
    let mut dx = Complex64::new(0.0, 0.0);
    let mut dy = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let w = if j == at {
            let mut sum = 0.0;
            for m in 0..n {
                if m != at {
                    sum += 1.0 / (xc - params[m]);
                }
            }
            sum
        } else {
            let mut num = 1.0;
            for m in 0..n {
                if m != j && m != at {
                    num *= xc - params[m];
                }
            }
            let mut den = 1.0;
            for m in 0..n {
                if m != j {
                    den *= params[j] - params[m];
                }
            }
            num / den
        };
        dx += pts[j].x * w;
        dy += pts[j].y * w;
    }
    (dx, dy)
}

/// Winding number of a closed path around a real point (real projections).
pub fn winding_number(path: &Path, around: (f64, f64)) -> i32 {
    let mut total = 0.0f64;
    let pts: Vec<(f64, f64)> = path
        .samples
        .iter()
        .map(|(_, p)| (p.x.re - around.0, p.y.re - around.1))
        .collect();
    for w in pts.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        total += (x0 * y1 - y0 * x1).atan2(x0 * x1 + y0 * y1);
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i32
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn p(src: &str) -> BiPoly {
        parse_polynomial(src).unwrap()
    }

    #[test]
    fn critical_points_circle() {
        let pts = critical_points(&p("(x^2+y^2)/2"), 5.0, 16);
        assert_eq!(pts.len(), 1);
        assert!(matches!(pts[0].kind, MorseType::Minimum));
        assert!(pts[0].value.abs() < 1e-10);
    }

    #[test]
    fn critical_points_double_well() {
        let pts = critical_points(&p("y^2 + (x^2-1)^2"), 5.0, 24);
        assert_eq!(pts.len(), 3);
        let minima: Vec<_> = pts.iter().filter(|c| c.kind == MorseType::Minimum).collect();
        let saddles: Vec<_> = pts.iter().filter(|c| c.kind == MorseType::Saddle).collect();
        assert_eq!(minima.len(), 2);
        assert_eq!(saddles.len(), 1);
        assert!(minima.iter().all(|c| c.value.abs() < 1e-9));
        assert!((saddles[0].value - 1.0).abs() < 1e-9);
        assert!(saddles[0].point.x.norm() < 1e-6);
    }

    #[test]
    fn critical_points_cubic() {
        // f = x(y²−(x−3)²): center (1,0) with value −4 among the four points.
        let pts = critical_points(&p("x*(y^2-(x-3)^2)"), 6.0, 32);
        assert_eq!(pts.len(), 4);
        let center = pts
            .iter()
            .find(|c| (c.point.x.re - 1.0).abs() < 1e-7 && c.point.y.norm() < 1e-7)
            .expect("center near (1, 0)");
        assert!((center.value + 4.0).abs() < 1e-9);
        assert_eq!(center.kind, MorseType::Minimum);
    }

    #[test]
    fn transversal_circle() {
        let f = p("(x^2+y^2)/2");
        let spec = TransversalSpec::new((0.0, 0.0), (1.0, 0.0), (1e-6, 5.0));
        let pt = transversal_point(&f, &spec, 0.5).unwrap();
        assert!((pt.x.re - 1.0).abs() < 1e-10);
        assert!(pt.y.norm() < 1e-12);
    }

    #[test]
    fn transversal_double_well() {
        let f = p("y^2 + (x^2-1)^2");
        let spec = TransversalSpec::new((1.0, 0.0), (1.0, 0.0), (1e-9, 3.0));
        let t = 0.3f64;
        let pt = transversal_point(&f, &spec, t).unwrap();
        let expected = (1.0 + t.sqrt()).sqrt();
        assert!((pt.x.re - expected).abs() < 1e-10);
    }

    #[test]
    fn transversal_cubic_residual() {
        let f = p("x*(y^2-(x-3)^2)");
        let spec = TransversalSpec::new((1.0, 0.0), (1.0, 0.0), (1e-9, 1.999));
        let pt = transversal_point(&f, &spec, -2.0).unwrap();
        assert!((f.eval_f64(pt.x.re, pt.y.re) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn transversal_bracket_miss() {
        let f = p("(x^2+y^2)/2");
        let spec = TransversalSpec::new((0.0, 0.0), (1.0, 0.0), (0.1, 1.0));
        assert!(transversal_point(&f, &spec, 10.0).is_err());
    }

    #[test]
    fn trace_circle_geometry() {
        let f = p("(x^2+y^2)/2");
        let t = 0.5;
        let opts = TraceOptions::default();
        let path = trace_oval(&f, t, Point::real(1.0, 0.0), &opts).unwrap();
        assert!(path.closed);
        // radius-1 circle
        for (_, pt) in path.samples() {
            let r = (pt.x.re * pt.x.re + pt.y.re * pt.y.re).sqrt();
            assert!((r - 1.0).abs() < 1e-8);
        }
        // clockwise: shortly after the start at (1, 0) the orbit has y < 0
        assert!(path.samples()[1].1.y.re < 0.0);
        // period 2π
        let period = orbit_period(&f, t, Point::real(1.0, 0.0), &opts).unwrap();
        assert!((period - 2.0 * std::f64::consts::PI).abs() < 1e-8);
        assert!(path.fiber_residual(&f) < opts.fiber_tol);
    }

    #[test]
    fn trace_double_well_interior() {
        let f = p("y^2 + (x^2-1)^2");
        let opts = TraceOptions::default();
        let path = trace_oval(&f, 0.5, Point::real(1.3, 0.0), &opts).unwrap();
        assert!(path.fiber_residual(&f) < 1e-10);
        assert_eq!(winding_number(&path, (1.0, 0.0)), -1); // clockwise
        assert_eq!(winding_number(&path, (-1.0, 0.0)), 0);
    }

    #[test]
    fn trace_double_well_exterior_topology() {
        let f = p("y^2 + (x^2-1)^2");
        let opts = TraceOptions::default();
        let path = trace_oval(&f, 2.0, Point::real(1.6, 0.0), &opts).unwrap();
        // single exterior oval enclosing both centers
        assert_eq!(winding_number(&path, (1.0, 0.0)), winding_number(&path, (-1.0, 0.0)));
        assert_ne!(winding_number(&path, (1.0, 0.0)), 0);
    }

    #[test]
    fn trace_period_step_invariance() {
        let f = p("y^2 + (x^2-1)^2");
        let seed = Point::real(1.3, 0.0);
        let mut opts = TraceOptions::default();
        let p1 = orbit_period(&f, 0.5, seed, &opts).unwrap();
        opts.rk_tol = opts.rk_tol / 16.0;
        let p2 = orbit_period(&f, 0.5, seed, &opts).unwrap();
        assert!((p1 - p2).abs() / p1 < 1e-6);
    }

    #[test]
    fn reverse_is_involutive() {
        let path = Path::from_fn(64, Complex64::new(0.0, 0.0), false, |s| {
            Point::real(s, s * s)
        });
        let back = path.reverse().reverse();
        for (a, b) in path.samples().iter().zip(back.samples()) {
            assert!((a.0 - b.0).abs() < 1e-15);
            assert!(a.1.dist(&b.1) < 1e-15);
        }
    }

    #[test]
    fn concat_mismatch_errors() {
        let t = Complex64::new(0.0, 0.0);
        let l1 = Path::line(Point::real(0.0, 0.0), Point::real(1.0, 0.0), 8, t);
        let l2 = Path::line(Point::real(2.0, 0.0), Point::real(3.0, 0.0), 8, t);
        assert!(path_concat(&l1, &l2, 1e-8).is_err());
    }

    #[test]
    fn commutator_requires_common_basepoint() {
        let t = Complex64::new(0.0, 0.0);
        let a = Path::from_fn(32, t, true, |s| {
            let th = 2.0 * std::f64::consts::PI * s;
            Point::real(th.cos(), th.sin())
        });
        let b = Path::from_fn(32, t, true, |s| {
            let th = 2.0 * std::f64::consts::PI * s;
            Point::real(3.0 + th.cos(), th.sin())
        });
        assert!(commutator_path(&a, &b, 1e-8).is_err());
    }
}
