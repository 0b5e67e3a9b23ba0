//! Empirical structure checks: integer monodromy of periods under analytic
//! continuation, moderate-growth exponents in sectors, and numeric detection
//! of the linear ODE annihilating a sampled family.

use crate::chen::iterated_integral;
use crate::forms::RationalOneForm;
use crate::geometry::{project_to_fiber_complex, Path, Point};
use crate::poly::BiPoly;
use crate::{Error, Result};
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

/// Result of transporting a cycle basis around a loop in the `t`-plane.
#[derive(Debug, Clone)]
pub struct MonodromyResult {
    /// Raw least-squares matrix: transported cycles in the original basis.
    pub raw: Vec<Vec<Complex64>>,
    /// Nearest-integer rounding of the real parts.
    pub rounded: Vec<Vec<i64>>,
    /// Largest deviation of any entry from its rounding (incl. imaginary).
    pub defect: f64,
    /// Determinant of the raw matrix.
    pub det: Complex64,
}

/// Period matrix `Π[i][j] = ∮_{cycle_j} form_i`.
fn period_matrix(forms: &[RationalOneForm], cycles: &[Path]) -> Result<Vec<Vec<Complex64>>> {
    let mut out = vec![vec![Complex64::new(0.0, 0.0); cycles.len()]; forms.len()];
    for (i, form) in forms.iter().enumerate() {
        for (j, cycle) in cycles.iter().enumerate() {
            out[i][j] = iterated_integral(cycle, std::slice::from_ref(form))?;
        }
    }
    Ok(out)
}

fn matrix_spread(m: &[Vec<Complex64>]) -> f64 {
    m.iter()
        .flat_map(|row| row.iter().map(|z| z.norm()))
        .fold(0.0, f64::max)
}

fn matrix_dist(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

/// Moves every sample of a cycle onto the fiber `f = t_new` by complex
/// Newton steps, then resamples by chord length to keep the sampling even.
fn transport_cycle(f: &BiPoly, cycle: &Path, t_new: Complex64, tol: f64) -> Result<Path> {
    let mut pts: Vec<Point> = Vec::with_capacity(cycle.num_samples());
    for (_, p) in cycle.samples() {
        pts.push(project_to_fiber_complex(f, *p, t_new, tol)?);
    }
    // chord-length reparameterization
    let mut cum = vec![0.0f64];
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + w[0].dist(&w[1]));
    }
    let total = *cum.last().unwrap();
    if total <= 0.0 {
        return Err(Error::Numeric("cycle degenerated during transport".into()));
    }
    let samples: Vec<(f64, Point)> = cum
        .iter()
        .zip(&pts)
        .map(|(&s, &p)| (s / total, p))
        .collect();
    let mut dedup: Vec<(f64, Point)> = Vec::with_capacity(samples.len());
    for (s, p) in samples {
        if dedup.last().map_or(true, |&(ls, _)| s > ls + 1e-12) {
            dedup.push((s, p));
        }
    }
    if let Some(last) = dedup.last_mut() {
        last.0 = 1.0;
    }
    let path = Path::from_samples(dedup, t_new, cycle.closed)?;
    // keep density uniform, then pin samples back onto the fiber
    let resampled = path.resample(cycle.num_samples() - 1);
    let mut fixed: Vec<(f64, Point)> = Vec::with_capacity(resampled.num_samples());
    for (s, p) in resampled.samples() {
        fixed.push((*s, project_to_fiber_complex(f, *p, t_new, tol)?));
    }
    Path::from_samples(fixed, t_new, cycle.closed)
}

/// Transports the cycle basis around a closed polygonal loop in the
/// `t`-plane and expresses the transported periods in the original basis by
/// least squares over the form basis.
///
/// Steps adaptively subdivide until the period change per step stays below
/// 10% of the base period spread (the cycle-tracking invariant).
pub fn continue_periods(
    f: &BiPoly,
    forms: &[RationalOneForm],
    cycles: &[Path],
    t_loop: &[Complex64],
) -> Result<MonodromyResult> {
    if forms.len() < cycles.len() {
        return Err(Error::Unsupported(
            "need at least as many forms as cycles for the least-squares solve".into(),
        ));
    }
    if t_loop.len() < 2 {
        return Err(Error::Unsupported("loop needs at least two points".into()));
    }
    let tol = 1e-12;
    let base = period_matrix(forms, cycles)?;
    let spread = matrix_spread(&base);
    if spread <= 0.0 {
        return Err(Error::Numeric("degenerate period basis".into()));
    }

    let mut current: Vec<Path> = cycles.to_vec();
    let mut prev_periods = base.clone();
    let mut legs: Vec<(Complex64, Complex64)> = t_loop
        .windows(2)
        .map(|w| (w[0], w[1]))
        .collect();
    // close the loop if the caller did not
    if (t_loop[0] - t_loop[t_loop.len() - 1]).norm() > 1e-12 {
        legs.push((t_loop[t_loop.len() - 1], t_loop[0]));
    }

    for (from, to) in legs {
        let mut done = 0.0f64;
        let mut step = 1.0f64;
        while done < 1.0 {
            let step_now = step.min(1.0 - done);
            let t_next = from + (to - from) * (done + step_now);
            let moved: Result<Vec<Path>> = current
                .iter()
                .map(|c| transport_cycle(f, c, t_next, tol))
                .collect();
            match moved {
                Ok(moved) => {
                    let periods = period_matrix(forms, &moved)?;
                    if matrix_dist(&periods, &prev_periods) > 0.10 * spread && step_now > 1.0 / 512.0 {
                        step = step_now / 2.0;
                        continue;
                    }
                    current = moved;
                    prev_periods = periods;
                    done += step_now;
                    step = (step_now * 2.0).min(1.0);
                }
                Err(_) if step_now > 1.0 / 512.0 => {
                    step = step_now / 2.0;
                }
                Err(e) => return Err(e),
            }
        }
    }

    let final_periods = period_matrix(forms, &current)?;
    // Solve base · A = final in the least-squares sense.
    let nf = forms.len();
    let nc = cycles.len();
    let a = DMatrix::<Complex<f64>>::from_fn(nf, nc, |i, j| Complex::new(base[i][j].re, base[i][j].im));
    let b = DMatrix::<Complex<f64>>::from_fn(nf, nc, |i, j| {
        Complex::new(final_periods[i][j].re, final_periods[i][j].im)
    });
    let svd = a.svd(true, true);
    let x = svd
        .solve(&b, 1e-12)
        .map_err(|e| Error::Numeric(format!("least-squares solve failed: {e}")))?;

    let raw: Vec<Vec<Complex64>> = (0..nc)
        .map(|i| (0..nc).map(|j| Complex64::new(x[(i, j)].re, x[(i, j)].im)).collect())
        .collect();
    let rounded: Vec<Vec<i64>> = raw
        .iter()
        .map(|row| row.iter().map(|z| z.re.round() as i64).collect())
        .collect();
    let defect = raw
        .iter()
        .flatten()
        .map(|z| (z.re - z.re.round()).abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    let det = {
        let m = DMatrix::<Complex<f64>>::from_fn(nc, nc, |i, j| Complex::new(raw[i][j].re, raw[i][j].im));
        let d = m.determinant();
        Complex64::new(d.re, d.im)
    };
    Ok(MonodromyResult { raw, rounded, defect, det })
}

/// Monodromy fixture for the symmetric double well `f = y² + (x²−1)²`:
/// cycle basis and a form basis whose period matrix separates it.
///
/// The basis holds the two real ovals around `(±1, 0)` *and* the cycle
/// vanishing at the saddle value `t = 1` (an oval with imaginary `y`,
/// prescribed analytically). Without the saddle cycle the transvection
/// around `t = 1` leaves the spanned lattice and no integer matrix exists.
/// The form basis mixes polynomial (area-type) forms with Gelfand–Leray
/// forms so the three period columns are independent.
pub fn double_well_basis(
    t0: f64,
    samples: usize,
) -> Result<(BiPoly, Vec<RationalOneForm>, Vec<Path>)> {
    use crate::forms::{gelfand_leray, RationalTwoForm};
    use crate::geometry::{trace_oval, TraceOptions};
    use crate::poly::{gradient_certificate, parse_polynomial};

    if !(0.0 < t0 && t0 < 1.0) {
        return Err(Error::Unsupported(
            "double-well basis needs a base value strictly between the critical values 0 and 1".into(),
        ));
    }
    let f = parse_polynomial("y^2 + (x^2-1)^2").unwrap();
    let cert = gradient_certificate(&f)?;
    let opts = TraceOptions { samples, ..TraceOptions::default() };
    let seed = (1.0 + t0.sqrt()).sqrt();
    let right = trace_oval(&f, t0, Point::real(seed, 0.0), &opts)?;
    let left = trace_oval(&f, t0, Point::real(-seed, 0.0), &opts)?;
    let saddle = double_well_saddle_cycle(t0, samples)?;

    let gl = gelfand_leray(&RationalTwoForm::polynomial(BiPoly::one()), &cert);
    let mut gl_x = gl.clone();
    gl_x.num_dx = gl_x.num_dx.mul(&BiPoly::x());
    gl_x.num_dy = gl_x.num_dy.mul(&BiPoly::x());
    let poly_form = |a: &str| {
        RationalOneForm::polynomial(parse_polynomial(a).unwrap(), BiPoly::zero())
    };
    let forms = vec![poly_form("y"), poly_form("x*y"), poly_form("x^2*y"), gl, gl_x];
    Ok((f, forms, vec![right, left, saddle]))
}

/// The cycle of `y² + (x²−1)² = t` vanishing at the saddle value `t = 1`:
/// for `0 < t < 1` it is the oval `v² = (x²−1)² − t`, `y = i·v`, over the
/// middle gap `|x| ≤ √(1−√t)`.
pub fn double_well_saddle_cycle(t: f64, samples: usize) -> Result<Path> {
    if !(0.0 < t && t < 1.0) {
        return Err(Error::Unsupported("saddle cycle exists for 0 < t < 1".into()));
    }
    let c = (1.0 - t.sqrt()).sqrt();
    Ok(Path::from_fn(samples, Complex64::new(t, 0.0), true, |s| {
        let th = 2.0 * std::f64::consts::PI * s;
        let x = c * th.cos();
        let v2 = ((x * x - 1.0).powi(2) - t).max(0.0);
        let v = th.sin().signum() * v2.sqrt();
        Point::new(Complex64::new(x, 0.0), Complex64::new(0.0, v))
    }))
}

/// Polygonal circle in the `t`-plane through `base` around `center`.
pub fn circle_loop(center: Complex64, base: Complex64, steps: usize) -> Vec<Complex64> {
    let radius = (base - center).norm();
    let theta0 = (base - center).arg();
    (0..=steps)
        .map(|i| {
            let th = theta0 + 2.0 * std::f64::consts::PI * i as f64 / steps as f64;
            center + Complex64::from_polar(radius, th)
        })
        .collect()
}

/// Where the growth fit looks.
#[derive(Debug, Clone, Copy)]
pub enum GrowthTarget {
    /// Fit `log|F| ~ N·log|t|` for `t → ∞`.
    Infinity,
    /// Fit `log|F| ~ −N·log|t − t₀|` for `t → t₀`.
    Point(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthFit {
    /// Fitted exponent `N₀`: growth like `|t|^N₀` at ∞ or `|t−t₀|^{−N₀}`.
    pub exponent: f64,
    pub r_squared: f64,
    /// Set when the local slopes diverge toward the target: the samples are
    /// incompatible with moderate (power-law) growth.
    pub non_moderate: bool,
    /// Samples actually used after floor exclusion.
    pub used: usize,
}

/// Least-squares growth exponent from `(t, |F(t)|)` samples.
pub fn growth_exponent(samples: &[(f64, f64)], target: GrowthTarget) -> Result<GrowthFit> {
    let finite: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(t, v)| t.is_finite() && v.is_finite())
        .collect();
    let max_f = finite.iter().map(|s| s.1).fold(0.0, f64::max);
    // absolute noise floor: quadrature noise sits around 1e−12 at unit scale
    let floor = 1e-12;
    if max_f <= floor {
        return Err(Error::Numeric("all samples vanish".into()));
    }
    let mut pts: Vec<(f64, f64)> = finite
        .iter()
        .filter(|(_, v)| *v > floor)
        .map(|&(t, v)| {
            let u = match target {
                GrowthTarget::Infinity => t.abs().ln(),
                GrowthTarget::Point(t0) => -(t - t0).abs().ln(),
            };
            (u, v.ln())
        })
        .collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pts.len() < 10 {
        return Err(Error::Unsupported(format!(
            "growth fit needs at least 10 usable samples, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return Err(Error::Numeric("degenerate abscissae in growth fit".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    let mean = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean).powi(2)).sum();
    let r_squared = if ss_tot < 1e-18 { 1.0 } else { 1.0 - ss_res / ss_tot };

    // local slopes toward the target
    let local: Vec<f64> = pts
        .windows(2)
        .filter(|w| (w[1].0 - w[0].0).abs() > 1e-12)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let mut sorted = local.clone();
    sorted.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    let median = sorted.get(sorted.len() / 2).copied().unwrap_or(0.0).abs();
    let last = local.last().copied().unwrap_or(0.0).abs();
    let non_moderate = last > 50.0 || (last > 10.0 && last > 3.0 * median.max(0.1));

    Ok(GrowthFit { exponent: slope, r_squared, non_moderate, used: pts.len() })
}

/// A detected annihilating ODE `Σ_{i≤n} p_i(t) F^{(i)} = 0`.
#[derive(Debug, Clone)]
pub struct OdeFit {
    pub order: usize,
    /// `coeffs[i]` holds `p_i` low-degree first, scale-normalized so the
    /// largest coefficient is 1.
    pub coeffs: Vec<Vec<f64>>,
    /// Smallest singular value of the column-normalized collocation matrix,
    /// per row.
    pub residual: f64,
}

impl OdeFit {
    /// Pretty form like `(t)·F' + (-1)·F = 0`.
    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for (i, p) in self.coeffs.iter().enumerate().rev() {
            if p.iter().all(|c| c.abs() < 1e-9) {
                continue;
            }
            let poly: Vec<String> = p
                .iter()
                .enumerate()
                .filter(|(_, c)| c.abs() > 1e-9)
                .map(|(d, c)| match d {
                    0 => format!("{c:.4}"),
                    1 => format!("{c:.4}*t"),
                    _ => format!("{c:.4}*t^{d}"),
                })
                .collect();
            let deriv = match i {
                0 => "F".to_string(),
                1 => "F'".to_string(),
                i => format!("F^({i})"),
            };
            parts.push(format!("({})*{}", poly.join(" + "), deriv));
        }
        format!("{} = 0", parts.join(" + "))
    }
}

/// Sliding quartic derivatives (window of 9 points) for interior samples.
/// Returns `(t_j, [F, F', …, F^(max_order)])` per usable point.
fn local_derivatives(samples: &[(f64, f64)], max_order: usize) -> Vec<(f64, Vec<f64>)> {
    const HALF: usize = 4;
    let n = samples.len();
    let mut out = Vec::new();
    if n < 2 * HALF + 1 {
        return out;
    }
    for j in HALF..n - HALF {
        let t_j = samples[j].0;
        let h_w = (samples[j + HALF].0 - samples[j - HALF].0) / 2.0;
        // least squares quartic in ξ = (t − t_j)/h_w
        let rows = 2 * HALF + 1;
        let mut a = DMatrix::<f64>::zeros(rows, 5);
        let mut b = DMatrix::<f64>::zeros(rows, 1);
        for (r, idx) in (j - HALF..=j + HALF).enumerate() {
            let xi = (samples[idx].0 - t_j) / h_w;
            let mut pw = 1.0;
            for c in 0..5 {
                a[(r, c)] = pw;
                pw *= xi;
            }
            b[(r, 0)] = samples[idx].1;
        }
        let svd = a.svd(true, true);
        if let Ok(c) = svd.solve(&b, 1e-300) {
            let mut ders = Vec::with_capacity(max_order + 1);
            let mut fact = 1.0;
            for i in 0..=max_order.min(4) {
                if i > 0 {
                    fact *= i as f64;
                }
                ders.push(c[(i, 0)] * fact / h_w.powi(i as i32));
            }
            out.push((t_j, ders));
        }
    }
    out
}

/// Searches for the minimal order `n ≤ n_max` such that some nonzero
/// combination `Σ p_i(t)·F^{(i)}` with `deg p_i ≤ d_max` vanishes on the
/// samples with residual below `threshold`. Returns `None` when nothing
/// qualifies ("none found" is not an error).
pub fn detect_linear_ode(
    samples: &[(f64, f64)],
    n_max: usize,
    d_max: usize,
    threshold: f64,
) -> Result<Option<OdeFit>> {
    if n_max == 0 || n_max > 4 {
        return Err(Error::Unsupported("supported orders are 1..=4".into()));
    }
    let ders = local_derivatives(samples, n_max);
    let rows = ders.len();
    if rows < 2 * (n_max + 1) * (d_max + 1) {
        return Err(Error::Unsupported(format!(
            "not enough samples ({rows} usable) for the requested fit size"
        )));
    }
    for n in 1..=n_max {
        let cols = (n + 1) * (d_max + 1);
        let mut a = DMatrix::<f64>::zeros(rows, cols);
        for (r, (t, der)) in ders.iter().enumerate() {
            let mut col = 0;
            for i in 0..=n {
                let mut pw = 1.0;
                for _d in 0..=d_max {
                    a[(r, col)] = der[i] * pw;
                    pw *= t;
                    col += 1;
                }
            }
        }
        // column normalization
        let mut scales = vec![0.0f64; cols];
        for c in 0..cols {
            let norm = (0..rows).map(|r| a[(r, c)] * a[(r, c)]).sum::<f64>().sqrt();
            scales[c] = if norm > 0.0 { norm } else { 1.0 };
            for r in 0..rows {
                a[(r, c)] /= scales[c];
            }
        }
        let svd = a.clone().svd(true, true);
        let min_idx = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let sigma_min = svd.singular_values[min_idx];
        let residual = sigma_min / (rows as f64).sqrt();
        if residual < threshold {
            let vt = svd.v_t.as_ref().expect("requested V^T");
            let mut coeffs = vec![vec![0.0f64; d_max + 1]; n + 1];
            let mut col = 0;
            let mut max_abs = 0.0f64;
            for i in 0..=n {
                for d in 0..=d_max {
                    let v = vt[(min_idx, col)] / scales[col];
                    coeffs[i][d] = v;
                    max_abs = max_abs.max(v.abs());
                    col += 1;
                }
            }
            if max_abs > 0.0 {
                for p in coeffs.iter_mut() {
                    for c in p.iter_mut() {
                        *c /= max_abs;
                    }
                }
            }
            // the leading coefficient must not vanish identically
            if coeffs[n].iter().all(|c| c.abs() < 1e-7) {
                continue;
            }
            return Ok(Some(OdeFit { order: n, coeffs, residual }));
        }
    }
    Ok(None)
}
