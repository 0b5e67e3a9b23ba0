//! Independent ground truth: integrate the perturbed foliation as a vector
//! field, sample the first-return map on the transversal, and extract the
//! leading order and coefficient by log-slope and Richardson fitting in ε.
//!
//! Nothing here touches the word recursion; agreement between the two routes
//! is the headline acceptance check.

use crate::francoise::Prepared;
use crate::geometry::transversal_point;
use crate::poly::{BiPoly, Rat};
use crate::rk;
use crate::{Error, Result};
use rayon::prelude::*;

/// One sampled return: `t′ = P(t, ε)`.
#[derive(Debug, Clone, Copy)]
pub struct ReturnSample {
    pub t: f64,
    pub eps: f64,
    pub t_return: f64,
    /// Crude integrator error scale (tolerance × flight time).
    pub err_est: f64,
}

/// Velocity of the field annihilating `df − εω`:
/// `(f_y − εQ, −f_x + εP)`.
pub fn perturbed_velocity(
    f: &BiPoly,
    p: &BiPoly,
    q: &BiPoly,
    eps: f64,
    at: (f64, f64),
) -> (f64, f64) {
    let (x, y) = at;
    (
        f.dy().eval_f64(x, y) - eps * q.eval_f64(x, y),
        -f.dx().eval_f64(x, y) + eps * p.eval_f64(x, y),
    )
}

/// Exact symbolic annihilation check: expands `⟨df − εω, v⟩` for a rational
/// `ε` and returns the (identically zero) polynomial.
pub fn annihilation_residual(f: &BiPoly, p: &BiPoly, q: &BiPoly, eps: &Rat) -> BiPoly {
    let vx = f.dy().sub(&q.scale(eps));
    let vy = f.dx().neg().add(&p.scale(eps));
    let lhs = f.dx().sub(&p.scale(eps)).mul(&vx);
    let rhs = f.dy().sub(&q.scale(eps)).mul(&vy);
    lhs.add(&rhs)
}

/// Integrates the perturbed field from `P₀(t)` until the next crossing of
/// the transversal ray in flow direction; `t′ = f(endpoint)`.
pub fn first_return(prep: &Prepared, eps: f64, t: f64) -> Result<ReturnSample> {
    let s = &prep.scenario;
    if eps.abs() > s.eps_cap {
        return Err(Error::Numeric(format!(
            "|ε| = {} exceeds the scenario cap {}",
            eps.abs(),
            s.eps_cap
        )));
    }
    let f = &s.f;
    let fx = f.dx();
    let fy = f.dy();
    let rhs = move |pt: [f64; 2]| -> [f64; 2] {
        [
            fy.eval_f64(pt[0], pt[1]) - eps * s.q.eval_f64(pt[0], pt[1]),
            -fx.eval_f64(pt[0], pt[1]) + eps * s.p.eval_f64(pt[0], pt[1]),
        ]
    };

    let p0 = transversal_point(f, &s.transversal, t)?;
    let start = [p0.x.re, p0.y.re];
    let dir = s.transversal.dir;
    let center = s.transversal.center;
    // signed distance from the ray's line; positive side chosen by the flow
    let sigma = |p: [f64; 2]| dir.0 * (p[1] - center.1) - dir.1 * (p[0] - center.0);
    let along = |p: [f64; 2]| dir.0 * (p[0] - center.0) + dir.1 * (p[1] - center.1);

    let v0 = rhs(start);
    let speed0 = (v0[0] * v0[0] + v0[1] * v0[1]).sqrt();
    if speed0 < 1e-12 {
        return Err(Error::Numeric("transversal point sits at equilibrium".into()));
    }
    // direction in which the flow crosses the ray at departure
    let cross0 = dir.0 * v0[1] - dir.1 * v0[0];
    if cross0.abs() < 1e-12 * speed0 {
        return Err(Error::Numeric("flow is tangent to the transversal ray".into()));
    }
    let sgn = cross0.signum();
    let scale = 1.0 + (start[0] * start[0] + start[1] * start[1]).sqrt();
    let h_max = 0.02 * scale / speed0.max(0.1);
    let rk_tol = 1e-13;

    let mut armed = false;
    let mut max_dist = 0.0f64;
    let mut prev: (f64, [f64; 2]) = (0.0, start);
    let mut hit: Option<((f64, [f64; 2]), f64)> = None;
    let dist = |p: [f64; 2]| ((p[0] - start[0]).powi(2) + (p[1] - start[1]).powi(2)).sqrt();
    let flight = rk::integrate_adaptive(&rhs, start, 1e5, rk_tol, h_max, &mut |tau, y, _| {
        if y[0].abs() + y[1].abs() > 1e6 {
            return false; // runaway trajectory, no return
        }
        let d = dist(y);
        max_dist = max_dist.max(d);
        if !armed && d > 0.05 * scale {
            armed = true;
        }
        if armed
            && sigma(prev.1) * sgn < 0.0
            && sigma(y) * sgn >= 0.0
            && along(y) > 0.0
            && d < 0.35 * max_dist
        {
            hit = Some((prev, tau));
            return false;
        }
        prev = (tau, y);
        true
    });

    let ((tau0, pa), tau1) = hit.ok_or_else(|| {
        Error::Numeric(format!(
            "no return within budget at t = {t}, ε = {eps} (flight time {flight:.1})"
        ))
    })?;

    // Bisection on σ along the flow, refined to ~1e−12 of arclength.
    let mut lo = 0.0f64;
    let mut hi = tau1 - tau0;
    let flow_from = |dt: f64| -> [f64; 2] {
        if dt <= 0.0 {
            return pa;
        }
        let n_sub = 24;
        let h = dt / n_sub as f64;
        let mut y = pa;
        for _ in 0..n_sub {
            y = rk::rk4_step(&rhs, y, h);
        }
        y
    };
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if sigma(flow_from(mid)) * sgn < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let endpoint = flow_from(0.5 * (lo + hi));
    let t_return = f.eval_f64(endpoint[0], endpoint[1]);
    Ok(ReturnSample { t, eps, t_return, err_est: rk_tol * (tau0 + hi).max(1.0) })
}

/// Result of the ε-fit at a single `t`.
#[derive(Debug, Clone)]
pub enum OracleEstimate {
    /// Displacements below the integrator noise floor for every ε.
    NoSignal,
    Order {
        k: usize,
        /// Extrapolated `M_k(t)`.
        value: f64,
        /// Spread of the Richardson extrapolants plus the noise floor.
        uncertainty: f64,
        /// Raw log–log slope before rounding.
        slope: f64,
    },
}

/// Leading order and coefficient of `t′ − t` from a geometric ε-grid:
/// the order from the log–log slope rounded to the nearest integer, the
/// value by one Richardson elimination of the next-order term.
pub fn richardson_mk(prep: &Prepared, t: f64, eps_grid: &[f64], k_max: usize) -> Result<OracleEstimate> {
    if eps_grid.len() < 4 {
        return Err(Error::Unsupported("richardson fit needs at least 4 ε values".into()));
    }
    let samples: Result<Vec<ReturnSample>> = eps_grid
        .par_iter()
        .map(|&eps| first_return(prep, eps, t))
        .collect();
    let samples = samples?;
    let floor = 5e-11 * (1.0 + t.abs());
    let displacements: Vec<f64> = samples.iter().map(|s| s.t_return - s.t).collect();
    if displacements.iter().all(|d| d.abs() < floor) {
        return Ok(OracleEstimate::NoSignal);
    }

    // log–log slope by least squares over the usable points
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .zip(&displacements)
        .filter(|(_, d)| d.abs() > floor)
        .map(|(s, d)| (s.eps.ln(), d.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(OracleEstimate::NoSignal);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let k = slope.round().clamp(1.0, k_max as f64) as usize;

    // Richardson: m(ε) = M + Cε + O(ε²); with ratio ρ = ε_i/ε_{i+1}:
    // M ≈ (ρ·m(ε_{i+1}) − m(ε_i)) / (ρ − 1).
    let m: Vec<f64> = samples
        .iter()
        .zip(&displacements)
        .map(|(s, d)| d / s.eps.powi(k as i32))
        .collect();
    let mut extrap = Vec::new();
    for i in 0..m.len() - 1 {
        let rho = samples[i].eps / samples[i + 1].eps;
        if rho > 1.0 {
            extrap.push((rho * m[i + 1] - m[i]) / (rho - 1.0));
        }
    }
    let value = *extrap.last().unwrap();
    let spread = extrap
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let noise = floor / eps_grid.last().unwrap().powi(k as i32);
    Ok(OracleEstimate::Order { k, value, uncertainty: spread + noise, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_polynomial, ratio};
    use crate::scenario;

    fn p(src: &str) -> BiPoly {
        parse_polynomial(src).unwrap()
    }

    #[test]
    fn velocity_reduces_to_hamiltonian_at_zero() {
        let f = p("(x^2+y^2)/2");
        let v = perturbed_velocity(&f, &BiPoly::zero(), &BiPoly::x(), 0.0, (0.3, -0.4));
        assert_eq!(v, (-0.4, -0.3));
    }

    #[test]
    fn annihilation_is_exact() {
        // ⟨df − εω, (f_y − εQ, −f_x + εP)⟩ expands to the zero polynomial for
        // arbitrary rational ε and random-ish polynomials.
        let cases = [
            ("(x^2+y^2)/2", "0", "x"),
            ("x*(y^2-(x-3)^2)", "1 - x*y", "2 - x + x^2/2"),
            ("y^2 + (x^2-1)^2", "y^3 - x", "x^2*y + 1"),
        ];
        for (fs, ps, qs) in cases {
            for e in [ratio(3, 7), ratio(-5, 2), ratio(11, 13)] {
                let r = annihilation_residual(&p(fs), &p(ps), &p(qs), &e);
                assert!(r.is_zero(), "residual {r} for f = {fs}, ε = {e}");
            }
        }
    }

    #[test]
    fn zero_eps_returns_to_itself() {
        let prep = Prepared::new(scenario::bundled("circle").unwrap()).unwrap();
        for &t in &[0.2, 0.9, 1.7] {
            let s = first_return(&prep, 0.0, t).unwrap();
            assert!((s.t_return - t).abs() < 1e-10, "drift {}", s.t_return - t);
        }
    }

    #[test]
    fn circle_linear_displacement() {
        // t′ − t = −2πεt + O(ε²)
        let prep = Prepared::new(scenario::bundled("circle").unwrap()).unwrap();
        let t = 0.8;
        let eps = 1e-3;
        let s = first_return(&prep, eps, t).unwrap();
        let predicted = -2.0 * std::f64::consts::PI * eps * t;
        assert!(
            (s.t_return - t - predicted).abs() < 50.0 * eps * eps,
            "displacement {} vs {}",
            s.t_return - t,
            predicted
        );
    }

    #[test]
    fn huge_eps_is_rejected() {
        let prep = Prepared::new(scenario::bundled("circle").unwrap()).unwrap();
        assert!(first_return(&prep, 10.0, 0.5).is_err());
    }

    #[test]
    fn richardson_detects_circle_order() {
        let prep = Prepared::new(scenario::bundled("circle").unwrap()).unwrap();
        let t = 0.6;
        match richardson_mk(&prep, t, &prep.scenario.eps_grid, 4).unwrap() {
            OracleEstimate::Order { k, value, slope, .. } => {
                assert_eq!(k, 1);
                assert!((slope - 1.0).abs() < 0.05, "slope {slope}");
                let expect = -2.0 * std::f64::consts::PI * t;
                assert!((value - expect).abs() / expect.abs() < 1e-4, "value {value} vs {expect}");
            }
            other => panic!("expected an order, got {other:?}"),
        }
    }

    #[test]
    fn exact_perturbation_gives_no_signal() {
        // ω = df leaves the foliation unchanged.
        let mut s = scenario::bundled("circle").unwrap();
        let f = s.f.clone();
        s.p = f.dx();
        s.q = f.dy();
        let prep = Prepared::new(s).unwrap();
        match richardson_mk(&prep, 0.5, &prep.scenario.eps_grid, 4).unwrap() {
            OracleEstimate::NoSignal => {}
            other => panic!("expected no signal, got {other:?}"),
        }
    }
}
