//! Synthetic fixtures with a free fundamental group.
//!
//! The fiber `y(x²−1) = 1` projects isomorphically to the twice-punctured
//! `x`-plane (punctures at ±1), so its fundamental group is free on two
//! generators. The polynomial forms `y(x±1) dx` restrict to `dx/(x∓1)` on
//! that fiber, giving residue-normalized periods: with `a` a loop around
//! `x = 1` and `b` around `x = −1`,
//!
//! ```text
//! ∮_a ω₁ = 2πi,  ∮_b ω₁ = 0,  ∮_a ω₂ = 0,  ∮_b ω₂ = 2πi.
//! ```
//!
//! Dividing by `period_scale = 2πi` makes the period matrix the identity,
//! which is what the commutator and lower-central-series identities expect.

use crate::forms::RationalOneForm;
use crate::geometry::{path_concat, Path, Point};
use crate::poly::{parse_polynomial, BiPoly};
use num_complex::Complex64;

/// Two loops with a common basepoint on the fiber `y(x²−1) = 1`, plus the
/// residue forms dual to them.
#[derive(Debug, Clone)]
pub struct PuncturedPlaneFixture {
    pub f: BiPoly,
    pub t: Complex64,
    /// Loop around the puncture `x = 1`.
    pub loop_a: Path,
    /// Loop around the puncture `x = −1`.
    pub loop_b: Path,
    /// `y(x+1) dx`: residue 1 at `x = 1` after dividing by `period_scale`.
    pub omega1: RationalOneForm,
    /// `y(x−1) dx`: residue 1 at `x = −1` after dividing by `period_scale`.
    pub omega2: RationalOneForm,
    /// `2πi`.
    pub period_scale: Complex64,
}

/// Builds the fixture with loops based at `x = basepoint_x` (kept away from
/// ±1). Each loop is three analytic pieces (approach segment, circle of
/// radius 0.4, return segment) with `samples` points per piece.
pub fn punctured_plane(basepoint_x: Complex64, samples: usize) -> PuncturedPlaneFixture {
    let f = parse_polynomial("y*(x^2-1)").unwrap();
    let t = Complex64::new(1.0, 0.0);
    let loop_a = puncture_loop(basepoint_x, Complex64::new(1.0, 0.0), samples, t);
    let loop_b = puncture_loop(basepoint_x, Complex64::new(-1.0, 0.0), samples, t);
    let omega1 = RationalOneForm::polynomial(parse_polynomial("y*(x+1)").unwrap(), BiPoly::zero());
    let omega2 = RationalOneForm::polynomial(parse_polynomial("y*(x-1)").unwrap(), BiPoly::zero());
    PuncturedPlaneFixture {
        f,
        t,
        loop_a,
        loop_b,
        omega1,
        omega2,
        period_scale: Complex64::new(0.0, 2.0 * std::f64::consts::PI),
    }
}

fn on_fiber(x: Complex64) -> Point {
    Point::new(x, (x * x - Complex64::new(1.0, 0.0)).finv())
}

fn puncture_loop(x0: Complex64, center: Complex64, samples: usize, t: Complex64) -> Path {
    let radius = 0.4;
    let toward = center - x0;
    let entry = center - toward / toward.norm() * radius;
    let seg_in = Path::from_fn(samples, t, false, |s| on_fiber(x0 + (entry - x0) * s));
    let theta0 = (entry - center).arg();
    let circle = Path::from_fn(samples, t, false, |s| {
        let th = theta0 + 2.0 * std::f64::consts::PI * s;
        on_fiber(center + Complex64::from_polar(radius, th))
    });
    let out = path_concat(&seg_in, &circle, 1e-12).unwrap();
    path_concat(&out, &seg_in.reverse(), 1e-12).unwrap()
}
