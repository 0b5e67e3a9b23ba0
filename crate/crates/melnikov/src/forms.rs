//! Rational differential forms relative to a fixed first integral `f`.
//!
//! One-forms are stored as `(A dx + B dy)/q(f)` and two-forms as
//! `N dx∧dy / q(f)` with polynomial numerators and a univariate denominator
//! evaluated at `f`. Denominator roots are critical values of the ambient
//! `f`, so every form here is analytic on regular fibers.

use crate::poly::{BiPoly, GradientCertificate, Rat, UniPoly};
use crate::{Error, Result};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

/// `(num_dx dx + num_dy dy) / den(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalOneForm {
    pub num_dx: BiPoly,
    pub num_dy: BiPoly,
    pub den: UniPoly,
}

/// `num dx∧dy / den(f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTwoForm {
    pub num: BiPoly,
    pub den: UniPoly,
}

impl RationalOneForm {
    /// Polynomial one-form `A dx + B dy`.
    pub fn polynomial(num_dx: BiPoly, num_dy: BiPoly) -> Self {
        RationalOneForm { num_dx, num_dy, den: UniPoly::one() }
    }

    /// The exact form `df`.
    pub fn differential(f: &BiPoly) -> Self {
        RationalOneForm::polynomial(f.dx(), f.dy())
    }

    pub fn is_zero(&self) -> bool {
        self.num_dx.is_zero() && self.num_dy.is_zero()
    }

    pub fn neg(&self) -> Self {
        RationalOneForm { num_dx: self.num_dx.neg(), num_dy: self.num_dy.neg(), den: self.den.clone() }
    }

    /// Adds the polynomial one-form `h·df` (a Gelfand–Leray representative
    /// shift; such shifts span the kernel of `df ∧ ·`).
    pub fn plus_multiple_of_df(&self, h: &BiPoly, f: &BiPoly) -> Self {
        let denf = self.den.eval_bipoly(f);
        RationalOneForm {
            num_dx: self.num_dx.add(&h.mul(&f.dx()).mul(&denf)),
            num_dy: self.num_dy.add(&h.mul(&f.dy()).mul(&denf)),
            den: self.den.clone(),
        }
        .normalized()
    }

    /// Denominator evaluated on the fiber `f = t`; errors if it vanishes
    /// there (the form is singular on that fiber).
    pub fn den_at(&self, t: Complex64) -> Result<Complex64> {
        let d = self.den.eval_complex(t);
        if d.norm() < 1e-300 {
            return Err(Error::Numeric(format!(
                "one-form denominator vanishes on the fiber t = {t}"
            )));
        }
        Ok(d)
    }

    /// Divides out the common rational content and normalizes the
    /// denominator monic. No polynomial cancellation is attempted.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return RationalOneForm {
                num_dx: BiPoly::zero(),
                num_dy: BiPoly::zero(),
                den: UniPoly::one(),
            };
        }
        let mut out = self.clone();
        let lc = out.den.leading();
        if !lc.is_one() && !lc.is_zero() {
            let inv = Rat::one() / lc;
            out.den = out.den.scale(&inv);
            out.num_dx = out.num_dx.scale(&inv);
            out.num_dy = out.num_dy.scale(&inv);
        }
        let c = rational_gcd(&out.num_dx.content(), &out.num_dy.content());
        if !c.is_zero() && !c.is_one() {
            let inv = Rat::one() / c;
            out.num_dx = out.num_dx.scale(&inv);
            out.num_dy = out.num_dy.scale(&inv);
            out.den = out.den.scale(&inv);
        }
        out
    }
}

impl RationalTwoForm {
    pub fn polynomial(num: BiPoly) -> Self {
        RationalTwoForm { num, den: UniPoly::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Exact equality as rational forms: cross-multiplied numerators agree
    /// after substituting `f` into the denominators.
    pub fn equivalent(&self, other: &Self, f: &BiPoly) -> bool {
        let lhs = self.num.mul(&other.den.eval_bipoly(f));
        let rhs = other.num.mul(&self.den.eval_bipoly(f));
        lhs == rhs
    }
}

fn rational_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let n = big_gcd(a.numer().clone(), b.numer().clone());
    let l = a.denom() / big_gcd(a.denom().clone(), b.denom().clone()) * b.denom();
    Rat::new(n, l).abs()
}

fn big_gcd(mut a: num_bigint::BigInt, mut b: num_bigint::BigInt) -> num_bigint::BigInt {
    a = a.abs();
    b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Exterior derivative of `ω = (A dx + B dy)/q(f)`:
/// `dω = [(B_x − A_y)·q(f) − q'(f)·(f_x B − f_y A)] dx∧dy / q(f)²`.
pub fn exterior_derivative(omega: &RationalOneForm, f: &BiPoly) -> RationalTwoForm {
    let a = &omega.num_dx;
    let b = &omega.num_dy;
    let curl = b.dx().sub(&a.dy());
    if omega.den.degree() == 0 {
        // constant denominator: d(η/c) = dη/c
        let c = omega.den.leading();
        return RationalTwoForm { num: curl, den: UniPoly::constant(c) };
    }
    let q_f = omega.den.eval_bipoly(f);
    let qp_f = omega.den.derivative().eval_bipoly(f);
    let cross = f.dx().mul(b).sub(&f.dy().mul(a));
    let num = curl.mul(&q_f).sub(&qp_f.mul(&cross));
    RationalTwoForm { num, den: omega.den.mul(&omega.den) }
}

/// Antisymmetric wedge `ω₁ ∧ ω₂ = (A₁B₂ − B₁A₂) dx∧dy / (q₁q₂)(f)`.
pub fn wedge(o1: &RationalOneForm, o2: &RationalOneForm) -> RationalTwoForm {
    let num = o1.num_dx.mul(&o2.num_dy).sub(&o1.num_dy.mul(&o2.num_dx));
    RationalTwoForm { num, den: o1.den.mul(&o2.den) }
}

/// Wedge of `df` with a rational one-form.
pub fn wedge_df(f: &BiPoly, omega: &RationalOneForm) -> RationalTwoForm {
    wedge(&RationalOneForm::differential(f), omega)
}

/// Pullback of a one-form along the transversal curve `τ: t ↦ P₀(t)`:
/// the function `R` with `(τ∘f)* ω = R(f) df`, evaluated at `t`.
///
/// With `τ(t) = center + s(t)·dir` and `f(τ(t)) = t`, the chain rule gives
/// `τ'(t) = dir / ⟨∇f(τ(t)), dir⟩`, so
///
/// ```text
/// R(t) = (A(P₀)·dir_x + B(P₀)·dir_y) / (den(t) · ⟨∇f(P₀), dir⟩).
/// ```
pub fn transversal_pullback(
    omega: &RationalOneForm,
    spec: &crate::geometry::TransversalSpec,
    f: &BiPoly,
    t: f64,
) -> crate::Result<f64> {
    let p0 = crate::geometry::transversal_point(f, spec, t)?;
    let (x, y) = (p0.x.re, p0.y.re);
    let den = omega.den.eval_f64(t);
    if den.abs() < 1e-300 {
        return Err(Error::Numeric(format!(
            "transversal pullback hits a singular fiber at t = {t}"
        )));
    }
    let grad_dot = f.dx().eval_f64(x, y) * spec.dir.0 + f.dy().eval_f64(x, y) * spec.dir.1;
    if grad_dot.abs() < 1e-300 {
        return Err(Error::Numeric("transversal is tangent to the fiber".into()));
    }
    let along = omega.num_dx.eval_f64(x, y) * spec.dir.0 + omega.num_dy.eval_f64(x, y) * spec.dir.1;
    Ok(along / (den * grad_dot))
}

/// Gelfand–Leray division: a one-form `ξ` with `df ∧ ξ = η` exactly.
///
/// Deterministic representative from the cofactor identity
/// `(a f_x + b f_y) dx∧dy = df ∧ (a dy − b dx)`: with `M(f) = a f_x + b f_y`
/// and `η = N dx∧dy / q(f)`,
///
/// ```text
/// ξ = (−b·N dx + a·N dy) / (q·M)(f).
/// ```
pub fn gelfand_leray(eta: &RationalTwoForm, cert: &GradientCertificate) -> RationalOneForm {
    if eta.is_zero() {
        return RationalOneForm::polynomial(BiPoly::zero(), BiPoly::zero());
    }
    let n = &eta.num;
    RationalOneForm {
        num_dx: cert.b.mul(n).neg(),
        num_dy: cert.a.mul(n),
        den: eta.den.mul(&cert.multiplier),
    }
    .normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{gradient_certificate, parse_polynomial, rat};

    fn p(src: &str) -> BiPoly {
        parse_polynomial(src).unwrap()
    }

    #[test]
    fn d_of_x_dy() {
        let omega = RationalOneForm::polynomial(BiPoly::zero(), BiPoly::x());
        let d = exterior_derivative(&omega, &p("x"));
        assert_eq!(d.num, BiPoly::one());
        assert_eq!(d.den.degree(), 0);
    }

    #[test]
    fn d_of_df_is_zero() {
        let f = p("x^3*y - 2*x + y^2");
        let d = exterior_derivative(&RationalOneForm::differential(&f), &f);
        assert!(d.is_zero());
    }

    #[test]
    fn closed_form_on_circle() {
        // f = (x²+y²)/2: (x dy − y dx)/(2f) is closed.
        let f = p("(x^2+y^2)/2");
        let omega = RationalOneForm {
            num_dx: p("-y"),
            num_dy: p("x"),
            den: UniPoly::from_coeffs(vec![rat(0), rat(2)]),
        };
        let d = exterior_derivative(&omega, &f);
        assert!(d.is_zero(), "got {}", d.num);
    }

    #[test]
    fn wedge_basics() {
        let dx = RationalOneForm::polynomial(BiPoly::one(), BiPoly::zero());
        let dy = RationalOneForm::polynomial(BiPoly::zero(), BiPoly::one());
        assert_eq!(wedge(&dx, &dy).num, BiPoly::one());
        let omega = RationalOneForm::polynomial(p("x^2 - y"), p("3*x*y"));
        assert!(wedge(&omega, &omega).is_zero());
        let o1 = RationalOneForm::polynomial(BiPoly::zero(), BiPoly::x());
        let o2 = RationalOneForm::polynomial(BiPoly::y(), BiPoly::zero());
        assert_eq!(wedge(&o1, &o2).num, p("-x*y"));
    }

    #[test]
    fn gelfand_leray_circle() {
        // η = dx∧dy on f = (x²+y²)/2 → (x dy − y dx)/(2f).
        let f = p("(x^2+y^2)/2");
        let cert = gradient_certificate(&f).unwrap();
        let eta = RationalTwoForm::polynomial(BiPoly::one());
        let gl = gelfand_leray(&eta, &cert);
        assert!(wedge_df(&f, &gl).equivalent(&eta, &f));
        // proportional to (x dy − y dx): A·x = −B·(−y) cross check
        assert_eq!(gl.num_dy.mul(&p("-y")), gl.num_dx.mul(&p("x")));
    }

    #[test]
    fn gelfand_leray_kernel_characterization() {
        // η = df ∧ ω for polynomial ω: df ∧ (GL(η) − ω) = 0.
        let f = p("y^2 + (x^2-1)^2");
        let cert = gradient_certificate(&f).unwrap();
        let omega = RationalOneForm::polynomial(p("x*y - 1"), p("y^2 + x"));
        let eta = wedge_df(&f, &omega);
        let gl = gelfand_leray(&eta, &cert);
        let diff = RationalOneForm {
            num_dx: gl.num_dx.sub(&omega.num_dx.mul(&gl.den.eval_bipoly(&f))),
            num_dy: gl.num_dy.sub(&omega.num_dy.mul(&gl.den.eval_bipoly(&f))),
            den: gl.den.clone(),
        };
        assert!(wedge_df(&f, &diff).num.is_zero());
    }

    /// Exact form of the denominator discipline: every irreducible factor
    /// of `den` divides the squarefree critical-value polynomial.
    fn den_roots_within_crit(den: &UniPoly, cert: &crate::poly::GradientCertificate) -> bool {
        let s = cert.m.squarefree_part();
        let mut rest = den.clone();
        loop {
            let g = rest.gcd(&s);
            if g.degree() == 0 {
                break;
            }
            rest = rest.div_exact(&g).expect("gcd divides");
        }
        rest.degree() == 0
    }

    #[test]
    fn gelfand_leray_double_well_denominator() {
        let f = p("y^2 + (x^2-1)^2");
        let cert = gradient_certificate(&f).unwrap();
        let eta = RationalTwoForm::polynomial(BiPoly::one());
        let gl = gelfand_leray(&eta, &cert);
        assert!(wedge_df(&f, &gl).equivalent(&eta, &f));
        assert!(den_roots_within_crit(&gl.den, &cert));
    }

    #[test]
    fn representative_shift_stays_in_kernel() {
        let f = p("y^2 + (x^2-1)^2");
        let cert = gradient_certificate(&f).unwrap();
        let eta = RationalTwoForm::polynomial(p("x + y^2"));
        let gl = gelfand_leray(&eta, &cert);
        let shifted = gl.plus_multiple_of_df(&p("1 - x*y"), &f);
        assert!(wedge_df(&f, &shifted).equivalent(&eta, &f));
    }

    #[test]
    fn transversal_pullback_circle() {
        use crate::geometry::TransversalSpec;
        // f = (x²+y²)/2, τ(t) = (√(2t), 0).
        let f = p("(x^2+y^2)/2");
        let spec = TransversalSpec::new((0.0, 0.0), (1.0, 0.0), (1e-9, 5.0));
        let xdy = RationalOneForm::polynomial(BiPoly::zero(), BiPoly::x());
        let ydx = RationalOneForm::polynomial(BiPoly::y(), BiPoly::zero());
        let xdx = RationalOneForm::polynomial(BiPoly::x(), BiPoly::zero());
        for &t in &[0.3, 0.7, 1.5] {
            // dy-component of τ′ vanishes
            assert!(transversal_pullback(&xdy, &spec, &f, t).unwrap().abs() < 1e-12);
            // y = 0 on τ
            assert!(transversal_pullback(&ydx, &spec, &f, t).unwrap().abs() < 1e-12);
            // d/dt (f∘τ) = t gives R ≡ 1 for x dx
            assert!((transversal_pullback(&xdx, &spec, &f, t).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_of_gl_keeps_denominator_discipline() {
        let f = p("y^2 + (x^2-1)^2");
        let cert = gradient_certificate(&f).unwrap();
        let eta = RationalTwoForm::polynomial(p("y - 2*x"));
        let gl = gelfand_leray(&eta, &cert);
        let d = exterior_derivative(&gl, &f);
        let gl2 = gelfand_leray(&d, &cert);
        assert!(den_roots_within_crit(&gl2.den, &cert));
    }
}
