//! Exact sparse polynomials over arbitrary-precision rationals.
//!
//! [`BiPoly`] is the bivariate workhorse holding `f`, the perturbation
//! coefficients `P, Q`, partials, cofactors and Gröbner data; [`UniPoly`] a
//! univariate companion (variable read as `f`, `t` or `λ` depending on
//! context) holding minimal polynomials and form denominators. All arithmetic
//! is exact: `(a + b) − b == a` identically.

mod certificate;
mod groebner;
mod parse;

pub use certificate::{gradient_certificate, quotient_multiplication_matrix, GradientCertificate};
pub use groebner::{
    groebner_basis, groebner_basis_with_transform, quotient_basis, reduce_with_cofactors,
    reduces_to_zero, MonomialOrder,
};
pub use parse::parse_polynomial;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Arbitrary-precision rational coefficient.
pub type Rat = BigRational;

/// `p/q` as a [`Rat`] from machine integers.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from numerator and denominator.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Lossy conversion to `f64` (always finite at the sizes used here).
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exponent pair `(i, j)` for the monomial `x^i y^j`.
pub type Exp = (u32, u32);

/// Sparse bivariate polynomial in `x, y` with rational coefficients.
///
/// Stored as a map from exponent pairs to nonzero coefficients; the `BTreeMap`
/// keeps iteration (and therefore printing and hashing of derived data)
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiPoly {
    terms: BTreeMap<Exp, Rat>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        BiPoly::constant(rat(1))
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = BiPoly::zero();
        p.add_term((0, 0), c);
        p
    }

    /// The variable `x`.
    pub fn x() -> Self {
        BiPoly::monomial((1, 0), rat(1))
    }

    /// The variable `y`.
    pub fn y() -> Self {
        BiPoly::monomial((0, 1), rat(1))
    }

    pub fn monomial(exp: Exp, coeff: Rat) -> Self {
        let mut p = BiPoly::zero();
        p.add_term(exp, coeff);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&e| e == (0, 0))
    }

    /// Number of stored (nonzero) terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exp: Exp) -> Rat {
        self.terms.get(&exp).cloned().unwrap_or_else(Rat::zero)
    }

    /// Adds `coeff · x^i y^j` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, exp: Exp, coeff: Rat) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &coeff;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&e, c) in &other.terms {
            out.add_term(e, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        BiPoly {
            terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                out.add_term((i1 + i2, j1 + j2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return BiPoly::zero();
        }
        BiPoly {
            terms: self.terms.iter().map(|(&e, k)| (e, k * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = BiPoly::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Partial derivative in `x`.
    pub fn dx(&self) -> Self {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.add_term((i - 1, j), c * rat(i as i64));
            }
        }
        out
    }

    /// Partial derivative in `y`.
    pub fn dy(&self) -> Self {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                out.add_term((i, j - 1), c * rat(j as i64));
            }
        }
        out
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|&(i, j)| i + j).max().unwrap_or(0)
    }

    pub fn deg_x(&self) -> u32 {
        self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> u32 {
        self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for (&(i, j), c) in &self.terms {
            acc += rat_to_f64(c) * x.powi(i as i32) * y.powi(j as i32);
        }
        acc
    }

    pub fn eval_complex(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&(i, j), c) in &self.terms {
            acc += x.powu(i) * y.powu(j) * rat_to_f64(c);
        }
        acc
    }

    pub fn eval_rat(&self, x: &Rat, y: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for (&(i, j), c) in &self.terms {
            let mut term = c.clone();
            for _ in 0..i {
                term *= x;
            }
            for _ in 0..j {
                term *= y;
            }
            acc += term;
        }
        acc
    }

    /// Substitutes `self` for `y` is nonsense here; this evaluates the
    /// polynomial at polynomial arguments, used for compositions like `m(f)`.
    pub fn eval_poly(&self, x: &BiPoly, y: &BiPoly) -> BiPoly {
        let mut acc = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            let term = x.pow(i).mul(&y.pow(j)).scale(c);
            acc = acc.add(&term);
        }
        acc
    }

    /// Exact division: returns `Some(q)` with `self = q·d` or `None` if `d`
    /// does not divide exactly. Division by zero returns `None`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        let order = MonomialOrder::GrevLex;
        let (dlt, dlc) = d.leading_term(order)?;
        let mut rem = self.clone();
        let mut quo = BiPoly::zero();
        while let Some((rlt, rlc)) = rem.leading_term(order) {
            if rlt.0 < dlt.0 || rlt.1 < dlt.1 {
                return None;
            }
            let m = (rlt.0 - dlt.0, rlt.1 - dlt.1);
            let c = &rlc / &dlc;
            quo.add_term(m, c.clone());
            rem = rem.sub(&d.mul(&BiPoly::monomial(m, c)));
        }
        Some(quo)
    }

    /// Leading term under `order`: `None` for the zero polynomial.
    pub fn leading_term(&self, order: MonomialOrder) -> Option<(Exp, Rat)> {
        self.terms
            .iter()
            .max_by(|a, b| order.cmp(*a.0, *b.0))
            .map(|(&e, c)| (e, c.clone()))
    }

    /// Divides by the leading coefficient under `order`.
    pub fn monic(&self, order: MonomialOrder) -> Self {
        match self.leading_term(order) {
            None => BiPoly::zero(),
            Some((_, lc)) => self.scale(&(Rat::one() / lc)),
        }
    }

    /// Largest rational `c` (up to sign) with `self / c` integral and
    /// content-free; used to keep cofactor coefficients small.
    pub fn content(&self) -> Rat {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_bigint_gcd(&num_gcd, c.numer());
            den_lcm = num_bigint_lcm(&den_lcm, c.denom());
        }
        if num_gcd.is_zero() {
            Rat::one()
        } else {
            Rat::new(num_gcd, den_lcm)
        }
    }

    /// Swaps the roles of x and y.
    pub fn swap_vars(&self) -> Self {
        BiPoly {
            terms: self.terms.iter().map(|(&(i, j), c)| ((j, i), c.clone())).collect(),
        }
    }

    /// Collects the coefficients of powers of `y`, each a polynomial in `x`
    /// alone (returned as univariate in `x`).
    pub fn coeffs_in_y(&self) -> Vec<UniPoly> {
        let dy = self.deg_y() as usize;
        let mut out = vec![UniPoly::zero(); dy + 1];
        for (&(i, j), c) in &self.terms {
            out[j as usize].add_term(i as usize, c.clone());
        }
        out
    }

    /// Builds a bivariate polynomial Σ coeffs[j](x)·y^j.
    pub fn from_coeffs_in_y(coeffs: &[UniPoly]) -> Self {
        let mut out = BiPoly::zero();
        for (j, c) in coeffs.iter().enumerate() {
            for (i, k) in c.coeffs.iter().enumerate() {
                out.add_term((i as u32, j as u32), k.clone());
            }
        }
        out
    }
}

fn num_bigint_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    use num_integer_gcd::gcd;
    gcd(a.abs(), b.abs())
}

fn num_bigint_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    let g = num_bigint_gcd(a, b);
    (a / &g * b).abs()
}

mod num_integer_gcd {
    use num_bigint::BigInt;
    use num_traits::Zero;

    pub fn gcd(mut a: BigInt, mut b: BigInt) -> BigInt {
        while !b.is_zero() {
            let r = &a % &b;
            a = b;
            b = r;
        }
        a
    }
}

/// Greatest common divisor of two bivariate polynomials, monic-normalized
/// under grevlex. `gcd(0, 0) = 0`; `gcd(0, p)` is `p` normalized.
///
/// Uses content/primitive-part recursion in `y` with a primitive
/// pseudo-remainder sequence, exact throughout.
pub fn poly_gcd(p: &BiPoly, q: &BiPoly) -> BiPoly {
    let g = poly_gcd_raw(p, q);
    g.monic(MonomialOrder::GrevLex)
}

fn poly_gcd_raw(p: &BiPoly, q: &BiPoly) -> BiPoly {
    if p.is_zero() {
        return q.clone();
    }
    if q.is_zero() {
        return p.clone();
    }
    if p.deg_y() == 0 && q.deg_y() == 0 {
        // Both univariate in x.
        let a = UniPoly::from_bipoly_x(p);
        let b = UniPoly::from_bipoly_x(q);
        return a.gcd(&b).to_bipoly_x();
    }
    if p.deg_y() == 0 {
        // gcd(p(x), q(x,y)) = gcd(p, content_y(q))
        let a = UniPoly::from_bipoly_x(p);
        let c = content_in_y(q);
        return a.gcd(&c).to_bipoly_x();
    }
    if q.deg_y() == 0 {
        return poly_gcd_raw(q, p);
    }
    // Both genuinely bivariate: treat as polynomials in y over Q[x].
    let cp = content_in_y(p);
    let cq = content_in_y(q);
    let content_gcd = cp.gcd(&cq);
    let pp = divide_content_y(p, &cp);
    let qq = divide_content_y(q, &cq);
    let prim = primitive_prs_y(&pp, &qq);
    prim.mul(&content_gcd.to_bipoly_x())
}

/// GCD over Q[x] of the y-coefficients.
fn content_in_y(p: &BiPoly) -> UniPoly {
    let mut g = UniPoly::zero();
    for c in p.coeffs_in_y() {
        g = g.gcd(&c);
    }
    g
}

fn divide_content_y(p: &BiPoly, c: &UniPoly) -> BiPoly {
    let coeffs: Vec<UniPoly> = p
        .coeffs_in_y()
        .iter()
        .map(|a| a.div_exact(c).expect("content divides"))
        .collect();
    BiPoly::from_coeffs_in_y(&coeffs)
}

/// Primitive pseudo-remainder sequence in `y` for y-primitive inputs.
fn primitive_prs_y(p: &BiPoly, q: &BiPoly) -> BiPoly {
    let (mut a, mut b) = if p.deg_y() >= q.deg_y() {
        (p.clone(), q.clone())
    } else {
        (q.clone(), p.clone())
    };
    loop {
        if b.is_zero() {
            let ca = content_in_y(&a);
            return divide_content_y(&a, &ca);
        }
        let r = pseudo_rem_y(&a, &b);
        a = b;
        b = if r.is_zero() {
            BiPoly::zero()
        } else {
            let cr = content_in_y(&r);
            divide_content_y(&r, &cr)
        };
    }
}

/// Pseudo-remainder of `a` by `b` as polynomials in `y` (lead(b)^k · a mod b).
fn pseudo_rem_y(a: &BiPoly, b: &BiPoly) -> BiPoly {
    let db = b.deg_y();
    let lead_b = b.coeffs_in_y()[db as usize].clone().to_bipoly_x();
    let mut r = a.clone();
    while !r.is_zero() && r.deg_y() >= db {
        let dr = r.deg_y();
        let lead_r = r.coeffs_in_y()[dr as usize].clone().to_bipoly_x();
        // r <- lead_b · r − lead_r · y^(dr−db) · b
        let shift = BiPoly::monomial((0, dr - db), rat(1));
        r = r.mul(&lead_b).sub(&b.mul(&shift).mul(&lead_r));
    }
    r
}

impl fmt::Display for BiPoly {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(w, "0");
        }
        // Highest terms first, grevlex.
        let mut terms: Vec<(&Exp, &Rat)> = self.terms.iter().collect();
        terms.sort_by(|a, b| MonomialOrder::GrevLex.cmp(*b.0, *a.0));
        for (idx, (&(i, j), c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(w, "-")?;
                }
            } else if neg {
                write!(w, " - ")?;
            } else {
                write!(w, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (i == 0 && j == 0) {
                factors.push(format_rat(&mag));
            }
            if i == 1 {
                factors.push("x".into());
            } else if i > 1 {
                factors.push(format!("x^{i}"));
            }
            if j == 1 {
                factors.push("y".into());
            } else if j > 1 {
                factors.push(format!("y^{j}"));
            }
            write!(w, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Dense univariate polynomial with rational coefficients, low degree first.
///
/// The variable is context-dependent: `f` for gradient multipliers and form
/// denominators, `t` for coefficient functions on the transversal, `λ` for
/// minimal polynomials. No trailing zero coefficients are stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    pub coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        UniPoly::constant(rat(1))
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = UniPoly { coeffs: vec![c] };
        p.normalize();
        p
    }

    /// The identity polynomial (the bare variable).
    pub fn var() -> Self {
        UniPoly { coeffs: vec![rat(0), rat(1)] }
    }

    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        let mut p = UniPoly { coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, deg: usize, c: Rat) {
        if c.is_zero() {
            return;
        }
        if self.coeffs.len() <= deg {
            self.coeffs.resize(deg + 1, Rat::zero());
        }
        self.coeffs[deg] += c;
        self.normalize();
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in other.coeffs.iter().enumerate() {
            out.add_term(d, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (d, c) in other.coeffs.iter().enumerate() {
            out.add_term(d, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        UniPoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return UniPoly::zero();
        }
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        UniPoly::from_coeffs(self.coeffs.iter().map(|k| k * c).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return UniPoly::zero();
        }
        UniPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * rat(i as i64 + 1))
                .collect(),
        )
    }

    /// Euclidean division `self = q·d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.clone();
        let mut q = UniPoly::zero();
        let dd = d.degree();
        let dl = d.leading();
        while !r.is_zero() && r.degree() >= dd {
            let shift = r.degree() - dd;
            let c = r.leading() / dl.clone();
            q.add_term(shift, c.clone());
            let mut sub = UniPoly::zero();
            for (i, k) in d.coeffs.iter().enumerate() {
                sub.add_term(i + shift, k * &c);
            }
            r = r.sub(&sub);
        }
        (q, r)
    }

    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if self.is_zero() {
            return Some(UniPoly::zero());
        }
        if d.is_zero() {
            return None;
        }
        let (q, r) = self.divrem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    /// Monic GCD by the Euclidean algorithm.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let lc = a.leading();
            a.scale(&(Rat::one() / lc))
        }
    }

    /// Squarefree part `self / gcd(self, self')`, monic.
    pub fn squarefree_part(&self) -> Self {
        if self.is_zero() {
            return UniPoly::zero();
        }
        let g = self.gcd(&self.derivative());
        let q = self.div_exact(&g).expect("gcd divides");
        let lc = q.leading();
        q.scale(&(Rat::one() / lc))
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + rat_to_f64(c);
        }
        acc
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + rat_to_f64(c);
        }
        acc
    }

    pub fn eval_rat(&self, t: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Substitutes a bivariate polynomial for the variable (e.g. `m(f)`).
    pub fn eval_bipoly(&self, f: &BiPoly) -> BiPoly {
        let mut acc = BiPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(f);
            acc.add_term((0, 0), c.clone());
        }
        acc
    }

    /// Reads a polynomial in `x` alone out of a `BiPoly`.
    pub fn from_bipoly_x(p: &BiPoly) -> Self {
        assert_eq!(p.deg_y(), 0, "polynomial depends on y");
        let mut out = UniPoly::zero();
        for (&(i, _), c) in p.terms() {
            out.add_term(i as usize, c.clone());
        }
        out
    }

    pub fn to_bipoly_x(&self) -> BiPoly {
        let mut out = BiPoly::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            out.add_term((i as u32, 0), c.clone());
        }
        out
    }

    /// Numeric roots via the companion matrix; deterministic for fixed input.
    pub fn roots_complex(&self) -> Vec<Complex64> {
        let n = self.degree();
        if self.is_zero() || n == 0 {
            return vec![];
        }
        let lc = rat_to_f64(&self.leading());
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, n - 1)] = -rat_to_f64(&self.coeffs[i]) / lc;
            if i + 1 < n {
                m[(i + 1, i)] = 1.0;
            }
        }
        let eig = m.complex_eigenvalues();
        let mut roots: Vec<Complex64> = eig.iter().map(|z| Complex64::new(z.re, z.im)).collect();
        roots.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        roots
    }

    /// Renders with the given variable name.
    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (deg, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let need_c = !mag.is_one() || deg == 0;
            if need_c {
                out.push_str(&format_rat(&mag));
            }
            if deg >= 1 {
                if need_c {
                    out.push('*');
                }
                out.push_str(var);
                if deg > 1 {
                    out.push_str(&format!("^{deg}"));
                }
            }
        }
        out
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(w, "{}", self.to_string_var("t"))
    }
}
