//! Gradient-ideal certificates: an explicit multiplier `M(f)` together with
//! cofactors `a, b` such that `M(f) = a·f_x + b·f_y` holds as an exact
//! polynomial identity, plus the numeric critical values.
//!
//! The multiplier is derived from the minimal polynomial `m` of the
//! multiplication-by-`f` endomorphism on the quotient by the reduced gradient
//! ideal: `m` itself when it already lies in the gradient ideal (smaller
//! denominators), `squarefree(m)·m` otherwise.

use super::groebner::{groebner_basis, groebner_basis_with_transform, quotient_basis, reduce_with_cofactors, MonomialOrder};
use super::{poly_gcd, rat, BiPoly, Exp, Rat, UniPoly};
use crate::{Error, Result};
use num_complex::Complex64;
use num_traits::{One, Zero};

/// Certified decomposition of a gradient-ideal multiplier.
#[derive(Debug, Clone)]
pub struct GradientCertificate {
    /// The first integral the certificate belongs to.
    pub f: BiPoly,
    /// `gcd(f_x, f_y)`, monic.
    pub d: BiPoly,
    /// Minimal polynomial of multiplication by `f` on the reduced quotient.
    pub m: UniPoly,
    /// The certified multiplier: `M(f) = a·f_x + b·f_y`. Equals `m` when `m`
    /// alone already lies in the gradient ideal, `squarefree(m)·m` otherwise.
    pub multiplier: UniPoly,
    /// Cofactor on `f_x`.
    pub a: BiPoly,
    /// Cofactor on `f_y`.
    pub b: BiPoly,
    /// Numeric roots of `squarefree(m)`: the critical values of `f`.
    pub crit: Vec<Complex64>,
}

impl GradientCertificate {
    /// Real critical values, ascending.
    pub fn real_crit(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .crit
            .iter()
            .filter(|c| c.im.abs() < 1e-9)
            .map(|c| c.re)
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// Exact check of the defining identity; used freely in tests.
    pub fn identity_holds(&self) -> bool {
        let lhs = self.multiplier.eval_bipoly(&self.f);
        let rhs = self.a.mul(&self.f.dx()).add(&self.b.mul(&self.f.dy()));
        lhs == rhs
    }
}

/// Multiplication-by-`f` matrix on the quotient by the reduced gradient
/// ideal. Returns the monomial basis of the quotient and the matrix columns
/// (column `k` holds the coordinates of `f·basis[k]`).
pub fn quotient_multiplication_matrix(f: &BiPoly) -> Result<(Vec<Exp>, Vec<Vec<Rat>>)> {
    let order = MonomialOrder::GrevLex;
    let fx = f.dx();
    let fy = f.dy();
    if fx.is_zero() && fy.is_zero() {
        return Err(Error::Unsupported("constant polynomial has no gradient ideal".into()));
    }
    let d = poly_gcd(&fx, &fy);
    let u = fx.exact_div(&d).expect("gcd divides f_x");
    let v = fy.exact_div(&d).expect("gcd divides f_y");
    let gb = groebner_basis(&[u, v], order);
    let basis = quotient_basis(&gb, order).ok_or_else(|| {
        Error::Unsupported(
            "reduced gradient ideal is not zero-dimensional (non-isolated critical points)".into(),
        )
    })?;
    let n = basis.len();
    let mut cols = Vec::with_capacity(n);
    for &mono in &basis {
        let prod = f.mul(&BiPoly::monomial(mono, rat(1)));
        let (rem, _) = reduce_with_cofactors(&prod, &gb, order);
        let mut col = vec![Rat::zero(); n];
        for (&e, c) in rem.terms() {
            let idx = basis
                .iter()
                .position(|&b| b == e)
                .expect("normal form lies in the quotient basis");
            col[idx] = c.clone();
        }
        cols.push(col);
    }
    Ok((basis, cols))
}

/// Minimal polynomial of a square rational matrix given by columns, by exact
/// Gaussian elimination on the flattened powers `I, M, M², …`.
fn matrix_minimal_polynomial(cols: &[Vec<Rat>]) -> UniPoly {
    let n = cols.len();
    if n == 0 {
        // Zero-dimensional quotient (unit ideal): the endomorphism acts on
        // the zero space; its minimal polynomial is 1.
        return UniPoly::one();
    }
    // Row-echelon accumulator over vectors of length n².
    let mut rows: Vec<(usize, Vec<Rat>)> = Vec::new(); // (pivot index, reduced row)
    let mut combos: Vec<Vec<Rat>> = Vec::new(); // expression of each reduced row in powers
    let mut power: Vec<Vec<Rat>> = identity(n);
    for k in 0..=n {
        let mut vec = flatten(&power);
        let mut combo = vec![Rat::zero(); k + 1];
        combo[k] = rat(1);
        // Reduce against previous rows.
        for ((piv, row), c) in rows.iter().zip(&combos) {
            if !vec[*piv].is_zero() {
                let factor = vec[*piv].clone();
                for (a, b) in vec.iter_mut().zip(row) {
                    *a -= &factor * b;
                }
                for (i, coef) in c.iter().enumerate() {
                    if i < combo.len() {
                        combo[i] -= &factor * coef;
                    }
                }
            }
        }
        match vec.iter().position(|c| !c.is_zero()) {
            None => {
                // Dependency found: Σ combo[i]·M^i = 0, monic by construction.
                return UniPoly::from_coeffs(combo);
            }
            Some(piv) => {
                let inv = Rat::one() / vec[piv].clone();
                for a in vec.iter_mut() {
                    *a *= &inv;
                }
                let combo: Vec<Rat> = combo.iter().map(|c| c * &inv).collect();
                rows.push((piv, vec));
                combos.push(combo);
            }
        }
        power = mat_mul(&power, cols);
    }
    unreachable!("minimal polynomial has degree at most n")
}

fn identity(n: usize) -> Vec<Vec<Rat>> {
    (0..n)
        .map(|j| (0..n).map(|i| if i == j { rat(1) } else { Rat::zero() }).collect())
        .collect()
}

fn flatten(cols: &[Vec<Rat>]) -> Vec<Rat> {
    cols.iter().flat_map(|c| c.iter().cloned()).collect()
}

/// Column-major product `A·B` where both are given as columns.
fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let n = a.len();
    let mut out = vec![vec![Rat::zero(); n]; n];
    for (j, bcol) in b.iter().enumerate() {
        for (k, bk) in bcol.iter().enumerate() {
            if bk.is_zero() {
                continue;
            }
            for i in 0..n {
                let t = &a[k][i] * bk;
                out[j][i] += t;
            }
        }
    }
    out
}

/// Builds the gradient certificate of Proposition-style form for `f`.
///
/// Errors with [`Error::Unsupported`] when the reduced gradient ideal is not
/// zero-dimensional.
pub fn gradient_certificate(f: &BiPoly) -> Result<GradientCertificate> {
    let order = MonomialOrder::GrevLex;
    if f.is_constant() {
        return Err(Error::Unsupported("f must be nonconstant".into()));
    }
    let fx = f.dx();
    let fy = f.dy();
    let d = poly_gcd(&fx, &fy);
    let (_, cols) = quotient_multiplication_matrix(f)?;
    let m = matrix_minimal_polynomial(&cols);
    let s = m.squarefree_part();

    let gens = [fx, fy];
    let (gb, transform) = groebner_basis_with_transform(&gens, order);

    let certify = |mult: &UniPoly| -> Option<(BiPoly, BiPoly)> {
        let target = mult.eval_bipoly(f);
        let (rem, cof) = reduce_with_cofactors(&target, &gb, order);
        if !rem.is_zero() {
            return None;
        }
        // Pull the cofactors back through the basis transformation.
        let mut a = BiPoly::zero();
        let mut b = BiPoly::zero();
        for (c, row) in cof.iter().zip(&transform) {
            if c.is_zero() {
                continue;
            }
            a = a.add(&c.mul(&row[0]));
            b = b.add(&c.mul(&row[1]));
        }
        Some((a, b))
    };

    let (multiplier, a, b) = if let Some((a, b)) = certify(&m) {
        (m.clone(), a, b)
    } else {
        let big = s.mul(&m);
        match certify(&big) {
            Some((a, b)) => (big, a, b),
            None => {
                return Err(Error::Unsupported(
                    "gradient multiplier certification failed".into(),
                ))
            }
        }
    };

    let crit = s.roots_complex();
    let cert = GradientCertificate { f: f.clone(), d, m, multiplier, a, b, crit };
    debug_assert!(cert.identity_holds());
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn p(src: &str) -> BiPoly {
        parse_polynomial(src).unwrap()
    }

    fn uni(coeffs: &[i64]) -> UniPoly {
        UniPoly::from_coeffs(coeffs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn circle_certificate() {
        // f = (x²+y²)/2: m(λ) = λ and f = (x/2)·f_x + (y/2)·f_y.
        let f = p("(x^2 + y^2)/2");
        let cert = gradient_certificate(&f).unwrap();
        assert_eq!(cert.m, uni(&[0, 1]));
        assert_eq!(cert.multiplier, uni(&[0, 1]));
        assert!(cert.identity_holds());
        assert_eq!(cert.a, p("x/2"));
        assert_eq!(cert.b, p("y/2"));
        let crit = cert.real_crit();
        assert_eq!(crit.len(), 1);
        assert!(crit[0].abs() < 1e-12);
    }

    #[test]
    fn double_well_certificate() {
        // f = y² + (x²−1)²: multiplication matrix on {1, x, x²} gives
        // m(λ) = λ² − λ; critical values {0, 1}.
        let f = p("y^2 + (x^2-1)^2");
        let cert = gradient_certificate(&f).unwrap();
        assert_eq!(cert.m, uni(&[0, -1, 1]));
        assert!(cert.identity_holds());
        let crit = cert.real_crit();
        assert_eq!(crit.len(), 2);
        assert!(crit[0].abs() < 1e-9);
        assert!((crit[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cubic_certificate_crit_values() {
        // f = x(y²−(x−3)²): critical points (0,±3), (3,0) with value 0 and
        // (1,0) with value −4.
        let f = p("x*(y^2 - (x-3)^2)");
        let cert = gradient_certificate(&f).unwrap();
        assert!(cert.identity_holds());
        let crit = cert.real_crit();
        assert_eq!(crit.len(), 2);
        assert!((crit[0] + 4.0).abs() < 1e-9);
        assert!(crit[1].abs() < 1e-9);
    }

    #[test]
    fn multiplication_matrix_double_well() {
        let f = p("y^2 + (x^2-1)^2");
        let (basis, cols) = quotient_multiplication_matrix(&f).unwrap();
        assert_eq!(basis, vec![(0, 0), (1, 0), (2, 0)]);
        // f·1 ≡ 1 − x², f·x ≡ 0, f·x² ≡ 0 modulo (x³−x, y).
        assert_eq!(cols[0], vec![rat(1), rat(0), rat(-1)]);
        assert_eq!(cols[1], vec![rat(0); 3]);
        assert_eq!(cols[2], vec![rat(0); 3]);
    }

    #[test]
    fn minimal_poly_divides_characteristic() {
        // Faddeev–LeVerrier characteristic polynomial as the independent
        // check: m must divide it exactly.
        for src in ["(x^2+y^2)/2", "y^2 + (x^2-1)^2", "x*(y^2 - (x-3)^2)"] {
            let f = p(src);
            let (_, cols) = quotient_multiplication_matrix(&f).unwrap();
            let charpoly = faddeev_leverrier(&cols);
            let cert = gradient_certificate(&f).unwrap();
            assert!(
                charpoly.div_exact(&cert.m).is_some(),
                "minimal polynomial must divide the characteristic polynomial for {src}"
            );
        }
    }

    #[test]
    fn non_isolated_critical_points_rejected() {
        // f = (x²+y²)² has a single critical point but D = gcd nonconstant;
        // f = x² has a whole critical line: must be rejected.
        let err = gradient_certificate(&p("x^2")).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    /// Exact characteristic polynomial via the Faddeev–LeVerrier recursion.
    fn faddeev_leverrier(cols: &[Vec<Rat>]) -> UniPoly {
        let n = cols.len();
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[n] = rat(1);
        let mut mk = identity(n);
        for k in 1..=n {
            if k > 1 {
                mk = mat_mul(cols, &mk);
            } else {
                mk = cols.to_vec();
            }
            let c = -trace(&mk) / rat(k as i64);
            for j in 0..n {
                mk[j][j] += &c;
            }
            coeffs[n - k] = c;
        }
        UniPoly::from_coeffs(coeffs)
    }

    fn trace(cols: &[Vec<Rat>]) -> Rat {
        let mut t = Rat::zero();
        for (j, col) in cols.iter().enumerate() {
            t += &col[j];
        }
        t
    }
}
