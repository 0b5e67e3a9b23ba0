//! Iterated path integrals and free-group combinatorics.
//!
//! The integral of a word `ω₁ω₂…ω_k` along a path follows the simplex
//! convention with the *last* entry innermost:
//!
//! ```text
//! ∫_l ω₁…ω_k = ∫_{0≤u_k≤…≤u₁≤1} g_k(u_k)…g_1(u_1) du_k…du_1,
//! ```
//!
//! so `∫ ω₁ω₂ = ∫ ω₁(s)·(∫₀^s ω₂)`. Evaluation runs a single pass over the
//! path segments, modelling each pullback by its quadratic interpolant and
//! updating the running inner integrals as exact polynomials per segment;
//! the scheme is deterministic and O(k·N) per word.

pub mod fixtures;

use crate::forms::RationalOneForm;
use crate::geometry::{path_concat, Path};
use crate::{Error, Result};
use num_complex::Complex64;

/// Ordered tuple of one-forms: the integrand of one iterated integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Word(pub Vec<RationalOneForm>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Iterated path integral of `entries` along `l` (see module docs for the
/// ordering convention). The empty word integrates to 1; length one is the
/// ordinary line integral.
pub fn iterated_integral(l: &Path, entries: &[RationalOneForm]) -> Result<Complex64> {
    let k = entries.len();
    if k == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    // Denominators are constant on the fiber.
    let mut inv_den = Vec::with_capacity(k);
    for form in entries {
        let d = form.den_at(l.t)?;
        inv_den.push(d.finv());
    }

    let segments = l.num_samples() - 1;
    // Running inner integrals J[m], m = 1..k (index m−1), J_{k+1} ≡ 1.
    let mut running = vec![Complex64::new(0.0, 0.0); k];
    // Per-segment polynomials in the local parameter u ∈ [0, 1].
    let mut polys: Vec<Vec<Complex64>> = vec![Vec::new(); k + 1];

    for seg in 0..segments {
        let data = l.segment_eval(seg);
        // Quadratic model of each pullback on this segment.
        let mut quads = Vec::with_capacity(k);
        for (j, form) in entries.iter().enumerate() {
            let g = |idx: usize| -> Complex64 {
                let (pt, (vx, vy)) = data[idx];
                (form.num_dx.eval_complex(pt.x, pt.y) * vx
                    + form.num_dy.eval_complex(pt.x, pt.y) * vy)
                    * inv_den[j]
            };
            let g0 = g(0);
            let gh = g(1);
            let g1 = g(2);
            let a = g0;
            let b = -3.0 * g0 + 4.0 * gh - g1;
            let c = 2.0 * g0 - 4.0 * gh + 2.0 * g1;
            quads.push([a, b, c]);
        }
        // P_{k+1} ≡ 1.
        polys[k].clear();
        polys[k].push(Complex64::new(1.0, 0.0));
        for m in (0..k).rev() {
            // Q = quad_m · P_{m+1}; P_m = J[m] + ∫₀ᵘ Q.
            let (head, tail) = polys.split_at_mut(m + 1);
            let inner = &tail[0];
            let q_len = inner.len() + 3;
            let pm = &mut head[m];
            pm.clear();
            pm.resize(q_len + 1, Complex64::new(0.0, 0.0));
            pm[0] = running[m];
            let quad = quads[m];
            for (i, ci) in inner.iter().enumerate() {
                for (d, qd) in quad.iter().enumerate() {
                    let deg = i + d;
                    let contrib = ci * qd / (deg as f64 + 1.0);
                    pm[deg + 1] += contrib;
                }
            }
        }
        // J updates: P_m(1).
        for m in 0..k {
            running[m] = polys[m].iter().sum();
        }
    }
    Ok(running[0])
}

/// Reduced word in a free group: letters are signed 1-based generator
/// indices; adjacent `g g⁻¹` pairs are cancelled on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeWord {
    letters: Vec<i32>,
}

impl FreeWord {
    pub fn new(letters: impl IntoIterator<Item = i32>) -> Result<Self> {
        let mut out: Vec<i32> = Vec::new();
        for l in letters {
            if l == 0 {
                return Err(Error::Unsupported("free-word letters are nonzero".into()));
            }
            if out.last().is_some_and(|&last| last == -l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Ok(FreeWord { letters: out })
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    /// `(α, β) = α⁻¹ β⁻¹ α β` on abstract words.
    pub fn commutator(a: &FreeWord, b: &FreeWord) -> FreeWord {
        let mut letters: Vec<i32> = Vec::new();
        letters.extend(a.letters.iter().rev().map(|l| -l));
        letters.extend(b.letters.iter().rev().map(|l| -l));
        letters.extend(&a.letters);
        letters.extend(&b.letters);
        FreeWord::new(letters).expect("letters already validated")
    }
}

/// Realizes a free word as a concrete path by concatenating generator loops
/// (inverses via reversal). All generators must share basepoint and fiber.
pub fn realize_free_word(word: &FreeWord, gens: &[Path], tol: f64) -> Result<Path> {
    if word.letters.is_empty() {
        return Err(Error::Unsupported("cannot realize the empty word".into()));
    }
    let piece = |l: i32| -> Result<Path> {
        let idx = (l.unsigned_abs() as usize)
            .checked_sub(1)
            .filter(|&i| i < gens.len())
            .ok_or_else(|| Error::Unsupported(format!("generator index {l} out of range")))?;
        Ok(if l > 0 { gens[idx].clone() } else { gens[idx].reverse() })
    };
    let mut path = piece(word.letters[0])?;
    for &l in &word.letters[1..] {
        path = path_concat(&path, &piece(l)?, tol)?;
    }
    Ok(path)
}

/// Möbius function by trial factorization. Errors on `n = 0`.
pub fn mobius(n: u64) -> Result<i64> {
    if n == 0 {
        return Err(Error::Unsupported("Möbius function needs n ≥ 1".into()));
    }
    let mut m = n;
    let mut primes = 0u32;
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return Ok(0);
            }
            primes += 1;
        }
        p += 1;
    }
    if m > 1 {
        primes += 1;
    }
    Ok(if primes % 2 == 0 { 1 } else { -1 })
}

/// Witt number `M_r(k) = (1/k) Σ_{d|k} μ(d) r^{k/d}`, exact.
pub fn witt_number(r: u64, k: u64) -> i128 {
    assert!(r >= 1 && k >= 1, "witt_number needs r, k ≥ 1");
    let mut sum: i128 = 0;
    for d in 1..=k {
        if k % d == 0 {
            let mu = mobius(d).expect("d ≥ 1") as i128;
            if mu != 0 {
                sum += mu * (r as i128).pow((k / d) as u32);
            }
        }
    }
    debug_assert_eq!(sum % k as i128, 0, "Witt sum must be divisible by k");
    sum / k as i128
}

/// `(Σ_{i=1}^k M_r(i), r^k)`: the dimension sum of the truncated lower
/// central series against its cap. The sum never exceeds the cap.
pub fn order_bound(r: u64, k: u64) -> (i128, i128) {
    let sum: i128 = (1..=k).map(|i| witt_number(r, i)).sum();
    let cap = (r as i128).pow(k as u32);
    debug_assert!(sum <= cap);
    (sum, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{commutator_path, Point};
    use crate::poly::BiPoly;

    fn dx_form() -> RationalOneForm {
        RationalOneForm::polynomial(BiPoly::one(), BiPoly::zero())
    }

    #[test]
    fn empty_and_simplex_volume() {
        let t = Complex64::new(0.0, 0.0);
        let seg = Path::line(Point::real(0.0, 0.0), Point::real(1.0, 0.0), 64, t);
        assert_eq!(iterated_integral(&seg, &[]).unwrap(), Complex64::new(1.0, 0.0));
        // ∫ dx dx over the unit segment = 1/2 (simplex volume).
        let v = iterated_integral(&seg, &[dx_form(), dx_form()]).unwrap();
        assert!((v.re - 0.5).abs() < 1e-12, "got {v}");
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn repeated_entries_power_rule() {
        // ∫ ω^k = (∫ω)^k / k! for k ≤ 5 on a wiggly open path.
        let t = Complex64::new(0.0, 0.0);
        let path = Path::from_fn(600, t, false, |s| {
            Point::real(s + 0.1 * (3.0 * s).sin(), 0.3 * (2.0 * s).cos())
        });
        let omega = RationalOneForm::polynomial(
            crate::poly::parse_polynomial("1 + y").unwrap(),
            crate::poly::parse_polynomial("x").unwrap(),
        );
        let single = iterated_integral(&path, &[omega.clone()]).unwrap();
        let mut fact = 1.0;
        for k in 1..=5usize {
            fact *= k as f64;
            let word = vec![omega.clone(); k];
            let v = iterated_integral(&path, &word).unwrap();
            let expect = single.powu(k as u32) / fact;
            assert!(
                (v - expect).norm() < 1e-8,
                "k = {k}: {v} vs {expect}"
            );
        }
    }

    #[test]
    fn residue_loop() {
        // On the punctured-plane fixture, ∮_a ω₁ = 2πi·1 and ∮_b ω₁ = 0.
        let fx = fixtures::punctured_plane(Complex64::new(0.0, 0.0), 800);
        let a1 = iterated_integral(&fx.loop_a, &[fx.omega1.clone()]).unwrap() / fx.period_scale;
        let b1 = iterated_integral(&fx.loop_b, &[fx.omega1.clone()]).unwrap() / fx.period_scale;
        assert!((a1 - Complex64::new(1.0, 0.0)).norm() < 1e-9, "got {a1}");
        assert!(b1.norm() < 1e-9, "got {b1}");
        let a2 = iterated_integral(&fx.loop_a, &[fx.omega2.clone()]).unwrap() / fx.period_scale;
        let b2 = iterated_integral(&fx.loop_b, &[fx.omega2.clone()]).unwrap() / fx.period_scale;
        assert!(a2.norm() < 1e-9);
        assert!((b2 - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn composition_rule_two_sided() {
        // ∫_{l₁l₂} w = Σ_i ∫_{l₂}(first i) ∫_{l₁}(rest) for words up to
        // length 4 built from the fixture forms.
        let fx = fixtures::punctured_plane(Complex64::new(0.0, 0.0), 700);
        let l1 = &fx.loop_a;
        let l2 = &fx.loop_b;
        let joined = path_concat(l1, l2, 1e-9).unwrap();
        let pool = [fx.omega1.clone(), fx.omega2.clone()];
        let mut pick = 0usize;
        for len in 1..=4usize {
            let word: Vec<RationalOneForm> = (0..len)
                .map(|i| {
                    pick = pick.wrapping_mul(31).wrapping_add(i + 1);
                    pool[pick % 2].clone()
                })
                .collect();
            let lhs = iterated_integral(&joined, &word).unwrap();
            let mut rhs = Complex64::new(0.0, 0.0);
            for i in 0..=len {
                let first = iterated_integral(l2, &word[..i]).unwrap();
                let rest = iterated_integral(l1, &word[i..]).unwrap();
                rhs += first * rest;
            }
            let scale = lhs.norm().max(1.0);
            assert!(
                (lhs - rhs).norm() / scale < 1e-8,
                "len {len}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn reversal_identity() {
        let fx = fixtures::punctured_plane(Complex64::new(0.0, 0.0), 700);
        let word = [fx.omega1.clone(), fx.omega2.clone(), fx.omega1.clone()];
        let rev_word = [fx.omega1.clone(), fx.omega2.clone(), fx.omega1.clone()];
        let lhs = iterated_integral(&fx.loop_a, &word).unwrap();
        let rhs = iterated_integral(&fx.loop_a.reverse(), &{
            let mut w = rev_word.to_vec();
            w.reverse();
            w
        })
        .unwrap();
        // ∫_l ω₁ω₂ω₃ = (−1)³ ∫_{l⁻¹} ω₃ω₂ω₁
        assert!((lhs + rhs).norm() < 1e-8, "{lhs} vs {rhs}");
    }

    #[test]
    fn reparameterization_invariance() {
        let fx = fixtures::punctured_plane(Complex64::new(0.0, 0.0), 900);
        let word = [fx.omega1.clone(), fx.omega2.clone()];
        let base = iterated_integral(&fx.loop_a, &word).unwrap();
        // double density
        let dense = fx.loop_a.resample(2 * (fx.loop_a.num_samples() - 1));
        let v1 = iterated_integral(&dense, &word).unwrap();
        assert!((v1 - base).norm() < 1e-8, "dense: {v1} vs {base}");
        // fixed non-uniform warp
        let warped = fx
            .loop_a
            .reparameterize(2000, |s| s + 0.08 * (std::f64::consts::PI * s).sin() * s * (1.0 - s) * 4.0);
        let v2 = iterated_integral(&warped, &word).unwrap();
        assert!((v2 - base).norm() < 1e-8, "warped: {v2} vs {base}");
    }

    #[test]
    fn length_one_vanishes_on_cancelling_word() {
        // a·a⁻¹ reduces to nothing: realize the unreduced concatenation and
        // check length-1 integrals cancel.
        let fx = fixtures::punctured_plane(Complex64::new(0.0, 0.0), 600);
        let path = path_concat(&fx.loop_a, &fx.loop_a.reverse(), 1e-9).unwrap();
        let v = iterated_integral(&path, &[fx.omega1.clone()]).unwrap();
        assert!(v.norm() < 1e-9);
        // and FreeWord::new reduces it away entirely
        let w = FreeWord::new([1, -1]).unwrap();
        assert!(w.letters().is_empty());
    }

    #[test]
    fn realize_matches_commutator() {
        let fx = fixtures::punctured_plane(Complex64::new(0.0, 0.0), 400);
        let gens = [fx.loop_a.clone(), fx.loop_b.clone()];
        let w = FreeWord::new([-1, -2, 1, 2]).unwrap();
        let realized = realize_free_word(&w, &gens, 1e-9).unwrap();
        let direct = commutator_path(&fx.loop_a, &fx.loop_b, 1e-9).unwrap();
        assert_eq!(realized.num_samples(), direct.num_samples());
        for (a, b) in realized.samples().iter().zip(direct.samples()) {
            assert!(a.1.dist(&b.1) < 1e-12);
        }
    }

    #[test]
    fn mobius_values() {
        assert_eq!(mobius(1).unwrap(), 1);
        assert_eq!(mobius(6).unwrap(), 1);
        assert_eq!(mobius(12).unwrap(), 0);
        assert_eq!(mobius(30).unwrap(), -1);
        assert!(mobius(0).is_err());
    }

    #[test]
    fn witt_values() {
        assert_eq!(witt_number(2, 3), 2);
        assert_eq!(witt_number(3, 6), 116);
        for r in 1..=6 {
            assert_eq!(witt_number(r, 1), r as i128);
        }
        // Direct formula evaluation: (4096 − 64 − 16 + 4)/6.
        assert_eq!(witt_number(4, 6), 670);
        assert_eq!(witt_number(3, 5), 48);
        assert_eq!(witt_number(4, 7), 2340);
    }

    #[test]
    fn witt_divisibility() {
        // The defining sum is divisible by k for all 1 ≤ r, k ≤ 12 (checked
        // by the debug assertion inside witt_number).
        for r in 1..=12 {
            for k in 1..=12 {
                let _ = witt_number(r, k);
            }
        }
    }

    #[test]
    fn order_bounds() {
        assert_eq!(order_bound(2, 3), (5, 8));
        assert_eq!(order_bound(3, 2), (6, 9));
        for k in 1..=8 {
            assert_eq!(order_bound(1, k), (1, 1));
        }
    }
}
