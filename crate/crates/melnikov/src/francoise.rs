//! Higher-order generating functions of the return map via the word
//! recursion.
//!
//! For the foliation `df − ε(P dx + Q dy) = 0` with return map
//! `P(t, ε) = t + ε^k M_k(t) + …`, the first nonvanishing coefficient is a
//! finite combination of iterated integrals of length ≤ k along the oval
//! `γ(t)` (entries analytic on regular fibers). The combination is built by
//! the recursion `ω̃₁ = ω`, `ω̃_{i+1} = −ω · ∫ (dω̃_i/df)`, where the
//! fiberwise derivative of a word expands into entrywise Gelfand–Leray
//! substitutions, adjacent-pair wedge terms, and a trailing transversal
//! term — exactly what [`word_derivative`] produces.
//!
//! Closed-form fast paths are provided for the first three orders:
//!
//! ```text
//! M₁ = ∮ ω,   M₂ = −∮ ω ω′,   M₃ = ∮ ω(ω′)² + ∮ ω²ω″ − ∮ ω·GL(ω∧ω′),
//! ```
//!
//! with `ω′ = GL(dω)`, `ω″ = GL(dω′)`.

use crate::chen::{iterated_integral, Word};
use crate::forms::{exterior_derivative, gelfand_leray, transversal_pullback, wedge, RationalOneForm};
use crate::geometry::{trace_oval, transversal_point, Path, Point, TraceOptions, TransversalSpec};
use crate::poly::{gradient_certificate, BiPoly, GradientCertificate, UniPoly};
use crate::scenario::Scenario;
use crate::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;

/// Coefficient functions of `t` multiplying words: exact rational functions,
/// transversal pullbacks `R(t)`, and closures of those under the arithmetic
/// the recursion needs. Derivatives of pullbacks are taken numerically
/// (central differences), everything else symbolically.
#[derive(Debug, Clone)]
pub enum Coeff {
    One,
    Rational { num: UniPoly, den: UniPoly },
    /// `R(t)` defined by `(τ∘f)* form = R(f) df` along the transversal.
    Pullback(Box<RationalOneForm>),
    Neg(Box<Coeff>),
    Mul(Box<Coeff>, Box<Coeff>),
    Add(Box<Coeff>, Box<Coeff>),
    /// d/dt of the inner coefficient, by central differences at evaluation.
    Deriv(Box<Coeff>),
}

impl Coeff {
    pub fn constant(c: f64) -> Coeff {
        // only used for exact small constants in tests; library code builds
        // rationals directly
        let r = crate::poly::ratio((c * 1024.0).round() as i64, 1024);
        Coeff::Rational { num: UniPoly::constant(r), den: UniPoly::one() }
    }

    fn neg(self) -> Coeff {
        match self {
            Coeff::Neg(inner) => *inner,
            other => Coeff::Neg(Box::new(other)),
        }
    }

    fn is_statically_zero(&self) -> bool {
        match self {
            Coeff::Rational { num, .. } => num.is_zero(),
            Coeff::Neg(c) | Coeff::Deriv(c) => c.is_statically_zero(),
            Coeff::Mul(a, b) => a.is_statically_zero() || b.is_statically_zero(),
            _ => false,
        }
    }

    /// Symbolic t-derivative; pullbacks stay symbolic under a `Deriv` node.
    pub fn deriv(&self) -> Coeff {
        match self {
            Coeff::One => Coeff::Rational { num: UniPoly::zero(), den: UniPoly::one() },
            Coeff::Rational { num, den } => {
                let dn = num.derivative().mul(den).sub(&num.mul(&den.derivative()));
                Coeff::Rational { num: dn, den: den.mul(den) }
            }
            Coeff::Pullback(_) => Coeff::Deriv(Box::new(self.clone())),
            Coeff::Neg(c) => c.deriv().neg(),
            Coeff::Mul(a, b) => Coeff::Add(
                Box::new(Coeff::Mul(Box::new(a.deriv()), b.clone())),
                Box::new(Coeff::Mul(a.clone(), Box::new(b.deriv()))),
            ),
            Coeff::Add(a, b) => Coeff::Add(Box::new(a.deriv()), Box::new(b.deriv())),
            Coeff::Deriv(c) => Coeff::Deriv(Box::new(Coeff::Deriv(c.clone()))),
        }
    }

    pub fn eval(&self, ctx: &CoeffCtx<'_>, t: f64) -> Result<f64> {
        match self {
            Coeff::One => Ok(1.0),
            Coeff::Rational { num, den } => {
                let d = den.eval_f64(t);
                if d.abs() < 1e-300 {
                    return Err(Error::Numeric(format!("coefficient denominator vanishes at t = {t}")));
                }
                Ok(num.eval_f64(t) / d)
            }
            Coeff::Pullback(form) => transversal_pullback(form, ctx.transversal, ctx.f, t),
            Coeff::Neg(c) => Ok(-c.eval(ctx, t)?),
            Coeff::Mul(a, b) => Ok(a.eval(ctx, t)? * b.eval(ctx, t)?),
            Coeff::Add(a, b) => Ok(a.eval(ctx, t)? + b.eval(ctx, t)?),
            Coeff::Deriv(c) => {
                let h = 1e-5 * (1.0 + t.abs());
                Ok((c.eval(ctx, t + h)? - c.eval(ctx, t - h)?) / (2.0 * h))
            }
        }
    }
}

/// Context needed to evaluate transversal-pullback coefficients.
pub struct CoeffCtx<'a> {
    pub f: &'a BiPoly,
    pub transversal: &'a TransversalSpec,
}

/// Linear combination of words with `t`-dependent coefficients: the symbolic
/// representation of one generating function.
#[derive(Debug, Clone)]
pub struct WordCombination {
    pub terms: Vec<(Coeff, Word)>,
}

impl WordCombination {
    pub fn single(form: RationalOneForm) -> Self {
        WordCombination { terms: vec![(Coeff::One, Word(vec![form]))] }
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.iter().map(|(_, w)| w.len()).max().unwrap_or(0)
    }

    /// Drops terms with statically zero coefficients or zero form entries.
    fn pruned(mut self) -> Self {
        self.terms.retain(|(c, w)| {
            !c.is_statically_zero() && !w.0.iter().any(|form| form.is_zero())
        });
        self
    }
}

/// Sampled generating function on the scenario grid.
#[derive(Debug, Clone)]
pub struct MelnikovTable {
    /// Order of the expansion this table represents.
    pub k: usize,
    pub rows: Vec<TableRow>,
    /// Identifier of the formula that produced the values.
    pub provenance: String,
}

#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub t: f64,
    pub value: Complex64,
    pub err_est: f64,
}

impl MelnikovTable {
    pub fn max_abs(&self) -> f64 {
        self.rows.iter().map(|r| r.value.norm()).fold(0.0, f64::max)
    }
}

/// A scenario with its gradient certificate and cached derived data.
pub struct Prepared {
    pub scenario: Scenario,
    pub cert: GradientCertificate,
}

impl Prepared {
    pub fn new(scenario: Scenario) -> Result<Self> {
        let cert = gradient_certificate(&scenario.f)?;
        // The t-grid must respect the critical-value margin.
        for &t in &scenario.t_grid {
            for c in cert.real_crit() {
                if (t - c).abs() < scenario.crit_margin {
                    return Err(Error::Scenario(format!(
                        "grid point t = {t} is within {} of the critical value {c}",
                        scenario.crit_margin
                    )));
                }
            }
        }
        Ok(Prepared { scenario, cert })
    }

    pub fn omega(&self) -> RationalOneForm {
        RationalOneForm::polynomial(self.scenario.p.clone(), self.scenario.q.clone())
    }

    pub fn coeff_ctx(&self) -> CoeffCtx<'_> {
        CoeffCtx { f: &self.scenario.f, transversal: &self.scenario.transversal }
    }

    fn trace_options(&self, samples: usize) -> TraceOptions {
        TraceOptions {
            fiber_tol: self.scenario.fiber_tol,
            closure_tol: self.scenario.closure_tol,
            rk_tol: 1e-12,
            max_steps: 4_000_000,
            samples,
        }
    }

    /// Basepoint `P₀(t)` on the transversal.
    pub fn basepoint(&self, t: f64) -> Result<Point> {
        transversal_point(&self.scenario.f, &self.scenario.transversal, t)
    }

    /// Oval through the transversal basepoint, oriented by the flow.
    pub fn oval(&self, t: f64, samples: usize) -> Result<Path> {
        let seed = self.basepoint(t)?;
        trace_oval(&self.scenario.f, t, seed, &self.trace_options(samples))
    }

    /// ω′ = GL(dω), the standard representative (optionally shifted by
    /// `h·df` for choice-independence experiments).
    pub fn omega_prime(&self, gl_shift: Option<&BiPoly>) -> RationalOneForm {
        let base = gelfand_leray(&exterior_derivative(&self.omega(), &self.scenario.f), &self.cert);
        match gl_shift {
            Some(h) => base.plus_multiple_of_df(h, &self.scenario.f),
            None => base,
        }
    }
}

/// Evaluates a word combination at one grid point: traces the oval through
/// `P₀(t)` and sums coefficient × iterated integral.
pub fn eval_combination(prep: &Prepared, comb: &WordCombination, t: f64, samples: usize) -> Result<Complex64> {
    eval_combination_with(prep, comb, t, samples, &prep.scenario.transversal)
}

fn eval_combination_with(
    prep: &Prepared,
    comb: &WordCombination,
    t: f64,
    samples: usize,
    transversal: &TransversalSpec,
) -> Result<Complex64> {
    let seed = transversal_point(&prep.scenario.f, transversal, t)?;
    let oval = trace_oval(&prep.scenario.f, t, seed, &prep.trace_options(samples))?;
    let ctx = CoeffCtx { f: &prep.scenario.f, transversal };
    let mut acc = Complex64::new(0.0, 0.0);
    for (coeff, word) in &comb.terms {
        let c = coeff.eval(&ctx, t)?;
        if c == 0.0 {
            continue;
        }
        acc += iterated_integral(&oval, &word.0)? * c;
    }
    Ok(acc)
}

/// Builds the sampled table of a word combination over the scenario grid,
/// with an error estimate from halving the quadrature density.
pub fn tabulate(prep: &Prepared, comb: &WordCombination, k: usize, provenance: &str) -> Result<MelnikovTable> {
    tabulate_with(prep, comb, k, provenance, &prep.scenario.transversal)
}

fn tabulate_with(
    prep: &Prepared,
    comb: &WordCombination,
    k: usize,
    provenance: &str,
    transversal: &TransversalSpec,
) -> Result<MelnikovTable> {
    let n = prep.scenario.quad_samples;
    let rows: Result<Vec<TableRow>> = prep
        .scenario
        .t_grid
        .par_iter()
        .map(|&t| {
            let value = eval_combination_with(prep, comb, t, n, transversal)?;
            let coarse = eval_combination_with(prep, comb, t, n / 2, transversal)?;
            Ok(TableRow { t, value, err_est: (value - coarse).norm() })
        })
        .collect();
    Ok(MelnikovTable { k, rows: rows?, provenance: provenance.to_string() })
}

/// Vanishing threshold: `vanish_tol` scaled by the largest oval length on
/// the grid (computed from the first and last grid ovals).
pub fn vanish_threshold(prep: &Prepared) -> Result<f64> {
    let first = prep.oval(prep.scenario.t_grid[0], 256)?;
    let last = prep.oval(*prep.scenario.t_grid.last().unwrap(), 256)?;
    let scale = first.length().max(last.length()).max(1.0);
    Ok(prep.scenario.vanish_tol * scale)
}

/// `M₁(t) = ∮_{γ(t)} P dx + Q dy`.
pub fn melnikov_1(prep: &Prepared) -> Result<MelnikovTable> {
    let comb = WordCombination::single(prep.omega());
    tabulate(prep, &comb, 1, "m1")
}

/// Options for the closed-form fast paths: Gelfand–Leray representative
/// shift and basepoint relocation, both of which must leave the values
/// unchanged (that is what the tests assert).
#[derive(Default, Clone)]
pub struct MelnikovOptions {
    pub gl_shift: Option<BiPoly>,
    pub transversal_override: Option<TransversalSpec>,
}

/// `M₂(t) = −∮ ω ω′` (valid once `M₁ ≡ 0` on the grid). If `M₁` does not
/// vanish within the threshold, the order-1 table is returned instead,
/// flagged by `k = 1` and provenance.
pub fn melnikov_2(prep: &Prepared) -> Result<MelnikovTable> {
    melnikov_2_opts(prep, &MelnikovOptions::default())
}

pub fn melnikov_2_opts(prep: &Prepared, opts: &MelnikovOptions) -> Result<MelnikovTable> {
    let m1 = melnikov_1(prep)?;
    if m1.max_abs() > vanish_threshold(prep)? {
        return Ok(MelnikovTable { provenance: "m2: order 1 does not vanish".into(), ..m1 });
    }
    let omega = prep.omega();
    let omega_p = prep.omega_prime(opts.gl_shift.as_ref());
    let comb = WordCombination {
        terms: vec![(Coeff::One.neg(), Word(vec![omega, omega_p]))],
    };
    let transversal = opts.transversal_override.as_ref().unwrap_or(&prep.scenario.transversal);
    tabulate_with(prep, &comb, 2, "m2", transversal)
}

/// `M₃ = ∮ ω(ω′)² + ∮ ω²ω″ − ∮ ω·GL(ω∧ω′)` (valid once `M₁, M₂ ≡ 0`).
pub fn melnikov_3(prep: &Prepared) -> Result<MelnikovTable> {
    melnikov_3_opts(prep, &MelnikovOptions::default())
}

pub fn melnikov_3_opts(prep: &Prepared, opts: &MelnikovOptions) -> Result<MelnikovTable> {
    let threshold = vanish_threshold(prep)?;
    let m1 = melnikov_1(prep)?;
    if m1.max_abs() > threshold {
        return Ok(MelnikovTable { provenance: "m3: order 1 does not vanish".into(), ..m1 });
    }
    let m2 = melnikov_2(prep)?;
    if m2.max_abs() > threshold {
        return Ok(MelnikovTable { provenance: "m3: order 2 does not vanish".into(), ..m2 });
    }
    let f = &prep.scenario.f;
    let omega = prep.omega();
    let omega_p = prep.omega_prime(opts.gl_shift.as_ref());
    let omega_pp = gelfand_leray(&exterior_derivative(&omega_p, f), &prep.cert);
    let mixed = gelfand_leray(&wedge(&omega, &omega_p), &prep.cert);
    let comb = WordCombination {
        terms: vec![
            (Coeff::One, Word(vec![omega.clone(), omega_p.clone(), omega_p.clone()])),
            (Coeff::One, Word(vec![omega.clone(), omega.clone(), omega_pp])),
            (Coeff::One.neg(), Word(vec![omega, mixed])),
        ],
    }
    .pruned();
    let transversal = opts.transversal_override.as_ref().unwrap_or(&prep.scenario.transversal);
    tabulate_with(prep, &comb, 3, "m3", transversal)
}

/// Fiberwise derivative of a word combination: for each word
/// `(η₁, …, η_m)`,
///
/// ```text
/// d/df [η₁…η_m] = Σ_i [η₁, …, GL(dη_i), …, η_m]
///               − Σ_i [η₁, …, GL(η_i ∧ η_{i+1}), …, η_m]
///               − R_m(t)·[η₁, …, η_{m−1}]      (m ≥ 2)
/// ```
///
/// with `R_m` the transversal pullback of the last entry, plus the product
/// rule on the coefficients.
pub fn word_derivative(comb: &WordCombination, cert: &GradientCertificate) -> WordCombination {
    let f = &cert.f;
    let mut out: Vec<(Coeff, Word)> = Vec::new();
    for (coeff, word) in &comb.terms {
        let m = word.len();
        // product rule on the coefficient
        let dc = coeff.deriv();
        if !dc.is_statically_zero() && m > 0 {
            out.push((dc, word.clone()));
        }
        // entrywise Gelfand–Leray substitution
        for i in 0..m {
            let deriv = gelfand_leray(&exterior_derivative(&word.0[i], f), cert);
            if deriv.is_zero() {
                continue;
            }
            let mut w = word.0.clone();
            w[i] = deriv;
            out.push((coeff.clone(), Word(w)));
        }
        // adjacent-pair wedge terms
        for i in 0..m.saturating_sub(1) {
            let merged = gelfand_leray(&wedge(&word.0[i], &word.0[i + 1]), cert);
            if merged.is_zero() {
                continue;
            }
            let mut w: Vec<RationalOneForm> = Vec::with_capacity(m - 1);
            w.extend_from_slice(&word.0[..i]);
            w.push(merged);
            w.extend_from_slice(&word.0[i + 2..]);
            out.push((coeff.clone().neg(), Word(w)));
        }
        // trailing transversal term
        if m >= 2 {
            let last = word.0[m - 1].clone();
            let c = Coeff::Mul(
                Box::new(coeff.clone()),
                Box::new(Coeff::Pullback(Box::new(last))),
            )
            .neg();
            out.push((c, Word(word.0[..m - 1].to_vec())));
        }
    }
    WordCombination { terms: out }.pruned()
}

/// One step of the recursion: `ω̃_{i+1} = −ω · ∫ dω̃_i/df`.
fn recursion_step(prep: &Prepared, comb: &WordCombination) -> WordCombination {
    let omega = prep.omega();
    let deriv = word_derivative(comb, &prep.cert);
    let mut terms = Vec::with_capacity(deriv.terms.len());
    for (c, w) in deriv.terms {
        let mut entries = Vec::with_capacity(w.len() + 1);
        entries.push(omega.clone());
        entries.extend(w.0);
        terms.push((c.neg(), Word(entries)));
    }
    WordCombination { terms }.pruned()
}

/// Symbolic word combination for order `k` (no vanishing checks; the caller
/// is responsible for the lower orders being zero when interpreting the
/// values as return-map coefficients).
pub fn build_combination(prep: &Prepared, k: usize) -> Result<WordCombination> {
    if k == 0 {
        return Err(Error::Unsupported("order must be at least 1".into()));
    }
    let mut comb = WordCombination::single(prep.omega());
    for _ in 1..k {
        comb = recursion_step(prep, &comb);
    }
    debug_assert!(comb.max_word_len() <= k);
    Ok(comb)
}

/// The full recursion: symbolic word combination for order `k` plus its
/// sampled table. Orders below `k` must vanish on the grid; if one does
/// not, its table is returned flagged (provenance records the order).
pub fn francoise_mk(prep: &Prepared, k: usize) -> Result<(WordCombination, MelnikovTable)> {
    if k == 0 {
        return Err(Error::Unsupported("order must be at least 1".into()));
    }
    let threshold = vanish_threshold(prep)?;
    let mut comb = WordCombination::single(prep.omega());
    for order in 1..k {
        let table = tabulate(prep, &comb, order, &format!("francoise-k{order}"))?;
        if table.max_abs() > threshold {
            return Ok((comb, MelnikovTable {
                provenance: format!("francoise-k{k}: order {order} does not vanish"),
                ..table
            }));
        }
        comb = recursion_step(prep, &comb);
    }
    debug_assert!(comb.max_word_len() <= k);
    let table = tabulate(prep, &comb, k, &format!("francoise-k{k}"))?;
    Ok((comb, table))
}

/// Outcome of the order scan.
#[derive(Debug)]
pub enum FirstOrder {
    Found { k: usize, table: MelnikovTable },
    AllVanish { k_max: usize },
}

/// Smallest order whose table exceeds the vanishing threshold.
pub fn first_nonvanishing_order(prep: &Prepared, k_max: usize) -> Result<FirstOrder> {
    let threshold = vanish_threshold(prep)?;
    for k in 1..=k_max {
        let (_, table) = francoise_mk(prep, k)?;
        if table.k < k {
            // an earlier order was flagged nonvanishing
            return Ok(FirstOrder::Found { k: table.k, table });
        }
        if table.max_abs() > threshold {
            return Ok(FirstOrder::Found { k, table });
        }
    }
    Ok(FirstOrder::AllVanish { k_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario;

    fn prep(name: &str) -> Prepared {
        Prepared::new(scenario::bundled(name).unwrap()).unwrap()
    }

    #[test]
    fn m1_circle_matches_area() {
        let prep = prep("circle");
        let m1 = melnikov_1(&prep).unwrap();
        for row in &m1.rows {
            let expect = -2.0 * std::f64::consts::PI * row.t;
            assert!(
                (row.value.re - expect).abs() < 1e-9,
                "M1({}) = {} vs {}",
                row.t,
                row.value.re,
                expect
            );
            assert!(row.value.im.abs() < 1e-12);
        }
    }

    #[test]
    fn exact_form_gives_zero_tables() {
        // ω = df leaves the foliation unchanged: every order vanishes.
        let mut s = scenario::bundled("circle").unwrap();
        s.p = s.f.dx();
        s.q = s.f.dy();
        let prep = Prepared::new(s).unwrap();
        let m1 = melnikov_1(&prep).unwrap();
        assert!(m1.max_abs() < 1e-10, "max {}", m1.max_abs());
        match first_nonvanishing_order(&prep, 3).unwrap() {
            FirstOrder::AllVanish { .. } => {}
            FirstOrder::Found { k, table } => {
                panic!("expected all orders to vanish, found k = {k}, max {}", table.max_abs())
            }
        }
    }

    #[test]
    fn m2_reversible_perturbation_vanishes() {
        // ω = x² dy on the circle: the perturbed system has a center for all
        // ε, so M₂ (indeed every order) vanishes.
        let mut s = scenario::bundled("circle").unwrap();
        s.p = BiPoly::zero();
        s.q = crate::poly::parse_polynomial("x^2").unwrap();
        let prep = Prepared::new(s).unwrap();
        let m2 = melnikov_2(&prep).unwrap();
        assert_eq!(m2.k, 2, "M1 should vanish first: {}", m2.provenance);
        assert!(m2.max_abs() < 1e-8, "max {}", m2.max_abs());
    }

    #[test]
    fn m2_detects_nonvanishing_first_order() {
        let prep = prep("circle");
        let m2 = melnikov_2(&prep).unwrap();
        assert_eq!(m2.k, 1);
        assert!(m2.provenance.contains("order 1"));
    }

    #[test]
    fn example1_first_three_orders() {
        let prep = prep("example1");
        let threshold = vanish_threshold(&prep).unwrap();
        let m1 = melnikov_1(&prep).unwrap();
        assert!(m1.max_abs() < threshold, "M1 max {}", m1.max_abs());
        let m2 = melnikov_2(&prep).unwrap();
        assert_eq!(m2.k, 2);
        assert!(m2.max_abs() < threshold, "M2 max {}", m2.max_abs());
        let m3 = melnikov_3(&prep).unwrap();
        assert_eq!(m3.k, 3);
        assert!(m3.max_abs() > 1e3 * prep.scenario.vanish_tol, "M3 max {}", m3.max_abs());
    }

    #[test]
    fn recursion_matches_fast_paths() {
        // k = 1 is the line integral; k = 2 and 3 agree with the closed
        // formulas on scenarios where the preconditions hold.
        let p1 = prep("circle");
        let (c1, t1) = francoise_mk(&p1, 1).unwrap();
        assert_eq!(c1.terms.len(), 1);
        let m1 = melnikov_1(&p1).unwrap();
        for (a, b) in t1.rows.iter().zip(&m1.rows) {
            assert!((a.value - b.value).norm() < 1e-12);
        }

        let p2 = prep("circle_k2");
        let (_, t2) = francoise_mk(&p2, 2).unwrap();
        let m2 = melnikov_2(&p2).unwrap();
        for (a, b) in t2.rows.iter().zip(&m2.rows) {
            assert!((a.value - b.value).norm() < 1e-8, "{} vs {}", a.value, b.value);
        }

        let p3 = prep("example1");
        let (_, t3) = francoise_mk(&p3, 3).unwrap();
        let m3 = melnikov_3(&p3).unwrap();
        for (a, b) in t3.rows.iter().zip(&m3.rows) {
            assert!((a.value - b.value).norm() < 1e-7, "{} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn word_lengths_bounded_by_order() {
        let p = prep("example1");
        for k in 1..=4 {
            let (comb, _) = francoise_mk(&p, k).unwrap();
            assert!(comb.max_word_len() <= k, "k = {k}: len {}", comb.max_word_len());
        }
    }

    #[test]
    fn word_entry_denominators_stay_critical() {
        // every entry's denominator divides a power of squarefree(m)
        let p = prep("example1");
        let (comb, _) = francoise_mk(&p, 3).unwrap();
        let s = p.cert.m.squarefree_part();
        for (_, word) in &comb.terms {
            for entry in &word.0 {
                let mut rest = entry.den.clone();
                loop {
                    let g = rest.gcd(&s);
                    if g.degree() == 0 {
                        break;
                    }
                    rest = rest.div_exact(&g).unwrap();
                }
                assert_eq!(rest.degree(), 0, "foreign denominator factor in {:?}", entry.den);
            }
        }
    }

    #[test]
    fn length_one_derivative_identity() {
        // d/dt ∮ ω = ∮ GL(dω) on closed ovals: compare the word-derivative
        // table against central differences of the order-1 table.
        let p = prep("circle");
        let comb = WordCombination::single(p.omega());
        let deriv = word_derivative(&comb, &p.cert);
        for &t in &[0.4, 0.9, 1.4] {
            let lhs = eval_combination(&p, &deriv, t, 2048).unwrap();
            let h = 1e-4;
            let fp = eval_combination(&p, &comb, t + h, 2048).unwrap();
            let fm = eval_combination(&p, &comb, t - h, 2048).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (lhs - fd).norm() < 1e-6 * (1.0 + fd.norm()),
                "t = {t}: {lhs} vs {fd}"
            );
        }
    }

    #[test]
    fn length_two_derivative_structure_and_fd() {
        // word (ω, ω′) on the plain circle scenario: expansion shape and a
        // finite-difference check of d/dt ∮ ωω′.
        let p = prep("circle");
        let omega = p.omega();
        let omega_p = p.omega_prime(None);
        let comb = WordCombination {
            terms: vec![(Coeff::One, Word(vec![omega.clone(), omega_p.clone()]))],
        };
        let deriv = word_derivative(&comb, &p.cert);
        // ω″ = GL(dω′) vanishes here (ω′ is closed), so the expansion keeps:
        // (ω′, ω′), the pair term, and the trailing transversal term.
        let lens: Vec<usize> = deriv.terms.iter().map(|(_, w)| w.len()).collect();
        assert!(lens.contains(&2), "lengths {lens:?}");
        assert!(lens.iter().all(|&l| l <= 2));
        for &t in &[0.5, 1.0, 1.6] {
            let lhs = eval_combination(&p, &deriv, t, 2048).unwrap();
            let h = 1e-4;
            let fp = eval_combination(&p, &comb, t + h, 2048).unwrap();
            let fm = eval_combination(&p, &comb, t - h, 2048).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            assert!(
                (lhs - fd).norm() < 1e-5 * (1.0 + fd.norm()),
                "t = {t}: {lhs} vs {fd}"
            );
            // analytic cross-check: ∮ ωω′ = 2π²t for this scenario
            let val = eval_combination(&p, &comb, t, 2048).unwrap();
            let expect = 2.0 * std::f64::consts::PI.powi(2) * t;
            assert!((val.re - expect).abs() < 1e-7 * expect, "{val} vs {expect}");
        }
    }

    #[test]
    fn representative_and_basepoint_independence() {
        // ω′ ↦ ω′ + h·df and basepoint relocation leave M₂ unchanged.
        let p2 = prep("circle_k2");
        let base = melnikov_2(&p2).unwrap();
        let shifted = melnikov_2_opts(
            &p2,
            &MelnikovOptions {
                gl_shift: Some(crate::poly::parse_polynomial("1 - x + x*y").unwrap()),
                transversal_override: None,
            },
        )
        .unwrap();
        let moved = melnikov_2_opts(
            &p2,
            &MelnikovOptions {
                gl_shift: None,
                transversal_override: Some(TransversalSpec::new((0.0, 0.0), (0.6, 0.8), (1e-9, 6.0))),
            },
        )
        .unwrap();
        for ((a, b), c) in base.rows.iter().zip(&shifted.rows).zip(&moved.rows) {
            let scale = a.value.norm().max(1e-12);
            assert!((a.value - b.value).norm() / scale < 1e-6, "shift: {} vs {}", a.value, b.value);
            assert!((a.value - c.value).norm() / scale < 1e-6, "move: {} vs {}", a.value, c.value);
        }
    }

    #[test]
    fn first_nonvanishing_orders_of_bundled_scenarios() {
        match first_nonvanishing_order(&prep("circle"), 3).unwrap() {
            FirstOrder::Found { k, .. } => assert_eq!(k, 1),
            other => panic!("{other:?}"),
        }
        match first_nonvanishing_order(&prep("circle_k2"), 3).unwrap() {
            FirstOrder::Found { k, .. } => assert_eq!(k, 2),
            other => panic!("{other:?}"),
        }
        match first_nonvanishing_order(&prep("example1"), 4).unwrap() {
            FirstOrder::Found { k, .. } => assert_eq!(k, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn order_four_machinery_on_integrable_scenario() {
        // ω = x² dy on the circle is a reversible perturbation: all orders
        // vanish, so the generic recursion at k = 4, the closed five-term
        // order-4 formula, and the return map must agree on zero.
        let mut s = scenario::bundled("circle").unwrap();
        s.p = BiPoly::zero();
        s.q = crate::poly::parse_polynomial("x^2").unwrap();
        let p = Prepared::new(s).unwrap();
        let threshold = vanish_threshold(&p).unwrap();
        let (comb, table) = francoise_mk(&p, 4).unwrap();
        assert_eq!(table.k, 4, "lower orders should vanish: {}", table.provenance);
        assert!(comb.max_word_len() <= 4);
        assert!(table.max_abs() < threshold, "recursion M4 max {}", table.max_abs());

        // closed form with the canonical representatives ω′ = GL(dω),
        // W = GL(ω∧ω′): ∮ω(ω′)³ + ∮ωω′W + ∮ω²GL(dW) + ∮ωWω′ − ∮ωGL(ω∧W)
        let f = &p.scenario.f;
        let omega = p.omega();
        let omega_p = p.omega_prime(None);
        let w = gelfand_leray(&wedge(&omega, &omega_p), &p.cert);
        let dw = gelfand_leray(&exterior_derivative(&w, f), &p.cert);
        let ww = gelfand_leray(&wedge(&omega, &w), &p.cert);
        let closed = WordCombination {
            terms: vec![
                (Coeff::One, Word(vec![omega.clone(), omega_p.clone(), omega_p.clone(), omega_p.clone()])),
                (Coeff::One, Word(vec![omega.clone(), omega_p.clone(), w.clone()])),
                (Coeff::One, Word(vec![omega.clone(), omega.clone(), dw])),
                (Coeff::One, Word(vec![omega.clone(), w.clone(), omega_p.clone()])),
                (Coeff::One.neg(), Word(vec![omega.clone(), ww])),
            ],
        }
        .pruned();
        let m4_closed = tabulate(&p, &closed, 4, "m4-closed").unwrap();
        assert!(m4_closed.max_abs() < threshold, "closed M4 max {}", m4_closed.max_abs());
        for (a, b) in table.rows.iter().zip(&m4_closed.rows) {
            assert!((a.value - b.value).norm() < 1e-2, "{} vs {}", a.value, b.value);
        }
    }

    #[test]
    fn derivative_consistency_of_tables() {
        // numeric d/dt of M_k matches the word-derivative table away from
        // grid edges (checked at a few interior points with local steps).
        let p2 = prep("circle_k2");
        let omega = p2.omega();
        let omega_p = p2.omega_prime(None);
        let comb = WordCombination {
            terms: vec![(Coeff::One.neg(), Word(vec![omega, omega_p]))],
        };
        let deriv = word_derivative(&comb, &p2.cert);
        for &t in &[0.6, 1.1, 1.6] {
            let lhs = eval_combination(&p2, &deriv, t, 2048).unwrap();
            let h = 0.01;
            let fp = eval_combination(&p2, &comb, t + h, 2048).unwrap();
            let fm = eval_combination(&p2, &comb, t - h, 2048).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            let rel = (lhs - fd).norm() / fd.norm().max(1e-12);
            assert!(rel < 1e-4, "t = {t}: {lhs} vs {fd} (rel {rel:.2e})");
        }
    }
}
