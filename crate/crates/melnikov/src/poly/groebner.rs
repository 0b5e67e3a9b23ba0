//! Buchberger's algorithm with cofactor tracking.
//!
//! Everything here is exact over the rationals. Bases carry an optional
//! transformation matrix expressing each basis element in terms of the
//! original generators, which is what turns an ideal-membership test into an
//! explicit certificate (the cofactors of the gradient decomposition).

use super::{BiPoly, Exp, Rat};
use num_traits::One;
use std::cmp::Ordering;

/// Monomial order on exponent pairs. Graded reverse lexicographic is the
/// default throughout; the others are available for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialOrder {
    Lex,
    GrLex,
    GrevLex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: Exp, b: Exp) -> Ordering {
        match self {
            MonomialOrder::Lex => a.0.cmp(&b.0).then(a.1.cmp(&b.1)),
            MonomialOrder::GrLex => (a.0 + a.1)
                .cmp(&(b.0 + b.1))
                .then(a.0.cmp(&b.0))
                .then(a.1.cmp(&b.1)),
            MonomialOrder::GrevLex => {
                // In two variables: compare total degree, then smaller power of
                // the *last* variable wins.
                (a.0 + a.1).cmp(&(b.0 + b.1)).then(b.1.cmp(&a.1))
            }
        }
    }
}

fn monomial_divides(d: Exp, m: Exp) -> bool {
    d.0 <= m.0 && d.1 <= m.1
}

fn monomial_div(m: Exp, d: Exp) -> Exp {
    (m.0 - d.0, m.1 - d.1)
}

fn monomial_lcm(a: Exp, b: Exp) -> Exp {
    (a.0.max(b.0), a.1.max(b.1))
}

/// Multivariate division with cofactor tracking.
///
/// Returns `(remainder, cofactors)` with `p = Σ cofactors[i]·basis[i] +
/// remainder` exactly and no remainder term divisible by any basis leading
/// term. The quotients depend on the basis order; the remainder is canonical
/// when `basis` is a Gröbner basis.
pub fn reduce_with_cofactors(
    p: &BiPoly,
    basis: &[BiPoly],
    order: MonomialOrder,
) -> (BiPoly, Vec<BiPoly>) {
    let mut cof = vec![BiPoly::zero(); basis.len()];
    let mut rem = BiPoly::zero();
    let mut work = p.clone();
    let leads: Vec<Option<(Exp, Rat)>> = basis.iter().map(|b| b.leading_term(order)).collect();
    'outer: while let Some((lt, lc)) = work.leading_term(order) {
        for (i, lead) in leads.iter().enumerate() {
            if let Some((blt, blc)) = lead {
                if monomial_divides(*blt, lt) {
                    let m = monomial_div(lt, *blt);
                    let c = &lc / blc;
                    let mono = BiPoly::monomial(m, c);
                    work = work.sub(&basis[i].mul(&mono));
                    cof[i] = cof[i].add(&mono);
                    continue 'outer;
                }
            }
        }
        // Leading term irreducible: move it to the remainder.
        rem.add_term(lt, lc.clone());
        work.add_term(lt, -lc);
    }
    (rem, cof)
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
pub fn groebner_basis(gens: &[BiPoly], order: MonomialOrder) -> Vec<BiPoly> {
    groebner_basis_with_transform(gens, order).0
}

/// Reduced Gröbner basis together with its transformation matrix: element `j`
/// of the basis equals `Σ_i transform[j][i] · gens[i]` exactly.
pub fn groebner_basis_with_transform(
    gens: &[BiPoly],
    order: MonomialOrder,
) -> (Vec<BiPoly>, Vec<Vec<BiPoly>>) {
    assert!(!gens.is_empty(), "empty generator list");
    let n = gens.len();
    let mut basis: Vec<Tracked> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let mut rep = vec![BiPoly::zero(); n];
        rep[i] = BiPoly::one();
        basis.push(Tracked { poly: g.clone(), rep });
    }
    if basis.is_empty() {
        return (vec![BiPoly::zero()], vec![vec![BiPoly::zero(); n]]);
    }

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in (i + 1)..basis.len() {
            pairs.push((i, j));
        }
    }

    while let Some((i, j)) = pairs.pop() {
        let (lt_i, lc_i) = basis[i].poly.leading_term(order).unwrap();
        let (lt_j, lc_j) = basis[j].poly.leading_term(order).unwrap();
        // Product criterion: coprime leading monomials reduce to zero.
        if monomial_lcm(lt_i, lt_j) == (lt_i.0 + lt_j.0, lt_i.1 + lt_j.1) {
            continue;
        }
        let l = monomial_lcm(lt_i, lt_j);
        let mi = BiPoly::monomial(monomial_div(l, lt_i), Rat::one() / &lc_i);
        let mj = BiPoly::monomial(monomial_div(l, lt_j), Rat::one() / &lc_j);
        let s = Tracked {
            poly: basis[i].poly.mul(&mi).sub(&basis[j].poly.mul(&mj)),
            rep: sub_reps(&mul_reps(&basis[i].rep, &mi), &mul_reps(&basis[j].rep, &mj)),
        };
        let red = reduce_tracked(s, &basis, order);
        if !red.poly.is_zero() {
            let k = basis.len();
            for idx in 0..k {
                pairs.push((idx, k));
            }
            basis.push(red);
        }
    }

    // Minimalize: drop elements whose leading term is divisible by another's.
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        if !keep[i] {
            continue;
        }
        let (lt_i, _) = basis[i].poly.leading_term(order).unwrap();
        for j in 0..basis.len() {
            if i == j || !keep[j] {
                continue;
            }
            let (lt_j, _) = basis[j].poly.leading_term(order).unwrap();
            if monomial_divides(lt_j, lt_i) && (lt_i != lt_j || j < i) {
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<Tracked> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(t, k)| k.then_some(t))
        .collect();

    // Inter-reduce tails (tracking representations) and normalize monic.
    let reps: Vec<Vec<BiPoly>> = minimal.iter().map(|t| t.rep.clone()).collect();
    let polys: Vec<BiPoly> = minimal.iter().map(|t| t.poly.clone()).collect();
    let mut out_polys = Vec::with_capacity(minimal.len());
    let mut out_reps: Vec<Vec<BiPoly>> = Vec::with_capacity(minimal.len());
    for idx in 0..polys.len() {
        let others: Vec<BiPoly> = polys
            .iter()
            .enumerate()
            .filter_map(|(j, p)| (j != idx).then_some(p.clone()))
            .collect();
        let (rem, cof) = if others.is_empty() {
            (polys[idx].clone(), vec![])
        } else {
            reduce_with_cofactors(&polys[idx], &others, order)
        };
        let mut rep = reps[idx].clone();
        let mut oi = 0;
        for j in 0..polys.len() {
            if j == idx {
                continue;
            }
            if oi < cof.len() && !cof[oi].is_zero() {
                rep = sub_reps(&rep, &mul_reps(&reps[j], &cof[oi]));
            }
            oi += 1;
        }
        // Normalize monic.
        let (_, lc) = rem.leading_term(order).expect("nonzero basis element");
        let inv = Rat::one() / lc;
        out_polys.push(rem.scale(&inv));
        out_reps.push(rep.iter().map(|r| r.scale(&inv)).collect());
    }

    // Deterministic order: sort by leading monomial descending.
    let mut idx: Vec<usize> = (0..out_polys.len()).collect();
    idx.sort_by(|&a, &b| {
        let la = out_polys[a].leading_term(order).unwrap().0;
        let lb = out_polys[b].leading_term(order).unwrap().0;
        order.cmp(lb, la)
    });
    let polys = idx.iter().map(|&i| out_polys[i].clone()).collect();
    let reps = idx.iter().map(|&i| out_reps[i].clone()).collect();
    (polys, reps)
}

#[derive(Clone)]
struct Tracked {
    poly: BiPoly,
    rep: Vec<BiPoly>,
}

fn mul_reps(rep: &[BiPoly], m: &BiPoly) -> Vec<BiPoly> {
    rep.iter().map(|r| r.mul(m)).collect()
}

fn sub_reps(a: &[BiPoly], b: &[BiPoly]) -> Vec<BiPoly> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn reduce_tracked(mut s: Tracked, basis: &[Tracked], order: MonomialOrder) -> Tracked {
    let polys: Vec<BiPoly> = basis.iter().map(|t| t.poly.clone()).collect();
    let (rem, cof) = reduce_with_cofactors(&s.poly, &polys, order);
    for (c, t) in cof.iter().zip(basis) {
        if !c.is_zero() {
            s.rep = sub_reps(&s.rep, &mul_reps(&t.rep, c));
        }
    }
    s.poly = rem;
    s
}

/// Ideal membership: does `p` reduce to zero modulo the (Gröbner) basis?
pub fn reduces_to_zero(p: &BiPoly, basis: &[BiPoly], order: MonomialOrder) -> bool {
    reduce_with_cofactors(p, basis, order).0.is_zero()
}

/// Monomials below the staircase of the leading terms: a vector-space basis
/// of the quotient ring when the ideal is zero-dimensional. Returns `None`
/// when the quotient is infinite-dimensional.
pub fn quotient_basis(basis: &[BiPoly], order: MonomialOrder) -> Option<Vec<Exp>> {
    let leads: Vec<Exp> = basis
        .iter()
        .filter_map(|b| b.leading_term(order).map(|(e, _)| e))
        .collect();
    if leads.contains(&(0, 0)) {
        return Some(vec![]); // unit ideal
    }
    let bound_x = leads.iter().filter(|e| e.1 == 0).map(|e| e.0).min()?;
    let bound_y = leads.iter().filter(|e| e.0 == 0).map(|e| e.1).min()?;
    let mut out = Vec::new();
    for i in 0..bound_x {
        for j in 0..bound_y {
            let m = (i, j);
            if !leads.iter().any(|&l| monomial_divides(l, m)) {
                out.push(m);
            }
        }
    }
    out.sort_by(|&a, &b| order.cmp(a, b));
    Some(out)
}
