//! Multivariate polynomial systems over F_q and exact solving of the small
//! zero-dimensional systems produced by the theta pipeline.
//!
//! Groebner bases are computed by Buchberger's algorithm with the
//! Gebauer-Moeller pair update. Small systems are handled directly in
//! lexicographic order; larger ones go through degrevlex followed by an FGLM
//! order change, which behaves far better on the genus-2 extension systems.
//! Solutions are read off a lexicographic basis by univariate root finding in
//! the last variable and recursive specialization.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::ff::{fq_poly_roots, FieldCtx, Fq, FqPoly};
use crate::{Error, Result};

/// Exponent vector; fixed length = number of variables.
pub type Monomial = Vec<u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonomialOrder {
    /// Variable 0 most significant.
    Lex,
    /// Total degree, ties broken by the last nonzero exponent difference
    /// being negative.
    DegRevLex,
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::DegRevLex => {
                let da: u64 = a.iter().map(|&e| e as u64).sum();
                let db: u64 = b.iter().map(|&e| e as u64).sum();
                if da != db {
                    return da.cmp(&db);
                }
                for i in (0..a.len()).rev() {
                    if a[i] != b[i] {
                        return b[i].cmp(&a[i]);
                    }
                }
                Ordering::Equal
            }
        }
    }
}

fn mono_mul(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

fn mono_div(a: &[u32], b: &[u32]) -> Option<Monomial> {
    if a.iter().zip(b).all(|(&x, &y)| x >= y) {
        Some(a.iter().zip(b).map(|(&x, &y)| x - y).collect())
    } else {
        None
    }
}

fn mono_lcm(a: &[u32], b: &[u32]) -> Monomial {
    a.iter().zip(b).map(|(&x, &y)| x.max(y)).collect()
}

fn mono_deg(a: &[u32]) -> u64 {
    a.iter().map(|&e| e as u64).sum()
}

fn mono_is_one(a: &[u32]) -> bool {
    a.iter().all(|&e| e == 0)
}

fn mono_coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| x == 0 || y == 0)
}

/// Multivariate polynomial; terms sorted strictly descending under the order
/// the polynomial was built with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MPoly {
    pub terms: Vec<(Monomial, Fq)>,
}

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly { terms: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_terms(
        terms: impl IntoIterator<Item = (Monomial, Fq)>,
        ord: MonomialOrder,
        ctx: &FieldCtx,
    ) -> MPoly {
        let mut map: BTreeMap<Monomial, Fq> = BTreeMap::new();
        for (m, c) in terms {
            let e = map.entry(m).or_insert_with(|| ctx.zero());
            *e = ctx.add(e, &c);
        }
        let mut v: Vec<(Monomial, Fq)> = map
            .into_iter()
            .filter(|(_, c)| !ctx.is_zero(c))
            .collect();
        v.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        MPoly { terms: v }
    }

    pub fn constant(c: Fq, nvars: usize, ctx: &FieldCtx) -> MPoly {
        if ctx.is_zero(&c) {
            MPoly::zero()
        } else {
            MPoly { terms: vec![(vec![0; nvars], c)] }
        }
    }

    pub fn var(i: usize, nvars: usize, ctx: &FieldCtx) -> MPoly {
        let mut m = vec![0; nvars];
        m[i] = 1;
        MPoly { terms: vec![(m, ctx.one())] }
    }

    pub fn lt(&self) -> &(Monomial, Fq) {
        &self.terms[0]
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.iter().map(|(m, _)| mono_deg(m)).max().unwrap_or(0)
    }

    pub fn add(&self, o: &MPoly, ord: MonomialOrder, ctx: &FieldCtx) -> MPoly {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < o.terms.len() {
            match ord.cmp(&self.terms[i].0, &o.terms[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(o.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = ctx.add(&self.terms[i].1, &o.terms[j].1);
                    if !ctx.is_zero(&c) {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&o.terms[j..]);
        MPoly { terms: out }
    }

    pub fn neg(&self, ctx: &FieldCtx) -> MPoly {
        MPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), ctx.neg(c))).collect(),
        }
    }

    pub fn sub(&self, o: &MPoly, ord: MonomialOrder, ctx: &FieldCtx) -> MPoly {
        self.add(&o.neg(ctx), ord, ctx)
    }

    /// Multiply by the single term c * x^m; preserves term ordering.
    pub fn mul_term(&self, m: &[u32], c: &Fq, ctx: &FieldCtx) -> MPoly {
        if ctx.is_zero(c) {
            return MPoly::zero();
        }
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(mm, cc)| (mono_mul(mm, m), ctx.mul(cc, c)))
                .collect(),
        }
    }

    pub fn mul(&self, o: &MPoly, ord: MonomialOrder, ctx: &FieldCtx) -> MPoly {
        let mut acc = MPoly::zero();
        for (m, c) in &o.terms {
            acc = acc.add(&self.mul_term(m, c, ctx), ord, ctx);
        }
        acc
    }

    pub fn scale(&self, c: &Fq, ctx: &FieldCtx) -> MPoly {
        self.mul_term(&vec![0; self.nvars_hint()], c, ctx)
    }

    fn nvars_hint(&self) -> usize {
        self.terms.first().map(|(m, _)| m.len()).unwrap_or(0)
    }

    pub fn monic(&self, ctx: &FieldCtx) -> Result<MPoly> {
        if self.is_zero() {
            return Ok(MPoly::zero());
        }
        let inv = ctx.inv(&self.terms[0].1)?;
        Ok(self.mul_term(&vec![0; self.terms[0].0.len()], &inv, ctx))
    }

    /// Substitute value for variable `var`, producing a polynomial in the
    /// remaining variables (exponent vectors shortened by one).
    pub fn specialize(
        &self,
        var: usize,
        value: &Fq,
        ord: MonomialOrder,
        ctx: &FieldCtx,
    ) -> MPoly {
        let terms = self.terms.iter().map(|(m, c)| {
            let mut mm = m.clone();
            let e = mm.remove(var);
            (mm, ctx.mul(c, &ctx.pow_u64(value, e as u64)))
        });
        MPoly::from_terms(terms, ord, ctx)
    }

    pub fn eval(&self, point: &[Fq], ctx: &FieldCtx) -> Fq {
        let mut acc = ctx.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = ctx.mul(&t, &ctx.pow_u64(&point[i], e as u64));
                }
            }
            acc = ctx.add(&acc, &t);
        }
        acc
    }

    /// Re-sort terms under a different order.
    pub fn reorder(&self, ord: MonomialOrder) -> MPoly {
        let mut v = self.terms.clone();
        v.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        MPoly { terms: v }
    }
}

/// A polynomial system over one field context.
#[derive(Debug, Clone)]
pub struct PolySystem {
    pub vars: Vec<String>,
    pub polys: Vec<MPoly>,
}

// ---------------------------------------------------------------------------
// Buchberger
// ---------------------------------------------------------------------------

/// Full normal form of `p` with respect to `basis` (all polynomials monic).
/// Charges one budget unit per reduction step.
fn normal_form(
    p: &MPoly,
    basis: &[MPoly],
    ord: MonomialOrder,
    ctx: &FieldCtx,
    budget: &mut u64,
) -> Result<MPoly> {
    let mut work = p.clone();
    let mut out: Vec<(Monomial, Fq)> = vec![];
    'outer: while !work.is_zero() {
        let (lm, lc) = work.lt().clone();
        for g in basis {
            if let Some(q) = mono_div(&lm, &g.lt().0) {
                if *budget == 0 {
                    return Err(Error::BudgetExceeded(
                        "polynomial reduction budget exhausted".into(),
                    ));
                }
                *budget -= 1;
                work = work.sub(&g.mul_term(&q, &lc, ctx), ord, ctx);
                continue 'outer;
            }
        }
        out.push((lm, lc));
        work.terms.remove(0);
    }
    Ok(MPoly { terms: out })
}

/// Critical pair with cached lcm of the leading monomials.
#[derive(Debug, Clone)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

/// Gebauer-Moeller update of the pending pair list on the arrival of
/// basis element `t`.
fn update_pairs(pairs: &mut Vec<Pair>, basis: &[MPoly], t: usize) {
    let lt_t = &basis[t].lt().0;
    // Discard old pairs strictly dominated by the new element.
    pairs.retain(|pr| {
        let lcm_ij = &pr.lcm;
        if mono_div(lcm_ij, lt_t).is_none() {
            return true;
        }
        let lcm_it = mono_lcm(&basis[pr.i].lt().0, lt_t);
        let lcm_jt = mono_lcm(&basis[pr.j].lt().0, lt_t);
        lcm_it == *lcm_ij || lcm_jt == *lcm_ij
    });
    // Candidate new pairs (i, t).
    let mut cand: Vec<Pair> = (0..t)
        .map(|i| Pair { i, j: t, lcm: mono_lcm(&basis[i].lt().0, lt_t) })
        .collect();
    // Among candidates with equal lcm keep one; drop a candidate when another
    // candidate's lcm strictly divides it.
    let mut keep: Vec<Pair> = vec![];
    'cand: for pr in cand.drain(..) {
        for other in &keep {
            if other.lcm == pr.lcm {
                continue 'cand;
            }
        }
        let strictly_dominated = |a: &Pair, b: &Pair| {
            a.lcm != b.lcm && mono_div(&a.lcm, &b.lcm).is_some()
        };
        if keep.iter().any(|o| strictly_dominated(&pr, o)) {
            continue;
        }
        keep.retain(|o| !strictly_dominated(o, &pr));
        keep.push(pr);
    }
    // Buchberger's first criterion.
    keep.retain(|pr| !mono_coprime(&basis[pr.i].lt().0, &basis[pr.j].lt().0));
    pairs.extend(keep);
}

/// Reduced Groebner basis of the ideal generated by `input` under `ord`.
pub fn groebner(
    input: &[MPoly],
    ord: MonomialOrder,
    ctx: &FieldCtx,
    budget: &mut u64,
) -> Result<Vec<MPoly>> {
    let mut basis: Vec<MPoly> = vec![];
    let mut pairs: Vec<Pair> = vec![];
    for p in input {
        let p = p.reorder(ord);
        if p.is_zero() {
            continue;
        }
        basis.push(p.monic(ctx)?);
        update_pairs(&mut pairs, &basis, basis.len() - 1);
    }
    while !pairs.is_empty() {
        // Normal selection: smallest lcm degree first.
        let best = pairs
            .iter()
            .enumerate()
            .min_by_key(|(_, pr)| (mono_deg(&pr.lcm), pr.lcm.clone()))
            .map(|(k, _)| k)
            .unwrap();
        let pr = pairs.swap_remove(best);
        let (f, g) = (&basis[pr.i], &basis[pr.j]);
        let qf = mono_div(&pr.lcm, &f.lt().0).unwrap();
        let qg = mono_div(&pr.lcm, &g.lt().0).unwrap();
        let s = f
            .mul_term(&qf, &ctx.one(), ctx)
            .sub(&g.mul_term(&qg, &ctx.one(), ctx), ord, ctx);
        let r = normal_form(&s, &basis, ord, ctx, budget)?;
        if !r.is_zero() {
            basis.push(r.monic(ctx)?);
            update_pairs(&mut pairs, &basis, basis.len() - 1);
        }
    }
    // Minimalize.
    let mut keep = vec![true; basis.len()];
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            if i != j
                && keep[j]
                && keep[i]
                && mono_div(&basis[i].lt().0, &basis[j].lt().0).is_some()
            {
                keep[i] = false;
                break;
            }
        }
    }
    let minimal: Vec<MPoly> = basis
        .into_iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(p))
        .collect();
    // Fully reduce each element against the others.
    let mut reduced = vec![];
    for i in 0..minimal.len() {
        let others: Vec<MPoly> = minimal
            .iter()
            .enumerate()
            .filter_map(|(j, p)| (j != i).then(|| p.clone()))
            .collect();
        reduced.push(normal_form(&minimal[i], &others, ord, ctx, budget)?);
    }
    reduced.sort_by(|a, b| ord.cmp(&b.lt().0, &a.lt().0));
    Ok(reduced)
}

// ---------------------------------------------------------------------------
// FGLM order change (degrevlex -> lex), zero-dimensional ideals only
// ---------------------------------------------------------------------------

/// Monomials under the staircase of `basis` (not divisible by any leading
/// monomial), or an error if there are more than `cap` of them.
fn quotient_basis(basis: &[MPoly], nvars: usize, cap: usize) -> Result<Vec<Monomial>> {
    if basis.iter().any(|p| mono_is_one(&p.lt().0)) {
        return Ok(vec![]);
    }
    let mut out: Vec<Monomial> = vec![];
    let mut frontier: Vec<Monomial> = vec![vec![0; nvars]];
    let mut seen: std::collections::BTreeSet<Monomial> = frontier.iter().cloned().collect();
    while let Some(m) = frontier.pop() {
        if basis.iter().any(|p| mono_div(&m, &p.lt().0).is_some()) {
            continue;
        }
        out.push(m.clone());
        if out.len() > cap {
            return Err(Error::HypothesisViolation(
                "system is not zero-dimensional (unbounded quotient)".into(),
            ));
        }
        for i in 0..nvars {
            let mut mm = m.clone();
            mm[i] += 1;
            if seen.insert(mm.clone()) {
                frontier.push(mm);
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Convert a reduced degrevlex basis of a zero-dimensional ideal into the
/// reduced lex basis by linear algebra in the quotient.
pub fn fglm(
    drl_basis: &[MPoly],
    nvars: usize,
    ctx: &FieldCtx,
    budget: &mut u64,
) -> Result<Vec<MPoly>> {
    let ord = MonomialOrder::DegRevLex;
    let qb = quotient_basis(drl_basis, nvars, 200_000)?;
    if qb.is_empty() {
        return Ok(vec![MPoly::constant(ctx.one(), nvars, ctx)]);
    }
    let qpos: BTreeMap<&Monomial, usize> = qb.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let dim = qb.len();
    let nf_vec = |m: &Monomial, ctx: &FieldCtx, budget: &mut u64| -> Result<Vec<Fq>> {
        let p = MPoly { terms: vec![(m.clone(), ctx.one())] };
        let r = normal_form(&p, drl_basis, ord, ctx, budget)?;
        let mut v = vec![ctx.zero(); dim];
        for (mm, c) in &r.terms {
            v[qpos[mm]] = c.clone();
        }
        Ok(v)
    };
    // Row-echelon store: rows, pivot column per row, and the lex monomial
    // combination that produced each row.
    let mut rows: Vec<Vec<Fq>> = vec![];
    let mut pivots: Vec<usize> = vec![];
    let mut combos: Vec<MPoly> = vec![];
    let mut staircase: Vec<Monomial> = vec![];
    let mut glex: Vec<MPoly> = vec![];
    let mut todo: Vec<Monomial> = vec![vec![0; nvars]];
    while !todo.is_empty() {
        // Smallest candidate in lex order.
        let k = todo
            .iter()
            .enumerate()
            .min_by(|a, b| MonomialOrder::Lex.cmp(a.1, b.1))
            .map(|(k, _)| k)
            .unwrap();
        let m = todo.swap_remove(k);
        if glex.iter().any(|p| mono_div(&m, &p.lt().0).is_some()) {
            continue;
        }
        let mut v = nf_vec(&m, ctx, budget)?;
        let mut combo = MPoly { terms: vec![(m.clone(), ctx.one())] };
        // Eliminate against existing rows.
        for (r, &pc) in rows.iter().zip(&pivots) {
            if !ctx.is_zero(&v[pc]) {
                let f = v[pc].clone();
                for (x, y) in v.iter_mut().zip(r) {
                    *x = ctx.sub(x, &ctx.mul(&f, y));
                }
                let adj = combos[pivots.iter().position(|&q| q == pc).unwrap()]
                    .scale(&f, ctx);
                combo = combo.sub(&adj, MonomialOrder::Lex, ctx);
            }
        }
        match v.iter().position(|c| !ctx.is_zero(c)) {
            None => {
                // Linear dependence: new lex basis element.
                glex.push(combo.reorder(MonomialOrder::Lex).monic(ctx)?);
            }
            Some(pc) => {
                let inv = ctx.inv(&v[pc])?;
                let row: Vec<Fq> = v.iter().map(|c| ctx.mul(c, &inv)).collect();
                let combo = combo.scale(&inv, ctx);
                rows.push(row);
                pivots.push(pc);
                combos.push(combo);
                staircase.push(m.clone());
                if staircase.len() > dim {
                    return Err(Error::Arithmetic(
                        "fglm staircase exceeded quotient dimension".into(),
                    ));
                }
                for i in 0..nvars {
                    let mut mm = m.clone();
                    mm[i] += 1;
                    if !todo.contains(&mm) && !staircase.contains(&mm) {
                        todo.push(mm);
                    }
                }
            }
        }
    }
    glex.sort_by(|a, b| MonomialOrder::Lex.cmp(&b.lt().0, &a.lt().0));
    Ok(glex)
}

// ---------------------------------------------------------------------------
// Solving
// ---------------------------------------------------------------------------

/// Lex basis via the cheapest reliable route for the variable count.
fn lex_basis(
    polys: &[MPoly],
    nvars: usize,
    ctx: &FieldCtx,
    budget: &mut u64,
) -> Result<Vec<MPoly>> {
    if nvars <= 3 {
        return groebner(polys, MonomialOrder::Lex, ctx, budget);
    }
    let drl = groebner(polys, MonomialOrder::DegRevLex, ctx, budget)?;
    fglm(&drl, nvars, ctx, budget)
}

fn solve_rec(
    polys: &[MPoly],
    nvars: usize,
    ctx: &FieldCtx,
    budget: &mut u64,
    top: bool,
) -> Result<Vec<(Vec<Fq>, usize)>> {
    if nvars == 0 {
        // Zero polynomials in zero variables: the empty point, unless some
        // constant is nonzero.
        for p in polys {
            if !p.is_zero() {
                return Ok(vec![]);
            }
        }
        return Ok(vec![(vec![], 1)]);
    }
    let basis = lex_basis(polys, nvars, ctx, budget)?;
    if basis.iter().any(|p| !p.is_zero() && mono_is_one(&p.lt().0)) {
        return Ok(vec![]);
    }
    // Eliminant: basis elements involving only the last variable.
    let mut elim = FqPoly::zero();
    let mut found = false;
    for p in &basis {
        if p.terms.iter().all(|(m, _)| m[..nvars - 1].iter().all(|&e| e == 0)) {
            let mut coeffs = vec![ctx.zero(); p.total_degree() as usize + 1];
            for (m, c) in &p.terms {
                coeffs[m[nvars - 1] as usize] = c.clone();
            }
            let u = FqPoly(coeffs);
            elim = if found { elim.gcd(&u, ctx) } else { u };
            found = true;
        }
    }
    if !found || elim.is_zero() {
        return Err(Error::HypothesisViolation(
            "positive-dimensional system: no univariate eliminant".into(),
        ));
    }
    let mut out = vec![];
    for (root, mult) in fq_poly_roots(&elim, ctx)? {
        let specialized: Vec<MPoly> = basis
            .iter()
            .map(|p| p.specialize(nvars - 1, &root, MonomialOrder::Lex, ctx))
            .collect();
        for (mut point, sub_mult) in solve_rec(&specialized, nvars - 1, ctx, budget, false)? {
            point.push(root.clone());
            out.push((point, if top { mult } else { sub_mult }));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// All F_q-rational solutions of an expected zero-dimensional system, each
/// with the multiplicity of the root of the (last-variable) lex eliminant it
/// lies over. `budget` bounds the total number of reduction steps.
pub fn solve_zero_dim(
    sys: &PolySystem,
    ctx: &FieldCtx,
    budget: &mut u64,
) -> Result<Vec<(BTreeMap<String, Fq>, usize)>> {
    let nvars = sys.vars.len();
    for p in &sys.polys {
        for (m, _) in &p.terms {
            if m.len() != nvars {
                return Err(Error::InvalidInput(
                    "exponent vector length mismatch".into(),
                ));
            }
        }
    }
    let sols = solve_rec(&sys.polys, nvars, ctx, budget, true)?;
    Ok(sols
        .into_iter()
        .map(|(pt, mult)| {
            (
                sys.vars
                    .iter()
                    .cloned()
                    .zip(pt)
                    .collect::<BTreeMap<String, Fq>>(),
                mult,
            )
        })
        .collect())
}
