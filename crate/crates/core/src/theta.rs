//! Theta index combinatorics, theta null containers, the branch-point
//! initialization of the level-2 null point, its extension to level 2p, and
//! generation of the Riemann and Frobenius relation sets.

use std::collections::BTreeMap;
use std::fmt;

use crate::ff::{FieldCtx, Fq, HyperellipticCurve};
use crate::{Error, Result};

/// Index in Z_{2p}^g, stored as g residues mod 2p.
pub type ThetaIndex = Vec<u32>;

/// The index group (Z/2pZ)^g with its negation symmetry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexGroup {
    pub g: usize,
    pub p: u32,
}

impl IndexGroup {
    pub fn new(g: usize, p: u32) -> IndexGroup {
        IndexGroup { g, p }
    }

    pub fn two_p(&self) -> u32 {
        2 * self.p
    }

    pub fn zero(&self) -> ThetaIndex {
        vec![0; self.g]
    }

    pub fn add(&self, a: &ThetaIndex, b: &ThetaIndex) -> ThetaIndex {
        a.iter().zip(b).map(|(&x, &y)| (x + y) % self.two_p()).collect()
    }

    pub fn sub(&self, a: &ThetaIndex, b: &ThetaIndex) -> ThetaIndex {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x + self.two_p() - y) % self.two_p())
            .collect()
    }

    pub fn neg(&self, a: &ThetaIndex) -> ThetaIndex {
        a.iter().map(|&x| (self.two_p() - x) % self.two_p()).collect()
    }

    pub fn scalar(&self, k: u32, a: &ThetaIndex) -> ThetaIndex {
        a.iter().map(|&x| (k * x) % self.two_p()).collect()
    }

    /// Canonical representative of {a, -a}: the one whose reversed coordinate
    /// vector is lexicographically smallest (ties broken trivially).
    pub fn canonical(&self, a: &ThetaIndex) -> ThetaIndex {
        let n = self.neg(a);
        let rev = |v: &ThetaIndex| -> Vec<u32> { v.iter().rev().copied().collect() };
        if rev(&n) < rev(a) {
            n
        } else {
            a.clone()
        }
    }

    pub fn is_two_torsion(&self, a: &ThetaIndex) -> bool {
        a.iter().all(|&x| x == 0 || x == self.p)
    }

    /// All (2p)^g indices, in lexicographic order.
    pub fn all(&self) -> Vec<ThetaIndex> {
        let mut out: Vec<ThetaIndex> = vec![vec![]];
        for _ in 0..self.g {
            let mut next = Vec::with_capacity(out.len() * self.two_p() as usize);
            for prefix in &out {
                for c in 0..self.two_p() {
                    let mut v = prefix.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// The 2-torsion subgroup {0, p}^g (the image of Z_2^g under j -> pj).
    pub fn two_torsion(&self) -> Vec<ThetaIndex> {
        let mut out = vec![vec![]];
        for _ in 0..self.g {
            let mut next = Vec::new();
            for prefix in &out {
                for c in [0, self.p] {
                    let mut v: ThetaIndex = prefix.clone();
                    v.push(c);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// Canonical representatives of Z_{2p}^g / (u ~ -u), sorted
    /// lexicographically; count is ((2p)^g + 2^g)/2.
    pub fn canonical_indices(&self) -> Vec<ThetaIndex> {
        let mut set: Vec<ThetaIndex> = self
            .all()
            .iter()
            .map(|u| self.canonical(u))
            .collect();
        set.sort();
        set.dedup();
        set
    }
}

// ---------------------------------------------------------------------------
// Relation sets
// ---------------------------------------------------------------------------

/// One Frobenius-type relation: sum of plain quadratic terms on the left,
/// omega times a (plain, sigma^2-twisted) bilinear sum on the right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrobeniusRelation {
    /// The class label v the relation was generated from.
    pub v: ThetaIndex,
    /// Terms c * a_i * a_j (both plain); (i, j) sorted.
    pub lhs: Vec<(i64, ThetaIndex, ThetaIndex)>,
    /// Terms c * a_i * a_j^{sigma^2}.
    pub rhs: Vec<(i64, ThetaIndex, ThetaIndex)>,
}

/// One Riemann-type relation: a degree-4 integer polynomial identity
/// sum c * a_{i1} a_{i2} a_{i3} a_{i4} = 0 in plain variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RiemannRelation {
    /// Monomial (sorted canonical index quadruple) -> integer coefficient.
    pub terms: Vec<([ThetaIndex; 4], i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationSet {
    pub group: IndexGroup,
    pub frobenius: Vec<FrobeniusRelation>,
    pub riemann: Vec<RiemannRelation>,
}

/// The relations characterizing the canonical lift: one per canonical class
/// of v in Z_{2p}^g, namely
/// sum_{z in 2-torsion} a_{v+z} a_z = omega * sum_{u} a_{v+pu} a_u^{sigma^2}.
pub fn gen_frobenius_relations(g: usize, p: u32) -> RelationSet {
    let grp = IndexGroup::new(g, p);
    let mut frobenius = Vec::new();
    for v in grp.canonical_indices() {
        let mut lhs: BTreeMap<(ThetaIndex, ThetaIndex), i64> = BTreeMap::new();
        for z in grp.two_torsion() {
            let a = grp.canonical(&grp.add(&v, &z));
            let b = grp.canonical(&z);
            let key = if a <= b { (a, b) } else { (b, a) };
            *lhs.entry(key).or_insert(0) += 1;
        }
        let mut rhs: BTreeMap<(ThetaIndex, ThetaIndex), i64> = BTreeMap::new();
        for u in grp.all() {
            let plain = grp.canonical(&grp.add(&v, &grp.scalar(p, &u)));
            let twisted = grp.canonical(&u);
            *rhs.entry((plain, twisted)).or_insert(0) += 1;
        }
        frobenius.push(FrobeniusRelation {
            v,
            lhs: lhs.into_iter().map(|((a, b), c)| (c, a, b)).collect(),
            rhs: rhs.into_iter().map(|((a, b), c)| (c, a, b)).collect(),
        });
    }
    RelationSet { group: grp, frobenius, riemann: vec![] }
}

/// A formal integer polynomial in degree-4 theta monomials.
type Poly4 = BTreeMap<[ThetaIndex; 4], i64>;
/// A formal quadratic form sum c * a_i a_j with (i, j) sorted.
type Quad = BTreeMap<(ThetaIndex, ThetaIndex), i64>;

fn quad_form(grp: &IndexGroup, chi: &[u32], v: &ThetaIndex, w: &ThetaIndex) -> Quad {
    // sum_{t in Z_2} chi(t) a_{v+t} a_{w+t}, t embedded as p*t.
    let mut out = Quad::new();
    for t in grp.two_torsion() {
        let sign = chi_eval(grp, chi, &t);
        let a = grp.canonical(&grp.add(v, &t));
        let b = grp.canonical(&grp.add(w, &t));
        let key = if a <= b { (a, b) } else { (b, a) };
        *out.entry(key).or_insert(0) += sign;
    }
    out.retain(|_, c| *c != 0);
    out
}

fn chi_eval(grp: &IndexGroup, chi: &[u32], t: &ThetaIndex) -> i64 {
    // chi is a bit vector; t has coordinates in {0, p}.
    let mut dot = 0u32;
    for (bit, &coord) in chi.iter().zip(t) {
        if coord == grp.p {
            dot += bit;
        }
    }
    if dot % 2 == 0 {
        1
    } else {
        -1
    }
}

fn quad_mul(a: &Quad, b: &Quad) -> Poly4 {
    let mut out = Poly4::new();
    for ((a1, a2), ca) in a {
        for ((b1, b2), cb) in b {
            let mut mono = [a1.clone(), a2.clone(), b1.clone(), b2.clone()];
            mono.sort();
            *out.entry(mono).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn poly_sub(a: &Poly4, b: &Poly4) -> Poly4 {
    let mut out = a.clone();
    for (m, c) in b {
        *out.entry(m.clone()).or_insert(0) -= c;
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Canonical form: divide by integer content, make the first monomial's
/// coefficient positive.
fn poly_canonical(p: &Poly4) -> Poly4 {
    if p.is_empty() {
        return p.clone();
    }
    let mut content: i64 = 0;
    for c in p.values() {
        content = gcd_i64(content, c.abs());
    }
    let first_sign = p.values().next().map(|c| c.signum()).unwrap_or(1);
    let div = content * first_sign;
    p.iter().map(|(m, c)| (m.clone(), c / div)).collect()
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd_i64(b, a % b)
    }
}

/// Quartic identities among level-2p theta nulls: for each quadruple
/// (v, w, x, y) with coordinatewise even sum, A = (v+w+x+y)/2 gives the
/// equivalent quadruple (A-v, A-w, A-x, A-y), and the products of the
/// quadratic forms r(v,w) = sum_t a_{v+t} a_{w+t} over 2-torsion t agree:
/// r(v,w) r(x,y) = r(A-v,A-w) r(A-x,A-y).
/// Differences are canonicalized and deduplicated. Only the trivial
/// character of Z_2^g is used; the character-twisted variants are integer
/// combinations of these.
pub fn gen_riemann_relations(g: usize, p: u32, nu: u32) -> Result<RelationSet> {
    if nu != 1 {
        return Err(Error::InvalidInput(format!("only nu = 1 is supported, got {nu}")));
    }
    let grp = IndexGroup::new(g, p);
    let chars: Vec<Vec<u32>> = vec![vec![0; g]];
    let all = grp.all();
    // Cache the chi-twisted quadratic forms per ordered pair.
    let mut quads: BTreeMap<(ThetaIndex, ThetaIndex), Vec<Quad>> = BTreeMap::new();
    for v in &all {
        for w in &all {
            let forms: Vec<Quad> =
                chars.iter().map(|chi| quad_form(&grp, chi, v, w)).collect();
            quads.insert((v.clone(), w.clone()), forms);
        }
    }
    let mut seen: std::collections::BTreeSet<Vec<([ThetaIndex; 4], i64)>> =
        std::collections::BTreeSet::new();
    let mut riemann: Vec<RiemannRelation> = Vec::new();
    for v in &all {
        for w in &all {
            for x in &all {
                for y in &all {
                    let s = grp.add(&grp.add(v, w), &grp.add(x, y));
                    if s.iter().any(|&c| c % 2 != 0) {
                        continue;
                    }
                    let a: ThetaIndex = s.iter().map(|&c| c / 2).collect();
                    let dual = (
                        grp.sub(&a, v),
                        grp.sub(&a, w),
                        grp.sub(&a, x),
                        grp.sub(&a, y),
                    );
                    for ci in 0..chars.len() {
                        let p1 = quad_mul(
                            &quads[&(v.clone(), w.clone())][ci],
                            &quads[&(x.clone(), y.clone())][ci],
                        );
                        let p2 = quad_mul(
                            &quads[&(dual.0.clone(), dual.1.clone())][ci],
                            &quads[&(dual.2.clone(), dual.3.clone())][ci],
                        );
                        let diff = poly_canonical(&poly_sub(&p1, &p2));
                        if diff.is_empty() {
                            continue;
                        }
                        let key: Vec<([ThetaIndex; 4], i64)> =
                            diff.iter().map(|(m, c)| (m.clone(), *c)).collect();
                        if seen.insert(key.clone()) {
                            riemann.push(RiemannRelation { terms: key });
                        }
                    }
                }
            }
        }
    }
    riemann.sort();
    Ok(RelationSet { group: grp, frobenius: vec![], riemann })
}

impl fmt::Display for RelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx = |u: &ThetaIndex| -> String {
            u.iter().map(|c| c.to_string()).collect::<Vec<_>>().join("")
        };
        for rel in &self.frobenius {
            let side = |terms: &[(i64, ThetaIndex, ThetaIndex)], twist: bool| -> String {
                terms
                    .iter()
                    .map(|(c, a, b)| {
                        let x = format!("x_{}", idx(a));
                        let y = format!("{}_{}", if twist { "y" } else { "x" }, idx(b));
                        if *c == 1 {
                            format!("{x}*{y}")
                        } else {
                            format!("{c}*{x}*{y}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" + ")
            };
            writeln!(f, "{} = w*({})", side(&rel.lhs, false), side(&rel.rhs, true))?;
        }
        for rel in &self.riemann {
            let terms: Vec<String> = rel
                .terms
                .iter()
                .map(|(m, c)| {
                    let vars: Vec<String> = m.iter().map(|u| format!("x_{}", idx(u))).collect();
                    if *c == 1 {
                        vars.join("*")
                    } else {
                        format!("{}*{}", c, vars.join("*"))
                    }
                })
                .collect();
            writeln!(f, "0 = {}", terms.join(" + "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Theta null containers
// ---------------------------------------------------------------------------

/// Theta null point with values in a generic ring representation T, stored on
/// canonical indices only (a_u = a_{-u} by symmetry).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaNull<T> {
    pub group: IndexGroup,
    pub values: BTreeMap<ThetaIndex, T>,
}

impl<T: Clone> ThetaNull<T> {
    pub fn new(group: IndexGroup, values: BTreeMap<ThetaIndex, T>) -> Result<ThetaNull<T>> {
        let expect = group.canonical_indices();
        if values.len() != expect.len() || expect.iter().any(|u| !values.contains_key(u)) {
            return Err(Error::InvalidInput(
                "theta null must be defined exactly on canonical indices".into(),
            ));
        }
        Ok(ThetaNull { group, values })
    }

    pub fn get(&self, u: &ThetaIndex) -> &T {
        &self.values[&self.group.canonical(u)]
    }
}

// ---------------------------------------------------------------------------
// Branch-point initialization (level 2)
// ---------------------------------------------------------------------------

/// Squared small theta constants computed from branch-point differences.
/// Each even characteristic (v, u) over F_2^g corresponds to a balanced
/// partition of the 2g+2 branch points; the squared constant is a square
/// root of the product of pairwise differences within each part, determined
/// only up to sign.
#[derive(Debug, Clone)]
pub struct ThomaeData {
    /// Even characteristics (v, u), sorted lexicographically.
    pub even_chars: Vec<(Vec<u32>, Vec<u32>)>,
    /// Branch-difference product per characteristic, after the common
    /// quadratic-twist scaling when one was needed.
    pub products: Vec<Fq>,
    /// One fixed square root of each product; signs are explored downstream.
    pub roots: Vec<Fq>,
}

/// Odd characteristics [v1 v2 | u1 u2] attached to the six branch points of
/// a genus-2 curve (a fixed homology marking); the even characteristic of a
/// 3+3 partition is the sum over either part.
const G2_BRANCH_CHARS: [[u32; 4]; 6] = [
    [0, 1, 0, 1],
    [0, 1, 1, 1],
    [1, 0, 1, 1],
    [1, 0, 1, 0],
    [1, 1, 1, 0],
    [1, 1, 0, 1],
];

/// Branch-difference products indexed by even characteristic, without any
/// square roots taken.
pub fn thomae_products(
    curve: &HyperellipticCurve,
    ctx: &FieldCtx,
) -> Result<Vec<((Vec<u32>, Vec<u32>), Fq)>> {
    let g = curve.genus;
    let pts = &curve.branch_points;
    let mut items: Vec<((Vec<u32>, Vec<u32>), Fq)> = vec![];
    match g {
        1 => {
            let part = |i: usize, j: usize, k: usize, l: usize| {
                ctx.mul(&ctx.sub(&pts[i], &pts[j]), &ctx.sub(&pts[k], &pts[l]))
            };
            items.push(((vec![0], vec![0]), part(0, 2, 1, 3)));
            items.push(((vec![0], vec![1]), part(0, 3, 1, 2)));
            items.push(((vec![1], vec![0]), part(0, 1, 2, 3)));
        }
        2 => {
            for a in 1..6usize {
                for b in (a + 1)..6 {
                    let s = [0usize, a, b];
                    let sc: Vec<usize> = (0..6).filter(|i| !s.contains(i)).collect();
                    let mut ch = [0u32; 4];
                    for &i in &s {
                        for (t, c) in ch.iter_mut().enumerate() {
                            *c = (*c + G2_BRANCH_CHARS[i][t]) % 2;
                        }
                    }
                    let mut prod = ctx.one();
                    for set in [&s[..], &sc[..]] {
                        for x in 0..set.len() {
                            for y in (x + 1)..set.len() {
                                prod = ctx.mul(&prod, &ctx.sub(&pts[set[x]], &pts[set[y]]));
                            }
                        }
                    }
                    items.push(((vec![ch[0], ch[1]], vec![ch[2], ch[3]]), prod));
                }
            }
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "branch-point theta initialization supports genus 1 and 2, got {g}"
            )))
        }
    }
    items.sort_by(|a, b| a.0.cmp(&b.0));
    for w in items.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Arithmetic(
                "duplicate even characteristic in branch-point table".into(),
            ));
        }
    }
    for (_, prod) in &items {
        if ctx.is_zero(prod) {
            return Err(Error::InvalidInput("repeated branch points".into()));
        }
    }
    Ok(items)
}

/// Squared theta constants for every even characteristic, as square roots of
/// the branch-difference products. All products must have the same quadratic
/// character; when they are uniformly non-square a common non-residue twist
/// is applied (an overall projective rescaling of the eventual null point).
pub fn thomae_squares(curve: &HyperellipticCurve, ctx: &FieldCtx) -> Result<ThomaeData> {
    let items = thomae_products(curve, ctx)?;
    let chis: Vec<i32> = items.iter().map(|(_, d)| ctx.chi(d)).collect();
    if chis.iter().any(|&c| c != chis[0]) {
        return Err(Error::HypothesisViolation(
            "branch-difference products have mixed quadratic character; \
             the level-2 theta structure is not rational over this field"
                .into(),
        ));
    }
    let mut products: Vec<Fq> = items.iter().map(|(_, d)| d.clone()).collect();
    if chis[0] == -1 {
        let c = ctx.nonresidue();
        for d in products.iter_mut() {
            *d = ctx.mul(d, &c);
        }
    }
    let mut roots = Vec::with_capacity(products.len());
    for d in &products {
        let r = ctx
            .sqrt(d)
            .ok_or_else(|| Error::Arithmetic("square root lost after twist".into()))?;
        roots.push(r);
    }
    Ok(ThomaeData {
        even_chars: items.into_iter().map(|(c, _)| c).collect(),
        products,
        roots,
    })
}

/// A level-2 theta null point (indices Z_2^g, trivial negation) together
/// with the Gray-code position of the sign vector that produced it.
#[derive(Debug, Clone)]
pub struct Level2Candidate {
    pub null: ThetaNull<Fq>,
    pub sign_index: u64,
}

fn bit_index(i: usize, g: usize) -> ThetaIndex {
    (0..g).map(|j| ((i >> (g - 1 - j)) & 1) as u32).collect()
}

/// Inverts the duplication formula: recovers the level-2 null point (a_u)
/// whose pairwise products have the squared constants of `thomae` as their
/// Hadamard transform. Sign vectors are scanned in Gray-code order starting
/// from `start` (the first characteristic's sign is fixed, a global flip
/// being projectively trivial); each candidate product matrix is accepted
/// only if all its 2x2 minors vanish, so that a_x = M[x][b] is consistent.
pub fn reverse_duplication(
    thomae: &ThomaeData,
    ctx: &FieldCtx,
    start: u64,
) -> Result<Level2Candidate> {
    let g = thomae.even_chars[0].0.len();
    let n2 = 1usize << g;
    let nchars = thomae.even_chars.len();
    let budget: u64 = 1 << (nchars - 1);
    let pos: BTreeMap<&(Vec<u32>, Vec<u32>), usize> = thomae
        .even_chars
        .iter()
        .enumerate()
        .map(|(i, c)| (c, i))
        .collect();
    for k in start..budget {
        let gray = k ^ (k >> 1);
        // Squared constants under this sign assignment, indexed by (v, u)
        // as bit masks; odd characteristics contribute zero.
        let tval = |v: usize, u: usize| -> Fq {
            let key = (bit_index(v, g), bit_index(u, g));
            match pos.get(&key) {
                None => ctx.zero(),
                Some(&i) => {
                    let r = thomae.roots[i].clone();
                    if i > 0 && (gray >> (i - 1)) & 1 == 1 {
                        ctx.neg(&r)
                    } else {
                        r
                    }
                }
            }
        };
        let mut m = vec![vec![ctx.zero(); n2]; n2];
        for x in 0..n2 {
            for y in 0..n2 {
                let mut acc = ctx.zero();
                for v in 0..n2 {
                    let t = tval(v, x ^ y);
                    if ((v & y).count_ones()) % 2 == 1 {
                        acc = ctx.sub(&acc, &t);
                    } else {
                        acc = ctx.add(&acc, &t);
                    }
                }
                m[x][y] = acc;
            }
        }
        let Some(b) = (0..n2).find(|&i| !ctx.is_zero(&m[i][i])) else {
            continue;
        };
        let ok = (0..n2).all(|x| {
            (0..n2).all(|y| {
                ctx.mul(&m[x][y], &m[b][b]) == ctx.mul(&m[x][b], &m[y][b])
            })
        });
        if !ok {
            continue;
        }
        let inv = ctx.inv(&m[b][b])?;
        let values: BTreeMap<ThetaIndex, Fq> = (0..n2)
            .map(|x| (bit_index(x, g), ctx.mul(&m[x][b], &inv)))
            .collect();
        let null = ThetaNull::new(IndexGroup::new(g, 1), values)?;
        return Ok(Level2Candidate { null, sign_index: k });
    }
    Err(Error::HypothesisViolation(
        "all theta sign choices exhausted in reverse duplication".into(),
    ))
}

// ---------------------------------------------------------------------------
// Extension to level 2p
// ---------------------------------------------------------------------------

/// Relations used to build the extension/lift ideals. Kept as a single
/// choke point so the generating set can be enlarged without touching the
/// printed-set generator.
pub fn riemann_ideal_relations(g: usize, p: u32) -> Result<RelationSet> {
    gen_riemann_relations(g, p, 1)
}

/// Extends a level-2 theta null point to level 2p by specializing the
/// quartic relation set at the known 2-torsion coordinates and solving the
/// resulting zero-dimensional system. The accepted solution is the one lying
/// over an eliminant root of multiplicity exactly p^g (smallest coordinate
/// vector on ties); the result is normalized to a_0 = 1.
pub fn extend_to_level_2p(
    level2: &ThetaNull<Fq>,
    p: u32,
    ctx: &FieldCtx,
    budget: &mut u64,
) -> Result<ThetaNull<Fq>> {
    let g = level2.group.g;
    let grp = IndexGroup::new(g, p);
    // Normalize the known two-torsion block by its first unit coordinate.
    let two_t = grp.two_torsion();
    let unit = two_t
        .iter()
        .find(|u| {
            let bits: ThetaIndex = u.iter().map(|&c| c / p).collect();
            !ctx.is_zero(level2.get(&bits))
        })
        .ok_or_else(|| {
            Error::InvalidInput("level-2 theta null point has no unit coordinate".into())
        })?;
    let unit_bits: ThetaIndex = unit.iter().map(|&c| c / p).collect();
    let inv = ctx.inv(level2.get(&unit_bits))?;
    let mut known: BTreeMap<ThetaIndex, Fq> = BTreeMap::new();
    for u in &two_t {
        let bits: ThetaIndex = u.iter().map(|&c| c / p).collect();
        known.insert(grp.canonical(u), ctx.mul(level2.get(&bits), &inv));
    }
    // Unknowns: canonical indices outside the two-torsion block, ascending;
    // the solver eliminates the last variable first.
    let vars: Vec<ThetaIndex> = grp
        .canonical_indices()
        .into_iter()
        .filter(|u| !grp.is_two_torsion(u))
        .collect();
    let vpos: BTreeMap<&ThetaIndex, usize> = vars.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let nvars = vars.len();
    let rels = riemann_ideal_relations(g, p)?;
    let mut polys: Vec<crate::solver::MPoly> = vec![];
    for rel in &rels.riemann {
        let terms = rel.terms.iter().map(|(quad, c)| {
            let mut mono = vec![0u32; nvars];
            let mut coeff = ctx.from_i64(*c);
            for idx in quad {
                match known.get(idx) {
                    Some(v) => coeff = ctx.mul(&coeff, v),
                    None => mono[vpos[idx]] += 1,
                }
            }
            (mono, coeff)
        });
        let poly =
            crate::solver::MPoly::from_terms(terms, crate::solver::MonomialOrder::Lex, ctx);
        if !poly.is_zero() {
            polys.push(poly);
        }
    }
    let sys = crate::solver::PolySystem {
        vars: (0..nvars).map(|i| format!("x{i}")).collect(),
        polys,
    };
    let sols = crate::solver::solve_zero_dim(&sys, ctx, budget)?;
    let want = (p as usize).pow(g as u32);
    let hit = sols
        .iter()
        .find(|(_, m)| *m == want)
        .ok_or_else(|| {
            Error::HypothesisViolation(format!(
                "no eliminant root of multiplicity {want}; wrong sign branch upstream"
            ))
        })?;
    let mut values: BTreeMap<ThetaIndex, Fq> = known.clone();
    for (i, u) in vars.iter().enumerate() {
        values.insert(u.clone(), hit.0[&format!("x{i}")].clone());
    }
    // Normalize a_0 = 1.
    let a0 = values[&grp.zero()].clone();
    let a0inv = ctx.inv(&a0).map_err(|_| {
        Error::HypothesisViolation("level-2p null point has a_0 = 0".into())
    })?;
    for v in values.values_mut() {
        *v = ctx.mul(v, &a0inv);
    }
    let null = ThetaNull::new(grp, values)?;
    // The returned point must satisfy every generated relation exactly.
    for rel in &rels.riemann {
        let mut acc = ctx.zero();
        for (quad, c) in &rel.terms {
            let mut t = ctx.from_i64(*c);
            for idx in quad {
                t = ctx.mul(&t, null.get(idx));
            }
            acc = ctx.add(&acc, &t);
        }
        if !ctx.is_zero(&acc) {
            return Err(Error::Arithmetic(
                "extended null point fails a quartic relation".into(),
            ));
        }
    }
    Ok(null)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_index_counts() {
        for (g, p, expect) in [(1usize, 3u32, 4usize), (1, 5, 6), (2, 3, 20)] {
            let grp = IndexGroup::new(g, p);
            assert_eq!(grp.canonical_indices().len(), expect);
            assert_eq!(
                expect,
                ((2 * p as usize).pow(g as u32) + (1 << g)) / 2
            );
        }
    }

    #[test]
    fn canonical_reps_g2() {
        let grp = IndexGroup::new(2, 3);
        // -(2,5) = (4,1): the representative compares the last coordinate
        // first, matching the variable naming of the degree-28 worked example.
        assert_eq!(grp.canonical(&vec![2, 5]), vec![4, 1]);
        assert_eq!(grp.canonical(&vec![1, 4]), vec![5, 2]);
        assert_eq!(grp.canonical(&vec![1, 3]), vec![1, 3]);
        let non2t: Vec<ThetaIndex> = grp
            .canonical_indices()
            .into_iter()
            .filter(|u| !grp.is_two_torsion(u))
            .collect();
        assert_eq!(non2t.len(), 16);
        assert_eq!(non2t[12..], [vec![4, 1], vec![4, 2], vec![5, 1], vec![5, 2]]);
    }

    fn frob_for_v(set: &RelationSet, v: &[u32]) -> FrobeniusRelation {
        set.frobenius
            .iter()
            .find(|r| r.v == v.to_vec())
            .cloned()
            .expect("relation for v")
    }

    fn pairs(terms: &[(i64, ThetaIndex, ThetaIndex)]) -> Vec<(i64, u32, u32)> {
        terms.iter().map(|(c, a, b)| (*c, a[0], b[0])).collect()
    }

    #[test]
    fn frobenius_g1_p3_matches_printed_system() {
        let set = gen_frobenius_relations(1, 3);
        assert_eq!(set.frobenius.len(), 4);
        // a1 a0 + a2 a3 = w (a1 s0 + a2 s3 + 2 a1 s2 + 2 a2 s1)
        let r = frob_for_v(&set, &[1]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 1), (1, 2, 3)]);
        assert_eq!(pairs(&r.rhs), vec![(1, 1, 0), (2, 1, 2), (2, 2, 1), (1, 2, 3)]);
        // a2 a0 + a1 a3 = w (2 a1 s1 + a2 s0 + a1 s3 + 2 a2 s2)
        let r = frob_for_v(&set, &[2]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 2), (1, 1, 3)]);
        assert_eq!(pairs(&r.rhs), vec![(2, 1, 1), (1, 1, 3), (1, 2, 0), (2, 2, 2)]);
        // a3^2 + a0^2 = w (2 a0 s2 + a3 s3 + 2 a3 s1 + a0 s0)
        let r = frob_for_v(&set, &[0]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 0), (1, 3, 3)]);
        assert_eq!(pairs(&r.rhs), vec![(1, 0, 0), (2, 0, 2), (2, 3, 1), (1, 3, 3)]);
        // 2 a0 a3 = w (a0 s3 + 2 a3 s2 + a3 s0 + 2 a0 s1)
        let r = frob_for_v(&set, &[3]);
        assert_eq!(pairs(&r.lhs), vec![(2, 0, 3)]);
        assert_eq!(pairs(&r.rhs), vec![(2, 0, 1), (1, 0, 3), (1, 3, 0), (2, 3, 2)]);
    }

    #[test]
    fn frobenius_g1_p5_matches_printed_system() {
        let set = gen_frobenius_relations(1, 5);
        assert_eq!(set.frobenius.len(), 6);
        // v=2: a2 a0 + a3 a5 = w (2 a3 s3 + 2 a3 s1 + a2 s0 + 2 a2 s4 + 2 a2 s2 + a3 s5)
        let r = frob_for_v(&set, &[2]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 2), (1, 3, 5)]);
        assert_eq!(
            pairs(&r.rhs),
            vec![(1, 2, 0), (2, 2, 2), (2, 2, 4), (2, 3, 1), (2, 3, 3), (1, 3, 5)]
        );
        // v=3: a3 a0 + a2 a5 = w (2 a2 s3 + a2 s5 + 2 a3 s4 + 2 a3 s2 + 2 a2 s1 + a3 s0)
        let r = frob_for_v(&set, &[3]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 3), (1, 2, 5)]);
        assert_eq!(
            pairs(&r.rhs),
            vec![(2, 2, 1), (2, 2, 3), (1, 2, 5), (1, 3, 0), (2, 3, 2), (2, 3, 4)]
        );
        // v=5: 2 a0 a5 = w (a0 s5 + 2 a5 s4 + 2 a0 s3 + 2 a5 s2 + a5 s0 + 2 a0 s1)
        let r = frob_for_v(&set, &[5]);
        assert_eq!(pairs(&r.lhs), vec![(2, 0, 5)]);
        assert_eq!(
            pairs(&r.rhs),
            vec![(2, 0, 1), (2, 0, 3), (1, 0, 5), (1, 5, 0), (2, 5, 2), (2, 5, 4)]
        );
        // v=4: a4 a0 + a1 a5 = w (a4 s0 + 2 a1 s1 + a1 s5 + 2 a1 s3 + 2 a4 s4 + 2 a4 s2)
        let r = frob_for_v(&set, &[4]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 4), (1, 1, 5)]);
        assert_eq!(
            pairs(&r.rhs),
            vec![(2, 1, 1), (2, 1, 3), (1, 1, 5), (1, 4, 0), (2, 4, 2), (2, 4, 4)]
        );
        // v=0: a5^2 + a0^2 = w (2 a0 s2 + 2 a5 s1 + 2 a0 s4 + a5 s5 + 2 a5 s3 + a0 s0)
        let r = frob_for_v(&set, &[0]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 0), (1, 5, 5)]);
        assert_eq!(
            pairs(&r.rhs),
            vec![(1, 0, 0), (2, 0, 2), (2, 0, 4), (2, 5, 1), (2, 5, 3), (1, 5, 5)]
        );
        // v=1: a1 a0 + a4 a5 = w (a1 s0 + 2 a4 s3 + a4 s5 + 2 a1 s4 + 2 a1 s2 + 2 a4 s1)
        let r = frob_for_v(&set, &[1]);
        assert_eq!(pairs(&r.lhs), vec![(1, 0, 1), (1, 4, 5)]);
        assert_eq!(
            pairs(&r.rhs),
            vec![(1, 1, 0), (2, 1, 2), (2, 1, 4), (2, 4, 1), (2, 4, 3), (1, 4, 5)]
        );
    }

    /// Parses a monomial list like [(1, [1,0,0,3]), (-2, [1,1,2,2])] into a
    /// canonical relation for set comparison.
    fn printed_riemann(g: usize, p: u32, monos: &[(i64, [u32; 4])]) -> RiemannRelation {
        let grp = IndexGroup::new(g, p);
        let mut poly = Poly4::new();
        for (c, m) in monos {
            let mut mono: [ThetaIndex; 4] = [
                grp.canonical(&vec![m[0]]),
                grp.canonical(&vec![m[1]]),
                grp.canonical(&vec![m[2]]),
                grp.canonical(&vec![m[3]]),
            ];
            mono.sort();
            *poly.entry(mono).or_insert(0) += c;
        }
        let poly = poly_canonical(&poly);
        RiemannRelation { terms: poly.into_iter().collect() }
    }

    #[test]
    fn riemann_g1_p3_matches_printed_system() {
        let set = gen_riemann_relations(1, 3, 1).unwrap();
        let printed = vec![
            printed_riemann(
                1,
                3,
                &[(1, [1, 0, 0, 3]), (-2, [1, 1, 2, 2]), (1, [2, 0, 3, 3])],
            ),
            printed_riemann(
                1,
                3,
                &[
                    (1, [2, 0, 0, 0]),
                    (1, [1, 0, 0, 3]),
                    (-1, [2, 2, 2, 2]),
                    (-2, [1, 1, 2, 2]),
                    (-1, [1, 1, 1, 1]),
                    (1, [1, 3, 3, 3]),
                    (1, [2, 0, 3, 3]),
                ],
            ),
        ];
        let mut got = set.riemann.clone();
        let mut want = printed;
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn riemann_g1_p5_matches_printed_system() {
        let set = gen_riemann_relations(1, 5, 1).unwrap();
        let printed = vec![
            printed_riemann(
                1,
                5,
                &[
                    (-1, [5, 5, 2, 4]),
                    (1, [2, 2, 4, 4]),
                    (1, [3, 3, 4, 4]),
                    (-1, [1, 0, 0, 3]),
                    (1, [1, 1, 2, 2]),
                    (-1, [5, 5, 1, 3]),
                    (1, [1, 1, 3, 3]),
                    (-1, [2, 0, 0, 4]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (-1, [1, 1, 0, 4]),
                    (1, [2, 3, 3, 4]),
                    (-1, [5, 1, 4, 4]),
                    (1, [1, 2, 2, 3]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (-1, [5, 0, 3, 4]),
                    (2, [1, 2, 3, 4]),
                    (-1, [5, 1, 2, 0]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (-1, [5, 5, 2, 0]),
                    (2, [1, 1, 4, 4]),
                    (-1, [5, 0, 0, 3]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (1, [2, 2, 2, 0]),
                    (-1, [1, 1, 1, 3]),
                    (1, [5, 3, 3, 3]),
                    (1, [2, 0, 3, 3]),
                    (1, [5, 2, 2, 3]),
                    (-1, [1, 3, 4, 4]),
                    (-1, [2, 4, 4, 4]),
                    (-1, [1, 1, 2, 4]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (-2, [1, 2, 3, 4]),
                    (1, [5, 5, 1, 3]),
                    (-1, [1, 1, 3, 3]),
                    (1, [5, 1, 2, 0]),
                    (1, [2, 0, 0, 4]),
                    (-1, [2, 2, 4, 4]),
                    (1, [5, 0, 3, 4]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (-1, [5, 5, 2, 4]),
                    (1, [3, 3, 4, 4]),
                    (-1, [5, 0, 3, 4]),
                    (1, [1, 1, 2, 2]),
                    (2, [1, 2, 3, 4]),
                    (-1, [5, 1, 2, 0]),
                    (-1, [1, 0, 0, 3]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (1, [5, 5, 0, 4]),
                    (-2, [2, 2, 3, 3]),
                    (1, [5, 1, 0, 0]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (1, [2, 0, 3, 3]),
                    (1, [5, 2, 2, 3]),
                    (-1, [1, 3, 4, 4]),
                    (-1, [1, 1, 2, 4]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (-1, [1, 1, 0, 4]),
                    (1, [2, 2, 2, 4]),
                    (1, [1, 3, 3, 3]),
                    (-1, [0, 4, 4, 4]),
                    (-1, [5, 1, 1, 1]),
                    (-1, [5, 1, 4, 4]),
                    (1, [2, 3, 3, 4]),
                    (1, [1, 2, 2, 3]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (1, [2, 0, 0, 0]),
                    (-1, [1, 1, 1, 1]),
                    (1, [5, 0, 0, 3]),
                    (1, [5, 5, 5, 3]),
                    (1, [5, 5, 2, 0]),
                    (-2, [1, 1, 4, 4]),
                    (-1, [4, 4, 4, 4]),
                ],
            ),
            printed_riemann(
                1,
                5,
                &[
                    (1, [5, 5, 5, 1]),
                    (-1, [2, 2, 2, 2]),
                    (1, [0, 0, 0, 4]),
                    (1, [5, 5, 0, 4]),
                    (-1, [3, 3, 3, 3]),
                    (-2, [2, 2, 3, 3]),
                    (1, [5, 1, 0, 0]),
                ],
            ),
        ];
        let mut got = set.riemann.clone();
        let mut want = printed;
        got.sort();
        want.sort();
        assert_eq!(
            got.len(),
            12,
            "generated {} relations:\n{}",
            got.len(),
            RelationSet { group: set.group.clone(), frobenius: vec![], riemann: got.clone() }
        );
        want.sort();
        want.dedup();
        assert_eq!(got, want);
    }

    use crate::ff::FieldCtx;

    // Hadamard transform of the pairwise products of a level-2 candidate,
    // squared; proportional to the branch-difference products when the
    // candidate is consistent.
    fn roundtrip_check(cand: &Level2Candidate, thomae: &ThomaeData, ctx: &FieldCtx) {
        let g = thomae.even_chars[0].0.len();
        let n2 = 1usize << g;
        let a = |i: usize| cand.null.values[&bit_index(i, g)].clone();
        let tprime = |v: usize, u: usize| -> Fq {
            let mut acc = ctx.zero();
            for t in 0..n2 {
                let term = ctx.mul(&a(u ^ t), &a(t));
                if (v & t).count_ones() % 2 == 1 {
                    acc = ctx.sub(&acc, &term);
                } else {
                    acc = ctx.add(&acc, &term);
                }
            }
            acc
        };
        let mut sq = vec![];
        for (i, (v, u)) in thomae.even_chars.iter().enumerate() {
            let vi = v.iter().fold(0usize, |s, &b| 2 * s + b as usize);
            let ui = u.iter().fold(0usize, |s, &b| 2 * s + b as usize);
            sq.push((ctx.square(&tprime(vi, ui)), thomae.products[i].clone()));
        }
        // odd characteristics transform to zero
        for v in 0..n2 {
            for u in 0..n2 {
                let vb = bit_index(v, g);
                let ub = bit_index(u, g);
                let odd = vb.iter().zip(&ub).map(|(a, b)| a * b).sum::<u32>() % 2 == 1;
                if odd {
                    assert!(ctx.is_zero(&tprime(v, u)));
                }
            }
        }
        for i in 1..sq.len() {
            assert_eq!(
                ctx.mul(&sq[i].0, &sq[0].1),
                ctx.mul(&sq[0].0, &sq[i].1),
                "recovered squared constants not proportional to the products"
            );
        }
    }

    #[test]
    fn thomae_products_f5_hand_values() {
        let ctx = FieldCtx::new(5, &[0, 1], 1).unwrap();
        let pts: Vec<Fq> = (0..4).map(|i| ctx.from_u64(i)).collect();
        let c = HyperellipticCurve::new(1, pts, &ctx).unwrap();
        let items = thomae_products(&c, &ctx).unwrap();
        let by_char: BTreeMap<_, _> = items.into_iter().collect();
        assert_eq!(by_char[&(vec![0], vec![0])], ctx.from_u64(4));
        assert_eq!(by_char[&(vec![0], vec![1])], ctx.from_u64(3));
        assert_eq!(by_char[&(vec![1], vec![0])], ctx.from_u64(1));
        // 4 and 1 are squares mod 5 but 3 is not: mixed character is rejected.
        match thomae_squares(&c, &ctx) {
            Err(Error::HypothesisViolation(_)) => {}
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }

    #[test]
    fn duplication_roundtrip_g1_f9() {
        let ctx = FieldCtx::new(3, &[1, 0, 1], 7).unwrap();
        let t = ctx.gen();
        let candidates: Vec<Vec<Fq>> = vec![
            vec![ctx.zero(), ctx.one(), ctx.from_u64(2), t.clone()],
            vec![ctx.zero(), ctx.one(), t.clone(), ctx.add(&t, &ctx.one())],
            vec![
                ctx.zero(),
                ctx.one(),
                ctx.add(&t, &ctx.one()),
                ctx.add(&t, &ctx.from_u64(2)),
            ],
            vec![ctx.one(), ctx.from_u64(2), t.clone(), ctx.neg(&t)],
        ];
        let mut done = false;
        for pts in candidates {
            let c = HyperellipticCurve::new(1, pts, &ctx).unwrap();
            let Ok(th) = thomae_squares(&c, &ctx) else { continue };
            let cand = reverse_duplication(&th, &ctx, 0).unwrap();
            roundtrip_check(&cand, &th, &ctx);
            done = true;
            break;
        }
        assert!(done, "no branch set with uniform quadratic character");
    }

    #[test]
    fn duplication_roundtrip_g2_f81() {
        let ctx = FieldCtx::new(3, &[2, 1, 0, 0, 1], 11).unwrap();
        let t = ctx.gen();
        let t2 = ctx.square(&t);
        let base: Vec<Fq> = vec![
            ctx.zero(),
            ctx.one(),
            ctx.from_u64(2),
            t.clone(),
            ctx.add(&t, &ctx.one()),
            ctx.add(&t, &ctx.from_u64(2)),
        ];
        let alt: Vec<Fq> = vec![
            ctx.zero(),
            ctx.one(),
            t.clone(),
            t2.clone(),
            ctx.add(&t2, &ctx.one()),
            ctx.add(&t2, &t),
        ];
        let alt2: Vec<Fq> = vec![
            ctx.one(),
            ctx.from_u64(2),
            t.clone(),
            ctx.neg(&t),
            ctx.add(&t2, &ctx.one()),
            ctx.sub(&t2, &ctx.one()),
        ];
        let mut done = false;
        for pts in [base, alt, alt2] {
            let c = HyperellipticCurve::new(2, pts, &ctx).unwrap();
            let Ok(th) = thomae_squares(&c, &ctx) else { continue };
            assert_eq!(th.even_chars.len(), 10);
            let cand = reverse_duplication(&th, &ctx, 0).unwrap();
            roundtrip_check(&cand, &th, &ctx);
            done = true;
            break;
        }
        assert!(done, "no branch set with uniform quadratic character");
    }

    #[test]
    fn riemann_negation_invariance() {
        // Substituting a_u <- a_{-u} is the identity on canonical storage;
        // check the generator only ever emits canonical indices.
        let set = gen_riemann_relations(1, 5, 1).unwrap();
        let grp = &set.group;
        for rel in &set.riemann {
            for (m, _) in &rel.terms {
                for u in m {
                    assert_eq!(*u, grp.canonical(u));
                }
            }
        }
    }
}
