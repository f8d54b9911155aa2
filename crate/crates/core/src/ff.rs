//! Finite field arithmetic for F_q = F_p[t]/(P) with p a small odd prime,
//! together with square roots, univariate polynomial root finding and the
//! Cartier-Manin ordinarity test.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Ambient context for F_q = F_p[t]/(modulus), q = p^n.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldCtx {
    p: u64,
    n: usize,
    /// Monic modulus, ascending coefficients, length n + 1.
    modulus: Vec<u64>,
    /// Deterministic seed for the non-residue search and root splitting.
    seed: u64,
    /// Cached quadratic non-residue (None for trivial fields has no meaning;
    /// always present since q is odd).
    nonresidue: Vec<u64>,
    q: BigUint,
}

/// Element of F_q: n residues mod p, ascending powers of the generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fq(pub Vec<u64>);

impl FieldCtx {
    /// Builds the context, verifying primality of p and irreducibility of the
    /// modulus over F_p.
    pub fn new(p: u64, modulus: &[u64], seed: u64) -> Result<FieldCtx> {
        if p < 3 || p % 2 == 0 || !is_prime_u64(p) {
            return Err(Error::InvalidInput(format!("p = {p} is not an odd prime >= 3")));
        }
        if modulus.len() < 2 {
            return Err(Error::InvalidInput("modulus must have degree >= 1".into()));
        }
        let n = modulus.len() - 1;
        let modulus: Vec<u64> = modulus.iter().map(|&c| c % p).collect();
        if modulus[n] != 1 {
            return Err(Error::InvalidInput("modulus must be monic".into()));
        }
        if n > 1 && !is_irreducible(p, &modulus) {
            return Err(Error::InvalidInput("modulus is reducible over F_p".into()));
        }
        let q = BigUint::from(p).pow(n as u32);
        let mut ctx = FieldCtx { p, n, modulus, seed, nonresidue: vec![], q };
        ctx.nonresidue = ctx.find_nonresidue();
        Ok(ctx)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// q = p^n.
    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn zero(&self) -> Fq {
        Fq(vec![0; self.n])
    }

    pub fn one(&self) -> Fq {
        self.from_u64(1)
    }

    pub fn from_u64(&self, c: u64) -> Fq {
        let mut v = vec![0; self.n];
        v[0] = c % self.p;
        Fq(v)
    }

    pub fn from_i64(&self, c: i64) -> Fq {
        let r = c.rem_euclid(self.p as i64) as u64;
        self.from_u64(r)
    }

    /// Element from ascending coefficients, reduced mod p (shorter or longer
    /// inputs are truncated by polynomial reduction).
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Fq {
        let mut v: Vec<u64> = coeffs.iter().map(|&c| c % self.p).collect();
        if v.len() > self.n {
            v = self.reduce_poly(&v);
        }
        v.resize(self.n, 0);
        Fq(v)
    }

    /// The image of the polynomial generator t.
    pub fn gen(&self) -> Fq {
        if self.n == 1 {
            // F_p: t is reduced by the linear modulus t + c.
            let c = self.modulus[0];
            self.from_u64(self.p - c % self.p)
        } else {
            let mut v = vec![0; self.n];
            v[1] = 1;
            Fq(v)
        }
    }

    pub fn is_zero(&self, a: &Fq) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &Fq, b: &Fq) -> Fq {
        debug_assert_eq!(a.0.len(), self.n);
        debug_assert_eq!(b.0.len(), self.n);
        Fq(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + y) % self.p).collect())
    }

    pub fn sub(&self, a: &Fq, b: &Fq) -> Fq {
        Fq(a.0.iter().zip(&b.0).map(|(&x, &y)| (x + self.p - y) % self.p).collect())
    }

    pub fn neg(&self, a: &Fq) -> Fq {
        Fq(a.0.iter().map(|&x| (self.p - x) % self.p).collect())
    }

    pub fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        debug_assert_eq!(a.0.len(), self.n);
        debug_assert_eq!(b.0.len(), self.n);
        if self.n == 1 {
            return Fq(vec![mulp(a.0[0], b.0[0], self.p)]);
        }
        let mut prod = vec![0u128; 2 * self.n - 1];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                prod[i + j] += (x as u128) * (y as u128);
            }
        }
        let prod: Vec<u64> = prod.iter().map(|&c| (c % self.p as u128) as u64).collect();
        let mut r = self.reduce_poly(&prod);
        r.resize(self.n, 0);
        Fq(r)
    }

    pub fn mul_scalar(&self, a: &Fq, c: u64) -> Fq {
        let c = c % self.p;
        Fq(a.0.iter().map(|&x| mulp(x, c, self.p)).collect())
    }

    pub fn square(&self, a: &Fq) -> Fq {
        self.mul(a, a)
    }

    /// Reduction of an arbitrary-degree coefficient vector by the modulus.
    fn reduce_poly(&self, v: &[u64]) -> Vec<u64> {
        let mut v = v.to_vec();
        let n = self.n;
        while v.len() > n {
            let d = v.len() - 1;
            let lead = v[d] % self.p;
            if lead != 0 {
                for i in 0..n {
                    let sub = mulp(lead, self.modulus[i], self.p);
                    let idx = d - n + i;
                    v[idx] = (v[idx] + self.p - sub) % self.p;
                }
            }
            v.pop();
        }
        v
    }

    pub fn inv(&self, a: &Fq) -> Result<Fq> {
        if self.is_zero(a) {
            return Err(Error::Arithmetic("division by zero in F_q".into()));
        }
        // Extended Euclid over F_p[x] against the modulus.
        let p = self.p;
        let mut r0 = self.modulus.clone();
        let mut r1 = trim(&a.0);
        let mut s0: Vec<u64> = vec![];
        let mut s1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            let (quo, rem) = poly_divrem_fp(&r0, &r1, p);
            let s2 = poly_sub_fp(&s0, &poly_mul_fp(&quo, &s1, p), p);
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        // r0 is the gcd, a nonzero constant since the modulus is irreducible.
        let c = r0[0];
        let cinv = invp(c, p);
        let mut out: Vec<u64> = s0.iter().map(|&x| mulp(x, cinv, p)).collect();
        out.resize(self.n, 0);
        Ok(Fq(out))
    }

    pub fn div(&self, a: &Fq, b: &Fq) -> Result<Fq> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Fq, e: &BigUint) -> Fq {
        if e.is_zero() {
            return self.one();
        }
        let bits = e.bits();
        let mut acc = self.one();
        for i in (0..bits).rev() {
            acc = self.square(&acc);
            if e.bit(i) {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    pub fn pow_u64(&self, a: &Fq, e: u64) -> Fq {
        self.pow(a, &BigUint::from(e))
    }

    /// Frobenius x -> x^p.
    pub fn frob(&self, a: &Fq) -> Fq {
        self.pow_u64(a, self.p)
    }

    /// Euler criterion: 1 if nonzero square, -1 if non-square, 0 if zero.
    pub fn chi(&self, a: &Fq) -> i32 {
        if self.is_zero(a) {
            return 0;
        }
        let e = (self.q() - BigUint::one()) >> 1;
        let r = self.pow(a, &e);
        if r == self.one() {
            1
        } else {
            -1
        }
    }

    fn find_nonresidue(&self) -> Vec<u64> {
        // Deterministic given the context seed.
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x6e72); // "nr"
        loop {
            let cand = self.random_element(&mut rng);
            if self.chi(&cand) == -1 {
                return cand.0;
            }
        }
    }

    /// The fixed quadratic non-residue chosen at context construction.
    pub fn nonresidue(&self) -> Fq {
        Fq(self.nonresidue.clone())
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Fq {
        Fq((0..self.n).map(|_| rng.gen_range(0..self.p)).collect())
    }

    /// Square root by Tonelli-Shanks; `None` when a is a non-residue.
    pub fn sqrt(&self, a: &Fq) -> Option<Fq> {
        if self.is_zero(a) {
            return Some(self.zero());
        }
        if self.chi(a) != 1 {
            return None;
        }
        // q - 1 = 2^s * t with t odd.
        let mut t = self.q() - BigUint::one();
        let mut s = 0u64;
        while (&t % 2u32).is_zero() {
            t >>= 1;
            s += 1;
        }
        let z = Fq(self.nonresidue.clone());
        let mut m = s;
        let mut c = self.pow(&z, &t);
        let mut r = self.pow(a, &((&t + BigUint::one()) >> 1));
        let mut u = self.pow(a, &t);
        while u != self.one() {
            // Find least i with u^(2^i) = 1.
            let mut i = 0u64;
            let mut probe = u.clone();
            while probe != self.one() {
                probe = self.square(&probe);
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = self.square(&b);
            }
            m = i;
            c = self.square(&b);
            u = self.mul(&u, &c);
            r = self.mul(&r, &b);
        }
        debug_assert_eq!(self.square(&r), *a);
        Some(r)
    }

    /// All elements of the field, for enumeration oracles. Only sensible for
    /// small q.
    pub fn all_elements(&self) -> Vec<Fq> {
        let mut out = Vec::new();
        let mut cur = vec![0u64; self.n];
        loop {
            out.push(Fq(cur.clone()));
            let mut i = 0;
            loop {
                if i == self.n {
                    return out;
                }
                cur[i] += 1;
                if cur[i] < self.p {
                    break;
                }
                cur[i] = 0;
                i += 1;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Prime field helpers
// ---------------------------------------------------------------------------

#[inline]
fn mulp(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn invp(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a nonzero.
    let mut acc = 1u64;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulp(acc, base, p);
        }
        base = mulp(base, base, p);
        e >>= 1;
    }
    acc
}

fn is_prime_u64(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn trim(v: &[u64]) -> Vec<u64> {
    let mut v = v.to_vec();
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_mul_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x as u128 * y as u128;
        }
    }
    trim(&out.iter().map(|&c| (c % p as u128) as u64).collect::<Vec<_>>())
}

fn poly_sub_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let len = a.len().max(b.len());
    let mut out = vec![0u64; len];
    for i in 0..len {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        out[i] = (x + p - y) % p;
    }
    trim(&out)
}

fn poly_divrem_fp(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b);
    assert!(!b.is_empty(), "division by zero polynomial");
    let mut rem = trim(a);
    let db = b.len() - 1;
    let lead_inv = invp(b[db], p);
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let mut quo = vec![0u64; rem.len() - db];
    while rem.len() >= b.len() {
        let dr = rem.len() - 1;
        let c = mulp(rem[dr], lead_inv, p);
        quo[dr - db] = c;
        for i in 0..=db {
            let sub = mulp(c, b[i], p);
            rem[dr - db + i] = (rem[dr - db + i] + p - sub) % p;
        }
        rem = trim(&rem);
        if rem.is_empty() {
            break;
        }
    }
    (trim(&quo), rem)
}

/// x^(p^k) mod f over F_p, by iterated p-th powering.
fn xq_mod_fp(p: u64, k: usize, f: &[u64]) -> Vec<u64> {
    // Compute x^p mod f by square and multiply, then iterate substitution.
    let powmod = |base: &[u64], e: u64| -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = base.to_vec();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = poly_divrem_fp(&poly_mul_fp(&acc, &b, p), f, p).1;
            }
            b = poly_divrem_fp(&poly_mul_fp(&b, &b, p), f, p).1;
            e >>= 1;
        }
        acc
    };
    let xp = powmod(&[0, 1], p);
    let mut cur = xp.clone();
    for _ in 1..k {
        // Substitute: cur <- cur(x^p) mod f = compose cur with xp.
        let mut acc: Vec<u64> = vec![];
        for &c in cur.iter().rev() {
            acc = poly_divrem_fp(&poly_mul_fp(&acc, &xp, p), f, p).1;
            if c != 0 {
                if acc.is_empty() {
                    acc = vec![c];
                } else {
                    acc[0] = (acc[0] + c) % p;
                }
            }
        }
        cur = acc;
    }
    cur
}

fn poly_gcd_fp(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r0 = trim(a);
    let mut r1 = trim(b);
    while !r1.is_empty() {
        let rem = poly_divrem_fp(&r0, &r1, p).1;
        r0 = r1;
        r1 = rem;
    }
    r0
}

/// Irreducibility over F_p by the distinct-degree criterion.
fn is_irreducible(p: u64, f: &[u64]) -> bool {
    let n = f.len() - 1;
    // x^(p^n) = x mod f
    let xq = xq_mod_fp(p, n, f);
    let x_minus = poly_sub_fp(&xq, &[0, 1], p);
    if !x_minus.is_empty() {
        return false;
    }
    // gcd(x^(p^(n/l)) - x, f) = 1 for every prime l | n
    let mut m = n;
    let mut primes = vec![];
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            primes.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        primes.push(m);
    }
    for l in primes {
        let xq = xq_mod_fp(p, n / l, f);
        let diff = poly_sub_fp(&xq, &[0, 1], p);
        let g = poly_gcd_fp(&diff, f, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Univariate polynomials over F_q
// ---------------------------------------------------------------------------

/// Dense univariate polynomial over F_q, ascending coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqPoly(pub Vec<Fq>);

impl FqPoly {
    pub fn zero() -> FqPoly {
        FqPoly(vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn deg(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn constant(c: Fq) -> FqPoly {
        FqPoly(vec![c])
    }

    pub fn x(ctx: &FieldCtx) -> FqPoly {
        FqPoly(vec![ctx.zero(), ctx.one()])
    }

    fn trim(mut self, ctx: &FieldCtx) -> FqPoly {
        while self.0.last().map(|c| ctx.is_zero(c)) == Some(true) {
            self.0.pop();
        }
        self
    }

    pub fn add(&self, o: &FqPoly, ctx: &FieldCtx) -> FqPoly {
        let len = self.0.len().max(o.0.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.0.get(i).cloned().unwrap_or_else(|| ctx.zero());
            let b = o.0.get(i).cloned().unwrap_or_else(|| ctx.zero());
            out.push(ctx.add(&a, &b));
        }
        FqPoly(out).trim(ctx)
    }

    pub fn sub(&self, o: &FqPoly, ctx: &FieldCtx) -> FqPoly {
        let len = self.0.len().max(o.0.len());
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = self.0.get(i).cloned().unwrap_or_else(|| ctx.zero());
            let b = o.0.get(i).cloned().unwrap_or_else(|| ctx.zero());
            out.push(ctx.sub(&a, &b));
        }
        FqPoly(out).trim(ctx)
    }

    pub fn neg(&self, ctx: &FieldCtx) -> FqPoly {
        FqPoly(self.0.iter().map(|c| ctx.neg(c)).collect())
    }

    pub fn mul(&self, o: &FqPoly, ctx: &FieldCtx) -> FqPoly {
        if self.is_zero() || o.is_zero() {
            return FqPoly::zero();
        }
        let mut out = vec![ctx.zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if ctx.is_zero(a) {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] = ctx.add(&out[i + j], &ctx.mul(a, b));
            }
        }
        FqPoly(out).trim(ctx)
    }

    pub fn mul_scalar(&self, c: &Fq, ctx: &FieldCtx) -> FqPoly {
        FqPoly(self.0.iter().map(|a| ctx.mul(a, c)).collect()).trim(ctx)
    }

    pub fn divrem(&self, o: &FqPoly, ctx: &FieldCtx) -> Result<(FqPoly, FqPoly)> {
        if o.is_zero() {
            return Err(Error::Arithmetic("polynomial division by zero".into()));
        }
        let db = o.0.len() - 1;
        let lead_inv = ctx.inv(&o.0[db])?;
        let mut rem = self.clone().trim(ctx);
        if rem.0.len() < o.0.len() {
            return Ok((FqPoly::zero(), rem));
        }
        let mut quo = vec![ctx.zero(); rem.0.len() - db];
        while rem.0.len() >= o.0.len() {
            let dr = rem.0.len() - 1;
            let c = ctx.mul(&rem.0[dr], &lead_inv);
            quo[dr - db] = c.clone();
            for i in 0..=db {
                let sub = ctx.mul(&c, &o.0[i]);
                rem.0[dr - db + i] = ctx.sub(&rem.0[dr - db + i], &sub);
            }
            rem = rem.trim(ctx);
            if rem.is_zero() {
                break;
            }
        }
        Ok((FqPoly(quo).trim(ctx), rem))
    }

    pub fn gcd(&self, o: &FqPoly, ctx: &FieldCtx) -> FqPoly {
        let mut r0 = self.clone().trim(ctx);
        let mut r1 = o.clone().trim(ctx);
        while !r1.is_zero() {
            let rem = r0.divrem(&r1, ctx).expect("nonzero divisor").1;
            r0 = r1;
            r1 = rem;
        }
        // Normalize monic for determinism.
        if let Some(lead) = r0.0.last().cloned() {
            let inv = ctx.inv(&lead).expect("nonzero lead");
            r0 = r0.mul_scalar(&inv, ctx);
        }
        r0
    }

    pub fn eval(&self, x: &Fq, ctx: &FieldCtx) -> Fq {
        let mut acc = ctx.zero();
        for c in self.0.iter().rev() {
            acc = ctx.add(&ctx.mul(&acc, x), c);
        }
        acc
    }

    pub fn powmod(&self, e: &BigUint, m: &FqPoly, ctx: &FieldCtx) -> FqPoly {
        let mut acc = FqPoly::constant(ctx.one());
        if e.is_zero() {
            return acc;
        }
        let base = self.divrem(m, ctx).expect("nonzero modulus").1;
        let bits = e.bits();
        for i in (0..bits).rev() {
            acc = acc.mul(&acc, ctx).divrem(m, ctx).expect("nonzero modulus").1;
            if e.bit(i) {
                acc = acc.mul(&base, ctx).divrem(m, ctx).expect("nonzero modulus").1;
            }
        }
        acc
    }

    /// Monic product prod (x - r_i).
    pub fn from_roots(roots: &[Fq], ctx: &FieldCtx) -> FqPoly {
        let mut acc = FqPoly::constant(ctx.one());
        for r in roots {
            let lin = FqPoly(vec![ctx.neg(r), ctx.one()]);
            acc = acc.mul(&lin, ctx);
        }
        acc
    }
}

/// All roots of f in F_q with exact multiplicities.
///
/// Roots of the square-free core are found via gcd with x^q - x and
/// equal-degree splitting; multiplicities by repeated division, which stays
/// correct when p divides the multiplicity.
pub fn fq_poly_roots(f: &FqPoly, ctx: &FieldCtx) -> Result<Vec<(Fq, usize)>> {
    if f.is_zero() {
        return Err(Error::InvalidInput("zero polynomial has no root set".into()));
    }
    if f.deg() == 0 {
        return Ok(vec![]);
    }
    // x^q mod f
    let x = FqPoly::x(ctx);
    let xq = x.powmod(ctx.q(), f, ctx);
    let lin = xq.sub(&x, ctx);
    let g = f.gcd(&lin, ctx);
    let mut roots = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed ^ 0x726f6f74); // "root"
    split_roots(&g, ctx, &mut rng, &mut roots);
    // Deterministic output order.
    roots.sort();
    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        let lin = FqPoly(vec![ctx.neg(&r), ctx.one()]);
        let mut mult = 0;
        let mut cur = f.clone();
        loop {
            let (q, rem) = cur.divrem(&lin, ctx)?;
            if !rem.is_zero() {
                break;
            }
            mult += 1;
            cur = q;
        }
        debug_assert!(mult >= 1);
        out.push((r, mult));
    }
    Ok(out)
}

fn split_roots(g: &FqPoly, ctx: &FieldCtx, rng: &mut ChaCha8Rng, out: &mut Vec<Fq>) {
    if g.deg() <= 0 {
        return;
    }
    if g.deg() == 1 {
        // Monic by gcd normalization, but normalize defensively.
        let lead_inv = ctx.inv(&g.0[1]).expect("nonzero lead");
        out.push(ctx.neg(&ctx.mul(&g.0[0], &lead_inv)));
        return;
    }
    // Remove a root at zero if present.
    if ctx.is_zero(&g.0[0]) {
        out.push(ctx.zero());
        let x = FqPoly::x(ctx);
        let g2 = g.divrem(&x, ctx).expect("x nonzero").0;
        split_roots(&g2, ctx, rng, out);
        return;
    }
    let e = (ctx.q() - BigUint::one()) >> 1;
    loop {
        let delta = ctx.random_element(rng);
        let shifted = FqPoly(vec![delta, ctx.one()]);
        let h = shifted.powmod(&e, g, ctx);
        let h1 = h.sub(&FqPoly::constant(ctx.one()), ctx);
        let d = g.gcd(&h1, ctx);
        if d.deg() > 0 && d.deg() < g.deg() {
            let rest = g.divrem(&d, ctx).expect("nonzero").0;
            split_roots(&d, ctx, rng, out);
            split_roots(&rest, ctx, rng, out);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Hyperelliptic curves by branch points
// ---------------------------------------------------------------------------

/// Hyperelliptic curve y^2 = prod (x - alpha_i) with 2g+2 distinct rational
/// branch points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperellipticCurve {
    pub genus: usize,
    pub branch_points: Vec<Fq>,
}

impl HyperellipticCurve {
    pub fn new(genus: usize, branch_points: Vec<Fq>, ctx: &FieldCtx) -> Result<HyperellipticCurve> {
        if !(genus == 1 || genus == 2) {
            return Err(Error::InvalidInput(format!("unsupported genus {genus}")));
        }
        if branch_points.len() != 2 * genus + 2 {
            return Err(Error::InvalidInput(format!(
                "expected {} branch points, got {}",
                2 * genus + 2,
                branch_points.len()
            )));
        }
        for i in 0..branch_points.len() {
            for j in (i + 1)..branch_points.len() {
                if branch_points[i] == branch_points[j] {
                    return Err(Error::InvalidInput("repeated branch points".into()));
                }
            }
        }
        let _ = ctx;
        Ok(HyperellipticCurve { genus, branch_points })
    }

    /// The sextic/quartic f(x) = prod (x - alpha_i).
    pub fn f(&self, ctx: &FieldCtx) -> FqPoly {
        FqPoly::from_roots(&self.branch_points, ctx)
    }

    /// Builds a curve from a monic f(x) that splits into distinct rational
    /// roots. A monic polynomial of odd degree 2g+1 is first moved to an
    /// isomorphic model with all 2g+2 branch points finite by the Moebius
    /// substitution x -> mu + 1/x (mu not a root), which sends the branch
    /// point at infinity to 0.
    pub fn from_poly(f: &FqPoly, ctx: &FieldCtx) -> Result<HyperellipticCurve> {
        let d = f.deg();
        if d < 3 {
            return Err(Error::InvalidInput("curve polynomial must have degree >= 3".into()));
        }
        if *f.0.last().unwrap() != ctx.one() {
            return Err(Error::InvalidInput("curve polynomial must be monic".into()));
        }
        let roots = fq_poly_roots(f, ctx)?;
        let total: usize = roots.iter().map(|(_, m)| m).sum();
        if total != d as usize || roots.iter().any(|(_, m)| *m > 1) {
            return Err(Error::InvalidInput(
                "curve polynomial must split into distinct rational roots".into(),
            ));
        }
        let pts: Vec<Fq> = roots.into_iter().map(|(r, _)| r).collect();
        if d % 2 == 1 {
            let genus = ((d - 1) / 2) as usize;
            // Moebius x = mu + 1/x', deterministic smallest non-root mu.
            let mu = smallest_nonroot(&pts, ctx)?;
            let mut new_pts = Vec::with_capacity(pts.len() + 1);
            for a in &pts {
                let diff = ctx.sub(a, &mu);
                new_pts.push(ctx.inv(&diff)?);
            }
            new_pts.push(ctx.zero());
            HyperellipticCurve::new(genus, new_pts, ctx)
        } else {
            let genus = (d as usize - 2) / 2;
            HyperellipticCurve::new(genus, pts, ctx)
        }
    }
}

fn smallest_nonroot(roots: &[Fq], ctx: &FieldCtx) -> Result<Fq> {
    // Iterate field elements in lexicographic coefficient order.
    let mut cur = vec![0u64; ctx.n()];
    loop {
        let cand = Fq(cur.clone());
        if !roots.contains(&cand) {
            return Ok(cand);
        }
        let mut i = 0;
        loop {
            if i == ctx.n() {
                return Err(Error::InvalidInput("no non-root element in field".into()));
            }
            cur[i] += 1;
            if cur[i] < ctx.p() {
                break;
            }
            cur[i] = 0;
            i += 1;
        }
    }
}

/// Cartier-Manin ordinarity test.
///
/// The g x g matrix A with A_{ij} = coefficient of x^{ip - j} in f^((p-1)/2)
/// gives the Hasse-Witt matrix; the Jacobian is ordinary iff the twisted
/// product A * A^(p) * ... * A^(p^(n-1)) is invertible over F_q.
pub fn is_ordinary(curve: &HyperellipticCurve, ctx: &FieldCtx) -> bool {
    let g = curve.genus;
    let f = curve.f(ctx);
    let e = (ctx.p() - 1) / 2;
    let mut h = FqPoly::constant(ctx.one());
    for _ in 0..e {
        h = h.mul(&f, ctx);
    }
    let coeff = |k: i64| -> Fq {
        if k < 0 || k as usize >= h.0.len() {
            ctx.zero()
        } else {
            h.0[k as usize].clone()
        }
    };
    let mut a = vec![vec![ctx.zero(); g]; g];
    for i in 1..=g {
        for j in 1..=g {
            a[i - 1][j - 1] = coeff(i as i64 * ctx.p() as i64 - j as i64);
        }
    }
    // prod_k A^(p^k)
    let mut prod = a.clone();
    let mut twisted = a.clone();
    for _ in 1..ctx.n() {
        for row in twisted.iter_mut() {
            for x in row.iter_mut() {
                *x = ctx.frob(x);
            }
        }
        prod = mat_mul(&prod, &twisted, ctx);
    }
    !ctx.is_zero(&mat_det(&prod, ctx))
}

fn mat_mul(a: &[Vec<Fq>], b: &[Vec<Fq>], ctx: &FieldCtx) -> Vec<Vec<Fq>> {
    let n = a.len();
    let mut out = vec![vec![ctx.zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i][j] = ctx.add(&out[i][j], &ctx.mul(&a[i][k], &b[k][j]));
            }
        }
    }
    out
}

fn mat_det(a: &[Vec<Fq>], ctx: &FieldCtx) -> Fq {
    match a.len() {
        0 => ctx.one(),
        1 => a[0][0].clone(),
        2 => ctx.sub(&ctx.mul(&a[0][0], &a[1][1]), &ctx.mul(&a[0][1], &a[1][0])),
        _ => {
            // Laplace expansion; dimensions here are at most g = 2 in practice.
            let mut det = ctx.zero();
            for j in 0..a.len() {
                let minor: Vec<Vec<Fq>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = ctx.mul(&a[0][j], &mat_det(&minor, ctx));
                if j % 2 == 0 {
                    det = ctx.add(&det, &term);
                } else {
                    det = ctx.sub(&det, &term);
                }
            }
            det
        }
    }
}
