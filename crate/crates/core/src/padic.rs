//! The unramified extension Z_q of Z_p at working precision m, with the
//! Frobenius substitution sigma, its powers, and norms down to Z_p.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::ff::{FieldCtx, Fq};
use crate::{Error, Result};

/// Context for Z_q = Z_p[t]/(M) mod p^m, where M lifts the field modulus
/// with coefficients taken verbatim in [0, p).
#[derive(Debug, Clone)]
pub struct PadicCtx {
    field: FieldCtx,
    m: usize,
    pm: BigUint,
    /// Monic, ascending, length n + 1, coefficients mod p^m.
    lifted_modulus: Vec<BigUint>,
    /// frob_images[k] = sigma^k(t) as a length-n coefficient vector, k in 0..n.
    frob_images: Vec<Vec<BigUint>>,
}

/// Element of Z_q: n coefficients mod p^precision, ascending powers of t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicElement {
    pub coeffs: Vec<BigUint>,
    pub precision: usize,
}

impl PadicCtx {
    pub fn new(field: &FieldCtx, m: usize) -> Result<PadicCtx> {
        if m < 1 {
            return Err(Error::InvalidInput("precision must be >= 1".into()));
        }
        let p = BigUint::from(field.p());
        let pm = p.pow(m as u32);
        let lifted_modulus: Vec<BigUint> =
            field.modulus().iter().map(|&c| BigUint::from(c)).collect();
        let mut ctx = PadicCtx {
            field: field.clone(),
            m,
            pm,
            lifted_modulus,
            frob_images: vec![],
        };
        ctx.frob_images = ctx.compute_frob_images()?;
        Ok(ctx)
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.field.p()
    }

    pub fn n(&self) -> usize {
        self.field.n()
    }

    pub fn precision(&self) -> usize {
        self.m
    }

    pub fn pm(&self) -> &BigUint {
        &self.pm
    }

    pub fn p_pow(&self, k: usize) -> BigUint {
        BigUint::from(self.p()).pow(k as u32)
    }

    pub fn zero(&self) -> PadicElement {
        PadicElement { coeffs: vec![BigUint::zero(); self.n()], precision: self.m }
    }

    pub fn one(&self) -> PadicElement {
        self.from_biguint(&BigUint::one())
    }

    pub fn from_biguint(&self, c: &BigUint) -> PadicElement {
        let mut coeffs = vec![BigUint::zero(); self.n()];
        coeffs[0] = c % &self.pm;
        PadicElement { coeffs, precision: self.m }
    }

    pub fn from_u64(&self, c: u64) -> PadicElement {
        self.from_biguint(&BigUint::from(c))
    }

    /// Representative lift of a field element: coefficients in [0, p),
    /// regarded at the stated precision (not canonical beyond precision 1).
    pub fn lift_from_field(&self, a: &Fq, precision: usize) -> PadicElement {
        let coeffs = a.0.iter().map(|&c| BigUint::from(c)).collect();
        PadicElement { coeffs, precision: precision.min(self.m) }
    }

    pub fn reduce_mod_p(&self, z: &PadicElement) -> Fq {
        let p = BigUint::from(self.p());
        Fq(z.coeffs
            .iter()
            .map(|c| {
                let r = c % &p;
                r.to_u64_digits().first().copied().unwrap_or(0)
            })
            .collect())
    }

    pub fn is_zero(&self, z: &PadicElement) -> bool {
        z.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_unit(&self, z: &PadicElement) -> bool {
        !self.field.is_zero(&self.reduce_mod_p(z))
    }

    fn modulus_at(&self, prec: usize) -> BigUint {
        self.p_pow(prec)
    }

    /// Truncates to a (lower) precision.
    pub fn truncate(&self, z: &PadicElement, precision: usize) -> PadicElement {
        let prec = precision.min(z.precision);
        let pk = self.modulus_at(prec);
        PadicElement {
            coeffs: z.coeffs.iter().map(|c| c % &pk).collect(),
            precision: prec,
        }
    }

    pub fn add(&self, a: &PadicElement, b: &PadicElement) -> PadicElement {
        let prec = a.precision.min(b.precision);
        let pk = self.modulus_at(prec);
        PadicElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| (x + y) % &pk)
                .collect(),
            precision: prec,
        }
    }

    pub fn sub(&self, a: &PadicElement, b: &PadicElement) -> PadicElement {
        let prec = a.precision.min(b.precision);
        let pk = self.modulus_at(prec);
        PadicElement {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .map(|(x, y)| ((x % &pk) + &pk - (y % &pk)) % &pk)
                .collect(),
            precision: prec,
        }
    }

    pub fn neg(&self, a: &PadicElement) -> PadicElement {
        let pk = self.modulus_at(a.precision);
        PadicElement {
            coeffs: a.coeffs.iter().map(|x| (&pk - (x % &pk)) % &pk).collect(),
            precision: a.precision,
        }
    }

    pub fn mul(&self, a: &PadicElement, b: &PadicElement) -> PadicElement {
        let prec = a.precision.min(b.precision);
        let pk = self.modulus_at(prec);
        let prod = poly_mul_mod(&a.coeffs, &b.coeffs, &pk);
        let red = self.reduce_by_modulus(&prod, &pk);
        PadicElement { coeffs: red, precision: prec }
    }

    pub fn mul_scalar(&self, a: &PadicElement, c: &BigUint) -> PadicElement {
        let pk = self.modulus_at(a.precision);
        PadicElement {
            coeffs: a.coeffs.iter().map(|x| (x * c) % &pk).collect(),
            precision: a.precision,
        }
    }

    /// Multiplication by p^k; output precision is the input's (high digits of
    /// the product beyond p^prec are dropped, consistent with the contract
    /// that precision never silently grows).
    pub fn mul_p_pow(&self, a: &PadicElement, k: usize) -> PadicElement {
        self.mul_scalar(a, &self.p_pow(k))
    }

    /// Exact division by p^k; errors when some coefficient is not divisible.
    /// Output precision drops by k.
    pub fn div_p_pow(&self, a: &PadicElement, k: usize) -> Result<PadicElement> {
        if k > a.precision {
            return Err(Error::Arithmetic("p-power division below zero precision".into()));
        }
        let pk = self.p_pow(k);
        let mut coeffs = Vec::with_capacity(a.coeffs.len());
        for c in &a.coeffs {
            if (c % &pk) != BigUint::zero() {
                return Err(Error::Arithmetic("inexact division by p-power".into()));
            }
            coeffs.push(c / &pk);
        }
        Ok(PadicElement { coeffs, precision: a.precision - k })
    }

    /// Minimum p-adic valuation over coefficients (None for zero at this
    /// precision).
    pub fn valuation(&self, a: &PadicElement) -> Option<usize> {
        let p = BigUint::from(self.p());
        let mut best: Option<usize> = None;
        for c in &a.coeffs {
            if c.is_zero() {
                continue;
            }
            let mut v = 0;
            let mut c = c.clone();
            while (&c % &p).is_zero() {
                c /= &p;
                v += 1;
            }
            best = Some(best.map_or(v, |b| b.min(v)));
        }
        best
    }

    pub fn inv(&self, a: &PadicElement) -> Result<PadicElement> {
        let a0 = self.reduce_mod_p(a);
        if self.field.is_zero(&a0) {
            return Err(Error::Arithmetic("inversion of a non-unit in Z_q".into()));
        }
        // Mod-p inverse, then Newton: x <- x (2 - a x), doubling precision.
        let inv0 = self.field.inv(&a0)?;
        let mut x = self.lift_from_field(&inv0, 1);
        let mut prec = 1;
        let two = self.from_u64(2);
        while prec < a.precision {
            prec = (2 * prec).min(a.precision);
            x = PadicElement { coeffs: x.coeffs.clone(), precision: prec };
            let ax = self.mul(&self.truncate(a, prec), &x);
            x = self.mul(&x, &self.sub(&self.truncate(&two, prec), &ax));
        }
        Ok(x)
    }

    pub fn div(&self, a: &PadicElement, b: &PadicElement) -> Result<PadicElement> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow_u64(&self, a: &PadicElement, e: u64) -> PadicElement {
        let mut acc = PadicElement {
            coeffs: self.one().coeffs,
            precision: a.precision,
        };
        if e == 0 {
            return acc;
        }
        let bits = 64 - e.leading_zeros();
        for i in (0..bits).rev() {
            acc = self.mul(&acc, &acc);
            if (e >> i) & 1 == 1 {
                acc = self.mul(&acc, a);
            }
        }
        acc
    }

    /// sigma^k(z), k taken mod n. Coefficients of z lie in Z_p, so sigma^k
    /// substitutes the cached image sigma^k(t).
    pub fn frobenius(&self, z: &PadicElement, k: i64) -> PadicElement {
        let n = self.n() as i64;
        let k = k.rem_euclid(n) as usize;
        if k == 0 {
            return z.clone();
        }
        let img = PadicElement {
            coeffs: self.frob_images[k].clone(),
            precision: self.m,
        };
        self.eval_at(&z.coeffs, &img, z.precision)
    }

    /// Evaluates the polynomial with the given Z_p coefficients at x, in Z_q.
    fn eval_at(&self, coeffs: &[BigUint], x: &PadicElement, prec: usize) -> PadicElement {
        let mut acc = self.truncate(&self.zero(), prec);
        let x = self.truncate(x, prec);
        for c in coeffs.iter().rev() {
            acc = self.mul(&acc, &x);
            acc = self.add(&acc, &self.truncate(&self.from_biguint(c), prec));
        }
        acc
    }

    /// N_{Q_q/Q_p}(z) = prod sigma^i(z), by binary splitting
    /// N_{a+b} = N_a * sigma^a(N_b). Returns the residue mod p^precision.
    pub fn norm(&self, z: &PadicElement) -> Result<BigUint> {
        if !self.is_unit(z) {
            return Err(Error::Arithmetic("norm of a non-unit".into()));
        }
        let full = self.norm_range(z, self.n());
        for c in &full.coeffs[1..] {
            if !c.is_zero() {
                return Err(Error::Arithmetic("norm did not land in Z_p".into()));
            }
        }
        Ok(full.coeffs[0].clone())
    }

    fn norm_range(&self, z: &PadicElement, len: usize) -> PadicElement {
        if len == 1 {
            return z.clone();
        }
        let a = len / 2;
        let b = len - a;
        let na = self.norm_range(z, a);
        let nb = self.norm_range(z, b);
        self.mul(&na, &self.frobenius(&nb, a as i64))
    }

    /// sigma(t) and its compositional powers, by Newton iteration on the
    /// lifted modulus starting from t^p mod p.
    fn compute_frob_images(&self) -> Result<Vec<Vec<BigUint>>> {
        let n = self.n();
        let mut images = vec![vec![BigUint::zero(); n]; n];
        // sigma^0(t) = t.
        if n >= 2 {
            images[0][1] = BigUint::one();
        } else {
            // n = 1: t reduces to a constant; images never used since k mod 1 = 0.
            return Ok(images);
        }
        // Initial value: t^p in the residue field, lifted.
        let t = self.field.gen();
        let tp = self.field.frob(&t);
        let mut x = self.lift_from_field(&tp, 1);
        // Derivative of the lifted modulus.
        let deriv: Vec<BigUint> = self
            .lifted_modulus
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigUint::from(i as u64))
            .collect();
        let mut prec = 1;
        while prec < self.m {
            prec = (2 * prec).min(self.m);
            x = PadicElement { coeffs: x.coeffs.clone(), precision: prec };
            let fx = self.eval_at(&self.lifted_modulus, &x, prec);
            let dfx = self.eval_at(&deriv, &x, prec);
            let step = self.div(&fx, &dfx)?;
            x = self.sub(&x, &step);
        }
        // Sanity: M(sigma(t)) = 0 mod p^m.
        let check = self.eval_at(&self.lifted_modulus, &x, self.m);
        if !self.is_zero(&check) {
            return Err(Error::Arithmetic("Newton iteration for sigma(t) failed".into()));
        }
        images[1] = x.coeffs.clone();
        for k in 2..n {
            // sigma^k(t) = (sigma^{k-1}(t) as a polynomial) evaluated at sigma(t).
            let prev = images[k - 1].clone();
            let img1 = PadicElement { coeffs: images[1].clone(), precision: self.m };
            images[k] = self.eval_at(&prev, &img1, self.m).coeffs;
        }
        Ok(images)
    }

    /// Test oracle: the norm as Res_t(lifted_modulus, z(t)) mod p^precision.
    pub fn norm_resultant(&self, z: &PadicElement) -> BigUint {
        let pk = self.modulus_at(z.precision);
        resultant_mod(&self.lifted_modulus, &z.coeffs, &pk, self.p())
    }

    fn reduce_by_modulus(&self, v: &[BigUint], pk: &BigUint) -> Vec<BigUint> {
        let n = self.n();
        let mut v = v.to_vec();
        while v.len() > n {
            let d = v.len() - 1;
            let lead = v[d].clone() % pk;
            if !lead.is_zero() {
                for i in 0..n {
                    let sub = (&lead * &self.lifted_modulus[i]) % pk;
                    let idx = d - n + i;
                    v[idx] = ((&v[idx] % pk) + pk - sub) % pk;
                }
            }
            v.pop();
        }
        v.iter().map(|c| c % pk).collect()
    }
}

fn poly_mul_mod(a: &[BigUint], b: &[BigUint], pk: &BigUint) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (&out[i + j] + x * y) % pk;
        }
    }
    out
}

/// Resultant of two polynomials with coefficients mod p^k, computed over the
/// integers via signed representatives of a Sylvester-style elimination.
///
/// Used only as a test oracle: f is monic, so the resultant mod p^k is
/// well-defined from the residues.
fn resultant_mod(f: &[BigUint], g: &[BigUint], pk: &BigUint, _p: u64) -> BigUint {
    use num_bigint::BigInt;
    let to_int = |v: &[BigUint]| -> Vec<BigInt> { v.iter().map(|c| BigInt::from(c.clone())).collect() };
    let fi = to_int(f);
    let gi = to_int(g);
    let n = fi.len() - 1;
    let mut gtrim = gi.clone();
    while gtrim.last().map(|c| c == &BigInt::from(0)) == Some(true) {
        gtrim.pop();
    }
    if gtrim.is_empty() {
        return BigUint::zero();
    }
    let m = gtrim.len() - 1;
    // Sylvester matrix determinant (small n; exact integer arithmetic).
    let size = n + m;
    if size == 0 {
        return BigUint::one();
    }
    let mut mat = vec![vec![BigInt::from(0); size]; size];
    for r in 0..m {
        for (j, c) in fi.iter().enumerate() {
            mat[r][r + (n - j)] = c.clone();
        }
    }
    for r in 0..n {
        for (j, c) in gtrim.iter().enumerate() {
            mat[m + r][r + (m - j)] = c.clone();
        }
    }
    let det = int_det(mat);
    let pk_int = BigInt::from(pk.clone());
    let r = ((det % &pk_int) + &pk_int) % &pk_int;
    r.to_biguint().unwrap()
}

fn int_det(mut m: Vec<Vec<num_bigint::BigInt>>) -> num_bigint::BigInt {
    use num_bigint::BigInt;
    // Fraction-free Gaussian elimination (Bareiss).
    let n = m.len();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k] == BigInt::from(0) {
            let swap = (k + 1..n).find(|&i| m[i][k] != BigInt::from(0));
            match swap {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::from(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = val;
            }
            m[i][k] = BigInt::from(0);
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_unit(ctx: &PadicCtx, rng: &mut ChaCha8Rng) -> PadicElement {
        use rand::Rng;
        loop {
            let coeffs: Vec<BigUint> = (0..ctx.n())
                .map(|_| {
                    let digits: Vec<u64> = (0..2).map(|_| rng.gen()).collect();
                    BigUint::new(digits.iter().flat_map(|d| [*d as u32, (*d >> 32) as u32]).collect())
                        % ctx.pm()
                })
                .collect();
            let z = PadicElement { coeffs, precision: ctx.precision() };
            if ctx.is_unit(&z) {
                return z;
            }
        }
    }

    #[test]
    fn frobenius_image_f9() {
        // p=3, t^2 + 1, m=4: sigma(t) = -t exactly (since (-t)^2 + 1 = t^2 + 1).
        let field = FieldCtx::new(3, &[1, 0, 1], 0).unwrap();
        let ctx = PadicCtx::new(&field, 4).unwrap();
        let t = ctx.lift_from_field(&field.gen(), 4);
        let st = ctx.frobenius(&t, 1);
        assert_eq!(st, ctx.neg(&t));
        assert_eq!(ctx.frobenius(&st, 1), t);
    }

    #[test]
    fn inv_small() {
        // p=3, m=3: inv(4) = 7 since 4 * 7 = 28 = 1 mod 27.
        let field = FieldCtx::new(3, &[1, 1], 0).unwrap();
        let ctx = PadicCtx::new(&field, 3).unwrap();
        let four = ctx.from_u64(4);
        let inv = ctx.inv(&four).unwrap();
        assert_eq!(inv, ctx.from_u64(7));
        assert_eq!(ctx.one(), ctx.mul(&four, &inv));
    }

    #[test]
    fn frobenius_homomorphism_and_order() {
        let field = FieldCtx::new(3, &[2, 2, 0, 1], 0).unwrap(); // F_27
        let ctx = PadicCtx::new(&field, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_unit(&ctx, &mut rng);
            let b = random_unit(&ctx, &mut rng);
            let lhs = ctx.frobenius(&ctx.mul(&a, &b), 1);
            let rhs = ctx.mul(&ctx.frobenius(&a, 1), &ctx.frobenius(&b, 1));
            assert_eq!(lhs, rhs);
            let sum = ctx.frobenius(&ctx.add(&a, &b), 1);
            assert_eq!(sum, ctx.add(&ctx.frobenius(&a, 1), &ctx.frobenius(&b, 1)));
            assert_eq!(ctx.frobenius(&a, field.n() as i64), a);
            // Reduction is the p-power map.
            let red = ctx.reduce_mod_p(&ctx.frobenius(&a, 1));
            assert_eq!(red, field.frob(&ctx.reduce_mod_p(&a)));
        }
    }

    #[test]
    fn norm_constant_and_invariance() {
        let field = FieldCtx::new(5, &[2, 4, 3, 0, 1, 0, 0, 0, 1], 0).unwrap();
        let ctx = PadicCtx::new(&field, 5).unwrap();
        let c = ctx.from_u64(7);
        let expected = BigUint::from(7u64).pow(8) % ctx.pm();
        assert_eq!(ctx.norm(&c).unwrap(), expected);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let z = random_unit(&ctx, &mut rng);
            assert_eq!(ctx.norm(&z).unwrap(), ctx.norm(&ctx.frobenius(&z, 1)).unwrap());
        }
    }

    #[test]
    fn norm_multiplicative_and_resultant_oracle() {
        // p=3, n=4, m=6.
        let field = FieldCtx::new(3, &[2, 1, 0, 0, 1], 0).unwrap();
        assert_eq!(field.n(), 4);
        let ctx = PadicCtx::new(&field, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let a = random_unit(&ctx, &mut rng);
            let b = random_unit(&ctx, &mut rng);
            let nab = ctx.norm(&ctx.mul(&a, &b)).unwrap();
            let na = ctx.norm(&a).unwrap();
            let nb = ctx.norm(&b).unwrap();
            assert_eq!(nab, (na * nb) % ctx.pm());
            assert_eq!(ctx.norm(&a).unwrap(), ctx.norm_resultant(&a));
        }
    }

    #[test]
    fn truncation_coherence() {
        let field = FieldCtx::new(3, &[2, 2, 0, 1], 0).unwrap();
        let hi = PadicCtx::new(&field, 8).unwrap();
        let lo = PadicCtx::new(&field, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let a = random_unit(&hi, &mut rng);
            let b = random_unit(&hi, &mut rng);
            let prod_hi = hi.mul(&a, &b);
            let a4 = lo.truncate(&a, 4);
            let b4 = lo.truncate(&b, 4);
            let prod_lo = lo.mul(&a4, &b4);
            assert_eq!(lo.truncate(&prod_hi, 4), prod_lo);
            let f_hi = hi.frobenius(&a, 1);
            let f_lo = lo.frobenius(&a4, 1);
            assert_eq!(lo.truncate(&f_hi, 4), f_lo);
        }
    }

    #[test]
    fn lift_reduce_roundtrip() {
        let field = FieldCtx::new(5, &[2, 4, 3, 0, 1, 0, 0, 0, 1], 0).unwrap();
        let ctx = PadicCtx::new(&field, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..10 {
            let a = field.random_element(&mut rng);
            assert_eq!(ctx.reduce_mod_p(&ctx.lift_from_field(&a, 5)), a);
        }
        assert!(ctx.is_zero(&ctx.lift_from_field(&field.zero(), 5)));
    }
}
