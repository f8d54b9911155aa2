//! Orchestration of the point-counting pipeline stages.

use crate::ff::{is_ordinary, FieldCtx, Fq, HyperellipticCurve};
use crate::theta::{extend_to_level_2p, reverse_duplication, thomae_squares, ThetaNull};
use crate::{Error, Result};

/// Computes the level-2p theta null point of the Jacobian of `curve` over
/// F_q, retrying Thomae sign choices until the extension step accepts one.
/// Returns the null point together with the accepted sign index.
pub fn initialize_level_2p(
    curve: &HyperellipticCurve,
    ctx: &FieldCtx,
    budget: &mut u64,
) -> Result<(ThetaNull<Fq>, u64)> {
    if !is_ordinary(curve, ctx) {
        return Err(Error::HypothesisViolation(
            "curve is not ordinary; the canonical lift does not exist".into(),
        ));
    }
    let p = ctx.p() as u32;
    let thomae = thomae_squares(curve, ctx)?;
    let mut start = 0u64;
    loop {
        let cand = reverse_duplication(&thomae, ctx, start)?;
        match extend_to_level_2p(&cand.null, p, ctx, budget) {
            Ok(null) => return Ok((null, cand.sign_index)),
            Err(Error::HypothesisViolation(_)) => start = cand.sign_index + 1,
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::{riemann_ideal_relations, IndexGroup, ThetaIndex};
    use std::collections::BTreeMap;

    // Exhaustive-search oracle for the extension step over a prime field:
    // every (x_1, x_2) satisfying the specialized quartic relations.
    fn enumerate_extension_g1(
        level2p: &ThetaNull<Fq>,
        ctx: &FieldCtx,
        p: u32,
    ) -> Vec<(Fq, Fq)> {
        let grp = IndexGroup::new(1, p);
        let rels = riemann_ideal_relations(1, p).unwrap();
        let knowns: BTreeMap<ThetaIndex, Fq> = grp
            .two_torsion()
            .iter()
            .map(|u| (u.clone(), level2p.get(u).clone()))
            .collect();
        let unknowns: Vec<ThetaIndex> = grp
            .canonical_indices()
            .into_iter()
            .filter(|u| !grp.is_two_torsion(u))
            .collect();
        assert_eq!(unknowns.len(), 2);
        let mut out = vec![];
        for x1 in ctx.all_elements() {
            for x2 in ctx.all_elements() {
                let val = |u: &ThetaIndex| -> Fq {
                    knowns.get(u).cloned().unwrap_or_else(|| {
                        if *u == unknowns[0] {
                            x1.clone()
                        } else {
                            x2.clone()
                        }
                    })
                };
                let ok = rels.riemann.iter().all(|rel| {
                    let mut acc = ctx.zero();
                    for (quad, c) in &rel.terms {
                        let mut t = ctx.from_i64(*c);
                        for idx in quad {
                            t = ctx.mul(&t, &val(&grp.canonical(idx)));
                        }
                        acc = ctx.add(&acc, &t);
                    }
                    ctx.is_zero(&acc)
                });
                if ok {
                    out.push((x1.clone(), x2.clone()));
                }
            }
        }
        out
    }

    #[test]
    fn g1_p3_f7_extension_matches_enumeration() {
        let ctx = FieldCtx::new(7, &[0, 1], 3).unwrap();
        let mut successes = 0;
        for mask in 0u32..(1 << 7) {
            if mask.count_ones() != 4 {
                continue;
            }
            let pts: Vec<Fq> = (0..7)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| ctx.from_u64(i))
                .collect();
            let curve = HyperellipticCurve::new(1, pts, &ctx).unwrap();
            let mut budget = 1u64 << 22;
            let Ok((null, _)) = initialize_level_2p(&curve, &ctx, &mut budget) else {
                continue;
            };
            successes += 1;
            assert_eq!(null.values.len(), 4);
            assert_eq!(null.get(&vec![0]), &ctx.one());
            // The accepted point appears in the exhaustive solution set.
            let sols = enumerate_extension_g1(&null, &ctx, 3);
            let a1 = null.get(&vec![1]).clone();
            let a2 = null.get(&vec![2]).clone();
            assert!(sols.contains(&(a1, a2)));
            // Determinism.
            let mut budget2 = 1u64 << 22;
            let (null2, sign2) = initialize_level_2p(&curve, &ctx, &mut budget2).unwrap();
            assert_eq!(null, null2);
            let mut budget3 = 1u64 << 22;
            let (_, sign3) = initialize_level_2p(&curve, &ctx, &mut budget3).unwrap();
            assert_eq!(sign2, sign3);
        }
        assert!(successes >= 3, "only {successes} curves initialized");
    }

    #[test]
    fn supersingular_curve_rejected() {
        // y^2 = x^3 + 1 over F_25 is supersingular.
        let ctx = FieldCtx::new(5, &[2, 0, 1], 5).unwrap();
        let f = crate::ff::FqPoly(vec![
            ctx.one(),
            ctx.zero(),
            ctx.zero(),
            ctx.one(),
        ]);
        let curve = HyperellipticCurve::from_poly(&f, &ctx).unwrap();
        let mut budget = 1u64 << 20;
        match initialize_level_2p(&curve, &ctx, &mut budget) {
            Err(Error::HypothesisViolation(_)) => {}
            other => panic!("expected hypothesis violation, got {other:?}"),
        }
    }
}
