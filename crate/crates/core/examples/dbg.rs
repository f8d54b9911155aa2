use theta_count::ff::*;
use theta_count::theta::*;
use theta_count::Error;
fn main() {
    let ctx = FieldCtx::new(7, &[0, 1], 3).unwrap();
    for mask in 0u32..(1<<7) {
        if mask.count_ones() != 4 { continue; }
        let pts: Vec<Fq> = (0..7).filter(|i| mask >> i & 1 == 1).map(|i| ctx.from_u64(i)).collect();
        let curve = HyperellipticCurve::new(1, pts.clone(), &ctx).unwrap();
        let ord = is_ordinary(&curve, &ctx);
        let th = thomae_squares(&curve, &ctx);
        if !ord || th.is_err() {
            println!("mask {mask:07b} ord={} thomae={}", ord, th.is_ok());
            continue;
        }
        let th = th.unwrap();
        let mut start = 0u64;
        let mut res = String::from("exhausted");
        loop {
            let cand = match reverse_duplication(&th, &ctx, start) { Ok(c) => c, Err(_) => break };
            let mut budget = 1u64 << 22;
            match extend_to_level_2p(&cand.null, 3, &ctx, &mut budget) {
                Ok(_) => { res = format!("OK sign={}", cand.sign_index); break; }
                Err(Error::HypothesisViolation(_)) => start = cand.sign_index + 1,
                Err(e) => { res = format!("hard {e:?}"); break; }
            }
        }
        println!("mask {mask:07b} ord=true thomae=true -> {res}");
    }
}
