use mpqc_core::net::{PlayerId, Sim};
use mpqc_core::params::Params;
use mpqc_core::script::ScriptSpec;
use mpqc_core::vqss::*;
use mpqc_core::wqss::SecretSpec;
use std::time::Instant;

fn main() {
    // One trial, phase-timed via two sims (share alone vs share+reconstruct).
    for seed in [9000u64, 9001] {
        let t0 = Instant::now();
        let mut sim = Sim::new(&Params::default(), ScriptSpec::Honest, seed).unwrap();
        let keys = session_keys(&mut sim).unwrap();
        let sh = match vqss_share(&mut sim, &keys, PlayerId(1), SecretSpec::Basis(3)).unwrap() {
            VqssOutcome::Shared(sh) => sh,
            VqssOutcome::DealerFaulty => panic!(),
        };
        let t_share = t0.elapsed();
        let t1 = Instant::now();
        let _ = vqss_reconstruct(&mut sim, &keys, &sh, PlayerId(2)).unwrap();
        println!("seed {seed}: share {:?} reconstruct {:?}", t_share, t1.elapsed());
    }
}
