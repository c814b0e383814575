//! Weak quantum secret sharing.
//!
//! The dealer distributes authenticated coordinates of outer-encoded zero
//! registers, the players jointly open random linear combinations in both
//! bases to check them, and the two surviving registers become a logical
//! EPR pair through which the dealer teleports the actual secret. Binding
//! is weak: a faulty dealer is either caught during the checks or fixed to
//! some consistent state, and later tampering by share holders can only
//! erase coordinates or expose the dealer, never substitute the secret.

use crate::auth::{auth_verify_decode, keygen};
use crate::field::interpolate;
use crate::net::{Delivery, PlayerId, Sim, Visibility};
use crate::script::Hook;
use crate::ttp::KeyId;
use crate::views::{outer_decode_erasure, outer_encode, slots_of, RegView};
use crate::engine::{Engine, PauliWord, Qudit};
use crate::{Error, Result};

/// What the dealer feeds into the teleportation step.
#[derive(Clone, Copy, Debug)]
pub enum SecretSpec {
    /// Computational basis state |v>.
    Basis(u64),
    /// Fourier transform of |v>.
    FourierBasis(u64),
    /// Half of a fresh EPR pair; the other half is handed back to the
    /// caller so entanglement with the shared secret can be verified.
    EprHalf,
}

/// A successfully shared secret: player i holds coordinate i of `register`.
#[derive(Debug)]
pub struct WqssShare {
    pub dealer: PlayerId,
    pub key: KeyId,
    pub register: RegView,
    /// Set when the secret was [`SecretSpec::EprHalf`].
    pub epr_external: Option<Qudit>,
}

#[derive(Debug)]
pub enum WqssOutcome {
    Share(WqssShare),
    DealerFaulty,
}

#[derive(Debug)]
pub enum WqssRecon {
    Secret(Qudit),
    DealerFaulty,
}

/// Publicly open one register: every player measures her coordinate and
/// broadcasts the word. Words that fail authentication are treated as
/// erasures without blame. Returns false when the surviving values are
/// inconsistent with a degree-t polynomial, or (in standard-basis rounds)
/// one with a nonzero free coefficient.
fn open_register(sim: &mut Sim, reg: &RegView, reg_idx: usize, fourier: bool) -> Result<bool> {
    let t = sim.params.t;
    let p = sim.p();
    let slots = slots_of(reg)?.to_vec();
    let mut survivors: Vec<(u64, u64)> = Vec::new();
    for (i, sv) in slots.iter().enumerate() {
        let holder = PlayerId(i as u32 + 1);
        let word = sim.measure_register(sv);
        let h = Hook::new("open.wqss", holder).reg(reg_idx).coord(i);
        let Some(word) = sim.submit_word(h, word) else {
            continue;
        };
        for &sym in &word {
            sim.observe("wqss.word", p, Visibility::Public, sym);
        }
        let rr = sv
            .rref()
            .ok_or_else(|| Error::protocol("opened coordinate has no key record"))?;
        match sim.ttp.decode_measurement(rr, &word) {
            Ok(v) => survivors.push((i as u64 + 1, v)),
            Err(_) => sim.event("open.wqss.reject", Some(holder), None, vec![i as u64 + 1]),
        }
    }
    if survivors.len() < t + 1 {
        return Err(Error::protocol(
            "fewer than t+1 readable coordinates at a check opening",
        ));
    }
    let zp = sim.zp;
    match interpolate(zp, &survivors, t) {
        Err(_) => Ok(false),
        Ok(f) => Ok(fourier || f.eval(zp, 0) == 0),
    }
}

/// Share a secret under a fresh dealer key. The checks consume the first
/// 2s registers; the last two become the teleportation channel.
pub fn wqss_share(sim: &mut Sim, dealer: PlayerId, secret: SecretSpec) -> Result<WqssOutcome> {
    let p = sim.p();
    let n = sim.n();
    let t = sim.params.t;
    let s = sim.params.s;
    let m = sim.params.m();
    let k = keygen(sim.zp, m, &mut sim.rng);
    let key = sim.ttp.register_keys(dealer, k, Vec::new());

    let total = 2 * s + 2;
    let mut regs = Vec::with_capacity(total);
    for ridx in 0..total {
        let mut value = 0;
        if sim.script.is_corrupt(dealer) {
            let h = Hook::new("wqss.deal", dealer).reg(ridx);
            value = sim.script.plant_any(h).unwrap_or(0);
        }
        let q = sim.bare(value);
        let coords = outer_encode(&mut sim.eng, &sim.codes, q);
        let mut slots = Vec::with_capacity(n);
        for (i, cq) in coords.into_iter().enumerate() {
            let av = sim.encode_qudit_auth(dealer, key, cq)?;
            let holder = PlayerId(i as u32 + 1);
            let h = Hook::new("wqss.deal", dealer)
                .peer(holder)
                .reg(ridx)
                .coord(i);
            let leaves = av.leaves();
            sim.send_quantum(h, leaves);
            slots.push(av);
        }
        regs.push(RegView::Code { slots });
    }
    // Corrupted holders may attack what they received before any check.
    for (ridx, rg) in regs.iter().enumerate() {
        for (i, sv) in slots_of(rg)?.iter().enumerate() {
            let holder = PlayerId(i as u32 + 1);
            if sim.script.is_corrupt(holder) {
                let leaves = sv.leaves();
                sim.touch_held(Hook::new("hold.precheck", holder).reg(ridx).coord(i), &leaves);
            }
        }
    }
    sim.next_round();

    // s standard and s Fourier check rounds, one register opened per round.
    for iter in 0..s {
        for basis in 0..2usize {
            let open_idx = 2 * iter + basis;
            if basis == 1 {
                for rg in &regs[open_idx..] {
                    sim.lf(rg)?;
                }
            }
            let rest = total - open_idx - 1;
            let coeffs = sim.ttp.challenge(rest + 1, true, &mut sim.rng);
            sim.lmult(&regs[open_idx], coeffs[0])?;
            for j in 0..rest {
                sim.laddmul(&regs[open_idx + 1 + j], &regs[open_idx], coeffs[1 + j])?;
            }
            let ok = open_register(sim, &regs[open_idx], open_idx, basis == 1)?;
            if !ok {
                sim.declare_faulty(dealer, "wqss.inconsistent");
                return Ok(WqssOutcome::DealerFaulty);
            }
            if basis == 1 {
                for rg in &regs[open_idx + 1..] {
                    sim.lf_inv(rg)?;
                }
            }
            sim.next_round();
        }
    }

    // Logical EPR pair from the two unopened registers.
    let a_reg = regs[total - 2].clone();
    let b_reg = regs[total - 1].clone();
    sim.lf(&a_reg)?;
    sim.lsum(&a_reg, &b_reg)?;

    // Everyone routes her half-b coordinate back to the dealer, who strips
    // the authentication and the outer code to get a bare EPR half.
    let b_slots = slots_of(&b_reg)?.to_vec();
    let sign = sim.ttp.sign_key(key)?;
    let mut survivors: Vec<(u64, Qudit)> = Vec::new();
    for (i, sv) in b_slots.iter().enumerate() {
        let holder = PlayerId(i as u32 + 1);
        let h = Hook::new("wqss.epr", holder)
            .peer(dealer)
            .reg(total - 1)
            .coord(i);
        let leaves = sv.leaves();
        let Some(handles) = sim.send_quantum(h, leaves).handles() else {
            sim.event("wqss.epr_missing", Some(holder), Some(dealer), vec![]);
            continue;
        };
        let rr = sv
            .rref()
            .ok_or_else(|| Error::protocol("coordinate view has no key record"))?;
        let pad = sim.ttp.current_pad(rr)?;
        let out = auth_verify_decode(
            &mut sim.eng,
            &sim.codes.auth,
            &sign,
            &pad,
            &handles,
            &mut sim.rng,
        );
        if out.accepted {
            survivors.push((i as u64 + 1, out.data));
        } else {
            sim.event("wqss.epr_reject", Some(holder), Some(dealer), vec![i as u64 + 1]);
        }
    }
    if survivors.len() < t + 1 {
        return Err(Error::protocol(
            "fewer than t+1 coordinates reached the dealer",
        ));
    }
    let dec = outer_decode_erasure(&mut sim.eng, &sim.codes, &survivors)?;
    let (b_bare, syn) = dec.pick(&mut sim.eng, &mut sim.rng)?;
    if syn.iter().any(|&v| v != 0) {
        sim.declare_faulty(dealer, "wqss.epr_syndrome");
        return Ok(WqssOutcome::DealerFaulty);
    }

    // Teleport the secret through the pair. Bell outcomes are public and
    // uniform; corrections land on the shared half as logical gates.
    let (sigma, external) = match secret {
        SecretSpec::Basis(v) => (sim.bare(v), None),
        SecretSpec::FourierBasis(v) => {
            let q = sim.bare(v);
            sim.eng.fourier(q);
            (q, None)
        }
        SecretSpec::EprHalf => {
            let e1 = sim.bare(0);
            let e2 = sim.bare(0);
            sim.eng.fourier(e1);
            sim.eng.sum(e1, e2);
            (e2, Some(e1))
        }
    };
    sim.eng.sum(sigma, b_bare);
    sim.eng.fourier(sigma);
    let u = sim.eng.measure(sigma, &mut sim.rng);
    let w = sim.eng.measure(b_bare, &mut sim.rng);
    sim.event("wqss.bell", Some(dealer), None, vec![u, w]);
    sim.observe("bell", p, Visibility::Public, u);
    sim.observe("bell", p, Visibility::Public, w);
    sim.lneg(&a_reg)?;
    sim.lx(&a_reg, w)?;
    sim.lz(&a_reg, (p - u) % p)?;
    sim.next_round();

    Ok(WqssOutcome::Share(WqssShare {
        dealer,
        key,
        register: a_reg,
        epr_external: external,
    }))
}

/// Reconstruction toward a single receiver: coordinates travel to the
/// reconstructor, the dealer key and pads are released, and rejected
/// coordinates become erasures. Surviving shares off any degree-t
/// polynomial expose the dealer.
pub fn wqss_reconstruct_naive(
    sim: &mut Sim,
    share: &WqssShare,
    recon: PlayerId,
) -> Result<WqssRecon> {
    let t = sim.params.t;
    let p = sim.p();
    let slots = slots_of(&share.register)?.to_vec();

    // Corrupted holders act on what they kept before anything moves.
    for (i, sv) in slots.iter().enumerate() {
        let holder = PlayerId(i as u32 + 1);
        if !sim.script.is_corrupt(holder) {
            continue;
        }
        let leaves = sv.leaves();
        sim.touch_held(Hook::new("hold.postshare", holder).reg(0).coord(i), &leaves);
        if holder == share.dealer {
            if let Some(delta) = sim.script.dealer_shift(holder) {
                // The dealer knows his own signing key, so he can move his
                // coordinate logically without tripping authentication.
                let sign = sim.ttp.sign_key(share.key)?;
                for (j, &q) in leaves.iter().enumerate() {
                    let shift = sim.zp.mul(sign.k[j], delta);
                    sim.eng.pauli(&PauliWord::x(sim.zp, q, shift));
                }
                sim.event("hold.keyshift", Some(holder), None, vec![delta]);
            }
        }
    }

    let mut received: Vec<(usize, RegView)> = Vec::new();
    for (i, sv) in slots.iter().enumerate() {
        let holder = PlayerId(i as u32 + 1);
        let h = Hook::new("reconstruct.submit", holder).peer(recon).coord(i);
        match sim.send_quantum(h, sv.leaves()) {
            Delivery::Handles(_) => received.push((i, sv.clone())),
            Delivery::Withheld => {}
        }
    }

    // Authorized release of the dealer key material to the reconstructor.
    sim.ttp.authorize_reveal(share.key);
    let (sign, pads) = sim.ttp.reveal_key(share.key)?;
    for &ki in &sign.k {
        let bit = if ki == 1 { 0 } else { 1 };
        sim.observe("reveal.sign", 2, Visibility::To(recon), bit);
    }
    for (_, sv) in &received {
        let rr = sv
            .rref()
            .ok_or_else(|| Error::protocol("received coordinate has no key record"))?;
        for &(a, b) in &pads[rr.reg].pairs {
            sim.observe("reveal.pad", p, Visibility::To(recon), a);
            sim.observe("reveal.pad", p, Visibility::To(recon), b);
        }
    }

    let mut survivors: Vec<(u64, Qudit)> = Vec::new();
    for (i, sv) in received {
        let rr = sv
            .rref()
            .ok_or_else(|| Error::protocol("received coordinate has no key record"))?;
        let out = auth_verify_decode(
            &mut sim.eng,
            &sim.codes.auth,
            &sign,
            &pads[rr.reg],
            &sv.leaves(),
            &mut sim.rng,
        );
        if out.accepted {
            survivors.push((i as u64 + 1, out.data));
        } else {
            sim.event("reconstruct.reject", None, Some(recon), vec![i as u64 + 1]);
        }
    }
    if survivors.len() < t + 1 {
        return Err(Error::protocol(
            "fewer than t+1 coordinates survived reconstruction",
        ));
    }
    let dec = outer_decode_erasure(&mut sim.eng, &sim.codes, &survivors)?;
    let (data, syn) = dec.pick(&mut sim.eng, &mut sim.rng)?;
    if syn.iter().any(|&v| v != 0) {
        sim.declare_faulty(share.dealer, "wqss.syndrome");
        return Ok(WqssRecon::DealerFaulty);
    }
    sim.next_round();
    Ok(WqssRecon::Secret(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;
    use crate::script::ScriptSpec;

    fn sim_with(spec: ScriptSpec, seed: u64) -> Sim {
        Sim::new(&Params::default(), spec, seed).unwrap()
    }

    fn share_ok(sim: &mut Sim, secret: SecretSpec) -> WqssShare {
        match wqss_share(sim, PlayerId(1), secret).unwrap() {
            WqssOutcome::Share(sh) => sh,
            WqssOutcome::DealerFaulty => panic!("honest dealer declared faulty"),
        }
    }

    fn secret_of(sim: &mut Sim, r: WqssRecon) -> u64 {
        match r {
            WqssRecon::Secret(q) => {
                let mut rng = rand::thread_rng();
                sim.eng.measure(q, &mut rng)
            }
            WqssRecon::DealerFaulty => panic!("dealer declared faulty"),
        }
    }

    #[test]
    fn honest_basis_secrets_reconstruct_exactly() {
        for v in 0..5 {
            let mut sim = sim_with(ScriptSpec::Honest, 100 + v);
            let sh = share_ok(&mut sim, SecretSpec::Basis(v));
            let r = wqss_reconstruct_naive(&mut sim, &sh, PlayerId(2)).unwrap();
            assert_eq!(secret_of(&mut sim, r), v);
            assert!(!sim.honest_flagged());
        }
    }

    #[test]
    fn honest_fourier_secrets_reconstruct_exactly() {
        for v in 0..5 {
            let mut sim = sim_with(ScriptSpec::Honest, 200 + v);
            let sh = share_ok(&mut sim, SecretSpec::FourierBasis(v));
            match wqss_reconstruct_naive(&mut sim, &sh, PlayerId(3)).unwrap() {
                WqssRecon::Secret(q) => {
                    sim.eng.fourier_inv(q);
                    let mut rng = rand::thread_rng();
                    assert_eq!(sim.eng.measure(q, &mut rng), v);
                }
                WqssRecon::DealerFaulty => panic!("honest dealer declared faulty"),
            }
        }
    }

    #[test]
    fn honest_epr_half_stays_entangled() {
        // Computational correlation: both halves give the same value.
        let mut sim = sim_with(ScriptSpec::Honest, 300);
        let sh = share_ok(&mut sim, SecretSpec::EprHalf);
        let e1 = sh.epr_external.unwrap();
        match wqss_reconstruct_naive(&mut sim, &sh, PlayerId(2)).unwrap() {
            WqssRecon::Secret(q) => {
                let mut rng = rand::thread_rng();
                let a = sim.eng.measure(e1, &mut rng);
                let b = sim.eng.measure(q, &mut rng);
                assert_eq!(a, b);
            }
            WqssRecon::DealerFaulty => panic!("honest dealer declared faulty"),
        }
        // Fourier correlation: measured values sum to zero mod p.
        let mut sim = sim_with(ScriptSpec::Honest, 301);
        let sh = share_ok(&mut sim, SecretSpec::EprHalf);
        let e1 = sh.epr_external.unwrap();
        match wqss_reconstruct_naive(&mut sim, &sh, PlayerId(2)).unwrap() {
            WqssRecon::Secret(q) => {
                sim.eng.fourier(e1);
                sim.eng.fourier(q);
                let mut rng = rand::thread_rng();
                let a = sim.eng.measure(e1, &mut rng);
                let b = sim.eng.measure(q, &mut rng);
                assert_eq!((a + b) % 5, 0);
            }
            WqssRecon::DealerFaulty => panic!("honest dealer declared faulty"),
        }
    }

    #[test]
    fn check_rounds_broadcast_words_publicly() {
        let mut sim = sim_with(ScriptSpec::Honest, 7);
        let _ = share_ok(&mut sim, SecretSpec::Basis(2));
        // 2s rounds, n coordinates of m symbols each.
        let words: Vec<_> = sim
            .observations
            .iter()
            .filter(|o| o.channel == "wqss.word")
            .collect();
        assert_eq!(words.len(), 8 * 3 * 3);
        assert_eq!(
            sim.observations.iter().filter(|o| o.channel == "bell").count(),
            2
        );
    }

    #[test]
    fn planted_register_opened_directly_is_always_caught() {
        for seed in 0..30 {
            let spec = ScriptSpec::BadDealerZeros {
                dealer: 1,
                targets: vec![],
                registers: vec![0],
                plant: 3,
            };
            let mut sim = sim_with(spec, 400 + seed);
            let out = wqss_share(&mut sim, PlayerId(1), SecretSpec::Basis(0)).unwrap();
            assert!(matches!(out, WqssOutcome::DealerFaulty), "seed {seed}");
        }
    }

    #[test]
    fn planted_epr_register_caught_at_the_sampling_rate() {
        // Plant rides every check sum; only a standard round with a zero
        // coefficient on it misses, so failure odds are 5^-4 per run.
        let mut caught = 0;
        for seed in 0..120 {
            let spec = ScriptSpec::BadDealerZeros {
                dealer: 1,
                targets: vec![],
                registers: vec![8],
                plant: 2,
            };
            let mut sim = sim_with(spec, 500 + seed);
            let out = wqss_share(&mut sim, PlayerId(1), SecretSpec::Basis(0)).unwrap();
            if matches!(out, WqssOutcome::DealerFaulty) {
                caught += 1;
            }
            assert!(!sim.honest_flagged());
        }
        assert!(caught >= 116, "caught only {caught}/120");
    }

    #[test]
    fn substitution_attacks_cannot_change_the_secret() {
        let attacks = [
            ScriptSpec::ShareSubstitute { player: 2, qudit: 1, x: 2, z: 1 },
            ScriptSpec::ShareSubstitute { player: 3, qudit: 0, x: 0, z: 3 },
            ScriptSpec::PostShareTamper { player: 2, qudit: 2, x: 1, z: 4 },
            ScriptSpec::WithholdAtReconstruct { player: 3 },
            ScriptSpec::TamperInTransit {
                player: 2,
                step: "reconstruct.submit".into(),
                to: None,
                reg: None,
                qudit: 0,
                x: 1,
                z: 0,
            },
        ];
        for (ai, spec) in attacks.iter().enumerate() {
            for seed in 0..20 {
                let mut sim = sim_with(spec.clone(), 600 + 100 * ai as u64 + seed);
                let sh = share_ok(&mut sim, SecretSpec::Basis(3));
                let r = wqss_reconstruct_naive(&mut sim, &sh, PlayerId(1)).unwrap();
                assert_eq!(secret_of(&mut sim, r), 3, "attack {ai} seed {seed}");
                assert!(!sim.honest_flagged());
            }
        }
    }

    #[test]
    fn dealer_shift_after_commitment_is_exposed() {
        for seed in 0..30 {
            let spec = ScriptSpec::DealerShiftOwnShare { dealer: 1, delta: 2 };
            let mut sim = sim_with(spec, 700 + seed);
            let sh = share_ok(&mut sim, SecretSpec::Basis(1));
            let r = wqss_reconstruct_naive(&mut sim, &sh, PlayerId(2)).unwrap();
            assert!(matches!(r, WqssRecon::DealerFaulty), "seed {seed}");
            assert!(!sim.honest_flagged());
        }
    }

    #[test]
    fn refusing_check_opens_only_erases_that_player() {
        for seed in 0..20 {
            let spec = ScriptSpec::RefuseOpen {
                player: 2,
                step: "open.wqss".into(),
            };
            let mut sim = sim_with(spec, 800 + seed);
            let sh = share_ok(&mut sim, SecretSpec::Basis(4));
            let r = wqss_reconstruct_naive(&mut sim, &sh, PlayerId(3)).unwrap();
            assert_eq!(secret_of(&mut sim, r), 4, "seed {seed}");
        }
    }

    #[test]
    fn transcripts_replay_byte_identically() {
        let run = |seed| {
            let spec = ScriptSpec::ShareSubstitute { player: 2, qudit: 0, x: 1, z: 2 };
            let mut sim = sim_with(spec, seed);
            let sh = share_ok(&mut sim, SecretSpec::Basis(2));
            let _ = wqss_reconstruct_naive(&mut sim, &sh, PlayerId(1)).unwrap();
            sim.transcript.to_jsonl()
        };
        assert_eq!(run(42), run(42));
    }

    #[test]
    fn key_reveal_is_scoped_to_the_reconstructor() {
        let mut sim = sim_with(ScriptSpec::Honest, 900);
        let sh = share_ok(&mut sim, SecretSpec::Basis(0));
        let _ = wqss_reconstruct_naive(&mut sim, &sh, PlayerId(2)).unwrap();
        let signs = sim
            .observations
            .iter()
            .filter(|o| o.channel == "reveal.sign")
            .collect::<Vec<_>>();
        assert_eq!(signs.len(), 3);
        assert!(signs.iter().all(|o| o.vis == Visibility::To(PlayerId(2))));
        let pads = sim
            .observations
            .iter()
            .filter(|o| o.channel == "reveal.pad")
            .count();
        assert_eq!(pads, 3 * 3 * 2);
    }
}
