//! Zero-Share: a dealer hands every player a pool of authenticated
//! zero registers, and the players verify purity before trusting them.
//!
//! Each pool holds (r+2s)(t+1) registers; 2s sacrificial registers per
//! test are opened across s iterations of paired standard/Fourier
//! random-sum rounds. A failed verdict becomes a broadcast complaint;
//! more than t complaints convict the dealer, otherwise complainers are
//! refilled from the lowest-indexed non-complainer with registers to
//! spare and re-test what they received. The arithmetic leaves every
//! satisfied player holding at least r verified zeros.

use crate::auth::keygen;
use crate::net::{Delivery, PlayerId, Sim, Visibility};
use crate::script::Hook;
use crate::ttp::{KeyId, PurityConstraint};
use crate::views::RegView;
use crate::{Error, Result};
use std::collections::BTreeMap;

#[derive(Debug)]
pub struct ZeroBank {
    pub dealer: PlayerId,
    pub key: KeyId,
    pub holdings: BTreeMap<PlayerId, Vec<RegView>>,
}

#[derive(Debug)]
pub enum ZeroOutcome {
    Bank(ZeroBank),
    DealerFaulty,
}

/// Purity-test a pool of claimed zeros. The first 2s registers are the
/// sacrificial ones, opened in order; every later register rides along
/// in the random sums and is returned as kept. Verdicts come from the
/// TTP; the conjunction is this player's honest complaint signal.
pub fn purity_test(
    sim: &mut Sim,
    player: PlayerId,
    pool: Vec<RegView>,
) -> Result<(bool, Vec<RegView>)> {
    let s = sim.params.s;
    if pool.len() < 2 * s + 1 {
        return Err(Error::protocol("pool too small for purity testing"));
    }
    let p = sim.p();
    let mut ok = true;
    for iter in 0..s {
        for basis in 0..2usize {
            let open_idx = 2 * iter + basis;
            if basis == 1 {
                for reg in &pool[open_idx..] {
                    sim.lf(reg)?;
                }
            }
            let rest = open_idx + 1..pool.len();
            let coeffs = sim.ttp.challenge(rest.len() + 1, true, &mut sim.rng);
            let target = &pool[open_idx];
            sim.lmult(target, coeffs[0])?;
            for (j, c) in rest.clone().zip(coeffs[1..].iter()) {
                sim.laddmul(&pool[j], target, *c)?;
            }
            let word = sim.measure_register(target);
            let submitted = sim.submit_word(Hook::new("open.purity", player).reg(open_idx), word);
            if let Some(w) = &submitted {
                for &sym in w {
                    sim.observe("purity.word", p, Visibility::Public, sym);
                }
            }
            let constraint = if basis == 0 {
                PurityConstraint::FreeCoeffZero
            } else {
                PurityConstraint::FreeCoeffAny
            };
            let verdict = sim.ttp.purity_verdict(
                player,
                sim.round,
                target.rref().expect("pool registers are authenticated"),
                submitted.as_deref(),
                constraint,
            );
            ok &= verdict.ok;
            if basis == 1 {
                for reg in &pool[open_idx + 1..] {
                    sim.lf_inv(reg)?;
                }
            }
        }
        sim.next_round();
    }
    Ok((ok, pool[2 * s..].to_vec()))
}

/// Run the full Zero-Share protocol with the given dealer.
pub fn zero_share(sim: &mut Sim, dealer: PlayerId) -> Result<ZeroOutcome> {
    let (r, s, t) = (sim.params.r, sim.params.s, sim.params.t);
    let per = (r + 2 * s) * (t + 1);
    let m = sim.params.m();
    let k = keygen(sim.zp, m, &mut sim.rng);
    let key = sim.ttp.register_keys(dealer, k, vec![]);
    let players: Vec<PlayerId> = sim.players().collect();

    let mut pools: BTreeMap<PlayerId, Vec<RegView>> = BTreeMap::new();
    for &j in &players {
        let mut pool = Vec::new();
        for idx in 0..per {
            let h = Hook::new("zero.deal", dealer).peer(j).reg(idx);
            let plant = if sim.script.is_corrupt(dealer) {
                sim.script.plant(h).unwrap_or(0)
            } else {
                0
            };
            let v = sim.encode_value_auth(dealer, key, plant)?;
            match sim.send_quantum(h, v.leaves()) {
                Delivery::Handles(_) => pool.push(v),
                Delivery::Withheld => {}
            }
        }
        pools.insert(j, pool);
    }
    sim.next_round();

    let mut complainers = Vec::new();
    let mut kept: BTreeMap<PlayerId, Vec<RegView>> = BTreeMap::new();
    for &j in &players {
        let pool = pools.remove(&j).unwrap();
        let (ok, keep) = if pool.len() < per {
            (false, Vec::new())
        } else {
            purity_test(sim, j, pool)?
        };
        if sim.complaint(j, !ok) {
            complainers.push(j);
        }
        kept.insert(j, keep);
    }
    sim.next_round();

    if sim.ttp.tally_complaints(dealer, &complainers, t as u64) {
        sim.declare_faulty(dealer, "zero_tally");
        return Ok(ZeroOutcome::DealerFaulty);
    }

    // Redistribution: a complainer discards her pool and re-tests a
    // fresh one from the lowest non-complainer who still has spares.
    let mut donated: BTreeMap<PlayerId, usize> = BTreeMap::new();
    for &c in &complainers {
        kept.insert(c, Vec::new());
        let donor = players.iter().copied().find(|d| {
            *d != c && !complainers.contains(d) && donated.get(d).copied().unwrap_or(0) < t
        });
        let Some(donor) = donor else {
            sim.event("zero.no_donor", None, Some(c), vec![]);
            continue;
        };
        *donated.entry(donor).or_insert(0) += 1;
        let give: Vec<RegView> = kept.get_mut(&donor).unwrap().drain(..r + 2 * s).collect();
        let mut received = Vec::new();
        for (idx, v) in give.into_iter().enumerate() {
            let h = Hook::new("zero.redistribute", donor).peer(c).reg(idx);
            match sim.send_quantum(h, v.leaves()) {
                Delivery::Handles(_) => received.push(v),
                Delivery::Withheld => {}
            }
        }
        let (ok2, keep2) = if received.len() < r + 2 * s {
            (false, Vec::new())
        } else {
            purity_test(sim, c, received)?
        };
        if !ok2 {
            sim.event("zero.retest_failed", Some(c), None, vec![]);
        }
        kept.insert(c, if ok2 { keep2 } else { Vec::new() });
    }
    sim.next_round();

    Ok(ZeroOutcome::Bank(ZeroBank {
        dealer,
        key,
        holdings: kept,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;
    use crate::script::ScriptSpec;

    fn run(spec: ScriptSpec, seed: u64) -> (Sim, ZeroOutcome) {
        let params = Params::default();
        let mut sim = Sim::new(&params, spec, seed).unwrap();
        let out = zero_share(&mut sim, PlayerId(1)).unwrap();
        (sim, out)
    }

    fn decode_holding(sim: &mut Sim, v: &RegView) -> Result<u64> {
        let rref = v.rref().unwrap();
        let word = sim.measure_register(v);
        sim.ttp.decode_measurement(rref, &word)
    }

    #[test]
    fn honest_dealer_full_banks() {
        let (mut sim, out) = run(ScriptSpec::Honest, 5);
        let ZeroOutcome::Bank(bank) = out else {
            panic!("honest dealer declared faulty")
        };
        let keepn = (sim.params.r + 2 * sim.params.s) * (sim.params.t + 1) - 2 * sim.params.s;
        for j in 1..=3 {
            let pool = &bank.holdings[&PlayerId(j)];
            assert_eq!(pool.len(), keepn);
        }
        assert_eq!(sim.transcript.count_tag("complain"), 0);
        assert!(!sim.honest_flagged());
        for j in 1..=3 {
            for v in bank.holdings[&PlayerId(j)].clone().iter().take(2) {
                assert_eq!(decode_holding(&mut sim, v).unwrap(), 0);
            }
        }
    }

    #[test]
    fn bad_dealer_to_one_player_redistributes() {
        let spec = ScriptSpec::BadDealerZeros {
            dealer: 1,
            targets: vec![2],
            registers: (0..24).collect(),
            plant: 1,
        };
        let (mut sim, out) = run(spec, 11);
        let ZeroOutcome::Bank(bank) = out else {
            panic!("single complaint must not convict at t = 1")
        };
        assert_eq!(sim.transcript.count_tag("complain"), 1);
        assert!(sim.transcript.count_tag("zero.redistribute") >= 12);
        let pool = bank.holdings[&PlayerId(2)].clone();
        assert_eq!(pool.len(), sim.params.r, "complainer keeps exactly r");
        for v in &pool {
            assert_eq!(decode_holding(&mut sim, v).unwrap(), 0);
        }
        assert!(!sim.honest_flagged());
    }

    #[test]
    fn bad_dealer_to_majority_is_faulty() {
        let spec = ScriptSpec::BadDealerZeros {
            dealer: 1,
            targets: vec![2, 3],
            registers: (0..24).collect(),
            plant: 2,
        };
        let (sim, out) = run(spec, 13);
        assert!(matches!(out, ZeroOutcome::DealerFaulty));
        assert!(sim.faulty.contains(&PlayerId(1)));
        assert!(!sim.honest_flagged(), "the convicted dealer is the corrupt one");
    }

    #[test]
    fn plant_in_first_sacrificial_always_caught() {
        for seed in 0..40 {
            let spec = ScriptSpec::BadDealerZeros {
                dealer: 1,
                targets: vec![3],
                registers: vec![0],
                plant: 1,
            };
            let (sim, _) = run(spec, 1000 + seed);
            assert_eq!(
                sim.transcript.count_tag("complain"),
                1,
                "nonzero challenge weight on the opened register detects the plant"
            );
        }
    }

    #[test]
    fn plant_in_kept_register_caught_at_purity_rate() {
        // Expected detection 1 - 5^-4 = 0.9984; 150 trials should all or
        // almost all complain.
        let mut detected = 0;
        for seed in 0..150 {
            let spec = ScriptSpec::BadDealerZeros {
                dealer: 1,
                targets: vec![2],
                registers: vec![8],
                plant: 1,
            };
            let (sim, _) = run(spec, 2000 + seed);
            detected += sim.transcript.count_tag("complain").min(1);
        }
        assert!(detected >= 147, "detected only {detected}/150");
    }

    #[test]
    fn complaint_flood_cannot_frame_the_dealer() {
        let (sim, out) = run(ScriptSpec::ComplaintFlood { player: 3 }, 21);
        let ZeroOutcome::Bank(bank) = out else {
            panic!("one flooder is below the complaint threshold")
        };
        assert!(!sim.honest_flagged());
        // The flooder is refilled and her re-test passes; she still
        // "complained" once but holds r good registers.
        assert_eq!(bank.holdings[&PlayerId(3)].len(), sim.params.r);
        assert_eq!(sim.transcript.count_tag("zero.retest_failed"), 0);
    }

    #[test]
    fn targeted_transit_tamper_detected_and_resolved() {
        let spec = ScriptSpec::TamperInTransit {
            player: 1,
            step: "zero.deal".into(),
            to: Some(2),
            reg: Some(0),
            qudit: 1,
            x: 1,
            z: 0,
        };
        let (mut sim, out) = run(spec, 31);
        let ZeroOutcome::Bank(bank) = out else {
            panic!("one complaint stays below threshold")
        };
        assert_eq!(sim.transcript.count_tag("complain"), 1);
        let pool = bank.holdings[&PlayerId(2)].clone();
        assert_eq!(pool.len(), sim.params.r);
        for v in &pool {
            assert_eq!(decode_holding(&mut sim, v).unwrap(), 0);
        }
    }

    #[test]
    fn refusing_opens_hurts_only_the_refuser() {
        let spec = ScriptSpec::RefuseOpen {
            player: 2,
            step: "open.purity".into(),
        };
        let (sim, out) = run(spec, 41);
        let ZeroOutcome::Bank(bank) = out else {
            panic!("one complaint stays below threshold")
        };
        assert!(!sim.honest_flagged());
        assert_eq!(sim.transcript.count_tag("zero.retest_failed"), 1);
        assert!(bank.holdings[&PlayerId(2)].is_empty());
        let keepn = (sim.params.r + 2 * sim.params.s) * 2 - 2 * sim.params.s;
        assert_eq!(bank.holdings[&PlayerId(3)].len(), keepn);
    }

    #[test]
    fn transcripts_replay_byte_identically() {
        let spec = || ScriptSpec::BadDealerZeros {
            dealer: 1,
            targets: vec![2],
            registers: (0..24).collect(),
            plant: 1,
        };
        let (sim_a, _) = run(spec(), 77);
        let (sim_b, _) = run(spec(), 77);
        let (sim_c, _) = run(spec(), 78);
        assert_eq!(sim_a.transcript.to_jsonl(), sim_b.transcript.to_jsonl());
        assert_ne!(sim_a.transcript.to_jsonl(), sim_c.transcript.to_jsonl());
    }

    #[test]
    fn opened_words_land_in_the_observation_log() {
        let (sim, _) = run(ScriptSpec::Honest, 51);
        let m = sim.params.m();
        let words = sim
            .observations
            .iter()
            .filter(|o| o.channel == "purity.word")
            .count();
        // 3 players x 2s opened registers x m symbols.
        assert_eq!(words, 3 * 2 * sim.params.s * m);
    }
}
