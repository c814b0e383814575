//! Verifiable quantum secret sharing over a two-level tree.
//!
//! The dealer authenticates each coordinate of an outer-encoded register,
//! and every receiving player immediately re-shares what she got under her
//! own session key. After random-sum checks in both bases, the surviving
//! pair of trees becomes a logical EPR channel: one half is condensed back
//! to a bare qudit at the dealer, the other loses its dealer-level
//! authentication and stays spread across all players as the share.
//!
//! The second sharing level is what upgrades weak binding to verifiability:
//! no single player holds enough of any coordinate to move its value, so a
//! shifted or scrambled sub-share surfaces as an inconsistency attributable
//! to its owner, and reconstruction can simply erase that coordinate.

use crate::auth::{auth_verify_decode, keygen};
use crate::engine::{Engine, PauliWord, Qudit};
use crate::field::{interpolate, LinOp};
use crate::net::{Delivery, PlayerId, Sim, Visibility};
use crate::script::Hook;
use crate::ttp::{KeyId, RegRef};
use crate::views::{outer_decode_erasure, outer_encode, slots_of, RegView};
use crate::wqss::SecretSpec;
use crate::{Error, Result};

/// Sub-sharing keys, one per player, reused for every sharing in a session
/// so that shared trees stay transversal to each other under logical gates.
#[derive(Clone, Debug)]
pub struct SessionKeys {
    pub k: Vec<KeyId>,
}

/// Each player registers the authentication key she will sub-share under.
pub fn session_keys(sim: &mut Sim) -> Result<SessionKeys> {
    let m = sim.params.m();
    let n = sim.n();
    let mut k = Vec::with_capacity(n);
    for i in 0..n {
        let owner = PlayerId(i as u32 + 1);
        let sign = keygen(sim.zp, m, &mut sim.rng);
        k.push(sim.ttp.register_keys(owner, sign, Vec::new()));
    }
    Ok(SessionKeys { k })
}

/// A successfully shared secret. Player j holds sub-coordinate j of every
/// coordinate of the tree; nobody holds a whole coordinate.
#[derive(Debug)]
pub struct VqssShared {
    pub dealer: PlayerId,
    pub tree: RegView,
    /// Set when the secret was [`SecretSpec::EprHalf`].
    pub epr_external: Option<Qudit>,
}

#[derive(Debug)]
pub enum VqssOutcome {
    Shared(VqssShared),
    DealerFaulty,
}

#[derive(Debug)]
pub enum VqssRecon {
    Secret(Qudit),
    /// The reconstructor's own tree failed its checks, so the protocol
    /// cannot deliver the secret to her.
    ReconstructorFaulty,
}

/// Everything steps 1-9 leave behind: a de-authenticated tree holding one
/// half of a logical EPR pair, and the bare other half at the dealer.
struct TreePrep {
    tree: RegView,
    epr_local: Qudit,
}

enum PrepOutcome {
    Ready(TreePrep),
    DealerFaulty,
}

/// Physical qudits player j holds of a tree register, in carrier order.
/// Works on both tree shapes: with the dealer authentication layer still
/// present, and after it has been stripped.
fn player_holdings(tree: &RegView, j: usize) -> Result<Vec<Qudit>> {
    let mut out = Vec::new();
    for coord in slots_of(tree)? {
        match coord {
            RegView::Auth { slots, .. } => {
                for carrier in slots {
                    out.extend(slots_of(carrier)?[j].leaves());
                }
            }
            RegView::Code { slots } => out.extend(slots[j].leaves()),
            RegView::Bare(_) => return Err(Error::protocol("tree coordinate is bare")),
        }
    }
    Ok(out)
}

/// Step 1-3 for one register: the dealer deals authenticated coordinates
/// and every receiver sub-shares each carrier under her session key.
fn build_tree(
    sim: &mut Sim,
    keys: &SessionKeys,
    key_dealer: KeyId,
    dealer: PlayerId,
    ridx: usize,
) -> Result<RegView> {
    let n = sim.n();
    let mut value = 0;
    if sim.script.is_corrupt(dealer) {
        let h = Hook::new("vqss.deal", dealer).reg(ridx);
        value = sim.script.plant_any(h).unwrap_or(0);
    }
    let q = sim.bare(value);
    let coords = outer_encode(&mut sim.eng, &sim.codes, q);
    let mut top_slots = Vec::with_capacity(n);
    for (i, cq) in coords.into_iter().enumerate() {
        let holder = PlayerId(i as u32 + 1);
        let av = sim.encode_qudit_auth(dealer, key_dealer, cq)?;
        let h = Hook::new("vqss.deal", dealer)
            .peer(holder)
            .reg(ridx)
            .coord(i);
        sim.send_quantum(h, av.leaves());
        let (key, reg, carriers) = match av {
            RegView::Auth { key, reg, slots } => (key, reg, slots),
            _ => return Err(Error::protocol("authentication did not produce a register")),
        };
        // The holder spreads each carrier over all players.
        let mut shared_carriers = Vec::with_capacity(carriers.len());
        for carrier in carriers {
            let cq = match carrier {
                RegView::Bare(q) => q,
                _ => return Err(Error::protocol("carrier is not bare before sub-sharing")),
            };
            let sub_coords = outer_encode(&mut sim.eng, &sim.codes, cq);
            let mut sub_slots = Vec::with_capacity(n);
            for sq in sub_coords {
                sub_slots.push(sim.encode_qudit_auth(holder, keys.k[i], sq)?);
            }
            shared_carriers.push(RegView::Code { slots: sub_slots });
        }
        for j in 0..n {
            let peer = PlayerId(j as u32 + 1);
            let mut bundle = Vec::new();
            for carrier in &shared_carriers {
                bundle.extend(slots_of(carrier)?[j].leaves());
            }
            let h = Hook::new("vqss.subdeal", holder)
                .peer(peer)
                .reg(ridx)
                .coord(i);
            sim.send_quantum(h, bundle);
        }
        top_slots.push(RegView::Auth {
            key,
            reg,
            slots: shared_carriers,
        });
    }
    Ok(RegView::Code { slots: top_slots })
}

/// Open one sub-shared qudit by public sub-words. Rejections are erasures,
/// but more than t of them under one sub-sharing can only mean the
/// sub-dealer misregistered her keys, so blame moves to her; likewise when
/// the surviving sub-shares are inconsistent. Returns the opened value, or
/// None when this carrier is unreadable.
fn open_carrier_value(
    sim: &mut Sim,
    carrier: &RegView,
    owner: PlayerId,
    step: &str,
    channel: &str,
    tag: usize,
) -> Result<Option<u64>> {
    let t = sim.params.t;
    let p = sim.p();
    let zp = sim.zp;
    let subs = slots_of(carrier)?.to_vec();
    let mut sub: Vec<(u64, u64)> = Vec::new();
    let mut rejected: Vec<PlayerId> = Vec::new();
    for (j, sv) in subs.iter().enumerate() {
        let pj = PlayerId(j as u32 + 1);
        let word = sim.measure_register(sv);
        let h = Hook::new(step, pj).coord(tag * subs.len() + j);
        let Some(word) = sim.submit_word(h, word) else {
            continue;
        };
        for &sym in &word {
            sim.observe(channel, p, Visibility::Public, sym);
        }
        let rr = sv
            .rref()
            .ok_or_else(|| Error::protocol("sub-share has no key record"))?;
        match sim.ttp.decode_measurement(rr, &word) {
            Ok(v) => sub.push((j as u64 + 1, v)),
            Err(_) => rejected.push(pj),
        }
    }
    if rejected.len() > t {
        if !sim.faulty.contains(&owner) {
            sim.declare_faulty(owner, "vqss.subshare");
        }
        return Ok(None);
    }
    for pj in rejected {
        if !sim.faulty.contains(&pj) {
            sim.declare_faulty(pj, "vqss.subword");
        }
    }
    if sub.len() < t + 1 {
        sim.event("vqss.carrier_missing", Some(owner), None, vec![tag as u64]);
        return Ok(None);
    }
    match interpolate(zp, &sub, t) {
        Ok(f) => Ok(Some(f.eval(zp, 0))),
        Err(_) => {
            if !sim.faulty.contains(&owner) {
                sim.declare_faulty(owner, "vqss.subshare");
            }
            Ok(None)
        }
    }
}

/// Publicly open one full tree register during the checks. Unreadable
/// coordinates are skipped with their owner already blamed; a coordinate
/// whose carrier word fails the dealer-key decode blames its owner too.
/// Returns false when the surviving values are inconsistent with a
/// degree-t polynomial or (standard basis) have a nonzero free term.
fn open_checked_register(
    sim: &mut Sim,
    tree: &RegView,
    reg_idx: usize,
    fourier: bool,
) -> Result<bool> {
    let n = sim.n();
    let t = sim.params.t;
    let zp = sim.zp;
    let coords = slots_of(tree)?.to_vec();
    let mut top: Vec<(u64, u64)> = Vec::new();
    for (i, coord) in coords.iter().enumerate() {
        let owner = PlayerId(i as u32 + 1);
        let (top_rref, carriers) = match coord {
            RegView::Auth { key, reg, slots } => (RegRef { key: *key, reg: *reg }, slots.clone()),
            _ => return Err(Error::protocol("checked register lost its top layer")),
        };
        let mut word = Vec::with_capacity(carriers.len());
        let mut readable = true;
        for (c, carrier) in carriers.iter().enumerate() {
            let tag = (reg_idx * n + i) * carriers.len() + c;
            match open_carrier_value(sim, carrier, owner, "open.vqss", "vqss.word", tag)? {
                Some(v) => word.push(v),
                None => {
                    readable = false;
                    break;
                }
            }
        }
        if !readable {
            continue;
        }
        match sim.ttp.decode_measurement(top_rref, &word) {
            Ok(v) => top.push((i as u64 + 1, v)),
            Err(_) => {
                if !sim.faulty.contains(&owner) {
                    sim.declare_faulty(owner, "vqss.badshare");
                }
            }
        }
    }
    if top.len() < t + 1 {
        return Err(Error::protocol(
            "fewer than t+1 readable coordinates at a tree check",
        ));
    }
    match interpolate(zp, &top, t) {
        Err(_) => Ok(false),
        Ok(f) => Ok(fourier || f.eval(zp, 0) == 0),
    }
}

/// Step 9: the dealer key is published and its authentication unwound with
/// logical operations, carrier by carrier. Coefficient and syndrome
/// carriers are then opened publicly and must read zero; a readable
/// nonzero one blames the coordinate owner, who is the only party able to
/// move it once the checks have passed. Returns the slimmed tree.
fn deauthenticate_top(sim: &mut Sim, key_dealer: KeyId, tree: &RegView) -> Result<RegView> {
    let d = sim.params.d;
    let p = sim.p();
    let zp = sim.zp;
    sim.ttp.authorize_reveal(key_dealer);
    let (sign, pads) = sim.ttp.reveal_key(key_dealer)?;
    for &ki in &sign.k {
        let bit = if ki == 1 { 0 } else { 1 };
        sim.observe("reveal.sign", 2, Visibility::Public, bit);
    }
    let dec_ops = sim.codes.auth.decode_ops(&sign);
    let coords = slots_of(tree)?.to_vec();
    let mut kept = Vec::with_capacity(coords.len());
    for (i, coord) in coords.iter().enumerate() {
        let owner = PlayerId(i as u32 + 1);
        let (reg, carriers) = match coord {
            RegView::Auth { reg, slots, .. } => (*reg, slots.clone()),
            _ => return Err(Error::protocol("tree coordinate lost its top layer")),
        };
        let pad = &pads[reg];
        for &(a, b) in &pad.pairs {
            sim.observe("reveal.pad", p, Visibility::Public, a);
            sim.observe("reveal.pad", p, Visibility::Public, b);
        }
        for (c, carrier) in carriers.iter().enumerate() {
            let (sh, ph) = pad.pairs[c];
            sim.lx(carrier, zp.neg(sh))?;
            sim.lz(carrier, zp.neg(ph))?;
        }
        for op in &dec_ops {
            match *op {
                LinOp::AddMul { src, dst, k } => sim.laddmul(&carriers[src], &carriers[dst], k)?,
                LinOp::Scale { q, k } => sim.lmult(&carriers[q], k)?,
            }
        }
        for carrier in &carriers[1..=d] {
            sim.lf_inv(carrier)?;
        }
        for (c, carrier) in carriers.iter().enumerate().skip(1) {
            let tag = i * carriers.len() + c;
            match open_carrier_value(sim, carrier, owner, "open.deauth", "vqss.word", tag)? {
                Some(0) | None => {}
                Some(_) => {
                    if !sim.faulty.contains(&owner) {
                        sim.declare_faulty(owner, "vqss.deauth");
                    }
                }
            }
        }
        kept.push(carriers[0].clone());
    }
    sim.ttp.revoke(key_dealer)?;
    Ok(RegView::Code { slots: kept })
}

/// Steps 1-9: deal and check 2s+2 tree registers, fold the last two into a
/// logical EPR pair, condense one half to a bare qudit at the dealer, and
/// strip the dealer authentication from the other.
fn vqss_prepare(sim: &mut Sim, keys: &SessionKeys, dealer: PlayerId) -> Result<PrepOutcome> {
    let n = sim.n();
    let t = sim.params.t;
    let s = sim.params.s;
    let m = sim.params.m();
    let sign = keygen(sim.zp, m, &mut sim.rng);
    let key_dealer = sim.ttp.register_keys(dealer, sign, Vec::new());

    let total = 2 * s + 2;
    let mut regs = Vec::with_capacity(total);
    for ridx in 0..total {
        regs.push(build_tree(sim, keys, key_dealer, dealer, ridx)?);
    }
    // Corrupted holders may attack what they received before any check.
    for (ridx, rg) in regs.iter().enumerate() {
        for j in 0..n {
            let holder = PlayerId(j as u32 + 1);
            if !sim.script.is_corrupt(holder) {
                continue;
            }
            let held = player_holdings(rg, j)?;
            sim.touch_held(Hook::new("hold.precheck", holder).reg(ridx).coord(j), &held);
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
            let ok = open_checked_register(sim, &regs[open_idx], open_idx, basis == 1)?;
            if sim.faulty.contains(&dealer) {
                return Ok(PrepOutcome::DealerFaulty);
            }
            if !ok {
                sim.declare_faulty(dealer, "vqss.inconsistent");
                return Ok(PrepOutcome::DealerFaulty);
            }
            if basis == 1 {
                for rg in &regs[open_idx + 1..] {
                    sim.lf_inv(rg)?;
                }
            }
            sim.next_round();
        }
    }

    // Step 5: logical EPR pair from the two unopened trees.
    let a_tree = regs[total - 2].clone();
    let b_tree = regs[total - 1].clone();
    sim.lf(&a_tree)?;
    sim.lsum(&a_tree, &b_tree)?;

    // Steps 6-7: sub-shares of the b tree travel back to their coordinate
    // owners, who strip their own sub-authentication.
    let b_coords = slots_of(&b_tree)?.to_vec();
    let mut collected: Vec<(u64, Vec<Qudit>)> = Vec::new();
    for (i, coord) in b_coords.iter().enumerate() {
        let owner = PlayerId(i as u32 + 1);
        let carriers = match coord {
            RegView::Auth { slots, .. } => slots.clone(),
            _ => return Err(Error::protocol("tree coordinate lost its top layer")),
        };
        let mut arrived = vec![false; n];
        for j in 0..n {
            let pj = PlayerId(j as u32 + 1);
            let mut bundle = Vec::new();
            for carrier in &carriers {
                bundle.extend(slots_of(carrier)?[j].leaves());
            }
            let h = Hook::new("vqss.route", pj)
                .peer(owner)
                .reg(total - 1)
                .coord(i);
            match sim.send_quantum(h, bundle) {
                Delivery::Handles(_) => arrived[j] = true,
                Delivery::Withheld => {
                    sim.event("vqss.route_missing", Some(pj), Some(owner), vec![i as u64 + 1]);
                }
            }
        }
        let sub_sign = sim.ttp.sign_key(keys.k[i])?;
        let mut carrier_data = Vec::with_capacity(carriers.len());
        let mut readable = true;
        for (c, carrier) in carriers.iter().enumerate() {
            let mut survivors: Vec<(u64, Qudit)> = Vec::new();
            for (j, sv) in slots_of(carrier)?.iter().enumerate() {
                if !arrived[j] {
                    continue;
                }
                let rr = sv
                    .rref()
                    .ok_or_else(|| Error::protocol("sub-share has no key record"))?;
                let pad = sim.ttp.current_pad(rr)?;
                let out = auth_verify_decode(
                    &mut sim.eng,
                    &sim.codes.auth,
                    &sub_sign,
                    &pad,
                    &sv.leaves(),
                    &mut sim.rng,
                );
                if out.accepted {
                    survivors.push((j as u64 + 1, out.data));
                } else {
                    sim.event(
                        "vqss.route_reject",
                        Some(PlayerId(j as u32 + 1)),
                        Some(owner),
                        vec![i as u64 + 1, c as u64],
                    );
                }
            }
            if survivors.len() < t + 1 {
                readable = false;
                break;
            }
            let dec = outer_decode_erasure(&mut sim.eng, &sim.codes, &survivors)?;
            let (cq, syn) = dec.pick(&mut sim.eng, &mut sim.rng)?;
            if syn.iter().any(|&v| v != 0) {
                sim.event("vqss.route_syndrome", None, Some(owner), vec![i as u64 + 1, c as u64]);
            }
            carrier_data.push(cq);
        }
        if !readable {
            // The owner cannot reassemble her share and says so; the dealer
            // treats her coordinate as an erasure.
            sim.event("vqss.coordinate_missing", Some(owner), None, vec![i as u64 + 1]);
            continue;
        }
        let h = Hook::new("vqss.collect", owner)
            .peer(dealer)
            .reg(total - 1)
            .coord(i);
        match sim.send_quantum(h, carrier_data.clone()) {
            Delivery::Handles(_) => collected.push((i as u64 + 1, carrier_data)),
            Delivery::Withheld => {
                sim.event("vqss.collect_missing", Some(owner), Some(dealer), vec![i as u64 + 1]);
            }
        }
    }

    // Step 8: the dealer strips his own authentication and the outer code.
    let dealer_sign = sim.ttp.sign_key(key_dealer)?;
    let mut survivors: Vec<(u64, Qudit)> = Vec::new();
    for (pt, carrier_qs) in &collected {
        let i = (*pt - 1) as usize;
        let rr = match &b_coords[i] {
            RegView::Auth { key, reg, .. } => RegRef { key: *key, reg: *reg },
            _ => return Err(Error::protocol("tree coordinate lost its top layer")),
        };
        let pad = sim.ttp.current_pad(rr)?;
        let out = auth_verify_decode(
            &mut sim.eng,
            &sim.codes.auth,
            &dealer_sign,
            &pad,
            carrier_qs,
            &mut sim.rng,
        );
        if out.accepted {
            survivors.push((*pt, out.data));
        } else {
            let mut vals = vec![*pt];
            vals.extend(out.syndromes.iter().copied());
            sim.event("vqss.collect_reject", None, Some(dealer), vals);
        }
    }
    if survivors.len() < t + 1 {
        return Err(Error::protocol(
            "fewer than t+1 coordinates reached the dealer",
        ));
    }
    let dec = outer_decode_erasure(&mut sim.eng, &sim.codes, &survivors)?;
    let (epr_local, syn) = dec.pick(&mut sim.eng, &mut sim.rng)?;
    if syn.iter().any(|&v| v != 0) {
        sim.declare_faulty(dealer, "vqss.epr_syndrome");
        return Ok(PrepOutcome::DealerFaulty);
    }

    // Step 9 on the kept tree.
    let tree = deauthenticate_top(sim, key_dealer, &a_tree)?;
    if sim.faulty.contains(&dealer) {
        return Ok(PrepOutcome::DealerFaulty);
    }
    Ok(PrepOutcome::Ready(TreePrep { tree, epr_local }))
}

/// Share a secret verifiably. The returned tree responds to the logical
/// gate helpers, so shared secrets can be computed on in place.
pub fn vqss_share(
    sim: &mut Sim,
    keys: &SessionKeys,
    dealer: PlayerId,
    secret: SecretSpec,
) -> Result<VqssOutcome> {
    let p = sim.p();
    let prep = match vqss_prepare(sim, keys, dealer)? {
        PrepOutcome::Ready(prep) => prep,
        PrepOutcome::DealerFaulty => return Ok(VqssOutcome::DealerFaulty),
    };

    // Step 10: teleport the secret through the pair.
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
    sim.eng.sum(sigma, prep.epr_local);
    sim.eng.fourier(sigma);
    let u = sim.eng.measure(sigma, &mut sim.rng);
    let w = sim.eng.measure(prep.epr_local, &mut sim.rng);
    sim.event("vqss.bell", Some(dealer), None, vec![u, w]);
    sim.observe("bell", p, Visibility::Public, u);
    sim.observe("bell", p, Visibility::Public, w);
    sim.lneg(&prep.tree)?;
    sim.lx(&prep.tree, w)?;
    sim.lz(&prep.tree, (p - u) % p)?;
    sim.next_round();

    Ok(VqssOutcome::Shared(VqssShared {
        dealer,
        tree: prep.tree,
        epr_external: external,
    }))
}

/// Publicly open a de-authenticated tree to a classical value. Carriers
/// that cannot be read become erasures with blame already assigned by the
/// sub-open; the survivors must agree on a degree-t polynomial, which they
/// always do once fewer than t+1 of them can have been moved.
fn open_tree_value(sim: &mut Sim, tree: &RegView, label: &str) -> Result<u64> {
    let t = sim.params.t;
    let zp = sim.zp;
    let coords = slots_of(tree)?.to_vec();
    let mut top: Vec<(u64, u64)> = Vec::new();
    for (i, coord) in coords.iter().enumerate() {
        let owner = PlayerId(i as u32 + 1);
        if let Some(v) =
            open_carrier_value(sim, coord, owner, "open.reconstruct", "recon.word", i)?
        {
            top.push((i as u64 + 1, v));
        }
    }
    if top.len() < t + 1 {
        return Err(Error::protocol(
            "fewer than t+1 coordinates survived the opening",
        ));
    }
    let f = interpolate(zp, &top, t)
        .map_err(|_| Error::protocol("surviving coordinates disagree at an opening"))?;
    let v = f.eval(zp, 0);
    sim.event(&format!("open.{label}"), None, None, vec![v]);
    Ok(v)
}

/// Reconstruction toward a single receiver: she runs the sharing protocol
/// up to the teleportation step to spread her own EPR half, then everyone
/// performs the logical Bell measurement between the stored tree and hers,
/// leaving the secret on her bare half after public corrections.
pub fn vqss_reconstruct(
    sim: &mut Sim,
    keys: &SessionKeys,
    shared: &VqssShared,
    recon: PlayerId,
) -> Result<VqssRecon> {
    let n = sim.n();
    let p = sim.p();

    // Corrupted holders act on their stored sub-shares first.
    for j in 0..n {
        let pj = PlayerId(j as u32 + 1);
        if !sim.script.is_corrupt(pj) {
            continue;
        }
        let held = player_holdings(&shared.tree, j)?;
        sim.touch_held(Hook::new("hold.postshare", pj).coord(j), &held);
        if pj == shared.dealer {
            if let Some(delta) = sim.script.dealer_shift(pj) {
                // The dealer knows his own sub-sharing key, so he can move
                // his sub-share logically without tripping authentication;
                // the sub-shares he does not hold still pin his coordinate.
                let sign = sim.ttp.sign_key(keys.k[j])?;
                let coords = slots_of(&shared.tree)?;
                let own = slots_of(&coords[j])?[j].leaves();
                for (c, &q) in own.iter().enumerate() {
                    let shift = sim.zp.mul(sign.k[c], delta);
                    sim.eng.pauli(&PauliWord::x(sim.zp, q, shift));
                }
                sim.event("hold.keyshift", Some(pj), None, vec![delta]);
            }
        }
    }

    let prep = match vqss_prepare(sim, keys, recon)? {
        PrepOutcome::Ready(prep) => prep,
        PrepOutcome::DealerFaulty => return Ok(VqssRecon::ReconstructorFaulty),
    };

    // Logical Bell measurement between the stored tree and the fresh one.
    sim.lsum(&shared.tree, &prep.tree)?;
    sim.lf(&shared.tree)?;
    let u = open_tree_value(sim, &shared.tree, "bell_u")?;
    let w = open_tree_value(sim, &prep.tree, "bell_w")?;
    sim.event("vqss.recon_bell", Some(recon), None, vec![u, w]);
    sim.observe("bell", p, Visibility::Public, u);
    sim.observe("bell", p, Visibility::Public, w);

    let b = prep.epr_local;
    sim.eng.mult(b, p - 1);
    if w != 0 {
        sim.eng.pauli(&PauliWord::x(sim.zp, b, w));
    }
    if u != 0 {
        sim.eng.pauli(&PauliWord::z(sim.zp, b, p - u));
    }
    sim.next_round();
    Ok(VqssRecon::Secret(b))
}
