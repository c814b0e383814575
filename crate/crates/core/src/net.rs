//! Simulated network: players, rounds, channels, transcripts.
//!
//! Channels are noiseless and authenticated-secure; the only tampering
//! surface is a corrupted endpoint, driven by the compiled adversary
//! script. The simulator owns both randomness streams (protocol
//! randomness and measurement-outcome sampling), the stabilizer engine,
//! the trusted third party, the public faulty set, the line-delimited
//! transcript, and the observation channel used by the leakage audit.

use crate::engine::{Engine, PauliWord, Qudit};
use crate::field::Zp;
use crate::params::Params;
use crate::script::{Hook, Script, ScriptSpec};
use crate::stab::StabEngine;
use crate::ttp::{KeyId, Ttp};
use crate::views::{self, Codes, RegView};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::collections::BTreeSet;

/// 1-based player index; 0 is never a valid player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PlayerId(pub u32);

impl std::fmt::Display for PlayerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P{}", self.0)
    }
}

/// Who gets to see an observed value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Visibility {
    Public,
    To(PlayerId),
}

/// One transcript line: flat on purpose so serialization order is
/// obvious and byte-stable.
#[derive(Clone, Debug, Serialize)]
pub struct Event {
    pub round: u32,
    pub tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub to: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub vals: Vec<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn push(&mut self, e: Event) {
        self.events.push(e);
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn count_tag(&self, prefix: &str) -> usize {
        self.events.iter().filter(|e| e.tag.starts_with(prefix)).count()
    }
}

/// A value that crossed a channel some player can see, recorded for the
/// uniform-leakage audit. `modulus` is the size of the domain the value
/// is claimed to be uniform over.
#[derive(Clone, Debug, Serialize)]
pub struct Observation {
    pub channel: String,
    pub modulus: u64,
    pub vis: Visibility,
    pub value: u64,
}

/// Result of a quantum transfer.
#[derive(Clone, Debug)]
pub enum Delivery {
    Handles(Vec<Qudit>),
    Withheld,
}

impl Delivery {
    pub fn handles(self) -> Option<Vec<Qudit>> {
        match self {
            Delivery::Handles(h) => Some(h),
            Delivery::Withheld => None,
        }
    }
}

/// Stable seed-mixing for deriving per-trial and per-stream seeds.
pub fn mix(seed: u64, tweak: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(tweak.wrapping_mul(0xd1b5_4a32_d192_ed03));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Cloning forks the whole world (engine, TTP, randomness); tests use the
/// fork to show a shared secret is determined before reconstruction starts.
#[derive(Clone)]
pub struct Sim {
    pub params: Params,
    pub zp: Zp,
    pub codes: Codes,
    pub eng: StabEngine,
    pub ttp: Ttp,
    pub script: Script,
    pub round: u32,
    /// Stream A: protocol randomness (keys, pads, challenges, attacks).
    pub rng: ChaCha12Rng,
    /// Stream B: measurement outcome sampling, kept separate so outcome
    /// draws line up between a protocol run and its reference run.
    pub rng_out: ChaCha12Rng,
    pub transcript: Transcript,
    pub observations: Vec<Observation>,
    pub faulty: BTreeSet<PlayerId>,
}

impl Sim {
    pub fn new(params: &Params, spec: ScriptSpec, seed: u64) -> Result<Sim> {
        params.validate()?;
        let zp = Zp::new(params.p);
        let codes = Codes::new(params)?;
        let script = Script::compile(spec, params.n, params.t)?;
        Ok(Sim {
            params: *params,
            zp,
            eng: StabEngine::new_zeros(params.p, 0),
            ttp: Ttp::new(codes.auth.clone()),
            codes,
            script,
            round: 0,
            rng: ChaCha12Rng::seed_from_u64(mix(seed, 0xa11c)),
            rng_out: ChaCha12Rng::seed_from_u64(mix(seed, 0xb0bb)),
            transcript: Transcript::default(),
            observations: Vec::new(),
            faulty: BTreeSet::new(),
        })
    }

    pub fn p(&self) -> u64 {
        self.zp.p
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        (1..=self.params.n as u32).map(PlayerId)
    }

    pub fn honest(&self) -> Vec<PlayerId> {
        self.players().filter(|p| !self.script.is_corrupt(*p)).collect()
    }

    pub fn next_round(&mut self) {
        self.round += 1;
    }

    pub fn event(&mut self, tag: &str, from: Option<PlayerId>, to: Option<PlayerId>, vals: Vec<u64>) {
        self.transcript.push(Event {
            round: self.round,
            tag: tag.to_string(),
            from: from.map(|p| p.0),
            to: to.map(|p| p.0),
            vals,
        });
    }

    /// Record a channel value for the leakage audit.
    pub fn observe(&mut self, channel: &str, modulus: u64, vis: Visibility, value: u64) {
        debug_assert!(value < modulus);
        self.observations.push(Observation {
            channel: channel.to_string(),
            modulus,
            vis,
            value,
        });
    }

    /// Observations a corrupted player could see in this run.
    pub fn corrupt_view(&self) -> Vec<&Observation> {
        self.observations
            .iter()
            .filter(|o| match o.vis {
                Visibility::Public => !self.script.corrupt.is_empty(),
                Visibility::To(p) => self.script.is_corrupt(p),
            })
            .collect()
    }

    /// Quantum transfer with the sender's scripted misbehavior applied:
    /// withholding swallows the register, a scripted Pauli hits one
    /// qudit in transit.
    pub fn send_quantum(&mut self, h: Hook, handles: Vec<Qudit>) -> Delivery {
        if self.script.withholds(h) {
            self.event(&format!("{}.withheld", h.step), Some(h.actor), h.peer, vec![]);
            return Delivery::Withheld;
        }
        if let Some((q, x, z)) = self.script.pauli_attack(h) {
            if q < handles.len() && (x != 0 || z != 0) {
                let w = PauliWord::single(self.zp, handles[q], x, z, 0);
                self.eng.pauli(&w);
                self.event(&format!("{}.tamper", h.step), Some(h.actor), h.peer, vec![
                    q as u64, x, z,
                ]);
            }
        }
        self.event(h.step, Some(h.actor), h.peer, vec![handles.len() as u64]);
        Delivery::Handles(handles)
    }

    /// Apply any scripted attack to registers a player already holds.
    pub fn touch_held(&mut self, h: Hook, handles: &[Qudit]) {
        if let Some((q, x, z)) = self.script.pauli_attack(h) {
            if q < handles.len() && (x != 0 || z != 0) {
                let w = PauliWord::single(self.zp, handles[q], x, z, 0);
                self.eng.pauli(&w);
                self.event(&format!("{}.tamper", h.step), Some(h.actor), None, vec![
                    q as u64, x, z,
                ]);
            }
        }
    }

    /// A player's classical submission, filtered through refusal and
    /// lying scripts. `None` means nothing arrived.
    pub fn submit_word(&mut self, h: Hook, word: Vec<u64>) -> Option<Vec<u64>> {
        if self.script.withholds(h) {
            self.event(&format!("{}.withheld", h.step), Some(h.actor), None, vec![]);
            return None;
        }
        let p = self.zp.p;
        let out = match self.script.lie(h, &word, p) {
            Some(w2) => {
                self.event(&format!("{}.lie", h.step), Some(h.actor), None, w2.clone());
                w2
            }
            None => word,
        };
        self.event(h.step, Some(h.actor), None, out.clone());
        Some(out)
    }

    /// Whether this player complains, honoring complaint-flood scripts.
    pub fn complaint(&mut self, player: PlayerId, honest_complaint: bool) -> bool {
        let c = self.script.complains(player, honest_complaint);
        if c {
            self.event("complain", Some(player), None, vec![]);
        }
        c
    }

    pub fn declare_faulty(&mut self, player: PlayerId, why: &str) {
        self.faulty.insert(player);
        self.event(&format!("faulty.{why}"), None, Some(player), vec![]);
    }

    /// An honest player was publicly flagged: the soundness failure the
    /// invariant suite counts.
    pub fn honest_flagged(&self) -> bool {
        self.faulty.iter().any(|p| !self.script.is_corrupt(*p))
    }

    // Logical operations on shared registers, with pad keys tracked by
    // the TTP. Thin delegation so protocol code reads linearly.

    pub fn lf(&mut self, v: &RegView) -> Result<()> {
        views::lf(&mut self.eng, &mut self.ttp, &self.codes, v)
    }

    pub fn lf_inv(&mut self, v: &RegView) -> Result<()> {
        views::lf_inv(&mut self.eng, &mut self.ttp, &self.codes, v)
    }

    pub fn lmult(&mut self, v: &RegView, c: u64) -> Result<()> {
        views::lmult(&mut self.eng, &mut self.ttp, &self.codes, v, c)
    }

    pub fn lneg(&mut self, v: &RegView) -> Result<()> {
        views::lneg(&mut self.eng, &mut self.ttp, &self.codes, v)
    }

    pub fn lsum(&mut self, a: &RegView, b: &RegView) -> Result<()> {
        views::lsum(&mut self.eng, &mut self.ttp, &self.codes, a, b)
    }

    pub fn laddmul(&mut self, a: &RegView, b: &RegView, c: u64) -> Result<()> {
        views::laddmul(&mut self.eng, &mut self.ttp, &self.codes, a, b, c)
    }

    pub fn lx(&mut self, v: &RegView, u: u64) -> Result<()> {
        views::lx(&mut self.eng, &mut self.ttp, &self.codes, v, u)
    }

    pub fn lz(&mut self, v: &RegView, w: u64) -> Result<()> {
        views::lz(&mut self.eng, &mut self.ttp, &self.codes, v, w)
    }

    /// Logical measurement of a view, consuming exactly one outcome draw
    /// whether or not the value is determined.
    pub fn logical_open(&mut self, v: &RegView) -> Result<u64> {
        let u: f64 = self.rng_out.gen();
        views::logical_open(&mut self.eng, &self.ttp, &self.codes, v, u)
    }

    /// Same opening, but driven by protocol randomness. Used for opens that
    /// are internal bookkeeping rather than sampled protocol outputs, so the
    /// output stream stays aligned with reference simulations.
    pub fn logical_open_internal(&mut self, v: &RegView) -> Result<u64> {
        let u: f64 = self.rng.gen();
        views::logical_open(&mut self.eng, &self.ttp, &self.codes, v, u)
    }

    /// Fresh bare qudit in basis state |value>.
    pub fn bare(&mut self, value: u64) -> Qudit {
        let q = self.eng.alloc(1)[0];
        let value = value % self.zp.p;
        if value != 0 {
            self.eng.pauli(&PauliWord::x(self.zp, q, value));
        }
        q
    }

    /// Authenticate |value> under an existing key record, honoring the
    /// owner's pad-lie script if one is active.
    pub fn encode_value_auth(&mut self, owner: PlayerId, key: KeyId, value: u64) -> Result<RegView> {
        let q = self.bare(value);
        let lie = self.script.pad_lie(owner);
        views::auth_encode_view(&mut self.eng, &mut self.ttp, key, q, &mut self.rng, lie)
    }

    /// Authenticate an arbitrary bare qudit under an existing key record.
    pub fn encode_qudit_auth(&mut self, owner: PlayerId, key: KeyId, q: Qudit) -> Result<RegView> {
        let lie = self.script.pad_lie(owner);
        views::auth_encode_view(&mut self.eng, &mut self.ttp, key, q, &mut self.rng, lie)
    }

    /// Measure every physical qudit of a view in slot order, using the
    /// protocol randomness stream.
    pub fn measure_register(&mut self, v: &RegView) -> Vec<u64> {
        v.leaves()
            .into_iter()
            .map(|q| self.eng.measure(q, &mut self.rng))
            .collect()
    }
}
