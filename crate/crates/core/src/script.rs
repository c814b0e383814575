//! Scripted adversary strategies.
//!
//! The adversary is a named strategy with parameters, not an adaptive
//! searcher: each script covers one representative threat the protocol
//! suite must survive (tamper in transit, bad dealer data, substitution,
//! withholding, complaint flooding, key lies, post-sharing tampering).
//! Scripts only ever act through corrupted players, and the corruption
//! budget is validated against t before a simulation starts.

use crate::net::PlayerId;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ScriptSpec {
    /// Empty script: everyone follows the protocol.
    Honest,
    /// A corrupted sender applies a Pauli to one qudit of an outbound
    /// register at the step matching `step`. Optional filters narrow the
    /// attack to one recipient or one register index.
    TamperInTransit {
        player: u32,
        step: String,
        #[serde(default)]
        to: Option<u32>,
        #[serde(default)]
        reg: Option<usize>,
        qudit: usize,
        x: u64,
        z: u64,
    },
    /// Corrupted dealer encodes |plant> instead of |0> in the listed
    /// registers bound for the listed target players.
    BadDealerZeros {
        dealer: u32,
        targets: Vec<u32>,
        registers: Vec<usize>,
        plant: u64,
    },
    /// Corrupted dealer uses his key knowledge to shift the logical
    /// value of his own held share before submitting it, keeping it
    /// authenticated but off the share polynomial.
    DealerShiftOwnShare { dealer: u32, delta: u64 },
    /// Corrupted player Pauli-tampers her own held share before the
    /// checks or the reconstruction open it.
    ShareSubstitute { player: u32, qudit: usize, x: u64, z: u64 },
    /// Corrupted player sends nothing when shares are collected.
    WithholdAtReconstruct { player: u32 },
    /// Corrupted player never submits measurement words at the step
    /// matching `step`.
    RefuseOpen { player: u32, step: String },
    /// Corrupted player complains about the dealer regardless of what
    /// she received.
    ComplaintFlood { player: u32 },
    /// Corrupted player registers pad keys offset from the pads she
    /// really applied, corrupting her own authenticated data.
    KeyLie { player: u32, ds: u64, dt: u64 },
    /// Corrupted player submits a shifted first symbol at open steps.
    LieAtOpen { player: u32, delta: u64 },
    /// Corrupted player Pauli-tampers one qudit of her tree holdings
    /// after sharing completes.
    PostShareTamper { player: u32, qudit: usize, x: u64, z: u64 },
    /// Corrupted Toffoli dealer: a per-mille fraction of her claimed
    /// Toffoli states carries ab + delta in the product register.
    ToffoliCheat {
        dealer: u32,
        bad_per_mille: u32,
        delta: u64,
    },
    /// Corrupted Toffoli dealer sends the fixed basis state |a, b, ab>
    /// instead of the superposition; survives the computational check.
    ToffoliProductState { dealer: u32, a: u64, b: u64 },
    /// The reconstructor is corrupted; she follows the protocol but the
    /// leakage audit watches everything she sees.
    CorruptReconstructor { player: u32 },
}

impl ScriptSpec {
    pub fn corrupt_set(&self) -> BTreeSet<PlayerId> {
        let one = |p: &u32| [PlayerId(*p)].into_iter().collect();
        match self {
            ScriptSpec::Honest => BTreeSet::new(),
            ScriptSpec::TamperInTransit { player, .. }
            | ScriptSpec::ShareSubstitute { player, .. }
            | ScriptSpec::WithholdAtReconstruct { player }
            | ScriptSpec::RefuseOpen { player, .. }
            | ScriptSpec::ComplaintFlood { player }
            | ScriptSpec::KeyLie { player, .. }
            | ScriptSpec::LieAtOpen { player, .. }
            | ScriptSpec::PostShareTamper { player, .. }
            | ScriptSpec::CorruptReconstructor { player } => one(player),
            ScriptSpec::BadDealerZeros { dealer, .. }
            | ScriptSpec::DealerShiftOwnShare { dealer, .. }
            | ScriptSpec::ToffoliCheat { dealer, .. }
            | ScriptSpec::ToffoliProductState { dealer, .. } => one(dealer),
        }
    }

    pub fn validate(&self, n: usize, t: usize) -> Result<()> {
        let corrupt = self.corrupt_set();
        if corrupt.len() > t {
            return Err(Error::config(format!(
                "script corrupts {} players, budget is t = {t}",
                corrupt.len()
            )));
        }
        for p in &corrupt {
            if p.0 == 0 || p.0 as usize > n {
                return Err(Error::config(format!("player index {} out of 1..={n}", p.0)));
            }
        }
        if let ScriptSpec::BadDealerZeros { targets, plant, .. } = self {
            for tgt in targets {
                if *tgt == 0 || *tgt as usize > n {
                    return Err(Error::config("bad-dealer target out of range"));
                }
            }
            if *plant == 0 {
                return Err(Error::config("bad-dealer plant must be nonzero"));
            }
        }
        if let ScriptSpec::ToffoliCheat {
            bad_per_mille,
            delta,
            ..
        } = self
        {
            if *bad_per_mille > 1000 {
                return Err(Error::config("bad_per_mille must be at most 1000"));
            }
            if *delta == 0 {
                return Err(Error::config("toffoli-cheat delta must be nonzero"));
            }
        }
        Ok(())
    }

    /// One-line threat description for the CLI listing.
    pub fn describe(name: &str) -> Option<&'static str> {
        Some(match name {
            "honest" => "empty script, all players follow the protocol",
            "tamper_in_transit" => "corrupted sender Pauli-attacks an outbound register qudit",
            "bad_dealer_zeros" => "dealer encodes a nonzero state in selected bank registers",
            "dealer_shift_own_share" => "dealer keeps his share authenticated but off the polynomial",
            "share_substitute" => "corrupted player tampers her own share before it is checked",
            "withhold_at_reconstruct" => "corrupted player sends nothing at reconstruction",
            "refuse_open" => "corrupted player never submits measurement words at a step",
            "complaint_flood" => "corrupted player always complains about the dealer",
            "key_lie" => "corrupted player registers pads that differ from what she applied",
            "lie_at_open" => "corrupted player submits a shifted measurement word",
            "post_share_tamper" => "corrupted player attacks her tree holdings after sharing",
            "corrupt_reconstructor" => "reconstructor corrupted, used by the leakage audit",
            "toffoli_cheat" => "toffoli dealer ships ab + delta states for a fraction of the supply",
            "toffoli_product_state" => "toffoli dealer ships fixed |a, b, ab> basis states",
            _ => return None,
        })
    }

    pub fn all_names() -> &'static [&'static str] {
        &[
            "honest",
            "tamper_in_transit",
            "bad_dealer_zeros",
            "dealer_shift_own_share",
            "share_substitute",
            "withhold_at_reconstruct",
            "refuse_open",
            "complaint_flood",
            "key_lie",
            "lie_at_open",
            "post_share_tamper",
            "corrupt_reconstructor",
            "toffoli_cheat",
            "toffoli_product_state",
        ]
    }
}

/// Context handed to every adversary query: which step, who is acting,
/// who the counterpart is, and which register/coordinate indices apply.
#[derive(Clone, Copy, Debug)]
pub struct Hook<'a> {
    pub step: &'a str,
    pub actor: PlayerId,
    pub peer: Option<PlayerId>,
    pub reg: usize,
    pub coord: usize,
}

impl<'a> Hook<'a> {
    pub fn new(step: &'a str, actor: PlayerId) -> Hook<'a> {
        Hook {
            step,
            actor,
            peer: None,
            reg: 0,
            coord: 0,
        }
    }

    pub fn peer(mut self, p: PlayerId) -> Self {
        self.peer = Some(p);
        self
    }

    pub fn reg(mut self, r: usize) -> Self {
        self.reg = r;
        self
    }

    pub fn coord(mut self, c: usize) -> Self {
        self.coord = c;
        self
    }
}

/// Compiled script: the spec plus its corruption set.
#[derive(Clone, Debug)]
pub struct Script {
    pub spec: ScriptSpec,
    pub corrupt: BTreeSet<PlayerId>,
}

impl Script {
    pub fn compile(spec: ScriptSpec, n: usize, t: usize) -> Result<Script> {
        spec.validate(n, t)?;
        let corrupt = spec.corrupt_set();
        Ok(Script { spec, corrupt })
    }

    pub fn is_corrupt(&self, p: PlayerId) -> bool {
        self.corrupt.contains(&p)
    }

    /// Pauli attack on an outbound or held register at this hook point:
    /// (qudit offset, x exponent, z exponent).
    pub fn pauli_attack(&self, h: Hook) -> Option<(usize, u64, u64)> {
        match &self.spec {
            ScriptSpec::TamperInTransit {
                player,
                step,
                to,
                reg,
                qudit,
                x,
                z,
            } if PlayerId(*player) == h.actor
                && step == h.step
                && to.map_or(true, |t| h.peer == Some(PlayerId(t)))
                && reg.map_or(true, |r| r == h.reg) =>
            {
                Some((*qudit, *x, *z))
            }
            ScriptSpec::ShareSubstitute { player, qudit, x, z }
                if PlayerId(*player) == h.actor && h.step == "hold.precheck" =>
            {
                Some((*qudit, *x, *z))
            }
            ScriptSpec::PostShareTamper { player, qudit, x, z }
                if PlayerId(*player) == h.actor && h.step == "hold.postshare" =>
            {
                Some((*qudit, *x, *z))
            }
            _ => None,
        }
    }

    /// Value a corrupted dealer encodes instead of zero, if any.
    pub fn plant(&self, h: Hook) -> Option<u64> {
        match &self.spec {
            ScriptSpec::BadDealerZeros {
                dealer,
                targets,
                registers,
                plant,
            } if PlayerId(*dealer) == h.actor
                && h.peer.is_some_and(|p| targets.contains(&p.0))
                && registers.contains(&h.reg) =>
            {
                Some(*plant)
            }
            _ => None,
        }
    }

    /// Like `plant`, but matched on register index alone. Used where a planted
    /// register is dealt coordinate-wise to every player at once.
    pub fn plant_any(&self, h: Hook) -> Option<u64> {
        match &self.spec {
            ScriptSpec::BadDealerZeros {
                dealer,
                registers,
                plant,
                ..
            } if PlayerId(*dealer) == h.actor && registers.contains(&h.reg) => Some(*plant),
            _ => None,
        }
    }

    pub fn withholds(&self, h: Hook) -> bool {
        match &self.spec {
            ScriptSpec::WithholdAtReconstruct { player } => {
                PlayerId(*player) == h.actor && h.step.contains("reconstruct")
            }
            ScriptSpec::RefuseOpen { player, step } => {
                PlayerId(*player) == h.actor && step == h.step
            }
            _ => false,
        }
    }

    /// Replacement word for a submission, if the actor lies.
    pub fn lie(&self, h: Hook, word: &[u64], p: u64) -> Option<Vec<u64>> {
        match &self.spec {
            ScriptSpec::LieAtOpen { player, delta }
                if PlayerId(*player) == h.actor && h.step.starts_with("open") =>
            {
                let mut w = word.to_vec();
                if !w.is_empty() {
                    w[0] = (w[0] + delta) % p;
                }
                Some(w)
            }
            _ => None,
        }
    }

    pub fn complains(&self, actor: PlayerId, honest_complaint: bool) -> bool {
        match &self.spec {
            ScriptSpec::ComplaintFlood { player } if PlayerId(*player) == actor => true,
            _ => honest_complaint,
        }
    }

    /// Offset a corrupted player adds to the pad keys she registers,
    /// relative to the pads she really applied.
    pub fn pad_lie(&self, actor: PlayerId) -> Option<(u64, u64)> {
        match &self.spec {
            ScriptSpec::KeyLie { player, ds, dt } if PlayerId(*player) == actor => {
                Some((*ds, *dt))
            }
            _ => None,
        }
    }

    /// Logical shift a corrupted dealer applies to his own share using
    /// key knowledge.
    pub fn dealer_shift(&self, actor: PlayerId) -> Option<u64> {
        match &self.spec {
            ScriptSpec::DealerShiftOwnShare { dealer, delta } if PlayerId(*dealer) == actor => {
                Some(*delta)
            }
            _ => None,
        }
    }

    /// Product-register offset for one claimed Toffoli state, decided by
    /// the caller's uniform draw u against the scripted bad fraction.
    pub fn toffoli_bad(&self, actor: PlayerId, u: f64) -> Option<u64> {
        match &self.spec {
            ScriptSpec::ToffoliCheat {
                dealer,
                bad_per_mille,
                delta,
            } if PlayerId(*dealer) == actor && u < *bad_per_mille as f64 / 1000.0 => Some(*delta),
            _ => None,
        }
    }

    /// Fixed basis state a corrupted Toffoli dealer ships instead of the
    /// superposition.
    pub fn toffoli_product(&self, actor: PlayerId) -> Option<(u64, u64)> {
        match &self.spec {
            ScriptSpec::ToffoliProductState { dealer, a, b } if PlayerId(*dealer) == actor => {
                Some((*a, *b))
            }
            _ => None,
        }
    }
}
