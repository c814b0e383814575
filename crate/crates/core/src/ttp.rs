//! Ideal classical trusted third party.
//!
//! Holds every classical key, executes pad-key transforms mirroring the
//! players' transversal gates, decodes submitted measurement words,
//! issues purity verdicts, tallies complaints, and sources public random
//! challenge coefficients. Players only ever receive booleans, decoded
//! values scripted for opening, challenges, and explicitly scripted key
//! reveals; the outbound log is structured so tests can audit that no
//! key material leaks outside reveal operations.

use crate::auth::{self, AuthCode, AuthKey, EncKey};
use crate::field::Zp;
use crate::net::PlayerId;
use crate::{Error, Result};
use rand::{Rng, RngCore};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct KeyId(pub u64);

#[derive(Clone, Debug)]
pub struct KeyRecord {
    pub key_id: KeyId,
    pub owner: PlayerId,
    pub k: AuthKey,
    pub x_list: Vec<EncKey>,
    pub revoked: bool,
    pub revealed: bool,
}

/// One register under one key: the unit every transform and decode
/// request addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegRef {
    pub key: KeyId,
    pub reg: usize,
}

#[derive(Clone, Copy, Debug)]
pub enum Transform {
    Fourier(RegRef),
    FourierInv(RegRef),
    Mult(RegRef, u64),
    Sum { control: RegRef, target: RegRef },
    AddMul { src: RegRef, dst: RegRef, c: u64 },
    ShiftX(RegRef, u64),
    ShiftZ(RegRef, u64),
    Negate(RegRef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PurityConstraint {
    /// Degree-bounded polynomial with free coefficient zero.
    FreeCoeffZero,
    /// Degree-bounded polynomial, free coefficient unconstrained.
    FreeCoeffAny,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictRecord {
    pub player: PlayerId,
    pub ok: bool,
    pub round: u32,
}

/// Everything the TTP ever sends out. Key material appears only in the
/// Reveal variant, which protocol steps must authorize explicitly.
#[derive(Clone, Debug, Serialize)]
pub enum TtpReply {
    Ack,
    Decoded(u64),
    RejectedDecode,
    Verdict(VerdictRecord),
    Tally { dealer: PlayerId, faulty: bool },
    Challenge(Vec<u64>),
    Reveal { key: KeyId },
}

#[derive(Clone)]
pub struct Ttp {
    pub zp: Zp,
    code: AuthCode,
    records: Vec<KeyRecord>,
    outbound: Vec<TtpReply>,
    reveal_authorized: Vec<KeyId>,
}

impl Ttp {
    pub fn new(code: AuthCode) -> Ttp {
        Ttp {
            zp: code.zp,
            code,
            records: Vec::new(),
            outbound: Vec::new(),
            reveal_authorized: Vec::new(),
        }
    }

    pub fn code(&self) -> &AuthCode {
        &self.code
    }

    pub fn register_keys(&mut self, owner: PlayerId, k: AuthKey, x_list: Vec<EncKey>) -> KeyId {
        let key_id = KeyId(self.records.len() as u64);
        self.records.push(KeyRecord {
            key_id,
            owner,
            k,
            x_list,
            revoked: false,
            revealed: false,
        });
        self.log(TtpReply::Ack);
        key_id
    }

    /// Append fresh pad keys to an existing record, returning the index
    /// of the first new register.
    pub fn add_registers(&mut self, key: KeyId, pads: Vec<EncKey>) -> Result<usize> {
        let rec = self.record_mut(key)?;
        let first = rec.x_list.len();
        rec.x_list.extend(pads);
        Ok(first)
    }

    fn record(&self, key: KeyId) -> Result<&KeyRecord> {
        self.records
            .get(key.0 as usize)
            .filter(|r| !r.revoked)
            .ok_or_else(|| Error::protocol(format!("unknown or revoked key {key:?}")))
    }

    fn record_mut(&mut self, key: KeyId) -> Result<&mut KeyRecord> {
        self.records
            .get_mut(key.0 as usize)
            .filter(|r| !r.revoked)
            .ok_or_else(|| Error::protocol(format!("unknown or revoked key {key:?}")))
    }

    fn pad(&self, r: RegRef) -> Result<EncKey> {
        let rec = self.record(r.key)?;
        rec.x_list
            .get(r.reg)
            .cloned()
            .ok_or_else(|| Error::protocol("register index out of range"))
    }

    fn set_pad(&mut self, r: RegRef, x: EncKey) {
        self.records[r.key.0 as usize].x_list[r.reg] = x;
    }

    pub fn sign_key(&self, key: KeyId) -> Result<AuthKey> {
        Ok(self.record(key)?.k.clone())
    }

    pub fn owner(&self, key: KeyId) -> Result<PlayerId> {
        Ok(self.record(key)?.owner)
    }

    pub fn apply_transform(&mut self, t: Transform) -> Result<()> {
        let zp = self.zp;
        match t {
            Transform::Fourier(r) => {
                let x = auth::key_transform_fourier(&self.code, &self.pad(r)?);
                self.set_pad(r, x);
            }
            Transform::FourierInv(r) => {
                let x = auth::key_transform_fourier_inv(&self.code, &self.pad(r)?);
                self.set_pad(r, x);
            }
            Transform::Mult(r, c) => {
                let x = auth::key_transform_mult(zp, c, &self.pad(r)?);
                self.set_pad(r, x);
            }
            Transform::Sum { control, target } => {
                let (xc, xt) = auth::key_transform_sum(zp, &self.pad(control)?, &self.pad(target)?);
                self.set_pad(control, xc);
                self.set_pad(target, xt);
            }
            Transform::AddMul { src, dst, c } => {
                let (xs, xd) = auth::key_transform_addmul(zp, c, &self.pad(src)?, &self.pad(dst)?);
                self.set_pad(src, xs);
                self.set_pad(dst, xd);
            }
            Transform::ShiftX(r, u) => {
                let k = self.record(r.key)?.k.clone();
                let x = auth::key_shift_logical_x(zp, &k, u, &self.pad(r)?);
                self.set_pad(r, x);
            }
            Transform::ShiftZ(r, v) => {
                let k = self.record(r.key)?.k.clone();
                let x = auth::key_shift_logical_z(zp, &self.code, &k, v, &self.pad(r)?);
                self.set_pad(r, x);
            }
            Transform::Negate(r) => {
                let x = auth::key_negate(zp, &self.pad(r)?);
                self.set_pad(r, x);
            }
        }
        self.log(TtpReply::Ack);
        Ok(())
    }

    /// Decode a submitted full measurement of one register. Failure is a
    /// tamper signal, logged but carrying no key information.
    pub fn decode_measurement(&mut self, r: RegRef, word: &[u64]) -> Result<u64> {
        let rec = self.record(r.key)?;
        let x = rec
            .x_list
            .get(r.reg)
            .ok_or_else(|| Error::protocol("register index out of range"))?;
        let out = auth::auth_measure_decode(&self.code, &rec.k, x, word);
        match &out {
            Ok(v) => self.log(TtpReply::Decoded(*v)),
            Err(_) => self.log(TtpReply::RejectedDecode),
        }
        out
    }

    /// Verdict for one player's opened register in one purity round: the
    /// word must authenticate and satisfy the constraint. A missing
    /// submission flags the absent player.
    pub fn purity_verdict(
        &mut self,
        player: PlayerId,
        round: u32,
        r: RegRef,
        word: Option<&[u64]>,
        constraint: PurityConstraint,
    ) -> VerdictRecord {
        let ok = match word {
            None => false,
            Some(w) => match self.decode_word_quiet(r, w) {
                Err(_) => false,
                Ok(v) => constraint == PurityConstraint::FreeCoeffAny || v == 0,
            },
        };
        let rec = VerdictRecord { player, ok, round };
        self.log(TtpReply::Verdict(rec.clone()));
        rec
    }

    fn decode_word_quiet(&self, r: RegRef, word: &[u64]) -> Result<u64> {
        let rec = self.record(r.key)?;
        let x = rec
            .x_list
            .get(r.reg)
            .ok_or_else(|| Error::protocol("register index out of range"))?;
        auth::auth_measure_decode(&self.code, &rec.k, x, word)
    }

    /// Dealer is faulty iff strictly more than t players complain.
    pub fn tally_complaints(
        &mut self,
        dealer: PlayerId,
        complainers: &[PlayerId],
        t: u64,
    ) -> bool {
        let mut uniq: Vec<PlayerId> = complainers.to_vec();
        uniq.sort();
        uniq.dedup();
        let faulty = uniq.len() as u64 > t;
        self.log(TtpReply::Tally { dealer, faulty });
        faulty
    }

    /// Public random challenge coefficients; the first entry can be
    /// restricted to nonzero so the summed transformation stays
    /// invertible.
    pub fn challenge(&mut self, len: usize, first_nonzero: bool, rng: &mut dyn RngCore) -> Vec<u64> {
        let p = self.zp.p;
        let coeffs: Vec<u64> = (0..len)
            .map(|i| {
                if i == 0 && first_nonzero {
                    rng.gen_range(1..p)
                } else {
                    rng.gen_range(0..p)
                }
            })
            .collect();
        self.log(TtpReply::Challenge(coeffs.clone()));
        coeffs
    }

    /// Protocol steps that open keys (naive reconstruction, removing the
    /// dealer key) must authorize the reveal first; the audit checks no
    /// other path exposes key bytes.
    pub fn authorize_reveal(&mut self, key: KeyId) {
        self.reveal_authorized.push(key);
    }

    pub fn reveal_key(&mut self, key: KeyId) -> Result<(AuthKey, Vec<EncKey>)> {
        if !self.reveal_authorized.contains(&key) {
            return Err(Error::protocol("unscripted key reveal refused"));
        }
        let rec = self.record_mut(key)?;
        rec.revealed = true;
        let out = (rec.k.clone(), rec.x_list.clone());
        self.log(TtpReply::Reveal { key });
        Ok(out)
    }

    pub fn revoke(&mut self, key: KeyId) -> Result<()> {
        self.record_mut(key)?.revoked = true;
        Ok(())
    }

    pub fn current_pad(&self, r: RegRef) -> Result<EncKey> {
        self.pad(r)
    }

    fn log(&mut self, reply: TtpReply) {
        self.outbound.push(reply);
    }

    pub fn outbound_log(&self) -> &[TtpReply] {
        &self.outbound
    }

    /// Every reveal in the outbound log was authorized by a protocol
    /// step; all other replies are structurally key-free.
    pub fn audit_reveals(&self) -> bool {
        self.outbound.iter().all(|r| match r {
            TtpReply::Reveal { key } => self.reveal_authorized.contains(key),
            _ => true,
        })
    }
}
