//! Register views: the recursive structure of shared quantum data.
//!
//! A view describes how one logical qudit is spread over physical
//! qudits: bare, authenticated under a TTP-tracked key (length-m code
//! plus Pauli pad), or split across the length-n sharing code. Views
//! nest: a two-level tree is a sharing layer whose coordinates are
//! authenticated registers whose carriers are again shared and
//! authenticated. Every logical operation recurses over this shape,
//! issuing the matching pad-key transform to the TTP at each
//! authenticated layer, so players never need to act on measurement
//! results to keep their registers interpretable.

use crate::auth::{self, AuthCode, AuthKey, EncKey};
use crate::engine::{Engine, PauliWord, Qudit};
use crate::field::{vandermonde, Mat};
use crate::stab::StabEngine;
use crate::ttp::{RegRef, Transform, Ttp};
use crate::{Error, Result};
use rand::RngCore;

/// The two codes in play: the authentication code (length m = 2d+1,
/// degree d) and the sharing code (length n = 2t+1, degree t).
#[derive(Clone, Debug)]
pub struct Codes {
    pub auth: AuthCode,
    pub outer: AuthCode,
}

impl Codes {
    pub fn new(params: &crate::params::Params) -> Result<Codes> {
        let zp = crate::field::Zp::new(params.p);
        Ok(Codes {
            auth: AuthCode::new(zp, params.d, &params.auth_points())?,
            outer: AuthCode::new_outer(zp, params.t, &params.share_points())?,
        })
    }

    pub fn ones_key(&self) -> AuthKey {
        AuthKey {
            k: vec![1; self.outer.m()],
        }
    }
}

#[derive(Clone, Debug)]
pub enum RegView {
    Bare(Qudit),
    /// One register under a TTP key record: `reg` indexes the pad.
    Auth {
        key: crate::ttp::KeyId,
        reg: usize,
        slots: Vec<RegView>,
    },
    /// Sharing-code layer: slot i carries the evaluation at point i+1.
    Code { slots: Vec<RegView> },
}

impl RegView {
    pub fn rref(&self) -> Option<RegRef> {
        match self {
            RegView::Auth { key, reg, .. } => Some(RegRef { key: *key, reg: *reg }),
            _ => None,
        }
    }

    /// Physical qudits in slot order.
    pub fn leaves(&self) -> Vec<Qudit> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Qudit>) {
        match self {
            RegView::Bare(q) => out.push(*q),
            RegView::Auth { slots, .. } | RegView::Code { slots } => {
                for s in slots {
                    s.collect_leaves(out);
                }
            }
        }
    }
}

pub fn slots_of(v: &RegView) -> Result<&[RegView]> {
    match v {
        RegView::Auth { slots, .. } | RegView::Code { slots } => Ok(slots),
        RegView::Bare(_) => Err(Error::protocol("expected a composite view")),
    }
}

/// Logical Fourier: transversal Fourier with per-slot weight fixups,
/// recursing through both code layers; pads follow via the TTP.
pub fn lf<E: Engine>(eng: &mut E, ttp: &mut Ttp, codes: &Codes, v: &RegView) -> Result<()> {
    match v {
        RegView::Bare(q) => {
            eng.fourier(*q);
            Ok(())
        }
        RegView::Auth { slots, .. } => {
            let ws = codes.auth.weights().to_vec();
            for (slot, w) in slots.iter().zip(ws) {
                lf(eng, ttp, codes, slot)?;
                lmult(eng, ttp, codes, slot, w)?;
            }
            ttp.apply_transform(Transform::Fourier(v.rref().unwrap()))
        }
        RegView::Code { slots } => {
            let ws = codes.outer.weights().to_vec();
            for (slot, w) in slots.iter().zip(ws) {
                lf(eng, ttp, codes, slot)?;
                lmult(eng, ttp, codes, slot, w)?;
            }
            Ok(())
        }
    }
}

pub fn lf_inv<E: Engine>(eng: &mut E, ttp: &mut Ttp, codes: &Codes, v: &RegView) -> Result<()> {
    match v {
        RegView::Bare(q) => {
            eng.fourier_inv(*q);
            Ok(())
        }
        RegView::Auth { slots, .. } => {
            let zp = codes.auth.zp;
            let ws = codes.auth.weights().to_vec();
            for (slot, w) in slots.iter().zip(ws) {
                lmult(eng, ttp, codes, slot, zp.inv(w))?;
                lf_inv(eng, ttp, codes, slot)?;
            }
            ttp.apply_transform(Transform::FourierInv(v.rref().unwrap()))
        }
        RegView::Code { slots } => {
            let zp = codes.outer.zp;
            let ws = codes.outer.weights().to_vec();
            for (slot, w) in slots.iter().zip(ws) {
                lmult(eng, ttp, codes, slot, zp.inv(w))?;
                lf_inv(eng, ttp, codes, slot)?;
            }
            Ok(())
        }
    }
}

/// Logical multiplication by a nonzero field constant, transversal at
/// every layer.
pub fn lmult<E: Engine>(eng: &mut E, ttp: &mut Ttp, codes: &Codes, v: &RegView, c: u64) -> Result<()> {
    let zp = codes.auth.zp;
    let c = c % zp.p;
    if c == 0 {
        return Err(Error::protocol("logical mult by zero"));
    }
    match v {
        RegView::Bare(q) => {
            if c != 1 {
                eng.mult(*q, c);
            }
            Ok(())
        }
        RegView::Auth { slots, .. } => {
            for slot in slots {
                lmult(eng, ttp, codes, slot, c)?;
            }
            ttp.apply_transform(Transform::Mult(v.rref().unwrap(), c))
        }
        RegView::Code { slots } => {
            for slot in slots {
                lmult(eng, ttp, codes, slot, c)?;
            }
            Ok(())
        }
    }
}

pub fn lneg<E: Engine>(eng: &mut E, ttp: &mut Ttp, codes: &Codes, v: &RegView) -> Result<()> {
    lmult(eng, ttp, codes, v, codes.auth.zp.p - 1)
}

/// Logical SUM from `a` onto `b`. The views must be structurally
/// parallel; authenticated layers must share a key record so the
/// transversal gate preserves both codewords.
pub fn lsum<E: Engine>(eng: &mut E, ttp: &mut Ttp, codes: &Codes, a: &RegView, b: &RegView) -> Result<()> {
    laddmul(eng, ttp, codes, a, b, 1)
}

/// Logical `b += c * a`.
pub fn laddmul<E: Engine>(
    eng: &mut E,
    ttp: &mut Ttp,
    codes: &Codes,
    a: &RegView,
    b: &RegView,
    c: u64,
) -> Result<()> {
    let c = c % codes.auth.zp.p;
    if c == 0 {
        return Ok(());
    }
    match (a, b) {
        (RegView::Bare(qa), RegView::Bare(qb)) => {
            eng.addmul(*qa, *qb, c);
            Ok(())
        }
        (RegView::Auth { key: ka, slots: sa, .. }, RegView::Auth { key: kb, slots: sb, .. }) => {
            if ka != kb {
                return Err(Error::protocol("transversal op across different keys"));
            }
            if sa.len() != sb.len() {
                return Err(Error::protocol("register length mismatch"));
            }
            for (x, y) in sa.iter().zip(sb.iter()) {
                laddmul(eng, ttp, codes, x, y, c)?;
            }
            ttp.apply_transform(Transform::AddMul {
                src: a.rref().unwrap(),
                dst: b.rref().unwrap(),
                c,
            })
        }
        (RegView::Code { slots: sa }, RegView::Code { slots: sb }) => {
            if sa.len() != sb.len() {
                return Err(Error::protocol("sharing layer length mismatch"));
            }
            for (x, y) in sa.iter().zip(sb.iter()) {
                laddmul(eng, ttp, codes, x, y, c)?;
            }
            Ok(())
        }
        _ => Err(Error::protocol("views are not structurally parallel")),
    }
}

/// Logical X^u: shift the logical value by u. Authenticated layers move
/// only their pad key, so no quantum action is needed there.
pub fn lx<E: Engine>(eng: &mut E, ttp: &mut Ttp, codes: &Codes, v: &RegView, u: u64) -> Result<()> {
    let zp = codes.auth.zp;
    let u = u % zp.p;
    if u == 0 {
        return Ok(());
    }
    match v {
        RegView::Bare(q) => {
            eng.pauli(&PauliWord::x(zp, *q, u));
            Ok(())
        }
        RegView::Auth { .. } => ttp.apply_transform(Transform::ShiftX(v.rref().unwrap(), u)),
        RegView::Code { slots } => {
            // Adding the constant polynomial u shifts every coordinate.
            for slot in slots {
                lx(eng, ttp, codes, slot, u)?;
            }
            Ok(())
        }
    }
}

/// Logical Z^w: phase by omega^{w * value}.
pub fn lz<E: Engine>(eng: &mut E, ttp: &mut Ttp, codes: &Codes, v: &RegView, w: u64) -> Result<()> {
    let zp = codes.auth.zp;
    let w = w % zp.p;
    if w == 0 {
        return Ok(());
    }
    match v {
        RegView::Bare(q) => {
            eng.pauli(&PauliWord::z(zp, *q, w));
            Ok(())
        }
        RegView::Auth { .. } => ttp.apply_transform(Transform::ShiftZ(v.rref().unwrap(), w)),
        RegView::Code { slots } => {
            for (slot, lam) in slots.iter().zip(codes.outer.lag0().to_vec()) {
                if lam != 0 {
                    lz(eng, ttp, codes, slot, zp.mul(w, lam))?;
                }
            }
            Ok(())
        }
    }
}

/// The logical-Z observable of a view: measuring this Pauli word yields
/// the logical value. Authenticated layers fold in the sign key and the
/// pad shift, so this needs the simulator's key access and never leaves
/// the simulator.
pub fn zword(ttp: &Ttp, codes: &Codes, v: &RegView) -> Result<PauliWord> {
    let zp = codes.auth.zp;
    match v {
        RegView::Bare(q) => Ok(PauliWord::z(zp, *q, 1)),
        RegView::Code { slots } => {
            let mut acc = PauliWord::identity();
            for (slot, lam) in slots.iter().zip(codes.outer.lag0().to_vec()) {
                if lam != 0 {
                    acc = acc.mul(zp, &zword(ttp, codes, slot)?.pow(zp, lam));
                }
            }
            Ok(acc)
        }
        RegView::Auth { key, reg, slots } => {
            let k = ttp.sign_key(*key)?;
            let pad = ttp.current_pad(RegRef { key: *key, reg: *reg })?;
            let lam = codes.auth.lag0().to_vec();
            let mut acc = PauliWord::identity();
            let mut shift = 0u64;
            for ((slot, &l), (kk, pr)) in slots
                .iter()
                .zip(lam.iter())
                .zip(k.k.iter().zip(pad.pairs.iter()))
            {
                if l == 0 {
                    continue;
                }
                let coef = zp.mul(l, zp.inv(*kk));
                acc = acc.mul(zp, &zword(ttp, codes, slot)?.pow(zp, coef));
                shift = zp.add(shift, zp.mul(coef, pr.0));
            }
            acc.phase = zp.sub(acc.phase, shift);
            Ok(acc)
        }
    }
}

/// Measure the logical value of a view, consuming exactly one uniform
/// draw `u` whether or not the outcome is determined, so a protocol run
/// and its monolithic reference stay aligned draw for draw.
pub fn logical_open(
    eng: &mut StabEngine,
    ttp: &Ttp,
    codes: &Codes,
    v: &RegView,
    u: f64,
) -> Result<u64> {
    let w = zword(ttp, codes, v)?;
    let p = codes.auth.zp.p as usize;
    let probs = match eng.measure_outcome_dist(&w) {
        Some(val) => {
            let mut pr = vec![0.0; p];
            pr[val as usize] = 1.0;
            pr
        }
        None => vec![1.0 / p as f64; p],
    };
    let val = crate::stats::draw_index(&probs, u) as u64;
    eng.force_pauli(&w, val);
    Ok(val)
}

/// Authenticate one bare qudit under an existing key record: fresh pad,
/// registered with the TTP (optionally offset by a key-lie script), pad
/// applied physically, m carriers returned as a view.
pub fn auth_encode_view<E: Engine>(
    eng: &mut E,
    ttp: &mut Ttp,
    key: crate::ttp::KeyId,
    data: Qudit,
    rng: &mut dyn RngCore,
    pad_lie: Option<(u64, u64)>,
) -> Result<RegView> {
    let zp = eng.zp();
    let code = ttp.code().clone();
    let k = ttp.sign_key(key)?;
    let applied = auth::enckey_gen(zp, code.m(), rng);
    let registered = match pad_lie {
        None => applied.clone(),
        Some((ds, dt)) => {
            let mut x = applied.clone();
            x.pairs[0] = (zp.add(x.pairs[0].0, ds), zp.add(x.pairs[0].1, dt));
            x
        }
    };
    let reg = ttp.add_registers(key, vec![registered])?;
    let slots = auth::auth_encode(eng, &code, &k, &applied, data);
    Ok(RegView::Auth {
        key,
        reg,
        slots: slots.into_iter().map(RegView::Bare).collect(),
    })
}

/// Spread one bare qudit over the sharing code: returns the n coordinate
/// qudits (evaluations at points 1..n with fresh superposed randomness).
pub fn outer_encode<E: Engine>(eng: &mut E, codes: &Codes, data: Qudit) -> Vec<Qudit> {
    auth::auth_encode(
        eng,
        &codes.outer,
        &codes.ones_key(),
        &EncKey::zero(codes.outer.m()),
        data,
    )
}

/// Invert the sharing code from every coordinate; the coefficient slots
/// end disentangled (discarded unopened) and the trailing slots must
/// read zero for a consistent sharing.
pub fn outer_decode_full<E: Engine>(
    eng: &mut E,
    codes: &Codes,
    coords: &[Qudit],
    rng: &mut dyn RngCore,
) -> Result<(Qudit, Vec<u64>)> {
    let survivors: Vec<(u64, Qudit)> = coords
        .iter()
        .enumerate()
        .map(|(i, &q)| (i as u64 + 1, q))
        .collect();
    outer_decode_erasure(eng, codes, &survivors)?.pick(eng, rng)
}

pub struct OuterDecode {
    pub data: Qudit,
    pub syndrome_slots: Vec<Qudit>,
}

impl OuterDecode {
    /// Measure the syndrome slots; nonzero entries mean the survivors
    /// disagree with a single degree-t polynomial.
    pub fn pick<E: Engine>(self, eng: &mut E, rng: &mut dyn RngCore) -> Result<(Qudit, Vec<u64>)> {
        let syn = self
            .syndrome_slots
            .iter()
            .map(|&q| eng.measure(q, rng))
            .collect();
        Ok((self.data, syn))
    }
}

/// Erasure-decode the sharing code from any >= t+1 surviving coordinates
/// given as (point, qudit) pairs. The first t+1 survivors interpolate
/// the polynomial; each extra survivor becomes a syndrome slot holding
/// its deviation from that interpolation.
///
/// Absent coordinates still exist somewhere, entangled with the shared
/// polynomial. The junk outputs are therefore chosen as re-evaluations at
/// exactly the absent points: each pairs off with its absent counterpart
/// and the data slot comes out clean. Slots left over after that hold top
/// polynomial coefficients, which are independent randomness.
pub fn outer_decode_erasure<E: Engine>(
    eng: &mut E,
    codes: &Codes,
    survivors: &[(u64, Qudit)],
) -> Result<OuterDecode> {
    let zp = codes.outer.zp;
    let t = codes.outer.d;
    let n = codes.outer.m();
    let sig = survivors.len();
    if sig < t + 1 {
        return Err(Error::decode(format!(
            "need at least {} coordinates, have {sig}",
            t + 1
        )));
    }
    let base_pts: Vec<u64> = survivors[..t + 1].iter().map(|&(a, _)| a).collect();
    // Coefficients of the interpolating polynomial from the base values.
    let vinv = vandermonde(zp, &base_pts, t + 1)
        .inverse(zp)
        .map_err(|_| Error::decode("repeated survivor points"))?;
    let eval_row = |pt: u64| -> Vec<u64> {
        let mut row = vec![0u64; t + 1];
        let mut pw = 1u64;
        for deg in 0..t + 1 {
            for c in 0..t + 1 {
                row[c] = zp.add(row[c], zp.mul(pw, vinv.get(deg, c)));
            }
            pw = zp.mul(pw, pt);
        }
        row
    };
    let present: std::collections::BTreeSet<u64> = survivors.iter().map(|&(a, _)| a).collect();
    let missing: Vec<u64> = (1..=n as u64).filter(|x| !present.contains(x)).collect();
    let mut base_rows: Vec<Vec<u64>> = Vec::with_capacity(t + 1);
    base_rows.push(eval_row(0));
    for &e in &missing {
        base_rows.push(eval_row(e));
    }
    // Highest coefficients last: together with the evaluation rows this
    // stays invertible (a Vandermonde minor on the low-degree columns).
    for j in 0..t - missing.len() {
        base_rows.push((0..t + 1).map(|c| vinv.get(t - j, c)).collect());
    }
    let mut m = Mat::zeros(sig, sig);
    for (r, row) in base_rows.iter().enumerate() {
        for c in 0..t + 1 {
            m.set(r, c, row[c]);
        }
    }
    // Extra survivor e reads y_e - f(pt_e) where f comes from the base.
    for e in 0..sig - (t + 1) {
        let row = t + 1 + e;
        let pt = survivors[t + 1 + e].0;
        let mut pw = 1u64;
        let mut pred = vec![0u64; t + 1];
        for deg in 0..t + 1 {
            for c in 0..t + 1 {
                pred[c] = zp.add(pred[c], zp.mul(pw, vinv.get(deg, c)));
            }
            pw = zp.mul(pw, pt);
        }
        for c in 0..t + 1 {
            m.set(row, c, zp.neg(pred[c]));
        }
        m.set(row, row, 1);
    }
    let ops = crate::field::synthesize_linear(zp, &m)?;
    let handles: Vec<Qudit> = survivors.iter().map(|&(_, q)| q).collect();
    eng.apply_linear(&ops, &handles);
    Ok(OuterDecode {
        data: handles[0],
        syndrome_slots: handles[t + 1..].to_vec(),
    })
}
