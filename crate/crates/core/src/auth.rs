//! Keyed quantum authentication of single qudits.
//!
//! A data qudit is stretched into m = 2d+1 qudits holding a superposition
//! of sign-twisted polynomial evaluations: for secret signs k_i and degree
//! <= d polynomials f with f(0) = data, the register holds
//! p^(-d/2) sum_f |k_1 f(a_1), ..., k_m f(a_m)>, then gets one-time-padded
//! by per-qudit shift/phase Paulis keyed by x. With m < p < 2m the code is
//! self-dual: the coordinate-wise Fourier transform, followed by fixed
//! per-coordinate multiplications, implements the logical Fourier
//! transform, so both bases can be checked with the same machinery.
//!
//! Everything classical about keys (generation, the transform rules under
//! logical gates, and measurement-word decoding) lives here next to the
//! circuits, so the trusted key service is a thin bookkeeping layer.

use crate::engine::{Engine, PauliWord, Qudit};
use crate::field::{self, lagrange_at_zero, synthesize_linear, vandermonde, LinOp, Mat, Zp};
use crate::{Error, Result};
use rand::{Rng, RngCore};

/// Sign key: m entries, each 1 or p-1, so every entry is its own inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuthKey {
    pub k: Vec<u64>,
}

/// Pauli pad key: per-position (shift, phase) pair, fresh per register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncKey {
    pub pairs: Vec<(u64, u64)>,
}

impl EncKey {
    pub fn zero(m: usize) -> EncKey {
        EncKey {
            pairs: vec![(0, 0); m],
        }
    }

    pub fn shifts(&self) -> Vec<u64> {
        self.pairs.iter().map(|&(s, _)| s).collect()
    }

    pub fn phases(&self) -> Vec<u64> {
        self.pairs.iter().map(|&(_, t)| t).collect()
    }
}

pub fn keygen(zp: Zp, m: usize, rng: &mut dyn RngCore) -> AuthKey {
    AuthKey {
        k: (0..m)
            .map(|_| if rng.gen::<bool>() { 1 } else { zp.p - 1 })
            .collect(),
    }
}

pub fn enckey_gen(zp: Zp, m: usize, rng: &mut dyn RngCore) -> EncKey {
    EncKey {
        pairs: (0..m)
            .map(|_| (rng.gen_range(0..zp.p), rng.gen_range(0..zp.p)))
            .collect(),
    }
}

/// Geometry of one authentication code: degree d, evaluation points, and
/// the derived constants every circuit and key rule needs.
#[derive(Clone, Debug)]
pub struct AuthCode {
    pub zp: Zp,
    pub d: usize,
    pub pts: Vec<u64>,
    /// Per-position weights completing the transversal Fourier into the
    /// logical one; independent of the sign key.
    weights: Vec<u64>,
    /// Lagrange-at-zero weights over the first d+1 points, zero-padded.
    lag0: Vec<u64>,
}

impl AuthCode {
    pub fn new(zp: Zp, d: usize, pts: &[u64]) -> Result<AuthCode> {
        let m = 2 * d + 1;
        if !(zp.p > m as u64 && zp.p < 2 * m as u64) {
            return Err(Error::param(format!(
                "need m < p < 2m, got p = {}, m = {m}",
                zp.p
            )));
        }
        AuthCode::new_outer(zp, d, pts)
    }

    /// Same geometry without the m < p < 2m bound: share codes only need
    /// length 2d+1 and distinct nonzero points, so larger primes are fine.
    pub fn new_outer(zp: Zp, d: usize, pts: &[u64]) -> Result<AuthCode> {
        let m = 2 * d + 1;
        if pts.len() != m {
            return Err(Error::param(format!(
                "self-dual code needs {m} points for degree {d}, got {}",
                pts.len()
            )));
        }
        field::check_points(zp, pts)?;
        let weights = fourier_weights(zp, pts);
        let mut lag0 = lagrange_at_zero(zp, &pts[..d + 1]);
        lag0.resize(m, 0);
        Ok(AuthCode {
            zp,
            d,
            pts: pts.to_vec(),
            weights,
            lag0,
        })
    }

    pub fn m(&self) -> usize {
        2 * self.d + 1
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn lag0(&self) -> &[u64] {
        &self.lag0
    }

    /// Basis-change matrix: inputs (data, d coefficients, d zeros) map to
    /// the stretched codeword k_i f(a_i). Columns beyond the polynomial
    /// block are unit vectors landing on the syndrome rows, which keeps
    /// the map invertible.
    pub fn matrix(&self, k: &AuthKey) -> Mat {
        let zp = self.zp;
        let m = self.m();
        let v = vandermonde(zp, &self.pts, self.d + 1);
        let mut full = Mat::zeros(m, m);
        for i in 0..m {
            for j in 0..=self.d {
                full.set(i, j, zp.mul(k.k[i], v.get(i, j)));
            }
        }
        for j in 0..self.d {
            let row = self.d + 1 + j;
            full.set(row, self.d + 1 + j, k.k[row]);
        }
        full
    }

    pub fn encode_ops(&self, k: &AuthKey) -> Vec<LinOp> {
        synthesize_linear(self.zp, &self.matrix(k)).expect("auth matrix is invertible")
    }

    pub fn decode_ops(&self, k: &AuthKey) -> Vec<LinOp> {
        let inv = self
            .matrix(k)
            .inverse(self.zp)
            .expect("auth matrix is invertible");
        synthesize_linear(self.zp, &inv).expect("inverse is invertible")
    }
}

/// Diagonal weights w_i = c a_i / u_i with u_i = prod_{j != i}
/// (a_i - a_j)^-1 and c = sum_j u_j a_j^-1, chosen so that transversal
/// Fourier followed by mult_{w_i} on each coordinate acts as the logical
/// Fourier transform on a length 2d+1, degree d evaluation code. c is
/// never zero: it equals the inverse of the product of the points up to
/// sign.
pub fn fourier_weights(zp: Zp, pts: &[u64]) -> Vec<u64> {
    let m = pts.len();
    let u: Vec<u64> = (0..m)
        .map(|i| {
            let mut prod = 1;
            for j in 0..m {
                if j != i {
                    prod = zp.mul(prod, zp.sub(pts[i], pts[j]));
                }
            }
            zp.inv(prod)
        })
        .collect();
    let c = (0..m).fold(0, |acc, j| zp.add(acc, zp.mul(u[j], zp.inv(pts[j]))));
    assert!(c != 0, "fourier weight constant vanished");
    (0..m)
        .map(|i| zp.mul(zp.mul(c, pts[i]), zp.inv(u[i])))
        .collect()
}

/// Stretch `data` into an authenticated register: put the coefficient
/// ancillas into uniform superposition, run the evaluation map, then pad
/// with the x key. Returns the m register handles in coordinate order
/// (the data qudit becomes coordinate 0's preimage slot).
pub fn auth_encode<E: Engine>(
    eng: &mut E,
    code: &AuthCode,
    k: &AuthKey,
    x: &EncKey,
    data: Qudit,
) -> Vec<Qudit> {
    let m = code.m();
    let mut handles = vec![data];
    handles.extend(eng.alloc(m - 1));
    for &h in &handles[1..=code.d] {
        eng.fourier(h);
    }
    eng.apply_linear(&code.encode_ops(k), &handles);
    apply_pad(eng, x, &handles, false);
    handles
}

fn apply_pad<E: Engine>(eng: &mut E, x: &EncKey, handles: &[Qudit], undo: bool) {
    let zp = eng.zp();
    let shifts: Vec<u64> = x
        .pairs
        .iter()
        .map(|&(s, _)| if undo { zp.neg(s) } else { s })
        .collect();
    let phases: Vec<u64> = x
        .pairs
        .iter()
        .map(|&(_, t)| if undo { zp.neg(t) } else { t })
        .collect();
    let word = PauliWord::from_parts(zp, handles, &shifts, &phases, 0);
    eng.pauli(&word);
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub data: Qudit,
    pub accepted: bool,
    /// Outcomes of the m-1 syndrome measurements (coefficient slots first).
    pub syndromes: Vec<u64>,
}

/// Invert the pad and the evaluation map, then measure every non-data
/// slot; accept iff all syndromes vanish. Consumes the register: the
/// caller keeps only the decoded data qudit.
pub fn auth_verify_decode<E: Engine>(
    eng: &mut E,
    code: &AuthCode,
    k: &AuthKey,
    x: &EncKey,
    handles: &[Qudit],
    rng: &mut dyn RngCore,
) -> VerifyOutcome {
    assert_eq!(handles.len(), code.m());
    apply_pad(eng, x, handles, true);
    eng.apply_linear(&code.decode_ops(k), handles);
    for &h in &handles[1..=code.d] {
        eng.fourier_inv(h);
    }
    let syndromes: Vec<u64> = handles[1..]
        .iter()
        .map(|&h| eng.measure(h, rng))
        .collect();
    VerifyOutcome {
        data: handles[0],
        accepted: syndromes.iter().all(|&v| v == 0),
        syndromes,
    }
}

/// Decode a full computational-basis measurement of an authenticated
/// register: unshift, unmultiply, interpolate, return f(0). A decode
/// failure means tampering.
pub fn auth_measure_decode(code: &AuthCode, k: &AuthKey, x: &EncKey, word: &[u64]) -> Result<u64> {
    let zp = code.zp;
    if word.len() != code.m() {
        return Err(Error::param("measured word has wrong length"));
    }
    let points: Vec<(u64, u64)> = (0..code.m())
        .map(|i| {
            let unshift = zp.sub(word[i], x.pairs[i].0);
            (code.pts[i], zp.mul(k.k[i], unshift))
        })
        .collect();
    let f = field::interpolate(zp, &points, code.d)?;
    Ok(f.free_coeff())
}

/// Pad-key rule under the logical Fourier transform (transversal F then
/// mult by the code weights): (s, t) -> (-w t, w^-1 s) per position.
pub fn key_transform_fourier(code: &AuthCode, x: &EncKey) -> EncKey {
    let zp = code.zp;
    EncKey {
        pairs: x
            .pairs
            .iter()
            .zip(code.weights.iter())
            .map(|(&(s, t), &w)| (zp.neg(zp.mul(w, t)), zp.mul(zp.inv(w), s)))
            .collect(),
    }
}

pub fn key_transform_fourier_inv(code: &AuthCode, x: &EncKey) -> EncKey {
    let zp = code.zp;
    EncKey {
        pairs: x
            .pairs
            .iter()
            .zip(code.weights.iter())
            .map(|(&(s, t), &w)| (zp.mul(w, t), zp.neg(zp.mul(zp.inv(w), s))))
            .collect(),
    }
}

/// Pad-key rule under transversal SUM from register x onto register y:
/// x' = (x0, x1 - y1), y' = (x0 + y0, y1) per position.
pub fn key_transform_sum(zp: Zp, x: &EncKey, y: &EncKey) -> (EncKey, EncKey) {
    let pairs = x.pairs.iter().zip(y.pairs.iter());
    let xp = pairs
        .clone()
        .map(|(&(s, t), &(_, ty))| (s, zp.sub(t, ty)))
        .collect();
    let yp = pairs.map(|(&(s, _), &(sy, ty))| (zp.add(s, sy), ty)).collect();
    (EncKey { pairs: xp }, EncKey { pairs: yp })
}

/// Pad-key rule under transversal addmul(src -> dst, c), i.e. SUM^c:
/// dst shifts pick up c times src shifts, src phases lose c times dst
/// phases.
pub fn key_transform_addmul(zp: Zp, c: u64, x: &EncKey, y: &EncKey) -> (EncKey, EncKey) {
    let pairs = x.pairs.iter().zip(y.pairs.iter());
    let xp = pairs
        .clone()
        .map(|(&(s, t), &(_, ty))| (s, zp.sub(t, zp.mul(c, ty))))
        .collect();
    let yp = pairs
        .map(|(&(s, _), &(sy, ty))| (zp.add(sy, zp.mul(c, s)), ty))
        .collect();
    (EncKey { pairs: xp }, EncKey { pairs: yp })
}

/// Pad-key rule under transversal mult by -1: (s, t) -> (-s, -t).
pub fn key_negate(zp: Zp, x: &EncKey) -> EncKey {
    EncKey {
        pairs: x
            .pairs
            .iter()
            .map(|&(s, t)| (zp.neg(s), zp.neg(t)))
            .collect(),
    }
}

/// Pad-key rule under transversal mult_c: (s, t) -> (c s, c^-1 t).
pub fn key_transform_mult(zp: Zp, c: u64, x: &EncKey) -> EncKey {
    let cinv = zp.inv(c);
    EncKey {
        pairs: x
            .pairs
            .iter()
            .map(|&(s, t)| (zp.mul(c, s), zp.mul(cinv, t)))
            .collect(),
    }
}

/// Apply logical X^u purely by rekeying: s_i -= k_i u.
pub fn key_shift_logical_x(zp: Zp, k: &AuthKey, u: u64, x: &EncKey) -> EncKey {
    EncKey {
        pairs: x
            .pairs
            .iter()
            .zip(k.k.iter())
            .map(|(&(s, t), &ki)| (zp.sub(s, zp.mul(ki, u)), t))
            .collect(),
    }
}

/// Apply logical Z^v purely by rekeying, using the Lagrange-at-zero
/// weights: t_i -= v lag_i k_i.
pub fn key_shift_logical_z(zp: Zp, code: &AuthCode, k: &AuthKey, v: u64, x: &EncKey) -> EncKey {
    EncKey {
        pairs: x
            .pairs
            .iter()
            .zip(code.lag0.iter().zip(k.k.iter()))
            .map(|(&(s, t), (&l, &ki))| (s, zp.sub(t, zp.mul(v, zp.mul(l, ki)))))
            .collect(),
    }
}

/// Transversal Fourier plus the weight fixups: the logical Fourier
/// transform on one authenticated (or bare, k-free) register.
pub fn logical_fourier<E: Engine>(eng: &mut E, code: &AuthCode, handles: &[Qudit]) {
    for (&h, &w) in handles.iter().zip(code.weights.iter()) {
        eng.fourier(h);
        eng.mult(h, w);
    }
}

pub fn logical_fourier_inv<E: Engine>(eng: &mut E, code: &AuthCode, handles: &[Qudit]) {
    let zp = eng.zp();
    for (&h, &w) in handles.iter().zip(code.weights.iter()) {
        eng.mult(h, zp.inv(w));
        eng.fourier_inv(h);
    }
}

pub fn logical_sum<E: Engine>(eng: &mut E, control: &[Qudit], target: &[Qudit]) {
    assert_eq!(control.len(), target.len());
    for (&c, &t) in control.iter().zip(target.iter()) {
        eng.sum(c, t);
    }
}

pub fn logical_mult<E: Engine>(eng: &mut E, handles: &[Qudit], c: u64) {
    for &h in handles {
        eng.mult(h, c);
    }
}

pub fn logical_addmul<E: Engine>(eng: &mut E, src: &[Qudit], dst: &[Qudit], c: u64) {
    assert_eq!(src.len(), dst.len());
    for (&s, &d) in src.iter().zip(dst.iter()) {
        eng.addmul(s, d, c);
    }
}

/// Classical acceptance predicate for a fixed Pauli attack (a, b) on one
/// authenticated register under sign key k: accepted iff the decoded
/// X displacement vanishes on the computational syndrome slots and the
/// decoded Z displacement vanishes on the coefficient slots. The pad key
/// only contributes a global phase and is irrelevant.
pub fn attack_accept_oracle(code: &AuthCode, k: &AuthKey, a: &[u64], b: &[u64]) -> bool {
    let zp = code.zp;
    let mat = code.matrix(k);
    let minv = mat.inverse(zp).expect("invertible");
    let xdisp = minv.mul_vec(zp, a);
    let zdisp = mat.transpose().mul_vec(zp, b);
    let comp_ok = xdisp[code.d + 1..].iter().all(|&v| v == 0);
    let coeff_ok = zdisp[1..=code.d].iter().all(|&v| v == 0);
    comp_ok && coeff_ok
}

/// Acceptance probability of a fixed attack over all 2^m sign keys.
pub fn attack_acceptance_probability(code: &AuthCode, a: &[u64], b: &[u64]) -> f64 {
    let zp = code.zp;
    let m = code.m();
    let mut accepted = 0u64;
    for bits in 0..1u64 << m {
        let k = AuthKey {
            k: (0..m)
                .map(|i| if bits >> i & 1 == 1 { zp.p - 1 } else { 1 })
                .collect(),
        };
        if attack_accept_oracle(code, &k, a, b) {
            accepted += 1;
        }
    }
    accepted as f64 / (1u64 << m) as f64
}

/// Whether an accepted attack would still disturb the logical content
/// (shift the data or its phase): the harmful accepted cases.
pub fn attack_harmful_if_accepted(code: &AuthCode, k: &AuthKey, a: &[u64], b: &[u64]) -> bool {
    let zp = code.zp;
    let mat = code.matrix(k);
    let minv = mat.inverse(zp).expect("invertible");
    let xdisp = minv.mul_vec(zp, a);
    let zdisp = mat.transpose().mul_vec(zp, b);
    xdisp[0] != 0 || zdisp[0] != 0
}
