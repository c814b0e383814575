//! Exact sparse state-vector backend: a map from packed base-p basis
//! strings to complex amplitudes. Handles the non-Clifford pieces (Toffoli
//! gates and states) and serves as the ground-truth oracle the stabilizer
//! engine is validated against.

use crate::engine::{Engine, PauliWord, Qudit};
use crate::field::Zp;
use crate::oracle::omega;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, RngCore};
use std::collections::HashMap;

const PRUNE_EPS: f64 = 1e-12;
const NORM_TOL: f64 = 1e-9;
pub const DEFAULT_SUPPORT_CAP: usize = 10_000_000;

/// Outcome of a verification or distillation step measured against an
/// ideal target state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub accepted: bool,
}

#[derive(Clone)]
pub struct SparseEngine {
    zp: Zp,
    n: usize,
    /// Basis string packed base p, digit i = qudit i.
    amps: HashMap<u64, Complex64>,
    pows: Vec<u64>,
    pub support_cap: usize,
}

impl SparseEngine {
    pub fn new(p: u64) -> SparseEngine {
        let zp = Zp::new(p);
        let mut pows = vec![1u64];
        while let Some(next) = pows.last().unwrap().checked_mul(p) {
            pows.push(next);
        }
        let mut amps = HashMap::new();
        amps.insert(0, Complex64::new(1.0, 0.0));
        SparseEngine {
            zp,
            n: 0,
            amps,
            pows,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }

    pub fn new_zeros(p: u64, n: usize) -> SparseEngine {
        let mut e = SparseEngine::new(p);
        e.alloc(n);
        e
    }

    /// Build a state from explicit (digits, amplitude) pairs; normalizes.
    pub fn prepare(p: u64, n: usize, entries: &[(&[u64], Complex64)]) -> Result<SparseEngine> {
        let mut e = SparseEngine::new_zeros(p, n);
        e.amps.clear();
        for (digits, amp) in entries {
            let key = e.pack(digits);
            *e.amps.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        e.amps.retain(|_, a| a.norm_sqr() > 0.0);
        let norm = e.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::param("cannot prepare the zero vector"));
        }
        for a in e.amps.values_mut() {
            *a /= norm;
        }
        Ok(e)
    }

    pub fn pack(&self, digits: &[u64]) -> u64 {
        assert_eq!(digits.len(), self.n);
        digits
            .iter()
            .enumerate()
            .map(|(i, &d)| (d % self.zp.p) * self.pows[i])
            .sum()
    }

    pub fn unpack(&self, key: u64) -> Vec<u64> {
        (0..self.n).map(|i| self.digit(key, i)).collect()
    }

    #[inline]
    fn digit(&self, key: u64, i: usize) -> u64 {
        key / self.pows[i] % self.zp.p
    }

    #[inline]
    fn with_digit(&self, key: u64, i: usize, d: u64) -> u64 {
        key - self.digit(key, i) * self.pows[i] + d * self.pows[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, digits: &[u64]) -> Complex64 {
        let key = self.pack(digits);
        self.amps
            .get(&key)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn support(&self) -> impl Iterator<Item = (Vec<u64>, Complex64)> + '_ {
        self.amps.iter().map(|(&k, &a)| (self.unpack(k), a))
    }

    fn permute_keys(&mut self, f: impl Fn(&Self, u64) -> u64) {
        let old = std::mem::take(&mut self.amps);
        let mut new = HashMap::with_capacity(old.len());
        for (k, a) in old {
            let nk = f(self, k);
            debug_assert!(!new.contains_key(&nk), "permutation gate collided");
            new.insert(nk, a);
        }
        self.amps = new;
    }

    /// |x,y,z> -> |x, y, z + xy>.
    pub fn toffoli(&mut self, x: Qudit, y: Qudit, z: Qudit) {
        let zp = self.zp;
        assert!(x != z && y != z && x != y);
        self.permute_keys(|e, k| {
            let prod = zp.mul(e.digit(k, x.0 as usize), e.digit(k, y.0 as usize));
            let nz = zp.add(e.digit(k, z.0 as usize), prod);
            e.with_digit(k, z.0 as usize, nz)
        });
    }

    /// Exact marginal outcome distribution of one qudit.
    pub fn marginal_probs(&self, q: Qudit) -> Vec<f64> {
        let mut w = vec![0.0; self.zp.p as usize];
        for (&k, a) in &self.amps {
            w[self.digit(k, q.0 as usize) as usize] += a.norm_sqr();
        }
        w
    }

    /// Project qudit q onto `outcome` and renormalize; returns the branch
    /// weight (0.0 leaves an empty, unusable state, callers must not pick
    /// zero-weight branches).
    pub fn collapse(&mut self, q: Qudit, outcome: u64) -> f64 {
        let i = q.0 as usize;
        let outcome = outcome % self.zp.p;
        let mut w = 0.0;
        self.amps.retain(|&k, a| {
            if k / self.pows[i] % self.zp.p == outcome {
                w += a.norm_sqr();
                true
            } else {
                false
            }
        });
        if w > 0.0 {
            let s = w.sqrt();
            for a in self.amps.values_mut() {
                *a /= s;
            }
        }
        w
    }

    pub fn inner_product(&self, other: &SparseEngine) -> Complex64 {
        assert_eq!(self.n, other.n);
        assert_eq!(self.zp.p, other.zp.p);
        let (small, big, conj_small) = if self.amps.len() <= other.amps.len() {
            (&self.amps, &other.amps, true)
        } else {
            (&other.amps, &self.amps, false)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in small {
            if let Some(b) = big.get(k) {
                // <self|other> conjugates self's amplitude.
                acc += if conj_small { a.conj() * b } else { b.conj() * a };
            }
        }
        acc
    }

    pub fn fidelity_to(&self, other: &SparseEngine) -> f64 {
        self.inner_product(other).norm_sqr()
    }

    /// Restrict to the listed qudits, requiring every other qudit to be in
    /// a definite basis state across the whole support (true after they
    /// have been measured).
    pub fn marginal_on(&self, qudits: &[Qudit]) -> Result<SparseEngine> {
        let keep: Vec<usize> = qudits.iter().map(|q| q.0 as usize).collect();
        let mut fixed: Option<Vec<u64>> = None;
        for &k in self.amps.keys() {
            let others: Vec<u64> = (0..self.n)
                .filter(|i| !keep.contains(i))
                .map(|i| self.digit(k, i))
                .collect();
            match &fixed {
                None => fixed = Some(others),
                Some(f) if *f == others => {}
                _ => {
                    return Err(Error::param(
                        "state is entangled across the requested marginal",
                    ))
                }
            }
        }
        let mut out = SparseEngine::new_zeros(self.zp.p, keep.len());
        out.amps.clear();
        for (&k, &a) in &self.amps {
            let digits: Vec<u64> = keep.iter().map(|&i| self.digit(k, i)).collect();
            out.amps.insert(out.pack(&digits), a);
        }
        Ok(out)
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_EPS);
        debug_assert!((self.norm_sqr() - 1.0).abs() < NORM_TOL, "state drifted off norm");
    }

    fn fourier_with_sign(&mut self, q: Qudit, sign_neg: bool) {
        let p = self.zp.p;
        let i = q.0 as usize;
        let scale = 1.0 / (p as f64).sqrt();
        let old = std::mem::take(&mut self.amps);
        assert!(
            old.len() * p as usize <= self.support_cap,
            "support cap exceeded by Fourier"
        );
        let mut new: HashMap<u64, Complex64> = HashMap::with_capacity(old.len() * p as usize);
        for (k, a) in old {
            let x = self.digit(k, i);
            let base = k - x * self.pows[i];
            for y in 0..p {
                let e = if sign_neg {
                    (p - 1) * x * y % p // -xy mod p
                } else {
                    x * y % p
                };
                let term = a * omega(p, e) * scale;
                *new.entry(base + y * self.pows[i])
                    .or_insert(Complex64::new(0.0, 0.0)) += term;
            }
        }
        self.amps = new;
        self.prune();
    }
}

impl Engine for SparseEngine {
    fn zp(&self) -> Zp {
        self.zp
    }

    fn qudit_count(&self) -> usize {
        self.n
    }

    fn alloc(&mut self, count: usize) -> Vec<Qudit> {
        assert!(
            self.n + count < self.pows.len(),
            "sparse backend limited to {} qudits at p = {}",
            self.pows.len() - 1,
            self.zp.p
        );
        let out = (0..count).map(|i| Qudit((self.n + i) as u32)).collect();
        self.n += count;
        out
    }

    fn fourier(&mut self, q: Qudit) {
        self.fourier_with_sign(q, false);
    }

    fn fourier_inv(&mut self, q: Qudit) {
        self.fourier_with_sign(q, true);
    }

    fn sum(&mut self, c: Qudit, t: Qudit) {
        assert!(c != t, "SUM control and target must differ");
        let zp = self.zp;
        self.permute_keys(|e, k| {
            let nt = zp.add(e.digit(k, t.0 as usize), e.digit(k, c.0 as usize));
            e.with_digit(k, t.0 as usize, nt)
        });
    }

    fn mult(&mut self, q: Qudit, k: u64) {
        let zp = self.zp;
        let k = k % zp.p;
        assert!(k != 0, "mult by zero is not unitary");
        self.permute_keys(|e, key| {
            let nv = zp.mul(e.digit(key, q.0 as usize), k);
            e.with_digit(key, q.0 as usize, nv)
        });
    }

    fn pauli(&mut self, word: &PauliWord) {
        let zp = self.zp;
        let old = std::mem::take(&mut self.amps);
        let mut new = HashMap::with_capacity(old.len());
        for (mut k, mut a) in old {
            let mut e = word.phase;
            for &(q, xa, zb) in &word.entries {
                let i = q.0 as usize;
                let v = self.digit(k, i);
                e = zp.add(e, zp.mul(zb, v));
                k = self.with_digit(k, i, zp.add(v, xa));
            }
            a *= omega(zp.p, e);
            new.insert(k, a);
        }
        self.amps = new;
    }

    fn measure(&mut self, q: Qudit, rng: &mut dyn RngCore) -> u64 {
        let probs = self.marginal_probs(q);
        let outcome = crate::stats::draw_index(&probs, rng.gen()) as u64;
        self.collapse(q, outcome);
        outcome
    }

    fn addmul(&mut self, src: Qudit, dst: Qudit, k: u64) {
        let zp = self.zp;
        let k = k % zp.p;
        if k == 0 {
            return;
        }
        self.permute_keys(|e, key| {
            let nd = zp.add(
                e.digit(key, dst.0 as usize),
                zp.mul(k, e.digit(key, src.0 as usize)),
            );
            e.with_digit(key, dst.0 as usize, nd)
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn prepare_and_normalize() {
        let e = SparseEngine::prepare(5, 1, &[(&[0], c(1.0))]).unwrap();
        assert_eq!(e.support_len(), 1);
        assert!((e.amplitude(&[0]).re - 1.0).abs() < 1e-12);

        let epr: Vec<(Vec<u64>, Complex64)> = (0..5).map(|x| (vec![x, x], c(1.0))).collect();
        let refs: Vec<(&[u64], Complex64)> =
            epr.iter().map(|(d, a)| (d.as_slice(), *a)).collect();
        let e = SparseEngine::prepare(5, 2, &refs).unwrap();
        assert_eq!(e.support_len(), 5);
        assert!((e.amplitude(&[2, 2]).re - 1.0 / 5f64.sqrt()).abs() < 1e-12);

        assert!(SparseEngine::prepare(5, 1, &[]).is_err());
    }

    #[test]
    fn toffoli_state_support() {
        let mut entries = Vec::new();
        for a in 0..5u64 {
            for b in 0..5u64 {
                entries.push((vec![a, b, a * b % 5], c(1.0)));
            }
        }
        let refs: Vec<(&[u64], Complex64)> =
            entries.iter().map(|(d, a)| (d.as_slice(), *a)).collect();
        let tau = SparseEngine::prepare(5, 3, &refs).unwrap();
        assert_eq!(tau.support_len(), 25);
        assert!((tau.amplitude(&[2, 3, 1]).re - 0.2).abs() < 1e-12);

        // Toffoli applied to sum |a,b,0>/p is exactly the Toffoli state.
        let mut flat = Vec::new();
        for a in 0..5u64 {
            for b in 0..5u64 {
                flat.push((vec![a, b, 0], c(1.0)));
            }
        }
        let refs: Vec<(&[u64], Complex64)> =
            flat.iter().map(|(d, a)| (d.as_slice(), *a)).collect();
        let mut st = SparseEngine::prepare(5, 3, &refs).unwrap();
        st.toffoli(Qudit(0), Qudit(1), Qudit(2));
        assert!((st.fidelity_to(&tau) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn toffoli_basis_actions() {
        let mut e = SparseEngine::prepare(5, 3, &[(&[2, 3, 0], c(1.0))]).unwrap();
        e.toffoli(Qudit(0), Qudit(1), Qudit(2));
        assert!((e.amplitude(&[2, 3, 1]).norm() - 1.0).abs() < 1e-12);

        let mut e = SparseEngine::prepare(5, 3, &[(&[0, 4, 2], c(1.0))]).unwrap();
        e.toffoli(Qudit(0), Qudit(1), Qudit(2));
        assert!((e.amplitude(&[0, 4, 2]).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_shift_overlap_is_zero() {
        // <tau| X on third qudit |tau> = 0.
        let mut entries = Vec::new();
        for a in 0..5u64 {
            for b in 0..5u64 {
                entries.push((vec![a, b, a * b % 5], c(1.0)));
            }
        }
        let refs: Vec<(&[u64], Complex64)> =
            entries.iter().map(|(d, a)| (d.as_slice(), *a)).collect();
        let tau = SparseEngine::prepare(5, 3, &refs).unwrap();
        let mut shifted = SparseEngine::prepare(5, 3, &refs).unwrap();
        shifted.pauli(&PauliWord::x(Zp::new(5), Qudit(2), 1));
        assert!(tau.inner_product(&shifted).norm() < 1e-12);
        assert!((tau.inner_product(&tau).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_measurement_correlations() {
        let mut entries = Vec::new();
        for a in 0..5u64 {
            for b in 0..5u64 {
                entries.push((vec![a, b, a * b % 5], c(1.0)));
            }
        }
        let refs: Vec<(&[u64], Complex64)> =
            entries.iter().map(|(d, a)| (d.as_slice(), *a)).collect();
        for seed in 0..40 {
            let mut tau = SparseEngine::prepare(5, 3, &refs).unwrap();
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = tau.measure(Qudit(0), &mut rng);
            let b = tau.measure(Qudit(1), &mut rng);
            let ab = tau.measure(Qudit(2), &mut rng);
            assert_eq!(ab, a * b % 5);
        }
    }

    #[test]
    fn fourier_examples() {
        let mut e = SparseEngine::new_zeros(5, 1);
        e.fourier(Qudit(0));
        assert_eq!(e.support_len(), 5);
        for x in 0..5 {
            assert!((e.amplitude(&[x]).re - 1.0 / 5f64.sqrt()).abs() < 1e-9);
        }

        // F^2 |1> = |4>.
        let mut e = SparseEngine::prepare(5, 1, &[(&[1], c(1.0))]).unwrap();
        e.fourier(Qudit(0));
        e.fourier(Qudit(0));
        assert!((e.amplitude(&[4]).norm() - 1.0).abs() < 1e-9);
        assert_eq!(e.support_len(), 1);

        // F then F^-1 is the identity.
        let mut e = SparseEngine::prepare(5, 1, &[(&[3], c(1.0))]).unwrap();
        e.fourier(Qudit(0));
        e.fourier_inv(Qudit(0));
        assert!((e.amplitude(&[3]).norm() - 1.0).abs() < 1e-9);
        assert_eq!(e.support_len(), 1);
    }

    #[test]
    fn gates_preserve_norm() {
        let mut e = SparseEngine::new_zeros(5, 3);
        let zp = e.zp();
        e.fourier(Qudit(0));
        e.sum(Qudit(0), Qudit(1));
        e.mult(Qudit(1), 3);
        e.fourier(Qudit(2));
        e.toffoli(Qudit(0), Qudit(1), Qudit(2));
        e.pauli(&PauliWord::from_parts(zp, &[Qudit(0), Qudit(2)], &[1, 2], &[3, 0], 4));
        e.fourier_inv(Qudit(1));
        assert!((e.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn measurement_collapse_consistency() {
        for seed in 0..30 {
            let mut e = SparseEngine::new_zeros(5, 2);
            e.fourier(Qudit(0));
            e.sum(Qudit(0), Qudit(1));
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = e.measure(Qudit(0), &mut rng);
            let b = e.measure(Qudit(1), &mut rng);
            assert_eq!(a, b);
            assert!((e.norm_sqr() - 1.0).abs() < 1e-9);
            assert_eq!(e.support_len(), 1);
        }
    }

    #[test]
    fn marginal_extraction() {
        let mut e = SparseEngine::new_zeros(5, 3);
        e.pauli(&PauliWord::x(Zp::new(5), Qudit(1), 2));
        e.fourier(Qudit(0));
        e.sum(Qudit(0), Qudit(2));
        // Qudit 1 is in a product basis state; marginal on {0, 2} works.
        let m = e.marginal_on(&[Qudit(0), Qudit(2)]).unwrap();
        assert_eq!(m.qudit_count(), 2);
        assert_eq!(m.support_len(), 5);
        // Marginal on {0, 1} would cut through entanglement with 2.
        assert!(e.marginal_on(&[Qudit(0), Qudit(1)]).is_err());
    }

    #[test]
    fn pauli_phase_action() {
        let zp = Zp::new(5);
        let mut e = SparseEngine::prepare(5, 1, &[(&[2], c(1.0))]).unwrap();
        e.pauli(&PauliWord::z(zp, Qudit(0), 3));
        let amp = e.amplitude(&[2]);
        let expect = omega(5, 6);
        assert!((amp - expect).norm() < 1e-12);

        let mut e = SparseEngine::prepare(5, 1, &[(&[4], c(1.0))]).unwrap();
        e.pauli(&PauliWord::x(zp, Qudit(0), 3));
        assert!((e.amplitude(&[2]).norm() - 1.0).abs() < 1e-12);
    }
}
