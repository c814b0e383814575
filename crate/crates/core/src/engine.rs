//! Common currency of the two simulation backends: qudit handles, Pauli
//! words with exact omega-phase tracking, and the gate interface that
//! protocol circuits are written against.

use crate::field::{LinOp, Zp};
use rand::{Rng, RngCore};

/// Index of a qudit within one simulation instance. Handles are never
/// reused; measured qudits stay allocated (collapsed).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Qudit(pub u32);

/// omega^phase * prod_q X_q^a Z_q^b with entries sorted by qudit and kept
/// sparse: no (0,0) exponent pairs are stored. The operator convention is
/// X|x> = |x+1>, Z|x> = omega^x |x>, and a word (a, b) acts Z first:
/// |x> -> omega^(phase + b.x) |x+a>.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PauliWord {
    pub entries: Vec<(Qudit, u64, u64)>,
    pub phase: u64,
}

impl PauliWord {
    pub fn identity() -> PauliWord {
        PauliWord {
            entries: Vec::new(),
            phase: 0,
        }
    }

    pub fn single(zp: Zp, q: Qudit, a: u64, b: u64, phase: u64) -> PauliWord {
        let (a, b) = (a % zp.p, b % zp.p);
        let entries = if a == 0 && b == 0 {
            Vec::new()
        } else {
            vec![(q, a, b)]
        };
        PauliWord {
            entries,
            phase: phase % zp.p,
        }
    }

    pub fn x(zp: Zp, q: Qudit, a: u64) -> PauliWord {
        PauliWord::single(zp, q, a, 0, 0)
    }

    pub fn z(zp: Zp, q: Qudit, b: u64) -> PauliWord {
        PauliWord::single(zp, q, 0, b, 0)
    }

    /// Build from parallel exponent vectors laid over the given handles.
    pub fn from_parts(zp: Zp, handles: &[Qudit], xpart: &[u64], zpart: &[u64], phase: u64) -> PauliWord {
        assert_eq!(handles.len(), xpart.len());
        assert_eq!(handles.len(), zpart.len());
        let mut entries: Vec<(Qudit, u64, u64)> = handles
            .iter()
            .zip(xpart.iter().zip(zpart.iter()))
            .map(|(&q, (&a, &b))| (q, a % zp.p, b % zp.p))
            .filter(|&(_, a, b)| a != 0 || b != 0)
            .collect();
        entries.sort_by_key(|&(q, _, _)| q);
        for w in entries.windows(2) {
            assert!(w[0].0 != w[1].0, "duplicate handle in pauli word");
        }
        PauliWord {
            entries,
            phase: phase % zp.p,
        }
    }

    /// (x exponent, z exponent) at qudit q.
    pub fn get(&self, q: Qudit) -> (u64, u64) {
        match self.entries.binary_search_by_key(&q, |&(h, _, _)| h) {
            Ok(i) => (self.entries[i].1, self.entries[i].2),
            Err(_) => (0, 0),
        }
    }

    pub fn support(&self) -> impl Iterator<Item = Qudit> + '_ {
        self.entries.iter().map(|&(q, _, _)| q)
    }

    pub fn is_identity(&self) -> bool {
        self.entries.is_empty() && self.phase == 0
    }

    /// Symplectic inner product sum_q (a_self b_other - a_other b_self);
    /// zero iff the words commute.
    pub fn symplectic(&self, zp: Zp, other: &PauliWord) -> u64 {
        let mut acc = 0;
        let mut i = 0;
        let mut j = 0;
        while i < self.entries.len() && j < other.entries.len() {
            let (qa, a1, b1) = self.entries[i];
            let (qb, a2, b2) = other.entries[j];
            match qa.cmp(&qb) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = zp.add(acc, zp.sub(zp.mul(a1, b2), zp.mul(a2, b1)));
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn commutes_with(&self, zp: Zp, other: &PauliWord) -> bool {
        self.symplectic(zp, other) == 0
    }

    /// Operator product self * other in canonical (X-then-Z per qudit)
    /// form. Moving other's X block left past self's Z block contributes
    /// omega^(a_other . b_self).
    pub fn mul(&self, zp: Zp, other: &PauliWord) -> PauliWord {
        let mut cross = 0;
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let mut i = 0;
        let mut j = 0;
        loop {
            match (self.entries.get(i), other.entries.get(j)) {
                (Some(&(qa, a1, b1)), Some(&(qb, a2, b2))) => match qa.cmp(&qb) {
                    std::cmp::Ordering::Less => {
                        entries.push((qa, a1, b1));
                        i += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        entries.push((qb, a2, b2));
                        j += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        cross = zp.add(cross, zp.mul(a2, b1));
                        let (a, b) = (zp.add(a1, a2), zp.add(b1, b2));
                        if a != 0 || b != 0 {
                            entries.push((qa, a, b));
                        }
                        i += 1;
                        j += 1;
                    }
                },
                (Some(&e), None) => {
                    entries.push(e);
                    i += 1;
                }
                (None, Some(&e)) => {
                    entries.push(e);
                    j += 1;
                }
                (None, None) => break,
            }
        }
        PauliWord {
            entries,
            phase: zp.add(zp.add(self.phase, other.phase), cross),
        }
    }

    /// Fused `self * other^k` writing the merged entries into `out`
    /// (cleared first) and returning the product phase. Avoids
    /// materializing the intermediate power; `out` lets callers recycle
    /// one buffer across a row sweep.
    pub fn mul_scaled_into(
        &self,
        zp: Zp,
        other: &PauliWord,
        k: u64,
        out: &mut Vec<(Qudit, u64, u64)>,
    ) -> u64 {
        let k = k % zp.p;
        if k == 0 {
            out.clear();
            out.extend_from_slice(&self.entries);
            return self.phase;
        }
        let selfdot: u64 = other
            .entries
            .iter()
            .fold(0, |acc, &(_, a, b)| zp.add(acc, zp.mul(a, b)));
        let tri = zp.mul(k, k - 1) * ((zp.p + 1) / 2) % zp.p;
        let pow_phase = zp.add(zp.mul(k, other.phase), zp.mul(tri, selfdot));
        self.mul_scaled_ph_into(zp, other, k, pow_phase, out)
    }

    /// Merge step of `mul_scaled_into` with the phase of `other^k`
    /// supplied by the caller, so sweeps multiplying by powers of one
    /// fixed word can hoist the phase computation.
    pub fn mul_scaled_ph_into(
        &self,
        zp: Zp,
        other: &PauliWord,
        k: u64,
        pow_phase: u64,
        out: &mut Vec<(Qudit, u64, u64)>,
    ) -> u64 {
        out.clear();
        let mut phase = zp.add(self.phase, pow_phase);
        let mut i = 0;
        let mut j = 0;
        loop {
            match (self.entries.get(i), other.entries.get(j)) {
                (Some(&(qa, a1, b1)), Some(&(qb, a2, b2))) => match qa.cmp(&qb) {
                    std::cmp::Ordering::Less => {
                        out.push((qa, a1, b1));
                        i += 1;
                    }
                    std::cmp::Ordering::Greater => {
                        out.push((qb, zp.mul(k, a2), zp.mul(k, b2)));
                        j += 1;
                    }
                    std::cmp::Ordering::Equal => {
                        let (a2, b2) = (zp.mul(k, a2), zp.mul(k, b2));
                        phase = zp.add(phase, zp.mul(a2, b1));
                        let (a, b) = (zp.add(a1, a2), zp.add(b1, b2));
                        if a != 0 || b != 0 {
                            out.push((qa, a, b));
                        }
                        i += 1;
                        j += 1;
                    }
                },
                (Some(&e), None) => {
                    out.push(e);
                    i += 1;
                }
                (None, Some(&(qb, a2, b2))) => {
                    out.push((qb, zp.mul(k, a2), zp.mul(k, b2)));
                    j += 1;
                }
                (None, None) => break,
            }
        }
        phase
    }

    /// k-th operator power: exponents scale by k and the phase picks up
    /// k(k-1)/2 * sum_q a_q b_q from reordering (p odd, so the half-integer
    /// is exact mod p).
    pub fn pow(&self, zp: Zp, k: u64) -> PauliWord {
        let k = k % zp.p;
        if k == 0 {
            return PauliWord::identity();
        }
        let selfdot: u64 = self
            .entries
            .iter()
            .fold(0, |acc, &(_, a, b)| zp.add(acc, zp.mul(a, b)));
        let tri = zp.mul(k, k - 1) * ((zp.p + 1) / 2) % zp.p; // k(k-1)/2 mod p
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|&(q, a, b)| (q, zp.mul(k, a), zp.mul(k, b)))
            .filter(|&(_, a, b)| a != 0 || b != 0)
            .collect();
        PauliWord {
            entries,
            phase: zp.add(zp.mul(k, self.phase), zp.mul(tri, selfdot)),
        }
    }

    pub fn inverse(&self, zp: Zp) -> PauliWord {
        self.pow(zp, zp.p - 1)
    }
}

/// Gate interface shared by the stabilizer and sparse-state backends.
/// Protocol circuits are generic over this, so any circuit can be replayed
/// on the exact simulator as an oracle.
pub trait Engine {
    fn zp(&self) -> Zp;
    fn qudit_count(&self) -> usize;
    /// Allocate fresh |0> qudits.
    fn alloc(&mut self, count: usize) -> Vec<Qudit>;
    /// |x> -> p^(-1/2) sum_y omega^(xy) |y>.
    fn fourier(&mut self, q: Qudit);
    fn fourier_inv(&mut self, q: Qudit);
    /// |c,t> -> |c, c+t>.
    fn sum(&mut self, c: Qudit, t: Qudit);
    /// |x> -> |kx>, k nonzero.
    fn mult(&mut self, q: Qudit, k: u64);
    fn pauli(&mut self, word: &PauliWord);
    /// Computational-basis measurement; the qudit stays allocated,
    /// collapsed to the outcome.
    fn measure(&mut self, q: Qudit, rng: &mut dyn RngCore) -> u64;

    /// x[dst] += k x[src] on the computational basis.
    fn addmul(&mut self, src: Qudit, dst: Qudit, k: u64) {
        let k = k % self.zp().p;
        if k == 0 {
            return;
        }
        let kinv = self.zp().inv(k);
        self.mult(src, k);
        self.sum(src, dst);
        self.mult(src, kinv);
    }

    /// Run a synthesized invertible map over the listed handles.
    fn apply_linear(&mut self, ops: &[LinOp], handles: &[Qudit]) {
        for &op in ops {
            match op {
                LinOp::AddMul { src, dst, k } => self.addmul(handles[src], handles[dst], k),
                LinOp::Scale { q, k } => self.mult(handles[q], k),
            }
        }
    }
}

/// Uniform field element.
pub fn draw_value(zp: Zp, rng: &mut dyn RngCore) -> u64 {
    rng.gen_range(0..zp.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{self, DenseOp};

    fn zp() -> Zp {
        Zp::new(5)
    }

    fn dense1(zp: Zp, w: &PauliWord) -> DenseOp {
        // Single-qudit dense form of a word supported on Qudit(0).
        assert!(w.entries.len() <= 1);
        let (a, b) = w.get(Qudit(0));
        oracle::op_pauli1(zp.p, a, b, w.phase)
    }

    #[test]
    fn single_qudit_products_match_dense() {
        let zp = zp();
        for a1 in 0..5 {
            for b1 in 0..5 {
                for a2 in 0..5 {
                    for b2 in 0..5 {
                        let w1 = PauliWord::single(zp, Qudit(0), a1, b1, 0);
                        let w2 = PauliWord::single(zp, Qudit(0), a2, b2, 0);
                        let got = dense1(zp, &w1.mul(zp, &w2));
                        let expect = dense1(zp, &w1).mul(&dense1(zp, &w2));
                        assert!(
                            got.approx_eq(&expect, 1e-9),
                            "product mismatch at ({a1},{b1})*({a2},{b2})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn single_qudit_powers_match_dense() {
        let zp = zp();
        for a in 0..5 {
            for b in 0..5 {
                for k in 0..5 {
                    let w = PauliWord::single(zp, Qudit(0), a, b, 2);
                    let got = dense1(zp, &w.pow(zp, k));
                    let mut expect = DenseOp::identity(5);
                    for _ in 0..k {
                        expect = expect.mul(&dense1(zp, &w));
                    }
                    assert!(got.approx_eq(&expect, 1e-9), "power mismatch ({a},{b})^{k}");
                }
            }
        }
    }

    #[test]
    fn inverse_cancels() {
        let zp = zp();
        let w = PauliWord::from_parts(zp, &[Qudit(0), Qudit(2)], &[1, 3], &[4, 2], 3);
        assert!(w.mul(zp, &w.inverse(zp)).is_identity());
        assert!(w.inverse(zp).mul(zp, &w).is_identity());
    }

    #[test]
    fn symplectic_detects_commutation() {
        let zp = zp();
        let x = PauliWord::x(zp, Qudit(0), 1);
        let z = PauliWord::z(zp, Qudit(0), 1);
        assert_eq!(x.symplectic(zp, &z), 1);
        assert_eq!(z.symplectic(zp, &x), 4);
        assert!(x.commutes_with(zp, &PauliWord::z(zp, Qudit(1), 2)));
        // X1 X2 commutes with Z1^-1 Z2.
        let xx = PauliWord::from_parts(zp, &[Qudit(0), Qudit(1)], &[1, 1], &[0, 0], 0);
        let zz = PauliWord::from_parts(zp, &[Qudit(0), Qudit(1)], &[0, 0], &[4, 1], 0);
        assert!(xx.commutes_with(zp, &zz));
    }

    #[test]
    fn two_qudit_products_match_dense() {
        let zp = zp();
        let mk = |a0, b0, a1, b1, ph| {
            PauliWord::from_parts(zp, &[Qudit(0), Qudit(1)], &[a0, a1], &[b0, b1], ph)
        };
        let dense2 = |w: &PauliWord| {
            let (a0, b0) = w.get(Qudit(0));
            let (a1, b1) = w.get(Qudit(1));
            oracle::op_pauli1(zp.p, a0, b0, w.phase).kron(&oracle::op_pauli1(zp.p, a1, b1, 0))
        };
        let cases = [
            (mk(1, 2, 3, 4, 0), mk(2, 0, 1, 1, 3)),
            (mk(0, 1, 4, 0, 2), mk(3, 3, 0, 2, 0)),
            (mk(4, 4, 1, 0, 1), mk(1, 1, 4, 4, 4)),
        ];
        for (w1, w2) in cases {
            let got = dense2(&w1.mul(zp, &w2));
            let expect = dense2(&w1).mul(&dense2(&w2));
            assert!(got.approx_eq(&expect, 1e-9));
        }
    }
}
