//! Generalized stabilizer tableau for qudits of odd prime dimension.
//!
//! The tableau keeps N stabilizer generators plus N destabilizers (rows
//! paired so the symplectic product of destabilizer i with generator j is
//! the Kronecker delta). The pairing makes determined measurement outcomes
//! cheap: expand the observable over the generators using destabilizer
//! products, then read the phase. Rows are stored sparsely and a
//! qudit-to-rows index keeps gate cost proportional to the rows actually
//! touched, so one instance scales to the few thousand qudits a full
//! sharing protocol needs.

use crate::engine::{Engine, PauliWord, Qudit};
use crate::field::Zp;
use crate::{Error, Result};
use rand::{Rng, RngCore};

#[derive(Clone)]
pub struct StabEngine {
    zp: Zp,
    stab: Vec<PauliWord>,
    destab: Vec<PauliWord>,
    /// qudit -> encoded row ids (row << 1 | destab bit), possibly stale;
    /// compacted on read.
    touch: Vec<Vec<u32>>,
    /// Visit stamps for duplicate elimination during compaction, indexed
    /// by encoded row id. Scratch state; carries no quantum information.
    mark: Vec<u64>,
    epoch: u64,
    /// Reusable buffers for the measurement path.
    ids_buf: Vec<u32>,
    exp_word: PauliWord,
    exp_scr: Vec<(Qudit, u64, u64)>,
}

const DESTAB: u32 = 1;

impl StabEngine {
    pub fn new(p: u64) -> StabEngine {
        StabEngine {
            zp: Zp::new(p),
            stab: Vec::new(),
            destab: Vec::new(),
            touch: Vec::new(),
            mark: Vec::new(),
            epoch: 0,
            ids_buf: Vec::new(),
            exp_word: PauliWord::identity(),
            exp_scr: Vec::new(),
        }
    }

    pub fn new_zeros(p: u64, n: usize) -> StabEngine {
        let mut e = StabEngine::new(p);
        e.alloc(n);
        e
    }

    fn row(&self, id: u32) -> &PauliWord {
        let i = (id >> 1) as usize;
        if id & DESTAB == 0 {
            &self.stab[i]
        } else {
            &self.destab[i]
        }
    }

    fn set_row(&mut self, id: u32, row: PauliWord) {
        // Duplicates are allowed here and squeezed out on the next
        // compaction; a membership scan per entry dominates the profile.
        // The tail check only suppresses immediate repeats.
        for &(q, _, _) in &row.entries {
            let list = &mut self.touch[q.0 as usize];
            if list.last() != Some(&id) {
                list.push(id);
            }
        }
        let i = (id >> 1) as usize;
        if id & DESTAB == 0 {
            self.stab[i] = row;
        } else {
            self.destab[i] = row;
        }
    }

    /// set_row that hands back the displaced entry buffer (cleared) so
    /// sweeps can recycle allocations.
    fn set_row_recycle(&mut self, id: u32, row: PauliWord) -> Vec<(Qudit, u64, u64)> {
        for &(q, _, _) in &row.entries {
            let list = &mut self.touch[q.0 as usize];
            if list.last() != Some(&id) {
                list.push(id);
            }
        }
        let i = (id >> 1) as usize;
        let slot = if id & DESTAB == 0 {
            &mut self.stab[i]
        } else {
            &mut self.destab[i]
        };
        let mut old = std::mem::replace(slot, row);
        old.entries.clear();
        old.entries
    }

    /// Drop duplicate and stale entries from q's touch list, in place.
    /// First-insertion order; dedup is by epoch stamp so the compaction
    /// stays linear in the raw list length.
    fn compact_touch(&mut self, q: Qudit) {
        let list = std::mem::take(&mut self.touch[q.0 as usize]);
        self.epoch += 1;
        let e = self.epoch;
        let mut live = Vec::with_capacity(list.len().min(16));
        for id in list {
            if self.mark[id as usize] == e {
                continue;
            }
            self.mark[id as usize] = e;
            if self.row(id).get(q) != (0, 0) {
                live.push(id);
            }
        }
        self.touch[q.0 as usize] = live;
    }

    fn rows_touching(&mut self, q: Qudit) -> Vec<u32> {
        self.compact_touch(q);
        self.touch[q.0 as usize].clone()
    }

    /// Union of row ids over the support of `word`, written into `out`.
    /// The union keeps first occurrences, so it is deterministic but not
    /// sorted; nothing downstream depends on the order.
    fn support_ids_into(&mut self, word: &PauliWord, out: &mut Vec<u32>) {
        out.clear();
        for idx in 0..word.entries.len() {
            let q = word.entries[idx].0;
            self.compact_touch(q);
            out.extend_from_slice(&self.touch[q.0 as usize]);
        }
        self.epoch += 1;
        let e = self.epoch;
        let mark = &mut self.mark;
        out.retain(|&id| {
            if mark[id as usize] == e {
                false
            } else {
                mark[id as usize] = e;
                true
            }
        });
    }

    /// Conjugate every row touching q by a single-qudit map on (a, b)
    /// returning the new exponents and a phase increment. Fused with the
    /// touch-list compaction: one walk updates rows and rebuilds the
    /// live list in place.
    fn map_qudit(&mut self, q: Qudit, f: impl Fn(u64, u64) -> (u64, u64, u64)) {
        let zp = self.zp;
        let list = std::mem::take(&mut self.touch[q.0 as usize]);
        self.epoch += 1;
        let e = self.epoch;
        let mut live = Vec::with_capacity(list.len().min(16));
        for id in list {
            if self.mark[id as usize] == e {
                continue;
            }
            self.mark[id as usize] = e;
            let i = (id >> 1) as usize;
            let row = if id & DESTAB == 0 {
                &mut self.stab[i]
            } else {
                &mut self.destab[i]
            };
            if let Ok(idx) = row.entries.binary_search_by_key(&q, |&(h, _, _)| h) {
                let (_, a, b) = row.entries[idx];
                let (na, nb, dp) = f(a, b);
                if na == 0 && nb == 0 {
                    row.entries.remove(idx);
                } else {
                    row.entries[idx] = (q, na, nb);
                    live.push(id);
                }
                row.phase = zp.add(row.phase, dp);
            }
        }
        self.touch[q.0 as usize] = live;
    }

    /// Replace the (a, b) pair of `row` at qudit q, inserting or removing
    /// the entry as needed, and register the row in the touch index.
    fn write_entry(row: &mut PauliWord, q: Qudit, a: u64, b: u64) -> bool {
        match row.entries.binary_search_by_key(&q, |&(h, _, _)| h) {
            Ok(idx) => {
                if a == 0 && b == 0 {
                    row.entries.remove(idx);
                    false
                } else {
                    row.entries[idx] = (q, a, b);
                    true
                }
            }
            Err(idx) => {
                if a == 0 && b == 0 {
                    false
                } else {
                    row.entries.insert(idx, (q, a, b));
                    true
                }
            }
        }
    }

    /// Exact stabilizer-group membership (including phase) for each word.
    /// The words must pairwise commute.
    pub fn is_stabilized_by(&mut self, words: &[PauliWord]) -> Result<bool> {
        let zp = self.zp;
        for (i, w) in words.iter().enumerate() {
            for v in &words[..i] {
                if !w.commutes_with(zp, v) {
                    return Err(Error::param("query words must pairwise commute"));
                }
            }
        }
        for w in words {
            let mut ids = std::mem::take(&mut self.ids_buf);
            self.support_ids_into(w, &mut ids);
            self.expand_into(w, &ids);
            self.ids_buf = ids;
            if self.exp_word != *w {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Product of generators with exponents given by the destabilizer
    /// pairing: the unique stabilizer-group element sharing w's symplectic
    /// part whenever w commutes with the whole group. Lands in
    /// `self.exp_word`; generators commute exactly, so the accumulation
    /// order over `ids` does not matter.
    fn expand_into(&mut self, w: &PauliWord, ids: &[u32]) {
        let zp = self.zp;
        let mut cand = std::mem::take(&mut self.exp_word);
        let mut scratch = std::mem::take(&mut self.exp_scr);
        cand.entries.clear();
        cand.phase = 0;
        for &id in ids {
            if id & DESTAB == DESTAB {
                let i = (id >> 1) as usize;
                let c = self.destab[i].symplectic(zp, w);
                if c != 0 {
                    cand.phase = cand.mul_scaled_into(zp, &self.stab[i], c, &mut scratch);
                    std::mem::swap(&mut cand.entries, &mut scratch);
                }
            }
        }
        self.exp_word = cand;
        self.exp_scr = scratch;
    }

    /// Outcome distribution of measuring a Pauli word without touching
    /// the state: `Some(v)` when the outcome is determined, `None` when
    /// it is uniform over the field.
    pub fn measure_outcome_dist(&mut self, word: &PauliWord) -> Option<u64> {
        let zp = self.zp;
        let mut ids = std::mem::take(&mut self.ids_buf);
        self.support_ids_into(word, &mut ids);
        let undetermined = ids
            .iter()
            .any(|&id| id & DESTAB == 0 && self.row(id).symplectic(zp, word) != 0);
        let out = if undetermined {
            None
        } else {
            self.expand_into(word, &ids);
            debug_assert_eq!(
                self.exp_word.entries, word.entries,
                "observable commutes with the group but is not in it"
            );
            Some(zp.sub(word.phase, self.exp_word.phase))
        };
        self.ids_buf = ids;
        out
    }

    /// Collapse the state onto the omega^v eigenspace of the word. When
    /// the outcome is already determined it must equal v.
    pub fn force_pauli(&mut self, word: &PauliWord, v: u64) {
        let zp = self.zp;
        let mut ids = std::mem::take(&mut self.ids_buf);
        self.support_ids_into(word, &mut ids);
        let pivot = ids
            .iter()
            .copied()
            .find(|&id| id & DESTAB == 0 && self.row(id).symplectic(zp, word) != 0);
        match pivot {
            Some(pid) => {
                let pi = (pid >> 1) as usize;
                let gp = self.stab[pi].clone();
                let uinv = zp.inv(gp.symplectic(zp, word));
                // Phases of gp^c for every exponent, hoisted out of the
                // row sweep.
                let selfdot: u64 = gp
                    .entries
                    .iter()
                    .fold(0, |acc, &(_, a, b)| zp.add(acc, zp.mul(a, b)));
                let half = (zp.p + 1) / 2;
                debug_assert!(zp.p <= 256);
                let mut powph = [0u64; 256];
                for c in 1..zp.p {
                    let tri = zp.mul(c, c - 1) * half % zp.p;
                    powph[c as usize] = zp.add(zp.mul(c, gp.phase), zp.mul(tri, selfdot));
                }
                let mut scratch: Vec<(Qudit, u64, u64)> = Vec::new();
                for &id in &ids {
                    if id == pid {
                        continue;
                    }
                    let row = self.row(id);
                    let w = row.symplectic(zp, word);
                    if w == 0 {
                        continue;
                    }
                    let c = zp.neg(zp.mul(w, uinv));
                    let phase = row.mul_scaled_ph_into(zp, &gp, c, powph[c as usize], &mut scratch);
                    let new = PauliWord {
                        entries: std::mem::take(&mut scratch),
                        phase,
                    };
                    scratch = self.set_row_recycle(id, new);
                }
                self.set_row(pid | DESTAB, gp.pow(zp, uinv));
                let mut g = word.clone();
                g.phase = zp.add(g.phase, zp.neg(v));
                self.set_row(pid, g);
            }
            None => {
                debug_assert_eq!(self.measure_outcome_dist(word), Some(v));
            }
        }
        self.ids_buf = ids;
    }

    /// Measure a general Pauli observable: outcome v means the state lies
    /// in the eigenspace omega^v of the word. Uniformly random (with
    /// collapse) when some generator anticommutes, else determined.
    pub fn measure_pauli(&mut self, word: &PauliWord, rng: &mut dyn RngCore) -> u64 {
        match self.measure_outcome_dist(word) {
            Some(v) => v,
            None => {
                let v = rng.gen_range(0..self.zp.p);
                self.force_pauli(word, v);
                v
            }
        }
    }

    /// Tableau invariants: canonical sparse rows, commuting generators,
    /// delta pairing between destabilizers and generators. Quadratic;
    /// meant for tests and debugging, not hot paths.
    pub fn validate(&self) -> Result<()> {
        let zp = self.zp;
        let n = self.stab.len();
        if self.destab.len() != n || self.touch.len() != n {
            return Err(Error::param("tableau size mismatch"));
        }
        let canon = |w: &PauliWord| -> bool {
            w.phase < zp.p
                && w.entries.windows(2).all(|v| v[0].0 < v[1].0)
                && w.entries
                    .iter()
                    .all(|&(q, a, b)| (a != 0 || b != 0) && a < zp.p && b < zp.p && (q.0 as usize) < n)
        };
        for w in self.stab.iter().chain(self.destab.iter()) {
            if !canon(w) {
                return Err(Error::param("non-canonical row"));
            }
        }
        for i in 0..n {
            for j in 0..i {
                if self.stab[i].symplectic(zp, &self.stab[j]) != 0 {
                    return Err(Error::param(format!("generators {i} and {j} anticommute")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1 } else { 0 };
                if self.destab[i].symplectic(zp, &self.stab[j]) != want {
                    return Err(Error::param(format!("pairing broken at ({i},{j})")));
                }
            }
        }
        Ok(())
    }

    pub fn generators(&self) -> &[PauliWord] {
        &self.stab
    }
}

impl Engine for StabEngine {
    fn zp(&self) -> Zp {
        self.zp
    }

    fn qudit_count(&self) -> usize {
        self.stab.len()
    }

    fn alloc(&mut self, count: usize) -> Vec<Qudit> {
        let zp = self.zp;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let q = Qudit(self.stab.len() as u32);
            let i = self.stab.len() as u32;
            self.stab.push(PauliWord::z(zp, q, 1));
            self.destab.push(PauliWord::x(zp, q, 1));
            self.touch.push(vec![i << 1, (i << 1) | DESTAB]);
            self.mark.push(0);
            self.mark.push(0);
            out.push(q);
        }
        out
    }

    fn fourier(&mut self, q: Qudit) {
        let zp = self.zp;
        self.map_qudit(q, |a, b| (zp.neg(b), a, zp.neg(zp.mul(a, b))));
    }

    fn fourier_inv(&mut self, q: Qudit) {
        let zp = self.zp;
        self.map_qudit(q, |a, b| (b, zp.neg(a), zp.neg(zp.mul(a, b))));
    }

    fn sum(&mut self, c: Qudit, t: Qudit) {
        assert!(c != t, "SUM control and target must differ");
        self.apply_addmul_rows(c, t, 1);
    }

    fn mult(&mut self, q: Qudit, k: u64) {
        let zp = self.zp;
        let k = k % zp.p;
        assert!(k != 0, "mult by zero is not unitary");
        let kinv = zp.inv(k);
        self.map_qudit(q, |a, b| (zp.mul(k, a), zp.mul(kinv, b), 0));
    }

    fn pauli(&mut self, word: &PauliWord) {
        let zp = self.zp;
        let mut ids = std::mem::take(&mut self.ids_buf);
        self.support_ids_into(word, &mut ids);
        for &id in &ids {
            let d = self.row(id).symplectic(zp, word);
            if d != 0 {
                let i = (id >> 1) as usize;
                let row = if id & DESTAB == 0 {
                    &mut self.stab[i]
                } else {
                    &mut self.destab[i]
                };
                row.phase = zp.add(row.phase, d);
            }
        }
        self.ids_buf = ids;
    }

    fn measure(&mut self, q: Qudit, rng: &mut dyn RngCore) -> u64 {
        let z = PauliWord::z(self.zp, q, 1);
        self.measure_pauli(&z, rng)
    }

    fn addmul(&mut self, src: Qudit, dst: Qudit, k: u64) {
        let k = k % self.zp.p;
        if k == 0 {
            return;
        }
        self.apply_addmul_rows(src, dst, k);
    }
}

impl StabEngine {
    /// Conjugation by |x_src, x_dst> -> |x_src, x_dst + k x_src>:
    /// a_dst += k a_src, b_src -= k b_dst, no phase.
    fn apply_addmul_rows(&mut self, src: Qudit, dst: Qudit, k: u64) {
        assert!(src != dst);
        let zp = self.zp;
        let mut ids = self.rows_touching(src);
        let dst_ids = self.rows_touching(dst);
        self.epoch += 1;
        let e = self.epoch;
        for &id in &ids {
            self.mark[id as usize] = e;
        }
        for id in dst_ids {
            if self.mark[id as usize] != e {
                ids.push(id);
            }
        }
        for id in ids {
            let i = (id >> 1) as usize;
            let row = if id & DESTAB == 0 {
                &mut self.stab[i]
            } else {
                &mut self.destab[i]
            };
            let (a_s, b_s) = row.get(src);
            let (a_d, b_d) = row.get(dst);
            let changed_dst = Self::write_entry(row, dst, zp.add(a_d, zp.mul(k, a_s)), b_d);
            let changed_src = Self::write_entry(row, src, a_s, zp.sub(b_s, zp.mul(k, b_d)));
            if changed_dst {
                self.touch[dst.0 as usize].push(id);
            }
            if changed_src {
                self.touch[src.0 as usize].push(id);
            }
        }
    }
}
