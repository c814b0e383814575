//! The two backends must agree: for random Clifford circuits the
//! stabilizer engine's sampled measurement distribution is checked against
//! the exact distribution computed by branch enumeration on the sparse
//! state-vector engine.

use mpqc_core::engine::{Engine, PauliWord, Qudit};
use mpqc_core::field::Zp;
use mpqc_core::sparse::SparseEngine;
use mpqc_core::stab::StabEngine;
use mpqc_core::stats::chi_square_pvalue;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::HashMap;

const P: u64 = 5;
const NQ: u32 = 4;
const GATES: usize = 20;
const CIRCUITS: u64 = 1000;
const TRIALS: u64 = 10_000;

#[derive(Clone, Copy, Debug)]
enum Op {
    F(u32),
    Finv(u32),
    Sum(u32, u32),
    Mult(u32, u64),
    Pauli(u32, u64, u64),
    Meas(u32),
}

fn gen_circuit(rng: &mut ChaCha12Rng) -> Vec<Op> {
    let mut ops = Vec::with_capacity(GATES + NQ as usize);
    let mut meas_budget = 2; // intermediate measurements; full read-out at the end
    for _ in 0..GATES {
        let q = rng.gen_range(0..NQ);
        let op = match rng.gen_range(0..12) {
            0 | 1 => Op::F(q),
            2 => Op::Finv(q),
            3 | 4 | 5 => {
                let mut t = rng.gen_range(0..NQ);
                while t == q {
                    t = rng.gen_range(0..NQ);
                }
                Op::Sum(q, t)
            }
            6 | 7 => Op::Mult(q, rng.gen_range(1..P)),
            8 | 9 => Op::Pauli(q, rng.gen_range(0..P), rng.gen_range(0..P)),
            _ => {
                if meas_budget > 0 {
                    meas_budget -= 1;
                    Op::Meas(q)
                } else {
                    Op::F(q)
                }
            }
        };
        ops.push(op);
    }
    ops
}

fn run_stab(ops: &[Op], rng: &mut ChaCha12Rng) -> Vec<u64> {
    let mut e = StabEngine::new_zeros(P, NQ as usize);
    let zp = e.zp();
    let mut out = Vec::new();
    for &op in ops {
        match op {
            Op::F(q) => e.fourier(Qudit(q)),
            Op::Finv(q) => e.fourier_inv(Qudit(q)),
            Op::Sum(c, t) => e.sum(Qudit(c), Qudit(t)),
            Op::Mult(q, k) => e.mult(Qudit(q), k),
            Op::Pauli(q, a, b) => e.pauli(&PauliWord::single(zp, Qudit(q), a, b, 0)),
            Op::Meas(q) => out.push(e.measure(Qudit(q), rng)),
        }
    }
    for q in 0..NQ {
        out.push(e.measure(Qudit(q), rng));
    }
    out
}

/// Exact joint outcome distribution: recurse over intermediate-measurement
/// branches, then read the final all-qudit distribution straight off the
/// amplitudes.
fn exact_dist(ops: &[Op]) -> HashMap<Vec<u64>, f64> {
    let zp = Zp::new(P);
    let mut dist = HashMap::new();
    let mut stack = vec![(SparseEngine::new_zeros(P, NQ as usize), 0usize, Vec::new(), 1.0f64)];
    while let Some((mut state, at, prefix, weight)) = stack.pop() {
        let mut done = true;
        for (i, &op) in ops.iter().enumerate().skip(at) {
            match op {
                Op::F(q) => state.fourier(Qudit(q)),
                Op::Finv(q) => state.fourier_inv(Qudit(q)),
                Op::Sum(c, t) => state.sum(Qudit(c), Qudit(t)),
                Op::Mult(q, k) => state.mult(Qudit(q), k),
                Op::Pauli(q, a, b) => state.pauli(&PauliWord::single(zp, Qudit(q), a, b, 0)),
                Op::Meas(q) => {
                    let probs = state.marginal_probs(Qudit(q));
                    for (v, &w) in probs.iter().enumerate() {
                        if w < 1e-15 {
                            continue;
                        }
                        let mut branch = state.clone();
                        branch.collapse(Qudit(q), v as u64);
                        let mut pfx = prefix.clone();
                        pfx.push(v as u64);
                        stack.push((branch, i + 1, pfx, weight * w));
                    }
                    done = false;
                    break;
                }
            }
        }
        if !done {
            continue;
        }
        for (digits, amp) in state.support() {
            let w = amp.norm_sqr();
            if w < 1e-15 {
                continue;
            }
            let mut outcome = prefix.clone();
            outcome.extend(digits);
            *dist.entry(outcome).or_insert(0.0) += weight * w;
        }
    }
    dist
}

/// Merge cells until each expected count is at least 5, keeping the test
/// statistic well behaved.
fn merged_cells(dist: &HashMap<Vec<u64>, f64>, counts: &HashMap<Vec<u64>, u64>, trials: u64) -> (Vec<u64>, Vec<f64>) {
    let mut cells: Vec<(f64, u64)> = dist
        .iter()
        .map(|(k, &p)| (p, counts.get(k).copied().unwrap_or(0)))
        .collect();
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let min_expected = 5.0;
    let mut out_c = Vec::new();
    let mut out_p = Vec::new();
    let mut acc_p = 0.0;
    let mut acc_c = 0u64;
    for (p, c) in cells {
        acc_p += p;
        acc_c += c;
        if acc_p * trials as f64 >= min_expected {
            out_p.push(acc_p);
            out_c.push(acc_c);
            acc_p = 0.0;
            acc_c = 0;
        }
    }
    if acc_p > 0.0 || acc_c > 0 {
        if let (Some(lp), Some(lc)) = (out_p.last_mut(), out_c.last_mut()) {
            *lp += acc_p;
            *lc += acc_c;
        } else {
            out_p.push(acc_p);
            out_c.push(acc_c);
        }
    }
    (out_c, out_p)
}

#[test]
fn stab_matches_sparse_on_random_clifford_circuits() {
    let mut weak = 0u64;
    for circuit_idx in 0..CIRCUITS {
        let mut gen_rng = ChaCha12Rng::seed_from_u64(0xC0DE0000 + circuit_idx);
        let ops = gen_circuit(&mut gen_rng);
        let dist = exact_dist(&ops);
        let total: f64 = dist.values().sum();
        assert!(
            (total - 1.0).abs() < 1e-6,
            "circuit {circuit_idx}: exact distribution does not sum to 1"
        );

        let mut trial_rng = ChaCha12Rng::seed_from_u64(0x5EED0000 + circuit_idx);
        let mut counts: HashMap<Vec<u64>, u64> = HashMap::new();
        for _ in 0..TRIALS {
            let outcome = run_stab(&ops, &mut trial_rng);
            assert!(
                dist.contains_key(&outcome),
                "circuit {circuit_idx}: stabilizer produced impossible outcome {outcome:?}"
            );
            *counts.entry(outcome).or_insert(0) += 1;
        }

        let (cells, probs) = merged_cells(&dist, &counts, TRIALS);
        let pval = chi_square_pvalue(&cells, &probs);
        assert!(
            pval >= 1e-6,
            "circuit {circuit_idx}: distribution mismatch, p-value {pval:.2e}"
        );
        if pval < 1e-3 {
            weak += 1;
        }
    }
    // Roughly one sub-0.001 p-value is expected by chance over 1000 tests.
    assert!(weak <= 5, "{weak}/{CIRCUITS} circuits below p = 1e-3");
}

#[test]
fn engines_agree_on_fixed_entangling_circuit() {
    // One deterministic interleaving exercising every op, compared exactly.
    let ops = vec![
        Op::F(0),
        Op::Sum(0, 1),
        Op::Sum(0, 2),
        Op::Mult(1, 3),
        Op::Pauli(2, 1, 4),
        Op::F(3),
        Op::Sum(3, 0),
        Op::Finv(3),
        Op::Meas(1),
    ];
    let dist = exact_dist(&ops);
    let mut trial_rng = ChaCha12Rng::seed_from_u64(7);
    let mut counts: HashMap<Vec<u64>, u64> = HashMap::new();
    for _ in 0..TRIALS {
        *counts.entry(run_stab(&ops, &mut trial_rng)).or_insert(0) += 1;
    }
    for outcome in counts.keys() {
        assert!(dist.contains_key(outcome));
    }
    let (cells, probs) = merged_cells(&dist, &counts, TRIALS);
    assert!(chi_square_pvalue(&cells, &probs) > 1e-4);
}
