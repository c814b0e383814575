//! Tiny dense linear algebra over C used as an independent oracle in
//! tests: exact unitaries and state vectors for one or two qudits, built
//! directly from the defining formulas rather than from either simulation
//! backend.

use num_complex::Complex64;

pub fn omega(p: u64, e: u64) -> Complex64 {
    let theta = 2.0 * std::f64::consts::PI * (e % p) as f64 / p as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// Row-major dim x dim complex matrix.
#[derive(Clone, Debug)]
pub struct DenseOp {
    pub dim: usize,
    pub m: Vec<Complex64>,
}

impl DenseOp {
    pub fn zeros(dim: usize) -> DenseOp {
        DenseOp {
            dim,
            m: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> DenseOp {
        let mut op = DenseOp::zeros(dim);
        for i in 0..dim {
            op.m[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        op
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.m[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.m[r * self.dim + c] = v;
    }

    pub fn mul(&self, rhs: &DenseOp) -> DenseOp {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = DenseOp::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let v = self.get(i, k);
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let cur = out.get(i, j);
                    out.set(i, j, cur + v * rhs.get(k, j));
                }
            }
        }
        out
    }

    pub fn kron(&self, rhs: &DenseOp) -> DenseOp {
        let n = self.dim * rhs.dim;
        let mut out = DenseOp::zeros(n);
        for i1 in 0..self.dim {
            for j1 in 0..self.dim {
                for i2 in 0..rhs.dim {
                    for j2 in 0..rhs.dim {
                        out.set(
                            i1 * rhs.dim + i2,
                            j1 * rhs.dim + j2,
                            self.get(i1, j1) * rhs.get(i2, j2),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> DenseOp {
        let mut out = DenseOp::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.get(i, j) * v[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn approx_eq(&self, other: &DenseOp, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .m
                .iter()
                .zip(other.m.iter())
                .all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// X|x> = |x+1>.
pub fn op_x(p: u64) -> DenseOp {
    let p = p as usize;
    let mut op = DenseOp::zeros(p);
    for x in 0..p {
        op.set((x + 1) % p, x, Complex64::new(1.0, 0.0));
    }
    op
}

/// Z|x> = omega^x |x>.
pub fn op_z(p: u64) -> DenseOp {
    let mut op = DenseOp::zeros(p as usize);
    for x in 0..p {
        op.set(x as usize, x as usize, omega(p, x));
    }
    op
}

/// omega^phase X^a Z^b.
pub fn op_pauli1(p: u64, a: u64, b: u64, phase: u64) -> DenseOp {
    let mut op = DenseOp::zeros(p as usize);
    for x in 0..p {
        let amp = omega(p, phase + b * x);
        op.set(((x + a) % p) as usize, x as usize, amp);
    }
    op
}

/// F|x> = p^(-1/2) sum_y omega^(xy) |y>.
pub fn op_f(p: u64) -> DenseOp {
    let s = 1.0 / (p as f64).sqrt();
    let mut op = DenseOp::zeros(p as usize);
    for x in 0..p {
        for y in 0..p {
            op.set(y as usize, x as usize, omega(p, x * y) * s);
        }
    }
    op
}

/// |x> -> |kx>, k nonzero.
pub fn op_mult(p: u64, k: u64) -> DenseOp {
    assert!(k % p != 0);
    let mut op = DenseOp::zeros(p as usize);
    for x in 0..p {
        op.set((k * x % p) as usize, x as usize, Complex64::new(1.0, 0.0));
    }
    op
}

/// Two-qudit |c,t> -> |c, c+t> with index c*p + t.
pub fn op_sum(p: u64) -> DenseOp {
    let mut op = DenseOp::zeros((p * p) as usize);
    for c in 0..p {
        for t in 0..p {
            op.set(
                (c * p + (c + t) % p) as usize,
                (c * p + t) as usize,
                Complex64::new(1.0, 0.0),
            );
        }
    }
    op
}

pub fn basis(dim: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[i] = Complex64::new(1.0, 0.0);
    v
}

/// |<a|b>|^2 with no normalization assumptions on either side.
pub fn overlap2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ip: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    ip.norm_sqr() / (na * nb)
}
