//! Arithmetic in Z_p and the small evaluation codes built on it:
//! encoding, interpolation, erasure decoding, bounded-distance error
//! decoding, and dense linear algebra (matrix inverses and synthesis of
//! invertible maps into elementary add/scale operations).
//!
//! Everything here is exact and brute-force friendly: the protocols run at
//! p <= 11 with code lengths <= 7, so nearest-codeword search is cheap and
//! correct by construction.

use crate::{Error, Result};

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2;
    while q * q <= p {
        if p % q == 0 {
            return false;
        }
        q += 1;
    }
    true
}

/// Prime modulus context. Field values are canonical `u64` in `[0, p)`.
/// The hot operations avoid hardware division: add/sub by conditional
/// subtraction, mul by a reciprocal multiply-high reduction (exact for
/// products far below 2^32, which p <= 251 guarantees).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Zp {
    pub p: u64,
    magic: u64,
}

impl Zp {
    pub fn new(p: u64) -> Zp {
        debug_assert!(is_prime(p), "modulus {p} must be prime");
        Zp {
            p,
            magic: u64::MAX / p + 1,
        }
    }

    #[inline]
    fn reduce(self, x: u64) -> u64 {
        let low = self.magic.wrapping_mul(x);
        ((low as u128 * self.p as u128) >> 64) as u64
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.p && b < self.p);
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.p && b < self.p);
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        debug_assert!(a < self.p);
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        debug_assert!(a < self.p && b < self.p);
        self.reduce(a * b)
    }

    pub fn pow(self, a: u64, mut e: u64) -> u64 {
        let mut base = a % self.p;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `a` must be nonzero.
    #[inline]
    pub fn inv(self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0, "inverse of zero");
        self.pow(a, self.p - 2)
    }

    /// Canonical representative of a signed value.
    #[inline]
    pub fn from_i64(self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    pub fn elements(self) -> impl Iterator<Item = u64> {
        0..self.p
    }
}

/// Coefficients lowest-degree first; `coeffs[0]` is the free coefficient
/// f(0). Trailing zeros are allowed and ignored by `degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<u64>,
}

impl Poly {
    pub fn new(coeffs: Vec<u64>) -> Poly {
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: vec![0] }
    }

    /// Degree with the convention that the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    pub fn free_coeff(&self) -> u64 {
        self.coeffs.first().copied().unwrap_or(0)
    }

    pub fn eval(&self, zp: Zp, x: u64) -> u64 {
        let x = x % zp.p;
        let mut acc = 0;
        for &c in self.coeffs.iter().rev() {
            acc = zp.add(zp.mul(acc, x), c);
        }
        acc
    }

    /// Canonical form: trailing zeros stripped, at least one coefficient.
    pub fn normalized(mut self, zp: Zp) -> Poly {
        for c in &mut self.coeffs {
            *c %= zp.p;
        }
        let d = self.degree();
        self.coeffs.truncate(d + 1);
        if self.coeffs.is_empty() {
            self.coeffs.push(0);
        }
        self
    }
}

/// A received word of an evaluation code, with per-position erasure flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codeword {
    pub symbols: Vec<u64>,
    pub erased: Vec<bool>,
}

impl Codeword {
    pub fn plain(symbols: Vec<u64>) -> Codeword {
        let n = symbols.len();
        Codeword {
            symbols,
            erased: vec![false; n],
        }
    }

    pub fn with_erasures(symbols: Vec<u64>, erased: Vec<bool>) -> Codeword {
        assert_eq!(symbols.len(), erased.len());
        Codeword { symbols, erased }
    }

    pub fn erase(&mut self, pos: usize) {
        self.erased[pos] = true;
    }

    pub fn live_count(&self) -> usize {
        self.erased.iter().filter(|&&e| !e).count()
    }
}

/// Check that evaluation points are pairwise distinct and nonzero.
pub fn check_points(zp: Zp, pts: &[u64]) -> Result<()> {
    for (i, &x) in pts.iter().enumerate() {
        if x % zp.p == 0 {
            return Err(Error::param("evaluation points must be nonzero"));
        }
        if pts[..i].iter().any(|&y| y % zp.p == x % zp.p) {
            return Err(Error::param("evaluation points must be distinct"));
        }
    }
    Ok(())
}

/// Evaluate `poly` at each point. Fails if the polynomial exceeds the
/// declared code degree.
pub fn poly_eval_encode(zp: Zp, poly: &Poly, pts: &[u64], max_degree: usize) -> Result<Vec<u64>> {
    if poly.degree() > max_degree {
        return Err(Error::param(format!(
            "polynomial degree {} exceeds code degree {max_degree}",
            poly.degree()
        )));
    }
    Ok(pts.iter().map(|&x| poly.eval(zp, x)).collect())
}

fn poly_mul(zp: Zp, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = zp.add(out[i + j], zp.mul(ai, bj));
        }
    }
    out
}

/// Unique polynomial of degree <= `max_degree` through all points, or a
/// decode failure if the points are inconsistent (tampering signal).
pub fn interpolate(zp: Zp, points: &[(u64, u64)], max_degree: usize) -> Result<Poly> {
    if points.len() < max_degree + 1 {
        return Err(Error::param(format!(
            "need at least {} points for degree {max_degree}, got {}",
            max_degree + 1,
            points.len()
        )));
    }
    for (i, &(x, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|&(y, _)| y % zp.p == x % zp.p) {
            return Err(Error::param("interpolation points must have distinct x"));
        }
    }

    // Lagrange through the first max_degree+1 points.
    let base = &points[..max_degree + 1];
    let mut coeffs = vec![0; max_degree + 1];
    for (i, &(xi, yi)) in base.iter().enumerate() {
        let mut num = vec![1];
        let mut denom = 1;
        for (j, &(xj, _)) in base.iter().enumerate() {
            if j == i {
                continue;
            }
            num = poly_mul(zp, &num, &[zp.neg(xj), 1]);
            denom = zp.mul(denom, zp.sub(xi, xj));
        }
        let scale = zp.mul(yi, zp.inv(denom));
        for (c, &n) in coeffs.iter_mut().zip(num.iter()) {
            *c = zp.add(*c, zp.mul(n, scale));
        }
    }
    let poly = Poly::new(coeffs).normalized(zp);

    // Every remaining point must agree, else no such polynomial exists.
    for &(x, y) in &points[max_degree + 1..] {
        if poly.eval(zp, x) != y % zp.p {
            return Err(Error::decode(
                "points are inconsistent with any polynomial of the declared degree",
            ));
        }
    }
    Ok(poly)
}

/// Interpolate the live positions of `word`; fail on inconsistency or when
/// fewer than `degree + 1` positions survive.
pub fn erasure_decode(zp: Zp, word: &Codeword, pts: &[u64], degree: usize) -> Result<Poly> {
    if word.symbols.len() != pts.len() {
        return Err(Error::param("codeword length does not match points"));
    }
    let live: Vec<(u64, u64)> = pts
        .iter()
        .zip(word.symbols.iter())
        .zip(word.erased.iter())
        .filter(|&(_, &e)| !e)
        .map(|((&x, &y), _)| (x, y))
        .collect();
    if live.len() < degree + 1 {
        return Err(Error::decode(format!(
            "only {} unerased symbols, need {}",
            live.len(),
            degree + 1
        )));
    }
    interpolate(zp, &live, degree)
}

/// Bounded-distance decoding by exhaustive search over all p^(degree+1)
/// candidate polynomials: returns the unique polynomial within Hamming
/// distance `e_max` of the live positions together with the error
/// positions, or a decode failure when none exists (detection).
pub fn error_decode(
    zp: Zp,
    word: &Codeword,
    pts: &[u64],
    degree: usize,
    e_max: usize,
) -> Result<(Poly, Vec<usize>)> {
    if word.symbols.len() != pts.len() {
        return Err(Error::param("codeword length does not match points"));
    }
    let live = word.live_count();
    if live < degree + 1 + 2 * e_max {
        return Err(Error::param(format!(
            "bounded-distance precondition violated: {live} live symbols, degree {degree}, e_max {e_max}"
        )));
    }

    let eval = |coeffs: &[u64], x: u64| {
        let x = x % zp.p;
        let mut acc = 0;
        for &c in coeffs.iter().rev() {
            acc = zp.add(zp.mul(acc, x), c);
        }
        acc
    };
    let mut found: Option<(Poly, Vec<usize>)> = None;
    let mut coeffs = vec![0u64; degree + 1];
    loop {
        let mut errs = Vec::new();
        for (i, (&x, &y)) in pts.iter().zip(word.symbols.iter()).enumerate() {
            if word.erased[i] {
                continue;
            }
            if eval(&coeffs, x) != y % zp.p {
                errs.push(i);
                if errs.len() > e_max {
                    break;
                }
            }
        }
        if errs.len() <= e_max {
            if found.is_some() {
                // Unreachable when the precondition holds; defensive.
                return Err(Error::decode("ambiguous decode"));
            }
            found = Some((Poly::new(coeffs.clone()).normalized(zp), errs));
        }

        // Odometer over Z_p^(degree+1).
        let mut k = 0;
        loop {
            if k == coeffs.len() {
                return found.ok_or_else(|| {
                    Error::decode(format!("no codeword within distance {e_max}"))
                });
            }
            coeffs[k] += 1;
            if coeffs[k] < zp.p {
                break;
            }
            coeffs[k] = 0;
            k += 1;
        }
    }
}

/// Lagrange weights at zero: f(0) = sum_i w_i f(pts[i]) for every
/// polynomial of degree < pts.len().
pub fn lagrange_at_zero(zp: Zp, pts: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(pts.len());
    for (i, &xi) in pts.iter().enumerate() {
        let mut w = 1;
        for (j, &xj) in pts.iter().enumerate() {
            if j == i {
                continue;
            }
            w = zp.mul(w, zp.mul(xj, zp.inv(zp.sub(xj, xi))));
        }
        out.push(w);
    }
    out
}

/// Dense row-major matrix over Z_p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    a: Vec<u64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            a: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(zp: Zp, rows: Vec<Vec<u64>>) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        Mat {
            rows: r,
            cols: c,
            a: rows.into_iter().flatten().map(|v| v % zp.p).collect(),
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.a[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.a[r * self.cols + c] = v;
    }

    pub fn mul(&self, zp: Zp, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows);
        let mut out = Mat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self.get(i, k);
                if v == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, zp.add(cur, zp.mul(v, rhs.get(k, j))));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, zp: Zp, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = 0;
                for j in 0..self.cols {
                    acc = zp.add(acc, zp.mul(self.get(i, j), v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Gauss-Jordan inverse; fails on singular input.
    pub fn inverse(&self, zp: Zp) -> Result<Mat> {
        if self.rows != self.cols {
            return Err(Error::param("inverse of non-square matrix"));
        }
        let n = self.rows;
        let mut w = self.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| w.get(r, col) != 0)
                .ok_or_else(|| Error::param("singular matrix"))?;
            if pivot != col {
                for j in 0..n {
                    let (x, y) = (w.get(col, j), w.get(pivot, j));
                    w.set(col, j, y);
                    w.set(pivot, j, x);
                    let (x, y) = (inv.get(col, j), inv.get(pivot, j));
                    inv.set(col, j, y);
                    inv.set(pivot, j, x);
                }
            }
            let scale = zp.inv(w.get(col, col));
            for j in 0..n {
                w.set(col, j, zp.mul(w.get(col, j), scale));
                inv.set(col, j, zp.mul(inv.get(col, j), scale));
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = w.get(r, col);
                if f == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = zp.sub(w.get(r, j), zp.mul(f, w.get(col, j)));
                    w.set(r, j, v);
                    let v = zp.sub(inv.get(r, j), zp.mul(f, inv.get(col, j)));
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }
}

/// Vandermonde-style matrix: row i is pts[i]^0 .. pts[i]^(ncols-1).
pub fn vandermonde(zp: Zp, pts: &[u64], ncols: usize) -> Mat {
    let mut m = Mat::zeros(pts.len(), ncols);
    for (i, &x) in pts.iter().enumerate() {
        for j in 0..ncols {
            m.set(i, j, zp.pow(x, j as u64));
        }
    }
    m
}

/// Elementary invertible operations on a register of qudits (or a vector of
/// classical values). Invertible linear maps are executed as sequences of
/// these; both simulation engines implement them natively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinOp {
    /// x[dst] += k * x[src]
    AddMul { src: usize, dst: usize, k: u64 },
    /// x[q] *= k, k nonzero
    Scale { q: usize, k: u64 },
}

impl LinOp {
    pub fn inverse(self, zp: Zp) -> LinOp {
        match self {
            LinOp::AddMul { src, dst, k } => LinOp::AddMul {
                src,
                dst,
                k: zp.neg(k),
            },
            LinOp::Scale { q, k } => LinOp::Scale { q, k: zp.inv(k) },
        }
    }

    /// Apply to a classical vector in place.
    pub fn apply(self, zp: Zp, v: &mut [u64]) {
        match self {
            LinOp::AddMul { src, dst, k } => {
                v[dst] = zp.add(v[dst], zp.mul(k, v[src]));
            }
            LinOp::Scale { q, k } => v[q] = zp.mul(v[q], k),
        }
    }
}

/// Decompose an invertible matrix into elementary operations such that
/// applying them in order maps x to M x.
pub fn synthesize_linear(zp: Zp, m: &Mat) -> Result<Vec<LinOp>> {
    if m.rows != m.cols {
        return Err(Error::param("linear synthesis needs a square matrix"));
    }
    let n = m.rows;
    let mut w = m.clone();
    // Forward pass: reduce w to the identity, recording each row operation
    // (as a state map, a row operation is left-multiplication by an
    // elementary matrix). The answer is the reversed list of inverses.
    let mut steps: Vec<LinOp> = Vec::new();
    let addmul = |w: &mut Mat, src: usize, dst: usize, k: u64, steps: &mut Vec<LinOp>| {
        if k == 0 {
            return;
        }
        for j in 0..n {
            let v = zp.add(w.get(dst, j), zp.mul(k, w.get(src, j)));
            w.set(dst, j, v);
        }
        steps.push(LinOp::AddMul { src, dst, k });
    };
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| w.get(r, col) != 0)
            .ok_or_else(|| Error::param("singular matrix in linear synthesis"))?;
        if pivot != col {
            // Swap rows col <-> pivot out of add/scale primitives.
            addmul(&mut w, col, pivot, 1, &mut steps);
            addmul(&mut w, pivot, col, zp.neg(1), &mut steps);
            addmul(&mut w, col, pivot, 1, &mut steps);
            let k = zp.neg(1);
            for j in 0..n {
                w.set(col, j, zp.mul(w.get(col, j), k));
            }
            steps.push(LinOp::Scale { q: col, k });
        }
        let piv = w.get(col, col);
        if piv != 1 {
            let k = zp.inv(piv);
            for j in 0..n {
                w.set(col, j, zp.mul(w.get(col, j), k));
            }
            steps.push(LinOp::Scale { q: col, k });
        }
        for row in 0..n {
            if row != col {
                let f = w.get(row, col);
                addmul(&mut w, col, row, zp.neg(f), &mut steps);
            }
        }
    }
    Ok(steps.into_iter().rev().map(|op| op.inverse(zp)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp5() -> Zp {
        Zp::new(5)
    }

    /// Independent oracle: all codewords of degree <= `degree` within
    /// Hamming distance `e_max` of the live positions of `word`.
    fn nearest_codewords(
        zp: Zp,
        word: &Codeword,
        pts: &[u64],
        degree: usize,
        e_max: usize,
    ) -> Vec<(Poly, Vec<usize>)> {
        let mut hits = Vec::new();
        let ncand = zp.p.pow(degree as u32 + 1);
        for idx in 0..ncand {
            let mut v = idx;
            let mut coeffs = Vec::with_capacity(degree + 1);
            for _ in 0..=degree {
                coeffs.push(v % zp.p);
                v /= zp.p;
            }
            let cand = Poly::new(coeffs);
            let errs: Vec<usize> = (0..pts.len())
                .filter(|&i| !word.erased[i] && cand.eval(zp, pts[i]) != word.symbols[i] % zp.p)
                .collect();
            if errs.len() <= e_max {
                hits.push((cand.normalized(zp), errs));
            }
        }
        hits
    }

    #[test]
    fn field_ops() {
        let zp = zp5();
        assert_eq!(zp.add(3, 4), 2);
        assert_eq!(zp.sub(1, 3), 3);
        assert_eq!(zp.neg(0), 0);
        assert_eq!(zp.mul(3, 4), 2);
        assert_eq!(zp.pow(2, 4), 1);
        for a in 1..5 {
            assert_eq!(zp.mul(a, zp.inv(a)), 1);
        }
        assert_eq!(zp.from_i64(-3), 2);
        assert!(is_prime(2) && is_prime(5) && is_prime(11));
        assert!(!is_prime(1) && !is_prime(9));
    }

    #[test]
    fn encode_examples() {
        let zp = zp5();
        let pts = [1, 2, 3];
        let f = Poly::new(vec![2, 3]);
        assert_eq!(poly_eval_encode(zp, &f, &pts, 1).unwrap(), vec![0, 3, 1]);
        assert_eq!(
            poly_eval_encode(zp, &Poly::zero(), &pts, 1).unwrap(),
            vec![0, 0, 0]
        );
        assert_eq!(
            poly_eval_encode(zp, &Poly::new(vec![4]), &pts, 1).unwrap(),
            vec![4, 4, 4]
        );
        assert!(poly_eval_encode(zp, &Poly::new(vec![0, 0, 1]), &pts, 1).is_err());
    }

    #[test]
    fn interpolate_examples() {
        let zp = zp5();
        let f = interpolate(zp, &[(1, 0), (2, 3), (3, 1)], 1).unwrap();
        assert_eq!(f.coeffs, vec![2, 3]);
        let f = interpolate(zp, &[(1, 1), (2, 2), (3, 3)], 1).unwrap();
        assert_eq!(f.coeffs, vec![0, 1]);
        assert!(matches!(
            interpolate(zp, &[(1, 0), (2, 3), (3, 2)], 1),
            Err(Error::Decode(_))
        ));
        assert!(interpolate(zp, &[(1, 0)], 1).is_err());
        assert!(interpolate(zp, &[(1, 0), (1, 1), (2, 0)], 1).is_err());
    }

    #[test]
    fn interpolate_matches_bruteforce_on_all_words() {
        // Success of interpolate over all length-3 words at degree 1 agrees
        // with exhaustive search over all 25 candidate polynomials.
        let zp = zp5();
        let pts = [1, 2, 3];
        for idx in 0..125u64 {
            let word = vec![idx % 5, (idx / 5) % 5, (idx / 25) % 5];
            let points: Vec<(u64, u64)> = pts.iter().copied().zip(word.iter().copied()).collect();
            let got = interpolate(zp, &points, 1);
            let hits = nearest_codewords(zp, &Codeword::plain(word), &pts, 1, 0);
            match got {
                Ok(f) => {
                    assert_eq!(hits.len(), 1);
                    assert_eq!(f, hits[0].0);
                }
                Err(_) => assert!(hits.is_empty()),
            }
        }
    }

    #[test]
    fn interpolate_roundtrip_degree3() {
        let zp = zp5();
        let pts = [1, 2, 3, 4];
        for idx in 0..625u64 {
            let coeffs = vec![idx % 5, (idx / 5) % 5, (idx / 25) % 5, (idx / 125) % 5];
            let f = Poly::new(coeffs).normalized(zp);
            let word = poly_eval_encode(zp, &f, &pts, 3).unwrap();
            let points: Vec<(u64, u64)> = pts.iter().copied().zip(word).collect();
            assert_eq!(interpolate(zp, &points, 3).unwrap(), f);
        }
    }

    #[test]
    fn erasure_examples() {
        let zp = zp5();
        let pts = [1, 2, 3];
        let mut w = Codeword::plain(vec![0, 3, 1]);
        w.erase(2);
        assert_eq!(erasure_decode(zp, &w, &pts, 1).unwrap().coeffs, vec![2, 3]);

        let all = Codeword::with_erasures(vec![0, 0, 0], vec![true, true, true]);
        assert!(erasure_decode(zp, &all, &pts, 1).is_err());

        let bad = Codeword::plain(vec![0, 3, 2]);
        assert!(matches!(
            erasure_decode(zp, &bad, &pts, 1),
            Err(Error::Decode(_))
        ));
    }

    #[test]
    fn error_decode_examples() {
        let zp = Zp::new(7);
        let pts = [1, 2, 3, 4, 5];
        let mut word = Codeword::plain(vec![1, 2, 3, 4, 5]);
        word.symbols[1] = 0;
        let (f, errs) = error_decode(zp, &word, &pts, 1, 1).unwrap();
        assert_eq!(f.coeffs, vec![0, 1]);
        assert_eq!(errs, vec![1]);

        let clean = Codeword::plain(vec![1, 2, 3, 4, 5]);
        let (f, errs) = error_decode(zp, &clean, &pts, 1, 1).unwrap();
        assert_eq!(f.coeffs, vec![0, 1]);
        assert!(errs.is_empty());

        let mut two = Codeword::plain(vec![1, 2, 3, 4, 5]);
        two.symbols[0] = 3;
        two.symbols[3] = 0;
        assert!(matches!(
            error_decode(zp, &two, &pts, 1, 1),
            Err(Error::Decode(_))
        ));
    }

    #[test]
    fn error_decode_roundtrip_exhaustive() {
        // All polynomials x all error patterns of weight <= e_max, for
        // (p, m, degree) in {(5, 5, <=2), (7, 7, <=2)}.
        for &(p, m) in &[(5u64, 5usize), (7, 7)] {
            let zp = Zp::new(p);
            let pts: Vec<u64> = (1..=m as u64).collect();
            for degree in 0..=2usize {
                let e_max = (m - degree - 1) / 2;
                let npoly = p.pow(degree as u32 + 1);
                for idx in 0..npoly {
                    let mut v = idx;
                    let mut coeffs = Vec::new();
                    for _ in 0..=degree {
                        coeffs.push(v % p);
                        v /= p;
                    }
                    let f = Poly::new(coeffs).normalized(zp);
                    let base = poly_eval_encode(zp, &f, &pts, degree).unwrap();
                    for pat in error_patterns(zp, m, e_max) {
                        let mut word = base.clone();
                        let mut expect_errs = Vec::new();
                        for (pos, delta) in pat {
                            word[pos] = zp.add(word[pos], delta);
                            expect_errs.push(pos);
                        }
                        let got = error_decode(zp, &Codeword::plain(word), &pts, degree, e_max)
                            .unwrap();
                        assert_eq!(got.0, f);
                        assert_eq!(got.1, expect_errs);
                    }
                }
            }
        }
    }

    /// All error patterns of weight <= e_max with nonzero deltas, as sorted
    /// (position, delta) lists.
    fn error_patterns(zp: Zp, m: usize, e_max: usize) -> Vec<Vec<(usize, u64)>> {
        let mut out = vec![vec![]];
        if e_max >= 1 {
            for pos in 0..m {
                for delta in 1..zp.p {
                    out.push(vec![(pos, delta)]);
                }
            }
        }
        if e_max >= 2 {
            for p1 in 0..m {
                for p2 in p1 + 1..m {
                    for d1 in 1..zp.p {
                        for d2 in 1..zp.p {
                            out.push(vec![(p1, d1), (p2, d2)]);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn error_decode_matches_oracle_all_words() {
        // Every word of length 5 over Z_5, degrees 1 and 2.
        let zp = zp5();
        let pts = [1, 2, 3, 4, 5];
        for degree in 1..=2usize {
            let e_max = (5 - degree - 1) / 2;
            for idx in 0..3125u64 {
                let mut v = idx;
                let word: Vec<u64> = (0..5)
                    .map(|_| {
                        let s = v % 5;
                        v /= 5;
                        s
                    })
                    .collect();
                let w = Codeword::plain(word);
                let hits = nearest_codewords(zp, &w, &pts, degree, e_max);
                match error_decode(zp, &w, &pts, degree, e_max) {
                    Ok(got) => {
                        assert_eq!(hits.len(), 1);
                        assert_eq!(got.0, hits[0].0);
                        assert_eq!(got.1, hits[0].1);
                    }
                    Err(_) => assert!(hits.len() != 1),
                }
            }
        }
    }

    #[test]
    fn erasures_then_errors() {
        let zp = Zp::new(7);
        let pts = [1, 2, 3, 4, 5, 6];
        let f = Poly::new(vec![3, 2]);
        let base = poly_eval_encode(zp, &f, &pts, 1).unwrap();
        let mut w = Codeword::plain(base);
        w.erase(0);
        w.erase(4);
        w.symbols[2] = zp.add(w.symbols[2], 1);
        let (got, errs) = error_decode(zp, &w, &pts, 1, 1).unwrap();
        assert_eq!(got, f);
        assert_eq!(errs, vec![2]);
    }

    #[test]
    fn lagrange_weights() {
        let zp = zp5();
        for pts in [vec![1, 2], vec![1, 2, 3], vec![2, 4]] {
            let w = lagrange_at_zero(zp, &pts);
            for idx in 0..zp.p.pow(pts.len() as u32) {
                let mut v = idx;
                let coeffs: Vec<u64> = (0..pts.len())
                    .map(|_| {
                        let c = v % zp.p;
                        v /= zp.p;
                        c
                    })
                    .collect();
                let f = Poly::new(coeffs);
                let mut acc = 0;
                for (i, &x) in pts.iter().enumerate() {
                    acc = zp.add(acc, zp.mul(w[i], f.eval(zp, x)));
                }
                assert_eq!(acc, f.eval(zp, 0));
            }
        }
    }

    #[test]
    fn matrix_inverse_and_vandermonde() {
        let zp = zp5();
        let v = vandermonde(zp, &[1, 2, 3], 3);
        let vi = v.inverse(zp).unwrap();
        assert_eq!(v.mul(zp, &vi), Mat::identity(3));
        assert_eq!(vi.mul(zp, &v), Mat::identity(3));

        let singular = Mat::from_rows(zp, vec![vec![1, 2], vec![2, 4]]);
        assert!(singular.inverse(zp).is_err());
    }

    #[test]
    fn linear_synthesis_reproduces_matrix() {
        // Deterministic sweep over a spread of invertible matrices.
        let zp = zp5();
        let mut tested = 0;
        for seed in 0..200u64 {
            let n = 2 + (seed % 3) as usize;
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 33) % zp.p
            };
            let m = Mat::from_rows(zp, (0..n).map(|_| (0..n).map(|_| next()).collect()).collect());
            if m.inverse(zp).is_err() {
                continue;
            }
            tested += 1;
            let ops = synthesize_linear(zp, &m).unwrap();
            for col in 0..n {
                let mut v = vec![0; n];
                v[col] = 1;
                for op in &ops {
                    op.apply(zp, &mut v);
                }
                let expect: Vec<u64> = (0..n).map(|r| m.get(r, col)).collect();
                assert_eq!(v, expect, "column {col} of matrix from seed {seed}");
            }
        }
        assert!(tested > 100);
    }

    #[test]
    fn linear_synthesis_needs_pivot_swap() {
        let zp = zp5();
        // Zero in the (0,0) slot forces the swap path.
        let m = Mat::from_rows(zp, vec![vec![0, 1], vec![1, 0]]);
        let ops = synthesize_linear(zp, &m).unwrap();
        let mut v = vec![2, 3];
        for op in &ops {
            op.apply(zp, &mut v);
        }
        assert_eq!(v, vec![3, 2]);
    }

    #[test]
    fn points_validation() {
        let zp = zp5();
        check_points(zp, &[1, 2, 3]).unwrap();
        assert!(check_points(zp, &[1, 0]).is_err());
        assert!(check_points(zp, &[1, 1]).is_err());
        assert!(check_points(zp, &[1, 6]).is_err(), "6 = 1 mod 5");
    }
}
