//! Protocol parameters shared by every layer of the simulator.

use crate::field::is_prime;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Parameter block for the sharing/computation protocols.
///
/// `n` players tolerate up to `t` cheaters (strict honest majority,
/// `t < n/2`). Authentication stretches each qudit to `m = 2d+1` qudits
/// with `m < p < 2m`, which makes the authentication code self-dual.
/// `s` counts test rounds per basis in the purity / random-sum checks and
/// `r` is the surplus of zero-registers dealt per player beyond the `2s`
/// consumed by testing.
///
/// `security` and `circuit_size` are informational: they record the global
/// security level and circuit size a deployment would size `s` from, and
/// play no role in the simulation itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub p: u64,
    pub n: usize,
    pub t: usize,
    pub d: usize,
    pub s: usize,
    pub r: usize,
    #[serde(default)]
    pub security: Option<u64>,
    #[serde(default)]
    pub circuit_size: Option<u64>,
}

impl Default for Params {
    fn default() -> Params {
        Params {
            p: 5,
            n: 3,
            t: 1,
            d: 1,
            s: 4,
            r: 4,
            security: None,
            circuit_size: None,
        }
    }
}

impl Params {
    /// Authentication code length.
    pub fn m(&self) -> usize {
        2 * self.d + 1
    }

    /// Evaluation points of the authentication code: 1..=m.
    pub fn auth_points(&self) -> Vec<u64> {
        (1..=self.m() as u64).collect()
    }

    /// Evaluation points of the top-level sharing code: 1..=n.
    pub fn share_points(&self) -> Vec<u64> {
        (1..=self.n as u64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::param(format!("p = {} is not prime", self.p)));
        }
        if self.n == 0 || 2 * self.t >= self.n {
            return Err(Error::param(format!(
                "need t < n/2, got n = {}, t = {}",
                self.n, self.t
            )));
        }
        let m = self.m() as u64;
        if !(m < self.p && self.p < 2 * m) {
            return Err(Error::param(format!(
                "need m < p < 2m for m = 2d+1 = {m}, got p = {}",
                self.p
            )));
        }
        if self.n as u64 > self.p - 1 {
            return Err(Error::param(format!(
                "need n <= p-1 distinct nonzero share points, got n = {}, p = {}",
                self.n, self.p
            )));
        }
        if self.s == 0 {
            return Err(Error::param("s must be at least 1"));
        }
        Ok(())
    }

    /// Validity for Toffoli distillation, which uses a length `3d+1` code
    /// over the same field instead of the length `2d+1` authentication code.
    pub fn validate_distill(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::param(format!("p = {} is not prime", self.p)));
        }
        let m = 3 * self.d as u64 + 1;
        if self.p <= m {
            return Err(Error::param(format!(
                "need p > 3d+1 = {m} for distillation, got p = {}",
                self.p
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let pr = Params::default();
        pr.validate().unwrap();
        pr.validate_distill().unwrap();
        assert_eq!(pr.m(), 3);
        assert_eq!(pr.auth_points(), vec![1, 2, 3]);
        assert_eq!(pr.share_points(), vec![1, 2, 3]);
    }

    #[test]
    fn rejects_bad_combinations() {
        let mut pr = Params::default();
        pr.t = 2;
        assert!(pr.validate().is_err(), "t = 2 breaks t < n/2 at n = 3");

        let mut pr = Params::default();
        pr.p = 7;
        assert!(pr.validate().is_err(), "p = 7 breaks p < 2m at d = 1");
        pr.validate_distill().unwrap();

        let mut pr = Params::default();
        pr.p = 4;
        assert!(pr.validate().is_err());

        let mut pr = Params::default();
        pr.s = 0;
        assert!(pr.validate().is_err());
    }

    #[test]
    fn d2_needs_p7() {
        let pr = Params {
            p: 7,
            d: 2,
            ..Params::default()
        };
        pr.validate().unwrap();
        assert_eq!(pr.m(), 5);
        // 3d+1 = 7 is not < p, so distillation at d=2 needs p = 11.
        assert!(pr.validate_distill().is_err());
        let pr = Params {
            p: 11,
            d: 2,
            ..Params::default()
        };
        pr.validate_distill().unwrap();
    }
}
