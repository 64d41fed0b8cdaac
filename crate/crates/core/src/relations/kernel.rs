use serde::Serialize;

use crate::error::{LabError, Result};

/// Default bound of the smallest-prime-factor table.
pub const DEFAULT_SIEVE_BOUND: u64 = 1 << 22;
/// Default number of trial divisors tried above the sieve bound.
pub const DEFAULT_TRIAL_BUDGET: u64 = 1 << 20;

/// `n = a^k · h` with `h` free of k-th powers (squarefree for k = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct KernelForm {
    pub n: u64,
    pub a: u64,
    pub h: u64,
}

/// Smallest-prime-factor table for `[0, bound]`.
#[derive(Debug, Clone)]
pub struct KernelSieve {
    spf: Vec<u32>,
    trial_budget: u64,
}

impl KernelSieve {
    pub fn new(bound: u64) -> Self {
        let bound = bound.max(1) as usize;
        let mut spf = vec![0u32; bound + 1];
        for i in 2..=bound {
            if spf[i] == 0 {
                let mut j = i;
                while j <= bound {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        Self { spf, trial_budget: DEFAULT_TRIAL_BUDGET }
    }

    pub fn with_trial_budget(mut self, budget: u64) -> Self {
        self.trial_budget = budget;
        self
    }

    pub fn bound(&self) -> u64 {
        (self.spf.len() - 1) as u64
    }

    /// Prime factorization as (prime, exponent) pairs.
    pub fn factor(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        if n == 0 {
            return Err(LabError::argument("cannot factor zero"));
        }
        if n <= self.bound() {
            let mut out: Vec<(u64, u32)> = Vec::new();
            let mut m = n as usize;
            while m > 1 {
                let p = self.spf[m] as usize;
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                out.push((p as u64, e));
            }
            return Ok(out);
        }
        self.factor_by_trial(n)
    }

    /// Trial division by 2 and odd numbers within the budget. Returns the
    /// prime factors found, the unfactored cofactor, and the first untried
    /// divisor (every prime factor of the cofactor is at least that large).
    fn trial_divide(&self, n: u64) -> (Vec<(u64, u32)>, u64, u64) {
        let mut out = Vec::new();
        let mut m = n;
        let mut p = 2u64;
        let mut tried = 0u64;
        while p.saturating_mul(p) <= m && tried < self.trial_budget {
            if m % p == 0 {
                let mut e = 0;
                while m % p == 0 {
                    m /= p;
                    e += 1;
                }
                out.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
            tried += 1;
        }
        if m > 1 && (m as u128) < (p as u128) * (p as u128) {
            out.push((m, 1));
            m = 1;
        }
        (out, m, p)
    }

    fn factor_by_trial(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        match self.trial_divide(n) {
            (f, 1, _) => Ok(f),
            _ => Err(LabError::Factorization { n }),
        }
    }

    /// `n = a²·h` with `h` squarefree.
    pub fn decompose(&self, n: u64) -> Result<KernelForm> {
        self.decompose_root(n, 2)
    }

    /// `n = a^k·h` with `h` k-th-power-free.
    pub fn decompose_root(&self, n: u64, k: u32) -> Result<KernelForm> {
        if n == 0 {
            return Err(LabError::argument("kernel decomposition needs n >= 1"));
        }
        if k < 2 {
            return Err(LabError::argument("root exponent must be at least 2"));
        }
        let (factors, cofactor, reach) = if n <= self.bound() {
            (self.factor(n)?, 1, 0)
        } else {
            self.trial_divide(n)
        };
        let mut a = 1u64;
        let mut h = 1u64;
        for (p, e) in factors {
            a *= p.pow(e / k);
            h *= p.pow(e % k);
        }
        if cofactor > 1 {
            let (ca, ch) = split_cofactor(n, cofactor, reach, k)?;
            a *= ca;
            h *= ch;
        }
        Ok(KernelForm { n, a, h })
    }
}

/// Square-kernel split of a cofactor `m` whose prime factors all exceed
/// `reach`. A perfect square contributes wholly to `a`; a non-square below
/// reach³ has at most two prime factors and is squarefree. Anything else
/// could hide a square factor.
fn split_cofactor(n: u64, m: u64, reach: u64, k: u32) -> Result<(u64, u64)> {
    if k == 2 {
        let r = m.isqrt();
        if r * r == m {
            return Ok((r, 1));
        }
        let reach = reach as u128;
        if (m as u128) < reach * reach * reach {
            return Ok((1, m));
        }
    }
    Err(LabError::Factorization { n })
}

impl KernelSieve {
    pub fn is_k_free(&self, n: u64, k: u32) -> Result<bool> {
        Ok(self.decompose_root(n, k)?.a == 1)
    }
}

/// Decomposition with a default-sized sieve built on first use.
pub fn kernel_decompose(n: u64) -> Result<KernelForm> {
    use std::sync::OnceLock;
    static SIEVE: OnceLock<KernelSieve> = OnceLock::new();
    SIEVE.get_or_init(|| KernelSieve::new(1 << 20)).decompose(n)
}

/// Kernel `h` and multiplier `a` for every n in `[1, max]` with `n = a^k h`.
pub fn kernel_table(max: u64, k: u32) -> Vec<(u64, u64)> {
    let sieve = KernelSieve::new(max);
    (1..=max)
        .map(|n| {
            let f = sieve.decompose_root(n, k).expect("n within sieve bound");
            (f.h, f.a)
        })
        .collect()
}

/// All k-th-power-free integers in `[1, max]`, ascending.
pub fn k_free_up_to(max: u64, k: u32) -> Vec<u64> {
    let mut free = vec![true; max as usize + 1];
    let mut base = 2u64;
    while let Some(p) = base.checked_pow(k) {
        if p > max {
            break;
        }
        let mut j = p;
        while j <= max {
            free[j as usize] = false;
            j += p;
        }
        base += 1;
    }
    (1..=max).filter(|&n| free[n as usize]).collect()
}

/// Möbius function via the sieve.
pub fn mobius(sieve: &KernelSieve, n: u64) -> Result<i8> {
    let f = sieve.factor(n)?;
    if f.iter().any(|&(_, e)| e > 1) {
        Ok(0)
    } else if f.len() % 2 == 0 {
        Ok(1)
    } else {
        Ok(-1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_decompositions() {
        let s = KernelSieve::new(1000);
        assert_eq!(s.decompose(1).unwrap(), KernelForm { n: 1, a: 1, h: 1 });
        assert_eq!(s.decompose(12).unwrap(), KernelForm { n: 12, a: 2, h: 3 });
        assert_eq!(s.decompose(50).unwrap(), KernelForm { n: 50, a: 5, h: 2 });
        assert_eq!(s.decompose(720).unwrap(), KernelForm { n: 720, a: 12, h: 5 });
        assert_eq!(kernel_decompose(50).unwrap().h, 2);
    }

    #[test]
    fn cube_free_decomposition() {
        let s = KernelSieve::new(1000);
        // 432 = 2^4 3^3 = (2·3)^3 · 2
        assert_eq!(s.decompose_root(432, 3).unwrap(), KernelForm { n: 432, a: 6, h: 2 });
    }

    #[test]
    fn trial_division_above_sieve() {
        let s = KernelSieve::new(100).with_trial_budget(1 << 16);
        // 2^2 · 3 · 1_000_003 (prime)
        let n = 12 * 1_000_003u64;
        assert_eq!(s.decompose(n).unwrap(), KernelForm { n, a: 2, h: 3_000_009 });
        // square of a large prime beyond the trial reach
        let p = 1_000_000_007u64;
        let tiny = KernelSieve::new(10).with_trial_budget(1000);
        assert_eq!(tiny.decompose(p * p).unwrap(), KernelForm { n: p * p, a: p, h: 1 });
    }

    #[test]
    fn factorization_failure_is_explicit() {
        let s = KernelSieve::new(10).with_trial_budget(10);
        // product of three primes well above the trial reach
        let n2 = 10_007u64 * 10_009 * 10_037;
        assert!(matches!(s.decompose(n2), Err(LabError::Factorization { .. })));
    }

    #[test]
    fn k_free_lists() {
        assert_eq!(k_free_up_to(12, 2), vec![1, 2, 3, 5, 6, 7, 10, 11]);
        assert_eq!(k_free_up_to(17, 3), vec![1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12, 13, 14, 15, 17]);
        let s = KernelSieve::new(100);
        assert_eq!(mobius(&s, 30).unwrap(), -1);
        assert_eq!(mobius(&s, 12).unwrap(), 0);
        assert_eq!(mobius(&s, 1).unwrap(), 1);
    }

    #[test]
    fn table_reconstructs_n() {
        for (i, (h, a)) in kernel_table(5000, 2).into_iter().enumerate() {
            assert_eq!(a * a * h, i as u64 + 1);
        }
    }
}
