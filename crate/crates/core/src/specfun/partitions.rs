//! Integer partitions and the Faà di Bruno chain rule.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest derivative order supported by the partition tables.
pub const MAX_ORDER: usize = 16;

/// A partition of `k` stored as multiplicities: `multiplicities[j - 1]` is the
/// number of parts equal to `j`, so `Σ j * i_j = k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    pub multiplicities: Vec<u32>,
}

impl Partition {
    /// The integer being partitioned.
    pub fn order(&self) -> usize {
        self.multiplicities
            .iter()
            .enumerate()
            .map(|(j, &i)| (j + 1) * i as usize)
            .sum()
    }

    /// Number of parts.
    pub fn blocks(&self) -> usize {
        self.multiplicities.iter().map(|&i| i as usize).sum()
    }
}

fn enumerate(k: usize) -> Vec<Partition> {
    fn rec(remaining: usize, min_part: usize, mult: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition {
                multiplicities: mult.clone(),
            });
            return;
        }
        for part in min_part..=remaining {
            mult[part - 1] += 1;
            rec(remaining - part, part, mult, out);
            mult[part - 1] -= 1;
        }
    }
    let mut out = Vec::new();
    let mut mult = vec![0; k];
    rec(k, 1, &mut mult, &mut out);
    out
}

fn table() -> &'static [Vec<Partition>] {
    static TABLE: OnceLock<Vec<Vec<Partition>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=MAX_ORDER).map(enumerate).collect())
}

/// Partitions of `k` from the precomputed table, finest first.
pub fn partitions(k: usize) -> Result<&'static [Partition]> {
    if k > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: k,
            max: MAX_ORDER,
        });
    }
    Ok(&table()[k])
}

/// Every partition of `k >= 1` exactly once.
pub fn integer_partitions(k: usize) -> Result<Vec<Partition>> {
    if k == 0 {
        return Err(Error::Domain {
            func: "integer_partitions",
            reason: "k must be at least 1".into(),
        });
    }
    partitions(k).map(<[Partition]>::to_vec)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// `k! / Π_j ((j!)^(i_j) i_j!)`, the number of set partitions of `k` labelled
/// items with the given block-size profile.
pub fn faa_coefficient(part: &Partition) -> u64 {
    let mut denom: u64 = 1;
    for (j, &i) in part.multiplicities.iter().enumerate() {
        denom *= factorial(j + 1).pow(i) * factorial(i as usize);
    }
    factorial(part.order()) / denom
}

/// `d^k/ds^k f(g(s))` from `outer[m] = f^(m)(g(s))` for `m = 0..=k` and
/// `inner[j - 1] = g^(j)(s)` for `j = 1..=k`.
pub fn faa_di_bruno(outer: &[f64], inner: &[f64]) -> Result<f64> {
    let k = inner.len();
    if outer.len() < k + 1 {
        return Err(Error::Domain {
            func: "faa_di_bruno",
            reason: format!("need {} outer derivatives, got {}", k + 1, outer.len()),
        });
    }
    if k == 0 {
        return Ok(outer[0]);
    }
    let mut total = 0.0;
    for part in partitions(k)? {
        let mut term = faa_coefficient(part) as f64 * outer[part.blocks()];
        for (j, &i) in part.multiplicities.iter().enumerate() {
            if i > 0 {
                term *= inner[j].powi(i as i32);
            }
        }
        total += term;
    }
    Ok(total)
}

/// Complete Bell polynomials `Y_0..=Y_n` of `x[0] = x_1, x[1] = x_2, ...`,
/// via `Y_{m+1} = Σ_i C(m, i) Y_{m-i} x_{i+1}`.
///
/// `d^n/ds^n e^{g(s)} = e^{g(s)} Y_n(g', g'', ...)`.
pub fn complete_bell(x: &[f64], n: usize) -> Vec<f64> {
    assert!(x.len() >= n, "need {n} arguments, got {}", x.len());
    let mut y = Vec::with_capacity(n + 1);
    y.push(1.0);
    let mut binom = vec![1.0f64; n + 1];
    for m in 0..n {
        // binom holds row m of Pascal's triangle.
        let mut acc = 0.0;
        for i in 0..=m {
            acc += binom[i] * y[m - i] * x[i];
        }
        y.push(acc);
        for i in (1..=m).rev() {
            binom[i] += binom[i - 1];
        }
        binom[m + 1] = 1.0;
    }
    y
}
