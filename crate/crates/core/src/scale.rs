//! Scale parameters and the exact fixed-point convention shared by both
//! solvers.
//!
//! Every dual value, granularity delta_i and truncated weight is an integer
//! multiple of a global `unit = 2^-unit_log2`. Values are stored as raw
//! integers (value / unit), so all dual arithmetic is exact; no rounding
//! happens after a solver initializes.

use crate::graph::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    Approx,
    ExactMwm,
    ExactMwpm,
}

#[derive(Debug, Clone, Copy)]
pub struct ScaleParams {
    pub mode: SolveMode,
    /// Largest true edge weight (>= 1).
    pub n_weight: i64,
    /// N rounded up to a power of two, weights unchanged.
    pub n_pow2: i64,
    /// eps' = 2^-eps_prime_log2 (approximate mode only, exponent >= 2).
    pub eps_prime_log2: u32,
    /// Scale count: scales run 0..=levels.
    pub levels: u32,
    /// unit = 2^-unit_log2.
    pub unit_log2: u32,
    /// delta_0 in raw units; delta_i = delta0_raw >> i.
    pub delta0_raw: i64,
}

impl ScaleParams {
    /// delta_i in raw units. Always >= 1 for i in 0..=levels.
    pub fn delta_raw(&self, scale: u32) -> i64 {
        debug_assert!(scale <= self.levels);
        self.delta0_raw >> scale
    }

    /// An integer weight in raw units.
    pub fn weight_raw(&self, w: i64) -> i64 {
        w << self.unit_log2
    }

    /// Truncated weight w_i(e) = delta_i * floor(w / delta_i), in raw units.
    pub fn truncated_raw(&self, w: i64, scale: u32) -> i64 {
        truncated_weight(self.weight_raw(w), self.delta_raw(scale))
    }

    /// gamma := log2(1/eps') — the per-edge scale window width of the
    /// linear-time variant.
    pub fn gamma(&self) -> u32 {
        self.eps_prime_log2
    }

    /// Raw value printed as an exact decimal-free fraction, for debug dumps.
    pub fn fmt_raw(&self, raw: i64) -> String {
        if self.unit_log2 == 0 {
            return format!("{raw}");
        }
        let den: i64 = 1 << self.unit_log2;
        if raw % den == 0 {
            format!("{}", raw / den)
        } else {
            let g = gcd(raw.unsigned_abs(), den as u64) as i64;
            format!("{}/{}", raw / g, den / g)
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// delta * floor(w / delta) on raw values.
pub fn truncated_weight(w_raw: i64, delta_raw: i64) -> i64 {
    debug_assert!(delta_raw > 0);
    (w_raw / delta_raw) * delta_raw
}

fn next_pow2(n: i64) -> i64 {
    let mut p = 1i64;
    while p < n {
        p <<= 1;
    }
    p
}

/// floor(log2 n) for n >= 1, via a constant-time bit operation.
pub fn msb(n: i64) -> u32 {
    debug_assert!(n >= 1);
    63 - (n as u64).leading_zeros()
}

/// Largest q (possibly negative) with 2^q <= N / sqrt(n), decided exactly
/// via n * 4^q <= N^2.
fn floor_log2_n_over_sqrt(n_weight: i64, n_vertices: u64) -> i32 {
    let n2 = (n_weight as i128) * (n_weight as i128);
    let nv = n_vertices.max(1) as i128;
    let ok = |q: i32| -> bool {
        if q >= 0 {
            nv.checked_mul(1i128 << (2 * q as u32)).is_some_and(|lhs| lhs <= n2)
        } else if q <= -32 {
            true // nv < 2^64 <= n2 << 64
        } else {
            nv <= n2 << (2 * (-q) as u32)
        }
    };
    let mut q = -32;
    while ok(q + 1) {
        q += 1;
    }
    q
}

/// Smallest L with 2^L >= sqrt(n) * N, decided exactly via 4^L >= n * N^2.
fn ceil_log2_sqrt_n_times(n_weight: i64, n_vertices: u64) -> u32 {
    let rhs = (n_vertices.max(1) as i128) * (n_weight as i128) * (n_weight as i128);
    let mut l = 0u32;
    while (1i128 << (2 * l)) < rhs {
        l += 1;
    }
    l
}

/// Derives the scale schedule for a solver run.
///
/// Approximate mode: N is rounded up to a power of two (weights unchanged),
/// eps' is the largest power of two <= min(1/4, eps/7), delta_0 = eps' * N,
/// L = log2 N, unit = delta_L / 2 = eps'/2.
///
/// Exact modes use the true N: maximum weight matching has
/// delta_0 = 2^floor(log(N/sqrt(n))) and L = ceil(log N); the perfect
/// matching variant has delta_0 = 2^floor(log N) and L = ceil(log(sqrt(n)N)).
/// Both use unit = delta_L.
pub fn make_scale_params(
    n_weight: i64,
    eps: f64,
    mode: SolveMode,
    n_vertices: usize,
) -> Result<ScaleParams, GraphError> {
    assert!(n_weight >= 1, "N must be at least 1");
    let n_pow2 = next_pow2(n_weight);
    let (eps_prime_log2, levels, unit_log2, delta0_raw) = match mode {
        SolveMode::Approx => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(GraphError::EpsOutOfRange(eps));
            }
            // largest 2^-k <= min(1/4, eps/7)
            let mut k = 2u32;
            while f64::powi(2.0, -(k as i32)) > eps / 7.0 {
                k += 1;
                if k > 60 {
                    return Err(GraphError::Overflow);
                }
            }
            let levels = msb(n_pow2);
            let unit_log2 = k + 1; // unit = eps'/2
            // delta_0 = eps' * N = N / 2^k, raw: N * 2^(k+1) / 2^k = 2N
            (k, levels, unit_log2, 2 * n_pow2)
        }
        SolveMode::ExactMwm => {
            let q = floor_log2_n_over_sqrt(n_weight, n_vertices as u64);
            let levels = if n_pow2 == n_weight { msb(n_weight) } else { msb(n_pow2) };
            if levels >= 60 {
                return Err(GraphError::Overflow);
            }
            let unit_log2 = (levels as i32 - q).max(0) as u32;
            // delta_0 = 2^q, raw = 2^(q + unit_log2) = 2^levels
            (0, levels, unit_log2, 1i64 << (q + unit_log2 as i32))
        }
        SolveMode::ExactMwpm => {
            let p = msb(n_weight) as i32;
            let levels = ceil_log2_sqrt_n_times(n_weight, n_vertices as u64);
            if levels >= 60 {
                return Err(GraphError::Overflow);
            }
            let unit_log2 = (levels as i32 - p).max(0) as u32;
            (0, levels, unit_log2, 1i64 << (p + unit_log2 as i32))
        }
    };
    // overflow guard: all dual and weight magnitudes stay within ~4N
    let span = (n_pow2 as i128) << (unit_log2 + 3);
    if span > i64::MAX as i128 / 4 {
        return Err(GraphError::Overflow);
    }
    Ok(ScaleParams {
        mode,
        n_weight,
        n_pow2,
        eps_prime_log2,
        levels,
        unit_log2,
        delta0_raw,
    })
}
