//! Normal equations of the stacked mEDI system and their two solvers.
//!
//! For `n >= 2` frames the normal matrix is tridiagonal with main diagonal
//! `[2, 3, ..., 3, 2]` and off-diagonals `-1`. Its leading principal minors
//! are the odd-indexed Fibonacci numbers `F(2k+1)` and its determinant is
//! `F(2n)` (standard indexing `F(1) = F(2) = 1`), which gives the closed-form
//! LU solve below.

use super::ddouble::DoubleDouble;

/// Largest frame count solved through the Fibonacci table; beyond it the
/// even-indexed terms outgrow 64-bit accumulation headroom.
pub const MAX_FIBONACCI_FRAMES: usize = 40;

const FIB_LEN: usize = 2 * MAX_FIBONACCI_FRAMES + 1;

const FIBONACCI: [u64; FIB_LEN] = {
    let mut f = [0u64; FIB_LEN];
    f[1] = 1;
    let mut k = 2;
    while k < FIB_LEN {
        f[k] = f[k - 1] + f[k - 2];
        k += 1;
    }
    f
};

/// Standard Fibonacci number `F(k)` (`F(0) = 0`, `F(1) = F(2) = 1`) for
/// `k <= 80`.
pub fn fibonacci(k: usize) -> u64 {
    FIBONACCI[k]
}

/// Normal equations `AᵀA x = r` for one pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalSystem {
    rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(rhs: Vec<f64>) -> Self {
        assert!(!rhs.is_empty(), "system needs at least one unknown");
        Self { rhs }
    }

    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn diagonal(&self) -> Vec<f64> {
        diagonal_pattern(self.n())
    }

    /// Multiplies the normal matrix by `x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let diag = self.diagonal();
        let n = self.n();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                v
            })
            .collect()
    }
}

pub fn diagonal_pattern(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => {
            let mut d = vec![3.0; n];
            d[0] = 2.0;
            d[n - 1] = 2.0;
            d
        }
    }
}

/// Determinant of the `n x n` normal matrix by the continuant recurrence
/// `D_k = d_k D_{k-1} - D_{k-2}`, in integer arithmetic.
pub fn continuant(n: usize) -> i128 {
    let diag: Vec<i128> = diagonal_pattern(n).iter().map(|&d| d as i128).collect();
    let (mut prev, mut cur) = (0i128, 1i128);
    for d in diag {
        let next = d * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveRoute {
    Direct,
    Fibonacci,
    /// Frame count exceeded [`MAX_FIBONACCI_FRAMES`].
    OracleFallback,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub x: Vec<f64>,
    pub route: SolveRoute,
}

/// Solves the normal equations through the Fibonacci-structured LU
/// factorization.
///
/// Forward pass: `x_n = sum_i r_i F(2i-1) / F(2n)`. Backward pass:
/// `x_{n-1} = 2 x_n - r_n` and `x_{k-1} = 3 x_k - x_{k+1} - r_k`.
/// The backward recurrence multiplies rounding errors by up to `F(2n)`, so
/// both passes run in double-double arithmetic. Every row sums to one, so
/// the solve runs on `r - r_1` and adds `r_1` back; a constant right-hand
/// side then comes out exactly constant.
pub fn solve_fibonacci_lu(system: &TridiagonalSystem) -> Solution {
    let r = system.rhs();
    let n = r.len();
    if n == 1 {
        return Solution {
            x: vec![r[0]],
            route: SolveRoute::Direct,
        };
    }
    if n > MAX_FIBONACCI_FRAMES {
        log::debug!("{n} frames exceed the Fibonacci table; using the oracle solver");
        return Solution {
            x: solve_oracle(system),
            route: SolveRoute::OracleFallback,
        };
    }
    let shift = DoubleDouble::from_f64(r[0]);
    let rd: Vec<DoubleDouble> = r
        .iter()
        .map(|&v| DoubleDouble::from_f64(v) - shift)
        .collect();
    let weighted = rd
        .iter()
        .enumerate()
        .fold(DoubleDouble::ZERO, |acc, (i, &ri)| {
            acc + ri * DoubleDouble::from_u64(fibonacci(2 * i + 1))
        });
    let mut x = vec![DoubleDouble::ZERO; n];
    x[n - 1] = weighted.div(DoubleDouble::from_u64(fibonacci(2 * n)));
    let two = DoubleDouble::from_f64(2.0);
    let three = DoubleDouble::from_f64(3.0);
    x[n - 2] = two * x[n - 1] - rd[n - 1];
    for k in (1..n - 1).rev() {
        // row k (0-based): -x[k-1] + 3 x[k] - x[k+1] = r[k]
        x[k - 1] = three * x[k] - x[k + 1] - rd[k];
    }
    Solution {
        x: x.into_iter().map(|v| (v + shift).to_f64()).collect(),
        route: SolveRoute::Fibonacci,
    }
}

/// Symmetric tridiagonal elimination (Thomas algorithm) in plain `f64`.
pub fn solve_oracle(system: &TridiagonalSystem) -> Vec<f64> {
    let n = system.n();
    let diag = system.diagonal();
    let off = -1.0;
    let mut c_prime = vec![0.0; n];
    let mut d_prime = vec![0.0; n];
    let mut denom = diag[0];
    c_prime[0] = off / denom;
    d_prime[0] = system.rhs()[0] / denom;
    for i in 1..n {
        denom = diag[i] - off * c_prime[i - 1];
        c_prime[i] = off / denom;
        d_prime[i] = (system.rhs()[i] - off * d_prime[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    x
}
