//! Derivative-free univariate minimization over a bracket.

use std::fmt;

use crate::error::{Error, Result};

/// `(sqrt(5) - 1) / 2`
pub const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

const PRESCAN_POINTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMethod {
    Golden,
    Fibonacci,
    Grid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub lo: f64,
    pub hi: f64,
    /// Absolute bracket width at which the search stops.
    pub tolerance: f64,
    pub max_evals: usize,
    pub method: SearchMethod,
    /// Evaluate 8 evenly spaced points first and narrow the bracket to the
    /// neighbors of the best one.
    pub prescan: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            lo: 0.01,
            hi: 1.0,
            tolerance: 1e-3,
            max_evals: 64,
            method: SearchMethod::Golden,
            prescan: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo > 0.0 && self.lo < self.hi && self.hi.is_finite()) {
            return Err(Error::SearchConfig(format!(
                "bracket [{}, {}] must satisfy 0 < lo < hi",
                self.lo, self.hi
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::SearchConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if self.max_evals < 3 {
            return Err(Error::SearchConfig(format!(
                "max_evals {} must be at least 3",
                self.max_evals
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchStatus {
    Converged,
    MaxEvals,
    /// Every evaluation returned the same energy.
    FlatEnergy,
    /// Grid sweeps do not narrow a bracket.
    Exhaustive,
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStatus::Converged => "converged",
            SearchStatus::MaxEvals => "max evaluations reached",
            SearchStatus::FlatEnergy => "flat energy",
            SearchStatus::Exhaustive => "grid",
        })
    }
}

/// Every `(c, energy)` evaluation of a search, in order.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyTrace {
    pub evaluations: Vec<(f64, f64)>,
    /// Bracket after each reduction step, starting with the initial one.
    pub brackets: Vec<(f64, f64)>,
    pub argmin: f64,
    pub min_energy: f64,
    pub converged: bool,
    pub status: SearchStatus,
}

impl EnergyTrace {
    pub fn evals(&self) -> usize {
        self.evaluations.len()
    }

    pub fn final_bracket(&self) -> (f64, f64) {
        *self.brackets.last().expect("at least the initial bracket")
    }

    /// `c energy` lines.
    pub fn to_text(&self) -> String {
        self.evaluations
            .iter()
            .map(|(c, e)| format!("{c} {e}\n"))
            .collect()
    }
}

/// Records evaluations and rejects non-finite energies.
struct Recorder<F> {
    f: F,
    evaluations: Vec<(f64, f64)>,
    brackets: Vec<(f64, f64)>,
}

impl<F: FnMut(f64) -> Result<f64>> Recorder<F> {
    fn new(f: F, bracket: (f64, f64)) -> Self {
        Self {
            f,
            evaluations: Vec::new(),
            brackets: vec![bracket],
        }
    }

    fn eval(&mut self, c: f64) -> Result<f64> {
        let e = (self.f)(c)?;
        self.evaluations.push((c, e));
        if !e.is_finite() {
            log::error!(
                "non-finite energy at c = {c}; trace so far: {:?}",
                self.evaluations
            );
            return Err(Error::NonFiniteEnergy { c, value: e });
        }
        Ok(e)
    }

    fn finish(self, bracket_width_ok: bool, fallback: f64) -> EnergyTrace {
        let (mut argmin, mut min_energy) = (fallback, f64::INFINITY);
        for &(c, e) in &self.evaluations {
            if e < min_energy {
                argmin = c;
                min_energy = e;
            }
        }
        let flat = self.evaluations.len() > 1
            && self
                .evaluations
                .iter()
                .all(|&(_, e)| e == self.evaluations[0].1);
        let (status, converged) = if flat {
            (SearchStatus::FlatEnergy, false)
        } else if bracket_width_ok {
            (SearchStatus::Converged, true)
        } else {
            (SearchStatus::MaxEvals, false)
        };
        if flat {
            argmin = fallback;
        }
        EnergyTrace {
            evaluations: self.evaluations,
            brackets: self.brackets,
            argmin,
            min_energy,
            converged,
            status,
        }
    }
}

/// Narrows `[lo, hi]` to the neighbors of the best of 8 evenly spaced
/// points.
fn prescan<F: FnMut(f64) -> Result<f64>>(
    rec: &mut Recorder<F>,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64)> {
    let step = (hi - lo) / (PRESCAN_POINTS - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for k in 0..PRESCAN_POINTS {
        let c = if k + 1 == PRESCAN_POINTS {
            hi
        } else {
            lo + k as f64 * step
        };
        let e = rec.eval(c)?;
        if e < best.1 {
            best = (k, e);
        }
    }
    let a = lo + best.0.saturating_sub(1) as f64 * step;
    let b = (lo + (best.0 + 1) as f64 * step).min(hi);
    rec.brackets.push((a, b));
    Ok((a, b))
}

/// Golden-section search.
pub fn golden_section<F>(f: F, config: &SearchConfig) -> Result<EnergyTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let mut rec = Recorder::new(f, (config.lo, config.hi));
    let (mut a, mut b) = (config.lo, config.hi);
    if config.prescan {
        (a, b) = prescan(&mut rec, a, b)?;
    }
    let midpoint = 0.5 * (config.lo + config.hi);
    if rec.evaluations.len() + 2 > config.max_evals {
        return Ok(rec.finish(b - a <= config.tolerance, midpoint));
    }
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = rec.eval(x1)?;
    let mut f2 = rec.eval(x2)?;
    while b - a > config.tolerance && rec.evaluations.len() < config.max_evals {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            rec.brackets.push((a, b));
            f1 = rec.eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            rec.brackets.push((a, b));
            f2 = rec.eval(x2)?;
        }
    }
    // one more reduction with the final pair
    if f1 <= f2 {
        b = x2;
    } else {
        a = x1;
    }
    rec.brackets.push((a, b));
    Ok(rec.finish(b - a <= config.tolerance, midpoint))
}

/// Smallest Fibonacci depth `N` with `F(N) >= ratio` (`F(1) = F(2) = 1`).
pub fn fibonacci_depth(ratio: f64) -> usize {
    let (mut prev, mut cur, mut n) = (1.0f64, 1.0f64, 2usize);
    while cur < ratio {
        let next = prev + cur;
        prev = cur;
        cur = next;
        n += 1;
    }
    n
}

fn fib(n: usize) -> f64 {
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for _ in 0..n {
        let t = a + b;
        a = b;
        b = t;
    }
    a
}

/// Fibonacci (Kiefer) search.
///
/// With depth `N` (the smallest with `F(N) >= (hi - lo) / tolerance`, capped
/// by `max_evals`), probes sit at Fibonacci-ratio subdivisions and each
/// reduction reuses one previous probe. The scheme uses `N - 1` evaluations
/// and ends with a bracket of width `(hi - lo) / F(N)` plus a separation
/// `1e-9 * (hi - lo)` for the last, otherwise coincident, probe.
pub fn fibonacci_search<F>(f: F, config: &SearchConfig) -> Result<EnergyTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let mut rec = Recorder::new(f, (config.lo, config.hi));
    let (mut a, mut b) = (config.lo, config.hi);
    if config.prescan {
        (a, b) = prescan(&mut rec, a, b)?;
    }
    let midpoint = 0.5 * (config.lo + config.hi);
    let budget = config.max_evals.saturating_sub(rec.evaluations.len());
    let wanted = fibonacci_depth((b - a) / config.tolerance).max(4);
    let depth = wanted.min(budget + 1);
    if depth < 4 {
        return Ok(rec.finish(b - a <= config.tolerance, midpoint));
    }
    let length = b - a;
    let separation = 1e-9 * length;
    let mut x1 = a + fib(depth - 2) / fib(depth) * length;
    let mut x2 = a + fib(depth - 1) / fib(depth) * length;
    let mut f1 = rec.eval(x1)?;
    let mut f2 = rec.eval(x2)?;
    // after reduction k the bracket is length * F(depth - k) / F(depth)
    for k in 1..depth - 3 {
        let width = length * fib(depth - k) / fib(depth);
        if f1 <= f2 {
            b = x2;
            a = b - width;
            x2 = x1;
            f2 = f1;
            x1 = a + fib(depth - k - 2) / fib(depth - k) * width;
            rec.brackets.push((a, b));
            f1 = rec.eval(x1)?;
        } else {
            a = x1;
            b = a + width;
            x1 = x2;
            f1 = f2;
            x2 = a + fib(depth - k - 1) / fib(depth - k) * width;
            rec.brackets.push((a, b));
            f2 = rec.eval(x2)?;
        }
    }
    // the next reduction leaves 2 * length / F(depth) with the kept probe at
    // its middle, where the new probe would coincide with it; a probe
    // separated by a hair picks a half instead
    let (mid, f_mid) = if f1 <= f2 {
        b = x2;
        (x1, f1)
    } else {
        a = x1;
        (x2, f2)
    };
    rec.brackets.push((a, b));
    let probe = mid - separation;
    let f_probe = rec.eval(probe)?;
    if f_probe < f_mid {
        b = mid;
    } else {
        a = probe;
    }
    rec.brackets.push((a, b));
    let ok = depth == wanted;
    Ok(rec.finish(ok, midpoint))
}

/// Evaluates every grid point.
pub fn grid_search<F>(mut f: F, grid: &[f64]) -> Result<EnergyTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid.is_empty() {
        return Err(Error::SearchConfig("grid must not be empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::SearchConfig(
            "grid must be strictly ascending".into(),
        ));
    }
    let mut rec = Recorder::new(&mut f, (grid[0], grid[grid.len() - 1]));
    for &c in grid {
        rec.eval(c)?;
    }
    let mut trace = rec.finish(false, grid[0]);
    if trace.status != SearchStatus::FlatEnergy {
        trace.status = SearchStatus::Exhaustive;
    }
    trace.converged = trace.status == SearchStatus::Exhaustive;
    Ok(trace)
}

/// Runs the search selected by `config.method`; `Grid` uses
/// `config.max_evals` evenly spaced points over the bracket.
pub fn minimize<F>(f: F, config: &SearchConfig) -> Result<EnergyTrace>
where
    F: FnMut(f64) -> Result<f64>,
{
    match config.method {
        SearchMethod::Golden => golden_section(f, config),
        SearchMethod::Fibonacci => fibonacci_search(f, config),
        SearchMethod::Grid => {
            config.validate()?;
            let n = config.max_evals;
            let grid: Vec<f64> = (0..n)
                .map(|k| config.lo + (config.hi - config.lo) * k as f64 / (n - 1) as f64)
                .collect();
            grid_search(f, &grid)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(c: f64) -> Result<f64> {
        Ok((c - 0.23) * (c - 0.23))
    }

    #[test]
    fn golden_finds_quadratic_minimum() {
        let cfg = SearchConfig {
            tolerance: 1e-4,
            ..Default::default()
        };
        let t = golden_section(quad, &cfg).unwrap();
        assert!((t.argmin - 0.23).abs() <= 1e-4, "{}", t.argmin);
        assert!(t.converged);
        let (a, b) = t.final_bracket();
        assert!(a <= 0.23 && 0.23 <= b);
    }

    #[test]
    fn golden_contracts_by_inverse_ratio() {
        let cfg = SearchConfig {
            tolerance: 1e-6,
            ..Default::default()
        };
        let t = golden_section(quad, &cfg).unwrap();
        let w0 = cfg.hi - cfg.lo;
        for (k, &(a, b)) in t.brackets.iter().enumerate() {
            let expected = w0 * INV_GOLDEN.powi(k as i32);
            assert!(((b - a) - expected).abs() <= 1e-12, "k={k}");
        }
    }

    #[test]
    fn flat_energy_returns_midpoint() {
        let t = golden_section(|_| Ok(3.0), &SearchConfig::default()).unwrap();
        assert_eq!(t.argmin, 0.505);
        assert!(!t.converged);
        assert_eq!(t.status, SearchStatus::FlatEnergy);
        assert_eq!(t.status.to_string(), "flat energy");
        let t = fibonacci_search(|_| Ok(3.0), &SearchConfig::default()).unwrap();
        assert_eq!(t.status, SearchStatus::FlatEnergy);
        assert_eq!(t.argmin, 0.505);
    }

    #[test]
    fn fibonacci_finds_quadratic_minimum() {
        let cfg = SearchConfig {
            method: SearchMethod::Fibonacci,
            ..Default::default()
        };
        let t = fibonacci_search(quad, &cfg).unwrap();
        assert!((t.argmin - 0.23).abs() <= 1e-3, "{}", t.argmin);
        assert!(t.converged);
    }

    #[test]
    fn fibonacci_eval_count_and_width() {
        let cfg = SearchConfig::default();
        let length = cfg.hi - cfg.lo;
        let depth = fibonacci_depth(length / cfg.tolerance);
        assert!(fib(depth) >= length / cfg.tolerance && fib(depth - 1) < length / cfg.tolerance);
        let t = fibonacci_search(quad, &cfg).unwrap();
        assert_eq!(t.evals(), depth - 1);
        let (a, b) = t.final_bracket();
        assert!(b - a <= length / fib(depth) + 1e-9 * length + 1e-15);
        assert!(a <= 0.23 && 0.23 <= b);
    }

    #[test]
    fn never_leaves_bracket() {
        let cfg = SearchConfig {
            lo: 0.3,
            hi: 0.7,
            ..Default::default()
        };
        for method in [SearchMethod::Golden, SearchMethod::Fibonacci] {
            let cfg = SearchConfig {
                method,
                ..cfg.clone()
            };
            let t = minimize(quad, &cfg).unwrap();
            assert!(t.evaluations.iter().all(|&(c, _)| (0.3..=0.7).contains(&c)));
            // minimizer outside: best point hugs the lower end
            assert!(t.argmin - 0.3 < 2e-3);
        }
    }

    #[test]
    fn non_finite_aborts() {
        let err = golden_section(
            |c| Ok(if c > 0.5 { f64::NAN } else { c }),
            &SearchConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteEnergy { .. }));
    }

    #[test]
    fn bad_configs_rejected() {
        for cfg in [
            SearchConfig {
                lo: 0.0,
                ..Default::default()
            },
            SearchConfig {
                lo: 0.5,
                hi: 0.4,
                ..Default::default()
            },
            SearchConfig {
                tolerance: 0.0,
                ..Default::default()
            },
            SearchConfig {
                max_evals: 2,
                ..Default::default()
            },
        ] {
            assert!(golden_section(quad, &cfg).is_err());
        }
    }

    #[test]
    fn max_evals_caps_trace() {
        let cfg = SearchConfig {
            tolerance: 1e-9,
            max_evals: 10,
            ..Default::default()
        };
        for method in [SearchMethod::Golden, SearchMethod::Fibonacci] {
            let t = minimize(
                quad,
                &SearchConfig {
                    method,
                    ..cfg.clone()
                },
            )
            .unwrap();
            assert!(t.evals() <= 10);
            assert!(!t.converged);
            assert_eq!(t.status, SearchStatus::MaxEvals);
        }
    }

    #[test]
    fn grid_examples() {
        let t = grid_search(quad, &[0.4]).unwrap();
        assert_eq!(t.evals(), 1);
        assert_eq!(t.argmin, 0.4);
        let grid = [0.10, 0.22, 0.23, 0.60];
        let t = grid_search(quad, &grid).unwrap();
        assert_eq!(t.argmin, 0.23);
        let direct = grid
            .iter()
            .cloned()
            .min_by(|a, b| quad(*a).unwrap().total_cmp(&quad(*b).unwrap()))
            .unwrap();
        assert_eq!(t.argmin, direct);
        assert!(grid_search(quad, &[]).is_err());
        assert!(grid_search(quad, &[0.3, 0.2]).is_err());
    }

    #[test]
    fn prescan_handles_two_minima() {
        // global minimum at 0.8, shallow local one at 0.15
        let f = |c: f64| Ok(((c - 0.8) * (c - 0.8)).min(0.05 + (c - 0.15) * (c - 0.15)));
        let cfg = SearchConfig {
            prescan: true,
            ..Default::default()
        };
        let t = golden_section(f, &cfg).unwrap();
        assert!((t.argmin - 0.8).abs() < 1e-3);
        let t = fibonacci_search(
            f,
            &SearchConfig {
                method: SearchMethod::Fibonacci,
                ..cfg
            },
        )
        .unwrap();
        assert!((t.argmin - 0.8).abs() < 1e-3);
    }

    #[test]
    fn deterministic() {
        let cfg = SearchConfig::default();
        assert_eq!(
            golden_section(quad, &cfg).unwrap(),
            golden_section(quad, &cfg).unwrap()
        );
    }
}
