//! Maximum-likelihood estimation of the hidden link rates.
//!
//! Each co-occurring type pair contributes `log[τ·B(k|n,λ⁺) + (1-τ)·B(k|n,λ⁻)]`
//! to the objective. `λ = K/N` is fixed empirically, which ties the mixture
//! weight to the two free parameters: `τ = (λ - λ⁻) / (λ⁺ - λ⁻)`. The search
//! runs over `1 > λ⁺ > λ > λ⁻ > 0`: a coarse grid (logarithmic in `λ⁻`,
//! linear in `λ⁺`) followed by coordinate moves with shrinking steps.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::bitext::LinkClass;
use crate::cooc::CoocTable;
use crate::error::{Error, Result};
use crate::linking::LinkStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    pub class: LinkClass,
    /// Pr(link | co-occurrence of mutual translations).
    pub lambda_plus: f64,
    /// Pr(link | co-occurrence of non-translations).
    pub lambda_minus: f64,
    /// Pr(link | co-occurrence), `K/N`.
    pub lambda: f64,
    /// Pr(mutual translations | co-occurrence).
    pub tau: f64,
    pub log_likelihood: f64,
    /// `λ⁺` was pinned at the search's upper bound.
    #[serde(default)]
    pub capped: bool,
}

impl ClassParams {
    /// Parameters with `λ` at the midpoint and no fitted objective, for
    /// scoring with hand-picked rates.
    pub fn hand_built(class: LinkClass, lambda_plus: f64, lambda_minus: f64) -> Self {
        let lambda = 0.5 * (lambda_plus + lambda_minus);
        ClassParams {
            class,
            lambda_plus,
            lambda_minus,
            lambda,
            tau: 0.5,
            log_likelihood: f64::NAN,
            capped: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub grid_plus: usize,
    pub grid_minus: usize,
    /// Smallest `λ⁻` considered.
    pub minus_floor: f64,
    /// Largest `λ⁺` considered.
    pub plus_cap: f64,
    /// Smallest log-likelihood gain accepted during refinement.
    pub tolerance: f64,
    pub max_refine_steps: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_plus: 25,
            grid_minus: 25,
            minus_floor: 1e-8,
            plus_cap: 1.0 - 1e-6,
            tolerance: 1e-9,
            max_refine_steps: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Bucket {
    k: u64,
    n: u64,
    count: u64,
    ln_choose: f64,
}

/// `(k, n)` pair statistics with multiplicities, in a fixed order so that
/// sums are reproducible.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairStats {
    buckets: Vec<Bucket>,
}

impl PairStats {
    pub fn from_counts(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut hist = BTreeMap::<(u64, u64), u64>::new();
        for (k, n) in pairs {
            assert!(k <= n, "link count {k} exceeds co-occurrence count {n}");
            *hist.entry((n, k)).or_default() += 1;
        }
        PairStats {
            buckets: hist
                .into_iter()
                .map(|((n, k), count)| Bucket {
                    k,
                    n,
                    count,
                    ln_choose: ln_binomial(n, k),
                })
                .collect(),
        }
    }

    /// `(k(u,v), n(u,v))` for every co-occurring pair of one class.
    pub fn from_tables(cooc: &CoocTable, links: &LinkStats, class: LinkClass) -> Self {
        PairStats::from_counts(cooc.class(class).pairs().map(|((u, v), n)| (links.k(class, u, v), n)))
    }

    /// Number of pair types.
    pub fn types(&self) -> u64 {
        self.buckets.iter().map(|b| b.count).sum()
    }

    pub fn links(&self) -> u64 {
        self.buckets.iter().map(|b| b.k * b.count).sum()
    }

    pub fn cooccurrences(&self) -> u64 {
        self.buckets.iter().map(|b| b.n * b.count).sum()
    }

    /// `(k, n, multiplicity)` in ascending `(n, k)` order.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        self.buckets.iter().map(|b| (b.k, b.n, b.count))
    }
}

pub fn empirical_lambda(cooc: &CoocTable, links: &LinkStats, class: LinkClass) -> Result<f64> {
    let n = cooc.class(class).total();
    if n == 0 {
        return Err(Error::NoCooccurrences(class));
    }
    Ok(links.total(class) as f64 / n as f64)
}

/// `τ = (λ - λ⁻) / (λ⁺ - λ⁻)`, clamped to `[0, 1]`.
pub fn derive_tau(lambda_plus: f64, lambda_minus: f64, lambda: f64) -> Result<f64> {
    if lambda_plus.is_nan() || lambda_minus.is_nan() || lambda_plus <= lambda_minus {
        return Err(Error::DegenerateParams {
            plus: lambda_plus,
            minus: lambda_minus,
        });
    }
    let tau = (lambda - lambda_minus) / (lambda_plus - lambda_minus);
    if !(0.0..=1.0).contains(&tau) {
        log::warn!("lambda={lambda} lies outside (lambda-={lambda_minus}, lambda+={lambda_plus}); clamping tau={tau}");
        return Ok(tau.clamp(0.0, 1.0));
    }
    Ok(tau)
}

/// `log p^k (1-p)^(n-k)` without the binomial coefficient.
fn log_kernel(k: u64, n: u64, p: f64) -> f64 {
    let mut out = 0.0;
    if k > 0 {
        out += k as f64 * p.ln();
    }
    if n > k {
        out += (n - k) as f64 * (-p).ln_1p();
    }
    out
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

pub fn mixture_log_likelihood(stats: &PairStats, lambda_plus: f64, lambda_minus: f64, lambda: f64) -> Result<f64> {
    let tau = derive_tau(lambda_plus, lambda_minus, lambda)?;
    let (ln_tau, ln_rest) = (tau.ln(), (-tau).ln_1p());
    Ok(stats
        .buckets
        .iter()
        .map(|b| {
            let plus = ln_tau + log_kernel(b.k, b.n, lambda_plus);
            let minus = ln_rest + log_kernel(b.k, b.n, lambda_minus);
            b.count as f64 * (b.ln_choose + log_add_exp(plus, minus))
        })
        .sum())
}

/// Fits `(λ⁺, λ⁻)` for one class from its co-occurrence and link tables.
pub fn estimate_class(
    cooc: &CoocTable,
    links: &LinkStats,
    class: LinkClass,
    search: &SearchConfig,
    trace: &mut dyn FnMut(f64, f64, f64),
) -> Result<ClassParams> {
    let lambda = empirical_lambda(cooc, links, class)?;
    if links.total(class) == 0 {
        return Err(Error::NoLinks(class));
    }
    let stats = PairStats::from_tables(cooc, links, class);
    estimate_params(&stats, lambda, class, search, trace)
}

pub fn estimate_params(
    stats: &PairStats,
    lambda: f64,
    class: LinkClass,
    search: &SearchConfig,
    trace: &mut dyn FnMut(f64, f64, f64),
) -> Result<ClassParams> {
    if lambda <= 0.0 {
        return Err(Error::NoLinks(class));
    }
    let cap = search.plus_cap;
    let mut floor = search.minus_floor;
    if lambda <= floor {
        floor = lambda / 10.0;
        log::warn!("{class}: lambda={lambda} is below the lambda- floor; using {floor}");
    }
    let objective =
        |plus: f64, minus: f64| mixture_log_likelihood(stats, plus, minus, lambda).unwrap_or(f64::NEG_INFINITY);

    if lambda >= cap {
        log::warn!("{class}: every co-occurrence is linked; lambda+ capped at {cap}");
        let minus = floor;
        let ll = objective(cap, minus);
        trace(cap, minus, ll);
        return Ok(ClassParams {
            class,
            lambda_plus: cap,
            lambda_minus: minus,
            lambda,
            tau: derive_tau(cap, minus, lambda)?,
            log_likelihood: ll,
            capped: true,
        });
    }

    // Feasible box in search coordinates: x = ln λ⁻, y = λ⁺.
    let x_lo = floor.ln();
    let x_hi = (lambda * (1.0 - 1e-9)).ln();
    let y_lo = lambda + (cap - lambda) * 1e-9;
    let y_hi = cap;
    let (gm, gp) = (search.grid_minus.max(1), search.grid_plus.max(1));
    let dx = (lambda.ln() - x_lo) / gm as f64;
    let dy = (1.0 - lambda) / (gp + 1) as f64;

    let grid: Vec<(f64, f64)> = (0..gp)
        .flat_map(|i| {
            (0..gm).map(move |j| {
                let plus = (lambda + dy * (i + 1) as f64).min(y_hi);
                let minus = (x_lo + dx * j as f64).exp();
                (plus, minus)
            })
        })
        .collect();
    let scored: Vec<f64> = grid.par_iter().map(|&(p, m)| objective(p, m)).collect();
    let mut best = 0;
    for (idx, (&(p, m), &ll)) in grid.iter().zip(&scored).enumerate() {
        trace(p, m, ll);
        if ll > scored[best] {
            best = idx;
        }
    }

    let (mut y, minus) = grid[best];
    let mut x = minus.ln();
    let mut ll = scored[best];
    let (mut sx, mut sy) = (dx, dy);
    for _ in 0..search.max_refine_steps {
        let moves = [
            ((x + sx).min(x_hi), y),
            ((x - sx).max(x_lo), y),
            (x, (y + sy).min(y_hi)),
            (x, (y - sy).max(y_lo)),
        ];
        let mut gain = 0.0;
        let mut next = (x, y, ll);
        for (mx, my) in moves {
            let v = objective(my, mx.exp());
            trace(my, mx.exp(), v);
            if v - ll > gain {
                gain = v - ll;
                next = (mx, my, v);
            }
        }
        if gain > search.tolerance {
            (x, y, ll) = next;
        } else {
            sx *= 0.5;
            sy *= 0.5;
            if sx < 1e-12 && sy < 1e-14 {
                break;
            }
        }
    }

    let (plus, minus) = (y, x.exp());
    let capped = plus >= cap;
    if capped {
        log::warn!("{class}: lambda+ reached the upper bound {cap}");
    }
    Ok(ClassParams {
        class,
        lambda_plus: plus,
        lambda_minus: minus,
        lambda,
        tau: derive_tau(plus, minus, lambda)?,
        log_likelihood: ll,
        capped,
    })
}
