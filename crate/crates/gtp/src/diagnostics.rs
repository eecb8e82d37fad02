//! Convergence diagnostics over finite traces.
//!
//! Every verdict here is a pure function of the data and the declared window
//! and tolerance — finite-horizon surrogates for limit statements, with their
//! parameters always reported alongside.

use crate::game::{Forecaster, GameError, GameTrace, RealityStrategy, SkepticStrategy};
use crate::growth::GrowthFunction;
use crate::protocol::ProtocolSpec;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("scale sequence must be positive and nondecreasing (violated at index {0})")]
    ScaleNotMonotone(usize),
    #[error("sequences must have equal, nonzero length ({y} vs {g})")]
    LengthMismatch { y: usize, g: usize },
    #[error("window must be nonzero and at most the horizon ({window} vs {horizon})")]
    BadWindow { window: usize, horizon: usize },
}

fn check_scale(g: &[f64]) -> Result<(), DiagnosticsError> {
    let mut prev = 0.0;
    for (i, &v) in g.iter().enumerate() {
        if v.is_nan() || v <= 0.0 || v < prev {
            return Err(DiagnosticsError::ScaleNotMonotone(i));
        }
        prev = v;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Series classification
// ---------------------------------------------------------------------------

/// How a tracked series behaves over the tail window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesVerdict {
    /// The tail window stays within the tolerance band around this value.
    Converged { value: f64 },
    TrendingUp,
    TrendingDown,
    Oscillating,
    Inconclusive,
}

/// Pure classification of a series from its tail window: a band of width
/// `tol · max(1, |mean|)` means convergence; a window that moves one way
/// through more than the band is a trend; repeated direction changes of
/// band-exceeding size oscillate.
pub fn classify_series(xs: &[f64], window: usize, tol: f64) -> SeriesVerdict {
    if xs.is_empty() || window == 0 || window > xs.len() {
        return SeriesVerdict::Inconclusive;
    }
    let tail = &xs[xs.len() - window..];
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let band = tol * mean.abs().max(1.0);
    let lo = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= band {
        return SeriesVerdict::Converged { value: mean };
    }
    // count band-sized direction changes across the window
    let mut changes = 0usize;
    let mut dir = 0i8;
    let mut anchor = tail[0];
    for &x in &tail[1..] {
        let move_ = x - anchor;
        if move_.abs() >= band.max(f64::MIN_POSITIVE) {
            let d = if move_ > 0.0 { 1 } else { -1 };
            if dir != 0 && d != dir {
                changes += 1;
            }
            dir = d;
            anchor = x;
        }
    }
    let drift = tail[tail.len() - 1] - tail[0];
    if changes >= 2 {
        SeriesVerdict::Oscillating
    } else if drift > band {
        SeriesVerdict::TrendingUp
    } else if drift < -band {
        SeriesVerdict::TrendingDown
    } else {
        SeriesVerdict::Inconclusive
    }
}

// ---------------------------------------------------------------------------
// Kronecker check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KroneckerVerdict {
    /// The weighted series was Cauchy over the window and the ratio track fell
    /// below tolerance on the tail.
    Pass,
    /// The weighted series was not Cauchy at this tolerance: the premise
    /// fails, so no conclusion is claimed.
    NoClaim,
    /// Premise held but the ratio track did not come down.
    Fail,
}

#[derive(Debug, Clone)]
pub struct KroneckerCheck {
    pub verdict: KroneckerVerdict,
    /// Width of the weighted partial sums over the tail window.
    pub cauchy_width: f64,
    /// `(Σ_{k≤n} y_k) / g_n` for every n.
    pub ratio_track: Vec<f64>,
    /// Largest `|ratio|` over the tail window.
    pub tail_ratio_max: f64,
    pub window: usize,
    pub tolerance: f64,
}

/// Data-level Kronecker check: when `Σ y_k/g_k` is Cauchy at `tol` over the
/// tail window, the ratio `(Σ_{k≤n} y_k)/g_n` must fall below `tol` there.
pub fn kronecker_check(
    y: &[f64],
    g: &[f64],
    tol: f64,
    window: usize,
) -> Result<KroneckerCheck, DiagnosticsError> {
    if y.len() != g.len() || y.is_empty() {
        return Err(DiagnosticsError::LengthMismatch { y: y.len(), g: g.len() });
    }
    if window == 0 || window > y.len() {
        return Err(DiagnosticsError::BadWindow { window, horizon: y.len() });
    }
    check_scale(g)?;

    let mut weighted_sums = Vec::with_capacity(y.len());
    let mut ratio_track = Vec::with_capacity(y.len());
    let mut ws = 0.0;
    let mut psum = 0.0;
    for (&yk, &gk) in y.iter().zip(g) {
        ws += yk / gk;
        psum += yk;
        weighted_sums.push(ws);
        ratio_track.push(psum / gk);
    }

    let tail = &weighted_sums[weighted_sums.len() - window..];
    let cauchy_width = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let tail_ratio_max = ratio_track[ratio_track.len() - window..]
        .iter()
        .map(|r| r.abs())
        .fold(0.0, f64::max);

    let verdict = if cauchy_width > tol {
        KroneckerVerdict::NoClaim
    } else if tail_ratio_max <= tol {
        KroneckerVerdict::Pass
    } else {
        KroneckerVerdict::Fail
    };
    Ok(KroneckerCheck { verdict, cauchy_width, ratio_track, tail_ratio_max, window, tolerance: tol })
}

// ---------------------------------------------------------------------------
// Ratio-increment bound
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RatioBoundReport {
    /// Tail-window estimate of the ratio's limit.
    pub estimated_limit: f64,
    /// Slack added to the bound: three times the window's Cauchy width.
    pub slack: f64,
    /// Tail indices with `|y_n/g_n| > |limit| + 1 + slack`.
    pub violations: Vec<usize>,
    pub window: usize,
}

/// Converging ratios have small late increments: if `(Σ_{k≤n} y_k)/g_n → d`
/// then `|y_n/g_n| ≤ |d| + 1` for all but finitely many `n`.  Estimates `d`
/// from the tail window and reports every tail index that breaks the bound
/// plus slack (three window widths; the width is measured robustly, as the
/// median absolute deviation, so an isolated spike cannot mask itself).
pub fn convbound_check(y: &[f64], g: &[f64], window: usize) -> Result<RatioBoundReport, DiagnosticsError> {
    if y.len() != g.len() || y.is_empty() {
        return Err(DiagnosticsError::LengthMismatch { y: y.len(), g: g.len() });
    }
    if window == 0 || window > y.len() {
        return Err(DiagnosticsError::BadWindow { window, horizon: y.len() });
    }
    check_scale(g)?;

    let mut ratios = Vec::with_capacity(y.len());
    let mut psum = 0.0;
    for (&yk, &gk) in y.iter().zip(g) {
        psum += yk;
        ratios.push(psum / gk);
    }
    let median = |values: &mut Vec<f64>| -> f64 {
        values.sort_by(f64::total_cmp);
        values[values.len() / 2]
    };
    let tail = &ratios[ratios.len() - window..];
    let estimated_limit = median(&mut tail.to_vec());
    let width = median(&mut tail.iter().map(|r| (r - estimated_limit).abs()). collect());
    let slack = 3.0 * width;

    let start = y.len() - window;
    let mut violations = Vec::new();
    for i in start..y.len() {
        if (y[i] / g[i]).abs() > estimated_limit.abs() + 1.0 + slack {
            violations.push(i);
        }
    }
    Ok(RatioBoundReport { estimated_limit, slack, violations, window })
}

// ---------------------------------------------------------------------------
// Cauchy-failure witnesses
// ---------------------------------------------------------------------------

/// Indices `from < to` with `|Σ_{k=from+1}^{to} z_k| ≥ gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyWitness {
    pub from: usize,
    pub to: usize,
    pub gap: f64,
}

/// Finds the largest partial-sum excursion of the term sequence and returns it
/// as a witness when it reaches `gap`.  (The maximum over pairs of partial-sum
/// differences is the range of the partial sums.)
pub fn cauchy_failure(terms: &[f64], gap: f64) -> Option<CauchyWitness> {
    let mut partial = 0.0;
    // partial sums P_0 = 0, P_1, ..., P_n
    let mut min_val = 0.0;
    let mut min_idx = 0usize;
    let mut max_val = 0.0;
    let mut max_idx = 0usize;
    for (i, &z) in terms.iter().enumerate() {
        partial += z;
        if partial < min_val {
            min_val = partial;
            min_idx = i + 1;
        }
        if partial > max_val {
            max_val = partial;
            max_idx = i + 1;
        }
    }
    let spread = max_val - min_val;
    if spread >= gap {
        let (from, to) = if min_idx < max_idx { (min_idx, max_idx) } else { (max_idx, min_idx) };
        Some(CauchyWitness { from, to, gap: spread })
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Assembled trace diagnostics
// ---------------------------------------------------------------------------

/// Everything the diagnostics pass reads off one finished trace: series
/// classifications, the Kronecker ratio track, ratio-increment violations,
/// and the largest Cauchy-failure witness of the normalized increments.
/// A pure function of the trace and the declared window and tolerance.
#[derive(Debug)]
pub struct TraceDiagnostics {
    pub window: usize,
    pub tolerance: f64,
    /// `(series name, verdict)` for the capital, the centered sums, and the
    /// normalized statistic when a growth scale is supplied.
    pub series: Vec<(String, SeriesVerdict)>,
    /// Kronecker check of the centered increments against the growth scale.
    pub kronecker: Option<KroneckerCheck>,
    /// Ratio-increment bound on the same data.
    pub ratio_bound: Option<RatioBoundReport>,
    /// Largest unit-gap witness among the normalized increments.
    pub cauchy_witness: Option<CauchyWitness>,
}

/// Runs every diagnostic over a finished trace.  The growth scale, when
/// given, is applied to the running hedge-price sums.
pub fn diagnose_trace(
    trace: &GameTrace,
    window: usize,
    tolerance: f64,
    growth: Option<&GrowthFunction>,
) -> TraceDiagnostics {
    let capitals: Vec<f64> = trace.rounds.iter().map(|r| r.capital_after).collect();
    let spreads = trace.spread_sums();
    let mut series = vec![
        ("capital".to_string(), classify_series(&capitals, window, tolerance)),
        ("centered sums".to_string(), classify_series(&spreads[1..], window, tolerance)),
    ];

    let mut kronecker = None;
    let mut ratio_bound = None;
    let mut cauchy_witness = None;
    if let Some(g) = growth {
        let sums = trace.hedge_price_sums();
        let scales: Vec<f64> = sums[1..].iter().map(|&a| g.eval_shifted(a)).collect();
        let increments: Vec<f64> =
            trace.rounds.iter().map(|r| r.reality.outcome - r.forecast.price).collect();
        let statistic: Vec<f64> = spreads[1..]
            .iter()
            .zip(&scales)
            .map(|(s, g)| s.abs() / g.sqrt())
            .collect();
        series.push(("normalized statistic".to_string(), classify_series(&statistic, window, tolerance)));

        kronecker = kronecker_check(&increments, &scales, tolerance, window).ok();
        ratio_bound = convbound_check(&increments, &scales, window).ok();
        let z: Vec<f64> = increments.iter().zip(&scales).map(|(y, g)| y / g.sqrt()).collect();
        cauchy_witness = cauchy_failure(&z, 1.0);
    }
    TraceDiagnostics { window, tolerance, series, kronecker, ratio_bound, cauchy_witness }
}

// ---------------------------------------------------------------------------
// Rate experiments
// ---------------------------------------------------------------------------

/// Configuration for a normalized-rate experiment.
pub struct RateConfig {
    pub growth: GrowthFunction,
    pub rounds: usize,
    pub replications: usize,
    pub seed: u64,
    /// Flag threshold for "the Skeptic's capital stayed bounded".
    pub capital_bound: f64,
    /// Normalize by the running price sums (the coin game's `Ā_n`) instead of
    /// the hedge-price sums `A_n`.
    pub normalize_by_price_sums: bool,
}

/// Per-replication summary of the normalized statistic
/// `|S_n| / √g(Ā_n)` tracked at quartile checkpoints.
#[derive(Debug, Clone)]
pub struct RateReplication {
    pub stream: u64,
    /// Maximum of the statistic over each quarter of the horizon.
    pub quartile_maxima: [f64; 4],
    /// Whether the last quarter's maximum sits below the first quarter's.
    pub tail_below_first: bool,
    pub max_capital: f64,
    pub final_statistic: f64,
}

#[derive(Debug)]
pub struct RateSummary {
    pub replications: Vec<RateReplication>,
    /// Replications whose tail-quarter maximum dropped below the first
    /// quarter's.
    pub drops: usize,
    /// Whether every replication's capital stayed below the bound.
    pub capitals_bounded: bool,
    pub capital_bound: f64,
    pub rounds: usize,
}

impl RateSummary {
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str("rep stream      q1-max    q2-max    q3-max    q4-max  drop  max-capital\n");
        for (i, r) in self.replications.iter().enumerate() {
            out.push_str(&format!(
                "{:3} {:6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}  {:>4} {:>12.4}\n",
                i,
                r.stream,
                r.quartile_maxima[0],
                r.quartile_maxima[1],
                r.quartile_maxima[2],
                r.quartile_maxima[3],
                if r.tail_below_first { "yes" } else { "no" },
                r.max_capital,
            ));
        }
        out.push_str(&format!(
            "drops: {}/{}   capitals below {}: {}\n",
            self.drops,
            self.replications.len(),
            self.capital_bound,
            self.capitals_bounded
        ));
        out
    }
}

/// The normalized statistic's maximum over each quarter, plus the capital
/// ceiling, for one finished trace.
pub fn quartile_profile(trace: &GameTrace, growth: &GrowthFunction, by_price_sums: bool) -> ([f64; 4], f64, f64) {
    let n = trace.rounds.len();
    let sums = if by_price_sums { trace.price_sums() } else { trace.hedge_price_sums() };
    let spreads = trace.spread_sums();
    let mut maxima = [0.0f64; 4];
    let mut max_capital = f64::NEG_INFINITY;
    let mut last_stat = 0.0;
    for k in 1..=n {
        let scale = growth.eval_shifted(sums[k]);
        let stat = spreads[k].abs() / scale.sqrt();
        let quarter = ((k - 1) * 4 / n).min(3);
        maxima[quarter] = maxima[quarter].max(stat);
        max_capital = max_capital.max(trace.rounds[k - 1].capital_after);
        last_stat = stat;
    }
    (maxima, max_capital, last_stat)
}

/// Runs independent replications (stream = seed + index) and summarizes the
/// normalized statistic and the Skeptic's capital ceiling.
///
/// Replications share nothing: each builds its own players from its stream
/// inside the worker that runs it, so they execute concurrently across the
/// available parallelism.  The summary is ordered by replication index and is
/// identical however the work is scheduled.
pub fn run_rate_experiment(
    spec: &ProtocolSpec,
    cfg: &RateConfig,
    make_players: impl Fn(u64) -> (Box<dyn Forecaster>, Box<dyn SkepticStrategy>, Box<dyn RealityStrategy>)
        + Sync,
) -> Result<RateSummary, GameError> {
    let run_one = |index: usize| -> Result<RateReplication, GameError> {
        let stream = cfg.seed + index as u64;
        let (mut fc, mut sk, mut re) = make_players(stream);
        let trace = crate::game::run_game(spec, fc.as_mut(), sk.as_mut(), re.as_mut(), cfg.rounds, 1.0)?;
        let (quartile_maxima, max_capital, final_statistic) =
            quartile_profile(&trace, &cfg.growth, cfg.normalize_by_price_sums);
        Ok(RateReplication {
            stream,
            quartile_maxima,
            tail_below_first: quartile_maxima[3] < quartile_maxima[0],
            max_capital,
            final_statistic,
        })
    };

    let workers = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1).min(cfg.replications.max(1));
    let mut results: Vec<Option<Result<RateReplication, GameError>>> = Vec::new();
    results.resize_with(cfg.replications, || None);
    if workers <= 1 {
        for (i, slot) in results.iter_mut().enumerate() {
            *slot = Some(run_one(i));
        }
    } else {
        let chunk = cfg.replications.div_ceil(workers);
        std::thread::scope(|scope| {
            for piece in results.chunks_mut(chunk).enumerate() {
                let (w, slots) = piece;
                let run_one = &run_one;
                scope.spawn(move || {
                    for (j, slot) in slots.iter_mut().enumerate() {
                        *slot = Some(run_one(w * chunk + j));
                    }
                });
            }
        });
    }

    let mut replications = Vec::with_capacity(cfg.replications);
    for slot in results {
        replications.push(slot.expect("every replication ran")?);
    }
    let drops = replications.iter().filter(|r| r.tail_below_first).count();
    let capitals_bounded = replications.iter().all(|r| r.max_capital < cfg.capital_bound);
    Ok(RateSummary {
        replications,
        drops,
        capitals_bounded,
        capital_bound: cfg.capital_bound,
        rounds: cfg.rounds,
    })
}
