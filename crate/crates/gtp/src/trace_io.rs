//! Trace serialization and replay verification.
//!
//! A trace file is JSON Lines: a header `{"protocol", "K0", "seed"}` followed
//! by one round per line with fields `{"n","m","v","M","V","x","payoff","K"}`.
//! Floats are written in shortest round-trip form, so replay recomputes every
//! payoff and capital bit-for-bit.  CSV export carries the same columns;
//! JSONL is the source of truth.

use crate::game::{GameTrace, Round};
use crate::protocol::{
    payoff, validate_forecast, validate_reality, validate_skeptic, ForecastMove, MoveViolation,
    ProtocolSpec, RealityMove, SkepticMove,
};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

#[derive(Debug, Serialize, Deserialize)]
struct HeaderLine {
    protocol: String,
    #[serde(rename = "K0")]
    initial_capital: f64,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RoundLine {
    n: usize,
    m: f64,
    v: f64,
    #[serde(rename = "M")]
    stake: f64,
    #[serde(rename = "V")]
    hedge_stake: f64,
    x: f64,
    payoff: f64,
    #[serde(rename = "K")]
    capital: f64,
}

impl RoundLine {
    fn from_round(r: &Round) -> Self {
        Self {
            n: r.index,
            m: r.forecast.price,
            v: r.forecast.hedge_price,
            stake: r.skeptic.stake,
            hedge_stake: r.skeptic.hedge_stake,
            x: r.reality.outcome,
            payoff: r.payoff,
            capital: r.capital_after,
        }
    }

    fn into_round(self) -> Round {
        Round {
            index: self.n,
            forecast: ForecastMove::new(self.m, self.v),
            skeptic: SkepticMove::new(self.stake, self.hedge_stake),
            reality: RealityMove::new(self.x),
            payoff: self.payoff,
            capital_after: self.capital,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty file: missing header line")]
    MissingHeader,
    #[error("line 1: unknown protocol {0:?}")]
    BadProtocol(String),
}

/// Writes the JSONL form of a trace.
pub fn write_jsonl(trace: &GameTrace, seed: Option<u64>, out: &mut impl Write) -> Result<(), TraceError> {
    let header = HeaderLine {
        protocol: trace.protocol.to_string(),
        initial_capital: trace.initial_capital,
        seed,
    };
    serde_json::to_writer(&mut *out, &header).map_err(io_from_json)?;
    out.write_all(b"\n")?;
    for round in &trace.rounds {
        serde_json::to_writer(&mut *out, &RoundLine::from_round(round)).map_err(io_from_json)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

fn io_from_json(e: serde_json::Error) -> TraceError {
    TraceError::Io(std::io::Error::other(e))
}

/// Writes the CSV form: a column header, then one row per round.
pub fn write_csv(trace: &GameTrace, out: &mut impl Write) -> Result<(), TraceError> {
    writeln!(out, "n,m,v,M,V,x,payoff,K")?;
    for r in &trace.rounds {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.index,
            r.forecast.price,
            r.forecast.hedge_price,
            r.skeptic.stake,
            r.skeptic.hedge_stake,
            r.reality.outcome,
            r.payoff,
            r.capital_after
        )?;
    }
    Ok(())
}

/// A parsed trace file.
#[derive(Debug)]
pub struct StoredTrace {
    pub protocol: ProtocolSpec,
    pub initial_capital: f64,
    pub seed: Option<u64>,
    pub rounds: Vec<Round>,
}

impl StoredTrace {
    pub fn into_game_trace(self) -> GameTrace {
        GameTrace {
            protocol: self.protocol,
            initial_capital: self.initial_capital,
            rounds: self.rounds,
            prudence_violation: None,
        }
    }
}

/// Parses a JSONL trace, reporting the offending line on failure.
pub fn read_jsonl(input: &mut impl BufRead) -> Result<StoredTrace, TraceError> {
    let mut lines = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            lines.push((i + 1, line));
        }
    }
    let Some((_, header_text)) = lines.first() else {
        return Err(TraceError::MissingHeader);
    };
    let header: HeaderLine = serde_json::from_str(header_text)
        .map_err(|e| TraceError::Parse { line: 1, message: e.to_string() })?;
    let protocol = crate::parse::parse_protocol(&header.protocol)
        .map_err(|_| TraceError::BadProtocol(header.protocol.clone()))?;
    let mut rounds = Vec::with_capacity(lines.len().saturating_sub(1));
    for (line_no, text) in &lines[1..] {
        let parsed: RoundLine = serde_json::from_str(text)
            .map_err(|e| TraceError::Parse { line: *line_no, message: e.to_string() })?;
        rounds.push(parsed.into_round());
    }
    Ok(StoredTrace { protocol, initial_capital: header.initial_capital, seed: header.seed, rounds })
}

/// One replay discrepancy.
#[derive(Debug, Clone)]
pub struct Mismatch {
    pub round: usize,
    pub field: &'static str,
    pub stored: f64,
    pub recomputed: f64,
}

/// Replay verdict: recomputation mismatches and coherence violations.
#[derive(Debug, Default)]
pub struct ReplayReport {
    pub rounds: usize,
    pub mismatches: Vec<Mismatch>,
    pub coherence_violations: Vec<(usize, MoveViolation)>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty() && self.coherence_violations.is_empty()
    }
}

impl std::fmt::Display for ReplayReport {
    fn fmt(&self, out: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_clean() {
            return write!(out, "replay clean over {} rounds", self.rounds);
        }
        writeln!(out, "replay found problems over {} rounds:", self.rounds)?;
        for m in &self.mismatches {
            writeln!(
                out,
                "  round {} field {}: stored {} recomputed {}",
                m.round, m.field, m.stored, m.recomputed
            )?;
        }
        for (round, v) in &self.coherence_violations {
            writeln!(out, "  round {round} coherence: {v}")?;
        }
        Ok(())
    }
}

/// Recomputes every payoff and the capital chain from the stored moves and
/// compares exactly (same arithmetic as the game loop, so a faithful emitter
/// round-trips bit-for-bit).  Invalid moves are flagged as coherence
/// violations.
pub fn replay_verify(stored: &StoredTrace) -> ReplayReport {
    let mut report = ReplayReport { rounds: stored.rounds.len(), ..Default::default() };
    let spec = &stored.protocol;
    let mut capital = stored.initial_capital;
    for (i, r) in stored.rounds.iter().enumerate() {
        let expected_index = i + 1;
        if r.index != expected_index {
            report.mismatches.push(Mismatch {
                round: expected_index,
                field: "n",
                stored: r.index as f64,
                recomputed: expected_index as f64,
            });
        }
        for validity in [
            validate_forecast(spec, &r.forecast),
            validate_skeptic(spec, &r.skeptic),
            validate_reality(spec, &r.forecast, &r.reality),
        ] {
            if let Err(v) = validity {
                report.coherence_violations.push((r.index, v));
            }
        }
        let recomputed = payoff(spec, &r.forecast, &r.skeptic, &r.reality);
        if recomputed != r.payoff {
            report.mismatches.push(Mismatch {
                round: r.index,
                field: "payoff",
                stored: r.payoff,
                recomputed,
            });
        }
        capital += recomputed;
        if capital != r.capital_after {
            report.mismatches.push(Mismatch {
                round: r.index,
                field: "K",
                stored: r.capital_after,
                recomputed: capital,
            });
        }
    }
    report
}

/// Convenience: parse and verify in one step.
pub fn replay_verify_reader(input: &mut impl BufRead) -> Result<ReplayReport, TraceError> {
    Ok(replay_verify(&read_jsonl(input)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{run_game, Forecaster};
    use crate::reality::RandomIntervalReality;
    use crate::skeptic::{QuadraticCompensator, Sign};

    struct ConstForecast(f64, f64);
    impl Forecaster for ConstForecast {
        fn announce(&mut self, _n: usize) -> ForecastMove {
            ForecastMove::new(self.0, self.1)
        }
    }

    fn sample_trace() -> GameTrace {
        let spec = ProtocolSpec::bfqh(1.0).unwrap();
        let mut fc = ConstForecast(0.25, 0.5);
        let mut sk = QuadraticCompensator::new(Sign::Plus);
        let mut re = RandomIntervalReality::new(1.0, 99);
        run_game(&spec, &mut fc, &mut sk, &mut re, 50, 1.0).unwrap()
    }

    #[test]
    fn roundtrip_replays_clean() {
        let trace = sample_trace();
        let mut buf = Vec::new();
        write_jsonl(&trace, Some(99), &mut buf).unwrap();
        let stored = read_jsonl(&mut buf.as_slice()).unwrap();
        assert_eq!(stored.seed, Some(99));
        assert_eq!(stored.rounds.len(), 50);
        let report = replay_verify(&stored);
        assert!(report.is_clean(), "{report}");
    }

    #[test]
    fn corrupted_capital_is_reported_at_its_round() {
        let trace = sample_trace();
        let mut buf = Vec::new();
        write_jsonl(&trace, None, &mut buf).unwrap();
        let mut stored = read_jsonl(&mut buf.as_slice()).unwrap();
        stored.rounds[17].capital_after += 1e-9;
        let report = replay_verify(&stored);
        assert_eq!(report.mismatches.len(), 1);
        assert_eq!(report.mismatches[0].round, 18);
        assert_eq!(report.mismatches[0].field, "K");
    }

    #[test]
    fn invalid_forecast_is_flagged_as_coherence_violation() {
        let trace = sample_trace();
        let mut buf = Vec::new();
        write_jsonl(&trace, None, &mut buf).unwrap();
        let mut stored = read_jsonl(&mut buf.as_slice()).unwrap();
        // hedge price above the BFQH cap C² - m²
        stored.rounds[3].forecast.hedge_price = 2.0;
        let report = replay_verify(&stored);
        assert!(!report.is_clean());
        assert!(report
            .coherence_violations
            .iter()
            .any(|(round, v)| *round == 4 && matches!(v, MoveViolation::HedgePriceAboveCap { .. })));
    }

    #[test]
    fn csv_has_one_row_per_round() {
        let trace = sample_trace();
        let mut buf = Vec::new();
        write_csv(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 51);
        assert!(text.starts_with("n,m,v,M,V,x,payoff,K\n"));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "{\"protocol\":\"bfqh:C=1\",\"K0\":1.0,\"seed\":null}\nnot json\n";
        let err = read_jsonl(&mut text.as_bytes()).unwrap_err();
        match err {
            TraceError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
