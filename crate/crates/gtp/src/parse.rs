//! Compact textual descriptors for protocols, hedges, growth functions, and
//! strategies — the formats the command line and trace headers use.
//!
//! ```text
//! hedges:     quad | pow:1.5 | custom:abs          (suffix :h0 or :h1)
//! growth:     ilog:2 | pow:1 | const:1
//! protocols:  bounded:C=2 | bfqh:C=1 | coin | trinomial | unbounded
//!             | ufgh:<hedge>       (suffix :restrict=extremes or
//!                                   :restrict=set(a,b,...))
//! skeptics:   zero | unit | const:M=1,V=0 | quad-comp:+ | quad-comp:-
//!             | wcomp:<growth> | trunc:<inner>:D=5 | mixtrunc:<inner>:Dmax=30
//!             | ufgh-var:D=3,g=<growth> | ufgh-mul:eps=0.2,sign=+,g=<growth>
//!             | rate-force:eps=0.2,Dmax=30,g=<growth> | coin-bc[:Dmax=20]
//!             | random:seed=7
//! reality:    const:x=0.5 | price | random:pm1:seed=1 | random:interval:seed=1
//!             | fair-coin:seed=1 | comply:strong:surrogate=<skeptic>
//!             | comply:eps=0.5:surrogate=<skeptic> | trinomial-comply:g=<growth>
//!             | power-comply:r=1.5,g=<growth>
//! forecaster: const:m=0,v=1 | coin:p=0.5 | random:seed=1
//! ```

use crate::forecaster::{CoinForecaster, ConstForecaster, RandomForecaster};
use crate::game::{Forecaster, RealityStrategy, SkepticStrategy};
use crate::growth::GrowthFunction;
use crate::hedge::{Hedge, Regularization};
use crate::protocol::{ProtocolSpec, RealityRestriction};
use crate::reality::{
    power_hedge_comply, trinomial_comply, ConstReality, FairCoinReality, PriceReality,
    RandomIntervalReality, RandomSignReality, SurrogateComply, SurrogateComplyStrong,
};
use crate::skeptic::{
    coin_bc, force_general_rate, mixture_of_truncations, unit_bet, ConstantBet,
    QuadraticCompensator, RandomDutySkeptic, Sign, Truncated, UfghMultiplicative, UfghVariance,
};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("cannot parse {what} descriptor {input:?}: {message}")]
pub struct ParseError {
    pub what: &'static str,
    pub input: String,
    pub message: String,
}

fn err(what: &'static str, input: &str, message: impl Into<String>) -> ParseError {
    ParseError { what, input: input.to_string(), message: message.into() }
}

fn parse_f64(what: &'static str, input: &str, s: &str) -> Result<f64, ParseError> {
    s.parse::<f64>().map_err(|_| err(what, input, format!("bad number {s:?}")))
}

fn parse_u64(what: &'static str, input: &str, s: &str) -> Result<u64, ParseError> {
    s.parse::<u64>().map_err(|_| err(what, input, format!("bad integer {s:?}")))
}

/// Splits `key=value` pairs separated by commas.
fn key_values(s: &str) -> impl Iterator<Item = (&str, &str)> {
    s.split(',').filter(|p| !p.is_empty()).map(|p| match p.split_once('=') {
        Some((k, v)) => (k.trim(), v.trim()),
        None => (p.trim(), ""),
    })
}

// ---------------------------------------------------------------------------
// Hedges and growth functions
// ---------------------------------------------------------------------------

pub fn parse_hedge(input: &str) -> Result<Hedge, ParseError> {
    let (base, reg) = if let Some(b) = input.strip_suffix(":h0") {
        (b, Regularization::H0)
    } else if let Some(b) = input.strip_suffix(":h1") {
        (b, Regularization::H1)
    } else {
        (input, Regularization::None)
    };
    let hedge = if base == "quad" {
        Hedge::quadratic()
    } else if let Some(r) = base.strip_prefix("pow:") {
        Hedge::power(parse_f64("hedge", input, r)?)
            .map_err(|e| err("hedge", input, e.to_string()))?
    } else if let Some(name) = base.strip_prefix("custom:") {
        match name {
            "abs" => Hedge::custom("abs", |t| t, 1.0).expect("threshold 1 is valid"),
            other => return Err(err("hedge", input, format!("unknown custom hedge {other:?}; known: abs"))),
        }
    } else {
        return Err(err("hedge", input, "expected quad | pow:<r> | custom:<name>"));
    };
    Ok(hedge.regularized(reg))
}

pub fn parse_growth(input: &str) -> Result<GrowthFunction, ParseError> {
    if let Some(depth) = input.strip_prefix("ilog:") {
        let depth = parse_u64("growth", input, depth)? as usize;
        if depth > 3 {
            return Err(err("growth", input, "iterated-log depth above 3 overflows f64"));
        }
        Ok(GrowthFunction::iterated_log(depth))
    } else if let Some(p) = input.strip_prefix("pow:") {
        GrowthFunction::power_of_arg(parse_f64("growth", input, p)?)
            .map_err(|e| err("growth", input, e.to_string()))
    } else if let Some(c) = input.strip_prefix("const:") {
        GrowthFunction::constant(parse_f64("growth", input, c)?)
            .map_err(|e| err("growth", input, e.to_string()))
    } else {
        Err(err("growth", input, "expected ilog:<i> | pow:<p> | const:<c>"))
    }
}

// ---------------------------------------------------------------------------
// Protocols
// ---------------------------------------------------------------------------

pub fn parse_protocol(input: &str) -> Result<ProtocolSpec, ParseError> {
    // optional restriction suffix
    let (body, restriction) = if let Some((b, r)) = input.split_once(":restrict=") {
        let restriction = if r == "extremes" {
            RealityRestriction::PriceAndExtremes
        } else if let Some(list) = r.strip_prefix("set(").and_then(|s| s.strip_suffix(')')) {
            let mut set = Vec::new();
            for piece in list.split(',') {
                set.push(parse_f64("protocol", input, piece)?);
            }
            RealityRestriction::Fixed(set)
        } else {
            return Err(err("protocol", input, "expected restrict=extremes or restrict=set(a,b,...)"));
        };
        (b, Some(restriction))
    } else {
        (input, None)
    };

    let spec = if body == "coin" {
        ProtocolSpec::coin_toss()
    } else if body == "trinomial" {
        ProtocolSpec::trinomial()
    } else if body == "unbounded" {
        ProtocolSpec::unbounded()
    } else if let Some(rest) = body.strip_prefix("bounded:C=") {
        ProtocolSpec::bounded(parse_f64("protocol", input, rest)?)
            .map_err(|e| err("protocol", input, e.to_string()))?
    } else if let Some(rest) = body.strip_prefix("bfqh:C=") {
        ProtocolSpec::bfqh(parse_f64("protocol", input, rest)?)
            .map_err(|e| err("protocol", input, e.to_string()))?
    } else if let Some(rest) = body.strip_prefix("ufgh:") {
        let hedge = parse_hedge(rest)?;
        ProtocolSpec::ufgh(hedge).map_err(|e| err("protocol", input, e.to_string()))?
    } else {
        return Err(err(
            "protocol",
            input,
            "expected bounded:C=<c> | bfqh:C=<c> | coin | trinomial | unbounded | ufgh:<hedge>",
        ));
    };
    Ok(match restriction {
        Some(r) => spec.with_restriction(r),
        None => spec,
    })
}

// ---------------------------------------------------------------------------
// Skeptic strategies
// ---------------------------------------------------------------------------

pub fn parse_skeptic(input: &str, spec: &ProtocolSpec) -> Result<Box<dyn SkepticStrategy>, ParseError> {
    if input == "zero" {
        return Ok(Box::new(ConstantBet::zero()));
    }
    if input == "unit" {
        return Ok(Box::new(unit_bet()));
    }
    if let Some(rest) = input.strip_prefix("const:") {
        let mut stake = 0.0;
        let mut hedge_stake = 0.0;
        for (k, v) in key_values(rest) {
            match k {
                "M" => stake = parse_f64("skeptic", input, v)?,
                "V" => hedge_stake = parse_f64("skeptic", input, v)?,
                other => return Err(err("skeptic", input, format!("unknown key {other:?}"))),
            }
        }
        return Ok(Box::new(ConstantBet::new(stake, hedge_stake)));
    }
    if let Some(sign) = input.strip_prefix("quad-comp:") {
        let sign = match sign {
            "+" => Sign::Plus,
            "-" => Sign::Minus,
            other => return Err(err("skeptic", input, format!("expected + or -, got {other:?}"))),
        };
        return QuadraticCompensator::for_protocol(spec, sign)
            .map(|s| Box::new(s) as Box<dyn SkepticStrategy>)
            .map_err(|e| err("skeptic", input, e.to_string()));
    }
    if let Some(growth) = input.strip_prefix("wcomp:") {
        return Ok(Box::new(crate::skeptic::WeightedCompensator::new(parse_growth(growth)?)));
    }
    if let Some(rest) = input.strip_prefix("trunc:") {
        let (inner, d) = rest
            .rsplit_once(":D=")
            .ok_or_else(|| err("skeptic", input, "expected trunc:<inner>:D=<d>"))?;
        let inner = parse_skeptic(inner, spec)?;
        return Truncated::new(spec, inner, parse_f64("skeptic", input, d)?)
            .map(|s| Box::new(s) as Box<dyn SkepticStrategy>)
            .map_err(|e| err("skeptic", input, e.to_string()));
    }
    if let Some(rest) = input.strip_prefix("mixtrunc:") {
        let (inner, d_max) = rest
            .rsplit_once(":Dmax=")
            .ok_or_else(|| err("skeptic", input, "expected mixtrunc:<inner>:Dmax=<d>"))?;
        let d_max = parse_u64("skeptic", input, d_max)? as u32;
        // components are fresh parses of the inner descriptor
        let mut parse_failure = None;
        let mixture = mixture_of_truncations(
            spec,
            || match parse_skeptic(inner, spec) {
                Ok(s) => s,
                Err(e) => {
                    parse_failure = Some(e);
                    Box::new(ConstantBet::zero())
                }
            },
            d_max,
        );
        if let Some(e) = parse_failure {
            return Err(e);
        }
        return mixture
            .map(|s| Box::new(s) as Box<dyn SkepticStrategy>)
            .map_err(|e| err("skeptic", input, e.to_string()));
    }
    if let Some(rest) = input.strip_prefix("ufgh-var:") {
        let mut stake = 1u32;
        let mut growth = None;
        for (k, v) in key_values(rest) {
            match k {
                "D" => stake = parse_u64("skeptic", input, v)? as u32,
                "g" => growth = Some(parse_growth(v)?),
                other => return Err(err("skeptic", input, format!("unknown key {other:?}"))),
            }
        }
        let growth = growth.ok_or_else(|| err("skeptic", input, "missing g=<growth>"))?;
        return Ok(Box::new(UfghVariance::new(spec, growth, stake)));
    }
    if let Some(rest) = input.strip_prefix("ufgh-mul:") {
        let mut epsilon = 0.2;
        let mut sign = Sign::Plus;
        let mut growth = None;
        for (k, v) in key_values(rest) {
            match k {
                "eps" => epsilon = parse_f64("skeptic", input, v)?,
                "sign" => {
                    sign = match v {
                        "+" => Sign::Plus,
                        "-" => Sign::Minus,
                        other => return Err(err("skeptic", input, format!("bad sign {other:?}"))),
                    }
                }
                "g" => growth = Some(parse_growth(v)?),
                other => return Err(err("skeptic", input, format!("unknown key {other:?}"))),
            }
        }
        let growth = growth.ok_or_else(|| err("skeptic", input, "missing g=<growth>"))?;
        return UfghMultiplicative::new(spec, epsilon, sign, growth)
            .map(|s| Box::new(s) as Box<dyn SkepticStrategy>)
            .map_err(|e| err("skeptic", input, e.to_string()));
    }
    if let Some(rest) = input.strip_prefix("rate-force:") {
        let mut epsilon = 0.2;
        let mut d_max = 30u32;
        let mut growth = None;
        for (k, v) in key_values(rest) {
            match k {
                "eps" => epsilon = parse_f64("skeptic", input, v)?,
                "Dmax" => d_max = parse_u64("skeptic", input, v)? as u32,
                "g" => growth = Some(parse_growth(v)?),
                other => return Err(err("skeptic", input, format!("unknown key {other:?}"))),
            }
        }
        let growth = growth.ok_or_else(|| err("skeptic", input, "missing g=<growth>"))?;
        return force_general_rate(spec, &growth, epsilon, d_max)
            .map(|s| Box::new(s) as Box<dyn SkepticStrategy>)
            .map_err(|e| err("skeptic", input, e.to_string()));
    }
    if let Some(inner) = input.strip_prefix("coin-reduce:") {
        // the inner strategy bets as in the quadratic-hedge game bounding the
        // coin game, so parse it against that game
        let bfqh = ProtocolSpec::bfqh(1.0).expect("unit bound is valid");
        return Ok(Box::new(crate::skeptic::CoinReduced::new(parse_skeptic(inner, &bfqh)?)));
    }
    if input == "coin-bc" {
        return Ok(Box::new(coin_bc(30)));
    }
    if let Some(rest) = input.strip_prefix("coin-bc:Dmax=") {
        return Ok(Box::new(coin_bc(parse_u64("skeptic", input, rest)? as u32)));
    }
    if let Some(rest) = input.strip_prefix("random:seed=") {
        return Ok(Box::new(RandomDutySkeptic::new(parse_u64("skeptic", input, rest)?)));
    }
    Err(err("skeptic", input, "unknown strategy"))
}

// ---------------------------------------------------------------------------
// Reality strategies
// ---------------------------------------------------------------------------

pub fn parse_reality(input: &str, spec: &ProtocolSpec) -> Result<Box<dyn RealityStrategy>, ParseError> {
    if input == "price" {
        return Ok(Box::new(PriceReality));
    }
    if let Some(x) = input.strip_prefix("const:x=") {
        return Ok(Box::new(ConstReality::new(parse_f64("reality", input, x)?)));
    }
    if let Some(rest) = input.strip_prefix("random:pm1:seed=") {
        let magnitude = spec.bound().unwrap_or(1.0);
        return Ok(Box::new(RandomSignReality::new(magnitude, parse_u64("reality", input, rest)?)));
    }
    if let Some(rest) = input.strip_prefix("random:interval:seed=") {
        let bound = spec.bound().unwrap_or(1.0);
        return Ok(Box::new(RandomIntervalReality::new(bound, parse_u64("reality", input, rest)?)));
    }
    if let Some(rest) = input.strip_prefix("fair-coin:seed=") {
        return Ok(Box::new(FairCoinReality::new(parse_u64("reality", input, rest)?)));
    }
    if let Some(rest) = input.strip_prefix("comply:strong:surrogate=") {
        let surrogate = parse_skeptic(rest, spec)?;
        return Ok(Box::new(SurrogateComplyStrong::new(spec, surrogate)));
    }
    if let Some(rest) = input.strip_prefix("comply:eps=") {
        let (eps, surrogate) = rest
            .split_once(":surrogate=")
            .ok_or_else(|| err("reality", input, "expected comply:eps=<e>:surrogate=<skeptic>"))?;
        let surrogate = parse_skeptic(surrogate, spec)?;
        return SurrogateComply::new(spec, surrogate, parse_f64("reality", input, eps)?)
            .map(|s| Box::new(s) as Box<dyn RealityStrategy>)
            .map_err(|e| err("reality", input, e.to_string()));
    }
    if let Some(rest) = input.strip_prefix("trinomial-comply:g=") {
        return Ok(Box::new(trinomial_comply(parse_growth(rest)?)));
    }
    if let Some(rest) = input.strip_prefix("power-comply:") {
        let mut exponent = None;
        let mut growth = None;
        for (k, v) in key_values(rest) {
            match k {
                "r" => exponent = Some(parse_f64("reality", input, v)?),
                "g" => growth = Some(parse_growth(v)?),
                other => return Err(err("reality", input, format!("unknown key {other:?}"))),
            }
        }
        let exponent = exponent.ok_or_else(|| err("reality", input, "missing r=<exponent>"))?;
        let growth = growth.ok_or_else(|| err("reality", input, "missing g=<growth>"))?;
        return power_hedge_comply(exponent, growth)
            .map(|s| Box::new(s) as Box<dyn RealityStrategy>)
            .map_err(|e| err("reality", input, e.to_string()));
    }
    Err(err("reality", input, "unknown strategy"))
}

// ---------------------------------------------------------------------------
// Forecasters
// ---------------------------------------------------------------------------

pub fn parse_forecaster(input: &str, spec: &ProtocolSpec) -> Result<Box<dyn Forecaster>, ParseError> {
    if let Some(rest) = input.strip_prefix("const:") {
        let mut price = 0.0;
        let mut hedge_price = 0.0;
        for (k, v) in key_values(rest) {
            match k {
                "m" => price = parse_f64("forecaster", input, v)?,
                "v" => hedge_price = parse_f64("forecaster", input, v)?,
                other => return Err(err("forecaster", input, format!("unknown key {other:?}"))),
            }
        }
        return Ok(Box::new(ConstForecaster::new(price, hedge_price)));
    }
    if let Some(p) = input.strip_prefix("coin:p=") {
        return Ok(Box::new(CoinForecaster::new(parse_f64("forecaster", input, p)?)));
    }
    if let Some(rest) = input.strip_prefix("random:seed=") {
        return Ok(Box::new(RandomForecaster::new(spec, parse_u64("forecaster", input, rest)?)));
    }
    Err(err("forecaster", input, "unknown strategy"))
}
