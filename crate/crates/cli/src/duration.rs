//! Durations written with unit suffixes, e.g. `"39us"`, `"12ms"`, `"inf"`.

use std::fmt;

use netbench::network::Duration;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite duration or an unbounded lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Span {
    #[default]
    Infinite,
    Finite(Duration),
}

impl Span {
    pub fn finite(self) -> Option<Duration> {
        match self {
            Span::Infinite => None,
            Span::Finite(d) => Some(d),
        }
    }
}

pub fn parse_span(text: &str) -> Result<Span, String> {
    let t = text.trim();
    if matches!(t, "inf" | "infinite" | "∞") {
        return Ok(Span::Infinite);
    }
    let split = t.find(|c: char| !(c.is_ascii_digit() || c == '.')).unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let scale: u64 = match unit.trim() {
        "ns" => 1,
        "us" | "µs" => 1_000,
        "ms" => 1_000_000,
        "s" => 1_000_000_000,
        "" => return Err(format!("duration `{t}` needs a unit (ns, us, ms, s)")),
        other => return Err(format!("unknown duration unit `{other}` in `{t}`")),
    };
    let value: f64 = num.parse().map_err(|_| format!("bad duration `{t}`"))?;
    let ns = value * scale as f64;
    if !ns.is_finite() || ns < 0.0 || (ns - ns.round()).abs() > 1e-6 {
        return Err(format!("duration `{t}` is not a whole number of nanoseconds"));
    }
    Ok(Span::Finite(Duration(ns.round() as u64)))
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Span::Infinite => f.write_str("inf"),
            Span::Finite(d) => write!(f, "{}ns", d.nanos()),
        }
    }
}

impl Serialize for Span {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Span {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct SpanVisitor;
        impl Visitor<'_> for SpanVisitor {
            type Value = Span;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a duration such as \"39us\" or \"inf\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Span, E> {
                parse_span(v).map_err(E::custom)
            }
        }
        d.deserialize_str(SpanVisitor)
    }
}
