//! JSON scenario files.
//!
//! ```json
//! {
//!   "T": 11.0,
//!   "mode": "half",
//!   "log_base": 2.0,
//!   "h_s": 1.0,
//!   "h_r": 1.0,
//!   "source": { "arrivals": [ { "t": 0.0, "E": 10.0 } ] },
//!   "relay":  { "arrivals": [ { "t": 0.0, "E": 5.0 }, { "t": 7.0, "E": 5.0 }, { "t": 10.0, "E": 6.0 } ] }
//! }
//! ```
//!
//! `mode` accepts `full`/`half` (or `full-duplex`/`half-duplex`), `log_base`
//! defaults to 2 and both gains default to 1. Arrival lists must be sorted by
//! `t` with non-negative `t` and `E`; violations are reported with the line and
//! column where the offending entry ends.

use std::fmt;

use serde::de::{self, DeserializeSeed, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Serialize};

use super::{Arrival, EnergyArrivalProfile, Mode, RateFunction, Scenario};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Serialize)]
struct RawArrival {
    t: f64,
    #[serde(rename = "E")]
    e: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
struct ArrivalList(Vec<RawArrival>);

impl<'de> Deserialize<'de> for ArrivalList {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ListVisitor;

        impl<'de> Visitor<'de> for ListVisitor {
            type Value = ArrivalList;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of {\"t\": time, \"E\": energy} objects sorted by t")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<ArrivalList, A::Error> {
                let mut out: Vec<RawArrival> = Vec::new();
                loop {
                    let seed = ArrivalSeed { index: out.len(), prev: out.last().map(|a| a.t) };
                    match seq.next_element_seed(seed)? {
                        Some(a) => out.push(a),
                        None => return Ok(ArrivalList(out)),
                    }
                }
            }
        }

        deserializer.deserialize_seq(ListVisitor)
    }
}

/// Validates one arrival inside its own object so that errors point at it.
struct ArrivalSeed {
    index: usize,
    prev: Option<f64>,
}

impl<'de> DeserializeSeed<'de> for ArrivalSeed {
    type Value = RawArrival;

    fn deserialize<D: Deserializer<'de>>(self, deserializer: D) -> std::result::Result<RawArrival, D::Error> {
        deserializer.deserialize_map(self)
    }
}

impl<'de> Visitor<'de> for ArrivalSeed {
    type Value = RawArrival;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an object {\"t\": time, \"E\": energy}")
    }

    fn visit_map<M: MapAccess<'de>>(self, mut map: M) -> std::result::Result<RawArrival, M::Error> {
        let (mut t, mut e) = (None, None);
        while let Some(key) = map.next_key::<String>()? {
            match key.as_str() {
                "t" => t = Some(map.next_value::<f64>()?),
                "E" => e = Some(map.next_value::<f64>()?),
                other => return Err(de::Error::unknown_field(other, &["t", "E"])),
            }
        }
        let i = self.index;
        let t = t.ok_or_else(|| de::Error::custom(format!("arrival {i}: missing field `t`")))?;
        let e = e.ok_or_else(|| de::Error::custom(format!("arrival {i}: missing field `E`")))?;
        if !t.is_finite() || t < 0.0 {
            return Err(de::Error::custom(format!("arrival {i}: negative or non-finite time t = {t}")));
        }
        if !e.is_finite() || e < 0.0 {
            return Err(de::Error::custom(format!("arrival {i}: negative or non-finite energy E = {e}")));
        }
        if let Some(prev) = self.prev {
            if t < prev {
                return Err(de::Error::custom(format!(
                    "arrival {i}: time t = {t} is earlier than the previous arrival (t = {prev}); arrivals must be sorted"
                )));
            }
        }
        Ok(RawArrival { t, e })
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    #[serde(default)]
    arrivals: ArrivalList,
}

fn positive<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let v = f64::deserialize(d)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(de::Error::custom(format!("expected a positive finite number, got {v}")))
    }
}

fn base<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let v = positive(d)?;
    if v == 1.0 {
        Err(de::Error::custom("log_base must differ from 1"))
    } else {
        Ok(v)
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(rename = "T", deserialize_with = "positive")]
    horizon: f64,
    mode: Mode,
    #[serde(default = "two", deserialize_with = "base")]
    log_base: f64,
    #[serde(default = "one", deserialize_with = "positive")]
    h_s: f64,
    #[serde(default = "one", deserialize_with = "positive")]
    h_r: f64,
    #[serde(default)]
    source: RawProfile,
    #[serde(default)]
    relay: RawProfile,
}

fn to_profile<S: Scalar>(raw: &RawProfile, which: &str, horizon: f64) -> Result<EnergyArrivalProfile<S>> {
    for (i, a) in raw.arrivals.0.iter().enumerate() {
        if a.t >= horizon {
            return Err(Error::invalid(format!(
                "{which}.arrivals[{i}]: time t = {} is not before T = {horizon}",
                a.t
            )));
        }
    }
    EnergyArrivalProfile::new(raw.arrivals.0.iter().map(|a| Arrival::new(S::lit(a.t), S::lit(a.e))).collect())
}

impl<S: Scalar> Scenario<S> {
    /// Parse a scenario from JSON text.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawScenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
        let source = to_profile(&raw.source, "source", raw.horizon)?;
        let relay = to_profile(&raw.relay, "relay", raw.horizon)?;
        let base = S::lit(raw.log_base);
        Scenario::new(
            S::lit(raw.horizon),
            source,
            relay,
            RateFunction::new(S::lit(raw.h_s), base)?,
            RateFunction::new(S::lit(raw.h_r), base)?,
            raw.mode,
        )
    }

    /// Serialize to the JSON scenario format. Requires both hops to share a log base.
    pub fn to_json_string(&self) -> Result<String> {
        if self.source_rate().log_base() != self.relay_rate().log_base() {
            return Err(Error::invalid("scenario files carry a single log base for both hops"));
        }
        let prof = |p: &EnergyArrivalProfile<S>| RawProfile {
            arrivals: ArrivalList(
                p.arrivals().iter().map(|a| RawArrival { t: a.instant.as_f64(), e: a.amount.as_f64() }).collect(),
            ),
        };
        let raw = RawScenario {
            horizon: self.horizon().as_f64(),
            mode: self.mode(),
            log_base: self.source_rate().log_base().as_f64(),
            h_s: self.source_rate().gain().as_f64(),
            h_r: self.relay_rate().gain().as_f64(),
            source: prof(self.source()),
            relay: prof(self.relay()),
        };
        serde_json::to_string_pretty(&raw).map_err(|e| Error::invalid(e.to_string()))
    }
}

// serde_json appends " at line L column C"; the position is carried separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
