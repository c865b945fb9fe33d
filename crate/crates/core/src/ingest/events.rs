use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// ISO 3166-1 alpha-2 country code: exactly two uppercase ASCII letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CountryCode([u8; 2]);

impl CountryCode {
    pub fn as_str(&self) -> &str {
        // both bytes are ASCII uppercase by construction
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl FromStr for CountryCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.as_bytes() {
            [a, b] if a.is_ascii_uppercase() && b.is_ascii_uppercase() => Ok(CountryCode([*a, *b])),
            _ => Err(Error::Format(format!("bad country code {s:?}"))),
        }
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for CountryCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for CountryCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub path: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub place: String,
    pub country: CountryCode,
}

/// One news event as delivered by the event feed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub id: String,
    pub title: String,
    pub summary: String,
    pub date: NaiveDate,
    pub source: String,
    pub categories: Vec<Category>,
    pub location: Location,
}

impl EventRecord {
    pub fn country(&self) -> CountryCode {
        self.location.country
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event records always serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reject {
    pub line_no: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedEvents {
    pub events: Vec<EventRecord>,
    pub rejects: Vec<Reject>,
}

/// Parse JSON-lines event records.
///
/// Every input line ends up either in `events` or in `rejects` (1-based
/// line numbers). Only a failing reader is fatal.
pub fn parse_events<R: BufRead>(input: R) -> Result<ParsedEvents> {
    let mut out = ParsedEvents::default();
    let mut seen = HashSet::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        match parse_line(&line) {
            Ok(event) => {
                if seen.insert(event.id.clone()) {
                    out.events.push(event);
                } else {
                    out.rejects.push(Reject {
                        line_no,
                        reason: "duplicate id".into(),
                    });
                }
            }
            Err(reason) => out.rejects.push(Reject { line_no, reason }),
        }
    }
    Ok(out)
}

fn parse_line(line: &str) -> std::result::Result<EventRecord, String> {
    if line.trim().is_empty() {
        return Err("empty line".into());
    }
    let value: Value = serde_json::from_str(line).map_err(|_| "invalid json".to_string())?;
    let obj = value.as_object().ok_or("not an object")?;

    let id = string_field(obj, "id")?;
    if id.is_empty() {
        return Err("empty id".into());
    }
    let title = string_field(obj, "title")?;
    let summary = string_field(obj, "summary")?;
    let date = string_field(obj, "date")?;
    let date = NaiveDate::parse_from_str(&date, "%Y-%m-%d").map_err(|_| "bad date")?;
    let source = string_field(obj, "source")?;

    let categories = match obj.get("categories") {
        None | Some(Value::Null) => return Err("missing categories".into()),
        Some(Value::Array(items)) => items
            .iter()
            .map(parse_category)
            .collect::<std::result::Result<Vec<_>, _>>()?,
        Some(_) => return Err("bad categories".into()),
    };

    let location = match obj.get("location") {
        None | Some(Value::Null) => return Err("missing location".into()),
        Some(Value::Object(loc)) => {
            let place = match loc.get("place") {
                Some(Value::String(s)) => s.clone(),
                None | Some(Value::Null) => return Err("missing location place".into()),
                Some(_) => return Err("bad location place".into()),
            };
            let country = match loc.get("country") {
                Some(Value::String(s)) => s.parse::<CountryCode>().map_err(|_| "bad country code")?,
                None | Some(Value::Null) => return Err("missing location country".into()),
                Some(_) => return Err("bad country code".into()),
            };
            Location { place, country }
        }
        Some(_) => return Err("bad location".into()),
    };

    if categories.is_empty() {
        return Err("empty categories".into());
    }

    Ok(EventRecord {
        id,
        title,
        summary,
        date,
        source,
        categories,
        location,
    })
}

fn string_field(obj: &Map<String, Value>, name: &str) -> std::result::Result<String, String> {
    match obj.get(name) {
        Some(Value::String(s)) => Ok(s.clone()),
        None | Some(Value::Null) => Err(format!("missing {name}")),
        Some(_) => Err(format!("bad {name}")),
    }
}

fn parse_category(value: &Value) -> std::result::Result<Category, String> {
    let obj = value.as_object().ok_or("bad categories")?;
    let path = match obj.get("path") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        _ => return Err("bad category path".into()),
    };
    let weight = obj
        .get("weight")
        .and_then(Value::as_f64)
        .filter(|w| w.is_finite() && *w >= 0.0)
        .ok_or("bad category weight")?;
    Ok(Category { path, weight })
}

/// Write events back in the JSON-lines format accepted by [`parse_events`].
pub fn write_events<W: Write>(events: &[EventRecord], mut out: W) -> Result<()> {
    for event in events {
        writeln!(out, "{}", event.to_json_line())?;
    }
    Ok(())
}

/// Reject report as CSV `line_no,reason`.
pub fn write_rejects<W: Write>(rejects: &[Reject], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["line_no", "reason"]).map_err(csv_error)?;
    for reject in rejects {
        writer
            .write_record([reject.line_no.to_string(), reject.reason.clone()])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}
