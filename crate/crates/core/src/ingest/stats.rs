use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use chrono::Datelike;
use serde::Serialize;

use super::events::{csv_error, EventRecord};
use crate::error::Result;

/// Event counts per (source, year), with marginals.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub total: usize,
    pub by_source_year: BTreeMap<String, BTreeMap<i32, usize>>,
    pub by_source: BTreeMap<String, usize>,
    pub by_year: BTreeMap<i32, usize>,
    pub distinct_countries: usize,
}

impl CorpusStats {
    pub fn count(&self, source: &str, year: i32) -> usize {
        self.by_source_year
            .get(source)
            .and_then(|years| years.get(&year))
            .copied()
            .unwrap_or(0)
    }

    /// Rows `(source, year, count)`, source alphabetical then year ascending.
    pub fn rows(&self) -> impl Iterator<Item = (&str, i32, usize)> {
        self.by_source_year
            .iter()
            .flat_map(|(s, years)| years.iter().map(move |(y, c)| (s.as_str(), *y, *c)))
    }

    /// CSV `source,year,count`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["source", "year", "count"]).map_err(csv_error)?;
        for (source, year, count) in self.rows() {
            writer
                .write_record([source.to_string(), year.to_string(), count.to_string()])
                .map_err(csv_error)?;
        }
        writer.flush()?;
        Ok(())
    }
}

pub fn corpus_stats(events: &[EventRecord]) -> CorpusStats {
    let mut stats = CorpusStats {
        total: events.len(),
        ..Default::default()
    };
    let mut countries = BTreeSet::new();
    for e in events {
        let year = e.date.year();
        *stats
            .by_source_year
            .entry(e.source.clone())
            .or_default()
            .entry(year)
            .or_default() += 1;
        *stats.by_source.entry(e.source.clone()).or_default() += 1;
        *stats.by_year.entry(year).or_default() += 1;
        countries.insert(e.country());
    }
    stats.distinct_countries = countries.len();
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{Category, Location};
    use chrono::NaiveDate;

    fn event(id: &str, source: &str, year: i32, country: &str) -> EventRecord {
        EventRecord {
            id: id.into(),
            title: String::new(),
            summary: String::new(),
            date: NaiveDate::from_ymd_opt(year, 6, 1).unwrap(),
            source: source.into(),
            categories: vec![Category {
                path: "dmoz/Arts".into(),
                weight: 1.0,
            }],
            location: Location {
                place: String::new(),
                country: country.parse().unwrap(),
            },
        }
    }

    #[test]
    fn counts_per_source_and_year() {
        let events = vec![
            event("1", "srcA", 2016, "US"),
            event("2", "srcA", 2017, "US"),
            event("3", "srcB", 2017, "FR"),
        ];
        let stats = corpus_stats(&events);
        assert_eq!(stats.count("srcA", 2016), 1);
        assert_eq!(stats.count("srcA", 2017), 1);
        assert_eq!(stats.count("srcB", 2017), 1);
        assert_eq!(stats.by_year, BTreeMap::from([(2016, 1), (2017, 2)]));
        assert_eq!(stats.distinct_countries, 2);

        let mut buf = Vec::new();
        stats.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "source,year,count\nsrcA,2016,1\nsrcA,2017,1\nsrcB,2017,1\n"
        );
    }

    #[test]
    fn empty_is_zero() {
        let stats = corpus_stats(&[]);
        assert_eq!(stats.total, 0);
        assert_eq!(stats.distinct_countries, 0);
        assert!(stats.by_year.is_empty());
    }
}
