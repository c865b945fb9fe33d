use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;

use super::events::{csv_error, CountryCode};
use crate::error::{Error, Result};

/// Column names of the six dimensions, in profile order: power distance,
/// individualism, masculinity, uncertainty avoidance, long-term
/// orientation, indulgence.
pub const DIMENSION_NAMES: [&str; 6] = ["pdi", "idv", "mas", "uai", "lto", "ivr"];

const MAX_DIMENSION: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HofstedeProfile {
    pub country: CountryCode,
    pub dims: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRow {
    /// 1-based line number, header included.
    pub line_no: usize,
    pub country: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct HofstedeTable {
    pub profiles: BTreeMap<CountryCode, HofstedeProfile>,
    pub skipped: Vec<SkippedRow>,
}

impl HofstedeTable {
    pub fn from_profiles(profiles: impl IntoIterator<Item = HofstedeProfile>) -> Self {
        let mut table = HofstedeTable::default();
        for p in profiles {
            table.profiles.entry(p.country).or_insert(p);
        }
        table
    }

    pub fn get(&self, country: CountryCode) -> Option<&HofstedeProfile> {
        self.profiles.get(&country)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Parse a `country,pdi,idv,mas,uai,lto,ivr` CSV table.
///
/// Columns are located by (case-insensitive) header name; extra columns are
/// ignored. Incomplete rows and repeated countries are skipped and reported.
pub fn parse_hofstede_table<R: Read>(input: R) -> Result<HofstedeTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));

    let mut missing = Vec::new();
    let country_col = find("country");
    if country_col.is_none() {
        missing.push("country");
    }
    let mut dim_cols = [0usize; 6];
    for (slot, name) in dim_cols.iter_mut().zip(DIMENSION_NAMES) {
        match find(name) {
            Some(c) => *slot = c,
            None => missing.push(name),
        }
    }
    if !missing.is_empty() {
        return Err(Error::Format(format!(
            "hofstede table is missing header column(s): {}",
            missing.join(", ")
        )));
    }
    let country_col = country_col.unwrap();

    let mut table = HofstedeTable::default();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(csv_error)?;
        let line_no = idx + 2;
        let raw_country = record.get(country_col).unwrap_or("").to_string();
        let skip = |reason: String| SkippedRow {
            line_no,
            country: raw_country.clone(),
            reason,
        };
        let country = match raw_country.parse::<CountryCode>() {
            Ok(c) => c,
            Err(_) => {
                table.skipped.push(skip("bad country code".into()));
                continue;
            }
        };
        let mut dims = [0.0; 6];
        let mut problem = None;
        for (i, &col) in dim_cols.iter().enumerate() {
            let cell = record.get(col).unwrap_or("");
            if cell.is_empty() {
                problem = Some(format!("missing {}", DIMENSION_NAMES[i]));
                break;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() && (0.0..=MAX_DIMENSION).contains(&v) => dims[i] = v,
                Ok(_) => {
                    problem = Some(format!("{} out of range", DIMENSION_NAMES[i]));
                    break;
                }
                Err(_) => {
                    problem = Some(format!("non-numeric {}", DIMENSION_NAMES[i]));
                    break;
                }
            }
        }
        if let Some(reason) = problem {
            table.skipped.push(skip(reason));
            continue;
        }
        if table.profiles.contains_key(&country) {
            table.skipped.push(skip("duplicate country".into()));
            continue;
        }
        table.profiles.insert(country, HofstedeProfile { country, dims });
    }

    if table.profiles.is_empty() {
        return Err(Error::Format("hofstede table has no valid rows".into()));
    }
    Ok(table)
}

/// Skip report as CSV `line_no,country,reason`.
pub fn write_skipped<W: Write>(skipped: &[SkippedRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer
        .write_record(["line_no", "country", "reason"])
        .map_err(csv_error)?;
    for row in skipped {
        writer
            .write_record([row.line_no.to_string(), row.country.clone(), row.reason.clone()])
            .map_err(csv_error)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "country,pdi,idv,mas,uai,lto,ivr\n";

    fn us() -> CountryCode {
        "US".parse().unwrap()
    }

    #[test]
    fn parses_profile() {
        let table = parse_hofstede_table(format!("{HEADER}US,40,91,62,46,26,68\n").as_bytes()).unwrap();
        assert_eq!(table.get(us()).unwrap().dims, [40.0, 91.0, 62.0, 46.0, 26.0, 68.0]);
        assert!(table.skipped.is_empty());
    }

    #[test]
    fn blank_dimension_is_skipped() {
        let text = format!("{HEADER}US,40,91,62,46,26,68\nDE,35,67,66,65,,40\n");
        let table = parse_hofstede_table(text.as_bytes()).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(
            table.skipped,
            vec![SkippedRow {
                line_no: 3,
                country: "DE".into(),
                reason: "missing lto".into()
            }]
        );
    }

    #[test]
    fn duplicate_country_first_wins() {
        let text = format!("{HEADER}US,40,91,62,46,26,68\nUS,1,1,1,1,1,1\n");
        let table = parse_hofstede_table(text.as_bytes()).unwrap();
        assert_eq!(table.get(us()).unwrap().dims[0], 40.0);
        assert_eq!(table.skipped[0].reason, "duplicate country");
    }

    #[test]
    fn columns_found_by_name() {
        let text = "name,ivr,lto,uai,mas,idv,pdi,country\nUnited States,68,26,46,62,91,40,US\n";
        let table = parse_hofstede_table(text.as_bytes()).unwrap();
        assert_eq!(table.get(us()).unwrap().dims, [40.0, 91.0, 62.0, 46.0, 26.0, 68.0]);
    }

    #[test]
    fn missing_header_is_fatal() {
        let err = parse_hofstede_table("country,pdi,idv\nUS,1,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("mas"), "{err}");
    }

    #[test]
    fn zero_valid_rows_is_fatal() {
        let text = format!("{HEADER}US,x,91,62,46,26,68\n");
        assert!(parse_hofstede_table(text.as_bytes()).is_err());
    }
}
