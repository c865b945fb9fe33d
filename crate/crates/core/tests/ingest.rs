use std::collections::BTreeMap;

use chrono::NaiveDate;
use culture_class::categorize::{assign_top_categories, group_by_category, shared_categories};
use culture_class::ingest::{corpus_stats, parse_events, write_events, Category, CountryCode, EventRecord, Location};
use culture_class::label::label_events;
use proptest::prelude::*;

fn country() -> impl Strategy<Value = CountryCode> {
    "[A-F][A-Z]".prop_map(|s| s.parse().unwrap())
}

fn record() -> impl Strategy<Value = EventRecord> {
    (
        "[a-z0-9]{1,8}",
        "\\PC{0,30}",
        "\\PC{0,60}",
        0u64..20_000,
        "[a-z]{1,6}",
        prop::collection::vec(
            ("dmoz/(Arts|Health|Sports|science)(/[A-Za-z]{1,5})?", 0.0f64..1.0),
            1..4,
        ),
        "\\PC{0,12}",
        country(),
    )
        .prop_map(|(id, title, summary, day, source, cats, place, country)| EventRecord {
            id,
            title,
            summary,
            date: NaiveDate::from_ymd_opt(1990, 1, 1).unwrap() + chrono::Days::new(day),
            source,
            categories: cats
                .into_iter()
                .map(|(path, weight)| Category { path, weight })
                .collect(),
            location: Location { place, country },
        })
}

fn unique(records: Vec<EventRecord>) -> Vec<EventRecord> {
    let mut seen = std::collections::HashSet::new();
    records.into_iter().filter(|r| seen.insert(r.id.clone())).collect()
}

proptest! {
    #[test]
    fn parse_is_total(lines in prop::collection::vec("\\PC{0,80}", 0..30)) {
        let text = lines.join("\n");
        let parsed = parse_events(text.as_bytes()).unwrap();
        let expected = text.lines().count();
        prop_assert_eq!(parsed.events.len() + parsed.rejects.len(), expected);
    }

    #[test]
    fn write_then_parse_is_identity(records in prop::collection::vec(record(), 0..12)) {
        let records = unique(records);
        let mut buf = Vec::new();
        write_events(&records, &mut buf).unwrap();
        let parsed = parse_events(buf.as_slice()).unwrap();
        prop_assert!(parsed.rejects.is_empty(), "{:?}", parsed.rejects);
        prop_assert_eq!(parsed.events, records);
    }

    #[test]
    fn stats_conserve_counts(records in prop::collection::vec(record(), 0..40)) {
        let stats = corpus_stats(&records);
        prop_assert_eq!(stats.total, records.len());
        prop_assert_eq!(stats.rows().map(|r| r.2).sum::<usize>(), records.len());
    }

    #[test]
    fn labeling_is_total_and_categories_partition(
        records in prop::collection::vec(record(), 0..40),
        known in prop::collection::btree_map(country(), 0usize..4, 0..40),
    ) {
        let labeling = label_events(&records, &known);
        prop_assert_eq!(labeling.labeled.len() + labeling.unlabeled.len(), records.len());
        let mut labeled = labeling.labeled;
        assign_top_categories(&mut labeled).unwrap();
        let groups = group_by_category(&labeled).unwrap();
        prop_assert_eq!(groups.values().map(Vec::len).sum::<usize>(), labeled.len());
        let report = shared_categories(&labeled, 4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    prop_assert_eq!(report.get(a, b), report.get(b, a));
                }
            }
        }
    }
}

#[test]
fn labeled_counts_match_assignment() {
    let base = EventRecord {
        id: String::new(),
        title: "t".into(),
        summary: "s".into(),
        date: NaiveDate::from_ymd_opt(2017, 5, 1).unwrap(),
        source: "src".into(),
        categories: vec![Category {
            path: "dmoz/Arts".into(),
            weight: 1.0,
        }],
        location: Location {
            place: "x".into(),
            country: "DE".parse().unwrap(),
        },
    };
    let mut events = Vec::new();
    for (i, c) in ["DE", "FR", "DE", "JP"].iter().enumerate() {
        let mut e = base.clone();
        e.id = format!("e{i}");
        e.location.country = c.parse().unwrap();
        events.push(e);
    }
    let assignment: BTreeMap<CountryCode, usize> = [("DE".parse().unwrap(), 0), ("FR".parse().unwrap(), 1)]
        .into_iter()
        .collect();
    let labeling = label_events(&events, &assignment);
    assert_eq!(
        labeling.labeled.iter().map(|l| l.cluster).collect::<Vec<_>>(),
        [0, 1, 0]
    );
    assert_eq!(labeling.unlabeled.len(), 1);
    assert_eq!(labeling.unlabeled[0].id, "e3");
}
