//! Seeded synthetic corpora with known cluster structure, for tests and
//! demos. Cluster `c` owns countries whose six Hofstede dimensions all sit
//! near `10 + 20 c`, so the average score separates clusters cleanly.

use std::fmt::Write as _;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::categorize::CategoryLabel;
use crate::ingest::{Category, CountryCode, EventRecord, Location};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Summary words are drawn mostly from a cluster-specific vocabulary;
    /// top categories are random.
    TextDetermined,
    /// Summaries are shared noise; the top category is fixed per cluster.
    CategoryDetermined,
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub clusters: usize,
    pub countries_per_cluster: usize,
    pub events_per_cluster: usize,
    pub variant: Variant,
    pub seed: u64,
}

impl SynthCorpus {
    pub fn new(clusters: usize, events_per_cluster: usize, variant: Variant, seed: u64) -> Self {
        SynthCorpus {
            clusters,
            countries_per_cluster: 2,
            events_per_cluster,
            variant,
            seed,
        }
    }

    /// Country `j` of cluster `c`; codes are "AA", "AB", ... in cluster order.
    pub fn country(&self, cluster: usize, j: usize) -> CountryCode {
        let n = cluster * self.countries_per_cluster + j;
        let code = [b'A' + (n / 26) as u8, b'A' + (n % 26) as u8];
        std::str::from_utf8(&code).unwrap().parse().unwrap()
    }

    pub fn hofstede_csv(&self) -> String {
        let mut out = String::from("country,pdi,idv,mas,uai,lto,ivr\n");
        for c in 0..self.clusters {
            for j in 0..self.countries_per_cluster {
                let base = 10.0 + 20.0 * c as f64 + j as f64;
                write!(out, "{}", self.country(c, j)).unwrap();
                for d in 0..6 {
                    write!(out, ",{}", base + [0.0, 1.0, -1.0, 0.5, -0.5, 0.0][d]).unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn cluster_word(cluster: usize, i: usize) -> String {
        format!(
            "{}{}",
            ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"][cluster % 8],
            i
        )
    }

    pub fn shared_word(i: usize) -> String {
        format!("common{i}")
    }

    fn category_for(&self, cluster: usize, rng: &mut ChaCha8Rng) -> CategoryLabel {
        let content = CategoryLabel::content();
        match self.variant {
            Variant::TextDetermined => *content.choose(rng).unwrap(),
            Variant::CategoryDetermined => content[cluster % content.len()],
        }
    }

    /// Events in cluster-major order, ids `ev00000`, `ev00001`, ...
    pub fn events(&self) -> Vec<EventRecord> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let start = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap();
        let sources = ["wire-a", "wire-b", "wire-c"];
        let mut out = Vec::with_capacity(self.clusters * self.events_per_cluster);
        for c in 0..self.clusters {
            for e in 0..self.events_per_cluster {
                let words: Vec<String> = (0..12)
                    .map(|_| match self.variant {
                        Variant::TextDetermined if rng.gen_bool(0.6) => Self::cluster_word(c, rng.gen_range(0..20)),
                        _ => Self::shared_word(rng.gen_range(0..40)),
                    })
                    .collect();
                let top = self.category_for(c, &mut rng);
                let other = CategoryLabel::content()[rng.gen_range(0..11)];
                let id = out.len();
                out.push(EventRecord {
                    id: format!("ev{id:05}"),
                    title: format!("event {id}"),
                    summary: words.join(" "),
                    date: start + chrono::Days::new(rng.gen_range(0..1000)),
                    source: sources[id % sources.len()].to_string(),
                    categories: vec![
                        Category {
                            path: format!("dmoz/{}/Topic{}", capitalized(top.as_str()), e % 3),
                            weight: 0.9,
                        },
                        Category {
                            path: format!("dmoz/{}", capitalized(other.as_str())),
                            weight: 0.4,
                        },
                    ],
                    location: Location {
                        place: format!("City{c}"),
                        country: self.country(c, rng.gen_range(0..self.countries_per_cluster)),
                    },
                });
            }
        }
        out
    }

    /// GloVe-style text embeddings for every word the corpus can emit.
    pub fn embeddings_text(&self, dim: usize) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed);
        let mut words: Vec<String> = (0..40).map(Self::shared_word).collect();
        for c in 0..self.clusters {
            words.extend((0..20).map(|i| Self::cluster_word(c, i)));
        }
        let mut out = String::new();
        for w in words {
            out.push_str(&w);
            for _ in 0..dim {
                write!(out, " {:.5}", rng.gen_range(-1.0..1.0)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn capitalized(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_ascii_uppercase().to_string() + c.as_str())
        .unwrap_or_default()
}

/// Run the real labeling pipeline (average score, k chosen by silhouette
/// over 2..=10, top category, content-category filter) on a synthetic
/// corpus.
pub fn pipeline_dataset(corpus: &SynthCorpus) -> crate::Result<(crate::evaluate::Dataset, usize)> {
    use crate::categorize::{assign_top_categories, filter_by_category};
    use crate::evaluate::{Dataset, TextField};
    use crate::ingest::parse_hofstede_table;
    use crate::label::{assign_countries, fit_cluster_model, label_events, KChoice};

    let table = parse_hofstede_table(corpus.hofstede_csv().as_bytes())?;
    let model = fit_cluster_model::<f64>(&table, KChoice::Range { k_min: 2, k_max: 10 })?;
    let assignment = assign_countries(&table, &model)?;
    let mut labeling = label_events(&corpus.events(), &assignment);
    assign_top_categories(&mut labeling.labeled)?;
    let kept = filter_by_category(labeling.labeled, &CategoryLabel::content());
    Ok((Dataset::from_labeled(&kept, TextField::Summary)?, model.k))
}
