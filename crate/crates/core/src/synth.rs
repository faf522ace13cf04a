//! Seeded synthetic OHP corpora.
//!
//! Corpora are reproducible across runs, machines and implementations. The
//! random stream is fixed as follows so other languages can regenerate the
//! same files:
//!
//! * Generator: PCG-XSL-RR 128/64 (`pcg64`), 128-bit LCG with multiplier
//!   `0x2360ed051fc65da44385df649fccf645`. It is initialised with
//!   `state = seed` and `stream = 0xa02bdbf7bb3c0a7ac28fa16a64abf96`
//!   (increment `(stream << 1) | 1`), then advanced as `state += increment`
//!   followed by one LCG step before the first output.
//! * `unit()` = `(next_u64 >> 11) * 2^-53`, a float in `[0, 1)`.
//! * `below(n)` = high 64 bits of `next_u64 * n` (multiply-shift).
//! * Categorical draws (Zipf ranks, agent counts) take one `unit()` and
//!   return the first index whose cumulative weight exceeds
//!   `unit() * total`.
//!
//! Per record the draws happen in this order: date offset (`below(days)`),
//! centre (`below(centers)`), pathology, occupation, sector (Zipf ranks),
//! agent count, then agents one at a time (Zipf, redrawn on duplicates),
//! then one responsibility per agent (`1 + below(3)`).
//!
//! Zipf weights are `1 / rank^skew` for ranks `1..=n`; `skew = 0` is uniform.

use std::path::Path;

use chrono::{Days, NaiveDate};
use rand_core::Rng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentExposure, OhpRecord, Responsibility, MAX_AGENTS};

/// PCG's reference default stream constant.
pub const PCG_DEFAULT_STREAM: u128 = 0x0a02_bdbf_7bb3_c0a7_ac28_fa16_a64a_bf96;

const CATEGORY_LETTERS: &[u8; 26] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
const MAX_PATHOLOGIES: usize = 26 * 100 * 10;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    Invalid(String),
    #[error("reading synth config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing synth config: {0}")]
    Parse(String),
}

/// A planted emerging OHP: one identity reported from `start` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plant {
    pub pathology: String,
    pub agents: Vec<String>,
    pub occupation: String,
    pub sector: String,
    pub start: NaiveDate,
    pub records_per_window: u32,
    #[serde(default = "default_plant_window")]
    pub window_days: u32,
    #[serde(default = "default_plant_windows")]
    pub windows: u32,
}

fn default_plant_window() -> u32 {
    30
}

fn default_plant_windows() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_records: usize,
    pub pathologies: usize,
    pub agents: usize,
    pub occupations: usize,
    pub sectors: usize,
    pub centers: usize,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Probabilities of 1..=5 agents per record.
    pub agent_count_weights: [f64; MAX_AGENTS],
    /// Zipf exponent for element popularity.
    pub skew: f64,
    pub plants: Vec<Plant>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_records: 5_000,
            pathologies: 2_000,
            agents: 3_000,
            occupations: 1_000,
            sectors: 1_000,
            centers: 30,
            start: NaiveDate::from_ymd_opt(2001, 1, 1).unwrap(),
            end: NaiveDate::from_ymd_opt(2001, 12, 31).unwrap(),
            agent_count_weights: [0.40, 0.25, 0.15, 0.12, 0.08],
            skew: 0.5,
            plants: Vec::new(),
        }
    }
}

impl SynthConfig {
    /// Loads a config from TOML (`.toml`) or JSON (anything else).
    pub fn from_path(path: &Path) -> Result<Self, SynthError> {
        let text = std::fs::read_to_string(path)?;
        let is_toml = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
        if is_toml {
            toml::from_str(&text).map_err(|e| SynthError::Parse(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| SynthError::Parse(e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: &str| Err(SynthError::Invalid(msg.to_string()));
        if self.n_records == 0 {
            return bad("n_records must be positive");
        }
        if self.pathologies == 0 || self.agents == 0 || self.occupations == 0 || self.sectors == 0 {
            return bad("vocabulary sizes must be positive");
        }
        if self.centers == 0 {
            return bad("centers must be positive");
        }
        if self.pathologies > MAX_PATHOLOGIES {
            return bad("at most 26000 pathologies can be encoded");
        }
        if self.start > self.end {
            return bad("date range is empty");
        }
        if self
            .agent_count_weights
            .iter()
            .any(|w| !w.is_finite() || *w < 0.0)
        {
            return bad("agent_count_weights must be non-negative");
        }
        let total: f64 = self.agent_count_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return bad("agent_count_weights must sum to 1");
        }
        if !self.skew.is_finite() || self.skew < 0.0 {
            return bad("skew must be a finite number >= 0");
        }
        for plant in &self.plants {
            let n = plant.agents.len();
            if n == 0 || n > MAX_AGENTS {
                return bad("planted identities need 1 to 5 agents");
            }
            if plant.pathology.trim().is_empty()
                || plant.occupation.trim().is_empty()
                || plant.sector.trim().is_empty()
                || plant.agents.iter().any(|a| a.trim().is_empty())
            {
                return bad("planted identity fields must be non-empty");
            }
            if plant.records_per_window == 0 || plant.window_days == 0 || plant.windows == 0 {
                return bad("plant cadence values must be positive");
            }
        }
        Ok(())
    }
}

/// The documented random stream.
pub struct SynthRng(Pcg64);

impl SynthRng {
    pub fn new(seed: u64) -> Self {
        SynthRng(Pcg64::new(u128::from(seed), PCG_DEFAULT_STREAM))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        ((u128::from(self.next_u64()) * u128::from(n)) >> 64) as u64
    }
}

/// Cumulative-weight sampler over `0..n`.
#[derive(Debug, Clone)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .into_iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn zipf(n: usize, skew: f64) -> Self {
        Self::new((1..=n).map(|rank| (rank as f64).powf(-skew)))
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn sample(&self, rng: &mut SynthRng) -> usize {
        let total = *self.cumulative.last().expect("non-empty distribution");
        let target = rng.unit() * total;
        self.cumulative
            .partition_point(|&c| c <= target)
            .min(self.cumulative.len() - 1)
    }
}

pub fn pathology_code(rank: usize) -> String {
    let letter = CATEGORY_LETTERS[rank % 26] as char;
    let subgroup = (rank / 26) % 100;
    let detail = (rank / 2600) % 10;
    format!("{letter}{subgroup:02}.{detail}")
}

pub fn agent_code(rank: usize) -> String {
    format!("AG{:05}", rank + 1)
}

pub fn occupation_code(rank: usize) -> String {
    format!("OCC{:04}", rank + 1)
}

pub fn sector_code(rank: usize) -> String {
    format!("SEC{:04}", rank + 1)
}

/// Generates the corpus, sorted by (date, record id).
pub fn generate(config: &SynthConfig) -> Result<Vec<OhpRecord>, SynthError> {
    config.validate()?;
    let mut rng = SynthRng::new(config.seed);
    let pathologies = Categorical::zipf(config.pathologies, config.skew);
    let agents = Categorical::zipf(config.agents, config.skew);
    let occupations = Categorical::zipf(config.occupations, config.skew);
    let sectors = Categorical::zipf(config.sectors, config.skew);
    let counts = Categorical::new(config.agent_count_weights);
    let span_days = (config.end - config.start).num_days() as u64 + 1;

    let mut records = Vec::with_capacity(config.n_records);
    for i in 0..config.n_records {
        let reported_on = config.start + Days::new(rng.below(span_days));
        let center = format!("CTR{:02}", rng.below(config.centers as u64) + 1);
        let pathology = pathology_code(pathologies.sample(&mut rng));
        let occupation = occupation_code(occupations.sample(&mut rng));
        let sector = sector_code(sectors.sample(&mut rng));
        let wanted = (counts.sample(&mut rng) + 1).min(config.agents);
        let mut picked: Vec<usize> = Vec::with_capacity(wanted);
        let mut attempts = 0;
        while picked.len() < wanted && attempts < 100 * MAX_AGENTS {
            let a = agents.sample(&mut rng);
            if !picked.contains(&a) {
                picked.push(a);
            }
            attempts += 1;
        }
        let agents = picked
            .into_iter()
            .map(|a| {
                let level = 1 + rng.below(3) as i64;
                AgentExposure::new(
                    agent_code(a),
                    Responsibility::from_level(level).expect("1..=3"),
                )
            })
            .collect();
        records.push(OhpRecord {
            record_id: format!("R{i:07}"),
            reported_on,
            center,
            pathology,
            occupation,
            sector,
            agents,
        });
    }

    for (p, plant) in config.plants.iter().enumerate() {
        let per = u64::from(plant.records_per_window);
        let len = u64::from(plant.window_days);
        for w in 0..u64::from(plant.windows) {
            for k in 0..per {
                let offset = w * len + k * len / per;
                records.push(OhpRecord {
                    record_id: format!("P{p:02}-{w:03}-{k:03}"),
                    reported_on: plant.start + Days::new(offset),
                    center: "CTR00".into(),
                    pathology: plant.pathology.clone(),
                    occupation: plant.occupation.clone(),
                    sector: plant.sector.clone(),
                    agents: plant
                        .agents
                        .iter()
                        .map(|a| AgentExposure::new(a.clone(), Responsibility::High))
                        .collect(),
                });
            }
        }
    }

    records.sort_by(|a, b| (a.reported_on, &a.record_id).cmp(&(b.reported_on, &b.record_id)));
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_record;
    use proptest::prelude::*;

    #[test]
    fn pcg64_reference_stream() {
        // Reference vector from the PCG C test suite (state 42, stream 54).
        let mut rng = SynthRng(Pcg64::new(42, 54));
        assert_eq!(rng.next_u64(), 0x86b1_da1d_7206_2b68);
        assert_eq!(rng.next_u64(), 0x1304_aa46_c985_3d39);
    }

    #[test]
    fn below_and_unit_ranges() {
        let mut rng = SynthRng::new(7);
        for _ in 0..1000 {
            assert!(rng.below(3) < 3);
            let u = rng.unit();
            assert!((0.0..1.0).contains(&u));
        }
        assert_eq!(rng.below(1), 0);
    }

    #[test]
    fn codes() {
        assert_eq!(pathology_code(0), "A00.0");
        assert_eq!(pathology_code(2 + 26 * 34), "C34.0");
        assert_eq!(pathology_code(2600 + 1), "B00.1");
        assert_eq!(agent_code(0), "AG00001");
    }

    #[test]
    fn ten_records() {
        let cfg = SynthConfig {
            n_records: 10,
            ..Default::default()
        };
        let recs = generate(&cfg).unwrap();
        assert_eq!(recs.len(), 10);
        for r in &recs {
            assert_eq!(validate_record(&r.to_raw()).as_ref(), Ok(r));
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SynthConfig {
            n_records: 500,
            ..Default::default()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SynthConfig {
            seed: 43,
            ..cfg.clone()
        };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn plants_start_on_their_date() {
        let start = NaiveDate::from_ymd_opt(2001, 6, 1).unwrap();
        let cfg = SynthConfig {
            n_records: 50,
            plants: vec![Plant {
                pathology: "C99.9".into(),
                agents: vec!["NEWAGENT".into()],
                occupation: "OCC9999".into(),
                sector: "SEC9999".into(),
                start,
                records_per_window: 4,
                window_days: 30,
                windows: 2,
            }],
            ..Default::default()
        };
        let recs = generate(&cfg).unwrap();
        assert_eq!(recs.len(), 58);
        let planted: Vec<_> = recs.iter().filter(|r| r.pathology == "C99.9").collect();
        assert_eq!(planted.len(), 8);
        assert_eq!(planted.iter().map(|r| r.reported_on).min(), Some(start));
    }

    #[test]
    fn rejects_bad_configs() {
        let cfg = SynthConfig {
            agent_count_weights: [0.5, 0.5, 0.5, 0.0, 0.0],
            ..Default::default()
        };
        assert!(generate(&cfg).is_err());
        let cfg = SynthConfig {
            start: NaiveDate::from_ymd_opt(2002, 1, 1).unwrap(),
            ..Default::default()
        };
        assert!(generate(&cfg).is_err());
        let cfg = SynthConfig {
            skew: -1.0,
            ..Default::default()
        };
        assert!(generate(&cfg).is_err());
    }

    #[test]
    fn config_from_toml_and_json() {
        let dir = tempfile::tempdir().unwrap();
        let toml_path = dir.path().join("c.toml");
        std::fs::write(
            &toml_path,
            "seed = 7\nn_records = 12\nstart = \"2003-01-01\"\nend = \"2003-02-01\"\n",
        )
        .unwrap();
        let c = SynthConfig::from_path(&toml_path).unwrap();
        assert_eq!((c.seed, c.n_records), (7, 12));
        assert_eq!(c.agents, SynthConfig::default().agents);

        let json_path = dir.path().join("c.json");
        std::fs::write(&json_path, r#"{"seed": 9, "skew": 0.0}"#).unwrap();
        let c = SynthConfig::from_path(&json_path).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.skew, 0.0);

        std::fs::write(&json_path, r#"{"colour": 1}"#).unwrap();
        assert!(SynthConfig::from_path(&json_path).is_err());
    }

    // Pearson chi-square of sector usage with skew 0 over 50 sectors and
    // 20,000 draws: 49 degrees of freedom, the 99.9% quantile is ~85.4.
    #[test]
    fn uniform_when_unskewed() {
        let cfg = SynthConfig {
            n_records: 20_000,
            sectors: 50,
            skew: 0.0,
            ..Default::default()
        };
        let recs = generate(&cfg).unwrap();
        let mut counts = vec![0f64; 50];
        for r in &recs {
            let idx: usize = r.sector[3..].parse::<usize>().unwrap() - 1;
            counts[idx] += 1.0;
        }
        let expected = 20_000.0 / 50.0;
        let chi2: f64 = counts
            .iter()
            .map(|c| (c - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 85.4, "chi-square {chi2}");
    }

    #[test]
    fn skew_favours_low_ranks() {
        let cfg = SynthConfig {
            n_records: 5_000,
            sectors: 100,
            skew: 1.2,
            ..Default::default()
        };
        let recs = generate(&cfg).unwrap();
        let top = recs.iter().filter(|r| r.sector == "SEC0001").count();
        let tail = recs.iter().filter(|r| r.sector == "SEC0100").count();
        assert!(top > 10 * tail.max(1), "top {top} tail {tail}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn generated_records_always_validate(
            seed in any::<u64>(),
            n in 1usize..200,
            vocab in 1usize..20,
            skew in 0.0f64..3.0,
            w in proptest::array::uniform5(0.0f64..1.0),
        ) {
            let total: f64 = w.iter().sum();
            prop_assume!(total > 0.0);
            let mut weights = w.map(|x| x / total);
            // force an exact sum of 1
            let rest: f64 = weights[..4].iter().sum();
            weights[4] = (1.0 - rest).max(0.0);
            prop_assume!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            let cfg = SynthConfig {
                seed,
                n_records: n,
                pathologies: vocab,
                agents: vocab,
                occupations: vocab,
                sectors: vocab,
                skew,
                agent_count_weights: weights,
                ..Default::default()
            };
            let recs = generate(&cfg).unwrap();
            prop_assert_eq!(recs.len(), n);
            for r in &recs {
                prop_assert!(validate_record(&r.to_raw()).is_ok());
            }
        }
    }
}
