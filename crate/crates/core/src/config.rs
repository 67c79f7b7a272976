//! Plain-text campaign configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Required keys:
//! `snr_db`, `dsnr_db`, `rounds`, `looseness`, `rate_bits`. Optional keys:
//! `lattice` (`z`, `d4`, `e8`; default `z`), `dimension` (default 1 for `z`,
//! otherwise fixed by the lattice), `codebook` (`pam` or `gaussian`; default
//! `pam` when the dimension is 1), `seed` (default 0), `feedforward_noise`
//! and `feedback_noise` (`on` or `off`; default `on`).

use std::collections::BTreeMap;

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::lattice::LatticeKind;
use crate::scheme_sim::{CodebookKind, SchemeConfig, SchemeSpec};
use crate::units::Rate;

const KEYS: &[&str] = &[
    "snr_db",
    "dsnr_db",
    "rounds",
    "looseness",
    "rate_bits",
    "lattice",
    "dimension",
    "codebook",
    "seed",
    "feedforward_noise",
    "feedback_noise",
];

/// Parsed configuration file, before validation against the channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub snr_db: f64,
    pub dsnr_db: f64,
    pub rounds: usize,
    pub looseness: f64,
    pub rate_bits: f64,
    pub lattice: LatticeKind,
    pub dimension: usize,
    pub codebook: CodebookKind,
    pub seed: u64,
    pub feedforward_noise: bool,
    pub feedback_noise: bool,
}

struct Entry {
    line: usize,
    value: String,
}

fn parse_value<T: std::str::FromStr>(
    entries: &BTreeMap<String, Entry>,
    key: &str,
) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match entries.get(key) {
        None => Ok(None),
        Some(e) => e.value.parse::<T>().map(Some).map_err(|err| Error::Parse {
            line: e.line,
            reason: format!("{key}: {err}"),
        }),
    }
}

fn parse_switch(entries: &BTreeMap<String, Entry>, key: &str) -> Result<bool> {
    match entries.get(key) {
        None => Ok(true),
        Some(e) => match e.value.to_ascii_lowercase().as_str() {
            "on" | "true" | "yes" => Ok(true),
            "off" | "false" | "no" => Ok(false),
            other => Err(Error::Parse {
                line: e.line,
                reason: format!("{key}: expected on or off, got `{other}`"),
            }),
        },
    }
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    line,
                    reason: format!("unknown key `{key}`"),
                });
            }
            if entries.contains_key(&key) {
                return Err(Error::Parse {
                    line,
                    reason: format!("duplicate key `{key}`"),
                });
            }
            entries.insert(
                key,
                Entry {
                    line,
                    value: value.trim().to_string(),
                },
            );
        }

        // Malformed values are reported before missing keys.
        let snr_db = parse_value::<f64>(&entries, "snr_db")?;
        let dsnr_db = parse_value::<f64>(&entries, "dsnr_db")?;
        let rounds = parse_value::<usize>(&entries, "rounds")?;
        let looseness = parse_value::<f64>(&entries, "looseness")?;
        let rate_bits = parse_value::<f64>(&entries, "rate_bits")?;
        fn need<T>(v: Option<T>, key: &str) -> Result<T> {
            v.ok_or_else(|| Error::InvalidConfig(format!("missing required key `{key}`")))
        }
        let snr_db = need(snr_db, "snr_db")?;
        let dsnr_db = need(dsnr_db, "dsnr_db")?;
        let rounds = need(rounds, "rounds")?;
        let looseness = need(looseness, "looseness")?;
        let rate_bits = need(rate_bits, "rate_bits")?;

        let lattice =
            parse_value::<LatticeKind>(&entries, "lattice")?.unwrap_or(LatticeKind::Integer);
        let dimension = match (lattice, parse_value::<usize>(&entries, "dimension")?) {
            (LatticeKind::Integer, d) => d.unwrap_or(1),
            (LatticeKind::D4, None | Some(4)) => 4,
            (LatticeKind::E8, None | Some(8)) => 8,
            (kind, Some(d)) => {
                return Err(Error::Parse {
                    line: entries["dimension"].line,
                    reason: format!("dimension {d} does not match lattice {}", kind.as_str()),
                })
            }
        };
        let codebook =
            parse_value::<CodebookKind>(&entries, "codebook")?.unwrap_or(if dimension == 1 {
                CodebookKind::Pam
            } else {
                CodebookKind::Gaussian
            });
        let seed = parse_value::<u64>(&entries, "seed")?.unwrap_or(0);

        Ok(CampaignConfig {
            snr_db,
            dsnr_db,
            rounds,
            looseness,
            rate_bits,
            lattice,
            dimension,
            codebook,
            seed,
            feedforward_noise: parse_switch(&entries, "feedforward_noise")?,
            feedback_noise: parse_switch(&entries, "feedback_noise")?,
        })
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        let mut p = ChannelParams::from_db(self.snr_db, self.dsnr_db)?;
        if !self.feedforward_noise {
            p = p.without_feedforward_noise();
        }
        if !self.feedback_noise {
            p = p.without_feedback_noise();
        }
        Ok(p)
    }

    pub fn spec(&self) -> Result<SchemeSpec> {
        Ok(SchemeSpec {
            params: self.channel()?,
            rounds: self.rounds,
            looseness: self.looseness,
            lattice: self.lattice,
            dimension: self.dimension,
            rate: Rate::new(self.rate_bits)?,
            codebook: self.codebook,
            master_seed: self.seed,
        })
    }

    pub fn build(&self) -> Result<SchemeConfig> {
        SchemeConfig::new(&self.spec()?)
    }
}
