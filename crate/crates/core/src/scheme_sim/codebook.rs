use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Largest codebook the brute-force ML decoder accepts.
pub const MAX_CODEBOOK_SIZE: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodebookKind {
    /// Scalar PAM with equally spaced levels (dimension 1 only).
    Pam,
    /// Seeded random Gaussian codewords projected onto the power sphere.
    Gaussian,
}

impl CodebookKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CodebookKind::Pam => "pam",
            CodebookKind::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for CodebookKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodebookKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pam" => Ok(CodebookKind::Pam),
            "gaussian" | "random" => Ok(CodebookKind::Gaussian),
            other => Err(format!(
                "unknown codebook `{other}` (expected pam or gaussian)"
            )),
        }
    }
}

/// Message-to-codeword map with a minimum-distance (ML under Gaussian
/// noise) decoder.
#[derive(Debug, Clone, PartialEq)]
pub enum Codebook {
    Pam {
        levels: usize,
        spacing: f64,
    },
    Gaussian {
        dim: usize,
        size: usize,
        words: Vec<f64>,
    },
}

impl Codebook {
    /// `levels`-PAM with average power `power` over equiprobable messages.
    pub fn pam(levels: usize, power: f64) -> Result<Self> {
        if levels == 0 || levels > MAX_CODEBOOK_SIZE {
            return Err(Error::InvalidConfig(format!(
                "PAM order {levels} out of range"
            )));
        }
        let m = levels as f64;
        let spacing = if levels == 1 {
            0.0
        } else {
            (12.0 * power / (m * m - 1.0)).sqrt()
        };
        Ok(Codebook::Pam { levels, spacing })
    }

    /// `size` i.i.d. Gaussian codewords of length `dim`, each rescaled to
    /// per-symbol power exactly `power`.
    pub fn gaussian(dim: usize, size: usize, power: f64, seed: u64) -> Result<Self> {
        if size == 0 || size > MAX_CODEBOOK_SIZE {
            return Err(Error::InvalidConfig(format!(
                "codebook size {size} out of range (max {MAX_CODEBOOK_SIZE})"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidConfig(
                "codebook dimension must be >= 1".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words = vec![0.0; dim * size];
        for w in words.chunks_mut(dim) {
            for v in w.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let e: f64 = w.iter().map(|v| v * v).sum::<f64>() / dim as f64;
            let s = if e > 0.0 { (power / e).sqrt() } else { 0.0 };
            w.iter_mut().for_each(|v| *v *= s);
        }
        Ok(Codebook::Gaussian { dim, size, words })
    }

    pub fn size(&self) -> usize {
        match self {
            Codebook::Pam { levels, .. } => *levels,
            Codebook::Gaussian { size, .. } => *size,
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Codebook::Pam { .. } => 1,
            Codebook::Gaussian { dim, .. } => *dim,
        }
    }

    pub fn kind(&self) -> CodebookKind {
        match self {
            Codebook::Pam { .. } => CodebookKind::Pam,
            Codebook::Gaussian { .. } => CodebookKind::Gaussian,
        }
    }

    /// Minimum distance between adjacent PAM levels (`None` for Gaussian).
    pub fn pam_spacing(&self) -> Option<f64> {
        match self {
            Codebook::Pam { spacing, .. } => Some(*spacing),
            Codebook::Gaussian { .. } => None,
        }
    }

    pub fn encode(&self, message: usize, out: &mut [f64]) {
        match self {
            Codebook::Pam { levels, spacing } => {
                out[0] = (message as f64 - (*levels as f64 - 1.0) / 2.0) * spacing;
            }
            Codebook::Gaussian { dim, words, .. } => {
                out.copy_from_slice(&words[message * dim..(message + 1) * dim]);
            }
        }
    }

    /// Nearest codeword index.
    pub fn decode(&self, y: &[f64]) -> usize {
        match self {
            Codebook::Pam { levels, spacing } => {
                if *levels == 1 {
                    return 0;
                }
                let idx = (y[0] / spacing + (*levels as f64 - 1.0) / 2.0).round();
                idx.clamp(0.0, *levels as f64 - 1.0) as usize
            }
            Codebook::Gaussian { dim, words, .. } => {
                let mut best = (f64::INFINITY, 0usize);
                for (i, w) in words.chunks(*dim).enumerate() {
                    let d: f64 = w.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                best.1
            }
        }
    }

    /// Average per-symbol power over equiprobable messages.
    pub fn average_power(&self) -> f64 {
        match self {
            Codebook::Pam { levels, spacing } => {
                let m = *levels as f64;
                spacing * spacing * (m * m - 1.0) / 12.0
            }
            Codebook::Gaussian { dim, size, words } => {
                words.iter().map(|v| v * v).sum::<f64>() / (*dim * *size) as f64
            }
        }
    }
}
