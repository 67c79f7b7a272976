use crate::error::{domain, Result};
use crate::units::{db_to_linear, SnrValue};

/// Powers and noise variances of the feedforward and feedback AWGN channels.
///
/// A zero noise variance models a noiseless link; the corresponding snr is
/// then infinite and the closed-form analysis routines reject the
/// parameters, while the simulator accepts them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Feedforward power constraint `P`.
    pub p: f64,
    /// Feedforward noise variance `σ²`.
    pub sigma2: f64,
    /// Feedback power constraint `P̃`.
    pub p_tilde: f64,
    /// Feedback noise variance `σ̃²`.
    pub sigma2_tilde: f64,
}

impl ChannelParams {
    pub fn new(p: f64, sigma2: f64, p_tilde: f64, sigma2_tilde: f64) -> Result<Self> {
        for (name, v) in [("P", p), ("P_tilde", p_tilde)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(domain(
                    "ChannelParams",
                    format!("{name} must be finite and > 0, got {v}"),
                ));
            }
        }
        for (name, v) in [("sigma2", sigma2), ("sigma2_tilde", sigma2_tilde)] {
            if !v.is_finite() || v < 0.0 {
                return Err(domain(
                    "ChannelParams",
                    format!("{name} must be finite and >= 0, got {v}"),
                ));
            }
        }
        let params = ChannelParams {
            p,
            sigma2,
            p_tilde,
            sigma2_tilde,
        };
        if sigma2 > 0.0 && sigma2_tilde > 0.0 && params.dsnr() <= 1.0 {
            return Err(domain(
                "ChannelParams",
                format!(
                    "feedback snr must exceed feedforward snr (dsnr = {})",
                    params.dsnr()
                ),
            ));
        }
        Ok(params)
    }

    /// Unit noise variances, `P = snr`, `P̃ = snr·dsnr`.
    pub fn from_db(snr_db: f64, dsnr_db: f64) -> Result<Self> {
        if !snr_db.is_finite() || !dsnr_db.is_finite() {
            return Err(domain(
                "ChannelParams::from_db",
                "snr_db and dsnr_db must be finite",
            ));
        }
        if dsnr_db <= 0.0 {
            return Err(domain(
                "ChannelParams::from_db",
                format!("dsnr_db must be > 0, got {dsnr_db}"),
            ));
        }
        let snr = db_to_linear(snr_db);
        Self::new(snr, 1.0, snr * db_to_linear(dsnr_db), 1.0)
    }

    /// Same powers with the feedforward noise removed.
    pub fn without_feedforward_noise(mut self) -> Self {
        self.sigma2 = 0.0;
        self
    }

    /// Same powers with the feedback noise removed.
    pub fn without_feedback_noise(mut self) -> Self {
        self.sigma2_tilde = 0.0;
        self
    }

    /// `snr = P/σ²` (infinite for a noiseless feedforward link).
    pub fn snr(&self) -> f64 {
        self.p / self.sigma2
    }

    /// `bsnr = P̃/σ̃²`.
    pub fn bsnr(&self) -> f64 {
        self.p_tilde / self.sigma2_tilde
    }

    /// `dsnr = bsnr/snr`.
    pub fn dsnr(&self) -> f64 {
        self.bsnr() / self.snr()
    }

    /// The three snr figures, all finite and positive, for the analysis code.
    pub(crate) fn analysis_snrs(&self, func: &'static str) -> Result<(f64, f64, f64)> {
        let snr = self.snr();
        let bsnr = self.bsnr();
        if !snr.is_finite() || !bsnr.is_finite() {
            return Err(domain(
                func,
                "closed-form analysis requires noisy feedforward and feedback links",
            ));
        }
        Ok((snr, bsnr, bsnr / snr))
    }

    pub fn snr_value(&self) -> Result<SnrValue> {
        SnrValue::new(self.snr())
    }
}
