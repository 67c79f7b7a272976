//! Sample-path simulation of the interactive feedback protocol.
//!
//! Two identical schemes run interlaced over `2K` blocks of `n` channel
//! uses. Block `l = 2(k−1) + j` carries scheme `j`'s feedforward round `k`,
//! and its feedback goes out in block `l + 1` over the reverse link. Per
//! scheme:
//!
//! 1. Terminal A sends the codeword `Θ`; Terminal B sets `Θ̂₁ = Y₁`.
//! 2. For `k = 1..K−1`, B sends `X̃ = [γ_k·Θ̂_k + V_k] mod Λ`; A recovers
//!    `ε̃ = [Ỹ − γ_k·Θ − V_k] mod Λ` (equal to `γ_k·ε_k + Z̃` unless the
//!    modulo aliases), sends `α·ε̃`; B updates `Θ̂_{k+1} = Θ̂_k − β_{k+1}·Y`.
//! 3. B decodes `Θ̂_K` against the codebook.
//!
//! `γ_k` is recomputed from the analytic error variance each round so that
//! the looseness `L = P̃/(γ_k²σ_k² + σ̃²)` stays fixed.
//!
//! The coupled system replays exactly the same message, noise and dither
//! draws with every modulo removed. Its aliasing events are evaluated on
//! its own (jointly Gaussian) estimation errors.

mod codebook;
mod stats;

pub use codebook::{Codebook, CodebookKind, MAX_CODEBOOK_SIZE};
pub use stats::{
    estimate_error_prob, final_errors_without_aliasing, wilson_interval, ErrorEstimate, Proportion,
    SystemStats, TRIAL_CHUNK,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::ChannelParams;
use crate::error::{domain, Error, Result};
use crate::jscc::JsccParams;
use crate::lattice::{Lattice, LatticeKind};
use crate::units::Rate;

/// Stream id reserved for the shared codebook.
const CODEBOOK_STREAM: u64 = u64::MAX;

/// One Wiener refinement step of the error variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WienerStep {
    /// Feedback scaling `γ_k`.
    pub gamma: f64,
    /// Feedforward scaling `α`.
    pub alpha: f64,
    /// MMSE coefficient `β_{k+1}`.
    pub beta_next: f64,
    /// `σ_{k+1}²`.
    pub sigma2_next: f64,
}

/// Feedback scaling, feedforward scaling and MMSE update for a round whose
/// error variance is `sigma_k2`.
pub fn wiener_update(sigma_k2: f64, params: &ChannelParams, looseness: f64) -> Result<WienerStep> {
    if !sigma_k2.is_finite() || sigma_k2 <= 0.0 {
        return Err(domain(
            "wiener_update",
            format!("variance must be > 0, got {sigma_k2}"),
        ));
    }
    let headroom = params.p_tilde / looseness - params.sigma2_tilde;
    if !(looseness >= 1.0) || !(headroom > 0.0) {
        return Err(domain(
            "wiener_update",
            format!(
                "looseness {looseness} leaves no feedback power for the error (gamma not real)"
            ),
        ));
    }
    let gamma = (headroom / sigma_k2).sqrt();
    let alpha = (looseness * params.p / params.p_tilde).sqrt();
    let a2 = alpha * alpha;
    let denom = a2 * gamma * gamma * sigma_k2 + a2 * params.sigma2_tilde + params.sigma2;
    let beta_next = alpha * gamma * sigma_k2 / denom;
    let sigma2_next = sigma_k2 * (a2 * params.sigma2_tilde + params.sigma2) / denom;
    Ok(WienerStep {
        gamma,
        alpha,
        beta_next,
        sigma2_next,
    })
}

#[derive(Debug, Clone, PartialEq)]
struct RoundPlan {
    /// `σ_k²` entering the round.
    sigma2: f64,
    step: WienerStep,
    /// `None` when the estimate is already exact (`σ_k² = 0`).
    jscc: Option<JsccParams>,
}

/// A fully specified, runnable protocol instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    params: ChannelParams,
    rounds: usize,
    looseness: f64,
    lattice: Lattice,
    rate: Rate,
    codebook: Codebook,
    master_seed: u64,
    alpha: f64,
    plan: Vec<RoundPlan>,
    final_sigma2: f64,
}

/// Parameters for [`SchemeConfig::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub params: ChannelParams,
    pub rounds: usize,
    pub looseness: f64,
    pub lattice: LatticeKind,
    pub dimension: usize,
    pub rate: Rate,
    pub codebook: CodebookKind,
    pub master_seed: u64,
}

impl SchemeConfig {
    pub fn new(spec: &SchemeSpec) -> Result<Self> {
        let SchemeSpec {
            params,
            rounds,
            looseness,
            lattice,
            dimension,
            rate,
            codebook,
            master_seed,
        } = spec.clone();
        if rounds == 0 {
            return Err(Error::InvalidConfig("rounds must be >= 1".into()));
        }
        if !(looseness >= 1.0) || !looseness.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "looseness must be >= 1, got {looseness}"
            )));
        }
        if params.p_tilde / looseness <= params.sigma2_tilde {
            return Err(Error::InvalidConfig(format!(
                "looseness {looseness} must be below bsnr = {} for a real gamma",
                params.bsnr()
            )));
        }
        let lattice = Lattice::new(lattice, dimension, 1.0)?.scale_to_power(params.p_tilde)?;
        let n = lattice.dimension();

        let bits = rate.bits() * (rounds * n) as f64;
        let codebook = match codebook {
            CodebookKind::Pam => {
                if n != 1 {
                    return Err(Error::InvalidConfig(
                        "PAM codebook requires dimension 1".into(),
                    ));
                }
                let levels = 2f64.powf(bits);
                if levels > MAX_CODEBOOK_SIZE as f64 {
                    return Err(Error::InvalidConfig(format!(
                        "rate needs {levels} PAM levels"
                    )));
                }
                Codebook::pam((levels - 1e-9).ceil().max(1.0) as usize, params.p)?
            }
            CodebookKind::Gaussian => {
                let exp = (bits - 1e-9).ceil().max(0.0);
                if exp > 16.0 {
                    return Err(Error::InvalidConfig(format!(
                        "rate needs 2^{exp} codewords (max 2^16)"
                    )));
                }
                let cb_seed = trial_rng(master_seed, CODEBOOK_STREAM).random::<u64>();
                Codebook::gaussian(n, 1usize << exp as u32, params.p, cb_seed)?
            }
        };

        let mut plan = Vec::with_capacity(rounds.saturating_sub(1));
        let mut sigma2 = params.sigma2;
        let alpha = (looseness * params.p / params.p_tilde).sqrt();
        for _ in 1..rounds {
            let (step, jscc) = if sigma2 > 0.0 {
                let step = wiener_update(sigma2, &params, looseness)?;
                let power = step.alpha
                    * step.alpha
                    * (step.gamma * step.gamma * sigma2 + params.sigma2_tilde);
                assert!(
                    (power - params.p).abs() <= 1e-9 * params.p,
                    "feedforward power identity violated"
                );
                (step, Some(JsccParams::new(step.gamma, lattice.clone())?))
            } else {
                let step = WienerStep {
                    gamma: 0.0,
                    alpha,
                    beta_next: 0.0,
                    sigma2_next: 0.0,
                };
                (step, None)
            };
            plan.push(RoundPlan { sigma2, step, jscc });
            sigma2 = step.sigma2_next;
        }
        Ok(SchemeConfig {
            params,
            rounds,
            looseness,
            lattice,
            rate,
            codebook,
            master_seed,
            alpha,
            plan,
            final_sigma2: sigma2,
        })
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }
    pub fn rounds(&self) -> usize {
        self.rounds
    }
    pub fn looseness(&self) -> f64 {
        self.looseness
    }
    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
    pub fn dimension(&self) -> usize {
        self.lattice.dimension()
    }
    pub fn rate(&self) -> Rate {
        self.rate
    }
    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Total blocklength `N = 2·K·n`.
    pub fn blocklength(&self) -> usize {
        2 * self.rounds * self.dimension()
    }

    /// Rate actually carried after rounding the codebook size up.
    pub fn realized_rate(&self) -> f64 {
        (self.codebook.size() as f64).log2() / (self.rounds * self.dimension()) as f64
    }

    /// Analytic error variance `σ_k²` for `k = 1..=K`.
    pub fn variance_track(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.plan.iter().map(|p| p.sigma2).collect();
        v.push(self.final_sigma2);
        v
    }

    /// `γ_k` for `k = 1..K−1`.
    pub fn gammas(&self) -> Vec<f64> {
        self.plan.iter().map(|p| p.step.gamma).collect()
    }

    /// `β_{k+1}` for `k = 1..K−1`.
    pub fn betas(&self) -> Vec<f64> {
        self.plan.iter().map(|p| p.step.beta_next).collect()
    }

    /// Analytic `σ_K²` at the final decoder.
    pub fn final_variance(&self) -> f64 {
        self.final_sigma2
    }

    /// Block index `l = 2(k−1) + j` (1-based) of scheme `j`'s feedforward round `k`.
    pub fn feedforward_block(round: usize, scheme: usize) -> usize {
        2 * (round - 1) + scheme
    }

    /// Block index of the feedback that follows feedforward round `k` of scheme `j`.
    pub fn feedback_block(round: usize, scheme: usize) -> usize {
        Self::feedforward_block(round, scheme) + 1
    }
}

/// Per-scheme outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    /// Modulo-aliasing indicator `E_k` for feedback rounds `k = 1..K−1`.
    pub aliasing: Vec<bool>,
    pub decode_error: bool,
    /// Estimation errors `ε_k = Θ̂_k − Θ` for `k = 1..=K`, `n` values each.
    pub estimation_errors: Vec<f64>,
}

impl SchemeOutcome {
    /// First feedback round (1-based) with an aliasing event.
    pub fn first_aliasing_round(&self) -> Option<usize> {
        self.aliasing.iter().position(|&a| a).map(|i| i + 1)
    }

    /// Union of the aliasing events.
    pub fn any_aliasing(&self) -> bool {
        self.aliasing.iter().any(|&a| a)
    }

    /// Union of all error events `E_1..E_K`, the last being the decoding error.
    pub fn any_event(&self) -> bool {
        self.decode_error || self.any_aliasing()
    }

    /// `ε_K`.
    pub fn final_error(&self, dim: usize) -> &[f64] {
        &self.estimation_errors[self.estimation_errors.len() - dim..]
    }
}

/// Everything recorded about one trial of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub schemes: [SchemeOutcome; 2],
    /// Sum of squared feedforward inputs and the number of uses.
    pub ff_energy: f64,
    pub ff_uses: usize,
    /// Sum of squared feedback inputs and the number of uses.
    pub fb_energy: f64,
    pub fb_uses: usize,
    /// Real and coupled sample paths agree until the first aliasing event
    /// and the unions of `E_1..E_K` coincide in both schemes.
    pub coupled_agreement: bool,
}

impl TrialRecord {
    pub fn ff_power(&self) -> f64 {
        if self.ff_uses == 0 {
            0.0
        } else {
            self.ff_energy / self.ff_uses as f64
        }
    }

    pub fn fb_power(&self) -> f64 {
        if self.fb_uses == 0 {
            0.0
        } else {
            self.fb_energy / self.fb_uses as f64
        }
    }

    /// Decoding error in either scheme.
    pub fn block_error(&self) -> bool {
        self.schemes.iter().any(|s| s.decode_error)
    }

    pub fn first_aliasing_round(&self, scheme: usize) -> Option<usize> {
        self.schemes[scheme].first_aliasing_round()
    }
}

/// Random inputs of one trial, shared by the real and coupled systems.
struct Realization {
    messages: [usize; 2],
    /// Feedforward noise, `K·n` per scheme.
    ff_noise: [Vec<f64>; 2],
    /// Feedback noise, `(K−1)·n` per scheme.
    fb_noise: [Vec<f64>; 2],
    /// Dithers, `(K−1)·n` per scheme.
    dithers: [Vec<f64>; 2],
}

/// Per-trial generator: ChaCha8 keyed by the master seed, one stream per
/// trial index.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn draw_realization(config: &SchemeConfig, trial_index: u64) -> Realization {
    let mut rng = trial_rng(config.master_seed, trial_index);
    let n = config.dimension();
    let k = config.rounds;
    let sd = config.params.sigma2.sqrt();
    let sd_t = config.params.sigma2_tilde.sqrt();
    let m = config.codebook.size();
    let draw = |rng: &mut ChaCha8Rng| {
        let msg = rng.random_range(0..m);
        let ff: Vec<f64> = (0..k * n).map(|_| sd * normal(rng)).collect();
        let mut fb = vec![0.0; (k - 1) * n];
        let mut dith = vec![0.0; (k - 1) * n];
        for r in 0..k - 1 {
            for v in &mut fb[r * n..(r + 1) * n] {
                *v = sd_t * normal(rng);
            }
            config
                .lattice
                .sample_dither_into(rng, &mut dith[r * n..(r + 1) * n]);
        }
        (msg, ff, fb, dith)
    };
    let (m0, f0, b0, d0) = draw(&mut rng);
    let (m1, f1, b1, d1) = draw(&mut rng);
    Realization {
        messages: [m0, m1],
        ff_noise: [f0, f1],
        fb_noise: [b0, b1],
        dithers: [d0, d1],
    }
}

/// Which of the two sample-path-coupled systems a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    /// Modulo-lattice feedback as transmitted.
    Real,
    /// Same draws, no modulo anywhere.
    Coupled,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Real => "real",
            SystemKind::Coupled => "coupled",
        }
    }
}

struct SchemePath {
    outcome: SchemeOutcome,
    ff_energy: f64,
    fb_energy: f64,
}

fn run_scheme(
    config: &SchemeConfig,
    real: &Realization,
    scheme: usize,
    system: SystemKind,
) -> SchemePath {
    let n = config.dimension();
    let k_total = config.rounds;
    let lattice = &config.lattice;
    let ff_noise = &real.ff_noise[scheme];
    let fb_noise = &real.fb_noise[scheme];
    let dithers = &real.dithers[scheme];

    let mut theta = vec![0.0; n];
    config.codebook.encode(real.messages[scheme], &mut theta);
    let mut ff_energy: f64 = theta.iter().map(|v| v * v).sum();
    let mut fb_energy = 0.0;

    // Round 1: X₁ = Θ, Θ̂₁ = Y₁.
    let mut theta_hat: Vec<f64> = theta
        .iter()
        .zip(&ff_noise[..n])
        .map(|(t, z)| t + z)
        .collect();
    let mut errors = Vec::with_capacity(k_total * n);
    errors.extend(theta_hat.iter().zip(&theta).map(|(h, t)| h - t));

    let mut aliasing = Vec::with_capacity(k_total.saturating_sub(1));
    let mut fb_tx = vec![0.0; n];
    let mut eps_tilde = vec![0.0; n];
    let mut pre = vec![0.0; n];
    for (r, plan) in config.plan.iter().enumerate() {
        let gamma = plan.step.gamma;
        let z_t = &fb_noise[r * n..(r + 1) * n];
        let v = &dithers[r * n..(r + 1) * n];
        let eps = &errors[r * n..(r + 1) * n];

        // Genie bookkeeping: the pre-modulo feedback quantity γ·ε + Z̃.
        for ((p, e), z) in pre.iter_mut().zip(eps).zip(z_t) {
            *p = gamma * e + z;
        }
        aliasing.push(!lattice.in_fundamental_cell(&pre));

        match (system, &plan.jscc) {
            (SystemKind::Real, Some(jscc)) => {
                // B: X̃ = [γΘ̂ + V] mod Λ;  A: ε̃ = [Ỹ − γΘ − V] mod Λ.
                jscc.encode_observation_into(&theta_hat, v, &mut fb_tx);
                let y_t: Vec<f64> = fb_tx.iter().zip(z_t).map(|(x, z)| x + z).collect();
                jscc.receive_into(&y_t, v, &theta, &mut eps_tilde);
            }
            (SystemKind::Real, None) => {
                fb_tx.copy_from_slice(v);
                lattice.modulo_in_place(&mut fb_tx);
                for ((o, x), (z, d)) in eps_tilde.iter_mut().zip(&fb_tx).zip(z_t.iter().zip(v)) {
                    *o = x + z - d;
                }
                lattice.modulo_in_place(&mut eps_tilde);
            }
            (SystemKind::Coupled, _) => {
                for (((x, h), d), (o, (z, t))) in fb_tx
                    .iter_mut()
                    .zip(&theta_hat)
                    .zip(v)
                    .zip(eps_tilde.iter_mut().zip(z_t.iter().zip(&theta)))
                {
                    *x = gamma * h + d;
                    *o = (*x + z) - gamma * t - d;
                }
            }
        }
        fb_energy += fb_tx.iter().map(|x| x * x).sum::<f64>();

        // A → B: X = α·ε̃;  B: Θ̂ ← Θ̂ − β·Y.
        let z = &ff_noise[(r + 1) * n..(r + 2) * n];
        let beta = plan.step.beta_next;
        for ((h, e), zz) in theta_hat.iter_mut().zip(&eps_tilde).zip(z) {
            let x = config.alpha * e;
            ff_energy += x * x;
            *h -= beta * (x + zz);
        }
        errors.extend(theta_hat.iter().zip(&theta).map(|(h, t)| h - t));
    }

    let decoded = config.codebook.decode(&theta_hat);
    SchemePath {
        outcome: SchemeOutcome {
            aliasing,
            decode_error: decoded != real.messages[scheme],
            estimation_errors: errors,
        },
        ff_energy,
        fb_energy,
    }
}

fn paths_agree(config: &SchemeConfig, a: &SchemeOutcome, b: &SchemeOutcome) -> bool {
    if a.first_aliasing_round() != b.first_aliasing_round() || a.any_event() != b.any_event() {
        return false;
    }
    let n = config.dimension();
    // ε_1..ε_{k0} coincide, where k0 is the first aliasing round (or K).
    let upto = a.first_aliasing_round().unwrap_or(config.rounds);
    a.estimation_errors[..upto * n]
        .iter()
        .zip(&b.estimation_errors[..upto * n])
        .all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()))
}

fn record(
    config: &SchemeConfig,
    trial_index: u64,
    p0: SchemePath,
    p1: SchemePath,
    agreement: bool,
) -> TrialRecord {
    let n = config.dimension();
    TrialRecord {
        trial_index,
        ff_energy: p0.ff_energy + p1.ff_energy,
        ff_uses: 2 * config.rounds * n,
        fb_energy: p0.fb_energy + p1.fb_energy,
        fb_uses: 2 * config.rounds.saturating_sub(1) * n,
        schemes: [p0.outcome, p1.outcome],
        coupled_agreement: agreement,
    }
}

/// Run the real and the coupled system on the same realization.
pub fn run_trial_pair(config: &SchemeConfig, trial_index: u64) -> (TrialRecord, TrialRecord) {
    let realization = draw_realization(config, trial_index);
    let r0 = run_scheme(config, &realization, 0, SystemKind::Real);
    let r1 = run_scheme(config, &realization, 1, SystemKind::Real);
    let c0 = run_scheme(config, &realization, 0, SystemKind::Coupled);
    let c1 = run_scheme(config, &realization, 1, SystemKind::Coupled);
    let agreement = paths_agree(config, &r0.outcome, &c0.outcome)
        && paths_agree(config, &r1.outcome, &c1.outcome);
    (
        record(config, trial_index, r0, r1, agreement),
        record(config, trial_index, c0, c1, agreement),
    )
}

/// Run one trial of the real (modulo-lattice) system.
pub fn run_trial(config: &SchemeConfig, trial_index: u64) -> TrialRecord {
    run_trial_pair(config, trial_index).0
}

/// Run one trial of the coupled system: identical realizations, no modulo
/// operations at either terminal (the feedback power constraint is not met).
pub fn run_coupled_trial(config: &SchemeConfig, trial_index: u64) -> TrialRecord {
    run_trial_pair(config, trial_index).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback_exponent::effective_snr;

    fn spec(rounds: usize, looseness: f64) -> SchemeSpec {
        SchemeSpec {
            params: ChannelParams::from_db(20.0, 30.0).unwrap(),
            rounds,
            looseness,
            lattice: LatticeKind::Integer,
            dimension: 1,
            rate: Rate::new(0.5).unwrap(),
            codebook: CodebookKind::Pam,
            master_seed: 42,
        }
    }

    #[test]
    fn wiener_power_identity_and_gain() {
        let p = ChannelParams::from_db(20.0, 30.0).unwrap();
        let l = 9.0;
        let mut s2 = p.sigma2;
        for _ in 0..5 {
            let w = wiener_update(s2, &p, l).unwrap();
            let power = w.alpha * w.alpha * (w.gamma * w.gamma * s2 + p.sigma2_tilde);
            assert!((power - p.p).abs() < 1e-9 * p.p);
            let gain = 1.0 + p.snr() * (1.0 - l / p.bsnr()) / (1.0 + l / p.dsnr());
            assert!((s2 / w.sigma2_next - gain).abs() < 1e-9 * gain);
            // L = P̃/(γ²σ² + σ̃²)
            assert!((p.p_tilde / (w.gamma * w.gamma * s2 + p.sigma2_tilde) - l).abs() < 1e-9 * l);
            s2 = w.sigma2_next;
        }
        assert!(wiener_update(0.0, &p, l).is_err());
        assert!(wiener_update(-1.0, &p, l).is_err());
        assert!(wiener_update(1.0, &p, p.bsnr()).is_err());
    }

    #[test]
    fn exact_feedback_gain_is_one_plus_snr() {
        let p = ChannelParams::from_db(20.0, 30.0)
            .unwrap()
            .without_feedback_noise();
        let w = wiener_update(3.0, &p, 50.0).unwrap();
        assert!((3.0 / w.sigma2_next - 101.0).abs() < 1e-9);
    }

    #[test]
    fn final_variance_matches_effective_snr() {
        let cfg = SchemeConfig::new(&spec(4, 30.0)).unwrap();
        let p = cfg.params();
        let s = effective_snr(p, 30.0, 4).unwrap().linear();
        assert!((p.p / cfg.final_variance() - s).abs() < 1e-9 * s);
    }

    #[test]
    fn construction_rejects_non_real_gamma() {
        let mut s = spec(3, 2e5);
        assert!(SchemeConfig::new(&s).is_err());
        s.looseness = 0.5;
        assert!(SchemeConfig::new(&s).is_err());
        s.looseness = 5.0;
        s.rounds = 0;
        assert!(SchemeConfig::new(&s).is_err());
        s.rounds = 2;
        s.dimension = 2;
        assert!(SchemeConfig::new(&s).is_err(), "PAM needs n = 1");
    }

    #[test]
    fn codebook_size_and_blocklength() {
        let cfg = SchemeConfig::new(&spec(3, 10.0)).unwrap();
        // 2^{1.5} = 2.83 → 3 levels
        assert_eq!(cfg.codebook().size(), 3);
        assert!((cfg.realized_rate() - 3f64.log2() / 3.0).abs() < 1e-12);
        assert_eq!(cfg.blocklength(), 6);
        let mut s = spec(2, 10.0);
        s.lattice = LatticeKind::D4;
        s.dimension = 4;
        s.codebook = CodebookKind::Gaussian;
        s.rate = Rate::new(1.0).unwrap();
        let cfg = SchemeConfig::new(&s).unwrap();
        assert_eq!(cfg.codebook().size(), 256);
        assert_eq!(cfg.blocklength(), 16);
    }

    #[test]
    fn interlaced_block_indices() {
        assert_eq!(SchemeConfig::feedforward_block(1, 1), 1);
        assert_eq!(SchemeConfig::feedback_block(1, 1), 2);
        assert_eq!(SchemeConfig::feedforward_block(1, 2), 2);
        assert_eq!(SchemeConfig::feedforward_block(3, 2), 6);
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = SchemeConfig::new(&spec(3, 3.0)).unwrap();
        for t in [0u64, 1, 977] {
            assert_eq!(run_trial(&cfg, t), run_trial(&cfg, t));
        }
        assert_ne!(run_trial(&cfg, 0), run_trial(&cfg, 1));
    }

    #[test]
    fn noiseless_everything_decodes() {
        let mut s = spec(3, 10.0);
        s.params = s
            .params
            .without_feedback_noise()
            .without_feedforward_noise();
        s.rate = Rate::new(2.0).unwrap();
        let cfg = SchemeConfig::new(&s).unwrap();
        for t in 0..500 {
            let rec = run_trial(&cfg, t);
            assert!(!rec.block_error());
            assert!(rec.schemes.iter().all(|s| !s.any_aliasing()));
            assert!(rec.coupled_agreement);
        }
    }

    #[test]
    fn coupled_matches_real_without_aliasing() {
        let cfg = SchemeConfig::new(&spec(4, 3.0)).unwrap();
        let mut seen_alias = false;
        for t in 0..3000 {
            let real = run_trial(&cfg, t);
            let coupled = run_coupled_trial(&cfg, t);
            assert!(real.coupled_agreement);
            for (a, b) in real.schemes.iter().zip(&coupled.schemes) {
                assert_eq!(a.any_aliasing(), b.any_aliasing());
                assert_eq!(a.first_aliasing_round(), b.first_aliasing_round());
                seen_alias |= a.any_aliasing();
                if !a.any_aliasing() {
                    for (x, y) in a.estimation_errors.iter().zip(&b.estimation_errors) {
                        assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
                    }
                }
            }
        }
        assert!(
            seen_alias,
            "L = 3 should produce some aliasing in 3000 trials"
        );
    }

    #[test]
    fn coupled_feedback_power_exceeds_constraint() {
        // Without the modulo the feedback input γΘ̂ + V grows with the codeword.
        let mut s = spec(3, 3.0);
        s.rate = Rate::new(3.0).unwrap();
        let cfg = SchemeConfig::new(&s).unwrap();
        let mut real = 0.0;
        let mut coupled = 0.0;
        for t in 0..2000 {
            real += run_trial(&cfg, t).fb_power();
            coupled += run_coupled_trial(&cfg, t).fb_power();
        }
        assert!(coupled > 2.0 * real);
    }
}
