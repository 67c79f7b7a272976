//! Command implementations behind the `nfb` binary.
//!
//! Every command returns data (rows or `key = value` pairs) and the writers
//! serialize it, so tests can exercise commands without spawning a process.
//!
//! # CSV schemas
//!
//! `exponents` (one row per grid point, LF line endings):
//!
//! ```text
//! rate_bits,rate_over_capacity,e_sp_norm,e_r_norm,e_fb_norm,k_star,l_star,r_region,fb_binding
//! ```
//!
//! Exponents are divided by the linear snr. `e_fb_norm`, `k_star`, `l_star`
//! and `fb_binding` are empty above `R/C = 0.9`.
//!
//! `simulate` (long format):
//!
//! ```text
//! metric,system,scheme,round,value,ci_low,ci_high
//! ```
//!
//! Frequencies carry Wilson 95% intervals; fields that do not apply are
//! empty. Floating-point values use 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use nfb_core::exponents::{capacity, gallager_exp_with, sphere_packing_exp};
use nfb_core::feedback_exponent::{
    balance_looseness, eta, high_snr_bound, kstar_zero_rate, region_assumptions_hold,
    zero_rate_rounds,
};
use nfb_core::{
    estimate_error_prob, CampaignConfig, ChannelParams, ExponentRegion, FeedbackOptimizer, Rate,
    SchemeConfig, SystemKind,
};
use rayon::prelude::*;
use thiserror::Error;

/// Largest `R/C` at which the feedback exponent is evaluated.
pub const FB_RATIO_LIMIT: f64 = 0.9;

/// Spacing of the feedback-exponent grid used by `--fig1`.
pub const FIG1_FB_STEP: f64 = 0.0183633691077923;

/// Points on each `--fig1` grid.
pub const FIG1_POINTS: usize = 50;

/// Round limit under `--fig1`. The reference curve was searched over
/// `K ≤ 11`; larger `K` only wins there through the cancellation in the
/// direct expurgation formula.
pub const FIG1_K_MAX: usize = 11;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] nfb_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    /// 2 for usage and configuration errors, 3 for domain errors, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(nfb_core::Error::Parse { .. } | nfb_core::Error::InvalidConfig(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row of the exponent table.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub rate_bits: f64,
    pub rate_over_capacity: f64,
    pub e_sp_norm: f64,
    pub e_r_norm: f64,
    pub e_fb_norm: Option<f64>,
    pub k_star: Option<usize>,
    pub l_star: Option<f64>,
    pub r_region: ExponentRegion,
    pub fb_binding: Option<String>,
}

/// `points` values `i/(points−1)` covering `[0, 1]`.
pub fn uniform_grid(points: usize) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err(CliError::Usage(format!(
            "--grid must be >= 2, got {points}"
        )));
    }
    Ok((0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect())
}

/// Sorted union of the feedback grid (`i·0.01836…`) and the uniform
/// 50-point grid, with exact duplicates removed.
pub fn fig1_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..FIG1_POINTS).map(|i| i as f64 * FIG1_FB_STEP).collect();
    g.extend((0..FIG1_POINTS).map(|i| i as f64 / (FIG1_POINTS - 1) as f64));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Exponent rows at the given `R/C` ratios.
pub fn exponent_rows(
    params: &ChannelParams,
    ratios: &[f64],
    optimizer: FeedbackOptimizer,
) -> CliResult<Vec<CurveRow>> {
    let snr = params.snr_value()?;
    let c = capacity(snr).bits();
    let eval = optimizer.eval;
    ratios
        .par_iter()
        .map(|&ratio| {
            if !(0.0..=1.0).contains(&ratio) {
                return Err(CliError::Usage(format!("R/C = {ratio} outside [0, 1]")));
            }
            let rate = Rate::new((ratio * c).min(c))?;
            let e_sp = sphere_packing_exp(snr, rate)?;
            let (e_r, region) = gallager_exp_with(snr, rate, eval)?;
            let fb = if ratio <= FB_RATIO_LIMIT + 1e-12 {
                Some(optimizer.optimize(params, rate)?)
            } else {
                None
            };
            let s = snr.linear();
            Ok(CurveRow {
                rate_bits: rate.bits(),
                rate_over_capacity: ratio,
                e_sp_norm: e_sp / s,
                e_r_norm: e_r / s,
                e_fb_norm: fb.map(|f| f.e_fb / s),
                k_star: fb.map(|f| f.k_star),
                l_star: fb.map(|f| f.l_star),
                r_region: region,
                fb_binding: fb.map(|f| f.binding.as_str().to_string()),
            })
        })
        .collect()
}

pub const CURVE_HEADER: &str =
    "rate_bits,rate_over_capacity,e_sp_norm,e_r_norm,e_fb_norm,k_star,l_star,r_region,fb_binding";

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut s = String::with_capacity(160 * (rows.len() + 1));
    s.push_str(CURVE_HEADER);
    s.push('\n');
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            fmt_num(r.rate_bits),
            fmt_num(r.rate_over_capacity),
            fmt_num(r.e_sp_norm),
            fmt_num(r.e_r_norm),
            opt(r.e_fb_norm),
            r.k_star.map(|k| k.to_string()).unwrap_or_default(),
            opt(r.l_star),
            r.r_region.as_str(),
            r.fb_binding.as_deref().unwrap_or(""),
        );
    }
    s
}

/// Write to `path`, or to standard output when `path` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(io_err(p)),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}

/// Options of the `exponents` command.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentsOpts {
    pub snr_db: f64,
    pub dsnr_db: f64,
    pub grid: usize,
    pub fig1: bool,
    pub optimizer: FeedbackOptimizer,
}

pub fn cmd_exponents(opts: &ExponentsOpts) -> CliResult<String> {
    let params = ChannelParams::from_db(opts.snr_db, opts.dsnr_db)?;
    let grid = if opts.fig1 {
        fig1_grid()
    } else {
        uniform_grid(opts.grid)?
    };
    Ok(curve_csv(&exponent_rows(&params, &grid, opts.optimizer)?))
}

/// Ordered `key = value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report(pub Vec<(String, String)>);

impl Report {
    fn num(&mut self, key: &str, v: f64) {
        self.0.push((key.to_string(), fmt_num(v)));
    }

    fn text(&mut self, key: &str, v: impl ToString) {
        self.0.push((key.to_string(), v.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

pub fn cmd_optimize(
    snr_db: f64,
    dsnr_db: f64,
    rate_bits: f64,
    optimizer: FeedbackOptimizer,
) -> CliResult<Report> {
    let params = ChannelParams::from_db(snr_db, dsnr_db)?;
    let rate = Rate::new(rate_bits)?;
    if optimizer.k_max == 0 {
        return Err(CliError::Usage("--k-max must be >= 1".into()));
    }
    let res = optimizer.optimize(&params, rate)?;
    let c = capacity(params.snr_value()?).bits();
    let mut r = Report::default();
    r.num("snr_db", snr_db);
    r.num("dsnr_db", dsnr_db);
    r.num("rate_bits", rate_bits);
    r.num("capacity_bits", c);
    r.num("rate_over_capacity", rate_bits / c);
    r.num("e_fb", res.e_fb);
    r.num("e_fb_norm", res.e_fb / params.snr());
    r.text("k_star", res.k_star);
    r.num("l_star", res.l_star);
    r.text("binding", res.binding);
    r.text("region_valid", res.region_valid);
    r.text("k_at_limit", res.k_at_limit);
    if let Ok(ks) = kstar_zero_rate(params.dsnr()) {
        r.num("kstar_zero_rate", ks);
    }
    Ok(r)
}

pub fn cmd_bound(
    snr_db: f64,
    dsnr_db: f64,
    rate_bits: f64,
    rounds: Option<usize>,
) -> CliResult<Report> {
    let params = ChannelParams::from_db(snr_db, dsnr_db)?;
    let rate = Rate::new(rate_bits)?;
    let k = match rounds {
        Some(k) => k,
        None => zero_rate_rounds(&params)?,
    };
    if k <= 1 {
        return Err(CliError::Usage(format!("--rounds must be > 1, got {k}")));
    }
    let bound = high_snr_bound(&params, rate, k)?;
    let l = balance_looseness(&params, rate, k)?;
    let mut r = Report::default();
    r.num("snr_db", snr_db);
    r.num("dsnr_db", dsnr_db);
    r.num("rate_bits", rate_bits);
    r.text("rounds", k);
    r.num("eta", eta(rate_bits * k as f64)?);
    r.num("bound", bound);
    r.num("bound_norm", bound / params.snr());
    r.num("l_star", l);
    r.text("looseness_above_4", l > 4.0);
    r.text("region_valid", region_assumptions_hold(&params, rate, k, l));
    Ok(r)
}

/// Options of the `simulate` command.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOpts {
    pub config: PathBuf,
    pub trials: u64,
    /// Overrides the configuration file's `seed`.
    pub seed: Option<u64>,
}

pub const SIM_HEADER: &str = "metric,system,scheme,round,value,ci_low,ci_high";

pub fn load_config(path: &Path) -> CliResult<CampaignConfig> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Ok(CampaignConfig::parse(&text)?)
}

/// Run the campaign and return `(csv, summary report)`.
pub fn cmd_simulate(opts: &SimulateOpts) -> CliResult<(String, Report)> {
    let mut campaign = load_config(&opts.config)?;
    if let Some(seed) = opts.seed {
        campaign.seed = seed;
    }
    if opts.trials == 0 {
        return Err(CliError::Usage("--trials must be >= 1".into()));
    }
    let cfg = campaign.build()?;
    let est = estimate_error_prob(&cfg, opts.trials)?;
    Ok((simulation_csv(&cfg, &est), simulation_report(&cfg, &est)))
}

fn simulation_csv(cfg: &SchemeConfig, est: &nfb_core::ErrorEstimate) -> String {
    let mut s = String::new();
    s.push_str(SIM_HEADER);
    s.push('\n');
    let mut prop = |metric: &str,
                    sys: &str,
                    scheme: Option<usize>,
                    round: Option<usize>,
                    p: nfb_core::Proportion| {
        let (lo, hi) = p.wilson95();
        let _ = writeln!(
            s,
            "{metric},{sys},{},{},{},{},{}",
            scheme.map(|i| (i + 1).to_string()).unwrap_or_default(),
            round.map(|k| k.to_string()).unwrap_or_default(),
            fmt_num(p.estimate()),
            fmt_num(lo),
            fmt_num(hi)
        );
    };
    let k = cfg.rounds();
    for kind in [SystemKind::Real, SystemKind::Coupled] {
        let st = match kind {
            SystemKind::Real => &est.real,
            SystemKind::Coupled => &est.coupled,
        };
        let name = kind.as_str();
        for i in 0..2 {
            for round in 1..k {
                prop("p_mod", name, Some(i), Some(round), st.p_mod(i, round));
            }
            prop("p_mod_any", name, Some(i), None, st.p_mod_any(i));
            prop("p_dec", name, Some(i), Some(k), st.p_dec(i));
            prop("p_union", name, Some(i), None, st.p_union(i));
        }
        prop("p_e", name, None, None, st.p_e());
    }
    let mut plain = |metric: &str, sys: &str, v: String| {
        let _ = writeln!(s, "{metric},{sys},,,{v},,");
    };
    for kind in [SystemKind::Real, SystemKind::Coupled] {
        let st = match kind {
            SystemKind::Real => &est.real,
            SystemKind::Coupled => &est.coupled,
        };
        plain("union_sum", kind.as_str(), fmt_num(st.union_sum()));
        plain("ff_power", kind.as_str(), fmt_num(st.ff_power()));
        plain("fb_power", kind.as_str(), fmt_num(st.fb_power()));
    }
    plain("lemma1_agreement", "", est.lemma1_agreement.to_string());
    plain("trials", "", est.trials.to_string());
    if let Some((v, se)) = est.final_variance() {
        let _ = writeln!(
            s,
            "final_variance,real,,{k},{},{},{}",
            fmt_num(v),
            fmt_num(v - 1.96 * se),
            fmt_num(v + 1.96 * se)
        );
    }
    let mut plain = |metric: &str, v: String| {
        let _ = writeln!(s, "{metric},,,,{v},,");
    };
    plain("analytic_final_variance", fmt_num(cfg.final_variance()));
    plain("realized_rate", fmt_num(cfg.realized_rate()));
    plain("blocklength", cfg.blocklength().to_string());
    plain("codebook_size", cfg.codebook().size().to_string());
    s
}

fn simulation_report(cfg: &SchemeConfig, est: &nfb_core::ErrorEstimate) -> Report {
    let mut r = Report::default();
    r.text("trials", est.trials);
    r.text("rounds", cfg.rounds());
    r.text("lattice", cfg.lattice().kind().as_str());
    r.text("dimension", cfg.dimension());
    r.text("codebook_size", cfg.codebook().size());
    r.num("realized_rate", cfg.realized_rate());
    r.num("p_e", est.real.p_e().estimate());
    r.num("union_sum", est.coupled.union_sum());
    r.text("union_bound_holds", est.union_bound_holds());
    r.num("ff_power", est.real.ff_power());
    r.num("fb_power", est.real.fb_power());
    r.text("lemma1_agreement", est.lemma1_agreement);
    r.num("analytic_final_variance", cfg.final_variance());
    if let Some((v, se)) = est.final_variance() {
        r.num("final_variance", v);
        r.num("final_variance_se", se);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = uniform_grid(5).unwrap();
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(uniform_grid(1).is_err());
        let f = fig1_grid();
        assert_eq!(f.len(), 99, "0 is shared by both grids");
        assert!(f.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*f.last().unwrap(), 1.0);
    }

    #[test]
    fn number_format_round_trips() {
        for x in [
            0.0,
            1.0,
            3.64161943162664,
            5.55e-17,
            1e300,
            std::f64::consts::PI,
        ] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_num(0.25), "2.5000000000000000e-1");
    }

    #[test]
    fn report_rendering() {
        let mut r = Report::default();
        r.text("k_star", 6);
        r.num("e", 0.5);
        assert_eq!(r.render(), "k_star = 6\ne = 5.0000000000000000e-1\n");
        assert_eq!(r.get("k_star"), Some("6"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(
            CliError::Core(nfb_core::Error::Parse {
                line: 1,
                reason: "x".into()
            })
            .exit_code(),
            2
        );
        assert_eq!(
            CliError::Core(nfb_core::Error::Inapplicable("x".into())).exit_code(),
            3
        );
        let io = CliError::Io {
            path: "x".into(),
            source: io::Error::other("x"),
        };
        assert_eq!(io.exit_code(), 4);
    }
}
