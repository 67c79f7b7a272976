use nfb_core::feedback_exponent::effective_snr;
use nfb_core::scheme_sim::final_errors_without_aliasing;
use nfb_core::{
    estimate_error_prob, run_coupled_trial, run_trial, run_trial_pair, ChannelParams, CodebookKind,
    LatticeKind, Rate, SchemeConfig, SchemeSpec,
};
use statrs::distribution::{ContinuousCDF, Normal};

fn spec(params: ChannelParams, rounds: usize, looseness: f64, rate: f64) -> SchemeSpec {
    SchemeSpec {
        params,
        rounds,
        looseness,
        lattice: LatticeKind::Integer,
        dimension: 1,
        rate: Rate::new(rate).unwrap(),
        codebook: CodebookKind::Pam,
        master_seed: 2024,
    }
}

fn fig_params() -> ChannelParams {
    ChannelParams::from_db(20.0, 30.0).unwrap()
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

#[test]
fn aggregates_do_not_depend_on_worker_count() {
    let cfg = SchemeConfig::new(&spec(fig_params(), 3, 3.0, 0.5)).unwrap();
    let trials = 3 * nfb_core::scheme_sim::TRIAL_CHUNK + 17;
    let one = pool(1).install(|| estimate_error_prob(&cfg, trials).unwrap());
    let four = pool(4).install(|| estimate_error_prob(&cfg, trials).unwrap());
    let seven = pool(7).install(|| estimate_error_prob(&cfg, trials).unwrap());
    assert_eq!(one, four);
    assert_eq!(one, seven);
    assert_eq!(one.real.ff_energy.to_bits(), seven.real.ff_energy.to_bits());
}

#[test]
fn records_depend_only_on_seed_and_index() {
    let cfg = SchemeConfig::new(&spec(fig_params(), 4, 3.0, 0.5)).unwrap();
    let records: Vec<_> = pool(3).install(|| {
        use rayon::prelude::*;
        (0..500u64)
            .into_par_iter()
            .map(|t| run_trial(&cfg, t))
            .collect()
    });
    for (t, r) in records.iter().enumerate() {
        assert_eq!(*r, run_trial(&cfg, t as u64));
    }
    let mut other = spec(fig_params(), 4, 3.0, 0.5);
    other.master_seed = 2025;
    let cfg2 = SchemeConfig::new(&other).unwrap();
    assert_ne!(run_trial(&cfg2, 0), records[0]);
}

#[test]
fn lemma1_union_indicator_matches_every_trial() {
    let cfg = SchemeConfig::new(&spec(fig_params(), 3, 3.0, 0.5)).unwrap();
    let mut aliased = 0;
    for t in 0..20_000 {
        let (real, coupled) = run_trial_pair(&cfg, t);
        assert!(real.coupled_agreement, "trial {t}");
        for (a, b) in real.schemes.iter().zip(&coupled.schemes) {
            assert_eq!(a.any_event(), b.any_event(), "trial {t}");
            aliased += a.any_aliasing() as u32;
            // Paths coincide up to and including the first aliasing round.
            let upto = a.first_aliasing_round().unwrap_or(cfg.rounds());
            for k in 0..upto {
                assert!((a.estimation_errors[k] - b.estimation_errors[k]).abs() < 1e-9);
            }
        }
        assert_eq!(coupled, run_coupled_trial(&cfg, t));
    }
    assert!(aliased > 50, "expected aliasing at L = 3, saw {aliased}");
}

#[test]
fn noiseless_feedback_with_wide_cell_matches_coupled_everywhere() {
    let params = fig_params().without_feedback_noise();
    let cfg = SchemeConfig::new(&spec(params, 4, 60.0, 0.5)).unwrap();
    for t in 0..5_000 {
        let (real, coupled) = run_trial_pair(&cfg, t);
        for (a, b) in real.schemes.iter().zip(&coupled.schemes) {
            assert!(!a.any_aliasing());
            for (x, y) in a.estimation_errors.iter().zip(&b.estimation_errors) {
                assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
            }
        }
    }
}

#[test]
fn noiseless_everything_gives_zero_estimates() {
    let params = fig_params()
        .without_feedback_noise()
        .without_feedforward_noise();
    let cfg = SchemeConfig::new(&spec(params, 3, 5.0, 1.5)).unwrap();
    let est = estimate_error_prob(&cfg, 5_000).unwrap();
    assert_eq!(est.real.block_errors, 0);
    assert_eq!(est.coupled.block_errors, 0);
    assert_eq!(est.real.any_aliasing, [0, 0]);
    assert_eq!(est.lemma1_agreement, est.trials);
    assert_eq!(est.real.p_e().wilson95().0, 0.0);
}

#[test]
fn conditional_final_variance_follows_recursion() {
    let params = fig_params();
    let cfg = SchemeConfig::new(&spec(params, 3, 9.0, 0.5)).unwrap();
    let est = estimate_error_prob(&cfg, 50_000).unwrap();
    let (v, se) = est.final_variance().unwrap();
    let target = params.p / effective_snr(&params, 9.0, 3).unwrap().linear();
    assert!((target - cfg.final_variance()).abs() < 1e-12 * target);
    assert!((v - target).abs() < 3.0 * se, "{v} vs {target} (se {se})");
}

#[test]
fn noiseless_feedback_gain_is_one_plus_snr_per_round() {
    let params = fig_params().without_feedback_noise();
    let k = 3;
    let cfg = SchemeConfig::new(&spec(params, k, 9.0, 0.5)).unwrap();
    let est = estimate_error_prob(&cfg, 50_000).unwrap();
    let (v, se) = est.final_variance().unwrap();
    let snr = params.snr();
    let sk = snr * (1.0 + snr).powi(k as i32 - 1);
    let target = params.p / sk;
    assert!((v - target).abs() < 3.0 * se, "{v} vs {target} (se {se})");
}

// Anderson–Darling statistic against a fully specified normal law.
fn anderson_darling(samples: &mut [f64], sd: f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let dist = Normal::new(0.0, sd).unwrap();
    let mut s = 0.0;
    for i in 0..n {
        let lo = dist.cdf(samples[i]).max(1e-300);
        let hi = dist.sf(samples[n - 1 - i]).max(1e-300);
        s += (2 * i + 1) as f64 * (lo.ln() + hi.ln());
    }
    -(n as f64) - s / n as f64
}

#[test]
fn conditional_final_error_is_gaussian() {
    let cfg = SchemeConfig::new(&spec(fig_params(), 3, 9.0, 0.5)).unwrap();
    let mut errs = final_errors_without_aliasing(&cfg, 20_000);
    assert!(errs.len() > 39_990);
    let a2 = anderson_darling(&mut errs, cfg.final_variance().sqrt());
    // 1% critical value of A² for a fully specified null.
    assert!(a2 < 3.857, "A² = {a2}");
}

#[test]
fn power_accounting() {
    let params = fig_params();
    let cfg = SchemeConfig::new(&spec(params, 4, 3.0, 0.5)).unwrap();
    let est = estimate_error_prob(&cfg, 20_000).unwrap();
    assert!(
        est.real.ff_power() <= params.p * 1.01,
        "ff {}",
        est.real.ff_power()
    );
    assert!((est.real.ff_power() / params.p - 1.0).abs() < 0.02);
    assert!(
        (est.real.fb_power() / params.p_tilde - 1.0).abs() < 0.01,
        "fb {}",
        est.real.fb_power()
    );
    // Without the modulo the feedback input carries γ·Θ̂ and the constraint fails.
    assert!(est.coupled.fb_power() > 1.5 * params.p_tilde);
}

#[test]
fn pam_single_round_matches_closed_form() {
    let params = fig_params();
    let cfg = SchemeConfig::new(&spec(params, 1, 1.0, 3.0)).unwrap();
    let m = cfg.codebook().size();
    assert_eq!(m, 8);
    let est = estimate_error_prob(&cfg, 200_000).unwrap();
    let d = cfg.codebook().pam_spacing().unwrap();
    let q = 0.5
        * statrs::function::erf::erfc(d / 2.0 / params.sigma2.sqrt() / std::f64::consts::SQRT_2);
    let oracle = 2.0 * (1.0 - 1.0 / m as f64) * q;
    let count = est.real.decode_errors[0] + est.real.decode_errors[1];
    let n = 2.0 * est.trials as f64;
    let p = count as f64 / n;
    let sd = (oracle * (1.0 - oracle) / n).sqrt();
    assert!((p - oracle).abs() < 3.0 * sd, "{p} vs {oracle}");
    assert_eq!(est.real.any_aliasing, [0, 0]);
}

#[test]
fn union_bound_and_flat_aliasing_profile() {
    let cfg = SchemeConfig::new(&spec(fig_params(), 4, 3.0, 1.0)).unwrap();
    let est = estimate_error_prob(&cfg, 60_000).unwrap();
    assert!(est.union_bound_holds());
    assert!(est.real.p_e().estimate() <= est.coupled.union_sum());
    for scheme in 0..2 {
        for k in 1..cfg.rounds() - 1 {
            let (a_lo, a_hi) = est.coupled.p_mod(scheme, k).wilson95();
            let (b_lo, b_hi) = est.coupled.p_mod(scheme, k + 1).wilson95();
            assert!(
                a_lo <= b_hi && b_lo <= a_hi,
                "scheme {scheme} rounds {k},{}",
                k + 1
            );
        }
    }
    // Scalar lattice: P(|N(0, P̃/L)| > √(3P̃)) = 2Q(√(3L)).
    let q = 0.5 * statrs::function::erf::erfc((9.0f64).sqrt() / std::f64::consts::SQRT_2);
    let (lo, hi) = est.coupled.p_mod(0, 1).wilson95();
    assert!(lo <= 2.0 * q && 2.0 * q <= hi, "{lo} {hi} vs {}", 2.0 * q);
}

#[test]
fn higher_dimensional_lattices_run() {
    for (kind, n) in [(LatticeKind::D4, 4), (LatticeKind::E8, 8)] {
        let mut s = spec(fig_params(), 2, 6.0, 0.5);
        s.lattice = kind;
        s.dimension = n;
        s.codebook = CodebookKind::Gaussian;
        let cfg = SchemeConfig::new(&s).unwrap();
        let est = estimate_error_prob(&cfg, 4_000).unwrap();
        assert_eq!(est.lemma1_agreement, est.trials);
        assert!((est.real.fb_power() / cfg.params().p_tilde - 1.0).abs() < 0.03);
    }
}
