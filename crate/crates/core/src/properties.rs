use crate::bench::{
    convergence_curves, reference_quotes, search_min_domain, search_min_n, strike_batch,
    OptionQuote,
};
use crate::models::{
    check_avg_measure, evaluate_cf, AvgParams, BatesParams, BsmParams, CharacteristicFunction,
    MarketParams, ModelParams,
};
use crate::pricers::{
    self, classify_call, price_attari, price_carr_madan, price_cos, price_dpd, price_dpd_vec,
    price_fft, price_fft_sa, put_from_parity, CarrMadanConfig, EngineConfig, FftConfig, Method,
    PricingRequest,
};
use crate::reference::{bsm_closed_form, dual_method_reference, norm_cdf, Partner};
use crate::transforms::{fft, naive_dft, trapezoid, FourierGrid};
use crate::{presets, Complex64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn market() -> impl Strategy<Value = MarketParams> {
    (10.0..200.0f64, -0.02..0.1f64).prop_map(|(s0, r)| MarketParams { s0, r })
}

fn bsm() -> impl Strategy<Value = ModelParams> {
    (0.05..0.8f64).prop_map(|sigma| ModelParams::Bsm(BsmParams { sigma }))
}

fn bates() -> impl Strategy<Value = ModelParams> {
    (
        (0.005..0.2f64, 0.005..0.2f64, 0.5..5.0f64, 0.1..1.0f64),
        (-0.95..0.5f64, 0.0..1.0f64, -0.3..0.2f64, 0.01..0.4f64),
    )
        .prop_map(|((v0, v_bar, a, eta), (rho, lambda, mu_j, nu_j))| {
            ModelParams::Bates(BatesParams {
                v0,
                v_bar,
                a,
                eta,
                rho,
                lambda,
                mu_j,
                nu_j,
            })
        })
}

/// Parameter sets that define a risk-neutral measure.
fn avg() -> impl Strategy<Value = ModelParams> {
    (0.05..0.5f64, 0.1..0.5f64, -0.4..0.3f64)
        .prop_filter("measure must exist", |&(sigma, nu, theta)| {
            check_avg_measure(&AvgParams { sigma, nu, theta })
                .map(|m| m.measure_ok)
                .unwrap_or(false)
        })
        .prop_map(|(sigma, nu, theta)| ModelParams::Avg(AvgParams { sigma, nu, theta }))
}

fn any_model() -> impl Strategy<Value = ModelParams> {
    prop_oneof![bsm(), bates(), avg()]
}

// ---------------------------------------------------------------- models

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cf_is_one_at_origin(model in any_model(), m in market(), t in 0.05..3.0f64) {
        let v = evaluate_cf(&model, &m, t, c(0.0, 0.0)).unwrap();
        prop_assert!((v - c(1.0, 0.0)).norm() < 1e-14, "{v}");
    }

    #[test]
    fn cf_martingale(model in any_model(), m in market(), t in 0.05..3.0f64) {
        let v = evaluate_cf(&model, &m, t, c(0.0, -1.0)).unwrap();
        let forward = m.s0 * (m.r * t).exp();
        prop_assert!((v.re - forward).abs() <= 1e-10 * forward, "{} vs {forward}", v.re);
        prop_assert!(v.im.abs() <= 1e-10 * forward);
    }

    #[test]
    fn cf_hermitian_and_bounded(model in any_model(), m in market(), t in 0.05..3.0f64, w in 0.0..500.0f64) {
        let cf = CharacteristicFunction::new(&model, &m, t).unwrap();
        let plus = cf.eval(c(w, 0.0));
        let minus = cf.eval(c(-w, 0.0));
        prop_assert!((plus - minus.conj()).norm() < 1e-12);
        prop_assert!(plus.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn bsm_cf_is_gaussian(sigma in 0.05..0.8f64, m in market(), t in 0.05..3.0f64, w in -50.0..50.0f64) {
        let model = ModelParams::Bsm(BsmParams { sigma });
        let v = evaluate_cf(&model, &m, t, c(w, 0.0)).unwrap();
        let mean = m.s0.ln() + (m.r - 0.5 * sigma * sigma) * t;
        let var = sigma * sigma * t;
        let expected = (c(0.0, w * mean) - 0.5 * var * w * w).exp();
        prop_assert!((v - expected).norm() < 1e-12);
    }

    /// The jump component multiplies the diffusion part, with the jump
    /// compensator carried in the drift.
    #[test]
    fn bates_factorises(model in bates(), m in market(), t in 0.05..3.0f64, w in 0.0..80.0f64) {
        let ModelParams::Bates(p) = model else { unreachable!() };
        let z = c(w, 0.0);
        let iw = c(0.0, w);
        let full = CharacteristicFunction::new(&model, &m, t).unwrap().log_increment(z);
        let no_jumps = ModelParams::Bates(BatesParams { lambda: 0.0, ..p });
        let diffusion = CharacteristicFunction::new(&no_jumps, &m, t).unwrap().log_increment(z);
        let jump_mean = (1.0 + p.mu_j).ln() - 0.5 * p.nu_j * p.nu_j;
        let jumps = p.lambda * t * ((iw * jump_mean - 0.5 * p.nu_j * p.nu_j * w * w).exp() - 1.0)
            - iw * p.lambda * p.mu_j * t;
        prop_assert!((full - (diffusion + jumps)).norm() < 1e-10, "{full} vs {}", diffusion + jumps);

        // no variance at all leaves the jump part plus the drift
        let jumps_only = ModelParams::Bates(BatesParams { v0: 0.0, v_bar: 0.0, ..p });
        let j = CharacteristicFunction::new(&jumps_only, &m, t).unwrap().log_increment(z);
        prop_assert!((j - (iw * m.r * t + jumps)).norm() < 1e-10);
    }
}

// ------------------------------------------------------------ transforms

fn signal(max_log2: u32) -> impl Strategy<Value = Vec<Complex64>> {
    (0..=max_log2).prop_flat_map(|b| {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), 1usize << b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_matches_dft(x in signal(10)) {
        let fast = fft(&x).unwrap();
        let slow = naive_dft(&x);
        let scale = (x.len() as f64).sqrt();
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).norm() < 1e-12 * scale.max(1.0) * 10.0);
        }
    }

    #[test]
    fn fft_is_linear((x, y) in (4u32..=9).prop_flat_map(|b| {
        let v = prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b)), 1usize << b);
        (v.clone(), v)
    }), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let mix: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| p * a + q * b).collect();
        let lhs = fft(&mix).unwrap();
        let (fx, fy) = (fft(&x).unwrap(), fft(&y).unwrap());
        for ((l, p), q) in lhs.iter().zip(&fx).zip(&fy) {
            prop_assert!((l - (p * a + q * b)).norm() < 1e-11);
        }
    }

    #[test]
    fn fft_parseval(x in signal(12)) {
        let time: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let freq: f64 = fft(&x).unwrap().iter().map(|z| z.norm_sqr()).sum::<f64>() / x.len() as f64;
        prop_assert!((time - freq).abs() <= 1e-12 * time.max(1.0) * 10.0);
    }

    #[test]
    fn trapezoid_exact_on_affine(a in -5.0..5.0f64, b in -5.0..5.0f64, w in 0.1..100.0f64, n in 2usize..500) {
        let grid = FourierGrid::new(w, n).unwrap();
        let got = trapezoid(|x| a * x + b, &grid).unwrap();
        let exact = 0.5 * a * w * w + b * w;
        prop_assert!((got - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }
}

#[test]
fn trapezoid_is_second_order() {
    let exact = std::f64::consts::E - 1.0;
    let err = |n| (trapezoid(f64::exp, &FourierGrid::new(1.0, n).unwrap()).unwrap() - exact).abs();
    for n in [8, 16, 32, 64, 128] {
        let ratio = err(n) / err(2 * n);
        assert!((ratio - 4.0).abs() < 0.05, "n={n}: ratio {ratio}");
    }
}

#[test]
fn fft_rejects_bad_lengths() {
    assert!(fft(&[c(1.0, 0.0); 3]).is_err());
    assert!(fft(&[]).is_err());
}

// --------------------------------------------------------------- pricers

fn bsm_put(m: &MarketParams, sigma: f64, k: f64, t: f64) -> f64 {
    let sd = sigma * t.sqrt();
    let d1 = ((m.s0 / k).ln() + (m.r + 0.5 * sigma * sigma) * t) / sd;
    k * m.discount(t) * norm_cdf(-(d1 - sd)) - m.s0 * norm_cdf(-d1)
}

fn sorted_strikes(s0: f64, moneyness: &[f64]) -> Vec<f64> {
    let mut k: Vec<f64> = moneyness.iter().map(|x| x * s0).collect();
    k.sort_by(f64::total_cmp);
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bsm_parity_against_put_formula(sigma in 0.1..0.6f64, m in market(), t in 0.1..2.0f64, x in 0.6..1.4f64) {
        let model = ModelParams::Bsm(BsmParams { sigma });
        let k = x * m.s0;
        let req = PricingRequest::new(t, vec![k]).unwrap();
        let calls = price_cos(&model, &m, &req, 12.0, 1024).unwrap();
        let puts = put_from_parity(&calls, &m);
        let expected = bsm_put(&m, sigma, k, t);
        prop_assert!((puts.values[0] - expected).abs() < 1e-9 * m.s0, "{} vs {expected}", puts.values[0]);
    }

    #[test]
    fn calls_are_monotone_and_bounded(
        model in any_model(),
        m in market(),
        t in 0.25..2.0f64,
        x in prop::collection::vec(0.6..1.4f64, 2..8),
    ) {
        let strikes = sorted_strikes(m.s0, &x);
        let req = PricingRequest::new(t, strikes.clone()).unwrap();
        // AVG densities have power tails at short maturity
        let grid = match model {
            ModelParams::Avg(_) => FourierGrid::new(2e4, 1 << 18),
            _ => FourierGrid::new(2000.0, 1 << 16),
        }
        .unwrap();
        let pv = price_attari(&model, &m, &req, &grid).unwrap();
        for (i, (&k, &v)) in strikes.iter().zip(&pv.values).enumerate() {
            prop_assert!(classify_call(v, &m, k, t).is_feasible(), "k={k} c={v}");
            if i > 0 {
                prop_assert!(v <= pv.values[i - 1] + 1e-9, "not decreasing at k={k}");
            }
        }
        let puts = put_from_parity(&pv, &m);
        for (i, (&k, &p)) in strikes.iter().zip(&puts.values).enumerate() {
            let disc = k * m.discount(t);
            prop_assert!(p >= (disc - m.s0).max(0.0) - 1e-9 && p <= disc + 1e-9);
            if i > 0 {
                prop_assert!(p >= puts.values[i - 1] - 1e-9, "put not increasing at k={k}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cf_evaluation_counts(
        model in prop_oneof![bsm(), bates()],
        n in 2usize..300,
        log2 in 2u32..10,
        x in prop::collection::vec(0.6..1.4f64, 1..6),
    ) {
        let m = MarketParams { s0: 100.0, r: 0.03 };
        let mut strikes = sorted_strikes(m.s0, &x);
        strikes.dedup();
        let big_m = strikes.len() as u64;
        let req = PricingRequest::new(0.5, strikes).unwrap();
        let grid = FourierGrid::new(100.0, n).unwrap();
        let n64 = n as u64;
        prop_assert_eq!(price_dpd(&model, &m, &req, &grid).unwrap().cf_evaluations, 3 * n64 * big_m);
        prop_assert_eq!(price_dpd_vec(&model, &m, &req, &grid).unwrap().cf_evaluations, 3 * n64);
        prop_assert_eq!(price_attari(&model, &m, &req, &grid).unwrap().cf_evaluations, n64);
        let cm = CarrMadanConfig::new(1.75).unwrap();
        prop_assert_eq!(price_carr_madan(&model, &m, &req, &grid, &cm).unwrap().cf_evaluations, n64 + 1);
        prop_assert_eq!(price_cos(&model, &m, &req, 12.0, n).unwrap().cf_evaluations, n64);
        let fcfg = FftConfig::new(1.75, 1.0, 1 << log2).unwrap();
        let fft_count = price_fft_sa(&model, &m, &req, &fcfg).unwrap().cf_evaluations;
        prop_assert_eq!(fft_count, (1u64 << log2) + 1);
    }

    #[test]
    fn dpd_forms_agree(model in any_model(), m in market(), t in 0.1..2.0f64, x in prop::collection::vec(0.6..1.4f64, 1..6)) {
        let req = PricingRequest::new(t, sorted_strikes(m.s0, &x)).unwrap();
        let grid = FourierGrid::new(200.0, 2000).unwrap();
        let a = price_dpd(&model, &m, &req, &grid).unwrap();
        let b = price_dpd_vec(&model, &m, &req, &grid).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            prop_assert!((p - q).abs() < 1e-13 * m.s0.max(1.0), "{p} vs {q}");
        }
        prop_assert_eq!(a.pi1, b.pi1);
    }

    /// With every strike on a node, the FFT is the direct trapezoid sum.
    #[test]
    fn strike_adjusted_fft_is_direct_carr_madan(
        model in prop_oneof![bsm(), bates()],
        m in market(),
        t in 0.1..2.0f64,
        log2 in 8u32..12,
        x in prop::collection::vec(0.6..1.4f64, 1..6),
    ) {
        let n = 1usize << log2;
        let cfg = FftConfig::from_domain(1.75, 200.0, n).unwrap();
        let req = PricingRequest::new(t, sorted_strikes(m.s0, &x)).unwrap();
        let sa = price_fft_sa(&model, &m, &req, &cfg).unwrap();
        let direct = price_carr_madan(&model, &m, &req, &cfg.grid(), &CarrMadanConfig::new(1.75).unwrap()).unwrap();
        prop_assert!(sa.interpolated.iter().all(|f| !f));
        for (p, q) in sa.values.iter().zip(&direct.values) {
            prop_assert!((p - q).abs() < 1e-12 * m.s0.max(1.0), "{p} vs {q}");
        }
    }

    #[test]
    fn fft_on_grid_needs_no_interpolation(model in prop_oneof![bsm(), bates()], j in 0i64..64, log2 in 8u32..11) {
        let m = MarketParams { s0: 100.0, r: 0.03 };
        let n = 1usize << log2;
        let cfg = FftConfig::from_domain(1.75, 200.0, n).unwrap();
        let k = (m.s0.ln() + (j - 32) as f64 * cfg.strike_step()).exp();
        let req = PricingRequest::new(1.0, vec![k]).unwrap();
        let on = price_fft(&model, &m, &req, &cfg).unwrap();
        prop_assert!(!on.interpolated[0]);
        let direct = price_carr_madan(&model, &m, &req, &cfg.grid(), &CarrMadanConfig::new(1.75).unwrap()).unwrap();
        prop_assert!((on.values[0] - direct.values[0]).abs() < 1e-12 * m.s0);
    }
}

/// All seven engines on the grids the BSM and Bates figures use; the FFT
/// only at the at-the-money node.
#[test]
fn engines_agree_on_reference_grids() {
    for (s, w, w_dpd, l, n) in [
        (presets::bsm(), 100.0, 100.0, 13.0, 1 << 10),
        (presets::bates(), 500.0, 649.0, 30.0, 1 << 12),
    ] {
        for &t in &s.tenors {
            let req = PricingRequest::new(t, s.strikes.clone()).unwrap();
            let atm = PricingRequest::new(t, vec![s.market.s0]).unwrap();
            let anchor = pricers::price(&s.model, &s.market, &req, &EngineConfig::new(Method::AtOpt, w, n)).unwrap();
            for cfg in [
                EngineConfig::new(Method::Dpd, w_dpd, n),
                EngineConfig::new(Method::DpdOpt, w_dpd, n),
                EngineConfig::new(Method::CmOpt, w, n),
                EngineConfig::new(Method::CosOpt, l, n),
                EngineConfig::new(Method::FftSa, w, n),
            ] {
                let pv = pricers::price(&s.model, &s.market, &req, &cfg).unwrap();
                for (p, q) in pv.values.iter().zip(&anchor.values) {
                    assert!((p - q).abs() < 1e-9, "{} {} t={t}: {p} vs {q}", s.name, cfg.method);
                }
            }
            let fft = pricers::price(&s.model, &s.market, &atm, &EngineConfig::new(Method::Fft, w, n)).unwrap();
            let i = s.strikes.iter().position(|&k| k == s.market.s0).unwrap();
            assert!(!fft.interpolated[0]);
            assert!((fft.values[0] - anchor.values[i]).abs() < 1e-9, "{} fft t={t}", s.name);
        }
    }
}

#[test]
fn attari_stays_feasible_where_others_blow_up() {
    let s = presets::avg_table3();
    let grid = FourierGrid::new(1.2e6, 1 << 20).unwrap();
    let mut by_tenor = Vec::new();
    for &t in &[0.1, 1.0] {
        let req = PricingRequest::new(t, vec![60.0, 90.0, 140.0]).unwrap();
        let pv = price_attari(&s.model, &s.market, &req, &grid).unwrap();
        assert!(pv.values.iter().all(|&v| v > 0.0 && v < s.market.s0), "t={t}: {:?}", pv.values);
        assert!(pv.values.windows(2).all(|p| p[1] < p[0]), "t={t}: {:?}", pv.values);
        by_tenor.push(pv.values);
    }
    for (short, long) in by_tenor[0].iter().zip(&by_tenor[1]) {
        assert!(long > short);
    }
}

#[test]
fn avg_carr_madan_rejects_alpha_above_limit() {
    let s = presets::avg_test3();
    let req = PricingRequest::new(1.0, vec![90.0]).unwrap();
    let cfg = EngineConfig::new(Method::CmOpt, 500.0, 1024).with_alpha(1.75);
    let err = pricers::price(&s.model, &s.market, &req, &cfg).unwrap_err();
    assert!(err.to_string().contains("alpha_max"), "{err}");
}

// ------------------------------------------------------------- reference

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dual_oracle_recovers_black_scholes(sigma in 0.1..0.6f64, t in 0.1..2.0f64, x in 0.6..1.4f64) {
        let m = MarketParams { s0: 50.0, r: 0.05 };
        let model = ModelParams::Bsm(BsmParams { sigma });
        let k = x * m.s0;
        let q = dual_method_reference(&model, &m, k, t, 2000.0, 1 << 17, Partner::CarrMadan { alpha: 1.75 }).unwrap();
        let exact = bsm_closed_form(&m, sigma, k, t).value;
        prop_assert!((q.value - exact).abs() < 1e-10, "{} vs {exact}", q.value);
        prop_assert!(q.agreement < 1e-10);
    }
}

#[test]
fn references_are_deterministic() {
    let s = presets::bates();
    let a = reference_quotes(&s.model, &s.market, &[80.0, 100.0], &[0.5], None).unwrap();
    let b = reference_quotes(&s.model, &s.market, &[80.0, 100.0], &[0.5], None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn reference_cache_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("refs.jsonl");
    let s = presets::bsm();
    let mut cache = crate::reference::ReferenceCache::open(&path).unwrap();
    let first = reference_quotes(&s.model, &s.market, &s.strikes, &[1.0], Some(&mut cache)).unwrap();
    let mut reopened = crate::reference::ReferenceCache::open(&path).unwrap();
    let again = reference_quotes(&s.model, &s.market, &s.strikes, &[1.0], Some(&mut reopened)).unwrap();
    assert_eq!(first, again);
}

// ----------------------------------------------------------------- bench

fn bsm_quotes() -> (ModelParams, MarketParams, Vec<OptionQuote>) {
    let s = presets::bsm();
    let quotes = reference_quotes(&s.model, &s.market, &s.strikes, &s.tenors, None).unwrap();
    (s.model, s.market, quotes)
}

#[test]
fn curves_settle_monotonically() {
    let (model, market, quotes) = bsm_quotes();
    for cfg in [
        EngineConfig::new(Method::DpdOpt, 100.0, 0),
        EngineConfig::new(Method::AtOpt, 100.0, 0),
        EngineConfig::new(Method::CmOpt, 100.0, 0),
        EngineConfig::new(Method::CosOpt, 13.0, 0),
    ] {
        let report = convergence_curves(&model, &market, &quotes, &cfg, 4..=14, 1e-10).unwrap();
        let curve = report.max_curve();
        let tail = &curve[curve.len() - 4..];
        for pair in tail.windows(2) {
            // once converged the error sits on the rounding floor
            assert!(pair[1].1 <= pair[0].1.max(1e-12), "{}: {:?}", cfg.method, tail);
        }
    }
}

#[test]
fn min_domain_shrinks_with_looser_tolerance() {
    let (model, market, quotes) = bsm_quotes();
    let cfg = EngineConfig::new(Method::AtOpt, 0.0, 0);
    let tight = search_min_domain(&model, &market, &quotes, &cfg, 1e-10, 1 << 14).unwrap();
    let loose = search_min_domain(&model, &market, &quotes, &cfg, 1e-6, 1 << 14).unwrap();
    assert!(loose <= tight, "{loose} > {tight}");
}

#[test]
fn searches_are_deterministic() {
    let (model, market, quotes) = bsm_quotes();
    let cfg = EngineConfig::new(Method::CosOpt, 13.0, 0);
    let a = search_min_n(&model, &market, &quotes, &cfg, 1e-8).unwrap();
    let b = search_min_n(&model, &market, &quotes, &cfg, 1e-8).unwrap();
    assert_eq!(a, b);
    assert_eq!(strike_batch(&market, 100, 7), strike_batch(&market, 100, 7));
}
