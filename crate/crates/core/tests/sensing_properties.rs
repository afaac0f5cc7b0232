use isac_core::channel::{apply_channel, ChannelRealization, PathTap};
use isac_core::rng::{stream, stream_id};
use isac_core::sensing::{
    chirp_symbol_template, matched_filter, rmse_aggregate, sense_slot, sense_symbols,
    slot_template, ReceiverOptions, Template,
};
use isac_core::waveform::{
    build_frame, compose_cm, generate_chirp, ofdm_modulate, ChirpMode, ChirpPlan, ResourceGrid,
    Scheme, TimeSignal, WaveformConfig,
};
use isac_core::{Complex64, SPEED_OF_LIGHT};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, Normal};

fn chirp_setup(n: usize, m: usize) -> (WaveformConfig, ChirpPlan, TimeSignal) {
    let cfg = WaveformConfig::nr_fr2(n, m)
        .unwrap()
        .with_alpha(1.0)
        .unwrap();
    let plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
    let tx = generate_chirp(&plan, &cfg).unwrap();
    (cfg, plan, tx)
}

fn through(
    tx: &TimeSignal,
    cfg: &WaveformConfig,
    tap: PathTap,
    cfo_hz: f64,
    drift_s: f64,
) -> TimeSignal {
    let ch = ChannelRealization {
        cfo_hz,
        timing_drift_s: drift_s,
        ..ChannelRealization::noiseless(vec![tap])
    };
    apply_channel(tx, &ch, cfg).unwrap()
}

/// One isolated symbol: every lag of the N-bin profile is a pure delay.
#[test]
fn chirp_recovers_every_integer_delay() {
    let (cfg, plan, tx) = chirp_setup(256, 1);
    let t = chirp_symbol_template(&plan, &cfg).unwrap();
    for d in 0..256 {
        let rx = through(&tx, &cfg, PathTap::new(0.0, d as f64, 0.0, 0.0), 0.0, 0.0);
        let est = sense_symbols(&rx, &t, &cfg, &ReceiverOptions::default()).unwrap();
        assert_eq!(est.peak_bin, d);
        assert!(
            (est.range_m - SPEED_OF_LIGHT * d as f64 / (2.0 * cfg.sample_rate_hz())).abs() < 1e-9
        );
    }
}

/// Back-to-back symbols: beyond the CP part of each window comes from the
/// previous symbol and reads as a shift of d − CP, so the true lag wins
/// only while that part is the smaller one.
#[test]
fn chirp_train_recovers_delays_up_to_half_a_symbol_past_the_cp() {
    let (cfg, plan, tx) = chirp_setup(256, 4);
    let t = chirp_symbol_template(&plan, &cfg).unwrap();
    let cp = cfg.cp_samples();
    for d in 0..cp + 128 {
        let rx = through(&tx, &cfg, PathTap::new(0.0, d as f64, 0.0, 0.0), 0.0, 0.0);
        assert_eq!(
            sense_symbols(&rx, &t, &cfg, &ReceiverOptions::default())
                .unwrap()
                .peak_bin,
            d
        );
    }
    let rx = through(
        &tx,
        &cfg,
        PathTap::new(0.0, (cp + 140) as f64, 0.0, 0.0),
        0.0,
        0.0,
    );
    assert_eq!(
        sense_symbols(&rx, &t, &cfg, &ReceiverOptions::default())
            .unwrap()
            .peak_bin,
        140
    );
}

#[test]
fn data_template_recovers_delays_inside_the_cp() {
    let cfg = WaveformConfig::nr_fr2(256, 4).unwrap();
    let grid = ResourceGrid::random_qpsk(4, 256, &mut stream(8, 0));
    let tx = ofdm_modulate(&grid, &cfg).unwrap();
    let t = Template::PerSymbol(
        (0..4)
            .map(|m| Some(tx.samples[cfg.useful_range(m)].to_vec()))
            .collect(),
    );
    for d in 0..=cfg.cp_samples() {
        let rx = through(&tx, &cfg, PathTap::new(0.0, d as f64, 0.0, 0.0), 0.0, 0.0);
        assert_eq!(
            sense_symbols(&rx, &t, &cfg, &ReceiverOptions::default())
                .unwrap()
                .peak_bin,
            d
        );
    }
}

#[test]
fn fft_correlation_matches_direct_sum() {
    let cfg = WaveformConfig::nr_fr2(64, 1).unwrap();
    let mut r = stream(4, 0);
    let mut draw = |len: usize| -> Vec<Complex64> {
        (0..len)
            .map(|_| Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
            .collect()
    };
    let rx = TimeSignal::new(draw(cfg.symbol_len()), cfg.sample_rate_hz());
    let tpl = draw(64);
    let p = &matched_filter(&rx, &Template::Shared(tpl.clone()), &cfg).unwrap()[0];
    let w = &rx.samples[cfg.useful_range(0)];
    let direct: Vec<Complex64> = (0..64)
        .map(|k| (0..64).map(|l| w[l] * tpl[(l + 64 - k) % 64].conj()).sum())
        .collect();
    let scale = direct.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for (a, b) in p.correlation.iter().zip(&direct) {
        assert!((a - b).norm() <= 1e-9 * scale);
    }
}

#[test]
fn timing_drift_biases_range_by_one_bin() {
    let (cfg, plan, tx) = chirp_setup(1024, 14);
    let t = chirp_symbol_template(&plan, &cfg).unwrap();
    let tap = PathTap::new(0.0, 41.0, 0.0, 0.0);
    let clean = sense_symbols(
        &through(&tx, &cfg, tap, 0.0, 0.0),
        &t,
        &cfg,
        &ReceiverOptions::default(),
    )
    .unwrap();
    let drifted = sense_symbols(
        &through(&tx, &cfg, tap, 0.0, 33.33e-9),
        &t,
        &cfg,
        &ReceiverOptions::default(),
    )
    .unwrap();
    let bias = drifted.range_m - clean.range_m;
    assert!((bias - 5.0).abs() <= 1.3, "{bias}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cfo_biases_velocity_by_half_wavelength(eps in -3000.0f64..3000.0) {
        let (cfg, plan, tx) = chirp_setup(256, 14);
        let t = chirp_symbol_template(&plan, &cfg).unwrap();
        let rx = through(&tx, &cfg, PathTap::new(0.0, 12.0, 0.0, 0.0), eps, 0.0);
        let est = sense_symbols(&rx, &t, &cfg, &ReceiverOptions::default()).unwrap();
        let step = cfg.wavelength_m() / (2.0 * cfg.n_symbols() as f64 * cfg.symbol_duration_s());
        prop_assert!((est.velocity_mps - cfg.wavelength_m() / 2.0 * eps).abs() <= step);
    }
}

#[test]
fn gaussian_errors_give_their_sigma() {
    let normal = Normal::new(0.0, 2.0).unwrap();
    let mut r = stream(12, 0);
    let pairs: Vec<(f64, f64)> = (0..10_000)
        .map(|_| (10.0 + normal.sample(&mut r), 10.0))
        .collect();
    let rmse = rmse_aggregate(&pairs).unwrap();
    assert!((rmse - 2.0).abs() <= 0.1, "{rmse}");
}

#[test]
fn cm_peak_drops_with_the_wrong_data() {
    let cfg = WaveformConfig::nr_fr2(256, 1).unwrap();
    let plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
    let peak = |rx: &TimeSignal, reference: &TimeSignal| -> f64 {
        let t = Template::Shared(reference.samples[cfg.useful_range(0)].to_vec());
        matched_filter(rx, &t, &cfg).unwrap()[0]
            .magnitudes()
            .into_iter()
            .fold(0.0, f64::max)
    };
    for trial in 0..100 {
        let truth = ResourceGrid::random_qpsk(1, 256, &mut stream(30, 2 * trial));
        let other = ResourceGrid::random_qpsk(1, 256, &mut stream(30, 2 * trial + 1));
        let tx = compose_cm(&truth, &plan, &cfg).unwrap();
        let rx = through(&tx, &cfg, PathTap::new(0.0, 7.0, 0.0, 0.0), 0.0, 0.0);
        assert!(peak(&rx, &compose_cm(&other, &plan, &cfg).unwrap()) <= peak(&rx, &tx));
    }
}

/// Static target: with no Doppler to couple into the slot-long chirp, slot
/// processing is at least as accurate as symbol processing.
#[test]
fn slot_is_no_worse_than_symbol_for_a_static_target() {
    let cfg = WaveformConfig::nr_fr2(1024, 14)
        .unwrap()
        .with_alpha(0.5)
        .unwrap();
    let tap = ChannelRealization::point_target(50.0, 0.0, &cfg);
    let opts = ReceiverOptions::default();
    let sym_plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
    let slot_plan = ChirpPlan::full(&cfg, ChirpMode::PerSlot).unwrap();
    let sym_t = chirp_symbol_template(&sym_plan, &cfg).unwrap();
    let slot_t = slot_template(&generate_chirp(&slot_plan, &cfg).unwrap());
    for snr in [-20.0, -15.0, -10.0, -5.0, 0.0] {
        let (mut sym, mut slot) = (Vec::new(), Vec::new());
        for trial in 0..40u64 {
            let grid = ResourceGrid::random_qpsk(14, 1024, &mut stream(21, trial));
            let ch = ChannelRealization {
                snr_db: Some(snr),
                seed: stream_id(&[21, trial, f64::to_bits(snr)]),
                ..ChannelRealization::noiseless(vec![tap])
            };
            let rx = apply_channel(
                &build_frame(&grid, &sym_plan, &cfg, Scheme::Aac).unwrap(),
                &ch,
                &cfg,
            )
            .unwrap();
            sym.push((
                sense_symbols(&rx, &sym_t, &cfg, &opts).unwrap().range_m,
                50.0,
            ));
            let rx = apply_channel(
                &build_frame(&grid, &slot_plan, &cfg, Scheme::Aac).unwrap(),
                &ch,
                &cfg,
            )
            .unwrap();
            slot.push((sense_slot(&rx, &slot_t, &cfg, &opts).unwrap().range_m, 50.0));
        }
        let (a, b) = (
            rmse_aggregate(&slot).unwrap(),
            rmse_aggregate(&sym).unwrap(),
        );
        assert!(a <= b + 1e-12, "snr {snr}: slot {a} symbol {b}");
    }
}
