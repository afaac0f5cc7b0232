use isac_core::channel::ChannelRealization;
use isac_core::comms::{spectral_efficiency, CodecConfig, Link, LinkResult};
use isac_core::rng::{stream, stream_id};
use serde::Serialize;

use super::{noise_seed, plan_for, series, Runner, BITS, CHANNEL};
use crate::config::{Placement, Profile, Resolved, Variant};
use crate::error::Result;
use crate::output::CsvTable;

/// Link statistics of one scheme at one E_b/N_0.
#[derive(Debug, Clone)]
pub struct LinkPoint {
    pub placement: Placement,
    pub scheme: Variant,
    pub alpha: f64,
    pub ebn0_db: f64,
    pub snr_db: f64,
    pub data_fraction: f64,
    pub result: LinkResult,
    pub se_bits_per_s_per_hz: f64,
}

/// `trials` frames per (scheme, E_b/N_0). Frame t carries the same payload
/// and channel taps for every scheme and operating point.
pub fn link_points(r: &Resolved, runner: &Runner) -> Result<Vec<LinkPoint>> {
    let cfg = r.waveform();
    let ch = r.channel();
    let combos = series(r);
    let links = combos
        .iter()
        .map(|&(p, v, alpha)| {
            let c = cfg.with_alpha(alpha)?;
            let plan = plan_for(&c, p)?;
            Ok(Link::new(
                &c,
                v.scheme(),
                plan,
                v.has_pilots().then(|| r.pilots()),
            )?)
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = &r.ebn0_grid_db;
    let trials = r.trials();

    let frames: Vec<LinkResult> = runner.map(combos.len() * grid.len() * trials, |job| {
        let t = job % trials;
        let ebn0 = grid[(job / trials) % grid.len()];
        let link = &links[job / (trials * grid.len())];
        let taps = match ch.profile {
            Profile::Taps => ch.taps.clone().expect("validated"),
            _ => ChannelRealization::reference_multipath(&mut stream(
                r.seed,
                stream_id(&[CHANNEL, t as u64]),
            )),
        };
        let mut bits = stream(r.seed, stream_id(&[BITS, t as u64]));
        Ok(link.run_frame(&mut bits, taps, Some(ebn0), noise_seed(r.seed, ebn0, t))?)
    })?;

    let mut out = Vec::new();
    for (ci, &(placement, scheme, alpha)) in combos.iter().enumerate() {
        for (ei, &ebn0_db) in grid.iter().enumerate() {
            let start = (ci * grid.len() + ei) * trials;
            let result = frames[start..start + trials]
                .iter()
                .skip(1)
                .fold(frames[start], |acc, f| acc.merge(f));
            let link = &links[ci];
            let fraction = link.data_fraction();
            let bps = link.config().modulation().bits_per_symbol();
            let se = spectral_efficiency(&result, fraction, bps, CodecConfig.rate())?;
            out.push(LinkPoint {
                placement,
                scheme,
                alpha,
                ebn0_db,
                snr_db: link.snr_db(ebn0_db),
                data_fraction: fraction,
                result: LinkResult {
                    se_bits_per_s_per_hz: se,
                    ..result
                },
                se_bits_per_s_per_hz: se,
            });
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct BerRow {
    scheme: &'static str,
    alpha: f64,
    placement: &'static str,
    ebn0_db: f64,
    snr_db: f64,
    frames: u64,
    bits: u64,
    bit_errors: u64,
    ber: f64,
}

#[derive(Serialize)]
struct SeRow {
    scheme: &'static str,
    alpha: f64,
    placement: &'static str,
    ebn0_db: f64,
    frames: u64,
    frame_errors: u64,
    data_fraction: f64,
    se_bits_per_s_per_hz: f64,
}

pub(super) fn ber_tables(r: &Resolved, runner: &Runner) -> Result<Vec<CsvTable>> {
    let rows: Vec<BerRow> = link_points(r, runner)?
        .iter()
        .map(|p| BerRow {
            scheme: p.scheme.label(),
            alpha: p.alpha,
            placement: p.placement.label(),
            ebn0_db: p.ebn0_db,
            snr_db: p.snr_db,
            frames: p.result.frames,
            bits: p.result.bits_tx,
            bit_errors: p.result.bit_errors,
            ber: p.result.ber,
        })
        .collect();
    let header = [
        "scheme",
        "alpha",
        "placement",
        "ebn0_db",
        "snr_db",
        "frames",
        "bits",
        "bit_errors",
        "ber",
    ];
    Ok(vec![CsvTable::from_rows("ber.csv", &header, &rows)?])
}

pub(super) fn se_tables(r: &Resolved, runner: &Runner) -> Result<Vec<CsvTable>> {
    let rows: Vec<SeRow> = link_points(r, runner)?
        .iter()
        .map(|p| SeRow {
            scheme: p.scheme.label(),
            alpha: p.alpha,
            placement: p.placement.label(),
            ebn0_db: p.ebn0_db,
            frames: p.result.frames,
            frame_errors: p.result.frame_errors,
            data_fraction: p.data_fraction,
            se_bits_per_s_per_hz: p.se_bits_per_s_per_hz,
        })
        .collect();
    let header = [
        "scheme",
        "alpha",
        "placement",
        "ebn0_db",
        "frames",
        "frame_errors",
        "data_fraction",
        "se_bits_per_s_per_hz",
    ];
    Ok(vec![CsvTable::from_rows(
        "spectral_efficiency.csv",
        &header,
        &rows,
    )?])
}
