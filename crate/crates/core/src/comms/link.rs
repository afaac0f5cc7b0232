use rand::Rng;

use super::{
    dechirp, ebn0_to_snr_db, ofdm_demodulate, viterbi_decode_with_erasures, CodecConfig, Csi,
    LinkResult,
};
use crate::channel::{apply_channel, ChannelRealization, PathTap};
use crate::error::invalid;
use crate::rng::stream;
use crate::waveform::{
    build_frame, qpsk_demap, qpsk_map, ChirpPlan, Comb, ResourceGrid, Scheme, TimeSignal,
    WaveformConfig,
};
use crate::Result;

/// One-slot coded link: info bits → K=7 code → QPSK on the data REs →
/// scheme frame → channel → dechirp → equalize → hard Viterbi.
#[derive(Debug, Clone)]
pub struct Link {
    cfg: WaveformConfig,
    scheme: Scheme,
    plan: ChirpPlan,
    layout: ResourceGrid,
}

impl Link {
    /// `pilots` reserves comb resource elements for known pilots.
    pub fn new(
        cfg: &WaveformConfig,
        scheme: Scheme,
        plan: ChirpPlan,
        pilots: Option<&Comb>,
    ) -> Result<Self> {
        plan.check_dims(cfg)?;
        let (m, n) = (cfg.n_symbols(), cfg.n_subcarriers());
        let layout = match pilots {
            Some(comb) => ResourceGrid::with_comb_pilots(m, n, comb, &mut stream(0, 0)),
            None => ResourceGrid::random_qpsk(m, n, &mut stream(0, 0)),
        };
        let link = Self {
            cfg: cfg.clone(),
            scheme,
            plan,
            layout,
        };
        if CodecConfig.info_len(link.coded_bits()).unwrap_or(0) == 0 {
            return Err(invalid(
                "frame has too few data resource elements for the tail-terminated code",
            ));
        }
        Ok(link)
    }

    pub fn config(&self) -> &WaveformConfig {
        &self.cfg
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    fn coded_bits(&self) -> usize {
        self.layout.data_count() * self.cfg.modulation().bits_per_symbol()
    }

    /// Payload bits per frame.
    pub fn info_bits(&self) -> usize {
        CodecConfig
            .info_len(self.coded_bits())
            .expect("checked in new")
    }

    /// Share of resource elements carrying data.
    pub fn data_fraction(&self) -> f64 {
        self.layout.data_count() as f64 / (self.cfg.n_symbols() * self.cfg.n_subcarriers()) as f64
    }

    pub fn snr_db(&self, ebn0_db: f64) -> f64 {
        ebn0_to_snr_db(
            ebn0_db,
            self.cfg.modulation().bits_per_symbol(),
            CodecConfig.rate(),
            self.data_fraction(),
        )
    }

    pub fn transmit(&self, info: &[u8]) -> Result<TimeSignal> {
        if info.len() != self.info_bits() {
            return Err(invalid(format!(
                "frame carries {} info bits, got {}",
                self.info_bits(),
                info.len()
            )));
        }
        let coded = super::conv_encode(info);
        let mut grid = self.layout.clone();
        grid.fill_data(&qpsk_map(&coded)?)?;
        build_frame(&grid, &self.plan, &self.cfg, self.scheme)
    }

    pub fn receive(&self, rx: &TimeSignal, csi: &Csi) -> Result<Vec<u8>> {
        let d = dechirp(
            rx,
            &self.plan,
            &self.cfg,
            self.scheme,
            self.cfg.alpha(),
            csi,
        )?;
        let gains = d.residual_csi.frequency_response(self.cfg.n_subcarriers());
        let demod = ofdm_demodulate(&d.signal, &self.cfg, &gains)?;
        let (values, erased) = demod.select(self.layout.data_mask());
        let bits = qpsk_demap(&values);
        let bit_erasures: Vec<bool> = erased.iter().flat_map(|&e| [e, e]).collect();
        viterbi_decode_with_erasures(&bits, Some(&bit_erasures))
    }

    /// One frame with random payload from `bits_rng` through `taps` with
    /// genie CSI; noise from `noise_seed` at the SNR implied by `ebn0_db`
    /// (`None` = noiseless).
    pub fn run_frame<R: Rng + ?Sized>(
        &self,
        bits_rng: &mut R,
        taps: Vec<PathTap>,
        ebn0_db: Option<f64>,
        noise_seed: u64,
    ) -> Result<LinkResult> {
        let info: Vec<u8> = (0..self.info_bits())
            .map(|_| bits_rng.random_range(0..2u8))
            .collect();
        let tx = self.transmit(&info)?;
        let ch = ChannelRealization {
            taps: taps.clone(),
            snr_db: ebn0_db.map(|e| self.snr_db(e)),
            seed: noise_seed,
            cfo_hz: 0.0,
            timing_drift_s: 0.0,
        };
        let rx = apply_channel(&tx, &ch, &self.cfg)?;
        let decoded = self.receive(&rx, &Csi::from_taps(taps))?;
        let errors = decoded.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        Ok(LinkResult::frame(
            info.len() as u64,
            errors,
            ebn0_db.unwrap_or(f64::INFINITY),
        ))
    }
}
