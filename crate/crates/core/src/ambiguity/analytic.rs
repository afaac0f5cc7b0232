use std::f64::consts::PI;

use super::fresnel::fresnel;
use super::{overlap_window, OverlapWindow};
use crate::error::invalid;
use crate::waveform::{ChirpMode, ChirpPlan, ResourceGrid, WaveformConfig};
use crate::{Complex64, Result};

/// sin(x)/x.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// ∫_{t1}^{t2} e^{j2πκt} dt over an overlap window = 2T_d·sinc(2πκT_d)·e^{j2πκT_a}.
fn tone_integral(kappa: f64, w: &OverlapWindow) -> Complex64 {
    Complex64::from_polar(
        2.0 * w.t_d * sinc(2.0 * PI * kappa * w.t_d),
        2.0 * PI * kappa * w.t_a,
    )
}

/// ∫_{t1}^{t2} e^{j(πβt² + kt)} dt via Fresnel integrals.
///
/// Completing the square, w = √(2|β|)·(t + k/(2πβ)) gives
/// e^{−jk²/(4πβ)}/√(2|β|)·[ΔC ± jΔS], the sign following β. β = 0 falls
/// back to the tone integral.
pub fn chirp_integral(beta: f64, k: f64, t1: f64, t2: f64) -> Complex64 {
    if beta == 0.0 {
        let kappa = k / (2.0 * PI);
        let w = OverlapWindow {
            t_d: 0.5 * (t2 - t1),
            t_a: 0.5 * (t1 + t2),
            empty: false,
        };
        return tone_integral(kappa, &w);
    }
    let a = (2.0 * beta.abs()).sqrt();
    let shift = k / (2.0 * PI * beta);
    let (c1, s1) = fresnel(a * (t1 + shift));
    let (c2, s2) = fresnel(a * (t2 + shift));
    let sign = beta.signum();
    let bracket = Complex64::new(c2 - c1, sign * (s2 - s1));
    Complex64::from_polar(1.0 / a, -k * k / (4.0 * PI * beta)) * bracket
}

/// Chirp piece on one symbol: amp·C·e^{jπβt² + j2πνt}, |C| = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
struct ChirpTerm {
    c: Complex64,
    amp: f64,
    nu: f64,
}

impl ChirpTerm {
    fn scaled(&self) -> Complex64 {
        self.c * self.amp
    }
}

/// Continuous-time model of a frame: per-symbol OFDM coefficients on
/// subcarriers nΔf in absolute time, and per-symbol chirp terms sharing one
/// rate β. Sampling it at t = l·T_s reproduces the discrete generators.
#[derive(Debug, Clone)]
pub struct ContinuousModel {
    n: usize,
    m: usize,
    t_o: f64,
    df: f64,
    beta: f64,
    /// A_m(n) = X_m(n)/√N·e^{−j2πnΔf(mT_o + T_CP)}.
    a: Vec<Complex64>,
    /// q_m(n) applied per resource element under chirp multiplication.
    q: Vec<f64>,
    chirp: Vec<Option<ChirpTerm>>,
    full_cover: bool,
}

impl ContinuousModel {
    pub fn new(cfg: &WaveformConfig, plan: &ChirpPlan, grid: &ResourceGrid) -> Result<Self> {
        plan.check_dims(cfg)?;
        if grid.n_symbols() != cfg.n_symbols() || grid.n_subcarriers() != cfg.n_subcarriers() {
            return Err(invalid("grid dimensions differ from the configuration"));
        }
        if plan.mode() == ChirpMode::Hybrid {
            return Err(invalid(
                "closed forms need a single chirp rate; hybrid plans mix two",
            ));
        }
        let (n, m) = (cfg.n_subcarriers(), cfg.n_symbols());
        let t_o = cfg.symbol_duration_s();
        let t_cp = cfg.cp_duration_s();
        let df = cfg.subcarrier_spacing_hz();
        let scale = 1.0 / (n as f64).sqrt();
        let mut a = Vec::with_capacity(n * m);
        for mm in 0..m {
            let t_start = mm as f64 * t_o + t_cp;
            for (k, x) in grid.symbol(mm).iter().enumerate() {
                a.push(x * scale * Complex64::from_polar(1.0, -2.0 * PI * k as f64 * df * t_start));
            }
        }
        let q = (0..m)
            .flat_map(|mm| (0..n).map(move |k| (mm, k)))
            .map(|(mm, k)| plan.amplitude(mm, k))
            .collect();
        let ts = cfg.sample_period_s();
        let segments = plan.segments(cfg);
        let beta = segments.first().map_or(0.0, |s| s.rate_hz_per_s);
        let mut chirp = vec![None; m];
        for seg in &segments {
            let t_ref = seg.reference_sample as f64 * ts;
            let f0 = seg.start_frequency_hz;
            for mm in seg.symbols.clone() {
                chirp[mm] = Some(ChirpTerm {
                    c: Complex64::from_polar(
                        1.0,
                        PI * beta * t_ref * t_ref - 2.0 * PI * f0 * t_ref,
                    ),
                    amp: plan.symbol_amplitude(mm),
                    nu: f0 - beta * t_ref,
                });
            }
        }
        Ok(Self {
            n,
            m,
            t_o,
            df,
            beta,
            a,
            q,
            chirp,
            full_cover: plan.covers_everything(cfg),
        })
    }

    pub fn symbol_duration_s(&self) -> f64 {
        self.t_o
    }

    pub fn duration_s(&self) -> f64 {
        self.m as f64 * self.t_o
    }

    pub fn rate_hz_per_s(&self) -> f64 {
        self.beta
    }

    fn symbol_at(&self, t: f64) -> Option<usize> {
        if t < 0.0 {
            return None;
        }
        let m = (t / self.t_o).floor() as usize;
        (m < self.m).then_some(m)
    }

    fn a_row(&self, m: usize) -> &[Complex64] {
        &self.a[m * self.n..(m + 1) * self.n]
    }

    fn ofdm_row_at(&self, row: impl Iterator<Item = Complex64>, t: f64) -> Complex64 {
        row.enumerate()
            .map(|(k, a)| a * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * self.df * t))
            .sum()
    }

    /// Unit-amplitude chirp of one symbol.
    fn chirp_phasor(&self, term: &ChirpTerm, t: f64) -> Complex64 {
        term.c * Complex64::from_polar(1.0, PI * self.beta * t * t + 2.0 * PI * term.nu * t)
    }

    /// OFDM component s(t).
    pub fn ofdm_at(&self, t: f64) -> Complex64 {
        match self.symbol_at(t) {
            Some(m) => self.ofdm_row_at(self.a_row(m).iter().copied(), t),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Chirp component c(t).
    pub fn chirp_at(&self, t: f64) -> Complex64 {
        match self.symbol_at(t).and_then(|m| self.chirp[m].as_ref()) {
            Some(term) => self.chirp_phasor(term, t) * term.amp,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// (1−α)·s(t) + α·c(t).
    pub fn aac_at(&self, alpha: f64, t: f64) -> Complex64 {
        self.ofdm_at(t) * (1.0 - alpha) + self.chirp_at(t) * alpha
    }

    /// Chirp-multiplied OFDM k(t) (full coverage only).
    pub fn cm_at(&self, t: f64) -> Result<Complex64> {
        self.require_full_cover()?;
        Ok(match self.symbol_at(t) {
            Some(m) => {
                let term = self.chirp[m].as_ref().expect("full cover");
                let row = self
                    .a_row(m)
                    .iter()
                    .zip(&self.q[m * self.n..(m + 1) * self.n])
                    .map(|(a, q)| a * q);
                self.ofdm_row_at(row, t) * self.chirp_phasor(term, t)
            }
            None => Complex64::new(0.0, 0.0),
        })
    }

    fn require_full_cover(&self) -> Result<()> {
        if self.full_cover {
            Ok(())
        } else {
            Err(invalid(
                "closed-form CM ambiguity needs the chirp on every resource element",
            ))
        }
    }

    fn windows(&self, tau: f64) -> impl Iterator<Item = (usize, usize, OverlapWindow)> + '_ {
        (0..self.m).flat_map(move |m| {
            (0..self.m).filter_map(move |mp| {
                let w = overlap_window(m as i64, mp as i64, tau, self.t_o);
                (!w.empty).then_some((m, mp, w))
            })
        })
    }

    /// I₄ = ∫ s(t)s*(t−τ)e^{j2πft} dt.
    pub fn ofdm_term(&self, tau: f64, f: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, mp, w) in self.windows(tau) {
            acc += self.pair_sum(self.a_row(m), self.a_row(mp), tau, f, 0.0, &w);
        }
        acc
    }

    /// Σ_{n,n'} x(n)y*(n')e^{j2πn'Δfτ}·∫e^{j2π((n−n')Δf + f + extra)t}.
    fn pair_sum(
        &self,
        x: &[Complex64],
        y: &[Complex64],
        tau: f64,
        f: f64,
        extra: f64,
        w: &OverlapWindow,
    ) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (np, yv) in y.iter().enumerate() {
            if yv.norm_sqr() == 0.0 {
                continue;
            }
            let ph = Complex64::from_polar(1.0, 2.0 * PI * np as f64 * self.df * tau);
            let mut inner = Complex64::new(0.0, 0.0);
            for (n, xv) in x.iter().enumerate() {
                if xv.norm_sqr() == 0.0 {
                    continue;
                }
                let kappa = (n as f64 - np as f64) * self.df + f + extra;
                inner += xv * tone_integral(kappa, w);
            }
            acc += inner * yv.conj() * ph;
        }
        acc
    }

    /// I₁ = ∫ c(t)c*(t−τ)e^{j2πft} dt.
    pub fn chirp_term(&self, tau: f64, f: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, mp, w) in self.windows(tau) {
            let (Some(c1), Some(c2)) = (self.chirp[m], self.chirp[mp]) else {
                continue;
            };
            let kappa = f + self.beta * tau + c1.nu - c2.nu;
            let ph =
                Complex64::from_polar(1.0, -PI * self.beta * tau * tau + 2.0 * PI * c2.nu * tau);
            acc += c1.scaled() * c2.scaled().conj() * ph * tone_integral(kappa, &w);
        }
        acc
    }

    /// I₂ = ∫ s(t)c*(t−τ)e^{j2πft} dt.
    pub fn ofdm_chirp_term(&self, tau: f64, f: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, mp, w) in self.windows(tau) {
            let Some(c2) = self.chirp[mp] else { continue };
            let (t1, t2) = (w.t_a - w.t_d - tau, w.t_a + w.t_d - tau);
            for (n, a) in self.a_row(m).iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let fn_ = n as f64 * self.df + f;
                let ph = Complex64::from_polar(1.0, 2.0 * PI * fn_ * tau);
                acc += a
                    * c2.scaled().conj()
                    * ph
                    * chirp_integral(-self.beta, 2.0 * PI * (fn_ - c2.nu), t1, t2);
            }
        }
        acc
    }

    /// I₃ = ∫ c(t)s*(t−τ)e^{j2πft} dt.
    pub fn chirp_ofdm_term(&self, tau: f64, f: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, mp, w) in self.windows(tau) {
            let Some(c1) = self.chirp[m] else { continue };
            let (t1, t2) = (w.t_a - w.t_d, w.t_a + w.t_d);
            for (np, a) in self.a_row(mp).iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let fnp = np as f64 * self.df;
                let ph = Complex64::from_polar(1.0, 2.0 * PI * fnp * tau);
                acc += c1.scaled()
                    * a.conj()
                    * ph
                    * chirp_integral(self.beta, 2.0 * PI * (f + c1.nu - fnp), t1, t2);
            }
        }
        acc
    }

    /// χ = (1−α)²I₄ + α(1−α)(I₂ + I₃) + α²I₁.
    pub fn aac(&self, alpha: f64, tau: f64, f: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if alpha < 1.0 {
            acc += self.ofdm_term(tau, f) * (1.0 - alpha).powi(2);
        }
        if alpha > 0.0 && alpha < 1.0 {
            acc += (self.ofdm_chirp_term(tau, f) + self.chirp_ofdm_term(tau, f))
                * (alpha * (1.0 - alpha));
        }
        if alpha > 0.0 {
            acc += self.chirp_term(tau, f) * alpha * alpha;
        }
        acc
    }

    /// Closed-form CM ambiguity: with B = A·q,
    /// Σ B_m(n)B*_m'(n')·C_mC*_m'·e^{j2πn'Δfτ}e^{−jπβτ²}e^{j2πν_m'τ}·∫e^{j2πκt},
    /// κ = (n−n')Δf + f + βτ + ν_m − ν_m'.
    pub fn cm(&self, tau: f64, f: f64) -> Result<Complex64> {
        self.require_full_cover()?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, mp, w) in self.windows(tau) {
            let (c1, c2) = (
                self.chirp[m].expect("full cover"),
                self.chirp[mp].expect("full cover"),
            );
            let b = |mm: usize| -> Vec<Complex64> {
                self.a_row(mm)
                    .iter()
                    .zip(&self.q[mm * self.n..(mm + 1) * self.n])
                    .map(|(a, q)| a * q)
                    .collect()
            };
            let (x, y) = (b(m), b(mp));
            let cc = c1.c * c2.c.conj();
            let ph =
                Complex64::from_polar(1.0, -PI * self.beta * tau * tau + 2.0 * PI * c2.nu * tau);
            acc += cc * ph * self.pair_sum(&x, &y, tau, f, self.beta * tau + c1.nu - c2.nu, &w);
        }
        Ok(acc)
    }
}

/// Closed-form AAC ambiguity χ(τ, f_d) of the frame built from `grid`.
pub fn aac_ambiguity_analytic(
    cfg: &WaveformConfig,
    plan: &ChirpPlan,
    grid: &ResourceGrid,
    alpha: f64,
    tau: f64,
    f_d: f64,
) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(ContinuousModel::new(cfg, plan, grid)?.aac(alpha, tau, f_d))
}

/// Closed-form CM ambiguity χ(τ, f_d) of the frame built from `grid`.
pub fn cm_ambiguity_analytic(
    cfg: &WaveformConfig,
    plan: &ChirpPlan,
    grid: &ResourceGrid,
    tau: f64,
    f_d: f64,
) -> Result<Complex64> {
    ContinuousModel::new(cfg, plan, grid)?.cm(tau, f_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::waveform::{build_frame, Scheme};

    fn midpoint(g: impl Fn(f64) -> Complex64, a: f64, b: f64, steps: usize) -> Complex64 {
        let h = (b - a) / steps as f64;
        (0..steps)
            .map(|i| g(a + (i as f64 + 0.5) * h))
            .sum::<Complex64>()
            * h
    }

    #[test]
    fn chirp_integral_matches_quadrature() {
        for &(beta, k, t1, t2) in &[
            (3.0, 1.0, -0.5, 1.2),
            (-2.0, 4.0, 0.1, 0.9),
            (0.0, 2.5, -1.0, 1.0),
            (1e3, -50.0, 0.0, 0.05),
        ] {
            let exact = chirp_integral(beta, k, t1, t2);
            let num = midpoint(
                |t| Complex64::from_polar(1.0, PI * beta * t * t + k * t),
                t1,
                t2,
                200_000,
            );
            assert!((exact - num).norm() < 1e-8 * (t2 - t1), "β={beta} k={k}");
        }
    }

    #[test]
    fn sampled_model_reproduces_discrete_frames() {
        let cfg = WaveformConfig::nr_fr2(32, 2).unwrap();
        let g = ResourceGrid::random_qpsk(2, 32, &mut stream(61, 0));
        for mode in [ChirpMode::PerSymbol, ChirpMode::PerSlot] {
            let plan = ChirpPlan::full(&cfg, mode).unwrap();
            let model = ContinuousModel::new(&cfg, &plan, &g).unwrap();
            let aac = build_frame(&g, &plan, &cfg, Scheme::Aac).unwrap();
            let cm = build_frame(&g, &plan, &cfg, Scheme::Cm).unwrap();
            for l in 0..cfg.frame_len() {
                let t = l as f64 * cfg.sample_period_s();
                assert!((model.aac_at(cfg.alpha(), t) - aac.samples[l]).norm() < 1e-9);
                assert!((model.cm_at(t).unwrap() - cm.samples[l]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn tone_terms_at_zero_beta_reduce_to_ofdm_form() {
        let cfg = WaveformConfig::nr_fr2(8, 1).unwrap();
        let g = ResourceGrid::random_qpsk(1, 8, &mut stream(62, 0));
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
        let mut model = ContinuousModel::new(&cfg, &plan, &g).unwrap();
        model.beta = 0.0;
        for c in model.chirp.iter_mut() {
            *c = Some(ChirpTerm {
                c: Complex64::new(1.0, 0.0),
                amp: 1.0,
                nu: 0.0,
            });
        }
        for &(tau, f) in &[(0.0, 0.0), (1e-7, 3e4), (-2e-6, -1e5)] {
            assert!((model.cm(tau, f).unwrap() - model.ofdm_term(tau, f)).norm() < 1e-15);
        }
    }

    #[test]
    fn chirp_term_at_origin_is_energy() {
        let cfg = WaveformConfig::nr_fr2(32, 1).unwrap();
        let g = ResourceGrid::random_qpsk(1, 32, &mut stream(63, 0));
        let plan = ChirpPlan::full(&cfg, ChirpMode::PerSymbol).unwrap();
        let model = ContinuousModel::new(&cfg, &plan, &g).unwrap();
        let e = model.chirp_term(0.0, 0.0);
        assert!((e.re - cfg.symbol_duration_s()).abs() < 1e-18 && e.im.abs() < 1e-18);
    }
}
