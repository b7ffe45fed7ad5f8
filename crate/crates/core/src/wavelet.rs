//! Scalogram preprocessing for the binary classifier.
//!
//! A 16 ms window becomes a 3×400×64 stack:
//!
//! 1. [`band_filter`]: three overlapping 5 MHz sub-bands (−5..0, −2.5..2.5,
//!    0..+5 MHz) selected by rectangular DFT masks, each inverse-transformed
//!    to 80000 samples at an effective 5 MS/s;
//! 2. [`cwt`]: complex-Morlet continuous wavelet transform over 64
//!    log-spaced scales, evaluated at every sample lag by per-scale
//!    frequency-domain correlation with the wavelet support truncated at
//!    ±4σ·s and zero-padded boundaries;
//! 3. [`compress_scalogram`]: magnitude, then max over 200-lag blocks,
//!    giving 400 compressed lags per scale.
//!
//! [`WaveletEngine`] precomputes the per-scale kernel spectra once and
//! reuses them across captures; scales are processed independently (and in
//! parallel for full windows).

use num_complex::{Complex32, Complex64};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::types::{IQCapture, WINDOW_SAMPLES};

/// Sub-band sample count (and CWT lag count).
pub const SUB_SAMPLES: usize = WINDOW_SAMPLES / 2;
/// Number of sub-bands.
pub const NUM_BANDS: usize = 3;
/// Number of CWT scales.
pub const NUM_SCALES: usize = 64;
/// Lags folded into one compressed lag.
pub const LAG_COMPRESS: usize = 200;
/// Compressed lags per scale.
pub const COMPRESSED_LAGS: usize = SUB_SAMPLES / LAG_COMPRESS;

/// Mother-wavelet definition: a complex exponential under a Gaussian
/// envelope, `Ψ(t) = (1/(σ√2π))·exp(−t²/2σ²)·exp(j2πf₀t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MorletSpec {
    /// Carrier frequency, Hz.
    pub f0_hz: f64,
    /// Time-domain standard deviation, seconds.
    pub sigma_s: f64,
    /// Dilation factors, strictly increasing.
    pub scales: Vec<f64>,
}

impl MorletSpec {
    /// The standard configuration: f₀ = 10 MHz, σ chosen so the wavelet's
    /// two-sided half-power bandwidth at scale 1 is 1.5 MHz
    /// (σ_f = 0.75 MHz/√(2 ln 2), σ = 1/(2π σ_f)), and 64 scales
    /// log-uniform over [0.5, 64].
    pub fn standard() -> Self {
        let sigma_f = 0.75e6 / (2.0 * std::f64::consts::LN_2).sqrt();
        let sigma_s = 1.0 / (2.0 * std::f64::consts::PI * sigma_f);
        let (lo, hi) = (0.5f64.log10(), 64.0f64.log10());
        let scales = (0..NUM_SCALES)
            .map(|j| 10f64.powf(lo + (hi - lo) * j as f64 / (NUM_SCALES - 1) as f64))
            .collect();
        MorletSpec { f0_hz: 10.0e6, sigma_s, scales }
    }

    /// Ψ evaluated at `t` seconds.
    pub fn psi(&self, t: f64) -> Complex64 {
        let amp = (-(t * t) / (2.0 * self.sigma_s * self.sigma_s)).exp()
            / (self.sigma_s * (2.0 * std::f64::consts::PI).sqrt());
        let ph = 2.0 * std::f64::consts::PI * self.f0_hz * t;
        Complex64::new(amp * ph.cos(), amp * ph.sin())
    }
}

/// The complex CWT of one sub-band signal: `n_lags × n_scales`, row-major
/// over lags.
#[derive(Debug, Clone)]
pub struct CwtMatrix {
    pub values: Vec<Complex32>,
    pub n_lags: usize,
    pub n_scales: usize,
}

impl CwtMatrix {
    pub fn at(&self, lag: usize, scale: usize) -> Complex32 {
        self.values[lag * self.n_scales + scale]
    }
}

/// The 3×400×64 compressed scalogram stack, row-major
/// (band × compressed lag × scale).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalogramTensor {
    pub values: Vec<f32>,
}

impl ScalogramTensor {
    /// An all-zero stack (useful as a fixture).
    pub fn zeros() -> Self {
        ScalogramTensor { values: vec![0.0; NUM_BANDS * COMPRESSED_LAGS * NUM_SCALES] }
    }

    pub fn at(&self, band: usize, lag: usize, scale: usize) -> f32 {
        self.values[(band * COMPRESSED_LAGS + lag) * NUM_SCALES + scale]
    }

    /// Largest entry of one band's slice.
    pub fn band_max(&self, band: usize) -> f32 {
        let base = band * COMPRESSED_LAGS * NUM_SCALES;
        self.values[base..base + COMPRESSED_LAGS * NUM_SCALES]
            .iter()
            .fold(f32::NEG_INFINITY, |m, &v| m.max(v))
    }
}

// ─── sub-band filtering ──────────────────────────────────────────────────────

/// Split a window into the three overlapping 5 MHz sub-bands, each
/// returned as 80000 samples at 5 MS/s, centered on its own band.
///
/// Mask convention: each sub-band covers the half-open interval
/// `(low, high]` of DFT bin frequencies, so a bin at an interior boundary
/// (0 MHz for sub-bands 1/3, ±2.5 MHz for sub-band 2) belongs to the lower
/// window. The Nyquist bin acts as +5 MHz and closes sub-band 3; sub-bands
/// 1 and 3 therefore tile all 160000 bins exactly.
pub fn band_filter(s: &IQCapture) -> Result<(IQCapture, IQCapture, IQCapture)> {
    if s.samples.len() != WINDOW_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "band filter input needs {} samples, got {}",
            WINDOW_SAMPLES,
            s.samples.len()
        )));
    }
    let n = WINDOW_SAMPLES;
    let m = SUB_SAMPLES;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(m);

    let mut spectrum: Vec<Complex64> =
        s.samples.iter().map(|v| Complex64::new(v.re as f64, v.im as f64)).collect();
    fwd.process(&mut spectrum);

    let fs = s.sample_rate_hz;
    // Bin frequency with the Nyquist bin read as +fs/2 so the (low, high]
    // masks close at the top of the band.
    let freq = |k: usize| -> f64 {
        if k == n / 2 {
            fs / 2.0
        } else if k < n / 2 {
            k as f64 * fs / n as f64
        } else {
            (k as f64 - n as f64) * fs / n as f64
        }
    };

    let sub_band = |center: f64| -> IQCapture {
        let (lo, hi) = (center - fs / 4.0, center + fs / 4.0);
        let mut sub = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            let f = freq(k);
            if f > lo && f <= hi {
                // Place the bin at its frequency relative to the sub-band
                // center: f' = f − center ∈ (−1.25, 2.5] MHz ... wrapped
                // into the length-m spectrum.
                let fp = f - center;
                let kp = (fp * m as f64 / (fs / 2.0)).round() as i64;
                let kp = kp.rem_euclid(m as i64) as usize;
                sub[kp] = spectrum[k];
            }
        }
        inv.process(&mut sub);
        let scale = 1.0 / n as f64;
        IQCapture {
            samples: sub.iter().map(|v| Complex32::new((v.re * scale) as f32, (v.im * scale) as f32)).collect(),
            sample_rate_hz: fs / 2.0,
            center_freq_hz: center,
        }
    };

    Ok((sub_band(-2.5e6), sub_band(0.0), sub_band(2.5e6)))
}

// ─── continuous wavelet transform ────────────────────────────────────────────

/// Smallest highly-composite length (2^k, 3·2^k, or 5·2^k) ≥ `needed`;
/// keeps the correlation FFTs fast without doubling the work at awkward
/// sizes (80641 → 81920 rather than 131072).
fn good_fft_len(needed: usize) -> usize {
    let mut best = needed.next_power_of_two();
    for base in [3usize, 5] {
        let mut n = base;
        while n < needed {
            n *= 2;
        }
        best = best.min(n);
    }
    best
}

/// Precomputed FFT plans and per-scale kernel spectra for signals of one
/// length. Read-only after construction; shared freely across threads.
pub struct WaveletEngine {
    spec: MorletSpec,
    signal_len: usize,
    fft_len: usize,
    dt_s: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Conjugated kernel spectra, one per scale, each `fft_len` long:
    /// multiplying a signal spectrum by one and inverse-transforming yields
    /// the CWT column for that scale.
    kernel_spectra: Vec<Vec<Complex64>>,
    /// Kernel half-width in samples, per scale (for reference/tests).
    half_widths: Vec<usize>,
}

impl WaveletEngine {
    /// Build an engine for signals of `signal_len` samples at `dt_s`
    /// seconds per sample.
    pub fn new(spec: MorletSpec, signal_len: usize, dt_s: f64) -> Result<Self> {
        if signal_len == 0 {
            return Err(Error::InvalidArgument("empty CWT input".into()));
        }
        if spec.scales.is_empty() || spec.sigma_s <= 0.0 {
            return Err(Error::InvalidArgument("Morlet spec needs scales and positive sigma".into()));
        }
        if spec.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("scales must be strictly increasing".into()));
        }
        let max_scale = *spec.scales.last().unwrap();
        let max_half = ((4.0 * spec.sigma_s * max_scale / dt_s).ceil() as usize).max(1);
        let fft_len = good_fft_len(signal_len + 2 * max_half + 1);

        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(fft_len);
        let inv = planner.plan_fft_inverse(fft_len);

        let mut kernel_spectra = Vec::with_capacity(spec.scales.len());
        let mut half_widths = Vec::with_capacity(spec.scales.len());
        for &s in &spec.scales {
            let half = ((4.0 * spec.sigma_s * s / dt_s).ceil() as usize).max(1);
            // Kernel sample m ∈ [−half, half] sits at index m mod fft_len,
            // so that correlation W[d] = Σ_m x[d+m]·K*(m) falls out of one
            // circular product.
            let mut kernel = vec![Complex64::new(0.0, 0.0); fft_len];
            let amp = 1.0 / s.abs().sqrt();
            for m in -(half as i64)..=(half as i64) {
                let t = m as f64 * dt_s / s;
                let idx = m.rem_euclid(fft_len as i64) as usize;
                kernel[idx] = spec.psi(t) * amp;
            }
            fwd.process(&mut kernel);
            let scale_inv = 1.0 / fft_len as f64;
            for v in kernel.iter_mut() {
                *v = v.conj() * scale_inv;
            }
            kernel_spectra.push(kernel);
            half_widths.push(half);
        }
        Ok(WaveletEngine { spec, signal_len, fft_len, dt_s, fwd, inv, kernel_spectra, half_widths })
    }

    /// Engine for full 80000-sample sub-band signals with the standard spec.
    pub fn standard() -> Self {
        // 80000 samples spanning the 16 ms window: 0.2 µs per sample.
        WaveletEngine::new(MorletSpec::standard(), SUB_SAMPLES, 0.2e-6).expect("standard spec is valid")
    }

    pub fn spec(&self) -> &MorletSpec {
        &self.spec
    }

    /// Seconds per input sample.
    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    /// Truncated kernel half-width in samples, per scale.
    pub fn kernel_half_widths(&self) -> &[usize] {
        &self.half_widths
    }

    /// Forward FFT of a zero-padded signal, ready for per-scale products.
    fn signal_spectrum(&self, si: &IQCapture) -> Result<Vec<Complex64>> {
        if si.samples.len() != self.signal_len {
            return Err(Error::InvalidArgument(format!(
                "CWT input needs {} samples, got {}",
                self.signal_len,
                si.samples.len()
            )));
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft_len];
        for (dst, src) in buf.iter_mut().zip(&si.samples) {
            *dst = Complex64::new(src.re as f64, src.im as f64);
        }
        self.fwd.process(&mut buf);
        Ok(buf)
    }

    /// One scale's CWT column (all lags), complex.
    fn cwt_column(&self, spectrum: &[Complex64], scale_idx: usize) -> Vec<Complex64> {
        let kernel = &self.kernel_spectra[scale_idx];
        let mut buf: Vec<Complex64> =
            spectrum.iter().zip(kernel).map(|(a, b)| a * b).collect();
        self.inv.process(&mut buf);
        buf.truncate(self.signal_len);
        buf
    }

    /// Full complex CWT matrix (`signal_len × n_scales`).
    pub fn cwt(&self, si: &IQCapture) -> Result<CwtMatrix> {
        let spectrum = self.signal_spectrum(si)?;
        let n_scales = self.spec.scales.len();
        let mut values = vec![Complex32::new(0.0, 0.0); self.signal_len * n_scales];
        let columns: Vec<Vec<Complex64>> = (0..n_scales)
            .into_par_iter()
            .map(|j| self.cwt_column(&spectrum, j))
            .collect();
        for (j, col) in columns.iter().enumerate() {
            for (d, v) in col.iter().enumerate() {
                values[d * n_scales + j] = Complex32::new(v.re as f32, v.im as f32);
            }
        }
        Ok(CwtMatrix { values, n_lags: self.signal_len, n_scales })
    }

    /// One band's compressed scalogram (`COMPRESSED_LAGS × n_scales`),
    /// computed scale-by-scale without materializing the full matrix.
    fn compressed_band(&self, si: &IQCapture) -> Result<Vec<f32>> {
        let spectrum = self.signal_spectrum(si)?;
        let n_scales = self.spec.scales.len();
        let n_blocks = self.signal_len / LAG_COMPRESS;
        let per_scale: Vec<Vec<f32>> = (0..n_scales)
            .into_par_iter()
            .map(|j| {
                let col = self.cwt_column(&spectrum, j);
                col.chunks_exact(LAG_COMPRESS)
                    .map(|block| block.iter().map(|v| v.norm()).fold(f64::NEG_INFINITY, f64::max) as f32)
                    .collect()
            })
            .collect();
        let mut out = vec![0f32; n_blocks * n_scales];
        for (j, col) in per_scale.iter().enumerate() {
            for (b, &v) in col.iter().enumerate() {
                out[b * n_scales + j] = v;
            }
        }
        Ok(out)
    }

    /// Full preprocessing chain: sub-band split, CWT, compression, stack.
    pub fn make_wavelet_stack(&self, s: &IQCapture) -> Result<ScalogramTensor> {
        let (s1, s2, s3) = band_filter(s)?;
        let mut values = Vec::with_capacity(NUM_BANDS * COMPRESSED_LAGS * NUM_SCALES);
        for band in [&s1, &s2, &s3] {
            values.extend(self.compressed_band(band)?);
        }
        Ok(ScalogramTensor { values })
    }
}

/// One-shot CWT with a throwaway engine sized to the input (tests and
/// small studies; batch paths should hold a [`WaveletEngine`]).
pub fn cwt(si: &IQCapture, m: &MorletSpec) -> Result<CwtMatrix> {
    let dt = 1.0 / si.sample_rate_hz;
    WaveletEngine::new(m.clone(), si.samples.len(), dt)?.cwt(si)
}

/// Magnitude + 200-lag block max: `n_lags × n_scales` complex to
/// `(n_lags/200) × n_scales` real.
pub fn compress_scalogram(wu: &CwtMatrix) -> Result<Vec<f32>> {
    if wu.n_lags % LAG_COMPRESS != 0 {
        return Err(Error::InvalidArgument(format!(
            "lag count {} is not a multiple of {}",
            wu.n_lags, LAG_COMPRESS
        )));
    }
    let n_blocks = wu.n_lags / LAG_COMPRESS;
    let mut out = vec![0f32; n_blocks * wu.n_scales];
    for b in 0..n_blocks {
        for j in 0..wu.n_scales {
            let mut best = f32::NEG_INFINITY;
            for d in b * LAG_COMPRESS..(b + 1) * LAG_COMPRESS {
                best = best.max(wu.at(d, j).norm());
            }
            out[b * wu.n_scales + j] = best;
        }
    }
    Ok(out)
}

/// One-shot full stack with a throwaway engine (prefer [`WaveletEngine`]
/// for batches).
pub fn make_wavelet_stack(s: &IQCapture, m: &MorletSpec) -> Result<ScalogramTensor> {
    WaveletEngine::new(m.clone(), SUB_SAMPLES, 2.0 / s.sample_rate_hz)?.make_wavelet_stack(s)
}
