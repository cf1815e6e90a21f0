#pragma once

// Acoustic features computed directly from 16-bit PCM audio: log mel
// filterbank energies, per-frame RMS amplitude, and YIN pitch.
//
// Framing is "snip edges": frame i covers samples [i*hop, i*hop + window),
// and only frames that fit entirely inside the signal are produced.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include "dataset.hpp"
#include "error.hpp"

namespace phonedyn {

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate_hz = 16000;

  double duration_s() const noexcept {
    return static_cast<double>(samples.size()) / static_cast<double>(sample_rate_hz);
  }
};

// ---------------------------------------------------------------------------
// WAV I/O
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint32_t le32(const char* p) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(p[0])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(p[3])) << 24);
}

inline std::uint16_t le16(const char* p) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                    (static_cast<unsigned char>(p[1]) << 8));
}

inline void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace detail

/// Reads a 16-bit PCM mono WAV; samples are scaled by 1/32768.
inline Waveform read_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open WAV file: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string();
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
    throw FormatError(where + ": not a RIFF/WAVE file");

  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::size_t size = detail::le32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) throw FormatError(where + ": truncated fmt chunk");
      std::uint16_t format = detail::le16(bytes.data() + body);
      const std::uint16_t channels = detail::le16(bytes.data() + body + 2);
      w.sample_rate_hz = static_cast<int>(detail::le32(bytes.data() + body + 4));
      const std::uint16_t bits = detail::le16(bytes.data() + body + 14);
      if (format == 0xFFFE && size >= 26) format = detail::le16(bytes.data() + body + 24);
      if (format != 1) throw FormatError(where + ": unsupported encoding (format tag " + std::to_string(format) + ", need PCM)");
      if (channels != 1)
        throw FormatError(where + ": unsupported channel count " + std::to_string(channels) + " (need mono)");
      if (bits != 16) throw FormatError(where + ": unsupported sample width " + std::to_string(bits) + " bits (need 16)");
      if (w.sample_rate_hz <= 0) throw FormatError(where + ": invalid sample rate");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(where + ": data chunk before fmt chunk");
      if (body + size > bytes.size()) throw FormatError(where + ": truncated data chunk");
      if (size % 2 != 0) throw FormatError(where + ": truncated data chunk (odd byte count)");
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(detail::le16(bytes.data() + body + 2 * i));
        w.samples[i] = static_cast<double>(v) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(where + (have_fmt ? ": missing data chunk" : ": missing fmt chunk"));
}

/// Writes 16-bit PCM mono; samples are clamped to [-1, 1) before rounding.
inline void write_wav(const fs::path& path, const Waveform& w) {
  std::string s = "RIFF";
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  detail::put32(s, 36 + data_bytes);
  s += "WAVEfmt ";
  detail::put32(s, 16);
  detail::put16(s, 1);
  detail::put16(s, 1);
  detail::put32(s, static_cast<std::uint32_t>(w.sample_rate_hz));
  detail::put32(s, static_cast<std::uint32_t>(w.sample_rate_hz * 2));
  detail::put16(s, 2);
  detail::put16(s, 16);
  s += "data";
  detail::put32(s, data_bytes);
  for (const double x : w.samples) {
    const double scaled = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    detail::put16(s, static_cast<std::uint16_t>(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write WAV file: " + path.string());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

// ---------------------------------------------------------------------------
// Framing and filterbank
// ---------------------------------------------------------------------------

enum class WindowFunction { hann, rectangular };

struct LogmelConfig {
  int sample_rate_hz = 16000;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  int n_mels = 40;
  double low_hz = 20.0;
  double high_hz = 0.0;  // <= 0 means Nyquist
  double log_floor = 1e-10;
  WindowFunction window = WindowFunction::hann;

  int window_samples() const { return static_cast<int>(std::lround(sample_rate_hz * window_ms / 1000.0)); }
  int hop_samples() const { return static_cast<int>(std::lround(sample_rate_hz * hop_ms / 1000.0)); }
  int fft_size() const {
    int n = 1;
    while (n < window_samples()) n <<= 1;
    return n;
  }
  double nyquist_hz() const { return sample_rate_hz / 2.0; }
  double upper_hz() const { return high_hz > 0.0 ? high_hz : nyquist_hz(); }

  void validate() const {
    if (sample_rate_hz <= 0) throw DataError("logmel config: sample rate must be positive");
    if (window_samples() < 2 || hop_samples() < 1) throw DataError("logmel config: window/hop too short");
    if (n_mels < 1) throw DataError("logmel config: n_mels must be >= 1");
    if (!(low_hz >= 0.0 && low_hz < upper_hz() && upper_hz() <= nyquist_hz()))
      throw DataError("logmel config: need 0 <= low_hz < high_hz <= Nyquist");
    if (!(log_floor > 0.0)) throw DataError("logmel config: log floor must be positive");
  }
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

inline std::size_t num_frames(std::size_t samples, const LogmelConfig& cfg) {
  const auto win = static_cast<std::size_t>(cfg.window_samples());
  if (samples < win) return 0;
  return 1 + (samples - win) / static_cast<std::size_t>(cfg.hop_samples());
}

inline std::vector<double> analysis_window(const LogmelConfig& cfg) {
  const int n = cfg.window_samples();
  std::vector<double> w(static_cast<std::size_t>(n), 1.0);
  if (cfg.window == WindowFunction::hann)
    for (int i = 0; i < n; ++i)
      w[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  return w;
}

/// n_mels + 2 band edges in Hz, equally spaced on the mel scale.
inline std::vector<double> mel_band_edges(const LogmelConfig& cfg) {
  const double lo = hz_to_mel(cfg.low_hz), hi = hz_to_mel(cfg.upper_hz());
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mels + 2));
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cfg.n_mels + 1));
  return edges;
}

/// Triangular filters with unit peak: n_mels x (fft_size/2 + 1).
inline Eigen::MatrixXd mel_filterbank(const LogmelConfig& cfg) {
  const auto edges = mel_band_edges(cfg);
  const int bins = cfg.fft_size() / 2 + 1;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.n_mels, bins);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[static_cast<std::size_t>(m)];
    const double center = edges[static_cast<std::size_t>(m) + 1];
    const double right = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate_hz / cfg.fft_size();
      const double rise = (f - left) / (center - left);
      const double fall = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(rise, fall));
    }
  }
  return fb;
}

namespace detail {

inline void require_rate(const Waveform& w, const LogmelConfig& cfg) {
  if (w.sample_rate_hz != cfg.sample_rate_hz)
    throw DataError("waveform sample rate " + std::to_string(w.sample_rate_hz) + " Hz does not match config " +
                    std::to_string(cfg.sample_rate_hz) + " Hz");
}

}  // namespace detail

/// Log mel filterbank energies, frames x n_mels.
inline FeatureMatrix logmel(const Waveform& w, const LogmelConfig& cfg) {
  cfg.validate();
  detail::require_rate(w, cfg);
  const std::size_t frames = num_frames(w.samples.size(), cfg);
  if (frames == 0)
    throw DataError("logmel: waveform of " + std::to_string(w.samples.size()) + " samples is shorter than one window (" +
                    std::to_string(cfg.window_samples()) + ")");

  const auto window = analysis_window(cfg);
  const Eigen::MatrixXd fb = mel_filterbank(cfg);
  const int nfft = cfg.fft_size();
  const auto hop = static_cast<std::size_t>(cfg.hop_samples());

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> buf(static_cast<std::size_t>(nfft));
  std::vector<std::complex<double>> spec;
  Eigen::VectorXd power(nfft / 2 + 1);

  FeatureMatrix out{RowMatrix(static_cast<Eigen::Index>(frames), cfg.n_mels), cfg.hop_ms};
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t i = 0; i < window.size(); ++i) buf[i] = w.samples[f * hop + i] * window[i];
    fft.fwd(spec, buf);
    for (int k = 0; k <= nfft / 2; ++k) power(k) = std::norm(spec[static_cast<std::size_t>(k)]);
    const Eigen::VectorXd energy = fb * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      out.data(static_cast<Eigen::Index>(f), m) = std::log(std::max(energy(m), cfg.log_floor));
  }
  return out;
}

/// One covariate value per analysis frame.
struct CovariateSeries {
  std::vector<double> values;
};

/// RMS of the windowed samples in each frame.
inline CovariateSeries frame_amplitude(const Waveform& w, const LogmelConfig& cfg) {
  cfg.validate();
  detail::require_rate(w, cfg);
  const std::size_t frames = num_frames(w.samples.size(), cfg);
  const auto window = analysis_window(cfg);
  const auto hop = static_cast<std::size_t>(cfg.hop_samples());
  CovariateSeries out;
  out.values.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < window.size(); ++i) {
      const double v = w.samples[f * hop + i] * window[i];
      acc += v * v;
    }
    out.values[f] = std::sqrt(acc / static_cast<double>(window.size()));
  }
  return out;
}

struct PitchConfig {
  double min_hz = 50.0;
  double max_hz = 400.0;
  double window_ms = 40.0;
  double threshold = 0.15;
};

/// Cumulative-mean-normalized difference function of one segment over lags
/// [0, max_lag], using a fixed integration length of size - max_lag.
inline std::vector<double> yin_cmndf(std::span<const double> seg, std::size_t max_lag) {
  const std::size_t integration = seg.size() - max_lag;
  std::vector<double> d(max_lag + 1, 0.0);
  for (std::size_t tau = 1; tau <= max_lag; ++tau) {
    double acc = 0.0;
    for (std::size_t j = 0; j < integration; ++j) {
      const double diff = seg[j] - seg[j + tau];
      acc += diff * diff;
    }
    d[tau] = acc;
  }
  std::vector<double> cmndf(max_lag + 1, 1.0);
  double running = 0.0;
  for (std::size_t tau = 1; tau <= max_lag; ++tau) {
    running += d[tau];
    cmndf[tau] = running > 0.0 ? d[tau] * static_cast<double>(tau) / running : 1.0;
  }
  return cmndf;
}

/// YIN pitch per analysis frame (Hz, 0 when unvoiced). Each estimate uses a
/// pitch window centered on the frame center, truncated at signal edges.
inline CovariateSeries frame_pitch(const Waveform& w, const LogmelConfig& cfg, const PitchConfig& pc = {}) {
  cfg.validate();
  detail::require_rate(w, cfg);
  if (!(pc.min_hz > 0.0 && pc.min_hz < pc.max_hz)) throw DataError("pitch config: need 0 < min_hz < max_hz");

  const std::size_t frames = num_frames(w.samples.size(), cfg);
  const double sr = cfg.sample_rate_hz;
  const auto hop = static_cast<std::size_t>(cfg.hop_samples());
  const auto half_win = static_cast<long long>(cfg.window_samples() / 2);
  const auto span_len = static_cast<long long>(std::lround(sr * pc.window_ms / 1000.0));
  const auto min_lag = static_cast<std::size_t>(std::floor(sr / pc.max_hz));
  const auto max_lag_cfg = static_cast<std::size_t>(std::ceil(sr / pc.min_hz));
  const auto n = static_cast<long long>(w.samples.size());

  CovariateSeries out;
  out.values.assign(frames, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const long long center = static_cast<long long>(f * hop) + half_win;
    const long long lo = std::max(0LL, center - span_len / 2);
    const long long hi = std::min(n, center - span_len / 2 + span_len);
    if (hi - lo < 4) continue;
    const std::span<const double> seg(w.samples.data() + lo, static_cast<std::size_t>(hi - lo));
    const std::size_t max_lag = std::min(max_lag_cfg, seg.size() / 2);
    if (max_lag < min_lag + 2) continue;

    const auto cmndf = yin_cmndf(seg, max_lag);
    std::size_t tau = min_lag;
    while (tau <= max_lag && !(cmndf[tau] < pc.threshold)) ++tau;
    if (tau > max_lag) continue;
    while (tau + 1 <= max_lag && cmndf[tau + 1] < cmndf[tau]) ++tau;

    double refined = static_cast<double>(tau);
    if (tau > 1 && tau + 1 <= max_lag) {
      const double a = cmndf[tau - 1], b = cmndf[tau], c = cmndf[tau + 1];
      const double denom = a - 2.0 * b + c;
      if (denom > 0.0) refined += std::clamp(0.5 * (a - c) / denom, -1.0, 1.0);
    }
    out.values[f] = sr / refined;
  }
  return out;
}

}  // namespace phonedyn
