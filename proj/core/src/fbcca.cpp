#include "ssvep/fbcca.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "ssvep/error.hpp"
#include "ssvep/fft.hpp"

namespace ssvep {
namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic>;

// Time-major (T x C) centred copy of a channel-major block.
Mat centred_columns(const RowMatrix& m) {
  Mat out(static_cast<Eigen::Index>(m.cols), static_cast<Eigen::Index>(m.rows));
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto row = m.row(r);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    for (std::size_t t = 0; t < m.cols; ++t) {
      out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(r)) = row[t] - mean;
    }
  }
  return out;
}

// Orthonormal basis of the column space, null directions dropped.
Mat orthonormal_basis(const Mat& a) {
  Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return Mat(a.rows(), 0);
  const double cutoff = 1e-12 * s(0);
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  return svd.matrixU().leftCols(rank);
}

std::vector<double> filter_from_spectrum(const std::vector<cplx>& spectrum, std::size_t n,
                                         Passband band, double fs) {
  std::vector<cplx> masked(spectrum.size());
  bool any = false;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    if (f >= band.lo_hz - 1e-9 && f <= band.hi_hz + 1e-9) {
      masked[k] = spectrum[k];
      any = true;
    }
  }
  if (!any) {
    throw DataError("sub-band [" + std::to_string(band.lo_hz) + ", " +
                    std::to_string(band.hi_hz) + "] Hz contains no FFT bin for " +
                    std::to_string(n) + " samples");
  }
  return irfft(masked, n);
}

void check_band(Passband band, double fs) {
  if (!(band.lo_hz >= 0.0 && band.lo_hz < band.hi_hz && band.hi_hz <= fs / 2.0 + 1e-9)) {
    throw ConfigError("invalid passband [" + std::to_string(band.lo_hz) + ", " +
                      std::to_string(band.hi_hz) + "] Hz for sample rate " + std::to_string(fs));
  }
}

}  // namespace

RowMatrix RowMatrix::from_row(std::span<const double> x) {
  RowMatrix m(1, x.size());
  std::copy(x.begin(), x.end(), m.data.begin());
  return m;
}

void FbccaConfig::validate() const {
  if (n_subbands < 1) throw ConfigError("FBCCA needs at least one sub-band");
  if (n_harmonics < 1) throw ConfigError("FBCCA needs at least one harmonic");
  if (candidate_freqs_hz.size() < 2) throw ConfigError("FBCCA needs >= 2 candidate frequencies");
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  const double fmax = *std::max_element(candidate_freqs_hz.begin(), candidate_freqs_hz.end());
  if (n_harmonics * fmax >= sample_rate_hz / 2.0) {
    throw ConfigError("harmonic " + std::to_string(n_harmonics * fmax) +
                      " Hz is not below Nyquist");
  }
  if (!subband_edges_hz.empty() &&
      subband_edges_hz.size() != static_cast<std::size_t>(n_subbands)) {
    throw ConfigError("subband_edges_hz must list exactly n_subbands bands");
  }
  const auto bands = subbands();
  for (std::size_t i = 0; i < bands.size(); ++i) {
    check_band(bands[i], sample_rate_hz);
    if (i > 0 && bands[i].lo_hz < bands[i - 1].lo_hz) {
      throw ConfigError("sub-band lower edges must be ascending");
    }
  }
}

std::vector<Passband> FbccaConfig::subbands() const {
  if (!subband_edges_hz.empty()) return subband_edges_hz;
  std::vector<Passband> out;
  for (int n = 1; n <= n_subbands; ++n) {
    out.push_back(Passband{8.0 * n, std::min(88.0, sample_rate_hz / 2.0)});
  }
  return out;
}

double FbccaConfig::weight(int n) const {
  return std::pow(static_cast<double>(n), -weight_a) + weight_b;
}

RowMatrix reference_signals(double f_hz, int n_harmonics, std::size_t n_samples,
                            double sample_rate_hz) {
  if (n_harmonics < 1) throw ConfigError("need at least one harmonic");
  if (n_harmonics * f_hz >= sample_rate_hz / 2.0) {
    throw ConfigError("reference harmonic " + std::to_string(n_harmonics * f_hz) +
                      " Hz violates Nyquist for fs = " + std::to_string(sample_rate_hz));
  }
  RowMatrix out(2 * static_cast<std::size_t>(n_harmonics), n_samples);
  for (int k = 1; k <= n_harmonics; ++k) {
    const auto sin_row = 2 * static_cast<std::size_t>(k - 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
      // Reduce k*f*i/fs to a fraction of a period before scaling by 2*pi.
      const double cycles = std::fmod(k * f_hz * static_cast<double>(i), sample_rate_hz) /
                            sample_rate_hz;
      const double phase = 2.0 * std::numbers::pi * cycles;
      out(sin_row, i) = std::sin(phase);
      out(sin_row + 1, i) = std::cos(phase);
    }
  }
  return out;
}

std::vector<double> subband_filter(std::span<const double> x, Passband band,
                                   double sample_rate_hz) {
  check_band(band, sample_rate_hz);
  if (x.empty()) throw DataError("cannot filter an empty signal");
  return filter_from_spectrum(rfft(x), x.size(), band, sample_rate_hz);
}

CcaResult cca_max_corr(const RowMatrix& x, const RowMatrix& y) {
  if (x.cols != y.cols) {
    throw DataError("CCA blocks differ in length: " + std::to_string(x.cols) + " vs " +
                    std::to_string(y.cols));
  }
  if (x.rows == 0 || y.rows == 0) throw DataError("CCA block without rows");
  if (x.cols <= x.rows + y.rows) {
    throw DataError("CCA needs more samples (" + std::to_string(x.cols) + ") than rows (" +
                    std::to_string(x.rows + y.rows) + ")");
  }
  const Mat qx = orthonormal_basis(centred_columns(x));
  const Mat qy = orthonormal_basis(centred_columns(y));
  if (qx.cols() == 0 || qy.cols() == 0) return CcaResult{0.0};
  const Mat cross = qx.transpose() * qy;
  Eigen::JacobiSVD<Mat> svd(cross);
  const double rho = svd.singularValues()(0);
  return CcaResult{std::clamp(rho, 0.0, 1.0)};
}

double fbcca_score(const RowMatrix& x, double f_hz, const FbccaConfig& cfg) {
  cfg.validate();
  if (x.rows == 0 || x.cols == 0) throw DataError("FBCCA input is empty");
  const auto reference = reference_signals(f_hz, cfg.n_harmonics, x.cols, cfg.sample_rate_hz);

  std::vector<std::vector<cplx>> spectra;
  spectra.reserve(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) spectra.push_back(rfft(x.row(r)));

  const auto bands = cfg.subbands();
  double score = 0.0;
  RowMatrix filtered(x.rows, x.cols);
  for (std::size_t n = 0; n < bands.size(); ++n) {
    for (std::size_t r = 0; r < x.rows; ++r) {
      const auto row = filter_from_spectrum(spectra[r], x.cols, bands[n], cfg.sample_rate_hz);
      std::copy(row.begin(), row.end(), filtered.row(r).begin());
    }
    const double rho = cca_max_corr(filtered, reference).rho;
    score += cfg.weight(static_cast<int>(n) + 1) * rho * rho;
  }
  return score;
}

std::vector<double> fbcca_scores(const RowMatrix& x, const FbccaConfig& cfg) {
  const LabelMap order(cfg.candidate_freqs_hz);
  std::vector<double> out;
  out.reserve(order.size());
  for (double f : order.freqs()) out.push_back(fbcca_score(x, f, cfg));
  return out;
}

Label fbcca_classify(const RowMatrix& x, const FbccaConfig& cfg) {
  const LabelMap order(cfg.candidate_freqs_hz);
  const auto scores = fbcca_scores(x, cfg);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return order.label_at(static_cast<int>(best));
}

}  // namespace ssvep
