#pragma once

#include <span>
#include <vector>

#include "ssvep/data.hpp"

namespace ssvep {

// Dense row-major matrix; rows are channels (or reference signals), columns
// are time samples.
struct RowMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RowMatrix() = default;
  RowMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols, cols);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(data).subspan(r * cols, cols); }

  static RowMatrix from_row(std::span<const double> x);
};

// Closed passband [lo_hz, hi_hz].
struct Passband {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

struct FbccaConfig {
  int n_subbands = 7;
  double weight_a = 1.25;
  double weight_b = 0.25;
  int n_harmonics = 5;
  std::vector<double> candidate_freqs_hz{12.0, 15.0};
  // Empty means the M3 layout: band n spans [8n, 88] Hz.
  std::vector<Passband> subband_edges_hz;
  double sample_rate_hz = 250.0;

  void validate() const;
  std::vector<Passband> subbands() const;
  // w(n) = n^-a + b for the 1-based sub-band index n.
  double weight(int n) const;
};

struct CcaResult {
  double rho = 0.0;
};

// Rows (sin f, cos f, sin 2f, cos 2f, ...) sampled at t = n / fs.
RowMatrix reference_signals(double f_hz, int n_harmonics, std::size_t n_samples,
                            double sample_rate_hz);

// Zero-phase brick-wall band-pass: rFFT, zero bins outside the passband,
// inverse rFFT.
std::vector<double> subband_filter(std::span<const double> x, Passband band,
                                   double sample_rate_hz);

// Largest canonical correlation between the row spaces of x and y (both
// centred per row). Directions with singular value below 1e-12 x the largest
// are dropped; a block with no remaining direction yields rho = 0.
CcaResult cca_max_corr(const RowMatrix& x, const RowMatrix& y);

double fbcca_score(const RowMatrix& x, double f_hz, const FbccaConfig& cfg);

// Score for every candidate frequency, in ascending frequency order.
std::vector<double> fbcca_scores(const RowMatrix& x, const FbccaConfig& cfg);

// argmax over candidates; ties go to the lower frequency.
Label fbcca_classify(const RowMatrix& x, const FbccaConfig& cfg);

}  // namespace ssvep
