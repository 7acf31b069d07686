#include "ssvep/fft.hpp"

#include <numbers>

#include "ssvep/error.hpp"

namespace ssvep {
namespace {

std::size_t smallest_factor(std::size_t n) {
  if (n % 2 == 0) return 2;
  for (std::size_t f = 3; f * f <= n; f += 2) {
    if (n % f == 0) return f;
  }
  return n;
}

// Roots of unity for the top-level length; a sub-transform of length m
// reads every (n/m)-th entry.
struct Twiddles {
  std::size_t n;
  std::vector<cplx> w;  // w[j] = e^{sign*2*pi*i*j/n}

  Twiddles(std::size_t size, double sign) : n(size), w(size) {
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(j) /
                           static_cast<double>(n);
      w[j] = {std::cos(angle), std::sin(angle)};
    }
  }

  // e^{sign*2*pi*i*num/den} for den dividing n
  cplx operator()(std::size_t num, std::size_t den) const { return w[(num % den) * (n / den)]; }
};

void transform(const cplx* in, std::size_t stride, std::size_t n, cplx* out, const Twiddles& tw) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = smallest_factor(n);
  if (p == n) {
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc{0.0, 0.0};
      for (std::size_t j = 0; j < n; ++j) acc += in[j * stride] * tw(j * k, n);
      out[k] = acc;
    }
    return;
  }
  const std::size_t m = n / p;
  // Sub-transform r covers the inputs r, r+p, r+2p, ...
  std::vector<cplx> sub(n);
  for (std::size_t r = 0; r < p; ++r) {
    transform(in + r * stride, stride * p, m, sub.data() + r * m, tw);
  }
  if (p == 2) {
    for (std::size_t k = 0; k < m; ++k) {
      const cplx t = sub[m + k] * tw(k, n);
      out[k] = sub[k] + t;
      out[k + m] = sub[k] - t;
    }
    return;
  }
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t r = 0; r < p; ++r) acc += sub[r * m + k % m] * tw(r * k, n);
    out[k] = acc;
  }
}

}  // namespace

std::vector<cplx> fft(std::span<const cplx> x, bool inverse) {
  std::vector<cplx> out(x.size());
  if (x.empty()) return out;
  const Twiddles tw(x.size(), inverse ? 1.0 : -1.0);
  transform(x.data(), 1, x.size(), out.data(), tw);
  return out;
}

std::vector<cplx> rfft(std::span<const double> x) {
  std::vector<cplx> buf(x.begin(), x.end());
  auto full = fft(buf);
  full.resize(x.size() / 2 + 1);
  return full;
}

std::vector<double> irfft(std::span<const cplx> spectrum, std::size_t n) {
  if (spectrum.size() != n / 2 + 1) {
    throw DataError("irfft: expected " + std::to_string(n / 2 + 1) + " bins, got " +
                    std::to_string(spectrum.size()));
  }
  std::vector<cplx> full(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) full[k] = spectrum[k];
  for (std::size_t k = spectrum.size(); k < n; ++k) full[k] = std::conj(spectrum[n - k]);
  const auto time = fft(full, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = time[i].real() / static_cast<double>(n);
  return out;
}

}  // namespace ssvep
