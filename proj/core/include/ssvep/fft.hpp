#pragma once

#include <complex>
#include <span>
#include <vector>

namespace ssvep {

using cplx = std::complex<double>;

// Mixed-radix decimation-in-time FFT for any length. Lengths are factored
// into primes; a prime factor p costs O(p) per output bin, so prime sizes
// fall back to an O(n^2) direct transform. Forward uses exp(-2*pi*i*k*n/N);
// the inverse is unnormalized.
std::vector<cplx> fft(std::span<const cplx> x, bool inverse = false);

// Bins 0..n/2 of the DFT of a real signal.
std::vector<cplx> rfft(std::span<const double> x);

// Inverse of rfft for a length-n real signal; `spectrum` holds n/2+1 bins.
std::vector<double> irfft(std::span<const cplx> spectrum, std::size_t n);

}  // namespace ssvep
