#pragma once

#include <complex>
#include <cstddef>
#include <vector>

// Real FFT helpers backed by FFTW3. Plans are cached per length and created
// with FFTW_ESTIMATE | FFTW_UNALIGNED so they can execute on caller-provided
// buffers; plan-cache access is serialized internally.

namespace lagsynth::fft {

// Forward real-to-complex transform: n real samples -> n/2+1 complex bins,
// unnormalized (bin 0 is the plain sum of the signal).
std::vector<std::complex<double>> rfft(const double* x, std::size_t n);
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

// Inverse complex-to-real transform of n/2+1 bins back to n real samples,
// scaled by 1/n so irfft(rfft(x), n) == x.
std::vector<double> irfft(const std::vector<std::complex<double>>& bins,
                          std::size_t n);

// Full-length inverse complex-to-complex transform, scaled by 1/n. Used for
// analytic (one-sided spectrum) signals whose time series is complex.
std::vector<std::complex<double>> ifft(
    const std::vector<std::complex<double>>& x);

}  // namespace lagsynth::fft
