#include "lagsynth/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "lagsynth/common.hpp"

namespace lagsynth::fft {

namespace {

// FFTW planning is not thread-safe; execution via the new-array interface is,
// as long as each call uses its own buffers. Cache one plan per length.
std::mutex plan_mutex;

fftw_plan forward_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> in(n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(
      static_cast<int>(n), in.data(),
      reinterpret_cast<fftw_complex*>(out.data()),
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(p != nullptr, "fft", "failed to create forward plan");
  cache.emplace(n, p);
  return p;
}

fftw_plan inverse_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> in(n / 2 + 1);
  std::vector<double> out(n);
  fftw_plan p = fftw_plan_dft_c2r_1d(
      static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
      out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(p != nullptr, "fft", "failed to create inverse plan");
  cache.emplace(n, p);
  return p;
}

fftw_plan inverse_c2c_plan(std::size_t n) {
  static std::map<std::size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> in(n), out(n);
  fftw_plan p = fftw_plan_dft_1d(
      static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
      FFTW_ESTIMATE | FFTW_UNALIGNED);
  require(p != nullptr, "fft", "failed to create inverse c2c plan");
  cache.emplace(n, p);
  return p;
}

}  // namespace

std::vector<std::complex<double>> rfft(const double* x, std::size_t n) {
  require(n > 0, "fft::rfft", "empty input");
  fftw_plan p = forward_plan(n);
  std::vector<double> in(x, x + n);
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_execute_dft_r2c(p, in.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
  return rfft(x.data(), x.size());
}

std::vector<double> irfft(const std::vector<std::complex<double>>& bins,
                          std::size_t n) {
  require(n > 0, "fft::irfft", "empty output length");
  require(bins.size() == n / 2 + 1, "fft::irfft",
          "bin count does not match output length");
  fftw_plan p = inverse_plan(n);
  // c2r transforms destroy their input; work on a copy.
  std::vector<std::complex<double>> in(bins);
  std::vector<double> out(n);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in.data()),
                       out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<std::complex<double>> ifft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  require(n > 0, "fft::ifft", "empty input");
  fftw_plan p = inverse_c2c_plan(n);
  std::vector<std::complex<double>> in(x), out(n);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace lagsynth::fft
