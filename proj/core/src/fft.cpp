#include "mw/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace mw::fft {

namespace {

std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan>& plan_cache() {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  return cache;
}

// FFTW_UNALIGNED so the cached plan may execute on any caller buffers via
// the new-array interface.
fftw_plan get_plan(int ny, int nx, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  const auto key = std::make_tuple(ny, nx, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> a(static_cast<std::size_t>(ny) * nx);
  std::vector<std::complex<double>> b(a.size());
  fftw_plan plan = fftw_plan_dft_2d(ny, nx, reinterpret_cast<fftw_complex*>(a.data()),
                                    reinterpret_cast<fftw_complex*>(b.data()), sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, plan);
  return plan;
}

void execute(int ny, int nx, int sign, const std::complex<double>* in, std::complex<double>* out) {
  fftw_plan plan = get_plan(ny, nx, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

void forward2d(int ny, int nx, const std::complex<double>* in, std::complex<double>* out) {
  execute(ny, nx, FFTW_FORWARD, in, out);
}

void backward2d(int ny, int nx, const std::complex<double>* in, std::complex<double>* out) {
  execute(ny, nx, FFTW_BACKWARD, in, out);
}

std::vector<std::complex<double>> forward2d(int ny, int nx,
                                            const std::vector<std::complex<double>>& in) {
  std::vector<std::complex<double>> out(in.size());
  forward2d(ny, nx, in.data(), out.data());
  return out;
}

std::vector<std::complex<double>> backward2d(int ny, int nx,
                                             const std::vector<std::complex<double>>& in) {
  std::vector<std::complex<double>> out(in.size());
  backward2d(ny, nx, in.data(), out.data());
  return out;
}

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace mw::fft
