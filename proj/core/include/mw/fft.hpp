#ifndef MW_FFT_HPP
#define MW_FFT_HPP

#include <complex>
#include <vector>

namespace mw::fft {

// Unnormalized 2-D transforms (forward kernel e^{-ik.x}), out-of-place,
// row-major ny x nx. Plans are cached per shape; execution is safe from
// multiple threads on distinct buffers.
void forward2d(int ny, int nx, const std::complex<double>* in, std::complex<double>* out);
void backward2d(int ny, int nx, const std::complex<double>* in, std::complex<double>* out);

std::vector<std::complex<double>> forward2d(int ny, int nx,
                                            const std::vector<std::complex<double>>& in);
std::vector<std::complex<double>> backward2d(int ny, int nx,
                                             const std::vector<std::complex<double>>& in);

int next_pow2(int n);

}  // namespace mw::fft

#endif
