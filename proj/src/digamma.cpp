#include "covkl/error.hpp"
#include "covkl/kld.hpp"

#include <cmath>

namespace covkl {

double digamma(double x) {
  if (!(x > 0.0)) throw ConfigError("digamma requires a positive argument");
  if (std::isinf(x)) return x;
  double shift = 0.0;
  // psi(x) = psi(x + 1) - 1/x until the asymptotic series is accurate
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return shift + std::log(x) - 0.5 * inv - tail;
}

} // namespace covkl
