#pragma once

#include <functional>

namespace cfc {

// Scalar function of time together with its analytic derivative. Both callables
// must be set; pairs that disagree are caught by finite-difference validation.
struct TimeFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static TimeFunction constant(double c) {
    return {[c](double) { return c; }, [](double) { return 0.0; }};
  }
};

}  // namespace cfc
