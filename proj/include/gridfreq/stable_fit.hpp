#pragma once

#include <string>

namespace gridfreq {

enum class FitMethod { quantile, ecf, mle };

std::string to_string(FitMethod method);

/// Stable-law parameters; scale follows the CF convention
/// exp(-(scale * |k|)^alpha), so a Gaussian with standard deviation s has
/// scale s / sqrt(2). At alpha = 2 the skewness is unidentifiable and
/// reported as 0.
struct StableFit {
  double alpha = 2.0;
  double beta = 0.0;
  double scale = 0.0;
  double location = 0.0;
  FitMethod method = FitMethod::quantile;
};

}  // namespace gridfreq
