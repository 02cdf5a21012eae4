#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "phstab/coefficients.hpp"
#include "phstab/rng.hpp"
#include "phstab/space.hpp"

namespace phstab {

/// Q-Wiener noise at the truncation, specified by a square-root factor:
/// Q = q_half * q_half^T. The range of q_half is the Cameron-Martin space
/// of the truncated process.
struct QWienerSpec {
  Matrix q_half;  // n x m

  int state_dim() const { return static_cast<int>(q_half.rows()); }
  int noise_dim() const { return static_cast<int>(q_half.cols()); }
};

/// Jump events of one time step.
struct JumpBatch {
  std::vector<Vector> marks;

  int count() const { return static_cast<int>(marks.size()); }
};

/// xi * sqrt(dt) with xi an m-vector of independent standard normals: the
/// driving increment in the coordinates of the noise space.
inline Vector sample_standard_increment(int m, double dt, RngStream& rng) {
  if (dt <= 0.0) {
    throw std::invalid_argument("sample_standard_increment: dt must be > 0");
  }
  const double root_dt = std::sqrt(dt);
  Vector xi(m);
  for (int i = 0; i < m; ++i) xi[i] = root_dt * rng.next_normal();
  return xi;
}

/// Q-Wiener increment q_half * xi * sqrt(dt): mean zero, covariance dt * Q.
inline Vector sample_wiener_increment(const QWienerSpec& spec, double dt,
                                      RngStream& rng) {
  return spec.q_half * sample_standard_increment(spec.noise_dim(), dt, rng);
}

/// Poisson(mean) count by Knuth's product method. Means above 16 are split
/// into exact Poisson summands, so no approximation enters at any size.
inline int sample_poisson(double mean, RngStream& rng) {
  if (mean < 0.0) {
    throw std::invalid_argument("sample_poisson: mean must be >= 0");
  }
  int total = 0;
  while (mean > 16.0) {
    double half = mean * 0.5;
    total += sample_poisson(half, rng);
    mean -= half;
  }
  if (mean == 0.0) return total;
  const double threshold = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= rng.next_uniform();
  } while (p > threshold);
  return total + k - 1;
}

/// Compound-Poisson events of one step: count ~ Poisson(lambda_J * dt) with
/// marks drawn i.i.d. from the normalized mark distribution.
inline JumpBatch sample_jump_batch(const JumpMeasureSpec& measure, double dt,
                                   RngStream& rng) {
  if (dt <= 0.0) {
    throw std::invalid_argument("sample_jump_batch: dt must be > 0");
  }
  JumpBatch batch;
  if (measure.intensity == 0.0) return batch;
  const int count = sample_poisson(measure.intensity * dt, rng);
  batch.marks.reserve(count);
  for (int i = 0; i < count; ++i) {
    batch.marks.push_back(measure.marks.sample(rng));
  }
  return batch;
}

}  // namespace phstab
