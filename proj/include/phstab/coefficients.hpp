#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

#include "phstab/rng.hpp"
#include "phstab/space.hpp"

namespace phstab {

// ---------------------------------------------------------------------------
// Jump-measure data
// ---------------------------------------------------------------------------

/// Normalized mark distribution of a finite-activity jump measure. Marks are
/// vectors with i.i.d. coordinates drawn from one of the named families.
struct MarkDistribution {
  enum class Kind { none, uniform_pm, gaussian, constant };

  Kind kind = Kind::none;
  int dim = 1;
  double value = 1.0;   // magnitude for uniform_pm, value for constant
  double mean = 0.0;    // gaussian
  double stddev = 1.0;  // gaussian

  static MarkDistribution none() { return MarkDistribution{}; }
  static MarkDistribution uniform_pm(int dim, double c) {
    return MarkDistribution{Kind::uniform_pm, dim, c, 0.0, 0.0};
  }
  static MarkDistribution gaussian(int dim, double mean, double stddev) {
    return MarkDistribution{Kind::gaussian, dim, 0.0, mean, stddev};
  }
  static MarkDistribution constant(int dim, double c) {
    return MarkDistribution{Kind::constant, dim, c, 0.0, 0.0};
  }

  Vector sample(RngStream& rng) const {
    Vector eta(dim);
    switch (kind) {
      case Kind::none:
        throw std::logic_error("MarkDistribution: cannot sample from 'none'");
      case Kind::uniform_pm:
        for (int i = 0; i < dim; ++i) {
          eta[i] = rng.next_uniform() < 0.5 ? -value : value;
        }
        break;
      case Kind::gaussian:
        for (int i = 0; i < dim; ++i) {
          eta[i] = mean + stddev * rng.next_normal();
        }
        break;
      case Kind::constant:
        eta.setConstant(value);
        break;
    }
    return eta;
  }

  /// E[eta] (coordinatewise).
  Vector mean_vector() const {
    return Vector::Constant(dim, coordinate_mean());
  }

  double coordinate_mean() const {
    switch (kind) {
      case Kind::uniform_pm:
        return 0.0;
      case Kind::gaussian:
        return mean;
      case Kind::constant:
        return value;
      case Kind::none:
        return 0.0;
    }
    return 0.0;
  }

  /// E[eta_1^2].
  double coordinate_second_moment() const {
    switch (kind) {
      case Kind::uniform_pm:
        return value * value;
      case Kind::gaussian:
        return mean * mean + stddev * stddev;
      case Kind::constant:
        return value * value;
      case Kind::none:
        return 0.0;
    }
    return 0.0;
  }
};

/// Finite-activity jump measure mu on the mark space: total mass (intensity
/// per unit time) plus the normalized mark distribution mu / lambda_J.
struct JumpMeasureSpec {
  double intensity = 0.0;  // lambda_J = mu(E); 0 means no jump term
  MarkDistribution marks;

  JumpMeasureSpec() = default;
  JumpMeasureSpec(double intensity_, MarkDistribution marks_)
      : intensity(intensity_), marks(marks_) {
    if (intensity < 0.0) {
      throw std::invalid_argument("JumpMeasureSpec: intensity must be >= 0");
    }
    if (intensity > 0.0 && marks.kind == MarkDistribution::Kind::none) {
      throw std::invalid_argument(
          "JumpMeasureSpec: positive intensity needs a mark distribution");
    }
  }
};

// ---------------------------------------------------------------------------
// Coefficient maps
// ---------------------------------------------------------------------------

/// Nonlinear drift x -> H with declared squared-Lipschitz constant:
/// ||eval(x) - eval(y)||^2 <= lipschitz_sq * ||x - y||^2.
struct DriftMap {
  std::function<Vector(const Vector&)> eval;
  double lipschitz_sq = 0.0;  // L_F
  bool port = false;          // range restricted to {0} (+) H1
};

/// Diffusion x -> n x m matrix acting on the m-dimensional driving
/// increment; Lipschitz in the Hilbert-Schmidt (Frobenius) norm:
/// ||eval(x) - eval(y)||_F^2 <= lipschitz_sq * ||x - y||^2.
struct DiffusionMap {
  std::function<Matrix(const Vector&)> eval;
  double lipschitz_sq = 0.0;  // L_sigma
  bool port = false;
  int noise_dim = 0;  // m
};

/// Jump amplitude (x, mark) -> H with the integrated Lipschitz convention
/// int ||eval(x,eta) - eval(y,eta)||^2 mu(d eta) <= lipschitz_sq ||x - y||^2.
struct JumpMap {
  std::function<Vector(const Vector&, const Vector&)> eval;
  double lipschitz_sq = 0.0;  // L_gamma
  bool port = false;
  // Closed form for int_E eval(x, eta) mu(d eta) when known; empty triggers
  // the Monte-Carlo fallback in jump_compensator_mean.
  std::function<Vector(const Vector&)> compensator_mean;
};

/// The SPDE coefficient triple together with its jump-measure data. All maps
/// act on the same decomposed space and must be pure functions.
struct CoefficientSet {
  SpaceDecomposition space;
  DriftMap drift;
  DiffusionMap diffusion;
  JumpMap jump;
  JumpMeasureSpec jump_measure;
};

namespace detail {

inline Vector zero_head(const SpaceDecomposition& space, Vector v) {
  v.head(space.n0).setZero();
  return v;
}

inline Matrix zero_top_rows(const SpaceDecomposition& space, Matrix m) {
  m.topRows(space.n0).setZero();
  return m;
}

inline double operator_norm(const Matrix& b) {
  if (b.size() == 0) return 0.0;
  return b.jacobiSvd().singularValues()(0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Built-in drift families (analytic Lipschitz constants)
// ---------------------------------------------------------------------------

inline DriftMap make_zero_drift(const SpaceDecomposition& space) {
  const int n = space.dim();
  return DriftMap{[n](const Vector&) { return Vector::Zero(n).eval(); }, 0.0,
                  false};
}

inline DriftMap make_constant_drift(const SpaceDecomposition& space, Vector c,
                                    bool port = false) {
  if (c.size() != space.dim()) {
    throw std::invalid_argument("make_constant_drift: dimension mismatch");
  }
  if (port) c = detail::zero_head(space, std::move(c));
  return DriftMap{[c](const Vector&) { return c; }, 0.0, port};
}

inline DriftMap make_linear_drift(const SpaceDecomposition& space, Matrix b,
                                  bool port = false) {
  if (b.rows() != space.dim() || b.cols() != space.dim()) {
    throw std::invalid_argument("make_linear_drift: matrix must be n x n");
  }
  if (port) b = detail::zero_top_rows(space, std::move(b));
  const double op = detail::operator_norm(b);
  return DriftMap{[b](const Vector& x) { return (b * x).eval(); }, op * op,
                  port};
}

/// Saturating drift amp * tanh(gain * x), applied coordinatewise; globally
/// Lipschitz with constant |amp * gain|.
inline DriftMap make_tanh_drift(const SpaceDecomposition& space, double amp,
                                double gain, bool port = false) {
  const double lip = amp * gain;
  auto eval = [space, amp, gain, port](const Vector& x) {
    Vector out = amp * (gain * x.array()).tanh().matrix();
    if (port) out = detail::zero_head(space, std::move(out));
    return out;
  };
  return DriftMap{std::move(eval), lip * lip, port};
}

// ---------------------------------------------------------------------------
// Built-in diffusion families
// ---------------------------------------------------------------------------

inline DiffusionMap make_zero_diffusion(const SpaceDecomposition& space,
                                        int noise_dim) {
  const int n = space.dim();
  return DiffusionMap{
      [n, noise_dim](const Vector&) {
        return Matrix::Zero(n, noise_dim).eval();
      },
      0.0, false, noise_dim};
}

inline DiffusionMap make_constant_diffusion(const SpaceDecomposition& space,
                                            Matrix m, bool port = false) {
  if (m.rows() != space.dim()) {
    throw std::invalid_argument("make_constant_diffusion: rows must equal n");
  }
  if (port) m = detail::zero_top_rows(space, std::move(m));
  const int noise_dim = static_cast<int>(m.cols());
  return DiffusionMap{[m](const Vector&) { return m; }, 0.0, port, noise_dim};
}

/// Multiplicative diagonal diffusion diag(d .* x) with m = n.
inline DiffusionMap make_diag_linear_diffusion(const SpaceDecomposition& space,
                                               Vector d, bool port = false) {
  if (d.size() != space.dim()) {
    throw std::invalid_argument(
        "make_diag_linear_diffusion: dimension mismatch");
  }
  if (port) d = detail::zero_head(space, std::move(d));
  const double lip = d.cwiseAbs().maxCoeff();
  auto eval = [d](const Vector& x) {
    return Matrix((d.array() * x.array()).matrix().asDiagonal());
  };
  return DiffusionMap{std::move(eval), lip * lip, port,
                      static_cast<int>(d.size())};
}

/// Saturating diagonal diffusion diag(amp * tanh(gain * x)) with m = n.
inline DiffusionMap make_diag_tanh_diffusion(const SpaceDecomposition& space,
                                             double amp, double gain,
                                             bool port = false) {
  const int n = space.dim();
  const double lip = amp * gain;
  auto eval = [space, amp, gain, port](const Vector& x) {
    Vector diag = amp * (gain * x.array()).tanh().matrix();
    if (port) diag = detail::zero_head(space, std::move(diag));
    return Matrix(diag.asDiagonal());
  };
  return DiffusionMap{std::move(eval), lip * lip, port, n};
}

// ---------------------------------------------------------------------------
// Built-in jump families
// ---------------------------------------------------------------------------

inline JumpMap make_zero_jump(const SpaceDecomposition& space) {
  const int n = space.dim();
  return JumpMap{
      [n](const Vector&, const Vector&) { return Vector::Zero(n).eval(); },
      0.0, false, [n](const Vector&) { return Vector::Zero(n).eval(); }};
}

/// gamma(x, eta) = c, independent of state and mark.
inline JumpMap make_constant_jump(const SpaceDecomposition& space, Vector c,
                                  const JumpMeasureSpec& measure,
                                  bool port = false) {
  if (c.size() != space.dim()) {
    throw std::invalid_argument("make_constant_jump: dimension mismatch");
  }
  if (port) c = detail::zero_head(space, std::move(c));
  Vector comp = measure.intensity * c;
  return JumpMap{[c](const Vector&, const Vector&) { return c; }, 0.0, port,
                 [comp](const Vector&) { return comp; }};
}

/// gamma(x, eta) = M * eta, additive marks.
inline JumpMap make_additive_jump(const SpaceDecomposition& space, Matrix m,
                                  const JumpMeasureSpec& measure,
                                  bool port = false) {
  if (m.rows() != space.dim() || m.cols() != measure.marks.dim) {
    throw std::invalid_argument(
        "make_additive_jump: matrix must be n x mark_dimension");
  }
  if (port) m = detail::zero_top_rows(space, std::move(m));
  Vector comp = measure.intensity * (m * measure.marks.mean_vector());
  return JumpMap{
      [m](const Vector&, const Vector& eta) { return (m * eta).eval(); }, 0.0,
      port, [comp](const Vector&) { return comp; }};
}

/// gamma(x, eta) = eta_1 * B x, multiplicative in the first mark coordinate.
inline JumpMap make_linear_jump(const SpaceDecomposition& space, Matrix b,
                                const JumpMeasureSpec& measure,
                                bool port = false) {
  if (b.rows() != space.dim() || b.cols() != space.dim()) {
    throw std::invalid_argument("make_linear_jump: matrix must be n x n");
  }
  if (port) b = detail::zero_top_rows(space, std::move(b));
  const double op = detail::operator_norm(b);
  const double lip =
      measure.intensity * measure.marks.coordinate_second_moment() * op * op;
  const double mean_scale =
      measure.intensity * measure.marks.coordinate_mean();
  return JumpMap{
      [b](const Vector& x, const Vector& eta) { return (eta[0] * b * x).eval(); },
      lip, port,
      [b, mean_scale](const Vector& x) { return (mean_scale * b * x).eval(); }};
}

/// gamma(x, eta) = eta_1 * amp * tanh(gain * x), saturating and
/// state-dependent.
inline JumpMap make_tanh_jump(const SpaceDecomposition& space, double amp,
                              double gain, const JumpMeasureSpec& measure,
                              bool port = false) {
  const double base = amp * gain;
  const double lip =
      measure.intensity * measure.marks.coordinate_second_moment() * base * base;
  const double mean_scale =
      measure.intensity * measure.marks.coordinate_mean();
  auto shape = [space, amp, gain, port](const Vector& x) {
    Vector out = amp * (gain * x.array()).tanh().matrix();
    if (port) out = detail::zero_head(space, std::move(out));
    return out;
  };
  return JumpMap{
      [shape](const Vector& x, const Vector& eta) {
        return (eta[0] * shape(x)).eval();
      },
      lip, port,
      [shape, mean_scale](const Vector& x) {
        return (mean_scale * shape(x)).eval();
      }};
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Compensator drift int_E gamma(x, eta) mu(d eta) with a standard-error
/// report. Uses the registered closed form when available; otherwise a
/// Monte-Carlo estimate over n_mc marks from rng.
struct CompensatorEstimate {
  Vector mean;
  Vector standard_error;
  bool closed_form = false;
};

inline CompensatorEstimate jump_compensator_mean(const JumpMap& jump,
                                                 const JumpMeasureSpec& measure,
                                                 const Vector& x, int n_mc,
                                                 RngStream& rng) {
  const auto n = x.size();
  if (measure.intensity == 0.0) {
    return {Vector::Zero(n), Vector::Zero(n), true};
  }
  if (jump.compensator_mean) {
    return {jump.compensator_mean(x), Vector::Zero(n), true};
  }
  if (n_mc < 1) {
    throw std::invalid_argument("jump_compensator_mean: n_mc must be >= 1");
  }
  Vector sum = Vector::Zero(n);
  Vector sum_sq = Vector::Zero(n);
  for (int i = 0; i < n_mc; ++i) {
    Vector g = jump.eval(x, measure.marks.sample(rng));
    sum += g;
    sum_sq += g.cwiseProduct(g);
  }
  Vector mean = sum / n_mc;
  Vector se = Vector::Zero(n);
  if (n_mc > 1) {
    Vector var = (sum_sq - n_mc * mean.cwiseProduct(mean)) / (n_mc - 1);
    se = (var.cwiseMax(0.0) / n_mc).cwiseSqrt();
  }
  return {measure.intensity * mean, measure.intensity * se, false};
}

using PairSampler = std::function<std::pair<Vector, Vector>(RngStream&)>;

/// Independent standard-normal pairs scaled by `scale`.
inline PairSampler gaussian_pair_sampler(int n, double scale = 1.0) {
  return [n, scale](RngStream& rng) {
    Vector x(n), y(n);
    for (int i = 0; i < n; ++i) x[i] = scale * rng.next_normal();
    for (int i = 0; i < n; ++i) y[i] = scale * rng.next_normal();
    return std::make_pair(x, y);
  };
}

struct LipschitzReport {
  double estimate = 0.0;  // max observed squared-difference ratio
  double declared = 0.0;
  bool violation = false;
  int pairs_used = 0;
};

namespace detail {

template <typename RatioFn>
LipschitzReport lipschitz_scan(double declared, int n_pairs,
                               const PairSampler& sampler, RngStream& rng,
                               RatioFn&& ratio) {
  if (n_pairs < 1) {
    throw std::invalid_argument("estimate_lipschitz: n must be >= 1");
  }
  LipschitzReport report;
  report.declared = declared;
  for (int i = 0; i < n_pairs; ++i) {
    auto [x, y] = sampler(rng);
    const double gap_sq = (x - y).squaredNorm();
    if (gap_sq == 0.0) continue;  // coincident pair: skip, not an error
    report.estimate = std::max(report.estimate, ratio(x, y) / gap_sq);
    ++report.pairs_used;
  }
  report.violation = report.estimate > declared * (1.0 + 1e-9);
  return report;
}

}  // namespace detail

/// Sampled lower bound on the squared-Lipschitz constant of a drift map.
inline LipschitzReport estimate_lipschitz(const DriftMap& map, int n_pairs,
                                          const PairSampler& sampler,
                                          RngStream& rng) {
  return detail::lipschitz_scan(
      map.lipschitz_sq, n_pairs, sampler, rng,
      [&map](const Vector& x, const Vector& y) {
        return (map.eval(x) - map.eval(y)).squaredNorm();
      });
}

/// Same for a diffusion map, in the Hilbert-Schmidt norm.
inline LipschitzReport estimate_lipschitz(const DiffusionMap& map, int n_pairs,
                                          const PairSampler& sampler,
                                          RngStream& rng) {
  return detail::lipschitz_scan(
      map.lipschitz_sq, n_pairs, sampler, rng,
      [&map](const Vector& x, const Vector& y) {
        return (map.eval(x) - map.eval(y)).squaredNorm();
      });
}

/// Same for a jump map; the mark integral is estimated with n_mc_marks
/// samples per pair.
inline LipschitzReport estimate_lipschitz(const JumpMap& map,
                                          const JumpMeasureSpec& measure,
                                          int n_pairs, int n_mc_marks,
                                          const PairSampler& sampler,
                                          RngStream& rng) {
  if (measure.intensity == 0.0) {
    LipschitzReport r;
    r.declared = map.lipschitz_sq;
    r.pairs_used = 0;
    return r;
  }
  if (n_mc_marks < 1) {
    throw std::invalid_argument("estimate_lipschitz: n_mc_marks must be >= 1");
  }
  return detail::lipschitz_scan(
      map.lipschitz_sq, n_pairs, sampler, rng,
      [&](const Vector& x, const Vector& y) {
        double acc = 0.0;
        for (int k = 0; k < n_mc_marks; ++k) {
          Vector eta = measure.marks.sample(rng);
          acc += (map.eval(x, eta) - map.eval(y, eta)).squaredNorm();
        }
        return measure.intensity * acc / n_mc_marks;
      });
}

/// Monte-Carlo estimates of int ||gamma(x,eta)||^2 mu(d eta) and
/// int ||gamma(x,eta)||^4 mu(d eta) with standard errors.
struct MomentReport {
  double second_moment = 0.0;
  double second_se = 0.0;
  double fourth_moment = 0.0;
  double fourth_se = 0.0;
  bool finite = true;
};

inline MomentReport moment_check(const JumpMap& jump,
                                 const JumpMeasureSpec& measure,
                                 const Vector& x, int n_mc, RngStream& rng) {
  if (n_mc < 2) {
    throw std::invalid_argument("moment_check: n_mc must be >= 2");
  }
  MomentReport report;
  if (measure.intensity == 0.0) return report;
  double s2 = 0.0, s2_sq = 0.0, s4 = 0.0, s4_sq = 0.0;
  for (int i = 0; i < n_mc; ++i) {
    const double nrm_sq = jump.eval(x, measure.marks.sample(rng)).squaredNorm();
    if (!std::isfinite(nrm_sq)) {
      report.finite = false;
      return report;
    }
    s2 += nrm_sq;
    s2_sq += nrm_sq * nrm_sq;
    s4 += nrm_sq * nrm_sq;
    s4_sq += nrm_sq * nrm_sq * nrm_sq * nrm_sq;
  }
  const double lam = measure.intensity;
  const double m2 = s2 / n_mc;
  const double m4 = s4 / n_mc;
  report.second_moment = lam * m2;
  report.fourth_moment = lam * m4;
  const double var2 = std::max(0.0, (s2_sq - n_mc * m2 * m2) / (n_mc - 1));
  const double var4 = std::max(0.0, (s4_sq - n_mc * m4 * m4) / (n_mc - 1));
  report.second_se = lam * std::sqrt(var2 / n_mc);
  report.fourth_se = lam * std::sqrt(var4 / n_mc);
  return report;
}

}  // namespace phstab
