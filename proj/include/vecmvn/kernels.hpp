#pragma once

// Covariance models: Matern kernels with half-integer smoothness over
// euclidean or chordal distances, the exchangeable constant-correlation
// family, and user-supplied dense matrices. Entries are produced on
// demand; nothing here stores an n x n matrix except the dense family.

#include "vecmvn/common.hpp"

#include <cmath>
#include <utility>

namespace vecmvn {

enum class KernelFamily {
  kMatern05,
  kMatern15,
  kMatern25,
  kConstantCorrelation,
  kDenseMatrix,
};

enum class DistanceMetric { kEuclidean, kChordal };

inline constexpr double kEarthRadiusKm = 6371.0088;

struct CovarianceModel {
  KernelFamily family = KernelFamily::kMatern15;
  double variance = 1.0;  // sigma^2
  double nugget = 0.0;    // tau^2, added on the diagonal
  Vector ranges;          // one entry, or one per coordinate group
  Matrix locations;       // n x d
  DistanceMetric metric = DistanceMetric::kEuclidean;
  double rho = 0.0;       // constant-correlation family
  Matrix dense;           // dense-matrix family
  Eigen::Index n = 0;     // rows of locations/dense

  static CovarianceModel matern(KernelFamily family, double variance, Vector ranges,
                                double nugget, Matrix locations,
                                DistanceMetric metric = DistanceMetric::kEuclidean) {
    CovarianceModel m;
    m.family = family;
    m.variance = variance;
    m.ranges = std::move(ranges);
    m.nugget = nugget;
    m.locations = std::move(locations);
    m.metric = metric;
    m.n = m.locations.rows();
    m.validate();
    return m;
  }

  static CovarianceModel constant_correlation(Eigen::Index n, double rho) {
    CovarianceModel m;
    m.family = KernelFamily::kConstantCorrelation;
    m.rho = rho;
    m.n = n;
    m.validate();
    return m;
  }

  static CovarianceModel identity(Eigen::Index n) { return constant_correlation(n, 0.0); }

  static CovarianceModel dense_matrix(Matrix sigma, double nugget = 0.0) {
    CovarianceModel m;
    m.family = KernelFamily::kDenseMatrix;
    m.dense = std::move(sigma);
    m.nugget = nugget;
    m.n = m.dense.rows();
    m.validate();
    return m;
  }

  void validate() const {
    if (n < 1) throw parameter_error("covariance model: empty input");
    switch (family) {
      case KernelFamily::kConstantCorrelation:
        if (!(rho > -1.0 / static_cast<double>(n > 1 ? n - 1 : 1) && rho < 1.0))
          throw parameter_error("constant correlation must lie in (-1/(n-1), 1)");
        break;
      case KernelFamily::kDenseMatrix:
        if (dense.rows() != dense.cols())
          throw parameter_error("dense covariance must be square");
        break;
      default:
        if (!(variance > 0.0)) throw parameter_error("variance must be positive");
        if (nugget < 0.0) throw parameter_error("nugget must be nonnegative");
        if (ranges.size() < 1) throw parameter_error("at least one range required");
        for (Eigen::Index g = 0; g < ranges.size(); ++g)
          if (!(ranges[g] > 0.0)) throw parameter_error("ranges must be positive");
        if (locations.rows() != n || locations.cols() < 1)
          throw parameter_error("locations must be n x d");
        if (metric == DistanceMetric::kChordal && locations.cols() < 2)
          throw parameter_error("chordal metric needs lon/lat columns");
        if (ranges.size() != 1 && metric == DistanceMetric::kEuclidean &&
            ranges.size() != locations.cols())
          throw parameter_error("euclidean ranges: give 1 or d entries");
        if (ranges.size() > 2 && metric == DistanceMetric::kChordal)
          throw parameter_error("chordal ranges: give 1 (all) or 2 (space, time)");
        break;
    }
  }

  bool is_kernel_family() const {
    return family != KernelFamily::kConstantCorrelation &&
           family != KernelFamily::kDenseMatrix;
  }

  void check_index(Eigen::Index i) const {
    if (i < 0 || i >= n) throw index_error("covariance index out of range");
  }
};

namespace detail {

inline double chord_km(double lon1, double lat1, double lon2, double lat2) {
  constexpr double kDeg = 0.017453292519943295;
  lon1 *= kDeg; lat1 *= kDeg; lon2 *= kDeg; lat2 *= kDeg;
  const double x = std::cos(lat1) * std::cos(lon1) - std::cos(lat2) * std::cos(lon2);
  const double y = std::cos(lat1) * std::sin(lon1) - std::cos(lat2) * std::sin(lon2);
  const double z = std::sin(lat1) - std::sin(lat2);
  return kEarthRadiusKm * std::sqrt(x * x + y * y + z * z);
}

// Distance after dividing each coordinate group by its range. With a
// single shared range the division is skipped so the value is the raw
// euclidean/chordal distance (neighbor order is unaffected).
inline double group_distance(const CovarianceModel& m, Eigen::Index i, Eigen::Index j,
                             bool scale_by_range) {
  const auto& S = m.locations;
  const Eigen::Index d = S.cols();
  if (m.metric == DistanceMetric::kChordal) {
    const double chord = chord_km(S(i, 0), S(i, 1), S(j, 0), S(j, 1));
    double acc;
    if (m.ranges.size() == 1) {
      acc = chord * chord;
      for (Eigen::Index k = 2; k < d; ++k) {
        const double dk = S(i, k) - S(j, k);
        acc += dk * dk;
      }
      return scale_by_range ? std::sqrt(acc) / m.ranges[0] : std::sqrt(acc);
    }
    const double cs = chord / m.ranges[0];
    acc = cs * cs;
    for (Eigen::Index k = 2; k < d; ++k) {
      const double dk = (S(i, k) - S(j, k)) / m.ranges[1];
      acc += dk * dk;
    }
    return std::sqrt(acc);
  }
  double acc = 0.0;
  if (m.ranges.size() == 1) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const double dk = S(i, k) - S(j, k);
      acc += dk * dk;
    }
    return scale_by_range ? std::sqrt(acc) / m.ranges[0] : std::sqrt(acc);
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    const double dk = (S(i, k) - S(j, k)) / m.ranges[k];
    acc += dk * dk;
  }
  return std::sqrt(acc);
}

inline double matern_correlation(KernelFamily family, double t) {
  switch (family) {
    case KernelFamily::kMatern05:
      return std::exp(-t);
    case KernelFamily::kMatern15: {
      const double s = 1.7320508075688772 * t;  // sqrt(3) t
      return (1.0 + s) * std::exp(-s);
    }
    case KernelFamily::kMatern25: {
      const double s = 2.23606797749979 * t;  // sqrt(5) t
      return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    default:
      throw parameter_error("not a Matern family");
  }
}

}  // namespace detail

// Sigma_ij, including the nugget on the diagonal.
inline double kernel_value(const CovarianceModel& m, Eigen::Index i, Eigen::Index j) {
  m.check_index(i);
  m.check_index(j);
  switch (m.family) {
    case KernelFamily::kConstantCorrelation:
      return i == j ? 1.0 : m.rho;
    case KernelFamily::kDenseMatrix:
      return m.dense(i, j) + (i == j ? m.nugget : 0.0);
    default: {
      if (i == j) return m.variance + m.nugget;
      const double t = detail::group_distance(m, i, j, /*scale_by_range=*/true);
      return m.variance * detail::matern_correlation(m.family, t);
    }
  }
}

// (1 - |rho_ij|)^{1/2} with rho_ij the correlation implied by Sigma.
inline double correlation_distance(const CovarianceModel& m, Eigen::Index i, Eigen::Index j) {
  if (i == j) return 0.0;
  const double sii = kernel_value(m, i, i);
  const double sjj = kernel_value(m, j, j);
  const double rho = kernel_value(m, i, j) / std::sqrt(sii * sjj);
  const double one_minus = 1.0 - std::abs(rho);
  return std::sqrt(one_minus > 0.0 ? one_minus : 0.0);
}

// Metric used for nearest-neighbor conditioning sets: coordinate
// distance for kernel families, correlation distance otherwise.
inline double neighbor_distance(const CovarianceModel& m, Eigen::Index i, Eigen::Index j) {
  m.check_index(i);
  m.check_index(j);
  if (i == j) return 0.0;
  if (m.is_kernel_family())
    return detail::group_distance(m, i, j, /*scale_by_range=*/m.ranges.size() > 1);
  return correlation_distance(m, i, j);
}

// Row/column permutation of the model: entry (i, j) of the result equals
// entry (order[i], order[j]) of the input.
inline CovarianceModel permute_model(const CovarianceModel& m, const std::vector<int>& order) {
  CovarianceModel out = m;
  const Eigen::Index n = m.n;
  if (static_cast<Eigen::Index>(order.size()) != n)
    throw parameter_error("permutation size mismatch");
  if (m.family == KernelFamily::kDenseMatrix) {
    out.dense.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) out.dense(i, j) = m.dense(order[i], order[j]);
  } else if (m.is_kernel_family()) {
    out.locations.resize(n, m.locations.cols());
    for (Eigen::Index i = 0; i < n; ++i) out.locations.row(i) = m.locations.row(order[i]);
  }
  return out;
}

}  // namespace vecmvn
