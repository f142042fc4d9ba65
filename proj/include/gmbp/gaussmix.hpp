#ifndef GMBP_GAUSSMIX_HPP_
#define GMBP_GAUSSMIX_HPP_

// Weighted Gaussian mixtures over small ordered variable sets, stored in
// canonical (precision / information) form.
//
// A component with log weight w, precision L, information vector h and
// cached quadratic q = m'Lm (m any solution of Lm = h) has density
//
//   exp(w) * exp(-(x - m)' L (x - m)) = exp(w - q - x'Lx + 2h'x).
//
// There is no factor 1/2 in the exponent and no normalizing constant: the
// potentials built from lifted filter experts are unnormalized, and their
// precisions are routinely singular (flat along the uniform-gray direction).
// Caching q keeps the density well defined when L is singular.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gmbp/error.hpp"

namespace gmbp {

using VarId = std::int64_t;

// Sorted, duplicate-free list of variable identifiers.
class VarSet {
 public:
  VarSet() = default;
  VarSet(std::initializer_list<VarId> ids) : VarSet(std::vector<VarId>(ids)) {}
  explicit VarSet(std::vector<VarId> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
      throw Error(ErrorKind::InvalidArgument, "VarSet contains duplicate ids");
    }
  }

  static VarSet range(VarId n) {
    std::vector<VarId> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), VarId{0});
    return VarSet(std::move(ids));
  }

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  VarId operator[](std::size_t i) const { return ids_[i]; }
  const std::vector<VarId>& ids() const { return ids_; }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }

  std::optional<std::size_t> index_of(VarId id) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - ids_.begin());
  }
  bool contains(VarId id) const { return index_of(id).has_value(); }
  bool is_subset_of(const VarSet& other) const {
    return std::includes(other.ids_.begin(), other.ids_.end(), ids_.begin(),
                         ids_.end());
  }

  friend bool operator==(const VarSet&, const VarSet&) = default;

  friend VarSet set_union(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                   std::back_inserter(out.ids_));
    return out;
  }
  friend VarSet set_intersection(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out.ids_));
    return out;
  }
  friend VarSet set_difference(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out.ids_));
    return out;
  }

 private:
  std::vector<VarId> ids_;
};

std::string to_string(const VarSet& vars);

// Counts of (n x n)*(n x 1) products and n x n inversions, keyed by n.
struct OpCounts {
  std::uint64_t multiplications = 0;
  std::uint64_t inversions = 0;
  friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

class OpCounter {
 public:
  void multiply(Eigen::Index n, std::uint64_t times = 1) {
    counts_[n].multiplications += times;
  }
  void invert(Eigen::Index n, std::uint64_t times = 1) {
    counts_[n].inversions += times;
  }
  void merge(const OpCounter& other) {
    for (const auto& [n, c] : other.counts_) {
      counts_[n].multiplications += c.multiplications;
      counts_[n].inversions += c.inversions;
    }
  }
  void reset() { counts_.clear(); }
  OpCounts at(Eigen::Index n) const {
    auto it = counts_.find(n);
    return it == counts_.end() ? OpCounts{} : it->second;
  }
  const std::map<Eigen::Index, OpCounts>& by_dimension() const {
    return counts_;
  }
  friend bool operator==(const OpCounter&, const OpCounter&) = default;

 private:
  std::map<Eigen::Index, OpCounts> counts_;
};

// Exact keeps pointwise density semantics through product and
// marginalization. PaperFaithful multiplies raw importances in products and
// leaves them untouched under marginalization.
enum class WeightMode { Exact, PaperFaithful };

const char* to_string(WeightMode mode);

template <typename Scalar>
struct GaussianComponent {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar log_weight{0};
  Matrix precision;
  Vector info;
  Scalar mean_quad{0};

  Eigen::Index dimension() const { return info.size(); }

  Scalar log_density(const Vector& x) const {
    return log_weight - mean_quad - x.dot(precision * x) + Scalar(2) * info.dot(x);
  }

  bool is_flat() const {
    return precision.isZero(Scalar(0)) && info.isZero(Scalar(0)) &&
           mean_quad == Scalar(0);
  }
};

template <typename Scalar>
struct GaussianMixture {
  using Component = GaussianComponent<Scalar>;

  VarSet vars;
  std::vector<Component> components;

  std::size_t size() const { return components.size(); }
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(vars.size()); }
};

using Component = GaussianComponent<double>;
using Mixture = GaussianMixture<double>;

template <typename Scalar>
struct MomentForm {
  typename GaussianComponent<Scalar>::Vector mean;
  typename GaussianComponent<Scalar>::Matrix covariance;
};

namespace detail {

template <typename Scalar>
using Mat = typename GaussianComponent<Scalar>::Matrix;
template <typename Scalar>
using Vec = typename GaussianComponent<Scalar>::Vector;

inline constexpr double kPinvRelativeTolerance = 1e-12;

// Minimum-norm solution of L m = h for symmetric PSD L. Counted as one
// inversion and one multiplication of dimension n.
template <typename Scalar>
Vec<Scalar> psd_solve(const Mat<Scalar>& precision, const Vec<Scalar>& info,
                      OpCounter* counter) {
  const Eigen::Index n = precision.rows();
  if (counter) {
    counter->invert(n);
    counter->multiply(n);
  }
  if (n == 0) return Vec<Scalar>();
  Eigen::LLT<Mat<Scalar>> llt(precision);
  if (llt.info() == Eigen::Success) {
    const auto diag = llt.matrixL().toDenseMatrix().diagonal().cwiseAbs2();
    if (diag.minCoeff() > Scalar(1e-10) * diag.maxCoeff()) {
      return llt.solve(info);
    }
  }
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(precision);
  const Vec<Scalar>& values = eig.eigenvalues();
  const Scalar cutoff = Scalar(kPinvRelativeTolerance) * Scalar(n) *
                        std::max(values.cwiseAbs().maxCoeff(), Scalar(0));
  Vec<Scalar> projected = eig.eigenvectors().transpose() * info;
  for (Eigen::Index i = 0; i < n; ++i) {
    projected(i) = values(i) > cutoff ? projected(i) / values(i) : Scalar(0);
  }
  return eig.eigenvectors() * projected;
}

template <typename Scalar>
std::vector<Eigen::Index> positions_in(const VarSet& sub, const VarSet& super) {
  std::vector<Eigen::Index> pos;
  pos.reserve(sub.size());
  for (VarId id : sub) {
    auto idx = super.index_of(id);
    if (!idx) {
      throw Error(ErrorKind::InvalidArgument,
                  "variable " + std::to_string(id) + " not in " + to_string(super));
    }
    pos.push_back(static_cast<Eigen::Index>(*idx));
  }
  return pos;
}

// Zero-pad a component over `from` into the larger variable set `to`.
template <typename Scalar>
GaussianComponent<Scalar> pad(const GaussianComponent<Scalar>& c,
                              const std::vector<Eigen::Index>& pos,
                              Eigen::Index n) {
  if (static_cast<Eigen::Index>(pos.size()) == n) return c;
  GaussianComponent<Scalar> out;
  out.log_weight = c.log_weight;
  out.mean_quad = c.mean_quad;
  out.precision = Mat<Scalar>::Zero(n, n);
  out.info = Vec<Scalar>::Zero(n);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    out.info(pos[i]) = c.info(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < pos.size(); ++j) {
      out.precision(pos[i], pos[j]) =
          c.precision(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

template <typename Scalar>
Mat<Scalar> submatrix(const Mat<Scalar>& m, const std::vector<Eigen::Index>& rows,
                      const std::vector<Eigen::Index>& cols) {
  Mat<Scalar> out(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

template <typename Scalar>
Vec<Scalar> subvector(const Vec<Scalar>& v, const std::vector<Eigen::Index>& idx) {
  Vec<Scalar> out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

template <typename Scalar>
Scalar log_sum_exp(const std::vector<Scalar>& terms) {
  if (terms.empty()) return -std::numeric_limits<Scalar>::infinity();
  const Scalar peak = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(static_cast<double>(peak))) return peak;
  Scalar sum = 0;
  for (Scalar t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum);
}

}  // namespace detail

// Builds a component from precision and information; the quadratic term is
// recovered with a pseudo-inverse so singular precisions are allowed.
template <typename Scalar>
GaussianComponent<Scalar> make_canonical(Scalar log_weight,
                                         detail::Mat<Scalar> precision,
                                         detail::Vec<Scalar> info,
                                         OpCounter* counter = nullptr) {
  if (precision.rows() != precision.cols() || precision.rows() != info.size()) {
    throw Error(ErrorKind::DimensionMismatch, "precision/info shape mismatch");
  }
  GaussianComponent<Scalar> c;
  c.log_weight = log_weight;
  const detail::Vec<Scalar> mean = detail::psd_solve<Scalar>(precision, info, counter);
  c.mean_quad = info.dot(mean);
  c.precision = std::move(precision);
  c.info = std::move(info);
  return c;
}

// Builds a component from precision and any mean representative.
template <typename Scalar>
GaussianComponent<Scalar> from_mean(Scalar log_weight, detail::Mat<Scalar> precision,
                                    const detail::Vec<Scalar>& mean) {
  if (precision.rows() != precision.cols() || precision.rows() != mean.size()) {
    throw Error(ErrorKind::DimensionMismatch, "precision/mean shape mismatch");
  }
  GaussianComponent<Scalar> c;
  c.log_weight = log_weight;
  c.info = precision * mean;
  c.mean_quad = mean.dot(c.info);
  c.precision = std::move(precision);
  return c;
}

template <typename Scalar>
GaussianComponent<Scalar> from_moments(Scalar log_weight, const detail::Vec<Scalar>& mean,
                                       const detail::Mat<Scalar>& covariance) {
  Eigen::LLT<detail::Mat<Scalar>> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Numerical, "covariance is not positive definite");
  }
  const detail::Mat<Scalar> precision =
      llt.solve(detail::Mat<Scalar>::Identity(covariance.rows(), covariance.cols()));
  return from_mean<Scalar>(log_weight, (precision + precision.transpose()) / Scalar(2), mean);
}

// Moment form; adds ridge*I to the precision when its smallest eigenvalue is
// below `ridge`.
template <typename Scalar>
MomentForm<Scalar> to_moments(const GaussianComponent<Scalar>& c, Scalar ridge = Scalar(1e-6)) {
  Eigen::SelfAdjointEigenSolver<detail::Mat<Scalar>> eig(c.precision);
  detail::Vec<Scalar> values = eig.eigenvalues();
  if (values.size() > 0 && values.minCoeff() < ridge) values.array() += ridge;
  if (values.size() > 0 && values.minCoeff() <= Scalar(0)) {
    throw Error(ErrorKind::Numerical, "precision is singular and ridge is zero");
  }
  MomentForm<Scalar> out;
  out.covariance = eig.eigenvectors() * values.cwiseInverse().asDiagonal() *
                   eig.eigenvectors().transpose();
  out.mean = out.covariance * c.info;
  return out;
}

template <typename Scalar>
GaussianMixture<Scalar> uniform_mixture(const VarSet& vars) {
  const auto n = static_cast<Eigen::Index>(vars.size());
  GaussianComponent<Scalar> c;
  c.precision = detail::Mat<Scalar>::Zero(n, n);
  c.info = detail::Vec<Scalar>::Zero(n);
  return GaussianMixture<Scalar>{vars, {std::move(c)}};
}

template <typename Scalar>
bool is_uniform(const GaussianMixture<Scalar>& m) {
  return m.components.size() == 1 && m.components.front().is_flat();
}

template <typename Scalar>
Scalar log_density(const GaussianMixture<Scalar>& m, const detail::Vec<Scalar>& x) {
  if (x.size() != m.dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                "point has dimension " + std::to_string(x.size()) + ", mixture has " +
                    std::to_string(m.dimension()));
  }
  std::vector<Scalar> terms;
  terms.reserve(m.components.size());
  for (const auto& c : m.components) terms.push_back(c.log_density(x));
  return detail::log_sum_exp(terms);
}

template <typename Scalar>
Scalar density(const GaussianMixture<Scalar>& m, const detail::Vec<Scalar>& x) {
  return std::exp(log_density(m, x));
}

// Shifts log weights so that the largest is zero.
template <typename Scalar>
GaussianMixture<Scalar> normalize(GaussianMixture<Scalar> m) {
  if (m.components.empty()) return m;
  Scalar peak = m.components.front().log_weight;
  for (const auto& c : m.components) peak = std::max(peak, c.log_weight);
  if (!std::isfinite(static_cast<double>(peak))) {
    throw Error(ErrorKind::Numerical, "mixture has no finite log weight");
  }
  for (auto& c : m.components) c.log_weight -= peak;
  return m;
}

// Pairwise product over the union of both variable sets; |a|*|b| components.
template <typename Scalar>
GaussianMixture<Scalar> product(const GaussianMixture<Scalar>& a,
                                const GaussianMixture<Scalar>& b,
                                WeightMode mode = WeightMode::Exact,
                                OpCounter* counter = nullptr) {
  GaussianMixture<Scalar> out;
  out.vars = set_union(a.vars, b.vars);
  const auto n = out.dimension();
  const auto pos_a = detail::positions_in<Scalar>(a.vars, out.vars);
  const auto pos_b = detail::positions_in<Scalar>(b.vars, out.vars);

  std::vector<GaussianComponent<Scalar>> pa, pb;
  pa.reserve(a.size());
  pb.reserve(b.size());
  for (const auto& c : a.components) pa.push_back(detail::pad(c, pos_a, n));
  for (const auto& c : b.components) pb.push_back(detail::pad(c, pos_b, n));

  out.components.reserve(a.size() * b.size());
  for (const auto& ca : pa) {
    for (const auto& cb : pb) {
      if (ca.is_flat() || cb.is_flat()) {
        GaussianComponent<Scalar> c = ca.is_flat() ? cb : ca;
        c.log_weight = ca.log_weight + cb.log_weight;
        out.components.push_back(std::move(c));
        continue;
      }
      GaussianComponent<Scalar> c =
          make_canonical<Scalar>(ca.log_weight + cb.log_weight, ca.precision + cb.precision,
                                 ca.info + cb.info, counter);
      if (mode == WeightMode::Exact) {
        c.log_weight += c.mean_quad - ca.mean_quad - cb.mean_quad;
      }
      out.components.push_back(std::move(c));
    }
  }
  return out;
}

// Marginal onto `keep` via moment-form sub-block extraction.
template <typename Scalar>
GaussianMixture<Scalar> marginalize(const GaussianMixture<Scalar>& m, const VarSet& keep,
                                    WeightMode mode = WeightMode::Exact,
                                    Scalar ridge = Scalar(1e-6),
                                    OpCounter* counter = nullptr) {
  if (keep.empty()) throw Error(ErrorKind::InvalidArgument, "marginalize onto empty set");
  if (!keep.is_subset_of(m.vars)) {
    throw Error(ErrorKind::InvalidArgument,
                to_string(keep) + " is not a subset of " + to_string(m.vars));
  }
  if (keep == m.vars) return m;

  const auto kept = detail::positions_in<Scalar>(keep, m.vars);
  const auto eliminated = detail::positions_in<Scalar>(set_difference(m.vars, keep), m.vars);
  const auto n = m.dimension();
  const auto k = static_cast<Eigen::Index>(kept.size());
  const Scalar log_pi = std::log(Scalar(3.14159265358979323846264338327950288L));

  GaussianMixture<Scalar> out;
  out.vars = keep;
  out.components.reserve(m.size());
  for (const auto& c : m.components) {
    Eigen::SelfAdjointEigenSolver<detail::Mat<Scalar>> eig(c.precision);
    detail::Vec<Scalar> values = eig.eigenvalues();
    if (values.minCoeff() < ridge) values.array() += ridge;
    if (values.minCoeff() <= Scalar(0)) {
      throw Error(ErrorKind::Numerical, "singular precision in marginalize with zero ridge");
    }
    if (counter) {
      counter->invert(n);
      counter->multiply(n);
    }
    const detail::Mat<Scalar> covariance = eig.eigenvectors() *
                                           values.cwiseInverse().asDiagonal() *
                                           eig.eigenvectors().transpose();
    const detail::Vec<Scalar> mean = covariance * c.info;

    const detail::Mat<Scalar> cov_kk = detail::submatrix<Scalar>(covariance, kept, kept);
    const detail::Vec<Scalar> mean_k = detail::subvector<Scalar>(mean, kept);
    Eigen::LLT<detail::Mat<Scalar>> llt(cov_kk);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::Numerical, "marginal covariance is not positive definite");
    }
    if (counter) {
      counter->invert(k);
      counter->multiply(k);
    }
    detail::Mat<Scalar> precision_k = llt.solve(detail::Mat<Scalar>::Identity(k, k));
    precision_k = (precision_k + precision_k.transpose()) / Scalar(2);

    GaussianComponent<Scalar> r;
    r.info = precision_k * mean_k;
    r.mean_quad = mean_k.dot(r.info);
    r.precision = std::move(precision_k);
    r.log_weight = c.log_weight;
    if (mode == WeightMode::Exact) {
      // log det of the eliminated precision block via the Schur identity
      // det(L_ee) = det(L) * det(S_kk).
      Scalar log_det_cov_kk = 0;
      const auto& lower = llt.matrixLLT();
      for (Eigen::Index i = 0; i < k; ++i) log_det_cov_kk += Scalar(2) * std::log(lower(i, i));
      const Scalar log_det_ee = values.array().log().sum() + log_det_cov_kk;
      const auto dropped = static_cast<Scalar>(eliminated.size());
      r.log_weight += -c.mean_quad + mean.dot(c.info) +
                      Scalar(0.5) * (dropped * log_pi - log_det_ee);
    }
    out.components.push_back(std::move(r));
  }
  return out;
}

// Restricts every component to the slice x_observed = values, exactly, in
// canonical form (no inversion of the observed covariance block).
template <typename Scalar>
GaussianMixture<Scalar> condition(const GaussianMixture<Scalar>& m, const VarSet& observed,
                                  const std::vector<Scalar>& values,
                                  OpCounter* counter = nullptr) {
  if (observed.empty()) throw Error(ErrorKind::InvalidArgument, "nothing observed");
  if (!observed.is_subset_of(m.vars)) {
    throw Error(ErrorKind::InvalidArgument,
                to_string(observed) + " is not a subset of " + to_string(m.vars));
  }
  if (observed.size() == m.vars.size()) {
    throw Error(ErrorKind::InvalidArgument, "all variables observed");
  }
  if (values.size() != observed.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one value per observed variable required");
  }
  const VarSet unknown = set_difference(m.vars, observed);
  const auto u = detail::positions_in<Scalar>(unknown, m.vars);
  const auto o = detail::positions_in<Scalar>(observed, m.vars);
  const auto x_o = Eigen::Map<const detail::Vec<Scalar>>(values.data(),
                                                         static_cast<Eigen::Index>(values.size()));

  GaussianMixture<Scalar> out;
  out.vars = unknown;
  out.components.reserve(m.size());
  for (const auto& c : m.components) {
    const detail::Mat<Scalar> l_uu = detail::submatrix<Scalar>(c.precision, u, u);
    const detail::Mat<Scalar> l_uo = detail::submatrix<Scalar>(c.precision, u, o);
    const detail::Mat<Scalar> l_oo = detail::submatrix<Scalar>(c.precision, o, o);
    const detail::Vec<Scalar> h_u = detail::subvector<Scalar>(c.info, u);
    const detail::Vec<Scalar> h_o = detail::subvector<Scalar>(c.info, o);
    if (counter) {
      counter->multiply(static_cast<Eigen::Index>(u.size()));
      counter->multiply(static_cast<Eigen::Index>(o.size()));
    }
    const Scalar slice = -x_o.dot(l_oo * x_o) + Scalar(2) * h_o.dot(x_o);
    GaussianComponent<Scalar> r =
        make_canonical<Scalar>(c.log_weight, l_uu, h_u - l_uo * x_o, counter);
    r.log_weight += slice - c.mean_quad + r.mean_quad;
    out.components.push_back(std::move(r));
  }
  return out;
}

// Keeps the `max_components` heaviest components (ties: lower index first),
// in descending weight order, then normalizes.
template <typename Scalar>
GaussianMixture<Scalar> prune(const GaussianMixture<Scalar>& m, std::size_t max_components) {
  if (max_components < 1) throw Error(ErrorKind::InvalidArgument, "pruning cap must be >= 1");
  std::vector<std::size_t> order(m.components.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return m.components[i].log_weight > m.components[j].log_weight;
  });
  order.resize(std::min(order.size(), max_components));
  GaussianMixture<Scalar> out;
  out.vars = m.vars;
  out.components.reserve(order.size());
  for (std::size_t i : order) out.components.push_back(m.components[i]);
  return normalize(std::move(out));
}

// Renames the variables of a mixture; order (and so the matrix layout) must
// be preserved, which holds when both sets are listed in the same relative order.
template <typename Scalar>
GaussianMixture<Scalar> relabel(GaussianMixture<Scalar> m, VarSet vars) {
  if (vars.size() != m.vars.size()) {
    throw Error(ErrorKind::DimensionMismatch, "relabel changes the variable count");
  }
  m.vars = std::move(vars);
  return m;
}

// Most likely gray level of a one-variable mixture.
template <typename Scalar>
int mode_scan(const GaussianMixture<Scalar>& m) {
  if (m.vars.size() != 1) {
    throw Error(ErrorKind::InvalidArgument, "mode_scan needs a univariate mixture");
  }
  if (m.components.size() == 1 && m.components.front().precision(0, 0) > Scalar(0)) {
    const auto& c = m.components.front();
    const double mean = static_cast<double>(c.info(0) / c.precision(0, 0));
    if (!std::isfinite(mean)) throw Error(ErrorKind::Numerical, "non-finite mean");
    const double clamped = std::clamp(mean, 0.0, 255.0);
    double level = std::floor(clamped);
    if (clamped - level > 0.5) level += 1.0;
    return static_cast<int>(level);
  }
  int best = 0;
  Scalar best_value = -std::numeric_limits<Scalar>::infinity();
  detail::Vec<Scalar> x(1);
  for (int level = 0; level < 256; ++level) {
    x(0) = Scalar(level);
    const Scalar v = log_density(m, x);
    if (v > best_value) {
      best_value = v;
      best = level;
    }
  }
  return best;
}

}  // namespace gmbp

#endif  // GMBP_GAUSSMIX_HPP_
