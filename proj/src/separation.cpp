#include "vigil/separation.hpp"

#include "vigil/error.hpp"
#include "vigil/stats.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace vigil {

namespace {

std::span<const double> view(const Signal& s) { return {s.data(), static_cast<std::size_t>(s.size())}; }

Matrix symmetric_decorrelation(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * w;
}

Matrix stack(const Signal& a, const Signal& b) {
  Matrix x(2, a.size());
  x.row(0) = a.transpose();
  x.row(1) = b.transpose();
  return x;
}

std::string deltas_text(const Eigen::VectorXd& d) {
  std::ostringstream out;
  out.precision(2);
  for (Eigen::Index i = 0; i < d.size(); ++i) out << (i ? " " : "") << d[i];
  return out.str();
}
}  // namespace

const Signal& ForeheadQuad::channel(int number) const {
  switch (number) {
    case 4: return ch4;
    case 5: return ch5;
    case 6: return ch6;
    case 7: return ch7;
    default: throw Error(ErrorCode::InvalidConfig, "forehead channel numbers are 4..7, got " + std::to_string(number));
  }
}

void validate(const ForeheadQuad& quad) {
  const auto n = quad.ch4.size();
  if (quad.ch5.size() != n || quad.ch6.size() != n || quad.ch7.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "forehead channels differ in length");
  }
  if (!(quad.sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidRecording, "forehead sample rate must be positive");
}

ForeheadQuad quad_from_recording(const MultichannelRecording& rec) {
  validate(rec);
  ForeheadQuad quad{rec.channel("ch4"), rec.channel("ch5"), rec.channel("ch6"), rec.channel("ch7"), rec.sample_rate_hz};
  return quad;
}

MultichannelRecording quad_to_recording(const ForeheadQuad& quad) {
  validate(quad);
  Matrix samples(4, quad.ch4.size());
  samples.row(0) = quad.ch4.transpose();
  samples.row(1) = quad.ch5.transpose();
  samples.row(2) = quad.ch6.transpose();
  samples.row(3) = quad.ch7.transpose();
  return make_recording(std::move(samples), {"ch4", "ch5", "ch6", "ch7"}, quad.sample_rate_hz);
}

std::string_view to_string(SeparationMethod method) {
  switch (method) {
    case SeparationMethod::Minus: return "minus";
    case SeparationMethod::Ica: return "ica";
    case SeparationMethod::IcaMinus: return "ica-minus";
  }
  return "unknown";
}

SeparationMethod parse_separation_method(std::string_view text) {
  if (text == "minus") return SeparationMethod::Minus;
  if (text == "ica") return SeparationMethod::Ica;
  if (text == "ica-minus" || text == "ica_minus") return SeparationMethod::IcaMinus;
  throw Error(ErrorCode::InvalidConfig, "unknown separation method '" + std::string(text) + "'");
}

UnmixingResult fastica(const Matrix& x, int n_components, std::uint64_t seed, const FastIcaOptions& options) {
  const Eigen::Index m = x.rows();
  const Eigen::Index t = x.cols();
  if (m < 2) throw Error(ErrorCode::InvalidConfig, "fastica needs at least two channels");
  if (n_components < 1 || n_components > m) throw Error(ErrorCode::InvalidConfig, "n_components must be in [1, channels]");
  if (t < 10 * m) throw Error(ErrorCode::SignalTooShort, "fastica needs at least 10 samples per channel");

  UnmixingResult result;
  result.mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - result.mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(t);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  if (!(values(0) > 1e-12 * std::max(values(m - 1), 1e-300))) {
    throw Error(ErrorCode::RankDeficient, "input covariance is singular after centering");
  }
  const Eigen::Index n = n_components;
  Matrix whitening(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = m - 1 - i;
    whitening.row(i) = eig.eigenvectors().col(src).transpose() / std::sqrt(values(src));
  }
  const Matrix z = whitening * centered;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) w(i, j) = normal(rng);
  w = symmetric_decorrelation(w);

  const double inv_t = 1.0 / static_cast<double>(t);
  double delta = std::numeric_limits<double>::infinity();
  Eigen::VectorXd row_delta = Eigen::VectorXd::Constant(n, delta);
  const Eigen::Index needed =
      options.min_converged_rows > 0 ? std::min<Eigen::Index>(options.min_converged_rows, n) : n;
  const auto converged_rows = [&] { return (row_delta.array() < options.tolerance).count(); };
  int iter = 0;
  while (iter < options.max_iterations) {
    const Eigen::ArrayXXd g = (w * z).array().tanh();
    const Eigen::VectorXd g_prime_mean = (1.0 - g.square()).rowwise().mean().matrix();
    Matrix w_next = g.matrix() * z.transpose() * inv_t - g_prime_mean.asDiagonal() * w;
    w_next = symmetric_decorrelation(w_next);
    row_delta = ((w_next * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().matrix();
    delta = row_delta.maxCoeff();
    w = w_next;
    ++iter;
    if (converged_rows() == n) break;
  }
  if (needed < n && converged_rows() < n) {
    // Rows spanning a Gaussian subspace keep rotating and, through the
    // symmetric step, drag the others. Refine one unit at a time instead,
    // most settled first, each kept orthogonal to the units already accepted.
    // A unit that does not settle waits until the others are done.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n)), settled, waiting;
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return row_delta[a] < row_delta[b]; });
    const auto run_unit = [&](Eigen::Index u) {
      const auto project = [&](Eigen::RowVectorXd v) {
        for (Eigen::Index j : settled) v -= v.dot(w.row(j)) * w.row(j);
        return Eigen::RowVectorXd(v.normalized());
      };
      Eigen::RowVectorXd wu = project(w.row(u));
      int k = 0;
      while (k < options.max_iterations) {
        const Eigen::ArrayXd g = (wu * z).array().tanh();
        const Eigen::RowVectorXd next = project((z * g.matrix()).transpose() * inv_t - (1.0 - g.square()).mean() * wu);
        row_delta[u] = std::abs(std::abs(next.dot(wu)) - 1.0);
        wu = next;
        ++k;
        if (row_delta[u] < options.tolerance) break;
      }
      w.row(u) = wu;
      iter += k;
    };
    for (Eigen::Index u : order) {
      run_unit(u);
      (row_delta[u] < options.tolerance ? settled : waiting).push_back(u);
    }
    for (Eigen::Index u : waiting) {
      run_unit(u);
      settled.push_back(u);
    }
    delta = row_delta.maxCoeff();
  }
  if (converged_rows() < needed) {
    throw Error(ErrorCode::ConvergenceFailure, "fastica did not converge after " + std::to_string(iter) +
                                                   " iterations (row deltas " + deltas_text(row_delta) + ")");
  }

  result.unmixing = w * whitening;
  result.components = result.unmixing * centered;
  if (n == m) {
    result.mixing_inverse = result.unmixing.inverse();
  } else {
    result.mixing_inverse = result.unmixing.completeOrthogonalDecomposition().pseudoInverse();
  }
  result.iterations = iter;
  result.final_delta = delta;
  result.row_delta = row_delta;
  return result;
}

AlignedComponent align_component(const Matrix& components, const Signal& reference) {
  if (components.cols() != reference.size()) {
    throw Error(ErrorCode::LengthMismatch, "components and reference differ in length");
  }
  AlignedComponent best;
  double best_abs = -1.0;
  for (Eigen::Index r = 0; r < components.rows(); ++r) {
    const Signal row = components.row(r).transpose();
    const double c = stats::pearson(view(row), view(reference));
    if (std::abs(c) > best_abs) {
      best_abs = std::abs(c);
      best.index = static_cast<int>(r);
      best.correlation = c;
    }
  }
  const Signal row = components.row(best.index).transpose();
  const Signal rc = row.array() - row.mean();
  const Signal refc = reference.array() - reference.mean();
  const double slope = rc.dot(refc) / rc.squaredNorm();
  best.signal = slope * rc;
  best.correlation = std::abs(best.correlation);
  return best;
}

EogPair separate_minus(const ForeheadQuad& quad, const SeparationOptions& options) {
  validate(quad);
  EogPair pair;
  pair.veo = quad.channel(options.minus_vertical_a) - quad.channel(options.minus_vertical_b);
  pair.heo = quad.channel(options.minus_horizontal_a) - quad.channel(options.minus_horizontal_b);
  pair.method = SeparationMethod::Minus;
  pair.sample_rate_hz = quad.sample_rate_hz;
  return pair;
}

EogPair separate_ica(const ForeheadQuad& quad, std::uint64_t seed, const SeparationOptions& options,
                     SeparationReport* report) {
  const EogPair templates = separate_minus(quad, options);

  const auto vertical = fastica(stack(quad.channel(options.ica_vertical_a), quad.channel(options.ica_vertical_b)), 2,
                                seed, options.ica);
  const auto horizontal = fastica(
      stack(quad.channel(options.ica_horizontal_a), quad.channel(options.ica_horizontal_b)), 2, seed, options.ica);
  auto veo = align_component(vertical.components, templates.veo);
  auto heo = align_component(horizontal.components, templates.heo);

  if (report != nullptr) {
    report->veo_component = veo.index;
    report->heo_component = heo.index;
    report->veo_iterations = vertical.iterations;
    report->heo_iterations = horizontal.iterations;
    report->veo_delta = vertical.final_delta;
    report->heo_delta = horizontal.final_delta;
  }
  return EogPair{std::move(veo.signal), std::move(heo.signal), SeparationMethod::Ica, quad.sample_rate_hz};
}

EogPair combine_ica_minus(const ForeheadQuad& quad, std::uint64_t seed, const SeparationOptions& options,
                          SeparationReport* report) {
  const EogPair minus = separate_minus(quad, options);
  const auto vertical = fastica(stack(quad.channel(options.ica_vertical_a), quad.channel(options.ica_vertical_b)), 2,
                                seed, options.ica);
  auto veo = align_component(vertical.components, minus.veo);
  if (report != nullptr) {
    report->veo_component = veo.index;
    report->veo_iterations = vertical.iterations;
    report->veo_delta = vertical.final_delta;
  }
  return EogPair{std::move(veo.signal), minus.heo, SeparationMethod::IcaMinus, quad.sample_rate_hz};
}

EogPair separate(const ForeheadQuad& quad, SeparationMethod method, std::uint64_t seed,
                 const SeparationOptions& options, SeparationReport* report) {
  switch (method) {
    case SeparationMethod::Minus: return separate_minus(quad, options);
    case SeparationMethod::Ica: return separate_ica(quad, seed, options, report);
    case SeparationMethod::IcaMinus: return combine_ica_minus(quad, seed, options, report);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown separation method");
}

double similarity(const Signal& estimated, const Signal& reference) {
  if (estimated.size() != reference.size()) throw Error(ErrorCode::LengthMismatch, "similarity inputs differ in length");
  return stats::pearson(view(estimated), view(reference));
}

}  // namespace vigil
