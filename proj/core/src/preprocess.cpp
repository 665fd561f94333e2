/*
 * Copyright 2026 The OTS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ots/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "ots/error.hpp"
#include "ots/text_io.hpp"

namespace ots {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Largest-magnitude entry positive; the first index wins ties.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  }
  if (v[best] < 0) v = -v;
}

}  // namespace

double l2_norm(std::span<const double> v) {
  // Scaled accumulation avoids overflow for large components.
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double x : v) {
    const double t = x / scale;
    sum += t * t;
  }
  return scale * std::sqrt(sum);
}

FeatureVector l2_normalize(std::span<const double> v) {
  const double norm = l2_norm(v);
  std::vector<double> out(v.begin(), v.end());
  if (norm > 0.0) {
    for (double& x : out) x /= norm;
  }
  return FeatureVector(std::move(out));
}

FeatureVector signed_power(std::span<const double> v, double p) {
  if (!(p > 0.0)) fail(ErrorKind::kInvalidArgument, "power must be positive");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    const double m = p == 1.0 ? a : (p == 2.0 ? a * a : std::pow(a, p));
    out[i] = v[i] < 0.0 ? -m : (v[i] > 0.0 ? m : 0.0);
  }
  return FeatureVector(std::move(out));
}

PcaFit pca_fit(const FeatureMatrix& x, std::size_t k, double epsilon) {
  const std::size_t n = x.size();
  const std::size_t d = x.dim();
  if (n < 2) fail(ErrorKind::kInvalidArgument, "PCA needs at least 2 samples");
  if (!(epsilon > 0.0)) fail(ErrorKind::kInvalidArgument, "epsilon must be positive");
  if (k < 1 || k > std::min(n - 1, d)) {
    fail(ErrorKind::kInvalidArgument,
         "PCA target dim " + std::to_string(k) + " outside [1, min(n-1, d)=" +
             std::to_string(std::min(n - 1, d)) + "]");
  }

  Eigen::Map<const RowMatrix> data(x.data().data(), static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const RowMatrix centered = data.rowwise() - mean;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Columns of `vectors` are unit eigenvectors of the covariance, ordered by
  // decreasing eigenvalue.
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (d <= n) {
    const Eigen::MatrixXd cov = (centered.transpose() * centered) * inv_n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
      throw std::logic_error("covariance eigensolver did not converge");
    }
    values = solver.eigenvalues().reverse();
    vectors = solver.eigenvectors().rowwise().reverse();
  } else {
    // Gram route: the nonzero spectrum of X X^T / n equals that of X^T X / n.
    const Eigen::MatrixXd gram = (centered * centered.transpose()) * inv_n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) {
      throw std::logic_error("gram eigensolver did not converge");
    }
    values = solver.eigenvalues().reverse();
    const Eigen::MatrixXd u = solver.eigenvectors().rowwise().reverse();
    vectors.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(k));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
      Eigen::VectorXd v = centered.transpose() * u.col(j);
      // Re-orthogonalise against earlier directions; back-projection loses
      // orthogonality as eigenvalues shrink.
      for (Eigen::Index i = 0; i < j; ++i) v -= vectors.col(i).dot(v) * vectors.col(i);
      const double norm = v.norm();
      if (norm > 0) v /= norm;
      vectors.col(j) = v;
    }
  }

  std::size_t kept = 0;
  while (kept < k && values[static_cast<Eigen::Index>(kept)] > epsilon) ++kept;
  PcaFit fit;
  if (kept == 0) fail(ErrorKind::kInvalidArgument, "data has no variance above epsilon");
  if (kept < k) {
    fit.warning = "RankDeficient: only " + std::to_string(kept) + " of " +
                  std::to_string(k) + " eigenvalues exceed epsilon; k reduced to " +
                  std::to_string(kept);
  }

  PcaWhitenModel& m = fit.model;
  m.k = kept;
  m.d_in = d;
  m.epsilon = epsilon;
  m.mean.assign(mean.data(), mean.data() + d);
  m.components.resize(kept * d);
  m.eigenvalues.resize(kept);
  for (std::size_t j = 0; j < kept; ++j) {
    Eigen::VectorXd v = vectors.col(static_cast<Eigen::Index>(j));
    fix_sign(v);
    std::copy(v.data(), v.data() + d, m.components.begin() + static_cast<std::ptrdiff_t>(j * d));
    m.eigenvalues[j] = values[static_cast<Eigen::Index>(j)];
  }
  return fit;
}

FeatureVector pca_whiten_apply(const PcaWhitenModel& model,
                               std::span<const double> v) {
  if (v.size() != model.d_in) {
    fail(ErrorKind::kDimMismatch, "whitening expects dim " + std::to_string(model.d_in) +
                                      ", got " + std::to_string(v.size()));
  }
  std::vector<double> centered(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) centered[i] = v[i] - model.mean[i];
  std::vector<double> out(model.k);
  for (std::size_t j = 0; j < model.k; ++j) {
    const auto c = model.component(j);
    const double proj = std::inner_product(c.begin(), c.end(), centered.begin(), 0.0);
    out[j] = proj / std::sqrt(model.eigenvalues[j] + model.epsilon);
  }
  return FeatureVector(std::move(out));
}

PcaFit retrieval_pipeline_fit(const FeatureMatrix& x, const PipelineConfig& cfg) {
  if (cfg.pca_dim < 1) fail(ErrorKind::kInvalidArgument, "pca_dim must be >= 1");
  if (x.size() < 2) fail(ErrorKind::kInvalidArgument, "pipeline fit needs at least 2 rows");
  FeatureMatrix normalized(x.dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    normalized.append(x.id(i), l2_normalize(x.row(i)).values());
  }
  const std::size_t limit = std::min(x.size() - 1, x.dim());
  const std::size_t k = std::min(cfg.pca_dim, limit);
  PcaFit fit = pca_fit(normalized, k, cfg.epsilon);
  if (k < cfg.pca_dim) {
    std::string note = "pca_dim " + std::to_string(cfg.pca_dim) + " clamped to " +
                       std::to_string(k) + " (n=" + std::to_string(x.size()) +
                       ", d=" + std::to_string(x.dim()) + ")";
    fit.warning = fit.warning ? note + "; " + *fit.warning : note;
  }
  return fit;
}

PipelineStages retrieval_pipeline_stages(const PcaWhitenModel& model,
                                         const PipelineConfig& cfg,
                                         std::span<const double> v) {
  FeatureVector whitened = pca_whiten_apply(model, l2_normalize(v).values());
  FeatureVector renormalized = l2_normalize(whitened.values());
  FeatureVector output = signed_power(renormalized.values(), cfg.power);
  return {std::move(renormalized), std::move(output)};
}

FeatureVector retrieval_pipeline_apply(const PcaWhitenModel& model,
                                       const PipelineConfig& cfg,
                                       std::span<const double> v) {
  return retrieval_pipeline_stages(model, cfg, v).output;
}

void validate_pca_model(const PcaWhitenModel& m) {
  if (m.k < 1 || m.d_in < 1 || m.k > m.d_in) {
    fail(ErrorKind::kMalformedFile, "PCA model: bad k/d_in");
  }
  if (m.mean.size() != m.d_in || m.components.size() != m.k * m.d_in ||
      m.eigenvalues.size() != m.k) {
    fail(ErrorKind::kMalformedFile, "PCA model: inconsistent sizes");
  }
  if (!(m.epsilon > 0.0) || !std::isfinite(m.epsilon)) {
    fail(ErrorKind::kMalformedFile, "PCA model: bad epsilon");
  }
  for (std::size_t j = 0; j < m.k; ++j) {
    if (!(m.eigenvalues[j] >= 0.0) || !std::isfinite(m.eigenvalues[j]) ||
        (j > 0 && m.eigenvalues[j] > m.eigenvalues[j - 1])) {
      fail(ErrorKind::kMalformedFile, "PCA model: eigenvalues not sorted non-negative");
    }
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(m.mean.begin(), m.mean.end(), finite) ||
      !std::all_of(m.components.begin(), m.components.end(), finite)) {
    fail(ErrorKind::kMalformedFile, "PCA model: non-finite entries");
  }
}

std::string serialize_pca_model(const PcaWhitenModel& m) {
  auto row = [](std::span<const double> values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += '\t';
      line += text::format_double(values[i]);
    }
    return line + '\n';
  };
  std::string out = "PCAW1\n";
  out += std::to_string(m.k) + '\t' + std::to_string(m.d_in) + '\t' +
         text::format_double(m.epsilon) + '\n';
  out += row(m.mean);
  for (std::size_t j = 0; j < m.k; ++j) out += row(m.component(j));
  out += row(m.eigenvalues);
  return out;
}

PcaWhitenModel parse_pca_model(std::string_view contents) {
  std::vector<std::string_view> lines = text::split(contents, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != "PCAW1") {
    fail(ErrorKind::kMalformedFile, "missing PCAW1 header");
  }
  if (lines.size() < 2) fail(ErrorKind::kMalformedFile, "PCAW1: truncated");
  const auto header = text::split(lines[1], '\t');
  if (header.size() != 3) fail(ErrorKind::kMalformedFile, "PCAW1: bad size line");
  PcaWhitenModel m;
  const auto k = text::parse_int(header[0], "PCAW1 k");
  const auto d = text::parse_int(header[1], "PCAW1 d_in");
  if (k < 1 || d < 1) fail(ErrorKind::kMalformedFile, "PCAW1: bad sizes");
  m.k = static_cast<std::size_t>(k);
  m.d_in = static_cast<std::size_t>(d);
  m.epsilon = text::parse_double(header[2], "PCAW1 epsilon");
  if (lines.size() != 2 + 1 + m.k + 1) fail(ErrorKind::kMalformedFile, "PCAW1: wrong line count");
  auto parse_row = [&](std::string_view line, std::size_t expected, std::vector<double>& out) {
    const auto fields = text::split(line, '\t');
    if (fields.size() != expected) fail(ErrorKind::kMalformedFile, "PCAW1: ragged row");
    for (auto f : fields) out.push_back(text::parse_double(f, "PCAW1"));
  };
  parse_row(lines[2], m.d_in, m.mean);
  for (std::size_t j = 0; j < m.k; ++j) parse_row(lines[3 + j], m.d_in, m.components);
  parse_row(lines[3 + m.k], m.k, m.eigenvalues);
  validate_pca_model(m);
  return m;
}

void save_pca_model(const PcaWhitenModel& model, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_pca_model(model));
}

PcaWhitenModel load_pca_model(const std::filesystem::path& path) {
  return parse_pca_model(text::read_file(path));
}

}  // namespace ots
