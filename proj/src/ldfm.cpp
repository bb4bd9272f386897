#include "ldfm/ldfm.hpp"

#include "ldfm/error.hpp"
#include "ldfm/label_semantics.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace ldfm {

using linalg::Matrix;
using linalg::Vector;

namespace {

void require_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be a positive finite number");
  }
}

// X X^T never changes during a fit, so its eigenbasis is computed once.
struct FeatureGram {
  linalg::SymEigen eig;
  double trace = 0.0;
};

FeatureGram feature_gram(const Matrix& x) {
  const Matrix gram = x * x.transpose();
  return FeatureGram{linalg::sym_eigen(gram), gram.trace()};
}

Matrix update_w_cached(const Matrix& y_numeric, const Matrix& x, const FeatureGram& gram,
                       double lambda) {
  const Matrix p = y_numeric * y_numeric.transpose();
  linalg::SymEigen q = gram.eig;
  q.eigenvalues *= lambda;
  const Matrix r = (lambda + 1.0) * y_numeric * x.transpose();
  const double n = static_cast<double>(p.rows() + q.eigenvalues.size());
  const double eps = 1e-10 * (p.trace() + lambda * gram.trace) / n;
  return linalg::solve_sylvester_sympsd(linalg::sym_eigen(p), q, r, eps);
}

LdfmModel run(const Matrix& x, const Matrix& labels, const LdfmConfig& config, bool learn_labels) {
  config.validate();
  if (x.cols() != labels.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "features and labels disagree on instance count");
  }
  linalg::require_finite(x, "X");
  require_binary(labels);

  LdfmModel model;
  model.config = config;
  model.y_numeric = learn_labels ? init_numeric_labels(labels, jaccard_correlation(labels)) : labels;
  const FeatureGram gram = feature_gram(x);

  for (std::size_t t = 0; t < config.max_iterations; ++t) {
    model.w = update_w_cached(model.y_numeric, x, gram, config.lambda);
    if (learn_labels) model.y_numeric = update_y(model.w, x, config.lambda);
    const double value = objective(model.w, model.y_numeric, x, config.lambda);
    model.objective_trace.push_back(value);
    model.iterations_run = t + 1;

    if (config.objective_tolerance > 0.0 && model.objective_trace.size() >= 2) {
      const double prev = model.objective_trace[model.objective_trace.size() - 2];
      const double rel = (prev - value) / std::max(std::abs(prev), std::numeric_limits<double>::min());
      if (rel < config.objective_tolerance) break;
    }
  }
  return model;
}

void put_number(std::ostream& out, double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  out.write(buf.data(), res.ptr - buf.data());
}

double get_number(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw Error(ErrorCode::SyntaxError, "model file truncated");
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::SyntaxError, "bad number '" + tok + "' in model file");
  }
  return v;
}

std::size_t get_count(std::istream& in) {
  const double v = get_number(in);
  if (v < 0 || v != std::floor(v)) throw Error(ErrorCode::SyntaxError, "bad count in model file");
  return static_cast<std::size_t>(v);
}

void expect_key(std::istream& in, const std::string& key) {
  std::string tok;
  if (!(in >> tok) || tok != key) {
    throw Error(ErrorCode::SyntaxError, "model file: expected '" + key + "', found '" + tok + "'");
  }
}

void put_matrix(std::ostream& out, const char* key, const Matrix& m) {
  out << key << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      put_number(out, m(i, j));
    }
    out << '\n';
  }
}

Matrix get_matrix(std::istream& in, const char* key) {
  expect_key(in, key);
  const auto rows = static_cast<Eigen::Index>(get_count(in));
  const auto cols = static_cast<Eigen::Index>(get_count(in));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = get_number(in);
  }
  return m;
}

constexpr const char* kMagic = "ldfm-model";
constexpr int kFormatVersion = 1;

}  // namespace

void LdfmConfig::validate() const {
  require_lambda(lambda);
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "max_iterations must be at least 1");
  if (!(objective_tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "objective_tolerance must be nonnegative");
  }
}

bool LdfmModel::operator==(const LdfmModel& other) const {
  const auto same = [](const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return config == other.config && same(w, other.w) && same(y_numeric, other.y_numeric) &&
         objective_trace == other.objective_trace && iterations_run == other.iterations_run;
}

double objective(const Matrix& w, const Matrix& y_numeric, const Matrix& x, double lambda) {
  require_lambda(lambda);
  if (w.cols() != x.rows() || y_numeric.rows() != w.rows() || y_numeric.cols() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "objective: need W k x d, Y~ k x n, X d x n");
  }
  const double decoder = (x - w.transpose() * y_numeric).squaredNorm();
  const double encoder = (w * x - y_numeric).squaredNorm();
  return decoder + lambda * encoder;
}

Matrix update_w(const Matrix& y_numeric, const Matrix& x, double lambda) {
  require_lambda(lambda);
  if (y_numeric.cols() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "Y~ and X disagree on instance count");
  }
  const Matrix p = y_numeric * y_numeric.transpose();
  const Matrix q = lambda * (x * x.transpose());
  const Matrix r = (lambda + 1.0) * y_numeric * x.transpose();
  return linalg::solve_sylvester_sympsd(p, q, r);
}

Matrix update_y(const Matrix& w, const Matrix& x, double lambda) {
  require_lambda(lambda);
  if (w.cols() != x.rows()) throw Error(ErrorCode::DimensionMismatch, "W columns must equal X rows");
  const Matrix a = w * w.transpose() + lambda * Matrix::Identity(w.rows(), w.rows());
  return linalg::solve_spd(a, (lambda + 1.0) * w * x);
}

LdfmModel fit(const Matrix& x, const Matrix& labels, const LdfmConfig& config) {
  return run(x, labels, config, true);
}

LdfmModel fit_frozen_labels(const Matrix& x, const Matrix& labels, const LdfmConfig& config) {
  return run(x, labels, config, false);
}

Vector encode(const LdfmModel& model, const Vector& x) {
  if (x.size() != model.num_features()) {
    throw Error(ErrorCode::DimensionMismatch, "encode: sample length must equal feature count");
  }
  return model.w * x;
}

Vector decode(const LdfmModel& model, const Vector& y) {
  if (y.size() != model.num_labels()) {
    throw Error(ErrorCode::DimensionMismatch, "decode: label vector length must equal label count");
  }
  return model.w.transpose() * y;
}

std::vector<FeatureScore> rank_features(const LdfmModel& model) { return rank_features(model.w); }

std::vector<FeatureScore> rank_features(const Matrix& w) {
  std::vector<FeatureScore> out;
  out.reserve(static_cast<std::size_t>(w.cols()));
  for (Eigen::Index m = 0; m < w.cols(); ++m) out.push_back({m, w.col(m).norm()});
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureScore& a, const FeatureScore& b) { return a.score > b.score; });
  return out;
}

double reconstruction_error(const Matrix& x, const Matrix& w, const Matrix& labels) {
  if (w.cols() != x.rows() || labels.rows() != w.rows() || labels.cols() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "reconstruction_error: need X d x m, W k x d, labels k x m");
  }
  const double norm = x.norm();
  if (norm == 0.0) throw Error(ErrorCode::ZeroInput, "||X||_F is zero");
  return (x - w.transpose() * labels).norm() / norm;
}

void save_model(const LdfmModel& model, std::ostream& out) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "lambda ";
  put_number(out, model.config.lambda);
  out << "\nmax_iterations " << model.config.max_iterations << "\nobjective_tolerance ";
  put_number(out, model.config.objective_tolerance);
  out << "\niterations_run " << model.iterations_run << '\n';
  put_matrix(out, "w", model.w);
  put_matrix(out, "y_numeric", model.y_numeric);
  out << "objective_trace " << model.objective_trace.size() << '\n';
  for (std::size_t i = 0; i < model.objective_trace.size(); ++i) {
    if (i > 0) out << ' ';
    put_number(out, model.objective_trace[i]);
  }
  out << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing model");
}

LdfmModel load_model(std::istream& in) {
  expect_key(in, kMagic);
  if (get_count(in) != kFormatVersion) {
    throw Error(ErrorCode::SyntaxError, "unsupported model format version");
  }
  LdfmModel model;
  expect_key(in, "lambda");
  model.config.lambda = get_number(in);
  expect_key(in, "max_iterations");
  model.config.max_iterations = get_count(in);
  expect_key(in, "objective_tolerance");
  model.config.objective_tolerance = get_number(in);
  expect_key(in, "iterations_run");
  model.iterations_run = get_count(in);
  model.w = get_matrix(in, "w");
  model.y_numeric = get_matrix(in, "y_numeric");
  expect_key(in, "objective_trace");
  const std::size_t len = get_count(in);
  for (std::size_t i = 0; i < len; ++i) model.objective_trace.push_back(get_number(in));
  if (model.y_numeric.rows() != model.w.rows()) {
    throw Error(ErrorCode::SyntaxError, "model file: W and Y~ disagree on label count");
  }
  return model;
}

}  // namespace ldfm
