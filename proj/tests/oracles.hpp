#pragma once

// Independent reference implementations used only by the tests. They follow
// the textbook definitions directly (plain loops, no shared helpers with the
// library) so that agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec normalized(const Vec& a) {
  const double n = std::sqrt(dot(a, a));
  Vec out(a);
  for (auto& x : out) x /= n;
  return out;
}

inline Mat to_rows(const Eigen::MatrixXd& m) {
  Mat out(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

/// x^T W, then normalize. `w` is backbone x joint.
inline Vec project(const Vec& x, const Eigen::MatrixXd& w) {
  Vec z(static_cast<std::size_t>(w.cols()), 0.0);
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) z[j] += x[i] * w(i, j);
  return normalized(z);
}

/// Symmetric InfoNCE by direct summation of the two cross-entropy terms.
inline double info_nce(const Mat& v, const Mat& t, double tau) {
  const std::size_t n = v.size();
  double rows = 0.0, cols = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += std::exp(dot(v[i], t[j]) / tau);
    rows += -std::log(std::exp(dot(v[i], t[i]) / tau) / denom);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) denom += std::exp(dot(v[j], t[i]) / tau);
    cols += -std::log(std::exp(dot(v[i], t[i]) / tau) / denom);
  }
  return rows / static_cast<double>(n) + cols / static_cast<double>(n);
}

/// Central finite difference of f with respect to every entry of `param`.
inline Eigen::MatrixXd finite_difference(Eigen::MatrixXd& param,
                                         const std::function<double()>& f, double step) {
  Eigen::MatrixXd grad(param.rows(), param.cols());
  for (Eigen::Index i = 0; i < param.rows(); ++i) {
    for (Eigen::Index j = 0; j < param.cols(); ++j) {
      const double saved = param(i, j);
      param(i, j) = saved + step;
      const double plus = f();
      param(i, j) = saved - step;
      const double minus = f();
      param(i, j) = saved;
      grad(i, j) = (plus - minus) / (2.0 * step);
    }
  }
  return grad;
}

struct Counts {
  std::uint64_t c = 0, d = 0, tx = 0, ty = 0, both = 0;
};

inline Counts count_pairs(const Vec& x, const Vec& y) {
  Counts k;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (j <= i) continue;
      const bool xt = x[i] == x[j];
      const bool yt = y[i] == y[j];
      if (xt && yt) ++k.both;
      else if (xt) ++k.tx;
      else if (yt) ++k.ty;
      else if ((x[i] < x[j]) == (y[i] < y[j])) ++k.c;
      else ++k.d;
    }
  }
  return k;
}

inline double tau_b(const Vec& x, const Vec& y) {
  const Counts k = count_pairs(x, y);
  const double cd = static_cast<double>(k.c + k.d);
  return (static_cast<double>(k.c) - static_cast<double>(k.d)) /
         std::sqrt((cd + static_cast<double>(k.tx)) * (cd + static_cast<double>(k.ty)));
}

inline double tau_c(const Vec& x, const Vec& y) {
  const Counts k = count_pairs(x, y);
  const double m = static_cast<double>(std::min(std::set<double>(x.begin(), x.end()).size(),
                                                std::set<double>(y.begin(), y.end()).size()));
  const double n = static_cast<double>(x.size());
  return 2.0 * m * (static_cast<double>(k.c) - static_cast<double>(k.d)) / (n * n * (m - 1.0));
}

/// Rank = 1 + #smaller + (#equal - 1)/2, counted directly.
inline Vec ranks(const Vec& v) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0, equal = 0.0;
    for (double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const Vec& x, const Vec& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const Vec& x, const Vec& y) { return pearson(ranks(x), ranks(y)); }

/// Greedy-matching F1 with explicit loops. `weights` are raw idf values.
inline double video_fine(const Mat& tokens, const Mat& frames, Vec weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (total <= 0.0) {
    weights.assign(tokens.size(), 1.0);
    total = static_cast<double>(tokens.size());
  }
  double p = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    double best = 0.0;
    for (const auto& f : frames) best = std::max(best, dot(tokens[i], f));
    p += weights[i] / total * best;
  }
  double r = 0.0;
  for (const auto& f : frames) {
    double best = 0.0;
    for (const auto& t : tokens) best = std::max(best, dot(t, f));
    r += best;
  }
  r /= static_cast<double>(frames.size());
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

/// Document frequency by scanning every caption for every vocabulary word.
inline std::map<std::string, double> idf(const std::vector<std::vector<std::string>>& corpus) {
  std::set<std::string> vocab;
  for (const auto& c : corpus) vocab.insert(c.begin(), c.end());
  std::map<std::string, double> out;
  for (const auto& w : vocab) {
    double df = 0.0;
    for (const auto& c : corpus) df += std::find(c.begin(), c.end(), w) != c.end() ? 1.0 : 0.0;
    out[w] = std::log((static_cast<double>(corpus.size()) + 1.0) / (df + 1.0));
  }
  return out;
}

}  // namespace oracle
