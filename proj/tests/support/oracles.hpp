#pragma once

// Reference implementations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;

inline Grid transpose(const Grid& a) {
  Grid t(a.empty() ? 0 : a[0].size(), std::vector<double>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Grid multiply(const Grid& a, const Grid& b) {
  Grid out(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

/// Solves A X = B by Gauss-Jordan elimination with partial pivoting.
inline Grid gauss_solve(Grid A, Grid B) {
  const std::size_t n = A.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
    if (std::abs(A[piv][col]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(A[col], A[piv]);
    std::swap(B[col], B[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) A[r][k] -= f * A[col][k];
      for (std::size_t k = 0; k < B[r].size(); ++k) B[r][k] -= f * B[col][k];
    }
  }
  for (std::size_t r = 0; r < n; ++r)
    for (auto& v : B[r]) v /= A[r][r];
  return B;
}

/// W = (X'X)^-1 X'Y.
inline Grid normal_equations(const Grid& X, const Grid& Y) {
  const Grid Xt = transpose(X);
  return gauss_solve(multiply(Xt, X), multiply(Xt, Y));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

/// Windows of a single-byte-per-unit string padded with '#'.
inline std::vector<std::string> windows(const std::string& s, std::size_t n) {
  const std::string padded = "#" + s + "#";
  if (padded.size() < n) return {padded};
  std::vector<std::string> out;
  for (std::size_t i = 0; i + n <= padded.size(); ++i) out.push_back(padded.substr(i, n));
  return out;
}

/// Central-difference gradient of 0.5 * ||c'W - o'||^2 with respect to W.
inline Grid loss_gradient(const Grid& W, const std::vector<double>& c, const std::vector<double>& o, double h) {
  auto loss = [&](const Grid& w) {
    double l = 0.0;
    for (std::size_t j = 0; j < o.size(); ++j) {
      double p = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i) p += c[i] * w[i][j];
      l += 0.5 * (p - o[j]) * (p - o[j]);
    }
    return l;
  };
  Grid g = W;
  Grid w = W;
  for (std::size_t i = 0; i < W.size(); ++i)
    for (std::size_t j = 0; j < W[i].size(); ++j) {
      w[i][j] = W[i][j] + h;
      const double up = loss(w);
      w[i][j] = W[i][j] - h;
      const double down = loss(w);
      w[i][j] = W[i][j];
      g[i][j] = (up - down) / (2 * h);
    }
  return g;
}

/// Ranks with ties averaged, by counting.
inline std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double y : x) {
      if (y < x[i]) ++less;
      if (y == x[i]) ++equal;
    }
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

}  // namespace oracle
