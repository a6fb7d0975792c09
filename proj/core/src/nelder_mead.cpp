#include "wcmkg/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wcmkg/errors.hpp"

namespace wcmkg {

namespace {

// Standard reflection/expansion/contraction/shrink coefficients.
constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double spread(const std::vector<std::vector<double>>& verts,
              const std::vector<double>& values) {
  double fx = 0.0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    fx = std::max(fx, std::abs(values[i] - values[0]));
  }
  double dx = 0.0;
  for (std::size_t i = 1; i < verts.size(); ++i) {
    for (std::size_t j = 0; j < verts[i].size(); ++j) {
      dx = std::max(dx, std::abs(verts[i][j] - verts[0][j]));
    }
  }
  return std::max(fx, dx);
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> initial, const NelderMeadOptions& options) {
  const std::size_t n = initial.size();
  if (n == 0) throw EmptyInput("nelder_mead: empty initial point");

  std::vector<std::vector<double>> verts(n + 1, initial);
  for (std::size_t i = 0; i < n; ++i) {
    verts[i + 1][i] += options.initial_step;
  }
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = objective(verts[i]);

  std::vector<std::size_t> order(n + 1);
  NelderMeadResult result;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return values[a] < values[b];
    });
    {
      std::vector<std::vector<double>> v2;
      std::vector<double> f2;
      v2.reserve(n + 1);
      f2.reserve(n + 1);
      for (std::size_t k : order) {
        v2.push_back(std::move(verts[k]));
        f2.push_back(values[k]);
      }
      verts = std::move(v2);
      values = std::move(f2);
    }

    if (spread(verts, values) <= options.tolerance) {
      result.converged = true;
      break;
    }

    // Centroid of all but the worst vertex.
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += verts[i][j];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto blend = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t j = 0; j < n; ++j) {
        p[j] = centroid[j] + coeff * (centroid[j] - verts[n][j]);
      }
      return p;
    };

    const std::vector<double> reflected = blend(kReflect);
    const double f_reflected = objective(reflected);

    if (f_reflected < values[0]) {
      const std::vector<double> expanded = blend(kExpand);
      const double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        verts[n] = expanded;
        values[n] = f_expanded;
      } else {
        verts[n] = reflected;
        values[n] = f_reflected;
      }
    } else if (f_reflected < values[n - 1]) {
      verts[n] = reflected;
      values[n] = f_reflected;
    } else {
      const bool outside = f_reflected < values[n];
      std::vector<double> contracted(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double towards = outside ? reflected[j] : verts[n][j];
        contracted[j] = centroid[j] + kContract * (towards - centroid[j]);
      }
      const double f_contracted = objective(contracted);
      if (f_contracted < std::min(f_reflected, values[n])) {
        verts[n] = contracted;
        values[n] = f_contracted;
      } else {
        // Shrink every vertex towards the best one.
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            verts[i][j] = verts[0][j] + kShrink * (verts[i][j] - verts[0][j]);
          }
          values[i] = objective(verts[i]);
        }
      }
    }
  }

  result.x = verts[0];
  result.value = values[0];
  result.iterations = iter;
  return result;
}

}  // namespace wcmkg
