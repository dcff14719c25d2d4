#pragma once

#include <random>

#include "wspin/wspin.hpp"

namespace wspin::test {

inline ModelManifold capped_model(int n, double rho, double cap_level = 1.0) {
  InteriorSpec in;
  in.cap_radius = cap_level * rho;
  return build_model_manifold(n, rho, in, "capped");
}

inline CompactifiedModel reference_model(int n = 3, double rho = 1.0, double cap_level = 1.0) {
  return make_compactified_model(capped_model(n, rho, cap_level), 3.0);
}

inline Vec random_vec(std::mt19937_64& g, int n, double scale = 1.0) {
  std::normal_distribution<double> d;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * d(g);
  return v;
}

inline SpinorMatrix random_matrix(std::mt19937_64& g, int N) {
  std::normal_distribution<double> d;
  SpinorMatrix m(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = cplx(d(g), d(g));
  return m;
}

inline double max_abs(const SpinorMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace wspin::test
