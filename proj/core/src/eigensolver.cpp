#include "blochpert/eigensolver.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace blochpert::linalg {

DenseEigen dense_hermitian(const CMat& H) {
  Eigen::SelfAdjointEigenSolver<CMat> es(H);
  if (es.info() != Eigen::Success) throw numerical_error("dense Hermitian eigensolve failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Vec dense_hermitian_values(const CMat& H) {
  Eigen::SelfAdjointEigenSolver<CMat> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw numerical_error("dense Hermitian eigensolve failed");
  return es.eigenvalues();
}

namespace {

CVec random_unit(long n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVec v(n);
  for (long i = 0; i < n; ++i) v[i] = cd(g(rng), g(rng));
  v.normalize();
  return v;
}

}  // namespace

WindowResult shift_invert_window(const SpMat& H, double sigma, double half_width,
                                 const WindowOptions& opt) {
  const long n = H.rows();
  WindowResult out;

  SpMat A = H;
  for (long i = 0; i < n; ++i) A.coeffRef(i, i) -= sigma;
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw numerical_error("shift_invert_window: LU factorization failed (sigma hits an eigenvalue?)");

  std::mt19937_64 rng(opt.seed);
  const int m_max = static_cast<int>(std::min<long>(opt.max_krylov, n));
  CMat V(n, m_max);
  std::vector<double> alpha, beta;  // Lanczos tridiagonal
  V.col(0) = random_unit(n, rng);

  auto reorthogonalize = [&](CVec& w, int upto) {
    auto Vj = V.leftCols(upto + 1);
    for (int pass = 0; pass < 2; ++pass) w -= Vj * (Vj.adjoint() * w);
  };

  int prev_count = -1;
  int j = 0;
  for (; j < m_max; ++j) {
    CVec w = lu.solve(V.col(j));
    if (j > 0) w -= beta[j - 1] * V.col(j - 1);
    double a = std::real(V.col(j).dot(w));
    w -= a * V.col(j);
    reorthogonalize(w, j);
    alpha.push_back(a);
    double b = w.norm();
    if (j + 1 < m_max) {
      if (b < 1e-14) {
        // Invariant subspace exhausted; continue with a fresh direction.
        CVec f = random_unit(n, rng);
        reorthogonalize(f, j);
        double fn = f.norm();
        if (fn < 1e-12) {
          beta.push_back(0);
          ++j;
          break;
        }
        V.col(j + 1) = f / fn;
        beta.push_back(0);
      } else {
        V.col(j + 1) = w / b;
        beta.push_back(b);
      }
    }

    bool last = (j + 1 == m_max);
    if (j + 1 < opt.min_krylov && !last) continue;
    if ((j + 1) % opt.check_every != 0 && !last) continue;

    // Ritz pairs of the tridiagonal.
    int m = j + 1;
    Mat T = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Mat> tes(T);
    const Vec& theta = tes.eigenvalues();
    const Mat& S = tes.eigenvectors();

    // Candidate eigenvalues inside a slightly padded window.
    std::vector<int> cand;
    for (int i = 0; i < m; ++i) {
      if (std::abs(theta[i]) < 1e-14) continue;
      double lambda = sigma + 1.0 / theta[i];
      if (std::abs(lambda - sigma) <= half_width * 1.02) cand.push_back(i);
    }

    // Cheap Ritz-residual screen in shift-invert space.
    double bm = (j + 1 < m_max && j < (int)beta.size()) ? beta[j] : 0.0;
    bool screened_ok = true;
    for (int i : cand) {
      double kres = std::abs(bm * S(m - 1, i));
      if (kres > 1e-8 * std::abs(theta[i])) {
        screened_ok = false;
        break;
      }
    }
    if (!screened_ok && !last) continue;

    // Explicit residual validation.
    std::vector<std::pair<double, CVec>> accepted;
    std::vector<double> residuals;
    bool all_ok = true;
    for (int i : cand) {
      CVec y = V.leftCols(m) * S.col(i);
      y.normalize();
      double lambda = std::real(y.dot(H * y));
      CVec r = H * y - lambda * y;
      double res = r.norm();
      if (std::abs(lambda - sigma) > half_width) continue;
      if (res > opt.residual_tol) {
        all_ok = false;
        break;
      }
      accepted.emplace_back(lambda, std::move(y));
      residuals.push_back(res);
    }
    int count = static_cast<int>(accepted.size());
    bool empty_ok = count > 0 || m >= std::max(opt.min_krylov, 96) || m == (int)n;
    if (all_ok && count == prev_count && empty_ok) {
      std::vector<int> order(count);
      for (int i = 0; i < count; ++i) order[i] = i;
      std::sort(order.begin(), order.end(),
                [&](int a, int b) { return accepted[a].first < accepted[b].first; });
      out.eigenvalues.resize(count);
      out.residuals.resize(count);
      out.eigenvectors.resize(n, count);
      for (int i = 0; i < count; ++i) {
        out.eigenvalues[i] = accepted[order[i]].first;
        out.eigenvectors.col(i) = accepted[order[i]].second;
        out.residuals[i] = residuals[order[i]];
      }
      out.converged = true;
      out.krylov_dim = m;
      return out;
    }
    prev_count = all_ok ? count : -1;
  }
  out.converged = false;
  out.krylov_dim = j;
  throw numerical_error("shift_invert_window: no convergence within max_krylov = " +
                        std::to_string(m_max));
}

NearestEigen nearest_eigenvalue(const SpMat& H, double sigma, int max_iter, double tol,
                                unsigned long long seed) {
  const long n = H.rows();
  SpMat A = H;
  for (long i = 0; i < n; ++i) A.coeffRef(i, i) -= sigma;
  A.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  NearestEigen out;
  if (lu.info() != Eigen::Success) {
    // sigma is (numerically) an eigenvalue.
    out.eigenvalue = sigma;
    out.residual = 0;
    out.converged = true;
    return out;
  }
  // Block-2 inverse subspace iteration: a single vector oscillates when two
  // eigenvalues straddle sigma at comparable distances, and its Rayleigh
  // quotient then fakes an eigenvalue at sigma itself.  The 2D block resolves
  // the straddling pair.
  std::mt19937_64 rng(seed);
  const int b = static_cast<int>(std::min<long>(2, n));
  CMat V(n, b);
  for (int c = 0; c < b; ++c) V.col(c) = random_unit(n, rng);
  auto orthonormalize = [&](CMat& W) {
    for (int c = 0; c < W.cols(); ++c) {
      for (int p = 0; p < 2; ++p)
        for (int d = 0; d < c; ++d) W.col(c) -= W.col(d).dot(W.col(c)) * W.col(d);
      double nn = W.col(c).norm();
      if (nn < 1e-300) W.col(c) = random_unit(n, rng);
      else W.col(c) /= nn;
    }
  };
  orthonormalize(V);
  for (int it = 0; it < max_iter; ++it) {
    CMat W(n, b);
    for (int c = 0; c < b; ++c) W.col(c) = lu.solve(V.col(c));
    if (!W.allFinite()) break;
    orthonormalize(W);
    V = W;
    if (it % 3 != 2 && it + 1 < max_iter) continue;
    // Rayleigh-Ritz on the block; keep the Ritz pair nearest sigma.
    CMat S = V.adjoint() * (H * V);
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (S + S.adjoint()));
    int pick = 0;
    for (int c = 1; c < b; ++c)
      if (std::abs(es.eigenvalues()[c] - sigma) < std::abs(es.eigenvalues()[pick] - sigma))
        pick = c;
    CVec y = V * es.eigenvectors().col(pick);
    y.normalize();
    out.eigenvalue = es.eigenvalues()[pick];
    out.residual = (H * y - out.eigenvalue * y).norm();
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace blochpert::linalg
