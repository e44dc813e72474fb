#include "blochpert/lattice.hpp"

#include <numeric>

namespace blochpert::lattice {

Lattice Lattice::from_basis(const Mat& basis) {
  if (basis.rows() != basis.cols() || basis.rows() < 1)
    throw config_error("lattice basis must be a square matrix");
  Eigen::FullPivLU<Mat> lu(basis);
  if (!lu.isInvertible()) {
    // Name the first row that is a combination of the previous ones.
    for (int r = 1; r <= basis.rows(); ++r) {
      Eigen::FullPivLU<Mat> sub(basis.topRows(r));
      if (sub.rank() < r)
        throw config_error("lattice basis is singular: row " + std::to_string(r) +
                           " is dependent on the previous rows");
    }
    throw config_error("lattice basis is singular");
  }
  Lattice l;
  l.basis_ = basis;
  l.dual_ = 2.0 * M_PI * basis.inverse().transpose();
  return l;
}

Lattice Lattice::cubic(int d, double scale) {
  return from_basis(scale * Mat::Identity(d, d));
}

Lattice Lattice::normalized(double* scale) const {
  int d = dim();
  double vol = cell_volume();
  double f = std::pow(vol, -1.0 / d);
  if (scale) *scale = f;
  return from_basis(f * basis_);
}

Vec Lattice::gamma(const IVec& coords) const {
  Vec x = Vec::Zero(dim());
  for (int i = 0; i < dim(); ++i) x += double(coords[i]) * dual_.row(i).transpose();
  return x;
}

Vec Lattice::omega(const IVec& coords) const {
  Vec x = Vec::Zero(dim());
  for (int i = 0; i < dim(); ++i) x += double(coords[i]) * basis_.row(i).transpose();
  return x;
}

Vec Lattice::dual_coords(const Vec& x) const {
  // (x, omega_j) = 2 pi c_j
  return basis_ * x / (2.0 * M_PI);
}

std::optional<IVec> Lattice::gamma_coords(const Vec& x, double tol) const {
  Vec c = dual_coords(x);
  IVec out(dim());
  for (int i = 0; i < dim(); ++i) {
    auto [n, dist] = nearest_int(c[i]);
    if (dist > tol) return std::nullopt;
    out[i] = static_cast<int>(n);
  }
  return out;
}

void Lattice::split(const Vec& x, IVec& gamma_out, Vec& t_out) const {
  Vec c = dual_coords(x);
  gamma_out.assign(dim(), 0);
  Vec tc(dim());
  for (int i = 0; i < dim(); ++i) {
    double fl = std::floor(c[i]);
    gamma_out[i] = static_cast<int>(fl);
    tc[i] = c[i] - fl;
  }
  t_out = dual_.transpose() * tc;
}

std::vector<IVec> Lattice::points_in_ball(double radius) const {
  int d = dim();
  std::vector<long long> bound(d);
  for (int i = 0; i < d; ++i)
    bound[i] = static_cast<long long>(std::floor(radius * basis_.row(i).norm() / (2.0 * M_PI))) + 1;
  std::vector<IVec> out;
  IVec n(d, 0);
  Vec x(d);
  std::function<void(int)> scan = [&](int level) {
    if (level == d) {
      if (ivec_is_zero(n)) return;
      x.setZero();
      for (int i = 0; i < d; ++i) x += double(n[i]) * dual_.row(i).transpose();
      if (x.norm() < radius) out.push_back(n);
      return;
    }
    for (long long k = -bound[level]; k <= bound[level]; ++k) {
      n[level] = static_cast<int>(k);
      scan(level + 1);
    }
  };
  scan(0);
  return out;
}

double Lattice::pairing_defect() const {
  Mat g = dual_ * basis_.transpose();
  Mat ref = 2.0 * M_PI * Mat::Identity(dim(), dim());
  return (g - ref).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

IVec primitive_direction(const IVec& coords) {
  long long g = 0;
  for (int x : coords) g = std::gcd(g, (long long)std::abs(x));
  if (g == 0) throw config_error("primitive_direction of the zero vector");
  IVec r(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) r[i] = static_cast<int>(coords[i] / g);
  // Sign convention: first nonzero coordinate positive.
  for (int x : r) {
    if (x > 0) break;
    if (x < 0) {
      r = ivec_neg(r);
      break;
    }
  }
  return r;
}

namespace {

// Unimodular U with U m = gcd(m) e_1 by integer row reduction.
// Rows 2..d of U then generate the integer kernel of n . m = 0.
void integer_kernel(const IVec& m, long long& gcd_out, std::vector<std::vector<long long>>& U) {
  const int d = static_cast<int>(m.size());
  std::vector<long long> w(m.begin(), m.end());
  U.assign(d, std::vector<long long>(d, 0));
  for (int i = 0; i < d; ++i) U[i][i] = 1;

  auto row_sub = [&](int i, int j, long long f) {
    w[i] -= f * w[j];
    for (int k = 0; k < d; ++k) U[i][k] -= f * U[j][k];
  };
  for (;;) {
    int piv = -1;
    int nz = 0;
    for (int i = 0; i < d; ++i)
      if (w[i] != 0) {
        ++nz;
        if (piv < 0 || std::abs(w[i]) < std::abs(w[piv])) piv = i;
      }
    if (nz <= 1) {
      if (nz == 0) throw config_error("integer_kernel: zero vector");
      // Move pivot to row 0, make positive.
      if (piv != 0) {
        std::swap(w[piv], w[0]);
        std::swap(U[piv], U[0]);
      }
      if (w[0] < 0) {
        w[0] = -w[0];
        for (auto& x : U[0]) x = -x;
      }
      gcd_out = w[0];
      return;
    }
    for (int i = 0; i < d; ++i) {
      if (i == piv || w[i] == 0) continue;
      long long f = w[i] / w[piv];
      if (f != 0) row_sub(i, piv, f);
      if (w[i] != 0 && std::abs(w[i]) < std::abs(w[piv])) break;  // new pivot candidate
    }
  }
}

}  // namespace

DeltaGeometry sublattice_geometry(const Lattice& lat, const IVec& delta_coords) {
  const int d = lat.dim();
  if (static_cast<int>(delta_coords.size()) != d)
    throw config_error("sublattice_geometry: coordinate size mismatch");

  long long g;
  std::vector<std::vector<long long>> U;
  integer_kernel(delta_coords, g, U);
  if (g != 1) {
    // Not maximal: delta/g is a shorter dual vector on the same line.
    IVec shorter(d);
    for (int i = 0; i < d; ++i) shorter[i] = static_cast<int>(delta_coords[i] / g);
    throw config_error("delta " + ivec_str(delta_coords) +
                       " is not maximal: " + ivec_str(shorter) +
                       " lies in Gamma on the line delta*R (gcd " + std::to_string(g) + ")");
  }

  DeltaGeometry geo;
  geo.lattice = lat;
  geo.delta_coords = delta_coords;
  geo.delta = lat.gamma(delta_coords);
  geo.delta_norm2 = geo.delta.squaredNorm();

  // U m = e_1 means row 0 of U solves sum_i U[0][i] m_i = 1, so
  // delta* = sum_i U[0][i] omega_i has (delta*, delta) = 2 pi.
  IVec star(d);
  for (int i = 0; i < d; ++i) star[i] = static_cast<int>(U[0][i]);
  geo.delta_star = lat.omega(star);

  // Rows 1..d-1 of U generate Omega_delta.
  geo.omega_delta.resize(d - 1, d);
  for (int r = 1; r < d; ++r) {
    IVec row(d);
    for (int i = 0; i < d; ++i) row[i] = static_cast<int>(U[r][i]);
    geo.omega_delta.row(r - 1) = lat.omega(row).transpose();
  }

  // Gamma_delta: dual of Omega_delta inside H_delta via the Gram matrix.
  if (d > 1) {
    Mat G = geo.omega_delta * geo.omega_delta.transpose();
    Mat Ginv = G.inverse();
    geo.gamma_delta = 2.0 * M_PI * Ginv * geo.omega_delta;
    // Diameter of the fundamental parallelepiped of Gamma_delta.
    int corners = 1 << (d - 1);
    double diam = 0;
    for (int a = 0; a < corners; ++a)
      for (int b = 0; b < corners; ++b) {
        Vec va = Vec::Zero(d), vb = Vec::Zero(d);
        for (int i = 0; i < d - 1; ++i) {
          if (a >> i & 1) va += geo.gamma_delta.row(i).transpose();
          if (b >> i & 1) vb += geo.gamma_delta.row(i).transpose();
        }
        diam = std::max(diam, (va - vb).norm());
      }
    geo.d_delta = diam;
  } else {
    geo.omega_delta.resize(0, d);
    geo.gamma_delta.resize(0, d);
    geo.d_delta = 0;
  }
  return geo;
}

Vec DeltaGeometry::beta(const IVec& coords) const {
  Vec x = Vec::Zero(dim());
  for (int i = 0; i < dim() - 1; ++i) x += double(coords[i]) * gamma_delta.row(i).transpose();
  return x;
}

Vec DeltaGeometry::gamma_delta_coords(const Vec& u) const {
  // (u, h_j) = 2 pi c_j for u = sum c_i g_i with the duality pairing.
  if (dim() == 1) return Vec::Zero(0);
  return omega_delta * u / (2.0 * M_PI);
}

std::optional<IVec> DeltaGeometry::beta_coords(const Vec& u, double tol) const {
  Vec c = gamma_delta_coords(u);
  IVec out(dim() - 1);
  for (int i = 0; i < dim() - 1; ++i) {
    auto [n, dist] = nearest_int(c[i]);
    if (dist > tol) return std::nullopt;
    out[i] = static_cast<int>(n);
  }
  return out;
}

void DeltaGeometry::split_perp(const Vec& u, IVec& a_out, Vec& tau_out) const {
  Vec c = gamma_delta_coords(u);
  a_out.assign(dim() - 1, 0);
  tau_out = Vec::Zero(dim());
  for (int i = 0; i < dim() - 1; ++i) {
    double fl = std::floor(c[i]);
    a_out[i] = static_cast<int>(fl);
    tau_out += (c[i] - fl) * gamma_delta.row(i).transpose();
  }
}

AxialDecomposition decompose_t(const Vec& t, const DeltaGeometry& geom) {
  AxialDecomposition dec;
  dec.axial = t.dot(geom.delta) / geom.delta_norm2;
  Vec perp = t - dec.axial * geom.delta;
  geom.split_perp(perp, dec.a, dec.tau);
  dec.a_vec = geom.beta(dec.a);
  return dec;
}

double v_of_beta(const IVec& beta_coords, const Vec& t, const DeltaGeometry& geom) {
  AxialDecomposition dt = decompose_t(t, geom);
  Vec diff = geom.beta(beta_coords) - dt.a_vec;
  return frac01(dt.axial - diff.dot(geom.delta_star) / (2.0 * M_PI));
}

DeltaDecomposition gamma_delta_decompose(const Vec& x, const DeltaGeometry& geom, const Vec& t) {
  auto gcoords = geom.lattice.gamma_coords(x - t, 1e-7);
  if (!gcoords) throw numerical_error("gamma_delta_decompose: x - t is not a lattice vector");

  AxialDecomposition dt = decompose_t(t, geom);

  // gamma = b + (n - (2 pi)^-1 (b, delta*)) delta with b in Gamma_delta.
  Vec gamma_vec = geom.lattice.gamma(*gcoords);
  double ax_g = gamma_vec.dot(geom.delta) / geom.delta_norm2;
  Vec b = gamma_vec - ax_g * geom.delta;
  auto bc = geom.beta_coords(b, 1e-7);
  if (!bc) throw numerical_error("gamma_delta_decompose: perpendicular part is not in Gamma_delta");

  DeltaDecomposition dec;
  dec.beta_coords = ivec_add(*bc, dt.a);
  dec.beta = geom.beta(dec.beta_coords);
  dec.tau = dt.tau;

  double c = ax_g + dt.axial;  // full delta-coefficient of x
  double v = v_of_beta(dec.beta_coords, t, geom);
  auto [j, dist] = nearest_int(c - v);
  if (dist > 1e-6)
    throw numerical_error("gamma_delta_decompose: axial bookkeeping failed (defect " +
                          std::to_string(dist) + ")");
  dec.j = j;
  dec.v = v;
  return dec;
}

}  // namespace blochpert::lattice
