#include "ebpttn/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

#include "ebpttn/errors.hpp"
#include "ebpttn/lanczos.hpp"

namespace ebpttn {

using Mat = Eigen::MatrixXd;
using MapMat = Eigen::Map<Mat>;
using ConstMapMat = Eigen::Map<const Mat>;

Mat matricize(const Tensor3& t, int leg) {
  const auto [d0, d1, d2] = t.dims;
  switch (leg) {
    case 0:
      return ConstMapMat(t.data.data(), d0, d1 * d2).transpose();
    case 1: {
      Mat m(d0 * d2, d1);
      for (int c = 0; c < d2; ++c)
        for (int b = 0; b < d1; ++b)
          for (int a = 0; a < d0; ++a) m(a + d0 * c, b) = t(a, b, c);
      return m;
    }
    case 2:
      return ConstMapMat(t.data.data(), d0 * d1, d2);
  }
  throw ConfigError("tensor leg out of range");
}

Tensor3 from_matrix(const Mat& m, int leg, std::array<int, 3> dims) {
  Tensor3 t(dims);
  const auto [d0, d1, d2] = dims;
  const int other = static_cast<int>(t.data.size()) / dims.at(leg);
  if (m.rows() != other || m.cols() != dims[leg]) throw ConfigError("matrix does not fit tensor");
  switch (leg) {
    case 0:
      MapMat(t.data.data(), d0, d1 * d2) = m.transpose();
      break;
    case 1:
      for (int c = 0; c < d2; ++c)
        for (int b = 0; b < d1; ++b)
          for (int a = 0; a < d0; ++a) t(a, b, c) = m(a + d0 * c, b);
      break;
    default:
      MapMat(t.data.data(), d0 * d1, d2) = m;
  }
  return t;
}

namespace {

int leg_of(const TtnTopology& t, int v, int neighbor) {
  const auto& nb = t.neighbors(v);
  for (int k = 0; k < static_cast<int>(nb.size()); ++k)
    if (nb[k] == neighbor) return k;
  throw ConfigError("vertices are not adjacent");
}

// Y += alpha * op(O) applied to leg `leg` of X, op(O) = O or O^T.
void apply_leg(const Mat& o, bool transpose, int leg, const std::array<int, 3>& d, const double* x,
               double* y, double alpha) {
  const int d0 = d[0], d1 = d[1], d2 = d[2];
  if (leg == 0) {
    ConstMapMat xm(x, d0, d1 * d2);
    MapMat ym(y, d0, d1 * d2);
    if (transpose)
      ym.noalias() += alpha * o.transpose() * xm;
    else
      ym.noalias() += alpha * o * xm;
  } else if (leg == 2) {
    ConstMapMat xm(x, d0 * d1, d2);
    MapMat ym(y, d0 * d1, d2);
    if (transpose)
      ym.noalias() += alpha * xm * o;
    else
      ym.noalias() += alpha * xm * o.transpose();
  } else {
    for (int c = 0; c < d2; ++c) {
      ConstMapMat xm(x + static_cast<std::ptrdiff_t>(c) * d0 * d1, d0, d1);
      MapMat ym(y + static_cast<std::ptrdiff_t>(c) * d0 * d1, d0, d1);
      if (transpose)
        ym.noalias() += alpha * xm * o;
      else
        ym.noalias() += alpha * xm * o.transpose();
    }
  }
}

// Renormalized operators of the sites on one side of a directed edge.
struct Block {
  int dim = 0;
  SiteSet mask = 0;
  Mat h;
  std::vector<int> sites;  // sites with a bond leaving the block
  std::vector<Mat> sz, sp;
  bool valid = false;
};

struct Partner {
  int site;
  double j;
};

struct CrossTerm {
  int k, l;  // legs
  const Mat* sz_k;
  const Mat* sp_k;
  Mat bz, bp;  // sum_j J_ij S^z_j, sum_j J_ij S^+_j on leg l
};

// H acting on a 3-leg tensor whose legs carry the given blocks (nullptr = no operators).
class EffectiveHamiltonian {
 public:
  EffectiveHamiltonian(std::array<const Block*, 3> blocks, std::array<int, 3> dims,
                       const std::vector<std::vector<Partner>>& partners, double shift)
      : blocks_(blocks), dims_(dims), shift_(shift) {
    for (int k = 0; k < 3; ++k) {
      if (blocks_[k] == nullptr) continue;
      for (int l = k + 1; l < 3; ++l) {
        if (blocks_[l] == nullptr) continue;
        const Block& bk = *blocks_[k];
        const Block& bl = *blocks_[l];
        for (std::size_t a = 0; a < bk.sites.size(); ++a) {
          CrossTerm term{k, l, &bk.sz[a], &bk.sp[a], Mat::Zero(bl.dim, bl.dim), Mat::Zero(bl.dim, bl.dim)};
          bool any = false;
          for (const auto& p : partners[bk.sites[a]]) {
            if (!(bl.mask >> p.site & 1u)) continue;
            const auto it = std::find(bl.sites.begin(), bl.sites.end(), p.site);
            const auto b = static_cast<std::size_t>(it - bl.sites.begin());
            term.bz += p.j * bl.sz[b];
            term.bp += p.j * bl.sp[b];
            any = true;
          }
          if (any) cross_.push_back(std::move(term));
        }
      }
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2]; }

  void apply(const double* x, double* y) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) y[i] = -shift_ * x[i];
    for (int k = 0; k < 3; ++k)
      if (blocks_[k] != nullptr) apply_leg(blocks_[k]->h, false, k, dims_, x, y, 1.0);
    tmp_.resize(n);
    for (const auto& t : cross_) {
      std::fill(tmp_.begin(), tmp_.end(), 0.0);
      apply_leg(*t.sz_k, false, t.k, dims_, x, tmp_.data(), 1.0);
      apply_leg(t.bz, false, t.l, dims_, tmp_.data(), y, 1.0);
      std::fill(tmp_.begin(), tmp_.end(), 0.0);
      apply_leg(*t.sp_k, false, t.k, dims_, x, tmp_.data(), 1.0);
      apply_leg(t.bp, true, t.l, dims_, tmp_.data(), y, 0.5);
      std::fill(tmp_.begin(), tmp_.end(), 0.0);
      apply_leg(*t.sp_k, true, t.k, dims_, x, tmp_.data(), 1.0);
      apply_leg(t.bp, false, t.l, dims_, tmp_.data(), y, 0.5);
    }
  }

 private:
  std::array<const Block*, 3> blocks_;
  std::array<int, 3> dims_;
  double shift_;
  std::vector<CrossTerm> cross_;
  mutable std::vector<double> tmp_;
};

// Distance of every vertex from the nearer endpoint of an edge.
std::vector<int> distances_to_edge(const TtnTopology& t, int edge) {
  std::vector<int> dist(t.n_vertices(), -1);
  std::vector<int> queue = {t.edge(edge)[0], t.edge(edge)[1]};
  dist[queue[0]] = dist[queue[1]] = 0;
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const int v = queue[q];
    for (int w : t.neighbors(v))
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

void check_bonds(const BondList& bonds, int n) {
  for (const auto& b : bonds)
    if (b.i < 0 || b.j >= n || b.i >= b.j) throw ConfigError("bond does not fit the topology");
}

// Lambda with rows indexing the side of w.
Mat lambda_from(const TtnState& s, int w) {
  return s.topology.edge(s.center)[0] == w ? s.lambda : Mat(s.lambda.transpose());
}

void set_lambda(TtnState& s, int edge, int w, const Mat& lw) {
  s.center = edge;
  s.lambda = s.topology.edge(edge)[0] == w ? lw : Mat(lw.transpose());
}

// W_w times lambda on the center leg: the center absorbed into the vertex.
Tensor3 absorb_center(const TtnState& s, int w) {
  const auto& e = s.topology.edge(s.center);
  const int p = e[0] == w ? e[1] : e[0];
  const int kp = leg_of(s.topology, w, p);
  const Tensor3& t = s.tensor(w);
  Tensor3 x(t.dims);
  apply_leg(lambda_from(s, w), true, kp, t.dims, t.data.data(), x.data.data(), 1.0);
  return x;
}

// Moves the center from an edge at w to the edge (w, q).
void step_center(TtnState& s, int w, int q) {
  const int kq = leg_of(s.topology, w, q);
  const Tensor3 x = absorb_center(s, w);
  const Mat m = matricize(x, kq);
  const int dq = x.dims[kq];
  Eigen::HouseholderQR<Mat> qr(m);
  const Mat qm = qr.householderQ() * Mat::Identity(m.rows(), dq);
  const Mat r = qr.matrixQR().topRows(dq).triangularView<Eigen::Upper>();
  s.tensor(w) = from_matrix(qm, kq, x.dims);
  set_lambda(s, s.topology.edge_between(w, q), w, r);
}

class Engine {
 public:
  Engine(TtnState& state, const BondList& bonds) : s_(state), t_(state.topology) {
    const int n = t_.n_sites();
    check_bonds(bonds, n);
    partners_.assign(n, {});
    for (const auto& b : bonds) {
      partners_[b.i].push_back({b.j, b.coupling});
      partners_[b.j].push_back({b.i, b.coupling});
    }
    shift_ = energy_shift(bonds);
    blocks_.resize(2 * t_.n_edges());
  }

  double shift() const { return shift_; }

  Block& block(int x, int y) {
    const int e = t_.edge_between(x, y);
    return blocks_[2 * e + (t_.edge(e)[0] == x ? 0 : 1)];
  }

  // Block (x -> y) from the tensor at x, which must be isometric toward y.
  void build(int x, int y) {
    Block& out = block(x, y);
    out.mask = t_.side(x, y);
    if (t_.is_leaf(x)) {
      out.dim = 2;
      out.h = Mat::Zero(2, 2);
      out.sites.clear();
      out.sz.clear();
      out.sp.clear();
      if (!partners_[x].empty()) {
        out.sites.push_back(x);
        Mat sz = Mat::Zero(2, 2);
        sz(0, 0) = 0.5;
        sz(1, 1) = -0.5;
        Mat sp = Mat::Zero(2, 2);
        sp(0, 1) = 1.0;
        out.sz.push_back(sz);
        out.sp.push_back(sp);
      }
      out.valid = true;
      return;
    }
    const int k = leg_of(t_, x, y);
    std::array<int, 2> in{};
    int c = 0;
    for (int j = 0; j < 3; ++j)
      if (j != k) in[c++] = j;
    const auto& nb = t_.neighbors(x);
    const Block& b0 = block(nb[in[0]], x);
    const Block& b1 = block(nb[in[1]], x);
    if (!b0.valid || !b1.valid) throw NumericalError("internal error: stale block");
    const Mat w = matricize(s_.tensor(x), k);
    const std::array<int, 3> dims = {b0.dim, b1.dim, static_cast<int>(w.cols())};
    const EffectiveHamiltonian heff({&b0, &b1, nullptr}, dims, partners_, 0.0);
    Mat hw(w.rows(), w.cols());
    heff.apply(w.data(), hw.data());

    Block nb_out;
    nb_out.dim = dims[2];
    nb_out.mask = out.mask;
    nb_out.h = w.transpose() * hw;
    nb_out.h = 0.5 * (nb_out.h + nb_out.h.transpose()).eval();
    Mat tmp(w.rows(), w.cols());
    auto carry = [&](const Block& b, int leg) {
      for (std::size_t a = 0; a < b.sites.size(); ++a) {
        const int site = b.sites[a];
        const bool leaves = std::any_of(partners_[site].begin(), partners_[site].end(),
                                        [&](const Partner& p) { return !(out.mask >> p.site & 1u); });
        if (!leaves) continue;
        nb_out.sites.push_back(site);
        tmp.setZero();
        apply_leg(b.sz[a], false, leg, dims, w.data(), tmp.data(), 1.0);
        nb_out.sz.push_back(w.transpose() * tmp);
        tmp.setZero();
        apply_leg(b.sp[a], false, leg, dims, w.data(), tmp.data(), 1.0);
        nb_out.sp.push_back(w.transpose() * tmp);
      }
    };
    carry(b0, 0);
    carry(b1, 1);
    nb_out.valid = true;
    out = std::move(nb_out);
  }

  // Builds every block pointing toward the center edge.
  void build_toward_center() {
    std::function<void(int, int)> ensure = [&](int x, int y) {
      for (int z : t_.neighbors(x))
        if (z != y) ensure(z, x);
      build(x, y);
    };
    const auto& e = t_.edge(s_.center);
    ensure(e[0], e[1]);
    ensure(e[1], e[0]);
  }

  EffectiveHamiltonian center_operator(double shift) {
    const auto& e = t_.edge(s_.center);
    const Block& a = block(e[0], e[1]);
    const Block& b = block(e[1], e[0]);
    return EffectiveHamiltonian({&a, &b, nullptr}, {a.dim, b.dim, 1}, partners_, shift);
  }

  double center_energy() {
    const auto heff = center_operator(0.0);
    Mat y(s_.lambda.rows(), s_.lambda.cols());
    heff.apply(s_.lambda.data(), y.data());
    return s_.lambda.cwiseProduct(y).sum();
  }

  // Lowest eigenvector of the center operator, warm-started from lambda.
  double solve_center() {
    const auto heff = center_operator(0.0);
    const std::size_t dim = heff.size();
    LanczosOptions opts;
    opts.max_krylov = 60;
    opts.max_restarts = 20;
    opts.tolerance = 1e-11;
    const MatVec mv = [&](std::span<const double> x, std::span<double> y) {
      heff.apply(x.data(), y.data());
    };
    const std::span<const double> start(s_.lambda.data(), dim);
    const LanczosResult r = lowest_eigenpair(dim, mv, start, opts);
    if (!std::isfinite(r.value)) throw NumericalError("non-finite energy in center update");
    s_.lambda = ConstMapMat(r.vector.data(), s_.lambda.rows(), s_.lambda.cols());
    return r.value;
  }

  // Gradient half of the shifted energy for the tensor at w; center on an edge at w.
  Tensor3 gradient(int w) {
    const auto& nb = t_.neighbors(w);
    const auto& e = t_.edge(s_.center);
    if (e[0] != w && e[1] != w) throw ConfigError("environment needs the center next to the vertex");
    const int p = e[0] == w ? e[1] : e[0];
    const int kp = leg_of(t_, w, p);
    const Tensor3 x = absorb_center(s_, w);
    const EffectiveHamiltonian heff({&block(nb[0], w), &block(nb[1], w), &block(nb[2], w)}, x.dims,
                                    partners_, shift_);
    Tensor3 y(x.dims);
    heff.apply(x.data.data(), y.data.data());
    Tensor3 g(x.dims);
    apply_leg(lambda_from(s_, w), false, kp, x.dims, y.data.data(), g.data.data(), 1.0);
    return g;
  }

  // SVD update of the tensor at w, then refresh the block it feeds on the center edge.
  void update_vertex(int w) {
    update_isometry(s_, w, gradient(w));
    const auto& e = t_.edge(s_.center);
    build(w, e[0] == w ? e[1] : e[0]);
  }

  void step(int w, int q) {
    step_center(s_, w, q);
    build(w, q);
  }

  // Depth-first walk below w, entered and left with the center on (w, p).
  double descend(int w, int p) {
    double value = std::numeric_limits<double>::quiet_NaN();
    if (t_.is_leaf(w)) return value;
    for (int c : t_.neighbors(w)) {
      if (c == p || t_.is_leaf(c)) continue;
      update_vertex(w);
      step(w, c);
      solve_center();
      descend(c, w);
    }
    update_vertex(w);
    if (s_.center != t_.edge_between(w, p)) step(w, p);
    return solve_center();
  }

  double sweep() {
    const auto e = t_.edge(s_.center);
    double value = solve_center();
    if (!t_.is_leaf(e[0])) value = descend(e[0], e[1]);
    if (!t_.is_leaf(e[1])) value = descend(e[1], e[0]);
    return value;
  }

 private:
  TtnState& s_;
  const TtnTopology& t_;
  std::vector<std::vector<Partner>> partners_;
  std::vector<Block> blocks_;
  double shift_ = 0.0;
};

}  // namespace

TtnState init_random(const TtnTopology& topology, int chi, std::uint64_t seed) {
  if (chi < 2) throw ConfigError("bond dimension must be at least 2");
  topology.validate();
  TtnState s;
  s.topology = topology;
  s.chi = chi;
  const int n = topology.n_sites();
  s.edge_dims.resize(topology.n_edges());
  for (int e = 0; e < topology.n_edges(); ++e) s.edge_dims[e] = topology.edge_dimension(e, chi);
  s.center = topology.root_edge();
  const std::vector<int> dist = distances_to_edge(topology, s.center);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int v = n; v < topology.n_vertices(); ++v) {
    const auto& nb = topology.neighbors(v);
    std::array<int, 3> dims{};
    int up = -1;
    for (int k = 0; k < 3; ++k) {
      dims[k] = s.edge_dims[topology.edge_between(v, nb[k])];
      if (dist[nb[k]] < dist[v] || (dist[v] == 0 && dist[nb[k]] == 0)) up = k;
    }
    Tensor3 t(dims);
    for (double& x : t.data) x = normal(rng);
    const Mat m = matricize(t, up);
    Eigen::HouseholderQR<Mat> qr(m);
    const Mat q = qr.householderQ() * Mat::Identity(m.rows(), dims[up]);
    s.tensors.push_back(from_matrix(q, up, dims));
  }
  const int d = s.edge_dims[s.center];
  s.lambda.resize(d, d);
  for (Eigen::Index j = 0; j < s.lambda.cols(); ++j)
    for (Eigen::Index i = 0; i < s.lambda.rows(); ++i) s.lambda(i, j) = normal(rng);
  s.lambda /= s.lambda.norm();
  return s;
}

int toward_center(const TtnState& state, int v) {
  const auto& t = state.topology;
  const auto& e = t.edge(state.center);
  if (v == e[0]) return e[1];
  if (v == e[1]) return e[0];
  const std::vector<int> dist = distances_to_edge(t, state.center);
  for (int w : t.neighbors(v))
    if (dist[w] < dist[v]) return w;
  throw ConfigError("vertex is not connected to the center");
}

void move_center(TtnState& state, int edge) {
  const auto& t = state.topology;
  if (edge < 0 || edge >= t.n_edges()) throw ConfigError("move_center: unknown edge");
  const std::vector<int> dist = distances_to_edge(t, edge);
  while (state.center != edge) {
    const auto e = t.edge(state.center);
    const int w = dist[e[0]] <= dist[e[1]] ? e[0] : e[1];
    const int p = w == e[0] ? e[1] : e[0];
    int q = -1;
    for (int z : t.neighbors(w))
      if (z != p && (q < 0 || dist[z] < dist[q])) q = z;
    step_center(state, w, q);
  }
}

double isometry_residual(const TtnState& state) {
  double worst = 0.0;
  const auto& t = state.topology;
  for (int v = t.n_sites(); v < t.n_vertices(); ++v) {
    const int k = leg_of(t, v, toward_center(state, v));
    const Mat m = matricize(state.tensor(v), k);
    const Mat g = m.transpose() * m - Mat::Identity(m.cols(), m.cols());
    worst = std::max(worst, g.cwiseAbs().maxCoeff());
  }
  return worst;
}

double energy_shift(const BondList& bonds) {
  double s = 0.0;
  for (const auto& b : bonds) s += std::max(0.25 * b.coupling, -0.75 * b.coupling);
  return s;
}

double energy(const TtnState& state, const BondList& bonds) {
  TtnState copy = state;
  Engine engine(copy, bonds);
  engine.build_toward_center();
  const double e = engine.center_energy();
  if (!std::isfinite(e)) throw NumericalError("non-finite energy");
  return e;
}

Tensor3 environment(const TtnState& state, const BondList& bonds, int vertex) {
  const auto& t = state.topology;
  if (vertex < t.n_sites() || vertex >= t.n_vertices())
    throw ConfigError("environment needs an internal vertex");
  TtnState copy = state;
  move_center(copy, t.edge_between(vertex, toward_center(state, vertex)));
  Engine engine(copy, bonds);
  engine.build_toward_center();
  return engine.gradient(vertex);
}

void update_isometry(TtnState& state, int vertex, const Tensor3& env) {
  const auto& t = state.topology;
  if (vertex < t.n_sites() || vertex >= t.n_vertices())
    throw ConfigError("update_isometry needs an internal vertex");
  Tensor3& w = state.tensor(vertex);
  if (env.dims != w.dims) throw ConfigError("environment shape does not match the tensor");
  const int k = leg_of(t, vertex, toward_center(state, vertex));
  const Mat g = matricize(env, k);
  if (!g.allFinite()) throw NumericalError("non-finite environment");
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  w = from_matrix(-svd.matrixU() * svd.matrixV().transpose(), k, w.dims);
}

Wavefunction to_dense(const TtnState& state) {
  const auto& t = state.topology;
  const int n = t.n_sites();
  if (n > 20) throw ConfigError("to_dense supports at most 20 sites");
  struct Part {
    Mat f;                             // rows: configurations of the side, cols: leg
    std::vector<std::uint64_t> bits;   // basis bits of each row
  };
  std::function<Part(int, int)> contract = [&](int x, int y) -> Part {
    if (t.is_leaf(x)) return {Mat::Identity(2, 2), {0, std::uint64_t{1} << x}};
    const int k = leg_of(t, x, y);
    std::array<int, 2> in{};
    int c = 0;
    for (int j = 0; j < 3; ++j)
      if (j != k) in[c++] = j;
    const Part a = contract(t.neighbors(x)[in[0]], x);
    const Part b = contract(t.neighbors(x)[in[1]], x);
    const Mat w = matricize(state.tensor(x), k);
    const Eigen::Index da = a.f.cols(), db = b.f.cols();
    Part out;
    out.f.resize(a.f.rows() * b.f.rows(), w.cols());
    for (Eigen::Index col = 0; col < w.cols(); ++col) {
      const ConstMapMat wc(w.col(col).data(), da, db);
      const Mat block = a.f * wc * b.f.transpose();
      out.f.col(col) = Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
    }
    out.bits.reserve(a.bits.size() * b.bits.size());
    for (std::uint64_t bb : b.bits)
      for (std::uint64_t ab : a.bits) out.bits.push_back(ab | bb);
    return out;
  };
  const auto& e = t.edge(state.center);
  const Part a = contract(e[0], e[1]);
  const Part b = contract(e[1], e[0]);
  const Mat psi = a.f * state.lambda * b.f.transpose();
  std::vector<double> amps(std::size_t{1} << n, 0.0);
  for (Eigen::Index j = 0; j < psi.cols(); ++j)
    for (Eigen::Index i = 0; i < psi.rows(); ++i) amps[a.bits[i] | b.bits[j]] = psi(i, j);
  return {n, std::move(amps)};
}

namespace {

RestartRecord run_restart(const TtnTopology& topology, const BondList& bonds,
                          const OptimizeOptions& o, int restart, TtnState& state) {
  RestartRecord rec;
  rec.restart = restart;
  rec.seed = o.seed + static_cast<std::uint64_t>(restart);
  try {
    state = init_random(topology, o.chi, rec.seed);
    Engine engine(state, bonds);
    engine.build_toward_center();
    double previous = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= o.max_sweeps; ++sweep) {
      const double e = engine.sweep();
      if (!std::isfinite(e)) throw NumericalError("non-finite energy after sweep");
      rec.trace.push_back(e);
      rec.sweeps = sweep;
      if (o.on_sweep) o.on_sweep(state, restart, sweep, e);
      if (std::abs(previous - e) < o.tol) {
        rec.converged = true;
        break;
      }
      previous = e;
    }
    rec.energy = rec.trace.back();
  } catch (const NumericalError& err) {
    rec.failed = true;
    rec.error = err.what();
    rec.energy = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

}  // namespace

OptimizeResult optimize(const TtnTopology& topology, const BondList& bonds,
                        const OptimizeOptions& options) {
  if (options.restarts < 1) throw ConfigError("need at least one restart");
  if (options.max_sweeps < 1) throw ConfigError("need at least one sweep");
  if (!(options.tol >= 0.0)) throw ConfigError("tolerance must be non-negative");
  if (options.chi < 2) throw ConfigError("bond dimension must be at least 2");
  topology.validate();
  check_bonds(bonds, topology.n_sites());

  const int count = options.restarts;
  std::vector<RestartRecord> records(count);
  std::vector<TtnState> states(count);
  int threads = options.threads;
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, count);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < count; r = next++)
      records[r] = run_restart(topology, bonds, options, r, states[r]);
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  OptimizeReport report;
  report.network = topology.name();
  report.chi = options.chi;
  report.seed = options.seed;
  report.exact_energy = options.exact_energy;
  for (int r = 0; r < count; ++r)
    if (!records[r].failed && (report.best_restart < 0 || records[r].energy < records[report.best_restart].energy))
      report.best_restart = r;
  if (report.best_restart < 0)
    throw NumericalError("every restart failed: " + records.front().error);
  report.restarts = std::move(records);
  const auto& best = report.restarts[report.best_restart];
  report.energy = best.energy;
  report.sweeps = best.sweeps;
  report.converged = best.converged;
  report.delta_e = options.exact_energy ? report.energy - *options.exact_energy
                                        : std::numeric_limits<double>::quiet_NaN();
  return {std::move(states[report.best_restart]), std::move(report)};
}

void write_report_csv(std::ostream& os, const OptimizeReport& report, bool header) {
  if (header) os << "network,chi,seed,restart,sweeps,energy,delta_e,converged\n";
  const auto prec = os.precision();
  os << std::setprecision(12);
  for (const auto& r : report.restarts) {
    os << report.network << ',' << report.chi << ',' << r.seed << ',' << r.restart << ',' << r.sweeps
       << ',';
    if (r.failed)
      os << "nan,nan";
    else if (report.exact_energy)
      os << r.energy << ',' << r.energy - *report.exact_energy;
    else
      os << r.energy << ",nan";
    os << ',' << (r.converged ? "true" : "false") << '\n';
  }
  os.precision(prec);
}

}  // namespace ebpttn
