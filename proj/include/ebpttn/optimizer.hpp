#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebpttn/eigensolver.hpp"
#include "ebpttn/networks.hpp"

namespace ebpttn {

/// Dense 3-leg tensor, element (a, b, c) at a + d0 * (b + d1 * c).
struct Tensor3 {
  std::array<int, 3> dims{};
  std::vector<double> data;

  Tensor3() = default;
  explicit Tensor3(std::array<int, 3> d)
      : dims(d), data(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0.0) {}
  double& operator()(int a, int b, int c) { return data[a + dims[0] * (b + dims[1] * c)]; }
  double operator()(int a, int b, int c) const { return data[a + dims[0] * (b + dims[1] * c)]; }
};

/// Matricization with `leg` as the column index; rows run over the other two
/// legs with the lower-numbered one fastest.
Eigen::MatrixXd matricize(const Tensor3& t, int leg);
Tensor3 from_matrix(const Eigen::MatrixXd& m, int leg, std::array<int, 3> dims);

/// TTN in mixed gauge. Every internal tensor is an isometry toward the center
/// edge, which carries the matrix `lambda`.
struct TtnState {
  TtnTopology topology;
  int chi = 0;
  std::vector<int> edge_dims;  // per edge
  // Internal vertex v at index v - n_sites, legs ordered as topology.neighbors(v).
  std::vector<Tensor3> tensors;
  int center = -1;
  // Rows index the side of topology.edge(center)[0], columns the other side.
  Eigen::MatrixXd lambda;

  const Tensor3& tensor(int v) const { return tensors.at(v - topology.n_sites()); }
  Tensor3& tensor(int v) { return tensors.at(v - topology.n_sites()); }
};

/// Normal random tensors orthonormalized toward the root edge, unit-norm lambda.
TtnState init_random(const TtnTopology& topology, int chi, std::uint64_t seed);

/// Neighbor of v on the path to the center edge.
int toward_center(const TtnState& state, int v);

/// Moves the gauge center to `edge` by QR steps; the represented state is unchanged.
void move_center(TtnState& state, int edge);

/// Largest |W^T W - 1| entry over all internal tensors, matricized toward the center.
double isometry_residual(const TtnState& state);

/// Sum over bonds of the largest eigenvalue of J S_i.S_j, subtracted before
/// linearizing so that every shifted term is negative semidefinite.
double energy_shift(const BondList& bonds);

/// <psi|H|psi> from renormalized block operators; assumes the isometric gauge.
double energy(const TtnState& state, const BondList& bonds);

/// Gradient half of the shifted energy with respect to the tensor at `vertex`,
/// all other tensors fixed: Tr(W^T env) = <psi|H - shift|psi>. Legs follow
/// the vertex's tensor.
Tensor3 environment(const TtnState& state, const BondList& bonds, int vertex);

/// Replaces the tensor at `vertex` by -U V^T, where env = U S V^T is
/// matricized toward the center.
void update_isometry(TtnState& state, int vertex, const Tensor3& env);

/// Full contraction into 2^N amplitudes (N <= 20). Does not assume any gauge.
Wavefunction to_dense(const TtnState& state);

struct OptimizeOptions {
  int chi = 8;
  int max_sweeps = 200;
  double tol = 1e-10;
  int restarts = 10;
  std::uint64_t seed = 1;
  int threads = 1;  // <= 0: one per hardware thread
  std::optional<double> exact_energy;
  // Called after every sweep with (state, restart, sweep, energy). Runs on
  // worker threads when threads > 1.
  std::function<void(const TtnState&, int, int, double)> on_sweep;
};

struct RestartRecord {
  int restart = 0;
  std::uint64_t seed = 0;
  std::vector<double> trace;  // energy after each sweep
  double energy = 0.0;
  int sweeps = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
};

struct OptimizeReport {
  std::string network;
  int chi = 0;
  std::uint64_t seed = 0;
  std::vector<RestartRecord> restarts;
  int best_restart = -1;
  double energy = 0.0;
  std::optional<double> exact_energy;
  double delta_e = 0.0;  // energy - exact, or NaN without an exact energy
  int sweeps = 0;
  bool converged = false;

  const RestartRecord& best() const { return restarts.at(best_restart); }
};

struct OptimizeResult {
  TtnState state;
  OptimizeReport report;
};

/// Best of `restarts` runs; restart k starts from init_random(seed + k). Each
/// sweep walks the tree depth-first from the root edge, updating every visited
/// tensor from its environment and re-solving the center matrix, and ends on
/// the root edge.
OptimizeResult optimize(const TtnTopology& topology, const BondList& bonds,
                        const OptimizeOptions& options = {});

/// CSV with header network,chi,seed,restart,sweeps,energy,delta_e,converged;
/// one row per restart, 12 significant digits.
void write_report_csv(std::ostream& os, const OptimizeReport& report, bool header = true);

}  // namespace ebpttn
