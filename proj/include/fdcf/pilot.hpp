/**
 * @file pilot.hpp
 * @brief Heap-based greedy pilot assignment, a brute-force oracle, and LMMSE
 *        channel estimation under pilot contamination.
 *
 * Users sharing a pilot contaminate each other's channel estimates. The
 * greedy assignment keeps a min-heap of per-pilot reused coefficients (PRC)
 * and a max-heap of unassigned users keyed by their weighted load, and always
 * gives the heaviest remaining user the lightest pilot.
 */
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdcf {

enum class HeapKind { kMin, kMax };

/// Array-backed binary heap with payloads. Ties on the key are broken toward
/// the smaller payload so traces are deterministic.
template <typename Payload>
class Heap {
 public:
  struct Node {
    double key;
    Payload payload;
  };

  explicit Heap(HeapKind kind) : kind_(kind) {}

  static Heap generate(const std::vector<double>& keys, const std::vector<Payload>& payloads,
                       HeapKind kind) {
    if (keys.size() != payloads.size()) {
      throw std::invalid_argument("Heap::generate: keys and payloads differ in length");
    }
    Heap h(kind);
    h.nodes_.reserve(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) h.nodes_.push_back({keys[i], payloads[i]});
    for (std::size_t i = h.nodes_.size() / 2; i-- > 0;) h.sift_down(i);
    return h;
  }

  const Node& peek() const {
    if (nodes_.empty()) throw std::out_of_range("Heap::peek: empty heap");
    return nodes_.front();
  }

  Node extract() {
    if (nodes_.empty()) throw std::out_of_range("Heap::extract: empty heap");
    Node root = nodes_.front();
    nodes_.front() = nodes_.back();
    nodes_.pop_back();
    if (!nodes_.empty()) sift_down(0);
    return root;
  }

  void replace_siftdown(double key, Payload payload) {
    if (nodes_.empty()) throw std::out_of_range("Heap::replace_siftdown: empty heap");
    nodes_.front() = {key, payload};
    sift_down(0);
  }

  void push(double key, Payload payload) {
    nodes_.push_back({key, payload});
    std::size_t i = nodes_.size() - 1;
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!before(nodes_[i], nodes_[parent])) break;
      std::swap(nodes_[i], nodes_[parent]);
      i = parent;
    }
  }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

 private:
  bool before(const Node& a, const Node& b) const {
    if (a.key != b.key) return kind_ == HeapKind::kMin ? a.key < b.key : a.key > b.key;
    return a.payload < b.payload;
  }

  void sift_down(std::size_t i) {
    const std::size_t n = nodes_.size();
    while (true) {
      std::size_t best = i, l = 2 * i + 1, r = 2 * i + 2;
      if (l < n && before(nodes_[l], nodes_[best])) best = l;
      if (r < n && before(nodes_[r], nodes_[best])) best = r;
      if (best == i) return;
      std::swap(nodes_[i], nodes_[best]);
      i = best;
    }
  }

  HeapKind kind_;
  std::vector<Node> nodes_;
};

struct PilotConfig {
  int tau = 1;               // pilot sequence length (= number of orthogonal pilots)
  Eigen::VectorXd p_tr;      // per-UE training powers, watts
  double noise = 0.0;        // receiver noise variance
};

struct PilotAssignment {
  Eigen::MatrixXi upsilon;          // tau x U, one 1 per column
  Eigen::VectorXd prc;              // per-pilot reused coefficient
  Eigen::VectorXd beta_tilde;       // the loads the assignment was built from
  std::vector<double> prc_updates;  // new PRC value after each contended assignment
};

/// Antenna/power-weighted load of each user:
/// beta_tilde_j = sum_m N_m * tau * p_j * beta_mj.
inline Eigen::VectorXd beta_tilde(const Eigen::MatrixXd& betas_per_ap,
                                  const std::vector<int>& antennas, int tau,
                                  const Eigen::VectorXd& p_tr) {
  const int m_aps = static_cast<int>(betas_per_ap.rows());
  const int users = static_cast<int>(betas_per_ap.cols());
  if (static_cast<int>(antennas.size()) != m_aps || p_tr.size() != users) {
    throw std::invalid_argument("beta_tilde: dimension mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(users);
  for (int j = 0; j < users; ++j) {
    for (int m = 0; m < m_aps; ++m) out(j) += antennas[m] * tau * p_tr(j) * betas_per_ap(m, j);
  }
  return out;
}

/// Greedy min-max assignment. Pilots 1..tau seed users 1..tau in order; the
/// remaining users are drained from a max-heap on beta_tilde and each takes
/// the pilot at the root of a min-heap on the PRCs.
inline PilotAssignment heap_pilot_assignment(const Eigen::VectorXd& load, int tau) {
  const int users = static_cast<int>(load.size());
  if (tau < 1 || tau > users) {
    throw std::invalid_argument("heap_pilot_assignment: require 1 <= tau <= #users");
  }
  PilotAssignment out;
  out.upsilon = Eigen::MatrixXi::Zero(tau, users);
  out.prc = Eigen::VectorXd::Zero(tau);
  out.beta_tilde = load;
  for (int i = 0; i < tau; ++i) {
    out.upsilon(i, i) = 1;
    out.prc(i) = load(i);
  }
  if (users == tau) return out;

  std::vector<double> ue_keys;
  std::vector<int> ue_ids;
  for (int j = tau; j < users; ++j) {
    ue_keys.push_back(load(j));
    ue_ids.push_back(j);
  }
  auto ue_heap = Heap<int>::generate(ue_keys, ue_ids, HeapKind::kMax);
  std::vector<double> pilot_keys(out.prc.data(), out.prc.data() + tau);
  std::vector<int> pilot_ids(tau);
  for (int i = 0; i < tau; ++i) pilot_ids[i] = i;
  auto pilot_heap = Heap<int>::generate(pilot_keys, pilot_ids, HeapKind::kMin);

  while (!ue_heap.empty()) {
    auto ue = ue_heap.extract();
    int pilot = pilot_heap.peek().payload;
    double updated = out.prc(pilot) + ue.key;
    out.prc(pilot) = updated;
    out.upsilon(pilot, ue.payload) = 1;
    out.prc_updates.push_back(updated);
    pilot_heap.replace_siftdown(updated, pilot);
  }
  return out;
}

/// Exhaustive min-max PRC oracle for small instances (tau^U <= 1e6).
inline std::pair<Eigen::MatrixXi, double> brute_force_assignment(const Eigen::VectorXd& load,
                                                                 int tau) {
  const int users = static_cast<int>(load.size());
  if (tau < 1 || tau > users) {
    throw std::invalid_argument("brute_force_assignment: require 1 <= tau <= #users");
  }
  double combos = std::pow(static_cast<double>(tau), users);
  if (combos > 1e6) {
    throw std::invalid_argument("brute_force_assignment: instance too large");
  }
  std::vector<int> pick(users, 0);
  Eigen::VectorXd prc = Eigen::VectorXd::Zero(tau);
  prc(0) = load.sum();  // everything on pilot 0 initially
  double best = prc.maxCoeff();
  std::vector<int> best_pick = pick;
  while (true) {
    // Odometer step.
    int j = 0;
    for (; j < users; ++j) {
      prc(pick[j]) -= load(j);
      if (++pick[j] < tau) {
        prc(pick[j]) += load(j);
        break;
      }
      pick[j] = 0;
      prc(0) += load(j);
    }
    if (j == users) break;  // wrapped around
    double v = prc.maxCoeff();
    if (v < best) {
      best = v;
      best_pick = pick;
    }
  }
  Eigen::MatrixXi upsilon = Eigen::MatrixXi::Zero(tau, users);
  for (int u = 0; u < users; ++u) upsilon(best_pick[u], u) = 1;
  return {upsilon, best};
}

namespace pilot_detail {

inline int pilot_of(const Eigen::MatrixXi& upsilon, int user) {
  for (int i = 0; i < upsilon.rows(); ++i)
    if (upsilon(i, user) == 1) return i;
  throw std::invalid_argument("pilot assignment: user " + std::to_string(user + 1) +
                              " has no pilot");
}

// tau * sum_{j' sharing j's pilot} p_j' beta_rj' + noise.
inline double contamination(const Eigen::MatrixXi& upsilon, const Eigen::MatrixXd& betas, int r,
                            int pilot, const Eigen::VectorXd& p_tr, int tau, double noise) {
  double acc = noise;
  for (int j = 0; j < upsilon.cols(); ++j) {
    if (upsilon(pilot, j) == 1) acc += tau * p_tr(j) * betas(r, j);
  }
  return acc;
}

}  // namespace pilot_detail

/// LMMSE estimates from a received training block. `y_tr` holds one row per
/// receive antenna and one column per pilot (the observation already
/// projected onto the orthonormal pilot basis); `betas` is (receivers x U)
/// with `rx_of_row` mapping antenna rows to receiver indices. Column j of the
/// result is the estimate of user j's channel at every antenna.
///
/// The same routine covers the AP-side links (receivers = APs, rows =
/// antennas) and the scalar cross-link variant (receivers = DL users, one row
/// each) that feeds the interference-cancellation stage.
inline Eigen::MatrixXcd lmmse_estimate(const Eigen::MatrixXcd& y_tr,
                                       const Eigen::MatrixXi& upsilon,
                                       const Eigen::MatrixXd& betas,
                                       const std::vector<int>& rx_of_row,
                                       const Eigen::VectorXd& p_tr, int tau, double noise) {
  const int rows = static_cast<int>(y_tr.rows());
  const int users = static_cast<int>(upsilon.cols());
  if (y_tr.cols() != tau || static_cast<int>(rx_of_row.size()) != rows ||
      p_tr.size() != users || betas.cols() != users) {
    throw std::invalid_argument("lmmse_estimate: dimension mismatch");
  }
  Eigen::MatrixXcd est(rows, users);
  for (int j = 0; j < users; ++j) {
    int pilot = pilot_detail::pilot_of(upsilon, j);
    for (int r = 0; r < rows; ++r) {
      int rx = rx_of_row[r];
      double den = pilot_detail::contamination(upsilon, betas, rx, pilot, p_tr, tau, noise);
      double c = std::sqrt(tau * p_tr(j)) * betas(rx, j) / den;
      est(r, j) = c * y_tr(r, pilot);
    }
  }
  return est;
}

/// Closed-form estimation error variance:
/// eps_rj = beta_rj * (1 - tau p_j beta_rj / contamination_rj).
inline Eigen::MatrixXd estimation_error_variance(const Eigen::MatrixXi& upsilon,
                                                 const Eigen::MatrixXd& betas,
                                                 const Eigen::VectorXd& p_tr, int tau,
                                                 double noise) {
  const int receivers = static_cast<int>(betas.rows());
  const int users = static_cast<int>(betas.cols());
  Eigen::MatrixXd eps(receivers, users);
  for (int j = 0; j < users; ++j) {
    int pilot = pilot_detail::pilot_of(upsilon, j);
    for (int r = 0; r < receivers; ++r) {
      double den = pilot_detail::contamination(upsilon, betas, r, pilot, p_tr, tau, noise);
      eps(r, j) = betas(r, j) * (1.0 - tau * p_tr(j) * betas(r, j) / den);
    }
  }
  return eps;
}

}  // namespace fdcf
