#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "entswitch/model.hpp"

namespace entswitch::ctmc {

/// Occupancy of the two most-loaded links, ordered so that a >= b.  The
/// policies never store qubits on more than two links at a time, so this
/// pair is a complete state description.
struct ChainState {
  int a = 0;
  int b = 0;

  bool operator==(const ChainState&) const = default;
};

inline std::string to_string(ChainState s) {
  return "(" + std::to_string(s.a) + "," + std::to_string(s.b) + ")";
}

/// Canonical state order for a given buffer size.
inline std::vector<ChainState> chain_states(int buffer_size) {
  if (buffer_size == 1) return {{0, 0}, {1, 0}, {1, 1}};
  return {{0, 0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2}};
}

/// One outgoing branch of a state.  The rate already carries the policy
/// probability of taking the branch; bsm_count/ghz_count are the expected
/// measurements per traversal (0 or 1 here, since branches are not merged).
/// Same-state entries model arrivals whose fresh qubit is dropped; they
/// carry physical event rate but cancel out of the generator.
struct Transition {
  ChainState from{};
  ChainState to{};
  double rate = 0.0;
  double bsm_count = 0.0;
  double ghz_count = 0.0;
};

struct MarkovChain {
  SwitchConfig config{};
  PolicyParams policy{};
  std::vector<ChainState> states;
  std::vector<Transition> transitions;

  int size() const { return static_cast<int>(states.size()); }

  int index_of(ChainState s) const {
    for (int i = 0; i < size(); ++i)
      if (states[i] == s) return i;
    throw std::out_of_range("state " + to_string(s) + " not in chain");
  }

  /// Dense generator, row-major.  Off-diagonals are summed branch rates,
  /// the diagonal is minus the off-diagonal row sum (self-loops cancel).
  std::vector<double> generator() const {
    const int n = size();
    std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
    for (const Transition& t : transitions) {
      const int i = index_of(t.from);
      const int j = index_of(t.to);
      if (i != j) q[static_cast<std::size_t>(i) * n + j] += t.rate;
    }
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) row += q[static_cast<std::size_t>(i) * n + j];
      q[static_cast<std::size_t>(i) * n + i] = -row;
    }
    return q;
  }

  /// One transition per line: `from -> to  rate=<v>  bsm=<v>  ghz=<v>`.
  std::string dump() const {
    std::string out;
    char buf[160];
    for (const Transition& t : transitions) {
      std::snprintf(buf, sizeof(buf), "%s -> %s  rate=%.12g  bsm=%.12g  ghz=%.12g\n",
                    to_string(t.from).c_str(), to_string(t.to).c_str(), t.rate,
                    t.bsm_count, t.ghz_count);
      out += buf;
    }
    return out;
  }
};

/// Builds the chain for the validated (config, policy) pair.  Zero-rate
/// branches are omitted, so alpha = 0 yields exactly the decoherence-free
/// chain.
inline MarkovChain build_chain(const SwitchConfig& cfg, const PolicyParams& pol) {
  validate_config(cfg, pol);
  MarkovChain chain;
  chain.config = cfg;
  chain.policy = pol;
  chain.states = chain_states(cfg.buffer_size);

  const double k = cfg.k;
  const double mu = cfg.mu;
  const double alpha = cfg.alpha;
  const double r1 = pol.r1, r2 = pol.r2, r3 = pol.r3;

  auto add = [&chain](ChainState from, ChainState to, double rate, double bsm,
                      double ghz) {
    if (rate > 0.0) chain.transitions.push_back({from, to, rate, bsm, ghz});
  };

  if (cfg.buffer_size == 1) {
    add({0, 0}, {1, 0}, k * mu, 0, 0);
    add({1, 0}, {1, 0}, mu, 0, 0);  // arrival on the stored link: drop
    add({1, 0}, {0, 0}, (k - 1) * mu * r1, 1, 0);
    add({1, 0}, {1, 1}, (k - 1) * mu * (1 - r1), 0, 0);
    add({1, 1}, {1, 0}, 2 * mu * r3, 1, 0);  // stored-link arrival: swap BSM
    add({1, 1}, {1, 1}, 2 * mu * (1 - r3), 0, 0);
    add({1, 1}, {0, 0}, (k - 2) * mu * r2, 0, 1);  // third link: GHZ
    add({1, 1}, {1, 0}, (k - 2) * mu * (1 - r2), 1, 0);  // third link: BSM
    if (alpha > 0.0) {
      add({1, 0}, {0, 0}, alpha, 0, 0);
      add({1, 1}, {1, 0}, 2 * alpha, 0, 0);
    }
  } else {
    add({0, 0}, {1, 0}, k * mu, 0, 0);
    add({1, 0}, {2, 0}, mu, 0, 0);
    add({1, 0}, {1, 1}, (k - 1) * mu, 0, 0);
    add({2, 0}, {2, 0}, mu, 0, 0);  // full link: drop
    add({2, 0}, {2, 1}, (k - 1) * mu, 0, 0);
    add({1, 1}, {2, 1}, 2 * mu, 0, 0);
    add({1, 1}, {0, 0}, (k - 2) * mu * r2, 0, 1);
    add({1, 1}, {1, 0}, (k - 2) * mu * (1 - r2), 1, 0);
    // (2,1): arrivals on the single-qubit link stack to (2,2); arrivals on
    // the full link may swap against the other link's qubit.  A BSM decision
    // consumes the full link's oldest qubit, a GHZ takes one from each link.
    add({2, 1}, {2, 2}, mu, 0, 0);
    add({2, 1}, {2, 0}, mu * r3, 1, 0);
    add({2, 1}, {2, 1}, mu * (1 - r3), 0, 0);
    add({2, 1}, {1, 0}, (k - 2) * mu * r2, 0, 1);
    add({2, 1}, {1, 1}, (k - 2) * mu * (1 - r2), 1, 0);
    add({2, 2}, {2, 1}, 2 * mu * r3, 1, 0);
    add({2, 2}, {2, 2}, 2 * mu * (1 - r3), 0, 0);
    add({2, 2}, {1, 1}, (k - 2) * mu * r2, 0, 1);
    add({2, 2}, {2, 1}, (k - 2) * mu * (1 - r2), 1, 0);
    if (alpha > 0.0) {
      add({1, 0}, {0, 0}, alpha, 0, 0);
      add({1, 1}, {1, 0}, 2 * alpha, 0, 0);
      add({2, 0}, {1, 0}, 2 * alpha, 0, 0);
      add({2, 1}, {1, 1}, 2 * alpha, 0, 0);
      add({2, 1}, {2, 0}, alpha, 0, 0);
      add({2, 2}, {2, 1}, 4 * alpha, 0, 0);
    }
  }
  return chain;
}

struct StationaryDistribution {
  std::vector<double> pi;
  double residual = 0.0;  // max_j |sum_i pi_i Q_ij| after normalization
};

namespace detail {

/// Solves m x = b in long double with partial pivoting.  Returns false when
/// the matrix is numerically singular.
inline bool solve_dense(std::vector<long double> m, std::vector<long double> b,
                        int n, std::vector<long double>& x) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row)
      if (std::fabs(static_cast<double>(m[static_cast<std::size_t>(row) * n + col])) >
          std::fabs(static_cast<double>(m[static_cast<std::size_t>(pivot) * n + col])))
        pivot = row;
    if (m[static_cast<std::size_t>(pivot) * n + col] == 0.0L) return false;
    if (pivot != col) {
      for (int j = col; j < n; ++j)
        std::swap(m[static_cast<std::size_t>(pivot) * n + j],
                  m[static_cast<std::size_t>(col) * n + j]);
      std::swap(b[pivot], b[col]);
    }
    const long double inv = 1.0L / m[static_cast<std::size_t>(col) * n + col];
    for (int row = col + 1; row < n; ++row) {
      const long double f = m[static_cast<std::size_t>(row) * n + col] * inv;
      if (f == 0.0L) continue;
      for (int j = col; j < n; ++j)
        m[static_cast<std::size_t>(row) * n + j] -=
            f * m[static_cast<std::size_t>(col) * n + j];
      b[row] -= f * b[col];
    }
  }
  x.assign(n, 0.0L);
  for (int row = n - 1; row >= 0; --row) {
    long double acc = b[row];
    for (int j = row + 1; j < n; ++j)
      acc -= m[static_cast<std::size_t>(row) * n + j] * x[j];
    x[row] = acc / m[static_cast<std::size_t>(row) * n + row];
  }
  return true;
}

}  // namespace detail

/// Solves pi Q = 0, sum(pi) = 1.  One balance equation is redundant and is
/// replaced by the normalization; boundary policies (e.g. r1 = 1 or r2 = 0)
/// leave some states transient, so if a replacement choice degenerates the
/// solve retries with another equation.
inline StationaryDistribution solve_stationary(const MarkovChain& chain) {
  const int n = chain.size();
  const std::vector<double> q = chain.generator();

  double scale = 0.0;
  for (double v : q) scale = std::max(scale, std::fabs(v));
  const double tol = 1e-12 * std::max(1.0, scale);

  auto residual_of = [&](const std::vector<double>& pi) {
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        acc += pi[i] * q[static_cast<std::size_t>(i) * n + j];
      worst = std::max(worst, std::fabs(acc));
    }
    return worst;
  };

  for (int repl = n - 1; repl >= 0; --repl) {
    std::vector<long double> m(static_cast<std::size_t>(n) * n, 0.0L);
    std::vector<long double> rhs(n, 0.0L);
    for (int eq = 0; eq < n; ++eq) {
      if (eq == repl) {
        for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(eq) * n + i] = 1.0L;
        rhs[eq] = 1.0L;
      } else {
        for (int i = 0; i < n; ++i)
          m[static_cast<std::size_t>(eq) * n + i] =
              q[static_cast<std::size_t>(i) * n + eq];
      }
    }
    std::vector<long double> x;
    if (!detail::solve_dense(std::move(m), std::move(rhs), n, x)) continue;

    std::vector<double> pi(n);
    bool usable = true;
    long double sum = 0.0L;
    for (int i = 0; i < n; ++i) {
      long double v = x[i];
      if (v < 0.0L) {
        if (v < -1e-9L) {
          usable = false;
          break;
        }
        v = 0.0L;
      }
      sum += v;
      pi[i] = static_cast<double>(v) + 0.0;  // flush -0 to +0
    }
    if (!usable || !(sum > 0.5L) || !(sum < 2.0L)) continue;
    for (double& v : pi) v /= static_cast<double>(sum);

    const double res = residual_of(pi);
    if (res <= tol) return {std::move(pi), res};
  }
  throw std::runtime_error("stationary solve failed: no equation replacement gave a usable distribution");
}

/// Long-run measurement rates: c2 sums bsm rewards over stationary flow,
/// c3 sums ghz rewards.
inline CapacityPoint capacities(const MarkovChain& chain,
                                const StationaryDistribution& dist) {
  if (static_cast<int>(dist.pi.size()) != chain.size())
    throw std::invalid_argument("distribution does not match chain");
  double c2 = 0.0, c3 = 0.0;
  for (const Transition& t : chain.transitions) {
    const double flow = dist.pi[chain.index_of(t.from)] * t.rate;
    c2 += flow * t.bsm_count;
    c3 += flow * t.ghz_count;
  }
  return {c3, c2, chain.policy};
}

/// Convenience wrapper: build, solve, extract.
inline CapacityPoint solve_capacities(const SwitchConfig& cfg, const PolicyParams& pol) {
  const MarkovChain chain = build_chain(cfg, pol);
  return capacities(chain, solve_stationary(chain));
}

}  // namespace entswitch::ctmc
