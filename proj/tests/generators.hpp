#pragma once

#include <utility>
#include <vector>

#include "oracles.hpp"
#include "phimdp/icost.hpp"
#include "phimdp/mdp.hpp"

namespace gen {

// Random U: each (s, a) row spreads its mass over (s', r) pairs, some cells left at zero.
inline std::pair<phimdp::UFamily, oracle::DenseU> random_u(std::size_t m, std::size_t na, std::size_t nr, phimdp::Rng& rng) {
  phimdp::UFamily u(m, na, nr);
  oracle::DenseU d{m, na, nr, std::vector<double>(na * nr * m * m, 0.0)};
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      std::vector<double> w(m * nr);
      double sum = 0.0;
      for (auto& x : w) {
        x = phimdp::uniform_index(rng, 4) == 0 ? 0.0 : phimdp::uniform_open_closed(rng);
        sum += x;
      }
      if (sum == 0.0) {
        w[0] = 1.0;
        sum = 1.0;
      }
      for (std::size_t t = 0; t < m; ++t) {
        for (std::size_t r = 0; r < nr; ++r) {
          const double v = w[t * nr + r] / sum;
          if (v == 0.0) continue;
          u.add(static_cast<phimdp::Symbol>(a), static_cast<phimdp::Symbol>(r), s, t, v);
          d.at(a, r, s, t) = v;
        }
      }
    }
  }
  return {std::move(u), std::move(d)};
}

inline phimdp::MdpEstimate to_estimate(const oracle::DenseMdp& d, double gamma) {
  phimdp::MdpEstimate m;
  m.num_actions = d.A;
  m.gamma = gamma;
  m.rows.resize(d.S * d.A);
  for (std::size_t s = 0; s < d.S; ++s) {
    m.states.push_back(phimdp::StateId{{static_cast<phimdp::Symbol>(s)}, false});
    m.tensor_index.push_back(static_cast<phimdp::StateIndex>(s));
    for (std::size_t a = 0; a < d.A; ++a) {
      for (std::size_t t = 0; t < d.S; ++t) {
        if (d.P(s, a, t) > 0.0) m.rows[s * d.A + a].push_back({static_cast<std::uint32_t>(t), d.P(s, a, t), d.R(s, a, t)});
      }
    }
  }
  return m;
}

inline oracle::DenseMdp random_mdp(std::size_t S, std::size_t A, phimdp::Rng& rng) {
  oracle::DenseMdp d{S, A, std::vector<double>(S * A * S, 0.0), std::vector<double>(S * A * S, 0.0)};
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double sum = 0.0;
      for (std::size_t t = 0; t < S; ++t) {
        const double w = phimdp::uniform_index(rng, 3) == 0 ? 0.0 : phimdp::uniform_open_closed(rng);
        d.p[(s * A + a) * S + t] = w;
        d.r[(s * A + a) * S + t] = 2.0 * phimdp::uniform_open_closed(rng) - 0.5;
        sum += w;
      }
      if (sum == 0.0) {
        d.p[(s * A + a) * S + s] = 1.0;
        sum = 1.0;
      }
      for (std::size_t t = 0; t < S; ++t) d.p[(s * A + a) * S + t] /= sum;
    }
  }
  return d;
}

}  // namespace gen
