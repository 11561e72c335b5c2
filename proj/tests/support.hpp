#pragma once

// Test-side oracles and generators. These deliberately re-derive results by
// direct enumeration, independent of the library's combination and search
// code paths, so they can vouch for them.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evspec/evspec.hpp"

namespace testsupport {

using namespace evspec;

// --------------------------------------------------------------------------
// The bakers'-shops instance

struct BakersInstance {
  FramePtr frame;
  std::vector<Evidence> evidence;
  DomainPrior prior;
};

inline BakersInstance bakers() {
  FramePtr frame = Frame::create({"bo", "bi", "ro", "ri"}, {"E1", "E2"});
  auto bpa = [&](std::initializer_list<std::string> atoms,
                 std::initializer_list<std::string> events, double mass) {
    return MassFunction(frame, {{Proposition::make(frame, atoms, events), mass}});
  };
  std::vector<Evidence> evidence;
  evidence.push_back({"e1", bpa({"bo"}, {"E1"}, 0.8)});
  evidence.push_back({"e2", bpa({"bi"}, {"E1", "E2"}, 0.7)});
  evidence.push_back({"e3", bpa({"ro", "ri"}, {"E2"}, 0.6)});
  evidence.push_back({"e4", bpa({"bo", "bi"}, {"E1", "E2"}, 0.5)});
  return {frame, std::move(evidence), DomainPrior({{1, 0.6}, {2, 0.4}})};
}

// --------------------------------------------------------------------------
// Brute-force Dempster combination (odometer over complete focal tuples)

struct Pick {
  std::uint64_t action;
  std::uint64_t events;
  double mass;
};

inline std::vector<Pick> picks_of(const MassFunction& bpa) {
  std::vector<Pick> picks;
  for (const auto& [key, mass] : bpa.focal()) picks.push_back({key.first, key.second, mass});
  if (bpa.theta_mass() > 0.0)
    picks.push_back({bpa.frame()->full_action_mask(), bpa.frame()->full_event_mask(),
                     bpa.theta_mass()});
  return picks;
}

struct NaiveCombination {
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> masses;  // normalized, theta included
  double conflict = 0.0;
};

inline NaiveCombination naive_combine(std::span<const MassFunction> bpas) {
  std::vector<std::vector<Pick>> all;
  for (const auto& b : bpas) all.push_back(picks_of(b));
  std::vector<std::size_t> odometer(all.size(), 0);
  NaiveCombination result;
  std::map<std::pair<std::uint64_t, std::uint64_t>, double> raw;
  for (;;) {
    std::uint64_t a = bpas[0].frame()->full_action_mask();
    std::uint64_t e = bpas[0].frame()->full_event_mask();
    double w = 1.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      const Pick& p = all[i][odometer[i]];
      a &= p.action;
      e &= p.events;
      w *= p.mass;
    }
    if (a == 0 || e == 0)
      result.conflict += w;
    else
      raw[{a, e}] += w;
    std::size_t i = 0;
    for (; i < odometer.size(); ++i) {
      if (++odometer[i] < all[i].size()) break;
      odometer[i] = 0;
    }
    if (i == odometer.size()) break;
  }
  for (const auto& [key, mass] : raw) result.masses[key] = mass / (1.0 - result.conflict);
  return result;
}

inline double naive_conflict(std::span<const MassFunction> bpas) {
  if (bpas.size() < 2) return 0.0;
  std::vector<std::vector<Pick>> all;
  for (const auto& b : bpas) all.push_back(picks_of(b));
  std::vector<std::size_t> odometer(all.size(), 0);
  double conflict = 0.0;
  for (;;) {
    std::uint64_t a = bpas[0].frame()->full_action_mask();
    std::uint64_t e = bpas[0].frame()->full_event_mask();
    double w = 1.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      const Pick& p = all[i][odometer[i]];
      a &= p.action;
      e &= p.events;
      w *= p.mass;
    }
    if (a == 0 || e == 0) conflict += w;
    std::size_t i = 0;
    for (; i < odometer.size(); ++i) {
      if (++odometer[i] < all[i].size()) break;
      odometer[i] = 0;
    }
    if (i == odometer.size()) break;
  }
  return conflict;
}

// --------------------------------------------------------------------------
// Set-partition enumeration (plain recursion, no restricted growth strings)

inline void enumerate_partitions_rec(std::size_t n, std::size_t next,
                                     std::vector<std::vector<std::size_t>>& blocks,
                                     std::vector<std::vector<std::vector<std::size_t>>>& out) {
  if (next == n) {
    out.push_back(blocks);
    return;
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].push_back(next);
    enumerate_partitions_rec(n, next + 1, blocks, out);
    blocks[b].pop_back();
  }
  blocks.push_back({next});
  enumerate_partitions_rec(n, next + 1, blocks, out);
  blocks.pop_back();
}

inline std::vector<std::vector<std::vector<std::size_t>>> enumerate_partitions(std::size_t n) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  std::vector<std::vector<std::size_t>> blocks;
  enumerate_partitions_rec(n, 0, blocks, out);
  return out;
}

inline double naive_metaconflict(const std::vector<std::vector<std::size_t>>& blocks,
                                 std::span<const Evidence> evidence,
                                 const DomainPrior& prior) {
  double product = prior.mass(static_cast<int>(blocks.size()));
  for (const auto& block : blocks) {
    std::vector<MassFunction> bpas;
    for (std::size_t i : block) bpas.push_back(evidence[i].bpa);
    product *= 1.0 - naive_conflict(bpas);
  }
  return 1.0 - product;
}

// Global minimum and per-subset-count minima by full enumeration.
struct NaiveMinimum {
  double mcf = 2.0;
  std::vector<std::vector<std::size_t>> blocks;
};

inline NaiveMinimum naive_global_minimum(std::span<const Evidence> evidence,
                                         const DomainPrior& prior) {
  NaiveMinimum best;
  for (const auto& blocks : enumerate_partitions(evidence.size())) {
    double mcf = naive_metaconflict(blocks, evidence, prior);
    if (mcf < best.mcf) best = {mcf, blocks};
  }
  return best;
}

inline std::map<int, double> naive_minimum_by_count(std::span<const Evidence> evidence,
                                                    const DomainPrior& prior) {
  std::map<int, double> best;
  for (const auto& blocks : enumerate_partitions(evidence.size())) {
    double mcf = naive_metaconflict(blocks, evidence, prior);
    int r = static_cast<int>(blocks.size());
    auto it = best.find(r);
    if (it == best.end() || mcf < it->second) best[r] = mcf;
  }
  return best;
}

// --------------------------------------------------------------------------
// Membership-combination oracle: Dempster combination of the individual
// meta-bpas over the membership frame, by direct 2^R enumeration.

struct MembershipOracle {
  std::map<int, double> bel;
  std::map<int, double> pls;
  double conflict = 0.0;
};

inline MembershipOracle membership_oracle(const MetaEvidenceSet& mes) {
  std::vector<int> keys;
  for (const auto& [subset, mass] : mes.not_in) keys.push_back(subset);
  const std::size_t n = keys.size();
  MembershipOracle oracle;

  if (mes.kind == VariationCase::singleton_increase) {
    const double in_home = mes.in_home.value();
    // Frame = {home} plus the other subsets; "not in k" is the complement of
    // {k}. Raw masses land either on {home} (when the membership piece is
    // picked) or on {home} + untouched others.
    std::map<std::set<int>, double> raw;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
      double w = 1.0;
      std::set<int> focal{mes.home};
      for (std::size_t i = 0; i < n; ++i) {
        if (bits & (std::uint64_t{1} << i))
          w *= mes.not_in.at(keys[i]);
        else {
          w *= 1.0 - mes.not_in.at(keys[i]);
          focal.insert(keys[i]);
        }
      }
      raw[focal] += (1.0 - in_home) * w;
    }
    raw[{mes.home}] += in_home;
    for (const auto& [focal, mass] : raw) {
      for (int subset : focal) oracle.pls[subset] += mass;
      if (focal.size() == 1) oracle.bel[*focal.begin()] += mass;
    }
    oracle.pls[mes.home] = 1.0;  // exact: every focal contains home
    return oracle;
  }

  std::map<std::set<int>, double> raw;
  double conflict = 0.0;
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << n); ++bits) {
    double w = 1.0;
    std::set<int> focal;
    for (std::size_t i = 0; i < n; ++i) {
      if (bits & (std::uint64_t{1} << i))
        w *= mes.not_in.at(keys[i]);
      else {
        w *= 1.0 - mes.not_in.at(keys[i]);
        focal.insert(keys[i]);
      }
    }
    if (focal.empty())
      conflict += w;
    else
      raw[focal] += w;
  }
  oracle.conflict = conflict;
  for (const auto& [focal, mass] : raw) {
    double normalized = mass / (1.0 - conflict);
    for (int subset : focal) oracle.pls[subset] += normalized;
    if (focal.size() == 1) oracle.bel[*focal.begin()] += normalized;
  }
  for (int key : keys) {
    if (!oracle.pls.contains(key)) oracle.pls[key] = 0.0;
    if (!oracle.bel.contains(key)) oracle.bel[key] = 0.0;
  }
  return oracle;
}

// --------------------------------------------------------------------------
// Event-assignment oracle: complete-tuple enumeration with assignment sets

struct NaiveAssignment {
  std::vector<std::vector<int>> universe;
  std::map<std::set<std::size_t>, double> focal;  // indices into universe
  double conflict = 0.0;
};

inline void naive_assignments_rec(std::size_t subsets, std::size_t events,
                                  std::vector<int>& partial, std::set<int>& used,
                                  std::vector<std::vector<int>>& out) {
  if (partial.size() == subsets) {
    out.push_back(partial);
    return;
  }
  for (std::size_t e = 0; e < events; ++e) {
    if (used.contains(static_cast<int>(e))) continue;
    partial.push_back(static_cast<int>(e));
    used.insert(static_cast<int>(e));
    naive_assignments_rec(subsets, events, partial, used, out);
    used.erase(static_cast<int>(e));
    partial.pop_back();
  }
}

inline NaiveAssignment naive_assign(std::span<const EventProjection> projections) {
  const std::size_t subsets = projections.size();
  const std::size_t events = projections[0].frame()->events().size();
  NaiveAssignment result;
  {
    std::vector<int> partial;
    std::set<int> used;
    naive_assignments_rec(subsets, events, partial, used, result.universe);
  }
  std::vector<std::vector<std::pair<std::uint64_t, double>>> picks(subsets);
  for (std::size_t i = 0; i < subsets; ++i) {
    for (const auto& [mask, mass] : projections[i].masses()) picks[i].push_back({mask, mass});
    if (projections[i].theta() > 0.0)
      picks[i].push_back({projections[i].frame()->full_event_mask(), projections[i].theta()});
  }
  std::vector<std::size_t> odometer(subsets, 0);
  std::map<std::set<std::size_t>, double> raw;
  for (;;) {
    double w = 1.0;
    std::set<std::size_t> consistent;
    for (std::size_t a = 0; a < result.universe.size(); ++a) consistent.insert(a);
    for (std::size_t i = 0; i < subsets; ++i) {
      const auto& [mask, mass] = picks[i][odometer[i]];
      w *= mass;
      std::set<std::size_t> keep;
      for (std::size_t a : consistent)
        if (mask & (std::uint64_t{1} << result.universe[a][i])) keep.insert(a);
      consistent = std::move(keep);
    }
    if (consistent.empty())
      result.conflict += w;
    else
      raw[consistent] += w;
    std::size_t i = 0;
    for (; i < odometer.size(); ++i) {
      if (++odometer[i] < picks[i].size()) break;
      odometer[i] = 0;
    }
    if (i == odometer.size()) break;
  }
  for (const auto& [key, mass] : raw) result.focal[key] = mass / (1.0 - result.conflict);
  return result;
}

// --------------------------------------------------------------------------
// Random generators (deterministic; rng() % k keeps streams portable)

inline std::uint64_t random_mask(std::mt19937_64& rng, std::size_t bits) {
  std::uint64_t full = (std::uint64_t{1} << bits) - 1;
  std::uint64_t mask = rng() % (full + 1);
  if (mask == 0) mask = std::uint64_t{1} << (rng() % bits);
  return mask;
}

inline MassFunction random_bpa(std::mt19937_64& rng, const FramePtr& frame,
                               std::size_t max_focal = 3, double max_total = 0.95) {
  const std::size_t atoms = frame->action_atoms().size();
  const std::size_t events = frame->events().size();
  const std::size_t count = 1 + rng() % max_focal;
  std::vector<std::pair<Proposition, double>> focal;
  double total = 0.0;
  for (std::size_t i = 0; i < count && total < max_total; ++i) {
    std::uint64_t a = random_mask(rng, atoms);
    std::uint64_t e = random_mask(rng, events);
    if (a == frame->full_action_mask() && e == frame->full_event_mask()) continue;
    bool duplicate = false;
    for (const auto& [p, m] : focal)
      if (p.action_mask() == a && p.event_mask() == e) duplicate = true;
    if (duplicate) continue;
    double mass = 0.05 + 0.01 * static_cast<double>(rng() % 60);
    if (total + mass > max_total) mass = max_total - total;
    if (mass < 0.01) break;
    focal.emplace_back(Proposition(frame, a, e), mass);
    total += mass;
  }
  if (focal.empty())
    focal.emplace_back(Proposition(frame, 1, frame->full_event_mask()), 0.5);
  return MassFunction(frame, focal);
}

inline std::vector<Evidence> random_evidence(std::mt19937_64& rng, const FramePtr& frame,
                                             std::size_t n, std::size_t max_focal = 2) {
  std::vector<Evidence> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({"e" + std::to_string(i + 1), random_bpa(rng, frame, max_focal)});
  return out;
}

inline DomainPrior random_prior(std::mt19937_64& rng, int max_count) {
  std::map<int, double> masses;
  std::vector<double> weights;
  double total = 0.0;
  for (int r = 1; r <= max_count; ++r) {
    double w = static_cast<double>(1 + rng() % 10);
    weights.push_back(w);
    total += w;
  }
  for (int r = 1; r <= max_count; ++r) masses[r] = weights[static_cast<std::size_t>(r - 1)] / total;
  // Rebalance the last entry so the masses sum to one exactly.
  double sum = 0.0;
  for (int r = 1; r < max_count; ++r) sum += masses[r];
  masses[max_count] = 1.0 - sum;
  return DomainPrior(masses);
}

}  // namespace testsupport
