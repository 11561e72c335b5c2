#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "evspec/core.hpp"
#include "evspec/errors.hpp"

namespace evspec {

// Prior probability distribution over the number of subsets.
class DomainPrior {
 public:
  explicit DomainPrior(std::map<int, double> masses) : masses_(std::move(masses)) {
    double sum = 0.0;
    for (const auto& [count, mass] : masses_) {
      if (count < 1)
        raise(ErrorKind::schema, "domain prior subset counts must be positive");
      if (mass < 0.0)
        raise(ErrorKind::schema, "domain prior masses must be nonnegative");
      sum += mass;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      raise(ErrorKind::schema, "domain prior masses must sum to one");
  }

  double mass(int subset_count) const noexcept {
    auto it = masses_.find(subset_count);
    return it == masses_.end() ? 0.0 : it->second;
  }

  const std::map<int, double>& masses() const noexcept { return masses_; }

  friend bool operator==(const DomainPrior& a, const DomainPrior& b) {
    return a.masses_ == b.masses_;
  }

 private:
  std::map<int, double> masses_;
};

// Conflict between hypothesizing subset_count subsets and the prior.
inline double domain_conflict(const DomainPrior& prior, int subset_count) {
  if (subset_count < 1) raise(ErrorKind::range, "subset count must be positive");
  return 1.0 - prior.mass(subset_count);
}

// A partition of evidence ids into r nonempty subsets, kept in canonical
// form: members sorted by id, subsets numbered 1..r by their smallest member.
class Partition {
 public:
  static Partition from_subsets(std::vector<std::vector<std::string>> subsets) {
    Partition p;
    for (auto& subset : subsets) {
      if (subset.empty()) raise(ErrorKind::schema, "partition subsets must be nonempty");
      std::sort(subset.begin(), subset.end());
    }
    std::sort(subsets.begin(), subsets.end());
    p.subsets_ = std::move(subsets);
    for (std::size_t i = 0; i < p.subsets_.size(); ++i)
      for (const auto& id : p.subsets_[i]) {
        auto [it, inserted] = p.index_.emplace(id, static_cast<int>(i) + 1);
        if (!inserted)
          raise(ErrorKind::duplicate_id, "evidence '" + id + "' assigned more than once");
      }
    return p;
  }

  static Partition from_assignment(const std::map<std::string, int>& assignment) {
    std::map<int, std::vector<std::string>> grouped;
    for (const auto& [id, subset] : assignment) grouped[subset].push_back(id);
    std::vector<std::vector<std::string>> subsets;
    subsets.reserve(grouped.size());
    for (auto& [subset, members] : grouped) subsets.push_back(std::move(members));
    return from_subsets(std::move(subsets));
  }

  int subset_count() const noexcept { return static_cast<int>(subsets_.size()); }

  const std::vector<std::vector<std::string>>& subsets() const noexcept { return subsets_; }

  const std::vector<std::string>& members(int subset) const {
    if (subset < 1 || subset > subset_count())
      raise(ErrorKind::lookup, "subset index out of range");
    return subsets_[static_cast<std::size_t>(subset) - 1];
  }

  int subset_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      raise(ErrorKind::lookup, "evidence '" + id + "' is not assigned in the partition");
    return it->second;
  }

  const std::map<std::string, int>& assignment() const noexcept { return index_; }

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.subsets_ == b.subsets_;
  }

 private:
  std::vector<std::vector<std::string>> subsets_;
  std::map<std::string, int> index_;
};

struct ConflictProfile {
  double c0 = 0.0;
  std::vector<double> subset_conflicts;
  double mcf = 0.0;

  friend bool operator==(const ConflictProfile&, const ConflictProfile&) = default;
};

inline double metaconflict_value(double c0, std::span<const double> subset_conflicts) {
  double product = 1.0 - c0;
  for (double c : subset_conflicts) product *= 1.0 - c;
  return 1.0 - product;
}

// Conflict in Dempster's rule across the members' bpas; zero for singletons.
inline double subset_conflict(std::span<const Evidence> members,
                              const CombineOptions& options = {}) {
  if (members.empty()) raise(ErrorKind::schema, "subset conflict of an empty subset");
  std::vector<MassFunction> bpas;
  bpas.reserve(members.size());
  for (const auto& e : members) bpas.push_back(e.bpa);
  return conflict(bpas, options);
}

namespace detail {

class EvidenceIndex {
 public:
  explicit EvidenceIndex(std::span<const Evidence> evidences) : evidences_(evidences) {
    if (evidences.empty()) raise(ErrorKind::schema, "at least one piece of evidence required");
    if (evidences.size() > 64)
      raise(ErrorKind::resource_cap, "more than 64 pieces of evidence");
    for (std::size_t i = 0; i < evidences.size(); ++i) {
      if (!by_id_.emplace(evidences[i].id, i).second)
        raise(ErrorKind::duplicate_id, "duplicate evidence id '" + evidences[i].id + "'");
    }
  }

  std::size_t size() const noexcept { return evidences_.size(); }
  const Evidence& at(std::size_t i) const { return evidences_[i]; }

  std::size_t position(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) raise(ErrorKind::lookup, "no evidence with id '" + id + "'");
    return it->second;
  }

  // Memoized conflict of the member set given as a position bitmask.
  double conflict_of(std::uint64_t mask, const CombineOptions& options) const {
    if (std::popcount(mask) <= 1) return 0.0;
    auto it = cache_.find(mask);
    if (it != cache_.end()) return it->second;
    std::vector<MassFunction> bpas;
    for (std::size_t i = 0; i < evidences_.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) bpas.push_back(evidences_[i].bpa);
    double k = conflict(bpas, options);
    cache_.emplace(mask, k);
    return k;
  }

  std::uint64_t mask_of(std::span<const std::string> ids) const {
    std::uint64_t mask = 0;
    for (const auto& id : ids) mask |= std::uint64_t{1} << position(id);
    return mask;
  }

 private:
  std::span<const Evidence> evidences_;
  std::map<std::string, std::size_t> by_id_;
  mutable std::unordered_map<std::uint64_t, double> cache_;
};

}  // namespace detail

// Full conflict profile of a partition: the domain conflict, one conflict per
// subset (in the partition's canonical subset order) and the metaconflict
// 1 - (1 - c0) * prod(1 - ci).
inline ConflictProfile metaconflict(const Partition& partition, const DomainPrior& prior,
                                    std::span<const Evidence> evidences,
                                    const CombineOptions& options = {}) {
  detail::EvidenceIndex index(evidences);
  if (partition.assignment().size() != evidences.size())
    raise(ErrorKind::coverage, "partition does not cover the evidence set");
  for (const auto& e : evidences) partition.subset_of(e.id);  // raises if missing
  ConflictProfile profile;
  profile.c0 = domain_conflict(prior, partition.subset_count());
  for (const auto& subset : partition.subsets())
    profile.subset_conflicts.push_back(index.conflict_of(index.mask_of(subset), options));
  profile.mcf = metaconflict_value(profile.c0, profile.subset_conflicts);
  return profile;
}

struct MinimizeConfig {
  int restarts = 32;
  std::uint64_t seed = 0;
  // At or below this size the search is exhaustive and the result is the
  // global minimum.
  int exact_threshold = 8;
  CombineOptions combine;
};

struct MinimizeResult {
  Partition partition;
  ConflictProfile profile;
  // Metaconflict after each accepted move, one trace per local-search restart
  // (empty when the exhaustive path was taken).
  std::vector<std::vector<double>> traces;
};

namespace detail {

struct PartitionCandidate {
  double mcf = 0.0;
  int subset_count = 0;
  std::vector<int> rgs;
};

// Restricted growth strings enumerate every set partition exactly once:
// rgs[0] = 0 and rgs[i] <= max(rgs[0..i-1]) + 1.
inline bool next_restricted_growth(std::vector<int>& rgs) {
  const std::size_t n = rgs.size();
  for (std::size_t i = n; i-- > 1;) {
    int prefix_max = 0;
    for (std::size_t j = 0; j < i; ++j) prefix_max = std::max(prefix_max, rgs[j]);
    if (rgs[i] <= prefix_max) {
      ++rgs[i];
      for (std::size_t j = i + 1; j < n; ++j) rgs[j] = 0;
      return true;
    }
  }
  return false;
}

inline Partition partition_from_rgs(const EvidenceIndex& index, std::span<const int> rgs) {
  int blocks = 0;
  for (int b : rgs) blocks = std::max(blocks, b + 1);
  std::vector<std::vector<std::string>> subsets(static_cast<std::size_t>(blocks));
  for (std::size_t i = 0; i < rgs.size(); ++i)
    subsets[static_cast<std::size_t>(rgs[i])].push_back(index.at(i).id);
  return Partition::from_subsets(std::move(subsets));
}

}  // namespace detail

// Exhaustive minimizer over all set partitions. Ties are broken toward fewer
// subsets, then toward the lexicographically smallest restricted growth
// string. Intended as the exact reference for the iterative search.
inline MinimizeResult brute_force_minimize(std::span<const Evidence> evidences,
                                           const DomainPrior& prior,
                                           const CombineOptions& options = {}) {
  detail::EvidenceIndex index(evidences);
  const std::size_t n = index.size();
  if (n > 12)
    raise(ErrorKind::resource_cap, "exhaustive enumeration limited to 12 pieces of evidence");

  std::vector<int> rgs(n, 0);
  bool have_best = false;
  detail::PartitionCandidate best;
  do {
    int blocks = 0;
    for (int b : rgs) blocks = std::max(blocks, b + 1);
    std::vector<std::uint64_t> masks(static_cast<std::size_t>(blocks), 0);
    for (std::size_t i = 0; i < n; ++i)
      masks[static_cast<std::size_t>(rgs[i])] |= std::uint64_t{1} << i;
    double product = 1.0 - domain_conflict(prior, blocks);
    for (std::uint64_t mask : masks) product *= 1.0 - index.conflict_of(mask, options);
    const double mcf = 1.0 - product;
    const bool better =
        !have_best || mcf < best.mcf || (mcf == best.mcf && blocks < best.subset_count);
    if (better) {
      best = {mcf, blocks, rgs};
      have_best = true;
    }
  } while (detail::next_restricted_growth(rgs));

  Partition partition = detail::partition_from_rgs(index, best.rgs);
  return {partition, metaconflict(partition, prior, evidences, options), {}};
}

namespace detail {

// State of one local-search run: assignment of evidence positions to subset
// labels 1..r, kept canonical (subsets ordered by their smallest member id).
class SearchState {
 public:
  SearchState(const EvidenceIndex& index, const DomainPrior& prior,
              const CombineOptions& options)
      : index_(index), prior_(prior), options_(options) {}

  void reset(const std::vector<int>& assignment, int subset_count) {
    assignment_ = assignment;
    rebuild(subset_count);
  }

  double mcf() const noexcept { return mcf_; }
  int subset_count() const noexcept { return static_cast<int>(masks_.size()); }
  const std::vector<int>& assignment() const noexcept { return assignment_; }

  // Metaconflict of the partition obtained by moving evidence q to subset
  // `target` (subset_count() + 1 denotes a fresh singleton subset).
  double evaluate_move(std::size_t q, int target) const {
    const int source = assignment_[q];
    const std::uint64_t bit = std::uint64_t{1} << q;
    double product = 1.0;
    int new_count = subset_count();
    const std::uint64_t source_mask = masks_[static_cast<std::size_t>(source) - 1] & ~bit;
    if (source_mask == 0) --new_count;
    if (target > subset_count()) ++new_count;
    for (int s = 1; s <= subset_count(); ++s) {
      std::uint64_t mask = masks_[static_cast<std::size_t>(s) - 1];
      if (s == source) mask &= ~bit;
      if (s == target) mask |= bit;
      if (mask == 0) continue;
      product *= 1.0 - index_.conflict_of(mask, options_);
    }
    if (target > subset_count()) product *= 1.0 - index_.conflict_of(bit, options_);
    product *= 1.0 - domain_conflict(prior_, new_count);
    return 1.0 - product;
  }

  void apply_move(std::size_t q, int target) {
    const int new_label = target > subset_count() ? subset_count() + 1 : target;
    assignment_[q] = new_label;
    rebuild(std::max(new_label, subset_count()));
  }

 private:
  // Renormalizes labels to the canonical gap-free numbering ordered by each
  // subset's smallest member id.
  void rebuild(int label_bound) {
    std::vector<std::uint64_t> masks(static_cast<std::size_t>(label_bound), 0);
    for (std::size_t i = 0; i < assignment_.size(); ++i)
      masks[static_cast<std::size_t>(assignment_[i]) - 1] |= std::uint64_t{1} << i;
    std::vector<std::pair<std::string, std::size_t>> order;
    for (std::size_t s = 0; s < masks.size(); ++s) {
      if (masks[s] == 0) continue;
      std::string smallest;
      for (std::size_t i = 0; i < assignment_.size(); ++i)
        if (masks[s] & (std::uint64_t{1} << i)) {
          const std::string& id = index_.at(i).id;
          if (smallest.empty() || id < smallest) smallest = id;
        }
      order.emplace_back(std::move(smallest), s);
    }
    std::sort(order.begin(), order.end());
    std::vector<int> relabel(masks.size(), 0);
    masks_.clear();
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
      relabel[order[rank].second] = static_cast<int>(rank) + 1;
      masks_.push_back(masks[order[rank].second]);
    }
    for (auto& label : assignment_) label = relabel[static_cast<std::size_t>(label) - 1];
    double product = 1.0 - domain_conflict(prior_, subset_count());
    for (std::uint64_t mask : masks_) product *= 1.0 - index_.conflict_of(mask, options_);
    mcf_ = 1.0 - product;
  }

  const EvidenceIndex& index_;
  const DomainPrior& prior_;
  const CombineOptions& options_;
  std::vector<int> assignment_;
  std::vector<std::uint64_t> masks_;
  double mcf_ = 0.0;
};

}  // namespace detail

// Finds a partition minimizing the metaconflict. Small instances are solved
// exhaustively. Larger ones run steepest-descent relocation from random
// restarts: initial subset counts are scanned in decreasing order of prior
// mass and the scan stops once the incumbent metaconflict undercuts
// 1 - m(E_j) for every count j still unexamined, which no partition with j
// subsets can beat.
inline MinimizeResult minimize(std::span<const Evidence> evidences, const DomainPrior& prior,
                               const MinimizeConfig& config = {}) {
  if (config.restarts < 1) raise(ErrorKind::range, "restarts must be at least 1");
  detail::EvidenceIndex index(evidences);
  const std::size_t n = index.size();
  if (static_cast<int>(n) <= config.exact_threshold)
    return brute_force_minimize(evidences, prior, config.combine);

  // Initial subset counts: positive prior mass only; when no feasible count
  // has mass, fall back to the smallest count (metaconflict is 1 everywhere).
  std::vector<int> candidates;
  for (const auto& [count, mass] : prior.masses())
    if (mass > 0.0 && count <= static_cast<int>(n)) candidates.push_back(count);
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (prior.mass(a) != prior.mass(b)) return prior.mass(a) > prior.mass(b);
    return a < b;
  });
  if (candidates.empty()) candidates.push_back(1);

  std::mt19937_64 rng(config.seed);
  detail::SearchState state(index, prior, config.combine);
  bool have_best = false;
  double best_mcf = 0.0;
  std::vector<int> best_assignment;
  int best_count = 0;
  std::vector<std::vector<double>> traces;

  for (int r : candidates) {
    if (have_best && best_mcf < 1.0 - prior.mass(r)) break;  // Theorem 2 cutoff
    for (int restart = 0; restart < config.restarts; ++restart) {
      // Random initial assignment with exactly r nonempty subsets: a random
      // draft of r distinct positions seeds the subsets, the rest spread
      // uniformly. rng() % k keeps the stream platform-independent.
      std::vector<int> initial(n, 0);
      std::vector<std::size_t> positions(n);
      for (std::size_t i = 0; i < n; ++i) positions[i] = i;
      for (std::size_t i = n - 1; i > 0; --i)
        std::swap(positions[i], positions[rng() % (i + 1)]);
      for (int s = 0; s < r; ++s) initial[positions[static_cast<std::size_t>(s)]] = s + 1;
      for (std::size_t i = static_cast<std::size_t>(r); i < n; ++i)
        initial[positions[i]] = static_cast<int>(rng() % static_cast<std::uint64_t>(r)) + 1;

      state.reset(initial, r);
      std::vector<double> trace{state.mcf()};
      for (;;) {
        double best_move_mcf = state.mcf();
        std::size_t best_q = 0;
        int best_target = 0;
        bool found = false;
        for (std::size_t q = 0; q < n; ++q) {
          const int source = state.assignment()[q];
          const std::uint64_t source_size = [&] {
            std::size_t count = 0;
            for (int label : state.assignment())
              if (label == source) ++count;
            return count;
          }();
          for (int target = 1; target <= state.subset_count() + 1; ++target) {
            if (target == source) continue;
            if (target > state.subset_count()) {
              // A fresh subset is only worth opening when the prior permits;
              // relocating a singleton there reproduces the same partition.
              if (source_size <= 1) continue;
              if (prior.mass(state.subset_count() + 1) <= 0.0) continue;
            }
            const double candidate = state.evaluate_move(q, target);
            if (candidate < best_move_mcf) {
              best_move_mcf = candidate;
              best_q = q;
              best_target = target;
              found = true;
            }
          }
        }
        if (!found) break;
        state.apply_move(best_q, best_target);
        trace.push_back(state.mcf());
      }
      traces.push_back(std::move(trace));
      if (!have_best || state.mcf() < best_mcf) {
        have_best = true;
        best_mcf = state.mcf();
        best_assignment = state.assignment();
        best_count = state.subset_count();
      }
    }
  }

  std::vector<std::vector<std::string>> subsets(static_cast<std::size_t>(best_count));
  for (std::size_t i = 0; i < n; ++i)
    subsets[static_cast<std::size_t>(best_assignment[i]) - 1].push_back(index.at(i).id);
  Partition partition = Partition::from_subsets(std::move(subsets));
  return {partition, metaconflict(partition, prior, evidences, config.combine),
          std::move(traces)};
}

// Store-aware entry point: repartitioning discounted evidence is refused.
inline MinimizeResult minimize(const EvidenceStore& store, const DomainPrior& prior,
                               const MinimizeConfig& config = {}) {
  if (store.discounted())
    raise(ErrorKind::repartition_forbidden,
          "evidence has been discounted and must not be repartitioned");
  return minimize(store.items(), prior, config);
}

}  // namespace evspec
