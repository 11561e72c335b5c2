#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evspec/core.hpp"
#include "evspec/errors.hpp"
#include "evspec/metaconflict.hpp"

namespace evspec {

// Classification tolerance for the singleton domain-conflict cases.
inline constexpr double kCaseEpsilon = 1e-9;

enum class VariationCase {
  multi_member,       // q shares its subset with other evidence
  singleton_decrease, // q alone in its subset, removing it lowers c0
  singleton_increase, // q alone in its subset, removing it raises c0
  singleton_neutral,  // q alone in its subset, c0 unchanged
};

inline const char* to_string(VariationCase c) {
  switch (c) {
    case VariationCase::multi_member: return "multi_member";
    case VariationCase::singleton_decrease: return "singleton_decrease";
    case VariationCase::singleton_increase: return "singleton_increase";
    case VariationCase::singleton_neutral: return "singleton_neutral";
  }
  return "?";
}

struct SubsetConflictChange {
  int subset = 0;
  double base = 0.0;    // c_k of the subset as it stands
  double with_q = 0.0;  // c_k* once q is inserted

  friend bool operator==(const SubsetConflictChange&, const SubsetConflictChange&) = default;
};

// How every conflict reacts to relocating one piece of evidence: removal from
// its home subset, insertion into each other subset, and the domain conflict
// of the one-more (or, for singletons, one-fewer) subset count.
struct ConflictVariation {
  std::string id;
  int home = 0;
  int subset_count = 0;
  double c_home = 0.0;
  double c_home_removed = 0.0;  // c_i* after q leaves; 0 when <= 1 member remains
  std::vector<SubsetConflictChange> others;
  double c0 = 0.0;
  double c0_star = 0.0;
  VariationCase kind = VariationCase::multi_member;
};

inline ConflictVariation conflict_variations(const Partition& partition,
                                             const DomainPrior& prior,
                                             std::span<const Evidence> evidences,
                                             const std::string& q,
                                             const CombineOptions& options = {}) {
  detail::EvidenceIndex index(evidences);
  ConflictVariation v;
  v.id = q;
  v.home = partition.subset_of(q);
  v.subset_count = partition.subset_count();
  const std::uint64_t q_bit = std::uint64_t{1} << index.position(q);

  const std::uint64_t home_mask = index.mask_of(partition.members(v.home));
  v.c_home = index.conflict_of(home_mask, options);
  v.c_home_removed = index.conflict_of(home_mask & ~q_bit, options);

  for (int s = 1; s <= partition.subset_count(); ++s) {
    if (s == v.home) continue;
    const std::uint64_t mask = index.mask_of(partition.members(s));
    v.others.push_back(
        {s, index.conflict_of(mask, options), index.conflict_of(mask | q_bit, options)});
  }

  v.c0 = domain_conflict(prior, partition.subset_count());
  const bool singleton = partition.members(v.home).size() == 1;
  if (singleton) {
    // The home subset disappears with q; prior mass at zero subsets is zero.
    v.c0_star = 1.0 - prior.mass(partition.subset_count() - 1);
    if (v.c0 > v.c0_star + kCaseEpsilon)
      v.kind = VariationCase::singleton_decrease;
    else if (v.c0 < v.c0_star - kCaseEpsilon)
      v.kind = VariationCase::singleton_increase;
    else
      v.kind = VariationCase::singleton_neutral;
  } else {
    v.c0_star = 1.0 - prior.mass(partition.subset_count() + 1);
    v.kind = VariationCase::multi_member;
  }
  return v;
}

// Metalevel evidence about one piece of evidence: masses for "q does not
// belong to subset j" (and, in the singleton-increase case, for "q belongs to
// its home subset"). The hypothetical fresh subset carries index r + 1.
struct MetaEvidenceSet {
  std::string id;
  int home = 0;
  int subset_count = 0;
  VariationCase kind = VariationCase::multi_member;
  std::map<int, double> not_in;
  std::optional<double> in_home;
  // Subsets whose conflict change came out negative (possible only on
  // partitions that do not minimize the metaconflict) and was clamped to 0.
  std::vector<int> clamped;

  int hypothetical_index() const noexcept { return subset_count + 1; }
  bool has_hypothetical() const noexcept { return not_in.contains(subset_count + 1); }
};

inline MetaEvidenceSet meta_evidence(const ConflictVariation& v) {
  MetaEvidenceSet mes;
  mes.id = v.id;
  mes.home = v.home;
  mes.subset_count = v.subset_count;
  mes.kind = v.kind;

  auto ratio = [&mes](double numerator, double denominator, int subset) {
    if (denominator < kMassEpsilon)
      raise(ErrorKind::degenerate_conflict,
            "meta-evidence denominator vanished for subset " + std::to_string(subset));
    if (numerator < 0.0) {
      // Within the classification epsilon this is summation noise between two
      // equal conflicts; beyond it the partition cannot be metaconflict-minimal.
      if (numerator < -kCaseEpsilon) mes.clamped.push_back(subset);
      return 0.0;
    }
    return numerator / denominator;
  };

  for (const auto& other : v.others)
    mes.not_in[other.subset] = ratio(other.with_q - other.base, 1.0 - other.base, other.subset);

  switch (v.kind) {
    case VariationCase::multi_member:
      mes.not_in[v.home] = ratio(v.c_home - v.c_home_removed, 1.0 - v.c_home_removed, v.home);
      mes.not_in[v.subset_count + 1] =
          ratio(v.c0_star - v.c0, 1.0 - v.c0, v.subset_count + 1);
      break;
    case VariationCase::singleton_decrease:
      mes.not_in[v.home] = ratio(v.c0 - v.c0_star, 1.0 - v.c0_star, v.home);
      break;
    case VariationCase::singleton_increase:
      if (v.c0_star < kMassEpsilon)
        raise(ErrorKind::degenerate_conflict, "domain conflict ratio undefined");
      mes.in_home = v.c0 / v.c0_star;
      break;
    case VariationCase::singleton_neutral:
      mes.not_in[v.home] = 0.0;
      break;
  }
  return mes;
}

struct MembershipInterval {
  double bel = 0.0;
  double pls = 0.0;

  friend bool operator==(const MembershipInterval&, const MembershipInterval&) = default;
};

// Evidential interval of membership per subset, plus the degree of falsity:
// the Dempster conflict of the combined meta-evidence, i.e. the support for
// the impossible statement that the evidence belongs nowhere.
struct MembershipSpecification {
  std::string id;
  int home = 0;
  int subset_count = 0;
  std::map<int, MembershipInterval> per_subset;
  double falsity = 0.0;

  bool has_hypothetical() const noexcept { return per_subset.contains(subset_count + 1); }
  int hypothetical_index() const noexcept { return subset_count + 1; }
};

inline MembershipSpecification specify(const MetaEvidenceSet& mes) {
  MembershipSpecification spec;
  spec.id = mes.id;
  spec.home = mes.home;
  spec.subset_count = mes.subset_count;

  if (mes.kind == VariationCase::singleton_increase) {
    const double in_home = mes.in_home.value();
    spec.falsity = 0.0;
    double product = 1.0;
    for (const auto& [subset, mass] : mes.not_in) product *= mass;
    spec.per_subset[mes.home] = {in_home + (1.0 - in_home) * product, 1.0};
    for (const auto& [subset, mass] : mes.not_in)
      spec.per_subset[subset] = {0.0, (1.0 - in_home) * (1.0 - mass)};
    return spec;
  }

  double falsity = 1.0;
  for (const auto& [subset, mass] : mes.not_in) falsity *= mass;
  if (1.0 - falsity < kMassEpsilon)
    raise(ErrorKind::everywhere_excluded,
          "meta-evidence excludes '" + mes.id + "' from every subset");
  spec.falsity = falsity;
  for (const auto& [subset, mass] : mes.not_in)
    spec.per_subset[subset] = {0.0, (1.0 - mass) / (1.0 - falsity)};
  return spec;
}

// Batch driver: conflict variations, meta-evidence and specification for
// every piece of evidence, ordered by id. Clamp warnings, when any, are
// appended to *warnings.
inline std::vector<MembershipSpecification> specify_all(
    const Partition& partition, const DomainPrior& prior,
    std::span<const Evidence> evidences, std::vector<std::string>* warnings = nullptr,
    const CombineOptions& options = {}) {
  std::vector<std::string> ids;
  for (const auto& e : evidences) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  std::vector<MembershipSpecification> specs;
  specs.reserve(ids.size());
  for (const auto& id : ids) {
    MetaEvidenceSet mes = meta_evidence(conflict_variations(partition, prior, evidences, id, options));
    if (warnings != nullptr)
      for (int subset : mes.clamped)
        warnings->push_back("negative conflict change clamped to zero for evidence '" + id +
                            "', subset " + std::to_string(subset));
    specs.push_back(specify(mes));
  }
  return specs;
}

}  // namespace evspec
