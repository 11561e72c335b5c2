#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evspec/core.hpp"
#include "evspec/errors.hpp"
#include "evspec/specify.hpp"

namespace evspec {

struct FalsityDiscounted {
  Evidence evidence;
  double alpha = 1.0;  // 1 - degree of falsity
};

// Discounts one piece of evidence by one minus its degree of falsity.
inline FalsityDiscounted falsity_discount(const Evidence& evidence,
                                          const MembershipSpecification& spec) {
  if (spec.id != evidence.id)
    raise(ErrorKind::lookup,
          "specification for '" + spec.id + "' applied to evidence '" + evidence.id + "'");
  const double alpha = 1.0 - spec.falsity;
  return {Evidence{evidence.id, discount(evidence.bpa, alpha)}, alpha};
}

struct CredibilityVector {
  std::string id;
  std::map<int, double> alpha;
};

// Credibility of the evidence for each subset: the subset's plausibility
// weighted by its share of the total plausibility and by the uncommitted
// belief; the home subset keeps its committed belief outright. The total runs
// over every subset the specification covers, the hypothetical one included.
inline CredibilityVector subset_credibilities(const MembershipSpecification& spec) {
  double total = 0.0;
  for (const auto& [subset, interval] : spec.per_subset) total += interval.pls;
  if (total < kMassEpsilon)
    raise(ErrorKind::no_membership,
          "evidence '" + spec.id + "' has zero plausibility for every subset");
  const double bel_home = spec.per_subset.contains(spec.home)
                              ? spec.per_subset.at(spec.home).bel
                              : 0.0;
  CredibilityVector cv;
  cv.id = spec.id;
  for (const auto& [subset, interval] : spec.per_subset) {
    double alpha = (1.0 - bel_home) * interval.pls * interval.pls / total;
    if (subset == spec.home) alpha += bel_home;
    cv.alpha[subset] = alpha;
  }
  return cv;
}

inline Evidence subset_discount(const Evidence& evidence, const CredibilityVector& cv,
                                int subset) {
  if (cv.id != evidence.id)
    raise(ErrorKind::lookup,
          "credibilities for '" + cv.id + "' applied to evidence '" + evidence.id + "'");
  auto it = cv.alpha.find(subset);
  if (it == cv.alpha.end())
    raise(ErrorKind::lookup,
          "no credibility for subset " + std::to_string(subset) + " of '" + evidence.id + "'");
  return {evidence.id, discount(evidence.bpa, it->second)};
}

// Applies falsity discounting across the whole store and latches its
// no-repartition flag. Specifications are matched by id and must cover the
// store exactly.
inline std::vector<FalsityDiscounted> falsity_discount_all(
    EvidenceStore& store, std::span<const MembershipSpecification> specs) {
  if (specs.size() != store.items().size())
    raise(ErrorKind::coverage, "specifications do not cover the evidence store");
  std::map<std::string, const MembershipSpecification*> by_id;
  for (const auto& spec : specs) by_id[spec.id] = &spec;
  std::vector<FalsityDiscounted> results;
  std::vector<Evidence> replaced;
  results.reserve(store.items().size());
  for (const auto& evidence : store.items()) {
    auto it = by_id.find(evidence.id);
    if (it == by_id.end())
      raise(ErrorKind::coverage, "no specification for evidence '" + evidence.id + "'");
    results.push_back(falsity_discount(evidence, *it->second));
    replaced.push_back(results.back().evidence);
  }
  store.replace_discounted(std::move(replaced));
  return results;
}

}  // namespace evspec
