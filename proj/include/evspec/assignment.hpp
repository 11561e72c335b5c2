#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evspec/core.hpp"
#include "evspec/errors.hpp"

namespace evspec {

// Event-part projection of a subset's combined bpa: action information is
// removed, masses with equal event parts are merged, theta stays implicit.
class EventProjection {
 public:
  EventProjection(FramePtr frame, int subset, std::map<std::uint64_t, double> masses)
      : frame_(std::move(frame)), subset_(subset), masses_(std::move(masses)) {
    if (!frame_) raise(ErrorKind::schema, "event projection requires a frame");
    double sum = 0.0;
    for (const auto& [mask, mass] : masses_) {
      if (mask == 0) raise(ErrorKind::schema, "event projection key must be nonempty");
      if (mask == frame_->full_event_mask())
        raise(ErrorKind::schema, "theta is implicit in an event projection");
      if ((mask & ~frame_->full_event_mask()) != 0)
        raise(ErrorKind::schema, "event projection key lies outside the frame");
      if (mass < 0.0) raise(ErrorKind::schema, "event projection masses must be nonnegative");
      sum += mass;
    }
    if (sum > 1.0 + kSumTolerance)
      raise(ErrorKind::schema, "event projection masses sum to more than one");
  }

  const FramePtr& frame() const noexcept { return frame_; }
  int subset() const noexcept { return subset_; }
  const std::map<std::uint64_t, double>& masses() const noexcept { return masses_; }

  double theta() const noexcept {
    double sum = 0.0;
    for (const auto& [mask, mass] : masses_) sum += mass;
    double t = 1.0 - sum;
    return t < kMassEpsilon ? 0.0 : t;
  }

  std::size_t focal_count() const noexcept {
    return masses_.size() + (theta() > 0.0 ? 1 : 0);
  }

 private:
  FramePtr frame_;
  int subset_;
  std::map<std::uint64_t, double> masses_;
};

inline EventProjection project_events(const MassFunction& combined, int subset) {
  std::map<std::uint64_t, double> acc;
  for (const auto& [key, mass] : combined.focal()) {
    if (key.second == combined.frame()->full_event_mask()) continue;  // joins theta
    acc[key.second] += mass;
  }
  return EventProjection(combined.frame(), subset, std::move(acc));
}

// One complete injective subset-to-event assignment; event_of[i] is the event
// index assigned to the i-th projection.
struct SubsetEventAssignment {
  std::vector<int> event_of;

  friend auto operator<=>(const SubsetEventAssignment&, const SubsetEventAssignment&) = default;
};

// Metalevel bpa over complete assignments. Focal elements are disjunctions of
// assignments, stored as sorted index lists into the universe.
struct AssignmentBpa {
  std::vector<SubsetEventAssignment> universe;
  std::map<std::vector<std::uint32_t>, double> focal;
};

struct AssignmentInterval {
  std::uint32_t assignment = 0;  // index into the universe
  double bel = 0.0;
  double pls = 0.0;
};

struct AssignEventsResult {
  AssignmentBpa bpa;
  double conflict = 0.0;
  std::vector<AssignmentInterval> intervals;
};

struct AssignOptions {
  std::size_t focal_product_cap = 10'000'000;
  std::size_t max_assignments = 1'000'000;
};

namespace detail {

inline void enumerate_assignments(std::size_t subsets, std::size_t events,
                                  std::vector<int>& partial, std::uint64_t used,
                                  std::vector<SubsetEventAssignment>& out) {
  if (partial.size() == subsets) {
    out.push_back({partial});
    return;
  }
  for (std::size_t e = 0; e < events; ++e) {
    if (used & (std::uint64_t{1} << e)) continue;
    partial.push_back(static_cast<int>(e));
    enumerate_assignments(subsets, events, partial, used | (std::uint64_t{1} << e), out);
    partial.pop_back();
  }
}

using AssignmentSet = std::vector<std::uint64_t>;  // bitset over the universe

inline AssignmentSet intersect_sets(const AssignmentSet& a, const AssignmentSet& b) {
  AssignmentSet out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] & b[i];
  return out;
}

inline bool set_empty(const AssignmentSet& s) {
  for (std::uint64_t block : s)
    if (block != 0) return false;
  return true;
}

}  // namespace detail

// Dempster combination of the per-subset event projections under the
// exclusivity constraint that no event is shared by two subsets. Every focal
// element is read as the disjunction of the injective complete assignments
// consistent with it, so when subsets and events are equinumerous a partial
// pick is completed by the assignments injectivity forces.
inline AssignEventsResult assign_events(std::span<const EventProjection> projections,
                                        const AssignOptions& options = {}) {
  if (projections.empty())
    raise(ErrorKind::schema, "event assignment requires at least one projection");
  for (std::size_t i = 1; i < projections.size(); ++i)
    require_same_frame(projections[0].frame(), projections[i].frame());
  const FramePtr& frame = projections[0].frame();
  const std::size_t subsets = projections.size();
  const std::size_t events = frame->events().size();
  if (subsets > events)
    raise(ErrorKind::infeasible_assignment,
          "more subsets than events: no injective assignment exists");

  double focal_product = 1.0;
  for (const auto& p : projections)
    focal_product *= static_cast<double>(std::max<std::size_t>(p.focal_count(), 1));
  if (focal_product > static_cast<double>(options.focal_product_cap))
    raise(ErrorKind::resource_cap, "focal cross product exceeds the enumeration cap");

  double assignment_count = 1.0;
  for (std::size_t i = 0; i < subsets; ++i) assignment_count *= static_cast<double>(events - i);
  if (assignment_count > static_cast<double>(options.max_assignments))
    raise(ErrorKind::resource_cap, "too many candidate assignments to enumerate");

  std::vector<SubsetEventAssignment> universe;
  std::vector<int> partial;
  detail::enumerate_assignments(subsets, events, partial, 0, universe);
  const std::size_t blocks = (universe.size() + 63) / 64;

  // Per projection: focal picks as (assignment set, mass).
  std::vector<std::vector<std::pair<detail::AssignmentSet, double>>> picks(subsets);
  for (std::size_t i = 0; i < subsets; ++i) {
    auto set_for = [&](std::uint64_t event_mask) {
      detail::AssignmentSet set(blocks, 0);
      for (std::size_t a = 0; a < universe.size(); ++a)
        if (event_mask & (std::uint64_t{1} << universe[a].event_of[i]))
          set[a / 64] |= std::uint64_t{1} << (a % 64);
      return set;
    };
    for (const auto& [mask, mass] : projections[i].masses())
      picks[i].emplace_back(set_for(mask), mass);
    const double theta = projections[i].theta();
    if (theta > 0.0) picks[i].emplace_back(set_for(frame->full_event_mask()), theta);
  }

  std::map<detail::AssignmentSet, double> accumulated;
  double conflict_mass = 0.0;
  auto walk = [&](auto&& self, std::size_t index, const detail::AssignmentSet& current,
                  double weight) -> void {
    if (index == subsets) {
      accumulated[current] += weight;
      return;
    }
    for (const auto& [set, mass] : picks[index]) {
      detail::AssignmentSet next = detail::intersect_sets(current, set);
      const double w = weight * mass;
      if (detail::set_empty(next))
        conflict_mass += w;
      else
        self(self, index + 1, next, w);
    }
  };
  detail::AssignmentSet all(blocks, 0);
  for (std::size_t a = 0; a < universe.size(); ++a)
    all[a / 64] |= std::uint64_t{1} << (a % 64);
  walk(walk, 0, all, 1.0);

  if (conflict_mass >= 1.0 - kSumTolerance)
    raise(ErrorKind::total_conflict, "event assignment is totally conflicting");

  AssignEventsResult result;
  result.conflict = conflict_mass;
  result.bpa.universe = universe;
  std::vector<double> bel(universe.size(), 0.0), pls(universe.size(), 0.0);
  for (const auto& [set, mass] : accumulated) {
    const double normalized = mass / (1.0 - conflict_mass);
    if (normalized < kMassEpsilon) continue;
    std::vector<std::uint32_t> ids;
    for (std::size_t a = 0; a < universe.size(); ++a)
      if (set[a / 64] & (std::uint64_t{1} << (a % 64))) ids.push_back(static_cast<std::uint32_t>(a));
    for (std::uint32_t id : ids) pls[id] += normalized;
    if (ids.size() == 1) bel[ids[0]] += normalized;
    result.bpa.focal.emplace(std::move(ids), normalized);
  }
  for (std::size_t a = 0; a < universe.size(); ++a)
    result.intervals.push_back({static_cast<std::uint32_t>(a), bel[a], pls[a]});
  return result;
}

}  // namespace evspec
