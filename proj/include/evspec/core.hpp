#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evspec/errors.hpp"

namespace evspec {

// Masses below this are dropped and folded into the theta remainder.
inline constexpr double kMassEpsilon = 1e-12;
// Tolerance for sum and identity checks.
inline constexpr double kSumTolerance = 1e-9;

class Frame;
using FramePtr = std::shared_ptr<const Frame>;

// Frame of discernment: an action frame crossed with a set of events. Label
// sets are immutable after creation; subsets of each dimension are bitmasks
// over the declaration order, so intersection and subsumption are O(1).
class Frame {
 public:
  static FramePtr create(std::vector<std::string> action_atoms,
                         std::vector<std::string> events) {
    validate_labels(action_atoms, "action frame");
    validate_labels(events, "event set");
    return FramePtr(new Frame(std::move(action_atoms), std::move(events)));
  }

  const std::vector<std::string>& action_atoms() const noexcept { return action_atoms_; }
  const std::vector<std::string>& events() const noexcept { return events_; }

  std::uint64_t full_action_mask() const noexcept { return mask_of(action_atoms_.size()); }
  std::uint64_t full_event_mask() const noexcept { return mask_of(events_.size()); }

  std::size_t atom_index(const std::string& label) const {
    return index_of(action_atoms_, label, "action atom");
  }
  std::size_t event_index(const std::string& label) const {
    return index_of(events_, label, "event");
  }

  // Number of atoms in the product frame.
  int product_size() const noexcept {
    return static_cast<int>(action_atoms_.size() * events_.size());
  }

  bool operator==(const Frame& other) const noexcept {
    return action_atoms_ == other.action_atoms_ && events_ == other.events_;
  }

 private:
  Frame(std::vector<std::string> atoms, std::vector<std::string> events)
      : action_atoms_(std::move(atoms)), events_(std::move(events)) {}

  static void validate_labels(const std::vector<std::string>& labels, const char* what) {
    if (labels.empty())
      raise(ErrorKind::schema, std::string(what) + " must not be empty");
    if (labels.size() > 64)
      raise(ErrorKind::resource_cap, std::string(what) + " exceeds 64 labels");
    for (std::size_t i = 0; i < labels.size(); ++i)
      for (std::size_t j = i + 1; j < labels.size(); ++j)
        if (labels[i] == labels[j])
          raise(ErrorKind::schema,
                std::string(what) + ": duplicate label '" + labels[i] + "'");
  }

  static std::uint64_t mask_of(std::size_t n) noexcept {
    return n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  }

  static std::size_t index_of(const std::vector<std::string>& labels,
                              const std::string& label, const char* what) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end())
      raise(ErrorKind::unknown_label, std::string("unknown ") + what + " '" + label + "'");
    return static_cast<std::size_t>(it - labels.begin());
  }

  std::vector<std::string> action_atoms_;
  std::vector<std::string> events_;
};

inline bool same_frame(const FramePtr& a, const FramePtr& b) {
  return a == b || (a && b && *a == *b);
}

inline void require_same_frame(const FramePtr& a, const FramePtr& b) {
  if (!same_frame(a, b))
    raise(ErrorKind::frame_mismatch, "operands belong to different frames");
}

// A two-part proposition: an action part conjoined with an event part, each a
// subset of its frame dimension. The proposition is contradictory (empty) as
// soon as either part is empty.
class Proposition {
 public:
  Proposition(FramePtr frame, std::uint64_t action_mask, std::uint64_t event_mask)
      : frame_(std::move(frame)), action_(action_mask), events_(event_mask) {
    if (!frame_) raise(ErrorKind::schema, "proposition requires a frame");
    if ((action_ & ~frame_->full_action_mask()) != 0 ||
        (events_ & ~frame_->full_event_mask()) != 0)
      raise(ErrorKind::schema, "proposition mask lies outside the frame");
  }

  static Proposition make(const FramePtr& frame, std::span<const std::string> atoms,
                          std::span<const std::string> events) {
    std::uint64_t a = 0, e = 0;
    for (const auto& s : atoms) a |= std::uint64_t{1} << frame->atom_index(s);
    for (const auto& s : events) e |= std::uint64_t{1} << frame->event_index(s);
    return Proposition(frame, a, e);
  }

  static Proposition make(const FramePtr& frame,
                          std::initializer_list<std::string> atoms,
                          std::initializer_list<std::string> events) {
    return make(frame, std::span<const std::string>(atoms.begin(), atoms.size()),
                std::span<const std::string>(events.begin(), events.size()));
  }

  static Proposition theta(const FramePtr& frame) {
    return Proposition(frame, frame->full_action_mask(), frame->full_event_mask());
  }

  const FramePtr& frame() const noexcept { return frame_; }
  std::uint64_t action_mask() const noexcept { return action_; }
  std::uint64_t event_mask() const noexcept { return events_; }

  bool empty() const noexcept { return action_ == 0 || events_ == 0; }

  bool is_theta() const noexcept {
    return action_ == frame_->full_action_mask() && events_ == frame_->full_event_mask();
  }

  // Atom count of the product frame covered by this proposition.
  int cardinality() const noexcept {
    return std::popcount(action_) * std::popcount(events_);
  }

  bool subset_of(const Proposition& other) const noexcept {
    return (action_ | other.action_) == other.action_ &&
           (events_ | other.events_) == other.events_;
  }

  bool intersects(const Proposition& other) const noexcept {
    return (action_ & other.action_) != 0 && (events_ & other.events_) != 0;
  }

  std::vector<std::string> action_labels() const { return labels(frame_->action_atoms(), action_); }
  std::vector<std::string> event_labels() const { return labels(frame_->events(), events_); }

  friend bool operator==(const Proposition& a, const Proposition& b) {
    return same_frame(a.frame_, b.frame_) && a.action_ == b.action_ && a.events_ == b.events_;
  }

 private:
  static std::vector<std::string> labels(const std::vector<std::string>& all, std::uint64_t mask) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) out.push_back(all[i]);
    return out;
  }

  FramePtr frame_;
  std::uint64_t action_;
  std::uint64_t events_;
};

inline Proposition intersect(const Proposition& p, const Proposition& q) {
  require_same_frame(p.frame(), q.frame());
  return Proposition(p.frame(), p.action_mask() & q.action_mask(),
                     p.event_mask() & q.event_mask());
}

class MassFunction;
struct CombineOptions;
struct CombineResult;
CombineResult combine(std::span<const MassFunction> bpas, const CombineOptions& options);
MassFunction discount(const MassFunction& bpa, double alpha);

// A basic probability assignment. Only non-theta focal elements are stored;
// theta carries the remainder 1 - sum of stored masses.
class MassFunction {
 public:
  // (action mask, event mask); ordered so iteration is deterministic.
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  using FocalMap = std::map<Key, double>;

  explicit MassFunction(FramePtr frame) : frame_(std::move(frame)) {
    if (!frame_) raise(ErrorKind::schema, "mass function requires a frame");
  }

  MassFunction(FramePtr frame, const std::vector<std::pair<Proposition, double>>& focal)
      : MassFunction(std::move(frame)) {
    for (const auto& [prop, mass] : focal) insert(prop, mass);
    check_sum();
  }

  static MassFunction vacuous(FramePtr frame) { return MassFunction(std::move(frame)); }

  const FramePtr& frame() const noexcept { return frame_; }
  const FocalMap& focal() const noexcept { return focal_; }

  double theta_mass() const noexcept {
    double t = 1.0 - sum_;
    return t < kMassEpsilon ? 0.0 : t;
  }

  // Stored focal elements plus theta when it carries mass.
  std::size_t focal_count() const noexcept {
    return focal_.size() + (theta_mass() > 0.0 ? 1 : 0);
  }

  Proposition proposition(const Key& key) const {
    return Proposition(frame_, key.first, key.second);
  }

  double mass(const Proposition& p) const {
    require_same_frame(frame_, p.frame());
    if (p.is_theta()) return theta_mass();
    auto it = focal_.find({p.action_mask(), p.event_mask()});
    return it == focal_.end() ? 0.0 : it->second;
  }

  friend bool operator==(const MassFunction& a, const MassFunction& b) {
    return same_frame(a.frame_, b.frame_) && a.focal_ == b.focal_;
  }

 private:
  void insert(const Proposition& prop, double mass) {
    require_same_frame(frame_, prop.frame());
    if (prop.empty())
      raise(ErrorKind::schema, "focal proposition must not be empty");
    if (prop.is_theta())
      raise(ErrorKind::schema, "theta is implicit and must not be stored as a focal element");
    if (!(mass > 0.0) || mass > 1.0 + kSumTolerance)
      raise(ErrorKind::schema, "focal mass must lie in (0, 1]");
    if (mass < kMassEpsilon) return;  // folds into theta
    Key key{prop.action_mask(), prop.event_mask()};
    if (focal_.contains(key))
      raise(ErrorKind::schema, "duplicate focal proposition");
    focal_.emplace(key, mass);
    sum_ += mass;
  }

  void check_sum() const {
    if (sum_ > 1.0 + kSumTolerance)
      raise(ErrorKind::schema, "focal masses sum to more than one");
  }

  friend MassFunction discount(const MassFunction&, double);
  friend CombineResult combine(std::span<const MassFunction>, const CombineOptions&);

  // Used by combine/discount, which produce already-normalized masses.
  void insert_raw(Key key, double mass) {
    if (mass < kMassEpsilon) return;
    focal_[key] += mass;
    sum_ += mass;
  }

  FramePtr frame_;
  FocalMap focal_;
  double sum_ = 0.0;
};

struct CombineOptions {
  // Abort the cross-product enumeration once the product of focal counts
  // exceeds this cap.
  std::size_t focal_product_cap = 10'000'000;
};

struct CombineResult {
  MassFunction bpa;
  double conflict = 0.0;
};

namespace detail {

inline void check_combined_frames(std::span<const MassFunction> bpas) {
  if (bpas.empty()) raise(ErrorKind::schema, "combination requires at least one bpa");
  for (std::size_t i = 1; i < bpas.size(); ++i)
    require_same_frame(bpas[0].frame(), bpas[i].frame());
}

inline void check_focal_product(std::span<const MassFunction> bpas,
                                const CombineOptions& options) {
  double product = 1.0;
  for (const auto& b : bpas) product *= static_cast<double>(std::max<std::size_t>(b.focal_count(), 1));
  if (product > static_cast<double>(options.focal_product_cap))
    raise(ErrorKind::resource_cap,
          "focal cross product exceeds the enumeration cap");
}

// Depth-first walk over one focal pick per bpa. A branch whose running
// intersection goes empty stays empty, so its whole remaining mass (picks of
// each bpa sum to one) is charged to the conflict immediately.
template <typename Leaf>
void cross_product(std::span<const MassFunction> bpas, std::size_t index,
                   std::uint64_t action, std::uint64_t events, double weight,
                   double& conflict, Leaf&& leaf) {
  if (index == bpas.size()) {
    leaf(action, events, weight);
    return;
  }
  const MassFunction& mf = bpas[index];
  for (const auto& [key, mass] : mf.focal()) {
    const std::uint64_t a = action & key.first;
    const std::uint64_t e = events & key.second;
    const double w = weight * mass;
    if (a == 0 || e == 0)
      conflict += w;
    else
      cross_product(bpas, index + 1, a, e, w, conflict, leaf);
  }
  const double theta = bpas[index].theta_mass();
  if (theta > 0.0)
    cross_product(bpas, index + 1, action, events, weight * theta, conflict, leaf);
}

}  // namespace detail

// Dempster's rule over any number of bpas. Returns the normalized combination
// together with the conflict k, the total mass landing on the empty set.
inline CombineResult combine(std::span<const MassFunction> bpas,
                             const CombineOptions& options = {}) {
  detail::check_combined_frames(bpas);
  detail::check_focal_product(bpas, options);
  const FramePtr& frame = bpas[0].frame();
  std::map<MassFunction::Key, double> accumulated;
  double conflict = 0.0;
  detail::cross_product(bpas, 0, frame->full_action_mask(), frame->full_event_mask(), 1.0,
                        conflict,
                        [&](std::uint64_t a, std::uint64_t e, double w) {
                          accumulated[{a, e}] += w;
                        });
  if (conflict >= 1.0 - kSumTolerance)
    raise(ErrorKind::total_conflict, "combination is totally conflicting");
  MassFunction out(frame);
  const MassFunction::Key theta_key{frame->full_action_mask(), frame->full_event_mask()};
  for (const auto& [key, mass] : accumulated) {
    if (key == theta_key) continue;  // theta stays implicit
    out.insert_raw(key, mass / (1.0 - conflict));
  }
  return {std::move(out), conflict};
}

inline CombineResult combine(std::initializer_list<MassFunction> bpas,
                             const CombineOptions& options = {}) {
  return combine(std::span<const MassFunction>(bpas.begin(), bpas.size()), options);
}

// Conflict k alone; unlike combine, a totally conflicting set is allowed.
inline double conflict(std::span<const MassFunction> bpas,
                       const CombineOptions& options = {}) {
  detail::check_combined_frames(bpas);
  if (bpas.size() == 1) return 0.0;
  detail::check_focal_product(bpas, options);
  const FramePtr& frame = bpas[0].frame();
  double k = 0.0;
  detail::cross_product(bpas, 0, frame->full_action_mask(), frame->full_event_mask(), 1.0, k,
                        [](std::uint64_t, std::uint64_t, double) {});
  return k;
}

inline double conflict(std::initializer_list<MassFunction> bpas,
                       const CombineOptions& options = {}) {
  return conflict(std::span<const MassFunction>(bpas.begin(), bpas.size()), options);
}

inline double belief(const MassFunction& bpa, const Proposition& p) {
  require_same_frame(bpa.frame(), p.frame());
  if (p.empty())
    raise(ErrorKind::invalid_proposition, "belief of an empty proposition");
  double sum = 0.0;
  for (const auto& [key, mass] : bpa.focal()) {
    if ((key.first | p.action_mask()) == p.action_mask() &&
        (key.second | p.event_mask()) == p.event_mask())
      sum += mass;
  }
  if (p.is_theta()) sum += bpa.theta_mass();
  return sum;
}

inline double plausibility(const MassFunction& bpa, const Proposition& p) {
  require_same_frame(bpa.frame(), p.frame());
  if (p.empty())
    raise(ErrorKind::invalid_proposition, "plausibility of an empty proposition");
  double sum = bpa.theta_mass();
  for (const auto& [key, mass] : bpa.focal()) {
    if ((key.first & p.action_mask()) != 0 && (key.second & p.event_mask()) != 0)
      sum += mass;
  }
  return sum;
}

// Discounting: every non-theta mass is scaled by alpha, the removed mass
// moves to theta.
inline MassFunction discount(const MassFunction& bpa, double alpha) {
  if (!(alpha >= 0.0) || alpha > 1.0)
    raise(ErrorKind::range, "discount factor must lie in [0, 1]");
  MassFunction out(bpa.frame());
  for (const auto& [key, mass] : bpa.focal()) out.insert_raw(key, mass * alpha);
  return out;
}

// Average total uncertainty: scattering plus nonspecificity, with |A| counted
// as atoms of the product frame covered by A. Theta participates with its
// remainder mass.
inline double entropy(const MassFunction& bpa) {
  double h = 0.0;
  auto add = [&](double mass, int cardinality) {
    if (mass <= 0.0) return;
    h += mass * (std::log2(static_cast<double>(cardinality)) - std::log2(mass));
  };
  for (const auto& [key, mass] : bpa.focal())
    add(mass, std::popcount(key.first) * std::popcount(key.second));
  add(bpa.theta_mass(), bpa.frame()->product_size());
  return h;
}

struct Evidence {
  std::string id;
  MassFunction bpa;

  friend bool operator==(const Evidence& a, const Evidence& b) {
    return a.id == b.id && a.bpa == b.bpa;
  }
};

// Working set of evidence. Once falsity discounting has been applied the
// store is flagged and may no longer be repartitioned.
class EvidenceStore {
 public:
  explicit EvidenceStore(std::vector<Evidence> items) : items_(std::move(items)) {
    for (std::size_t i = 0; i < items_.size(); ++i)
      for (std::size_t j = i + 1; j < items_.size(); ++j)
        if (items_[i].id == items_[j].id)
          raise(ErrorKind::duplicate_id, "duplicate evidence id '" + items_[i].id + "'");
  }

  std::span<const Evidence> items() const noexcept { return items_; }
  bool discounted() const noexcept { return discounted_; }

  const Evidence& by_id(const std::string& id) const {
    for (const auto& e : items_)
      if (e.id == id) return e;
    raise(ErrorKind::lookup, "no evidence with id '" + id + "'");
  }

  // Swaps in the falsity-discounted bpas and latches the no-repartition flag.
  void replace_discounted(std::vector<Evidence> items) {
    if (items.size() != items_.size())
      raise(ErrorKind::schema, "discounted replacement must preserve the evidence set");
    items_ = std::move(items);
    discounted_ = true;
  }

 private:
  std::vector<Evidence> items_;
  bool discounted_ = false;
};

}  // namespace evspec
