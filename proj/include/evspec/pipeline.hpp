#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evspec/assignment.hpp"
#include "evspec/core.hpp"
#include "evspec/discount.hpp"
#include "evspec/errors.hpp"
#include "evspec/metaconflict.hpp"
#include "evspec/specify.hpp"

namespace evspec {

using json = nlohmann::ordered_json;

inline constexpr int kInputSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

struct NamedAtomSet {
  std::string name;
  std::vector<std::string> atoms;
};

struct PipelineInput {
  FramePtr frame;
  DomainPrior prior;
  std::vector<Evidence> evidence;
  // Attribute values declared in the input, in declaration order; used as
  // default interval queries.
  std::vector<NamedAtomSet> marginals;
};

namespace detail {

inline const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object())
    raise(ErrorKind::schema, path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    raise(ErrorKind::schema, path + ": missing field '" + key + "'");
  return *it;
}

inline double number_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number())
    raise(ErrorKind::schema, path + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::string string_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string())
    raise(ErrorKind::schema, path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<std::string> string_list(const json& v, const std::string& path) {
  if (!v.is_array())
    raise(ErrorKind::schema, path + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string())
      raise(ErrorKind::schema, path + ": expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace detail

inline PipelineInput parse_input(const json& doc) {
  const std::string root = "$";
  const json& version = detail::field(doc, "version", root);
  if (!version.is_number_integer() || version.get<int>() != kInputSchemaVersion)
    raise(ErrorKind::version, "$.version: unsupported input schema version");

  auto atoms = detail::string_list(detail::field(doc, "action_frame", root), "$.action_frame");
  auto events = detail::string_list(detail::field(doc, "events", root), "$.events");
  FramePtr frame;
  try {
    frame = Frame::create(atoms, events);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("$.action_frame/$.events: ") + e.what());
  }

  const json& prior_obj = detail::field(doc, "domain_prior", root);
  if (!prior_obj.is_object())
    raise(ErrorKind::schema, "$.domain_prior: expected an object mapping counts to masses");
  std::map<int, double> prior_masses;
  for (const auto& [key, value] : prior_obj.items()) {
    int count = 0;
    try {
      std::size_t used = 0;
      count = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      raise(ErrorKind::schema, "$.domain_prior: key '" + key + "' is not a subset count");
    }
    if (!value.is_number())
      raise(ErrorKind::schema, "$.domain_prior." + key + ": expected a number");
    prior_masses[count] = value.get<double>();
  }
  auto make_prior = [&]() -> DomainPrior {
    try {
      return DomainPrior(prior_masses);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string("$.domain_prior: ") + e.what());
    }
  };
  DomainPrior prior = make_prior();

  std::vector<NamedAtomSet> marginals;
  if (doc.contains("attributes")) {
    const json& attrs = doc.at("attributes");
    if (!attrs.is_object())
      raise(ErrorKind::schema, "$.attributes: expected an object");
    for (const auto& [attr, values] : attrs.items()) {
      if (!values.is_object())
        raise(ErrorKind::schema, "$.attributes." + attr + ": expected an object");
      for (const auto& [name, atom_list] : values.items()) {
        const std::string path = "$.attributes." + attr + "." + name;
        auto members = detail::string_list(atom_list, path);
        for (const auto& atom : members) frame->atom_index(atom);  // raises if unknown
        if (members.empty()) raise(ErrorKind::schema, path + ": must name at least one atom");
        marginals.push_back({name, std::move(members)});
      }
    }
  }

  const json& evidence_arr = detail::field(doc, "evidence", root);
  if (!evidence_arr.is_array())
    raise(ErrorKind::schema, "$.evidence: expected an array");
  if (evidence_arr.empty())
    raise(ErrorKind::schema, "$.evidence: at least one piece of evidence required");
  std::vector<Evidence> evidence;
  for (std::size_t i = 0; i < evidence_arr.size(); ++i) {
    const std::string path = "$.evidence[" + std::to_string(i) + "]";
    const json& entry = evidence_arr[i];
    std::string id = detail::string_field(entry, "id", path);
    const json& focal_arr = detail::field(entry, "focal", path);
    if (!focal_arr.is_array())
      raise(ErrorKind::schema, path + ".focal: expected an array");
    std::vector<std::pair<Proposition, double>> focal;
    for (std::size_t j = 0; j < focal_arr.size(); ++j) {
      const std::string fpath = path + ".focal[" + std::to_string(j) + "]";
      const json& f = focal_arr[j];
      auto f_atoms = detail::string_list(detail::field(f, "action", fpath), fpath + ".action");
      auto f_events = detail::string_list(detail::field(f, "events", fpath), fpath + ".events");
      double mass = detail::number_field(f, "mass", fpath);
      try {
        focal.emplace_back(Proposition::make(frame, f_atoms, f_events), mass);
      } catch (const Error& e) {
        throw Error(e.kind(), fpath + ": " + e.what());
      }
    }
    try {
      evidence.push_back({std::move(id), MassFunction(frame, focal)});
    } catch (const Error& e) {
      throw Error(e.kind(), path + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < evidence.size(); ++i)
    for (std::size_t j = i + 1; j < evidence.size(); ++j)
      if (evidence[i].id == evidence[j].id)
        raise(ErrorKind::duplicate_id, "$.evidence: duplicate id '" + evidence[i].id + "'");

  return {std::move(frame), std::move(prior), std::move(evidence), std::move(marginals)};
}

inline PipelineInput load_evidence(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::schema, "cannot open input file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::schema, "'" + path + "': " + e.what());
  }
  return parse_input(doc);
}

// ---------------------------------------------------------------------------
// Interval queries

struct Query {
  std::string name;
  Proposition prop;
};

namespace detail {

inline std::string action_set_name(const PipelineInput& input, std::uint64_t mask) {
  for (const auto& marginal : input.marginals) {
    std::uint64_t m = 0;
    for (const auto& atom : marginal.atoms)
      m |= std::uint64_t{1} << input.frame->atom_index(atom);
    if (m == mask) return marginal.name;
  }
  std::string name;
  const auto& atoms = input.frame->action_atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i)
    if (mask & (std::uint64_t{1} << i)) {
      if (!name.empty()) name += '|';
      name += atoms[i];
    }
  return name;
}

}  // namespace detail

// Default queries: every focal action part appearing in the input, every
// declared attribute value, and every single event.
inline std::vector<Query> default_queries(const PipelineInput& input) {
  std::vector<Query> queries;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> seen;
  auto push = [&](const std::string& name, const Proposition& prop) {
    std::pair<std::uint64_t, std::uint64_t> key{prop.action_mask(), prop.event_mask()};
    for (const auto& s : seen)
      if (s == key) return;
    seen.push_back(key);
    queries.push_back({name, prop});
  };
  const std::uint64_t full_e = input.frame->full_event_mask();
  const std::uint64_t full_a = input.frame->full_action_mask();
  for (const auto& evidence : input.evidence)
    for (const auto& [key, mass] : evidence.bpa.focal()) {
      Proposition prop(input.frame, key.first, full_e);
      push(detail::action_set_name(input, key.first), prop);
    }
  for (const auto& marginal : input.marginals) {
    std::uint64_t mask = 0;
    for (const auto& atom : marginal.atoms)
      mask |= std::uint64_t{1} << input.frame->atom_index(atom);
    push(marginal.name, Proposition(input.frame, mask, full_e));
  }
  for (std::size_t i = 0; i < input.frame->events().size(); ++i)
    push(input.frame->events()[i], Proposition(input.frame, full_a, std::uint64_t{1} << i));
  return queries;
}

// Resolves user-supplied query tokens: an event label, an attribute value
// name, a single atom, or a '+'-joined union of atoms and attribute values.
inline std::vector<Query> resolve_queries(const PipelineInput& input,
                                          std::span<const std::string> tokens) {
  if (tokens.empty()) return default_queries(input);
  std::vector<Query> queries;
  for (const auto& token : tokens) {
    const auto& events = input.frame->events();
    if (std::find(events.begin(), events.end(), token) != events.end()) {
      queries.push_back({token, Proposition(input.frame, input.frame->full_action_mask(),
                                            std::uint64_t{1}
                                                << input.frame->event_index(token))});
      continue;
    }
    std::uint64_t mask = 0;
    std::size_t start = 0;
    while (start <= token.size()) {
      std::size_t end = token.find('+', start);
      if (end == std::string::npos) end = token.size();
      const std::string part = token.substr(start, end - start);
      bool found = false;
      for (const auto& marginal : input.marginals)
        if (marginal.name == part) {
          for (const auto& atom : marginal.atoms)
            mask |= std::uint64_t{1} << input.frame->atom_index(atom);
          found = true;
          break;
        }
      if (!found) mask |= std::uint64_t{1} << input.frame->atom_index(part);  // raises if unknown
      start = end + 1;
    }
    queries.push_back({token, Proposition(input.frame, mask, input.frame->full_event_mask())});
  }
  return queries;
}

// ---------------------------------------------------------------------------
// Analysis report

enum class AnalysisMode { refined, overconfident };
enum class ReportFormat { structured, human };

inline const char* to_string(AnalysisMode mode) {
  return mode == AnalysisMode::refined ? "refined" : "overconfident";
}

struct PipelineOptions {
  AnalysisMode mode = AnalysisMode::refined;
  MinimizeConfig minimize;
  std::vector<std::string> queries;  // empty means the defaults
};

struct ProfileSection {
  double c0 = 0.0;
  std::vector<double> subset_conflicts;
  double mcf = 0.0;

  friend bool operator==(const ProfileSection&, const ProfileSection&) = default;
};

struct MembershipRow {
  int subset = 0;
  bool hypothetical = false;
  double bel = 0.0;
  double pls = 0.0;

  friend bool operator==(const MembershipRow&, const MembershipRow&) = default;
};

struct CredibilityRow {
  int subset = 0;
  double alpha = 0.0;

  friend bool operator==(const CredibilityRow&, const CredibilityRow&) = default;
};

struct SpecificationSection {
  std::string id;
  int home = 0;
  double falsity = 0.0;
  double falsity_alpha = 1.0;
  std::vector<MembershipRow> membership;
  std::vector<CredibilityRow> credibilities;

  friend bool operator==(const SpecificationSection&, const SpecificationSection&) = default;
};

struct FocalRow {
  std::vector<std::string> action;
  std::vector<std::string> events;
  double mass = 0.0;

  friend bool operator==(const FocalRow&, const FocalRow&) = default;
};

struct IntervalRow {
  std::string query;
  double bel = 0.0;
  double pls = 0.0;

  friend bool operator==(const IntervalRow&, const IntervalRow&) = default;
};

struct SubsetSection {
  int index = 0;
  std::vector<std::string> members;
  double combination_conflict = 0.0;
  std::vector<FocalRow> focal;
  double theta = 0.0;
  double entropy = 0.0;
  std::vector<IntervalRow> intervals;

  friend bool operator==(const SubsetSection&, const SubsetSection&) = default;
};

struct AssignmentFocalRow {
  // Each assignment lists the event label chosen for subsets 1..r.
  std::vector<std::vector<std::string>> assignments;
  double mass = 0.0;

  friend bool operator==(const AssignmentFocalRow&, const AssignmentFocalRow&) = default;
};

struct AssignmentIntervalRow {
  std::vector<std::string> assignment;
  double bel = 0.0;
  double pls = 0.0;

  friend bool operator==(const AssignmentIntervalRow&, const AssignmentIntervalRow&) = default;
};

struct AssignmentSection {
  double conflict = 0.0;
  std::vector<AssignmentFocalRow> focal;
  std::vector<AssignmentIntervalRow> intervals;

  friend bool operator==(const AssignmentSection&, const AssignmentSection&) = default;
};

struct AnalysisReport {
  int schema_version = kReportSchemaVersion;
  std::string command = "analyze";
  std::string mode;
  std::uint64_t seed = 0;
  int restarts = 32;
  int exact_threshold = 8;
  std::vector<std::string> queries;
  std::vector<std::vector<std::string>> partition;
  ProfileSection profile;
  std::vector<SpecificationSection> specifications;
  std::vector<SubsetSection> subsets;
  std::optional<AssignmentSection> assignment;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

// ---------------------------------------------------------------------------
// Pipeline runs

namespace detail {

template <typename F>
auto stage(const char* name, F&& run) {
  try {
    return run();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

inline std::vector<FocalRow> focal_rows(const MassFunction& bpa) {
  std::vector<FocalRow> rows;
  for (const auto& [key, mass] : bpa.focal()) {
    Proposition prop = bpa.proposition(key);
    rows.push_back({prop.action_labels(), prop.event_labels(), mass});
  }
  return rows;
}

inline std::vector<IntervalRow> interval_rows(const MassFunction& bpa,
                                              std::span<const Query> queries) {
  std::vector<IntervalRow> rows;
  for (const auto& query : queries)
    rows.push_back({query.name, belief(bpa, query.prop), plausibility(bpa, query.prop)});
  return rows;
}

inline std::vector<std::string> assignment_labels(const FramePtr& frame,
                                                  const SubsetEventAssignment& assignment) {
  std::vector<std::string> labels;
  for (int event : assignment.event_of) labels.push_back(frame->events()[static_cast<std::size_t>(event)]);
  return labels;
}

inline AssignmentSection assignment_section(const FramePtr& frame,
                                            const AssignEventsResult& result) {
  AssignmentSection section;
  section.conflict = result.conflict;
  for (const auto& [ids, mass] : result.bpa.focal) {
    AssignmentFocalRow row;
    for (std::uint32_t id : ids)
      row.assignments.push_back(assignment_labels(frame, result.bpa.universe[id]));
    row.mass = mass;
    section.focal.push_back(std::move(row));
  }
  for (const auto& interval : result.intervals)
    section.intervals.push_back({assignment_labels(frame, result.bpa.universe[interval.assignment]),
                                 interval.bel, interval.pls});
  return section;
}

}  // namespace detail

// The refined pipeline: partition, specify, falsity discount, credibility
// discount, per-subset combination, event assignment. For each subset the
// combination takes every piece of evidence whose membership plausibility is
// above zero, discounted to its credibility for that subset.
inline AnalysisReport run_refined(const PipelineInput& input, const PipelineOptions& options,
                                  std::vector<std::string>* warnings = nullptr) {
  AnalysisReport report;
  report.mode = to_string(AnalysisMode::refined);
  report.seed = options.minimize.seed;
  report.restarts = options.minimize.restarts;
  report.exact_threshold = options.minimize.exact_threshold;

  const std::vector<Query> queries = resolve_queries(input, options.queries);
  for (const auto& q : queries) report.queries.push_back(q.name);

  EvidenceStore store(input.evidence);
  MinimizeResult minimized = detail::stage(
      "partition", [&] { return minimize(store, input.prior, options.minimize); });
  report.partition = minimized.partition.subsets();
  report.profile = {minimized.profile.c0, minimized.profile.subset_conflicts,
                    minimized.profile.mcf};

  std::vector<MembershipSpecification> specs = detail::stage("specify", [&] {
    return specify_all(minimized.partition, input.prior, store.items(), warnings,
                       options.minimize.combine);
  });

  std::vector<FalsityDiscounted> falsity = detail::stage(
      "falsity-discount", [&] { return falsity_discount_all(store, specs); });

  std::vector<CredibilityVector> credibilities = detail::stage("credibility", [&] {
    std::vector<CredibilityVector> out;
    out.reserve(specs.size());
    for (const auto& spec : specs) out.push_back(subset_credibilities(spec));
    return out;
  });

  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    SpecificationSection section;
    section.id = spec.id;
    section.home = spec.home;
    section.falsity = spec.falsity;
    for (const auto& fd : falsity)
      if (fd.evidence.id == spec.id) section.falsity_alpha = fd.alpha;
    for (const auto& [subset, interval] : spec.per_subset)
      section.membership.push_back(
          {subset, subset > spec.subset_count, interval.bel, interval.pls});
    for (const auto& [subset, alpha] : credibilities[i].alpha)
      section.credibilities.push_back({subset, alpha});
    report.specifications.push_back(std::move(section));
  }

  std::map<std::string, const MembershipSpecification*> spec_by_id;
  for (const auto& s : specs) spec_by_id[s.id] = &s;
  std::map<std::string, const CredibilityVector*> cred_by_id;
  for (const auto& c : credibilities) cred_by_id[c.id] = &c;

  std::vector<EventProjection> projections;
  for (int subset = 1; subset <= minimized.partition.subset_count(); ++subset) {
    CombineResult combined = detail::stage("combination", [&] {
      std::vector<MassFunction> bpas;
      for (const auto& evidence : store.items()) {
        const MembershipSpecification& spec = *spec_by_id.at(evidence.id);
        auto it = spec.per_subset.find(subset);
        if (it == spec.per_subset.end() || it->second.pls <= kMassEpsilon) continue;
        bpas.push_back(subset_discount(evidence, *cred_by_id.at(evidence.id), subset).bpa);
      }
      return combine(bpas, options.minimize.combine);
    });

    SubsetSection section;
    section.index = subset;
    section.members = minimized.partition.members(subset);
    section.combination_conflict = combined.conflict;
    section.focal = detail::focal_rows(combined.bpa);
    section.theta = combined.bpa.theta_mass();
    section.entropy = entropy(combined.bpa);
    section.intervals = detail::interval_rows(combined.bpa, queries);
    report.subsets.push_back(std::move(section));
    projections.push_back(project_events(combined.bpa, subset));
  }

  AssignEventsResult assigned = detail::stage("event-assignment", [&] {
    AssignOptions assign_options;
    assign_options.focal_product_cap = options.minimize.combine.focal_product_cap;
    return assign_events(projections, assign_options);
  });
  report.assignment = detail::assignment_section(input.frame, assigned);
  return report;
}

// The overconfident baseline: partition, then combine each subset's original
// evidence with no specification or discounting.
inline AnalysisReport run_overconfident(const PipelineInput& input,
                                        const PipelineOptions& options) {
  AnalysisReport report;
  report.mode = to_string(AnalysisMode::overconfident);
  report.seed = options.minimize.seed;
  report.restarts = options.minimize.restarts;
  report.exact_threshold = options.minimize.exact_threshold;

  const std::vector<Query> queries = resolve_queries(input, options.queries);
  for (const auto& q : queries) report.queries.push_back(q.name);

  EvidenceStore store(input.evidence);
  MinimizeResult minimized = detail::stage(
      "partition", [&] { return minimize(store, input.prior, options.minimize); });
  report.partition = minimized.partition.subsets();
  report.profile = {minimized.profile.c0, minimized.profile.subset_conflicts,
                    minimized.profile.mcf};

  for (int subset = 1; subset <= minimized.partition.subset_count(); ++subset) {
    CombineResult combined = detail::stage("combination", [&] {
      std::vector<MassFunction> bpas;
      for (const auto& id : minimized.partition.members(subset))
        bpas.push_back(store.by_id(id).bpa);
      return combine(bpas, options.minimize.combine);
    });
    SubsetSection section;
    section.index = subset;
    section.members = minimized.partition.members(subset);
    section.combination_conflict = combined.conflict;
    section.focal = detail::focal_rows(combined.bpa);
    section.theta = combined.bpa.theta_mass();
    section.entropy = entropy(combined.bpa);
    section.intervals = detail::interval_rows(combined.bpa, queries);
    report.subsets.push_back(std::move(section));
  }
  return report;
}

inline AnalysisReport run_analysis(const PipelineInput& input, const PipelineOptions& options,
                                   std::vector<std::string>* warnings = nullptr) {
  return options.mode == AnalysisMode::refined ? run_refined(input, options, warnings)
                                               : run_overconfident(input, options);
}

// ---------------------------------------------------------------------------
// Report serialization

namespace detail {

inline json profile_to_json(const ProfileSection& profile) {
  return json{{"c0", profile.c0},
              {"subset_conflicts", profile.subset_conflicts},
              {"mcf", profile.mcf}};
}

inline ProfileSection profile_from_json(const json& j) {
  ProfileSection profile;
  profile.c0 = j.at("c0").get<double>();
  profile.subset_conflicts = j.at("subset_conflicts").get<std::vector<double>>();
  profile.mcf = j.at("mcf").get<double>();
  return profile;
}

}  // namespace detail

inline json report_to_json(const AnalysisReport& report) {
  json doc;
  doc["schema_version"] = report.schema_version;
  doc["command"] = report.command;
  doc["mode"] = report.mode;
  doc["seed"] = report.seed;
  doc["restarts"] = report.restarts;
  doc["exact_threshold"] = report.exact_threshold;
  doc["queries"] = report.queries;
  doc["partition"] = report.partition;
  doc["conflict_profile"] = detail::profile_to_json(report.profile);
  json specs = json::array();
  for (const auto& spec : report.specifications) {
    json membership = json::array();
    for (const auto& row : spec.membership)
      membership.push_back(json{{"subset", row.subset},
                                {"hypothetical", row.hypothetical},
                                {"bel", row.bel},
                                {"pls", row.pls}});
    json credibilities = json::array();
    for (const auto& row : spec.credibilities)
      credibilities.push_back(json{{"subset", row.subset}, {"alpha", row.alpha}});
    specs.push_back(json{{"id", spec.id},
                         {"home", spec.home},
                         {"falsity", spec.falsity},
                         {"falsity_alpha", spec.falsity_alpha},
                         {"membership", std::move(membership)},
                         {"credibilities", std::move(credibilities)}});
  }
  doc["specifications"] = std::move(specs);
  json subsets = json::array();
  for (const auto& subset : report.subsets) {
    json focal = json::array();
    for (const auto& row : subset.focal)
      focal.push_back(json{{"action", row.action}, {"events", row.events}, {"mass", row.mass}});
    json intervals = json::array();
    for (const auto& row : subset.intervals)
      intervals.push_back(json{{"query", row.query}, {"bel", row.bel}, {"pls", row.pls}});
    subsets.push_back(json{{"index", subset.index},
                           {"members", subset.members},
                           {"combination_conflict", subset.combination_conflict},
                           {"focal", std::move(focal)},
                           {"theta", subset.theta},
                           {"entropy", subset.entropy},
                           {"intervals", std::move(intervals)}});
  }
  doc["subsets"] = std::move(subsets);
  if (report.assignment) {
    json focal = json::array();
    for (const auto& row : report.assignment->focal)
      focal.push_back(json{{"assignments", row.assignments}, {"mass", row.mass}});
    json intervals = json::array();
    for (const auto& row : report.assignment->intervals)
      intervals.push_back(json{{"assignment", row.assignment}, {"bel", row.bel}, {"pls", row.pls}});
    doc["assignment"] = json{{"conflict", report.assignment->conflict},
                             {"focal", std::move(focal)},
                             {"intervals", std::move(intervals)}};
  }
  return doc;
}

inline AnalysisReport report_from_json(const json& doc) {
  if (!doc.contains("schema_version") || !doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != kReportSchemaVersion)
    raise(ErrorKind::version, "unsupported report schema version");
  AnalysisReport report;
  report.command = doc.at("command").get<std::string>();
  report.mode = doc.at("mode").get<std::string>();
  report.seed = doc.at("seed").get<std::uint64_t>();
  report.restarts = doc.at("restarts").get<int>();
  report.exact_threshold = doc.at("exact_threshold").get<int>();
  report.queries = doc.at("queries").get<std::vector<std::string>>();
  report.partition = doc.at("partition").get<std::vector<std::vector<std::string>>>();
  report.profile = detail::profile_from_json(doc.at("conflict_profile"));
  for (const auto& spec : doc.at("specifications")) {
    SpecificationSection section;
    section.id = spec.at("id").get<std::string>();
    section.home = spec.at("home").get<int>();
    section.falsity = spec.at("falsity").get<double>();
    section.falsity_alpha = spec.at("falsity_alpha").get<double>();
    for (const auto& row : spec.at("membership"))
      section.membership.push_back({row.at("subset").get<int>(),
                                    row.at("hypothetical").get<bool>(),
                                    row.at("bel").get<double>(), row.at("pls").get<double>()});
    for (const auto& row : spec.at("credibilities"))
      section.credibilities.push_back(
          {row.at("subset").get<int>(), row.at("alpha").get<double>()});
    report.specifications.push_back(std::move(section));
  }
  for (const auto& subset : doc.at("subsets")) {
    SubsetSection section;
    section.index = subset.at("index").get<int>();
    section.members = subset.at("members").get<std::vector<std::string>>();
    section.combination_conflict = subset.at("combination_conflict").get<double>();
    for (const auto& row : subset.at("focal"))
      section.focal.push_back({row.at("action").get<std::vector<std::string>>(),
                               row.at("events").get<std::vector<std::string>>(),
                               row.at("mass").get<double>()});
    section.theta = subset.at("theta").get<double>();
    section.entropy = subset.at("entropy").get<double>();
    for (const auto& row : subset.at("intervals"))
      section.intervals.push_back({row.at("query").get<std::string>(),
                                   row.at("bel").get<double>(), row.at("pls").get<double>()});
    report.subsets.push_back(std::move(section));
  }
  if (doc.contains("assignment")) {
    AssignmentSection section;
    const json& a = doc.at("assignment");
    section.conflict = a.at("conflict").get<double>();
    for (const auto& row : a.at("focal"))
      section.focal.push_back(
          {row.at("assignments").get<std::vector<std::vector<std::string>>>(),
           row.at("mass").get<double>()});
    for (const auto& row : a.at("intervals"))
      section.intervals.push_back({row.at("assignment").get<std::vector<std::string>>(),
                                   row.at("bel").get<double>(), row.at("pls").get<double>()});
    report.assignment = std::move(section);
  }
  return report;
}

inline AnalysisReport parse_report(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorKind::schema, std::string("report: ") + e.what());
  }
  return report_from_json(doc);
}

namespace detail {

inline std::string fixed4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

inline std::string join(std::span<const std::string> parts, const char* separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += separator;
    out += parts[i];
  }
  return out;
}

inline std::string render_assignment(std::span<const std::string> events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0) out += ", ";
    out += "subset " + std::to_string(i + 1) + " -> " + events[i];
  }
  return out;
}

inline std::string human_report(const AnalysisReport& report) {
  std::ostringstream out;
  if (report.command != "analyze") out << "command: " << report.command << "\n";
  out << "mode: " << report.mode << "\n";
  out << "seed: " << report.seed << "  restarts: " << report.restarts
      << "  exact-threshold: " << report.exact_threshold << "\n";
  out << "partition: " << report.partition.size()
      << " subsets, Mcf = " << fixed4(report.profile.mcf)
      << ", c0 = " << fixed4(report.profile.c0) << "\n";
  for (std::size_t i = 0; i < report.partition.size(); ++i)
    out << "  subset " << (i + 1) << " {" << join(report.partition[i], ", ")
        << "}: conflict = " << fixed4(report.profile.subset_conflicts[i]) << "\n";
  if (!report.specifications.empty()) {
    out << "specifications:\n";
    for (const auto& spec : report.specifications) {
      out << "  " << spec.id << ": home = subset " << spec.home
          << ", falsity = " << fixed4(spec.falsity)
          << ", credibility alpha = " << fixed4(spec.falsity_alpha) << "\n";
      for (const auto& row : spec.membership) {
        out << "    Bel(" << spec.id << " in subset " << row.subset
            << ") = " << fixed4(row.bel);
        if (row.hypothetical) out << "  [hypothetical]";
        out << "\n";
        out << "    Pls(" << spec.id << " in subset " << row.subset
            << ") = " << fixed4(row.pls);
        if (row.hypothetical) out << "  [hypothetical]";
        out << "\n";
      }
      for (const auto& row : spec.credibilities)
        out << "    alpha(" << spec.id << " | subset " << row.subset
            << ") = " << fixed4(row.alpha) << "\n";
    }
  }
  for (const auto& subset : report.subsets) {
    out << "subset " << subset.index << " {" << join(subset.members, ", ")
        << "}: combination conflict = " << fixed4(subset.combination_conflict)
        << ", entropy = " << fixed4(subset.entropy) << "\n";
    for (const auto& row : subset.focal)
      out << "  m(" << join(row.action, "|") << " & " << join(row.events, "|")
          << ") = " << fixed4(row.mass) << "\n";
    out << "  m(theta) = " << fixed4(subset.theta) << "\n";
    for (const auto& row : subset.intervals)
      out << "  [Bel(" << row.query << "), Pls(" << row.query << ")] = ["
          << fixed4(row.bel) << ", " << fixed4(row.pls) << "]\n";
  }
  if (report.assignment) {
    out << "event assignment: conflict = " << fixed4(report.assignment->conflict) << "\n";
    for (const auto& row : report.assignment->focal) {
      out << "  m(";
      for (std::size_t i = 0; i < row.assignments.size(); ++i) {
        if (i > 0) out << " or ";
        out << "(" << render_assignment(row.assignments[i]) << ")";
      }
      out << ") = " << fixed4(row.mass) << "\n";
    }
    for (const auto& row : report.assignment->intervals)
      out << "  [Bel, Pls](" << render_assignment(row.assignment) << ") = ["
          << fixed4(row.bel) << ", " << fixed4(row.pls) << "]\n";
  }
  return out.str();
}

}  // namespace detail

// Serializes a report. The structured form is schema-versioned JSON that
// parse_report reads back; the human form prints to four decimal places.
inline std::string emit_report(const AnalysisReport& report, ReportFormat format) {
  if (format == ReportFormat::structured) return report_to_json(report).dump(2) + "\n";
  return detail::human_report(report);
}

}  // namespace evspec
