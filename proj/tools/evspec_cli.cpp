// Command-line front end: partitions weakly specified evidence into
// event-wise subsets, specifies and discounts each piece of evidence, runs
// the per-subset combinations and assigns events to subsets.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evspec/evspec.hpp"

namespace {

struct CliOptions {
  std::string input;
  std::string mode = "refined";
  int restarts = 32;
  std::uint64_t seed = 0;
  int exact_threshold = 8;
  std::string format = "structured";
  std::string queries;
};

std::vector<std::string> split_queries(const std::string& list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size() && !list.empty()) {
    std::size_t end = list.find(',', start);
    if (end == std::string::npos) end = list.size();
    std::string token = list.substr(start, end - start);
    if (!token.empty()) out.push_back(token);
    start = end + 1;
    if (end == list.size()) break;
  }
  return out;
}

evspec::PipelineOptions pipeline_options(const CliOptions& cli) {
  evspec::PipelineOptions options;
  options.mode = cli.mode == "overconfident" ? evspec::AnalysisMode::overconfident
                                             : evspec::AnalysisMode::refined;
  options.minimize.restarts = cli.restarts;
  options.minimize.seed = cli.seed;
  options.minimize.exact_threshold = cli.exact_threshold;
  options.queries = split_queries(cli.queries);
  return options;
}

void echo_config(evspec::AnalysisReport& report, const CliOptions& cli) {
  report.seed = cli.seed;
  report.restarts = cli.restarts;
  report.exact_threshold = cli.exact_threshold;
  report.mode = cli.mode;
}

void emit(const evspec::AnalysisReport& report, const CliOptions& cli) {
  const auto format = cli.format == "human" ? evspec::ReportFormat::human
                                            : evspec::ReportFormat::structured;
  std::cout << evspec::emit_report(report, format);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& warning : warnings) std::cerr << "warning: " << warning << "\n";
}

int run_partition(const CliOptions& cli, bool exhaustive) {
  auto input = evspec::load_evidence(cli.input);
  auto options = pipeline_options(cli);
  evspec::EvidenceStore store(input.evidence);
  evspec::MinimizeResult result =
      exhaustive ? evspec::brute_force_minimize(store.items(), input.prior)
                 : evspec::minimize(store, input.prior, options.minimize);
  evspec::AnalysisReport report;
  report.command = exhaustive ? "oracle" : "partition";
  echo_config(report, cli);
  report.partition = result.partition.subsets();
  report.profile = {result.profile.c0, result.profile.subset_conflicts, result.profile.mcf};
  emit(report, cli);
  return 0;
}

int run_specify(const CliOptions& cli) {
  auto input = evspec::load_evidence(cli.input);
  auto options = pipeline_options(cli);
  evspec::EvidenceStore store(input.evidence);
  auto minimized = evspec::minimize(store, input.prior, options.minimize);
  std::vector<std::string> warnings;
  auto specs = evspec::specify_all(minimized.partition, input.prior, store.items(), &warnings);
  print_warnings(warnings);

  evspec::AnalysisReport report;
  report.command = "specify";
  echo_config(report, cli);
  report.partition = minimized.partition.subsets();
  report.profile = {minimized.profile.c0, minimized.profile.subset_conflicts,
                    minimized.profile.mcf};
  for (const auto& spec : specs) {
    evspec::SpecificationSection section;
    section.id = spec.id;
    section.home = spec.home;
    section.falsity = spec.falsity;
    section.falsity_alpha = 1.0 - spec.falsity;
    for (const auto& [subset, interval] : spec.per_subset)
      section.membership.push_back(
          {subset, subset > spec.subset_count, interval.bel, interval.pls});
    for (const auto& [subset, alpha] : evspec::subset_credibilities(spec).alpha)
      section.credibilities.push_back({subset, alpha});
    report.specifications.push_back(std::move(section));
  }
  emit(report, cli);
  return 0;
}

int run_analyze(const CliOptions& cli) {
  auto input = evspec::load_evidence(cli.input);
  auto options = pipeline_options(cli);
  std::vector<std::string> warnings;
  evspec::AnalysisReport report = evspec::run_analysis(input, options, &warnings);
  print_warnings(warnings);
  echo_config(report, cli);
  emit(report, cli);
  return 0;
}

int run_assign_events(const CliOptions& cli) {
  auto input = evspec::load_evidence(cli.input);
  auto options = pipeline_options(cli);
  evspec::AnalysisReport report;
  if (options.mode == evspec::AnalysisMode::refined) {
    std::vector<std::string> warnings;
    evspec::AnalysisReport full = evspec::run_refined(input, options, &warnings);
    print_warnings(warnings);
    report.partition = full.partition;
    report.profile = full.profile;
    report.assignment = full.assignment;
  } else {
    evspec::EvidenceStore store(input.evidence);
    auto minimized = evspec::minimize(store, input.prior, options.minimize);
    report.partition = minimized.partition.subsets();
    report.profile = {minimized.profile.c0, minimized.profile.subset_conflicts,
                      minimized.profile.mcf};
    std::vector<evspec::EventProjection> projections;
    for (int subset = 1; subset <= minimized.partition.subset_count(); ++subset) {
      std::vector<evspec::MassFunction> bpas;
      for (const auto& id : minimized.partition.members(subset))
        bpas.push_back(store.by_id(id).bpa);
      projections.push_back(evspec::project_events(evspec::combine(bpas).bpa, subset));
    }
    report.assignment =
        evspec::detail::assignment_section(input.frame, evspec::assign_events(projections));
  }
  report.command = "assign-events";
  echo_config(report, cli);
  emit(report, cli);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"evspec: partition, specify and discount nonspecific evidence"};
  app.require_subcommand(1);

  CliOptions cli;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--input", cli.input, "input evidence file (JSON)")->required();
    cmd->add_option("--mode", cli.mode, "analysis mode")
        ->check(CLI::IsMember({"refined", "overconfident"}));
    cmd->add_option("--restarts", cli.restarts, "local search restarts")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cli.seed, "random seed for the local search");
    cmd->add_option("--exact-threshold", cli.exact_threshold,
                    "exhaustive search at or below this evidence count")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--format", cli.format, "output format")
        ->check(CLI::IsMember({"structured", "human"}));
    cmd->add_option("--queries", cli.queries,
                    "comma-separated interval queries (atoms, attribute values, events)");
    return cmd;
  };

  auto* partition_cmd =
      add_common(app.add_subcommand("partition", "minimize the metaconflict"));
  auto* specify_cmd = add_common(
      app.add_subcommand("specify", "partition, then specify every piece of evidence"));
  auto* analyze_cmd =
      add_common(app.add_subcommand("analyze", "run the full analysis pipeline"));
  auto* assign_cmd = add_common(
      app.add_subcommand("assign-events", "infer which event each subset refers to"));
  auto* oracle_cmd = add_common(
      app.add_subcommand("oracle", "exhaustive partition minimization (exact reference)"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (partition_cmd->parsed()) return run_partition(cli, false);
    if (oracle_cmd->parsed()) return run_partition(cli, true);
    if (specify_cmd->parsed()) return run_specify(cli);
    if (analyze_cmd->parsed()) return run_analyze(cli);
    if (assign_cmd->parsed()) return run_assign_events(cli);
  } catch (const evspec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
