// Command-line front end: infer, exact, sweep, validate, sample.
//
// Exit codes: 0 success, 1 usage or input error, 2 inference error.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "smp/cluster_graph.hpp"
#include "smp/engine.hpp"
#include "smp/errors.hpp"
#include "smp/eval.hpp"
#include "smp/exact.hpp"
#include "smp/sampler.hpp"
#include "smp/uai.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kInferenceError = 2;

// Input that could not be read or does not fit the flags.
struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_width_cap() {
  if (const char* env = std::getenv("SMP_WIDTH_CAP")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw UsageFailure("SMP_WIDTH_CAP is not an integer");
    }
  }
  return smp::kDefaultWidthCap;
}

struct InputFlags {
  std::string model;
  std::string evidence;
  std::string output;

  void add(CLI::App* app, bool model_required = true) {
    auto* m = app->add_option("--model", model, "Model file (UAI MARKOV format)")->check(CLI::ExistingFile);
    if (model_required) m->required();
    app->add_option("--evidence", evidence, "Evidence file: count followed by variable/value pairs")
        ->check(CLI::ExistingFile);
    app->add_option("--output", output, "Output file (default: standard output)");
  }

  smp::GraphicalModel load() const {
    try {
      smp::GraphicalModel m = smp::read_uai_file(model);
      if (!evidence.empty()) m = smp::absorb_evidence(m, smp::read_evidence_file(evidence));
      return m;
    } catch (const smp::Error& e) {
      throw UsageFailure(e.what());
    }
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageFailure("cannot write " + path);
  out << text;
}

const std::map<std::string, smp::ReprKind> kReprs = {
    {"dense", smp::ReprKind::kDense}, {"sparse", smp::ReprKind::kSparse}, {"add", smp::ReprKind::kAdd}};
const std::map<std::string, smp::Schedule> kSchedules = {{"sum-product", smp::Schedule::kSumProduct},
                                                         {"belief-update", smp::Schedule::kBeliefUpdate}};
const std::map<std::string, smp::SamplerMethod> kMethods = {{"gibbs", smp::SamplerMethod::kGibbs},
                                                            {"importance", smp::SamplerMethod::kImportance}};
const std::map<std::string, smp::EdgeLabels> kLabels = {{"minimal", smp::EdgeLabels::kMinimal},
                                                        {"full", smp::EdgeLabels::kFullIntersection}};

struct SamplerFlags {
  std::string method = "gibbs";
  std::size_t k = 0;
  std::uint64_t seed = 1;
  int burn_in = 100;
  int thinning = 2;
  CLI::Option* method_opt = nullptr;
  CLI::Option* k_opt = nullptr;

  void add(CLI::App* app) {
    method_opt = app->add_option("--method", method, "Sampler: gibbs or importance")
                     ->check(CLI::IsMember({"gibbs", "importance"}))
                     ->capture_default_str();
    k_opt = app->add_option("--k", k, "Number of samples")->check(CLI::PositiveNumber);
    app->add_option("--seed", seed, "Sampler seed")->capture_default_str();
    app->add_option("--burn-in", burn_in, "Gibbs sweeps discarded before the first sample")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--thinning", thinning, "Gibbs sweeps per kept sample")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  }

  smp::SamplerConfig config() const {
    smp::SamplerConfig c;
    c.method = kMethods.at(method);
    c.k = k;
    c.seed = seed;
    c.burn_in = burn_in;
    c.thinning = thinning;
    return c;
  }
};

struct EngineFlags {
  std::string repr = "add";
  int i_bound = 6;
  double epsilon = 0.0;
  std::string schedule = "sum-product";
  int max_iters = 100;
  double tolerance = 1e-6;
  double damping = 0.0;
  bool lossless = false;
  bool no_augment = false;
  std::string labels = "minimal";
  double time_limit_ms = 30000.0;
  std::size_t memory_limit_mb = 256;

  void add(CLI::App* app) {
    app->add_option("--repr", repr, "Function representation: dense, sparse or add")
        ->check(CLI::IsMember({"dense", "sparse", "add"}))
        ->capture_default_str();
    app->add_option("--i-bound", i_bound, "Maximum variables per cluster")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--epsilon", epsilon, "Quantization bound on normalized message values")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--schedule", schedule, "Propagation: sum-product or belief-update")
        ->check(CLI::IsMember({"sum-product", "belief-update"}))
        ->capture_default_str();
    app->add_option("--max-iters", max_iters, "Iteration bound on loopy graphs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--tolerance", tolerance, "Convergence threshold on message change")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--damping", damping, "Weight of the previous message, in [0, 1)")
        ->check(CLI::Range(0.0, 0.999999))
        ->capture_default_str();
    app->add_flag("--lossless", lossless, "Full supports, no sampling (the default when --k is absent)");
    app->add_flag("--no-augment", no_augment, "Do not add nonzero factor tuples missing from the samples");
    app->add_option("--labels", labels, "Edge labels: minimal or full intersections")
        ->check(CLI::IsMember({"minimal", "full"}))
        ->capture_default_str();
    app->add_option("--time-limit-ms", time_limit_ms, "Propagation time limit per run (0: none)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--memory-limit-mb", memory_limit_mb, "Propagation memory limit per run (0: none)")
        ->capture_default_str();
  }

  // `force_sampling`: the sweep axis supplies k.
  smp::RunParams params(const SamplerFlags& s, bool force_sampling = false) const {
    if (lossless && (s.k_opt->count() > 0 || force_sampling)) throw UsageFailure("sampling conflicts with --lossless");
    if (!force_sampling && s.method_opt->count() > 0 && s.k_opt->count() == 0) {
      throw UsageFailure("--method requires --k");
    }
    smp::RunParams p;
    p.repr = kReprs.at(repr);
    p.i_bound = i_bound;
    p.lossless = !force_sampling && s.k_opt->count() == 0;
    p.k = s.k;
    p.epsilon = epsilon;
    p.schedule = kSchedules.at(schedule);
    p.method = kMethods.at(s.method);
    p.burn_in = s.burn_in;
    p.thinning = s.thinning;
    p.augment_support = !no_augment;
    p.max_iterations = max_iters;
    p.tolerance = tolerance;
    p.damping = damping;
    p.time_limit_ms = time_limit_ms;
    p.memory_limit_bytes = memory_limit_mb << 20;
    return p;
  }
};

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageFailure("bad value in --values: '" + item + "'");
    }
  }
  if (out.empty()) throw UsageFailure("--values is empty");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample-based structured message passing for discrete Markov networks"};
  app.name("smp");
  app.require_subcommand(1);

  // infer
  auto* infer = app.add_subcommand("infer", "Approximate marginals on a join graph");
  InputFlags infer_in;
  SamplerFlags infer_s;
  EngineFlags infer_e;
  bool junction_tree = false;
  infer_in.add(infer);
  infer_s.add(infer);
  infer_e.add(infer);
  infer->add_flag("--junction-tree", junction_tree, "Use the min-fill junction tree instead of a join graph");

  // exact
  auto* exact = app.add_subcommand("exact", "Exact marginals by junction-tree message passing");
  InputFlags exact_in;
  int width_cap = 0;
  bool bruteforce = false;
  exact_in.add(exact);
  exact->add_option("--width-cap", width_cap, "Induced width cap (default: SMP_WIDTH_CAP or 20)")
      ->check(CLI::PositiveNumber);
  exact->add_flag("--bruteforce", bruteforce, "Enumerate every assignment instead");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Parameter sweep writing one CSV row per run");
  InputFlags sweep_in;
  SamplerFlags sweep_s;
  EngineFlags sweep_e;
  std::string axis = "k";
  std::string values;
  int reps = 10;
  int jobs = 1;
  bool omit_timing = false;
  std::string envelope;
  std::string ising;
  std::uint64_t model_seed = 1;
  double coupling = 0.5;
  double field = 0.2;
  sweep_in.add(sw, false);
  sweep_s.add(sw);
  sweep_e.add(sw);
  sw->add_option("--axis", axis, "Swept parameter: k, epsilon, ibound or time (limit in ms)")
      ->check(CLI::IsMember({"k", "epsilon", "ibound", "time"}))
      ->capture_default_str();
  sw->add_option("--values", values, "Comma-separated axis values, ascending")->required();
  sw->add_option("--reps", reps, "Repetitions per point; repetition r uses seed + r")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sw->add_option("--jobs", jobs, "Runs executed in parallel")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_flag("--omit-timing", omit_timing, "Write wall_ms as 0 so the CSV is reproducible byte for byte");
  sw->add_option("--envelope", envelope, "Time axis: file for the best mean avg_kl per time limit");
  sw->add_option("--ising", ising, "Generate a ROWSxCOLS Ising grid instead of reading --model");
  sw->add_option("--model-seed", model_seed, "Seed of the generated Ising grid")->capture_default_str();
  sw->add_option("--coupling", coupling, "Ising coupling bound |J|")->capture_default_str();
  sw->add_option("--field", field, "Ising field bound |h|")->capture_default_str();

  // validate
  auto* val = app.add_subcommand("validate", "Build a cluster graph and check running intersection");
  InputFlags val_in;
  int val_ibound = 6;
  std::string val_labels = "minimal";
  bool val_jt = false;
  bool val_dump = false;
  val_in.add(val);
  val->add_option("--i-bound", val_ibound, "Maximum variables per cluster")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  val->add_option("--labels", val_labels, "Edge labels: minimal or full intersections")
      ->check(CLI::IsMember({"minimal", "full"}))
      ->capture_default_str();
  val->add_flag("--junction-tree", val_jt, "Check the min-fill junction tree instead");
  val->add_flag("--dump", val_dump, "Print the cluster graph before the verdict");

  // sample
  auto* smp_cmd = app.add_subcommand("sample", "Draw samples, one assignment per line");
  InputFlags sample_in;
  SamplerFlags sample_s;
  sample_in.add(smp_cmd);
  sample_s.add(smp_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (infer->parsed()) {
      smp::GraphicalModel model = infer_in.load();
      smp::RunParams p = infer_e.params(infer_s);
      smp::JoinGraphParams jg{p.i_bound, kLabels.at(infer_e.labels)};
      smp::ClusterGraph graph =
          junction_tree ? smp::build_junction_tree(model, default_width_cap()) : smp::build_join_graph(model, jg);
      smp::RunResult r =
          smp::run_on_graph(model, graph, smp::sampler_config(p, infer_s.seed), smp::engine_config(p), p.repr);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      emit(infer_in.output,
           smp::format_marginals(r.marginals, {r.seed, r.propagation.iterations, r.propagation.converged}));
    } else if (exact->parsed()) {
      smp::GraphicalModel model = exact_in.load();
      smp::ExactResult r = bruteforce ? smp::bruteforce_marginals(model)
                                      : smp::exact_marginals(model, width_cap > 0 ? width_cap : default_width_cap());
      if (!r.satisfiable()) std::cerr << "warning: partition function is zero; marginals undefined\n";
      emit(exact_in.output, smp::format_exact(r));
    } else if (sw->parsed()) {
      smp::GraphicalModel model;
      if (!ising.empty()) {
        smp::IsingParams ip;
        char x = 0;
        std::stringstream ss(ising);
        if (!(ss >> ip.rows >> x >> ip.cols) || x != 'x' || !ss.eof()) throw UsageFailure("--ising expects ROWSxCOLS");
        ip.seed = model_seed;
        ip.coupling = coupling;
        ip.field = field;
        model = smp::generate_ising(ip);
      } else if (!sweep_in.model.empty()) {
        model = sweep_in.load();
      } else {
        throw UsageFailure("sweep needs --model or --ising");
      }
      smp::SweepSpec spec;
      spec.axis = axis == "k"         ? smp::SweepAxis::kK
                  : axis == "epsilon" ? smp::SweepAxis::kEpsilon
                  : axis == "ibound"  ? smp::SweepAxis::kIBound
                                      : smp::SweepAxis::kTime;
      spec.values = parse_values(values);
      if (!std::is_sorted(spec.values.begin(), spec.values.end())) throw UsageFailure("--values must be ascending");
      if (spec.axis == smp::SweepAxis::kK && sweep_s.k_opt->count() > 0) throw UsageFailure("--k conflicts with --axis k");
      const bool sampled_axis = spec.axis == smp::SweepAxis::kK || spec.axis == smp::SweepAxis::kTime;
      spec.base = sweep_e.params(sweep_s, sampled_axis);
      spec.repetitions = reps;
      spec.base_seed = sweep_s.seed;
      spec.jobs = jobs;
      spec.omit_timing = omit_timing;
      smp::ExactResult truth = smp::exact_marginals(model, default_width_cap());
      smp::SweepResult result = smp::sweep(model, truth, spec);
      emit(sweep_in.output, result.csv);
      if (!envelope.empty()) emit(envelope, result.envelope_csv);
    } else if (val->parsed()) {
      smp::GraphicalModel model = val_in.load();
      smp::ClusterGraph graph =
          val_jt ? smp::build_junction_tree(model, default_width_cap())
                 : smp::build_join_graph(model, {val_ibound, kLabels.at(val_labels)});
      std::string text = val_dump ? smp::dump_cluster_graph(graph) : std::string();
      auto violations = smp::validate_cluster_graph(model, graph);
      for (const auto& v : violations) text += v.message + '\n';
      if (violations.empty()) text += "OK\n";
      emit(val_in.output, text);
      return violations.empty() ? 0 : kInferenceError;
    } else if (smp_cmd->parsed()) {
      smp::GraphicalModel model = sample_in.load();
      if (sample_s.k_opt->count() == 0) throw UsageFailure("sample needs --k");
      emit(sample_in.output, smp::dump_samples(smp::generate_samples(model, sample_s.config())));
    }
  } catch (const UsageFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const smp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInferenceError;
  }
  return 0;
}
