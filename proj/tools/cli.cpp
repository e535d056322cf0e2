#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "commutree/errors.hpp"
#include "commutree/events.hpp"
#include "commutree/instance_gen.hpp"
#include "commutree/phase1.hpp"
#include "commutree/phase2.hpp"
#include "commutree/program_io.hpp"
#include "commutree/tree_io.hpp"
#include "commutree/verify.hpp"

namespace commutree::cli {

namespace {

using json = nlohmann::json;

/// Usage-level failure raised by a command after parsing.
struct UsageError : Error {
  using Error::Error;
};

std::string format_point(const Point& p) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? "," : "") << p(i);
  return os.str();
}

Point to_point(const std::vector<double>& v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p(static_cast<Eigen::Index>(i)) = v[i];
  return p;
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("commutree", sink);
  log->set_pattern("[%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("COMMUTREE_LOG")) {
    const std::string s(env);
    if (s == "off" || s == "0") level = spdlog::level::off;
    else level = spdlog::level::from_str(s);
  }
  log->set_level(level);
  return log;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

ProblemInstance load_program(const std::string& path) {
  ProblemInstance inst = load_instance(path);
  if (!inst.program) throw Error("instance '" + path + "' has no program");
  return inst;
}

struct Common {
  std::string manifest;
  std::uint64_t seed = 1;
};

struct GenerateArgs {
  std::string toy;
  int n_r = 1;
  int horizon = 3;
  std::string mode = "box-tightened";
  std::vector<double> theta_box;
  double center = 0.0;
  double kappa = 0.2;
  std::string out;
};

struct PartitionArgs {
  std::string instance;
  std::string out;
  std::string events;
  std::size_t max_iterations = Phase1Config{}.max_iterations;
  int workers = 1;
  bool deterministic = false;
};

struct RefineArgs {
  std::string instance;
  std::string tree;
  std::string out;
  std::string cert;
  std::string events;
  Phase2Config cfg;
  int workers = 1;
  bool deterministic = false;
  bool no_full_sweep = false;
};

struct QueryArgs {
  std::string tree;
  std::vector<double> theta;
  bool scaled = false;
};

struct VerifyArgs {
  std::string instance;
  std::string tree;
  int samples = 100;
};

struct StatsArgs {
  std::string tree;
  std::string out;
  std::string events;
  std::optional<double> slope;
  std::optional<double> intercept;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err), log_(make_logger(err)) {}

  int generate(const GenerateArgs& a) {
    manifest_["config"] = {{"toy", a.toy},     {"n_r", a.n_r},     {"horizon", a.horizon},
                           {"mode", a.mode},   {"theta_box", a.theta_box},
                           {"center", a.center}, {"kappa", a.kappa}};
    outputs_.push_back(a.out);
    if (!a.toy.empty()) {
      ToyInstance toy = a.toy == "toy1d-kappa" ? make_toy1d_kappa(a.center, a.kappa) : make_toy(a.toy);
      Polytope theta = toy.theta;
      if (!a.theta_box.empty()) {
        const int p = toy.program.p();
        if (static_cast<int>(a.theta_box.size()) != 2 * p)
          throw UsageError("--theta-box needs lo,hi per dimension (" + std::to_string(2 * p) + " values)");
        Eigen::VectorXd lo(p), hi(p);
        for (int i = 0; i < p; ++i) {
          lo(i) = a.theta_box[static_cast<std::size_t>(2 * i)];
          hi(i) = a.theta_box[static_cast<std::size_t>(2 * i + 1)];
          if (!(lo(i) < hi(i))) throw UsageError("--theta-box needs lo < hi");
        }
        theta = box_polytope(lo, hi);
      }
      Metadata meta{{"generator", "toy"}, {"toy", toy.name}};
      save_instance(a.out, toy.program, theta, meta);
      out_ << "wrote " << a.out << " (" << toy.name << ", p=" << toy.program.p()
           << ", m=" << toy.program.m() << ")\n";
      return kExitOk;
    }
    const auto mode = parse_robust_mode(a.mode);
    if (!mode) throw UsageError("unknown --mode '" + a.mode + "' (nominal or box-tightened)");
    if (a.n_r < 1) throw UsageError("--nr must be at least 1");
    McInstance mc = generate_instance(a.n_r, a.horizon, common_.seed, *mode);
    save_instance(a.out, *mc.program, mc.theta_normalized, mc.metadata());
    out_ << "wrote " << a.out << " (p=" << mc.program->p() << ", m=" << mc.program->m()
         << ", theta vertices=" << mc.theta_normalized.num_vertices() << ")\n";
    return kExitOk;
  }

  int partition(const PartitionArgs& a) {
    Phase1Config cfg;
    cfg.max_iterations = a.max_iterations;
    cfg.worker_count = a.workers;
    cfg.deterministic = a.deterministic || a.workers <= 1;
    cfg.on_event = [this](const PartitionEvent& e) {
      log_->debug("iter {} {} volume {:.3g} closed {:.4f}", e.iteration, e.action, e.cell_volume,
                  e.closed_fraction);
    };
    manifest_["config"] = {{"max_iterations", cfg.max_iterations},
                           {"worker_count", cfg.worker_count},
                           {"deterministic", cfg.deterministic}};
    inputs_.push_back(a.instance);
    outputs_.push_back(a.out);
    if (!a.events.empty()) outputs_.push_back(a.events);

    const ProblemInstance inst = load_program(a.instance);
    const ScaledProblem sp = scale_to_unit_box(*inst.program, inst.theta);
    MixedIntegerOracle oracle(sp.program);
    try {
      const PartitionResult res = build_partition(oracle, sp.theta, cfg, sp.transform);
      save_tree(a.out, res.tree);
      if (!a.events.empty()) {
        auto os = open_out(a.events);
        write_events_csv(os, res.events);
      }
      out_ << "leaves " << res.tree.leaves().size() << " iterations " << res.iterations << " runtime_s "
           << res.runtime_seconds << '\n';
      return kExitOk;
    } catch (const ThetaExceedsFeasibleSet& e) {
      const Point w = sp.transform.invert(e.witness());
      err_ << "error: parameter set exceeds the feasible set; witness theta = " << format_point(w) << '\n';
      out_ << "witness " << format_point(w) << '\n';
      manifest_["witness"] = std::vector<double>(w.data(), w.data() + w.size());
      return kExitThetaExceedsFeasibleSet;
    }
  }

  int refine(RefineArgs a) {
    a.cfg.worker_count = a.workers;
    a.cfg.deterministic = a.deterministic || a.workers <= 1;
    a.cfg.full_candidate_sweep = !a.no_full_sweep;
    a.cfg.on_event = [this](const PartitionEvent& e) {
      log_->debug("iter {} {} volume {:.3g} closed {:.4f}", e.iteration, e.action, e.cell_volume,
                  e.closed_fraction);
    };
    const auto& c = a.cfg;
    manifest_["config"] = {{"eps_abs", c.eps_abs},         {"eps_rel", c.eps_rel},
                           {"rho_max", c.rho_max},         {"pi_abs", c.pi_abs},
                           {"pi_rel", c.pi_rel},           {"denom_floor", c.denom_floor},
                           {"min_edge", c.min_edge},       {"max_iterations", c.max_iterations},
                           {"full_candidate_sweep", c.full_candidate_sweep},
                           {"worker_count", c.worker_count}, {"deterministic", c.deterministic}};
    inputs_ = {a.instance, a.tree};
    outputs_.push_back(a.out);
    if (!a.cert.empty()) outputs_.push_back(a.cert);
    if (!a.events.empty()) outputs_.push_back(a.events);
    try {
      c.validate();
    } catch (const InvalidInput& e) {
      throw UsageError(e.what());
    }

    const ProblemInstance inst = load_program(a.instance);
    PartitionTree tree = load_tree(a.tree);
    const ParametricProgram prog = inst.program->rescaled(tree.transform());
    MixedIntegerOracle oracle(prog);
    const RefineResult res = refine_partition(std::move(tree), oracle, c);
    save_tree(a.out, res.tree);
    if (!a.cert.empty()) {
      auto os = open_out(a.cert);
      write_certification_csv(os, res.tree);
    }
    if (!a.events.empty()) {
      auto os = open_out(a.events);
      write_events_csv(os, res.events);
    }
    const TreeStats st = statistics(res.tree);
    out_ << "leaves " << st.leaves << " iterations " << res.iterations << " reassignments "
         << res.reassignments << " warned_volume_fraction " << st.warned_volume_fraction
         << " runtime_s " << res.runtime_seconds << '\n';
    return kExitOk;
  }

  int query_cmd(const QueryArgs& a) {
    inputs_.push_back(a.tree);
    const PartitionTree tree = load_tree(a.tree);
    const Point theta = to_point(a.theta);
    if (theta.size() != tree.p())
      throw UsageError("--theta needs " + std::to_string(tree.p()) + " values");
    QueryResult q;
    try {
      q = a.scaled ? query(tree, theta) : query_unscaled(tree, theta);
    } catch (const OutsideTheta& e) {
      throw UsageError(e.what());
    }
    out_ << "delta=" << (q.delta ? q.delta->to_string() : "none") << " status=" << to_string(q.status)
         << " leaf=" << q.leaf << " tests=" << q.membership_tests << '\n';
    return kExitOk;
  }

  int verify(const VerifyArgs& a) {
    inputs_ = {a.instance, a.tree};
    manifest_["config"] = {{"samples_per_leaf", a.samples}};
    if (a.samples < 0) throw UsageError("--samples-per-leaf must be nonnegative");
    const ProblemInstance inst = load_program(a.instance);
    const PartitionTree tree = load_tree(a.tree);
    const ParametricProgram prog = inst.program->rescaled(tree.transform());
    MixedIntegerOracle oracle(prog);
    VerifyOptions opts;
    opts.samples_per_leaf = a.samples;
    opts.seed = common_.seed;
    const VerifyReport rep = verify_tree(tree, oracle, opts);
    for (const auto& ch : rep.checks) {
      if (ch.passed) {
        out_ << "pass " << ch.name << " evaluated=" << ch.evaluated << '\n';
      } else {
        out_ << "FAIL " << ch.name << " leaf=" << ch.leaf;
        if (ch.theta.size() == tree.p()) out_ << " theta=" << format_point(tree.transform().invert(ch.theta));
        out_ << " " << ch.detail << '\n';
      }
    }
    return rep.ok() ? kExitOk : kExitVerificationFailed;
  }

  int stats(const StatsArgs& a) {
    inputs_.push_back(a.tree);
    if (!a.out.empty()) outputs_.push_back(a.out);
    if (a.slope.has_value() != a.intercept.has_value())
      throw UsageError("--fit-slope and --fit-intercept go together");
    const PartitionTree tree = load_tree(a.tree);
    std::optional<CellCountModel> model;
    if (a.slope) model = CellCountModel{*a.slope, *a.intercept};
    TreeStats st = statistics(tree, model);
    if (!a.events.empty()) {
      std::ifstream is(a.events);
      if (!is) throw Error("cannot open '" + a.events + "'");
      const auto ev = read_events_csv(is);
      if (!ev.empty()) st.runtime_seconds = ev.back().t_wall;
    }
    if (a.out.empty()) {
      write_stats_csv(out_, st);
    } else {
      auto os = open_out(a.out);
      write_stats_csv(os, st);
    }
    return kExitOk;
  }

  Common& common() { return common_; }
  json& manifest() { return manifest_; }
  std::shared_ptr<spdlog::logger>& log() { return log_; }

  void write_manifest(const std::string& command, int status, double seconds) {
    std::string path = common_.manifest;
    if (path.empty()) {
      const std::string anchor = !outputs_.empty() ? outputs_.front() : !inputs_.empty() ? inputs_.front() : "";
      if (anchor.empty()) return;
      const auto dir = std::filesystem::path(anchor).parent_path();
      path = (dir / "manifest.jsonl").string();
    }
    manifest_["command"] = command;
    manifest_["inputs"] = inputs_;
    manifest_["outputs"] = outputs_;
    manifest_["seed"] = common_.seed;
    manifest_["wall_seconds"] = seconds;
    manifest_["exit_status"] = status;
    std::ofstream os(path, std::ios::app);
    if (!os) {
      log_->warn("cannot append manifest '{}'", path);
      return;
    }
    os << manifest_.dump() << '\n';
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  std::shared_ptr<spdlog::logger> log_;
  Common common_;
  json manifest_ = json::object();
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Runner runner(out, err);
  CLI::App app{"Feasible and epsilon-suboptimal commutation maps for parametric mixed-integer conic programs",
               "commutree"};
  app.require_subcommand(1);
  app.add_option("--manifest", runner.common().manifest,
                 "Run manifest (JSON lines, appended); default manifest.jsonl next to the first output");
  app.add_option("--seed", runner.common().seed, "Seed for generation and sampling");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write an instance file (MDOF benchmark or toy)");
  g->add_option("--toy", gen.toy, "Toy name: toy1d, toy1d-offset, toy1d-kappa, toy2d");
  g->add_option("--nr", gen.n_r, "Oscillator degrees of freedom");
  g->add_option("--horizon", gen.horizon, "MPC horizon N");
  g->add_option("--mode", gen.mode, "nominal or box-tightened");
  g->add_option("--theta-box", gen.theta_box, "Override toy Theta by a box lo,hi per dimension")
      ->delimiter(',')
      ->allow_extra_args(false);
  g->add_option("--center", gen.center, "toy1d-kappa overlap center");
  g->add_option("--kappa", gen.kappa, "toy1d-kappa overlap radius");
  g->add_option("-o,--out", gen.out, "Instance file")->required();

  PartitionArgs part;
  auto* p = app.add_subcommand("partition", "Phase I: feasible commutation map");
  p->add_option("-i,--instance", part.instance, "Instance file")->required()->check(CLI::ExistingFile);
  p->add_option("-o,--out", part.out, "Tree file")->required();
  p->add_option("--events", part.events, "Event CSV");
  p->add_option("--max-iterations", part.max_iterations, "Iteration cap");
  p->add_option("--workers", part.workers, "Parallel leaf workers")->check(CLI::PositiveNumber);
  p->add_flag("--deterministic", part.deterministic, "Single-threaded canonical order");

  RefineArgs ref;
  auto* r = app.add_subcommand("refine", "Phase II: epsilon-suboptimal refinement");
  r->add_option("-i,--instance", ref.instance, "Instance file")->required()->check(CLI::ExistingFile);
  r->add_option("-t,--tree", ref.tree, "Phase I tree")->required()->check(CLI::ExistingFile);
  r->add_option("-o,--out", ref.out, "Refined tree file")->required();
  r->add_option("--cert", ref.cert, "Certification CSV");
  r->add_option("--events", ref.events, "Event CSV");
  r->add_option("--eps-abs", ref.cfg.eps_abs, "Absolute error tolerance");
  r->add_option("--eps-rel", ref.cfg.eps_rel, "Relative error tolerance");
  r->add_option("--rho-max", ref.cfg.rho_max, "Largest tolerated simplex condition number");
  r->add_option("--pi-abs", ref.cfg.pi_abs, "Absolute keep-out radius");
  r->add_option("--pi-rel", ref.cfg.pi_rel, "Keep-out radius relative to the longest edge");
  r->add_option("--min-edge", ref.cfg.min_edge, "Close cells below this edge length with a warning");
  r->add_option("--max-iterations", ref.cfg.max_iterations, "Iteration cap");
  r->add_option("--workers", ref.workers, "Parallel leaf workers")->check(CLI::PositiveNumber);
  r->add_flag("--deterministic", ref.deterministic, "Single-threaded canonical order");
  r->add_flag("--no-full-sweep", ref.no_full_sweep, "Skip the all-commutation sweep before certifying");

  QueryArgs qa;
  auto* q = app.add_subcommand("query", "Look up the commutation for a parameter");
  q->add_option("-t,--tree", qa.tree, "Tree file")->required()->check(CLI::ExistingFile);
  q->add_option("--theta", qa.theta, "Parameter, comma separated")->required()->delimiter(',');
  q->add_flag("--scaled", qa.scaled, "Parameter is in the tree's scaled coordinates");

  VerifyArgs va;
  auto* v = app.add_subcommand("verify", "Re-check a tree against solver oracles");
  v->add_option("-i,--instance", va.instance, "Instance file")->required()->check(CLI::ExistingFile);
  v->add_option("-t,--tree", va.tree, "Tree file")->required()->check(CLI::ExistingFile);
  v->add_option("--samples-per-leaf", va.samples, "Interior samples per leaf");

  StatsArgs sa;
  auto* s = app.add_subcommand("stats", "Tree statistics CSV");
  s->add_option("-t,--tree", sa.tree, "Tree file")->required()->check(CLI::ExistingFile);
  s->add_option("-o,--out", sa.out, "CSV file (default stdout)");
  s->add_option("--events", sa.events, "Event CSV for the runtime column");
  s->add_option("--fit-slope", sa.slope, "Cell-count model slope (log2 cells per p^2)");
  s->add_option("--fit-intercept", sa.intercept, "Cell-count model intercept");

  std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  std::string command;
  int status = kExitUsage;
  try {
    if (g->parsed()) command = "generate", status = runner.generate(gen);
    else if (p->parsed()) command = "partition", status = runner.partition(part);
    else if (r->parsed()) command = "refine", status = runner.refine(ref);
    else if (q->parsed()) command = "query", status = runner.query_cmd(qa);
    else if (v->parsed()) command = "verify", status = runner.verify(va);
    else if (s->parsed()) command = "stats", status = runner.stats(sa);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    status = kExitUsage;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    runner.write_manifest(command, status, secs);
  } catch (const std::exception& e) {
    err << "warning: manifest not written: " << e.what() << '\n';
  }
  return status;
}

}  // namespace commutree::cli
