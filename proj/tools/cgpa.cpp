// Command-line driver for the CGPA toolkit.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cgpa/causal/compare.hpp"
#include "cgpa/causal/ges.hpp"
#include "cgpa/causal/graph_io.hpp"
#include "cgpa/causal/hypothesis.hpp"
#include "cgpa/causal/lingam.hpp"
#include "cgpa/causal/pc.hpp"
#include "cgpa/core/hash.hpp"
#include "cgpa/data/default_sem.hpp"
#include "cgpa/data/sem.hpp"
#include "cgpa/explain/domain.hpp"
#include "cgpa/explain/importance.hpp"
#include "cgpa/explain/lime.hpp"
#include "cgpa/explain/recommend.hpp"
#include "cgpa/explain/shapley.hpp"
#include "cgpa/predict/compare.hpp"
#include "cgpa/predict/pipeline.hpp"
#include "cgpa/service/http.hpp"
#include "cgpa/stats/describe.hpp"

#include <CLI11.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cgpa;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, "'" + p.string() + "' not found");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, "'" + p.string() + "': " + e.what());
  }
}

/// Tracks one subcommand run: every file written, the inputs read, and the
/// manifest. On failure the written files are removed again.
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv) : command_(std::move(command)), argv_(std::move(argv)) {}

  void set_out(const std::string& dir) {
    if (dir.empty()) fail(ErrorCode::InvalidArgument, "--out is required");
    out_ = dir;
    if (!fs::exists(out_)) {
      fs::create_directories(out_);
      created_dir_ = true;
    }
  }
  json& config() { return config_; }
  void input(const fs::path& p) { inputs_.push_back(p); }

  void write(const std::string& name, const std::string& content) {
    const auto p = out_ / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot write '" + p.string() + "'");
    written_.push_back(p);
    f << content;
    if (!f) fail(ErrorCode::Io, "write failed for '" + p.string() + "'");
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }
  void adopt(const fs::path& p) { written_.push_back(p); }

  void finish() {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json in = json::array(), out = json::array();
    for (const auto& p : inputs_) in.push_back({{"path", p.string()}, {"sha256", sha256_hex(read_file(p))}});
    for (const auto& p : written_) out.push_back({{"path", p.string()}, {"sha256", sha256_hex(read_file(p))}});
    json m{{"command", command_},
           {"argv", argv_},
           {"config", config_},
           {"seed", config_.value("seed", json(nullptr))},
           {"inputs", in},
           {"outputs", out},
           {"wall_clock_seconds", wall}};
    write_json("manifest.json", m);
  }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(out_, ec)) fs::remove(out_, ec);
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  fs::path out_;
  bool created_dir_ = false;
  json config_ = json::object();
  std::vector<fs::path> inputs_;
  std::vector<fs::path> written_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void print_error(const std::string& code, const std::string& message) {
  std::string msg = message;
  const auto prefix = code + ": ";
  if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
  std::cerr << json{{"status", "error"}, {"code", code}, {"message", msg}}.dump() << std::endl;
}

/// Discovery data: the numeric columns as-is, or survey records encoded and scaled.
NumericDataset load_discovery_data(const std::string& path, bool numeric) {
  if (numeric) return load_numeric_csv(path);
  const auto schema = default_schema();
  return encode_and_scale(load_csv(path, schema), schema, default_scaling_policy(schema));
}

/// Truth DAG re-expressed over `nodes` (edges matched by name).
Dag truth_over(const std::vector<std::string>& nodes, const json& j) {
  const auto truth = dag_from_json(j);
  Dag out(nodes);
  for (auto [a, b] : truth.edges())
    out.add_edge(cgpa::detail::node_index(nodes, truth.nodes()[a]), cgpa::detail::node_index(nodes, truth.nodes()[b]));
  return out;
}

struct Common {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

void add_common(CLI::App* sub, Common& c, bool needs_out = true) {
  auto* o = sub->add_option("--out", c.out, "Output directory");
  if (needs_out) o->required();
  sub->add_option("--seed", c.seed, "Seed for all randomness")->capture_default_str();
  sub->add_option("--jobs", c.jobs, "Worker threads for parallel inner work")->capture_default_str()->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------- generate
struct GenerateArgs {
  Common c;
  std::string spec;
  std::size_t n = 2000;
  bool seed_given = false;
};

void cmd_generate(Run& run, const GenerateArgs& a) {
  run.set_out(a.c.out);
  SemSpec spec = a.spec.empty() ? default_sem_spec() : sem_from_json(read_json(a.spec));
  if (!a.spec.empty()) run.input(a.spec);
  if (a.seed_given) spec.seed = a.c.seed;
  run.config() = {{"spec", a.spec.empty() ? "built-in" : a.spec}, {"n", a.n}, {"seed", spec.seed}};
  const auto schema = default_schema();
  const bool survey = is_survey_schema(schema) && [&] {
    for (const auto& f : schema.factors())
      if (std::find(spec.nodes.begin(), spec.nodes.end(), f.acronym) == spec.nodes.end()) return false;
    return spec.nodes.size() == schema.size();
  }();
  const auto data = generate_synthetic(spec, a.n, survey ? &schema : nullptr);
  if (survey) run.write("data.csv", to_csv(data.records, schema));
  run.write("latent.csv", to_numeric_csv(data.latent));
  const WeightedDag truth(spec.nodes, spec.weight_matrix());
  run.write_json("graph.json", to_json(truth));
  run.write("graph.dot", to_dot(AnyGraph{truth}));
  run.write_json("sem.json", to_json(spec));
  run.finish();
}

// ---------------------------------------------------------------- inspect
struct InspectArgs {
  Common c;
  std::string data;
  std::vector<std::string> crosstabs{"G:AC", "G:SH", "DI:G"};
};

void cmd_inspect(Run& run, const InspectArgs& a) {
  run.set_out(a.c.out);
  run.input(a.data);
  run.config() = {{"data", a.data}, {"crosstabs", a.crosstabs}};
  const auto schema = default_schema();
  const auto records = load_csv(a.data, schema);
  const auto ds = encode_and_scale(records, schema, {});
  json report{{"rows", records.size()}, {"duplicates", records.size() - deduplicate(records).size()}};
  json factors = json::array();
  std::ostringstream text;
  text << "factor  non_null  unique  most_frequent\n";
  for (const auto& r : validation_report(records, schema)) {
    factors.push_back(to_json(r));
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-6s  %8zu  %6zu  %s\n", r.acronym.c_str(), r.non_null, r.unique,
                  r.most_frequent.c_str());
    text << buf;
  }
  report["factors"] = factors;
  json summary = json::array();
  for (const auto& s : describe(ds)) summary.push_back(to_json(s));
  report["encoded_summary"] = summary;

  std::vector<std::size_t> band_counts(cgpa_bands().size(), 0);
  for (const auto& r : records) ++band_counts[bin_cgpa(std::get<double>(r.at(std::string(FactorSchema::kTarget)))).index];
  json bands = json::array();
  text << "\nCGPA band counts\n";
  for (const auto& b : cgpa_bands()) {
    bands.push_back({{"band", b.label}, {"count", band_counts[b.index]}});
    text << "  " << b.label << "  " << band_counts[b.index] << '\n';
  }
  report["cgpa_bands"] = bands;

  json tabs = json::array();
  for (const auto& spec : a.crosstabs) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) fail(ErrorCode::InvalidArgument, "crosstab '" + spec + "' must be ROW:COL");
    const auto t = crosstab(ds, spec.substr(0, colon), spec.substr(colon + 1));
    tabs.push_back(to_json(t));
    text << '\n' << format_crosstab(t);
  }
  report["crosstabs"] = tabs;
  run.write_json("report.json", report);
  run.write("report.txt", text.str());
  run.finish();
}

// ---------------------------------------------------------------- discover
struct DiscoverArgs {
  Common c;
  std::string data, algo = "pc", truth;
  bool numeric = false;
  double alpha = 0.05, lambda = 1.0, prune = 0.05;
  std::size_t max_cond = 4;
};

void cmd_discover(Run& run, const DiscoverArgs& a) {
  run.set_out(a.c.out);
  run.input(a.data);
  run.config() = {{"data", a.data}, {"numeric", a.numeric}, {"algo", a.algo}, {"alpha", a.alpha},
                  {"lambda", a.lambda}, {"prune_threshold", a.prune}, {"max_cond_size", a.max_cond},
                  {"seed", a.c.seed}, {"truth", a.truth}};
  const auto ds = load_discovery_data(a.data, a.numeric);
  AnyGraph g;
  if (a.algo == "pc") g = pc_discover(ds, a.alpha, a.max_cond);
  else if (a.algo == "ges") g = ges_discover(ds);
  else if (a.algo == "grasp") g = grasp_discover(ds, a.lambda);
  else if (a.algo == "lingam") g = ica_lingam(ds, a.prune, a.c.seed);
  else fail(ErrorCode::InvalidArgument, "unknown algorithm '" + a.algo + "'");
  run.write_json("graph.json", to_json(g));
  run.write("graph.dot", to_dot(g));
  json metrics{{"algorithm", a.algo}, {"rows", ds.rows()}, {"nodes", ds.cols()}};
  if (!a.truth.empty()) {
    run.input(a.truth);
    const auto truth = truth_over(ds.columns(), read_json(a.truth));
    const auto cmp = std::visit(
        [&](const auto& x) -> GraphComparison {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, WeightedDag>) return graph_compare(x.dag(), truth);
          else return graph_compare(x, truth);
        },
        g);
    metrics["comparison"] = to_json(cmp);
  }
  run.write_json("metrics.json", metrics);
  run.finish();
}

// ---------------------------------------------------------------- evaluate-graph
struct EvalGraphArgs {
  Common c;
  std::string data, graph;
  bool numeric = false;
  double alpha = 0.05;
  std::size_t permutations = 200;
};

void cmd_evaluate_graph(Run& run, const EvalGraphArgs& a) {
  run.set_out(a.c.out);
  run.input(a.data);
  run.input(a.graph);
  run.config() = {{"data", a.data}, {"graph", a.graph}, {"numeric", a.numeric}, {"alpha", a.alpha},
                  {"permutations", a.permutations}, {"seed", a.c.seed}, {"jobs", a.c.jobs}};
  const auto ds = load_discovery_data(a.data, a.numeric);
  const auto dag = truth_over(ds.columns(), read_json(a.graph));
  const auto rep = evaluate_hypothesis_graph(ds, dag, a.alpha, a.permutations, a.c.seed, a.c.jobs);
  auto j = to_json(rep, ds.columns());
  j["alpha"] = a.alpha;
  run.write_json("metrics.json", j);
  run.finish();
}

// ---------------------------------------------------------------- train
struct TrainArgs {
  Common c;
  std::string data, model = "ridge", target = "regression";
  double lambda = 1.0, mix = 0.5, test_fraction = 0.2, l2 = 1e-3;
  std::size_t max_depth = 32, min_leaf = 1, trees = 100, k = 5, cv = 0;
};

void cmd_train(Run& run, const TrainArgs& a) {
  run.set_out(a.c.out);
  run.input(a.data);
  TrainConfig cfg;
  cfg.spec.kind = model_kind_from_string(a.model);
  cfg.spec.lambda = a.lambda;
  cfg.spec.mix = a.mix;
  cfg.spec.tree.max_depth = a.max_depth;
  cfg.spec.tree.min_samples_leaf = a.min_leaf;
  cfg.spec.forest.n_trees = a.trees;
  cfg.spec.forest.tree.max_depth = a.max_depth;
  cfg.spec.forest.tree.min_samples_leaf = a.min_leaf;
  cfg.spec.forest.jobs = a.c.jobs;
  cfg.spec.logistic.l2 = a.l2;
  cfg.spec.k = a.k;
  cfg.spec.seed = a.c.seed;
  cfg.target = target_kind_from_string(a.target);
  cfg.test_fraction = a.test_fraction;
  cfg.seed = a.c.seed;
  run.config() = {{"data", a.data}, {"model", a.model}, {"target", a.target}, {"lambda", a.lambda},
                  {"mix", a.mix}, {"max_depth", a.max_depth}, {"min_samples_leaf", a.min_leaf},
                  {"n_trees", a.trees}, {"k", a.k}, {"logistic_l2", a.l2}, {"test_fraction", a.test_fraction},
                  {"cv_folds", a.cv}, {"seed", a.c.seed}, {"jobs", a.c.jobs}};
  const auto schema = default_schema();
  const auto records = load_csv(a.data, schema);
  Artifact art = train_pipeline(records, schema, cfg);
  json metrics = metrics_json(art);
  if (a.cv > 0) {
    const auto cv = cross_validate_pipeline(records, schema, cfg, a.cv, a.c.jobs);
    art.extra_metadata["cv"] = {{"folds", a.cv}, {"score", cv.score_name}, {"mean", cv.mean}, {"sd", cv.sd}};
    metrics["cv"] = to_json(cv);
  }
  const auto path = fs::path(a.c.out) / "model.json";
  run.adopt(path);
  save_artifact(art, path);
  run.write_json("metrics.json", metrics);
  run.finish();
}

// ---------------------------------------------------------------- evaluate
struct EvaluateArgs {
  Common c;
  std::vector<std::string> artifacts, predictions;
};

void cmd_evaluate(Run& run, const EvaluateArgs& a) {
  run.set_out(a.c.out);
  if (a.artifacts.empty() && a.predictions.empty())
    fail(ErrorCode::InvalidArgument, "give at least one --artifact or --predictions file");
  run.config() = {{"artifacts", a.artifacts}, {"predictions", a.predictions}};
  std::vector<ComparisonEntry> entries;
  for (const auto& p : a.artifacts) {
    run.input(p);
    const auto art = load_artifact(p);
    // Directory names label artifacts written by `train --out <name>`.
    const fs::path path(p);
    auto name = path.filename() == "model.json" && path.has_parent_path() ? path.parent_path().filename().string()
                                                                          : path.stem().string();
    entries.push_back(comparison_entry(name.empty() ? std::string(to_string(art.config.spec.kind)) : name, art));
  }
  for (const auto& p : a.predictions) {
    run.input(p);
    entries.push_back(comparison_entry_from_predictions(read_json(p)));
  }
  json rows = json::array();
  for (const auto& e : entries) rows.push_back(to_json(e));
  const auto tables = comparison_tables(entries);
  run.write_json("metrics.json", {{"models", rows}});
  run.write("tables.txt", tables);
  std::cout << tables;
  run.finish();
}

// ---------------------------------------------------------------- explain
struct ExplainArgs {
  Common c;
  std::string model, data, method = "all";
  std::size_t row = 0, samples = 1000, perturbations = 500, repeats = 10;
};

void cmd_explain(Run& run, const ExplainArgs& a) {
  run.set_out(a.c.out);
  run.input(a.model);
  run.input(a.data);
  run.config() = {{"model", a.model}, {"data", a.data}, {"row", a.row}, {"method", a.method},
                  {"samples", a.samples}, {"perturbations", a.perturbations}, {"repeats", a.repeats},
                  {"seed", a.c.seed}};
  if (a.method != "all" && a.method != "shapley" && a.method != "lime" && a.method != "global")
    fail(ErrorCode::InvalidArgument, "unknown method '" + a.method + "'");
  const auto schema = default_schema();
  const auto art = load_artifact(a.model);
  const auto records = load_csv(a.data, schema);
  if (a.row >= records.size())
    fail(ErrorCode::OutOfRange, "row " + std::to_string(a.row) + " outside [0, " + std::to_string(records.size()) + ")");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(art.features.size()));
  Eigen::VectorXd y(X.rows());
  const bool band = art.config.target == TargetKind::Band;
  for (std::size_t i = 0; i < records.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = art.encode(records[i], schema).transpose();
    const double cgpa = std::get<double>(records[i].at(std::string(FactorSchema::kTarget)));
    y(static_cast<Eigen::Index>(i)) = band ? static_cast<double>(bin_cgpa(cgpa).index) : art.target_scaling.apply(cgpa);
  }
  const ModelFn f = [&art](const Eigen::VectorXd& z) { return art.predict_encoded(z); };
  const Eigen::VectorXd x = X.row(static_cast<Eigen::Index>(a.row)).transpose();
  const auto space = artifact_feature_space(art, schema, X);
  std::vector<std::string> raw;
  for (const auto& name : art.features) raw.push_back(to_text(records[a.row].at(name)));

  json out{{"row", a.row}, {"model_kind", to_string(art.config.spec.kind)}, {"target", to_string(art.config.target)}};
  if (a.method == "all" || a.method == "shapley") {
    Attribution attr;
    if (const auto* lin = std::get_if<LinearModel>(&art.model))
      attr = shapley_exact_linear(*lin, x, art.background_mean);
    else
      attr = shapley_sampled(f, x, art.background_mean, a.samples, a.c.seed);
    out["attribution"] = to_json(attr, art.features, raw);
    out["attribution"]["efficiency_gap"] = attr.efficiency_gap();
    if (!band)
      out["recommendations"] = to_json(recommend(attr, f, x, space, actionable_factors(art.features), 3));
  }
  if (a.method == "all" || a.method == "lime") {
    LimeConfig lc;
    lc.n_perturbations = a.perturbations;
    lc.seed = a.c.seed;
    out["lime"] = to_json(lime_explain(f, x, space, lc));
  }
  if (a.method == "all" || a.method == "global") {
    ImportanceOptions opt;
    opt.classification = band;
    opt.n_repeats = a.repeats;
    opt.seed = a.c.seed;
    out["permutation_importance"] = to_json(global_importance(f, X, y, art.features, opt));
    opt.method = ImportanceMethod::TreeSurrogate;
    out["tree_surrogate"] = to_json(global_importance(f, X, y, art.features, opt));
  }
  run.write_json("explanation.json", out);
  run.finish();
}

// ---------------------------------------------------------------- serve
struct ServeArgs {
  Common c;
  std::string config, host;
  int port = -1;
};

int cmd_serve(const ServeArgs& a) {
  auto cfg = load_service_config(a.config);
  if (!a.host.empty()) cfg.host = a.host;
  if (a.port >= 0) cfg.port = a.port;
  if (cfg.secret.empty())
    std::cerr << json{{"status", "warning"}, {"message", "no secret configured; tokens will not survive a restart"}}.dump()
              << std::endl;
  PredictionService service(cfg);
  HttpServer server(service);
  int port = cfg.port;
  if (port == 0) {
    port = server.bind_any(cfg.host);
    if (port < 0) fail(ErrorCode::Io, "cannot bind " + cfg.host);
  }
  std::cout << json{{"status", "listening"}, {"host", cfg.host}, {"port", port},
                    {"model_version", service.active_model()->version}}
                   .dump()
            << std::endl;
  const bool ok = cfg.port == 0 ? server.listen_after_bind() : server.listen(cfg.host, port);
  if (!ok) fail(ErrorCode::Io, "cannot listen on " + cfg.host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CGPA toolkit: synthetic data, causal discovery, prediction, explanation and serving"};
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Sample a synthetic survey CSV and its ground-truth graph from a SEM spec");
  add_common(g, gen.c);
  g->add_option("--spec", gen.spec, "SEM spec JSON (default: built-in hypothesis-graph SEM)");
  g->add_option("--n", gen.n, "Rows to sample")->capture_default_str()->check(CLI::PositiveNumber);

  InspectArgs ins;
  auto* i = app.add_subcommand("inspect", "Per-factor summary report and crosstabs of a survey CSV");
  add_common(i, ins.c);
  i->add_option("--data", ins.data, "Survey CSV")->required();
  i->add_option("--crosstab", ins.crosstabs, "ROW:COL factor pair (repeatable)");

  DiscoverArgs dis;
  auto* d = app.add_subcommand("discover", "Run causal discovery and write graph.json / graph.dot");
  add_common(d, dis.c);
  d->add_option("--data", dis.data, "Survey CSV, or numeric CSV with --numeric")->required();
  d->add_flag("--numeric", dis.numeric, "Treat the CSV as plain numeric columns");
  d->add_option("--algo", dis.algo, "pc | ges | grasp | lingam")
      ->capture_default_str()
      ->check(CLI::IsMember({"pc", "ges", "grasp", "lingam"}));
  d->add_option("--alpha", dis.alpha, "PC significance level")->capture_default_str();
  d->add_option("--max-cond", dis.max_cond, "PC maximum conditioning-set size")->capture_default_str();
  d->add_option("--lambda", dis.lambda, "GRaSP per-edge penalty")->capture_default_str();
  d->add_option("--prune", dis.prune, "LiNGAM pruning threshold")->capture_default_str();
  d->add_option("--truth", dis.truth, "Ground-truth graph JSON for comparison");

  EvalGraphArgs eg;
  auto* e = app.add_subcommand("evaluate-graph", "Test a hypothesis DAG's implied independences against data");
  add_common(e, eg.c);
  e->add_option("--data", eg.data, "Survey CSV, or numeric CSV with --numeric")->required();
  e->add_flag("--numeric", eg.numeric, "Treat the CSV as plain numeric columns");
  e->add_option("--graph", eg.graph, "Hypothesis DAG JSON")->required();
  e->add_option("--alpha", eg.alpha, "Test level")->capture_default_str();
  e->add_option("--permutations", eg.permutations, "Relabelled-graph null draws (>= 100)")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit a model pipeline and write model.json + metrics.json");
  add_common(t, tr.c);
  t->add_option("--data", tr.data, "Survey CSV")->required();
  t->add_option("--model", tr.model, "linear | ridge | lasso | elastic_net | tree | forest | logistic | ridge_cls | knn")
      ->capture_default_str();
  t->add_option("--target", tr.target, "regression | band")->capture_default_str();
  t->add_option("--lambda", tr.lambda, "Penalty strength")->capture_default_str();
  t->add_option("--mix", tr.mix, "Elastic-net L1 share")->capture_default_str();
  t->add_option("--max-depth", tr.max_depth, "Tree depth limit")->capture_default_str();
  t->add_option("--min-leaf", tr.min_leaf, "Minimum samples per leaf")->capture_default_str();
  t->add_option("--trees", tr.trees, "Forest size")->capture_default_str();
  t->add_option("--k", tr.k, "kNN neighbours")->capture_default_str();
  t->add_option("--l2", tr.l2, "Logistic L2 strength")->capture_default_str();
  t->add_option("--test-fraction", tr.test_fraction, "Held-out share")->capture_default_str();
  t->add_option("--cv", tr.cv, "Also run k-fold cross-validation (0 = off)")->capture_default_str();

  EvaluateArgs ev;
  auto* v = app.add_subcommand("evaluate", "Tabulate model comparisons from artifacts and external predictions");
  add_common(v, ev.c);
  v->add_option("--artifact", ev.artifacts, "Model artifact (repeatable)");
  v->add_option("--predictions", ev.predictions, "External prediction JSON (repeatable)");

  ExplainArgs ex;
  auto* x = app.add_subcommand("explain", "Shapley, LIME and global importance for one row");
  add_common(x, ex.c);
  x->add_option("--model", ex.model, "Model artifact")->required();
  x->add_option("--data", ex.data, "Survey CSV")->required();
  x->add_option("--row", ex.row, "0-based row to explain")->capture_default_str();
  x->add_option("--method", ex.method, "all | shapley | lime | global")->capture_default_str();
  x->add_option("--samples", ex.samples, "Shapley permutations for non-linear models")->capture_default_str();
  x->add_option("--perturbations", ex.perturbations, "LIME neighbourhood size")->capture_default_str();
  x->add_option("--repeats", ex.repeats, "Permutation-importance shuffles")->capture_default_str();

  ServeArgs sv;
  auto* s = app.add_subcommand("serve", "Start the HTTP prediction service");
  add_common(s, sv.c, false);
  s->add_option("--config", sv.config, "Service config JSON");
  s->add_option("--host", sv.host, "Bind address (overrides config)");
  s->add_option("--port", sv.port, "Port (overrides config and CGPA_PORT; 0 = ephemeral)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::CallForAllHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& pe) {
    print_error("Usage", pe.what());
    return 2;
  }
  gen.seed_given = g->count("--seed") > 0;

  auto* sub = app.get_subcommands().front();
  Run run(sub->get_name(), args);
  try {
    if (sub == g) cmd_generate(run, gen);
    else if (sub == i) cmd_inspect(run, ins);
    else if (sub == d) cmd_discover(run, dis);
    else if (sub == e) cmd_evaluate_graph(run, eg);
    else if (sub == t) cmd_train(run, tr);
    else if (sub == v) cmd_evaluate(run, ev);
    else if (sub == x) cmd_explain(run, ex);
    else return cmd_serve(sv);
  } catch (const Error& err) {
    run.rollback();
    print_error(std::string(to_string(err.code())), err.what());
    return 1;
  } catch (const std::exception& err) {
    run.rollback();
    print_error("Internal", err.what());
    return 1;
  }
  return 0;
}
