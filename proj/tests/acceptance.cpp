// Acceptance suite: one PASS/FAIL line per primary criterion. Every threshold
// below is fixed in advance; seeds derive from the shipped SEM seed.
#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cgpa/causal/compare.hpp"
#include "cgpa/causal/ges.hpp"
#include "cgpa/causal/hypothesis.hpp"
#include "cgpa/causal/lingam.hpp"
#include "cgpa/causal/pc.hpp"
#include "cgpa/data/default_sem.hpp"
#include "cgpa/explain/lime.hpp"
#include "cgpa/explain/shapley.hpp"
#include "cgpa/predict/forest.hpp"
#include "cgpa/predict/linear.hpp"
#include "cgpa/predict/metrics.hpp"
#include "cgpa/service/http.hpp"

#ifndef CGPA_CLI_PATH
#error "CGPA_CLI_PATH must name the cgpa executable"
#endif

namespace fs = std::filesystem;
using namespace cgpa;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("cgpa_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------- causal recovery

Outcome causal_recovery() {
  const auto base = default_sem_spec();
  constexpr int kSeeds = 10;
  constexpr std::size_t kRows = 5000;
  double pc_f1 = 0, ges_f1 = 0, lingam_rec = 0, lingam_dir = 0;
  for (int i = 0; i < kSeeds; ++i) {
    auto spec = base;
    spec.seed = base.seed + static_cast<std::uint64_t>(i);
    const auto data = generate_synthetic(spec, kRows);
    pc_f1 += graph_compare(pc_discover(data.latent, 0.05, 4), data.truth).skeleton_f1;
    ges_f1 += graph_compare(ges_discover(data.latent), data.truth).skeleton_f1;
    const auto wd = ica_lingam(data.latent, 0.05, spec.seed);
    std::size_t strong = 0, directed = 0, recovered = 0;
    for (const auto& e : data.truth.edges()) {
      const double w = data.weights(static_cast<Eigen::Index>(e.second), static_cast<Eigen::Index>(e.first));
      if (std::abs(w) < 0.3) continue;
      ++strong;
      const double est = wd.weight(e.first, e.second);
      if (est != 0.0) {
        ++directed;
        if (std::abs(est - w) <= 0.15) ++recovered;
      }
    }
    lingam_rec += static_cast<double>(recovered) / static_cast<double>(strong);
    lingam_dir += static_cast<double>(directed) / static_cast<double>(strong);
  }
  pc_f1 /= kSeeds;
  ges_f1 /= kSeeds;
  lingam_rec /= kSeeds;
  lingam_dir /= kSeeds;
  return {pc_f1 >= 0.8 && ges_f1 >= 0.8 && lingam_rec >= 0.8,
          "PC F1 " + fmt("%.3f", pc_f1) + ", GES F1 " + fmt("%.3f", ges_f1) + " (need >= 0.8); LiNGAM " +
              fmt("%.3f", lingam_rec) + " of |w|>=0.3 edges directed with weight within 0.15 (need >= 0.8; " +
              fmt("%.3f", lingam_dir) + " directed)"};
}

// ---------------------------------------------------------------- GRaSP consistency

SemSpec random_sem(std::uint64_t seed, std::size_t p) {
  Rng rng(seed);
  SemSpec s;
  for (std::size_t i = 0; i < p; ++i) s.nodes.push_back("X" + std::to_string(i));
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (rng.uniform() < 0.4) {
        const double mag = rng.uniform(0.5, 1.0);
        s.edges.push_back({s.nodes[i], s.nodes[j], rng.uniform() < 0.5 ? -mag : mag});
      }
  for (const auto& n : s.nodes) s.noise[n] = NoiseSpec{NoiseKind::Uniform, -1.0, 1.0};
  s.seed = seed;
  return s;
}

Outcome grasp_consistency() {
  const std::array<double, 5> lambdas{0.0, 2.0, 8.0, 32.0, 128.0};
  std::size_t identical = 0, monotone = 0;
  constexpr std::size_t kData = 20;
  for (std::size_t i = 0; i < kData; ++i) {
    const auto data = generate_synthetic(random_sem(split_seed(default_sem_spec().seed, i), 6), 1000);
    const auto ges = ges_discover(data.latent);
    identical += grasp_discover(data.latent, 0.0) == ges;
    std::size_t prev = SIZE_MAX;
    bool ok = true;
    for (double l : lambdas) {
      const auto edges = grasp_discover(data.latent, l).edge_count();
      ok = ok && edges <= prev;
      prev = edges;
    }
    monotone += ok;
  }
  return {identical == kData && monotone == kData,
          "lambda=0 identical to GES on " + std::to_string(identical) + "/20; monotone sweep on " +
              std::to_string(monotone) + "/20"};
}

// ---------------------------------------------------------------- hypothesis graph

std::set<std::array<std::size_t, 3>> v_structures(const Dag& g) {
  std::set<std::array<std::size_t, 3>> out;
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto pa = g.parents(c);
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t j = i + 1; j < pa.size(); ++j)
        if (!g.adjacent(pa[i], pa[j])) out.insert({std::min(pa[i], pa[j]), c, std::max(pa[i], pa[j])});
  }
  return out;
}

// Reverses two edges so the result stays acyclic but leaves the truth's
// Markov equivalence class.
Dag corrupt(const Dag& truth, Rng& rng) {
  const auto edges = truth.edges();
  const auto vs = v_structures(truth);
  while (true) {
    const auto a = rng.below(edges.size());
    const auto b = rng.below(edges.size());
    if (a == b) continue;
    Dag g = truth;
    g.remove_edge(edges[a].first, edges[a].second);
    g.remove_edge(edges[b].first, edges[b].second);
    if (g.would_create_cycle(edges[a].second, edges[a].first)) continue;
    g.add_edge(edges[a].second, edges[a].first);
    if (g.would_create_cycle(edges[b].second, edges[b].first)) continue;
    g.add_edge(edges[b].second, edges[b].first);
    if (v_structures(g) != vs) return g;
  }
}

Outcome hypothesis_evaluation() {
  const auto base = default_sem_spec();
  constexpr std::size_t kRows = 5000;
  constexpr double kAlpha = 0.05;
  const auto data = generate_synthetic(base, kRows);
  const auto rep = evaluate_hypothesis_graph(data.latent, data.truth, kAlpha, 200, base.seed);
  const bool calibrated = std::abs(rep.markov_violation_fraction - kAlpha) <= 0.03;
  // Informational: the spread of the same statistic over further seeds.
  double spread_lo = 1.0, spread_hi = 0.0, spread_mean = 0.0;
  for (std::uint64_t i = 1; i <= 10; ++i) {
    auto spec = base;
    spec.seed = base.seed + i;
    const double f = violation_fractions(generate_synthetic(spec, kRows).latent, data.truth, kAlpha).first;
    spread_lo = std::min(spread_lo, f);
    spread_hi = std::max(spread_hi, f);
    spread_mean += f / 10.0;
  }

  constexpr int kReps = 50;
  int higher = 0;
  for (int r = 0; r < kReps; ++r) {
    auto spec = base;
    spec.seed = split_seed(base.seed, 1000 + static_cast<std::uint64_t>(r));
    const auto d = generate_synthetic(spec, kRows);
    Rng rng(spec.seed);
    const auto bad = corrupt(d.truth, rng);
    const double f_true = violation_fractions(d.latent, d.truth, kAlpha).first;
    const double f_bad = violation_fractions(d.latent, bad, kAlpha).first;
    higher += f_bad > f_true;
  }
  return {calibrated && higher >= 45,
          "true-DAG Markov violation fraction " + fmt("%.4f", rep.markov_violation_fraction) + " over " +
              std::to_string(rep.markov_tests) + " tests (need 0.05 +/- 0.03, p=" + fmt("%.2f", rep.markov_p) +
              "; seeds +1..+10 mean " + fmt("%.4f", spread_mean) + ", range " + fmt("%.4f", spread_lo) + "-" +
              fmt("%.4f", spread_hi) + "); corrupted DAG higher in " + std::to_string(higher) + "/50 (need >= 45)"};
}

// ---------------------------------------------------------------- solver correctness

struct Problem {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Problem random_problem(std::uint64_t seed, Eigen::Index n, Eigen::Index p) {
  Rng rng(seed);
  Problem pr{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < p; ++j) pr.X(i, j) = rng.normal();
  for (Eigen::Index j = 0; j < p; ++j) {
    auto c = pr.X.col(j);
    const double m = c.mean();
    c.array() -= m;
    c /= std::sqrt(c.squaredNorm() / static_cast<double>(n - 1));
  }
  Eigen::VectorXd beta(p);
  for (Eigen::Index j = 0; j < p; ++j) beta(j) = (j % 3 == 0) ? 0.0 : rng.uniform(-2.0, 2.0);
  for (Eigen::Index i = 0; i < n; ++i) pr.y(i) = pr.X.row(i).dot(beta) + 1.5 + 0.5 * rng.normal();
  return pr;
}

Outcome solver_correctness() {
  constexpr int kProblems = 20;
  double ridge_grad = 0, kkt = 0, en_lasso = 0, en_ridge = 0;
  for (int t = 0; t < kProblems; ++t) {
    const auto pr = random_problem(split_seed(7, static_cast<std::uint64_t>(t)), 60, 8);
    const auto n = static_cast<double>(pr.X.rows());
    const double lam_r = 0.5 + t * 0.25;
    const auto ridge = fit_linear_family(pr.X, pr.y, Penalty::ridge(lam_r));
    auto objective = [&](const Eigen::VectorXd& w, double b) {
      return (pr.y - pr.X * w - Eigen::VectorXd::Constant(pr.y.size(), b)).squaredNorm() + lam_r * w.squaredNorm();
    };
    const double h = 1e-5;
    for (Eigen::Index j = 0; j <= ridge.weights.size(); ++j) {
      Eigen::VectorXd wp = ridge.weights, wm = ridge.weights;
      double bp = ridge.intercept, bm = ridge.intercept;
      if (j < ridge.weights.size()) {
        wp(j) += h;
        wm(j) -= h;
      } else {
        bp += h;
        bm -= h;
      }
      ridge_grad = std::max(ridge_grad, std::abs(objective(wp, bp) - objective(wm, bm)) / (2 * h));
    }

    // Lasso on (1/2n)||r||^2 + lambda ||w||_1; lambda at a fraction of lambda_max.
    const Eigen::VectorXd yc = pr.y.array() - pr.y.mean();
    const double lam_max = (pr.X.transpose() * yc).cwiseAbs().maxCoeff() / n;
    const double lam = lam_max * (0.05 + 0.02 * t);
    const auto lasso = fit_linear_family(pr.X, pr.y, Penalty::lasso(lam));
    const Eigen::VectorXd r = pr.y - lasso.predict(pr.X);
    kkt = std::max(kkt, std::abs(r.mean()));
    for (Eigen::Index j = 0; j < pr.X.cols(); ++j) {
      const double g = -pr.X.col(j).dot(r) / n;
      const double w = lasso.weights(j);
      const double v = w != 0.0 ? std::abs(g + lam * (w > 0 ? 1.0 : -1.0)) : std::max(0.0, std::abs(g) - lam);
      kkt = std::max(kkt, v);
    }

    const auto en1 = fit_linear_family(pr.X, pr.y, Penalty::elastic_net(lam, 1.0));
    en_lasso = std::max({en_lasso, (en1.weights - lasso.weights).cwiseAbs().maxCoeff(),
                         std::abs(en1.intercept - lasso.intercept)});
    const double lam_e = 0.01 + 0.01 * t;
    const auto en0 = fit_linear_family(pr.X, pr.y, Penalty::elastic_net(lam_e, 0.0));
    const auto rr = fit_linear_family(pr.X, pr.y, Penalty::ridge(n * lam_e));
    en_ridge = std::max({en_ridge, (en0.weights - rr.weights).cwiseAbs().maxCoeff(),
                         std::abs(en0.intercept - rr.intercept)});
  }
  return {ridge_grad < 1e-6 && kkt < 1e-6 && en_lasso < 1e-6 && en_ridge < 1e-6,
          "ridge FD gradient inf-norm " + fmt("%.2e", ridge_grad) + ", lasso KKT violation " + fmt("%.2e", kkt) +
              ", EN(mix=1) vs lasso " + fmt("%.2e", en_lasso) + ", EN(mix=0) vs ridge " + fmt("%.2e", en_ridge) +
              " (each < 1e-6, 20 problems)"};
}

// ---------------------------------------------------------------- Shapley axioms

Outcome shapley_axioms() {
  // Exact linear against brute force on 12 features.
  double lin_gap = 0;
  for (int t = 0; t < 10; ++t) {
    Rng rng(split_seed(11, static_cast<std::uint64_t>(t)));
    LinearModel m;
    m.weights.resize(12);
    for (auto& w : m.weights) w = rng.uniform(-2, 2);
    m.intercept = rng.normal();
    Eigen::VectorXd x(12), mu(12);
    for (int j = 0; j < 12; ++j) {
      x(j) = rng.normal();
      mu(j) = rng.normal();
    }
    const auto exact = shapley_exact_linear(m, x, mu);
    const auto bf = shapley_brute_force([&m](const Eigen::VectorXd& z) { return m.predict_one(z); }, x, mu);
    lin_gap = std::max(lin_gap, (exact.phi - bf.phi).cwiseAbs().maxCoeff());
  }

  // Random nonlinear models: feature 5 is ignored, features 0 and 1 are exchangeable.
  double eff = 0, dummy = 0, sym = 0;
  for (int t = 0; t < 100; ++t) {
    Rng rng(split_seed(13, static_cast<std::uint64_t>(t)));
    constexpr int p = 6;
    Eigen::VectorXd a(p), d(p);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) {
      a(j) = rng.uniform(-1, 1);
      d(j) = rng.uniform(-1, 1);
      for (int k = j + 1; k < p; ++k) b(j, k) = rng.uniform(-1, 1);
    }
    a(1) = a(0);
    d(1) = d(0);
    for (int k = 2; k < p; ++k) b(1, k) = b(0, k);
    a(5) = d(5) = 0;
    b.col(5).setZero();
    const double c = rng.uniform(-2, 2);
    const ModelFn f = [=](const Eigen::VectorXd& z) {
      double s = a.dot(z) + c * std::tanh(d.dot(z));
      for (int j = 0; j < p; ++j)
        for (int k = j + 1; k < p; ++k) s += b(j, k) * z(j) * z(k);
      return s;
    };
    Eigen::VectorXd x(p), mu(p);
    for (int j = 0; j < p; ++j) {
      x(j) = rng.normal();
      mu(j) = rng.normal();
    }
    x(1) = x(0);
    mu(1) = mu(0);
    const auto bf = shapley_brute_force(f, x, mu);
    eff = std::max(eff, std::abs(bf.base_value + bf.phi.sum() - f(x)));
    dummy = std::max(dummy, std::abs(bf.phi(5)));
    sym = std::max(sym, std::abs(bf.phi(0) - bf.phi(1)));
  }

  // Sampled estimator on an 8-feature forest.
  Rng rng(17);
  Eigen::MatrixXd X(400, 8);
  Eigen::VectorXd y(400);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) X(i, j) = rng.normal();
    y(i) = 2 * X(i, 0) + (X(i, 1) > 0 ? 1.5 : -0.5) + X(i, 2) * X(i, 3) + 0.3 * rng.normal();
  }
  ForestConfig fc;
  fc.n_trees = 50;
  const auto forest = fit_forest(X, y, TreeTask::Regression, fc, 5);
  const ModelFn ff = [&forest](const Eigen::VectorXd& z) { return forest.predict_one(z); };
  const Eigen::VectorXd mu = X.colwise().mean().transpose();
  std::size_t within = 0;
  for (Eigen::Index r = 0; r < 5; ++r) {
    const Eigen::VectorXd x = X.row(r).transpose();
    const auto bf = shapley_brute_force(ff, x, mu);
    const auto smp = shapley_sampled(ff, x, mu, 2000, 23 + static_cast<std::uint64_t>(r));
    bool ok = true;
    for (Eigen::Index j = 0; j < 8; ++j) ok = ok && std::abs(smp.phi(j) - bf.phi(j)) <= 3 * smp.standard_error(j) + 1e-12;
    within += ok;
  }
  return {lin_gap <= 1e-10 && eff <= 1e-10 && dummy <= 1e-10 && sym <= 1e-10 && within == 5,
          "exact-linear vs brute force " + fmt("%.1e", lin_gap) + "; over 100 models efficiency " + fmt("%.1e", eff) +
              ", dummy " + fmt("%.1e", dummy) + ", symmetry " + fmt("%.1e", sym) +
              " (each <= 1e-10); sampled within 3 SE on " + std::to_string(within) + "/5 forest rows"};
}

// ---------------------------------------------------------------- LIME fidelity

Outcome lime_fidelity() {
  constexpr int kSeeds = 20;
  constexpr int p = 8;
  int sign_ok = 0, fid_ok = 0;
  double min_fid = 1.0;
  for (int s = 0; s < kSeeds; ++s) {
    Rng rng(split_seed(19, static_cast<std::uint64_t>(s)));
    LinearModel m;
    m.weights.resize(p);
    for (auto& w : m.weights) w = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.5, 2.0);
    m.intercept = rng.normal();
    FeatureSpace space;
    Eigen::VectorXd x(p);
    for (int j = 0; j < p; ++j) {
      FeatureDomain d;
      d.name = "f" + std::to_string(j);
      if (j >= 6) {
        d.categorical = true;
        d.values = {0.0, 1.0, 2.0};
        x(j) = static_cast<double>(rng.below(3));
      } else {
        d.sd = rng.uniform(0.5, 2.0);
        x(j) = rng.normal();
      }
      space.push_back(d);
    }
    LimeConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(s);
    const auto e = lime_explain([&m](const Eigen::VectorXd& z) { return m.predict_one(z); }, x, space, cfg);
    bool ok = !e.feature_rules.empty();
    for (const auto& r : e.feature_rules) ok = ok && (r.weight > 0) == (m.weights(static_cast<Eigen::Index>(r.index)) > 0);
    sign_ok += ok;
    fid_ok += e.local_fidelity_r2 > 0.9;
    min_fid = std::min(min_fid, e.local_fidelity_r2);
  }
  return {sign_ok == kSeeds && fid_ok == kSeeds,
          "sign-correct on " + std::to_string(sign_ok) + "/20 seeds; fidelity R2 > 0.9 on " + std::to_string(fid_ok) +
              "/20 (min " + fmt("%.4f", min_fid) + ")"};
}

// ---------------------------------------------------------------- metrics identities

Outcome metrics_identities() {
  double rmse_gap = 0, r2_mean = 0;
  Rng rng(29);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd a(50), b(50);
    for (int i = 0; i < 50; ++i) {
      a(i) = rng.normal();
      b(i) = rng.normal();
    }
    const auto m = regression_metrics(a, b);
    rmse_gap = std::max(rmse_gap, std::abs(m.rmse * m.rmse - m.mse));
    const Eigen::VectorXd mean_pred = Eigen::VectorXd::Constant(50, a.mean());
    r2_mean = std::max(r2_mean, std::abs(regression_metrics(a, mean_pred).r2));
  }
  Eigen::VectorXd labels(8);
  labels << 0, 1, 2, 3, 3, 2, 1, 0;
  const auto perfect = classification_metrics(labels, labels, 4);
  const bool perfect_ok = perfect.accuracy == 1.0 && perfect.f1_macro == 1.0 && perfect.f1_weighted == 1.0;

  // Hand-worked: per-class F1 = 1/2, 4/5, 2/3.
  Eigen::VectorXd yt(6), yp(6);
  yt << 0, 0, 1, 1, 2, 2;
  yp << 0, 1, 1, 1, 2, 0;
  const auto h = classification_metrics(yt, yp, 3);
  const std::vector<std::vector<std::size_t>> cm{{1, 1, 0}, {0, 2, 0}, {1, 0, 1}};
  const double macro = (0.5 + 0.8 + 2.0 / 3.0) / 3.0;
  const bool fixture_ok = h.confusion == cm && std::abs(h.accuracy - 4.0 / 6.0) < 1e-12 &&
                          std::abs(h.f1_macro - macro) < 1e-12 && std::abs(h.f1_weighted - macro) < 1e-12;

  // All-one-class prediction on balanced two-class data.
  Eigen::VectorXd bt(4), bp = Eigen::VectorXd::Zero(4);
  bt << 0, 0, 1, 1;
  const auto one = classification_metrics(bt, bp, 2);
  const bool one_ok = std::abs(one.accuracy - 0.5) < 1e-12 && std::abs(one.f1_macro - 1.0 / 3.0) < 1e-12;

  return {rmse_gap <= 1e-12 && r2_mean <= 1e-12 && perfect_ok && fixture_ok && one_ok,
          "max |rmse^2 - mse| " + fmt("%.1e", rmse_gap) + ", max |R2(mean)| " + fmt("%.1e", r2_mean) +
              ", perfect classifier " + (perfect_ok ? "ok" : "wrong") + ", 3-class fixture " +
              (fixture_ok ? "ok" : "wrong") + ", one-class fixture " + (one_ok ? "ok" : "wrong")};
}

// ---------------------------------------------------------------- pipeline reproduction

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CGPA_CLI_PATH) + " " + args + " >>" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

Outcome pipeline_reproduction() {
  const auto dir = scratch_dir("pipeline");
  const auto log = dir / "cli.log";
  const auto d = dir.string();
  std::vector<std::string> steps{
      "generate --n 2000 --out " + d + "/gen",
      "train --data " + d + "/gen/data.csv --model linear --out " + d + "/linear",
      "train --data " + d + "/gen/data.csv --model ridge --out " + d + "/ridge",
      "train --data " + d + "/gen/data.csv --model forest --target band --out " + d + "/forest",
      "train --data " + d + "/gen/data.csv --model logistic --target band --out " + d + "/logistic",
      "evaluate --artifact " + d + "/linear/model.json --artifact " + d + "/ridge/model.json --artifact " + d +
          "/forest/model.json --artifact " + d + "/logistic/model.json --out " + d + "/eval"};
  for (const auto& s : steps)
    if (run(s, log) != 0) return {false, "command failed: cgpa " + s + " (see " + log.string() + ")"};

  std::ifstream tin(dir / "eval" / "tables.txt");
  const std::string tables((std::istreambuf_iterator<char>(tin)), std::istreambuf_iterator<char>());
  const bool has_tables = tables.find("Regression") != std::string::npos &&
                          tables.find("Band classification") != std::string::npos;
  std::map<std::string, json> by_model;
  const auto eval = read_json(dir / "eval" / "metrics.json");
  for (const auto& m : eval.at("models")) by_model[m.at("model").get<std::string>()] = m;
  const double mae_ols = by_model.at("linear").at("test").at("mae");
  const double mae_ridge = by_model.at("ridge").at("test").at("mae");
  const double acc_rf = by_model.at("forest").at("test").at("accuracy");
  const double acc_lr = by_model.at("logistic").at("test").at("accuracy");
  const double rel = std::abs(mae_ridge - mae_ols) / mae_ols;
  const double gap = acc_rf - acc_lr;
  fs::remove_all(dir);
  return {has_tables && rel <= 0.10 && gap >= 0.10,
          std::string("tables ") + (has_tables ? "emitted" : "missing") + "; ridge MAE " + fmt("%.4f", mae_ridge) +
              " vs OLS " + fmt("%.4f", mae_ols) + " (" + fmt("%.2f", 100 * rel) + "% apart, need <= 10%); forest " +
              fmt("%.2f", 100 * acc_rf) + "% vs logistic " + fmt("%.2f", 100 * acc_lr) + "% (gap " +
              fmt("%.2f", 100 * gap) + " pp, need >= 10)"};
}

// ---------------------------------------------------------------- service contract

double artifact_cgpa(const fs::path& artifact_file, const StudentRecord& r) {
  const auto a = load_artifact(artifact_file);
  const double unit = a.predict_encoded(a.encode(r, default_schema()));
  return std::clamp(a.target_scaling.invert(std::clamp(unit, 0.0, 1.0)), 0.0, 4.0);
}

json input_of(const StudentRecord& r) {
  auto j = to_json(r);
  j.erase(std::string(FactorSchema::kTarget));
  return j;
}

Outcome service_contract() {
  const auto dir = scratch_dir("service");
  ServiceConfig cfg;
  cfg.store_path = (dir / "store.db").string();
  cfg.artifact_dir = (dir / "artifacts").string();
  cfg.secret = "acceptance-secret";
  cfg.admin_emails = {"admin@example.org"};
  cfg.threads = 4;
  std::ostringstream http_log;
  PredictionService svc(cfg);
  HttpServer server(svc, &http_log);
  const int port = server.bind_any("127.0.0.1");
  if (port <= 0) return {false, "could not bind an ephemeral port"};
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  std::vector<std::string> problems;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
    return ok;
  };
  httplib::Client cli("127.0.0.1", port);
  auto post = [&](const std::string& path, const json& body, const std::string& token = {}) {
    httplib::Headers h;
    if (!token.empty()) h.emplace("Authorization", "Bearer " + token);
    auto res = cli.Post(path, h, body.dump(), "application/json");
    return std::make_pair(res ? res->status : -1, res ? json::parse(res->body, nullptr, false) : json());
  };

  const auto people = generate_synthetic(default_sem_spec(), 200, &svc.schema()).records;
  auto [rs, rb] = post("/api/register", {{"email", "student@example.org"}, {"credential", "correct horse 42"}});
  expect(rs == 201, "register status " + std::to_string(rs));
  auto [ls, lb] = post("/api/login", {{"email", "student@example.org"}, {"credential", "correct horse 42"}});
  expect(ls == 200 && lb.contains("token"), "login status " + std::to_string(ls));
  const std::string token = lb.value("token", "");
  auto [ps, pb] = post("/api/predict", input_of(people[0]), token);
  expect(ps == 200, "predict status " + std::to_string(ps));
  const auto pid = pb.value("prediction_id", std::int64_t{0});
  auto [fs_, fb] = post("/api/feedback", {{"prediction_id", pid}, {"rating", 4}, {"actual_cgpa", 3.1}}, token);
  expect(fs_ == 201, "feedback status " + std::to_string(fs_));

  // Re-verify the stored prediction against the artifact file on disk.
  const auto stored = svc.store().get_prediction(pid);
  double verify_gap = 1.0;
  if (expect(stored.has_value(), "stored prediction missing")) {
    const double from_artifact = artifact_cgpa(fs::path(cfg.artifact_dir) / "model_v1.json", people[0]);
    verify_gap = std::max(std::abs(stored->predicted_cgpa - from_artifact),
                          std::abs(pb.value("predicted_cgpa", -1.0) - from_artifact));
    expect(verify_gap <= 1e-9, "stored prediction differs from artifact by " + fmt("%.2e", verify_gap));
  }

  // A second version trained with labelled feedback, so the versions disagree.
  for (std::size_t i = 1; i < 80; ++i) {
    auto [s, b] = post("/api/predict", input_of(people[i]), token);
    post("/api/feedback", {{"prediction_id", b.value("prediction_id", 0)}, {"rating", 2}, {"actual_cgpa", 0.8}},
         token);
  }
  post("/api/register", {{"email", "admin@example.org"}, {"credential", "admin credential 7"}});
  const std::string admin =
      post("/api/login", {{"email", "admin@example.org"}, {"credential", "admin credential 7"}}).second.value("token", "");
  auto [ts, tb] = post("/api/admin/retrain", json::object(), admin);
  expect(ts == 201 && tb.value("version", 0) == 2, "retrain status " + std::to_string(ts));

  const auto& probe = people[150];
  const std::map<int, double> expected{
      {1, artifact_cgpa(fs::path(cfg.artifact_dir) / "model_v1.json", probe)},
      {2, artifact_cgpa(fs::path(cfg.artifact_dir) / "model_v2.json", probe)}};
  expect(std::abs(expected.at(1) - expected.at(2)) > 1e-6, "versions 1 and 2 predict the same CGPA");

  // Soak: one thread flips the active version while clients predict.
  std::atomic<bool> done{false};
  std::atomic<int> flips{0};
  std::thread flipper([&] {
    httplib::Client c("127.0.0.1", port);
    httplib::Headers h{{"Authorization", "Bearer " + admin}};
    int v = 2;
    while (!done) {
      c.Post("/api/admin/activate", h, json{{"version", v}}.dump(), "application/json");
      v = 3 - v;
      ++flips;
    }
  });
  std::atomic<int> mixed{0}, failed{0}, total{0};
  std::array<std::atomic<int>, 3> seen{};
  std::vector<std::thread> clients;
  for (int t = 0; t < 3; ++t)
    clients.emplace_back([&] {
      httplib::Client c("127.0.0.1", port);
      httplib::Headers h{{"Authorization", "Bearer " + token}};
      const auto body = input_of(probe).dump();
      for (int i = 0; i < 40; ++i) {
        auto res = c.Post("/api/predict", h, body, "application/json");
        ++total;
        if (!res || res->status != 200) {
          ++failed;
          continue;
        }
        const auto j = json::parse(res->body);
        const int v = j.at("model_version");
        ++seen[static_cast<std::size_t>(v)];
        const double cg = j.at("predicted_cgpa");
        const double attr_pred = j.at("attribution").at("prediction");
        const double unit = j.at("unit_prediction");
        if (std::abs(cg - expected.at(v)) > 1e-9 || std::abs(attr_pred - unit) > 1e-12) ++mixed;
      }
    });
  for (auto& c : clients) c.join();
  done = true;
  flipper.join();
  expect(mixed == 0 && failed == 0, std::to_string(mixed.load()) + " mixed and " + std::to_string(failed.load()) +
                                        " failed responses of " + std::to_string(total.load()));
  expect(seen[1] > 0 && seen[2] > 0, "soak did not observe both versions");

  auto schema = cli.Get("/api/schema");
  expect(schema && schema->status == 200, "GET /api/schema failed");
  server.stop();
  serving.join();
  fs::remove_all(dir);

  std::string detail = "round trip ok; stored vs artifact " + fmt("%.1e", verify_gap) + "; soak " +
                       std::to_string(total.load()) + " predictions across " + std::to_string(flips.load()) +
                       " activations (v1 " + std::to_string(seen[1].load()) + ", v2 " + std::to_string(seen[2].load()) +
                       "), mixed " + std::to_string(mixed.load());
  if (!problems.empty()) {
    detail = "";
    for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
  }
  return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    double limit_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> all{
      {"causal-recovery", 120, causal_recovery},
      {"grasp-consistency", 60, grasp_consistency},
      {"hypothesis-graph-evaluation", 180, hypothesis_evaluation},
      {"solver-correctness", 30, solver_correctness},
      {"shapley-axioms", 120, shapley_axioms},
      {"lime-fidelity", 60, lime_fidelity},
      {"metrics-identities", 30, metrics_identities},
      {"pipeline-reproduction", 180, pipeline_reproduction},
      {"service-contract", 60, service_contract},
  };
  const std::string only = argc > 1 ? argv[1] : "";
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && c.name != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.limit_s;
    failures += !pass;
    std::printf("%s %s: %s [%.1f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs,
                c.limit_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
