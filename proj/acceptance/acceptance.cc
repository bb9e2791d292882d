// Copyright 2026 The Clipbound Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// check fails. Usage: clipbound_acceptance [output_dir]
//
// Artifacts (toy histories, per-method sweeps and aggregates) are written
// under output_dir for the plotting scripts.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "json.hpp"

#include "clipbound/clipping.h"
#include "clipbound/commands.h"
#include "clipbound/config.h"
#include "clipbound/hpo.h"
#include "clipbound/models.h"
#include "clipbound/privacy.h"
#include "clipbound/trainer.h"
#include "oracles.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace clipbound;

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Check {
  bool ok = true;
  std::ostringstream detail;
  std::string failed;

  void Require(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    failed += " [failed: " + what + "]";
  }
};

int failures = 0;

void Report(const std::string& name, Check& c, double seconds) {
  if (!c.ok) ++failures;
  std::printf("%s  %-22s %.1fs %s\n", c.ok ? "PASS" : "FAIL", name.c_str(),
              seconds, (c.detail.str() + c.failed).c_str());
  std::fflush(stdout);
}

std::string Fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every regular file under `a` has a byte-identical twin under `b`.
bool SameTree(const fs::path& a, const fs::path& b, int* files) {
  *files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (!fs::exists(b / rel) || Slurp(e.path()) != Slurp(b / rel)) return false;
    ++*files;
  }
  return *files > 0;
}

json ToyConfigJson() {
  return json::parse(R"({
    "dataset": {"kind": "bimodal", "n": 10000, "p_major": 0.6, "jitter_std": 0.0},
    "model": {"kind": "mean"},
    "training": {"steps": 5000, "sampling_rate": 1.0, "learning_rate": 0.002,
                 "target_quantile": 0.5, "threshold_multiplier": 1.0,
                 "bound_learning_rate": 0.2, "noiseless": true},
    "toy": {"constant_bound": 1.0, "lower_bound": 0.1, "initial_bound": 1.0},
    "seeds": [1]
  })");
}

void ToyCollapse(const fs::path& out) {
  const auto start = Clock::now();
  RunConfig config = ParseRunConfig(ToyConfigJson());
  config.output_dir = (out / "toy").string();
  const ToySummary s = CmdToy(config);
  const double secs = Seconds(start);
  Check c;
  for (const auto& m : s.modes) {
    const double mu = m.final_estimate, ct = m.final_clip_bound;
    c.detail << ToString(m.strategy) << ": mu=" << Fmt(mu) << " C_T=" << Fmt(ct)
             << "; ";
    switch (m.strategy) {
      case ClippingStrategy::kUnbounded:
        c.Require(std::abs(mu) <= 0.05, "unbounded |mu| <= 0.05");
        c.Require(ct <= 1e-3, "unbounded C_T <= 1e-3");
        break;
      case ClippingStrategy::kBounded:
        c.Require(std::abs(mu - 0.4) <= 0.05, "bounded |mu - 0.4| <= 0.05");
        break;
      case ClippingStrategy::kConstant:
        c.Require(std::abs(mu - 0.4) <= 0.01, "constant |mu - 0.4| <= 0.01");
        break;
    }
  }
  c.Require(secs < 10.0, "runtime < 10 s");
  Report("toy-collapse", c, secs);
}

void AccountantOracle() {
  const auto start = Clock::now();
  Check c;
  const double eps =
      Epsilon({.sampling_rate = 1.0, .steps = 1, .sigma_grad = 1.0,
               .delta = 1e-5})
          .epsilon;
  const double closed = oracle::GaussianEpsilonClosedForm(1.0, 1e-5);
  const double rel_eps = std::abs(eps - closed) / closed;
  c.detail << "eps=" << Fmt(eps) << " closed=" << Fmt(closed)
           << " rel=" << Fmt(rel_eps) << "; ";
  c.Require(rel_eps <= 0.05, "within 5% of closed form");
  const double lib = SubsampledGaussianRdp(0.01, 1.0, 2);
  const double quad = oracle::SubsampledGaussianRdpQuadrature(0.01, 1.0, 2.0);
  const double rel_rdp = std::abs(lib - quad) / quad;
  c.detail << "rdp=" << Fmt(lib) << " quad=" << Fmt(quad)
           << " rel=" << Fmt(rel_rdp);
  c.Require(rel_rdp <= 1e-4, "rdp within 1e-4 of quadrature");
  const double secs = Seconds(start);
  c.Require(secs < 1.0, "runtime < 1 s");
  Report("accountant-oracle", c, secs);
}

void TwoQueryLedger() {
  const auto start = Clock::now();
  Check c;
  int cells = 0, identical = 0;
  for (double q : {0.01, 0.1, 1.0}) {
    for (Index t : {Index{1}, Index{100}, Index{10000}}) {
      for (double s : {0.5, 1.0, 4.0}) {
        const EpsilonResult both =
            Epsilon({.sampling_rate = q, .steps = t, .sigma_grad = s,
                     .sigma_count = 10.0 * s});
        const EpsilonResult single = Epsilon(
            {.sampling_rate = q, .steps = t, .sigma_grad = s / std::sqrt(1.01)});
        ++cells;
        if (both.epsilon == single.epsilon && both.order == single.order) {
          ++identical;
        } else {
          c.detail << "(q=" << q << ",T=" << t << ",s=" << s
                   << ": " << Fmt(both.epsilon) << " vs "
                   << Fmt(single.epsilon) << ") ";
        }
      }
    }
  }
  c.detail << identical << "/" << cells << " bit-identical";
  c.Require(identical == cells, "all cells bit-identical");
  Report("two-query-ledger", c, Seconds(start));
}

void Sensitivity() {
  const auto start = Clock::now();
  Check c;
  Rng rng(2024);

  // Clipped norms over a wide range of scales and bounds.
  double worst_norm = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Index dim = 1 + static_cast<Index>(rng.UniformInt(64));
    const Vector g = GaussianVector(dim, std::exp(rng.Normal(0.0, 4.0)), rng);
    const double bound = std::exp(rng.Normal(0.0, 4.0));
    worst_norm = std::max(worst_norm, ClipNormalize(g, bound).norm());
  }
  c.detail << "max clipped norm=" << Fmt(worst_norm) << "; ";
  c.Require(worst_norm <= 1.0 + 1e-12, "clipped norms <= 1");

  // Add/remove one sample: the count moves by at most one and the clipped
  // sum by at most one in norm, through the training code path.
  const ModelSpec spec{.kind = ModelKind::kMlp, .input_dim = 8,
                       .num_classes = 3, .hidden = 16};
  Rng init(7);
  ModelState state = InitParams(spec, init);
  Index max_count_change = 0;
  double max_sum_change = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.UniformInt(50));
    Matrix x(n, spec.input_dim);
    for (Index i = 0; i < n; ++i) {
      x.row(i) = GaussianVector(spec.input_dim, std::exp(rng.Normal(0, 2)), rng);
    }
    std::vector<int> y(n);
    for (auto& v : y) v = static_cast<int>(rng.UniformInt(3));
    const Index drop = static_cast<Index>(rng.UniformInt(n));
    std::vector<Index> keep;
    for (Index i = 0; i < n; ++i) if (i != drop) keep.push_back(i);
    Matrix x2(n - 1, spec.input_dim);
    std::vector<int> y2;
    for (Index i = 0; i < n - 1; ++i) {
      x2.row(i) = x.row(keep[i]);
      y2.push_back(y[keep[i]]);
    }
    AccessCounts counts;
    const SensitiveBatch full(
        PerSampleLossGrads(state, x, y, GradLayout::kFactored), &counts);
    const SensitiveBatch less(
        PerSampleLossGrads(state, x2, y2, GradLayout::kFactored), &counts);
    const double bound = std::exp(rng.Normal(0.0, 2.0));
    max_count_change = std::max(
        max_count_change,
        std::abs(full.CountExceeding(2.5, bound) - less.CountExceeding(2.5, bound)));
    max_sum_change = std::max(
        max_sum_change, (full.ClippedSum(bound) - less.ClippedSum(bound)).norm());
  }
  c.detail << "count change=" << max_count_change
           << " sum change=" << Fmt(max_sum_change) << "; ";
  c.Require(max_count_change <= 1, "count changes by <= 1");
  c.Require(max_sum_change <= 1.0 + 1e-12, "clipped sum changes by <= 1");

  // Noise-free bound updates against static norms.
  std::vector<double> norms(1000);
  for (auto& v : norms) v = std::exp(rng.Normal(1.0, 1.5));
  // Start two orders of magnitude below the target quantile.
  ClippingState state_c(ClippingConfig::Unbounded(1e-2));
  const ClippingConfig& cfg = state_c.config();
  const double n = static_cast<double>(norms.size());
  Index first_hit = -1;
  double last_gap = 1.0;
  for (Index t = 0; t < 500; ++t) {
    const double frac =
        static_cast<double>(CountExceeding(norms, cfg.threshold_multiplier,
                                           state_c.bound())) / n;
    last_gap = std::abs(frac - cfg.target_quantile);
    if (last_gap <= 0.02 && first_hit < 0) first_hit = t;
    state_c.UpdateBound(frac, t);
  }
  c.detail << "fraction within 0.02 of gamma from update " << first_hit
           << ", final gap " << Fmt(last_gap);
  c.Require(first_hit >= 0 && last_gap <= 0.02,
            "exceeding fraction converges to gamma");
  Report("sensitivity", c, Seconds(start));
}

void GradientChecks() {
  const auto start = Clock::now();
  Check c;
  Rng rng(99);
  for (ModelKind kind : {ModelKind::kMean, ModelKind::kLogistic,
                         ModelKind::kSoftmax, ModelKind::kMlp}) {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      ModelSpec spec{.kind = kind};
      if (kind != ModelKind::kMean) {
        spec.input_dim = 2 + static_cast<Index>(rng.UniformInt(6));
        spec.num_classes =
            kind == ModelKind::kLogistic ? 2 : 2 + static_cast<int>(rng.UniformInt(4));
        if (kind == ModelKind::kMlp) spec.hidden = 2 + static_cast<Index>(rng.UniformInt(8));
      }
      ModelState s = InitParams(spec, rng);
      s.params += GaussianVector(s.params.size(), 0.5, rng);
      Matrix x(1, spec.input_dim);
      x.row(0) = GaussianVector(spec.input_dim, 1.0, rng);
      const int y = static_cast<int>(rng.UniformInt(spec.num_classes));
      const std::vector<int> labels = {y};
      const Vector an = PerSampleLossGrads(s, x, labels).grads.row(0).transpose();
      const Vector fd = oracle::FiniteDifferenceGrad(s, x, y);
      worst = std::max(worst, (an - fd).norm() / std::max(fd.norm(), 1e-12));
    }
    c.detail << ToString(kind) << "=" << Fmt(worst) << " ";
    c.Require(worst < 1e-5, ToString(kind) + " rel error < 1e-5");
  }
  Report("gradient-check", c, Seconds(start));
}

// --- Skewed-data comparison of the three clipping strategies. -------------

json FairnessConfigJson(ClippingStrategy strategy, double lr, double clip,
                        const std::vector<std::uint64_t>& seeds) {
  json j = json::parse(R"({
    "dataset": {"kind": "skewed_synthetic", "data_seed": 0,
                "n_per_class": 6000, "test_per_class": 500, "num_classes": 10,
                "dim": 20, "cluster_separation": 4.0, "minority_class": 8,
                "keep_fraction": 0.1, "validation_fraction": 0.1},
    "model": {"kind": "mlp", "hidden": 64},
    "training": {"epochs": 50, "batch_size": 12000,
                 "target_quantile": 0.5, "threshold_multiplier": 2.5,
                 "bound_learning_rate": 0.2, "record_norm_quantiles": false},
    "privacy": {"target_epsilon": 2.0, "delta": 1e-5, "count_ratio": 10}
  })");
  j["training"]["strategy"] = ToString(strategy);
  j["training"]["learning_rate"] = lr;
  j["training"]["clip_param"] = clip;
  j["seeds"] = seeds;
  return j;
}

struct MethodResult {
  ClippingStrategy strategy;
  double lr = 0.0, clip = 0.0;
  double worst = 0.0, macro = 0.0;
};

void DirectionalFairness(const fs::path& out) {
  const auto start = Clock::now();
  const std::vector<double> lrs = {1.0, 2.1544, 4.6416, 10.0};
  const std::vector<double> clips = {0.0098, 0.0952, 0.9285, 9.0579};
  const std::vector<std::uint64_t> tune_seeds = {101, 102};
  const std::vector<std::uint64_t> eval_seeds = {1, 2, 3, 4, 5};

  const RunConfig data_config = ParseRunConfig(
      FairnessConfigJson(ClippingStrategy::kBounded, 1.0, 0.1, eval_seeds));
  const DataSplits data = LoadData(data_config.dataset);

  std::vector<MethodResult> results;
  json summary;
  for (ClippingStrategy strategy :
       {ClippingStrategy::kBounded, ClippingStrategy::kUnbounded,
        ClippingStrategy::kConstant}) {
    const fs::path dir = out / "fairness" / ToString(strategy);
    fs::create_directories(dir);
    std::ofstream sweep(dir / "sweep.csv");
    sweep << kSweepHeader << '\n';
    Index trial = 0;
    double best = -std::numeric_limits<double>::infinity();
    MethodResult r{.strategy = strategy};
    for (double lr : lrs) {
      for (double clip : clips) {
        const RunConfig cfg =
            ParseRunConfig(FairnessConfigJson(strategy, lr, clip, tune_seeds));
        double objective = 0.0;
        bool ok = true;
        for (std::uint64_t seed : tune_seeds) {
          RunPlan plan = DefaultPlan(cfg, seed);
          try {
            const SeedOutcome o =
                RunPlanOnce(cfg, plan, data.train, *data.validation);
            objective += o.eval.macro_acc / tune_seeds.size();
            sweep << trial << ',' << FormatDouble(lr) << ','
                  << FormatDouble(clip) << ',' << *cfg.training.batch_size
                  << ',' << seed << ',' << FormatDouble(o.eval.macro_acc)
                  << ',' << FormatDouble(o.eval.macro_acc) << ','
                  << FormatDouble(o.eval.worst_acc) << ','
                  << FormatDouble(o.run.epsilon ? o.run.epsilon->epsilon : 0.0)
                  << '\n';
          } catch (const TrainingDiverged&) {
            ok = false;
            sweep << trial << ',' << FormatDouble(lr) << ','
                  << FormatDouble(clip) << ',' << *cfg.training.batch_size
                  << ',' << seed << ",,,,\n";
          }
          ++trial;
        }
        if (ok && objective > best) {
          best = objective;
          r.lr = lr;
          r.clip = clip;
        }
      }
    }
    RunConfig final_cfg =
        ParseRunConfig(FairnessConfigJson(strategy, r.lr, r.clip, eval_seeds));
    final_cfg.output_dir = dir.string();
    const json agg = CmdTrain(final_cfg);
    r.worst = agg["metrics"]["worst_acc"]["mean"].get<double>();
    r.macro = agg["metrics"]["macro_acc"]["mean"].get<double>();
    results.push_back(r);
    summary[ToString(strategy)] = {{"learning_rate", r.lr},
                                   {"clip_param", r.clip},
                                   {"validation_macro_acc", best},
                                   {"test", agg["metrics"]}};
  }
  WriteJson(out / "fairness" / "summary.json", summary);
  const double secs = Seconds(start);

  const MethodResult& b = results[0];
  const MethodResult& u = results[1];
  const MethodResult& k = results[2];
  Check c;
  for (const auto& r : results) {
    c.detail << ToString(r.strategy) << "(lr=" << Fmt(r.lr)
             << ",clip=" << Fmt(r.clip) << "): worst=" << Fmt(r.worst)
             << " macro=" << Fmt(r.macro) << "; ";
  }
  c.Require(b.worst >= u.worst + 0.05, "bounded worst >= unbounded + 5 points");
  c.Require(b.worst >= k.worst - 0.01, "bounded worst >= constant - 1 point");
  c.Require(b.macro >= k.macro - 0.02, "bounded macro >= constant - 2 points");
  c.Require(secs < 1800.0, "runtime < 30 min");
  Report("directional-fairness", c, secs);
}

void TnbCorrectness() {
  const auto start = Clock::now();
  Check c;
  struct Case { double eta, gamma; };
  Rng rng(31);
  for (const Case& p : {Case{1, 0.1}, Case{1, 0.5}, Case{0, 0.5}}) {
    const TruncatedNegativeBinomial tnb(p.eta, p.gamma);
    double sum = 0.0;
    for (Index k = 1; k <= tnb.support_size(); ++k) sum += tnb.Pmf(k);
    bool geometric = true;
    if (p.eta == 1.0) {
      for (Index k = 1; k <= tnb.support_size(); ++k) {
        geometric &= tnb.Pmf(k) ==
                     p.gamma * std::pow(1.0 - p.gamma, static_cast<double>(k - 1));
      }
    }
    const int draws = 100000;
    std::vector<double> observed(tnb.support_size(), 0.0);
    std::vector<double> expected(tnb.support_size(), 0.0);
    for (int i = 0; i < draws; ++i) observed[tnb.Sample(rng) - 1] += 1.0;
    for (Index k = 1; k <= tnb.support_size(); ++k) {
      expected[k - 1] = draws * tnb.Pmf(k) / tnb.truncated_mass();
    }
    const double pval = oracle::ChiSquarePValue(observed, expected);
    const std::string tag = "(" + Fmt(p.eta) + "," + Fmt(p.gamma) + ")";
    c.detail << tag << ": |sum-1|=" << Fmt(std::abs(sum - 1.0))
             << " p=" << Fmt(pval) << "; ";
    c.Require(std::abs(sum - 1.0) <= 1e-9, tag + " pmf sums to 1");
    c.Require(geometric, tag + " geometric pmf");
    c.Require(pval > 0.01, tag + " goodness of fit");
  }
  Report("tnb", c, Seconds(start));
}

void DphpoAccounting() {
  const auto start = Clock::now();
  Check c;
  const Index g = LearningRateClipGrid().Size();
  // One run of the skewed-data protocol at epsilon = 2.
  const double q = 12000.0 / 49140.0;
  const double sigma = CalibrateSigma(2.0, 1e-5, q, 250, 10.0);
  const MechanismParams run{.sampling_rate = q, .steps = 250,
                            .sigma_grad = sigma, .sigma_count = 10.0 * sigma};
  const double one_run = Epsilon(run).epsilon;
  const double g1 = DphpoTotalEpsilon(run, 1, ChargePolicy::kGridComposition);
  const double g200 = DphpoTotalEpsilon(run, g, ChargePolicy::kGridComposition);
  c.detail << "G=" << g << " per-run=" << Fmt(one_run) << " total(G=1)="
           << Fmt(g1) << " total(G=" << g << ")=" << Fmt(g200);
  c.Require(g == 200, "lr/clip grid has G = 200");
  c.Require(g1 == one_run, "total(G=1) equals per-run epsilon");
  c.Require(g200 > g1, "total(G=200) > total(G=1)");
  Report("dphpo-accounting", c, Seconds(start));
}

void Determinism(const fs::path& out) {
  const auto start = Clock::now();
  Check c;
  int toy_files = 0, train_files = 0;
  for (const char* run : {"a", "b"}) {
    RunConfig toy = ParseRunConfig(ToyConfigJson());
    toy.output_dir = (out / "determinism" / run / "toy").string();
    CmdToy(toy);
    json j = FairnessConfigJson(ClippingStrategy::kBounded, 2.1544, 0.0952,
                                {1, 2});
    j["dataset"]["n_per_class"] = 500;
    j["training"]["batch_size"] = 1000;
    j["training"]["epochs"] = 5;
    j["training"]["record_norm_quantiles"] = true;
    RunConfig train = ParseRunConfig(j);
    train.output_dir = (out / "determinism" / run / "train").string();
    CmdTrain(train);
  }
  const fs::path a = out / "determinism" / "a", b = out / "determinism" / "b";
  const bool toy_same = SameTree(a / "toy", b / "toy", &toy_files);
  const bool train_same = SameTree(a / "train", b / "train", &train_files);
  c.detail << "toy " << toy_files << " files, train " << train_files
           << " files compared";
  c.Require(toy_same, "toy outputs byte-identical");
  c.Require(train_same, "train outputs byte-identical");
  Report("determinism", c, Seconds(start));
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 1 << 25);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(out);
  fs::create_directories(out);

  const std::vector<std::pair<std::string, std::function<void()>>> checks = {
      {"toy-collapse", [&] { ToyCollapse(out); }},
      {"accountant-oracle", AccountantOracle},
      {"two-query-ledger", TwoQueryLedger},
      {"sensitivity", Sensitivity},
      {"gradient-check", GradientChecks},
      {"directional-fairness", [&] { DirectionalFairness(out); }},
      {"tnb", TnbCorrectness},
      {"dphpo-accounting", DphpoAccounting},
      {"determinism", [&] { Determinism(out); }},
  };
  for (const auto& [name, run] : checks) {
    try {
      run();
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL  %-22s error: %s\n", name.c_str(), e.what());
      std::fflush(stdout);
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}
