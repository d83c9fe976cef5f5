#include "sk/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sk/diststat.hpp"
#include "sk/error.hpp"
#include "sk/mutation.hpp"
#include "sk/pipeline.hpp"
#include "sk/prioritize.hpp"
#include "sk/rng.hpp"
#include "sk/surprise.hpp"
#include "sk/trace_store.hpp"

namespace sk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct MutationConfig {
  double sigma = 0.5;
  std::size_t iters = 10;
  double alpha = kDefaultAlpha;
  double d_min = kDefaultMinEffect;
  std::size_t passes = 20;
};

// Everything a report needs to be reproduced.
struct RunConfig {
  std::string reference_manifest;
  std::string surrogate_manifest;
  std::string test_manifest;
  double variance_threshold = kDefaultVarianceThreshold;
  std::size_t pca_k = 0;
  std::size_t grid_size = kDefaultGridSize;
  std::size_t n_perm = 10000;
  std::uint64_t seed = 0;
  std::vector<std::size_t> subset_sizes{kImageNetSubsetSizes.begin(), kImageNetSubsetSizes.end()};
  MutationConfig mutation;
  std::string out;
  int threads = 0;
  bool deterministic = false;
};

json to_json(const RunConfig& c) {
  return json{{"reference_manifest", c.reference_manifest},
              {"surrogate_manifest", c.surrogate_manifest},
              {"test_manifest", c.test_manifest},
              {"variance_threshold", c.variance_threshold},
              {"pca_k", c.pca_k},
              {"grid_size", c.grid_size},
              {"n_perm", c.n_perm},
              {"seed", c.seed},
              {"subset_sizes", c.subset_sizes},
              {"mutation",
               {{"sigma", c.mutation.sigma},
                {"iters", c.mutation.iters},
                {"alpha", c.mutation.alpha},
                {"d_min", c.mutation.d_min},
                {"passes", c.mutation.passes}}},
              {"out", c.out},
              {"threads", c.threads}};
}

// Subcommand-specific inputs that are not part of RunConfig.
struct Args {
  std::string manifest;
  std::string label;
  std::vector<std::string> labels;
  std::string traces;
  std::string model;
  std::string mutant;
  std::string inputs;
  std::string input_labels;
  std::string reference_inputs;
  std::string reference_labels;
  std::string surrogate_inputs;
  std::string scores;
  std::string scores_b;
  std::string predictions;
  std::string logits;
  std::string truth;
  std::string direction = "desc";
  std::string criterion = "statistical";
  std::size_t subset = 0;
  double rho = -1.0;
  bool raw = false;
  bool include_biases = false;
  bool per_label = false;
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

class Runner {
 public:
  Runner(RunConfig& config, Args& args, std::ostream& out, std::ostream& err)
      : cfg_(config), args_(args), out_(out), err_(err) {}

  json report(const std::string& command) const {
    json j;
    j["command"] = command;
    j["config"] = to_json(cfg_);
    if (!cfg_.deterministic) j["created_at"] = timestamp();
    return j;
  }

  void emit(const json& j, const fs::path& path) const {
    if (path.empty()) {
      out_ << j.dump(2) << '\n';
      return;
    }
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << j.dump(2) << '\n';
  }

  // Single-file commands treat --out as the report path; directory commands
  // write <out>/<name>.
  fs::path report_path(const std::string& name) const {
    if (cfg_.out.empty()) return {};
    return fs::path(cfg_.out) / name;
  }

  void echo_seed(const std::string& what, std::uint64_t seed) const {
    err_ << "info: " << what << " seed=" << seed << '\n';
  }

  DensityModel fit_clamped(const TraceMatrix& traces, const std::string& id) const {
    const ColumnMask mask = variance_filter_fit(traces, cfg_.variance_threshold);
    const std::size_t limit = std::min(traces.rows() - 1, mask.kept_count);
    const std::size_t k = cfg_.pca_k == 0 ? limit : std::min(cfg_.pca_k, limit);
    if (cfg_.pca_k != 0 && k != cfg_.pca_k) {
      err_ << "info: pca_k " << cfg_.pca_k << " clamped to " << k << " for " << id << '\n';
    }
    return fit_density_model(traces, DensityConfig{cfg_.variance_threshold, k}, id);
  }

  const ManifestEntry& entry_of(const DatasetManifest& m, const std::string& label) const {
    const ManifestEntry* e = m.find(label);
    if (e == nullptr) throw ManifestError(label, "label not present in manifest '" + m.name + "'");
    return *e;
  }

  int lsa_fit() {
    TraceMatrix traces;
    std::string id;
    if (!args_.traces.empty()) {
      traces = read_trace_matrix(args_.traces);
      id = fs::path(args_.traces).stem().string();
    } else {
      if (args_.manifest.empty() || args_.label.empty()) throw InvalidArgument("lsa fit needs --traces or --manifest with --label");
      const DatasetManifest m = load_manifest(args_.manifest);
      traces = read_trace_matrix(entry_of(m, args_.label).trace_path);
      id = m.name + "/" + args_.label;
    }
    if (cfg_.out.empty()) throw InvalidArgument("lsa fit needs --out DIR");
    const DensityModel model = fit_clamped(traces, id);
    save_density_model(model, cfg_.out);
    json j = report("lsa fit");
    j["model"] = {{"id", model.id},
                  {"input_dim", model.input_dim()},
                  {"kept_columns", model.mask.kept_count},
                  {"pca_k", model.pca.k},
                  {"n", model.kde.n()}};
    out_ << j.dump(2) << '\n';
    return 0;
  }

  int lsa_score() {
    const DensityModel model = load_density_model(args_.model);
    TraceMatrix traces;
    std::string dataset;
    if (!args_.traces.empty()) {
      traces = read_trace_matrix(args_.traces);
      dataset = fs::path(args_.traces).stem().string();
    } else {
      const DatasetManifest m = load_manifest(args_.manifest);
      traces = read_trace_matrix(entry_of(m, args_.label).trace_path);
      dataset = m.name + "/" + args_.label;
    }
    const LsaScores scores = score_batch(model, traces, dataset);
    json j = report("lsa score");
    j["scores"] = scores;
    emit(j, cfg_.out);
    return 0;
  }

  static LsaScores load_scores(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
      j = json::parse(in);
      return (j.contains("scores") ? j["scores"] : j).get<LsaScores>();
    } catch (const json::exception& e) {
      throw FormatError("json", path.string() + ": " + e.what());
    }
  }

  static void write_curves_csv(const fs::path& path, const CurvePair& curves, const std::string& a,
                               const std::string& b) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << std::setprecision(17) << "x," << a << ',' << b << '\n';
    for (std::size_t i = 0; i < curves.xs.size(); ++i) f << curves.xs[i] << ',' << curves.a[i] << ',' << curves.b[i] << '\n';
  }

  json compare(const std::vector<double>& a, const std::vector<double>& b, const fs::path& csv_prefix) const {
    json j;
    const bool standardized = !args_.raw;
    j["jsd"] = js_divergence(a, b, standardized, cfg_.grid_size);
    j["jsd_raw"] = js_divergence(a, b, false, cfg_.grid_size);
    j["jsd_standardized"] = js_divergence(a, b, true, cfg_.grid_size);
    if (!csv_prefix.empty()) {
      fs::create_directories(csv_prefix.parent_path());
      write_curves_csv(csv_prefix.string() + "_raw.csv", shared_grid_curves(a, b, cfg_.grid_size), "a", "b");
      write_curves_csv(csv_prefix.string() + "_standardized.csv",
                       shared_grid_curves(zscore(a), zscore(b), cfg_.grid_size), "a", "b");
    }
    return j;
  }

  int dist_compare() {
    const LsaScores a = load_scores(args_.scores);
    const LsaScores b = load_scores(args_.scores_b);
    json j = report("dist compare");
    const fs::path prefix = cfg_.out.empty() ? fs::path{} : fs::path(cfg_.out) / "curves";
    j["result"] = compare(a.values, b.values, prefix);
    j["a"] = {{"model_id", a.model_id}, {"dataset_id", a.dataset_id}, {"n", a.size()}};
    j["b"] = {{"model_id", b.model_id}, {"dataset_id", b.dataset_id}, {"n", b.size()}};
    emit(j, report_path("dist.json"));
    return 0;
  }

  int corr() {
    const LsaScores a = load_scores(args_.scores);
    const LsaScores b = load_scores(args_.scores_b);
    echo_seed("permutation", cfg_.seed);
    json j = report("corr");
    j["result"] = spearman_test(a.values, b.values, cfg_.n_perm, cfg_.seed);
    emit(j, cfg_.out);
    return 0;
  }

  std::vector<bool> correctness(std::size_t n) const {
    if (args_.truth.empty()) throw InvalidArgument("--truth is required");
    const LabelVector truth = read_labels(args_.truth);
    std::vector<int> pred;
    if (!args_.predictions.empty()) {
      pred = read_labels(args_.predictions).values;
    } else if (!args_.logits.empty()) {
      const TraceMatrix logits = read_trace_matrix(args_.logits);
      for (std::size_t i = 0; i < logits.rows(); ++i) pred.push_back(argmax(logits.row(i)));
    } else {
      throw InvalidArgument("--predictions or --logits is required");
    }
    if (pred.size() != n || truth.size() != n) throw ShapeError("predictions/truth do not match the score count");
    std::vector<bool> correct(n);
    for (std::size_t i = 0; i < n; ++i) correct[i] = pred[i] == truth.values[i];
    return correct;
  }

  static void write_accuracy_csv(const fs::path& path, const std::vector<std::string>& names,
                                 const std::vector<AccuracyCurve>& curves) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << std::setprecision(17) << 'k';
    for (const auto& n : names) f << ',' << n;
    f << '\n';
    const std::size_t rows = curves.empty() ? 0 : curves.front().ks.size();
    for (std::size_t i = 0; i < rows; ++i) {
      f << curves.front().ks[i];
      for (const auto& c : curves) f << ',' << c.acc[i];
      f << '\n';
    }
  }

  int prioritize() {
    const LsaScores scores = load_scores(args_.scores);
    const Direction dir = args_.direction == "asc" ? Direction::Ascending : Direction::Descending;
    if (args_.direction != "asc" && args_.direction != "desc") throw InvalidArgument("--direction must be asc or desc");
    const Ranking ranking = rank_by_lsa(scores, dir);
    json j = report("prioritize");
    j["order"] = ranking.order;
    if (!args_.truth.empty()) {
      const auto correct = correctness(scores.size());
      const AccuracyCurve curve = cumulative_accuracy_curve(ranking, correct);
      j["final_accuracy"] = curve.acc.empty() ? 0.0 : curve.acc.back();
      if (!cfg_.out.empty()) {
        fs::create_directories(cfg_.out);
        write_accuracy_csv(fs::path(cfg_.out) / "accuracy_curve.csv", {"accuracy"}, {curve});
      }
      if (args_.subset > 0) {
        const Selection s = select_top_k_correct(ranking, correct, args_.subset);
        j["selection"] = {{"subset_size", args_.subset}, {"indices", s.indices}, {"shortfall", s.shortfall}};
      }
    }
    emit(j, report_path("ranking.json"));
    return 0;
  }

  int mutate_fuzz() {
    const NeuralModel model = load_model(args_.model);
    if (args_.rho < 0.0) throw InvalidArgument("mutate fuzz needs --rho");
    echo_seed("mutation", cfg_.seed);
    const NeuralModel mutant =
        gaussian_fuzz(model, MutationSpec{args_.rho, cfg_.mutation.sigma, cfg_.seed, args_.include_biases});
    if (cfg_.out.empty()) throw InvalidArgument("mutate fuzz needs --out FILE");
    save_model(mutant, cfg_.out);
    return 0;
  }

  KillConfig kill_config(KillCriterion criterion) const {
    return KillConfig{criterion, cfg_.mutation.passes, cfg_.mutation.alpha, cfg_.mutation.d_min,
                      rng::derive(cfg_.seed, {1})};
  }

  std::vector<KillCriterion> criteria() const {
    if (args_.criterion == "both") return {KillCriterion::SingleInstance, KillCriterion::Statistical};
    return {parse_criterion(args_.criterion)};
  }

  int mutate_kill() {
    const NeuralModel model = load_model(args_.model);
    const NeuralModel mutant = load_model(args_.mutant);
    const TraceMatrix inputs = read_trace_matrix(args_.inputs);
    const LabelVector truth = read_labels(args_.input_labels, static_cast<int>(model.num_classes()));
    echo_seed("dropout", kill_config(KillCriterion::Statistical).dropout_seed);
    json j = report("mutate kill");
    j["verdicts"] = json::array();
    for (KillCriterion c : criteria()) j["verdicts"].push_back(evaluate_kill(model, mutant, inputs, truth, kill_config(c)));
    emit(j, cfg_.out);
    return 0;
  }

  json search_json(const NeuralModel& model, const TraceMatrix& inputs, const LabelVector& truth,
                   KillCriterion criterion) const {
    json j;
    j["criterion"] = to_string(criterion);
    try {
      const RhoSearchResult r = binary_search_rho(model, inputs, truth, cfg_.mutation.sigma, cfg_.mutation.iters,
                                                  kill_config(criterion), rng::derive(cfg_.seed, {2}));
      j["killed"] = true;
      j["rho_star"] = r.rho_star;
      j["non_monotone"] = r.non_monotone;
      json trace = json::array();
      for (const auto& [rho, killed] : r.trace) trace.push_back({{"rho", rho}, {"killed", killed}});
      j["trace"] = trace;
      if (r.non_monotone) err_ << "warning: non-monotone killability observed\n";
    } catch (const NotKillable&) {
      j["killed"] = false;
      j["rho_star"] = nullptr;
    }
    return j;
  }

  int mutate_search() {
    const NeuralModel model = load_model(args_.model);
    const TraceMatrix inputs = read_trace_matrix(args_.inputs);
    const LabelVector truth = read_labels(args_.input_labels, static_cast<int>(model.num_classes()));
    echo_seed("search", cfg_.seed);
    json j = report("mutate search");
    j["searches"] = json::array();
    for (KillCriterion c : criteria()) j["searches"].push_back(search_json(model, inputs, truth, c));
    emit(j, cfg_.out);
    return 0;
  }

  struct LabelScores {
    std::string label;
    LsaScores reference;
    LsaScores surrogate;
    const ManifestEntry* test = nullptr;
  };

  std::vector<LabelScores> score_labels() const {
    if (cfg_.reference_manifest.empty() || cfg_.surrogate_manifest.empty() || cfg_.test_manifest.empty()) {
      throw InvalidArgument("--ref, --surrogate and --test manifests are required");
    }
    const DatasetManifest ref = load_manifest(cfg_.reference_manifest);
    const DatasetManifest sur = load_manifest(cfg_.surrogate_manifest);
    test_manifest_ = load_manifest(cfg_.test_manifest);
    std::vector<LabelScores> out;
    for (const auto& te : test_manifest_.entries) {
      if (!args_.labels.empty() && std::find(args_.labels.begin(), args_.labels.end(), te.label) == args_.labels.end()) {
        continue;
      }
      const DensityModel a = fit_clamped(read_trace_matrix(entry_of(ref, te.label).trace_path), ref.name + "/" + te.label);
      const DensityModel b = fit_clamped(read_trace_matrix(entry_of(sur, te.label).trace_path), sur.name + "/" + te.label);
      const TraceMatrix test = read_trace_matrix(te.trace_path);
      const std::string dataset = test_manifest_.name + "/" + te.label;
      out.push_back({te.label, score_batch(a, test, dataset), score_batch(b, test, dataset), &te});
    }
    return out;
  }

  int rq1() {
    json j = report("rq1");
    j["labels"] = json::array();
    for (const auto& ls : score_labels()) {
      const fs::path prefix = cfg_.out.empty() ? fs::path{} : fs::path(cfg_.out) / ("rq1_" + ls.label);
      json r = compare(ls.reference.values, ls.surrogate.values, prefix);
      r["label"] = ls.label;
      r["n"] = ls.reference.size();
      j["labels"].push_back(r);
    }
    emit(j, report_path("rq1.json"));
    return 0;
  }

  int rq2() {
    echo_seed("permutation", cfg_.seed);
    json j = report("rq2");
    j["labels"] = json::array();
    std::size_t idx = 0;
    for (const auto& ls : score_labels()) {
      json r = spearman_test(ls.reference.values, ls.surrogate.values, cfg_.n_perm, rng::derive(cfg_.seed, {idx++}));
      r["label"] = ls.label;
      j["labels"].push_back(r);
    }
    emit(j, report_path("rq2.json"));
    return 0;
  }

  int rq3_accuracy() {
    json j = report("rq3 accuracy");
    j["labels"] = json::array();
    for (const auto& ls : score_labels()) {
      const ManifestEntry& te = *ls.test;
      if (!te.logits_path || !te.true_labels_path) throw ManifestError(te.label, "rq3 accuracy needs logits_path and true_labels_path");
      const TraceMatrix logits = read_trace_matrix(*te.logits_path);
      const LabelVector truth = read_labels(*te.true_labels_path, static_cast<int>(std::max<std::size_t>(2, logits.cols())));
      std::vector<bool> correct(truth.size());
      for (std::size_t i = 0; i < truth.size(); ++i) correct[i] = argmax(logits.row(i)) == truth.values[i];
      const AccuracyCurve ca = cumulative_accuracy_curve(rank_by_lsa(ls.reference), correct);
      const AccuracyCurve cb = cumulative_accuracy_curve(rank_by_lsa(ls.surrogate), correct);
      if (!cfg_.out.empty()) {
        fs::create_directories(cfg_.out);
        write_accuracy_csv(fs::path(cfg_.out) / ("rq3_accuracy_" + ls.label + ".csv"), {"original", "surrogate"}, {ca, cb});
      }
      j["labels"].push_back({{"label", ls.label},
                             {"n", truth.size()},
                             {"overall_accuracy", ca.acc.empty() ? 0.0 : ca.acc.back()}});
    }
    emit(j, report_path("rq3_accuracy.json"));
    return 0;
  }

  int rq3_kill() {
    const NeuralModel model = load_model(args_.model);
    const TraceMatrix test_inputs = read_trace_matrix(args_.inputs);
    const int k_classes = static_cast<int>(model.num_classes());
    const LabelVector truth = read_labels(args_.input_labels, k_classes);
    if (args_.subset > 0) cfg_.subset_sizes = {args_.subset};

    std::vector<std::pair<std::string, TraceMatrix>> sources;
    std::vector<std::optional<LabelVector>> source_labels;
    if (args_.reference_inputs.empty() && args_.surrogate_inputs.empty()) {
      throw InvalidArgument("rq3 kill needs --reference-inputs and/or --surrogate-inputs");
    }
    if (!args_.reference_inputs.empty()) {
      sources.emplace_back("original", read_trace_matrix(args_.reference_inputs));
      source_labels.push_back(args_.reference_labels.empty() ? std::nullopt
                                                             : std::optional(read_labels(args_.reference_labels, k_classes)));
    }
    if (!args_.surrogate_inputs.empty()) {
      sources.emplace_back("surrogate", read_trace_matrix(args_.surrogate_inputs));
      source_labels.push_back(std::nullopt);
    }

    echo_seed("rq3", cfg_.seed);
    json j = report("rq3 kill");
    j["reports"] = json::array();
    std::vector<int> classes{-1};
    if (args_.per_label) {
      classes.clear();
      for (int c = 0; c < k_classes; ++c) classes.push_back(c);
    }
    for (std::size_t s = 0; s < sources.size(); ++s) {
      for (int c : classes) {
        TraceMatrix ref = sources[s].second;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < truth.size(); ++i) {
          if (c < 0 || truth.values[i] == c) test_rows.push_back(i);
        }
        if (c >= 0 && source_labels[s]) {
          std::vector<std::size_t> rows;
          for (std::size_t i = 0; i < source_labels[s]->size(); ++i) {
            if (source_labels[s]->values[i] == c) rows.push_back(i);
          }
          ref = ref.select_rows(rows);
        }
        const TraceMatrix test = test_inputs.select_rows(test_rows);
        LabelVector sub_truth{{}, k_classes};
        for (std::size_t i : test_rows) sub_truth.values.push_back(truth.values[i]);
        const std::string label = c < 0 ? "all" : std::to_string(c);

        for (std::size_t k : cfg_.subset_sizes) {
          const DensityConfig dc{cfg_.variance_threshold, cfg_.pca_k};
          const PrioritizedSubset ps = prioritize_for_kill(model, ref, test, sub_truth, k, dc);
          const TraceMatrix chosen = test.select_rows(ps.selection.indices);
          LabelVector chosen_truth{{}, k_classes};
          std::vector<std::size_t> original_rows;
          for (std::size_t i : ps.selection.indices) {
            chosen_truth.values.push_back(sub_truth.values[i]);
            original_rows.push_back(test_rows[i]);
          }
          for (KillCriterion crit : criteria()) {
            json r{{"label", label}, {"criterion", to_string(crit)}, {"subset_size", k}, {"source", sources[s].first},
                   {"selected", original_rows}, {"shortfall", ps.selection.shortfall}};
            if (args_.rho >= 0.0) {
              const std::uint64_t mseed = rng::derive(cfg_.seed, {2});
              const NeuralModel mutant = gaussian_fuzz(model, MutationSpec{args_.rho, cfg_.mutation.sigma, mseed});
              const KillVerdict v = evaluate_kill(model, mutant, chosen, chosen_truth, kill_config(crit));
              r["killed"] = v.killed;
              r["p_value"] = v.p_value ? json(*v.p_value) : json(nullptr);
              r["effect_size"] = v.effect_size ? json(*v.effect_size) : json(nullptr);
              r["rho_star"] = nullptr;
              r["rho"] = args_.rho;
            } else {
              const json sj = search_json(model, chosen, chosen_truth, crit);
              r["killed"] = sj["killed"];
              r["rho_star"] = sj["rho_star"];
              r["p_value"] = nullptr;
              r["effect_size"] = nullptr;
              if (sj.contains("trace")) r["trace"] = sj["trace"];
            }
            j["reports"].push_back(r);
          }
        }
      }
    }
    emit(j, report_path("rq3_kill.json"));
    if (!cfg_.out.empty()) write_kill_table(fs::path(cfg_.out) / "rq3_kill.csv", j["reports"]);
    return 0;
  }

  // One row per label, one column per (criterion, subset size, source).
  static void write_kill_table(const fs::path& path, const json& reports) {
    std::vector<std::string> columns;
    std::map<std::string, std::map<std::string, bool>> cells;
    std::vector<std::string> labels;
    for (const auto& r : reports) {
      const std::string col = r["criterion"].get<std::string>() + "-" + std::to_string(r["subset_size"].get<std::size_t>()) +
                              (r["source"] == "original" ? "-O" : "-D");
      const std::string label = r["label"];
      if (std::find(columns.begin(), columns.end(), col) == columns.end()) columns.push_back(col);
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
      cells[label][col] = r["killed"].get<bool>();
    }
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    f << "label";
    for (const auto& c : columns) f << ',' << c;
    f << '\n';
    for (const auto& l : labels) {
      f << l;
      for (const auto& c : columns) f << ',' << (cells[l].count(c) ? (cells[l][c] ? "killed" : "-") : "");
      f << '\n';
    }
  }

 private:
  RunConfig& cfg_;
  Args& args_;
  std::ostream& out_;
  std::ostream& err_;
  mutable DatasetManifest test_manifest_;
};

std::string escape(const std::string& s) { return json(s).dump(); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  Args a;
  if (const char* env = std::getenv("SK_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      err << "error kind=InvalidArgument message=" << escape("SK_SEED is not an unsigned integer") << '\n';
      return 1;
    }
  }

  CLI::App app{"sk: surprise adequacy toolkit (LSA fitting, distribution statistics, prioritization, mutation)"};
  app.require_subcommand(1);
  app.add_option("--threads", cfg.threads, "OpenMP threads (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--deterministic", cfg.deterministic, "Omit timestamps so reports are byte-identical");

  const auto density_opts = [&](CLI::App* c) {
    c->add_option("--variance-threshold", cfg.variance_threshold, "Drop columns with variance <= threshold")
        ->check(CLI::NonNegativeNumber);
    c->add_option("--pca-k", cfg.pca_k, "PCA components (0 = min(rows-1, kept columns))");
  };
  const auto seed_opt = [&](CLI::App* c) { c->add_option("--seed", cfg.seed, "Random seed (default: $SK_SEED or 0)"); };
  const auto mutation_opts = [&](CLI::App* c) {
    c->add_option("--sigma", cfg.mutation.sigma, "Gaussian Fuzzing noise scale")->check(CLI::PositiveNumber);
    c->add_option("--iters", cfg.mutation.iters, "Binary search iterations")->check(CLI::PositiveNumber);
    c->add_option("--alpha", cfg.mutation.alpha, "Significance level for the statistical criterion");
    c->add_option("--d-min", cfg.mutation.d_min, "Minimum |Cohen's d| for the statistical criterion");
    c->add_option("--passes", cfg.mutation.passes, "Stochastic instances per model")->check(CLI::PositiveNumber);
    c->add_option("--criterion", a.criterion, "single | statistical | both")
        ->check(CLI::IsMember({"single", "statistical", "both"}));
  };
  const auto manifests = [&](CLI::App* c) {
    c->add_option("--ref", cfg.reference_manifest, "Manifest of original reference traces")->required();
    c->add_option("--surrogate", cfg.surrogate_manifest, "Manifest of surrogate reference traces")->required();
    c->add_option("--test", cfg.test_manifest, "Manifest of test traces")->required();
    c->add_option("--label", a.labels, "Restrict to these labels");
    c->add_option("--out", cfg.out, "Output directory");
    density_opts(c);
  };

  auto* lsa = app.add_subcommand("lsa", "Fit or apply an LSA density model");
  lsa->require_subcommand(1);
  auto* lsa_fit = lsa->add_subcommand("fit", "Fit variance filter, PCA and KDE on reference traces");
  lsa_fit->add_option("--manifest", a.manifest, "Dataset manifest");
  lsa_fit->add_option("--label", a.label, "Manifest entry label");
  lsa_fit->add_option("--traces", a.traces, "ATRC trace file (instead of --manifest)");
  lsa_fit->add_option("--out", cfg.out, "Model directory")->required();
  density_opts(lsa_fit);
  auto* lsa_score = lsa->add_subcommand("score", "Score traces with a fitted model");
  lsa_score->add_option("--model", a.model, "Model directory")->required();
  lsa_score->add_option("--manifest", a.manifest, "Dataset manifest");
  lsa_score->add_option("--label", a.label, "Manifest entry label");
  lsa_score->add_option("--traces", a.traces, "ATRC trace file");
  lsa_score->add_option("--out", cfg.out, "Scores JSON (default stdout)");

  auto* dist = app.add_subcommand("dist", "Distribution comparison");
  dist->require_subcommand(1);
  auto* dist_compare = dist->add_subcommand("compare", "KDE curves and Jensen-Shannon divergence of two score sets");
  dist_compare->add_option("--a", a.scores, "First scores JSON")->required();
  dist_compare->add_option("--b", a.scores_b, "Second scores JSON")->required();
  dist_compare->add_option("--grid-size", cfg.grid_size, "KDE grid points")->check(CLI::Range(16, 10000000));
  dist_compare->add_flag("--raw", a.raw, "Report the unstandardized divergence as the headline value");
  dist_compare->add_option("--out", cfg.out, "Output directory (default stdout, no curves)");

  auto* corr = app.add_subcommand("corr", "Spearman correlation with permutation p-value");
  corr->add_option("--a", a.scores, "First scores JSON")->required();
  corr->add_option("--b", a.scores_b, "Second scores JSON")->required();
  corr->add_option("--n-perm", cfg.n_perm, "Permutations")->check(CLI::PositiveNumber);
  corr->add_option("--out", cfg.out, "Result JSON (default stdout)");
  seed_opt(corr);

  auto* prio = app.add_subcommand("prioritize", "Rank inputs by LSA and build accuracy curves");
  prio->add_option("--scores", a.scores, "Scores JSON")->required();
  prio->add_option("--direction", a.direction, "desc | asc");
  prio->add_option("--truth", a.truth, "True labels (ATRC, cols = 1)");
  prio->add_option("--predictions", a.predictions, "Predicted labels (ATRC, cols = 1)");
  prio->add_option("--logits", a.logits, "Logits (ATRC); predictions are the argmax");
  prio->add_option("--subset", a.subset, "Select the first k correctly classified inputs");
  prio->add_option("--out", cfg.out, "Output directory (default stdout)");

  auto* mutate = app.add_subcommand("mutate", "Gaussian Fuzzing mutation testing");
  mutate->require_subcommand(1);
  auto* fuzz = mutate->add_subcommand("fuzz", "Write a Gaussian-fuzzed copy of a model");
  fuzz->add_option("--model", a.model, "Model JSON")->required();
  fuzz->add_option("--rho", a.rho, "Weight selection probability")->required()->check(CLI::Range(0.0, 1.0));
  fuzz->add_option("--sigma", cfg.mutation.sigma, "Noise scale")->check(CLI::PositiveNumber);
  fuzz->add_flag("--include-biases", a.include_biases, "Also fuzz biases");
  fuzz->add_option("--out", cfg.out, "Mutant model JSON")->required();
  seed_opt(fuzz);
  auto* kill = mutate->add_subcommand("kill", "Evaluate whether a mutant is killed");
  kill->add_option("--model", a.model, "Original model JSON")->required();
  kill->add_option("--mutant", a.mutant, "Mutant model JSON")->required();
  kill->add_option("--inputs", a.inputs, "Model inputs (ATRC)")->required();
  kill->add_option("--labels", a.input_labels, "True labels (ATRC, cols = 1)")->required();
  kill->add_option("--out", cfg.out, "Report JSON (default stdout)");
  mutation_opts(kill);
  seed_opt(kill);
  auto* search = mutate->add_subcommand("search", "Binary search for the smallest killable rho");
  search->add_option("--model", a.model, "Model JSON")->required();
  search->add_option("--inputs", a.inputs, "Model inputs (ATRC)")->required();
  search->add_option("--labels", a.input_labels, "True labels (ATRC, cols = 1)")->required();
  search->add_option("--out", cfg.out, "Report JSON (default stdout)");
  mutation_opts(search);
  seed_opt(search);

  auto* rq1 = app.add_subcommand("rq1", "Per-label LSA distribution comparison, original vs surrogate reference");
  manifests(rq1);
  rq1->add_option("--grid-size", cfg.grid_size, "KDE grid points")->check(CLI::Range(16, 10000000));
  rq1->add_flag("--raw", a.raw, "Headline divergence on raw scores");
  auto* rq2 = app.add_subcommand("rq2", "Per-label Spearman correlation of LSA, original vs surrogate reference");
  manifests(rq2);
  rq2->add_option("--n-perm", cfg.n_perm, "Permutations")->check(CLI::PositiveNumber);
  seed_opt(rq2);
  auto* rq3 = app.add_subcommand("rq3", "Prioritization effectiveness");
  rq3->require_subcommand(1);
  auto* rq3_acc = rq3->add_subcommand("accuracy", "Accuracy-vs-rank curves under both references");
  manifests(rq3_acc);
  auto* rq3_kill = rq3->add_subcommand("kill", "Mutation kills by LSA-prioritized correct inputs");
  rq3_kill->add_option("--model", a.model, "Model JSON")->required();
  rq3_kill->add_option("--inputs", a.inputs, "Test inputs (ATRC)")->required();
  rq3_kill->add_option("--labels", a.input_labels, "Test labels (ATRC, cols = 1)")->required();
  rq3_kill->add_option("--reference-inputs", a.reference_inputs, "Original reference inputs (ATRC)");
  rq3_kill->add_option("--reference-labels", a.reference_labels, "Labels of the reference inputs (per-label mode)");
  rq3_kill->add_option("--surrogate-inputs", a.surrogate_inputs, "Surrogate reference inputs (ATRC)");
  rq3_kill->add_option("--subset", a.subset, "Single subset size (overrides --subset-sizes)");
  rq3_kill->add_option("--subset-sizes", cfg.subset_sizes, "Subset sizes (default 30 50 70)");
  rq3_kill->add_option("--rho", a.rho, "Evaluate this rho instead of searching")->check(CLI::Range(0.0, 1.0));
  rq3_kill->add_flag("--per-label", a.per_label, "Evaluate each class separately");
  rq3_kill->add_option("--out", cfg.out, "Output directory (default stdout)");
  density_opts(rq3_kill);
  mutation_opts(rq3_kill);
  seed_opt(rq3_kill);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return 2;
  }

  set_num_threads(cfg.threads);
  Runner r(cfg, a, out, err);
  try {
    if (lsa_fit->parsed()) return r.lsa_fit();
    if (lsa_score->parsed()) return r.lsa_score();
    if (dist_compare->parsed()) return r.dist_compare();
    if (corr->parsed()) return r.corr();
    if (prio->parsed()) return r.prioritize();
    if (fuzz->parsed()) return r.mutate_fuzz();
    if (kill->parsed()) return r.mutate_kill();
    if (search->parsed()) return r.mutate_search();
    if (rq1->parsed()) return r.rq1();
    if (rq2->parsed()) return r.rq2();
    if (rq3_acc->parsed()) return r.rq3_accuracy();
    if (rq3_kill->parsed()) return r.rq3_kill();
  } catch (const Error& e) {
    err << "error kind=" << e.kind() << " message=" << escape(e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error kind=Internal message=" << escape(e.what()) << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace sk::cli
