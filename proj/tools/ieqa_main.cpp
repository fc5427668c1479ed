// ieqa: generate synthetic rating data, train the digit scorer, optimize
// metric definitions against the definition value, and score the result.
//
// Exit codes: 0 success, 2 usage/config/input error, 3 degenerate result,
// 4 optimizer-endpoint failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ieqa/defvalue.hpp"
#include "ieqa/eval_metrics.hpp"
#include "ieqa/fdmpo.hpp"
#include "ieqa/parallel.hpp"
#include "ieqa/prompt_embed.hpp"
#include "ieqa/rng.hpp"
#include "ieqa/score_codec.hpp"
#include "ieqa/scorer.hpp"
#include "ieqa/synth_data.hpp"
#include "ieqa/tdrl.hpp"
#include "ieqa/trainer.hpp"

namespace fs = std::filesystem;
using namespace ieqa;

namespace {

// Configuration problems found after flag parsing; mapped to exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_input_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw config_error("input file not found: " + p.string());
}

void require_directory(const fs::path& p) {
  if (!fs::is_directory(p)) throw config_error("directory not found: " + p.string());
}

void require_output_parent(const fs::path& p) {
  const fs::path parent = p.parent_path();
  if (!parent.empty() && !fs::is_directory(parent))
    throw config_error("parent directory missing for output: " + p.string());
}

std::string read_text_file(const fs::path& p) {
  require_input_file(p);
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in && !in.eof()) throw config_error("failed reading " + p.string());
  return buf.str();
}

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// ---------------------------------------------------------------------------
// built-in metric definitions
// ---------------------------------------------------------------------------

std::string builtin_definition(Dimension d) {
  switch (d) {
    case Dimension::visual:
      return "Rate the overall visual quality of the edited image: sharpness, "
             "natural colors and lighting, and freedom from artifacts or "
             "distortions.";
    case Dimension::editing:
      return "Rate how completely and accurately the requested edit was "
             "carried out in the edited image.";
    case Dimension::preservation:
      return "Rate how faithfully the edited image preserves the original "
             "content outside the intended edit region.";
  }
  throw std::invalid_argument("unknown dimension");
}

std::vector<std::string> builtin_pool(Dimension d) {
  const std::string name(to_label(d));
  return {
      "Judge the " + name + " dimension on the 1-5 scale, weighting fine detail "
          "over global impressions.",
      "Assess " + name + " quality strictly: deduct for any visible flaw, "
          "however small.",
      "Score " + name + " the way a careful human annotator would, comparing the "
          "edited image against the original side by side.",
      "Evaluate " + name + " holistically, balancing local fidelity and overall "
          "plausibility of the result.",
      "Measure " + name + " by how likely an expert reviewer is to accept the "
          "edit without revisions.",
  };
}

// ---------------------------------------------------------------------------
// shared option payloads
// ---------------------------------------------------------------------------

struct DataArgs {
  std::string data_dir;
  double lo = 1.0;
  double hi = 5.0;
};

struct TrainArgs {
  DataArgs data;
  std::string dimension = "visual";
  std::string loss = "tdrl";
  std::string definition;
  std::string definition_file;
  int epochs = 30;
  int batch = 128;
  double lr = 1e-4;
  double warmup_ratio = 0.03;
  std::uint64_t seed = 0;
  bool ce_digits = false;
  int embed_dim = 64;
  int hidden_dim = 32;
  std::string init_ckpt;
  std::string out_ckpt;
  std::string out_report;
  bool progress = false;
  int threads = 0;
};

struct GenDataArgs {
  std::uint64_t seed = 0;
  std::size_t train_count = 2000;
  std::size_t val_in_count = 500;
  std::size_t val_out_count = 500;
  int features = 16;
  double sigma = 0.15;
  double ood_shift = 0.5;
  double lo = 1.0;
  double hi = 5.0;
  std::string out_dir;
  int threads = 0;
};

struct FdmpoArgs {
  DataArgs data;
  std::string dimension = "visual";
  std::string definition;
  std::string definition_file;
  int budget = 10;
  int samples = 256;
  std::uint64_t seed = 0;
  std::string optimizer = "mock";
  std::string pool_file;
  std::string base_url;
  std::string model = "gpt-4o";
  double temperature = 0.7;
  int timeout_ms = 10000;
  int max_retries = 2;
  int warmup_epochs = 3;
  int batch = 128;
  double lr = 1e-4;
  int embed_dim = 64;
  int hidden_dim = 32;
  std::string out_dir;
  int threads = 0;
};

struct EvalArgs {
  DataArgs data;
  std::vector<std::string> ckpt;
  std::vector<std::string> ckpt2;
  std::string decode = "expected";
  std::string out_report;
  bool logistic_fit = false;
  int threads = 0;
};

struct InspectArgs {
  std::string dists;
  std::string dists_file;
  std::string truth;
};

void apply_threads(int threads) {
  if (threads < 0) throw config_error("--threads must be non-negative");
  if (threads > 0) set_thread_count(threads);
}

std::string resolve_definition(const std::string& inline_text, const std::string& file,
                               Dimension dim) {
  if (!inline_text.empty()) return inline_text;
  if (!file.empty()) {
    const std::string text = trim(read_text_file(file));
    if (text.empty()) throw config_error("definition file is empty: " + file);
    return text;
  }
  return builtin_definition(dim);
}

std::vector<SampleRecord> load_split(const fs::path& dir, const char* name,
                                     const ScoreRange& range) {
  const fs::path path = dir / name;
  require_input_file(path);
  try {
    return read_jsonl(path, range);
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

int run_gen_data(const GenDataArgs& a) {
  apply_threads(a.threads);
  require_directory(a.out_dir);

  GeneratorSpec spec;
  spec.seed = a.seed;
  spec.train_count = a.train_count;
  spec.val_in_count = a.val_in_count;
  spec.val_out_count = a.val_out_count;
  spec.feature_dim = a.features;
  spec.noise_sigma = a.sigma;
  spec.ood_shift = a.ood_shift;
  spec.range = {a.lo, a.hi};

  const Dataset ds = generate(spec);
  const fs::path dir(a.out_dir);
  const std::pair<const char*, const std::vector<SampleRecord>*> outputs[] = {
      {"train.jsonl", &ds.train}, {"val_in.jsonl", &ds.val_in}, {"val_out.jsonl", &ds.val_out}};
  for (const auto& [name, records] : outputs) {
    const fs::path path = dir / name;
    write_jsonl(*records, path);
    std::cout << "wrote " << path.string() << " (" << records->size() << " records)\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

TrainConfig train_config_from(const TrainArgs& a, Dimension dim) {
  TrainConfig tc;
  tc.loss = loss_from_label(a.loss);
  tc.epochs = a.epochs;
  tc.batch_size = a.batch;
  tc.learning_rate = a.lr;
  tc.warmup_ratio = a.warmup_ratio;
  tc.seed = a.seed;
  tc.dimension = dim;
  tc.ce_includes_digits = a.ce_digits;
  tc.embed_dim = a.embed_dim;
  tc.hidden_dim = a.hidden_dim;
  tc.init_checkpoint = a.init_ckpt;
  tc.range = {a.data.lo, a.data.hi};
  return tc;
}

int run_train(const TrainArgs& a) {
  apply_threads(a.threads);
  const Dimension dim = dimension_from_label(a.dimension);
  const ScoreRange range{a.data.lo, a.data.hi};
  if (!valid_range(range)) throw config_error("invalid score range");

  require_output_parent(a.out_ckpt);
  if (!a.out_report.empty()) require_output_parent(a.out_report);

  const fs::path dir(a.data.data_dir);
  const std::vector<SampleRecord> train_set = load_split(dir, "train.jsonl", range);
  std::vector<SampleRecord> heldout;
  if (fs::is_regular_file(dir / "val_in.jsonl"))
    heldout = load_split(dir, "val_in.jsonl", range);

  const std::string definition = resolve_definition(a.definition, a.definition_file, dim);
  const TrainConfig tc = train_config_from(a, dim);
  auto [params, report] = train(train_set, heldout, definition, tc, Exec::parallel, a.progress);

  save_checkpoint(params, a.out_ckpt);
  if (!a.out_report.empty()) write_report(report, tc, a.out_report);

  std::cout << "checkpoint: " << a.out_ckpt << "\n";
  std::printf("heldout mae=%.6f srcc=%.6f plcc=%.6f\n", report.heldout.mae,
              report.heldout.srcc, report.heldout.plcc);
  return 0;
}

// ---------------------------------------------------------------------------
// fdmpo
// ---------------------------------------------------------------------------

std::vector<std::string> load_pool(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error("malformed pool file " + path + ": " + e.what());
  }
  if (!j.is_array() || j.empty())
    throw config_error("pool file must hold a non-empty JSON array of strings");
  std::vector<std::string> pool;
  for (const auto& item : j) {
    if (!item.is_string() || item.get<std::string>().empty())
      throw config_error("pool entries must be non-empty strings");
    pool.push_back(item.get<std::string>());
  }
  return pool;
}

// Seeded K-out-of-N subset (partial Fisher-Yates), returned in ascending
// order so the V_d reduction order is stable.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (k >= n) return idx;
  SplitMix64 rng(derive_seed(seed, /*tag=*/0x5a3u));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.next() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

int run_fdmpo_cmd(const FdmpoArgs& a) {
  apply_threads(a.threads);
  const Dimension dim = dimension_from_label(a.dimension);
  const ScoreRange range{a.data.lo, a.data.hi};
  if (!valid_range(range)) throw config_error("invalid score range");
  if (a.budget < 0) throw config_error("--budget must be non-negative");
  if (a.samples <= 0) throw config_error("--samples must be positive");
  require_directory(a.out_dir);

  OptimizerEndpoint endpoint;
  if (a.optimizer == "mock") {
    endpoint.kind = OptimizerEndpoint::Kind::mock;
    endpoint.pool = a.pool_file.empty() ? builtin_pool(dim) : load_pool(a.pool_file);
  } else {
    endpoint.kind = OptimizerEndpoint::Kind::http;
    if (a.base_url.empty()) throw config_error("--base-url is required with --optimizer http");
    const char* key = std::getenv(kApiKeyEnvVar);
    if (key == nullptr || *key == '\0')
      throw config_error(std::string(kApiKeyEnvVar) +
                         " must be set in the environment for the http optimizer");
    endpoint.base_url = a.base_url;
    endpoint.model = a.model;
    endpoint.temperature = a.temperature;
    endpoint.timeout_ms = a.timeout_ms;
    endpoint.max_retries = a.max_retries;
    endpoint.api_key = key;  // held in memory only; never logged or echoed
  }

  const fs::path dir(a.data.data_dir);
  const std::vector<SampleRecord> train_set = load_split(dir, "train.jsonl", range);
  const std::string initial = resolve_definition(a.definition, a.definition_file, dim);

  // Fixed evaluation subset: every trial scores the same samples.
  const std::vector<std::size_t> subset =
      sample_indices(train_set.size(), static_cast<std::size_t>(a.samples), a.seed);
  std::vector<VdSample> vd_samples;
  vd_samples.reserve(subset.size());
  for (const std::size_t i : subset)
    vd_samples.push_back({train_set[i].features, quantize_to_triple(train_set[i].mos(dim))});

  // Brief warmup training with the initial definition so that V_d actually
  // responds to the prompt embedding; an untrained scorer is near-constant
  // across definitions.
  TrainArgs warmup_args;
  warmup_args.data = a.data;
  warmup_args.loss = "tdrl";
  warmup_args.epochs = a.warmup_epochs;
  warmup_args.batch = a.batch;
  warmup_args.lr = a.lr;
  warmup_args.seed = a.seed;
  warmup_args.embed_dim = a.embed_dim;
  warmup_args.hidden_dim = a.hidden_dim;
  const TrainConfig warmup_cfg = train_config_from(warmup_args, dim);
  std::cerr << "warmup: " << a.warmup_epochs << " epoch(s) with the initial definition\n";
  auto [params, warmup_report] = train(train_set, {}, initial, warmup_cfg, Exec::parallel);
  (void)warmup_report;

  const DefinitionEvaluator evaluator = [&](const std::string& definition) {
    return v_d_aggregate(vd_samples, params, definition);
  };

  const fs::path history_path = fs::path(a.out_dir) / "history.jsonl";
  std::ofstream(history_path, std::ios::trunc);  // fresh run, fresh history

  const FdmpoResult result = run_fdmpo(initial, evaluator, endpoint, a.budget, history_path);

  write_trajectory_csv(result.history, fs::path(a.out_dir) / "trajectory.csv");
  const fs::path best_path = fs::path(a.out_dir) / "best_definition.txt";
  {
    std::ofstream out(best_path, std::ios::binary);
    out << result.best.definition << '\n';
    if (!out) throw std::runtime_error("failed writing " + best_path.string());
  }

  std::printf("best iter=%d v_d=%.6f (n=%zu)\n", result.best.iter, result.best.v_d.v,
              result.best.v_d.n_samples);
  std::cout << "best definition: " << best_path.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

std::map<Dimension, std::string> parse_ckpt_list(const std::vector<std::string>& entries,
                                                 const char* flag) {
  std::map<Dimension, std::string> out;
  for (const std::string& entry : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
      throw config_error(std::string(flag) + " entries take the form dimension=path: " + entry);
    Dimension dim;
    try {
      dim = dimension_from_label(entry.substr(0, eq));
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    if (out.count(dim))
      throw config_error(std::string(flag) + " names " + entry.substr(0, eq) + " twice");
    out[dim] = entry.substr(eq + 1);
  }
  return out;
}

ScorerParams load_dim_checkpoint(const std::string& path, Dimension dim) {
  require_input_file(path);
  ScorerParams params;
  try {
    params = load_checkpoint(path);
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
  if (params.dimension != dim)
    throw config_error("checkpoint " + path + " was trained for dimension '" +
                       std::string(to_label(params.dimension)) + "', not '" +
                       std::string(to_label(dim)) + "'");
  return params;
}

int run_eval(const EvalArgs& a) {
  apply_threads(a.threads);
  if (a.logistic_fit)
    throw config_error("--logistic-fit is reserved and not implemented; PLCC is "
                       "computed on raw predictions");
  const ScoreRange range{a.data.lo, a.data.hi};
  if (!valid_range(range)) throw config_error("invalid score range");
  if (!a.out_report.empty()) require_output_parent(a.out_report);
  const DecodeMode mode = decode_mode_from_label(a.decode);

  const auto ckpts = parse_ckpt_list(a.ckpt, "--ckpt");
  const auto ckpts2 = parse_ckpt_list(a.ckpt2, "--ckpt2");
  if (ckpts.empty()) throw config_error("at least one --ckpt dimension=path is required");
  for (const auto& [dim, path] : ckpts2) {
    (void)path;
    if (!ckpts.count(dim))
      throw config_error("--ckpt2 given for dimension '" + std::string(to_label(dim)) +
                         "' without a matching --ckpt");
  }

  const fs::path dir(a.data.data_dir);
  const std::vector<SampleRecord> val_in = load_split(dir, "val_in.jsonl", range);
  const std::vector<SampleRecord> val_out = load_split(dir, "val_out.jsonl", range);
  const std::vector<SampleRecord>* splits[2] = {&val_in, &val_out};

  std::array<std::array<std::optional<DimCorr>, 2>, kDimensionCount> cells;
  bool degenerate = false;
  for (const auto& [dim, path] : ckpts) {
    const ScorerParams params = load_dim_checkpoint(path, dim);
    std::optional<ScorerParams> params2;
    if (const auto it = ckpts2.find(dim); it != ckpts2.end())
      params2 = load_dim_checkpoint(it->second, dim);

    for (int s = 0; s < 2; ++s) {
      const std::vector<SampleRecord>& samples = *splits[s];
      std::vector<double> preds = predict_scores(params, samples, mode);
      if (params2) {
        const std::vector<double> preds2 = predict_scores(*params2, samples, mode);
        preds = ensemble_average(preds, preds2);
      }
      std::vector<double> labels(samples.size());
      for (std::size_t i = 0; i < samples.size(); ++i) labels[i] = samples[i].mos(dim);
      try {
        DimCorr cell{srcc(preds, labels), plcc(preds, labels)};
        cells[static_cast<std::size_t>(dim)][static_cast<std::size_t>(s)] = cell;
      } catch (const degenerate_error& e) {
        std::cerr << "degenerate cell (" << to_label(dim) << ", "
                  << (s == 0 ? "in" : "out") << "): " << e.what() << "\n";
        degenerate = true;
      }
    }
  }

  const CorrelationReport report = partial_report(cells);
  const std::string json = report_to_json(report);
  std::cout << json << "\n";
  if (!a.out_report.empty()) {
    std::ofstream out(a.out_report, std::ios::binary);
    out << json << '\n';
    if (!out) throw std::runtime_error("failed writing " + a.out_report);
  }
  std::cerr << report_table(report);
  return degenerate ? 3 : 0;
}

// ---------------------------------------------------------------------------
// inspect-loss
// ---------------------------------------------------------------------------

int run_inspect(const InspectArgs& a) {
  std::string text = a.dists;
  if (text.empty()) text = read_text_file(a.dists_file);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("malformed distribution JSON: ") + e.what());
  }
  if (!j.is_array() || j.size() != 3)
    throw config_error("expected an array of three digit distributions");
  std::array<DigitDistribution, 3> dists{};
  for (int t = 0; t < 3; ++t) {
    const auto& row = j[static_cast<std::size_t>(t)];
    if (!row.is_array() || row.size() != 10)
      throw config_error("distribution at position " + std::to_string(t) +
                         " must hold ten probabilities");
    for (int k = 0; k < 10; ++k)
      dists[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)] =
          row[static_cast<std::size_t>(k)].get<double>();
  }

  const DigitTriple g = parse_score(a.truth);
  const TdrlBreakdown breakdown = l_score(dists, g);  // validates normalization
  const auto grad = l_score_grad_from_dists(dists, g);
  const double vd = v_d_single(dists[0][static_cast<std::size_t>(g.d0)],
                               dists[1][static_cast<std::size_t>(g.d1)],
                               dists[2][static_cast<std::size_t>(g.d2)]);

  nlohmann::ordered_json out;
  out["truth"] = format_triple(g);
  out["l_ce"] = nullptr;  // pattern log-probs are not part of this surface
  out["l_score"] = breakdown.l_score;
  out["l_score_terms"] = breakdown.l_score_terms;
  out["l_tdrl"] = nullptr;
  out["l_score_grad"] = grad;
  std::array<double, 3> row_sums{};
  for (int t = 0; t < 3; ++t)
    for (int k = 0; k < 10; ++k)
      row_sums[static_cast<std::size_t>(t)] +=
          grad[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
  out["grad_row_sums"] = row_sums;
  out["v_d"] = vd;
  std::cout << out.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// wiring
// ---------------------------------------------------------------------------

void add_data_options(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("--data-dir", d.data_dir, "directory holding the dataset JSONL files")
      ->required();
  cmd->add_option("--lo", d.lo, "score range lower bound")->capture_default_str();
  cmd->add_option("--hi", d.hi, "score range upper bound")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"image-editing quality assessment: synthetic data, digit-scorer "
               "training, metric-definition optimization, and correlation reports"};
  app.require_subcommand(1);
  // The config option lives on the top-level app: CLI11 only processes the
  // top-level config file. Keys are grouped under a [subcommand] section and
  // fallthrough lets --config be written after the subcommand name.
  app.set_config("--config", "", "read options from a config file");

  GenDataArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen-data", "generate the synthetic rating dataset");
  gen->add_option("--seed", gen_args.seed, "generator seed")->capture_default_str();
  gen->add_option("--train", gen_args.train_count, "training record count")
      ->capture_default_str();
  gen->add_option("--val-in", gen_args.val_in_count, "in-distribution validation count")
      ->capture_default_str();
  gen->add_option("--val-out", gen_args.val_out_count, "out-of-distribution validation count")
      ->capture_default_str();
  gen->add_option("--features", gen_args.features, "feature vector length")
      ->capture_default_str();
  gen->add_option("--sigma", gen_args.sigma, "annotator noise sigma")->capture_default_str();
  gen->add_option("--ood-shift", gen_args.ood_shift, "feature shift of the out split")
      ->capture_default_str();
  gen->add_option("--lo", gen_args.lo, "score range lower bound")->capture_default_str();
  gen->add_option("--hi", gen_args.hi, "score range upper bound")->capture_default_str();
  gen->add_option("--out-dir", gen_args.out_dir, "existing directory for the JSONL files")
      ->required();
  gen->add_option("--threads", gen_args.threads, "worker threads (0 = library default)")
      ->capture_default_str();
  gen->fallthrough();

  TrainArgs train_args;
  CLI::App* tr = app.add_subcommand("train", "train one dimension's scorer");
  add_data_options(tr, train_args.data);
  tr->add_option("--dimension", train_args.dimension, "scored dimension")
      ->check(CLI::IsMember({"visual", "editing", "preservation"}))
      ->capture_default_str();
  tr->add_option("--loss", train_args.loss, "training objective")
      ->check(CLI::IsMember({"tdrl", "ce-only"}))
      ->capture_default_str();
  tr->add_option("--definition", train_args.definition,
                 "metric definition text (overrides --definition-file)");
  tr->add_option("--definition-file", train_args.definition_file,
                 "file holding the metric definition text");
  tr->add_option("--epochs", train_args.epochs)->capture_default_str();
  tr->add_option("--batch", train_args.batch)->capture_default_str();
  tr->add_option("--lr", train_args.lr, "peak learning rate")->capture_default_str();
  tr->add_option("--warmup-ratio", train_args.warmup_ratio, "LR warmup fraction")
      ->capture_default_str();
  tr->add_option("--seed", train_args.seed)->capture_default_str();
  tr->add_flag("--ce-digits", train_args.ce_digits,
               "also apply cross-entropy to digit positions under tdrl");
  tr->add_option("--embed-dim", train_args.embed_dim)->capture_default_str();
  tr->add_option("--hidden-dim", train_args.hidden_dim)->capture_default_str();
  tr->add_option("--init-ckpt", train_args.init_ckpt,
                 "checkpoint to fine-tune from (fresh init when omitted)")
      ->check(CLI::ExistingFile);
  tr->add_option("--out-ckpt", train_args.out_ckpt, "checkpoint output path")->required();
  tr->add_option("--out-report", train_args.out_report, "training report JSON path");
  tr->add_flag("--progress", train_args.progress, "print per-epoch losses to stderr");
  tr->add_option("--threads", train_args.threads, "worker threads (0 = library default)")
      ->capture_default_str();
  tr->fallthrough();

  FdmpoArgs fd_args;
  CLI::App* fd = app.add_subcommand(
      "fdmpo", "optimize the metric definition against the definition value");
  add_data_options(fd, fd_args.data);
  fd->add_option("--dimension", fd_args.dimension)
      ->check(CLI::IsMember({"visual", "editing", "preservation"}))
      ->capture_default_str();
  fd->add_option("--definition", fd_args.definition,
                 "initial definition text (overrides --definition-file)");
  fd->add_option("--definition-file", fd_args.definition_file,
                 "file holding the initial definition");
  fd->add_option("--budget", fd_args.budget, "number of proposals after the initial trial")
      ->capture_default_str();
  fd->add_option("--samples", fd_args.samples, "fixed V_d evaluation subset size")
      ->capture_default_str();
  fd->add_option("--seed", fd_args.seed)->capture_default_str();
  fd->add_option("--optimizer", fd_args.optimizer, "proposal source")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  fd->add_option("--pool-file", fd_args.pool_file,
                 "JSON array of candidate definitions for the mock optimizer");
  fd->add_option("--base-url", fd_args.base_url, "http optimizer base URL");
  fd->add_option("--model", fd_args.model, "http optimizer model identifier")
      ->capture_default_str();
  fd->add_option("--temperature", fd_args.temperature)->capture_default_str();
  fd->add_option("--timeout-ms", fd_args.timeout_ms)->capture_default_str();
  fd->add_option("--max-retries", fd_args.max_retries)->capture_default_str();
  fd->add_option("--warmup-epochs", fd_args.warmup_epochs,
                 "scorer warmup epochs before the loop")
      ->capture_default_str();
  fd->add_option("--batch", fd_args.batch)->capture_default_str();
  fd->add_option("--lr", fd_args.lr, "warmup peak learning rate")->capture_default_str();
  fd->add_option("--embed-dim", fd_args.embed_dim)->capture_default_str();
  fd->add_option("--hidden-dim", fd_args.hidden_dim)->capture_default_str();
  fd->add_option("--out-dir", fd_args.out_dir,
                 "existing directory for history.jsonl, trajectory.csv, best_definition.txt")
      ->required();
  fd->add_option("--threads", fd_args.threads, "worker threads (0 = library default)")
      ->capture_default_str();
  fd->fallthrough();

  EvalArgs eval_args;
  CLI::App* ev = app.add_subcommand("eval", "correlation report over the validation splits");
  add_data_options(ev, eval_args.data);
  ev->add_option("--ckpt", eval_args.ckpt, "dimension=path checkpoint assignment (repeatable)")
      ->required();
  ev->add_option("--ckpt2", eval_args.ckpt2,
                 "second checkpoint per dimension; predictions are averaged");
  ev->add_option("--decode", eval_args.decode, "score decoding mode")
      ->check(CLI::IsMember({"greedy", "expected"}))
      ->capture_default_str();
  ev->add_option("--out-report", eval_args.out_report, "report JSON output path");
  ev->add_flag("--logistic-fit", eval_args.logistic_fit,
               "reserved: logistic regression before PLCC (not implemented)");
  ev->add_option("--threads", eval_args.threads, "worker threads (0 = library default)")
      ->capture_default_str();
  ev->fallthrough();

  InspectArgs ins_args;
  CLI::App* ins = app.add_subcommand(
      "inspect-loss", "distance loss, gradient, and definition value of explicit distributions");
  ins->add_option("--dists", ins_args.dists,
                  "inline JSON: three arrays of ten digit probabilities");
  ins->add_option("--dists-file", ins_args.dists_file, "file holding the same JSON");
  ins->add_option("--truth", ins_args.truth, "ground-truth score, e.g. 4.20")->required();
  ins->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub == ins && ins_args.dists.empty() == ins_args.dists_file.empty()) {
    std::cerr << "error: inspect-loss needs exactly one of --dists / --dists-file\n";
    return 2;
  }

  // The echo is itself a loadable --config file (section included).
  std::cerr << "# effective config: " << sub->get_name() << "\n"
            << "[" << sub->get_name() << "]\n"
            << sub->config_to_str(true, false);

  try {
    if (sub == gen) return run_gen_data(gen_args);
    if (sub == tr) return run_train(train_args);
    if (sub == fd) return run_fdmpo_cmd(fd_args);
    if (sub == ev) return run_eval(eval_args);
    if (sub == ins) return run_inspect(ins_args);
    std::cerr << "error: unknown subcommand\n";
    return 2;
  } catch (const endpoint_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const degenerate_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
