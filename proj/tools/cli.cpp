#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnaembed/channel.hpp"
#include "dnaembed/diagnostics.hpp"
#include "dnaembed/json_io.hpp"
#include "dnaembed/metrics.hpp"
#include "dnaembed/montecarlo.hpp"
#include "dnaembed/nets.hpp"
#include "dnaembed/trainer.hpp"

namespace dnaembed::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path default_out(const std::string& leaf) {
  const char* env = std::getenv(kOutEnv);
  fs::path base = (env != nullptr && *env != '\0') ? fs::path(env) : fs::path(".");
  return base / leaf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw std::runtime_error("expected output missing: " + p.string());
}

// Filled in by each subcommand; persisted by run() whatever happens.
struct Manifest {
  std::string subcommand;
  json config = json::object();
  json seeds = json::object();
  json inputs = json::object();
  json outputs = json::object();
  fs::path path;

  void write(bool ok, const std::string& error, double seconds) const {
    if (path.empty()) return;
    json j = {{"subcommand", subcommand}, {"config", config},   {"seeds", seeds},
              {"inputs", inputs},         {"outputs", outputs}, {"tool_version", kToolVersion},
              {"started", utc_now()},     {"wall_seconds", seconds},
              {"status", ok ? "ok" : "error"}};
    if (!ok) j["error"] = error;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream f(path);
    if (f) f << j.dump(2) << '\n';
  }
};

std::vector<double> parse_rates(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::invalid_argument("--rates: '" + item + "' is not a number");
    }
  }
  if (v.size() != 3 && v.size() != 4) {
    throw std::invalid_argument("--rates expects p_sub,p_ins,p_del[,p_fail]");
  }
  return v;
}

// ---------------------------------------------------------------- gen-data

struct GenOpts {
  std::size_t refs = 200;
  std::size_t ref_len = 152;
  std::size_t reads_per_ref = 10;
  std::string rates = "0.003,0.003,0.004";
  std::size_t pad = 0;
  double split = 0.8;
  std::uint64_t seed = 0;
  std::size_t max_dup = BalanceOptions{}.max_duplication;
  std::string out;
};

void gen_data(const GenOpts& o, Manifest& m, std::ostream& out, std::ostream& err) {
  const fs::path dir = o.out.empty() ? default_out("data") : fs::path(o.out);
  m.path = dir / "manifest.json";
  const auto rates = parse_rates(o.rates);
  ChannelParams ch{rates[0], rates[1], rates[2], rates.size() > 3 ? rates[3] : 0.0, o.seed};
  const std::size_t pad = o.pad == 0 ? default_padded_len(o.ref_len) : o.pad;
  m.config = {{"refs", o.refs},   {"ref_len", o.ref_len},   {"reads_per_ref", o.reads_per_ref},
              {"p_sub", ch.p_sub}, {"p_ins", ch.p_ins},      {"p_del", ch.p_del},
              {"p_fail", ch.p_fail}, {"pad", pad},          {"split", o.split},
              {"max_dup", o.max_dup}};
  m.seeds = {{"seed", o.seed}};
  ch.validate();
  if (o.ref_len == 0) throw std::invalid_argument("--ref-len must be positive");
  if (pad < o.ref_len) {
    throw std::invalid_argument("--pad " + std::to_string(pad) + " is shorter than --ref-len " +
                                std::to_string(o.ref_len));
  }

  fs::create_directories(dir);
  const auto refs = gen_references(o.refs, o.ref_len, o.seed);
  const auto [train_refs, test_refs] = split_by_reference(refs, o.split);
  const BalanceOptions balance{true, o.max_dup};

  // Train and test draw from separate channel and pairing streams.
  ChannelParams ch_train = ch, ch_test = ch;
  ch_train.seed = Rng(o.seed, 3).next_u64();
  ch_test.seed = Rng(o.seed, 4).next_u64();
  const std::uint64_t pair_train = Rng(o.seed, 5).next_u64();
  const std::uint64_t pair_test = Rng(o.seed, 6).next_u64();

  auto make = [&](const std::vector<DnaSeq>& r, const ChannelParams& c, std::uint64_t s,
                  DatasetRole role, const char* name) {
    Dataset ds;
    ds.padded_len = pad;
    ds.role = role;
    if (r.size() >= 2) {
      ds = build_pairs(r, o.reads_per_ref, c, pad, s, role, balance);
    } else {
      err << "warning: " << name << " split has " << r.size()
          << " reference(s); writing an empty " << name << " set\n";
    }
    return ds;
  };
  const Dataset train = make(train_refs, ch_train, pair_train, DatasetRole::Train, "train");
  const Dataset test = make(test_refs, ch_test, pair_test, DatasetRole::Test, "test");

  save_dataset(dir / "train.csv", train);
  save_dataset(dir / "test.csv", test);
  save_reads(dir / "train_refs.txt", train_refs);
  save_reads(dir / "test_refs.txt", test_refs);
  const json info = {
      {"padded_len", pad},
      {"ref_len", o.ref_len},
      {"train", {{"references", train_refs.size()},
                 {"homologous", train.homologous_count()},
                 {"non_homologous", train.non_homologous_count()},
                 {"mean_non_homologous_distance", train.mean_non_homologous_distance()}}},
      {"test", {{"references", test_refs.size()},
                {"homologous", test.homologous_count()},
                {"non_homologous", test.non_homologous_count()},
                {"mean_non_homologous_distance", test.mean_non_homologous_distance()}}}};
  write_json(dir / "dataset.json", info);

  for (const char* f : {"train.csv", "test.csv", "train_refs.txt", "test_refs.txt", "dataset.json"}) {
    require_file(dir / f);
    m.outputs[f] = (dir / f).string();
  }
  out << "train: " << train.samples.size() << " pairs, test: " << test.samples.size()
      << " pairs, written to " << dir.string() << '\n';
}

std::size_t dataset_padded_len(const fs::path& data_dir) {
  const fs::path info = data_dir / "dataset.json";
  if (!fs::exists(info)) throw std::runtime_error("no dataset.json in " + data_dir.string());
  return read_json(info).at("padded_len").get<std::size_t>();
}

// ---------------------------------------------------------------- train

struct TrainOpts {
  std::string data;
  std::string config;
  std::string arch = "cnn-ed-5";
  std::string space = "sqeuclid";
  std::string loss = "rechi2";
  std::string dim = "80";
  std::size_t epochs = TrainConfig{}.epochs;
  std::size_t batch_size = TrainConfig{}.batch_size;
  double lr = OptimizerConfig{}.lr;
  std::string optimizer = "adam";
  std::uint64_t seed = 0;
  std::size_t fc_hidden = ModelSpec{}.fc_hidden;
  std::size_t hidden_size = ModelSpec{}.hidden_size;
  bool validate = false;
  std::optional<double> k;
  std::size_t runs = 1;
  std::string out;
};

std::size_t parse_dim(const std::string& text, const Dataset& train) {
  if (text == "auto") {
    const double mean = train.mean_non_homologous_distance();
    const auto n = static_cast<std::size_t>(std::llround(mean));
    if (n == 0) throw std::invalid_argument("--dim auto: training set has no non-homologous pairs");
    return n;
  }
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw std::invalid_argument("--dim must be a positive integer or 'auto', got '" + text + "'");
  }
  if (v <= 0) throw std::invalid_argument("--dim must be at least 1, got " + text);
  return static_cast<std::size_t>(v);
}

void train_cmd(const TrainOpts& o, const CLI::App& app, Manifest& m, std::ostream& out,
               std::ostream& err) {
  auto given = [&app](const char* name) { return app.get_option(name)->count() > 0; };
  const fs::path ckpt = o.out.empty() ? default_out("model.ckpt") : fs::path(o.out);
  m.path = fs::path(ckpt.string() + ".manifest.json");

  ModelSpec spec;
  TrainConfig cfg;
  std::string dim = o.dim;
  std::string data = o.data;
  bool validate = o.validate;
  std::optional<double> k = o.k;
  std::size_t runs = o.runs;
  if (!o.config.empty()) {
    const json c = read_json(o.config);
    m.inputs["config"] = o.config;
    for (const auto& [key, value] : c.items()) {
      if (key == "model") spec = spec_from_json(value, spec);
      else if (key == "train") cfg = train_config_from_json(value, cfg);
      else if (key == "dim") dim = value.is_string() ? value.get<std::string>() : value.dump();
      else if (key == "data") data = value.get<std::string>();
      else if (key == "validate") validate = value.get<bool>();
      else if (key == "k") k = value.get<double>();
      else if (key == "runs") runs = value.get<std::size_t>();
      else throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  if (given("--data")) data = o.data;
  if (given("--arch")) spec.arch = parse_arch(o.arch);
  if (given("--fc-hidden")) spec.fc_hidden = o.fc_hidden;
  if (given("--hidden-size")) spec.hidden_size = o.hidden_size;
  if (given("--dim")) dim = o.dim;
  if (given("--space")) cfg.space = parse_space(o.space);
  if (given("--loss")) cfg.loss.kind = parse_loss(o.loss);
  if (given("--epochs")) cfg.epochs = o.epochs;
  if (given("--batch-size")) cfg.batch_size = o.batch_size;
  if (given("--lr")) cfg.optimizer.lr = o.lr;
  if (given("--optimizer")) cfg.optimizer.kind = parse_optimizer(o.optimizer);
  if (given("--seed")) cfg.seed = o.seed;
  if (given("--validate")) validate = o.validate;
  if (given("--k")) k = o.k;
  if (given("--runs")) runs = o.runs;
  if (runs == 0) throw std::invalid_argument("--runs must be at least 1");
  if (data.empty()) throw std::invalid_argument("--data is required");

  const fs::path dir(data);
  const std::size_t pad = dataset_padded_len(dir);
  spec.input_len = pad;
  m.inputs["data"] = dir.string();
  const Dataset train_set = load_dataset(dir / "train.csv", pad, DatasetRole::Train);
  spec.embed_dim = parse_dim(dim, train_set);
  cfg.validate();
  spec.validate();
  const double k_value = k.value_or(static_cast<double>(spec.embed_dim) / 2.0);

  const json resolved = {{"model", spec_to_json(spec)}, {"train", train_config_to_json(cfg)},
                         {"dim", std::to_string(spec.embed_dim)}, {"data", dir.string()},
                         {"validate", validate}, {"k", k_value}, {"runs", runs}};
  m.config = resolved;
  json run_seeds = json::array();
  for (std::size_t r = 0; r < runs; ++r) run_seeds.push_back(cfg.seed + r);
  m.seeds = {{"seed", cfg.seed}, {"runs", run_seeds}};

  if (cfg.loss.kind == LossKind::REchi2 && cfg.space != SpaceKind::SqEuclid) {
    err << "warning: the rechi2 loss is incompatible with the l1 and l2 embeddings; training anyway\n";
  }

  std::optional<Dataset> test_set;
  if (validate) test_set = load_dataset(dir / "test.csv", pad, DatasetRole::Test);
  if (test_set && test_set->samples.empty()) {
    err << "warning: test set is empty; validation disabled\n";
    test_set.reset();
  }

  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  // One run keeps the given path; repeated runs get model.run<r>.ckpt etc.
  auto run_path = [&](std::size_t r) {
    if (runs == 1) return ckpt;
    return ckpt.parent_path() /
           (ckpt.stem().string() + ".run" + std::to_string(r) + ckpt.extension().string());
  };

  std::ostringstream summary;
  summary << "run,seed,checkpoint,final_loss,ae,ae_h,oa\n" << std::setprecision(17);
  json outputs = json::array();
  for (std::size_t r = 0; r < runs; ++r) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = cfg.seed + r;
    const fs::path path = run_path(r);
    const fs::path epochs_csv = path.string() + ".epochs.csv";
    const fs::path config_json = path.string() + ".config.json";
    json run_resolved = resolved;
    run_resolved["train"] = train_config_to_json(run_cfg);
    run_resolved["runs"] = 1;
    write_json(config_json, run_resolved);

    std::ofstream log(epochs_csv);
    if (!log) throw std::runtime_error("cannot write " + epochs_csv.string());
    log << "epoch,loss,seconds,ae,ae_h,oa\n" << std::setprecision(17);

    Model model = Model::build(spec, run_cfg.seed);
    if (runs > 1) out << "run " << r << " (seed " << run_cfg.seed << ")\n";
    out << arch_name(spec.arch) << ": " << model.parameter_count() << " parameters, n = "
        << spec.embed_dim << ", " << train_set.samples.size() << " training pairs\n";
    EpochReport last;
    train(model, train_set, run_cfg, test_set ? &*test_set : nullptr, k_value,
          [&](const EpochReport& rep) {
            last = rep;
            log << rep.epoch << ',' << rep.mean_loss << ',' << rep.seconds;
            out << "epoch " << rep.epoch << " loss " << rep.mean_loss;
            if (rep.validation) {
              log << ',' << rep.validation->ae << ',' << rep.validation->ae_h << ','
                  << rep.validation->oa_best;
              out << " ae " << rep.validation->ae << " ae_h " << rep.validation->ae_h << " oa "
                  << rep.validation->oa_best;
            } else {
              log << ",,,";
            }
            log << '\n';
            log.flush();
            out << '\n';
          });
    log.close();

    const json meta = {{"train", train_config_to_json(run_cfg)}, {"k", k_value}};
    save_checkpoint(model, path, meta.dump());
    for (const fs::path& p : {path, epochs_csv, config_json}) require_file(p);
    outputs.push_back({{"checkpoint", path.string()},
                       {"epochs", epochs_csv.string()},
                       {"config", config_json.string()}});
    summary << r << ',' << run_cfg.seed << ',' << path.string() << ',' << last.mean_loss;
    if (last.validation) {
      summary << ',' << last.validation->ae << ',' << last.validation->ae_h << ','
              << last.validation->oa_best;
    } else {
      summary << ",,,";
    }
    summary << '\n';
  }
  if (runs == 1) {
    m.outputs = outputs[0];
  } else {
    const fs::path runs_csv = ckpt.string() + ".runs.csv";
    std::ofstream f(runs_csv);
    f << summary.str();
    f.close();
    require_file(runs_csv);
    m.outputs = {{"runs", outputs}, {"summary", runs_csv.string()}};
  }
}

// ---------------------------------------------------------------- eval

struct EvalOpts {
  std::string ckpt;
  std::string data;
  std::string scores;
  std::optional<double> k;
  std::string out;
};

// `d,dhat,homologous` rows, header optional.
std::vector<ScoredPair> load_scores(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::vector<ScoredPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("d,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string a, b, c;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected d,dhat,homologous");
    }
    try {
      pairs.push_back({std::stod(a), std::stod(b), std::stoi(c) != 0});
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return pairs;
}

SpaceKind checkpoint_space(const fs::path& ckpt) {
  const std::string meta = load_checkpoint_metadata(ckpt);
  if (meta.empty()) return SpaceKind::SqEuclid;
  const json j = json::parse(meta);
  if (j.contains("train") && j["train"].contains("space")) {
    return parse_space(j["train"]["space"].get<std::string>());
  }
  return SpaceKind::SqEuclid;
}

void eval_cmd(const EvalOpts& o, Manifest& m, std::ostream& out) {
  const fs::path dir = o.out.empty() ? default_out("eval") : fs::path(o.out);
  m.path = dir / "manifest.json";
  std::vector<ScoredPair> scored;
  double k = 0.0;
  if (!o.scores.empty()) {
    m.inputs = {{"scores", o.scores}};
    scored = load_scores(o.scores);
    if (!o.k) throw std::invalid_argument("--k is required with --scores");
    k = *o.k;
  } else {
    if (o.ckpt.empty() || o.data.empty()) {
      throw std::invalid_argument("eval needs --ckpt and --data (or --scores)");
    }
    m.inputs = {{"ckpt", o.ckpt}, {"data", o.data}};
    Model model = load_checkpoint(o.ckpt);
    const std::size_t pad = dataset_padded_len(o.data);
    if (pad != model.spec().input_len) {
      throw std::invalid_argument("checkpoint expects padded length " +
                                  std::to_string(model.spec().input_len) + " but " + o.data +
                                  " is padded to " + std::to_string(pad));
    }
    const Dataset test = load_dataset(fs::path(o.data) / "test.csv", pad, DatasetRole::Test);
    k = o.k.value_or(static_cast<double>(model.spec().embed_dim) / 2.0);
    scored = score_dataset(model, test, checkpoint_space(o.ckpt));
  }
  m.config = {{"k", k}};
  const MetricsReport report = compute_metrics(scored, k);
  fs::create_directories(dir);
  write_metrics_csv(dir / "metrics.csv", report);
  write_json(dir / "metrics.json", metrics_to_json(report));
  require_file(dir / "metrics.csv");
  require_file(dir / "metrics.json");
  m.outputs = {{"metrics_csv", (dir / "metrics.csv").string()},
               {"metrics_json", (dir / "metrics.json").string()}};
  out << "ae " << report.ae << " ae_h " << report.ae_h << " oa@" << report.k << " "
      << report.oa_at_k << " oa_best " << report.oa_best << " (k=" << report.k_best << ")\n";
}

// ---------------------------------------------------------------- diagnose

struct DiagOpts {
  std::string ckpt;
  std::string data;
  std::string embeddings;
  std::size_t bins = 40;
  std::string out;
};

EmbeddingMatrix load_embeddings(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  EmbeddingMatrix rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void diagnose_cmd(const DiagOpts& o, Manifest& m, std::ostream& out) {
  const fs::path dir = o.out.empty() ? default_out("diagnose") : fs::path(o.out);
  m.path = dir / "manifest.json";
  m.config = {{"bins", o.bins}};
  EmbeddingMatrix rows;
  if (!o.embeddings.empty()) {
    m.inputs = {{"embeddings", o.embeddings}};
    rows = load_embeddings(o.embeddings);
  } else {
    if (o.ckpt.empty() || o.data.empty()) {
      throw std::invalid_argument("diagnose needs --ckpt and --data (or --embeddings)");
    }
    m.inputs = {{"ckpt", o.ckpt}, {"data", o.data}};
    Model model = load_checkpoint(o.ckpt);
    const std::size_t pad = dataset_padded_len(o.data);
    if (pad != model.spec().input_len) {
      throw std::invalid_argument("checkpoint expects padded length " +
                                  std::to_string(model.spec().input_len) + " but " + o.data +
                                  " is padded to " + std::to_string(pad));
    }
    const Dataset test = load_dataset(fs::path(o.data) / "test.csv", pad, DatasetRole::Test);
    rows = embed_raw(model, distinct_sequences(test));
  }
  const DiagnosticsReport report = diagnose(rows, o.bins);
  fs::create_directories(dir);
  write_diagnostics(dir, report);
  for (const char* f : {"stats.csv", "qq.csv", "pcc.csv", "pcc_hist.csv"}) {
    require_file(dir / f);
    m.outputs[f] = (dir / f).string();
  }
  out << rows.size() << " embeddings of dimension " << report.pcc.n << " diagnosed into "
      << dir.string() << '\n';
}

// ---------------------------------------------------------------- montecarlo

struct McOpts {
  std::size_t n = 80;
  std::size_t dmax = 80;
  std::size_t trials = 20000;
  std::string ortho = "haar";
  bool rescale = false;
  bool explicit_haar = false;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
};

void montecarlo_cmd(const McOpts& o, Manifest& m, std::ostream& out) {
  const fs::path dir = o.out.empty() ? default_out("montecarlo") : fs::path(o.out);
  m.path = dir / "manifest.json";
  SimConfig cfg;
  cfg.n = o.n;
  cfg.trials = o.trials;
  cfg.ortho = parse_ortho(o.ortho);
  cfg.rescale_at_n = o.rescale;
  cfg.explicit_haar = o.explicit_haar;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  for (std::size_t d = 1; d <= o.dmax; ++d) cfg.d_values.push_back(d);
  m.config = {{"n", cfg.n},           {"dmax", o.dmax},
              {"trials", cfg.trials}, {"ortho", ortho_name(cfg.ortho)},
              {"rescale_at_n", cfg.rescale_at_n}, {"explicit_haar", cfg.explicit_haar},
              {"threads", cfg.threads}};
  m.seeds = {{"seed", cfg.seed}};
  cfg.validate();
  const SweepResult result = sweep_expected_distance(cfg);
  fs::create_directories(dir);
  write_sweep_csv(dir / "sweep.csv", result);
  require_file(dir / "sweep.csv");
  m.outputs = {{"sweep", (dir / "sweep.csv").string()}};
  out << result.cells.size() << " sweep cells written to " << (dir / "sweep.csv").string() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"DNA read embeddings: data generation, training, evaluation and simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GenOpts gen;
  auto* g = app.add_subcommand("gen-data", "simulate references and reads, write train/test pairs");
  g->add_option("--refs", gen.refs, "number of references")->capture_default_str();
  g->add_option("--ref-len", gen.ref_len, "reference length")->capture_default_str();
  g->add_option("--reads-per-ref", gen.reads_per_ref, "reads per reference")->capture_default_str();
  g->add_option("--rates", gen.rates, "p_sub,p_ins,p_del[,p_fail]")->capture_default_str();
  g->add_option("--pad", gen.pad, "padded length (default: ref-len rounded up to 32)");
  g->add_option("--split", gen.split, "fraction of references used for training")
      ->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--max-dup", gen.max_dup, "copies per homologous sample when balancing")
      ->capture_default_str();
  g->add_option("--out", gen.out, "output directory");

  TrainOpts tr;
  auto* t = app.add_subcommand("train", "train an embedding network");
  t->add_option("--data", tr.data, "directory written by gen-data");
  t->add_option("--config", tr.config, "JSON config; flags take precedence");
  t->add_option("--arch", tr.arch, "cnn-ed-5, cnn-ed-10, rnn or gru")->capture_default_str();
  t->add_option("--space", tr.space, "l1, l2 or sqeuclid")->capture_default_str();
  t->add_option("--loss", tr.loss, "mse, mae or rechi2")->capture_default_str();
  t->add_option("--dim", tr.dim, "embedding dimension or 'auto'")->capture_default_str();
  t->add_option("--epochs", tr.epochs)->capture_default_str();
  t->add_option("--batch-size", tr.batch_size)->capture_default_str();
  t->add_option("--lr", tr.lr)->capture_default_str();
  t->add_option("--optimizer", tr.optimizer, "adam or sgd")->capture_default_str();
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_option("--fc-hidden", tr.fc_hidden)->capture_default_str();
  t->add_option("--hidden-size", tr.hidden_size, "recurrent hidden size")->capture_default_str();
  t->add_flag("--validate", tr.validate, "score test.csv after every epoch");
  t->add_option("--k", tr.k, "validation threshold (default n/2)");
  t->add_option("--runs", tr.runs, "independent runs, seeds seed, seed+1, ...")->capture_default_str();
  t->add_option("--out", tr.out, "checkpoint path");

  EvalOpts ev;
  auto* e = app.add_subcommand("eval", "score a test set");
  e->add_option("--ckpt", ev.ckpt);
  e->add_option("--data", ev.data);
  e->add_option("--scores", ev.scores, "CSV d,dhat,homologous instead of a model");
  e->add_option("--k", ev.k, "threshold (default n/2)");
  e->add_option("--out", ev.out, "output directory");

  DiagOpts dg;
  auto* d = app.add_subcommand("diagnose", "element statistics, QQ and PCC of test embeddings");
  d->add_option("--ckpt", dg.ckpt);
  d->add_option("--data", dg.data);
  d->add_option("--embeddings", dg.embeddings, "CSV of embedding rows instead of a model");
  d->add_option("--bins", dg.bins, "PCC histogram bins")->capture_default_str();
  d->add_option("--out", dg.out, "output directory");

  McOpts mc;
  auto* s = app.add_subcommand("montecarlo", "expected distance versus degrees of freedom");
  s->add_option("--n", mc.n)->capture_default_str();
  s->add_option("--dmax", mc.dmax)->capture_default_str();
  s->add_option("--trials", mc.trials)->capture_default_str();
  s->add_option("--ortho", mc.ortho, "haar, signedperm or identity")->capture_default_str();
  s->add_flag("--rescale-at-80,--rescale-at-n", mc.rescale, "scale each kind so its mean at d=n is n");
  s->add_flag("--explicit-haar", mc.explicit_haar, "build a full Haar matrix per trial");
  s->add_option("--seed", mc.seed)->capture_default_str();
  s->add_option("--threads", mc.threads, "workers over d; 1 is bit-exact")->capture_default_str();
  s->add_option("--out", mc.out, "output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    return app.exit(ex, out, err);
  }

  Manifest manifest;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    if (g->parsed()) {
      manifest.subcommand = "gen-data";
      gen_data(gen, manifest, out, err);
    } else if (t->parsed()) {
      manifest.subcommand = "train";
      train_cmd(tr, *t, manifest, out, err);
    } else if (e->parsed()) {
      manifest.subcommand = "eval";
      eval_cmd(ev, manifest, out);
    } else if (d->parsed()) {
      manifest.subcommand = "diagnose";
      diagnose_cmd(dg, manifest, out);
    } else if (s->parsed()) {
      manifest.subcommand = "montecarlo";
      montecarlo_cmd(mc, manifest, out);
    }
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    manifest.write(false, ex.what(), elapsed());
    return 1;
  }
  manifest.write(true, {}, elapsed());
  return 0;
}

}  // namespace dnaembed::cli
