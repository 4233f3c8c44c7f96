// Copyright 2026 The psyhide Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line frontend.  Everything runs through the public C API in
// psyhide.h; this translation unit never touches the core library directly.

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "psyhide.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoConverge = 2;

int fail(const std::string& context) {
  std::cerr << "psyhide: " << context << ": " << ph_last_error() << "\n";
  return kExitUsage;
}

struct SignalDeleter {
  void operator()(ph_signal* s) const { ph_signal_free(s); }
};
struct ModelDeleter {
  void operator()(ph_model* m) const { ph_model_free(m); }
};
struct ReportDeleter {
  void operator()(ph_report* r) const { ph_report_free(r); }
};
struct ThresholdsDeleter {
  void operator()(ph_thresholds* t) const { ph_thresholds_free(t); }
};

using SignalPtr = std::unique_ptr<ph_signal, SignalDeleter>;
using ModelPtr = std::unique_ptr<ph_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<ph_report, ReportDeleter>;
using ThresholdsPtr = std::unique_ptr<ph_thresholds, ThresholdsDeleter>;

SignalPtr load_signal(const std::string& path, ph_status* status) {
  ph_signal* raw = nullptr;
  *status = ph_signal_read_wav(path.c_str(), &raw);
  return SignalPtr(raw);
}

ModelPtr load_model(const std::string& ckpt, const std::string& lexicon,
                    ph_status* status) {
  ph_model* raw = nullptr;
  *status = ph_model_load(ckpt.c_str(), lexicon.c_str(), &raw);
  return ModelPtr(raw);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// ---------------------------------------------------------------- attack

struct AttackArgs {
  std::string in_path;
  std::string target;
  std::string model_path;
  std::string lexicon_path;
  std::string out_path;
  std::string report_path;
  std::string dump_dir;
  double lambda_db = 20.0;
  int iterations = 500;
  double learning_rate = 0.05;
  int check_every = 100;
  double phone_rate_limit = 6.0;
  std::uint64_t seed = 0;
  int realign_every = 0;
  bool no_thresholds = false;
  bool equal_align = false;
};

int run_attack_cmd(const AttackArgs& args) {
  ph_status st;
  SignalPtr original = load_signal(args.in_path, &st);
  if (st != PH_OK) return fail("reading " + args.in_path);
  ModelPtr model = load_model(args.model_path, args.lexicon_path, &st);
  if (st != PH_OK) return fail("loading model");

  ph_attack_config cfg;
  ph_attack_config_defaults(&cfg);
  cfg.lambda_db = args.lambda_db;
  cfg.learning_rate = args.learning_rate;
  cfg.max_iterations = args.iterations;
  cfg.check_every = args.check_every;
  cfg.use_thresholds = args.no_thresholds ? 0 : 1;
  cfg.use_forced_alignment = args.equal_align ? 0 : 1;
  cfg.seed = args.seed;
  cfg.realign_every = args.realign_every;
  cfg.phone_rate_limit = args.phone_rate_limit;
  if (!args.dump_dir.empty()) cfg.dump_spectra_dir = args.dump_dir.c_str();

  ph_signal* adv_raw = nullptr;
  ph_report* rep_raw = nullptr;
  st = ph_attack_run(original.get(), args.target.c_str(), model.get(), &cfg,
                     &adv_raw, &rep_raw);
  if (st != PH_OK) return fail("attack");
  SignalPtr adversarial(adv_raw);
  ReportPtr report(rep_raw);

  size_t clipped = 0;
  st = ph_signal_write_wav(adversarial.get(), args.out_path.c_str(), &clipped);
  if (st != PH_OK) return fail("writing " + args.out_path);
  if (clipped > 0) {
    std::cerr << "psyhide: warning: " << clipped
              << " samples clipped while writing " << args.out_path << "\n";
  }

  const std::string report_path =
      args.report_path.empty() ? args.out_path + ".report.json"
                               : args.report_path;
  char* json = nullptr;
  st = ph_report_to_json(report.get(), &json);
  if (st != PH_OK) return fail("serializing report");
  {
    std::ofstream out(report_path);
    out << json;
    ph_string_free(json);
    if (!out) {
      std::cerr << "psyhide: cannot write report: " << report_path << "\n";
      return kExitUsage;
    }
  }

  const bool success = ph_report_success(report.get()) != 0;
  std::cout << (success ? "success" : "no convergence") << " after "
            << ph_report_iterations(report.get())
            << " iterations; WER " << format_double(ph_report_final_wer(report.get()))
            << ", phi " << format_double(ph_report_phi_db(report.get()))
            << " dB, SNR " << format_double(ph_report_snr_db(report.get()))
            << " dB\n";
  return success ? kExitOk : kExitNoConverge;
}

// ----------------------------------------------------------------- sweep

struct SweepArgs {
  std::string corpus_dir;
  std::string targets_path;
  std::string model_path;
  std::string lexicon_path;
  std::string out_dir;
  std::vector<std::string> lambdas = {"none", "0", "20", "40"};
  std::vector<int> budgets = {500};
  double learning_rate = 0.05;
  int check_every = 100;
  double phone_rate_limit = 6.0;
  std::uint64_t seed = 0;
  int workers = 0;
  bool equal_align = false;
};

struct SweepRow {
  std::string utterance;
  std::string target;
  std::string lambda;
  int budget = 0;
  bool ok = false;
  bool success = false;
  int iterations = 0;
  double final_wer = 0.0;
  double phi_db = 0.0;
  double snr_db = 0.0;
  std::string error;
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream probe(line);
    std::string word;
    if (probe >> word) lines.push_back(line);
  }
  return lines;
}

std::string csv_escape(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

int run_sweep_cmd(const SweepArgs& args) {
  namespace fs = std::filesystem;

  std::vector<std::string> targets;
  std::vector<std::pair<std::string, std::string>> wavs;  // id, path
  try {
    targets = read_lines(args.targets_path);
    std::ifstream trans(args.corpus_dir + "/transcripts.txt");
    if (!trans) {
      throw std::runtime_error("missing transcripts.txt in " + args.corpus_dir);
    }
    std::string line;
    while (std::getline(trans, line)) {
      std::istringstream ls(line);
      std::string id;
      if (ls >> id) wavs.emplace_back(id, args.corpus_dir + "/" + id + ".wav");
    }
  } catch (const std::exception& e) {
    std::cerr << "psyhide: " << e.what() << "\n";
    return kExitUsage;
  }
  if (targets.empty() || wavs.empty()) {
    std::cerr << "psyhide: sweep needs at least one utterance and target\n";
    return kExitUsage;
  }

  ph_status st;
  ModelPtr model = load_model(args.model_path, args.lexicon_path, &st);
  if (st != PH_OK) return fail("loading model");

  std::error_code ec;
  fs::create_directories(args.out_dir, ec);
  if (ec) {
    std::cerr << "psyhide: cannot create " << args.out_dir << "\n";
    return kExitUsage;
  }

  struct Job {
    std::size_t wav;
    std::size_t target;
    std::size_t lambda;
    std::size_t budget;
  };
  std::vector<Job> jobs;
  for (std::size_t w = 0; w < wavs.size(); ++w) {
    for (std::size_t t = 0; t < targets.size(); ++t) {
      for (std::size_t l = 0; l < args.lambdas.size(); ++l) {
        for (std::size_t b = 0; b < args.budgets.size(); ++b) {
          jobs.push_back({w, t, l, b});
        }
      }
    }
  }
  std::vector<SweepRow> rows(jobs.size());

  int workers = args.workers;
  if (workers <= 0) {
    if (const char* env = std::getenv("PSYHIDE_WORKERS")) {
      workers = std::atoi(env);
    }
  }
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
  }
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));

  std::atomic<std::size_t> next{0};
  auto worker_fn = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= jobs.size()) return;
      const Job& job = jobs[idx];
      SweepRow& row = rows[idx];
      row.utterance = wavs[job.wav].first;
      row.target = targets[job.target];
      row.lambda = args.lambdas[job.lambda];
      row.budget = args.budgets[job.budget];

      ph_status rst;
      SignalPtr sig = load_signal(wavs[job.wav].second, &rst);
      if (rst != PH_OK) {
        row.error = ph_last_error();
        continue;
      }
      ph_attack_config cfg;
      ph_attack_config_defaults(&cfg);
      cfg.learning_rate = args.learning_rate;
      cfg.max_iterations = row.budget;
      cfg.check_every = args.check_every;
      cfg.use_forced_alignment = args.equal_align ? 0 : 1;
      cfg.phone_rate_limit = args.phone_rate_limit;
      cfg.seed = args.seed;
      if (row.lambda == "none") {
        cfg.use_thresholds = 0;
        cfg.lambda_db = 0.0;
      } else {
        cfg.use_thresholds = 1;
        cfg.lambda_db = std::atof(row.lambda.c_str());
      }
      ph_signal* adv = nullptr;
      ph_report* rep = nullptr;
      rst = ph_attack_run(sig.get(), row.target.c_str(), model.get(), &cfg,
                          &adv, &rep);
      if (rst != PH_OK) {
        row.error = ph_last_error();
      } else {
        row.ok = true;
        row.success = ph_report_success(rep) != 0;
        row.iterations = ph_report_iterations(rep);
        row.final_wer = ph_report_final_wer(rep);
        row.phi_db = ph_report_phi_db(rep);
        row.snr_db = ph_report_snr_db(rep);
        ph_signal_free(adv);
        ph_report_free(rep);
      }
    }
  };

  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker_fn);
  for (auto& th : pool) th.join();

  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.utterance != b.utterance) return a.utterance < b.utterance;
    if (a.target != b.target) return a.target < b.target;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    return a.budget < b.budget;
  });

  const std::string csv_path = args.out_dir + "/sweep.csv";
  std::ofstream out(csv_path);
  out << "utterance,target,lambda,budget,success,iterations,final_wer,"
         "phi_db,snr_db,error\n";
  for (const SweepRow& row : rows) {
    out << row.utterance << ',' << csv_escape(row.target) << ',' << row.lambda
        << ',' << row.budget << ',';
    if (row.ok) {
      out << (row.success ? 1 : 0) << ',' << row.iterations << ','
          << format_double(row.final_wer) << ',' << format_double(row.phi_db)
          << ',' << format_double(row.snr_db) << ',';
    } else {
      out << ",,,,," << csv_escape(row.error);
    }
    out << '\n';
  }
  if (!out) {
    std::cerr << "psyhide: cannot write " << csv_path << "\n";
    return kExitUsage;
  }
  std::cout << "wrote " << rows.size() << " rows to " << csv_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial audio toolkit: hides target transcriptions in "
               "audio below psychoacoustic hearing thresholds"};
  app.require_subcommand(1);

  // attack
  AttackArgs attack;
  CLI::App* cmd_attack = app.add_subcommand(
      "attack", "embed a target transcription into a WAV file");
  cmd_attack->add_option("--in", attack.in_path, "carrier WAV")->required();
  cmd_attack->add_option("--target", attack.target, "target transcription")
      ->required();
  cmd_attack->add_option("--model", attack.model_path, "model checkpoint")
      ->required();
  cmd_attack->add_option("--lexicon", attack.lexicon_path, "lexicon file")
      ->required();
  cmd_attack->add_option("--out", attack.out_path, "adversarial WAV")
      ->required();
  cmd_attack->add_option("--report", attack.report_path,
                         "report JSON path (default <out>.report.json)");
  cmd_attack->add_option("--lambda", attack.lambda_db,
                         "allowed dB above the hearing thresholds");
  cmd_attack->add_option("--iterations", attack.iterations,
                         "iteration budget");
  cmd_attack->add_option("--learning-rate", attack.learning_rate,
                         "gradient step size");
  cmd_attack->add_option("--check-every", attack.check_every,
                         "decode cadence in iterations");
  cmd_attack->add_option("--phone-rate-limit", attack.phone_rate_limit,
                         "max target phones per second");
  cmd_attack->add_option("--seed", attack.seed, "seed echoed into the report");
  cmd_attack->add_option("--realign-every", attack.realign_every,
                         "recompute forced alignment every N iterations");
  cmd_attack->add_flag("--no-thresholds", attack.no_thresholds,
                       "disable psychoacoustic masking of the gradient");
  cmd_attack->add_flag("--equal-align", attack.equal_align,
                       "use equal division instead of forced alignment");
  cmd_attack->add_option("--dump-spectra", attack.dump_dir,
                         "directory for |S|,|M|,|D|,H CSV dumps");

  // sweep
  SweepArgs sweep;
  CLI::App* cmd_sweep = app.add_subcommand(
      "sweep", "batch attacks over a corpus x target x lambda grid");
  cmd_sweep->add_option("--corpus", sweep.corpus_dir, "corpus directory")
      ->required();
  cmd_sweep->add_option("--targets", sweep.targets_path,
                        "file with one target transcription per line")
      ->required();
  cmd_sweep->add_option("--model", sweep.model_path, "model checkpoint")
      ->required();
  cmd_sweep->add_option("--lexicon", sweep.lexicon_path, "lexicon file")
      ->required();
  cmd_sweep->add_option("--out", sweep.out_dir, "output directory")
      ->required();
  cmd_sweep->add_option("--lambdas", sweep.lambdas,
                        "lambda grid; 'none' disables thresholds")
      ->delimiter(',');
  cmd_sweep->add_option("--budgets", sweep.budgets, "iteration budgets")
      ->delimiter(',');
  cmd_sweep->add_option("--learning-rate", sweep.learning_rate, "step size");
  cmd_sweep->add_option("--check-every", sweep.check_every, "decode cadence");
  cmd_sweep->add_option("--phone-rate-limit", sweep.phone_rate_limit,
                        "max target phones per second");
  cmd_sweep->add_option("--seed", sweep.seed, "seed echoed into the rows");
  cmd_sweep->add_option("--workers", sweep.workers,
                        "parallel runs (default: PSYHIDE_WORKERS or cores)");
  cmd_sweep->add_flag("--equal-align", sweep.equal_align,
                      "use equal division instead of forced alignment");

  // train
  std::string train_corpus, train_lexicon, train_out;
  ph_train_config tcfg;
  ph_train_config_defaults(&tcfg);
  bool no_realign = false;
  CLI::App* cmd_train = app.add_subcommand(
      "train", "train the toy acoustic model on a corpus directory");
  cmd_train->add_option("--corpus", train_corpus, "corpus directory")
      ->required();
  cmd_train->add_option("--lexicon", train_lexicon, "lexicon file")
      ->required();
  cmd_train->add_option("--out", train_out, "checkpoint path")->required();
  cmd_train->add_option("--epochs", tcfg.epochs, "epochs per round");
  cmd_train->add_option("--learning-rate", tcfg.learning_rate, "SGD step");
  cmd_train->add_option("--batch", tcfg.batch_utterances,
                        "utterances per gradient update");
  cmd_train->add_option("--holdout", tcfg.holdout_fraction,
                        "held-out fraction");
  cmd_train->add_option("--seed", tcfg.seed, "training seed");
  cmd_train->add_flag("--no-realign", no_realign,
                      "skip the forced realignment round");

  // decode
  std::string decode_in, decode_model, decode_lexicon;
  CLI::App* cmd_decode =
      app.add_subcommand("decode", "transcribe a WAV file");
  cmd_decode->add_option("--in", decode_in, "input WAV")->required();
  cmd_decode->add_option("--model", decode_model, "model checkpoint")
      ->required();
  cmd_decode->add_option("--lexicon", decode_lexicon, "lexicon file")
      ->required();

  // thresholds
  std::string th_in, th_out;
  int th_frame = 0, th_hop = 0, th_dft = 0;
  CLI::App* cmd_th = app.add_subcommand(
      "thresholds", "dump the hearing-threshold matrix as CSV");
  cmd_th->add_option("--in", th_in, "input WAV")->required();
  cmd_th->add_option("--out", th_out, "CSV path")->required();
  cmd_th->add_option("--frame-len", th_frame, "analysis frame length");
  cmd_th->add_option("--hop", th_hop, "analysis hop");
  cmd_th->add_option("--dft", th_dft, "DFT size");

  // features
  std::string ft_in, ft_features, ft_power;
  int ft_frame = 0, ft_hop = 0, ft_dft = 0;
  CLI::App* cmd_ft = app.add_subcommand(
      "features", "dump preprocessing features / squared magnitudes as CSV");
  cmd_ft->add_option("--in", ft_in, "input WAV")->required();
  cmd_ft->add_option("--out-features", ft_features, "log-power feature CSV");
  cmd_ft->add_option("--out-power", ft_power, "squared-magnitude CSV");
  cmd_ft->add_option("--frame-len", ft_frame, "analysis frame length");
  cmd_ft->add_option("--hop", ft_hop, "analysis hop");
  cmd_ft->add_option("--dft", ft_dft, "DFT size");

  // make-corpus
  std::string mc_out, mc_lexicon;
  int mc_count = 40, mc_min = 1, mc_max = 3;
  std::uint64_t mc_seed = 7;
  CLI::App* cmd_mc = app.add_subcommand(
      "make-corpus", "generate a synthetic labeled corpus");
  cmd_mc->add_option("--out", mc_out, "corpus directory")->required();
  cmd_mc->add_option("--lexicon", mc_lexicon, "lexicon output path")
      ->required();
  cmd_mc->add_option("--utterances", mc_count, "utterance count");
  cmd_mc->add_option("--min-words", mc_min, "min words per utterance");
  cmd_mc->add_option("--max-words", mc_max, "max words per utterance");
  cmd_mc->add_option("--seed", mc_seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (cmd_attack->parsed()) {
    return run_attack_cmd(attack);
  }
  if (cmd_sweep->parsed()) {
    return run_sweep_cmd(sweep);
  }
  if (cmd_train->parsed()) {
    tcfg.realign = no_realign ? 0 : 1;
    ph_model* model = nullptr;
    double accuracy = 0.0;
    ph_status st = ph_model_train(train_corpus.c_str(), train_lexicon.c_str(),
                                  &tcfg, &model, &accuracy);
    if (st != PH_OK) return fail("training");
    ModelPtr holder(model);
    st = ph_model_save(holder.get(), train_out.c_str());
    if (st != PH_OK) return fail("saving checkpoint");
    std::cout << "held-out frame accuracy " << format_double(accuracy)
              << "; checkpoint written to " << train_out << "\n";
    return kExitOk;
  }
  if (cmd_decode->parsed()) {
    ph_status st;
    SignalPtr sig = load_signal(decode_in, &st);
    if (st != PH_OK) return fail("reading " + decode_in);
    ModelPtr model = load_model(decode_model, decode_lexicon, &st);
    if (st != PH_OK) return fail("loading model");
    char* transcript = nullptr;
    st = ph_model_decode(model.get(), sig.get(), &transcript);
    if (st != PH_OK) return fail("decoding");
    std::cout << transcript << "\n";
    ph_string_free(transcript);
    return kExitOk;
  }
  if (cmd_th->parsed()) {
    ph_status st;
    SignalPtr sig = load_signal(th_in, &st);
    if (st != PH_OK) return fail("reading " + th_in);
    ph_thresholds* th = nullptr;
    st = ph_thresholds_compute(sig.get(), th_frame, th_hop, th_dft, &th);
    if (st != PH_OK) return fail("computing thresholds");
    ThresholdsPtr holder(th);
    st = ph_thresholds_write_csv(holder.get(), th_out.c_str());
    if (st != PH_OK) return fail("writing " + th_out);
    std::cout << "wrote " << ph_thresholds_frames(holder.get()) << "x"
              << ph_thresholds_bins(holder.get()) << " thresholds to "
              << th_out << "\n";
    return kExitOk;
  }
  if (cmd_ft->parsed()) {
    if (ft_features.empty() && ft_power.empty()) {
      std::cerr << "psyhide: features needs --out-features or --out-power\n";
      return kExitUsage;
    }
    ph_status st;
    SignalPtr sig = load_signal(ft_in, &st);
    if (st != PH_OK) return fail("reading " + ft_in);
    st = ph_dump_features(sig.get(), ft_frame, ft_hop, ft_dft,
                          ft_features.empty() ? nullptr : ft_features.c_str(),
                          ft_power.empty() ? nullptr : ft_power.c_str());
    if (st != PH_OK) return fail("dumping features");
    return kExitOk;
  }
  if (cmd_mc->parsed()) {
    const ph_status st = ph_corpus_generate(
        mc_out.c_str(), mc_lexicon.c_str(), mc_count, mc_min, mc_max, mc_seed);
    if (st != PH_OK) return fail("generating corpus");
    std::cout << "wrote " << mc_count << " utterances to " << mc_out << "\n";
    return kExitOk;
  }
  return kExitUsage;
}
