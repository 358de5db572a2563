//
// Copyright 2026 The DropEscape Authors
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
//

#include "dropescape/cli.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <variant>

#include "CLI11.hpp"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "dropescape/data_io.h"
#include "dropescape/dp_glm.h"
#include "dropescape/dp_simplex.h"
#include "dropescape/dropout_sgd.h"
#include "dropescape/experiment.h"
#include "dropescape/netescape.h"
#include "dropescape/privacy.h"

namespace dropescape {
namespace {

constexpr uint64_t kDefaultSeed = 1;

struct CommonOptions {
  std::string config;
  std::string out;
  std::optional<uint64_t> seed;
  int threads = 1;
};

// A failed command: the exit code and the message for the error stream.
struct Failure {
  int code;
  std::string message;
};

Failure Usage(const absl::Status& s) {
  return {kExitUsage, std::string(s.message())};
}
Failure DataError(const absl::Status& s) {
  return {kExitDataError, std::string(s.message())};
}

// Either an exit code or a failure.
using CommandResult = std::variant<int, Failure>;

std::string Num(double v) { return absl::StrFormat("%.10g", v); }

absl::StatusOr<KeyValueConfig> LoadConfig(const CommonOptions& opts) {
  if (opts.config.empty()) return KeyValueConfig::Parse("");
  return KeyValueConfig::Load(opts.config);
}

absl::StatusOr<uint64_t> ResolveSeed(const CommonOptions& opts,
                                     const KeyValueConfig& kv) {
  if (opts.seed.has_value()) return *opts.seed;
  if (kv.Has("seed")) {
    absl::StatusOr<int64_t> seed = kv.GetInt("seed", 0);
    if (!seed.ok()) return seed.status();
    return static_cast<uint64_t>(*seed);
  }
  if (const char* env = std::getenv("DROPESCAPE_SEED"); env != nullptr) {
    uint64_t seed = 0;
    if (!absl::SimpleAtoi(env, &seed)) {
      return absl::InvalidArgumentError(
          absl::StrCat("DROPESCAPE_SEED is not an integer: '", env, "'"));
    }
    return seed;
  }
  return kDefaultSeed;
}

absl::Status RejectUnknownKeys(const KeyValueConfig& kv) {
  const std::vector<std::string> unread = kv.UnreadKeys();
  if (unread.empty()) return absl::OkStatus();
  return absl::InvalidArgumentError(absl::StrCat(
      "Config error: unknown key(s) ", absl::StrJoin(unread, ", ")));
}

// Writes to the file, or to `out` when the path is empty.
absl::Status WriteText(const std::string& path, const std::string& text,
                       std::ostream& out) {
  if (path.empty()) {
    out << text;
    return absl::OkStatus();
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) return absl::PermissionDeniedError("Cannot write " + path);
  file << text;
  if (!file) return absl::DataLossError("Write failed for " + path);
  return absl::OkStatus();
}

absl::StatusOr<ConstraintSet> ConstraintFromConfig(const KeyValueConfig& kv,
                                                   std::string fallback) {
  const std::string kind = kv.GetString("constraint", fallback);
  absl::StatusOr<double> radius = kv.GetDouble("radius", 1.0);
  if (!radius.ok()) return radius.status();
  if (kind == "none") return ConstraintSet::Unconstrained();
  if (kind == "simplex") return ConstraintSet::Simplex();
  if (kind == "l2") return ConstraintSet::L2Ball(*radius);
  return absl::InvalidArgumentError(absl::StrCat(
      "Config error: constraint must be none, l2 or simplex, got '", kind,
      "'"));
}

// Reads the keys shared by sgd-train and dp-glm.
struct GlmSetup {
  Dataset data;
  GlmLoss loss = GlmLoss::Squared();
  SgdConfig sgd;
};

CommandResult ReadGlmSetup(const KeyValueConfig& kv, uint64_t seed,
                           std::string constraint_fallback, GlmSetup& setup) {
  absl::StatusOr<GlmLoss> loss =
      GlmLoss::FromName(kv.GetString("loss", "squared"));
  if (!loss.ok()) return Usage(loss.status());
  setup.loss = *loss;
  const bool logistic = loss->kind() == LossKind::kLogistic;
  absl::StatusOr<DataSource> source = DataSourceFromKeyValues(kv);
  if (!source.ok()) return Usage(source.status());
  if (!kv.Has("synthetic") && !logistic) source->synthetic = "linear_regression";

  absl::StatusOr<double> keep = kv.GetDouble("keep_rate", 0.5);
  absl::StatusOr<int64_t> iterations = kv.GetInt("iterations", 0);
  absl::StatusOr<int64_t> log_every = kv.GetInt("log_every", 0);
  absl::StatusOr<ConstraintSet> constraint =
      ConstraintFromConfig(kv, constraint_fallback);
  for (const absl::Status& s : {keep.status(), iterations.status(),
                                log_every.status(), constraint.status()}) {
    if (!s.ok()) return Usage(s);
  }
  if (absl::Status s = ValidateKeepRate(*keep); !s.ok()) return Usage(s);
  if (*iterations < 0 || *log_every < 0) {
    return Usage(absl::InvalidArgumentError(
        "Config error: iterations and log_every must be >= 0"));
  }
  absl::StatusOr<Dataset> data = LoadDataSource(*source, logistic);
  if (!data.ok()) return DataError(data.status());
  setup.data = *std::move(data);
  setup.sgd.keep_rate = *keep;
  setup.sgd.iterations = *iterations > 0
                             ? *iterations
                             : 10 * static_cast<int64_t>(setup.data.size());
  setup.sgd.log_every = *log_every;
  setup.sgd.constraint = *constraint;
  setup.sgd.seed = seed;
  return kExitOk;
}

CommandResult RunSgdTrain(const CommonOptions& opts, std::ostream& out) {
  absl::StatusOr<KeyValueConfig> kv = LoadConfig(opts);
  if (!kv.ok()) return Usage(kv.status());
  absl::StatusOr<uint64_t> seed = ResolveSeed(opts, *kv);
  if (!seed.ok()) return Usage(seed.status());
  GlmSetup setup;
  if (CommandResult r = ReadGlmSetup(*kv, *seed, "none", setup);
      std::holds_alternative<Failure>(r)) {
    return r;
  }
  if (absl::Status s = RejectUnknownKeys(*kv); !s.ok()) return Usage(s);

  absl::StatusOr<TrainedModel> model =
      TrainDropoutSgd(setup.data, setup.loss, setup.sgd);
  if (!model.ok()) return DataError(model.status());
  std::string text = "index,theta\n";
  for (size_t j = 0; j < model->theta.size(); ++j) {
    absl::StrAppend(&text, j, ",", Num(model->theta[j]), "\n");
  }
  if (absl::Status s = WriteText(opts.out, text, out); !s.ok()) {
    return DataError(s);
  }
  if (!model->trajectory.empty()) {
    std::string log = "step,dropout_risk\n";
    for (const RiskPoint& point : model->trajectory) {
      absl::StrAppend(&log, point.step, ",", Num(point.dropout_risk), "\n");
    }
    const std::string path =
        opts.out.empty() ? "" : opts.out + ".trajectory.csv";
    if (absl::Status s = WriteText(path, log, out); !s.ok()) {
      return DataError(s);
    }
  }
  return kExitOk;
}

CommandResult LoadBinaryData(const KeyValueConfig& kv, uint64_t seed,
                             BinaryDataset& data) {
  const std::string path = kv.GetString("data", "");
  absl::StatusOr<int64_t> n = kv.GetInt("synthetic_n", 6);
  absl::StatusOr<int64_t> p = kv.GetInt("synthetic_p", 2);
  absl::StatusOr<double> density = kv.GetDouble("density", 0.5);
  absl::StatusOr<int64_t> data_seed =
      kv.GetInt("synthetic_seed", static_cast<int64_t>(seed));
  for (const absl::Status& s :
       {n.status(), p.status(), density.status(), data_seed.status()}) {
    if (!s.ok()) return Usage(s);
  }
  absl::StatusOr<BinaryDataset> loaded;
  if (!path.empty()) {
    absl::StatusOr<DataFormat> format =
        ParseDataFormat(kv.GetString("format", "csv"));
    if (!format.ok()) return Usage(format.status());
    absl::StatusOr<Dataset> d = LoadDataset(path, *format);
    if (!d.ok()) return DataError(d.status());
    loaded = BinaryDataset::FromDataset(*d);
  } else {
    if (*n < 1 || *p < 1) {
      return Usage(absl::InvalidArgumentError(
          "Config error: synthetic_n and synthetic_p must be >= 1"));
    }
    loaded = RandomBinaryDataset(static_cast<size_t>(*n),
                                 static_cast<size_t>(*p), *density,
                                 static_cast<uint64_t>(*data_seed));
  }
  if (!loaded.ok()) return DataError(loaded.status());
  data = *std::move(loaded);
  return kExitOk;
}

absl::StatusOr<PrivacyBudget> BudgetFromConfig(const KeyValueConfig& kv) {
  absl::StatusOr<double> eps = kv.GetDouble("eps", 1.0);
  if (!eps.ok()) return eps.status();
  absl::StatusOr<double> delta = kv.GetDouble("delta", 1e-3);
  if (!delta.ok()) return delta.status();
  return PrivacyBudget::Create(*eps, *delta);
}

CommandResult RunSimplexLearn(const CommonOptions& opts, std::ostream& out) {
  absl::StatusOr<KeyValueConfig> kv = LoadConfig(opts);
  if (!kv.ok()) return Usage(kv.status());
  absl::StatusOr<uint64_t> seed = ResolveSeed(opts, *kv);
  if (!seed.ok()) return Usage(seed.status());
  BinaryDataset data;
  if (CommandResult r = LoadBinaryData(*kv, *seed, data);
      std::holds_alternative<Failure>(r)) {
    return r;
  }
  absl::StatusOr<PrivacyBudget> budget = BudgetFromConfig(*kv);
  if (!budget.ok()) return Usage(budget.status());
  if (absl::Status s = RejectUnknownKeys(*kv); !s.ok()) return Usage(s);

  SeededRng rng(*seed);
  absl::StatusOr<SimplexPrivateResult> result =
      PrivateSimplexLearn(data, *budget, rng);
  if (!result.ok()) return DataError(result.status());
  const std::string text = absl::StrCat(
      "lambda,lambda_hat,threshold,pass,vertex\n", Num(result->lambda), ",",
      Num(result->noisy_lambda), ",", Num(result->threshold), ",",
      result->ok() ? 1 : 0, ",",
      result->ok() ? absl::StrCat(*result->vertex) : "", "\n");
  if (absl::Status s = WriteText(opts.out, text, out); !s.ok()) {
    return DataError(s);
  }
  return result->ok() ? kExitOk : kExitGateFailure;
}

CommandResult RunAudit(const CommonOptions& opts, std::ostream& out) {
  absl::StatusOr<KeyValueConfig> kv = LoadConfig(opts);
  if (!kv.ok()) return Usage(kv.status());
  absl::StatusOr<uint64_t> seed = ResolveSeed(opts, *kv);
  if (!seed.ok()) return Usage(seed.status());
  BinaryDataset data;
  if (CommandResult r = LoadBinaryData(*kv, *seed, data);
      std::holds_alternative<Failure>(r)) {
    return r;
  }
  absl::StatusOr<int64_t> row_index = kv->GetInt("row_index", 0);
  absl::StatusOr<std::vector<double>> replacement =
      kv->GetDoubleList("replacement", {});
  absl::StatusOr<int64_t> samples = kv->GetInt("samples", 1'000'000);
  const std::string method = kv->GetString("audit_method", "auto");
  for (const absl::Status& s :
       {row_index.status(), replacement.status(), samples.status()}) {
    if (!s.ok()) return Usage(s);
  }
  if (absl::Status s = RejectUnknownKeys(*kv); !s.ok()) return Usage(s);
  if (*row_index < 0 || static_cast<size_t>(*row_index) >= data.size()) {
    return Usage(absl::InvalidArgumentError("Config error: row_index"));
  }
  // Default neighbour: the chosen row with every bit flipped.
  std::vector<uint8_t> row(data.dim());
  const auto original = data.row(static_cast<size_t>(*row_index));
  for (size_t j = 0; j < data.dim(); ++j) {
    row[j] = replacement->empty() ? 1 - original[j]
                                  : static_cast<uint8_t>((*replacement)[j]);
  }
  if (!replacement->empty() && replacement->size() != data.dim()) {
    return Usage(absl::InvalidArgumentError(
        "Config error: replacement needs one bit per column"));
  }
  absl::StatusOr<BinaryDataset> neighbour =
      data.WithRowReplaced(static_cast<size_t>(*row_index), row);
  if (!neighbour.ok()) return DataError(neighbour.status());

  absl::StatusOr<ArgminAudit> audit;
  const bool small = data.size() * data.dim() <= kMaxExhaustiveAuditBits;
  if (method == "exhaustive" || (method == "auto" && small)) {
    audit = AuditArgminDistribution(data, *neighbour, opts.threads);
  } else if (method == "factorized" || method == "auto") {
    audit = AuditArgminDistributionFactorized(data, *neighbour);
  } else if (method == "sampled") {
    absl::StatusOr<SampledAudit> sampled =
        AuditArgminDistributionSampled(data, *neighbour, *samples, *seed);
    if (!sampled.ok()) return DataError(sampled.status());
    audit = sampled->estimate;
  } else {
    return Usage(absl::InvalidArgumentError(absl::StrCat(
        "Config error: audit_method must be auto, exhaustive, factorized or "
        "sampled, got '",
        method, "'")));
  }
  if (!audit.ok()) return DataError(audit.status());
  std::string text = "outcome,prob_D,prob_Dprime,ratio\n";
  for (size_t j = 0; j < audit->prob_d.size(); ++j) {
    absl::StrAppend(&text, j, ",", Num(audit->prob_d[j]), ",",
                    Num(audit->prob_d_prime[j]), ",", Num(audit->ratio[j]),
                    "\n");
  }
  if (absl::Status s = WriteText(opts.out, text, out); !s.ok()) {
    return DataError(s);
  }
  return kExitOk;
}

CommandResult RunDpGlm(const CommonOptions& opts, std::ostream& out) {
  absl::StatusOr<KeyValueConfig> kv = LoadConfig(opts);
  if (!kv.ok()) return Usage(kv.status());
  absl::StatusOr<uint64_t> seed = ResolveSeed(opts, *kv);
  if (!seed.ok()) return Usage(seed.status());
  GlmSetup setup;
  if (CommandResult r = ReadGlmSetup(*kv, *seed, "l2", setup);
      std::holds_alternative<Failure>(r)) {
    return r;
  }
  absl::StatusOr<PrivacyBudget> budget = BudgetFromConfig(*kv);
  absl::StatusOr<double> sigma_cap = kv->GetDouble("sigma_cap", 1.0);
  absl::StatusOr<bool> proper = kv->GetBool("proper", true);
  absl::StatusOr<double> calibration = kv->GetDouble("calibration", 1.0);
  const std::string sensitivity = kv->GetString("sensitivity", "squared");
  for (const absl::Status& s : {budget.status(), sigma_cap.status(),
                                proper.status(), calibration.status()}) {
    if (!s.ok()) return Usage(s);
  }
  PrivateGlmOptions options;
  options.calibration = *calibration;
  options.threads = opts.threads;
  if (sensitivity == "squared") {
    options.sensitivity = GateSensitivity::kSquared;
  } else if (sensitivity == "unsquared") {
    options.sensitivity = GateSensitivity::kUnsquared;
  } else {
    return Usage(absl::InvalidArgumentError(
        "Config error: sensitivity must be squared or unsquared"));
  }
  if (kv->Has("pinned_noise")) {
    absl::StatusOr<double> pinned = kv->GetDouble("pinned_noise", 0.0);
    if (!pinned.ok()) return Usage(pinned.status());
    options.pinned_gate_noise = *pinned;
  }
  if (absl::Status s = RejectUnknownKeys(*kv); !s.ok()) return Usage(s);

  absl::StatusOr<PrivateGlmResult> result =
      PrivateGlmTrain(setup.data, setup.loss, setup.sgd, *budget, *sigma_cap,
                      *proper, options);
  if (!result.ok()) {
    return result.status().code() == absl::StatusCode::kInvalidArgument
               ? Usage(result.status())
               : DataError(result.status());
  }
  std::string text = "lambda,lambda_hat,zeta,pass,k,sigma,final_dropout_risk\n";
  absl::StrAppend(&text, Num(result->lambda), ",", Num(result->lambda_hat),
                  ",", Num(result->zeta), ",", result->pass ? 1 : 0, ",",
                  result->k, ",", result->pass ? Num(result->sigma) : "", ",",
                  result->final_dropout_risk.has_value()
                      ? Num(*result->final_dropout_risk)
                      : "",
                  "\n");
  if (absl::Status s = WriteText(opts.out, text, out); !s.ok()) {
    return DataError(s);
  }
  if (result->pass && !opts.out.empty()) {
    std::string theta = "index,theta\n";
    for (size_t j = 0; j < result->theta.size(); ++j) {
      absl::StrAppend(&theta, j, ",", Num(result->theta[j]), "\n");
    }
    if (absl::Status s = WriteText(opts.out + ".theta.csv", theta, out);
        !s.ok()) {
      return DataError(s);
    }
  }
  return result->pass ? kExitOk : kExitGateFailure;
}

CommandResult RunEscape(const CommonOptions& opts, std::ostream& out) {
  absl::StatusOr<KeyValueConfig> kv = LoadConfig(opts);
  if (!kv.ok()) return Usage(kv.status());
  absl::StatusOr<uint64_t> seed = ResolveSeed(opts, *kv);
  if (!seed.ok()) return Usage(seed.status());
  absl::StatusOr<int64_t> m = kv->GetInt("m", 8);
  absl::StatusOr<int64_t> p = kv->GetInt("p", m.ok() ? *m + 2 : 10);
  absl::StatusOr<double> g_alpha = kv->GetDouble("g_alpha", 1.0);
  absl::StatusOr<double> f_weight = kv->GetDouble("f_weight", 0.9);
  absl::StatusOr<int64_t> draws = kv->GetInt("draws", 10'000);
  absl::StatusOr<int64_t> samples = kv->GetInt("mc_samples", 100'000);
  const std::string distribution = kv->GetString("distribution", "normal");
  for (const absl::Status& s : {m.status(), p.status(), g_alpha.status(),
                                f_weight.status(), draws.status(),
                                samples.status()}) {
    if (!s.ok()) return Usage(s);
  }
  if (absl::Status s = RejectUnknownKeys(*kv); !s.ok()) return Usage(s);
  if (*m < 1 || *p < *m || *draws < 0 || *samples < 1) {
    return Usage(absl::InvalidArgumentError(
        "Config error: need 1 <= m <= p, draws >= 0, mc_samples >= 1"));
  }
  SampleDistribution dist{.dim = static_cast<size_t>(*p)};
  if (distribution == "uniform") {
    dist.kind = DistributionKind::kUniformCube;
  } else if (distribution != "normal") {
    return Usage(absl::InvalidArgumentError(
        "Config error: distribution must be normal or uniform"));
  }
  absl::StatusOr<EscapeInstance> instance = OrthonormalEscapeInstance(
      static_cast<size_t>(*m), static_cast<size_t>(*p), *g_alpha, *f_weight,
      DeriveSeed(*seed, 0));
  if (!instance.ok()) return Usage(instance.status());
  absl::StatusOr<EscapeReport> report =
      EscapeTrial(instance->g, instance->f, dist, static_cast<size_t>(*draws),
                  static_cast<size_t>(*samples), DeriveSeed(*seed, 1));
  if (!report.ok()) return DataError(report.status());

  std::string text = "draw_id,perturbed_error,success\n";
  for (size_t j = 0; j < report->perturbed_errors.size(); ++j) {
    absl::StrAppend(&text, j, ",", Num(report->perturbed_errors[j]), ",",
                    report->successes[j], "\n");
  }
  const std::string summary = absl::StrCat(
      "initial_error,success_frequency,factor,g_norm_sq,f_norm_sq,"
      "error_threshold,norm_precondition,error_precondition\n",
      Num(report->initial_error), ",", Num(report->success_frequency), ",",
      Num(report->factor), ",", Num(report->g_norm_sq), ",",
      Num(report->f_norm_sq), ",", Num(report->error_threshold), ",",
      report->norm_precondition ? 1 : 0, ",",
      report->error_precondition ? 1 : 0, "\n");
  if (absl::Status s = WriteText(opts.out, text, out); !s.ok()) {
    return DataError(s);
  }
  const std::string summary_path =
      opts.out.empty() ? "" : opts.out + ".summary.csv";
  if (absl::Status s = WriteText(summary_path, summary, out); !s.ok()) {
    return DataError(s);
  }
  return kExitOk;
}

CommandResult RunBench(const CommonOptions& opts, std::ostream& out,
                       std::ostream& err) {
  absl::StatusOr<KeyValueConfig> kv = LoadConfig(opts);
  if (!kv.ok()) return Usage(kv.status());
  absl::StatusOr<uint64_t> seed = ResolveSeed(opts, *kv);
  if (!seed.ok()) return Usage(seed.status());
  absl::StatusOr<ExperimentConfig> cfg = ExperimentConfigFromKeyValues(*kv);
  if (!cfg.ok()) return Usage(cfg.status());
  cfg->seed = *seed;
  if (opts.threads > 1) cfg->threads = opts.threads;
  absl::StatusOr<ExperimentResult> result = RunStabilityExperiment(*cfg);
  if (!result.ok()) return DataError(result.status());
  for (const std::string& failure : result->failures) {
    err << "training failure: " << failure << "\n";
  }
  if (absl::Status s =
          WriteText(opts.out, FormatStabilityCsv(result->rows), out);
      !s.ok()) {
    return DataError(s);
  }
  return kExitOk;
}

void AddCommonOptions(CLI::App* cmd, CommonOptions& opts, bool need_config) {
  CLI::Option* config =
      cmd->add_option("--config", opts.config, "key=value config file");
  if (need_config) config->required();
  cmd->add_option("--out", opts.out, "output CSV (default: stdout)");
  cmd->add_option("--seed", opts.seed, "base seed");
  cmd->add_option("--threads", opts.threads, "worker threads")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Dropout stability, privacy and escape experiments",
               "dropescape"};
  app.require_subcommand(1);
  CommonOptions opts;

  CLI::App* sgd = app.add_subcommand("sgd-train", "train with dropout SGD");
  AddCommonOptions(sgd, opts, false);

  CLI::App* simplex =
      app.add_subcommand("dp-simplex", "private learning over the simplex");
  std::string simplex_mode;
  simplex->add_option("mode", simplex_mode, "run or audit")
      ->required()
      ->check(CLI::IsMember({"run", "audit"}));
  AddCommonOptions(simplex, opts, false);

  CLI::App* glm = app.add_subcommand("dp-glm", "private GLM training");
  AddCommonOptions(glm, opts, false);

  CLI::App* escape = app.add_subcommand("escape", "dropout escape trial");
  AddCommonOptions(escape, opts, false);

  CLI::App* bench = app.add_subcommand("bench", "stability benchmark");
  AddCommonOptions(bench, opts, true);

  CLI::App* audit =
      app.add_subcommand("audit", "exact privacy audit (dp-simplex audit)");
  AddCommonOptions(audit, opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CommandResult result = kExitOk;
  if (sgd->parsed()) {
    result = RunSgdTrain(opts, out);
  } else if (simplex->parsed()) {
    result = simplex_mode == "run" ? RunSimplexLearn(opts, out)
                                   : RunAudit(opts, out);
  } else if (glm->parsed()) {
    result = RunDpGlm(opts, out);
  } else if (escape->parsed()) {
    result = RunEscape(opts, out);
  } else if (bench->parsed()) {
    result = RunBench(opts, out, err);
  } else if (audit->parsed()) {
    result = RunAudit(opts, out);
  }
  if (const Failure* failure = std::get_if<Failure>(&result)) {
    err << "error: " << failure->message << "\n";
    return failure->code;
  }
  return std::get<int>(result);
}

}  // namespace dropescape
