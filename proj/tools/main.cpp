// soniclog command-line front end.
//
// Subcommands: stats | clean | tune | train | predict | evaluate | explain |
// report.  All pipeline work goes through the shared library's C interface;
// this translator parses the config file, marshals arguments, and maps
// library status codes onto process exit codes:
//   0 success, 2 config/schema error, 3 data error, 4 internal failure.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "soniclog/soniclog.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// A failure that already knows its process exit code.
struct CliError {
  int exit_code;
  std::string message;
};

int exit_code_for(int status) {
  switch (status) {
    case SONIC_OK:
      return 0;
    case SONIC_E_INVALID_ARGUMENT:
    case SONIC_E_SCHEMA:
    case SONIC_E_UNSUPPORTED:
      return 2;  // configuration / schema
    case SONIC_E_PARSE:
    case SONIC_E_EMPTY_INPUT:
    case SONIC_E_INVALID_INPUT:
    case SONIC_E_MODEL_FORMAT:
    case SONIC_E_IO:
      return 3;  // data
    default:
      return 4;  // internal invariant violation
  }
}

void check(int status) {
  if (status != SONIC_OK)
    throw CliError{exit_code_for(status), sonic_last_error()};
}

[[noreturn]] void config_error(const std::string& message) {
  throw CliError{2, message};
}

// RAII over the C handles.
template <typename T, void (*Destroy)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() {
    if (ptr_) Destroy(ptr_);
  }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  T** out() { return &ptr_; }
  T* get() const { return ptr_; }

 private:
  T* ptr_ = nullptr;
};

using ConfigHandle = Handle<sonic_config, sonic_config_destroy>;
using TableHandle = Handle<sonic_table, sonic_table_destroy>;
using ModelHandle = Handle<sonic_model, sonic_model_destroy>;
using PredictionsHandle = Handle<sonic_predictions, sonic_predictions_destroy>;

// Owner for strings the library returns through char**.
class CString {
 public:
  CString() = default;
  ~CString() { sonic_free_string(ptr_); }
  CString(const CString&) = delete;
  CString& operator=(const CString&) = delete;
  char** out() { return &ptr_; }
  std::string str() const { return ptr_ ? ptr_ : ""; }

 private:
  char* ptr_ = nullptr;
};

// Command-line state shared by all subcommands.
struct Options {
  std::string config_path;
  std::string target;
  std::string model;
  std::string out;
  std::uint64_t seed = 0;
  double level = 0.8;
  bool target_set = false;
  bool model_set = false;
  bool out_set = false;
  bool seed_set = false;
  bool level_set = false;
};

// Config-file values the commands need back out of the applied config.
struct Resolved {
  std::string target = "DTC";
  double level = 0.8;
};

struct Context {
  sonic_config* cfg;
  const cli::ConfigFile& file;
  const Options& opt;
  Resolved resolved;
};

// Every key the config file may contain; anything else is rejected so a
// typo'd key fails loudly instead of silently using a default.
const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"paths", {"input", "model", "predictions", "out"}},
    {"schema", {"features", "targets", "depth", "units", "log_columns"}},
    {"data", {"sentinels", "epsilon"}},
    {"model",
     {"family", "target", "seed", "n_estimators", "learning_rate", "max_depth",
      "min_samples_leaf", "feature_subsample", "lambda", "gamma", "bootstrap"}},
    {"predict", {"level"}},
    {"tune",
     {"learning_rates", "max_depths", "n_estimators", "holdout_fraction",
      "cv_folds"}},
    {"explain", {"pairs"}},
    {"report", {"windows", "flag_k", "svg"}},
};

void validate_keys(const cli::ConfigFile& file) {
  for (const auto& [section, keys] : file.sections()) {
    auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end())
      config_error("unknown config section [" + section + "]");
    for (const auto& [key, value] : keys)
      if (!known->second.count(key))
        config_error("unknown config key '" + section + "." + key + "'");
  }
}

double to_double(const std::string& raw, const std::string& what) {
  const char* begin = raw.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (raw.empty() || end != begin + raw.size())
    config_error(what + " entry is not a number: '" + raw + "'");
  return v;
}

std::int64_t to_int(const std::string& raw, const std::string& what) {
  const char* begin = raw.c_str();
  char* end = nullptr;
  long long v = std::strtoll(begin, &end, 10);
  if (raw.empty() || end != begin + raw.size())
    config_error(what + " entry is not an integer: '" + raw + "'");
  return v;
}

// "A:B" -> {"A", "B"}, both sides trimmed and non-empty.
std::pair<std::string, std::string> split_pair(const std::string& entry,
                                               const std::string& what) {
  auto strip = [](const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return std::string();
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
  };
  std::size_t colon = entry.find(':');
  std::string first = colon == std::string::npos ? "" : strip(entry.substr(0, colon));
  std::string second = colon == std::string::npos ? "" : strip(entry.substr(colon + 1));
  if (first.empty() || second.empty())
    config_error(what + " entries must look like A:B, got '" + entry + "'");
  return {first, second};
}

// Pushes the file's settings (then the command-line overrides) into cfg.
Resolved apply_config(const cli::ConfigFile& f, const Options& opt,
                      sonic_config* cfg) {
  bool custom_schema = f.has("schema", "features") || f.has("schema", "targets");
  if (custom_schema) {
    std::vector<std::string> features = f.get_list("schema", "features");
    std::vector<std::string> targets = f.get_list("schema", "targets");
    if (features.empty() || targets.empty())
      config_error("schema.features and schema.targets must both list columns");
    std::map<std::string, std::string> units;
    for (const std::string& entry : f.get_list("schema", "units")) {
      auto [name, unit] = split_pair(entry, "schema.units");
      units[name] = unit;
    }
    std::vector<std::string> names;
    std::vector<int> kinds;
    std::string depth = f.get_string("schema", "depth", "");
    if (!depth.empty()) {
      names.push_back(depth);
      kinds.push_back(SONIC_COL_DEPTH_INDEX);
    }
    for (const std::string& c : features) {
      names.push_back(c);
      kinds.push_back(SONIC_COL_FEATURE);
    }
    for (const std::string& c : targets) {
      names.push_back(c);
      kinds.push_back(SONIC_COL_TARGET);
    }
    for (const auto& [name, unit] : units)
      if (std::find(names.begin(), names.end(), name) == names.end())
        config_error("schema.units names unknown column '" + name + "'");
    std::vector<std::string> unit_values;
    for (const std::string& n : names) {
      auto it = units.find(n);
      unit_values.push_back(it == units.end() ? "" : it->second);
    }
    std::vector<const char*> name_ptrs, unit_ptrs;
    for (std::size_t i = 0; i < names.size(); ++i) {
      name_ptrs.push_back(names[i].c_str());
      unit_ptrs.push_back(unit_values[i].c_str());
    }
    check(sonic_config_set_schema(cfg, name_ptrs.data(), unit_ptrs.data(),
                                  kinds.data(), names.size()));
  } else if (f.has("schema", "depth") || f.has("schema", "units")) {
    config_error("schema.depth and schema.units require schema.features and schema.targets");
  }
  if (f.has("schema", "log_columns")) {
    std::vector<std::string> logs = f.get_list("schema", "log_columns");
    std::vector<const char*> ptrs;
    for (const std::string& c : logs) ptrs.push_back(c.c_str());
    check(sonic_config_set_log_columns(cfg, ptrs.empty() ? nullptr : ptrs.data(),
                                       ptrs.size()));
  } else if (custom_schema) {
    // A replaced schema may lack the default resistivity columns; clear the
    // default log-transform list rather than reference missing names.
    check(sonic_config_set_log_columns(cfg, nullptr, 0));
  }

  if (f.has("data", "sentinels")) {
    std::vector<double> values;
    for (const std::string& s : f.get_list("data", "sentinels"))
      values.push_back(to_double(s, "data.sentinels"));
    check(sonic_config_set_sentinels(
        cfg, values.empty() ? nullptr : values.data(), values.size()));
  }
  if (f.has("data", "epsilon"))
    check(sonic_config_set_epsilon(cfg, f.get_double("data", "epsilon", 0.0)));

  if (f.has("model", "family"))
    check(sonic_config_set_family(cfg,
                                  f.get_string("model", "family", "").c_str()));
  check(sonic_config_set_params(
      cfg, static_cast<int>(f.get_int("model", "n_estimators", 100)),
      f.get_double("model", "learning_rate", 0.1),
      static_cast<int>(f.get_int("model", "max_depth", 6)),
      static_cast<int>(f.get_int("model", "min_samples_leaf", 1)),
      static_cast<int>(f.get_int("model", "feature_subsample", 0)),
      f.get_double("model", "lambda", 1.0), f.get_double("model", "gamma", 0.0),
      f.get_bool("model", "bootstrap", true) ? 1 : 0));
  if (f.has("model", "seed"))
    check(sonic_config_set_seed(
        cfg, static_cast<std::uint64_t>(f.get_int("model", "seed", 0))));

  Resolved r;
  if (f.has("model", "target")) {
    r.target = f.get_string("model", "target", "");
    check(sonic_config_set_target(cfg, r.target.c_str()));
  }
  if (f.has("predict", "level")) {
    r.level = f.get_double("predict", "level", 0.8);
    check(sonic_config_set_level(cfg, r.level));
  }
  if (f.has("report", "flag_k"))
    check(sonic_config_set_flag_k(cfg, f.get_double("report", "flag_k", 1.5)));

  // command-line overrides win over the file
  if (opt.target_set) {
    r.target = opt.target;
    check(sonic_config_set_target(cfg, r.target.c_str()));
  }
  if (opt.seed_set) check(sonic_config_set_seed(cfg, opt.seed));
  if (opt.level_set) {
    r.level = opt.level;
    check(sonic_config_set_level(cfg, r.level));
  }
  return r;
}

std::string require_input(const cli::ConfigFile& f) {
  std::string p = f.get_string("paths", "input", "");
  if (p.empty()) config_error("paths.input must name the input table");
  return p;
}

std::string model_path(const Context& ctx) {
  if (ctx.opt.model_set) return ctx.opt.model;
  std::string p = ctx.file.get_string("paths", "model", "");
  return p.empty() ? "model.json" : p;
}

std::string predictions_path(const cli::ConfigFile& f) {
  std::string p = f.get_string("paths", "predictions", "");
  return p.empty() ? "predictions.csv" : p;
}

// --out beats paths.out beats the command's default (empty = stdout).
std::string resolve_out(const Context& ctx, const std::string& fallback) {
  if (ctx.opt.out_set) return ctx.opt.out;
  std::string p = ctx.file.get_string("paths", "out", "");
  return p.empty() ? fallback : p;
}

void emit(const std::string& text, const std::string& out_path) {
  std::string body = text;
  if (body.empty() || body.back() != '\n') body += '\n';
  if (out_path.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw CliError{3, "cannot write '" + out_path + "'"};
  out << body;
  out.flush();
  if (!out) throw CliError{3, "failed writing '" + out_path + "'"};
}

/* -------- subcommands ----------------------------------------------------- */

int cmd_stats(Context& ctx) {
  TableHandle table;
  CString cleaning;
  check(sonic_table_load(ctx.cfg, require_input(ctx.file).c_str(), 1,
                         table.out(), cleaning.out()));
  CString summary;
  check(sonic_table_summary_json(table.get(), summary.out()));
  std::size_t rows = 0;
  check(sonic_table_rows(table.get(), &rows));
  json doc = json::parse(summary.str());
  doc["cleaning"] = json::parse(cleaning.str());
  doc["rows"] = rows;
  emit(doc.dump(2), resolve_out(ctx, ""));
  return 0;
}

int cmd_clean(Context& ctx) {
  TableHandle table;
  CString cleaning;
  check(sonic_table_load(ctx.cfg, require_input(ctx.file).c_str(), 0,
                         table.out(), cleaning.out()));
  check(sonic_table_write_csv(table.get(),
                              resolve_out(ctx, "cleaned.csv").c_str()));
  std::cout << cleaning.str() << '\n';
  return 0;
}

int cmd_tune(Context& ctx) {
  const cli::ConfigFile& f = ctx.file;
  std::vector<double> lrs;
  for (const std::string& s : f.get_list("tune", "learning_rates"))
    lrs.push_back(to_double(s, "tune.learning_rates"));
  std::vector<int> depths;
  for (const std::string& s : f.get_list("tune", "max_depths"))
    depths.push_back(static_cast<int>(to_int(s, "tune.max_depths")));
  std::vector<int> counts;
  for (const std::string& s : f.get_list("tune", "n_estimators"))
    counts.push_back(static_cast<int>(to_int(s, "tune.n_estimators")));
  if (lrs.empty() || depths.empty() || counts.empty())
    config_error(
        "tune.learning_rates, tune.max_depths, and tune.n_estimators must "
        "each list at least one value");
  double holdout = f.get_double("tune", "holdout_fraction", 0.2);
  int folds = static_cast<int>(f.get_int("tune", "cv_folds", 0));
  TableHandle table;
  check(sonic_table_load(ctx.cfg, require_input(f).c_str(), 1, table.out(),
                         nullptr));
  CString result;
  check(sonic_grid_search(ctx.cfg, table.get(), lrs.data(), lrs.size(),
                          depths.data(), depths.size(), counts.data(),
                          counts.size(), holdout, folds, result.out()));
  emit(result.str(), resolve_out(ctx, ""));
  return 0;
}

int cmd_train(Context& ctx) {
  TableHandle table;
  check(sonic_table_load(ctx.cfg, require_input(ctx.file).c_str(), 1,
                         table.out(), nullptr));
  ModelHandle model;
  check(sonic_train(ctx.cfg, table.get(), model.out()));
  check(sonic_model_save(model.get(), model_path(ctx).c_str()));
  CString info;
  check(sonic_model_info_json(model.get(), info.out()));
  emit(info.str(), resolve_out(ctx, ""));
  return 0;
}

int cmd_predict(Context& ctx) {
  ModelHandle model;
  check(sonic_model_load(model_path(ctx).c_str(), model.out()));
  TableHandle table;
  check(sonic_table_load_for_model(ctx.cfg, model.get(),
                                   require_input(ctx.file).c_str(), table.out(),
                                   nullptr));
  PredictionsHandle pred;
  check(sonic_predict(model.get(), table.get(), ctx.resolved.level,
                      pred.out()));
  std::string out_path =
      ctx.opt.out_set ? ctx.opt.out : predictions_path(ctx.file);
  check(sonic_predictions_write_csv(pred.get(), out_path.c_str()));
  return 0;
}

int cmd_evaluate(Context& ctx) {
  ModelHandle model;
  check(sonic_model_load(model_path(ctx).c_str(), model.out()));
  TableHandle table;
  check(sonic_table_load(ctx.cfg, require_input(ctx.file).c_str(), 1,
                         table.out(), nullptr));
  CString result;
  check(sonic_evaluate(ctx.cfg, model.get(), table.get(), result.out()));
  emit(result.str(), resolve_out(ctx, ""));
  return 0;
}

int cmd_explain(Context& ctx) {
  ModelHandle model;
  check(sonic_model_load(model_path(ctx).c_str(), model.out()));
  TableHandle table;
  check(sonic_table_load_for_model(ctx.cfg, model.get(),
                                   require_input(ctx.file).c_str(), table.out(),
                                   nullptr));
  std::vector<std::string> first, second;
  for (const std::string& entry : ctx.file.get_list("explain", "pairs")) {
    auto [a, b] = split_pair(entry, "explain.pairs");
    first.push_back(a);
    second.push_back(b);
  }
  std::vector<const char*> pa, pb;
  for (std::size_t i = 0; i < first.size(); ++i) {
    pa.push_back(first[i].c_str());
    pb.push_back(second[i].c_str());
  }
  CString meta;
  check(sonic_explain(model.get(), table.get(),
                      pa.empty() ? nullptr : pa.data(),
                      pb.empty() ? nullptr : pb.data(), pa.size(),
                      resolve_out(ctx, "explain").c_str(), meta.out()));
  std::cout << meta.str() << '\n';
  return 0;
}

int cmd_report(Context& ctx) {
  const cli::ConfigFile& f = ctx.file;
  PredictionsHandle pred;
  check(sonic_predictions_read_csv(predictions_path(f).c_str(), pred.out()));
  std::size_t n_pred = 0;
  check(sonic_predictions_rows(pred.get(), &n_pred));

  // Labels come from the input table when one is configured, joined to the
  // predictions strictly by depth index.
  std::vector<double> labels;
  bool have_labels = false;
  std::string input = f.get_string("paths", "input", "");
  if (!input.empty()) {
    TableHandle table;
    check(sonic_table_load(ctx.cfg, input.c_str(), 1, table.out(), nullptr));
    std::size_t n = 0;
    check(sonic_table_rows(table.get(), &n));
    std::map<std::int64_t, double> by_depth;
    if (n > 0) {
      std::vector<std::int64_t> depth(n);
      std::vector<double> value(n);
      check(sonic_table_depth(table.get(), depth.data(), n));
      check(sonic_table_column(table.get(), ctx.resolved.target.c_str(),
                               value.data(), n));
      for (std::size_t i = 0; i < n; ++i) by_depth[depth[i]] = value[i];
    }
    labels.resize(n_pred);
    for (std::size_t i = 0; i < n_pred; ++i) {
      std::int64_t d = 0;
      check(sonic_predictions_row(pred.get(), i, &d, nullptr, nullptr, nullptr,
                                  nullptr));
      auto it = by_depth.find(d);
      if (it == by_depth.end())
        throw CliError{3, "no " + ctx.resolved.target +
                              " label at depth index " + std::to_string(d) +
                              " in '" + input + "'"};
      labels[i] = it->second;
    }
    have_labels = true;
  }

  std::vector<std::int64_t> lo, hi;
  for (const std::string& entry : f.get_list("report", "windows")) {
    auto [a, b] = split_pair(entry, "report.windows");
    lo.push_back(to_int(a, "report.windows"));
    hi.push_back(to_int(b, "report.windows"));
  }

  std::string text_path = resolve_out(ctx, "report.txt");
  std::string svg_path;
  if (f.get_bool("report", "svg", false))
    svg_path = fs::path(text_path).replace_extension(".svg").string();

  check(sonic_report(ctx.cfg, pred.get(),
                     have_labels && n_pred > 0 ? labels.data() : nullptr,
                     have_labels ? labels.size() : 0,
                     lo.empty() ? nullptr : lo.data(),
                     hi.empty() ? nullptr : hi.data(), lo.size(),
                     text_path.c_str(),
                     svg_path.empty() ? nullptr : svg_path.c_str()));
  return 0;
}

int run(const std::string& command, const Options& opt) {
  cli::ConfigFile file = cli::ConfigFile::parse_file(opt.config_path);
  validate_keys(file);
  ConfigHandle cfg;
  check(sonic_config_create(cfg.out()));
  Context ctx{cfg.get(), file, opt, apply_config(file, opt, cfg.get())};
  if (command == "stats") return cmd_stats(ctx);
  if (command == "clean") return cmd_clean(ctx);
  if (command == "tune") return cmd_tune(ctx);
  if (command == "train") return cmd_train(ctx);
  if (command == "predict") return cmd_predict(ctx);
  if (command == "evaluate") return cmd_evaluate(ctx);
  if (command == "explain") return cmd_explain(ctx);
  if (command == "report") return cmd_report(ctx);
  throw CliError{4, "unhandled command '" + command + "'"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"well-log reconstruction pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sonic_version()));

  Options opt;
  const struct {
    const char* name;
    const char* help;
  } kCommands[] = {
      {"stats", "summarize the cleaned input table as JSON"},
      {"clean", "drop invalid rows and write the cleaned table"},
      {"tune", "grid-search hyperparameters on the input table"},
      {"train", "fit the configured model and save it"},
      {"predict", "predict with a saved model and write the prediction table"},
      {"evaluate", "score a saved model against labeled data"},
      {"explain", "export per-feature attribution files"},
      {"report", "render a text (and optional SVG) report from predictions"},
  };
  for (const auto& c : kCommands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", opt.config_path, "config file")->required();
    sub->add_option("--target", opt.target, "override the target column");
    sub->add_option("--model", opt.model, "override the model file path");
    sub->add_option("--seed", opt.seed, "override the random seed");
    sub->add_option("--level", opt.level,
                    "override the interval probability in [0, 1)");
    sub->add_option("--out", opt.out, "override the output destination");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help / --version
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.target_set = sub->count("--target") > 0;
  opt.model_set = sub->count("--model") > 0;
  opt.out_set = sub->count("--out") > 0;
  opt.seed_set = sub->count("--seed") > 0;
  opt.level_set = sub->count("--level") > 0;

  try {
    return run(sub->get_name(), opt);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.exit_code;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;  // config-file reading is the only runtime_error source here
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
