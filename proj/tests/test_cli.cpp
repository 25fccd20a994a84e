// Drives the installed command-line binary end to end: every subcommand, the
// exit-code contract (0 success, 2 config error, 3 data error), and the
// override flags.  The binary path arrives via SONICLOG_CLI_PATH.
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "helpers.hpp"

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI with the given arguments, cwd set to `dir`.
RunResult run_cli(const testutil::TempDir& dir, const std::string& args) {
  std::string out_path = dir.file(".stdout");
  std::string err_path = dir.file(".stderr");
  std::string cmd = "cd '" + dir.path().string() + "' && '" SONICLOG_CLI_PATH
                    "' " + args + " > '" + out_path + "' 2> '" + err_path +
                    "'";
  int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = testutil::read_file(out_path);
  r.err = testutil::read_file(err_path);
  return r;
}

std::string well_csv(int n, bool with_targets = true, bool dirty = false) {
  std::ostringstream out;
  out << "CAL,CNC,HRD" << (with_targets ? ",DTC,DTS" : "") << "\n";
  for (int i = 0; i < n; ++i) {
    double cal = 8.0 + 0.05 * (i % 11);
    double cnc = 0.2 + 0.003 * (i % 23);
    double hrd = 1.0 + (i % 5);
    double dtc = 50.0 + 3.0 * cal - 20.0 * cnc + 4.0 * std::log(hrd) +
                 0.4 * std::sin(0.9 * i);
    out << cal << ',' << cnc << ',' << hrd;
    if (with_targets) out << ',' << dtc << ',' << dtc * 1.6;
    out << "\n";
  }
  if (dirty) {
    out << "-999.25,0.2,2" << (with_targets ? ",100,160" : "") << "\n";
    out << "8.0,0.2,-3" << (with_targets ? ",100,160" : "") << "\n";
  }
  return out.str();
}

// Standard config pointing at absolute paths inside `dir`.
std::string base_config(const testutil::TempDir& dir,
                        const std::string& extra = "") {
  std::ostringstream out;
  out << "# synthetic three-feature well\n"
      << "[paths]\n"
      << "input = " << dir.file("well.csv") << "\n"
      << "model = " << dir.file("model.json") << "\n"
      << "predictions = " << dir.file("pred.csv") << "\n\n"
      << "[schema]\n"
      << "features = CAL, CNC, HRD\n"
      << "targets = DTC, DTS\n"
      << "units = CAL:in, HRD:ohm.m, DTC:us/m\n"
      << "log_columns = HRD\n\n"
      << "[model]\n"
      << "family = ngboost\n"
      << "target = DTC\n"
      << "seed = 9\n"
      << "n_estimators = 20\n"
      << "learning_rate = 0.1\n"
      << "max_depth = 3\n\n"
      << "[predict]\n"
      << "level = 0.8\n"
      << extra;
  return out.str();
}

void write_fixture(const testutil::TempDir& dir, const std::string& extra = "",
                   int rows = 60, bool dirty = false) {
  testutil::write_file(dir.file("well.csv"), well_csv(rows, true, dirty));
  testutil::write_file(dir.file("config.ini"), base_config(dir, extra));
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

}  // namespace

TEST_CASE("cli reports its version and usage") {
  testutil::TempDir dir;
  RunResult version = run_cli(dir, "--version");
  CHECK(version.code == 0);
  CHECK(version.out.find("1.0.0") != std::string::npos);

  RunResult help = run_cli(dir, "--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("train") != std::string::npos);
  CHECK(help.out.find("predict") != std::string::npos);

  // a bare invocation or an unknown subcommand is a usage error
  CHECK(run_cli(dir, "").code == 2);
  RunResult unknown = run_cli(dir, "frobnicate --config x.ini");
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("error:") != std::string::npos);
  CHECK(run_cli(dir, "train").code == 2);  // --config is required
}

TEST_CASE("stats summarizes the cleaned table as JSON") {
  testutil::TempDir dir;
  write_fixture(dir, "", 40, /*dirty=*/true);

  RunResult r = run_cli(dir, "stats --config config.ini");
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("rows") == 40);  // both dirty rows dropped
  CHECK(doc.at("cleaning").at("rows_in") == 42);
  CHECK(doc.at("cleaning").at("dropped_by_reason").at("sentinel") == 1);
  bool saw_log = false;
  for (const auto& col : doc.at("columns"))
    if (col.at("name") == "logHRD") saw_log = true;
  CHECK(saw_log);

  // an input with a header but no surviving rows is a data error
  testutil::write_file(dir.file("well.csv"), "CAL,CNC,HRD,DTC,DTS\n");
  RunResult empty = run_cli(dir, "stats --config config.ini");
  CHECK(empty.code == 3);
  CHECK(empty.err.find("empty table") != std::string::npos);
}

TEST_CASE("clean writes the filtered table without transforming") {
  testutil::TempDir dir;
  write_fixture(dir, "", 30, /*dirty=*/true);

  RunResult r = run_cli(dir, "clean --config config.ini --out cleaned.csv");
  REQUIRE(r.code == 0);
  auto report = nlohmann::json::parse(r.out);
  CHECK(report.at("rows_out") == 30);

  std::string cleaned = testutil::read_file(dir.file("cleaned.csv"));
  // raw column names survive: clean never applies the log transform
  CHECK(first_line(cleaned).find("HRD") != std::string::npos);
  CHECK(first_line(cleaned).find("logHRD") == std::string::npos);
  CHECK(cleaned.find("-999.25") == std::string::npos);
}

TEST_CASE("train, predict, and evaluate round trip through files") {
  testutil::TempDir dir;
  write_fixture(dir);

  RunResult train = run_cli(dir, "train --config config.ini");
  REQUIRE(train.code == 0);
  auto info = nlohmann::json::parse(train.out);
  CHECK(info.at("family") == "ngboost");
  CHECK(info.at("target") == "DTC");
  CHECK(info.at("seed") == 9);
  CHECK(!info.contains("payload"));
  CHECK(testutil::read_file(dir.file("model.json")).size() > 0);

  RunResult predict = run_cli(dir, "predict --config config.ini");
  REQUIRE(predict.code == 0);
  std::string pred_csv = testutil::read_file(dir.file("pred.csv"));
  CHECK(first_line(pred_csv) == "depth_index,mu,sigma,ci_lo,ci_hi");

  RunResult evaluate = run_cli(dir, "evaluate --config config.ini");
  REQUIRE(evaluate.code == 0);
  auto scores = nlohmann::json::parse(evaluate.out);
  CHECK(scores.at("metrics").at("n") == 60);
  CHECK(scores.at("metrics").at("r2").get<double>() > 0.5);
  CHECK(scores.at("coverage").at("level") == 0.8);

  // reruns are byte-identical: same model bytes, same prediction bytes
  RunResult retrain =
      run_cli(dir, "train --config config.ini --model model2.json");
  REQUIRE(retrain.code == 0);
  CHECK(testutil::read_file(dir.file("model2.json")) ==
        testutil::read_file(dir.file("model.json")));
  RunResult repredict =
      run_cli(dir, "predict --config config.ini --out pred2.csv");
  REQUIRE(repredict.code == 0);
  CHECK(testutil::read_file(dir.file("pred2.csv")) == pred_csv);

  // --seed lands in the persisted model
  RunResult rf_a = run_cli(
      dir, "train --config config.ini --model rf_a.json --seed 1");
  RunResult rf_b = run_cli(
      dir, "train --config config.ini --model rf_b.json --seed 2");
  REQUIRE(rf_a.code == 0);
  REQUIRE(rf_b.code == 0);
  CHECK(nlohmann::json::parse(rf_a.out).at("seed") == 1);
  CHECK(nlohmann::json::parse(rf_b.out).at("seed") == 2);
}

TEST_CASE("predict consumes label-free inputs and a non-probabilistic model "
          "omits interval columns") {
  testutil::TempDir dir;
  write_fixture(dir);
  REQUIRE(run_cli(dir, "train --config config.ini").code == 0);

  // prediction inputs need only the feature columns
  testutil::write_file(dir.file("bare.csv"), well_csv(12, false));
  std::string bare_cfg = base_config(dir);
  bare_cfg.replace(bare_cfg.find(dir.file("well.csv")),
                   dir.file("well.csv").size(), dir.file("bare.csv"));
  testutil::write_file(dir.file("bare.ini"), bare_cfg);
  RunResult bare = run_cli(dir, "predict --config bare.ini --out bare_pred.csv");
  REQUIRE(bare.code == 0);
  std::string csv = testutil::read_file(dir.file("bare_pred.csv"));
  CHECK(first_line(csv) == "depth_index,mu,sigma,ci_lo,ci_hi");

  // a gbdt model predicts point values only
  std::string gb = base_config(dir);
  std::size_t at = gb.find("family = ngboost");
  gb.replace(at, std::string("family = ngboost").size(), "family = gbdt");
  testutil::write_file(dir.file("gb.ini"), gb);
  REQUIRE(run_cli(dir, "train --config gb.ini --model gb.json").code == 0);
  REQUIRE(
      run_cli(dir, "predict --config gb.ini --model gb.json --out gb.csv")
          .code == 0);
  CHECK(first_line(testutil::read_file(dir.file("gb.csv"))) ==
        "depth_index,mu");
}

TEST_CASE("tune sweeps the configured lattice") {
  testutil::TempDir dir;
  std::string extra =
      "\n[tune]\n"
      "learning_rates = 0.1, 0.3\n"
      "max_depths = 2\n"
      "n_estimators = 10\n"
      "holdout_fraction = 0.25\n";
  write_fixture(dir, extra, 80);

  RunResult r = run_cli(dir, "tune --config config.ini");
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc.at("trials").size() == 2);
  CHECK(doc.at("best").contains("learning_rate"));

  // cross-validated variant
  std::string cv_extra = extra + "cv_folds = 3\n";
  testutil::write_file(dir.file("cv.ini"), base_config(dir, cv_extra));
  RunResult cv = run_cli(dir, "tune --config cv.ini");
  REQUIRE(cv.code == 0);
  CHECK(nlohmann::json::parse(cv.out).at("trials").size() == 2);

  // an empty axis is a config error
  std::string no_axis =
      "\n[tune]\nlearning_rates = 0.1\nmax_depths = 2\n";
  testutil::write_file(dir.file("bad.ini"), base_config(dir, no_axis));
  RunResult bad = run_cli(dir, "tune --config bad.ini");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("n_estimators") != std::string::npos);
}

TEST_CASE("explain exports attribution files") {
  testutil::TempDir dir;
  std::string extra = "\n[explain]\npairs = CNC:CAL\n";
  write_fixture(dir, extra, 24);
  REQUIRE(run_cli(dir, "train --config config.ini").code == 0);

  RunResult r = run_cli(dir, "explain --config config.ini --out shap");
  REQUIRE(r.code == 0);
  auto meta = nlohmann::json::parse(r.out);
  CHECK(meta.at("rows") == 24);
  CHECK(testutil::read_file(dir.file("shap/importance.csv"))
            .rfind("feature,mean_abs_shap\n", 0) == 0);
  CHECK(testutil::read_file(dir.file("shap/beeswarm.csv")).size() > 0);
  CHECK(testutil::read_file(dir.file("shap/dependence_CNC_CAL.csv")).size() >
        0);

  // pairs must reference model features
  std::string bad = "\n[explain]\npairs = GR:CAL\n";
  testutil::write_file(dir.file("bad.ini"), base_config(dir, bad));
  RunResult nope = run_cli(dir, "explain --config bad.ini --out shap2");
  CHECK(nope.code == 2);
  CHECK(nope.err.find("GR") != std::string::npos);
}

TEST_CASE("report renders text and SVG from the prediction file") {
  testutil::TempDir dir;
  std::string extra =
      "\n[report]\n"
      "windows = 0:9, 10:19\n"
      "flag_k = 1.5\n"
      "svg = true\n";
  write_fixture(dir, extra);
  REQUIRE(run_cli(dir, "train --config config.ini").code == 0);
  REQUIRE(run_cli(dir, "predict --config config.ini").code == 0);

  RunResult r = run_cli(dir, "report --config config.ini --out run.txt");
  REQUIRE(r.code == 0);
  std::string text = testutil::read_file(dir.file("run.txt"));
  CHECK(text.find("well-log reconstruction report") != std::string::npos);
  CHECK(text.find("[intervals]") != std::string::npos);
  CHECK(text.find("[coverage]") != std::string::npos);  // labels joined
  CHECK(text.find("0..9: rows 10") != std::string::npos);
  std::string svg = testutil::read_file(dir.file("run.svg"));
  CHECK(svg.rfind("<svg", 0) == 0);

  // without a configured input there are no labels, hence no coverage
  std::string unlabeled = base_config(dir, extra);
  std::size_t at = unlabeled.find("input = ");
  unlabeled.erase(at, unlabeled.find('\n', at) - at + 1);
  testutil::write_file(dir.file("nolabel.ini"), unlabeled);
  RunResult plain = run_cli(dir, "report --config nolabel.ini --out plain.txt");
  REQUIRE(plain.code == 0);
  CHECK(testutil::read_file(dir.file("plain.txt")).find("[coverage]") ==
        std::string::npos);

  // backwards windows are a config error
  std::string backwards =
      "\n[report]\nwindows = 9:0\n";
  testutil::write_file(dir.file("bad.ini"), base_config(dir, backwards));
  CHECK(run_cli(dir, "report --config bad.ini --out bad.txt").code == 2);
}

TEST_CASE("config mistakes and missing data map to exit codes") {
  testutil::TempDir dir;
  write_fixture(dir);

  // unknown section / key / malformed line
  testutil::write_file(dir.file("weird.ini"),
                       base_config(dir, "\n[rocket]\nthrust = 9\n"));
  RunResult section = run_cli(dir, "stats --config weird.ini");
  CHECK(section.code == 2);
  CHECK(section.err.find("unknown config section") != std::string::npos);

  testutil::write_file(dir.file("typo.ini"),
                       base_config(dir, "\n[model]\nfamly = rf\n"));
  RunResult key = run_cli(dir, "stats --config typo.ini");
  CHECK(key.code == 2);
  CHECK(key.err.find("unknown config key 'model.famly'") != std::string::npos);

  testutil::write_file(dir.file("broken.ini"), "[paths\ninput = x\n");
  CHECK(run_cli(dir, "stats --config broken.ini").code == 2);

  testutil::write_file(dir.file("nofamily.ini"),
                       base_config(dir, "\n[model]\nfamily = mystery\n"));
  CHECK(run_cli(dir, "train --config nofamily.ini").code == 2);

  // config file itself missing
  CHECK(run_cli(dir, "stats --config nowhere.ini").code == 2);

  // --level outside [0, 1) is rejected before any work happens
  CHECK(run_cli(dir, "predict --config config.ini --level 1.0").code == 2);

  // missing input file / model file are data errors
  std::string gone = base_config(dir);
  std::size_t at = gone.find(dir.file("well.csv"));
  gone.replace(at, dir.file("well.csv").size(), dir.file("gone.csv"));
  testutil::write_file(dir.file("gone.ini"), gone);
  RunResult noinput = run_cli(dir, "stats --config gone.ini");
  CHECK(noinput.code == 3);
  CHECK(noinput.err.find("error:") != std::string::npos);

  CHECK(run_cli(dir, "predict --config config.ini").code == 3);  // no model yet
  testutil::write_file(dir.file("model.json"), "{\"format_version\": 1}");
  CHECK(run_cli(dir, "predict --config config.ini").code == 3);  // corrupt

  // a target that is not a declared target column is a config error
  CHECK(run_cli(dir, "train --config config.ini --target CAL").code == 2);
}

TEST_CASE("output overrides route documents to files") {
  testutil::TempDir dir;
  write_fixture(dir);

  // train writes its info JSON to --out instead of stdout
  RunResult train =
      run_cli(dir, "train --config config.ini --out info.json");
  REQUIRE(train.code == 0);
  CHECK(train.out.empty());
  auto info = nlohmann::json::parse(testutil::read_file(dir.file("info.json")));
  CHECK(info.at("family") == "ngboost");

  // --target switches the modeled column
  RunResult dts =
      run_cli(dir, "train --config config.ini --target DTS --model dts.json");
  REQUIRE(dts.code == 0);
  CHECK(nlohmann::json::parse(dts.out).at("target") == "DTS");

  // --level feeds the interval probability through to prediction
  REQUIRE(run_cli(dir, "predict --config config.ini --out l80.csv").code == 0);
  REQUIRE(
      run_cli(dir, "predict --config config.ini --level 0.95 --out l95.csv")
          .code == 0);
  std::string l80 = testutil::read_file(dir.file("l80.csv"));
  std::string l95 = testutil::read_file(dir.file("l95.csv"));
  CHECK(l80 != l95);

  // identical mu/sigma, wider interval: compare the second data row's band
  auto band = [](const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);  // header
    std::getline(in, line);
    std::vector<double> cells;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(std::stod(cell));
    return cells.at(4) - cells.at(3);  // ci_hi - ci_lo
  };
  CHECK(band(l95) > band(l80));
}
