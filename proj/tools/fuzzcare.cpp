// fuzzcare: command-line front end for the cardiology fuzzy expert system.
//
// Exit codes: 0 ok, 1 domain failure (validation, calibration), 2 usage or IO.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "fuzzcare/calibrate.hpp"
#include "fuzzcare/diagnosis.hpp"
#include "fuzzcare/eval.hpp"
#include "fuzzcare/patient_csv.hpp"
#include "fuzzcare/rule_dsl.hpp"
#include "fuzzcare/service.hpp"

namespace {

using namespace fuzzcare;

constexpr int kOk = 0;
constexpr int kDomainFailure = 1;
constexpr int kUsage = 2;

struct Config {
  std::string kb_path;
  std::string store_path = "fuzzcare_store.jsonl";
  std::string format = "table";
  std::size_t resolution = kDefaultResolution;

  bool json() const { return format == "json"; }
};

// Thrown for IO and usage problems detected after argument parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw UsageError("cannot write '" + path + "'");
}

// --kb, then FUZZCARE_KB, then the compiled-in kb. serve lets the
// environment win over the flag.
KnowledgeBase load_kb(const Config& config, bool env_overrides = false) {
  std::string path = config.kb_path;
  const char* env = std::getenv("FUZZCARE_KB");
  if (env != nullptr && *env != '\0' && (env_overrides || path.empty())) path = env;
  try {
    return path.empty() ? load_default_kb() : load_kb_file(path);
  } catch (const KbError& e) {
    throw UsageError(e.what());
  }
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

struct DiagnoseArgs {
  std::array<std::optional<double>, 7> values;
  std::string gender = "unspecified";
};

int cmd_diagnose(const Config& config, const DiagnoseArgs& args) {
  const KnowledgeBase kb = load_kb(config);
  DiagnosisSession session;
  for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
    if (args.values[i]) session.set_input(kCardioInputs[i], *args.values[i]);
  }
  const auto gender = gender_from_string(args.gender);
  if (!gender) throw UsageError("--gender: must be male, female or unspecified");
  session.set_gender(*gender);

  const RuleBase base = build_rule_base(kb);
  DiagnosisReport report;
  try {
    report = session.diagnose(base, kb, config.resolution);
  } catch (const FieldError& e) {
    std::string flag = e.field();
    std::replace(flag.begin(), flag.end(), '_', '-');
    throw UsageError("--" + flag + ": " + e.what());
  } catch (const OutOfUniverse& e) {
    std::string flag = e.variable();
    std::replace(flag.begin(), flag.end(), '_', '-');
    throw UsageError("--" + flag + ": " + e.what());
  }
  session.recommend();

  if (config.json()) {
    std::cout << report_to_json(report).dump(2) << "\n";
    return kOk;
  }
  std::cout << "label: " << report.label << "\n";
  std::cout << "score: " << fixed(report.score, 4) << "\n";
  std::cout << "fired rules: " << report.fired.size() << "\n";
  for (std::size_t i = 0; i < report.fired.size() && i < 5; ++i) {
    const auto& f = report.fired[i];
    std::cout << "  " << f.id << "  " << fixed(f.strength, 4) << "  " << f.text << "\n";
  }
  std::cout << "dosage: " << report.dosage.level << ": " << report.dosage.guidance << "\n";
  std::cout << "note: " << report.dosage.disclaimer << "\n";
  return kOk;
}

int cmd_gen_rules(const Config& config, const std::string& out) {
  const KnowledgeBase kb = load_kb(config);
  const RuleBase base = build_rule_base(kb);
  const std::string text = render_rules(base.rules());
  if (out.empty()) {
    std::cout << text;
    std::cerr << base.size() << "\n";
    return kOk;
  }
  write_file(out, text);
  if (config.json()) {
    std::cout << Json{{"rules", base.size()}, {"out", out}}.dump() << "\n";
  } else {
    std::cout << base.size() << "\n";
  }
  return kOk;
}

int cmd_eval(const Config& config, const std::string& csv_path) {
  const KnowledgeBase kb = load_kb(config);
  std::vector<LabeledRecord> rows;
  try {
    rows = parse_labeled_csv(read_file(csv_path));
  } catch (const CsvError& e) {
    throw UsageError(csv_path + ": " + e.what());
  }
  const RuleBase base = build_rule_base(kb);
  EvalResult result;
  try {
    result = run_eval(base, kb, rows, config.resolution);
  } catch (const OutOfUniverse& e) {
    throw UsageError(csv_path + ": " + e.what());
  }

  if (config.json()) {
    std::cout << eval_to_json(result).dump(2) << "\n";
    return kOk;
  }
  std::cout << "row  expected  produced  score    match  probability\n";
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const auto& r = result.rows[i];
    char line[160];
    std::snprintf(line, sizeof line, "%-4zu %-9s %-9s %-8s %-6s %s\n", i + 1, r.expected.c_str(), r.produced.c_str(),
                  fixed(r.score, 4).c_str(), r.match ? "yes" : "no",
                  r.probability ? fixed(*r.probability, 2).c_str() : "-");
    std::cout << line;
  }
  const auto& s = result.summary;
  std::cout << "n: " << s.n << "\n";
  std::cout << "matches: " << s.matches << "\n";
  std::cout << "agreement: " << fixed(s.agreement, 4) << "\n";
  std::cout << "binary agreement: " << fixed(s.binary_agreement, 4) << "\n";
  std::cout << "mean probability: " << (s.mean_probability ? fixed(*s.mean_probability, 4) : "-") << "\n";
  return kOk;
}

int cmd_validate(const Config& config) {
  const KnowledgeBase kb = load_kb(config);
  const ValidationReport report = validate_kb(kb);
  if (config.json()) {
    Json findings = Json::array();
    for (const auto& f : report.findings) findings.push_back({{"check", f.check}, {"ok", f.ok}, {"message", f.message}});
    std::cout << Json{{"passed", report.passed},
                      {"policy_disagreements", report.policy_disagreements},
                      {"findings", std::move(findings)}}
                     .dump(2)
              << "\n";
  } else {
    for (const auto& f : report.findings) {
      std::cout << (f.ok ? "[ok]   " : "[FAIL] ") << f.check << ": " << f.message << "\n";
    }
    std::cout << (report.passed ? "passed" : "failed") << "\n";
  }
  return report.passed ? kOk : kDomainFailure;
}

int cmd_calibrate(const Config& config, const std::string& table, const std::string& out, const std::string& base_kb) {
  const KnowledgeBase start = [&] {
    try {
      return base_kb.empty() ? anchored_kb() : load_kb_file(base_kb);
    } catch (const KbError& e) {
      throw UsageError(e.what());
    }
  }();
  std::vector<LabeledRecord> rows;
  try {
    rows = parse_labeled_csv(read_file(table));
  } catch (const CsvError& e) {
    throw UsageError(table + ": " + e.what());
  }
  CalibrationOptions options;
  options.resolution = config.resolution;
  std::optional<KnowledgeBase> result;
  try {
    result = calibrate(start, rows, options);
  } catch (const CalibrationFailed& e) {
    std::cerr << "calibrate: " << e.what() << "\n";
    return kDomainFailure;
  }
  const KnowledgeBase& calibrated = *result;
  write_file(out, dump_kb(calibrated));
  const std::size_t matches = calibrated.calibration ? calibrated.calibration->matches : 0;
  if (config.json()) {
    std::cout << Json{{"rows", rows.size()}, {"matches", matches}, {"out", out}}.dump() << "\n";
  } else {
    std::cout << "agreement: " << matches << "/" << rows.size() << "\n";
    std::cout << "wrote " << out << "\n";
  }
  return kOk;
}

int cmd_serve(const Config& config, const std::string& listen) {
  std::pair<std::string, int> address;
  try {
    address = parse_listen(listen);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--listen: ") + e.what());
  }
  const KnowledgeBase kb = load_kb(config, true);
  std::shared_ptr<DiagnosisStore> store;
  try {
    store = std::make_shared<DiagnosisStore>(config.store_path);
  } catch (const StorageError& e) {
    throw UsageError(e.what());
  }
  DiagnosisService service(kb, store, config.resolution);
  HttpServer server(service);

  // Block the stop signals before any server thread exists so only the
  // waiter below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int port = server.bind(address.first, address.second);
  if (port < 0) throw UsageError("cannot bind " + listen);
  std::thread([&server, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  }).detach();

  std::cerr << "fuzzcare: serving kb " << kb.version << " on " << address.first << ":" << port << ", store "
            << config.store_path << "\n";
  return server.listen_after_bind() ? kOk : kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy expert system for heart disease risk and dosage level"};
  app.require_subcommand(1);
  Config config;
  app.add_option("--kb", config.kb_path, "Knowledge base JSON (default: built in)");
  app.add_option("--store", config.store_path, "Diagnosis append log used by serve");
  app.add_option("--format", config.format, "Output format")->check(CLI::IsMember({"table", "json"}));
  app.add_option("--resolution", config.resolution, "Centroid sampling resolution")
      ->check(CLI::Range(static_cast<std::size_t>(kMinResolution), static_cast<std::size_t>(10'000'000)));

  DiagnoseArgs diag;
  auto* diagnose = app.add_subcommand("diagnose", "Diagnose one patient");
  for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
    std::string flag = "--" + std::string(kCardioInputs[i]);
    std::replace(flag.begin(), flag.end(), '_', '-');
    diagnose->add_option(flag, diag.values[i], std::string(kCardioInputs[i]));
  }
  diagnose->add_option("--gender", diag.gender, "male, female or unspecified");

  std::string rules_out;
  auto* gen_rules = app.add_subcommand("gen-rules", "Write the full rule base in rule DSL form");
  gen_rules->add_option("--out", rules_out, "Output path (default: stdout, count on stderr)");

  std::string eval_csv;
  auto* eval = app.add_subcommand("eval", "Compare diagnoses against a labelled CSV");
  eval->add_option("--csv", eval_csv, "Labelled CSV")->required();

  app.add_subcommand("validate", "Check the knowledge base");

  std::string table, calibrated_out, base_kb;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit term centres to a labelled CSV and write a kb");
  calibrate_cmd->add_option("--table2", table, "Labelled CSV")->required();
  calibrate_cmd->add_option("--out", calibrated_out, "Output kb path")->required();
  calibrate_cmd->add_option("--base", base_kb, "Starting kb (default: built-in anchors)");

  std::string listen = "127.0.0.1:8080";
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--listen", listen, "host:port");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*diagnose) {
      for (std::size_t i = 0; i < kCardioInputs.size(); ++i) {
        if (!diag.values[i]) {
          std::string flag = std::string(kCardioInputs[i]);
          std::replace(flag.begin(), flag.end(), '_', '-');
          throw UsageError("--" + flag + " is required (" + std::string(kCardioInputs[i]) + ")");
        }
      }
      return cmd_diagnose(config, diag);
    }
    if (*gen_rules) return cmd_gen_rules(config, rules_out);
    if (*eval) return cmd_eval(config, eval_csv);
    if (app.got_subcommand("validate")) return cmd_validate(config);
    if (*calibrate_cmd) return cmd_calibrate(config, table, calibrated_out, base_kb);
    if (*serve) return cmd_serve(config, listen);
  } catch (const UsageError& e) {
    std::cerr << "fuzzcare: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "fuzzcare: " << e.what() << "\n";
    return kDomainFailure;
  }
  return kUsage;
}
