#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pdmr/commands.hpp"
#include "pdmr/config.hpp"
#include "pdmr/output.hpp"
#include "pdmr/registry_io.hpp"

using namespace pdmr;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pdmr_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(PDMRSIM_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void dump(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string schema_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("default registry") {
  const Registry reg = load_default_registry();
  CHECK(reg.size() == 7);
  CHECK_NOTHROW(validate_registry(reg));
  const json prov = provenance_report(reg);
  CHECK(prov.contains("species"));
  CHECK(prov.at("assumed").is_array());
  CHECK_FALSE(prov.at("assumed").empty());
  // Round trip through the serializer.
  const Registry back = parse_registry(registry_to_json(reg));
  REQUIRE(back.size() == reg.size());
  for (std::size_t i = 0; i < reg.size(); ++i) {
    CHECK(back[i].name == reg[i].name);
    CHECK(back[i].zfs == reg[i].zfs);
    CHECK(back[i].sign == reg[i].sign);
    CHECK(back[i].photophysics.sigma_ion == reg[i].photophysics.sigma_ion);
    CHECK(back[i].thresholds.recovery_ev == reg[i].thresholds.recovery_ev);
  }
}

TEST_CASE("registry schema strictness") {
  json doc = json::parse(default_registry_json());
  doc[0]["colour"] = "red";
  CHECK(schema_message([&] { parse_registry(doc); }).find("colour") != std::string::npos);

  doc = json::parse(default_registry_json());
  doc[1]["rates"]["k_radd"] = 1.0;
  CHECK(schema_message([&] { parse_registry(doc); }).find("k_radd") != std::string::npos);

  doc = json::parse(default_registry_json());
  doc[1]["name"] = doc[0]["name"];
  CHECK_THROWS_AS(parse_registry(doc), SchemaError);

  doc = json::parse(default_registry_json());
  doc[0]["e_mhz"] = 5000.0;
  CHECK_THROWS_AS(parse_registry(doc), SchemaError);

  doc = json::parse(default_registry_json());
  doc[0]["provenance"] = "guessed";
  CHECK_THROWS_AS(parse_registry(doc), SchemaError);

  CHECK_THROWS_AS(parse_registry(std::string_view("{not json")), SchemaError);
  CHECK_THROWS_AS(parse_registry(std::string_view("{}")), SchemaError);
}

TEST_CASE("config schema strictness") {
  ExperimentConfig cfg;
  apply_config_json(json{{"kind", "spectrum"}, {"seed", 7}, {"f_start_mhz", 1200.0}}, cfg);
  CHECK(cfg.seed == 7);
  CHECK(cfg.f_start_mhz == 1200.0);
  CHECK(schema_message([&] { apply_config_json(json{{"sead", 7}}, cfg); }).find("sead") !=
        std::string::npos);
  CHECK_THROWS_AS(apply_config_json(json{{"seed", -1}}, cfg), SchemaError);
  CHECK_THROWS_AS(apply_config_json(json{{"channel", "XMR"}}, cfg), SchemaError);

  ExperimentConfig bad;
  bad.f_start_mhz = 1400.0;
  bad.f_stop_mhz = 1100.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ExperimentConfig{};
  bad.noise = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const auto g = log_grid(1.0, 10.0, 8);
  REQUIRE(g.size() == 8);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("output directory must be writable") {
  const fs::path d = scratch("ro");
  const fs::path file = d / "plain";
  dump(file, "x");
  CHECK_THROWS_AS(prepare_out_dir(file / "sub"), SchemaError);
  CHECK_NOTHROW(prepare_out_dir(d / "new" / "nested"));
}

TEST_CASE("csv emission and parsing") {
  const fs::path d = scratch("csv");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1332.6) == "1332.6");
  CHECK(format_number(-2.0) == "-2");

  Spectrum sp;
  sp.freq_mhz = {1100.0, 1100.2};
  sp.signal = {0.0, -1.5e-3};
  write_spectrum_csv(d / "s.csv", sp);
  CHECK(slurp(d / "s.csv") == "freq_mhz,signal\n1100,0\n1100.2,-0.0015\n");

  dump(d / "t.csv", "time_us,signal\n0,1\n0.02,0.5\n0.04,0.25\n");
  const auto tr = read_trace_csv(d / "t.csv");
  CHECK(tr.signal == std::vector<double>{1.0, 0.5, 0.25});

  dump(d / "bad.csv", "time_us,signal\n0,1\n0.02,abc\n");
  std::string msg = schema_message([&] { read_trace_csv(d / "bad.csv"); });
  CHECK(msg.find("row 3") != std::string::npos);
  CHECK(msg.find("signal") != std::string::npos);

  dump(d / "bad2.csv", "time_us,signal\n0,1\nx,0.5\n");
  msg = schema_message([&] { read_trace_csv(d / "bad2.csv"); });
  CHECK(msg.find("row 3") != std::string::npos);
  CHECK(msg.find("time_us") != std::string::npos);

  dump(d / "bad3.csv", "t,s\n0,1\n");
  CHECK(schema_message([&] { read_trace_csv(d / "bad3.csv"); }).find("row 1") != std::string::npos);

  dump(d / "bad4.csv", "time_us,signal\n0,1,2\n");
  CHECK(schema_message([&] { read_trace_csv(d / "bad4.csv"); }).find("row 2") != std::string::npos);
}

TEST_CASE("svg rendering is deterministic") {
  Plot p;
  p.title = "t";
  p.series.push_back({{1, 2, 3}, {4, 5, 6}});
  const std::string a = render_svg(p), b = render_svg(p);
  CHECK(a == b);
  CHECK(a.rfind("<svg", 0) == 0);
}

TEST_CASE("simulate-spectrum writes the documented files") {
  const fs::path d = scratch("spec");
  REQUIRE(run("simulate-spectrum --channel PDMR --fit --out-dir " + d.string()) == kExitOk);
  CHECK(fs::exists(d / "spectrum.csv"));
  CHECK(fs::exists(d / "spectrum.svg"));
  const json fit = read_json(d / "spectrum_fit.json");
  CHECK(fit.contains("provenance"));
  bool nv = false;
  for (const auto& p : fit.at("fit").at("peaks"))
    if (std::abs(p.at("center_mhz").get<double>() - 1321.9) < 1.0) nv = true;
  CHECK_FALSE(nv);
  CHECK(slurp(d / "spectrum.csv").rfind("freq_mhz,signal\n", 0) == 0);
}

TEST_CASE("zero MW power gives a flat spectrum") {
  const fs::path d = scratch("flat");
  REQUIRE(run("simulate-spectrum --mw-power 0 --noise 0 --out-dir " + d.string()) == kExitOk);
  const auto [f, s] = read_xy_csv(d / "spectrum.csv", "freq_mhz,signal");
  CHECK(f.size() == 1501);
  for (double v : s) CHECK(v == 0.0);
}

TEST_CASE("fit-rabi on external CSV") {
  const fs::path d = scratch("fitrabi");
  std::ostringstream csv;
  csv << "time_us,signal\n";
  for (int i = 0; i < 200; ++i) {
    const double t = 0.02 * i;
    csv << format_number(t) << "," << format_number(0.3 * std::cos(2.0 * M_PI * 2.5 * t) * std::exp(-0.4 * t)) << "\n";
  }
  dump(d / "in.csv", csv.str());
  REQUIRE(run("fit-rabi --input " + (d / "in.csv").string() + " --n-max 3 --out-dir " + d.string()) == kExitOk);
  const json j = read_json(d / "rabi_fit.json");
  REQUIRE(j.at("fit").at("components").size() == 1);
  CHECK(j.at("fit").at("components")[0].at("frequency_mhz").get<double>() == doctest::Approx(2.5).epsilon(1e-6));

  dump(d / "broken.csv", "time_us,signal\n0,1\n0.02,nope\n");
  CHECK(run("fit-rabi --input " + (d / "broken.csv").string() + " --out-dir " + d.string()) == kExitUsage);
}

TEST_CASE("usage and schema errors exit with 1") {
  const fs::path d = scratch("usage");
  CHECK(run("simulate-spectrum --bogus-flag") == kExitUsage);
  CHECK(run("no-such-command") == kExitUsage);
  dump(d / "cfg.json", R"({"kind": "spectrum", "sead": 3})");
  CHECK(run("simulate-spectrum --config " + (d / "cfg.json").string() + " --out-dir " + d.string()) == kExitUsage);
  dump(d / "cfg2.json", R"({"kind": "rabi"})");
  CHECK(run("simulate-spectrum --config " + (d / "cfg2.json").string() + " --out-dir " + d.string()) == kExitUsage);
  dump(d / "reg.json", R"([{"name": "X", "d_mhz": 1000, "e_mhz": 10, "orientation_class": "basal", "extra": 1}])");
  CHECK(run("simulate-spectrum --registry " + (d / "reg.json").string() + " --out-dir " + d.string()) == kExitUsage);
  CHECK(run("simulate-spectrum --f-start 1400 --f-stop 1100 --out-dir " + d.string()) == kExitUsage);
  CHECK(run("simulate-rabi --frequency 1200 --out-dir " + d.string()) == kExitUsage);
}

TEST_CASE("assign: ambiguity and missing partner") {
  const Registry reg = load_default_registry();

  // Undarkening PL3's upper transition gives the 1134.5 line two partners.
  Registry amb = reg;
  for (auto& s : amb)
    if (s.name == "PL3") s.dark_transitions.clear();
  const fs::path d = scratch("amb");
  dump(d / "reg.json", registry_to_json(amb).dump());
  CHECK(run("assign --registry " + (d / "reg.json").string() + " --out-dir " + d.string()) == kExitAmbiguity);
  const json a = read_json(d / "assignment.json");
  CHECK(a.at("status") == "ambiguous");
  CHECK_FALSE(a.at("conflicts").empty());

  Registry no7;
  for (const auto& s : reg)
    if (s.name != "PL7") no7.push_back(s);
  const fs::path e = scratch("no7");
  dump(e / "reg.json", registry_to_json(no7).dump());
  REQUIRE(run("assign --registry " + (e / "reg.json").string() + " --out-dir " + e.string()) == kExitOk);
  const json b = read_json(e / "assignment.json");
  bool lone = false;
  for (const auto& f : b.at("unpaired_mhz"))
    if (std::abs(f.get<double>() - 1134.5) < 0.5) lone = true;
  CHECK(lone);
}

TEST_CASE("reruns are byte-identical") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b}) {
    REQUIRE(run("simulate-spectrum --fit --seed 3 --out-dir " + d.string()) == kExitOk);
    REQUIRE(run("simulate-rabi --fit --seed 3 --frequency 1374.9 --out-dir " + d.string()) == kExitOk);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    ++files;
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
  CHECK(files >= 7);
  const fs::path c = scratch("det_c");
  REQUIRE(run("simulate-spectrum --seed 4 --out-dir " + c.string()) == kExitOk);
  CHECK(slurp(c / "spectrum.csv") != slurp(a / "spectrum.csv"));
}

TEST_CASE("in-process dispatch") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::PowerSweep;
  cfg.out_dir = scratch("sweep");
  std::ostringstream log;
  CHECK(run_command(cfg, load_default_registry(), log) == kExitOk);
  const json j = read_json(cfg.out_dir / "power_sweep.json");
  CHECK(j.contains("provenance"));
  CHECK(fs::exists(cfg.out_dir / "power_sweep.csv"));
}
