#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kScratch{PTEMBED_TEST_SCRATCH};

struct Run {
  int exit_code = -1;
  std::string stdout_text;
  std::string stderr_text;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kScratch / "configs");
  const fs::path p = kScratch / "configs" / (name + ".json");
  std::ofstream(p) << body;
  return p;
}

Run run(const std::string& command, const fs::path& config, const fs::path& out, const std::string& extra = "") {
  const fs::path so = kScratch / "stdout.txt";
  const fs::path se = kScratch / "stderr.txt";
  const std::string cmd = std::string("\"") + PTEMBED_CLI_PATH + "\" " + command + " --config \"" + config.string() +
                          "\" --out \"" + out.string() + "\" " + extra + " > \"" + so.string() + "\" 2> \"" +
                          se.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stdout_text = slurp(so);
  r.stderr_text = slurp(se);
  return r;
}

struct Csv {
  std::string comment;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    FAIL("missing column " << name);
    return 0;
  }
  double at(std::size_t row, const std::string& name) const { return std::stod(rows[row][column(name)]); }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

Csv read_csv(const fs::path& p) {
  std::ifstream in(p);
  Csv csv;
  std::string line;
  REQUIRE(std::getline(in, line));
  csv.comment = line;
  REQUIRE(std::getline(in, line));
  csv.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) csv.rows.push_back(split(line));
  }
  return csv;
}

fs::path out_path(const std::string& name) { return kScratch / name; }

}  // namespace

TEST_CASE("verify: default run passes and writes a JSON report") {
  const Run r = run("verify", write_config("verify_default", "{}"), out_path("verify.json"));
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("PASS") != std::string::npos);
  const json doc = json::parse(slurp(out_path("verify.json")));
  CHECK(doc["passed"] == true);
  CHECK(doc["checks"].size() >= 25);
}

TEST_CASE("verify: cap violation exits 2 with CapExceeded") {
  const Run r = run("verify", write_config("verify_cap", R"({"dense_cap": 1, "n_spins": 3})"), out_path("cap.json"));
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("CapExceeded") != std::string::npos);
}

TEST_CASE("verify: tightened tolerance exits 1") {
  const Run r = run("verify", write_config("verify_tight", R"({"tolerance": 1e-30})"), out_path("tight.json"));
  CHECK(r.exit_code == 1);
  CHECK(r.stdout_text.find("FAIL") != std::string::npos);
}

TEST_CASE("config errors exit 2 with a one-line reason") {
  const Run unknown = run("fig4", write_config("unknown", R"({"n_min": 100, "bogus": 1})"), out_path("u.csv"));
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.stderr_text.find("bogus") != std::string::npos);
  CHECK(std::count(unknown.stderr_text.begin(), unknown.stderr_text.end(), '\n') == 1);

  CHECK(run("fig4", write_config("broken", "{not json"), out_path("b.csv")).exit_code == 2);
  CHECK(run("fig4", kScratch / "does_not_exist.json", out_path("m.csv")).exit_code == 2);
  CHECK(run("fig4", write_config("wrongtype", R"({"n_min": "ten"})"), out_path("w.csv")).exit_code == 2);
  CHECK(run("darkstate", write_config("both", R"({"alpha": 0.5, "theta": 0.5})"), out_path("d.csv")).exit_code == 2);
  CHECK(run("trajectory", write_config("domain", R"({"alpha": 2.0})"), out_path("t.csv")).exit_code == 2);
  CHECK(run("nonsense", write_config("empty", "{}"), out_path("n.csv")).exit_code == 2);
}

TEST_CASE("trajectory: default N = 1 run") {
  const Run r = run("trajectory", write_config("traj", R"({"n_spins": 1, "alpha": 0.8, "theta1": 1.0})"),
                    out_path("traj.csv"));
  REQUIRE(r.exit_code == 0);
  const Csv csv = read_csv(out_path("traj.csv"));
  CHECK(csv.comment.rfind("# ptembed", 0) == 0);
  CHECK(csv.comment.find("command=trajectory") != std::string::npos);
  const std::vector<std::string> lead{"t", "success_prob", "pt_norm", "euclid_norm", "oracle_distance", "re_0", "im_0"};
  for (std::size_t i = 0; i < lead.size(); ++i) CHECK(csv.header[i] == lead[i]);
  CHECK(csv.rows.size() == 101);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(csv.at(i, "oracle_distance") < 1e-9);
    CHECK(std::abs(csv.at(i, "pt_norm") - 1.0) < 1e-9);
  }
}

TEST_CASE("trajectory: t = 0 only and theta = 0") {
  REQUIRE(run("trajectory", write_config("traj0", R"({"n_spins": 2, "alpha": 0.9, "t_grid": [0]})"),
              out_path("traj0.csv"))
              .exit_code == 0);
  const Csv single = read_csv(out_path("traj0.csv"));
  REQUIRE(single.rows.size() == 1);
  CHECK(single.at(0, "oracle_distance") < 1e-12);

  REQUIRE(run("trajectory", write_config("traj_flat", R"({"n_spins": 3, "theta": 0.0})"), out_path("flat.csv"))
              .exit_code == 0);
  const Csv flat = read_csv(out_path("flat.csv"));
  for (std::size_t i = 0; i < flat.rows.size(); ++i) {
    CHECK(flat.at(i, "success_prob") == doctest::Approx(flat.at(0, "success_prob")).epsilon(1e-12));
  }

  REQUIRE(run("trajectory", write_config("traj_big", R"({"n_spins": 5, "theta": 0.2, "t_points": 3})"),
              out_path("big.csv"))
              .exit_code == 0);
  CHECK(read_csv(out_path("big.csv")).header.size() == 5);
}

TEST_CASE("fig2") {
  REQUIRE(run("fig2", write_config("fig2", "{}"), out_path("fig2.csv")).exit_code == 0);
  const Csv csv = read_csv(out_path("fig2.csv"));
  const std::vector<std::string> header{"alpha", "A1", "A2", "B1", "B2", "resynthesis_residual"};
  CHECK(csv.header == header);
  REQUIRE(csv.rows.size() == 151);
  CHECK(csv.at(0, "alpha") == 0.0);
  CHECK(std::abs(csv.at(0, "A1") - 1.0) < 1e-10);
  for (const char* col : {"A2", "B1", "B2"}) CHECK(std::abs(csv.at(0, col)) < 1e-10);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    CHECK(csv.at(i, "resynthesis_residual") < 1e-10);
    if (i > 0) CHECK(csv.at(i, "A1") < csv.at(i - 1, "A1"));
  }
}

TEST_CASE("fig3") {
  REQUIRE(run("fig3", write_config("fig3", R"({"alpha_grid": [0.0, 0.7, 1.5707], "n_grid": [1, 10, 100, 1000]})"),
              out_path("fig3.csv"))
              .exit_code == 0);
  const Csv csv = read_csv(out_path("fig3.csv"));
  REQUIRE(csv.rows.size() == 12);
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const double alpha = csv.at(i, "alpha");
    const double n = csv.at(i, "n_spins");
    const double d = csv.at(i, "dpmax");
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    if (alpha == 0.0) CHECK(d == doctest::Approx(std::pow(2.0, -n / 2)).epsilon(1e-12));
    if (alpha > 1.57 && n <= 10) CHECK(d > 0.99);
    if (i > 0 && csv.at(i - 1, "alpha") == alpha) CHECK(d < csv.at(i - 1, "dpmax"));
  }
}

TEST_CASE("fig4") {
  REQUIRE(run("fig4", write_config("fig4", "{}"), out_path("fig4.csv")).exit_code == 0);
  const Csv csv = read_csv(out_path("fig4.csv"));
  REQUIRE(csv.rows.size() == 901);
  CHECK(csv.at(0, "n_spins") == 100);
  CHECK(csv.at(0, "beta") == std::numbers::pi / 2);
  CHECK(csv.at(100, "n_spins") == 200);
  CHECK(csv.at(100, "beta") == doctest::Approx(std::acos(std::pow(0.25, 1.0 / 400))).epsilon(1e-14));
  for (std::size_t i = 1; i < csv.rows.size(); ++i) CHECK(csv.at(i, "beta") < csv.at(i - 1, "beta"));
}

TEST_CASE("fig5: small grid writes CSV and fit JSON") {
  const Run r = run("fig5",
                    write_config("fig5", R"({"n_min": 10, "n_max": 1000, "n_points": 12,
                                             "targets": [0.09, 0.54, 0.90], "theta1": 1.5707963267948966,
                                             "threads": 2})"),
                    out_path("fig5.csv"));
  REQUIRE(r.exit_code == 0);
  const Csv csv = read_csv(out_path("fig5.csv"));
  const std::vector<std::string> header{"target", "n_spins", "alpha", "log_n", "log_A_minus_alpha"};
  CHECK(csv.header == header);
  CHECK(csv.rows.size() == 36);
  const json doc = json::parse(slurp(out_path("fig5.json")));
  REQUIRE(doc["contours"].size() == 3);
  for (const auto& c : doc["contours"]) {
    CHECK(c.contains("A"));
    CHECK(c.contains("B"));
    CHECK(c.contains("gamma"));
    CHECK(c.contains("residual_rms"));
    CHECK(c["max_modsq_residual"].get<double>() < 1e-10);
  }
}

TEST_CASE("fig5: unreachable bracket skips sizes") {
  const Run r = run("fig5", write_config("fig5_skip", R"({"n_grid": [10, 20, 40, 80, 160, 320], "theta": 0.3,
                                                           "targets": [0.9]})"),
                    out_path("fig5_skip.csv"));
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("DegenerateFit") != std::string::npos);
}

TEST_CASE("darkstate") {
  const Run r = run("darkstate", write_config("dark", R"({"n_spins": 2, "alpha": 1.0, "m_y": 0.3})"),
                    out_path("dark.csv"));
  REQUIRE(r.exit_code == 0);
  CHECK(r.stdout_text.find("splitting") != std::string::npos);
  const Csv csv = read_csv(out_path("dark.csv"));
  bool found = false;
  for (const auto& row : csv.rows) {
    if (row[0] == "splitting") {
      CHECK(std::stod(row[1]) == doctest::Approx(0.6).epsilon(1e-9));
      found = true;
    }
  }
  CHECK(found);

  REQUIRE(run("darkstate", write_config("dark_flat", R"({"n_spins": 3, "theta": 0.0, "k": 0})"),
              out_path("dark_flat.csv"))
              .exit_code == 0);
  for (const auto& row : read_csv(out_path("dark_flat.csv")).rows) {
    if (row[0] == "spin_flip") CHECK(std::stod(row[1]) == doctest::Approx(1.0).epsilon(1e-12));
  }

  REQUIRE(run("darkstate",
              write_config("dark_ortho", R"({"n_spins": 6, "theta": 10.0, "theta1": 1.5707963267948966,
                                             "phi1_star": true})"),
              out_path("dark_ortho.csv"))
              .exit_code == 0);
  for (const auto& row : read_csv(out_path("dark_ortho.csv")).rows) {
    if (row[0] == "spin_flip") CHECK(std::stod(row[1]) < 1e-10);
  }
}

TEST_CASE("outputs are byte-identical across runs") {
  const fs::path cfg = write_config("det", R"({"n_spins": 2, "alpha": 0.7, "t_points": 21})");
  REQUIRE(run("trajectory", cfg, out_path("det_a.csv")).exit_code == 0);
  REQUIRE(run("trajectory", cfg, out_path("det_b.csv")).exit_code == 0);
  CHECK(slurp(out_path("det_a.csv")) == slurp(out_path("det_b.csv")));

  const fs::path cfg5 = write_config("det5", R"({"n_min": 10, "n_max": 300, "n_points": 8, "threads": 3})");
  REQUIRE(run("fig5", cfg5, out_path("det5_a.csv")).exit_code == 0);
  REQUIRE(run("fig5", cfg5, out_path("det5_b.csv")).exit_code == 0);
  CHECK(slurp(out_path("det5_a.csv")) == slurp(out_path("det5_b.csv")));
  CHECK(slurp(out_path("det5_a.json")) == slurp(out_path("det5_b.json")));

  const fs::path vcfg = write_config("detv", "{}");
  REQUIRE(run("verify", vcfg, out_path("va.json"), "--seed 7").exit_code == 0);
  REQUIRE(run("verify", vcfg, out_path("vb.json"), "--seed 7").exit_code == 0);
  CHECK(slurp(out_path("va.json")) == slurp(out_path("vb.json")));
}
