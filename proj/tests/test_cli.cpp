#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"

#include "dcl/dcl.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

class Workspace {
public:
  explicit Workspace(const std::string &name)
      : dir_(fs::temp_directory_path() / ("dcl_cli_" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Workspace() { fs::remove_all(dir_); }
  fs::path path(const std::string &name) const { return dir_ / name; }

  Result run(const std::string &args, const std::string &env = "") const {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + DCL_CLI + "\" " + args + " > \"" +
                            out.string() + "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

private:
  fs::path dir_;
};

std::string write_dump(const fs::path &path, dcl_shape s, std::uint64_t seed, bool same_views = false) {
  const std::size_t per_view = std::size_t{s.dim} * s.height * s.width;
  std::vector<float> v(std::size_t{s.instances} * s.views * per_view);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g;
  for (auto &x : v)
    x = g(rng);
  if (same_views)
    for (std::size_t i = 0; i < s.instances; ++i)
      std::copy_n(v.begin() + static_cast<std::ptrdiff_t>(i * 2 * per_view), per_view,
                  v.begin() + static_cast<std::ptrdiff_t>((i * 2 + 1) * per_view));
  dcl_dump *d = nullptr;
  REQUIRE(dcl_dump_create(&s, v.data(), &d) == DCL_OK);
  REQUIRE(dcl_dump_write_file(d, path.c_str()) == DCL_OK);
  dcl_dump_free(d);
  return path.string();
}

std::string fixture(const char *name) { return std::string(DCL_FIXTURES) + "/" + name; }

std::vector<std::vector<std::string>> split_csv(const std::string &text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#')
      continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ','))
      fields.push_back(field);
    rows.push_back(fields);
  }
  return rows;
}

std::string join_csv(const std::string &text) {
  std::string out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      out += line + "\n";
      continue;
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ','))
      fields.push_back(field);
    for (std::size_t k = 0; k < fields.size(); ++k)
      out += (k ? "," : "") + fields[k];
    out += "\n";
  }
  return out;
}

} // namespace

TEST_CASE("cli usage errors") {
  Workspace ws("usage");
  CHECK(ws.run("").code == 2);
  CHECK(ws.run("frobnicate").code == 2);
  CHECK(ws.run("metrics").code == 2);
  const Result v = ws.run("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("metrics of identical views") {
  Workspace ws("metrics_same");
  const std::string in = write_dump(ws.path("same.dclf"), {3, 2, 4, 2, 2}, 1, true);
  const Result r = ws.run("metrics -i " + in);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["results"][0]["l_a"]["sq_distance"].get<double>() == 0.0);
  CHECK(j["results"][0]["l_a"]["neg_cosine"].get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(j["failures"].empty());
  CHECK(j["provenance"]["command"] == "metrics");
  CHECK(j["provenance"]["inputs"][0]["shape"]["N"] == 3);
}

TEST_CASE("metrics agree with direct library calls") {
  Workspace ws("metrics_golden");
  const std::string in = write_dump(ws.path("x.dclf"), {4, 2, 5, 2, 3}, 2);
  const Result r = ws.run("metrics -i " + in + " --temperature 0.3 --seed 5");
  REQUIRE(r.code == 0);
  const json res = json::parse(r.out)["results"][0];

  dcl_dump *d = nullptr;
  REQUIRE(dcl_dump_read_file(in.c_str(), &d) == DCL_OK);
  dcl_loss_config cfg;
  dcl_loss_config_init(&cfg);
  cfg.temperature = 0.3;
  cfg.seed = 5;
  double lu = 0, sq = 0;
  dcl_loss_report dense{}, inst{};
  REQUIRE(dcl_uniformity_loss(d, &cfg, &lu) == DCL_OK);
  REQUIRE(dcl_alignment_loss(d, &cfg, &sq) == DCL_OK);
  REQUIRE(dcl_dense_info_nce(d, nullptr, &cfg, &dense) == DCL_OK);
  REQUIRE(dcl_instance_info_nce(d, &cfg, &inst) == DCL_OK);
  CHECK(res["l_u"].get<double>() == lu);
  CHECK(res["l_a"]["sq_distance"].get<double>() == sq);
  CHECK(res["dense_info_nce"]["value"].get<double>() == dense.value);
  CHECK(res["instance_info_nce"]["value"].get<double>() == inst.value);
  char *digest = nullptr;
  REQUIRE(dcl_dump_digest(d, &digest) == DCL_OK);
  CHECK(json::parse(r.out)["provenance"]["inputs"][0]["fnv1a"] == std::string(digest));
  dcl_string_free(digest);
  dcl_dump_free(d);
}

TEST_CASE("metrics reports a corrupt dump") {
  Workspace ws("metrics_corrupt");
  const std::string good = write_dump(ws.path("good.dclf"), {2, 2, 3, 1, 2}, 3);
  std::string bytes = slurp(good);
  bytes[0] = 'X';
  std::ofstream(ws.path("bad.dclf"), std::ios::binary) << bytes;
  const Result alone = ws.run("metrics -i " + ws.path("bad.dclf").string());
  CHECK(alone.code != 0);
  CHECK(alone.err.find("offset 0") != std::string::npos);
  const Result mixed = ws.run("metrics -i " + good + " -i " + ws.path("bad.dclf").string());
  CHECK(mixed.code == 3);
  const json j = json::parse(mixed.out);
  CHECK(j["results"].size() == 1);
  CHECK(j["failures"].size() == 1);
  CHECK(ws.run("metrics -i " + ws.path("missing.dclf").string()).code == 1);
}

TEST_CASE("metrics CSV output") {
  Workspace ws("metrics_csv");
  const std::string in = write_dump(ws.path("x.dclf"), {2, 2, 3, 1, 2}, 4);
  const Result r = ws.run("metrics -i " + in + " --format csv");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# command=metrics\n") != std::string::npos);
  const auto rows = split_csv(r.out);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"input", "metric", "value"});
  CHECK(join_csv(r.out) == r.out);
}

TEST_CASE("correlate on the fixtures") {
  Workspace ws("correlate");
  for (const char *task : {"acc", "ap"}) {
    const Result r = ws.run("correlate --records " + fixture("coco_instance_pretraining.csv") +
                            " --task " + task);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["n"] == 60);
    CHECK(j["points"].size() == 60);
    CHECK(j["provenance"]["config"]["task"] == task);
    CHECK(j["tau"].get<double>() < 0.0);
  }
  const Result csv = ws.run("correlate --records " + fixture("coco_dense_pretraining.csv") +
                            " --format csv");
  REQUIRE(csv.code == 0);
  CHECK(csv.out.find("# task=acc\n") != std::string::npos);
  CHECK(split_csv(csv.out).size() == 60);
  const Result filtered = ws.run("correlate --records " + fixture("coco_instance_pretraining.csv") +
                                 " --filter w_c=0");
  REQUIRE(filtered.code == 0);
  CHECK(json::parse(filtered.out)["n"].get<int>() < 60);
}

TEST_CASE("correlate edge cases") {
  Workspace ws("correlate_edge");
  std::ofstream(ws.path("two.csv")) << "id,la_inst,lu_inst,acc\na,0.1,-3,60\nb,0.2,-2,50\n";
  const Result two = ws.run("correlate --records " + ws.path("two.csv").string());
  REQUIRE(two.code == 0);
  CHECK(json::parse(two.out)["tau"].get<double>() == -1.0);
  const Result unknown = ws.run("correlate --records " + fixture("coco_instance_pretraining.csv") +
                                " --task top5");
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("schema") != std::string::npos);
  CHECK(unknown.err.find("acc, ap") != std::string::npos);
}

TEST_CASE("match emits one row per anchor and the policy header") {
  Workspace ws("match");
  const std::string in = write_dump(ws.path("x.dclf"), {2, 2, 3, 2, 2}, 5);
  const Result r = ws.run("match -i " + in);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("# negatives_per_anchor=11\n") != std::string::npos);
  CHECK(r.out.find("# strategy=index_wise\n") != std::string::npos);
  const auto rows = split_csv(r.out);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"i", "p", "q"});
  const Result ot = ws.run("match -i " + in + " --matching ot --format json");
  REQUIRE(ot.code == 0);
  CHECK(json::parse(ot.out)["pairs"]["strategy"] == "optimal_transport");
  CHECK(ws.run("match -i " + in + " --matching nearest").code == 1);
}

TEST_CASE("transport plans") {
  Workspace ws("transport");
  const std::string in = write_dump(ws.path("x.dclf"), {2, 2, 4, 2, 3}, 6);
  const Result r = ws.run("transport -i " + in + " --iters 50");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["plans"].size() == 2);
  for (const auto &p : j["plans"]) {
    CHECK(std::isfinite(p["marginal_residual"].get<double>()));
    CHECK(p["plan"].size() == 6);
  }
  const Result one = ws.run("transport -i " + in + " --instance 1");
  CHECK(json::parse(one.out)["plans"][0]["instance"] == 1);
  const Result bad = ws.run("transport -i " + in + " --instance 5");
  CHECK(bad.code == 3);
  CHECK(ws.run("transport -i " + in + " --reg 0").code == 3);

  const std::string big = write_dump(ws.path("big.dclf"), {2, 2, 3, 9, 9}, 7);
  CHECK(ws.run("transport -i " + big).code == 1);
  const fs::path out = ws.path("out/plans.json");
  const Result side = ws.run("transport -i " + big + " -o " + out.string());
  REQUIRE(side.code == 0);
  const json sj = json::parse(slurp(out));
  CHECK(sj["sidecar"] == "plans.json.plans.dclf");
  CHECK_FALSE(sj["plans"][0].contains("plan"));
  dcl_dump *d = nullptr;
  REQUIRE(dcl_dump_read_file(ws.path("out/plans.json.plans.dclf").c_str(), &d) == DCL_OK);
  dcl_shape s{};
  dcl_dump_get_shape(d, &s);
  CHECK(s.instances == 2);
  CHECK(s.height == 81);
  dcl_dump_free(d);
}

TEST_CASE("optimize is deterministic and exports embeddings") {
  Workspace ws("optimize");
  const std::string args = "optimize --n 8 --hw 2 --d 4 --steps 20 --seed 3";
  const Result a = ws.run(args), b = ws.run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.find("# mean_positive_cosine=") != std::string::npos);
  const auto rows = split_csv(a.out);
  REQUIRE(rows.size() == 22);
  CHECK(rows[0] == std::vector<std::string>{"step", "l_a", "l_u", "loss"});
  CHECK(ws.run(args + " --seed 4").out != a.out);
  const Result j = ws.run(args + " --format json --export " + ws.path("emb/final.dclf").string());
  REQUIRE(j.code == 0);
  CHECK(json::parse(j.out)["history"].size() == 21);
  CHECK(fs::exists(ws.path("emb/final.dclf")));
  CHECK(ws.run("optimize --n 1").code == 1);
}

TEST_CASE("output directory from the environment") {
  Workspace ws("envdir");
  const std::string in = write_dump(ws.path("x.dclf"), {2, 2, 3, 1, 2}, 8);
  const fs::path dir = ws.path("results");
  const Result r = ws.run("match -i " + in, "DCL_OUTPUT_DIR=" + dir.string());
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  CHECK(fs::exists(dir / "match.csv"));
  const Result m = ws.run("metrics -i " + in, "DCL_OUTPUT_DIR=" + dir.string());
  REQUIRE(m.code == 0);
  CHECK(fs::exists(dir / "metrics.json"));
  const Result explicit_out = ws.run("metrics -i " + in + " -o " + ws.path("m.json").string(),
                                     "DCL_OUTPUT_DIR=" + dir.string());
  CHECK(fs::exists(ws.path("m.json")));
}

TEST_CASE("every command is byte-identical across runs and thread counts") {
  Workspace ws("determinism");
  const std::string in = write_dump(ws.path("x.dclf"), {6, 2, 8, 3, 3}, 9);
  const std::vector<std::string> commands{
      "metrics -i " + in + " --seed 1 --pair-subsample 500",
      "metrics -i " + in + " --matching ot --format csv",
      "match -i " + in + " --matching cosine",
      "match -i " + in + " --matching ot --format json",
      "transport -i " + in,
      "correlate --records " + fixture("coco_instance_pretraining.csv") + " --task ap",
      "optimize --n 16 --hw 2 --d 4 --steps 30 --seed 2 --w-c 1",
  };
  for (const auto &c : commands) {
    const Result a = ws.run(c + " --threads 1");
    const Result b = ws.run(c + " --threads 1");
    const Result many = ws.run(c + " --threads 4");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == many.out);
    if (a.out.front() == '{') {
      const json j = json::parse(a.out);
      CHECK(j.dump(2) + "\n" == a.out);
    } else {
      CHECK(join_csv(a.out) == a.out);
    }
  }
}
