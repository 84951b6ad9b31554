#include "sbm/csv.hpp"

#include "fixtures.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

using namespace sbm;
namespace fs = std::filesystem;

namespace {

int sbm_cli(const std::string& args) {
  const std::string cmd = std::string(SBM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("sbm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_sample(const fs::path& dir, Eigen::Index n) {
  const auto s = fixture::shifted_groups(17, n);
  std::string f = "x0,x1,group,label\n";
  for (Eigen::Index i = 0; i < n; ++i)
    f += io::format_double(s.ds.features(i, 0)) + "," + io::format_double(s.ds.features(i, 1)) + "," +
         std::to_string(s.ds.groups[i]) + "," + std::to_string((*s.ds.labels)[i]) + "\n";
  io::write_file_atomic(dir / "features.csv", f);
  io::write_file_atomic(dir / "votes.csv", io::votes_to_csv(s.wl));
}

}  // namespace

TEST_CASE("run and validate") {
  const auto dir = scratch("run");
  write_sample(dir, 600);
  const std::string in = "--features " + q(dir / "features.csv") + " --votes " + q(dir / "votes.csv");
  CHECK(sbm_cli("validate " + in) == 0);
  CHECK(sbm_cli("run " + in + " --out " + q(dir / "out") + " --epochs 20 --ot-type sinkhorn") == 0);
  CHECK(fs::exists(dir / "out" / "fairness.json"));
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "out" / "manifest.json"));
  CHECK(manifest["config"]["ot_type"] == "sinkhorn");
  CHECK(manifest["config"]["epochs"] == 20);

  CHECK(sbm_cli("run " + in + " --out " + q(dir / "p") + " --passthrough --end-model off") == 0);

  io::write_file_atomic(dir / "bad.cfg", "colour=blue\n");
  CHECK(sbm_cli("run " + in + " --out " + q(dir / "x") + " --config " + q(dir / "bad.cfg")) == 1);
  CHECK(sbm_cli("run " + in + " --out " + q(dir / "x") + " --knn-k 0") == 1);
  CHECK(sbm_cli("run " + in + " --out " + q(dir / "x") + " --no-such-flag") == 1);
  CHECK(sbm_cli("") == 1);

  io::write_file_atomic(dir / "votes_bad.csv", "lf_0,lf_1,lf_2\n1,0,3\n");
  CHECK(sbm_cli("validate --features " + q(dir / "features.csv") + " --votes " + q(dir / "votes_bad.csv")) == 1);
  fs::remove_all(dir);
}

TEST_CASE("theory exit codes") {
  const auto dir = scratch("theory");
  const std::string small = "--n 5000 --lipschitz-pairs 2000 --theorem2-sizes 100,1000 --theorem2-eval 2000";
  CHECK(sbm_cli("theory " + small + " --out " + q(dir)) == 0);
  CHECK(fs::exists(dir / "theory.json"));
  CHECK(fs::exists(dir / "theorem1_sweep.csv"));
  // a sweep that stops at a small shift never reaches one half
  CHECK(sbm_cli("theory " + small + " --shifts 0,1") == 3);
  CHECK(sbm_cli("theory --shifts 5,1") == 1);
  fs::remove_all(dir);
}

TEST_CASE("lf-bank verb") {
  const auto dir = scratch("bank");
  io::write_file_atomic(dir / "bank.csv",
                        "age;marital;education;loan;duration;previous;poutcome;y\n"
                        "30;single;university.degree;yes;400;2;success;yes\n"
                        "22;married;basic.4y;no;100;0;nonexistent;no\n");
  CHECK(sbm_cli("lf-bank --bank bank-v1 --input " + q(dir / "bank.csv") + " --votes-out " + q(dir / "v.csv") +
                " --features-out " + q(dir / "f.csv")) == 0);
  const auto votes = io::read_votes_csv(dir / "v.csv");
  CHECK(votes.votes.m() == 6);
  CHECK(votes.votes.votes.row(0).isConstant(1));
  const auto features = io::read_raw_table(dir / "f.csv");
  CHECK(features.header.back() == "label");
  CHECK(sbm_cli("lf-bank --bank imdb --input " + q(dir / "bank.csv") + " --votes-out " + q(dir / "v.csv")) == 1);
  fs::remove_all(dir);
}
