#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run sosarp(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + SOSARP_CLI + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string problem(const std::string& name) { return std::string(SOSARP_PROBLEM_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sosarp_cli_test";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double field(const std::string& text, const std::string& key) {
  const auto pos = text.find(key + "=");
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size() + 1));
}

}  // namespace

TEST_CASE("minimize converges on the quadratic and writes the documented CSV") {
  const fs::path csv = scratch("quad2.csv");
  const Run r = sosarp("minimize --problem " + problem("quad2.prob") + " --p 3 --eps 1e-6 --out " + csv.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("status=Converged") != std::string::npos);
  CHECK(field(r.out, "grad_norm") <= 1e-6);
  const std::string text = slurp(csv);
  CHECK(text.rfind("iter,case,lambda_min,sigma_bar,sigma_r,sigma,step_norm,rho,f,grad_norm,success\n", 0) == 0);
}

TEST_CASE("minimize reports the iteration limit with exit code 2") {
  const Run r = sosarp("minimize --problem " + problem("rosenbrock.prob") + " --max-iter 2");
  CHECK(r.code == 2);
  CHECK(r.out.find("status=MaxIterations") != std::string::npos);
}

TEST_CASE("bad flags are usage errors and leave no output file") {
  const fs::path csv = scratch("never.csv");
  CHECK(sosarp("minimize --problem " + problem("quad2.prob") + " --eps 2 --out " + csv.string()).code == 1);
  CHECK(sosarp("minimize --problem " + problem("quad2.prob") + " --a 0.5 --delta 0.1 --out " + csv.string())
            .code == 1);
  CHECK(sosarp("minimize --problem " + problem("quad2.prob") + " --gamma1 0.5 --out " + csv.string()).code ==
        1);
  CHECK(sosarp("minimize --problem /nonexistent.prob --out " + csv.string()).code == 1);
  CHECK(sosarp("scan-tensor --scales -1 --out " + csv.string()).code == 1);
  CHECK(sosarp("scan-delta --deltas 2 --out " + csv.string()).code == 1);
  CHECK(sosarp("scan-tensor --p 5 --out " + csv.string()).code == 1);
  CHECK(sosarp("minimize --problem " + problem("rosenbrock.prob") + " --p 4 --out " + csv.string()).code == 1);
  CHECK_FALSE(fs::exists(csv));
  CHECK(sosarp("").code == 1);
  CHECK(sosarp("frobnicate").code == 1);
}

TEST_CASE("certify prints the minimal weight") {
  const Run cubic = sosarp("certify --problem " + problem("cubic1.prob"));
  CHECK(cubic.code == 0);
  CHECK(std::abs(field(cubic.out, "sigma_bar") - 3.0) <= 1e-5);
  CHECK(cubic.out.find("sigma_bar=3.000000") != std::string::npos);

  const Run quad = sosarp("certify --problem " + problem("quad2.prob"));
  CHECK(quad.code == 0);
  CHECK(field(quad.out, "sigma_bar") == 0.0);
}

TEST_CASE("corrupted problem files are parse errors") {
  const fs::path bad = scratch("bad.prob");
  std::ofstream(bad) << "{\"name\": \"x\", \"n\": 2, \"kind\": ";
  const Run r = sosarp("certify --problem " + bad.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("error") != std::string::npos);
}

TEST_CASE("scan with a single scale emits rows and an empty slope") {
  const Run r = sosarp("scan-tensor --scales 10 --seeds 3");
  CHECK(r.code == 0);
  CHECK(r.out.find("kind,x,seed,sigma_bar\n") == 0);
  CHECK(r.out.find("cell,10,2,") != std::string::npos);
  CHECK(r.out.find("summary,10,,") != std::string::npos);
  CHECK(r.out.find("\nslope,,,\n") != std::string::npos);
  CHECK(r.out.find("\nfailures,,,0\n") != std::string::npos);
}

TEST_CASE("scan output is deterministic per seed and follows SOSARP_SEED") {
  const std::string args = "scan-delta --deltas 0.1,1 --seeds 3";
  const Run a = sosarp(args + " --seed 5 --threads 1");
  const Run b = sosarp(args + " --seed 5 --threads 3");
  const Run c = sosarp(args + " --seed 6");
  const Run env = sosarp(args, "SOSARP_SEED=5");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  CHECK(env.out == a.out);
  CHECK(sosarp(args, "SOSARP_SEED=junk").code == 1);
}

TEST_CASE("convex-rate refuses problems without the strongly convex flag") {
  const Run r = sosarp("convex-rate --problem " + problem("rosenbrock.prob"));
  CHECK(r.code == 1);
  CHECK(r.out.find("strongly convex") != std::string::npos);
}

TEST_CASE("convex-rate writes one row per tolerance and a trajectory") {
  const fs::path traj = scratch("traj.csv");
  const Run r = sosarp("convex-rate --problem " + problem("separable_quartic.prob") + " --eps-list 1e-2 --trajectory " +
                       traj.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("epsilon,successful_iterations,total_iterations,status,final_f\n") == 0);
  CHECK(r.out.find("0.01,") != std::string::npos);
  const std::string t = slurp(traj);
  CHECK(t.rfind("epsilon,iter,f,f_gap\n", 0) == 0);
}

TEST_CASE("check-derivs passes on bundled problems") {
  for (const char* name : {"quartic2.prob", "rosenbrock.prob", "sum_exp.prob", "cubic_quartic.prob"}) {
    CAPTURE(name);
    const Run r = sosarp(std::string("check-derivs --problem ") + problem(name));
    CHECK(r.code == 0);
    CHECK(r.out.find("result=pass") != std::string::npos);
  }
}
