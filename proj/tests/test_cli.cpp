// CLI contract: exit codes, byte-determinism across worker counts, output
// schemas. Shells out to the real binary (path injected by the build).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
  int code;
  std::string out;
};

RunResult run_raw(const std::string& cmd) {
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

RunResult run(const std::string& args) {
  return run_raw(std::string(DICKE_QFI_BIN) + " " + args + " 2>/dev/null");
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("help succeeds, config mistakes exit 2") {
  CHECK(run("--help").code == 0);
  CHECK(run("qfi-scan --help").code == 0);
  CHECK(run("qfi-scan --bogus-flag 1").code == 2);
  CHECK(run("").code == 2);                              // subcommand required
  CHECK(run("qfi-scan --nb 2").code == 2);               // no coupling grid
  CHECK(run("qfi-scan --nb 2 --g 0.1 --g-min 0 --g-max 1 --g-steps 3").code == 2);
  CHECK(run("qfi-scan --nb 2 --g 0.1 --format yaml").code == 2);
  CHECK(run("phase-diagram --g-min 0 --g-max 1 --g-steps 2 --mode ed").code == 2);
  CHECK(run("witness --nb 3 --widths 1,2").code == 2);   // mutually exclusive
  CHECK(run("witness").code == 2);
}

TEST_CASE("witness emits the threshold table") {
  const auto r = run("witness --nb 3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "k,f_threshold\n1,3\n2,5\n3,9\n"));

  const auto j = run("witness --widths 3,2,1 --fq 27 --format json");
  CHECK(j.code == 0);
  CHECK(contains(j.out, "\"depth_bound\":3"));
  CHECK(contains(j.out, "\"columns\":[\"k\",\"f_threshold\"]"));
  CHECK(contains(j.out, "[1,14]"));
  CHECK(contains(j.out, "[2,26]"));
  CHECK(contains(j.out, "[3,36]"));
}

TEST_CASE("qfi-scan rows, schema, and determinism") {
  const std::string base =
      "qfi-scan --nb 2 --cutoff 24 --kappa 0 --temp-k 300 --g-min 0.1 --g-max 1.2 --g-steps 6";

  const auto r1 = run(base + " --workers 1");
  REQUIRE(r1.code == 0);
  CHECK(contains(r1.out, "g,G,f_q_max,n_x,n_y,n_z,depth_bound,tail_weight,cutoff_used\n"));
  // preamble comments + header + one row per grid point
  CHECK(count_lines(r1.out) == 8 + 1 + 6);

  SUBCASE("worker count never changes the bytes") {
    const auto r4 = run(base + " --workers 4");
    CHECK(r4.code == 0);
    CHECK(r1.out == r4.out);
    // popen wraps in sh, so the env prefix lands on the real binary
    const auto renv = run_raw("DICKE_QFI_WORKERS=3 " + std::string(DICKE_QFI_BIN) + " " + base +
                              " 2>/dev/null");
    CHECK(renv.out == r1.out);
  }

  SUBCASE("json carries the same table") {
    const auto j = run(base + " --format json");
    CHECK(j.code == 0);
    CHECK(j.out.rfind("{\"params\":{", 0) == 0);
    CHECK(contains(j.out, "\"columns\":[\"g\",\"G\","));
    CHECK(contains(j.out, "\"mode\":\"ed\""));
    CHECK(count_lines(j.out) >= 6);
  }

  SUBCASE("single point via --g") {
    const auto r = run("qfi-scan --nb 2 --cutoff 24 --g 0.3 --temp-k 0");
    CHECK(r.code == 0);
    CHECK(count_lines(r.out) == 8 + 1 + 1);
  }
}

TEST_CASE("analytic scan marks the critical divergence") {
  const auto r = run("qfi-scan --mode analytic --kappa 0 --temp-k 0 --g-min 0.4 --g-max 0.6 "
                     "--g-steps 3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "G,f_q_max,n_x,n_y,n_z,depth_bound,divergent\n"));
  CHECK(contains(r.out, "0.5,inf,"));   // lambda peak exactly at G_c
  CHECK(contains(r.out, ",1\n"));       // divergent flag set on that row

  const auto j = run("qfi-scan --mode analytic --kappa 0 --temp-k 0 --g 0.5 --format json");
  CHECK(j.code == 0);
  CHECK(contains(j.out, "null"));       // inf has no JSON token
}

TEST_CASE("phase diagram emits grid plus boundary polylines") {
  const auto r = run("phase-diagram --g-min 0.1 --g-max 1.0 --g-steps 3 "
                     "--kappa-min 0 --kappa-max 1 --kappa-steps 3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "# table=grid"));
  CHECK(contains(r.out, "# table=g_c"));
  CHECK(contains(r.out, "# table=g_ew"));
  CHECK(contains(r.out, "# kappa_ew=0.786151377757"));
  CHECK(contains(r.out, "kappa,G,f_q_max,divergent\n"));
  CHECK(contains(r.out, "\n0,0.5\n"));          // G_c(kappa=0) boundary point
  // kappa = 1 row exists in the grid but in neither boundary table
  CHECK(contains(r.out, "\n1,0.1,"));

  SUBCASE("json variant nests the boundaries") {
    const auto j = run("phase-diagram --g-min 0.1 --g-max 1.0 --g-steps 2 "
                       "--kappa-min 0 --kappa-max 0.5 --kappa-steps 2 --format json");
    CHECK(j.code == 0);
    CHECK(contains(j.out, "\"boundaries\":{\"g_c\":"));
    CHECK(contains(j.out, "\"g_ew\":"));
  }

  SUBCASE("coupling-temperature slice") {
    const auto r2 = run("phase-diagram --kappa 0 --g-min 0.4 --g-max 0.5 --g-steps 2 "
                        "--temp-min 100 --temp-max 300 --temp-steps 2");
    CHECK(r2.code == 0);
    CHECK(contains(r2.out, "G,temp_k,f_q_max,divergent\n"));
    CHECK(contains(r2.out, "# g_c=0.5"));
    CHECK(count_lines(r2.out) >= 4);
  }
}

TEST_CASE("spectrum writes the csv and echoes the inversion") {
  const std::string sig = "/tmp/dicke_cli_sig.csv";

  const auto r = run("spectrum --nb 2 --cutoff 24 --g 0.1 --temp-k 300 --gamma-mev 2 --out " +
                     sig);
  CHECK(r.code == 0);
  CHECK(contains(r.out, "f_q_spectrum="));
  CHECK(contains(r.out, "f_q_direct="));
  CHECK(contains(r.out, "rel_dev="));
  const auto csv = slurp(sig);
  CHECK(contains(csv, "omega_ev,absorption\n"));
  CHECK(contains(csv, "# temperature_k=300\n"));
  CHECK(contains(csv, "# linewidth_ev=0.002"));

  SUBCASE("decoupled signal is its own reference") {
    const auto r0 = run("spectrum --nb 2 --cutoff 8 --g 0 --temp-k 300 --out " + sig);
    CHECK(r0.code == 0);
    CHECK(contains(r0.out, "f_q_spectrum=1\n"));
    CHECK(contains(r0.out, "rel_dev=0\n"));
  }
  SUBCASE("unwritable path exits 2 naming it") {
    CHECK(run("spectrum --nb 2 --cutoff 8 --g 0.1 --out /nonexistent/dir/x.csv").code == 2);
  }
  SUBCASE("grid that clips the lines exits 2") {
    CHECK(run("spectrum --nb 2 --cutoff 8 --g 0.1 --omega-min 3 --omega-max 4 --points 100 "
              "--out " + sig).code == 2);
  }
  SUBCASE("partial explicit grid exits 2") {
    CHECK(run("spectrum --nb 2 --cutoff 8 --g 0.1 --omega-min 0 --out " + sig).code == 2);
  }
  std::remove(sig.c_str());
}

TEST_CASE("compare exit codes follow the tolerance") {
  // small sizes run fast but sit ~6% off the thermodynamic limit, so give the
  // passing case headroom; the physics-grade convergence check lives elsewhere
  const std::string base =
      "compare --g 0.3 --kappa 0 --temp-k 0 --cutoff 24 --nb-list 2,4 --tol 0.2";
  const auto ok = run(base);
  CHECK(ok.code == 0);
  CHECK(contains(ok.out, "n_b,f_q_ed,f_q_analytic,rel_dev\n"));
  CHECK(count_lines(ok.out) == 8 + 1 + 2);

  // finite-size deviation at N_B = 4 is percent-scale, far above 1e-9
  CHECK(run("compare --g 0.3 --kappa 0 --temp-k 0 --cutoff 24 --nb-list 2,4 --tol 1e-9").code ==
        3);
  // the analytic reference blows up exactly at the transition
  CHECK(run("compare --g 0.5 --kappa 0 --temp-k 0 --nb-list 2").code == 2);
}
