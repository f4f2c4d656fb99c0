#include <doctest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "dagmc/io.hpp"
#include "helpers.hpp"

namespace {

struct Result {
  int code;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Result run(const std::vector<std::string>& args, bool merge_stderr = false) {
  std::string cmd = quote(DAGMC_CLI_PATH);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("binary prints the baseball report") {
  const auto model = (testing::models_dir() / "baseball.model").string();
  const Result r = run({model});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("Functional average = [ ", 0) == 0);
  CHECK(r.out.find("Acceptance rates:  ( mu ): ") != std::string::npos);
  CHECK(r.out.find("( a ): ") != std::string::npos);
}

TEST_CASE("binary writes traces through an inline override") {
  const auto dir = testing::temp_dir("proc");
  const auto model = (testing::models_dir() / "baseball.model").string();
  const auto bin = (dir / "bb.bin").string();
  REQUIRE(run({model, "-e", "para.outfile='" + bin + "'", "-e", "para = { niter = 100, nburn = 10 }"}).code == 0);
  const auto table = dagmc::io::read_trace_binary(bin);
  CHECK(table.rows.size() == 100);
  const std::string first = testing::read_file(bin);
  REQUIRE(run({model, "-e", "para.outfile='" + bin + "'", "-e", "para = { niter = 100, nburn = 10 }"}).code == 0);
  CHECK(testing::read_file(bin) == first);
}

TEST_CASE("binary error reporting") {
  const Result missing = run({"/nonexistent/x.model"}, true);
  CHECK(missing.code == 1);
  CHECK(missing.out == "error: file not found: /nonexistent/x.model\n");
  CHECK(run({}).code == 2);
  const Result syntax = run({(testing::models_dir() / "baseball.model").string(), "-e", "para = {"},
                            true);
  CHECK(syntax.code == 1);
  CHECK(syntax.out.rfind("error: -e #1:1:9: ", 0) == 0);
}
