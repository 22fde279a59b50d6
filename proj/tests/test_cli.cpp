#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trimod/corpus.hpp"

namespace fs = std::filesystem;
using namespace trimod;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run_shell(const std::string& cmd) {
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (auto n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Run run(const std::string& args) {
  return run_shell(std::string(TRIMOD_CLI) + " " + args + " 2>/dev/null");
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("trimod_cli_" + std::to_string(getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
  }
};

const std::string kCorpus =
    "# img: a\nMaple\tB-ORG\nLeafs\tI-ORG\nwin\tO\n#TonightGame\tO\n\n"
    "# img: b\nRex\tB-PER\nloves\tO\nParis\tB-LOC\n\n"
    "Alice\tB-PER\nat\tO\nthe\tO\nOlympics\tB-MISC\n";

const std::string kVisual = "dim 4\na 0.1 0.2 0.3 0.4\nb -1 0 1 0.5\n";

const std::string kSmall =
    " --config {cfg} --epochs 3 --batch-size 2 --k-steps 1 --quiet";

std::string small(const TempDir& t) {
  t.write("small.cfg",
          "word_embedding_dim = 8\nchar_embedding_dim = 4\nchar_hidden_dim = 3\n"
          "word_hidden_dim = 5\nfused_dim = 6\nsegmenter_embedding_dim = 4\n"
          "segmenter_filters = 5\nsegmenter_hidden_dim = 3\n");
  std::string s = kSmall;
  s.replace(s.find("{cfg}"), 5, t.file("small.cfg"));
  return s;
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("train --dev x").code == 2);
  CHECK(run("eval --model nope.trimod --test nope.txt").code == 2);
  TempDir t;
  t.write("bad.cfg", "no_such_key = 1\n");
  t.write("c.txt", kCorpus);
  CHECK(run("train --train " + t.file("c.txt") + " --dev " + t.file("c.txt") + " --config " +
            t.file("bad.cfg"))
            .code == 2);
}

TEST_CASE("missing train file names the path") {
  const auto r = run_shell(std::string(TRIMOD_CLI) +
                           " train --train /nonexistent/posts.txt --dev x 2>&1");
  CHECK(r.code == 2);
  CHECK(r.out.find("/nonexistent/posts.txt") != std::string::npos);
}

TEST_CASE("train, eval, predict and stats round trip") {
  TempDir t;
  t.write("c.txt", kCorpus);
  t.write("v.txt", kVisual);
  const auto model = t.file("m.trimod");
  const auto train = run("train --train " + t.file("c.txt") + " --dev " + t.file("c.txt") +
                         " --visual " + t.file("v.txt") + " --out " + model + " --report " +
                         t.file("r.csv") + small(t));
  REQUIRE(train.code == 0);
  CHECK(fs::exists(model));
  std::ifstream report(t.file("r.csv"));
  std::string header;
  std::getline(report, header);
  CHECK(header == "epoch,learning_rate,mean_loss,dev_precision,dev_recall,dev_f1");

  const auto eval = run("eval --model " + model + " --test " + t.file("c.txt") + " --visual " +
                        t.file("v.txt") + " --per-category");
  CHECK(eval.code == 0);
  CHECK(eval.out.find("overall") != std::string::npos);
  CHECK(eval.out.find("Person") != std::string::npos);

  const auto predict = run("predict --model " + model + " --input " + t.file("c.txt") +
                           " --visual " + t.file("v.txt") + " --explain");
  REQUIRE(predict.code == 0);
  std::istringstream reparsed_in(predict.out);
  const auto reparsed = parse_corpus(reparsed_in);
  std::istringstream original_in(kCorpus);
  const auto original = parse_corpus(original_in);
  CHECK(reparsed == original);

  const auto stats = run("stats --corpus " + t.file("c.txt"));
  CHECK(stats.code == 0);
  CHECK(stats.out.find("Total") != std::string::npos);
}

TEST_CASE("same seed gives byte-identical models") {
  TempDir t;
  t.write("c.txt", kCorpus);
  auto train = [&](const std::string& out) {
    return run("train --train " + t.file("c.txt") + " --dev " + t.file("c.txt") +
               " --seed 5 --out " + t.file(out) + small(t));
  };
  REQUIRE(train("a.trimod").code == 0);
  REQUIRE(train("b.trimod").code == 0);
  auto slurp = [&](const std::string& name) {
    std::ifstream in(t.file(name), std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp("a.trimod") == slurp("b.trimod"));
}

TEST_CASE("numeric failures exit with 1") {
  TempDir t;
  t.write("c.txt", kCorpus);
  t.write("huge.txt", "dim 4\na 1e308 1e308 1e308 1e308\nb 1e308 -1e308 1e308 1e308\n");
  const auto r = run("train --train " + t.file("c.txt") + " --dev " + t.file("c.txt") +
                     " --visual " + t.file("huge.txt") + " --out " + t.file("m.trimod") +
                     small(t));
  CHECK(r.code == 1);
  CHECK(run("gradcheck --module crf --eps 0.5").code == 1);
}

TEST_CASE("gradcheck and heuristic segmentation succeed") {
  const auto g = run("gradcheck --module fusion");
  CHECK(g.code == 0);
  CHECK(g.out.find("fusion") != std::string::npos);
  const auto s = run_shell("printf '#PlayingWithDog\\n' | " + std::string(TRIMOD_CLI) +
                           " segment --heuristic");
  CHECK(s.code == 0);
  CHECK(s.out == "Playing With Dog\n");
}
