#include "relscope/cli.hpp"
#include "relscope/config.hpp"
#include "relscope/image.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace relscope;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int s = run_command(args, out, err);
  return {s, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("relscope_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config parses every section and round-trips") {
  const RunConfig c = parse_config(
      "[run]\nseed = 9\nworkers = 3\n"
      "[data]\ntrain_count = 30\ntest_count = 9\ncanvas = 224x224\n"
      "[extractor]\nkind = raw_downsample\ngrid = 8\noutput_dim = 192\n"
      "[train]\nlearning_rate = 0.01\nhidden = 32,16\nepochs = 3\n"
      "[occlusion]\nmask_size = 16x8\nstep = 8\nmask_color = 10,20,30\nper_relation = 2\n"
      "[ablation]\nlayer = 1\nfraction = 0.5\n");
  CHECK(c.seed == 9);
  CHECK(c.workers == 3);
  CHECK(c.data.train_count == 30);
  CHECK(c.extractor.kind == ExtractorKind::RawDownsample);
  CHECK(c.train.hidden == std::vector<Index>{32, 16});
  CHECK(c.occlusion.scan.mask_height == 8);
  CHECK(c.occlusion.scan.mask_color == Rgb{10, 20, 30});
  CHECK(c.ablation.layer == 1);

  const RunConfig back = parse_config(config_to_ini(c));
  CHECK(config_to_ini(back) == config_to_ini(c));
  CHECK(config_to_ini(c).find("workers") == std::string::npos);
}

TEST_CASE("config errors are usage errors") {
  CHECK_THROWS_AS(parse_config("[train]\nlearningrate = 0.1\n"), UsageError);
  CHECK_THROWS_AS(parse_config("[train]\nepochs = many\n"), UsageError);
  CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n"), UsageError);
  CHECK_THROWS_AS(load_config("/nonexistent/relscope.ini"), UsageError);
  CHECK(parse_mask_size("16") == std::pair{16, 16});
  CHECK(parse_mask_size("16x12") == std::pair{16, 12});
  CHECK(parse_color("128") == Rgb{128, 128, 128});
  CHECK_THROWS_AS(parse_color("300"), UsageError);
}

TEST_CASE("derived seeds follow the root seed unless set") {
  RunConfig a = parse_config("[run]\nseed = 1\n");
  a.resolve();
  RunConfig b = parse_config("[run]\nseed = 2\n");
  b.resolve();
  CHECK(a.extractor.seed != b.extractor.seed);
  CHECK(a.train.seed == 1);
  RunConfig fixed = parse_config("[run]\nseed = 2\n[extractor]\nseed = 77\n");
  fixed.resolve();
  CHECK(fixed.extractor.seed == 77);
}

TEST_CASE("validation rejects out-of-range values") {
  RunConfig c;
  c.ablation.layer = 5;
  CHECK_THROWS(c.validate("node-scan"));
  c = {};
  c.ablation.fraction = 0.0;
  CHECK_THROWS(c.validate("group-ablate"));
  c = {};
  c.extractor.kind = ExtractorKind::External;
  CHECK_THROWS_AS(c.validate("occlude"), UnsupportedConfiguration);
}

TEST_CASE("cli exit codes") {
  CHECK(run({}).status == kExitUsage);
  CHECK(run({"frobnicate"}).status == kExitUsage);
  const Run help = run({"train", "--help"});
  CHECK(help.status == kExitOk);
  const fs::path dir = scratch("cli_codes");
  write_file_atomic(dir / "bad.ini", std::string_view("[train]\nlearningrate = 1\n"));
  const Run bad = run({"train", "--config", (dir / "bad.ini").string()});
  CHECK(bad.status == kExitUsage);
  CHECK(bad.err.find("learningrate") != std::string::npos);

  const std::string model = (dir / "missing.rscm").string();
  const Run missing = run({"eval", "--model", model, "--features", dir.string(), "--out", dir.string()});
  CHECK(missing.status == kExitRuntime);
  CHECK(missing.err.rfind("relscope: error: ", 0) == 0);
  CHECK((missing.err.find(model) != std::string::npos || missing.err.find("rscf") != std::string::npos));

  CHECK(run({"group-ablate", "--out", dir.string(), "--model", model}).status == kExitRuntime);
  CHECK(run({"node-scan", "--fraction", "2"}).status == kExitUsage);
  fs::remove_all(dir);
}

TEST_CASE("small end-to-end run through the cli") {
  const fs::path dir = scratch("cli_pipeline");
  const std::string ini = (dir / "run.ini").string();
  write_file_atomic(dir / "run.ini",
                    std::string_view("[run]\nseed = 3\n"
                                     "[paths]\ndata = " + (dir / "data").string() + "\nfeatures = " +
                                     (dir / "features").string() + "\nmodel = " + (dir / "model.rscm").string() +
                                     "\nout = " + (dir / "out").string() +
                                     "\n[data]\ntrain_count = 24\ntest_count = 6\n"
                                     "[extractor]\nkind = raw_downsample\ngrid = 8\noutput_dim = 192\n"
                                     "[train]\nepochs = 3\nhidden = 16,8\n"
                                     "[occlusion]\nper_relation = 1\nmask_size = 56\nstep = 56\nshuffles = 50\n"
                                     "[ablation]\ncorrect_only = false\n"));
  for (const char* cmd : {"gen-data", "extract", "train", "eval", "occlude", "node-scan", "group-ablate", "report"}) {
    const Run r = run({cmd, "--config", ini});
    INFO(cmd << ": " << r.err);
    CHECK(r.status == kExitOk);
  }
  CHECK(fs::exists(dir / "data" / "manifest.json"));
  CHECK(fs::exists(dir / "out" / "eval.csv"));
  CHECK(fs::exists(dir / "out" / "occlusion" / "localization.csv"));
  CHECK(fs::exists(dir / "out" / "ablation" / "fc0_accuracy.csv"));
  CHECK(fs::exists(dir / "out" / "report" / "index.html"));
  CHECK(fs::exists(dir / "out" / "config.resolved.ini"));

  const Run ext = run({"occlude", "--config", ini, "--image", (dir / "data" / "train" / "000000.png").string()});
  CHECK(ext.status == kExitUsage);
  fs::remove_all(dir);
}
