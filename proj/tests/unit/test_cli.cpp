#include "scratch_dir.hpp"

#include "krawtex/cli.hpp"
#include "krawtex/colorspace.hpp"
#include "krawtex/dataio.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

using namespace krawtex;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args)
{
  std::ostringstream out, err;
  Run r;
  r.code = cli::dispatch(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string bytes(const fs::path& p)
{
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const fs::path& p)
{
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);)
    out.push_back(line);
  return out;
}

json last_json(const std::string& text)
{
  const auto end = text.find_last_not_of('\n');
  const auto start = text.rfind('\n', end);
  return json::parse(text.substr(start == std::string::npos ? 0 : start + 1, end + 1));
}

} // namespace

TEST_CASE("errors and exit codes")
{
  const ScratchDir dir("cli_errors");
  Run r = run({"frobnicate"});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"] == "unknown_command");

  r = run({});
  CHECK(r.code == 2);

  r = run({"basis"});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"] == "bad_arguments");

  r = run({"basis", "--p", "abc", "--out", (dir / "b.csv").string()});
  CHECK(r.code == 2);

  r = run({"transform", "--in", (dir / "missing.png").string()});
  CHECK(r.code == 1);
  const json e = json::parse(r.err);
  CHECK(e["error"] == "runtime_failure");
  CHECK(e["command"] == "transform");
  CHECK(r.err.find('\n') == r.err.size() - 1);

  r = run({"basis", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("--out") != std::string::npos);
}

TEST_CASE("basis table and config echo")
{
  const ScratchDir dir("cli_basis");
  const fs::path csv = dir / "basis.csv";
  REQUIRE(run({"basis", "--p", "0.5", "--out", csv.string(), "--seed", "3"}).code == 0);
  const auto rows = lines(csv);
  REQUIRE(rows.size() == 65);
  CHECK(rows[0].rfind("index,i,j,v00,v01", 0) == 0);
  CHECK(rows[1].rfind("0,0,0,", 0) == 0);
  CHECK(rows[3].rfind("2,1,0,", 0) == 0);

  const json echo = json::parse(bytes(csv.string() + ".config.json"));
  CHECK(echo["command"] == "basis");
  CHECK(echo["seed"] == 3);
  CHECK(echo["options"]["p"] == "0.5");

  const std::string first = bytes(csv);
  REQUIRE(run({"basis", "--out", csv.string()}).code == 0);
  CHECK(bytes(csv) == first);
}

TEST_CASE("toy pipeline end to end")
{
  const ScratchDir dir("cli_pipeline");
  const fs::path toy = dir / "toy";
  REQUIRE(run({"toyset", "--out-dir", toy.string(), "--count", "4", "--size", "32", "--seed", "9"}).code == 0);
  CHECK(fs::exists(toy / "hazy/0003.png"));
  CHECK(fs::exists(toy / "clear/0000.png"));
  CHECK(load_manifest(toy / "manifest.txt").pairs.size() == 4);

  // the seed falls back to the environment
  const fs::path env_toy = dir / "env_toy";
  ::setenv("KRAWTEX_SEED", "9", 1);
  REQUIRE(run({"toyset", "--out-dir", env_toy.string(), "--count", "4", "--size", "32"}).code == 0);
  ::unsetenv("KRAWTEX_SEED");
  CHECK(bytes(env_toy / "hazy/0002.png") == bytes(toy / "hazy/0002.png"));
  ::setenv("KRAWTEX_SEED", "nine", 1);
  CHECK(run({"toyset", "--out-dir", env_toy.string(), "--count", "1"}).code == 2);
  ::unsetenv("KRAWTEX_SEED");

  const fs::path hazy = toy / "hazy/0001.png";
  Run r = run({"transform", "--in", hazy.string(), "--roundtrip"});
  REQUIRE(r.code == 0);
  CHECK(last_json(r.out)["max_roundtrip_error"].get<double>() < 1e-8);
  r = run({"transform", "--in", hazy.string(), "--roundtrip", "--mode", "sliding", "--out", (dir / "t.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(last_json(r.out)["max_roundtrip_error"].get<double>() < 1e-8);
  CHECK(lines(dir / "t.csv").size() == 65);

  r = run({"analyze", "--manifest", (toy / "manifest.txt").string(), "--out", (dir / "bands.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(lines(dir / "bands.csv").size() == 65);
  r = run({"analyze", "--hazy-dir", (toy / "hazy").string(), "--clear-dir", (toy / "clear").string(), "--out",
           (dir / "bands2.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(bytes(dir / "bands2.csv") == bytes(dir / "bands.csv"));

  const std::vector<std::string> train_args{"train",   "--manifest", (toy / "manifest.txt").string(),
                                            "--out",   (dir / "m.ckpt").string(),
                                            "--scale", "0.25",
                                            "--patch", "16",
                                            "--batch", "2",
                                            "--epochs", "1",
                                            "--seed",  "5"};
  r = run(train_args);
  REQUIRE(r.code == 0);
  const json summary = last_json(r.out);
  CHECK(summary["steps"] == 2);
  const auto log = lines(dir / "m.ckpt.loss.csv");
  REQUIRE(log.size() == 3);
  CHECK(log[0] == "step,loss_total,loss_l1,loss_mse,loss_feat,loss_g,loss_d");
  const std::string ckpt = bytes(dir / "m.ckpt");
  CHECK(ckpt.substr(0, 4) == "OTGK");
  REQUIRE(run(train_args).code == 0);
  CHECK(bytes(dir / "m.ckpt") == ckpt);

  const PlanarImage input = load_image(hazy);
  const YCbCrImage in_ycc = rgb_to_ycbcr(input);
  for (const std::vector<std::string>& mode : {std::vector<std::string>{"--model", (dir / "m.ckpt").string()},
                                               std::vector<std::string>{"--baseline", "dcp"}}) {
    std::vector<std::string> args{"dehaze", "--in", hazy.string(), "--out", (dir / "out.png").string()};
    args.insert(args.end(), mode.begin(), mode.end());
    INFO(mode[0]);
    REQUIRE(run(args).code == 0);
    const PlanarImage output = load_image(dir / "out.png");
    REQUIRE(output.height() == input.height());
    REQUIRE(output.width() == input.width());
    const YCbCrImage out_ycc = rgb_to_ycbcr(output);
    // only the 8-bit rounding of the written file moves the chroma
    CHECK((out_ycc.cb - in_ycc.cb).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-9);
    CHECK((out_ycc.cr - in_ycc.cr).cwiseAbs().maxCoeff() <= 0.5 / 255.0 + 1e-9);
    const std::string first = bytes(dir / "out.png");
    REQUIRE(run(args).code == 0);
    CHECK(bytes(dir / "out.png") == first);
  }
  CHECK(run({"dehaze", "--in", hazy.string(), "--out", (dir / "x.png").string()}).code == 2);
  CHECK(run({"dehaze", "--in", hazy.string(), "--out", (dir / "x.png").string(), "--baseline", "magic"}).code == 2);

  r = run({"evaluate", "--manifest", (toy / "manifest.txt").string(), "--baseline", "none", "--out",
           (dir / "none.csv").string()});
  REQUIRE(r.code == 0);
  const auto none = lines(dir / "none.csv");
  REQUIRE(none.size() == 6);
  CHECK(none[0] == "image,psnr_db,ssim");
  CHECK(none[5].rfind("MEAN,", 0) == 0);

  r = run({"evaluate", "--pred-dir", (toy / "clear").string(), "--gt-dir", (toy / "clear").string(), "--out",
           (dir / "self.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(lines(dir / "self.csv")[5].rfind("MEAN,100", 0) == 0);

  r = run({"evaluate", "--manifest", (toy / "manifest.txt").string(), "--model", (dir / "m.ckpt").string(),
           "--y-only", "--out", (dir / "model.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(lines(dir / "model.csv").size() == 6);
}

TEST_CASE("synthesize")
{
  const ScratchDir dir("cli_synthesize");
  PlanarImage clear({Channel::Constant(16, 24, 0.2), Channel::Constant(16, 24, 0.4), Channel::Constant(16, 24, 0.6)},
                    ColorSpace::RGB);
  save_image(clear, dir / "clear.png");
  Run r = run({"synthesize", "--clear", (dir / "clear.png").string(), "--beta", "1.5", "--airlight", "0.9",
               "--out", (dir / "hazy.png").string(), "--transmission-out", (dir / "t.png").string()});
  REQUIRE(r.code == 0);
  const PlanarImage hazy = load_image(dir / "hazy.png");
  const Channel t = load_gray(dir / "t.png");
  CHECK(hazy.height() == 16);
  CHECK(t.cols() == 24);
  // every pixel moves toward the airlight
  for (int c = 0; c < 3; ++c)
    CHECK((hazy.channels[c].array() >= clear.channels[c].array() - 0.5 / 255.0).all());
  CHECK(t.maxCoeff() <= 1.0);
  CHECK(t.minCoeff() >= std::exp(-1.5) - 1.0 / 255.0);
  CHECK(fs::exists(dir / "hazy.png.config.json"));

  CHECK(run({"synthesize", "--clear", (dir / "clear.png").string(), "--beta", "0", "--out",
             (dir / "h2.png").string()})
            .code == 2);
  CHECK(run({"synthesize", "--clear", (dir / "clear.png").string(), "--depth-kind", "flat", "--out",
             (dir / "h2.png").string()})
            .code != 0);
}

TEST_CASE("gradcheck command")
{
  const ScratchDir dir("cli_gradcheck");
  const Run r = run({"gradcheck", "--scale", "0.25", "--batch", "1", "--samples", "1", "--target", "discriminator",
                     "--out", (dir / "g.csv").string()});
  REQUIRE(r.code == 0);
  CHECK(last_json(r.out)["discriminator"]["max_relative_error"].get<double>() < 1e-4);
  CHECK(lines(dir / "g.csv").size() > 1);
  CHECK(run({"gradcheck", "--target", "everything"}).code == 2);
}
