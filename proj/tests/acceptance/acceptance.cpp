// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.

#include "oracles.hpp"

#include "krawtex/block_transform.hpp"
#include "krawtex/cli.hpp"
#include "krawtex/colorspace.hpp"
#include "krawtex/krawtchouk.hpp"
#include "krawtex/metrics.hpp"
#include "krawtex/nn/discriminator.hpp"
#include "krawtex/nn/feature_bank.hpp"
#include "krawtex/nn/generator.hpp"
#include "krawtex/nn/gradcheck.hpp"
#include "krawtex/nn/layers.hpp"
#include "krawtex/nn/ops.hpp"
#include "krawtex/nn/trainer.hpp"
#include "krawtex/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace krawtex;

namespace {

// Tolerances and sizes.
constexpr double kOrthoTol = 1e-10;
constexpr double kSeriesTol = 1e-9;
constexpr double kRoundtripTol = 1e-8;
constexpr double kParsevalTol = 1e-8;
constexpr double kGradTol = 1e-4;
constexpr double kLinearGradTol = 1e-6;
constexpr double kIdentityTol = 1e-6;
constexpr double kLossDrop = 0.5;
constexpr double kPsnrGain = 1.0;
constexpr double kPsnrTarget = 48.13;
constexpr double kPsnrTol = 0.01;
constexpr double kSsimTol = 1e-9;

constexpr int kTrainCount = 50;
constexpr int kHeldOutCount = 10;
constexpr int kToySize = 64;
constexpr int kSteps = 200;
constexpr std::uint64_t kTrainSeed = 1;
constexpr std::uint64_t kHeldOutSeed = 2;
const std::string kToyScale = "0.25";

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;  // 0 = no limit of its own
  std::function<Outcome()> run;
};

std::string fmt(double v, int precision = 3)
{
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string bytes(const fs::path& p)
{
  std::ifstream is(p, std::ios::binary);
  if (!is)
    throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

json run_cli(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  if (code != 0)
    throw std::runtime_error(args.front() + " exited " + std::to_string(code) + ": " + err.str());
  const std::string text = out.str();
  const auto end = text.find_last_not_of('\n');
  if (end == std::string::npos)
    return json::object();
  const auto start = text.rfind('\n', end);
  return json::parse(text.substr(start == std::string::npos ? 0 : start + 1, end + 1 - (start == std::string::npos ? 0 : start + 1)));
}

struct MeanScores {
  double psnr = 0.0;
  double ssim = 0.0;
};

MeanScores mean_row(const fs::path& csv)
{
  std::ifstream is(csv);
  for (std::string line; std::getline(is, line);)
    if (line.rfind("MEAN,", 0) == 0) {
      std::istringstream row(line.substr(5));
      std::string psnr, ssim;
      std::getline(row, psnr, ',');
      std::getline(row, ssim, ',');
      return {std::stod(psnr), std::stod(ssim)};
    }
  throw std::runtime_error("no MEAN row in " + csv.string());
}

// smooth-L1 column of a loss log, in step order
std::vector<double> smooth_l1_series(const fs::path& log)
{
  std::ifstream is(log);
  std::string line;
  std::getline(is, line);
  if (line != "step,loss_total,loss_l1,loss_mse,loss_feat,loss_g,loss_d")
    throw std::runtime_error("unexpected loss log header in " + log.string());
  std::vector<double> out;
  while (std::getline(is, line)) {
    std::istringstream row(line);
    std::string cell;
    for (int i = 0; i < 3; ++i)
      std::getline(row, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

// Shared toy data and trained models for the training criteria.
class ToyWorkspace {
public:
  explicit ToyWorkspace(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }
  fs::path train_dir() const { return root_ / "toy_train"; }
  fs::path heldout_dir() const { return root_ / "toy_heldout"; }

  void ensure_data()
  {
    if (data_ready_)
      return;
    run_cli({"toyset", "--out-dir", train_dir().string(), "--count", std::to_string(kTrainCount), "--size",
             std::to_string(kToySize), "--seed", std::to_string(kTrainSeed)});
    run_cli({"toyset", "--out-dir", heldout_dir().string(), "--count", std::to_string(kHeldOutCount), "--size",
             std::to_string(kToySize), "--seed", std::to_string(kHeldOutSeed)});
    data_ready_ = true;
  }

  std::vector<std::string> train_args(int split, const fs::path& out) const
  {
    return {"train",   "--manifest", (train_dir() / "manifest.txt").string(),
            "--out",   out.string(),
            "--scale", kToyScale,
            "--split", std::to_string(split),
            "--patch", std::to_string(kToySize),
            "--batch", "15",
            "--max-steps", std::to_string(kSteps),
            "--seed",  std::to_string(kTrainSeed)};
  }

  fs::path model(int split)
  {
    ensure_data();
    const fs::path out = root_ / ("model_T" + std::to_string(split) + ".ckpt");
    if (!trained_.count(split)) {
      run_cli(train_args(split, out));
      trained_.insert(split);
    }
    return out;
  }

  MeanScores evaluate_model(int split, bool y_only = true)
  {
    const fs::path csv = root_ / ("eval_T" + std::to_string(split) + (y_only ? "_y" : "_rgb") + ".csv");
    std::vector<std::string> args{"evaluate", "--manifest", (heldout_dir() / "manifest.txt").string(), "--model",
                                  model(split).string(), "--out", csv.string()};
    if (y_only)
      args.push_back("--y-only");
    run_cli(args);
    return mean_row(csv);
  }

  MeanScores evaluate_hazy(bool y_only = true)
  {
    ensure_data();
    const fs::path csv = root_ / (std::string("eval_hazy") + (y_only ? "_y" : "_rgb") + ".csv");
    std::vector<std::string> args{"evaluate", "--manifest", (heldout_dir() / "manifest.txt").string(), "--baseline",
                                  "none", "--out", csv.string()};
    if (y_only)
      args.push_back("--y-only");
    run_cli(args);
    return mean_row(csv);
  }

private:
  fs::path root_;
  bool data_ready_ = false;
  std::set<int> trained_;
};

// ---- criteria ----

Outcome orthonormality()
{
  double worst = 0.0;
  for (int size : {2, 4, 8, 16, 32}) {
    const PolynomialMatrix m = polynomial_matrix(KrawtchoukParams(0.5, size));
    worst = std::max(worst, (m.entries * m.entries.transpose() - Eigen::MatrixXd::Identity(size, size))
                                .cwiseAbs()
                                .maxCoeff());
  }
  return {worst < kOrthoTol, "max|MM^T - I| = " + fmt(worst) + " for p = 0.5, N in {2,4,8,16,32}"};
}

Outcome series_agreement()
{
  double worst = 0.0;
  int count = 0;
  for (auto [num, den] : {std::pair{1, 2}, std::pair{1, 5}, std::pair{7, 10}}) {
    const double p = static_cast<double>(num) / den;
    for (int size = 2; size <= 16; ++size) {
      const KrawtchoukParams params(p, size);
      for (int n = 0; n < size; ++n)
        for (int x = 0; x < size; ++x) {
          const double direct = static_cast<double>(oracle::krawtchouk_exact(n, x, size - 1, num, den));
          const double got = krawtchouk_poly(n, x, params);
          worst = std::max(worst, std::abs(got - direct) / std::max(std::abs(direct), 1.0));
          ++count;
        }
    }
  }
  return {worst < kSeriesTol,
          "max relative error " + fmt(worst) + " over " + std::to_string(count) + " (p, N <= 16, n, x) cases"};
}

Outcome reconstruction()
{
  const BasisSet basis = basis_set(KrawtchoukParams(0.5, 8));
  double worst_rt = 0.0, worst_energy = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Channel c = oracle::random_matrix(64, 64, 500 + i);
    const FrequencyCube cube = kcl_apply(c, basis, KclMode::Block);
    worst_rt = std::max(worst_rt, (ikcl_exact(cube, basis) - c).cwiseAbs().maxCoeff());
    for (int by = 0; by < 8; ++by)
      for (int bx = 0; bx < 8; ++bx) {
        double energy = 0.0;
        for (const Channel& m : cube.maps)
          energy += m(by, bx) * m(by, bx);
        worst_energy = std::max(worst_energy, std::abs(energy - c.block(8 * by, 8 * bx, 8, 8).squaredNorm()));
      }
  }
  return {worst_rt < kRoundtripTol && worst_energy < kParsevalTol,
          "20 channels 64x64: max roundtrip error " + fmt(worst_rt) + ", max block energy mismatch " +
              fmt(worst_energy)};
}

Outcome frequency_observation()
{
  const BasisSet basis = basis_set(KrawtchoukParams(0.5, 8));
  int holds = 0;
  double min_ratio = 1e300;
  constexpr int kImages = 24;
  for (int i = 0; i < kImages; ++i) {
    const ToyPair pair = toy_pair(64, 64, 9000 + i, ToyHazeOptions{0.8, 0.3, 0.7});
    const auto stats = band_energy_stats(kcl_apply(luma(pair.hazy).channels[0], basis, KclMode::Block),
                                         kcl_apply(luma(pair.clear).channels[0], basis, KclMode::Block));
    double low = 0.0, high = 0.0;
    for (int k = 0; k < 8; ++k) {
      low += stats[k].mean_abs_diff / 8.0;
      high += stats[56 + k].mean_abs_diff / 8.0;
    }
    holds += low > high ? 1 : 0;
    min_ratio = std::min(min_ratio, high > 0.0 ? low / high : 1e300);
  }
  return {holds == kImages, std::to_string(holds) + "/" + std::to_string(kImages) +
                                " images have larger low-band (0-7) than high-band (56-63) loss; smallest ratio " +
                                fmt(min_ratio)};
}

struct Leaf {
  nn::ParameterStore store;
  nn::Parameter* param;
  Leaf(const std::string& name, nn::Tensor value) : param(&store.add(name, std::move(value))) {}
  nn::Var operator()(nn::Tape& t) const { return t.parameter(*param); }
};

nn::Tensor random_tensor(nn::Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  nn::Tensor t(shape);
  for (double& v : t.values())
    v = u(rng);
  return t;
}

Outcome gradient_checks()
{
  using namespace nn;
  struct Case {
    std::string name;
    bool linear;
    double error;
  };
  std::vector<Case> cases;
  auto record = [&](const std::string& name, bool linear, const std::vector<ParameterStore*>& stores,
                    const ScalarLoss& loss) {
    cases.push_back({name, linear, gradient_check(stores, loss).max_relative_error});
  };

  Leaf x("x", random_tensor({2, 4, 8, 8}, 1));
  {
    Leaf w("w", random_tensor({4, 4, 3, 3}, 2));
    Leaf b("b", random_tensor({4, 1, 1, 1}, 3));
    const Tensor probe = random_probe({2, 4, 4, 4}, 4);
    record("conv", true, {&x.store, &w.store, &b.store}, [&](Tape& t) {
      return dot(t, conv2d(t, x(t), w(t), b(t), ConvGeometry::same(3, 3, 2)), probe);
    });
  }
  {
    const Tensor probe = random_probe({2, 4, 4, 4}, 5);
    record("downsample", true, {&x.store}, [&](Tape& t) { return dot(t, avg_pool2(t, x(t)), probe); });
    const Tensor up = random_probe({2, 4, 16, 16}, 6);
    record("upsample", true, {&x.store}, [&](Tape& t) { return dot(t, upsample2(t, x(t)), up); });
  }
  {
    const Tensor probe = random_probe({2, 4, 8, 8}, 7);
    record("activation", false, {&x.store}, [&](Tape& t) { return dot(t, silu(t, sigmoid(t, x(t))), probe); });
  }
  {
    ParameterStore store;
    Rng rng(8);
    std::vector<ConvLayer> growth;
    for (int l = 0; l < 4; ++l)
      growth.push_back(add_conv(store, "g" + std::to_string(l), 4 + 2 * l, 2, 3, rng));
    DenseBlock block{growth, add_conv(store, "fuse", 12, 4, 1, rng)};
    const Tensor probe = random_probe({2, 4, 8, 8}, 9);
    record("dense block", false, {&x.store, &store}, [&](Tape& t) { return dot(t, block(t, x(t)), probe); });
  }
  {
    ParameterStore store;
    Rng rng(10);
    const ConvLayer gate = add_conv(store, "gate", 4, 4, 1, rng);
    const Tensor probe = random_probe({2, 4, 8, 8}, 11);
    record("attention gate", false, {&x.store, &store}, [&](Tape& t) {
      const Var in = x(t);
      return dot(t, mul_channels(t, in, sigmoid(t, gate(t, global_avg_pool(t, in)))), probe);
    });
  }
  {
    ParameterStore store;
    const BatchNormLayer bn = add_batch_norm(store, "bn", 4);
    perturb_trainable(store, 12, 0.3);
    const Tensor probe = random_probe({2, 4, 8, 8}, 13);
    record("batch norm", false, {&x.store, &store}, [&](Tape& t) { return dot(t, bn(t, x(t), true), probe); });
  }
  {
    Leaf pred("pred", random_tensor({2, 1, 8, 8}, 14, 0.0, 1.0));
    Leaf score("score", random_tensor({2, 1, 1, 1}, 15, 0.1, 0.9));
    const Tensor target = random_tensor({2, 1, 8, 8}, 16, 0.0, 1.0);
    FeatureBank bank(17);
    record("losses", false, {&pred.store, &score.store}, [&](Tape& t) {
      return weighted_sum(t, {{smooth_l1_loss(t, pred(t), target), 1.0},
                              {mse_loss(t, pred(t), target), 0.04},
                              {bank.loss(t, pred(t), target), 0.5},
                              {generator_gan_loss(t, score(t)), 0.05},
                              {discriminator_gan_loss(t, score(t), score(t)), 1.0}});
    });
  }

  // full networks at width scale 1 on 16x16 inputs
  const json nets = run_cli({"gradcheck", "--scale", "1", "--size", "16", "--batch", "2", "--samples", "3", "--seed",
                             "0", "--tolerance", "1"});
  cases.push_back({"generator", false, nets["generator"]["max_relative_error"].get<double>()});
  cases.push_back({"discriminator", false, nets["discriminator"]["max_relative_error"].get<double>()});

  bool pass = true;
  std::string detail;
  for (const Case& c : cases) {
    pass &= c.error < (c.linear ? kLinearGradTol : kGradTol);
    detail += (detail.empty() ? "" : ", ") + c.name + " " + fmt(c.error, 2);
  }
  return {pass, "max relative errors: " + detail};
}

Outcome identity_at_init()
{
  double worst = 0.0;
  for (double scale : {0.25, 1.0}) {
    nn::Generator gen(nn::GeneratorConfig::at_scale(scale), 3);
    const Channel plane = oracle::random_matrix(64, 64, 4);
    worst = std::max(worst, (nn::dehaze_luma(gen, plane) - plane).cwiseAbs().maxCoeff());
  }
  return {worst < kIdentityTol, "max |G(x) - x| = " + fmt(worst) + " at init, scales 0.25 and 1, 64x64"};
}

Outcome toy_training(ToyWorkspace& ws)
{
  const fs::path model = ws.model(60);
  const std::vector<double> l1 = smooth_l1_series(model.string() + ".loss.csv");
  if (l1.size() != static_cast<std::size_t>(kSteps))
    return {false, "loss log has " + std::to_string(l1.size()) + " rows"};
  const double drop = 1.0 - l1.back() / l1.front();
  const MeanScores model_y = ws.evaluate_model(60, true);
  const MeanScores hazy_y = ws.evaluate_hazy(true);
  const MeanScores model_rgb = ws.evaluate_model(60, false);
  const MeanScores hazy_rgb = ws.evaluate_hazy(false);
  const double gain = model_y.psnr - hazy_y.psnr;
  return {drop >= kLossDrop && gain >= kPsnrGain,
          "smooth-L1 " + fmt(l1.front(), 4) + " -> " + fmt(l1.back(), 4) + " (-" + fmt(100 * drop, 3) +
              "%); held-out luma PSNR " + fmt(hazy_y.psnr, 4) + " -> " + fmt(model_y.psnr, 4) + " dB (+" +
              fmt(gain, 3) + "); RGB " + fmt(hazy_rgb.psnr, 4) + " -> " + fmt(model_rgb.psnr, 4) + " dB"};
}

Outcome dcp_sanity(ToyWorkspace& ws)
{
  ws.ensure_data();
  const fs::path out_dir = ws.root() / "dcp_train";
  fs::create_directories(out_dir);
  for (const auto& entry : fs::directory_iterator(ws.train_dir() / "hazy"))
    run_cli({"dehaze", "--baseline", "dcp", "--in", entry.path().string(), "--out",
             (out_dir / entry.path().filename()).string()});
  run_cli({"evaluate", "--pred-dir", out_dir.string(), "--gt-dir", (ws.train_dir() / "clear").string(), "--out",
           (ws.root() / "eval_dcp.csv").string()});
  run_cli({"evaluate", "--pred-dir", (ws.train_dir() / "hazy").string(), "--gt-dir",
           (ws.train_dir() / "clear").string(), "--out", (ws.root() / "eval_hazy_train.csv").string()});
  const MeanScores dcp = mean_row(ws.root() / "eval_dcp.csv");
  const MeanScores hazy = mean_row(ws.root() / "eval_hazy_train.csv");
  return {dcp.psnr > hazy.psnr, std::to_string(kTrainCount) + " toy pairs, mean RGB PSNR hazy " + fmt(hazy.psnr, 4) +
                                    " dB -> dcp " + fmt(dcp.psnr, 4) + " dB"};
}

Outcome metric_correctness()
{
  const Channel gt = oracle::random_matrix(64, 64, 1, 0.1, 0.9);
  const Channel off = (gt.array() + 1.0 / 255.0).matrix();
  const double p = psnr(off, gt);
  const double s = ssim(gt, gt);
  return {std::abs(p - kPsnrTarget) <= kPsnrTol && std::abs(s - 1.0) <= kSsimTol,
          "PSNR of uniform 1/255 error " + fmt(p, 6) + " dB, SSIM(x, x) - 1 = " + fmt(s - 1.0)};
}

Outcome determinism(ToyWorkspace& ws)
{
  std::vector<std::string> mismatched;
  auto same = [&](const fs::path& a, const fs::path& b) {
    if (bytes(a) != bytes(b))
      mismatched.push_back(b.filename().string());
  };
  const fs::path root = ws.root() / "rerun";
  fs::create_directories(root);

  // training
  const fs::path first = ws.model(60);
  const fs::path second = root / "model_T60.ckpt";
  run_cli(ws.train_args(60, second));
  same(first, second);
  same(first.string() + ".loss.csv", second.string() + ".loss.csv");

  // data generation
  run_cli({"toyset", "--out-dir", (root / "toy_train").string(), "--count", std::to_string(kTrainCount), "--size",
           std::to_string(kToySize), "--seed", std::to_string(kTrainSeed)});
  for (const char* sub : {"hazy", "clear"})
    for (const auto& entry : fs::directory_iterator(ws.train_dir() / sub))
      same(entry.path(), root / "toy_train" / sub / entry.path().filename());
  same(ws.train_dir() / "manifest.txt", root / "toy_train" / "manifest.txt");

  // every other command, twice
  const std::string hazy = (ws.train_dir() / "hazy" / "0000.png").string();
  const std::string clear = (ws.train_dir() / "clear" / "0000.png").string();
  const std::string manifest = (ws.heldout_dir() / "manifest.txt").string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"basis.csv", {"basis", "--out"}},
      {"bands.csv", {"analyze", "--manifest", manifest, "--out"}},
      {"transform.csv", {"transform", "--in", hazy, "--roundtrip", "--out"}},
      {"synth.png", {"synthesize", "--clear", clear, "--depth-kind", "smooth", "--out"}},
      {"dehazed_model.png", {"dehaze", "--model", first.string(), "--in", hazy, "--out"}},
      {"dehazed_dcp.png", {"dehaze", "--baseline", "dcp", "--in", hazy, "--out"}},
      {"eval.csv", {"evaluate", "--manifest", manifest, "--model", first.string(), "--out"}},
      {"grad.csv", {"gradcheck", "--scale", "0.25", "--samples", "1", "--out"}},
  };
  for (const auto& [leaf, args] : commands) {
    for (const char* run : {"a_", "b_"}) {
      std::vector<std::string> full = args;
      full.push_back((root / (run + leaf)).string());
      full.insert(full.end(), {"--seed", "7"});
      run_cli(full);
    }
    same(root / ("a_" + leaf), root / ("b_" + leaf));
  }
  std::string detail = "checkpoint, loss log, toy set and " + std::to_string(commands.size()) +
                       " command outputs compared byte for byte";
  if (!mismatched.empty()) {
    detail += "; differing:";
    for (const auto& m : mismatched)
      detail += " " + m;
  }
  return {mismatched.empty(), detail};
}

Outcome threshold_sweep(ToyWorkspace& ws)
{
  const fs::path csv = ws.root() / "threshold_sweep.csv";
  std::ostringstream table;
  table << "split,psnr_db,ssim,smooth_l1_first,smooth_l1_last\n";
  std::string detail;
  bool finite = true;
  for (int split : {40, 50, 60, 63}) {
    const MeanScores s = ws.evaluate_model(split, true);
    const auto l1 = smooth_l1_series(ws.model(split).string() + ".loss.csv");
    table << split << ',' << std::setprecision(10) << s.psnr << ',' << s.ssim << ',' << l1.front() << ','
          << l1.back() << '\n';
    finite &= std::isfinite(s.psnr) && std::isfinite(s.ssim);
    detail += (detail.empty() ? "" : ", ") + ("T=" + std::to_string(split)) + " " + fmt(s.psnr, 4) + " dB/" +
              fmt(s.ssim, 3);
  }
  std::ofstream(csv) << table.str();
  return {finite && fs::exists(csv), detail + " -> " + csv.string()};
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Acceptance checks"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory for generated data and models");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);
  ToyWorkspace ws{fs::absolute(work)};

  const std::vector<Criterion> criteria{
      {1, "orthonormality", 1, orthonormality},
      {2, "series/recurrence agreement", 1, series_agreement},
      {3, "perfect reconstruction", 5, reconstruction},
      {4, "frequency observation", 30, frequency_observation},
      {5, "gradient checks", 120, gradient_checks},
      {6, "identity at init", 5, identity_at_init},
      {7, "toy training", 600, [&] { return toy_training(ws); }},
      {8, "DCP baseline sanity", 30, [&] { return dcp_sanity(ws); }},
      {9, "metric correctness", 1, metric_correctness},
      {10, "determinism", 0, [&] { return determinism(ws); }},
      {11, "threshold sweep", 2700, [&] { return threshold_sweep(ws); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    }
    catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.limit_s <= 0 || seconds < c.limit_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << c.id << "  " << c.name << ": "
              << o.detail << " [" << std::fixed << std::setprecision(1) << seconds << " s";
    if (c.limit_s > 0)
      std::cout << ", limit " << std::defaultfloat << std::setprecision(6) << c.limit_s << " s";
    std::cout << std::defaultfloat << "]" << (in_time ? "" : " (over time limit)") << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
